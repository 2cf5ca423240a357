"""Sensor fault detection for multiphase flow meters from forecast residues.

A target sensor ``g`` is forecast one step ahead, either from its own history
or from a correlated upstream sensor ``c``. Faults on ``g`` show up as shifts
in the rolling mean or spread of the forecast residue, which are compared
with thresholds learned on fault-free data.

Modules: ``core`` (series, CSV, splits), ``simulator``, ``forecasters``,
``residue`` (statistics and alarms), ``faults``, ``evaluation``, ``config``,
``pipeline`` and ``cli``.
"""

__version__ = "0.1.0"
