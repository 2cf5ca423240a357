"""Model files: versioned JSON with floats stored as C99 hex literals.

Layout (``format_version`` 1)::

    {
      "format": "flowfault-model",
      "format_version": 1,
      "kind": {"type": "naive"}
            | {"type": "hard_subtraction", "lag_m": 3}
            | {"type": "tcn", "mode": "exogenous" | "endogenous",
               "config": {<TcnConfig fields>}},
      "normalization": null | {"input_mean": "<hex>", "input_sd": "<hex>",
                               "target_mean": "<hex>", "target_sd": "<hex>"},
      "parameters": ["<hex>", ...],          # flat layout, see forecasters.tcn
      "training_loss_history": ["<hex>", ...]
    }

``float.hex`` is lossless, so a save/load round trip is bit-exact.
"""

from __future__ import annotations

import dataclasses
import json
from pathlib import Path

import numpy as np

from ..errors import CorruptFile, VersionMismatch
from .model import FORMAT_VERSION, HardSubtraction, Mode, Naive, Normalization, Tcn, TrainedModel
from .tcn import TcnConfig

FORMAT_TAG = "flowfault-model"


def _kind_to_dict(kind) -> dict:
    if isinstance(kind, Naive):
        return {"type": "naive"}
    if isinstance(kind, HardSubtraction):
        return {"type": "hard_subtraction", "lag_m": kind.lag_m}
    return {"type": "tcn", "mode": kind.mode.value, "config": dataclasses.asdict(kind.config)}


def _kind_from_dict(d: dict):
    kind_type = d["type"]
    if kind_type == "naive":
        return Naive()
    if kind_type == "hard_subtraction":
        return HardSubtraction(int(d["lag_m"]))
    if kind_type == "tcn":
        return Tcn(TcnConfig(**d["config"]), Mode(d["mode"]))
    raise CorruptFile(f"unknown forecaster type {kind_type!r}")


def model_to_json(model: TrainedModel) -> str:
    norm = model.normalization
    doc = {
        "format": FORMAT_TAG,
        "format_version": model.format_version,
        "kind": _kind_to_dict(model.kind),
        "normalization": None
        if norm is None
        else {k: float(v).hex() for k, v in dataclasses.asdict(norm).items()},
        "parameters": [float(v).hex() for v in model.parameters],
        "training_loss_history": [float(v).hex() for v in model.training_loss_history],
    }
    return json.dumps(doc, indent=1) + "\n"


def model_from_json(text: str) -> TrainedModel:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CorruptFile(f"model file is not valid JSON: {exc}") from None
    if not isinstance(doc, dict) or doc.get("format") != FORMAT_TAG:
        raise CorruptFile("not a flowfault model file")
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise VersionMismatch(f"model format_version {version!r} is not supported (expected {FORMAT_VERSION})")
    try:
        kind = _kind_from_dict(doc["kind"])
        norm = doc["normalization"]
        if norm is not None:
            norm = Normalization(**{k: float.fromhex(v) for k, v in norm.items()})
        params = np.array([float.fromhex(v) for v in doc["parameters"]], dtype=np.float64)
        history = tuple(float.fromhex(v) for v in doc["training_loss_history"])
        return TrainedModel(kind, params, norm, history, version)
    except CorruptFile:
        raise
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise CorruptFile(f"malformed model file: {exc}") from None


def save_model(model: TrainedModel, path: str | Path) -> None:
    Path(path).write_text(model_to_json(model), encoding="utf-8", newline="\n")


def load_model(path: str | Path) -> TrainedModel:
    return model_from_json(Path(path).read_text(encoding="utf-8"))
