"""JSON model files for fitted detectors."""

import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Union

from pydantic import ValidationError

from .baselines import IsolationForestModel, LofModel
from .dataset import NormalizationParams
from .detectors import BaselineModel
from .errors import ModelError
from .occer import OccerModel

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1

Model = Union[OccerModel, BaselineModel]

_BASELINES = {
    LofModel.kind: LofModel,
    IsolationForestModel.kind: IsolationForestModel,
}


def model_to_envelope(model: Model, config: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    """Wrap a fitted model in the versioned envelope written to disk."""
    return {
        "format_version": FORMAT_VERSION,
        "kind": model.kind,
        "config": config or {},
        "normalizer": model.normalizer.model_dump(mode="json"),
        "model": model.to_dict(),
    }


def model_from_envelope(envelope: Dict[str, Any]) -> Model:
    """
    Rebuild a fitted model from its envelope.

    Raises:
        ModelError: On an unknown format version or kind, or a malformed payload
    """
    if not isinstance(envelope, dict):
        raise ModelError("Model file must contain a JSON object")
    version = envelope.get("format_version")
    if version != FORMAT_VERSION:
        raise ModelError(f"Unsupported model format version: {version!r}")
    kind = envelope.get("kind")

    try:
        normalizer = NormalizationParams(**envelope["normalizer"])
        payload = envelope["model"]
        if kind == OccerModel.kind:
            return OccerModel.from_dict(payload, normalizer)
        if kind in _BASELINES:
            model = _BASELINES[kind].from_dict(payload["model"])
            return BaselineModel(normalizer, model, payload.get("training_scores"))
    except (KeyError, TypeError, ValidationError) as e:
        raise ModelError(f"Malformed '{kind}' model file: {e}") from e
    raise ModelError(f"Unknown model kind: {kind!r}")


def save_model(model: Model, path: Union[str, Path], config: Optional[Dict[str, Any]] = None) -> Path:
    """
    Write ``model`` as a JSON envelope.

    Floats are written in shortest round-trip form, so a reloaded model
    reproduces scores bit for bit.

    Args:
        model: Fitted OCCER or baseline model
        path: Destination file; parent directories are created
        config: Run configuration snapshot to embed

    Returns:
        The written path
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(model_to_envelope(model, config), f, indent=2)
    logger.info(f"Saved {model.kind} model to {path}")
    return path


def load_model(path: Union[str, Path]) -> Model:
    """
    Read a model written by :func:`save_model`.

    Raises:
        FileNotFoundError: If the file does not exist
        ModelError: If the file is not a valid model envelope
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Model file not found: {path}")
    try:
        with open(path, "r", encoding="utf-8") as f:
            envelope = json.load(f)
    except json.JSONDecodeError as e:
        raise ModelError(f"Model file {path} is not valid JSON: {e}") from e

    model = model_from_envelope(envelope)
    logger.debug(f"Loaded {model.kind} model from {path}")
    return model


def load_config_snapshot(path: Union[str, Path]) -> Dict[str, Any]:
    """The configuration snapshot embedded in a model file."""
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f).get("config", {})
