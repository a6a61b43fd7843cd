"""
SocLearn - Reporting
Serialization of curves, summaries and reports to CSV, JSON and optional SVG
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Union

import numpy as np
import pandas as pd

from .models import AccuracyCurve

logger = logging.getLogger(__name__)

CURVE_COLUMNS = ["position", "q", "accuracy", "model"]

PathLike = Union[str, Path]


def curves_frame(curves: Iterable[AccuracyCurve]) -> pd.DataFrame:
    frames = [
        pd.DataFrame({
            "position": curve.positions(),
            "q": np.full(len(curve), curve.q),
            "accuracy": curve.values,
            "model": curve.model,
        }, columns=CURVE_COLUMNS)
        for curve in curves
    ]
    return pd.concat(frames, ignore_index=True)


def curves_dict(curves: Iterable[AccuracyCurve]) -> Dict[str, Any]:
    return {
        "curves": [
            {"model": curve.model, "q": curve.q, "label": curve.label,
             "accuracy": [float(value) for value in curve.values]}
            for curve in curves
        ]
    }


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(key): _jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(item) for item in value]
    if isinstance(value, np.ndarray):
        return [_jsonable(item) for item in value.tolist()]
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not np.isfinite(value):
        return None
    return value


def write_json(data: Dict[str, Any], path: PathLike) -> Path:
    """Write sorted, indented JSON so identical inputs give identical bytes"""
    path = Path(path)
    path.write_text(json.dumps(_jsonable(data), sort_keys=True, indent=2) + "\n")
    logger.info("wrote %s", path)
    return path


def write_curves(curves: List[AccuracyCurve], path: PathLike, fmt: str = "csv") -> Path:
    path = Path(path)
    if fmt == "json":
        return write_json(curves_dict(curves), path)
    curves_frame(curves).to_csv(path, index=False, float_format="%.17g")
    logger.info("wrote %s", path)
    return path


def write_text(text: str, path: PathLike) -> Path:
    path = Path(path)
    path.write_text(text if text.endswith("\n") else text + "\n")
    logger.info("wrote %s", path)
    return path


def write_curve_svg(curves: List[AccuracyCurve], path: PathLike, title: str = "") -> Path:
    """Static line plot of accuracy by position; needs the 'plot' extra"""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "soclearn"
    fig, ax = plt.subplots(figsize=(6, 4))
    for curve, style in zip(curves, ["--", "-", ":", "-."] * len(curves)):
        ax.plot(curve.positions(), curve.values, style, label=f"{curve.model}, q={curve.q:g}")
    ax.set_xlabel("agent position")
    ax.set_ylabel("probability correct")
    if title:
        ax.set_title(title)
    ax.legend(frameon=False)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    logger.info("wrote %s", path)
    return path
