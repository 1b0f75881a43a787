"""Prediction-quality metrics: RMSE, MAE, Willmott's d and its L1 variant d1,
plus rolling last-m curves.

Willmott's d compares squared errors to squared total deviations around the
holdout target mean. The Standard variant is Willmott (1982):

    d  = 1 - sum (X - Xhat)^2 / sum (|Xhat - Xbar| + |X - Xbar|)^2
    d1 = 1 - sum |X - Xhat|   / sum (|Xhat - Xbar| + |X - Xbar|)

with Xbar the mean of the m holdout targets. PaperLiteral repeats the
|Xhat - Xbar| term twice in the denominator; it exists for strict
reproduction of tables computed that way and is not the default.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import DegenerateDenominator

__all__ = ["WillmottVariant", "rmse", "mae", "willmott_d", "willmott_d1",
           "rolling_curves", "EvalReport"]


class WillmottVariant(Enum):
    STANDARD = "standard"
    PAPER_LITERAL = "paper-literal"


def _pair(targets, preds):
    t = np.asarray(targets, dtype=float)
    p = np.asarray(preds, dtype=float)
    if t.shape != p.shape or t.ndim != 1 or t.size < 1:
        raise ValueError("targets and preds must be equal-length 1-d, length >= 1")
    return t, p


def rmse(targets, preds) -> float:
    t, p = _pair(targets, preds)
    return float(np.sqrt(np.mean((t - p) ** 2)))


def mae(targets, preds) -> float:
    t, p = _pair(targets, preds)
    return float(np.mean(np.abs(t - p)))


def _willmott(targets, preds, variant, power: int) -> float:
    t, p = _pair(targets, preds)
    variant = WillmottVariant(variant)
    tbar = t.mean()
    dev_p = np.abs(p - tbar)
    dev_t = np.abs(t - tbar)
    if power == 2:
        num = float(np.sum((t - p) ** 2))
    else:
        num = float(np.sum(np.abs(t - p)))
    if variant is WillmottVariant.STANDARD:
        base = dev_p + dev_t
    else:
        base = 2.0 * dev_p
    den = float(np.sum(base ** power))
    if den == 0.0:
        if num == 0.0:
            return 1.0  # constant, perfectly predicted
        raise DegenerateDenominator(
            "zero denominator with nonzero error (all predictions equal the "
            "target mean); the standard variant cannot reach this state")
    return 1.0 - num / den


def willmott_d(targets, preds, variant=WillmottVariant.STANDARD) -> float:
    return _willmott(targets, preds, variant, power=2)


def willmott_d1(targets, preds, variant=WillmottVariant.STANDARD) -> float:
    return _willmott(targets, preds, variant, power=1)


def rolling_curves(targets, preds, m_max: int,
                   variant=WillmottVariant.STANDARD) -> list[dict]:
    """Metrics over the last m pairs for m = 1..m_max."""
    t, p = _pair(targets, preds)
    if not 1 <= m_max <= t.size:
        raise ValueError("need 1 <= m_max <= len(targets)")
    out = []
    for m in range(1, m_max + 1):
        out.append({"m": m,
                    "mae": mae(t[-m:], p[-m:]),
                    "d": willmott_d(t[-m:], p[-m:], variant)})
    return out


@dataclass(frozen=True)
class EvalReport:
    per_model: dict[str, dict[str, float]]  # label -> {rmse, mae, d, d1}
    rolling: dict[str, list[dict]]          # label -> [{m, mae, d}, ...]
    m_max: int
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        for label, row in self.per_model.items():
            for key in ("rmse", "mae", "d", "d1"):
                v = row[key]
                if not np.isfinite(v):
                    raise ValueError(f"non-finite metric {key} for {label}")
            if row["d"] > 1 or row["d1"] > 1:
                raise ValueError(f"d/d1 above 1 for {label}")

    def table_rows(self) -> list[tuple]:
        """(Model, d, RMSE, d1, MAE) rows, insertion order."""
        return [(label, row["d"], row["rmse"], row["d1"], row["mae"])
                for label, row in self.per_model.items()]
