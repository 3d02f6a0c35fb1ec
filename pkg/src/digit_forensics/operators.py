"""Statistical operators whose outputs get screened."""
from __future__ import annotations

from enum import Enum

import numpy as np

from .errors import DegenerateInput, UnknownOperator


class OperatorKind(str, Enum):
    """Summary statistics with their serialized group names."""

    MEAN = "mean"
    STD = "std"
    OLS_SLOPE = "ols_slope"

    @classmethod
    def from_name(cls, name: str) -> "OperatorKind":
        try:
            return cls(name)
        except ValueError:
            valid = ", ".join(op.value for op in cls)
            raise UnknownOperator(f"unknown operator {name!r} (valid: {valid})") from None


OPERATOR_ORDER = (OperatorKind.MEAN, OperatorKind.STD, OperatorKind.OLS_SLOPE)


def operator_index(op: OperatorKind) -> int:
    return OPERATOR_ORDER.index(op)


def apply_operator(op: OperatorKind, values, second=None) -> float:
    """Apply one operator to a vector (or a pair of vectors for the slope).

    Mean is the arithmetic mean, std the sample standard deviation (n-1
    denominator), and ols_slope the simple-regression slope of ``second``
    on ``values``: cov(x, y) / var(x).
    """
    x = np.asarray(values, dtype=float)
    if op is OperatorKind.MEAN:
        _reject_second(op, second)
        if x.size < 1:
            raise DegenerateInput("mean needs at least 1 value")
        return float(x.mean())
    if op is OperatorKind.STD:
        _reject_second(op, second)
        if x.size < 2:
            raise DegenerateInput("sample std needs at least 2 values")
        return float(x.std(ddof=1))
    if op is OperatorKind.OLS_SLOPE:
        if second is None:
            raise DegenerateInput("ols_slope needs a regressor and a response vector")
        y = np.asarray(second, dtype=float)
        if x.size != y.size:
            raise DegenerateInput(f"vector lengths differ: {x.size} vs {y.size}")
        if x.size < 2:
            raise DegenerateInput("ols_slope needs at least 2 paired values")
        xc = x - x.mean()
        denom = float((xc ** 2).sum())
        if denom == 0.0:
            raise DegenerateInput("regressor has zero variance")
        return float((xc * (y - y.mean())).sum() / denom)
    raise UnknownOperator(f"unknown operator {op!r}")


def _reject_second(op: OperatorKind, second) -> None:
    if second is not None:
        raise DegenerateInput(f"{op.value} takes a single vector")
