"""Readout error model, calibration matrices, and least-squares mitigation.

Flips act independently per measured bit: p01 is the probability a true 0
reads as 1, p10 the reverse.  The calibration matrix is the Kronecker product
of the per-qubit column-stochastic confusion matrices, so column s holds the
readout distribution for true state s and a noisy distribution is M @ ideal.
Mitigation inverts that relation as the constrained least squares problem

    min ||M x - y||_2   subject to   x >= 0,  sum(x) = 1

solved by projected iteration (SLSQP), the standard readout-mitigation
formulation.  Forecast fidelity for a hardware run decays per entangling
gate as accuracy ** cnots.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .errors import ResourceError

__all__ = [
    "MAX_CALIBRATION_WIDTH",
    "ReadoutModel",
    "corrupt",
    "calibration_matrix",
    "mitigate",
    "fidelity_estimate",
]

# 2**w x 2**w dense calibration matrices stay small below this width.
MAX_CALIBRATION_WIDTH = 10


@dataclass(frozen=True)
class ReadoutModel:
    """Per-qubit flip probabilities for a register of measured bits."""

    p01: tuple[float, ...]
    p10: tuple[float, ...]

    def __post_init__(self):
        if len(self.p01) != len(self.p10) or not self.p01:
            raise ValueError("p01 and p10 must be equal-length, non-empty")
        # p < 0.5 keeps each confusion matrix diagonally dominant, hence invertible
        for p in self.p01 + self.p10:
            if not 0.0 <= p < 0.5:
                raise ValueError(f"flip probability {p} outside [0, 0.5)")

    @property
    def width(self) -> int:
        return len(self.p01)

    @classmethod
    def uniform(cls, width: int, p01: float, p10: float) -> "ReadoutModel":
        return cls(p01=(p01,) * width, p10=(p10,) * width)

    @classmethod
    def from_json(cls, path: str) -> "ReadoutModel":
        """Load {"0": {"p01": .., "p10": ..}, "1": {...}, ...} keyed by qubit."""
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
        indices = sorted(int(k) for k in raw)
        if indices != list(range(len(indices))):
            raise ValueError(f"noise model qubits must be contiguous from 0, got {indices}")
        p01 = tuple(float(raw[str(i)]["p01"]) for i in indices)
        p10 = tuple(float(raw[str(i)]["p10"]) for i in indices)
        return cls(p01=p01, p10=p10)


def corrupt(histogram: dict[str, int], model: ReadoutModel, seed: int) -> dict[str, int]:
    """Flip every recorded bit independently per the model; new histogram."""
    w = model.width
    p01 = np.asarray(model.p01)
    p10 = np.asarray(model.p10)
    rng = np.random.default_rng(seed)
    weights = 2 ** np.arange(w - 1, -1, -1)
    out: dict[str, int] = {}
    for bits, count in sorted(histogram.items()):
        if len(bits) != w:
            raise ValueError(f"record {bits!r} does not match model width {w}")
        if count < 0:
            raise ValueError("counts must be non-negative")
        if count == 0:
            continue
        row = np.array([int(ch) for ch in bits])
        flip_p = np.where(row == 0, p01, p10)
        flips = rng.random((count, w)) < flip_p
        read = row[None, :] ^ flips
        values = read @ weights
        for value, c in zip(*np.unique(values, return_counts=True)):
            key = format(int(value), f"0{w}b")
            out[key] = out.get(key, 0) + int(c)
    return dict(sorted(out.items()))


def calibration_matrix(model: ReadoutModel, width: int) -> np.ndarray:
    """Column-stochastic 2**w x 2**w confusion matrix, qubit 0 outermost."""
    if width != model.width:
        raise ValueError(f"width {width} does not match model width {model.width}")
    if width > MAX_CALIBRATION_WIDTH:
        raise ResourceError(f"calibration width {width} exceeds {MAX_CALIBRATION_WIDTH}")
    out = np.array([[1.0]])
    for p01, p10 in zip(model.p01, model.p10):
        single = np.array([[1.0 - p01, p10], [p01, 1.0 - p10]])
        out = np.kron(out, single)
    return out


def mitigate(noisy_histogram: dict[str, int], calibration: np.ndarray) -> np.ndarray:
    """Recover the ideal outcome distribution from noisy counts.

    Returns a probability vector over all 2**w outcomes, index = bitstring
    value.  Solves the constrained least squares problem in the module
    docstring, seeded at the observed frequencies.
    """
    dim = calibration.shape[0]
    width = dim.bit_length() - 1
    total = sum(noisy_histogram.values())
    if total <= 0:
        raise ValueError("histogram has no counts")
    observed = np.zeros(dim)
    for bits, count in noisy_histogram.items():
        observed[int(bits, 2)] += count
    observed /= total

    def loss(x):
        r = calibration @ x - observed
        return float(r @ r)

    result = optimize.minimize(
        loss,
        x0=observed,
        method="SLSQP",
        bounds=[(0.0, 1.0)] * dim,
        constraints={"type": "eq", "fun": lambda x: np.sum(x) - 1.0},
        tol=1e-12,
    )
    x = np.clip(result.x, 0.0, None)
    return x / x.sum()


def fidelity_estimate(cnot_count: int, gate_accuracy: float = 0.92) -> float:
    """Forecast circuit fidelity accuracy**cnots; washes out for deep circuits."""
    if cnot_count < 0:
        raise ValueError("cnot_count must be >= 0")
    if not 0.0 < gate_accuracy <= 1.0:
        raise ValueError("gate_accuracy must be in (0, 1]")
    return gate_accuracy ** cnot_count
