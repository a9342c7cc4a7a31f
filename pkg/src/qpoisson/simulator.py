"""Dense statevector simulation of the gate IR.

Amplitudes live in one complex128 array of length 2**q.  Bit (q-1-g) of a
basis index belongs to qubit g, so qubit 0 is the most significant bit,
matching the circuit module's convention.  Gates act in place: the buffer is
reshaped to [2]*q, the control axes are sliced away (a gate only ever touches
the amplitudes its control pattern selects), and the target axes are updated
through the resulting views.  Peak scratch is one copy of the touched block.

Sampling draws independent measurement records from the exact final
distribution with numpy's PCG64 generator; a fixed seed reproduces results
bit for bit.  Shots could be split across per-shot derived streams without
changing any statistics, since records never interact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import circuit as cg
from .circuit import Circuit, Gate, RegisterLayout, QUBIT_BUDGET
from .errors import PostselectionError, ResourceError

__all__ = [
    "RNG_NAME",
    "Statevector",
    "RunResult",
    "zero_state",
    "apply_gate",
    "run_exact",
    "postselect",
    "register_probabilities",
    "sample_counts",
    "sample",
    "fragment_unitary",
    "circuit_unitary",
    "histogram_to_csv",
]

RNG_NAME = "PCG64"
_SQRT_HALF = 1.0 / math.sqrt(2.0)


@dataclass
class Statevector:
    """Mutable amplitude buffer over q qubits."""

    amps: np.ndarray
    q: int

    def tensor(self) -> np.ndarray:
        return self.amps.reshape((2,) * self.q)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))


@dataclass(frozen=True)
class RunResult:
    """Outcome of a sampling run: kept-shot solution estimate and histogram.

    Histogram keys are the measured records, ancilla bit first then reg B
    bits MSB-first.  success_prob is the kept fraction in percent terms'
    natural unit (a plain ratio in [0, 1]).
    """

    solution: np.ndarray
    success_prob: float
    histogram: dict[str, int]
    shots: int
    seed: int
    rng: str = RNG_NAME

    def as_dict(self) -> dict:
        return {
            "solution": [float(x) for x in self.solution],
            "success_prob": self.success_prob,
            "histogram": dict(sorted(self.histogram.items())),
            "shots": self.shots,
            "seed": self.seed,
            "rng": self.rng,
        }


def zero_state(q: int) -> Statevector:
    amps = np.zeros(2 ** q, dtype=complex)
    amps[0] = 1.0
    return Statevector(amps=amps, q=q)


def _controlled_view(tensor: np.ndarray, controls: Sequence[int]):
    """View of the all-controls-one block, plus the axis remap offsets."""
    index = [slice(None)] * tensor.ndim
    for c in controls:
        index[c] = 1
    return tensor[tuple(index)]


def _remap_axis(axis: int, controls: Sequence[int]) -> int:
    return axis - sum(1 for c in controls if c < axis)


def _apply_single(view: np.ndarray, axis: int, u00, u01, u10, u11):
    """2x2 matrix on one axis of a (possibly sliced) view, in place."""
    moved = np.moveaxis(view, axis, 0)
    # ellipsis keeps 0-d results as views; bare ints would return scalar copies
    a0, a1 = moved[0, ...], moved[1, ...]
    if u01 == 0 and u10 == 0:  # diagonal: no cross terms, no scratch copy
        if u00 != 1:
            a0 *= u00
        if u11 != 1:
            a1 *= u11
        return
    tmp = a0.copy()
    a0 *= u00
    a0 += u01 * a1
    a1 *= u11
    a1 += u10 * tmp


def _apply_x(view: np.ndarray, axis: int):
    moved = np.moveaxis(view, axis, 0)
    tmp = moved[0].copy()
    moved[0] = moved[1]
    moved[1] = tmp


def _apply_dense(view: np.ndarray, axes: Sequence[int], matrix: np.ndarray):
    """Dense unitary across several target axes of a view, in place."""
    t = len(axes)
    moved = np.moveaxis(view, axes, range(t))
    shape = moved.shape
    flat = moved.reshape(2 ** t, -1)  # copies when the view is not contiguous
    result = matrix @ flat
    moved[...] = result.reshape(shape)


def apply_gate(state: Statevector, gate: Gate) -> Statevector:
    """Apply one gate in place and return the state."""
    tensor = state.tensor()
    kind = gate.kind
    if kind == cg.HADAMARD:
        q = gate.targets[0]
        _apply_single(tensor, q, _SQRT_HALF, _SQRT_HALF, _SQRT_HALF, -_SQRT_HALF)
    elif kind == cg.PAULI_X:
        _apply_x(tensor, gate.targets[0])
    elif kind == cg.RY:
        c, s = math.cos(gate.angle / 2), math.sin(gate.angle / 2)
        _apply_single(tensor, gate.targets[0], c, -s, s, c)
    elif kind == cg.PHASE:
        _apply_single(tensor, gate.targets[0], 1.0, 0.0, 0.0, np.exp(1j * gate.angle))
    elif kind == cg.SWAP:
        a, b = gate.targets
        moved = np.moveaxis(tensor, (a, b), (0, 1))
        tmp = moved[0, 1].copy()
        moved[0, 1] = moved[1, 0]
        moved[1, 0] = tmp
    elif kind == cg.MULTI_CONTROLLED_X:
        view = _controlled_view(tensor, gate.controls)
        _apply_x(view, _remap_axis(gate.targets[0], gate.controls))
    elif kind == cg.MULTI_CONTROLLED_RY:
        view = _controlled_view(tensor, gate.controls)
        c, s = math.cos(gate.angle / 2), math.sin(gate.angle / 2)
        _apply_single(view, _remap_axis(gate.targets[0], gate.controls), c, -s, s, c)
    elif kind == cg.CONTROLLED_UNITARY:
        view = _controlled_view(tensor, gate.controls)
        axes = [_remap_axis(t, gate.controls) for t in gate.targets]
        m = gate.matrix
        if len(axes) == 1 and m[0, 1] == 0 and m[1, 0] == 0:
            _apply_single(view, axes[0], m[0, 0], 0.0, 0.0, m[1, 1])
        else:
            _apply_dense(view, axes, m)
    else:
        raise ValueError(f"unknown gate kind {kind}")
    return state


def run_exact(circuit: Circuit, max_qubits: int = QUBIT_BUDGET) -> Statevector:
    """Run all gates from |0...0> and return the final state."""
    q = circuit.layout.total
    if q > max_qubits:
        raise ResourceError(f"circuit needs {q} qubits, budget is {max_qubits}")
    state = zero_state(q)
    for gate in circuit.gates:
        apply_gate(state, gate)
    drift = abs(state.norm() - 1.0)
    assert drift < 1e-9, f"norm drifted by {drift:.3e}"
    return state


def postselect(state: Statevector, layout: RegisterLayout) -> tuple[np.ndarray, float]:
    """Condition on ancilla = 1; return (solution magnitudes, success prob).

    The solution covers reg B basis states 1 .. 2**n - 1.  Reg E and reg A
    are |0> in the kept branch by the uncompute structure, so the magnitudes
    are read from that sub-block and renormalized.
    """
    tensor = state.tensor()
    anc = np.moveaxis(tensor, layout.ancilla, 0)[1]
    success = float(np.sum(anc.real ** 2 + anc.imag ** 2))
    if success < 1e-15:
        raise PostselectionError(f"ancilla=1 probability {success:.3e} is degenerate")
    index = [slice(None)] * layout.total
    for q in layout.reg_e + layout.reg_a:
        index[q] = 0
    index[layout.ancilla] = 1
    block = tensor[tuple(index)].reshape(-1)  # remaining axes are reg B, MSB first
    magnitudes = np.abs(block[1:])
    norm = np.linalg.norm(magnitudes)
    if norm < 1e-15:
        raise PostselectionError("kept branch has no weight on reg B states 1..N-1")
    return magnitudes / norm, success


def register_probabilities(state: Statevector, qubits: Sequence[int]) -> np.ndarray:
    """Marginal probabilities over the given qubits, read MSB-first."""
    tensor = state.tensor()
    probs = tensor.real ** 2 + tensor.imag ** 2
    others = [ax for ax in range(state.q) if ax not in qubits]
    ordered = np.transpose(probs, tuple(qubits) + tuple(others))
    return ordered.reshape(2 ** len(qubits), -1).sum(axis=1)


def sample_counts(
    state: Statevector, qubits: Sequence[int], shots: int, seed: int
) -> dict[str, int]:
    """Histogram of independent measurements of the given qubits."""
    probs = register_probabilities(state, qubits)
    probs = np.clip(probs, 0.0, None)
    probs /= probs.sum()
    rng = np.random.default_rng(seed)
    draws = rng.choice(probs.size, size=shots, p=probs)
    counts = np.bincount(draws, minlength=probs.size)
    width = len(qubits)
    return {
        format(value, f"0{width}b"): int(c)
        for value, c in enumerate(counts)
        if c > 0
    }


def sample(circuit: Circuit, shots: int, seed: int, max_qubits: int = QUBIT_BUDGET) -> RunResult:
    """Sampling backend: measure ancilla and reg B, keep ancilla = 1 records.

    solution_i = sqrt(v_i / sum v) over kept counts v_i for reg B values
    i = 1 .. 2**n - 1; success_prob is the kept fraction.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    state = run_exact(circuit, max_qubits=max_qubits)
    layout = circuit.layout
    measured = (layout.ancilla,) + layout.reg_b
    histogram = sample_counts(state, measured, shots, seed)
    n_b = layout.b_width
    kept = np.zeros(2 ** n_b, dtype=np.int64)
    total_kept = 0
    for bits, count in histogram.items():
        if bits[0] == "1":
            kept[int(bits[1:], 2)] += count
            total_kept += count
    if total_kept == 0:
        raise PostselectionError(f"no ancilla=1 records in {shots} shots")
    weights = kept[1:]
    if weights.sum() == 0:
        raise PostselectionError("kept records never landed on reg B states 1..N-1")
    solution = np.sqrt(weights / weights.sum())
    return RunResult(
        solution=solution,
        success_prob=total_kept / shots,
        histogram=dict(sorted(histogram.items())),
        shots=shots,
        seed=seed,
    )


def fragment_unitary(gates: Sequence[Gate], q: int, max_qubits: int = 12) -> np.ndarray:
    """Dense matrix of a gate list on q qubits; test-scale sizes only."""
    if q > max_qubits:
        raise ResourceError(f"refusing dense unitary on {q} qubits (cap {max_qubits})")
    dim = 2 ** q
    out = np.empty((dim, dim), dtype=complex)
    for col in range(dim):
        state = Statevector(np.zeros(dim, dtype=complex), q)
        state.amps[col] = 1.0
        for gate in gates:
            apply_gate(state, gate)
        out[:, col] = state.amps
    return out


def circuit_unitary(circuit: Circuit, max_qubits: int = 12) -> np.ndarray:
    return fragment_unitary(circuit.gates, circuit.layout.total, max_qubits)


def histogram_to_csv(histogram: dict[str, int]) -> str:
    """Two-column CSV (bitstring, count), sorted by bitstring."""
    lines = ["bitstring,count"]
    lines.extend(f"{bits},{count}" for bits, count in sorted(histogram.items()))
    return "\n".join(lines) + "\n"
