"""Discretized 1D Poisson model: matrix, spectrum, and classical reference solver.

Conventions
-----------
The continuous problem is -v''(x) = b(x) on (0, 1) with v(0) = v(1) = 0.
A uniform grid with N = 2**n intervals (mesh width h = 1/N) and second-order
central differences gives the (N-1) x (N-1) linear system A v = b with

    A = (1/h**2) * tridiag(-1, 2, -1).

A is symmetric positive definite with closed-form eigenpairs

    lambda_j = 4 N**2 sin(j pi / (2 N))**2        j = 1 .. N-1
    u_j(k)   = sqrt(2/N) sin(j pi k / N)          k = 1 .. N-1,

so lambda_min ~ pi**2 and lambda_max < 4 N**2.  Grid point k maps to register
basis state |k>; basis state |0> is unused padding that embeds the length
N-1 vectors into a 2**n dimensional register.

For d > 1 the operator is the Kronecker sum of d copies of the 1D matrix
(eigenvalues are all d-fold sums of 1D eigenvalues).  That path exists for
classical study only; the circuit builders accept d = 1.

Everything here is a pure function of its arguments and safe to call from
concurrent workers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import ResourceError

__all__ = [
    "MAX_MODEL_DIM",
    "PoissonSystem",
    "EigenData",
    "build_matrix",
    "eigenpairs",
    "exact_solve",
    "load_system",
]

# Dense storage of the d-dimensional operator needs (dim**d)**2 entries; keep
# the vector length dim**d below this to stay well under a gigabyte.
MAX_MODEL_DIM = 4096


@dataclass(frozen=True)
class PoissonSystem:
    """One problem instance: grid exponent n, right-hand side b, dimension d.

    b holds the grid values b_1 .. b_{N-1} and may carry any overall scale;
    consumers normalize where quantum state preparation requires it.
    """

    n: int
    b: np.ndarray
    d: int = 1

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if self.d < 1:
            raise ValueError(f"d must be >= 1, got {self.d}")
        b = np.asarray(self.b, dtype=float)
        if b.ndim != 1 or b.size != self.dim:
            raise ValueError(f"b must have length 2**n - 1 = {self.dim}, got shape {b.shape}")
        if not np.all(np.isfinite(b)):
            raise ValueError("b must be finite")
        if not np.any(b):
            raise ValueError("b must have at least one nonzero entry")
        b = b.copy()
        b.setflags(write=False)
        object.__setattr__(self, "b", b)

    @property
    def N(self) -> int:
        return 2 ** self.n

    @property
    def dim(self) -> int:
        """Per-dimension matrix size, 2**n - 1."""
        return 2 ** self.n - 1

    @property
    def h(self) -> float:
        return 1.0 / self.N


@dataclass(frozen=True)
class EigenData:
    """Closed-form spectrum of the 1D operator plus input projections.

    lambdas ascend with j; vectors holds u_j in column j-1; betas are the
    components <u_j, b/||b||>; kappa = lambda_max / lambda_min.
    """

    lambdas: np.ndarray
    vectors: np.ndarray
    betas: np.ndarray
    kappa: float


def build_matrix(system: PoissonSystem, max_dim: int = MAX_MODEL_DIM) -> np.ndarray:
    """Dense system matrix; Kronecker sum of d copies of the 1D stencil."""
    full_dim = system.dim ** system.d
    if full_dim > max_dim:
        raise ResourceError(
            f"matrix dimension {system.dim}**{system.d} = {full_dim} exceeds budget {max_dim}"
        )
    dim = system.dim
    one_d = (2.0 * np.eye(dim) - np.eye(dim, k=1) - np.eye(dim, k=-1)) * system.N ** 2
    if system.d == 1:
        return one_d
    out = np.zeros((full_dim, full_dim))
    for axis in range(system.d):
        left = np.eye(dim ** axis)
        right = np.eye(dim ** (system.d - axis - 1))
        out += np.kron(np.kron(left, one_d), right)
    return out


def eigenpairs(system: PoissonSystem) -> EigenData:
    """Closed-form eigenvalues and orthonormal eigenvectors of the 1D matrix."""
    if system.d != 1:
        raise ValueError("closed-form eigenpairs apply per dimension; build them with d = 1")
    N = system.N
    j = np.arange(1, N)
    lambdas = 4.0 * N * N * np.sin(j * np.pi / (2 * N)) ** 2
    k = np.arange(1, N)
    vectors = np.sqrt(2.0 / N) * np.sin(np.outer(k, j) * np.pi / N)
    bhat = system.b / np.linalg.norm(system.b)
    betas = vectors.T @ bhat
    return EigenData(lambdas=lambdas, vectors=vectors, betas=betas, kappa=lambdas[-1] / lambdas[0])


def _solve_tridiagonal(system: PoissonSystem) -> np.ndarray:
    """Thomas-algorithm elimination for the 1D stencil; the classical oracle."""
    dim = system.dim
    scale = float(system.N ** 2)
    lower = -scale
    diag = 2.0 * scale
    upper = -scale
    b = system.b
    cp = np.empty(dim)
    dp = np.empty(dim)
    cp[0] = upper / diag
    dp[0] = b[0] / diag
    for i in range(1, dim):
        den = diag - lower * cp[i - 1]
        assert abs(den) > 0.0, "stencil is positive definite; elimination cannot break down"
        cp[i] = upper / den
        dp[i] = (b[i] - lower * dp[i - 1]) / den
    x = np.empty(dim)
    x[-1] = dp[-1]
    for i in range(dim - 2, -1, -1):
        x[i] = dp[i] - cp[i] * x[i + 1]
    return x


def exact_solve(system: PoissonSystem) -> np.ndarray:
    """Normalized classical solution of A v = b.

    d = 1 uses direct tridiagonal elimination.  For d > 1 the right-hand side
    over the tensor grid is taken as the separable product of b with itself d
    times, and the dense Kronecker-sum system is solved directly.
    """
    if system.d == 1:
        x = _solve_tridiagonal(system)
    else:
        A = build_matrix(system)
        rhs = system.b
        for _ in range(system.d - 1):
            rhs = np.kron(rhs, system.b)
        x = np.linalg.solve(A, rhs)
    return x / np.linalg.norm(x)


def load_system(path: str) -> PoissonSystem:
    """Read a problem instance from JSON: {"n": int, "b": [..], "d": int?}."""
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    try:
        n = int(raw["n"])
        b = raw["b"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"problem file {path} needs integer 'n' and list 'b'") from exc
    d = int(raw.get("d", 1))
    return PoissonSystem(n=n, b=np.asarray(b, dtype=float), d=d)
