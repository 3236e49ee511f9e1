"""Cell-average to boundary-trace reconstruction.

Within each spectral volume the k cell averages determine a unique polynomial
of degree k-1, expressed in the Legendre basis on [-1, 1]. The moment matrix M
maps Legendre coefficients to cell averages; A evaluates the basis at the k+1
CV boundaries; C = A @ inv(M) goes straight from averages to boundary traces.
M is inverted once and reused for every time step.
"""

from dataclasses import dataclass, field

import numpy as np

from .mesh import SpectralGrid

__all__ = [
    "ReconstructionOperator",
    "legendre_eval",
    "legendre_integral",
    "moment_matrix",
    "build_reconstruction",
    "reconstruct_all",
]


def legendre_eval(m: int, x):
    """Evaluate the Legendre polynomial L_m at x (scalar or array).

    Three-term recurrence: (n+1) L_{n+1} = (2n+1) x L_n - n L_{n-1}.
    """
    if m < 0:
        raise ValueError(f"degree must be >= 0, got {m}")
    x = np.asarray(x, dtype=float)
    p0 = np.ones_like(x)
    if m == 0:
        return p0 if p0.ndim else float(p0)
    p1 = x.copy()
    for n in range(1, m):
        p0, p1 = p1, ((2 * n + 1) * x * p1 - n * p0) / (n + 1)
    return p1 if p1.ndim else float(p1)


def legendre_integral(m: int, lo, hi):
    """Exact integral of L_m over [lo, hi] in [-1, 1].

    Uses the antiderivative identity
    int L_m = (L_{m+1} - L_{m-1}) / (2m + 1) for m >= 1, and int L_0 = x.
    """
    if m == 0:
        return np.asarray(hi, dtype=float) - np.asarray(lo, dtype=float)
    anti = lambda x: (legendre_eval(m + 1, x) - legendre_eval(m - 1, x)) / (2 * m + 1)
    return anti(hi) - anti(lo)


def moment_matrix(grid: SpectralGrid) -> np.ndarray:
    """k x k matrix of width-averaged Legendre moments over the reference CVs.

    M[j, m] = (1 / w_j) * int_{node_j}^{node_{j+1}} L_m dx, so column m = 0 is
    identically 1.
    """
    k = grid.num_cv
    lo, hi = grid.ref_nodes[:-1], grid.ref_nodes[1:]
    mat = np.empty((k, k))
    for m in range(k):
        mat[:, m] = legendre_integral(m, lo, hi) / grid.ref_widths
    return mat


@dataclass(frozen=True)
class ReconstructionOperator:
    """Precomputed matrices for one grid; shared by all SVs."""

    moments: np.ndarray = field(repr=False)  # (k, k) cell-average moment matrix
    moments_inv: np.ndarray = field(repr=False)  # (k, k)
    evaluation: np.ndarray = field(repr=False)  # (k+1, k) Legendre values at nodes
    combined: np.ndarray = field(repr=False)  # (k+1, k) averages -> traces

    @property
    def num_cv(self) -> int:
        return self.moments.shape[0]

    def coefficients(self, averages: np.ndarray) -> np.ndarray:
        """Legendre coefficients from cell averages (last-but-one axis = CV)."""
        return np.einsum("ml,...lc->...mc", self.moments_inv, averages)


def build_reconstruction(grid: SpectralGrid) -> ReconstructionOperator:
    """Assemble M, inv(M), A and C = A @ inv(M) for the grid's subdivision."""
    k = grid.num_cv
    moments = moment_matrix(grid)
    try:
        moments_inv = np.linalg.inv(moments)
    except np.linalg.LinAlgError as exc:  # distinct nodes make M regular
        raise np.linalg.LinAlgError(f"singular moment matrix for k={k}") from exc
    evaluation = np.empty((k + 1, k))
    for m in range(k):
        evaluation[:, m] = legendre_eval(m, grid.ref_nodes)
    combined = evaluation @ moments_inv
    return ReconstructionOperator(moments, moments_inv, evaluation, combined)


def reconstruct_all(op: ReconstructionOperator, data: np.ndarray) -> np.ndarray:
    """Boundary traces for every SV and component.

    ``data`` has shape (N, k, m); the result has shape (N, k+1, m). The trace
    is continuous inside each SV; at a shared SV boundary the left SV's last
    trace and the right SV's first trace generally differ.
    """
    data = np.asarray(data, dtype=float)
    if data.ndim != 3 or data.shape[1] != op.num_cv:
        raise ValueError(
            f"expected field shaped (N, {op.num_cv}, m), got {data.shape}"
        )
    return np.einsum("jl,ilc->ijc", op.combined, data)
