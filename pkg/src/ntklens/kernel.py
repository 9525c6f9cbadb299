"""Empirical tangent-kernel Gram matrices and their collective variables.

The kernel entry for samples i, j is the inner product of the two per-sample
parameter gradients, summed over output dimensions:

    K_ij = sum_o sum_k  d f_o(x_i)/d theta_k * d f_o(x_j)/d theta_k

Two scalar summaries are derived from the spectrum: the trace, and the
von Neumann entropy of the eigenvalues normalized by their sum (natural
log).  Eigenvalues come from a cyclic Jacobi sweep, JIT-compiled when numba
is importable.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np

from .network import NetworkState, output_jacobian_factors

# Eigenvalues this far below zero (relative to the trace) indicate a broken
# Gram computation rather than round-off.
NEGATIVE_EIGENVALUE_LIMIT = 1e-6

_JACOBI_MAX_SWEEPS = 100
_JACOBI_REL_TOL = 1e-12


@dataclass
class NtkMatrix:
    """Symmetric Gram matrix of per-sample parameter gradients."""

    entries: np.ndarray

    def __post_init__(self):
        self.entries = np.asarray(self.entries, dtype=np.float64)
        if self.entries.ndim != 2 or self.entries.shape[0] != self.entries.shape[1]:
            raise ValueError(f"entries must be square, got shape {self.entries.shape}")

    @property
    def n(self) -> int:
        return self.entries.shape[0]


@dataclass
class SpectrumReport:
    """Eigenvalues (descending) plus the derived collective variables."""

    eigenvalues: np.ndarray
    trace: float
    entropy: float
    max_eig_ratio: float

    def to_dict(self) -> dict:
        return {
            "eigenvalues": [float(v) for v in self.eigenvalues],
            "trace": float(self.trace),
            "entropy": float(self.entropy),
            "max_eig_ratio": float(self.max_eig_ratio),
        }


def compute_ntk(state: NetworkState, inputs: np.ndarray) -> NtkMatrix:
    """Gram matrix of per-sample output gradients, summed over outputs.

    Assembled layer by layer from the Jacobian factorization: the weight
    block of layer l contributes scale^2 * (A A^T) hadamard K and its bias
    block contributes K, where A holds the layer inputs and
    K_nm = sum_oj delta[n,o,j] delta[m,o,j].  This equals J J^T for the full
    (N, d_out*P) Jacobian without materializing it.  The upper triangle is
    mirrored so the result is exactly symmetric.
    """
    x = np.asarray(inputs, dtype=np.float64)
    if x.ndim == 1:
        x = x[None, :]
    n = x.shape[0]
    if n < 1:
        raise ValueError("need at least one sample")
    gram = np.zeros((n, n))
    for acts_l, delta_l, scale_l in output_jacobian_factors(state, x):
        d2 = delta_l.reshape(n, -1)
        k = d2 @ d2.T
        a_gram = acts_l @ acts_l.T
        if state.spec.bias:
            gram += (scale_l * scale_l * a_gram + 1.0) * k
        else:
            gram += scale_l * scale_l * a_gram * k
    gram = np.triu(gram) + np.triu(gram, 1).T
    return NtkMatrix(entries=gram)


def _jacobi_sweeps(a, tol, max_sweeps):  # pragma: no cover - exercised via wrapper
    n = a.shape[0]
    for sweep in range(max_sweeps):
        off = 0.0
        for i in range(n - 1):
            for j in range(i + 1, n):
                off += a[i, j] * a[i, j]
        off = math.sqrt(2.0 * off)
        if off <= tol:
            return sweep
        skip = 0.1 * tol / n
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= skip:
                    continue
                app = a[p, p]
                aqq = a[q, q]
                theta = (aqq - app) / (2.0 * apq)
                if theta >= 0.0:
                    t = 1.0 / (theta + math.sqrt(1.0 + theta * theta))
                else:
                    t = -1.0 / (-theta + math.sqrt(1.0 + theta * theta))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                tau = s / (1.0 + c)
                a[p, p] = app - t * apq
                a[q, q] = aqq + t * apq
                a[p, q] = 0.0
                a[q, p] = 0.0
                for i in range(n):
                    if i != p and i != q:
                        aip = a[i, p]
                        aiq = a[i, q]
                        a[i, p] = aip - s * (aiq + tau * aip)
                        a[p, i] = a[i, p]
                        a[i, q] = aiq + s * (aip - tau * aiq)
                        a[q, i] = a[i, q]
    return -1


try:  # JIT the sweep kernel when numba is present; the pure-Python path is identical.
    from numba import njit

    _jacobi_sweeps_impl = njit(cache=True)(_jacobi_sweeps)
except Exception:  # pragma: no cover
    _jacobi_sweeps_impl = _jacobi_sweeps


def symmetric_eigenvalues(matrix: NtkMatrix | np.ndarray) -> np.ndarray:
    """All eigenvalues of a symmetric matrix, descending, via cyclic Jacobi.

    Convergence: off-diagonal Frobenius norm below 1e-12 relative to the
    matrix scale, at most 100 sweeps.  The eigenvalue sum is checked against
    the trace to 1e-8 relative.
    """
    a = matrix.entries if isinstance(matrix, NtkMatrix) else np.asarray(matrix, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("expected a square matrix")
    if not np.allclose(a, a.T, rtol=1e-10, atol=0.0):
        raise ValueError("matrix is not symmetric")
    n = a.shape[0]
    if n == 1:
        return np.array([float(a[0, 0])])
    trace = float(np.trace(a))
    # |trace| alone can vanish for indefinite input; the Frobenius norm keeps
    # the tolerance meaningful there.  For PSD matrices trace dominates.
    scale = max(abs(trace), float(np.linalg.norm(a)))
    if scale == 0.0:
        return np.zeros(n)
    work = np.array(a, dtype=np.float64, copy=True)
    sweeps = _jacobi_sweeps_impl(work, _JACOBI_REL_TOL * scale, _JACOBI_MAX_SWEEPS)
    if sweeps < 0:
        raise RuntimeError(
            f"Jacobi eigensolver did not converge within {_JACOBI_MAX_SWEEPS} sweeps"
        )
    values = np.sort(np.diag(work))[::-1].copy()
    total = float(values.sum())
    # relative to the spectrum magnitude; for PSD input that is the trace
    tol_scale = max(abs(trace), float(np.abs(values).sum()))
    if abs(total - trace) > 1e-8 * tol_scale:
        raise RuntimeError(
            f"eigenvalue sum {total} deviates from trace {trace} beyond 1e-8 relative"
        )
    return values


def von_neumann_entropy(eigenvalues: np.ndarray) -> float:
    """Entropy -sum p ln p of the eigenvalues normalized by their sum.

    Negative eigenvalues are clamped to zero before normalization; a value
    below -1e-6 * trace aborts, since that signals a broken Gram matrix.
    Zero weights contribute nothing (0 ln 0 := 0).
    """
    ev = np.asarray(eigenvalues, dtype=np.float64)
    trace = float(ev.sum())
    if ev.size and float(ev.min()) < -NEGATIVE_EIGENVALUE_LIMIT * max(trace, 0.0):
        raise ValueError(
            f"eigenvalue {ev.min()} is too negative for a Gram spectrum (trace {trace})"
        )
    clamped = np.maximum(ev, 0.0)
    total = clamped.sum()
    if total <= 0.0:
        raise ValueError("all-zero spectrum has no normalized distribution")
    p = clamped / total
    nz = p[p > 0.0]
    return float(-(nz * np.log(nz)).sum()) + 0.0  # avoid -0.0 for rank-one spectra


def ntk_trace(matrix: NtkMatrix | np.ndarray) -> float:
    """Sum of the diagonal entries."""
    a = matrix.entries if isinstance(matrix, NtkMatrix) else np.asarray(matrix, dtype=np.float64)
    return float(np.trace(a))


def spectrum_report(matrix: NtkMatrix) -> SpectrumReport:
    """Diagonalize a kernel matrix and package its collective variables."""
    values = symmetric_eigenvalues(matrix)
    trace = ntk_trace(matrix)
    entropy = von_neumann_entropy(values)
    ratio = float(values[0] / trace)
    return SpectrumReport(
        eigenvalues=values,
        trace=trace,
        entropy=entropy,
        max_eig_ratio=min(ratio, 1.0),
    )


def collective_variables(state: NetworkState, inputs: np.ndarray) -> SpectrumReport:
    """Kernel entropy, trace and max-eigenvalue ratio for a network on data."""
    return spectrum_report(compute_ntk(state, inputs))


def dump_matrix_csv(matrix: NtkMatrix, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for row in matrix.entries:
            writer.writerow([repr(float(v)) for v in row])


def dump_report_json(report: SpectrumReport, path) -> None:
    with open(path, "w") as fh:
        json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
