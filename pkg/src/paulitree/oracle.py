"""Dense-matrix reference implementation for small qubit counts.

Slow but exact: states, projectors, Born probabilities, spectra and trace
distances computed on explicit 2^n x 2^n complex matrices.  Used only to
validate the closed forms in ``family``; keep it independent of them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .family import Axis, BasisString, FamilyInstance, Outcome

MATRIX_CAP_N = 8  # dim 256
EIG_DIM_CAP = 256

_IDENT2 = np.eye(2, dtype=np.complex128)
_PAULI = {
    Axis.X: np.array([[0, 1], [1, 0]], dtype=np.complex128),
    Axis.Y: np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    Axis.Z: np.array([[1, 0], [0, -1]], dtype=np.complex128),
}

_HERM_TOL = 1e-12


class JacobiNonConvergence(RuntimeError):
    """Eigensolver failed to reduce the off-diagonal mass within its sweep budget."""


def _check_cap(n: int, max_n: int) -> None:
    if n > max_n:
        raise ValueError(f"n={n} exceeds dense-matrix cap {max_n}")


def _kron_chain(factors: list[np.ndarray]) -> np.ndarray:
    out = factors[0]
    for f in factors[1:]:
        out = np.kron(out, f)
    return out


def build_pauli_prefix(n: int, b: BasisString, k: int, max_n: int = MATRIX_CAP_N) -> np.ndarray:
    """Pauli string acting as b's first k axes, identity on the rest."""
    _check_cap(n, max_n)
    if len(b) != n:
        raise ValueError("basis length mismatch")
    if not 1 <= k <= n:
        raise ValueError(f"depth {k} out of range")
    return _kron_chain([_PAULI[b[i]] if i < k else _IDENT2 for i in range(n)])


def build_state(instance: FamilyInstance, max_n: int = MATRIX_CAP_N) -> np.ndarray:
    """Dense density matrix 2^-n (I + sum beta_k P^(k) + alpha P^(n))."""
    n = instance.n
    _check_cap(n, max_n)
    dim = 1 << n
    acc = np.eye(dim, dtype=np.complex128)
    for k in range(1, n + 1):
        acc += instance.profile.coefficient(k) * build_pauli_prefix(n, instance.hidden, k, max_n)
    rho = acc / dim
    if np.max(np.abs(rho - rho.conj().T)) > _HERM_TOL:
        raise AssertionError("constructed state is not Hermitian")
    return rho


def build_projector(b: BasisString, o: Outcome, max_n: int = MATRIX_CAP_N) -> np.ndarray:
    """Product projector with per-qubit factor (I + (-1)^bit sigma)/2."""
    n = len(b)
    _check_cap(n, max_n)
    if len(o) != n:
        raise ValueError("outcome length mismatch")
    factors = [
        0.5 * (_IDENT2 + (1 - 2 * o.bits[i]) * _PAULI[b[i]]) for i in range(n)
    ]
    return _kron_chain(factors)


def born_probability(state: np.ndarray, projector: np.ndarray) -> float:
    """Tr(projector @ state), validated to be a real probability."""
    if state.shape != projector.shape:
        raise ValueError("dimension mismatch between state and projector")
    val = complex(np.trace(projector @ state))
    if abs(val.imag) > _HERM_TOL:
        raise AssertionError(f"Born probability has imaginary part {val.imag}")
    p = val.real
    if p < -_HERM_TOL or p > 1.0 + _HERM_TOL:
        raise AssertionError(f"Born probability {p} outside [0,1]")
    return min(max(p, 0.0), 1.0)


@dataclass(frozen=True)
class SpectralDecomposition:
    eigenvalues: np.ndarray  # ascending, real
    eigenvectors: np.ndarray  # unitary, columns match eigenvalues


def hermitian_eig(
    a: np.ndarray, max_sweeps: int = 100, tol: float = 1e-12
) -> SpectralDecomposition:
    """Full eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Each rotation zeroes one off-diagonal pair (p, q) with a complex Givens
    rotation whose phase absorbs arg(A[p,q]); sweeps repeat over all pairs
    until the off-diagonal Frobenius norm drops below tol * ||A||_F.  Chosen
    for robustness at dim <= 256; speed is irrelevant here.
    """
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("matrix must be square")
    dim = a.shape[0]
    if dim > EIG_DIM_CAP:
        raise ValueError(f"dimension {dim} exceeds eigensolver cap {EIG_DIM_CAP}")
    if np.max(np.abs(a - a.conj().T)) > _HERM_TOL * max(1.0, float(np.abs(a).max())):
        raise ValueError("matrix is not Hermitian within tolerance")

    w = a.copy()
    v = np.eye(dim, dtype=np.complex128)
    norm = float(np.linalg.norm(w))
    if norm == 0.0:
        return SpectralDecomposition(np.zeros(dim), v)

    def off_norm() -> float:
        off = w - np.diag(np.diag(w))
        return float(np.linalg.norm(off))

    converged = off_norm() <= tol * norm
    for _ in range(max_sweeps):
        if converged:
            break
        for p in range(dim - 1):
            for q in range(p + 1, dim):
                apq = w[p, q]
                mag = abs(apq)
                if mag < 1e-300:
                    continue
                phase = apq / mag
                tau = (w[q, q].real - w[p, p].real) / (2.0 * mag)
                t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                # column update (right-multiply by the rotation) ...
                col_p = w[:, p].copy()
                col_q = w[:, q].copy()
                w[:, p] = c * col_p - s * np.conj(phase) * col_q
                w[:, q] = s * phase * col_p + c * col_q
                # ... then the conjugate row update (left-multiply)
                row_p = w[p, :].copy()
                row_q = w[q, :].copy()
                w[p, :] = c * row_p - s * phase * row_q
                w[q, :] = s * np.conj(phase) * row_p + c * row_q
                w[p, p] = w[p, p].real
                w[q, q] = w[q, q].real
                w[p, q] = 0.0
                w[q, p] = 0.0
                vol_p = v[:, p].copy()
                vol_q = v[:, q].copy()
                v[:, p] = c * vol_p - s * np.conj(phase) * vol_q
                v[:, q] = s * phase * vol_p + c * vol_q
        converged = off_norm() <= tol * norm
    if not converged:
        raise JacobiNonConvergence(
            f"off-diagonal norm still {off_norm():.3e} after {max_sweeps} sweeps"
        )
    eigenvalues = np.real(np.diag(w))
    order = np.argsort(eigenvalues, kind="stable")
    return SpectralDecomposition(eigenvalues[order], v[:, order])


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Half the trace norm of a - b, via the Jacobi eigensolver."""
    if a.shape != b.shape:
        raise ValueError("dimension mismatch")
    dec = hermitian_eig(a - b)
    return 0.5 * float(np.sum(np.abs(dec.eigenvalues)))
