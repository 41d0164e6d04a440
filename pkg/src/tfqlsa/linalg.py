"""Closed-form 2x2 decompositions and small dense oracles.

The 2x2 routines run once per tensor factor per Hamiltonian term, so they
avoid LAPACK calls and use trace/determinant formulas instead.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

HERMITIAN_TOL = 1e-10
_TINY = 1e-300

I2 = np.eye(2, dtype=complex)


def _as2x2(mat) -> np.ndarray:
    m = np.asarray(mat, dtype=complex)
    if m.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def hermitian_deviation(mat) -> float:
    m = np.asarray(mat)
    return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0


def is_unitary(mat, tol: float = 1e-12) -> bool:
    m = np.asarray(mat)
    return bool(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))) <= tol)


def _perp(v: np.ndarray) -> np.ndarray:
    # (conj(v1), -conj(v0)) is orthogonal to v; gives the Hadamard for X.
    return np.array([np.conj(v[1]), -np.conj(v[0])])


def eig_hermitian_2x2(mat) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(U, lam)`` with ``U @ diag(lam) @ U^H == mat``, ``lam`` descending."""
    m = _as2x2(mat)
    if hermitian_deviation(m) > HERMITIAN_TOL:
        raise ValueError("eig_hermitian_2x2 requires a Hermitian matrix")
    a, d = m[0, 0].real, m[1, 1].real
    b = 0.5 * (m[0, 1] + np.conj(m[1, 0]))
    half = 0.5 * (a - d)
    rad = np.hypot(half, abs(b))
    mean = 0.5 * (a + d)
    lam = np.array([mean + rad, mean - rad])
    if abs(b) <= 1e-15 * max(1.0, abs(a), abs(d)):
        if a >= d:
            return I2.copy(), lam
        return np.array([[0, 1], [1, 0]], dtype=complex), lam
    # Two candidate eigenvectors for lam[0]; keep the better-conditioned one.
    c1 = np.array([b, lam[0] - a])
    c2 = np.array([lam[0] - d, np.conj(b)])
    v = c1 if np.linalg.norm(c1) >= np.linalg.norm(c2) else c2
    v = v / np.linalg.norm(v)
    u = np.column_stack([v, _perp(v)])
    return u, lam


@dataclass(frozen=True, eq=False)
class SvdPair2x2:
    """``u @ diag(sigma_major, sigma_major * sigma_ratio) @ v^H``."""

    u: np.ndarray
    v: np.ndarray
    sigma_major: float
    sigma_ratio: float

    @property
    def singular_values(self) -> tuple[float, float]:
        return self.sigma_major, self.sigma_major * self.sigma_ratio

    def reconstruct(self) -> np.ndarray:
        s1, s2 = self.singular_values
        return self.u @ np.diag([s1, s2]) @ self.v.conj().T


def svd_2x2(mat) -> SvdPair2x2:
    m = _as2x2(mat)
    fro2 = float(np.sum(np.abs(m) ** 2))
    if fro2 == 0.0:
        return SvdPair2x2(I2.copy(), I2.copy(), 0.0, 0.0)
    det = abs(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])
    # sigma1 +- sigma2 = sqrt(F^2 +- 2|det|)
    splus = np.sqrt(fro2 + 2 * det)
    sminus = np.sqrt(max(fro2 - 2 * det, 0.0))
    s1 = 0.5 * (splus + sminus)
    s2 = det / s1
    gram = m.conj().T @ m
    gram = 0.5 * (gram + gram.conj().T)
    v, _ = eig_hermitian_2x2(gram)
    u1 = m @ v[:, 0] / s1
    u1 = u1 / np.linalg.norm(u1)
    w = _perp(u1)
    proj = np.vdot(w, m @ v[:, 1])
    if abs(proj) > _TINY:
        w = w * (proj / abs(proj))
    u = np.column_stack([u1, w])
    ratio = min(max(s2 / s1, 0.0), 1.0)
    return SvdPair2x2(u, v, float(s1), float(ratio))


def expm_i_hermitian(mat, t: float) -> np.ndarray:
    """Dense ``exp(-i t mat)`` via eigendecomposition."""
    m = np.asarray(mat, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("expm_i_hermitian needs a square matrix")
    scale = max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
    if hermitian_deviation(m) > HERMITIAN_TOL * scale:
        raise ValueError("expm_i_hermitian requires a Hermitian matrix")
    lam, vec = np.linalg.eigh(0.5 * (m + m.conj().T))
    return (vec * np.exp(-1j * t * lam)) @ vec.conj().T


def dense_solve(a, b) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("dense_solve needs a square matrix")
    sv = np.linalg.svd(a, compute_uv=False)
    if sv[-1] <= 1e-14 * max(sv[0], _TINY):
        raise np.linalg.LinAlgError("singular matrix")
    return np.linalg.solve(a, b)


def kron_all(mats) -> np.ndarray:
    out = np.ones((1,) * np.asarray(mats[0]).ndim, dtype=complex)
    for m in mats:
        out = np.kron(out, m)
    return out
