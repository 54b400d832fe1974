"""Complex floating-point linear algebra helpers.

Thin, contract-checked wrappers around LAPACK (via numpy): Hermitian
eigendecomposition with descending eigenvalues, numerical rank from singular
values, and seeded Haar-ish random unitaries.  All functions are pure; random
state is always passed in as an explicit seed (PCG64 via
``numpy.random.default_rng``), so results are reproducible.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

_ENV_PREFIX = "QLOCI_"


@dataclass(frozen=True)
class TolerancePolicy:
    """Relative tolerances used by every floating-point decision.

    rank_tol: singular values below ``rank_tol * sigma_max`` count as zero.
    eig_tol: Hermiticity / positivity slack for eigenproblems.
    membership_tol: locus-membership residual scale used by variety probes.
    """

    rank_tol: float = 1e-9
    eig_tol: float = 1e-10
    membership_tol: float = 1e-8

    def __post_init__(self):
        for name in ("rank_tol", "eig_tol", "membership_tol"):
            v = getattr(self, name)
            if not (0 < v <= 1e-4):
                raise ValueError(f"{name} must lie in (0, 1e-4], got {v}")

    @classmethod
    def default(cls) -> "TolerancePolicy":
        """Built-in defaults, overridable via QLOCI_RANK_TOL etc."""
        kwargs = {}
        for name in ("rank_tol", "eig_tol", "membership_tol"):
            raw = os.environ.get(_ENV_PREFIX + name.upper())
            if raw is not None:
                kwargs[name] = float(raw)
        return cls(**kwargs)


def _as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise ValueError("expected a 2-D matrix")
    return a


def eig_hermitian(m, policy: TolerancePolicy | None = None):
    """Eigendecompose a Hermitian matrix.

    Returns ``(eigenvalues, vectors)`` with eigenvalues real and sorted
    descending and vectors as orthonormal columns.  Input must be square and
    Hermitian within ``policy.eig_tol``; the offending entry is reported
    otherwise.
    """
    policy = policy or TolerancePolicy.default()
    a = _as_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"eig_hermitian needs a square matrix, got {a.shape}")
    dev = np.abs(a - a.conj().T)
    scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
    if a.size and dev.max() > policy.eig_tol * scale:
        i, j = np.unravel_index(int(np.argmax(dev)), dev.shape)
        raise ValueError(
            f"matrix is not Hermitian within {policy.eig_tol}: "
            f"entry ({i},{j})={a[i, j]:.6g} vs ({j},{i})*={np.conj(a[j, i]):.6g}"
        )
    h = (a + a.conj().T) / 2.0
    vals, vecs = np.linalg.eigh(h)
    order = np.argsort(-vals, kind="stable")
    return vals[order].real, vecs[:, order]


def numerical_rank(m, policy: TolerancePolicy | None = None) -> int:
    """Count singular values above ``rank_tol`` times the largest one."""
    policy = policy or TolerancePolicy.default()
    a = _as_matrix(m)
    if a.size == 0:
        return 0
    s = np.linalg.svd(a, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > policy.rank_tol * s[0]))


def rank_residual(m, k: int) -> float:
    """sigma_{k+1}/sigma_1 of ``m``; zero iff rank(m) <= k (scale-free)."""
    a = _as_matrix(m)
    s = np.linalg.svd(a, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0.0
    if k >= s.size:
        return 0.0
    return float(s[k] / s[0])


def random_unitary(dim: int, seed: int) -> np.ndarray:
    """Seeded Haar-distributed unitary (QR of a complex Gaussian matrix).

    Deterministic for a fixed seed: the generator is PCG64 and the phase of
    the R diagonal is fixed so the factorization is unique.
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    rng = np.random.default_rng(seed)
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_complex_vector(dim: int, rng) -> np.ndarray:
    """Unit vector uniform on the sphere of C^dim."""
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)
