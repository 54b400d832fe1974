"""Quantum-state layer: ensembles, density matrices, cuts, PT/PPT, spectra.

Subsystem bases are ordered row-major, |i1 i2 ... ik> with the last index
fastest, matching the Kronecker-product convention of :func:`qloci.exact.kron`.
States built from Gaussian-rational data stay exact through construction,
blocks, partial transpose and partial trace; anything spectral drops to
floating point.
"""

from __future__ import annotations

import math
import string
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .exact import ExactMatrix, GaussianRational, dagger
from .numeric import TolerancePolicy, eig_hermitian

_SUBSYSTEM_LETTERS = string.ascii_uppercase


@dataclass(frozen=True)
class Cut:
    """An ordered bipartition of subsystem indices, e.g. AB:CD."""

    first: tuple[int, ...]
    second: tuple[int, ...]

    def __post_init__(self):
        seen = set(self.first) | set(self.second)
        if len(self.first) + len(self.second) != len(seen):
            raise ValueError("cut parts must be disjoint")
        if not self.first or not self.second:
            raise ValueError("both sides of a cut must be nonempty")

    @classmethod
    def parse(cls, text: str, nsub: int) -> "Cut":
        """Parse letter notation ('A:BCD', 'AB:CD') against nsub subsystems."""
        try:
            left, right = text.split(":")
        except ValueError:
            raise ValueError(f"cut must contain exactly one ':', got {text!r}")
        index = {_SUBSYSTEM_LETTERS[i]: i for i in range(nsub)}
        try:
            first = tuple(index[ch] for ch in left.strip())
            second = tuple(index[ch] for ch in right.strip())
        except KeyError as exc:
            raise ValueError(f"unknown subsystem letter {exc} in cut {text!r}")
        cut = cls(first, second)
        if set(cut.first) | set(cut.second) != set(range(nsub)):
            raise ValueError(f"cut {text!r} must mention every subsystem once")
        return cut

    @classmethod
    def bipartite(cls) -> "Cut":
        return cls((0,), (1,))

    def label(self) -> str:
        return (
            "".join(_SUBSYSTEM_LETTERS[i] for i in self.first)
            + ":"
            + "".join(_SUBSYSTEM_LETTERS[i] for i in self.second)
        )

    def sizes(self, dims) -> tuple[int, int]:
        m = math.prod(dims[i] for i in self.first)
        n = math.prod(dims[i] for i in self.second)
        return m, n


def _flat_permutation(dims, order):
    """perm[new_flat] = old_flat for reordering tensor factors to `order`."""
    k = len(dims)
    new_dims = [dims[s] for s in order]
    total = math.prod(dims)
    perm = [0] * total
    for new_flat in range(total):
        rem = new_flat
        digits_new = [0] * k
        for pos in range(k - 1, -1, -1):
            digits_new[pos] = rem % new_dims[pos]
            rem //= new_dims[pos]
        old_digits = [0] * k
        for pos, sub in enumerate(order):
            old_digits[sub] = digits_new[pos]
        old_flat = 0
        for sub in range(k):
            old_flat = old_flat * dims[sub] + old_digits[sub]
        perm[new_flat] = old_flat
    return perm


class Ensemble:
    """A weighted family of (not necessarily normalized) state vectors."""

    def __init__(self, dims, weights, vectors):
        self.dims = [int(d) for d in dims]
        if any(d < 1 for d in self.dims):
            raise ValueError("subsystem dimensions must be positive")
        total = math.prod(self.dims)
        if len(weights) != len(vectors):
            raise ValueError("one weight per vector required")
        if not vectors:
            raise ValueError("ensemble needs at least one vector")
        self.exact = all(
            isinstance(w, (int, Fraction)) for w in weights
        ) and all(
            all(isinstance(x, (int, GaussianRational)) for x in v)
            for v in vectors
            if not isinstance(v, np.ndarray)
        ) and not any(isinstance(v, np.ndarray) for v in vectors)
        if self.exact:
            self.weights = [Fraction(w) for w in weights]
            self.vectors = [
                [GaussianRational._coerce(x) for x in v] for v in vectors
            ]
        else:
            self.weights = [float(w) for w in weights]
            self.vectors = [np.asarray(v, dtype=complex) for v in vectors]
        if any(w <= 0 for w in self.weights):
            raise ValueError("weights must be strictly positive")
        for v in self.vectors:
            if len(v) != total:
                raise ValueError(
                    f"vector length {len(v)} does not match dims product {total}"
                )

    @property
    def size(self) -> int:
        return len(self.vectors)

    def coefficient_matrix(self):
        """Vectors as columns: the (prod dims) x t matrix."""
        if self.exact:
            cols = self.vectors
            total = len(cols[0])
            ents = [cols[j][i] for i in range(total) for j in range(len(cols))]
            return ExactMatrix(total, len(cols), ents)
        return np.stack(self.vectors, axis=1)

    def to_float(self) -> "Ensemble":
        if not self.exact:
            return self
        return Ensemble(
            self.dims,
            [float(w) for w in self.weights],
            [np.array([x.to_complex() for x in v]) for v in self.vectors],
        )

    # -- serialization -----------------------------------------------------

    def to_json_dict(self) -> dict:
        if self.exact:
            return {
                "dims": self.dims,
                "weights": [str(w) for w in self.weights],
                "vectors": [[str(x) for x in v] for v in self.vectors],
            }
        return {
            "dims": self.dims,
            "weights": self.weights,
            "vectors": [
                [[float(x.real), float(x.imag)] for x in v] for v in self.vectors
            ],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "Ensemble":
        def parse_weight(w):
            if isinstance(w, str):
                return Fraction(w)
            if isinstance(w, int):
                return w
            return float(w)

        def parse_entry(x):
            if isinstance(x, str):
                return GaussianRational.from_string(x)
            if isinstance(x, (list, tuple)):
                return complex(x[0], x[1])
            return complex(x)

        weights = [parse_weight(w) for w in data["weights"]]
        vectors = [[parse_entry(x) for x in v] for v in data["vectors"]]
        exact = all(isinstance(w, (int, Fraction)) for w in weights) and all(
            isinstance(x, GaussianRational) for v in vectors for x in v
        )
        if not exact:
            vectors = [
                np.array(
                    [x.to_complex() if isinstance(x, GaussianRational) else x for x in v]
                )
                for v in vectors
            ]
            weights = [float(w) for w in weights]
        return cls(data["dims"], weights, vectors)


class DensityMatrix:
    """A trace-one Hermitian matrix over a tensor-product space."""

    def __init__(self, dims, matrix, check: bool = True):
        self.dims = [int(d) for d in dims]
        total = math.prod(self.dims)
        self.exact = isinstance(matrix, ExactMatrix)
        self.matrix = matrix
        if self.exact:
            if matrix.shape != (total, total):
                raise ValueError("matrix size does not match dims")
            if check:
                if dagger(matrix) != matrix:
                    raise ValueError("exact density matrix must be Hermitian")
                if matrix.trace() != GaussianRational(1):
                    raise ValueError("exact density matrix must have trace 1")
        else:
            m = np.asarray(matrix, dtype=complex)
            if m.shape != (total, total):
                raise ValueError("matrix size does not match dims")
            self.matrix = m
            if check:
                if np.max(np.abs(m - m.conj().T)) > 1e-10 * max(1.0, np.abs(m).max()):
                    raise ValueError("density matrix must be Hermitian")
                if abs(np.trace(m) - 1.0) > 1e-12 * max(1.0, np.abs(np.trace(m))):
                    raise ValueError("density matrix must have trace 1")

    def to_numpy(self) -> np.ndarray:
        return self.matrix.to_numpy() if self.exact else self.matrix

    def realigned(self, cut: Cut):
        """Matrix in the basis ordered (cut.first, cut.second); plus (m, n)."""
        order = list(cut.first) + list(cut.second)
        m, n = cut.sizes(self.dims)
        if order == list(range(len(self.dims))):
            return self.matrix, m, n
        perm = _flat_permutation(self.dims, order)
        total = math.prod(self.dims)
        if self.exact:
            ents = [
                self.matrix.get(perm[i], perm[j])
                for i in range(total)
                for j in range(total)
            ]
            return ExactMatrix(total, total, ents), m, n
        return self.matrix[np.ix_(perm, perm)], m, n

    def to_json_dict(self) -> dict:
        if self.exact:
            return {"dims": self.dims, "matrix": self.matrix.to_json_dict()}
        return {
            "dims": self.dims,
            "matrix": [
                [[float(x.real), float(x.imag)] for x in row] for row in self.matrix
            ],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "DensityMatrix":
        mat = data["matrix"]
        if isinstance(mat, dict):
            return cls(data["dims"], ExactMatrix.from_json_dict(mat))
        arr = np.array([[complex(x[0], x[1]) for x in row] for row in mat])
        return cls(data["dims"], arr)


def from_ensemble(e: Ensemble) -> DensityMatrix:
    """rho = A P A^dagger, normalized to trace one."""
    a = e.coefficient_matrix()
    if e.exact:
        if a.is_zero():
            raise ValueError("ensemble vectors are all zero")
        ap = a.scale_columns([GaussianRational(w) for w in e.weights])
        rho = ap @ dagger(a)
        tr = rho.trace()
        if tr.is_zero():
            raise ValueError("ensemble has zero trace")
        rho = rho.scale(GaussianRational(1) / tr)
        return DensityMatrix(e.dims, rho)
    if not np.any(np.abs(a) > 0):
        raise ValueError("ensemble vectors are all zero")
    rho = (a * np.asarray(e.weights)) @ a.conj().T
    rho = rho / np.trace(rho).real
    return DensityMatrix(e.dims, rho)


def block(rho: DensityMatrix, i: int, j: int, cut: Cut):
    """The n x n block rho_ij of the cut-realigned matrix (0-based i, j)."""
    mat, m, n = rho.realigned(cut)
    if not (0 <= i < m and 0 <= j < m):
        raise IndexError(f"block index ({i},{j}) out of range for m={m}")
    if rho.exact:
        return mat.submatrix(range(i * n, (i + 1) * n), range(j * n, (j + 1) * n))
    return mat[i * n : (i + 1) * n, j * n : (j + 1) * n]


def partial_transpose(rho: DensityMatrix, cut: Cut) -> DensityMatrix:
    """Transpose the second tensor factor of the cut: <ij|r|kl> -> <il|r|kj>."""
    order = list(cut.first) + list(cut.second)
    perm = _flat_permutation(rho.dims, order)
    m, n = cut.sizes(rho.dims)
    total = m * n
    inv = [0] * total
    for new, old in enumerate(perm):
        inv[old] = new
    if rho.exact:
        ents = []
        for a in range(total):
            i, jj = divmod(inv[a], n)
            for b in range(total):
                k, ll = divmod(inv[b], n)
                # (i,j),(k,l) of PT pulls from (i,l),(k,j)
                src_r = perm[i * n + ll]
                src_c = perm[k * n + jj]
                ents.append(rho.matrix.get(src_r, src_c))
        return DensityMatrix(rho.dims, ExactMatrix(total, total, ents), check=False)
    mat = rho.matrix[np.ix_(perm, perm)].reshape(m, n, m, n)
    mat = mat.transpose(0, 3, 2, 1).reshape(total, total)
    inv_arr = np.asarray(inv)
    out = mat[np.ix_(inv_arr, inv_arr)]
    return DensityMatrix(rho.dims, out, check=False)


def partial_trace(rho: DensityMatrix, keep) -> DensityMatrix:
    """Trace out every subsystem not in ``keep`` (an iterable of indices)."""
    keep = tuple(sorted(set(int(s) for s in keep)))
    nsub = len(rho.dims)
    if not keep or len(keep) >= nsub:
        raise ValueError("keep must be a nonempty proper subsystem subset")
    drop = tuple(s for s in range(nsub) if s not in keep)
    order = list(keep) + list(drop)
    perm = _flat_permutation(rho.dims, order)
    m = math.prod(rho.dims[s] for s in keep)
    n = math.prod(rho.dims[s] for s in drop)
    if rho.exact:
        out = []
        for i in range(m):
            for j in range(m):
                acc = GaussianRational(0)
                for l in range(n):
                    acc = acc + rho.matrix.get(perm[i * n + l], perm[j * n + l])
                out.append(acc)
        reduced = ExactMatrix(m, m, out)
        return DensityMatrix([rho.dims[s] for s in keep], reduced)
    mat = rho.matrix[np.ix_(perm, perm)].reshape(m, n, m, n)
    reduced = np.einsum("iljl->ij", mat)
    return DensityMatrix([rho.dims[s] for s in keep], reduced)


def is_ppt(rho: DensityMatrix, cut: Cut, policy: TolerancePolicy | None = None):
    """Peres test: (bool, min eigenvalue of the partial transpose)."""
    policy = policy or TolerancePolicy.default()
    pt = partial_transpose(rho, cut)
    vals, _ = eig_hermitian(pt.to_numpy(), policy)
    min_eig = float(vals[-1])
    return min_eig >= -policy.eig_tol, min_eig


def vn_entropy(spectrum) -> float:
    """Von Neumann entropy in nats, with 0 log 0 = 0."""
    acc = 0.0
    for lam in spectrum:
        if lam > 1e-15:
            acc -= lam * math.log(lam)
    return acc


def majorizes(dominating, dominated, slack: float = 1e-9) -> bool:
    """True when ``dominated`` is majorized by ``dominating`` (both descending)."""
    size = max(len(dominating), len(dominated))
    a = list(dominating) + [0.0] * (size - len(dominating))
    b = list(dominated) + [0.0] * (size - len(dominated))
    run_a = run_b = 0.0
    for x, y in zip(a, b):
        run_a += x
        run_b += y
        if run_b > run_a + slack:
            return False
    return True


@dataclass
class SpectraReport:
    """Eigenvalue spectra plus the two classical separability criteria."""

    global_spectrum: list[float]
    local_spectra: list[list[float]]
    entropies: dict
    entropy_criterion_fulfilled: list[bool]
    disorder_criterion_fulfilled: list[bool]

    def to_json_dict(self) -> dict:
        return {
            "global_spectrum": self.global_spectrum,
            "local_spectra": self.local_spectra,
            "entropies": self.entropies,
            "entropy_criterion_fulfilled": self.entropy_criterion_fulfilled,
            "disorder_criterion_fulfilled": self.disorder_criterion_fulfilled,
        }


def spectra_report(rho: DensityMatrix, policy: TolerancePolicy | None = None) -> SpectraReport:
    """Global and single-subsystem spectra, entropies, and criterion verdicts.

    The entropy criterion requires every local entropy to stay at or below
    the global one; the disorder criterion requires the global spectrum to be
    majorized by every local spectrum.  Both are necessary conditions for
    separability only.
    """
    policy = policy or TolerancePolicy.default()
    g_vals, _ = eig_hermitian(rho.to_numpy(), policy)
    g_spec = [float(v) for v in g_vals]
    local_specs = []
    for s in range(len(rho.dims)):
        red = partial_trace(rho, [s]) if len(rho.dims) > 1 else rho
        l_vals, _ = eig_hermitian(red.to_numpy(), policy)
        local_specs.append([float(v) for v in l_vals])
    s_global = vn_entropy(g_spec)
    s_locals = [vn_entropy(spec) for spec in local_specs]
    entropy_ok = [s_loc <= s_global + 1e-9 for s_loc in s_locals]
    disorder_ok = [majorizes(spec, g_spec) for spec in local_specs]
    return SpectraReport(
        global_spectrum=g_spec,
        local_spectra=local_specs,
        entropies={"global": s_global, "local": s_locals},
        entropy_criterion_fulfilled=entropy_ok,
        disorder_criterion_fulfilled=disorder_ok,
    )
