"""Rank loci of state pencils: membership, sampling, and the linearity probe.

A state with coefficient blocks ``A_1..A_m`` induces the pencil
``M(x) = sum_i x_i A_i``; the locus ``{x : rank M(x) <= k}`` in projective
space is the object of interest.  Membership is decided on the pencil (exact
rank when everything is rational, singular values otherwise); the Hermitian
form route is kept as an independent cross-check.

The linearity probe samples smooth locus points, computes tangent directions
from the kernel of the minor Jacobian, and steps along them: any reproducible
exit from the locus is a certificate that the locus is not a union of linear
subspaces — which for a state pencil certifies entanglement.  The verdict is
one-sided: "linear" only means no nonlinearity was found.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .exact import ExactMatrix, GaussianRational, dagger, minor_index_sets, rank_exact
from .numeric import (
    TolerancePolicy,
    numerical_rank,
    random_complex_vector,
    rank_residual,
)
from .poly import HomogPoly, LinearForm, SymbolicPencil, divide_linear, sym_minors
from .states import Cut, DensityMatrix, Ensemble, _flat_permutation
from .numeric import eig_hermitian

PROBE_STEPS = (0.05, 0.1, 0.2)
MIN_LINEAR_PASSES = 20


class ProjectivePoint:
    """A nonzero coordinate vector, canonically normalized.

    Float points divide by the max-modulus coordinate; exact points scale the
    first nonzero coordinate to one.  Equality of normalized representatives
    (within a tolerance on the float path) is projective equality.
    """

    __slots__ = ("coords", "exact")

    def __init__(self, coords):
        if isinstance(coords, ProjectivePoint):
            self.coords = coords.coords
            self.exact = coords.exact
            return
        seq = list(coords)
        self.exact = all(
            isinstance(c, (int, GaussianRational)) or type(c).__name__ == "Fraction"
            for c in seq
        )
        if self.exact:
            pt = [GaussianRational._coerce(c) for c in seq]
            lead = next((c for c in pt if not c.is_zero()), None)
            if lead is None:
                raise ValueError("projective point must be nonzero")
            self.coords = [c / lead for c in pt]
        else:
            arr = np.asarray(seq, dtype=complex)
            idx = int(np.argmax(np.abs(arr)))
            if abs(arr[idx]) == 0:
                raise ValueError("projective point must be nonzero")
            self.coords = arr / arr[idx]

    def __len__(self):
        return len(self.coords)

    def to_numpy(self) -> np.ndarray:
        if self.exact:
            return np.array([c.to_complex() for c in self.coords])
        return self.coords

    def approx_eq(self, other: "ProjectivePoint", tol: float = 1e-8) -> bool:
        if self.exact and other.exact:
            return self.coords == other.coords
        return bool(np.max(np.abs(self.to_numpy() - other.to_numpy())) <= tol)

    def __repr__(self):
        return f"ProjectivePoint({self.coords!r})"


def _point_coords(x, m: int):
    """Accept ProjectivePoint or plain sequence; return (coords, is_exact)."""
    if isinstance(x, ProjectivePoint):
        coords = x.coords
        exact = x.exact
    else:
        seq = list(x)
        exact = all(
            isinstance(c, (int, GaussianRational)) or type(c).__name__ == "Fraction"
            for c in seq
        )
        coords = [GaussianRational._coerce(c) for c in seq] if exact else np.asarray(seq, dtype=complex)
    if len(coords) != m:
        raise ValueError(f"point has {len(coords)} coordinates, pencil expects {m}")
    return coords, exact


class Pencil:
    """m coefficient blocks of one shared size n x t."""

    def __init__(self, blocks):
        if not blocks:
            raise ValueError("pencil needs at least one block")
        self.exact = all(isinstance(b, ExactMatrix) for b in blocks)
        if self.exact:
            shape = blocks[0].shape
            if any(b.shape != shape for b in blocks):
                raise ValueError("pencil blocks must share a shape")
            self.blocks = list(blocks)
            self.n, self.t = shape
        else:
            arrs = [np.asarray(b, dtype=complex) for b in blocks]
            shape = arrs[0].shape
            if any(a.shape != shape for a in arrs):
                raise ValueError("pencil blocks must share a shape")
            self.blocks = arrs
            self.n, self.t = shape
        self.m = len(blocks)

    def to_float(self) -> "Pencil":
        if not self.exact:
            return self
        return Pencil([b.to_numpy() for b in self.blocks])

    def combine(self, coords, exact: bool | None = None):
        """sum_i x_i A_i for coordinates x."""
        coords, x_exact = _point_coords(coords, self.m) if exact is None else (coords, exact)
        if self.exact and x_exact:
            acc = ExactMatrix.zeros(self.n, self.t)
            for xi, block in zip(coords, self.blocks):
                xi = GaussianRational._coerce(xi)
                if not xi.is_zero():
                    acc = acc + block.scale(xi)
            return acc
        arr = np.asarray(
            [c.to_complex() if isinstance(c, GaussianRational) else complex(c) for c in coords]
        )
        fblocks = self.blocks if not self.exact else [b.to_numpy() for b in self.blocks]
        return np.tensordot(arr, np.stack(fblocks), axes=(0, 0))

    def symbolic(self) -> SymbolicPencil:
        """Entries of sum_i r_i A_i as linear forms (exact pencils only)."""
        if not self.exact:
            raise ValueError("symbolic pencil requires exact blocks")
        grid = []
        for j in range(self.n):
            row = []
            for l in range(self.t):
                coeffs = [b.get(j, l) for b in self.blocks]
                if all(c.is_zero() for c in coeffs):
                    row.append(None)
                else:
                    terms = {
                        tuple(1 if q == i else 0 for q in range(self.m)): c
                        for i, c in enumerate(coeffs)
                        if not c.is_zero()
                    }
                    row.append(HomogPoly(self.m, 1, terms))
            grid.append(row)
        return SymbolicPencil.from_grid(self.m, grid)


def _vector_layout_exact(vec, dims, cut: Cut) -> ExactMatrix:
    order = list(cut.first) + list(cut.second)
    perm = _flat_permutation(dims, order)
    m, n = cut.sizes(dims)
    ents = [vec[perm[i * n + j]] for i in range(m) for j in range(n)]
    return ExactMatrix(m, n, ents)


def _vector_layout_float(vec, dims, cut: Cut) -> np.ndarray:
    order = list(cut.first) + list(cut.second)
    perm = _flat_permutation(dims, order)
    m, n = cut.sizes(dims)
    arr = np.asarray(vec, dtype=complex)
    return arr[np.asarray(perm)].reshape(m, n)


def pencil_from_ensemble(e: Ensemble, cut: Cut) -> Pencil:
    """Blocks A_w of the cut-aligned coefficient matrix.

    On the exact path the positive weights are dropped entirely: they never
    change the rank of ``sum x_i A_i``.  On the float path sqrt-weights are
    absorbed into the columns.
    """
    m, n = cut.sizes(e.dims)
    t = e.size
    if e.exact:
        layouts = [_vector_layout_exact(v, e.dims, cut) for v in e.vectors]
        blocks = []
        for w in range(m):
            ents = [layouts[l].get(w, j) for j in range(n) for l in range(t)]
            blocks.append(ExactMatrix(n, t, ents))
        return Pencil(blocks)
    layouts = [_vector_layout_float(v, e.dims, cut) for v in e.vectors]
    weights = np.sqrt(np.asarray(e.weights, dtype=float))
    blocks = [
        np.stack([w_l * lay[w] for w_l, lay in zip(weights, layouts)], axis=1)
        for w in range(m)
    ]
    return Pencil(blocks)


def pencil_from_density(
    rho: DensityMatrix, cut: Cut, policy: TolerancePolicy | None = None
) -> Pencil:
    """Pencil from the eigendecomposition of rho (float path).

    Membership verdicts agree with any ensemble-derived pencil of the same
    state: different decompositions span the same column spaces blockwise.
    """
    policy = policy or TolerancePolicy.default()
    vals, vecs = eig_hermitian(rho.to_numpy(), policy)
    keep = [i for i, v in enumerate(vals) if v > policy.rank_tol * max(vals[0], 0.0)]
    if not keep:
        raise ValueError("state has no significant eigenvalues")
    vectors = [np.sqrt(vals[i]) * vecs[:, i] for i in keep]
    m, n = cut.sizes(rho.dims)
    layouts = [_vector_layout_float(v, rho.dims, cut) for v in vectors]
    blocks = [np.stack([lay[w] for lay in layouts], axis=1) for w in range(m)]
    return Pencil(blocks)


def membership(p: Pencil, x, k: int, policy: TolerancePolicy | None = None) -> bool:
    """rank(sum_i x_i A_i) <= k, exact when pencil and point both are."""
    policy = policy or TolerancePolicy.default()
    if k < 0 or k >= p.n:
        raise ValueError(f"rank bound k={k} out of range for n={p.n}")
    coords, exact = _point_coords(x, p.m)
    mat = p.combine(coords, exact)
    if isinstance(mat, ExactMatrix):
        return rank_exact(mat) <= k
    return numerical_rank(mat, policy) <= k


def hermitian_form(rho: DensityMatrix, x, cut: Cut):
    """sum_{ij} x_i conj(x_j) rho_ij: the measured form on the second factor."""
    mat, m, n = rho.realigned(cut)
    coords, exact = _point_coords(x, m)
    if rho.exact and exact:
        acc = ExactMatrix.zeros(n, n)
        for i in range(m):
            xi = coords[i]
            if xi.is_zero():
                continue
            for j in range(m):
                xj = coords[j]
                if xj.is_zero():
                    continue
                blockij = mat.submatrix(
                    range(i * n, (i + 1) * n), range(j * n, (j + 1) * n)
                )
                acc = acc + blockij.scale(xi * xj.conjugate())
        return acc
    arr = np.asarray(
        [c.to_complex() if isinstance(c, GaussianRational) else complex(c) for c in coords]
    )
    full = mat.to_numpy() if rho.exact else mat
    tens = full.reshape(m, n, m, n)
    return np.einsum("i,k,ijkl->jl", arr, arr.conj(), tens)


def schmidt_number(v, dims, cut: Cut | None = None, policy: TolerancePolicy | None = None) -> int:
    """Rank of the cut-aligned coefficient matrix of a pure state.

    Equals m - 1 - dim(kernel locus), with the empty projectivized kernel
    counted as dimension -1.
    """
    policy = policy or TolerancePolicy.default()
    cut = cut or Cut((0,), tuple(range(1, len(dims))))
    seq = list(v)
    exact = all(
        isinstance(c, (int, GaussianRational)) or type(c).__name__ == "Fraction"
        for c in seq
    )
    if exact:
        pt = [GaussianRational._coerce(c) for c in seq]
        if all(c.is_zero() for c in pt):
            raise ValueError("zero vector has no Schmidt number")
        return rank_exact(_vector_layout_exact(pt, dims, cut))
    arr = np.asarray(seq, dtype=complex)
    if not np.any(np.abs(arr) > 0):
        raise ValueError("zero vector has no Schmidt number")
    return numerical_rank(_vector_layout_float(arr, dims, cut), policy)


# ---------------------------------------------------------------------------
# numeric locus machinery
# ---------------------------------------------------------------------------


def _adjugate(b: np.ndarray) -> np.ndarray:
    n = b.shape[0]
    if n == 1:
        return np.ones((1, 1), dtype=complex)
    adj = np.empty((n, n), dtype=complex)
    rows = list(range(n))
    for i in range(n):
        for j in range(n):
            sub = b[np.ix_([r for r in rows if r != j], [c for c in rows if c != i])]
            adj[i, j] = (-1) ** (i + j) * np.linalg.det(sub)
    return adj


class _LocusNumerics:
    """Float-side helpers for one (pencil, k) locus."""

    def __init__(self, p: Pencil, k: int, policy: TolerancePolicy):
        if k < 0 or k >= p.n:
            raise ValueError(f"rank bound k={k} out of range for n={p.n}")
        pf = p.to_float()
        self.blocks = np.stack(pf.blocks)
        self.m, self.n, self.t = pf.m, pf.n, pf.t
        self.k = k
        self.policy = policy
        self.trivial = k + 1 > min(self.n, self.t)
        if not self.trivial:
            self.selections = minor_index_sets(self.n, self.t, k + 1)
        else:
            self.selections = []
        flat = self.blocks.reshape(self.m, -1).T
        self.pinv = np.linalg.pinv(flat)

    def combine(self, x: np.ndarray) -> np.ndarray:
        return np.tensordot(x, self.blocks, axes=(0, 0))

    def residual(self, x: np.ndarray) -> float:
        return rank_residual(self.combine(x), self.k)

    def is_member(self, x: np.ndarray) -> bool:
        return numerical_rank(self.combine(x), self.policy) <= self.k

    def minor_values(self, x: np.ndarray) -> np.ndarray:
        mat = self.combine(x)
        return np.array(
            [np.linalg.det(mat[np.ix_(rows, cols)]) for rows, cols in self.selections]
        )

    def jacobian(self, x: np.ndarray) -> np.ndarray:
        """d(minor_s)/d(x_i) via the adjugate rule d det = tr(adj . dM)."""
        mat = self.combine(x)
        jac = np.empty((len(self.selections), self.m), dtype=complex)
        for s, (rows, cols) in enumerate(self.selections):
            adj = _adjugate(mat[np.ix_(rows, cols)])
            for i in range(self.m):
                jac[s, i] = np.trace(adj @ self.blocks[i][np.ix_(rows, cols)])
        return jac

    def jacobian_rank(self, x: np.ndarray, tol: float = 1e-4) -> int:
        jac = self.jacobian(x)
        s = np.linalg.svd(jac, compute_uv=False)
        if s.size == 0 or s[0] < 1e-13:
            return 0
        return int(np.sum(s > tol * s[0]))

    def tangent_directions(self, x: np.ndarray, tol: float = 1e-4):
        """Orthonormal kernel directions of the Jacobian, with x removed."""
        jac = self.jacobian(x)
        u, s, vh = np.linalg.svd(jac)
        if s.size == 0 or s[0] < 1e-13:
            kernel = np.eye(self.m, dtype=complex)
        else:
            rank = int(np.sum(s > tol * s[0]))
            kernel = vh[rank:].conj().T
        if kernel.shape[1] == 0:
            return []
        xh = x / np.linalg.norm(x)
        proj = kernel - np.outer(xh, xh.conj() @ kernel)
        q, r = np.linalg.qr(proj)
        dirs = []
        for i in range(q.shape[1]):
            if abs(r[i, i]) > 1e-8:
                dirs.append(q[:, i])
        return dirs

    def project_to_locus(self, x0: np.ndarray, iters: int = 250, target: float = 1e-12):
        """Alternate SVD rank truncation with projection back onto the pencil."""
        x = x0 / np.linalg.norm(x0)
        for _ in range(iters):
            mat = self.combine(x)
            u, s, vh = np.linalg.svd(mat)
            if s[0] == 0.0:
                return None
            if s.size > self.k and s[self.k] / s[0] < target:
                return x
            s_trunc = s.copy()
            s_trunc[self.k :] = 0.0
            low = (u[:, : len(s)] * s_trunc) @ vh[: len(s)]
            x_new = self.pinv @ low.reshape(-1)
            nrm = np.linalg.norm(x_new)
            if nrm < 1e-14:
                return None
            x = x_new / nrm
        return x if self.residual(x) < 1e-10 else None

    # -- samplers ----------------------------------------------------------

    def _line_roots(self, u: np.ndarray, w: np.ndarray, rng):
        """Candidate member points on the projective line u + t w."""
        deg = self.k + 1
        if self.trivial:
            return []
        nodes = np.exp(2j * np.pi * np.arange(deg + 1) / (deg + 1))
        order = list(range(len(self.selections)))
        if len(order) > 6:
            order = list(rng.permutation(len(self.selections))[:6])
        found = []
        degenerate = 0
        for sel in order:
            rows, cols = self.selections[sel]
            vals = np.array(
                [
                    np.linalg.det(self.combine(u + t * w)[np.ix_(rows, cols)])
                    for t in nodes
                ]
            )
            if np.max(np.abs(vals)) < 1e-13:
                degenerate += 1
                continue
            vand = np.vander(nodes, deg + 1, increasing=False)
            coeffs = np.linalg.solve(vand, vals)
            nz = np.nonzero(np.abs(coeffs) > 1e-10 * np.max(np.abs(coeffs)))[0]
            coeffs = coeffs[nz[0] :]
            if len(coeffs) < 2:
                continue
            for t0 in np.roots(coeffs):
                found.append(u + t0 * w)
            found.append(np.array(w, copy=True))  # the point at infinity
            break
        else:
            if degenerate and degenerate == len(order):
                # every tried minor vanishes on the line: sample the line itself
                for t0 in rng.standard_normal(4) + 1j * rng.standard_normal(4):
                    found.append(u + t0 * w)
        return found

    def _newton_on_slice(self, c: int, rng, starts: int = 6, iters: int = 30):
        """Solve c random minors on a random c-plane by Newton iteration."""
        if self.trivial or len(self.selections) < c:
            return []
        base = random_complex_vector(self.m, rng)
        dirs = [random_complex_vector(self.m, rng) for _ in range(c)]
        sel_pool = list(rng.permutation(len(self.selections)))
        sel = sel_pool[:c]
        pts = []
        w_mats = [self.combine(d) for d in dirs]

        def slice_point(y):
            return base + sum(y[j] * dirs[j] for j in range(c))

        scale = []
        for sid in sel:
            rows, cols = self.selections[sid]
            probe_vals = [
                abs(np.linalg.det(self.combine(slice_point(
                    rng.standard_normal(c) + 1j * rng.standard_normal(c)
                ))[np.ix_(rows, cols)]))
                for _ in range(3)
            ]
            scale.append(max(max(probe_vals), 1e-30))
        for _ in range(starts):
            y = rng.standard_normal(c) + 1j * rng.standard_normal(c)
            ok = False
            for _ in range(iters):
                x = slice_point(y)
                mat = self.combine(x)
                g = np.empty(c, dtype=complex)
                jac = np.empty((c, c), dtype=complex)
                for row, sid in enumerate(sel):
                    rows, cols = self.selections[sid]
                    sub = mat[np.ix_(rows, cols)]
                    g[row] = np.linalg.det(sub) / scale[row]
                    adj = _adjugate(sub)
                    for j in range(c):
                        jac[row, j] = np.trace(adj @ w_mats[j][np.ix_(rows, cols)]) / scale[row]
                if np.max(np.abs(g)) < 1e-13:
                    ok = True
                    break
                try:
                    step = np.linalg.lstsq(jac, g, rcond=None)[0]
                except np.linalg.LinAlgError:
                    break
                if not np.all(np.isfinite(step)) or np.linalg.norm(step) > 1e3:
                    break
                y = y - step
            if ok:
                pts.append(slice_point(y))
        return pts

    def harvest(self, rng, want: int):
        """Round-robin candidate locus points from all sampling stages."""
        stages = []

        def lines_stage():
            for _ in range(max(12, want)):
                u = random_complex_vector(self.m, rng)
                w = random_complex_vector(self.m, rng)
                for cand in self._line_roots(u, w, rng):
                    yield cand

        def projection_stage():
            for _ in range(max(20, 2 * want)):
                yield random_complex_vector(self.m, rng)

        stages.append(("line", lines_stage()))
        stages.append(("proj", projection_stage()))
        for c in range(2, min(self.m - 1, 3) + 1):
            def newton_stage(cc=c):
                for _ in range(8):
                    for cand in self._newton_on_slice(cc, rng):
                        yield cand

            stages.append((f"newton{c}", newton_stage()))

        out = []
        stalls = {"line": 0, "proj": 0}
        active = {name: it for name, it in stages}
        while active and len(out) < 3 * want:
            for name in list(active):
                try:
                    raw = next(active[name])
                except StopIteration:
                    del active[name]
                    continue
                x = self.project_to_locus(np.asarray(raw, dtype=complex))
                if x is None:
                    if name in stalls:
                        stalls[name] += 1
                    continue
                if not self.is_member(x):
                    continue
                out.append(x / np.linalg.norm(x))
        return out, stalls


def sample_points(
    p: Pencil,
    k: int,
    count: int,
    seed: int,
    policy: TolerancePolicy | None = None,
) -> list[ProjectivePoint]:
    """Locus points found by slicing with random projective lines.

    Minors restricted to a line are univariate; their roots (companion-matrix
    root finding) are polished and membership-filtered.  Returns fewer than
    ``count`` points when the locus is empty on every attempted slice.
    """
    policy = policy or TolerancePolicy.default()
    num = _LocusNumerics(p, k, policy)
    rng = np.random.default_rng(seed)
    found: list[ProjectivePoint] = []
    attempts = 0
    max_attempts = 30 + 4 * count
    while len(found) < count and attempts < max_attempts:
        attempts += 1
        u = random_complex_vector(num.m, rng)
        w = random_complex_vector(num.m, rng)
        for cand in num._line_roots(u, w, rng):
            x = num.project_to_locus(np.asarray(cand, dtype=complex), iters=80)
            if x is None or not num.is_member(x):
                continue
            pt = ProjectivePoint(x)
            if not any(pt.approx_eq(q, 1e-7) for q in found):
                found.append(pt)
            if len(found) >= count:
                break
    return found


def local_dimension(
    p: Pencil, k: int, x, policy: TolerancePolicy | None = None
) -> int:
    """m - 1 - rank(minor Jacobian) at a member point."""
    policy = policy or TolerancePolicy.default()
    if not membership(p, x, k, policy):
        raise ValueError("local_dimension requires a point on the locus")
    num = _LocusNumerics(p, k, policy)
    if num.trivial:
        return num.m - 1
    coords, _ = _point_coords(x, p.m)
    arr = np.asarray(
        [c.to_complex() if isinstance(c, GaussianRational) else complex(c) for c in coords]
    )
    arr = arr / np.linalg.norm(arr)
    return num.m - 1 - num.jacobian_rank(arr)


@dataclass
class ProbeReport:
    """Linearity-probe outcome with a reproducible witness."""

    verdict: str  # "linear" | "nonlinear" | "inconclusive"
    witness: dict | None
    samples_used: int
    points_passed: int
    seed: int
    k: int
    flags: list[str] = field(default_factory=list)
    chart_counts: dict = field(default_factory=dict)

    def to_json_dict(self, reproduce: str | None = None) -> dict:
        def cvec(v):
            return [[float(c.real), float(c.imag)] for c in v]

        witness = None
        if self.witness is not None:
            witness = {
                "point": cvec(self.witness["point"]),
                "direction": cvec(self.witness["direction"]),
                "step": self.witness["step"],
                "residual": self.witness["residual"],
            }
            if "factor" in self.witness:
                witness["factor"] = self.witness["factor"]
        out = {
            "verdict": self.verdict,
            "witness": witness,
            "samples_used": self.samples_used,
            "points_passed": self.points_passed,
            "seed": self.seed,
            "k": self.k,
            "flags": self.flags,
            "chart_counts": {str(i): c for i, c in self.chart_counts.items()},
        }
        if reproduce:
            out["reproduce"] = reproduce
        return out


def _probe_point(num: _LocusNumerics, x: np.ndarray, rng, policy: TolerancePolicy):
    """Tangent-step test at one point.

    Returns ("pass", None), ("fail", witness) or ("skip", None).
    """
    fail_tol = 100.0 * policy.membership_tol
    pass_tol = 10.0 * policy.membership_tol
    rank0 = num.jacobian_rank(x)
    for _ in range(2):  # smoothness screen: rank stable under perturbation
        xp = x + 1e-6 * random_complex_vector(num.m, rng)
        xp /= np.linalg.norm(xp)
        if num.jacobian_rank(xp) != rank0:
            return "skip", None
    dirs = num.tangent_directions(x)
    if not dirs:
        return "pass", None  # isolated projective point: vacuously linear
    for v in dirs:
        for s in PROBE_STEPS:
            y = x + s * v
            y /= np.linalg.norm(y)
            res = num.residual(y)
            if res <= pass_tol:
                continue
            if res > fail_tol:
                yh = x + (s / 2.0) * v
                yh /= np.linalg.norm(yh)
                res_half = num.residual(yh)
                if res_half > fail_tol:
                    witness = {
                        "point": x,
                        "direction": v,
                        "step": s,
                        "residual": float(res),
                        "residual_half_step": float(res_half),
                    }
                    return "fail", witness
            return "skip", None  # gray zone: do not count either way
    return "pass", None


def linearity_probe(
    p: Pencil,
    k: int,
    samples: int = 40,
    seed: int = 0,
    policy: TolerancePolicy | None = None,
) -> ProbeReport:
    """Probe whether the rank-k locus is a union of linear subspaces.

    Nonlinear requires a tangent-step residual above 100x membership_tol that
    persists under step halving; linear requires at least 20 clean sample
    points; anything else is inconclusive.  An identically-degenerate pencil
    (every point a member) and an empty locus are both reported linear, with
    an explanatory flag.
    """
    policy = policy or TolerancePolicy.default()
    num = _LocusNumerics(p, k, policy)
    rng = np.random.default_rng(seed)
    flags: list[str] = []

    if num.trivial:
        return ProbeReport("linear", None, 0, 0, seed, k, ["all-space"], {})
    # degenerate pencil: every random point already a member
    probe_pts = [random_complex_vector(num.m, rng) for _ in range(8)]
    if all(num.is_member(x) for x in probe_pts):
        return ProbeReport("linear", None, 0, 0, seed, k, ["all-space"], {})

    candidates, stalls = num.harvest(rng, samples)
    chart_counts: dict[int, int] = {}
    passed = 0
    tested = 0
    for x in candidates:
        if tested >= samples:
            break
        verdict, witness = _probe_point(num, x, rng, policy)
        if verdict == "skip":
            continue
        tested += 1
        chart = int(np.argmax(np.abs(x)))
        chart_counts[chart] = chart_counts.get(chart, 0) + 1
        if verdict == "fail":
            return ProbeReport(
                "nonlinear", witness, tested, passed, seed, k, flags, chart_counts
            )
        passed += 1

    if not candidates:
        if stalls.get("proj", 0) >= 15 and stalls.get("line", 0) + stalls.get("proj", 0) >= 30:
            return ProbeReport(
                "linear", None, 0, 0, seed, k, ["empty-locus"], {}
            )
        return ProbeReport("inconclusive", None, 0, 0, seed, k, flags, {})
    if passed >= MIN_LINEAR_PASSES:
        return ProbeReport("linear", None, tested, passed, seed, k, flags, chart_counts)
    return ProbeReport("inconclusive", None, tested, passed, seed, k, flags, chart_counts)


# ---------------------------------------------------------------------------
# separable-state structure certificate
# ---------------------------------------------------------------------------


def product_split_exact(vec, dims, cut: Cut):
    """Exact rank-one factorization of a vector across a cut, or None."""
    pt = [GaussianRational._coerce(c) for c in vec]
    layout = _vector_layout_exact(pt, dims, cut)
    if rank_exact(layout) != 1:
        return None
    m, n = layout.shape
    pivot = None
    for i in range(m):
        for j in range(n):
            if not layout.get(i, j).is_zero():
                pivot = (i, j)
                break
        if pivot:
            break
    i0, j0 = pivot
    b = [layout.get(i0, j) / layout.get(i0, j0) for j in range(n)]
    a = [layout.get(i, j0) for i in range(m)]
    return a, b


def verify_separable_factorization(e: Ensemble, cut: Cut, k: int):
    """Certify that every (k+1)-minor is a constant times predicted forms.

    For an ensemble of exact product vectors a_u (x) b_u, the pencil is
    B G(r) with G diagonal in the linear forms L_u(r) = sum_i a_u^i r_i, so
    every minor must factor as constant * product of k+1 of the L_u.  This is
    checked by exact division; the factor assignment is returned.
    """
    if not e.exact:
        raise ValueError("separable factorization check needs exact entries")
    m, n = cut.sizes(e.dims)
    splits = []
    for idx, v in enumerate(e.vectors):
        split = product_split_exact(v, e.dims, cut)
        if split is None:
            raise ValueError(f"ensemble vector {idx} is not a product across the cut")
        splits.append(split)
    forms = [LinearForm(a).normalized() for a, _ in splits]
    if k + 1 > min(n, e.size):
        return True, {
            "note": "rank bound at or above pencil width: no minors, locus is everything",
            "minors": [],
        }
    pencil = pencil_from_ensemble(e, cut)
    minors = sym_minors(pencil.symbolic(), k)
    distinct: list[LinearForm] = []
    for f in forms:
        if not any(f == g for g in distinct):
            distinct.append(f)
    assignments = []
    for minor in minors:
        if minor.is_zero():
            assignments.append({"zero": True})
            continue
        remaining = minor
        used = []
        for _ in range(k + 1):
            for fi, f in enumerate(distinct):
                quotient = divide_linear(remaining, f)
                if quotient is not None:
                    remaining = quotient
                    used.append(fi)
                    break
            else:
                return False, {
                    "failed_minor": minor.to_string(),
                    "partial_factors": used,
                }
        if remaining.degree != 0 or len(remaining.terms) != 1:
            return False, {"failed_minor": minor.to_string(), "partial_factors": used}
        constant = next(iter(remaining.terms.values()))
        assignments.append({"zero": False, "factors": used, "constant": str(constant)})
    return True, {"minors": assignments, "forms": [f.as_poly().to_string() for f in distinct]}


# ---------------------------------------------------------------------------
# product-space (Segre) loci
# ---------------------------------------------------------------------------


def bilinear_rank(form: HomogPoly, dims: tuple[int, int]) -> int:
    """Rank of the coefficient matrix of a (1,1)-bihomogeneous form.

    The form is a product of one linear form per factor iff the rank is 1.
    """
    m, n = dims
    if form.nvars != m + n:
        raise ValueError("variable count does not match factor dimensions")
    coeff = ExactMatrix.zeros(m, n)
    ents = [[GaussianRational(0)] * n for _ in range(m)]
    for exps, c in form.terms.items():
        left = [i for i in range(m) if exps[i]]
        right = [j for j in range(n) if exps[m + j]]
        if (
            sum(exps[:m]) != 1
            or sum(exps[m:]) != 1
            or len(left) != 1
            or len(right) != 1
        ):
            raise ValueError("form is not bidegree (1,1)")
        ents[left[0]][right[0]] = c
    return rank_exact(ExactMatrix.from_rows(ents))


class SegreLocus:
    """A rank locus pulled back along the product-of-projective-spaces map.

    Coordinates r on the ambient space are replaced by products of per-factor
    coordinates, r_(i1..iF) = x^1_{i1} ... x^F_{iF}; membership, minors and a
    per-factor linearity probe are all evaluated through that substitution.
    """

    def __init__(self, p: Pencil, factor_dims, policy: TolerancePolicy | None = None):
        self.factor_dims = tuple(int(d) for d in factor_dims)
        if math.prod(self.factor_dims) != p.m:
            raise ValueError(
                f"pencil has {p.m} parameters, factors give {math.prod(self.factor_dims)}"
            )
        self.pencil = p
        self.policy = policy or TolerancePolicy.default()
        self.offsets = []
        acc = 0
        for d in self.factor_dims:
            self.offsets.append(acc)
            acc += d
        self.total_vars = acc

    # -- coordinate plumbing ---------------------------------------------

    def _digits(self, ambient_index: int):
        digits = []
        rem = ambient_index
        for d in reversed(self.factor_dims):
            digits.append(rem % d)
            rem //= d
        return list(reversed(digits))

    def segre_coords(self, points):
        """Ambient coordinates from per-factor coordinate vectors."""
        if len(points) != len(self.factor_dims):
            raise ValueError("one coordinate vector per factor required")
        vecs = []
        exact = True
        for pt, d in zip(points, self.factor_dims):
            coords, ex = _point_coords(pt, d)
            vecs.append(coords)
            exact = exact and ex
        m = self.pencil.m
        if exact:
            out = []
            for a in range(m):
                prod = GaussianRational(1)
                for f, digit in enumerate(self._digits(a)):
                    prod = prod * vecs[f][digit]
                out.append(prod)
            return out
        arrs = [
            np.asarray(
                [c.to_complex() if isinstance(c, GaussianRational) else complex(c) for c in v]
            )
            for v in vecs
        ]
        out = np.empty(m, dtype=complex)
        for a in range(m):
            val = 1.0 + 0j
            for f, digit in enumerate(self._digits(a)):
                val *= arrs[f][digit]
            out[a] = val
        return out

    def membership(self, points, k: int) -> bool:
        return membership(self.pencil, self.segre_coords(points), k, self.policy)

    def minors(self, k: int) -> list[HomogPoly]:
        """Ambient minors with the product substitution applied (exact only)."""
        ambient = sym_minors(self.pencil.symbolic(), k)
        return [self.pullback(g) for g in ambient]

    def pullback(self, poly: HomogPoly) -> HomogPoly:
        """Substitute r_(i1..iF) -> prod_f x^f_{i_f} into an ambient poly."""
        if poly.is_zero():
            return HomogPoly.zero(self.total_vars, 0)
        nf = len(self.factor_dims)
        terms = {}
        for exps, c in poly.terms.items():
            new = [0] * self.total_vars
            for a, e in enumerate(exps):
                if not e:
                    continue
                for f, digit in enumerate(self._digits(a)):
                    new[self.offsets[f] + digit] += e
            key = tuple(new)
            acc = terms.get(key)
            terms[key] = c if acc is None else acc + c
        return HomogPoly(self.total_vars, poly.degree * nf, terms)

    # -- effective pencil when all factors but one are frozen -------------

    def _effective_pencil(self, points, f: int) -> np.ndarray:
        pf = self.pencil.to_float()
        blocks = np.stack(pf.blocks)
        arrs = []
        for pt, d in zip(points, self.factor_dims):
            coords, _ = _point_coords(pt, d)
            arrs.append(
                np.asarray(
                    [
                        c.to_complex() if isinstance(c, GaussianRational) else complex(c)
                        for c in coords
                    ]
                )
            )
        d_f = self.factor_dims[f]
        eff = np.zeros((d_f, pf.n, pf.t), dtype=complex)
        for a in range(pf.m):
            digits = self._digits(a)
            weight = 1.0 + 0j
            for g, digit in enumerate(digits):
                if g != f:
                    weight *= arrs[g][digit]
            eff[digits[f]] += weight * blocks[a]
        return eff

    def probe(
        self, k: int, samples: int = 40, seed: int = 0
    ) -> ProbeReport:
        """Per-factor tangent probe of the product-space locus.

        At each sampled product point, tangent steps are taken inside one
        factor at a time; a union of products of linear subspaces survives
        every such step.
        """
        policy = self.policy
        rng = np.random.default_rng(seed)
        nf = len(self.factor_dims)
        passed = tested = 0
        flags: list[str] = []
        chart_counts: dict[int, int] = {}
        attempts = 0
        no_roots = 0
        while tested < samples and attempts < 6 * samples + 30:
            attempts += 1
            f = attempts % nf
            frozen = [
                random_complex_vector(d, rng) for d in self.factor_dims
            ]
            eff = Pencil(list(self._effective_pencil(frozen, f)))
            eff_num = _LocusNumerics(eff, k, policy)
            if eff_num.trivial:
                flags = ["all-space"]
                return ProbeReport("linear", None, 0, 0, seed, k, flags, {})
            u = random_complex_vector(self.factor_dims[f], rng)
            w = random_complex_vector(self.factor_dims[f], rng)
            roots = eff_num._line_roots(u, w, rng)
            members = []
            for cand in roots:
                x = eff_num.project_to_locus(np.asarray(cand, dtype=complex), iters=80)
                if x is not None and eff_num.is_member(x):
                    members.append(x)
            if not members:
                no_roots += 1
                continue
            for xf in members:
                if tested >= samples:
                    break
                point = list(frozen)
                point[f] = xf
                result, witness = self._probe_product_point(point, k)
                if result == "skip":
                    continue
                tested += 1
                chart_counts[f] = chart_counts.get(f, 0) + 1
                if result == "fail":
                    witness["factor"] = witness.get("factor", f)
                    return ProbeReport(
                        "nonlinear", witness, tested, passed, seed, k, flags, chart_counts
                    )
                passed += 1
        if tested == 0:
            if no_roots >= 20:
                return ProbeReport("linear", None, 0, 0, seed, k, ["empty-locus"], {})
            return ProbeReport("inconclusive", None, 0, 0, seed, k, flags, {})
        if passed >= MIN_LINEAR_PASSES:
            return ProbeReport("linear", None, tested, passed, seed, k, flags, chart_counts)
        return ProbeReport("inconclusive", None, tested, passed, seed, k, flags, chart_counts)

    def _probe_product_point(self, point, k: int):
        policy = self.policy
        fail_tol = 100.0 * policy.membership_tol
        pass_tol = 10.0 * policy.membership_tol
        any_dir = False
        for f in range(len(self.factor_dims)):
            eff = Pencil(list(self._effective_pencil(point, f)))
            num = _LocusNumerics(eff, k, policy)
            coords, _ = _point_coords(point[f], self.factor_dims[f])
            xf = np.asarray(
                [
                    c.to_complex() if isinstance(c, GaussianRational) else complex(c)
                    for c in coords
                ]
            )
            xf = xf / np.linalg.norm(xf)
            if num.residual(xf) > pass_tol:
                return "skip", None
            rank0 = num.jacobian_rank(xf)
            xp = xf + 1e-6 * random_complex_vector(len(xf), np.random.default_rng(rank0 + 11))
            xp /= np.linalg.norm(xp)
            if num.jacobian_rank(xp) != rank0:
                return "skip", None
            for v in num.tangent_directions(xf):
                any_dir = True
                for s in PROBE_STEPS:
                    y = xf + s * v
                    y /= np.linalg.norm(y)
                    res = num.residual(y)
                    if res <= pass_tol:
                        continue
                    if res > fail_tol:
                        yh = xf + (s / 2.0) * v
                        yh /= np.linalg.norm(yh)
                        if num.residual(yh) > fail_tol:
                            return "fail", {
                                "point": xf,
                                "direction": v,
                                "step": s,
                                "residual": float(res),
                                "factor": f,
                            }
                    return "skip", None
        return "pass", None


def segre_pullback(
    p: Pencil, factor_dims, policy: TolerancePolicy | None = None
) -> SegreLocus:
    """Handle for the product-space locus of a pencil over product parameters."""
    return SegreLocus(p, factor_dims, policy)
