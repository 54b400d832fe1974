"""Sparse homogeneous polynomials over Gaussian rationals.

Supports the symbolic side of rank-locus computations: determinants and
minors of pencils of linear forms, exact evaluation, exact division by a
linear form, and a numeric detector for "product of linear forms".

Terms are stored as a map from exponent tuples to nonzero
:class:`~qloci.exact.GaussianRational` coefficients.  The zero polynomial is
the empty map and is compatible with any degree.  Monomials are ordered
lexicographically with variable 0 most significant; printing follows that
order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exact import ExactMatrix, GaussianRational

MAX_NVARS = 8
MAX_DEGREE = 8

_ZERO = GaussianRational(0)
_ONE = GaussianRational(1)


def _default_names(nvars: int, prefix: str = "r") -> list[str]:
    return [f"{prefix}{i + 1}" for i in range(nvars)]


class HomogPoly:
    """Homogeneous polynomial with exact coefficients."""

    __slots__ = ("nvars", "degree", "terms")

    def __init__(self, nvars: int, degree: int, terms: dict | None = None):
        if nvars < 1 or nvars > MAX_NVARS:
            raise ValueError(f"nvars must be in 1..{MAX_NVARS}")
        if degree < 0 or degree > MAX_DEGREE:
            raise ValueError(f"degree must be in 0..{MAX_DEGREE}")
        clean: dict[tuple, GaussianRational] = {}
        for exps, coeff in (terms or {}).items():
            coeff = GaussianRational._coerce(coeff)
            if coeff.is_zero():
                continue
            exps = tuple(int(e) for e in exps)
            if len(exps) != nvars or any(e < 0 for e in exps):
                raise ValueError(f"bad exponent vector {exps}")
            if sum(exps) != degree:
                raise ValueError(
                    f"exponents {exps} sum to {sum(exps)}, expected degree {degree}"
                )
            clean[exps] = clean.get(exps, _ZERO) + coeff
            if clean[exps].is_zero():
                del clean[exps]
        self.nvars = nvars
        self.degree = degree
        self.terms = clean

    # -- constructors -----------------------------------------------------

    @classmethod
    def zero(cls, nvars: int, degree: int = 0) -> "HomogPoly":
        return cls(nvars, degree, {})

    @classmethod
    def monomial(cls, nvars: int, exps, coeff=1) -> "HomogPoly":
        exps = tuple(exps)
        return cls(nvars, sum(exps), {exps: coeff})

    @classmethod
    def variable(cls, nvars: int, index: int) -> "HomogPoly":
        exps = tuple(1 if i == index else 0 for i in range(nvars))
        return cls(nvars, 1, {exps: 1})

    @classmethod
    def constant(cls, nvars: int, value) -> "HomogPoly":
        return cls(nvars, 0, {tuple([0] * nvars): value})

    # -- predicates --------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __eq__(self, other) -> bool:
        if not isinstance(other, HomogPoly):
            return NotImplemented
        if self.nvars != other.nvars:
            return False
        if self.is_zero() and other.is_zero():
            return True
        return self.degree == other.degree and self.terms == other.terms

    def __hash__(self):
        return hash((self.nvars, self.degree, frozenset(self.terms.items())))

    # -- arithmetic ----------------------------------------------------------

    def _compatible(self, other: "HomogPoly"):
        if self.nvars != other.nvars:
            raise ValueError("nvars mismatch")

    def __add__(self, other: "HomogPoly") -> "HomogPoly":
        self._compatible(other)
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        if self.degree != other.degree:
            raise ValueError(
                f"cannot add degree {self.degree} and degree {other.degree}"
            )
        terms = dict(self.terms)
        for e, c in other.terms.items():
            acc = terms.get(e, _ZERO) + c
            if acc.is_zero():
                terms.pop(e, None)
            else:
                terms[e] = acc
        return HomogPoly(self.nvars, self.degree, terms)

    def __neg__(self) -> "HomogPoly":
        return HomogPoly(
            self.nvars, self.degree, {e: -c for e, c in self.terms.items()}
        )

    def __sub__(self, other: "HomogPoly") -> "HomogPoly":
        return self + (-other)

    def scale(self, c) -> "HomogPoly":
        c = GaussianRational._coerce(c)
        if c.is_zero():
            return HomogPoly.zero(self.nvars, self.degree)
        return HomogPoly(
            self.nvars, self.degree, {e: c * v for e, v in self.terms.items()}
        )

    def __mul__(self, other: "HomogPoly") -> "HomogPoly":
        self._compatible(other)
        if self.is_zero() or other.is_zero():
            return HomogPoly.zero(self.nvars, 0)
        out: dict[tuple, GaussianRational] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                acc = out.get(e, _ZERO) + c1 * c2
                if acc.is_zero():
                    out.pop(e, None)
                else:
                    out[e] = acc
        return HomogPoly(self.nvars, self.degree + other.degree, out)

    def __pow__(self, n: int) -> "HomogPoly":
        if n < 0:
            raise ValueError("negative power")
        result = HomogPoly.constant(self.nvars, 1)
        for _ in range(n):
            result = result * self
        return result

    # -- evaluation -----------------------------------------------------------

    def evaluate(self, point):
        """Evaluate at a point; exact in, exact out, float in, float out."""
        if len(point) != self.nvars:
            raise ValueError(
                f"point has length {len(point)}, expected {self.nvars}"
            )
        exact = all(
            isinstance(x, (GaussianRational, int)) or type(x).__name__ == "Fraction"
            for x in point
        )
        if exact:
            pt = [GaussianRational._coerce(x) for x in point]
            acc = _ZERO
            for exps, coeff in self.terms.items():
                term = coeff
                for x, e in zip(pt, exps):
                    if e:
                        term = term * x**e
                acc = acc + term
            return acc
        pt = np.asarray([complex(x) for x in point])
        acc = 0j
        for exps, coeff in self.terms.items():
            term = coeff.to_complex()
            for x, e in zip(pt, exps):
                if e:
                    term *= x**e
            acc += term
        return acc

    def derivative(self, var: int) -> "HomogPoly":
        if self.is_zero() or self.degree == 0:
            return HomogPoly.zero(self.nvars, max(self.degree - 1, 0))
        out: dict[tuple, GaussianRational] = {}
        for exps, coeff in self.terms.items():
            e = exps[var]
            if e == 0:
                continue
            new = list(exps)
            new[var] = e - 1
            key = tuple(new)
            acc = out.get(key, _ZERO) + coeff * e
            if acc.is_zero():
                out.pop(key, None)
            else:
                out[key] = acc
        return HomogPoly(self.nvars, self.degree - 1, out)

    def float_terms(self) -> dict[tuple, complex]:
        return {e: c.to_complex() for e, c in self.terms.items()}

    # -- printing / serialization ------------------------------------------

    def to_string(self, var_names: list[str] | None = None) -> str:
        """Canonical text, lexicographic term order, e.g. ``2*r1^2*r2``."""
        if self.is_zero():
            return "0"
        names = var_names or _default_names(self.nvars)
        parts = []
        for exps in sorted(self.terms, reverse=True):
            coeff = self.terms[exps]
            factors = [
                (names[i] if e == 1 else f"{names[i]}^{e}")
                for i, e in enumerate(exps)
                if e
            ]
            if not factors:
                parts.append(str(coeff))
                continue
            mono = "*".join(factors)
            if coeff == GaussianRational(1):
                parts.append(mono)
            elif coeff == GaussianRational(-1):
                parts.append(f"-{mono}")
            else:
                cs = str(coeff)
                if "+" in cs[1:] or "-" in cs[1:]:
                    cs = f"({cs})"
                parts.append(f"{cs}*{mono}")
        text = " + ".join(parts)
        return text.replace("+ -", "- ")

    __str__ = to_string

    def __repr__(self):
        return f"HomogPoly({self.to_string()})"

    def to_json_dict(self) -> dict:
        return {
            "nvars": self.nvars,
            "degree": self.degree,
            "terms": [
                {"exponents": list(e), "coeff": str(c)}
                for e, c in sorted(self.terms.items(), reverse=True)
            ],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "HomogPoly":
        terms = {
            tuple(t["exponents"]): GaussianRational.from_string(t["coeff"])
            for t in data["terms"]
        }
        return cls(data["nvars"], data["degree"], terms)


class LinearForm:
    """A nonzero homogeneous linear form, stored as its coefficient vector.

    Scaling is preserved as given; :meth:`normalized` rescales so the first
    nonzero coefficient is one, which is the canonical representative used
    when comparing factor lists.
    """

    __slots__ = ("coefficients",)

    def __init__(self, coefficients):
        coeffs = [GaussianRational._coerce(c) for c in coefficients]
        if all(c.is_zero() for c in coeffs):
            raise ValueError("linear form must be nonzero")
        self.coefficients = coeffs

    @property
    def nvars(self) -> int:
        return len(self.coefficients)

    def normalized(self) -> "LinearForm":
        lead = next(c for c in self.coefficients if not c.is_zero())
        return LinearForm([c / lead for c in self.coefficients])

    def as_poly(self) -> HomogPoly:
        n = self.nvars
        terms = {}
        for i, c in enumerate(self.coefficients):
            if not c.is_zero():
                terms[tuple(1 if j == i else 0 for j in range(n))] = c
        return HomogPoly(n, 1, terms)

    def evaluate(self, point):
        return self.as_poly().evaluate(point)

    def __eq__(self, other):
        if not isinstance(other, LinearForm):
            return NotImplemented
        return self.coefficients == other.coefficients

    def __hash__(self):
        return hash(tuple(self.coefficients))

    def __repr__(self):
        return f"LinearForm({self.as_poly().to_string()})"


@dataclass(frozen=True)
class SymbolicPencil:
    """An n x t grid of linear forms (or zeros) in m parameters."""

    m: int
    n: int
    t: int
    entry_forms: tuple  # n rows of t entries, each HomogPoly (degree 1) or None

    @classmethod
    def from_grid(cls, m: int, grid) -> "SymbolicPencil":
        n = len(grid)
        t = len(grid[0]) if n else 0
        rows = []
        for row in grid:
            if len(row) != t:
                raise ValueError("ragged pencil grid")
            ents = []
            for entry in row:
                if entry is None or (isinstance(entry, HomogPoly) and entry.is_zero()):
                    ents.append(None)
                    continue
                if isinstance(entry, LinearForm):
                    entry = entry.as_poly()
                if entry.nvars != m or entry.degree != 1:
                    raise ValueError("pencil entries must be linear in m variables")
                ents.append(entry)
            rows.append(tuple(ents))
        return cls(m, n, t, tuple(rows))

    def entry(self, i: int, j: int) -> HomogPoly:
        e = self.entry_forms[i][j]
        return e if e is not None else HomogPoly.zero(self.m, 1)

    def grid(self) -> list[list[HomogPoly]]:
        return [[self.entry(i, j) for j in range(self.t)] for i in range(self.n)]


def det_poly_matrix(grid: list[list[HomogPoly]]) -> HomogPoly:
    """Determinant of a square grid of polynomials by cofactor expansion.

    Expands along the row with the most zero entries at each level; term maps
    accumulate exactly.
    """
    size = len(grid)
    if any(len(row) != size for row in grid):
        raise ValueError("determinant needs a square grid")
    nvars = None
    for row in grid:
        for p in row:
            if p is not None and not p.is_zero():
                nvars = p.nvars
                break
        if nvars:
            break
    if nvars is None:
        return HomogPoly.zero(1, 0)

    def rec(rows, cols):
        if len(rows) == 1:
            p = grid[rows[0]][cols[0]]
            return p if p is not None else HomogPoly.zero(nvars, 1)
        best_i = min(
            range(len(rows)),
            key=lambda i: sum(
                0 if (grid[rows[i]][c] is None or grid[rows[i]][c].is_zero()) else 1
                for c in cols
            ),
        )
        i = rows[best_i]
        rest = rows[:best_i] + rows[best_i + 1 :]
        acc = None
        for jpos, j in enumerate(cols):
            p = grid[i][j]
            if p is None or p.is_zero():
                continue
            sub = rec(rest, cols[:jpos] + cols[jpos + 1 :])
            if sub.is_zero():
                continue
            term = p * sub
            if (best_i + jpos) % 2:
                term = -term
            acc = term if acc is None else acc + term
        if acc is None:
            deg = sum(
                max(
                    (g.degree for g in row if g is not None and not g.is_zero()),
                    default=1,
                )
                for row in (grid[r] for r in rows)
            )
            return HomogPoly.zero(nvars, min(deg, MAX_DEGREE))
        return acc

    return rec(list(range(size)), list(range(size)))


def sym_det(p: SymbolicPencil) -> HomogPoly:
    """Exact determinant polynomial of a square symbolic pencil."""
    if p.n != p.t:
        raise ValueError(f"pencil is {p.n}x{p.t}, not square")
    return det_poly_matrix(p.grid())


def sym_minors(p: SymbolicPencil, k: int) -> list[HomogPoly]:
    """All (k+1) x (k+1) minors, aligned with ``minor_index_sets`` order."""
    from .exact import minor_index_sets

    size = k + 1
    if size > min(p.n, p.t):
        raise ValueError(f"rank bound {k} out of range for {p.n}x{p.t} pencil")
    grid = p.grid()
    out = []
    for row_idx, col_idx in minor_index_sets(p.n, p.t, size):
        sub = [[grid[i][j] for j in col_idx] for i in row_idx]
        out.append(det_poly_matrix(sub))
    return out


def divide_linear(poly: HomogPoly, lin: LinearForm) -> HomogPoly | None:
    """Exact quotient ``q`` with ``q * lin == poly``, or None if indivisible.

    Leading-term elimination in lexicographic order; since the divisor is
    linear the leading monomial strictly decreases, so this terminates.
    """
    if poly.is_zero():
        raise ValueError("divide_linear expects a nonzero polynomial")
    if lin.nvars != poly.nvars:
        raise ValueError("variable-count mismatch")
    if poly.degree < 1:
        return None
    lead_var = next(
        i for i, c in enumerate(lin.coefficients) if not c.is_zero()
    )
    lead_coeff = lin.coefficients[lead_var]
    lin_poly = lin.as_poly()
    quotient: dict[tuple, GaussianRational] = {}
    rem = poly
    while not rem.is_zero():
        lt = max(rem.terms)
        if lt[lead_var] == 0:
            return None
        qexp = list(lt)
        qexp[lead_var] -= 1
        qexp = tuple(qexp)
        qc = rem.terms[lt] / lead_coeff
        quotient[qexp] = quotient.get(qexp, _ZERO) + qc
        rem = rem - HomogPoly.monomial(poly.nvars, qexp, qc) * lin_poly
    return HomogPoly(poly.nvars, poly.degree - 1, quotient)


# ---------------------------------------------------------------------------
# numeric product-of-linear-forms detection
# ---------------------------------------------------------------------------


@dataclass
class FactorScan:
    """Outcome of :func:`linear_factor_scan`.

    verdict is ``"all-linear"``, ``"nonlinear"`` or ``"inconclusive"``.  For
    all-linear the hyperplane coefficient vectors (one per factor, repeated
    with multiplicity) and the overall constant are reported; for nonlinear a
    witness records a point of the zero locus whose tangent hyperplane does
    not stay inside the locus.
    """

    verdict: str
    factors: list = field(default_factory=list)
    constant: complex | None = None
    residual: float = 0.0
    witness: dict | None = None
    seed: int = 0


def _poly_eval_float(fterms: dict, x: np.ndarray) -> complex:
    acc = 0j
    for exps, c in fterms.items():
        term = c
        for xi, e in zip(x, exps):
            if e:
                term *= xi**e
        acc += term
    return acc


def _poly_grad_float(fterms: dict, x: np.ndarray) -> np.ndarray:
    n = len(x)
    g = np.zeros(n, dtype=complex)
    for exps, c in fterms.items():
        for i in range(n):
            e = exps[i]
            if e == 0:
                continue
            term = c * e
            for j in range(n):
                ej = exps[j] - (1 if j == i else 0)
                if ej:
                    term *= x[j] ** ej
            g[i] += term
    return g


def _phase_canonical(v: np.ndarray) -> np.ndarray:
    v = v / np.linalg.norm(v)
    i = int(np.argmax(np.abs(v)))
    phase = v[i] / abs(v[i])
    return v / phase


def _restrict_to_line(fterms: dict, degree: int, u: np.ndarray, w: np.ndarray):
    """Coefficients of t -> f(u + t w), highest degree first."""
    nodes = np.exp(2j * np.pi * np.arange(degree + 1) / (degree + 1))
    vals = np.array([_poly_eval_float(fterms, u + t * w) for t in nodes])
    vand = np.vander(nodes, degree + 1, increasing=False)
    return np.linalg.solve(vand, vals)


def linear_factor_scan(poly: HomogPoly, tol: float = 1e-8, seed: int = 0) -> FactorScan:
    """Decide numerically whether ``poly`` is a product of linear forms.

    Root points are harvested on random 2-dimensional slices; the gradient at
    each root proposes a hyperplane factor, which must contain the whole
    tangent hyperplane inside the zero locus.  Candidates from at least three
    slices are clustered and refined by least squares, and the product of the
    refined factors is certified against the polynomial at 100 random unit
    points.
    """
    if poly.nvars > 4:
        raise ValueError("linear_factor_scan supports at most 4 variables")
    if poly.is_zero():
        raise ValueError("zero polynomial")
    d = poly.degree
    n = poly.nvars
    rng = np.random.default_rng(seed)
    scale = max(abs(c.to_complex()) for c in poly.terms.values())
    fterms = {e: c.to_complex() / scale for e, c in poly.terms.items()}

    if d == 0:
        return FactorScan("all-linear", [], scale * next(iter(fterms.values())), 0.0, None, seed)

    fail_tol = 100.0 * tol
    pass_tol = 10.0 * tol

    def tangent_containment(x):
        """Max |f| over the tangent hyperplane at locus point x."""
        g = _poly_grad_float(fterms, x)
        gn = np.linalg.norm(g)
        if gn < 1e-7:
            return None, None, None  # singular point, unusable
        a = g / gn
        _, _, vh = np.linalg.svd(a.reshape(1, -1))
        basis = vh[1:].conj().T  # columns span {y : a . y = 0}
        worst, worst_y = 0.0, None
        for _ in range(max(8, 3 * d)):
            y = basis @ (rng.standard_normal(n - 1) + 1j * rng.standard_normal(n - 1))
            y /= np.linalg.norm(y)
            r = abs(_poly_eval_float(fterms, y))
            if r > worst:
                worst, worst_y = r, y
        return a, worst, worst_y

    points, normals, slice_ids = [], [], []
    n_slices = max(4, 2 * d)
    for s_id in range(n_slices):
        u = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        w = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        u /= np.linalg.norm(u)
        w /= np.linalg.norm(w)
        coeffs = _restrict_to_line(fterms, d, u, w)
        if np.max(np.abs(coeffs)) < 1e-12:
            continue
        lead = np.nonzero(np.abs(coeffs) > 1e-10 * np.max(np.abs(coeffs)))[0]
        coeffs = coeffs[lead[0] :]
        if len(coeffs) < 2:
            continue
        for t0 in np.roots(coeffs):
            x = u + t0 * w
            x /= np.linalg.norm(x)
            if abs(_poly_eval_float(fterms, x)) > 1e-6:
                continue  # inaccurate root
            a, worst, worst_y = tangent_containment(x)
            if a is None:
                continue
            if worst > fail_tol:
                # re-check with fresh directions before declaring a witness
                a2, worst2, y2 = tangent_containment(x)
                if a2 is not None and worst2 > fail_tol:
                    witness = {
                        "point": x,
                        "tangent_point": y2,
                        "residual": float(worst2),
                    }
                    return FactorScan("nonlinear", [], None, float(worst2), witness, seed)
                continue
            if worst <= pass_tol:
                points.append(x)
                normals.append(_phase_canonical(a))
                slice_ids.append(s_id)

    if not points:
        return FactorScan("inconclusive", [], None, 0.0, None, seed)

    # cluster hyperplane candidates projectively
    reps: list[np.ndarray] = []
    members: list[list[int]] = []
    for idx, a in enumerate(normals):
        for c_id, rep in enumerate(reps):
            if np.sqrt(max(0.0, 1.0 - abs(np.vdot(rep, a)) ** 2)) < 1e-4:
                members[c_id].append(idx)
                break
        else:
            reps.append(a)
            members.append([idx])

    # multiplicity estimate: typical root count per slice per cluster
    mults = []
    for c_id in range(len(reps)):
        per_slice = {}
        for idx in members[c_id]:
            per_slice[slice_ids[idx]] = per_slice.get(slice_ids[idx], 0) + 1
        counts = sorted(per_slice.values())
        mults.append(counts[len(counts) // 2] if counts else 0)
    if sum(mults) != d:
        return FactorScan("inconclusive", [], None, 0.0, None, seed)

    # least-squares refinement: cluster points satisfy a . x = 0
    factors = []
    for c_id, rep in enumerate(reps):
        pts = np.array([points[i] for i in members[c_id]])
        if pts.shape[0] >= n - 1:
            _, _, vh = np.linalg.svd(pts)
            refined = _phase_canonical(vh[-1].conj())
        else:
            refined = rep
        factors.extend([refined] * mults[c_id])

    # fit the constant and certify at 100 random unit points
    test_pts = [
        (lambda v: v / np.linalg.norm(v))(
            rng.standard_normal(n) + 1j * rng.standard_normal(n)
        )
        for _ in range(100)
    ]
    prods = np.array(
        [np.prod([np.dot(a, x) for a in factors]) for x in test_pts]
    )
    vals = np.array([_poly_eval_float(fterms, x) for x in test_pts])
    denom = np.vdot(prods, prods).real
    if denom < 1e-30:
        return FactorScan("inconclusive", [], None, 0.0, None, seed)
    c = complex(np.vdot(prods, vals) / denom)
    residual = float(np.max(np.abs(vals - c * prods)))
    if residual <= tol:
        return FactorScan(
            "all-linear", factors, c * scale, residual, None, seed
        )
    return FactorScan("inconclusive", factors, c * scale, residual, None, seed)


# ---------------------------------------------------------------------------
# affine-chart helpers
# ---------------------------------------------------------------------------


def homogenize_affine(poly: HomogPoly, target_degree: int, hvar: int) -> HomogPoly:
    """Raise every term to ``target_degree`` with powers of variable ``hvar``.

    The input is interpreted as an affine polynomial (sum of homogeneous
    pieces realized at ``hvar == 1``); here it must already be homogeneous,
    so this just multiplies by a power of the homogenizer.
    """
    if poly.is_zero():
        return HomogPoly.zero(poly.nvars, target_degree)
    gap = target_degree - poly.degree
    if gap < 0:
        raise ValueError("target degree below polynomial degree")
    if gap == 0:
        return poly
    terms = {}
    for exps, c in poly.terms.items():
        e = list(exps)
        e[hvar] += gap
        terms[tuple(e)] = c
    return HomogPoly(poly.nvars, target_degree, terms)


def affine_text(poly: HomogPoly, var_names: list[str], hvar: int) -> str:
    """Print with the homogenizer variable substituted by 1."""
    names = list(var_names)
    names[hvar] = ""
    parts = []
    for exps in sorted(poly.terms, reverse=True):
        coeff = poly.terms[exps]
        factors = [
            (names[i] if e == 1 else f"{names[i]}^{e}")
            for i, e in enumerate(exps)
            if e and i != hvar
        ]
        if not factors:
            parts.append(str(coeff))
            continue
        mono = "*".join(factors)
        if coeff == GaussianRational(1):
            parts.append(mono)
        elif coeff == GaussianRational(-1):
            parts.append(f"-{mono}")
        else:
            cs = str(coeff)
            if "+" in cs[1:] or "-" in cs[1:]:
                cs = f"({cs})"
            parts.append(f"{cs}*{mono}")
    if not parts:
        return "0"
    return " + ".join(parts).replace("+ -", "- ")
