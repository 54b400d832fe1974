"""Exact complex-rational scalars and dense exact linear algebra.

Everything in this module is zero-tolerance: scalars are Gaussian rationals
(rational real and imaginary parts, always reduced), matrices are dense and
small, and rank/determinant are computed by exact elimination over the field.
All values are treated as immutable after construction; operations are pure
functions.
"""

from __future__ import annotations

import itertools
import re as _re
from fractions import Fraction


class GaussianRational:
    """A complex number with exact rational real and imaginary parts.

    ``Fraction`` keeps both parts in lowest terms with positive denominators,
    so equality is structural and arithmetic never rounds.
    """

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        object.__setattr__(self, "re", Fraction(re))
        object.__setattr__(self, "im", Fraction(im))

    def __setattr__(self, name, value):
        raise AttributeError("GaussianRational is immutable")

    # -- construction / conversion ------------------------------------

    @staticmethod
    def _coerce(value) -> "GaussianRational":
        if isinstance(value, GaussianRational):
            return value
        if isinstance(value, (int, Fraction)):
            return GaussianRational(value)
        if isinstance(value, str):
            return GaussianRational.from_string(value)
        raise TypeError(f"cannot coerce {type(value).__name__} to GaussianRational")

    @classmethod
    def from_string(cls, text: str) -> "GaussianRational":
        """Parse the serialized form ``a/b+c/di`` with zero parts omitted.

        Accepts e.g. ``"3"``, ``"-1/2"``, ``"i"``, ``"-i"``, ``"1/2i"``,
        ``"-1+2i"``, ``"1-1/3i"``, ``"0"``.
        """
        s = text.strip().replace(" ", "")
        if not s:
            raise ValueError("empty Gaussian-rational literal")
        frac = r"[0-9]+(?:/[0-9]+)?"
        m = _re.fullmatch(rf"([+-]?{frac})", s)
        if m:
            return cls(Fraction(m.group(1)))
        m = _re.fullmatch(rf"([+-]?)({frac})?i", s)
        if m:
            coeff = Fraction(m.group(2)) if m.group(2) else Fraction(1)
            return cls(0, -coeff if m.group(1) == "-" else coeff)
        m = _re.fullmatch(rf"([+-]?{frac})([+-])({frac})?i", s)
        if m:
            coeff = Fraction(m.group(3)) if m.group(3) else Fraction(1)
            if m.group(2) == "-":
                coeff = -coeff
            return cls(Fraction(m.group(1)), coeff)
        raise ValueError(f"not a Gaussian-rational literal: {text!r}")

    def __str__(self) -> str:
        if self.im == 0:
            return str(self.re)
        if self.im == 1:
            im_part = "i"
        elif self.im == -1:
            im_part = "-i"
        else:
            im_part = f"{self.im}i"
        if self.re == 0:
            return im_part
        sign = "+" if self.im > 0 else ""
        return f"{self.re}{sign}{im_part}"

    def __repr__(self) -> str:
        return f"GaussianRational({self.re!r}, {self.im!r})"

    def to_complex(self) -> complex:
        return float(self.re) + 1j * float(self.im)

    __complex__ = to_complex

    # -- arithmetic ----------------------------------------------------

    def __add__(self, other):
        o = self._coerce(other)
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __sub__(self, other):
        o = self._coerce(other)
        return GaussianRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        return GaussianRational(
            self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        n2 = o.re * o.re + o.im * o.im
        if n2 == 0:
            raise ZeroDivisionError("division by zero GaussianRational")
        return GaussianRational(
            (self.re * o.re + self.im * o.im) / n2,
            (self.im * o.re - self.re * o.im) / n2,
        )

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def __pow__(self, exponent: int):
        if not isinstance(exponent, int) or exponent < 0:
            raise ValueError("exponent must be a non-negative integer")
        result = GaussianRational(1)
        base = self
        n = exponent
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def abs2(self) -> Fraction:
        """|z|^2 as an exact Fraction."""
        return self.re * self.re + self.im * self.im

    # -- predicates ------------------------------------------------------

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def __bool__(self) -> bool:
        return not self.is_zero()

    def __eq__(self, other) -> bool:
        try:
            o = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))


GR = GaussianRational
_ZERO = GaussianRational(0)
_ONE = GaussianRational(1)


class ExactMatrix:
    """Dense row-major matrix of :class:`GaussianRational` entries."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, rows: int, cols: int, entries):
        entries = [GaussianRational._coerce(e) for e in entries]
        if len(entries) != rows * cols:
            raise ValueError(f"expected {rows * cols} entries, got {len(entries)}")
        self.rows = rows
        self.cols = cols
        self.entries = entries

    # -- constructors ----------------------------------------------------

    @classmethod
    def from_rows(cls, nested) -> "ExactMatrix":
        rows = len(nested)
        cols = len(nested[0]) if rows else 0
        if any(len(r) != cols for r in nested):
            raise ValueError("ragged rows")
        return cls(rows, cols, [e for row in nested for e in row])

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "ExactMatrix":
        return cls(rows, cols, [_ZERO] * (rows * cols))

    @classmethod
    def identity(cls, n: int) -> "ExactMatrix":
        m = [[_ONE if i == j else _ZERO for j in range(n)] for i in range(n)]
        return cls.from_rows(m)

    @classmethod
    def column(cls, values) -> "ExactMatrix":
        return cls(len(values), 1, list(values))

    # -- access ----------------------------------------------------------

    def get(self, i: int, j: int) -> GaussianRational:
        return self.entries[i * self.cols + j]

    def row(self, i: int):
        return self.entries[i * self.cols : (i + 1) * self.cols]

    def col(self, j: int):
        return [self.entries[i * self.cols + j] for i in range(self.rows)]

    def submatrix(self, row_idx, col_idx) -> "ExactMatrix":
        ents = [self.get(i, j) for i in row_idx for j in col_idx]
        return ExactMatrix(len(row_idx), len(col_idx), ents)

    # -- algebra -----------------------------------------------------------

    def __add__(self, other: "ExactMatrix") -> "ExactMatrix":
        self._check_shape(other)
        return ExactMatrix(
            self.rows, self.cols, [a + b for a, b in zip(self.entries, other.entries)]
        )

    def __sub__(self, other: "ExactMatrix") -> "ExactMatrix":
        self._check_shape(other)
        return ExactMatrix(
            self.rows, self.cols, [a - b for a, b in zip(self.entries, other.entries)]
        )

    def __neg__(self) -> "ExactMatrix":
        return ExactMatrix(self.rows, self.cols, [-e for e in self.entries])

    def scale(self, c) -> "ExactMatrix":
        c = GaussianRational._coerce(c)
        return ExactMatrix(self.rows, self.cols, [c * e for e in self.entries])

    def __matmul__(self, other: "ExactMatrix") -> "ExactMatrix":
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        out = []
        for i in range(self.rows):
            ri = self.row(i)
            for j in range(other.cols):
                acc = _ZERO
                for k in range(self.cols):
                    a = ri[k]
                    if a.is_zero():
                        continue
                    acc = acc + a * other.get(k, j)
                out.append(acc)
        return ExactMatrix(self.rows, other.cols, out)

    def scale_columns(self, factors) -> "ExactMatrix":
        """Multiply column j by factors[j] (used for diagonal weighting)."""
        if len(factors) != self.cols:
            raise ValueError("one factor per column required")
        facs = [GaussianRational._coerce(f) for f in factors]
        ents = [
            self.get(i, j) * facs[j] for i in range(self.rows) for j in range(self.cols)
        ]
        return ExactMatrix(self.rows, self.cols, ents)

    def transpose(self) -> "ExactMatrix":
        ents = [self.get(i, j) for j in range(self.cols) for i in range(self.rows)]
        return ExactMatrix(self.cols, self.rows, ents)

    def conj(self) -> "ExactMatrix":
        return ExactMatrix(self.rows, self.cols, [e.conjugate() for e in self.entries])

    def trace(self) -> GaussianRational:
        if self.rows != self.cols:
            raise ValueError("trace of a non-square matrix")
        acc = _ZERO
        for i in range(self.rows):
            acc = acc + self.get(i, i)
        return acc

    def is_zero(self) -> bool:
        return all(e.is_zero() for e in self.entries)

    # -- misc ---------------------------------------------------------------

    @property
    def shape(self):
        return (self.rows, self.cols)

    def _check_shape(self, other):
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")

    def __eq__(self, other) -> bool:
        if not isinstance(other, ExactMatrix):
            return NotImplemented
        return self.shape == other.shape and self.entries == other.entries

    def __repr__(self) -> str:
        body = "; ".join(
            " ".join(str(self.get(i, j)) for j in range(self.cols))
            for i in range(self.rows)
        )
        return f"ExactMatrix[{self.rows}x{self.cols}: {body}]"

    def to_numpy(self):
        import numpy as np

        out = np.empty((self.rows, self.cols), dtype=complex)
        for i in range(self.rows):
            for j in range(self.cols):
                out[i, j] = self.get(i, j).to_complex()
        return out

    def to_json_dict(self) -> dict:
        return {
            "rows": self.rows,
            "cols": self.cols,
            "entries": [str(e) for e in self.entries],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "ExactMatrix":
        return cls(
            data["rows"],
            data["cols"],
            [GaussianRational.from_string(e) for e in data["entries"]],
        )


def dagger(m: ExactMatrix) -> ExactMatrix:
    """Conjugate transpose."""
    return m.conj().transpose()


def _eliminate(m: ExactMatrix):
    """Row-reduce a copy over the Gaussian-rational field.

    Returns ``(rank, det)`` where ``det`` is meaningful for square input
    (zero when rank-deficient).  Fractions auto-reduce after every step, so
    intermediate growth stays tame at this problem's sizes.
    """
    rows = [list(m.row(i)) for i in range(m.rows)]
    nr, nc = m.rows, m.cols
    rank = 0
    det = _ONE
    sign = 1
    for col in range(nc):
        pivot = None
        for i in range(rank, nr):
            if not rows[i][col].is_zero():
                pivot = i
                break
        if pivot is None:
            continue
        if pivot != rank:
            rows[rank], rows[pivot] = rows[pivot], rows[rank]
            sign = -sign
        p = rows[rank][col]
        det = det * p
        for i in range(rank + 1, nr):
            f = rows[i][col]
            if f.is_zero():
                continue
            f = f / p
            for j in range(col, nc):
                rows[i][j] = rows[i][j] - f * rows[rank][j]
        rank += 1
        if rank == nr:
            break
    if nr == nc and rank == nr:
        if sign < 0:
            det = -det
    else:
        det = _ZERO
    return rank, det


def rank_exact(m: ExactMatrix) -> int:
    """Exact rank over the complex-rational field."""
    rank, _ = _eliminate(m)
    return rank


def det_exact(m: ExactMatrix) -> GaussianRational:
    """Exact determinant of a square matrix."""
    if m.rows != m.cols:
        raise ValueError(f"determinant of non-square {m.shape} matrix")
    _, det = _eliminate(m)
    return det


def kron(a: ExactMatrix, b: ExactMatrix) -> ExactMatrix:
    """Kronecker product, first factor indexing the outer blocks."""
    rows = a.rows * b.rows
    cols = a.cols * b.cols
    out = [_ZERO] * (rows * cols)
    for i in range(a.rows):
        for j in range(a.cols):
            aij = a.get(i, j)
            if aij.is_zero():
                continue
            for k in range(b.rows):
                base = (i * b.rows + k) * cols + j * b.cols
                for l in range(b.cols):
                    out[base + l] = aij * b.get(k, l)
    return ExactMatrix(rows, cols, out)


def minor_index_sets(rows: int, cols: int, k: int):
    """All k-row subsets crossed with all k-column subsets, lexicographic.

    These index the k x k submatrices whose determinants generate a rank
    locus.
    """
    if k < 1 or k > min(rows, cols):
        raise ValueError(f"minor size {k} out of range for {rows}x{cols}")
    return [
        (r, c)
        for r in itertools.combinations(range(rows), k)
        for c in itertools.combinations(range(cols), k)
    ]
