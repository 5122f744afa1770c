"""Exact integer and rational linear algebra.

Matrices are nested sequences of ``int`` (rows).  Functions that can receive
a matrix with zero rows accept an explicit ``ncols``.  Nothing here touches
floating point.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence

from .errors import ZPLError

Rat = Fraction
IntVector = tuple[int, ...]
IntMatrix = tuple[IntVector, ...]


class _Infinite:
    """Sentinel for the index of a non-injective or rank-dropping map."""

    _instance: "_Infinite | None" = None

    def __new__(cls) -> "_Infinite":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "INFINITE"

    def __str__(self) -> str:
        return "infinite"

    def __reduce__(self):
        return (_Infinite, ())


INFINITE = _Infinite()


# ---------------------------------------------------------------------------
# small helpers


def as_matrix(m: Iterable[Iterable[int]]) -> IntMatrix:
    rows = tuple(tuple(int(x) for x in row) for row in m)
    if rows and len({len(r) for r in rows}) != 1:
        raise ZPLError("shape-mismatch", "ragged matrix")
    return rows


def ncols_of(m: Sequence[Sequence], ncols: int | None = None) -> int:
    if m:
        return len(m[0])
    if ncols is None:
        raise ZPLError("shape-mismatch", "cannot infer column count of an empty matrix")
    return ncols


def identity(n: int) -> IntMatrix:
    return tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n))


def transpose(m: Sequence[Sequence], ncols: int | None = None) -> tuple:
    c = ncols_of(m, ncols)
    return tuple(tuple(row[j] for row in m) for j in range(c))


def mat_mul(a: Sequence[Sequence], b: Sequence[Sequence], inner: int | None = None) -> tuple:
    """Product of two matrices; works for ints and Fractions alike."""
    k = ncols_of(a, inner)
    if len(b) != k:
        raise ZPLError("shape-mismatch", f"cannot multiply {len(a)}x{k} by {len(b)}x?")
    if not b:
        raise ZPLError("shape-mismatch", "inner dimension zero; pass explicit shapes")
    bt = transpose(b)
    return tuple(tuple(sum(x * y for x, y in zip(row, col)) for col in bt) for row in a)


def mat_vec(a: Sequence[Sequence], v: Sequence) -> tuple:
    if a and len(a[0]) != len(v):
        raise ZPLError("shape-mismatch", f"matrix with {len(a[0])} columns applied to length {len(v)}")
    return tuple(sum(x * y for x, y in zip(row, v)) for row in a)


def dot(u: Sequence, v: Sequence):
    if len(u) != len(v):
        raise ZPLError("shape-mismatch", f"pairing of lengths {len(u)} and {len(v)}")
    return sum(x * y for x, y in zip(u, v))


def vec_gcd(v: Iterable[int]) -> int:
    g = 0
    for x in v:
        g = gcd(g, int(x))
    return g


def primitive(v: Sequence) -> IntVector:
    """Primitive integer vector on the ray through a nonzero rational vector."""
    fr = [Fraction(x) for x in v]
    den = 1
    for x in fr:
        den = den * x.denominator // gcd(den, x.denominator)
    ints = [int(x * den) for x in fr]
    g = vec_gcd(ints)
    if g == 0:
        raise ZPLError("zero-vector", "zero vector has no primitive representative")
    return tuple(x // g for x in ints)


def is_primitive(v: Sequence[int]) -> bool:
    return vec_gcd(v) == 1


def determinant(m: Sequence[Sequence[int]]) -> int:
    """Integer determinant by fraction-free (Bareiss) elimination."""
    n = len(m)
    if n == 0:
        return 1
    if any(len(r) != n for r in m):
        raise ZPLError("shape-mismatch", "determinant of a non-square matrix")
    a = [list(r) for r in m]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


# ---------------------------------------------------------------------------
# rational elimination


def rref(m: Sequence[Sequence], ncols: int | None = None) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form over Q and the pivot columns."""
    c = ncols_of(m, ncols)
    a = [[Fraction(x) for x in row] for row in m]
    pivots: list[int] = []
    r = 0
    for j in range(c):
        p = next((i for i in range(r, len(a)) if a[i][j] != 0), None)
        if p is None:
            continue
        a[r], a[p] = a[p], a[r]
        inv = 1 / a[r][j]
        a[r] = [x * inv for x in a[r]]
        for i in range(len(a)):
            if i != r and a[i][j] != 0:
                f = a[i][j]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(j)
        r += 1
        if r == len(a):
            break
    return a[:r], pivots


def rank(m: Sequence[Sequence], ncols: int | None = None) -> int:
    if not m:
        return 0
    return len(rref(m, ncols)[1])


def nullspace(m: Sequence[Sequence], ncols: int | None = None) -> list[tuple[Fraction, ...]]:
    """Basis of {x : m x = 0} over Q."""
    c = ncols_of(m, ncols)
    red, piv = rref(m, c) if m else ([], [])
    free = [j for j in range(c) if j not in piv]
    basis = []
    for f in free:
        x = [Fraction(0)] * c
        x[f] = Fraction(1)
        for row, p in zip(red, piv):
            x[p] = -row[f]
        basis.append(tuple(x))
    return basis


def solve_rational(a: Sequence[Sequence], b: Sequence, ncols: int | None = None) -> tuple[Fraction, ...] | None:
    """One solution of a x = b over Q, or None."""
    c = ncols_of(a, ncols)
    if len(a) != len(b):
        raise ZPLError("shape-mismatch", "right-hand side length differs from row count")
    aug = [list(row) + [bi] for row, bi in zip(a, b)]
    if not aug:
        return tuple(Fraction(0) for _ in range(c))
    red, piv = rref(aug, c + 1)
    if c in piv:
        return None
    x = [Fraction(0)] * c
    for row, p in zip(red, piv):
        x[p] = row[c]
    return tuple(x)


def inverse_rational(m: Sequence[Sequence]) -> tuple[tuple[Fraction, ...], ...]:
    n = len(m)
    aug = [list(row) + [1 if i == j else 0 for j in range(n)] for i, row in enumerate(m)]
    red, piv = rref(aug, 2 * n)
    if piv[:n] != list(range(n)) or len(piv) < n:
        raise ZPLError("singular", "matrix is not invertible")
    return tuple(tuple(row[n:]) for row in red)


def integer_rows(vectors: Iterable[Sequence]) -> list[IntVector]:
    """Clear denominators row by row and make each row primitive."""
    return [primitive(v) for v in vectors if any(x != 0 for x in v)]


# ---------------------------------------------------------------------------
# Smith and Hermite normal forms


@dataclass(frozen=True)
class SmithForm:
    """``left @ m @ right`` is diagonal with ``invariants`` then zeros."""

    invariants: tuple[int, ...]
    left: IntMatrix
    right: IntMatrix
    shape: tuple[int, int]

    @property
    def rank(self) -> int:
        return len(self.invariants)


def smith_normal_form(m: Sequence[Sequence[int]], ncols: int | None = None) -> SmithForm:
    rows = len(m)
    cols = ncols_of(m, ncols)
    d = [list(map(int, r)) for r in m]
    left = [list(r) for r in identity(rows)]
    right = [list(r) for r in identity(cols)]

    def swap_rows(i: int, j: int) -> None:
        d[i], d[j] = d[j], d[i]
        left[i], left[j] = left[j], left[i]

    def swap_cols(i: int, j: int) -> None:
        for r in d:
            r[i], r[j] = r[j], r[i]
        for r in right:
            r[i], r[j] = r[j], r[i]

    def add_row(dst: int, src: int, k: int) -> None:
        # row_dst += k * row_src
        if k:
            d[dst] = [x + k * y for x, y in zip(d[dst], d[src])]
            left[dst] = [x + k * y for x, y in zip(left[dst], left[src])]

    def add_col(dst: int, src: int, k: int) -> None:
        if k:
            for r in d:
                r[dst] += k * r[src]
            for r in right:
                r[dst] += k * r[src]

    invariants: list[int] = []
    for t in range(min(rows, cols)):
        best = None
        for i in range(t, rows):
            for j in range(t, cols):
                if d[i][j] and (best is None or abs(d[i][j]) < abs(d[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        swap_rows(t, best[0])
        swap_cols(t, best[1])
        while True:
            done = True
            for i in range(t + 1, rows):
                if d[i][t]:
                    add_row(i, t, -(d[i][t] // d[t][t]))
                    if d[i][t]:
                        swap_rows(t, i)
                        done = False
            for j in range(t + 1, cols):
                if d[t][j]:
                    add_col(j, t, -(d[t][j] // d[t][t]))
                    if d[t][j]:
                        swap_cols(t, j)
                        done = False
            if not done:
                continue
            # divisibility of the remaining block
            bad = next(
                ((i, j) for i in range(t + 1, rows) for j in range(t + 1, cols) if d[i][j] % d[t][t]),
                None,
            )
            if bad is None:
                break
            add_row(t, bad[0], 1)
        if d[t][t] < 0:
            d[t] = [-x for x in d[t]]
            left[t] = [-x for x in left[t]]
        invariants.append(d[t][t])
    return SmithForm(tuple(invariants), as_matrix(left), as_matrix(right), (rows, cols))


def _ext_gcd(a: int, b: int) -> tuple[int, int, int]:
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def hermite_normal_form(m: Sequence[Sequence[int]], ncols: int | None = None) -> IntMatrix:
    """Row-style Hermite form with zero rows dropped.

    Pivots are positive and entries above a pivot lie in ``[0, pivot)``.  Two
    generator sets span the same lattice iff their forms coincide.
    """
    cols = ncols_of(m, ncols)
    a = [list(map(int, r)) for r in m]
    r = 0
    for j in range(cols):
        if r == len(a):
            break
        for i in range(r + 1, len(a)):
            if a[i][j]:
                g, x, y = _ext_gcd(a[r][j], a[i][j])
                p, q = a[r][j] // g, a[i][j] // g
                ri, rr = a[i], a[r]
                a[r] = [x * u + y * v for u, v in zip(rr, ri)]
                a[i] = [-q * u + p * v for u, v in zip(rr, ri)]
        if a[r][j] == 0:
            continue
        if a[r][j] < 0:
            a[r] = [-u for u in a[r]]
        for i in range(r):
            k = a[i][j] // a[r][j]
            if k:
                a[i] = [u - k * v for u, v in zip(a[i], a[r])]
        r += 1
    return as_matrix(a[:r])


# ---------------------------------------------------------------------------
# lattices


@dataclass(frozen=True)
class Lattice:
    """A subgroup of Z^n stored by its Hermite basis, so ``==`` is lattice equality."""

    ambient_rank: int
    basis: IntMatrix = field(default=())

    def __post_init__(self) -> None:
        hnf = hermite_normal_form(self.basis, self.ambient_rank) if self.basis else ()
        object.__setattr__(self, "basis", hnf)

    @classmethod
    def standard(cls, n: int) -> "Lattice":
        return cls(n, identity(n))

    @classmethod
    def span(cls, n: int, generators: Iterable[Sequence[int]]) -> "Lattice":
        return cls(n, as_matrix(generators))

    @property
    def rank(self) -> int:
        return len(self.basis)

    def coordinates(self, v: Sequence) -> tuple[Fraction, ...] | None:
        """Coordinates of ``v`` in the stored basis, or None if outside the rational span."""
        if not self.basis:
            return () if all(x == 0 for x in v) else None
        return solve_rational(transpose(self.basis), list(v), self.rank)

    def contains(self, v: Sequence) -> bool:
        c = self.coordinates(v)
        return c is not None and all(x.denominator == 1 for x in c)

    def is_saturated(self) -> bool:
        return self == saturation(self.ambient_rank, self.basis)

    def index_in(self, other: "Lattice") -> "int | _Infinite":
        """[other : self] for a sublattice of equal rank."""
        coords = []
        for b in self.basis:
            c = other.coordinates(b)
            if c is None or any(x.denominator != 1 for x in c):
                raise ZPLError("not-a-sublattice", "lattice is not contained in the other")
            coords.append([int(x) for x in c])
        if self.rank != other.rank:
            return INFINITE
        return abs(determinant(coords)) if coords else 1


@dataclass(frozen=True)
class LatticeMap:
    """Homomorphism given in bases; column ``j`` is the image of source basis vector ``j``."""

    source: Lattice
    target: Lattice
    matrix: IntMatrix

    def __post_init__(self) -> None:
        m = as_matrix(self.matrix)
        object.__setattr__(self, "matrix", m)
        if len(m) != self.target.rank or (m and len(m[0]) != self.source.rank):
            raise ZPLError("shape-mismatch", "matrix shape does not match lattice ranks")

    @classmethod
    def of(cls, matrix: Sequence[Sequence[int]], source_rank: int | None = None) -> "LatticeMap":
        m = as_matrix(matrix)
        s = len(m[0]) if m else (source_rank or 0)
        return cls(Lattice.standard(s), Lattice.standard(len(m)), m)

    def __call__(self, v: Sequence[int]) -> IntVector:
        return tuple(mat_vec(self.matrix, v)) if self.matrix else ()

    def compose(self, first: "LatticeMap") -> "LatticeMap":
        """``self`` after ``first``."""
        if first.target != self.source:
            raise ZPLError("shape-mismatch", "composition of incompatible maps")
        if not self.matrix or not first.matrix:
            m = tuple(() for _ in range(self.target.rank))
        else:
            m = mat_mul(self.matrix, first.matrix)
        return LatticeMap(first.source, self.target, m)

    def dual(self) -> "LatticeMap":
        return LatticeMap(
            Lattice.standard(self.target.rank),
            Lattice.standard(self.source.rank),
            transpose(self.matrix, self.source.rank) if self.target.rank else tuple(() for _ in range(self.source.rank)),
        )

    def is_injective(self) -> bool:
        return rank(self.matrix, self.source.rank) == self.source.rank

    def cokernel_torsion_free(self) -> bool:
        snf = smith_normal_form(self.matrix, self.source.rank)
        return all(d == 1 for d in snf.invariants)


def lattice_index(f: LatticeMap | Sequence[Sequence[int]]) -> "int | _Infinite":
    """Index of the image of an injective map between lattices of equal rank."""
    if not isinstance(f, LatticeMap):
        f = LatticeMap.of(f)
    s, t = f.source.rank, f.target.rank
    if s != t:
        return INFINITE
    if s == 0:
        return 1
    snf = smith_normal_form(f.matrix)
    if snf.rank < s:
        return INFINITE
    out = 1
    for d in snf.invariants:
        out *= d
    return out


def solve_integer_affine(a: Sequence[Sequence[int]], b: Sequence, ncols: int | None = None) -> IntVector | None:
    """Some integer x with a x = b, or None."""
    c = ncols_of(a, ncols)
    if len(b) != len(a):
        raise ZPLError("shape-mismatch", "right-hand side length differs from row count")
    if any(Fraction(x).denominator != 1 for x in b):
        return None
    if not a:
        return tuple(0 for _ in range(c))
    snf = smith_normal_form(a, c)
    ub = mat_vec(snf.left, [int(x) for x in b])
    y = []
    for i, di in enumerate(snf.invariants):
        if ub[i] % di:
            return None
        y.append(ub[i] // di)
    if any(ub[i] for i in range(snf.rank, len(ub))):
        return None
    y += [0] * (c - len(y))
    return tuple(mat_vec(snf.right, y))


def minimal_scaling_rho(a: Sequence[Sequence[int]], b: Sequence, ncols: int | None = None) -> Fraction:
    """Least rho > 0 such that a x = rho b has an integral solution.

    The admissible rho form rho_min * Z_{>0}.
    """
    c = ncols_of(a, ncols)
    bq = [Fraction(x) for x in b]
    if all(x == 0 for x in bq):
        raise ZPLError("b-zero", "every rho works when b is zero")
    if solve_rational(a, bq, c) is None:
        raise ZPLError("no-rational-solution", "a x = b has no rational solution")
    snf = smith_normal_form(a, c)
    ub = mat_vec(snf.left, bq)
    # rho * ub_i / d_i must be integral for every invariant d_i
    num_lcm, den_gcd = 1, 0
    for i, di in enumerate(snf.invariants):
        q = ub[i] / di
        if q == 0:
            continue
        step = Fraction(q.denominator, abs(q.numerator))  # generator of {rho : rho*q in Z}
        num_lcm = num_lcm * step.numerator // gcd(num_lcm, step.numerator)
        den_gcd = gcd(den_gcd, step.denominator)
    return Fraction(num_lcm, den_gcd)


def kernel_saturation(a: Sequence[Sequence[int]], ncols: int | None = None) -> Lattice:
    """Basis of ker(a) ∩ Z^n; the result is saturated by construction."""
    c = ncols_of(a, ncols)
    if not a:
        return Lattice.standard(c)
    snf = smith_normal_form(a, c)
    cols = [tuple(row[j] for row in snf.right) for j in range(snf.rank, c)]
    return Lattice(c, as_matrix(cols))


def saturation(n: int, vectors: Iterable[Sequence]) -> Lattice:
    """Z^n ∩ (rational span of ``vectors``)."""
    vs = [tuple(Fraction(x) for x in v) for v in vectors]
    if not vs:
        return Lattice(n, ())
    annihilator = integer_rows(nullspace(vs, n))
    return kernel_saturation(annihilator, n)


def annihilator(n: int, vectors: Iterable[Sequence]) -> IntMatrix:
    """Integer rows spanning the saturated annihilator of ``vectors``."""
    vs = [tuple(Fraction(x) for x in v) for v in vectors]
    if not vs:
        return identity(n)
    lat = saturation(n, integer_rows(nullspace(vs, n)))
    return lat.basis


def express_integral(basis_columns: Sequence[Sequence[int]], v: Sequence) -> IntVector:
    """Integer coordinates of ``v`` in a basis given as a list of vectors."""
    m = transpose(basis_columns) if basis_columns else ()
    x = solve_rational(m, list(v), len(basis_columns)) if m else (() if not any(v) else None)
    if x is None or any(t.denominator != 1 for t in x):
        raise ZPLError("not-in-lattice", f"{tuple(v)} is not in the lattice spanned by the basis")
    return tuple(int(t) for t in x)
