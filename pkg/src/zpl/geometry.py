"""Exact convex geometry of small rational cones and polytopes.

Facets are found by brute force over subsets of generators, which is fine for
the handful of rays a single face carries.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from typing import Sequence

from .errors import ZPLError
from .linalg import (
    IntVector,
    dot,
    nullspace,
    primitive,
    rank,
    saturation,
    solve_rational,
    transpose,
)


def _sign(x) -> int:
    return (x > 0) - (x < 0)


@dataclass(frozen=True)
class Facet:
    normal: IntVector  # primitive, nonnegative on the cone (in span coordinates)
    rays: frozenset[int]


class Cone:
    """Cone generated by integer vectors in Z^n, analysed inside its own span."""

    def __init__(self, generators: Sequence[Sequence[int]], n: int | None = None) -> None:
        gens = [tuple(int(x) for x in g) for g in generators]
        if n is None:
            if not gens:
                raise ZPLError("shape-mismatch", "ambient rank needed for an empty cone")
            n = len(gens[0])
        self.n = n
        self.generators = gens
        self.span_lattice = saturation(n, [g for g in gens if any(g)])
        self.dim = self.span_lattice.rank
        basis = self.span_lattice.basis
        self._basis = basis
        self.coords = [self.to_span(g) for g in gens]

    def to_span(self, v: Sequence) -> tuple[Fraction, ...] | None:
        if self.dim == 0:
            return () if not any(v) else None
        return solve_rational(transpose(self._basis), list(v), self.dim)

    def from_span(self, c: Sequence) -> tuple:
        return tuple(sum(ci * b[j] for ci, b in zip(c, self._basis)) for j in range(self.n))

    @cached_property
    def facets(self) -> list[Facet]:
        k = self.dim
        if k == 0:
            return []
        found: dict[IntVector, frozenset[int]] = {}
        nonzero = [i for i, g in enumerate(self.generators) if any(g)]
        for combo in combinations(nonzero, k - 1):
            pts = [self.coords[i] for i in combo]
            if pts and rank(pts, k) != k - 1:
                continue
            ns = nullspace(pts, k) if pts else nullspace([], k)
            if len(ns) != 1:
                continue
            u = primitive(ns[0])
            vals = [dot(u, self.coords[i]) for i in nonzero]
            if all(v >= 0 for v in vals):
                pass
            elif all(v <= 0 for v in vals):
                u = tuple(-x for x in u)
                vals = [-v for v in vals]
            else:
                continue
            if not any(v > 0 for v in vals):
                continue
            found[u] = frozenset(i for i, v in zip(nonzero, vals) if v == 0)
        return [Facet(u, found[u]) for u in sorted(found)]

    @cached_property
    def is_strictly_convex(self) -> bool:
        if self.dim == 0:
            return True
        normals = [f.normal for f in self.facets]
        return bool(normals) and rank(normals, self.dim) == self.dim

    @cached_property
    def extreme_indices(self) -> list[int]:
        """Indices of generators spanning extreme rays (first occurrence of each ray)."""
        if not self.is_strictly_convex:
            raise ZPLError("not-strictly-convex", "cone contains a line")
        seen: set[IntVector] = set()
        out = []
        for i, g in enumerate(self.generators):
            if not any(g):
                continue
            p = primitive(g)
            if p in seen:
                continue
            on = [f.normal for f in self.facets if i in f.rays]
            if (rank(on, self.dim) if on else 0) == self.dim - 1:
                seen.add(p)
                out.append(i)
        return out

    @cached_property
    def extreme_rays(self) -> list[IntVector]:
        return [primitive(self.generators[i]) for i in self.extreme_indices]

    def contains(self, v: Sequence, relative_interior: bool = False) -> bool:
        c = self.to_span(v)
        if c is None:
            return False
        if self.dim == 0:
            return True
        vals = [dot(f.normal, c) for f in self.facets]
        if relative_interior:
            return all(x > 0 for x in vals)
        return all(x >= 0 for x in vals)

    def faces(self) -> list[frozenset[int]]:
        """All faces as sets of generator indices, from the apex up to the cone itself."""
        nonzero = frozenset(i for i, g in enumerate(self.generators) if any(g))
        result = {nonzero}
        frontier = [nonzero]
        facet_sets = [f.rays for f in self.facets]
        while frontier:
            nxt = []
            for face in frontier:
                for fs in facet_sets:
                    sub = face & fs
                    if sub != face and sub not in result:
                        result.add(sub)
                        nxt.append(sub)
            frontier = nxt
        return sorted(result, key=lambda s: (len(s), sorted(s)))

    def face_dimension(self, face: frozenset[int]) -> int:
        pts = [self.coords[i] for i in face]
        return rank(pts, self.dim) if pts else 0

    def positive_grading(self) -> IntVector:
        """Integer covector on Z^n that is positive on every nonzero generator."""
        if not self.is_strictly_convex:
            raise ZPLError("not-strictly-convex", "no positive grading on a cone with a line")
        if self.dim == 0:
            return tuple(0 for _ in range(self.n))
        s = [sum(f.normal[j] for f in self.facets) for j in range(self.dim)]
        # lift the span covector to Z^n: solve u . b_i = s_i
        u = solve_rational(list(self._basis), s, self.n)
        return primitive(u)


# ---------------------------------------------------------------------------
# triangulation


class _Frame:
    """Affine coordinates on the hull of some rational points."""

    def __init__(self, origin: Sequence[Fraction]) -> None:
        self.origin = tuple(origin)
        self.directions: list[tuple[Fraction, ...]] = []

    def coords(self, p: Sequence[Fraction]) -> tuple[Fraction, ...] | None:
        diff = [a - b for a, b in zip(p, self.origin)]
        if not self.directions:
            return () if not any(diff) else None
        return solve_rational(transpose(self.directions), diff, len(self.directions))


def placing_triangulation(points: Sequence[Sequence], order: Sequence[int] | None = None) -> tuple[int, list[tuple[int, ...]]]:
    """Placing triangulation of conv(points) in its affine hull.

    Returns the dimension of the hull and simplices as tuples of point indices.
    Points inside the current hull are skipped, so redundant input is fine.
    """
    pts = [tuple(Fraction(x) for x in p) for p in points]
    if not pts:
        raise ZPLError("empty", "no points to triangulate")
    idx = list(order) if order is not None else list(range(len(pts)))
    frame = _Frame(pts[idx[0]])
    simplices: list[tuple[int, ...]] = [(idx[0],)]
    used = [idx[0]]
    coords: dict[int, tuple[Fraction, ...]] = {idx[0]: ()}
    for i in idx[1:]:
        c = frame.coords(pts[i])
        if c is None:
            frame.directions.append(tuple(a - b for a, b in zip(pts[i], frame.origin)))
            coords = {j: frame.coords(pts[j]) for j in used}
            coords[i] = frame.coords(pts[i])
            simplices = [s + (i,) for s in simplices]
            used.append(i)
            continue
        if any(c == coords[j] for j in used):
            continue
        d = len(frame.directions)
        counts: dict[frozenset[int], list] = {}
        for s in simplices:
            for q in s:
                f = frozenset(s) - {q}
                counts.setdefault(f, []).append(q)
        new = []
        for f, opposite in counts.items():
            if len(opposite) != 1:
                continue
            fl = sorted(f)
            base = coords[fl[0]]
            edges = [[a - b for a, b in zip(coords[v], base)] for v in fl[1:]]

            def side(x: Sequence[Fraction]) -> int:
                return _sign(_det_fraction(edges + [[a - b for a, b in zip(x, base)]], d))

            if side(c) * side(coords[opposite[0]]) < 0:
                new.append(tuple(fl) + (i,))
        if new:
            simplices.extend(new)
            coords[i] = c
            used.append(i)
    return len(frame.directions), simplices


def _det_fraction(rows: list[list[Fraction]], d: int) -> Fraction:
    if d == 0:
        return Fraction(1)
    a = [list(r) for r in rows]
    det = Fraction(1)
    for k in range(d):
        p = next((i for i in range(k, d) if a[i][k] != 0), None)
        if p is None:
            return Fraction(0)
        if p != k:
            a[k], a[p] = a[p], a[k]
            det = -det
        det *= a[k][k]
        for i in range(k + 1, d):
            if a[i][k]:
                f = a[i][k] / a[k][k]
                a[i] = [x - f * y for x, y in zip(a[i], a[k])]
    return det


def simplex_det(vertices: Sequence[Sequence[Fraction]]) -> Fraction:
    """|det| of the edge vectors of a full-dimensional simplex given in coordinates."""
    base = vertices[0]
    edges = [[a - b for a, b in zip(v, base)] for v in vertices[1:]]
    return abs(_det_fraction(edges, len(edges)))


def triangulate_cone(cone: Cone) -> list[tuple[int, ...]]:
    """Simplicial cones (generator indices) covering a strictly convex cone."""
    ext = cone.extreme_indices
    if len(ext) == cone.dim:
        return [tuple(ext)]
    grading = cone.positive_grading()
    pts = [tuple(Fraction(x, dot(grading, cone.generators[i])) for x in cone.generators[i]) for i in ext]
    _, simplices = placing_triangulation(pts)
    return [tuple(ext[j] for j in s) for s in simplices]
