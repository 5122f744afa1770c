"""Affine monoids, Hilbert bases, and dual complexes of marked fans."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from itertools import combinations
from typing import Mapping, Sequence

from .complex import ConicalFace, Embedding, PLComplex
from .errors import ZPLError
from .geometry import Cone, triangulate_cone
from .linalg import (
    IntMatrix,
    IntVector,
    Lattice,
    as_matrix,
    dot,
    express_integral,
    inverse_rational,
    mat_mul,
    mat_vec,
    nullspace,
    primitive,
    rank,
    saturation,
    smith_normal_form,
    transpose,
)


def _parallelepiped_points(rays: Sequence[IntVector], n: int) -> list[IntVector]:
    """Lattice points of the half-open parallelepiped spanned by n independent rays."""
    cols = transpose(rays)
    snf = smith_normal_form(cols)
    # coset representatives of Z^n / (ray lattice) are left^{-1} t with 0 <= t_i < d_i
    left_inv = inverse_rational(snf.left)
    inv_cols = inverse_rational(cols)
    reps: list[list[int]] = [[]]
    for d in snf.invariants:
        reps = [r + [t] for r in reps for t in range(d)]
    out = []
    for t in reps:
        c = [int(x) for x in mat_vec(left_inv, t)]
        lam = mat_vec(inv_cols, c)
        frac = [x - (x.numerator // x.denominator) for x in lam]
        p = tuple(int(x) for x in mat_vec(cols, frac))
        out.append(p)
    return out


def hilbert_basis(cone_rays: Sequence[Sequence[int]], ambient: Lattice | None = None) -> list[IntVector]:
    """Minimal generating set of (cone ∩ lattice), sorted.

    ``ambient`` defaults to the standard lattice; otherwise the cone is
    intersected with the given sublattice of Z^n.
    """
    rays = [tuple(int(x) for x in r) for r in cone_rays]
    if not rays:
        return []
    n = len(rays[0])
    lat = ambient if ambient is not None else Lattice.standard(n)
    # work in coordinates of lat ∩ span(rays)
    coords = []
    for r in rays:
        c = lat.coordinates(r)
        if c is None:
            raise ZPLError("not-in-lattice-span", f"{r} is outside the lattice span")
        coords.append(c)
    k = lat.rank
    scaled = [primitive(c) for c in coords if any(c)]
    sub = saturation(k, scaled)
    local = [express_integral(sub.basis, s) if sub.rank else () for s in scaled]
    d = sub.rank
    if d == 0:
        return []
    cone = Cone(local, d)
    if not cone.is_strictly_convex:
        raise ZPLError("not-strictly-convex", "Hilbert basis needs a pointed cone")
    ext = [cone.generators[i] for i in cone.extreme_indices]
    candidates: set[IntVector] = set(ext)
    for simplex in triangulate_cone(Cone(ext, d)):
        cand_rays = [ext[i] for i in simplex]
        for p in _parallelepiped_points(cand_rays, d):
            if any(p):
                candidates.add(p)
    cands = sorted(candidates)
    basis = []
    for x in cands:
        reducible = any(y != x and cone.contains(tuple(a - b for a, b in zip(x, y))) for y in cands)
        if not reducible:
            basis.append(x)
    # back to ambient coordinates
    out = []
    for x in basis:
        in_k = [sum(xi * b[j] for xi, b in zip(x, sub.basis)) for j in range(k)]
        amb = [sum(ci * b[j] for ci, b in zip(in_k, lat.basis)) for j in range(n)]
        out.append(tuple(amb))
    return sorted(out)


@dataclass(frozen=True)
class AffineMonoid:
    """Submonoid of a lattice given by generators in ambient coordinates."""

    ambient: Lattice
    generators: tuple[IntVector, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "generators", as_matrix(self.generators))

    @classmethod
    def of(cls, generators: Sequence[Sequence[int]], n: int | None = None) -> "AffineMonoid":
        gens = as_matrix(generators)
        n = n if n is not None else len(gens[0])
        return cls(Lattice.standard(n), gens)

    @property
    def n(self) -> int:
        return self.ambient.ambient_rank

    @cached_property
    def cone(self) -> Cone:
        return Cone(self.generators, self.n)

    @cached_property
    def group(self) -> Lattice:
        return Lattice(self.n, self.generators)

    def is_sharp(self) -> bool:
        return self.cone.is_strictly_convex

    def is_saturated(self) -> bool:
        hb = hilbert_basis(self.cone.extreme_rays, self.group) if self.generators else []
        return all(self.contains(h) for h in hb)

    def grading(self) -> IntVector:
        return self.cone.positive_grading()

    def contains(self, v: Sequence[int]) -> bool:
        """Membership in the monoid itself (not its saturation)."""
        v = tuple(int(x) for x in v)
        if not any(v):
            return True
        if not self.cone.contains(v) or not self.group.contains(v):
            return False
        gens = [g for g in self.generators if any(g)]
        grade = self.grading()

        @lru_cache(maxsize=None)
        def reach(target: IntVector, start: int) -> bool:
            if not any(target):
                return True
            if dot(grade, target) <= 0:
                return False
            for j in range(start, len(gens)):
                rest = tuple(a - b for a, b in zip(target, gens[j]))
                if dot(grade, rest) >= 0 and reach(rest, j):
                    return True
            return False

        return reach(v, 0)

    def saturation_contains(self, v: Sequence[int]) -> bool:
        return self.cone.contains(v) and self.group.contains(v)


def dual_monoid(m: AffineMonoid) -> AffineMonoid:
    """Nonnegative integral functionals on ``m``, as a monoid in the dual lattice.

    Coordinates are dual to the basis of the ambient lattice, so for the
    standard lattice these are the standard dual coordinates.  The monoid has
    to span its ambient lattice rationally.
    """
    if not m.is_sharp():
        raise ZPLError("not-sharp", "monoid has nontrivial units")
    amb = m.ambient
    coords = [express_integral(amb.basis, x) for x in m.generators]
    local = Cone(coords, amb.rank)
    if local.dim != amb.rank:
        raise ZPLError("not-full-rank", "monoid does not span its ambient lattice")
    normals = [f.normal for f in local.facets]
    hb = hilbert_basis(normals) if normals else []
    return AffineMonoid(Lattice.standard(amb.rank), tuple(hb))


@dataclass(frozen=True)
class FacePoset:
    faces: tuple[frozenset[int], ...]  # sets of generator indices
    heights: tuple[int, ...]  # height of the complementary prime ideal
    order: tuple[tuple[int, int], ...]  # (i, j) with faces[i] ⊂ faces[j]

    def __len__(self) -> int:
        return len(self.faces)


def face_poset(m: AffineMonoid) -> FacePoset:
    """Faces of the monoid, found by testing generator subsets directly.

    A subset S is a face iff S is closed under the rational span inside the
    generators and the remaining generators are pointed and nonzero modulo
    span(S).
    """
    gens = list(m.generators)
    n = m.n
    idx = [i for i, g in enumerate(gens) if any(g)]
    total = rank([gens[i] for i in idx], n) if idx else 0
    found: list[frozenset[int]] = []
    for size in range(len(idx) + 1):
        for subset in combinations(idx, size):
            s = frozenset(subset)
            span = [gens[i] for i in s]
            r = rank(span, n) if span else 0
            closed = all(
                i in s or (rank(span + [gens[i]], n) if span else rank([gens[i]], n)) > r for i in idx
            )
            if not closed:
                continue
            rest = [i for i in idx if i not in s]
            if _pointed_modulo(gens, list(s), rest, n):
                found.append(s)
    found.sort(key=lambda s: (len(s), sorted(s)))
    heights = tuple(total - (rank([gens[i] for i in f], n) if f else 0) for f in found)
    order = tuple((i, j) for i, a in enumerate(found) for j, b in enumerate(found) if a < b)
    return FacePoset(tuple(found), heights, order)


def _pointed_modulo(gens, inside: list[int], rest: list[int], n: int) -> bool:
    """Is there a functional vanishing on ``inside`` and positive on ``rest``?"""
    if not rest:
        return True
    if inside:
        q = nullspace([gens[i] for i in inside], n)  # functionals killing span(inside)
    else:
        q = [tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n)]
    if not q:
        return False
    images = [tuple(dot(u, gens[i]) for u in q) for i in rest]
    if any(not any(x) for x in images):
        return False
    ints = [primitive(x) for x in images]
    # pointed and no generator maps to zero: an interior dual vector works
    return Cone(ints, len(q)).is_strictly_convex


# ---------------------------------------------------------------------------
# fans


@dataclass(frozen=True)
class MarkedFanPoint:
    """A point with its characteristic monoid and the image of the uniformizer.

    ``cospecializations`` maps the label of a generalization y to the matrix of
    the surjection M_x -> M_y (rows: coordinates of M_y).
    """

    label: str
    monoid: AffineMonoid
    varpi: IntVector
    cospecializations: Mapping[str, IntMatrix] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "varpi", tuple(int(x) for x in self.varpi))
        object.__setattr__(
            self, "cospecializations", {k: as_matrix(v) for k, v in sorted(self.cospecializations.items())}
        )

    @property
    def rank(self) -> int:
        return self.monoid.n


@dataclass(frozen=True)
class KatoFan:
    points: Mapping[str, MarkedFanPoint]

    def __post_init__(self) -> None:
        object.__setattr__(self, "points", dict(sorted(self.points.items())))


def _compose(a: IntMatrix, b: IntMatrix, inner: int) -> IntMatrix:
    if inner == 0:
        return tuple(() for _ in a)
    return as_matrix(mat_mul(a, b, inner))


def check_fan(fan: KatoFan) -> None:
    """Raise ``inconsistent-fan`` on any structural contradiction."""
    for x, p in fan.points.items():
        mon = p.monoid
        if mon.group != Lattice.standard(mon.n):
            raise ZPLError("inconsistent-fan", f"generators of {x} must generate its lattice")
        if not mon.is_sharp():
            raise ZPLError("inconsistent-fan", f"monoid at {x} is not sharp")
        if len(p.varpi) != mon.n or not mon.saturation_contains(p.varpi):
            raise ZPLError("inconsistent-fan", f"varpi at {x} is not in the monoid")
        for y, q in p.cospecializations.items():
            if y not in fan.points:
                raise ZPLError("inconsistent-fan", f"{x} refers to unknown point {y}")
            py = fan.points[y]
            if len(q) != py.rank or any(len(r) != p.rank for r in q):
                raise ZPLError("inconsistent-fan", f"quotient {x}->{y} has the wrong shape")
            if py.rank >= p.rank:
                raise ZPLError("inconsistent-fan", f"rank does not drop from {x} to {y}")
            snf = smith_normal_form(q, p.rank)
            if snf.rank != py.rank or any(d != 1 for d in snf.invariants):
                raise ZPLError("inconsistent-fan", f"{x}->{y} is not surjective")
            if tuple(mat_vec(q, p.varpi)) != py.varpi:
                raise ZPLError("inconsistent-fan", f"varpi is not compatible along {x}->{y}")
            killed = [i for i, g in enumerate(mon.generators) if not any(mat_vec(q, g))]
            for i, g in enumerate(mon.generators):
                img = mat_vec(q, g)
                if any(img) and not py.monoid.saturation_contains(img):
                    raise ZPLError("inconsistent-fan", f"{x}->{y} does not map the monoid into {y}")
            face = frozenset(killed)
            if face not in set(face_poset(mon).faces):
                raise ZPLError("inconsistent-fan", f"kernel of {x}->{y} is not a face")
    for x, p in fan.points.items():
        for y, qxy in p.cospecializations.items():
            for z, qyz in fan.points[y].cospecializations.items():
                if z in p.cospecializations:
                    comp = _compose(qyz, qxy, fan.points[y].rank)
                    if comp != p.cospecializations[z]:
                        raise ZPLError("inconsistent-fan", f"{x}->{y}->{z} does not commute with {x}->{z}")


def dual_complex_from_fan(fan: KatoFan) -> PLComplex:
    """Faces are the points with nonzero varpi; cones are the dual cones."""
    check_fan(fan)
    faces = {}
    for x, p in fan.points.items():
        if not any(p.varpi):
            continue
        if p.monoid.n == 0:
            continue
        dual = Cone([f.normal for f in p.monoid.cone.facets], p.rank)
        faces[x] = ConicalFace(tuple(dual.extreme_rays), p.varpi)
    embeddings = []
    for x, p in fan.points.items():
        if x not in faces:
            continue
        for y, q in p.cospecializations.items():
            if y in faces:
                embeddings.append(Embedding(y, x, transpose(q, p.rank)))
    return PLComplex(faces, tuple(embeddings), pure=False)


def face_monoid(face: ConicalFace) -> AffineMonoid:
    """Nonnegative integral linear functions on the cone of a face."""
    normals = [f.normal for f in face.cone.facets]
    return AffineMonoid(Lattice.standard(face.rank), tuple(hilbert_basis(normals)))


__all__ = [
    "AffineMonoid",
    "FacePoset",
    "KatoFan",
    "MarkedFanPoint",
    "dual_complex_from_fan",
    "dual_monoid",
    "face_monoid",
    "face_poset",
    "hilbert_basis",
]
