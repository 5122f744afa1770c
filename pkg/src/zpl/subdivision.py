"""Subdivisions of Z-PL complexes, 2D resolutions and recession complexes."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import ceil, floor
from typing import Iterable, Mapping, Sequence

from .complex import ConicalFace, Embedding, PLComplex, apply
from .errors import Report, ZPLError
from .geometry import Cone
from .linalg import (
    IntMatrix,
    IntVector,
    Lattice,
    as_matrix,
    determinant,
    dot,
    express_integral,
    identity,
    is_primitive,
    mat_mul,
    primitive,
    saturation,
    smith_normal_form,
    solve_rational,
    transpose,
)


@dataclass(frozen=True)
class SubdivisionMap:
    """A refinement ``source`` of ``target``.

    ``face_map[a]`` is the face of ``target`` carrying new face ``a`` and
    ``lattice_maps[a]`` sends N_a into it (columns are images of basis vectors).
    """

    source: PLComplex
    target: PLComplex
    face_map: Mapping[str, str]
    lattice_maps: Mapping[str, IntMatrix]

    def __post_init__(self) -> None:
        object.__setattr__(self, "face_map", dict(sorted(self.face_map.items())))
        object.__setattr__(self, "lattice_maps", {k: as_matrix(v) for k, v in sorted(self.lattice_maps.items())})


def _single_map(c: PLComplex, sub: str, sup: str) -> IntMatrix:
    ms = c.maps(sub, sup)
    if len(ms) != 1:
        raise ZPLError("unsupported", f"need exactly one embedding {sub}->{sup}, found {len(ms)}")
    return ms[0]


def _in_image(matrix: IntMatrix, sub_face: ConicalFace, v: Sequence[int]) -> IntVector | None:
    """Preimage of ``v`` under an embedding if it lies in the sub-face's cone."""
    x = solve_rational(matrix, list(v), sub_face.rank)
    if x is None or any(t.denominator != 1 for t in x):
        return None
    xi = tuple(int(t) for t in x)
    return xi if sub_face.cone.contains(xi) else None


def minimal_carrier(c: PLComplex, face: str, rays: Sequence[IntVector]) -> tuple[str, list[IntVector]]:
    """Smallest face containing the given rays, and the rays in its coordinates."""
    best = (face, [tuple(r) for r in rays])
    for sub, m in c.subfaces(face):
        if sub == face or c.faces[sub].rank >= c.faces[best[0]].rank:
            continue
        local = [_in_image(m, c.faces[sub], r) for r in rays]
        if all(x is not None for x in local):
            best = (sub, local)
    return best


def build_refinement(target: PLComplex, cones: Iterable[tuple[str, Sequence[Sequence[int]]]]) -> SubdivisionMap:
    """Assemble a complex from cones given inside faces of ``target``.

    Faces of the cones meeting the slice are identified through their
    minimal carrier; a face equal to a whole face of ``target`` keeps its id.
    """
    if target.multi_adjacency:
        raise ZPLError("unsupported", "refinements of complexes with multiple adjacencies")
    keyed: dict[tuple[str, frozenset[IntVector]], list[IntVector]] = {}
    relations: set[tuple[tuple, tuple]] = set()
    for carrier, rays in cones:
        rays = [primitive(r) for r in rays]
        cone = Cone(rays, target.faces[carrier].rank)
        faces = [f for f in cone.faces() if f]
        keys = {}
        for f in faces:
            fr = [rays[i] for i in sorted(f)]
            car, local = minimal_carrier(target, carrier, fr)
            face = target.faces[car]
            if not any(dot(face.varpi, r) > 0 for r in local):
                continue
            key = (car, frozenset(local))
            keyed[key] = sorted(local)
            keys[f] = key
        for f, kf in keys.items():
            for g, kg in keys.items():
                if g < f:
                    relations.add((kg, kf))

    def order(key):
        car, rs = key
        return (len(rs), car, sorted(rs))

    ordered = sorted(keyed, key=order)
    names: dict[tuple, str] = {}
    counters: dict[str, int] = {}
    for key in ordered:
        car, rs = key
        if set(rs) == set(target.faces[car].rays):
            names[key] = car
        else:
            counters[car] = counters.get(car, 0) + 1
            names[key] = f"{car}/{counters[car]}"

    faces: dict[str, ConicalFace] = {}
    bases: dict[str, IntMatrix] = {}
    for key in ordered:
        car, rs = key
        host = target.faces[car]
        lat = saturation(host.rank, rs)
        local = [express_integral(lat.basis, r) for r in keyed[key]]
        varpi = tuple(dot(host.varpi, b) for b in lat.basis)
        faces[names[key]] = ConicalFace(tuple(local), varpi)
        bases[names[key]] = transpose(lat.basis, host.rank)

    embeddings = []
    for kg, kf in sorted(relations, key=lambda p: (order(p[0]), order(p[1]))):
        g, f = names[kg], names[kf]
        if faces[g].rank >= faces[f].rank:
            continue
        a = _single_map(target, kg[0], kf[0])
        cols = []
        for col in transpose(bases[g], faces[g].rank):
            in_f_carrier = apply(a, col)
            cols.append(express_integral(transpose(bases[f], faces[f].rank), in_f_carrier))
        embeddings.append(Embedding(g, f, transpose(cols, faces[g].rank)))
    source = PLComplex(faces, tuple(embeddings), pure=target.pure)
    face_map = {names[k]: k[0] for k in ordered}
    return SubdivisionMap(source, target, face_map, bases)


def identity_subdivision(c: PLComplex) -> SubdivisionMap:
    return SubdivisionMap(c, c, {k: k for k in c.faces}, {k: identity(f.rank) for k, f in c.faces.items()})


def stellar_subdivide(c: PLComplex, face: str, point: Sequence[int]) -> SubdivisionMap:
    """Star subdivision at a primitive lattice point in the relative interior of ``face``."""
    if face not in c.faces:
        raise ZPLError("unknown-face", face)
    sigma = c.faces[face]
    p = tuple(int(x) for x in point)
    if len(p) != sigma.rank:
        raise ZPLError("shape-mismatch", "point has the wrong length")
    if not is_primitive(p):
        raise ZPLError("not-primitive", f"{p} is not primitive")
    if p in sigma.rays:
        return identity_subdivision(c)
    if not sigma.cone.contains(p, relative_interior=True):
        raise ZPLError("not-interior", f"{p} is not in the relative interior of {face}")
    maximal = [k for k in c.faces if not any(s != k for s, _ in c.superfaces(k))]
    cones = []
    for rho in maximal:
        ms = c.maps(face, rho)
        f = c.faces[rho]
        if not ms:
            cones.append((rho, f.rays))
            continue
        a = ms[0]
        image = {apply(a, r) for r in sigma.rays}
        pr = apply(a, p)
        for facet in f.cone.facets:
            fr = [f.rays[i] for i in sorted(facet.rays)]
            if image <= set(fr):
                continue
            cones.append((rho, fr + [pr]))
    return build_refinement(c, cones)


# ---------------------------------------------------------------------------
# two-dimensional resolution


@dataclass(frozen=True)
class HJResolution:
    rays: tuple[IntVector, ...]  # ordered from the first input ray to the second
    cones: tuple[tuple[IntVector, IntVector], ...]

    @property
    def inserted(self) -> tuple[IntVector, ...]:
        return self.rays[1:-1]


def _det2(u: Sequence[int], v: Sequence[int]) -> int:
    return u[0] * v[1] - u[1] * v[0]


def hj_resolve_2d(rays: Sequence[Sequence[int]]) -> HJResolution:
    """Minimal regular subdivision of a 2-dimensional cone.

    Starting from the first ray u, the next ray is (w + k u)/d with
    0 < k < d = det(u, w) chosen so the result is integral; recurse until
    consecutive rays have determinant one.
    """
    if len(rays) != 2 or any(len(r) != 2 for r in rays):
        raise ZPLError("shape-mismatch", "need two rays in Z^2")
    u, w = (tuple(int(x) for x in r) for r in rays)
    if not (is_primitive(u) and is_primitive(w)):
        raise ZPLError("not-primitive", "rays must be primitive")
    d = _det2(u, w)
    if d == 0:
        raise ZPLError("not-full-rank", "rays are dependent")
    flip = d < 0
    if flip:
        u, w = w, u
    seq = [u]
    cur = u
    while True:
        d = _det2(cur, w)
        if d == 1:
            break
        k = next(k for k in range(1, d) if all((wi + k * ci) % d == 0 for wi, ci in zip(w, cur)))
        cur = tuple((wi + k * ci) // d for wi, ci in zip(w, cur))
        seq.append(cur)
    seq.append(w)
    if flip:
        seq.reverse()
    return HJResolution(tuple(seq), tuple(zip(seq[:-1], seq[1:])))


# ---------------------------------------------------------------------------
# checking refinements


def _cone_points(cone: Cone, height: int, grading: IntVector) -> Iterable[IntVector]:
    rays = cone.extreme_rays
    n = cone.n
    tips = [[Fraction(height * x, dot(grading, r)) for x in r] for r in rays]
    lo = [floor(min([0] + [t[j] for t in tips])) for j in range(n)]
    hi = [ceil(max([0] + [t[j] for t in tips])) for j in range(n)]
    for x in product(*(range(a, b + 1) for a, b in zip(lo, hi))):
        if 0 < dot(grading, x) <= height and cone.contains(x):
            yield x


def check_proper_subdivision(m: SubdivisionMap, height: int | None = None) -> Report:
    """Immersions, compatibility, and a lattice-point test of support and injectivity.

    Every lattice point with positive varpi in a face of the target, up to a
    grading bound, must lie in the relative interior of exactly one new face.
    """
    rep = Report()
    src, tgt = m.source, m.target
    images: dict[str, tuple[str, list[IntVector]]] = {}
    for a, face in src.faces.items():
        car = m.face_map.get(a)
        if car not in tgt.faces:
            rep.add("unknown-face", a, f"carrier {car!r} is not a target face")
            continue
        b = m.lattice_maps.get(a)
        host = tgt.faces[car]
        if b is None or len(b) != host.rank or any(len(r) != face.rank for r in b):
            rep.add("immersion", a, "lattice map has the wrong shape")
            continue
        snf = smith_normal_form(b, face.rank)
        if snf.rank != face.rank or any(d != 1 for d in snf.invariants):
            rep.add("immersion", a, "lattice map is not a saturated injection")
        if tuple(dot(host.varpi, col) for col in transpose(b, face.rank)) != face.varpi:
            rep.add("varpi", a)
        img = [apply(b, r) for r in face.rays]
        if not all(host.cone.contains(r) for r in img):
            rep.add("support", a, "image leaves the carrier cone")
            continue
        images[a] = minimal_carrier(tgt, car, img)
    for e in src.embeddings:
        if e.sub not in images or e.sup not in images:
            continue
        ca, cb = m.face_map[e.sub], m.face_map[e.sup]
        lhs = as_matrix(mat_mul(m.lattice_maps[e.sup], e.matrix, src.faces[e.sup].rank))
        ok = any(
            lhs == as_matrix(mat_mul(a, m.lattice_maps[e.sub], tgt.faces[ca].rank)) for a in tgt.maps(ca, cb)
        )
        if not ok:
            rep.add("compatibility", f"{e.sub}->{e.sup}")
    if not rep.ok:
        return rep
    by_carrier: dict[str, list[Cone]] = {}
    for a, (car, rays) in images.items():
        by_carrier.setdefault(car, []).append(Cone(rays, tgt.faces[car].rank))
    for k, face in tgt.faces.items():
        grading = face.cone.positive_grading()
        h = height if height is not None else 2 * max(dot(grading, r) for r in face.rays)
        for x in _cone_points(face.cone, h, grading):
            if dot(face.varpi, x) <= 0 or not face.cone.contains(x, relative_interior=True):
                continue
            hits = sum(1 for cone in by_carrier.get(k, []) if cone.contains(x, relative_interior=True))
            if hits == 0:
                rep.add("support", k, f"lattice point {x} is not covered")
                break
            if hits > 1:
                rep.add("injectivity", k, f"lattice point {x} is covered {hits} times")
                break
    return rep


# ---------------------------------------------------------------------------
# recession complex


@dataclass(frozen=True)
class RecessionCone:
    face: str
    lattice: Lattice  # sublattice of N_face spanned by the recession directions
    rays: tuple[IntVector, ...]  # in N_face coordinates


@dataclass(frozen=True)
class RecessionComplex:
    cones: Mapping[str, RecessionCone]
    inclusions: tuple[tuple[str, str], ...]

    @property
    def rays(self) -> list[tuple[str, IntVector]]:
        return [(k, c.rays[0]) for k, c in self.cones.items() if len(c.rays) == 1]


def recession_complex(c: PLComplex) -> RecessionComplex:
    """Cones of recession directions, each recorded on the smallest face carrying it."""
    found: dict[str, RecessionCone] = {}
    owner: dict[str, str] = {}
    for k in sorted(c.faces, key=lambda k: (c.faces[k].rank, k)):
        face = c.faces[k]
        rec = [face.rays[i] for i in face.recession_indices]
        if not rec:
            continue
        home = k
        for sub, mtx in c.subfaces(k):
            if sub == k or sub not in found:
                continue
            sub_rec = {apply(mtx, r) for r in found[sub].rays}
            if sub_rec == set(rec):
                home = owner[sub]
                break
        owner[k] = home
        if home == k:
            found[k] = RecessionCone(k, saturation(face.rank, rec), tuple(sorted(rec)))
    inclusions = set()
    for a in found:
        for b in found:
            if a == b:
                continue
            for mtx in c.maps(a, b):
                if {apply(mtx, r) for r in found[a].rays} < set(found[b].rays):
                    inclusions.add((a, b))
    return RecessionComplex(found, tuple(sorted(inclusions)))


def unimodular(face: ConicalFace) -> bool:
    return face.is_simplicial and abs(determinant(face.rays)) == 1


__all__ = [
    "HJResolution",
    "RecessionComplex",
    "RecessionCone",
    "SubdivisionMap",
    "build_refinement",
    "check_proper_subdivision",
    "hj_resolve_2d",
    "identity_subdivision",
    "minimal_carrier",
    "recession_complex",
    "stellar_subdivide",
    "unimodular",
]
