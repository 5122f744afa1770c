"""Conformal volumes of rational polytopes.

If the affine span of ``P`` passes through the origin the measure is the
Lebesgue measure for which the lattice of that span has covolume 1.
Otherwise ``P`` is scaled by the least ``rho > 0`` for which the scaled affine
span meets the lattice, measured there, and divided by ``rho**(dim + 1)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Sequence

from .complex import ConicalFace, sigma_minus
from .errors import ZPLError
from .geometry import placing_triangulation, simplex_det
from .linalg import (
    Lattice,
    LatticeMap,
    annihilator,
    express_integral,
    lattice_index,
    mat_vec,
    minimal_scaling_rho,
    rank,
    saturation,
    solve_rational,
    transpose,
    INFINITE,
)


@dataclass(frozen=True)
class VolumeCertificate:
    volume: Fraction
    dim: int
    rho: Fraction
    normalized_volume: Fraction  # Lebesgue volume of rho * P in its affine lattice
    through_origin: bool
    simplices: tuple[tuple[int, ...], ...]


def _to_ambient(points: Sequence[Sequence], ambient: Lattice | None) -> list[tuple[Fraction, ...]]:
    pts = [tuple(Fraction(x) for x in p) for p in points]
    if ambient is None:
        return pts
    out = []
    for p in pts:
        c = ambient.coordinates(p)
        if c is None:
            raise ZPLError("not-in-lattice-span", f"{p} is outside the ambient lattice span")
        out.append(c)
    return out


def conformal_volume(
    polytope: Sequence[Sequence] | ConicalFace,
    ambient: Lattice | None = None,
    order: Sequence[int] | None = None,
) -> VolumeCertificate:
    """Exact conformal volume of the convex hull of rational points.

    ``ambient`` optionally names a sublattice of Z^n whose coordinates should be
    used; by default points live in the standard lattice.  A ``ConicalFace``
    is measured through its slice, which must be bounded.
    """
    if isinstance(polytope, ConicalFace):
        if polytope.recession_indices:
            raise ZPLError("unbounded", "slice has recession directions")
        points = polytope.slice_vertices()
    else:
        points = list(polytope)
    if not points:
        raise ZPLError("empty", "polytope has no points")
    pts = _to_ambient(points, ambient)
    n = len(pts[0])
    if any(len(p) != n for p in pts):
        raise ZPLError("shape-mismatch", "points of different lengths")
    dim, simplices = placing_triangulation(pts, order)
    base = pts[0]
    diffs = [tuple(a - b for a, b in zip(p, base)) for p in pts[1:]]
    direction = saturation(n, [d for d in diffs if any(d)])
    through_origin = rank(diffs + [base], n) == dim if any(base) else True

    if through_origin:
        rho = Fraction(1)
    elif dim == 0:
        rho = minimal_scaling_rho([[1 if i == j else 0 for j in range(n)] for i in range(n)], list(base))
    else:
        a = annihilator(n, diffs)
        rho = minimal_scaling_rho(a, mat_vec(a, base), n)

    scaled = [tuple(rho * x for x in p) for p in pts]
    total = Fraction(0)
    for s in simplices:
        verts = [scaled[i] for i in s]
        if dim == 0:
            total += 1
            continue
        o = verts[0]
        coords = [
            solve_rational(transpose(direction.basis), [a - b for a, b in zip(v, o)], dim) for v in verts[1:]
        ]
        total += simplex_det([[Fraction(0)] * dim] + [list(c) for c in coords]) / factorial(dim)
    volume = total if through_origin else total / rho ** (dim + 1)
    return VolumeCertificate(volume, dim, rho, total, through_origin, tuple(simplices))


def simplicial_face_volume(face: ConicalFace) -> Fraction:
    """det(face) / product of vertex multiplicities."""
    if not face.is_simplicial:
        raise ZPLError("non-simplicial", "face is not simplicial")
    if not face.vertex_indices:
        raise ZPLError("no-vertices", "face has no vertex ray")
    prod = 1
    for i in face.vertex_indices:
        prod *= face.multiplicities[i]
    return Fraction(face.determinant, prod)


def truncation_volume(face: ConicalFace) -> Fraction:
    """Conformal volume of the truncated slice of a simplicial face."""
    return conformal_volume(sigma_minus(face)).volume


def conformal_ratio(points: Sequence[Sequence], f: LatticeMap | Sequence[Sequence[int]]) -> Fraction:
    """vol(f(P)) / vol(P) for a lattice map that keeps the dimension of P.

    The ratio is checked against the index of f restricted to the lattices
    of the linear spans; a mismatch raises ``conformality-violation``.
    """
    if not isinstance(f, LatticeMap):
        f = LatticeMap.of(f)
    src = [tuple(Fraction(x) for x in p) for p in points]
    img = [tuple(mat_vec(f.matrix, p)) for p in src]
    v0 = conformal_volume(src)
    v1 = conformal_volume(img)
    if v1.dim != v0.dim:
        raise ZPLError("dimension-drop", "map collapses the polytope")
    ratio = v1.volume / v0.volume
    n_src = saturation(f.source.rank, src)
    n_tgt = saturation(f.target.rank, img)
    images = [mat_vec(f.matrix, b) for b in n_src.basis]
    coords = [express_integral(n_tgt.basis, v) for v in images]
    idx = lattice_index(transpose(coords, n_src.rank)) if coords else 1
    if idx is INFINITE or Fraction(idx) != ratio:
        raise ZPLError("conformality-violation", f"volume ratio {ratio} but lattice index {idx}")
    return ratio


__all__ = [
    "VolumeCertificate",
    "conformal_volume",
    "simplicial_face_volume",
    "truncation_volume",
    "conformal_ratio",
]
