"""Tropical complexes: slopes, Laplacians, specialization and canonical divisors.

A tropical complex is a simplicial Z-PL complex with constants ``alpha``
attached to each ray of each ridge.  For a ridge ``tau`` write

    mult_b(tau) = sum over link vertex rays r of m_r * det(tau)/det(sigma)
    mult_u(tau) = sum over link recession rays r of det(tau)/det(sigma)

where ``sigma`` runs over facet-ridge pairs and ``r`` is the extra ray.  The
constants must satisfy ``sum_{w vertex of tau} m_w alpha_w = mult_b(tau)``.
Divisors produced here live on vertical ridges only.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .complex import (
    CombinatorialDivisor,
    FacetRidgePair,
    PLComplex,
    PLFunction,
    face_pairs,
    validate_complex,
    validate_pl_function,
)
from .covers import (
    ComplexCover,
    dilation_cover,
    exceptional_degree,
    pullback_cycle,
    validate_cover,
)
from .errors import Report, ZPLError
from .linalg import determinant, dot, transpose
from .measure import simplicial_face_volume


@dataclass(frozen=True)
class TropicalComplex:
    base: PLComplex
    alpha: Mapping[str, tuple[Fraction, ...]]
    vertical: Mapping[str, bool] = field(default_factory=dict)
    genus: Mapping[str, int] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "alpha", {k: tuple(Fraction(x) for x in v) for k, v in sorted(self.alpha.items())}
        )
        object.__setattr__(self, "vertical", {k: bool(v) for k, v in sorted(self.vertical.items())})
        if self.genus is not None:
            object.__setattr__(self, "genus", {k: int(v) for k, v in sorted(self.genus.items())})

    def is_vertical(self, ridge: str) -> bool:
        return self.vertical.get(ridge, True)

    @property
    def vertical_ridges(self) -> list[str]:
        return [r for r in self.base.ridges if self.is_vertical(r)]

    def pairs_at(self, ridge: str) -> list[FacetRidgePair]:
        out = []
        for sigma in self.base.facets:
            out.extend(face_pairs(self.base, sigma, ridge))
        return out


def intersection_number(c: PLComplex | TropicalComplex, pair: FacetRidgePair) -> Fraction:
    """[E_r] . E_tau = 1 / [N_sigma : N_tau + Z n_r].

    The index is computed from the lattice and cross-checked against
    det(tau) / det(sigma).
    """
    if isinstance(c, TropicalComplex):
        c = c.base
    sigma, tau = c.faces[pair.facet], c.faces[pair.ridge]
    r = pair.extra_ray
    cols = list(transpose(pair.matrix, tau.rank)) + [sigma.rays[r]]
    index = abs(determinant(transpose(cols)))
    if index == 0:
        raise ZPLError("degenerate-pair", f"{pair.ridge}->{pair.facet}")
    by_lattice = Fraction(1, index)
    if tau.determinant is not None and sigma.determinant is not None:
        by_det = Fraction(tau.determinant, sigma.determinant)
        if by_det != by_lattice:
            raise ZPLError("inconsistent-intersection", f"{by_lattice} vs {by_det} at {pair.ridge}->{pair.facet}")
    return by_lattice


def mult_b(t: TropicalComplex, ridge: str) -> Fraction:
    total = Fraction(0)
    for p in t.pairs_at(ridge):
        m = t.base.faces[p.facet].multiplicities[p.extra_ray]
        if m > 0:
            total += m * intersection_number(t.base, p)
    return total


def mult_u(t: TropicalComplex, ridge: str) -> Fraction:
    total = Fraction(0)
    for p in t.pairs_at(ridge):
        if t.base.faces[p.facet].multiplicities[p.extra_ray] == 0:
            total += intersection_number(t.base, p)
    return total


def validate_tropical(t: TropicalComplex) -> Report:
    rep = Report()
    base_rep = validate_complex(t.base)
    rep.extend(base_rep)
    if not base_rep.ok:
        return rep
    c = t.base
    if c.dim < 1:
        rep.add("dimension", "complex", "tropical structure needs dimension at least one")
        return rep
    for k, f in c.faces.items():
        if not f.is_simplicial:
            rep.add("non-simplicial", k)
    if not rep.ok:
        return rep
    for k in t.vertical:
        if k not in c.faces or c.faces[k].dim != c.dim - 1:
            rep.add("unknown-face", k, "vertical flag on something that is not a ridge")
    if t.genus is not None:
        for k, g in t.genus.items():
            if k not in c.faces:
                rep.add("unknown-face", k, "genus on an unknown face")
            elif g < 0:
                rep.add("genus", k, "negative genus")
    for tau in c.ridges:
        face = c.faces[tau]
        a = t.alpha.get(tau)
        if a is None:
            rep.add("alpha-missing", tau)
            continue
        if len(a) != len(face.rays):
            rep.add("shape", tau, "one alpha per ray of the ridge")
            continue
        lhs = sum((m * x for m, x in zip(face.multiplicities, a) if m > 0), Fraction(0))
        rhs = mult_b(t, tau)
        if lhs != rhs:
            rep.add("alpha-constraint", tau, f"sum m*alpha = {lhs} but mult_b = {rhs}")
        if mult_u(t, tau) == 0 and any(x for m, x in zip(face.multiplicities, a) if m == 0):
            rep.warn("degenerate-mult-u", tau, "recession constants with no recession link")
    for k in t.alpha:
        if k not in c.faces or c.faces[k].dim != c.dim - 1:
            rep.add("unknown-face", k, "alpha on something that is not a ridge")
    return rep


def _require_function(t: TropicalComplex, f: PLFunction) -> None:
    rep = validate_pl_function(t.base, f)
    if not rep.ok:
        raise ZPLError("invalid-function", "; ".join(str(i) for i in rep.violations))


def _ridge_sums(t: TropicalComplex, f: PLFunction, ridge: str) -> tuple[Fraction, Fraction]:
    face = t.base.faces[ridge]
    cov = f.covectors[ridge]
    a = t.alpha[ridge]
    vert = sum((x * dot(cov, r) for x, r, m in zip(a, face.rays, face.multiplicities) if m > 0), Fraction(0))
    rec = sum((x * dot(cov, r) for x, r, m in zip(a, face.rays, face.multiplicities) if m == 0), Fraction(0))
    return vert, rec


def slope(t: TropicalComplex, f: PLFunction, pair: FacetRidgePair) -> Fraction:
    """Outgoing slope of f along the facet of a facet-ridge pair."""
    c = t.base
    sigma = c.faces[pair.facet]
    r = pair.extra_ray
    value = dot(f.covectors[pair.facet], sigma.rays[r])
    vert, rec = _ridge_sums(t, f, pair.ridge)
    m = sigma.multiplicities[r]
    if m > 0:
        bracket = value / m - vert / mult_b(t, pair.ridge)
    else:
        bracket = value - rec / mult_u(t, pair.ridge)
    return bracket / simplicial_face_volume(sigma)


def _check_degenerate(t: TropicalComplex, f: PLFunction, ridge: str) -> None:
    vert, rec = _ridge_sums(t, f, ridge)
    if rec and mult_u(t, ridge) == 0:
        raise ZPLError("degenerate-mult-u", f"ridge {ridge}: recession correction {rec} with mult_u = 0")
    if vert and mult_b(t, ridge) == 0:
        raise ZPLError("degenerate-mult-b", f"ridge {ridge}: vertex correction {vert} with mult_b = 0")


def laplacian(t: TropicalComplex, f: PLFunction) -> CombinatorialDivisor:
    _require_function(t, f)
    out: dict[str, Fraction] = {}
    for tau in t.vertical_ridges:
        _check_degenerate(t, f, tau)
        out[tau] = sum((slope(t, f, p) for p in t.pairs_at(tau)), Fraction(0))
    return CombinatorialDivisor(out)


def laplacian_split(t: TropicalComplex, f: PLFunction) -> tuple[CombinatorialDivisor, CombinatorialDivisor]:
    """Contributions of bounded and of unbounded facets."""
    _require_function(t, f)
    bounded: dict[str, Fraction] = {}
    unbounded: dict[str, Fraction] = {}
    for tau in t.vertical_ridges:
        _check_degenerate(t, f, tau)
        for p in t.pairs_at(tau):
            target = bounded if t.base.faces[p.facet].is_bounded else unbounded
            target[tau] = target.get(tau, Fraction(0)) + slope(t, f, p)
    return CombinatorialDivisor(bounded), CombinatorialDivisor(unbounded)


def intersection_with_ridge(t: TropicalComplex, f: PLFunction, ridge: str) -> Fraction:
    """D_f . E_ridge."""
    total = Fraction(0)
    for p in t.pairs_at(ridge):
        total += dot(f.covectors[p.facet], t.base.faces[p.facet].rays[p.extra_ray]) * intersection_number(t.base, p)
    face = t.base.faces[ridge]
    cov = f.covectors[ridge]
    total -= sum((a * dot(cov, r) for a, r in zip(t.alpha[ridge], face.rays)), Fraction(0))
    return total


def specialize(t: TropicalComplex, f: PLFunction) -> CombinatorialDivisor:
    _require_function(t, f)
    return CombinatorialDivisor(
        {
            tau: intersection_with_ridge(t, f, tau) / simplicial_face_volume(t.base.faces[tau])
            for tau in t.vertical_ridges
        }
    )


def weil_cycle(t: TropicalComplex | PLComplex, f: PLFunction) -> dict[str, Fraction]:
    """Coefficient F(n_r) on each global ray."""
    c = t.base if isinstance(t, TropicalComplex) else t
    out: dict[str, Fraction] = {}
    for (k, i), name in sorted(c.ray_classes.items()):
        v = dot(f.covectors[k], c.faces[k].rays[i])
        if name in out and out[name] != v:
            raise ZPLError("invalid-function", f"inconsistent values on ray {name}")
        out[name] = v
    return out


def classify_function(t: TropicalComplex, f: PLFunction) -> str:
    """'harmonic', 'strongly-convex', 'convex' or 'none' from the signs of D_f . E_tau."""
    _require_function(t, f)
    vals = [intersection_with_ridge(t, f, tau) for tau in t.vertical_ridges]
    if all(v == 0 for v in vals):
        return "harmonic"
    if all(v > 0 for v in vals):
        return "strongly-convex"
    if all(v >= 0 for v in vals):
        return "convex"
    return "none"


# ---------------------------------------------------------------------------
# canonical divisors and covers


def euler_characteristic(t: TropicalComplex, ridge: str) -> int:
    """2 - 2g - val, with val counting facet-ridge pairs."""
    if t.genus is None:
        raise ZPLError("missing-genus", "genus data is required")
    return 2 - 2 * t.genus.get(ridge, 0) - len(t.pairs_at(ridge))


def canonical_divisor(t: TropicalComplex) -> CombinatorialDivisor:
    return CombinatorialDivisor(
        {
            tau: Fraction(-euler_characteristic(t, tau)) / simplicial_face_volume(t.base.faces[tau])
            for tau in t.vertical_ridges
        }
    )


@dataclass(frozen=True)
class TropicalCover:
    cover: ComplexCover
    source: TropicalComplex
    target: TropicalComplex


def validate_tropical_cover(tc: TropicalCover) -> Report:
    """Cover axioms plus transfer of the constants alpha along the cover.

    If h(n_r') = k n_r then k * alpha'_r' must equal [E_tau' : E_tau] alpha_r.
    """
    phi = tc.cover
    rep = validate_cover(phi)
    if tc.source.base != phi.source or tc.target.base != phi.target:
        rep.add("mismatch", "cover", "tropical data sits on different complexes")
    if not rep.ok:
        return rep
    rep.extend(validate_tropical(tc.source))
    rep.extend(validate_tropical(tc.target))
    if not rep.ok:
        return rep
    for tau2 in phi.source.ridges:
        tau = phi.face_map[tau2]
        if tc.source.is_vertical(tau2) != tc.target.is_vertical(tau):
            rep.add("vertical-mismatch", tau2)
        try:
            deg = exceptional_degree(phi, tau2)
        except ZPLError as exc:
            rep.add(exc.code, tau2, str(exc))
            continue
        for i, a2 in enumerate(tc.source.alpha[tau2]):
            j, k = phi.ray_image(tau2, i)
            if k * a2 != deg * tc.target.alpha[tau][j]:
                rep.add("alpha-transfer", tau2, f"ray {i}: {k}*{a2} != {deg}*{tc.target.alpha[tau][j]}")
    return rep


def relative_canonical(tc: TropicalCover) -> CombinatorialDivisor:
    phi = tc.cover
    out = {}
    for tau2 in tc.source.vertical_ridges:
        tau = phi.face_map[tau2]
        chi2 = euler_characteristic(tc.source, tau2)
        chi = euler_characteristic(tc.target, tau)
        e = exceptional_degree(phi, tau2)
        out[tau2] = -(chi2 - e * chi) / simplicial_face_volume(phi.source.faces[tau2])
    return CombinatorialDivisor(out)


def adjunction_residual(tc: TropicalCover) -> CombinatorialDivisor:
    """K_rel - (K_source - phi^* K_target); zero when adjunction holds."""
    pulled = pullback_cycle(tc.cover, canonical_divisor(tc.target))
    vertical = set(tc.source.vertical_ridges)
    pulled = CombinatorialDivisor({k: v for k, v in pulled.coefficients.items() if k in vertical})
    return relative_canonical(tc) - (canonical_divisor(tc.source) - pulled)


@dataclass(frozen=True)
class RHReport:
    passed: bool
    nonnegative: bool
    laplacian: CombinatorialDivisor
    relative_canonical: CombinatorialDivisor
    residual: CombinatorialDivisor


def rh_check(tc: TropicalCover, different: PLFunction) -> RHReport:
    """Does the Laplacian of a nonnegative function equal the relative canonical divisor?"""
    src = tc.source.base
    nonneg = all(dot(different.covectors[k], r) >= 0 for k, f in src.faces.items() for r in f.rays)
    lap = laplacian(tc.source, different)
    krel = relative_canonical(tc)
    residual = krel - lap
    return RHReport(nonneg and residual.is_zero(), nonneg, lap, krel, residual)


def dilate_tropical(t: TropicalComplex, e: int) -> TropicalCover:
    """Dilation cover with constants transferred by k * alpha' = [E':E] alpha."""
    phi = dilation_cover(t.base, e)
    alpha = {}
    for tau in phi.source.ridges:
        deg = exceptional_degree(phi, tau)
        vals = []
        for i, a in enumerate(t.alpha[tau]):
            _, k = phi.ray_image(tau, i)
            vals.append(deg * a / k)
        alpha[tau] = tuple(vals)
    src = TropicalComplex(phi.source, alpha, dict(t.vertical), None if t.genus is None else dict(t.genus))
    return TropicalCover(phi, src, t)


__all__ = [
    "RHReport",
    "TropicalComplex",
    "TropicalCover",
    "adjunction_residual",
    "canonical_divisor",
    "classify_function",
    "dilate_tropical",
    "euler_characteristic",
    "intersection_number",
    "intersection_with_ridge",
    "laplacian",
    "laplacian_split",
    "mult_b",
    "mult_u",
    "relative_canonical",
    "rh_check",
    "slope",
    "specialize",
    "validate_tropical",
    "validate_tropical_cover",
    "weil_cycle",
]
