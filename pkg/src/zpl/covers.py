"""Finite covers of Z-PL complexes, balancing, pullbacks and dilations.

A cover sends every face of the source onto a face of the target of the
same dimension through an injective lattice map ``N_src -> N_tgt`` that
carries the source cone onto the target cone and pulls the target ``varpi``
back to the source ``varpi``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Mapping

from .complex import (
    CombinatorialDivisor,
    ConicalFace,
    Embedding,
    FacetRidgePair,
    PLComplex,
    PLFunction,
    apply,
    face_pairs,
    validate_complex,
)
from .errors import Report, ZPLError
from .linalg import (
    IntMatrix,
    Lattice,
    INFINITE,
    as_matrix,
    dot,
    express_integral,
    kernel_saturation,
    lattice_index,
    mat_mul,
    primitive,
    solve_integer_affine,
    solve_rational,
    transpose,
)
from .subdivision import SubdivisionMap, build_refinement


@dataclass(frozen=True)
class ComplexCover:
    source: PLComplex
    target: PLComplex
    face_map: Mapping[str, str]
    lattice_maps: Mapping[str, IntMatrix]
    residue_degrees: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "face_map", dict(sorted(self.face_map.items())))
        object.__setattr__(self, "lattice_maps", {k: as_matrix(v) for k, v in sorted(self.lattice_maps.items())})
        object.__setattr__(self, "residue_degrees", dict(sorted(self.residue_degrees.items())))

    def residue_degree(self, face: str) -> int:
        return self.residue_degrees.get(face, 1)

    def index(self, face: str) -> int:
        """[N_phi(face) : h(N_face)], which equals [M_face : M_phi(face)]."""
        idx = lattice_index(self.lattice_maps[face])
        if idx is INFINITE:
            raise ZPLError("not-injective", f"lattice map of {face} is not injective")
        return idx

    def ray_image(self, face: str, i: int) -> tuple[int, int]:
        """Target ray index j and k > 0 with h(n_i) = k n_j."""
        tgt = self.target.faces[self.face_map[face]]
        img = apply(self.lattice_maps[face], self.source.faces[face].rays[i])
        p = primitive(img)
        for j, r in enumerate(tgt.rays):
            if r == p:
                t = next(t for t, x in enumerate(p) if x)
                return j, img[t] // p[t]
        raise ZPLError("rays", f"ray {i} of {face} does not map onto a ray")

    def target_pair(self, pair: FacetRidgePair) -> IntMatrix:
        """Embedding of the target ridge into the target facet matching a source pair."""
        s, t = self.face_map[pair.facet], self.face_map[pair.ridge]
        lhs = as_matrix(mat_mul(self.lattice_maps[pair.facet], pair.matrix, self.source.faces[pair.facet].rank))
        for a in self.target.maps(t, s):
            if lhs == as_matrix(mat_mul(a, self.lattice_maps[pair.ridge], self.target.faces[t].rank)):
                return a
        raise ZPLError("embedding-compat", f"{pair.ridge}->{pair.facet} has no compatible target embedding")


def validate_cover(phi: ComplexCover) -> Report:
    rep = Report()
    for name, c in (("source", phi.source), ("target", phi.target)):
        sub = validate_complex(c)
        for issue in sub.violations:
            rep.add(f"{name}-invalid", issue.where, str(issue))
    src, tgt = phi.source, phi.target
    for k, face in src.faces.items():
        t = phi.face_map.get(k)
        if t not in tgt.faces:
            rep.add("unknown-face", k, f"maps to {t!r}")
            continue
        tf = tgt.faces[t]
        if tf.rank != face.rank:
            rep.add("dimension", k, f"{face.dim} -> {tf.dim}")
            continue
        h = phi.lattice_maps.get(k)
        if h is None or len(h) != tf.rank or any(len(r) != face.rank for r in h):
            rep.add("shape", k, "lattice map missing or of the wrong shape")
            continue
        if lattice_index(h) is INFINITE:
            rep.add("not-injective", k)
            continue
        if tuple(dot(tf.varpi, col) for col in transpose(h, face.rank)) != face.varpi:
            rep.add("varpi", k, "target varpi does not pull back to source varpi")
        hit = set()
        for i in range(len(face.rays)):
            try:
                j, mult = phi.ray_image(k, i)
            except ZPLError:
                rep.add("rays", k, f"ray {i} is not sent to a ray")
                break
            if mult <= 0:
                rep.add("rays", k, f"ray {i} is reversed")
            hit.add(j)
        else:
            if hit != set(range(len(tf.rays))):
                rep.add("rays", k, "cone is not mapped onto the target cone")
    missing = set(tgt.faces) - set(phi.face_map.values())
    for k in sorted(missing):
        rep.add("surjectivity", k, "no face maps here")
    if not rep.ok:
        return rep
    for e in src.embeddings:
        a, b = phi.face_map[e.sub], phi.face_map[e.sup]
        lhs = as_matrix(mat_mul(phi.lattice_maps[e.sup], e.matrix, src.faces[e.sup].rank))
        if not any(
            lhs == as_matrix(mat_mul(m, phi.lattice_maps[e.sub], tgt.faces[a].rank)) for m in tgt.maps(a, b)
        ):
            rep.add("embedding-compat", f"{e.sub}->{e.sup}")
    return rep


# ---------------------------------------------------------------------------
# balancing


def _pair_key(p: FacetRidgePair) -> tuple:
    return (p.facet, p.ridge, p.matrix)


def _contributions(phi: ComplexCover, ridge: str) -> dict[tuple, int]:
    """For a source ridge, sum of index * residue degree over source pairs above each target pair."""
    t = phi.face_map[ridge]
    sums: dict[tuple, int] = {}
    for sigma in phi.target.facets:
        for p in face_pairs(phi.target, sigma, t):
            sums[_pair_key(p)] = 0
    for sigma in phi.source.facets:
        for p in face_pairs(phi.source, sigma, ridge):
            a = phi.target_pair(p)
            key = (phi.face_map[p.facet], t, a)
            sums[key] = sums.get(key, 0) + phi.index(p.facet) * phi.residue_degree(p.facet)
    return sums


def local_degree(phi: ComplexCover, ridge: str) -> int:
    sums = _contributions(phi, ridge)
    values = set(sums.values())
    if len(values) != 1:
        labelled = _label_sums(sums)
        raise ZPLError(
            "unbalanced-at-ridge",
            f"{ridge}: " + ", ".join(f"{k}={v}" for k, v in labelled.items()),
            values=labelled,
        )
    return values.pop()


def exceptional_degree(phi: ComplexCover, ridge: str) -> Fraction:
    """[E_ridge : E_target] = local degree / [M_ridge : M_target]."""
    return Fraction(local_degree(phi, ridge), phi.index(ridge))


@dataclass(frozen=True)
class BalanceReport:
    balanced: bool
    local_degrees: Mapping[str, int]
    offending: Mapping[str, Mapping[str, int]]
    global_degree: int | None
    component_degrees: Mapping[str, int]

    def to_payload(self) -> dict:
        return {
            "balanced": self.balanced,
            "local_degrees": dict(self.local_degrees),
            "offending": {k: dict(v) for k, v in self.offending.items()},
            "global_degree": self.global_degree,
            "component_degrees": dict(self.component_degrees),
        }

    @classmethod
    def from_payload(cls, p: Mapping) -> "BalanceReport":
        return cls(
            bool(p["balanced"]),
            {k: int(v) for k, v in p["local_degrees"].items()},
            {k: {a: int(b) for a, b in v.items()} for k, v in p["offending"].items()},
            None if p["global_degree"] is None else int(p["global_degree"]),
            {k: int(v) for k, v in p["component_degrees"].items()},
        )


def _label_sums(sums: dict[tuple, int]) -> dict[str, int]:
    out: dict[str, int] = {}
    for (facet, _, _), v in sorted(sums.items(), key=lambda kv: str(kv[0])):
        name, i = facet, 1
        while name in out:
            i += 1
            name = f"{facet}#{i}"
        out[name] = v
    return out


def balance_report(phi: ComplexCover) -> BalanceReport:
    local: dict[str, int] = {}
    offending: dict[str, dict[str, int]] = {}
    for r in phi.source.ridges:
        sums = _contributions(phi, r)
        vals = set(sums.values())
        if len(vals) == 1:
            local[r] = vals.pop()
        else:
            offending[r] = _label_sums(sums)
    balanced = not offending
    comp_deg: dict[str, int] = {}
    global_deg = None
    if balanced:
        per_ridge: dict[str, int] = {}
        for r, d in local.items():
            t = phi.face_map[r]
            per_ridge[t] = per_ridge.get(t, 0) + d
        for comp in phi.target.components():
            degs = {per_ridge.get(t, 0) for t in comp if t in phi.target.ridges}
            name = min(comp)
            if len(degs) == 1:
                comp_deg[name] = degs.pop()
            else:
                balanced = False
                offending[f"component:{name}"] = {t: per_ridge.get(t, 0) for t in sorted(comp) if t in phi.target.ridges}
        if balanced and len(set(comp_deg.values())) == 1:
            global_deg = next(iter(comp_deg.values()))
    return BalanceReport(balanced, local, offending, global_deg, comp_deg)


def pullback_cycle(phi: ComplexCover, d: CombinatorialDivisor) -> CombinatorialDivisor:
    """phi^*[tau] = sum over tau' above tau of deg_tau' [tau']."""
    br = balance_report(phi)
    if not br.balanced:
        raise ZPLError("unbalanced", "cycles pull back only along balanced covers", offending=br.offending)
    out = {}
    for r in phi.source.ridges:
        c = d[phi.face_map[r]]
        if c:
            out[r] = c * br.local_degrees[r]
    return CombinatorialDivisor(out)


def pullback_function(phi: ComplexCover, f: PLFunction) -> PLFunction:
    cov = {}
    for k, face in phi.source.faces.items():
        g = f.covectors[phi.face_map[k]]
        cov[k] = tuple(dot(g, col) for col in transpose(phi.lattice_maps[k], face.rank))
    return PLFunction(cov)


# ---------------------------------------------------------------------------
# dilation


def _dilated_basis(face: ConicalFace, e: int) -> IntMatrix:
    """Columns spanning {n : <varpi, n> in e Z}."""
    rho = face.root_index
    step = e // gcd(e, rho)
    n0 = solve_integer_affine([list(face.varpi)], [rho])
    gens = list(kernel_saturation([list(face.varpi)]).basis) + [tuple(step * x for x in n0)]
    lat = Lattice(face.rank, as_matrix(gens))
    return transpose(lat.basis, face.rank)


def dilation_cover(c: PLComplex, e: int) -> ComplexCover:
    """Cover induced by the degree-e base extension ramified along varpi.

    The source lattice of a face is {n : <varpi, n> in eZ}; its index is
    e / gcd(e, rho).  Source varpi is the pullback of the target varpi, so
    slices correspond and multiplicities scale by e / gcd(e, m).  Faces where
    gcd(e, rho) > 1 get that gcd as residue degree.
    """
    if e < 1:
        raise ZPLError("bad-degree", "dilation degree must be positive")
    for k, f in c.faces.items():
        if not any(f.varpi):
            raise ZPLError("no-varpi", f"face {k} has zero varpi")
    bases: dict[str, IntMatrix] = {}
    faces: dict[str, ConicalFace] = {}
    residue: dict[str, int] = {}
    for k, f in c.faces.items():
        b = _dilated_basis(f, e)
        bases[k] = b
        cols = transpose(b, f.rank)
        rays = []
        for r, m in zip(f.rays, f.multiplicities):
            kk = e // gcd(e, m) if m else 1
            rays.append(express_integral(cols, [kk * x for x in r]))
        varpi = tuple(dot(f.varpi, col) for col in cols)
        faces[k] = ConicalFace(tuple(rays), varpi)
        residue[k] = gcd(e, f.root_index)
    embeddings = []
    for emb in c.embeddings:
        sub, sup = c.faces[emb.sub], c.faces[emb.sup]
        cols = []
        for col in transpose(bases[emb.sub], sub.rank):
            cols.append(express_integral(transpose(bases[emb.sup], sup.rank), apply(emb.matrix, col)))
        embeddings.append(Embedding(emb.sub, emb.sup, transpose(cols, sub.rank)))
    source = PLComplex(faces, tuple(embeddings), c.multi_adjacency, c.pure)
    return ComplexCover(source, c, {k: k for k in c.faces}, bases, residue)


# ---------------------------------------------------------------------------
# pulling back subdivisions


def pullback_subdivision(phi: ComplexCover, s: SubdivisionMap) -> tuple[SubdivisionMap, ComplexCover]:
    """Refine the source along a refinement of the target.

    Returns the source refinement and the induced cover between the refined
    complexes.
    """
    if s.target != phi.target:
        raise ZPLError("mismatch", "subdivision does not refine the cover's target")
    cones = []
    for a, face in s.source.faces.items():
        car = s.face_map[a]
        img = [apply(s.lattice_maps[a], r) for r in face.rays]
        for k in phi.source.faces:
            if phi.face_map[k] != car:
                continue
            h = phi.lattice_maps[k]
            rank_k = phi.source.faces[k].rank
            pre = [primitive(solve_rational(h, list(v), rank_k)) for v in img]
            cones.append((k, pre))
    s_src = build_refinement(phi.source, cones)
    new_maps: dict[str, str] = {}
    new_lattice: dict[str, IntMatrix] = {}
    index_by_image: dict[tuple[str, frozenset], str] = {}
    for a, face in s.source.faces.items():
        dirs = frozenset(primitive(apply(s.lattice_maps[a], r)) for r in face.rays)
        index_by_image[(s.face_map[a], dirs)] = a
    for a2, face in s_src.source.faces.items():
        car2 = s_src.face_map[a2]
        h = phi.lattice_maps[car2]
        comp = as_matrix(mat_mul(h, s_src.lattice_maps[a2], phi.source.faces[car2].rank))
        dirs = frozenset(primitive(apply(comp, r)) for r in face.rays)
        tgt_face = index_by_image.get((phi.face_map[car2], dirs))
        if tgt_face is None:
            raise ZPLError("mismatch", f"no refined target face under {a2}")
        basis = transpose(s.lattice_maps[tgt_face], s.source.faces[tgt_face].rank)
        cols = [express_integral(basis, col) for col in transpose(comp, face.rank)]
        new_maps[a2] = tgt_face
        new_lattice[a2] = transpose(cols, face.rank)
    residue = {a2: phi.residue_degree(s_src.face_map[a2]) for a2 in s_src.source.faces}
    lifted = ComplexCover(s_src.source, s.source, new_maps, new_lattice, residue)
    return s_src, lifted


# ---------------------------------------------------------------------------
# multiplicity formula


@dataclass(frozen=True)
class ChainRow:
    source_face: str
    target_specialization: str
    lhs: int
    rhs: int

    @property
    def ok(self) -> bool:
        return self.lhs == self.rhs


@dataclass(frozen=True)
class MultiplicityReport:
    rows: tuple[ChainRow, ...]

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.rows)

    def failures(self) -> list[ChainRow]:
        return [r for r in self.rows if not r.ok]


def multiplicity_chain_check(phi: ComplexCover) -> MultiplicityReport:
    """Compare [M_y':M_y] kappa(y') with the sum over codimension-one specializations."""
    rows = []
    src, tgt = phi.source, phi.target
    for y2, face in src.faces.items():
        y = phi.face_map[y2]
        lhs = phi.index(y2) * phi.residue_degree(y2)
        for x in tgt.faces:
            if tgt.faces[x].rank != face.rank + 1:
                continue
            for a in tgt.maps(y, x):
                rhs = 0
                for x2 in src.faces:
                    if phi.face_map[x2] != x:
                        continue
                    for a2 in src.maps(y2, x2):
                        left = as_matrix(mat_mul(phi.lattice_maps[x2], a2, src.faces[x2].rank))
                        right = as_matrix(mat_mul(a, phi.lattice_maps[y2], tgt.faces[y].rank))
                        if left == right:
                            rhs += phi.index(x2) * phi.residue_degree(x2)
                rows.append(ChainRow(y2, x, lhs, rhs))
    return MultiplicityReport(tuple(rows))
