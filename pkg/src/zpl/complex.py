"""Z-PL complexes presented by conical faces and lattice embeddings.

A face is a full-dimensional strictly convex rational cone in Z^r together
with an integer covector ``varpi``; the polyhedron it stands for is the slice
``varpi = 1``.  Rays with ``varpi > 0`` give vertices, rays with ``varpi = 0``
are recession directions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import combinations, product
from typing import Iterator, Mapping, Sequence

from .errors import Report, ZPLError
from .geometry import Cone
from .linalg import (
    IntMatrix,
    IntVector,
    Lattice,
    as_matrix,
    determinant,
    dot,
    identity,
    is_primitive,
    mat_mul,
    mat_vec,
    nullspace,
    primitive,
    rank,
    smith_normal_form,
    solve_integer_affine,
    solve_rational,
    transpose,
    vec_gcd,
)

Rat = Fraction


@dataclass(frozen=True)
class ConicalFace:
    rays: tuple[IntVector, ...]
    varpi: IntVector

    def __post_init__(self) -> None:
        object.__setattr__(self, "rays", as_matrix(self.rays))
        object.__setattr__(self, "varpi", tuple(int(x) for x in self.varpi))

    @property
    def rank(self) -> int:
        return len(self.varpi)

    @property
    def dim(self) -> int:
        return self.rank - 1

    @property
    def lattice(self) -> Lattice:
        return Lattice.standard(self.rank)

    @cached_property
    def multiplicities(self) -> tuple[int, ...]:
        return tuple(dot(self.varpi, r) for r in self.rays)

    @cached_property
    def vertex_indices(self) -> tuple[int, ...]:
        return tuple(i for i, m in enumerate(self.multiplicities) if m > 0)

    @cached_property
    def recession_indices(self) -> tuple[int, ...]:
        return tuple(i for i, m in enumerate(self.multiplicities) if m == 0)

    @property
    def is_bounded(self) -> bool:
        return not self.recession_indices

    @property
    def is_simplicial(self) -> bool:
        return len(self.rays) == self.rank

    @cached_property
    def determinant(self) -> int | None:
        """|det| of the ray matrix, i.e. [N : sum Z n_i], for simplicial faces."""
        if not self.is_simplicial:
            return None
        return abs(determinant(self.rays))

    @property
    def root_index(self) -> int:
        # <varpi, Z^r> = gcd(varpi) Z
        return vec_gcd(self.varpi)

    @cached_property
    def cone(self) -> Cone:
        return Cone(self.rays, self.rank)

    def vertex_point(self, i: int) -> tuple[Fraction, ...]:
        m = self.multiplicities[i]
        if m <= 0:
            raise ZPLError("not-a-vertex", f"ray {i} is a recession direction")
        return tuple(Fraction(x, m) for x in self.rays[i])

    def slice_vertices(self) -> list[tuple[Fraction, ...]]:
        return [self.vertex_point(i) for i in self.vertex_indices]


@dataclass(frozen=True)
class Embedding:
    """Face embedding N_sub -> N_sup; column j is the image of basis vector j."""

    sub: str
    sup: str
    matrix: IntMatrix

    def __post_init__(self) -> None:
        object.__setattr__(self, "matrix", as_matrix(self.matrix))


def _mul(a: IntMatrix, b: IntMatrix, inner: int) -> IntMatrix:
    if inner == 0:
        return tuple(() for _ in a)
    return as_matrix(mat_mul(a, b, inner))


def apply(matrix: IntMatrix, v: Sequence) -> tuple:
    return tuple(mat_vec(matrix, v)) if matrix else ()


@dataclass(frozen=True)
class PLComplex:
    faces: Mapping[str, ConicalFace]
    embeddings: tuple[Embedding, ...] = ()
    multi_adjacency: bool = False
    pure: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "faces", dict(sorted(self.faces.items())))
        object.__setattr__(self, "embeddings", tuple(self.embeddings))

    # -- basic structure ---------------------------------------------------
    @property
    def face_ids(self) -> list[str]:
        return list(self.faces)

    @cached_property
    def dim(self) -> int:
        return max((f.dim for f in self.faces.values()), default=-1)

    def faces_of_dim(self, d: int) -> list[str]:
        return [k for k, f in self.faces.items() if f.dim == d]

    @property
    def facets(self) -> list[str]:
        return self.faces_of_dim(self.dim)

    @property
    def ridges(self) -> list[str]:
        return self.faces_of_dim(self.dim - 1)

    @cached_property
    def _closure(self) -> dict[tuple[str, str], list[IntMatrix]]:
        maps: dict[tuple[str, str], list[IntMatrix]] = {}
        for k, f in self.faces.items():
            maps[(k, k)] = [identity(f.rank)]
        for e in self.embeddings:
            if e.sub not in self.faces or e.sup not in self.faces:
                continue
            lst = maps.setdefault((e.sub, e.sup), [])
            if e.matrix not in lst:
                lst.append(e.matrix)
        changed = True
        while changed:
            changed = False
            for (a, b), ab in list(maps.items()):
                if a == b:
                    continue
                for (b2, c), bc in list(maps.items()):
                    if b2 != b or b == c:
                        continue
                    lst = maps.setdefault((a, c), [])
                    for m1 in ab:
                        for m2 in bc:
                            comp = _mul(m2, m1, self.faces[b].rank)
                            if comp not in lst:
                                lst.append(comp)
                                changed = True
        return maps

    def maps(self, sub: str, sup: str) -> list[IntMatrix]:
        """All embeddings sub -> sup (identity included when equal)."""
        return list(self._closure.get((sub, sup), []))

    def superfaces(self, sub: str) -> list[tuple[str, IntMatrix]]:
        return [(b, m) for (a, b), ms in sorted(self._closure.items()) if a == sub for m in ms]

    def subfaces(self, sup: str) -> list[tuple[str, IntMatrix]]:
        return [(a, m) for (a, b), ms in sorted(self._closure.items()) if b == sup for m in ms]

    def ray_map(self, sub: str, sup: str, matrix: IntMatrix) -> tuple[int, ...] | None:
        """Index in ``sup`` of the image of each ray of ``sub``."""
        src, dst = self.faces[sub], self.faces[sup]
        lookup = {r: j for j, r in enumerate(dst.rays)}
        out = []
        for r in src.rays:
            j = lookup.get(apply(matrix, r))
            if j is None:
                return None
            out.append(j)
        return tuple(out)

    @cached_property
    def ray_classes(self) -> dict[tuple[str, int], str]:
        """Global ray identity via the gluing.

        Vertex rays are named after the 0-dimensional face carrying them when
        there is one; other classes are named ``face#index``.
        """
        parent: dict[tuple[str, int], tuple[str, int]] = {}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for k, f in self.faces.items():
            for i in range(len(f.rays)):
                parent[(k, i)] = (k, i)
        for (a, b), ms in self._closure.items():
            if a == b:
                continue
            for m in ms:
                rm = self.ray_map(a, b, m)
                if rm is None:
                    continue
                for i, j in enumerate(rm):
                    ra, rb = find((a, i)), find((b, j))
                    if ra != rb:
                        parent[max(ra, rb)] = min(ra, rb)
        groups: dict[tuple[str, int], list[tuple[str, int]]] = {}
        for x in parent:
            groups.setdefault(find(x), []).append(x)
        names: dict[tuple[str, int], str] = {}
        for members in groups.values():
            vertex_faces = sorted(k for k, i in members if self.faces[k].rank == 1)
            label = vertex_faces[0] if vertex_faces else "%s#%d" % min(members)
            for x in members:
                names[x] = label
        return names

    def global_rays(self) -> dict[str, list[tuple[str, int]]]:
        out: dict[str, list[tuple[str, int]]] = {}
        for x, name in sorted(self.ray_classes.items()):
            out.setdefault(name, []).append(x)
        return out

    def is_connected(self) -> bool:
        return len(self.components()) <= 1

    def components(self) -> list[set[str]]:
        adj: dict[str, set[str]] = {k: set() for k in self.faces}
        for e in self.embeddings:
            if e.sub in adj and e.sup in adj:
                adj[e.sub].add(e.sup)
                adj[e.sup].add(e.sub)
        seen: set[str] = set()
        comps = []
        for k in self.faces:
            if k in seen:
                continue
            stack, comp = [k], set()
            while stack:
                x = stack.pop()
                if x in comp:
                    continue
                comp.add(x)
                stack.extend(adj[x] - comp)
            seen |= comp
            comps.append(comp)
        return comps


# ---------------------------------------------------------------------------
# face analysis


@dataclass(frozen=True)
class VertexRay:
    index: int
    multiplicity: int
    point: tuple[Fraction, ...]


@dataclass(frozen=True)
class FaceAnalysis:
    rank: int
    n_rays: int
    vertices: tuple[VertexRay, ...]
    recession: tuple[int, ...]
    simplicial: bool
    determinant: int | None
    root_index: int


def analyze_face(face: ConicalFace) -> FaceAnalysis:
    if not face.vertex_indices:
        raise ZPLError("empty-slice", "varpi vanishes on every ray")
    for r in face.rays:
        if not is_primitive(r):
            raise ZPLError("not-primitive", f"ray {r} is not primitive")
    if rank(face.rays, face.rank) != face.rank:
        raise ZPLError("not-full-rank", "rays do not span the face lattice")
    if not face.cone.is_strictly_convex:
        raise ZPLError("not-strictly-convex", "cone contains a line")
    return FaceAnalysis(
        rank=face.rank,
        n_rays=len(face.rays),
        vertices=tuple(VertexRay(i, face.multiplicities[i], face.vertex_point(i)) for i in face.vertex_indices),
        recession=face.recession_indices,
        simplicial=face.is_simplicial,
        determinant=face.determinant,
        root_index=face.root_index,
    )


def sigma_minus(face: ConicalFace) -> list[tuple[Fraction, ...]]:
    """Vertices of the truncation: each slice vertex plus any subset of recession rays."""
    if not face.is_simplicial:
        raise ZPLError("non-simplicial", "truncation is defined for simplicial faces")
    rec = [face.rays[j] for j in face.recession_indices]
    out = []
    for i in face.vertex_indices:
        v = face.vertex_point(i)
        for mask in product((0, 1), repeat=len(rec)):
            p = list(v)
            for bit, r in zip(mask, rec):
                if bit:
                    p = [a + b for a, b in zip(p, r)]
            out.append(tuple(p))
    return out


# ---------------------------------------------------------------------------
# validation


def _check_face(fid: str, f: ConicalFace, rep: Report) -> bool:
    if any(len(r) != f.rank for r in f.rays):
        rep.add("shape", fid, "ray length differs from varpi length")
        return False
    for r in f.rays:
        if not is_primitive(r):
            rep.add("ray-not-primitive", fid, str(r))
    if rank(f.rays, f.rank) != f.rank:
        rep.add("rays-not-spanning", fid, "rays must span the face lattice rationally")
        return False
    if not f.cone.is_strictly_convex:
        rep.add("not-strictly-convex", fid)
        return False
    if len(set(f.rays)) != len(f.rays) or len(f.cone.extreme_indices) != len(f.rays):
        rep.add("ray-not-extreme", fid, "every listed ray must span a distinct extreme ray")
    if any(m < 0 for m in f.multiplicities):
        rep.add("varpi-negative", fid, str(f.multiplicities))
    if not any(m > 0 for m in f.multiplicities):
        rep.add("empty-slice", fid)
    return True


def validate_complex(c: PLComplex) -> Report:
    rep = Report()
    good = {k for k, f in c.faces.items() if _check_face(k, f, rep)}

    for e in c.embeddings:
        where = f"{e.sub}->{e.sup}"
        if e.sub not in c.faces or e.sup not in c.faces:
            rep.add("unknown-face", where)
            continue
        if e.sub not in good or e.sup not in good:
            continue
        a, b = c.faces[e.sub], c.faces[e.sup]
        if len(e.matrix) != b.rank or any(len(r) != a.rank for r in e.matrix) or a.rank >= b.rank:
            rep.add("shape", where, "embedding must be a (rank sup) x (rank sub) matrix with rank sub < rank sup")
            continue
        snf = smith_normal_form(e.matrix, a.rank)
        if snf.rank != a.rank or any(d != 1 for d in snf.invariants):
            rep.add("embedding-not-saturated", where)
        if tuple(dot(b.varpi, col) for col in transpose(e.matrix, a.rank)) != a.varpi:
            rep.add("varpi-pullback", where)
        rm = c.ray_map(e.sub, e.sup, e.matrix)
        if rm is None:
            rep.add("embedding-rays", where, "rays must map to rays")
        elif frozenset(rm) not in set(b.cone.faces()):
            rep.add("embedding-not-face", where)

    # every face of each cone meeting the slice must be present
    for k in sorted(good):
        f = c.faces[k]
        images = set()
        for sub, m in c.subfaces(k):
            rm = c.ray_map(sub, k, m)
            if rm is not None:
                images.add(frozenset(rm))
        for face in f.cone.faces():
            if face and any(f.multiplicities[i] > 0 for i in face) and face not in images:
                rep.add("missing-face", k, f"cone face on rays {sorted(face)} has no embedded face")

    if not c.multi_adjacency:
        for (a, b), ms in c._closure.items():
            if a != b and len(ms) > 1:
                rep.add("embedding-composition", f"{a}->{b}", "distinct embeddings between the same faces")
        ids = list(c.faces)
        for s1, s2 in combinations(ids, 2):
            common = [t for t in ids if c.maps(t, s1) and c.maps(t, s2)]
            maximal = [t for t in common if not any(u != t and c.maps(t, u) for u in common)]
            if len(maximal) > 1:
                rep.add("intersection", f"{s1},{s2}", f"several maximal common faces {maximal}")

    if c.pure and c.faces:
        for k in c.faces:
            if not any(c.faces[s].dim == c.dim for s, _ in c.superfaces(k)):
                rep.add("not-pure", k, "not contained in a face of top dimension")
    return rep


# ---------------------------------------------------------------------------
# facet-ridge pairs, stars and normal vectors


@dataclass(frozen=True)
class FacetRidgePair:
    facet: str
    ridge: str
    matrix: IntMatrix
    ray_map: tuple[int, ...]
    extra: tuple[int, ...]  # facet rays outside the image of the ridge

    @property
    def extra_ray(self) -> int:
        if len(self.extra) != 1:
            raise ZPLError("non-simplicial", "facet is not simplicial over the ridge")
        return self.extra[0]


def face_pairs(c: PLComplex, sup: str, sub: str) -> list[FacetRidgePair]:
    out = []
    for m in c.maps(sub, sup):
        rm = c.ray_map(sub, sup, m)
        if rm is None:
            raise ZPLError("invalid-complex", f"embedding {sub}->{sup} does not map rays to rays")
        extra = tuple(j for j in range(len(c.faces[sup].rays)) if j not in rm)
        out.append(FacetRidgePair(sup, sub, m, rm, extra))
    return out


def facet_ridge_pairs(c: PLComplex) -> list[FacetRidgePair]:
    """One entry per embedding of a ridge into a facet."""
    if c.dim < 1:
        return []
    for k in c.faces:
        if not any(c.faces[s].dim == c.dim for s, _ in c.superfaces(k)):
            raise ZPLError("not-pure", f"face {k} lies in no facet")
    out = []
    for sigma in c.facets:
        for tau in c.ridges:
            out.extend(face_pairs(c, sigma, tau))
    return out


@dataclass(frozen=True)
class StarLink:
    face: str
    star: tuple[str, ...]
    link_rays: tuple[tuple[str, int], ...]  # (face in star, ray index outside the image)


def star_link(c: PLComplex, face: str) -> StarLink:
    if face not in c.faces:
        raise ZPLError("unknown-face", face)
    star = sorted({s for s, _ in c.superfaces(face)})
    link = []
    for s in star:
        if s == face:
            continue
        for p in face_pairs(c, s, face):
            link.extend((s, j) for j in p.extra)
    return StarLink(face, tuple(star), tuple(sorted(set(link))))


@dataclass(frozen=True)
class NormalVector:
    covector: IntVector  # primitive generator of ker(M_sigma -> M_tau), positive off tau
    vector: IntVector  # representative of the generator of N_sigma / N_tau
    extra_ray: int | None
    ray_pairing: int | None  # <covector, extra ray> = [N_sigma : N_tau + Z n_r]


def primitive_normal_vector(c: PLComplex, sigma: str, tau: str, matrix: IntMatrix | None = None) -> NormalVector:
    s, t = c.faces[sigma], c.faces[tau]
    if s.rank != t.rank + 1:
        raise ZPLError("not-codimension-one", f"{tau} is not a ridge of {sigma}")
    ms = c.maps(tau, sigma)
    if not ms:
        raise ZPLError("not-a-face", f"{tau} is not a face of {sigma}")
    if matrix is None:
        if len(ms) > 1:
            raise ZPLError("ambiguous-embedding", "pass the embedding explicitly")
        matrix = ms[0]
    cols = transpose(matrix, t.rank)
    u = primitive(nullspace(cols, s.rank)[0])
    rm = c.ray_map(tau, sigma, matrix) or ()
    extra = [j for j in range(len(s.rays)) if j not in rm]
    if extra and dot(u, s.rays[extra[0]]) < 0:
        u = tuple(-x for x in u)
    # some n with <u, n> = 1
    n = solve_integer_affine([list(u)], [1])
    single = extra[0] if len(extra) == 1 else None
    return NormalVector(
        covector=u,
        vector=n,
        extra_ray=single,
        ray_pairing=dot(u, s.rays[single]) if single is not None else None,
    )


# ---------------------------------------------------------------------------
# PL functions and divisors


@dataclass(frozen=True)
class PLFunction:
    """A per-face linear covector on N_sigma (rational coefficients)."""

    covectors: Mapping[str, tuple[Fraction, ...]]

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "covectors", {k: tuple(Fraction(x) for x in v) for k, v in sorted(self.covectors.items())}
        )

    def on_ray(self, c: PLComplex, face: str, i: int) -> Fraction:
        return dot(self.covectors[face], c.faces[face].rays[i])

    def at_vertex(self, c: PLComplex, face: str, i: int) -> Fraction:
        return self.on_ray(c, face, i) / c.faces[face].multiplicities[i]

    def __add__(self, other: "PLFunction") -> "PLFunction":
        return PLFunction({k: tuple(a + b for a, b in zip(v, other.covectors[k])) for k, v in self.covectors.items()})

    def __neg__(self) -> "PLFunction":
        return PLFunction({k: tuple(-a for a in v) for k, v in self.covectors.items()})

    def __sub__(self, other: "PLFunction") -> "PLFunction":
        return self + (-other)

    def scale(self, q) -> "PLFunction":
        q = Fraction(q)
        return PLFunction({k: tuple(q * a for a in v) for k, v in self.covectors.items()})


def validate_pl_function(c: PLComplex, f: PLFunction) -> Report:
    rep = Report()
    for k, face in c.faces.items():
        if k not in f.covectors:
            rep.add("missing-covector", k)
        elif len(f.covectors[k]) != face.rank:
            rep.add("shape", k)
    if not rep.ok:
        return rep
    for (a, b), ms in c._closure.items():
        if a == b:
            continue
        for m in ms:
            pulled = tuple(dot(f.covectors[b], col) for col in transpose(m, c.faces[a].rank))
            if pulled != f.covectors[a]:
                rep.add("incompatible-covectors", f"{a}->{b}")
    return rep


def pl_function_from_values(c: PLComplex, values: Mapping[str, object]) -> PLFunction:
    """Build a PL function from values on global rays.

    For a vertex ray the value is taken at the vertex point ``n/m``; for a
    recession ray it is the slope ``F(n)``.  Every face must be simplicial.
    """
    classes = c.ray_classes
    cov = {}
    for k, face in c.faces.items():
        if not face.is_simplicial:
            raise ZPLError("non-simplicial", f"face {k} needs explicit covectors")
        rhs = []
        for i, m in enumerate(face.multiplicities):
            name = classes[(k, i)]
            if name not in values:
                raise ZPLError("missing-value", f"no value for ray class {name}")
            v = Fraction(values[name])
            rhs.append(v * m if m > 0 else v)
        sol = solve_rational(list(face.rays), rhs, face.rank)
        if sol is None:
            raise ZPLError("singular", k)
        cov[k] = sol
    return PLFunction(cov)


def varpi_function(c: PLComplex) -> PLFunction:
    """The function equal to 1 on every slice, i.e. varpi itself."""
    return PLFunction({k: f.varpi for k, f in c.faces.items()})


@dataclass(frozen=True)
class CombinatorialDivisor:
    coefficients: Mapping[str, Fraction] = field(default_factory=dict)

    def __post_init__(self) -> None:
        clean = {k: Fraction(v) for k, v in sorted(self.coefficients.items()) if Fraction(v) != 0}
        object.__setattr__(self, "coefficients", clean)

    def __getitem__(self, k: str) -> Fraction:
        return self.coefficients.get(k, Fraction(0))

    def __add__(self, other: "CombinatorialDivisor") -> "CombinatorialDivisor":
        keys = set(self.coefficients) | set(other.coefficients)
        return CombinatorialDivisor({k: self[k] + other[k] for k in keys})

    def __neg__(self) -> "CombinatorialDivisor":
        return CombinatorialDivisor({k: -v for k, v in self.coefficients.items()})

    def __sub__(self, other: "CombinatorialDivisor") -> "CombinatorialDivisor":
        return self + (-other)

    def scale(self, q) -> "CombinatorialDivisor":
        return CombinatorialDivisor({k: Fraction(q) * v for k, v in self.coefficients.items()})

    def support(self) -> list[str]:
        return list(self.coefficients)

    def is_zero(self) -> bool:
        return not self.coefficients

    def degree(self) -> Fraction:
        return sum(self.coefficients.values(), Fraction(0))


def iter_pairs_at(c: PLComplex, ridge: str) -> Iterator[FacetRidgePair]:
    for sigma in c.facets:
        yield from face_pairs(c, sigma, ridge)
