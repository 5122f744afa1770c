"""Small named complexes and covers used by fixtures, the CLI and tests."""

from __future__ import annotations

from fractions import Fraction
from typing import Mapping, Sequence

from .complex import ConicalFace, Embedding, PLComplex
from .geometry import Cone
from .linalg import dot, express_integral, saturation, transpose
from .covers import ComplexCover
from .monoids import AffineMonoid
from .tropical import TropicalComplex, TropicalCover, mult_b

# Segments cut out by 2x + 2y = 1 and x + 2y = 1 inside the positive quadrant.
SEGMENT_I = [(Fraction(1, 2), Fraction(0)), (Fraction(0), Fraction(1, 2))]
SEGMENT_J = [(Fraction(1), Fraction(0)), (Fraction(0), Fraction(1, 2))]
DOUBLING_MAP = ((2, 0), (0, 1))

FIVE_RAY_MONOID_GENERATORS = ((1, 2), (1, 1), (1, 0), (1, -1), (1, -2))
FIVE_RAY_MONOID_VARPI = (1, 0)


def five_ray_monoid() -> AffineMonoid:
    return AffineMonoid.of(FIVE_RAY_MONOID_GENERATORS)


def rectangle_face() -> ConicalFace:
    """Cone over a unit square at height one: varpi = tu = vw."""
    return ConicalFace(((1, 0, 0), (1, 1, 0), (1, 0, 1), (1, 1, 1)), (1, 0, 0))


def rectangle_complex() -> PLComplex:
    f = rectangle_face()
    return complex_from_cones(3, dict(enumerate(f.rays)), [range(4)])


def five_ray_complex() -> PLComplex:
    """Dual cone of the monoid on (1,2),(1,1),(1,0),(1,-1),(1,-2), cut by varpi = (1,0)."""
    return complex_from_cones(2, {0: (2, -1), 1: (2, 1)}, [(0, 1)])


def segments_complex() -> PLComplex:
    """Faces I (2x + 2y = 1) and J (x + 2y = 1) with their endpoints."""
    return graph_complex({"I0": 2, "I1": 2, "J0": 1, "J1": 2}, [("I", "I0", "I1"), ("J", "J0", "J1")])


def complex_from_cones(
    n: int,
    rays: Mapping,
    tops: Sequence[Sequence],
    varpi: Sequence[int] | None = None,
) -> PLComplex:
    """Glue cones on labelled global rays in Z^n along their common faces.

    ``varpi`` defaults to the first coordinate.  Each face gets the saturated
    lattice of its span.  Faces whose rays all have varpi zero have an empty
    slice and are left out.
    """
    w = tuple(varpi) if varpi is not None else (1,) + (0,) * (n - 1)
    cells = set()
    for top in tops:
        labels = sorted(top)
        cone = Cone([rays[i] for i in labels], n)
        for face in cone.faces():
            cell = tuple(labels[i] for i in sorted(face))
            if cell and any(dot(w, rays[i]) > 0 for i in cell):
                cells.add(cell)
    name = lambda s: "s" + "_".join(str(i) for i in s)  # noqa: E731
    bases = {}
    faces = {}
    for s in sorted(cells):
        lat = saturation(n, [rays[i] for i in s])
        bases[s] = lat.basis
        local = tuple(express_integral(lat.basis, rays[i]) for i in s)
        faces[name(s)] = ConicalFace(local, tuple(dot(w, b) for b in lat.basis))
    embeddings = []
    for s in sorted(cells):
        for t in sorted(cells):
            if set(t) < set(s) and len(bases[t]) == len(bases[s]) - 1:
                cols = [express_integral(bases[s], b) for b in bases[t]]
                embeddings.append(Embedding(name(t), name(s), transpose(cols, len(t))))
    return PLComplex(faces, tuple(embeddings))


def graph_complex(
    vertices: Mapping[str, int],
    edges: Sequence[tuple[str, str, str]],
    legs: Sequence[tuple[str, str]] = (),
) -> PLComplex:
    """One-dimensional complex from a multigraph.

    ``vertices`` maps names to multiplicities, ``edges`` are (name, u, v)
    triples (loops and parallel edges allowed), ``legs`` are (name, u) unbounded rays.
    """
    faces = {v: ConicalFace(((1,),), (m,)) for v, m in vertices.items()}
    embeddings = []
    multi = False
    for name, u, v in edges:
        faces[name] = ConicalFace(((1, 0), (0, 1)), (vertices[u], vertices[v]))
        embeddings.append(Embedding(u, name, ((1,), (0,))))
        embeddings.append(Embedding(v, name, ((0,), (1,))))
        multi = multi or u == v
    pairs = [frozenset((u, v)) for _, u, v in edges]
    multi = multi or len(set(pairs)) < len(pairs)
    for name, u in legs:
        faces[name] = ConicalFace(((1, 0), (0, 1)), (vertices[u], 0))
        embeddings.append(Embedding(u, name, ((1,), (0,))))
    return PLComplex(faces, tuple(embeddings), multi_adjacency=multi)


def graph_alpha(c: PLComplex) -> dict[str, tuple[Fraction, ...]]:
    """Constants on a graph complex solving the bounded-multiplicity constraint.

    Each vertex gets alpha = mult_b / m.
    """
    probe = TropicalComplex(c, {})
    out = {}
    for v in c.ridges:
        m = c.faces[v].multiplicities[0]
        out[v] = (Fraction(mult_b(probe, v)) / m,)
    return out


def graph_tropical(c: PLComplex, vertical=None, genus=None) -> TropicalComplex:
    return TropicalComplex(c, graph_alpha(c), vertical or {}, genus)


def path_graph(n: int = 3) -> PLComplex:
    verts = {f"v{i}": 1 for i in range(n)}
    edges = [(f"e{i}", f"v{i}", f"v{i + 1}") for i in range(n - 1)]
    return graph_complex(verts, edges)


def path_tropical(n: int = 3, vertical=None) -> TropicalComplex:
    c = path_graph(n)
    return TropicalComplex(c, graph_alpha(c), vertical or {}, {v: 0 for v in c.ridges})


def cycle_graph(n: int, prefix: str = "v", edge_prefix: str = "e") -> PLComplex:
    verts = {f"{prefix}{i}": 1 for i in range(n)}
    edges = [(f"{edge_prefix}{i}", f"{prefix}{i}", f"{prefix}{(i + 1) % n}") for i in range(n)]
    return graph_complex(verts, edges)


def cycle_double_cover() -> TropicalCover:
    """Unramified 4-cycle over the 2-cycle a = b."""
    target = graph_complex({"a": 1, "b": 1}, [("e", "a", "b"), ("f", "a", "b")])
    source = graph_complex(
        {"a0": 1, "b0": 1, "a1": 1, "b1": 1},
        [("e0", "a0", "b0"), ("f0", "a1", "b0"), ("e1", "a1", "b1"), ("f1", "a0", "b1")],
    )
    fmap = {"a0": "a", "a1": "a", "b0": "b", "b1": "b", "e0": "e", "e1": "e", "f0": "f", "f1": "f"}
    lmaps = {k: ((1,),) if k[0] in "ab" else ((1, 0), (0, 1)) for k in fmap}
    phi = ComplexCover(source, target, fmap, lmaps)
    genus0 = lambda c: {v: 0 for v in c.ridges}  # noqa: E731
    return TropicalCover(phi, graph_tropical(source, genus=genus0(source)), graph_tropical(target, genus=genus0(target)))


def loop_double_cover() -> TropicalCover:
    """2-cycle over a single vertex with a loop; exercises multi-adjacency."""
    target = graph_complex({"v": 1}, [("e", "v", "v")])
    source = graph_complex({"a": 1, "b": 1}, [("e0", "a", "b"), ("e1", "b", "a")])
    fmap = {"a": "v", "b": "v", "e0": "e", "e1": "e"}
    lmaps = {k: ((1,),) if k in "ab" else ((1, 0), (0, 1)) for k in fmap}
    phi = ComplexCover(source, target, fmap, lmaps)
    return TropicalCover(
        phi,
        graph_tropical(source, genus={"a": 0, "b": 0}),
        graph_tropical(target, genus={"v": 0}),
    )


def folded_path_cover() -> TropicalCover:
    """w0 - w1 - w2 folded onto v1 - v0 with w1 over v1.

    The fold point w1 carries residue degree 2.  Endpoints are declared
    non-vertical so that the different (1, 0, 1) solves Riemann-Hurwitz.
    """
    target = graph_complex({"v0": 1, "v1": 1}, [("e", "v1", "v0")])
    source = graph_complex({"w0": 1, "w1": 1, "w2": 1}, [("a", "w1", "w0"), ("b", "w1", "w2")])
    fmap = {"w0": "v0", "w1": "v1", "w2": "v0", "a": "e", "b": "e"}
    lmaps = {k: ((1,),) if k.startswith("w") else ((1, 0), (0, 1)) for k in fmap}
    phi = ComplexCover(source, target, fmap, lmaps, {"w1": 2})
    src = graph_tropical(source, vertical={"w0": False, "w2": False}, genus={k: 0 for k in source.ridges})
    tgt = graph_tropical(target, vertical={"v0": False}, genus={k: 0 for k in target.ridges})
    return TropicalCover(phi, src, tgt)


FOLDED_DIFFERENT = {"w0": 1, "w1": 0, "w2": 1}


def mixed_index_cover() -> ComplexCover:
    """Cover of the path v0 - v1 - v2 whose edges have indices 2 and 1 above v1."""
    target = path_graph(3)
    source = graph_complex({"w0": 2, "w1": 1, "w2": 1}, [("a0", "w0", "w1"), ("a1", "w1", "w2")])
    fmap = {"w0": "v0", "w1": "v1", "w2": "v2", "a0": "e0", "a1": "e1"}
    lmaps = {
        "w0": ((2,),),
        "w1": ((1,),),
        "w2": ((1,),),
        "a0": ((2, 0), (0, 1)),
        "a1": ((1, 0), (0, 1)),
    }
    return ComplexCover(source, target, fmap, lmaps)


def leg_graph() -> PLComplex:
    """Edge v0 - v1 with an unbounded leg at v1."""
    return graph_complex({"v0": 1, "v1": 1}, [("e", "v0", "v1")], [("l", "v1")])


__all__ = [
    "DOUBLING_MAP",
    "FOLDED_DIFFERENT",
    "FIVE_RAY_MONOID_GENERATORS",
    "FIVE_RAY_MONOID_VARPI",
    "SEGMENT_I",
    "SEGMENT_J",
    "complex_from_cones",
    "cycle_double_cover",
    "cycle_graph",
    "folded_path_cover",
    "graph_alpha",
    "graph_complex",
    "graph_tropical",
    "leg_graph",
    "loop_double_cover",
    "mixed_index_cover",
    "five_ray_monoid",
    "five_ray_complex",
    "path_graph",
    "path_tropical",
    "rectangle_complex",
    "rectangle_face",
    "segments_complex",
]
