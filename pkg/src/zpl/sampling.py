"""Seeded random generators for complexes, functions, polytopes and maps.

Everything takes a ``random.Random`` so property tests stay reproducible.
"""

from __future__ import annotations

import random
from fractions import Fraction

from .catalog import complex_from_cones, graph_alpha, graph_complex
from .complex import ConicalFace, PLComplex, PLFunction, pl_function_from_values
from .linalg import IntMatrix, as_matrix, determinant, dot, is_primitive, rank
from .tropical import TropicalComplex, mult_b, mult_u


def random_primitive(rng: random.Random, n: int, bound: int = 3, first: int | None = None) -> tuple[int, ...]:
    while True:
        v = tuple(rng.randint(-bound, bound) for _ in range(n))
        if first is not None:
            v = (first,) + v[1:]
        if any(v) and is_primitive(v):
            return v


def random_unimodular(rng: random.Random, n: int, steps: int = 6) -> list[list[int]]:
    m = [[int(i == j) for j in range(n)] for i in range(n)]
    for _ in range(steps):
        i, j = rng.sample(range(n), 2) if n > 1 else (0, 0)
        if i == j:
            break
        c = rng.choice([-2, -1, 1, 2])
        for k in range(n):
            m[i][k] += c * m[j][k]
    return m


def random_full_rank(rng: random.Random, n: int, max_index: int) -> IntMatrix:
    """Integer n x n matrix with 1 <= |det| <= max_index."""
    while True:
        d = [rng.randint(1, max_index) for _ in range(n)]
        prod = 1
        for x in d:
            prod *= x
        if prod > max_index:
            continue
        u, v = random_unimodular(rng, n), random_unimodular(rng, n)
        diag = [[d[i] if i == j else 0 for j in range(n)] for i in range(n)]
        m = [[sum(u[i][k] * diag[k][j] for k in range(n)) for j in range(n)] for i in range(n)]
        m = [[sum(m[i][k] * v[k][j] for k in range(n)) for j in range(n)] for i in range(n)]
        return as_matrix(m)


def random_polytope(rng: random.Random, dim: int, through_origin: bool) -> list[tuple[Fraction, ...]]:
    """Points spanning a ``dim``-dimensional rational polytope.

    With ``through_origin`` the points sit in Q^dim; otherwise they sit on an
    affine hyperplane of Q^(dim+1) that misses the origin.
    """
    n = dim if through_origin else dim + 1
    while True:
        count = dim + 1 + rng.randint(0, 2)
        if through_origin:
            pts = [tuple(Fraction(rng.randint(-6, 6), rng.randint(1, 3)) for _ in range(n)) for _ in range(count)]
        else:
            w = random_primitive(rng, n, 3)
            level = Fraction(rng.randint(1, 4), rng.randint(1, 3))
            pivot = next(i for i, x in enumerate(w) if x)
            pts = []
            for _ in range(count):
                p = [Fraction(rng.randint(-6, 6), rng.randint(1, 3)) for _ in range(n)]
                p[pivot] = 0
                p[pivot] = (level - dot(w, p)) / w[pivot]
                pts.append(tuple(p))
        base = pts[0]
        if rank([[a - b for a, b in zip(p, base)] for p in pts[1:]], n) == dim:
            return pts


def random_simplicial_face(rng: random.Random, r: int, bound: int = 3, allow_recession: bool = True) -> ConicalFace:
    """Simplicial rank-r face with at least one vertex ray."""
    while True:
        varpi = random_primitive(rng, r, 2)
        rays = []
        for _ in range(r):
            for _ in range(50):
                v = random_primitive(rng, r, bound)
                m = dot(varpi, v)
                if m > 0 or (allow_recession and m == 0):
                    rays.append(v)
                    break
        if len(rays) != r or determinant(rays) == 0:
            continue
        if not any(dot(varpi, v) > 0 for v in rays):
            continue
        return ConicalFace(tuple(rays), varpi)


# ---------------------------------------------------------------------------
# random simplicial complexes from global rays


def _simplices(rng: random.Random, dim: int) -> list[tuple[int, ...]]:
    """Maximal simplices of a small random pure complex on labelled vertices."""
    if dim == 1:
        n = rng.randint(2, 6)
        edges = {(i, i + 1) for i in range(n - 1)}
        for _ in range(rng.randint(0, 2)):
            a, b = sorted(rng.sample(range(n), 2))
            edges.add((a, b))
        return sorted(edges)
    k = rng.randint(2, 5)
    shape = rng.choice(["fan", "strip", "closed-fan"])
    if shape == "strip":
        return [(i, i + 1, i + 2) for i in range(k)]
    tris = [(0, i, i + 1) for i in range(1, k + 1)]
    if shape == "closed-fan" and k >= 3:
        tris.append((0, 1, k + 1))
    return tris


def random_complex(rng: random.Random, dim: int, bound: int = 2, recession: float = 0.25) -> PLComplex:
    """Simplicial pure complex whose faces are cones on rays in Z^(dim+1).

    Each face carries the saturated lattice of its span, so determinants and
    multiplicities vary.  Varpi is the first coordinate; a ray with first
    coordinate zero is a recession direction.
    """
    n = dim + 1
    while True:
        tops = _simplices(rng, dim)
        labels = sorted({i for s in tops for i in s})
        rays = {}
        for i in labels:
            m = 0 if rng.random() < recession else rng.randint(1, 3)
            rays[i] = random_primitive(rng, n, bound, first=m)
        if any(rank([rays[i] for i in s], n) < len(s) for s in tops):
            continue
        if not all(any(rays[i][0] > 0 for i in s) for s in tops):
            continue
        return complex_from_cones(n, rays, tops)


def random_alpha(rng: random.Random, c: PLComplex) -> dict[str, tuple[Fraction, ...]]:
    """Constants satisfying the bounded-multiplicity constraint on every ridge."""
    probe = TropicalComplex(c, {})
    out = {}
    for tau in c.ridges:
        face = c.faces[tau]
        mb = mult_b(probe, tau)
        mu = mult_u(probe, tau)
        vals = [Fraction(0)] * len(face.rays)
        vert = list(face.vertex_indices)
        if mb:
            for i in vert[:-1]:
                vals[i] = Fraction(rng.randint(-4, 4), rng.randint(1, 3))
            last = vert[-1]
            rest = sum(face.multiplicities[i] * vals[i] for i in vert[:-1])
            vals[last] = (mb - rest) / face.multiplicities[last]
        if mu:
            for i in face.recession_indices:
                vals[i] = Fraction(rng.randint(-4, 4), rng.randint(1, 3))
        out[tau] = tuple(vals)
    return out


def random_tropical(rng: random.Random, dim: int, vertical_rate: float = 0.8) -> TropicalComplex:
    c = random_complex(rng, dim)
    vertical = {t: rng.random() < vertical_rate for t in c.ridges}
    genus = {t: rng.randint(0, 2) for t in c.ridges}
    return TropicalComplex(c, random_alpha(rng, c), vertical, genus)


def random_function(rng: random.Random, c: PLComplex, integral: bool = False) -> PLFunction:
    """PL function with random values on the global rays."""
    def value():
        if integral:
            return Fraction(rng.randint(-5, 5))
        return Fraction(rng.randint(-6, 6), rng.randint(1, 4))

    return pl_function_from_values(c, {name: value() for name in c.global_rays()})


def random_graph(rng: random.Random, loops: bool = True) -> tuple[dict[str, int], list[tuple[str, str, str]]]:
    """Connected multigraph with all multiplicities one."""
    n = rng.randint(1, 6)
    verts = {f"v{i}": 1 for i in range(n)}
    edges = []
    for i in range(1, n):
        edges.append((f"e{len(edges)}", f"v{rng.randrange(i)}", f"v{i}"))
    for _ in range(rng.randint(0 if n > 1 else 1, 3)):
        a, b = rng.randrange(n), rng.randrange(n)
        if a == b and not loops:
            continue
        edges.append((f"e{len(edges)}", f"v{a}", f"v{b}"))
    if not edges:
        edges.append(("e0", "v0", "v0"))
    return verts, edges


def random_graph_tropical(rng: random.Random) -> TropicalComplex:
    verts, edges = random_graph(rng)
    c = graph_complex(verts, edges)
    return TropicalComplex(c, graph_alpha(c), {}, {v: 0 for v in verts})


__all__ = [
    "random_alpha",
    "random_complex",
    "random_full_rank",
    "random_function",
    "random_graph",
    "random_graph_tropical",
    "random_polytope",
    "random_primitive",
    "random_simplicial_face",
    "random_tropical",
    "random_unimodular",
]
