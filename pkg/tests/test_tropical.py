import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zpl import catalog
from zpl.complex import (
    CombinatorialDivisor,
    ConicalFace,
    Embedding,
    PLComplex,
    PLFunction,
    face_pairs,
    pl_function_from_values,
    varpi_function,
)
from zpl.covers import pullback_cycle, pullback_function
from zpl.errors import ZPLError
from zpl.sampling import random_function, random_graph, random_graph_tropical, random_tropical
from zpl.tropical import (
    TropicalComplex,
    TropicalCover,
    adjunction_residual,
    canonical_divisor,
    classify_function,
    dilate_tropical,
    intersection_number,
    laplacian,
    laplacian_split,
    mult_b,
    mult_u,
    relative_canonical,
    rh_check,
    slope,
    specialize,
    validate_tropical,
    validate_tropical_cover,
    weil_cycle,
)

F = Fraction


def path(vertical=None, genus=None):
    t = catalog.path_tropical(3, vertical)
    if genus is not None:
        t = TropicalComplex(t.base, t.alpha, t.vertical, genus)
    return t


def values(t, vals):
    return pl_function_from_values(t.base, vals)


BUMP = {"v0": 0, "v1": 1, "v2": 0}
DIP = {"v0": 0, "v1": -1, "v2": 0}
LINEAR = {"v0": 0, "v1": 1, "v2": 2}


def test_unimodular_intersection_numbers():
    t = path()
    for p in t.pairs_at("v1"):
        assert intersection_number(t, p) == 1


def test_index_two_intersection_number():
    faces = {
        "v": ConicalFace(((1,),), (1,)),
        "w": ConicalFace(((1,),), (1,)),
        "e": ConicalFace(((1, 0), (1, 2)), (1, 0)),
    }
    c = PLComplex(faces, (Embedding("v", "e", ((1,), (0,))), Embedding("w", "e", ((1,), (2,)))))
    (pair,) = face_pairs(c, "e", "v")
    assert intersection_number(c, pair) == F(1, 2)


def test_path_constraint():
    t = path()
    assert mult_b(t, "v1") == 2
    assert validate_tropical(t).ok
    bad = TropicalComplex(t.base, {**t.alpha, "v1": (F(3),)})
    assert "alpha-constraint" in validate_tropical(bad).codes()


def test_leg_mult_u():
    t = catalog.graph_tropical(catalog.leg_graph())
    assert mult_u(t, "v1") == 1 and mult_b(t, "v1") == 1
    assert validate_tropical(t).ok


def test_path_slopes():
    t = path()
    f = values(t, BUMP)
    assert [slope(t, f, p) for p in t.pairs_at("v1")] == [-1, -1]
    g = values(t, LINEAR)
    assert sorted(slope(t, g, p) for p in t.pairs_at("v1")) == [-1, 1]


def test_recession_slope_of_varpi_is_zero():
    t = catalog.graph_tropical(catalog.leg_graph())
    f = varpi_function(t.base)
    for p in t.pairs_at("v1"):
        if p.facet == "l":
            assert slope(t, f, p) == 0


def test_laplacian_examples():
    t = path({"v0": False, "v2": False})
    assert laplacian(t, values(t, BUMP)) == CombinatorialDivisor({"v1": -2})
    assert laplacian(t, values(t, LINEAR)).is_zero()
    assert laplacian(t, values(t, {"v0": 5, "v1": 5, "v2": 5})).is_zero()
    full = path()
    assert laplacian(full, values(full, BUMP)) == CombinatorialDivisor({"v0": 1, "v1": -2, "v2": 1})


def test_specialize_examples():
    t = path({"v0": False, "v2": False})
    assert specialize(t, values(t, BUMP)) == CombinatorialDivisor({"v1": -2})
    assert specialize(t, values(t, {"v0": 3, "v1": 3, "v2": 3})).is_zero()
    assert specialize(t, values(t, LINEAR)).is_zero()


def test_weil_cycle():
    t = catalog.graph_tropical(catalog.leg_graph())
    cyc = weil_cycle(t, varpi_function(t.base))
    rec = {name for name, occ in t.base.global_rays().items() if all(t.base.faces[f].multiplicities[i] == 0 for f, i in occ)}
    for name, val in cyc.items():
        assert val == (0 if name in rec else 1)
    assert not any(weil_cycle(t, PLFunction({k: (0,) * f.rank for k, f in t.base.faces.items()})).values())


def test_weil_cycle_scales_by_multiplicity():
    c = catalog.graph_complex({"a": 2, "b": 3}, [("e", "a", "b")])
    t = catalog.graph_tropical(c)
    f = pl_function_from_values(c, {"a": F(1, 2), "b": F(-1, 3)})
    cyc = weil_cycle(t, f)
    assert cyc["a"] == 1 and cyc["b"] == -1


def test_classification():
    t = path({"v0": False, "v2": False})
    assert classify_function(t, values(t, {"v0": 1, "v1": 1, "v2": 1})) == "harmonic"
    assert classify_function(t, values(t, BUMP)) == "none"
    assert classify_function(t, values(t, DIP)) == "strongly-convex"
    wide = catalog.path_tropical(4, {"v0": False, "v3": False})
    kink = pl_function_from_values(wide.base, {"v0": 0, "v1": 0, "v2": 0, "v3": 1})
    assert classify_function(wide, kink) == "convex"


def test_split_on_bounded_complex():
    t = path()
    bounded, unbounded = laplacian_split(t, values(t, BUMP))
    assert unbounded.is_zero() and bounded == laplacian(t, values(t, BUMP))


def test_split_isolates_leg():
    t = catalog.graph_tropical(catalog.leg_graph())
    f = PLFunction({"v0": (0,), "v1": (1,), "e": (0, 1), "l": (1, 2)})
    bounded, unbounded = laplacian_split(t, f)
    (pair,) = [p for p in t.pairs_at("v1") if p.facet == "l"]
    assert unbounded == CombinatorialDivisor({"v1": slope(t, f, pair)})
    assert bounded + unbounded == laplacian(t, f)


@given(st.integers(0, 10**6))
@settings(max_examples=30)
def test_split_sums_to_laplacian(seed):
    rng = random.Random(seed)
    t = random_tropical(rng, rng.randint(1, 2))
    f = random_function(rng, t.base)
    try:
        b, u = laplacian_split(t, f)
    except ZPLError as exc:
        assert exc.code == "degenerate-mult-u"
        return
    assert b + u == laplacian(t, f)


def test_canonical_examples():
    cyc = catalog.graph_tropical(catalog.cycle_graph(2), genus={"v0": 0, "v1": 0})
    assert canonical_divisor(cyc).is_zero()
    assert canonical_divisor(path(genus={"v0": 0, "v1": 0, "v2": 0})) == CombinatorialDivisor({"v0": -1, "v2": -1})
    t = path(genus={"v0": 1, "v1": 0, "v2": 0})
    assert canonical_divisor(t)["v0"] == 1


def test_canonical_needs_genus():
    with pytest.raises(ZPLError) as e:
        canonical_divisor(TropicalComplex(path().base, path().alpha))
    assert e.value.code == "missing-genus"


def test_loop_counts_twice():
    t = catalog.graph_tropical(catalog.graph_complex({"v": 1}, [("e", "v", "v")]), genus={"v": 0})
    assert canonical_divisor(t).is_zero()


# ---------------------------------------------------------------------------
# the slope formula against its independent expansion


@given(st.integers(0, 10**6))
@settings(max_examples=80)
def test_poincare_lelong(seed):
    rng = random.Random(seed)
    t = random_tropical(rng, rng.randint(1, 2))
    assert validate_tropical(t).ok
    for _ in range(5):
        f = random_function(rng, t.base)
        try:
            lap = laplacian(t, f)
        except ZPLError as exc:
            assert exc.code == "degenerate-mult-u"
            continue
        assert lap == specialize(t, f)


@given(st.integers(0, 10**6))
@settings(max_examples=40)
def test_constants_and_varpi(seed):
    rng = random.Random(seed)
    t = random_tropical(rng, rng.randint(1, 2))
    const = PLFunction({k: (0,) * f.rank for k, f in t.base.faces.items()})
    assert specialize(t, const).is_zero()
    assert specialize(t, varpi_function(t.base)).is_zero()


def graph_laplacian(verts, edges, vals):
    out = {v: 0 for v in verts}
    for _, a, b in edges:
        out[a] += vals[b] - vals[a]
        out[b] += vals[a] - vals[b]
    return CombinatorialDivisor(out)


@given(st.integers(0, 10**6))
@settings(max_examples=50)
def test_graph_oracle(seed):
    rng = random.Random(seed)
    verts, edges = random_graph(rng)
    c = catalog.graph_complex(verts, edges)
    t = catalog.graph_tropical(c)
    vals = {v: rng.randint(-5, 5) for v in verts}
    f = pl_function_from_values(c, vals)
    assert laplacian(t, f) == graph_laplacian(verts, edges, vals)


def test_degenerate_mult_u():
    rays = {0: (1, 0, 0), 1: (0, 1, 0), 2: (1, 0, 1)}
    c = catalog.complex_from_cones(3, rays, [(0, 1, 2)])
    t = TropicalComplex(c, {})
    ridge = next(r for r in c.ridges if any(m == 0 for m in c.faces[r].multiplicities))
    assert mult_u(t, ridge) == 0
    alpha = {r: tuple(F(0) for _ in c.faces[r].rays) for r in c.ridges}
    face = c.faces[ridge]
    vert = face.vertex_indices[0]
    rec = face.recession_indices[0]
    vals = [F(0)] * len(face.rays)
    vals[vert] = mult_b(t, ridge) / face.multiplicities[vert]
    vals[rec] = F(1)
    alpha[ridge] = tuple(vals)
    for r in c.ridges:
        if r != ridge:
            a = [F(0)] * len(c.faces[r].rays)
            for i in c.faces[r].vertex_indices[:1]:
                a[i] = mult_b(t, r) / c.faces[r].multiplicities[i]
            alpha[r] = tuple(a)
    t = TropicalComplex(c, alpha)
    assert "degenerate-mult-u" in {w.code for w in validate_tropical(t).warnings}
    names = [n for n, occ in c.global_rays().items() if any(c.faces[k].multiplicities[i] == 0 for k, i in occ)]
    g = pl_function_from_values(c, {n: (1 if n in names else 0) for n in c.global_rays()})
    with pytest.raises(ZPLError) as e:
        laplacian(t, g)
    assert e.value.code == "degenerate-mult-u"


# ---------------------------------------------------------------------------
# covers


@given(st.integers(0, 10**6), st.sampled_from([2, 3, 5]))
@settings(max_examples=30)
def test_harmonic_morphism_under_dilation(seed, e):
    rng = random.Random(seed)
    t = random_tropical(rng, rng.randint(1, 2))
    tc = dilate_tropical(t, e)
    assert validate_tropical_cover(tc).ok
    for _ in range(3):
        f = random_function(rng, t.base)
        try:
            down = laplacian(t, f)
        except ZPLError:
            continue
        pulled = pullback_function(tc.cover, f)
        assert pullback_cycle(tc.cover, down) == laplacian(tc.source, pulled)
        assert pullback_cycle(tc.cover, specialize(t, f)) == specialize(tc.source, pulled)


@given(st.integers(0, 10**6))
@settings(max_examples=20)
def test_harmonic_morphism_folded_path(seed):
    rng = random.Random(seed)
    tc = catalog.folded_path_cover()
    f = random_function(rng, tc.target.base)
    pulled = pullback_function(tc.cover, f)
    assert pullback_cycle(tc.cover, laplacian(tc.target, f)) == laplacian(tc.source, pulled)


def test_harmonic_pulls_back_to_harmonic():
    t = path({"v0": False, "v2": False})
    f = values(t, LINEAR)
    tc = dilate_tropical(t, 3)
    assert classify_function(tc.source, pullback_function(tc.cover, f)) == "harmonic"


def test_tropical_cover_validation():
    for tc in (catalog.folded_path_cover(), catalog.cycle_double_cover(), catalog.loop_double_cover()):
        assert validate_tropical_cover(tc).ok
    tc = catalog.folded_path_cover()
    bad = TropicalCover(tc.cover, TropicalComplex(tc.source.base, tc.source.alpha, {}, tc.source.genus), tc.target)
    assert "vertical-mismatch" in validate_tropical_cover(bad).codes()


def test_relative_canonical_examples():
    assert relative_canonical(catalog.cycle_double_cover()).is_zero()
    assert relative_canonical(catalog.folded_path_cover()) == CombinatorialDivisor({"w1": 2})
    t = path(genus={"v0": 0, "v1": 0, "v2": 0})
    assert relative_canonical(dilate_tropical(t, 2)).is_zero()


def test_adjunction_on_constructed_covers():
    covers = [catalog.folded_path_cover(), catalog.cycle_double_cover(), catalog.loop_double_cover()]
    t = path(genus={"v0": 1, "v1": 0, "v2": 2})
    covers += [dilate_tropical(t, e) for e in (2, 3, 5)]
    for tc in covers:
        assert adjunction_residual(tc).is_zero()


@given(st.integers(0, 10**6), st.sampled_from([2, 3, 5]))
@settings(max_examples=25)
def test_adjunction_random_dilations(seed, e):
    t = random_tropical(random.Random(seed), random.Random(seed).randint(1, 2))
    assert adjunction_residual(dilate_tropical(t, e)).is_zero()


def test_rh_fixtures():
    cyc = catalog.cycle_double_cover()
    zero = PLFunction({k: (0,) * f.rank for k, f in cyc.source.base.faces.items()})
    assert rh_check(cyc, zero).passed
    tc = catalog.folded_path_cover()
    delta = pl_function_from_values(tc.source.base, catalog.FOLDED_DIFFERENT)
    rep = rh_check(tc, delta)
    assert rep.passed and rep.laplacian["w1"] == 2
    flat = pl_function_from_values(tc.source.base, {"w0": 0, "w1": 0, "w2": 0})
    rep = rh_check(tc, flat)
    assert not rep.passed and rep.residual == CombinatorialDivisor({"w1": 2})


def test_rh_rejects_negative_different():
    tc = catalog.folded_path_cover()
    neg = pl_function_from_values(tc.source.base, {"w0": -1, "w1": -2, "w2": -1})
    rep = rh_check(tc, neg)
    assert not rep.nonnegative and not rep.passed


def test_graph_tropical_random_is_valid():
    for seed in range(20):
        t = random_graph_tropical(random.Random(seed))
        assert validate_tropical(t).ok
