import random
from fractions import Fraction
from math import lcm

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zpl import catalog
from zpl.complex import CombinatorialDivisor, ConicalFace, PLComplex, apply, facet_ridge_pairs, varpi_function
from zpl.covers import (
    ComplexCover,
    balance_report,
    dilation_cover,
    local_degree,
    multiplicity_chain_check,
    pullback_cycle,
    pullback_function,
    pullback_subdivision,
    validate_cover,
)
from zpl.errors import ZPLError
from zpl.linalg import dot
from zpl.measure import conformal_volume
from zpl.sampling import random_complex, random_function
from zpl.subdivision import check_proper_subdivision, identity_subdivision, stellar_subdivide


def identity_cover(c):
    return ComplexCover(c, c, {k: k for k in c.faces}, {k: identity(f.rank) for k, f in c.faces.items()})


def identity(n):
    return tuple(tuple(int(i == j) for j in range(n)) for i in range(n))


def random_point(rng, face):
    return tuple(sum(rng.randint(0, 3) * r[j] for r in face.rays) for j in range(face.rank))


def test_identity_cover():
    phi = identity_cover(catalog.path_graph(3))
    assert validate_cover(phi).ok
    br = balance_report(phi)
    assert br.balanced and br.global_degree == 1
    assert all(local_degree(phi, r) == 1 for r in phi.source.ridges)
    assert multiplicity_chain_check(phi).ok


def test_collapsing_map_fails_dimension():
    tgt = catalog.graph_complex({"v": 1}, [])
    src = catalog.path_graph(2)
    phi = ComplexCover(src, tgt, {"v0": "v", "v1": "v", "e0": "v"}, {"v0": ((1,),), "v1": ((1,),), "e0": ((1, 1),)})
    assert "dimension" in validate_cover(phi).codes()


def test_folded_path_balance():
    phi = catalog.folded_path_cover().cover
    assert validate_cover(phi).ok
    br = balance_report(phi)
    assert br.balanced and br.global_degree == 2
    assert local_degree(phi, "w1") == 2
    assert local_degree(phi, "w0") == local_degree(phi, "w2") == 1


def test_folded_pullback_cycle():
    phi = catalog.folded_path_cover().cover
    assert pullback_cycle(phi, CombinatorialDivisor({"v1": 1})) == CombinatorialDivisor({"w1": 2})
    assert pullback_cycle(phi, CombinatorialDivisor()).is_zero()


def test_mixed_index_is_unbalanced():
    phi = catalog.mixed_index_cover()
    br = balance_report(phi)
    assert not br.balanced
    assert br.offending["w1"] == {"e0": 2, "e1": 1}
    with pytest.raises(ZPLError) as e:
        local_degree(phi, "w1")
    assert e.value.code == "unbalanced-at-ridge"
    with pytest.raises(ZPLError) as e:
        pullback_cycle(phi, CombinatorialDivisor({"v1": 1}))
    assert e.value.code == "unbalanced"


def test_cycle_covers_are_balanced():
    for tc in (catalog.cycle_double_cover(), catalog.loop_double_cover()):
        br = balance_report(tc.cover)
        assert validate_cover(tc.cover).ok
        assert br.balanced and br.global_degree == 2


def test_dilation_by_one_is_identity():
    c = catalog.path_graph(3)
    phi = dilation_cover(c, 1)
    assert phi.source == c
    assert all(phi.index(k) == 1 for k in c.faces)


def test_dilation_of_a_vertex():
    c = catalog.path_graph(2)
    phi = dilation_cover(c, 2)
    # varpi upstairs is the pullback, so it is e times the uniformizer class
    assert phi.source.faces["v0"].multiplicities == (2,)
    assert phi.source.faces["v0"].root_index == 2
    assert phi.index("e0") == 2 and phi.index("v0") == 2


def test_dilation_needs_varpi():
    c = PLComplex({"v": ConicalFace(((1,),), (0,))}, ())
    with pytest.raises(ZPLError) as e:
        dilation_cover(c, 2)
    assert e.value.code == "no-varpi"


@pytest.mark.parametrize("e", [2, 3, 4, 6])
def test_dilation_root_indices(e):
    c = catalog.five_ray_complex()
    phi = dilation_cover(c, e)
    for k, f in c.faces.items():
        # varpi takes the values rho Z on N and rho Z ∩ e Z on the sublattice
        assert phi.source.faces[k].root_index == lcm(f.root_index, e)
        assert phi.index(k) * phi.residue_degree(k) == e


@given(st.integers(0, 10**6), st.sampled_from([2, 3, 5]))
@settings(max_examples=30)
def test_dilation_is_balanced_of_degree_e(seed, e):
    c = random_complex(random.Random(seed), random.Random(seed).randint(1, 2))
    phi = dilation_cover(c, e)
    assert validate_cover(phi).ok
    br = balance_report(phi)
    assert br.balanced and br.global_degree == e
    assert set(br.local_degrees.values()) <= {e}
    assert multiplicity_chain_check(phi).ok


@given(st.integers(0, 10**6))
@settings(max_examples=30)
def test_pullback_cycle_multiplies_degree(seed):
    rng = random.Random(seed)
    c = random_complex(rng, rng.randint(1, 2))
    e = rng.choice([2, 3])
    phi = dilation_cover(c, e)
    d = CombinatorialDivisor({r: Fraction(rng.randint(-4, 4), rng.randint(1, 3)) for r in c.ridges})
    pulled = pullback_cycle(phi, d)
    assert pulled.degree() == e * d.degree()
    for r in c.ridges:
        assert pulled[r] == e * d[r]


def test_folded_degree_multiplies():
    phi = catalog.folded_path_cover().cover
    d = CombinatorialDivisor({"v0": 3, "v1": -1})
    assert pullback_cycle(phi, d).degree() == 2 * d.degree()


def test_pullback_constants_and_varpi():
    phi = catalog.folded_path_cover().cover
    tgt, src = phi.target, phi.source
    assert pullback_function(phi, varpi_function(tgt)) == varpi_function(src)


@given(st.integers(0, 10**6))
@settings(max_examples=30)
def test_pullback_function_pointwise(seed):
    rng = random.Random(seed)
    c = random_complex(rng, rng.randint(1, 2))
    phi = dilation_cover(c, rng.choice([2, 3]))
    f = random_function(rng, c)
    g = pullback_function(phi, f)
    for _ in range(10):
        k = rng.choice(sorted(phi.source.faces))
        v = random_point(rng, phi.source.faces[k])
        assert dot(g.covectors[k], v) == dot(f.covectors[phi.face_map[k]], apply(phi.lattice_maps[k], v))


def test_pullback_function_composes():
    c = catalog.path_graph(3)
    f = random_function(random.Random(3), c)
    two = dilation_cover(c, 2)
    twice = dilation_cover(two.source, 3)
    direct = pullback_function(twice, pullback_function(two, f))
    for k, face in twice.source.faces.items():
        m = tuple(
            tuple(sum(two.lattice_maps[k][i][t] * twice.lattice_maps[k][t][j] for t in range(face.rank)) for j in range(face.rank))
            for i in range(face.rank)
        )
        assert direct.covectors[k] == tuple(dot(f.covectors[k], col) for col in zip(*m))


def test_pullback_identity_subdivision():
    phi = dilation_cover(catalog.path_graph(2), 2)
    s, lifted = pullback_subdivision(phi, identity_subdivision(phi.target))
    assert {k: set(f.rays) for k, f in s.source.faces.items()} == {k: set(f.rays) for k, f in phi.source.faces.items()}
    assert balance_report(lifted).balanced


def test_pullback_stellar_under_dilation():
    c = catalog.path_graph(2)
    phi = dilation_cover(c, 2)
    s = stellar_subdivide(c, "e0", (1, 2))
    up, lifted = pullback_subdivision(phi, s)
    assert check_proper_subdivision(up).ok
    new = [k for k in up.source.faces if up.source.faces[k].rank == 1 and up.face_map[k] == "e0"]
    assert len(new) == 1
    (k,) = new
    pt = apply(up.lattice_maps[k], up.source.faces[k].rays[0])
    assert apply(phi.lattice_maps["e0"], pt) == (2, 4)
    br = balance_report(lifted)
    assert br.balanced and br.global_degree == 2


def test_pullback_midpoint_on_folded_path():
    phi = catalog.folded_path_cover().cover
    s = stellar_subdivide(phi.target, "e", (1, 1))
    up, lifted = pullback_subdivision(phi, s)
    assert check_proper_subdivision(up).ok
    mids = [k for k, f in up.source.faces.items() if f.rank == 1 and up.face_map[k] in ("a", "b")]
    assert len(mids) == 2
    assert balance_report(lifted).global_degree == 2


def test_folded_chain_needs_residue_degree():
    phi = catalog.folded_path_cover().cover
    assert multiplicity_chain_check(phi).ok
    plain = ComplexCover(phi.source, phi.target, phi.face_map, phi.lattice_maps)
    bad = multiplicity_chain_check(plain).failures()
    assert [(r.source_face, r.lhs, r.rhs) for r in bad] == [("w1", 1, 2)]


@given(st.integers(0, 10**6))
@settings(max_examples=25)
def test_conformality_under_dilation(seed):
    rng = random.Random(seed)
    c = random_complex(rng, rng.randint(1, 2), recession=0)
    e = rng.choice([2, 3, 5])
    phi = dilation_cover(c, e)
    for k in c.facets:
        down = c.faces[k]
        up = phi.source.faces[k]
        ratio = conformal_volume(down).volume / conformal_volume(up).volume
        assert ratio == phi.index(k)


def test_pairs_of_dilation_match():
    c = catalog.path_graph(3)
    phi = dilation_cover(c, 3)
    assert len(facet_ridge_pairs(phi.source)) == len(facet_ridge_pairs(c))
