from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zpl.errors import ZPLError
from zpl.linalg import (
    INFINITE,
    Lattice,
    LatticeMap,
    determinant,
    hermite_normal_form,
    kernel_saturation,
    lattice_index,
    mat_mul,
    mat_vec,
    minimal_scaling_rho,
    saturation,
    smith_normal_form,
    solve_integer_affine,
)


def matrices(max_n=4, lo=-6, hi=6, square=False):
    @st.composite
    def build(draw):
        r = draw(st.integers(1, max_n))
        c = r if square else draw(st.integers(1, max_n))
        return [[draw(st.integers(lo, hi)) for _ in range(c)] for _ in range(r)]

    return build()


def is_diagonal_form(m, invariants):
    for i, row in enumerate(m):
        for j, x in enumerate(row):
            want = invariants[i] if i == j and i < len(invariants) else 0
            if x != want:
                return False
    return True


@pytest.mark.parametrize(
    "m, diag",
    [([[2, 0], [0, 3]], (1, 6)), ([[2, 4], [6, 8]], (2, 4)), ([[1, 0, 0], [0, 1, 0], [0, 0, 1]], (1, 1, 1))],
)
def test_smith_examples(m, diag):
    assert smith_normal_form(m).invariants == diag


def test_smith_zero_matrix_has_no_invariants():
    assert smith_normal_form([[0, 0], [0, 0]]).invariants == ()


@given(matrices())
@settings(max_examples=150)
def test_smith_certificate(m):
    snf = smith_normal_form(m)
    ncols = len(m[0])
    prod = mat_mul(mat_mul(snf.left, m, len(m)), snf.right, ncols)
    assert is_diagonal_form(prod, snf.invariants)
    assert abs(determinant(snf.left)) == 1 and abs(determinant(snf.right)) == 1
    inv = snf.invariants
    assert all(d > 0 for d in inv)
    assert all(inv[i + 1] % inv[i] == 0 for i in range(len(inv) - 1))


@given(matrices(square=True))
@settings(max_examples=150)
def test_smith_product_is_abs_det(m):
    snf = smith_normal_form(m)
    det = abs(determinant(m))
    if det == 0:
        assert snf.rank < len(m)
    else:
        prod = 1
        for d in snf.invariants:
            prod *= d
        assert prod == det


@given(matrices())
def test_hermite_is_canonical_under_row_operations(m):
    h = hermite_normal_form(m)
    mixed = [list(r) for r in m]
    if len(mixed) > 1:
        mixed[0] = [a + 3 * b for a, b in zip(mixed[0], mixed[1])]
        mixed.reverse()
    assert hermite_normal_form(mixed) == h


def test_lattice_equality_is_span_equality():
    assert Lattice(2, ((2, 0), (0, 1))) == Lattice(2, ((2, 1), (0, 1)))
    assert Lattice(2, ((2, 0), (0, 1))) != Lattice(2, ((1, 0), (0, 2)))


@pytest.mark.parametrize("m, idx", [([[2, 0], [0, 1]], 2), ([[1, 1], [0, 2]], 2), ([[1, 0], [2, 0]], INFINITE)])
def test_lattice_index_examples(m, idx):
    assert lattice_index(m) == idx


def test_infinite_sentinel_prints():
    assert str(INFINITE) == "infinite"


def brute_index(m):
    """Count residues of Z^n modulo the image inside a box of side |det|."""
    n = len(m)
    d = abs(determinant(m))
    # adjugate: x in image iff adj(m) x = 0 mod det
    adj = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [r[:j] + r[j + 1 :] for k, r in enumerate(m) if k != i]
            adj[j][i] = (-1) ** (i + j) * (determinant(minor) if minor else 1)
    hits = sum(
        1 for x in product(range(d), repeat=n) if all(sum(a * b for a, b in zip(row, x)) % d == 0 for row in adj)
    )
    return d**n // hits


@given(matrices(max_n=3, lo=-4, hi=4, square=True))
@settings(max_examples=80)
def test_lattice_index_matches_coset_count(m):
    d = abs(determinant(m))
    if d == 0 or d > 20:
        assert lattice_index(m) == (INFINITE if d == 0 else d)
        return
    assert lattice_index(m) == brute_index(m) == d


@given(matrices(max_n=4, square=True))
def test_index_is_dual_invariant(m):
    f = LatticeMap.of(m)
    assert lattice_index(f) == lattice_index(f.dual())


def test_solve_integer_affine_examples():
    x = solve_integer_affine([[2, 2]], [2])
    assert x is not None and 2 * x[0] + 2 * x[1] == 2
    assert solve_integer_affine([[2, 2]], [1]) is None
    assert solve_integer_affine([[0, 0]], [0]) == (0, 0)


@given(matrices(max_n=3), st.lists(st.integers(-5, 5), min_size=3, max_size=3))
def test_solve_integer_affine_certificate(a, x0):
    x0 = x0[: len(a[0])]
    b = mat_vec(a, x0)
    x = solve_integer_affine(a, b)
    assert x is not None and tuple(mat_vec(a, x)) == tuple(b)


@pytest.mark.parametrize(
    "a, b, rho",
    [([[2, 2]], [1], 2), ([[1, 2]], [1], 1), ([[1, 0], [0, 1]], [Fraction(1, 3), 0], 3)],
)
def test_minimal_scaling_examples(a, b, rho):
    assert minimal_scaling_rho(a, b) == rho


def test_minimal_scaling_errors():
    with pytest.raises(ZPLError) as e:
        minimal_scaling_rho([[1, 1]], [0])
    assert e.value.code == "b-zero"
    with pytest.raises(ZPLError) as e:
        minimal_scaling_rho([[1, 1], [1, 1]], [1, 2])
    assert e.value.code == "no-rational-solution"


@given(
    matrices(max_n=3, lo=-4, hi=4),
    st.lists(st.fractions(min_value=-3, max_value=3, max_denominator=4), min_size=3, max_size=3),
)
@settings(max_examples=120)
def test_minimal_scaling_is_minimal(a, x):
    x = x[: len(a[0])]
    b = mat_vec(a, x)
    if all(v == 0 for v in b):
        return
    rho = minimal_scaling_rho(a, b)
    assert solve_integer_affine(a, [rho * v for v in b]) is not None
    # nothing strictly smaller works: the admissible set is rho * Z_{>0}
    for k in range(2, 7):
        assert solve_integer_affine(a, [rho / k * v for v in b]) is None
    assert solve_integer_affine(a, [2 * rho * v for v in b]) is not None


def test_kernel_saturation_examples():
    assert kernel_saturation([[1, 1]]) == Lattice(2, ((1, -1),))
    assert kernel_saturation([[2, 2]]) == Lattice(2, ((1, -1),))
    assert kernel_saturation([[1, 0], [0, 1]]).rank == 0


@given(matrices(max_n=3, lo=-4, hi=4))
def test_kernel_saturation_is_saturated_kernel(a):
    k = kernel_saturation(a)
    for b in k.basis:
        assert not any(mat_vec(a, b))
    assert k.is_saturated()


def test_saturation_of_scaled_vector():
    assert saturation(2, [(2, 4)]) == Lattice(2, ((1, 2),))
