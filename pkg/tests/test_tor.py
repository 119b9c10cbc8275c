import numpy as np
import pytest

from torpers import InternalCheckError
from torpers import exactla as la
from torpers import grading as gr
from torpers import modules as md
from torpers import tor
from torpers.complexes import Presentation, load_mfc


@pytest.fixture(scope="module")
def circle(fixture_path_mod):
    return load_mfc(fixture_path_mod / "circle_fig.mfc")


@pytest.fixture(scope="module", params=[2, 3, 5])
def p(request):
    return request.param


def circle_h0(circle, p):
    H, _, _ = md.homology_module(circle, 0, p)
    return H


def test_koszul_tor_circle_h0(circle, p):
    H = circle_h0(circle, p)
    assert tor.koszul_tor(H, 0).multiset() == {(0, 0): 3}
    assert tor.koszul_tor(H, 1).multiset() == {(0, 1): 1, (1, 0): 1, (2, 0): 1}
    assert tor.koszul_tor(H, 2).multiset() == {(2, 1): 1}


def test_koszul_tor_free_module(p):
    F = md.free_module({(2, 1): 1}, p, bound=(3, 3))
    assert tor.koszul_tor(F, 0).multiset() == {(2, 1): 1}
    assert tor.koszul_tor(F, 1).multiset() == {}
    assert tor.koszul_tor(F, 2).multiset() == {}


def test_koszul_tor_zero_module():
    Z = md.free_module({}, 2, bound=(1, 1), n=2)
    for j in range(3):
        assert tor.koszul_tor(Z, j).multiset() == {}


def test_representatives_match_multiplicity(circle):
    H = circle_h0(circle, 3)
    kt = tor.koszul_tor(H, 1)
    for v, mult in kt.multiset().items():
        assert kt.reps[v].shape[0] == mult


def test_resolution_circle_h0(circle, p):
    H = circle_h0(circle, p)
    res = tor.minimal_resolution(H)
    assert res.length == 2
    assert res.gen_degrees[0] == [(0, 0), (0, 0), (0, 0)]
    assert sorted(res.gen_degrees[1]) == [(0, 1), (1, 0), (2, 0)]
    assert res.gen_degrees[2] == [(2, 1)]
    # ranks of the evaluated differentials at the top corner
    assert la.rank(res.evaluate(1, (2, 1)), p) == 2
    assert la.rank(res.evaluate(2, (2, 1)), p) == 1


def test_resolution_of_free_module_has_length_zero(p):
    F = md.free_module({(1, 0): 2, (0, 2): 1}, p)
    res = tor.minimal_resolution(F)
    assert res.length == 0
    assert res.gen_degrees[0] == [(0, 2), (1, 0), (1, 0)]


def test_resolution_generic_rep_syzygies(p):
    # two generators at the origin with four generic relations; the first
    # syzygy lives at (2,3), the second at (3,2)
    alpha = 2 % p
    if alpha in (0, 1):
        pytest.skip("needs a scalar distinct from 0 and 1")
    pres = Presentation(
        2,
        [(0, 0), (0, 0)],
        [
            ((0, 3), {0: 1}),
            ((1, 2), {1: 1}),
            ((2, 1), {0: -1, 1: 1}),
            ((3, 0), {0: -1, 1: alpha}),
        ],
    )
    mod = md.present_cokernel(pres, p)
    table = tor.xi(mod)
    assert table.tables[0] == {(0, 0): 2}
    assert table.tables[1] == {(0, 3): 1, (1, 2): 1, (2, 1): 1, (3, 0): 1}
    assert table.tables[2] == {(2, 3): 1, (3, 2): 1}


def test_xi_cross_checks_and_circle_values(circle, p):
    H, _, _ = md.homology_module(circle, 0, p)
    table = tor.xi(H)
    assert table.tables[0] == {(0, 0): 3}
    assert table.tables[1] == {(0, 1): 1, (1, 0): 1, (2, 0): 1}
    assert table.tables[2] == {(2, 1): 1}
    H1, _, _ = md.homology_module(circle, 1, p)
    t1 = tor.xi(H1)
    assert t1.tables[0] == {(2, 1): 1}
    assert t1.tables[1] == {} and t1.tables[2] == {}


def test_xi_one_variable():
    pres = Presentation(1, [(0,), (0,), (2,)], [((4,), {2: 1})])
    mod = md.present_cokernel(pres, 3)
    table = tor.xi(mod)
    assert table.tables[0] == {(0,): 2, (2,): 1}
    assert table.tables[1] == {(4,): 1}


def test_euler_characteristic_per_degree(circle, p):
    H = circle_h0(circle, p)
    table = tor.xi(H)
    for v in gr.grid(H.bound):
        chi = sum(
            (-1) ** j * gr.staircase_count(table.tables[j], v)
            for j in range(H.n + 1)
        )
        assert chi == H.dim(v)


def test_chains_never_die(circle, fixture_path_mod, p):
    sphere = load_mfc(fixture_path_mod / "sphere.mfc")
    for cx in (circle, sphere):
        for i in range(cx.max_dim() + 1):
            C = md.chains_module(cx, i, p)
            assert tor.koszul_tor(C, cx.n).multiset() == {}


def test_widening_stability(circle, p):
    H = circle_h0(circle, p)
    base = tor.xi(H)
    wide = tor.xi(H, widen=1)
    assert base.tables == wide.tables


def test_restricted_image_is_grassmann_point(p):
    alpha = 2 % p
    if alpha in (0, 1):
        pytest.skip("needs a scalar distinct from 0 and 1")
    pres = Presentation(
        2,
        [(0, 0), (0, 0)],
        [
            ((0, 3), {0: 1}),
            ((1, 2), {1: 1}),
            ((2, 1), {0: -1, 1: 1}),
            ((3, 0), {0: -1, 1: alpha}),
        ],
    )
    mod = md.present_cokernel(pres, p)
    res = tor.minimal_resolution(mod)
    pt = res.restricted_image(1, (2, 1))
    # one relation enters at (2,1); its image is a line in F_0 at (2,1) = k^2
    assert pt.shape == (1, 2)
    assert pt[0, 0] == 1  # RREF-normalized


def test_xi_table_json_shape(circle):
    H = circle_h0(circle, 2)
    data = tor.xi(H).to_json()
    assert data == {
        "xi": [
            [0, [[[0, 0], 3]]],
            [1, [[[0, 1], 1], [[1, 0], 1], [[2, 0], 1]]],
            [2, [[[2, 1], 1]]],
        ]
    }


def test_minimality_guard_fires_on_bad_matrix(circle):
    H = circle_h0(circle, 2)
    res = tor.minimal_resolution(H)
    res.d[1] = res.d[1].copy()
    # plant an entry between two generators of equal degree
    res.gen_degrees[1][0] = res.gen_degrees[2][0]
    with pytest.raises(InternalCheckError):
        res.check()
