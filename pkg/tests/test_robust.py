import math

import numpy as np
import pytest

from upconcave.core import Box, CappedSimplex, EuclideanMap, NormKind, bregman_diameter, dual_norm
from upconcave.mirror_prox import MirrorProxConfig, Theory, mirror_prox, step_size
from upconcave.objectives import linear, random_monotone_quadratic
from upconcave.robust import (
    RobustObjective,
    active_supergradient,
    bound_slack,
    estimate_lipschitz,
    make_robust,
    robust_mirror_prox,
    robust_value,
)

PAIR = [linear([1, 2]), linear([2, 1])]


def test_robust_value_examples():
    rob = make_robust([linear([1.0]), linear([2.0])], lipschitz=2.0)
    assert robust_value(rob, [0.5]) == (0.5, [0])
    assert robust_value(rob, [0.0]) == (0.0, [0, 1])
    rob2 = make_robust(PAIR, lipschitz=math.sqrt(5))
    v, act = robust_value(rob2, [0.5, 0.5])
    assert v == pytest.approx(1.5) and act == [0, 1]


def test_active_supergradient_examples():
    rob = make_robust([linear([1.0]), linear([2.0])], lipschitz=2.0)
    np.testing.assert_array_equal(active_supergradient(rob, [0.5]), [1.0])
    np.testing.assert_array_equal(active_supergradient(rob, [0.0]), [1.0])
    rob2 = make_robust(PAIR, lipschitz=math.sqrt(5))
    np.testing.assert_array_equal(active_supergradient(rob2, [0.2, 0.2]), [1, 2])
    np.testing.assert_array_equal(active_supergradient(rob2, [0.6, 0.1]), [1, 2])
    np.testing.assert_array_equal(active_supergradient(rob2, [0.1, 0.6]), [2, 1])


def test_construction_errors():
    with pytest.raises(ValueError):
        RobustObjective((), 1.0)
    with pytest.raises(ValueError):
        RobustObjective(tuple(PAIR), 0.0)
    with pytest.raises(ValueError):
        make_robust(PAIR)


def test_modulus_is_twice_lipschitz():
    rob = make_robust(PAIR, lipschitz=3.0)
    assert rob.modulus.terms == ((6.0, 0.0),)
    # gamma_t = 1 / (4 L sqrt t)
    assert step_size(Theory(rob.modulus), 9) == pytest.approx(1 / (4 * 3 * 3))


def test_segment_instance_floor():
    rob = make_robust(PAIR, lipschitz=math.sqrt(5))
    region = CappedSimplex(2, 1, 1)
    T = 900
    rep = robust_mirror_prox(rob, region, T)
    grid = np.linspace(0, 1, 101)
    opt = max(robust_value(rob, [a, 1 - a])[0] for a in grid)
    assert opt == pytest.approx(1.5)
    D = bregman_diameter(region, EuclideanMap())
    assert rep.value >= 0.5 * opt - bound_slack(rob, D, T)
    assert rep.value >= 1.3
    assert region.contains(rep.solution)
    assert rep.extras["lipschitz"] == pytest.approx(math.sqrt(5))
    assert rep.extras["lipschitz_estimated"] is False


def test_single_member_matches_plain_mirror_prox(rng):
    f = random_monotone_quadratic(3, rng)
    region = CappedSimplex(3, 1, 1.5)
    rob = make_robust([f], lipschitz=5.0)
    a = robust_mirror_prox(rob, region, 40)
    b = mirror_prox(f, region, MirrorProxConfig(40, Theory(rob.modulus)))
    np.testing.assert_array_equal(a.solution, b.solution)
    assert [r[1] for r in a.values] == [r[1] for r in b.values]


def test_duplicate_members_do_not_change_trajectory(rng):
    f = random_monotone_quadratic(3, rng)
    region = Box.unit(3)
    a = robust_mirror_prox(make_robust([f], lipschitz=4.0), region, 30)
    b = robust_mirror_prox(make_robust([f, f], lipschitz=4.0), region, 30)
    np.testing.assert_array_equal(a.solution, b.solution)
    assert [r[1] for r in a.values] == [r[1] for r in b.values]


def members(rng, n=3, d=4):
    return [random_monotone_quadratic(d, rng) for _ in range(n)]


def test_estimated_lipschitz_flagged_and_valid(rng):
    fs = members(rng)
    region = Box.unit(4)
    rob = make_robust(fs, region)
    assert rob.lipschitz_estimated
    # vertices of the box are where these gradients peak in norm; not part of the sample
    corners = np.array(np.meshgrid(*[[0, 1]] * 4)).reshape(4, -1).T
    top = max(dual_norm(NormKind.L2, f.supergradient(c)) for f in fs for c in corners)
    assert rob.lipschitz <= 1.1 * top + 1e-12
    assert rob.lipschitz >= top * 0.9
    assert estimate_lipschitz(fs, region, NormKind.L2, n=50, safety=1.0) <= top + 1e-12


@pytest.mark.parametrize("kind", [NormKind.L2, NormKind.L1])
def test_min_is_lipschitz_and_supergradients_bounded(kind, rng):
    fs = members(rng)
    region = Box.unit(4)
    L = estimate_lipschitz(fs, region, kind, n=2000)
    # exact max over the box corners keeps the check honest
    corners = np.array(np.meshgrid(*[[0, 1]] * 4)).reshape(4, -1).T
    L = max(L, max(dual_norm(kind, f.supergradient(c)) for f in fs for c in corners))
    rob = make_robust(fs, lipschitz=L, norm=kind)
    X, Y = region.sample(rng, 2000), region.sample(rng, 2000)
    for x, y in zip(X, Y):
        fx = robust_value(rob, x)[0]
        fy = robust_value(rob, y)[0]
        assert abs(fx - fy) <= L * np.linalg.norm(x - y, kind.order) + 1e-9
        assert dual_norm(kind, active_supergradient(rob, x)) <= L + 1e-9


def test_active_supergradient_on_comparable_pairs(rng):
    rob = make_robust(members(rng), lipschitz=10.0)
    for _ in range(2000):
        x = rng.random(4)
        step = rng.random(4) * (1 - x) if rng.random() < 0.5 else -rng.random(4) * x
        y = x + step
        g = active_supergradient(rob, x)
        assert robust_value(rob, y)[0] - robust_value(rob, x)[0] <= g @ (y - x) + 1e-8


def test_min_is_up_concave(rng):
    rob = make_robust(members(rng, n=4), lipschitz=10.0)
    ts = np.linspace(0, 1, 20)
    for _ in range(500):
        x = rng.random(4) * 0.5
        v = rng.random(4)
        v *= (1 - x).min() / v.max()
        vals = np.array([robust_value(rob, x + t * v)[0] for t in ts])
        assert np.all(vals[:-2] + vals[2:] <= 2 * vals[1:-1] + 1e-8)
