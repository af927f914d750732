import numpy as np
import pytest

from cornerstone import groupoid as gp
from cornerstone.decoupage import corner_model
from cornerstone.groupoid import GroupoidElement
from cornerstone.puff import IteratedPuff, corrupt, permutation_reports, puff_iterated


def _population(spec, seed, count=100):
    rng = np.random.default_rng(seed)
    triples = gp.random_composable_triples(spec, rng, count)
    samples = [t[0] for t in triples[: count // 2]] + [corrupt(t[0], rng, spec) for t in triples[count // 2:]]
    return samples, [(a, b) for a, b, _ in triples]


@pytest.mark.parametrize("n", [2, 3])
def test_all_orders_agree(n):
    spec = corner_model(n)
    samples, pairs = _population(spec, n)
    reports = permutation_reports(spec, samples, pairs)
    assert len(reports) == {2: 2, 3: 6}[n]
    assert all(r.agrees for r in reports)
    assert len({tuple(r.membership) for r in reports}) == 1


def test_corrupted_samples_are_rejected():
    spec = corner_model(2)
    rng = np.random.default_rng(0)
    bad = [corrupt(g, rng, spec) for g in gp.random_elements(spec, rng, 50)]
    assert not any(gp.is_member(spec, g) for g in bad)
    rep = puff_iterated(spec, (1, 2), bad)
    assert not any(rep.membership) and rep.membership_agrees


def test_mixed_element_both_orders():
    spec = corner_model(2)
    g = GroupoidElement((0.0, 0.4), (0.0, 1.3), {1: 2.5})
    for order in [(1, 2), (2, 1)]:
        tower = IteratedPuff(spec, order)
        lifted = tower.lift(g.x, g.y, g.lam)
        assert lifted is not None and tower.flatten(lifted) == g


def test_straddling_pair_not_lifted():
    tower = IteratedPuff(corner_model(2), (2, 1))
    assert tower.lift((0.0, 0.4), (0.2, 1.3), {}) is None


def test_order_must_be_permutation():
    with pytest.raises(ValueError):
        IteratedPuff(corner_model(2), (1, 1))
