import random

import pytest

from sdgon.certificate import PairSequence
from sdgon.chip_firing import FiringScript, reduce_at, run_script
from sdgon.corpus import from_edge_list, random_reaching_witness
from sdgon.expansion import (
    ScheduleError,
    expand_certificate,
    replay_matches,
    replicate_sets,
    staircase,
    verify_expansion,
)
from sdgon.ilp import build_ilp, check_assignment, solve, t_var
from sdgon.multigraph import build_g1, subdivide
from sdgon.witness import build_certificate, canonical_witness, ground_truth

from reference_data import seven_chip_assignment, seven_chip_certificate, seven_chip_script, two_edge_graph


def seven_chip_expansion():
    return expand_certificate(two_edge_graph(), seven_chip_certificate(), seven_chip_assignment())


def test_replicate_seven_chip():
    seq = seven_chip_certificate().sequence("v")
    t = {i: seven_chip_assignment()[t_var("v", i)] for i in range(1, 9)}
    sets = replicate_sets(seq, t)
    assert len(sets) == 12
    assert [i for i, _ in sets] == [1, 2, 3, 4, 4, 4, 4, 4, 5, 6, 7, 8]


def test_replicate_last_pair_is_copied_once():
    seq = PairSequence.build("v", [(["u"], []), (["u"], [])])
    assert len(replicate_sets(seq, {1: 3, 2: 7})) == 4
    with pytest.raises(ValueError):
        replicate_sets(seq, {1: 0, 2: 1})


def test_staircase_example_edges():
    assert staircase(4, 4, 12, 3) == [0] * 4 + [1] * 4 + [2] * 4
    assert staircase(3, 3, 12, 4) == [0] * 3 + [1] * 3 + [2] * 3 + [3] * 3


def test_staircase_uneven():
    assert staircase(2, 1, 3, 2) == [0, 0, 1]


@pytest.mark.parametrize("args", [(2, 1, 2, 2), (2, 1, 4, 2), (1, 0, 2, 2), (0, 0, 1, 1), (1, 2, 3, 1)])
def test_staircase_rejects_bad_windows(args):
    with pytest.raises(ScheduleError):
        staircase(*args)


def test_staircase_conservation():
    # each prefix value must have between q and p sets, non-increasing
    for p in range(1, 5):
        for q in range(0, p + 1):
            for l in range(1, 5):
                lo = q * l + (p - q) if q else 1
                hi = p * l - (p - q) if q else p * (l - 1)
                for total in range(lo, hi + 1):
                    out = staircase(p, q, total, l)
                    widths = [out.count(c) for c in range(l)]
                    assert out == sorted(out)
                    assert all(x <= p for x in widths)
                    assert widths == sorted(widths, reverse=True)
                    if q:
                        assert widths[-1] >= q


def test_expansion_of_seven_chip_sets():
    hmap, scripts = seven_chip_expansion()
    assert hmap.lengths == {"e1": 3, "e2": 4}
    assert scripts["v"] == seven_chip_script()
    assert scripts["u"] == FiringScript()


def test_expansion_of_seven_chip_verifies():
    hmap, scripts = seven_chip_expansion()
    start = seven_chip_certificate().start.unlabeled()
    assert verify_expansion(hmap, start, scripts)
    assert verify_expansion(hmap, start, scripts, exact_fallback=False)
    assert replay_matches(two_edge_graph(), seven_chip_certificate(), hmap, scripts)


def test_empty_sequences_give_g1():
    g = from_edge_list(1, ())
    c = build_certificate(canonical_witness(build_g1(g), {"v0": 1}))
    hmap, scripts = expand_certificate(g, c, solve(build_ilp(g, c)))
    assert scripts == {"v0": FiringScript()}
    assert verify_expansion(hmap, {"v0": 1}, scripts)


def test_invalid_set_is_reported():
    hmap, scripts = seven_chip_expansion()
    report = verify_expansion(hmap, {"u": 3}, scripts)
    assert not report and report.reason == "invalid-set" and report.target == "v"


def test_unreached_target_is_reported():
    hmap, scripts = seven_chip_expansion()
    scripts = dict(scripts, v=FiringScript(list(scripts["v"])[:4]))
    report = verify_expansion(hmap, {"u": 7}, scripts)
    assert report.reason == "target-unreached"


def stranded_instance():
    # a 9-cycle with two chips: the vertex e1.b:1 is reachable but no
    # replayed divisor touches it or covers both ends of its edge
    g1 = build_g1(from_edge_list(2, ((0, 1), (0, 1))))
    hmap = subdivide(g1.derived, {"e0.a": 1, "e0.b": 2, "e1.a": 3, "e1.b": 3})
    w = canonical_witness(hmap, {"<e0>": 1, "v0": 1})
    c = build_certificate(w)
    return (w.base, c) + expand_certificate(w.base, c, ground_truth(w))


def test_evidence_gap():
    base, c, hmap, scripts = stranded_instance()
    start = c.start.unlabeled()
    report = verify_expansion(hmap, start, scripts, exact_fallback=False)
    assert report.reason == "unreached-interior" and report.target == "e1.b:1"
    assert reduce_at(hmap.derived, start, "e1.b:1")["e1.b:1"] >= 1
    assert verify_expansion(hmap, start, scripts)


def test_solver_solution_expands():
    g, c = two_edge_graph(), seven_chip_certificate()
    a = solve(build_ilp(g, c))
    hmap, scripts = expand_certificate(g, c, a)
    assert verify_expansion(hmap, c.start.unlabeled(), scripts)
    assert replay_matches(g, c, hmap, scripts)


@pytest.mark.parametrize("seed", range(40))
def test_random_round_trip(seed):
    rng = random.Random(seed)
    w = None
    while w is None:
        w = random_reaching_witness(rng, n_max=4, k_max=3, l_max=3)
    c = build_certificate(w)
    inst = build_ilp(w.base, c)
    truth = ground_truth(w)
    for a in (truth, solve(inst)):
        hmap, scripts = expand_certificate(w.base, c, a)
        start = c.start.unlabeled()
        assert verify_expansion(hmap, start, scripts)
        assert replay_matches(w.base, c, hmap, scripts)
        for v, s in scripts.items():
            assert run_script(hmap.derived, start, s)[-1][v] >= 1


@pytest.mark.parametrize("seed", range(40))
def test_random_feasible_points_expand(seed):
    # any ILP solution, not only the realised one, must expand soundly
    rng = random.Random(10_000 + seed)
    w = None
    while w is None:
        w = random_reaching_witness(rng, n_max=4, k_max=3, l_max=3)
    c = build_certificate(w)
    inst = build_ilp(w.base, c)
    truth = ground_truth(w)
    for _ in range(20):
        a = {k: max(1, v + rng.randint(-1, 3)) for k, v in truth.items()}
        if not check_assignment(inst, a):
            continue
        hmap, scripts = expand_certificate(w.base, c, a)
        assert verify_expansion(hmap, c.start.unlabeled(), scripts)
        assert replay_matches(w.base, c, hmap, scripts)
