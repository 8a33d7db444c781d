import pytest

from sdgon.certificate import Requirement
from sdgon.chip_firing import dgon
from sdgon.corpus import complete, cycle, from_edge_list, small_multigraphs, trees
from sdgon.gonality import dgon_upper_chain, pipeline_selftest, sdgon_search, verify_np
from sdgon.ilp import build_ilp, solve
from sdgon.multigraph import build_g1
from sdgon.witness import build_certificate, witness_from_h_divisor

from reference_data import seven_chip_assignment, seven_chip_certificate, two_edge_graph, mutated


def verify_seven_chip(k=7, a=None, **kw):
    return verify_np(two_edge_graph(), k, seven_chip_certificate(), a or seven_chip_assignment(),
                     subdivide_once=False, **kw)


def test_seven_chip_accepted():
    assert verify_seven_chip()
    assert verify_seven_chip(audit=True)


def test_seven_chip_rejected_below_its_degree():
    v = verify_seven_chip(k=6)
    assert not v and v.stage == "degree"


def test_seven_chip_rejected_with_bad_gap():
    a = dict(seven_chip_assignment(), **{"t[v,4]": 4})
    v = verify_seven_chip(a=a)
    assert not v and v.stage == "ilp"


def test_missing_assignment_is_a_rejection():
    a = dict(seven_chip_assignment())
    del a["l[e1]"]
    assert verify_seven_chip(a=a).stage == "ilp"


def test_mutated_certificate_is_rejected():
    v = verify_np(two_edge_graph(), 7, mutated(Requirement.NEXT_ARRIVAL), seven_chip_assignment(),
                  subdivide_once=False)
    assert v.stage == "validate" and v.detail.startswith("NextArrival")


def test_seven_chip_is_not_a_g1_certificate():
    v = verify_np(two_edge_graph(), 7, seven_chip_certificate(), seven_chip_assignment())
    # its edge ids do not exist in G1, which validation reports as an incidence violation
    assert not v and v.stage == "validate"
    assert v.detail.startswith(Requirement.INCIDENCE.label)


def test_search_two_edge():
    res = sdgon_search(two_edge_graph(), 3, 3)
    assert res.value == 2
    w = witness_from_h_divisor(two_edge_graph(), res.lengths, res.divisor)
    w.check()


def test_search_trees():
    for n in range(1, 5):
        for t in trees(n):
            assert sdgon_search(t, 2, 1).value == 1


def test_search_k4():
    assert sdgon_search(complete(4), 3, 2).value == 3


def test_search_reports_binding_cap():
    res = sdgon_search(cycle(3), 1, 2)
    assert res.exceeded and res.binding == "k_max"
    with pytest.raises(ValueError):
        sdgon_search(cycle(3), 0, 2)


def test_search_witness_gives_accepted_certificate():
    g = cycle(3)
    res = sdgon_search(g, 3, 2)
    w = witness_from_h_divisor(g, res.lengths, res.divisor)
    c = build_certificate(w)
    a = solve(build_ilp(w.base, c))
    assert verify_np(g, res.value, c, a, audit=True)


@pytest.mark.parametrize("g", [two_edge_graph(), from_edge_list(2, ((0, 1),)), from_edge_list(1, ()), cycle(3)],
                         ids=repr)
def test_selftest_small(g):
    rep = pipeline_selftest(g, 3, 2)
    assert rep.ok, rep.counterexamples
    assert rep.value is not None


def test_monotonicity_chain():
    for g in list(small_multigraphs(3, 4)):
        chain = dgon_upper_chain(g, 3, 2)
        vals = [chain["sdgon"], chain["dgon_g1"], chain["dgon"]]
        known = [x for x in vals if x is not None]
        assert known == sorted(known)


def test_lmax_one_is_g1():
    g = from_edge_list(2, ((0, 1), (0, 1), (0, 1)))
    assert sdgon_search(g, 3, 1).value == dgon(build_g1(g).derived, 3).value
