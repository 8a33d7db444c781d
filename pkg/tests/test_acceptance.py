"""One test per acceptance criterion; each records a PASS/FAIL line shown at the end of the run."""

import itertools
import random
import time

import pytest

from sdgon.certificate import Requirement, validate, violated
from sdgon.chip_firing import (
    Divisor,
    _MaskTable,
    dgon,
    equivalence_class,
    reaches,
    reaches_bruteforce,
    reduction_script,
    weak_compositions,
)
from sdgon.corpus import (
    complete,
    cycle,
    from_edge_list,
    random_divisor,
    random_legal_script,
    random_reaching_witness,
    small_multigraphs,
    trees,
)
from sdgon.expansion import expand_certificate, verify_expansion
from sdgon.gonality import pipeline_selftest, sdgon_search
from sdgon.ilp import build_ilp, check_assignment, magnitude_bound
from sdgon.multigraph import subdivide
from sdgon.witness import build_certificate, extract_relevant

from reference_data import (
    RENAME,
    SEVEN_CHIP_SETS,
    mutated,
    seven_chip_assignment,
    seven_chip_certificate,
    two_edge_graph,
)


def test_criterion_1_seven_chip_ilp(acceptance):
    t0 = time.perf_counter()
    inst = build_ilp(two_edge_graph(), seven_chip_certificate())
    t = [f"t[v,{i}]" for i in range(1, 9)]
    expected = [({"l[e1]": 1}, ">=", 1), ({"l[e2]": 1}, ">=", 1)]
    expected += [({x: 1}, ">=", 1) for x in t]
    expected += [({t[i - 1]: 1}, "==", 1) for i in (1, 2, 3, 5, 6, 7, 8)]
    for e, p in (("e1", 4), ("e2", 3)):
        row = {f"l[{e}]": p, **{x: -1 for x in t}}
        expected += [(row, ">=", 0), (row, "<=", 0)]
    want = sorted((tuple(sorted(c.items())), op, b) for c, op, b in expected)
    got = sorted(c.key() for c in inst.constraints)
    accepted = check_assignment(inst, seven_chip_assignment())
    elapsed = time.perf_counter() - t0
    ok = got == want and accepted and elapsed < 1
    acceptance(1, ok, f"{len(got)} constraints match the hand-written system, solution accepted={accepted}, {elapsed:.3f}s")
    assert got == want
    assert accepted
    assert elapsed < 1


def test_criterion_2_seven_chip_expansion(acceptance):
    t0 = time.perf_counter()
    c = seven_chip_certificate()
    hmap, scripts = expand_certificate(two_edge_graph(), c, seven_chip_assignment())
    want = [sorted(RENAME.get(x, x) for x in s) for s in SEVEN_CHIP_SETS]
    got = [sorted(a) for a in scripts["v"]]
    verified = bool(verify_expansion(hmap, c.start.unlabeled(), scripts))
    elapsed = time.perf_counter() - t0
    ok = got == want and verified and elapsed < 1
    acceptance(2, ok, f"{len(got)}/12 sets, verified={verified}, {elapsed:.3f}s")
    assert got == want
    assert verified
    assert elapsed < 1


def test_criterion_3_reduce_vs_bruteforce(acceptance):
    t0 = time.perf_counter()
    graphs = list(small_multigraphs(5, 7))
    triples = disagreements = 0
    for g in graphs:
        table = _MaskTable(g)
        n = len(g.vertices)
        done = set()
        for k in range(4):
            for vec in weak_compositions(k, n):
                if vec in done:
                    continue
                # one exhaustive search per class answers every member and target
                cls = equivalence_class(g, Divisor(dict(zip(g.vertices, vec))), table=table)
                done.update(cls)
                hit = [any(x[i] > 0 for x in cls) for i in range(n)]
                for member in cls:
                    d = Divisor(dict(zip(g.vertices, member)))
                    for i, v in enumerate(g.vertices):
                        triples += 1
                        disagreements += reaches(g, d, v) != hit[i]
    # the class search is what reaches_bruteforce runs; tie the two together on a sample
    rng = random.Random(3)
    for g in rng.sample(graphs, 25):
        d = random_divisor(list(g.vertices), rng.randint(0, 3), rng)
        for v in g.vertices:
            assert reaches_bruteforce(g, d, v) == reaches(g, d, v)
    elapsed = time.perf_counter() - t0
    ok = disagreements == 0 and elapsed < 600
    acceptance(3, ok, f"{len(graphs)} graphs, {triples} triples, {disagreements} disagreements, {elapsed:.1f}s")
    assert disagreements == 0


def bruteforce_sdgon(g, k_max, l_max):
    best = None
    ids = [e.id for e in g.edges]
    for totals in itertools.product(range(2, 2 * l_max + 1), repeat=len(ids)):
        h = subdivide(g, dict(zip(ids, totals))).derived
        v = dgon(h, k_max, method="bruteforce").value
        if v is not None and (best is None or v < best):
            best = v
    return best


def test_criterion_4_gonality_table(acceptance):
    t0 = time.perf_counter()
    rows = []
    for n in range(1, 7):
        for t in trees(n):
            rows.append((f"tree{n}", dgon(t, 2, method="bruteforce").value, 1))
    for n in range(3, 7):
        rows.append((f"C{n}", dgon(cycle(n), 3, method="bruteforce").value, 2))
    rows.append(("K4", dgon(complete(4), 4, method="bruteforce").value, 3))
    rows.append(("sdgon(two-edge graph)", bruteforce_sdgon(two_edge_graph(), 3, 3), 2))
    rows.append(("sdgon_search(two-edge graph)", sdgon_search(two_edge_graph(), 3, 3).value, 2))
    wrong = [r for r in rows if r[1] != r[2]]
    elapsed = time.perf_counter() - t0
    ok = not wrong and elapsed < 300
    acceptance(4, ok, f"{len(rows) - len(wrong)}/{len(rows)} values match, {elapsed:.1f}s")
    assert not wrong, wrong


def test_criterion_5_relevant_bound(acceptance):
    rng = random.Random(5)
    worst = 0.0
    violations = 0
    for _ in range(500):
        n = rng.randint(1, 5)
        while True:
            edges = tuple(tuple(sorted(rng.sample(range(n), 2))) for _ in range(rng.randint(n - 1, n + 2))) if n > 1 else ()
            try:
                g = from_edge_list(n, edges)
                break
            except ValueError:
                continue
        hmap = subdivide(g, {e.id: rng.randint(1, 3) for e in g.edges})
        h = hmap.derived
        k = rng.randint(1, 3)
        d = random_divisor(list(h.vertices), k, rng)
        if rng.random() < 0.5:
            script = reduction_script(h, d, rng.choice(h.vertices))[1]
        else:
            script = random_legal_script(h, d, rng, 15)
        count = len(extract_relevant(hmap, d, script))
        bound = 2 * k * n + n
        violations += count > bound
        worst = max(worst, count / bound)
    acceptance(5, violations == 0, f"500 witnesses, {violations} violations, max count/bound {worst:.2f}")
    assert violations == 0


ISOLATED = {}
NOT_ISOLABLE = {Requirement.UNIQUE_ARRIVAL_PER_CHIP, Requirement.IMMEDIATE_ARRIVAL}


@pytest.mark.parametrize("req", [
    pytest.param(r, marks=pytest.mark.xfail(
        strict=True, reason="every violation of this requirement also violates another one"))
    if r in NOT_ISOLABLE else r
    for r in Requirement
], ids=lambda r: r.label)
def test_criterion_6_requirement_fuzzing(acceptance, req):
    got = violated(validate(two_edge_graph(), mutated(req)))
    ISOLATED[req] = got
    if len(ISOLATED) == len(Requirement):
        n = sum(ISOLATED[r] == {r} for r in Requirement)
        extra = ", ".join(f"{r.label} -> {sorted(x.label for x in ISOLATED[r])}"
                          for r in Requirement if ISOLATED[r] != {r})
        acceptance(6, n == len(Requirement), f"{n}/14 mutations isolate their requirement"
                   + (f"; co-violations: {extra}" if extra else ""))
    assert got == {req}


@pytest.mark.slow
def test_criterion_7_pipeline_selftest(acceptance):
    t0 = time.perf_counter()
    graphs = list(small_multigraphs(4, 5))
    bad = []
    certified = 0
    for g in graphs:
        rep = pipeline_selftest(g, 3, 3)
        certified += rep.value is not None
        bad.extend(rep.counterexamples)
    elapsed = time.perf_counter() - t0
    ok = not bad and elapsed < 1800
    acceptance(7, ok, f"{len(graphs)} graphs, {certified} certified within caps, "
                      f"{len(bad)} counterexamples, {elapsed:.1f}s")
    assert not bad, bad[:3]


def independent_bound(inst):
    # equation form: one slack per inequality, offset so all values stay positive
    ineq = sum(c.op != "==" for c in inst.constraints)
    n = len(inst.variables) + ineq
    m = len(inst.constraints)
    entries = [1] if ineq else []
    for c in inst.constraints:
        entries += [abs(a) for _, a in c.coeffs]
        entries.append(abs(c.rhs - 1) if c.op == ">=" else abs(c.rhs + 1) if c.op == "<=" else abs(c.rhs))
    a = max(entries)
    return n * (m * a) ** (2 * m + 1)


def test_criterion_8_magnitude_bound(acceptance):
    rng = random.Random(8)
    agree = 0
    for _ in range(100):
        w = None
        while w is None:
            w = random_reaching_witness(rng, n_max=4, k_max=3, l_max=3)
        inst = build_ilp(w.base, build_certificate(w))
        agree += magnitude_bound(inst) == independent_bound(inst)
    acceptance(8, agree == 100, f"{agree}/100 instances agree with the independent formula")
    assert agree == 100
