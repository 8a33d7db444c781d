"""Certificate verification, capped stable gonality search and an end-to-end self test."""

from __future__ import annotations

import itertools
import time
from typing import Dict, List, Mapping, NamedTuple, Optional

from .certificate import PartialCertificate, validate
from .chip_firing import GonalityResult, dgon, find_divisor
from .expansion import ScheduleError, expand_certificate, replay_matches, verify_expansion
from .ilp import DEFAULT_CAP, MissingVariableError, build_ilp, check_assignment, failing_constraints, solve
from .multigraph import Multigraph, build_g1, subdivide
from .witness import build_certificate, ground_truth, witness_from_h_divisor


class Verdict(NamedTuple):
    accept: bool
    stage: Optional[str] = None
    detail: str = ""

    def __bool__(self):
        return self.accept


def verify_np(g: Multigraph, k: int, c: PartialCertificate, a: Mapping[str, int], *,
              subdivide_once: bool = True, audit: bool = False) -> Verdict:
    """Check a certificate and an ILP assignment for ``sdgon(g) <= k``.

    The certificate lives on G1 unless ``subdivide_once`` is False, in which
    case ``g`` itself is the base graph.  No search is involved.  ``audit``
    additionally expands the certificate and replays the result.
    """
    base = build_g1(g).derived if subdivide_once else g
    if c.k > k or c.start.k > k:
        return Verdict(False, "degree", f"certificate uses {max(c.k, c.start.k)} chips, k = {k}")
    try:
        c.check_structure(base)
    except ValueError as exc:
        return Verdict(False, "structure", str(exc))
    report = validate(base, c)
    if report:
        return Verdict(False, "validate", str(report[0]))
    inst = build_ilp(base, c, check=False)
    try:
        if not check_assignment(inst, a):
            return Verdict(False, "ilp", str(failing_constraints(inst, a)[0]))
    except MissingVariableError as exc:
        return Verdict(False, "ilp", str(exc))
    if audit:
        try:
            hmap, scripts = expand_certificate(base, c, a)
        except ScheduleError as exc:
            return Verdict(False, "audit", str(exc))
        res = verify_expansion(hmap, c.start.unlabeled(), scripts)
        if not res:
            return Verdict(False, "audit", f"{res.reason} at {res.target}: {res.detail}")
        if not replay_matches(base, c, hmap, scripts):
            return Verdict(False, "audit", "replay does not record the certificate's moves")
    return Verdict(True)


def sdgon_search(g: Multigraph, k_max: int, l_max: int) -> GonalityResult:
    """Least ``k <= k_max`` with dgon <= k on some subdivision of G1 with lengths in ``[1, l_max]``.

    Only the total length of each original edge matters, so the search
    runs over totals in ``[2, 2 * l_max]``.  The witness carries those
    totals (keyed by original edge) and a divisor on ``subdivide(g, totals)``.
    """
    if k_max < 1 or l_max < 1:
        raise ValueError("k_max and l_max must be at least 1")
    ids = [e.id for e in g.edges]
    grid = list(itertools.product(range(2, 2 * l_max + 1), repeat=len(ids)))
    for k in range(1, k_max + 1):
        for totals in grid:
            lengths = dict(zip(ids, totals))
            h = subdivide(g, lengths).derived
            d = find_divisor(h, k, pruning="reduced")
            if d is not None:
                return GonalityResult(k, d, lengths)
    return GonalityResult(None, binding="k_max")


class SelftestReport(NamedTuple):
    graph: Multigraph
    k: int
    value: Optional[int]
    timings: Dict[str, float]
    counterexamples: List[dict]

    @property
    def ok(self) -> bool:
        return not self.counterexamples


def pipeline_selftest(g: Multigraph, k: int, l_max: int, *, cap: int = DEFAULT_CAP) -> SelftestReport:
    """Search, certify, solve, expand and replay; collect anything that fails.

    Both the witness's own lengths and gaps and the solver's least solution
    are pushed through the verifier in audit mode.
    """
    timings: Dict[str, float] = {}
    bad: List[dict] = []

    def clock(stage, fn, *args, **kw):
        t0 = time.perf_counter()
        out = fn(*args, **kw)
        timings[stage] = timings.get(stage, 0.0) + time.perf_counter() - t0
        return out

    res = clock("search", sdgon_search, g, k, l_max)
    if res.exceeded:
        return SelftestReport(g, k, None, timings, bad)
    wit = clock("witness", witness_from_h_divisor, g, res.lengths, res.divisor)

    def fail(stage, detail):
        bad.append({"stage": stage, "detail": detail, "totals": res.lengths,
                    "divisor": res.divisor.to_json()})

    try:
        wit.check()
    except ValueError as exc:
        fail("witness", str(exc))
        return SelftestReport(g, k, res.value, timings, bad)
    g1 = wit.base
    c = clock("certificate", build_certificate, wit, k)
    report = clock("validate", validate, g1, c)
    if report:
        fail("validate", str(report[0]))
        return SelftestReport(g, k, res.value, timings, bad)
    inst = clock("ilp", build_ilp, g1, c)
    truth = ground_truth(wit)
    if not check_assignment(inst, truth):
        fail("ground-truth", str(failing_constraints(inst, truth)[0]))
    else:
        v = clock("verify", verify_np, g, k, c, truth, audit=True)
        if not v:
            fail(f"verify-ground-truth:{v.stage}", v.detail)
    sol = clock("solve", solve, inst, cap)
    if sol is None:
        fail("solve", f"no solution within cap {cap}")
    else:
        v = clock("verify", verify_np, g, k, c, sol, audit=True)
        if not v:
            fail(f"verify-solution:{v.stage}", v.detail)
    return SelftestReport(g, k, res.value, timings, bad)


def dgon_upper_chain(g: Multigraph, k_max: int, l_max: int) -> Dict[str, Optional[int]]:
    """sdgon within caps, dgon of G1 and dgon of ``g``, for monotonicity checks."""
    return {
        "sdgon": sdgon_search(g, k_max, l_max).value,
        "dgon_g1": dgon(build_g1(g).derived, k_max, pruning="reduced").value,
        "dgon": dgon(g, k_max, pruning="reduced").value,
    }


__all__ = ["Verdict", "verify_np", "sdgon_search", "SelftestReport", "pipeline_selftest",
           "dgon_upper_chain"]
