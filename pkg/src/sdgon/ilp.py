"""The integer program attached to a partial certificate.

Variables are ``l[e]`` (how many edges base edge ``e`` becomes) and
``t[w,i]`` (how many sets are fired from the ``i``-th relevant set of
target ``w`` up to, not including, the next relevant one).

:func:`check_assignment` is the verifier path and only substitutes.
:func:`solve` is a small exact feasibility search used to generate
certificates; it is not needed to verify one.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, NamedTuple, Optional, Sequence, Tuple

from .certificate import PairSequence, PartialCertificate, validate
from .multigraph import Multigraph

DEFAULT_CAP = 2 ** 16

RULES = (
    "edge-length",
    "firing-gap",
    "immediate-arrival",
    "consecutive-departure",
    "arrival-step",
    "transit-upper",
    "transit-lower",
    "transit-open",
)


class MissingVariableError(KeyError):
    pass


class PreconditionError(ValueError):
    pass


def l_var(edge: str) -> str:
    return f"l[{edge}]"


def t_var(target: str, i: int) -> str:
    return f"t[{target},{i}]"


class Constraint(NamedTuple):
    """``sum(coef * var) <op> rhs`` with ``op`` one of ``>=``, ``<=``, ``==``."""

    coeffs: Tuple[Tuple[str, int], ...]
    op: str
    rhs: int
    rule: str
    where: Tuple[Tuple[str, object], ...] = ()

    @classmethod
    def make(cls, coeffs: Mapping[str, int], op: str, rhs: int, rule: str, **where) -> "Constraint":
        if op not in (">=", "<=", "=="):
            raise ValueError(f"bad relation {op!r}")
        if rule not in RULES:
            raise ValueError(f"unknown rule {rule!r}")
        merged: Dict[str, int] = {}
        for v, a in coeffs.items():
            merged[v] = merged.get(v, 0) + a
        items = tuple(sorted((v, int(a)) for v, a in merged.items() if a))
        return cls(items, op, int(rhs), rule, tuple(sorted(where.items())))

    def lhs(self, values: Mapping[str, int]) -> int:
        return sum(a * values[v] for v, a in self.coeffs)

    def holds(self, values: Mapping[str, int]) -> bool:
        x = self.lhs(values)
        if self.op == ">=":
            return x >= self.rhs
        if self.op == "<=":
            return x <= self.rhs
        return x == self.rhs

    def key(self):
        """Comparison key that ignores provenance."""
        return (self.coeffs, self.op, self.rhs)

    def __str__(self):
        terms = " + ".join(v if a == 1 else f"{a}*{v}" for v, a in self.coeffs) or "0"
        return f"{terms} {self.op} {self.rhs}  [{self.rule}]"


@dataclass(frozen=True)
class IlpInstance:
    variables: Tuple[str, ...]
    constraints: Tuple[Constraint, ...]

    def to_json(self) -> dict:
        return {
            "variables": list(self.variables),
            "constraints": [
                {"coeffs": dict(c.coeffs), "op": c.op, "rhs": c.rhs, "rule": c.rule,
                 "where": {k: v for k, v in c.where}}
                for c in self.constraints
            ],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "IlpInstance":
        cons = tuple(
            Constraint.make({str(v): int(a) for v, a in c["coeffs"].items()}, c["op"], int(c["rhs"]),
                            c.get("rule", "edge-length"), **c.get("where", {}))
            for c in data["constraints"]
        )
        return cls(tuple(str(v) for v in data["variables"]), cons)

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1)


class EdgeTransit(NamedTuple):
    """Chips travelling along one base edge for one target.

    Departures from ``tail`` happen at pairs ``i0..i1``, arrivals at
    ``head`` at pairs ``i2..i3``.  When nothing arrives (``q == 0``) the
    window closes just before pair ``end`` (when ``head`` joins the fired
    set) or, if ``end`` is None, with the final set.
    """

    target: str
    edge: str
    tail: str
    head: str
    i0: int
    i1: int
    i2: Optional[int]
    i3: Optional[int]
    end: Optional[int] = None

    @property
    def p(self) -> int:
        return self.i1 - self.i0 + 1

    @property
    def q(self) -> int:
        return 0 if self.i2 is None else self.i3 - self.i2 + 1

    @property
    def is_open(self) -> bool:
        return self.i2 is None

    def gap_indices(self, a_w: int) -> List[int]:
        """Indices ``i`` whose ``t[w,i]`` count the sets in the window."""
        if not self.is_open:
            return list(range(self.i0, self.i3 + 1))
        last = (self.end - 1) if self.end is not None else a_w - 1
        return list(range(self.i0, last + 1))

    def fixed_extra(self) -> int:
        """Sets in the window not counted by any ``t`` (the single final copy)."""
        return 1 if self.is_open and self.end is None else 0

    def slack(self, lengths: Mapping[str, int], t: Mapping[int, int], a_w: int) -> int:
        total = sum(t[i] for i in self.gap_indices(a_w)) + self.fixed_extra()
        return total - self.q * lengths[self.edge]


def transit_windows(g: Multigraph, seq: PairSequence) -> List[EdgeTransit]:
    """All transit windows of one target sequence, ordered by (edge, tail)."""
    dep: Dict[Tuple[str, str], List[int]] = {}
    arr: Dict[Tuple[str, str], List[int]] = {}
    for i, pair in enumerate(seq.pairs, start=1):
        for t in pair.M:
            book = dep if t.sign < 0 else arr
            book.setdefault((t.edge, t.vertex), []).append(i)
    out = []
    for (eid, tail), idx in sorted(dep.items()):
        e = g.edge_map[eid]
        head = e.other(tail)
        got = arr.get((eid, head))
        i0, i1 = min(idx), max(idx)
        if got:
            out.append(EdgeTransit(seq.target, eid, tail, head, i0, i1, min(got), max(got)))
        else:
            end = next((i for i in range(i1 + 1, len(seq.pairs) + 1) if head in seq.pairs[i - 1].A), None)
            out.append(EdgeTransit(seq.target, eid, tail, head, i0, i1, None, None, end))
    return out


def build_ilp(g: Multigraph, c: PartialCertificate, *, check: bool = True) -> IlpInstance:
    """Construct the integer program of certificate ``c`` on base graph ``g``.

    Refuses certificates that do not validate unless ``check`` is False.
    """
    if check:
        report = validate(g, c)
        if report:
            raise PreconditionError(f"certificate is not valid: {report[0]}")
    variables: List[str] = []
    cons: List[Constraint] = []
    for e in g.edges:
        variables.append(l_var(e.id))
        cons.append(Constraint.make({l_var(e.id): 1}, ">=", 1, "edge-length", edge=e.id))
    immediate = set()
    for w in g.vertices:
        seq = c.sequence(w)
        a_w = len(seq.pairs)
        for i in range(1, a_w + 1):
            variables.append(t_var(w, i))
            cons.append(Constraint.make({t_var(w, i): 1}, ">=", 1, "firing-gap", target=w, index=i))
        for i, pair in enumerate(seq.pairs, start=1):
            for t in pair.M:
                if t.sign < 0:
                    other = g.edge_map[t.edge].other(t.vertex)
                    if (other, t.chip, 1, t.edge) in pair.M:
                        immediate.add(t.edge)
        for i in range(1, a_w):
            here = {(t.vertex, t.edge) for t in seq.pairs[i - 1].M if t.sign < 0}
            there = {(t.vertex, t.edge) for t in seq.pairs[i].M if t.sign < 0}
            if here & there:
                cons.append(Constraint.make({t_var(w, i): 1}, "==", 1, "consecutive-departure", target=w, index=i))
        for i, pair in enumerate(seq.pairs, start=1):
            if any(t.sign > 0 for t in pair.M):
                cons.append(Constraint.make({t_var(w, i): 1}, "==", 1, "arrival-step", target=w, index=i))
        for tr in transit_windows(g, seq):
            cons.extend(_transit_constraints(tr, a_w))
    for eid in sorted(immediate):
        cons.append(Constraint.make({l_var(eid): 1}, "==", 1, "immediate-arrival", edge=eid))
    return IlpInstance(tuple(variables), tuple(cons))


def _transit_constraints(tr: EdgeTransit, a_w: int) -> List[Constraint]:
    p, q = tr.p, tr.q
    lv = l_var(tr.edge)
    where = dict(target=tr.target, edge=tr.edge, tail=tr.tail)
    coeffs = {lv: p}
    for i in tr.gap_indices(a_w):
        coeffs[t_var(tr.target, i)] = coeffs.get(t_var(tr.target, i), 0) - 1
    if tr.is_open:
        # no chip reaches the head: each of the p chips moved at most l - 1 steps
        return [Constraint.make(coeffs, ">=", p + tr.fixed_extra(), "transit-open", **where)]
    upper = Constraint.make(coeffs, ">=", (p - 1) - (q - 1), "transit-upper", **where)
    lower_coeffs = {v: (q if v == lv else a) for v, a in coeffs.items()}
    lower = Constraint.make(lower_coeffs, "<=", (q - 1) - (p - 1), "transit-lower", **where)
    return [upper, lower]


def check_assignment(inst: IlpInstance, values: Mapping[str, int]) -> bool:
    """Whether ``values`` satisfies every constraint.  Pure substitution."""
    missing = [v for v in inst.variables if v not in values]
    if missing:
        raise MissingVariableError(f"unassigned variables: {', '.join(missing[:5])}")
    return all(c.holds(values) for c in inst.constraints)


def failing_constraints(inst: IlpInstance, values: Mapping[str, int]) -> List[Constraint]:
    return [c for c in inst.constraints if not c.holds(values)]


# -- solver ------------------------------------------------------------------

class _Row(NamedTuple):
    terms: Tuple[Tuple[int, int], ...]  # (variable index, coefficient)
    rhs: int  # sum >= rhs


def _rows(inst: IlpInstance, order: Sequence[str]) -> List[_Row]:
    pos = {v: i for i, v in enumerate(order)}
    rows = []
    for c in inst.constraints:
        for v, _ in c.coeffs:
            if v not in pos:
                raise MissingVariableError(f"constraint uses undeclared variable {v}")
        terms = tuple((pos[v], a) for v, a in c.coeffs)
        if c.op in (">=", "=="):
            rows.append(_Row(terms, c.rhs))
        if c.op in ("<=", "=="):
            rows.append(_Row(tuple((i, -a) for i, a in terms), -c.rhs))
    return rows


def _propagate(rows: List[_Row], watch: List[List[int]], lo: List[int], hi: List[int],
               dirty: Iterable[int]) -> bool:
    """Bounds propagation to a fixpoint; False on an empty domain."""
    queue = list(dict.fromkeys(dirty))
    queued = set(queue)
    while queue:
        r = queue.pop()
        queued.discard(r)
        row = rows[r]
        top = 0
        for i, a in row.terms:
            top += a * (hi[i] if a > 0 else lo[i])
        if top < row.rhs:
            return False
        for i, a in row.terms:
            rest = top - a * (hi[i] if a > 0 else lo[i])
            need = row.rhs - rest
            if a > 0:
                bound = -((-need) // a)
                if bound > lo[i]:
                    lo[i] = bound
                    changed = True
                else:
                    changed = False
            else:
                bound = (-need) // (-a)
                if bound < hi[i]:
                    hi[i] = bound
                    changed = True
                else:
                    changed = False
            if changed:
                if lo[i] > hi[i]:
                    return False
                for r2 in watch[i]:
                    if r2 not in queued:
                        queued.add(r2)
                        queue.append(r2)
    return True


def solve(inst: IlpInstance, cap: int = DEFAULT_CAP) -> Optional[Dict[str, int]]:
    """The lexicographically least solution with every value in ``[1, cap]``.

    Variables are ordered by name.  Returns None when no solution exists
    within the cap.  Depth-first search over ascending values with bounds
    propagation, so the first solution found is the least one.
    """
    if cap < 1:
        raise ValueError("cap must be positive")
    order = sorted(inst.variables)
    rows = _rows(inst, order)
    watch: List[List[int]] = [[] for _ in order]
    for r, row in enumerate(rows):
        for i, _ in row.terms:
            watch[i].append(r)
    lo = [1] * len(order)
    hi = [cap] * len(order)
    if not _propagate(rows, watch, lo, hi, range(len(rows))):
        return None
    found = _search(rows, watch, lo, hi, 0)
    if found is None:
        return None
    return dict(zip(order, found))


def _search(rows, watch, lo, hi, k) -> Optional[List[int]]:
    n = len(lo)
    while k < n and lo[k] == hi[k]:
        k += 1
    if k == n:
        return list(lo)
    for value in range(lo[k], hi[k] + 1):
        lo2, hi2 = list(lo), list(hi)
        lo2[k] = hi2[k] = value
        if _propagate(rows, watch, lo2, hi2, watch[k]):
            found = _search(rows, watch, lo2, hi2, k + 1)
            if found is not None:
                return found
    return None


# -- magnitude bound ---------------------------------------------------------

class EquationForm(NamedTuple):
    variables: Tuple[str, ...]
    rows: Tuple[Dict[str, int], ...]
    rhs: Tuple[int, ...]


def equation_form(inst: IlpInstance) -> EquationForm:
    """One slack variable per inequality turns every constraint into an equation.

    Slacks are offset by one (``lhs - s = rhs - 1`` for ``>=``) so that every
    feasible point extends to a solution with all values positive.
    """
    variables = list(inst.variables)
    rows, rhs = [], []
    for n, c in enumerate(inst.constraints):
        row = dict(c.coeffs)
        b = c.rhs
        if c.op != "==":
            s = f"s[{n}]"
            variables.append(s)
            row[s] = -1 if c.op == ">=" else 1
            b = b - 1 if c.op == ">=" else b + 1
        rows.append(row)
        rhs.append(b)
    return EquationForm(tuple(variables), tuple(rows), tuple(rhs))


def magnitude_bound(inst: IlpInstance) -> int:
    """``n * (m * a) ** (2m + 1)`` for the equation form of ``inst``.

    ``n`` counts variables including slacks, ``m`` equations, and ``a`` is
    the largest absolute coefficient or right-hand side.
    """
    eq = equation_form(inst)
    n, m = len(eq.variables), len(eq.rows)
    a = max([abs(x) for row in eq.rows for x in row.values()] + [abs(b) for b in eq.rhs] + [0])
    return n * (m * a) ** (2 * m + 1)


def extend_with_slacks(inst: IlpInstance, values: Mapping[str, int]) -> Dict[str, int]:
    """Slack values making the equation form hold; a slack below one means the inequality fails."""
    out = dict(values)
    for n, c in enumerate(inst.constraints):
        if c.op == "==":
            continue
        lhs = c.lhs(values)
        out[f"s[{n}]"] = (lhs - c.rhs if c.op == ">=" else c.rhs - lhs) + 1
    return out
