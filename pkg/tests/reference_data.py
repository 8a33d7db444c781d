"""Two vertices joined by two edges, a seven-chip certificate on it, and single-requirement mutations."""

import copy
import json
from importlib import resources

from sdgon.certificate import PartialCertificate, Requirement
from sdgon.chip_firing import Divisor, FiringScript
from sdgon.multigraph import graph_from_dict, subdivide

DATA = resources.files("sdgon") / "data"


def two_edge_graph():
    return graph_from_dict(json.loads((DATA / "two_edge_graph.json").read_text()))


def seven_chip_json():
    return json.loads((DATA / "seven_chip_certificate.json").read_text())


def seven_chip_certificate():
    return PartialCertificate.from_json(seven_chip_json())


def seven_chip_assignment():
    return json.loads((DATA / "seven_chip_assignment.json").read_text())


# x1, x2 subdivide e1 and y1, y2, y3 subdivide e2
RENAME = {"x1": "e1:1", "x2": "e1:2", "y1": "e2:1", "y2": "e2:2", "y3": "e2:3"}

SEVEN_CHIP_SETS = [
    ["u"], ["u"], ["u"], ["u", "y1"], ["u", "x1", "y1"], ["u", "x1", "y1"],
    ["u", "x1", "y1", "y2"], ["u", "x1", "y1", "y2"], ["u", "x1", "x2", "y1", "y2"],
    ["u", "x1", "x2", "y1", "y2", "y3"], ["u", "x1", "x2", "y1", "y2", "y3"],
    ["u", "x1", "x2", "y1", "y2", "y3"],
]


def seven_chip_script():
    return FiringScript([[RENAME.get(x, x) for x in s] for s in SEVEN_CHIP_SETS])


def seven_chip_h():
    return subdivide(two_edge_graph(), {"e1": 3, "e2": 4})


def seven_chip_start():
    return Divisor({"u": 7})


# -- mutations ------------------------------------------------------------------

def _v_pairs(data):
    return next(s for s in data["sequences"] if s["target"] == "v")["pairs"]


def _u_seq(data):
    return next(s for s in data["sequences"] if s["target"] == "u")


def _add(i, *tuples):
    def f(data):
        _v_pairs(data)[i - 1]["M"].extend([list(t) for t in tuples])
    return f


def _set_a(i, a):
    def f(data):
        _v_pairs(data)[i - 1]["A"] = list(a)
    return f


def _move(t, src, dst):
    def f(data):
        pairs = _v_pairs(data)
        pairs[src - 1]["M"].remove(list(t))
        pairs[dst - 1]["M"].append(list(t))
    return f


def _drop(i, t):
    def f(data):
        _v_pairs(data)[i - 1]["M"].remove(list(t))
    return f


def _truncate(n):
    def f(data):
        del _v_pairs(data)[n:]
    return f


def _u_pairs(*pairs):
    def f(data):
        _u_seq(data)["pairs"] = [{"A": list(a), "M": [list(t) for t in m]} for a, m in pairs]
    return f


R = Requirement

# requirement -> (description, edit of the seven-chip certificate JSON, violations it produces)
MUTATIONS = {
    R.INCIDENCE: ("v pair 6 gains a departure along an unknown edge", _add(6, ("v", 1, -1, "e3")), {R.INCIDENCE}),
    R.DEPARTURE: ("u leaves A_{v,1}", _set_a(1, []), {R.DEPARTURE}),
    R.ARRIVAL: ("v joins A_{v,8}", _set_a(8, ["u", "v"]), {R.ARRIVAL}),
    R.UNIQUE_DEPARTURE_PER_EDGE: ("chip 6 departs one pair early",
                                  _move(("u", 6, -1, "e2"), 3, 2), {R.UNIQUE_DEPARTURE_PER_EDGE}),
    R.UNIQUE_ARRIVAL_PER_EDGE: ("chip 1 arrives one pair late",
                                _move(("v", 1, 1, "e1"), 5, 6), {R.UNIQUE_ARRIVAL_PER_EDGE}),
    R.UNIQUE_DEPARTURE_PER_CHIP: ("chip 7 also departs along e2", _add(4, ("u", 7, -1, "e2")),
                                  {R.UNIQUE_DEPARTURE_PER_CHIP}),
    # a second arrival of one chip always lacks a matching departure as well
    R.UNIQUE_ARRIVAL_PER_CHIP: ("chip 1 also arrives along e2", _add(5, ("v", 1, 1, "e2")),
                                {R.UNIQUE_ARRIVAL_PER_CHIP, R.ARRIVAL_LOCATION}),
    # a crossed departure and arrival needs a second departure of the same chip
    R.IMMEDIATE_ARRIVAL: ("target u: chip 1 leaves along both edges and arrives along e1",
                          _u_pairs((["u"], [("u", 1, -1, "e1"), ("u", 1, -1, "e2"), ("v", 1, 1, "e1")])),
                          {R.IMMEDIATE_ARRIVAL, R.UNIQUE_DEPARTURE_PER_CHIP}),
    R.DEPARTURE_LOCATION: ("chip 2 departs again from u", _add(4, ("u", 2, -1, "e2")), {R.DEPARTURE_LOCATION}),
    R.ARRIVAL_LOCATION: ("chip 2 arrives along the wrong edge", _add(4, ("v", 2, 1, "e1")), {R.ARRIVAL_LOCATION}),
    R.OUTGOING_EDGES: ("target u: one pair firing u with a single departure",
                       _u_pairs((["u"], [("u", 1, -1, "e1")])), {R.OUTGOING_EDGES}),
    R.PREVIOUS_DEPARTURE: ("chip 4 departs two pairs late", _move(("u", 4, -1, "e2"), 2, 4),
                           {R.PREVIOUS_DEPARTURE}),
    R.NEXT_ARRIVAL: ("chip 3's arrival is dropped", _drop(6, ("v", 3, 1, "e1")), {R.NEXT_ARRIVAL}),
    R.REACH_ALL_VERTICES: ("sequence for v stops after the departures", _truncate(4), {R.REACH_ALL_VERTICES}),
}


def mutated(req):
    data = copy.deepcopy(seven_chip_json())
    MUTATIONS[req][1](data)
    return PartialCertificate.from_json(data)
