"""Divisorial and stable divisorial gonality of multigraphs.

Chip firing on multigraphs and their subdivisions, q-reduction, capped
gonality searches, and a checkable certificate format for the claim
``sdgon(G) <= k``: partial certificates, their integer programs, and the
expansion of a certificate back into an explicit subdivision with firing
scripts.
"""

from .certificate import PartialCertificate, Requirement, validate
from .chip_firing import Divisor, FiringScript, LabeledDivisor, dgon, reaches, reduce_at
from .expansion import expand_certificate, verify_expansion
from .gonality import pipeline_selftest, sdgon_search, verify_np
from .ilp import build_ilp, check_assignment, magnitude_bound, solve
from .multigraph import Multigraph, build_g1, load_graph, subdivide
from .witness import Witness, build_certificate, canonical_witness, ground_truth

__version__ = "0.1.0"

__all__ = [
    "Divisor", "FiringScript", "LabeledDivisor", "Multigraph", "PartialCertificate", "Requirement",
    "Witness", "build_certificate", "build_g1", "build_ilp", "canonical_witness", "check_assignment",
    "dgon", "expand_certificate", "ground_truth", "load_graph", "magnitude_bound", "pipeline_selftest",
    "reaches", "reduce_at", "sdgon_search", "solve", "subdivide", "validate", "verify_expansion",
    "verify_np",
]
