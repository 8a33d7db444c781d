"""Command line front end.

Exit codes: 0 accept/found, 2 reject/not found within caps, 3 infeasible,
4 input error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .certificate import PartialCertificate
from .chip_firing import dgon
from .expansion import ScheduleError, expand_certificate, verify_expansion
from .gonality import sdgon_search, verify_np
from .ilp import DEFAULT_CAP, build_ilp, magnitude_bound, solve
from .multigraph import GraphInputError, build_g1, graph_to_dict, load_graph, to_dot
from .witness import (
    Witness,
    build_certificate,
    ground_truth,
    witness_from_h_divisor,
    witness_from_json,
    witness_to_json,
)

EXIT_OK, EXIT_NO, EXIT_INFEASIBLE, EXIT_INPUT = 0, 2, 3, 4

log = logging.getLogger("sdgon")


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # usage errors are input errors, not rejections
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _read_json(path: str):
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text()
        return json.loads(text)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"{path}: {exc}") from exc


def _graph(path: str):
    return load_graph(_read_json(path))


def _emit(obj, out=None):
    text = json.dumps(obj, indent=1, sort_keys=False)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def _base(args):
    g = _graph(args.graph)
    return g, (g if args.no_subdivide else build_g1(g).derived)


def cmd_g1(args):
    g1 = build_g1(_graph(args.graph)).derived
    if args.dot:
        sys.stdout.write(to_dot(g1, "G1"))
    else:
        _emit(graph_to_dict(g1))
    return EXIT_OK


def cmd_dgon(args):
    g = _graph(args.graph)
    res = dgon(g, args.kmax, method=args.method, pruning=None if args.method == "bruteforce" else "reduced")
    if res.exceeded:
        _emit({"dgon": None, "exceeded": res.binding})
        return EXIT_NO
    _emit({"dgon": res.value, "divisor": res.divisor.to_json()})
    return EXIT_OK


def cmd_sdgon(args):
    if args.lmax is None:
        print("refusing an uncapped search: pass --lmax (see the `bound` command for why the "
              "uncapped range is out of reach)", file=sys.stderr)
        return EXIT_INPUT
    g = _graph(args.graph)
    res = sdgon_search(g, args.kmax, args.lmax)
    if res.exceeded:
        _emit({"sdgon": None, "exceeded": res.binding, "kmax": args.kmax, "lmax": args.lmax})
        return EXIT_NO
    _emit({"sdgon": res.value, "totals": res.lengths, "divisor": res.divisor.to_json(),
           "note": f"minimal only among subdivisions with G1 edge lengths <= {args.lmax}"})
    if args.witness:
        _emit(witness_to_json(g, witness_from_h_divisor(g, res.lengths, res.divisor)), args.witness)
    return EXIT_OK


def cmd_make_cert(args):
    g, wit = witness_from_json(_read_json(args.witness))
    base = wit.base
    cert = build_certificate(wit, args.k)
    _emit(cert.to_json(), args.output)
    if args.assignment:
        _emit(ground_truth(wit), args.assignment)
    log.info("certificate on %d base vertices, %d chips", len(base.vertices), cert.start.k)
    return EXIT_OK


def cmd_verify(args):
    g = _graph(args.graph)
    cert = PartialCertificate.from_json(_read_json(args.certificate))
    a = {str(k): int(v) for k, v in _read_json(args.assignment).items()}
    verdict = verify_np(g, args.k, cert, a, subdivide_once=not args.no_subdivide, audit=args.audit)
    _emit({"accept": verdict.accept, "stage": verdict.stage, "detail": verdict.detail})
    return EXIT_OK if verdict else EXIT_NO


def cmd_expand(args):
    g, base = _base(args)
    cert = PartialCertificate.from_json(_read_json(args.certificate))
    a = {str(k): int(v) for k, v in _read_json(args.assignment).items()}
    try:
        hmap, scripts = expand_certificate(base, cert, a)
    except ScheduleError as exc:
        _emit({"verified": False, "reason": "schedule", "detail": str(exc)})
        return EXIT_NO
    start = cert.start.unlabeled()
    res = verify_expansion(hmap, start, scripts)
    out = witness_to_json(g, Witness(hmap, start, scripts), subdivide_once=not args.no_subdivide)
    out["verified"] = res.ok
    if not res.ok:
        out["reason"] = res.reason
        out["detail"] = f"{res.target}: {res.detail}"
    _emit(out, args.output)
    return EXIT_OK if res else EXIT_NO


def cmd_solve_ilp(args):
    g, base = _base(args)
    cert = PartialCertificate.from_json(_read_json(args.certificate))
    sol = solve(build_ilp(base, cert), args.cap)
    if sol is None:
        _emit({"feasible": False, "cap": args.cap})
        return EXIT_INFEASIBLE
    _emit(sol, args.output)
    return EXIT_OK


def cmd_bound(args):
    g, base = _base(args)
    cert = PartialCertificate.from_json(_read_json(args.certificate))
    b = magnitude_bound(build_ilp(base, cert))
    _emit({"bound": str(b), "bits": b.bit_length()})
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sdgon", description="Divisorial and stable divisorial gonality tools.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("g1", help="subdivide every edge once")
    p.add_argument("graph")
    p.add_argument("--dot", action="store_true", help="print Graphviz DOT instead of JSON")
    p.set_defaults(func=cmd_g1)

    p = sub.add_parser("dgon", help="divisorial gonality up to a cap")
    p.add_argument("graph")
    p.add_argument("--kmax", type=int, required=True)
    p.add_argument("--method", choices=("reduce", "bruteforce"), default="reduce")
    p.set_defaults(func=cmd_dgon)

    p = sub.add_parser("sdgon", help="stable divisorial gonality within length and degree caps")
    p.add_argument("graph")
    p.add_argument("--kmax", type=int, required=True)
    p.add_argument("--lmax", type=int)
    p.add_argument("--witness", help="write a witness bundle for make-cert here")
    p.set_defaults(func=cmd_sdgon)

    p = sub.add_parser("make-cert", help="partial certificate from a witness bundle")
    p.add_argument("witness")
    p.add_argument("--k", type=int)
    p.add_argument("-o", "--output")
    p.add_argument("--assignment", help="also write the witness's own ILP values here")
    p.set_defaults(func=cmd_make_cert)

    def with_cert(p, assignment=True):
        p.add_argument("graph")
        p.add_argument("certificate")
        if assignment:
            p.add_argument("assignment")
        p.add_argument("--no-subdivide", action="store_true",
                       help="the certificate lives on the graph itself rather than on G1")

    p = sub.add_parser("verify", help="check a certificate and ILP assignment")
    with_cert(p)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--audit", action="store_true", help="also expand and replay")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("expand", help="rebuild the subdivision and firing scripts")
    with_cert(p)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_expand)

    p = sub.add_parser("solve-ilp", help="least ILP solution within a cap")
    with_cert(p, assignment=False)
    p.add_argument("--cap", type=int, default=DEFAULT_CAP)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_solve_ilp)

    p = sub.add_parser("bound", help="solution magnitude bound of the certificate's ILP")
    with_cert(p, assignment=False)
    p.set_defaults(func=cmd_bound)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (InputError, GraphInputError, KeyError, ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
