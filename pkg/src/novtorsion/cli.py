"""Command line entry points.

Commands read the text document format and print line-oriented
``key: value`` reports; every report carries the certification cutoff it
relied on.  Exit codes: 0 success, 1 usage (bad invocation, missing file),
2 parse failure, 3 validation failure (including non-acyclicity and bad
profile parameters), 4 indeterminate arithmetic (ambiguous leading terms,
uncertifiable pivots, degenerate endpoints).
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction

from .complexes import ComplexStructureError, NotAcyclicError
from .document import DocumentParseError, build_chain_map, build_complex, document_from_complex, parse, render
from .linalg import IndeterminatePivotError, ShapeError
from .series import AmbiguousLeadingTermError, DEFAULT_CUTOFF, NotInvertibleError, format_element
from .torsion import milnor_torsion, relative_torsion
from .torus import DegenerateEndpointError, OrbitSearchError, ProfileError, run_example

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PARSE = 2
EXIT_VALIDATE = 3
EXIT_INDETERMINATE = 4


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise _UsageError("invalid rational %r" % text)


def _grid(text: str) -> tuple[int, int]:
    try:
        nx, ny = text.lower().split("x")
        return int(nx), int(ny)
    except ValueError:
        raise _UsageError("invalid grid %r, expected like 12x6" % text)


def _build_parser() -> _Parser:
    parser = _Parser(prog="novtorsion", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check shapes and that the differential squares to zero")
    p.add_argument("file")

    p = sub.add_parser("ranks", help="homology ranks per degree")
    p.add_argument("file")

    p = sub.add_parser("torsion", help="torsion of an acyclic complex")
    p.add_argument("file")
    p.add_argument("--cutoff", type=_rational, default=DEFAULT_CUTOFF)

    p = sub.add_parser("rel-torsion", help="torsion of a named self chain map")
    p.add_argument("file")
    p.add_argument("--map", required=True, dest="map_name")
    p.add_argument("--cutoff", type=_rational, default=DEFAULT_CUTOFF)

    p = sub.add_parser("torus-example", help="run the torus pipeline end to end")
    p.add_argument("--b", type=_rational, default=Fraction(1, 5))
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--cutoff", type=_rational, default=DEFAULT_CUTOFF)
    p.add_argument("--grid", type=_grid, default=(48, 24))
    return parser


def _read(path: str) -> str:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise _UsageError("cannot read %s: %s" % (path, exc.strerror or exc))


def _emit(lines):
    for line in lines:
        print(line)


def _cutoff_str(cutoff) -> str:
    return "exact" if cutoff is None else str(cutoff)


def _cmd_validate(args) -> int:
    doc = parse(_read(args.file))
    cplx = build_complex(doc)
    report = cplx.validate()
    lines = ["file: %s" % args.file]
    lines.append("status: %s" % ("valid" if report.valid else "invalid"))
    lines.append("certified-cutoff: %s" % _cutoff_str(report.cutoff))
    for failure in report.failures:
        lines.append("failure: %s" % failure)
    _emit(lines)
    return EXIT_OK if report.valid else EXIT_VALIDATE


def _cmd_ranks(args) -> int:
    doc = parse(_read(args.file))
    cplx = build_complex(doc)
    report = cplx.homology_ranks()
    lines = ["file: %s" % args.file]
    for d in sorted(report.ranks):
        lines.append("rank %d: %d" % (d, report.ranks[d]))
    lines.append("acyclic: %s" % ("true" if report.acyclic else "false"))
    lines.append("certified-cutoff: %s" % _cutoff_str(report.cutoff))
    _emit(lines)
    return EXIT_OK


def _torsion_lines(label, cls):
    rep = cls.representative
    return [
        "%s: %s" % (label, format_element(rep, cutoff_suffix=False)),
        "trivial: %s" % ("true" if cls.trivial else "false"),
        "cutoff: %s" % _cutoff_str(cls.cutoff),
        "leading-coefficient: %s" % cls.leading_coefficient,
    ]


def _cmd_torsion(args) -> int:
    doc = parse(_read(args.file))
    cplx = build_complex(doc)
    lines = ["file: %s" % args.file]
    cls = milnor_torsion(cplx, args.cutoff)
    lines.extend(_torsion_lines("torsion", cls))
    _emit(lines)
    return EXIT_OK


def _cmd_rel_torsion(args) -> int:
    doc = parse(_read(args.file))
    cplx = build_complex(doc)
    if args.map_name not in doc.maps:
        raise _UsageError("document has no map named %r" % args.map_name)
    f = build_chain_map(doc, args.map_name, cplx)
    report = f.validate()
    if not report.valid:
        raise ComplexStructureError("map %r is not a chain map: %s" % (args.map_name, report.failures[0]))
    lines = ["file: %s" % args.file, "map: %s" % args.map_name]
    cls = relative_torsion(f, args.cutoff)
    lines.extend(_torsion_lines("torsion", cls))
    _emit(lines)
    return EXIT_OK


def _cmd_torus(args) -> int:
    report = run_example(b=args.b, tol=args.tol, cutoff=args.cutoff, grid=args.grid)
    lines = [
        "b: %s" % report.system.b,
        "grid: %dx%d" % report.grid,
        "search-steps: %d" % report.search_steps,
        "refine-steps: %d" % report.refine_steps,
        "newton-tol: %g" % args.tol,
        "orbit-count: %d" % len(report.orbits),
    ]
    for i, orbit in enumerate(report.orbits):
        m = orbit.monodromy
        lines.append("orbit %d x: %.9f" % (i, orbit.x))
        lines.append("orbit %d y: %.9f" % (i, orbit.y))
        lines.append("orbit %d index: %d" % (i, orbit.cz_index))
        lines.append("orbit %d det-gap: %.9f" % (i, orbit.det_gap))
        lines.append(
            "orbit %d monodromy: %.9f %.9f %.9f %.9f" % (i, m[0, 0], m[0, 1], m[1, 0], m[1, 1])
        )
        lines.append("orbit %d step-halving-gap: %.3e" % (i, orbit.richardson_gap))
    lines.append("connecting-count: %d" % report.counts.total)
    lines.append(
        "connecting-labels: %s" % ",".join(str(label[0]) for label, _ in report.counts.entries)
    )
    for convention in ("plus", "minus"):
        cplx = report.complexes[convention]
        low = min(cplx.differentials)
        entry = cplx.differentials[low][0][0]
        lines.append("differential %s: %s" % (convention, entry))
        cls = report.torsions[convention]
        rep = cls.representative
        lines.append("torsion %s: %s" % (convention, format_element(rep, cutoff_suffix=False)))
        lines.append("torsion %s trivial: %s" % (convention, "true" if cls.trivial else "false"))
        lines.append("torsion %s cutoff: %s" % (convention, _cutoff_str(cls.cutoff)))
        lines.append(
            "torsion %s leading-coefficient: %s" % (convention, cls.leading_coefficient)
        )
    _emit(lines)
    for convention in ("plus", "minus"):
        print("begin-document %s" % convention)
        print("# sign-convention: %s" % convention)
        print(render(document_from_complex(report.complexes[convention])), end="")
        print("end-document")
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "validate":
            return _cmd_validate(args)
        if args.command == "ranks":
            return _cmd_ranks(args)
        if args.command == "torsion":
            return _cmd_torsion(args)
        if args.command == "rel-torsion":
            return _cmd_rel_torsion(args)
        if args.command == "torus-example":
            return _cmd_torus(args)
        raise _UsageError("unknown command %r" % args.command)
    except _UsageError as exc:
        _emit(["status: error", "category: usage", "message: %s" % exc])
        return EXIT_USAGE
    except DocumentParseError as exc:
        _emit(["status: error", "category: parse", "message: %s" % exc])
        return EXIT_PARSE
    except (ComplexStructureError, NotAcyclicError, ProfileError, OrbitSearchError, ShapeError) as exc:
        _emit(["status: error", "category: validate", "message: %s" % exc])
        return EXIT_VALIDATE
    except (
        IndeterminatePivotError,
        AmbiguousLeadingTermError,
        NotInvertibleError,
        DegenerateEndpointError,
    ) as exc:
        _emit(["status: error", "category: indeterminate", "message: %s" % exc])
        return EXIT_INDETERMINATE


def main_entry():
    raise SystemExit(main())


if __name__ == "__main__":
    main_entry()
