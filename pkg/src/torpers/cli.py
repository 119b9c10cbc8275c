"""Command line driver: xi tables, hypertor, d2, recovery, orbits, validation.

Every subcommand reads either a .mfc multifiltered complex or (for xi and
resolve) a JSON presentation, and writes one report to stdout.  JSON is the
machine format; text renders aligned tables; csv is available where the
report is a flat table.  Exit codes: 0 ok, 1 invalid input, 2 a internal
cross-check failed (those indicate a bug, not bad input).
"""

import argparse
import json
import sys

import numpy as np

from torpers import InternalCheckError, ValidationError
from torpers import complexes as cxm
from torpers import grading as gr
from torpers import hypertor as ht
from torpers import modules as md
from torpers import orbits as ob
from torpers import tor


def _json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError("cannot serialize %r" % type(obj))


def _dumps(data):
    return (
        json.dumps(data, sort_keys=True, separators=(",", ":"), default=_json_default)
        + "\n"
    )


def fmt_multiset(ms):
    """Compact text form of a degree multiset: {(2,3):1,(3,2):1}."""
    pairs = gr.multiset_to_sorted_pairs(ms)
    if not pairs:
        return "{}"
    body = ",".join(
        "(%s):%d" % (",".join(str(c) for c in deg), mult) for deg, mult in pairs
    )
    return "{" + body + "}"


def _ms_from_pairs(pairs):
    return gr.multiset_from_json(pairs)


def _load_complex(path):
    try:
        return cxm.load_mfc(path)
    except OSError as e:
        raise ValidationError("cannot read %s: %s" % (path, e))


def _load_module(args):
    """The module a xi/resolve run works on: H_q of a complex, or a cokernel."""
    path = args.input
    if path.endswith(".mfc"):
        cx = _load_complex(path)
        H, _, _ = md.homology_module(cx, args.q, args.field)
        return H
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as e:
        raise ValidationError("cannot read %s: %s" % (path, e))
    except ValueError as e:
        raise ValidationError("%s is not valid JSON: %s" % (path, e))
    try:
        gens = [tuple(g) for g in data["gens"]]
        relations = [
            (tuple(d), {int(k): int(c) for k, c in coeffs.items()})
            for d, coeffs in data["relations"]
        ]
        pres = cxm.Presentation(int(data["n"]), gens, relations)
    except (KeyError, TypeError) as e:
        raise ValidationError(
            "presentation JSON needs n, gens, relations fields: %s" % e
        )
    return md.present_cokernel(pres, args.field)


# -- subcommands ---------------------------------------------------------------


def _cmd_xi(args):
    M = _load_module(args)
    table = tor.xi(M, widen=args.widen)
    data = {"field": args.field, "input": args.input}
    data.update(table.to_json())
    data["rendered"] = {
        "xi_%d" % j: fmt_multiset(table.tables.get(j, {})) for j in range(M.n + 1)
    }
    if args.format == "json":
        return _dumps(data)
    if args.format == "csv":
        lines = ["j,degree,mult"]
        for j, pairs in data["xi"]:
            for deg, mult in pairs:
                lines.append(
                    "%d,(%s),%d" % (j, " ".join(str(c) for c in deg), mult)
                )
        return "\n".join(lines) + "\n"
    lines = ["field %d" % args.field]
    for j in range(M.n + 1):
        lines.append("xi_%d  %s" % (j, fmt_multiset(table.tables.get(j, {}))))
    return "\n".join(lines) + "\n"


def _cmd_resolve(args):
    M = _load_module(args)
    res = tor.minimal_resolution(M)
    betti = [[j, gr.multiset_to_json(res.xi(j))] for j in range(res.length + 1)]
    data = {
        "field": args.field,
        "input": args.input,
        "length": res.length,
        "betti": betti,
        "rendered": {
            "F_%d" % j: fmt_multiset(res.xi(j)) for j in range(res.length + 1)
        },
    }
    if args.format == "json":
        return _dumps(data)
    if args.format == "csv":
        lines = ["j,degree,mult"]
        for j, pairs in betti:
            for deg, mult in pairs:
                lines.append(
                    "%d,(%s),%d" % (j, " ".join(str(c) for c in deg), mult)
                )
        return "\n".join(lines) + "\n"
    lines = ["field %d" % args.field, "length %d" % res.length]
    for j in range(res.length + 1):
        lines.append("F_%d  %s" % (j, fmt_multiset(res.xi(j))))
    return "\n".join(lines) + "\n"


def _cmd_hypertor(args):
    cx = _load_complex(args.input)
    tables = ht.hypertor_dims(cx, args.field)
    data = {
        "field": args.field,
        "input": args.input,
        "hypertor": [
            [ell, gr.multiset_to_json(tables[ell])] for ell in sorted(tables)
        ],
        "rendered": {
            "l=%d" % ell: fmt_multiset(tables[ell]) for ell in sorted(tables)
        },
    }
    if args.format == "json":
        return _dumps(data)
    if args.format == "csv":
        lines = ["l,degree,mult"]
        for ell, pairs in data["hypertor"]:
            for deg, mult in pairs:
                lines.append(
                    "%d,(%s),%d" % (ell, " ".join(str(c) for c in deg), mult)
                )
        return "\n".join(lines) + "\n"
    lines = ["field %d" % args.field]
    for ell in sorted(tables):
        lines.append("l=%d  %s" % (ell, fmt_multiset(tables[ell])))
    return "\n".join(lines) + "\n"


def _cmd_e1(args):
    cx = _load_complex(args.input)
    page = ht.e1_page(cx, args.field)
    data = {"field": args.field, "input": args.input}
    data.update(page.to_json())
    data["rendered"] = {
        "E1[%d,%d]" % (row["i"], row["q"]): fmt_multiset(
            _ms_from_pairs(row["dims"])
        )
        for row in data["e1"]
    }
    if args.format == "json":
        return _dumps(data)
    if args.format == "csv":
        raise ValidationError("csv output is not available for e1")
    lines = [
        "field %d" % args.field,
        "degenerate %s" % ("yes" if page.verdict else "no"),
    ]
    for row in data["e1"]:
        lines.append(
            "E1[%d,%d]  %s"
            % (row["i"], row["q"], fmt_multiset(_ms_from_pairs(row["dims"])))
        )
    return "\n".join(lines) + "\n"


def _cmd_d2(args):
    cx = _load_complex(args.input)
    result = ht.d2(cx, args.q, args.field)
    data = {"field": args.field, "input": args.input}
    data.update(result.to_json())
    if args.format == "json":
        return _dumps(data)
    if args.format == "csv":
        raise ValidationError("csv output is not available for d2")
    lines = [
        "field %d" % args.field,
        "d2 on row q=%d, total rank %d" % (args.q, result.rank()),
    ]
    for block in data["blocks"]:
        deg = tuple(block["degree"])
        lines.append("at %s:" % (deg,))
        for row in block["matrix"]:
            lines.append("  [%s]" % " ".join(str(c) for c in row))
    lines.append(data["interpretation"])
    return "\n".join(lines) + "\n"


def _cmd_recover(args):
    cx = _load_complex(args.input)
    report = ht.recovered_homology(cx, args.field)
    report["input"] = args.input
    if args.format == "json":
        return _dumps(report)
    if args.format == "csv":
        raise ValidationError("csv output is not available for recover")
    lines = [
        "field %d" % args.field,
        "betti %s" % (tuple(report["betti"]),),
        "direct %s" % (tuple(report["direct"]),),
        "MATCH" if report["match"] else "MISMATCH",
        "T dims %s" % (report["t_dims"],),
        "Q dims %s" % (report["q_dims"],),
    ]
    return "\n".join(lines) + "\n"


def _cmd_orbits(args):
    try:
        xi0 = _ms_from_pairs(json.loads(args.xi0))
        xi1 = _ms_from_pairs(json.loads(args.xi1)) if args.xi1 else {}
    except (ValueError, TypeError) as e:
        raise ValidationError("xi0/xi1 must be JSON [[degree, mult], ...]: %s" % e)
    report = ob.classify(xi0, xi1, args.field, limit=args.limit)
    data = report.to_json()
    for row in data["orbits"]:
        row["xi_rendered"] = {
            "xi_%d" % j: fmt_multiset(_ms_from_pairs(pairs))
            for j, pairs in row["xi"]
        }
    if args.format == "json":
        return _dumps(data)
    uppers = sorted(
        {j for row in data["orbits"] for j, _ in row["xi"] if j >= 2}
    )
    rows = []
    for row in data["orbits"]:
        xi_by_j = {j: _ms_from_pairs(pairs) for j, pairs in row["xi"]}
        y = ";".join(
            "x%d@(%s)=%s"
            % (
                e["j"],
                ",".join(str(c) for c in e["degree"]),
                "|".join(",".join(str(c) for c in r) for r in e["rows"]),
            )
            for e in row["y"]
        )
        rows.append(
            [str(row["id"]), str(row["size"])]
            + [fmt_multiset(xi_by_j.get(j, {})) for j in uppers]
            + [y, row["label"] or ""]
        )
    header = ["orbit", "size"] + ["xi_%d" % j for j in uppers] + ["y", "label"]
    if args.format == "csv":
        out = [",".join(header)]
        for r in rows:
            out.append(",".join('"%s"' % c if "," in c else c for c in r))
        return "\n".join(out) + "\n"
    widths = [max(len(r[k]) for r in rows + [header]) for k in range(len(header))]
    out = [
        "field %d, %d families, %d orbits"
        % (args.field, data["family_count"], data["orbit_count"]),
        "  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip(),
    ]
    for r in rows:
        out.append("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip())
    for g in data["groups"]:
        key = " ".join(
            "xi_%d=%s" % (j, fmt_multiset(_ms_from_pairs(pairs)))
            for j, pairs in g["xi_upper"]
        )
        out.append(
            "class %s: orbits %s, phi_bar %s"
            % (
                key or "(no xi beyond xi_1)",
                g["orbits"],
                "injective" if g["phi_bar_injective"] else "not injective",
            )
        )
    return "\n".join(out) + "\n"


def _cmd_validate(args):
    cx = _load_complex(args.input)
    cx.check_boundary(args.field)
    ok, violation = md.single_step_check(cx)
    data = {
        "field": args.field,
        "input": args.input,
        "ok": True,
        "params": cx.n,
        "cells": len(cx.cells),
        "bound": list(cx.natural_bound()),
        "one_at_a_time": ok,
    }
    if args.format == "json":
        return _dumps(data)
    if args.format == "csv":
        raise ValidationError("csv output is not available for validate")
    lines = [
        "ok: %d cells over %d parameters, bound %s"
        % (data["cells"], data["params"], tuple(data["bound"])),
        "one cell at a time: %s" % ("yes" if ok else "no (step %s)" % (violation,)),
    ]
    return "\n".join(lines) + "\n"


# -- wiring --------------------------------------------------------------------


def _add_common(sub, q=False, widen=False):
    sub.add_argument("--input", required=True, help="input file")
    sub.add_argument(
        "--field", type=int, default=2, help="field characteristic (default 2)"
    )
    sub.add_argument(
        "--format",
        choices=("json", "csv", "text"),
        default="json",
        help="output format (default json)",
    )
    if q:
        sub.add_argument(
            "--q", type=int, default=0, help="homology degree (default 0)"
        )
    if widen:
        sub.add_argument(
            "--widen",
            type=int,
            default=0,
            help="enlarge the grid by this many steps per axis before computing",
        )


def build_parser():
    parser = argparse.ArgumentParser(
        prog="torpers",
        description="Tor tables, hypertor and orbit reports for "
        "multifiltered complexes.  Set TORPERS_WORKERS to parallelize "
        "grid scans.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    s = subs.add_parser("xi", help="xi table of H_q or of a presentation")
    _add_common(s, q=True, widen=True)
    s.set_defaults(func=_cmd_xi)

    s = subs.add_parser("resolve", help="minimal resolution Betti table")
    _add_common(s, q=True)
    s.set_defaults(func=_cmd_resolve)

    s = subs.add_parser("hypertor", help="hypertor dimension table")
    _add_common(s)
    s.set_defaults(func=_cmd_hypertor)

    s = subs.add_parser("e1", help="first page of the chains-by-Koszul grid")
    _add_common(s)
    s.set_defaults(func=_cmd_e1)

    s = subs.add_parser("d2", help="second differential out of row q")
    _add_common(s, q=True)
    s.set_defaults(func=_cmd_d2)

    s = subs.add_parser("recover", help="homology recovery report")
    _add_common(s)
    s.set_defaults(func=_cmd_recover)

    s = subs.add_parser("orbits", help="orbit classification of relation families")
    s.add_argument("--xi0", required=True, help="generator multiset as JSON")
    s.add_argument("--xi1", default="", help="relation multiset as JSON")
    s.add_argument("--field", type=int, default=2)
    s.add_argument("--format", choices=("json", "csv", "text"), default="json")
    s.add_argument(
        "--limit", type=int, default=200000, help="enumeration budget"
    )
    s.set_defaults(func=_cmd_orbits)

    s = subs.add_parser("validate", help="check a .mfc file")
    _add_common(s)
    s.set_defaults(func=_cmd_validate)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        out = args.func(args)
    except ValidationError as e:
        sys.stderr.write(_dumps({"error": "validation", "message": str(e)}))
        return 1
    except InternalCheckError as e:
        sys.stderr.write(_dumps({"error": "internal-check", "message": str(e)}))
        return 2
    sys.stdout.write(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
