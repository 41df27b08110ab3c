"""Command-line runner.

Exit codes: 0 on success, 1 on a domain error (a JSON error object is printed),
2 on a usage error.  JSON output is key-sorted and CSV floats use ``repr``,
so identical inputs and ``--seed`` give byte-identical files.
"""

from __future__ import annotations

import argparse
import csv
import io as _stdio
import json
import sys
from pathlib import Path

from . import io
from .adapted import FAMILIES as ADAPTED_FAMILIES
from .adapted import approximate_adapted
from .compat import CHECKERS, check_ci
from .errors import CotlabError
from .extreme import decompose_compatible
from .generators import monge_family
from .measure import Coupling, coupling_w1
from .monge import cell_family, dyadic_partitions, monge_approximate, oscillation_bound, representable_levels
from .paths import JointPathLaw
from .stable import default_family, rotation_demo, stable_gap
from .stopping import RandomizedStoppingTime, approximate_stopping, decompose_stopping, uniform_time_family
from .suite import csv_columns, run_suite
from .transport import ControlModel, causal_value, control_family, control_values, unconstrained_value

COMMANDS = (
    "check-compat", "monge-approx", "adapted-approx", "decompose", "stopping",
    "causal-ot", "control", "demo-rotation", "suite",
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _int_list(text: str) -> list:
    try:
        vals = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of integers, got {text!r}") from None
    if not vals or any(v < 1 for v in vals):
        raise argparse.ArgumentTypeError("refinements must be positive integers")
    return vals


def _levels(text: str):
    if text == "all":
        return "all"
    try:
        return [int(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError("--levels takes 'all' or a comma-separated list") from None


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--out", type=Path, help="output file (directory for 'suite'); stdout when omitted")
    common.add_argument("--mode", choices=("exact", "float"), default="exact")
    common.add_argument("--seed", type=int, default=0)

    inst = _Parser(add_help=False)
    inst.add_argument("--instance", type=Path, required=True)

    p = _Parser(prog="cotlab", description="Causal transport and adapted-approximation experiments.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("check-compat", parents=[common, inst], help="compatibility verdicts for a joint path law")
    s.add_argument("--all-checkers", action="store_true")

    s = sub.add_parser("monge-approx", parents=[common, inst], help="per-level Monge approximation table")
    s.add_argument("--levels", type=_levels, default="all")

    s = sub.add_parser("adapted-approx", parents=[common, inst], help="adapted approximation of a compatible law")
    s.add_argument("--refine", type=_int_list)
    s.add_argument("--levels", type=_levels)

    sub.add_parser("decompose", parents=[common, inst], help="mixture of adapted maps for a compatible law")

    s = sub.add_parser("stopping", parents=[common, inst], help="randomized stopping times")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--decompose", action="store_true")
    g.add_argument("--approximate", action="store_true")
    s.add_argument("--refine", type=_int_list)

    s = sub.add_parser("causal-ot", parents=[common, inst], help="causal vs unconstrained optimum")
    s.add_argument("--objective", choices=("min", "max"), default="min")

    sub.add_parser("control", parents=[common, inst], help="relaxed vs pure control values")

    s = sub.add_parser("demo-rotation", parents=[common], help="rotation counterexample report")
    s.add_argument("--n", type=int, default=8)
    s.add_argument("--grid", type=int, default=32)

    s = sub.add_parser("suite", parents=[common], help="run the acceptance suite")
    s.add_argument("--only", type=_int_list, help="comma-separated criterion numbers")
    return p


# -- output -----------------------------------------------------------------------------

def _emit_text(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text)


def _emit_json(data, out) -> None:
    _emit_text(json.dumps(data, indent=2, sort_keys=True) + "\n", out)


def _cell(v):
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return "/".join(map(str, v))
    return "" if v is None else str(v)


def _emit_csv(rows, schema: str, out) -> None:
    cols = csv_columns()[schema]
    buf = _stdio.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([_cell(r.get(c)) for c in cols])
    _emit_text(buf.getvalue(), out)


def _load(args, want):
    exact = args.mode == "exact"
    data = json.loads(args.instance.read_text())
    obj = io.from_json(data, exact=exact)
    if not isinstance(obj, want):
        raise CotlabError(f"instance {args.instance} is a {io._infer_type(data)}, not what this command expects")
    return obj


def _family(args, table, default_refine):
    """Resolve a ``{"family": name, "m": [...]}`` instance to ``(builder, m_list)``."""
    data = json.loads(args.instance.read_text())
    name = data["family"]
    if name not in table:
        raise CotlabError(f"unknown family {name!r}; choose from {sorted(table)}")
    ms = args.refine or data.get("m") or default_refine
    return table[name], [ms] if isinstance(ms, int) else list(ms)


def _is_family(args) -> bool:
    return io._infer_type(json.loads(args.instance.read_text())) == "family"


# -- subcommands -----------------------------------------------------------------------------

def cmd_check_compat(args):
    J = _load(args, JointPathLaw)
    tol = None if args.mode == "exact" else 1e-9
    res = check_ci(J, tol)
    out = res.to_json()
    out.pop("checker")
    if res.ok:
        out.pop("witness")
    if args.all_checkers:
        verdicts = {name: fn(J, tol).to_json() for name, fn in CHECKERS.items()}
        out["checkers"] = verdicts
        out["agree"] = len({v["ok"] for v in verdicts.values()}) == 1
    _emit_json(out, args.out)


def _monge_rows(P: Coupling, levels):
    parts = dyadic_partitions(P.row_space)
    fam = default_family(P.row_space, P.col_space)
    cfam = cell_family(parts, P.col_space)
    ok = representable_levels(P, parts)
    want = ok if levels == "all" else levels
    rows = []
    for k in want:
        _, Pk = monge_approximate(P, parts, k)
        rows.append({
            "level": k,
            "cells": len(parts.cells(k)),
            "stable_gap": stable_gap(Pk, P, fam),
            "cell_gap": stable_gap(Pk, P, cfam),
            "bound": oscillation_bound(Pk, P, fam, parts.cells(k)),
            "w1_gap": float(coupling_w1(Pk, P)),
        })
    return rows


def cmd_monge_approx(args):
    if _is_family(args):
        data = json.loads(args.instance.read_text())
        named = dict(monge_family(int(data["m"])))
        if data["family"] not in named:
            raise CotlabError(f"unknown family {data['family']!r}; choose from {sorted(named)}")
        P = named[data["family"]]
    else:
        P = _load(args, Coupling)
    _emit_csv(_monge_rows(P, args.levels), "monge_approx", args.out)


def _approx_row(J, m, schedule):
    r = approximate_adapted(J, schedule)
    return {"m": m, "stable_gap": r.gap, "bound": r.bound, "w1_gap": r.w1, "levels": r.levels}


def cmd_adapted_approx(args):
    rows = []
    if _is_family(args):
        build, ms = _family(args, ADAPTED_FAMILIES, [4, 8, 16])
        rows = [_approx_row(build(m), m, "finest") for m in ms]
    else:
        if args.refine:
            raise UsageError("--refine needs a family instance; use --levels for a single law")
        J = _load(args, JointPathLaw)
        for lvl in (args.levels if isinstance(args.levels, list) else ["finest"]):
            rows.append(_approx_row(J, "", lvl))
    _emit_csv(rows, "adapted_approx", args.out)


def cmd_decompose(args):
    J = _load(args, JointPathLaw)
    _emit_json(io.mixture_to_json(decompose_compatible(J)), args.out)


STOPPING_FAMILIES = {"uniform-time": uniform_time_family}


def cmd_stopping(args):
    if args.approximate and _is_family(args):
        build, ms = _family(args, STOPPING_FAMILIES, [4, 8, 16])
        rows = []
        for m in ms:
            r = approximate_stopping(*build(m))
            rows.append({"m": m, "w1_gap": r.w1, "levels": r.levels})
        _emit_csv(rows, "stopping_approx", args.out)
        return
    if args.refine:
        raise UsageError("--refine needs a family instance")
    tau, mu = _load(args, tuple)
    if not isinstance(tau, RandomizedStoppingTime):
        raise CotlabError("instance is not a stopping-time kernel")
    if args.decompose:
        parts = decompose_stopping(tau, mu)
        out = {"components": [{"weight": io.fmt_number(w), "rule": io.stopping_time_to_json(st)} for w, st in parts]}
    else:
        r = approximate_stopping(tau, mu)
        out = {"rule": io.stopping_time_to_json(r.st), "w1_gap": r.w1, "levels": list(r.levels)}
    _emit_json(out, args.out)


def _model(args) -> ControlModel:
    if _is_family(args):
        data = json.loads(args.instance.read_text())
        if data["family"] != "bit":
            raise CotlabError(f"unknown family {data['family']!r}; choose from ['bit']")
        return control_family(int(data["m"]), data.get("functional"))
    return _load(args, ControlModel)


def cmd_causal_ot(args):
    model = _model(args)
    if not model.linear:
        raise CotlabError("causal-ot takes a linear cost; use 'control' for nonlinear functionals")
    cv, law = causal_value(model.mu, model.action_space, model.reward, args.objective)
    uv, _ = unconstrained_value(model.mu, model.action_space, model.reward, args.objective)
    _emit_json({
        "objective": args.objective,
        "causal_value": io.fmt_number(cv),
        "unconstrained_value": io.fmt_number(uv),
        "gap": io.fmt_number(cv - uv),
        "law": io.law_to_json(law),
    }, args.out)


def cmd_control(args):
    v = control_values(_model(args))
    _emit_json({k: (io.fmt_number(x) if k != "method" else x) for k, x in v.items()}, args.out)


def cmd_demo_rotation(args):
    if args.n < 1 or args.grid < 2:
        raise UsageError("need --n >= 1 and --grid >= 2")
    r = rotation_demo(args.n, args.grid)
    r["diag_P"] = str(r["diag_P"])
    _emit_json(r, args.out)


def cmd_suite(args):
    out = args.out or Path("results")
    results = run_suite(args.seed, out, only=args.only)
    if not all(r.ok for r in results):
        raise CotlabError("acceptance suite: " + ", ".join(str(r.cid) for r in results if not r.ok) + " failed")


DISPATCH = {
    "check-compat": cmd_check_compat,
    "monge-approx": cmd_monge_approx,
    "adapted-approx": cmd_adapted_approx,
    "decompose": cmd_decompose,
    "stopping": cmd_stopping,
    "causal-ot": cmd_causal_ot,
    "control": cmd_control,
    "demo-rotation": cmd_demo_rotation,
    "suite": cmd_suite,
}


def _error(payload) -> None:
    sys.stdout.write(json.dumps(payload, sort_keys=True) + "\n")


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        DISPATCH[args.command](args)
    except UsageError as exc:
        sys.stderr.write(f"{exc}\n")
        return 2
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except CotlabError as exc:
        _error(exc.to_json())
        return 1
    except (OSError, ValueError, KeyError, TypeError) as exc:
        _error({"error": "invalid_instance", "message": f"{type(exc).__name__}: {exc}"})
        return 1
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
