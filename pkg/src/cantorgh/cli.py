"""``cantorgh`` command-line interface.

Every run writes its outputs atomically into the output directory together
with a manifest recording the tool version, parameters, input digests,
outputs and wall-clock time.  ``--replay MANIFEST`` re-runs the recorded
command, which reproduces the same CSV/JSON bytes.

Exit codes: 0 success, 1 internal assertion or failed verification, 2 user
input error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path

from . import __version__
from .cantor import numbers as nb
from .cantor.blocks import TAGS, building_block, tag_type
from .cantor.factory import prescribed_factory, prescribed_with_tdim
from .cantor.sequences import FAMILIES, explicit, family
from .cantor.space import CantorSpec, DimensionalType, dimension_report, enumerate_space
from .gromov import GH_GUARD, gh_exact, qiu_demo, ugh
from .io import (
    atomic_write_text, dumps_json, fraction_to_str, load_space, save_space, space_from_dict,
    write_csv, _label_to_json,
)
from .metric import FiniteMetricSpace, SizeError
from .telescope import (
    PathSpec, TelescopeSpec, fingerprint, path_continuity_audit, simplex_point, telescope,
    vertex, vertex_branch_selection,
)
from .verify import DEFAULT_CASES, DEFAULT_SEED, SUITES, junit_xml, run_suites

OUT_ENV = "CANTORGH_OUT"
DEFAULT_OUT = "cantorgh-out"
DEFAULT_EPS = "1/2,1/4,1/8,1/16"
DEFAULT_BUILD_POINTS = 4096

# analytic types of the builtin families that are building blocks
FAMILY_TAGS = {"lemma1111": "1111", "lemmaiiii": "iiii", "lemma0000": "0000",
               "lemma0001": "0001", "lemma000i": "000i", "mild0111": "0111",
               "lemma0iii": "0iii", "mild0iii": "0iii"}


class UserError(Exception):
    """Bad input; reported with exit code 2."""


# ---------------------------------------------------------------------------
# Parsing helpers
# ---------------------------------------------------------------------------

def _number(text: str):
    text = text.strip()
    if text.lower() in ("inf", "infinity"):
        return math.inf
    try:
        return Fraction(text)
    except ValueError:
        raise UserError(f"not a number: {text!r}") from None


def _number_list(text: str) -> list:
    items = [t for t in text.split(",") if t.strip()]
    if not items:
        raise UserError("empty list")
    return [_number(t) for t in items]


def _read_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise UserError(f"no such file: {path}") from None
    except json.JSONDecodeError as exc:
        raise UserError(f"{path}: invalid JSON ({exc})") from None


def _load_space(path: str) -> FiniteMetricSpace:
    if not os.path.exists(path):
        raise UserError(f"no such file: {path}")
    return load_space(path)


def _digest(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        h.update(fh.read())
    return h.hexdigest()


def _sequence_spec(name_or_path: str, depth: int) -> tuple[CantorSpec, str, DimensionalType | None, list]:
    """Builtin family name or sequence JSON file -> spec, descriptor, analytic type, inputs."""
    inputs = []
    if name_or_path in FAMILIES:
        doc = {"family": name_or_path}
    else:
        doc = _read_json(name_or_path)
        inputs.append(name_or_path)
    if not isinstance(doc, dict):
        raise UserError("sequence JSON must be an object")
    doc = dict(doc)
    if "family" in doc:
        name = doc.pop("family")
        params = {}
        for k, v in doc.items():
            params[k] = int(v) if k == "m" else Fraction(str(v))
        try:
            m, alpha = family(name, **params)
        except TypeError as exc:
            raise UserError(f"bad parameters for family {name!r}: {exc}") from None
        tag = FAMILY_TAGS.get(name)
        target = tag_type(tag) if tag else None
        if name == "geometric" or (name == "lemma1111" and params):
            rho = Fraction(params.get("ratio_log2", 1))
            d = nb.div(nb.log2(params.get("m", 2)), rho)
            target = DimensionalType(d, d, d, d) if nb.is_exact(d) else None
        label = name
    elif "alpha" in doc and "m" in doc:
        m, alpha = explicit([Fraction(str(a)) for a in doc["alpha"]], doc["m"])
        target, label = None, "explicit"
    else:
        raise UserError('sequence JSON needs "family" or both "alpha" and "m"')
    return CantorSpec(m, alpha, depth), label, target, inputs


def _vertex_or_point(text: str, n: int) -> tuple:
    text = text.strip()
    if text.lower().startswith("v"):
        try:
            i = int(text[1:])
        except ValueError:
            raise UserError(f"bad vertex {text!r}") from None
        if not 1 <= i <= n + 1:
            raise UserError(f"vertex index must lie in 1..{n + 1}")
        return vertex(i, n)
    coords = _number_list(text)
    if len(coords) != n + 1:
        raise UserError(f"a simplex point needs {n + 1} coordinates")
    return simplex_point(coords)


def _path_spec(path: str) -> tuple[PathSpec, dict, list]:
    doc = _read_json(path)
    if not isinstance(doc, dict) or "spaces" not in doc or "m" not in doc:
        raise UserError('path spec needs "spaces" and "m"')
    base = Path(path).parent
    inputs = [path]
    spaces = []
    for item in doc["spaces"]:
        if isinstance(item, str):
            p = str(base / item)
            spaces.append(_load_space(p))
            inputs.append(p)
        else:
            spaces.append(space_from_dict(item))
    glue = space_from_dict(doc["glue"]) if "glue" in doc else None
    path_spec = PathSpec(spaces, int(doc["m"]), doc.get("flavor", "metric"), glue=glue,
                         levels=doc.get("levels"))
    return path_spec, doc, inputs


def _cell(x):
    if isinstance(x, Fraction):
        return x
    if x is None:
        return ""
    if isinstance(x, float) or type(x).__name__ == "mpf":
        return nb.fmt(x, 20) if not isinstance(x, float) else x
    return x


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

class Run:
    """Collects outputs and inputs of one invocation for the manifest."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.out = Path(args.out)
        self.outputs: list[str] = []
        self.inputs: list[str] = []
        self.extra: dict = {}

    def path(self, name: str) -> Path:
        p = self.out / name
        self.outputs.append(str(p))
        return p


def cmd_build(run: Run) -> int:
    a = run.args
    if a.target is not None:
        target = a.target
        try:
            if a.tdim is not None:
                asm = prescribed_with_tdim(target, _number(a.tdim), a.resolution)
            else:
                asm = prescribed_factory(target)
        except ValueError as exc:
            raise UserError(str(exc)) from None
        depth = a.depth if a.depth is not None else 2
        space = asm.truncation(depth, a.max_points)
        atomic_write_text(run.path("assembly.json"), dumps_json(asm.to_dict()))
        print(f"{len(asm.components)} component(s), declared type {asm.declared_target}")
    elif a.block is not None:
        if a.block not in TAGS:
            raise UserError(f"unknown block {a.block!r}; choose from {', '.join(TAGS)}")
        blk = building_block(a.block)
        depth = a.depth if a.depth is not None else 3
        space = blk.truncation(depth, a.max_points)
        atomic_write_text(run.path("block.json"), dumps_json(
            {"tag": blk.tag, "type": str(blk.target), "provenance": blk.effective.provenance,
             "variant": blk.effective.variant, "notes": list(blk.notes)}))
    else:
        depth = a.depth if a.depth is not None else 8
        spec, label, _, inputs = _sequence_spec(a.sequence, depth)
        run.inputs += inputs
        space = enumerate_space(spec, a.max_points)
    save_space(space, run.path("space.json"))
    print(f"{len(space)} points, kind {space.kind}")
    return 0


def cmd_dims(run: Run) -> int:
    a = run.args
    spec, label, target, inputs = _sequence_spec(a.spec, 8)
    run.inputs += inputs
    eps = [e for e in _number_list(a.eps)]
    if any(not (0 < e < 1) for e in eps):
        raise UserError("every eps must lie in (0, 1)")
    rep = dimension_report(spec, a.N, eps, target, theta_window=a.window,
                           doubling_window=a.doubling_window)
    write_csv(run.path("dims.csv"), ["n", "h_n", "p_n"],
              ([r.n, _cell(r.h), _cell(r.p)] for r in rep.rows))
    write_csv(run.path("theta.csv"), ["eps_log2", "theta_log2", "eta"],
              ([_cell(nb.log2(t.eps)), _cell(t.theta_log2), _cell(t.eta)] for t in rep.assouad))
    print(f"{label}: {rep.summary()}")
    return 0


def _gh_doc(res) -> dict:
    return res.to_dict()


def cmd_gh(run: Run) -> int:
    a = run.args
    A, B = _load_space(a.a), _load_space(a.b)
    run.inputs += [a.a, a.b]
    if a.mode == "exact" and len(A) + len(B) > a.guard:
        raise SizeError(f"|A| + |B| = {len(A) + len(B)} exceeds the exact-search guard {a.guard};"
                        " use --bounds")
    res = gh_exact(A, B, guard=a.guard if a.mode == "exact" else min(a.guard, GH_GUARD))
    doc = _gh_doc(res)
    atomic_write_text(run.path("gh.json"), dumps_json(doc))
    print(json.dumps({k: v for k, v in doc.items() if k != "witness"}, sort_keys=True))
    return 0


def cmd_ugh(run: Run) -> int:
    a = run.args
    A, B = _load_space(a.a), _load_space(a.b)
    run.inputs += [a.a, a.b]
    doc = _gh_doc(ugh(A, B))
    atomic_write_text(run.path("ugh.json"), dumps_json(doc))
    print(json.dumps({k: v for k, v in doc.items() if k != "witness"}, sort_keys=True))
    return 0


def cmd_qiu(run: Run) -> int:
    a = run.args
    X = _load_space(a.x)
    run.inputs.append(a.x)
    rows = qiu_demo(X, _number_list(a.eps))
    header = ["eps", "delta", "gh_upper", "gh_exact", "ugh", "certified_ratio"]
    write_csv(run.path("qiu.csv"), header,
              ([_cell(getattr(r, h)) for h in header] for r in rows))
    for r in rows:
        print(f"eps={_fmt(r.eps)} ugh={_fmt(r.ugh)} ratio>={_fmt(r.certified_ratio)}")
    return 0


def _fmt(x) -> str:
    return fraction_to_str(x) if isinstance(x, Fraction) else str(x)


def cmd_telescope(run: Run) -> int:
    a = run.args
    if os.path.exists(a.q):
        q = _read_json(a.q)
        run.inputs.append(a.q)
        if isinstance(q, dict):
            q = q.get("q")
        if not isinstance(q, list):
            raise UserError("q JSON must be a list or an object with a \"q\" list")
        q = [float(Fraction(str(x))) for x in q]
    else:
        q = [float(x) for x in _number_list(a.q)]
    levels = a.levels if a.levels is not None else len(q) - 1
    if len(q) < levels + 1:
        raise UserError(f"need at least {levels + 1} coordinates of q for {levels} levels")
    K = float(_number(a.K))
    space = telescope(TelescopeSpec(q[:levels + 1], levels, a.flavor, K))
    save_space(space, run.path("telescope.json"))
    print(f"{len(space)} points, kind {space.kind}")
    return 0


def cmd_fingerprint(run: Run) -> int:
    a = run.args
    X = _load_space(a.space)
    run.inputs.append(a.space)
    fp = fingerprint(X, tol=a.tol)
    doc = {"q": list(fp.q), "K": fp.K, "flavor": fp.flavor, "levels": fp.levels,
           "inf_label": _label_to_json(fp.inf_label)}
    atomic_write_text(run.path("fingerprint.json"), dumps_json(doc))
    print(json.dumps({"levels": fp.levels, "K": fp.K, "flavor": fp.flavor}))
    return 0


def cmd_path(run: Run) -> int:
    a = run.args
    path_spec, doc, inputs = _path_spec(a.spec)
    run.inputs += inputs
    if a.action == "audit":
        start = _vertex_or_point(a.start, path_spec.n)
        end = _vertex_or_point(a.end, path_spec.n)
        k = a.k if a.k is not None else int(doc.get("k", 1))
        rows = path_continuity_audit(path_spec, start, end, a.grid, k)
        write_csv(run.path("audit.csv"), ["t", "sup_distance", "gh_bound"],
                  ([r.t, r.sup_distance, r.gh_bound] for r in rows))
        print(f"{len(rows)} steps, max sup_distance {max(r.sup_distance for r in rows):.6g}")
    else:
        sel = vertex_branch_selection(path_spec, a.denominator)
        atomic_write_text(run.path("branch.json"), dumps_json(
            {"k": sel.k, "collisions": {str(k): v for k, v in sel.collisions.items()},
             "sample_size": sel.sample_size}))
        print(f"branch k = {sel.k}")
    return 0


def _run_one_suite(args):
    suite, seed, cases, inject = args
    return run_suites([suite], seed, cases, inject)


def cmd_verify(run: Run) -> int:
    a = run.args
    suites = a.suites or list(SUITES)
    for s in suites:
        if s not in SUITES:
            raise UserError(f"unknown suite {s!r}; choose from {', '.join(SUITES)}")
    jobs = [(s, a.seed, a.cases, a.inject_fault) for s in suites]
    if a.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=a.jobs) as pool:
            parts = list(pool.map(_run_one_suite, jobs))
    else:
        parts = [_run_one_suite(j) for j in jobs]
    results = [r for part in parts for r in part]
    atomic_write_text(run.path("verify-junit.xml"), junit_xml(results))
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.suite}.{r.name}: {r.detail}")
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return 1 if failed else 0


def cmd_export(run: Run) -> int:
    a = run.args
    if a.space is not None:
        X = _load_space(a.space)
        run.inputs.append(a.space)
    else:
        depth = a.depth if a.depth is not None else 4
        spec, *_ = _sequence_spec(a.family, depth)
        X = enumerate_space(spec, a.max_points)
    if a.format == "json":
        save_space(X, run.path("export.json"))
    else:
        labels = [json.dumps(_label_to_json(l), separators=(",", ":")) for l in X.labels]
        write_csv(run.path("export.csv"), ["label"] + labels,
                  ([labels[i]] + [_cell(X.dist[i, j]) for j in range(len(X))]
                   for i in range(len(X))))
    print(f"exported {len(X)} points")
    return 0


COMMANDS = {"build": cmd_build, "dims": cmd_dims, "gh": cmd_gh, "ugh": cmd_ugh, "qiu": cmd_qiu,
            "telescope": cmd_telescope, "fingerprint": cmd_fingerprint, "path": cmd_path,
            "verify": cmd_verify, "export": cmd_export}


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=None,
                        help=f"output directory (default ${OUT_ENV} or ./{DEFAULT_OUT})")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED, help="seed for randomized suites")

    p = argparse.ArgumentParser(prog="cantorgh", description=__doc__.split("\n")[0])
    p.add_argument("--version", action="version", version=f"cantorgh {__version__}")
    p.add_argument("--replay", metavar="MANIFEST", help="re-run the command recorded in a manifest")
    sub = p.add_subparsers(dest="command")

    b = sub.add_parser("build", parents=[common], help="build a space and write its JSON")
    src = b.add_mutually_exclusive_group(required=True)
    src.add_argument("--target", help='dimensional type "a1,a2,a3,a4" for the factory')
    src.add_argument("--block", help="single building block tag, e.g. 0011")
    src.add_argument("--sequence", help="builtin family name or sequence JSON file")
    b.add_argument("--tdim", help="attach a [0,1]^l grid carrying tdim label l")
    b.add_argument("--resolution", type=int, default=4, help="grid resolution per axis")
    b.add_argument("--depth", type=int, help="truncation depth")
    b.add_argument("--max-points", type=int, default=DEFAULT_BUILD_POINTS,
                   help="enumeration budget")

    d = sub.add_parser("dims", parents=[common], help="h/p and Theta/eta tables")
    d.add_argument("spec", help="builtin family name or sequence JSON file")
    d.add_argument("--N", "-N", type=int, default=1000, help="number of sequence terms")
    d.add_argument("--eps", default=DEFAULT_EPS, help="comma-separated eps values in (0,1)")
    d.add_argument("--window", type=int, default=200, help="Theta search window n <= W")
    d.add_argument("--doubling-window", type=int, default=60,
                   help="window of the non-doubling flag")

    g = sub.add_parser("gh", parents=[common], help="Gromov-Hausdorff distance")
    g.add_argument("a")
    g.add_argument("b")
    mode = g.add_mutually_exclusive_group()
    mode.add_argument("--exact", dest="mode", action="store_const", const="exact",
                      help="exact search; refuse inputs above the guard")
    mode.add_argument("--bounds", dest="mode", action="store_const", const="bounds",
                      help="exact when small, certified interval otherwise")
    g.add_argument("--guard", type=int, default=GH_GUARD, help="max |A|+|B| for exact search")
    g.set_defaults(mode="bounds")

    u = sub.add_parser("ugh", parents=[common], help="non-Archimedean GH distance")
    u.add_argument("a")
    u.add_argument("b")

    q = sub.add_parser("qiu", parents=[common], help="u_GH / GH ratio table")
    q.add_argument("x")
    q.add_argument("--eps", default="1,0.1,0.01")

    t = sub.add_parser("telescope", parents=[common], help="telescope truncation")
    t.add_argument("--q", required=True, help="q JSON file or comma-separated list")
    t.add_argument("--levels", type=int, help="levels J (default len(q) - 1)")
    t.add_argument("--flavor", choices=("u", "v"), default="u")
    t.add_argument("--K", default="1", help="scale K")

    f = sub.add_parser("fingerprint", parents=[common], help="recover q from a telescope")
    f.add_argument("space")
    f.add_argument("--tol", type=float, default=1e-9)

    pa = sub.add_parser("path", parents=[common], help="simplex-path audits")
    pa.add_argument("action", choices=("audit", "select"))
    pa.add_argument("spec", help="path spec JSON")
    pa.add_argument("--from", dest="start", default="v1")
    pa.add_argument("--to", dest="end", default="v2")
    pa.add_argument("--grid", type=int, default=100)
    pa.add_argument("--k", type=int, help="branch index (default from spec or 1)")
    pa.add_argument("--denominator", type=int, help="interior sample denominator")

    v = sub.add_parser("verify", parents=[common], help="run invariant suites")
    v.add_argument("suites", nargs="*", help=f"subset of {', '.join(SUITES)}")
    v.add_argument("--cases", type=int, default=DEFAULT_CASES)
    v.add_argument("--jobs", type=int, default=1, help="run suites in parallel processes")
    v.add_argument("--inject-fault", action="store_true",
                   help="perturb one matrix entry to exercise failure reporting")

    e = sub.add_parser("export", parents=[common], help="export a space as JSON or CSV")
    esrc = e.add_mutually_exclusive_group(required=True)
    esrc.add_argument("--space", help="space JSON file")
    esrc.add_argument("--family", help="builtin family name or sequence JSON to enumerate")
    e.add_argument("--format", choices=("json", "csv"), default="csv")
    e.add_argument("--depth", type=int)
    e.add_argument("--max-points", type=int, default=DEFAULT_BUILD_POINTS)
    return p


def _manifest(run: Run, argv: list[str], seconds: float, status: int) -> dict:
    params = {k: v for k, v in sorted(vars(run.args).items()) if k not in ("replay",)}
    return {
        "tool": "cantorgh",
        "version": __version__,
        "argv": argv,
        "parameters": params,
        "inputs": {p: _digest(p) for p in sorted(set(run.inputs))},
        "outputs": sorted(run.outputs),
        "exit_code": status,
        "wall_clock_seconds": round(seconds, 6),
    }


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.replay:
        doc = _read_json_or_exit(args.replay)
        if doc is None:
            return 2
        argv = list(doc["argv"])
        args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return 2
    if args.out is None:
        args.out = os.environ.get(OUT_ENV) or DEFAULT_OUT
    run = Run(args)
    t0 = time.perf_counter()
    try:
        status = COMMANDS[args.command](run)
    except (UserError, ValueError, KeyError, FileNotFoundError, OverflowError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return 2
    except AssertionError as exc:
        print(f"internal assertion failed: {exc}", file=sys.stderr)
        return 1
    atomic_write_text(Path(args.out) / f"manifest-{args.command}.json",
                      dumps_json(_manifest(run, argv, time.perf_counter() - t0, status)))
    return status


def _read_json_or_exit(path: str):
    try:
        return _read_json(path)
    except UserError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return None


if __name__ == "__main__":
    sys.exit(main())
