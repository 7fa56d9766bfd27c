"""mirlab command line: validate | bases | periodic | eval | sir | bound | sweep | report.

Every CSV output starts with a `# manifest` comment carrying the run
manifest and a hash over its deterministic fields (instance content, command,
flags, seed, version); identical manifests produce byte-identical CSV bodies.
Exit codes: 0 ok, 1 check failed, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys
import time
from dataclasses import dataclass
from fractions import Fraction

from . import __version__, bounds, distributions as dists, exact, figures
from .bases import dual_feasible_indices, dual_vertex, enumerate_bases
from .errors import MirlabError, ParseError
from .instance import load_instance, validate_instance
from .linalg import det, to_frac, vec_frac
from .periodic import empirical_margin, gamma_mean
from .approx import estimate_recourse
from .sir import SirSpec, sir_expected_recourse

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2


@dataclass
class RunManifest:
    instance_path: str
    instance_sha256: str
    subcommand: str
    flags: dict
    seed: int
    version: str
    started: str
    finished: str = ""

    def hash(self) -> str:
        stable = {
            "instance_path": self.instance_path,
            "instance_sha256": self.instance_sha256,
            "subcommand": self.subcommand,
            "flags": {k: v for k, v in sorted(self.flags.items()) if k != "out"},
            "seed": self.seed,
            "version": self.version,
        }
        return hashlib.sha256(json.dumps(stable, sort_keys=True).encode()).hexdigest()

    def comment_line(self) -> str:
        body = {
            "hash": self.hash(),
            "instance": self.instance_path,
            "instance_sha256": self.instance_sha256,
            "subcommand": self.subcommand,
            "flags": {k: v for k, v in sorted(self.flags.items())},
            "seed": self.seed,
            "version": self.version,
            "started": self.started,
            "finished": self.finished,
        }
        return "# manifest " + json.dumps(body, sort_keys=True)


def _sha256_file(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        h.update(fh.read())
    return h.hexdigest()


def _manifest(args, subcommand: str, instance_path: str = "") -> RunManifest:
    flags = {k: v for k, v in vars(args).items()
             if k not in ("func", "instance") and v is not None}
    sha = _sha256_file(instance_path) if instance_path else ""
    return RunManifest(
        instance_path=instance_path,
        instance_sha256=sha,
        subcommand=subcommand,
        flags={k: (list(v) if isinstance(v, tuple) else v) for k, v in flags.items()},
        seed=getattr(args, "seed", 0) or 0,
        version=__version__,
        started=time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
    )


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, Fraction):
        return str(v)
    return str(v)


def _write_csv(manifest: RunManifest, header: list[str], rows: list[list], out: str | None):
    manifest.finished = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    payload = manifest.comment_line() + "\n" + buf.getvalue()
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(payload)
    else:
        sys.stdout.write(payload)


def _parse_vec(text: str) -> list[Fraction]:
    return [to_frac(tok) for tok in text.replace(";", ",").split(",") if tok.strip()]


# ---------------------------------------------------------------------------
# subcommands


def cmd_validate(args) -> int:
    inst = load_instance(args.instance)
    report = validate_instance(inst, probe_count=args.probes)
    print(f"instance:               {inst.name} ({args.instance})")
    print(f"W integer:              {report.w_integer}")
    print(f"complete recourse:      {report.complete_recourse}"
          + (f" (witness s = {report.witness})" if report.witness else ""))
    print(f"sufficiently expensive: {report.sufficiently_expensive}"
          + (f" (dual witness {[str(v) for v in report.dual_witness]})"
             if report.dual_witness is not None else ""))
    for msg in report.messages:
        print(f"note: {msg}")
    if report.complete_recourse == "refuted" or not report.sufficiently_expensive:
        return EXIT_CHECK_FAILED
    if report.complete_recourse == "inconclusive":
        print("warning: completeness inconclusive at desk scale")
    return EXIT_OK


def cmd_bases(args) -> int:
    inst = load_instance(args.instance)
    manifest = _manifest(args, "bases", args.instance)
    q = _parse_vec(args.q) if args.q else vec_frac(dists.representative_q(inst.dist))
    blist = enumerate_bases(inst)
    feas = set(dual_feasible_indices(q, blist, inst))
    rows = []
    for basis in blist:
        rows.append([
            basis.index,
            ";".join(str(c) for c in basis.columns),
            str(det(basis.b_mat())),
            basis.p,
            ";".join(str(v) for v in dual_vertex(q, basis)),
            basis.index in feas,
        ])
    _write_csv(manifest, ["k", "columns", "det", "p", "lambda", "dual_feasible"], rows, args.out)
    return EXIT_OK


def cmd_periodic(args) -> int:
    inst = load_instance(args.instance)
    manifest = _manifest(args, "periodic", args.instance)
    q = _parse_vec(args.q) if args.q else vec_frac(dists.representative_q(inst.dist))
    blist = enumerate_bases(inst)
    feas = dual_feasible_indices(q, blist, inst)
    rows = []
    for k in feas:
        basis = blist[k]
        gamma, err = gamma_mean(basis, q, inst, args.gamma_res)
        d_emp = empirical_margin(basis, q, inst, probe_count=25, seed=args.seed)
        rows.append([
            k,
            basis.p,
            ";".join(str(v) for v in dual_vertex(q, basis)),
            gamma,
            err,
            "none" if d_emp is None else d_emp,
        ])
    _write_csv(manifest, ["k", "p", "lambda", "gamma", "gamma_err", "d_emp"], rows, args.out)
    return EXIT_OK


def cmd_eval(args) -> int:
    path = args.instance or args.instance_flag
    if not path:
        raise ParseError("an instance path is required (positional or --instance)")
    inst = load_instance(path)
    manifest = _manifest(args, "eval", path)
    x = _parse_vec(args.x)
    est = estimate_recourse(x, inst, args.which, args.n, args.seed, args.gamma_res)
    _write_csv(manifest,
               ["which", "x", "mean", "se", "n", "seed"],
               [[args.which, ";".join(str(v) for v in x), est.mean, est.std_error,
                 est.n_samples, est.seed]],
               args.out)
    return EXIT_OK


def cmd_sir(args) -> int:
    try:
        hspec = dists.parse_marginal(json.loads(args.h))
    except json.JSONDecodeError as exc:
        raise ParseError(f"bad h spec: {exc}") from exc
    spec = SirSpec(to_frac(args.qplus), to_frac(args.qminus), hspec)
    manifest = RunManifest("", "", "sir",
                           {"qplus": args.qplus, "qminus": args.qminus,
                            "h": args.h, "x": args.x},
                           0, __version__,
                           time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()))
    value = sir_expected_recourse(spec, to_frac(args.x), args.tail_tol)
    _write_csv(manifest, ["qplus", "qminus", "h", "x", "expected_recourse"],
               [[args.qplus, args.qminus, args.h, args.x, value]], args.out)
    return EXIT_OK


def cmd_bound(args) -> int:
    inst = load_instance(args.instance)
    manifest = _manifest(args, "bound", args.instance)
    consts = bounds.bound_constants(inst)
    if args.C == "calibrate":
        param = "h_sigma" if all(isinstance(m, dists.Normal) for m in inst.dist.h) else "q_scale"
        values = [0.5, 1, 2, 4] if param == "h_sigma" else [1, 2, 4]
        rows = bounds.scaling_ratio_table(inst, param, values, args.n, args.seed,
                                          gamma_res=args.gamma_res)
        consts.calibrated_C = bounds.calibrate(rows)
        c_label = "calibrated"
    else:
        consts.calibrated_C = float(args.C)
        c_label = "user"
    eq, _ = dists.expected_l1_norm(inst.dist)
    tv = dists.tv_conditional_sum(inst.dist)
    bnd = bounds.parametric_bound(inst, consts)
    _write_csv(manifest,
               ["gamma1", "gamma2", "gamma", "max_subdet", "E_q_l1", "tv_sum",
                "C", "C_source", "bound"],
               [[consts.gamma1, consts.gamma2, consts.gamma, consts.max_subdet,
                 eq, tv, consts.calibrated_C, c_label, bnd]],
               args.out)
    return EXIT_OK


_SWEEP_HEADER = ["variant", "param_value", "sup_err", "sup_err_se", "E_q_l1",
                 "tv_sum", "bound", "ratio", "gamma1", "gamma2", "seed"]


def cmd_sweep(args) -> int:
    inst = load_instance(args.instance)
    manifest = _manifest(args, "sweep", args.instance)
    values = [to_frac(tok) for tok in args.values.split(",") if tok.strip()]
    if not values:
        raise ParseError("empty --values list")
    grid = bounds.default_x_grid(inst, args.x_points)
    done: list = []
    failure = None
    for value in values:
        try:
            done.extend(bounds.scaling_ratio_table(
                inst, args.param, [value], args.n, args.seed,
                x_grid=grid, gamma_res=args.gamma_res))
        except MirlabError as exc:
            failure = exc
            break

    def as_row(r, bound):
        return [r.variant, float(r.param_value), r.sup_err, r.sup_err_se,
                r.E_q_l1, r.tv_sum, bound, r.ratio, r.gamma1, r.gamma2, r.seed]

    if failure is not None:
        # flush what completed, then one explicit error row
        rows_out = [as_row(r, "") for r in done]
        rows_out.append([f"error: {failure}"] + [""] * (len(_SWEEP_HEADER) - 1))
        _write_csv(manifest, _SWEEP_HEADER, rows_out, args.out)
        print(f"error: {failure}", file=sys.stderr)
        return EXIT_CHECK_FAILED
    bounds.apply_bound(done, bounds.calibrate(done))
    _write_csv(manifest, _SWEEP_HEADER, [as_row(r, r.bound) for r in done], args.out)
    return EXIT_OK


def _read_sweep_csv(path: str):
    try:
        with open(path) as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    manifest = None
    body = []
    for line in lines:
        if line.startswith("# manifest "):
            manifest = json.loads(line[len("# manifest "):])
        elif line.strip():
            body.append(line)
    if not body:
        raise ParseError("no data rows")
    reader = csv.reader(body)
    header = next(reader)
    if header[:2] != ["variant", "param_value"]:
        raise ParseError("not a sweep CSV (unexpected header)")
    rows = []
    for rec in reader:
        if rec and rec[0].startswith("error:"):
            raise ParseError(f"sweep contains an error row: {rec[0]}")
        rows.append({k: (v if k == "variant" else float(v))
                     for k, v in zip(header, rec)})
    if not rows:
        raise ParseError("no data rows")
    return manifest, rows


def cmd_report(args) -> int:
    manifest, rows = _read_sweep_csv(args.sweep_csv)
    ratios = [r["ratio"] for r in rows]
    c_cal = max(ratios)
    spread = max(ratios) / min(ratios) if min(ratios) > 0 else float("inf")
    bounds_col = [r["bound"] for r in rows]
    bound_decreasing = all(b2 < b1 for b1, b2 in zip(bounds_col, bounds_col[1:]))
    sup_noninc = all(r2["sup_err"] <= r1["sup_err"] + 3 * (r1["sup_err_se"] + r2["sup_err_se"])
                     for r1, r2 in zip(rows, rows[1:]))
    lines = [
        f"sweep report: {args.sweep_csv}",
        f"rows: {len(rows)}",
        f"calibrated_C (max ratio): {c_cal!r}",
        f"ratio spread (max/min): {spread!r}",
        f"bound decreasing along sweep: {'yes' if bound_decreasing else 'no'}",
        f"sup_err non-increasing within 3*SE: {'yes' if sup_noninc else 'no'}",
    ]
    inst_path = args.instance or (manifest or {}).get("instance")
    if inst_path and os.path.exists(inst_path):
        inst = load_instance(inst_path)
        q = vec_frac(dists.representative_q(inst.dist))
        blist = enumerate_bases(inst)
        lines.append("per-basis certificates (representative q):")
        lines.append("  k  p  lambda        gamma          d_emp  shift_level")
        for k in dual_feasible_indices(q, blist, inst):
            basis = blist[k]
            gamma, err = gamma_mean(basis, q, inst, 1024)
            d_emp = empirical_margin(basis, q, inst, probe_count=20)
            try:
                cert = bounds.empirical_shift(basis, inst, [q], probe_count=20,
                                              gamma_res=1024)
                level = cert.ladder_level
            except MirlabError:
                level = "none"
            lam = ";".join(str(v) for v in dual_vertex(q, basis))
            lines.append(f"  {k}  {basis.p}  {lam:<12} {gamma:.6f}+-{err:.1e}  "
                         f"{'none' if d_emp is None else d_emp}      {level}")
    if args.fig_dir:
        stem = os.path.splitext(os.path.basename(args.sweep_csv))[0]
        paths = figures.render_sweep_figures(rows, args.fig_dir, stem=stem)
        for p in paths:
            lines.append(f"figure: {p}")
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# ---------------------------------------------------------------------------


def _add_common(sp, n_default=100_000):
    sp.add_argument("--seed", type=int, default=0, help="base seed (default 0)")
    sp.add_argument("--n", type=int, default=n_default,
                    help=f"Monte Carlo sample count (default {n_default})")
    sp.add_argument("--gamma-res", dest="gamma_res", type=int, default=1024,
                    help="period-cell grid resolution per axis (default 1024)")
    sp.add_argument("--out", default=None, help="output path (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mirlab",
                                 description="convex approximations of mixed-integer "
                                             "recourse models: oracles, bounds, sweeps")
    sub = ap.add_subparsers(dest="cmd", required=True)

    sp = sub.add_parser("validate", help="check model assumptions")
    sp.add_argument("instance")
    sp.add_argument("--probes", type=int, default=20)
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("bases", help="dual basis table")
    sp.add_argument("instance")
    sp.add_argument("--q", default=None, help="probe cost vector, comma separated")
    _add_common(sp)
    sp.set_defaults(func=cmd_bases)

    sp = sub.add_parser("periodic", help="per-basis periodic summary")
    sp.add_argument("instance")
    sp.add_argument("--q", default=None)
    _add_common(sp)
    sp.set_defaults(func=cmd_periodic)

    sp = sub.add_parser("eval", help="Monte Carlo recourse estimate at a point")
    sp.add_argument("instance", nargs="?", default=None)
    sp.add_argument("--instance", dest="instance_flag", default=None,
                    help="instance path (alternative to the positional form)")
    sp.add_argument("--x", required=True, help="first-stage point, comma separated")
    sp.add_argument("--which", required=True, choices=["exact", "shifted", "alpha"])
    _add_common(sp)
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("sir", help="simple-integer-recourse closed-form oracle")
    sp.add_argument("--qplus", required=True)
    sp.add_argument("--qminus", required=True)
    sp.add_argument("--h", required=True, help='marginal JSON, e.g. {"type":"uniform","a":0,"b":1}')
    sp.add_argument("--x", required=True)
    sp.add_argument("--tail-tol", dest="tail_tol", type=float, default=1e-12)
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_sir)

    sp = sub.add_parser("bound", help="bound constants and the parametric bound")
    sp.add_argument("instance")
    sp.add_argument("--C", default="calibrate", help='multiplier: a number or "calibrate"')
    _add_common(sp)
    sp.set_defaults(func=cmd_bound)

    sp = sub.add_parser("sweep", help="parameter sweep against the bound factors")
    sp.add_argument("instance")
    sp.add_argument("--param", required=True, choices=["h_sigma", "q_scale", "alpha"])
    sp.add_argument("--values", required=True, help="comma-separated parameter values")
    sp.add_argument("--x-points", dest="x_points", type=int, default=5,
                    help="first-stage grid size (default 5)")
    _add_common(sp)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("report", help="summarize a sweep CSV (optionally with figures)")
    sp.add_argument("sweep_csv")
    sp.add_argument("--instance", default=None,
                    help="instance path for the certificates table "
                         "(defaults to the path recorded in the manifest)")
    sp.add_argument("--fig-dir", dest="fig_dir", default=None,
                    help="directory for rendered trend figures")
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_report)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except (ParseError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except MirlabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CHECK_FAILED


if __name__ == "__main__":
    sys.exit(main())
