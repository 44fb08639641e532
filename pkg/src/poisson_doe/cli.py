"""Command line interface: ``poisson-doe <command> ...``.

Exit codes: 0 success or verified, 1 verification failure, 2 usage error or
violated precondition.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import catalog, efficiency, oracle
from .catalog import RegimeError, RegionSpec
from .design import Design, ReferenceNotOptimalError, SingularDesignError, information_matrix
from .model import DimensionError, InteractionStructure, ModelSpec, recenter, standardized_model, two_dim_model
from .verify import (
    GridConfig, diagonal_constants, build_kdim_F, cross_check_diagonal_formula, equi2_check,
    faces_conjecture_sweep, h_chain_check, kdim_diagonal_sweep, verify_faces, verify_full_grid,
    verify_reduced,
)
from .verify.inequalities import Q0, Q1

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

# values quoted alongside the diagonal inequality, printed next to ours
QUOTED_CONSTANTS = {"q1": 0.456, "h0(q1,2)": 0.997, "h1(q0,0)": 1.097, "taylor2(q0,0)": 0.1001}


class UsageError(Exception):
    pass


def _floats(text):
    try:
        return [float(v) for v in text.replace(" ", "").split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _emit(obj, out=None):
    text = json.dumps(obj, indent=2)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def _read_json(path):
    if path == "-":
        return json.load(sys.stdin)
    return json.loads(Path(path).read_text())


def _model_from_beta(beta):
    if len(beta) == 4:
        return two_dim_model(beta)
    if len(beta) == 2:
        return ModelSpec(1, InteractionStructure.MAIN_EFFECTS, beta)
    if len(beta) == 3:
        return ModelSpec(2, InteractionStructure.MAIN_EFFECTS, beta)
    raise UsageError("--beta needs 2, 3 or 4 entries")


def _grid(args):
    return GridConfig(
        step=args.step, line_step=args.line_step, x_max=args.x_max, tolerance=args.tol,
        threads=args.threads,
    )


# ---------------------------------------------------------------------------
# design


def _rho_matrix(values, k):
    n = k * (k - 1) // 2
    if len(values) != n:
        raise UsageError(f"--faces needs {n} values (upper triangle, row by row) for k={k}")
    rho = np.zeros((k, k))
    rho[np.triu_indices(k, 1)] = values
    return rho + rho.T


def build_design(args):
    """Return ``(model, design, region, notes)`` for the design arguments."""
    notes = []
    if args.kdim is not None:
        k, order = args.kdim, args.order
        if args.faces is not None:
            rho = _rho_matrix(args.faces, k)
            return catalog.faces_model(rho), catalog.design_faces(rho), RegionSpec.two_faces(), notes
        if order == "1":
            model = standardized_model(k, InteractionStructure.FIRST_ORDER)
            return model, catalog.design_kdim_first_order(k, model), RegionSpec.orthant(), notes
        if order == "2":
            model = standardized_model(k, InteractionStructure.SECOND_ORDER)
            return model, catalog.design_kdim_second_order(k, model), RegionSpec.orthant(), notes
        model = standardized_model(k, InteractionStructure.COMPLETE)
        return model, catalog.design_product_k(k, model), RegionSpec.orthant(), notes

    if args.beta is None:
        raise UsageError("give --beta or --kdim")
    model = _model_from_beta(args.beta)
    if model.k == 1:
        return model, catalog.design_1d(model.beta[1]), RegionSpec.orthant(), notes
    if model.structure is InteractionStructure.MAIN_EFFECTS:
        return model, catalog.design_2d_no_interaction(*model.beta[1:]), RegionSpec.orthant(), notes

    _, b1, b2, b12 = model.beta
    if b12 > 0:
        if args.bound is None:
            raise RegimeError("antagonistic; use --bound (beta12 > 0 has no optimal design on the quadrant)")
        if b1 != b2 or not b1 < 0:
            raise RegimeError("antagonistic construction needs beta1 == beta2 < 0")
        c = -b1
        res = catalog.design_antagonistic_class(catalog.synergy(model.beta), args.bound * c)
        notes.append(f"class-restricted: optimal only within the four-point class (case {res.case})")
        design = catalog.scale_design(res.design, [b1, b2])
        return model, design, RegionSpec.rectangle([args.bound, args.bound]), notes
    if args.shift is not None:
        a = np.asarray(args.shift)
        local = recenter(model, a)
        design = catalog.shift_design(catalog.design_2d_interaction(local), a)
        return model, design, RegionSpec.shifted(a), notes
    design = catalog.design_2d_interaction(model)
    region = RegionSpec.orthant()
    if args.bound is not None:
        region = RegionSpec.rectangle([args.bound, args.bound])
        if not catalog.rectangle_validity(design, region.bounds):
            raise RegimeError("support leaves the square; the quadrant result needs a larger bound")
    return model, design, region, notes


def cmd_design(args):
    model, design, region, notes = build_design(args)
    for note in notes:
        print(f"warning: {note}", file=sys.stderr)
    out = design.to_dict()
    out["model"] = model.to_dict()
    out["region"] = region.to_dict()
    out["logdet"] = information_matrix(model, design).logdet
    if notes:
        out["class_restricted"] = True
    _emit(out, args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify


def _load_design_input(args):
    if args.design is None:
        return build_design(args)[:3]
    data = _read_json(args.design)
    design = Design.from_dict(data)
    if args.beta is not None:
        model = _model_from_beta(args.beta)
    elif "model" in data:
        model = ModelSpec.from_dict(data["model"])
    else:
        raise UsageError("design file has no model; pass --beta")
    region = RegionSpec.from_dict(data["region"]) if "region" in data else RegionSpec.orthant()
    return model, design, region


def _summary(report):
    status = "VERIFIED" if report.verified else "NOT VERIFIED"
    lines = [
        f"{status}: max d = {report.max_d:.3e} at {np.round(report.argmax, 4).tolist()} "
        f"({report.n_points} points, tolerance {report.tolerance:g})",
        f"  max psi = {report.max_psi:.6g} at {np.round(report.psi_argmax, 4).tolist()}"
        if report.max_psi is not None else "",
        f"  violations: {report.n_violations}; tail certified: {report.tail_certified}",
    ]
    return "\n".join(line for line in lines if line)


def cmd_verify(args):
    model, design, region = _load_design_input(args)
    grid = _grid(args)
    if args.reduced:
        report = verify_reduced(model, design, grid)
    else:
        report = verify_full_grid(model, design, region, grid)
    print(_summary(report), file=sys.stderr)
    _emit(report.to_dict(), args.out)
    return EXIT_OK if report.verified else EXIT_FAIL


def cmd_faces(args):
    k = args.kdim
    rho = _rho_matrix(args.rho, k)
    report = verify_faces(k, rho, _grid(args))
    out = report.to_dict()
    if args.conjecture:
        conj = faces_conjecture_sweep(k, rho, GridConfig(step=args.conjecture_step, x_max=args.conjecture_x_max,
                                                         tolerance=args.tol, threads=args.threads))
        out["conjecture_full_orthant"] = {"max_d": conj.max_d, "argmax": conj.argmax.tolist(),
                                          "n_points": conj.n_points, "note": "reported only"}
    print(_summary(report), file=sys.stderr)
    _emit(out, args.out)
    return EXIT_OK if report.verified else EXIT_FAIL


# ---------------------------------------------------------------------------
# oracle


def cmd_oracle(args):
    if args.kdim is not None:
        if args.order != "1":
            raise UsageError("oracle supports --kdim with --order 1")
        model = standardized_model(args.kdim, InteractionStructure.FIRST_ORDER)
        reference = catalog.design_kdim_first_order(args.kdim, model)
    else:
        beta = args.beta if args.beta is not None else [0.0, -1.0, -1.0, -args.rho]
        model = _model_from_beta(beta)
        reference = None
        if model.k == 2 and model.structure is InteractionStructure.TWO_DIM_INTERACTION and model.beta[3] <= 0:
            reference = catalog.design_2d_interaction(model)
    grid = oracle.CandidateGrid.box(model.k, args.box, args.grid_step)
    res = oracle.multiplicative_optimize(model, grid, max_iter=args.max_iter, tol=args.tol)
    out = res.to_dict()
    code = EXIT_OK
    if reference is not None:
        try:
            out["efficiency_vs_catalog"] = oracle.compare_to_catalog(model, reference, res)
        except oracle.CatalogSuboptimalError as exc:
            out["error"] = str(exc)
            code = EXIT_FAIL
    print(f"oracle: {res.iterations} iterations, logdet {res.logdet:.10g}, "
          f"gap {res.final_max_sensitivity_gap:.3e}, converged {res.converged}", file=sys.stderr)
    _emit(out, args.out)
    return code


# ---------------------------------------------------------------------------
# curves


def cmd_efficiency(args):
    curve = efficiency.efficiency_curve(args.x, (args.rho_min, args.rho_max), args.samples)
    text = curve.to_csv(args.out)
    if not args.out:
        sys.stdout.write(text)
    rho, eff = curve.peak()
    print(f"peak efficiency {eff:.12g} at rho = {rho:.6g}", file=sys.stderr)
    return EXIT_OK


def cmd_t_curve(args):
    samples = efficiency.t_curve((args.rho_min, args.rho_max), args.samples)
    text = efficiency.t_curve_csv(samples, args.out)
    if not args.out:
        sys.stdout.write(text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# inequalities


def run_inequalities(n_q=2000, n_t=200, q_max=10.0):
    """The full inequality suite as a JSON-friendly dict with an ``ok`` flag."""
    from .verify.inequalities import default_grid

    qg, tg = default_grid(n_q, n_t, q_max)
    chain = h_chain_check(qg, tg)
    eq = equi2_check(qg, tg)
    consts = diagonal_constants()
    kdim = {}
    ok = chain.ok and eq.ok()
    for k, order in [(3, 1), (4, 1), (5, 1), (3, 2), (4, 2)]:
        F = build_kdim_F(k, order)
        sweep = kdim_diagonal_sweep(k, order)
        q = np.linspace(0.0, 10.0, 2001)
        gap = max(cross_check_diagonal_formula(k, order, j, q, relative=True) for j in range(2, k + 1))
        kdim[f"k={k},order={order}"] = {
            "identity_residual": F.identity_residual(),
            "diagonal_max": sweep.max_value,
            "formula_vs_pipeline_relative_gap": gap,
        }
        ok = ok and F.identity_residual() <= 1e-10 and sweep.max_value <= 1e-9 and gap <= 1e-9
    return {
        "ok": bool(ok),
        "constants": consts,
        "quoted": QUOTED_CONSTANTS,
        "h_chain": {"min_slack": chain.min_slack, "slack_h0_le_1": chain.slack_h0_le_1,
                    "slack_1_le_h1": chain.slack_1_le_h1, "slack_h0_le_h2": chain.slack_h0_le_h2,
                    "slack_h2_le_h1": chain.slack_h2_le_h1, "n_points": chain.n_points},
        "equi2": {"max": eq.max_value, "argmax": list(eq.argmax), "max_abs_at_support": eq.max_abs_at_support},
        "kdim": kdim,
    }


def cmd_inequalities(args):
    res = run_inequalities(args.n_q, args.n_t, args.q_max)
    c = res["constants"]
    print(f"{'constant':<16}{'quoted':>10}{'computed':>22}", file=sys.stderr)
    for key, quoted in QUOTED_CONSTANTS.items():
        print(f"{key:<16}{quoted:>10}{c[key]:>22.15g}", file=sys.stderr)
    print(f"q0 = {Q0}, q1 = {Q1:.15g}, q2 = {c['q2']:.15g}", file=sys.stderr)
    print(f"h-chain min slack {res['h_chain']['min_slack']:.3e}; "
          f"EQUI2 max {res['equi2']['max']:.3e}; all ok: {res['ok']}", file=sys.stderr)
    _emit(res, args.out)
    return EXIT_OK if res["ok"] else EXIT_FAIL


# ---------------------------------------------------------------------------
# batch runs


def cmd_run(args):
    """Run every entry of a JSON config: ``{"runs": [{"name": ..., "argv": [...]}]}``.

    Relative ``--out`` paths are resolved against ``--outdir`` (default: the
    current directory).
    """
    config = _read_json(args.config)
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    worst = EXIT_OK
    for entry in config.get("runs", []):
        argv = list(entry["argv"])
        if "--out" in argv:
            i = argv.index("--out") + 1
            argv[i] = str(outdir / argv[i])
        if args.threads is not None and argv and argv[0] in ("verify", "faces"):
            argv += ["--threads", str(args.threads)]
        code = main(argv)
        print(f"[{'ok' if code == EXIT_OK else 'exit ' + str(code)}] {entry.get('name', ' '.join(argv))}",
              file=sys.stderr)
        worst = max(worst, code)
    return worst


# ---------------------------------------------------------------------------


def _add_design_args(p):
    p.add_argument("--beta", type=_floats, help="b0,b1[,b2[,b12]]; four entries select the interaction model")
    p.add_argument("--kdim", type=int, help="number of factors for the k-factor designs")
    p.add_argument("--order", choices=["1", "2", "complete"], default="1",
                   help="k-factor interactions: 1 pairwise, 2 up to triples, complete product design")
    p.add_argument("--faces", type=_floats, help="pairwise synergies rho_ij (upper triangle) for the faces design")
    p.add_argument("--bound", type=float, help="square region [0, b]^2")
    p.add_argument("--shift", type=_floats, help="shifted quadrant corner a1,a2")


def _add_grid_args(p):
    p.add_argument("--step", type=float, help="grid step (default 0.01 in 2D, 0.05 in 3D)")
    p.add_argument("--line-step", type=float, default=0.001, help="step of one-dimensional sweeps")
    p.add_argument("--x-max", type=float, help="truncation of unbounded regions")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--threads", type=int, help="worker threads (default: all cores)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="poisson-doe",
        description="Locally D-optimal designs for Poisson regression with synergetic interaction.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("design", help="closed-form optimal design (main result, product and k-factor theorems)")
    _add_design_args(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_design)

    p = sub.add_parser("verify", help="equivalence-theorem check of a design on a grid")
    p.add_argument("--design", help="design JSON file ('-' for stdin); otherwise built from the design flags")
    _add_design_args(p)
    _add_grid_args(p)
    p.add_argument("--reduced", action="store_true", help="axes and diagonal only (needs swap symmetry)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("faces", help="faces theorem: sweep every two-dimensional face")
    p.add_argument("--kdim", type=int, required=True)
    p.add_argument("--rho", type=_floats, required=True, help="rho_ij >= 0, upper triangle row by row")
    _add_grid_args(p)
    p.add_argument("--conjecture", action="store_true", help="also sweep the full orthant (reported only)")
    p.add_argument("--conjecture-step", type=float, default=0.2)
    p.add_argument("--conjecture-x-max", type=float, default=8.0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_faces)

    p = sub.add_parser("oracle", help="multiplicative algorithm on a candidate grid")
    p.add_argument("--rho", type=float, default=0.0, help="standardized two-factor synergy")
    p.add_argument("--beta", type=_floats)
    p.add_argument("--kdim", type=int)
    p.add_argument("--order", choices=["1"], default="1")
    p.add_argument("--grid-step", type=float, default=0.05)
    p.add_argument("--box", type=float, default=4.0, help="candidates on [0, box]^k")
    p.add_argument("--tol", type=float, default=oracle.DEFAULT_TOL)
    p.add_argument("--max-iter", type=int, default=oracle.DEFAULT_MAX_ITER)
    p.add_argument("--out")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("efficiency", help="efficiency curve of xi_x over rho (CSV)")
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--rho-min", type=float, default=0.0)
    p.add_argument("--rho-max", type=float, default=3.0)
    p.add_argument("--samples", type=int, default=301)
    p.add_argument("--out")
    p.set_defaults(func=cmd_efficiency)

    p = sub.add_parser("t-curve", help="optimal diagonal coordinate t(rho) (CSV)")
    p.add_argument("--rho-min", type=float, default=catalog.ANTAGONISTIC_LIMIT)
    p.add_argument("--rho-max", type=float, default=3.0)
    p.add_argument("--samples", type=int, default=301)
    p.add_argument("--out")
    p.set_defaults(func=cmd_t_curve)

    p = sub.add_parser("inequalities", help="diagonal inequality suite and k-factor diagonal checks")
    p.add_argument("--n-q", type=int, default=2000)
    p.add_argument("--n-t", type=int, default=200)
    p.add_argument("--q-max", type=float, default=10.0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_inequalities)

    p = sub.add_parser("run", help="run a batch config of commands")
    p.add_argument("config")
    p.add_argument("--outdir", default=".")
    p.add_argument("--threads", type=int)
    p.set_defaults(func=cmd_run)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (UsageError, RegimeError, DimensionError, SingularDesignError, ReferenceNotOptimalError,
            ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
