"""Batch command-line front end.

Every subcommand resolves its configuration (flags override an optional
key=value config file), runs, and writes a JSON summary embedding the
resolved configuration and the package version.  Exit codes: 0 success,
1 usage or precondition error, 2 ran correctly but a statistical or
identity acceptance check failed.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from fractions import Fraction
from functools import partial
from pathlib import Path

import numpy as np

from . import __version__, constants
from .closed_form import (WindowDescriptor, as_record, asymptotic_covariance,
                          hyperplane_intersection, intersection_density,
                          isoperimetric_bound, mean_F_alpha, weibull_beta,
                          weibull_cdf)
from .derived_processes import f_alpha, intersections, order_statistics, proximity, \
    write_segments_csv
from .flat_geometry import Subspace
from .measures import (GrassmannMeasure, parse_directional_file,
                       symmetrize_line_measure, t_lift)
from .measure_metrics import stability_harness
from .simulator import (FlatProcessSpec, SrConstruction, build_factorial_distribution,
                        sample_cube_process, sample_poisson, sample_sr_flats,
                        write_flat_sample)
from .stats_harness import ReplicationPlan, clt_diagnostics, ks_statistic, replicate
from .zonoid_engine import (area_measure, from_measure, intrinsic_volume,
                            merge_grassmann_atoms)

Z_THRESHOLD = 3.0


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        raise SystemExit(self._fail(message))

    @staticmethod
    def _fail(message) -> int:
        print(f"error: {message}", file=sys.stderr)
        return 1


def _default_seed() -> int:
    return int(os.environ.get("FLATPROC_SEED", "0"))


def _parse_window(text: str) -> WindowDescriptor:
    if text == "cube":
        return WindowDescriptor.unit_cube(3)
    if text.startswith("cube:"):
        return WindowDescriptor.unit_cube(int(text.split(":")[1]))
    if text.startswith("ball:"):
        return WindowDescriptor.ball(float(text.split(":")[1]))
    if text.startswith("box:"):
        return WindowDescriptor.box([float(t) for t in text.split(":")[1].split(",")])
    raise argparse.ArgumentTypeError(
        f"cannot parse window {text!r}; use cube, cube:N, ball:R, or box:s1,s2,...")


def _parse_q(text: str, n: int, k: int) -> GrassmannMeasure:
    if text == "isotropic":
        return GrassmannMeasure.isotropic(n, k, 1.0)
    if text == "axes":
        if k != 1:
            raise ValueError("axes distribution needs k = 1")
        eye = np.eye(n)
        return GrassmannMeasure.discrete(
            [(Subspace(eye[i:i + 1]), 1.0 / n) for i in range(n)])
    path = Path(text)
    if not path.exists():
        raise ValueError(f"directional distribution file not found: {text}")
    q = parse_directional_file(path)
    if q.n != n or q.k != k:
        raise ValueError(
            f"distribution in {text} lives on G({q.n},{q.k}), expected G({n},{k})")
    return q.normalized()


def _emit(summary: dict, out: str | None) -> None:
    text = json.dumps(summary, indent=2, default=_json_default)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    raise TypeError(f"not JSON serializable: {type(obj)}")


def _summary(command: str, config: dict, results: dict, passed: bool | None) -> dict:
    return {"command": command, "version": __version__, "config": config,
            "results": results, "passed": passed}


def _estimate_f_alpha(rng, spec: FlatProcessSpec, delta: float, alpha: float,
                      window: WindowDescriptor, radius: float) -> float:
    sample = sample_poisson(spec, radius, rng)
    seg = proximity(sample, delta=delta)
    return f_alpha(seg, alpha, window)


def _estimate_min_length(rng, spec: FlatProcessSpec, delta: float, alpha: float,
                         window: WindowDescriptor, radius: float) -> float:
    sample = sample_poisson(spec, radius, rng)
    seg = proximity(sample, delta=delta)
    return float(order_statistics(seg, alpha, window, 1)[0])


def _estimate_intersection_count(rng, spec: FlatProcessSpec, order: int) -> float:
    sample = sample_poisson(spec, 1.0, rng)
    inter = intersections(sample, order=order)
    hits = sum(1 for flat in inter.flats
               if np.linalg.norm(flat.offset) <= 1.0)
    return float(hits)


def _write_raw_csv(path: str, columns: dict) -> None:
    """Opt-in CSV of raw replication values, one column per series."""
    keys = list(columns)
    rows = max(np.asarray(columns[k]).shape[0] for k in keys)
    lines = [",".join(keys)]
    for i in range(rows):
        cells = []
        for k in keys:
            arr = np.asarray(columns[k])
            cells.append(repr(float(arr[i])) if i < arr.shape[0] else "")
        lines.append(",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n")


def _cmd_simulate(args) -> tuple[dict, int]:
    q = _parse_q(args.q, args.n, args.k)
    if args.kind == "poisson":
        spec = FlatProcessSpec(args.n, args.k, args.gamma, q)
        sample = sample_poisson(spec, args.radius, args.seed)
    else:
        anchor = Subspace(np.eye(args.n)[args.k:])
        spec = FlatProcessSpec(args.n, args.k, args.gamma, q,
                               kind=SrConstruction(args.kappa, anchor))
        sample = sample_sr_flats(spec, args.radius, args.seed,
                                 cover_radius=args.cover)
    write_flat_sample(sample, args.sample_out)
    results = {"flats": len(sample), "sampleFile": args.sample_out}
    if args.segments_out:
        seg = proximity(sample, delta=args.delta)
        write_segments_csv(seg, args.segments_out, seed=str(args.seed))
        results["segments"] = len(seg)
        results["segmentsFile"] = args.segments_out
    return results, 0


def _cmd_proximity(args) -> tuple[dict, int]:
    if not 2 * args.k < args.n:
        raise ValueError("requires 2k < n")
    q = _parse_q(args.q, args.n, args.k)
    window = args.window
    spec = FlatProcessSpec(args.n, args.k, args.gamma, q)
    radius = window.circumradius() + args.delta / 2.0
    closed, closed_se = mean_F_alpha(args.n, args.k, args.gamma, q, args.delta,
                                     args.alpha, window)
    plan = ReplicationPlan(args.reps, args.seed, name="proximity")
    est = partial(_estimate_f_alpha, spec=spec, delta=args.delta,
                  alpha=args.alpha, window=window, radius=radius)
    stats = replicate(plan, est, jobs=args.jobs,
                      keep_values=bool(args.raw_csv))
    if args.raw_csv:
        _write_raw_csv(args.raw_csv, {"value": stats.pop("values")})
    se = math.sqrt(stats["standardError"] ** 2 + closed_se ** 2)
    z = (stats["mean"] - closed) / se if se > 0 else 0.0
    passed = abs(z) <= Z_THRESHOLD
    inputs = {"n": args.n, "k": args.k, "gamma": args.gamma,
              "delta": args.delta, "alpha": args.alpha, "q": args.q}
    results = {"closedForm": closed, "closedFormSE": closed_se,
               "mcMean": stats["mean"], "standardError": stats["standardError"],
               "z": z, "windowRadius": radius,
               "records": [as_record("meanLengthPowerFunctional", closed,
                                     closed_se, inputs)],
               "isoperimetricBound": (isoperimetric_bound(args.n, args.gamma, args.delta)
                                      if args.k == 1 and args.n >= 3 else None)}
    return results, (0 if passed else 2)


def _cmd_intersect(args) -> tuple[dict, int]:
    if args.r * args.k < (args.r - 1) * args.n:
        raise ValueError("requires r k >= (r-1) n")
    q = _parse_q(args.q, args.n, args.k)
    spec = FlatProcessSpec(args.n, args.k, args.gamma, q)
    qdim = args.r * args.k - (args.r - 1) * args.n
    density, density_se = intersection_density(
        args.n, [args.k] * args.r, [args.gamma] * args.r, [q] * args.r,
        same_process=True, rng=args.seed + 1, samples=args.mc_samples)
    expected_hits = density * constants.ball_volume(args.n - qdim)
    plan = ReplicationPlan(args.reps, args.seed, name="intersect")
    est = partial(_estimate_intersection_count, spec=spec, order=args.r)
    stats = replicate(plan, est, jobs=args.jobs)
    se = math.sqrt(stats["standardError"] ** 2
                   + (density_se * constants.ball_volume(args.n - qdim)) ** 2)
    z = (stats["mean"] - expected_hits) / se if se > 0 else 0.0
    passed = abs(z) <= Z_THRESHOLD
    results = {"intersectionDensity": density, "densitySE": density_se,
               "expectedHits": expected_hits, "mcMean": stats["mean"],
               "standardError": stats["standardError"], "z": z,
               "intersectionDim": qdim}
    return results, (0 if passed else 2)


def _cmd_zonoid(args) -> tuple[dict, int]:
    q = _parse_q(args.q, args.n, args.n - 1) if args.hyperplanes \
        else _parse_q(args.q, args.n, 1)
    if q.is_isotropic:
        raise ValueError("zonoid checks need a discrete directional distribution")
    from .measures import symmetrize_hyperplane_measure

    even = (symmetrize_hyperplane_measure(q) if args.hyperplanes
            else symmetrize_line_measure(q)).scaled(args.gamma)
    zono = from_measure(even)
    volumes = [intrinsic_volume(zono, m) for m in range(args.n + 1)]
    identity_errors = {}
    for r in range(2, args.n):
        gq_r = hyperplane_intersection(args.n, 1.0, even, r)
        lift = t_lift(gq_r) if gq_r.atoms else None
        s_r = area_measure(even, r)
        scale = math.comb(args.n - 1, r)
        err = 0.0
        if lift is not None:
            merged_lift = merge_grassmann_atoms(list(lift.subspheres))
            merged_area = merge_grassmann_atoms(
                [(s, scale * w) for s, w in s_r.subspheres])
            for sub, w in merged_lift:
                match = [w2 for s2, w2 in merged_area if s2.same_span(sub, tol=1e-8)]
                err = max(err, abs(w - (match[0] if match else 0.0)))
        # total-mass relation between the area measure and intrinsic volume
        total = sum(w * constants.sphere_surface(s.k) for s, w in s_r.subspheres)
        vm_err = abs(math.comb(args.n, r) / (args.n * constants.ball_volume(args.n - r))
                     * total - volumes[r])
        identity_errors[f"r={r}"] = {"liftIdentity": err, "volumeRelation": vm_err}
    worst = max((max(v.values()) for v in identity_errors.values()), default=0.0)
    passed = worst <= 1e-10
    results = {"intrinsicVolumes": volumes, "identityErrors": identity_errors,
               "worstError": worst}
    return results, (0 if passed else 2)


def _cmd_clt(args) -> tuple[dict, int]:
    if not 2 * args.k < args.n:
        raise ValueError("requires 2k < n")
    q = _parse_q(args.q, args.n, args.k)
    spec = FlatProcessSpec(args.n, args.k, args.gamma, q)
    base = WindowDescriptor.ball(1.0)
    values = {}
    for rho in args.rho:
        window = base.rescaled(rho)
        radius = window.circumradius() + args.delta / 2.0
        plan = ReplicationPlan(args.reps, args.seed + int(rho), name=f"clt rho={rho}")
        est = partial(_estimate_f_alpha, spec=spec, delta=args.delta,
                      alpha=args.alpha, window=window, radius=radius)
        values[rho] = replicate(plan, est, jobs=args.jobs, keep_values=True)["values"]
    if args.raw_csv:
        _write_raw_csv(args.raw_csv,
                       {f"rho={rho}": vals for rho, vals in values.items()})
    target, _ = asymptotic_covariance(args.n, args.k, args.gamma, q, args.delta,
                                      args.alpha, args.alpha, base)
    report = clt_diagnostics(values, args.n, args.k, target_variance=target)
    passed = (report["ksDecreasing"] and report["finalKS"] < 0.06
              and abs(report["varianceRatio"] - 1.0) <= 0.15)
    return report, (0 if passed else 2)


def _cmd_weibull(args) -> tuple[dict, int]:
    if not 2 * args.k < args.n:
        raise ValueError("requires 2k < n")
    q = _parse_q(args.q, args.n, args.k)
    spec = FlatProcessSpec(args.n, args.k, args.gamma, q)
    base = WindowDescriptor.ball(1.0)
    window = base.rescaled(args.rho)
    radius = window.circumradius() + args.delta / 2.0
    beta, _ = weibull_beta(args.n, args.k, args.gamma, q, base)
    plan = ReplicationPlan(args.reps, args.seed, name="weibull")
    est = partial(_estimate_min_length, spec=spec, delta=args.delta,
                  alpha=args.alpha, window=window, radius=radius)
    raw = replicate(plan, est, jobs=args.jobs, keep_values=True)["values"]
    scale = args.rho ** (args.n * args.alpha / (args.n - 2 * args.k))
    finite = raw[np.isfinite(raw)]
    scaled = scale * finite
    if args.raw_csv:
        _write_raw_csv(args.raw_csv, {"scaledMin": scaled})
    ks = ks_statistic(scaled, lambda x: weibull_cdf(x, beta, args.n, args.k, args.alpha))
    passed = ks < 0.05 and finite.shape[0] == raw.shape[0]
    results = {"beta": beta, "ks": ks, "scaled": args.rho,
               "emptyWindows": int(raw.shape[0] - finite.shape[0]),
               "meanScaledMin": float(scaled.mean()),
               "records": [as_record("weibullRate", beta, 0.0,
                                     {"n": args.n, "k": args.k,
                                      "gamma": args.gamma, "q": args.q})]}
    return results, (0 if passed else 2)


def _cube_indicator(lo: np.ndarray, hi: np.ndarray):
    def indicator(points: np.ndarray) -> np.ndarray:
        return np.all((points >= lo) & (points < hi), axis=1)
    return indicator


def _cmd_appendix(args) -> tuple[dict, int]:
    dist = build_factorial_distribution(args.kappa)
    table = {str(i): dist.exact[i] for i in range(args.kappa + 1)}
    moment_errors = [abs(dist.factorial_moment(m) - 1.0)
                     for m in range(1, args.kappa + 1)]
    passed = max(moment_errors) <= 1e-12
    results = {"kappa": args.kappa, "table": table,
               "probabilities": dist.probabilities.tolist(),
               "momentErrors": moment_errors}
    if args.cubes:
        from .stats_harness import factorial_moment_check

        d = args.dim
        sr = {}
        for r in range(2, args.kappa + 2):
            # r disjoint slabs of the unit cube along the first axis
            edges = np.linspace(0.0, 1.0, r + 1)
            sets = [_cube_indicator(np.array([edges[i]] + [0.0] * (d - 1)),
                                    np.array([edges[i + 1]] + [1.0] * (d - 1)))
                    for i in range(r)]
            check = factorial_moment_check(
                partial(_sample_one_cube, d=d, dist=dist),
                sets, args.cubes, args.seed + r)
            expected = float(r) ** (-r)
            sr[f"r={r}"] = {**check, "expected": expected}
            if r <= args.kappa:
                passed = passed and abs(check["z"]) < Z_THRESHOLD
            else:
                passed = passed and check["exactZero"]
        results["srChecks"] = sr
    return results, (0 if passed else 2)


def _sample_one_cube(rng, d: int, dist) -> np.ndarray:
    return sample_cube_process(d, dist, [(0, 1)] * d, rng)


def _cmd_stability(args) -> tuple[dict, int]:
    rng = np.random.default_rng(args.seed)
    base_units = [np.eye(args.n)[i] for i in range(args.n)]
    extra = rng.standard_normal(args.n)
    base_units.append(extra / np.linalg.norm(extra))
    from .measures import SphereMeasure

    weight = 1.0 / len(base_units)
    base = SphereMeasure.atoms(args.n, [(u, weight) for u in base_units])
    family = []
    for t in args.t:
        perturbed = []
        for i, u in enumerate(base_units):
            axis = np.roll(u, 1)
            v = u + t * (i + 1) / len(base_units) * (axis - (axis @ u) * u)
            perturbed.append(v / np.linalg.norm(v))
        family.append((t, SphereMeasure.atoms(args.n, [(u, weight) for u in perturbed])))
    report = stability_harness(args.case, base, family, rho=args.rho_bound,
                               upper=args.upper, order=args.order)
    lhs = [e["d_BL_lhs"] for e in report["entries"]]
    rhs = [e["d_BL_rhs"] for e in report["entries"]]
    shrinking = (all(a >= b - 1e-12 for a, b in zip(lhs, lhs[1:]))
                 and all(a >= b - 1e-12 for a, b in zip(rhs, rhs[1:])))
    bounded = all(math.isfinite(e["ratio"]) for e in report["entries"])
    passed = shrinking and bounded
    return report, (0 if passed else 2)


def _cmd_version(args) -> tuple[dict, int]:
    return {"version": __version__}, 0


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=_default_seed(),
                   help="master seed (env FLATPROC_SEED is the fallback)")
    p.add_argument("--out", type=str, default=None, help="JSON summary path")
    p.add_argument("--config", type=str, default=None,
                   help="key=value file; explicit flags override it")
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                   help="worker processes; results are independent of it")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="flatproc", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="emit a flat sample (and segment CSV)")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--q", type=str, default="isotropic")
    p.add_argument("--radius", type=float, default=2.0)
    p.add_argument("--kind", choices=["poisson", "sr"], default="poisson")
    p.add_argument("--kappa", type=int, default=3)
    p.add_argument("--cover", type=float, default=None)
    p.add_argument("--delta", type=float, default=1.0)
    p.add_argument("--sample-out", type=str, default="flats.txt")
    p.add_argument("--segments-out", type=str, default=None)
    _add_common(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("proximity", help="Monte Carlo vs closed-form proximity")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--delta", type=float, default=1.0)
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--q", type=str, default="isotropic")
    p.add_argument("--reps", type=int, default=10_000)
    p.add_argument("--window", type=_parse_window, default=_parse_window("cube"))
    p.add_argument("--raw-csv", type=str, default=None,
                   help="opt-in CSV of raw replication values")
    _add_common(p)
    p.set_defaults(func=_cmd_proximity)

    p = sub.add_parser("intersect", help="Monte Carlo vs closed-form intersections")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--r", type=int, default=2)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--q", type=str, default="isotropic")
    p.add_argument("--reps", type=int, default=2_000)
    p.add_argument("--mc-samples", type=int, default=20_000)
    _add_common(p)
    p.set_defaults(func=_cmd_intersect)

    p = sub.add_parser("zonoid", help="intrinsic volumes and area-measure identities")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--q", type=str, default="axes")
    p.add_argument("--hyperplanes", action="store_true",
                   help="interpret the distribution on G(n, n-1)")
    _add_common(p)
    p.set_defaults(func=_cmd_zonoid)

    p = sub.add_parser("clt", help="normality diagnostics across window scales")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--delta", type=float, default=1.0)
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--q", type=str, default="isotropic")
    p.add_argument("--rho", type=float, nargs="+", default=[2.0, 4.0, 8.0])
    p.add_argument("--reps", type=int, default=1_000)
    p.add_argument("--raw-csv", type=str, default=None,
                   help="opt-in CSV of raw replication values")
    _add_common(p)
    p.set_defaults(func=_cmd_clt)

    p = sub.add_parser("weibull", help="scaled shortest-segment law vs its limit")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--delta", type=float, default=1.0)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--q", type=str, default="isotropic")
    p.add_argument("--rho", type=float, default=8.0)
    p.add_argument("--reps", type=int, default=2_000)
    p.add_argument("--raw-csv", type=str, default=None,
                   help="opt-in CSV of raw replication values")
    _add_common(p)
    p.set_defaults(func=_cmd_weibull)

    p = sub.add_parser("appendix", help="count-law tables and moment checks")
    p.add_argument("--kappa", type=int, default=3)
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--cubes", type=int, default=0,
                   help="replications for the per-cube moment checks (0 = skip)")
    _add_common(p)
    p.set_defaults(func=_cmd_appendix)

    p = sub.add_parser("stability", help="measure-metric stability report")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--case", choices=["area-measure", "hyperplane-intersection",
                                      "line-proximity"], default="area-measure")
    p.add_argument("--order", type=int, default=2)
    p.add_argument("--t", type=float, nargs="+", default=[0.2, 0.1, 0.05, 0.025])
    p.add_argument("--rho-bound", type=float, default=0.02)
    p.add_argument("--upper", type=float, default=4.0)
    _add_common(p)
    p.set_defaults(func=_cmd_stability)

    p = sub.add_parser("version", help="print the package version")
    _add_common(p)
    p.set_defaults(func=_cmd_version)
    return parser


def _apply_config(argv: list[str]) -> list[str]:
    """Insert config-file key=value pairs as flags right after the
    subcommand, so explicit flags (parsed later) override them."""
    if "--config" not in argv:
        return argv
    pos = argv.index("--config")
    path = argv[pos + 1]
    tokens: list[str] = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        tokens.append(f"--{key.strip()}")
        tokens.extend(str(value).strip().split())
    return argv[:1] + tokens + argv[1:]


def run(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        if argv and not argv[0].startswith("-"):
            argv = _apply_config(argv)
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    config = {key: (str(value) if isinstance(value, WindowDescriptor) else value)
              for key, value in vars(args).items()
              if key not in ("func",) and not callable(value)}
    try:
        results, code = args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    passed = None if code == 0 and args.command in ("simulate", "version") else code == 0
    _emit(_summary(args.command, config, results, passed), getattr(args, "out", None))
    return code


def main() -> None:
    raise SystemExit(run())


if __name__ == "__main__":
    main()
