"""Command-line front-end.

Every command writes one machine-readable record (json by default, csv
on request) echoing its parameters and seed, so runs can be diffed in
CI.  Verification commands map their verdict onto the exit status:
0 holds, 2 fails, 3 inconclusive; usage and domain errors exit 1 with a
one-line diagnostic.  Passing --plot next to --out drops a rendered
figure beside the data file.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from .convex_measures import (
    Ball2,
    ProductMixtureMeasure,
    SlabIntersection,
    cube,
    strip,
)
from .entropy import EntropySpec, renyi_entropy, shannon_entropy
from .lpball import (
    HyperplaneSpec,
    cube_projection_volume,
    mean_width_projection,
    projection_volume,
    section_volume,
)
from .majorization import as_weight_vector
from .mixtures import (
    DiscreteScaleMixture,
    ExponentialPower,
    GaussianScale,
    SymmetricStable,
)
from .numerics import RandomStream, c_p, gamma_p
from .verify import (
    b_inequality_report,
    correlation_report,
    schur_compare,
    small_ball_report,
    spherical_correlation_report,
    strip_expansion_report,
)
from .weighted_sums import (
    BallUniformSpec,
    MomentSpec,
    ball_uniform_sample,
    khintchine_constants,
    weighted_moment,
)

_USAGE_EXIT = 1


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on bad flags; the contract here reserves 2 for
    a failed verification, so usage errors are remapped to 1."""

    def error(self, message):
        self.exit(_USAGE_EXIT, f"{self.prog}: error: {message}\n")


def _floats(text: str) -> tuple[float, ...]:
    try:
        parts = tuple(float(x) for x in text.split(",") if x.strip() != "")
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of "
                                         f"numbers: {text!r}")
    if not parts:
        raise argparse.ArgumentTypeError("empty number list")
    return parts


def _family(args):
    name = args.family
    if name == "gaussian":
        return GaussianScale(args.sigma)
    if name == "exp-power":
        return ExponentialPower(args.p)
    if name == "stable":
        return SymmetricStable(args.p)
    if args.sigmas is None or args.probs is None:
        raise ValueError("the discrete family needs --sigmas and --probs")
    return DiscreteScaleMixture(args.sigmas, args.probs)


def _unit_plane(a: tuple[float, ...], n: int | None) -> HyperplaneSpec:
    v = np.asarray(a, dtype=float)
    if n is not None and v.size != n:
        raise ValueError(f"--a has {v.size} entries, --n says {n}")
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        raise ValueError("--a must be a nonzero vector")
    return HyperplaneSpec(v / norm)


def _row(name: str, est) -> dict:
    return {"name": name, "value": float(est.value),
            "stderr": float(est.stderr), "n": int(est.n_samples)}


def _exact_row(name: str, value: float) -> dict:
    return {"name": name, "value": float(value), "stderr": 0.0, "n": 1}


_INTERNAL_KEYS = {"func", "command", "check", "seed", "format", "out",
                  "plot"}


def _payload(args, results: list[dict], verdict: str | None = None,
             margin: float | None = None) -> dict:
    name = args.command if args.command != "verify" \
        else f"verify {args.check}"
    params = {}
    for key, value in sorted(vars(args).items()):
        if key in _INTERNAL_KEYS:
            continue
        params[key.replace("_", "-")] = list(value) \
            if isinstance(value, tuple) else value
    record = {"command": name, "params": params, "results": results,
              "seed": args.seed}
    if verdict is not None:
        record["verdict"] = verdict
        record["margin"] = float(margin)
    return record


def _report_payload(args, report, results: list[dict]) -> tuple[dict, int]:
    payload = _payload(args, results, report.verdict, report.margin)
    payload["params"]["claim"] = report.claim
    return payload, report.exit_code


def _csv_rows(payload: dict) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["name", "value", "stderr", "n", "seed"])
    for row in payload["results"]:
        writer.writerow([row["name"], repr(row["value"]),
                         repr(row["stderr"]), row["n"], payload["seed"]])
    return buf.getvalue()


def _csv_points(points: np.ndarray) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow([f"x{i + 1}" for i in range(points.shape[1])])
    for point in points:
        writer.writerow([repr(float(x)) for x in point])
    return buf.getvalue()


def _emit(args, payload: dict, points: np.ndarray | None = None) -> None:
    if args.format == "csv":
        text = _csv_points(points) if points is not None \
            else _csv_rows(payload)
    else:
        text = json.dumps(payload, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    if args.plot:
        from . import plotting

        png = str(Path(args.out).with_suffix(".png"))
        if points is not None:
            plotting.render_points(points, png)
        else:
            plotting.render_results(payload, png)


# ---------------------------------------------------------------------------
# command handlers

def _cmd_constants(args) -> tuple[dict, np.ndarray | None, int]:
    family = _family(args)
    results = [_exact_row("gamma_p", gamma_p(args.moment))]
    if args.family == "exp-power":
        results.append(_exact_row("c_p", c_p(args.p)))
    lo, hi = khintchine_constants(family, args.moment)
    results.append(_exact_row("khintchine_lower", lo))
    results.append(_exact_row("khintchine_upper", hi))
    return _payload(args, results), None, 0


def _cmd_moment(args):
    spec = MomentSpec(_family(args), as_weight_vector(args.weights),
                      args.moment, args.method.replace("-", "_"))
    est = weighted_moment(spec, args.samples, RandomStream(args.seed, 0))
    return _payload(args, [_row("moment_norm", est)]), None, 0


def _cmd_entropy(args):
    spec = EntropySpec(_family(args), as_weight_vector(args.weights),
                       alpha=args.alpha, pool_size=args.pool,
                       n_samples=args.samples)
    stream = RandomStream(args.seed, 0)
    est = shannon_entropy(spec, stream) if args.alpha == 1.0 \
        else renyi_entropy(spec, stream)
    results = [_row("entropy", est), _exact_row("pool_bias", est.pool_bias)]
    return _payload(args, results), None, 0


def _cmd_section_volume(args):
    plane = _unit_plane(args.a, args.n)
    est = section_volume(args.q, plane, args.samples,
                         RandomStream(args.seed, 0))
    return _payload(args, [_row("section_volume", est)]), None, 0


def _cmd_projection_volume(args):
    plane = _unit_plane(args.a, args.n)
    if args.q == math.inf:
        value = cube_projection_volume(plane.dimension, plane)
        return _payload(args, [_exact_row("projection_volume", value)]), \
            None, 0
    est = projection_volume(args.q, plane, args.samples,
                            RandomStream(args.seed, 0))
    return _payload(args, [_row("projection_volume", est)]), None, 0


def _cmd_mean_width(args):
    plane = _unit_plane(args.a, args.n)
    est = mean_width_projection(args.qstar, plane, args.samples,
                                RandomStream(args.seed, 0))
    return _payload(args, [_row("mean_width", est)]), None, 0


def _cmd_ball_sample(args):
    spec = BallUniformSpec(args.q, args.n)
    points = ball_uniform_sample(spec, args.samples,
                                 RandomStream(args.seed, 0))
    results = []
    root_n = math.sqrt(points.shape[0])
    for i in range(args.n):
        col = np.abs(points[:, i])
        for label, vals in (("abs_mean", col), ("square_mean", col ** 2)):
            results.append({"name": f"{label}[x{i + 1}]",
                            "value": float(vals.mean()),
                            "stderr": float(vals.std(ddof=1)) / root_n,
                            "n": points.shape[0]})
    return _payload(args, results), points, 0


def _unit_scaled(values: tuple[float, ...]) -> tuple[float, ...]:
    v = np.asarray(values, dtype=float)
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        raise ValueError("weight vectors must be nonzero")
    return tuple(v / norm)


def _cmd_verify_schur(args):
    functional = args.functional.replace("-", "_")
    if functional == "laplace":
        functional = "laplace_functional"
    family = None
    if functional in ("moment", "shannon", "renyi"):
        family = _family(args)
    report = schur_compare(functional, _unit_scaled(args.a),
                           _unit_scaled(args.b), args.samples,
                           RandomStream(args.seed, 0), family=family,
                           p=args.moment, alpha=args.alpha, q=args.q,
                           lam=args.lam, pool_size=args.pool)
    results = [_row("value_a", report.estimates[0]),
               _row("value_b", report.estimates[1])]
    if report.rows:
        row = report.rows[0]
        spread = row.get("stderr", row.get("uncertainty", 0.0))
        results.append({"name": "diff", "value": float(row["diff"]),
                        "stderr": float(spread),
                        "n": report.estimates[0].n_samples})
    payload, code = _report_payload(args, report, results)
    return payload, None, code


def _grid_vectors(grid: tuple[float, ...], dim: int) -> list[np.ndarray]:
    """One scaling vector per axis and grid value, zero kept once."""
    vectors = []
    seen = set()
    for axis in range(dim):
        for value in grid:
            t = np.zeros(dim)
            t[axis] = value
            key = tuple(t)
            if key not in seen:
                seen.add(key)
                vectors.append(t)
    return vectors


def _body_from(args, dim: int):
    if args.body == "cube":
        return cube(dim, args.half_side)
    if dim != 2:
        raise ValueError("the rotated square needs --dim 2")
    rt = 2.0 ** -0.5
    return SlabIntersection(((np.array([rt, rt]), args.half_side),
                             (np.array([rt, -rt]), args.half_side)))


def _measure_from(args, dim: int) -> ProductMixtureMeasure:
    return ProductMixtureMeasure(tuple(_family(args) for _ in range(dim)))


def _cmd_verify_b_inequality(args):
    measure = _measure_from(args, args.dim)
    body = _body_from(args, args.dim)
    grid = _grid_vectors(args.grid, args.dim)
    report = b_inequality_report(measure, body, grid, args.samples,
                                 RandomStream(args.seed, 0))
    results = [_row(f"mass[t={','.join(f'{x:g}' for x in t)}]", est)
               for t, est in zip(grid, report.estimates)]
    for row in report.rows:
        left, right = row["pair"]
        name = (f"defect[{','.join(f'{x:g}' for x in left)}"
                f"|{','.join(f'{x:g}' for x in right)}]")
        results.append({"name": name, "value": float(row["defect"]),
                        "stderr": float(row["stderr"]),
                        "n": report.params["n_samples"]})
    payload, code = _report_payload(args, report, results)
    return payload, None, code


def _cmd_verify_correlation(args):
    measure = _measure_from(args, len(args.k_normal))
    body_k = strip(np.array(args.k_normal, dtype=float), args.k_bound)
    body_l = strip(np.array(args.l_normal, dtype=float), args.l_bound)
    report = correlation_report(measure, body_k, body_l, args.samples,
                                RandomStream(args.seed, 0))
    names = ("mass_intersection", "mass_k", "mass_l")
    results = [_row(name, est)
               for name, est in zip(names, report.estimates)]
    row = report.rows[0]
    results.append({"name": "excess", "value": float(row["diff"]),
                    "stderr": float(row["stderr"]),
                    "n": report.estimates[0].n_samples})
    payload, code = _report_payload(args, report, results)
    return payload, None, code


def _cmd_verify_strip(args):
    report = strip_expansion_report(args.p, args.delta)
    results = []
    for row in report.rows:
        tag = f"delta={row['delta']:g}"
        results.append(_exact_row(f"intersection[{tag}]",
                                  row["intersection"]))
        results.append(_exact_row(f"product[{tag}]", row["product"]))
        results.append(_exact_row(f"ratio[{tag}]", row["ratio"]))
    results.append(_exact_row("limit_ratio",
                              report.params["limit_ratio"]))
    payload, code = _report_payload(args, report, results)
    return payload, None, code


def _cmd_verify_small_ball(args):
    body = cube(args.dim, args.half_side)
    report = small_ball_report(body, list(args.grid), args.samples,
                               RandomStream(args.seed, 0))
    results = [_row("base_mass", report.estimates[0])]
    for row in report.rows:
        results.append({"name": f"mass[t={row['t']:g}]",
                        "value": float(row["mass"]),
                        "stderr": float(row["stderr"]),
                        "n": report.params["n_samples"]})
        results.append(_exact_row(f"bound[t={row['t']:g}]", row["bound"]))
    payload, code = _report_payload(args, report, results)
    return payload, None, code


def _cmd_verify_sphere(args):
    cap = Ball2(args.cap_radius, args.plane_dim)
    e1 = np.zeros(args.plane_dim)
    e1[0] = 1.0
    lune = strip(e1, args.lune_bound)
    report = spherical_correlation_report(cap, lune, args.samples,
                                          RandomStream(args.seed, 0))
    names = ("mass_intersection", "mass_cap", "mass_lune")
    results = [_row(name, est)
               for name, est in zip(names, report.estimates)]
    row = report.rows[0]
    results.append({"name": "excess", "value": float(row["diff"]),
                    "stderr": float(row["stderr"]),
                    "n": report.estimates[0].n_samples})
    payload, code = _report_payload(args, report, results)
    return payload, None, code


# ---------------------------------------------------------------------------
# parser assembly

def _add_common(parser, samples_default: int = 1_000_000) -> None:
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--samples", type=int, default=samples_default)
    parser.add_argument("--format", choices=("json", "csv"),
                        default="json")
    parser.add_argument("--out", default=None)
    parser.add_argument("--plot", action="store_true",
                        help="write a figure next to --out")


def _add_family(parser, default: str = "exp-power") -> None:
    parser.add_argument("--family",
                        choices=("gaussian", "exp-power", "stable",
                                 "discrete"),
                        default=default)
    parser.add_argument("--p", type=float, default=1.0,
                        help="family shape parameter")
    parser.add_argument("--sigma", type=float, default=1.0,
                        help="gaussian scale")
    parser.add_argument("--sigmas", type=_floats, default=None)
    parser.add_argument("--probs", type=_floats, default=None)


def build_parser() -> _Parser:
    parser = _Parser(prog="gaussmix",
                     description="Gaussian-mixture estimates and "
                                 "inequality verification")
    commands = parser.add_subparsers(dest="command", required=True)

    sp = commands.add_parser("constants",
                             help="closed-form constants, all exact")
    _add_common(sp)
    _add_family(sp)
    sp.add_argument("--moment", type=float, default=2.0,
                    help="moment order for the comparison constants")
    sp.set_defaults(func=_cmd_constants)

    sp = commands.add_parser("moment", help="p-norm of a weighted sum")
    _add_common(sp)
    _add_family(sp)
    sp.add_argument("--weights", type=_floats, required=True)
    sp.add_argument("--moment", type=float, required=True)
    sp.add_argument("--method",
                    choices=("reduced-mc", "direct-mc", "quadrature"),
                    default="reduced-mc")
    sp.set_defaults(func=_cmd_moment)

    sp = commands.add_parser("entropy",
                             help="Shannon or Renyi entropy of a "
                                  "weighted sum")
    _add_common(sp, samples_default=100_000)
    _add_family(sp)
    sp.add_argument("--weights", type=_floats, required=True)
    sp.add_argument("--alpha", type=float, default=1.0)
    sp.add_argument("--pool", type=int, default=1 << 15)
    sp.set_defaults(func=_cmd_entropy)

    sp = commands.add_parser("section-volume",
                             help="hyperplane section of the unit "
                                  "l_q ball")
    _add_common(sp)
    sp.add_argument("--q", type=float, required=True)
    sp.add_argument("--n", type=int, default=None)
    sp.add_argument("--a", type=_floats, required=True,
                    help="section normal, normalized internally")
    sp.set_defaults(func=_cmd_section_volume)

    sp = commands.add_parser("projection-volume",
                             help="hyperplane shadow of the unit "
                                  "l_q ball")
    _add_common(sp)
    sp.add_argument("--q", type=float, required=True,
                    help="ball exponent in (2, inf]; inf means the cube")
    sp.add_argument("--n", type=int, default=None)
    sp.add_argument("--a", type=_floats, required=True)
    sp.set_defaults(func=_cmd_projection_volume)

    sp = commands.add_parser("mean-width",
                             help="mean width of a projected l_q* ball")
    _add_common(sp)
    sp.add_argument("--qstar", type=float, required=True)
    sp.add_argument("--n", type=int, default=None)
    sp.add_argument("--a", type=_floats, required=True)
    sp.set_defaults(func=_cmd_mean_width)

    sp = commands.add_parser("ball-sample",
                             help="uniform draws from the unit l_q ball")
    _add_common(sp)
    sp.add_argument("--q", type=float, required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.set_defaults(func=_cmd_ball_sample)

    verify = commands.add_parser("verify",
                                 help="run one inequality check; exit "
                                      "0/2/3 for holds/fails/"
                                      "inconclusive")
    checks = verify.add_subparsers(dest="check", required=True)

    sp = checks.add_parser("schur", help="Schur comparison of a "
                                         "functional at two weight "
                                         "vectors")
    _add_common(sp)
    _add_family(sp)
    sp.add_argument("--functional",
                    choices=("moment", "shannon", "renyi",
                             "section-volume", "projection-volume",
                             "laplace"),
                    default="moment")
    sp.add_argument("--a", type=_floats, required=True,
                    help="weight vector, normalized internally")
    sp.add_argument("--b", type=_floats, required=True)
    sp.add_argument("--moment", type=float, default=3.0)
    sp.add_argument("--alpha", type=float, default=2.0)
    sp.add_argument("--q", type=float, default=1.0)
    sp.add_argument("--lam", type=float, default=1.0)
    sp.add_argument("--pool", type=int, default=4096)
    sp.set_defaults(func=_cmd_verify_schur)

    sp = checks.add_parser("b-inequality",
                           help="midpoint log-concavity under diagonal "
                                "scaling")
    _add_common(sp)
    _add_family(sp)
    sp.add_argument("--body", choices=("cube", "rotated-square"),
                    default="rotated-square")
    sp.add_argument("--half-side", type=float, default=1.0)
    sp.add_argument("--dim", type=int, default=2)
    sp.add_argument("--grid", type=_floats,
                    default=(-0.6, -0.3, 0.0, 0.3, 0.6),
                    help="per-axis exponents")
    sp.set_defaults(func=_cmd_verify_b_inequality)

    sp = checks.add_parser("correlation",
                           help="product-law correlation of two slabs")
    _add_common(sp)
    _add_family(sp)
    sp.add_argument("--k-normal", type=_floats, required=True)
    sp.add_argument("--k-bound", type=float, required=True)
    sp.add_argument("--l-normal", type=_floats, required=True)
    sp.add_argument("--l-bound", type=float, required=True)
    sp.set_defaults(func=_cmd_verify_correlation)

    sp = checks.add_parser("strip-counterexample",
                           help="diagonal strips by quadrature; fails "
                                "for p > 2")
    _add_common(sp)
    sp.add_argument("--p", type=float, default=4.0)
    sp.add_argument("--delta", type=float, default=0.01)
    sp.set_defaults(func=_cmd_verify_strip)

    sp = checks.add_parser("small-ball",
                           help="dilation decay of a small cube under "
                                "the two-sided exponential product")
    _add_common(sp)
    sp.add_argument("--half-side", type=float, default=1.3349,
                    help="cube half-side; default holds mass near 0.4")
    sp.add_argument("--dim", type=int, default=3)
    sp.add_argument("--grid", type=_floats,
                    default=(0.2, 0.4, 0.6, 0.8))
    sp.set_defaults(func=_cmd_verify_small_ball)

    sp = checks.add_parser("sphere-correlation",
                           help="hemisphere cap against a lune through "
                                "the central projection chart")
    _add_common(sp)
    sp.add_argument("--cap-radius", type=float, default=1.0)
    sp.add_argument("--lune-bound", type=float, default=0.8)
    sp.add_argument("--plane-dim", type=int, default=2)
    sp.set_defaults(func=_cmd_verify_sphere)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.plot and not args.out:
        sys.stderr.write("gaussmix: error: --plot needs --out\n")
        return _USAGE_EXIT
    try:
        payload, points, code = args.func(args)
        _emit(args, payload, points)
    except ValueError as exc:
        sys.stderr.write(f"gaussmix: error: {exc}\n")
        return _USAGE_EXIT
    return code


if __name__ == "__main__":
    sys.exit(main())
