"""Command-line harness: build systems, verify invariants, run experiments.

Exit codes: 0 success, 1 invariant failure, 2 configuration violation.
All CSV output is deterministic for a fixed config and seed: grid cells are
computed in a thread pool (capped by QUARKLET_THREADS) but written in
sorted key order with locale-free formatting.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from . import __version__
from .algebra import SplineParams, cardinal_bspline, cardinal_quark, linear_combination
from .errors import QuarkletError
from .expansion import TruncationSpec, gram_matrix, quarklet_norm_estimate, sample_matrix
from .interval import BoundaryCondition, IntervalSystem, schoenberg_bspline
from .oracle import OracleParams, hsr_norm_oracle, resolve_function
from .seqnorm import CoefficientField, NormParams, seq_norm_1d, weight
from .shiftinv import Mask, cdf_filters
from .tensor import _check_moment_hypothesis, bivariate_norm_estimate

EXIT_OK = 0
EXIT_INVARIANT = 1
EXIT_CONFIG = 2


# ---------------------------------------------------------------------------
# configuration


@dataclass
class ExperimentConfig:
    command: str
    m: int
    m_tilde: int
    j0: int | None
    sigma: tuple
    sigma1: tuple
    sigma2: tuple
    s_values: tuple
    r_values: tuple
    delta1: float
    delta2: float
    jmax: int | None
    pmax: int
    rank: int
    fn: str
    mode: str
    seed: int
    out: str | None
    svg: str | None
    elements: bool = False
    corrupt_filter: bool = False

    def spline_params(self) -> SplineParams:
        return SplineParams(self.m, self.m_tilde, self.j0)

    def hash(self) -> str:
        payload = {
            k: v
            for k, v in asdict(self).items()
            if k not in ("out", "svg", "elements", "corrupt_filter")
        }
        blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def _parse_pair(text, flag):
    parts = str(text).split(",")
    if len(parts) != 2:
        raise QuarkletError(f"{flag} expects two comma-separated integers, got {text!r}")
    try:
        return tuple(int(p) for p in parts)
    except ValueError:
        raise QuarkletError(f"{flag} expects integers, got {text!r}") from None


def _parse_floats(text, flag):
    try:
        return tuple(float(p) for p in str(text).split(","))
    except ValueError:
        raise QuarkletError(f"{flag} expects a comma list of numbers, got {text!r}") from None


def _resolve_config(args) -> ExperimentConfig:
    file_cfg = {}
    if args.config:
        try:
            with open(args.config) as fh:
                file_cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as e:
            raise QuarkletError(f"cannot read config file {args.config}: {e}") from None
        if not isinstance(file_cfg, dict):
            raise QuarkletError(f"config file {args.config} must hold a JSON object")

    def pick(name, default):
        flag = getattr(args, name, None)
        if flag is not None:
            return flag
        if name in file_cfg:
            return file_cfg[name]
        return default

    command = args.command
    default_fn = "sinpi*sinpi" if command == "norms2d" else "sinpi"
    return ExperimentConfig(
        command=command,
        m=int(pick("m", 3)),
        m_tilde=int(pick("mtilde", 3)),
        j0=pick("j0", None),
        sigma=_parse_pair(pick("sigma", "0,0"), "--sigma"),
        sigma1=_parse_pair(pick("sigma1", "0,0"), "--sigma1"),
        sigma2=_parse_pair(pick("sigma2", "0,0"), "--sigma2"),
        s_values=_parse_floats(pick("s", "0.5"), "--s"),
        r_values=_parse_floats(pick("r", "2"), "--r"),
        delta1=float(pick("delta1", 1.5)),
        delta2=float(pick("delta2", 1.5)),
        jmax=pick("jmax", None),
        pmax=int(pick("pmax", 0)),
        rank=int(pick("rank", 2)),
        fn=str(pick("fn", default_fn)),
        mode=str(pick("mode", "strict")),
        seed=int(pick("seed", 0)),
        out=pick("out", None),
        svg=pick("svg", None),
        elements=bool(getattr(args, "elements", False)),
        corrupt_filter=bool(getattr(args, "corrupt_filter", False)),
    )


def _thread_count() -> int:
    env = os.environ.get("QUARKLET_THREADS", "").strip()
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise QuarkletError(f"QUARKLET_THREADS must be an integer, got {env!r}") from None
    return min(8, os.cpu_count() or 1)


def _run_pool(tasks: dict):
    """Evaluate {key: thunk} concurrently; values are ('ok', result) or
    ('error', exception name).  Key order of the result dict is the input
    order, independent of completion order."""

    def call(thunk):
        try:
            return ("ok", thunk())
        except Exception as e:
            return ("error", type(e).__name__)

    workers = min(_thread_count(), max(1, len(tasks)))
    if workers == 1:
        return {key: call(thunk) for key, thunk in tasks.items()}
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = {key: pool.submit(call, thunk) for key, thunk in tasks.items()}
        return {key: fut.result() for key, fut in futures.items()}


# ---------------------------------------------------------------------------
# output helpers


def _fmt(x) -> str:
    return f"{float(x):.12g}"


def _write_text(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    with open(path, "w", newline="") as fh:
        fh.write(text)


def _csv_text(config: ExperimentConfig, header: str, rows: list) -> str:
    lines = [
        f"# quarklets {__version__} config={config.hash()} "
        f"mode={config.mode} seed={config.seed}",
        header,
    ]
    lines.extend(",".join(row) for row in rows)
    return "\n".join(lines) + "\n"


_SVG_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _svg_chart(series, title: str) -> str:
    """Minimal line chart of ratio against level; no plotting dependency."""
    width, height = 640, 400
    left, right, top, bottom = 60, 160, 40, 50
    pts = [p for _, data in series for p in data]
    if not pts:
        xs_lo, xs_hi, ys_hi = 0.0, 1.0, 1.0
    else:
        xs_lo = min(p[0] for p in pts)
        xs_hi = max(p[0] for p in pts)
        ys_hi = max(max(p[1] for p in pts), 1e-12)
    if xs_hi == xs_lo:
        xs_hi = xs_lo + 1.0
    ys_hi *= 1.1

    def sx(x):
        return left + (x - xs_lo) / (xs_hi - xs_lo) * (width - left - right)

    def sy(y):
        return height - bottom - y / ys_hi * (height - top - bottom)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{left}" y="24" font-family="monospace" font-size="14">{title}</text>',
        f'<line x1="{left}" y1="{height - bottom}" x2="{width - right}" '
        f'y2="{height - bottom}" stroke="black"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{height - bottom}" stroke="black"/>',
    ]
    for i in range(int(xs_lo), int(xs_hi) + 1):
        parts.append(
            f'<text x="{sx(i):.1f}" y="{height - bottom + 18}" font-family="monospace" '
            f'font-size="11" text-anchor="middle">{i}</text>'
        )
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        y = frac * ys_hi
        parts.append(
            f'<text x="{left - 6}" y="{sy(y):.1f}" font-family="monospace" font-size="11" '
            f'text-anchor="end">{y:.2f}</text>'
        )
    for i, (label, data) in enumerate(series):
        color = _SVG_COLORS[i % len(_SVG_COLORS)]
        if data:
            coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in data)
            parts.append(f'<polyline points="{coords}" fill="none" stroke="{color}"/>')
        parts.append(
            f'<text x="{width - right + 8}" y="{top + 14 * (i + 1)}" '
            f'font-family="monospace" font-size="11" fill="{color}">{label}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


# ---------------------------------------------------------------------------
# build


def cmd_build(config: ExperimentConfig) -> int:
    params = config.spline_params()
    sigma = BoundaryCondition(*config.sigma)
    system = IntervalSystem(params, sigma)
    j0 = params.j0
    top = config.jmax if config.jmax is not None else j0 + 4
    sl = 1 if sigma.sigma_l else 0
    sr = 1 if sigma.sigma_r else 0
    levels = []
    identity_ok = True
    for j in range(j0, top + 1):
        delta = len(system.delta(j))
        nabla = len(system.nabla(j))
        ok = delta == 2**j - 1 + params.m - sl - sr
        identity_ok = identity_ok and ok
        levels.append(
            {"j": j, "delta": delta, "nabla": nabla, "delta_identity": ok}
        )
    summary = {
        "version": __version__,
        "m": params.m,
        "m_tilde": params.m_tilde,
        "j0": j0,
        "sigma": list(sigma),
        "quark_level_count": len(system.nabla(j0 - 1)),
        "levels": levels,
    }
    if config.elements:
        for k in system.nabla(j0 - 1):
            for p in range(config.pmax + 1):
                system.element((p, j0 - 1, k))
        summary["elements"] = json.loads(system.to_json())
    _write_text(config.out, json.dumps(summary, indent=2) + "\n")
    return EXIT_OK if identity_ok else EXIT_INVARIANT


# ---------------------------------------------------------------------------
# verify


def _check_cardinal_partition() -> float:
    worst = 0.0
    for m in range(2, 6):
        N = cardinal_bspline(m)
        xs = np.linspace(0.0, 1.0, 257, endpoint=False)
        total = sum(N(xs - k) for k in range(1 - m, 1))
        worst = max(worst, float(np.max(np.abs(total - 1.0))))
    return worst


def _check_derivative_identity() -> float:
    worst = 0.0
    for m in range(3, 6):
        Nm = cardinal_bspline(m)
        Nm1 = cardinal_bspline(m - 1)
        xs = (np.arange(400) + 0.5) * m / 400.0
        lhs = Nm.derivative()(xs)
        rhs = Nm1(xs) - Nm1(xs - 1.0)
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst


def _check_filter_biorthogonality(params: SplineParams) -> float:
    filters = cdf_filters(params)
    worst = 0.0
    for n in range(-(params.m + params.m_tilde), params.m + params.m_tilde + 1):
        acc = sum(w * filters.dual[k + 2 * n] for k, w in filters.primal.items())
        target = 2.0 if n == 0 else 0.0
        worst = max(worst, abs(acc - target))
    return worst


def _check_schoenberg_partition(params: SplineParams) -> float:
    worst = 0.0
    xs = np.linspace(0.0, 1.0, 201, endpoint=False)
    for j in range(params.j0, params.j0 + 3):
        total = np.zeros_like(xs)
        for k in range(-params.m + 1, 2**j):
            total += schoenberg_bspline(params, j, k)(xs)
        worst = max(worst, float(np.max(np.abs(total - 1.0))))
    return worst


def _shift_quarklet_from_filter(params: SplineParams, p: int, corrupt: bool):
    mask = cdf_filters(params).wavelet
    if corrupt:
        taps = list(mask.taps)
        taps[len(taps) // 2] += 1e-3
        mask = Mask(mask.offset, tuple(taps))
    quark = cardinal_quark(params, p)
    return linear_combination([(w, quark.scale_shift(1, k)) for k, w in mask.items()])


def _check_quarklet_moments(params: SplineParams, pmax: int, corrupt: bool) -> float:
    worst = 0.0
    for p in range(max(pmax, 2) + 1):
        psi = _shift_quarklet_from_filter(params, p, corrupt)
        scale = psi.l2_norm()
        for q in range(params.m_tilde):
            worst = max(worst, abs(psi.moment(q)) / scale)
    return worst


def _check_boundary_moments(system: IntervalSystem, pmax: int) -> float:
    j0 = system.params.j0
    worst = 0.0
    for k in system.nabla(j0):
        for p in range(max(pmax, 1) + 1):
            el = system.element((p, j0, k))
            scale = el.l2_norm()
            for q in range(system.params.m_tilde):
                worst = max(worst, abs(el.moment(q)) / scale)
    return worst


def _check_cardinalities(params: SplineParams) -> int:
    mismatches = 0
    for sig_l in (0, 1):
        for sig_r in (0, 1):
            system = IntervalSystem(params, BoundaryCondition(sig_l, sig_r))
            for j in range(params.j0, params.j0 + 5):
                expected = 2**j - 1 + params.m - sig_l - sig_r
                if len(system.delta(j)) != expected:
                    mismatches += 1
                if len(system.nabla(j)) != 2**j - sig_l - sig_r:
                    mismatches += 1
    return mismatches


def _check_single_entry_norm(params: SplineParams) -> float:
    j = params.j0
    worst = 0.0
    for r in (1.5, 2.0, 3.0):
        np_ = NormParams(0.75, r, 1.5, params.m)
        field = CoefficientField({(1, j, 2): 1.0})
        got = seq_norm_1d(field, np_)
        expect = weight(1, j, np_) ** 0.5 * 2.0 ** (-j / r)
        worst = max(worst, abs(got - expect) / expect)
    return worst


def cmd_verify(config: ExperimentConfig) -> int:
    params = config.spline_params()
    system = IntervalSystem(params, BoundaryCondition(*config.sigma))
    checks = [
        ("cardinal_partition_of_unity", _check_cardinal_partition(), 1e-12),
        ("bspline_derivative_identity", _check_derivative_identity(), 1e-12),
        ("filter_biorthogonality", _check_filter_biorthogonality(params), 1e-12),
        ("schoenberg_partition_of_unity", _check_schoenberg_partition(params), 1e-12),
        (
            "quarklet_vanishing_moments",
            _check_quarklet_moments(params, config.pmax, config.corrupt_filter),
            1e-10,
        ),
        ("boundary_vanishing_moments", _check_boundary_moments(system, config.pmax), 1e-10),
        ("index_cardinality_mismatches", float(_check_cardinalities(params)), 0.0),
        ("sequence_norm_single_entry", _check_single_entry_norm(params), 1e-12),
    ]
    entries = [
        {"name": name, "measured": measured, "bound": bound, "passed": measured <= bound}
        for name, measured, bound in checks
    ]
    all_passed = all(e["passed"] for e in entries)
    report = {
        "version": __version__,
        "m": params.m,
        "m_tilde": params.m_tilde,
        "j0": params.j0,
        "sigma": list(config.sigma),
        "corrupt_filter": config.corrupt_filter,
        "invariants": entries,
        "passed": all_passed,
    }
    _write_text(config.out, json.dumps(report, indent=2) + "\n")
    return EXIT_OK if all_passed else EXIT_INVARIANT


# ---------------------------------------------------------------------------
# norm experiments


def _cells(result, ratio_partner=None):
    """CSV cells for one computed quantity (value or error marker)."""
    status, payload = result
    if status == "ok":
        return _fmt(payload)
    return f"error[{payload}]"


def _ratio_cell(est, orc):
    if est[0] == "error":
        return f"error[{est[1]}]"
    if orc[0] == "error":
        return f"error[{orc[1]}]"
    return _fmt(est[1] / orc[1])


def cmd_norms_1d(config: ExperimentConfig) -> int:
    params = config.spline_params()
    sigma = BoundaryCondition(*config.sigma)
    system = IntervalSystem(params, sigma)
    f, dim = resolve_function(config.fn)
    if dim != 1:
        raise QuarkletError(
            f"function {config.fn!r} is bivariate; norms1d needs a univariate one"
        )
    j0 = params.j0
    jmax = config.jmax if config.jmax is not None else j0 + 3
    if jmax <= j0:
        raise QuarkletError(f"jmax must exceed j0={j0}, got {jmax}")
    # Configuration violations are refused before any cell runs.
    for s in config.s_values:
        for r in config.r_values:
            NormParams(s, r, config.delta1, params.m).check_smoothness_range()
            sigma.check_smoothness_bound(s, r)
            OracleParams(s, r)

    if config.pmax == 0:
        for J in range(j0 + 1, jmax + 1):
            spec = TruncationSpec(J)
            gram_matrix(system, spec)
            sample_matrix(system, spec)

    tasks = {}
    for s in config.s_values:
        for r in config.r_values:
            tasks[("oracle", s, r)] = (
                lambda s=s, r=r: hsr_norm_oracle(f, OracleParams(s, r))
            )
            for J in range(j0 + 1, jmax + 1):
                tasks[("est", J, s, r)] = (
                    lambda J=J, s=s, r=r: quarklet_norm_estimate(
                        system,
                        f,
                        TruncationSpec(J, P=config.pmax),
                        NormParams(s, r, config.delta1, params.m),
                    )
                )
    results = _run_pool(tasks)

    rows = []
    series = {}
    for J in range(j0 + 1, jmax + 1):
        for s in config.s_values:
            for r in config.r_values:
                est = results[("est", J, s, r)]
                orc = results[("oracle", s, r)]
                rows.append(
                    [
                        str(J),
                        str(config.pmax),
                        _fmt(s),
                        _fmt(r),
                        _cells(est),
                        _cells(orc),
                        _ratio_cell(est, orc),
                    ]
                )
                if est[0] == "ok" and orc[0] == "ok":
                    label = f"s={_fmt(s)} r={_fmt(r)}"
                    series.setdefault(label, []).append((J, est[1] / orc[1]))
    text = _csv_text(config, "J,p_max,s,r,estimate,oracle,ratio", rows)
    _write_text(config.out, text)
    if config.svg:
        chart = _svg_chart(sorted(series.items()), f"estimate/oracle ratio, fn={config.fn}")
        _write_text(config.svg, chart)
    return EXIT_OK


def cmd_norms_2d(config: ExperimentConfig) -> int:
    params = config.spline_params()
    sys1 = IntervalSystem(params, BoundaryCondition(*config.sigma1))
    sys2 = IntervalSystem(params, BoundaryCondition(*config.sigma2))
    f, dim = resolve_function(config.fn)
    if dim != 2:
        raise QuarkletError(
            f"function {config.fn!r} is univariate; norms2d needs a tensor one "
            f"(join two names with '*')"
        )
    if config.rank < 1:
        raise QuarkletError(f"rank must satisfy R >= 1, got {config.rank}")
    j0 = params.j0
    jmax = config.jmax if config.jmax is not None else j0 + 2
    if jmax <= j0:
        raise QuarkletError(f"jmax must exceed j0={j0}, got {jmax}")
    for s in config.s_values:
        for r in config.r_values:
            NormParams(s, r, config.delta1, params.m).check_smoothness_range()
            OracleParams(s, r, d=2)
    _check_moment_hypothesis(params, config.mode)

    for J in range(j0 + 1, jmax + 1):
        spec = TruncationSpec(J)
        for system in (sys1, sys2):
            gram_matrix(system, spec)
            sample_matrix(system, spec)

    tasks = {}
    for s in config.s_values:
        for r in config.r_values:
            tasks[("oracle", s, r)] = (
                lambda s=s, r=r: hsr_norm_oracle(f, OracleParams(s, r, d=2, grid_level=8))
            )
            for J in range(j0 + 1, jmax + 1):
                for R in range(1, config.rank + 1):
                    tasks[("est", J, R, s, r)] = (
                        lambda J=J, R=R, s=s, r=r: bivariate_norm_estimate(
                            f,
                            sys1,
                            sys2,
                            TruncationSpec(J),
                            TruncationSpec(J),
                            s,
                            r,
                            config.delta1,
                            config.delta2,
                            R,
                            mode=config.mode,
                        )
                    )
    with warnings.catch_warnings():
        warnings.simplefilter("once", RuntimeWarning)
        results = _run_pool(tasks)

    rows = []
    series = {}
    for J in range(j0 + 1, jmax + 1):
        for R in range(1, config.rank + 1):
            for s in config.s_values:
                for r in config.r_values:
                    est = results[("est", J, R, s, r)]
                    orc = results[("oracle", s, r)]
                    rows.append(
                        [
                            str(J),
                            str(R),
                            _fmt(s),
                            _fmt(r),
                            _cells(est),
                            _cells(orc),
                            _ratio_cell(est, orc),
                            config.mode,
                        ]
                    )
                    if est[0] == "ok" and orc[0] == "ok":
                        label = f"R={R} s={_fmt(s)} r={_fmt(r)}"
                        series.setdefault(label, []).append((J, est[1] / orc[1]))
    text = _csv_text(config, "J,R,s,r,estimate,oracle,ratio,mode", rows)
    _write_text(config.out, text)
    if config.svg:
        chart = _svg_chart(sorted(series.items()), f"estimate/oracle ratio, fn={config.fn}")
        _write_text(config.svg, chart)
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--m", type=int, help="primal spline order")
    common.add_argument("--mtilde", type=int, help="dual order (m + mtilde even)")
    common.add_argument("--j0", type=int, help="coarsest level override")
    common.add_argument("--sigma", metavar="L,R", help="1D boundary condition orders")
    common.add_argument("--sigma1", metavar="L,R", help="2D direction-1 boundary orders")
    common.add_argument("--sigma2", metavar="L,R", help="2D direction-2 boundary orders")
    common.add_argument("--s", help="comma list of smoothness values")
    common.add_argument("--r", help="comma list of integrability values")
    common.add_argument("--delta1", type=float, help="weight exponent, direction 1")
    common.add_argument("--delta2", type=float, help="weight exponent, direction 2")
    common.add_argument("--jmax", type=int, help="finest truncation level")
    common.add_argument("--pmax", type=int, help="maximal polynomial degree")
    common.add_argument("--rank", type=int, help="tensor rank budget")
    common.add_argument("--fn", help="test function name (tensor names join with '*')")
    common.add_argument("--mode", choices=("strict", "exploratory"))
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--seed", type=int, help="seed recorded in output")
    common.add_argument("--config", help="JSON file with flag defaults")
    common.add_argument("--svg", help="write a ratio-vs-level SVG chart to this path")

    parser = argparse.ArgumentParser(
        prog="quarklet",
        description="Boundary-adapted quarklet frames: build, verify, and norm experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    build = sub.add_parser("build", parents=[common], help="system summary JSON")
    build.add_argument("--elements", action="store_true", help="serialize quark-level elements")
    verify = sub.add_parser("verify", parents=[common], help="invariant suite JSON report")
    verify.add_argument("--corrupt-filter", action="store_true", help=argparse.SUPPRESS)
    sub.add_parser("norms1d", parents=[common], help="1D norm-equivalence CSV")
    sub.add_parser("norms2d", parents=[common], help="2D norm-equivalence CSV")
    return parser


_COMMANDS = {
    "build": cmd_build,
    "verify": cmd_verify,
    "norms1d": cmd_norms_1d,
    "norms2d": cmd_norms_2d,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = _resolve_config(args)
        return _COMMANDS[args.command](config)
    except QuarkletError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
