"""
Command Line Interface
Wires ingest, deflation, window analysis and simulation into the
trend-durations commands
"""

import argparse
import logging
import sys
import time
from datetime import date
from pathlib import Path
from typing import List, Optional

import pandas as pd
from pydantic import ValidationError

from models.models import (
    CensorPolicy, Direction, GeometricModel, GrwParams, McConfig, PriceSeries, RunConfig,
    WaitingTimeSample, WindowSpec
)
from src import emh, gof, window
from src.data_access import get_data_access
from src.errors import DomainError, TrendAnalysisError, UsageError
from src.geom import estimate_theta_from_signs
from src.ingest import deflate, format_prices_csv
from src.trends import bernoulli_band, signs
from src.utils import get_setting

logger = logging.getLogger(__name__)

# skipped share above which an analysis run is reported as degenerate
MAX_SKIPPED_SHARE = 0.5
# smallest sample the pipeline calibration replays (McConfig.n_points floor)
MIN_PIPELINE_POINTS = 50


def _fmt(value: float) -> str:
    return f"{value:.12g}"


def _option(value, key: str, default):
    """Command-line value, else config.yaml, else the built-in default"""
    return value if value is not None else get_setting(key, default)


def _require_seed(args: argparse.Namespace) -> int:
    if args.seed is None:
        raise UsageError(f"'{args.command}' draws random numbers and needs an explicit --seed")
    return args.seed


def _window_spec(args: argparse.Namespace) -> WindowSpec:
    return WindowSpec(
        length=_option(args.window, "window.length", 1000),
        step=_option(args.step, "window.step", 1),
    )


def _mc_config(args: argparse.Namespace, seed: int, n_points: Optional[int] = None) -> McConfig:
    return McConfig(
        m_replicates=_option(args.replicates, "monte_carlo.replicates", 999),
        n_points=n_points or _option(args.points, "monte_carlo.points", 500),
        min_expected=_option(args.min_expected, "monte_carlo.min_expected", 5.0),
        master_seed=seed,
        censor_policy=CensorPolicy(get_setting("monte_carlo.censor_policy", CensorPolicy.DISCARD.value)),
        replicate_block=get_setting("monte_carlo.replicate_block", 1000),
    )


def _out_dir(args: argparse.Namespace) -> Path:
    return Path(args.out_dir or ".")


def _load_prices(args: argparse.Namespace) -> PriceSeries:
    """Read the price file, deflating it first when a CPI file is given"""
    data_access = get_data_access()
    prices = data_access.read_prices(args.prices, _option(args.label, "ingest.label", "INDEX"))
    if getattr(args, "cpi", None):
        cpi = data_access.read_cpi(args.cpi)
        base_date = args.base_date or _parse_date_setting("ingest.base_date")
        try:
            prices = deflate(prices, cpi, base_date)
        except TrendAnalysisError as e:
            e.source = e.source or args.cpi
            raise
    return prices


def _parse_date_setting(key: str) -> Optional[date]:
    value = get_setting(key)
    if value is None or isinstance(value, date):
        return value
    return date.fromisoformat(str(value))


# ============================================================================
# Commands
# ============================================================================

def cmd_deflate(args: argparse.Namespace) -> int:
    """Write prices in constant money as a Date,Close CSV"""
    prices = _load_prices(args)
    path = Path(args.output) if args.output else _out_dir(args) / "deflated.csv"
    get_data_access().write_text(path, format_prices_csv(prices))
    print(f"Wrote {len(prices)} rows to {path}")
    return 0


def cmd_analyze(args: argparse.Namespace) -> int:
    """Sliding-window scan: report, per-direction results, yearly summary and optional histograms"""
    seed = _require_seed(args)
    run = RunConfig(
        prices_path=args.prices,
        cpi_path=args.cpi,
        base_date=args.base_date,
        window=_window_spec(args),
        monte_carlo=_mc_config(args, seed),
        out_dir=str(_out_dir(args)),
        threads=args.threads or 1,
        histograms=args.histograms,
    )
    prices = _load_prices(args)

    started = time.perf_counter()
    reports = window.analyze_series(prices, run.window, run.monte_carlo, threads=run.threads)
    elapsed = time.perf_counter() - started

    data_access = get_data_access()
    out_dir = Path(run.out_dir)
    data_access.write_frame(out_dir / "report.csv", window.reports_frame(reports))
    data_access.write_frame(out_dir / "results.csv", window.window_results_frame(reports))
    data_access.write_frame(out_dir / "yearly_summary.csv", window.summarize_by_year(reports))
    if run.histograms:
        written = window.write_histograms(reports, out_dir / "histograms")
        logger.info("Wrote %d histogram files", len(written))

    counts = window.report_counts(reports)
    print(
        f"{prices.label}: {counts['windows']} windows, {counts['analyzed']} analyzed, "
        f"{counts['skipped']} skipped in {elapsed:.1f}s"
    )
    if window.skipped_share(reports) > MAX_SKIPPED_SHARE:
        print(
            f"error: {counts['skipped']} of {counts['windows']} windows were degenerate",
            file=sys.stderr,
        )
        return 3
    return 0


def cmd_upratio(args: argparse.Namespace) -> int:
    """Up-ratio series with its constant Bernoulli band"""
    prices = _load_prices(args)
    spec = _window_spec(args)
    z = _option(args.z, "upratio.z", 3.0)
    if z < 0:
        raise DomainError(f"band width z must be non-negative, got {z}")
    band = bernoulli_band(spec.length, z)
    series = window.up_ratio_series(prices, spec)
    frame = pd.DataFrame({
        "start_date": [d.isoformat() for d, _ in series],
        "up_ratio": [r for _, r in series],
        "band_low": 0.5 - band,
        "band_high": 0.5 + band,
    })
    path = Path(args.output) if args.output else _out_dir(args) / "upratio.csv"
    get_data_access().write_frame(path, frame)
    print(f"Wrote {len(frame)} windows to {path} (band 0.5 +/- {_fmt(band)})")
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    """Synthetic Date,Close CSV from the efficient-market random walk"""
    seed = _require_seed(args)
    t_max = _option(args.t_max, "simulate.t_max", 3000)
    if t_max < 2:
        raise DomainError(f"t_max must be at least 2, got {t_max}")
    params = GrwParams(
        s0=_option(args.s0, "simulate.s0", 100.0),
        sigma=_option(args.sigma, "simulate.sigma", 0.01),
        r_f=_option(args.r_f, "simulate.r_f", 0.0),
        t_max=t_max,
    )
    if args.persistence is None:
        prices = emh.simulate_grw(params, seed)
    else:
        prices = emh.simulate_persistent_walk(params, args.persistence, seed)
    path = Path(args.output) if args.output else _out_dir(args) / "simulated.csv"
    get_data_access().write_text(path, format_prices_csv(prices))
    print(f"Wrote {len(prices)} rows to {path}")
    return 0


def cmd_gof(args: argparse.Namespace) -> int:
    """Anderson-Darling test of one duration sample against the geometric law"""
    seed = _require_seed(args)
    durations = get_data_access().read_durations(args.durations)
    n = int(durations.size)
    direction = Direction(args.direction)
    sample = WaitingTimeSample.from_durations(direction, durations)

    if args.theta is not None:
        model = GeometricModel(theta=args.theta)
        cfg = _mc_config(args, seed)
        a2 = gof.ad_statistic(sample, gof.build_cells(model, n, cfg.min_expected))
        result = gof.mc_pi_value_iid(model, n, a2, cfg, direction=direction)
    elif args.signs_from:
        sign_series = signs(get_data_access().read_prices(args.signs_from, "SIGNS"))
        model = estimate_theta_from_signs(sign_series, direction)
        if n >= MIN_PIPELINE_POINTS:
            cfg = _mc_config(args, seed, n_points=n)
            a2 = gof.ad_statistic(sample, gof.build_cells(model, n, cfg.min_expected))
            result = gof.mc_pi_value(len(sign_series), model.theta, direction, a2, cfg)
        else:
            logger.warning("Only %d durations; calibrating with i.i.d. geometric replicates", n)
            cfg = _mc_config(args, seed)
            a2 = gof.ad_statistic(sample, gof.build_cells(model, n, cfg.min_expected))
            result = gof.mc_pi_value_iid(model, n, a2, cfg, direction=direction)
    else:
        raise UsageError("gof needs --theta or --signs-from")

    print(
        f"a2={_fmt(result.a2)} pi_value={_fmt(result.pi_value)} n={result.n} "
        f"theta={_fmt(result.theta_hat)} seed={result.seed} M={result.m_replicates}"
    )
    return 0


# ============================================================================
# Parser
# ============================================================================

def _global_flags() -> argparse.ArgumentParser:
    """Flags shared by every command; None means 'take it from config.yaml'"""
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--seed", type=int, help="Master seed (required by analyze, simulate and gof)")
    parent.add_argument("--threads", type=int, help="Worker processes for the window scan")
    parent.add_argument("--window", type=int, help="Window length in trading days")
    parent.add_argument("--step", type=int, help="Window step in trading days")
    parent.add_argument("--points", type=int, help="Random points drawn per window")
    parent.add_argument("--replicates", type=int, help="Monte Carlo replicates M")
    parent.add_argument("--min-expected", dest="min_expected", type=float, help="Minimum expected count of the tail cell")
    parent.add_argument("--out-dir", dest="out_dir", help="Directory for output files")
    parent.add_argument("--config", help="Alternative config.yaml")
    parent.add_argument("--log-level", dest="log_level", help="DEBUG, INFO, WARNING or ERROR")
    return parent


def _add_price_inputs(parser: argparse.ArgumentParser, cpi_required: bool = False) -> None:
    parser.add_argument("--prices", required=True, help="Daily price CSV (Yahoo or Date,Close layout)")
    parser.add_argument("--cpi", required=cpi_required, help="Monthly CPI CSV; deflates the prices first")
    parser.add_argument("--base-date", dest="base_date", type=date.fromisoformat, help="Constant-money base date")
    parser.add_argument("--label", help="Series label")


def build_parser() -> argparse.ArgumentParser:
    parent = _global_flags()
    parser = argparse.ArgumentParser(
        prog="trend-durations",
        description="Test whether elemental price trend durations are memoryless",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    deflate_parser = commands.add_parser("deflate", parents=[parent], help="Express prices in constant money")
    _add_price_inputs(deflate_parser, cpi_required=True)
    deflate_parser.add_argument("--output", help="Output CSV (default <out-dir>/deflated.csv)")
    deflate_parser.set_defaults(handler=cmd_deflate)

    analyze_parser = commands.add_parser("analyze", parents=[parent], help="Sliding-window Anderson-Darling scan")
    _add_price_inputs(analyze_parser)
    analyze_parser.add_argument("--histograms", action="store_true", help="Write per-window histogram CSVs")
    analyze_parser.set_defaults(handler=cmd_analyze)

    upratio_parser = commands.add_parser("upratio", parents=[parent], help="Share of up days per window")
    _add_price_inputs(upratio_parser)
    upratio_parser.add_argument("--z", type=float, help="Band half-width in binomial standard errors")
    upratio_parser.add_argument("--output", help="Output CSV (default <out-dir>/upratio.csv)")
    upratio_parser.set_defaults(handler=cmd_upratio)

    simulate_parser = commands.add_parser("simulate", parents=[parent], help="Simulate a geometric random walk")
    simulate_parser.add_argument("--sigma", type=float, help="Daily log-step standard deviation")
    simulate_parser.add_argument("--r-f", dest="r_f", type=float, help="Risk-free rate per day")
    simulate_parser.add_argument("--s0", type=float, help="Initial price")
    simulate_parser.add_argument("--t-max", dest="t_max", type=int, help="Number of steps")
    simulate_parser.add_argument(
        "--persistence", type=float, help="Probability a sign repeats the previous one (omit for the random walk)"
    )
    simulate_parser.add_argument("--output", help="Output CSV (default <out-dir>/simulated.csv)")
    simulate_parser.set_defaults(handler=cmd_simulate)

    gof_parser = commands.add_parser("gof", parents=[parent], help="Test one duration sample")
    gof_parser.add_argument("--durations", required=True, help="One-column CSV of waiting times")
    gof_parser.add_argument("--theta", type=float, help="Known continuation probability")
    gof_parser.add_argument("--signs-from", dest="signs_from", help="Price CSV to estimate theta from")
    gof_parser.add_argument("--direction", choices=[d.value for d in Direction], default=Direction.UP.value)
    gof_parser.set_defaults(handler=cmd_gof)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Entry point; returns 0 on success, 2 on input errors, 3 on analysis degeneracy"""
    args = build_parser().parse_args(argv)
    try:
        if args.config:
            get_data_access(args.config)
        level = _option(args.log_level, "logging.level", "INFO")
        logging.basicConfig(level=str(level).upper(), format="%(asctime)s %(levelname)s %(name)s: %(message)s")
        return args.handler(args)
    except TrendAnalysisError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except ValidationError as e:
        details = "; ".join(f"{'.'.join(map(str, err['loc']))}: {err['msg']}" for err in e.errors())
        print(f"error: invalid parameters ({details})", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
