"""Command-line entry point: ingest, backtest, report."""
from __future__ import annotations

import csv
import datetime as dt
import logging
import sys
from pathlib import Path

import click
import numpy as np

from . import ensemble as ens
from .config import RunConfig, load_config, snapshot_config
from .agents import AGENT_KINDS
from .env import EnvConfig
from .errors import RlfolioError
from .evaluation import (EquityCurve, metrics_report, run_index_baseline,
                         run_min_variance_baseline)
from .indicators import build_features
from .market_data import BAR_FIELDS, load_bars, build_window_plan
from .turbulence import rolling_turbulence

logger = logging.getLogger(__name__)

METRIC_NAMES = ("cumulative_return", "annual_return", "annual_volatility",
                "sharpe", "max_drawdown")
EXIT_USER_ERROR = 2


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(float(x))
    return str(x)


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _load_panel(cfg: RunConfig):
    return load_bars(cfg.data_path, schema=cfg.schema or None,
                     rejection_ceiling=cfg.rejection_ceiling,
                     delimiter=cfg.delimiter)


def _load_index_series(path: str) -> dict[dt.date, float]:
    series = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            series[dt.date.fromisoformat(row["date"])] = float(row["value"])
    return series


def _config_from_options(config_path, seed, out):
    overrides = {}
    if seed is not None:
        overrides["seed"] = seed
    if out is not None:
        overrides["out_dir"] = out
    return load_config(config_path, overrides)


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="debug logging")
def main(verbose):
    """Walk-forward ensemble backtesting of actor-critic trading agents."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(asctime)s %(name)s %(levelname)s %(message)s")


@main.command()
@click.option("--config", "config_path", required=True,
              type=click.Path(), help="run config file")
@click.option("--out", type=click.Path(), default=None,
              help="output directory override")
def ingest(config_path, out):
    """Load and align raw bars; persist the panel cache and the
    row-rejection report."""
    try:
        cfg = _config_from_options(config_path, None, out)
        panel, report = _load_panel(cfg)
    except (RlfolioError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_USER_ERROR)

    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    for t, date in enumerate(panel.calendar):
        for d, asset in enumerate(panel.assets):
            rows.append([date.isoformat(), asset] +
                        [panel.field(f)[t, d] for f in BAR_FIELDS])
    _write_csv(out_dir / "panel_cache.csv",
               ["date", "ticker", *BAR_FIELDS], rows)
    _write_csv(out_dir / "rejections.csv", ["line", "reason"],
               [[r.line, r.reason] for r in report.rejected])
    click.echo(f"panel: {panel.D} assets x {panel.T} dates; "
               f"{len(report.rejected)}/{report.total_rows} rows rejected")


def _write_strategy(out_dir: Path, name: str, curve: EquityCurve,
                    trades=None) -> None:
    _write_csv(out_dir / f"equity_{name}.csv", ["date", "value"],
               [[d.isoformat(), v] for d, v in zip(curve.dates, curve.values)])
    if trades is not None:
        _write_csv(out_dir / f"trades_{name}.csv",
                   ["date", "asset", "side", "shares", "price"],
                   [[t.date.isoformat(), t.asset, t.side, t.shares, t.price]
                    for t in trades])


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--seed", type=int, default=None, help="root seed override")
@click.option("--out", type=click.Path(), default=None)
def backtest(config_path, seed, out):
    """Run the ensemble walk-forward backtest, the three single-agent
    strategies, and both baselines; write the full report bundle."""
    try:
        cfg = _config_from_options(config_path, seed, out)
        panel, _ = _load_panel(cfg)
        plan = build_window_plan(panel, cfg.in_sample_end,
                                 cfg.validation_months, cfg.trade_months)
    except (RlfolioError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_USER_ERROR)

    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "config_snapshot.ini").write_text(snapshot_config(cfg))

    features = build_features(panel, cfg.indicators)
    turb = rolling_turbulence(panel, cfg.turbulence_lookback,
                              cfg.turbulence_ridge)

    logger.info("training %d quarters x %d agents", len(plan), len(AGENT_KINDS))
    windows = ens.train_and_validate(
        panel, features, turb, plan, cfg.env, cfg.agent_configs,
        seed=cfg.seed, turbulence_quantile=cfg.turbulence_quantile)

    strategies: dict[str, EquityCurve] = {}
    trace = ens.run_trading(panel, features, turb, windows, cfg.env,
                            picker=ens.pick_best)
    strategies["ensemble"] = trace.curve
    _write_strategy(out_dir, "ensemble", trace.curve, trace.trades)
    _write_csv(out_dir / "trace.csv",
               ["window", "validation_start", "validation_end",
                "trade_start", "trade_end",
                *(f"sharpe_{k.lower()}" for k in AGENT_KINDS),
                "picked", "turbulence_threshold"],
               [[d.index,
                 d.triple.validation.start.isoformat(),
                 d.triple.validation.end.isoformat(),
                 d.triple.trade.start.isoformat(),
                 d.triple.trade.end.isoformat(),
                 *(d.scores[k] for k in AGENT_KINDS),
                 d.picked, d.threshold]
                for d in trace.decisions])

    for kind in AGENT_KINDS:
        fixed = ens.run_trading(panel, features, turb, windows, cfg.env,
                                picker=lambda scores, k=kind: k)
        name = kind.lower()
        strategies[name] = fixed.curve
        _write_strategy(out_dir, name, fixed.curve, fixed.trades)

    strategies["min_variance"] = run_min_variance_baseline(
        panel, plan, cfg.env.initial_balance, cfg.min_variance_lookback,
        cfg.env.fee_rate)
    _write_strategy(out_dir, "min_variance", strategies["min_variance"])
    index_series = (_load_index_series(cfg.index_path)
                    if cfg.index_path else None)
    strategies["index"] = run_index_baseline(
        panel, plan, cfg.env.initial_balance, index_series)
    _write_strategy(out_dir, "index", strategies["index"])

    rows = []
    for name, curve in strategies.items():
        report = metrics_report(curve)
        rows.append([name] + [report.as_dict()[m] for m in METRIC_NAMES])
    _write_csv(out_dir / "comparison.csv", ["strategy", *METRIC_NAMES], rows)
    click.echo(f"backtest complete: {out_dir / 'comparison.csv'}")


@main.command()
@click.option("--out", "run_dir", required=True, type=click.Path(),
              help="directory of a completed backtest run")
def report(run_dir):
    """Print the comparison table and write plot-ready cumulative-return
    curves for every strategy."""
    run_dir = Path(run_dir)
    comparison = run_dir / "comparison.csv"
    if not comparison.exists():
        click.echo(f"error: missing {comparison}", err=True)
        sys.exit(EXIT_USER_ERROR)
    with open(comparison, newline="") as fh:
        raw = list(csv.reader(fh))

    def fmt(cell: str) -> str:
        try:
            return f"{float(cell):.4f}"
        except ValueError:
            return cell

    table = [[fmt(c) for c in row] for row in raw]
    widths = [max(len(row[i]) for row in table) for i in range(len(table[0]))]
    for row in table:
        click.echo("  ".join(c.ljust(w) for c, w in zip(row, widths)))

    for equity in sorted(run_dir.glob("equity_*.csv")):
        name = equity.stem.removeprefix("equity_")
        with open(equity, newline="") as fh:
            data = list(csv.DictReader(fh))
        if not data:
            continue
        base = float(data[0]["value"])
        _write_csv(run_dir / f"cumret_{name}.csv", ["date", "cumulative_return"],
                   [[r["date"], float(r["value"]) / base - 1.0] for r in data])
    click.echo(f"cumulative-return curves written to {run_dir}")


if __name__ == "__main__":
    main()
