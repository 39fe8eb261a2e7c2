"""OHLCV ingestion, calendar alignment, and the walk-forward window plan.

Input is delimited text with a header row; columns are mapped through a
schema so arbitrary vendor files can be loaded. After alignment the panel
is dense: every (date, asset) cell is populated, the calendar being the
intersection of the per-asset calendars.
"""
from __future__ import annotations

import csv
import datetime as dt
import io
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AssetEmpty,
    InputEmpty,
    InsufficientData,
    OutOfRange,
    RejectionRateExceeded,
)

BAR_FIELDS = ("open", "high", "low", "close", "adj_close", "volume")

DEFAULT_SCHEMA = {
    "date": "date",
    "ticker": "ticker",
    "open": "open",
    "high": "high",
    "low": "low",
    "close": "close",
    "adj_close": "adj_close",
    "volume": "volume",
}


@dataclass(frozen=True)
class Bar:
    date: dt.date
    open: float
    high: float
    low: float
    close: float
    adj_close: float
    volume: float

    def validate(self) -> str | None:
        """Return a reason string if the bar breaks an invariant, else None."""
        prices = (self.open, self.high, self.low, self.close, self.adj_close)
        if any(not np.isfinite(p) or p <= 0 for p in prices):
            return "non-positive or non-finite price"
        if self.volume < 0 or not np.isfinite(self.volume):
            return "negative volume"
        if not (self.low <= min(self.open, self.close)
                and max(self.open, self.close) <= self.high):
            return "low/high do not bracket open/close"
        return None


@dataclass
class RejectedRow:
    line: int
    reason: str


@dataclass
class LoadReport:
    total_rows: int
    accepted_rows: int
    rejected: list[RejectedRow]

    @property
    def rejection_rate(self) -> float:
        return len(self.rejected) / self.total_rows if self.total_rows else 0.0


@dataclass(frozen=True)
class MarketFrame:
    """Per-date cross-section of the panel, built on demand."""

    date: dt.date
    assets: tuple[str, ...]
    open: np.ndarray
    high: np.ndarray
    low: np.ndarray
    close: np.ndarray
    adj_close: np.ndarray
    volume: np.ndarray

    @property
    def prices(self) -> np.ndarray:
        """Trading prices: the adjusted close."""
        return self.adj_close


class PricePanel:
    """Aligned T x D table of bars over a common trading calendar.

    Immutable after construction; concurrent reads are safe. Frames are
    constructed lazily and cached, so a trace of K distinct time indices
    costs at most K frame constructions (`construction_count`).
    """

    def __init__(self, assets: list[str], calendar: list[dt.date],
                 fields: dict[str, np.ndarray]):
        if not assets or not calendar:
            raise InputEmpty("panel must have at least one asset and one date")
        self.assets = tuple(assets)
        self.calendar = tuple(calendar)
        self._fields = {k: np.asarray(v, dtype=float) for k, v in fields.items()}
        for name in BAR_FIELDS:
            arr = self._fields[name]
            if arr.shape != (self.T, self.D):
                raise ValueError(f"field {name} has shape {arr.shape}")
            arr.setflags(write=False)
        self._frame_cache: dict[int, MarketFrame] = {}
        self.construction_count = 0
        self.access_log: list[int] | None = None

    @property
    def T(self) -> int:
        return len(self.calendar)

    @property
    def D(self) -> int:
        return len(self.assets)

    def field(self, name: str) -> np.ndarray:
        """Full T x D array for one bar field (read-only view)."""
        return self._fields[name]

    @property
    def adj_close(self) -> np.ndarray:
        return self._fields["adj_close"]

    def enable_access_tracking(self) -> None:
        self.access_log = []

    def index_of(self, date: dt.date) -> int:
        try:
            return self.calendar.index(date)
        except ValueError:
            raise OutOfRange(f"{date} not in calendar") from None

    def frame_at(self, t: int) -> MarketFrame:
        if not 0 <= t < self.T:
            raise OutOfRange(f"t={t} outside [0, {self.T})")
        if self.access_log is not None:
            self.access_log.append(t)
        frame = self._frame_cache.get(t)
        if frame is None:
            self.construction_count += 1
            frame = MarketFrame(
                date=self.calendar[t],
                assets=self.assets,
                **{name: self._fields[name][t].copy() for name in BAR_FIELDS},
            )
            self._frame_cache[t] = frame
        return frame

    def date_slice(self, start: dt.date, end: dt.date) -> range:
        """Indices of calendar dates within [start, end]."""
        lo = np.searchsorted(np.array(self.calendar), start, side="left")
        hi = np.searchsorted(np.array(self.calendar), end, side="right")
        return range(int(lo), int(hi))


def _parse_row(row: dict, line: int) -> tuple[str, Bar] | RejectedRow:
    try:
        date = dt.date.fromisoformat(row["date"].strip())
        ticker = row["ticker"].strip()
        if not ticker:
            return RejectedRow(line, "empty ticker")
        vals = {f: float(row[f]) for f in BAR_FIELDS}
    except (KeyError, TypeError):
        return RejectedRow(line, "missing column value")
    except ValueError as exc:
        return RejectedRow(line, str(exc))
    bar = Bar(date=date, **vals)
    reason = bar.validate()
    if reason is not None:
        return RejectedRow(line, reason)
    return ticker, bar


def load_bars(source, schema: dict[str, str] | None = None,
              rejection_ceiling: float = 0.01,
              delimiter: str = ",") -> tuple[PricePanel, LoadReport]:
    """Load delimited OHLCV text into an aligned panel.

    `source` is a text file object, a byte stream, or a string path.
    `schema` maps canonical names (date, ticker, open, ...) to the file's
    column headers. Rows violating bar invariants are rejected and listed
    in the report; a rejection rate above `rejection_ceiling` aborts.
    """
    schema = {**DEFAULT_SCHEMA, **(schema or {})}
    close_after = False
    if isinstance(source, str):
        source = open(source, "r", newline="")
        close_after = True
    elif isinstance(source, (bytes, bytearray)):
        source = io.StringIO(source.decode())
    elif isinstance(source, io.BufferedIOBase):
        source = io.TextIOWrapper(source)

    try:
        reader = csv.DictReader(source, delimiter=delimiter)
        if reader.fieldnames is None:
            raise InputEmpty("no header row")
        header = {name: idx for idx, name in enumerate(reader.fieldnames)}
        missing = [col for col in schema.values() if col not in header]
        if missing:
            raise InputEmpty(f"header missing columns: {missing}")
        inverse = {schema[k]: k for k in schema}

        by_asset: dict[str, dict[dt.date, Bar]] = {}
        rejected: list[RejectedRow] = []
        total = 0
        for line, raw in enumerate(reader, start=2):
            total += 1
            row = {inverse[k]: v for k, v in raw.items() if k in inverse}
            parsed = _parse_row(row, line)
            if isinstance(parsed, RejectedRow):
                rejected.append(parsed)
                continue
            ticker, bar = parsed
            by_asset.setdefault(ticker, {})[bar.date] = bar
        if total == 0:
            raise InputEmpty("source has a header but no data rows")
    finally:
        if close_after:
            source.close()

    report = LoadReport(total_rows=total, accepted_rows=total - len(rejected),
                        rejected=rejected)
    if report.rejection_rate > rejection_ceiling:
        raise RejectionRateExceeded(len(rejected), total, rejection_ceiling)

    for ticker, bars in by_asset.items():
        if not bars:
            raise AssetEmpty(ticker)
    if not by_asset:
        raise InputEmpty("no valid rows in source")

    assets = sorted(by_asset)
    common = set.intersection(*(set(b) for b in by_asset.values()))
    if not common:
        raise InsufficientData(needed="a shared trading date", available=0)
    calendar = sorted(common)

    fields = {
        name: np.array(
            [[getattr(by_asset[a][d], name) for a in assets] for d in calendar],
            dtype=float,
        )
        for name in BAR_FIELDS
    }
    return PricePanel(assets, calendar, fields), report


# --- walk-forward window plan -------------------------------------------------

@dataclass(frozen=True)
class DateInterval:
    start: dt.date
    end: dt.date

    def __post_init__(self):
        if self.start > self.end:
            raise ValueError(f"interval start {self.start} after end {self.end}")

    def contains(self, d: dt.date) -> bool:
        return self.start <= d <= self.end


@dataclass(frozen=True)
class WindowTriple:
    index: int
    train: DateInterval
    validation: DateInterval
    trade: DateInterval


@dataclass
class WindowPlan:
    triples: list[WindowTriple] = field(default_factory=list)

    def __iter__(self):
        return iter(self.triples)

    def __len__(self):
        return len(self.triples)


def add_months(d: dt.date, n: int) -> dt.date:
    """Shift by n calendar months, clamping the day to the month's length."""
    month0 = d.year * 12 + (d.month - 1) + n
    year, month = divmod(month0, 12)
    month += 1
    last = (dt.date(year + month // 12, month % 12 + 1, 1)
            - dt.timedelta(days=1)).day
    return dt.date(year, month, min(d.day, last))


def month_start(d: dt.date) -> dt.date:
    return d.replace(day=1)


def month_end(d: dt.date) -> dt.date:
    return add_months(month_start(d), 1) - dt.timedelta(days=1)


def build_window_plan(panel: PricePanel, in_sample_end: dt.date,
                      validation_months: int = 3,
                      trade_months: int = 3) -> WindowPlan:
    """Growing-window train/validation/trade triples.

    The first validation interval is the `validation_months` calendar months
    ending with `in_sample_end`'s month; training covers everything before
    it. Successive triples roll forward by `trade_months`, training always
    starting at the panel start. The final trade interval is kept even if
    the panel ends mid-quarter.
    """
    first = panel.calendar[0]
    last = panel.calendar[-1]
    val_start0 = month_start(add_months(in_sample_end, -(validation_months - 1)))
    if val_start0 <= first:
        raise InsufficientData(needed=f"history before {val_start0}",
                               available=str(first))
    if last <= in_sample_end:
        raise InsufficientData(
            needed=f"trade dates after {in_sample_end}", available=str(last))

    triples = []
    k = 0
    while True:
        val_start = add_months(val_start0, k * trade_months)
        val_end = month_end(add_months(val_start, validation_months - 1))
        trade_start = val_end + dt.timedelta(days=1)
        trade_end = month_end(add_months(trade_start, trade_months - 1))
        if trade_start > last:
            break
        trade_end = min(trade_end, last)
        if not panel.date_slice(trade_start, trade_end):
            break
        triples.append(WindowTriple(
            index=k,
            train=DateInterval(first, val_start - dt.timedelta(days=1)),
            validation=DateInterval(val_start, val_end),
            trade=DateInterval(trade_start, trade_end),
        ))
        k += 1
    if not triples:
        raise InsufficientData(needed="at least one trade interval",
                               available=str(last))
    return WindowPlan(triples)
