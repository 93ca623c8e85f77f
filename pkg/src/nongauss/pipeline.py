"""File formats and the counts -> witness report pipeline.

Counts CSV header: ``label,R0,R1A,R1B,R2,duration_s,inclusive`` (the last
two columns may be omitted or left empty).  Lines starting with ``#`` are
comments.  Reports and simulation configs are JSON; field names match the
record / config dataclass fields.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import MISSING, asdict, dataclass, fields, replace
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import (
    AnalysisError,
    ConfigError,
    DegenerateError,
    InvariantViolationError,
    NonGaussError,
    NoClicksError,
    OutOfRangeError,
    ParseError,
)
from .estimators import (
    ClickCounts,
    alpha_anticorrelation,
    estimate_pair,
    estimate_splitting,
    g2_of_rhoT,
)
from .photon_sim import SourceConfig, exact_click_probabilities, run_experiment
from .witness import (
    R_AT_P1_MAX,
    ProbabilityPair,
    _boundary,
    max_delta_w,
    tangent_slope,
    wg_bound,
    wigner_origin_bound,
)

COUNTS_HEADER = ("label", "R0", "R1A", "R1B", "R2", "duration_s", "inclusive")
REQUIRED_COLUMNS = COUNTS_HEADER[:5]
TABLE_TOLERANCE = 5e-5
FLAT_WINDOW = 5e-6


@dataclass(frozen=True)
class CountsRecord:
    label: str
    R0: int
    R1A: int
    R1B: int
    R2: int
    duration_s: float | None = None
    inclusive: bool = False

    def to_counts(self) -> ClickCounts:
        if self.inclusive:
            return ClickCounts.from_inclusive(self.R0, self.R1A, self.R1B, self.R2, self.duration_s)
        return ClickCounts(self.R0, self.R1A, self.R1B, self.R2, self.duration_s)


@dataclass(frozen=True)
class ReportRecord:
    label: str
    p0: float
    p1: float
    sigma_p0: float | None
    sigma_p1: float | None
    t_est: float | None
    a_opt: float
    delta_w: float
    sigma_delta_w: float
    non_gaussian: bool
    g2: float | None
    alpha: float | None
    wigner_origin_lower_bound: float


def _comment_free(lines):
    for lineno, line in enumerate(lines, start=1):
        if line.lstrip().startswith("#") or not line.strip():
            continue
        yield lineno, line


def _parse_int(row, col, text):
    try:
        v = int(text)
    except ValueError:
        raise ParseError(row, col, f"expected a non-negative integer, got {text!r}") from None
    if v < 0:
        raise ParseError(row, col, f"expected a non-negative integer, got {text!r}")
    return v


def _parse_bool(row, col, text):
    t = text.strip().lower()
    if t in ("", "false", "0", "no"):
        return False
    if t in ("true", "1", "yes"):
        return True
    raise ParseError(row, col, f"expected true/false, got {text!r}")


def parse_counts(text: str) -> list[CountsRecord]:
    numbered = list(_comment_free(text.splitlines()))
    if not numbered:
        raise ParseError(1, "label", "file has no header")
    header_row, header_line = numbered[0]
    header = [h.strip() for h in next(csv.reader([header_line]))]
    if tuple(header[:5]) != REQUIRED_COLUMNS or any(h not in COUNTS_HEADER for h in header):
        raise ParseError(header_row, "header", f"expected columns {','.join(COUNTS_HEADER)}, got {','.join(header)}")
    records = []
    for row, line in numbered[1:]:
        cells = next(csv.reader([line]))
        if len(cells) != len(header):
            raise ParseError(row, "*", f"expected {len(header)} fields, got {len(cells)}")
        cell = dict(zip(header, (c.strip() for c in cells)))
        ints = {c: _parse_int(row, c, cell[c]) for c in ("R0", "R1A", "R1B", "R2")}
        duration = None
        if cell.get("duration_s"):
            try:
                duration = float(cell["duration_s"])
            except ValueError:
                raise ParseError(row, "duration_s", f"not a number: {cell['duration_s']!r}") from None
            if not (duration > 0 and math.isfinite(duration)):
                raise ParseError(row, "duration_s", "must be positive")
        inclusive = _parse_bool(row, "inclusive", cell.get("inclusive", ""))
        rec = CountsRecord(cell["label"], duration_s=duration, inclusive=inclusive, **ints)
        try:
            rec.to_counts()
        except NonGaussError as e:
            raise InvariantViolationError(row, str(e)) from None
        records.append(rec)
    return records


def ingest_counts(path) -> list[CountsRecord]:
    """Read and validate a counts CSV; errors name the offending file row."""
    with open(path, encoding="utf-8", newline="") as f:
        return parse_counts(f.read())


def analyze_pair(label, pair: ProbabilityPair, cov=0.0, sigma_k=3.0, t_est=None, alpha=None) -> ReportRecord:
    rep = max_delta_w(pair, cov=cov, sigma_k=sigma_k, verify=True)
    try:
        g2 = g2_of_rhoT(pair.p0, pair.p1)
    except DegenerateError:
        g2 = None
    return ReportRecord(
        label=label,
        p0=pair.p0,
        p1=pair.p1,
        sigma_p0=pair.sigma_p0,
        sigma_p1=pair.sigma_p1,
        t_est=t_est,
        a_opt=rep.a_opt,
        delta_w=rep.delta_w,
        sigma_delta_w=rep.sigma_delta_w,
        non_gaussian=rep.non_gaussian,
        g2=g2,
        alpha=alpha,
        wigner_origin_lower_bound=wigner_origin_bound(pair.p0),
    )


def analyze_record(record: CountsRecord, sigma_k: float = 3.0) -> ReportRecord:
    try:
        counts = record.to_counts()
        pair, cov, _ = estimate_pair(counts)
        try:
            t_est = estimate_splitting(counts).value
        except NoClicksError:
            t_est = None
        try:
            alpha = alpha_anticorrelation(counts).value
        except NoClicksError:
            alpha = None
        return analyze_pair(record.label, pair, cov, sigma_k, t_est, alpha)
    except NonGaussError as e:
        raise AnalysisError(record.label, e) from e


def analyze(records, sigma_k: float = 3.0, workers: int = 1) -> list[ReportRecord]:
    """One report per record, in input order."""
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(lambda r: analyze_record(r, sigma_k), records))
    return [analyze_record(r, sigma_k) for r in records]


def _num(x):
    if x is None or isinstance(x, (bool, str)):
        return x
    return float(f"{x:.9g}")


def _cell(x):
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, str):
        return x
    return f"{x:.9g}"


def reports_to_json(reports) -> str:
    rows = [{k: _num(v) for k, v in asdict(r).items()} for r in reports]
    return json.dumps(rows, indent=2) + "\n"


def reports_to_csv(reports) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f.name for f in fields(ReportRecord)])
    for r in reports:
        w.writerow([_cell(v) for v in asdict(r).values()])
    return buf.getvalue()


def report_from_dict(d: dict) -> ReportRecord:
    return ReportRecord(**{f.name: d[f.name] for f in fields(ReportRecord)})


def boundary_rows(r_min: float, r_max: float, samples: int):
    if not (math.isfinite(r_min) and math.isfinite(r_max)) or r_min < 0 or r_max <= r_min:
        raise OutOfRangeError(f"need 0 <= r_min < r_max, got r_min={r_min!r}, r_max={r_max!r}")
    if samples < 2:
        raise OutOfRangeError(f"need at least 2 samples, got {samples!r}")
    rows = []
    for r in np.linspace(r_min, r_max, samples):
        p0, p1 = _boundary(float(r))
        a = tangent_slope(float(r)) if r <= R_AT_P1_MAX else None
        rows.append((float(r), p0, p1, a))
    return rows


def emit_boundary(r_min: float, r_max: float, samples: int, path) -> Path:
    """Write the Gaussian-mixture boundary as CSV ``r,p0,p1,a_tangent``.

    ``a_tangent`` is left empty beyond the p1-maximizing point, where no
    witness slope in (0, 1] touches the curve.
    """
    rows = boundary_rows(r_min, r_max, samples)
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["r", "p0", "p1", "a_tangent"])
        for row in rows:
            w.writerow([_cell(v) for v in row])
    return path


# -- simulation configs --------------------------------------------------------

_CONFIG_FIELDS = {f.name for f in fields(SourceConfig)}


def _config_from_obj(obj, prefix):
    if not isinstance(obj, dict):
        raise ConfigError(prefix or "$", "expected a JSON object")
    label = obj.get("label", None)
    if label is not None and not isinstance(label, str):
        raise ConfigError(f"{prefix}label", "must be a string")
    kwargs = {}
    for key, value in obj.items():
        if key == "label":
            continue
        if key not in _CONFIG_FIELDS:
            raise ConfigError(f"{prefix}{key}", "unknown field")
        kwargs[key] = value
    for f in fields(SourceConfig):
        if f.name not in kwargs and f.default is MISSING:
            raise ConfigError(f"{prefix}{f.name}", "missing required field")
    try:
        return label, SourceConfig(**kwargs)
    except NonGaussError as e:
        where = getattr(e, "field", None) or "n_max"
        raise ConfigError(f"{prefix}{where}", str(e)) from None


def load_config(path):
    """Parse a simulation config: one object of SourceConfig fields, or an array of them.

    Each object may also carry a ``label``.
    """
    try:
        with open(path, encoding="utf-8") as f:
            doc = json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigError("$", f"invalid JSON: {e}") from None
    if isinstance(doc, list):
        if not doc:
            raise ConfigError("$", "empty run list")
        runs = [_config_from_obj(o, f"[{i}].") for i, o in enumerate(doc)]
    else:
        runs = [_config_from_obj(doc, "")]
    return [(label if label is not None else f"run{i}", cfg) for i, (label, cfg) in enumerate(runs)]


def simulate(config_path, out_path, seed: int | None = None) -> tuple[Path, Path]:
    """Simulate every configured run; write a counts CSV and a ``.truth.json`` sidecar.

    ``seed`` overrides the seed of every run.  Output bytes depend only on
    the config and seed.
    """
    runs = load_config(config_path)
    out_path = Path(out_path)
    truth_path = out_path.with_name(out_path.name + ".truth.json")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COUNTS_HEADER)
    truth = []
    for label, cfg in runs:
        if seed is not None:
            cfg = replace(cfg, seed=seed)
        counts, stats = run_experiment(cfg)
        w.writerow([label, counts.R0, counts.R1A, counts.R1B, counts.R2, "", "false"])
        probs = exact_click_probabilities(cfg)
        truth.append({
            "label": label,
            "config": cfg.to_dict(),
            "probs": [float(p) for p in stats.probs],
            "tail": stats.tail,
            "p0": stats.p0,
            "p1": stats.p1,
            "click_probabilities": asdict(probs),
        })
    out_path.write_text(buf.getvalue(), encoding="utf-8")
    truth_path.write_text(json.dumps({"runs": truth}, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return out_path, truth_path


# -- bundled published data ----------------------------------------------------

def _bundled(name):
    return resources.files("nongauss").joinpath("data").joinpath(name).read_text(encoding="utf-8")


def load_table(name: str) -> list[dict]:
    """Rows of a bundled table file (``table_I.csv`` / ``table_II.csv``) as dicts of strings."""
    lines = [line for _, line in _comment_free(_bundled(name).splitlines())]
    return list(csv.DictReader(lines))


def worked_counts() -> list[CountsRecord]:
    return parse_counts(_bundled("worked_counts.csv"))


@dataclass(frozen=True)
class TableCheck:
    table: str
    label: str
    quantity: str
    computed: float
    published: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return abs(self.computed - self.published) <= self.tolerance


def reproduce_tables() -> list[TableCheck]:
    """Recompute every published witness value from the bundled (p0, p1) pairs."""
    checks = []
    for table in ("table_I.csv", "table_II.csv"):
        for row in load_table(table):
            pair = ProbabilityPair(float(row["p0"]), float(row["p1"]))
            rep = max_delta_w(pair, verify=True)
            published = float(row["delta_w_e6"]) * 1e-6
            checks.append(TableCheck(table, row["label"], "delta_w", rep.delta_w, published, TABLE_TOLERANCE))
            if "a_opt" in row:
                a = float(row["a_opt"])
                at_published = a * pair.p0 + pair.p1 - wg_bound(a)
                checks.append(TableCheck(table, row["label"], "delta_w(a_published)", at_published, rep.delta_w, FLAT_WINDOW))
    for rec in worked_counts():
        pair, _, _ = estimate_pair(rec.to_counts())
        checks.append(TableCheck("worked_counts.csv", rec.label, "p0", pair.p0, 0.8589, 1e-4))
        checks.append(TableCheck("worked_counts.csv", rec.label, "p1", pair.p1, 0.1410, 1e-4))
    return checks
