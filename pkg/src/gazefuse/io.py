"""CSV readers and writers for traces, fused gaze, targets, events and reports."""

from __future__ import annotations

import csv
import json
import logging
import math
import sys
from contextlib import contextmanager
from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .traces import ChannelTrace

log = logging.getLogger(__name__)

TRACE_COLUMNS = (
    "timestamp_ms", "pupil_x", "pupil_y", "pupil_conf", "cr_x", "cr_y", "glints",
    "iris_vx", "iris_vy", "n_matches", "head_vx", "head_vy",
)
REQUIRED_TRACE_COLUMNS = ("timestamp_ms", "pupil_x", "pupil_y", "iris_vx", "iris_vy")
GAZE_COLUMNS = ("timestamp_ms", "x", "y", "variance", "confidence")
EVENT_COLUMNS = ("onset_ms", "offset_ms", "peak_vel_dps", "amplitude_deg", "kind")
REPORT_COLUMNS = ("trace_id", "task", "eye", "target", "s2s_rms_deg", "std_deg", "acc_x_deg", "acc_y_deg")


def fmt(value):
    """Fixed 9-significant-digit rendering used by every writer."""
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    if isinstance(value, str):
        return value
    v = float(value)
    if math.isnan(v):
        return ""
    return format(v, ".9g")


def fmt_time(ms):
    """Timestamps keep microsecond resolution regardless of magnitude."""
    return format(float(ms), ".3f")


@contextmanager
def _open_out(path):
    if path is None or str(path) == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _float(cell, path, line, column):
    cell = cell.strip() if cell is not None else ""
    if cell == "":
        return math.nan
    try:
        return float(cell)
    except ValueError:
        raise InputError(f"{path}:{line}: column '{column}' is not numeric: {cell!r}") from None


def parse_glints(cell, path="<glints>", line=0):
    """``"x:y;x:y:0"`` -> (points (m, 2), valid (m,)). A trailing ``:0`` marks an invalid glint."""
    cell = (cell or "").strip()
    if not cell:
        return np.empty((0, 2)), np.empty(0, dtype=bool)
    pts, valid = [], []
    for item in cell.split(";"):
        parts = item.strip().split(":")
        if len(parts) not in (2, 3):
            raise InputError(f"{path}:{line}: malformed glint {item!r}")
        try:
            pts.append((float(parts[0]), float(parts[1])))
            valid.append(parts[2].strip() != "0" if len(parts) == 3 else True)
        except ValueError:
            raise InputError(f"{path}:{line}: malformed glint {item!r}") from None
    return np.array(pts), np.array(valid, dtype=bool)


@dataclass(frozen=True, eq=False)
class RawTrace:
    """One eye's recording resampled to a uniform grid.

    Per-row velocity columns describe the motion from the previous frame
    to this one, so row 0's velocity is unused.
    """

    t: np.ndarray  # seconds
    dt: float
    pupil: np.ndarray
    pupil_conf: np.ndarray
    cr: np.ndarray
    glints: list
    iris_v: np.ndarray
    n_matches: np.ndarray
    head_v: np.ndarray

    def __len__(self):
        return len(self.t)


def _read_rows(path):
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from None
    with fh:
        lines = fh.readlines()
    skipped = 0
    while skipped < len(lines) and lines[skipped].startswith("#"):
        skipped += 1
    lines = [ln for ln in lines[skipped:] if not ln.startswith("#")]
    reader = csv.DictReader(lines)
    if reader.fieldnames is None:
        raise InputError(f"{path}:1: empty file")
    header = [h.strip() for h in reader.fieldnames]
    reader.fieldnames = header
    rows = [(k + 2 + skipped, row) for k, row in enumerate(reader)]
    return header, rows


def read_trace(path):
    """Load a trace CSV and resample it to its median sampling interval."""
    header, rows = _read_rows(path)
    unknown = set(header) - set(TRACE_COLUMNS)
    if unknown:
        raise InputError(f"{path}:1: unknown column(s): {', '.join(sorted(unknown))}")
    missing = [c for c in REQUIRED_TRACE_COLUMNS if c not in header]
    if missing:
        raise InputError(f"{path}:1: missing column(s): {', '.join(missing)}")
    if len(rows) < 2:
        raise InputError(f"{path}:{len(rows) + 1}: trace needs at least 2 samples")

    cols = {c: [] for c in TRACE_COLUMNS if c != "glints"}
    glints = []
    prev_t = -math.inf
    for line, row in rows:
        for c in cols:
            cols[c].append(_float(row.get(c), path, line, c))
        t = cols["timestamp_ms"][-1]
        if math.isnan(t):
            raise InputError(f"{path}:{line}: missing timestamp")
        if not t > prev_t:
            raise InputError(f"{path}:{line}: timestamps must be strictly increasing")
        prev_t = t
        glints.append(parse_glints(row.get("glints"), path, line))
    arr = {c: np.array(v) for c, v in cols.items()}

    t_ms = arr["timestamp_ms"]
    dt_ms = float(np.median(np.diff(t_ms)))
    n = int(round((t_ms[-1] - t_ms[0]) / dt_ms)) + 1
    grid = t_ms[0] + dt_ms * np.arange(n)
    pos = np.searchsorted(t_ms, grid)
    pos = np.clip(pos, 1, len(t_ms) - 1)
    left_closer = (grid - t_ms[pos - 1]) <= (t_ms[pos] - grid)
    nearest = np.where(left_closer, pos - 1, pos)
    gaps = np.diff(t_ms)
    if np.any(gaps > 2 * dt_ms):
        log.warning("%s: %d gap(s) longer than 2*dt (max %.3g ms)", path, int(np.sum(gaps > 2 * dt_ms)), gaps.max())

    def col(name, fill):
        return arr[name][nearest] if name in header else np.full(n, fill)

    conf = col("pupil_conf", 1.0)
    conf = np.where(np.isnan(conf), 0.0, conf)
    if np.any(conf < 0) or np.any(conf > 1):
        raise InputError(f"{path}: pupil_conf must lie in [0, 1]")
    matches = col("n_matches", np.nan)
    return RawTrace(
        t=grid / 1000.0,
        dt=dt_ms / 1000.0,
        pupil=np.column_stack([col("pupil_x", np.nan), col("pupil_y", np.nan)]),
        pupil_conf=conf,
        cr=np.column_stack([col("cr_x", np.nan), col("cr_y", np.nan)]),
        glints=[glints[k] for k in nearest],
        iris_v=np.column_stack([col("iris_vx", np.nan), col("iris_vy", np.nan)]),
        n_matches=matches,
        head_v=np.column_stack([col("head_vx", 0.0), col("head_vy", 0.0)]),
    )


def write_gaze(path, trace: ChannelTrace, variance, units="deg", eye=None):
    """Fused gaze CSV; a leading comment records the units (deg or raw) and the eye."""
    meta = f"units={units}" + (f" eye={eye}" if eye else "")
    with _open_out(path) as fh:
        fh.write(f"# gazefuse {meta}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(GAZE_COLUMNS)
        t_ms = trace.times * 1000.0
        for k in range(len(trace)):
            w.writerow([fmt_time(t_ms[k]), fmt(trace.xy[k, 0]), fmt(trace.xy[k, 1]),
                        fmt(variance[k]), fmt(trace.confidence[k])])


def read_gaze(path):
    """Returns (ChannelTrace, variance, metadata dict from the header comment)."""
    meta = {}
    try:
        with open(path) as fh:
            first = fh.readline()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from None
    if first.startswith("# gazefuse "):
        meta = dict(item.split("=", 1) for item in first[len("# gazefuse "):].split() if "=" in item)
    header, rows = _read_rows(path)
    missing = [c for c in GAZE_COLUMNS if c not in header]
    if missing:
        raise InputError(f"{path}:1: missing column(s): {', '.join(missing)}")
    if len(rows) < 2:
        raise InputError(f"{path}: gaze file needs at least 2 samples")
    data = np.array([[_float(row[c], path, line, c) for c in GAZE_COLUMNS] for line, row in rows])
    t_ms = data[:, 0]
    if np.any(np.diff(t_ms) <= 0):
        raise InputError(f"{path}: timestamps must be strictly increasing")
    dt = float(np.median(np.diff(t_ms))) / 1000.0
    trace = ChannelTrace(data[:, 1:3], dt, t_ms[0] / 1000.0, np.nan_to_num(data[:, 4]))
    return trace, data[:, 3], meta


def read_targets(path):
    """Target CSV: onset_ms, x_deg, y_deg and optional x_px, y_px.

    Returns (onsets_s, positions_deg, positions_px or None).
    """
    header, rows = _read_rows(path)
    for c in ("onset_ms", "x_deg", "y_deg"):
        if c not in header:
            raise InputError(f"{path}:1: missing column '{c}'")
    if not rows:
        raise InputError(f"{path}:2: no targets")
    onsets, pos, px = [], [], []
    has_px = "x_px" in header and "y_px" in header
    for line, row in rows:
        vals = [_float(row[c], path, line, c) for c in ("onset_ms", "x_deg", "y_deg")]
        if any(math.isnan(v) for v in vals):
            raise InputError(f"{path}:{line}: empty target field")
        onsets.append(vals[0] / 1000.0)
        pos.append(vals[1:])
        if has_px:
            px.append([_float(row[c], path, line, c) for c in ("x_px", "y_px")])
    onsets = np.array(onsets)
    if np.any(np.diff(onsets) <= 0):
        raise InputError(f"{path}: target onsets must be strictly increasing")
    return onsets, np.array(pos), (np.array(px) if has_px else None)


def write_rows(path, columns, rows):
    """Rows as CSV, or as a JSON list when ``path`` ends in .json; None means stdout."""
    if str(path).endswith(".json"):
        doc = [{c: (None if isinstance(r[c], float) and math.isnan(r[c]) else r[c]) for c in columns} for r in rows]
        with _open_out(path) as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
        return
    with _open_out(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([fmt(r[c]) for c in columns])
