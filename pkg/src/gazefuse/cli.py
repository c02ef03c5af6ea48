"""Command-line front end: ``gazefuse {fuse,calibrate,metrics,detect,simulate}``."""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import io
from .calibration import display_delay, load_calibration, save_calibration
from .config import load_config
from .errors import GazefuseError, InputError, NumericalError, SingularSystemError
from .events import count_in_windows, detect_microsaccades
from .metrics import Ramp, detrend_pursuit, fixation_window, precision_report
from .pipeline import calibrate_eye, cyclopean, fuse_eye
from .simulator import run_study

log = logging.getLogger("gazefuse")

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3


def _config(args):
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = dataclasses.replace(
            cfg,
            sim=dataclasses.replace(cfg.sim, seed=args.seed),
            events=dataclasses.replace(cfg.events, seed=args.seed),
        )
    return cfg


def _targets(path, cfg):
    """Target onsets (s) with the display delay added when pixel positions are given."""
    onsets, pos, px = io.read_targets(path)
    if px is not None:
        delay_ms = display_delay(px[:, 0], px[:, 1], cfg.calibration.delay_coeffs)
        onsets = onsets + delay_ms / 1000.0
        if np.any(np.diff(onsets) <= 0):
            raise InputError(f"{path}: display-delay correction reorders target onsets")
    return onsets, pos


def cmd_fuse(args, cfg):
    paths = args.cyclopean or [args.trace]
    if paths[0] is None:
        raise InputError("fuse needs a trace file or --cyclopean LEFT RIGHT")
    if args.calibration:
        if len(args.calibration) != len(paths):
            raise InputError(f"need {len(paths)} calibration file(s), got {len(args.calibration)}")
        calibs = [load_calibration(p) for p in args.calibration]
        units = "deg"
    elif args.uncalibrated:
        calibs = [None] * len(paths)
        units = "raw"
    else:
        raise InputError("pass --calibration FILE or --uncalibrated")

    raws = [io.read_trace(p) for p in paths]
    with ThreadPoolExecutor(max_workers=len(raws)) as pool:
        results = list(pool.map(lambda rc: fuse_eye(rc[0], cfg, rc[1]), zip(raws, calibs)))
    if len(results) == 2:
        result, eye = cyclopean(*results), "cyclopean"
    else:
        result, eye = results[0], args.eye
    io.write_gaze(args.output, result.hybrid, result.variance, units=units, eye=eye)


def cmd_calibrate(args, cfg):
    raw = io.read_trace(args.trace)
    onsets, pos = _targets(args.targets, cfg)
    pc, vc = calibrate_eye(raw, onsets, pos, cfg)
    save_calibration(args.output, pc, vc)


def _fixation_rows(trace, onsets, pos, span_ms):
    ends = np.append(onsets[1:], np.inf)
    for k, (onset, end) in enumerate(zip(onsets, ends)):
        window = fixation_window(trace, onset, span_ms, None if np.isinf(end) else end)
        yield k, precision_report(trace, window, pos[k])


def _pursuit_rows(trace, onsets, pos):
    # each target row starts a leg that moves linearly to the next target
    for k in range(len(onsets) - 1):
        span = onsets[k + 1] - onsets[k]
        ramp = Ramp(onsets[k], onsets[k + 1], tuple(pos[k]), tuple((pos[k + 1] - pos[k]) / span))
        seg = detrend_pursuit(trace, ramp)
        rep = precision_report(seg.detrended, (0, len(seg.detrended)))
        yield k, rep


def cmd_metrics(args, cfg):
    trace, _, meta = io.read_gaze(args.gaze)
    onsets, pos = _targets(args.targets, cfg)
    if args.task == "fixation":
        reports = _fixation_rows(trace, onsets, pos, cfg.metrics.fixation_span_ms)
    else:
        reports = _pursuit_rows(trace, onsets, pos)
    eye = args.eye or meta.get("eye", "")
    trace_id = args.trace_id or Path(args.gaze).stem
    rows = [
        {"trace_id": trace_id, "task": args.task, "eye": eye, "target": k,
         "s2s_rms_deg": r.s2s_rms, "std_deg": r.std,
         "acc_x_deg": r.accuracy[0], "acc_y_deg": r.accuracy[1]}
        for k, r in reports
    ]
    io.write_rows(args.output, io.REPORT_COLUMNS, rows)


def cmd_detect(args, cfg):
    trace, _, _ = io.read_gaze(args.gaze)
    onsets, _ = _targets(args.targets, cfg)
    per_frame = np.diff(trace.xy[:, 0])  # horizontal component only
    events, threshold, _ = detect_microsaccades(per_frame, trace.dt, cfg.events)
    log.info("adaptive threshold %.6g deg/s, %d event(s)", threshold, len(events))
    rows = [
        {"onset_ms": 1000.0 * (trace.t0 + e.onset * trace.dt),
         "offset_ms": 1000.0 * (trace.t0 + e.offset * trace.dt),
         "peak_vel_dps": e.peak_velocity, "amplitude_deg": e.amplitude, "kind": e.kind}
        for e in events
    ]
    io.write_rows(args.output, io.EVENT_COLUMNS, rows)
    if args.counts:
        counts = count_in_windows(events, onsets, trace.dt, trace.t0, cfg.events)
        io.write_rows(args.counts, ("onset_ms", "count", "extras"),
                      [{"onset_ms": 1000.0 * c.onset, "count": c.count, "extras": c.extras} for c in counts])


def cmd_simulate(args, cfg):
    sim = cfg.sim
    if args.trials is not None:
        sim = dataclasses.replace(sim, trials=args.trials)
    report = run_study(sim, dump_path=args.dump_trials, dump_trials=args.dump_count)
    print(report.format_table())
    if args.output:
        with open(args.output, "w") as fh:
            json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON or TOML run configuration")
    common.add_argument("--seed", type=int, help="overrides every seed in the configuration")
    common.add_argument("--output", "-o", metavar="PATH", help="output file (default: stdout)")
    common.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")

    parser = argparse.ArgumentParser(prog="gazefuse", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fuse", parents=[common], help="fuse a recorded trace into gaze")
    p.add_argument("trace", nargs="?", help="trace CSV (omit with --cyclopean)")
    p.add_argument("--eye", choices=("left", "right"), default="left", help="eye label for the header")
    p.add_argument("--cyclopean", nargs=2, metavar=("LEFT", "RIGHT"))
    p.add_argument("--calibration", nargs="+", metavar="JSON", help="one per input trace")
    p.add_argument("--uncalibrated", action="store_true", help="emit raw units")
    p.set_defaults(func=cmd_fuse)

    p = sub.add_parser("calibrate", parents=[common], help="fit a calibration from a recording")
    p.add_argument("trace", help="trace CSV recorded while fixating the targets")
    p.add_argument("targets", help="targets CSV with onsets and positions")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("metrics", parents=[common], help="precision and accuracy per target")
    p.add_argument("gaze", help="gaze CSV written by fuse")
    p.add_argument("targets", help="targets CSV with onsets and positions")
    p.add_argument("--task", choices=("fixation", "pursuit"), default="fixation", help="per-target windows or pursuit legs")
    p.add_argument("--eye", choices=("left", "right", "cyclopean"), help="override the eye column")
    p.add_argument("--trace-id", help="value of the trace_id column (default: gaze file stem)")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("detect", parents=[common], help="microsaccade detection")
    p.add_argument("gaze", help="gaze CSV written by fuse")
    p.add_argument("targets", help="targets CSV; onsets define the counting windows")
    p.add_argument("--counts", metavar="PATH", help="per-onset window counts")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("simulate", parents=[common], help="Monte-Carlo fusion study")
    p.add_argument("--trials", type=int, help="number of trials (overrides the configuration)")
    p.add_argument("--dump-trials", metavar="CSV", help="write per-trial traces")
    p.add_argument("--dump-count", type=int, default=10, help="trials to dump (default: 10)")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="gazefuse: %(levelname)s: %(message)s")
    try:
        cfg = _config(args)
        args.func(args, cfg)
    except InputError as exc:
        print(f"gazefuse: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SingularSystemError as exc:
        print(f"gazefuse: numerical error at sample {exc.index}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except NumericalError as exc:
        print(f"gazefuse: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except GazefuseError as exc:  # pragma: no cover - every subclass is handled above
        print(f"gazefuse: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
