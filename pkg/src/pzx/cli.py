"""``pzx`` command line: generate, fit, extract, compare, plot, pipeline.

Exit codes: 0 success, 1 processing error, 2 bad flags, 3 comparison
error above ``--tolerance``.  Outputs are written to temporary files and
renamed into place only after every output of the command is ready.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import tempfile
from pathlib import Path

from . import __version__
from .errors import AllPassAmbiguity, DegenerateDataset, InvalidComponentValue, MissingParameter, PZXError
from .extract import OMEGA_FLOOR, compare_pz, extract_pipeline
from .filterzoo import FilterSpec, make_filter, parse_family, spec_from_dict, truth_pz
from .fitting import fit as fit_model
from .measure import MeasurementConfig, normalize_gain, parse_csv, plan_sweep, simulate_sweep, to_csv
from .report import (
    ReportError,
    comparison_to_json,
    dumps,
    extraction_to_json,
    fit_to_json,
    load_json,
    pz_from_json,
    pz_to_json,
    render_pz_svg,
)

log = logging.getLogger("pzx")

HINTS = {
    AllPassAmbiguity: "record phase (generate --phase) and use --strategy rational for all-pass filters",
    DegenerateDataset: "a flat magnitude cannot be fitted; record phase and use --strategy rational",
}


class UsageError(Exception):
    """Flag combination rejected before any computation (exit 2)."""


def _parse_sweep(text: str) -> tuple[float, float, int]:
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected wmin:wmax:n")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(float(parts[2]))
    except ValueError:
        raise argparse.ArgumentTypeError(f"non-numeric sweep {text!r}") from None
    if not (0 < lo < hi) or n < 2:
        raise argparse.ArgumentTypeError("sweep needs 0 < wmin < wmax and n >= 2")
    return lo, hi, n


def _degree(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("degree must be non-negative")
    return v


def _positive(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pzx", description="Pole-zero extraction from frequency-response sweeps")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def add_input(sp, help_text):
        sp.add_argument("--in", dest="input", required=True, help=help_text)

    def add_extract_flags(sp):
        sp.add_argument("--strategy", choices=["auto", "model", "rational", "magsq"], default="auto")
        sp.add_argument("--num-deg", type=_degree, default=None)
        sp.add_argument("--den-deg", type=_degree, default=None)
        sp.add_argument("--model", choices=["exp2", "gauss1", "auto"], default="auto")
        sp.add_argument("--hz", action="store_true", help="input frequencies are in Hz")

    g = sub.add_parser("generate", help="simulate a sweep of a reference filter")
    g.add_argument("--family", help="hp1 lp1 hp2 lp2 bp notch ap1 ap2 custom (or full family names)")
    g.add_argument("--spec", help="FilterSpec JSON document (alternative to filter flags)")
    g.add_argument("--r", type=_positive)
    g.add_argument("--c", type=_positive)
    g.add_argument("--w0", type=_positive)
    g.add_argument("--q", type=_positive)
    g.add_argument("--pz-file", help="pole-zero JSON for --family custom")
    g.add_argument("--sweep", type=_parse_sweep, required=True, help="wmin:wmax:n in rad/s")
    g.add_argument("--spacing", choices=["log", "linear"], default="log")
    g.add_argument("--noise", type=float, default=0.0)
    g.add_argument("--adc-bits", type=int, default=10)
    g.add_argument("--vref", type=float, default=5.0)
    g.add_argument("--full-scale", type=float, default=5.0, help="volts produced by unit gain")
    g.add_argument("--f2v", type=float, default=1.0, help="frequency-to-voltage calibration factor")
    g.add_argument("--seed", type=int, default=None, help="defaults to $PZX_SEED, then 0")
    g.add_argument("--phase", action="store_true", help="record phase as well as magnitude")
    g.add_argument("--out", required=True, help="dataset CSV; truth goes to <out>.truth.json")

    f = sub.add_parser("fit", help="fit a closed-form model to a sweep")
    add_input(f, "sweep CSV")
    f.add_argument("--model", choices=["exp2", "gauss1", "auto"], default="auto")
    f.add_argument("--hz", action="store_true")
    f.add_argument("--out", required=True)

    e = sub.add_parser("extract", help="extract poles and zeros from a sweep")
    add_input(e, "sweep CSV")
    add_extract_flags(e)
    e.add_argument("--out", required=True)

    c = sub.add_parser("compare", help="compare a report against a truth pole-zero set")
    add_input(c, "report JSON")
    c.add_argument("--truth", required=True)
    c.add_argument("--tolerance", type=float, default=None)
    c.add_argument("--out", required=True)

    pl = sub.add_parser("plot", help="draw a report's poles and zeros as SVG")
    add_input(pl, "report JSON")
    pl.add_argument("--out", required=True)

    pp = sub.add_parser("pipeline", help="normalize, extract, compare and report in one go")
    add_input(pp, "sweep CSV")
    add_extract_flags(pp)
    pp.add_argument("--truth")
    pp.add_argument("--tolerance", type=float, default=None)
    pp.add_argument("--out", required=True)
    pp.add_argument("--svg", help="also write a pole-zero plot")
    return p


def truth_path(out: str | Path) -> Path:
    """``data.csv`` -> ``data.truth.json``; other names get the suffix appended."""
    out = Path(out)
    stem = out.with_suffix("") if out.suffix.lower() == ".csv" else out
    return stem.with_name(stem.name + ".truth.json")


def _commit(outputs: dict[Path, str]) -> None:
    """Write all outputs atomically: temp files first, renames last."""
    staged: list[tuple[str, Path]] = []
    try:
        for dest, text in outputs.items():
            dest = Path(dest)
            fd, tmp = tempfile.mkstemp(dir=dest.parent or Path("."), prefix=f".{dest.name}.", suffix=".tmp")
            with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
            staged.append((tmp, dest))
    except BaseException:
        for tmp, _ in staged:
            os.unlink(tmp)
        raise
    for tmp, dest in staged:
        os.replace(tmp, dest)


def _read_text(path: str) -> str:
    with open(path, encoding="utf-8", newline="") as fh:
        return fh.read()


def _seed(arg: int | None) -> int:
    if arg is not None:
        return arg
    env = os.environ.get("PZX_SEED")
    if env:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"PZX_SEED must be an integer, got {env!r}") from None
    return 0


def _filter_spec(args) -> FilterSpec:
    if args.spec:
        if args.family:
            raise UsageError("use either --spec or --family, not both")
        return spec_from_dict(load_json(_read_text(args.spec)))
    if not args.family:
        raise UsageError("--family (or --spec) is required")
    try:
        family = parse_family(args.family)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    pz = None
    if args.pz_file:
        pz = pz_from_json(load_json(_read_text(args.pz_file)))
    elif family.value == "Custom":
        raise UsageError("--family custom requires --pz-file")
    spec = FilterSpec(family, R=args.r, C=args.c, w0=args.w0, q=args.q, custom_pz=pz)
    if family.order is not None:
        spec.corner  # raises MissingParameter when neither w0 nor R, C is given
    return spec


def cmd_generate(args) -> int:
    try:
        spec = _filter_spec(args)
        cfg = MeasurementConfig(
            adc_bits=args.adc_bits,
            v_ref=args.vref,
            full_scale_gain=args.full_scale,
            noise_sigma=args.noise,
            f2v_calibration=args.f2v,
            seed=_seed(args.seed),
            record_phase=args.phase,
        )
    except (MissingParameter, InvalidComponentValue) as exc:
        raise UsageError(str(exc)) from None
    except ReportError:
        raise
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    lo, hi, n = args.sweep
    tf = make_filter(spec)
    ds = simulate_sweep(tf, plan_sweep(lo, hi, n, args.spacing), cfg)
    truth = pz_to_json(truth_pz(spec))
    truth["family"] = spec.family.value
    _commit({Path(args.out): to_csv(ds), truth_path(args.out): dumps(truth) + "\n"})
    log.info("wrote %d samples to %s", len(ds), args.out)
    return 0


def _load_sweep(args):
    ds = parse_csv(_read_text(args.input), hz=args.hz)
    return normalize_gain(ds, ds.input_amplitude)


def cmd_fit(args) -> int:
    ds = _load_sweep(args)
    res = fit_model(ds, None if args.model == "auto" else args.model)
    _commit({Path(args.out): dumps({"fit": fit_to_json(res)}) + "\n"})
    return 0


def _extract(args):
    if args.strategy in ("rational", "magsq") and (args.num_deg is None or args.den_deg is None):
        raise UsageError(f"--strategy {args.strategy} needs --num-deg and --den-deg")
    ds = _load_sweep(args)
    if args.strategy == "auto" and ds.has_phase and (args.num_deg is None or args.den_deg is None):
        raise UsageError("phase-bearing input selects the rational path; give --num-deg and --den-deg")
    return extract_pipeline(ds, args.strategy, args.num_deg, args.den_deg, args.model)


def _compare(doc: dict, truth_file: str, tolerance: float | None) -> tuple[dict, int]:
    extracted = pz_from_json(doc)
    truth = pz_from_json(load_json(_read_text(truth_file)))
    cmp = compare_pz(extracted, truth, OMEGA_FLOOR)
    doc["comparison"] = comparison_to_json(cmp, tolerance)
    code = 3 if tolerance is not None and cmp.max_rel_error > tolerance else 0
    return doc, code


def cmd_extract(args) -> int:
    rep = _extract(args)
    _commit({Path(args.out): dumps(extraction_to_json(rep)) + "\n"})
    return 0


def cmd_compare(args) -> int:
    doc = load_json(_read_text(args.input))
    doc, code = _compare(doc, args.truth, args.tolerance)
    _commit({Path(args.out): dumps(doc) + "\n"})
    return code


def cmd_plot(args) -> int:
    doc = load_json(_read_text(args.input))
    if "poles" not in doc and "zeros" not in doc:
        raise ReportError("report holds no pole-zero set")
    _commit({Path(args.out): render_pz_svg(pz_from_json(doc))})
    return 0


def cmd_pipeline(args) -> int:
    rep = _extract(args)
    doc = extraction_to_json(rep)
    code = 0
    if args.truth:
        doc, code = _compare(doc, args.truth, args.tolerance)
    outputs = {Path(args.out): dumps(doc) + "\n"}
    if args.svg:
        outputs[Path(args.svg)] = render_pz_svg(rep.pz)
    _commit(outputs)
    for w in rep.warnings:
        log.warning("%s", w)
    return code


COMMANDS = {
    "generate": cmd_generate,
    "fit": cmd_fit,
    "extract": cmd_extract,
    "compare": cmd_compare,
    "plot": cmd_plot,
    "pipeline": cmd_pipeline,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="pzx: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"pzx {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"pzx {args.command}: error: {exc}", file=sys.stderr)
        return 1
    except (PZXError, ReportError, ValueError) as exc:
        print(f"pzx {args.command}: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        for kind, hint in HINTS.items():
            if isinstance(exc, kind):
                print(f"hint: {hint}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
