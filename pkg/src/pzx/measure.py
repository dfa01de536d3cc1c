"""Frequency sweeps: planning, simulated acquisition and CSV exchange.

The acquisition model stands in for a bench rig of signal source, ADC and
frequency-to-voltage converter.  Gains are multiplied by Gaussian relative
noise, mapped to volts, clamped to the ADC reference and quantized.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import asdict, dataclass, replace
from typing import Iterable, Iterator, Literal, TextIO

import numpy as np

from .errors import (
    DuplicateFrequency,
    EmptyDataset,
    EvaluationAtPole,
    InvalidDataset,
    InvalidRange,
    MalformedHeader,
    NonNumericField,
    NonPositiveAmplitude,
    PoleOnAxis,
    SaturatedSweep,
)
from .tfcore import RationalTF, eval_tf

HEADER = "omega_rad_s,magnitude"
HEADER_PHASE = "omega_rad_s,magnitude,phase_rad"
SATURATION_LIMIT = 0.5


@dataclass(frozen=True)
class MeasurementConfig:
    adc_bits: int = 10
    v_ref: float = 5.0
    full_scale_gain: float = 5.0
    noise_sigma: float = 0.0
    f2v_calibration: float = 1.0
    seed: int = 0
    record_phase: bool = False

    def __post_init__(self):
        if not (1 <= int(self.adc_bits) <= 24) or int(self.adc_bits) != self.adc_bits:
            raise ValueError(f"adc_bits must be an integer in [1, 24], got {self.adc_bits!r}")
        if not self.v_ref > 0:
            raise ValueError("v_ref must be positive")
        if not self.full_scale_gain > 0:
            raise ValueError("full_scale_gain must be positive")
        if not 0 <= self.noise_sigma < 0.5:
            raise ValueError("noise_sigma must lie in [0, 0.5)")
        if not self.f2v_calibration > 0:
            raise ValueError("f2v_calibration must be positive")

    @property
    def lsb_gain(self) -> float:
        """One ADC step expressed in gain units."""
        return (self.v_ref / self.full_scale_gain) / (2**self.adc_bits - 1)


@dataclass(frozen=True)
class FrequencySample:
    omega: float
    magnitude: float
    phase: float | None = None


@dataclass(frozen=True, eq=False)
class SweepDataset:
    """Magnitude (and optionally phase) response sampled at ascending ``omega``.

    ``meta`` is the MeasurementConfig that produced the data, or the string
    ``"ingested"`` for data read from a file.
    """

    omega: np.ndarray
    magnitude: np.ndarray
    phase: np.ndarray | None = None
    meta: MeasurementConfig | str = "ingested"
    input_amplitude: float = 1.0

    def __post_init__(self):
        w = np.array(self.omega, dtype=float).ravel()
        m = np.array(self.magnitude, dtype=float).ravel()
        if w.shape != m.shape:
            raise InvalidDataset("omega and magnitude lengths differ")
        if w.size < 2:
            raise InvalidDataset("a sweep needs at least 2 samples")
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise InvalidDataset("omega must be finite and positive")
        if np.any(np.diff(w) <= 0):
            raise InvalidDataset("omega must be strictly increasing")
        if not np.all(np.isfinite(m)) or np.any(m < 0):
            raise InvalidDataset("magnitude must be finite and non-negative")
        ph = None
        if self.phase is not None:
            ph = np.array(self.phase, dtype=float).ravel()
            if ph.shape != w.shape:
                raise InvalidDataset("phase length differs from omega")
            if not np.all(np.isfinite(ph)) or np.any(ph <= -math.pi) or np.any(ph > math.pi):
                raise InvalidDataset("phase must lie in (-pi, pi]")
            ph.setflags(write=False)
        if not (self.input_amplitude > 0 and math.isfinite(self.input_amplitude)):
            raise NonPositiveAmplitude("input_amplitude must be positive")
        w.setflags(write=False)
        m.setflags(write=False)
        object.__setattr__(self, "omega", w)
        object.__setattr__(self, "magnitude", m)
        object.__setattr__(self, "phase", ph)
        object.__setattr__(self, "input_amplitude", float(self.input_amplitude))

    def __len__(self) -> int:
        return self.omega.size

    @property
    def has_phase(self) -> bool:
        return self.phase is not None

    @property
    def samples(self) -> list[FrequencySample]:
        ph = self.phase if self.phase is not None else [None] * len(self)
        return [
            FrequencySample(float(w), float(m), None if p is None else float(p))
            for w, m, p in zip(self.omega, self.magnitude, ph)
        ]

    def response(self) -> np.ndarray:
        """Complex response ``magnitude * exp(j*phase)``."""
        if self.phase is None:
            raise ValueError("dataset has no phase")
        return self.magnitude * np.exp(1j * self.phase)

    def same_data(self, other: SweepDataset) -> bool:
        if self.has_phase != other.has_phase:
            return False
        return (
            np.array_equal(self.omega, other.omega)
            and np.array_equal(self.magnitude, other.magnitude)
            and (self.phase is None or np.array_equal(self.phase, other.phase))
            and self.input_amplitude == other.input_amplitude
        )

    @classmethod
    def from_samples(
        cls, samples: Iterable[FrequencySample], meta: MeasurementConfig | str = "ingested", input_amplitude: float = 1.0
    ) -> SweepDataset:
        samples = list(samples)
        phases = [s.phase for s in samples]
        phase = None if all(p is None for p in phases) else phases
        return cls([s.omega for s in samples], [s.magnitude for s in samples], phase, meta, input_amplitude)


def wrap_phase(phi):
    """Map angles into (-pi, pi]."""
    phi = np.asarray(phi, dtype=float)
    out = np.angle(np.exp(1j * phi))
    return np.where(out <= -math.pi, math.pi, out)


def plan_sweep(w_min: float, w_max: float, n: int, spacing: Literal["log", "linear"] = "log") -> np.ndarray:
    """``n`` ascending frequencies from ``w_min`` to ``w_max`` inclusive."""
    if not (math.isfinite(w_min) and math.isfinite(w_max)) or not (0 < w_min < w_max):
        raise InvalidRange(f"need 0 < w_min < w_max, got ({w_min}, {w_max})")
    if int(n) != n or n < 2:
        raise InvalidRange(f"need at least 2 points, got {n}")
    if spacing == "log":
        w = np.geomspace(w_min, w_max, int(n))
    elif spacing == "linear":
        w = np.linspace(w_min, w_max, int(n))
    else:
        raise InvalidRange(f"unknown spacing {spacing!r}")
    w[0], w[-1] = w_min, w_max
    if np.any(np.diff(w) <= 0):
        raise InvalidRange("range too narrow for the requested point count")
    return w


def simulate_sweep(tf: RationalTF, plan, cfg: MeasurementConfig | None = None) -> SweepDataset:
    """Record |H(jw)| through the simulated acquisition chain.

    Deterministic for a given ``cfg.seed``; each call owns its generator.
    """
    cfg = cfg or MeasurementConfig()
    w = np.asarray(plan, dtype=float)
    if w.ndim != 1 or w.size < 2 or np.any(np.diff(w) <= 0) or np.any(w <= 0):
        raise InvalidRange("plan must be strictly increasing positive frequencies")

    s = 1j * w
    den = tf.den(s)
    scale = np.polynomial.polynomial.polyval(w, np.abs(tf.den.coeffs))
    if np.any(np.abs(den) <= 1e-12 * scale):
        raise PoleOnAxis("transfer function has a pole on the imaginary axis at a planned frequency")
    try:
        h = eval_tf(tf, s)
    except EvaluationAtPole as exc:
        raise PoleOnAxis(str(exc)) from exc

    gain = np.abs(h)
    rng = np.random.default_rng(cfg.seed)
    eps = rng.normal(0.0, cfg.noise_sigma, size=w.size)
    noisy = np.maximum(gain * (1.0 + eps), 0.0)

    top = 2**cfg.adc_bits - 1
    volts = noisy * cfg.full_scale_gain
    raw_codes = np.rint(volts / cfg.v_ref * top)
    saturated = int(np.count_nonzero(raw_codes > top))
    if saturated > SATURATION_LIMIT * w.size:
        raise SaturatedSweep(f"{saturated} of {w.size} samples clip at v_ref={cfg.v_ref} V")
    codes = np.rint(np.clip(volts, 0.0, cfg.v_ref) / cfg.v_ref * top)
    magnitude = codes * cfg.v_ref / top / cfg.full_scale_gain

    phase = wrap_phase(np.angle(h)) if cfg.record_phase else None
    return SweepDataset(w * cfg.f2v_calibration, magnitude, phase, cfg, 1.0)


def exact_sweep(tf: RationalTF, plan, phase: bool = True) -> SweepDataset:
    """Unquantized, noise-free samples of ``tf`` (for reference fits)."""
    w = np.asarray(plan, dtype=float)
    h = eval_tf(tf, 1j * w)
    return SweepDataset(w, np.abs(h), wrap_phase(np.angle(h)) if phase else None, "exact", 1.0)


def normalize_gain(ds: SweepDataset, input_amplitude: float) -> SweepDataset:
    """Divide magnitudes by the drive amplitude, giving a dimensionless gain."""
    if not (input_amplitude > 0 and math.isfinite(input_amplitude)):
        raise NonPositiveAmplitude(f"input amplitude must be positive, got {input_amplitude!r}")
    if input_amplitude == 1.0 and ds.input_amplitude == 1.0:
        return ds
    return replace(ds, magnitude=ds.magnitude / input_amplitude, input_amplitude=1.0)


# --- CSV exchange -----------------------------------------------------------

def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_csv(ds: SweepDataset, fh: TextIO) -> None:
    fh.write(f"# input_amplitude={_fmt(ds.input_amplitude)}\n")
    if isinstance(ds.meta, MeasurementConfig):
        fh.write(f"# config={json.dumps(asdict(ds.meta), sort_keys=True)}\n")
    fh.write((HEADER_PHASE if ds.has_phase else HEADER) + "\n")
    for smp in ds.samples:
        row = [_fmt(smp.omega), _fmt(smp.magnitude)]
        if smp.phase is not None:
            row.append(_fmt(smp.phase))
        fh.write(",".join(row) + "\n")


def to_csv(ds: SweepDataset) -> str:
    buf = io.StringIO()
    write_csv(ds, buf)
    return buf.getvalue()


def _lines(src: TextIO | str) -> Iterator[str]:
    text = src if isinstance(src, str) else src.read()
    for line in text.split("\n"):
        yield line[:-1] if line.endswith("\r") else line


def _number(tok: str, lineno: int) -> float:
    tok = tok.strip()
    try:
        v = float(tok)
    except ValueError:
        raise NonNumericField(lineno, tok) from None
    if not math.isfinite(v) or tok.lower().lstrip("+-") in ("inf", "infinity", "nan"):
        raise NonNumericField(lineno, tok)
    return v


def parse_csv(src: TextIO | str, hz: bool = False) -> SweepDataset:
    """Read a sweep from CSV text or a text stream.

    ``hz=True`` treats the first column as Hz and converts it to rad/s.
    """
    amplitude = 1.0
    meta: MeasurementConfig | str = "ingested"
    header = None
    rows: list[tuple[float, float, float | None]] = []
    for lineno, line in enumerate(_lines(src), start=1):
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            body = stripped[1:].strip()
            if body.startswith("input_amplitude="):
                amplitude = _number(body.split("=", 1)[1], lineno)
            elif body.startswith("config="):
                try:
                    meta = MeasurementConfig(**json.loads(body.split("=", 1)[1]))
                except (ValueError, TypeError):
                    meta = "ingested"
            continue
        if header is None:
            if stripped.replace(" ", "") not in (HEADER, HEADER_PHASE):
                raise MalformedHeader(f"expected {HEADER!r}[,phase_rad], got {stripped!r}")
            header = stripped.replace(" ", "")
            continue
        fields = stripped.split(",")
        ncol = 3 if header == HEADER_PHASE else 2
        if len(fields) != ncol:
            raise NonNumericField(lineno, stripped)
        vals = [_number(f, lineno) for f in fields]
        rows.append((vals[0], vals[1], vals[2] if ncol == 3 else None))
    if header is None:
        raise MalformedHeader("missing header line")
    if not rows:
        raise EmptyDataset("no data rows")
    rows.sort(key=lambda r: r[0])
    for prev, cur in zip(rows, rows[1:]):
        if prev[0] == cur[0]:
            raise DuplicateFrequency(cur[0])
    w = np.array([r[0] for r in rows])
    if hz:
        w = w * 2.0 * math.pi
    mag = [r[1] for r in rows]
    phase = [r[2] for r in rows] if header == HEADER_PHASE else None
    if len(rows) < 2:
        raise InvalidDataset("a sweep needs at least 2 samples")
    return SweepDataset(w, mag, phase, meta, amplitude)
