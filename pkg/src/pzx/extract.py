"""From fitted curves or raw sweeps to transfer functions and pole-zero sets.

Two families of paths exist:

* model paths linearize a fitted closed-form curve and read the real
  frequency axis directly as ``s`` (``ModelExp``, ``ModelGaussian``);
* rational paths identify ``H(s)`` properly on ``s = j*omega`` with an
  iteratively reweighted linear least-squares (Sanathanan-Koerner) scheme,
  either from complex data (``RationalComplex``) or from the squared
  magnitude followed by spectral factorization (``MagnitudeSquared``).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import (
    AllPassAmbiguity,
    DegenerateSlope,
    IllConditioned,
    InsufficientSamples,
    MissingParameter,
    MissingPhase,
    NonConvergent,
    NonDecayingTerm,
    NonPositiveParams,
    PeakTooBroad,
)
from .fitting import FitResult, ModelKind, fit as fit_model, parse_kind
from .measure import SweepDataset
from .tfcore import PoleZeroSet, Polynomial, RationalTF, poles_zeros, roots

OMEGA_FLOOR = 1.0
LINEARIZATION_LIMIT = 0.5
SK_MAX_ITER = 25
SK_TOL = 1e-10
SK_ACCEPT = 1e-6
ALLPASS_RTOL = 1e-3
SNAP_RTOL = 1e-13


class ExtractionWarning(UserWarning):
    pass


class Path(str, Enum):
    ModelExp = "ModelExp"
    ModelGaussian = "ModelGaussian"
    RationalComplex = "RationalComplex"
    MagnitudeSquared = "MagnitudeSquared"


@dataclass(frozen=True)
class ExtractionReport:
    tf: RationalTF
    pz: PoleZeroSet
    path: Path
    warnings: tuple[str, ...] = ()
    linearization_span: float | None = None
    fit: FitResult | None = None


@dataclass(frozen=True)
class ComparisonReport:
    pole_errors: tuple[float, ...]
    zero_errors: tuple[float, ...]
    max_rel_error: float
    unmatched_truth: int
    unmatched_extracted: int
    pole_pairs: tuple[tuple[complex, complex], ...] = field(default=(), repr=False)
    zero_pairs: tuple[tuple[complex, complex], ...] = field(default=(), repr=False)


# --- model paths -------------------------------------------------------------

def linearization_span(b: float, d: float, omega) -> float:
    """Largest |(b - d) * x| over the data window ``omega``."""
    w = np.asarray(omega, dtype=float)
    return float(np.max(np.abs((b - d) * w)))


def exp_to_rational(a: float, b: float, c: float, d: float) -> RationalTF:
    """Linearize ``a*exp(b x) + c*exp(d x)`` into a first-order rational function.

    Factoring out ``exp(d x)`` and replacing each remaining exponential by
    its first-order expansion gives::

        (a (b-d) x + (a+c)) / (1 - d x)

    and ``x`` is then read as ``s``.
    """
    vals = (a, b, c, d)
    if not all(math.isfinite(v) for v in vals):
        raise ValueError("exponential parameters must be finite")
    if d >= 0:
        raise NonDecayingTerm(f"second exponent must decay (d < 0), got d={d!r}")
    slope = a * (b - d)
    offset = a + c
    if abs(slope) <= 1e-300:
        if offset != 0:
            raise DegenerateSlope("numerator slope a*(b-d) vanishes")
        warnings.warn("numerator vanishes identically; returning the zero transfer function", ExtractionWarning)
        return RationalTF.from_coeffs([0.0], [1.0, -d])
    tf = RationalTF.from_coeffs([offset, slope], [1.0, -d])
    if tf.den.degree == 0:
        warnings.warn("pole and zero cancel; the linearized model is a constant", ExtractionWarning)
    return tf


def gaussian_to_rational(a: float, b: float, c: float, match: str = "center") -> RationalTF:
    """Band-pass biquad whose -3 dB bandwidth equals that of a Gaussian peak.

    The Gaussian ``a*exp(-((x-b)/c)**2)`` drops to ``a/sqrt(2)`` at
    ``|x - b| = c*sqrt(ln 2 / 2)``.  With ``match="center"`` the biquad is
    centred on ``b`` with that full width as bandwidth.  ``match="edges"``
    instead places both biquad -3 dB points exactly on ``b -/+`` the
    half-width (geometric centre ``sqrt(b^2 - half^2)``).
    """
    if not (a > 0 and c > 0) or not all(math.isfinite(v) for v in (a, b, c)):
        raise NonPositiveParams(f"need a > 0 and c > 0, got a={a!r}, c={c!r}")
    half = c * math.sqrt(math.log(2.0) / 2.0)
    if not b > 2.0 * half:
        raise PeakTooBroad(f"peak at {b!r} rad/s is within two half-widths ({half:.6g}) of zero")
    bw = 2.0 * half
    if match == "center":
        w0sq = b * b
    elif match == "edges":
        w0sq = (b - half) * (b + half)
    else:
        raise ValueError(f"unknown match mode {match!r}")
    return RationalTF.from_coeffs([0.0, a * bw], [w0sq, bw, 1.0])


# --- rational paths ----------------------------------------------------------

def _sk_iterate(z: np.ndarray, target: np.ndarray, m: int, n: int):
    """Sanathanan-Koerner iteration for ``N(z)/D(z) ~ target``, ``D(0) = 1``.

    ``z`` and ``target`` are real for the magnitude-squared path and complex
    otherwise (real and imaginary parts are then stacked).  Returns the
    numerator and denominator coefficients in the variable ``z``.
    """
    is_complex = np.iscomplexobj(z) or np.iscomplexobj(target)
    Vn = np.vander(z, m + 1, increasing=True)
    Vd = np.vander(z, n + 1, increasing=True)[:, 1:]
    A0 = np.hstack([Vn, -target[:, None] * Vd])
    weights = np.ones(z.size)
    theta = None
    change = math.inf
    for _ in range(SK_MAX_ITER):
        A = A0 * weights[:, None]
        rhs = target * weights
        if is_complex:
            A = np.vstack([A.real, A.imag])
            rhs = np.concatenate([rhs.real, rhs.imag])
        A = np.asarray(A, dtype=float)
        norms = np.linalg.norm(A, axis=0)
        if np.any(norms == 0) or not np.all(np.isfinite(A)):
            raise IllConditioned("least-squares system has an empty or non-finite column")
        sol, _, rank, _ = np.linalg.lstsq(A / norms, rhs, rcond=None)
        if rank < A.shape[1]:
            raise IllConditioned(f"least-squares system is rank deficient ({rank} < {A.shape[1]})")
        new = sol / norms
        if theta is not None:
            change = float(np.max(np.abs(new - theta)) / max(np.max(np.abs(new)), 1e-300))
        theta = new
        den = np.concatenate([[1.0], theta[m + 1 :]])
        dz = np.abs(P.polyval(z, den))
        if np.any(dz == 0) or not np.all(np.isfinite(dz)):
            raise IllConditioned("denominator vanishes at a sample point")
        weights = 1.0 / dz
        if change < SK_TOL:
            break
    num = _snap(theta[: m + 1], z)
    den = _snap(np.concatenate([[1.0], theta[m + 1 :]]), z)
    if change > SK_ACCEPT and n > 0:
        raise NonConvergent(
            f"reweighting did not settle after {SK_MAX_ITER} iterations (change {change:.3g})",
            last=(num, den),
            change=change,
        )
    return num, den


def _snap(c: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Zero coefficients whose largest term over ``z`` is invisible next to the polynomial's peak.

    Left in place, such round-off residue splits multiple roots at the
    origin by about sqrt(eps) times the frequency scale.
    """
    peak = float(np.max(np.abs(P.polyval(z, c))))
    reach = np.max(np.abs(z)) ** np.arange(c.size)
    out = c.copy()
    out[np.abs(c) * reach <= SNAP_RTOL * peak] = 0.0
    return out


def _check_degrees(ds: SweepDataset, m: int, n: int, n_max: int) -> None:
    if m is None or n is None:
        raise MissingParameter("numerator and denominator degrees are required")
    if not (0 <= m <= n <= n_max) or int(m) != m or int(n) != n:
        raise ValueError(f"need 0 <= m <= n <= {n_max}, got m={m}, n={n}")
    if len(ds) < m + n + 1:
        raise InsufficientSamples(f"{len(ds)} samples cannot determine {m + n + 1} coefficients")


def _unscale(c: np.ndarray, k: float) -> np.ndarray:
    return c / k ** np.arange(c.size)


def _warn_unstable(tf: RationalTF) -> None:
    if tf.den.degree and any(p.real >= 0 for p in roots(tf.den)):
        warnings.warn("fitted model has poles in the closed right half-plane", ExtractionWarning)


def fit_rational_complex(ds: SweepDataset, m: int, n: int) -> RationalTF:
    """Identify ``H(s)`` of numerator degree ``m``, denominator degree ``n`` from complex samples."""
    if not ds.has_phase:
        raise MissingPhase("complex fit needs phase for every sample")
    _check_degrees(ds, m, n, 10)
    k = float(np.median(ds.omega))
    s = 1j * ds.omega / k
    num, den = _sk_iterate(s, ds.response(), m, n)
    tf = RationalTF.from_coeffs(_unscale(num, k), _unscale(den, k))
    _warn_unstable(tf)
    return tf


def _left_half_roots(poly: np.ndarray) -> tuple[list[complex], list[str]]:
    """One root per root pair {r, -r} of ``poly(-s^2)``, chosen in Re(s) <= 0.

    ``poly`` is in ``u = omega^2``.  Positive real ``u`` roots are
    imaginary-axis roots; they must come in pairs and each pair yields one
    conjugate pair ``+/- j*sqrt(u)``.
    """
    notes: list[str] = []
    if Polynomial(poly).degree < 1:
        return [], notes
    out: list[complex] = []
    axis: list[float] = []
    for u in roots(Polynomial(poly)):
        if u.imag == 0 and u.real > 0:
            axis.append(u.real)
        elif u.imag == 0:
            out.append(complex(-math.sqrt(-u.real)))
        else:
            r = np.sqrt(-u)
            out.append(-r if r.real > 0 else r)
    axis.sort()
    for i in range(0, len(axis) - 1, 2):
        w = math.sqrt(0.5 * (axis[i] + axis[i + 1]))
        out += [1j * w, -1j * w]
    if len(axis) % 2:
        notes.append(f"unpaired imaginary-axis root at omega={math.sqrt(axis[-1]):.6g} rad/s dropped")
    return out, notes


def spectral_factor(p_u: np.ndarray, q_u: np.ndarray) -> RationalTF:
    """Stable minimum-phase ``H(s)`` with ``|H(j w)|^2 = p(w^2) / q(w^2)``."""
    zeros, zn = _left_half_roots(p_u)
    poles, pn = _left_half_roots(q_u)
    for note in zn + pn:
        warnings.warn(note, ExtractionWarning)
    lp = Polynomial(p_u).lead
    lq = Polynomial(q_u).lead
    if lp / lq < 0:
        warnings.warn("squared-magnitude fit has negative leading ratio", ExtractionWarning)
    gain = math.sqrt(abs(lp / lq))
    return RationalTF(Polynomial.from_roots(zeros, gain), Polynomial.from_roots(poles, 1.0))


def fit_magnitude_squared(ds: SweepDataset, m: int, n: int) -> RationalTF:
    """Magnitude-only identification via a rational fit of ``|H|^2`` in ``omega^2``."""
    _check_degrees(ds, m, n, 5)
    g = ds.magnitude**2
    c = float(np.mean(g))
    gnorm = float(np.linalg.norm(g))
    if gnorm == 0 or float(np.linalg.norm(g - c)) / gnorm < ALLPASS_RTOL:
        raise AllPassAmbiguity("magnitude is flat: all-pass and constant gain are indistinguishable without phase")
    k = float(np.median(ds.omega))
    u = (ds.omega / k) ** 2
    p, q = _sk_iterate(u, g, m, n)
    tf = spectral_factor(_unscale(p, k * k), _unscale(q, k * k))
    return tf


# --- pipeline ----------------------------------------------------------------

def _canonical_exp(params: Sequence[float]) -> tuple[float, float, float, float]:
    # the model is symmetric under swapping its terms; keep the faster decay second
    a, b, c, d = params
    if b < d:
        a, b, c, d = c, d, a, b
    return a, b, c, d


def extract_pipeline(
    ds: SweepDataset,
    strategy: str = "auto",
    m: int | None = None,
    n: int | None = None,
    model: str | ModelKind | None = "auto",
) -> ExtractionReport:
    """Run one extraction strategy end to end."""
    if strategy not in ("auto", "model", "rational", "magsq"):
        raise ValueError(f"unknown strategy {strategy!r}")
    if strategy == "auto":
        strategy = "rational" if ds.has_phase else "model"

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", ExtractionWarning)
        span = None
        fit_result = None
        if strategy == "rational":
            tf = fit_rational_complex(ds, m, n)
            path = Path.RationalComplex
        elif strategy == "magsq":
            tf = fit_magnitude_squared(ds, m, n)
            path = Path.MagnitudeSquared
        else:
            fit_result = fit_model(ds, None if model in (None, "auto") else parse_kind(model))
            if fit_result.model.kind is ModelKind.TwoTermExp:
                a, b, c, d = _canonical_exp(fit_result.model.params)
                tf = exp_to_rational(a, b, c, d)
                span = linearization_span(b, d, ds.omega)
                if span > LINEARIZATION_LIMIT:
                    warnings.warn(
                        f"linearization span {span:.3g} exceeds {LINEARIZATION_LIMIT}; "
                        "exp(u) ~ 1 + u is used far outside its validity range",
                        ExtractionWarning,
                    )
                path = Path.ModelExp
            else:
                tf = gaussian_to_rational(*fit_result.model.params)
                path = Path.ModelGaussian
            if not fit_result.converged:
                warnings.warn("model fit did not converge", ExtractionWarning)
    msgs = tuple(str(w.message) for w in caught if issubclass(w.category, ExtractionWarning))
    for w in caught:
        if not issubclass(w.category, ExtractionWarning):
            warnings.warn_explicit(w.message, w.category, w.filename, w.lineno)
    return ExtractionReport(tf, poles_zeros(tf), path, msgs, span, fit_result)


# --- comparison --------------------------------------------------------------

def _match(extracted: Sequence[complex], truth: Sequence[complex], floor: float):
    ext = [complex(v) for v in extracted]
    tru = [complex(v) for v in truth]
    pairs: list[tuple[complex, complex]] = []
    errors: list[float] = []
    if ext and tru:
        E = np.array(ext)[:, None]
        T = np.array(tru)[None, :]
        dist = np.abs(E - T) / np.maximum(np.maximum(np.abs(E), np.abs(T)), floor)
        used_e: set[int] = set()
        used_t: set[int] = set()
        order = np.argsort(dist, axis=None, kind="stable")
        for flat in order:
            i, j = divmod(int(flat), len(tru))
            if i in used_e or j in used_t:
                continue
            used_e.add(i)
            used_t.add(j)
            pairs.append((ext[i], tru[j]))
            errors.append(float(dist[i, j]))
            if len(used_e) == len(ext) or len(used_t) == len(tru):
                break
    n_match = len(pairs)
    return pairs, errors, len(tru) - n_match, len(ext) - n_match


def compare_pz(extracted: PoleZeroSet, truth: PoleZeroSet, omega_floor: float = OMEGA_FLOOR) -> ComparisonReport:
    """Greedy nearest-neighbour matching of poles to poles and zeros to zeros.

    Distances are ``|x - t| / max(|x|, |t|, omega_floor)``; the floor keeps
    roots at the origin comparable.
    """
    pp, pe, put, pue = _match(extracted.poles, truth.poles, omega_floor)
    zp, ze, zut, zue = _match(extracted.zeros, truth.zeros, omega_floor)
    worst = max(pe + ze, default=0.0)
    return ComparisonReport(tuple(pe), tuple(ze), worst, put + zut, pue + zue, tuple(pp), tuple(zp))
