"""Real polynomials, rational transfer functions and their pole-zero sets.

Coefficient arrays are stored in ascending powers throughout: ``coeffs[k]``
multiplies ``s**k``.  All objects are immutable, so every function here is
safe to call concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import DegreeZero, EvaluationAtPole, UnpairedComplexRoot, ZeroPolynomial

#: |den(s)| below this is treated as a pole hit.
EVAL_FLOOR = 1e-300
#: relative tolerance for pairing conjugate roots
PAIR_RTOL = 1e-9
#: relative tolerance (w.r.t. the largest root) for pole-zero cancellation
CANCEL_RTOL = 1e-9


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


class Polynomial:
    """Real polynomial with ascending coefficients.

    Trailing (highest-power) zeros are stripped, so ``degree`` is exact.
    The zero polynomial is stored as ``[0.0]``.
    """

    __slots__ = ("_c",)

    def __init__(self, coeffs: Iterable[float]):
        c = np.atleast_1d(np.asarray(list(coeffs) if not isinstance(coeffs, np.ndarray) else coeffs))
        if np.iscomplexobj(c):
            if np.any(c.imag != 0):
                raise ValueError("polynomial coefficients must be real")
            c = c.real
        c = np.asarray(c, dtype=float).ravel()
        if c.size == 0:
            raise ValueError("polynomial needs at least one coefficient")
        if not np.all(np.isfinite(c)):
            raise ValueError("polynomial coefficients must be finite")
        nz = np.flatnonzero(c)
        c = c[: nz[-1] + 1] if nz.size else np.zeros(1)
        self._c = _frozen(c)

    @property
    def coeffs(self) -> np.ndarray:
        return self._c

    @property
    def degree(self) -> int:
        return len(self._c) - 1

    @property
    def is_zero(self) -> bool:
        return len(self._c) == 1 and self._c[0] == 0.0

    @property
    def lead(self) -> float:
        return float(self._c[-1])

    def __call__(self, x):
        return P.polyval(x, self._c)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Polynomial):
            return NotImplemented
        return np.array_equal(self._c, other._c)

    def __hash__(self) -> int:
        return hash(self._c.tobytes())

    def __repr__(self) -> str:
        return f"Polynomial({self._c.tolist()!r})"

    def __mul__(self, other: Polynomial | float) -> Polynomial:
        if isinstance(other, Polynomial):
            return Polynomial(P.polymul(self._c, other._c))
        return Polynomial(self._c * float(other))

    __rmul__ = __mul__

    def __truediv__(self, k: float) -> Polynomial:
        return Polynomial(self._c / float(k))

    @classmethod
    def from_roots(cls, rts: Sequence[complex], lead: float = 1.0) -> Polynomial:
        """Expand ``lead * prod(s - r)`` with real arithmetic.

        Non-real roots must come in conjugate pairs.
        """
        real, pairs = _pair_roots(rts)
        c = np.array([float(lead)])
        for r in real:
            c = P.polymul(c, [-r, 1.0])
        for re, im in pairs:
            c = P.polymul(c, [re * re + im * im, -2.0 * re, 1.0])
        return cls(c)


def _pair_roots(rts: Sequence[complex], rtol: float = PAIR_RTOL):
    """Split roots into real values and (re, |im|) conjugate pairs.

    Raises UnpairedComplexRoot when a non-real root has no conjugate partner.
    """
    rts = [complex(r) for r in rts]
    real: list[float] = []
    upper: list[complex] = []
    lower: list[complex] = []
    for r in rts:
        if abs(r.imag) <= rtol * abs(r):
            real.append(r.real)
        elif r.imag > 0:
            upper.append(r)
        else:
            lower.append(r)
    if len(upper) != len(lower):
        raise UnpairedComplexRoot(f"{len(upper)} upper vs {len(lower)} lower half-plane roots")
    pairs: list[tuple[float, float]] = []
    remaining = list(lower)
    for u in sorted(upper, key=lambda z: (z.real, z.imag)):
        dist = [abs(v - u.conjugate()) for v in remaining]
        k = int(np.argmin(dist))
        if dist[k] > rtol * abs(u):
            raise UnpairedComplexRoot(f"root {u} has no conjugate partner")
        v = remaining.pop(k)
        pairs.append(((u.real + v.real) / 2.0, (u.imag - v.imag) / 2.0))
    return real, pairs


def _sort_roots(rts) -> list[complex]:
    return sorted((complex(r) for r in rts), key=lambda z: (z.real, z.imag))


def _newton_polish(c: np.ndarray, r: np.ndarray) -> np.ndarray:
    """One safeguarded Newton step per root."""
    dc = P.polyder(c)
    with np.errstate(all="ignore"):
        pv = P.polyval(r, c)
        dv = P.polyval(r, dc)
        ok = (dv != 0) & np.isfinite(dv) & np.isfinite(pv)
        cand = r[ok] - pv[ok] / dv[ok]
        better = np.abs(P.polyval(cand, c)) < np.abs(pv[ok])
    out = r.copy()
    idx = np.flatnonzero(ok)[better]
    out[idx] = cand[better]
    return out


def roots(p: Polynomial) -> list[complex]:
    """All ``p.degree`` roots of ``p``, with multiplicity.

    Companion-matrix eigenvalues followed by one Newton polish step per
    root.  Conjugate pairs are returned as exact conjugates.
    """
    if p.is_zero:
        raise ZeroPolynomial("the zero polynomial has no finite root set")
    if p.degree == 0:
        raise DegreeZero("constant polynomial has no roots")
    c = p.coeffs
    n_origin = int(np.flatnonzero(c)[0])
    c = c[n_origin:]
    n = len(c) - 1
    found = np.zeros(0, dtype=complex)
    if n > 0:
        comp = np.zeros((n, n))
        comp[1:, :-1] = np.eye(n - 1)
        with np.errstate(over="ignore"):
            comp[:, -1] = -c[:-1] / c[-1]
        if not np.all(np.isfinite(comp)):
            raise ValueError("coefficient range overflows the companion matrix")
        ev = np.linalg.eigvals(comp).astype(complex)
        upper = ev[ev.imag > 0]
        lower = ev[ev.imag < 0]
        real = ev[ev.imag == 0].real
        if len(upper) == len(lower):
            upper = _newton_polish(c, upper)
            real = _newton_polish(c, real.astype(complex)).real
            found = np.concatenate([real.astype(complex), upper, np.conj(upper)])
        else:  # pragma: no cover - LAPACK returns conjugate-closed spectra for real input
            found = _newton_polish(c, ev)
    return [0j] * n_origin + _sort_roots(found)


@dataclass(frozen=True, eq=False)
class RationalTF:
    """H(s) = num(s) / den(s), canonicalized on construction.

    The denominator is made monic (gain absorbed into the numerator) and
    roots shared by numerator and denominator, within ``CANCEL_RTOL`` times
    the largest root magnitude, are cancelled.
    """

    num: Polynomial
    den: Polynomial
    reduced: bool = field(default=True, repr=False)

    def __post_init__(self):
        num = self.num if isinstance(self.num, Polynomial) else Polynomial(self.num)
        den = self.den if isinstance(self.den, Polynomial) else Polynomial(self.den)
        if den.is_zero:
            raise ZeroPolynomial("denominator is identically zero")
        lead = den.lead
        num, den = num / lead, den / lead
        if self.reduced:
            num, den = _cancel_common(num, den)
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    @classmethod
    def from_coeffs(cls, num: Iterable[float], den: Iterable[float]) -> RationalTF:
        return cls(Polynomial(num), Polynomial(den))

    @property
    def order(self) -> int:
        return max(self.num.degree, self.den.degree)

    def __call__(self, s):
        return eval_tf(self, s)

    def __eq__(self, other) -> bool:
        if not isinstance(other, RationalTF):
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self) -> int:
        return hash((self.num, self.den))


def _cancel_common(num: Polynomial, den: Polynomial) -> tuple[Polynomial, Polynomial]:
    if num.is_zero or num.degree == 0 or den.degree == 0:
        return num, den
    zs = roots(num)
    ps = roots(den)
    tol = CANCEL_RTOL * max(abs(r) for r in zs + ps)
    keep_z = list(zs)
    keep_p = list(ps)
    cancelled = False
    while keep_z and keep_p:
        d = np.abs(np.subtract.outer(np.array(keep_z), np.array(keep_p)))
        i, j = np.unravel_index(int(np.argmin(d)), d.shape)
        if d[i, j] > tol:
            break
        keep_z.pop(i)
        keep_p.pop(j)
        cancelled = True
    if not cancelled:
        return num, den
    return Polynomial.from_roots(keep_z, num.lead), Polynomial.from_roots(keep_p, 1.0)


@dataclass(frozen=True)
class PoleZeroSet:
    """Poles and zeros (rad/s) plus the numerator's leading coefficient."""

    poles: tuple[complex, ...] = ()
    zeros: tuple[complex, ...] = ()
    gain: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "poles", tuple(_sort_roots(self.poles)))
        object.__setattr__(self, "zeros", tuple(_sort_roots(self.zeros)))
        object.__setattr__(self, "gain", float(self.gain))

    @property
    def is_stable(self) -> bool:
        return all(p.real < 0 for p in self.poles)


def eval_tf(tf: RationalTF, s):
    """Evaluate ``tf`` at complex frequency ``s`` (scalar or array)."""
    s = np.asarray(s, dtype=complex)
    d = tf.den(s)
    if np.any(np.abs(d) < EVAL_FLOOR):
        raise EvaluationAtPole(f"denominator vanishes at s={s}")
    out = tf.num(s) / d
    return complex(out) if out.ndim == 0 else out


def poles_zeros(tf: RationalTF) -> PoleZeroSet:
    """Factor ``tf`` into poles, zeros and gain (leading numerator coefficient)."""
    poles = roots(tf.den) if tf.den.degree > 0 else []
    if tf.num.is_zero:
        return PoleZeroSet(poles, (), 0.0)
    zeros = roots(tf.num) if tf.num.degree > 0 else []
    return PoleZeroSet(poles, zeros, tf.num.lead)


def from_pole_zero(pz: PoleZeroSet) -> RationalTF:
    """Rebuild the real-coefficient transfer function ``gain * prod(s-z) / prod(s-p)``."""
    num = Polynomial.from_roots(pz.zeros, pz.gain)
    den = Polynomial.from_roots(pz.poles, 1.0)
    return RationalTF(num, den, reduced=False)
