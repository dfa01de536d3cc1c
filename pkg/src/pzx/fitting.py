"""Closed-form response models and a Levenberg-Marquardt fitter.

Two model families are supported:

* ``TwoTermExp``: ``y = a*exp(b*x) + c*exp(d*x)``
* ``Gaussian``:   ``y = a*exp(-((x - b)/c)**2)``

``x`` is angular frequency in rad/s.  Fits run on frequencies divided by
the median sample frequency, which keeps exponents near unity; parameters
are reported in the original units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import DegenerateDataset, NonFiniteResidual, Overflow, SingularNormalEquations
from .measure import SweepDataset

MAX_EXPONENT = 700.0


class ModelKind(str, Enum):
    TwoTermExp = "TwoTermExp"
    Gaussian = "Gaussian"

    @property
    def n_params(self) -> int:
        return 4 if self is ModelKind.TwoTermExp else 3


MODEL_ALIASES = {"exp2": ModelKind.TwoTermExp, "gauss1": ModelKind.Gaussian}


def parse_kind(name: str | ModelKind) -> ModelKind:
    if isinstance(name, ModelKind):
        return name
    if name in MODEL_ALIASES:
        return MODEL_ALIASES[name]
    return ModelKind(name)


@dataclass(frozen=True)
class FitModel:
    kind: ModelKind
    params: tuple[float, ...]

    def __post_init__(self):
        kind = parse_kind(self.kind)
        params = tuple(float(p) for p in self.params)
        if len(params) != kind.n_params:
            raise ValueError(f"{kind.value} takes {kind.n_params} parameters, got {len(params)}")
        if not all(math.isfinite(p) for p in params):
            raise ValueError("model parameters must be finite")
        if kind is ModelKind.Gaussian and params[2] <= 0:
            raise ValueError("Gaussian width c must be positive")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "params", params)

    def __call__(self, x):
        return model_eval(self, x)


@dataclass(frozen=True)
class FitOptions:
    max_iterations: int = 200
    lambda0: float = 1e-3
    sse_rtol: float = 1e-12
    step_rtol: float = 1e-10
    rescale: bool = True


@dataclass(frozen=True)
class FitResult:
    model: FitModel
    rmse: float
    r_squared: float
    iterations: int
    converged: bool
    sse_history: tuple[float, ...] = field(default=(), repr=False)


def _exp(arg: np.ndarray) -> np.ndarray:
    if np.any(arg > MAX_EXPONENT):
        raise Overflow(f"exponent {float(np.max(arg)):.4g} exceeds {MAX_EXPONENT}")
    return np.exp(arg)


def _eval(kind: ModelKind, p: Sequence[float], x: np.ndarray) -> np.ndarray:
    if kind is ModelKind.TwoTermExp:
        a, b, c, d = p
        return a * _exp(b * x) + c * _exp(d * x)
    a, b, c = p
    return a * np.exp(-(((x - b) / c) ** 2))


def _jac(kind: ModelKind, p: Sequence[float], x: np.ndarray) -> np.ndarray:
    if kind is ModelKind.TwoTermExp:
        a, b, c, d = p
        eb = _exp(b * x)
        ed = _exp(d * x)
        return np.column_stack([eb, a * x * eb, ed, c * x * ed])
    a, b, c = p
    u = (x - b) / c
    g = np.exp(-(u**2))
    return np.column_stack([g, a * g * 2 * u / c, a * g * 2 * u**2 / c])


def model_eval(model: FitModel, x):
    """Evaluate the model at ``x`` (rad/s). Raises Overflow past exp(700)."""
    x = np.asarray(x, dtype=float)
    return _eval(model.kind, model.params, x)


def model_jacobian(model: FitModel, x) -> np.ndarray:
    """Analytic partial derivatives, shape ``(len(x), n_params)``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return _jac(model.kind, model.params, x)


def _to_scaled(kind: ModelKind, p: Sequence[float], k: float) -> np.ndarray:
    p = np.array(p, dtype=float)
    if kind is ModelKind.TwoTermExp:
        p[[1, 3]] *= k
    else:
        p[[1, 2]] /= k
    return p


def _from_scaled(kind: ModelKind, p: np.ndarray, k: float) -> np.ndarray:
    p = np.array(p, dtype=float)
    if kind is ModelKind.TwoTermExp:
        p[[1, 3]] /= k
    else:
        p[[1, 2]] *= k
        p[2] = abs(p[2])
    return p


def _sse(kind, p, x, y) -> float:
    try:
        r = y - _eval(kind, p, x)
    except Overflow:
        return math.inf
    if kind is ModelKind.Gaussian and p[2] <= 0:
        return math.inf
    with np.errstate(over="ignore", invalid="ignore"):
        v = float(r @ r)
    return v if math.isfinite(v) else math.inf


def lm_fit(kind, ds: SweepDataset, init: Sequence[float], opts: FitOptions | None = None) -> FitResult:
    """Damped least-squares fit of ``kind`` to the magnitudes in ``ds``.

    Marquardt damping ``lambda * diag(J^T J)``; lambda starts at
    ``opts.lambda0``, is multiplied by 10 after a rejected step and divided
    by 10 after an accepted one.  Every accepted step strictly lowers the
    sum of squared residuals.
    """
    kind = parse_kind(kind)
    opts = opts or FitOptions()
    x = np.asarray(ds.omega, dtype=float)
    y = np.asarray(ds.magnitude, dtype=float)
    if x.size < kind.n_params:
        raise DegenerateDataset(f"need at least {kind.n_params} samples, got {x.size}")
    if len(init) != kind.n_params or not all(math.isfinite(v) for v in init):
        raise ValueError("init must hold finite values, one per parameter")

    k = float(np.median(x)) if opts.rescale else 1.0
    xs = x / k
    theta = _to_scaled(kind, init, k)

    try:
        r = y - _eval(kind, theta, xs)
    except Overflow as exc:
        raise NonFiniteResidual(f"initial model overflows: {exc}") from exc
    if not np.all(np.isfinite(r)):
        raise NonFiniteResidual("non-finite residual at the initial point")
    sse = float(r @ r)
    history = [sse]
    lam = opts.lambda0
    iterations = 0
    converged = sse == 0.0

    while not converged and iterations < opts.max_iterations:
        J = _jac(kind, theta, xs)
        JTJ = J.T @ J
        g = J.T @ r
        diag = np.diag(JTJ).copy()
        if not np.all(np.isfinite(JTJ)) or diag.max() <= 0:
            raise SingularNormalEquations("Jacobian vanishes at the current point")
        diag = np.maximum(diag, 1e-15 * diag.max())

        accepted = False
        while True:
            try:
                step = np.linalg.solve(JTJ + lam * np.diag(diag), g)
            except np.linalg.LinAlgError:
                step = None
            if step is None or not np.all(np.isfinite(step)):
                lam *= 10.0
                if lam > 1e30:
                    raise SingularNormalEquations("normal equations stay singular under maximal damping")
                continue
            step_rel = float(np.linalg.norm(step) / max(np.linalg.norm(theta), 1e-300))
            if step_rel < opts.step_rtol:
                converged = True
                break
            trial = theta + step
            sse_t = _sse(kind, trial, xs, y)
            if sse_t < sse:
                accepted = True
                lam = max(lam / 10.0, 1e-300)
                break
            lam *= 10.0
            if lam > 1e30:
                break

        if not accepted:
            break
        iterations += 1
        decrease = (sse - sse_t) / sse
        theta, sse = trial, sse_t
        r = y - _eval(kind, theta, xs)
        history.append(sse)
        if sse == 0.0 or decrease < opts.sse_rtol or step_rel < opts.step_rtol:
            converged = True

    params = _from_scaled(kind, theta, k)
    model = FitModel(kind, tuple(params))
    resid = y - model_eval(model, x)
    sse_final = float(resid @ resid)
    sst = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - sse_final / sst if sst > 0 else (1.0 if sse_final == 0 else 0.0)
    return FitResult(
        model=model,
        rmse=math.sqrt(sse_final / x.size),
        r_squared=r2,
        iterations=iterations,
        converged=converged,
        sse_history=tuple(history),
    )


def _check_nondegenerate(ds: SweepDataset) -> None:
    m = ds.magnitude
    top = float(m.max())
    if top <= 0 or float(m.max() - m.min()) <= 1e-9 * top:
        raise DegenerateDataset("magnitude response is flat; nothing to fit (all-pass needs phase data)")


def init_params(kind, ds: SweepDataset) -> tuple[float, ...]:
    """Heuristic starting point for :func:`lm_fit`."""
    kind = parse_kind(kind)
    _check_nondegenerate(ds)
    w, m = ds.omega, ds.magnitude
    a = float(m.max())
    if kind is ModelKind.TwoTermExp:
        if m[-1] >= m[0]:
            # saturating rise: a*(1 - exp(-w/w_half))
            w_half = float(w[np.argmax(m >= a / 2)])
            return (a, 0.0, -a, -1.0 / w_half)
        # falling response: dominant decay plus a faster correction term
        w_half = float(w[np.argmax(m <= a / 2)])
        b = -math.log(2.0) / w_half
        return (a, b, 0.1 * a, 10.0 * b)

    i = int(np.argmax(m))
    b = float(w[i])
    level = a / math.e
    left = np.flatnonzero(m[:i] <= level)
    right = np.flatnonzero(m[i:] <= level)
    halves = []
    if left.size:
        halves.append(b - float(w[left[-1]]))
    if right.size:
        halves.append(float(w[i + right[0]]) - b)
    c = float(np.mean(halves)) if halves else (float(w[-1]) - float(w[0])) / 4.0
    if c <= 0:
        c = (float(w[-1]) - float(w[0])) / 4.0
    return (a, b, c)


def select_model(ds: SweepDataset) -> ModelKind:
    """Gaussian for an interior peak well above both ends, else TwoTermExp."""
    _check_nondegenerate(ds)
    m = ds.magnitude
    i = int(np.argmax(m))
    if 0 < i < m.size - 1 and m[i] >= 1.2 * m[0] and m[i] >= 1.2 * m[-1]:
        return ModelKind.Gaussian
    return ModelKind.TwoTermExp


def fit(ds: SweepDataset, kind=None, opts: FitOptions | None = None) -> FitResult:
    """Select (unless given), initialize and fit a model in one call."""
    kind = select_model(ds) if kind in (None, "auto") else parse_kind(kind)
    return lm_fit(kind, ds, init_params(kind, ds), opts)
