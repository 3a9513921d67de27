"""
Limit-shape functions of Plancherel-random tableaux and the limiting bumping route curves.

Coordinates: standard (x, y) with x the column direction and y the row direction,
rotated u = x - y, v = x + y. The limit shape of the diagram is v = Omega(u),
the semicircle law has distribution function F on [-2, 2], and for an inserted
value alpha the limiting route is the curve x = beta_alpha(y), 0 <= y <= kappa(alpha).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import bisect, brentq

logger = logging.getLogger(__name__)

QUANTILE_XTOL = 1e-15
QUANTILE_RTOL = 4.0 * np.finfo(float).eps
Y_INVERSE_XTOL = 1e-11
DOMAIN_SLACK = 1e-12
CLAMP_SLACK = 1e-15
ALPHA_DEGENERATE = 1.0 - 1e-12
DEFAULT_GRID_SIZE = 200


class DomainError(ValueError):
    """Argument outside the closed interval a function is defined on."""


def _check_interval(name, value, low, high, slack=0.0):
    values = np.asarray(value, dtype=float)
    if np.any(np.isnan(values)) or np.any(values < low - slack) or np.any(values > high + slack):
        raise DomainError(f"{name} must lie in [{low}, {high}], got {value!r}")


def _omega(u):
    if abs(u) >= 2.0:
        return 2.0
    return (2.0 / math.pi) * (u * math.asin(u / 2.0) + math.sqrt((2.0 - u) * (2.0 + u)))


def _x_minus_sin(x):
    """x - sin(x) for 0 <= x <= 2 pi, by its Taylor series below 1."""
    if x >= 1.0:
        return x - math.sin(x)
    total, term, k = 0.0, x ** 3 / 6.0, 3
    while abs(term) > 1e-17 * total:
        total += term
        term *= -x * x / ((k + 1) * (k + 2))
        k += 2
    return total


def _angle(u):
    """The phi in [0, pi] with u = -2 cos(phi)."""
    return 2.0 * math.asin(math.sqrt(min(max((2.0 + u) / 4.0, 0.0), 1.0)))


def _lower_cdf(u):
    # F(u) = (phi - sin(phi) cos(phi)) / pi, evaluated without cancellation for u <= 0
    return _x_minus_sin(2.0 * _angle(u)) / (2.0 * math.pi)


def _cdf(u):
    if u <= -2.0:
        return 0.0
    if u >= 2.0:
        return 1.0
    if u > 0.0:
        return 1.0 - _lower_cdf(-u)
    return _lower_cdf(u)


def _density(u):
    return math.sqrt(max((2.0 - u) * (2.0 + u), 0.0)) / (2.0 * math.pi)


def _scalar_or_array(function, values):
    array = np.asarray(values, dtype=float)
    if array.ndim == 0:
        return function(float(array))
    return np.array([function(value) for value in array.ravel()]).reshape(array.shape)


def omega(u):
    """
    Logan-Shepp-Vershik-Kerov limit shape, (2/pi)(u asin(u/2) + sqrt(4 - u^2)).
    :param u: rotated coordinate (scalar or array) with |u| <= 2.
    :return: Omega(u), a value in [|u|, 2].
    """
    _check_interval("u", u, -2.0, 2.0, CLAMP_SLACK)
    array = np.clip(np.asarray(u, dtype=float), -2.0, 2.0)
    return _scalar_or_array(_omega, array)


def omega_derivative(u):
    _check_interval("u", u, -2.0, 2.0, CLAMP_SLACK)
    return (2.0 / np.pi) * np.arcsin(np.clip(np.asarray(u, dtype=float), -2.0, 2.0) / 2.0)


def semicircle_density(u):
    _check_interval("u", u, -2.0, 2.0, CLAMP_SLACK)
    return _scalar_or_array(_density, np.clip(np.asarray(u, dtype=float), -2.0, 2.0))


def semicircle_cdf(u):
    """
    Distribution function of the semicircle law on [-2, 2].
    :param u: scalar or array with |u| <= 2.
    :return: F(u) in [0, 1].
    """
    _check_interval("u", u, -2.0, 2.0, CLAMP_SLACK)
    return _scalar_or_array(_cdf, np.clip(np.asarray(u, dtype=float), -2.0, 2.0))


@lru_cache(maxsize=1 << 16)
def _quantile(p):
    if p <= 0.0:
        return -2.0
    if p >= 1.0:
        return 2.0
    if p > 0.5:
        return -_quantile(1.0 - p)
    if p < 1e-200:
        # u + 2 is far below the spacing of doubles at -2
        return -2.0
    # solve 2 phi - sin(2 phi) = 2 pi p for phi in [0, pi/2]; x - sin(x) lies
    # between x^3/12 and x^3/6 there, which brackets the root
    target = 2.0 * math.pi * p
    low = (1.5 * math.pi * p) ** (1.0 / 3.0)
    high = min(1.3 * low, math.pi / 2.0)
    if _x_minus_sin(2.0 * low) >= target:
        phi = low
    else:
        phi = brentq(lambda angle: _x_minus_sin(2.0 * angle) - target, low, high,
                     xtol=QUANTILE_XTOL * low, rtol=QUANTILE_RTOL)
    # u + 2 = 4 sin^2(phi / 2) keeps full relative precision near the lower edge
    return -2.0 + 4.0 * math.sin(phi / 2.0) ** 2


def semicircle_quantile(p):
    """
    Inverse of semicircle_cdf, solved for the angle phi with u = -2 cos(phi) so that
    both tails keep an absolute accuracy near 1e-15. Exact at p = 0 and p = 1.
    :param p: probability (scalar or array) in [0, 1].
    :return: the u in [-2, 2] with F(u) = p.
    """
    _check_interval("p", p, 0.0, 1.0)
    return _scalar_or_array(_quantile, np.asarray(p, dtype=float))


@dataclass(frozen=True)
class CurveParams:
    alpha: float
    t: float
    u: float
    v: float
    x: float
    y: float


def _uv(alpha, t):
    if t <= 0.0:
        return 0.0, 0.0
    root = math.sqrt(t)
    quantile = _quantile(min(alpha / t, 1.0))
    return root * quantile, root * _omega(quantile)


def _xy(alpha, t):
    u, v = _uv(alpha, t)
    return (v + u) / 2.0, (v - u) / 2.0


def _check_alpha_t(alpha, t):
    _check_interval("alpha", alpha, 0.0, 1.0)
    if alpha >= 1.0:
        raise DomainError(f"alpha must be smaller than 1, got {alpha!r}")
    if not alpha <= t <= 1.0:
        raise DomainError(f"t must lie in [alpha, 1] = [{alpha}, 1], got {t!r}")


def curve_params(alpha: float, t: float) -> CurveParams:
    """
    Point of the limiting route at sublevel parameter t, in both coordinate systems.
    :param alpha: inserted value, 0 <= alpha < 1.
    :param t: sublevel threshold, alpha <= t <= 1.
    """
    _check_alpha_t(alpha, t)
    u, v = _uv(float(alpha), float(t))
    return CurveParams(alpha=float(alpha), t=float(t), u=u, v=v, x=(v + u) / 2.0, y=(v - u) / 2.0)


def curve_xy(alpha: float, t_values) -> np.ndarray:
    """
    Vectorised (x_alpha(t), y_alpha(t)) over a grid of t values, shape (len(t_values), 2).
    """
    t_values = np.asarray(t_values, dtype=float)
    _check_alpha_t(alpha, float(t_values.min()) if t_values.size else alpha)
    _check_interval("t", t_values, alpha, 1.0)
    return np.array([_xy(float(alpha), float(t)) for t in t_values]).reshape(-1, 2)


def scaled_limit_shape(t: float, u):
    """
    Boundary sqrt(t) Omega(u / sqrt(t)) of the limiting t-sublevel diagram.
    """
    if not 0.0 < t <= 1.0:
        raise DomainError(f"t must lie in (0, 1], got {t!r}")
    root = math.sqrt(t)
    return root * omega(np.asarray(u, dtype=float) / root)


def endpoint(alpha: float) -> tuple[float, float]:
    """
    Limiting scaled position (U, V) of the new box, in rotated coordinates.
    """
    _check_interval("alpha", alpha, 0.0, 1.0)
    u = _quantile(float(alpha))
    return u, _omega(u)


def kappa(alpha: float) -> float:
    """
    Limiting scaled length of the bumping route, (Omega(U) - U) / 2.
    """
    u, v = endpoint(alpha)
    return (v - u) / 2.0


def limit_point(alpha: float) -> tuple[float, float]:
    u, v = endpoint(alpha)
    return (v + u) / 2.0, (v - u) / 2.0


def y_inverse(alpha: float, s: float) -> float:
    """
    The t in [alpha, 1] with y_alpha(t) = s.

    y_alpha runs from 0 at t = alpha to kappa(alpha) at t = 1 and is strictly
    monotone in between, so bisection on the sign change is enough.
    :param alpha: inserted value, 0 <= alpha < 1.
    :param s: scaled row height in [0, kappa(alpha)].
    """
    _check_alpha_t(alpha, 1.0)
    alpha, s = float(alpha), float(s)
    top = kappa(alpha)
    _check_interval("s", s, 0.0, top, DOMAIN_SLACK)
    if s <= 0.0:
        return alpha
    if s >= top:
        return 1.0
    return bisect(lambda t: _xy(alpha, t)[1] - s, alpha, 1.0, xtol=Y_INVERSE_XTOL)


@lru_cache(maxsize=1 << 16)
def beta(alpha: float, s: float) -> float:
    """
    Limiting bumping route curve beta_alpha(s) = x_alpha(y_alpha^{-1}(s)).
    :param alpha: inserted value, 0 <= alpha < 1.
    :param s: scaled row height in [0, kappa(alpha)].
    :return: scaled column position of the route at height s.
    """
    alpha, s = float(alpha), float(s)
    if alpha == 0.0:
        _check_interval("s", s, 0.0, 2.0, DOMAIN_SLACK)
        return 0.0
    if alpha >= ALPHA_DEGENERATE:
        _check_interval("alpha", alpha, 0.0, 1.0)
        return limit_point(alpha)[0]
    return _xy(alpha, y_inverse(alpha, s))[0]


@dataclass(frozen=True)
class LimitCurve:
    """
    beta_alpha tabulated on a uniform s-grid over [0, kappa(alpha)].

    interpolation_error[i] bounds the linear interpolation error on [s[i], s[i+1]]
    (twice the midpoint deviation).
    """
    alpha: float
    kappa: float
    endpoint_uv: tuple[float, float]
    s: np.ndarray
    beta: np.ndarray
    interpolation_error: np.ndarray

    @property
    def samples(self) -> list[tuple[float, float]]:
        return list(zip(self.s.tolist(), self.beta.tolist()))

    def error_bound(self, s_values) -> np.ndarray:
        s_values = np.asarray(s_values, dtype=float)
        interval = np.clip(np.searchsorted(self.s, s_values, side="right") - 1,
                           0, len(self.s) - 2)
        bounds = self.interpolation_error[interval]
        return np.where(np.isin(s_values, self.s), 0.0, bounds)

    def evaluate(self, s_values, tolerance: float = 1e-6) -> tuple[np.ndarray, np.ndarray]:
        """
        beta at arbitrary heights, clamped to kappa.
        :param s_values: heights, any shape.
        :param tolerance: interpolation error above which beta() is called directly.
        :return: (values, remaining error bounds).
        """
        s_values = np.minimum(np.asarray(s_values, dtype=float), self.kappa)
        values = np.interp(s_values, self.s, self.beta)
        bounds = self.error_bound(s_values)
        direct = bounds > tolerance
        if np.any(direct):
            values[direct] = [beta(self.alpha, s) for s in s_values[direct]]
            bounds[direct] = 0.0
        return values, bounds


@lru_cache(maxsize=64)
def sample_curve(alpha: float, grid_size: int = DEFAULT_GRID_SIZE) -> LimitCurve:
    """
    Tabulate beta_alpha for export and for route distance evaluation.
    :param alpha: inserted value, 0 <= alpha < 1.
    :param grid_size: number of sample points, at least 2.
    """
    if grid_size < 2:
        raise DomainError(f"grid_size must be at least 2, got {grid_size}")
    _check_alpha_t(alpha, 1.0)
    alpha = float(alpha)
    top = kappa(alpha)
    if top <= 0.0:
        raise DomainError(f"the curve for alpha={alpha} degenerates to a point")

    s = np.linspace(0.0, top, grid_size)
    values = np.array([beta(alpha, point) for point in s])
    midpoints = (s[:-1] + s[1:]) / 2.0
    deviation = np.array([beta(alpha, point) for point in midpoints]) - (values[:-1] + values[1:]) / 2.0
    error = 2.0 * np.abs(deviation)

    for array in (s, values, error):
        array.setflags(write=False)
    logger.debug("sampled beta for alpha=%g on %d points, max interpolation error %.3g",
                 alpha, grid_size, float(error.max()))
    return LimitCurve(alpha=alpha, kappa=top, endpoint_uv=endpoint(alpha),
                      s=s, beta=values, interpolation_error=error)
