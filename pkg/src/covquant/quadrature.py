"""
Half-line oscillatory quadrature.

Integrals ``int_0^inf g(k) exp(-i psi(k)) dk`` with a slowly varying amplitude
``g`` and a phase that is monotone past at most one stationary point.  The
half line is cut at the stationary point and at every half period of the
phase; each piece is integrated by adaptive Gauss-Legendre and the partial
sums of the resulting (asymptotically alternating) series are accelerated with
Wynn's epsilon algorithm.  Non-decaying amplitudes are summed in the Abel
sense, which is what the epsilon algorithm converges to for such series.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np
from scipy.optimize import brentq

_EPS = np.finfo(float).eps
_GL_LOW = np.polynomial.legendre.leggauss(16)
_GL_HIGH = np.polynomial.legendre.leggauss(32)
_WINDOW = 40
_BATCH = 20


class QuadratureError(RuntimeError):
    """Requested tolerance not reached; ``value`` and ``error`` hold the best estimate."""

    def __init__(self, message: str, value=np.nan, error=np.inf):
        super().__init__(message)
        self.value = value
        self.error = error


def _gauss_legendre(f, a, b, rule):
    x, w = rule
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    nodes = mid[:, None] + half[:, None] * x[None, :]
    return half * (f(nodes) @ w)


def adaptive_pieces(f: Callable, a, b, tol: float, max_depth: int = 40):
    """Integrate ``f`` over every ``[a_i, b_i]``; returns per-piece values and error estimates.

    Pieces whose 16- and 32-point rules disagree by more than ``tol`` are
    bisected.  ``f`` must accept an array of nodes.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    values = np.zeros(len(a), dtype=complex)
    errors = np.zeros(len(a))
    owner = np.arange(len(a))
    local_tol = tol
    for _ in range(max_depth):
        if not len(a):
            return values, errors
        lo = _gauss_legendre(f, a, b, _GL_LOW)
        hi = _gauss_legendre(f, a, b, _GL_HIGH)
        diff = np.abs(hi - lo)
        done = (diff <= local_tol) | (diff <= 50 * _EPS * np.abs(hi))
        np.add.at(values, owner[done], hi[done])
        np.add.at(errors, owner[done], diff[done])
        a, b, owner = a[~done], b[~done], owner[~done]
        mid = 0.5 * (a + b)
        a, b, owner = np.concatenate([a, mid]), np.concatenate([mid, b]), np.concatenate([owner, owner])
        local_tol = max(local_tol * 0.5, 0.0)
    # depth exhausted: keep the best estimate and report the disagreement as error
    lo = _gauss_legendre(f, a, b, _GL_LOW)
    hi = _gauss_legendre(f, a, b, _GL_HIGH)
    np.add.at(values, owner, hi)
    np.add.at(errors, owner, np.abs(hi - lo))
    return values, errors


def wynn_epsilon(partial_sums) -> complex:
    """Wynn epsilon-algorithm limit of a sequence of partial sums (highest even column)."""
    s = np.asarray(partial_sums, dtype=complex)
    prev = np.zeros(len(s), dtype=complex)
    cur = s
    best = s[-1]
    column = 0
    while len(cur) > 1:
        diff = cur[1:] - cur[:-1]
        if np.any(diff == 0):
            # exactly converged column
            break
        nxt = prev[1 : len(cur)] + 1.0 / diff
        if not np.all(np.isfinite(nxt)):
            break
        prev, cur = cur, nxt
        column += 1
        if column % 2 == 0:
            best = cur[-1]
    return complex(best)


def _tail_breakpoints(phase, slope, k0: float, direction: float, count: int, scale: float) -> list[float]:
    points = [k0]
    for _ in range(count):
        k = points[-1]
        target = phase(k) + direction * math.pi
        step = math.pi / max(abs(slope(k)), 1e-300)
        step = min(max(step, 1e-6 * scale), 1e6 * scale)
        for _ in range(200):
            if direction * (phase(k + step) - target) > 0:
                break
            step *= 2.0
        else:
            raise QuadratureError("phase does not advance; integrand is not oscillatory (light-cone point?)")
        points.append(brentq(lambda q: phase(q) - target, k, k + step))
    return points


def oscillatory_half_line(
    amplitude: Callable,
    phase: Callable,
    slope: Callable,
    stationary: float | None = None,
    tol: float = 1e-8,
    max_pieces: int = 400,
    scale: float = 1.0,
) -> tuple[complex, float]:
    """``int_0^inf amplitude(k) exp(-i phase(k)) dk`` and an absolute error estimate.

    ``slope`` is ``d phase / dk``; ``stationary`` is the interior zero of the
    slope, if any.  ``scale`` sets the momentum scale used for step limits.
    Raises :class:`QuadratureError` when ``tol`` is not met within
    ``max_pieces`` tail half-periods.
    """
    amp = lambda k: amplitude(k) * np.exp(-1j * phase(k))
    head = [0.0]
    if stationary is not None and stationary > 0:
        p0, p1 = float(phase(0.0)), float(phase(stationary))
        lo, hi = min(p0, p1), max(p0, p1)
        crossings = []
        for j in range(math.ceil(lo / math.pi), math.floor(hi / math.pi) + 1):
            target = j * math.pi
            if lo < target < hi:
                crossings.append(brentq(lambda q: phase(q) - target, 0.0, stationary))
        head = [0.0] + sorted(crossings) + [stationary]
    start = head[-1]

    probe = start + 10.0 * scale + 10.0 * start
    direction = math.copysign(1.0, slope(probe))
    if abs(slope(probe)) < 1e-12:
        raise QuadratureError("asymptotic phase slope vanishes; integral does not converge as an oscillatory sum")

    piece_tol = tol * 1e-3
    if len(head) > 1:
        head_vals, head_errs = adaptive_pieces(amp, head[:-1], head[1:], piece_tol)
    else:
        head_vals, head_errs = np.zeros(0, dtype=complex), np.zeros(0)
    head_sum = complex(head_vals.sum())

    tail_points = _tail_breakpoints(phase, slope, start, direction, _BATCH * 2, scale)
    tail_vals, tail_errs = adaptive_pieces(amp, tail_points[:-1], tail_points[1:], piece_tol)

    while True:
        sums = head_sum + np.cumsum(tail_vals)
        estimates = [wynn_epsilon(sums[max(0, n - _WINDOW) : n]) for n in (len(sums) - 2, len(sums) - 1, len(sums))]
        best = estimates[-1]
        extrap_err = max(abs(best - estimates[0]), abs(best - estimates[1]))
        magnitude = float(np.sum(np.abs(head_vals)) + np.sum(np.abs(tail_vals)))
        n_pieces = len(head_vals) + len(tail_vals)
        roundoff = 8.0 * _EPS * magnitude * math.sqrt(n_pieces)
        error = extrap_err + float(np.sum(head_errs) + np.sum(tail_errs)) + roundoff
        if error <= tol:
            return best, error
        if roundoff > tol:
            raise QuadratureError(f"tolerance {tol:g} is below the rounding floor {roundoff:.3g}", best, error)
        if len(tail_vals) >= max_pieces:
            raise QuadratureError(
                f"tolerance {tol:g} not reached after {len(tail_vals)} half-periods (estimate {error:.3g})",
                best,
                error,
            )
        more = _tail_breakpoints(phase, slope, tail_points[-1], direction, _BATCH, scale)
        vals, errs = adaptive_pieces(amp, more[:-1], more[1:], piece_tol)
        tail_points.extend(more[1:])
        tail_vals = np.concatenate([tail_vals, vals])
        tail_errs = np.concatenate([tail_errs, errs])
