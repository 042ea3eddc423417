"""Circle lifts, driving systems, and cocycle iteration.

A lift is ``phi(x, w) = x + 2*pi*rho0 + h(x, w)`` with h 2*pi-periodic in
x; w is the driving state's payload (None for undriven maps, the base
angle(s) for torus rotations, the drawn symbol for i.i.d. compositions).
Lift values are tracked unreduced with compensated summation so linear
growth rates survive very long orbits; displacement evaluation happens at
the reduced phase.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import fourier
from ._rng import u01_block
from .errors import (
    EvaluationError,
    NonInvertibleError,
    ValidationError,
)

TWO_PI = 2.0 * math.pi

__all__ = [
    "TWO_PI",
    "CircleLift",
    "TrivialDriver",
    "TorusRotation",
    "BernoulliShift",
    "AlmostPeriodicPath",
    "CocycleTrajectory",
    "step",
    "iterate",
    "displacement_spread",
    "make_arnold_family",
    "make_conjugated_rotation",
    "lift_from_series",
    "iid_lift",
    "check_lift",
]


@dataclass(frozen=True)
class CircleLift:
    """Degree-one monotone lift x + 2*pi*rho0 + h(x, w).

    `displacement` takes (x, payload) and must broadcast over numpy
    arrays in x; None means a rigid rotation.  `driven` marks lifts whose
    displacement actually reads the payload.
    """

    rho0: float
    displacement: Callable | None = None
    driven: bool = False
    label: str = ""

    def __call__(self, x, w=None):
        if self.displacement is None:
            return x + TWO_PI * self.rho0
        return x + TWO_PI * self.rho0 + self.displacement(x, w)


# -- driving systems -----------------------------------------------------------


class TrivialDriver:
    """One-point base; payload is always None."""

    def initial_state(self):
        return None

    def advance(self, state, k: int = 1):
        return None

    def payload(self, state):
        return None


@dataclass(frozen=True)
class TorusRotation:
    """Rigid rotation of the (m-1)-torus by 2*pi*alpha per step."""

    alpha: tuple[float, ...]
    omega0: tuple[float, ...] | None = None

    def __post_init__(self):
        alpha = tuple(float(a) for a in np.atleast_1d(self.alpha))
        object.__setattr__(self, "alpha", alpha)
        if self.omega0 is not None:
            om = tuple(float(a) for a in np.atleast_1d(self.omega0))
            if len(om) != len(alpha):
                raise ValidationError("omega0 length must match alpha")
            object.__setattr__(self, "omega0", om)

    @property
    def dim(self) -> int:
        return len(self.alpha)

    def initial_state(self):
        om = self.omega0 or (0.0,) * self.dim
        return np.asarray(om, dtype=float)

    def advance(self, state, k: int = 1):
        return (state + (k * TWO_PI) * np.asarray(self.alpha)) % TWO_PI

    def payload(self, state):
        return float(state[0]) if self.dim == 1 else state


@dataclass(frozen=True)
class BernoulliShift:
    """I.i.d. symbol stream: counter-based, reproducible, random access.

    The state is the stream position; the payload is the drawn symbol in
    0..len(probs)-1.  Distinct seeds give independent streams.
    """

    probs: tuple[float, ...]
    seed: int

    def __post_init__(self):
        probs = tuple(float(p) for p in self.probs)
        if len(probs) < 1:
            raise ValidationError("probs: need at least one entry")
        if any(p <= 0 for p in probs):
            raise ValidationError("probs: entries must be strictly positive")
        if abs(sum(probs) - 1.0) > 1e-12:
            raise ValidationError(
                f"probs: must sum to 1 within 1e-12, got {sum(probs)!r}"
            )
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "seed", int(self.seed))

    def initial_state(self):
        return 0

    def advance(self, state, k: int = 1):
        return state + k

    def payload(self, state):
        return int(self.payloads(state, 1)[0])

    def payloads(self, state, count: int) -> np.ndarray:
        """Symbols at positions state..state+count-1 (vectorized)."""
        u = u01_block(self.seed, state, count)
        cum = np.cumsum(self.probs)[:-1]
        return np.searchsorted(cum, u, side="right").astype(np.int64)


@dataclass(frozen=True)
class AlmostPeriodicPath:
    """Almost periodic sample path t -> u(t) used as an ODE driver.

    Built from a frequency vector and per-frequency amplitude rows:
    ``u_j(t) = sum_i amplitudes[j][i] * cos(frequencies[i] * t + phases[i])``.
    A single path suffices because the growth rate does not depend on the
    starting point of the hull.
    """

    frequencies: tuple[float, ...]
    amplitudes: tuple[tuple[float, ...], ...]
    phases: tuple[float, ...] | None = None

    def __post_init__(self):
        freq = tuple(float(f) for f in np.atleast_1d(self.frequencies))
        amp = np.atleast_2d(np.asarray(self.amplitudes, dtype=float))
        if amp.shape[1] != len(freq):
            raise ValidationError("amplitudes rows must match frequencies length")
        ph = self.phases
        ph = (0.0,) * len(freq) if ph is None else tuple(float(p) for p in ph)
        if len(ph) != len(freq):
            raise ValidationError("phases length must match frequencies length")
        object.__setattr__(self, "frequencies", freq)
        object.__setattr__(self, "amplitudes", tuple(map(tuple, amp)))
        object.__setattr__(self, "phases", ph)

    def __call__(self, t):
        w = np.asarray(self.frequencies)
        ph = np.asarray(self.phases)
        amp = np.asarray(self.amplitudes)
        vals = amp @ np.cos(w * t + ph)
        return float(vals[0]) if vals.shape == (1,) else vals


# -- cocycle iteration -----------------------------------------------------------


class CocycleTrajectory:
    """Running orbit of the skew product (x, w) -> (phi(x, w), theta w).

    Tracks the unreduced lift value through a compensated sum of
    displacements; `advance` may be called repeatedly and the cocycle
    property iterate(s+t) == iterate(t) after iterate(s) holds by
    construction.
    """

    __slots__ = ("lift", "driver", "n", "_x0", "_xr", "_sum", "_comp", "state")

    def __init__(self, lift: CircleLift, driver, x0, state):
        self.lift = lift
        self.driver = driver if driver is not None else TrivialDriver()
        self.n = 0
        x0 = np.asarray(x0, dtype=float) if not np.isscalar(x0) else float(x0)
        self._x0 = x0
        self._xr = x0 % TWO_PI if np.isscalar(x0) else np.asarray(x0) % TWO_PI
        self._sum = 0.0 if np.isscalar(x0) else np.zeros_like(self._xr)
        self._comp = 0.0 if np.isscalar(x0) else np.zeros_like(self._xr)
        self.state = state

    @property
    def x(self):
        """Current lift value phi(n, w) x0 (unreduced)."""
        return self._x0 + self._sum

    @property
    def omega(self):
        return self.state

    def advance(self, steps: int) -> "CocycleTrajectory":
        if steps < 0:
            raise ValidationError("step count must be >= 0")
        if steps == 0:
            return self
        lift = self.lift
        disp = lift.displacement
        rho_term = TWO_PI * lift.rho0
        driver = self.driver
        scalar = np.isscalar(self._xr) or np.ndim(self._xr) == 0
        xr, s, c = self._xr, self._sum, self._comp
        state = self.state

        batched = isinstance(driver, BernoulliShift)
        # scalar fast path for a one-frequency torus base: identical
        # arithmetic to the array path, element by element
        torus1 = isinstance(driver, TorusRotation) and driver.dim == 1
        if torus1:
            w_angle = float(state[0])
            dw = TWO_PI * driver.alpha[0]
        remaining = steps
        while remaining > 0:
            block = min(remaining, 65536)
            if batched:
                payloads = driver.payloads(state, block)
                state = driver.advance(state, block)
            for i in range(block):
                if batched:
                    w = payloads[i]
                elif torus1:
                    w = w_angle
                    w_angle = (w_angle + dw) % TWO_PI
                else:
                    w = driver.payload(state)
                    state = driver.advance(state)
                d = rho_term + disp(xr, w) if disp is not None else rho_term
                y = d - c
                t = s + y
                c = (t - s) - y
                s = t
                xr = (xr + d) % TWO_PI
            remaining -= block
        if torus1:
            state = np.array([w_angle])
        if not scalar:
            xr = np.asarray(xr)
        self._xr, self._sum, self._comp = xr, s, c
        self.state = state
        self.n += steps
        return self


def step(lift: CircleLift, driver, state):
    """One skew-product step: ((x, w)) -> (phi(x, w), theta w)."""
    x, w_state = state
    driver = driver if driver is not None else TrivialDriver()
    x1 = lift(x, driver.payload(w_state))
    return x1, driver.advance(w_state)


def iterate(lift: CircleLift, driver, x0, omega0=None, n: int = 0) -> CocycleTrajectory:
    """Apply the lift n times from (x0, omega0); returns the trajectory.

    x0 may be an ndarray to run a batch of initial points against the one
    driver realization.
    """
    driver = driver if driver is not None else TrivialDriver()
    state = omega0 if omega0 is not None else driver.initial_state()
    traj = CocycleTrajectory(lift, driver, x0, state)
    return traj.advance(n)


def displacement_spread(
    lift: CircleLift, omega=None, grid: int = 256, n: int = 1, driver=None
) -> tuple[float, float]:
    """(sup, inf) of phi(n, w) x - x over an x grid, shared driver path."""
    if grid < 16:
        raise ValidationError("grid must have at least 16 points")
    x = TWO_PI * np.arange(grid) / grid
    driver = driver if driver is not None else TrivialDriver()
    state = omega if omega is not None else driver.initial_state()
    traj = CocycleTrajectory(lift, driver, x, state).advance(n)
    d = traj.x - x
    return float(d.max()), float(d.min())


# -- built-in families -----------------------------------------------------------


def make_arnold_family(Omega: float, eps: float) -> CircleLift:
    """Standard family x + 2*pi*Omega + eps*sin(x); needs |eps| < 1."""
    if abs(eps) >= 1.0:
        raise NonInvertibleError(
            f"|eps| = {abs(eps)} >= 1: lift would not be a homeomorphism"
        )
    if eps == 0.0:
        return CircleLift(float(Omega), None, label=f"arnold(O={Omega},e=0)")
    e = float(eps)

    def disp(x, w=None, _e=e):
        if type(x) is float:
            return _e * math.sin(x)
        return _e * np.sin(x)

    return CircleLift(float(Omega), disp, label=f"arnold(O={Omega},e={eps})")


def _g_forward(x, a):
    if type(x) is float:
        return x + a * math.sin(x)
    return x + a * np.sin(x)


def _g_inverse(y, a):
    # Newton solve of x + a*sin(x) = y; quartic convergence from the
    # second-order initial guess, four sweeps reach machine precision
    # for |a| <= 0.5.
    if type(y) is float:
        x = y - a * math.sin(y)
        for _ in range(4):
            x -= (x + a * math.sin(x) - y) / (1.0 + a * math.cos(x))
        return x
    x = y - a * np.sin(y)
    for _ in range(4):
        x -= (x + a * np.sin(x) - y) / (1.0 + a * np.cos(x))
    return x


def make_conjugated_rotation(rho: float, conj_amplitude: float = 0.3) -> CircleLift:
    """Rotation by 2*pi*rho conjugated by g(x) = x + a*sin(x).

    All members with the same `a` share the invariant measure pushed
    forward from Lebesgue by the inverse of g, while keeping rotation
    number rho.
    """
    a = float(conj_amplitude)
    if abs(a) >= 1.0:
        raise NonInvertibleError("conjugacy amplitude must satisfy |a| < 1")
    shift = TWO_PI * float(rho)

    def disp(x, w=None, _a=a, _s=shift):
        return _g_inverse(_g_forward(x, _a) + _s, _a) - x - _s

    return CircleLift(float(rho), disp, label=f"conj_rot(rho={rho},a={a})")


def make_skew_sine(c: float, eps: float) -> CircleLift:
    """Driven lift x + c + eps*sin(x + w) over a one-dimensional base."""
    if abs(eps) >= 1.0:
        raise NonInvertibleError("need |eps| < 1 for a homeomorphism")
    e = float(eps)

    def disp(x, w, _e=e):
        if type(x) is float and type(w) is float:
            return _e * math.sin(x + w)
        return _e * np.sin(np.asarray(x) + np.asarray(w))

    return CircleLift(float(c) / TWO_PI, disp, driven=True, label=f"skew_sine(eps={eps})")


def lift_from_series(rho0: float, series: fourier.FourierSeries) -> CircleLift:
    """Lift whose displacement is a 1-d Fourier series (undriven)."""
    if series.dim != 1 or series.value_dim != 1:
        raise ValidationError("displacement series must be scalar on the circle")
    if not series.is_real_symmetric(1e-9):
        raise ValidationError("displacement series must be real-symmetric")

    def disp(x, w=None, _s=series):
        scalar = np.isscalar(x)
        vals = fourier.eval_at(_s, np.atleast_1d(np.asarray(x, dtype=float)))
        vals = vals.real
        return float(vals[0]) if scalar else vals.reshape(np.shape(x))

    return CircleLift(float(rho0), disp, label="series_lift")


def iid_lift(maps: Sequence[CircleLift]) -> CircleLift:
    """Symbol-dispatched lift: payload w selects maps[w]."""
    if not maps:
        raise ValidationError("need at least one map")
    rho_terms = tuple(TWO_PI * m.rho0 for m in maps)
    disps = tuple(m.displacement for m in maps)

    def disp(x, w, _r=rho_terms, _d=disps):
        i = int(w)
        di = _d[i]
        return _r[i] + (di(x, None) if di is not None else 0.0)

    return CircleLift(0.0, disp, driven=True, label="iid_composition")


def check_lift(lift: CircleLift, omega=None, grid: int = 256, tol: float = 1e-10) -> None:
    """Statistical degree-one and monotonicity validation on a grid."""
    x = TWO_PI * np.arange(grid) / grid
    lo = lift(x, omega)
    hi = lift(x + TWO_PI, omega)
    if not np.all(np.isfinite(lo)):
        raise EvaluationError("lift produced non-finite values")
    if np.abs(hi - lo - TWO_PI).max() > tol:
        raise ValidationError("lift is not degree one on the sample grid")
    fine = lift(np.sort(np.concatenate([x, x + TWO_PI / (2 * grid)])), omega)
    if np.any(np.diff(fine) < -tol):
        raise ValidationError("lift is not monotone on the sample grid")
