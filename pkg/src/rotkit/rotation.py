"""Rotation-number estimators for circle maps, i.i.d. compositions, and
circle ODEs.

Two conventions coexist and are tagged on every estimate:

* ``map``: winding per iterate divided by 2*pi (the limit of
  ``phi(n, w) x / (2*pi*n)``), dimensionless;
* ``ode``: angular growth per unit time (the limit of ``(x(T)-x0)/T``),
  radians per time.

Finite-horizon estimators carry an O(1/horizon) phase wobble; where a
sharper number is needed the two-window (Cesaro) slope is used, whose
wobble cancels to O(1/horizon^2) for equidistributed orbits.  Rigorous
enclosures exist only for driver-independent maps, where the winding of
the n-fold composite brackets the rotation number within 1/n on each
side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import _fast
from ._rng import derive_seed
from .dynamics import (
    TWO_PI,
    BernoulliShift,
    CircleLift,
    CocycleTrajectory,
    TorusRotation,
    TrivialDriver,
    iid_lift,
    iterate,
)
from .errors import (
    ConfigurationError,
    EvaluationError,
    UnsupportedDriverError,
    ValidationError,
)

__all__ = [
    "RotationEstimate",
    "OdeField",
    "estimate_map",
    "estimate_map_cesaro",
    "deterministic_enclosure",
    "predicted_iid_rotation",
    "estimate_iid_composition",
    "estimate_ode",
    "estimate_planar_homogeneous",
    "continuity_probe",
    "make_cosine_field",
]


@dataclass
class RotationEstimate:
    """Estimated rotation number with convergence diagnostics.

    `diagnostics` lists partial estimates at dyadic checkpoints; its last
    entry equals `value`.  `enclosure`, when present, is a rigorous
    bracket (deterministic maps only).  `sample_sd` is the ensemble
    sample standard deviation for averaged estimates.
    """

    value: float
    n_or_T: float
    convention: str
    diagnostics: list = field(default_factory=list)
    enclosure: tuple | None = None
    sample_sd: float | None = None

    def __post_init__(self):
        if self.convention not in ("map", "ode"):
            raise ValidationError("convention must be 'map' or 'ode'")


@dataclass
class OdeField:
    """Circle vector field f(x, w), 2*pi-periodic and Lipschitz in x.

    `lipschitz_bound` is the uniform bound max(sup|f|, Lip_x f) used to
    gate the integration step.  `compiled`, when set, is a numba-jitted
    (x, t) -> float right-hand side enabling the fast integrator for
    time-explicit drivers.
    """

    f: Callable
    lipschitz_bound: float
    compiled: object = None
    label: str = ""


def _dyadic_checkpoints(n: int) -> list[int]:
    cps = []
    c = 1
    while c < n:
        cps.append(c)
        c *= 2
    cps.append(n)
    return cps


def _as_driver(driver):
    return driver if driver is not None else TrivialDriver()


# -- map-convention estimators ---------------------------------------------------


def estimate_map(
    lift: CircleLift, driver=None, x0=0.0, n: int = 0, omega0=None
) -> RotationEstimate:
    """Finite-n winding estimate (phi(n, w) x0 - x0) / (2*pi*n).

    Dyadic partial estimates are recorded as diagnostics.  The value is
    independent of x0 up to O(1/n); x0 may be an array to run a batch
    against the same driver realization.
    """
    n = int(n)
    if n < 2:
        raise ValidationError("need n >= 2 iterations")
    driver = _as_driver(driver)
    state = omega0 if omega0 is not None else driver.initial_state()
    traj = CocycleTrajectory(lift, driver, x0, state)
    diagnostics = []
    done = 0
    for cp in _dyadic_checkpoints(n):
        traj.advance(cp - done)
        done = cp
        diagnostics.append((traj.x - traj._x0) / (TWO_PI * cp))
    return RotationEstimate(
        value=diagnostics[-1],
        n_or_T=float(n),
        convention="map",
        diagnostics=diagnostics,
    )


def estimate_map_cesaro(
    lift: CircleLift, driver=None, x0=0.0, n: int = 0, omega0=None
) -> RotationEstimate:
    """Two-window averaged winding rate with O(1/n^2) wobble.

    Splits the orbit into halves of N = n//2 steps and returns the slope
    of window-mean lift values, (mean2 - mean1) / (2*pi*N).  The bounded
    phase deviation cancels between the windows, so for maps conjugate to
    a Diophantine rotation the error decays like 1/N^2 instead of the
    plain estimator's 1/n.
    """
    n = int(n)
    if n < 4:
        raise ValidationError("need n >= 4 iterations")
    N = n // 2
    driver = _as_driver(driver)
    state = omega0 if omega0 is not None else driver.initial_state()
    lift_disp = lift.displacement
    rho_term = TWO_PI * lift.rho0

    # Dedicated loop: accumulates window sums of lift values with
    # compensated addition (the running values reach ~2*pi*rho*N and the
    # slope needs their sums to much better than one ulp of the total).
    snaps = {}
    cps = set(_dyadic_checkpoints(2 * N)) | {N, 2 * N}
    s = 0.0
    comp_x = 0.0
    xr = float(x0) % TWO_PI
    S = 0.0
    comp_S = 0.0
    batched = isinstance(driver, BernoulliShift)
    torus1 = isinstance(driver, TorusRotation) and driver.dim == 1
    if torus1:
        w_angle = float(state[0])
        dw = TWO_PI * driver.alpha[0]
    i = 0
    total = 2 * N
    while i < total:
        block = min(total - i, 65536)
        if batched:
            payloads = driver.payloads(state, block)
            state = driver.advance(state, block)
        for j in range(block):
            if batched:
                w = payloads[j]
            elif torus1:
                w = w_angle
                w_angle = (w_angle + dw) % TWO_PI
            else:
                w = driver.payload(state)
                state = driver.advance(state)
            d = rho_term + lift_disp(xr, w) if lift_disp is not None else rho_term
            y = d - comp_x
            t = s + y
            comp_x = (t - s) - y
            s = t
            xr = (xr + d) % TWO_PI
            y2 = s - comp_S
            t2 = S + y2
            comp_S = (t2 - S) - y2
            S = t2
            i += 1
            if i in cps:
                snaps[i] = S

    diagnostics = []
    j = 1
    while 2 * j <= 2 * N:
        if j in snaps and 2 * j in snaps:
            diagnostics.append((snaps[2 * j] - 2.0 * snaps[j]) / (TWO_PI * j * j))
        j *= 2
    value = (snaps[2 * N] - 2.0 * snaps[N]) / (TWO_PI * float(N) * float(N))
    if not diagnostics or diagnostics[-1] != value:
        diagnostics.append(value)
    if len(diagnostics) < 2:
        diagnostics.insert(0, diagnostics[0])
    return RotationEstimate(
        value=value, n_or_T=float(2 * N), convention="map", diagnostics=diagnostics
    )


def deterministic_enclosure(lift: CircleLift, n: int, x0: float = 0.0) -> RotationEstimate:
    """Rigorous bracket of the rotation number of a driver-free lift.

    The winding of the n-fold composite over- and under-shoots n times
    the rotation angle by less than one full turn in each direction, so
    ``[(F^n(0) - 2*pi) / (2*pi*n), (F^n(0) + 2*pi) / (2*pi*n)]`` encloses
    the rotation number; the width is 2/n.
    """
    n = int(n)
    if n < 1:
        raise ValidationError("need n >= 1")
    if lift.driven:
        raise UnsupportedDriverError(
            "rigorous enclosures require a driver-independent lift"
        )
    traj = CocycleTrajectory(lift, TrivialDriver(), x0, None)
    diagnostics = []
    done = 0
    for cp in _dyadic_checkpoints(n):
        traj.advance(cp - done)
        done = cp
        diagnostics.append((traj.x - traj._x0) / (TWO_PI * cp))
    F = traj.x - traj._x0
    lo = (F - TWO_PI) / (TWO_PI * n)
    hi = (F + TWO_PI) / (TWO_PI * n)
    return RotationEstimate(
        value=diagnostics[-1],
        n_or_T=float(n),
        convention="map",
        diagnostics=diagnostics,
        enclosure=(lo, hi),
    )


def predicted_iid_rotation(rhos: Sequence[float], probs: Sequence[float]) -> float:
    """Probability-weighted average of the individual rotation numbers."""
    rhos = [float(r) for r in rhos]
    probs = [float(p) for p in probs]
    if len(rhos) != len(probs):
        raise ValidationError("rhos and probs must have the same length")
    if any(p <= 0 for p in probs):
        raise ValidationError("probs must be strictly positive")
    if abs(sum(probs) - 1.0) > 1e-12:
        raise ValidationError("probs must sum to 1 within 1e-12")
    return float(sum(p * r for p, r in zip(probs, rhos)))


def estimate_iid_composition(
    maps: Sequence[CircleLift],
    probs: Sequence[float],
    seed: int,
    n: int,
    ensemble: int = 8,
    x0: float = 0.0,
) -> RotationEstimate:
    """Ensemble-averaged rotation number of random map compositions.

    Each member runs an independent symbol stream derived from `seed`.
    The shared-invariant-measure hypothesis behind the weighted-average
    prediction is the caller's responsibility; it is not checkable here.
    """
    if len(maps) < 1:
        raise ValidationError("need at least one map")
    if len(probs) != len(maps):
        raise ValidationError("probs length must match maps length")
    if ensemble < 1:
        raise ValidationError("ensemble must be >= 1")
    lift = iid_lift(maps)
    members = []
    for member in range(ensemble):
        driver = BernoulliShift(tuple(probs), derive_seed(seed, member))
        members.append(estimate_map(lift, driver, x0=x0, n=n))
    values = np.array([m.value for m in members])
    diag_len = len(members[0].diagnostics)
    diagnostics = [
        float(np.mean([m.diagnostics[i] for m in members])) for i in range(diag_len)
    ]
    value = float(values.mean())
    diagnostics[-1] = value
    sd = float(values.std(ddof=1)) if ensemble > 1 else None
    return RotationEstimate(
        value=value,
        n_or_T=float(n),
        convention="map",
        diagnostics=diagnostics,
        sample_sd=sd,
    )


# -- ODE-convention estimators -----------------------------------------------------


def make_cosine_field(a: float = 2.0, b: float = 1.0) -> OdeField:
    """Autonomous field dx/dt = a + b*cos(x)."""
    a = float(a)
    b = float(b)

    def f(x, w=None, _a=a, _b=b):
        if type(x) is float:
            return _a + _b * math.cos(x)
        return _a + _b * np.cos(x)

    compiled = None
    if _fast.HAVE_NUMBA:
        from numba import njit

        @njit(cache=False)
        def _rhs(x, t, _a=a, _b=b):
            return _a + _b * math.cos(x)

        compiled = _rhs
    return OdeField(
        f=f, lipschitz_bound=abs(a) + abs(b), compiled=compiled, label=f"{a}+{b}cos"
    )


def _rk4_python(rhs, x0: float, dt: float, n: int):
    """Pure-Python twin of the fast integrator; identical arithmetic."""
    snaps = {}
    next_snap = 1
    half = n // 2
    I_half = 0.0
    x = x0
    t = 0.0
    integ = 0.0
    comp = 0.0
    for i in range(n):
        k1 = rhs(x, t)
        k2 = rhs(x + 0.5 * dt * k1, t + 0.5 * dt)
        k3 = rhs(x + 0.5 * dt * k2, t + 0.5 * dt)
        k4 = rhs(x + dt * k3, t + dt)
        xn = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        d = 0.5 * (x + xn) * dt
        y = d - comp
        tt = integ + y
        comp = (tt - integ) - y
        integ = tt
        x = xn
        t += dt
        done = i + 1
        if done == next_snap:
            snaps[done] = integ
            next_snap *= 2
        if done == half:
            I_half = integ
    return x, I_half, integ, snaps


def estimate_ode(
    field: OdeField, driver=None, x0: float = 0.0, T: float = 0.0, dt: float = 0.0
) -> RotationEstimate:
    """Angular growth rate of dx/dt = f(x, w(t)) on the lift.

    Fixed-step classical 4th-order integration (no adaptivity, for
    reproducibility); `dt` must satisfy dt <= 0.1 / lipschitz_bound.  The
    reported value is the two-window mean slope over [0, T/2] and
    [T/2, T], which cancels the bounded phase wobble of the plain
    quotient (x(T)-x0)/T; the dyadic diagnostics converge to the same
    limit.
    """
    M = float(field.lipschitz_bound)
    if M <= 0:
        raise ConfigurationError("lipschitz_bound must be positive")
    if dt <= 0 or dt > 0.1 / M:
        raise ConfigurationError(
            f"dt={dt} violates the step bound dt <= 0.1/M = {0.1 / M}"
        )
    if T < 10 * dt:
        raise ConfigurationError("need T >= 10*dt")
    n = int(round(T / dt))
    n += n % 2
    x0 = float(x0)

    if driver is None and field.compiled is not None and _fast.rk4_winding is not None:
        xT, I_half, I_full, snap_arr, n_snaps = _fast.rk4_winding(
            field.compiled, x0, dt, n
        )
        snaps = {2**j: snap_arr[j] for j in range(n_snaps)}
    else:
        if driver is None:
            rhs = lambda x, t: field.f(x, t)
        else:
            path = driver if callable(driver) else driver.__call__
            rhs = lambda x, t: field.f(x, path(t))
        xT, I_half, I_full, snaps = _rk4_python(rhs, x0, dt, n)
    if not math.isfinite(xT):
        raise EvaluationError("integration produced a non-finite state")

    half = n // 2
    W = half * dt
    diagnostics = []
    j = 2
    while j <= n:
        if j in snaps and (j // 2) in snaps:
            w = (j // 2) * dt
            diagnostics.append((snaps[j] - 2.0 * snaps[j // 2]) / (w * w))
        j *= 2
    value = (I_full - 2.0 * I_half) / (W * W)
    diagnostics.append(value)
    if len(diagnostics) < 2:
        diagnostics.insert(0, (xT - x0) / (n * dt))
    return RotationEstimate(
        value=value, n_or_T=n * dt, convention="ode", diagnostics=diagnostics
    )


def estimate_planar_homogeneous(
    A: Callable,
    u_path: Callable | None,
    T: float,
    dt: float,
    alpha0: float = 0.0,
    lipschitz_bound: float | None = None,
) -> RotationEstimate:
    """Angular growth rate of a positive-homogeneous planar system.

    The radial direction decouples, leaving the scalar angle equation
    ``d(alpha)/dt = <A(w, u(t)), v>`` with w = (cos a, sin a) and
    v = (-sin a, cos a); homogeneity of degree one in x is assumed, not
    checked.  `u_path` may be None for autonomous fields.
    """
    path = (lambda t: None) if u_path is None else u_path

    def f(alpha, t):
        ca = math.cos(alpha)
        sa = math.sin(alpha)
        a1, a2 = A((ca, sa), path(t))
        return -sa * a1 + ca * a2

    probe = f(float(alpha0), 0.0)
    if not math.isfinite(probe):
        raise EvaluationError("planar field evaluated to a non-finite value")
    if lipschitz_bound is None:
        angles = np.linspace(0.0, TWO_PI, 32, endpoint=False)
        samples = [abs(f(float(a), 0.0)) for a in angles]
        lipschitz_bound = 4.0 * max(max(samples), 1e-9)
    field = OdeField(f=lambda x, w: f(x, w), lipschitz_bound=lipschitz_bound)
    # the angle equation is time-explicit; feed t through as the payload
    return estimate_ode(field, driver=(lambda t: t), x0=alpha0, T=T, dt=dt)


# -- parametrized families -----------------------------------------------------------


def continuity_probe(
    lift_family: Callable[[float], CircleLift],
    driver,
    s0: float,
    ds: float,
    n: int,
    x0: float = 0.0,
) -> tuple[float, float, float]:
    """Estimates at s0 and s0+ds for a pointwise-monotone family.

    Returns (rho(s0), rho(s0+ds), difference) computed on the same driver
    realization; raises if the family fails the sampled monotonicity
    check or if the estimates violate monotonicity beyond the estimator
    tolerance 2/n.
    """
    if ds < 0:
        raise ValidationError("ds must be >= 0")
    f0 = lift_family(s0)
    if ds == 0.0:
        e = estimate_map(f0, driver, x0=x0, n=n)
        return e.value, e.value, 0.0
    f1 = lift_family(s0 + ds)
    xs = TWO_PI * np.arange(64) / 64
    driver_chk = _as_driver(driver)
    w = driver_chk.payload(driver_chk.initial_state())
    if np.any(f1(xs, w) - f0(xs, w) < -1e-12):
        raise ValidationError("family is not pointwise monotone in the parameter")
    e0 = estimate_map(f0, driver, x0=x0, n=n)
    e1 = estimate_map(f1, driver, x0=x0, n=n)
    delta = e1.value - e0.value
    if e0.value > e1.value + 2.0 / n:
        raise EvaluationError(
            f"estimates violate monotonicity beyond tolerance: {e0.value} > {e1.value}"
        )
    return e0.value, e1.value, delta
