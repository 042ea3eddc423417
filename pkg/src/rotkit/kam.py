"""Conjugation of near-rotation torus maps to rigid rotations.

The engine follows the quadratic scheme: solve the linearized
(homological) difference equation for the mean-free part of the
perturbation, conjugate by the resulting near-identity map on a grid,
re-project, shrink the analyticity strip by delta, and square the
schedule with ``delta_{n+1} = delta_n**1.5``.  Constants in the classic
convergence proof are existence-grade, so the loop *measures* its own
contraction and fails loudly (DivergenceError) when the residuals stop
contracting instead of pretending to a rigorous threshold.

All quantities are tracked through coefficient majorants; the final
conjugacy defect is re-measured in the angular metric on a finer grid
than any used during the iteration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from . import fourier
from .diophantine import DiophantineCertificate, certify
from .dynamics import TWO_PI, CircleLift, TorusRotation
from .errors import (
    ConfigurationError,
    DivergenceError,
    EvaluationError,
    InversionError,
    IterationError,
    RangeError,
    ResonanceError,
    UnsolvableError,
    ValidationError,
)
from .fourier import FourierSeries
from .rotation import deterministic_enclosure, estimate_map_cesaro

__all__ = [
    "TorusMap",
    "KamConfig",
    "KamState",
    "ConjugacyResult",
    "SmallDivisorReport",
    "solve_homological",
    "small_divisor_bound_check",
    "invert_near_identity",
    "conjugacy_defect",
    "kam_step",
    "run_kam",
    "match_rotation_parameter",
    "conjugate_skew_product",
]

_EPS = float(np.finfo(float).eps)

_ORDER_CAPS = {1: 64, 2: 24, 3: 10}


@dataclass(frozen=True)
class TorusMap:
    """Near-rotation torus map z -> z + 2*pi*mu + p(z)."""

    mu: tuple[float, ...]
    p: FourierSeries

    def __post_init__(self):
        mu = tuple(float(v) for v in np.atleast_1d(np.asarray(self.mu, dtype=float)))
        object.__setattr__(self, "mu", mu)
        if self.p.dim != len(mu):
            raise ValidationError("perturbation dim must match rotation vector length")
        if self.p.value_dim not in (1, self.p.dim) or (
            self.p.dim > 1 and self.p.value_dim != self.p.dim
        ):
            raise ValidationError("perturbation must be vector-valued on the torus")
        if not self.p.is_real_symmetric(1e-9):
            raise ValidationError("perturbation must be real on the real torus")

    @property
    def dim(self) -> int:
        return self.p.dim


@dataclass(frozen=True)
class KamConfig:
    """Tunables of the conjugation loop.

    The strip schedule is r_{n+1} = r_n - delta_n with
    delta_{n+1} = delta_n**1.5; delta0 must keep the total shrink below
    half the initial radius.  Truncation orders grow per stage as
    base_order * ceil(delta_n**-0.5), capped.  The smallness gate
    `max_initial_norm` and the caps are working defaults chosen
    empirically at desk scale, not derived constants.
    """

    r0: float | None = None
    delta0: float = 0.1
    max_stages: int = 12
    defect_target: float = 1e-10
    inversion_tol: float = 1e-14
    order_cap: int | None = None
    base_order: int | None = None
    oversample: int = 4
    divergence_factor: float = 2.0
    max_initial_norm: float | None = None
    keep_stages: bool = False

    def __post_init__(self):
        if not 0.0 < self.delta0 <= 0.5:
            raise ConfigurationError("delta0 must lie in (0, 1/2]")
        if self.max_stages < 1:
            raise ConfigurationError("max_stages must be >= 1")
        if self.defect_target <= 0:
            raise ConfigurationError("defect_target must be positive")

    def schedule_sum(self) -> float:
        total, d = 0.0, self.delta0
        while d > 1e-18:
            total += d
            d = d**1.5
        return total

    def order_for(self, delta: float, base_order: int, cap: int) -> int:
        return min(cap, base_order * max(1, math.ceil(delta**-0.5)))


@dataclass
class KamState:
    """One rung of the conjugation ladder."""

    stage: int
    map_n: TorusMap
    r_n: float
    delta_n: float
    residual_history: list = dc_field(default_factory=list)
    mean_history: list = dc_field(default_factory=list)
    homological_residuals: list = dc_field(default_factory=list)
    H_accum: FourierSeries | None = None
    stage_maps: list = dc_field(default_factory=list)


@dataclass
class ConjugacyResult:
    """Outcome of a conjugation run.

    `h` is the displacement of the accumulated transformation
    H(z) = z + h(z) satisfying H(z + 2*pi*mu) ~= Phi(H(z)); `defect` is
    the angular sup of the mismatch on an independent grid.
    """

    status: str
    mu: tuple[float, ...]
    h: FourierSeries
    defect: float
    stages_used: int
    residuals: list
    mean_history: list
    r_history: list
    delta_history: list
    certificate: DiophantineCertificate | None
    stage_maps: list = dc_field(default_factory=list)

    @property
    def fiber_h(self) -> FourierSeries:
        """First (circle-fiber) component of the conjugacy displacement."""
        return self.h.component(0)

    def to_record(self) -> dict:
        return {
            "status": self.status,
            "mu": list(self.mu),
            "defect": self.defect,
            "stages_used": self.stages_used,
            "certificate": self.certificate.to_record() if self.certificate else None,
            "residual_history": [
                {
                    "stage": i,
                    "r": self.r_history[i],
                    "delta": self.delta_history[i],
                    "residual": self.residuals[i],
                    "mean_abs": self.mean_history[i],
                }
                for i in range(len(self.residuals))
            ],
            "h": fourier.to_flat(self.h),
        }


@dataclass(frozen=True)
class SmallDivisorReport:
    """Check of the strip-loss bound for the difference-equation solution."""

    lhs: float
    rhs: float
    lam: float
    chain_bound: float
    holds: bool


# -- helpers -------------------------------------------------------------------


def _vec_vals(series: FourierSeries, arr: np.ndarray) -> np.ndarray:
    """Normalize to_grid/eval_at output to shape (dim,) + grid."""
    if series.value_dim == 1 and arr.ndim == series.dim:
        return arr[np.newaxis, ...]
    return arr


def _clean(series: FourierSeries, threshold: float) -> FourierSeries:
    if threshold <= 0:
        return series
    c = series.coeffs.copy()
    c[np.abs(c) < threshold] = 0.0
    return FourierSeries(c, series.dim)


def _divisors(mu: tuple[float, ...], dim: int, order: int):
    """Complex divisors exp(2*pi*i*<mu,k>) - 1 over the mode cube."""
    ks = np.arange(-order, order + 1, dtype=float)
    theta = np.zeros((2 * order + 1,) * dim)
    for axis in range(dim):
        shape = [1] * dim
        shape[axis] = 2 * order + 1
        theta = theta + mu[axis] * ks.reshape(shape)
    frac = theta - np.round(theta)
    s = np.sin(math.pi * frac)
    c = np.cos(math.pi * frac)
    div = (-2.0 * s * s) + 1j * (2.0 * s * c)
    return div, 2.0 * np.abs(s)


def _canonical_mode(k: Sequence[int]) -> tuple[int, ...]:
    k = tuple(int(v) for v in k)
    for v in k:
        if v > 0:
            return k
        if v < 0:
            return tuple(-u for u in k)
    return k


# -- core operations -------------------------------------------------------------


def solve_homological(
    p: FourierSeries,
    mu,
    mean_tol: float = 1e-14,
    resonance_tol: float = 1e-14,
) -> FourierSeries:
    """Solve h(z + 2*pi*mu) - h(z) = p(z) mode by mode.

    Requires mean-free p (the difference operator annihilates constants,
    so a nonzero mean makes the equation unsolvable) and no machine-exact
    resonance among modes that carry coefficient mass.  The solution has
    ``h_k = p_k / (exp(2*pi*i*<mu,k>) - 1)`` and zero mean.
    """
    mu_t = tuple(float(v) for v in np.atleast_1d(np.asarray(mu, dtype=float)))
    if len(mu_t) != p.dim:
        raise ValidationError("mu length must match torus dimension")
    mean_mag = np.abs(np.atleast_1d(fourier.mean(p))).max()
    if mean_mag > mean_tol:
        raise UnsolvableError(
            f"forcing has nonzero mean {mean_mag:.3e} (> {mean_tol:.0e}); "
            "the difference equation annihilates constants"
        )
    div, div_abs = _divisors(mu_t, p.dim, p.order)
    mass = np.abs(p.coeffs).max(axis=0)
    scale = float(mass.max()) if mass.size else 0.0
    resonant = (div_abs < resonance_tol) & (mass > max(1e-300, 1e-14 * scale))
    center = (p.order,) * p.dim
    resonant[center] = False  # the mean is handled above
    if resonant.any():
        idx = np.argwhere(resonant)[0]
        k = _canonical_mode(idx - p.order)
        raise ResonanceError(k, f"divisor underflow at mode k={k}")
    safe = div.copy()
    safe[div_abs < resonance_tol] = 1.0
    h = p.coeffs / safe
    h[(slice(None),) + tuple(np.argwhere(div_abs < resonance_tol).T)] = 0.0
    h[(slice(None),) + center] = 0.0
    return FourierSeries(h, p.dim)


def small_divisor_bound_check(
    p: FourierSeries,
    h: FourierSeries,
    mu,
    r: float,
    delta: float,
    certificate: DiophantineCertificate,
) -> SmallDivisorReport:
    """Report whether ||h||_{r-delta} <= ||p||_r * delta**-lam holds.

    lam is the smallest integer for which the constant chain
    ``8 M C^-1 (nu/e)^nu ((4m-4)/e)^(m-1) (delta/2)^-(nu+m)`` is
    dominated by ``M delta^-lam``; both the chain value and the actual
    majorants are returned.
    """
    if not 0 < delta < r:
        raise ValidationError("need 0 < delta < r")
    if certificate.K_checked < p.order:
        raise ValidationError(
            "certificate cutoff is below the retained order of the forcing"
        )
    m = p.dim
    nu = certificate.nu
    M = fourier.majorant_norm(p, r).value
    lhs = fourier.majorant_norm(h, r - delta).value
    if M == 0.0:
        return SmallDivisorReport(lhs=lhs, rhs=0.0, lam=0.0, chain_bound=0.0, holds=lhs <= 0.0)
    C = certificate.C_best
    if C <= 0.0:
        return SmallDivisorReport(
            lhs=lhs, rhs=math.inf, lam=math.inf, chain_bound=math.inf, holds=False
        )
    lead = 1.0 if m == 1 else ((4.0 * m - 4.0) / math.e) ** (m - 1)
    chain = 8.0 * M / C * (nu / math.e) ** nu * lead * (delta / 2.0) ** (-(nu + m))
    lam = max(0, math.ceil(math.log(chain / M) / math.log(1.0 / delta)))
    rhs = M * delta ** (-float(lam))
    return SmallDivisorReport(
        lhs=lhs, rhs=rhs, lam=float(lam), chain_bound=chain, holds=lhs <= rhs
    )


def _derivative_row_bound(h: FourierSeries) -> float:
    """Majorant bound for the sup operator norm of Dh (max row sum)."""
    rows = []
    for i in range(h.value_dim):
        comp = h.component(i)
        rows.append(
            sum(
                fourier.majorant_norm(fourier.derivative(comp, axis=j), 0.0).value
                for j in range(h.dim)
            )
        )
    return max(rows)


def invert_near_identity(
    h: FourierSeries,
    grid_size: int | None = None,
    inversion_tol: float = 1e-14,
    max_sweeps: int = 100,
    order: int | None = None,
) -> FourierSeries:
    """Displacement g of the inverse of z -> z + h(z).

    Solves ``g(w) = -h(w + g(w))`` by fixed-point sweeps at the grid
    nodes and re-projects; requires the derivative of h to stay below
    1/2 in operator norm so the sweep contracts.
    """
    m = h.dim
    if h.value_dim != m and not (m == 1 and h.value_dim == 1):
        raise ValidationError("displacement must have one component per coordinate")
    N = grid_size or _even(4 * (2 * h.order + 1))
    nodes = fourier.grid_nodes(m, N)

    # derivative guard on the grid (operator 2-norm at each node)
    dmat = np.empty((m, m) + (N,) * m)
    for i in range(h.value_dim):
        comp = h.component(i)
        for j in range(m):
            dmat[i, j] = fourier.to_grid(fourier.derivative(comp, axis=j), N).real
    opnorm = np.linalg.norm(np.moveaxis(dmat.reshape(m, m, -1), -1, 0), ord=2, axis=(1, 2))
    if float(opnorm.max()) >= 0.5:
        raise InversionError(
            f"sup |Dh| = {opnorm.max():.3f} >= 0.5: inversion sweep would not contract"
        )

    g = -_vec_vals(h, fourier.to_grid(h, N)).real
    for _ in range(max_sweeps):
        new_g = -_vec_vals(h, fourier.eval_at(h, nodes + g)).real
        change = float(np.abs(new_g - g).max())
        g = new_g
        if change <= inversion_tol:
            break
    else:
        raise IterationError(
            f"inversion sweep did not reach {inversion_tol} in {max_sweeps} sweeps"
        )
    out = fourier.from_grid(g, order if order is not None else h.order, dim=m)
    out = FourierSeries(
        0.5 * (out.coeffs + np.conj(out.coeffs[(slice(None),) + (slice(None, None, -1),) * m])),
        m,
    )
    return out


def conjugacy_defect(h: FourierSeries, tmap: TorusMap, grid_size: int = 1024) -> float:
    """Angular sup of H(z + 2*pi*mu) - Phi(H(z)) with H = id + h.

    The rigid parts cancel exactly, leaving
    ``h(z + 2*pi*mu) - h(z) - p(z + h(z))`` compared modulo 2*pi,
    componentwise, on the grid.
    """
    m = tmap.dim
    N = int(grid_size)
    shift = TWO_PI * np.asarray(tmap.mu)
    nodes = fourier.grid_nodes(m, N)
    hv = _vec_vals(h, fourier.to_grid(h, N)).real
    hs = _vec_vals(h, fourier.to_grid(fourier.shifted(h, shift), N)).real
    pv = _vec_vals(tmap.p, fourier.eval_at(tmap.p, nodes + hv)).real
    diff = hs - hv - pv
    ang = np.abs((diff + math.pi) % TWO_PI - math.pi)
    return float(ang.max())


def _even(n: int) -> int:
    return n + (n % 2)


# -- the quadratic step and the driver loop ----------------------------------------


def kam_step(state: KamState, certificate: DiophantineCertificate, config: KamConfig) -> KamState:
    """One quadratic stage: solve, conjugate on the grid, re-project.

    Removes the perturbation mean before solving (the mean re-enters the
    new perturbation and is driven to second order by the preserved
    rotation vector), shrinks the strip by delta_n, grows the truncation
    order per the schedule, and appends the new residual majorant.
    """
    tmap = state.map_n
    m = tmap.dim
    mu = np.asarray(tmap.mu)
    p = tmap.p
    prev_residual = state.residual_history[-1] if state.residual_history else None

    p_mean = np.atleast_1d(fourier.mean(p))
    p_tilde = fourier.remove_mean(p)
    h = solve_homological(p_tilde, tmap.mu, mean_tol=math.inf)

    # linearized-solution residual, coefficient-majorant version of the
    # grid check ||h(.+2*pi*mu) - h - p~||
    hri = fourier.majorant_norm(
        FourierSeries(
            fourier.shifted(h, TWO_PI * mu).coeffs - h.coeffs - p_tilde.coeffs, m
        ),
        0.0,
    ).value

    dh_bound = _derivative_row_bound(h)
    if dh_bound >= 0.5:
        raise InversionError(
            f"stage {state.stage}: derivative majorant {dh_bound:.3f} >= 0.5; "
            "perturbation too large for the near-identity inversion"
        )
    g = invert_near_identity(h, inversion_tol=config.inversion_tol)

    caps = config.order_cap or _ORDER_CAPS.get(m, 8)
    base = config.base_order or _content_order(p)
    next_delta = state.delta_n**1.5
    K_next = config.order_for(next_delta, base, caps)

    N = _even(config.oversample * (2 * max(K_next, p.order, h.order) + 1))
    nodes = fourier.grid_nodes(m, N)
    hv = _vec_vals(h, fourier.to_grid(h, N)).real
    p_at = _vec_vals(p, fourier.eval_at(p, nodes + hv)).real
    w = nodes + (TWO_PI * mu).reshape((m,) + (1,) * m) + hv + p_at
    g_at = _vec_vals(g, fourier.eval_at(g, w)).real
    samples = hv + p_at + g_at

    tau = 64.0 * _EPS * max(
        float(np.abs(hv).max()), float(np.abs(p_at).max()), float(np.abs(g_at).max())
    )
    new_p = fourier.from_grid(samples, K_next, dim=m)
    new_p = FourierSeries(
        0.5
        * (
            new_p.coeffs
            + np.conj(new_p.coeffs[(slice(None),) + (slice(None, None, -1),) * m])
        ),
        m,
    )
    new_p = _clean(new_p, tau)

    r_next = state.r_n - state.delta_n
    residual = fourier.majorant_norm(new_p, r_next).value
    if not math.isfinite(residual):
        raise DivergenceError(state.stage, state.residual_history + [residual])
    if prev_residual is not None and residual > config.divergence_factor * prev_residual:
        raise DivergenceError(
            state.stage,
            state.residual_history + [residual],
            f"residual grew from {prev_residual:.3e} to {residual:.3e} at stage "
            f"{state.stage}: resonant or out-of-range perturbation",
        )

    # accumulate H_{n+1} = H_n o (id + h): displacement h + A(id + h)
    A = state.H_accum
    if A is None or A.is_zero():
        A_new = fourier.truncated(h, min(max(h.order, K_next), caps))
    else:
        A_at = _vec_vals(A, fourier.eval_at(A, nodes + hv)).real
        A_samples = hv + A_at
        K_H = min(max(A.order, h.order, K_next), caps)
        A_new = fourier.from_grid(A_samples, K_H, dim=m)
        A_new = FourierSeries(
            0.5
            * (
                A_new.coeffs
                + np.conj(A_new.coeffs[(slice(None),) + (slice(None, None, -1),) * m])
            ),
            m,
        )
        A_new = _clean(A_new, 64.0 * _EPS * max(1.0, float(np.abs(A_samples).max())))

    new_map = TorusMap(tmap.mu, new_p)
    new_state = KamState(
        stage=state.stage + 1,
        map_n=new_map,
        r_n=r_next,
        delta_n=next_delta,
        residual_history=state.residual_history + [residual],
        mean_history=state.mean_history + [float(np.abs(np.atleast_1d(fourier.mean(new_p))).max())],
        homological_residuals=state.homological_residuals + [hri],
        H_accum=A_new,
        stage_maps=state.stage_maps + ([new_map] if config.keep_stages else []),
    )
    return new_state


def _content_order(p: FourierSeries) -> int:
    mags = np.abs(p.coeffs).max(axis=0)
    scale = float(mags.max())
    if scale == 0.0:
        return 4
    idx = np.argwhere(mags > 1e-15 * scale)
    k_inf = int(np.abs(idx - p.order).max()) if idx.size else 0
    return max(4, k_inf)


def run_kam(
    tmap: TorusMap, config: KamConfig, certificate: DiophantineCertificate
) -> ConjugacyResult:
    """Iterate quadratic stages until the conjugacy defect meets target.

    Returns a ConjugacyResult whose status is ``converged`` when the
    angular defect on an independent finer grid is at or below
    `defect_target`, ``diverged`` when max_stages ran out first.  A
    resonant certificate raises ResonanceError; a residual that grows
    past the divergence factor raises DivergenceError carrying the
    trace.
    """
    m = tmap.dim
    if certificate.C_best <= 0.0:
        raise ResonanceError(
            certificate.worst_k,
            f"rotation vector is resonant at k={certificate.worst_k} "
            "(certified divisor 0)",
        )
    p = tmap.p

    r0 = config.r0
    if r0 is None:
        try:
            _, r_fit = fourier.decay_fit(p)
            r0 = min(0.5, r_fit) if r_fit > 0 else 0.5
        except Exception:
            r0 = 0.5
    shrink = config.schedule_sum()
    if shrink >= r0 / 2.0:
        raise ConfigurationError(
            f"strip schedule exhausts the radius: sum(delta_n) = {shrink:.4f} "
            f">= r0/2 = {r0 / 2.0:.4f}; lower delta0 or raise r0"
        )
    initial = fourier.majorant_norm(p, r0).value
    gate = config.max_initial_norm or (1e-2 if m == 1 else 1e-3)
    if initial > gate:
        raise ValidationError(
            f"perturbation majorant {initial:.3e} exceeds the smallness gate "
            f"{gate:.0e} at radius {r0:.3f}"
        )

    state = KamState(
        stage=0,
        map_n=tmap,
        r_n=r0,
        delta_n=config.delta0,
        residual_history=[initial],
        mean_history=[float(np.abs(np.atleast_1d(fourier.mean(p))).max())],
        H_accum=None,
        stage_maps=[tmap] if config.keep_stages else [],
    )

    def _result(status: str, defect: float, h: FourierSeries) -> ConjugacyResult:
        r_hist, d_hist = [], []
        r, d = r0, config.delta0
        for _ in state.residual_history:
            r_hist.append(r)
            d_hist.append(d)
            r -= d
            d = d**1.5
        return ConjugacyResult(
            status=status,
            mu=tmap.mu,
            h=h,
            defect=defect,
            stages_used=state.stage,
            residuals=list(state.residual_history),
            mean_history=list(state.mean_history),
            r_history=r_hist[: len(state.residual_history)],
            delta_history=d_hist[: len(state.residual_history)],
            certificate=certificate,
            stage_maps=list(state.stage_maps),
        )

    identity = fourier.zeros(m, 0, value_dim=p.value_dim)
    if initial == 0.0:
        return _result("converged", 0.0, identity)

    defect_grid = _defect_grid(m, config)
    for _ in range(config.max_stages):
        state = kam_step(state, certificate, config)
        if state.residual_history[-1] <= 0.6 * config.defect_target:
            defect = conjugacy_defect(state.H_accum, tmap, defect_grid)
            if defect <= config.defect_target:
                return _result("converged", defect, state.H_accum)
    h = state.H_accum if state.H_accum is not None else identity
    defect = conjugacy_defect(h, tmap, defect_grid)
    status = "converged" if defect <= config.defect_target else "diverged"
    return _result(status, defect, h)


def _defect_grid(m: int, config: KamConfig) -> int:
    cap = config.order_cap or _ORDER_CAPS.get(m, 8)
    stage_grid = _even(config.oversample * (2 * cap + 1))
    if m == 1:
        return max(2048, 2 * stage_grid)
    if m == 2:
        return max(384, int(1.5 * stage_grid) + (int(1.5 * stage_grid) % 2))
    return stage_grid + 2


# -- parameter matching and the skew-product wrapper --------------------------------


def match_rotation_parameter(
    family: Callable[[float], CircleLift],
    target_rho: float,
    tol: float,
    driver: TorusRotation | None = None,
    verify: bool = True,
) -> float:
    """Parameter c making the family's rotation number equal target_rho.

    Monotone bracketing on the rigid part, then a root solve on the
    two-window averaged estimator whose wobble decays like 1/n^2; for
    loose tolerances (>= 1e-6) a rigorous enclosure re-check at the
    matched point confirms containment.  Driver-independent families get
    the enclosure verification; driven ones are re-checked with a
    doubled averaging window.
    """
    target = float(target_rho)
    c0 = TWO_PI * target
    probe = family(c0)
    if probe.displacement is None:
        return c0

    # sampled displacement bound gives a guaranteed monotone bracket
    xs = np.linspace(0.0, TWO_PI, 64, endpoint=False)
    if driver is None:
        w0 = None
    else:
        w0 = driver.payload(driver.initial_state())
    eta = float(np.abs(np.asarray(probe.displacement(xs, w0))).max())
    pad = eta + 0.05 * (1.0 + eta)
    if pad > TWO_PI:
        raise RangeError(
            "displacement too large to bracket the target inside one turn"
        )
    lo, hi = c0 - pad, c0 + pad

    N = int(min(400_000, max(50_000, 2.0 / math.sqrt(max(tol, 1e-13)))))

    def averaged(c: float) -> float:
        lift = family(c)
        est = estimate_map_cesaro(lift, driver, x0=0.0, n=2 * N)
        return est.value

    flo = averaged(lo) - target
    fhi = averaged(hi) - target
    if flo > 0 or fhi < 0:
        raise RangeError(
            f"target {target} not bracketed by the family on [{lo:.6f}, {hi:.6f}]"
        )
    c = float(
        brentq(lambda cc: averaged(cc) - target, lo, hi, xtol=1e-14, maxiter=200)
    )

    if verify:
        resid = abs(averaged(c) - target)
        if resid > max(tol, 1e-10):
            raise EvaluationError(
                f"matched parameter misses the target by {resid:.3e} (> {tol:.0e})"
            )
        if driver is None and tol >= 1e-6:
            n_enc = int(min(4_000_000, math.ceil(2.0 / tol)))
            enc = deterministic_enclosure(family(c), n_enc)
            lo_e, hi_e = enc.enclosure
            if not lo_e <= target <= hi_e:
                raise EvaluationError(
                    f"enclosure [{lo_e}, {hi_e}] at n={n_enc} misses the target"
                )
    return c


def conjugate_skew_product(
    lift: CircleLift,
    driver: TorusRotation,
    rho: float,
    config: KamConfig | None = None,
    certificate: DiophantineCertificate | None = None,
    order: int = 8,
    oversample: int = 4,
) -> ConjugacyResult:
    """Conjugate a driven circle lift over a torus rotation to R_(rho,alpha).

    The skew product embeds as the torus map
    ``(x, w) -> (phi(x, w), w + 2*pi*alpha)`` whose perturbation has the
    fiber displacement in its first component and exact zeros in the base
    components; the base stays a rigid rotation through every stage, and
    the returned result's `fiber_h` is the circle-valued conjugacy.
    """
    m = 1 + driver.dim
    alpha = driver.alpha
    mu = (float(rho),) + alpha
    N = _even(oversample * (2 * order + 1))
    nodes = fourier.grid_nodes(m, N)
    x_mesh = nodes[0]
    if driver.dim == 1:
        w_payload = nodes[1]
    else:
        w_payload = nodes[1:]
    if lift.displacement is None:
        disp_vals = np.zeros_like(x_mesh)
    else:
        disp_vals = np.asarray(lift.displacement(x_mesh, w_payload), dtype=float)
    fiber = (TWO_PI * lift.rho0 - TWO_PI * rho) + disp_vals
    samples = np.zeros((m,) + (N,) * m)
    samples[0] = fiber
    p = fourier.from_grid(samples, order, dim=m)
    p = FourierSeries(
        0.5
        * (p.coeffs + np.conj(p.coeffs[(slice(None),) + (slice(None, None, -1),) * m])),
        m,
    )
    p = _clean(p, 64.0 * _EPS * max(1.0, float(np.abs(fiber).max())))
    tmap = TorusMap(mu, p)
    config = config or KamConfig()
    if certificate is None:
        certificate = certify(mu, nu=float(m), K=max(100, 2 * m * order))
    return run_kam(tmap, config, certificate)
