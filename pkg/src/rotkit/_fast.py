"""Optional numba-accelerated inner loops.

Import never fails: when numba is unavailable every export is None and
callers fall back to the pure-Python loops (identical arithmetic).
"""

from __future__ import annotations

try:  # pragma: no cover - exercised implicitly
    from numba import njit

    HAVE_NUMBA = True
except Exception:  # pragma: no cover
    njit = None
    HAVE_NUMBA = False

if HAVE_NUMBA:
    import numpy as np

    @njit(cache=True)
    def rk4_winding(rhs, x0, dt, n):
        """Classical one-step 4th-order integration of dx/dt = rhs(x, t).

        Returns (x at n*dt, cumulative trapezoid integrals of x at the
        step counts 1, 2, 4, ..., and at n//2 and n).  Snapshot slot j
        holds the integral after 2**j steps.
        """
        max_snaps = 64
        snaps = np.zeros(max_snaps)
        n_snaps = 0
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
            if done == next_snap and n_snaps < max_snaps:
                snaps[n_snaps] = integ
                n_snaps += 1
                next_snap *= 2
            if done == half:
                I_half = integ
        return x, I_half, integ, snaps, n_snaps

else:  # pragma: no cover
    rk4_winding = None
