"""Principal branch of the Lambert W function for real arguments.

Solves w * exp(w) = x for x >= -1/e with a Halley iteration.  Scalar only;
the uplink solver needs one evaluation per node, so there is no need for a
vectorized path.
"""

from __future__ import annotations

import math

BRANCH_POINT = -1.0 / math.e

MAX_ITERS = 50
RESIDUAL_TOL = 1e-12


def _initial_guess(x: float) -> float:
    if x > math.e:
        # Asymptotic log form keeps Halley in the basin for large arguments.
        lx = math.log(x)
        return lx - math.log(lx)
    if x > 0.0:
        return x / (1.0 + x)
    # Series around the branch point in p = sqrt(2 (e x + 1)).
    p = math.sqrt(2.0 * (math.e * x + 1.0))
    return -1.0 + p - p * p / 3.0 + 11.0 * p**3 / 72.0


def lambert_w0(x: float) -> float:
    """Real principal-branch W(x); raises ValueError for x < -1/e."""
    x = float(x)
    if math.isnan(x):
        raise ValueError("lambert_w0 is undefined for NaN")
    if x < BRANCH_POINT:
        # Tolerate roundoff just below the branch point.
        if x > BRANCH_POINT - 1e-15 * max(1.0, abs(BRANCH_POINT)):
            return -1.0
        raise ValueError(f"lambert_w0 domain is [-1/e, inf); got {x}")
    if x == 0.0:
        return 0.0
    w = _initial_guess(x)
    tol = RESIDUAL_TOL * max(1.0, abs(x))
    for _ in range(MAX_ITERS):
        ew = math.exp(w)
        resid = w * ew - x
        # Halley step for f(w) = w e^w - x.
        wp1 = w + 1.0
        if resid == 0.0 or wp1 == 0.0:
            break
        denom = ew * wp1 - (w + 2.0) * resid / (2.0 * wp1)
        if denom == 0.0:
            break
        step = resid / denom
        w -= step
        if w < -1.0:
            w = -1.0 + 1e-16
        # Iterate to a fixed point in w, not just a small residual: near the
        # branch point the residual is flat in w and would stop too early.
        if abs(step) <= 2e-16 * max(1.0, abs(w)):
            break
    if abs(w * math.exp(w) - x) <= tol:
        return w
    raise ArithmeticError(f"lambert_w0 failed to converge for x = {x}")
