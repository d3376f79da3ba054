"""Wiretap-code rate optimizers on the gamma-surrogate throughput surface.

The closed-form stationarity conditions for both schemes are implemented as
fixed-point maps, exactly as they are stated: a damped iteration is always
attempted first.  These maps are not contractive everywhere -- near the
interesting operating points their local multiplier can exceed one, in which
case damped iteration walks away from the root it is supposed to find.  Each
solver therefore carries a deterministic fallback chain:

1. damped fixed-point iteration on the closed-form map;
2. sign-scan plus bisection on the residual of the *same* equation (the root
   is identical, bisection just does not care about the multiplier);
3. grid search with golden-section refinement of the throughput objective.

All solvers evaluate and report on the gamma-surrogate (``use_approx=True``)
surface they are derived on; the exact-kernel value of a returned optimum is
available by re-evaluating :func:`fso_secrecy.secrecy.est_fixed` /
``est_adaptive`` without the flag.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy import special as _sp

from fso_secrecy import specfun
from fso_secrecy.channel import ScenarioConfig, bob_link, eve_link
from fso_secrecy.secrecy import (
    RatePair,
    SecrecyConstraint,
    est_adaptive,
    est_fixed,
    sop_approx,
)
from fso_secrecy.specfun import ConvergenceError

__all__ = [
    "SolverOptions",
    "Optimum",
    "re_threshold",
    "adaptive_unconstrained_re",
    "adaptive_optimal",
    "fixed_unconstrained_pair",
    "fixed_constrained_rb",
    "fixed_optimal",
    "grid_refine_maximize",
]

_LN2 = math.log(2.0)
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0

# Hard ceiling on any rate iterate; 2**rate must stay finite and the model
# carries no information this far out anyway.
_RATE_CEIL = 60.0


@dataclass(frozen=True)
class SolverOptions:
    """Iteration and oracle controls shared by all solvers."""

    rate_tol: float = 1e-9
    max_iter: int = 200
    damping: float = 0.5
    grid_points: int = 400

    def __post_init__(self) -> None:
        if not self.rate_tol > 0.0:
            raise ValueError("rate_tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if not 0.0 < self.damping <= 1.0:
            raise ValueError("damping must lie in (0, 1]")
        if self.grid_points < 2:
            raise ValueError("grid_points must be at least 2")


_DEFAULT = SolverOptions()


@dataclass(frozen=True)
class Optimum:
    """A solver result: rates, the throughput there, and diagnostics.

    ``method`` records which closed form produced the point
    (``fixed_point``, ``lambert_w``, ``threshold``) or ``grid_oracle`` when
    a search fallback was the final word.  ``hessian_ok`` reports the local
    second-order check where one is performed; it is not an error flag.
    """

    rates: RatePair
    est: float
    method: str
    hessian_ok: bool
    constraint_active: bool


# ---------------------------------------------------------------------------
# per-scenario solver contexts
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _LinkCtx:
    k: float
    theta: float
    scale: float  # gamma0 * a0 * n_rx * theta: maps rate to the gamma argument
    xi2: float


def _eve_ctx(sc: ScenarioConfig) -> _LinkCtx:
    link = eve_link(sc)
    ga = link.ga
    scale = sc.nodes.gamma0 * link.pointing.a0 * sc.nodes.n_e * ga.theta_ap
    xi = link.pointing.xi
    return _LinkCtx(k=ga.k_ap, theta=ga.theta_ap, scale=scale, xi2=xi * xi)


def _bob_ctx(sc: ScenarioConfig) -> _LinkCtx:
    link = bob_link(sc)
    ga = link.ga
    scale = sc.nodes.gamma0 * link.pointing.a0 * sc.nodes.n_b * ga.theta_ap
    return _LinkCtx(k=ga.k_ap, theta=ga.theta_ap, scale=scale, xi2=math.inf)


def _t_of(rate: float, ctx: _LinkCtx) -> float:
    return (2.0 ** min(rate, _RATE_CEIL) - 1.0) / ctx.scale


# ---------------------------------------------------------------------------
# generic search helpers (deterministic, first-index tie-breaking)
# ---------------------------------------------------------------------------


def _golden_in(f, lo: float, hi: float, iters: int = 120) -> float:
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def _grid_then_golden(f, lo: float, hi: float, n: int) -> tuple[float, float]:
    """Coarse scan for the incumbent cell, then golden refinement inside it.

    Plain golden section mis-brackets on objectives with flat (gated-to-zero)
    stretches, so the bracket always comes from the scan.
    """
    if n < 2:
        raise ValueError("grid scan needs at least 2 points")
    step = (hi - lo) / (n - 1)
    best_i = 0
    best_v = -math.inf
    for i in range(n):
        v = f(lo + i * step)
        if v > best_v:
            best_i, best_v = i, v
    a = lo + max(best_i - 1, 0) * step
    b = lo + min(best_i + 1, n - 1) * step
    x = _golden_in(f, a, b)
    fx = f(x)
    if fx > best_v:
        return x, fx
    return lo + best_i * step, best_v


def _d1(f, x: float, h: float = 1e-5) -> float:
    return (f(x + h) - f(x - h)) / (2.0 * h)


def _d2(f, x: float, h: float = 1e-4) -> float:
    return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h)


def _bisect_root(g, lo: float, hi: float, tol: float, iters: int = 200) -> float:
    glo = g(lo)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if hi - lo < tol:
            return mid
        gm = g(mid)
        if (glo > 0.0) == (gm > 0.0):
            lo, glo = mid, gm
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# threshold redundancy rate (constrained-secrecy inversion)
# ---------------------------------------------------------------------------


def re_threshold(sc: ScenarioConfig, s_th: float, opts: SolverOptions | None = None) -> float:
    """Redundancy rate at which the surrogate secrecy outage equals ``s_th``.

    The inversion of the surrogate outage is itself a fixed point (the rate
    appears inside the gamma argument), resolved by damped iteration seeded
    at the pointing-free inversion; the returned rate is nudged upward by at
    most a few ulps so the outage at the result never exceeds ``s_th``.
    """
    if not 0.0 < s_th <= 1.0:
        raise ValueError(f"s_th must lie in (0, 1], got {s_th}")
    if s_th == 1.0:
        return 0.0
    opts = opts or _DEFAULT
    eve = _eve_ctx(sc)
    t0 = float(_sp.gammaincinv(eve.k, 1.0 - s_th))
    r = math.log2(1.0 + t0 * eve.scale)
    if sc.sigma_s == 0.0:
        # No misalignment: the pointing-free inversion is already exact.
        return _nudge_to_feasible(sc, r, s_th)

    lg_k = math.lgamma(eve.k)
    converged = False
    for _ in range(4 * opts.max_iter):
        t = _t_of(r, eve)
        num = math.exp(lg_k) * (float(_sp.gammaincc(eve.k, t)) - s_th)
        if num <= 0.0:
            r *= 0.5
            continue
        ev = specfun.exp_integral(eve.xi2 - eve.k + 1.0, t)
        r_new = math.log2(1.0 + eve.scale * (num / ev) ** (1.0 / eve.k))
        if abs(r_new - r) < opts.rate_tol:
            r = r_new
            converged = True
            break
        r = (1.0 - opts.damping) * r + opts.damping * r_new
        if r > _RATE_CEIL:
            raise ConvergenceError(
                f"secrecy ceiling {s_th} is below the achievable outage floor"
            )
    if not converged:
        # Bisection on the monotone outage curve; expand until bracketed.
        hi = max(2.0 * r, 1.0)
        while sop_approx(sc, hi) > s_th:
            hi *= 2.0
            if hi > _RATE_CEIL:
                raise ConvergenceError(
                    f"secrecy ceiling {s_th} is below the achievable outage floor"
                )
        r = _bisect_root(lambda x: sop_approx(sc, x) - s_th, 0.0, hi, opts.rate_tol * 1e-3)
    return _nudge_to_feasible(sc, r, s_th)


def _nudge_to_feasible(sc: ScenarioConfig, r: float, s_th: float) -> float:
    # Rounding can leave the outage a hair above the ceiling, which would
    # trip the hard gating downstream; push up by the smallest step that
    # restores feasibility.
    step = max(1e-12, abs(r) * 1e-14)
    for _ in range(80):
        if sop_approx(sc, r) <= s_th:
            return r
        r += step
        step *= 2.0
    raise ConvergenceError(f"could not reach outage <= {s_th} near rate {r}")


# ---------------------------------------------------------------------------
# adaptive scheme
# ---------------------------------------------------------------------------


def _adaptive_rhs(r: float, c_b: float, sc: ScenarioConfig, eve: _LinkCtx) -> float:
    """Fixed-point form of the stationarity condition of the adaptive scheme."""
    pt = eve_link(sc).pointing
    we2 = pt.omega_e * pt.omega_e
    sig2 = sc.sigma_s * sc.sigma_s
    p = 2.0**r
    t = _t_of(r, eve)
    d = specfun.exp_integral(eve.xi2 - eve.k, t)
    g_low = math.gamma(eve.k) * float(_sp.gammainc(eve.k, t))
    pref = eve.scale / (_LN2 * we2 * p * d)
    inner = (p * (_LN2 * we2 * (c_b - r) - 4.0 * sig2) + 4.0 * sig2) * math.exp(-t) - t ** (
        -eve.k
    ) * (we2 - 4.0 * eve.k * sig2) * g_low * (p - 1.0)
    return (c_b - c_b * p + p * r) + 4.0 * sig2 * (p - 1.0) ** 2 / (_LN2 * we2 * p) + pref * inner


def adaptive_unconstrained_re(
    sc: ScenarioConfig, c_b: float, opts: SolverOptions | None = None
) -> float:
    """Throughput-maximizing redundancy rate of the adaptive scheme, no ceiling.

    Damped fixed-point iteration on the closed-form stationarity map; if the
    iteration does not settle (the map is repelling at desk-scale operating
    points), bisection on the central-difference derivative of the
    surrogate throughput takes over.
    """
    if not c_b > 0.0:
        raise ValueError(f"c_b must be positive, got {c_b}")
    opts = opts or _DEFAULT
    unconstrained = SecrecyConstraint(1.0)

    def psi(r: float) -> float:
        # Extended by zero so finite differences at the domain edges are safe.
        if not 0.0 <= r <= c_b:
            return 0.0
        return est_adaptive(sc, c_b, r, unconstrained, use_approx=True).est

    lo = 1e-4 * min(c_b, 1.0)
    hi = c_b - lo
    if hi <= lo:
        return 0.5 * c_b

    if sc.sigma_s > 0.0:
        eve = _eve_ctx(sc)
        r = 0.5 * c_b
        for _ in range(opts.max_iter):
            r_new = _adaptive_rhs(r, c_b, sc, eve)
            r_new = min(max(r_new, lo), hi)
            if abs(r_new - r) < opts.rate_tol:
                r = r_new
                if lo < r < hi and abs(_d1(psi, r)) <= 1e-6 * max(1.0, psi(r)):
                    return r
                break
            r = (1.0 - opts.damping) * r + opts.damping * r_new

    # Derivative sign-scan: the throughput vanishes at both ends of (0, c_b),
    # so an interior maximum exists and the slope changes sign across it.
    n = max(opts.grid_points, 64)
    step = (hi - lo) / (n - 1)
    best = None
    prev_x = lo
    prev_d = _d1(psi, prev_x)
    for i in range(1, n):
        x = lo + i * step
        dx = _d1(psi, x)
        if prev_d > 0.0 >= dx:
            root = _bisect_root(lambda y: _d1(psi, y), prev_x, x, opts.rate_tol)
            v = psi(root)
            if best is None or v > best[1]:
                best = (root, v)
        prev_x, prev_d = x, dx
    if best is not None:
        return best[0]
    # Slope never flips: the maximum sits on the scan, refine around it.
    x, _ = _grid_then_golden(psi, lo, hi, n)
    return x


def adaptive_optimal(
    sc: ScenarioConfig, c_b: float, s_th: float, opts: SolverOptions | None = None
) -> Optimum:
    """Ceiling-aware optimal redundancy rate for realized capacity ``c_b``.

    The optimum is the larger of the unconstrained stationary rate and the
    threshold rate that pins the outage to the ceiling.  When even the
    threshold rate exceeds the capacity there is no feasible operating point
    with positive secrecy rate; the report then degenerates to zero
    throughput at the capacity itself.
    """
    opts = opts or _DEFAULT
    constraint = SecrecyConstraint(s_th)
    re_u = adaptive_unconstrained_re(sc, c_b, opts)
    re_t = re_threshold(sc, s_th, opts)
    constraint_active = re_t > re_u
    r_e = max(re_u, re_t)
    feasible = r_e <= c_b
    if not feasible:
        r_e = c_b
    report = est_adaptive(sc, c_b, r_e, constraint, use_approx=True)

    def psi(r: float) -> float:
        return est_adaptive(sc, c_b, r, constraint, use_approx=True).est

    hessian_ok = False
    if feasible and 0.0 < r_e < c_b and report.est > 0.0 and not constraint_active:
        hessian_ok = _d2(psi, r_e) < 0.0
    return Optimum(
        rates=RatePair(r_b=c_b, r_e=r_e),
        est=report.est,
        method="threshold" if constraint_active else "fixed_point",
        hessian_ok=hessian_ok,
        constraint_active=constraint_active,
    )


# ---------------------------------------------------------------------------
# fixed-rate scheme: unconstrained pair
# ---------------------------------------------------------------------------


def _re_update(rb: float, sc: ScenarioConfig, bob: _LinkCtx) -> float:
    """Redundancy-rate update given the codeword rate (log-safe form)."""
    n_a = sc.nodes.n_a
    t_b = _t_of(rb, bob)
    if t_b <= 0.0:
        return 1e-12
    c1 = float(_sp.gammainc(bob.k, t_b))
    q = float(_sp.gammaincc(bob.k, t_b))
    if c1 <= 0.0:
        return 1e-12
    if q < 1e-9:
        # c1**(1-n_a) - c1 ~ n_a * q up to O(q^2); the direct difference has
        # fully cancelled by here.
        ln_s = math.log(n_a) + math.log(max(q, 1e-300))
    else:
        diff = c1 ** (1 - n_a) - c1
        if diff <= 0.0:
            return 1e-12
        ln_s = math.log(diff)
    mag = math.exp(min(ln_s + t_b + math.lgamma(bob.k) - bob.k * math.log(t_b), 700.0))
    return rb - (1.0 - 2.0 ** (-rb)) * mag / (_LN2 * n_a)


def _rb_update(re: float, sc: ScenarioConfig, eve: _LinkCtx) -> float:
    """Codeword-rate update given the redundancy rate."""
    pt = eve_link(sc).pointing
    we2 = pt.omega_e * pt.omega_e
    sig2 = sc.sigma_s * sc.sigma_s
    p = 2.0 ** min(re, _RATE_CEIL)
    t = _t_of(re, eve)
    if t <= 0.0:
        return re
    g_low = math.gamma(eve.k) * float(_sp.gammainc(eve.k, t))
    d = specfun.exp_integral(eve.xi2 - eve.k, t)
    den = math.exp(-t) - t * d
    if den == 0.0:
        return _RATE_CEIL
    bracket = 4.0 * sig2 + (we2 - 4.0 * eve.k * sig2) * t ** (-eve.k) * g_low / den
    return re + (p - 1.0) / (p * we2 * _LN2) * bracket


def fixed_unconstrained_pair(sc: ScenarioConfig, opts: SolverOptions | None = None) -> Optimum:
    """Jointly optimal (codeword, redundancy) rates with no outage ceiling.

    Alternating damped fixed-point on the two stationarity updates; when the
    composite map repels, the same pair of equations is solved by a
    sign-scan and bisection on the composite residual.  A coordinate search
    on the throughput surface is the final fallback (and the primary path
    for misalignment-free scenarios, where the closed-form updates are not
    defined).
    """
    opts = opts or _DEFAULT
    unconstrained = SecrecyConstraint(1.0)

    def f(re: float, rb: float) -> float:
        if not 0.0 <= re < rb:
            return 0.0
        return est_fixed(sc, RatePair(r_b=rb, r_e=re), unconstrained, use_approx=True).est

    bob = _bob_ctx(sc)
    cap_seed = math.log2(1.0 + bob.scale * bob.k)
    hi = min(cap_seed + 15.0, _RATE_CEIL)
    candidates: list[tuple[float, float, float, str]] = []  # (est, re, rb, method)

    if sc.sigma_s > 0.0:
        eve = _eve_ctx(sc)

        def g_e(rb: float) -> float:
            return min(max(_re_update(rb, sc, bob), 1e-12), rb - 1e-12)

        def g_b(re: float) -> float:
            return min(max(_rb_update(re, sc, eve), re + 1e-12), _RATE_CEIL)

        # 1) damped alternation
        rb = max(cap_seed, 0.5)
        re = 0.4 * rb
        settled = False
        for _ in range(opts.max_iter):
            rb_new = (1.0 - opts.damping) * rb + opts.damping * g_b(re)
            rb_new = min(max(rb_new, re + 1e-9), hi)
            re_new = (1.0 - opts.damping) * re + opts.damping * g_e(rb_new)
            re_new = min(max(re_new, 1e-9), rb_new - 1e-9)
            if abs(rb_new - rb) < opts.rate_tol and abs(re_new - re) < opts.rate_tol:
                rb, re = rb_new, re_new
                settled = True
                break
            rb, re = rb_new, re_new
        if settled and _is_interior_stationary(f, re, rb):
            candidates.append((f(re, rb), re, rb, "fixed_point"))

        # 2) composite-residual bisection: scan rb, each residual evaluation
        #    chains the two updates.
        if not candidates:

            def resid(rb_: float) -> float:
                return g_b(g_e(rb_)) - rb_

            n = max(opts.grid_points, 100)
            lo_rb = 0.05
            step = (hi - lo_rb) / (n - 1)
            prev_x = lo_rb
            prev_r = resid(prev_x)
            for i in range(1, n):
                x = lo_rb + i * step
                rv = resid(x)
                if (prev_r > 0.0) != (rv > 0.0):
                    root = _bisect_root(resid, prev_x, x, opts.rate_tol)
                    re_c = g_e(root)
                    if _is_interior_stationary(f, re_c, root):
                        candidates.append((f(re_c, root), re_c, root, "fixed_point"))
                prev_x, prev_r = x, rv

    if not candidates:
        re_c, rb_c = _coordinate_search(f, hi, opts)
        candidates.append((f(re_c, rb_c), re_c, rb_c, "grid_oracle"))

    est, re, rb, method = max(candidates, key=lambda c: c[0])
    hessian_ok = _hessian_negative_definite(f, re, rb)
    return Optimum(
        rates=RatePair(r_b=rb, r_e=re),
        est=est,
        method=method,
        hessian_ok=hessian_ok,
        constraint_active=False,
    )


def _is_interior_stationary(f, re: float, rb: float, tol: float = 1e-5) -> bool:
    if not (re > 1e-8 and rb > re + 1e-8 and rb < _RATE_CEIL - 1e-6):
        return False
    scale = max(1.0, abs(f(re, rb)))
    g_re = (f(re + 1e-5, rb) - f(re - 1e-5, rb)) / 2e-5
    g_rb = (f(re, rb + 1e-5) - f(re, rb - 1e-5)) / 2e-5
    return abs(g_re) <= tol * scale and abs(g_rb) <= tol * scale


def _hessian_negative_definite(f, re: float, rb: float, h: float = 1e-4) -> bool:
    f00 = f(re, rb)
    a = (f(re + h, rb) - 2.0 * f00 + f(re - h, rb)) / (h * h)
    c = (f(re, rb + h) - 2.0 * f00 + f(re, rb - h)) / (h * h)
    b = (f(re + h, rb + h) - f(re + h, rb - h) - f(re - h, rb + h) + f(re - h, rb - h)) / (
        4.0 * h * h
    )
    return a < 0.0 and a * c - b * b > 0.0


def _coordinate_search(f, hi: float, opts: SolverOptions) -> tuple[float, float]:
    re, rb = 0.3 * hi, 0.6 * hi
    n = max(opts.grid_points // 2, 100)
    for _ in range(40):
        rb = _grid_then_golden(lambda x: f(re, x), re + 1e-9, hi, n)[0]
        re = _grid_then_golden(lambda x: f(x, rb), 1e-9, rb - 1e-9, n)[0]
    return re, rb


# ---------------------------------------------------------------------------
# fixed-rate scheme: ceiling-constrained codeword rate
# ---------------------------------------------------------------------------


def fixed_constrained_rb(
    sc: ScenarioConfig, r_e_fixed: float, opts: SolverOptions | None = None
) -> float:
    """Optimal codeword rate when the redundancy rate is pinned.

    Solves the Lambert-W closed form of the stationarity condition.  The W
    expression still contains the codeword rate on both sides, so it is
    iterated with damping, trying the principal branch and checking the
    lower one; a candidate is only accepted if every iterate stayed inside
    the branch domain (clamping the W argument manufactures spurious fixed
    points at the branch point).  If neither branch settles, bisection on
    the equivalent stationarity residual recovers the root; single-beam
    transmitters (no selection exponent) go straight to 1-D refinement.
    """
    if r_e_fixed < 0.0:
        raise ValueError(f"r_e_fixed must be non-negative, got {r_e_fixed}")
    opts = opts or _DEFAULT
    bob = _bob_ctx(sc)
    n_a = sc.nodes.n_a
    lo = r_e_fixed + 1e-6
    hi = min(max(r_e_fixed + 25.0, math.log2(1.0 + bob.scale * bob.k) + 10.0), _RATE_CEIL)

    def bob_factor(rb: float) -> float:
        return (rb - r_e_fixed) * (1.0 - float(_sp.gammainc(bob.k, _t_of(rb, bob))) ** n_a)

    if n_a == 1:
        return _grid_then_golden(bob_factor, lo, hi, opts.grid_points)[0]

    mu = bob.scale
    kap = 1.0 / mu
    lg_k = math.lgamma(bob.k)

    def w_argument(rb: float) -> float:
        t_b = _t_of(rb, bob)
        c1 = float(_sp.gammainc(bob.k, t_b))
        return (
            (c1 - c1 ** (1 - n_a))
            * math.exp(lg_k + (1.0 - bob.k) * math.log(t_b))
            / (math.exp(kap) * (rb - r_e_fixed) * _LN2 * n_a)
        )

    candidates: list[tuple[float, float]] = []  # (objective, rb)
    for branch in ("principal", "lower"):
        rb = max(r_e_fixed + 1.0, math.log2(1.0 + mu * bob.k))
        in_domain = True
        settled = False
        for _ in range(opts.max_iter):
            arg = w_argument(rb)
            if not -1.0 / math.e <= arg < 0.0:
                in_domain = False
                break
            w = specfun.lambert_w(branch, arg)
            val = -mu * w
            if val <= max(1.0, 2.0**r_e_fixed):
                in_domain = False
                break
            rb_new = math.log2(val)
            if abs(rb_new - rb) < opts.rate_tol:
                rb = rb_new
                settled = True
                break
            rb = (1.0 - opts.damping) * rb + opts.damping * rb_new
        if settled and in_domain and lo < rb < hi:
            candidates.append((bob_factor(rb), rb))

    if not candidates:
        # Bisection on the stationarity residual (same equation, W unwrapped).
        def resid(rb: float) -> float:
            t_b = _t_of(rb, bob)
            c1 = float(_sp.gammainc(bob.k, t_b))
            dens = math.exp((bob.k - 1.0) * math.log(t_b) - t_b - lg_k)
            return (1.0 - c1**n_a) - _LN2 * n_a * (rb - r_e_fixed) * 2.0**rb * c1 ** (
                n_a - 1
            ) * dens / mu

        n = max(opts.grid_points, 100)
        step = (hi - lo) / (n - 1)
        prev_x, prev_r = lo, resid(lo)
        for i in range(1, n):
            x = lo + i * step
            rv = resid(x)
            if prev_r > 0.0 >= rv:
                root = _bisect_root(resid, prev_x, x, opts.rate_tol)
                candidates.append((bob_factor(root), root))
            prev_x, prev_r = x, rv

    if not candidates:
        return _grid_then_golden(bob_factor, lo, hi, opts.grid_points)[0]
    return max(candidates, key=lambda c: c[0])[1]


def fixed_optimal(sc: ScenarioConfig, s_th: float, opts: SolverOptions | None = None) -> Optimum:
    """Outage-ceiling-aware optimal rate pair for the fixed-rate scheme.

    If the unconstrained redundancy rate already satisfies the ceiling the
    unconstrained pair stands; otherwise the redundancy rate is pinned to
    the threshold value and the codeword rate re-optimized around it.
    """
    opts = opts or _DEFAULT
    pair = fixed_unconstrained_pair(sc, opts)
    if s_th >= 1.0:
        return pair
    re_t = re_threshold(sc, s_th, opts)
    if pair.rates.r_e >= re_t:
        return pair
    constraint = SecrecyConstraint(s_th)
    rb = fixed_constrained_rb(sc, re_t, opts)
    report = est_fixed(sc, RatePair(r_b=rb, r_e=re_t), constraint, use_approx=True)

    def f_rb(x: float) -> float:
        if x <= re_t:
            return 0.0
        return est_fixed(sc, RatePair(r_b=x, r_e=re_t), constraint, use_approx=True).est

    return Optimum(
        rates=RatePair(r_b=rb, r_e=re_t),
        est=report.est,
        method="lambert_w",
        hessian_ok=_d2(f_rb, rb) < 0.0,
        constraint_active=True,
    )


# ---------------------------------------------------------------------------
# validation oracle
# ---------------------------------------------------------------------------


def grid_refine_maximize(objective, bounds, opts: SolverOptions | None = None) -> Optimum:
    """Deterministic grid search with golden refinement, used as an oracle.

    ``bounds`` is either a ``(lo, hi)`` pair for a one-argument objective or
    a pair of such pairs ``((re_lo, re_hi), (rb_lo, rb_hi))`` for a
    two-argument ``objective(r_e, r_b)``.  Ties break toward the first
    (lowest) grid index.  For one-dimensional searches both rate slots of
    the result carry the argmax.
    """
    opts = opts or _DEFAULT
    two_dim = hasattr(bounds[0], "__len__")
    if not two_dim:
        lo, hi = float(bounds[0]), float(bounds[1])
        x, v = _grid_then_golden(objective, lo, hi, opts.grid_points)
        return Optimum(
            rates=RatePair(r_b=x, r_e=x),
            est=v,
            method="grid_oracle",
            hessian_ok=False,
            constraint_active=False,
        )

    (x_lo, x_hi), (y_lo, y_hi) = bounds
    nx = ny = opts.grid_points
    sx = (x_hi - x_lo) / (nx - 1)
    sy = (y_hi - y_lo) / (ny - 1)
    best = (-math.inf, 0, 0)
    for i in range(nx):
        x = x_lo + i * sx
        for j in range(ny):
            v = objective(x, y_lo + j * sy)
            if v > best[0]:
                best = (v, i, j)
    _, i, j = best
    x, y = x_lo + i * sx, y_lo + j * sy
    for _ in range(25):
        y = _golden_in(lambda yy: objective(x, yy), max(y - sy, y_lo), min(y + sy, y_hi))
        x = _golden_in(lambda xx: objective(xx, y), max(x - sx, x_lo), min(x + sx, x_hi))
    v = objective(x, y)
    if v <= best[0]:
        # Ties go to the grid incumbent (first index), not the refined point.
        x, y, v = x_lo + i * sx, y_lo + j * sy, best[0]
    return Optimum(
        rates=RatePair(r_b=y, r_e=x),
        est=v,
        method="grid_oracle",
        hessian_ok=False,
        constraint_active=False,
    )
