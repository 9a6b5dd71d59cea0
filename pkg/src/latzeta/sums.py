"""Error-bounded lattice sums: theta series and (shifted) Epstein zeta functions.

Two independent routes evaluate the shifted zeta function

* ``zeta_prime_direct`` sums over lattice vectors.  A hard cut-off converges
  like R^(rank - 2s), far too slowly near s = rank/2, so the summand is split
  smoothly through its Mellin representation: the part with Mellin variable
  above ``tau0`` is summed over the lattice (incomplete-gamma weights, Gaussian
  decay) and the part below ``tau0`` is replaced by its volume term.  Both
  remainders are bounded rigorously; no dual vectors are ever summed.
* ``zeta_q_psf`` sums normalised Bessel functions over the dual lattice.

The quadrature route ``zeta_from_theta_quadrature`` integrates the theta
series itself and serves as a third check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import integrate
from scipy import special as sp

from .errors import DivergenceError, DomainError
from .lattice import (
    LatticeBasis,
    LatticeVectors,
    VectorCache,
    determinant,
    dual,
    gram_schmidt_norms,
    lambda1,
    point_count_bound,
)
from .special import kbar_array, kbar_scalar

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class SummationResult:
    value: float
    tail_bound: float
    terms_used: int

    def to_dict(self) -> dict:
        return {"value": self.value, "tail_bound": self.tail_bound, "terms_used": self.terms_used}


@dataclass(frozen=True)
class EvalRequest:
    s: float = 2.0
    q: float = 0.0
    tau: float = 1.0
    rel_tol: float = 1e-10

    def __post_init__(self):
        if self.q < 0:
            raise DomainError("q must be nonnegative")
        if not self.tau > 0:
            raise DomainError("tau must be positive")
        if not 0 < self.rel_tol <= 1e-2:
            raise DomainError("rel_tol must lie in (0, 1e-2]")


# -- tail machinery -----------------------------------------------------------------


@dataclass(frozen=True)
class CountBound:
    """Nondecreasing upper bound N_up(r) >= |L ∩ rB| (zero included).

    The minimum of the packing bound (1 + 2r/λ1)^d and the covering bound
    V_d (r + μ)^d / det, where μ bounds the covering radius.
    """

    lam: float
    dim: int
    mu: float
    det: float

    @property
    def vol(self) -> float:
        """Volume of the unit ball divided by det."""
        d = self.dim
        return math.pi ** (d / 2) / math.gamma(d / 2 + 1) / self.det

    def __post_init__(self):
        object.__setattr__(self, "_v", self.vol)

    def value(self, r: float) -> float:
        d = self.dim
        return min((1.0 + 2.0 * r / self.lam) ** d, self._v * (r + self.mu) ** d)

    def deriv(self, r: float) -> float:
        d = self.dim
        pack = 1.0 + 2.0 * r / self.lam
        cover = r + self.mu
        if pack**d <= self._v * cover**d:
            return (2.0 * d / self.lam) * pack ** (d - 1)
        return d * self._v * cover ** (d - 1)


def count_bound(basis: LatticeBasis) -> CountBound:
    # every point of span(L) is within ½ sqrt(Σ ||b_i*||²) of the lattice
    mu = 0.5 * math.sqrt(float(np.sum(gram_schmidt_norms(basis) ** 2)))
    return CountBound(lambda1(basis), basis.rank, mu, determinant(basis))


def tail_bound(g: Callable[[float], float], R: float, counter: CountBound, n_inside: int) -> float:
    """Bound Σ_{y in L, ||y|| > R} g(||y||) for g nonincreasing on [R, ∞).

    Stieltjes integration by parts against the count bound ``counter``,
    with ``n_inside`` the exact count of lattice points (zero included) in
    the closed ball of radius R.
    """
    gR = g(R)
    head = max(counter.value(R) - n_inside, 0.0) * gR

    def integrand(r):
        return counter.deriv(r) * g(r)

    total, step = 0.0, max(counter.lam, R) * 0.5
    a = R
    # integrate in growing panels until a panel contributes nothing
    for _ in range(200):
        b = a + step
        piece, _err = integrate.quad(integrand, a, b, limit=200, epsabs=0.0, epsrel=1e-10)
        total += piece
        if piece <= 1e-17 * max(total, 1e-300) or piece == 0.0:
            break
        a, step = b, step * 1.5
    else:
        piece, _err = integrate.quad(integrand, a, np.inf, limit=200)
        total += piece
    return head + total * (1 + 1e-6)


def _check_convergent(basis: LatticeBasis, s: float) -> None:
    if not s > basis.rank / 2:
        raise DivergenceError(f"sum diverges: s={s} <= rank/2={basis.rank / 2}")


def _radial_sum(
    cache: VectorCache,
    term: Callable[[LatticeVectors], np.ndarray],
    g: Callable[[float], float],
    offset: float,
    counter: CountBound,
    rel_tol: float,
    R0: float,
    extra_bound: float = 0.0,
    scale: float = 1.0,
    growth: float = SQRT2,
    max_rounds: int = 80,
) -> SummationResult:
    """Sum ``term`` over growing balls until the certified tail meets rel_tol."""
    R = R0
    parts: list[float] = []
    done = 0
    for _ in range(max_rounds):
        vecs = cache.upto(R)
        if len(vecs) > done:
            # the cache keeps a fixed order, so only the new shell is summed
            parts.append(math.fsum(term(vecs.slice(done, len(vecs)))))
            done = len(vecs)
        value = scale * (math.fsum(parts) + offset)
        tb = scale * tail_bound(g, R, counter, done + 1) + extra_bound
        if tb <= rel_tol * abs(value):
            break
        R *= growth
    return SummationResult(value, tb, done + 1)


def _radius_for(g: Callable[[float], float], counter: CountBound, target: float, R_lo: float) -> float:
    """Smallest radius (up to bisection) whose tail is provably below ``target``.

    Uses the covering lower bound V_d (R - μ)^d / det on the number of points
    inside, so the returned radius is a safe starting point.
    """
    d = counter.dim

    def ok(R):
        inside = max(counter.vol * max(R - counter.mu, 0.0) ** d, 1.0)
        return tail_bound(g, R, counter, int(inside)) <= target

    hi = max(R_lo, 1e-3)
    for _ in range(60):
        if ok(hi):
            break
        hi *= 1.5
    lo = R_lo
    if ok(lo):
        return lo
    while hi > 1.03 * lo:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


# -- theta ----------------------------------------------------------------------


def theta(basis: LatticeBasis, tau: float, rel_tol: float = 1e-12, cache: VectorCache | None = None) -> SummationResult:
    """Θ(L, iτ) = Σ_{y in L} exp(-π τ ||y||²), zero vector included."""
    if not tau > 0:
        raise DomainError("tau must be positive")
    if basis.is_trivial:
        return SummationResult(1.0, 0.0, 1)
    cache = cache or VectorCache(basis)
    counter = count_bound(basis)
    R0 = max(counter.lam, math.sqrt(max(-math.log(rel_tol * 1e-3), 1.0) / (math.pi * tau)))
    return _radial_sum(
        cache,
        lambda v: np.exp(-math.pi * tau * v.norm_sq),
        lambda r: math.exp(-math.pi * tau * r * r),
        1.0,
        counter,
        rel_tol,
        R0,
    )


# -- smooth-split direct sums ----------------------------------------------------------


@dataclass(frozen=True)
class Weight:
    """Homogeneous polynomial weight p of degree 2j on lattice vectors.

    ``moment`` is c with ∫ p(y) N(0, σ² I)(dy) = c σ^{2j}; ``kappa`` bounds
    |p(z)| <= kappa ||z||^{2j} for complex z.
    """

    func: Callable[[np.ndarray], np.ndarray]
    j: int
    moment: float
    kappa: float


UNIT_WEIGHT = Weight(lambda v: np.ones(len(v)), 0, 1.0, 1.0)


def _lower_incomplete(b: float, q: float, tau0: float) -> float:
    """∫_0^{tau0} t^{b-1} exp(-π q t) dt."""
    if q == 0:
        return tau0**b / b
    return (math.pi * q) ** (-b) * math.gamma(b) * float(sp.gammainc(b, math.pi * q * tau0))


class SplitPlan:
    """Precomputed geometry for smooth-split sums over one lattice."""

    def __init__(self, basis: LatticeBasis, cache: VectorCache | None = None):
        self.basis = basis
        self.cache = cache or VectorCache(basis)
        self.dim = basis.rank
        self.det = determinant(basis)
        self.counter = count_bound(basis)
        self.dual_counter = count_bound(dual(basis))
        self.lam = self.counter.lam
        self.lam_dual = self.dual_counter.lam

    def _recip_bound(self, a: float, w: Weight, tau0: float) -> float:
        d, j = self.dim, w.j
        m = [math.gamma(d / 2 + i) / (math.gamma(d / 2) * math.pi**i) for i in range(j + 1)]

        def h(r):
            poly = sum(math.comb(j, i) * (r / tau0) ** (2 * (j - i)) * m[i] * tau0 ** (-i) for i in range(j + 1))
            return math.exp(-math.pi * r * r / tau0) * poly

        pref = math.pi**a / math.gamma(a) / self.det * w.kappa * tau0 ** (a - d / 2)
        return pref * tail_bound(h, self.lam_dual * (1 - 1e-9), self.dual_counter, 1)

    def _tau_cap(self, a: float, j: int) -> float:
        d = self.dim
        return math.pi * self.lam_dual**2 / (max(d / 2 + 2 * j + 1 - a, j, 0.0) + 1.0)

    def _choose_tau0(self, a: float, w: Weight, target: float) -> float:
        """Largest convenient tau0 whose dual remainder bound is below ``target``.

        log B is close to linear in x = 1/tau0 with slope -π λ*², so a
        safeguarded secant iteration in x converges in a few steps.
        """
        cap = self._tau_cap(a, w.j)
        log_t = math.log(target)
        x = 1.0 / cap
        fx = math.log(self._recip_bound(a, w, cap)) - log_t
        if fx <= 0:
            return cap
        slope = -math.pi * self.lam_dual**2
        best = None
        for _ in range(30):
            x_new = x - (fx + 0.5) / slope
            f_new = math.log(self._recip_bound(a, w, 1.0 / x_new)) - log_t
            if f_new <= 0:
                best = x_new if best is None else min(best, x_new)
                if f_new > -1.0:
                    break
            if x_new != x:
                slope = min((f_new - fx) / (x_new - x), 0.5 * slope)
            x, fx = x_new, f_new
        if best is None:
            raise DomainError("could not bound the dual remainder")
        return 1.0 / best

    def sum(
        self, a: float, q: float, w: Weight, rel_tol: float, exclude_zero: bool = True
    ) -> SummationResult:
        """Σ_{y != 0} p(y) (||y||² + q)^(-a) with certified error bound."""
        d, j = self.dim, w.j
        b = a - d / 2 - j
        if not b > 0:
            raise DivergenceError(f"weighted sum diverges (a={a}, rank={d}, degree={2 * j})")
        cache = self.cache
        # rigorous lower bound on the (positive) sum from a small ball
        R_lb = 2.0 * self.lam
        lower = 0.0
        for _ in range(6):
            v = cache.upto(R_lb)
            lower = math.fsum(w.func(v.vectors) * (v.norm_sq + q) ** (-a))
            if lower > 0:
                break
            R_lb *= 1.5
        if lower <= 0:
            raise DomainError("weight vanishes on all short vectors")
        target = 0.25 * rel_tol * lower
        tau0 = self._choose_tau0(a, w, target)
        recip = self._recip_bound(a, w, tau0)

        c_pi = math.pi**a / math.gamma(a)
        zero_freq = c_pi / self.det * w.moment * (2 * math.pi) ** (-j) * _lower_incomplete(b, q, tau0)
        zero_term = 0.0
        if exclude_zero and j == 0:
            if q == 0:
                zero_term = (math.pi * tau0) ** a / math.gamma(a + 1)
            else:
                zero_term = q ** (-a) * float(sp.gammainc(a, math.pi * q * tau0))
        pt0 = math.pi * tau0

        def term(v: LatticeVectors) -> np.ndarray:
            N = v.norm_sq + q
            return w.func(v.vectors) * N ** (-a) * sp.gammaincc(a, pt0 * N)

        def g(r: float) -> float:
            N = r * r + q
            return w.kappa * r ** (2 * j) * N ** (-a) * float(sp.gammaincc(a, pt0 * N))

        r_mono = math.sqrt((max(2 * a, 2 * j) + 1) / pt0)
        R0 = max(r_mono, math.sqrt(max(-math.log(rel_tol), 2.0) / pt0), self.lam)
        res = _radial_sum(cache, term, g, zero_freq - zero_term, self.counter, 0.75 * rel_tol, R0, extra_bound=recip)
        return res


def weighted_sum(
    basis: LatticeBasis,
    a: float,
    q: float,
    weight: Weight,
    rel_tol: float = 1e-10,
    plan: SplitPlan | None = None,
) -> SummationResult:
    """Σ_{y != 0} p(y) (||y||² + q)^(-a) for a nonnegative polynomial weight p."""
    if q < 0:
        raise DomainError("q must be nonnegative")
    plan = plan or SplitPlan(basis)
    return plan.sum(a, q, weight, rel_tol)


def zeta_prime_direct(
    basis: LatticeBasis, s: float, q: float, rel_tol: float = 1e-10, cache: VectorCache | None = None
) -> SummationResult:
    """ζ'(L, s; q) = Σ_{y != 0} (||y||² + q)^(-s), summed over lattice vectors."""
    _check_convergent(basis, s)
    if q < 0:
        raise DomainError("q must be nonnegative")
    if basis.is_trivial:
        return SummationResult(0.0, 0.0, 0)
    return SplitPlan(basis, cache).sum(s, q, UNIT_WEIGHT, rel_tol)


def zeta_q(
    basis: LatticeBasis, s: float, q: float, rel_tol: float = 1e-10, cache: VectorCache | None = None
) -> SummationResult:
    """ζ(L, s; q) = Σ_{y in L} (||y||² + q)^(-s) = ζ' + q^(-s), by the direct route."""
    if not q > 0:
        raise DomainError("zeta_q needs q > 0 (the zero vector contributes q^-s)")
    _check_convergent(basis, s)
    if basis.is_trivial:
        return SummationResult(q ** (-s), 0.0, 1)
    zp = zeta_prime_direct(basis, s, q, rel_tol, cache)
    return SummationResult(zp.value + q ** (-s), zp.tail_bound, zp.terms_used + 1)


def zeta_q_psf(
    basis: LatticeBasis,
    s: float,
    q: float,
    rel_tol: float = 1e-10,
    dual_cache: VectorCache | None = None,
) -> SummationResult:
    """ζ(L, s; q) through the Poisson summation formula over the dual lattice."""
    _check_convergent(basis, s)
    if not q > 0:
        raise DomainError("the Poisson-summation route needs q > 0")
    d = basis.rank
    alpha = s - d / 2
    pref = math.pi ** (d / 2) * q ** (d / 2 - s) / (math.gamma(s) * determinant(basis))
    g0 = math.gamma(alpha)
    if basis.is_trivial:
        return SummationResult(pref * g0, 0.0, 1)
    D = dual(basis)
    cache = dual_cache or VectorCache(D)
    counter = count_bound(D)
    lam = counter.lam
    k = 2 * math.pi * math.sqrt(q)

    def term(v: LatticeVectors) -> np.ndarray:
        return kbar_array(alpha, k * v.norms)

    def g(r: float) -> float:
        return kbar_scalar(alpha, k * r) if r > 0 else g0

    # ζ_q >= max(q^-s, pref Γ(α)) bounds the value from below
    floor = max(g0, q ** (-s) / pref)
    R0 = _radius_for(g, counter, 0.9 * rel_tol * floor, lam)
    return _radial_sum(cache, term, g, g0, counter, rel_tol, R0, scale=pref, growth=1.1)


def zeta_prime(
    basis: LatticeBasis,
    s: float,
    q: float,
    rel_tol: float = 1e-10,
    method: str = "auto",
    cache: VectorCache | None = None,
    dual_cache: VectorCache | None = None,
) -> SummationResult:
    """ζ'(L, s; q) by the preferred route.

    ``auto`` uses the dual (Poisson) route for q >= 1 and the direct route
    otherwise, falling back to direct if subtracting q^-s costs too much
    relative accuracy.
    """
    if method not in ("auto", "direct", "psf"):
        raise ValueError(f"unknown method {method!r}")
    _check_convergent(basis, s)
    if basis.is_trivial:
        return SummationResult(0.0, 0.0, 0)
    if method == "direct" or (method == "auto" and q < 1):
        return zeta_prime_direct(basis, s, q, rel_tol, cache)
    if q <= 0:
        raise DomainError("the Poisson-summation route needs q > 0")
    zq = zeta_q_psf(basis, s, q, rel_tol * 0.1, dual_cache)
    value = zq.value - q ** (-s)
    # subtracting q^-s cancels digits; charge the rounding error to the bound
    bound = zq.tail_bound + 64 * np.finfo(float).eps * zq.value
    if bound <= rel_tol * abs(value) or method == "psf":
        return SummationResult(value, bound, zq.terms_used)
    return zeta_prime_direct(basis, s, q, rel_tol, cache)


# -- theta/zeta identities ----------------------------------------------------------------


def zeta_from_theta_quadrature(
    basis: LatticeBasis, s: float, q: float, rel_tol: float = 1e-9, cache: VectorCache | None = None
) -> SummationResult:
    """ζ(L, s; q) = π^s/Γ(s) ∫_0^∞ τ^(s-1) exp(-π q τ) Θ(L, iτ) dτ by quadrature.

    Above a cut ``t0`` the theta series is evaluated from enumerated vectors
    and integrated numerically (in log τ); below ``t0`` it is replaced by its
    volume term τ^(-rank/2)/det, whose error is bounded through the dual
    minimum.
    """
    _check_convergent(basis, s)
    if not q > 0:
        raise DomainError("the theta integral needs q > 0")
    d = basis.rank
    c_pi = math.pi**s / math.gamma(s)
    det = determinant(basis)
    if basis.is_trivial:
        t0 = 1.0
    else:
        counter = count_bound(basis)
        dual_counter = count_bound(dual(basis))
        lam, lam_dual = counter.lam, dual_counter.lam
        t0 = math.pi * lam_dual**2 / 30.0
    b = s - d / 2
    low = _lower_incomplete(b, q, t0) / det
    # ∫_{t0}^∞ τ^(s-1) e^{-π q τ} dτ
    high_one = (math.pi * q) ** (-s) * math.gamma(s) * float(sp.gammaincc(s, math.pi * q * t0))
    if basis.is_trivial:
        return SummationResult(c_pi * (low + high_one), 0.0, 1)

    # vectors needed so that the theta tail at t0 is negligible
    cache = cache or VectorCache(basis)
    R = math.sqrt(max(-math.log(rel_tol * 1e-4), 1.0) / (math.pi * t0))
    vecs = cache.upto(R)
    nsq = vecs.norm_sq
    theta_tail = tail_bound(lambda r: math.exp(-math.pi * t0 * r * r), R, counter, len(vecs) + 1)

    def integrand(u):
        tau = math.exp(u)
        return tau**s * math.exp(-math.pi * q * tau) * float(np.sum(np.exp(-math.pi * tau * nsq)))

    # integrand decays like exp(-π τ (λ1² + q)); stop once it is negligible
    u_hi = math.log(max(t0 * 2, (60.0 + s * math.log(1 + s)) / (math.pi * (lam * lam + q))))
    mid, err = integrate.quad(integrand, math.log(t0), u_hi, epsabs=0.0, epsrel=1e-12, limit=400)
    # error of the volume approximation below t0: τ^{-d/2}/det Σ_{w≠0} exp(-π||w||²/τ)
    dual_sum = tail_bound(lambda r: math.exp(-math.pi * r * r / t0), lam_dual * (1 - 1e-9), dual_counter, 1)
    asym = t0**b / b / det * dual_sum
    # theta tail beyond R shrinks at least like exp(-π (τ - t0) R²)
    trunc = theta_tail * math.exp(math.pi * t0 * R * R) * math.gamma(s) * (math.pi * R * R) ** (-s)
    value = c_pi * (low + high_one + mid)
    bound = c_pi * (asym + abs(err) + trunc)
    return SummationResult(value, bound, len(vecs) + 1)


def theta_from_zeta_limit(basis: LatticeBasis, tau: float, s_list: Sequence[float]) -> list[float]:
    """(π τ/s)^(-s) ζ(L, s; s/(π τ)) for each s; tends to Θ(L, iτ) as s → ∞.

    Evaluated as Σ_y (1 + ||y||²/q)^(-s) so large s does not overflow.
    """
    if not tau > 0:
        raise DomainError("tau must be positive")
    out = []
    prev = None
    for s in s_list:
        _check_convergent(basis, s)
        if prev is not None and s <= prev:
            raise DomainError("s_list must be increasing")
        prev = s
        if basis.is_trivial:
            out.append(1.0)
            continue
        q = s / (math.pi * tau)
        counter = count_bound(basis)
        cache = VectorCache(basis)
        R0 = max(counter.lam, math.sqrt(30.0 / (math.pi * tau)))
        res = _radial_sum(
            cache,
            lambda v: np.exp(-s * np.log1p(v.norm_sq / q)),
            lambda r: math.exp(-s * math.log1p(r * r / q)),
            1.0,
            counter,
            1e-12,
            R0,
        )
        out.append(res.value)
    return out
