"""Scalar transmission correction T(lambda, xi) for circle spectral problems.

Along the ray n = 2 xi t the oscillatory factorization of the unit-circle
jump must be swapped on the sub-arc where the phase changes effective sign.
The scalar function built here performs that swap: it is the exponential of
a Cauchy integral of ln(1+|r|^2) over the arc between the two stationary
points S_1, S_2 of the phase, times a Blaschke-type product over the
discrete-spectrum points lying in the growth region {Re phi > 0},

    T(lambda) = exp( (2 pi i)^{-1} int_arc ln(1+|r(s)|^2)/(s-lambda) ds )
                * prod_l ((lambda-lambda_l)/(lambda-1/conj(lambda_l)))^{alpha_l}.

The arc runs from S_2 to S_1 through the upper part of the circle (theta
decreasing from pi+arcsin(xi) to -arcsin(xi)); with this orientation the
outer radial limit carries the jump, T_out = T_in * (1+|r|^2), which a
construction-time probe verifies.  Off the light cone the same object
degenerates: for xi <= -1 only the product survives, for xi >= 1 the
integral extends over the whole circle (counterclockwise, with a sign that
keeps the outer limit carrying 1+|r|^2) and is evaluated exactly from the
Fourier modes of ln(1+|r|^2).

Quadrature is composite Gauss-Legendre on panels graded dyadically toward
the arc endpoints and toward the foot point of any nearby evaluation point;
every value is accepted only after a node-doubling error estimate passes
1e-9.  Samples of r are extended off the grid by trigonometric (FFT)
interpolation, so the sample grid must be uniform.
"""

import cmath

import numpy as np
from dataclasses import dataclass, field
from typing import List, Optional

from .phase import phi, re_phi_sign, stationary_points
from .scattering import DiscreteSpectrum, PoleData, SpectralData

_QUAD_TOL = 1e-9
_ENDPOINT_GUARD = 1e-6
_ON_CONTOUR_TOL = 1e-12
_POLE_TOL = 1e-12
_MODE_TOL = 1e-15


# ----------------------------------------------------------------------------
# trigonometric interpolation of circle samples
# ----------------------------------------------------------------------------

class _CircleSeries:
    """Truncated Fourier series of a smooth function sampled on a uniform
    circle grid; evaluable at arbitrary angles."""

    def __init__(self, ks, cs):
        self.ks = np.asarray(ks)
        self.cs = np.asarray(cs, dtype=complex)

    @classmethod
    def from_samples(cls, thetas, vals):
        m = len(thetas)
        ref = 2.0 * np.pi * np.arange(m) / m
        if m < 4 or np.max(np.abs(thetas - ref)) > 1e-12:
            raise ValueError(
                "spectral interpolation of circle samples needs a uniform "
                "grid of at least 4 angles; resample the reflection data")
        cs = np.fft.fft(np.asarray(vals)) / m
        ks = np.fft.fftfreq(m, d=1.0 / m).astype(int)
        keep = np.abs(cs) > _MODE_TOL * max(np.max(np.abs(cs)), 1e-300)
        if np.any(keep):
            kmax = int(np.max(np.abs(ks[keep])))
        else:
            kmax = 0
        band = np.abs(ks) <= kmax
        return cls(ks[band], cs[band])

    def eval(self, thetas):
        thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
        return np.exp(1j * np.outer(thetas, self.ks)) @ self.cs

    def eval_real(self, thetas):
        return self.eval(thetas).real


# ----------------------------------------------------------------------------
# context
# ----------------------------------------------------------------------------

@dataclass
class TFunctionContext:
    """Everything t_eval needs along one ray: reflection samples, discrete
    spectrum partitioned by the sign of Re phi, the ray slope xi, and the
    ray's region tag ("I" inside the light cone, "II" for xi <= -1,
    "III" for xi >= 1)."""

    r_samples: SpectralData
    poles: Optional[DiscreteSpectrum]
    xi: float
    region: str

    s1: complex = field(init=False, default=0j, repr=False, compare=False)
    s2: complex = field(init=False, default=0j, repr=False, compare=False)
    theta1: float = field(init=False, default=0.0, repr=False, compare=False)
    theta2: float = field(init=False, default=0.0, repr=False, compare=False)
    growth: List[PoleData] = field(init=False, default_factory=list,
                                   repr=False, compare=False)
    neutral: List[PoleData] = field(init=False, default_factory=list,
                                    repr=False, compare=False)
    decaying: List[PoleData] = field(init=False, default_factory=list,
                                     repr=False, compare=False)

    def __post_init__(self):
        if self.poles is None:
            self.poles = DiscreteSpectrum([])
        self.xi = float(self.xi)
        if self.region not in ("I", "II", "III"):
            raise ValueError(
                "no scalar transmission function is defined for region tag "
                "%r (transition bands have none)" % (self.region,))
        if self.region == "I" and not abs(self.xi) < 1.0:
            raise ValueError("region I needs |xi| < 1")
        if self.region == "II" and self.xi > -1.0 + 1e-12:
            raise ValueError("region II needs xi <= -1")
        if self.region == "III" and self.xi < 1.0 - 1e-12:
            raise ValueError("region III needs xi >= 1")

        for p in self.poles.poles:
            sign = re_phi_sign(p.lam, self.xi)
            if sign > 0:
                self.growth.append(p)
            elif sign == 0:
                self.neutral.append(p)
            else:
                self.decaying.append(p)

        ell = np.log1p(np.abs(self.r_samples.r_vals) ** 2)
        self._ell = _CircleSeries.from_samples(self.r_samples.grid.thetas, ell)
        self._r_series = None
        self._cache = {}

        if self.region == "I":
            self.s1, self.s2 = stationary_points(self.xi)
            self.theta1 = -np.arcsin(self.xi)
            self.theta2 = np.pi + np.arcsin(self.xi)
            if np.max(np.abs(self.r_samples.r_vals)) > 1e-8:
                self._orientation_check()

    # -- interpolants --------------------------------------------------------

    def ell_at(self, theta):
        """ln(1+|r|^2) at angle theta (scalar or array)."""
        out = self._ell.eval_real(np.asarray(theta, dtype=float))
        return out if np.ndim(theta) else float(out[0])

    def r_at(self, theta):
        """Reflection coefficient at angle theta by trigonometric
        interpolation of the stored samples."""
        if self._r_series is None:
            self._r_series = _CircleSeries.from_samples(
                self.r_samples.grid.thetas, self.r_samples.r_vals)
        out = self._r_series.eval(np.asarray(theta, dtype=float))
        return out if np.ndim(theta) else complex(out[0])

    # -- construction-time jump probe ---------------------------------------

    def _orientation_check(self):
        """Verify that the outer/inner limits of T across the chosen arc
        realize the (1+|r|^2) jump, and that the complementary arc carries
        none.  A mis-oriented or mis-placed arc fails loudly here."""
        eps = 1e-4
        th_mid = 0.5 * (self.theta1 + self.theta2)
        for _ in range(5):
            probe = np.exp(1j * th_mid)
            clear = all(
                min(abs((1.0 + s * eps) * probe - p.lam),
                    abs((1.0 + s * eps) * probe - 1.0 / np.conj(p.lam)))
                > 1e-2
                for p in self.growth for s in (+1.0, -1.0))
            if clear:
                break
            th_mid += 0.1
        ell0 = self.ell_at(th_mid)
        if ell0 > 1e-3:
            ratio = (t_eval(self, (1.0 + eps) * np.exp(1j * th_mid))
                     / t_eval(self, (1.0 - eps) * np.exp(1j * th_mid)))
            lr = cmath.log(ratio).real
            if abs(lr + ell0) < abs(lr - ell0):
                raise RuntimeError(
                    "arc orientation check failed: the outer limit of T "
                    "carries 1/(1+|r|^2) instead of (1+|r|^2)")
        th_c = th_mid - np.pi
        ell_c = self.ell_at(th_c)
        if ell_c > 1e-3:
            ratio = (t_eval(self, (1.0 + eps) * np.exp(1j * th_c))
                     / t_eval(self, (1.0 - eps) * np.exp(1j * th_c)))
            if abs(cmath.log(ratio).real) > 0.5 * ell_c:
                raise RuntimeError(
                    "arc placement check failed: T jumps across the "
                    "complement of the chosen arc")


def context_for_ray(r_samples, poles, n, t):
    """Context for the ray through lattice site n at time t (region tags
    from the phase classifier; transition bands are rejected)."""
    from .phase import classify_region
    reg = classify_region(n, t)
    return TFunctionContext(r_samples=r_samples, poles=poles,
                            xi=reg.xi, region=reg.region)


# ----------------------------------------------------------------------------
# quadrature machinery
# ----------------------------------------------------------------------------

_LEGGAUSS_CACHE = {}


def _leggauss(p):
    if p not in _LEGGAUSS_CACHE:
        _LEGGAUSS_CACHE[p] = np.polynomial.legendre.leggauss(p)
    return _LEGGAUSS_CACHE[p]


def _depth(span, dist):
    d = min(max(dist, 1e-14), span)
    return int(np.clip(np.ceil(np.log2(span / d)), 0, 48)) + 2


def _graded(a, b, depth_a, depth_b):
    """Break [a, b] at the midpoint and refine dyadically toward each end."""
    m = 0.5 * (a + b)
    pts = [a]
    pts.extend(a + (m - a) * 0.5 ** k for k in range(depth_a, -1, -1))
    pts.extend(b - (b - m) * 0.5 ** k for k in range(1, depth_b + 1))
    pts.append(b)
    pts = np.unique(np.asarray(pts))
    return list(zip(pts[:-1], pts[1:]))


def _panels_for(ctx, lam):
    """Panel list on [theta1, theta2] graded toward each endpoint (by the
    distance of lam to it) and toward the foot of lam if it hangs close to
    the interior of the arc."""
    th1, th2 = ctx.theta1, ctx.theta2
    span = th2 - th1
    k1 = _depth(span, abs(lam - ctx.s1))
    k2 = _depth(span, abs(lam - ctx.s2))
    th_foot = th1 + (np.angle(lam) - th1) % (2.0 * np.pi)
    margin = 0.02 * span
    if th1 + margin < th_foot < th2 - margin:
        dist = abs(lam - np.exp(1j * th_foot))
        if dist < 0.25 * span:
            k0 = _depth(span, dist)
            return (_graded(th1, th_foot, k1, k0)
                    + _graded(th_foot, th2, k0, k2))
    return _graded(th1, th2, k1, k2)


def _quad_nodes(panels, p):
    x, w = _leggauss(p)
    a = np.asarray([pa for pa, _ in panels])
    b = np.asarray([pb for _, pb in panels])
    hw = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    thetas = (mid[:, None] + hw[:, None] * x[None, :]).ravel()
    weights = (hw[:, None] * w[None, :]).ravel()
    return thetas, weights

# The arc is traversed with theta decreasing (from S_2 to S_1 through +i),
# so the oriented integral is minus the increasing-theta quadrature.


def _arc_sum(ctx, lam, panels, p):
    thetas, weights = _quad_nodes(panels, p)
    ell = ctx._ell.eval_real(thetas)
    pts = np.exp(1j * thetas)
    kern = pts / (pts - lam)
    return -np.sum(weights * ell * kern) / (2.0 * np.pi)


def _arc_cauchy(ctx, lam, order=24):
    """(2 pi i)^{-1} int_arc ln(1+|r|^2)/(s-lam) ds with a node-doubling
    error estimate below _QUAD_TOL."""
    panels = _panels_for(ctx, lam)
    coarse = _arc_sum(ctx, lam, panels, order // 2)
    fine = _arc_sum(ctx, lam, panels, order)
    if abs(fine - coarse) > _QUAD_TOL:
        finer = _arc_sum(ctx, lam, panels, 2 * order)
        if abs(finer - fine) > _QUAD_TOL:
            raise RuntimeError(
                "arc quadrature failed to settle at lambda=%s "
                "(doubling residual %.2e)" % (lam, abs(finer - fine)))
        return finer
    return fine


def _arc_sub_sum(ctx, theta0, ell0, panels, p):
    thetas, weights = _quad_nodes(panels, p)
    ell = ctx._ell.eval_real(thetas)
    pts = np.exp(1j * thetas)
    kern = pts / (pts - np.exp(1j * theta0))
    return -np.sum(weights * (ell - ell0) * kern) / (2.0 * np.pi)


def _arc_cauchy_pv(ctx, theta0):
    """Principal value of the arc integral at e^{i theta0} strictly inside
    the arc: singularity subtracted analytically, remainder by graded
    quadrature, both node-doubling checked."""
    th1, th2 = ctx.theta1, ctx.theta2
    ell0 = ctx.ell_at(theta0)
    panels = _graded(th1, theta0, 6, 12) + _graded(theta0, th2, 12, 6)
    coarse = _arc_sub_sum(ctx, theta0, ell0, panels, 12)
    fine = _arc_sub_sum(ctx, theta0, ell0, panels, 24)
    if abs(fine - coarse) > _QUAD_TOL:
        finer = _arc_sub_sum(ctx, theta0, ell0, panels, 48)
        if abs(finer - fine) > _QUAD_TOL:
            raise RuntimeError(
                "principal-value quadrature failed to settle at "
                "theta=%.6f" % theta0)
        fine = finer
    # PV of the circle kernel e^{it}/(e^{it}-e^{it0}) = 1/2 - (i/2)cot((t-t0)/2)
    pv_kernel = (0.5 * (th2 - th1)
                 - 1j * (np.log(abs(np.sin(0.5 * (th2 - theta0))))
                         - np.log(abs(np.sin(0.5 * (th1 - theta0))))))
    return fine - ell0 * pv_kernel / (2.0 * np.pi)


# ----------------------------------------------------------------------------
# full-circle variant (xi >= 1): exact mode sums
# ----------------------------------------------------------------------------

def _circle_modes(ctx):
    ks, cs = ctx._ell.ks, ctx._ell.cs
    pos = ks >= 0
    return ks[pos], cs[pos], ks[~pos], cs[~pos]


def _circle_cauchy_in(ctx, lam):
    kp, cp, _, _ = _circle_modes(ctx)
    return np.sum(cp * lam ** kp)


def _circle_cauchy_out(ctx, lam):
    _, _, kn, cn = _circle_modes(ctx)
    if len(kn) == 0:
        return 0j
    expo = kn * cmath.log(lam)
    keep = expo.real > -745.0
    if not np.any(keep):
        return 0j
    return -np.sum(cn[keep] * np.exp(expo[keep]))


# ----------------------------------------------------------------------------
# pole product and guards
# ----------------------------------------------------------------------------

def pole_product(ctx, lam):
    """prod over growth-region spectrum points of
    ((lam-lam_l)/(lam-1/conj(lam_l)))^{alpha_l}."""
    out = 1.0 + 0j
    for p in ctx.growth:
        out *= ((lam - p.lam) / (lam - 1.0 / np.conj(p.lam))) ** p.order
    return out


def _check_off_singularities(ctx, lam):
    for p in ctx.growth:
        if abs(lam - p.lam) < _POLE_TOL:
            raise ValueError(
                "lambda coincides with a spectrum point of the growth set")
        if abs(lam - 1.0 / np.conj(p.lam)) < _POLE_TOL:
            raise ValueError(
                "lambda coincides with a mirror spectrum point, where T "
                "has a pole")


# ----------------------------------------------------------------------------
# public evaluation
# ----------------------------------------------------------------------------

def t_eval(ctx, lam, order=24):
    """T(lambda) off the jump set.  The quadrature order is per panel; the
    value is accepted only if halving the order moves it by < 1e-9."""
    lam = complex(lam)
    _check_off_singularities(ctx, lam)
    if ctx.region == "II":
        return pole_product(ctx, lam)
    if ctx.region == "III":
        if abs(abs(lam) - 1.0) < _ON_CONTOUR_TOL:
            raise ValueError(
                "lambda lies on the circle jump set; use t_boundary")
        if abs(lam) < 1.0:
            integ = _circle_cauchy_in(ctx, lam)
        else:
            integ = _circle_cauchy_out(ctx, lam)
        return cmath.exp(-integ) * pole_product(ctx, lam)
    # region I
    if abs(abs(lam) - 1.0) < _ON_CONTOUR_TOL:
        th_foot = ctx.theta1 + (np.angle(lam) - ctx.theta1) % (2.0 * np.pi)
        if th_foot <= ctx.theta2 + 1e-12:
            raise ValueError(
                "lambda lies on the integration arc; use t_boundary")
    return cmath.exp(_arc_cauchy(ctx, lam, order=order)) * pole_product(ctx, lam)


def t_boundary(ctx, lam, side):
    """One-sided limit of T on the jump set; side=+1 is the radial limit
    from |lambda| > 1, side=-1 from |lambda| < 1.  The outer limit carries
    the factor (1+|r|^2)."""
    lam = complex(lam)
    side = int(side)
    if side not in (+1, -1):
        raise ValueError("side must be +1 (outer) or -1 (inner)")
    if abs(abs(lam) - 1.0) > 1e-9:
        raise ValueError("t_boundary expects lambda on the unit circle")
    theta0 = float(np.angle(lam))
    if ctx.region == "II":
        return pole_product(ctx, lam / abs(lam))
    if ctx.region == "III":
        lam = lam / abs(lam)
        if side > 0:
            integ = _circle_cauchy_out(ctx, lam)
        else:
            integ = _circle_cauchy_in(ctx, lam)
        return cmath.exp(-integ) * pole_product(ctx, lam)
    # region I: the jump set is the arc only
    th_foot = ctx.theta1 + (theta0 - ctx.theta1) % (2.0 * np.pi)
    if not (ctx.theta1 - 1e-12 <= th_foot <= ctx.theta2 + 1e-12):
        raise ValueError(
            "lambda sits on the circle off the integration arc, where T "
            "is continuous; use t_eval")
    if min(abs(lam - ctx.s1), abs(lam - ctx.s2)) < _ENDPOINT_GUARD:
        raise ValueError(
            "lambda is within 1e-6 of a stationary point; the boundary "
            "value is endpoint-singular there (use the local expansion "
            "from nu_alpha_at instead)")
    ell0 = ctx.ell_at(th_foot)
    pv = _arc_cauchy_pv(ctx, th_foot)
    return cmath.exp(pv + 0.5 * side * ell0) * pole_product(
        ctx, np.exp(1j * th_foot))


# ----------------------------------------------------------------------------
# local constants at the stationary points
# ----------------------------------------------------------------------------

def _stationary(ctx, j):
    if ctx.region != "I":
        raise ValueError("stationary-point constants exist only in region I")
    if j not in (1, 2):
        raise ValueError("stationary point index must be 1 or 2")
    return (ctx.s1, ctx.theta1) if j == 1 else (ctx.s2, ctx.theta2)


def nu_alpha_at(ctx, j):
    """(nu_j, alpha_j(S_j)): the local exponent nu_j = ln(1+|r(S_j)|^2)/2pi
    and the regularized arc integral with the value at S_j subtracted from
    the density (bounded integrand)."""
    key = ("nu_alpha", j)
    if key in ctx._cache:
        return ctx._cache[key]
    s_j, th_j = _stationary(ctx, j)
    ell_j = ctx.ell_at(th_j)
    nu_j = ell_j / (2.0 * np.pi)
    panels = _graded(ctx.theta1, ctx.theta2, 30, 30)
    coarse = _arc_sub_sum(ctx, th_j, ell_j, panels, 12)
    fine = _arc_sub_sum(ctx, th_j, ell_j, panels, 24)
    if abs(fine - coarse) > _QUAD_TOL:
        finer = _arc_sub_sum(ctx, th_j, ell_j, panels, 48)
        if abs(finer - fine) > _QUAD_TOL:
            raise RuntimeError(
                "regularized endpoint integral failed to settle at S_%d" % j)
        fine = finer
    alpha_j = complex(fine)
    ctx._cache[key] = (float(nu_j), alpha_j)
    return ctx._cache[key]


def _local_scale(ctx, j):
    """b_j with lambda = b_j * t^{-1/2} * zeta + S_j: the steepest-descent
    scaling direction at S_j, normalized to unit time."""
    s_j, _ = _stationary(ctx, j)
    w = np.sqrt(1.0 - ctx.xi ** 2)
    return ((-1.0) ** j) * (1j / np.sqrt(2.0)) * w ** (-0.5) * s_j


def _g_hat_sq(ctx, j):
    """t-independent part of T_j^2: the directional limit of
    T(lambda)^2 * ((lambda-S_j)/b_j)^{+-2 i nu_j} at S_j, evaluated in
    closed form from the local expansion."""
    key = ("g_hat_sq", j)
    if key in ctx._cache:
        return ctx._cache[key]
    nu_j, alpha_j = nu_alpha_at(ctx, j)
    s_j, _ = _stationary(ctx, j)
    p_j = pole_product(ctx, s_j)
    b_j = _local_scale(ctx, j)
    if j == 1:
        c_j = (ctx.s1 - ctx.s2) / b_j
    else:
        c_j = b_j / (ctx.s2 - ctx.s1)
    val = (p_j * cmath.exp(alpha_j)) ** 2 * cmath.exp(
        2j * nu_j * cmath.log(c_j))
    ctx._cache[key] = val
    return val


def t_j_const_sq(ctx, j, n, t):
    """T_j^2 = e^{phi(S_j,n,t)} * t^{(-1)^{j-1} i nu_j} * G_j^2 with G_j the
    cached t-independent directional limit; |T_j| is exactly t-independent
    by construction."""
    if t <= 0:
        raise ValueError("the local constants need t > 0")
    nu_j, _ = nu_alpha_at(ctx, j)
    s_j, _ = _stationary(ctx, j)
    sgn = 1.0 if j == 1 else -1.0
    return (cmath.exp(phi(s_j, n, t))
            * cmath.exp(1j * sgn * nu_j * np.log(t))
            * _g_hat_sq(ctx, j))


def t_j_const(ctx, j, n, t):
    """Principal square root of t_j_const_sq; downstream formulas only ever
    consume the square."""
    return cmath.sqrt(t_j_const_sq(ctx, j, n, t))
