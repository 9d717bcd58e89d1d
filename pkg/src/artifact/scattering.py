"""Direct scattering for the focusing lattice.

Transfer-matrix evaluation of the scattering functions a, b and the
reflection coefficient r on the unit spectral circle, analytic continuation
of a into |lambda| > 1, discrete-spectrum search by argument-principle
winding counts with Newton polish, and norming-constant extraction from the
one-sided column recursions in truncated-Taylor (jet) arithmetic.

Conventions.  lambda = z^2 with z the principal square root; the scattering
matrix is the conjugated site product z^{-(Nmax+1)s3} A(Nmax)...A(Nmin)
z^{Nmin s3} with A(n) = [[z, q_n], [-conj(q_n), 1/z]], accumulated with
independent row rescaling so no lambda^n factor is ever formed explicitly.
a and b come out single-valued in lambda (checked against the z -> -z branch
swap).  All data are required to be compactly supported; tails below 1e-12
are truncated and the dropped mass is recorded.
"""

import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .jets import jconst, jmul, jrecip, jvar
from .lattice import LatticeState, c_infty
from .phase import exp_phi_jet

_TRUNC_AMP = 1e-12
_SING_TOL = 1e-10


class SpectralSingularityError(ValueError):
    """a(lambda) vanishes on the unit circle."""

    def __init__(self, theta, value):
        self.theta = float(theta)
        self.value = complex(value)
        super().__init__(
            "scattering function a vanishes on the circle near theta=%.6f "
            "(|a|=%.3e)" % (self.theta, abs(value)))


# ----------------------------------------------------------------------------
# domain types
# ----------------------------------------------------------------------------

@dataclass
class CircleGrid:
    """Sample angles on the unit circle; points are e^{i theta}."""

    thetas: np.ndarray
    points: np.ndarray
    adaptive: bool = False

    def __post_init__(self):
        self.thetas = np.asarray(self.thetas, dtype=float)
        self.points = np.asarray(self.points, dtype=complex)
        if self.thetas.ndim != 1 or self.thetas.size == 0:
            raise ValueError("grid must hold at least one angle")
        if np.any(np.diff(self.thetas) <= 0):
            raise ValueError("grid angles must be strictly increasing")
        if self.thetas[0] < 0.0 or self.thetas[-1] >= 2.0 * np.pi:
            raise ValueError("grid angles must lie in [0, 2*pi)")
        if np.max(np.abs(np.abs(self.points) - 1.0)) > 1e-15:
            raise ValueError("grid points must lie on the unit circle")

    @classmethod
    def uniform(cls, m):
        th = 2.0 * np.pi * np.arange(m) / m
        return cls(thetas=th, points=np.exp(1j * th), adaptive=False)

    @classmethod
    def from_thetas(cls, thetas):
        th = np.asarray(thetas, dtype=float)
        return cls(thetas=th, points=np.exp(1j * th), adaptive=True)

    def __len__(self):
        return self.thetas.size


@dataclass
class PoleData:
    """One spectrum point: zero of a at lam (|lam| > 1) of integer order,
    with the norming coefficients beta_0..beta_{order-1} once extracted."""

    lam: complex
    order: int
    betas: Optional[np.ndarray] = None


@dataclass
class DiscreteSpectrum:
    poles: List[PoleData] = field(default_factory=list)

    def __post_init__(self):
        for p in self.poles:
            if abs(p.lam) <= 1.0:
                raise ValueError("spectrum poles must satisfy |lambda| > 1")
            if p.order < 1:
                raise ValueError("pole order must be a positive integer")
            if p.betas is not None and abs(p.betas[0]) == 0.0:
                raise ValueError("leading norming coefficient must not vanish")
        lams = [p.lam for p in self.poles]
        for i in range(len(lams)):
            for j in range(i + 1, len(lams)):
                if abs(lams[i] - lams[j]) < 1e-12:
                    raise ValueError("spectrum poles must be pairwise distinct")

    @property
    def total_order(self):
        return sum(p.order for p in self.poles)


@dataclass
class SpectralData:
    grid: CircleGrid
    a_vals: np.ndarray
    b_vals: np.ndarray
    r_vals: np.ndarray
    c_inf: float
    spectrum: Optional[DiscreteSpectrum] = None
    truncation_bound: float = 0.0


# ----------------------------------------------------------------------------
# transfer products
# ----------------------------------------------------------------------------

def _support(state):
    """(sites, amplitudes, dropped-mass bound) after tail truncation."""
    q = state.q
    keep = np.abs(q) > _TRUNC_AMP
    if not np.any(keep):
        return np.zeros(0, dtype=int), np.zeros(0, dtype=complex), float(np.sum(np.abs(q)))
    lo = int(np.argmax(keep))
    hi = int(len(keep) - np.argmax(keep[::-1]))
    dropped = float(np.sum(np.abs(q[:lo])) + np.sum(np.abs(q[hi:])))
    return state.sites[lo:hi], q[lo:hi], dropped


def _transfer_ab(sites, amps, lam):
    """(a, b) of the scattering product at the points lam (nonzero array).

    The site product is accumulated with an independent log scale per row,
    and the outer diagonal conjugation is applied in log form, so arbitrary
    |lambda| stays within range.
    """
    lam = np.asarray(lam, dtype=complex)
    if sites.size == 0:
        return np.ones_like(lam), np.zeros_like(lam)
    z = np.sqrt(lam)
    zi = 1.0 / z
    m11 = np.ones_like(lam)
    m12 = np.zeros_like(lam)
    m21 = np.zeros_like(lam)
    m22 = np.ones_like(lam)
    ls1 = np.zeros(lam.shape, dtype=float)
    ls2 = np.zeros(lam.shape, dtype=float)
    for qn in amps:
        s = np.maximum(ls1, ls2)
        e1 = np.exp(ls1 - s)
        e2 = np.exp(ls2 - s)
        n11 = z * m11 * e1 + qn * m21 * e2
        n12 = z * m12 * e1 + qn * m22 * e2
        n21 = -np.conj(qn) * m11 * e1 + zi * m21 * e2
        n22 = -np.conj(qn) * m12 * e1 + zi * m22 * e2
        r1 = np.maximum(np.abs(n11), np.abs(n12))
        r2 = np.maximum(np.abs(n21), np.abs(n22))
        r1 = np.where(r1 == 0.0, 1.0, r1)
        r2 = np.where(r2 == 0.0, 1.0, r2)
        m11, m12 = n11 / r1, n12 / r1
        m21, m22 = n21 / r2, n22 / r2
        ls1 = s + np.log(r1)
        ls2 = s + np.log(r2)
    n_min, n_max = int(sites[0]), int(sites[-1])
    lz = np.log(z)
    a = m11 * np.exp(ls1 + (n_min - n_max - 1) * lz)
    b = m21 * np.exp(ls2 + (n_min + n_max + 2) * lz)
    return a, b


def transfer_scattering(state, grid):
    """Scattering data on the circle from the finite transfer product."""
    if len(grid) == 0:
        raise ValueError("empty grid")
    sites, amps, dropped = _support(state)
    a, b = _transfer_ab(sites, amps, grid.points)
    k_min = int(np.argmin(np.abs(a)))
    if abs(a[k_min]) <= _SING_TOL:
        raise SpectralSingularityError(grid.thetas[k_min], a[k_min])
    return SpectralData(
        grid=grid, a_vals=a, b_vals=b, r_vals=b / a,
        c_inf=c_infty(state), truncation_bound=dropped)


def continue_a(state, lam):
    """Analytic continuation of a off the circle (entire in z for compact
    support); accepts a scalar or an array, lam != 0."""
    lam_arr = np.atleast_1d(np.asarray(lam, dtype=complex))
    if np.any(lam_arr == 0):
        raise ValueError("a is evaluated away from lambda = 0")
    sites, amps, _ = _support(state)
    a, _ = _transfer_ab(sites, amps, lam_arr)
    if np.isscalar(lam) or np.asarray(lam).ndim == 0:
        return complex(a[0])
    return a.reshape(np.shape(lam))


def refined_scattering(state, start=1024, tol=1e-9, max_doublings=6):
    """Uniform-grid data refined until a and b stop moving in sup norm."""
    data = transfer_scattering(state, CircleGrid.uniform(start))
    for _ in range(max_doublings):
        finer = transfer_scattering(state, CircleGrid.uniform(2 * len(data.grid)))
        delta = max(
            np.max(np.abs(finer.a_vals[::2] - data.a_vals)),
            np.max(np.abs(finer.b_vals[::2] - data.b_vals)))
        data = finer
        if delta < tol:
            break
    return data


# ----------------------------------------------------------------------------
# discrete spectrum: argument principle + Newton
# ----------------------------------------------------------------------------

_MAX_EDGE_SAMPLES = 8192
_MIN_CELL = 4e-3


def _edge_winding(state, za, zb, n0=32):
    """Phase increment of a along the segment za -> zb (log-polar straight
    line), adaptively refined until the sampling resolves the phase."""
    for n in (n0, 2 * n0, 4 * n0, 8 * n0, _MAX_EDGE_SAMPLES):
        s = np.linspace(0.0, 1.0, n + 1)
        pts = np.exp(za + (zb - za) * s)
        vals = continue_a(state, pts)
        if np.any(np.abs(vals) < 1e-13):
            raise RuntimeError("zero of a on a search-cell edge")
        steps = np.angle(vals[1:] / vals[:-1])
        if np.max(np.abs(steps)) < 0.4 * np.pi:
            return float(np.sum(steps))
    raise RuntimeError(
        "winding sampling failed to resolve a along edge %s -> %s" % (za, zb))


def _cell_winding(state, cell):
    s0, s1, t0, t1 = cell
    c = [complex(s0, t0), complex(s1, t0), complex(s1, t1), complex(s0, t1)]
    total = sum(_edge_winding(state, c[k], c[(k + 1) % 4]) for k in range(4))
    w = total / (2.0 * np.pi)
    wi = int(round(w))
    if abs(w - wi) > 1e-6:
        raise RuntimeError("non-integer winding %.3e on cell %s" % (w, cell))
    return wi


# seam fractions tried when a bisection line lands on (or too near) a zero
_SEAM_FRACTIONS = (0.5, 0.5317, 0.4651, 0.6113, 0.3851)


def _split_cell(state, cell, w_parent):
    """Split the cell across its longer side into two children whose winding
    numbers are consistent with the parent; shift the seam if it hits a zero."""
    s0, s1, t0, t1 = cell
    along_s = (s1 - s0) >= (t1 - t0)
    last_err = None
    for f in _SEAM_FRACTIONS:
        if along_s:
            m = s0 + f * (s1 - s0)
            kids = [(s0, m, t0, t1), (m, s1, t0, t1)]
        else:
            m = t0 + f * (t1 - t0)
            kids = [(s0, s1, t0, m), (s0, s1, m, t1)]
        try:
            ws = [_cell_winding(state, k) for k in kids]
        except RuntimeError as err:
            last_err = err
            continue
        if ws[0] + ws[1] == w_parent:
            return list(zip(kids, ws))
        last_err = RuntimeError(
            "child windings %s do not sum to %d on cell %s" % (ws, w_parent, cell))
    raise RuntimeError("no admissible seam for cell %s: %s" % (cell, last_err))


def _newton_polish(state, lam0, mult):
    lam = complex(lam0)
    for _ in range(60):
        h = 1e-6 * abs(lam)
        f = continue_a(state, lam)
        fp = (-continue_a(state, lam + 2 * h) + 8 * continue_a(state, lam + h)
              - 8 * continue_a(state, lam - h) + continue_a(state, lam - 2 * h)) / (12 * h)
        if fp == 0:
            break
        step = mult * f / fp
        lam = lam - step
        if abs(step) < 1e-13 * abs(lam):
            break
    return lam


def find_spectrum(state, annulus):
    """Zeros of a with multiplicities inside {r_in < |lambda| < r_out}."""
    r_in, r_out = float(annulus[0]), float(annulus[1])
    if not (1.0 < r_in < r_out):
        raise ValueError("annulus must satisfy 1 < r_in < r_out")
    # nudge the radii off any boundary zero
    for _ in range(5):
        try:
            probe = np.exp(np.log(r_in)
                           + 1j * np.linspace(0, 2 * np.pi, 256, endpoint=False))
            pr2 = np.exp(np.log(r_out)
                         + 1j * np.linspace(0, 2 * np.pi, 256, endpoint=False))
            vals = np.concatenate([continue_a(state, probe),
                                   continue_a(state, pr2)])
            if np.min(np.abs(vals)) > 1e-8:
                break
            r_in *= 1.003
            r_out *= 1.003
        except RuntimeError:
            r_in *= 1.003
            r_out *= 1.003

    # the theta seam of the root cell is offset so that zeros on the real
    # axis (common for symmetric data) do not sit on a contour
    root_w = None
    for shift in range(6):
        th0 = 0.2024711 + 0.1 * shift
        root_cell = (np.log(r_in), np.log(r_out), th0, th0 + 2.0 * np.pi)
        try:
            root_w = _cell_winding(state, root_cell)
            break
        except RuntimeError:
            continue
    if root_w is None:
        raise RuntimeError("could not establish a clean annulus contour")

    stack = [(root_cell, root_w)]
    raw = []
    for _ in range(100000):
        if not stack:
            break
        cell, w = stack.pop()
        if w == 0:
            continue
        s0, s1, t0, t1 = cell
        if max(s1 - s0, t1 - t0) < _MIN_CELL:
            raw.append((np.exp(complex(0.5 * (s0 + s1), 0.5 * (t0 + t1))), w))
            continue
        stack.extend(_split_cell(state, cell, w))
    else:
        raise RuntimeError("spectrum search exceeded the subdivision budget")

    poles = []
    for lam0, mult in raw:
        lam = _newton_polish(state, lam0, mult)
        if any(abs(lam - p.lam) < 1e-8 for p in poles):
            continue
        poles.append(PoleData(lam=lam, order=mult))
    return DiscreteSpectrum(poles=poles)


# ----------------------------------------------------------------------------
# norming constants
# ----------------------------------------------------------------------------

def _column_jets(state, lam_j, order, analytic_side):
    """Jets (length `order`) of the two analytic Jost columns at lam_j,
    evaluated at the window-center site.

    analytic_side "plus" (|lam| > 1): left column of the minus solution and
    right column of the plus solution; "minus" (|lam| < 1): the other pair.
    Only the analytic column is propagated, so the contracting factor
    lambda^{-sgn} keeps both one-sided recursions stable.
    """
    sites, amps, _ = _support(state)
    if sites.size == 0:
        raise ValueError("norming extraction needs a nonzero potential")
    n_eval = int(sites[len(sites) // 2])
    lam = jvar(lam_j, order)
    lam_inv = jrecip(lam)

    if analytic_side == "plus":
        # Y^- column 1 upward: (w1, w2) -> (w1 + q lam^{-1} w2, -conj(q) w1 + lam^{-1} w2)
        w = [jconst(1.0, order), jconst(0.0, order)]
        for n, qn in zip(sites, amps):
            if n >= n_eval:
                break
            t2 = jmul(lam_inv, w[1])
            w = [w[0] + qn * t2, -np.conj(qn) * w[0] + t2]
        # Y^+ column 2 downward
        v = [jconst(0.0, order), jconst(1.0, order)]
        for n, qn in zip(sites[::-1], amps[::-1]):
            if n < n_eval:
                break
            d = 1.0 + abs(qn) ** 2
            u1 = (v[0] - qn * v[1]) / d
            u2 = (np.conj(qn) * v[0] + v[1]) / d
            v = [jmul(lam_inv, u1), u2]
        return w, v, n_eval

    # mirror side: Y^- column 2 upward, Y^+ column 1 downward
    w = [jconst(0.0, order), jconst(1.0, order)]
    for n, qn in zip(sites, amps):
        if n >= n_eval:
            break
        t1 = jmul(lam, w[0])
        w = [t1 + qn * w[1], -np.conj(qn) * t1 + w[1]]
    v = [jconst(1.0, order), jconst(0.0, order)]
    for n, qn in zip(sites[::-1], amps[::-1]):
        if n < n_eval:
            break
        d = 1.0 + abs(qn) ** 2
        u1 = (v[0] - qn * v[1]) / d
        u2 = (np.conj(qn) * v[0] + v[1]) / d
        v = [u1, jmul(lam, u2)]
    return w, v, n_eval


def norming_constants(state, pole, return_cond=False):
    """Norming coefficients beta_0..beta_{order-1} at a spectrum point.

    For |lambda_j| > 1 the defining relation proportionalizes the left
    column of the minus solution to the right column of the plus solution
    through the scalar jet B(lambda) e^{-phi}; for the mirror point
    |lambda_j| < 1 the roles of the columns swap and the weight is e^{+phi}.
    Both vector components are stacked into one least-squares solve and the
    condition number of the stacked system is reported on request.
    """
    lam_j, order = complex(pole[0]), int(pole[1])
    if order < 1:
        raise ValueError("pole order must be >= 1")
    side = "plus" if abs(lam_j) > 1.0 else "minus"
    y_min, y_plus, n_eval = _column_jets(state, lam_j, order, side)
    w = exp_phi_jet(lam_j, n_eval, state.t, order)
    if side == "plus":
        w = jrecip(w)  # e^{-phi}
    f0 = jmul(y_plus[0], w)
    f1 = jmul(y_plus[1], w)

    rows = np.zeros((2 * order, order), dtype=complex)
    rhs = np.zeros(2 * order, dtype=complex)
    for al in range(order):
        for j in range(al + 1):
            rows[al, j] = f0[al - j]
            rows[order + al, j] = f1[al - j]
        rhs[al] = y_min[0][al]
        rhs[order + al] = y_min[1][al]
    coef, *_ = np.linalg.lstsq(rows, rhs, rcond=None)
    cond = float(np.linalg.cond(rows))
    resid = np.linalg.norm(rows @ coef - rhs) / max(np.linalg.norm(rhs), 1e-300)
    if resid > 1e-6:
        raise ValueError(
            "column proportionality fails at lambda=%s (relative residual "
            "%.2e); the point is not a verified zero of a" % (lam_j, resid))

    betas = coef * np.array([math.factorial(k) for k in range(order)], dtype=float)
    if abs(betas[0]) < 1e-10:
        raise ValueError(
            "inconsistent norming data: leading coefficient %.3e below 1e-10"
            % abs(betas[0]))
    if return_cond:
        return betas, cond
    return betas
