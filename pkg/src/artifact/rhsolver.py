"""Beals-Coifman solver on concentric circle contours.

The matrix factorization problem posed by the pole-removed jump data lives
on three origin-centered circles: an outer circle of radius rho enclosing
every spectrum point, the unit circle carrying the reflection data, and the
reflected inner circle of radius 1/rho.  Densities on each circle are
represented by uniform angular samples; the Cauchy transform acts diagonally
on Fourier modes between concentric circles, so the singular-integral
operator is assembled per circle from mode-splitting projections and
mode-summation transfer blocks.  The solver forms the classical
right-factorized operator F -> C_+(F w_-) + C_-(F w_+), solves
(Id - C_w) mu = I by one dense LU factorization (the two matrix rows of mu
decouple and share the operator), and reconstructs the sectionally analytic
matrix as I plus the Cauchy transform of mu (w_+ + w_-).  The lattice field
is read off the (1,2) entry at the origin in the shifted frame n+1.

Conventions.  Orientations: outer and inner circles counterclockwise, unit
circle clockwise, so the "+" boundary side is the interior of the outer and
inner circles and the exterior of the unit circle.  The jump factors carry
e^{-phi} in the lower-triangular parts and e^{+phi} in the upper-triangular
parts; on the unit circle the resulting jump (I-w_-)^{-1}(I+w_+) is
Hermitian with positive diagonal, which is what makes the homogeneous
problem admit only the trivial solution.  Angular grids store increasing
angles on every circle regardless of orientation; orientation enters only
through the signs of the projections.
"""

from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .phase import phi
from .soliton import RationalRemover

_PHASE_EXP_CAP = 690.0          # ln of the largest representable weight
_ON_CIRCLE_RTOL = 1e-12
_DEFAULT_MODES = 256
_RHO_MARGIN = 1e-9


# ----------------------------------------------------------------------------
# domain types
# ----------------------------------------------------------------------------

@dataclass
class CircleSpec:
    """One origin-centered contour circle; orientation +1 ccw, -1 cw."""

    radius: float
    orientation: int

    def __post_init__(self):
        if self.radius <= 0.0:
            raise ValueError("circle radius must be positive")
        if self.orientation not in (1, -1):
            raise ValueError("orientation must be +1 or -1")


@dataclass
class ContourProblem:
    """Three-circle jump data sampled on uniform angular grids."""

    circles: List[CircleSpec]
    modes: int
    thetas: np.ndarray
    nodes: np.ndarray            # (3, K)
    w_plus: np.ndarray           # (3, K, 2, 2)
    w_minus: np.ndarray          # (3, K, 2, 2)
    frame_n: int
    frame_t: float
    rho: float
    jump_residual: float

    @property
    def radii(self):
        return tuple(c.radius for c in self.circles)


@dataclass
class BCSolution:
    """Solved boundary density with its residual diagnostics."""

    mu: np.ndarray               # (3, K, 2, 2)
    residual: float
    densities: np.ndarray        # mu (w_+ + w_-), same shape
    smallest_singular_value: Optional[float] = None


# ----------------------------------------------------------------------------
# mode calculus on one circle
# ----------------------------------------------------------------------------

def _mode_index(k_count):
    return np.fft.fftfreq(k_count, 1.0 / k_count).astype(int)


def _eval_rows(k_count, radius, orientation, targets):
    """(len(targets), K) matrix: samples -> Cauchy-transform values at
    points strictly off the circle."""
    z = np.atleast_1d(np.asarray(targets, dtype=complex)) / radius
    k = _mode_index(k_count)
    rows = np.zeros((z.size, k_count), dtype=complex)
    inside = np.abs(z) < 1.0
    pos = k >= 0
    if np.any(inside):
        rows[np.ix_(np.where(inside)[0], np.where(pos)[0])] = \
            z[inside][:, None] ** k[pos][None, :]
    if np.any(~inside):
        # negative powers via reciprocal base so huge |z| underflows cleanly
        rows[np.ix_(np.where(~inside)[0], np.where(~pos)[0])] = \
            -((1.0 / z[~inside])[:, None] ** np.abs(k[~pos])[None, :])
    f_mat = np.fft.fft(np.eye(k_count), axis=0) / k_count
    return orientation * (rows @ f_mat)


def _boundary_projection(k_count, orientation, side):
    """(K, K) one-sided boundary-value matrix of the circle's own transform.

    side "plus"/"minus" refers to the contour side (left/right of travel);
    "interior"/"exterior" to geometry.
    """
    k = _mode_index(k_count)
    if side in ("plus", "minus"):
        side = {("plus", 1): "interior", ("plus", -1): "exterior",
                ("minus", 1): "exterior", ("minus", -1): "interior"}[
                    (side, orientation)]
    if side == "interior":
        mask = orientation * (k >= 0).astype(float)
    elif side == "exterior":
        mask = -orientation * (k < 0).astype(float)
    else:
        raise ValueError("side must be interior, exterior, plus, or minus")
    f_mat = np.fft.fft(np.eye(k_count), axis=0)
    return np.fft.ifft(mask[:, None] * f_mat, axis=0)


def cauchy_project(samples, radius, orientation, targets, side=None):
    """Cauchy transform of a sampled circle density at the target points.

    Targets on the source circle need a declared side ("interior" or
    "exterior"); targets elsewhere are evaluated directly.  Accuracy is
    spectral in the sample count for smooth densities.
    """
    h = np.asarray(samples, dtype=complex)
    if h.ndim != 1 or h.size == 0:
        raise ValueError("samples must be a nonempty 1-d array")
    scalar = np.isscalar(targets) or np.asarray(targets).ndim == 0
    z = np.atleast_1d(np.asarray(targets, dtype=complex)).ravel()
    on_circle = np.abs(np.abs(z) - radius) <= _ON_CIRCLE_RTOL * radius
    out = np.zeros(z.size, dtype=complex)
    if np.any(on_circle):
        if side is None:
            raise ValueError(
                "targets on the source circle require side='interior' or "
                "'exterior'")
        k = _mode_index(h.size)
        c = np.fft.fft(h) / h.size
        zz = z[on_circle] / radius
        if side == "interior":
            vals = (zz[:, None] ** np.abs(k[k >= 0])[None, :]) @ c[k >= 0]
            out[on_circle] = orientation * vals
        elif side == "exterior":
            vals = (zz[:, None] ** k[k < 0][None, :]) @ c[k < 0]
            out[on_circle] = -orientation * vals
        else:
            raise ValueError("side must be 'interior' or 'exterior'")
    if np.any(~on_circle):
        rows = _eval_rows(h.size, radius, orientation, z[~on_circle])
        out[~on_circle] = rows @ h
    return complex(out[0]) if scalar else out.reshape(np.shape(targets))


# ----------------------------------------------------------------------------
# operator blocks for the three-circle system (cached per geometry)
# ----------------------------------------------------------------------------

_BLOCK_CACHE = {}


def _contour_circles(rho):
    return [CircleSpec(rho, 1), CircleSpec(1.0, -1), CircleSpec(1.0 / rho, 1)]


def _contour_blocks(k_count, rho):
    """(C_plus, C_minus, nodes): one-sided boundary-value operators of the
    full three-circle Cauchy transform, acting on stacked scalar samples."""
    key = (k_count, round(float(rho), 14))
    if key in _BLOCK_CACHE:
        return _BLOCK_CACHE[key]
    circles = _contour_circles(rho)
    th = 2.0 * np.pi * np.arange(k_count) / k_count
    nodes = np.array([c.radius * np.exp(1j * th) for c in circles])
    total = 3 * k_count
    c_plus = np.zeros((total, total), dtype=complex)
    c_minus = np.zeros((total, total), dtype=complex)
    for ct in range(3):
        sl_t = slice(ct * k_count, (ct + 1) * k_count)
        for cs in range(3):
            sl_s = slice(cs * k_count, (cs + 1) * k_count)
            src = circles[cs]
            if cs == ct:
                c_plus[sl_t, sl_s] = _boundary_projection(
                    k_count, src.orientation, "plus")
                c_minus[sl_t, sl_s] = _boundary_projection(
                    k_count, src.orientation, "minus")
            else:
                block = _eval_rows(k_count, src.radius, src.orientation,
                                   nodes[ct])
                c_plus[sl_t, sl_s] = block
                c_minus[sl_t, sl_s] = block
    _BLOCK_CACHE[key] = (c_plus, c_minus, nodes)
    return _BLOCK_CACHE[key]


# ----------------------------------------------------------------------------
# problem assembly
# ----------------------------------------------------------------------------

def _reflected_remover(remover):
    if remover.side != "lower":
        raise ValueError(
            "pass the lower-side remover; the reflected partner is derived "
            "internally")
    return RationalRemover(side="upper", centers=remover.centers,
                           orders=remover.orders, per_pole=remover.per_pole,
                           constants=remover.constants, poly=remover.poly,
                           vandermonde_cond=remover.vandermonde_cond)


def _phase_factors(nodes, n, t):
    """(e^{-phi}, e^{+phi}) on the nodes, refusing unrepresentable weights."""
    ph = np.array([phi(z, n, t) for z in nodes])
    if np.max(np.abs(np.real(ph))) > _PHASE_EXP_CAP:
        raise ValueError(
            "phase weight exceeds the floating-point range on the contour "
            "at frame (n=%d, t=%g); reduce rho or the frame" % (n, t))
    return np.exp(-ph), np.exp(ph)


def build_three_circle_problem(r_samples, remover, n, t, rho=None,
                               modes=_DEFAULT_MODES):
    """Assemble the three-circle jump data at integer frame n, time t.

    r_samples supplies the reflection coefficient on the unit circle: None
    (reflectionless), a callable evaluated at the unit-circle nodes, or an
    array matching the angular grid.  remover is the lower-side rational
    remover of the discrete spectrum (or None when there is none).  rho
    defaults to 1.2 x the largest spectrum modulus and must keep every
    spectrum point strictly inside the outer circle.
    """
    if modes < 8 or modes % 2:
        raise ValueError("modes must be an even integer >= 8")
    if remover is not None and not isinstance(remover, RationalRemover):
        raise TypeError("remover must be a RationalRemover or None")

    if remover is not None:
        top = float(np.max(np.abs(remover.centers)))
        if rho is None:
            rho = 1.2 * top
        if top >= rho * (1.0 - _RHO_MARGIN):
            raise ValueError(
                "spectrum point with |lambda|=%.6f sits on or outside the "
                "outer circle rho=%.6f; increase rho" % (top, rho))
        if 1.0 / rho >= 1.0 / top * (1.0 + _RHO_MARGIN):
            raise ValueError("reflected spectrum outside the inner circle")
    elif rho is None:
        rho = 1.5
    if rho <= 1.0:
        raise ValueError("rho must exceed 1")

    circles = _contour_circles(rho)
    th = 2.0 * np.pi * np.arange(modes) / modes
    nodes = np.array([c.radius * np.exp(1j * th) for c in circles])

    if r_samples is None:
        r_unit = np.zeros(modes, dtype=complex)
    elif callable(r_samples):
        r_unit = np.asarray(r_samples(nodes[1]), dtype=complex)
    else:
        r_unit = np.asarray(r_samples, dtype=complex)
        if r_unit.shape != (modes,):
            raise ValueError(
                "r_samples must match the %d-point angular grid" % modes)

    if remover is not None:
        upper = _reflected_remover(remover)
        f_outer = remover(nodes[0])
        f_unit = remover(nodes[1])
        fbr_inner = upper(nodes[2])
        fbr_unit = upper(nodes[1])
    else:
        f_outer = np.zeros(modes, dtype=complex)
        f_unit = np.zeros(modes, dtype=complex)
        fbr_inner = np.zeros(modes, dtype=complex)
        fbr_unit = np.zeros(modes, dtype=complex)

    w_plus = np.zeros((3, modes, 2, 2), dtype=complex)
    w_minus = np.zeros((3, modes, 2, 2), dtype=complex)

    em_out, _ = _phase_factors(nodes[0], n, t)
    w_plus[0, :, 1, 0] = f_outer * em_out

    em_unit, ep_unit = _phase_factors(nodes[1], n, t)
    w_plus[1, :, 1, 0] = (r_unit + f_unit) * em_unit
    w_minus[1, :, 0, 1] = np.conj(r_unit + f_unit) * ep_unit

    _, ep_in = _phase_factors(nodes[2], n, t)
    w_minus[2, :, 0, 1] = -fbr_inner * ep_in

    # consistency of the factorized jump against the conjugated original:
    # (I - w_-)^{-1}(I + w_+) must equal T2^{-1} V T1 on the unit circle
    t1 = np.tile(np.eye(2, dtype=complex), (modes, 1, 1))
    t1[:, 1, 0] = f_unit * em_unit
    t2i = np.tile(np.eye(2, dtype=complex), (modes, 1, 1))
    t2i[:, 0, 1] = -fbr_unit * ep_unit
    v0 = np.tile(np.eye(2, dtype=complex), (modes, 1, 1))
    v0[:, 0, 0] = 1.0 + np.abs(r_unit) ** 2
    v0[:, 0, 1] = np.conj(r_unit) * ep_unit
    v0[:, 1, 0] = r_unit * em_unit
    conjugated = np.einsum("kab,kbc,kcd->kad", t2i, v0, t1)
    lhs = np.einsum(
        "kab,kbc->kac",
        np.linalg.inv(np.eye(2, dtype=complex)[None] - w_minus[1]),
        np.eye(2, dtype=complex)[None] + w_plus[1])
    resid = float(np.max(np.abs(lhs - conjugated)))

    return ContourProblem(circles=circles, modes=modes, thetas=th,
                          nodes=nodes, w_plus=w_plus, w_minus=w_minus,
                          frame_n=int(n), frame_t=float(t), rho=float(rho),
                          jump_residual=resid)


# ----------------------------------------------------------------------------
# the singular-operator solve
# ----------------------------------------------------------------------------

def _operator_matrix(problem):
    k_count = problem.modes
    c_plus, c_minus, _ = _contour_blocks(k_count, problem.rho)
    total = 3 * k_count
    v = problem.w_plus[:, :, 1, 0].reshape(total)   # lower entries
    u = problem.w_minus[:, :, 0, 1].reshape(total)  # upper entries
    a = np.eye(2 * total, dtype=complex)
    a[:total, total:] -= c_minus * v[None, :]
    a[total:, :total] -= c_plus * u[None, :]
    return a


def solve_bc(problem, tol=1e-8):
    """Solve (Id - C_w) mu = I on the sampled contour.

    The two matrix rows of mu satisfy the same scalar-block system with
    different right-hand sides, so one LU factorization serves both.
    """
    k_count = problem.modes
    total = 3 * k_count
    a = _operator_matrix(problem)
    b = np.zeros((2 * total, 2), dtype=complex)
    b[:total, 0] = 1.0       # row one of the identity: (1, 0)
    b[total:, 1] = 1.0       # row two: (0, 1)
    try:
        x = np.linalg.solve(a, b)
    except np.linalg.LinAlgError:
        smin = float(np.min(np.linalg.svd(a, compute_uv=False)))
        raise ValueError(
            "the discretized operator is singular (smallest singular value "
            "%.3e); the jump data violates the solvability hypothesis" % smin)
    residual = float(np.max(np.abs(a @ x - b)))
    if residual > tol:
        smin = float(np.min(np.linalg.svd(a, compute_uv=False)))
        raise ValueError(
            "operator solve residual %.3e exceeds %.1e (smallest singular "
            "value %.3e)" % (residual, tol, smin))
    mu = np.zeros((3, k_count, 2, 2), dtype=complex)
    for row in range(2):
        mu[:, :, row, 0] = x[:total, row].reshape(3, k_count)
        mu[:, :, row, 1] = x[total:, row].reshape(3, k_count)
    dens = np.einsum("ckab,ckbd->ckad", mu, problem.w_plus + problem.w_minus)
    return BCSolution(mu=mu, residual=residual, densities=dens)


# ----------------------------------------------------------------------------
# reconstruction
# ----------------------------------------------------------------------------

def reconstruct(problem, solution, lam, side=None):
    """The solved matrix I + C[mu (w_+ + w_-)](lam), 2x2.

    lam must sit off all three circles unless a side ("interior" or
    "exterior", relative to the circle it sits on) is declared.
    """
    lam = complex(lam)
    out = np.eye(2, dtype=complex)
    for c_idx, circ in enumerate(problem.circles):
        on_this = abs(abs(lam) - circ.radius) <= _ON_CIRCLE_RTOL * circ.radius
        for i in range(2):
            for j in range(2):
                h = solution.densities[c_idx, :, i, j]
                if not np.any(h):
                    continue
                out[i, j] += cauchy_project(
                    h, circ.radius, circ.orientation, lam,
                    side=side if on_this else None)
    return out


def reconstruct_q(problem, solution, n, t):
    """Lattice amplitude at site n, time t, from a problem assembled in the
    shifted frame n+1."""
    if problem.frame_n != n + 1 or problem.frame_t != float(t):
        raise ValueError(
            "the contour problem must be assembled in frame (n+1, t) = "
            "(%d, %g) to read off site n=%d" % (n + 1, t, n))
    return complex(reconstruct(problem, solution, 0.0)[0, 1])


def reflectionless_field(remover, n_range, t, rho=None,
                         modes=_DEFAULT_MODES):
    """q_n(t) over the sites by one contour solve per shifted frame.

    Convenience driver for cross-checks against the direct reflectionless
    construction; the remover encodes the whole discrete spectrum.
    """
    ns = np.asarray(list(n_range), dtype=int)
    out = np.zeros(ns.size, dtype=complex)
    for idx, n in enumerate(ns):
        prob = build_three_circle_problem(None, remover, int(n) + 1, t,
                                          rho=rho, modes=modes)
        sol = solve_bc(prob)
        out[idx] = reconstruct_q(prob, sol, int(n), t)
    return out
