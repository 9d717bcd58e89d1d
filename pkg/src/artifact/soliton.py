"""Reflectionless Riemann-Hilbert solves and rational pole removal.

The piecewise-meromorphic matrix M attached to purely discrete spectral data
is the identity plus Laurent principal parts at every spectrum point lambda_j
(|lambda_j| > 1) and at the reflected points 1/conj(lambda_j); the
Laurent-matching conditions at those points close a finite square linear
system, and the lattice field is read off at the origin,
q_n(t) = [M(0, n+1, t)]_{12}.  The second half of the module builds the
rational triangular "removers" that strip the poles off M: per-pole principal
parts assembled from the norming data and the local jets of the scattering
function, plus a global polynomial certificate obtained from a
block-triangular generalized Vandermonde solve.

Conventions.  A spectrum point of order alpha at lambda_j couples the first
column's order-s Laurent coefficients (s = 1..alpha) to the Taylor jet of the
second column through weights that carry e^{-phi}, matching the column
proportionality used by the norming-constant extraction; at the reflected
point the roles of the columns and the sign of the phase swap.  The reflected norming
jet is -conj(B(1/conj(lambda))) (an exact symmetry of the normalized column
solutions), and the reflected remover is -conj(f(1/conj(lambda))).  In the
reflectionless setting the scattering function is the rational product
prod ((lam - lambda_j)/(lam - 1/conj(lambda_j)))^{alpha_j}, differentiated
analytically; a black-box scattering function is differentiated by high-order
finite differences on an off-center stencil instead.
"""

import math
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .jets import (jconst, jdiv, jet, jmirror, jmul, jpow_int, jrecip,
                   jshift_pole)
from .phase import exp_phi_jet, re_phi_sign
from .scattering import DiscreteSpectrum, PoleData

# factor-value floor that triggers the "add a constant and re-run" branch in
# the global remover construction
_FACTOR_FLOOR = 1e-12
_VANDER_COND_LIMIT = 1e12
_CENTER_TOL = 1e-12


def _mirror_point(lam):
    return 1.0 / np.conj(lam)


def _require_betas(spectrum):
    for p in spectrum.poles:
        if p.betas is None or len(p.betas) < p.order:
            raise ValueError(
                "spectrum point %s carries no norming coefficients "
                "(need %d)" % (p.lam, p.order))


def _taylor_betas(pole):
    """Norming jet beta_k / k!, length = pole order."""
    b = jet(pole.betas, order=pole.order)
    fact = np.array([math.factorial(k) for k in range(pole.order)], dtype=float)
    return b / fact


def _mirror_taylor_betas(pole):
    """Norming jet at the reflected point, -conj(B(1/conj(lam)))."""
    return -jmirror(_taylor_betas(pole), pole.lam)


def _jlin(lam0, c, order):
    """Jet of (lam - c) around lam0."""
    out = np.zeros(order, dtype=complex)
    out[0] = complex(lam0) - complex(c)
    if order > 1:
        out[1] = 1.0
    return out


# ----------------------------------------------------------------------------
# the reflectionless scattering function and local jets of its reciprocal
# ----------------------------------------------------------------------------

def reflectionless_a(spectrum, lam):
    """prod ((lam - lambda_j)/(lam - 1/conj(lambda_j)))^{alpha_j}.

    The unique rational function that is 1 at infinity, has modulus-
    squared product value on the circle, and vanishes to the prescribed
    orders exactly at the spectrum points.
    """
    lam_arr = np.asarray(lam, dtype=complex)
    out = np.ones_like(lam_arr)
    for p in spectrum.poles:
        out = out * ((lam_arr - p.lam) / (lam_arr - _mirror_point(p.lam))) ** p.order
    if np.isscalar(lam) or np.asarray(lam).ndim == 0:
        return complex(out)
    return out


def _product_quotient_jet(a_spec, lam0, alpha, order):
    """Taylor jet at lam0 of (lam - lam0)^alpha / a for the rational product
    a built on a_spec; a must vanish at lam0 to exactly order alpha."""
    match = None
    for p in a_spec.poles:
        if abs(p.lam - lam0) < _CENTER_TOL:
            match = p
            break
    if match is None or match.order != alpha:
        raise ValueError(
            "the rational scattering product does not vanish to order %d "
            "at %s" % (alpha, lam0))
    out = jpow_int(_jlin(lam0, _mirror_point(match.lam), order), alpha)
    for p in a_spec.poles:
        if p is match:
            continue
        num = jpow_int(_jlin(lam0, _mirror_point(p.lam), order), p.order)
        den = jpow_int(_jlin(lam0, p.lam, order), p.order)
        out = jmul(out, jdiv(num, den))
    return out


def _a_quotient_jet(spectrum, idx, order):
    p = spectrum.poles[idx]
    return _product_quotient_jet(spectrum, complex(p.lam), p.order, order)


def _a_mirror_quotient_jet(spectrum, idx, order):
    """Taylor jet at mu_idx = 1/conj(lambda_idx) of (lam - mu_idx)^alpha
    divided by the reflected partner conj(a(1/conj(lam)))."""
    p0 = spectrum.poles[idx]
    mu0 = complex(_mirror_point(p0.lam))
    scale = 1.0
    for p in spectrum.poles:
        scale *= abs(p.lam) ** (2 * p.order)
    out = jpow_int(_jlin(mu0, p0.lam, order), p0.order) / scale
    for k, p in enumerate(spectrum.poles):
        if k == idx:
            continue
        num = jpow_int(_jlin(mu0, p.lam, order), p.order)
        den = jpow_int(_jlin(mu0, _mirror_point(p.lam), order), p.order)
        out = jmul(out, jdiv(num, den))
    return out


# ----------------------------------------------------------------------------
# black-box scattering functions: jet extraction by finite differences
# ----------------------------------------------------------------------------

def _fd_weights(nodes, m):
    """Weights for the m-th derivative at 0 from arbitrary distinct nodes
    (the standard recursive construction; exact for polynomials)."""
    n = len(nodes)
    c = np.zeros((n, m + 1), dtype=complex)
    c1 = 1.0
    c4 = nodes[0]
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, m)
        c2 = 1.0
        c5 = c4
        c4 = nodes[i]
        for j in range(i):
            c3 = nodes[i] - nodes[j]
            c2 = c2 * c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, m]


def _callable_quotient_jet(a_func, lam0, alpha, order):
    """Taylor jet at lam0 of (lam - lam0)^alpha / a for a black-box a.

    a has an order-alpha zero at lam0, so the center point is excluded from
    the stencil; the node count leaves at least fifth-order accuracy for
    every requested derivative.
    """
    half = (order + 5) // 2 + 1
    offs = np.array([j for j in range(-half, half + 1) if j != 0], dtype=float)
    h = max(1.0, abs(lam0)) * 2.2e-16 ** (1.0 / (order + 4))
    pts = lam0 + offs * h
    vals = np.array([(z - lam0) ** alpha / complex(a_func(z)) for z in pts])
    out = np.zeros(order, dtype=complex)
    for m in range(order):
        w = _fd_weights(offs * h, m)
        out[m] = np.dot(w, vals) / math.factorial(m)
    return out


# ----------------------------------------------------------------------------
# the residue system
# ----------------------------------------------------------------------------

def _taylor_pole(x, c, s, k):
    """k-th Taylor coefficient at x of (lam - c)^{-s}."""
    return (-1.0) ** k * math.comb(s + k - 1, k) * (x - c) ** (-s - k)


def _phase_weights(spectrum, idx, n, t):
    """(w, w_mirror): Laurent-matching weight jets at spectrum point idx.

    w is the Taylor jet of (lam-lam0)^alpha/a * B * e^{-phi} at the spectrum
    point, w_mirror the jet of the reflected-point counterpart with e^{+phi};
    the full e^{-+phi} factors of the defining column relations are folded in,
    so the weights are ready for Laurent matching.
    """
    p = spectrum.poles[idx]
    al = p.order
    lam0 = complex(p.lam)
    mu0 = complex(_mirror_point(lam0))
    w = jmul(jmul(_a_quotient_jet(spectrum, idx, al), _taylor_betas(p)),
             jrecip(exp_phi_jet(lam0, n, t, al)))
    w_m = jmul(jmul(_a_mirror_quotient_jet(spectrum, idx, al),
                    _mirror_taylor_betas(p)),
               exp_phi_jet(mu0, n, t, al))
    return w, w_m


@dataclass
class ResidueSystem:
    """Square linear system closing the pole data of M at one (n, t) frame.

    Unknown slots are the 2-vector Laurent coefficients: first the
    column-one principal parts at the spectrum points, then the column-two
    principal parts at the reflected points, each slot holding the
    coefficient of (lam - center)^{-power}.  The right-hand side has one
    column per matrix column of M.
    """

    centers: np.ndarray
    powers: np.ndarray
    matrix: np.ndarray
    rhs: np.ndarray
    condition: float
    solution: Optional[np.ndarray] = None

    @property
    def size(self):
        return self.matrix.shape[0]

    def solve(self):
        if self.solution is None:
            try:
                sol = np.linalg.solve(self.matrix, self.rhs)
            except np.linalg.LinAlgError as err:
                raise ValueError(
                    "singular residue system (condition estimate %.3e): "
                    "degenerate spectral data" % self.condition) from err
            if not np.all(np.isfinite(sol)):
                raise ValueError(
                    "singular residue system (condition estimate %.3e): "
                    "degenerate spectral data" % self.condition)
            self.solution = sol
        return self.solution

    def evaluate(self, lam):
        """M(lam) away from the Laurent centers."""
        sol = self.solve()
        lam = complex(lam)
        if self.size and np.min(np.abs(lam - self.centers)) < _CENTER_TOL:
            raise ValueError("evaluation point sits on a Laurent center")
        m = np.eye(2, dtype=complex)
        tau = self.size // 2
        for i in range(self.size):
            m[:, 0 if i < tau else 1] += sol[i] * (lam - self.centers[i]) ** (-int(self.powers[i]))
        return m


def build_residue_system(spectrum, n, t):
    """Assemble the Laurent-matching equations at integer frame n, time t."""
    _require_betas(spectrum)
    poles = spectrum.poles
    tau = spectrum.total_order
    two = 2 * tau

    centers = np.zeros(two, dtype=complex)
    powers = np.zeros(two, dtype=int)
    offs = []
    off = 0
    for p in poles:
        offs.append(off)
        centers[off:off + p.order] = p.lam
        centers[tau + off:tau + off + p.order] = _mirror_point(p.lam)
        powers[off:off + p.order] = np.arange(1, p.order + 1)
        powers[tau + off:tau + off + p.order] = np.arange(1, p.order + 1)
        off += p.order

    G = np.eye(two, dtype=complex)
    R = np.zeros((two, 2), dtype=complex)
    for li, p in enumerate(poles):
        al = p.order
        w, wm = _phase_weights(spectrum, li, n, t)
        base = offs[li]
        for s_row in range(1, al + 1):
            kk = al - s_row
            row_u = base + s_row - 1
            row_m = tau + base + s_row - 1
            R[row_u, 1] = w[kk]
            R[row_m, 0] = wm[kk]
            for mj, p2 in enumerate(poles):
                mu2 = complex(_mirror_point(p2.lam))
                for s_col in range(1, p2.order + 1):
                    acc_u = 0.0 + 0.0j
                    acc_m = 0.0 + 0.0j
                    for j in range(kk + 1):
                        acc_u += w[j] * _taylor_pole(complex(p.lam), mu2, s_col, kk - j)
                        acc_m += wm[j] * _taylor_pole(
                            complex(_mirror_point(p.lam)), complex(p2.lam),
                            s_col, kk - j)
                    G[row_u, tau + offs[mj] + s_col - 1] -= acc_u
                    G[row_m, offs[mj] + s_col - 1] -= acc_m

    if not (np.all(np.isfinite(G)) and np.all(np.isfinite(R))):
        raise ValueError(
            "phase weight overflow at frame (n=%d, t=%g): e^{+-phi} is not "
            "finite at a spectrum point" % (n, t))
    cond = float(np.linalg.cond(G)) if two else 1.0
    return ResidueSystem(centers=centers, powers=powers, matrix=G, rhs=R,
                         condition=cond)


def solve_reflectionless(spectrum, n, t, eval_points):
    """M(lam) for purely discrete spectral data, shape (len(points), 2, 2)."""
    pts = np.atleast_1d(np.asarray(eval_points, dtype=complex))
    if spectrum is None or not spectrum.poles:
        return np.broadcast_to(np.eye(2, dtype=complex), (pts.size, 2, 2)).copy()
    system = build_residue_system(spectrum, n, t)
    system.solve()
    return np.array([system.evaluate(z) for z in pts])


def soliton_field(spectrum, n_range, t):
    """q_n(t) over the requested sites.

    The value at site n is the (1,2) entry of the solved matrix at the
    origin in the shifted frame n+1, read off directly from the
    reflected-side principal-part coefficients.
    """
    ns = np.asarray(list(n_range), dtype=int)
    out = np.zeros(ns.size, dtype=complex)
    if spectrum is None or not spectrum.poles:
        return out
    tau = spectrum.total_order
    for i, n in enumerate(ns):
        system = build_residue_system(spectrum, int(n) + 1, t)
        sol = system.solve()
        acc = 0.0 + 0.0j
        for k in range(tau, 2 * tau):
            acc += sol[k, 0] * (-system.centers[k]) ** (-int(system.powers[k]))
        out[i] = acc
    return out


def soliton_restricted(spectrum, xi, n, t):
    """Soliton field at one site from the spectrum restricted to the poles
    on the zero set of Re phi along the ray xi (dead-band inclusive)."""
    if spectrum is None or not spectrum.poles:
        return 0.0 + 0.0j
    keep = [PoleData(lam=p.lam, order=p.order,
                     betas=None if p.betas is None else np.asarray(p.betas, dtype=complex))
            for p in spectrum.poles if re_phi_sign(p.lam, xi) == 0]
    if not keep:
        return 0.0 + 0.0j
    sub = DiscreteSpectrum(poles=keep)
    return complex(soliton_field(sub, [int(n)], t)[0])


# ----------------------------------------------------------------------------
# generalized Vandermonde matrices
# ----------------------------------------------------------------------------

def vandermonde_general(lambdas, alphas):
    """Confluent Vandermonde matrix with Taylor-normalized derivative rows.

    The block for node lambda_j holds rows m = 0..alpha_j-1 with entries
    C(k, m) lambda_j^{k-m} for k = 0..tau-1 (tau = sum alpha).  Returns the
    matrix and its determinant, which matches
    prod_{j>k} (lambda_j - lambda_k)^{alpha_j alpha_k}.
    """
    lam = np.atleast_1d(np.asarray(lambdas, dtype=complex))
    al = np.atleast_1d(np.asarray(alphas, dtype=int))
    if lam.size != al.size:
        raise ValueError("node and order lists must have equal length")
    if lam.size == 0:
        raise ValueError("at least one node is required")
    if np.any(al < 1):
        raise ValueError("orders must be positive integers")
    for i in range(lam.size):
        for j in range(i + 1, lam.size):
            if abs(lam[i] - lam[j]) < _CENTER_TOL:
                raise ValueError("nodes must be pairwise distinct")
    tau = int(np.sum(al))
    v = np.zeros((tau, tau), dtype=complex)
    r = 0
    for lj, aj in zip(lam, al):
        for m in range(int(aj)):
            for k in range(m, tau):
                v[r, k] = math.comb(k, m) * lj ** (k - m)
            r += 1
    return v, complex(np.linalg.det(v))


# ----------------------------------------------------------------------------
# rational removers
# ----------------------------------------------------------------------------

@dataclass
class RationalRemover:
    """Rational function removing the principal parts of M on one side.

    `__call__` evaluates the proper principal-part expansion (all terms of
    negative degree); `product_form` evaluates the certificate
    g(lam) * prod(factor_l + const_l) whose Laurent data at every center
    coincides with the principal-part expansion by construction.  Side
    "upper" evaluates the reflected function -conj(f(1/conj(lam))).
    """

    side: str
    centers: np.ndarray
    orders: np.ndarray
    per_pole: List[np.ndarray]
    constants: np.ndarray
    poly: np.ndarray
    vandermonde_cond: float

    def _pp(self, lam):
        out = np.zeros(lam.shape, dtype=complex)
        for c, coeffs in zip(self.centers, self.per_pole):
            inv = 1.0 / (lam - c)
            pw = np.ones_like(inv)
            for f in coeffs:
                pw = pw * inv
                out = out + f * pw
        return out

    def _prod(self, lam):
        out = np.zeros(lam.shape, dtype=complex)
        for k in range(len(self.poly) - 1, -1, -1):
            out = out * lam + self.poly[k]
        for c, coeffs, cst in zip(self.centers, self.per_pole, self.constants):
            fac = np.full(lam.shape, cst, dtype=complex)
            inv = 1.0 / (lam - c)
            pw = np.ones_like(inv)
            for f in coeffs:
                pw = pw * inv
                fac = fac + f * pw
            out = out * fac
        return out

    def _eval(self, lam, worker):
        scalar = np.isscalar(lam) or np.asarray(lam).ndim == 0
        z = np.atleast_1d(np.asarray(lam, dtype=complex))
        if self.side == "upper":
            v = -np.conj(worker(1.0 / np.conj(z)))
        else:
            v = worker(z)
        return complex(v[0]) if scalar else v.reshape(np.shape(lam))

    def __call__(self, lam):
        return self._eval(lam, self._pp)

    def product_form(self, lam):
        return self._eval(lam, self._prod)


def pole_removal(a_source, spectrum, side="lower"):
    """Rational remover for the spectrum's poles.

    a_source is either a DiscreteSpectrum (the scattering function is then
    the reflectionless rational product over its points, differentiated
    analytically) or a callable lam -> a(lam) differentiated by finite
    differences.  Side "lower" builds the function f entering the
    lower-triangular factor [[1, 0], [f e^{-phi}, 1]] at the spectrum
    points; side "upper" the reflected partner used at the reflected points.
    """
    if side not in ("lower", "upper"):
        raise ValueError("side must be 'lower' or 'upper'")
    _require_betas(spectrum)
    poles = spectrum.poles
    if not poles:
        raise ValueError("pole removal needs at least one spectrum point")

    per = []
    for p in poles:
        al = p.order
        if isinstance(a_source, DiscreteSpectrum):
            ajet = _product_quotient_jet(a_source, complex(p.lam), al, al)
        elif callable(a_source):
            ajet = _callable_quotient_jet(a_source, complex(p.lam), al, al)
        else:
            raise TypeError("a_source must be a DiscreteSpectrum or a callable")
        conv = jmul(ajet, _taylor_betas(p))
        # the principal part must cancel the matching data, hence the sign
        per.append(np.array([-conv[al - s] for s in range(1, al + 1)],
                            dtype=complex))

    lam_arr = np.array([p.lam for p in poles], dtype=complex)
    orders = np.array([p.order for p in poles], dtype=int)
    n_poles = len(poles)
    tau = int(np.sum(orders))

    constants = np.zeros(n_poles)
    for _ in range(n_poles + 2):
        clean = True
        for lp in range(n_poles):
            for ls in range(n_poles):
                if ls == lp:
                    continue
                dz = lam_arr[lp] - lam_arr[ls]
                val = constants[ls] + np.sum(
                    per[ls] * dz ** (-np.arange(1.0, orders[ls] + 1.0)))
                if abs(val) < _FACTOR_FLOOR:
                    constants[ls] += 1.0
                    clean = False
        if clean:
            break
    else:
        raise RuntimeError("could not regularize the remover factor values")

    v, _ = vandermonde_general(lam_arr, orders)
    w = np.zeros((tau, tau), dtype=complex)
    rhs = np.zeros(tau, dtype=complex)
    r0 = 0
    for lp, p in enumerate(poles):
        al = p.order
        pij = jconst(1.0, al)
        for ls, p2 in enumerate(poles):
            if ls == lp:
                continue
            fj = jshift_pole(per[ls], complex(p.lam) - complex(p2.lam), al)
            fj[0] += constants[ls]
            pij = jmul(pij, fj)
        for mrow in range(al):
            for krow in range(mrow + 1):
                w[r0 + mrow, :] += pij[mrow - krow] * v[r0 + krow, :]
        rhs[r0] = 1.0
        r0 += al
    cond = float(np.linalg.cond(w))
    if cond > _VANDER_COND_LIMIT:
        raise ValueError(
            "remover system condition %.3e exceeds %.0e (spectrum points too "
            "clustered)" % (cond, _VANDER_COND_LIMIT))
    g = np.linalg.solve(w, rhs)
    return RationalRemover(side=side, centers=lam_arr, orders=orders,
                           per_pole=per, constants=constants, poly=g,
                           vandermonde_cond=cond)
