"""Special functions for the oscillatory local model.

Contents: principal-branch complex log-gamma (reflection + shift + Stirling,
built in-house), the model constants nu, gamma1, gamma2, the parabolic
cylinder function D_a(z) for complex order (convergent series below |z|=8
via high-precision confluent-hypergeometric pieces, asymptotic series with
sector-dependent subdominant correction above), and the explicit 2x2 model
matrix on the four diagonal rays with its sector prefactors.
"""

import warnings
from dataclasses import dataclass

import mpmath
import numpy as np

LN_PI = np.log(np.pi)
LN_SQRT_2PI = 0.5 * np.log(2.0 * np.pi)
D_TARGET = 1e-8  # advertised accuracy of pcf_d

# Stirling coefficients B_{2n} / (2n (2n-1)), n = 1..10
_STIRLING = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
    43867.0 / 244188.0,
    -174611.0 / 125400.0,
]

_SHIFT_RADIUS = 16.0


class PrecisionWarning(UserWarning):
    pass


# ----------------------------------------------------------------------------
# log-gamma
# ----------------------------------------------------------------------------

def _cexpm1(w):
    """exp(w) - 1 for complex w, accurate near 0."""
    w = complex(w)
    if abs(w) < 1e-4:
        return w * (1.0 + w / 2.0 * (1.0 + w / 3.0 * (1.0 + w / 4.0)))
    return np.exp(w) - 1.0


def _log_sin_pi_upper(z):
    """log sin(pi z), branch continuous on Im z >= 0, matching principal
    values on the line Re z = 1/2."""
    # sin(pi z) = -(e^{-i pi z} / 2i) (1 - e^{2 pi i z})
    return -1j * np.pi * z + np.log(-_cexpm1(2j * np.pi * z)) \
        + np.log(0.5) + 0.5j * np.pi


def _stirling(w):
    s = (w - 0.5) * np.log(w) - w + LN_SQRT_2PI
    w2 = w * w
    p = w
    for c in _STIRLING:
        s += c / p
        p *= w2
    return s


def log_gamma(z):
    """Principal branch of log Gamma(z)."""
    z = complex(z)
    if z.imag == 0.0 and z.real <= 0.0 and z.real == int(z.real):
        raise ValueError("log_gamma pole at nonpositive integer %g" % z.real)
    if z.real < 0.5:
        if z.imag < 0.0:
            return np.conj(log_gamma(np.conj(z)))
        return LN_PI - _log_sin_pi_upper(z) - log_gamma(1.0 - z)
    m = 0
    while abs(z + m) < _SHIFT_RADIUS:
        m += 1
    acc = 0.0 + 0.0j
    for j in range(m):
        acc += np.log(z + j)
    return _stirling(z + m) - acc


def _rgamma(z):
    """1 / Gamma(z); zero at the poles."""
    z = complex(z)
    if z.imag == 0.0 and z.real <= 0.0 and abs(z.real - round(z.real)) < 1e-12:
        return 0.0 + 0.0j
    return np.exp(-log_gamma(z))


# ----------------------------------------------------------------------------
# model constants
# ----------------------------------------------------------------------------

def nu_of_tau(tau):
    return float(np.log1p(abs(complex(tau)) ** 2) / (2.0 * np.pi))


def gamma12(tau):
    """(gamma1, gamma2) with gamma2 = conj(gamma1) exactly."""
    tau = complex(tau)
    if tau == 0:
        raise ValueError("gamma12 undefined at tau = 0 (no oscillatory term)")
    nu = nu_of_tau(tau)
    g1 = np.sqrt(2.0 * np.pi) \
        * np.exp(1j * np.pi / 4.0 - np.pi * nu / 2.0 - log_gamma(-1j * nu)) / tau
    g2 = np.sqrt(2.0 * np.pi) \
        * np.exp(-1j * np.pi / 4.0 - np.pi * nu / 2.0 - log_gamma(1j * nu)) \
        / np.conj(tau)
    return g1, g2


@dataclass
class PCModelParams:
    tau: complex
    nu: float
    gamma1: complex
    gamma2: complex

    @classmethod
    def from_tau(cls, tau):
        g1, g2 = gamma12(tau)
        return cls(tau=complex(tau), nu=nu_of_tau(tau), gamma1=g1, gamma2=g2)


# ----------------------------------------------------------------------------
# parabolic cylinder function
# ----------------------------------------------------------------------------

_D_SWITCH = 8.0
_D_TERMS = 40


def _pcf_d_series(a, z):
    """Convergent representation, |z| small.  The two confluent pieces are
    delegated to high precision; the cancellation-prone combination is ours."""
    with mpmath.workdps(40):
        am = mpmath.mpc(a)
        zm = mpmath.mpc(z)
        zz2 = zm * zm / 2
        t1 = mpmath.hyp1f1(-am / 2, mpmath.mpf(1) / 2, zz2) \
            * mpmath.rgamma((1 - am) / 2)
        t2 = mpmath.sqrt(2) * zm * mpmath.hyp1f1((1 - am) / 2, mpmath.mpf(3) / 2, zz2) \
            * mpmath.rgamma(-am / 2)
        val = mpmath.power(2, am / 2) * mpmath.sqrt(mpmath.pi) \
            * mpmath.exp(-zm * zm / 4) * (t1 - t2)
        out = complex(val)
    # double rounding + controlled cancellation: ~1e-16 * e^{|Re z^2|/2}
    est = 1e-16 * max(1.0, np.exp(min(abs((z * z).real) / 2.0, 60.0)) * 1e-10)
    return out, 0.0 + 0.0j, est


def _asym_sum(num_ratio, z, terms=_D_TERMS):
    """Sum an asymptotic series with term ratio callback; returns (sum, est)."""
    s = 1.0 + 0.0j
    term = 1.0 + 0.0j
    best = np.inf
    est = 0.0
    for k in range(1, terms + 1):
        term = term * num_ratio(k) / (2.0 * k * z * z)
        mag = abs(term)
        if mag > best:
            break
        s += term
        best = mag
        est = mag
    return s, est


def _pcf_d_asym(a, z):
    """Large-|z| expansion with the sector-dependent second exponential.
    Returns (mantissa, log_scale, error_estimate): D = mantissa * e^{log_scale}."""
    a = complex(a)
    z = complex(z)
    s_main, est_main = _asym_sum(lambda k: -(-a + 2 * k - 2) * (-a + 2 * k - 1), z)
    main_m = np.exp(a * np.log(z)) * s_main
    main_s = -z * z / 4.0

    th = np.angle(z)
    if abs(th) <= np.pi / 2.0:
        # second exponential maximally subdominant or absent
        return main_m, main_s, est_main
    sgn = 1.0 if th > 0 else -1.0
    s_b, est_b = _asym_sum(lambda k: (a + 2 * k - 1) * (a + 2 * k), z)
    corr_m = -np.sqrt(2.0 * np.pi) * _rgamma(-a) * np.exp(sgn * 1j * np.pi * a) \
        * np.exp(-(a + 1.0) * np.log(z)) * s_b
    corr_s = z * z / 4.0

    # combine on the dominant scale
    if main_s.real >= corr_s.real:
        m = main_m + corr_m * np.exp(corr_s - main_s)
        return m, main_s, est_main + est_b
    m = main_m * np.exp(main_s - corr_s) + corr_m
    return m, corr_s, est_main + est_b


def _pcf_d_parts(a, z):
    if abs(z) < _D_SWITCH:
        return _pcf_d_series(a, z)
    return _pcf_d_asym(a, z)


def pcf_d_err(a, z):
    """(D_a(z), relative error estimate)."""
    m, s, est = _pcf_d_parts(a, z)
    return m * np.exp(s), est


def pcf_d(a, z):
    val, est = pcf_d_err(a, z)
    if est > D_TARGET:
        warnings.warn(
            "parabolic cylinder accuracy estimate %.2e above target at a=%s z=%s"
            % (est, a, z), PrecisionWarning)
    return val


# ----------------------------------------------------------------------------
# explicit model matrix
# ----------------------------------------------------------------------------

def _sector_of(zeta):
    th = np.angle(zeta)
    if 0.0 < th < np.pi / 4:
        return 1
    if np.pi / 4 < th < 3 * np.pi / 4:
        return 2
    if 3 * np.pi / 4 < th <= np.pi:
        return 3
    if -np.pi <= th < -3 * np.pi / 4:
        return 4
    if -3 * np.pi / 4 < th < -np.pi / 4:
        return 5
    if -np.pi / 4 < th <= 0.0:
        return 6
    raise ValueError("zeta lies on a jump ray; pass an explicit sector")


def _q_matrix(sector, tau):
    t = complex(tau)
    d = 1.0 + abs(t) ** 2
    if sector == 1:
        return np.array([[1.0, 0.0], [-t, 1.0]], dtype=complex)
    if sector == 3:
        return np.array([[1.0, -np.conj(t) / d], [0.0, 1.0]], dtype=complex)
    if sector == 4:
        return np.array([[1.0, 0.0], [t / d, 1.0]], dtype=complex)
    if sector == 6:
        return np.array([[1.0, np.conj(t)], [0.0, 1.0]], dtype=complex)
    return np.eye(2, dtype=complex)


def pc_model(zeta, tau, sector=None):
    """Explicit solution of the cross-shaped model problem at zeta.

    sector (1..6, counter-clockwise from the positive real axis) may be given
    to force a one-sided value on a jump ray.  Scaled arithmetic internally,
    so large |zeta| is safe even though individual factors overflow.
    """
    zeta = complex(zeta)
    tau = complex(tau)
    if zeta == 0:
        raise ValueError("model matrix undefined at zeta = 0")
    if sector is None:
        sector = _sector_of(zeta)
    nu = nu_of_tau(tau)
    if tau == 0:
        g1 = g2 = 0.0 + 0.0j
    else:
        g1, g2 = gamma12(tau)

    upper = sector in (1, 2, 3)
    if upper:
        z_c1 = np.exp(-3j * np.pi / 4.0) * zeta
        z_c2 = np.exp(-1j * np.pi / 4.0) * zeta
        pref = [
            np.exp(-3 * np.pi * nu / 4.0),
            -1j * g1 * np.exp(np.pi * (nu - 1j) / 4.0),
            1j * g2 * np.exp(-3 * np.pi * (nu + 1j) / 4.0),
            np.exp(np.pi * nu / 4.0),
        ]
    else:
        z_c1 = np.exp(1j * np.pi / 4.0) * zeta
        z_c2 = np.exp(3j * np.pi / 4.0) * zeta
        pref = [
            np.exp(np.pi * nu / 4.0),
            -1j * g1 * np.exp(-3 * np.pi * (nu - 1j) / 4.0),
            1j * g2 * np.exp(np.pi * (nu + 1j) / 4.0),
            np.exp(-3 * np.pi * nu / 4.0),
        ]

    ia = 1j * nu
    m11, s11, _ = _pcf_d_parts(ia, z_c1)
    m21, s21, _ = _pcf_d_parts(ia - 1.0, z_c1)
    m12, s12, _ = _pcf_d_parts(-ia - 1.0, z_c2)
    m22, s22, _ = _pcf_d_parts(-ia, z_c2)

    phi_m = np.array([[pref[0] * m11, pref[1] * m12],
                      [pref[2] * m21, pref[3] * m22]], dtype=complex)
    phi_s = np.array([[s11, s12], [s21, s22]], dtype=complex)

    q = _q_matrix(sector, tau)

    # (Phi * Q) entry (i,j) = sum_k phi[i,k] q[k,j], tracked on a shared scale
    pm = np.zeros((2, 2), dtype=complex)
    ps = np.zeros((2, 2), dtype=complex)
    for i in range(2):
        for j in range(2):
            terms = [(phi_m[i, k] * q[k, j], phi_s[i, k]) for k in range(2)
                     if phi_m[i, k] * q[k, j] != 0.0]
            if not terms:
                pm[i, j] = 0.0
                ps[i, j] = 0.0
                continue
            smax = max(t[1].real for t in terms)
            sref = [t[1] for t in terms if t[1].real == smax][0]
            pm[i, j] = sum(m * np.exp(s - sref) for m, s in terms)
            ps[i, j] = sref

    # right factor: diag(zeta^{-i nu} e^{i zeta^2/4}, zeta^{i nu} e^{-i zeta^2/4})
    lz = np.log(zeta)
    col_scale = [(-ia) * lz + 1j * zeta * zeta / 4.0,
                 ia * lz - 1j * zeta * zeta / 4.0]
    out = np.zeros((2, 2), dtype=complex)
    for i in range(2):
        for j in range(2):
            out[i, j] = pm[i, j] * np.exp(ps[i, j] + col_scale[j])
    return out


def pc_jump_matrix(ray, zeta, tau):
    """Jump matrix on ray k in {1: pi/4, 2: 3pi/4, 3: -3pi/4, 4: -pi/4}.

    Rays 1 and 4 carry the lower-triangular factor, rays 2 and 3 the upper;
    the (+) side is the left of the direction of travel (1, 4 outward;
    2, 3 inward).
    """
    tau = complex(tau)
    nu = nu_of_tau(tau)
    d = 1.0 + abs(tau) ** 2
    zp = np.exp(-2j * nu * np.log(zeta)) * np.exp(1j * zeta * zeta / 2.0)
    zm = np.exp(2j * nu * np.log(zeta)) * np.exp(-1j * zeta * zeta / 2.0)
    if ray == 1:
        return np.array([[1.0, 0.0], [tau * zp, 1.0]], dtype=complex)
    if ray == 2:
        return np.array([[1.0, np.conj(tau) / d * zm], [0.0, 1.0]], dtype=complex)
    if ray == 3:
        return np.array([[1.0, 0.0], [tau / d * zp, 1.0]], dtype=complex)
    if ray == 4:
        return np.array([[1.0, np.conj(tau) * zm], [0.0, 1.0]], dtype=complex)
    raise ValueError("ray index must be 1..4")
