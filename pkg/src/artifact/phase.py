"""Phase function for the focusing Ablowitz-Ladik lattice.

phi(lambda, n, t) = -i t (lambda + 1/lambda - 2) + n ln(lambda), principal log.
Everything downstream (residue relations, steepest-descent constants, region
classification in the (n, t) plane) is driven by this one function, its
lambda-derivatives, and the sign of its real part.
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .jets import jexp

# Dead band used when deciding which side of {Re phi = 0} a pole sits on.
SIGN_DEAD_BAND = 1e-10


def phi(lam, n, t):
    lam = complex(lam)
    if lam == 0:
        raise ValueError("phi is undefined at lambda = 0")
    return -1j * t * (lam + 1.0 / lam - 2.0) + n * np.log(lam)


def phi_derivatives(lam, n, t, k):
    """[phi, d phi, ..., d^k phi] at lam, by closed form."""
    lam = complex(lam)
    if lam == 0:
        raise ValueError("phi is undefined at lambda = 0")
    if k < 0:
        raise ValueError("derivative order must be >= 0")
    out = np.zeros(k + 1, dtype=complex)
    out[0] = phi(lam, n, t)
    if k >= 1:
        out[1] = -1j * t * (1.0 - lam ** -2) + n / lam
    fact = 1.0
    for j in range(2, k + 1):
        # d^j of -it(lam + 1/lam):  -it * (-1)^j j! lam^{-j-1}
        # d^j of n ln lam:          n * (-1)^{j-1} (j-1)! lam^{-j}
        fact *= j - 1  # (j-1)!
        out[j] = (-1) ** j * (-1j * t * fact * j * lam ** (-j - 1)) \
            + n * (-1) ** (j - 1) * fact * lam ** (-j)
    return out


def exp_phi_jet(lam, n, t, order):
    """Taylor jet of e^{phi} around lam, length `order`."""
    d = phi_derivatives(lam, n, t, order - 1)
    fact = 1.0
    taylor = d.copy()
    for j in range(2, order):
        fact *= j
        taylor[j] = d[j] / fact
    return jexp(taylor)


def stationary_points(xi):
    """Roots of d phi = 0 on the unit circle, S = -i xi +- sqrt(1 - xi^2)."""
    if abs(xi) >= 1.0:
        raise ValueError("stationary points lie on the circle only for |xi| < 1")
    root = np.sqrt(1.0 - xi * xi)
    s1 = -1j * xi + root
    s2 = -1j * xi - root
    return s1, s2


def re_phi_value(lam, xi):
    """Re phi(lam, 2*xi, 1); exact closed form, t-homogeneous."""
    lam = complex(lam)
    if lam == 0:
        raise ValueError("phi is undefined at lambda = 0")
    rho = abs(lam)
    return (rho - 1.0 / rho) * np.sin(np.angle(lam)) + 2.0 * xi * np.log(rho)


def re_phi_sign(lam, xi):
    """Sign of Re phi at ray xi: +1, -1, or 0 inside the dead band / on |lam|=1."""
    v = re_phi_value(lam, xi)
    if abs(v) <= SIGN_DEAD_BAND:
        return 0
    return 1 if v > 0 else -1


@dataclass
class RegionData:
    xi: float
    region: str
    s1: Optional[complex] = None
    s2: Optional[complex] = None


def classify_region(n, t, delta_trans=0.05):
    if t <= 0:
        raise ValueError("region classification requires t > 0")
    xi = n / (2.0 * t)
    if abs(xi) < 1.0 - delta_trans:
        s1, s2 = stationary_points(xi)
        return RegionData(xi=xi, region="I", s1=s1, s2=s2)
    if xi < -1.0 - delta_trans:
        return RegionData(xi=xi, region="II")
    if xi > 1.0 + delta_trans:
        return RegionData(xi=xi, region="III")
    tag = "TransitionNeg" if xi < 0 else "TransitionPos"
    return RegionData(xi=xi, region=tag)


def tail_decay_rate(xi):
    """Exponent mu(xi) in the |q| ~ e^{-mu t} bound along supra-light-cone rays.

    mu = 2(|xi| arccosh|xi| - sqrt(xi^2 - 1)) for |xi| > 1.
    """
    a = abs(xi)
    if a <= 1.0:
        return 0.0
    return 2.0 * (a * np.arccosh(a) - np.sqrt(a * a - 1.0))
