"""Truncated Taylor-series (jet) arithmetic on complex coefficient arrays.

A jet of order m is a numpy array [c0, c1, ..., c_{m-1}] standing for
c0 + c1*h + ... + c_{m-1}*h^{m-1} + O(h^m).  All operations truncate to the
shorter operand's order unless stated otherwise.
"""

import numpy as np


def jet(values, order=None):
    a = np.asarray(values, dtype=complex).ravel()
    if order is not None:
        if len(a) >= order:
            return a[:order].copy()
        out = np.zeros(order, dtype=complex)
        out[: len(a)] = a
        return out
    return a.copy()


def jconst(c, order):
    out = np.zeros(order, dtype=complex)
    out[0] = c
    return out


def jvar(c, order):
    """Jet of c + h."""
    out = jconst(c, order)
    if order > 1:
        out[1] = 1.0
    return out


def jmul(a, b):
    m = min(len(a), len(b))
    out = np.zeros(m, dtype=complex)
    for k in range(m):
        out[k] = np.dot(a[: k + 1], b[k::-1])
    return out


def jadd(a, b):
    m = min(len(a), len(b))
    return a[:m] + b[:m]


def jrecip(a):
    """Jet of 1/a; requires a[0] != 0."""
    if a[0] == 0:
        raise ZeroDivisionError("jet reciprocal at a vanishing leading coefficient")
    m = len(a)
    out = np.zeros(m, dtype=complex)
    out[0] = 1.0 / a[0]
    for k in range(1, m):
        out[k] = -np.dot(a[1 : k + 1], out[k - 1 :: -1]) / a[0]
    return out


def jdiv(a, b):
    return jmul(a, jrecip(b))


def jexp(a):
    """Jet of exp(a), via E' = a' E term recursion."""
    m = len(a)
    out = np.zeros(m, dtype=complex)
    out[0] = np.exp(a[0])
    for k in range(1, m):
        acc = 0.0 + 0.0j
        for j in range(1, k + 1):
            acc += j * a[j] * out[k - j]
        out[k] = acc / k
    return out


def jpow_int(a, p):
    """Jet of a**p for integer p (negative allowed if a[0] != 0)."""
    m = len(a)
    if p == 0:
        return jconst(1.0, m)
    if p < 0:
        return jpow_int(jrecip(a), -p)
    out = jconst(1.0, m)
    base = a.copy()
    while p:
        if p & 1:
            out = jmul(out, base)
        base = jmul(base, base)
        p >>= 1
    return out


def jcompose(outer, inner):
    """Jet of outer(inner(h)) where inner[0] == 0.

    `outer` holds Taylor coefficients around inner's base value.
    """
    if abs(inner[0]) > 1e-14 * (1.0 + np.max(np.abs(inner))):
        raise ValueError("jet composition requires a vanishing inner constant term")
    m = len(inner)
    out = jconst(outer[0], m)
    power = jconst(1.0, m)
    for k in range(1, min(len(outer), m)):
        power = jmul(power, inner)
        out = out + outer[k] * power
    return out


def jshift_pole(coeffs, center, eval_order):
    """Taylor jet of sum_s coeffs[s-1]/(h + center)^s around h = 0 (center != 0)."""
    out = np.zeros(eval_order, dtype=complex)
    base = jvar(center, eval_order)
    inv = jrecip(base)
    power = jconst(1.0, eval_order)
    for s, c in enumerate(coeffs, start=1):
        power = jmul(power, inv)
        out = out + c * power
    return out


def jmirror(taylor, lam0):
    """Taylor jet at 1/conj(lam0) of conj(g(1/conj(lam))), from g's jet at lam0.

    The reflected function is holomorphic in lam; its coefficients follow by
    composing with the expansion of 1/conj(lam) about the reflected point and
    conjugating.  Requires lam0 != 0.
    """
    lam0 = complex(lam0)
    if lam0 == 0:
        raise ValueError("the reflection map is undefined at lambda = 0")
    a = jet(taylor)
    inner = np.zeros(len(a), dtype=complex)
    for k in range(1, len(a)):
        inner[k] = (-1.0) ** k * lam0 ** (k + 1)
    return np.conj(jcompose(a, inner))
