"""Test functions fed to the generators and the rate certificates.

Radial functions are concave, increasing, vanish at 0 and carry analytic
first and second derivatives (the certificates consume f'' directly, so no
numerical differentiation anywhere).  Each base shape is extended beyond its
cap so the function stays bounded, C^2, increasing and concave:

* identity base: arctan cap (matches f'' = 0 at the junction),
* power base r^theta: exponential-derivative cap with the time constant
  chosen so f'' is continuous,
* log-corrected linear base r(1 - log^{-theta}(1/r)): used near 0 only,
  extended with an exponentially relaxing second derivative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError


@dataclass
class RadialTestFunction:
    name: str
    value: callable
    d1: callable
    d2: callable
    fmax: float = math.inf        # sup of f, when finite
    smooth_upto: float = math.inf  # derivatives trusted on (0, smooth_upto]

    def shape_violations(self, grid=None):
        """Max violations of f(0)=0, f' >= 0, f'' <= 0 on a grid."""
        if grid is None:
            grid = np.geomspace(1e-6, min(self.smooth_upto, 10.0), 200)
        v0 = abs(self.value(0.0))
        v1 = max(0.0, float(np.max([-self.d1(r) for r in grid])))
        v2 = max(0.0, float(np.max([self.d2(r) for r in grid])))
        return v0, v1, v2


def capped_identity(a=2.0, tau=1.0):
    """f(r) = r up to a, then an arctan cap; C^2, concave, bounded."""
    if a <= 0 or tau <= 0:
        raise ParameterError("capped_identity needs a, tau > 0")

    def value(r):
        if r <= a:
            return float(r)
        return a + tau * math.atan((r - a) / tau)

    def d1(r):
        if r <= a:
            return 1.0
        s = (r - a) / tau
        return 1.0 / (1.0 + s * s)

    def d2(r):
        if r <= a:
            return 0.0
        s = (r - a) / tau
        return (-2.0 * s / tau) / (1.0 + s * s) ** 2

    return RadialTestFunction(
        name=f"capped_identity(a={a})",
        value=value, d1=d1, d2=d2, fmax=a + tau * math.pi / 2.0,
    )


def capped_power(theta, a=1.0):
    """f(r) = r^theta up to a, then exponentially relaxing slope; C^2."""
    if not 0.0 < theta < 1.0:
        raise ParameterError("capped_power needs theta in (0,1); use capped_identity for theta=1")
    if a <= 0:
        raise ParameterError("capped_power needs a > 0")
    fa = a**theta
    da = theta * a ** (theta - 1.0)
    tau = a / (1.0 - theta)   # matches f'' at the junction

    def value(r):
        if r <= 0.0:
            return 0.0
        if r <= a:
            return float(r**theta)
        return fa + da * tau * (1.0 - math.exp(-(r - a) / tau))

    def d1(r):
        if r <= a:
            return theta * r ** (theta - 1.0)
        return da * math.exp(-(r - a) / tau)

    def d2(r):
        if r <= a:
            return theta * (theta - 1.0) * r ** (theta - 2.0)
        return -(da / tau) * math.exp(-(r - a) / tau)

    return RadialTestFunction(
        name=f"capped_power(theta={theta},a={a})",
        value=value, d1=d1, d2=d2, fmax=fa + da * tau,
    )


def capped_log_linear(theta):
    """psi(r) = r (1 - log^{-theta}(1/r)) near 0, concave extension beyond.

    The closed formula is increasing/concave with nondecreasing second
    derivative only while log(1/r) is large; beyond the safe radius the
    extension keeps psi' > 0 and lets psi'' relax exponentially to 0.
    """
    if theta <= 0.0:
        raise ParameterError("capped_log_linear needs theta > 0")
    L1 = max(2.0, math.sqrt((theta + 1.0) * (theta + 2.0)))
    r1 = math.exp(-L1)

    def _core(r):
        L = -math.log(r)
        p = L ** (-theta)
        val = r * (1.0 - p)
        dp = theta * L ** (-theta - 1.0)       # d/dr L^{-theta} = dp / r
        d1v = 1.0 - p - dp
        d2v = -(theta / r) * L ** (-theta - 1.0) * (1.0 + (theta + 1.0) / L)
        return val, d1v, d2v

    p1, d1_1, d2_1 = _core(r1)
    tau = d1_1 / (-2.0 * d2_1)   # keeps the extended slope above d1_1/2 > 0

    def value(r):
        if r <= 0.0:
            return 0.0
        if r <= r1:
            return _core(r)[0]
        s = r - r1
        return p1 + d1_1 * s + d2_1 * tau * (s - tau * (1.0 - math.exp(-s / tau)))

    def d1(r):
        if r <= 0.0:
            return math.inf
        if r <= r1:
            return _core(r)[1]
        s = r - r1
        return d1_1 + d2_1 * tau * (1.0 - math.exp(-s / tau))

    def d2(r):
        if r <= 0.0:
            return -math.inf
        if r <= r1:
            return _core(r)[2]
        return d2_1 * math.exp(-(r - r1) / tau)

    return RadialTestFunction(
        name=f"capped_log_linear(theta={theta})",
        value=value, d1=d1, d2=d2, fmax=math.inf, smooth_upto=4.0,
    )


@dataclass
class SmoothTestFunction:
    """Bounded C^2 function on R^d with analytic gradient and a Hessian bound."""

    name: str
    value: callable
    grad: callable
    hess_bound: float
    sup: float

    def __call__(self, x):
        return self.value(x)


def gaussian_bump(center, width=1.0):
    center = np.atleast_1d(np.asarray(center, dtype=float))
    w2 = float(width) ** 2

    def value(x):
        d = np.atleast_1d(x) - center
        return math.exp(-0.5 * float(np.dot(d, d)) / w2)

    def grad(x):
        d = np.atleast_1d(x) - center
        return -(d / w2) * value(x)

    return SmoothTestFunction(
        name=f"gaussian_bump(w={width})",
        value=value, grad=grad, hess_bound=1.0 / w2, sup=1.0,
    )


def cosine_wave(kvec):
    k = np.atleast_1d(np.asarray(kvec, dtype=float))
    k2 = float(np.dot(k, k))

    def value(x):
        return math.cos(float(np.dot(k, np.atleast_1d(x))))

    def grad(x):
        return -math.sin(float(np.dot(k, np.atleast_1d(x)))) * k

    return SmoothTestFunction(
        name=f"cosine_wave(|k|^2={k2:.3g})",
        value=value, grad=grad, hess_bound=k2, sup=1.0,
    )


@dataclass
class PairTestFunction:
    """h(x, y) on R^{2d} with gradients in each argument (for the coupled
    generator); the split form f(x) + g(y) is what marginality exercises."""

    name: str
    value: callable              # (x, y) -> float
    grad_x: callable
    grad_y: callable
    hess_bound: float

    @classmethod
    def from_sum(cls, f: SmoothTestFunction, g: SmoothTestFunction):
        return cls(
            name=f"{f.name}(+){g.name}",
            value=lambda x, y: f.value(x) + g.value(y),
            grad_x=lambda x, y: f.grad(x),
            grad_y=lambda x, y: g.grad(y),
            hess_bound=f.hess_bound + g.hess_bound,
        )
