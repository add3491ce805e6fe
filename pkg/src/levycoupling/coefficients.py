"""SDE coefficients: drift b, diffusion sigma, and their structural constants.

Coefficients are built-in presets selected by name (the lab is closed: no
user-supplied callables through the config).  ``verify_structure`` and
``dissipativity_check`` give sampled-grid evidence for the structural
assumptions; they are evidence, not certificates, and the reports say so.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import qmc

from .errors import ParameterError, StructuralError


@dataclass(frozen=True)
class DissipativityProfile:
    """Two-branch drift profile: K1 r^beta below l0, -K2 r at or above l0."""

    K1: float
    K2: float
    l0: float
    beta: float

    def __post_init__(self):
        if self.K1 < 0 or self.K2 <= 0 or self.l0 < 0:
            raise ParameterError("profile needs K1 >= 0, K2 > 0, l0 >= 0")
        if not 0.0 <= self.beta <= 1.0:
            raise ParameterError("beta must lie in [0,1]")


@dataclass
class CoefficientField:
    dim: int
    drift: callable                    # (d,) -> (d,)
    diffusion: callable                # (d,) -> (d,d)
    diffusion_inverse: callable        # (d,) -> (d,d)
    lambda_nd: float                   # claimed non-degeneracy constant
    lip_sigma: float                   # claimed Lipschitz constant of sigma
    diagonal: bool = False
    constant_sigma: bool = False
    diffusion_diag: callable = None    # (d,) -> (d,) when diagonal
    name: str = ""

    def __post_init__(self):
        if self.lambda_nd < 1.0:
            raise ParameterError("lambda_nd must be >= 1")
        if self.lip_sigma < 0.0:
            raise ParameterError("lip_sigma must be >= 0")

    def sigma(self, x):
        return np.asarray(self.diffusion(np.asarray(x, dtype=float)), dtype=float)

    def sigma_inv(self, x):
        return np.asarray(
            self.diffusion_inverse(np.asarray(x, dtype=float)), dtype=float
        )

    def sigma_hs_diff(self, x, y):
        """Hilbert-Schmidt norm of sigma(x) - sigma(y)."""
        if self.constant_sigma:
            return 0.0
        if self.diffusion_diag is not None:
            dx = self.diffusion_diag(np.asarray(x, dtype=float))
            dy = self.diffusion_diag(np.asarray(y, dtype=float))
            return float(np.linalg.norm(dx - dy))
        return float(np.linalg.norm(self.sigma(x) - self.sigma(y)))


# ------------------------------------------------------------------ presets

def _drift_linear(dim, rate=1.0):
    rate = float(rate)
    if rate <= 0:
        raise ParameterError("linear drift needs rate > 0")
    b = lambda x: -rate * x
    return b, DissipativityProfile(K1=0.0, K2=rate, l0=0.0, beta=1.0)


def _drift_sin(dim, amp=1.0, freq=1.0):
    amp, freq = float(amp), float(freq)
    b = lambda x: -x + amp * np.sin(freq * x)
    sq = math.sqrt(dim)
    prof = DissipativityProfile(
        K1=max(2.0 * amp * sq, amp * freq), K2=0.5, l0=4.0 * amp * sq, beta=1.0
    )
    return b, prof


def _drift_holder(dim, amp=0.5, hexp=0.75):
    amp, hexp = float(amp), float(hexp)
    if not 0.0 < hexp < 1.0:
        raise ParameterError("holder drift needs hexp in (0,1)")

    def b(x):
        s = np.sin(x)
        return -x + amp * np.sign(s) * np.abs(s) ** hexp

    sq = math.sqrt(dim)
    K1 = amp * 2.0 ** (1.0 - hexp) * dim ** ((1.0 - hexp) / 2.0)
    prof = DissipativityProfile(K1=max(K1, 1e-12), K2=0.5, l0=4.0 * amp * sq, beta=hexp)
    return b, prof


def _drift_osc(dim, amp=1.2, freq=10.0):
    amp, freq = float(amp), float(freq)
    b = lambda x: -x + amp * np.sin(freq * x)
    sq = math.sqrt(dim)
    # bounded perturbation: only the constant branch bound is claimed
    prof = DissipativityProfile(K1=2.0 * amp * sq, K2=0.5, l0=4.0 * amp * sq, beta=0.0)
    return b, prof


def _drift_zero(dim):
    return (lambda x: np.zeros_like(x)), None


DRIFT_PRESETS = {
    "linear": (_drift_linear, {"rate": 1.0}),
    "sin": (_drift_sin, {"amp": 1.0, "freq": 1.0}),
    "holder": (_drift_holder, {"amp": 0.5, "hexp": 0.75}),
    "osc": (_drift_osc, {"amp": 1.2, "freq": 10.0}),
    "zero": (_drift_zero, {}),
}


def _sigma_constant(dim, value=1.0):
    value = float(value)
    if value <= 0:
        raise ParameterError("constant sigma needs value > 0")
    eye = np.eye(dim)
    inv = eye / value
    return dict(
        diffusion=lambda x: value * eye,
        diffusion_inverse=lambda x: inv,
        diffusion_diag=lambda x: np.full(dim, value),
        lambda_nd=max(value, 1.0 / value),
        lip_sigma=0.0,
        diagonal=True,
        constant_sigma=True,
    )


def _sigma_diag_sin(dim, base=2.0, amp=1.0, freq=1.0):
    base, amp, freq = float(base), float(amp), float(freq)
    if base - abs(amp) <= 0:
        raise ParameterError("diag_sin sigma needs base > |amp| (non-degeneracy)")

    diag = lambda x: base + amp * np.sin(freq * x)
    return dict(
        diffusion=lambda x: np.diag(diag(x)),
        diffusion_inverse=lambda x: np.diag(1.0 / diag(x)),
        diffusion_diag=diag,
        lambda_nd=max(base + abs(amp), 1.0 / (base - abs(amp))),
        lip_sigma=abs(amp) * freq,
        diagonal=True,
        constant_sigma=False,
    )


def _sigma_rot_sin(dim, base=2.0, amp=0.3):
    base, amp = float(base), float(amp)
    if dim != 2:
        raise ParameterError("rot_sin sigma is a d=2 preset")
    if base - abs(amp) <= 0:
        raise ParameterError("rot_sin sigma needs base > |amp|")

    def mat(x):
        phi = math.sin(x[0] + x[1])
        c, s = math.cos(phi), math.sin(phi)
        return np.array([[base + amp * c, -amp * s], [amp * s, base + amp * c]])

    def mat_inv(x):
        m = mat(x)
        det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
        return np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]]) / det

    return dict(
        diffusion=mat,
        diffusion_inverse=mat_inv,
        diffusion_diag=None,
        lambda_nd=max(base + abs(amp), 1.0 / (base - abs(amp))),
        lip_sigma=2.0 * abs(amp),
        diagonal=False,
        constant_sigma=False,
    )


SIGMA_PRESETS = {
    "constant": (_sigma_constant, {"value": 1.0}),
    "diag_sin": (_sigma_diag_sin, {"base": 2.0, "amp": 1.0, "freq": 1.0}),
    "rot_sin": (_sigma_rot_sin, {"base": 2.0, "amp": 0.3}),
}


def coefficient_field(dim, drift="linear", sigma="constant",
                      drift_params=None, sigma_params=None):
    """Assemble a CoefficientField (and the drift's profile) from preset names."""
    if drift not in DRIFT_PRESETS:
        raise ParameterError(f"unknown drift preset {drift!r}")
    if sigma not in SIGMA_PRESETS:
        raise ParameterError(f"unknown sigma preset {sigma!r}")
    dfun, ddef = DRIFT_PRESETS[drift]
    sfun, sdef = SIGMA_PRESETS[sigma]
    b, prof = dfun(dim, **{**ddef, **(drift_params or {})})
    sparts = sfun(dim, **{**sdef, **(sigma_params or {})})
    cf = CoefficientField(dim=dim, drift=b, name=f"{drift}+{sigma}", **sparts)
    return cf, prof


# ------------------------------------------------------------ sampled checks

def default_grid(dim, n=1000, lo=-10.0, hi=10.0, seed=0):
    sob = qmc.Sobol(d=dim, scramble=True, seed=seed)
    pts = sob.random(n)
    return lo + (hi - lo) * pts


def default_pairs(dim, n=1000, d_lo=1e-4, d_hi=20.0, seed=0):
    rng = np.random.default_rng(seed)
    dists = np.exp(rng.uniform(math.log(d_lo), math.log(d_hi), n))
    base = rng.uniform(-5.0, 5.0, size=(n, dim))
    dirs = rng.normal(size=(n, dim))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    return base, base + dists[:, None] * dirs


@dataclass
class StructureReport:
    lambda_claimed: float
    lambda_observed: float          # worst of sup|sigma xi|, sup 1/|sigma-min|
    inverse_error: float            # worst |sigma sigma^{-1} - I|
    lip_claimed: float
    lip_observed: float
    violations: list = field(default_factory=list)
    note: str = "sampled-grid evidence only, not a certificate"

    @property
    def passed(self):
        return not self.violations


def verify_structure(cf, grid=None, pairs=None, tol=1e-10):
    """Spot-check non-degeneracy, inverse consistency and Lipschitz bound."""
    if grid is None:
        grid = default_grid(cf.dim)
    grid = np.atleast_2d(np.asarray(grid, dtype=float))
    if grid.size == 0:
        raise ParameterError("verify_structure needs a nonempty grid")
    if pairs is None:
        pairs = default_pairs(cf.dim)
    xs, ys = pairs

    lam = cf.lambda_nd
    worst_lam = 0.0
    inv_err = 0.0
    violations = []
    for x in grid:
        s = cf.sigma(x)
        try:
            sv = np.linalg.svd(s, compute_uv=False)
        except np.linalg.LinAlgError as exc:  # pragma: no cover
            raise StructuralError(f"svd failed at x={x}", point=x) from exc
        smin, smax = float(sv[-1]), float(sv[0])
        if smin <= 1e-14 * max(1.0, smax):
            raise StructuralError(f"sigma is singular at x={x}", point=x)
        worst_lam = max(worst_lam, smax, 1.0 / smin)
        if smax > lam * (1 + tol) or 1.0 / smin > lam * (1 + tol):
            violations.append(("non_degeneracy", x.copy(), max(smax, 1.0 / smin)))
        e = float(np.max(np.abs(s @ cf.sigma_inv(x) - np.eye(cf.dim))))
        inv_err = max(inv_err, e)
        if e > 1e-10:
            violations.append(("inverse", x.copy(), e))

    lip_obs = 0.0
    for x, y in zip(xs, ys):
        r = float(np.linalg.norm(x - y))
        if r == 0.0:
            continue
        ratio = cf.sigma_hs_diff(x, y) / r
        lip_obs = max(lip_obs, ratio)
        if ratio > cf.lip_sigma * (1 + 1e-9) + 1e-12:
            violations.append(("lipschitz", (x.copy(), y.copy()), ratio))

    return StructureReport(
        lambda_claimed=lam,
        lambda_observed=worst_lam,
        inverse_error=inv_err,
        lip_claimed=cf.lip_sigma,
        lip_observed=lip_obs,
        violations=violations,
    )


@dataclass
class DissipativityReport:
    max_violation_small: float      # over pairs with r < l0 (vs K1 r^beta)
    max_violation_large: float      # over pairs with r >= l0 (vs -K2 r)
    n_small: int
    n_large: int
    note: str = "sampled-pair evidence only, not a certificate"

    @property
    def passed(self):
        return self.max_violation_small <= 1e-9 and self.max_violation_large <= 1e-9


def dissipativity_check(cf, prof, pairs=None):
    """Maximal observed violation of each branch of the drift profile."""
    if pairs is None:
        pairs = default_pairs(cf.dim)
    xs, ys = pairs
    if len(xs) == 0:
        raise ParameterError("dissipativity_check needs a nonempty pair list")
    v_small = -math.inf
    v_large = -math.inf
    n_small = n_large = 0
    for x, y in zip(xs, ys):
        d = x - y
        r = float(np.linalg.norm(d))
        if r == 0.0:
            continue
        lhs = float(np.dot(cf.drift(x) - cf.drift(y), d)) / r
        if r < prof.l0:
            n_small += 1
            v_small = max(v_small, lhs - prof.K1 * r**prof.beta)
        else:
            n_large += 1
            v_large = max(v_large, lhs + prof.K2 * r)
    return DissipativityReport(
        max_violation_small=v_small if n_small else 0.0,
        max_violation_large=v_large if n_large else 0.0,
        n_small=n_small,
        n_large=n_large,
    )
