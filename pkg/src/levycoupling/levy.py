"""Pure-jump Levy measures with power-law densities.

All four supported measures share the density c0 |z|^{-d-alpha} restricted to
one of: all of R^d (``full_space``), the ball {|z| <= eta} (``ball``), the
one-sided slab {0 < z_1 <= eta} (``half_slab``) or the symmetric slab
{|z_1| <= eta} (``slab``).  The model evaluates the density, integrates
moments by ray quadrature, draws compound-Poisson jump schedules above a
truncation level, and returns the drift owed for simulating jumps in
(delta, 1] without compensation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, EmptySupportError, ParameterError
from .quadrature import QuadOptions, RayIntegrator

SUPPORT_VARIANTS = ("full_space", "ball", "half_slab", "slab")
_SYMMETRIC = frozenset({"full_space", "ball", "slab"})


@dataclass
class MomentIntegrals:
    small_square: float   # int_{|z|<=1} |z|^2 nu(dz)
    big_first: float      # int_{|z|>1} |z| nu(dz); inf for heavy full-space tails
    residual: float = 0.0


@dataclass
class LevyModel:
    """A power-law jump measure; optionally a sub-measure of ``envelope``.

    When ``envelope`` is set, this model is the smaller measure used to build
    the common-jump part of the coupling, while ``envelope`` is the measure
    that actually drives the process (and the denominator of the thinning
    ratios).  The densities must then satisfy q_self <= q_envelope.
    """

    dim: int
    alpha: float
    c0: float = 1.0
    eta: float = 1.0
    support_variant: str = "ball"
    envelope: "LevyModel | None" = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if not (isinstance(self.dim, int) and self.dim >= 1):
            raise ParameterError("dim must be a positive integer")
        if not 0.0 < self.alpha < 2.0:
            raise ParameterError("alpha must lie in (0,2)")
        if self.c0 <= 0.0:
            raise ParameterError("c0 must be positive")
        if not 0.0 < self.eta <= 1.0:
            raise ParameterError("eta must lie in (0,1]")
        if self.support_variant not in SUPPORT_VARIANTS:
            raise ParameterError(
                f"support_variant must be one of {SUPPORT_VARIANTS}"
            )
        if self.envelope is not None:
            self._check_envelope()
        # (1 ^ |z|^2)-integrability, checked numerically at construction
        m = self.moment_integrals()
        if not math.isfinite(m.small_square):
            raise ParameterError("int (1 ^ |z|^2) nu(dz) is not finite")

    # ------------------------------------------------------------------ core
    def density(self, z):
        """Density value at a single point z != 0."""
        z = np.atleast_1d(np.asarray(z, dtype=float))
        if z.shape != (self.dim,):
            raise DomainError(f"point must have shape ({self.dim},)")
        r = float(np.linalg.norm(z))
        if r == 0.0:
            raise DomainError("density pole: z = 0 is excluded (nu({0}) = 0)")
        if not self._in_support_scalar(z, r):
            return 0.0
        return self.c0 * r ** (-(self.dim + self.alpha))

    def density_batch(self, Z):
        """Vectorised density over rows of Z; rows outside the support give 0."""
        Z = np.atleast_2d(np.asarray(Z, dtype=float))
        r = np.linalg.norm(Z, axis=1)
        with np.errstate(divide="ignore"):
            vals = self.c0 * r ** (-(self.dim + self.alpha))
        vals = np.where(self._support_mask(Z, r), vals, 0.0)
        return vals

    def _in_support_scalar(self, z, r):
        if self.support_variant == "full_space":
            return True
        if self.support_variant == "ball":
            return r <= self.eta
        if self.support_variant == "half_slab":
            return 0.0 < z[0] <= self.eta
        return abs(z[0]) <= self.eta  # slab

    def _support_mask(self, Z, r):
        if self.support_variant == "full_space":
            return np.ones(len(Z), dtype=bool)
        if self.support_variant == "ball":
            return r <= self.eta
        if self.support_variant == "half_slab":
            return (Z[:, 0] > 0.0) & (Z[:, 0] <= self.eta)
        return np.abs(Z[:, 0]) <= self.eta

    @property
    def radial_bound(self):
        """Outer radius of the support (inf for unbounded variants)."""
        if self.support_variant == "ball" or self.dim == 1 and self.support_variant in (
            "half_slab",
            "slab",
        ):
            return self.eta
        return math.inf

    @property
    def symmetric(self):
        return self.support_variant in _SYMMETRIC

    def ray_breaks(self, u):
        """Kink radii of the density along the ray r -> r*u."""
        pts = []
        if self.support_variant == "ball":
            pts.append(self.eta)
        elif self.support_variant in ("half_slab", "slab"):
            u1 = u[0]
            if abs(u1) > 1e-300:
                for c in ((0.0, self.eta) if self.support_variant == "half_slab"
                          else (-self.eta, self.eta)):
                    r = c / u1
                    if r > 0.0:
                        pts.append(r)
        return pts

    def _integrator(self, opts=None):
        key = ("integ", opts)
        if key not in self._cache:
            self._cache[key] = RayIntegrator(self.dim, opts or QuadOptions())
        return self._cache[key]

    def weighted_integral(self, weight, r_lo, r_hi, opts=None, extra_breaks=()):
        """int weight(z) q(z) dz over the annulus, by ray quadrature."""
        integ = self._integrator(opts)

        def point_fn(z):
            v = self.density_batch(z[None, :])[0]
            return 0.0 if v == 0.0 else weight(z) * v

        def breaks_fn(u):
            b = self.ray_breaks(u)
            b.extend(extra_breaks)
            return b

        hi = min(r_hi, self.radial_bound) if math.isfinite(self.radial_bound) else r_hi
        return integ.integrate(point_fn, r_lo, hi, breaks_fn)

    # --------------------------------------------------------------- moments
    def moment_integrals(self, opts=None):
        key = ("moments", opts)
        if key in self._cache:
            return self._cache[key]
        small, res1 = self.weighted_integral(
            lambda z: float(np.dot(z, z)), 0.0, 1.0, opts, extra_breaks=(1.0,)
        )
        if self.support_variant == "full_space" and self.alpha <= 1.0:
            big, res2 = math.inf, 0.0
        else:
            big, res2 = self.weighted_integral(
                lambda z: float(np.linalg.norm(z)), 1.0, math.inf, opts
            )
        out = MomentIntegrals(small, big, res1 + res2)
        self._integrator(opts).check_residual(small, res1, "small-jump second moment")
        self._cache[key] = out
        return out

    def small_square_below(self, r_cap, opts=None):
        """int_{|z| <= r_cap} |z|^2 nu(dz)."""
        val, _ = self.weighted_integral(lambda z: float(np.dot(z, z)), 0.0, r_cap, opts)
        return val

    def restricted_mass(self, delta, opts=None):
        """nu({|z| > delta})."""
        key = ("mass", delta, opts)
        if key not in self._cache:
            val, res = self.weighted_integral(lambda z: 1.0, delta, math.inf, opts)
            self._integrator(opts).check_residual(val, res, "restricted jump mass")
            self._cache[key] = val
        return self._cache[key]

    def compensator_drift(self, trunc, opts=None):
        """-int_{trunc<|z|<=1} z nu(dz); zero for the symmetric variants."""
        if trunc > 1.0:
            raise ParameterError("trunc must be <= 1 for the compensator integral")
        if self.symmetric or trunc >= 1.0:
            return np.zeros(self.dim)
        key = ("comp", trunc, opts)
        if key not in self._cache:
            first, _ = self.weighted_integral(
                lambda z: float(z[0]), trunc, 1.0, opts, extra_breaks=(1.0,)
            )
            out = np.zeros(self.dim)
            out[0] = -first  # components 2..d vanish by symmetry
            self._cache[key] = out
        return self._cache[key].copy()

    # -------------------------------------------------------------- sampling
    def _check_trunc(self, trunc):
        if trunc <= 0.0:
            raise ParameterError("trunc must be positive")
        # unbounded slabs keep mass beyond eta, but the contract requires
        # trunc < eta for every variant
        if trunc >= self.eta:
            raise EmptySupportError(f"trunc must be below eta={self.eta}")

    def sample_jumps(self, horizon, trunc, rng):
        """Compound-Poisson jump schedule above |z| > trunc on [0, horizon]."""
        if horizon < 0.0:
            raise ParameterError("horizon must be nonnegative")
        self._check_trunc(trunc)
        if horizon == 0.0:
            return np.empty(0), np.empty((0, self.dim))
        lam = self.restricted_mass(trunc)
        n = int(rng.poisson(lam * horizon))
        times = np.sort(rng.uniform(0.0, horizon, n))
        sizes = self.sample_sizes(n, trunc, rng)
        return times, sizes

    def sample_sizes(self, n, trunc, rng):
        """n i.i.d. draws from nu restricted to {|z| > trunc}, normalised."""
        self._check_trunc(trunc)
        if n == 0:
            return np.empty((0, self.dim))
        bounded = math.isfinite(self.radial_bound)
        if bounded:
            radii = self._truncated_radii(n, trunc, self.radial_bound, rng)
            if self.dim == 1:
                if self.support_variant == "half_slab":
                    signs = np.ones(n)
                else:
                    signs = np.where(rng.random(n) < 0.5, 1.0, -1.0)
                return (radii * signs)[:, None]
            dirs = self._uniform_directions(n, rng)
            return radii[:, None] * dirs
        # unbounded variants: Pareto radius proposal + support rejection
        out = np.empty((n, self.dim))
        filled = 0
        while filled < n:
            m = max(2 * (n - filled), 16)
            radii = trunc * rng.random(m) ** (-1.0 / self.alpha)
            dirs = self._uniform_directions(m, rng)
            cand = radii[:, None] * dirs
            ok = self._support_mask(cand, radii)
            take = min(int(ok.sum()), n - filled)
            out[filled : filled + take] = cand[ok][:take]
            filled += take
        return out

    def _truncated_radii(self, n, lo, hi, rng):
        # P(R <= r) proportional to lo^{-a} - r^{-a} on (lo, hi]
        a = self.alpha
        u = rng.random(n)
        return (lo**-a - u * (lo**-a - hi**-a)) ** (-1.0 / a)

    def _uniform_directions(self, n, rng):
        g = rng.normal(size=(n, self.dim))
        return g / np.linalg.norm(g, axis=1, keepdims=True)

    # -------------------------------------------------------------- envelope
    def _check_envelope(self):
        env = self.envelope
        if env.dim != self.dim:
            raise ParameterError("envelope must share the model dimension")
        rng = np.random.default_rng(7)
        Z = rng.normal(scale=0.4, size=(512, self.dim))
        q0 = self.density_batch(Z)
        q1 = env.density_batch(Z)
        if np.any(q0 > q1 * (1.0 + 1e-12)):
            raise ParameterError("model density must lie below its envelope")

    @property
    def driving(self):
        """The measure that drives simulated jumps (envelope when present)."""
        return self.envelope if self.envelope is not None else self
