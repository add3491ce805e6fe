"""The three-branch jump coupling: affine map, thinning ratios, common-jump
measure.

For a pair (x, y) the coalescing map is the affine bijection

    Psi(z) = M z + v,    M = sigma(y)^{-1} sigma(x),
                         v = sigma(y)^{-1} (x - y)_kappa,

whose defining property is x + sigma(x) z = y + sigma(y) Psi(z) whenever
|x - y| <= kappa.  The common part of the jump intensity and its image,

    m_Psi(z) = min(q0(z), q0(Psi(z)) |det M|),

is the density of the coalescence measure; its total mass is the rate at
which the coalescing branch fires.  Absolutely continuous q0 makes all of
this pointwise-evaluable, which is what the whole lab leans on.  An optional
envelope lets q0 be a strict sub-measure of the driving intensity; the
thinning denominators then stay with the driving density.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DomainError, ParameterError
from .quadrature import (
    QuadOptions,
    RayIntegrator,
    ray_breaks_abs,
    ray_breaks_coord,
    ray_breaks_switch,
)


def clipped_difference(x, y, kappa):
    """(x - y) clipped to length kappa: (1 ^ kappa/|x-y|)(x - y)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    d = x - y
    r = float(np.linalg.norm(d))
    if r <= kappa:
        return d
    # kappa * (d / r) rather than (kappa / r) * d: in d=1 the unit vector
    # d/r is exactly +-1.0, so the clipped step is exactly +-kappa
    return kappa * (d / r)


class Branch(Enum):
    COALESCE = "coalesce"
    REFLECT = "reflect"
    SYNCHRONIZE = "synchronize"


@dataclass
class ThinningDecision:
    branch: Branch
    y_jump: np.ndarray          # increment applied to the laggard marginal
    rho_psi: float
    rho_psi_inv: float


@dataclass
class PairGeometry:
    """Affine data for one (x, y) pair; cached because thinning is hot."""

    r: float
    diff: np.ndarray
    clipped: np.ndarray
    sx: np.ndarray
    sy: np.ndarray
    M: np.ndarray               # Psi(z) = M z + v
    v: np.ndarray
    Minv: np.ndarray            # Psi^{-1}(z) = Minv z + vinv
    vinv: np.ndarray
    det_M: float
    identity: bool              # x == y: Psi degenerates to the identity


class CouplingKernel:
    """Couples jumps of the driving measure through the map Psi.

    ``levy`` is the measure the common-jump part is built from; when it has
    an envelope, the envelope drives the process and the thinning ratio
    denominators use its density.
    """

    def __init__(self, levy, coeff, kappa, opts=QuadOptions()):
        if kappa <= 0.0:
            raise ParameterError("kappa must be positive")
        if levy.dim != coeff.dim:
            raise ParameterError("levy model and coefficients disagree on dim")
        self.levy = levy
        self.driving = levy.driving
        self.coeff = coeff
        self.kappa = float(kappa)
        self.opts = opts
        self.dim = levy.dim
        self._geom_cache = {}
        self._mass_cache = {}
        self._integrator = RayIntegrator(self.dim, opts)

    # ------------------------------------------------------------- geometry
    def geometry(self, x, y):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        y = np.atleast_1d(np.asarray(y, dtype=float))
        key = (x.tobytes(), y.tobytes())
        geo = self._geom_cache.get(key)
        if geo is None:
            geo = self._build_geometry(x, y)
            if len(self._geom_cache) > 8192:
                self._geom_cache.clear()
            self._geom_cache[key] = geo
        return geo

    def _build_geometry(self, x, y):
        diff = x - y
        r = float(np.linalg.norm(diff))
        eye = np.eye(self.dim)
        if r == 0.0:
            return PairGeometry(
                r=0.0, diff=diff, clipped=np.zeros(self.dim),
                sx=self.coeff.sigma(x), sy=self.coeff.sigma(y),
                M=eye, v=np.zeros(self.dim), Minv=eye, vinv=np.zeros(self.dim),
                det_M=1.0, identity=True,
            )
        clipped = diff if r <= self.kappa else self.kappa * (diff / r)
        sx = self.coeff.sigma(x)
        sy = self.coeff.sigma(y)
        syinv = self.coeff.sigma_inv(y)
        sxinv = self.coeff.sigma_inv(x)
        M = syinv @ sx
        v = syinv @ clipped
        Minv = sxinv @ sy
        vinv = -(sxinv @ clipped)
        det_M = float(np.linalg.det(M))
        if abs(det_M) < 1e-300:
            raise DomainError("sigma produced a singular coupling map")
        return PairGeometry(
            r=r, diff=diff, clipped=clipped, sx=sx, sy=sy,
            M=M, v=v, Minv=Minv, vinv=vinv, det_M=det_M, identity=False,
        )

    def psi(self, x, y, z):
        geo = self.geometry(x, y)
        z = np.atleast_1d(np.asarray(z, dtype=float))
        if geo.identity:
            return z.copy()
        return geo.M @ z + geo.v

    def psi_inverse(self, x, y, z):
        geo = self.geometry(x, y)
        z = np.atleast_1d(np.asarray(z, dtype=float))
        if geo.identity:
            return z.copy()
        return geo.Minv @ z + geo.vinv

    # ------------------------------------------------------------- thinning
    def _min_density_batch(self, Z, A, w, det_abs):
        """min(q0(z), q0(Az + w) |det A|) over rows of Z."""
        q_here = self.levy.density_batch(Z)
        q_image = self.levy.density_batch(Z @ A.T + w) * det_abs
        return np.minimum(q_here, q_image)

    def rho(self, x, y, z):
        """Thinning ratios (rho_Psi, rho_Psi_inv) in [0,1] at the pre-jump pair."""
        geo = self.geometry(x, y)
        z = np.atleast_1d(np.asarray(z, dtype=float))
        if geo.identity:
            return 1.0, 1.0
        q = self.driving.density_batch(z[None, :])[0]
        if q <= 0.0:
            raise DomainError(
                "undefined thinning ratio: jump lies outside the driving support"
            )
        det = abs(geo.det_M)
        m1 = self._min_density_batch(z[None, :], geo.M, geo.v, det)[0]
        m2 = self._min_density_batch(z[None, :], geo.Minv, geo.vinv, 1.0 / det)[0]
        return min(m1 / q, 1.0), min(m2 / q, 1.0)

    def decide(self, x, y, z, u):
        """Resolve one jump: which branch fires and the increment for Y."""
        geo = self.geometry(x, y)
        z = np.atleast_1d(np.asarray(z, dtype=float))
        if geo.identity:
            return ThinningDecision(Branch.SYNCHRONIZE, geo.sy @ z, 1.0, 1.0)
        r1, r2 = self.rho(x, y, z)
        if u <= 0.5 * r1:
            # exact algebra: sigma(y) Psi(z) = sigma(x) z + (x-y)_kappa
            return ThinningDecision(Branch.COALESCE, geo.sx @ z + geo.clipped, r1, r2)
        if u <= 0.5 * (r1 + r2):
            return ThinningDecision(
                Branch.REFLECT, geo.sy @ (geo.Minv @ z + geo.vinv), r1, r2
            )
        return ThinningDecision(Branch.SYNCHRONIZE, geo.sy @ z, r1, r2)

    # ------------------------------------------------------- measure breaks
    def _composed_breaks(self, model, A, w, u):
        """Kink radii of z -> q0(Az + w) along the ray direction u."""
        Au = A @ u
        pts = list(ray_breaks_abs(Au, w, 0.0))  # image pole
        if model.support_variant == "ball":
            pts += ray_breaks_abs(Au, w, model.eta)
        elif model.support_variant == "half_slab":
            pts += ray_breaks_coord(Au[0], w[0], 0.0)
            pts += ray_breaks_coord(Au[0], w[0], model.eta)
        elif model.support_variant == "slab":
            pts += ray_breaks_coord(Au[0], w[0], -model.eta)
            pts += ray_breaks_coord(Au[0], w[0], model.eta)
        return pts

    def mu_breaks_fn(self, geo, inverse=False, extra=()):
        model = self.levy
        A, w = (geo.Minv, geo.vinv) if inverse else (geo.M, geo.v)
        s = abs(geo.det_M) ** ((-1.0 if inverse else 1.0) / (model.dim + model.alpha))

        def breaks(u):
            pts = model.ray_breaks(u)
            pts += self._composed_breaks(model, A, w, u)
            pts += ray_breaks_switch(A @ u, w, s)
            pts += list(extra)
            return pts

        return breaks

    def _mu_point_fn(self, geo, weight=None, inverse=False):
        A, w = (geo.Minv, geo.vinv) if inverse else (geo.M, geo.v)
        det = abs(geo.det_M) ** (-1.0 if inverse else 1.0)

        def point_fn(z):
            m = self._min_density_batch(z[None, :], A, w, det)[0]
            if m == 0.0:
                return 0.0
            return m if weight is None else m * weight(z)

        return point_fn

    def _mu_integral(self, x, y, weight=None, inverse=False, r_lo=0.0,
                     r_hi=math.inf, extra_breaks=(), opts=None):
        geo = self.geometry(x, y)
        if geo.identity:
            raise DomainError("common-jump integrals need x != y")
        integ = self._integrator if opts is None else RayIntegrator(self.dim, opts)
        hi = r_hi
        if self.levy.support_variant == "ball":
            # supp(m) subset of the q0 ball; the image constraint only shrinks it
            hi = min(hi, self.levy.eta)
        val, res = integ.integrate(
            self._mu_point_fn(geo, weight, inverse),
            r_lo,
            hi,
            self.mu_breaks_fn(geo, inverse, extra=extra_breaks),
        )
        return val, res

    # ------------------------------------------------------------ integrals
    def mu_mass(self, x, y, inverse=False, opts=None):
        """Total mass of the coalescence measure (equal for both directions)."""
        key = ("mass", np.asarray(x, dtype=float).tobytes(),
               np.asarray(y, dtype=float).tobytes(), inverse, opts)
        if key not in self._mass_cache:
            val, res = self._mu_integral(x, y, inverse=inverse, opts=opts)
            self._integrator.check_residual(val, res, "coalescence mass")
            if len(self._mass_cache) > 8192:
                self._mass_cache.clear()
            self._mass_cache[key] = val
        return self._mass_cache[key]

    def mu_mass_above(self, x, y, delta, inverse=False, opts=None):
        val, _ = self._mu_integral(x, y, inverse=inverse, r_lo=delta, opts=opts)
        return val

    def mu_first_moment(self, x, y, R=math.inf, inverse=False, opts=None):
        """int_{|z| <= R} |z| m(dz) for one direction of the coupling."""
        weight = lambda z: float(np.linalg.norm(z))
        extra = () if not math.isfinite(R) else (R,)
        val, _ = self._mu_integral(
            x, y, weight=weight, inverse=inverse, r_hi=R, extra_breaks=extra, opts=opts
        )
        return val

    def mu_pair_first_moment(self, x, y, R=math.inf, opts=None):
        """int_{|z| <= R} |z| (m_Psi + m_Psi_inv)(dz)."""
        return self.mu_first_moment(x, y, R, False, opts) + self.mu_first_moment(
            x, y, R, True, opts
        )

    def mu_small_vector(self, x, y, r_cap=1.0, opts=None):
        """int_{|z| <= r_cap} z (m_Psi + m_Psi_inv)(dz), componentwise."""
        out = np.zeros(self.dim)
        for i in range(self.dim):
            w = lambda z, _i=i: float(z[_i])
            a, _ = self._mu_integral(x, y, weight=w, r_hi=r_cap,
                                     extra_breaks=(r_cap,), opts=opts)
            b, _ = self._mu_integral(x, y, weight=w, inverse=True, r_hi=r_cap,
                                     extra_breaks=(r_cap,), opts=opts)
            out[i] = a + b
        return out

    def pushforward_identity_check(self, x, y, test_fns, opts=None):
        """max over h of the relative gap between int h(Psi(z)) m_Psi(dz)
        and int h(z) m_Psi_inv(dz)."""
        geo = self.geometry(x, y)
        worst = 0.0
        for h in test_fns:
            w1 = lambda z: float(h(geo.M @ z + geo.v))
            s1, _ = self._mu_integral(x, y, weight=w1, opts=opts)
            w2 = lambda z: float(h(z))
            s2, _ = self._mu_integral(x, y, weight=w2, inverse=True, opts=opts)
            denom = max(abs(s1), abs(s2), 1e-300)
            worst = max(worst, abs(s1 - s2) / denom)
        return worst
