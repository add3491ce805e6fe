"""Ray-decomposed quadrature for radial jump-measure integrands.

Integrals ``int g(z) dz`` over R^d (d <= 3) are reduced to a weighted sum of
radial integrals along unit directions u_i:

    sum_i w_i int g(r u_i) r^{d-1} dr.

The integrands we meet are power laws times indicators, minima of two shifted
power laws, and smooth test-function increments.  All their kinks lie on
spheres (|z| = c), affine-image spheres (|M z + v| = c), coordinate slabs
((M z + v)_1 = c) or density-switch cones (|M z + v| = s |z|); along a fixed
ray every one of those reduces to a linear or quadratic equation in r, so each
ray is integrated adaptively (Gauss-Kronrod) between its exact breakpoints.
A fixed-resolution mode (composite Gauss-Legendre panels, optionally in
log-radius) is kept for refinement-monotonicity checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.integrate import quad

from .errors import QuadratureError

_QUAD_EPS = 1e-12


@dataclass(frozen=True)
class QuadOptions:
    """Resolution knobs for the ray integrator.

    ``fixed`` switches from adaptive Gauss-Kronrod to ``fixed`` composite
    panels per radial segment (the refinement tests halve/double this).
    """

    n_panels: int = 48        # angular panels on the circle (d=2)
    panel_nodes: int = 4      # GL nodes per angular panel
    n_mu: int = 24            # polar GL nodes (d=3)
    epsabs: float = 1e-12
    epsrel: float = 1e-10
    quad_limit: int = 200
    fixed: int | None = None  # radial sub-panels per segment (None = adaptive)
    fixed_nodes: int = 8      # GL nodes per radial sub-panel in fixed mode

    def refined(self, factor=2):
        """Same options with the controllable resolutions multiplied up."""
        return replace(
            self,
            n_panels=self.n_panels * factor,
            fixed=None if self.fixed is None else self.fixed * factor,
        )


def angular_rule(dim, opts=QuadOptions()):
    """Unit directions and weights with sum(w) = surface area of S^{d-1}."""
    if dim == 1:
        return np.array([[1.0], [-1.0]]), np.array([1.0, 1.0])
    if dim == 2:
        xg, wg = leggauss(opts.panel_nodes)
        edges = np.linspace(0.0, 2.0 * np.pi, opts.n_panels + 1)
        mids = 0.5 * (edges[:-1] + edges[1:])
        half = 0.5 * (edges[1:] - edges[:-1])
        phi = (mids[:, None] + half[:, None] * xg[None, :]).ravel()
        w = (half[:, None] * wg[None, :]).ravel()
        return np.column_stack([np.cos(phi), np.sin(phi)]), w
    if dim == 3:
        mu, wmu = leggauss(opts.n_mu)
        nphi = 2 * opts.n_panels
        phi = 2.0 * np.pi * (np.arange(nphi) + 0.5) / nphi
        wphi = 2.0 * np.pi / nphi
        st = np.sqrt(1.0 - mu**2)
        U = np.stack(
            [
                np.outer(st, np.cos(phi)).ravel(),
                np.outer(st, np.sin(phi)).ravel(),
                np.repeat(mu, nphi),
            ],
            axis=1,
        )
        w = np.repeat(wmu, nphi) * wphi
        return U, w
    raise QuadratureError(f"ray quadrature implemented for d <= 3, got d={dim}")


def quadratic_roots(a, b, c):
    """Real roots of a r^2 + b r + c = 0, ascending; [] if none."""
    if abs(a) < 1e-300:
        if abs(b) < 1e-300:
            return []
        return [-c / b]
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        return []
    s = math.sqrt(disc)
    r1 = (-b - s) / (2.0 * a)
    r2 = (-b + s) / (2.0 * a)
    return sorted((r1, r2))


def ray_breaks_abs(Au, v, c):
    """Radii r > 0 with |r Au + v| = c along the ray."""
    a = float(np.dot(Au, Au))
    b = 2.0 * float(np.dot(Au, v))
    return [r for r in quadratic_roots(a, b, float(np.dot(v, v)) - c * c) if r > 0.0]


def ray_breaks_coord(Au_i, v_i, c):
    """Radii r > 0 with (r Au + v)_i = c along the ray."""
    if abs(Au_i) < 1e-300:
        return []
    r = (c - v_i) / Au_i
    return [r] if r > 0.0 else []


def ray_breaks_switch(Au, v, s):
    """Radii r > 0 with |r Au + v| = s r (density-switch cone)."""
    a = float(np.dot(Au, Au)) - s * s
    b = 2.0 * float(np.dot(Au, v))
    return [r for r in quadratic_roots(a, b, float(np.dot(v, v))) if r > 0.0]


def _segments(r_lo, r_hi, breaks):
    pts = [r_lo]
    for b in sorted(breaks):
        if r_lo + _QUAD_EPS * (1 + r_lo) < b < (r_hi if math.isfinite(r_hi) else math.inf):
            if b - pts[-1] > _QUAD_EPS * (1.0 + b):
                pts.append(b)
    if math.isfinite(r_hi):
        if r_hi - pts[-1] > _QUAD_EPS * (1.0 + r_hi):
            pts.append(r_hi)
        elif len(pts) == 1:
            return []
    else:
        pts.append(math.inf)
    return list(zip(pts[:-1], pts[1:]))


def _fixed_panel_nodes(a, b, n_sub, n_nodes):
    """Composite GL nodes/weights on [a,b]; log-spaced when the span allows."""
    xg, wg = leggauss(n_nodes)
    if a > 0.0 and b / a > 4.0:
        ta, tb = math.log(a), math.log(b)
        edges = np.linspace(ta, tb, n_sub + 1)
        mid = 0.5 * (edges[:-1] + edges[1:])
        half = 0.5 * (edges[1:] - edges[:-1])
        t = (mid[:, None] + half[:, None] * xg[None, :]).ravel()
        r = np.exp(t)
        w = (half[:, None] * wg[None, :]).ravel() * r  # dr = r dt
    else:
        edges = np.linspace(a, b, n_sub + 1)
        mid = 0.5 * (edges[:-1] + edges[1:])
        half = 0.5 * (edges[1:] - edges[:-1])
        r = (mid[:, None] + half[:, None] * xg[None, :]).ravel()
        w = (half[:, None] * wg[None, :]).ravel()
    return r, w


class RayIntegrator:
    """Integrates z-space functions over the annulus r_lo < |z| < r_hi."""

    def __init__(self, dim, opts=QuadOptions()):
        self.dim = dim
        self.opts = opts
        self.dirs, self.dir_w = angular_rule(dim, opts)

    def integrate(self, point_fn, r_lo, r_hi, breaks_fn=None, batch_fn=None):
        """Return (value, residual_estimate).

        ``point_fn(z)`` evaluates the integrand at a single point z (shape
        (d,)); ``breaks_fn(u)`` returns the positive kink radii along the ray
        with direction u.  ``batch_fn(Z)`` (vectorised over rows) is required
        by the fixed-resolution mode and used in preference when given.
        """
        if r_hi <= r_lo:
            return 0.0, 0.0
        if self.opts.fixed is not None:
            return self._integrate_fixed(point_fn, batch_fn, r_lo, r_hi, breaks_fn)
        return self._integrate_adaptive(point_fn, r_lo, r_hi, breaks_fn)

    def _integrate_adaptive(self, point_fn, r_lo, r_hi, breaks_fn):
        dm1 = self.dim - 1
        total = 0.0
        resid = 0.0
        for u, wu in zip(self.dirs, self.dir_w):
            breaks = breaks_fn(u) if breaks_fn is not None else []

            def f(r, _u=u):
                return point_fn(r * _u) * r**dm1

            for a, b in _segments(r_lo, r_hi, breaks):
                val, err = quad(
                    f,
                    a,
                    b,
                    limit=self.opts.quad_limit,
                    epsabs=self.opts.epsabs,
                    epsrel=self.opts.epsrel,
                )
                total += wu * val
                resid += wu * err
        return total, resid

    def _integrate_fixed(self, point_fn, batch_fn, r_lo, r_hi, breaks_fn):
        if not math.isfinite(r_hi):
            raise QuadratureError("fixed-resolution mode needs a finite outer radius")
        if batch_fn is None:
            batch_fn = lambda Z: np.array([point_fn(z) for z in Z])
        dm1 = self.dim - 1
        n_sub = self.opts.fixed
        rows = []
        weights = []
        for u, wu in zip(self.dirs, self.dir_w):
            breaks = breaks_fn(u) if breaks_fn is not None else []
            for a, b in _segments(r_lo, r_hi, breaks):
                r, w = _fixed_panel_nodes(a, b, n_sub, self.opts.fixed_nodes)
                rows.append(r[:, None] * u[None, :])
                weights.append(wu * w * r**dm1)
        if not rows:
            return 0.0, 0.0
        Z = np.concatenate(rows, axis=0)
        W = np.concatenate(weights)
        vals = np.asarray(batch_fn(Z), dtype=float)
        return float(np.dot(W, vals)), 0.0

    def check_residual(self, value, residual, what):
        tol = 1e-6 * (1.0 + abs(value))
        if residual > tol:
            raise QuadratureError(
                f"quadrature for {what} did not converge "
                f"(value={value:.6g}, residual={residual:.3g})",
                residual=residual,
            )
