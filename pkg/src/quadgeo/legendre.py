"""Discrete Legendre maps: contact lifts, focal frames, conjugate data.

A LegendreGrid stores the two lightlike focal fields (l, s) of a line
congruence in the quadric over a rectangular chart: per node, f = l ^ s is a
null 2-plane, the contact (Legendre) condition <dl, s> = <ds, l> = 0 holds up
to finite-difference error, and in focal normalization the u-lines kill l and
the v-lines kill s modulo f (l_u, s_v in span{l, s}).

Two lifts produce such grids: the sphere-geometric lift of a Euclidean
surface with its curvature spheres l = nu + kappa1 phi, s = nu + kappa2 phi
into the (4,2) space, and the line-geometric lift l = f ^ f_u, s = f ^ f_v of
a projective surface in asymptotic coordinates into the (3,3) space.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from . import pseudo_linalg as pl
from .errors import (
    IllConditionedFrameError,
    NotAsymptoticChartError,
    NotImmersedError,
    UmbilicError,
)
from .grids import GridChart, d_u, d_v, interior
from .surfaces import EUCLIDEAN3, PROJECTIVE3, SurfaceGrid, umbilic_mask

# Lie basis index order: (v_-1, v_0, v_1, v_2, v_3, v_inf)
V_MINUS, V_ZERO, V_INF = 0, 1, 5


@dataclass
class LegendreGrid:
    """Focal frame (l, s) of a discrete Legendre map."""

    space: pl.PseudoSpace
    l: np.ndarray
    s: np.ndarray
    chart: GridChart
    phi: np.ndarray = None
    nu_sphere: np.ndarray = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        shape = (self.chart.nu, self.chart.nv, 6)
        if self.l.shape != shape or self.s.shape != shape:
            raise ValueError("focal fields must have shape (nu, nv, 6)")


@dataclass
class ConjugateCoefficients:
    """Conjugate-net coefficients: l_u = * l + p s and s_v = q l + * s."""

    p: np.ndarray
    q: np.ndarray
    residual_u: np.ndarray
    residual_v: np.ndarray


def _npair(space, x, y):
    return np.einsum("...i,ij,...j->...", x, space.gram, y)


def _enorm(x):
    return np.linalg.norm(x, axis=-1)


def smooth_phase(fld):
    """Align per-node phases (signs, in the real case) across the grid.

    Works column by column from the center so the field can be finite
    differenced; input must span a smooth line field.
    """
    out = np.array(fld, dtype=complex)
    n, m = out.shape[:2]
    jc = m // 2

    def align(x, ref):
        inner = np.einsum("...k,...k->...", x, ref.conj())
        phase = inner / np.maximum(np.abs(inner), 1e-300)
        return x * phase.conj()[..., None]

    for i in range(1, n):
        out[i, jc] = align(out[i, jc], out[i - 1, jc])
    for j in range(jc + 1, m):
        out[:, j] = align(out[:, j], out[:, j - 1])
    for j in range(jc - 1, -1, -1):
        out[:, j] = align(out[:, j], out[:, j + 1])
    if np.max(np.abs(out.imag)) < 1e-9 * np.max(np.abs(out.real)):
        out = out.real.astype(complex)
    return out


# ---------------------------------------------------------------------------
# lifts


def lie_lift(surface, umbilic_rtol=1e-6):
    """Contact lift of a Euclidean surface by its curvature spheres.

    Builds phi = v_0 + f + f^2 v_inf (stereographic point sphere) and
    nu = v_-1 + n + 2 n.f v_inf (tangent plane), then l = nu + kappa1 phi and
    s = nu + kappa2 phi on a curvature-line chart.
    """
    if surface.geometry != EUCLIDEAN3 or not surface.has_kappa():
        raise ValueError("lie_lift needs a Euclidean surface with kappa fields")
    umb = umbilic_mask(surface.kappa1, surface.kappa2, umbilic_rtol)
    if umb.any():
        raise UmbilicError("umbilic nodes in the lift domain",
                           nodes=[tuple(ij) for ij in np.argwhere(umb)])
    f = surface.points.astype(float)
    n = surface.normal.astype(float)
    shape = f.shape[:2]
    phi = np.zeros(shape + (6,), dtype=complex)
    phi[..., V_ZERO] = 1.0
    phi[..., 2:5] = f
    phi[..., V_INF] = np.einsum("...k,...k->...", f, f)
    nu = np.zeros(shape + (6,), dtype=complex)
    nu[..., V_MINUS] = 1.0
    nu[..., 2:5] = n
    nu[..., V_INF] = 2.0 * np.einsum("...k,...k->...", n, f)
    l = nu + surface.kappa1[..., None] * phi
    s = nu + surface.kappa2[..., None] * phi
    return LegendreGrid(pl.lie_space(), l, s, surface.chart, phi=phi, nu_sphere=nu,
                        meta=dict(surface.meta))


def proj_lift(surface, chart_tol=5e-2):
    """Contact lift of a projective surface in asymptotic coordinates.

    l = f ^ f_u and s = f ^ f_v via the Plucker embedding.  Raises
    NotAsymptoticChartError when the focal normalization fails beyond
    `chart_tol` (the chart is not asymptotic).
    """
    if surface.geometry != PROJECTIVE3:
        raise ValueError("proj_lift needs a projective surface")
    f = surface.points.astype(complex)
    fu = d_u(f, surface.chart)
    fv = d_v(f, surface.chart)
    rank_scale = np.linalg.svd(np.stack([f, fu, fv], axis=-2), compute_uv=False)
    if np.min(interior(rank_scale[..., 2] / rank_scale[..., 0])) < 1e-10:
        raise NotImmersedError("projective surface is not immersed on the chart")
    l = pl.plucker_embed(f, fu)
    s = pl.plucker_embed(f, fv)
    grid = LegendreGrid(pl.plucker_space(), l, s, surface.chart, meta=dict(surface.meta))
    rep = validate(grid)
    if rep["focal_max"] > chart_tol:
        raise NotAsymptoticChartError(
            f"focal residual {rep['focal_max']:.2e} exceeds {chart_tol:.1e}: "
            "chart is not asymptotic"
        )
    return grid


# ---------------------------------------------------------------------------
# residuals / validation


def validate(grid):
    """Invariant residuals of a LegendreGrid, normalized by global scales.

    nullity: |<l,l>|, |<s,s>|, |<l,s>| against |l||s|;
    legendre: |<l_u, s>| (and counterparts) against sup |l_u| |s|;
    focal: components of l_u, s_v outside span{l, s} against sup |l_u|, |s_v|.
    Interior (2-node margin) maxima are reported as *_max.
    """
    sp, ch = grid.space, grid.chart
    l, s = grid.l, grid.s
    el, es = _enorm(l), _enorm(s)
    null_f = np.maximum(
        np.abs(_npair(sp, l, l)) / (el * el),
        np.maximum(np.abs(_npair(sp, s, s)) / (es * es),
                   np.abs(_npair(sp, l, s)) / (el * es)),
    )
    lu, lv = d_u(l, ch), d_v(l, ch)
    su, sv = d_u(s, ch), d_v(s, ch)
    scale_d = max(np.max(interior(_enorm(lu))), np.max(interior(_enorm(sv))),
                  np.max(interior(_enorm(lv))), np.max(interior(_enorm(su))))
    scale_f = max(np.max(interior(el)), np.max(interior(es)))
    leg_f = np.maximum.reduce([
        np.abs(_npair(sp, lu, s)), np.abs(_npair(sp, lv, s)),
        np.abs(_npair(sp, su, l)), np.abs(_npair(sp, sv, l)),
    ]) / (scale_d * scale_f)

    def off_span(w):
        basis = np.stack([l, s], axis=-1)
        coef = np.linalg.pinv(basis) @ w[..., None]
        return _enorm(w - (basis @ coef)[..., 0])

    foc_f = np.maximum(off_span(lu), off_span(sv)) / scale_d
    return {
        "nullity": null_f,
        "legendre": leg_f,
        "focal": foc_f,
        "nullity_max": float(np.max(interior(null_f))),
        "legendre_max": float(np.max(interior(leg_f))),
        "focal_max": float(np.max(interior(foc_f))),
    }


def legendre_residual(grid):
    """Per-node contact defect (the 'legendre' field of `validate`)."""
    return validate(grid)["legendre"]


# ---------------------------------------------------------------------------
# focal frames and conjugate data


def _hom_matrices(grid):
    """Per-node 2x2 matrices of f_u, f_v : f -> fperp/f in an auxiliary basis.

    Returns (M_u, M_v) with columns = images of (l, s) modulo f expressed in a
    Euclidean-orthonormal complement basis (c, d) of f inside fperp.
    """
    sp, ch = grid.space, grid.chart
    a, b = grid.l, grid.s
    ga = np.einsum("ij,...j->...i", sp.gram, a)
    gb = np.einsum("ij,...j->...i", sp.gram, b)
    rows = np.stack([ga, gb], axis=-2)
    _, svals, vt = np.linalg.svd(rows)
    if np.min(svals[..., 1] / svals[..., 0]) < 1e-12:
        raise NotImmersedError("focal fields are parallel")
    perp = vt[..., 2:6, :].conj()  # 4 null-space vectors spanning fperp
    # complement of span{a,b} inside fperp (Euclidean orthogonal projection)
    ab = np.stack([a, b], axis=-1)
    p_ab = ab @ np.linalg.pinv(ab)
    proj = perp - (p_ab @ perp.swapaxes(-1, -2)).swapaxes(-1, -2)
    _, _, pv = np.linalg.svd(proj)
    cd = pv[..., 0:2, :]  # rows span the complement

    au, bu = d_u(a, ch), d_u(b, ch)
    av, bv = d_v(a, ch), d_v(b, ch)
    basis = np.concatenate([ab, cd.swapaxes(-1, -2)], axis=-1)  # 6x4
    pinv = np.linalg.pinv(basis)

    def hom(w1, w2):
        x1 = (pinv @ w1[..., None])[..., 0]
        x2 = (pinv @ w2[..., None])[..., 0]
        return np.stack([x1[..., 2:4], x2[..., 2:4]], axis=-1)

    return hom(au, bu), hom(av, bv)


def focal_frame(grid):
    """Re-gauge an arbitrary null frame of a Legendre map to focal form.

    Per node, the kernel directions of the 2x2 matrices of f_u and f_v (a
    generalized null-vector problem) give l and s; phases are smoothed across
    the grid so the output can be finite differenced.
    """
    mu, mv = _hom_matrices(grid)
    scale = max(float(np.max(np.abs(mu))), float(np.max(np.abs(mv))))
    if scale < 1e-14:
        raise NotImmersedError("df vanishes: constant Legendre map")

    def kernel_coeff(m):
        _, svals, vt = np.linalg.svd(m)
        # a 2-dimensional kernel means the whole 2x2 map vanishes
        if np.min(svals[..., 0]) < 1e-10 * scale:
            raise NotImmersedError("two-dimensional kernel: map is not immersed")
        return vt[..., 1, :].conj()

    cl = kernel_coeff(mu)
    cs = kernel_coeff(mv)
    l = cl[..., 0:1] * grid.l + cl[..., 1:2] * grid.s
    s = cs[..., 0:1] * grid.l + cs[..., 1:2] * grid.s
    out = replace(grid, l=smooth_phase(l), s=smooth_phase(s))
    out.meta = dict(grid.meta)
    return out


def conjugate_coefficients(grid, cond_limit=1e8):
    """Least-squares conjugate coefficients p, q of a focal-normalized grid."""
    ch = grid.chart
    basis = np.stack([grid.l, grid.s], axis=-1)
    svals = np.linalg.svd(basis, compute_uv=False)
    if np.max(svals[..., 0] / svals[..., 1]) > cond_limit:
        raise IllConditionedFrameError("(l, s) basis is numerically dependent")
    pinv = np.linalg.pinv(basis)
    lu = d_u(grid.l, ch)
    sv = d_v(grid.s, ch)
    xu = (pinv @ lu[..., None])[..., 0]
    xv = (pinv @ sv[..., None])[..., 0]
    ru = _enorm(lu - (basis @ xu[..., None])[..., 0])
    rv = _enorm(sv - (basis @ xv[..., None])[..., 0])
    scale = max(np.max(interior(_enorm(lu))), np.max(interior(_enorm(sv))), 1e-300)
    p, q = xu[..., 1], xv[..., 0]
    if ch.reality == "real" and max(np.max(np.abs(p.imag)), np.max(np.abs(q.imag))) < 1e-9 * (
        1.0 + np.max(np.abs(p)) + np.max(np.abs(q))
    ):
        p, q = p.real, q.real
    return ConjugateCoefficients(p, q, ru / scale, rv / scale)


def conformal_structure(grid):
    """Per-node quadratic form of the induced conformal structure.

    Returns (coeffs, signature, null_defect): coeffs[..., :] = (A, B, C) with
    q(z_u, z_v) = A z_u^2 + 2 B z_u z_v + C z_v^2 in the chart directions,
    a per-node signature code ('(1,1)', '(2,0)' or 'degenerate'), and the
    relative size of the diagonal terms (coordinate-null check).
    """
    mu, mv = _hom_matrices(grid)
    det = lambda m: m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]
    a = det(mu)
    c = det(mv)
    b = 0.5 * (det(mu + mv) - a - c)
    coeffs = np.stack([a, b, c], axis=-1)
    scale = np.maximum(np.abs(b), np.maximum(np.abs(a), np.abs(c))) + 1e-300
    null_defect = np.maximum(np.abs(a), np.abs(c)) / scale
    if grid.chart.reality == "real":
        disc = (a * c - b * b).real
        sig = np.where(disc < -1e-12 * scale**2, "(1,1)",
                       np.where(disc > 1e-12 * scale**2, "(2,0)", "degenerate"))
    else:
        # real tangent directions have z_v = conj(z_u); definite iff |B| > |A|
        gap = np.abs(b) - np.abs(a)
        sig = np.where(gap > 1e-12 * scale, "(2,0)",
                       np.where(gap < -1e-12 * scale, "(1,1)", "degenerate"))
    return coeffs, sig, null_defect


# ---------------------------------------------------------------------------
# point-surface recovery and group action


def point_surface(grid, singular_rtol=1e-8):
    """Recover the classical surface enveloped by a Legendre grid.

    (3,3): per node the planes of l and s intersect in the homogeneous point.
    (4,2): the point sphere in span{l, s} (vanishing v_-1 coefficient) is
    de-stereographed to R^3; nodes where the Euclidean projection degenerates
    are flagged (NaN points + meta['singular_nodes']), not fatal.
    """
    if grid.space == pl.plucker_space():
        L = pl.bivector_matrix(grid.l)
        S = pl.bivector_matrix(grid.s)
        ul, _, _ = np.linalg.svd(L)
        us, _, _ = np.linalg.svd(S)
        stack = np.concatenate([ul[..., :, 0:2], -us[..., :, 0:2]], axis=-1)
        _, svals, vt = np.linalg.svd(stack)
        coef = vt[..., 3, :].conj()
        f = (ul[..., :, 0:2] @ coef[..., 0:2, None])[..., 0]
        # fix phase so the point is real where it can be
        pivot = np.take_along_axis(f, np.argmax(np.abs(f), axis=-1)[..., None], -1)[..., 0]
        f = f * (np.abs(pivot) / pivot)[..., None]
        if np.max(np.abs(f.imag)) < 1e-7 * np.max(np.abs(f.real)):
            f = f.real.astype(complex)
        f = smooth_phase(f)
        degenerate = svals[..., 3] > 1e-6 * svals[..., 0]
        pts = f.real / np.maximum(_enorm(f.real), 1e-300)[..., None]
        out = SurfaceGrid(PROJECTIVE3, pts, grid.chart, meta=dict(grid.meta))
        out.meta["singular_nodes"] = [tuple(ij) for ij in np.argwhere(degenerate)]
        return out

    # (4,2): point sphere = s_-1 * l - l_-1 * s has no v_-1 component
    w = grid.s[..., V_MINUS, None] * grid.l - grid.l[..., V_MINUS, None] * grid.s
    denom = w[..., V_ZERO]
    bad = np.abs(denom) < singular_rtol * _enorm(w)
    denom_safe = np.where(bad, 1.0, denom)
    phi = w / denom_safe[..., None]
    pts = phi[..., 2:5].real
    pts[bad] = np.nan
    # curvature sphere data: l / l_-1 = nu + kappa1 phi fixes kappa and nu
    lm = np.where(np.abs(grid.l[..., V_MINUS]) < 1e-300, 1.0, grid.l[..., V_MINUS])
    sm = np.where(np.abs(grid.s[..., V_MINUS]) < 1e-300, 1.0, grid.s[..., V_MINUS])
    k1 = (grid.l[..., V_ZERO] / lm).real
    k2 = (grid.s[..., V_ZERO] / sm).real
    nu_rec = grid.l / lm[..., None] - k1[..., None] * phi
    n_unnorm = nu_rec[..., 2:5].real
    normal = n_unnorm / np.maximum(_enorm(n_unnorm), 1e-300)[..., None]
    out = SurfaceGrid(EUCLIDEAN3, pts, grid.chart, normal=normal,
                      kappa1=k1, kappa2=k2, meta=dict(grid.meta))
    out.meta["singular_nodes"] = [tuple(ij) for ij in np.argwhere(bad)]
    return out


def apply_group(grid, g, tol=1e-10):
    """Transform the focal frame by a pairing-preserving 6x6 map."""
    pl.check_group_element(g, grid.space, tol)
    g = np.asarray(g, dtype=complex)
    mapped = {
        name: None if getattr(grid, name) is None
        else np.einsum("ij,...j->...i", g, getattr(grid, name))
        for name in ("l", "s", "phi", "nu_sphere")
    }
    out = replace(grid, **mapped)
    out.meta = dict(grid.meta)
    return out
