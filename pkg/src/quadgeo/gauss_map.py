"""The conformal Gauss map of a Legendre grid and its harmonic-map analysis.

Per node, S = span{l, l_v, l_vv} is a 3-dimensional subspace with
nondegenerate induced pairing, orthogonal to span{s, s_u, s_uu}; the pair
(S, S_perp) is encoded by the pairing-orthogonal projection P onto S and the
reflection star = eps (2P - 1) with star^2 = eps^2 (eps = 1 on real charts,
i on complex-conjugate charts, where conj(S) = S_perp).

Derivatives of S are computed gauge-free from the projection field:
S_u = P_perp (d_u P) P as a 6x6 operator annihilating S_perp, which equals
the Hom(S, S_perp)-valued derivative on S.  The tension field is the
covariant derivative tau = P_perp d_u(S_v) P (with the Codazzi-equivalent
P_perp d_v(S_u) P reported as a cross-check); the Grassmannian metric is
<A, B> = -tr(B* A) with the pairing adjoint B* = G^-1 B^T G.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateReconstructionError
from .grids import GridChart, d_u, d_v, d_uu, d_vv, interior
from .legendre import LegendreGrid, smooth_phase
from . import pseudo_linalg as pl

DENSITY_MARGIN = 2
TENSION_MARGIN = 3


@dataclass
class GaussMapGrid:
    """Per-node splitting C^6 = S + S_perp with its reflection endomorphism."""

    space: pl.PseudoSpace
    chart: GridChart
    span_s: np.ndarray        # (nu, nv, 3, 6) smooth spanning fields l, l_v, l_vv
    span_p: np.ndarray        # (nu, nv, 3, 6) smooth spanning fields s, s_u, s_uu
    proj: np.ndarray          # (nu, nv, 6, 6) pairing-orthogonal projection onto S
    star: np.ndarray          # (nu, nv, 6, 6)
    eps: complex
    signature_z: str
    degenerate: np.ndarray    # (nu, nv) bool
    source: LegendreGrid = None
    meta: dict = field(default_factory=dict)
    basis_s: np.ndarray = None    # (nu, nv, 3, 6) pairing-orthonormal rows of S
    signs_s: np.ndarray = None
    basis_p: np.ndarray = None
    signs_p: np.ndarray = None

    @property
    def proj_perp(self):
        return np.eye(6) - self.proj


@dataclass
class TangentHom:
    """A Hom(S, S_perp)-valued field in its 6x6 operator representation."""

    op: np.ndarray            # (nu, nv, 6, 6), equals P_perp op P
    gauss: GaussMapGrid

    def adjoint_op(self):
        g = self.gauss.space.gram
        return np.linalg.inv(g) @ self.op.swapaxes(-1, -2) @ g

    def coeff(self):
        """3x3 coefficient array: stored S-basis to stored S_perp-basis."""
        return _coeff_array(self.gauss, self.op)

    def norm(self):
        """Per-node Frobenius norm of the operator."""
        return np.linalg.norm(self.op, axis=(-2, -1))


@dataclass
class TensionField:
    """Tension field tau_S with its Codazzi cross-check."""

    hom: TangentHom
    alt: TangentHom           # the Codazzi-equivalent expression
    norm: np.ndarray
    codazzi_diff: np.ndarray


def _pair_rows(space, rows_a, rows_b):
    """Cross Gram of two (..., 3, 6) row stacks."""
    return np.einsum("...ik,kl,...jl->...ij", rows_a, space.gram, rows_b)


def conformal_gauss(grid, degenerate_rtol=1e-8):
    """Conformal Gauss map S = span{l, l_v, l_vv} of a focal-normalized grid.

    Nodes where the induced pairing on the span degenerates are flagged and
    their splitting filled from the nearest valid neighbor (the congruence of
    a Dupin patch continues smoothly); flagged nodes are excluded from
    tension/reconstruction statistics downstream.
    """
    sp, ch = grid.space, grid.chart
    l, s = grid.l, grid.s
    span_s = np.stack([l, d_v(l, ch), d_vv(l, ch)], axis=-2)
    span_p = np.stack([s, d_u(s, ch), d_uu(s, ch)], axis=-2)
    # note: no Euclidean rescaling of the sections anywhere downstream; the
    # orthonormal bases are built from pairing quantities alone, so the whole
    # discrete pipeline commutes with pairing-orthogonal maps to roundoff
    gram_s = _pair_rows(sp, span_s, span_s)
    scale = np.linalg.norm(span_s, axis=-1) ** 2
    scale3 = scale[..., 0] * scale[..., 1] * scale[..., 2]
    degenerate = np.abs(np.linalg.det(gram_s)) < degenerate_rtol * np.maximum(scale3, 1e-300)
    b6 = span_s.swapaxes(-1, -2)  # columns
    gram_inv = np.linalg.inv(np.where(degenerate[..., None, None], np.eye(3), gram_s))
    proj = b6 @ gram_inv @ b6.swapaxes(-1, -2) @ sp.gram
    if degenerate.any():
        proj = _fill_from_neighbors(proj, degenerate)
    eps = 1.0 if ch.reality == "real" else 1.0j
    star = eps * (2.0 * proj - np.eye(6))
    with np.errstate(all="ignore"):
        basis_s, signs_s = _structured_orthobasis(sp, span_s)
        basis_p, signs_p = _structured_orthobasis(sp, span_p)
    if degenerate.any():
        basis_s = _fill_from_neighbors(basis_s, degenerate)
        basis_p = _fill_from_neighbors(basis_p, degenerate)
        signs_s = _fill_from_neighbors(signs_s, degenerate)
        signs_p = _fill_from_neighbors(signs_p, degenerate)
    return GaussMapGrid(
        space=sp, chart=ch, span_s=span_s, span_p=span_p, proj=proj, star=star,
        eps=eps, signature_z="(1,1)" if ch.reality == "real" else "(2,0)",
        degenerate=degenerate, source=grid, meta=dict(grid.meta),
        basis_s=basis_s, signs_s=signs_s, basis_p=basis_p, signs_p=signs_p,
    )


def _fill_from_neighbors(fld, mask):
    """Replace flagged nodes by limiting continuation from valid neighbors."""
    out = np.array(fld)
    todo = np.array(mask)
    while todo.any():
        progress = False
        for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            shifted = np.roll(~todo, (di, dj), axis=(0, 1))
            # roll wraps around; mask out the wrapped layer
            if di == 1:
                shifted[0, :] = False
            if di == -1:
                shifted[-1, :] = False
            if dj == 1:
                shifted[:, 0] = False
            if dj == -1:
                shifted[:, -1] = False
            take = todo & shifted
            if take.any():
                src = np.roll(out, (di, dj), axis=(0, 1))
                out[take] = src[take]
                todo[take] = False
                progress = True
        if not progress:
            break
    return out


def orthogonality_residual(gauss):
    """Per-node norm of the cross Gram of (l, l_v, l_vv) against (s, s_u, s_uu).

    Normalized by the product of the largest row scales; vanishes for a
    genuine conformal Gauss map.
    """
    cross = _pair_rows(gauss.space, gauss.span_s, gauss.span_p)
    sa = np.max(np.linalg.norm(gauss.span_s, axis=-1), axis=-1)
    sb = np.max(np.linalg.norm(gauss.span_p, axis=-1), axis=-1)
    return np.linalg.norm(cross, axis=(-2, -1)) / np.maximum(sa * sb, 1e-300)


def _structured_orthobasis(space, rows):
    """Closed-form orthonormalization of a (l, l_v, l_vv)-structured span.

    The first row is null and pairing-orthogonal to the second, so the middle
    vector normalizes directly and the outer pair is hyperbolic.  Spans that
    are already orthonormal (frame-produced Gauss maps) pass through.
    Returns (basis rows, signs) with diagonal Gram = signs = +-1.
    """
    gram = _pair_rows(space, rows, rows)
    diag = np.einsum("...kk->...k", gram)
    off = gram - diag[..., None] * np.eye(3)
    if (
        np.max(np.abs(off)) < 1e-10
        and np.max(np.abs(np.abs(diag) - 1.0)) < 1e-10
    ):
        return rows.copy(), diag.real.round()
    a, b, c = rows[..., 0, :], rows[..., 1, :], rows[..., 2, :]
    n = np.einsum("...i,ij,...j->...", b, space.gram, b)
    real_n = np.abs(n.imag) <= 1e-10 * np.abs(n)
    d2 = np.where(real_n, np.sign(n.real), 1.0)
    denom = np.where(real_n, np.sqrt(np.abs(n)).astype(complex), np.sqrt(n + 0j))
    e2 = b / denom[..., None]
    inner = np.einsum("...i,ij,...j->...", c, space.gram, e2) / d2
    w = c - inner[..., None] * e2
    beta = np.einsum("...i,ij,...j->...", a, space.gram, w)
    p = a / beta[..., None]
    m = np.einsum("...i,ij,...j->...", w, space.gram, w)
    x = w - 0.5 * m[..., None] * p
    e3 = (p + x) / np.sqrt(2.0)   # norm +1
    e1 = (p - x) / np.sqrt(2.0)   # norm -1
    basis = np.stack([e1, e2, e3], axis=-2)
    signs = np.stack([-np.ones_like(d2), d2, np.ones_like(d2)], axis=-1)
    return basis, signs


def orthonormal_bases(gauss):
    """Stored (or on-demand) orthonormal bases of S and S_perp."""
    if gauss.basis_s is None:
        gauss.basis_s, gauss.signs_s = _structured_orthobasis(gauss.space, gauss.span_s)
        gauss.basis_p, gauss.signs_p = _structured_orthobasis(gauss.space, gauss.span_p)
    return gauss.basis_s, gauss.signs_s, gauss.basis_p, gauss.signs_p


def _coeff_array(gauss, op):
    """Coefficients of a Hom(S, S_perp) operator in the orthonormal bases."""
    bs, ds, bp, dp = orthonormal_bases(gauss)
    img = np.einsum("...op,...kp->...ko", op, bs)  # op applied to S-basis rows
    return np.einsum("...jl,lo,...ko,...j->...jk", bp, gauss.space.gram, img, 1.0 / dp)


def dS(gauss):
    """Derivative of S as a pair of Hom(S, S_perp) fields (S_u, S_v).

    Computed from the smooth spanning sections: (S_u) sigma = perp-projection
    of d_u sigma.  Differentiating the section fields rather than the
    projection field avoids a 1/h amplification of the Gram conditioning
    noise, which otherwise floors the conformality residual on fine grids.
    """
    sp = gauss.space
    g = sp.gram
    b_s, d_s_, b_p, d_p_ = orthonormal_bases(gauss)
    # sigma -> S-coordinates extractor (diagonal Gram, condition 1)
    coords_s = (b_s @ g) / d_s_[..., None]
    out = []
    for deriv in (d_u, d_v):
        w = deriv(b_s, gauss.chart)                   # derivatives of sections
        coeff = np.einsum("...ik,kl,...jl->...ij", b_p, g, w) / d_p_[..., None]
        op = np.einsum("...ki,...kj,...jl->...il", b_p, coeff, coords_s)
        out.append(TangentHom(op, gauss))
    return tuple(out)


def grassmann_pair(a, b):
    """Grassmannian metric <A, B> = -tr(B* A) (pairing adjoint, no conjugation)."""
    if a.gauss is not b.gauss:
        raise ValueError("tangent vectors live at different Gauss maps")
    g = a.gauss.space.gram
    ginv = np.linalg.inv(g)
    return -np.einsum("...ij,...ji->...", ginv @ b.op.swapaxes(-1, -2) @ g, a.op)


def willmore_density(gauss, ds_pair=None):
    """Per-node <S_u, S_v>; equals the conjugate-coefficient product p q."""
    su, sv = ds_pair if ds_pair is not None else dS(gauss)
    rho = grassmann_pair(su, sv)
    if gauss.chart.reality == "real":
        return rho.real
    return rho


def conformality_residual(gauss, ds_pair=None):
    """Per-node max of |<S_u,S_u>| and |<S_v,S_v>| (zero for conformal S)."""
    su, sv = ds_pair if ds_pair is not None else dS(gauss)
    return np.maximum(np.abs(grassmann_pair(su, su)), np.abs(grassmann_pair(sv, sv)))


def tension(gauss):
    """Tension field tau = nabla-perp_u S_v - S_v nabla_u, with Codazzi check.

    Both expressions are assembled gauge-free from the projection field
    (the covariant derivative of a Hom(S, S_perp) tensor A extended by zero
    is P_perp (dA) P, and S_v = P_perp (d_v P) P); their difference vanishes
    with the discretization by the Codazzi identity.
    """
    pp = gauss.proj_perp
    du_op = pp @ d_u(gauss.proj, gauss.chart) @ gauss.proj
    dv_op = pp @ d_v(gauss.proj, gauss.chart) @ gauss.proj
    tau = pp @ d_u(dv_op, gauss.chart) @ gauss.proj
    alt = pp @ d_v(du_op, gauss.chart) @ gauss.proj
    hom = TangentHom(tau, gauss)
    hom_alt = TangentHom(alt, gauss)
    diff = np.linalg.norm(tau - alt, axis=(-2, -1))
    return TensionField(hom=hom, alt=hom_alt, norm=hom.norm(), codazzi_diff=diff)


def image_direction(op):
    """Dominant image direction (unit 6-vector) of a near-rank-one operator."""
    u, svals, _ = np.linalg.svd(op)
    return u[..., :, 0], svals


def line_angle(x, y):
    """Angle between complex lines spanned by x and y (Hermitian)."""
    num = np.abs(np.einsum("...k,...k->...", x, y.conj()))
    den = np.linalg.norm(x, axis=-1) * np.linalg.norm(y, axis=-1)
    return np.arccos(np.clip(num / np.maximum(den, 1e-300), 0.0, 1.0))


def tension_image_angle(gauss, tension_field):
    """Per-node angle between im(tau_S) and span{s} (the focal field)."""
    img, _ = image_direction(tension_field.hom.op)
    return line_angle(img, gauss.span_p[..., 0, :])


def tension_kernel_residual(gauss, tension_field):
    """Action of tau_S on l and l_v (a basis of l-perp within S), normalized."""
    tau = tension_field.hom.op
    act_l = np.linalg.norm((tau @ gauss.span_s[..., 0, :, None])[..., 0], axis=-1)
    act_lv = np.linalg.norm((tau @ gauss.span_s[..., 1, :, None])[..., 0], axis=-1)
    scale = np.maximum(
        tension_field.norm * np.linalg.norm(gauss.span_s[..., 0:2, :], axis=-1).max(-1),
        1e-300,
    )
    return np.maximum(act_l, act_lv) / scale


def blaschke_residual(gauss, ds_pair=None):
    """Per-node spectral norms of S_u* S_u and S_v S_v* (the envelope conditions)."""
    su, sv = ds_pair if ds_pair is not None else dS(gauss)
    r1 = np.linalg.norm(su.adjoint_op() @ su.op, ord=2, axis=(-2, -1))
    r2 = np.linalg.norm(sv.op @ sv.adjoint_op(), ord=2, axis=(-2, -1))
    return r1, r2


def envelope_degeneracy(gauss, rtol=1e-3, ds_pair=None):
    """Classify nodes by which envelope conditions hold with u, v swapped.

    generic: only the defining conditions; godeaux_rozet_u / _v: one swapped
    condition also holds; demoulin: both (vacuously for constant S).
    """
    su, sv = ds_pair if ds_pair is not None else dS(gauss)
    swap_u = np.linalg.norm(su.op @ su.adjoint_op(), ord=2, axis=(-2, -1))
    swap_v = np.linalg.norm(sv.adjoint_op() @ sv.op, ord=2, axis=(-2, -1))
    scale = np.maximum(
        np.linalg.norm(su.op, ord=2, axis=(-2, -1)) ** 2,
        np.linalg.norm(sv.op, ord=2, axis=(-2, -1)) ** 2,
    )
    floor = rtol * np.max(scale) + 1e-14
    u_holds = swap_u <= np.maximum(rtol * scale, floor)
    v_holds = swap_v <= np.maximum(rtol * scale, floor)
    out = np.full(u_holds.shape, "generic", dtype="<U16")
    out[u_holds & ~v_holds] = "godeaux_rozet_u"
    out[v_holds & ~u_holds] = "godeaux_rozet_v"
    out[u_holds & v_holds] = "demoulin"
    return out


def reconstruct(gauss, degenerate_rtol=1e-6):
    """Recover the Legendre map from its conformal Gauss map.

    Extracts span{s} = im S_u and span{l} = im S_v* by dominant-direction
    extraction and returns the focal-normalized grid.  Raises
    DegenerateReconstructionError when <S_u, S_v> vanishes (constant or
    degenerate focal surfaces).
    """
    su, sv = dS(gauss)
    density = np.abs(grassmann_pair(su, sv))
    scale_u = np.linalg.norm(su.op, ord=2, axis=(-2, -1))
    scale_v = np.linalg.norm(sv.op, ord=2, axis=(-2, -1))
    margin = DENSITY_MARGIN
    den = interior(scale_u * scale_v, margin)
    if np.max(den) < 1e-10 * np.max(interior(np.linalg.norm(gauss.proj, axis=(-2, -1)), margin)):
        raise DegenerateReconstructionError(
            "a partial derivative of S vanishes (constant or channel-type congruence)"
        )
    if np.median(interior(density, margin) / np.maximum(den, 1e-300)) < degenerate_rtol:
        raise DegenerateReconstructionError("<S_u, S_v> ~ 0: focal surfaces degenerate")
    s_dir, svals_u = image_direction(su.op)
    l_dir, svals_v = image_direction(sv.adjoint_op())
    rank_gap = min(
        float(np.min(interior(svals_u[..., 0] / np.maximum(svals_u[..., 1], 1e-300), margin))),
        float(np.min(interior(svals_v[..., 0] / np.maximum(svals_v[..., 1], 1e-300), margin))),
    )
    l = smooth_phase(l_dir)
    s = smooth_phase(s_dir)
    out = LegendreGrid(gauss.space, l, s, gauss.chart, meta=dict(gauss.meta))
    out.meta["reconstruction_rank_gap"] = rank_gap
    return out
