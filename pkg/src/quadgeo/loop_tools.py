"""Symmetric-space frame machinery for Gauss maps into the Grassmannian.

At a base splitting S_o the pairing-skew endomorphisms decompose as
k + p (commuting / anticommuting with the base reflection); a frame field F
moves the base splitting onto S(u, v).  Its discrete Maurer-Cartan form lives
on grid edges (alpha_edge = log(F_node^-1 F_neighbor)), splits into k- and
p-parts, and deforms into the spectral family

    alpha_lambda = alpha_k + lambda alpha_p' + lambda^-1 alpha_p''

whose flatness for all lambda characterizes harmonicity.  Flatness is
measured as the plaquette-holonomy curvature density; frames integrate back
from edge exponentials.  The duality between the (3,3) and (4,2) pictures
evaluates the family at lambda = +-i and re-reads the result in the real
basis of S_o + i S_o_perp.
"""

from dataclasses import dataclass, field

import numpy as np

from . import gauss_map as gm
from . import pseudo_linalg as pl
from .errors import NonHarmonicInputError, SignatureError
from .grids import GridChart, interior
from .matfun import expm, logm, orthogonality_defect, reproject_orthogonal


@dataclass
class SymmetricPair:
    """Symmetric decomposition of the pairing-skew algebra at a base splitting."""

    space: pl.PseudoSpace
    star_o: np.ndarray        # base reflection (6x6)
    basis_o: np.ndarray       # rows: orthonormalized basis of S_o then S_o_perp
    signs_o: np.ndarray       # their pairing norms +-1
    eps: complex

    def project_k(self, xi):
        inv = self.star_o @ xi @ self.star_o / (self.eps**2)
        return 0.5 * (xi + inv)

    def project_p(self, xi):
        inv = self.star_o @ xi @ self.star_o / (self.eps**2)
        return 0.5 * (xi - inv)


@dataclass
class FrameGrid:
    """Per-node pairing-orthogonal frames moving the base splitting to S."""

    space: pl.PseudoSpace
    chart: GridChart
    frames: np.ndarray        # (nu, nv, 6, 6)
    pair: SymmetricPair


@dataclass
class ConnectionGrid:
    """Edge-valued discrete Maurer-Cartan data, split by the decomposition.

    u-edge arrays have shape (nu-1, nv, 6, 6), v-edge arrays (nu, nv-1, 6, 6);
    the p'-part is supported on u-edges only and the p''-part on v-edges only.
    """

    space: pl.PseudoSpace
    chart: GridChart
    pair: SymmetricPair
    k_u: np.ndarray
    k_v: np.ndarray
    p_u: np.ndarray
    p_v: np.ndarray
    lam: complex = 1.0
    meta: dict = field(default_factory=dict)

    def edge_u(self):
        return self.k_u + self.p_u

    def edge_v(self):
        return self.k_v + self.p_v


def is_skew(xi, space, tol=1e-8):
    adj = space.adjoint(xi)
    return np.linalg.norm(adj + xi) <= tol * max(np.linalg.norm(xi), 1e-300)


def symmetric_split(xi, pair):
    """Split a pairing-skew endomorphism into commuting and anticommuting parts."""
    xi = np.asarray(xi, dtype=complex)
    if not is_skew(xi, pair.space):
        raise ValueError("element is not skew for the pairing")
    return pair.project_k(xi), pair.project_p(xi)


def _gram_schmidt_rows(rows, signs, gram):
    """Strict pairing Gram-Schmidt keeping a prescribed sign pattern."""
    out = np.empty_like(rows)
    for k in range(rows.shape[0]):
        v = rows[k]
        for m in range(k):
            v = v - (np.einsum("i,ij,j->", v, gram, out[m]) / signs[m]) * out[m]
        n = np.einsum("i,ij,j->", v, gram, v)
        if abs(n.imag) <= 1e-8 * abs(n):
            if n.real * signs[k] <= 0:
                raise SignatureError("sign pattern broke during orthonormalization")
            v = v / np.sqrt(abs(n.real))
        else:
            v = v / np.sqrt(n)
        out[k] = v
    return out


def make_pair(gauss, node=None):
    """Symmetric pair at the splitting of a (seed) node of a Gauss map.

    The joint base basis is pushed through the exact projection P (the raw
    spanning families are only O(h^2)-orthogonal across the splitting), so
    the frames built on it stay in the orthogonal group to roundoff.
    """
    ch = gauss.chart
    node = (ch.nu // 2, ch.nv // 2) if node is None else node
    bs, ds, bp, dp = gm.orthonormal_bases(gauss)
    signs = np.concatenate([ds[node], dp[node]], axis=0).real
    g = gauss.space.gram
    p = gauss.proj[node]
    rows_s = (p @ bs[node].T).T
    rows_p = ((np.eye(6) - p) @ bp[node].T).T
    basis = np.concatenate(
        [_gram_schmidt_rows(rows_s, signs[0:3], g),
         _gram_schmidt_rows(rows_p, signs[3:6], g)],
        axis=0,
    )
    return SymmetricPair(
        space=gauss.space,
        star_o=gauss.star[node].copy(),
        basis_o=basis,
        signs_o=signs,
        eps=gauss.eps,
    )


def frame(gauss, pair=None):
    """Smooth frame field F with F S_o = S(node) and F pairing-orthogonal.

    Per node, F maps the base's orthonormal joint basis to one of
    S + S_perp; smoothness comes from seeding each node's basis with a
    neighbor's and re-orthonormalizing the projections (minimal-rotation
    propagation from the grid center), so there are no gauge jumps.
    """
    pair = pair if pair is not None else make_pair(gauss)
    sp = gauss.space
    g = sp.gram
    nu, nv = gauss.chart.nu, gauss.chart.nv
    ic, jc = nu // 2, nv // 2
    proj_s = gauss.proj
    proj_p = np.eye(6) - gauss.proj
    signs = pair.signs_o
    bases = np.empty((nu, nv, 6, 6), dtype=complex)

    def node_basis(i, j, seed_rows):
        rows_s = np.einsum("ab,kb->ka", proj_s[i, j], seed_rows[0:3])
        rows_p = np.einsum("ab,kb->ka", proj_p[i, j], seed_rows[3:6])
        return np.concatenate(
            [_gram_schmidt_rows(rows_s, signs[0:3], g),
             _gram_schmidt_rows(rows_p, signs[3:6], g)],
            axis=0,
        )

    bases[ic, jc] = node_basis(ic, jc, pair.basis_o)
    for i in range(ic + 1, nu):
        bases[i, jc] = node_basis(i, jc, bases[i - 1, jc])
    for i in range(ic - 1, -1, -1):
        bases[i, jc] = node_basis(i, jc, bases[i + 1, jc])
    for j in range(jc + 1, nv):
        for i in range(nu):
            bases[i, j] = node_basis(i, j, bases[i, j - 1])
    for j in range(jc - 1, -1, -1):
        for i in range(nu):
            bases[i, j] = node_basis(i, j, bases[i, j + 1])

    base_cols_inv = np.linalg.inv(pair.basis_o.T)
    frames = bases.swapaxes(-1, -2) @ base_cols_inv[None, None]
    frames = reproject_orthogonal(frames, g)
    if gauss.chart.reality == "real" and np.max(np.abs(frames.imag)) < 1e-8:
        frames = frames.real.astype(complex)
    return FrameGrid(space=sp, chart=gauss.chart, frames=frames, pair=pair)


def maurer_cartan(framegrid):
    """Edge logarithms of the frame transition, split by the decomposition."""
    f = framegrid.frames
    pair = framegrid.pair
    trans_u = np.linalg.solve(f[:-1], np.eye(6)) @ f[1:]
    trans_v = np.linalg.solve(f[:, :-1], np.eye(6)) @ f[:, 1:]
    a_u = logm(trans_u)
    a_v = logm(trans_v)
    # re-project to the skew algebra (kills roundoff drift)
    g = framegrid.space.gram
    ginv = np.linalg.inv(g)
    a_u = 0.5 * (a_u - ginv @ a_u.swapaxes(-1, -2) @ g)
    a_v = 0.5 * (a_v - ginv @ a_v.swapaxes(-1, -2) @ g)
    return ConnectionGrid(
        space=framegrid.space,
        chart=framegrid.chart,
        pair=pair,
        k_u=pair.project_k(a_u),
        k_v=pair.project_k(a_v),
        p_u=pair.project_p(a_u),
        p_v=pair.project_p(a_v),
    )


def structure_identity_residual(gauss, framegrid, alpha):
    """Residual of F alpha_p'(d/du) F^-1 = S_u - S_u* (and the v counterpart).

    Edge values are node-centered by averaging adjacent edges; the identity
    holds to O(h).
    """
    su, sv = gm.dS(gauss)
    f = framegrid.frames
    hu, hv = gauss.chart.hu, gauss.chart.hv

    def residual(p_edges, h, hom, axis):
        if axis == 0:
            mid = 0.5 * (p_edges[:-1] + p_edges[1:]) / h
            fc = f[1:-1]
            target = hom.op - hom.adjoint_op()
            tgt = target[1:-1]
        else:
            mid = 0.5 * (p_edges[:, :-1] + p_edges[:, 1:]) / h
            fc = f[:, 1:-1]
            target = hom.op - hom.adjoint_op()
            tgt = target[:, 1:-1]
        conj = fc @ mid @ np.linalg.inv(fc)
        num = np.linalg.norm(conj - tgt, axis=(-2, -1))
        den = np.maximum(np.linalg.norm(tgt, axis=(-2, -1)).max(), 1e-300)
        return num / den

    return residual(alpha.p_u, hu, su, 0), residual(alpha.p_v, hv, sv, 1)


def spectral_connection(alpha, lam):
    """The loop-family member alpha_k + lambda alpha_p' + lambda^-1 alpha_p''."""
    if lam == 0:
        raise ValueError("lambda must be nonzero")
    return ConnectionGrid(
        space=alpha.space,
        chart=alpha.chart,
        pair=alpha.pair,
        k_u=alpha.k_u.copy(),
        k_v=alpha.k_v.copy(),
        p_u=lam * alpha.p_u,
        p_v=alpha.p_v / lam,
        lam=lam,
    )


def flatness_residual(alpha):
    """Per-plaquette curvature density |log holonomy| / (hu hv).

    The holonomy multiplies the four exponentiated edge values around each
    cell; the connection is flat iff the density vanishes with refinement.
    """
    eu = expm(alpha.edge_u())
    ev = expm(alpha.edge_v())
    hol = (
        eu[:, :-1]
        @ ev[1:]
        @ np.linalg.inv(eu[:, 1:])
        @ np.linalg.inv(ev[:-1])
    )
    lg = logm(hol)
    return np.linalg.norm(lg, axis=(-2, -1)) / (alpha.chart.hu * alpha.chart.hv)


def integrate_frame(alpha, f0=None, seed=None):
    """Integrate F^-1 dF = alpha by edge exponentials from a seed node.

    Propagates along the seed row first, then along columns; the consistency
    scalar is the largest mismatch of the unused edge transitions against the
    integrated frames (zero iff the discrete connection is exactly flat).
    Frames are re-projected to the pairing-orthogonal group at every node.
    """
    nu, nv = alpha.chart.nu, alpha.chart.nv
    ic, jc = (nu // 2, nv // 2) if seed is None else seed
    eu = expm(alpha.edge_u())
    ev = expm(alpha.edge_v())
    g = alpha.space.gram
    frames = np.empty((nu, nv, 6, 6), dtype=complex)
    frames[ic, jc] = np.eye(6) if f0 is None else f0
    for i in range(ic + 1, nu):
        frames[i, jc] = reproject_orthogonal(frames[i - 1, jc] @ eu[i - 1, jc], g)
    for i in range(ic - 1, -1, -1):
        frames[i, jc] = reproject_orthogonal(
            frames[i + 1, jc] @ np.linalg.inv(eu[i, jc]), g
        )
    for j in range(jc + 1, nv):
        frames[:, j] = reproject_orthogonal(frames[:, j - 1] @ ev[:, j - 1], g)
    for j in range(jc - 1, -1, -1):
        frames[:, j] = reproject_orthogonal(
            frames[:, j + 1] @ np.linalg.inv(ev[:, j]), g
        )
    # consistency: u-edges off the seed row were not used in propagation
    mismatch = frames[:-1] @ eu - frames[1:]
    scale = np.maximum(np.linalg.norm(frames[1:], axis=(-2, -1)), 1e-300)
    consistency = float(np.max(np.linalg.norm(mismatch, axis=(-2, -1)) / scale))
    out = FrameGrid(space=alpha.space, chart=alpha.chart, frames=frames, pair=alpha.pair)
    return out, consistency


def gauss_from_frame(framegrid, reference_gauss=None):
    """Gauss map S(node) = F(node) S_o from a frame field."""
    pair = framegrid.pair
    f = framegrid.frames
    finv = np.linalg.inv(f)
    star = f @ pair.star_o @ finv
    proj = 0.5 * (star / pair.eps + np.eye(6))
    rows = pair.basis_o[0:3]
    span_s = (f @ rows.T[None, None]).swapaxes(-1, -2)
    rows_p = pair.basis_o[3:6]
    span_p = (f @ rows_p.T[None, None]).swapaxes(-1, -2)
    sig = "(1,1)" if pair.eps == 1.0 else "(2,0)"
    degenerate = np.zeros(f.shape[:2], dtype=bool)
    return gm.GaussMapGrid(
        space=framegrid.space, chart=framegrid.chart, span_s=span_s, span_p=span_p,
        proj=proj, star=star, eps=pair.eps, signature_z=sig, degenerate=degenerate,
        source=reference_gauss.source if reference_gauss is not None else None,
    )


def harmonicity_ratio(alpha, lam_test=2.0):
    """Flatness of the spectral family at a test lambda against lambda = 1.

    Harmonic maps have the whole family flat; the ratio (test residual over
    the lambda=1 discretization floor) is the scale-free harmonicity witness.
    """
    base = flatness_residual(spectral_connection(alpha, 1.0))
    test = flatness_residual(spectral_connection(alpha, lam_test))
    b = float(np.max(interior(base, 1))) if min(base.shape) > 2 else float(np.max(base))
    t = float(np.max(interior(test, 1))) if min(test.shape) > 2 else float(np.max(test))
    return t, b


def spectral_deform(gauss, lam, harmonic_factor=10.0, floor=1e-6):
    """Associated-family deformation S -> S_lambda of a harmonic Gauss map.

    Frames the map, deforms its Maurer-Cartan form to alpha_lambda, and
    integrates back; admissible lambda are real for (1,1) charts and
    unimodular for (2,0) charts.  Raises NonHarmonicInputError when the
    spectral family is measurably non-flat (test residual at lambda=2 beyond
    `harmonic_factor` times the lambda=1 discretization floor).
    """
    if gauss.signature_z == "(1,1)":
        if abs(complex(lam).imag) > 1e-12:
            raise ValueError("lambda must be real for a (1,1) chart")
    elif abs(abs(complex(lam)) - 1.0) > 1e-12:
        raise ValueError("lambda must be unimodular for a (2,0) chart")
    pair = make_pair(gauss)
    fr = frame(gauss, pair)
    alpha = maurer_cartan(fr)
    test, base = harmonicity_ratio(alpha)
    if test > max(harmonic_factor * base, floor):
        raise NonHarmonicInputError(
            f"flatness at lambda=2 is {test:.2e} vs {base:.2e} at lambda=1: "
            "input Gauss map is not harmonic"
        )
    ic, jc = gauss.chart.nu // 2, gauss.chart.nv // 2
    deformed, consistency = integrate_frame(
        spectral_connection(alpha, lam), f0=fr.frames[ic, jc]
    )
    out = gauss_from_frame(deformed, gauss)
    out.meta["lambda"] = complex(lam)
    out.meta["integration_consistency"] = consistency
    return out


def blaschke_condition_residual(alpha):
    """Norm of alpha_p'(du) o alpha_p'(du) restricted to S_o (per u-edge).

    The envelope condition of the deformed family in connection form; scaled
    by the squared p'-norm.
    """
    rows = alpha.pair.basis_o[0:3]
    comp = alpha.p_u @ alpha.p_u @ rows.T[None, None]
    num = np.linalg.norm(comp, axis=(-2, -1))
    norms = np.linalg.norm(alpha.p_u, axis=(-2, -1))
    # a vanishing p-part satisfies the condition vacuously
    tiny = norms < 1e-10 * (1.0 + float(norms.max()))
    return np.where(tiny, 0.0, num / np.maximum(norms**2, 1e-300))


def dualize(gauss, branch=None):
    """Swap between Gauss maps in the (3,3) and (4,2) pictures.

    Implements the symmetric-space duality k + p -> k + i p on a real-chart
    harmonic map: the spectral family is evaluated at lambda = branch
    (+i from (3,3), -i from (4,2) by convention; the inverse uses the other
    sign), re-expressed in the real basis (S_o basis, i S_o_perp basis) of
    the dual space, and integrated to a frame and Gauss map there.  The dual
    is defined up to a constant isometry (the frame seed is the identity).
    """
    if gauss.chart.reality != "real" or gauss.signature_z != "(1,1)":
        raise SignatureError("duality needs a real (1,1) chart")
    if branch is None:
        branch = 1.0j if gauss.space.m == 3 else -1.0j
    pair = make_pair(gauss)
    fr = frame(gauss, pair)
    alpha = maurer_cartan(fr)
    lam = complex(branch)
    a_u = alpha.k_u + lam * alpha.p_u
    a_v = alpha.k_v + alpha.p_v / lam
    # change of basis: rows (S_o basis, i S_o_perp basis) span the dual real form
    c = np.concatenate([pair.basis_o[0:3], 1.0j * pair.basis_o[3:6]], axis=0).T
    cinv = np.linalg.inv(c)
    b_u = cinv @ a_u @ c
    b_v = cinv @ a_v @ c
    im = max(float(np.max(np.abs(b_u.imag))), float(np.max(np.abs(b_v.imag))))
    scale = max(float(np.max(np.abs(b_u))), float(np.max(np.abs(b_v))), 1e-300)
    # dual pairing: the complexified gram restricted to the new real span
    gram_d = (c.T @ gauss.space.gram @ c).real
    gram_d = np.diag(np.diag(gram_d))  # diagonal by orthonormality of basis_o
    m_pos = int((np.diag(gram_d) > 0).sum())
    space_d = pl.PseudoSpace(m_pos, 6 - m_pos, gram_d)
    star_d = np.diag(np.concatenate([np.ones(3), -np.ones(3)]))
    pair_d = SymmetricPair(
        space=space_d, star_o=star_d, basis_o=np.eye(6),
        signs_o=np.sign(np.diag(gram_d)), eps=1.0,
    )
    alpha_d = ConnectionGrid(
        space=space_d, chart=alpha.chart, pair=pair_d,
        k_u=pair_d.project_k(b_u), k_v=pair_d.project_k(b_v),
        p_u=pair_d.project_p(b_u), p_v=pair_d.project_p(b_v),
    )
    alpha_d.meta["imaginary_defect"] = im / scale
    fr_d, consistency = integrate_frame(alpha_d)
    out = gauss_from_frame(fr_d)
    out.meta["dual_branch"] = lam
    out.meta["imaginary_defect"] = im / scale
    out.meta["integration_consistency"] = consistency
    # columns express the dual coordinates in the source coordinates
    out.meta["basis_map"] = c
    return out
