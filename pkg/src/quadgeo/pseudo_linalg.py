"""Indefinite linear algebra on six-dimensional space.

Signature-(m,n) pairings with m+n=6, the light cone, the bivector (Plucker)
embedding of planes in R^4, the Klein correspondence, and the Hodge star of a
quadric form.  Two standard spaces are used throughout:

* ``plucker_space()`` -- Lambda^2 R^4 with <v,w> = vol(v ^ w), signature (3,3).
  Fixed bivector basis order: (e12, e13, e14, e23, e24, e34); vol is the unit
  determinant form, which makes the Gram anti-diagonal with entries
  (1, -1, 1, 1, -1, 1).
* ``lie_space()`` -- signature (4,2) with basis (v_-1, v_0, v_1, v_2, v_3,
  v_inf): v_1..v_3 orthonormal spacelike, v_-1 timelike, and (v_0, v_inf)
  isotropic with <v_0, v_inf> = -1/2.

Vectors are plain complex ndarrays of shape (..., 6); a thin `SixVector`
wrapper is provided where a space reference / reality flag is worth carrying.
All arithmetic is complex internally; reality is an assertion, not a
representation choice.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateInputError,
    DegenerateSubspaceError,
    GroupElementError,
    NotAQuadricStarError,
    NotDecomposableError,
    SpaceMismatchError,
)

DECOMPOSABILITY_RTOL = 1e-8

# index pairs of the fixed Lambda^2 R^4 basis
_BIVECTOR_PAIRS = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))


@dataclass(frozen=True)
class PseudoSpace:
    """A signature-(m,n) symmetric pairing on 6-dimensional space."""

    m: int
    n: int
    gram: np.ndarray
    name: str = ""

    def __post_init__(self):
        g = np.asarray(self.gram, dtype=float)
        if g.shape != (6, 6) or not np.allclose(g, g.T, atol=1e-12):
            raise ValueError("gram must be a symmetric 6x6 matrix")
        if self.m + self.n != 6:
            raise ValueError("m + n must be 6")
        evals = np.linalg.eigvalsh(g)
        if np.any(np.abs(evals) < 1e-12):
            raise ValueError("gram must be invertible")
        if (int((evals > 0).sum()), int((evals < 0).sum())) != (self.m, self.n):
            raise ValueError("gram eigenvalue signs do not match (m, n)")
        if (self.m, self.n) not in ((4, 2), (3, 3)):
            raise ValueError("supported signatures are (4,2) and (3,3)")
        object.__setattr__(self, "gram", g)

    def pair(self, x, y):
        """Bilinear pairing x^T gram y, batched over leading axes."""
        x = np.asarray(x)
        y = np.asarray(y)
        return np.einsum("...i,ij,...j->...", x, self.gram, y)

    def norm2(self, x):
        return self.pair(x, x)

    def adjoint(self, a):
        """Pairing adjoint of an operator: a* = gram^-1 a^T gram  (no conjugation)."""
        gi = np.linalg.inv(self.gram)
        return gi @ np.swapaxes(np.asarray(a), -1, -2) @ self.gram

    def __eq__(self, other):
        return (
            isinstance(other, PseudoSpace)
            and (self.m, self.n) == (other.m, other.n)
            and np.array_equal(self.gram, other.gram)
        )

    def __hash__(self):
        return hash((self.m, self.n, self.gram.tobytes()))


def plucker_space():
    g = np.zeros((6, 6))
    for k, s in enumerate((1.0, -1.0, 1.0)):
        g[k, 5 - k] = s
        g[5 - k, k] = s
    return PseudoSpace(3, 3, g, name="plucker(3,3)")


def lie_space():
    g = np.zeros((6, 6))
    g[0, 0] = -1.0          # v_-1 timelike
    g[1, 5] = g[5, 1] = -0.5  # <v_0, v_inf> = -1/2
    g[2, 2] = g[3, 3] = g[4, 4] = 1.0
    return PseudoSpace(4, 2, g, name="lie(4,2)")


@dataclass(frozen=True)
class SixVector:
    """A vector with a space reference and a reality flag."""

    components: np.ndarray
    space: PseudoSpace
    reality: str = "complex"

    def __post_init__(self):
        c = np.asarray(self.components, dtype=complex)
        if c.shape != (6,):
            raise ValueError("SixVector needs exactly 6 components")
        if self.reality == "real" and np.max(np.abs(c.imag)) > 1e-10 * (1 + np.max(np.abs(c))):
            raise ValueError("reality flag is 'real' but components have imaginary parts")
        object.__setattr__(self, "components", c)


def _components(x):
    return x.components if isinstance(x, SixVector) else np.asarray(x, dtype=complex)


def pair(x, y, space=None):
    """Evaluate the pairing of two six-vectors.

    Accepts SixVector (space taken/checked from the operands) or bare arrays
    with an explicit `space`.
    """
    spaces = [v.space for v in (x, y) if isinstance(v, SixVector)]
    if space is not None:
        spaces.append(space)
    if not spaces:
        raise SpaceMismatchError("no PseudoSpace given")
    for s in spaces[1:]:
        if s != spaces[0]:
            raise SpaceMismatchError("operands reference different spaces")
    return spaces[0].pair(_components(x), _components(y))


def plucker_embed(x, y):
    """Bivector x ^ y of two 4-vectors in the fixed (3,3) basis.

    Batched over leading axes.  Raises DegenerateInputError for (single)
    parallel inputs.
    """
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    out = np.empty(x.shape[:-1] + (6,), dtype=complex)
    for k, (i, j) in enumerate(_BIVECTOR_PAIRS):
        out[..., k] = x[..., i] * y[..., j] - x[..., j] * y[..., i]
    if out.ndim == 1:
        scale = max(float(np.linalg.norm(x) * np.linalg.norm(y)), 1e-300)
        if np.linalg.norm(out) <= 1e-12 * scale:
            raise DegenerateInputError("x and y are parallel; x ^ y degenerates")
    return out


def is_decomposable(l, rtol=DECOMPOSABILITY_RTOL):
    l = _components(l)
    sp = plucker_space()
    return abs(sp.pair(l, l)) <= rtol * max(float(np.vdot(l, l).real), 1e-300)


def bivector_matrix(l):
    """Antisymmetric 4x4 matrix L with L[i,j] = l_{ij}; maps z to x(y.z)-y(x.z)."""
    l = _components(l)
    L = np.zeros(l.shape[:-1] + (4, 4), dtype=complex)
    for k, (i, j) in enumerate(_BIVECTOR_PAIRS):
        L[..., i, j] = l[..., k]
        L[..., j, i] = -l[..., k]
    return L


def klein_plane(l, rtol=DECOMPOSABILITY_RTOL):
    """Plane in R^4 (or C^4) corresponding to a decomposable bivector.

    Returns (x, y) spanning the plane with x ^ y proportional to l.  The plane
    is the column space of the antisymmetric matrix of l, extracted by SVD.
    """
    l = _components(l)
    sp = plucker_space()
    scale = max(float(np.vdot(l, l).real), 1e-300)
    if abs(sp.pair(l, l)) > rtol * scale:
        raise NotDecomposableError("<l,l> != 0 beyond tolerance: bivector is not decomposable")
    L = bivector_matrix(l)
    u, s, _ = np.linalg.svd(L)
    if s[1] <= 1e-10 * s[0]:
        raise NotDecomposableError("bivector has rank < 2")
    return u[:, 0], u[:, 1]


@dataclass(frozen=True)
class QuadricForm:
    """A nondegenerate symmetric pairing on R^4, determined up to scale."""

    q: np.ndarray
    vol_normalized: bool = False

    def __post_init__(self):
        q = np.asarray(self.q, dtype=float)
        if q.shape != (4, 4) or not np.allclose(q, q.T, atol=1e-10):
            raise ValueError("q must be a symmetric 4x4 matrix")
        d = np.linalg.det(q)
        if abs(d) < 1e-14:
            raise ValueError("q is degenerate")
        ev = np.linalg.eigvalsh(q)
        pos = int((ev > 0).sum())
        if pos not in (1, 2, 3):
            raise ValueError("quadric must have signature (2,2) or Lorentz")
        object.__setattr__(self, "q", q)

    @property
    def signature(self):
        ev = np.linalg.eigvalsh(self.q)
        return int((ev > 0).sum()), int((ev < 0).sum())

    def normalized(self):
        """Rescale so |det q| = 1 (vol_Q = vol)."""
        d = abs(np.linalg.det(self.q))
        return QuadricForm(self.q / d ** 0.25, vol_normalized=True)


def lambda2(a):
    """6x6 action of a 4x4 map on bivectors: (Lambda^2 a)(x^y) = ax ^ ay."""
    a = np.asarray(a)
    out = np.zeros((6, 6), dtype=np.result_type(a.dtype, float))
    for col, (i, j) in enumerate(_BIVECTOR_PAIRS):
        for row, (k, m) in enumerate(_BIVECTOR_PAIRS):
            out[row, col] = a[k, i] * a[m, j] - a[m, i] * a[k, j]
    return out


def hodge_star(quadric):
    """Hodge star of a quadric form: vol(v ^ star w) = Q(v, w) on bivectors.

    The input is normalized to unit |det| first, so star^2 = +1 for signature
    (2,2) and -1 for Lorentz Q.
    """
    qn = quadric if quadric.vol_normalized else quadric.normalized()
    g = plucker_space().gram  # involutive: g @ g = identity
    return g @ lambda2(qn.q)


def _null_directions(basis, gram_restricted, rng, count):
    """Null vectors of a complex symmetric 3x3 form, mapped back through basis."""
    out = []
    attempts = 0
    while len(out) < count and attempts < 40 * count:
        attempts += 1
        a = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        b = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        qa = a @ gram_restricted @ a
        qab = a @ gram_restricted @ b
        qb = b @ gram_restricted @ b
        if abs(qb) < 1e-12:
            continue
        disc = np.sqrt(qab * qab - qa * qb + 0j)
        for root in ((-qab + disc) / qb, (-qab - disc) / qb):
            w = a + root * b
            nrm = np.linalg.norm(w)
            if nrm > 1e-8:
                out.append((basis @ w) / nrm)
            if len(out) >= count:
                break
    if len(out) < count:
        raise NotAQuadricStarError("could not sample null directions on an eigenspace")
    return out


def star_to_quadric(star, tol=1e-8, seed=20260808):
    """Recover the quadric form (up to scale) from its bivector Hodge star.

    Uses the eigenvector characterization: null eigenvectors of the star are
    decomposable and their Klein planes are planes on which Q vanishes; three
    planes per ruling family give a linear system whose 1-dimensional kernel
    is Q.
    """
    star = np.asarray(star, dtype=complex)
    sp = plucker_space()
    g = sp.gram
    scale = max(float(np.linalg.norm(star)), 1e-300)
    if np.linalg.norm(g @ star.T @ g - star) > tol * scale:
        raise NotAQuadricStarError("endomorphism is not symmetric for the (3,3) pairing")
    sq = star @ star
    c = np.trace(sq) / 6.0
    if np.linalg.norm(sq - c * np.eye(6)) > tol * scale ** 2 or abs(abs(c) - 1.0) > 1e-6:
        raise NotAQuadricStarError("star^2 is not +-identity within tolerance")
    eps = 1.0 if c.real > 0 else 1.0j

    evals, evecs = np.linalg.eig(star)
    rng = np.random.default_rng(seed)
    rows = []
    for sign in (+1.0, -1.0):
        sel = np.abs(evals - sign * eps) < 1e-6 * max(1.0, abs(eps))
        if int(sel.sum()) != 3:
            raise NotAQuadricStarError("eigenvalue clusters are not 3+3")
        basis = evecs[:, sel]
        gram_r = basis.T @ g @ basis
        for w in _null_directions(basis, gram_r, rng, 3):
            x, y = klein_plane(w, rtol=1e-6)
            for u, v in ((x, x), (x, y), (y, y)):
                row = np.zeros(10, dtype=complex)
                k = 0
                for i in range(4):
                    for j in range(i, 4):
                        coef = u[i] * v[j] + u[j] * v[i]
                        row[k] = coef if i != j else coef / 2.0
                        k += 1
                rows.append(row)
    mat = np.vstack([np.vstack([r.real for r in rows]), np.vstack([r.imag for r in rows])])
    _, svals, vt = np.linalg.svd(mat)
    if svals[-2] < 1e-6 * svals[0]:
        raise NotAQuadricStarError("null-plane conditions do not determine a unique quadric")
    q10 = vt[-1]
    q = np.zeros((4, 4))
    k = 0
    for i in range(4):
        for j in range(i, 4):
            q[i, j] = q[j, i] = q10[k]
            k += 1
    quadric = QuadricForm(q).normalized()
    resid = np.linalg.norm(hodge_star(quadric) - star)
    if resid > 1e-6 * scale:
        if np.linalg.norm(hodge_star(quadric) + star) <= 1e-6 * scale:
            raise NotAQuadricStarError(
                "splitting is orientation-reversed: no quadric maps to it with the fixed volume form"
            )
        raise NotAQuadricStarError("recovered quadric does not reproduce the star")
    return quadric


def indefinite_orthogonalize(vectors, space, rtol=1e-10):
    """Basis of span(vectors) with diagonal Gram of entries +-1.

    Pivoting avoids division by near-null norms; a hyperbolic pair of null
    vectors is replaced by their sum before normalizing.  Raises
    DegenerateSubspaceError when the induced pairing degenerates.
    """
    work = [np.asarray(_components(v), dtype=complex).copy() for v in vectors]
    basis, signs = [], []
    for _ in range(len(work)):
        # subtract projections onto the accepted basis
        for v in work:
            for e, d in zip(basis, signs):
                v -= (space.pair(v, e) / d) * e
        scales = [max(float(np.vdot(v, v).real), 1e-300) for v in work]
        norms = [space.pair(v, v) for v in work]
        ratios = [abs(n) / s for n, s in zip(norms, scales)]
        best = int(np.argmax(ratios))
        cross_best, ci, cj = 0.0, -1, -1
        for i in range(len(work)):
            for j in range(i + 1, len(work)):
                r = abs(space.pair(work[i], work[j])) / np.sqrt(scales[i] * scales[j])
                if r > cross_best:
                    cross_best, ci, cj = r, i, j
        if ratios[best] >= max(rtol, 0.1 * cross_best):
            v = work.pop(best)
        elif cross_best >= rtol:
            v = work[ci] + work[cj] * np.sqrt(scales[ci] / scales[cj])
            work.pop(ci)
        else:
            raise DegenerateSubspaceError("induced pairing is degenerate on the span")
        n = space.pair(v, v)
        if abs(n) <= rtol * float(np.vdot(v, v).real):
            raise DegenerateSubspaceError("pivot degenerated during orthogonalization")
        if abs(n.imag) <= 1e-10 * abs(n):
            sign = 1.0 if n.real > 0 else -1.0
            v = v / np.sqrt(abs(n.real))
        else:
            sign = 1.0
            v = v / np.sqrt(n)
        # deterministic sign gauge: largest-magnitude component gets positive real part
        k = int(np.argmax(np.abs(v)))
        phase = v[k] / abs(v[k])
        if abs(phase.imag) < 1e-12:
            v = v * np.sign(phase.real)
        basis.append(v)
        signs.append(sign)
    return np.array(basis), np.array(signs)


def check_group_element(g, space, tol=1e-10):
    """Raise unless g^T gram g = gram within tolerance."""
    g = np.asarray(g)
    defect = np.linalg.norm(g.T @ space.gram @ g - space.gram)
    if defect > tol * np.linalg.norm(space.gram):
        raise GroupElementError(f"map does not preserve the pairing (defect {defect:.2e})")


def random_pseudo_orthogonal(space, rng, nsteps=8, amplitude=0.35):
    """Random element of O(m,n) from seeded Givens rotations and boosts."""
    evals, evecs = np.linalg.eigh(space.gram)
    order = np.argsort(-evals)
    evals, evecs = evals[order], evecs[:, order]
    t = evecs @ np.diag(np.abs(evals) ** -0.5)
    d = np.sign(evals)
    r = np.eye(6)
    for _ in range(nsteps):
        i, j = rng.choice(6, size=2, replace=False)
        th = amplitude * rng.standard_normal()
        block = np.eye(6)
        if d[i] * d[j] > 0:
            block[i, i] = block[j, j] = np.cos(th)
            block[i, j] = -np.sin(th)
            block[j, i] = np.sin(th)
        else:
            block[i, i] = block[j, j] = np.cosh(th)
            block[i, j] = block[j, i] = np.sinh(th)
        r = block @ r
    g = t @ r @ np.linalg.inv(t)
    return g


def random_unimodular(rng, amplitude=0.3):
    """Random A in SL(4,R) as the exponential of a traceless matrix."""
    import scipy.linalg

    x = amplitude * rng.standard_normal((4, 4))
    x -= np.trace(x) / 4.0 * np.eye(4)
    return scipy.linalg.expm(x)
