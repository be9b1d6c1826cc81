"""Banded complex linear algebra and the estimators built on top of it.

Everything here is deterministic: iterative methods start from vectors drawn
from a caller-supplied seed, and eigenvalue sweeps use fixed shift layouts.
"""

import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.linalg import lapack

from .errors import (DegenerateFit, DegenerateWeight, NoConvergence, Singular,
                     UnmatchedResonance, WindowTouchesRays)
from .operators import (DiscretizedOperator, DistortionProfile, RaySet,
                        discretize_plain, distorted_operator, essential_rays,
                        ray_tube_classifier)

_TRANS_CODE = {"N": 0, "T": 1, "C": 2}


class BandedLU:
    """LU factorization of a banded complex matrix via LAPACK zgbtrf/zgbtrs."""

    def __init__(self, matrix, kl=None, ku=None):
        A = matrix.tocoo() if sp.issparse(matrix) else sp.coo_matrix(matrix)
        if A.shape[0] != A.shape[1]:
            raise ValueError("matrix must be square")
        self.n = A.shape[0]
        off = A.col - A.row
        if kl is None:
            kl = int(max(0, -off.min())) if off.size else 0
        if ku is None:
            ku = int(max(0, off.max())) if off.size else 0
        self.kl, self.ku = kl, ku
        ab = np.zeros((2 * kl + ku + 1, self.n), dtype=complex, order="F")
        ab[kl + ku + A.row - A.col, A.col] = A.data
        lu, ipiv, info = lapack.zgbtrf(ab, kl, ku)
        if info > 0:
            raise Singular(f"exact pivot breakdown at row {info - 1}")
        if info < 0:
            raise ValueError(f"zgbtrf: illegal argument {-info}")
        self._lu = lu
        self._ipiv = ipiv

    @classmethod
    def from_operator(cls, op: DiscretizedOperator, shift=0.0):
        mat = op.matrix
        if shift != 0.0:
            mat = mat - shift * sp.eye(mat.shape[0], dtype=complex, format="csr")
        return cls(mat, kl=op.bandwidth, ku=op.bandwidth)

    def solve(self, b, trans="N"):
        x, info = lapack.zgbtrs(self._lu, self.kl, self.ku,
                                np.asarray(b, dtype=complex), self._ipiv,
                                trans=_TRANS_CODE[trans])
        if info != 0:
            raise Singular(f"zgbtrs failed with info = {info}")
        return x


def banded_factor(matrix, kl=None, ku=None):
    """Factorization handle for a square banded complex matrix."""
    return BandedLU(matrix, kl=kl, ku=ku)


# ---------------------------------------------------------------------------
# extreme singular values by power iteration
# ---------------------------------------------------------------------------

def _start_vector(size, seed):
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(size) + 1j * rng.standard_normal(size)
    return v / np.linalg.norm(v)


def extreme_singular(apply_fwd, apply_adj, size, which="largest",
                     tol=1e-10, max_iter=5000, seed=11):
    """Largest or smallest singular value of an operator given by callables.

    which="largest": power iteration on A*A with apply_fwd = A, apply_adj = A*.
    which="smallest": power iteration on (A*A)^{-1}; pass the two solve
    callbacks instead (apply_fwd = A^{-1}., apply_adj = A^{-*}.).
    Deterministic for a fixed seed.  Raises NoConvergence after max_iter.
    """
    if which not in ("largest", "smallest"):
        raise ValueError("which must be 'largest' or 'smallest'")
    x = _start_vector(size, seed)
    rho_prev, streak = None, 0
    for _ in range(max_iter):
        y = apply_fwd(apply_adj(x)) if which == "smallest" else apply_adj(apply_fwd(x))
        rho = float(np.real(np.vdot(x, y)))
        ny = np.linalg.norm(y)
        if ny == 0.0:
            raise Singular("operator annihilated the iterate")
        x = y / ny
        if rho_prev is not None and abs(rho - rho_prev) <= tol * abs(rho):
            streak += 1
            if streak >= 3:
                sigma = np.sqrt(rho)
                return float(sigma if which == "largest" else 1.0 / sigma)
        else:
            streak = 0
        rho_prev = rho
    gap = abs(rho - rho_prev) / abs(rho) if rho_prev else None
    sigma = np.sqrt(abs(rho))
    raise NoConvergence(
        f"power iteration did not reach tol={tol} in {max_iter} iterations",
        last_value=float(sigma if which == "largest" else 1.0 / sigma),
        gap_estimate=gap)


def extreme_singular_matrix(A, which="largest", tol=1e-10, max_iter=5000, seed=11):
    """extreme_singular for an explicit (sparse or dense) matrix."""
    if which == "largest":
        Ac = A.conj().T if sp.issparse(A) else np.conj(A.T)
        return extreme_singular(lambda v: A @ v, lambda v: Ac @ v, A.shape[0],
                                which="largest", tol=tol, max_iter=max_iter, seed=seed)
    lu = BandedLU(A) if sp.issparse(A) else BandedLU(sp.csr_matrix(A))
    return extreme_singular(lambda v: lu.solve(v, trans="N"),
                            lambda v: lu.solve(v, trans="C"),
                            A.shape[0], which="smallest",
                            tol=tol, max_iter=max_iter, seed=seed)


# ---------------------------------------------------------------------------
# weighted resolvent norms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ResolventQuery:
    """One weighted-resolvent-norm evaluation.

    method="absorption" solves with the plain operator at E + i*side*eps;
    method="distortion" uses the complex-scaled operator at eps = 0 (the
    limiting value is already attained off the real continuum).  r0 = None
    means global weights, otherwise both sides are cut off to {r >= r0}.
    """
    E: float
    eps: float
    s: float
    h: float
    r0: Optional[float] = None
    method: str = "absorption"
    side: int = +1
    tol: float = 1e-8
    max_iter: int = 5000
    seed: int = 11

    def __post_init__(self):
        if self.s <= 0.5:
            raise DegenerateWeight("weighted norms need s > 1/2")
        if self.method not in ("absorption", "distortion"):
            raise ValueError("method must be 'absorption' or 'distortion'")
        if self.eps < 0:
            raise ValueError("eps must be >= 0")


def weighted_resolvent_norm(V, grid, query, d=1, ell=0, profile=None):
    """|| <r>^{-s} X (P - z)^{-1} X <r>^{-s} || as a largest singular value.

    X is the sharp cutoff to {r >= r0} (identity when r0 is None) and P is
    the plain (absorption) or distorted (distortion) operator.  Solves run
    through the banded LU of (P - z); Singular propagates when z hits a
    discrete eigenvalue exactly.
    """
    r = grid.nodes
    w = (1.0 + r**2) ** (-query.s / 2.0)
    if query.r0 is not None:
        w = np.where(r >= query.r0, w, 0.0)
    wvec = np.repeat(w, V.dim)

    if query.method == "absorption":
        op = discretize_plain(V, query.h, grid, d=d, ell=ell)
    else:
        if profile is None:
            raise ValueError("method='distortion' needs a DistortionProfile")
        op = distorted_operator(V, query.h, grid, profile, d=d, ell=ell)
    z = query.E + 1j * query.side * query.eps
    lu = BandedLU.from_operator(op, shift=z)

    def fwd(v):
        return wvec * lu.solve(wvec * v, trans="N")

    def adj(v):
        return wvec * lu.solve(wvec * v, trans="C")

    return extreme_singular(fwd, adj, wvec.size, which="largest",
                            tol=query.tol, max_iter=query.max_iter,
                            seed=query.seed)


# ---------------------------------------------------------------------------
# eigenvalues in a complex window
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Window:
    """Closed rectangle in the lower half plane."""
    re_min: float
    re_max: float
    im_min: float
    im_max: float = 0.0

    def __post_init__(self):
        if self.re_min >= self.re_max or self.im_min >= self.im_max + 1e-300:
            if self.im_min > self.im_max:
                raise ValueError("im_min must not exceed im_max")
        if self.im_max > 0.0:
            raise ValueError("window must lie in {Im z <= 0}")

    def contains(self, z):
        return (self.re_min <= z.real <= self.re_max
                and self.im_min <= z.imag <= self.im_max)

    @property
    def diagonal(self):
        return np.hypot(self.re_max - self.re_min, self.im_max - self.im_min)

    def boundary_points(self, per_edge=16):
        ts = np.linspace(0.0, 1.0, per_edge)
        out = []
        for a, b in [((self.re_min, self.im_min), (self.re_max, self.im_min)),
                     ((self.re_max, self.im_min), (self.re_max, self.im_max)),
                     ((self.re_max, self.im_max), (self.re_min, self.im_max)),
                     ((self.re_min, self.im_max), (self.re_min, self.im_min))]:
            out.extend(complex(a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]))
                       for t in ts)
        return out


@dataclass
class Resonance:
    """Eigenvalue of a distorted operator with its residual certificate."""
    z: complex
    theta: float
    residual: float
    tag: str = "candidate_resonance"
    stability_deviation: Optional[float] = None


def _dedupe(pairs, radius):
    out = []
    for z, u in sorted(pairs, key=lambda p: (p[0].real, p[0].imag)):
        if all(abs(z - w) > radius for w, _ in out):
            out.append((z, u))
    return out


def eigs_in_window(op, window, tol=1e-8, rays=None, tube_half_width=0.0,
                   dense_threshold=3000, seed=7, shift_grid=(8, 5),
                   k_per_shift=8):
    """All eigenvalues of a distorted operator inside a complex window.

    Dense nonsymmetric eigensolve up to dense_threshold rows, else
    shift-invert Arnoldi on a shift grid covering the window, deduplicated.
    Each hit carries the relative residual ||(P - z)u|| / ||u||.  When a ray
    tube overlaps the window a WindowTouchesRays warning is emitted and the
    returned items carry classifier tags.
    """
    if op.kind != "distorted":
        raise ValueError("eigs_in_window expects a distorted operator")
    size = op.shape[0]
    mat = op.matrix
    found = []
    if size <= dense_threshold:
        vals, vecs = np.linalg.eig(mat.toarray())
        for i in np.nonzero([window.contains(z) for z in vals])[0]:
            found.append((complex(vals[i]), vecs[:, i]))
    else:
        n_re, n_im = shift_grid
        res = np.linspace(window.re_min, window.re_max, n_re + 2)[1:-1]
        ims = np.linspace(window.im_min, window.im_max, n_im + 2)[1:-1]
        k = min(k_per_shift, size - 2)
        v0 = _start_vector(size, seed)
        ident = sp.eye(size, dtype=complex, format="csr")
        for sig_re in res:
            for sig_im in ims:
                sigma = complex(sig_re, sig_im)
                try:
                    lu = BandedLU(mat - sigma * ident,
                                  kl=op.bandwidth, ku=op.bandwidth)
                except Singular:
                    found.append((sigma, None))
                    continue
                opinv = spla.LinearOperator((size, size), matvec=lu.solve,
                                            dtype=complex)
                try:
                    vals, vecs = spla.eigs(mat, k=k, sigma=sigma, OPinv=opinv,
                                           v0=v0, which="LM")
                except spla.ArpackNoConvergence as exc:
                    vals = exc.eigenvalues
                    vecs = exc.eigenvectors
                for i, z in enumerate(vals):
                    if window.contains(z):
                        found.append((complex(z), vecs[:, i]))
        found = _dedupe([fz for fz in found if fz[1] is not None],
                        radius=max(1e-9 * window.diagonal, 1e-13))

    out = []
    theta = op.meta.get("theta", 0.0)
    for z, u in found:
        resid = float(np.linalg.norm(mat @ u - z * u) / np.linalg.norm(u))
        if resid > tol * max(1.0, abs(mat).max()):
            continue
        tag = ("candidate_resonance" if rays is None
               else ray_tube_classifier(z, rays, tube_half_width))
        out.append(Resonance(z=z, theta=theta, residual=resid, tag=tag))
    out.sort(key=lambda rz: (rz.z.real, rz.z.imag))

    if rays is not None and tube_half_width > 0.0:
        ray_list = rays.rays if isinstance(rays, RaySet) else rays
        touch = any(min(r.distance(p) for r in ray_list) <= tube_half_width
                    for p in window.boundary_points())
        if touch:
            warnings.warn(
                "window overlaps a rotated-continuum tube; rely on tags",
                WindowTouchesRays)
    return out


@dataclass(frozen=True)
class StabilityReport:
    max_deviation: float
    pairs: tuple            # ((z1, z2), ...)
    n_candidates: int


def theta_stability(V, h, grid, window, theta1, theta2, A, d=1, ell=0,
                    tol=1e-8, dense_threshold=3000, tube_half_width=0.0,
                    seed=7):
    """Worst displacement of matched candidates between two scaling angles.

    Candidates are matched nearest-neighbor after filtering ray artifacts;
    a count mismatch raises UnmatchedResonance (under-resolved contour or a
    window touching the rays).
    """
    lists = []
    for theta in (theta1, theta2):
        prof = DistortionProfile(A=A, theta=theta)
        op = distorted_operator(V, h, grid, prof, d=d, ell=ell)
        rays = essential_rays(V, theta)
        hits = eigs_in_window(op, window, tol=tol, rays=rays,
                              tube_half_width=tube_half_width,
                              dense_threshold=dense_threshold, seed=seed)
        lists.append([rz for rz in hits if rz.tag == "candidate_resonance"])
    a, b = lists
    if len(a) != len(b):
        raise UnmatchedResonance(
            f"candidate count mismatch: {len(a)} at theta={theta1} vs "
            f"{len(b)} at theta={theta2}")
    if not a:
        return StabilityReport(max_deviation=0.0, pairs=(), n_candidates=0)
    remaining = list(b)
    pairs = []
    for ra in a:
        j = int(np.argmin([abs(ra.z - rb.z) for rb in remaining]))
        pairs.append((ra.z, remaining.pop(j).z))
    dev = max(abs(z1 - z2) for z1, z2 in pairs)
    return StabilityReport(max_deviation=float(dev), pairs=tuple(pairs),
                           n_candidates=len(pairs))


# ---------------------------------------------------------------------------
# scaling-law fits
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FitReport:
    """Least-squares fit of an (h, y) series in linearizing coordinates."""
    model: str               # power | exp_inv | log_window
    params: dict
    r2: float
    series: tuple            # ((h, y), ...) sorted by h descending

    def predict(self, h):
        h = np.asarray(h, dtype=float)
        if self.model == "power":
            return self.params["a"] * h ** self.params["b"]
        if self.model == "exp_inv":
            return np.exp(self.params["a"] + self.params["S"] / h)
        return self.params["a"] * h * np.abs(np.log(h))


def _linreg(x, y):
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    if np.ptp(x) == 0.0:
        raise DegenerateFit("zero variance in regressor")
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot < 1e-300 else 1.0 - float(np.sum(resid**2)) / ss_tot
    return slope, intercept, max(0.0, min(1.0, r2))


def fit_scaling(series, model):
    """Fit y = a h^b, log y = a + S/h, or y = a h|ln h| to an (h, y) series."""
    pts = sorted(((float(h), float(y)) for h, y in series), key=lambda p: -p[0])
    if len(pts) < 4:
        raise ValueError("need at least 4 points to fit")
    h = np.array([p[0] for p in pts])
    y = np.array([p[1] for p in pts])
    if np.any(y <= 0.0):
        raise ValueError("series values must be positive")
    if model == "power":
        b, loga, r2 = _linreg(np.log(h), np.log(y))
        params = {"a": float(np.exp(loga)), "b": float(b)}
    elif model == "exp_inv":
        S, a, r2 = _linreg(1.0 / h, np.log(y))
        params = {"a": float(a), "S": float(S)}
    elif model == "log_window":
        denom = h * np.abs(np.log(h))
        if np.any(denom == 0.0):
            raise DegenerateFit("h |ln h| vanishes at some sample")
        a = float(np.mean(y / denom))
        ss_res = float(np.sum((y - a * denom) ** 2))
        ss_tot = float(np.sum((y - y.mean()) ** 2))
        r2 = 1.0 if ss_tot < 1e-300 else max(0.0, min(1.0, 1.0 - ss_res / ss_tot))
        params = {"a": a}
    else:
        raise ValueError(f"unknown fit model {model!r}")
    return FitReport(model=model, params=params, r2=float(r2),
                     series=tuple(pts))


__all__ = [
    "BandedLU", "banded_factor", "extreme_singular", "extreme_singular_matrix",
    "ResolventQuery", "weighted_resolvent_norm",
    "Window", "Resonance", "eigs_in_window",
    "StabilityReport", "theta_stability",
    "FitReport", "fit_scaling",
]
