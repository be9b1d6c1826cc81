"""Finite-difference radial operators, plain and exterior-complex-scaled.

Discretization is the 3-point centered stencil on a uniform grid with
Dirichlet ends.  Matrices are block tridiagonal: scalar kinetic stencil
tensored with I_N plus dense N x N potential blocks per node.  Plain
operators come out exactly hermitian, distorted ones exactly complex
symmetric (equal float entries, not merely small defects).
"""

import cmath
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp

from .errors import AngleTooLarge, ContourSingularity, DimensionNotSupported
from .profiles import clamp_angle, smoothstep, smoothstep_d1


@dataclass(frozen=True)
class RadialGrid:
    """Uniform interior grid on (0, r_max): nodes k*mesh, k = 1..n."""
    r_max: float
    n: int

    def __post_init__(self):
        if self.n < 3 or self.r_max <= 0:
            raise ValueError("need n >= 3 interior nodes and r_max > 0")

    @property
    def mesh(self):
        return self.r_max / (self.n + 1)

    @property
    def nodes(self):
        return self.mesh * np.arange(1, self.n + 1)

    @property
    def weights(self):
        """Quadrature weights for interior nodes (functions vanish at ends)."""
        return np.full(self.n, self.mesh)

    @property
    def full_nodes(self):
        """Nodes including both endpoints, for quadrature of smooth fields."""
        return self.mesh * np.arange(0, self.n + 2)

    def refine(self, factor=2):
        """Grid with the same r_max and roughly factor times the resolution."""
        return RadialGrid(self.r_max, (self.n + 1) * factor - 1)


@dataclass(frozen=True)
class DistortionProfile:
    """Vector field F for the contour r -> r + i*theta*F(r).

    F vanishes identically on [0, A], equals r from A+1 on, and crosses the
    unit-width transition with a degree-9 smoothstep so that F is C^3 and
    monotone.  global_scaling=True is the degenerate A -> 0 variant with
    F(r) = r everywhere (the contour becomes (1 + i*theta) r exactly).
    """
    A: float
    theta: float
    global_scaling: bool = False

    def __post_init__(self):
        if self.A < 0 or self.theta < 0:
            raise ValueError("need A >= 0 and theta >= 0")

    def F(self, r):
        r = np.asarray(r, dtype=float)
        if self.global_scaling:
            return r
        return r * smoothstep(r - self.A, order=4)

    def F_prime(self, r):
        r = np.asarray(r, dtype=float)
        if self.global_scaling:
            return np.ones_like(r)
        t = r - self.A
        return smoothstep(t, order=4) + r * smoothstep_d1(t, order=4)

    def contour(self, r):
        if self.theta == 0.0:
            return np.asarray(r, dtype=float)
        return np.asarray(r, dtype=float) + 1j * self.theta * self.F(r)

    def jacobian(self, r):
        return 1.0 + 1j * self.theta * self.F_prime(r)


@dataclass
class DiscretizedOperator:
    """Banded complex block matrix plus the metadata that defines it."""
    matrix: sp.csr_matrix
    kind: str                   # plain | conjugated | distorted
    h: float
    d: int
    ell: int
    grid: RadialGrid
    n_channels: int
    meta: dict = field(default_factory=dict)

    @property
    def shape(self):
        return self.matrix.shape

    @property
    def bandwidth(self):
        return 2 * self.n_channels - 1

    def to_dense(self):
        return self.matrix.toarray()

    def apply(self, v):
        return self.matrix @ v

    def hermiticity_defect(self):
        return float(abs(self.matrix - self.matrix.conj().T).max())

    def symmetry_defect(self):
        """Defect against the non-conjugate transpose (complex symmetry)."""
        return float(abs(self.matrix - self.matrix.T).max())


def _check_dimension(d, ell):
    if d == 2:
        raise DimensionNotSupported("d = 2 is excluded; use d in {1, 3}")
    if d not in (1, 3):
        raise DimensionNotSupported(f"d = {d} not supported; use d in {{1, 3}}")
    if d == 1 and ell != 0:
        raise ValueError("angular momentum ell applies to d = 3 only")
    if ell < 0 or int(ell) != ell:
        raise ValueError("ell must be a nonnegative integer")


def _assemble(grid, N, diag_scalar, off_scalar, v_blocks):
    """Block tridiagonal: scalar stencil (x) I_N + block-diagonal potential."""
    scal = sp.diags(
        [off_scalar, diag_scalar, off_scalar], offsets=[-1, 0, 1],
        shape=(grid.n, grid.n), dtype=complex)
    mat = sp.kron(scal, sp.eye(N, dtype=complex, format="csr"), format="bsr")
    blocks = sp.bsr_matrix(
        (np.ascontiguousarray(v_blocks, dtype=complex),
         np.arange(grid.n), np.arange(grid.n + 1)),
        shape=(grid.n * N, grid.n * N))
    return (mat + blocks).tocsr()


def discretize_plain(V, h, grid, d=1, ell=0, origin_bc="dirichlet"):
    """P(h) = -h^2 Laplacian I_N + V on the radial grid; exactly hermitian.

    d = 1 is the half line with a Dirichlet condition at 0 (odd extension).
    origin_bc="neumann" folds the line evenly instead (ghost node mirrored
    onto the first interior node; boundary accuracy drops to O(mesh)).
    For d = 3 the channel picks up the centrifugal term h^2 ell(ell+1)/r^2;
    the (d-1)(d-3)/4 constant from the half-density folding vanishes for
    d in {1, 3}.
    """
    _check_dimension(d, ell)
    if origin_bc not in ("dirichlet", "neumann"):
        raise ValueError("origin_bc must be 'dirichlet' or 'neumann'")
    r = grid.nodes
    c = h**2 / grid.mesh**2
    diag = np.full(grid.n, 2.0 * c)
    if origin_bc == "neumann":
        if d != 1:
            raise ValueError("neumann fold is a d = 1 option")
        diag[0] = c
    off = np.full(grid.n - 1, -c)
    if d == 3 and ell > 0:
        diag = diag + h**2 * ell * (ell + 1) / r**2
    vb = np.asarray(V.entries(r), dtype=complex)
    mat = _assemble(grid, V.dim, diag.astype(complex), off.astype(complex), vb)
    return DiscretizedOperator(
        matrix=mat, kind="plain", h=h, d=d, ell=ell, grid=grid,
        n_channels=V.dim,
        meta={"potential": V.record(), "origin_bc": origin_bc})


def distorted_operator(V, h, grid, profile, d=1, ell=0):
    """Exterior-complex-scaled operator on the contour r + i*theta*F(r).

    Kinetic part in the symmetrized form -h^2 g^{-1/2} D (g^{-1} D (g^{-1/2} .))
    with g = 1 + i*theta*F', which makes the matrix exactly complex symmetric;
    the potential and centrifugal parts are evaluated on the contour.  At
    theta = 0 every entry reduces to the plain operator's entry exactly.
    """
    _check_dimension(d, ell)
    theta = profile.theta
    max_angle = clamp_angle(theta, V.cone[0])
    if theta >= max_angle:
        raise AngleTooLarge(
            f"theta = {theta} at or beyond admissible angle {max_angle:.4f} "
            f"for family {V.family!r}")
    r = grid.nodes
    z = profile.contour(r)
    if theta != 0.0 and V.contour_singularity is not None:
        loc = V.contour_singularity(z)
        if loc is not None:
            raise ContourSingularity(
                f"scaled contour hits a singularity of {V.family!r} near {loc}",
                location=loc)

    c = h**2 / grid.mesh**2
    if theta == 0.0:
        diag = np.full(grid.n, 2.0 * c, dtype=complex)
        off = np.full(grid.n - 1, -c, dtype=complex)
    else:
        mid = grid.mesh * (np.arange(grid.n + 1) + 0.5)   # r_{k+1/2}, ghost ends
        a_mid = 1.0 / profile.jacobian(mid)
        g = profile.jacobian(r)
        ginv_sqrt = 1.0 / np.sqrt(g)
        diag = c * (a_mid[:-1] + a_mid[1:]) / g
        off = -c * ginv_sqrt[:-1] * a_mid[1:-1] * ginv_sqrt[1:]
    if d == 3 and ell > 0:
        diag = diag + h**2 * ell * (ell + 1) / z**2
    vb = np.asarray(V.entries(z), dtype=complex)
    mat = _assemble(grid, V.dim, diag, off, vb)
    return DiscretizedOperator(
        matrix=mat, kind="distorted", h=h, d=d, ell=ell, grid=grid,
        n_channels=V.dim,
        meta={"potential": V.record(), "theta": theta, "A": profile.A})


# ---------------------------------------------------------------------------
# rotated essential spectrum
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Ray:
    """Half line origin + e^{-2i theta} R_+ in the complex plane."""
    origin: float
    theta: float

    @property
    def direction(self):
        return cmath.exp(-2j * self.theta)

    def distance(self, z):
        w = complex(z) - self.origin
        t = (w * self.direction.conjugate()).real
        if t <= 0.0:
            return abs(w)
        return abs(w - t * self.direction)


@dataclass(frozen=True)
class RaySet:
    """The N rotated continuum rays and the sector they bound."""
    rays: tuple
    theta: float

    @property
    def sector_description(self):
        lam1 = self.rays[0].origin
        return (f"sector between ({lam1} + e^(-2i[0,{self.theta})) R*_+) and the rays "
                + ", ".join(f"({r.origin} + e^(-2i {self.theta}) R_+)" for r in self.rays))

    def in_sector(self, z, margin=0.0):
        """True when z lies strictly between the real axis and the rays."""
        w = complex(z) - self.rays[0].origin
        if w == 0:
            return False
        ang = cmath.phase(w)
        if not (-2.0 * self.theta < ang <= 0.0):
            return False
        return all(r.distance(z) > margin for r in self.rays)

    def min_distance(self, z):
        return min(r.distance(z) for r in self.rays)


def essential_rays(v_infinity, theta):
    """Rays lambda_j + e^{-2i theta} R_+ of the distorted essential spectrum.

    v_infinity may be a MatrixPotential, a diagonal matrix or a sequence of
    levels.  theta = 0 collapses the rays onto [lambda_j, +infinity).
    """
    if hasattr(v_infinity, "v_infinity"):
        levels = np.diag(v_infinity.v_infinity)
    else:
        arr = np.asarray(v_infinity, dtype=float)
        levels = np.diag(arr) if arr.ndim == 2 else arr
    rays = tuple(Ray(float(lv), float(theta)) for lv in np.sort(levels))
    return RaySet(rays=rays, theta=float(theta))


def ray_tube_classifier(z, rays, half_width, h=None):
    """Tag z as 'ray_artifact' when within half_width of some ray.

    h is accepted for h-dependent tube policies; the default fixed-width
    policy ignores it.
    """
    ray_list = rays.rays if isinstance(rays, RaySet) else tuple(rays)
    dist = min(r.distance(z) for r in ray_list)
    return "ray_artifact" if dist <= half_width else "candidate_resonance"


__all__ = [
    "RadialGrid", "DistortionProfile", "DiscretizedOperator",
    "discretize_plain", "distorted_operator",
    "Ray", "RaySet", "essential_rays", "ray_tube_classifier",
]
