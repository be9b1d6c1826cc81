"""Radial matrix potentials, classical symbols and escape-function certificates.

A potential is an N x N hermitian-valued field V(r) on the half line with a
constant limit V_inf and declared decay rate rho0.  Every builtin family has
a closed-form expression that continues analytically to complex radii, which
is what the complex-distortion machinery needs.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import EmptySurface

_SECTOR_SAMPLE_RADII = 48
_SECTOR_SAMPLE_FRACTIONS = (0.2, 0.5, 0.9)


@dataclass(frozen=True)
class MatrixPotential:
    """Closed-form radial matrix potential.

    entries / radial_derivative accept a scalar or 1-d array of radii (real
    or complex) and return (N, N) or (n, N, N) arrays.  On the real axis the
    returned matrices are hermitian exactly (equal floats, not just close);
    for complex arguments they are complex symmetric.
    """

    dim: int
    entries: Callable[[np.ndarray], np.ndarray]
    radial_derivative: Callable[[np.ndarray], np.ndarray]
    v_infinity: np.ndarray          # real diagonal, ascending
    rho0: float
    cone: tuple                     # (c0, kappa) of the analyticity sector
    family: str
    params: dict
    hol_bound_constant: float = float("nan")
    contour_singularity: Optional[Callable[[np.ndarray], Optional[complex]]] = None

    @property
    def v_inf_levels(self):
        return np.diag(self.v_infinity)

    @property
    def v_inf_norm(self):
        """Matrix norm of V_inf (largest |eigenvalue|, V_inf is diagonal)."""
        return float(np.max(np.abs(np.diag(self.v_infinity))))

    def record(self):
        """Declarative config record (family tag + parameters)."""
        return {"family": self.family, "params": dict(self.params)}


def _as_batch(r):
    r = np.asarray(r)
    scalar = r.ndim == 0
    return np.atleast_1d(r), scalar


def _unbatch(out, scalar):
    return out[0] if scalar else out


def _diag_field(levels, n):
    N = len(levels)
    out = np.zeros((n, N, N), dtype=complex)
    for i, lv in enumerate(levels):
        out[:, i, i] = lv
    return out


def _sector_bound(entries, v_inf, rho0, cone, r_max=60.0):
    """Sampled constant C with ||V(x)-V_inf|| <= C <x>^{-rho0} on the sector."""
    c0, kappa = cone
    c0 = min(c0, 1.0)
    radii = np.linspace(max(kappa * 1.05, 1e-3), r_max, _SECTOR_SAMPLE_RADII)
    worst = 0.0
    for frac in _SECTOR_SAMPLE_FRACTIONS:
        x = radii + 1j * frac * c0 * np.sqrt(1.0 + radii**2)
        vals = entries(x) - v_inf[None, :, :]
        norms = np.linalg.norm(vals, ord=2, axis=(1, 2))
        jap = (1.0 + np.abs(x) ** 2) ** (rho0 / 2.0)
        worst = max(worst, float(np.max(norms * jap)))
    return worst


# ---------------------------------------------------------------------------
# builtin families
# ---------------------------------------------------------------------------

def _make_constant(levels):
    levels = tuple(float(v) for v in levels)
    v_inf = np.diag(np.array(sorted(levels), dtype=float))
    N = len(levels)

    def entries(r):
        rb, scalar = _as_batch(r)
        return _unbatch(_diag_field(sorted(levels), rb.shape[0]), scalar)

    def deriv(r):
        rb, scalar = _as_batch(r)
        return _unbatch(np.zeros((rb.shape[0], N, N), dtype=complex), scalar)

    return MatrixPotential(
        dim=N, entries=entries, radial_derivative=deriv, v_infinity=v_inf,
        rho0=2.0, cone=(float("inf"), 0.0), family="constant",
        params={"levels": list(levels)}, hol_bound_constant=0.0,
    )


def _make_gaussian_mix(levels, terms, rho0):
    """diag(levels) + sum of gaussian bumps amp*exp(-((r-c)/w)^2) at (i, j).

    terms: sequence of (i, j, amp, center, width) with real amp; each
    off-diagonal term is placed symmetrically, which keeps the field exactly
    hermitian on the real axis and complex symmetric off it.
    """
    levels = tuple(float(v) for v in levels)
    terms = tuple((int(i), int(j), float(a), float(c), float(w)) for i, j, a, c, w in terms)
    N = len(levels)
    v_inf = np.diag(np.array(levels, dtype=float))
    if list(levels) != sorted(levels):
        raise ValueError("levels must be ascending")

    def entries(r):
        rb, scalar = _as_batch(r)
        out = _diag_field(levels, rb.shape[0])
        for i, j, a, c, w in terms:
            g = a * np.exp(-(((rb - c) / w) ** 2))
            out[:, i, j] += g
            if i != j:
                out[:, j, i] += g
        return _unbatch(out, scalar)

    def deriv(r):
        rb, scalar = _as_batch(r)
        out = np.zeros((rb.shape[0], N, N), dtype=complex)
        for i, j, a, c, w in terms:
            g = a * np.exp(-(((rb - c) / w) ** 2)) * (-2.0 * (rb - c) / w**2)
            out[:, i, j] += g
            if i != j:
                out[:, j, i] += g
        return _unbatch(out, scalar)

    pot = MatrixPotential(
        dim=N, entries=entries, radial_derivative=deriv, v_infinity=v_inf,
        rho0=float(rho0), cone=(float("inf"), 0.0), family="gaussian_mix",
        params={"levels": list(levels), "terms": [list(t) for t in terms], "rho0": float(rho0)},
    )
    object.__setattr__(pot, "hol_bound_constant",
                       _sector_bound(entries, v_inf, rho0, (1.0, 0.0)))
    return pot


def _make_rational_tail(levels, amps, rho, rho0):
    """diag(levels) + diag(amps) * (1+r^2)^(-rho/2), a genuine long-range tail."""
    levels = tuple(float(v) for v in levels)
    amps = tuple(float(a) for a in amps)
    N = len(levels)
    v_inf = np.diag(np.array(levels, dtype=float))
    amp_diag = np.diag(np.array(amps, dtype=float))

    def entries(r):
        rb, scalar = _as_batch(r)
        tail = (1.0 + rb**2) ** (-rho / 2.0)
        out = _diag_field(levels, rb.shape[0]).astype(complex)
        out += tail[:, None, None] * amp_diag[None, :, :]
        return _unbatch(out, scalar)

    def deriv(r):
        rb, scalar = _as_batch(r)
        tail = -rho * rb * (1.0 + rb**2) ** (-rho / 2.0 - 1.0)
        out = tail[:, None, None] * amp_diag[None, :, :].astype(complex)
        return _unbatch(out, scalar)

    def singularity(x):
        # principal branch of (1+x^2)^(-rho/2): cut where 1+x^2 <= 0
        w = 1.0 + np.asarray(x) ** 2
        bad = (np.abs(w) < 1e-8) | ((w.real < 0) & (np.abs(w.imag) < 0.02 * np.abs(w.real)))
        if np.any(bad):
            return complex(np.asarray(x).ravel()[np.argmax(bad.ravel())])
        return None

    pot = MatrixPotential(
        dim=N, entries=entries, radial_derivative=deriv, v_infinity=v_inf,
        rho0=float(rho0), cone=(1.0, 0.5), family="rational_tail",
        params={"levels": list(levels), "amps": list(amps), "rho": float(rho), "rho0": float(rho0)},
        contour_singularity=singularity,
    )
    object.__setattr__(pot, "hol_bound_constant",
                       _sector_bound(entries, v_inf, rho0, (1.0, 0.5)))
    return pot


def _make_avoided_crossing(alpha, center, delta, rho0):
    """Two-level tanh crossing alpha*[[t, delta], [delta, -t]], t = tanh(r-center).

    The frame is rotated by the constant orthogonal matrix diagonalizing the
    r -> infinity limit, so V_inf is diagonal ascending as required.
    """
    alpha, center, delta = float(alpha), float(center), float(delta)
    gap = np.hypot(1.0, delta)
    # eigenvector of [[1, d], [d, -1]] for +sqrt(1+d^2); columns sorted ascending
    vplus = np.array([1.0 + gap, delta])
    vplus /= np.linalg.norm(vplus)
    vminus = np.array([-vplus[1], vplus[0]])
    O = np.column_stack([vminus, vplus])
    v_inf = np.diag(np.array([-alpha * gap, alpha * gap]))
    base_inf = alpha * np.array([[1.0, delta], [delta, -1.0]])
    # rotated coefficient matrices: V(r) = A*tanh(r-c) + B
    A = O.T @ (alpha * np.diag([1.0, -1.0])) @ O
    B = O.T @ (alpha * delta * np.array([[0.0, 1.0], [1.0, 0.0]])) @ O
    A = 0.5 * (A + A.T)
    B = 0.5 * (B + B.T)

    def entries(r):
        rb, scalar = _as_batch(r)
        t = np.tanh(rb - center)
        out = t[:, None, None] * A[None, :, :] + B[None, :, :]
        return _unbatch(out.astype(complex), scalar)

    def deriv(r):
        rb, scalar = _as_batch(r)
        s = 1.0 / np.cosh(rb - center) ** 2
        out = s[:, None, None] * A[None, :, :].astype(complex)
        return _unbatch(out, scalar)

    def singularity(x):
        w = np.cosh(np.asarray(x) - center)
        bad = np.abs(w) < 0.05
        if np.any(bad):
            return complex(np.asarray(x).ravel()[np.argmax(bad.ravel())])
        return None

    pot = MatrixPotential(
        dim=2, entries=entries, radial_derivative=deriv, v_infinity=v_inf,
        rho0=float(rho0), cone=(1.0, center + 1.0), family="avoided_crossing",
        params={"alpha": alpha, "center": center, "delta": delta, "rho0": float(rho0)},
        contour_singularity=singularity,
    )
    object.__setattr__(pot, "hol_bound_constant",
                       _sector_bound(entries, v_inf, rho0, (0.25, center + 1.0)))
    return pot


_FAMILIES = {
    "free": lambda **kw: _make_constant([0.0] * int(kw.get("dim", 1))),
    "constant": lambda **kw: _make_constant(kw["levels"]),
    "gaussian_mix": lambda **kw: _make_gaussian_mix(
        kw["levels"], kw["terms"], kw.get("rho0", 1.0)),
    "rational_tail": lambda **kw: _make_rational_tail(
        kw["levels"], kw["amps"], kw.get("rho", 2.0), kw.get("rho0", 1.0)),
    "avoided_crossing": lambda **kw: _make_avoided_crossing(
        kw["alpha"], kw["center"], kw["delta"], kw.get("rho0", 0.3)),
}


def make_potential(family, **params):
    if family not in _FAMILIES:
        raise ValueError(f"unknown potential family {family!r} "
                         f"(known: {sorted(_FAMILIES)})")
    return _FAMILIES[family](**params)


def potential_from_record(record):
    return make_potential(record["family"], **record["params"])


# ---------------------------------------------------------------------------
# symbols and surfaces
# ---------------------------------------------------------------------------

def eval_symbol(V, r, xi):
    """Matrix symbol p(r, xi) = |xi|^2 I_N + V(r)."""
    out = np.asarray(V.entries(r), dtype=complex).copy()
    idx = np.arange(V.dim)
    out[..., idx, idx] += abs(xi) ** 2
    return out

def lambda_fields(V, grid):
    """Ascending eigenvalue branches of V(r) sampled on a radius grid, (n, N)."""
    vals = np.asarray(V.entries(np.asarray(grid, dtype=float)))
    return np.linalg.eigvalsh(vals)


@dataclass(frozen=True)
class LongRangeReport:
    """Worst decay ratios against the declared (1+r)^{-rho0(-1)} bounds."""
    passed: bool
    ratio_value: float
    ratio_derivative: float
    worst_r_value: float
    worst_r_derivative: float
    rho0: float


def check_long_range(V, grid):
    """Decay check: ||V-V_inf||(1+r)^rho0 <= 1 and ||V'||(1+r)^(rho0+1) <= 1."""
    r = np.asarray(grid, dtype=float)
    dv = np.asarray(V.entries(r)) - V.v_infinity[None, :, :]
    nv = np.linalg.norm(dv, ord=2, axis=(1, 2))
    nd = np.linalg.norm(np.asarray(V.radial_derivative(r)), ord=2, axis=(1, 2))
    rv = nv * (1.0 + r) ** V.rho0
    rd = nd * (1.0 + r) ** (V.rho0 + 1.0)
    iv, idr = int(np.argmax(rv)), int(np.argmax(rd))
    return LongRangeReport(
        passed=bool(rv[iv] <= 1.0 and rd[idr] <= 1.0),
        ratio_value=float(rv[iv]), ratio_derivative=float(rd[idr]),
        worst_r_value=float(r[iv]), worst_r_derivative=float(r[idr]),
        rho0=V.rho0,
    )


@dataclass(frozen=True)
class EnergySurfaceSample:
    """Sampled points of the energy surface |xi|^2 + lambda_j(r) = E."""
    energy: float
    r: np.ndarray          # (m,)
    xi: np.ndarray         # (m,) includes both signs
    branch: np.ndarray     # (m,) 0-based branch index
    branch_value: np.ndarray  # (m,) lambda_j(r) at the sample
    xi_squared: np.ndarray    # (m,) E - lambda_j(r), kept exact

    def __len__(self):
        return self.r.shape[0]


def sample_energy_surface(V, E, r_grid, signs=(1.0, -1.0)):
    """Sample the surface at energy E; branches with lambda_j(r) > E are omitted.

    An empty sample is a legal output (energy below every branch).
    """
    r = np.asarray(r_grid, dtype=float)
    lam = lambda_fields(V, r)
    rs, xis, js, lams, x2s = [], [], [], [], []
    for j in range(V.dim):
        open_mask = lam[:, j] <= E
        if not np.any(open_mask):
            continue
        rj = r[open_mask]
        x2 = E - lam[open_mask, j]
        xi = np.sqrt(x2)
        for sgn in signs:
            rs.append(rj)
            xis.append(sgn * xi)
            js.append(np.full(rj.shape, j, dtype=int))
            lams.append(lam[open_mask, j])
            x2s.append(x2)
    if not rs:
        return EnergySurfaceSample(
            energy=float(E), r=np.empty(0), xi=np.empty(0),
            branch=np.empty(0, dtype=int), branch_value=np.empty(0),
            xi_squared=np.empty(0))
    return EnergySurfaceSample(
        energy=float(E), r=np.concatenate(rs), xi=np.concatenate(xis),
        branch=np.concatenate(js), branch_value=np.concatenate(lams),
        xi_squared=np.concatenate(x2s))


@dataclass(frozen=True)
class EscapeCertificate:
    """Positivity report for the bracket {p, r xi} on sampled energy surfaces.

    margin is the minimum over all samples of the smallest eigenvalue of
    2|xi|^2 I_N - r V'(r); the certificate speaks about the sample only.
    """
    e_window: tuple
    margin: float
    worst_r: float
    worst_xi: float
    worst_branch: int
    worst_energy: float
    passed: bool
    n_radii: int
    n_energies: int
    mesh: float


def escape_certificate(V, e_window, r_grid, n_energies=64):
    """Certify {p, r xi} >= c I_N on surfaces across an energy window.

    The bracket 2|xi|^2 I_N - r V'(r) is evaluated with |xi|^2 substituted
    exactly from the surface equation, so the free potential yields 2E with
    no rounding.  Raises EmptySurface when the window lies below every
    branch on the whole grid.
    """
    e_lo, e_hi = (float(e_window[0]), float(e_window[1])) if np.ndim(e_window) else (float(e_window),) * 2
    energies = np.linspace(e_lo, e_hi, n_energies) if e_hi > e_lo else np.array([e_lo])
    r = np.asarray(r_grid, dtype=float)
    lam = lambda_fields(V, r)

    if np.all(lam > energies[-1]):
        raise EmptySurface(
            f"energy window [{e_lo}, {e_hi}] lies below every branch of V on the grid")

    # smallest eigenvalue of -r V'(r), shared by every branch and energy
    drift = -r[:, None, None] * np.asarray(V.radial_derivative(r))
    drift_min = np.linalg.eigvalsh(drift)[:, 0]

    margin = np.inf
    worst = (float(r[0]), 0.0, 0, energies[0])
    for E in energies:
        open_mask = lam <= E          # (n, N)
        if not np.any(open_mask):
            continue
        cand = 2.0 * (E - lam) + drift_min[:, None]
        cand = np.where(open_mask, cand, np.inf)
        k = int(np.argmin(cand))
        i, j = divmod(k, V.dim)
        if cand[i, j] < margin:
            margin = float(cand[i, j])
            worst = (float(r[i]), float(np.sqrt(max(E - lam[i, j], 0.0))), j, float(E))
    return EscapeCertificate(
        e_window=(e_lo, e_hi), margin=margin,
        worst_r=worst[0], worst_xi=worst[1], worst_branch=worst[2],
        worst_energy=worst[3], passed=bool(margin > 0.0),
        n_radii=r.shape[0], n_energies=len(energies),
        mesh=float(r[1] - r[0]) if len(r) > 1 else 0.0)


__all__ = [
    "MatrixPotential", "make_potential", "potential_from_record",
    "eval_symbol", "lambda_fields", "check_long_range", "LongRangeReport",
    "EnergySurfaceSample", "sample_energy_surface",
    "EscapeCertificate", "escape_certificate",
]
