"""Linearized channel solves on a periodic cell by Fourier-mode synthesis.

The infinite strip is truncated to one periodic cell x in [0, 2*pi/xi0)
with fundamental wavenumber xi0; each Fourier mode k solves the clamped
mode problem at wavenumber k*xi0 and the stream function is synthesized as

    psi(x, y) = sum_k phi_k(y) exp(i k xi0 x),    v = psi_y,  w = -psi_x.

Mode -k is the conjugate of mode k (real fields).  The k = 0 mean mode
solves the fourth-derivative reduction; its additive constant is fixed by
psi(x, -1) = 0, which together with psi(x, +1) = 0 enforces zero
perturbation flux through every section.  The mean streamwise pressure
gradient reappears as the constant f0 + phi0''' and is checked, not
assumed.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DomainError, InadmissibleProfileError, ResolutionError
from .os_solver import OSModeOperator, os_rhs_from_force, sigma_values, solve_os_zero_mode
from .profiles import check_admissibility
from .spectral import GridFunction

__all__ = [
    "ForceField",
    "ChannelField",
    "PressureGradient",
    "EnergyReport",
    "LinearizedChannelSolver",
    "solve_linearized",
    "recover_pressure_gradient",
    "x_norm",
    "gamma_energy",
    "symmetry_project",
    "check_symmetry_cancellation",
    "stream_cross_integrals",
    "field_h_norm",
    "random_field",
    "x_grid",
    "synthesize",
]

SYMMETRY_CLASSES = ("X1", "X2", "Y1", "Y2")

FORCE_TAIL_TOL = 1e-10


def n_x_points(K):
    """Tensor-grid resolution in x: alias-safe for quadratic products."""
    return 4 * (K + 1)


def x_grid(xi0, K):
    Mx = n_x_points(K)
    period = 2.0 * math.pi / xi0
    return np.arange(Mx) * (period / Mx)


def synthesize(modes, xi0, K):
    """Real tensor-grid values from Fourier coefficients (k = -K..K)."""
    x = x_grid(xi0, K)
    ks = np.arange(-K, K + 1)
    phase = np.exp(1j * xi0 * np.outer(x, ks))
    return (phase @ modes).real


def analyze(values, K):
    """Fourier coefficients k = -K..K of real tensor-grid data.

    Returns (modes, tail_fraction) where tail_fraction is the energy of
    the discarded modes |k| > K relative to the total.
    """
    values = np.asarray(values, dtype=float)
    Mx = values.shape[0]
    coeffs = np.fft.fft(values, axis=0) / Mx
    energy = np.sum(np.abs(coeffs) ** 2, axis=1)
    total = float(energy.sum())
    kept = float(energy[: K + 1].sum() + energy[Mx - K :].sum()) if K > 0 else float(energy[0])
    tail = 0.0 if total == 0.0 else max(0.0, (total - kept) / total)
    modes = np.empty((2 * K + 1, values.shape[1]), dtype=complex)
    modes[K] = coeffs[0]
    for k in range(1, K + 1):
        modes[K + k] = coeffs[k]
        modes[K - k] = coeffs[Mx - k]
    return modes, tail


@dataclass(frozen=True)
class ForceField:
    """External force (f, g) sampled on the periodic tensor grid."""

    xi0: float
    K: int
    grid: object
    f: np.ndarray
    g: np.ndarray

    @classmethod
    def from_callables(cls, xi0, K, grid, f_fn, g_fn):
        x = x_grid(xi0, K)
        X, Y = np.meshgrid(x, grid.nodes, indexing="ij")
        return cls(xi0, K, grid, np.asarray(f_fn(X, Y), dtype=float),
                   np.asarray(g_fn(X, Y), dtype=float))

    @classmethod
    def zero(cls, xi0, K, grid):
        shape = (n_x_points(K), grid.N + 1)
        return cls(xi0, K, grid, np.zeros(shape), np.zeros(shape))

    def modes(self):
        """Per-mode coefficients with a resolution check on the tail."""
        fm, ft = analyze(self.f, self.K)
        gm, gt = analyze(self.g, self.K)
        scale = max(np.abs(self.f).max(initial=0.0), np.abs(self.g).max(initial=0.0))
        if scale > 0.0 and max(ft, gt) > FORCE_TAIL_TOL:
            raise ResolutionError(
                f"force not resolved by modes |k| <= {self.K}: "
                f"tail energy fraction {max(ft, gt):.3e}"
            )
        return fm, gm

    def l2_norm(self):
        """L2 norm of the vector force over one periodic cell."""
        period = 2.0 * math.pi / self.xi0
        dx = period / self.f.shape[0]
        w = self.grid.quad_weights
        return float(np.sqrt(dx * ((self.f**2 + self.g**2) @ w).sum()))


@dataclass(frozen=True)
class ChannelField:
    """Perturbation state: stream-function coefficients on the cell."""

    xi0: float
    K: int
    grid: object
    psi_modes: np.ndarray  # (2K+1, N+1), row j holds mode k = j - K
    solve_info: dict = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        pm = np.asarray(self.psi_modes, dtype=complex)
        if pm.shape != (2 * self.K + 1, self.grid.N + 1):
            raise DomainError("psi_modes shape does not match (2K+1, N+1)")
        object.__setattr__(self, "psi_modes", pm)

    # --- mode access -------------------------------------------------
    def mode(self, k):
        return self.psi_modes[k + self.K]

    def conjugate_symmetry_error(self):
        err = 0.0
        for k in range(self.K + 1):
            err = max(err, float(np.abs(self.mode(-k) - np.conj(self.mode(k))).max()))
        return err

    def v_modes(self):
        return self.psi_modes @ self.grid.D1.T

    def w_modes(self):
        ks = np.arange(-self.K, self.K + 1)
        return -1j * self.xi0 * ks[:, None] * self.psi_modes

    # --- synthesized values ------------------------------------------
    def x(self):
        return x_grid(self.xi0, self.K)

    def psi_values(self):
        return synthesize(self.psi_modes, self.xi0, self.K)

    def v_values(self):
        return synthesize(self.v_modes(), self.xi0, self.K)

    def w_values(self):
        return synthesize(self.w_modes(), self.xi0, self.K)

    # --- pointwise constraint checks ---------------------------------
    def divergence_max(self):
        """max |v_x + w_y| on the tensor grid."""
        ks = np.arange(-self.K, self.K + 1)
        vx = (1j * self.xi0 * ks[:, None]) * self.v_modes()
        wy = self.w_modes() @ self.grid.D1.T
        return float(np.abs(synthesize(vx + wy, self.xi0, self.K)).max())

    def flux_profile(self):
        """Perturbation flux int v dy at every x sample."""
        return self.v_values() @ self.grid.quad_weights

    def shifted(self, dx):
        """Field translated by dx in x (mode-wise phase factors)."""
        ks = np.arange(-self.K, self.K + 1)
        phase = np.exp(-1j * self.xi0 * ks * dx)
        return replace(self, psi_modes=self.psi_modes * phase[:, None], solve_info=None)

    def scaled(self, alpha):
        return replace(self, psi_modes=self.psi_modes * alpha, solve_info=None)

    def minus(self, other):
        if (other.K, other.xi0) != (self.K, self.xi0):
            raise DomainError("field layouts differ")
        return replace(self, psi_modes=self.psi_modes - other.psi_modes, solve_info=None)

    @classmethod
    def zero(cls, xi0, K, grid):
        return cls(xi0, K, grid, np.zeros((2 * K + 1, grid.N + 1), dtype=complex))


def _derivative_mode_sets(modes, xi0, K, grid, m):
    """Arrays of d^alpha applied mode-wise, one entry per multi-index |alpha| <= m."""
    ks = np.arange(-K, K + 1)
    ikx = (1j * xi0 * ks)[:, None]
    out = []
    D = {0: None, 1: grid.D1, 2: grid.D2}
    for total in range(m + 1):
        for b in range(total + 1):
            a = total - b
            arr = modes if b == 0 else modes @ D[b].T
            if a:
                arr = arr * ikx**a
            out.append(arr)
    return out


def _cell_l2sq(modes, xi0, grid):
    """Squared L2 norm over one periodic cell from mode coefficients."""
    period = 2.0 * math.pi / xi0
    return period * float((np.abs(modes) ** 2 @ grid.quad_weights).sum().real)


def field_h_norm(fld, m):
    """H^m norm of the velocity field (v, w) over the periodic cell."""
    if not 0 <= m <= 2:
        raise DomainError("field Sobolev order limited to 0..2")
    total = 0.0
    for comp in (fld.v_modes(), fld.w_modes()):
        for arr in _derivative_mode_sets(comp, fld.xi0, fld.K, fld.grid, m):
            total += _cell_l2sq(arr, fld.xi0, fld.grid)
    return float(np.sqrt(total))


class LinearizedChannelSolver:
    """Factorized mode operators for repeated solves at one profile.

    Mode solves at distinct k are independent; ``threads`` > 1 runs them
    on a thread pool (LAPACK releases the GIL).
    """

    def __init__(self, p, grid, K, xi0, threads=1):
        rep = check_admissibility(p)
        if not rep.satisfies_abc:
            raise InadmissibleProfileError(
                "linearized solve requires the no-reversal condition"
            )
        if K < 1 or xi0 <= 0.0:
            raise DomainError("need K >= 1 and xi0 > 0")
        self.p = p
        self.grid = grid
        self.K = K
        self.xi0 = float(xi0)
        self.threads = max(1, int(threads))
        self._ops = {}

        def build(k):
            return OSModeOperator(p, k * self.xi0, grid)

        if self.threads > 1:
            with ThreadPoolExecutor(max_workers=self.threads) as ex:
                ops = list(ex.map(build, range(1, K + 1)))
        else:
            ops = [build(k) for k in range(1, K + 1)]
        for k, op in zip(range(1, K + 1), ops):
            self._ops[k] = op

    def solve_modes(self, f_modes, g_modes):
        """Solve from per-mode force coefficients (layout k = -K..K)."""
        K, grid = self.K, self.grid
        psi = np.zeros((2 * K + 1, grid.N + 1), dtype=complex)
        residuals = np.zeros(K + 1)
        rhs_norms = np.zeros(K + 1)

        def solve_one(k):
            if k == 0:
                f0 = 0.5 * (f_modes[K] + np.conj(f_modes[K]))
                rhs = GridFunction(grid, -(grid.D1 @ f0))
                sol = solve_os_zero_mode(rhs, grid)
            else:
                rhs = os_rhs_from_force(f_modes[K + k], g_modes[K + k], k * self.xi0, grid)
                sol = self._ops[k].solve(rhs)
            return k, sol, grid.l2_norm(rhs.values)

        if self.threads > 1:
            with ThreadPoolExecutor(max_workers=self.threads) as ex:
                results = list(ex.map(solve_one, range(K + 1)))
        else:
            results = [solve_one(k) for k in range(K + 1)]
        for k, sol, rn in results:
            vals = sol.phi.values
            if k == 0:
                vals = 0.5 * (vals + np.conj(vals))
            psi[K + k] = vals
            psi[K - k] = np.conj(vals)
            residuals[k] = sol.residual_norm
            rhs_norms[k] = rn
        res_sq = residuals[0] ** 2 + 2.0 * np.sum(residuals[1:] ** 2)
        rhs_sq = rhs_norms[0] ** 2 + 2.0 * np.sum(rhs_norms[1:] ** 2)
        rel = math.sqrt(res_sq / rhs_sq) if rhs_sq > 0.0 else 0.0
        info = {"residual_rel": rel, "mode_residuals": residuals.tolist()}
        return ChannelField(self.xi0, K, grid, psi, solve_info=info)

    def solve(self, force):
        f_modes, g_modes = force.modes()
        return self.solve_modes(f_modes, g_modes)


def solve_linearized(p, force, grid, K, xi0=None, threads=1):
    """Solve the linearized perturbation problem driven by ``force``."""
    xi0 = force.xi0 if xi0 is None else xi0
    solver = LinearizedChannelSolver(p, grid, K, xi0, threads=threads)
    return solver.solve(force)


@dataclass(frozen=True)
class PressureGradient:
    """Gradient of the perturbation pressure (the pressure itself is a
    class modulo constants; only its gradient is physical)."""

    xi0: float
    K: int
    grid: object
    qx_modes: np.ndarray
    qy_modes: np.ndarray
    curl_residual: float

    def qx_values(self):
        return synthesize(self.qx_modes, self.xi0, self.K)

    def qy_values(self):
        return synthesize(self.qy_modes, self.xi0, self.K)

    def l2_norm(self):
        return float(
            np.sqrt(
                _cell_l2sq(self.qx_modes, self.xi0, self.grid)
                + _cell_l2sq(self.qy_modes, self.xi0, self.grid)
            )
        )


def recover_pressure_gradient(p, fld, force, nonlinear_modes=None):
    """Recover grad q from the momentum balance of a solved field.

    grad q = force + Laplacian(v) - (v . grad)u* - (u* . grad)v, with the
    quadratic self-advection supplied through ``nonlinear_modes`` (pair of
    coefficient arrays) when the field solves the nonlinear problem.  The
    returned curl residual measures how far the recovered vector is from
    an exact gradient; it is the module's internal consistency check.
    """
    grid, K, xi0 = fld.grid, fld.K, fld.xi0
    F = p.F(grid.nodes)
    Fp = p.Fp(grid.nodes)
    vm = fld.v_modes()
    wm = fld.w_modes()
    f_modes, g_modes = force.modes()
    ks = np.arange(-K, K + 1)
    ikx = (1j * xi0 * ks)[:, None]
    lap_v = vm @ grid.D2.T + ikx**2 * vm
    lap_w = wm @ grid.D2.T + ikx**2 * wm
    qx = f_modes + lap_v - F[None, :] * (ikx * vm) - Fp[None, :] * wm
    qy = g_modes + lap_w - F[None, :] * (ikx * wm)
    if nonlinear_modes is not None:
        a1, a2 = nonlinear_modes
        qx = qx - a1
        qy = qy - a2
    curl = qx @ grid.D1.T - ikx * qy
    curl_norm = math.sqrt(_cell_l2sq(curl, xi0, grid))
    grad = PressureGradient(xi0, K, grid, qx, qy, 0.0)
    scale = max(grad.l2_norm(), force.l2_norm(), 1e-300)
    return PressureGradient(xi0, K, grid, qx, qy, float(curl_norm / scale))


# ---------------------------------------------------------------------------
# local norms and the windowed energy functional
# ---------------------------------------------------------------------------


def _window_factor(dk, xi0, width):
    """Exact integral of exp(i dk xi0 x) over an x-window of given width,
    as (offset-independent magnitude) paired with offset phases later."""
    if dk == 0:
        return width
    arg = dk * xi0
    return (np.exp(1j * arg * width) - 1.0) / (1j * arg)


def _window_quadratic(mode_sets, xi0, K, grid, offsets, width, weight=None):
    """sum_alpha int_{a}^{a+width} int_y |d^alpha u|^2 for every offset a.

    Uses the exact mode-pair formula: the x-integral of
    e^{i(k-l) xi0 x} over (a, a+width) is e^{i(k-l) xi0 a} * Lambda(k-l).
    """
    w = grid.quad_weights if weight is None else grid.quad_weights * weight
    n = 2 * K + 1
    G = np.zeros((n, n), dtype=complex)
    for arr in mode_sets:
        G += (arr * w[None, :]) @ np.conj(arr).T
    dks = np.arange(-(n - 1), n)
    lam = np.array([_window_factor(dk, xi0, width) for dk in dks])
    vals = np.empty(len(offsets))
    kk = np.arange(-K, K + 1)
    dk_mat = kk[:, None] - kk[None, :]
    lam_mat = lam[dk_mat + (n - 1)]
    base = G * lam_mat
    for i, a in enumerate(offsets):
        ph = np.exp(1j * xi0 * kk * a)
        vals[i] = float(np.real(ph @ base @ np.conj(ph)))
    return vals


def x_norm(fld, m, scalar_modes=None):
    """Windowed norm: sup over offsets of the H^m norm on unit-width slabs.

    Offsets are discretized to the tensor-grid spacing; windows wrap
    around the periodic cell.  With ``scalar_modes`` given, the norm is
    taken of that scalar function instead of the velocity field.
    """
    if not 0 <= m <= 2:
        raise DomainError("window Sobolev order limited to 0..2")
    offsets = fld.x()
    sets = []
    comps = [scalar_modes] if scalar_modes is not None else [fld.v_modes(), fld.w_modes()]
    for comp in comps:
        sets.extend(_derivative_mode_sets(comp, fld.xi0, fld.K, fld.grid, m))
    vals = _window_quadratic(sets, fld.xi0, fld.K, fld.grid, offsets, 1.0)
    return float(np.sqrt(vals.max()))


@dataclass(frozen=True)
class EnergyReport:
    gamma_L: dict
    gamma_monotone: bool
    x_norms: dict
    h_norms: dict
    gamma_control: dict


def _centered_window(dk, xi0, L, period):
    """Integral of exp(i dk xi0 x) over (-L, L), saturating at one cell."""
    if 2.0 * L >= period:
        return period if dk == 0 else 0.0
    if dk == 0:
        return 2.0 * L
    arg = dk * xi0
    return 2.0 * math.sin(arg * L) / arg


def _centered_quadratic(mode_sets, xi0, K, grid, L, weight=None):
    period = 2.0 * math.pi / xi0
    w = grid.quad_weights if weight is None else grid.quad_weights * weight
    n = 2 * K + 1
    kk = np.arange(-K, K + 1)
    dk_mat = kk[:, None] - kk[None, :]
    lam = np.array([_centered_window(dk, xi0, L, period) for dk in range(-(n - 1), n)])
    lam_mat = lam[dk_mat + (n - 1)]
    total = 0.0
    for arr in mode_sets:
        G = (arr * w[None, :]) @ np.conj(arr).T
        total += float(np.real(np.sum(G * lam_mat)))
    return total


def gamma_energy(p, fld, L_list):
    """Windowed weighted energy of sigma = psi / F over Q_L = (-L, L) x (-1, 1).

    Gamma(L) = -6A int sigma_x^2 - 12A int sigma_y^2 + int F |Hess sigma|^2,
    nondecreasing in L under admissibility; windows saturate at the cell.
    The report also carries the control quantity
    int (sigma_y^2 + sigma_x^2 + psi_xx^2 + 2 psi_xy^2 + psi_yy^2) whose
    ratio to Gamma stays bounded.
    """
    rep = check_admissibility(p)
    if not rep.satisfies_abc:
        raise InadmissibleProfileError("windowed energy needs an admissible profile")
    grid, K, xi0 = fld.grid, fld.K, fld.xi0
    F = p.F(grid.nodes)
    dpsi = fld.psi_modes @ grid.D1.T
    sigma = np.empty_like(fld.psi_modes)
    for j in range(2 * K + 1):
        sigma[j] = sigma_values(fld.psi_modes[j], dpsi[j], p, grid)
    ks = np.arange(-K, K + 1)
    ikx = (1j * xi0 * ks)[:, None]
    sx = ikx * sigma
    sy = sigma @ grid.D1.T
    sxx = ikx**2 * sigma
    sxy = ikx * sy
    syy = sigma @ grid.D2.T
    px = ikx * fld.psi_modes
    pxx = ikx * px
    pxy = ikx * dpsi
    pyy = fld.psi_modes @ grid.D2.T
    gamma = {}
    control = {}
    for L in L_list:
        g_val = (
            -6.0 * p.A * _centered_quadratic([sx], xi0, K, grid, L)
            - 12.0 * p.A * _centered_quadratic([sy], xi0, K, grid, L)
            + _centered_quadratic([sxx], xi0, K, grid, L, weight=F)
            + 2.0 * _centered_quadratic([sxy], xi0, K, grid, L, weight=F)
            + _centered_quadratic([syy], xi0, K, grid, L, weight=F)
        )
        c_val = (
            _centered_quadratic([sy, sx, pxx, pyy], xi0, K, grid, L)
            + 2.0 * _centered_quadratic([pxy], xi0, K, grid, L)
        )
        gamma[float(L)] = float(g_val)
        control[float(L)] = float(c_val)
    Ls = sorted(gamma)
    scale = max(abs(v) for v in gamma.values()) or 1.0
    monotone = all(
        gamma[Ls[i + 1]] >= gamma[Ls[i]] - 1e-10 * scale for i in range(len(Ls) - 1)
    )
    return EnergyReport(
        gamma_L=gamma,
        gamma_monotone=bool(monotone),
        x_norms={m: x_norm(fld, m) for m in (0, 1, 2)},
        h_norms={m: field_h_norm(fld, m) for m in (1, 2)},
        gamma_control=control,
    )


# ---------------------------------------------------------------------------
# symmetry classes
# ---------------------------------------------------------------------------


def symmetry_project(fld, cls):
    """Project onto one of the solenoidal parity classes.

    In stream-function terms: X1 (v x-even, w x-odd) keeps the x-even part
    of psi; X2 the x-odd part; Y1 (v y-even, w y-odd) the y-odd part of
    psi; Y2 (v y-odd, w y-even) the y-even part.  Projections are
    idempotent and X1 + X2 (resp. Y1 + Y2) reconstruct the field.
    """
    if cls not in SYMMETRY_CLASSES:
        raise DomainError(f"unknown symmetry class {cls!r}")
    pm = fld.psi_modes
    if cls in ("X1", "X2"):
        mirrored = pm[::-1]  # mode k -> mode -k
        new = 0.5 * (pm + mirrored) if cls == "X1" else 0.5 * (pm - mirrored)
    else:
        flipped = pm[:, ::-1]  # y -> -y (nodes are symmetric)
        new = 0.5 * (pm - flipped) if cls == "Y1" else 0.5 * (pm + flipped)
    return replace(fld, psi_modes=new, solve_info=None)


def stream_cross_integrals(p, fld):
    """Period integrals I1 = int F psi_yy psi_x and
    I2 = int (F psi_xx - 6A psi) psi_x, with no symmetry precondition."""
    grid, K, xi0 = fld.grid, fld.K, fld.xi0
    period = 2.0 * math.pi / xi0
    F = p.F(grid.nodes)
    w = grid.quad_weights
    ks = np.arange(-K, K + 1)
    ikx = (1j * xi0 * ks)[:, None]
    px = ikx * fld.psi_modes
    pyy = fld.psi_modes @ grid.D2.T
    pxx = ikx * px
    integrand1 = (F * w)[None, :] * pyy * np.conj(px)
    I1 = period * float(np.real(integrand1.sum()))
    integrand2 = w[None, :] * (F[None, :] * pxx - 6.0 * p.A * fld.psi_modes) * np.conj(px)
    I2 = period * float(np.real(integrand2.sum()))
    return I1, I2


def check_symmetry_cancellation(p, fld, parity_tol=1e-9):
    """Cross terms that obstruct the symmetric energy estimate.

    For an even profile (B = 0) and a stream function of pure x-parity the
    two period integrals

        I1 = int F psi_yy psi_x,   I2 = int (F psi_xx - 6A psi) psi_x

    vanish identically.  Raises when B != 0 or when psi mixes parities.
    """
    if p.B != 0.0:
        raise DomainError("cancellation identity requires an even profile (B = 0)")
    even = symmetry_project(fld, "X1")
    odd = symmetry_project(fld, "X2")
    ne, no = field_h_norm(even, 0), field_h_norm(odd, 0)
    scale = max(ne, no, 1e-300)
    if min(ne, no) > parity_tol * scale:
        raise DomainError("stream function mixes x-even and x-odd parts")
    return stream_cross_integrals(p, fld)


def random_field(rng, grid, K, xi0, h2_norm, n_y_modes=4, decay=0.6):
    """Smooth random clamped field with prescribed H^2 norm.

    Mode shapes are (1 - y^2)^2 times low-order polynomials, so every mode
    is clamped exactly; coefficients decay geometrically in |k|.
    """
    y = grid.nodes
    env = (1.0 - y**2) ** 2
    shapes = np.array([env * y**j for j in range(n_y_modes)])
    psi = np.zeros((2 * K + 1, grid.N + 1), dtype=complex)
    for k in range(K + 1):
        c = rng.normal(size=n_y_modes) + (1j * rng.normal(size=n_y_modes) if k else 0.0)
        vals = (c * decay**k) @ shapes
        psi[K + k] = vals
        psi[K - k] = np.conj(vals)
    fld = ChannelField(xi0, K, grid, psi)
    cur = field_h_norm(fld, 2)
    if cur == 0.0:
        raise DomainError("degenerate random draw")
    return fld.scaled(h2_norm / cur)


# ---------------------------------------------------------------------------
# export
# ---------------------------------------------------------------------------


def export_field_csv(fld, path, pressure=None):
    """Write (x, y, v, w, qx, qy) rows for the tensor grid."""
    x = fld.x()
    y = fld.grid.nodes
    v = fld.v_values()
    w = fld.w_values()
    qx = pressure.qx_values() if pressure is not None else np.zeros_like(v)
    qy = pressure.qy_values() if pressure is not None else np.zeros_like(v)
    with open(path, "w") as fh:
        fh.write("x,y,v,w,qx,qy\n")
        for i in range(len(x)):
            for j in range(len(y)):
                fh.write(
                    f"{x[i]:.17g},{y[j]:.17g},{v[i, j]:.17g},{w[i, j]:.17g},"
                    f"{qx[i, j]:.17g},{qy[i, j]:.17g}\n"
                )


def field_header(fld, p):
    """JSON-ready snapshot header (profile, layout, norms)."""
    return {
        "profile": p.to_dict(),
        "xi0": fld.xi0,
        "K": fld.K,
        "N": fld.grid.N,
        "norms": {
            "H1": field_h_norm(fld, 1),
            "H2": field_h_norm(fld, 2),
            "X0": x_norm(fld, 0),
            "X1": x_norm(fld, 1),
            "X2": x_norm(fld, 2),
        },
    }
