"""Stability spectrum of the channel operator and the flow-reversal witness.

For A < 0 and wavenumber T > 0 the eigenvalue problem

    phi'''' - 2 T^2 phi'' + T^4 phi
        + 3 A T i [ (1 - y^2)(phi'' - T^2 phi) + 2 phi ] = lambda (phi'' - T^2 phi),
    phi(+-1) = phi'(+-1) = 0,

is the linearization of the flow around the parabolic profile -3A(1-y^2);
growth rates are the real parts of lambda.  For small |AT| every
eigenvalue has negative real part; as |A| grows a neutral crossing
Re lambda = 0 appears at some (A1, T0), and shifting the profile by the
neutral frequency produces F(y) = 3 A1 y^2 + C with C < 3|A1| - a profile
with flow reversal at which the homogeneous mode operator loses
injectivity.  Eigenvalues map to classical phase speeds c (in units of
the profile maximum -3A) through lambda = -i T (-3A) c.

Discretization: clamped collocation in the lifted form phi = (1 - y^2) p
with p vanishing at the walls, which imposes both boundary conditions
exactly and avoids spurious boundary modes; the pencil is reduced to a
standard eigenproblem by applying the Dirichlet inverse of (D^2 - T^2).
Eigenvalues are accepted only when two resolutions agree.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg as sla

from .errors import BracketError, DomainError, NeutralToleranceError, ResolutionError
from .os_solver import bordered_system, os_operator_matrix
from .profiles import Profile, check_admissibility

__all__ = [
    "SpectrumResult",
    "NeutralPoint",
    "os_spectrum",
    "leading_eigenvalue",
    "verify_energy_identity",
    "small_at_certificate",
    "neutral_search",
    "kernel_witness",
    "golden_section_max",
    "poiseuille_phase_speeds",
]

RESOLVE_RTOL = 1e-6
MIN_RESOLVED = 10


@lru_cache(maxsize=16)
def _clamped_blocks(N):
    """Interior operators of the lifted clamped discretization at degree N."""
    from .spectral import chebyshev_diff, chebyshev_nodes

    y = chebyshev_nodes(N)
    D = chebyshev_diff(N)
    D2 = D @ D
    D3 = D @ D2
    D4 = D @ D3
    s = np.zeros(N + 1)
    s[1:N] = 1.0 / (1.0 - y[1:N] ** 2)
    # phi = (1 - y^2) p with p(+-1) = 0: phi'''' = (1-y^2) p'''' - 8 y p''' - 12 p''
    P4 = ((1.0 - y**2)[:, None] * D4 - 8.0 * y[:, None] * D3 - 12.0 * D2) * s[None, :]
    idx = slice(1, N)
    return (
        y[idx].copy(),
        np.ascontiguousarray(D2[idx, idx]),
        np.ascontiguousarray(P4[idx, idx]),
        y.copy(),
        D,
        D2,
    )


def _pencil(A, T, N):
    """Matrices (L, B) of the eigen-pencil on the interior unknowns."""
    y_int, D2i, P4i, *_ = _clamped_blocks(N)
    Ident = np.eye(N - 1)
    B = D2i - T**2 * Ident
    L = (
        P4i
        - 2.0 * T**2 * D2i
        + T**4 * Ident
        + 3.0 * A * T * 1j * ((1.0 - y_int**2)[:, None] * B + 2.0 * Ident)
    )
    return L, B


def _eig(A, T, N, with_vectors=False):
    """Spectrum via the Dirichlet-inverse reduction to a standard problem."""
    L, B = _pencil(A, T, N)
    M = sla.solve(B, L, check_finite=False)
    if with_vectors:
        vals, vecs = sla.eig(M, check_finite=False)
        return vals, vecs
    return sla.eigvals(M, check_finite=False)


def leading_eigenvalue(A, T, N, with_vector=False):
    """Eigenvalue of maximal real part at one resolution."""
    if with_vector:
        vals, vecs = _eig(A, T, N, with_vectors=True)
        i = int(np.argmax(vals.real))
        return vals[i], vecs[:, i]
    vals = _eig(A, T, N)
    return vals[int(np.argmax(vals.real))]


def lift_eigenfunction(vec, N):
    """Full-grid phi, phi', phi'' of an interior eigenvector.

    The lifted representation phi = (1 - y^2) p is exactly clamped, so the
    derivative arrays carry no boundary defect.
    """
    *_, y, D, D2 = _clamped_blocks(N)
    pvec = np.zeros(N + 1, dtype=complex)
    pvec[1:N] = vec / (1.0 - y[1:N] ** 2)
    dp = D @ pvec
    d2p = D2 @ pvec
    phi = (1.0 - y**2) * pvec
    dphi = -2.0 * y * pvec + (1.0 - y**2) * dp
    d2phi = -2.0 * pvec - 4.0 * y * dp + (1.0 - y**2) * d2p
    return phi, dphi, d2phi


@dataclass(frozen=True)
class SpectrumResult:
    """Resolution-filtered spectrum at one (A, T) pair."""

    A: float
    T: float
    eigenvalues: np.ndarray  # resolved, sorted by descending real part
    leading: complex
    n_resolved: int
    N: int
    _vectors: np.ndarray = None
    raw: np.ndarray = None
    resolved_mask: np.ndarray = None

    def eigenfunction(self, i=0):
        """(phi, phi', phi'') on the full grid for the i-th resolved mode."""
        if self._vectors is None:
            raise DomainError("spectrum was computed without eigenvectors")
        return lift_eigenfunction(self._vectors[:, i], self.N)


def os_spectrum(A, T, grid, with_vectors=True):
    """Two-resolution spectrum of the eigen-pencil at (A, T).

    An eigenvalue is resolved when the computations at N and 3N/2 agree to
    1e-6 relative; anything else is discarded as spurious.  Fewer than 10
    resolved eigenvalues raise :class:`ResolutionError`.
    """
    if T <= 0.0:
        raise DomainError("wavenumber T must be positive")
    N = grid.N
    N2 = (3 * N) // 2
    if with_vectors:
        base, vecs = _eig(A, T, N, with_vectors=True)
    else:
        base = _eig(A, T, N)
        vecs = None
    fine = _eig(A, T, N2)
    dist = np.abs(base[:, None] - fine[None, :])
    nearest = dist.min(axis=1)
    mask = nearest <= RESOLVE_RTOL * (1.0 + np.abs(base))
    if int(mask.sum()) < MIN_RESOLVED:
        raise ResolutionError(
            f"only {int(mask.sum())} eigenvalues agree between N={N} and N={N2}"
        )
    order = np.argsort(-base[mask].real)
    resolved = base[mask][order]
    kept_vecs = vecs[:, mask][:, order] if vecs is not None else None
    return SpectrumResult(
        A=float(A),
        T=float(T),
        eigenvalues=resolved,
        leading=complex(resolved[0]),
        n_resolved=int(mask.sum()),
        N=N,
        _vectors=kept_vecs,
        raw=base,
        resolved_mask=mask,
    )


def verify_energy_identity(A, T, eigfun, lam, weights=None, N=None):
    """Residual of the integrated eigen-identity for a computed pair.

    Testing the equation against the conjugate mode and integrating by
    parts gives

        int |phi''|^2 + (2T^2 + lam)|phi'|^2 + (T^4 + lam T^2)|phi|^2
          = 3 A T i int [(1 - y^2)(|phi'|^2 + T^2 |phi|^2) - 2|phi|^2]
            - 6 A T i int y phi' conj(phi);

    the return value is the relative defect, homogeneous of degree zero in
    the eigenfunction scaling.
    """
    if not isinstance(eigfun, tuple):
        raise DomainError("pass the (phi, phi', phi'') triple from eigenfunction()")
    phi, dphi, d2phi = eigfun
    n = len(phi) - 1
    from .spectral import chebyshev_nodes, clenshaw_curtis_weights

    w = clenshaw_curtis_weights(n) if weights is None else weights
    y = chebyshev_nodes(n)
    i0 = np.sum(w * np.abs(phi) ** 2)
    i1 = np.sum(w * np.abs(dphi) ** 2)
    i2 = np.sum(w * np.abs(d2phi) ** 2)
    lhs = i2 + (2.0 * T**2 + lam) * i1 + (T**4 + lam * T**2) * i0
    rhs = 3.0 * A * T * 1j * (
        np.sum(w * (1.0 - y**2) * (np.abs(dphi) ** 2 + T**2 * np.abs(phi) ** 2))
        - 2.0 * i0
    ) - 6.0 * A * T * 1j * np.sum(w * y * dphi * np.conj(phi))
    # scale by the term magnitudes: |lhs| + |rhs| degenerates when both
    # sides vanish (e.g. the self-adjoint pencil at A = 0)
    scale = i2 + (2.0 * T**2 + abs(lam)) * i1 + (T**4 + abs(lam) * T**2) * i0 + abs(rhs)
    return float(abs(lhs - rhs) / scale) if scale > 0.0 else 0.0


def small_at_certificate(AT_bound, samples, grid):
    """True iff every sampled (A, T) with |A T| <= AT_bound is stable."""
    if AT_bound <= 0.0:
        raise DomainError("AT_bound must be positive")
    for A, T in samples:
        if abs(A * T) > AT_bound:
            continue
        res = os_spectrum(A, T, grid, with_vectors=False)
        if res.leading.real >= 0.0:
            return False
    return True


def golden_section_max(f, a, b, tol, warm=None):
    """Maximize a unimodal scalar function on [a, b]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    invphi2 = (3.0 - math.sqrt(5.0)) / 2.0
    h = b - a
    c, d = a + invphi2 * h, a + invphi * h
    yc, yd = f(c), f(d)
    while h > tol:
        if yc > yd:
            b, d, yd = d, c, yc
            h = b - a
            c = a + invphi2 * h
            yc = f(c)
        else:
            a, c, yc = c, d, yd
            h = b - a
            d = a + invphi * h
            yd = f(d)
    return (c, yc) if yc > yd else (d, yd)


@dataclass(frozen=True)
class NeutralPoint:
    """Parameters of the located neutral crossing Re lambda = 0."""

    A1: float
    T0: float
    lambda1: complex
    C_counter: float
    reversal_confirmed: bool
    N: int
    trace: tuple = None

    def profile(self):
        return Profile(A=self.A1, B=0.0, C=self.C_counter)


def _max_growth(A, T_lo, T_hi, N, T_tol, trace, coarse=9):
    """Maximize the leading growth rate over T; guards unimodality."""

    def g(T):
        lam = leading_eigenvalue(A, T, N)
        trace.append({"A": A, "T": T, "re": lam.real, "im": lam.imag, "N": N})
        return lam.real

    Ts = np.linspace(T_lo, T_hi, coarse)
    vals = [g(T) for T in Ts]
    i = int(np.argmax(vals))
    if i in (0, coarse - 1):
        raise BracketError(
            f"growth rate not interior-maximized on T in [{T_lo}, {T_hi}] at A={A}"
        )
    T_star, re_star = golden_section_max(g, Ts[i - 1], Ts[i + 1], T_tol)
    return T_star, re_star


def neutral_search(
    T_range,
    minus3A_range,
    tol=1e-6,
    N=200,
    N_check=300,
    T_tol=2e-5,
    agreement_rtol=1e-3,
):
    """Locate the neutral crossing by bisection in |A| over max-T growth.

    Outer bisection runs on a = -3A (the profile amplitude); the inner
    maximization over T uses golden-section inside a coarse-scan bracket.
    The search is carried out independently at two resolutions N and N_check;
    their (A1, T0) must agree to ``agreement_rtol`` or the search fails
    with the best iterates attached.  The returned point carries the
    finer-resolution values.
    """

    def search_at(Nres, a_lo, a_hi, t_lo, t_hi, trace):
        g_lo, _t = _probe(Nres, a_lo, t_lo, t_hi, trace)
        g_hi, _t2 = _probe(Nres, a_hi, t_lo, t_hi, trace)
        if not (g_lo[1] < 0.0 < g_hi[1]):
            raise BracketError(
                f"no neutral crossing bracketed on -3A in [{a_lo}, {a_hi}] "
                f"(growth {g_lo[1]:.3e} .. {g_hi[1]:.3e})"
            )
        t_last = g_lo[0]
        best = None
        while True:
            a_mid = 0.5 * (a_lo + a_hi)
            span = 0.25 * (t_hi - t_lo)
            lo = max(t_lo, t_last - span)
            hi = min(t_hi, t_last + span)
            try:
                T_star, re_star = _max_growth(-a_mid / 3.0, lo, hi, Nres, T_tol, trace)
            except BracketError:
                T_star, re_star = _max_growth(-a_mid / 3.0, t_lo, t_hi, Nres, T_tol, trace)
            t_last = T_star
            best = (a_mid, T_star, re_star)
            if abs(re_star) <= tol:
                return best
            if re_star > 0.0:
                a_hi = a_mid
            else:
                a_lo = a_mid
            if (a_hi - a_lo) <= 1e-12 * a_hi:
                raise NeutralToleranceError(
                    f"bisection exhausted at -3A={a_mid} with growth {re_star:.3e}",
                    best=best,
                )

    def _probe(Nres, a, t_lo, t_hi, trace):
        res = _max_growth(-a / 3.0, t_lo, t_hi, Nres, T_tol, trace)
        return res, None

    t_lo, t_hi = map(float, T_range)
    a_lo, a_hi = map(float, minus3A_range)
    trace = []
    a1_c, T0_c, _ = search_at(N, a_lo, a_hi, t_lo, t_hi, trace)
    # independent fine-resolution search on a warm bracket
    pad_a = max(20.0 * tol / 9.4e-5, 5e-3 * a1_c)
    pad_t = max(0.05 * (t_hi - t_lo), 50 * T_tol)
    a1_f, T0_f, _re = search_at(
        N_check,
        max(a_lo, a1_c - pad_a),
        min(a_hi, a1_c + pad_a),
        max(t_lo, T0_c - pad_t),
        min(t_hi, T0_c + pad_t),
        trace,
    )
    best = {"coarse": (a1_c, T0_c), "fine": (a1_f, T0_f)}
    if abs(a1_f - a1_c) > agreement_rtol * a1_f or abs(T0_f - T0_c) > agreement_rtol * T0_f:
        raise NeutralToleranceError(
            f"resolutions N={N} and N={N_check} disagree: "
            f"-3A {a1_c:.4f} vs {a1_f:.4f}, T {T0_c:.6f} vs {T0_f:.6f}",
            best=best,
        )
    A1 = -a1_f / 3.0
    lam1 = leading_eigenvalue(A1, T0_f, N_check)
    C = -3.0 * A1 + lam1.imag / T0_f
    rep = check_admissibility(Profile(A=A1, B=0.0, C=C))
    return NeutralPoint(
        A1=float(A1),
        T0=float(T0_f),
        lambda1=complex(lam1),
        C_counter=float(C),
        reversal_confirmed=bool(rep.reversal and not rep.satisfies_abc),
        N=N_check,
        trace=tuple(trace),
    )


def kernel_witness(p, xi, grid):
    """Normalized smallest singular value of the homogeneous mode operator.

    The clamped operator is preconditioned by its own constant-coefficient
    fourth-order part (identity-plus-compact form), making both extreme
    singular values resolution-stable; the raw collocation matrix has a
    condition number set by the discretization, not the physics.  At an
    admissible profile the value stays away from zero (injectivity); at a
    neutral-crossing profile it collapses with the crossing tolerance.
    """
    L = bordered_system(os_operator_matrix(p, xi, grid), grid)
    I = np.eye(grid.N + 1)
    B4 = bordered_system(grid.D4 - 2.0 * xi**2 * grid.D2 + xi**4 * I, grid)
    # common row scaling leaves B4^-1 L unchanged but tames the solve
    s = 1.0 / np.abs(B4).max(axis=1)
    Ltilde = sla.solve(B4 * s[:, None], L * s[:, None], check_finite=False)
    svals = sla.svdvals(Ltilde, check_finite=False)
    return float(svals[-1] / svals[0])


def poiseuille_phase_speeds(reynolds, alpha, N):
    """Classical phase-speed spectrum of the parabolic profile, via QZ.

    Independent route for the mapping check lambda = -i alpha Re c: the
    same pencil is posed for c directly with modes ~ exp(i alpha (x - c t))
    in units of the profile maximum, and solved by the QZ algorithm
    instead of the Dirichlet-inverse reduction.
    """
    A = -reynolds / 3.0
    L, B = _pencil(A, alpha, N)
    Bc = -1j * alpha * reynolds * B
    return sla.eigvals(L, Bc, check_finite=False)
