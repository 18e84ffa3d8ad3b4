"""Quasienergies, cyclic-state geometric phases, and mode-frequency
derivatives with respect to the rotation frequency.

Two independent routes to the geometric phase of a cyclic state are
implemented: 2*pi times the expectation of the axial angular momentum, and
-2*pi times the omega-derivative of the quasienergy at fixed fields. Their
agreement (a Hellmann-Feynman identity for the rotating-frame generator) is
enforced as a runtime invariant.

All omega-derivatives are taken at fixed physical fields (b, b0, w0); the
generator is affine in omega, so shifted coefficient matrices are formed
exactly as S - delta * S_L3.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .errors import DegeneracyError, DomainError, NoCyclicStatesError, NumericalError
from .model import (
    BindingPotential,
    J6,
    QuadraticForm,
    SystemParams,
    build_G,
    build_L3_form,
    build_lambda,
)
from .spectral import (
    Classification,
    ModeSpectrum,
    NormalModeBasis,
    classify,
    normal_mode_basis,
)

__all__ = [
    "FockLabel",
    "PhaseReport",
    "ResonanceShift",
    "DERIVATIVE_METHODS",
    "quasienergy",
    "expectation_quadratic",
    "dmode_domega",
    "aa_phase",
    "berry_phase_adiabatic",
    "cos_theta",
    "resonance_shift",
]

DERIVATIVE_METHODS = ("implicit", "perturbative", "finite_diff")

_SL3 = build_L3_form().S


@dataclass(frozen=True)
class FockLabel:
    """Occupation numbers (n1, n2, n3) in the tracked mode order."""

    n1: int
    n2: int
    n3: int

    def __post_init__(self):
        for n in (self.n1, self.n2, self.n3):
            if int(n) != n or n < 0:
                raise DomainError(f"occupation numbers must be integers >= 0, got {self}")

    def as_array(self) -> np.ndarray:
        return np.array([self.n1, self.n2, self.n3], dtype=float)


@dataclass(frozen=True)
class PhaseReport:
    """Quasienergy and geometric-phase data for one cyclic state.

    ``aa_phase_eq7`` is None at omega = 0, where no cyclic motion exists and
    only the adiabatic (derivative) route is defined. Phases are reported
    unwrapped; modular reduction is left to callers.
    """

    quasienergy: float
    aa_phase_eq7: Optional[float]
    aa_phase_eq8: float
    dfreq_domega: Tuple[float, float, float]
    method_spread: float


def quasienergy(basis: NormalModeBasis, n: FockLabel) -> float:
    """E = sum_i eps_i * freq_i * (n_i + 1/2)."""
    return float(np.sum(basis.signs * basis.freqs * (n.as_array() + 0.5)))


def _ladder_transform(Q: np.ndarray, basis: NormalModeBasis) -> np.ndarray:
    """Coefficient matrix of Q in the (A, A^dag) operator basis."""
    C = np.vstack([basis.coeffs, np.conj(basis.coeffs)])
    Cinv = np.linalg.inv(C)
    return Cinv.T @ Q @ Cinv


def _diagonal_coefficients(Q, basis: NormalModeBasis):
    """Per-mode coefficients (q, q0) with <Q> = sum q_i (n_i + 1/2) + q0."""
    Qmat = Q.S if isinstance(Q, QuadraticForm) else np.asarray(Q, dtype=float)
    M = _ladder_transform(Qmat, basis)
    d12 = np.diag(M[:3, 3:])
    d21 = np.diag(M[3:, :3])
    q = 0.5 * np.real(d12 + d21)
    q0 = float(np.sum(basis.signs * np.real(d12 - d21)) / 4.0)
    return q, q0


def expectation_quadratic(Q, basis: NormalModeBasis, n: FockLabel) -> float:
    """Expectation of a quadratic observable (1/2) u^T Q u in state |n1 n2 n3>.

    Exact for any symmetric Q: only the number-conserving ladder products
    survive the diagonal expectation.
    """
    q, q0 = _diagonal_coefficients(Q, basis)
    return float(np.sum(q * (n.as_array() + 0.5)) + q0)


def cos_theta(k: float) -> float:
    """Cosine of the precession-cone semiangle, (1 + k^2)^(-1/2)."""
    if k < 0:
        raise DomainError(f"field ratio k must be >= 0, got {k}")
    return 1.0 / math.sqrt(1.0 + k * k)


def _shifted_lambda(S: np.ndarray, delta_omega: float) -> np.ndarray:
    # the generator is affine in omega: S(omega + d) = S(omega) - d * S_L3
    return J6 @ (S - delta_omega * _SL3)


def _confined_spectrum(S: np.ndarray, context: str) -> ModeSpectrum:
    spec = classify(J6 @ S)
    if spec.classification is Classification.UNCONFINED:
        raise NoCyclicStatesError(f"no cyclic motions: {context} is Unconfined")
    if spec.classification is Classification.BOUNDARY:
        raise DegeneracyError(
            f"{context} is a Boundary point (degenerate or zero mode); "
            "evaluate at a k > 0 or omega > 0 offset"
        )
    return spec


def _dmodes_perturbative(S: np.ndarray, freqs: np.ndarray) -> np.ndarray:
    """First-order eigenvalue shifts via left/right eigenvectors.

    dlambda_i = w_i^H (dLambda/domega) v_i / (w_i^H v_i) with
    dLambda/domega = -J S_L3 constant.
    """
    L = J6 @ S
    dL = -J6 @ _SL3
    ev, VR = np.linalg.eig(L)
    VRi = np.linalg.inv(VR)  # rows are the dual (left) eigenvectors
    out = np.empty(len(freqs))
    for m, w in enumerate(freqs):
        i = int(np.argmin(np.abs(ev - 1j * w)))
        out[m] = float((VRi[i] @ dL @ VR[:, i]).imag)
    return out


def _char_det(L: np.ndarray, lam: complex) -> complex:
    return complex(np.linalg.det(lam * np.eye(6) - L))


def _circle_derivative(f, n: int, radius: float) -> complex:
    """Exact first Taylor coefficient of a polynomial of degree < n.

    Discrete orthogonality of the n-th roots of unity makes
    (1/(n r)) sum_k f(r w_k) conj(w_k) exact, with no aliasing.
    """
    thetas = 2.0 * np.pi * np.arange(n) / n
    nodes = radius * np.exp(1j * thetas)
    vals = np.array([f(z) for z in nodes])
    return complex(np.sum(vals * np.exp(-1j * thetas)) / (n * radius))


def _dmodes_implicit(S: np.ndarray, freqs: np.ndarray) -> np.ndarray:
    """Implicit differentiation of det(lambda I - Lambda(omega)) = 0.

    Both partial derivatives are exact: the determinant is a polynomial of
    degree 6 in lambda and degree <= 4 in omega, recovered from circle nodes
    by the discrete Cauchy formula.
    """
    L = J6 @ S
    out = np.empty(len(freqs))
    for m, w in enumerate(freqs):
        lam0 = 1j * w
        dD_dlam = _circle_derivative(
            lambda z: _char_det(L, lam0 + z), 7, 0.5 * (1.0 + abs(lam0))
        )
        dD_domega = _circle_derivative(
            lambda d: _char_det(_shifted_lambda(S, d), lam0), 5, 0.5
        )
        out[m] = float((-dD_domega / dD_dlam).imag)
    return out


def _positive_freqs(L: np.ndarray) -> np.ndarray:
    ev = np.linalg.eigvals(L)
    return np.sort(ev.imag[ev.imag > 0])[::-1]


def _dmodes_finite_diff(S: np.ndarray, freqs: np.ndarray) -> np.ndarray:
    """Central differences of the tracked frequencies, Richardson-extrapolated once."""
    h = 1e-5

    def diff(step):
        fp = _positive_freqs(_shifted_lambda(S, step))
        fm = _positive_freqs(_shifted_lambda(S, -step))
        out = np.empty(len(freqs))
        for m, w in enumerate(freqs):
            wp = fp[np.argmin(np.abs(fp - w))]
            wm = fm[np.argmin(np.abs(fm - w))]
            out[m] = (wp - wm) / (2.0 * step)
        return out

    d_h = diff(h)
    d_h2 = diff(h / 2.0)
    return (4.0 * d_h2 - d_h) / 3.0


_DMODE_DISPATCH = {
    "perturbative": lambda S, f: _dmodes_perturbative(S, f),
    "implicit": lambda S, f: _dmodes_implicit(S, f),
    "finite_diff": lambda S, f: _dmodes_finite_diff(S, f),
}


def dmode_domega(
    params: SystemParams,
    binding: BindingPotential,
    method: str = "perturbative",
) -> np.ndarray:
    """d(freq_i)/d(omega) at fixed fields, for the three modes in tracked order.

    The finite-difference step is 1e-5 * max(1, omega); the derivative is
    evaluated directly at the params' omega (omega = 0 included, where the
    shifted matrices remain exact).
    """
    if method not in DERIVATIVE_METHODS:
        raise DomainError(f"unknown derivative method {method!r}; use {DERIVATIVE_METHODS}")
    S = build_G(params, binding).S
    spec = _confined_spectrum(S, f"parameter point {params}")
    return _DMODE_DISPATCH[method](S, spec.freqs)


def _derivative_bundle(S: np.ndarray, freqs: np.ndarray):
    dp = _dmodes_perturbative(S, freqs)
    di = _dmodes_implicit(S, freqs)
    df = _dmodes_finite_diff(S, freqs)
    spread = 0.0
    for a, b in ((dp, di), (dp, df), (di, df)):
        spread = max(spread, float(np.max(np.abs(a - b) / (1.0 + np.abs(dp)))))
    return dp, spread


def _assemble_report(
    basis: NormalModeBasis,
    n: FockLabel,
    dfreq: np.ndarray,
    spread: float,
    eq7: Optional[float],
) -> PhaseReport:
    energy = quasienergy(basis, n)
    eq8 = -2.0 * math.pi * float(np.sum(basis.signs * (n.as_array() + 0.5) * dfreq))
    if eq7 is not None and abs(eq7 - eq8) > 1e-6 * (1.0 + abs(eq8)):
        raise NumericalError(
            f"geometric-phase routes disagree: <L3> route {eq7:.12g} vs "
            f"derivative route {eq8:.12g}"
        )
    return PhaseReport(
        quasienergy=energy,
        aa_phase_eq7=eq7,
        aa_phase_eq8=eq8,
        dfreq_domega=tuple(float(d) for d in dfreq),
        method_spread=spread,
    )


def aa_phase(params: SystemParams, binding: BindingPotential, n: FockLabel) -> PhaseReport:
    """Geometric phase of the cyclic state |n1 n2 n3> at rotation frequency omega > 0.

    Both routes are computed: 2*pi <L3> through the ladder-basis expectation,
    and -2*pi sum eps_i (n_i + 1/2) d(freq_i)/d(omega) from the derivative of
    the quasienergy; their consistency is enforced. Valid at any rotation
    speed, not only adiabatically.
    """
    if params.omega <= 0:
        raise DomainError("aa_phase requires omega > 0; use berry_phase_adiabatic at omega = 0")
    S = build_G(params, binding).S
    spec = _confined_spectrum(S, f"parameter point {params}")
    basis = normal_mode_basis(spec, S)
    dfreq, spread = _derivative_bundle(S, spec.freqs)
    eq7 = 2.0 * math.pi * expectation_quadratic(_SL3, basis, n)
    return _assemble_report(basis, n, dfreq, spread, eq7)


def berry_phase_adiabatic(k: float, binding: BindingPotential, n: FockLabel) -> PhaseReport:
    """Adiabatic limit of the geometric phase at field ratio k, omega = 0.

    Only the derivative route exists (no cyclic motion without rotation);
    the <L3> route is reported as absent. The derivative is evaluated
    directly at omega = 0 through the perturbative formula, not by
    small-omega extrapolation.
    """
    if k <= 0:
        raise DomainError(f"field ratio k must be > 0, got {k}")
    params = SystemParams(b=k, b0=1.0, w0=getattr(binding, "w0", 4.0 / 3.0), omega=0.0)
    S = build_G(params, binding).S
    spec = _confined_spectrum(S, f"static point k={k}")
    basis = normal_mode_basis(spec, S)
    dfreq, spread = _derivative_bundle(S, spec.freqs)
    return _assemble_report(basis, n, dfreq, spread, eq7=None)


@dataclass(frozen=True)
class ResonanceShift:
    """First-order and exact resonance-peak shift under omega -> omega + delta.

    omega_p_linear applies the geometric-phase formula
    omega_p - (beta_n - beta_n') delta / (2 pi); omega_p_exact recomputes the
    quasienergy gap at the shifted rotation frequency with mode tracking.
    """

    omega_p: float
    omega_p_linear: float
    omega_p_exact: float
    beta_n: float
    beta_n_prime: float
    delta_omega: float


def resonance_shift(
    params: SystemParams,
    binding: BindingPotential,
    n: FockLabel,
    n_prime: FockLabel,
    delta_omega: float,
) -> ResonanceShift:
    """Shift of the resonance peak omega_p = E_n - E_n' under a small rotation change."""
    report_n = aa_phase(params, binding, n)
    report_np = aa_phase(params, binding, n_prime)
    omega_p = report_n.quasienergy - report_np.quasienergy
    beta_n = report_n.aa_phase_eq8
    beta_np = report_np.aa_phase_eq8
    linear = omega_p - (beta_n - beta_np) * delta_omega / (2.0 * math.pi)

    S = build_G(params, binding).S
    spec = _confined_spectrum(S, f"parameter point {params}")
    S2 = S - delta_omega * _SL3
    spec2 = _confined_spectrum(S2, f"shifted point omega={params.omega + delta_omega}")
    perm = _match_by_frequency_overlap(spec, spec2)
    freqs2 = spec2.freqs[list(perm)]
    signs2 = spec2.krein_signs[list(perm)]
    if not np.array_equal(signs2, spec.krein_signs):
        raise NumericalError("Krein signs changed across the omega shift; reduce delta_omega")
    exact = float(
        np.sum(signs2 * freqs2 * (n.as_array() + 0.5))
        - np.sum(signs2 * freqs2 * (n_prime.as_array() + 0.5))
    )
    return ResonanceShift(
        omega_p=omega_p,
        omega_p_linear=linear,
        omega_p_exact=exact,
        beta_n=beta_n,
        beta_n_prime=beta_np,
        delta_omega=delta_omega,
    )


def _match_by_frequency_overlap(spec: ModeSpectrum, spec2: ModeSpectrum):
    from .spectral import track_modes

    try:
        return track_modes(spec, spec2)
    except DegeneracyError:
        # adjacent spectra too close to distinguish by overlap: keep the order
        return (0, 1, 2)
