"""Eigenanalysis of the dynamical matrix: stability classification, normal
modes with Krein signs, mode tracking, and the classical propagator.

A parameter point is Confined when all six eigenvalues of Lambda are purely
imaginary, nonzero and mutually distinct (hence semisimple); Boundary when the
spectrum is imaginary but degenerate or contains a zero mode; Unconfined when
any eigenvalue has a real part beyond tolerance. Boundary is a first-class
outcome, not an error: region edges and exactly-commensurate configurations
land there.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np
import scipy.linalg

from .errors import DegeneracyError, DomainError, NumericalError, SaturationError
from .model import DynamicalMatrix, J6, QuadraticForm

__all__ = [
    "Classification",
    "Tolerances",
    "Mode",
    "ModeSpectrum",
    "NormalModeBasis",
    "classify",
    "stable_modes",
    "krein_sign",
    "normal_mode_basis",
    "track_modes",
    "propagate",
    "boundedness_probe",
    "ProbeResult",
]


class Classification(enum.Enum):
    CONFINED = "C"
    UNCONFINED = "U"
    BOUNDARY = "B"


@dataclass(frozen=True)
class Tolerances:
    """Classification tolerances, scaled by (1 + ||Lambda||_F).

    ``gap_floor``/``zero_floor`` are absolute lower bounds used by grid sweeps
    to mark cells whose spectral gaps are below the grid's own resolution; the
    defaults leave the pointwise spectral rules unchanged.
    """

    re_factor: float = 1e-9
    gap_factor: float = 1e-7
    gap_floor: float = 0.0
    zero_floor: float = 0.0

    def re_tol(self, scale: float) -> float:
        return self.re_factor * (1.0 + scale)

    def gap_tol(self, scale: float) -> float:
        return max(self.gap_factor * (1.0 + scale), self.gap_floor)

    def zero_tol(self, scale: float) -> float:
        return max(self.gap_factor * (1.0 + scale), self.zero_floor)


DEFAULT_TOLERANCES = Tolerances()


@dataclass(frozen=True)
class Mode:
    """A stable normal mode: eigenvalue +i*freq of Lambda with its energy sign."""

    freq: float
    krein_sign: int
    eigvec: np.ndarray


@dataclass(frozen=True)
class ModeSpectrum:
    classification: Classification
    modes: Tuple[Mode, ...]
    raw_eigenvalues: np.ndarray

    @property
    def freqs(self) -> np.ndarray:
        return np.array([m.freq for m in self.modes])

    @property
    def krein_signs(self) -> np.ndarray:
        return np.array([m.krein_sign for m in self.modes])


def _as_lambda(lam) -> np.ndarray:
    if isinstance(lam, DynamicalMatrix):
        return lam.Lambda
    L = np.asarray(lam, dtype=float)
    if L.shape != (6, 6):
        raise DomainError(f"expected a 6x6 dynamical matrix, got shape {L.shape}")
    return L


def krein_sign(v: np.ndarray, S) -> int:
    """Energy sign of a stable mode, sign(Re(conj(v)^T S v)).

    Well-defined for a simple eigenvector of J S with eigenvalue +i*freq,
    freq > 0; raises DegeneracyError when the energy form is too close to
    zero to carry a sign.
    """
    Smat = S.S if isinstance(S, QuadraticForm) else np.asarray(S, dtype=float)
    quad = np.conj(v) @ Smat @ v
    scale = np.linalg.norm(Smat) * float(np.real(np.conj(v) @ v))
    if abs(np.imag(quad)) > 1e-10 * max(abs(quad), 1e-300):
        raise NumericalError("mode energy form is not real; eigenvector suspect")
    if abs(quad) < 1e-10 * scale:
        raise DegeneracyError(
            "mode energy form vanishes (boundary degeneracy); Krein sign undefined"
        )
    return 1 if np.real(quad) > 0 else -1


def _eig_sorted(L: np.ndarray):
    try:
        ev, V = np.linalg.eig(L)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise NumericalError(f"eigensolver failed on Lambda={L!r}") from exc
    return ev, V


def classify(lam, tolerances: Tolerances | None = None) -> ModeSpectrum:
    """Classify a dynamical matrix as Confined / Unconfined / Boundary.

    When Confined, the three positive-frequency modes are returned sorted by
    descending frequency (ties broken by Krein sign, +1 first), each with a
    residual-checked eigenvector.
    """
    L = _as_lambda(lam)
    tol = tolerances or DEFAULT_TOLERANCES
    if not np.all(np.isfinite(L)):
        raise DomainError("dynamical matrix must be finite")
    ev, V = _eig_sorted(L)
    scale = float(np.linalg.norm(L))
    tau_re = tol.re_tol(scale)
    if np.max(np.abs(ev.real)) > tau_re:
        return ModeSpectrum(Classification.UNCONFINED, (), ev)
    tau_gap = tol.gap_tol(scale)
    tau_zero = tol.zero_tol(scale)
    ims = np.sort(ev.imag)
    if np.min(np.diff(ims)) <= tau_gap or np.min(np.abs(ev)) <= tau_zero:
        return ModeSpectrum(Classification.BOUNDARY, (), ev)
    S = -J6 @ L
    modes = []
    for i in np.where(ev.imag > 0)[0]:
        freq = float(ev[i].imag)
        v = V[:, i]
        residual = np.linalg.norm(L @ v - 1j * freq * v)
        if residual > 1e-9 * scale:
            raise NumericalError(
                f"eigenvector residual {residual:.2e} too large at freq {freq}; "
                f"Lambda={L!r}"
            )
        try:
            sign = krein_sign(v, S)
        except DegeneracyError:
            # vanishing mode energy form: an imminent Krein collision below
            # the gap resolution
            return ModeSpectrum(Classification.BOUNDARY, (), ev)
        modes.append(Mode(freq=freq, krein_sign=sign, eigvec=v))
    modes.sort(key=lambda m: (-m.freq, -m.krein_sign))
    if len(modes) != 3:  # pragma: no cover - excluded by the gap rule
        raise NumericalError("confined spectrum did not yield three positive modes")
    return ModeSpectrum(Classification.CONFINED, tuple(modes), ev)


def stable_modes(lam, tolerances: Tolerances | None = None) -> List[Mode]:
    """Simple purely-imaginary positive-frequency modes, even at Unconfined points.

    Used for tracking the surviving branch through a stability loss; returns
    modes sorted by descending frequency.
    """
    L = _as_lambda(lam)
    tol = tolerances or DEFAULT_TOLERANCES
    ev, V = _eig_sorted(L)
    scale = float(np.linalg.norm(L))
    tau_re = tol.re_tol(scale)
    tau_gap = tol.gap_tol(scale)
    S = -J6 @ L
    out = []
    for i in range(6):
        if abs(ev[i].real) > tau_re or ev[i].imag <= tol.zero_tol(scale):
            continue
        gaps = np.abs(np.delete(ev, i) - ev[i])
        if np.min(gaps) <= tau_gap:
            continue
        out.append(Mode(freq=float(ev[i].imag), krein_sign=krein_sign(V[:, i], S), eigvec=V[:, i]))
    out.sort(key=lambda m: (-m.freq, -m.krein_sign))
    return out


@dataclass(frozen=True)
class NormalModeBasis:
    """Ladder-operator coefficients A_i = coeffs[i] . u with signature signs.

    The rows satisfy i c_i^T J conj(c_j) = signs[j] delta_ij and
    i c_i^T J c_j = 0, which is the commutator normalization
    [A_i, A_j^dag] = eps_j delta_ij, [A_i, A_j] = 0 under [u_a, u_b] = i J_ab.
    """

    coeffs: np.ndarray
    signs: np.ndarray
    freqs: np.ndarray

    def ladder_commutators(self):
        """([A_i, A_j^dag], [A_i, A_j]) matrices, for verification."""
        C = 1j * self.coeffs @ J6 @ np.conj(self.coeffs.T)
        D = 1j * self.coeffs @ J6 @ self.coeffs.T
        return C, D


def normal_mode_basis(spectrum: ModeSpectrum, S) -> NormalModeBasis:
    """Ladder coefficients for a confined spectrum.

    Each coefficient vector is S v_i rescaled so the commutator normalization
    holds; the deterministic phase convention makes the largest-magnitude
    component real positive.
    """
    if spectrum.classification is not Classification.CONFINED:
        raise DomainError("normal-mode basis requires a Confined spectrum")
    Smat = S.S if isinstance(S, QuadraticForm) else np.asarray(S, dtype=float)
    rows = []
    for mode in spectrum.modes:
        v = mode.eigvec
        quad = float(np.real(np.conj(v) @ Smat @ v))
        pivot = mode.freq * abs(quad)
        if pivot < 1e-12 * (1.0 + np.linalg.norm(Smat)):
            raise DegeneracyError("normalization pivot below tolerance (degenerate mode)")
        c = (Smat @ v) / math.sqrt(pivot)
        p = int(np.argmax(np.abs(c)))
        c = c * (np.conj(c[p]) / abs(c[p]))
        rows.append(c)
    basis = NormalModeBasis(
        coeffs=np.array(rows),
        signs=spectrum.krein_signs.astype(int),
        freqs=spectrum.freqs,
    )
    C, D = basis.ladder_commutators()
    err = max(np.abs(C - np.diag(basis.signs)).max(), np.abs(D).max())
    if err > 1e-9:
        raise NumericalError(f"ladder commutator normalization failed (err={err:.2e})")
    return basis


def track_modes(prev: ModeSpectrum, nxt: ModeSpectrum) -> Tuple[int, int, int]:
    """Pairing of modes between two confined spectra by eigenvector overlap.

    Returns the permutation p with nxt.modes[p[i]] continuing prev.modes[i].
    Raises DegeneracyError when the best and runner-up overlaps for some mode
    are within 1e-3 (near-degeneracy; refine the sweep step).
    """
    if (
        prev.classification is not Classification.CONFINED
        or nxt.classification is not Classification.CONFINED
    ):
        raise DomainError("mode tracking requires two Confined spectra")
    P = np.empty((3, 3))
    for i, mp in enumerate(prev.modes):
        vp = mp.eigvec / np.linalg.norm(mp.eigvec)
        for j, mn in enumerate(nxt.modes):
            vn = mn.eigvec / np.linalg.norm(mn.eigvec)
            P[i, j] = abs(np.vdot(vp, vn))
    for i in range(3):
        best = np.sort(P[i])[::-1]
        if best[0] - best[1] < 1e-3:
            raise DegeneracyError(
                f"ambiguous mode pairing for mode {i} (overlaps {best[0]:.4f}, "
                f"{best[1]:.4f}); refine the sweep step"
            )
    perms = [(0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)]
    scores = [sum(P[i, p[i]] for i in range(3)) for p in perms]
    return perms[int(np.argmax(scores))]


def propagate(lam, u0, t: float, method: str = "expm") -> np.ndarray:
    """Flow map u(t) = exp(Lambda t) u0.

    method='expm' uses scaling-and-squaring; method='spectral' reconstructs
    from the eigendecomposition (diagonalizable Lambda only).
    """
    L = _as_lambda(lam)
    u0 = np.asarray(u0, dtype=float)
    ev = np.linalg.eigvals(L)
    growth = float(np.max(ev.real))
    if growth * t > 500.0:
        raise SaturationError(
            f"propagation over t={t} overflows (growth exponent {growth:.3e})",
            growth_exponent=growth,
        )
    if method == "expm":
        return scipy.linalg.expm(L * t) @ u0
    if method == "spectral":
        evs, V = np.linalg.eig(L)
        coeff = np.linalg.solve(V, u0.astype(complex))
        return np.real(V @ (np.exp(evs * t) * coeff))
    raise DomainError(f"unknown propagation method {method!r}")


@dataclass(frozen=True)
class ProbeResult:
    bounded: bool
    growth_exponent: float
    max_ratio: float
    horizon_periods: int


def boundedness_probe(lam, u0, horizon: int = 1000) -> ProbeResult:
    """Sample ||u(t)|| over `horizon` characteristic periods and decide boundedness.

    A trajectory is reported bounded when the sup-norm ratio stays within 10x
    of the initial norm, or when the norm envelope shows no sustained growth
    between the two halves of the horizon (linear phase-mixing transients on
    confined spectra can overshoot a fixed ratio without any actual growth).
    The growth exponent is the fitted slope of log||u|| over the second half.
    """
    if horizon < 1:
        raise DomainError("horizon must be >= 1 period")
    L = _as_lambda(lam)
    u = np.asarray(u0, dtype=float).copy()
    rho = float(np.max(np.abs(np.linalg.eigvals(L))))
    period = 2.0 * math.pi / rho if rho > 1e-12 else 2.0 * math.pi
    samples_per_period = 4
    dt = period / samples_per_period
    step = scipy.linalg.expm(L * dt)
    n_steps = horizon * samples_per_period
    norms = np.empty(n_steps + 1)
    norms[0] = np.linalg.norm(u)
    if norms[0] == 0:
        raise DomainError("initial vector must be nonzero")
    taken = n_steps
    for i in range(1, n_steps + 1):
        u = step @ u
        norms[i] = np.linalg.norm(u)
        if norms[i] > 1e12 * norms[0]:
            taken = i
            break
    norms = norms[: taken + 1]
    ratio = float(np.max(norms) / norms[0])
    half = len(norms) // 2
    env1 = float(np.max(norms[:half])) if half else norms[0]
    env2 = float(np.max(norms[half:]))
    sustained = env2 > 1.2 * env1
    t = np.arange(len(norms)) * dt
    sel = slice(half, None)
    slope = float(np.polyfit(t[sel], np.log(norms[sel]), 1)[0]) if len(norms) - half > 2 else 0.0
    bounded = (ratio <= 10.0 or not sustained) and taken == n_steps
    return ProbeResult(
        bounded=bounded,
        growth_exponent=0.0 if bounded else slope,
        max_ratio=ratio,
        horizon_periods=horizon,
    )
