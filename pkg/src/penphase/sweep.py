"""Parameter-space exploration: the (alpha, alpha0) region map under the loop
constraint w = 4 alpha0 / 3, adiabatic derivative curves over the field ratio
k, and bisection utilities for region boundaries and the critical ratio.

Grid cells are classified with a resolution-aware degeneracy tolerance: a
cell whose spectral gap (or smallest eigenvalue) is below a few grid steps'
worth of gap change cannot be certified as Confined at that resolution and is
recorded as Boundary. This keeps the cell labeling faithful to the true open
confined regions, whose separating collision curves pinch below any fixed
grid resolution near their roots on the alpha = 0 axis; the pointwise
classifier keeps its own much tighter spectral tolerances.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import IO, Optional, Sequence, Tuple

import numpy as np
from scipy import ndimage

from .errors import DomainError, MultiCrossingError, NumericalError
from .model import (
    BindingPotential,
    IsotropicOscillator,
    J6,
    PenningQuadrupole,
    SystemParams,
    build_G,
)
from .phases import _dmodes_perturbative, cos_theta
from .spectral import Classification, classify, stable_modes

__all__ = [
    "GridSpec",
    "RegionMap",
    "CurveTable",
    "KcrResult",
    "sweep_fig1",
    "refine_boundary",
    "find_kcr",
    "curve_fig2",
]

#: Upper bound on how fast frequency gaps vary per unit of (alpha, alpha0);
#: used to scale the grid-resolution Boundary margin.
GAP_SLOPE_SCALE = 4.0

_THREADS_ENV = "PENPHASE_THREADS"


@dataclass(frozen=True)
class GridSpec:
    """Rectangular grid; `steps` counts intervals, so samples = steps + 1."""

    alpha_min: float = 0.0
    alpha_max: float = 3.0
    alpha_steps: int = 600
    alpha0_min: float = 0.0
    alpha0_max: float = 3.0
    alpha0_steps: int = 600

    def __post_init__(self):
        if self.alpha_steps < 1 or self.alpha0_steps < 1:
            raise DomainError("step counts must be positive")
        if self.alpha_max <= self.alpha_min or self.alpha0_max <= self.alpha0_min:
            raise DomainError("grid extents must be increasing")
        if self.alpha_min < 0 or self.alpha0_min < 0:
            raise DomainError("grid extents must be >= 0")

    @property
    def alphas(self) -> np.ndarray:
        return np.linspace(self.alpha_min, self.alpha_max, self.alpha_steps + 1)

    @property
    def alpha0s(self) -> np.ndarray:
        return np.linspace(self.alpha0_min, self.alpha0_max, self.alpha0_steps + 1)

    @property
    def max_step(self) -> float:
        return max(
            (self.alpha_max - self.alpha_min) / self.alpha_steps,
            (self.alpha0_max - self.alpha0_min) / self.alpha0_steps,
        )


def _n_threads() -> int:
    raw = os.environ.get(_THREADS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise DomainError(f"{_THREADS_ENV} must be an integer, got {raw!r}")
    return max(1, n)


def _loop_matrices(alphas: np.ndarray, alpha0s: np.ndarray) -> np.ndarray:
    """Batched dynamical matrices at omega = 1 under the loop constraint."""
    A, A0 = np.meshgrid(alphas, alpha0s, indexing="xy")
    b, b0 = A, A0
    w0 = 4.0 * A0 / 3.0
    S = np.zeros(A.shape + (6, 6))
    S[..., 0, 0] = b0**2 - 0.5 * w0**2
    S[..., 1, 1] = b0**2 + b**2 - 0.5 * w0**2
    S[..., 2, 2] = b**2 + w0**2
    S[..., 0, 2] = S[..., 2, 0] = -b * b0
    S[..., 0, 4] = S[..., 4, 0] = b0 - 1.0
    S[..., 1, 3] = S[..., 3, 1] = 1.0 - b0
    S[..., 1, 5] = S[..., 5, 1] = b
    S[..., 2, 4] = S[..., 4, 2] = -b
    S[..., 3, 3] = S[..., 4, 4] = S[..., 5, 5] = 1.0
    return np.einsum("ij,...jk->...ik", J6, S)


def _classify_block(Lam: np.ndarray, gap_floor: float) -> np.ndarray:
    """Vectorized cell classification; returns 'C'/'U'/'B' codes."""
    ev = np.linalg.eigvals(Lam)
    norm = np.sqrt((Lam**2).sum(axis=(-2, -1)))
    tau_re = 1e-9 * (1.0 + norm)
    tau_gap = np.maximum(1e-7 * (1.0 + norm), gap_floor)
    remax = np.abs(ev.real).max(axis=-1)
    ims = np.sort(ev.imag, axis=-1)
    gaps = np.diff(ims, axis=-1).min(axis=-1)
    minabs = np.abs(ev).min(axis=-1)
    unconf = remax > tau_re
    conf = (~unconf) & (gaps > tau_gap) & (minabs > tau_gap)
    out = np.full(Lam.shape[:-2], "B", dtype="<U1")
    out[unconf] = "U"
    out[conf] = "C"
    return out


def _classify_grid(alphas: np.ndarray, alpha0s: np.ndarray, gap_floor: float) -> np.ndarray:
    """Row-chunked (optionally threaded) classification over the grid."""
    n_rows = len(alpha0s)
    codes = np.empty((n_rows, len(alphas)), dtype="<U1")
    threads = _n_threads()
    chunk = max(1, math.ceil(n_rows / max(threads * 4, 1)))
    blocks = [(i, min(i + chunk, n_rows)) for i in range(0, n_rows, chunk)]

    def work(block):
        lo, hi = block
        codes[lo:hi] = _classify_block(_loop_matrices(alphas, alpha0s[lo:hi]), gap_floor)

    if threads == 1:
        for blk in blocks:
            work(blk)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(work, blocks))
    return codes


_FOUR_CONN = ndimage.generate_binary_structure(2, 1)


@dataclass(frozen=True)
class RegionMap:
    """Cell classification of the (alpha, alpha0) plane with labeled components.

    ``classes[i, j]`` holds 'C'/'U'/'B' at (alpha0s[i], alphas[j]);
    ``component`` holds 1-based ids on Confined cells (4-neighbor
    connectivity) and -1 elsewhere. Unconfined regions are counted as the
    connected components of the non-confined complement that contain at least
    one Unconfined cell, so that sub-resolution collision channels recorded
    as Boundary join the open unstable regions they border.
    """

    grid: GridSpec
    classes: np.ndarray
    component: np.ndarray
    n_components: int
    n_unconfined_regions: int
    auto_extended: bool
    gap_floor: float

    @property
    def alphas(self) -> np.ndarray:
        return self.grid.alphas

    @property
    def alpha0s(self) -> np.ndarray:
        return self.grid.alpha0s

    def to_csv(self, stream: IO[str]) -> None:
        """Rows alpha0-major ascending: header alpha,alpha0,class,component."""
        stream.write("alpha,alpha0,class,component\n")
        alphas, alpha0s = self.alphas, self.alpha0s
        for i in range(len(alpha0s)):
            a0 = f"{alpha0s[i]:.17g}"
            row_cls = self.classes[i]
            row_comp = self.component[i]
            for j in range(len(alphas)):
                stream.write(f"{alphas[j]:.17g},{a0},{row_cls[j]},{row_comp[j]}\n")


def _label_regions(codes: np.ndarray) -> Tuple[np.ndarray, int, int]:
    confined = codes == "C"
    component, n_comp = ndimage.label(confined, structure=_FOUR_CONN)
    component = np.where(confined, component, -1).astype(np.int32)
    complement, _ = ndimage.label(~confined, structure=_FOUR_CONN)
    ids = np.unique(complement[codes == "U"])
    n_unconf = int(len(ids[ids > 0]))
    return component, int(n_comp), n_unconf


def sweep_fig1(
    grid: Optional[GridSpec] = None,
    auto_extend: bool = True,
    gap_scale: float = GAP_SLOPE_SCALE,
) -> RegionMap:
    """Region map of the (alpha, alpha0) plane at omega = 1, w = 4 alpha0 / 3.

    The default window is [0, 3]^2 at 600 steps per axis. When fewer than four
    confined components are found and auto_extend is on, the window grows by
    50% increments (same cell size) up to [0, 10]^2, then the result is
    reported as-is.
    """
    spec = grid or GridSpec()
    extended = False
    while True:
        gap_floor = gap_scale * spec.max_step
        codes = _classify_grid(spec.alphas, spec.alpha0s, gap_floor)
        component, n_comp, n_unconf = _label_regions(codes)
        if not auto_extend or n_comp >= 4 or spec.alpha_max >= 10.0:
            return RegionMap(
                grid=spec,
                classes=codes,
                component=component,
                n_components=n_comp,
                n_unconfined_regions=n_unconf,
                auto_extended=extended,
                gap_floor=gap_floor,
            )
        step = spec.max_step
        new_max = min(spec.alpha_max * 1.5, 10.0)
        new_max0 = min(spec.alpha0_max * 1.5, 10.0)
        spec = GridSpec(
            alpha_min=spec.alpha_min,
            alpha_max=new_max,
            alpha_steps=int(round((new_max - spec.alpha_min) / step)),
            alpha0_min=spec.alpha0_min,
            alpha0_max=new_max0,
            alpha0_steps=int(round((new_max0 - spec.alpha0_min) / step)),
        )
        extended = True


def _loop_classification(alpha: float, alpha0: float) -> Classification:
    params = SystemParams.penning_loop(b0=alpha0, b=alpha, omega=1.0)
    return classify(J6 @ build_G(params).S).classification


def refine_boundary(
    p_confined: Tuple[float, float],
    p_unconfined: Tuple[float, float],
    tol: float = 1e-6,
    prescan: int = 32,
) -> Tuple[float, float]:
    """Bisect a segment between a Confined and an Unconfined point.

    The segment is pre-scanned for multiple classification flips (a region
    sliver raises MultiCrossingError; subdivide and retry). Bisection then
    halves the bracket exactly ceil(log2(length / tol)) times and returns the
    midpoint of the final bracket.
    """
    p0 = np.asarray(p_confined, dtype=float)
    p1 = np.asarray(p_unconfined, dtype=float)
    if _loop_classification(*p0) is not Classification.CONFINED:
        raise DomainError(f"first endpoint {tuple(p0)} is not Confined")
    if _loop_classification(*p1) is Classification.CONFINED:
        raise DomainError(f"second endpoint {tuple(p1)} is not Unconfined/Boundary")
    flips = 0
    prev = True
    for s in np.linspace(0.0, 1.0, prescan + 1)[1:]:
        confined = _loop_classification(*(p0 + s * (p1 - p0))) is Classification.CONFINED
        if confined != prev:
            flips += 1
            prev = confined
    if flips > 1:
        raise MultiCrossingError(
            f"segment {tuple(p0)} -> {tuple(p1)} crosses {flips} boundaries; subdivide"
        )
    length = float(np.linalg.norm(p1 - p0))
    iterations = max(1, math.ceil(math.log2(length / tol)))
    lo, hi = 0.0, 1.0
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if _loop_classification(*(p0 + mid * (p1 - p0))) is Classification.CONFINED:
            lo = mid
        else:
            hi = mid
    mid = 0.5 * (lo + hi)
    return tuple(p0 + mid * (p1 - p0))


@dataclass(frozen=True)
class KcrResult:
    k_cr: float
    bracket: Tuple[float, float]
    tol: float
    iterations: int


def _static_loop_confined(k: float) -> bool:
    params = SystemParams.penning_loop(b0=1.0, b=k, omega=0.0)
    spec = classify(J6 @ build_G(params).S)
    return spec.classification is Classification.CONFINED


def find_kcr(tol: float = 1e-7) -> KcrResult:
    """Critical field ratio where the slow mode pair loses stability at omega = 0.

    Bisection of the static loop classification over k in [0.01, 1.0]; the
    bracket is halved exactly ceil(log2(range / tol)) times.
    """
    if tol < 1e-9:
        raise DomainError(f"tolerance must be >= 1e-9, got {tol}")
    lo, hi = 0.01, 1.0
    if not _static_loop_confined(lo):
        raise NumericalError(f"lower bracket k={lo} is not Confined")
    if _static_loop_confined(hi):
        raise NumericalError(f"upper bracket k={hi} is not Unconfined")
    iterations = math.ceil(math.log2((hi - lo) / tol))
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if _static_loop_confined(mid):
            lo = mid
        else:
            hi = mid
    return KcrResult(k_cr=0.5 * (lo + hi), bracket=(lo, hi), tol=tol, iterations=iterations)


@dataclass(frozen=True)
class CurveTable:
    """Adiabatic derivative curves d(freq_i)/d(omega)|_{omega=0} over the ratio k.

    Columns dw2/dw3 carry NaN where the corresponding mode pair is unstable
    (stable23 False); dw1 follows the branch that stays stable for all k.
    """

    k: np.ndarray
    cos_theta: np.ndarray
    dw: np.ndarray  # (n, 3), NaN where undefined
    stable23: np.ndarray  # bool

    def to_csv(self, stream: IO[str]) -> None:
        stream.write("k,cos_theta,dw1,dw2,dw3,stable23\n")
        for i in range(len(self.k)):
            cells = [f"{self.k[i]:.17g}", f"{self.cos_theta[i]:.17g}"]
            for m in range(3):
                v = self.dw[i, m]
                cells.append("" if math.isnan(v) else f"{v:.17g}")
            cells.append("true" if self.stable23[i] else "false")
            stream.write(",".join(cells) + "\n")


def _static_binding(kind: str, w0: float = 4.0 / 3.0) -> BindingPotential:
    if kind == "penning":
        return PenningQuadrupole(w0)
    if kind == "oscillator":
        return IsotropicOscillator(w0)
    raise DomainError(f"unknown binding kind {kind!r}")


def curve_fig2(
    k_grid: Optional[Sequence[float]] = None,
    binding: str | BindingPotential = "penning",
) -> CurveTable:
    """Derivative curves at omega = 0 on the k-grid (default [0.01, 1.0], 500 points).

    For the loop binding, modes 2 and 3 exist only below the critical ratio;
    their columns are absent (never fabricated) beyond it. The oscillator
    binding keeps all three modes for every k.
    """
    if k_grid is None:
        ks = np.linspace(0.01, 1.0, 500)
    else:
        ks = np.asarray(list(k_grid), dtype=float)
        if ks.ndim != 1 or len(ks) == 0:
            raise DomainError("k grid must be a non-empty 1-D sequence")
        if np.any(ks <= 0):
            raise DomainError("k grid values must be > 0")
        if np.any(np.diff(ks) <= 0):
            raise DomainError("k grid must be strictly increasing")
    bind = _static_binding(binding) if isinstance(binding, str) else binding
    n = len(ks)
    dw = np.full((n, 3), np.nan)
    stable23 = np.zeros(n, dtype=bool)
    ct = np.array([cos_theta(k) for k in ks])
    for i, k in enumerate(ks):
        params = SystemParams(b=k, b0=1.0, w0=getattr(bind, "w0", 4.0 / 3.0), omega=0.0)
        S = build_G(params, bind).S
        spec = classify(J6 @ S)
        if spec.classification is Classification.CONFINED:
            freqs = spec.freqs
            dw[i] = _dmodes_perturbative(S, freqs)
            stable23[i] = True
        else:
            survivors = stable_modes(J6 @ S)
            if survivors:
                freqs = np.array([survivors[0].freq])
                dw[i, 0] = _dmodes_perturbative(S, freqs)[0]
    return CurveTable(k=ks, cos_theta=ct, dw=dw, stable23=stable23)
