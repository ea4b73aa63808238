"""Rigidity and jump structure of the moire wavenumber.

Builds the K_M(kappa, dphi) surface at fixed period count, the
phenomenological experimental trajectory kappa(T2), dphi(T2), the plateau
slope condition, and jump-height-vs-period-count curves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .params import ModelParams
from .spectral import jump_height, solve_km

__all__ = [
    "TrajectoryParams",
    "Trajectory",
    "SurfaceMap",
    "km_surface",
    "experimental_trajectory",
    "visibility_model",
    "plateau_slope",
    "jump_vs_periods",
]


@dataclass(frozen=True)
class TrajectoryParams:
    """Phenomenological fit parameters of the experimental trajectory.

    dphi(T2) = a / T2^2 + phi0,  kappa_i(T2) = 2 pi a_i / sqrt(T2 + b_i).
    """

    a: float = 163e3        # us^2
    phi0: float = 1.3       # rad (stated uncertainty +-0.2)
    a1: float = 0.175       # um^-1 us^(1/2)
    b1: float = -56.0       # us
    a2: float = 0.183       # um^-1 us^(1/2)
    b2: float = -56.0       # us
    n_p: float = 5.61


@dataclass
class Trajectory:
    t2: np.ndarray = field(repr=False)
    kappa: np.ndarray = field(repr=False)      # mean of the two single-state fits
    dphi: np.ndarray = field(repr=False)
    n_p: float = 5.61

    def sigma(self) -> np.ndarray:
        # constant kappa*sigma = pi n_p / 2 along the trajectory
        return math.pi * self.n_p / (2.0 * self.kappa)

    def to_csv(self, path=None, k_m=None, visibility=None) -> str:
        cols = ["T2_us", "kappa_rad_per_um", "dphi_rad"]
        arrays = [self.t2, self.kappa, self.dphi]
        if k_m is not None:
            cols.append("K_M_rad_per_um")
            arrays.append(k_m)
        if visibility is not None:
            cols.append("visibility_model")
            arrays.append(visibility)
        lines = [",".join(cols) + "\n"]
        for row in zip(*arrays):
            lines.append(",".join(f"{x:.12g}" for x in row) + "\n")
        text = "".join(lines)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text


@dataclass
class SurfaceMap:
    kappa_axis: np.ndarray = field(repr=False)
    dphi_axis: np.ndarray = field(repr=False)
    k_m: np.ndarray = field(repr=False)        # shape (len(dphi), len(kappa))
    mask: np.ndarray = field(repr=False)       # True where the solver failed

    def to_csv(self, path=None) -> str:
        lines = ["kappa_rad_per_um,dphi_rad,K_M_rad_per_um,failed\n"]
        for i, dp in enumerate(self.dphi_axis):
            for j, ka in enumerate(self.kappa_axis):
                lines.append(f"{ka:.12g},{dp:.12g},{self.k_m[i, j]:.12g},"
                             f"{int(self.mask[i, j])}\n")
        text = "".join(lines)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text


def _km_point(kappa, dphi, n_p):
    sigma = math.pi * n_p / (2.0 * kappa)
    p = ModelParams.symmetric(kappa, dphi, sigma)
    s = solve_km(p)
    return s.k_m


def km_surface(kappa_range, dphi_range, n_p: float, jobs: int = 1) -> SurfaceMap:
    """K_M over a (kappa, dphi) grid at fixed period count n_p.

    sigma is tied to kappa through kappa*sigma = pi n_p / 2. Solver
    failures are masked, not raised.
    """
    kappa_axis = np.asarray(kappa_range, dtype=float)
    dphi_axis = np.asarray(dphi_range, dtype=float)
    km = np.full((dphi_axis.size, kappa_axis.size), np.nan)
    mask = np.zeros_like(km, dtype=bool)

    cells = [(i, j) for i in range(dphi_axis.size) for j in range(kappa_axis.size)]

    def solve_cell(cell):
        i, j = cell
        try:
            return i, j, _km_point(kappa_axis[j], dphi_axis[i], n_p), False
        except Exception:
            return i, j, np.nan, True

    if jobs > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(solve_cell, cells))
    else:
        results = [solve_cell(c) for c in cells]
    for i, j, val, failed in results:
        km[i, j] = val
        mask[i, j] = failed
    return SurfaceMap(kappa_axis=kappa_axis, dphi_axis=dphi_axis, k_m=km, mask=mask)


def experimental_trajectory(t2_grid, fit: TrajectoryParams | None = None) -> Trajectory:
    """kappa(T2) and dphi(T2) from the phenomenological fits."""
    fit = fit or TrajectoryParams()
    t2 = np.asarray(t2_grid, dtype=float)
    if np.any(t2 + fit.b1 <= 0) or np.any(t2 + fit.b2 <= 0):
        raise ValueError("T2 grid enters the domain T2 + b_i <= 0")
    k1 = 2 * math.pi * fit.a1 / np.sqrt(t2 + fit.b1)
    k2 = 2 * math.pi * fit.a2 / np.sqrt(t2 + fit.b2)
    dphi = fit.a / t2 ** 2 + fit.phi0
    return Trajectory(t2=t2, kappa=0.5 * (k1 + k2), dphi=dphi, n_p=fit.n_p)


def visibility_model(t2_grid, fit: TrajectoryParams | None = None,
                     v0: float = 1.0, c: float = 0.5) -> np.ndarray:
    """Phenomenological visibility curve (v0/2) cos(a/T2^2 + phi0) + c."""
    fit = fit or TrajectoryParams()
    t2 = np.asarray(t2_grid, dtype=float)
    return 0.5 * v0 * np.cos(fit.a / t2 ** 2 + fit.phi0) + c


def plateau_slope(kappa_fn, n_p: float, n: int, dphi_step: float = 1e-4) -> float:
    """dK_M/d(dphi) at the plateau center dphi = 2 pi n.

        slope = d kappa/d dphi - 2 pi n kappa / ((2 pi n)^2 + pi^2 n_p^2)

    ``kappa_fn`` maps dphi -> kappa. Zero slope iff kappa follows
    kappa0 sqrt(dphi^2 + pi^2 n_p^2) locally. For n = 0 the second term
    vanishes and the numerical derivative of kappa_fn is returned.
    """
    dphi0 = 2 * math.pi * n
    dk = (kappa_fn(dphi0 + dphi_step) - kappa_fn(dphi0 - dphi_step)) / (2 * dphi_step)
    if n == 0:
        return dk
    kappa0 = kappa_fn(dphi0)
    return dk - dphi0 * kappa0 / (dphi0 ** 2 + (math.pi * n_p) ** 2)


def jump_vs_periods(n_list, n_p_range) -> dict[int, np.ndarray]:
    """Relative jump height dK_M/kappa vs period count, one curve per n."""
    n_p_arr = np.asarray(n_p_range, dtype=float)
    curves: dict[int, np.ndarray] = {}
    for n in n_list:
        vals = np.empty_like(n_p_arr)
        for i, n_p in enumerate(n_p_arr):
            kappa = 1.0
            sigma = math.pi * n_p / (2.0 * kappa)
            try:
                vals[i] = jump_height(n, kappa, sigma) / kappa
            except Exception:
                vals[i] = np.nan
        curves[int(n)] = vals
    return curves
