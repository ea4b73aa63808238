"""End-to-end analysis of synthetic camera data.

Mirrors the experimental data path: render patterns to synthetic CCD
frames (noise, optional blur), column-sum back to 1D, find the spectral
peak, and run the fringe/visibility/wavenumber fits. Single-state frames
(one constituent per spin) give the kappa estimates and envelope centers;
the moire frame gives K_M, visibility and the secondary-peak flag.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .fitting import (FitError, column_sum, fit_envelope, fit_fringes,
                      fit_kappa_curve, fit_visibility_curve, make_ccd_image)
from .params import ModelParams, SampledSignal
from .pattern import generate_pattern
from .rigidity import TrajectoryParams, experimental_trajectory
from .spectral import numerical_spectrum

__all__ = ["AnalysisResult", "single_state_params", "analyze_run",
           "run_t2_scan", "scan_to_json"]


@dataclass(frozen=True)
class AnalysisResult:
    """Estimates from one synthetic run (two single-state frames + moire)."""
    kappa1: float
    kappa2: float
    z1: float
    z2: float
    k_m: float
    visibility: float
    phase: float
    secondary_k: float | None
    true_params: ModelParams

    @property
    def kappa(self) -> float:
        return 0.5 * (self.kappa1 + self.kappa2)

    @property
    def delta_phi(self) -> float:
        return self.kappa * (self.z2 - self.z1)

    def to_json(self) -> str:
        doc = {
            "kappa1_rad_per_um": self.kappa1, "kappa2_rad_per_um": self.kappa2,
            "z1_um": self.z1, "z2_um": self.z2,
            "delta_phi_rad": self.delta_phi,
            "k_m_rad_per_um": self.k_m, "visibility": self.visibility,
            "phase_rad": self.phase,
            "secondary_k_rad_per_um": self.secondary_k,
            "true_kappa_rad_per_um": self.true_params.kappa,
            "true_delta_phi_rad": self.true_params.delta_phi,
        }
        return json.dumps({k: (None if v is None else float(v))
                           for k, v in doc.items()}, indent=2, sort_keys=True)


def single_state_params(params: ModelParams, which: int) -> ModelParams:
    """Constituent ``which`` (1 or 2) of a two-pattern model, alone."""
    if which == 1:
        k, t, z = params.kappa1, params.theta1, params.z1
    elif which == 2:
        k, t, z = params.kappa2, params.theta2, params.z2
    else:
        raise ValueError("which must be 1 or 2")
    return ModelParams(kappa1=k, kappa2=k, theta1=t, theta2=t,
                       z1=z, z2=z, sigma=params.sigma)


def _frame(signal: SampledSignal, noise, blur, n_rows, rng) -> SampledSignal:
    img = make_ccd_image(signal, n_rows=n_rows, noise=noise,
                         blur_sigma_px=blur, rng=rng)
    return column_sum(img, signal.z0, signal.dz)


def analyze_run(params: ModelParams, noise: float = 0.0,
                blur_sigma_px: float = 0.0, n_rows: int = 64,
                seed: int = 0, grid=None) -> AnalysisResult:
    """Generate frames for one parameter set and run the full analysis.

    ``noise`` is the per-pixel Gaussian sigma in units of the pattern
    amplitude (the rendered patterns peak near 1).
    """
    rng = np.random.default_rng(seed)
    moire = generate_pattern(params, grid=grid)
    s1 = generate_pattern(single_state_params(params, 1), grid=(moire.z0, moire.dz, len(moire.values)))
    s2 = generate_pattern(single_state_params(params, 2), grid=(moire.z0, moire.dz, len(moire.values)))

    moire_m = _frame(moire, noise, blur_sigma_px, n_rows, rng)
    s1_m = _frame(s1, noise, blur_sigma_px, n_rows, rng)
    s2_m = _frame(s2, noise, blur_sigma_px, n_rows, rng)

    env1 = fit_envelope(s1_m)
    env2 = fit_envelope(s2_m)
    sp1 = numerical_spectrum(s1_m, envelope_sigma=env1["sigma"])
    sp2 = numerical_spectrum(s2_m, envelope_sigma=env2["sigma"])
    envm = fit_envelope(moire_m)
    spm = numerical_spectrum(moire_m, envelope_sigma=envm["sigma"])
    if spm.primary_peak is None or sp1.primary_peak is None or sp2.primary_peak is None:
        raise FitError("no spectral peak found in one of the frames")

    fringe = fit_fringes(moire_m, spm.primary_peak[0])
    return AnalysisResult(
        kappa1=sp1.primary_peak[0], kappa2=sp2.primary_peak[0],
        z1=env1["center"], z2=env2["center"],
        k_m=spm.primary_peak[0], visibility=fringe.visibility,
        phase=fringe.phase,
        secondary_k=None if spm.secondary_peak is None else spm.secondary_peak[0],
        true_params=params)


def run_t2_scan(t2_grid, fit: TrajectoryParams | None = None,
                noise: float = 0.0, blur_sigma_px: float = 0.0,
                n_rows: int = 64, seed: int = 0):
    """Synthetic Fig.-2-style scan: one analyzed run per T2 value.

    Patterns follow the experimental trajectory (kappa_i(T2), dphi(T2)).
    Returns the per-T2 AnalysisResult list plus the recovered visibility
    and kappa-curve fits, for comparison against the generating
    TrajectoryParams.
    """
    if fit is None:
        fit = TrajectoryParams()
    t2_grid = np.asarray(t2_grid, dtype=float)
    traj = experimental_trajectory(t2_grid, fit)
    k1 = 2 * math.pi * fit.a1 / np.sqrt(t2_grid + fit.b1)
    k2 = 2 * math.pi * fit.a2 / np.sqrt(t2_grid + fit.b2)

    results = []
    for i, t2 in enumerate(t2_grid):
        kappa = traj.kappa[i]
        sigma = math.pi * fit.n_p / (2 * kappa)
        dz = traj.dphi[i] / kappa
        zc = 0.0
        p = ModelParams(kappa1=float(k1[i]), kappa2=float(k2[i]),
                        theta1=0.0, theta2=0.0,
                        z1=zc - dz / 2, z2=zc + dz / 2, sigma=sigma)
        results.append(analyze_run(p, noise=noise, blur_sigma_px=blur_sigma_px,
                                   n_rows=n_rows, seed=seed + i))

    vis_fit = fit_visibility_curve(t2_grid, [r.visibility for r in results])
    k1_fit = fit_kappa_curve(t2_grid, [r.kappa1 for r in results])
    k2_fit = fit_kappa_curve(t2_grid, [r.kappa2 for r in results])
    return {"t2": t2_grid, "results": results, "visibility_fit": vis_fit,
            "kappa1_fit": k1_fit, "kappa2_fit": k2_fit, "trajectory": traj}


def scan_to_json(scan) -> str:
    v, k1, k2 = scan["visibility_fit"], scan["kappa1_fit"], scan["kappa2_fit"]
    doc = {
        "visibility": {"v0": v.v0, "a_us2": v.a, "phi0_rad": v.phi0, "c": v.c},
        "kappa1": {"a": k1.a, "b_us": k1.b},
        "kappa2": {"a": k2.a, "b_us": k2.b},
        "n_points": int(len(scan["results"])),
    }
    return json.dumps(doc, indent=2, sort_keys=True)
