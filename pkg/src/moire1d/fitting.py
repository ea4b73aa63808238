"""Estimation pipeline for moire interference data.

Four nonlinear models fitted by bounded trust-region least squares with
analytic Jacobians:

  * Gaussian envelope + offset, for the spectral cutoff width sigma_0,
  * Gaussian-windowed sine fringe with fixed wavenumber K_M,
  * visibility vs deceleration time, v(T2) = v0/2 cos(a/T2^2 + phi0) + c,
  * single-state wavenumber curve kappa(T2) = 2 pi a / sqrt(T2 + b).

Phase-like parameters get an 8-point multi-start because the cosine
models have many local minima. All fits are deterministic.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from .params import SampledSignal

__all__ = [
    "FitError", "FringeFit", "VisibilityFit", "KappaFit",
    "fit_envelope", "fit_fringes", "fit_visibility_curve", "fit_kappa_curve",
    "make_ccd_image", "column_sum",
]

N_STARTS = 8


class FitError(RuntimeError):
    """Nonlinear fit failed to converge or produced invalid parameters."""


def _covariance(res, n_params):
    """1-sigma parameter covariance from the least-squares solution."""
    dof = res.fun.size - n_params
    if dof <= 0:
        return None
    _, s, vt = np.linalg.svd(res.jac, full_matrices=False)
    s = np.where(s > s[0] * 1e-12, s, np.inf)
    jtj_inv = (vt.T / s ** 2) @ vt
    return jtj_inv * (2 * res.cost / dof)


def _run_ls(residual, jac, x0, bounds):
    res = least_squares(residual, x0, jac=jac, bounds=bounds,
                        method="trf", max_nfev=400)
    return res


@dataclass(frozen=True)
class FringeFit:
    """Gaussian-windowed sine fit with the wavenumber held fixed.

    Model: A exp(-(z - center)^2 / 2 sigma^2) (1 + v sin(k_m z + phase)) + offset.
    Negative fitted visibility is canonicalized into the phase.
    """
    amplitude: float
    center: float
    sigma: float
    visibility: float
    phase: float
    offset: float
    k_m: float
    residual_norm: float
    covariance: np.ndarray | None = field(repr=False, default=None)
    low_confidence: bool = False

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")

    def evaluate(self, z):
        z = np.asarray(z, dtype=float)
        env = self.amplitude * np.exp(-(z - self.center) ** 2 / (2 * self.sigma ** 2))
        return env * (1 + self.visibility * np.sin(self.k_m * z + self.phase)) + self.offset

    def to_json(self) -> str:
        return _fit_json(
            {"amplitude": self.amplitude, "center_um": self.center,
             "sigma_um": self.sigma, "visibility": self.visibility,
             "phase_rad": self.phase, "offset": self.offset,
             "k_m_rad_per_um": self.k_m},
            self.covariance, self.residual_norm,
            extra={"low_confidence": self.low_confidence})


@dataclass(frozen=True)
class VisibilityFit:
    """Parameters of v(T2) = v0/2 cos(a/T2^2 + phi0) + c."""
    v0: float
    a: float        # us^2
    phi0: float     # rad, canonical in [0, 2 pi)
    c: float
    residual_norm: float
    covariance: np.ndarray | None = field(repr=False, default=None)

    def dphi_of_t2(self, t2):
        """Differential pattern phase implied by the fit."""
        return self.a / np.asarray(t2, dtype=float) ** 2 + self.phi0

    def evaluate(self, t2):
        return 0.5 * self.v0 * np.cos(self.dphi_of_t2(t2)) + self.c

    def to_json(self) -> str:
        return _fit_json({"v0": self.v0, "a_us2": self.a,
                          "phi0_rad": self.phi0, "c": self.c},
                         self.covariance, self.residual_norm)


@dataclass(frozen=True)
class KappaFit:
    """Parameters of kappa(T2) = 2 pi a / sqrt(T2 + b)."""
    a: float        # um^-1 us^(1/2)
    b: float        # us
    residual_norm: float
    covariance: np.ndarray | None = field(repr=False, default=None)

    def evaluate(self, t2):
        t2 = np.asarray(t2, dtype=float)
        return 2 * math.pi * self.a / np.sqrt(t2 + self.b)

    def to_json(self) -> str:
        return _fit_json({"a_per_um_sqrt_us": self.a, "b_us": self.b},
                         self.covariance, self.residual_norm)


def _fit_json(params: dict, cov, residual_norm, extra=None) -> str:
    err = {}
    if cov is not None:
        sig = np.sqrt(np.clip(np.diag(cov), 0, None))
        err = {k + "_err": float(s) for k, s in zip(params, sig)}
    doc = {**{k: float(v) for k, v in params.items()}, **err,
           "residual_norm": float(residual_norm)}
    if extra:
        doc.update(extra)
    return json.dumps(doc, indent=2, sort_keys=True)


def fit_envelope(signal: SampledSignal) -> dict:
    """Least-squares Gaussian + offset fit of a single-lobe envelope.

    Returns {"amplitude", "center", "sigma", "offset", "residual_norm",
    "covariance"}. The fitted sigma feeds the spectral low-K cutoff.
    """
    z = signal.z
    y = np.asarray(signal.values, dtype=float)
    c0 = float(np.min(y))
    a0 = float(np.max(y) - c0)
    if a0 <= 0:
        raise FitError("signal has no envelope above its floor")
    w = np.clip(y - c0, 0, None)
    zbar0 = float(np.sum(w * z) / np.sum(w))
    var = float(np.sum(w * (z - zbar0) ** 2) / np.sum(w))
    s0 = math.sqrt(max(var, signal.dz ** 2))

    def residual(p):
        a, zb, s, c = p
        return a * np.exp(-(z - zb) ** 2 / (2 * s * s)) + c - y

    def jac(p):
        a, zb, s, c = p
        u = (z - zb) / s
        g = np.exp(-0.5 * u * u)
        return np.stack([g, a * g * u / s, a * g * u * u / s,
                         np.ones_like(z)], axis=1)

    res = _run_ls(residual, jac, [a0, zbar0, s0, c0],
                  ([0, z[0] - (z[-1] - z[0]), signal.dz * 0.1, -np.inf],
                   [np.inf, z[-1] + (z[-1] - z[0]), (z[-1] - z[0]) * 10, np.inf]))
    if not res.success:
        raise FitError(f"envelope fit did not converge: {res.message}")
    a, zb, s, c = res.x
    return {"amplitude": float(a), "center": float(zb), "sigma": float(abs(s)),
            "offset": float(c), "residual_norm": float(math.sqrt(2 * res.cost)),
            "covariance": _covariance(res, 4)}


def fit_fringes(signal: SampledSignal, k_m: float) -> FringeFit:
    """Fringe fit with the wavenumber fixed at the spectral peak ``k_m``.

    The six free parameters are (A, center, sigma, v, phase, offset).
    Flags ``low_confidence`` when the envelope holds fewer than two
    fringe periods, where v and the offset trade off against each other.
    """
    if k_m <= 0:
        raise ValueError("k_m must be positive")
    env = fit_envelope(signal)
    z = signal.z
    y = np.asarray(signal.values, dtype=float)
    lo = [0, z[0] - (z[-1] - z[0]), signal.dz * 0.1, -1.5, -np.inf, -np.inf]
    hi = [np.inf, z[-1] + (z[-1] - z[0]), (z[-1] - z[0]) * 10, 1.5, np.inf, np.inf]

    def residual(p):
        a, zb, s, v, ph, c = p
        g = a * np.exp(-(z - zb) ** 2 / (2 * s * s))
        return g * (1 + v * np.sin(k_m * z + ph)) + c - y

    def jac(p):
        a, zb, s, v, ph, c = p
        u = (z - zb) / s
        g = np.exp(-0.5 * u * u)
        sn = np.sin(k_m * z + ph)
        cs = np.cos(k_m * z + ph)
        fr = 1 + v * sn
        return np.stack([g * fr, a * g * fr * u / s, a * g * fr * u * u / s,
                         a * g * sn, a * g * v * cs, np.ones_like(z)], axis=1)

    best = None
    for j in range(N_STARTS):
        ph0 = 2 * math.pi * j / N_STARTS
        x0 = [env["amplitude"], env["center"], env["sigma"], 0.5, ph0, env["offset"]]
        res = _run_ls(residual, jac, x0, (lo, hi))
        if res.success and (best is None or res.cost < best.cost):
            best = res
    if best is None:
        raise FitError("fringe fit did not converge from any start")
    a, zb, s, v, ph, c = best.x
    if v < 0:
        v, ph = -v, ph + math.pi
    ph = ph % (2 * math.pi)
    return FringeFit(amplitude=float(a), center=float(zb), sigma=float(abs(s)),
                     visibility=float(v), phase=float(ph), offset=float(c),
                     k_m=float(k_m),
                     residual_norm=float(math.sqrt(2 * best.cost)),
                     covariance=_covariance(best, 6),
                     low_confidence=bool(k_m * abs(s) < 2 * math.pi))


def fit_visibility_curve(t2, v) -> VisibilityFit:
    """Fit the visibility oscillation v(T2) = v0/2 cos(a/T2^2 + phi0) + c.

    Needs enough points to pin down at least two oscillations; the
    (a, phi0) basin is scanned by multi-start over both parameters.
    """
    t2 = np.asarray(t2, dtype=float)
    v = np.asarray(v, dtype=float)
    if t2.size < 8:
        raise FitError("need at least 8 (T2, v) points")
    c0 = float(np.mean(v))
    v00 = float(2 * (np.max(v) - np.min(v)) / 2)

    def residual(p):
        v0, a, ph, c = p
        return 0.5 * v0 * np.cos(a / t2 ** 2 + ph) + c - v

    def jac(p):
        v0, a, ph, c = p
        arg = a / t2 ** 2 + ph
        sn = np.sin(arg)
        return np.stack([0.5 * np.cos(arg), -0.5 * v0 * sn / t2 ** 2,
                         -0.5 * v0 * sn, np.ones_like(t2)], axis=1)

    tmin = float(np.min(t2))
    best = None
    # amplitude scale of a: phase at the smallest T2 of a few to tens of rad
    for a0 in (2.0, 5.0, 10.0, 20.0):
        for j in range(N_STARTS):
            x0 = [v00, a0 * tmin ** 2, 2 * math.pi * j / N_STARTS, c0]
            res = _run_ls(residual, jac, x0,
                          ([0, 0, -2 * math.pi, -np.inf],
                           [np.inf, np.inf, 4 * math.pi, np.inf]))
            if res.success and (best is None or res.cost < best.cost):
                best = res
    if best is None:
        raise FitError("visibility fit did not converge from any start")
    v0, a, ph, c = best.x
    ph = ph % (2 * math.pi)
    return VisibilityFit(v0=float(v0), a=float(a), phi0=float(ph), c=float(c),
                         residual_norm=float(math.sqrt(2 * best.cost)),
                         covariance=_covariance(best, 4))


def fit_kappa_curve(t2, kappa) -> KappaFit:
    """Fit kappa(T2) = 2 pi a / sqrt(T2 + b) to a wavenumber series."""
    t2 = np.asarray(t2, dtype=float)
    kappa = np.asarray(kappa, dtype=float)
    if t2.size < 3:
        raise FitError("need at least 3 (T2, kappa) points")
    tmin = float(np.min(t2))

    def residual(p):
        a, b = p
        return 2 * math.pi * a / np.sqrt(t2 + b) - kappa

    def jac(p):
        a, b = p
        rt = np.sqrt(t2 + b)
        return np.stack([2 * math.pi / rt, -math.pi * a / rt ** 3], axis=1)

    best = None
    for b0 in (-0.8 * tmin, -0.4 * tmin, 0.0, 0.5 * tmin):
        a0 = float(np.mean(kappa * np.sqrt(np.clip(t2 + b0, 1e-6, None))) / (2 * math.pi))
        res = _run_ls(residual, jac, [a0, b0],
                      ([0, -tmin + 1e-9], [np.inf, np.inf]))
        if res.success and (best is None or res.cost < best.cost):
            best = res
    if best is None:
        raise FitError("kappa curve fit did not converge from any start")
    a, b = best.x
    return KappaFit(a=float(a), b=float(b),
                    residual_norm=float(math.sqrt(2 * best.cost)),
                    covariance=_covariance(best, 2))


def make_ccd_image(signal: SampledSignal, n_rows: int = 64,
                   noise: float = 0.0, blur_sigma_px: float = 0.0,
                   rng: np.random.Generator | None = None) -> np.ndarray:
    """Synthetic camera frame: row-replicated pattern + white noise + blur.

    ``noise`` is the additive Gaussian sigma per pixel, ``blur_sigma_px``
    the optional optical-resolution blur in pixels.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    img = np.tile(np.asarray(signal.values, dtype=float), (n_rows, 1))
    if blur_sigma_px > 0:
        from scipy.ndimage import gaussian_filter
        img = gaussian_filter(img, blur_sigma_px, mode="nearest")
    if noise > 0:
        img = img + rng.normal(0.0, noise, img.shape)
    return img


def column_sum(image: np.ndarray, z0: float, dz: float) -> SampledSignal:
    """Column-summed 1D profile of a camera frame, mean per column."""
    image = np.asarray(image, dtype=float)
    return SampledSignal(z0=z0, dz=dz, values=image.mean(axis=0))
