"""Figure rendering for CLI reports.

Every function takes data already computed by the library, writes one PNG
next to the CSV outputs, and returns the path. Uses the Agg backend; no
interactive windows.
"""

from __future__ import annotations

import math

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "plot_pattern", "plot_surface", "plot_scan", "plot_sequence",
    "plot_wigner", "plot_pipeline", "plot_jump_heights", "plot_universal",
]

_DPI = 130


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return str(path)


def plot_pattern(signal, path, spectrum=None):
    """Pattern in real space, with its spectrum when provided."""
    n = 2 if spectrum is not None else 1
    fig, axes = plt.subplots(1, n, figsize=(5 * n, 3.2))
    axes = np.atleast_1d(axes)
    axes[0].plot(signal.z, signal.values, lw=0.8)
    axes[0].set_xlabel("z (um)")
    axes[0].set_ylabel("intensity")
    if spectrum is not None:
        axes[1].plot(spectrum.k_grid, spectrum.aft, lw=0.8)
        axes[1].axvline(spectrum.primary_peak[0], color="r", ls="--", lw=0.8)
        axes[1].set_xlabel("K (rad/um)")
        axes[1].set_ylabel("|FT|")
        axes[1].set_xlim(0, 3 * spectrum.primary_peak[0])
    return _save(fig, path)


def plot_surface(surface, path, trajectory=None):
    """Moire wavenumber map over (kappa, dphi), optional overlay curve."""
    fig, ax = plt.subplots(figsize=(5.2, 4))
    km = np.ma.masked_invalid(surface.k_m)
    mesh = ax.pcolormesh(surface.dphi_axis / math.pi, surface.kappa_axis, km.T,
                         shading="auto")
    fig.colorbar(mesh, ax=ax, label="K_M (rad/um)")
    if trajectory is not None:
        ax.plot(trajectory.dphi / math.pi, trajectory.kappa, "r-", lw=1.2)
    ax.set_xlabel("dphi / pi")
    ax.set_ylabel("kappa (rad/um)")
    return _save(fig, path)


def plot_scan(t2, k_m, visibility, path, kappa=None):
    """K_M staircase and visibility oscillation vs the deceleration time."""
    fig, axes = plt.subplots(2, 1, figsize=(5.5, 5), sharex=True)
    axes[0].plot(t2, k_m, ".-", ms=3, lw=0.7, label="K_M")
    if kappa is not None:
        axes[0].plot(t2, kappa, "--", lw=0.8, label="kappa")
        axes[0].legend()
    axes[0].set_ylabel("K (rad/um)")
    axes[1].plot(t2, visibility, ".-", ms=3, lw=0.7)
    axes[1].set_xlabel("T2 (us)")
    axes[1].set_ylabel("visibility")
    return _save(fig, path)


def plot_sequence(result, path):
    """Final per-spin patterns, moire sum, and the conservation record."""
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.2))
    moire = result.moire_pattern()
    grid = moire.z
    for spin, style in ((1, "C0"), (2, "C1")):
        s = result.pattern(spin, grid=grid)
        axes[0].plot(s.z, s.values, style, lw=0.7, label=f"spin {spin}")
    axes[0].plot(moire.z, moire.values, "k", lw=1.0, label="moire")
    axes[0].set_xlabel("z (um)")
    axes[0].set_ylabel("density")
    axes[0].legend(fontsize=7)
    times = [r.time for r in result.records]
    gammas = [r.gamma for r in result.records]
    axes[1].plot(times, gammas, "o-", ms=3, lw=0.7)
    axes[1].set_xlabel("t (us)")
    axes[1].set_ylabel("Gamma")
    return _save(fig, path)


def plot_wigner(w, path):
    fig, ax = plt.subplots(figsize=(5, 4))
    lim = float(np.max(np.abs(w.values)))
    mesh = ax.pcolormesh(w.x_grid, w.p_grid, w.values.T, cmap="RdBu_r",
                         vmin=-lim, vmax=lim, shading="auto")
    fig.colorbar(mesh, ax=ax, label="W")
    ax.set_xlabel("x (um)")
    ax.set_ylabel("p (rad/um)")
    return _save(fig, path)


def plot_pipeline(scan, path):
    """Recovered visibility and kappa curves of a synthetic T2 scan."""
    t2 = scan["t2"]
    res = scan["results"]
    fig, axes = plt.subplots(2, 1, figsize=(5.5, 5), sharex=True)
    axes[0].plot(t2, [r.visibility for r in res], "o", ms=3, label="measured")
    axes[0].plot(t2, scan["visibility_fit"].evaluate(t2), "-", lw=0.8, label="fit")
    axes[0].set_ylabel("visibility")
    axes[0].legend(fontsize=7)
    axes[1].plot(t2, [r.kappa1 for r in res], "o", ms=3, label="kappa1")
    axes[1].plot(t2, scan["kappa1_fit"].evaluate(t2), "-", lw=0.8)
    axes[1].plot(t2, [r.kappa2 for r in res], "s", ms=3, label="kappa2")
    axes[1].plot(t2, scan["kappa2_fit"].evaluate(t2), "--", lw=0.8)
    axes[1].set_xlabel("T2 (us)")
    axes[1].set_ylabel("kappa (rad/um)")
    axes[1].legend(fontsize=7)
    return _save(fig, path)


def plot_jump_heights(n_p_range, curves, path):
    """Jump height vs period number, one curve per singularity order."""
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for n, vals in sorted(curves.items()):
        ax.plot(n_p_range, vals, lw=0.9, label=f"n={n}")
    ax.set_xlabel("N_p")
    ax.set_ylabel("jump height / kappa")
    ax.legend(fontsize=7)
    return _save(fig, path)


def plot_universal(dphi, km_dz, path):
    """Universal staircase K_M dz vs dphi with the 2 pi n levels."""
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(dphi / math.pi, km_dz / math.pi, lw=0.9)
    nmax = int(np.nanmax(km_dz) / (2 * math.pi)) + 1
    for n in range(1, nmax + 1):
        ax.axhline(2 * n, color="gray", lw=0.4, ls=":")
    ax.set_xlabel("dphi / pi")
    ax.set_ylabel("K_M dz / pi")
    return _save(fig, path)
