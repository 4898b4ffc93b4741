"""Figure rendering for curves, summaries, loss traces and motion fields."""

import logging
import os
from typing import Any, Optional, Sequence as SequenceType

import matplotlib as mpl
mpl.use('Agg')

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

logger = logging.getLogger(__name__)

FIGURE_SIZE = (8.0, 4.5)
DPI = 120


def _save(fig, path: str) -> str:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)
    logger.info("Wrote figure %s", path)
    return path


def _finite(values: np.ndarray) -> np.ndarray:
    values = np.asarray(values, dtype=np.float64).copy()
    values[~np.isfinite(values)] = np.nan
    return values


def plot_psnr_curves(before: np.ndarray, after: np.ndarray, path: str,
                     labels: Optional[Any] = None, title: str = 'PSNR per frame') -> str:
    """Plot the per-frame PSNR of the compressed and enhanced sequences.

    Saturated frames are left as gaps; PQFs are marked when labels are given.
    """
    before = _finite(before)
    after = _finite(after)
    frames = np.arange(before.size)

    fig, ax = plt.subplots(figsize=FIGURE_SIZE)
    ax.plot(frames, before, '-o', markersize=3, label='compressed')
    ax.plot(frames, after, '-s', markersize=3, label='enhanced')
    if labels is not None:
        pqfs = np.flatnonzero(np.asarray(getattr(labels, 'labels', labels)) == 1)
        ax.plot(pqfs, before[pqfs], 'k^', markersize=6, linestyle='none', label='PQF')
    ax.set_xlabel('frame')
    ax.set_ylabel('PSNR (dB)')
    ax.set_title(title)
    ax.legend()
    ax.grid(alpha=0.3)
    return _save(fig, path)


def plot_delta_bars(report, path: str) -> str:
    """Bar chart of mean delta PSNR and delta SSIM for PQFs and non-PQFs."""
    groups = ('non-PQF', 'PQF', 'overall')

    def heights(averages):
        values = (averages.non_pqf, averages.pqf, averages.overall)
        return [v if v is not None and np.isfinite(v) else 0.0 for v in values]

    fig, (ax_psnr, ax_ssim) = plt.subplots(1, 2, figsize=FIGURE_SIZE)
    ax_psnr.bar(groups, heights(report.psnr_averages), color=('tab:blue', 'tab:orange', 'tab:gray'))
    ax_psnr.set_ylabel('delta PSNR (dB)')
    ax_ssim.bar(groups, heights(report.ssim_averages), color=('tab:blue', 'tab:orange', 'tab:gray'))
    ax_ssim.set_ylabel('delta SSIM')
    for ax in (ax_psnr, ax_ssim):
        ax.axhline(0.0, color='black', linewidth=0.8)
        ax.grid(axis='y', alpha=0.3)
    return _save(fig, path)


def plot_cc_curve(curve, path: str) -> str:
    """Mean Pearson correlation against frame lag, with one-SD error bars."""
    fig, ax = plt.subplots(figsize=FIGURE_SIZE)
    ax.errorbar(curve.lags, curve.means, yerr=curve.sds, fmt='-o', capsize=3)
    ax.set_xlabel('lag (frames)')
    ax.set_ylabel('CC')
    ax.set_ylim(min(0.0, min(curve.means, default=0.0)), 1.05)
    ax.grid(alpha=0.3)
    return _save(fig, path)


def plot_loss_trace(trace: SequenceType[Any], path: str) -> str:
    """Plot L_MC, L_QE and the total loss per step, marking the stage switch."""
    steps = np.array([row.step for row in trace])
    fig, ax = plt.subplots(figsize=FIGURE_SIZE)
    ax.semilogy(steps, [row.l_mc for row in trace], label='L_MC')
    ax.semilogy(steps, [row.l_qe for row in trace], label='L_QE')
    ax.semilogy(steps, [row.total for row in trace], label='total', alpha=0.6)
    switch = next((row.step for row in trace if row.stage == 2), None)
    if switch is not None:
        ax.axvline(switch, color='black', linestyle='--', linewidth=0.8, label='stage 2')
    ax.set_xlabel('step')
    ax.set_ylabel('loss')
    ax.legend()
    ax.grid(alpha=0.3)
    return _save(fig, path)


def plot_motion_magnitude(field, path: str, title: str = 'motion magnitude') -> str:
    """Heat map of a motion field's per-pixel magnitude in pixels."""
    fig, ax = plt.subplots(figsize=FIGURE_SIZE)
    image = ax.imshow(field.magnitude(), cmap='viridis')
    fig.colorbar(image, ax=ax, label='pixels')
    ax.set_title(title)
    ax.set_axis_off()
    return _save(fig, path)
