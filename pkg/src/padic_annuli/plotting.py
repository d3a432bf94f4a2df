"""Figures for radius profiles."""
from __future__ import annotations

from pathlib import Path
from typing import Optional, Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .radius_profile import RadiusProfile  # noqa: E402


def plot_profile(profile: RadiusProfile, path: Union[str, Path], title: Optional[str] = None) -> Path:
    """Sampled f(r) against r, with the line f = r and the fitted final piece."""
    pts = sorted(profile.samples, key=lambda s: s.r)
    rs = [float(s.r) for s in pts]
    fs = [float(s.f_hat) for s in pts]
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.plot(rs, rs, ls=":", color="grey", label="f = r")
    good = [(r, f) for r, f, s in zip(rs, fs, pts) if s.stabilized]
    bad = [(r, f) for r, f, s in zip(rs, fs, pts) if not s.stabilized]
    ax.plot(rs, fs, color="tab:blue", lw=1)
    if good:
        ax.scatter(*zip(*good), color="tab:blue", zorder=3, label="stabilized")
    if bad:
        ax.scatter(*zip(*bad), marker="x", color="tab:red", zorder=3, label="unstabilized")
    if profile.slope is not None:
        s, q = float(profile.slope), float(profile.intercept)
        ax.plot([0, rs[-1]], [q, q + s * rs[-1]], ls="--", color="tab:green",
                label=f"fit: {profile.slope} r + {profile.intercept}")
    ax.set_xlabel("r = -log_p rho")
    ax.set_ylabel("f(r) = -log_p R")
    ax.set_xlim(left=0)
    ax.set_ylim(bottom=0)
    if title:
        ax.set_title(title)
    ax.legend(fontsize="small")
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
