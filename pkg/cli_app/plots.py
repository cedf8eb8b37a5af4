"""
SVG 그림 렌더러.

CSV 로 이미 쓴 배열을 그대로 받아 그리기만 합니다. 판정은 항상 CSV/JSON 으로 합니다.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from utils.logger import get_logger  # noqa: E402

log = get_logger("Plots")

plt.rcParams["svg.hashsalt"] = "eddikit"
_SVG_METADATA = {"Date": None}


def _save(fig: plt.Figure, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata=_SVG_METADATA)
    plt.close(fig)
    log.ok("그림", str(path))
    return path


def plot_restoring_force(x: np.ndarray, k_data: np.ndarray, k_model: np.ndarray, path: Path) -> Path:
    """보존력 K 대 변위 x. 간극 접촉에서 기울기가 꺾입니다."""
    fig, ax = plt.subplots(figsize=(6, 4.5))
    ax.plot(x * 1e3, k_data, ".", ms=1.5, color="0.6", label="data")
    ax.plot(x * 1e3, k_model, "-", lw=1.2, color="C3", label="identified")
    ax.set_xlabel("x (mm)")
    ax.set_ylabel("K (N)")
    ax.legend()
    return _save(fig, path)


def plot_dissipated_energy(gammas: np.ndarray, data: np.ndarray, model: np.ndarray, path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(gammas, data, "o", ms=3, mfc="none", color="0.3", label="T(γ0) − T(γi)")
    ax.plot(gammas, model, "-", lw=1.2, color="C0", label="Q b")
    ax.set_xlabel("t (s)")
    ax.set_ylabel("dissipated energy (J)")
    ax.legend()
    return _save(fig, path)


def plot_energy_trace(times: np.ndarray, kinetic: np.ndarray, mechanical: np.ndarray, gamma0: float, path: Path) -> Path:
    """T(t) 와 식별 모델의 E(t). E 는 T 의 위쪽 포락선을 따라가야 합니다."""
    fig, ax = plt.subplots(figsize=(7, 3.5))
    ax.plot(times, kinetic, "-", lw=0.6, color="0.6", label="T(t)")
    ax.plot(times, mechanical, "-", lw=1.2, color="C3", label="E(t)")
    ax.axvline(gamma0, color="0.3", lw=0.8, ls=":")
    ax.set_xlabel("t (s)")
    ax.set_ylabel("energy (J)")
    ax.legend()
    return _save(fig, path)



def plot_validation(times: np.ndarray, x_ref: np.ndarray | None, x_id: np.ndarray, path: Path, title: str = "") -> Path:
    fig, ax = plt.subplots(figsize=(7, 3.5))
    if x_ref is not None:
        ax.plot(times, x_ref * 1e3, "-", lw=1.0, color="0.4", label="reference")
    ax.plot(times, x_id * 1e3, "--", lw=1.0, color="C3", label="identified")
    ax.set_xlabel("t (s)")
    ax.set_ylabel("x (mm)")
    if title:
        ax.set_title(title)
    ax.legend()
    return _save(fig, path)


def plot_spectrum(freqs: np.ndarray, magnitude: np.ndarray, path: Path, f_max: float = 100.0) -> Path:
    fig, ax = plt.subplots(figsize=(6, 3.5))
    keep = freqs <= f_max
    ax.plot(freqs[keep], magnitude[keep], lw=1.0)
    ax.set_xlabel("f (Hz)")
    ax.set_ylabel("|Y(f)|")
    return _save(fig, path)


def plot_scalogram(
    freqs: np.ndarray,
    times: np.ndarray,
    magnitude: np.ndarray,
    path: Path,
    coi: np.ndarray | None = None,
) -> Path:
    fig, ax = plt.subplots(figsize=(7, 4))
    mesh = ax.pcolormesh(times, freqs, magnitude, shading="nearest", cmap="viridis", vmin=0.0, vmax=1.0)
    if coi is not None:
        ax.plot(times, np.clip(coi, freqs[0], freqs[-1]), "w--", lw=0.8)
    ax.set_yscale("log")
    ax.set_xlabel("t (s)")
    ax.set_ylabel("f (Hz)")
    fig.colorbar(mesh, ax=ax, label="|W| (normalized)")
    return _save(fig, path)
