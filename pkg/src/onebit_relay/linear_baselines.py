"""Genie-CSI linear detectors (ZF, LMMSE) over the quantizer-free cascade.

The learned and exact detectors are compared against classical linear
equalization that knows every hop matrix perfectly. The linear detectors see
the cascade product H_M ... H_1 with the quantizers treated as identity;
this is the simplest faithful genie baseline for a channel that is actually
nonlinear, and is documented as such.
"""

from dataclasses import dataclass
from functools import reduce

import numpy as np

from .channel import ChannelRealization, NetworkConfig
from .constellation import nearest_point_indices


class DetectionFailureError(RuntimeError):
    """The linear detector could not produce a decision (rank-deficient channel)."""


@dataclass(frozen=True)
class EffectiveChannel:
    h_eff: np.ndarray     # (2N, 2K) real cascade product
    noise_std: float      # final-hop complex noise std, used by LMMSE


def build_effective_channel(ch: ChannelRealization, noise_std: float = 0.0) -> EffectiveChannel:
    """Left-to-right product of the real hop expansions, quantizers dropped."""
    h_eff = reduce(lambda acc, h: h @ acc, ch.real_hops)
    return EffectiveChannel(h_eff=h_eff, noise_std=float(noise_std))


def _to_joint_indices(cfg: NetworkConfig, s: np.ndarray) -> np.ndarray:
    """Map stacked real estimates (B, 2K) to joint input indices."""
    enum = cfg.input_enumeration()
    k = cfg.n_users
    z = s[:, :k] + 1j * s[:, k:]
    digits = nearest_point_indices(enum.points, z)
    return enum.joint_indices(digits)


def zf_detect_batch(cfg: NetworkConfig, eff: EffectiveChannel, y: np.ndarray) -> np.ndarray:
    """Least-squares inversion followed by per-user nearest-point mapping."""
    y = np.atleast_2d(np.asarray(y, dtype=float))
    s, _, rank, _ = np.linalg.lstsq(eff.h_eff, y.T, rcond=None)
    if rank < eff.h_eff.shape[1]:
        raise DetectionFailureError(
            f"effective channel rank {rank} < {eff.h_eff.shape[1]}; ZF undefined")
    return _to_joint_indices(cfg, s.T)


def zf_detect(cfg: NetworkConfig, eff: EffectiveChannel, y: np.ndarray) -> int:
    return int(zf_detect_batch(cfg, eff, np.atleast_2d(y))[0])


def lmmse_detect_batch(cfg: NetworkConfig, eff: EffectiveChannel, y: np.ndarray,
                       ridge: float | None = None) -> np.ndarray:
    """Regularized inversion s = (H^T H + lambda I)^-1 H^T y, then mapping.

    The default ridge is K * sigma_M^2 (unit-power symbols). An infinite
    ridge shrinks the estimate to exactly zero, where the nearest-point
    mapping falls back to the lowest constellation index per user.
    """
    y = np.atleast_2d(np.asarray(y, dtype=float))
    if ridge is None:
        ridge = cfg.n_users * eff.noise_std ** 2
    h = eff.h_eff
    if not np.isfinite(ridge):
        s = np.zeros((y.shape[0], h.shape[1]))
        return _to_joint_indices(cfg, s)
    a = h.T @ h + ridge * np.eye(h.shape[1])
    s = np.linalg.solve(a, h.T @ y.T)
    return _to_joint_indices(cfg, s.T)


def lmmse_detect(cfg: NetworkConfig, eff: EffectiveChannel, y: np.ndarray,
                 ridge: float | None = None) -> int:
    return int(lmmse_detect_batch(cfg, eff, np.atleast_2d(y), ridge=ridge)[0])
