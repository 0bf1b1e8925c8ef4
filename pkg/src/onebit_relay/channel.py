"""Multi-hop one-bit relay channel: configuration, simulation, time evolution.

Signal path for M hops with one-bit transceivers everywhere:

    r_1 = sign(H_1 x + v_1)
    r_m = sign(H_m r_{m-1} + v_m),   m = 2..M-1
    y   = sign(H_M r_{M-1} + v_M)

All arithmetic is done in the real representation: a complex (r x c) matrix
becomes the real (2r x 2c) block matrix [[Re, -Im], [Im, Re]], complex
vectors become stacked [Re; Im] vectors, and the one-bit quantizer applies
the sign function entrywise to the stacked vector. Complex noise with
variance sigma^2 becomes IID real Gaussian entries with std sigma/sqrt(2).
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.special import j0

from .constellation import InputEnumeration, constellation_points


class ConfigurationError(ValueError):
    """Inconsistent network configuration or mismatched dimensions."""


def snr_db_to_noise_std(snr_db: float) -> float:
    """Complex noise std for a per-hop SNR in dB (unit signal power convention)."""
    return 10.0 ** (-snr_db / 20.0)


@dataclass(frozen=True)
class NetworkConfig:
    """Topology and noise levels of the multi-hop MU-MIMO relay network."""

    n_users: int                  # K single-antenna uplink users
    relay_counts: tuple           # (L_1, ..., L_{M-1}) relays per layer
    n_antennas: int               # N BS antennas
    noise_std: tuple              # (sigma_1, ..., sigma_M) complex noise stds
    constellation: str = "qpsk"
    relay_function: str = "identity"

    def __post_init__(self):
        object.__setattr__(self, "relay_counts", tuple(int(c) for c in self.relay_counts))
        object.__setattr__(self, "noise_std", tuple(float(s) for s in self.noise_std))
        if self.n_users < 1 or self.n_antennas < 1:
            raise ConfigurationError("n_users and n_antennas must be positive")
        if len(self.noise_std) != len(self.relay_counts) + 1:
            raise ConfigurationError("need one noise level per hop: len(noise_std) == len(relay_counts) + 1")
        if any(c < 1 for c in self.relay_counts):
            raise ConfigurationError("relay counts must be positive")
        if any(s < 0 for s in self.noise_std):
            raise ConfigurationError("noise stds must be non-negative")
        if self.relay_function != "identity":
            raise ConfigurationError(f"unsupported relay function {self.relay_function!r}")
        constellation_points(self.constellation)  # validates the name

    @classmethod
    def from_snr(cls, n_users, relay_counts, n_antennas, snr_db, constellation="qpsk"):
        """Build a config from per-hop SNRs in dB instead of noise stds."""
        noise_std = tuple(snr_db_to_noise_std(s) for s in snr_db)
        return cls(n_users=n_users, relay_counts=tuple(relay_counts),
                   n_antennas=n_antennas, noise_std=noise_std,
                   constellation=constellation)

    @property
    def n_hops(self) -> int:
        return len(self.noise_std)

    def hop_shape(self, m: int) -> tuple:
        """Complex shape (rows, cols) of hop m, 1-based."""
        rows = self.relay_counts[m - 1] if m < self.n_hops else self.n_antennas
        cols = self.n_users if m == 1 else self.relay_counts[m - 2]
        return rows, cols

    def input_enumeration(self) -> InputEnumeration:
        return _enumeration_cache(self.constellation, self.n_users)

    @property
    def num_inputs(self) -> int:
        return len(constellation_points(self.constellation)) ** self.n_users


_ENUM_CACHE: dict = {}


def _enumeration_cache(constellation: str, num_users: int) -> InputEnumeration:
    key = (constellation, num_users)
    if key not in _ENUM_CACHE:
        _ENUM_CACHE[key] = InputEnumeration.build(constellation, num_users)
    return _ENUM_CACHE[key]


def sign_quantize(v) -> np.ndarray:
    """Entrywise one-bit quantizer: +1 for v >= 0, -1 otherwise.

    sign(0) = +1 is a fixed convention so codebooks are deterministic.
    Raises ValueError on non-finite input.
    """
    v = np.asarray(v, dtype=float)
    if not np.all(np.isfinite(v)):
        raise ValueError("sign_quantize requires finite input")
    return np.where(v >= 0, 1, -1).astype(np.int8)


def real_expand(h: np.ndarray) -> np.ndarray:
    """Real block expansion [[Re, -Im], [Im, Re]] of a complex matrix.

    Multiplicative: real_expand(A) @ real_expand(B) == real_expand(A @ B).
    """
    h = np.asarray(h)
    return np.block([[h.real, -h.imag], [h.imag, h.real]])


def real_form(x: np.ndarray) -> np.ndarray:
    """Stacked [Re; Im] representation of a complex vector."""
    x = np.asarray(x)
    return np.concatenate([x.real, x.imag])


@dataclass(frozen=True)
class ChannelRealization:
    """One draw of the per-hop complex matrices and their real expansions."""

    hops: tuple       # M complex matrices
    real_hops: tuple  # matching real expansions, doubled dimensions

    @classmethod
    def from_hops(cls, hops) -> "ChannelRealization":
        hops = tuple(np.asarray(h, dtype=complex) for h in hops)
        return cls(hops=hops, real_hops=tuple(real_expand(h) for h in hops))

    @property
    def n_hops(self) -> int:
        return len(self.hops)


def draw_channel(cfg: NetworkConfig, rng: np.random.Generator) -> ChannelRealization:
    """IID Rayleigh draw: every complex entry ~ CN(0, 1)."""
    hops = []
    for m in range(1, cfg.n_hops + 1):
        rows, cols = cfg.hop_shape(m)
        h = (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2.0)
        hops.append(h)
    return ChannelRealization.from_hops(hops)


def _check_dims(cfg: NetworkConfig, ch: ChannelRealization):
    if ch.n_hops != cfg.n_hops:
        raise ConfigurationError(f"channel has {ch.n_hops} hops, config expects {cfg.n_hops}")
    for m in range(1, cfg.n_hops + 1):
        if ch.hops[m - 1].shape != cfg.hop_shape(m):
            raise ConfigurationError(
                f"hop {m} has shape {ch.hops[m - 1].shape}, config expects {cfg.hop_shape(m)}")


def simulate_frames(cfg: NetworkConfig, ch: ChannelRealization, x: np.ndarray,
                    rng: np.random.Generator, n_frames: int | None = None) -> np.ndarray:
    """Simulate the full quantized cascade for one or many time slots.

    x is either a single stacked input of length 2K (broadcast over
    ``n_frames`` slots with independent noise) or a (B, 2K) batch with one
    input per slot. Returns the (B, 2N) matrix of BS sign vectors.
    """
    _check_dims(cfg, ch)
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        if n_frames is None:
            n_frames = 1
        s = np.broadcast_to(x, (n_frames, x.shape[0])).copy()
    else:
        if n_frames is not None and n_frames != x.shape[0]:
            raise ConfigurationError("n_frames disagrees with batch size of x")
        s = x.copy()
    if s.shape[1] != 2 * cfg.n_users:
        raise ConfigurationError(f"input has length {s.shape[1]}, expected {2 * cfg.n_users}")

    for m in range(1, cfg.n_hops + 1):
        a = s @ ch.real_hops[m - 1].T
        sigma = cfg.noise_std[m - 1]
        if sigma > 0:
            a = a + rng.standard_normal(a.shape) * (sigma / np.sqrt(2.0))
        s = sign_quantize(a).astype(float)
    return s.astype(np.int8)


def simulate_frame(cfg: NetworkConfig, ch: ChannelRealization, x: np.ndarray,
                   rng: np.random.Generator) -> np.ndarray:
    """Single-slot convenience wrapper around simulate_frames."""
    return simulate_frames(cfg, ch, np.asarray(x, dtype=float), rng, n_frames=1)[0]


def noiseless_cascade(ch: ChannelRealization, x: np.ndarray) -> np.ndarray:
    """Pre-quantization BS signal with every hop noiseless.

    Applies the sign quantizer after hops 1..M-1 and returns H_M r_{M-1}
    (no final-hop noise, no final quantization). For M = 1 this is H_1 x.
    Accepts a single stacked input or a batch of rows.
    """
    s = np.atleast_2d(np.asarray(x, dtype=float))
    for h in ch.real_hops[:-1]:
        s = sign_quantize(s @ h.T).astype(float)
    g = s @ ch.real_hops[-1].T
    return g[0] if np.asarray(x).ndim == 1 else g


@dataclass(frozen=True)
class TimeVaryingConfig:
    """Order-one autoregressive fading on one hop, Jakes correlation.

    eta = J_0(2 pi f_d T_s) is derived from the normalized Doppler.
    """

    normalized_doppler: float   # f_d * T_s
    varying_hop: int = 2        # 1-based hop index that fades over time
    eta: float = field(init=False)

    def __post_init__(self):
        if self.normalized_doppler < 0:
            raise ConfigurationError("normalized Doppler must be non-negative")
        if self.varying_hop < 1:
            raise ConfigurationError("varying_hop is a 1-based hop index")
        object.__setattr__(self, "eta", float(j0(2.0 * np.pi * self.normalized_doppler)))


def evolve_channel(ch: ChannelRealization, tv: TimeVaryingConfig,
                   rng: np.random.Generator) -> ChannelRealization:
    """One AR(1) step H[t] = eta H[t-1] + W[t], W entries ~ CN(0, 1 - eta^2).

    Only the designated hop changes; per-entry stationary variance stays 1.
    """
    m = tv.varying_hop
    if m > ch.n_hops:
        raise ConfigurationError(f"varying_hop {m} exceeds hop count {ch.n_hops}")
    eta = tv.eta
    h_old = ch.hops[m - 1]
    if eta == 1.0:
        return ch
    w = (rng.standard_normal(h_old.shape) + 1j * rng.standard_normal(h_old.shape)) \
        * np.sqrt((1.0 - eta ** 2) / 2.0)
    hops = list(ch.hops)
    hops[m - 1] = eta * h_old + w
    return ChannelRealization.from_hops(hops)


@dataclass(frozen=True)
class FrameConfig:
    """Transmission frame: T pilot repeats per input, then T_d data slots."""

    pilots_per_input: int  # T
    data_slots: int        # T_d

    def __post_init__(self):
        if self.pilots_per_input < 0 or self.data_slots < 0:
            raise ConfigurationError("frame lengths must be non-negative")

    def training_slots(self, num_inputs: int) -> int:
        """T_t = T * |M_t|^K."""
        return self.pilots_per_input * num_inputs

    def block_slots(self, num_inputs: int) -> int:
        """T_B = T_t + T_d."""
        return self.training_slots(num_inputs) + self.data_slots
