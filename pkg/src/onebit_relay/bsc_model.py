"""Model-based supervised learning: codebook + crossover learning, wMHD detection.

The end-to-end cascade is modeled as 2N parallel binary symmetric channels
per input: a codeword c_i (the noise-free BS sign pattern for input i) plus
per-coordinate crossover probabilities p_{i,n}. Both are learned from a
pilot block, and detection is weighted minimum Hamming distance with weights
w = -ln p on mismatches and w^c = -ln(1 - p) on matches, which reproduces
the BSC maximum-likelihood decision exactly.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .channel import (ChannelRealization, ConfigurationError, FrameConfig,
                      NetworkConfig, noiseless_cascade, sign_quantize,
                      simulate_frames)


def encode_codeword(ch: ChannelRealization, x: np.ndarray) -> np.ndarray:
    """Noise-free BS sign pattern for a stacked input vector."""
    return sign_quantize(noiseless_cascade(ch, x))


def build_codebook(cfg: NetworkConfig, ch: ChannelRealization) -> np.ndarray:
    """Codewords of every enumerated input, (num_inputs, 2N) over {-1,+1}."""
    return sign_quantize(noiseless_cascade(ch, cfg.input_enumeration().real_forms))


def code_rate(cfg: NetworkConfig) -> float:
    """K binary-input pairs over N channel-use pairs: r = K / N."""
    return cfg.n_users / cfg.n_antennas


@dataclass
class BscModel:
    """Learned parameter set: codewords plus per-coordinate crossovers.

    Exactly num_inputs x 2N codeword bits and num_inputs x 2N crossover
    values are stored; the log-domain weights are derived caches.
    """

    codewords: np.ndarray      # (num_inputs, 2N) over {-1,+1}
    crossover: np.ndarray      # (num_inputs, 2N) in (0, 1)
    w_mismatch: np.ndarray = field(init=False, repr=False)  # -ln p
    w_match: np.ndarray = field(init=False, repr=False)     # -ln(1-p)

    def __post_init__(self):
        self.codewords = np.asarray(self.codewords, dtype=np.int8)
        self.crossover = np.asarray(self.crossover, dtype=float)
        if self.codewords.shape != self.crossover.shape:
            raise ConfigurationError("codewords and crossover shapes differ")
        if not np.all((self.crossover > 0) & (self.crossover < 1)):
            raise ConfigurationError("crossover probabilities must lie strictly in (0, 1)")
        self.w_mismatch = -np.log(self.crossover)
        self.w_match = -np.log(1.0 - self.crossover)

    @property
    def num_inputs(self) -> int:
        return self.codewords.shape[0]

    def to_json_dict(self) -> dict:
        return {
            "codewords": self.codewords.astype(int).tolist(),
            "crossover": self.crossover.tolist(),
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "BscModel":
        return cls(codewords=np.asarray(d["codewords"]), crossover=np.asarray(d["crossover"]))

    def save(self, path):
        with open(path, "w") as f:
            json.dump(self.to_json_dict(), f)

    @classmethod
    def load(cls, path) -> "BscModel":
        with open(path) as f:
            return cls.from_json_dict(json.load(f))


@dataclass
class TrainingSet:
    """Labeled pilot observations: input index and BS sign vector per slot."""

    labels: np.ndarray    # (T_t,) input indices
    outputs: np.ndarray   # (T_t, 2N) over {-1,+1}
    num_inputs: int

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=int)
        self.outputs = np.asarray(self.outputs, dtype=np.int8)
        if self.labels.shape[0] != self.outputs.shape[0]:
            raise ConfigurationError("labels and outputs disagree on slot count")

    @staticmethod
    def pilot_labels(num_inputs: int, pilots_per_input: int) -> np.ndarray:
        """Schedule: inputs in enumeration order, T consecutive repeats each."""
        return np.repeat(np.arange(num_inputs), pilots_per_input)

    @classmethod
    def simulate(cls, cfg: NetworkConfig, frame: FrameConfig, ch: ChannelRealization,
                 rng: np.random.Generator) -> "TrainingSet":
        """Run the pilot phase: every input sent T times in schedule order."""
        enum = cfg.input_enumeration()
        labels = cls.pilot_labels(enum.size, frame.pilots_per_input)
        outputs = simulate_frames(cfg, ch, enum.real_forms[labels], rng)
        return cls(labels=labels, outputs=outputs, num_inputs=enum.size)

    def group_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.num_inputs)


def learn_codebook(train: TrainingSet) -> np.ndarray:
    """Sign of the per-input sample mean of the received sign vectors."""
    counts = train.group_counts()
    if np.any(counts == 0):
        missing = int(np.argmin(counts))
        raise ConfigurationError(f"no training samples for input {missing}")
    sums = np.zeros((train.num_inputs, train.outputs.shape[1]))
    np.add.at(sums, train.labels, train.outputs.astype(float))
    return sign_quantize(sums / counts[:, None])


def learn_crossover(train: TrainingSet, codewords: np.ndarray) -> np.ndarray:
    """Per-(input, coordinate) mismatch fraction against the codebook.

    Clipped into [eps_i, 1 - eps_i] with eps_i = 1/(2 T_i) so the log-domain
    weights stay finite; the half-count smoothing vanishes as T grows.
    """
    counts = train.group_counts().astype(float)
    flips = np.zeros_like(codewords, dtype=float)
    np.add.at(flips, train.labels,
              (train.outputs != codewords[train.labels]).astype(float))
    p = flips / counts[:, None]
    eps = 1.0 / (2.0 * counts[:, None])
    return np.clip(p, eps, 1.0 - eps)


def learn_bsc_model(train: TrainingSet) -> BscModel:
    """Codebook first, then crossovers against the learned codebook."""
    codewords = learn_codebook(train)
    return BscModel(codewords=codewords, crossover=learn_crossover(train, codewords))


def wmhd_distances(model: BscModel, y: np.ndarray) -> np.ndarray:
    """Weighted Hamming distance of each codeword to each received vector.

    d_i = sum_n [ w_{i,n} 1{c_{i,n} != y_n} + w^c_{i,n} 1{c_{i,n} = y_n} ].
    Uses 1{c != y} = (1 - y c)/2, reducing the batch to one matmul.
    """
    y = np.atleast_2d(np.asarray(y, dtype=float))
    delta = model.w_mismatch - model.w_match
    base = model.w_match.sum(axis=1) + 0.5 * delta.sum(axis=1)
    return base[None, :] - 0.5 * (y @ (delta * model.codewords).T)


def wmhd_detect_batch(model: BscModel, y: np.ndarray) -> np.ndarray:
    """Minimum weighted Hamming distance indices; ties pick the lowest index."""
    return np.argmin(wmhd_distances(model, y), axis=1)


def wmhd_detect(model: BscModel, y: np.ndarray) -> int:
    return int(wmhd_detect_batch(model, np.atleast_2d(y))[0])


def bsc_log_likelihood(model: BscModel, y: np.ndarray) -> np.ndarray:
    """Direct per-codeword BSC log-likelihood ln P(y | c_i).

    Computed by explicit indicator masking, independently of the distance
    form, so the wMHD equivalence can be cross-checked.
    """
    y = np.atleast_2d(np.asarray(y, dtype=np.int8))
    mismatch = y[:, None, :] != model.codewords[None, :, :]
    return np.where(mismatch, np.log(model.crossover)[None, :, :],
                    np.log(1.0 - model.crossover)[None, :, :]).sum(axis=2)


@dataclass
class Algorithm1Result:
    """Trained model plus the data-phase ground truth and decisions."""

    model: BscModel
    transmitted: np.ndarray
    detected: np.ndarray


def run_algorithm1(cfg: NetworkConfig, frame: FrameConfig, ch: ChannelRealization,
                   rng: np.random.Generator) -> Algorithm1Result:
    """Pilot training followed by per-slot wMHD detection on fresh data slots."""
    enum = cfg.input_enumeration()
    train = TrainingSet.simulate(cfg, frame, ch, rng)
    model = learn_bsc_model(train)
    if frame.data_slots == 0:
        empty = np.zeros(0, dtype=int)
        return Algorithm1Result(model=model, transmitted=empty, detected=empty)
    transmitted = rng.integers(0, enum.size, size=frame.data_slots)
    y = simulate_frames(cfg, ch, enum.real_forms[transmitted], rng)
    detected = wmhd_detect_batch(model, y)
    return Algorithm1Result(model=model, transmitted=transmitted, detected=detected)
