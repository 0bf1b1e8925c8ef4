"""Online supervised-learning detector: per-slot soft labels and model updates.

After batch training, every data slot runs one expectation step (a posterior
over codewords from the current model) and one maximization step (weighted
centroid, codeword, and crossover refresh), then detects with the refreshed
model. There are no inner iterations; the stream is processed sample by
sample so the model can track channel drift.

Crossover bookkeeping: the estimate at slot t sums indicators against the
slot-t codeword over all past slots. Rather than storing history, a weighted
flip count per (input, coordinate) is kept against the current codeword bit
and replaced by its complement (gamma_sum - count) whenever that bit flips;
this reproduces the full re-summation exactly with O(1) memory per
parameter.
"""

import json
from dataclasses import dataclass

import numpy as np

from .bsc_model import BscModel, TrainingSet, wmhd_distances, wmhd_detect_batch
from .channel import (ChannelRealization, FrameConfig, NetworkConfig,
                      TimeVaryingConfig, evolve_channel, simulate_frames)


@dataclass
class OnlineState:
    """Running sufficient statistics plus the current learned model."""

    centroids: np.ndarray     # (num_inputs, 2N) weighted sums of received vectors
    gamma_sums: np.ndarray    # (num_inputs,) accumulated label mass
    flip_counts: np.ndarray   # (num_inputs, 2N) weighted mismatches vs current codewords
    model: BscModel


def _clipped_crossover(flip_counts: np.ndarray, gamma_sums: np.ndarray) -> np.ndarray:
    # effective-sample-size clipping: eps_i = 1/(2 sum_t gamma_i[t])
    p = flip_counts / gamma_sums[:, None]
    eps = 1.0 / (2.0 * gamma_sums[:, None])
    return np.clip(p, eps, 1.0 - eps)


def init_state(train: TrainingSet) -> OnlineState:
    """Seed the online state from the labeled pilot block (one-hot gammas)."""
    num_inputs, width = train.num_inputs, train.outputs.shape[1]
    centroids = np.zeros((num_inputs, width))
    np.add.at(centroids, train.labels, train.outputs.astype(float))
    gamma_sums = train.group_counts().astype(float)
    if np.any(gamma_sums == 0):
        raise ValueError("every input needs at least one training slot")
    codewords = np.where(centroids >= 0, 1, -1).astype(np.int8)
    flip_counts = np.zeros((num_inputs, width))
    np.add.at(flip_counts, train.labels,
              (train.outputs != codewords[train.labels]).astype(float))
    model = BscModel(codewords=codewords,
                     crossover=_clipped_crossover(flip_counts, gamma_sums))
    return OnlineState(centroids=centroids, gamma_sums=gamma_sums,
                       flip_counts=flip_counts, model=model)


def compute_app(model: BscModel, y: np.ndarray) -> np.ndarray:
    """Posterior over codewords under a uniform prior.

    gamma_k is proportional to exp(-d_wH(c_k, y)); the minimum distance is
    subtracted before exponentiating so the softmax is stable.
    """
    d = wmhd_distances(model, np.atleast_2d(y))[0]
    g = np.exp(-(d - d.min()))
    return g / g.sum()


def update_parameters(state: OnlineState, y: np.ndarray, gamma: np.ndarray) -> OnlineState:
    """One maximization step: centroid, codeword, and crossover refresh."""
    y = np.asarray(y, dtype=np.int8)
    gamma = np.asarray(gamma, dtype=float)
    centroids = state.centroids + gamma[:, None] * y[None, :].astype(float)
    gamma_sums = state.gamma_sums + gamma
    old_codewords = state.model.codewords
    # accumulate this slot against the old codewords, then apply the
    # complement identity wherever a codeword bit flips
    flip_counts = state.flip_counts + gamma[:, None] * (y[None, :] != old_codewords)
    codewords = np.where(centroids >= 0, 1, -1).astype(np.int8)
    flipped = codewords != old_codewords
    if np.any(flipped):
        flip_counts = np.where(flipped, gamma_sums[:, None] - flip_counts, flip_counts)
    model = BscModel(codewords=codewords,
                     crossover=_clipped_crossover(flip_counts, gamma_sums))
    return OnlineState(centroids=centroids, gamma_sums=gamma_sums,
                       flip_counts=flip_counts, model=model)


@dataclass
class Algorithm2Result:
    transmitted: np.ndarray
    detected: np.ndarray
    state: OnlineState
    update_magnitudes: np.ndarray  # per-slot mean |crossover change|, for convergence checks


def detect_stream(state: OnlineState, stream: np.ndarray,
                  force_labels: np.ndarray | None = None,
                  trajectory_log=None) -> tuple[np.ndarray, OnlineState, np.ndarray]:
    """Run the online detector over a pre-generated stream of sign vectors.

    When force_labels is given, gammas are one-hot on those labels (the
    labeled-data case); otherwise they come from the current model's
    posterior. Detection always uses the post-update model for the slot.
    Returns (decisions, final state, per-slot update magnitudes).
    """
    stream = np.atleast_2d(np.asarray(stream, dtype=np.int8))
    detected = np.empty(stream.shape[0], dtype=int)
    magnitudes = np.empty(stream.shape[0])
    num_inputs = state.model.num_inputs
    for t, y in enumerate(stream):
        if force_labels is None:
            gamma = compute_app(state.model, y)
        else:
            gamma = np.zeros(num_inputs)
            gamma[force_labels[t]] = 1.0
        prev_crossover = state.model.crossover
        state = update_parameters(state, y, gamma)
        detected[t] = wmhd_detect_batch(state.model, y[None, :])[0]
        magnitudes[t] = np.mean(np.abs(state.model.crossover - prev_crossover))
        if trajectory_log is not None:
            trajectory_log.write(json.dumps({
                "slot": t,
                "gamma": [round(float(g), 6) for g in gamma],
                "flip_rates": [round(float(p), 6) for p in state.model.crossover.mean(axis=1)],
            }) + "\n")
    return detected, state, magnitudes


def run_algorithm2(cfg: NetworkConfig, frame: FrameConfig, ch: ChannelRealization,
                   rng: np.random.Generator, tv: TimeVaryingConfig | None = None,
                   force_true_labels: bool = False,
                   trajectory_log=None) -> Algorithm2Result:
    """Full frame: batch training, then the online loop over the data phase.

    The channel is held fixed during training; with a time-varying config it
    evolves once per data slot before the slot is transmitted.
    """
    enum = cfg.input_enumeration()
    train = TrainingSet.simulate(cfg, frame, ch, rng)
    state = init_state(train)
    transmitted = rng.integers(0, enum.size, size=frame.data_slots)
    if tv is None:
        stream = simulate_frames(cfg, ch, enum.real_forms[transmitted], rng)
    else:
        stream = np.empty((frame.data_slots, 2 * cfg.n_antennas), dtype=np.int8)
        for t in range(frame.data_slots):
            ch = evolve_channel(ch, tv, rng)
            stream[t] = simulate_frames(cfg, ch, enum.real_forms[transmitted[t]], rng)[0]
    detected, state, magnitudes = detect_stream(
        state, stream,
        force_labels=transmitted if force_true_labels else None,
        trajectory_log=trajectory_log)
    return Algorithm2Result(transmitted=transmitted, detected=detected,
                            state=state, update_magnitudes=magnitudes)
