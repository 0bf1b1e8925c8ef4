"""Exact end-to-end likelihood and the optimal ML detector.

The conditional law of the BS sign vector given the transmitted vector is a
sum over all relay sign states of a product of per-hop Q-function factors.
The sum is evaluated exactly as a forward pass over relay layers (a chain of
transition matrices), entirely in the log domain with log-sum-exp reductions
so that long products of small Q values cannot underflow.

Hops with zero noise are handled exactly as deterministic sign propagation
(the relay state is a point mass), so the detector also covers the
infinite-SNR regimes used by the learned-model optimality experiments.
"""

import itertools

import numpy as np
from scipy.special import erfc, logsumexp

from .channel import ChannelRealization, NetworkConfig, _check_dims, sign_quantize

DEFAULT_STATE_CAP = 24      # max total enumerated relay bits
_Q_FLOOR = 1e-300           # Q of large arguments underflows to exact 0
_CHUNK_FLOATS = 4_000_000   # working-set target for batched reductions


class DegenerateNoiseError(ValueError):
    """A noisy-hop transition probability was requested with sigma = 0."""


class ComplexityRefusalError(RuntimeError):
    """Relay-state enumeration would exceed the configured bit cap."""


def q_function(t) -> np.ndarray | float:
    """Gaussian tail probability Q(t) = P[Z > t] for standard normal Z."""
    t = np.asarray(t, dtype=float)
    out = 0.5 * erfc(t / np.sqrt(2.0))
    return out if out.ndim else float(out)


def log_q(t) -> np.ndarray:
    """log Q(t) with Q clipped into [1e-300, 1] so the log stays finite."""
    return np.log(np.clip(0.5 * erfc(np.asarray(t, dtype=float) / np.sqrt(2.0)), _Q_FLOOR, 1.0))


def enumerate_sign_vectors(n_bits: int) -> np.ndarray:
    """All 2^n_bits vectors over {-1,+1}; bit j of the index is column j."""
    idx = np.arange(2 ** n_bits, dtype=np.int64)
    bits = (idx[:, None] >> np.arange(n_bits)) & 1
    return (2 * bits - 1).astype(np.int8)


def hop_transition_prob(h: np.ndarray, inp: np.ndarray, out: np.ndarray, sigma: float) -> float:
    """Probability of one hop's sign output given its (real) input.

    prod_n Q(-out_n * <h_n, inp> / (sigma/sqrt(2))). Requires sigma > 0;
    noiseless hops are deterministic and must use the sign-cascade path.
    """
    if sigma <= 0:
        raise DegenerateNoiseError("hop_transition_prob needs sigma > 0")
    h = np.asarray(h, dtype=float)
    z = h @ np.asarray(inp, dtype=float)
    return float(np.prod(q_function(-np.asarray(out, dtype=float) * z / (sigma / np.sqrt(2.0)))))


def _batch_chunks(n_rows: int, floats_per_row: int):
    step = max(1, _CHUNK_FLOATS // max(1, floats_per_row))
    for start in range(0, n_rows, step):
        yield start, min(start + step, n_rows)


class MLDetector:
    """Precomputed exact-likelihood evaluator for one (config, channel) pair.

    The forward pass over relay layers runs once at construction; per-slot
    work is then a single reduction against the final-hop statistics. Batch
    methods accept (B, 2N) matrices of BS sign vectors.
    """

    def __init__(self, cfg: NetworkConfig, ch: ChannelRealization,
                 state_cap: int = DEFAULT_STATE_CAP):
        _check_dims(cfg, ch)
        self.cfg = cfg
        self.ch = ch
        self.enum = cfg.input_enumeration()
        self._sigma_last = cfg.noise_std[-1]
        self._prepare(state_cap)

    def _prepare(self, state_cap: int):
        cfg, ch = self.cfg, self.ch
        cur = self.enum.real_forms.astype(float)   # per-input deterministic vectors
        support = None                             # shared relay-state rows
        logp = None                                # (num_inputs, S) state log-masses
        enumerated_bits = 0

        for m in range(1, cfg.n_hops):             # relay hops 1..M-1
            h = ch.real_hops[m - 1]
            sigma = cfg.noise_std[m - 1]
            n_bits = 2 * cfg.relay_counts[m - 1]
            if support is None:
                if sigma == 0:
                    cur = sign_quantize(cur @ h.T).astype(float)
                    continue
                enumerated_bits += n_bits
                if enumerated_bits > state_cap:
                    raise ComplexityRefusalError(
                        f"relay-state enumeration needs {enumerated_bits} bits, cap is {state_cap}")
                support = enumerate_sign_vectors(n_bits).astype(float)
                u = cur @ h.T                       # (num_inputs, n_bits)
                scale = sigma / np.sqrt(2.0)
                # each state bit contributes log Q(-/+ u / scale); one matmul
                # against the plus-bit indicator covers all 2^n_bits states
                lq_plus = log_q(-u / scale)
                lq_minus = log_q(u / scale)
                ind = (support > 0).astype(float)
                logp = lq_minus.sum(axis=1)[:, None] + (lq_plus - lq_minus) @ ind.T
            else:
                if sigma == 0:
                    support = sign_quantize(support @ h.T).astype(float)
                    continue
                enumerated_bits += n_bits
                if enumerated_bits > state_cap:
                    raise ComplexityRefusalError(
                        f"relay-state enumeration needs {enumerated_bits} bits, cap is {state_cap}")
                states = enumerate_sign_vectors(n_bits).astype(float)
                g = support @ h.T                   # (S_old, n_bits)
                scale = sigma / np.sqrt(2.0)
                new_logp = np.empty((logp.shape[0], states.shape[0]))
                for lo, hi in _batch_chunks(states.shape[0], g.shape[0] * n_bits):
                    # trans[w, v] = sum_j log Q(-states[w, j] g[v, j] / scale)
                    trans = log_q(-(states[lo:hi, None, :] * g[None, :, :]) / scale).sum(axis=2)
                    new_logp[:, lo:hi] = logsumexp(
                        trans[None, :, :] + logp[:, None, :], axis=2)
                support = states
                logp = new_logp

        h_last = ch.real_hops[-1]
        if support is None:
            # every relay hop was noiseless: per-input pre-quantization vectors
            pre = cur @ h_last.T                    # (num_inputs, 2N)
            self._logp = None
        else:
            pre = support @ h_last.T                # (S, 2N)
            self._logp = logp
        self._n_states = pre.shape[0]
        if self._sigma_last > 0:
            # final-hop log-probabilities split by the sign of each BS bit,
            # so a batch of outputs reduces to one indicator matmul
            scale = self._sigma_last / np.sqrt(2.0)
            lq_plus = log_q(-pre / scale)
            lq_minus = log_q(pre / scale)
            self._final_base = lq_minus.sum(axis=1)
            self._final_dif = (lq_plus - lq_minus).T     # (2N, rows)
            self._final_codes = None
        else:
            self._final_codes = sign_quantize(pre).astype(float)

    def _final_bit_terms(self, y_chunk: np.ndarray) -> np.ndarray:
        """Per-row final-hop log-probabilities against each pre-quantization row."""
        if self._final_codes is None:
            return self._final_base[None, :] + (y_chunk > 0).astype(float) @ self._final_dif
        # noiseless last hop: probability one on the exact sign match
        dot = y_chunk @ self._final_codes.T
        return np.where(dot == y_chunk.shape[1], 0.0, -np.inf)

    def log_likelihoods(self, y: np.ndarray) -> np.ndarray:
        """log P[y | x_i] for every input, for a (B, 2N) batch of sign vectors."""
        y = np.atleast_2d(np.asarray(y, dtype=float))
        if y.shape[1] != 2 * self.cfg.n_antennas:
            raise ValueError(f"y has length {y.shape[1]}, expected {2 * self.cfg.n_antennas}")
        out = np.empty((y.shape[0], self.enum.size))
        if self._logp is not None:
            state_max = self._logp.max(axis=1)
            scaled_states = np.exp(self._logp - state_max[:, None]).T  # (S, num_inputs)
        for lo, hi in _batch_chunks(y.shape[0], self._n_states):
            terms = self._final_bit_terms(y[lo:hi])
            if self._logp is None:
                out[lo:hi] = terms
                continue
            # logsumexp over states via a max-shifted product; -inf rows
            # (impossible outputs under a noiseless last hop) stay -inf
            term_max = terms.max(axis=1)
            finite = np.isfinite(term_max)
            shifted = np.exp(terms[finite] - term_max[finite, None])
            with np.errstate(divide="ignore"):
                reduced = np.log(shifted @ scaled_states)
            out[lo:hi][finite] = reduced + term_max[finite, None] + state_max[None, :]
            out[lo:hi][~finite] = -np.inf
        return out

    def likelihoods(self, y: np.ndarray) -> np.ndarray:
        return np.exp(self.log_likelihoods(y))

    def detect(self, y: np.ndarray) -> np.ndarray:
        """ML input indices for a batch of sign vectors; ties pick the lowest index."""
        return np.argmax(self.log_likelihoods(y), axis=1)


def end_to_end_likelihood(cfg: NetworkConfig, ch: ChannelRealization, input_index: int,
                          y: np.ndarray, state_cap: int = DEFAULT_STATE_CAP) -> float:
    """P[y | x_i] for one input and one BS sign vector.

    Repeated evaluation against the same channel should reuse an MLDetector.
    """
    det = MLDetector(cfg, ch, state_cap=state_cap)
    return float(det.likelihoods(np.atleast_2d(y))[0, input_index])


def ml_detect(cfg: NetworkConfig, ch: ChannelRealization, y: np.ndarray,
              state_cap: int = DEFAULT_STATE_CAP) -> int:
    """Exact ML decision for a single BS sign vector."""
    det = MLDetector(cfg, ch, state_cap=state_cap)
    return int(det.detect(np.atleast_2d(y))[0])


def likelihood_table(cfg: NetworkConfig, ch: ChannelRealization,
                     state_cap: int = DEFAULT_STATE_CAP) -> np.ndarray:
    """Full (num_inputs, 2^{2N}) transition table; exhaustive, small N only.

    Output column j corresponds to enumerate_sign_vectors(2N) row j, so each
    row sums to 1.
    """
    det = MLDetector(cfg, ch, state_cap=state_cap)
    outputs = enumerate_sign_vectors(2 * cfg.n_antennas).astype(float)
    return det.likelihoods(outputs).T


def brute_force_likelihood(cfg: NetworkConfig, ch: ChannelRealization,
                           x: np.ndarray, y: np.ndarray) -> float:
    """Linear-domain reference: explicit sum over all relay-state tuples.

    Exponential in the relay counts; kept as an independent cross-check of
    the log-domain chain for tiny configurations. Requires all sigma > 0.
    """
    _check_dims(cfg, ch)
    if any(s <= 0 for s in cfg.noise_std):
        raise DegenerateNoiseError("brute force path requires all sigma > 0")
    layers = [enumerate_sign_vectors(2 * c).astype(float) for c in cfg.relay_counts]
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    total = 0.0
    for states in itertools.product(*[range(len(s)) for s in layers]):
        p = 1.0
        prev = x
        for m, s_idx in enumerate(states):
            out = layers[m][s_idx]
            p *= hop_transition_prob(ch.real_hops[m], prev, out, cfg.noise_std[m])
            prev = out
        p *= hop_transition_prob(ch.real_hops[-1], prev, y, cfg.noise_std[-1])
        total += p
    return total
