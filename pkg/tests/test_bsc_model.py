import dataclasses
import json

import numpy as np
import pytest

from onebit_relay.channel import (ChannelRealization, ConfigurationError,
                                  FrameConfig, NetworkConfig, draw_channel,
                                  noiseless_cascade, real_form, sign_quantize)
from onebit_relay.bsc_model import (BscModel, TrainingSet, bsc_log_likelihood,
                                    build_codebook, code_rate, encode_codeword,
                                    learn_bsc_model, learn_codebook,
                                    learn_crossover, run_algorithm1,
                                    wmhd_detect, wmhd_detect_batch,
                                    wmhd_distances)
from onebit_relay.exact_ml import q_function


def random_model(rng, num_inputs=8, width=12, p_lo=0.01, p_hi=0.99):
    cw = rng.choice([-1, 1], size=(num_inputs, width)).astype(np.int8)
    p = rng.uniform(p_lo, p_hi, size=(num_inputs, width))
    return BscModel(codewords=cw, crossover=p)


def test_encode_identity_hops_gives_sign_of_input():
    # K = L_1 = N and identity hop matrices: the codeword is the sign
    # pattern of the stacked input
    cfg = NetworkConfig(n_users=2, relay_counts=(2,), n_antennas=2, noise_std=(0.1, 0.1))
    ch = ChannelRealization.from_hops([np.eye(2, dtype=complex), np.eye(2, dtype=complex)])
    enum = cfg.input_enumeration()
    for i in (0, 5, 15):
        x = enum.real_forms[i]
        np.testing.assert_array_equal(encode_codeword(ch, x), sign_quantize(x))


def test_encode_invariant_to_positive_scaling():
    cfg = NetworkConfig(n_users=2, relay_counts=(3,), n_antennas=4, noise_std=(0.1, 0.1))
    ch = draw_channel(cfg, np.random.default_rng(0))
    scaled = ChannelRealization.from_hops([3.7 * ch.hops[0], 0.04 * ch.hops[1]])
    x = cfg.input_enumeration().real_forms[6]
    np.testing.assert_array_equal(encode_codeword(ch, x), encode_codeword(scaled, x))


def test_encode_matches_high_snr_centroid():
    cfg = NetworkConfig.from_snr(2, [3], 4, [30.0, 30.0])
    ch = draw_channel(cfg, np.random.default_rng(8))  # min |g| ~ 0.36 for this seed
    frame = FrameConfig(pilots_per_input=10_000, data_slots=0)
    rng = np.random.default_rng(1)
    train = TrainingSet.simulate(cfg, frame, ch, rng)
    np.testing.assert_array_equal(learn_codebook(train), build_codebook(cfg, ch))


def test_code_rate():
    cfg = NetworkConfig(n_users=2, relay_counts=(8,), n_antennas=16, noise_std=(0.1, 0.1))
    assert code_rate(cfg) == 0.125


def test_learn_codebook_identical_samples():
    y = np.array([[1, -1, 1]], dtype=np.int8)
    train = TrainingSet(labels=np.zeros(4, dtype=int),
                        outputs=np.repeat(y, 4, axis=0), num_inputs=1)
    np.testing.assert_array_equal(learn_codebook(train), y)


def test_learn_codebook_majority_vote():
    train = TrainingSet(labels=np.zeros(3, dtype=int),
                        outputs=np.array([[1], [1], [-1]], dtype=np.int8),
                        num_inputs=1)
    np.testing.assert_array_equal(learn_codebook(train), [[1]])


def test_learn_codebook_empty_group_errors():
    train = TrainingSet(labels=np.zeros(2, dtype=int),
                        outputs=np.ones((2, 3), dtype=np.int8), num_inputs=2)
    with pytest.raises(ConfigurationError):
        learn_codebook(train)


def test_learn_codebook_bit_flip_equivariance():
    rng = np.random.default_rng(2)
    train = TrainingSet(labels=rng.integers(0, 4, size=40),
                        outputs=rng.choice([-1, 1], size=(40, 6)).astype(np.int8),
                        num_inputs=4)
    flipped = TrainingSet(labels=train.labels, outputs=-train.outputs, num_inputs=4)
    a = learn_codebook(train)
    b = learn_codebook(flipped)
    # equivariant except at exact zero means, where the sign convention
    # sends both to +1; exclude those coordinates
    sums = np.zeros_like(a, dtype=float)
    np.add.at(sums, train.labels, train.outputs.astype(float))
    mask = sums != 0
    np.testing.assert_array_equal(a[mask], -b[mask])


def test_learn_crossover_counts_and_clipping():
    codewords = np.array([[1, 1]], dtype=np.int8)
    outputs = np.array([[1, 1], [1, 1], [1, -1], [1, 1]], dtype=np.int8)
    train = TrainingSet(labels=np.zeros(4, dtype=int), outputs=outputs, num_inputs=1)
    p = learn_crossover(train, codewords)
    assert p[0, 0] == pytest.approx(1.0 / 8.0)   # zero flips, clipped to 1/(2T)
    assert p[0, 1] == pytest.approx(0.25)        # one flip in four


def test_learn_crossover_matches_gaussian_tail_limit():
    cfg = NetworkConfig(n_users=2, relay_counts=(4,), n_antennas=8,
                        noise_std=(0.0, 10 ** (-10 / 20)))
    ch = draw_channel(cfg, np.random.default_rng(3))
    frame = FrameConfig(pilots_per_input=500, data_slots=0)
    train = TrainingSet.simulate(cfg, frame, ch, np.random.default_rng(4))
    model = learn_bsc_model(train)
    g = noiseless_cascade(ch, cfg.input_enumeration().real_forms)
    target = q_function(np.abs(g) / (cfg.noise_std[1] / np.sqrt(2)))
    mask = np.abs(g) > 0.3
    assert np.max(np.abs(model.crossover - target)[mask]) < 0.06


def test_wmhd_uniform_weights_reduce_to_hamming():
    rng = np.random.default_rng(5)
    cw = rng.choice([-1, 1], size=(6, 10)).astype(np.int8)
    model = BscModel(codewords=cw, crossover=np.full((6, 10), 0.2))
    for _ in range(50):
        y = rng.choice([-1, 1], size=10)
        hamming = (cw != y).sum(axis=1)
        assert wmhd_detect(model, y) == int(np.argmin(hamming))


def test_wmhd_returns_matching_codeword():
    rng = np.random.default_rng(6)
    cw = np.unique(rng.choice([-1, 1], size=(16, 12)), axis=0).astype(np.int8)
    p = rng.uniform(0.05, 0.45, size=cw.shape)
    model = BscModel(codewords=cw, crossover=p)
    for i in range(len(cw)):
        assert wmhd_detect(model, cw[i]) == i


def test_wmhd_identity_with_bsc_likelihood():
    rng = np.random.default_rng(7)
    for _ in range(1000):
        model = random_model(rng)
        y = rng.choice([-1, 1], size=12)
        assert int(np.argmin(wmhd_distances(model, y)[0])) == \
               int(np.argmax(bsc_log_likelihood(model, y)[0]))


def test_wmhd_invariant_to_constant_distance_shift():
    rng = np.random.default_rng(8)
    model = random_model(rng)
    y = rng.choice([-1, 1], size=12)
    d = wmhd_distances(model, y)[0]
    assert int(np.argmin(d)) == int(np.argmin(d + 13.7))


def test_model_parameter_count():
    cfg = NetworkConfig(n_users=2, relay_counts=(4,), n_antennas=8, noise_std=(0.1, 0.2))
    ch = draw_channel(cfg, np.random.default_rng(9))
    train = TrainingSet.simulate(cfg, FrameConfig(4, 0), ch, np.random.default_rng(10))
    model = learn_bsc_model(train)
    expected = (cfg.num_inputs, 2 * cfg.n_antennas)
    assert model.codewords.shape == expected
    assert model.crossover.shape == expected
    learned = [f for f in dataclasses.fields(model) if f.init]
    assert {f.name for f in learned} == {"codewords", "crossover"}


def test_model_rejects_degenerate_probabilities():
    with pytest.raises(ConfigurationError):
        BscModel(codewords=np.ones((1, 2), dtype=np.int8),
                 crossover=np.array([[0.0, 0.5]]))


def test_model_json_roundtrip(tmp_path):
    model = random_model(np.random.default_rng(11))
    path = tmp_path / "model.json"
    model.save(path)
    loaded = BscModel.load(path)
    np.testing.assert_array_equal(loaded.codewords, model.codewords)
    np.testing.assert_array_equal(loaded.crossover, model.crossover)
    schema = json.loads(path.read_text())
    assert set(schema) == {"codewords", "crossover"}
    assert all(v in (-1, 1) for row in schema["codewords"] for v in row)


def test_algorithm1_training_only():
    cfg = NetworkConfig.from_snr(2, [3], 4, [15.0, 15.0])
    ch = draw_channel(cfg, np.random.default_rng(12))
    res = run_algorithm1(cfg, FrameConfig(5, 0), ch, np.random.default_rng(13))
    assert res.detected.size == 0 and res.transmitted.size == 0
    assert res.model.codewords.shape == (16, 8)


def test_algorithm1_deterministic():
    cfg = NetworkConfig.from_snr(2, [3], 4, [15.0, 15.0])
    ch = draw_channel(cfg, np.random.default_rng(14))
    a = run_algorithm1(cfg, FrameConfig(5, 200), ch, np.random.default_rng(15))
    b = run_algorithm1(cfg, FrameConfig(5, 200), ch, np.random.default_rng(15))
    np.testing.assert_array_equal(a.detected, b.detected)
    np.testing.assert_array_equal(a.model.crossover, b.model.crossover)


def test_training_set_schedule_order():
    labels = TrainingSet.pilot_labels(4, 3)
    np.testing.assert_array_equal(labels, [0, 0, 0, 1, 1, 1, 2, 2, 2, 3, 3, 3])


def test_wmhd_batch_matches_single():
    rng = np.random.default_rng(16)
    model = random_model(rng)
    ys = rng.choice([-1, 1], size=(30, 12))
    batch = wmhd_detect_batch(model, ys)
    singles = [wmhd_detect(model, y) for y in ys]
    np.testing.assert_array_equal(batch, singles)
