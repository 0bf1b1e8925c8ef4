"""Simulator and detectors for multi-hop MU-MIMO relay channels with one-bit transceivers."""

from .channel import (ChannelRealization, ConfigurationError, FrameConfig,
                      NetworkConfig, TimeVaryingConfig, draw_channel,
                      evolve_channel, noiseless_cascade, real_expand,
                      real_form, sign_quantize, simulate_frame,
                      simulate_frames, snr_db_to_noise_std)
from .constellation import InputEnumeration, constellation_points
from .exact_ml import (ComplexityRefusalError, DegenerateNoiseError,
                       MLDetector, end_to_end_likelihood, hop_transition_prob,
                       likelihood_table, ml_detect, q_function)
from .bsc_model import (Algorithm1Result, BscModel, TrainingSet, build_codebook,
                        encode_codeword, learn_bsc_model, learn_codebook,
                        learn_crossover, run_algorithm1, wmhd_detect,
                        wmhd_detect_batch)
from .online_em import (Algorithm2Result, OnlineState, compute_app,
                        detect_stream, init_state, run_algorithm2,
                        update_parameters)
from .linear_baselines import (DetectionFailureError, EffectiveChannel,
                               build_effective_channel, lmmse_detect,
                               lmmse_detect_batch, zf_detect, zf_detect_batch)
from .harness import (ExperimentSpec, ResultRow, export_dataset, oracle_checks,
                      read_results_csv, run_sweep, summarize, wilson_interval)

__version__ = "0.1.0"
