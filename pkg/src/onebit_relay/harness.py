"""Monte-Carlo experiment runner: SER/SVEP sweeps, dataset export, CSV output.

Reproducibility contract: every random stream is derived from
(seed, grid point, trial, stream id), so results are bit-identical for a
given spec + seed, independent of execution order. The results CSV contains
only deterministic bytes; measured wall times appear in the human-readable
table but are left blank in the CSV's `seconds` column.
"""

import json
import time
from dataclasses import dataclass, replace

import numpy as np

from .bsc_model import (TrainingSet, learn_bsc_model, wmhd_detect_batch,
                        bsc_log_likelihood, wmhd_distances)
from .channel import (ChannelRealization, ConfigurationError, FrameConfig,
                      NetworkConfig, TimeVaryingConfig, draw_channel,
                      evolve_channel, real_expand, simulate_frames,
                      snr_db_to_noise_std)
from .exact_ml import (ComplexityRefusalError, MLDetector, DEFAULT_STATE_CAP,
                       brute_force_likelihood, enumerate_sign_vectors,
                       likelihood_table, q_function)
from .linear_baselines import (DetectionFailureError, build_effective_channel,
                               lmmse_detect_batch, zf_detect_batch)
from .online_em import detect_stream, init_state

DETECTORS = ("ML", "AML", "ONLINE", "ZF", "LMMSE")
CSV_HEADER = "detector,snr1_db,snr2_db,fdts,ser,svep,err,n,ci_lo,ci_hi,seconds"

# stream ids within a trial
_S_CHANNEL, _S_PILOT, _S_SYMBOLS, _S_NOISE, _S_EVOLVE = range(5)


def wilson_interval(errors: int, n: int, z: float = 1.96) -> tuple[float, float]:
    """Wilson score interval for a binomial rate; (nan, nan) when n = 0."""
    if n == 0:
        return (float("nan"), float("nan"))
    p = errors / n
    denom = 1.0 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = z * np.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return (max(0.0, center - half), min(1.0, center + half))


def intervals_overlap(a: tuple[float, float], b: tuple[float, float]) -> bool:
    return a[0] <= b[1] and b[0] <= a[1]


@dataclass(frozen=True)
class ExperimentSpec:
    """One benchmark scenario: topology, frame, sweep grid, detector set."""

    network: NetworkConfig
    snr_db: tuple                 # base per-hop SNRs in dB (len M)
    sweep: tuple                  # ((hop, (dB, ...)), ...) swept axes
    detectors: tuple
    pilots_per_input: int         # T
    symbols_per_trial: int        # data slots per trial
    trials: int
    seed: int
    time_varying: TimeVaryingConfig | None = None
    redraw_channels: bool = True  # fresh channels per grid point (else fixed per trial)
    state_cap: int = DEFAULT_STATE_CAP

    def __post_init__(self):
        object.__setattr__(self, "snr_db", tuple(float(s) for s in self.snr_db))
        object.__setattr__(self, "sweep",
                           tuple((int(h), tuple(float(v) for v in vals)) for h, vals in self.sweep))
        object.__setattr__(self, "detectors", tuple(str(d).upper() for d in self.detectors))
        if self.trials < 1:
            raise ConfigurationError("trials must be >= 1")
        if self.seed is None:
            raise ConfigurationError("seed is mandatory")
        if len(self.snr_db) != self.network.n_hops:
            raise ConfigurationError("need one base SNR per hop")
        for hop, vals in self.sweep:
            if not 1 <= hop <= self.network.n_hops:
                raise ConfigurationError(f"swept hop {hop} out of range")
            if not vals:
                raise ConfigurationError("sweep grids must be nonempty")
        for d in self.detectors:
            if d not in DETECTORS:
                raise ConfigurationError(f"unknown detector {d!r}; choose from {DETECTORS}")

    @property
    def frame(self) -> FrameConfig:
        return FrameConfig(pilots_per_input=self.pilots_per_input,
                           data_slots=self.symbols_per_trial)

    def grid_points(self) -> list[dict]:
        """Cartesian product of the swept axes, as {hop: dB} overrides."""
        points = [{}]
        for hop, vals in self.sweep:
            points = [{**p, hop: v} for p in points for v in vals]
        return points

    def config_at(self, point: dict) -> NetworkConfig:
        snrs = list(self.snr_db)
        for hop, db in point.items():
            snrs[hop - 1] = db
        noise = tuple(snr_db_to_noise_std(s) for s in snrs)
        return replace(self.network, noise_std=noise)

    def snrs_at(self, point: dict) -> tuple:
        snrs = list(self.snr_db)
        for hop, db in point.items():
            snrs[hop - 1] = db
        return tuple(snrs)

    def to_json_dict(self) -> dict:
        return {
            "n_users": self.network.n_users,
            "relay_counts": list(self.network.relay_counts),
            "n_antennas": self.network.n_antennas,
            "constellation": self.network.constellation,
            "snr_db": list(self.snr_db),
            "sweep": [[h, list(v)] for h, v in self.sweep],
            "detectors": list(self.detectors),
            "pilots_per_input": self.pilots_per_input,
            "symbols_per_trial": self.symbols_per_trial,
            "trials": self.trials,
            "seed": self.seed,
            "time_varying": None if self.time_varying is None else {
                "normalized_doppler": self.time_varying.normalized_doppler,
                "varying_hop": self.time_varying.varying_hop,
            },
            "redraw_channels": self.redraw_channels,
            "state_cap": self.state_cap,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "ExperimentSpec":
        snr_db = tuple(float(s) for s in d["snr_db"])
        network = NetworkConfig(
            n_users=int(d["n_users"]),
            relay_counts=tuple(d["relay_counts"]),
            n_antennas=int(d["n_antennas"]),
            noise_std=tuple(snr_db_to_noise_std(s) for s in snr_db),
            constellation=d.get("constellation", "qpsk"),
        )
        tv = d.get("time_varying")
        return cls(
            network=network,
            snr_db=snr_db,
            sweep=tuple((h, tuple(v)) for h, v in d.get("sweep", [])),
            detectors=tuple(d.get("detectors", ["AML"])),
            pilots_per_input=int(d.get("pilots_per_input", 15)),
            symbols_per_trial=int(d.get("symbols_per_trial", 1000)),
            trials=int(d.get("trials", 1)),
            seed=int(d["seed"]),
            time_varying=None if tv is None else TimeVaryingConfig(
                normalized_doppler=float(tv["normalized_doppler"]),
                varying_hop=int(tv.get("varying_hop", 2))),
            redraw_channels=bool(d.get("redraw_channels", True)),
            state_cap=int(d.get("state_cap", DEFAULT_STATE_CAP)),
        )


@dataclass
class ResultRow:
    """One (detector, grid point) aggregate. err/n count per-user symbols."""

    detector: str
    snr1_db: float
    snr2_db: float
    fdts: float
    ser: float
    svep: float
    err: int
    n: int
    ci_lo: float
    ci_hi: float
    wall_time: float = 0.0
    note: str = ""


class _Counts:
    def __init__(self):
        self.sym_err = 0
        self.syms = 0
        self.vec_err = 0
        self.vecs = 0
        self.seconds = 0.0
        self.note = ""

    def add(self, enum, truth, detected):
        dt = enum.digits[truth]
        dd = enum.digits[detected]
        wrong = dt != dd
        self.sym_err += int(wrong.sum())
        self.syms += int(wrong.size)
        self.vec_err += int(wrong.any(axis=1).sum())
        self.vecs += len(truth)

    def add_failure(self, n_vectors: int, n_users: int):
        self.sym_err += n_vectors * n_users
        self.syms += n_vectors * n_users
        self.vec_err += n_vectors
        self.vecs += n_vectors

    def to_row(self, detector: str, snrs: tuple, fdts: float) -> ResultRow:
        ser = self.sym_err / self.syms if self.syms else float("nan")
        svep = self.vec_err / self.vecs if self.vecs else float("nan")
        lo, hi = wilson_interval(self.sym_err, self.syms)
        return ResultRow(detector=detector,
                         snr1_db=snrs[0],
                         snr2_db=snrs[1] if len(snrs) > 1 else float("nan"),
                         fdts=fdts, ser=ser, svep=svep,
                         err=self.sym_err, n=self.syms,
                         ci_lo=lo, ci_hi=hi,
                         wall_time=self.seconds, note=self.note)


def _stream(spec: ExperimentSpec, point_tag: int, trial: int, which: int) -> np.random.Generator:
    return np.random.default_rng([spec.seed, point_tag, trial, which])


def _trial_channel(spec: ExperimentSpec, cfg: NetworkConfig, p_idx: int, trial: int):
    tag = p_idx + 1 if spec.redraw_channels else 0
    return draw_channel(cfg, _stream(spec, tag, trial, _S_CHANNEL))


def run_sweep(spec: ExperimentSpec) -> list[ResultRow]:
    """Run every (grid point, detector) cell and return aggregated rows."""
    rows = []
    fdts = spec.time_varying.normalized_doppler if spec.time_varying else 0.0
    for p_idx, point in enumerate(spec.grid_points()):
        cfg = spec.config_at(point)
        counts = {d: _Counts() for d in spec.detectors}
        for trial in range(spec.trials):
            _run_trial(spec, cfg, p_idx, trial, counts)
        for d in spec.detectors:
            rows.append(counts[d].to_row(d, spec.snrs_at(point), fdts))
    return rows


def _run_trial(spec: ExperimentSpec, cfg: NetworkConfig, p_idx: int, trial: int,
               counts: dict):
    enum = cfg.input_enumeration()
    p_tag = p_idx + 1
    ch = _trial_channel(spec, cfg, p_idx, trial)

    train = None
    if "AML" in spec.detectors or "ONLINE" in spec.detectors:
        train = TrainingSet.simulate(cfg, spec.frame, ch,
                                     _stream(spec, p_tag, trial, _S_PILOT))

    n_sym = spec.symbols_per_trial
    truth = _stream(spec, p_tag, trial, _S_SYMBOLS).integers(0, enum.size, size=n_sym)
    noise_rng = _stream(spec, p_tag, trial, _S_NOISE)
    linear_streaming = spec.time_varying is not None and (
        "ZF" in spec.detectors or "LMMSE" in spec.detectors)

    zf_dec = np.empty(n_sym, dtype=int)
    lmmse_dec = np.empty(n_sym, dtype=int)
    zf_failed = False
    if spec.time_varying is None:
        y = simulate_frames(cfg, ch, enum.real_forms[truth], noise_rng) \
            if n_sym else np.zeros((0, 2 * cfg.n_antennas), dtype=np.int8)
        ch_final = ch
    else:
        evolve_rng = _stream(spec, p_tag, trial, _S_EVOLVE)
        y = np.empty((n_sym, 2 * cfg.n_antennas), dtype=np.int8)
        ch_t = ch
        t_linear = 0.0
        for t in range(n_sym):
            ch_t = evolve_channel(ch_t, spec.time_varying, evolve_rng)
            y[t] = simulate_frames(cfg, ch_t, enum.real_forms[truth[t]], noise_rng)[0]
            if linear_streaming:
                t0 = time.perf_counter()
                eff = build_effective_channel(ch_t, noise_std=cfg.noise_std[-1])
                if "ZF" in spec.detectors:
                    try:
                        zf_dec[t] = zf_detect_batch(cfg, eff, y[t][None, :])[0]
                    except DetectionFailureError:
                        zf_failed = True
                if "LMMSE" in spec.detectors:
                    lmmse_dec[t] = lmmse_detect_batch(cfg, eff, y[t][None, :])[0]
                t_linear += time.perf_counter() - t0
        ch_final = ch_t
        if linear_streaming:
            for d in ("ZF", "LMMSE"):
                if d in counts:
                    counts[d].seconds += t_linear / 2 if ("ZF" in counts and "LMMSE" in counts) else t_linear

    for d in spec.detectors:
        t0 = time.perf_counter()
        if d == "ML":
            if spec.time_varying is not None:
                counts[d].note = "skipped: exact ML is not run on time-varying sweeps"
                continue
            try:
                det = MLDetector(cfg, ch, state_cap=spec.state_cap)
            except ComplexityRefusalError as e:
                counts[d].note = f"skipped: {e}"
                continue
            if n_sym:
                counts[d].add(enum, truth, det.detect(y))
        elif d == "AML":
            model = learn_bsc_model(train)
            if n_sym:
                counts[d].add(enum, truth, wmhd_detect_batch(model, y))
        elif d == "ONLINE":
            state = init_state(train)
            if n_sym:
                detected, _, _ = detect_stream(state, y)
                counts[d].add(enum, truth, detected)
        elif d == "ZF":
            if n_sym:
                if spec.time_varying is None:
                    eff = build_effective_channel(ch, noise_std=cfg.noise_std[-1])
                    try:
                        counts[d].add(enum, truth, zf_detect_batch(cfg, eff, y))
                    except DetectionFailureError:
                        counts[d].add_failure(n_sym, cfg.n_users)
                elif zf_failed:
                    counts[d].add_failure(n_sym, cfg.n_users)
                else:
                    counts[d].add(enum, truth, zf_dec)
        elif d == "LMMSE":
            if n_sym:
                if spec.time_varying is None:
                    eff = build_effective_channel(ch, noise_std=cfg.noise_std[-1])
                    counts[d].add(enum, truth, lmmse_detect_batch(cfg, eff, y))
                else:
                    counts[d].add(enum, truth, lmmse_dec)
        counts[d].seconds += time.perf_counter() - t0


def _fmt(x) -> str:
    return repr(float(x))


def rows_to_csv(rows: list[ResultRow]) -> str:
    """Canonical CSV bytes; everything deterministic, `seconds` left blank."""
    lines = [CSV_HEADER]
    for r in rows:
        lines.append(",".join([
            r.detector, _fmt(r.snr1_db), _fmt(r.snr2_db), _fmt(r.fdts),
            _fmt(r.ser), _fmt(r.svep), str(r.err), str(r.n),
            _fmt(r.ci_lo), _fmt(r.ci_hi), "",
        ]))
    return "\n".join(lines) + "\n"


def read_results_csv(path) -> list[ResultRow]:
    """Parse a results CSV back into rows (wall time restored as 0.0)."""
    rows = []
    with open(path) as f:
        header = f.readline().strip()
        if header != CSV_HEADER:
            raise ValueError(f"unexpected CSV header {header!r}")
        for line in f:
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split(",")
            rows.append(ResultRow(
                detector=parts[0],
                snr1_db=float(parts[1]), snr2_db=float(parts[2]), fdts=float(parts[3]),
                ser=float(parts[4]), svep=float(parts[5]),
                err=int(parts[6]), n=int(parts[7]),
                ci_lo=float(parts[8]), ci_hi=float(parts[9]),
                wall_time=float(parts[10]) if parts[10] else 0.0,
            ))
    return rows


def format_table(rows: list[ResultRow]) -> str:
    """Human-readable summary, including measured wall times and notes."""
    header = f"{'detector':<8} {'snr1':>6} {'snr2':>6} {'fdts':>7} {'ser':>11} {'svep':>11} {'err':>8} {'n':>9} {'wilson_ci':>23} {'sec':>8}"
    lines = [header, "-" * len(header)]
    for r in rows:
        ci = f"[{r.ci_lo:.3e}, {r.ci_hi:.3e}]" if not np.isnan(r.ci_lo) else "[--, --]"
        lines.append(
            f"{r.detector:<8} {r.snr1_db:>6.1f} {r.snr2_db:>6.1f} {r.fdts:>7.4f} "
            f"{r.ser:>11.4e} {r.svep:>11.4e} {r.err:>8d} {r.n:>9d} {ci:>23} {r.wall_time:>8.2f}"
            + (f"  {r.note}" if r.note else ""))
    return "\n".join(lines)


def summarize(rows: list[ResultRow], csv_path) -> str:
    """Write the canonical CSV and return the human-readable table."""
    with open(csv_path, "w", newline="") as f:
        f.write(rows_to_csv(rows))
    return format_table(rows)


def _point_tag_name(snrs: tuple) -> str:
    return "_".join(f"snr{m + 1}_{db:g}" for m, db in enumerate(snrs))


def export_dataset(spec: ExperimentSpec, out_dir) -> list:
    """Write labeled train/test splits for each grid point.

    Per point: <out>/<tag>/train.csv and test.csv with header
    `label,b0,...,b{2N-1}` and entries in {-1, 1}, plus meta.json recording
    the experiment spec, the grid point, and reference wMHD-detector results
    computed on the exact same splits. Train rows follow the pilot schedule order;
    test rows are the uniform data phase. Uses the streams of trial 0, so a
    dataset matches the first trial of the corresponding sweep.
    """
    import pathlib

    if spec.time_varying is not None:
        raise ConfigurationError("dataset export is defined for static channels")
    out_dir = pathlib.Path(out_dir)
    written = []
    for p_idx, point in enumerate(spec.grid_points()):
        cfg = spec.config_at(point)
        enum = cfg.input_enumeration()
        p_tag = p_idx + 1
        ch = _trial_channel(spec, cfg, p_idx, 0)
        train = TrainingSet.simulate(cfg, spec.frame, ch, _stream(spec, p_tag, 0, _S_PILOT))
        truth = _stream(spec, p_tag, 0, _S_SYMBOLS).integers(
            0, enum.size, size=spec.symbols_per_trial)
        y = simulate_frames(cfg, ch, enum.real_forms[truth],
                            _stream(spec, p_tag, 0, _S_NOISE))

        model = learn_bsc_model(train)
        detected = wmhd_detect_batch(model, y)
        wrong = enum.digits[truth] != enum.digits[detected]
        ref = {
            "detector": "AML",
            "ser": float(wrong.mean()) if wrong.size else float("nan"),
            "svep": float(wrong.any(axis=1).mean()) if wrong.size else float("nan"),
            "test_vectors": int(len(truth)),
        }

        point_dir = out_dir / _point_tag_name(spec.snrs_at(point))
        point_dir.mkdir(parents=True, exist_ok=True)
        _write_split(point_dir / "train.csv", train.labels, train.outputs)
        _write_split(point_dir / "test.csv", truth, y)
        meta = {
            "spec": spec.to_json_dict(),
            "snr_db": list(spec.snrs_at(point)),
            "num_classes": enum.size,
            "vector_length": 2 * cfg.n_antennas,
            "train_rows": int(len(train.labels)),
            "test_rows": int(len(truth)),
            "reference": ref,
        }
        with open(point_dir / "meta.json", "w") as f:
            json.dump(meta, f, indent=1, sort_keys=True)
            f.write("\n")
        written.append(point_dir)
    return written


def _write_split(path, labels: np.ndarray, outputs: np.ndarray):
    width = outputs.shape[1]
    with open(path, "w", newline="") as f:
        f.write("label," + ",".join(f"b{i}" for i in range(width)) + "\n")
        for lab, row in zip(labels, outputs):
            f.write(str(int(lab)) + "," + ",".join(str(int(v)) for v in row) + "\n")


# ---------------------------------------------------------------------------
# brute-force oracle checks (CLI `oracle-check` verb)

def _q_series(x: float) -> float:
    # Q via the Taylor series of erf; independent of scipy's erfc path
    z = x / np.sqrt(2.0)
    term = z
    total = z
    for n in range(1, 60):
        term *= -z * z / n
        total += term / (2 * n + 1)
    return 0.5 - total / np.sqrt(np.pi)


def oracle_checks(seed: int = 0) -> list[tuple[str, bool, str]]:
    """Independent brute-force verifications of the core numeric paths."""
    rng = np.random.default_rng(seed)
    results = []

    xs = np.linspace(-3, 3, 25)
    err = max(abs(q_function(x) - _q_series(x)) for x in xs)
    results.append(("q-function vs erf power series", err < 1e-12, f"max abs err {err:.2e}"))

    worst = 0.0
    for _ in range(20):
        a = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        b = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        worst = max(worst, np.max(np.abs(real_expand(a) @ real_expand(b) - real_expand(a @ b))))
    results.append(("real expansion multiplicativity", worst < 1e-12, f"max abs err {worst:.2e}"))

    cfg = NetworkConfig.from_snr(1, [2], 2, [10.0, 10.0])
    ch = draw_channel(cfg, rng)
    enum = cfg.input_enumeration()
    table = likelihood_table(cfg, ch)
    row_err = np.max(np.abs(table.sum(axis=1) - 1.0))
    results.append(("likelihood rows sum to one", row_err < 1e-9, f"max |sum-1| {row_err:.2e}"))

    outputs = enumerate_sign_vectors(2 * cfg.n_antennas)
    worst = 0.0
    for i in range(enum.size):
        for j in range(0, len(outputs), 5):
            bf = brute_force_likelihood(cfg, ch, enum.real_forms[i], outputs[j])
            worst = max(worst, abs(bf - table[i, j]))
    results.append(("log-domain chain vs linear brute force", worst < 1e-12,
                    f"max abs err {worst:.2e}"))

    from .bsc_model import BscModel
    agree = True
    for _ in range(1000):
        cw = rng.choice([-1, 1], size=(8, 12)).astype(np.int8)
        p = rng.uniform(0.01, 0.99, size=(8, 12))
        model = BscModel(codewords=cw, crossover=p)
        yv = rng.choice([-1, 1], size=12).astype(np.int8)
        if int(np.argmin(wmhd_distances(model, yv[None])[0])) != \
           int(np.argmax(bsc_log_likelihood(model, yv[None])[0])):
            agree = False
            break
    results.append(("wMHD argmin equals BSC-ML argmax", agree, "1000 random pairs"))

    n_frames = 20000
    worst_z = 0.0
    for i in range(enum.size):
        frames = simulate_frames(cfg, ch, enum.real_forms[i], rng, n_frames=n_frames)
        # count exact output matches against the enumerated table columns
        idx = ((frames > 0).astype(int) * (2 ** np.arange(frames.shape[1]))).sum(axis=1)
        freq = np.bincount(idx, minlength=len(outputs)) / n_frames
        sd = np.sqrt(np.maximum(table[i] * (1 - table[i]), 1e-12) / n_frames)
        worst_z = max(worst_z, np.max(np.abs(freq - table[i]) / np.maximum(sd, 1e-12)))
    results.append(("exact likelihood vs Monte-Carlo frequencies", worst_z < 4.5,
                    f"worst z-score {worst_z:.2f} over all (input, output) pairs"))

    return results
