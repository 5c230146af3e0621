"""Event-level Monte Carlo of the triggered polarization-rotation bench.

One run draws spontaneous pair emissions as a homogeneous Poisson process,
sends vertical idlers through the trigger arm onto detector D1, opens a
high-voltage flat-top window on the rotation cell for every accepted
trigger (electronic delay + internal latency + pulse front, followed by a
dead time), delays the signal photon through its fiber, flips its
polarization if it arrives inside an open flat-top, applies the signal
polarizer with the exact Malus probability from :mod:`.polarization`, and
finally counts D2 singles and D1/D2 coincidences.

Branch sampling note: the source emits an equal-weight classical mixture of
the |HV> and |VH> product branches and the idler is analysed in the H/V
basis, so drawing a definite branch per pair reproduces the full
density-matrix statistics exactly.  This shortcut is valid only because the
idler analyser is H/V; it is the only idler analyser modelled here.

Reproducibility contract: a run is a pure function of (config, seed).  The
seed feeds six fixed substreams (pairs, D1 dark counts, trigger coins,
signal-arm draws, tail draws, D2 noise), each consumed in a documented
order, so identical configs give bit-identical results on any platform.
"""

from __future__ import annotations

import hashlib
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from scipy import stats

from .analysis import poisson_count_sigma
from .polarization import (
    PolarizerAngle,
    _angle_value,
    horizontal,
    joint_polarizer_probabilities,
    make_mixed_biphoton,
    project_polarizer,
    vertical,
)


class ConfigError(ValueError):
    """Invalid experiment configuration; raised before any event is drawn."""


class SimulationError(RuntimeError):
    """An internal invariant of the event engine was violated."""


_DEAD_TIME_MODES = ("nonparalyzable", "paralyzable")


@dataclass(frozen=True)
class ExperimentConfig:
    """Full description of one simulated run.  All values in SI units.

    Defaults describe the nominal bench: 248 ns signal fiber, 148 ns
    internal trigger latency, 2 ns pulse front, 100 ns flat-top, 2 us cell
    dead time, and the measured trigger-detector efficiency 0.476.
    """

    pair_rate: float = 1e5  # emitted pairs per second
    duration: float = 1.0  # simulated time per run, seconds
    eta_idler: float = 0.476  # trigger (D1) detector quantum efficiency
    eta_signal: float = 1.0  # signal (D2) detector quantum efficiency
    dark_rate_idler: float = 0.0  # D1 dark clicks per second
    dark_rate_signal: float = 0.0  # D2 dark clicks per second
    background_rate_signal: float = 0.0  # unpolarized stray photons/s at the signal polarizer
    t_fiber: float = 248e-9  # signal fiber delay
    t_electronic: float = 0.0  # adjustable trigger delay T
    t0_internal: float = 148e-9  # fixed trigger-chain latency
    pulse_rise: float = 2e-9  # high-voltage pulse front
    pulse_flat: float = 100e-9  # flat-top length (full rotation)
    pulse_tail: float = 2e-6  # decaying tail length; inert unless hooked
    cell_dead_time: float = 2e-6  # recharge time after an accepted trigger
    cell_fail_prob: float = 0.0  # chance an otherwise accepted trigger fires no pulse
    coincidence_window: float = 3e-9
    coincidence_offset: float | None = None  # None: t_fiber, true pairs at zero lag
    polarizer_theta: float = 0.0  # signal polarizer angle from vertical, radians
    idler_polarizer: str = "V"  # fixed vertical analyser in the trigger arm
    cell_enabled: bool = True
    dead_time_mode: str = "nonparalyzable"
    detector_dead_time_d1: float = 0.0  # optional detector recovery times
    detector_dead_time_d2: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        nonnegative = (
            "pair_rate",
            "duration",
            "dark_rate_idler",
            "dark_rate_signal",
            "background_rate_signal",
            "t_fiber",
            "t_electronic",
            "t0_internal",
            "pulse_rise",
            "pulse_flat",
            "pulse_tail",
            "cell_dead_time",
            "coincidence_window",
            "detector_dead_time_d1",
            "detector_dead_time_d2",
        )
        for name in nonnegative:
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0.0:
                raise ConfigError(f"{name} must be finite and non-negative, got {value}")
        for name in ("eta_idler", "eta_signal", "cell_fail_prob"):
            value = getattr(self, name)
            if not (0.0 <= value <= 1.0):
                raise ConfigError(f"{name} must lie in [0, 1], got {value}")
        if not math.isfinite(self.polarizer_theta):
            raise ConfigError("polarizer_theta must be finite")
        if self.coincidence_offset is not None and not math.isfinite(self.coincidence_offset):
            raise ConfigError("coincidence_offset must be finite or None")
        # Relative slack absorbs 1-ulp noise from unit conversion (e.g. a
        # "100 ns" input parsing to 1.0000000000000001e-07).
        window_span = self.pulse_rise + self.pulse_flat
        if window_span > self.cell_dead_time * (1.0 + 1e-9):
            raise ConfigError(
                "pulse_rise + pulse_flat must not exceed cell_dead_time "
                f"({window_span} > {self.cell_dead_time})"
            )
        if self.idler_polarizer != "V":
            raise ConfigError("only a vertical idler polarizer is modelled")
        if self.dead_time_mode not in _DEAD_TIME_MODES:
            raise ConfigError(f"dead_time_mode must be one of {_DEAD_TIME_MODES}")
        object.__setattr__(self, "seed", int(self.seed))
        if not (0 <= self.seed < 2**64):
            raise ConfigError("seed must be a 64-bit non-negative integer")


@dataclass(frozen=True)
class PairEvent:
    """One emitted pair: emission time and product branch, signal letter first."""

    t_emit: float
    branch: str  # "HV" (horizontal signal, vertical idler) or "VH"

    def __post_init__(self) -> None:
        if self.branch not in ("HV", "VH"):
            raise ValueError(f"branch must be 'HV' or 'VH', got {self.branch!r}")


@dataclass(frozen=True)
class DetectionRecord:
    """One detector click with its physical origin."""

    detector: str  # "D1" or "D2"
    t: float
    origin: str  # "photon", "dark" or "background"

    def __post_init__(self) -> None:
        if self.detector not in ("D1", "D2"):
            raise ValueError(f"detector must be 'D1' or 'D2', got {self.detector!r}")
        if self.origin not in ("photon", "dark", "background"):
            raise ValueError(f"unknown click origin {self.origin!r}")


@dataclass(frozen=True, eq=False)
class CellTimeline:
    """Accepted rotation windows of one run.

    Flat-top windows are [start, start + window_length); the decaying tail
    after a window produces no rotation unless a tail hook is supplied to
    :func:`simulate_run`.
    """

    window_starts: np.ndarray
    window_length: float
    busy_until: float
    accepted_click_times: np.ndarray

    def covers(self, t: float) -> bool:
        return bool(self.covers_many(np.array([t]))[0])

    def covers_many(self, times: object) -> np.ndarray:
        """Boolean mask of arrival times inside any flat-top window."""
        times = np.asarray(times, dtype=float)
        inside = np.zeros(times.shape, dtype=bool)
        if self.window_starts.size == 0:
            return inside
        idx = np.searchsorted(self.window_starts, times, side="right") - 1
        found = idx >= 0
        inside[found] = times[found] < self.window_starts[idx[found]] + self.window_length
        return inside

    def validate(self, cell_dead_time: float) -> None:
        # The slack covers rounding differences between the accept test in
        # _drive_cell and the re-derived spacings checked here.
        slack = 1e-9 * max(cell_dead_time, self.window_length, 1e-12)
        starts = self.window_starts
        if np.any(np.diff(starts) <= 0):
            raise SimulationError("cell windows are not strictly ordered")
        if np.any(np.diff(starts) < self.window_length - slack):
            raise SimulationError("cell windows overlap")
        if np.any(np.diff(self.accepted_click_times) < cell_dead_time - slack):
            raise SimulationError("accepted triggers closer than the cell dead time")


@dataclass(frozen=True, eq=False)
class SimulationResult:
    """Counts and diagnostics of one run.

    ``rotated_fraction`` is the fraction of pairs with a detected idler
    whose signal photon was actually flipped at the cell; it is 0.0 when no
    idler was detected.
    """

    singles_d1: int
    singles_d2: int
    coincidences: int
    rotated_fraction: float
    duration: float
    config: ExperimentConfig
    seed: int
    pairs_emitted: int
    idler_detections: int
    triggers_accepted: int
    signals_rotated: int
    cell_timeline: CellTimeline
    d1_records: tuple[DetectionRecord, ...] | None = None
    d2_records: tuple[DetectionRecord, ...] | None = None

    def __post_init__(self) -> None:
        if self.coincidences > min(self.singles_d1, self.singles_d2):
            raise SimulationError("more coincidences than singles on one arm")
        if not (0.0 <= self.rotated_fraction <= 1.0):
            raise SimulationError("rotated_fraction outside [0, 1]")


@dataclass(frozen=True, eq=False)
class ScanPoint:
    """One scan point: abscissa (angle or delay), rates and Poisson errors."""

    x: float
    rate_d2: float
    sigma_d2: float
    rate_coincidence: float
    sigma_coincidence: float
    result: SimulationResult


@dataclass(frozen=True, eq=False)
class JointSample:
    """Joint polarizer-outcome counts against their analytic expectation."""

    theta: float
    counts: np.ndarray  # (2, 2), indexed [idler_passes, signal_passes]
    expected: np.ndarray
    chi2: float
    p_value: float


def derive_seed(master_seed: int, label: int | str) -> int:
    """Stable 64-bit child seed for scan point or helper-run ``label``."""
    digest = hashlib.sha256(f"{master_seed}:{label}".encode("ascii")).digest()
    return int.from_bytes(digest[:8], "little")


def _substreams(seed: int) -> list[np.random.Generator]:
    children = np.random.SeedSequence(seed).spawn(6)
    return [np.random.default_rng(child) for child in children]


def _sample_poisson_times(
    rng: np.random.Generator, rate: float, duration: float
) -> np.ndarray:
    """Sorted arrival times of a homogeneous Poisson process on [0, duration)."""
    n = int(rng.poisson(rate * duration))
    return np.sort(rng.uniform(0.0, duration, n))


def _sample_pairs(
    rng: np.random.Generator, rate: float, duration: float
) -> tuple[np.ndarray, np.ndarray]:
    times = _sample_poisson_times(rng, rate, duration)
    signal_is_h = rng.random(times.size) < 0.5
    return times, signal_is_h


def generate_pairs(config: ExperimentConfig) -> list[PairEvent]:
    """Ordered pair-emission stream of the run defined by ``config``.

    Uses the same substream as :func:`simulate_run`, so the returned events
    are exactly the pairs that a full run with this config would process.
    """
    rng = _substreams(config.seed)[0]
    times, signal_is_h = _sample_pairs(rng, config.pair_rate, config.duration)
    return [
        PairEvent(float(t), "HV" if is_h else "VH")
        for t, is_h in zip(times, signal_is_h)
    ]


def _dead_time_filter(times: np.ndarray, dead_time: float) -> np.ndarray:
    """Non-paralyzable detector recovery: drop clicks within dead_time of the last kept one."""
    keep = np.ones(times.size, dtype=bool)
    last = -math.inf
    for i, t in enumerate(times.tolist()):
        if t - last < dead_time:
            keep[i] = False
        else:
            last = t
    return keep


def _drive_cell(
    click_times: np.ndarray, config: ExperimentConfig, rng: np.random.Generator
) -> tuple[CellTimeline, int]:
    """Process trigger requests in time order into accepted rotation windows.

    A request during the busy span is discarded; in paralyzable mode it
    additionally restarts the busy span.  A live request is accepted unless
    the explicit failure coin fires, in which case neither a window opens
    nor a dead time starts.
    """
    lead = config.t_electronic + config.t0_internal + config.pulse_rise
    coins = rng.random(click_times.size)
    paralyzable = config.dead_time_mode == "paralyzable"
    starts: list[float] = []
    accepted_clicks: list[float] = []
    busy_until = -math.inf
    for i, t in enumerate(click_times.tolist()):
        if t < busy_until:
            if paralyzable:
                busy_until = max(busy_until, t + lead + config.cell_dead_time)
            continue
        if coins[i] < config.cell_fail_prob:
            continue
        start = t + lead
        starts.append(start)
        accepted_clicks.append(t)
        busy_until = start + config.cell_dead_time
    timeline = CellTimeline(
        np.asarray(starts, dtype=float),
        config.pulse_flat,
        busy_until,
        np.asarray(accepted_clicks, dtype=float),
    )
    return timeline, len(starts)


def _tail_probabilities(
    timeline: CellTimeline, times: np.ndarray, tail_length: float, hook
) -> np.ndarray:
    """Rotation probability for arrivals inside a decaying tail."""
    probs = np.zeros(times.size, dtype=float)
    if timeline.window_starts.size == 0 or tail_length <= 0.0:
        return probs
    idx = np.searchsorted(timeline.window_starts, times, side="right") - 1
    for i in np.nonzero(idx >= 0)[0]:
        tail_start = timeline.window_starts[idx[i]] + timeline.window_length
        dt = times[i] - tail_start
        if 0.0 <= dt < tail_length:
            probs[i] = min(max(float(hook(dt)), 0.0), 1.0)
    return probs


def coincidence_match(
    d1_times: object, d2_times: object, window: float, offset: float = 0.0
) -> int:
    """Greedy earliest one-to-one coincidence count.

    Clicks t1, t2 coincide when |t2 - (t1 + offset)| <= window / 2.  Both
    input streams must be sorted; each click is consumed by at most one
    coincidence, earliest candidates first, which makes the count
    deterministic.
    """
    if window < 0.0:
        raise ValueError("coincidence window must be non-negative")
    a = np.asarray(d1_times, dtype=float)
    b = np.asarray(d2_times, dtype=float)
    if a.size > 1 and np.any(np.diff(a) < 0.0):
        raise ValueError("d1_times must be sorted")
    if b.size > 1 and np.any(np.diff(b) < 0.0):
        raise ValueError("d2_times must be sorted")
    half = window / 2.0
    b_list = b.tolist()
    n2 = len(b_list)
    count = 0
    j = 0
    for t in a.tolist():
        target = t + offset
        lo = target - half
        while j < n2 and b_list[j] < lo:
            j += 1
        if j < n2 and b_list[j] <= target + half:
            count += 1
            j += 1
    return count


def simulate_run(
    config: ExperimentConfig,
    *,
    tail_effectiveness=None,
    collect_records: bool = False,
) -> SimulationResult:
    """Run one configured measurement interval and count clicks.

    ``tail_effectiveness`` optionally maps time since the end of a flat-top
    (seconds, within ``pulse_tail``) to a rotation probability for signal
    photons arriving in the decaying tail; by default the tail rotates
    nothing.  ``collect_records`` attaches per-click
    :class:`DetectionRecord` tuples for inspection (memory-heavy on large
    runs).
    """
    rng_pairs, rng_d1_dark, rng_trigger, rng_signal, rng_tail, rng_d2_noise = (
        _substreams(config.seed)
    )

    # pair emission and trigger-arm detection
    t_emit, signal_is_h = _sample_pairs(rng_pairs, config.pair_rate, config.duration)
    n_pairs = t_emit.size
    idler_detected = signal_is_h & (rng_pairs.random(n_pairs) < config.eta_idler)

    dark1 = _sample_poisson_times(rng_d1_dark, config.dark_rate_idler, config.duration)
    d1_times = np.concatenate([t_emit[idler_detected], dark1])
    d1_pair_index = np.concatenate(
        [np.nonzero(idler_detected)[0], np.full(dark1.size, -1, dtype=np.int64)]
    )
    order = np.argsort(d1_times, kind="stable")
    d1_times = d1_times[order]
    d1_pair_index = d1_pair_index[order]
    if config.detector_dead_time_d1 > 0.0:
        keep = _dead_time_filter(d1_times, config.detector_dead_time_d1)
        d1_times = d1_times[keep]
        d1_pair_index = d1_pair_index[keep]

    # trigger electronics and cell timeline; a disabled cell receives no drive
    if config.cell_enabled:
        timeline, triggers_accepted = _drive_cell(d1_times, config, rng_trigger)
    else:
        timeline = CellTimeline(
            np.empty(0, dtype=float), config.pulse_flat, -math.inf, np.empty(0, dtype=float)
        )
        triggers_accepted = 0

    # signal arm: conditional flip, polarizer, detection
    t_arrive = t_emit + config.t_fiber
    if config.cell_enabled:
        flipped = timeline.covers_many(t_arrive)
        if tail_effectiveness is not None:
            tail_p = _tail_probabilities(
                timeline, t_arrive, config.pulse_tail, tail_effectiveness
            )
            tail_draw = rng_tail.random(n_pairs)
            flipped = flipped | (~flipped & (tail_draw < tail_p))
    else:
        flipped = np.zeros(n_pairs, dtype=bool)
    final_is_v = np.logical_xor(~signal_is_h, flipped)

    p_pass_v = project_polarizer(vertical(), config.polarizer_theta)
    p_pass_h = project_polarizer(horizontal(), config.polarizer_theta)
    p_pass = np.where(final_is_v, p_pass_v, p_pass_h)
    passed = rng_signal.random(n_pairs) < p_pass
    detected = passed & (rng_signal.random(n_pairs) < config.eta_signal)
    d2_photon = t_arrive[detected]

    # signal-arm noise: dark clicks plus unpolarized background light
    dark2 = _sample_poisson_times(rng_d2_noise, config.dark_rate_signal, config.duration)
    bg_times = _sample_poisson_times(
        rng_d2_noise, config.background_rate_signal, config.duration
    )
    bg_passed = rng_d2_noise.random(bg_times.size) < 0.5
    bg_detected = bg_passed & (rng_d2_noise.random(bg_times.size) < config.eta_signal)
    bg_clicks = bg_times[bg_detected]

    d2_times = np.concatenate([d2_photon, dark2, bg_clicks])
    d2_origin = np.concatenate(
        [
            np.zeros(d2_photon.size, dtype=np.int8),
            np.ones(dark2.size, dtype=np.int8),
            np.full(bg_clicks.size, 2, dtype=np.int8),
        ]
    )
    order2 = np.argsort(d2_times, kind="stable")
    d2_times = d2_times[order2]
    d2_origin = d2_origin[order2]
    if config.detector_dead_time_d2 > 0.0:
        keep2 = _dead_time_filter(d2_times, config.detector_dead_time_d2)
        d2_times = d2_times[keep2]
        d2_origin = d2_origin[keep2]

    offset = config.t_fiber if config.coincidence_offset is None else config.coincidence_offset
    coincidences = coincidence_match(
        d1_times, d2_times, config.coincidence_window, offset
    )

    pair_clicks = d1_pair_index[d1_pair_index >= 0]
    idler_detections = int(pair_clicks.size)
    signals_rotated = int(np.count_nonzero(flipped[pair_clicks]))
    rotated_fraction = (
        signals_rotated / idler_detections if idler_detections > 0 else 0.0
    )

    timeline.validate(config.cell_dead_time)

    d1_records = d2_records = None
    if collect_records:
        d1_records = tuple(
            DetectionRecord("D1", float(t), "photon" if p >= 0 else "dark")
            for t, p in zip(d1_times, d1_pair_index)
        )
        origin_names = ("photon", "dark", "background")
        d2_records = tuple(
            DetectionRecord("D2", float(t), origin_names[o])
            for t, o in zip(d2_times, d2_origin)
        )

    return SimulationResult(
        singles_d1=int(d1_times.size),
        singles_d2=int(d2_times.size),
        coincidences=int(coincidences),
        rotated_fraction=rotated_fraction,
        duration=config.duration,
        config=config,
        seed=config.seed,
        pairs_emitted=int(n_pairs),
        idler_detections=idler_detections,
        triggers_accepted=int(triggers_accepted),
        signals_rotated=signals_rotated,
        cell_timeline=timeline,
        d1_records=d1_records,
        d2_records=d2_records,
    )


def _run_many(configs: list[ExperimentConfig], n_workers: int) -> list[SimulationResult]:
    """Run independent point configs, in point order regardless of scheduling."""
    if n_workers <= 1:
        return [simulate_run(c) for c in configs]
    with ProcessPoolExecutor(max_workers=n_workers) as pool:
        return list(pool.map(simulate_run, configs))


def _scan_point(x: float, result: SimulationResult) -> ScanPoint:
    d = result.duration
    return ScanPoint(
        x=x,
        rate_d2=result.singles_d2 / d,
        sigma_d2=poisson_count_sigma(result.singles_d2) / d,
        rate_coincidence=result.coincidences / d,
        sigma_coincidence=poisson_count_sigma(result.coincidences) / d,
        result=result,
    )


def polarizer_scan(
    config: ExperimentConfig,
    thetas: list[PolarizerAngle | float],
    *,
    n_workers: int = 1,
) -> list[ScanPoint]:
    """Measure the D2 singles and coincidence curve over polarizer angles.

    Every point runs with an independent seed derived from the master
    ``config.seed`` and the point index, so the scan is reproducible and
    parallelizes over points (``n_workers``).
    """
    if config.duration <= 0.0:
        raise ConfigError("a scan requires a positive per-point duration")
    values = [_angle_value(t) for t in thetas]
    configs = [
        replace(config, polarizer_theta=v, seed=derive_seed(config.seed, i))
        for i, v in enumerate(values)
    ]
    results = _run_many(configs, n_workers)
    return [_scan_point(v, r) for v, r in zip(values, results)]


def delay_scan(
    config: ExperimentConfig,
    delays: list[float],
    theta: PolarizerAngle | float | None = None,
    *,
    n_workers: int = 1,
) -> list[ScanPoint]:
    """Measure D2 rates against the adjustable trigger delay.

    ``theta`` fixes the signal polarizer for the whole scan (defaults to
    ``config.polarizer_theta``).  Per-point seeds follow the same derivation
    as :func:`polarizer_scan`.
    """
    if config.duration <= 0.0:
        raise ConfigError("a scan requires a positive per-point duration")
    theta_value = (
        config.polarizer_theta if theta is None else _angle_value(theta)
    )
    for delay in delays:
        if not math.isfinite(delay) or delay < 0.0:
            raise ConfigError(f"trigger delays must be non-negative, got {delay}")
    configs = [
        replace(
            config,
            t_electronic=float(delay),
            polarizer_theta=theta_value,
            seed=derive_seed(config.seed, i),
        )
        for i, delay in enumerate(delays)
    ]
    results = _run_many(configs, n_workers)
    return [_scan_point(float(d), r) for d, r in zip(delays, results)]


def find_rotation_edge(
    config: ExperimentConfig,
    t_low: float,
    t_high: float,
    *,
    tolerance: float = 0.5e-9,
) -> float:
    """Bisect the trigger delay at which the rotated fraction crosses 1/2.

    Requires the effect to be present at ``t_low`` and absent at ``t_high``.
    Every evaluation runs a fresh simulation with a seed derived from the
    master seed and the evaluation index, so the estimate is reproducible.
    """

    def fraction(delay: float, index: int) -> float:
        cfg = replace(
            config,
            t_electronic=float(delay),
            seed=derive_seed(config.seed, f"edge:{index}"),
        )
        return simulate_run(cfg).rotated_fraction

    if not t_low < t_high:
        raise ValueError("need t_low < t_high to bracket the edge")
    if fraction(t_low, 0) < 0.5 or fraction(t_high, 1) >= 0.5:
        raise ValueError("rotated fraction does not cross 1/2 inside the bracket")
    lo, hi = float(t_low), float(t_high)
    index = 2
    while hi - lo > tolerance:
        mid = 0.5 * (lo + hi)
        if fraction(mid, index) >= 0.5:
            lo = mid
        else:
            hi = mid
        index += 1
    return 0.5 * (lo + hi)


def cell_busy_time(config: ExperimentConfig) -> float:
    """Span after an accepted trigger click during which new triggers are blocked."""
    return (
        config.t_electronic
        + config.t0_internal
        + config.pulse_rise
        + config.cell_dead_time
    )


def trigger_rate_for_failure_fraction(
    fraction: float, busy_time: float, accept_prob: float = 1.0
) -> float:
    """Poisson trigger rate whose steady-state blocked share equals ``fraction``.

    With non-paralyzable blocking, requests at rate r and acceptance
    probability q for live requests leave a live-time share 1/(1 + x) with
    x = r q busy_time, so the blocked share is x / (1 + x).
    """
    if not (0.0 <= fraction < 1.0):
        raise ValueError("fraction must lie in [0, 1)")
    if busy_time <= 0.0 or not (0.0 < accept_prob <= 1.0):
        raise ValueError("busy_time must be positive and accept_prob in (0, 1]")
    x = fraction / (1.0 - fraction)
    return x / (busy_time * accept_prob)


def sample_joint_outcomes(
    theta: PolarizerAngle | float, n: int, seed: int
) -> np.ndarray:
    """Monte Carlo joint polarizer outcomes for the phase-averaged source.

    Draws ``n`` pairs, sends the idler through the vertical analyser and the
    signal through a polarizer at ``theta`` (no feed-forward, no detector
    losses) and tallies a (2, 2) table indexed [idler_passes,
    signal_passes].
    """
    if n <= 0:
        raise ValueError("n must be positive")
    theta_value = _angle_value(theta)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    signal_is_h = rng.random(n) < 0.5
    # A vertical idler accompanies a horizontal signal and always passes the
    # vertical analyser; the horizontal idler of the other branch never does.
    idler_passes = signal_is_h
    p_pass = np.where(
        signal_is_h,
        project_polarizer(horizontal(), theta_value),
        project_polarizer(vertical(), theta_value),
    )
    signal_passes = rng.random(n) < p_pass
    flat = 2 * idler_passes.astype(np.int64) + signal_passes.astype(np.int64)
    return np.bincount(flat, minlength=4).reshape(2, 2)


def sampling_soundness(
    theta: PolarizerAngle | float, n: int, seed: int
) -> JointSample:
    """Chi-square comparison of sampled joint outcomes to their exact probabilities.

    The expectation is enumerated by brute-force projector algebra on the
    phase-averaged two-photon state, independently of the sampling shortcut
    used by the event engine.
    """
    theta_value = _angle_value(theta)
    counts = sample_joint_outcomes(theta_value, n, seed)
    expected = joint_polarizer_probabilities(make_mixed_biphoton(), theta_value) * n
    obs = counts.ravel().astype(float)
    exp = expected.ravel()
    empty = exp <= 0.0
    if np.any(obs[empty] > 0.0):
        chi2, p_value = math.inf, 0.0
    else:
        chi2, p_value = stats.chisquare(obs[~empty], exp[~empty])
    return JointSample(theta_value, counts, expected, float(chi2), float(p_value))
