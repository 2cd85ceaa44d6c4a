"""The BB84 engine: windowed transmission, sifting, and QBER estimation.

A run simulates discrimination windows. In each window Alice prepares
one of four polarization states (a bit in one of two conjugate bases)
and Bob measures behind a half-wave plate + polarizing beam splitter in
one of the two bases; the channel scales the photon mean reaching Bob.
Windows where both detectors click, or neither does, carry no sifted
bit; windows where the bases differ are discarded by sifting.

Randomness contract: windows are partitioned into fixed-size blocks and
each block draws from its own generator seeded by (seed, block index).
Block tallies are nonnegative integers merged by addition, so a run's
counts depend only on the seed and the window count — never on how many
worker threads executed the blocks or in what order.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .channel import validate_transmittance
from .detector import DetectorParams, SourceParams, click_probability
from .errors import DomainError
from .optics import Basis, OpticalChain, encode, pbs_probabilities

# Alice's four states and Bob's two bases, in fixed tally order.
ALICE_STATES: tuple[tuple[int, Basis], ...] = (
    (0, Basis.VH),
    (1, Basis.VH),
    (0, Basis.LR),
    (1, Basis.LR),
)
BOB_BASES: tuple[Basis, ...] = (Basis.VH, Basis.LR)
STATE_NAMES: dict[tuple[int, Basis], str] = {
    (0, Basis.VH): "V",
    (1, Basis.VH): "H",
    (0, Basis.LR): "L",
    (1, Basis.LR): "R",
}

# (alice_bit, alice_basis, bob_basis) identifies one tally cell.
CellKey = tuple[int, Basis, Basis]

CELL_KEYS: tuple[CellKey, ...] = tuple(
    (bit, alice_basis, bob_basis)
    for bit, alice_basis in ALICE_STATES
    for bob_basis in BOB_BASES
)
N_CELLS = len(CELL_KEYS)

# Windows per random block. Fixed (not derived from the worker count) so
# that block seeding, and therefore every tally, is identical no matter
# how many workers execute the run.
BLOCK_WINDOWS = 1 << 21


class RunMode(Enum):
    """random_bb84 draws settings uniformly; setting_scan steps through
    all eight (Alice state, Bob basis) combinations, n_windows each."""

    RANDOM_BB84 = "random_bb84"
    SETTING_SCAN = "setting_scan"


@dataclass(frozen=True)
class ProtocolConfig:
    mode: RunMode
    n_windows: int
    seed: int
    worker_streams: int = 1

    def __post_init__(self) -> None:
        if self.n_windows < 1:
            raise DomainError(f"n_windows must be >= 1, got {self.n_windows}")
        if not 0 <= self.seed < 2**64:
            raise DomainError(f"seed must fit in 64 unsigned bits, got {self.seed}")
        if self.worker_streams < 1:
            raise DomainError(
                f"worker_streams must be >= 1, got {self.worker_streams}"
            )

    @property
    def total_windows(self) -> int:
        """Windows simulated overall (per-setting count scales the scan)."""
        if self.mode is RunMode.SETTING_SCAN:
            return N_CELLS * self.n_windows
        return self.n_windows


@dataclass(frozen=True)
class CellCounts:
    """Window tallies for one (Alice state, Bob basis) combination."""

    correct_clicks: int = 0
    wrong_clicks: int = 0
    double_clicks: int = 0
    empty_windows: int = 0

    @property
    def windows(self) -> int:
        return (
            self.correct_clicks
            + self.wrong_clicks
            + self.double_clicks
            + self.empty_windows
        )


@dataclass(frozen=True)
class RunCounts:
    """Per-cell tallies of a finished run, keyed by CellKey."""

    cells: dict[CellKey, CellCounts]

    @property
    def total_windows(self) -> int:
        return sum(cell.windows for cell in self.cells.values())


@dataclass(frozen=True)
class QberEstimate:
    """Sifted-key error rate with its binomial standard error."""

    qber: float
    stderr: float
    n_sifted: int


def _cell_click_probabilities(
    chain: OpticalChain,
    t: float,
    src: SourceParams,
    det: DetectorParams,
) -> tuple[np.ndarray, np.ndarray]:
    """Per-cell click probabilities (arm 0, arm 1), indexed like CELL_KEYS."""
    p0 = np.empty(N_CELLS)
    p1 = np.empty(N_CELLS)
    photon_scale = src.mean_photons_per_window * t * chain.bob_efficiency
    for index, (bit, alice_basis, bob_basis) in enumerate(CELL_KEYS):
        state = encode(bit, alice_basis, chain.extinction_ratio)
        state = state.rotated(chain.misalignment_deg)
        q0, q1 = pbs_probabilities(state, bob_basis)
        p0[index] = click_probability(photon_scale * q0, det)
        p1[index] = click_probability(photon_scale * q1, det)
    return p0, p1


def _block_rng(seed: int, block_index: int) -> np.random.Generator:
    """Independent stream for one block, a pure function of (seed, block)."""
    sequence = np.random.SeedSequence(entropy=seed, spawn_key=(block_index,))
    return np.random.Generator(np.random.PCG64(sequence))


def _simulate_block(
    block_index: int,
    start: int,
    stop: int,
    mode: RunMode,
    per_setting: int,
    seed: int,
    p0: np.ndarray,
    p1: np.ndarray,
) -> np.ndarray:
    """Tally windows [start, stop); returns a flat (N_CELLS * 4) histogram.

    Histogram columns are the raw click codes 0..3 = (none, det0, det1,
    both); the bit-dependent correct/wrong mapping is applied once at
    merge time.
    """
    n = stop - start
    rng = _block_rng(seed, block_index)
    if mode is RunMode.RANDOM_BB84:
        # Uniform bit and basis for Alice, uniform basis for Bob: each of
        # the eight cells is equally likely.
        cells = rng.integers(0, N_CELLS, size=n, dtype=np.uint8)
    else:
        cells = (np.arange(start, stop, dtype=np.int64) // per_setting).astype(
            np.uint8
        )
    click0 = rng.random(n) < p0[cells]
    click1 = rng.random(n) < p1[cells]
    codes = cells.astype(np.int64) * 4
    codes += click0
    codes += click1
    codes += click1
    return np.bincount(codes, minlength=N_CELLS * 4)


def run(
    config: ProtocolConfig,
    chain: OpticalChain,
    t: float,
    src: SourceParams,
    det: DetectorParams,
) -> RunCounts:
    """Simulate a full run and return per-cell tallies.

    Exactly reproducible from (config.mode, config.n_windows,
    config.seed); see the module docstring for the block contract.
    """
    validate_transmittance(t)
    p0, p1 = _cell_click_probabilities(chain, t, src, det)
    total = config.total_windows
    blocks = [
        (index, start, min(start + BLOCK_WINDOWS, total))
        for index, start in enumerate(range(0, total, BLOCK_WINDOWS))
    ]

    def simulate(block: tuple[int, int, int]) -> np.ndarray:
        index, start, stop = block
        return _simulate_block(
            index, start, stop, config.mode, config.n_windows, config.seed, p0, p1
        )

    tallies = np.zeros(N_CELLS * 4, dtype=np.int64)
    if config.worker_streams == 1 or len(blocks) == 1:
        for block in blocks:
            tallies += simulate(block)
    else:
        with ThreadPoolExecutor(max_workers=config.worker_streams) as pool:
            for block_tallies in pool.map(simulate, blocks):
                tallies += block_tallies

    by_code = tallies.reshape(N_CELLS, 4)
    cells: dict[CellKey, CellCounts] = {}
    for index, key in enumerate(CELL_KEYS):
        bit = key[0]
        none_count, det0, det1, both = (int(v) for v in by_code[index])
        correct, wrong = (det0, det1) if bit == 0 else (det1, det0)
        cells[key] = CellCounts(
            correct_clicks=correct,
            wrong_clicks=wrong,
            double_clicks=both,
            empty_windows=none_count,
        )
    return RunCounts(cells)


def sift(counts: RunCounts) -> tuple[int, int]:
    """(correct, wrong) single-click totals over matched-basis cells.

    Conjugate-basis cells and double clicks are excluded; this is the
    classical sifting step without the public-channel bookkeeping.
    """
    correct = 0
    wrong = 0
    for (_, alice_basis, bob_basis), cell in counts.cells.items():
        if alice_basis is bob_basis:
            correct += cell.correct_clicks
            wrong += cell.wrong_clicks
    return correct, wrong


def qber(correct: int, wrong: int) -> QberEstimate | None:
    """Error-rate estimate wrong / (correct + wrong), or None if no events.

    stderr is the binomial standard error sqrt(q (1 - q) / n); None
    (no sifted events) is the explicit undefined-estimate marker.
    """
    if correct < 0 or wrong < 0:
        raise DomainError(f"counts must be >= 0, got ({correct}, {wrong})")
    n_sifted = correct + wrong
    if n_sifted == 0:
        return None
    q = wrong / n_sifted
    return QberEstimate(qber=q, stderr=math.sqrt(q * (1.0 - q) / n_sifted), n_sifted=n_sifted)
