import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bb84sim.budget import analytic_qber, calibrated_detector, calibrated_optics
from bb84sim.detector import DetectorParams, SourceParams, click_probability
from bb84sim.errors import DomainError
from bb84sim.optics import Basis, OpticalChain, encode, pbs_probabilities
from bb84sim.protocol import (
    BLOCK_WINDOWS,
    CELL_KEYS,
    CellCounts,
    ProtocolConfig,
    RunCounts,
    RunMode,
    _block_rng,
    qber,
    run,
    sift,
)

IDEAL_CHAIN = OpticalChain(extinction_ratio=math.inf)
SOURCE = SourceParams(mean_photons_per_window=0.02)
NO_DARK = DetectorParams()


def test_config_validation():
    with pytest.raises(DomainError):
        ProtocolConfig(RunMode.RANDOM_BB84, n_windows=0, seed=1)
    with pytest.raises(DomainError):
        ProtocolConfig(RunMode.RANDOM_BB84, n_windows=10, seed=-1)
    with pytest.raises(DomainError):
        ProtocolConfig(RunMode.RANDOM_BB84, n_windows=10, seed=2**64)
    with pytest.raises(DomainError):
        ProtocolConfig(RunMode.RANDOM_BB84, n_windows=10, seed=1, worker_streams=0)
    scan = ProtocolConfig(RunMode.SETTING_SCAN, n_windows=10, seed=1)
    assert scan.total_windows == 80


def test_ideal_system_never_errs():
    config = ProtocolConfig(RunMode.RANDOM_BB84, n_windows=300_000, seed=4)
    counts = run(config, IDEAL_CHAIN, 1.0, SOURCE, NO_DARK)
    correct, wrong = sift(counts)
    assert wrong == 0
    assert correct > 0
    for (_, alice_basis, bob_basis), cell in counts.cells.items():
        if alice_basis is bob_basis:
            # the wrong arm has strictly zero probability here, so matched
            # cells can neither err nor double-click (conjugate cells can)
            assert cell.wrong_clicks == 0
            assert cell.double_clicks == 0


def test_scan_accounting_identity():
    config = ProtocolConfig(RunMode.SETTING_SCAN, n_windows=40_000, seed=8)
    counts = run(config, IDEAL_CHAIN, 1.0, SOURCE, NO_DARK)
    assert set(counts.cells) == set(CELL_KEYS)
    for cell in counts.cells.values():
        assert cell.windows == 40_000
    assert counts.total_windows == 8 * 40_000


def test_random_mode_conservation():
    config = ProtocolConfig(RunMode.RANDOM_BB84, n_windows=123_457, seed=21)
    counts = run(config, calibrated_optics(), 0.3, SOURCE, calibrated_detector())
    assert counts.total_windows == 123_457
    for cell in counts.cells.values():
        assert min(
            cell.correct_clicks,
            cell.wrong_clicks,
            cell.double_clicks,
            cell.empty_windows,
        ) >= 0


def test_determinism_across_worker_counts():
    """The block contract: tallies depend on the seed, never on how many
    threads executed the blocks (window count spans several blocks)."""
    n = 2 * BLOCK_WINDOWS + 12_345
    reference = None
    for workers in (1, 2, 3, 8):
        config = ProtocolConfig(
            RunMode.RANDOM_BB84, n_windows=n, seed=31337, worker_streams=workers
        )
        counts = run(config, calibrated_optics(), 0.5, SOURCE, calibrated_detector())
        if reference is None:
            reference = counts
        else:
            assert counts == reference


def test_repeat_run_is_identical():
    config = ProtocolConfig(RunMode.SETTING_SCAN, n_windows=60_000, seed=5)
    first = run(config, calibrated_optics(), 0.8, SOURCE, calibrated_detector())
    second = run(config, calibrated_optics(), 0.8, SOURCE, calibrated_detector())
    assert first == second


def test_conjugate_cells_split_evenly_with_ideal_optics():
    config = ProtocolConfig(RunMode.SETTING_SCAN, n_windows=400_000, seed=13)
    counts = run(config, IDEAL_CHAIN, 1.0, SOURCE, NO_DARK)
    for (bit, alice_basis, bob_basis), cell in counts.cells.items():
        if alice_basis is bob_basis:
            continue
        singles = cell.correct_clicks + cell.wrong_clicks
        assert abs(cell.correct_clicks - cell.wrong_clicks) <= 4.0 * math.sqrt(singles)


def test_kernel_against_scalar_replay():
    """Replay one block with an independent scalar implementation that
    consumes the generator exactly the way the kernel documents (cells,
    then arm-0 uniforms, then arm-1 uniforms) and recomputes every
    probability from the optics/detector layers directly."""
    n = 50_000
    seed = 777
    chain = calibrated_optics()
    det = calibrated_detector()
    t = 0.4
    config = ProtocolConfig(RunMode.RANDOM_BB84, n_windows=n, seed=seed)
    counts = run(config, chain, t, SOURCE, det)

    rng = _block_rng(seed, 0)
    cells = rng.integers(0, len(CELL_KEYS), size=n, dtype=np.uint8)
    u0 = rng.random(n)
    u1 = rng.random(n)
    expected = {key: [0, 0, 0, 0] for key in CELL_KEYS}  # correct/wrong/double/empty
    for i in range(n):
        bit, alice_basis, bob_basis = CELL_KEYS[cells[i]]
        state = encode(bit, alice_basis, chain.extinction_ratio).rotated(
            chain.misalignment_deg
        )
        q0, q1 = pbs_probabilities(state, bob_basis)
        mu = SOURCE.mean_photons_per_window * t
        click0 = u0[i] < click_probability(mu * q0, det)
        click1 = u1[i] < click_probability(mu * q1, det)
        tally = expected[CELL_KEYS[cells[i]]]
        if click0 and click1:
            tally[2] += 1
        elif click0:
            tally[0 if bit == 0 else 1] += 1
        elif click1:
            tally[1 if bit == 0 else 0] += 1
        else:
            tally[3] += 1
    for key, (correct, wrong, double, empty) in expected.items():
        cell = counts.cells[key]
        assert (
            cell.correct_clicks,
            cell.wrong_clicks,
            cell.double_clicks,
            cell.empty_windows,
        ) == (correct, wrong, double, empty)


def test_sift_hand_built_counts():
    cells = {}
    value = 1
    for key in CELL_KEYS:
        cells[key] = CellCounts(
            correct_clicks=value,
            wrong_clicks=value * 2,
            double_clicks=3,
            empty_windows=10,
        )
        value += 1
    counts = RunCounts(cells)
    # brute-force oracle over all eight cells
    expect_correct = sum(
        c.correct_clicks
        for (b, ab, bb), c in cells.items()
        if ab is bb
    )
    expect_wrong = sum(
        c.wrong_clicks for (b, ab, bb), c in cells.items() if ab is bb
    )
    assert sift(counts) == (expect_correct, expect_wrong)
    # matched cells are V/VH, H/VH, L/LR, R/LR -> values 1, 3, 6, 8
    assert sift(counts) == (1 + 3 + 6 + 8, 2 * (1 + 3 + 6 + 8))


def test_sift_ignores_conjugate_only_clicks():
    cells = {key: CellCounts() for key in CELL_KEYS}
    for key in CELL_KEYS:
        bit, alice_basis, bob_basis = key
        if alice_basis is not bob_basis:
            cells[key] = CellCounts(correct_clicks=50, wrong_clicks=60)
    assert sift(RunCounts(cells)) == (0, 0)


def test_qber_examples():
    assert qber(100, 0).qber == 0.0
    assert qber(0, 100).qber == 1.0
    estimate = qber(1201, 100)
    assert estimate.qber == pytest.approx(100 / 1301, rel=1e-15)
    assert estimate.qber == pytest.approx(0.0768, abs=1e-4)
    assert estimate.n_sifted == 1301
    assert estimate.stderr == pytest.approx(
        math.sqrt(estimate.qber * (1 - estimate.qber) / 1301), rel=1e-12
    )
    assert qber(0, 0) is None
    with pytest.raises(DomainError):
        qber(-1, 5)


@given(st.integers(0, 10**9), st.integers(0, 10**9))
@settings(max_examples=200)
def test_qber_bounds(correct, wrong):
    estimate = qber(correct, wrong)
    if correct + wrong == 0:
        assert estimate is None
    else:
        assert 0.0 <= estimate.qber <= 1.0
        assert estimate.stderr >= 0.0


def test_simulated_qber_tracks_analytic_model():
    """One in-line agreement check (the full preset x 4-sigma gate lives
    in the acceptance suite)."""
    chain = calibrated_optics()
    det = calibrated_detector()
    t = 0.05
    config = ProtocolConfig(RunMode.RANDOM_BB84, n_windows=8_000_000, seed=2024)
    counts = run(config, chain, t, SOURCE, det)
    estimate = qber(*sift(counts))
    signal_rate = det.quantum_efficiency * SOURCE.mean_photons_per_window * t / det.window_s
    expected = analytic_qber(0.0086, signal_rate, 2 * det.dark_rate_hz)
    assert abs(estimate.qber - expected) <= 4.0 * estimate.stderr
