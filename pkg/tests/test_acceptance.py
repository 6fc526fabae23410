"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Criterion 8 runs the end-to-end experiment in a 1000-image subset mode
by default (bounds widened by 2 points, finishes in well under two
minutes); set RINGSNN_ACCEPT_FULL=1 to train on the full 60k split for
10 epochs and evaluate the full 10k test set at the tight bounds.
"""

import json
import math
import os
import time

import numpy as np
import pytest

from ringsnn import cli
from ringsnn import neuron as nm
from ringsnn.materials import GstState, MaterialTable, effective_permittivity, refractive_index_of
from ringsnn.phase_change import DEFAULT_THERMAL, WritePulse, apply_write_pulse, melt_update
from ringsnn.photonics import EffectiveIndices, RingDevice, RingGeometry, resonant_wavelengths
from ringsnn.snn import SnnNetwork, SpikeRaster, infer

from conftest import needs_mnist
from test_materials import box_bisect_eps
from test_snn import brute_force_counts

FULL_MODE = os.environ.get("RINGSNN_ACCEPT_FULL") == "1"


def report(criterion, ok, detail, elapsed=None, limit=None):
    status = "PASS" if ok else "FAIL"
    timing = ""
    if elapsed is not None:
        timing = f" [{elapsed:.2f}s" + (f" < {limit:.0f}s]" if limit else "]")
    print(f"\n[ACCEPTANCE {criterion}] {status}: {detail}{timing}")
    assert ok, f"criterion {criterion} failed: {detail}"
    if limit is not None:
        assert elapsed < limit, f"criterion {criterion} runtime {elapsed:.2f}s over {limit}s"


def test_criterion_1_physics_endpoints():
    start = time.perf_counter()
    table = MaterialTable()
    endpoint_err = 0.0
    for p, expect in ((1.0, table.gst_crystalline), (0.0, table.gst_amorphous)):
        idx = refractive_index_of(GstState(p))
        endpoint_err = max(
            endpoint_err,
            abs(idx.n - expect.n) / expect.n,
            abs(idx.kappa - expect.kappa) / expect.kappa,
        )
    oracle_err = 0.0
    for p in np.linspace(0.0, 1.0, 21):
        closed = effective_permittivity(float(p), table.eps_crystalline, table.eps_amorphous)
        oracle = box_bisect_eps(float(p), table.eps_crystalline, table.eps_amorphous)
        oracle_err = max(oracle_err, abs(closed - oracle) / abs(closed))
    elapsed = time.perf_counter() - start
    report(
        1,
        endpoint_err < 1e-12 and oracle_err < 1e-9,
        f"endpoint relative error {endpoint_err:.2e} (< 1e-12), "
        f"closed form vs bisection oracle {oracle_err:.2e} (< 1e-9) at 21 points",
        elapsed,
        1.0,
    )


def test_criterion_2_resonance_placement():
    start = time.perf_counter()
    found = resonant_wavelengths(RingGeometry(), EffectiveIndices(), (1.50e-6, 1.56e-6))
    hits = [(m, lam) for m, lam in found if abs(lam - 1529.1e-9) <= 0.05e-9]
    elapsed = time.perf_counter() - start
    detail = (
        f"order {hits[0][0]} at {hits[0][1] * 1e9:.4f} nm within 1529.1 +- 0.05 nm"
        if hits
        else "no resonance within 1529.1 +- 0.05 nm"
    )
    report(2, bool(hits), detail, elapsed, 1.0)


def test_criterion_3_transmission_properties():
    start = time.perf_counter()
    device = RingDevice()
    ps = np.linspace(0.0, 1.0, 21)
    tt, td = device.through_drop(ps)
    monotone = bool(np.all(np.diff(tt) > 0) and np.all(np.diff(td) < 0))
    lams = np.linspace(1.52e-6, 1.54e-6, 2001)
    bound_ok = True
    for p in ps:
        tt_l, td_l = device.through_drop(float(p), lams)
        bound_ok = bound_ok and bool(np.all(tt_l + td_l <= 1.0 + 1e-12))
    elapsed = time.perf_counter() - start
    report(
        3,
        monotone and bound_ok,
        "T_through strictly increasing / T_drop strictly decreasing on the 21-point "
        "p grid; T_t + T_d <= 1 on 21 x 2001 (p, wavelength) points",
        elapsed,
        5.0,
    )


def test_criterion_4_phase_change_calibration():
    start = time.perf_counter()
    melted = apply_write_pulse(DEFAULT_THERMAL, GstState(1.0), WritePulse(26e-3))
    anchor_ok = abs(melted.amorphization - 0.57) <= 0.02
    identity_ok = True
    for a in np.linspace(0.0, 1.0, 11):
        state = GstState(1.0 - float(a))
        identity_ok = identity_ok and (
            apply_write_pulse(DEFAULT_THERMAL, state, WritePulse(11e-3)).p == state.p
        )
    a_grid = np.linspace(0.0, 1.0, 21)
    p_grid = np.linspace(0.0, 30e-3, 21)
    surface = melt_update(DEFAULT_THERMAL, a_grid[:, None], p_grid[None, :])
    monotone_ok = bool(
        np.all(np.diff(surface, axis=1) >= 0) and np.all(np.diff(surface, axis=0) >= 0)
    )
    diminishing_ok = bool(
        np.all(np.diff(surface - a_grid[:, None], axis=0) <= 1e-15)
    )
    elapsed = time.perf_counter() - start
    report(
        4,
        anchor_ok and identity_ok and monotone_ok and diminishing_ok,
        f"26 mW from crystalline melts {melted.amorphization:.3f} (0.57 +- 0.02); "
        "11 mW exactly inert on the 11-point grid; 21x21 surface monotone with "
        "diminishing increments",
        elapsed,
        10.0,
    )


def test_criterion_5_neuron_behavior():
    start = time.perf_counter()
    fresh = nm.PhotonicNeuron.fresh()

    cell, flat_ok = fresh, True
    for _ in range(25):
        result = nm.step(cell, 0.0)
        flat_ok = flat_ok and result.membrane_potential == 0.0 and not result.spiked
        cell = result.neuron

    def first_period(drive):
        cell = fresh
        for t in range(200):
            result = nm.step(cell, drive)
            if result.spiked:
                return t + 1
            cell = result.neuron
        return math.inf

    periods = [first_period(float(d)) for d in np.linspace(0.2, 1.0, 9)]
    period_ok = all(b <= a for a, b in zip(periods, periods[1:]))

    cell, reset_ok = fresh, False
    for _ in range(10):
        result = nm.step(cell, 1.0)
        cell = result.neuron
        if result.spiked:
            reset_ok = (
                nm.membrane_potential(cell) == 0.0
                and cell.pos_p == 1.0
                and cell.neg_p == 1.0
            )
            break

    ledger = nm.EnergyLedger()
    ledger.record_step()
    per_step = nm.energy_report(ledger, neuron_count=1, time_steps=1)
    ledger_ok = (
        per_step["total_pj"] == 5.0
        and per_step["step_ns"] == 2.0
        and ledger.total_energy_pj == 5.0
        and ledger.total_time_ns == 2.0
    )
    elapsed = time.perf_counter() - start
    report(
        5,
        flat_ok and period_ok and reset_ok and ledger_ok,
        f"zero-drive flat (exact); spike periods {periods} non-increasing; "
        "post-spike V = 0 and devices crystalline (exact); ledger 5 pJ / 2 ns per step",
        elapsed,
        5.0,
    )


def test_criterion_6_snn_oracle_equivalence():
    start = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(100):
        weights = [rng.normal(size=(10, 8)), rng.normal(size=(8, 4))]
        thresholds = [float(rng.uniform(0.5, 2.0)), float(rng.uniform(0.5, 2.0))]
        raster = (rng.random((10, 10)) < rng.uniform(0.2, 0.6)).astype(float)
        net = SnnNetwork(weights=weights, thresholds=thresholds, neuron_kind="ideal",
                         time_steps=10)
        engine = infer(net, SpikeRaster(spikes=raster, time_steps=10)).spike_counts
        reference = brute_force_counts(weights, thresholds, raster)
        worst = max(worst, float(np.max(np.abs(engine - reference))))
    elapsed = time.perf_counter() - start
    report(
        6,
        worst <= 1e-12,
        f"ideal infer vs brute-force accumulator: max |diff| {worst:.2e} over 100 "
        "random 10x8x4 networks (<= 1e-12)",
        elapsed,
        10.0,
    )


def test_criterion_7_gradient_check():
    from ringsnn.ann import MlpClassifier, gradient_check

    start = time.perf_counter()
    rng = np.random.default_rng(77)
    X = rng.normal(size=(5, 6))
    y = rng.integers(0, 3, 5)
    model = MlpClassifier(hidden=(4,), n_classes=3, seed=0)
    weights, biases = model._init_params(6)
    worst = gradient_check(weights, biases, X, y)
    elapsed = time.perf_counter() - start
    report(
        7,
        worst <= 1e-5,
        f"backprop vs central differences on 6-4-3: max relative error {worst:.2e} (<= 1e-5)",
        elapsed,
        5.0,
    )


# ---------------------------------------------------------------------------
# end-to-end experiment
# ---------------------------------------------------------------------------


@pytest.fixture(scope="module")
def experiment(tmp_path_factory, data_dir):
    root = tmp_path_factory.mktemp("acceptance")
    training = "[training]\nepochs = 10\ntrain_subset = 0\n"
    if FULL_MODE:
        eval_subset = 0
        limit_s = 15 * 60
    else:
        eval_subset = 1000
        limit_s = 2 * 60
    config_path = root / "config.ini"
    config_path.write_text(
        f"[run]\nout_dir = {root}\nseed = 42\n"
        + training
        + f"[data]\ndir = {data_dir}\neval_subset = {eval_subset}\n"
    )
    started = time.perf_counter()
    assert cli.main(["--config", str(config_path), "train"]) == 0
    train_dir = [p for p in sorted((root / "runs").iterdir()) if "train" in p.name.split("-")][-1]
    model = train_dir / "model.json"
    assert cli.main(["--config", str(config_path), "infer", str(model)]) == 0
    elapsed = time.perf_counter() - started
    infer_dir = [p for p in sorted((root / "runs").iterdir()) if "infer" in p.name.split("-")][-1]
    metrics = json.loads((infer_dir / "metrics.json").read_text())
    return {
        "metrics": metrics,
        "metrics_bytes": (infer_dir / "metrics.json").read_bytes(),
        "config": infer_dir / "config.ini",
        "model": model,
        "root": root,
        "elapsed": elapsed,
        "limit": limit_s,
    }


@needs_mnist
def test_criterion_8_end_to_end(experiment):
    metrics = experiment["metrics"]
    ann = metrics["ann_accuracy"]
    ideal = metrics["ideal_snn_accuracy"]
    device = metrics["device_snn_accuracy"]
    if FULL_MODE:
        ann_floor, gap_limit, mode = 0.97, 0.010, "full 10000-image"
    else:
        ann_floor, gap_limit, mode = 0.95, 0.030, "1000-image CI subset"
    ok = (
        ann >= ann_floor
        and abs(ann - ideal) <= gap_limit
        and abs(ideal - device) <= gap_limit
    )
    report(
        8,
        ok,
        f"{mode} mode at T=25, seed 42: ANN {ann:.4f} (>= {ann_floor}), "
        f"ideal SNN {ideal:.4f} (|gap| {abs(ann - ideal):.4f} <= {gap_limit}), "
        f"device SNN {device:.4f} (|gap| {abs(ideal - device):.4f} <= {gap_limit})",
        experiment["elapsed"],
        experiment["limit"],
    )


@needs_mnist
def test_threshold_fraction_sensitivity(experiment, data_dir):
    """Supplementary sweep behind criterion 8: the firing threshold sits at a
    fraction of the full positive-ring swing.  At a fraction of 1.0 any
    neuron whose negative ring holds amorphization can no longer reach the
    threshold (that term only subtracts), so accuracy collapses; the
    0.4-0.6 plateau tracks the ideal network."""
    from ringsnn import dataio
    from ringsnn.ann import MlpClassifier, convert
    from ringsnn.snn import evaluate

    model = MlpClassifier.load(experiment["model"])
    train = dataio.load_mnist(data_dir, "train")
    test = dataio.load_mnist(data_dir, "test")
    calibration = dataio.normalize(train.flat_images[:3000])
    sample = test.take(np.arange(300))
    accuracies = {}
    for fraction in (1.0, 0.75, 0.5, 0.4):
        converted = convert(model, calibration, threshold_fraction=fraction)
        result = evaluate(converted.device, sample.images, sample.labels, seed=42)
        accuracies[fraction] = result.accuracy
    print(f"\n[ACCEPTANCE 8 supplement] threshold_fraction sensitivity: {accuracies}")
    assert accuracies[1.0] < accuracies[0.5] - 0.15  # partial-deadlock collapse
    assert accuracies[0.5] > 0.9
    assert accuracies[0.4] > 0.9


@needs_mnist
def test_criterion_9_bitwise_determinism(experiment):
    start = time.perf_counter()
    root = experiment["root"]
    assert (
        cli.main(["--config", str(experiment["config"]), "infer", str(experiment["model"])])
        == 0
    )
    rerun_dir = [p for p in sorted((root / "runs").iterdir()) if "infer" in p.name.split("-")][-1]
    rerun = (rerun_dir / "metrics.json").read_bytes()
    elapsed = time.perf_counter() - start
    report(
        9,
        rerun == experiment["metrics_bytes"],
        "re-running criterion 8's inference from its resolved config reproduces "
        "metrics.json byte for byte",
        elapsed,
    )
