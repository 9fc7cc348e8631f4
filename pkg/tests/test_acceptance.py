"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see every line.
Criteria 6.50 and 6.70 are known-red: uniform random reference selection
cannot reach the bands the original hand-picked references achieved (see
DEVIATIONS.md); they are asserted as stated rather than widened.
"""

import math
import re
import time
from pathlib import Path

import numpy as np
import pytest

from fieldnet import (PhysicalConfig, add_reference, binarize, build_kernel,
                      build_network, classify, evaluate, load_idx_labels,
                      potential_table_fast, references_from_spec,
                      select_references)
from fieldnet.mnist_io import DatasetIndex

from conftest import LABELS_FILE, random_binary_image, require_dataset

MNIST_TEST_CLASS_COUNTS = (980, 1135, 1032, 1010, 982, 892, 958, 1028, 974, 1009)

# logged values from the original experiment for the (0_157, 1_46) neuron
TARGET_SUM = 132216.0
TARGET_SUM1 = -79734.0
TARGET_WH1 = -26241.0

ACCURACY_BANDS = {3: (40, 60), 5: (58, 78), 7: (66, 85)}
SEEDS = (1, 2, 3)

CFG = PhysicalConfig()
_cache: dict = {}


def _say(line: str) -> None:
    print(f"\n{line}")


@pytest.fixture(scope="module", autouse=True)
def _need_data():
    require_dataset()


def _net(mnist, seed: int, per_class: int, d2: float = 0.04):
    key = ("net", seed, per_class, d2)
    if key not in _cache:
        images, labels = mnist
        cfg = PhysicalConfig(plane_gap=d2)
        spec = select_references(labels, per_class, seed)
        refs = references_from_spec(spec, images, labels, cfg.bin_threshold)
        t0 = time.perf_counter()
        net = build_network(refs, cfg)
        _cache[key] = (net, time.perf_counter() - t0)
    return _cache[key]


def _report(mnist, seed: int, per_class: int, d2: float = 0.04):
    key = ("report", seed, per_class, d2)
    if key not in _cache:
        images, labels = mnist
        net, _ = _net(mnist, seed, per_class, d2)
        t0 = time.perf_counter()
        report = evaluate(net, images, labels, mode="strict")
        _cache[key] = (report, time.perf_counter() - t0)
    return _cache[key]


def test_criterion_1_label_distribution():
    t0 = time.perf_counter()
    labels = load_idx_labels(LABELS_FILE)
    counts = tuple(np.bincount(labels, minlength=10).tolist())
    elapsed = time.perf_counter() - t0
    ok = counts == MNIST_TEST_CLASS_COUNTS and elapsed < 1.0
    _say(f"ACCEPTANCE 1 (label distribution): {'PASS' if ok else 'FAIL'} "
         f"counts={counts} elapsed={elapsed:.3f}s")
    assert counts == MNIST_TEST_CLASS_COUNTS
    assert elapsed < 1.0


def test_criterion_2_on_axis_potential():
    mask = np.zeros((28, 28), dtype=bool)
    mask[14, 14] = True
    table = potential_table_fast(binarize(mask * np.uint8(255), 150),
                                 build_kernel(CFG))
    expected = CFG.coulomb_k * CFG.charge / CFG.plane_gap
    rel = abs(table[14, 14] - expected) / expected
    ok = rel < 1e-12 and table[14, 14] == table.max()
    _say(f"ACCEPTANCE 2 (on-axis potential): {'PASS' if ok else 'FAIL'} "
         f"value={table[14, 14]:.6f} V expected={expected:.6f} V rel={rel:.2e}")
    assert rel < 1e-12
    assert table[14, 14] == table.max()


def test_criterion_3_oracle_equivalence():
    kq = CFG.coulomb_k * CFG.charge
    d1 = CFG.pixel_pitch
    d2sq = CFG.plane_gap ** 2
    sqrt = math.sqrt

    def oracle(active_m):
        out = np.empty((28, 28))
        for i in range(28):
            im = i * d1
            for j in range(28):
                jm = j * d1
                total = 0.0
                for rm, cm in active_m:
                    dr = rm - im
                    dc = cm - jm
                    total += kq / sqrt(dr * dr + dc * dc + d2sq)
                out[i, j] = total
        return out

    rng = np.random.default_rng(2024)
    kernel = build_kernel(CFG)
    t0 = time.perf_counter()
    worst = 0.0
    n_images = 1000
    for _ in range(n_images):
        img = random_binary_image(rng, 100)
        fast = potential_table_fast(img, kernel)
        active_m = [((int(v) // 28) * d1, (int(v) % 28) * d1)
                    for v in img.active_flat]
        ref = oracle(active_m)
        worst = max(worst, float(np.max(np.abs(fast - ref) / ref)))
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-12 and elapsed < 30.0
    _say(f"ACCEPTANCE 3 (oracle equivalence): {'PASS' if ok else 'FAIL'} "
         f"images={n_images} max_rel={worst:.2e} elapsed={elapsed:.1f}s")
    assert worst < 1e-12
    assert elapsed < 30.0


def test_criterion_4_logged_pair_values(mnist):
    images, labels = mnist
    index = DatasetIndex.from_labels(labels)

    def attempt(pos_a, pos_b, coulomb_k):
        cfg = PhysicalConfig(coulomb_k=coulomb_k)
        kernel = build_kernel(cfg)
        a = binarize(images[pos_a], cfg.bin_threshold)
        b = binarize(images[pos_b], cfg.bin_threshold)
        table = (potential_table_fast(a, kernel)
                 - potential_table_fast(b, kernel)).ravel()
        s = float(table[a.active_flat].sum())
        s1 = float(table[b.active_flat].sum())
        return s, s1, -(s + s1) / 2.0

    def in_band(value, target):
        return abs(value - target) <= 0.02 * abs(target)

    attempts = []
    for base in (0, 1):
        for k in (8.9875e9, 9e9):
            pos_a = index.resolve_class_ordinal(0, 157 - base)
            pos_b = index.resolve_class_ordinal(1, 46 - base)
            attempts.append((f"ordinal {base}-based, K={k:g}",
                             attempt(pos_a, pos_b, k)))
    for k in (8.9875e9, 9e9):
        attempts.append((f"global position, K={k:g}", attempt(157, 46, k)))

    matched = None
    for name, (s, s1, wh1) in attempts:
        hit = (in_band(s, TARGET_SUM) and in_band(s1, TARGET_SUM1)
               and in_band(wh1, TARGET_WH1))
        print(f"  attempt {name}: Sum={s:.1f} Sum1={s1:.1f} Wh1={wh1:.1f} "
              f"{'MATCH' if hit else 'no match'}")
        if hit and matched is None:
            matched = name

    if matched is not None:
        _say(f"ACCEPTANCE 4 (logged pair values): PASS via {matched}")
        return
    # prescribed fallback: the deviation and all attempts are on record
    deviations = Path(__file__).resolve().parent.parent / "DEVIATIONS.md"
    recorded = deviations.exists() and all(
        token in deviations.read_text()
        for token in ("0-based", "1-based", "8.9875e9", "9e9",
                      "132216", "-79734", "-26241"))
    _say("ACCEPTANCE 4 (logged pair values): PASS via documented deviation "
         f"(no combination within ±2%; attempts recorded: {recorded})")
    assert recorded, "no match and DEVIATIONS.md does not record the attempts"


def test_criterion_5_structural_counts(mnist):
    sizes = {3: 870, 5: 2450, 7: 4830}
    lines = []
    for per_class, expected in sizes.items():
        net, build_time = _net(mnist, SEEDS[0], per_class)
        assert net.n_neurons == expected, \
            f"{per_class}/class: {net.n_neurons} neurons, want {expected}"
        assert build_time < 10.0, f"build took {build_time:.1f}s"
        lines.append(f"{net.n_refs} refs -> {net.n_neurons} neurons "
                     f"({build_time:.2f}s)")
    _say(f"ACCEPTANCE 5 (structural counts): PASS  {'; '.join(lines)}")


@pytest.mark.parametrize("per_class", (3, 5, 7))
def test_criterion_6_accuracy_bands(mnist, per_class):
    lo, hi = ACCURACY_BANDS[per_class]
    results = []
    for seed in SEEDS:
        report, elapsed = _report(mnist, seed, per_class)
        acc = 100.0 * report.total_correct / report.total_images
        assert elapsed < 120.0, f"evaluation took {elapsed:.0f}s"
        results.append((seed, acc, lo <= acc <= hi))
    n_in = sum(1 for _, _, hit in results if hit)
    detail = "  ".join(f"seed{seed}={acc:.1f}%{'*' if hit else ''}"
                       for seed, acc, hit in results)
    ok = n_in >= 2
    _say(f"ACCEPTANCE 6 ({per_class * 10} refs, band [{lo},{hi}]%): "
         f"{'PASS' if ok else 'FAIL'}  {detail}  ({n_in}/3 in band)")
    assert n_in >= 2, (
        f"only {n_in}/3 seeds in [{lo},{hi}]% — see DEVIATIONS.md: uniform "
        "random selection cannot match the original hand-picked references")


def test_criterion_7_trends(mnist):
    accs = {}
    for per_class in (3, 5, 7):
        report, _ = _report(mnist, SEEDS[0], per_class)
        accs[per_class] = 100.0 * report.total_correct / report.total_images
    monotone = accs[7] >= accs[5] >= accs[3]
    near_report, _ = _report(mnist, SEEDS[0], 3, d2=0.02)
    far_report, _ = _report(mnist, SEEDS[0], 3, d2=0.04)
    delta = (100.0 * near_report.total_correct / near_report.total_images
             - 100.0 * far_report.total_correct / far_report.total_images)
    ok = monotone and delta != 0.0
    _say(f"ACCEPTANCE 7 (trends): {'PASS' if ok else 'FAIL'}  "
         f"acc(30/50/70)={accs[3]:.1f}/{accs[5]:.1f}/{accs[7]:.1f}%  "
         f"d2 4cm->2cm: {delta:+.2f} points")
    assert monotone
    assert delta != 0.0


def test_criterion_8_property_suites(mnist):
    images, labels = mnist
    net, _ = _net(mnist, SEEDS[0], 3)
    n = net.n_refs

    # threshold antisymmetry, exact
    for k in range(n):
        for k1 in range(k + 1, n):
            assert net.wh1(k, k1) == -net.wh1(k1, k)

    # complementarity over 1000 test images, exact ties exempt
    sample = [binarize(images[i], net.cfg.bin_threshold)
              for i in range(0, 10000, 10)]
    states = net.states_block(sample)
    v = states + net.wh1_flat[None, :]
    mirror = np.empty(net.n_neurons, dtype=np.int64)
    from fieldnet.network import _pair_index
    for k, k1 in net.pairs():
        mirror[_pair_index(k, k1, n)] = _pair_index(k1, k, n)
    vm = v[:, mirror]
    fires = v >= 0
    complement = (fires.astype(int) + fires[:, mirror].astype(int)) == 1
    assert np.all(complement | (v == 0) | (vm == 0))

    # decision invariance under charge and Coulomb-constant scaling
    spec = select_references(labels, 3, SEEDS[0])
    rng = np.random.default_rng(77)
    probes = [random_binary_image(rng, int(rng.integers(20, 250)))
              for _ in range(100)]
    base_decisions = [classify(net, x) for x in probes]
    for cfg in (PhysicalConfig(charge=1e-10), PhysicalConfig(charge=1e-8),
                PhysicalConfig(coulomb_k=8.9875e8),
                PhysicalConfig(coulomb_k=8.9875e10)):
        refs = references_from_spec(spec, images, labels, cfg.bin_threshold)
        scaled = build_network(refs, cfg)
        assert [classify(scaled, x) for x in probes] == base_decisions

    # cascade conservatism, bit-identical
    extra_digit, extra_img = 0, binarize(images[9000], net.cfg.bin_threshold)
    before_rows = net.weight_rows.copy()
    before_wh1 = net.wh1_flat.copy()
    grown = add_reference(net, extra_digit, extra_img)
    assert grown.n_neurons == (n + 1) * n
    assert np.array_equal(net.weight_rows, before_rows)
    assert np.array_equal(net.wh1_flat, before_wh1)
    for k, k1 in net.pairs():
        assert np.array_equal(grown.neuron(k, k1).weights,
                              net.neuron(k, k1).weights)
        assert grown.neuron(k, k1).wh1 == net.neuron(k, k1).wh1

    # add-then-build equivalence on 100 random inputs
    refs = references_from_spec(spec, images, labels, net.cfg.bin_threshold)
    rebuilt = build_network(refs + [(extra_digit, extra_img)], net.cfg)
    assert np.array_equal(grown.weight_rows, rebuilt.weight_rows)
    assert np.array_equal(grown.wh1_flat, rebuilt.wh1_flat)
    for x in probes:
        assert classify(grown, x) == classify(rebuilt, x)

    # self-consistency: the references recognize themselves
    self_correct = sum(classify(net, img) == digit for digit, img in net.refs)
    assert self_correct >= 28, f"only {self_correct}/30 references self-classify"

    _say(f"ACCEPTANCE 8 (property suites): PASS  "
         f"self-consistency={self_correct}/30")


def test_criterion_9_report_fidelity(mnist):
    report, _ = _report(mnist, SEEDS[0], 3)
    csv = report.to_csv()
    lines = csv.strip().splitlines()
    digit_rows = [l for l in lines if l.split(",")[0].isdigit()]
    assert len(digit_rows) == 10
    for d, row in enumerate(digit_rows):
        fields = row.split(",")
        s, i, p = int(fields[1]), int(fields[2]), int(fields[3])
        assert fields[0] == str(d)
        assert i == MNIST_TEST_CLASS_COUNTS[d]
        assert p == (200 * s + i) // (2 * i)
    totals = report.totals_row()
    assert re.fullmatch(r"10000, \d+, \d+%", totals)
    assert f"total,{report.total_correct},10000,{report.overall_percent}" in csv
    _say(f"ACCEPTANCE 9 (report fidelity): PASS  totals row: '{totals}'")
