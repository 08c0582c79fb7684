"""Exit criteria. Each test prints one PASS/FAIL line; run with ``pytest tests/test_acceptance.py -v``."""

import random
import time

import numpy as np
import pytest

from conftest import random_pairs, two_core_pairs
from iblt import degree_dist as dd
from iblt.annealer import AnnealConfig, optimize
from iblt.density_evolution import DEParams, check_success, de_converge, find_threshold
from iblt.montecarlo import SimConfig, estimate_pe
from iblt.reconcile import recover_diff, subtract
from iblt.table import Iblt, export_graph

TABLE1 = dd.table1()
ANNEALED = TABLE1["annealed_2_3_18"][0]
X3 = TABLE1["x3"][0]
_lines = []


@pytest.fixture(scope="module", autouse=True)
def summary(request):
    yield
    reporter = request.config.pluginmanager.getplugin("terminalreporter")
    if reporter is not None and _lines:
        reporter.write_line("")
        for line in _lines:
            reporter.write_line(line)


def record(criterion: str, ok: bool, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] {criterion}: {detail}"
    _lines.append(line)
    print(line)


@pytest.mark.parametrize("name", list(TABLE1))
def test_1_table1_thresholds(name):
    dist, published = TABLE1[name]
    start = time.perf_counter()
    report = find_threshold(dist, tolerance=1e-4, grid_points=10_000)
    elapsed = time.perf_counter() - start
    ok = abs(report.eta_star - published) <= 1e-3 and elapsed < 1.0
    record(f"1 threshold {name}", ok, f"eta*={report.eta_star:.4f} vs {published} (+-0.001), {elapsed:.3f}s")
    assert abs(report.eta_star - published) <= 1e-3
    assert elapsed < 1.0


@pytest.mark.slow
@pytest.mark.parametrize("name", list(TABLE1))
def test_2_phase_transition(name):
    dist = TABLE1[name][0]
    star = find_threshold(dist).eta_star
    below, above = estimate_pe(SimConfig(dist, 2000, (star - 0.06, star + 0.06), 1000, master_seed=2024)).points
    ok = below.wilson_ci_95[1] < above.wilson_ci_95[0] / 10
    record(
        f"2 phase transition {name}",
        ok,
        f"pe({below.eta:.3f})={below.pe_estimate:.2e} [hi {below.wilson_ci_95[1]:.2e}] vs "
        f"pe({above.eta:.3f})={above.pe_estimate:.2e} [lo {above.wilson_ci_95[0]:.2e}]",
    )
    assert ok


@pytest.mark.slow
def test_3_irregular_beats_regular():
    annealed = estimate_pe(SimConfig(ANNEALED, 2000, (0.88,), 1000, master_seed=88)).points[0]
    regular = estimate_pe(SimConfig(X3, 2000, (0.88,), 1000, master_seed=88)).points[0]
    ok = annealed.wilson_ci_95[1] < regular.wilson_ci_95[0]
    record(
        "3 irregular beats regular",
        ok,
        f"annealed pe={annealed.pe_estimate:.2e} ci={annealed.wilson_ci_95[1]:.2e} < "
        f"x3 pe={regular.pe_estimate:.2e} ci_lo={regular.wilson_ci_95[0]:.2e}",
    )
    assert ok


def test_4_core_oracle_equivalence():
    rng = random.Random(4)
    dists = [dd.regular(3), dd.regular(2), dd.validate([(2, 0.5), (3, 0.5)]), dd.validate([(2, 0.2), (4, 0.8)])]
    instances = 10_000
    mismatches = incomplete = 0
    for i in range(instances):
        m = rng.randint(4, 50)
        dist = rng.choice(dists)
        table = Iblt(m, dist, rng.getrandbits(64), 64, 64)
        pairs = random_pairs(rng, rng.randint(1, m), width=8)
        table.insert_all(pairs)
        core = two_core_pairs(export_graph(table, pairs), len(pairs))
        out = table.recover()
        incomplete += not out.complete
        mismatches += out.complete != (not core)
    record("4 2-core oracle", mismatches == 0, f"{instances} instances, {incomplete} with nonempty core, "
           f"{mismatches} discrepancies")
    assert mismatches == 0
    assert 0 < incomplete < instances


def test_5_algebraic_invariants():
    rng = random.Random(5)
    dist = dd.validate([(2, 0.4), (3, 0.4), (5, 0.2)])
    failures = involution = order = 0
    while involution < 50_000:
        m = rng.randint(5, 30)
        seed = rng.getrandbits(64)
        pairs = random_pairs(rng, rng.randint(1, 10), width=8)
        full = Iblt(m, dist, seed, 64, 64)
        full.insert_all(pairs)
        for j, z in enumerate(pairs):
            reduced = Iblt(m, dist, seed, 64, 64)
            reduced.insert_all(pairs[:j] + pairs[j + 1 :])
            removed = full.copy()
            removed.delete(z)
            failures += removed != reduced
            involution += 1
        for _ in range(len(pairs)):
            shuffled = list(pairs)
            rng.shuffle(shuffled)
            other = Iblt(m, dist, seed, 64, 64)
            other.insert_all(shuffled)
            failures += other != full
            order += 1
    confluence = 0
    for t in range(100):
        m = rng.randint(10, 40)
        table = Iblt(m, dist, t, 64, 64)
        table.insert_all(random_pairs(rng, rng.randint(m // 2, m), width=8))
        ref = table.recover(destructive=False)
        for k in range(100):
            out = table.recover(destructive=False, rng=random.Random(k))
            failures += out.complete != ref.complete or set(out.recovered) != set(ref.recovered)
            confluence += 1
    total = involution + order + confluence
    record("5 algebraic invariants", failures == 0 and total >= 100_000,
           f"{involution} involution + {order} order + {confluence} confluence checks, {failures} failures")
    assert total >= 100_000
    assert failures == 0


@pytest.mark.slow
def test_6_reconciliation():
    completes = false_elements = 0
    runs = 100
    for seed in range(runs):
        rng = random.Random(10_000 + seed)
        shared = random_pairs(rng, 9_900)
        a_only, b_only = random_pairs(rng, 100), random_pairs(rng, 100)
        ta, tb = Iblt(400, X3, seed), Iblt(400, X3, seed)
        ta.insert_all(shared + a_only)
        tb.insert_all(shared + b_only)
        out = recover_diff(subtract(ta, tb))
        completes += out.complete
        false_elements += len(set(out.only_in_a) - set(a_only)) + len(set(out.only_in_b) - set(b_only))
        if out.complete:
            false_elements += len(set(a_only) ^ set(out.only_in_a)) + len(set(b_only) ^ set(out.only_in_b))
    ok = completes >= 99 and false_elements == 0
    record("6 reconciliation", ok, f"{completes}/{runs} complete, {false_elements} false elements")
    assert completes >= 99
    assert false_elements == 0


@pytest.mark.slow
def test_7_annealer_attainment():
    start = time.perf_counter()
    results = []
    for seed in range(8):
        cfg = AnnealConfig({2, 3, 18}, X3, max_lambda2=0.15, steps=5000, rng_seed=seed)
        results.append(optimize(cfg))
    elapsed = time.perf_counter() - start
    best = max(results, key=lambda c: c.threshold)
    ok = best.threshold >= 0.925 and elapsed < 600
    record("7 annealer", ok, f"best {best.dist} -> {best.threshold:.4f} (>= 0.925), {elapsed:.0f}s for 8 chains")
    assert best.threshold >= 0.925
    assert elapsed < 600


def test_8_de_self_consistency():
    disagreements = tested = 0
    for name, (dist, _) in TABLE1.items():
        star = find_threshold(dist).eta_star
        etas = np.concatenate([np.linspace(0.05, star - 0.011, 25), np.linspace(star + 0.011, 1.2, 25)])
        for eta in etas:
            assert abs(eta - star) > 0.01
            trace = de_converge(DEParams(dist, float(eta), max_iters=100_000, convergence_eps=1e-10))
            disagreements += trace.converged_to_zero != check_success(dist, float(eta), 10_000)
            tested += 1
    record("8 DE self-consistency", disagreements == 0, f"{tested} (dist, eta) pairs, {disagreements} disagreements")
    assert tested == 250
    assert disagreements == 0
