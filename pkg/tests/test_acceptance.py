"""Acceptance criteria 1-10, each at its stated tolerance.

Every test records one ``criterion N: PASS|FAIL`` line; the lines are printed
in the terminal summary of the pytest run (and inline with ``-s``).
"""

import time

import numpy as np
import pytest

from glasscert import fixture_path
from glasscert.cli import main
from glasscert.graph import cycle_properties
from glasscert.model import label
from glasscert.return_map import (
    UNIQUE_LIMIT_CYCLE,
    certify,
    fixed_point,
    poincare_map,
    zone_frame,
)
from glasscert.simulate import detect_limit_cycle, oracle_integrate, run, sample, state_at

from helpers import (
    FIXTURE_STARTS,
    PAPER_FIXTURES,
    local_step_fd,
    max_relative_error,
    net_and_cycle,
    random_wall_point,
)

ALL_FIXTURES = tuple(FIXTURE_STARTS)


def verdict(report_line, number, ok, detail):
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}"
    report_line(line)
    print(line)
    assert ok, line


def first_wall(c):
    return c.domains[0], c.domains[1]


def test_criterion_1_two_loops_pipeline(capsys, report_line):
    import json

    start = time.perf_counter()
    code = main(["analyze", str(fixture_path("two_negative_loops"))])
    elapsed = time.perf_counter() - start
    report = json.loads(capsys.readouterr().out)

    entry = report["cycles"][0] if len(report["cycles"]) == 1 else None
    analysis = entry["analysis"] if entry else {}
    structure_ok = (
        code == 0
        and entry is not None
        and entry["domains"] == ["000", "010", "011", "111", "101", "100"]
        and entry["properties"]["aligned"]
        and entry["properties"]["all_switch"]
        and analysis["lambda"] > 1
        and analysis["verdict"] == UNIQUE_LIMIT_CYCLE
    )
    net, c = net_and_cycle("two_negative_loops")
    traj = run(net, FIXTURE_STARTS["two_negative_loops"], 60.0)
    limit = detect_limit_cycle(traj, first_wall(c), 1e-8).limit
    gap = float(np.max(np.abs(limit - np.array(analysis.get("fixed_point", [np.inf] * 3)))))
    ok = structure_ok and gap < 1e-6 and elapsed < 1.0
    verdict(report_line, 1, ok,
            f"one aligned all-switch cycle, lambda={analysis.get('lambda', float('nan')):.4f}, "
            f"|q - simulated limit|={gap:.1e} (<1e-6), runtime {elapsed:.2f}s (<1s)")


def test_criterion_2_complex_graph(report_line):
    net, c = net_and_cycle("complex_graph")
    res = certify(net, c)
    order_ok = c.labels == ["000", "010", "110", "111", "011", "001", "101", "100"]
    traj = run(net, FIXTURE_STARTS["complex_graph"], 250 * res.period)
    det = detect_limit_cycle(traj, first_wall(c), 1e-8)
    settled = next((k + 1 for k, d in enumerate(det.deltas) if d < 1e-8), None)
    periodic_ok = settled is not None and settled <= 200
    agrees = res.verdict == UNIQUE_LIMIT_CYCLE and np.max(np.abs(det.limit - res.fixed_point)) < 1e-6
    ok = order_ok and res.properties.aligned and periodic_ok and agrees
    verdict(report_line, 2, ok,
            f"cycle order matches, aligned, Cauchy difference <1e-8 after {settled} returns (<=200), "
            f"verdict {res.verdict} with lambda={res.lam:.2f}, simulated limit matches q")


def test_criterion_3_parallel_thresholds(report_line):
    net, c = net_and_cycle("multiple_thresholds")
    res = certify(net, c)
    branch_ok = res.verdict == UNIQUE_LIMIT_CYCLE and res.branch == "parallel-thresholds"
    traj = run(net, FIXTURE_STARTS["multiple_thresholds"], 30 * res.period)
    seq = [label(a) for a in traj.domain_sequence()]
    order = ["00", "10", "20", "21", "11", "01"]
    start = seq.index("00")
    body = seq[start:]
    cyclic = body == (order * (len(body) // 6 + 1))[:len(body)]
    crossings = {("00", "10"), ("10", "20"), ("21", "11"), ("11", "01")}
    periods = [body[i:i + 7] for i in range(0, len(body) - 6, 6)]
    both = all(crossings <= set(zip(p, p[1:])) for p in periods)
    ok = branch_ok and cyclic and both and len(periods) >= 10
    verdict(report_line, 3, ok,
            f"branch {res.branch}, {len(periods)} simulated periods visit 00,10,20,21,11,01 "
            f"and cross both x1 thresholds each way")


def test_criterion_4_two_gene_loop(report_line):
    net, c = net_and_cycle("negative_loop_2d")
    res = certify(net, c)
    traj = run(net, FIXTURE_STARTS["negative_loop_2d"], 50.0)
    det = detect_limit_cycle(traj, first_wall(c), 1e-8)
    corner = res.corner
    dist = [float(np.max(np.abs(p - corner))) for p in det.crossing_points]
    shrinking = all(b < a for a, b in zip(dist, dist[1:]))
    ok = abs(res.lam - 1.0) < 1e-9 and shrinking and dist[-1] < 1e-4
    verdict(report_line, 4, ok,
            f"|lambda - 1|={abs(res.lam - 1.0):.1e} (<1e-9), {len(dist)} crossings approach the corner "
            f"monotonically, final distance {dist[-1]:.1e}")


def test_criterion_5_local_derivatives(report_line):
    worst1 = worst2 = 0.0
    points = 0
    for name in ALL_FIXTURES:
        net, c = net_and_cycle(name)
        rng = np.random.default_rng(2024)
        for _ in range(60):
            k = int(rng.integers(1, len(c) + 1))
            x = random_wall_point(rng, c, k - 1)
            worst1 = max(worst1, max_relative_error(*local_step_fd(net, c, k, x, 1)))
            worst2 = max(worst2, max_relative_error(*local_step_fd(net, c, k, x, 2)))
            points += 1
    ok = worst1 < 1e-6 and worst2 < 1e-5
    verdict(report_line, 5, ok,
            f"{points} wall points over {len(ALL_FIXTURES)} fixtures: first order {worst1:.1e} (<1e-6), "
            f"second order {worst2:.1e} (<1e-5)")


def test_criterion_6_zone_signs_and_invariance(report_line):
    sign_fail = zone_fail = 0
    for name in ALL_FIXTURES:
        net, c = net_and_cycle(name)
        frame = zone_frame(net, c)
        phi0 = net.focal(c.domains[0])
        s0 = c.directions[0]
        rng = np.random.default_rng(6)
        for _ in range(100):
            y = poincare_map(net, c, random_wall_point(rng, c, 0, margin=0.0))
            if not np.array_equal(np.sign(np.delete(phi0 - y, s0)), frame.sigma):
                sign_fail += 1
        for _ in range(200):
            z = frame.to_z(poincare_map(net, c, frame.from_z(frame.apex * rng.random(net.n - 1))))
            if not (np.all(z >= 0) and np.all(z <= frame.apex)):
                zone_fail += 1
    ok = sign_fail == 0 and zone_fail == 0
    verdict(report_line, 6, ok,
            f"sign(phi0 - Tx) = sigma0 failed {sign_fail}/{100 * len(ALL_FIXTURES)}, "
            f"T(zone) outside zone {zone_fail}/{200 * len(ALL_FIXTURES)}")


def test_criterion_7_interior_images(report_line):
    net, c = net_and_cycle("multiple_thresholds")
    s0 = c.directions[0]
    bounds = [b for j, b in enumerate(c.wall_bounds[0]) if j != s0]
    rng = np.random.default_rng(7)
    starts = []
    # the vertices of W^0, then random points
    for corner in np.array(np.meshgrid(*bounds)).reshape(len(bounds), -1).T:
        starts.append(np.insert(corner, s0, c.thresholds[0]))
    while len(starts) < 200:
        starts.append(random_wall_point(rng, c, 0, margin=0.0))
    margin = np.inf
    for x in starts:
        y = np.delete(poincare_map(net, c, x), s0)
        for v, (lo, hi) in zip(y, bounds):
            margin = min(margin, v - lo, hi - v)
    ok = margin > 0
    verdict(report_line, 7, ok,
            f"{len(starts)} points of W0 including its vertices; smallest distance of an image "
            f"to the wall boundary {margin:.3e} (>0)")


def test_criterion_8_uniqueness(report_line):
    spread = 0.0
    max_multiplier = 0.0
    all_unique = True
    for name in PAPER_FIXTURES:
        net, c = net_and_cycle(name)
        res = certify(net, c)
        all_unique &= res.verdict == UNIQUE_LIMIT_CYCLE
        frame = zone_frame(net, c)
        rng = np.random.default_rng(8)
        for _ in range(20):
            start = frame.from_z(frame.apex * rng.random(net.n - 1))
            q, _ = fixed_point(net, c, start=start)
            spread = max(spread, float(np.max(np.abs(q - res.fixed_point))))
        max_multiplier = max(max_multiplier, max(res.floquet_multipliers))
    ok = all_unique and spread < 1e-8 and max_multiplier < 1
    verdict(report_line, 8, ok,
            f"20 zone starts per fixture reach q within {spread:.1e} (<1e-8); "
            f"largest Floquet multiplier {max_multiplier:.3e} (<1)")


@pytest.mark.slow
def test_criterion_9_oracle_equivalence(report_line):
    deviations = {}
    for name in ALL_FIXTURES:
        net, _ = net_and_cycle(name)
        x0 = FIXTURE_STARTS[name]
        traj = run(net, x0, 20.0)
        exact = np.array([x for _, x in sample(traj, net, 0.01)])
        oracle = oracle_integrate(net, x0, 20.0, h=1e-5, sample_dt=0.01, bisections=50)
        deviations[name] = float(np.max(np.abs(exact - oracle.states)))
    worst = max(deviations.values())
    ok = worst < 1e-4
    detail = ", ".join(f"{k} {v:.1e}" for k, v in deviations.items())
    verdict(report_line, 9, ok, f"max deviation vs RK4 oracle on [0,20]: {detail} (<1e-4)")


def test_criterion_10_periodicity(report_line):
    worst = {}
    for name in PAPER_FIXTURES:
        net, c = net_and_cycle(name)
        period = certify(net, c).period
        traj = run(net, FIXTURE_STARTS[name], 40 * period)
        crossings = detect_limit_cycle(traj, first_wall(c), 1e-8).crossing_times
        t0 = crossings[29]
        grid = np.linspace(t0, t0 + period, 400)
        worst[name] = max(
            float(np.max(np.abs(state_at(traj, net, t + period) - state_at(traj, net, t))))
            for t in grid
        )
    ok = max(worst.values()) < 1e-5
    detail = ", ".join(f"{k} {v:.1e}" for k, v in worst.items())
    verdict(report_line, 10, ok, f"max |x(t+P) - x(t)| over one period after 30 returns: {detail} (<1e-5)")
