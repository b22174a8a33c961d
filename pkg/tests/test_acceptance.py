"""End-to-end acceptance checks, one per headline claim.

Each test prints a single PASS/FAIL line with its key numbers and wall
time, then asserts.  Tolerances and runtime budgets live next to the
asserts they guard.
"""

import math
import time

import numpy as np

from anderson_lab.evc import shift_identity_experiment, wegner_one_volume, wegner_two_volume
from anderson_lab.geometry import Cube, config, hausdorff_distance, sym_distance
from anderson_lab.harness import ExperimentConfig, run
from anderson_lab.model import ModelSpec, sample_disorder
from anderson_lab.msa import (
    EXPLORATORY_PARAMS,
    dominated_bound,
    efc_decay_experiment,
    estimate_singularity_prob,
    etv_covering_experiment,
    generate_dominated_instances,
    implication_experiment,
    wi_tensor_check,
)


def _verdict(index, name, ok, detail):
    line = f"acceptance {index:02d} {name}: {'PASS' if ok else 'FAIL'} ({detail})"
    print(line, flush=True)
    assert ok, line


def test_01_distance_pair_example():
    r = 10
    a = config(0, 0, r)
    b = config(0, r, r)
    hausdorff_distance(config(0, 1), config(1, 0))
    sym_distance(config(0, 1), config(1, 0))
    t0 = time.perf_counter()
    d_h = hausdorff_distance(a, b)
    d_s = sym_distance(a, b)
    dt = time.perf_counter() - t0
    ok = d_h == 0 and d_s == r and dt < 1e-3
    _verdict(1, "hausdorff-vs-symmetrized-distance", ok,
             f"d_H={d_h}, d_S={d_s}, {dt * 1e6:.0f}us")


def test_02_shift_identity_certificates():
    t0 = time.perf_counter()
    rows = shift_identity_experiment(ModelSpec(n_particles=2, dim=1), 100, 23)
    dt = time.perf_counter() - t0
    worst = max(r["residual"] for r in rows)
    ok = len(rows) == 100 and worst < 1e-9 and dt < 120
    _verdict(2, "uniform-shift-spectral-translation", ok,
             f"100 certificates, max residual {worst:.2e}, {dt:.1f}s")


def test_03_one_volume_concentration_slope():
    grid = np.logspace(-4, math.log10(0.3), 16)
    spec = ModelSpec(n_particles=1, dim=1, disorder_coupling=1.0)
    t0 = time.perf_counter()
    res = wegner_one_volume(Cube(config(0), 8), 0.5, spec, grid, 2000, 20260515)
    dt = time.perf_counter() - t0
    theta, half = res.slope_fit()
    ok = math.isfinite(theta) and theta >= 0.9 and dt < 300
    _verdict(3, "one-volume-spectral-concentration", ok,
             f"theta_hat={theta:.3f}+-{half:.3f} >= 0.9, {dt:.1f}s")


def test_04_two_volume_holder_envelope():
    grid = np.logspace(-4, -1, 13)
    spec = ModelSpec(n_particles=2, dim=1, disorder_coupling=1.0, energy_max=3.0)
    cube_x = Cube(config((0,), (0,)), 4)
    cube_y = Cube(config((40,), (40,)), 4)
    assert sym_distance(cube_x.center, cube_y.center) > 4 * 2 * 4
    t0 = time.perf_counter()
    res = wegner_two_volume(cube_x, cube_y, spec, grid, 2000, 31)
    dt = time.perf_counter() - t0
    p = res.empirical_prob
    c_hat = res.fitted_constant(2.0 / 3.0)
    violations = int((p > c_hat * grid ** (2.0 / 3.0) * (1 + 1e-12)).sum())
    ok = c_hat > 0 and violations == 0 and dt < 900
    _verdict(4, "two-volume-spectral-proximity-envelope", ok,
             f"c_hat={c_hat:.2f}, grid violations={violations}, {dt:.1f}s")


def test_05_dominated_bound_exhaustive():
    t0 = time.perf_counter()
    checked = held = 0
    for gf, annuli in generate_dominated_instances(10_000, seed=20260607):
        res = dominated_bound(gf, annuli)
        checked += 1
        held += res.holds
    dt = time.perf_counter() - t0
    ok = checked == 10_000 and held == checked and dt < 60
    _verdict(5, "graph-domination-closed-form-bound", ok,
             f"{held}/{checked} bounds hold with zero tolerance, {dt:.1f}s")


def test_06_good_nonresonant_implies_nonsingular():
    t0 = time.perf_counter()
    rep1 = implication_experiment(
        EXPLORATORY_PARAMS,
        ModelSpec(n_particles=1, dim=1, disorder_coupling=50.0),
        k=0, energy=3.0, trials=550, seed=17)
    rep2 = implication_experiment(
        EXPLORATORY_PARAMS,
        ModelSpec(n_particles=2, dim=1, disorder_coupling=50.0),
        k=0, energy=4.0, trials=250, seed=17)
    dt = time.perf_counter() - t0
    premises = rep1.premises_met + rep2.premises_met
    violations = len(rep1.violations) + len(rep2.violations)
    ok = premises >= 500 and violations == 0
    _verdict(6, "good-and-nonresonant-never-singular", ok,
             f"premises {premises} (N=1: {rep1.premises_met}, N=2: "
             f"{rep2.premises_met}), violations {violations}, measured "
             f"constants {rep1.c_gri:.1f}/{rep2.c_gri:.1f}, {dt:.0f}s")


def test_07_separated_cluster_tensor_structure():
    cases = [((0, 104), 1.0, 1.0, 2, 99), ((0, 104), 0.0, 1.0, 2, 99),
             ((0, 50, 1), 1.0, 0.8, 2, 7), ((0, 80), 2.0, 0.5, 3, 5),
             ((0, 300), 1.0, 0.9, 4, 13)]
    worst_excess = -math.inf
    worst_sum = 0.0
    for centers, c_u, zeta, radius, seed in cases:
        spec = ModelSpec(n_particles=len(centers), dim=1,
                         interaction_amplitude=c_u, interaction_exponent=zeta)
        cube = Cube(config(*centers), radius)
        sample = sample_disorder(cube.support_sites(), seed, spec)
        rep = wi_tensor_check(cube, sample, spec)
        worst_excess = max(worst_excess, rep.cross_norm - rep.cross_bound_gap)
        worst_sum = max(worst_sum, rep.eigensum_dev)
    ok = worst_excess <= 0.0 and worst_sum <= 1e-9
    _verdict(7, "cross-cluster-norm-and-tensor-spectrum", ok,
             f"{len(cases)} instances, worst norm excess {worst_excess:.2e}, "
             f"worst eigensum deviation {worst_sum:.2e}")


def test_08_energy_sweep_covering_budget():
    spec = ModelSpec(n_particles=1, dim=1, disorder_coupling=20.0)
    t0 = time.perf_counter()
    out = etv_covering_experiment(Cube(config(0), 8), EXPLORATORY_PARAMS,
                                  spec, trials=200, seed=11)
    dt = time.perf_counter() - t0
    limit = out["budget"] + 3 * out["stderr"]
    ok = out["freq"] <= limit and dt < 600
    _verdict(8, "exceedance-set-covered-by-spectrum", ok,
             f"violation freq {out['freq']:.4f} <= {limit:.4f} "
             f"({out['violations']}/200), {dt:.0f}s")


def test_09_correlator_decay_in_separation():
    spec = ModelSpec(n_particles=2, dim=1, disorder_coupling=50.0,
                     energy_max=20.0)
    t0 = time.perf_counter()
    rep = efc_decay_experiment(spec, EXPLORATORY_PARAMS, [4, 6, 8, 10, 12],
                               trials=200, seed=3)
    dt = time.perf_counter() - t0
    means = rep.means()
    decreasing = bool((np.diff(means) < 0).all())
    margin = max(p.amp_margin for p in rep.points)
    ok = (decreasing and rep.slope < 0 and rep.slope_pvalue < 0.01
          and margin <= 1e-12 and dt < 1200)
    _verdict(9, "correlator-decay-in-symmetrized-distance", ok,
             f"means decreasing={decreasing}, slope {rep.slope:.2f} "
             f"(p={rep.slope_pvalue:.1e}), max amplitude margin {margin:.1e}, "
             f"{dt:.0f}s")


def test_10_reproducible_runs(tmp_path):
    def data_lines(path):
        with open(path, encoding="utf-8", newline="") as f:
            return [l for l in f.read().split("\n")
                    if l and not l.startswith("#")]

    configs = [
        ExperimentConfig(kind="wegner1", spec=ModelSpec(n_particles=1, dim=1),
                         params=EXPLORATORY_PARAMS, trials=250, seed=5,
                         out=str(tmp_path / "w1.csv"), centers=((0,),),
                         radius=6, energy=0.5, s_grid=(1e-3, 1e-2, 1e-1, 0.3)),
        ExperimentConfig(kind="efc-decay",
                         spec=ModelSpec(n_particles=2, dim=1,
                                        disorder_coupling=50.0, energy_max=20.0),
                         params=EXPLORATORY_PARAMS, trials=10, seed=3,
                         out=str(tmp_path / "efc.csv"), separations=(2, 4)),
        ExperimentConfig(kind="dominated", spec=ModelSpec(n_particles=1, dim=1),
                         params=EXPLORATORY_PARAMS, trials=1000, seed=41,
                         out=str(tmp_path / "dom.csv")),
    ]
    details = []
    ok = True
    for cfg in configs:
        first = run(cfg, workers=1)
        rows1 = data_lines(cfg.out)
        again = run(cfg, workers=1)
        rows2 = data_lines(cfg.out)
        wide = run(cfg, workers=8)
        rows8 = data_lines(cfg.out)
        same = (rows1 == rows2 == rows8
                and first.content_id == again.content_id == wide.content_id)
        ok = ok and same
        details.append(f"{cfg.kind}={'ok' if same else 'MISMATCH'}")
    _verdict(10, "byte-identical-reruns-and-worker-invariance", ok,
             ", ".join(details))
