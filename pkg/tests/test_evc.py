import numpy as np
import pytest

from anderson_lab.evc import (
    CONDITIONAL_MEAN_REFERENCE,
    EvcResult,
    eigenvalue_shift_test,
    shift_identity_experiment,
    wegner_one_volume,
    wegner_two_volume,
)
from anderson_lab.geometry import Cube, WeakSeparation, config
from anderson_lab.model import ModelSpec, assemble_hamiltonian, sample_disorder
from anderson_lab.spectral import eigensolve

S_GRID = np.geomspace(1e-4, 1e-1, 13)


def test_result_validation():
    with pytest.raises(ValueError, match="increasing"):
        EvcResult(np.array([0.1, 0.1]), np.array([1, 2]), 10, {})
    with pytest.raises(ValueError, match="nondecreasing"):
        EvcResult(np.array([0.1, 0.2]), np.array([5, 2]), 10, {})
    with pytest.raises(ValueError, match="counts"):
        EvcResult(np.array([0.1, 0.2]), np.array([5, 11]), 10, {})


def test_wegner1_input_errors():
    spec = ModelSpec(1, 1)
    cube = Cube(config(0), 2)
    with pytest.raises(ValueError, match="degenerate"):
        wegner_one_volume(cube, 0.5, spec, [0.2, 0.1], 10, seed=1)
    with pytest.raises(ValueError, match="window"):
        wegner_one_volume(cube, 5.0, spec, S_GRID, 10, seed=1)


def test_wegner1_trivial_endpoints():
    spec = ModelSpec(1, 1, energy_max=3.0)
    cube = Cube(config(0), 2)
    r = wegner_one_volume(cube, 0.5, spec, np.array([0.0, 1e-300, 10.0]), 50, seed=5)
    assert r.metadata["empty_window"] == 0
    assert r.empirical_prob[0] == 0.0
    assert r.empirical_prob[1] == 0.0
    assert r.empirical_prob[2] == 1.0


def test_wegner1_slope_near_linear():
    # frozen from the first verified run at the 2000-trial reference scale
    spec = ModelSpec(1, 1, disorder_coupling=1.0, energy_max=1.0)
    r = wegner_one_volume(Cube(config(0), 8), 0.5, spec, S_GRID, 2000, seed=7)
    theta, half_width = r.slope_fit()
    assert theta >= 0.9
    assert theta == pytest.approx(1.0095489282662582, rel=1e-6)
    assert half_width < 0.2


def test_wegner1_doubling_trials_stable():
    spec = ModelSpec(1, 1, disorder_coupling=1.0, energy_max=1.0)
    cube = Cube(config(0), 6)
    grid = np.geomspace(1e-3, 0.3, 10)
    a = wegner_one_volume(cube, 0.5, spec, grid, 400, seed=13)
    b = wegner_one_volume(cube, 0.5, spec, grid, 800, seed=13)
    se = np.sqrt(b.empirical_prob * (1 - b.empirical_prob) / 400)
    assert (np.abs(a.empirical_prob - b.empirical_prob) <= 3 * se + 1e-12).all()


def test_wegner2_requires_separated_pair():
    spec = ModelSpec(2, 1)
    with pytest.raises(ValueError, match="weak-separation"):
        wegner_two_volume(Cube(config(0, 0), 4), Cube(config(0, 1), 4), spec, S_GRID, 10, seed=1)


def test_wegner2_upper_bound_form():
    # frozen from the first verified run; the fitted constant is the max
    # grid ratio, so the bound check is that it stays modest and finite
    spec = ModelSpec(2, 1, disorder_coupling=1.0, energy_max=1.0)
    r = wegner_two_volume(Cube(config(0, 0), 4), Cube(config(0, 40), 4), spec, S_GRID, 2000, seed=11)
    c_hat = r.fitted_constant(2.0 / 3.0)
    assert c_hat == pytest.approx(1.938991221028695, rel=1e-6)
    assert (r.empirical_prob <= c_hat * r.s_grid ** (2.0 / 3.0) + 1e-12).all()
    theta, _ = r.slope_fit()
    assert theta == pytest.approx(0.694510903921983, rel=1e-6)


def test_wegner2_distant_pair_matches_independent_runs():
    # disjoint scatterer supports mean the shared world already factorizes;
    # an explicitly independent second stream must give the same law
    spec = ModelSpec(1, 1, disorder_coupling=1.0, energy_max=1.0)
    cx, cy = Cube(config(0), 4), Cube(config(100), 4)
    grid = np.geomspace(1e-3, 0.3, 10)
    shared = wegner_two_volume(cx, cy, spec, grid, 1500, seed=21)
    indep = wegner_two_volume(cx, cy, spec, grid, 1500, seed=21, independent=True)
    se = np.sqrt(shared.stderr**2 + indep.stderr**2)
    gap = np.abs(shared.empirical_prob - indep.empirical_prob)
    assert (gap <= 3 * se + 1e-12).all()


def _world(spec, cubes, extra=(), seed=17):
    region = set(extra)
    for c in cubes:
        region |= set(c.support_sites())
    return sample_disorder(sorted(region), seed=seed, spec=spec)


def test_shift_zero_is_exact():
    spec = ModelSpec(1, 1)
    cx, cy = Cube(config(0), 3), Cube(config(50), 3)
    cert = WeakSeparation(box=((-3, 3),), j_x=(0,), j_y=())
    sample = _world(spec, [cx, cy], extra=cert.sites())
    assert eigenvalue_shift_test(cx, cy, cert, sample, spec, shift=0.0) == 0.0


def test_shift_single_particle_example():
    spec = ModelSpec(1, 1, disorder_coupling=1.0)
    cx, cy = Cube(config(0), 3), Cube(config(50), 3)
    cert = WeakSeparation(box=((-3, 3),), j_x=(0,), j_y=())
    sample = _world(spec, [cx, cy], extra=cert.sites())
    before_x = eigensolve(assemble_hamiltonian(cx, sample, spec)).eigenvalues
    before_y = eigensolve(assemble_hamiltonian(cy, sample, spec)).eigenvalues
    assert eigenvalue_shift_test(cx, cy, cert, sample, spec, shift=0.1) < 1e-9
    from anderson_lab.model import shift_amplitudes

    shifted = shift_amplitudes(sample, cert.sites(), 0.1)
    after_x = eigensolve(assemble_hamiltonian(cx, shifted, spec)).eigenvalues
    after_y = eigensolve(assemble_hamiltonian(cy, shifted, spec)).eigenvalues
    assert np.abs(after_x - before_x - 0.1).max() < 1e-9
    assert np.array_equal(after_y, before_y)


def test_shift_two_particle_counts():
    spec = ModelSpec(2, 1, disorder_coupling=2.0)
    cx, cy = Cube(config(0, 2), 2), Cube(config(1, 100), 2)
    cert = WeakSeparation(box=((-2, 4),), j_x=(0, 1), j_y=(0,))
    assert cert.n_x == 2 and cert.n_y == 1
    sample = _world(spec, [cx, cy], extra=cert.sites())
    from anderson_lab.model import shift_amplitudes

    before_x = eigensolve(assemble_hamiltonian(cx, sample, spec)).eigenvalues
    before_y = eigensolve(assemble_hamiltonian(cy, sample, spec)).eigenvalues
    shifted = shift_amplitudes(sample, cert.sites(), 0.05)
    after_x = eigensolve(assemble_hamiltonian(cx, shifted, spec)).eigenvalues
    after_y = eigensolve(assemble_hamiltonian(cy, shifted, spec)).eigenvalues
    assert np.abs(after_x - before_x - 0.2).max() < 1e-9
    assert np.abs(after_y - before_y - 0.1).max() < 1e-9
    assert eigenvalue_shift_test(cx, cy, cert, sample, spec, shift=0.05) < 1e-9


def test_shift_rejects_invalid_certificate():
    spec = ModelSpec(1, 1)
    cx, cy = Cube(config(0), 3), Cube(config(50), 3)
    bad = WeakSeparation(box=((-1, 1),), j_x=(0,), j_y=())
    sample = _world(spec, [cx, cy], extra=bad.sites())
    with pytest.raises(ValueError, match="certificate"):
        eigenvalue_shift_test(cx, cy, bad, sample, spec, shift=0.1)


def test_shift_identity_hundred_random_certificates():
    cases = shift_identity_experiment(ModelSpec(1, 1, disorder_coupling=2.0), 100, seed=3)
    assert len(cases) == 100
    assert max(c["residual"] for c in cases) < 1e-9
    assert all(c["n_x"] != c["n_y"] for c in cases)


def test_conditional_mean_reference_values():
    assert CONDITIONAL_MEAN_REFERENCE["single_constant"] == 1.0
    assert CONDITIONAL_MEAN_REFERENCE["pair_constant"] == 16.0
    assert CONDITIONAL_MEAN_REFERENCE["single_exponent"] == pytest.approx(2.0 / 3.0)
    assert CONDITIONAL_MEAN_REFERENCE["pair_size_power"] == 2.0
