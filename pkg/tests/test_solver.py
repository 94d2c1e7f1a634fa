import math

import numpy as np
import pytest

from logdrift.coefficients import DiffusionSpec, DriftSpec
from logdrift.fields import Field
from logdrift.noise import sample_noise
from logdrift.solver import (
    Grid,
    coupled_uniqueness_experiment,
    factorization_check,
    solve_l2_ensemble,
    solve_path,
    step,
)

CRITICAL = DriftSpec("log_linear")
SUPERCRITICAL = DriftSpec("log_power", exponent=2.0)
BOUNDED = DiffusionSpec("bounded", d1=1.0, d2=0.0)

# frozen after the first implementation run (seed 909, alpha 0.1, sigma == 1)
FACTORIZATION_512_REFERENCE = 0.034359202283835696


def test_grid_properties_and_validation():
    g = Grid(n_modes=16, T=2.0, n_steps=128)
    assert g.dt == pytest.approx(2.0 / 128.0)
    assert g.n_x == 16
    assert g.stiffness == pytest.approx(g.dt * 0.5 * math.pi ** 2 * 256)
    ts = g.times()
    assert ts[0] == 0.0 and ts[-1] == 2.0 and ts.size == 129
    with pytest.raises(ValueError):
        Grid(n_modes=3, T=1.0, n_steps=8)
    with pytest.raises(ValueError):
        Grid(n_modes=8, T=0.0, n_steps=8)
    with pytest.raises(ValueError):
        Grid(n_modes=8, T=1.0, n_steps=0)


def test_pure_semigroup_decay():
    g = Grid(n_modes=8, T=0.5, n_steps=64)
    traj = solve_path(Field.mode(8, 1), None, None, g)
    exact = np.exp(-0.5 * np.pi ** 2 * traj.l2_times)
    assert np.max(np.abs(traj.l2_series - exact) / exact) < 1e-12


def test_every_mode_decays_by_exact_factor():
    g = Grid(n_modes=8, T=1.0, n_steps=100)
    u = Field.random_l2(8, norm=2.0, seed=1)
    out = step(u, None, None, np.zeros(8), g)
    E = np.exp(-0.5 * (np.arange(1, 9) * np.pi) ** 2 * g.dt)
    np.testing.assert_array_equal(out.coeffs, E * u.coeffs)


def test_linear_drift_first_order_convergence():
    lam = 3.0
    target = math.exp((lam - 0.5 * math.pi ** 2) * 0.5)
    errs = []
    for n_steps in (64, 128, 256):
        g = Grid(n_modes=8, T=0.5, n_steps=n_steps)
        traj = solve_path(Field.mode(8, 1), lambda z: lam * z, None, g)
        errs.append(abs(traj.l2_series[-1] - target))
    orders = [math.log2(a / b) for a, b in zip(errs, errs[1:])]
    assert min(orders) >= 0.9


def test_additive_noise_modal_variance():
    n_modes, n_steps, paths = 16, 128, 400
    g = Grid(n_modes=n_modes, T=1.0, n_steps=n_steps)
    js = np.arange(1, n_modes + 1) * np.pi
    series = float(np.sum((1.0 - np.exp(-js ** 2)) / js ** 2))
    Xi = np.stack([sample_noise(1000 + i, n_modes, n_steps, g.dt).increments
                   for i in range(paths)])
    l2, blown, _ = solve_l2_ensemble(Field.zero(n_modes), None, 1.0, g, Xi)
    assert not blown.any()
    terminal_sq = l2[:, -1] ** 2
    est = float(np.mean(terminal_sq))
    se = float(np.std(terminal_sq, ddof=1) / math.sqrt(paths))
    assert abs(est - series) <= 3.0 * se


def test_trajectory_linear_in_sigma_under_common_noise():
    g = Grid(n_modes=16, T=0.25, n_steps=128)
    noise = sample_noise(17, 16, 128, g.dt)
    base = solve_path(Field.zero(16), None, 1.0, g, noise, keep_coeffs=True)
    doubled = solve_path(Field.zero(16), None, 2.0, g, noise, keep_coeffs=True)
    np.testing.assert_array_equal(2.0 * base.coeffs, doubled.coeffs)


def test_noise_coupling_bitwise_reproducible():
    g = Grid(n_modes=16, T=0.25, n_steps=128)
    noise = sample_noise(17, 16, 128, g.dt)
    a = solve_path(Field.zero(16), CRITICAL, BOUNDED, g, noise, keep_coeffs=True)
    b = solve_path(Field.zero(16), CRITICAL, BOUNDED, g, noise, keep_coeffs=True)
    np.testing.assert_array_equal(a.coeffs, b.coeffs)


def test_zero_is_a_fixed_point():
    # b(0) = 0 and sigma(0) = 0 pin the origin exactly
    sig0 = DiffusionSpec("sublinear_power", d1=1.0, d2=0.0, theta=0.5)
    g = Grid(n_modes=8, T=0.5, n_steps=64)
    noise = sample_noise(23, 8, 64, g.dt)
    traj = solve_path(Field.zero(8), CRITICAL, sig0, g, noise)
    assert np.all(traj.l2_series == 0.0)


def test_blowup_detected_and_trajectory_truncated():
    g = Grid(n_modes=8, T=4.0, n_steps=512)
    u0 = Field.from_coeffs(np.concatenate([[50.0], np.zeros(7)]))
    noise = sample_noise(5, 8, 512, g.dt)
    traj = solve_path(u0, SUPERCRITICAL, 1.0, g, noise, threshold=1e8)
    assert traj.blown_up
    assert traj.blowup_time is not None
    assert traj.l2_series[-1] > 1e8 or not math.isfinite(traj.l2_series[-1])
    assert np.all(traj.l2_series[:-1] <= 1e8)
    assert traj.l2_times[-1] == traj.blowup_time
    assert traj.l2_times.size < g.n_steps + 1


def test_saved_fields_match_l2_series():
    g = Grid(n_modes=16, T=0.5, n_steps=64)
    noise = sample_noise(31, 16, 64, g.dt)
    traj = solve_path(Field.random_l2(16, 3.0, seed=4), CRITICAL, BOUNDED, g,
                      noise, save_stride=16)
    for t, f in zip(traj.times, traj.fields):
        k = int(np.searchsorted(traj.l2_times, t))
        assert abs(f.l2_norm() - traj.l2_series[k]) < 1e-12


def test_solver_input_validation():
    g = Grid(n_modes=8, T=1.0, n_steps=16)
    with pytest.raises(ValueError):
        solve_path(Field.zero(8), None, 1.0, g, None)  # stochastic needs noise
    with pytest.raises(ValueError):
        solve_path(Field.zero(4), None, None, g)
    bad = sample_noise(1, 8, 32, 1.0 / 32.0)
    with pytest.raises(ValueError):
        solve_path(Field.zero(8), None, 1.0, g, bad)
    with pytest.raises(TypeError):
        solve_path(Field.zero(8), 3.5, None, g)


def test_ensemble_freezes_blown_rows():
    g = Grid(n_modes=8, T=4.0, n_steps=256)
    u0 = Field.from_coeffs(np.concatenate([[50.0], np.zeros(7)]))
    Xi = np.stack([sample_noise(100 + i, 8, 256, g.dt).increments for i in range(3)])
    l2, blown, steps = solve_l2_ensemble(u0, SUPERCRITICAL, 1.0, g, Xi)
    assert blown.all()
    for p in range(3):
        s = steps[p]
        assert s > 0
        assert np.all(l2[p, s:] == l2[p, s])


def test_spectral_refinement_differences_shrink():
    diffs = []
    for N in (16, 32, 64):
        g_c = Grid(n_modes=N, T=0.5, n_steps=512)
        g_f = Grid(n_modes=2 * N, T=0.5, n_steps=512)
        u0c = Field.from_coeffs(np.concatenate([[5.0, 2.0], np.zeros(N - 2)]))
        u0f = Field.from_coeffs(np.concatenate([[5.0, 2.0], np.zeros(2 * N - 2)]))
        coarse = solve_path(u0c, CRITICAL, BOUNDED, g_c,
                            sample_noise(77, N, 512, g_c.dt), keep_coeffs=True)
        fine = solve_path(u0f, CRITICAL, BOUNDED, g_f,
                          sample_noise(77, 2 * N, 512, g_f.dt), keep_coeffs=True)
        pad = np.zeros_like(fine.coeffs)
        pad[:, :N] = coarse.coeffs
        diffs.append(float(np.max(np.sqrt(np.sum((pad - fine.coeffs) ** 2, axis=1)))))
    assert diffs[0] > diffs[1] > diffs[2]


def test_uniqueness_experiment_converges():
    g = Grid(n_modes=16, T=0.5, n_steps=512)
    u0 = Field.random_l2(16, norm=5.0, seed=9)
    res = coupled_uniqueness_experiment(u0, CRITICAL, BOUNDED, g, seed=314,
                                        levels=(4, 8, 16, 32))
    d = res["sup_diffs"]
    assert len(d) == 3
    assert d[1] > d[2]
    assert d[2] < 1e-2


def test_uniqueness_experiment_plateau_identity():
    # affine drift inside every plateau: all levels see the same dynamics
    g = Grid(n_modes=16, T=0.5, n_steps=256)
    u0 = Field.random_l2(16, norm=2.0, seed=3)
    res = coupled_uniqueness_experiment(u0, DriftSpec("linear"), BOUNDED, g,
                                        seed=11, levels=(8, 16))
    assert res["sup_diffs"][0] < 1e-12


def test_uniqueness_experiment_guards():
    g = Grid(n_modes=8, T=0.25, n_steps=32)
    u0 = Field.random_l2(8, norm=2.0, seed=1)
    with pytest.raises(ValueError):
        coupled_uniqueness_experiment(u0, CRITICAL, BOUNDED, g, 1, levels=(8, 8))
    with pytest.raises(RuntimeError):
        coupled_uniqueness_experiment(u0, CRITICAL, BOUNDED, g, 1,
                                      levels=(4, 8), threshold=1e-6)


def test_deterministic_mollified_levels_approach_reference():
    # sigma == 0: mollified solves approach a fine-grid integration of b itself
    g = Grid(n_modes=16, T=0.5, n_steps=512)
    fine = Grid(n_modes=16, T=0.5, n_steps=4096)
    u0 = Field.random_l2(16, norm=3.0, seed=21)
    ref = solve_path(u0, CRITICAL, None, fine)
    finals = []
    for n in (8, 64):
        from logdrift.coefficients import MollifierParams, mollify
        traj = solve_path(u0, mollify(CRITICAL, MollifierParams(n=n)), None, g)
        finals.append(traj.final().coeffs)
    ref_final = ref.final().coeffs
    errs = [float(np.sqrt(np.sum((f - ref_final) ** 2))) for f in finals]
    assert errs[1] < 1e-3
    assert errs[1] <= errs[0]


def test_factorization_identity_refines():
    errs = []
    for n_steps in (128, 256, 512):
        g = Grid(n_modes=32, T=1.0, n_steps=n_steps)
        noise = sample_noise(909, 32, n_steps, g.dt)
        errs.append(factorization_check(0.1, g, noise))
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] == pytest.approx(FACTORIZATION_512_REFERENCE, rel=1e-9)
    assert errs[2] < 0.10


def test_factorization_trivial_and_validation():
    g = Grid(n_modes=8, T=1.0, n_steps=32)
    noise = sample_noise(2, 8, 32, g.dt)
    assert factorization_check(0.2, g, noise, sigma_path=np.zeros((32, 8))) == 0.0
    with pytest.raises(ValueError):
        factorization_check(0.3, g, noise)
    with pytest.raises(ValueError):
        factorization_check(0.0, g, noise)
    with pytest.raises(ValueError):
        factorization_check(0.1, g, noise, sigma_path=np.zeros((5, 8)))
