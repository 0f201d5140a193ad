import numpy as np
import pytest

from cqm.bundle import Config, GaugeField, Shift
from cqm.classical import (DiscretePath, HPFSample, action,
                           action_gauge_split, action_gauge_transformed,
                           el_residual, flat_connection, flat_connection_curl,
                           free_hpf, hpf_table, hpf_to_csv, hpf_value,
                           noether_charge, path_to_csv, shift_path_nodes,
                           solve_critical_path)
from cqm.cocycle import path_cocycle
from conftest import random_path


def test_action_straight_line(free1):
    path = DiscretePath.straight(Config(0.0, [0.0]), Config(1.0, [1.0]), 100)
    assert action(free1, path) == pytest.approx(0.5, abs=1e-12)


def test_action_static_path(free1):
    t = np.linspace(0, 1, 11)
    path = DiscretePath.from_nodes(t, np.full((11, 1), 0.7))
    assert action(free1, path) == 0.0


def test_action_reparametrization_invariance(free1):
    tau = np.linspace(0.0, 0.5, 33)
    t = 2.0 * tau
    x = np.sin(t)[:, None]
    par = DiscretePath(tau, t, x, deparametrized=False)
    dep = DiscretePath.from_nodes(t, x)
    assert abs(action(free1, par) - action(free1, dep)) < 1e-12


def test_action_degenerate_grid(free1):
    with pytest.raises(ValueError):
        DiscretePath.from_nodes([0.0, 0.0, 1.0], np.zeros((3, 1)))


def test_gauge_split_agreement(free2, rng):
    for _ in range(30):
        path = random_path(rng, 2)
        G = GaugeField.random_bump(2, -0.2, 1.2, rng)
        direct = action_gauge_transformed(free2, path, G)
        split = action_gauge_split(free2, path, G)
        assert abs(direct - split) < 1e-10 * (1 + abs(direct))


def test_gauge_split_zero_field(free2, rng):
    path = random_path(rng, 2)
    G = GaugeField.constant(np.zeros(2))
    assert action_gauge_transformed(free2, path, G) == pytest.approx(
        action(free2, path), abs=1e-14)


def test_gauge_split_with_potential(rng):
    from cqm.bundle import ModelParams
    from cqm.cocycle import LagrangianModel

    model = LagrangianModel(
        ModelParams(2, 1, np.array([1.0, 2.0])),
        potential=lambda z: float(np.cos(z[1] - z[0])),
        translation_invariant=True)
    for _ in range(10):
        path = random_path(rng, 2)
        G = GaugeField.random_bump(2, -0.2, 1.2, rng)
        direct = action_gauge_transformed(model, path, G)
        split = action_gauge_split(model, path, G)
        assert abs(direct - split) < 1e-10 * (1 + abs(direct))


def test_critical_action_shift_is_cocycle(free1, rng):
    # gauge moves off the critical path cost exactly the cocycle integral
    crit = solve_critical_path(free1, Config(0.0, [0.0]), Config(1.0, [1.0]), 50)
    G = GaugeField.random_bump(1, 0.0, 1.0, rng)
    lhs = action_gauge_transformed(free1, crit, G) - action(free1, crit)
    rhs = path_cocycle(free1, crit, G).real_value
    assert abs(lhs - rhs) < 1e-10 * (1 + abs(rhs))


def test_el_residual_straight(free1):
    path = DiscretePath.straight(Config(0.0, [0.0]), Config(1.0, [2.0]), 20)
    assert np.abs(el_residual(free1, path)).max() < 1e-12


def test_el_residual_parabola(free1):
    t = np.linspace(0, 1, 41)
    path = DiscretePath.from_nodes(t, (t ** 2)[:, None])
    res = el_residual(free1, path)
    assert np.allclose(res, 2.0, atol=1e-8)


def test_el_residual_directional_derivative(harmonic, rng):
    # d/de S[path + e*chi] = -sum <chi, residual> dt for endpoint-fixed chi
    t = np.linspace(0, 1, 81)
    path = DiscretePath.from_nodes(t, np.sin(2 * t)[:, None])
    chi = GaugeField.random_bump(1, 0.0, 1.0, rng)
    chin = chi.value_at(t)
    eps = 1e-5
    fd = (action(harmonic, shift_path_nodes(path, eps * chin))
          - action(harmonic, shift_path_nodes(path, -eps * chin))) / (2 * eps)
    res = el_residual(harmonic, path)
    dt = t[1] - t[0]
    inner = -np.sum(chin[1:-1, 0] * res[:, 0]) * dt
    assert abs(fd - inner) < 1e-8 * (1 + abs(inner))


def test_el_residual_needs_three_nodes(free1):
    path = DiscretePath.from_nodes([0.0, 1.0], np.zeros((2, 1)))
    with pytest.raises(ValueError):
        el_residual(free1, path)


def test_solve_free_straight(free1):
    crit = solve_critical_path(free1, Config(0.0, [0.0]), Config(1.0, [1.0]), 50)
    assert np.allclose(crit.x[:, 0], crit.t, atol=1e-14)
    assert action(free1, crit) == pytest.approx(0.5, abs=1e-13)


def test_solve_free_static(free1):
    crit = solve_critical_path(free1, Config(0.0, [0.4]), Config(1.0, [0.4]), 20)
    assert np.abs(crit.x - 0.4).max() == 0.0
    assert action(free1, crit) == 0.0


def test_solve_harmonic(harmonic):
    # tol sits above the M=400 rounding floor of the discrete residual
    crit = solve_critical_path(harmonic, Config(0.0, [0.0]),
                               Config(np.pi / 2, [1.0]), 400, tol=1e-10)
    assert np.abs(el_residual(harmonic, crit)).max() < 1e-10
    assert np.abs(crit.x[:, 0] - np.sin(crit.t)).max() < 1e-6
    assert abs(action(harmonic, crit)) < 1e-6


def test_solve_rejects_bad_times(free1):
    with pytest.raises(ValueError):
        solve_critical_path(free1, Config(1.0, [0.0]), Config(0.0, [1.0]), 10)


def test_richardson_orders(harmonic):
    errs_el = []
    errs_S = []
    for M in (50, 100, 200):
        t = np.linspace(0, np.pi / 2, M + 1)
        exact = DiscretePath.from_nodes(t, np.sin(t)[:, None])
        errs_el.append(np.abs(el_residual(harmonic, exact)).max())
        errs_S.append(abs(action(harmonic, exact)))
    for errs in (errs_el, errs_S):
        for k in range(2):
            assert errs[k] / errs[k + 1] == pytest.approx(4.0, rel=0.15)


def test_noether_constant_on_critical(free2):
    crit = solve_critical_path(free2, Config(0.0, [0.0, 1.0]),
                               Config(1.0, [2.0, -1.0]), 50)
    _, q = noether_charge(free2, crit, Shift(np.array([1.0, 0.5])))
    assert np.ptp(q) < 1e-12


def test_noether_static_zero(free1):
    t = np.linspace(0, 1, 11)
    path = DiscretePath.from_nodes(t, np.full((11, 1), 2.0))
    _, q = noether_charge(free1, path, Shift(np.array([1.0])))
    assert np.abs(q).max() == 0.0


def test_noether_discrete_balance(free1, rng):
    # charge differences across nodes reproduce <chi, m x''> for the free model
    path = random_path(rng, 1)
    chi = Shift(np.array([0.7]))
    t_mid, q = noether_charge(free1, path, chi)
    res = el_residual(free1, path)
    dq = np.diff(q) / np.diff(t_mid)
    assert np.abs(dq - 0.7 * res[:, 0]).max() < 1e-9 * (1 + np.abs(dq).max())


def test_hpf_value_example(free1):
    p0 = Config(0.0, [0.0])
    assert hpf_value(free1, p0, Config(1.0, [2.0]), M=16) == pytest.approx(2.0, abs=1e-12)
    assert hpf_value(free1, p0, Config(3.0, [0.0]), M=16) == 0.0


def test_hpf_table_matches_closed_form(free1):
    p0 = Config(0.0, [0.0])
    t_grid = np.linspace(10.0, 11.0, 12)
    x_grid = np.linspace(-1.0, 1.0, 9)
    hpf = hpf_table(free1, p0, t_grid, x_grid, M=8)
    expected = free_hpf(free1, p0, t_grid[:, None],
                        x_grid[None, :, None] * np.ones((12, 9, 1)))
    assert np.abs(hpf.S - expected).max() < 1e-10


def test_hpf_table_rejects_early_times(free1):
    with pytest.raises(ValueError):
        hpf_table(free1, Config(1.0, [0.0]), [0.5, 2.0], [0.0, 1.0])


def test_hamilton_jacobi_residual(free1):
    p0 = Config(0.0, [0.0])
    hpf = hpf_table(free1, p0, np.linspace(10, 11, 40), np.linspace(-1, 1, 40), M=8)
    S_t = np.gradient(hpf.S, hpf.t_grid, axis=0)
    S_x = np.gradient(hpf.S, hpf.x_grid, axis=1)
    hj = S_t + 0.5 * S_x ** 2
    assert np.abs(hj[1:-1, 1:-1]).max() < 1e-6


def test_flat_connection_momentum_and_curl(free1):
    p0 = Config(0.0, [0.0])
    hpf = hpf_table(free1, p0, np.linspace(10, 11, 25), np.linspace(-1, 1, 25), M=8)
    conn = flat_connection(hpf, free1.params.hbar)
    pi = hpf.x_grid[None, :] / hpf.t_grid[:, None]
    assert np.abs(conn.coeff_x - (-1j * pi))[1:-1, 1:-1].max() < 1e-6
    assert flat_connection_curl(conn) < 1e-6


def test_flat_connection_constant_region():
    hpf = HPFSample(0.0, np.array([0.0]), np.linspace(1, 2, 5),
                    np.linspace(-1, 1, 5), np.full((5, 5), 3.3))
    conn = flat_connection(hpf, 1.0)
    assert np.abs(conn.coeff_t).max() == 0.0
    assert np.abs(conn.coeff_x).max() == 0.0


def test_flat_connection_grid_too_small():
    hpf = HPFSample(0.0, np.array([0.0]), np.linspace(1, 2, 2),
                    np.linspace(-1, 1, 5), np.zeros((2, 5)))
    with pytest.raises(ValueError):
        flat_connection(hpf, 1.0)


def test_csv_exports(tmp_path, free1):
    path = DiscretePath.straight(Config(0.0, [0.0]), Config(1.0, [1.0]), 4)
    f = tmp_path / "path.csv"
    path_to_csv(path, f)
    rows = f.read_text().strip().splitlines()
    assert rows[0] == "tau,t,x_1"
    assert len(rows) == 6
    assert float(rows[-1].split(",")[2]) == 1.0

    hpf = hpf_table(free1, Config(0.0, [0.0]), np.linspace(10, 11, 3),
                    np.linspace(-1, 1, 3), M=4)
    f2 = tmp_path / "hpf.csv"
    hpf_to_csv(hpf, f2)
    rows = f2.read_text().strip().splitlines()
    assert rows[0] == "t,x,S"
    assert len(rows) == 10


def test_solver_reports_nonconvergence():
    from cqm.bundle import ModelParams
    from cqm.cocycle import LagrangianModel

    rough = LagrangianModel(
        ModelParams(1, 1, np.array([1.0])),
        potential=lambda x: float(np.cos(3 * x[0])),
        potential_grad=lambda x: np.array([-3 * np.sin(3 * x[0])]),
        translation_invariant=False)
    with pytest.raises(RuntimeError, match="did not converge|residual"):
        solve_critical_path(rough, Config(0.0, [0.0]), Config(1.0, [4.0]),
                            40, tol=1e-12, max_iter=1)
