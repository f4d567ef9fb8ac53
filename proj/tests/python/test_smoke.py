import math

import numpy as np
import pytest

import qcap


def test_packet_norm_and_inner():
    g = qcap.SpatialGrid(-20.0, 20.0, 512)
    u = qcap.gaussian_packet(g, 0.0, 1.0, 2.0)
    assert u.values.shape == (512,)
    assert np.allclose(np.diff(g.x), g.dx)
    # discrete norm from the returned samples
    assert abs(math.sqrt(np.sum(np.abs(u.values) ** 2) * g.dx) - 1.0) < 1e-12
    assert abs(u.norm() - 1.0) < 1e-12
    assert abs(u.inner(u) - 1.0) < 1e-12


def test_free_evolution_conserves():
    g = qcap.SpatialGrid(-40.0, 40.0, 1024)
    cfg = qcap.EvolutionConfig()
    cfg.dt = 1e-3
    cfg.t_final = 0.5
    traj = qcap.evolve(qcap.gaussian_packet(g, 0.0, 1.0, 1.0), qcap.PotentialSpec.zero(),
                       qcap.NonlocalCoupling.none(), cfg)
    rep = qcap.verify_conservation(traj, qcap.PotentialSpec.zero(), qcap.NonlocalCoupling.none())
    assert rep.passed()
    assert rep.max_norm_drift < 1e-10


def test_barrier_transmission_matches_textbook():
    V, w = 4.0, 1.0
    sd = qcap.reflection_transmission(qcap.PotentialSpec.indicator(0.0, w, V), [1.0, 3.0])
    for k, t in zip(sd.k, sd.t):
        E = k * k
        if E < V:
            s = math.sinh(w * math.sqrt(V - E))
            ref = 1.0 / (1.0 + V * V * s * s / (4 * E * (V - E)))
        else:
            s = math.sin(w * math.sqrt(E - V))
            ref = 1.0 / (1.0 + V * V * s * s / (4 * E * (E - V)))
        assert abs(abs(t) ** 2 - ref) < 1e-8
    assert sd.unitarity_defect() < 1e-8


def test_classification():
    assert qcap.classify(qcap.PotentialSpec.zero()).kind == qcap.Classification.Exceptional
    assert qcap.classify(qcap.PotentialSpec.indicator(0, 1)).kind == qcap.Classification.Generic


def test_bound_state_error_is_raised():
    with pytest.raises(qcap.Error):
        qcap.reflection_transmission(qcap.PotentialSpec.indicator(-1, 1, -3.0), [1.0])


def test_fit_exact_samples():
    g = qcap.SpatialGrid(-4.0, 4.0, 512)
    v = qcap.PotentialSpec.double_barrier(3, 5, -2, -1, 1, 2).sample(g)
    fit = qcap.fit_capacitor_params(g, list(v))
    assert fit.value.beta1 == pytest.approx(3.0)
    assert fit.value.beta2 == pytest.approx(5.0)
    assert abs(fit.value.c - 1.0) <= g.dx / 2


def test_small_marchenko_round_trip():
    v0 = qcap.PotentialSpec.indicator(0.0, 1.0, 1.0)
    sd = qcap.uniform_scattering_data(v0, 0.05, 20.0)
    res = qcap.marchenko(sd, qcap.SpatialGrid(-1.0, 2.0, 128), residual_stride=4)
    x, v = res.x, res.v0_hat
    mid = np.abs(x - 0.5) < 0.25
    assert np.all(np.abs(v[mid] - 1.0) < 0.15)
    assert res.residual >= 0
