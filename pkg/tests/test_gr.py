import numpy as np
import pytest

from varcomp.errors import DivergentHomotopy, SingularMetric
from varcomp.gr import (
    PI, EMJet, MetricJet, christoffel, completion_density, covariant_potential_divergence_demo,
    curvature, einstein_density, em_flat_noether, em_hilbert_closed_form, em_hilbert_tensor_fd,
    em_noether_density, em_source_fn, em_symmetrization_term, em_symmetrized_tensor,
    em_vt_closed_form, hilbert_density, hilbert_density_fn, metric_jet_point, minkowski, ricci_source_density,
    ricci_source_fn, sample_em_jet, sample_metric_jet, sphere_metric_jet,
)
from varcomp.numjet import JetPoint, layout, numeric_vt_lagrangian


def flat(n=4):
    return MetricJet(minkowski(n), np.zeros((n,) * 3), np.zeros((n,) * 4))


def with_metric(ej, mj):
    return EMJet(mj, ej.A, ej.dA, ej.ddA)


# ------------------------------------------------------------- christoffel

def test_christoffel_vanishes_on_minkowski():
    assert np.all(christoffel(flat()) == 0)


def test_christoffel_exponential_time_component():
    # g = diag(e^{2 x0}, -1, -1, -1) at x0 = 0.3
    mj = flat()
    mj.g[0, 0] = np.exp(0.6)
    mj.dg[0, 0, 0] = 2 * mj.g[0, 0]
    G = christoffel(mj)
    assert G[0, 0, 0] == pytest.approx(1.0, abs=1e-14)
    G[0, 0, 0] = 0
    assert np.all(G == 0)


def test_christoffel_is_symmetric_and_scale_invariant():
    mj = sample_metric_jet(3)
    G = christoffel(mj)
    assert np.allclose(G, np.swapaxes(G, -1, -2), atol=1e-14)
    assert np.allclose(christoffel(mj.scaled(0.37)), G, rtol=1e-12, atol=1e-14)


def test_singular_metric_is_rejected():
    mj = flat(2)
    mj.g[:] = [[1.0, 1.0], [1.0, 1.0]]
    with pytest.raises(SingularMetric):
        christoffel(mj)


# --------------------------------------------------------------- curvature

def test_curvature_vanishes_on_minkowski():
    for t in curvature(flat()):
        assert np.all(t == 0)


@pytest.mark.parametrize("radius, theta", [(1.0, 0.7), (1.0, 1.3), (2.0, 0.4)])
def test_round_sphere_scalar_curvature(radius, theta):
    _, ricci, R = curvature(sphere_metric_jet(theta, radius))
    assert R == pytest.approx(2 / radius ** 2, rel=1e-12)
    # a 2-sphere is Einstein: R_jk = (R/2) g_jk
    assert np.allclose(ricci, 0.5 * R * sphere_metric_jet(theta, radius).g, atol=1e-12)


def test_curvature_weights():
    mj = sample_metric_jet(5)
    riemann, ricci, R = curvature(mj)
    r2, c2, R2 = curvature(mj.scaled(0.5))
    assert np.allclose(ricci, ricci.T, atol=1e-10)
    assert R2 == pytest.approx(R / 0.5, rel=1e-12)
    assert np.allclose(c2, ricci, rtol=1e-12, atol=1e-12)
    assert np.allclose(r2, riemann, rtol=1e-12, atol=1e-12)
    assert R == pytest.approx(np.einsum("jk,jk", np.linalg.inv(mj.g), ricci), rel=1e-12)


# ------------------------------------------------------------- densities

def test_ricci_source_density_vanishes_on_minkowski():
    assert np.all(ricci_source_density(flat(), 0.7) == 0)


def test_ricci_source_density_weight_zero_and_contraction():
    for seed in range(10):
        mj = sample_metric_jet(seed)
        eps = ricci_source_density(mj, -0.4)
        assert np.allclose(ricci_source_density(mj.scaled(0.3), -0.4), eps, rtol=1e-11, atol=1e-13)
        _, _, R = curvature(mj)
        want = -0.4 * R * np.sqrt(abs(np.linalg.det(mj.g)))
        assert np.einsum("ij,ij", mj.g, eps) == pytest.approx(want, rel=1e-12, abs=1e-14)


def test_einstein_density_vanishes_on_minkowski_and_in_two_dimensions():
    assert np.all(einstein_density(flat()) == 0)
    worst = max(np.max(np.abs(einstein_density(sample_metric_jet(s, n=2)))) for s in range(20))
    assert worst < 1e-13
    # the sphere has curvature but no Einstein tensor
    assert np.max(np.abs(einstein_density(sphere_metric_jet()))) < 1e-14


def test_completion_identity():
    kappa = 1.3
    for seed in range(10):
        mj = sample_metric_jet(seed)
        tau = completion_density(mj, kappa)
        want = einstein_density(mj, kappa) + ricci_source_density(mj, 1 / (16 * PI * kappa))
        assert np.allclose(tau, want, rtol=1e-12, atol=1e-14)


def test_hilbert_density_is_quadrature_value_of_ricci_source():
    alpha = -1 / (16 * PI)
    eps = ricci_source_fn(4, alpha)
    for seed in range(5):
        mj = sample_metric_jet(seed)
        assert numeric_vt_lagrangian(eps, mj.point) == pytest.approx(hilbert_density(mj), rel=1e-10, abs=1e-12)


# ---------------------------------------------------------------- EM field

def test_constant_potential_has_no_current():
    ej = sample_em_jet(1)
    ej = EMJet(flat(), ej.A, np.zeros((4, 4)))
    assert np.all(em_noether_density(ej) == 0)


def test_em_current_has_weight_one():
    for seed in range(10):
        ej = sample_em_jet(seed)
        T = em_noether_density(ej)
        Tu = em_noether_density(with_metric(ej, ej.metric.scaled(0.25)))
        assert np.allclose(Tu, 0.25 * T, rtol=1e-11, atol=1e-14)


def test_flat_reduction_matches_eta_form():
    for seed in range(20):
        ej = sample_em_jet(seed, flat=True)
        assert np.allclose(em_noether_density(ej), em_flat_noether(ej), rtol=1e-13, atol=1e-15)


def test_symmetrized_tensor():
    z = sample_em_jet(0, flat=True)
    z = EMJet(z.metric, np.zeros(4), np.zeros((4, 4)))
    T, tau = em_symmetrized_tensor(z)
    assert np.all(T == 0) and np.all(tau == 0)
    for seed in range(10):
        ej = sample_em_jet(seed, flat=True)
        T, tau = em_symmetrized_tensor(ej, -1.0)
        Tt = em_flat_noether(ej)
        assert np.max(np.abs(T - T.T)) < 1e-10 * np.max(np.abs(T))
        assert np.max(np.abs(Tt - Tt.T)) > 1e-3
        assert np.allclose(T, Tt + tau, atol=1e-15)
        assert np.allclose(tau, em_symmetrization_term(ej), atol=1e-15)
        assert np.allclose(T, em_hilbert_closed_form(ej), rtol=1e-12, atol=1e-14)


def test_vt_lagrangian_of_current_is_field_lagrangian():
    eps = em_source_fn(4, -1.0)
    for seed in range(5):
        ej = sample_em_jet(seed)
        vt = numeric_vt_lagrangian(eps, ej.point, {"g"})
        assert vt == pytest.approx(em_vt_closed_form(ej), rel=1e-10, abs=1e-12)


def test_hilbert_tensor_by_finite_differences():
    ej = sample_em_jet(7, flat=True, on_shell=True)
    T = em_hilbert_tensor_fd(ej)
    ref = em_hilbert_closed_form(ej)
    assert np.max(np.abs(T - ref)) <= 1e-3 * np.max(np.abs(ref))


def test_covariant_potential_diverges():
    for seed in range(5):
        with pytest.raises(DivergentHomotopy):
            covariant_potential_divergence_demo(sample_em_jet(seed))


def test_covariant_potential_zero_field_is_defined():
    ej = sample_em_jet(2)
    vals = ej.point.values.copy()
    spec = ej.point.spec
    lay = layout(spec, ej.point.order)
    vals[lay.field_mask({"A"})] = 0.0
    ej = EMJet(ej.metric, np.zeros(4), np.zeros((4, 4)), None, JetPoint(spec, ej.point.order, vals))
    assert covariant_potential_divergence_demo(ej) == 0.0


def test_contravariant_potential_is_finite():
    ej = sample_em_jet(4)
    vt = numeric_vt_lagrangian(em_source_fn(4, -1.0), ej.point, {"g"})
    assert np.isfinite(vt)


# ---------------------------------------------------------------- sampling

def test_sampler_without_perturbation_is_minkowski():
    mj = sample_metric_jet(9, delta_scale=0.0, deriv_scale=0.0)
    assert np.array_equal(mj.g, minkowski(4))
    assert np.all(mj.dg == 0) and np.all(mj.ddg == 0)


def test_sampler_bounds_and_determinism():
    for seed in range(30):
        mj = sample_metric_jet(seed)
        assert abs(np.linalg.det(mj.g)) > 1e-6
        assert np.max(np.abs(mj.g - minkowski(4))) <= 0.2
        assert np.max(np.abs(mj.dg)) <= 0.5
        again = sample_metric_jet(seed)
        assert np.array_equal(mj.point.values, again.point.values)
    with pytest.raises(ValueError):
        sample_metric_jet(0, n=1)


def test_metric_jet_point_round_trip():
    mj = sphere_metric_jet()
    pt = metric_jet_point(mj)
    assert hilbert_density_fn(2)(pt) == pytest.approx(hilbert_density(mj), rel=1e-12)
