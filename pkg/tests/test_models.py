import math

import numpy as np
import pytest

from fibernls.models import (Coefficient, CoefficientFamily, DimensionlessParams, FiberParams,
                             InsufficientGrid, InvalidParams, QuadratureFailure,
                             SingularCoefficient, coefficient_from_config, family_from_config,
                             fd_derivative, fiber_family, gauge_remove_loss, normalize,
                             painleve_residual, v2_from_fg)

Z = np.linspace(0.0, 2.0, 256)


@pytest.mark.parametrize("beta2, c1", [(-1.0, 1), (-0.3, 1), (0.5, -1), (2.0, -1)])
def test_normalize_sign_regime(beta2, c1):
    norm = normalize(FiberParams(alpha=0.1, beta2=beta2, gamma=1.3, T0=1.0, P0=1.0))
    assert norm.params.c1 == c1
    assert norm.params.rho == c1


def test_normalize_round_trips_dimensional_values():
    fp = FiberParams(alpha=0.046, beta2=-20.0, gamma=1.3, T0=0.8, P0=2.0)
    norm = normalize(fp)
    L = 2 * fp.T0**2 / abs(fp.beta2)
    assert norm.length_scale == pytest.approx(L)
    assert norm.params.c2 == pytest.approx(fp.alpha * L)
    d = norm.dimensional()
    assert d["alpha"] == pytest.approx(fp.alpha)
    assert d["beta2"] == pytest.approx(fp.beta2)
    assert d["gamma_P0"] == pytest.approx(fp.gamma * fp.P0)
    psi = np.array([0.3 + 0.1j, -0.2j])
    np.testing.assert_allclose(norm.to_physical(norm.to_dimensionless(psi)), psi)


def test_normalize_regime_is_reported_not_enforced():
    norm = normalize(FiberParams(alpha=0.1, beta2=-1.0, gamma=100.0, T0=1.0, P0=1.0))
    assert not norm.regime_ok
    assert norm.regime_ratio == pytest.approx(100.0)


@pytest.mark.parametrize("kw", [dict(alpha=-0.1), dict(beta2=0.0), dict(gamma=0.0),
                                dict(T0=-1.0), dict(P0=math.nan)])
def test_fiber_params_validation(kw):
    base = dict(alpha=0.1, beta2=-1.0, gamma=1.0, T0=1.0, P0=1.0)
    base.update(kw)
    with pytest.raises(InvalidParams):
        FiberParams(**base)


def test_dimensionless_params_validation():
    with pytest.raises(InvalidParams):
        DimensionlessParams(c1=0)
    with pytest.raises(InvalidParams):
        DimensionlessParams(c2=0.0)
    assert DimensionlessParams(c1=-1).rho == -1


def test_v2_fiber_family_unit_case():
    fam = fiber_family(1.0, 1.0, 1.0)
    assert np.max(np.abs(v2_from_fg(fam, Z) - 0.5)) < 1e-8


def test_v2_finite_differences_match():
    fam = fiber_family(0.5, -2.0, 2.0)
    v2 = v2_from_fg(fam, Z, closed_form=False)
    assert np.max(np.abs(v2 / (0.25 / -4.0) - 1)) < 1e-4


def test_residual_vanishes_for_integrable_family():
    fam = fiber_family(0.2, -1.0, 1.0)
    assert np.max(np.abs(painleve_residual(fam, Z))) < 1e-8


def test_residual_is_linear_in_v2():
    fam = fiber_family(0.5, 2.0, 1.0)
    bumped = CoefficientFamily(fam.f, fam.g, v2=Coefficient.const(0.5**2 / 4.0 + 0.1))
    res = painleve_residual(bumped, Z)
    expected = 0.1 * 4 * fam.f(Z) ** 3 * fam.g(Z) ** 2
    np.testing.assert_allclose(res, expected, rtol=1e-10)


@pytest.mark.parametrize("lam", [0.5, 2.0])
def test_v2_scales_inversely_with_f(lam):
    fam = fiber_family(0.7, -1.0, 1.5)
    scaled = CoefficientFamily(Coefficient.const(lam * fam.f(0.0)), fam.g)
    np.testing.assert_allclose(v2_from_fg(scaled, Z), v2_from_fg(fam, Z) / lam, rtol=1e-12)


def test_v2_general_coefficients():
    # f = 1 + z^2 against a sampled spline of the same function
    f = Coefficient(lambda z: 1 + z**2, (lambda z: 2 * z, lambda z: 2 + 0 * z))
    g = Coefficient.exp(-1.0, -0.3)
    exact = v2_from_fg(CoefficientFamily(f, g), Z)
    fd = v2_from_fg(CoefficientFamily(Coefficient(f.func), g), Z, closed_form=False)
    assert np.max(np.abs(fd - exact)) < 1e-6


def test_v2_errors():
    with pytest.raises(SingularCoefficient):
        v2_from_fg(CoefficientFamily(Coefficient.const(0.0), Coefficient.const(1.0)), Z)
    with pytest.raises(InsufficientGrid):
        v2_from_fg(fiber_family(0.2, 1.0, 1.0), Z[:3], closed_form=False)
    with pytest.raises(ValueError):
        v2_from_fg(CoefficientFamily(Coefficient.const(1.0), Coefficient.const(1.0),
                                     h=Coefficient.const(0.1)), Z)


def test_fd_derivative_order():
    errs = []
    for n in (32, 64):
        z = np.linspace(0, 1, n)
        errs.append(np.max(np.abs(fd_derivative(np.sin(3 * z), z, 2) + 9 * np.sin(3 * z))))
    assert errs[0] / errs[1] > 12


def test_gauge_remove_loss():
    assert gauge_remove_loss(np.sin, math.pi) == pytest.approx(math.exp(-2.0), abs=1e-10)
    h = Coefficient.exp(0.4, -1.0)
    assert gauge_remove_loss(h, 2.0) == pytest.approx(math.exp(-0.4 * (1 - math.exp(-2.0))),
                                                      rel=1e-14)


def test_gauge_remove_loss_reports_failed_quadrature():
    with pytest.raises(QuadratureFailure):
        gauge_remove_loss(lambda s: 1.0 / abs(s - 0.5) ** 1.2, 1.0)


def test_coefficient_config(tmp_path):
    (tmp_path / "g.csv").write_text("z,value\n" + "\n".join(
        f"{float(z)!r},{-math.exp(-0.2 * z)!r}" for z in np.linspace(0, 1, 101)) + "\n")
    fam = family_from_config({"f": {"kind": "const", "value": -0.5},
                              "g": {"kind": "samples", "path": "g.csv"}}, tmp_path)
    assert fam.g(0.5) == pytest.approx(-math.exp(-0.1), rel=1e-8)
    with pytest.raises(ValueError):
        coefficient_from_config({"kind": "exp", "scale": 1.0})
    with pytest.raises(ValueError):
        coefficient_from_config({"kind": "poly"})
