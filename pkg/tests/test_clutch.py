from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from spadesign.clutch import (
    EPS0,
    ClutchSpec,
    DutyCalibration,
    SheathSpec,
    clutch_friction_force,
    combined_holding_force,
    ea_normal_force_airgap,
    ea_normal_force_ideal,
    initial_ke,
    oscillation_threshold,
    reference_drop_setup,
    sheath_energy,
    sheath_force,
    stage_drop,
    zeta_from_duty,
    zeta_sweep,
)
from spadesign.errors import DomainError, ValidationError
from spadesign.material import GentMaterial, uniaxial_stress

ECOFLEX = GentMaterial.from_kpa(31.7, 39.6)
SPEC = ClutchSpec(mu_f=0.4, eps_r=3.0, area=4e-3, gap_d=50e-6, voltage=300.0)

specs = st.builds(
    ClutchSpec,
    mu_f=st.floats(0.0, 2.0),
    eps_r=st.floats(1.0, 50.0),
    area=st.floats(1e-5, 1e-1),
    gap_d=st.floats(1e-6, 1e-3),
    voltage=st.one_of(st.just(0.0), st.floats(1e-3, 5e3)),
)


def test_zero_voltage_zero_force():
    s = replace(SPEC, voltage=0.0)
    assert ea_normal_force_ideal(s) == 0.0 == ea_normal_force_airgap(s)


def test_voltage_scaling_is_quadratic():
    a = ea_normal_force_ideal(SPEC)
    b = ea_normal_force_ideal(replace(SPEC, voltage=2 * SPEC.voltage))
    assert b == pytest.approx(4 * a, rel=1e-15)


def test_models_coincide_at_unit_permittivity():
    s = replace(SPEC, eps_r=1.0)
    assert ea_normal_force_ideal(s) == pytest.approx(ea_normal_force_airgap(s), rel=1e-15)


@pytest.mark.parametrize("eps_r", [1.0, 2.5, 3.0, 10.0])
def test_airgap_over_ideal_is_permittivity(eps_r):
    s = replace(SPEC, eps_r=eps_r)
    assert ea_normal_force_airgap(s) / ea_normal_force_ideal(s) == pytest.approx(eps_r, rel=1e-14)


@settings(max_examples=100, deadline=None)
@given(specs)
def test_airgap_ideal_identity(s):
    ideal = ea_normal_force_ideal(s)
    if ideal == 0.0:
        assert ea_normal_force_airgap(s) == 0.0
    else:
        assert ea_normal_force_airgap(s) / ideal == pytest.approx(s.eps_r, rel=1e-12)


def test_friction_force():
    assert clutch_friction_force(replace(SPEC, mu_f=0.0)) == 0.0
    assert clutch_friction_force(SPEC, "airgap") == SPEC.mu_f * ea_normal_force_airgap(SPEC)
    assert clutch_friction_force(SPEC, "ideal") == SPEC.mu_f * ea_normal_force_ideal(SPEC)
    with pytest.raises(ValidationError):
        clutch_friction_force(SPEC, "bogus")


def test_friction_calibration_target():
    # Choose the area that makes the air-gap model carry 22 N at 300 V.
    unit = clutch_friction_force(replace(SPEC, area=1.0))
    s = replace(SPEC, area=22.0 / unit)
    assert clutch_friction_force(s) == pytest.approx(22.0, rel=1e-12)
    assert 0.5 * EPS0 * s.mu_f * s.area * (s.eps_r * s.voltage / s.gap_d) ** 2 == pytest.approx(22.0)


def test_spec_validation():
    with pytest.raises(ValidationError):
        replace(SPEC, eps_r=0.5)
    with pytest.raises(ValidationError):
        replace(SPEC, gap_d=0.0)


# sheath


def test_sheath_force_basics():
    sh = SheathSpec(ECOFLEX, 2 * 3e-3 * 30e-3, 60e-3)
    assert sheath_force(0.0, sh) == 0.0
    double = replace(sh, cross_section=2 * sh.cross_section)
    assert sheath_force(5e-3, double) == pytest.approx(2 * sheath_force(5e-3, sh), rel=1e-15)
    assert sheath_force(5e-3, sh) == uniaxial_stress(1 + 5e-3 / 60e-3, ECOFLEX) * sh.cross_section


def test_sheath_force_reported_scale():
    # two 3 mm x 30 mm strips stretched 10 mm
    sh = SheathSpec(ECOFLEX, 2 * 3e-3 * 30e-3, 60e-3)
    assert sheath_force(10e-3, sh) == pytest.approx(3.0, rel=0.3)


def test_sheath_lockup():
    sh = SheathSpec(ECOFLEX, 1e-4, 60e-3)
    with pytest.raises(DomainError):
        sheath_force(sh.max_extension(1.0) * 1.01, sh)


def test_sheath_energy_is_force_integral():
    sh = SheathSpec(ECOFLEX, 1e-4, 60e-3)
    e = 20e-3
    h = 1e-6
    dE = (sheath_energy(0.0, e + h, sh) - sheath_energy(0.0, e - h, sh)) / (2 * h)
    assert dE == pytest.approx(sheath_force(e, sh), rel=1e-7)


# combined force and duty


def test_combined_force_examples():
    assert combined_holding_force(3.0, 22.0, 0.0) == 3.0
    assert combined_holding_force(3.0, 22.0, 1.0) == 25.0
    assert combined_holding_force(3.0, 22.0, 0.5) == 14.0
    with pytest.raises(ValidationError):
        combined_holding_force(3.0, 22.0, 1.1)


@given(st.floats(0, 1), st.floats(0, 50), st.floats(0, 50))
def test_combined_force_affine(z, fs, fc):
    f = lambda q: combined_holding_force(fs, fc, q)
    assert abs(f(z) - f(0) - z * (f(1) - f(0))) <= 1e-12 * max(1.0, fs + fc)


def test_default_calibration_round_trips_knots():
    cal = DutyCalibration.default()
    assert zeta_from_duty(0.0, cal) == 0.0
    assert zeta_from_duty(1.0, cal) == 1.0
    for d, z in zip(cal.duty, cal.zeta):
        assert zeta_from_duty(d, cal) == z


@given(st.floats(0, 1), st.floats(0, 1))
def test_duty_is_monotone(a, b):
    cal = DutyCalibration.default()
    lo, hi = sorted((a, b))
    assert zeta_from_duty(lo, cal) <= zeta_from_duty(hi, cal)


def test_calibration_pins_terminals_and_validates():
    cal = DutyCalibration.from_knots([(0.5, 0.3)])
    assert cal.duty == (0.0, 0.5, 1.0) and cal.zeta == (0.0, 0.3, 1.0)
    with pytest.raises(ValidationError):
        DutyCalibration.from_knots([(0.3, 0.6), (0.6, 0.2)])
    with pytest.raises(ValidationError):
        zeta_from_duty(1.5, cal)


def test_calibration_csv(tmp_path):
    p = tmp_path / "cal.csv"
    p.write_text("# comment\nduty,zeta\n0.25,0.1\n0.75,0.6\n")
    cal = DutyCalibration.from_csv(p)
    assert zeta_from_duty(0.75, cal) == 0.6


# drop stage


def test_no_dropped_mass_no_travel():
    r = stage_drop(replace(reference_drop_setup(), mass=0.0))
    assert r.displacement == 0.0 and r.initial_ke == 0.0


def test_initial_ke_is_inelastic_collision():
    p = reference_drop_setup()
    assert initial_ke(p) == pytest.approx(0.2 * p.g * 0.2 * 0.2 / 0.9, rel=1e-15)


@pytest.mark.parametrize("zeta", [0.0, 0.2, 0.5])
def test_drop_energy_bookkeeping(zeta):
    p = reference_drop_setup(zeta)
    r = stage_drop(p)
    d, e0 = r.displacement, r.pretension_extension
    sh, _ = quad(lambda e: sheath_force(e, p.sheath), e0, e0 + d, epsabs=0, epsrel=1e-13)
    ke = initial_ke(p) + p.total_mass * p.g * d - p.friction * d - sh - zeta * p.clutch_max * d
    assert abs(ke) <= 1e-6 * r.initial_ke
    assert abs(r.energy_residual) <= 1e-6 * r.initial_ke


def test_displacement_nonincreasing_in_zeta():
    d = [r.displacement for _, r in zeta_sweep(reference_drop_setup(), np.linspace(0, 1, 11))]
    assert np.all(np.diff(d) <= 0)


def test_oscillation_threshold_matches_report():
    z = oscillation_threshold(reference_drop_setup())
    assert z == pytest.approx(0.32, abs=0.03)
    assert stage_drop(reference_drop_setup(z - 0.01)).oscillates
    assert not stage_drop(reference_drop_setup(z + 0.01)).oscillates
