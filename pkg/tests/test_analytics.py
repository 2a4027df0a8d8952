import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fdnoma import analytics as an
from fdnoma.channel import SeriesControl, rician_ccdf
from fdnoma.system_model import Duplex, NetworkConfig, SnrPoint

REF = NetworkConfig()
IDEAL = replace(REF, kappa_sr=0.0, kappa_li=0.0, kappa_rdf=0.0, kappa_rdn=0.0, epsilon=0.0)
IDEAL_HD_RAYLEIGH = replace(IDEAL, duplex=Duplex.HD, k_factor=0.0)
SNR10 = SnrPoint(10.0, 10.0)


def cfg_for(mode, k, **kw):
    return replace(REF, duplex=mode, k_factor=k, **kw)


# --------------------------------------------------------------- coefficients

def test_threshold_coefficients_ideal():
    c = an.threshold_coefficients(IDEAL_HD_RAYLEIGH, SNR10)
    assert c.xi1 == pytest.approx(0.25)
    assert c.xi2 == pytest.approx(1.0)
    assert c.xi == pytest.approx(1.0)
    assert c.psi == pytest.approx(0.25)
    assert c.phi1 == pytest.approx(0.25)
    assert c.phi2 == pytest.approx(1.0)
    assert c.phi == pytest.approx(1.0)
    assert c.chi == 0.0
    assert not c.infeasible


def test_threshold_coefficients_infeasible():
    c = an.threshold_coefficients(replace(IDEAL, gamma_thf=3.0), SNR10)
    assert math.isinf(c.xi1) and "xi1" in c.infeasible
    assert math.isinf(c.xi)
    assert not c.feasible("psi")  # b1 - b2 * 3 < 0 as well


def test_chi_is_zero_in_half_duplex():
    c = an.threshold_coefficients(replace(REF, duplex=Duplex.HD), SnrPoint(1e4, 1e4))
    assert c.chi == 0.0
    c_fd = an.threshold_coefficients(REF, SnrPoint(10.0, 20.0))
    assert c_fd.chi == pytest.approx(20 * (1 + 0.05 ** 2) * c_fd.xi)


# ---------------------------------------------------------------- outage

def test_rayleigh_hd_spot_values():
    far_exact = 1 - math.exp(-1 / 8 - 0.25 / 8)
    near_exact = 1 - math.exp(-1 / 8 - 1)
    assert far_exact == pytest.approx(0.1447, abs=5e-5)
    assert near_exact == pytest.approx(0.6753, abs=5e-5)
    for fn in (an.op_far_series, an.op_far_quadrature):
        assert fn(IDEAL_HD_RAYLEIGH, SNR10).value == pytest.approx(far_exact, abs=1e-12)
    for fn in (an.op_near_series, an.op_near_quadrature):
        assert fn(IDEAL_HD_RAYLEIGH, SNR10).value == pytest.approx(near_exact, abs=1e-12)


@pytest.mark.parametrize("fn", [an.op_far_series, an.op_far_quadrature, an.op_far_asymptotic,
                                an.op_near_series, an.op_near_quadrature, an.op_near_asymptotic])
def test_infeasible_threshold_gives_certain_outage(fn):
    r = fn(replace(IDEAL, gamma_thf=3.0), SNR10)
    assert r.value == 1.0 and r.converged


@pytest.mark.parametrize("fn", [an.op_near_series, an.op_near_quadrature, an.op_near_asymptotic])
def test_strong_residual_interference_blocks_near_user(fn):
    # b2 < epsilon * b1 * gamma_thn makes phi2 infeasible
    cfg = replace(REF, epsilon=0.2)
    assert math.isinf(an.threshold_coefficients(cfg, SNR10).phi2)
    assert fn(cfg, SNR10).value == 1.0


def test_quadrature_half_duplex_collapses_to_survival_function():
    cfg = cfg_for(Duplex.HD, 1.0)
    snr = SnrPoint.from_db(15.0)
    c = an.threshold_coefficients(cfg, snr)
    relay, err = an.relay_success_quadrature(cfg, c.xi, c.chi)
    assert relay == rician_ccdf(c.xi, cfg.link("sr"))
    assert err == 0.0


def test_quadrature_rayleigh_full_duplex_closed_form():
    cfg = replace(IDEAL, duplex=Duplex.FD, k_factor=0.0)
    for db in (0.0, 10.0, 30.0):
        snr = SnrPoint.from_db(db)
        c = an.threshold_coefficients(cfg, snr)
        relay = cfg.lambda_sr / (cfg.lambda_sr + cfg.lambda_li * c.chi) * math.exp(-c.xi / cfg.lambda_sr)
        far = 1 - math.exp(-c.psi / cfg.lambda_rdf) * relay
        near = 1 - math.exp(-c.phi / cfg.lambda_rdn) * relay
        assert an.op_far_quadrature(cfg, snr).value == pytest.approx(far, abs=1e-8)
        assert an.op_near_quadrature(cfg, snr).value == pytest.approx(near, abs=1e-8)


def test_series_matches_quadrature_nonideal_fd():
    cfg = cfg_for(Duplex.FD, 1.0)
    snr = SnrPoint.from_db(20.0)
    assert abs(an.op_far_series(cfg, snr).value - an.op_far_quadrature(cfg, snr).value) < 1e-4
    assert abs(an.op_near_series(cfg, snr).value - an.op_near_quadrature(cfg, snr).value) < 1e-4


GRID_DB = list(np.linspace(0, 55, 12))


@pytest.mark.parametrize("mode", [Duplex.HD, Duplex.FD])
@pytest.mark.parametrize("k", [0.0, 1.0])
def test_series_quadrature_grid(mode, k):
    s = an.DEFAULT_SERIES
    tol = max(1e-4, 10 * s.rel_tol)
    cfg = cfg_for(mode, k)
    for db in GRID_DB:
        snr = SnrPoint.from_db(db)
        far_s, far_q = an.op_far_series(cfg, snr), an.op_far_quadrature(cfg, snr)
        near_s, near_q = an.op_near_series(cfg, snr), an.op_near_quadrature(cfg, snr)
        assert far_s.converged and far_q.converged and near_s.converged and near_q.converged
        assert abs(far_s.value - far_q.value) < tol
        assert abs(near_s.value - near_q.value) < tol


def test_near_variants_other_than_default_disagree_with_quadrature():
    cfg = cfg_for(Duplex.FD, 1.0)
    snr = SnrPoint.from_db(20.0)
    q = an.op_near_quadrature(cfg, snr).value
    assert abs(an.op_near_series(cfg, snr, variant="xi-3k").value - q) < 1e-10
    for v in ("chi-3k", "xi-1k", "chi-1k"):
        assert abs(an.op_near_series(cfg, snr, variant=v).value - q) > 0.1


def test_near_variants_coincide_in_rayleigh_except_exponent_argument():
    # with K = 0 the multiple of K is irrelevant
    cfg = cfg_for(Duplex.FD, 0.0)
    snr = SnrPoint.from_db(20.0)
    assert an.op_near_series(cfg, snr, variant="xi-1k").value == pytest.approx(
        an.op_near_series(cfg, snr, variant="xi-3k").value, abs=1e-15)


@pytest.mark.parametrize("k", [0.0, 1.0, 4.0])
def test_half_duplex_outage_strictly_decreasing(k):
    cfg = cfg_for(Duplex.HD, k)
    for fn in (an.op_far_series, an.op_near_series):
        vals = [fn(cfg, SnrPoint.from_db(db)).value for db in range(0, 55, 5)]
        assert all(a > b for a, b in zip(vals, vals[1:]))


@pytest.mark.parametrize("k", [0.0, 1.0])
def test_full_duplex_outage_nonincreasing_above_floor(k):
    cfg = cfg_for(Duplex.FD, k)
    far = [an.op_far_series(cfg, SnrPoint.from_db(db)).value for db in range(0, 65, 5)]
    near = [an.op_near_series(cfg, SnrPoint.from_db(db)).value for db in range(0, 65, 5)]
    for vals in (far, near):
        assert all(a >= b - 1e-12 for a, b in zip(vals, vals[1:]))
    assert far[-1] > 0.3 and near[-1] > 0.3


def test_series_self_check_under_refinement():
    s = SeriesControl(rel_tol=1e-10)
    cfg = cfg_for(Duplex.FD, 5.0)
    for db in (0.0, 20.0):
        snr = SnrPoint.from_db(db)
        a = an.op_far_series(cfg, snr, s).value
        b = an.op_far_series(cfg, snr, s.refined()).value
        assert abs(a - b) <= 10 * s.rel_tol * b


def test_series_reports_truncation_failure():
    r = an.op_far_series(cfg_for(Duplex.FD, 10.0), SnrPoint.from_db(10.0), SeriesControl(max_terms=8))
    assert not r.converged
    assert 0.0 <= r.value <= 1.0


def test_fault_hook_perturbs_series_only():
    cfg = cfg_for(Duplex.FD, 1.0)
    snr = SnrPoint.from_db(20.0)
    bad = SeriesControl(term_fault=0.5)
    assert abs(an.op_far_series(cfg, snr, bad).value - an.op_far_quadrature(cfg, snr).value) > 1e-3
    assert an.op_far_quadrature(cfg, snr, bad).value == an.op_far_quadrature(cfg, snr).value


@settings(max_examples=25, deadline=None)
@given(k=st.floats(0, 6), kappa=st.floats(0, 0.2), eps=st.floats(0, 0.1),
       db=st.floats(-5, 50), lam_li=st.floats(0.05, 3), fd=st.booleans(),
       thf=st.floats(0.2, 1.2), thn=st.floats(0.2, 3.0))
def test_series_matches_quadrature_random(k, kappa, eps, db, lam_li, fd, thf, thn):
    cfg = replace(REF, k_factor=k, kappa_sr=kappa, kappa_rdf=kappa, kappa_rdn=kappa,
                  epsilon=eps, lambda_li=lam_li, duplex=Duplex.FD if fd else Duplex.HD,
                  gamma_thf=thf, gamma_thn=thn)
    snr = SnrPoint.from_db(db)
    c = an.threshold_coefficients(cfg, snr)
    for series, quad, thr in ((an.op_far_series, an.op_far_quadrature, c.psi),
                              (an.op_near_series, an.op_near_quadrature, c.phi)):
        s, q = series(cfg, snr), quad(cfg, snr)
        assert 0.0 <= s.value <= 1.0
        assert abs(s.value - q.value) < 1e-6
        assert (s.value == 1.0) == (math.isinf(c.xi) or math.isinf(thr)) or s.value > 1 - 1e-12


# ------------------------------------------------------------- asymptotics

def test_asymptotic_rayleigh_hd_is_first_order_taylor():
    cfg = IDEAL_HD_RAYLEIGH
    prev = None
    for g in (1e2, 1e3, 1e4):
        snr = SnrPoint(g, g)
        c = an.threshold_coefficients(cfg, snr)
        taylor = 1 - (1 - c.psi / cfg.lambda_rdf) * (1 - c.xi / cfg.lambda_sr)
        asym = an.op_far_asymptotic(cfg, snr).value
        exact = an.op_far_quadrature(cfg, snr).value
        assert asym == pytest.approx(taylor, rel=1e-12)
        scaled = abs(asym - exact) * g
        if prev is not None:
            assert scaled < prev / 5  # gap is o(1/gamma)
        prev = scaled


def test_asymptotic_tracks_exact_in_half_duplex_at_high_snr():
    for k in (0.0, 1.0):
        cfg = cfg_for(Duplex.HD, k)
        snr = SnrPoint.from_db(60.0)
        assert abs(an.op_near_asymptotic(cfg, snr).value - an.op_near_quadrature(cfg, snr).value) < 1e-6


def test_asymptotic_far_full_duplex_value():
    # direct evaluation of the first-order formula for the reference FD link
    cfg = cfg_for(Duplex.FD, 0.0)
    snr = SnrPoint.from_db(60.0)
    c = an.threshold_coefficients(cfg, snr)
    relay = (0.5 * c.chi + c.xi) / 8
    want = 1 - (1 - c.psi / 8) * (1 - relay)
    assert an.op_far_asymptotic(cfg, snr).value == pytest.approx(want, rel=1e-12)


def test_asymptotic_psi_infeasible():
    cfg = replace(REF, b1=0.55, b2=0.45, gamma_thf=1.5)
    assert an.op_far_asymptotic(cfg, SNR10).value == 1.0


# ----------------------------------------------------------------- diversity

def test_diversity_synthetic_slopes():
    snrs = [10.0 ** (d / 10) for d in (30, 40, 50)]
    assert an.diversity_order_estimate([(x, 0.3 / x) for x in snrs]) == pytest.approx(1.0, abs=1e-9)
    assert an.diversity_order_estimate([(x, 0.3 / x ** 2) for x in snrs]) == pytest.approx(2.0, abs=1e-9)


def test_diversity_errors():
    with pytest.raises(ValueError):
        an.diversity_order_estimate([(10.0, 0.1)])
    with pytest.raises(ValueError):
        an.diversity_order_estimate([(10.0, 0.1), (100.0, 0.0)])
    with pytest.raises(ValueError):
        an.diversity_order_estimate([(10.0, 0.1), (10.0, 0.05)])


def test_diversity_full_duplex_is_zero():
    cfg = cfg_for(Duplex.FD, 1.0)
    pts = [(s.gamma, an.op_far_quadrature(cfg, s).value)
           for s in (SnrPoint.from_db(50.0), SnrPoint.from_db(60.0))]
    assert abs(an.diversity_order_estimate(pts)) < 0.05


# -------------------------------------------------------------- ergodic rates

@pytest.mark.parametrize("k", [0.0, 0.5, 1.0, 5.0, 10.0])
@pytest.mark.parametrize("lam", [0.5, 1.0, 8.0])
def test_mean_gain_series_identity(k, lam):
    assert an.mean_gain_series(k, lam) == pytest.approx(lam, rel=1e-9)


def test_mean_gain_series_rayleigh_single_term():
    assert an.mean_gain_series(0.0, 8.0) == 8.0


def test_er_far_high_snr_examples():
    hd = replace(IDEAL, duplex=Duplex.HD)
    assert an.er_far_high_snr(hd, hd_prelog_half=False) == pytest.approx(math.log2(10 / 3), abs=1e-12)
    assert an.er_far_high_snr(hd) == pytest.approx(0.5 * math.log2(10 / 3), abs=1e-12)
    fd = replace(IDEAL, duplex=Duplex.FD)
    want = math.log2(1 + min(7 / 3, 5.6 / 2.9))
    assert want == pytest.approx(1.5515, abs=1e-4)
    assert an.er_far_high_snr(fd) == pytest.approx(want, abs=1e-12)
    assert an.er_far_high_snr(replace(fd, kappa_rdf=1e6)) < 1e-11


def test_er_near_high_snr_examples():
    hd = replace(IDEAL, duplex=Duplex.HD, epsilon=0.01)
    assert 0.3 / 0.007 == pytest.approx(42.857, abs=1e-3)
    want = 0.5 * math.log2(1 + 0.3 / 0.007)  # 2.7274
    assert an.er_near_high_snr(hd, hd_prelog_half=False) == pytest.approx(want, abs=1e-12)
    fd = replace(IDEAL, duplex=Duplex.FD, epsilon=0.01)
    assert 2.4 / 0.556 == pytest.approx(4.3165, abs=1e-4)
    want = 0.5 * math.log2(1 + 2.4 / 0.556)  # 1.2053
    assert an.er_near_high_snr(fd) == pytest.approx(want, abs=1e-12)


def test_er_near_high_snr_one_divergent_argument():
    # epsilon = kappa_rdn = 0 but loop interference keeps the relay term finite
    fd = replace(IDEAL, duplex=Duplex.FD)
    want = 0.5 * math.log2(1 + 2.4 / 0.5)
    assert an.er_near_high_snr(fd) == pytest.approx(want, abs=1e-12)


def test_er_near_high_snr_degenerate_flagged():
    hd = replace(IDEAL, duplex=Duplex.HD)
    with pytest.warns(an.DegenerateRateWarning):
        assert math.isinf(an.er_near_high_snr(hd))


def test_esr_is_sum_and_monotone_in_epsilon():
    fd = replace(IDEAL, duplex=Duplex.FD, epsilon=0.01)
    assert an.esr_high_snr(fd) == pytest.approx(
        math.log2(1 + 5.6 / 2.9) + 0.5 * math.log2(1 + 2.4 / 0.556), abs=1e-12)
    esr = [an.esr_high_snr(replace(REF, epsilon=e)) for e in (0.0, 0.01, 0.05, 0.1)]
    assert all(a >= b for a, b in zip(esr, esr[1:]))


def test_esr_zero_when_no_rate():
    # relay-destination distortion swamps both users
    cfg = replace(REF, kappa_rdf=1e6, kappa_rdn=1e6, kappa_sr=1e6)
    assert an.esr_high_snr(cfg) == pytest.approx(0.0, abs=1e-10)


def test_asymptotic_saturates_at_low_snr():
    cfg = cfg_for(Duplex.FD, 1.0, epsilon=0.02)
    for fn in (an.op_far_asymptotic, an.op_near_asymptotic):
        assert fn(cfg, SnrPoint.from_db(0.0)).value == 1.0
