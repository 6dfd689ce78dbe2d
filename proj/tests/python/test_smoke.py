import cmath
import math

import pytest

import wvamp


def test_weak_values_match_closed_form():
    for delta in (0.05, 0.3, 0.9):
        for theta in (-1.0, 0.0, 2.0):
            num = wvamp.weak_values(delta, theta)
            ref = wvamp.closed_form_weak_values(delta, theta)
            assert abs(num[0] - ref[0]) < 1e-12 * max(1.0, abs(ref[0]))
            assert abs(num[1] - ref[1]) < 1e-12 * max(1.0, abs(ref[1]))
    jx, jy = wvamp.weak_values(0.1)
    assert abs(jx) == pytest.approx(math.sqrt(0.99 / 2) / 0.1)
    assert cmath.phase(jx) == pytest.approx(math.pi / 2)


def test_undefined_weak_value():
    with pytest.raises(ValueError):
        wvamp.weak_values(0.0)


def test_amplification_curve():
    cfg = wvamp.ExperimentConfig()
    assert cfg.gamma_eff == pytest.approx(1e-3)
    curve = wvamp.amplification_curve(cfg, 1.0)
    assert len(curve["f"]) == 200
    assert curve["f"][0] == pytest.approx(28.14, abs=0.01)
    assert curve["ps_probability"][0] == pytest.approx(0.01)
    coh = wvamp.amplification_curve(cfg, 1.0, "coherent", [0.1])
    assert coh["ps_probability"][0] == pytest.approx(0.010199, abs=5e-7)


def test_verify_and_regime():
    cfg = wvamp.ExperimentConfig()
    r = wvamp.verify(cfg, "thermal", 2.0, 0.2)
    assert r["pass"]
    assert len(r["t"]) == 12
    with pytest.raises(RuntimeError):
        wvamp.verify(cfg, "thermal", 4.0, 0.002)
    assert issubclass(wvamp.RegimeViolation, RuntimeError)


def test_tri_mode_reduction():
    r = wvamp.tri_mode_reduction(wvamp.ExperimentConfig(), 2)
    assert r["pass"]
    assert [b["label"] for b in r["branches"]] == ["carrier", "up", "down"]
    bad = wvamp.tri_mode_reduction(wvamp.ExperimentConfig(gamma_cav=5e5, epsilon=5e3), 2)
    assert not bad["pass"]
    assert not bad["regime_ok"]


def test_displaced_overlap():
    assert wvamp.displaced_overlap(0, 0, 0.1) == pytest.approx(math.exp(-0.005))


def test_run_cli():
    code, out, err = wvamp.run_cli(["weak-values", "--delta", "0.2"])
    assert code == 0
    assert "operator,re,im,modulus,phase,anomalous" in out
    code, _, _ = wvamp.run_cli(["nope"])
    assert code == 1
