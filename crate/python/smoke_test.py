"""Smoke test for the spacemimo Python extension.

Build and install first:  pip install --no-build-isolation -e crates/py
Then run:                 python3 python/smoke_test.py
"""

import math
import tempfile
from pathlib import Path

import numpy as np
from scipy.special import j1

import spacemimo as sm

CONFIG = """\
wavelength_m = 0.01
range_m = 4e8
tx_aperture_m2 = 10
rx_aperture_m2 = 10
power_w = 1
bandwidth_hz = 1e6
noise_psd_w_per_hz = 1e-20
streams = 4
area_over_lambda_d = 3
trials = 100
seed = 1
"""


def check_link_budget():
    b = sm.LinkBudget(0.01, 4e8, 10.0, 10.0, 1.0, 1e6, 1e-20)
    assert math.isclose(b.g, 100.0 / (0.01 * 4e8) ** 2, rel_tol=1e-12)
    assert math.isclose(b.gamma, 1e14, rel_tol=1e-12)
    assert math.isclose(b.siso_spectral_efficiency(), math.log2(1 + b.gamma_g), rel_tol=1e-12)
    try:
        sm.LinkBudget(0.01, 1.0, 10.0, 10.0, 1.0, 1e6, 1e-20)
    except ValueError:
        pass
    else:
        raise AssertionError("near-field budget accepted")


def check_reduced_channel():
    rng = np.random.default_rng(3)
    lam, d, radius, m = 0.01, 4e8, 2000.0, 6

    def disc(n):
        pts = []
        while len(pts) < n:
            p = rng.uniform(-radius, radius, 2)
            if p @ p <= radius**2:
                pts.append(p)
        return np.array(pts)

    tx, rx = disc(m), disc(m)
    h = np.exp(2j * np.pi * (rx @ tx.T) / (lam * d))
    expected = np.sort(np.linalg.svd(h, compute_uv=False) ** 2)[::-1]
    got = np.array(sm.reduced_channel_spectrum(tx.tolist(), rx.tolist(), radius, lam, d))
    assert np.allclose(got, expected, rtol=1e-10, atol=1e-10)
    assert math.isclose(got.sum(), m * m, rel_tol=1e-9)
    gamma, g = 1e4, 1e-3
    xi = sm.uniform_spectral_efficiency(got.tolist(), gamma, g, m)
    assert math.isclose(xi, np.log2(1 + gamma * g / m**3 * got).sum(), rel_tol=1e-12)
    assert sm.waterfilling_spectral_efficiency(got.tolist(), gamma, g, m) >= xi - 1e-12


def check_design_and_bounds():
    t_star = sm.stationary_constant()
    assert abs(math.log1p(t_star) - 2 * t_star / (1 + t_star)) < 1e-12
    m_opt, x_opt, _ = sm.optimal_stream_count(100 * t_star, 1.0)
    assert m_opt == 10 and abs(x_opt - 10) < 1e-9
    ub, lb = sm.spectral_efficiency_bounds(8.0, 1.0, 2, 10.0, 1.0)
    assert lb <= ub
    assert abs(lb - 0.32122) < 5e-6


def check_moments():
    c = 10.0
    f, err = sm.f_of_c(c)
    # the lens-area reduction evaluated independently with scipy
    rho = np.linspace(0.0, 2.0, 200001)[1:]
    lens = 2 * np.arccos(rho / 2) - rho / 2 * np.sqrt(4 - rho**2)
    integrand = (2 * j1(c * rho) / (c * rho)) ** 2 * lens * 2 * np.pi * rho / np.pi**2
    ref = np.trapezoid(integrand, rho) if hasattr(np, "trapezoid") else np.trapz(integrand, rho)
    assert abs(f - ref) < 1e-6, (f, ref)
    assert f <= sm.f_upper_bound(c)
    assert sm.fourth_moment(2, 0.0) == 6.0


def check_prolate():
    lam, d = 0.01, 4e8
    radius = math.sqrt(3.0 * lam * d / math.pi)
    nu2 = sm.prolate_spectrum(radius, lam, d)
    assert math.isclose(sum(nu2), 9.0, rel_tol=5e-3)
    assert all(a >= b for a, b in zip(nu2, nu2[1:]))


def check_scenario_and_cli():
    s = sm.Scenario.parse(CONFIG)
    assert s.streams == 4 and math.isclose(s.s_over_ld, 3.0, rel_tol=1e-12)
    mean, se = s.ergodic_uniform_xi(100, 1)
    ub, lb = s.bounds()
    assert mean <= ub and mean >= lb - 3 * se
    assert s.ergodic_uniform_xi(100, 1) == (mean, se)
    with tempfile.TemporaryDirectory() as tmp:
        cfg = Path(tmp) / "scenario.cfg"
        cfg.write_text(CONFIG)
        files = sm.run("siso", str(cfg), str(Path(tmp) / "out"))
        text = Path(files[0]).read_text()
        assert text.startswith("# schema=siso/1\n")


if __name__ == "__main__":
    for check in [
        check_link_budget,
        check_reduced_channel,
        check_design_and_bounds,
        check_moments,
        check_prolate,
        check_scenario_and_cli,
    ]:
        check()
        print(f"ok  {check.__name__}")
    print("python smoke test passed")
