"""Acceptance criteria, one test per criterion.

Each test records a PASS/FAIL line that is printed in the terminal summary
under "acceptance criteria", then asserts.
"""
import math

import numpy as np
import pytest
from scipy.integrate import quad

from bandedge import (AnisotropicModel, EmitterDistribution, IsotropicModel, MixtureDistribution,
                      anisotropic_dos, build_crystal, dos, edge_exponent_dos, edge_exponent_ldos, edge_mode,
                      find_bands, fit_exponent, gap_edges, isotropic_dos, ldos, ldos_histogram_oracle,
                      mode_nodes, quarter_wave_stack, se_rate_average, sensitivity_scan)
from bandedge.asymptotics import SENSITIVITY_WINDOW
from bandedge.ldos import NODE_GUARD, near_node

from conftest import CRYSTAL_LAYERS, OMEGA0, record_criterion
from oracles import anisotropic_mc_oracle, gauss_bin_integral, isotropic_shell_oracle, quarter_wave_gap

pytestmark = pytest.mark.acceptance

CRYSTAL = quarter_wave_stack()
EDGES = [e for gap in (1, 2) for e in gap_edges(CRYSTAL, gap)]


def label(edge):
    return f"gap{edge.gap_index}-{edge.side}"


def test_criterion_01_dos_exponent():
    fits = [edge_exponent_dos(CRYSTAL, e) for e in EDGES]
    ok = all(abs(f.eta + 0.5) <= 0.02 and f.r_squared >= 0.999 for f in fits)
    detail = ", ".join(f"{label(e)} eta={f.eta:+.5f} R2={f.r_squared:.6f}" for e, f in zip(EDGES, fits))
    record_criterion(1, "DOS edge exponent -1/2", ok, detail)
    assert ok, detail


def test_criterion_02_ldos_universality():
    rng = np.random.default_rng(0)
    worst = []
    failures = 0
    for e in EDGES:
        nodes = mode_nodes(edge_mode(CRYSTAL, e))
        xs = []
        while len(xs) < 20:
            x = float(rng.uniform(0.0, CRYSTAL.period))
            if not near_node(x, nodes, CRYSTAL.period, NODE_GUARD):
                xs.append(x)
        etas = [edge_exponent_ldos(CRYSTAL, e, x).eta for x in xs]
        bad = [(x, eta) for x, eta in zip(xs, etas) if abs(eta + 0.5) >= 0.05]
        failures += len(bad)
        i = int(np.argmax(np.abs(np.array(etas) + 0.5)))
        worst.append(f"{label(e)} worst x={xs[i]:.5f} eta={etas[i]:+.4f}")
    ok = failures == 0
    detail = f"{failures}/80 positions outside tolerance; " + ", ".join(worst)
    record_criterion(2, "LDOS exponent -1/2 away from nodes", ok, detail)
    assert ok, detail


def test_criterion_03_node_exponent():
    results = []
    for e in gap_edges(CRYSTAL, 1):
        for x in mode_nodes(edge_mode(CRYSTAL, e)):
            results.append((e, x, edge_exponent_ldos(CRYSTAL, e, x).eta))
    ok = bool(results) and all(abs(eta - 0.5) <= 0.05 for _, _, eta in results)
    detail = ", ".join(f"{label(e)} x={x:.6f} eta={eta:+.4f}" for e, x, eta in results)
    record_criterion(3, "LDOS exponent +1/2 at nodes", ok, detail)
    assert ok, detail


def test_criterion_04_sensitivity():
    upper = gap_edges(CRYSTAL, 1)[1]
    node = mode_nodes(edge_mode(CRYSTAL, upper))[0]
    default = sensitivity_scan(CRYSTAL, upper, node)
    extended_ladder = upper.omega_c * np.geomspace(1e-11, SENSITIVITY_WINDOW[1], 41)
    slopes = {}
    for e in gap_edges(CRYSTAL, 1):
        x0 = mode_nodes(edge_mode(CRYSTAL, e))[0]
        ladder = e.omega_c * np.geomspace(1e-11, SENSITIVITY_WINDOW[1], 41)
        slopes[label(e)] = sensitivity_scan(CRYSTAL, e, x0, ladder=ladder).small_delta_slope
    ok = default.max_ratio >= 3 and all(abs(s + 1) <= 0.1 for s in slopes.values())
    detail = (f"max_ratio={default.max_ratio:.3f} (default ladder, upper edge, node x={node:.6f}); "
              f"default-ladder small-delta slope={default.small_delta_slope:+.3f}; extended-ladder slopes "
              + ", ".join(f"{k}={v:+.4f}" for k, v in slopes.items()))
    assert len(extended_ladder) == 41
    record_criterion(4, "node sensitivity to displacement", ok, detail)
    assert ok, detail


def weighted_cell_average(crystal, omega, order=32):
    nodes, weights = np.polynomial.legendre.leggauss(order)
    total = 0.0
    for j, layer in enumerate(crystal.layers):
        a, b = crystal.boundaries[j], crystal.boundaries[j + 1]
        x = 0.5 * (b - a) * nodes + 0.5 * (b + a)
        total += layer.permittivity * 0.5 * (b - a) * np.dot(weights, ldos(crystal, x, omega))
    return total / crystal.period


def test_criterion_05_sum_rule():
    rng = np.random.default_rng(0)
    crystals = [build_crystal(CRYSTAL_LAYERS[k]) for k in sorted(CRYSTAL_LAYERS)]
    worst = 0.0
    for i in range(50):
        c = crystals[i % 3]
        bands = find_bands(c, 10.0)[:-1]
        b = bands[rng.integers(len(bands))]
        w = float(rng.uniform(b.omega_lo, b.omega_hi))
        ref = dos(c, w)
        worst = max(worst, abs(weighted_cell_average(c, w) - ref) / ref)
    ok = worst <= 1e-6
    detail = f"max relative deviation {worst:.2e} over 50 frequencies in 3 crystals"
    record_criterion(5, "LDOS sum rule", ok, detail)
    assert ok, detail


def test_criterion_06_uniform_medium():
    n = 1.5
    c = build_crystal([(n, 1.0)])
    errs = []
    for w in (0.3, 1.7, 4.2):
        errs.append(abs(dos(c, w) - n / math.pi) / (n / math.pi))
        vals = ldos(c, np.linspace(0, 1, 11), w)
        errs.append(float(np.max(np.abs(vals - 1 / (n * math.pi)))) * n * math.pi)
    static = []
    for k in sorted(CRYSTAL_LAYERS):
        ck = build_crystal(CRYSTAL_LAYERS[k])
        expected = math.sqrt(ck.mean_permittivity) / math.pi
        static.append(abs(dos(ck, 1e-4) - expected) / expected)
    ok = max(errs) <= 1e-10 and max(static) <= 1e-4
    detail = f"uniform max rel err {max(errs):.1e}; static-limit max rel err {max(static):.1e}"
    record_criterion(6, "uniform medium and static limit", ok, detail)
    assert ok, detail


def test_criterion_07_models():
    iso = IsotropicModel(omega_c=1.0, k0=1.0)
    aniso = AnisotropicModel(omega_c=1.0, A=1.0)
    d = np.geomspace(1e-6, 1e-4, 16)
    eta_iso = fit_exponent(np.column_stack([d, [isotropic_dos(iso, 1 + x) for x in d]])).eta
    eta_aniso = fit_exponent(np.column_stack([d, [anisotropic_dos(aniso, 1 + x) for x in d]])).eta
    iso_err = max(abs(isotropic_dos(iso, 1 + x) / isotropic_shell_oracle(iso, 1 + x) - 1) for x in (1e-6, 1e-3, 1e-1))
    mc_err = max(abs(anisotropic_dos(aniso, 1 + x) / anisotropic_mc_oracle(aniso, 1 + x) - 1) for x in (1e-6, 1e-3))
    ok = abs(eta_iso + 0.5) <= 0.01 and abs(eta_aniso - 0.5) <= 0.01 and iso_err <= 0.01 and mc_err <= 0.01
    detail = (f"isotropic eta={eta_iso:+.5f} (oracle rel err {iso_err:.1e}), "
              f"anisotropic eta={eta_aniso:+.5f} (Monte Carlo rel err {mc_err:.1e})")
    record_criterion(7, "3D model exponents", ok, detail)
    assert ok, detail


def test_criterion_08_histogram():
    lower, upper = gap_edges(CRYSTAL, 1)
    bins = np.round(np.arange(0.5, 4.0 + 1e-9, 0.01), 10)
    x = 0.41
    worst = {}
    for name, hist, f in [
        ("DOS", ldos_histogram_oracle(CRYSTAL, None, bins, K_samples=10_000), lambda w: dos(CRYSTAL, w)),
        ("LDOS", ldos_histogram_oracle(CRYSTAL, x, bins, K_samples=10_000), lambda w: ldos(CRYSTAL, x, w)),
    ]:
        errs = []
        for i, (a, b) in enumerate(zip(bins[:-1], bins[1:])):
            if b > lower.omega_c - 0.01 and a < upper.omega_c + 0.01:
                continue
            direct = gauss_bin_integral(f, a, b)
            errs.append(abs(hist[i] - direct) / direct)
        worst[name] = (max(errs), len(errs))
    ok = all(v[0] <= 0.02 for v in worst.values())
    detail = ", ".join(f"{k} max rel err {v[0]:.1e} over {v[1]} bins" for k, v in worst.items())
    record_criterion(8, "histogram cross-check", ok, detail)
    assert ok, detail


def test_criterion_09_quarter_wave_edges():
    errs = []
    for order, gap in ((1, 1), (3, 2)):
        lo, hi = quarter_wave_gap(1.0, 2.0, OMEGA0, order)
        lower, upper = gap_edges(CRYSTAL, gap)
        errs += [abs(lower.omega_c - lo), abs(upper.omega_c - hi)]
    ok = max(errs) <= 1e-10
    detail = f"max absolute edge error {max(errs):.1e}"
    record_criterion(9, "quarter-wave closed-form edges", ok, detail)
    assert ok, detail


def test_criterion_10_ensemble_rates():
    w = 1.2
    uniform = EmitterDistribution("uniform")
    avg = se_rate_average(CRYSTAL, uniform, w)
    rho = dos(CRYSTAL, w)
    p1, p2 = EmitterDistribution("gauss", 0.3, 0.05), EmitterDistribution("gauss", 0.75, 0.4)
    a = 0.35
    mix = se_rate_average(CRYSTAL, MixtureDistribution((p1, p2), (a, 1 - a)), w)
    lin = a * se_rate_average(CRYSTAL, p1, w) + (1 - a) * se_rate_average(CRYSTAL, p2, w)
    # the mixed density integrated in one pass is an independent route to the same number
    f = lambda x: (a * p1.pdf(x, 1.0) + (1 - a) * p2.pdf(x, 1.0)) * ldos(CRYSTAL, x, w)
    direct = sum(quad(f, lo, hi, epsabs=0, epsrel=1e-12, limit=200)[0]
                 for lo, hi in [(0, 0.3), (0.3, 2 / 3), (2 / 3, 1.0)])
    ok = abs(avg - rho) > 1e-3 * rho and abs(mix - lin) <= 1e-8 and abs(mix - direct) <= 1e-8
    detail = (f"uniform average {avg:.6f} vs DOS {rho:.6f}; mixture vs weighted sum {abs(mix - lin):.1e}, "
              f"vs direct quadrature {abs(mix - direct):.1e}")
    record_criterion(10, "ensemble emission rates", ok, detail)
    assert ok, detail
