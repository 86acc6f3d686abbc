"""End-to-end acceptance gate.

Each test prints one ``criterion NN ...: PASS/FAIL`` line so a plain
pytest -v run doubles as a checklist. Tolerances are stated inline; the
Monte Carlo criteria use fixed seeds so every run sees the same draws.
"""
import math
import time

import numpy as np
import pytest
from numpy.polynomial.legendre import leggauss

from levytax.identities import (
    TripleLawPoint,
    creep1_density,
    creep2_laplace,
    creep2_test,
    npv_tax,
    ruin_probability,
    survival_exponent,
    triple_law_density,
    two_sided_down,
    two_sided_up,
)
from levytax.models import (
    BrownianDrift,
    CramerLundberg,
    MixedModel,
    gaussian_coefficient,
    levy_density,
    levy_measure_tail,
)
from levytax.quadrature import QuadratureConfig, adaptive_gk
from levytax.scale import invert_laplace_reference, make_scale
from levytax.simulate import (
    McConfig,
    estimate_creep2,
    estimate_exit_up,
    estimate_npv,
    estimate_ruin,
)
from levytax.tax import Constant, SqrtExample, Table, a_star, x_star

BM = BrownianDrift(mu=0.0, sigma=math.sqrt(2.0))
BM_DRIFT = BrownianDrift(mu=1.0, sigma=math.sqrt(2.0))
CL = CramerLundberg(c=1.0, lam=0.5, claim_mean_inv=1.0)
MIXED = MixedModel(c=1.0, lam=0.5, claim_mean_inv=1.0, sigma=1.0)
CATALOG = (BM, CL, MIXED)

QS = (0.0, 0.5, 1.0, 5.0)
QUAD = QuadratureConfig()


def _report(nn: int, label: str, ok: bool, detail: str = "") -> None:
    verdict = "PASS" if ok else "FAIL"
    line = f"criterion {nn:02d} {label}: {verdict}"
    if detail and not ok:
        line += f"  ({detail})"
    print(line, flush=True)


def test_criterion_01_scale_oracle_equivalence():
    t0 = time.monotonic()
    worst = 0.0
    for model in CATALOG:
        for q in QS:
            sc = make_scale(model, q)
            for x in (0.1, 0.5, 1.0, 2.0, 5.0, 10.0):
                ref = invert_laplace_reference(model, q, x)
                worst = max(worst, abs(sc.w(x) - ref) / abs(ref))
    elapsed = time.monotonic() - t0
    ok = worst < 1e-6 and elapsed < 5.0
    _report(1, "scale functions match reference inversion", ok,
            f"worst rel {worst:.2e}, {elapsed:.2f}s")
    assert worst < 1e-6
    assert elapsed < 5.0


def test_criterion_02_boundary_laws():
    ok = True
    # bounded variation: W(0+) = 1/drift exactly
    ok &= abs(make_scale(CL, 0.7).w(0.0) - 1.0) < 1e-9
    ks = np.array([2.0 ** -k for k in range(1, 31)])
    for model in (BM, MIXED):
        sc = make_scale(model, 1.0)
        ws = sc.w(ks)
        wps = sc.w_prime(ks)
        slope = 2.0 / gaussian_coefficient(model) ** 2
        ok &= bool(np.all(np.diff(ws) < 0))        # decreasing along x = 2^-k
        ok &= abs(ws[-1]) < slope * 2.0 ** -29      # -> 0 at the boundary rate
        ok &= abs(wps[-1] - slope) < 1e-6 * slope   # W'(0+) -> 2/sigma^2
    _report(2, "scale function boundary values", bool(ok))
    assert ok


def test_criterion_03_no_tax_reduction():
    profile = Constant(0.0)
    pairs = ((0.1, 0.5), (0.5, 1.0), (1.0, 2.0), (0.5, 2.0), (1.0, 3.0), (2.0, 4.0))
    worst = 0.0
    for model in CATALOG:
        for q in QS:
            sc = make_scale(model, q)
            for x, a in pairs:
                up = two_sided_up(sc, profile, x, a)
                want_up = sc.w(x) / sc.w(a)
                down = two_sided_down(sc, profile, x, a)
                want_down = sc.z(x) - sc.w(x) * sc.z(a) / sc.w(a)
                worst = max(
                    worst,
                    abs(up - want_up) / max(abs(want_up), 1e-30),
                    abs(down - want_down) / max(abs(want_down), 1e-12),
                )
    ok = worst < 1e-7
    _report(3, "zero tax reduces to the classical two-sided laws", ok,
            f"worst rel {worst:.2e}")
    assert worst < 1e-7


def test_criterion_04_constant_heavy_closed_forms():
    worst_up = 0.0
    worst_npv = 0.0
    for sc in (make_scale(CL, 0.0), make_scale(BM, 1.0), make_scale(MIXED, 0.5)):
        for g in (1.5, 2.0, 4.0):
            profile = Constant(g)
            x = 1.0
            ast = a_star(profile, x)
            a = x + 0.6 * (ast - x)
            p = 1.0 / (g - 1.0)
            want_up = (sc.w(a * (1 - g) + g * x) / sc.w(x)) ** p
            got_up = two_sided_up(sc, profile, x, a)
            worst_up = max(worst_up, abs(got_up - want_up) / want_up)

            ref, _, _ = adaptive_gk(
                lambda t: (sc.w(t) / sc.w(x)) ** p, 0.0, x, QUAD,
                rel_tol=1e-11, abs_tol=1e-13,
            )
            want_npv = g / (g - 1.0) * ref
            got_npv = npv_tax(sc, profile, x)
            worst_npv = max(worst_npv, abs(got_npv - want_npv) / want_npv)
    ok = worst_up < 1e-7 and worst_npv < 1e-7
    _report(4, "constant heavy-tax closed forms", ok,
            f"up {worst_up:.2e}, npv {worst_npv:.2e}")
    assert worst_up < 1e-7
    assert worst_npv < 1e-7


def test_criterion_05_complementarity():
    combos = []
    for model in CATALOG:
        sq = SqrtExample(2.0)
        ast_sq = a_star(sq, 0.5)
        combos.extend([
            (model, Constant(0.0), 1.0, 2.0),
            (model, Constant(0.5), 1.0, 1.5),
            (model, Constant(2.0), 1.0, 1.8),
            (model, Table(((0.0, 2.0), (5.0, 3.0))), 1.0, 1.2),
            (model, sq, 0.5, 0.5 + 0.8 * (ast_sq - 0.5)),
        ])
    worst = 0.0
    for model, profile, x, a in combos:
        sc = make_scale(model, 0.0)
        total = two_sided_up(sc, profile, x, a) + two_sided_down(sc, profile, x, a)
        worst = max(worst, abs(total - 1.0))
    ok = worst < 5e-7
    _report(5, "exit-up and exit-down split all the mass", ok, f"worst {worst:.2e}")
    assert worst < 5e-7


def test_criterion_06_ruin_closed_forms():
    s = make_scale(BM_DRIFT, 0.0)
    got_light = ruin_probability(s, Constant(0.5), 1.0)
    want_light = 1.0 - (1.0 - math.exp(-1.0)) ** 2
    s0 = make_scale(CL, 0.0)
    errs = [abs(got_light - want_light) / want_light]
    for x in (1.0, 2.0):
        got = ruin_probability(s0, Constant(0.0), x)
        want = 1.0 - 0.5 * s0.w(x)
        errs.append(abs(got - want) / want)
    worst = max(errs)
    ok = worst < 1e-7
    _report(6, "ruin probability closed forms", ok, f"worst rel {worst:.2e}")
    assert worst < 1e-7


def test_criterion_07_creeping_dichotomy():
    ok = True
    profile = Constant(2.0)
    for x in (0.5, 1.0, 2.0):
        ok &= creep2_test(make_scale(CL, 0.0), profile, x).creeps
        ok &= not creep2_test(make_scale(BM, 0.0), profile, x).creeps
        ok &= not creep2_test(make_scale(MIXED, 0.0), profile, x).creeps
    sq = SqrtExample(1.0)
    xs = x_star(sq)
    r = creep2_test(make_scale(BM, 0.0), sq, xs)
    exp_err = abs(r.exponent - 2.0 * xs) / (2.0 * xs)
    ok &= r.creeps and exp_err < 1e-8
    _report(7, "type II creeping iff bounded variation", bool(ok),
            f"sqrt exponent rel err {exp_err:.2e}")
    assert ok


def test_criterion_08_exact_mc_concordance():
    heavy = Constant(2.0)
    none = Constant(0.0)
    sc0 = make_scale(CL, 0.0)
    sc5 = make_scale(CL, 0.5)
    rows = [
        ("exit-up q=0", lambda c: estimate_exit_up(CL, heavy, 1.0, 1.5, 0.0, c),
         two_sided_up(sc0, heavy, 1.0, 1.5)),
        ("exit-up q=0.5", lambda c: estimate_exit_up(CL, heavy, 1.0, 1.5, 0.5, c),
         two_sided_up(sc5, heavy, 1.0, 1.5)),
        ("ruin", lambda c: estimate_ruin(CL, none, 2.0, 0.0, c),
         ruin_probability(sc0, none, 2.0)),
        ("npv", lambda c: estimate_npv(CL, heavy, 1.0, 0.0, c),
         npv_tax(sc0, heavy, 1.0)),
        ("creep2", lambda c: estimate_creep2(CL, heavy, 1.0, 0.0, c),
         creep2_laplace(sc0, heavy, 1.0)),
    ]
    for _, fn, _ in rows:             # JIT warmup outside the timed stretch
        fn(McConfig(n_paths=16, seed=1))
    cfg = McConfig(n_paths=100_000, seed=20_260_819)
    t0 = time.monotonic()
    worst_z = 0.0
    details = []
    for name, fn, truth in rows:
        est = fn(cfg)
        zscore = (est.value - truth) / est.std_error
        worst_z = max(worst_z, abs(zscore))
        details.append(f"{name} z={zscore:+.2f}")
    elapsed = time.monotonic() - t0
    ok = worst_z <= 3.0 and elapsed < 60.0
    _report(8, "exact claims kernel agrees with formulas", ok,
            "; ".join(details) + f"; {elapsed:.1f}s")
    assert worst_z <= 3.0, details
    assert elapsed < 60.0


def test_criterion_09_euler_mc_concordance():
    cfg = McConfig(n_paths=50_000, seed=20_260_819, time_step=1e-4)
    sc = make_scale(BM_DRIFT, 0.0)

    none = Constant(0.0)
    truth_up = two_sided_up(sc, none, 1.0, 2.0)
    est_up = estimate_exit_up(BM_DRIFT, none, 1.0, 2.0, 0.0, cfg)
    z_up = (est_up.value - truth_up) / est_up.std_error

    # ruin from a low start so the horizon carries negligible residual mass
    light = Constant(0.5)
    truth_ruin = ruin_probability(sc, light, 0.5)
    cfg_ruin = McConfig(n_paths=50_000, seed=20_260_819, time_step=1e-4,
                        horizon=15.0)
    est_ruin = estimate_ruin(BM_DRIFT, light, 0.5, 0.0, cfg_ruin)
    z_ruin = (est_ruin.value - truth_ruin) / est_ruin.std_error

    # unbounded variation cannot creep at the supremum: any classified
    # type II mass is pure discretization noise and must stay small
    freq = estimate_creep2(BM_DRIFT, Constant(2.0), 1.0, 0.0, cfg).value

    ok = abs(z_up) <= 3.0 and abs(z_ruin) <= 3.0 and freq < 0.05
    _report(9, "Euler kernel agrees with formulas", ok,
            f"z_up={z_up:+.2f}, z_ruin={z_ruin:+.2f}, creep2 freq {freq:.4f}")
    assert abs(z_up) <= 3.0
    assert abs(z_ruin) <= 3.0
    assert freq < 0.05


def _ruin_mass_decomposition(model, n_nodes: int = 120):
    # z integrated analytically (the overshoot factor is the Levy tail),
    # y and theta by Gauss-Legendre; returns every ruin channel separately
    profile = Constant(2.0)
    x = 1.0
    sc = make_scale(model, 0.0)
    nodes, weights = leggauss(n_nodes)
    thetas = 0.5 * x * (nodes + 1.0)
    th_w = 0.5 * x * weights
    total_ac = 0.0
    total_atom = 0.0
    total_creep1 = 0.0
    sigma = gaussian_coefficient(model)
    for theta, wt in zip(thetas, th_w):
        ys = 0.5 * theta * (nodes + 1.0)
        y_w = 0.5 * theta * weights
        inner = 0.0
        atom_density = None
        for y, wy in zip(ys, y_w):
            pt = TripleLawPoint(theta=float(theta), y=float(y), z=1.0)
            d = triple_law_density(sc, sc, profile, x, pt)
            inner += wy * (d.ac / levy_density(model, y + 1.0)) * levy_measure_tail(
                model, float(y))
            if atom_density is None:
                atom_density = d.atom / levy_density(model, theta + 1.0)
        total_ac += wt * inner
        total_atom += wt * atom_density * levy_measure_tail(model, float(theta))
        if sigma > 0.0:
            total_creep1 += wt * creep1_density(sc, sc, profile, x, float(theta))
    creep2 = creep2_laplace(sc, profile, x)
    down = two_sided_down(sc, profile, x, a_star(profile, x))
    return total_ac, total_atom, total_creep1, creep2, down


def test_criterion_10_triple_law_mass_conservation():
    # every ruin channel must add back up to the total ruin mass:
    # jump channels + creeping = two_sided_down + creep2 (= 1 at q = 0)
    ac, atom, creep1, creep2, down = _ruin_mass_decomposition(CL)
    err_cl = abs((ac + atom) - down)
    total_cl = abs(ac + atom + creep2 - 1.0)
    ac_m, atom_m, creep1_m, creep2_m, down_m = _ruin_mass_decomposition(MIXED)
    err_mx = abs((ac_m + atom_m + creep1_m) - down_m)
    total_mx = abs(ac_m + atom_m + creep1_m + creep2_m - 1.0)
    structural = atom_m == 0.0 and creep2_m == 0.0 and creep1 == 0.0
    ok = (err_cl < 1e-3 and total_cl < 1e-3 and err_mx < 2e-3
          and total_mx < 2e-3 and structural)
    _report(10, "triple-law mass conservation", ok,
            f"claims err {err_cl:.2e}, mixed err {err_mx:.2e}")
    assert err_cl < 1e-3 and total_cl < 1e-3
    assert err_mx < 2e-3 and total_mx < 2e-3
    assert structural


def test_criterion_11_determinism_and_se_scaling(tmp_path):
    from levytax.cli import run

    base = ["verify", "--time-step", "0.01"]
    out1 = tmp_path / "v1.csv"
    out2 = tmp_path / "v2.csv"
    assert run(base + ["--n-paths", "2000", "--out", str(out1)]) == 0
    assert run(base + ["--n-paths", "2000", "--out", str(out2)]) == 0
    identical = out1.read_bytes() == out2.read_bytes()

    out4 = tmp_path / "v4.csv"
    assert run(base + ["--n-paths", "4000", "--out", str(out4)]) == 0

    def ses(path):
        lines = path.read_text().strip().split("\n")[1:]
        return [float(line.split(",")[3]) for line in lines]

    ratios = [a / b for a, b in zip(ses(out1), ses(out4))]
    scaling = all(math.sqrt(2.0) * 0.8 <= r <= math.sqrt(2.0) * 1.2 for r in ratios)
    ok = identical and scaling
    _report(11, "bit-identical reruns and sqrt-n error scaling", ok,
            f"identical={identical}, ratios=" + ",".join(f"{r:.3f}" for r in ratios))
    assert identical
    assert scaling
