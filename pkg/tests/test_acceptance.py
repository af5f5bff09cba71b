"""Acceptance suite: one check per criterion, each printing a PASS/FAIL line.

Run ``python tests/test_acceptance.py`` for the plain report, or through pytest
(the lines are repeated in the terminal summary).
"""

from __future__ import annotations

import math
import time

import numpy as np
import pytest
from scipy.integrate import trapezoid
from scipy.stats import norm

from lohomodyne.bounds import (
    charfn_error_bound,
    measurement_fidelity_bound,
    measurement_fidelity_bound_sph,
    moment_error_bound,
)
from lohomodyne.cli import cmd_witness
from lohomodyne.core import ApparatusModel, StateMoments, standard_ensemble
from lohomodyne.gkp import (
    analytic_entanglement_fidelity,
    build_gkp_code,
    delta_from_n_bar,
    delta_from_sigma_gkp_sq,
    displacement_channel,
    displacement_channel_kraus,
    n_bar_from_delta,
    p_succ,
    sigma_gkp_sq_from_delta,
    sigma_sq_from_db,
    squeezing_db,
)
from lohomodyne.gkp.fock import number, quadrature, random_density, trace_distance
from lohomodyne.planner import REFERENCE_ROWS, plan, reference_inputs
from lohomodyne.witness import CoherentWitnessInput, witness_point


RESULT_LINES: list[str] = []


def report(number_, ok, detail, elapsed, budget):
    within = elapsed < budget
    status = "PASS" if ok and within else "FAIL"
    line = f"[{status}] criterion {number_}: {detail} ({elapsed * 1e3:.2f} ms, budget {budget * 1e3:.0f} ms)"
    print(line)
    RESULT_LINES.append(line)
    return ok and within


def timed(fn, repeat=1):
    t0 = time.perf_counter()
    for _ in range(repeat):
        out = fn()
    return out, (time.perf_counter() - t0) / repeat


def rel(a, b):
    return abs(a - b) / abs(b)


# ---------------------------------------------------------------------------


def check_1():
    delta, sigma, n = 1e-4, 730.0, 5.0
    r = delta * sigma
    app = ApparatusModel.gaussian(r)

    def run():
        g = measurement_fidelity_bound(delta, app, StateMoments.standard(n), standard_ensemble())
        s = measurement_fidelity_bound_sph(delta, app, n)
        return g.fidelity_lb, s.fidelity_lb

    (fg, fs), dt = timed(run, 50)
    # straight re-evaluation with Gaussian apparatus moments
    b2, b4, b6 = 1 / (2 * r) ** 2, 3 / (2 * r) ** 4, 15 / (2 * r) ** 6
    og = 1 - 4 * delta**2 * (b2 * n + b4 * (n + 1))
    os_ = 1 - delta**2 * (2 * b2 * n + delta**2 * b6 * (4 * n + 2) / 9 + b4 / 2)
    ok = rel(fg, og) < 1e-12 and rel(fs, os_) < 1e-12 and round(fg, 3) == 0.998 and round(fs, 5) == 0.99996
    return report(1, ok, f"general {fg:.6f}, sph {fs:.6f}", dt, 1e-3)


def check_2():
    delta, n = 1e-4, 5.0

    def run():
        return (
            charfn_error_bound(delta, 20, n, "general"),
            charfn_error_bound(delta, 20, n, "sph"),
            charfn_error_bound(delta, 40, n, "sph"),
        )

    (g20, s20, s40), dt = timed(run, 50)

    def sph(g):
        # standard pulsed homodyne evolution bound at s = g with <q^2> = 4n + 2
        x = (delta * g) ** 2
        return x * (2 * n + g * g * (x * (4 * n + 2) / 9 + 0.5))

    og = 4 * delta**2 * 400 * (401 * n + 400)
    ok = rel(g20, og) < 1e-12 and rel(s20, sph(20)) < 1e-12 and rel(s40, sph(40)) < 1e-12
    ok = ok and round(g20, 4) == 0.0385
    return report(2, ok, f"general |g|=20 {g20:.5f}, sph |g|=20 {s20:.4e}, sph |g|=40 {s40:.5f}", dt, 1e-3)


def check_3():
    delta, n = 1e-4, 5.0

    def run():
        return moment_error_bound(delta, 4, n, 1.0)[0], moment_error_bound(delta, 6, n, 1.0)[0]

    (c4, c6), dt = timed(run, 50)
    ok = abs(c4 - 0.027) < 5e-4 and abs(c6 - 0.077) < 5e-4
    return report(3, ok, f"k=4 coefficient {c4:.5f}, k=6 coefficient {c6:.5f}", dt, 1e-3)


def _table_oracle(n_bar, sigma_noise, sigma_0, eps_m, target):
    r = math.sqrt(2 * sigma_noise**2 - 6 * sigma_0**2)
    v = 2 * n_bar + 1
    na = (3 * v - 2 + 3 * sigma_0**2 + 4 * math.pi) / 4
    nb = (4 * v - 2 + 4 * sigma_0**2 + 2 * math.pi) / 4
    ntot = na + nb
    c2 = 4 * ntot / (2 * r) ** 2 + 3 / (2 * r) ** 4
    c4 = 40 / 3 * (ntot + 0.5) / (2 * r) ** 6
    roots = np.roots([c4, c2, -eps_m])
    x = float(max(z.real for z in roots if abs(z.imag) == 0))
    n_lo = 1 / x
    sigma_e = r / math.sqrt(x)
    resc = n_lo * (target / sigma_e) ** 2 if sigma_e < target else n_lo
    return r, n_lo, sigma_e, resc


def check_4():
    inputs = reference_inputs()
    plans, dt = timed(lambda: [plan(i) for i in inputs], 20)
    ok = True
    worst = 0.0
    for p, (n, _sg, _ec, em, sn, s0) in zip(plans, REFERENCE_ROWS):
        for target in (730.0, 8250.0):
            ref = _table_oracle(n, sn, s0, em, target)
            got = (p.r, p.n_lo, p.sigma_e, p.n_lo_at(target))
            for a, b in zip(got, ref):
                worst = max(worst, rel(a, b))
        ok = ok and p.residual <= 1e-12 * em
    ok = ok and worst < 5e-5
    return report(4, ok, f"{len(plans)} rows, worst relative deviation {worst:.2e}", dt, 10e-3)


def check_5():
    (rows, _cols, _extra, violations), dt = timed(lambda: cmd_witness({}))
    ok = violations == 0 and len(rows) == 2 * 12 * 21 * 3
    return report(5, ok, f"{len(rows)} grid points, {violations} violations", dt, 5.0)


def check_6():
    def run():
        out = []
        for d in (1e-3, 1e-4):
            for s in (0.5, 1.0, 2.0):
                for g in (0.0, 3.0):
                    w = witness_point(CoherentWitnessInput(d, s, standard_ensemble(), (g,)))
                    out.append(w.exact / w.refined)
        return out

    ratios, dt = timed(run)
    ok = all(0.05 < x <= 1 for x in ratios)
    return report(6, ok, f"ratio range [{min(ratios):.3f}, {max(ratios):.3f}]", dt, 1.0)


def check_7():
    def run():
        cutoff = 30
        rng = np.random.default_rng(7)
        worst_td = worst_tr = worst_semi = worst_gain = 0.0
        n_op = number(cutoff)
        vac = np.zeros((cutoff + 1, cutoff + 1), dtype=complex)
        vac[0, 0] = 1
        for s2 in (0.01, 0.04):
            sup = displacement_channel(s2, cutoff)
            kr = displacement_channel_kraus(s2, cutoff)
            for _ in range(20):
                rho = random_density(cutoff, 8, rng)
                a, b = sup.apply(rho), kr.apply(rho)
                worst_td = max(worst_td, trace_distance(a, b))
                worst_tr = max(worst_tr, abs(np.trace(a) - 1), abs(np.trace(b) - 1))
            gain = np.trace(sup.apply(vac) @ n_op).real
            worst_gain = max(worst_gain, abs(gain - s2))
        half = displacement_channel(0.02, cutoff)
        full = displacement_channel(0.04, cutoff)
        worst_semi = float(np.max(np.abs(half.compose(half).superop - full.superop)))
        return worst_td, worst_tr, worst_semi, worst_gain

    (td, tr, semi, gain), dt = timed(run)
    ok = td < 1e-6 and tr < 1e-8 and semi < 1e-7 and gain < 1e-6
    detail = f"trace distance {td:.1e}, trace {tr:.1e}, semigroup {semi:.1e}, vacuum gain {gain:.1e}"
    return report(7, ok, detail, dt, 60.0)


def check_8():
    def run():
        worst_orth = worst_mean = worst_trip = 0.0
        for nb in (2.0, 4.8):
            code = build_gkp_code(delta_from_n_bar(nb))
            v = code.encoder
            worst_orth = max(worst_orth, float(np.max(np.abs(v.conj().T @ v - np.eye(2)))))
            for theta in (0.0, math.pi / 2):
                q = quadrature(code.cutoff, theta)
                for k in (code.ket0, code.ket1):
                    worst_mean = max(worst_mean, abs(np.vdot(k, q @ k)))
            d = delta_from_n_bar(nb)
            g2 = sigma_gkp_sq_from_delta(d)
            trips = (
                rel(n_bar_from_delta(d), nb),
                rel(delta_from_sigma_gkp_sq(g2), d),
                rel(sigma_sq_from_db(squeezing_db(g2)), g2),
                rel(n_bar_from_delta(delta_from_sigma_gkp_sq(sigma_sq_from_db(squeezing_db(g2)))), nb),
            )
            worst_trip = max(worst_trip, *trips)
        return worst_orth, worst_mean, worst_trip

    (orth, mean, trip), dt = timed(run)
    ok = orth < 1e-10 and mean < 1e-8 and trip < 1e-12
    return report(8, ok, f"orthonormality {orth:.1e}, quadrature mean {mean:.1e}, round trip {trip:.1e}", dt, 30.0)


def brute_p_succ(sigma, nodes=1_000_000):
    """Trapezoid integration of the normal density over accepted cells inside 12 sigma."""
    h = math.sqrt(math.pi) / 2
    reach = 12 * sigma
    cells = []
    j = 0
    while (4 * j - 1) * h < reach:
        lo, hi = max((4 * j - 1) * h, 0.0), min((4 * j + 1) * h, reach)
        if hi > lo:
            cells.append((lo, hi))
        j += 1
    total_len = sum(hi - lo for lo, hi in cells)
    mass = 0.0
    for lo, hi in cells:
        m = max(int(nodes * (hi - lo) / total_len), 2)
        x = np.linspace(lo, hi, m)
        mass += trapezoid(norm.pdf(x, scale=sigma), x)
    return 2 * mass


def check_9():
    def run():
        dev = max(abs(p_succ(s) - brute_p_succ(s)) for s in (0.05, 0.1, 0.2, 0.5))
        lim_small = 1 - p_succ(1e-3)
        lim_large = abs(p_succ(50.0) - 0.5)
        exact = all(
            analytic_entanglement_fidelity(g, n) == p_succ(math.sqrt(3 * g + n)) ** 2
            for g in (0.01, 0.05)
            for n in (0.0, 0.02)
        )
        return dev, lim_small, lim_large, exact

    (dev, small, large, exact), dt = timed(run)
    ok = dev < 1e-10 and small < 1e-12 and large < 1e-3 and exact
    return report(9, ok, f"oracle deviation {dev:.1e}, 1-p(0.001) {small:.1e}, |p(50)-1/2| {large:.1e}", dt, 1.0)


CHECKS = [check_1, check_2, check_3, check_4, check_5, check_6, check_7, check_8, check_9]


@pytest.mark.parametrize("check", CHECKS, ids=[f"criterion_{i + 1}" for i in range(len(CHECKS))])
def test_acceptance(check):
    assert check()


if __name__ == "__main__":
    results = [c() for c in CHECKS]
    print(f"{sum(results)}/{len(results)} criteria passed")
