"""Acceptance gate: one test per release criterion, each printing a single
pass/fail line with the measured numbers and enforcing its runtime budget."""

import math
import time

import numpy as np

from diracsea import (GaussianPulse, GaussianPulse4, LatticeConfig,
                      PolarizationBasis, Potential1p1, Potential3p1,
                      SamplerSpec, SeaBasis, amplitude, blocks, build_Q,
                      class_distance, cutoff_probe, evolve, free_mode_basis,
                      free_projectors, key_prop_defects, lift,
                      local_gauge_projector, oracle_lift, pairing,
                      representative_projector, tangential_probe)
from diracsea.observables import (bogolyubov_current, gauge_covariance_probe,
                                  linear_phase_functional, pair_number,
                                  pair_spectrum, vacuum_persistence)
from conftest import random_unitary


def _report(name, ok, detail):
    print(f"\n[acceptance] {name}: {'PASS' if ok else 'FAIL'} ({detail})")
    assert ok, f"{name}: {detail}"


def _free_pol(cfg):
    v_plus, v_minus, _ = free_mode_basis(cfg)
    return PolarizationBasis(minus=v_minus, plus=v_plus)


def test_free_field_identities():
    started = time.perf_counter()
    cfg = LatticeConfig(N=256, L=64.0, m=1.0, e=0.3, t0=-5.0, t1=5.0,
                        nsteps=200)
    U = evolve(cfg, Potential1p1(), cfg.t0, cfg.t1)
    pol = _free_pol(cfg)
    pn = pair_number(U, pol, pol)
    persistence = vacuum_persistence(lift(U, pol, pol))
    pair_proj = free_projectors(cfg)
    report = blocks(U, pair_proj, pair_proj).report
    off_diag = max(report.hs_plus_minus, report.hs_minus_plus)
    elapsed = time.perf_counter() - started
    ok = (pn <= 1e-20 and abs(persistence - 1.0) <= 1e-10
          and off_diag <= 1e-10 and elapsed < 5.0)
    _report("free-field identities", ok,
            f"pair_number={pn:.2e} persistence-1={persistence - 1.0:.2e} "
            f"off_diag={off_diag:.2e} elapsed={elapsed:.1f}s")


def test_splitting_order():
    started = time.perf_counter()
    cfg = LatticeConfig(N=256, L=128.0, m=1.0, e=0.3, t0=-5.0, t1=5.0,
                        nsteps=200)
    pot = Potential1p1.validated(
        cfg, a0_pulses=(GaussianPulse(1.0, 0.0, 0.0, 0.6, 2.0),))
    ref = evolve(cfg, pot, cfg.t0, cfg.t1, steps=512)  # the dt/8 reference
    errs = [np.linalg.norm(evolve(cfg, pot, cfg.t0, cfg.t1, steps=s).matrix
                           - ref.matrix) for s in (64, 128, 256)]
    order = float(np.polyfit(np.log([1.0, 0.5, 0.25]), np.log(errs), 1)[0])
    elapsed = time.perf_counter() - started
    ok = abs(order - 2.0) <= 0.3 and elapsed < 30.0
    _report("splitting order", ok,
            f"order={order:.3f} errors={[f'{e:.2e}' for e in errs]} "
            f"elapsed={elapsed:.1f}s")


def test_oracle_equivalence():
    started = time.perf_counter()
    rng = np.random.default_rng(11)
    worst = 0.0
    for k in range(20):
        n = int(rng.choice([4, 6, 8]))
        m = int(rng.integers(1, min(4, n // 2) + 1))
        u = random_unitary(rng, n)
        q = random_unitary(rng, n)
        pol = PolarizationBasis(minus=q[:, :m], plus=q[:, m:])
        z = rng.normal(size=(n, m)) + 1j * rng.normal(size=(n, m))
        psi = SeaBasis(np.linalg.qr(z)[0])
        # pairing/left_op path
        oracle = oracle_lift(u, pol.sea(), psi)
        worst = max(worst, abs(pairing(psi, SeaBasis(u @ pol.minus))
                               - oracle))
        # lift/amplitude path, modulo the real-prefactor phase convention
        lifted = lift(u, pol, pol)
        umm_det = np.linalg.det(pol.minus.conj().T @ u @ pol.minus)
        phase = umm_det / abs(umm_det)
        worst = max(worst, abs(amplitude(lifted, psi)
                               - oracle * np.conj(phase)))
    elapsed = time.perf_counter() - started
    ok = worst <= 1e-9 and elapsed < 10.0
    _report("oracle equivalence", ok,
            f"worst |difference|={worst:.2e} over 20 instances "
            f"elapsed={elapsed:.1f}s")


def test_block_identity():
    started = time.perf_counter()
    worst = 0.0
    for N in (128, 256):
        cfg = LatticeConfig(N=N, L=N / 4.0, m=1.0, e=0.4, t0=-5.0, t1=5.0,
                            nsteps=200)
        pol = _free_pol(cfg)
        pots = [
            Potential1p1.validated(
                cfg, a0_pulses=(GaussianPulse(1.0, 0.0, 0.5, 0.6, 1.0),)),
            Potential1p1.validated(
                cfg, a1_pulses=(GaussianPulse(0.8, 0.0, -0.3, 0.7, 1.0),)),
            Potential1p1.validated(
                cfg, a0_pulses=(GaussianPulse(0.6, -1.0, 0.0, 0.5, 1.2),),
                a1_pulses=(GaussianPulse(0.6, 1.0, 0.4, 0.5, 1.0),)),
        ]
        for pot in pots:
            lifted = lift(evolve(cfg, pot, cfg.t0, cfg.t1), pol, pol)
            defect = np.linalg.norm(
                lifted.umm.conj().T @ lifted.umm
                + lifted.upm.conj().T @ lifted.upm - np.eye(cfg.N))
            worst = max(worst, float(defect))
    elapsed = time.perf_counter() - started
    ok = worst <= 1e-9 and elapsed < 20.0
    _report("block identity", ok,
            f"worst defect={worst:.2e} over 6 evolutions "
            f"elapsed={elapsed:.1f}s")


def test_persistence_identity():
    started = time.perf_counter()
    cfg = LatticeConfig(N=256, L=64.0, m=1.0, e=0.3, t0=-5.0, t1=5.0,
                        nsteps=200)
    pot = Potential1p1.validated(
        cfg, a0_pulses=(GaussianPulse(1.0, 0.0, 0.5, 0.6, 1.0),))
    pol = _free_pol(cfg)
    lifted = lift(evolve(cfg, pot, cfg.t0, cfg.t1), pol, pol)
    persistence = vacuum_persistence(lifted)
    det_form = float(np.real(np.linalg.det(
        np.eye(cfg.N) - lifted.upm.conj().T @ lifted.upm)))
    rel = abs(persistence - det_form) / det_form
    elapsed = time.perf_counter() - started
    ok = rel <= 1e-8
    _report("persistence identity", ok,
            f"(det|U--|)^2={persistence:.12f} det(I-U+-^dag U+-)="
            f"{det_form:.12f} rel={rel:.2e} elapsed={elapsed:.1f}s")


def test_weak_coupling_scaling():
    started = time.perf_counter()
    pulse = GaussianPulse(1.0, 0.0, 0.5, 0.6, 1.0)
    values = {}
    sector_sum = None
    for e in (0.025, 0.05):
        cfg = LatticeConfig(N=64, L=16.0, m=1.0, e=e, t0=-5.0, t1=5.0,
                            nsteps=200)
        pot = Potential1p1.validated(cfg, a0_pulses=(pulse,))
        pol = _free_pol(cfg)
        lifted = lift(evolve(cfg, pot, cfg.t0, cfg.t1), pol, pol)
        values[e] = pair_number(lifted.u, pol, pol)
        spec = pair_spectrum(lifted, max_pairs=2)
        sector_sum = float(sum(spec.sector_totals.values()))
    ratio = values[0.05] / values[0.025]
    elapsed = time.perf_counter() - started
    ok = abs(ratio - 4.0) <= 0.2 and sector_sum >= 0.999
    _report("weak-coupling scaling", ok,
            f"ratio={ratio:.4f} sector_sum={sector_sum:.6f} "
            f"elapsed={elapsed:.1f}s")


def test_gauge_covariance():
    started = time.perf_counter()
    cfg = LatticeConfig(N=128, L=32.0, m=1.0, e=0.5, t0=-6.0, t1=0.0,
                        nsteps=480)
    pot = Potential1p1.validated(
        cfg, gamma_pulses=(GaussianPulse(1.0, 0.0, 0.0, 0.4, 1.0),))
    report = gauge_covariance_probe(cfg, pot, order=4)
    elapsed = time.perf_counter() - started
    ok = (report.fixed_pair_number >= 1e-2
          and report.transformed_pair_number <= 1e-8
          and elapsed < 60.0)
    _report("gauge covariance", ok,
            f"fixed={report.fixed_pair_number:.3e} "
            f"transformed={report.transformed_pair_number:.3e} "
            f"elapsed={elapsed:.1f}s")


def _pulse4(**kw):
    params = dict(amplitude=1.0, t_center=0.0, sigma_t=1.0,
                  x_center=(0.0, 0.0, 0.0), sigma_x=1.0)
    params.update(kw)
    return GaussianPulse4(**params)


def test_cutoff_dichotomy():
    started = time.perf_counter()
    cutoffs = [5.0, 10.0, 20.0, 40.0]  # in units of m = 1
    sampler = SamplerSpec(samples=40000, seed=101)
    temporal = Potential3p1(components=(_pulse4(), None, None, None))
    res_t = cutoff_probe(temporal, cutoffs, sampler)
    spatial = Potential3p1(components=(None, None, None, _pulse4()))
    res_s = cutoff_probe(spatial, cutoffs, SamplerSpec(40000, seed=202))
    stderr_ok = (not np.any(res_t.stderr_flags)
                 and not np.any(res_s.stderr_flags))
    elapsed = time.perf_counter() - started
    ok = (res_t.verdict == "convergent" and res_s.verdict == "divergent"
          and res_s.slope >= 0.5 and stderr_ok and elapsed < 600.0)
    _report("cutoff dichotomy", ok,
            f"A0 verdict={res_t.verdict} slope={res_t.slope:.3f}; "
            f"spatial verdict={res_s.verdict} slope={res_s.slope:.3f}; "
            f"stderr within budget={stderr_ok} elapsed={elapsed:.1f}s")


def test_tangential_dichotomy():
    started = time.perf_counter()
    cutoffs = [5.0, 10.0, 20.0, 40.0]
    base_spatial = _pulse4()
    pot_a = Potential3p1(components=(_pulse4(amplitude=0.7), None, None,
                                     base_spatial))
    same_tangential = Potential3p1(components=(_pulse4(amplitude=1.4), None,
                                               None, base_spatial))
    diff_tangential = Potential3p1(components=(_pulse4(amplitude=0.7), None,
                                               None,
                                               _pulse4(amplitude=0.5)))
    res_same = tangential_probe(pot_a, same_tangential, cutoffs,
                                SamplerSpec(40000, seed=303))
    res_diff = tangential_probe(pot_a, diff_tangential, cutoffs,
                                SamplerSpec(40000, seed=404))
    stderr_ok = (not np.any(res_same.stderr_flags)
                 and not np.any(res_diff.stderr_flags))
    elapsed = time.perf_counter() - started
    ok = (res_same.verdict == "convergent" and res_diff.verdict == "divergent"
          and stderr_ok and elapsed < 600.0)
    _report("tangential dichotomy", ok,
            f"matching spatial verdict={res_same.verdict} "
            f"slope={res_same.slope:.3f}; differing verdict={res_diff.verdict} "
            f"slope={res_diff.slope:.3f}; stderr within budget={stderr_ok} "
            f"elapsed={elapsed:.1f}s")


def test_gauge_projector_regularity():
    started = time.perf_counter()
    results = {}
    for N in (256, 512):
        cfg = LatticeConfig(N=N, L=32.0, m=1.0, e=0.3, t0=-6.0, t1=6.0,
                            nsteps=240)
        pot = Potential1p1.validated(
            cfg,
            a0_pulses=(GaussianPulse(0.4, 0.0, 0.3, 0.7, 1.2),),
            a1_pulses=(GaussianPulse(0.4, 0.0, -0.2, 0.7, 1.2),))
        d1, d2 = key_prop_defects(cfg, pot, window=(cfg.t0, 0.0))
        p_minus, p_plus = free_projectors(cfg)
        p_a = local_gauge_projector(cfg, pot, 0.0)
        rep = representative_projector(build_Q(p_plus, p_minus, p_a), p_minus)
        U = evolve(cfg, pot, cfg.t0, 0.0)
        interp = U.matrix @ p_minus.matrix @ U.matrix.conj().T
        results[N] = (d1, d2, class_distance(rep, interp))
    changes = [abs(results[512][i] - results[256][i]) / results[256][i]
               for i in range(3)]
    elapsed = time.perf_counter() - started
    ok = max(changes) <= 0.20
    _report("gauge projector regularity", ok,
            f"delta1 change={changes[0]:.1%} delta2 change={changes[1]:.1%} "
            f"class_distance change={changes[2]:.1%} elapsed={elapsed:.1f}s")


def test_current_phase_dependence():
    started = time.perf_counter()
    cfg = LatticeConfig(N=32, L=16.0, m=1.0, e=0.3, t0=-5.0, t1=5.0,
                        nsteps=160)
    free_sample = bogolyubov_current(cfg, Potential1p1(), (0.3, 0.2), 0)
    pot = Potential1p1.validated(
        cfg, a0_pulses=(GaussianPulse(0.5, 0.0, 0.0, 0.6, 1.0),))
    point = (0.3, 0.2)
    sj_t, sj_x = 0.8, 1.2

    def j_ext(mu, t, x):
        if mu != 0:
            return np.zeros_like(np.asarray(x, float))
        return np.exp(-0.5 * ((t - 0.2) / sj_t) ** 2
                      - 0.5 * ((np.asarray(x, float) - 0.1) / sj_x) ** 2)

    coeff = 0.25
    theta = linear_phase_functional(cfg, j_ext, coeff)
    plain = bogolyubov_current(cfg, pot, point, 0)
    shifted = bogolyubov_current(cfg, pot, point, 0, phase_functional=theta)
    got = shifted.value - plain.value
    # analytically known summand: the probe-bump smearing of coeff * j_ext
    sb_t, sb_x = plain.bump_sigma_t, plain.bump_sigma_x
    ts = np.linspace(point[0] - 8 * sj_t, point[0] + 8 * sj_t, 1201)
    xs = np.linspace(-0.5 * cfg.L, 0.5 * cfg.L, 1201)
    tt, xx = np.meshgrid(ts, xs, indexing="ij")
    bump = (np.exp(-0.5 * ((tt - point[0]) / sb_t) ** 2
                   - 0.5 * ((xx - point[1]) / sb_x) ** 2)
            / (2.0 * math.pi * sb_t * sb_x))
    want = coeff * float(np.sum(bump * j_ext(0, tt, xx))
                         * (ts[1] - ts[0]) * (xs[1] - xs[0]))
    fd_error = plain.residual + shifted.residual
    elapsed = time.perf_counter() - started
    ok = (abs(got - want) <= 0.05 * abs(want) + fd_error
          and abs(free_sample.value) <= 1e-6)
    _report("current phase dependence", ok,
            f"shift={got:.6e} expected={want:.6e} fd_error={fd_error:.2e} "
            f"J(A=0)={free_sample.value:.2e} elapsed={elapsed:.1f}s")
