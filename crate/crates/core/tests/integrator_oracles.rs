use std::collections::HashMap;
use std::f64::consts::PI;

use approx::assert_abs_diff_eq;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use sdnlw_core::integrator::{
    energy, general_power_nonlinearity, nonlinearity_strong, simulate, solve_deterministic_limit,
    step_vn, wick_powers, InitialData, Regime, SimConfig, Simulation,
};
use sdnlw_core::linear_flow::{homogeneous_step, propagator_symbols, transition_covariance};
use sdnlw_core::renorm::RenormConstants;
use sdnlw_core::sampler::{NoiseStream, Role};
use sdnlw_core::spectral::{
    canonical_modes, cubic_dealiased, project, sobolev_norm, Mode, PairState, SpectralField,
};

fn random_field(band: usize, scale: f64, rng: &mut ChaCha20Rng) -> SpectralField {
    SpectralField::from_canonical(band, |m| {
        let im = if m == Mode::ZERO { 0.0 } else { rng.gen_range(-1.0..1.0) };
        Complex64::new(rng.gen_range(-1.0..1.0), im) * scale
    })
}

fn max_diff(a: &SpectralField, b: &SpectralField) -> f64 {
    a.modes().map(|(m, c)| (c - b.get(m)).norm()).fold(0.0, f64::max)
}

/// Coefficients of a product in the basis `e^{in·x}/(2π)` by direct
/// convolution over the nonzero modes.
fn convolve(a: &HashMap<Mode, Complex64>, b: &HashMap<Mode, Complex64>) -> HashMap<Mode, Complex64> {
    let mut out = HashMap::new();
    for (ma, ca) in a {
        for (mb, cb) in b {
            let m = Mode::new(ma.n1 + mb.n1, ma.n2 + mb.n2);
            *out.entry(m).or_insert(Complex64::new(0.0, 0.0)) += ca * cb / (2.0 * PI);
        }
    }
    out
}

fn as_map(f: &SpectralField) -> HashMap<Mode, Complex64> {
    f.modes().collect()
}

fn deterministic_config(n: usize, kappa: f64, t_final: f64, h: f64) -> SimConfig {
    let mut cfg = SimConfig::new(n, Regime::Deterministic);
    cfg.kappa = kappa;
    cfg.t_final = t_final;
    cfg.h = h;
    cfg.initial = InitialData::SmoothBump;
    cfg
}

/// States of a deterministic run at times `0, T/k, 2T/k, ..., T`.
fn checkpoints(cfg: &SimConfig, k: usize) -> Vec<PairState> {
    let rc = cfg.renorm_constants().unwrap();
    let mut sim = Simulation::new(cfg, rc, NoiseStream::new(0, 0, Role::Wiener)).unwrap();
    let every = cfg.steps() / k;
    let mut out = vec![sim.v().clone()];
    for step in 1..=cfg.steps() {
        sim.step().unwrap();
        if step % every == 0 {
            out.push(sim.v().clone());
        }
    }
    out
}

fn sup_h1_distance(a: &[PairState], b: &[PairState]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = PairState::new(&x.pos - &y.pos, &x.vel - &y.vel);
            d.energy_norm(1.0)
        })
        .fold(0.0, f64::max)
}

#[test]
fn hermite_recombination_matches_plain_cube() {
    let mut rng = ChaCha20Rng::seed_from_u64(17);
    for band in [2, 4, 8] {
        for _ in 0..10 {
            let v = random_field(band, 0.3, &mut rng);
            let z = random_field(band, 0.3, &mut rng);
            let sigma = rng.gen_range(0.0..2.0);
            let (z2, z3) = wick_powers(&z, sigma);
            let lhs = &nonlinearity_strong(&v, &z, &z2, &z3) + &(&(&v + &z) * (3.0 * sigma));
            let rhs = project(&cubic_dealiased(&(&v + &z)), band);
            assert!(max_diff(&lhs, &rhs) < 1e-10);
        }
    }
}

#[test]
fn wick_powers_of_zero_and_unrenormalized() {
    let z = SpectralField::zeros(3);
    let (z2, z3) = wick_powers(&z, 0.7);
    assert_abs_diff_eq!(z2.get(Mode::ZERO).re, -0.7 * 2.0 * PI, epsilon = 1e-13);
    assert!(z3.max_abs() < 1e-14);

    let mut rng = ChaCha20Rng::seed_from_u64(3);
    let z = random_field(3, 1.0, &mut rng);
    let (z2, z3) = wick_powers(&z, 0.0);
    let square = convolve(&as_map(&z), &as_map(&z));
    for (m, c) in z2.modes() {
        assert!((c - square.get(&m).copied().unwrap_or_default()).norm() < 1e-12);
    }
    assert!(max_diff(&z3, &cubic_dealiased(&z)) < 1e-12);
}

#[test]
fn strong_nonlinearity_trivial_cases() {
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    let v = random_field(4, 1.0, &mut rng);
    let zero = SpectralField::zeros(4);
    let cube = nonlinearity_strong(&v, &zero, &zero, &zero);
    assert!(max_diff(&cube, &project(&cubic_dealiased(&v), 4)) < 1e-12);
    let z = random_field(4, 1.0, &mut rng);
    let (z2, z3) = wick_powers(&z, 0.4);
    let only = nonlinearity_strong(&zero, &z, &z2, &z3);
    assert!(max_diff(&only, &project(&z3, 4)) < 1e-12);
}

#[test]
fn general_power_cubic_agrees_with_strong_path() {
    let mut rng = ChaCha20Rng::seed_from_u64(8);
    let v = random_field(4, 0.5, &mut rng);
    let z = random_field(4, 0.5, &mut rng);
    let sigma = 0.6;
    let (z2, z3) = wick_powers(&z, sigma);
    let strong = &nonlinearity_strong(&v, &z, &z2, &z3) + &(&(&v + &z) * (3.0 * sigma));
    let general = project(&general_power_nonlinearity(&v, &z, sigma, 1), 4);
    assert!(max_diff(&strong, &general) < 1e-10);
}

#[test]
fn quintic_matches_direct_convolution() {
    let mut rng = ChaCha20Rng::seed_from_u64(21);
    let v = random_field(2, 1.0, &mut rng);
    let fifth = general_power_nonlinearity(&v, &SpectralField::zeros(2), 0.9, 2);
    assert_eq!(fifth.band(), 10);
    let base = as_map(&v);
    let mut direct = base.clone();
    for _ in 0..4 {
        direct = convolve(&direct, &base);
    }
    for (m, c) in fifth.modes() {
        let expect = direct.get(&m).copied().unwrap_or_default();
        assert!((c - expect).norm() < 1e-10 * (1.0 + expect.norm()));
    }
}

#[test]
fn zero_forcing_step_is_homogeneous_step() {
    let rc = RenormConstants::strong(1.0, 6).unwrap();
    let syms = propagator_symbols(&rc);
    let op = transition_covariance(&syms, 0.0, 0.05);
    let mut rng = ChaCha20Rng::seed_from_u64(2);
    let v = PairState::new(random_field(6, 1.0, &mut rng), random_field(6, 1.0, &mut rng));
    let stepped = step_vn(&v, &op, |_, _| SpectralField::zeros(6));
    let exact = homogeneous_step(&v, &syms, 0.05);
    assert!(max_diff(&stepped.pos, &exact.pos) < 1e-15);
    assert!(max_diff(&stepped.vel, &exact.vel) < 1e-15);
}

/// Error at `T = 1` of the mode `(1,0)` under flow mass `lambda` and forcing
/// `-lambda·v`, against the closed-form solution of `v'' + v' + v = 0`.
fn linear_mass_error(lambda: f64, h: f64) -> f64 {
    let rc = RenormConstants::noiseless(2, lambda, 1.0);
    let op = transition_covariance(&propagator_symbols(&rc), 0.0, h);
    let mut v = PairState::new(
        SpectralField::single_mode(2, Mode::new(1, 0), Complex64::new(PI, 0.0)),
        SpectralField::zeros(2),
    );
    for _ in 0..(1.0 / h).round() as usize {
        v = step_vn(&v, &op, |_, pos| pos * -lambda);
    }
    let w = 3.0f64.sqrt() / 2.0;
    let expect = PI * (-0.5f64).exp() * (w.cos() + w.sin() / (2.0 * w));
    (v.pos.get(Mode::new(1, 0)).re - expect).abs()
}

#[test]
fn linear_mass_forcing_matches_closed_form() {
    assert!(linear_mass_error(1.0, 1e-3) < 1e-6);
    let ratio = linear_mass_error(5.0, 1e-3) / linear_mass_error(5.0, 5e-4);
    assert!((ratio.log2() - 2.0).abs() < 0.1);
}

#[test]
fn richardson_order_two() {
    let runs: Vec<Vec<PairState>> = [1.0 / 20.0, 1.0 / 40.0, 1.0 / 80.0]
        .iter()
        .map(|h| checkpoints(&deterministic_config(12, 1.0, 1.0, *h), 10))
        .collect();
    let e1 = sup_h1_distance(&runs[0], &runs[1]);
    let e2 = sup_h1_distance(&runs[1], &runs[2]);
    let order = (e1 / e2).log2();
    assert!((order - 2.0).abs() <= 0.3, "observed order {order}");
}

#[test]
fn energy_of_constant_field() {
    let c = 0.7;
    let lambda = 1.3;
    let v = PairState::new(SpectralField::constant(3, c), SpectralField::zeros(3));
    let expect = 4.0 * PI * PI * (c.powi(4) / 4.0 + lambda * c * c / 2.0);
    assert_abs_diff_eq!(energy(&v, lambda), expect, epsilon = 1e-12);
    assert_eq!(energy(&PairState::zeros(3), 2.0), 0.0);
}

#[test]
fn unforced_flow_dissipates_energy() {
    let h = 1.0 / 40.0;
    let cfg = deterministic_config(12, 0.0, 2.0, h);
    let rc = cfg.renorm_constants().unwrap();
    let mut sim = Simulation::new(&cfg, rc, NoiseStream::new(0, 0, Role::Wiener)).unwrap();
    let e0 = energy(sim.v(), rc.lambda);
    let mut prev = e0;
    for _ in 0..cfg.steps() {
        sim.step().unwrap();
        let e = energy(sim.v(), rc.lambda);
        assert!(e <= prev + e0 * h * h, "energy rose from {prev} to {e}");
        prev = e;
    }
    assert!(prev < e0);
}

#[test]
fn mass_term_sets_linear_frequency() {
    let kappa = 2.0;
    let amp = 1e-4;
    let v0 = PairState::new(
        SpectralField::single_mode(3, Mode::new(1, 0), Complex64::new(amp, 0.0)),
        SpectralField::zeros(3),
    );
    let rec_h = 1.0 / 200.0;
    let mut cfg = deterministic_config(3, kappa, 2.0, rec_h);
    cfg.initial = InitialData::Zero;
    let rc = cfg.renorm_constants().unwrap();
    let mut sim = Simulation::with_initial(&cfg, rc, NoiseStream::new(0, 0, Role::Wiener), v0).unwrap();
    for _ in 0..cfg.steps() {
        sim.step().unwrap();
    }
    let mass = 3.0 / (4.0 * PI) * kappa * kappa;
    let w = (mass + 1.0 - 0.25f64).sqrt();
    let t = 2.0f64;
    let expect = amp * (-t / 2.0).exp() * ((w * t).cos() + (w * t).sin() / (2.0 * w));
    assert_abs_diff_eq!(sim.v().pos.get(Mode::new(1, 0)).re, expect, epsilon = 1e-7 * amp);
}

#[test]
fn deterministic_limit_basic_runs() {
    let zero = solve_deterministic_limit(0.0, &PairState::zeros(4), 0.5, 0.05).unwrap();
    assert!(zero.series("v_x1").unwrap().iter().all(|x| *x == 0.0));
    let bump = InitialData::SmoothBump.state(8);
    let rec = solve_deterministic_limit(1.0, &bump, 1.0, 1.0 / 32.0).unwrap();
    assert_eq!(rec.times.len(), 33);
    assert!(rec.blowup.is_none());
}

#[test]
fn weak_regime_without_noise_tracks_the_limit_equation() {
    // The weak split keeps mass 1 in the flow and -v in the forcing, the limit
    // solver has mass 0; the two discretize one equation and differ at O(h²).
    let diff = |h: f64| {
        let det = checkpoints(&deterministic_config(10, 0.0, 1.0, h), 4);
        let mut weak = deterministic_config(10, 0.0, 1.0, h);
        weak.regime = Regime::Weak;
        weak.alpha_rule = sdnlw_core::integrator::AlphaRule::Constant(0.0);
        sup_h1_distance(&det, &checkpoints(&weak, 4))
    };
    let (d1, d2) = (diff(1.0 / 20.0), diff(1.0 / 40.0));
    assert!(d1 < 1e-2 && d2 < d1 / 3.0, "{d1} {d2}");
}

#[test]
fn zero_noise_zero_data_stays_zero() {
    let mut cfg = SimConfig::new(6, Regime::Weak);
    cfg.alpha_rule = sdnlw_core::integrator::AlphaRule::Constant(0.0);
    cfg.t_final = 0.5;
    let rc = cfg.renorm_constants().unwrap();
    let rec = simulate(&cfg, &rc, &NoiseStream::new(1, 0, Role::Wiener)).unwrap();
    assert!(rec.series("u_h_minus_eps").unwrap().iter().all(|x| *x == 0.0));
}

#[test]
fn strong_runs_are_reproducible_and_band_limited() {
    let mut cfg = SimConfig::new(8, Regime::Strong);
    cfg.t_final = 0.25;
    cfg.initial = InitialData::SingleMode;
    let rc = cfg.renorm_constants().unwrap();
    let stream = NoiseStream::new(9, 2, Role::Wiener);
    let a = simulate(&cfg, &rc, &stream).unwrap();
    let b = simulate(&cfg, &rc, &stream).unwrap();
    assert_eq!(a, b);
    assert!(a.blowup.is_none());

    let mut sim = Simulation::new(&cfg, rc, stream).unwrap();
    for _ in 0..cfg.steps() {
        sim.step().unwrap();
    }
    let v = sim.v();
    assert_eq!(v.band(), 8);
    for (i, c) in v.pos.coeffs().iter().enumerate() {
        if !v.pos.mode_at(i).in_ball(8) {
            assert_eq!(*c, Complex64::new(0.0, 0.0));
        }
    }
    assert!(sim.forcing_tail_norm() > 0.0);
}

#[test]
fn noise_clock_gives_common_paths_across_steps() {
    // With a common noise clock, the linear solution z is identical whether
    // the residual is advanced with h or h/2.
    let mut coarse = SimConfig::new(8, Regime::Strong);
    coarse.t_final = 0.25;
    coarse.h = 1.0 / 32.0;
    coarse.noise_dt = Some(1.0 / 64.0);
    let mut fine = coarse.clone();
    fine.h = 1.0 / 64.0;
    let rc = coarse.renorm_constants().unwrap();
    let stream = NoiseStream::new(4, 0, Role::Wiener);
    let mut a = Simulation::new(&coarse, rc, stream).unwrap();
    let mut b = Simulation::new(&fine, rc, stream).unwrap();
    for _ in 0..coarse.steps() {
        a.step().unwrap();
        b.step().unwrap();
        b.step().unwrap();
    }
    assert_eq!(a.z(), b.z());
    assert!(sobolev_norm(&(&a.v().pos - &b.v().pos), 0.0) < 1e-2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn recombination_holds_for_random_fields(seed in 0u64..10_000, band in 1usize..5, sigma in 0.0f64..3.0) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let v = random_field(band, 0.5, &mut rng);
        let z = random_field(band, 0.5, &mut rng);
        let (z2, z3) = wick_powers(&z, sigma);
        let lhs = &nonlinearity_strong(&v, &z, &z2, &z3) + &(&(&v + &z) * (3.0 * sigma));
        let rhs = project(&cubic_dealiased(&(&v + &z)), band);
        prop_assert!(max_diff(&lhs, &rhs) < 1e-10);
    }

    #[test]
    fn stepping_preserves_hermitian_symmetry(seed in 0u64..10_000) {
        let mut cfg = SimConfig::new(5, Regime::Strong);
        cfg.t_final = 0.1;
        cfg.h = 0.05;
        cfg.seed = seed;
        let rc = cfg.renorm_constants().unwrap();
        let mut sim = Simulation::new(&cfg, rc, NoiseStream::new(seed, 0, Role::Wiener)).unwrap();
        sim.step().unwrap();
        prop_assert!(sim.v().pos.is_hermitian() && sim.v().vel.is_hermitian());
        prop_assert!(sim.z().pos.is_hermitian());
    }

    #[test]
    fn power_identity_on_constants(c in -2.0f64..2.0, sigma in 0.0f64..2.0, k in 1usize..4) {
        let u = SpectralField::constant(1, c);
        let zero = SpectralField::zeros(1);
        let out = general_power_nonlinearity(&zero, &u, sigma, k);
        let value = out.get(Mode::ZERO).re / (2.0 * PI);
        prop_assert!((value - c.powi(2 * k as i32 + 1)).abs() < 1e-12 * (1.0 + c.abs().powi(2 * k as i32 + 1)));
        for m in canonical_modes(out.band()).into_iter().skip(1) {
            prop_assert!(out.get(m).norm() < 1e-11);
        }
    }
}
