//! Gaussian initial data and noise increments against their covariances,
//! checked by Monte-Carlo with three-standard-error bands.

use std::f64::consts::PI;

use approx::assert_abs_diff_eq;
use num_complex::Complex64;
use proptest::prelude::*;

use sdnlw_core::renorm::{mode_sum, RenormConstants};
use sdnlw_core::sampler::*;
use sdnlw_core::spectral::{sobolev_norm, to_physical, Mode, SpectralField};

/// Mean and standard error.
fn mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn assert_within(values: &[f64], want: f64, k: f64) {
    let (mean, se) = mean_se(values);
    assert!((mean - want).abs() <= k * se, "{mean} ± {se} vs {want}");
}

#[test]
fn zero_amplitude_gives_zero_data() {
    let rc = RenormConstants::noiseless(6, 0.5, 1.0);
    let z = sample_initial(&rc, &NoiseStream::new(1, 2, Role::Wiener));
    assert_eq!(z.z0.max_abs(), 0.0);
    assert_eq!(z.z1.max_abs(), 0.0);
}

#[test]
fn single_mode_variances() {
    // N = 0: ẑ0(0) ~ N(0, α²/(2λ)), ẑ1(0) ~ N(0, α²/2).
    let rc = RenormConstants::strong(1.0, 0).unwrap();
    let (mut p, mut v) = (Vec::new(), Vec::new());
    for r in 0..100_000 {
        let z = sample_initial(&rc, &NoiseStream::new(7, r, Role::Wiener));
        assert_eq!(z.z0.get(Mode::ZERO).im, 0.0);
        p.push(z.z0.get(Mode::ZERO).re.powi(2));
        v.push(z.z1.get(Mode::ZERO).re.powi(2));
    }
    assert_within(&p, 1.0 / (2.0 * rc.lambda), 3.0);
    assert_within(&v, 0.5, 3.0);
}

#[test]
fn l2_mass_of_initial_position() {
    // E‖z0‖²_{L²} = (α²/2) Σ_{|n|≤N} 1/(λ + |n|²).
    let rc = RenormConstants::strong(1.3, 6).unwrap();
    let vals: Vec<f64> = (0..5000)
        .map(|r| sobolev_norm(&sample_initial(&rc, &NoiseStream::new(2, r, Role::Wiener)).z0, 0.0).powi(2))
        .collect();
    assert_within(&vals, rc.alpha * rc.alpha / 2.0 * mode_sum(rc.lambda, rc.n).unwrap(), 3.0);
}

#[test]
fn wiener_increment_covariance() {
    let dt = 0.01;
    let probes = [Mode::ZERO, Mode::new(1, 0), Mode::new(2, -1)];
    for m in probes {
        let mut sq = Vec::new();
        let mut cross = Vec::new();
        let mut pseudo = Vec::new();
        for r in 0..20_000 {
            let s = NoiseStream::new(4, r, Role::Wiener);
            let a = wiener_increment(3, dt, &s, 0).get(m);
            let b = wiener_increment(3, dt, &s, 1).get(m);
            sq.push(a.norm_sqr());
            cross.push((a * b.conj()).re);
            // E ΔŴ(n)² vanishes for n ≠ 0.
            pseudo.push((a * a).re);
        }
        assert_within(&sq, dt, 3.0);
        assert_within(&cross, 0.0, 3.5);
        assert_within(&pseudo, if m == Mode::ZERO { dt } else { 0.0 }, 3.5);
    }
}

#[test]
fn wiener_increment_scales_with_the_step() {
    let s = NoiseStream::new(9, 1, Role::Wiener);
    let a = wiener_increment(4, 0.01, &s, 3);
    let b = wiener_increment(4, 0.04, &s, 3);
    for (m, c) in a.modes() {
        assert!((b.get(m) - c * 2.0).norm() <= 1e-15 * c.norm().max(1.0));
    }
}

#[test]
fn roles_are_independent() {
    let probe = Mode::new(1, 2);
    let mut products = Vec::new();
    for r in 0..20_000 {
        let s = NoiseStream::new(5, r, Role::InitialG);
        let g = standard_field(3, &s, 0).get(probe);
        let h = standard_field(3, &s.with_role(Role::InitialH), 0).get(probe);
        let w = standard_field(3, &s.with_role(Role::Wiener), 0).get(probe);
        products.push((g * h.conj()).re);
        products.push((g * w.conj()).re);
    }
    assert_within(&products, 0.0, 3.5);
}

#[test]
fn draws_are_reproducible_and_replica_specific() {
    let rc = RenormConstants::strong(1.0, 5).unwrap();
    let s = NoiseStream::new(42, 3, Role::Wiener);
    assert_eq!(sample_initial(&rc, &s), sample_initial(&rc, &s));
    assert_ne!(sample_initial(&rc, &s), sample_initial(&rc, &NoiseStream::new(42, 4, Role::Wiener)));
    assert_ne!(sample_initial(&rc, &s), sample_initial(&rc, &NoiseStream::new(43, 3, Role::Wiener)));
    assert_eq!(wiener_increment(5, 0.1, &s, 7), wiener_increment(5, 0.1, &s, 7));
    assert_ne!(wiener_increment(5, 0.1, &s, 7), wiener_increment(5, 0.1, &s, 8));
}

#[test]
fn pointwise_variance_is_sigma() {
    // E z0(x)² = (2π)^{-2} Σ α²/(2⟨n⟩_N²) = σ_N in the strong regime.
    let rc = RenormConstants::strong(1.0, 4).unwrap();
    let vals: Vec<f64> = (0..20_000)
        .map(|r| {
            let z = sample_initial(&rc, &NoiseStream::new(12, r, Role::Wiener)).z0;
            to_physical(&z, 16).unwrap().value(3, 5).powi(2)
        })
        .collect();
    let want = rc.alpha * rc.alpha / 2.0 * mode_sum(rc.lambda, rc.n).unwrap() / (4.0 * PI * PI);
    assert_abs_diff_eq!(want, rc.sigma, epsilon = 1e-12);
    assert_within(&vals, want, 3.0);
}

#[test]
fn low_modes_are_shared_across_truncations() {
    let s = NoiseStream::new(8, 0, Role::InitialG);
    assert_eq!(standard_field(4, &s, 0), standard_field(8, &s, 0).with_band(4));
    let w = NoiseStream::new(8, 0, Role::Wiener);
    assert_eq!(wiener_increment(16, 0.5, &w, 2).with_band(3), wiener_increment(3, 0.5, &w, 2));
}

#[test]
fn standard_field_is_hermitian_with_real_mean() {
    let f = standard_field(6, &NoiseStream::new(1, 1, Role::InitialH), 0);
    assert!(f.is_hermitian());
    assert_eq!(f.get(Mode::ZERO).im, 0.0);
    assert_ne!(f.get(Mode::new(3, 3)), Complex64::new(0.0, 0.0));
    assert_eq!(SpectralField::zeros(6).band(), f.band());
}

proptest! {
    #[test]
    fn slot_normals_do_not_depend_on_the_window(seed in 0u64..1000, step in 0u64..100, first in 0usize..50, count in 1usize..20) {
        let s = NoiseStream::new(seed, 0, Role::Wiener);
        let all = s.slot_normals(step, 0, first + count);
        let window = s.slot_normals(step, first, count);
        prop_assert_eq!(&all[first..], &window[..]);
        prop_assert!(window.iter().flatten().all(|x| x.is_finite()));
    }
}
