//! Spectral kernels against direct summation: pointwise Fourier series,
//! triple convolutions and trigonometric identities.

use std::collections::HashMap;
use std::f64::consts::PI;

use approx::assert_abs_diff_eq;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use sdnlw_core::spectral::*;

fn random_field(band: usize, rng: &mut StdRng) -> SpectralField {
    SpectralField::from_canonical(band, |_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

/// `Σ_n f̂(n) e^{in·x}/(2π)` summed mode by mode.
fn direct_eval(f: &SpectralField, x1: f64, x2: f64) -> Complex64 {
    f.modes()
        .map(|(m, c)| c * Complex64::from_polar(1.0, m.n1 as f64 * x1 + m.n2 as f64 * x2) / (2.0 * PI))
        .sum()
}

/// `(f³)^(k) = (2π)^{-2} Σ_{a+b+c=k} f̂(a) f̂(b) f̂(c)`.
fn triple_convolution(f: &SpectralField) -> HashMap<(i32, i32), Complex64> {
    let modes: Vec<(Mode, Complex64)> = f.modes().collect();
    let mut out = HashMap::new();
    for (a, ca) in &modes {
        for (b, cb) in &modes {
            for (c, cc) in &modes {
                *out.entry((a.n1 + b.n1 + c.n1, a.n2 + b.n2 + c.n2)).or_insert(Complex64::new(0.0, 0.0)) +=
                    ca * cb * cc / (4.0 * PI * PI);
            }
        }
    }
    out
}

#[test]
fn physical_values_match_direct_series() {
    let mut rng = StdRng::seed_from_u64(11);
    let f = random_field(5, &mut rng);
    let m = 16;
    let grid = to_physical(&f, m).unwrap();
    for _ in 0..16 {
        let (j1, j2) = (rng.gen_range(0..m), rng.gen_range(0..m));
        let x = |j: usize| 2.0 * PI * j as f64 / m as f64;
        let want = direct_eval(&f, x(j1), x(j2));
        assert!(want.im.abs() < 1e-12);
        let got = grid.value(j1, j2);
        assert!((got - want.re).abs() <= 1e-12 * want.re.abs().max(1.0), "{got} vs {want}");
    }
}

#[test]
fn round_trip_recovers_coefficients() {
    let mut rng = StdRng::seed_from_u64(5);
    for band in [1, 3, 8] {
        let f = random_field(band, &mut rng);
        let m = min_grid(band);
        let back = to_spectral(&to_physical(&f, m).unwrap(), band).unwrap();
        for (mode, c) in f.modes() {
            assert!((back.get(mode) - c).norm() <= 1e-12 * c.norm().max(1.0));
        }
    }
}

#[test]
fn zero_field_has_zero_grid() {
    let g = to_physical(&SpectralField::zeros(3), 8).unwrap();
    assert!(g.values.iter().all(|v| *v == 0.0));
}

#[test]
fn projection_examples() {
    let f = SpectralField::single_mode(2, Mode::new(1, 0), Complex64::new(1.0, 0.0));
    assert_eq!(project(&f, 0).max_abs(), 0.0);
    assert_eq!(project(&f, 2), f);

    let mut g = SpectralField::zeros(2);
    for n in [Mode::ZERO, Mode::new(1, 0), Mode::new(0, 1), Mode::new(1, 1), Mode::new(1, -1)] {
        g.set(n, Complex64::new(1.0, 0.5));
    }
    let p = project(&g, 1);
    for (n, c) in p.modes() {
        let want = if n.norm_sq() <= 1 { g.get(n) } else { Complex64::new(0.0, 0.0) };
        assert_eq!(c, want, "mode {n:?}");
    }
}

#[test]
fn cube_of_constant_and_cosine() {
    let one = SpectralField::constant(1, 1.0);
    let c = cubic_dealiased(&one);
    assert_abs_diff_eq!(c.get(Mode::ZERO).re, 2.0 * PI, epsilon = 1e-12);

    // cos x1 has coefficient π on ±(1,0); cos³ = (3/4)cos x1 + (1/4)cos 3x1.
    let cosine = SpectralField::single_mode(1, Mode::new(1, 0), Complex64::new(PI, 0.0));
    let c = cubic_dealiased(&cosine);
    for (n, v) in c.modes() {
        let want = match (n.n1.abs(), n.n2) {
            (1, 0) => 0.75 * PI,
            (3, 0) => 0.25 * PI,
            _ => 0.0,
        };
        assert!((v - Complex64::new(want, 0.0)).norm() <= 1e-12, "mode {n:?}: {v}");
    }
}

#[test]
fn cube_matches_triple_convolution() {
    let mut rng = StdRng::seed_from_u64(3);
    for trial in 0..50 {
        let band = 1 + trial % 3;
        let f = random_field(band, &mut rng);
        let got = cubic_dealiased(&f);
        assert!(got.is_hermitian());
        let want = triple_convolution(&f);
        let scale = want.values().map(|c| c.norm()).fold(0.0, f64::max);
        for (n, v) in got.modes() {
            let w = want.get(&(n.n1, n.n2)).copied().unwrap_or_default();
            assert!((v - w).norm() <= 1e-10 * scale, "band {band}, mode {n:?}: {v} vs {w}");
        }
        // Every product mode lies in the ball of radius 3·band.
        for (k, w) in &want {
            if w.norm() > 1e-12 * scale {
                assert!(Mode::new(k.0, k.1).in_ball(3 * band));
            }
        }
    }
}

#[test]
fn sobolev_and_winfty_examples() {
    let f = SpectralField::single_mode(1, Mode::new(1, 0), Complex64::new(1.0, 0.0));
    for s in [-1.0, 0.0, 0.5, 2.0] {
        // Two modes ±(1,0) with ⟨n⟩² = 2 and unit amplitude.
        assert_abs_diff_eq!(sobolev_norm(&f, s), (2.0 * 2f64.powf(s)).sqrt(), epsilon = 1e-14);
    }
    assert_eq!(sobolev_norm(&SpectralField::zeros(3), 0.5), 0.0);

    for c in [-2.5, 0.0, 3.0] {
        let k = SpectralField::constant(2, c);
        for s in [-1.0, 0.0, 1.0] {
            assert_abs_diff_eq!(winfty_norm(&k, s, 2), c.abs(), epsilon = 1e-13);
        }
    }
    let cosine = SpectralField::single_mode(3, Mode::new(1, 0), Complex64::new(PI, 0.0));
    for oversample in [2, 3, 4] {
        assert_abs_diff_eq!(winfty_norm(&cosine, 0.0, oversample), 1.0, epsilon = 1e-13);
        assert_abs_diff_eq!(winfty_norm(&cosine, -1.0, oversample), 0.5f64.sqrt(), epsilon = 1e-13);
    }
}

#[test]
fn winfty_pair_matches_single_transforms() {
    let mut rng = StdRng::seed_from_u64(9);
    let (f, g) = (random_field(4, &mut rng), random_field(6, &mut rng));
    let (a, b) = winfty_norm_pair(&f, &g, -0.25, 2);
    // The pair transform uses the grid of the larger band.
    let m_f = winfty_norm(&f.with_band(6), -0.25, 2);
    assert_abs_diff_eq!(a, m_f, epsilon = 1e-12);
    assert_abs_diff_eq!(b, winfty_norm(&g, -0.25, 2), epsilon = 1e-12);
}

proptest! {
    #[test]
    fn parseval_on_the_grid(seed in 0u64..1000, band in 1usize..7) {
        let mut rng = StdRng::seed_from_u64(seed);
        let f = random_field(band, &mut rng);
        let m = min_grid(band);
        let grid = to_physical(&f, m).unwrap();
        let l2 = sobolev_norm(&f, 0.0).powi(2);
        let via_mean = grid.values.iter().map(|v| v * v).sum::<f64>() / (m * m) as f64 * 4.0 * PI * PI;
        prop_assert!((via_mean - l2).abs() <= 1e-10 * l2);
        prop_assert!((grid.l2_norm_sq() - l2).abs() <= 1e-10 * l2);
    }

    #[test]
    fn projection_contracts_every_norm(seed in 0u64..1000, band in 1usize..8, n in 0usize..8, s in -2.0f64..2.0) {
        let mut rng = StdRng::seed_from_u64(seed);
        let f = random_field(band, &mut rng);
        prop_assert!(sobolev_norm(&project(&f, n), s) <= sobolev_norm(&f, s) * (1.0 + 1e-15));
    }

    #[test]
    fn outputs_stay_real(seed in 0u64..1000, band in 1usize..5) {
        let mut rng = StdRng::seed_from_u64(seed);
        let f = random_field(band, &mut rng);
        prop_assert!(f.is_hermitian());
        prop_assert!(cubic_dealiased(&f).is_hermitian());
        prop_assert!(project(&f, band / 2).is_hermitian());
        let back = to_spectral(&to_physical(&f, min_grid(band) + 3).unwrap(), band).unwrap();
        prop_assert!(back.is_hermitian());
    }

    #[test]
    fn round_trip_on_odd_grids(seed in 0u64..1000, band in 1usize..6, extra in 0usize..5) {
        let mut rng = StdRng::seed_from_u64(seed);
        let f = random_field(band, &mut rng);
        let back = to_spectral(&to_physical(&f, min_grid(band) + extra).unwrap(), band).unwrap();
        for (mode, c) in f.modes() {
            prop_assert!((back.get(mode) - c).norm() <= 1e-12 * c.norm().max(1.0));
        }
    }
}
