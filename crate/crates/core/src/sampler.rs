//! Seeded Gaussian sampling of the initial data and of the noise.
//!
//! Every draw is a pure function of `(seed, replica, role, step, mode)`.
//! A [`NoiseStream`] selects a ChaCha8 key from `(seed, replica, role)`, the
//! step index selects the ChaCha stream, and each mode owns a fixed slot of
//! four 64-bit words at a position given by its rank in the prefix order of
//! [`canonical_modes`]. Because that order does not depend on the band, the
//! same seed drives the low modes identically at every truncation level.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::renorm::RenormConstants;
use crate::spectral::{canonical_modes, Mode, PairState, SpectralField};

/// Independent families of random variables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Role {
    /// `g_n`, the position part of the initial data.
    InitialG,
    /// `h_n`, the velocity part of the initial data.
    InitialH,
    /// Increments of the Brownian motions `β_n`.
    Wiener,
}

impl Role {
    fn tag(self) -> u64 {
        match self {
            Role::InitialG => 0x6700_0001,
            Role::InitialH => 0x6800_0002,
            Role::Wiener => 0x7700_0003,
        }
    }
}

/// Key of a reproducible family of Gaussian draws.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct NoiseStream {
    pub seed: u64,
    pub replica: u64,
    pub role: Role,
}

const WORDS_PER_SLOT: u128 = 8;

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Box-Muller on two raw words; the first uniform lies in (0, 1].
fn box_muller(a: u64, b: u64) -> (f64, f64) {
    let u1 = ((a >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64);
    let u2 = (b >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    let r = (-2.0 * u1.ln()).sqrt();
    let (s, c) = (2.0 * PI * u2).sin_cos();
    (r * c, r * s)
}

impl NoiseStream {
    pub fn new(seed: u64, replica: u64, role: Role) -> Self {
        NoiseStream { seed, replica, role }
    }

    pub fn with_role(&self, role: Role) -> Self {
        NoiseStream { role, ..*self }
    }

    fn rng(&self, step: u64) -> ChaCha8Rng {
        let mut s = splitmix64(self.seed ^ splitmix64(self.replica ^ splitmix64(self.role.tag())));
        let mut key = [0u8; 32];
        for chunk in key.chunks_mut(8) {
            s = splitmix64(s);
            chunk.copy_from_slice(&s.to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(step);
        rng
    }

    /// Four independent standard normals for each of `count` consecutive slots
    /// starting at `first`, at the given step.
    pub fn slot_normals(&self, step: u64, first: usize, count: usize) -> Vec<[f64; 4]> {
        let mut rng = self.rng(step);
        rng.set_word_pos(first as u128 * WORDS_PER_SLOT);
        (0..count)
            .map(|_| {
                let w = [rng.next_u64(), rng.next_u64(), rng.next_u64(), rng.next_u64()];
                let (a, b) = box_muller(w[0], w[1]);
                let (c, d) = box_muller(w[2], w[3]);
                [a, b, c, d]
            })
            .collect()
    }
}

/// A complex standard Gaussian, `E|g|² = 1`, real for the zero mode.
fn complex_normal(mode: Mode, xi: &[f64; 4], offset: usize) -> Complex64 {
    if mode == Mode::ZERO {
        Complex64::new(xi[offset], 0.0)
    } else {
        Complex64::new(xi[offset], xi[offset + 1]) * FRAC_1_SQRT_2
    }
}

/// Standard complex Gaussian field `{g_n}_{|n|≤N}`, Hermitian-paired.
pub fn standard_field(band: usize, stream: &NoiseStream, step: u64) -> SpectralField {
    let modes = canonical_modes(band);
    let xi = stream.slot_normals(step, 0, modes.len());
    let mut f = SpectralField::zeros(band);
    for (m, x) in modes.iter().zip(&xi) {
        f.set(*m, complex_normal(*m, x, 0));
    }
    f
}

/// Initial data of the stationary linear solution.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianPair {
    pub z0: SpectralField,
    pub z1: SpectralField,
}

impl GaussianPair {
    pub fn into_state(self) -> PairState {
        PairState::new(self.z0, self.z1)
    }
}

/// A draw from the invariant Gaussian measure:
/// `ẑ0(n) = (α/√2) g_n/⟨n⟩_N`, `ẑ1(n) = (α/√2) h_n`, with `α²` replaced by
/// `α²/γ` under damping `γ`. The roles of `stream` are replaced by
/// [`Role::InitialG`] and [`Role::InitialH`].
pub fn sample_initial(rc: &RenormConstants, stream: &NoiseStream) -> GaussianPair {
    let amp = (rc.noise_scale_sq() / 2.0).sqrt();
    let g = standard_field(rc.n, &stream.with_role(Role::InitialG), 0);
    let h = standard_field(rc.n, &stream.with_role(Role::InitialH), 0);
    let z0 = g.map_symbol(|k| amp / rc.bracket_n_sq(k).sqrt());
    let z1 = h.scaled(amp);
    GaussianPair { z0, z1 }
}

/// Increment `ΔŴ(n)` of the cylindrical Wiener process over a step of length
/// `dt`, complex Gaussian with `E|ΔŴ(n)|² = dt` and real at `n = 0`.
pub fn wiener_increment(band: usize, dt: f64, stream: &NoiseStream, step: u64) -> SpectralField {
    assert!(dt > 0.0, "dt must be positive");
    standard_field(band, &stream.with_role(Role::Wiener), step).scaled(dt.sqrt())
}
