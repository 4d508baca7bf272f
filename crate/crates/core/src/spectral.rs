//! Fourier representation of real fields on the torus (R/2πZ)².
//!
//! Fields are stored by their coefficients in the orthonormal basis
//! `e_n(x) = (2π)^{-1} e^{i n·x}` and truncated to the integer ball
//! `|n| ≤ band`. Modes inside the square `[-band, band]²` but outside the ball
//! are structural zeros. Every field is real, so coefficients satisfy
//! `f̂(-n) = conj(f̂(n))`; the setters maintain this pairing.

use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};
use std::sync::Arc;

use num_complex::Complex64;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// An integer frequency `n = (n1, n2)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mode {
    pub n1: i32,
    pub n2: i32,
}

impl Mode {
    pub const ZERO: Mode = Mode { n1: 0, n2: 0 };

    pub const fn new(n1: i32, n2: i32) -> Self {
        Mode { n1, n2 }
    }

    /// `|n|²` in exact integer arithmetic.
    pub fn norm_sq(&self) -> i64 {
        let (a, b) = (self.n1 as i64, self.n2 as i64);
        a * a + b * b
    }

    /// Japanese bracket `⟨n⟩ = (1 + |n|²)^{1/2}`.
    pub fn bracket(&self) -> f64 {
        (1.0 + self.norm_sq() as f64).sqrt()
    }

    pub fn neg(&self) -> Mode {
        Mode::new(-self.n1, -self.n2)
    }

    /// Membership in the ball `|n| ≤ band`.
    pub fn in_ball(&self, band: usize) -> bool {
        self.norm_sq() <= (band as i64) * (band as i64)
    }

    /// True for the representative of `{n, -n}` that is drawn when sampling:
    /// the lexicographically larger of the two. The zero mode is its own pair
    /// and is not canonical in this sense.
    pub fn is_canonical(&self) -> bool {
        self.n1 > 0 || (self.n1 == 0 && self.n2 > 0)
    }
}

/// All modes of the ball `|n| ≤ band`, ordered by `(|n|², n1, n2)`.
///
/// The ordering is a prefix order: the ball of a smaller band is a prefix of
/// the list for a larger band.
pub fn ball_modes(band: usize) -> Vec<Mode> {
    let b = band as i32;
    let mut modes: Vec<Mode> = (-b..=b)
        .flat_map(|n1| (-b..=b).map(move |n2| Mode::new(n1, n2)))
        .filter(|m| m.in_ball(band))
        .collect();
    modes.sort_by_key(|m| (m.norm_sq(), m.n1, m.n2));
    modes
}

/// The zero mode followed by the canonical representative of every `±n` pair
/// in the ball, in the prefix order of [`ball_modes`].
pub fn canonical_modes(band: usize) -> Vec<Mode> {
    ball_modes(band)
        .into_iter()
        .filter(|m| *m == Mode::ZERO || m.is_canonical())
        .collect()
}

/// Flat indices of `n` and `-n` in the square layout of a band-`band` field.
pub(crate) fn slot_pair(band: usize, n: Mode) -> (usize, usize) {
    let (b, side) = (band as i32, 2 * band + 1);
    let flat = |m: Mode| (m.n1 + b) as usize * side + (m.n2 + b) as usize;
    (flat(n), flat(n.neg()))
}

/// The zero mode and the canonical representatives of the ball in row-major
/// order of the square layout.
pub(crate) fn canonical_unordered(band: usize) -> impl Iterator<Item = Mode> {
    let b = band as i32;
    (0..=b)
        .flat_map(move |n1| (if n1 == 0 { 0 } else { -b }..=b).map(move |n2| Mode::new(n1, n2)))
        .filter(move |m| m.in_ball(band))
}

/// A real field on the torus, band-limited to the ball `|n| ≤ band`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    band: usize,
    /// Square layout, row `n1 + band`, column `n2 + band`.
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(band: usize) -> Self {
        let side = 2 * band + 1;
        SpectralField {
            band,
            coeffs: vec![Complex64::new(0.0, 0.0); side * side],
        }
    }

    /// Builds a field from a function evaluated on the zero mode and on the
    /// canonical representatives; the conjugate partners are filled in and the
    /// zero mode keeps only its real part.
    pub fn from_canonical(band: usize, mut f: impl FnMut(Mode) -> Complex64) -> Self {
        let mut field = SpectralField::zeros(band);
        for m in canonical_unordered(band) {
            field.set(m, f(m));
        }
        field
    }

    /// A field with amplitude `a` on `n` and `conj(a)` on `-n`.
    pub fn single_mode(band: usize, n: Mode, a: Complex64) -> Self {
        let mut field = SpectralField::zeros(band);
        field.set(n, a);
        field
    }

    /// The constant field `c` (coefficient `2πc` on the zero mode).
    pub fn constant(band: usize, c: f64) -> Self {
        SpectralField::single_mode(band, Mode::ZERO, Complex64::new(2.0 * PI * c, 0.0))
    }

    pub fn band(&self) -> usize {
        self.band
    }

    fn side(&self) -> usize {
        2 * self.band + 1
    }

    /// Flat index of `n` in the square layout, if it lies in the square.
    pub fn index(&self, n: Mode) -> Option<usize> {
        let b = self.band as i32;
        if n.n1.abs() > b || n.n2.abs() > b {
            return None;
        }
        Some((n.n1 + b) as usize * self.side() + (n.n2 + b) as usize)
    }

    /// Mode at a flat index of the square layout.
    pub fn mode_at(&self, idx: usize) -> Mode {
        let b = self.band as i32;
        let side = self.side();
        Mode::new((idx / side) as i32 - b, (idx % side) as i32 - b)
    }

    /// Coefficient of `n`; zero outside the ball.
    pub fn get(&self, n: Mode) -> Complex64 {
        match self.index(n) {
            Some(i) if n.in_ball(self.band) => self.coeffs[i],
            _ => Complex64::new(0.0, 0.0),
        }
    }

    /// Sets `n` to `a` and `-n` to `conj(a)`; on the zero mode only the real
    /// part is kept. Panics if `n` is outside the ball.
    pub fn set(&mut self, n: Mode, a: Complex64) {
        assert!(n.in_ball(self.band), "mode {n:?} outside band {}", self.band);
        let i = self.index(n).unwrap();
        if n == Mode::ZERO {
            self.coeffs[i] = Complex64::new(a.re, 0.0);
        } else {
            let j = self.index(n.neg()).unwrap();
            self.coeffs[i] = a;
            self.coeffs[j] = a.conj();
        }
    }

    /// Raw square-layout coefficients.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// [`SpectralField::set`] on slots precomputed by [`slot_pair`].
    pub(crate) fn set_slots(&mut self, (i, j): (usize, usize), a: Complex64) {
        if i == j {
            self.coeffs[i] = Complex64::new(a.re, 0.0);
        } else {
            self.coeffs[i] = a;
            self.coeffs[j] = a.conj();
        }
    }

    /// Iterates over `(mode, coefficient)` for every mode of the ball.
    pub fn modes(&self) -> impl Iterator<Item = (Mode, Complex64)> + '_ {
        self.coeffs.iter().enumerate().filter_map(move |(i, c)| {
            let m = self.mode_at(i);
            m.in_ball(self.band).then_some((m, *c))
        })
    }

    /// Re-embeds the field into another band, truncating to the smaller ball
    /// when shrinking.
    pub fn with_band(&self, band: usize) -> SpectralField {
        let mut out = SpectralField::zeros(band);
        let keep = band.min(self.band) as i32;
        for n1 in -keep..=keep {
            for n2 in -keep..=keep {
                let m = Mode::new(n1, n2);
                if m.in_ball(band) && m.in_ball(self.band) {
                    let i = out.index(m).unwrap();
                    out.coeffs[i] = self.coeffs[self.index(m).unwrap()];
                }
            }
        }
        out
    }

    /// Multiplies every coefficient by `c`.
    pub fn scaled(&self, c: f64) -> SpectralField {
        SpectralField {
            band: self.band,
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    /// Applies the real radial multiplier `symbol(|n|²)` mode-wise.
    pub fn map_symbol(&self, symbol: impl Fn(i64) -> f64) -> SpectralField {
        let mut out = self.clone();
        for (i, c) in out.coeffs.iter_mut().enumerate() {
            let m = self.mode_at(i);
            *c *= symbol(m.norm_sq());
        }
        out
    }

    /// `self += c·other`, where `other` must not exceed the band of `self`.
    pub fn axpy(&mut self, c: f64, other: &SpectralField) {
        assert!(other.band <= self.band, "axpy into a smaller band");
        if other.band == self.band {
            for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
                *a += b * c;
            }
        } else {
            for (m, b) in other.modes() {
                let i = self.index(m).unwrap();
                self.coeffs[i] += b * c;
            }
        }
    }

    /// Exact Hermitian symmetry check (no tolerance).
    pub fn is_hermitian(&self) -> bool {
        self.coeffs.iter().enumerate().all(|(i, c)| {
            let m = self.mode_at(i);
            let j = self.index(m.neg()).unwrap();
            *c == self.coeffs[j].conj()
        })
    }

    /// True when every coefficient is finite.
    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Largest coefficient modulus.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

fn combine(a: &SpectralField, b: &SpectralField, sign: f64) -> SpectralField {
    let band = a.band.max(b.band);
    let mut out = a.with_band(band);
    out.axpy(sign, b);
    out
}

impl Add for &SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: &SpectralField) -> SpectralField {
        combine(self, rhs, 1.0)
    }
}

impl Sub for &SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: &SpectralField) -> SpectralField {
        combine(self, rhs, -1.0)
    }
}

impl Mul<f64> for &SpectralField {
    type Output = SpectralField;
    fn mul(self, c: f64) -> SpectralField {
        self.scaled(c)
    }
}

/// Position and velocity of a solution, `(u, ∂_t u)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PairState {
    pub pos: SpectralField,
    pub vel: SpectralField,
}

impl PairState {
    pub fn new(pos: SpectralField, vel: SpectralField) -> Self {
        assert_eq!(pos.band(), vel.band(), "pos and vel must share a band");
        PairState { pos, vel }
    }

    pub fn zeros(band: usize) -> Self {
        PairState::new(SpectralField::zeros(band), SpectralField::zeros(band))
    }

    pub fn band(&self) -> usize {
        self.pos.band()
    }

    pub fn with_band(&self, band: usize) -> PairState {
        PairState::new(self.pos.with_band(band), self.vel.with_band(band))
    }

    /// `(‖pos‖²_{H^s} + ‖vel‖²_{H^{s-1}})^{1/2}`, the norm of `H^s × H^{s-1}`.
    pub fn energy_norm(&self, s: f64) -> f64 {
        (sobolev_norm(&self.pos, s).powi(2) + sobolev_norm(&self.vel, s - 1.0).powi(2)).sqrt()
    }
}

/// Values of a real field at the collocation points `x_j = 2πj/M`,
/// stored row-major with row index `j1`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhysicalGrid {
    pub m: usize,
    pub values: Vec<f64>,
}

impl PhysicalGrid {
    pub fn value(&self, j1: usize, j2: usize) -> f64 {
        self.values[j1 * self.m + j2]
    }

    /// Grid mean of `|f|²` times the torus area `(2π)²`.
    pub fn l2_norm_sq(&self) -> f64 {
        let mean = self.values.iter().map(|v| v * v).sum::<f64>() / (self.m * self.m) as f64;
        4.0 * PI * PI * mean
    }
}

/// Smallest integer `≥ min` of the form `2^a 3^b 5^c`.
pub fn fft_size_at_least(min: usize) -> usize {
    let mut n = min.max(1);
    loop {
        let mut r = n;
        for p in [2, 3, 5] {
            while r.is_multiple_of(p) {
                r /= p;
            }
        }
        if r == 1 {
            return n;
        }
        n += 1;
    }
}

/// Minimum grid size for an alias-free representation of a band-`b` field.
pub fn min_grid(band: usize) -> usize {
    2 * band + 2
}

/// A reusable 2D transform of size `M × M` with scratch buffers.
///
/// Physical values produced by [`Fft2::inverse`] are stored transposed
/// (row index `j2`); pointwise work does not care and [`Fft2::forward`]
/// expects the same layout.
pub(crate) struct Fft2 {
    m: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
    pub(crate) buf: Vec<Complex64>,
    tmp: Vec<Complex64>,
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
    static ENGINES: RefCell<HashMap<usize, Fft2>> = RefCell::new(HashMap::new());
    static REAL_PLANNER: RefCell<RealFftPlanner<f64>> = RefCell::new(RealFftPlanner::new());
    static REAL_ENGINES: RefCell<HashMap<usize, RealFft2>> = RefCell::new(HashMap::new());
}

/// Runs `f` with a per-thread cached transform of size `m`.
pub(crate) fn with_fft2<R>(m: usize, f: impl FnOnce(&mut Fft2) -> R) -> R {
    let mut engine = ENGINES
        .with(|e| e.borrow_mut().remove(&m))
        .unwrap_or_else(|| Fft2::new(m));
    let out = f(&mut engine);
    ENGINES.with(|e| e.borrow_mut().insert(m, engine));
    out
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], m: usize) {
    const BLOCK: usize = 32;
    for ib in (0..m).step_by(BLOCK) {
        for jb in (0..m).step_by(BLOCK) {
            for i in ib..(ib + BLOCK).min(m) {
                for j in jb..(jb + BLOCK).min(m) {
                    dst[j * m + i] = src[i * m + j];
                }
            }
        }
    }
}

fn wrap(n: i32, m: usize) -> usize {
    n.rem_euclid(m as i32) as usize
}

impl Fft2 {
    pub(crate) fn new(m: usize) -> Self {
        let (fwd, inv) = PLANNER.with(|p| {
            let mut p = p.borrow_mut();
            (p.plan_fft_forward(m), p.plan_fft_inverse(m))
        });
        let scratch_len = fwd
            .get_inplace_scratch_len()
            .max(inv.get_inplace_scratch_len());
        Fft2 {
            m,
            fwd,
            inv,
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
            buf: vec![Complex64::new(0.0, 0.0); m * m],
            tmp: vec![Complex64::new(0.0, 0.0); m * m],
        }
    }

    /// Rows `n1` with `|n1| ≤ band` occupy two contiguous blocks after wrapping.
    fn band_rows(&mut self, band: usize, forward: bool) {
        let m = self.m;
        let plan = if forward { &self.fwd } else { &self.inv };
        if 2 * band + 1 >= m {
            plan.process_with_scratch(&mut self.tmp, &mut self.scratch);
            return;
        }
        plan.process_with_scratch(&mut self.tmp[..(band + 1) * m], &mut self.scratch);
        plan.process_with_scratch(&mut self.tmp[(m - band) * m..], &mut self.scratch);
    }

    /// Loads `f + i·g` (both Hermitian) into the spectral buffer and
    /// transforms to physical space: afterwards `buf[j2·M + j1]` holds
    /// `f(x_j) + i·g(x_j)`.
    pub(crate) fn inverse(&mut self, f: &SpectralField, g: Option<&SpectralField>) {
        let m = self.m;
        let band = f.band().max(g.map_or(0, |g| g.band()));
        debug_assert!(m >= min_grid(band));
        self.tmp.iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
        let norm = 1.0 / (2.0 * PI);
        for (mode, c) in f.modes() {
            self.tmp[wrap(mode.n1, m) * m + wrap(mode.n2, m)] += c * norm;
        }
        if let Some(g) = g {
            let i_norm = Complex64::new(0.0, norm);
            for (mode, c) in g.modes() {
                self.tmp[wrap(mode.n1, m) * m + wrap(mode.n2, m)] += c * i_norm;
            }
        }
        self.band_rows(band, false);
        transpose(&self.tmp, &mut self.buf, m);
        self.inv.process_with_scratch(&mut self.buf, &mut self.scratch);
    }

    /// Forward transform of the physical values in `buf` (transposed layout).
    /// Afterwards `tmp` holds `2π/M²·FFT` in `[n1][n2]` layout for rows with
    /// `|n1| ≤ band`.
    fn forward_raw(&mut self, band: usize) {
        let m = self.m;
        self.fwd.process_with_scratch(&mut self.buf, &mut self.scratch);
        transpose(&self.buf, &mut self.tmp, m);
        self.band_rows(band, true);
    }

    fn raw_coeff(&self, n: Mode) -> Complex64 {
        let m = self.m;
        self.tmp[wrap(n.n1, m) * m + wrap(n.n2, m)] * (2.0 * PI / (m * m) as f64)
    }

    /// Forward transform of a real field held in `buf.re`, returning the
    /// coefficients on the ball `|n| ≤ band`.
    pub(crate) fn forward(&mut self, band: usize) -> SpectralField {
        self.forward_raw(band);
        SpectralField::from_canonical(band, |n| self.raw_coeff(n))
    }

    /// Forward transform of two real fields packed as `buf = a + i·b`.
    pub(crate) fn forward_pair(&mut self, band_a: usize, band_b: usize) -> (SpectralField, SpectralField) {
        self.forward_raw(band_a.max(band_b));
        let half = Complex64::new(0.5, 0.0);
        let a = SpectralField::from_canonical(band_a, |n| {
            (self.raw_coeff(n) + self.raw_coeff(n.neg()).conj()) * half
        });
        let b = SpectralField::from_canonical(band_b, |n| {
            (self.raw_coeff(n) - self.raw_coeff(n.neg()).conj()) * Complex64::new(0.0, -0.5)
        });
        (a, b)
    }
}

/// A 2D transform of real grid functions of size `M × M`: complex transforms
/// along `n1` for the half plane `n2 ≥ 0`, real transforms along `x2`.
struct RealFft2 {
    m: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    r2c: Arc<dyn RealToComplex<f64>>,
    c2r: Arc<dyn ComplexToReal<f64>>,
    scratch: Vec<Complex64>,
    /// Column `n2` occupies `cols[n2·M..(n2 + 1)·M]`, indexed by wrapped `n1`.
    cols: Vec<Complex64>,
    /// Row `j1` holds the half spectrum `n2 = 0..=M/2`.
    half: Vec<Complex64>,
    /// Physical values, row-major with row index `j1`.
    grid: Vec<f64>,
}

impl RealFft2 {
    fn new(m: usize) -> Self {
        let (fwd, inv) = PLANNER.with(|p| {
            let mut p = p.borrow_mut();
            (p.plan_fft_forward(m), p.plan_fft_inverse(m))
        });
        let (r2c, c2r) = REAL_PLANNER.with(|p| {
            let mut p = p.borrow_mut();
            (p.plan_fft_forward(m), p.plan_fft_inverse(m))
        });
        let scratch_len = [
            fwd.get_inplace_scratch_len(),
            inv.get_inplace_scratch_len(),
            r2c.get_scratch_len(),
            c2r.get_scratch_len(),
        ]
        .into_iter()
        .max()
        .unwrap_or(0);
        let half_width = m / 2 + 1;
        RealFft2 {
            m,
            fwd,
            inv,
            r2c,
            c2r,
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
            cols: vec![Complex64::new(0.0, 0.0); half_width * m],
            half: vec![Complex64::new(0.0, 0.0); half_width * m],
            grid: vec![0.0; m * m],
        }
    }

    /// Evaluates `f` on the grid into `grid`.
    fn inverse(&mut self, f: &SpectralField) {
        let (m, hw) = (self.m, self.m / 2 + 1);
        let band = f.band();
        debug_assert!(m >= min_grid(band));
        let cols = &mut self.cols[..(band + 1) * m];
        cols.iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
        let norm = 1.0 / (2.0 * PI);
        for (mode, c) in f.modes().filter(|(n, _)| n.n2 >= 0) {
            cols[mode.n2 as usize * m + wrap(mode.n1, m)] = c * norm;
        }
        self.inv.process_with_scratch(cols, &mut self.scratch);
        let rows = self.half.chunks_exact_mut(hw).zip(self.grid.chunks_exact_mut(m));
        for (j1, (row, out)) in rows.enumerate() {
            for (n2, c) in row[..=band].iter_mut().enumerate() {
                *c = cols[n2 * m + j1];
            }
            // The inverse real transform overwrites its input.
            row[band + 1..].iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
            // The n2 = 0 column is real up to rounding.
            row[0].im = 0.0;
            self.c2r
                .process_with_scratch(row, out, &mut self.scratch)
                .expect("half spectrum has real end points");
        }
    }

    /// Coefficients on the ball `|n| ≤ band` of the values in `grid`, which
    /// are overwritten.
    fn forward(&mut self, band: usize) -> SpectralField {
        let (m, hw) = (self.m, self.m / 2 + 1);
        debug_assert!(m >= min_grid(band));
        for (row, out) in self.grid.chunks_exact_mut(m).zip(self.half.chunks_exact_mut(hw)) {
            self.r2c
                .process_with_scratch(row, out, &mut self.scratch)
                .expect("buffer lengths match the plan");
        }
        let cols = &mut self.cols[..(band + 1) * m];
        for (n2, col) in cols.chunks_exact_mut(m).enumerate() {
            for (j1, c) in col.iter_mut().enumerate() {
                *c = self.half[j1 * hw + n2];
            }
        }
        self.fwd.process_with_scratch(cols, &mut self.scratch);
        let scale = 2.0 * PI / (m * m) as f64;
        let cols = &self.cols;
        SpectralField::from_canonical(band, |n| {
            if n.n2 >= 0 {
                cols[n.n2 as usize * m + wrap(n.n1, m)] * scale
            } else {
                cols[(-n.n2) as usize * m + wrap(-n.n1, m)].conj() * scale
            }
        })
    }
}

/// Projection onto the ball `|n| ≤ out_band` of `g(f(x))` sampled on an
/// `M × M` grid. For a polynomial `g` of degree `d` the result is exact when
/// `M > d·band(f) + out_band` (see [`product_grid`]).
pub(crate) fn pointwise_real(f: &SpectralField, m: usize, out_band: usize, g: impl Fn(f64) -> f64) -> SpectralField {
    let mut engine = REAL_ENGINES
        .with(|e| e.borrow_mut().remove(&m))
        .unwrap_or_else(|| RealFft2::new(m));
    engine.inverse(f);
    engine.grid.iter_mut().for_each(|x| *x = g(*x));
    let out = engine.forward(out_band);
    REAL_ENGINES.with(|e| e.borrow_mut().insert(m, engine));
    out
}

fn check_grid(m: usize, band: usize) -> Result<()> {
    let need = min_grid(band);
    if m < need {
        return Err(Error::GridTooSmall { m, band, need });
    }
    Ok(())
}

/// Dirichlet projection onto the ball `|n| ≤ n`, keeping the band of `f`.
pub fn project(f: &SpectralField, n: usize) -> SpectralField {
    let mut out = f.clone();
    for (i, c) in out.coeffs.iter_mut().enumerate() {
        if !f.mode_at(i).in_ball(n) {
            *c = Complex64::new(0.0, 0.0);
        }
    }
    out
}

/// Evaluates `f` on the `M × M` collocation grid.
pub fn to_physical(f: &SpectralField, m: usize) -> Result<PhysicalGrid> {
    check_grid(m, f.band())?;
    Ok(with_fft2(m, |eng| {
        eng.inverse(f, None);
        let mut values = vec![0.0; m * m];
        for j2 in 0..m {
            for j1 in 0..m {
                values[j1 * m + j2] = eng.buf[j2 * m + j1].re;
            }
        }
        PhysicalGrid { m, values }
    }))
}

/// Coefficients on the ball `|n| ≤ band` of the grid function `grid`.
pub fn to_spectral(grid: &PhysicalGrid, band: usize) -> Result<SpectralField> {
    let m = grid.m;
    check_grid(m, band)?;
    Ok(with_fft2(m, |eng| {
        for j1 in 0..m {
            for j2 in 0..m {
                eng.buf[j2 * m + j1] = Complex64::new(grid.values[j1 * m + j2], 0.0);
            }
        }
        eng.forward(band)
    }))
}

/// Grid size for an exact product of total degree `degree` of band-`band`
/// factors, keeping the output band `out_band`: aliases of the product land at
/// distance `M` and must miss the kept band, i.e. `M > degree·band + out_band`.
/// One extra point is added to match the `2·band + 2` convention of
/// [`min_grid`].
pub fn product_grid(band: usize, degree: usize, out_band: usize) -> usize {
    fft_size_at_least((degree * band + out_band + 2).max(min_grid(out_band.max(band))))
}

/// Exact coefficients of `f³` on its full band `3·band`.
pub fn cubic_dealiased(f: &SpectralField) -> SpectralField {
    let band = f.band();
    let m = product_grid(band, 3, 3 * band);
    with_fft2(m, |eng| {
        eng.inverse(f, None);
        for c in eng.buf.iter_mut() {
            *c = Complex64::new(c.re * c.re * c.re, 0.0);
        }
        eng.forward(3 * band)
    })
}

/// `(Σ ⟨n⟩^{2s} |f̂(n)|²)^{1/2}`.
pub fn sobolev_norm(f: &SpectralField, s: f64) -> f64 {
    f.modes()
        .map(|(m, c)| {
            let base = 1.0 + m.norm_sq() as f64;
            let w = if s.fract() == 0.0 { base.powi(s as i32) } else { base.powf(s) };
            w * c.norm_sqr()
        })
        .sum::<f64>()
        .sqrt()
}

/// Grid maximum of `|⟨∇⟩^s f|` on `M = oversample·(2·band + 2)` points per
/// dimension; converges to the `W^{s,∞}` norm from below as `oversample` grows.
pub fn winfty_norm(f: &SpectralField, s: f64, oversample: usize) -> f64 {
    assert!(oversample >= 2, "oversample must be at least 2");
    let g = f.map_symbol(|k| (1.0 + k as f64).powf(0.5 * s));
    let m = oversample * min_grid(f.band());
    with_fft2(m, |eng| {
        eng.inverse(&g, None);
        eng.buf.iter().map(|c| c.re.abs()).fold(0.0, f64::max)
    })
}

/// `W^{s,∞}` grid maxima of two fields sharing one transform.
pub fn winfty_norm_pair(f: &SpectralField, g: &SpectralField, s: f64, oversample: usize) -> (f64, f64) {
    assert!(oversample >= 2, "oversample must be at least 2");
    let mult = |k: i64| (1.0 + k as f64).powf(0.5 * s);
    let (fs, gs) = (f.map_symbol(mult), g.map_symbol(mult));
    let m = oversample * min_grid(f.band().max(g.band()));
    with_fft2(m, |eng| {
        eng.inverse(&fs, Some(&gs));
        eng.buf.iter().fold((0.0f64, 0.0f64), |(a, b), c| {
            (a.max(c.re.abs()), b.max(c.im.abs()))
        })
    })
}
