//! The damped linear wave flow `∂_t²u - Δu + γ∂_t u + λu = α ξ`, mode by mode.
//!
//! Each Fourier mode is a damped oscillator `û'' + γû' + k²û = α β̇_n` with
//! `k² = λ + |n|²`. Writing `a = γ/2` and `ω² = k² - a²` (the symbol `D_N²`),
//! the homogeneous solution operator over time `t` is
//!
//! ```text
//! E(t) = e^{-at} [[C + aS, S], [-k² S, C - aS]],
//! ```
//!
//! with `C = cos(ωt)`, `S = sin(ωt)/ω`. When `ω² < 0` these become `cosh` and
//! `sinh/|ω|`, and for `|ω t| < 1e-4` a series in `ω²t²` is used. The second
//! column of `E(t)` is the Duhamel kernel `(D_N(t), ∂_t D_N(t))`.
//!
//! The stochastic convolution over one step is Gaussian with covariance
//! `Q(h) = α² ∫_0^h K(r) K(r)^T dr`, evaluated in closed form, so that the
//! stationary linear solution is advanced exactly in law.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use crate::renorm::RenormConstants;
use crate::sampler::{NoiseStream, Role};
use crate::spectral::{canonical_modes, canonical_unordered, slot_pair, Mode, PairState};

/// `(C(t), S(t))` for a given `ω²` of either sign.
pub fn cos_sinc(omega_sq: f64, t: f64) -> (f64, f64) {
    let x = omega_sq * t * t;
    if x.abs() < 1e-8 {
        let c = 1.0 - x / 2.0 + x * x / 24.0;
        let s = t * (1.0 - x / 6.0 + x * x / 120.0);
        (c, s)
    } else if omega_sq > 0.0 {
        let w = omega_sq.sqrt();
        let (sn, cs) = (w * t).sin_cos();
        (cs, sn / w)
    } else {
        let w = (-omega_sq).sqrt();
        ((w * t).cosh(), (w * t).sinh() / w)
    }
}

/// Entries `[e11, e12, e21, e22]` of `E(t)` for `k² = λ + |n|²`.
pub fn propagator_matrix(k_sq: f64, damping: f64, t: f64) -> [f64; 4] {
    let a = damping / 2.0;
    let (c, s) = cos_sinc(k_sq - a * a, t);
    let e = (-a * t).exp();
    [e * (c + a * s), e * s, -e * k_sq * s, e * (c - a * s)]
}

/// Multipliers `⟨n⟩_N` and `D_N(n)` tabulated by `|n|²` for `|n| ≤ 3N`.
#[derive(Clone, Debug)]
pub struct ModeSymbols {
    pub n: usize,
    pub lambda: f64,
    pub damping: f64,
    jn: Vec<f64>,
    d_sq: Vec<f64>,
}

impl ModeSymbols {
    fn lookup(table: &[f64], mode: Mode) -> f64 {
        table[mode.norm_sq() as usize]
    }

    /// `⟨n⟩_N = (λ + |n|²)^{1/2}`.
    pub fn jn(&self, mode: Mode) -> f64 {
        Self::lookup(&self.jn, mode)
    }

    /// `D_N(n)² = λ - γ²/4 + |n|²`, negative only for a small mass.
    pub fn d_sq(&self, mode: Mode) -> f64 {
        Self::lookup(&self.d_sq, mode)
    }

    /// `D_N(n)` when real.
    pub fn d(&self, mode: Mode) -> Option<f64> {
        let d2 = self.d_sq(mode);
        (d2 >= 0.0).then(|| d2.sqrt())
    }

    pub fn k_sq(&self, mode: Mode) -> f64 {
        self.lambda + mode.norm_sq() as f64
    }

    /// `E_n(t)` as `[e11, e12, e21, e22]`; valid for negative `t` as well.
    pub fn propagator(&self, mode: Mode, t: f64) -> [f64; 4] {
        propagator_matrix(self.k_sq(mode), self.damping, t)
    }

    /// Duhamel kernel `(D_N(t), ∂_t D_N(t))` of a mode.
    pub fn kernel(&self, mode: Mode, t: f64) -> (f64, f64) {
        let e = self.propagator(mode, t);
        (e[1], e[3])
    }
}

/// Tabulates the symbols of the flow defined by `rc`.
pub fn propagator_symbols(rc: &RenormConstants) -> ModeSymbols {
    let kmax = 9 * rc.n * rc.n;
    let a = rc.damping / 2.0;
    let jn = (0..=kmax).map(|k| (rc.lambda + k as f64).sqrt()).collect();
    let d_sq = (0..=kmax).map(|k| rc.lambda - a * a + k as f64).collect();
    ModeSymbols {
        n: rc.n,
        lambda: rc.lambda,
        damping: rc.damping,
        jn,
        d_sq,
    }
}

/// Applies the real 2×2 matrices `e` (one per canonical mode) to `state`.
fn apply_matrices(state: &PairState, slots: &[(usize, usize)], e: &[[f64; 4]]) -> PairState {
    let mut out = PairState::zeros(state.band());
    let (pos, vel) = (state.pos.coeffs(), state.vel.coeffs());
    for (&s, e) in slots.iter().zip(e) {
        let (p, v) = (pos[s.0], vel[s.0]);
        out.pos.set_slots(s, p * e[0] + v * e[1]);
        out.vel.set_slots(s, p * e[2] + v * e[3]);
    }
    out
}

/// Exact homogeneous evolution over time `h ≥ 0`.
pub fn homogeneous_step(state: &PairState, syms: &ModeSymbols, h: f64) -> PairState {
    assert!(h >= 0.0, "homogeneous_step needs h >= 0");
    evolve_homogeneous(state, syms, h)
}

/// Exact homogeneous evolution over any signed time `t`.
pub fn evolve_homogeneous(state: &PairState, syms: &ModeSymbols, t: f64) -> PairState {
    let modes: Vec<Mode> = canonical_unordered(state.band()).collect();
    let e: Vec<[f64; 4]> = modes.iter().map(|m| syms.propagator(*m, t)).collect();
    let slots: Vec<(usize, usize)> = modes.iter().map(|m| slot_pair(state.band(), *m)).collect();
    apply_matrices(state, &slots, &e)
}

/// Gauss-Legendre nodes and weights on [-1, 1].
pub(crate) fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

/// `∫_0^h K K^T dr` by composite Gauss-Legendre, for slowly varying kernels.
fn kernel_gram_quadrature(k_sq: f64, damping: f64, h: f64) -> [f64; 3] {
    let nodes = gauss_legendre(16);
    let panels = (damping * h + (k_sq.abs().sqrt() * h)).ceil().max(1.0) as usize;
    let width = h / panels as f64;
    let mut acc = [0.0; 3];
    for p in 0..panels {
        let mid = (p as f64 + 0.5) * width;
        for (x, w) in &nodes {
            let r = mid + 0.5 * width * x;
            let e = propagator_matrix(k_sq, damping, r);
            let wt = 0.5 * width * w;
            acc[0] += wt * e[1] * e[1];
            acc[1] += wt * e[1] * e[3];
            acc[2] += wt * e[3] * e[3];
        }
    }
    acc
}

/// `∫_0^h K(r) K(r)^T dr` as `[q11, q12, q22]` for one mode, where
/// `K(r) = (D(r), ∂_t D(r))`; multiply by `α²` for the noise covariance.
pub fn kernel_gram(k_sq: f64, damping: f64, h: f64) -> [f64; 3] {
    let a = damping / 2.0;
    let omega_sq = k_sq - a * a;
    if omega_sq.abs().sqrt() * h < 0.1 || k_sq <= 0.0 {
        kernel_gram_quadrature(k_sq, damping, h)
    } else {
        kernel_gram_closed(k_sq, damping, h)
    }
}

/// Closed form of [`kernel_gram`] from the antiderivatives of
/// `e^{-γr}cos(2ωr)` and `e^{-γr}sin(2ωr)`; loses accuracy as `ωh → 0`.
fn kernel_gram_closed(k_sq: f64, damping: f64, h: f64) -> [f64; 3] {
    let a = damping / 2.0;
    let omega_sq = k_sq - a * a;
    let g = damping;
    let w = Complex64::new(omega_sq, 0.0).sqrt();
    let b = w * 2.0;
    let decay = (-g * h).exp();
    let i0 = if g == 0.0 { h } else { -(-g * h).exp_m1() / g };
    let denom = b * b + g * g;
    let (sbh, cbh) = ((b * h).sin(), (b * h).cos());
    let ic = (-(cbh * g - b * sbh) * decay + g) / denom;
    let is = (-(sbh * g + b * cbh) * decay + b) / denom;
    let q11 = (-ic + i0) / (w * w * 2.0);
    let sc = is / (w * 2.0);
    let q12 = sc - q11 * a;
    let q22 = (ic + i0) / 2.0 - sc * (2.0 * a) + q11 * (a * a);
    [q11.re, q12.re, q22.re]
}

/// Per-mode `E_n(h)` and noise covariance `Q_n(h)` for one step size.
#[derive(Clone, Debug)]
pub struct TransitionOperator {
    pub n: usize,
    pub h: f64,
    pub alpha: f64,
    pub(crate) modes: Vec<Mode>,
    /// Square-layout indices of each mode and its partner.
    pub(crate) slots: Vec<(usize, usize)>,
    pub(crate) e: Vec<[f64; 4]>,
    q: Vec<[f64; 3]>,
    chol: Vec<[f64; 3]>,
}

impl TransitionOperator {
    fn slot(&self, mode: Mode) -> usize {
        let canon = if mode == Mode::ZERO || mode.is_canonical() { mode } else { mode.neg() };
        self.modes
            .iter()
            .position(|m| *m == canon)
            .expect("mode outside the operator band")
    }

    /// `E_n(h)` as `[e11, e12, e21, e22]`.
    pub fn e(&self, mode: Mode) -> [f64; 4] {
        self.e[self.slot(mode)]
    }

    /// `Q_n(h)` as `[q11, q12, q22]`.
    pub fn q(&self, mode: Mode) -> [f64; 3] {
        self.q[self.slot(mode)]
    }
}

fn cholesky2(q: [f64; 3]) -> [f64; 3] {
    let l11 = q[0].max(0.0).sqrt();
    let l21 = if l11 > 0.0 { q[1] / l11 } else { 0.0 };
    let l22 = (q[2] - l21 * l21).max(0.0).sqrt();
    [l11, l21, l22]
}

/// Builds `E_n(h)` and `Q_n(h) = α² ∫_0^h K K^T` for every mode of the band.
pub fn transition_covariance(syms: &ModeSymbols, alpha: f64, h: f64) -> TransitionOperator {
    assert!(h > 0.0, "transition step must be positive");
    let modes = canonical_modes(syms.n);
    let mut cache: std::collections::HashMap<i64, ([f64; 4], [f64; 3])> = Default::default();
    let (mut e, mut q) = (Vec::with_capacity(modes.len()), Vec::with_capacity(modes.len()));
    for m in &modes {
        let (em, qm) = *cache.entry(m.norm_sq()).or_insert_with(|| {
            let k_sq = syms.k_sq(*m);
            let gram = if alpha == 0.0 { [0.0; 3] } else { kernel_gram(k_sq, syms.damping, h) };
            let a2 = alpha * alpha;
            (
                propagator_matrix(k_sq, syms.damping, h),
                [a2 * gram[0], a2 * gram[1], a2 * gram[2]],
            )
        });
        e.push(em);
        q.push(qm);
    }
    let chol = q.iter().map(|q| cholesky2(*q)).collect();
    let slots = modes.iter().map(|m| slot_pair(syms.n, *m)).collect();
    TransitionOperator {
        n: syms.n,
        h,
        alpha,
        modes,
        slots,
        e,
        q,
        chol,
    }
}

/// One exact step of the stationary linear solution:
/// `state' = E(h) state + G`, `G ~ N(0, Q(h))`, with the noise of step index
/// `step` taken from the [`Role::Wiener`] family of `stream`.
pub fn zn_step(state: &PairState, op: &TransitionOperator, stream: &NoiseStream, step: u64) -> PairState {
    assert_eq!(state.band(), op.n, "state band must match the operator");
    let mut out = apply_matrices(state, &op.slots, &op.e);
    if op.alpha == 0.0 {
        return out;
    }
    let xi = stream.with_role(Role::Wiener).slot_normals(step, 0, op.modes.len());
    for ((&s, l), x) in op.slots.iter().zip(&op.chol).zip(&xi) {
        let (g1, g2) = if s.0 == s.1 {
            (Complex64::new(x[0], 0.0), Complex64::new(x[2], 0.0))
        } else {
            (
                Complex64::new(x[0], x[1]) * FRAC_1_SQRT_2,
                Complex64::new(x[2], x[3]) * FRAC_1_SQRT_2,
            )
        };
        let p = out.pos.coeffs()[s.0] + g1 * l[0];
        let v = out.vel.coeffs()[s.0] + g1 * l[1] + g2 * l[2];
        out.pos.set_slots(s, p);
        out.vel.set_slots(s, v);
    }
    out
}

/// Applies `E(h)` to `state` in place of a full transition, for tables built
/// once and reused across steps.
pub(crate) fn apply_e(state: &PairState, op: &TransitionOperator) -> PairState {
    assert_eq!(state.band(), op.n, "state band must match the operator");
    apply_matrices(state, &op.slots, &op.e)
}

/// Stationary covariance `diag(α²/(2γk²), α²/(2γ))` of a mode.
pub fn stationary_covariance(k_sq: f64, damping: f64, alpha: f64) -> [f64; 3] {
    let a2 = alpha * alpha;
    [a2 / (2.0 * damping * k_sq), 0.0, a2 / (2.0 * damping)]
}
