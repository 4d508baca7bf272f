//! Time stepping of the residual equation `v = u - z`.
//!
//! In the strong regime `v` solves
//! `L_N v + v³ + 3v²z + 3v:z²: + :z³: = 0` with `L_N = ∂_t² - Δ + ∂_t + λ_N`.
//! In the weak regime the flow keeps `λ = 1` and the forcing gains the linear
//! term `(3σ_N - 1)(v + z)`. Pointwise both forcings equal
//! `(v+z)³ - λ(v+z)`; they are assembled from Hermite polynomials of `z` so
//! that the renormalization is explicit.
//!
//! One step of size `h` is the exponential predictor-corrector
//!
//! ```text
//! v* = E(h)v - h K(h) F(v, z(t))
//! v(t+h) = E(h)v - (h/2) [K(h) F(v, z(t)) + K(0) F(v*, z(t+h))]
//! ```
//!
//! with `K(s) = (D_N(s), ∂_t D_N(s))` and `K(0) = (0, 1)`, which is second order
//! for smooth forcing. The linear solution `z` is advanced exactly in law on a
//! noise clock `noise_dt` that divides `h`, so runs at different `h` that share
//! a noise clock see the same Brownian increments.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linear_flow::{
    apply_e, propagator_symbols, transition_covariance, zn_step, ModeSymbols, TransitionOperator,
};
use crate::renorm::{binomial, hermite_all, wick_coefficients, RenormConstants};
use crate::sampler::{sample_initial, NoiseStream, Role};
use crate::spectral::{
    canonical_modes, fft_size_at_least, pointwise_real, product_grid, sobolev_norm, with_fft2, Mode, PairState,
    SpectralField,
};

/// Norm threshold above which a run is flagged as blown up.
pub const BLOWUP_NORM: f64 = 1e8;

/// Which equation is integrated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    /// Renormalized mass `λ_N` solved self-consistently, `α_N² log N → ∞`.
    Strong,
    /// `λ = 1` flow with the linear term `(3σ_N - 1)(v + z)`.
    Weak,
    /// Noiseless limit equation with mass `c_k (κ²/4π)^k`.
    Deterministic,
    /// Weak-regime split with damping `α̃_N` in front of `∂_t`.
    TunedDamping,
}

/// How the noise strength depends on the truncation.
#[derive(Clone, Debug, PartialEq)]
pub enum AlphaRule {
    Constant(f64),
    /// `α_N = κ/sqrt(log N)`.
    KappaOverSqrtLog,
    /// Explicit `(N, α_N)` pairs.
    Explicit(Vec<(usize, f64)>),
    /// `α_N² = 2 α̃_N γ²/log N`, so that `γ_N² log N = γ²` with
    /// `γ_N² = α_N²/(2α̃_N)`.
    TunedGamma(f64),
}

impl AlphaRule {
    pub fn alpha(&self, n: usize, kappa: f64, damping: f64) -> Result<f64> {
        let log_n = (n as f64).ln();
        match self {
            AlphaRule::Constant(a) => Ok(*a),
            AlphaRule::KappaOverSqrtLog => {
                if n < 2 {
                    return Err(Error::InvalidConfig("kappa/sqrt(log N) needs N >= 2".into()));
                }
                Ok(kappa / log_n.sqrt())
            }
            AlphaRule::Explicit(pairs) => pairs
                .iter()
                .find(|(m, _)| *m == n)
                .map(|(_, a)| *a)
                .ok_or_else(|| Error::InvalidConfig(format!("no explicit alpha for N = {n}"))),
            AlphaRule::TunedGamma(gamma) => {
                if n < 2 {
                    return Err(Error::InvalidConfig("tuned gamma rule needs N >= 2".into()));
                }
                Ok((2.0 * damping * gamma * gamma / log_n).sqrt())
            }
        }
    }
}

/// Fixed library of deterministic initial data `(v0, v1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitialData {
    Zero,
    /// `v0 = cos(x1)`, `v1 = 0`.
    SingleMode,
    /// `v0` a Gaussian-profile bump of height 2 at the origin built from the
    /// modes `|n| ≤ 6`, `v1 = 0`.
    SmoothBump,
}

impl InitialData {
    pub fn name(&self) -> &'static str {
        match self {
            InitialData::Zero => "zero",
            InitialData::SingleMode => "single_mode",
            InitialData::SmoothBump => "smooth_bump",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "zero" => Some(InitialData::Zero),
            "single_mode" => Some(InitialData::SingleMode),
            "smooth_bump" => Some(InitialData::SmoothBump),
            _ => None,
        }
    }

    /// The data projected onto the ball of radius `band`.
    pub fn state(&self, band: usize) -> PairState {
        let mut pos = SpectralField::zeros(band);
        match self {
            InitialData::Zero => {}
            InitialData::SingleMode => {
                if band >= 1 {
                    pos.set(Mode::new(1, 0), Complex64::new(PI, 0.0));
                }
            }
            InitialData::SmoothBump => {
                const RADIUS: usize = 6;
                let profile = |m: Mode| (-(m.norm_sq() as f64) / 4.0).exp();
                let total: f64 = crate::spectral::ball_modes(RADIUS).into_iter().map(profile).sum();
                // Height 2 at x = 0 means Σ v̂(n)/(2π) = 2.
                let scale = 2.0 * 2.0 * PI / total;
                for m in canonical_modes(RADIUS.min(band)) {
                    pos.set(m, Complex64::new(scale * profile(m), 0.0));
                }
            }
        }
        PairState::new(pos, SpectralField::zeros(band))
    }
}

/// Parameters of one trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub n: usize,
    pub regime: Regime,
    pub alpha_rule: AlphaRule,
    pub kappa: f64,
    pub t_final: f64,
    pub h: f64,
    pub seed: u64,
    pub mc_replicas: usize,
    pub damping: f64,
    pub power_k: usize,
    /// Step of the exact noise clock; must divide `h`. Defaults to `h`.
    pub noise_dt: Option<f64>,
    /// Record diagnostics every this many steps.
    pub record_every: usize,
    /// Regularity loss `ε` of the recorded negative Sobolev norms.
    pub epsilon: f64,
    pub initial: InitialData,
}

/// Default step `min(0.05, 0.5/N)`.
pub fn default_step(n: usize) -> f64 {
    0.05f64.min(0.5 / n as f64)
}

/// Largest `2^{-j}` not exceeding [`default_step`], so that the steps of a
/// ladder of truncations nest on one dyadic clock.
pub fn dyadic_step(n: usize) -> f64 {
    let target = default_step(n);
    let mut h = 1.0;
    while h > target {
        h /= 2.0;
    }
    h
}

impl SimConfig {
    /// Defaults: strong regime, `α ≡ 1`, `T = 1`, `h = min(0.05, 0.5/N)`,
    /// `ε = 0.25`, 64 replicas, zero data.
    pub fn new(n: usize, regime: Regime) -> Self {
        SimConfig {
            n,
            regime,
            alpha_rule: AlphaRule::Constant(1.0),
            kappa: 0.0,
            t_final: 1.0,
            h: default_step(n),
            seed: 0,
            mc_replicas: 64,
            damping: 1.0,
            power_k: 1,
            noise_dt: None,
            record_every: 1,
            epsilon: 0.25,
            initial: InitialData::Zero,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if self.n < 1 {
            return bad("N must be at least 1");
        }
        if !(self.h > 0.0) || self.t_final < self.h {
            return bad("need h > 0 and T >= h");
        }
        if self.mc_replicas < 1 {
            return bad("mc_replicas must be at least 1");
        }
        if !(1..=3).contains(&self.power_k) {
            return bad("power_k must be 1, 2 or 3");
        }
        if self.power_k != 1 && matches!(self.regime, Regime::Strong) {
            return bad("higher powers are only defined for the weak regime");
        }
        if self.record_every < 1 {
            return bad("record_every must be at least 1");
        }
        if self.damping < 0.0 || (self.damping == 0.0 && self.regime != Regime::Deterministic) {
            return bad("damping must be positive for stochastic runs");
        }
        if let Some(dt) = self.noise_dt {
            let ratio = self.h / dt;
            if !(dt > 0.0) || (ratio - ratio.round()).abs() > 1e-9 || ratio.round() < 1.0 {
                return bad("noise_dt must divide h");
            }
        }
        Ok(())
    }

    pub fn alpha(&self) -> Result<f64> {
        match self.regime {
            Regime::Deterministic => Ok(0.0),
            _ => self.alpha_rule.alpha(self.n, self.kappa, self.damping),
        }
    }

    /// Number of steps to reach `T`.
    pub fn steps(&self) -> usize {
        (self.t_final / self.h).round() as usize
    }

    /// Constants of the flow selected by the regime.
    pub fn renorm_constants(&self) -> Result<RenormConstants> {
        self.validate()?;
        let alpha = self.alpha()?;
        match self.regime {
            Regime::Strong => RenormConstants::strong_damped(alpha, self.damping, self.n),
            Regime::Weak | Regime::TunedDamping => {
                RenormConstants::weak_damped(alpha, self.damping, self.n)
            }
            Regime::Deterministic => Ok(RenormConstants::noiseless(
                self.n,
                limit_mass(self.kappa, self.power_k),
                self.damping,
            )),
        }
    }
}

/// Linear coefficient `c_k (κ²/4π)^k` of the limit nonlinearity; `(3/4π)κ²`
/// for the cubic case.
pub fn limit_mass(kappa: f64, power_k: usize) -> f64 {
    let s = kappa * kappa / (4.0 * PI);
    wick_coefficients(power_k).coeffs[power_k] * s.powi(power_k as i32)
}

/// One exponential predictor-corrector step of `L v + F = 0` with the flow
/// tables `flow` (built with `α = 0`, so only `E(h)` is used). `forcing` is
/// called with stage 0 at the start of the step and stage 1 at the predicted
/// end state; its result must lie on the band of `v`.
pub fn step_vn(
    v: &PairState,
    flow: &TransitionOperator,
    mut forcing: impl FnMut(usize, &SpectralField) -> SpectralField,
) -> PairState {
    let h = flow.h;
    let f_now = forcing(0, &v.pos);
    assert_eq!(f_now.band(), v.band(), "forcing must lie on the band of v");
    let base = apply_e(v, flow);
    let mut pred = base.pos.clone();
    for (&s, e) in flow.slots.iter().zip(&flow.e) {
        pred.set_slots(s, base.pos.coeffs()[s.0] - f_now.coeffs()[s.0] * (h * e[1]));
    }
    let f_next = forcing(1, &pred);
    assert_eq!(f_next.band(), v.band(), "forcing must lie on the band of v");
    let mut next = base;
    for (&s, e) in flow.slots.iter().zip(&flow.e) {
        let (fa, fb) = (f_now.coeffs()[s.0], f_next.coeffs()[s.0]);
        let p = next.pos.coeffs()[s.0] - fa * (0.5 * h * e[1]);
        let q = next.vel.coeffs()[s.0] - (fa * e[3] + fb) * (0.5 * h);
        next.pos.set_slots(s, p);
        next.vel.set_slots(s, q);
    }
    next
}

/// Pointwise forcing `F(v, z)` of the residual equation.
#[derive(Clone, Debug)]
enum Forcing {
    /// `v³ + 3v²z + 3v(z² - σ) + (z³ - 3σz) + lin·(v + z)`.
    Cubic { sigma: f64, lin: f64 },
    /// `Σ_j c_j σ^j H_{2k+1-2j}(v + z; σ) - lambda·(v + z)`.
    Power { sigma: f64, k: usize, coeffs: Vec<f64>, lambda: f64 },
    /// `Σ_{j<k} c_j s^j w^{2k+1-2j}`, the mass term `j = k` lives in the flow;
    /// `scaled[j] = c_j s^j`.
    Limit { k: usize, scaled: Vec<f64> },
}

impl Forcing {
    fn for_config(cfg: &SimConfig, rc: &RenormConstants) -> Self {
        let k = cfg.power_k;
        match cfg.regime {
            Regime::Strong => Forcing::Cubic { sigma: rc.sigma, lin: 0.0 },
            Regime::Weak | Regime::TunedDamping if k == 1 => Forcing::Cubic {
                sigma: rc.sigma,
                lin: 3.0 * rc.sigma - rc.lambda,
            },
            Regime::Weak | Regime::TunedDamping => Forcing::Power {
                sigma: rc.sigma,
                k,
                coeffs: wick_coefficients(k).coeffs,
                lambda: rc.lambda,
            },
            Regime::Deterministic => {
                let s = cfg.kappa * cfg.kappa / (4.0 * PI);
                let coeffs = wick_coefficients(k).coeffs;
                Forcing::Limit { k, scaled: (0..k).map(|j| coeffs[j] * s.powi(j as i32)).collect() }
            }
        }
    }

    fn degree(&self) -> usize {
        match self {
            Forcing::Cubic { .. } => 3,
            Forcing::Power { k, .. } | Forcing::Limit { k, .. } => 2 * k + 1,
        }
    }

    fn eval(&self, v: f64, z: f64) -> f64 {
        match self {
            Forcing::Cubic { sigma, lin } => {
                let z2 = z * z - sigma;
                let z3 = z * (z * z - 3.0 * sigma);
                v * v * v + 3.0 * v * v * z + 3.0 * v * z2 + z3 + lin * (v + z)
            }
            Forcing::Power { sigma, k, coeffs, lambda } => {
                power_recombination(v, z, *sigma, *k, coeffs) - lambda * (v + z)
            }
            Forcing::Limit { scaled, .. } => {
                let v2 = v * v;
                scaled.iter().fold(0.0, |acc, c| acc * v2 + c) * v2 * v
            }
        }
    }
}

/// `Σ_j c_j σ^j H_{2k+1-2j}(v + z; σ)`, with each Hermite polynomial of the
/// shifted argument expanded as `Σ_i binom(m, i) v^{m-i} H_i(z; σ)`.
fn power_recombination(v: f64, z: f64, sigma: f64, k: usize, coeffs: &[f64]) -> f64 {
    let top = 2 * k + 1;
    let hz = hermite_all(top, z, sigma);
    let mut vp = vec![1.0; top + 1];
    for i in 1..=top {
        vp[i] = vp[i - 1] * v;
    }
    (0..=k)
        .map(|j| {
            let m = top - 2 * j;
            let hm: f64 = (0..=m).map(|i| binomial(m, i) * vp[m - i] * hz[i]).sum();
            coeffs[j] * sigma.powi(j as i32) * hm
        })
        .sum()
}

/// Evaluates `F(v, z)` on a grid of size `m` and returns its projection onto
/// the ball of radius `out_band`.
fn forcing_field(
    forcing: &Forcing,
    v: &SpectralField,
    z: Option<&SpectralField>,
    m: usize,
    out_band: usize,
) -> SpectralField {
    // With one real argument a real-input transform suffices; the cubic case
    // depends on u = v + z only.
    match (forcing, z) {
        (&Forcing::Cubic { sigma, lin }, Some(z)) => {
            return pointwise_real(&(v + z), m, out_band, |u| u * u * u - 3.0 * sigma * u + lin * u);
        }
        (&Forcing::Cubic { sigma, lin }, None) => {
            return pointwise_real(v, m, out_band, |v| v * v * v - 3.0 * sigma * v + lin * v);
        }
        (Forcing::Limit { k: 1, scaled }, None) => {
            let c = scaled[0];
            return pointwise_real(v, m, out_band, |v| c * v * v * v);
        }
        (_, None) => return pointwise_real(v, m, out_band, |v| forcing.eval(v, 0.0)),
        _ => {}
    }
    with_fft2(m, |eng| {
        eng.inverse(v, z);
        for c in eng.buf.iter_mut() {
            *c = Complex64::new(forcing.eval(c.re, c.im), 0.0);
        }
        eng.forward(out_band)
    })
}

/// Wick powers `:z²: = z² - σ` (band `2N`) and `:z³: = z³ - 3σz` (band `3N`),
/// computed without aliasing on a grid of size at least `6N + 2`.
pub fn wick_powers(z: &SpectralField, sigma: f64) -> (SpectralField, SpectralField) {
    let band = z.band();
    let m = product_grid(band, 3, 3 * band);
    with_fft2(m, |eng| {
        eng.inverse(z, None);
        for c in eng.buf.iter_mut() {
            let x = c.re;
            *c = Complex64::new(x * x - sigma, x * (x * x - 3.0 * sigma));
        }
        eng.forward_pair(2 * band, 3 * band)
    })
}

/// `P_N[v³ + 3v²z + 3v·z2 + z3]` on the band of `v`, with all products exact.
pub fn nonlinearity_strong(
    v: &SpectralField,
    z: &SpectralField,
    z2: &SpectralField,
    z3: &SpectralField,
) -> SpectralField {
    let band = v.band().max(z.band());
    let top = z3.band().max(3 * band).max(z2.band());
    let m = product_grid(top, 1, top).max(product_grid(band, 3, band));
    // Two packed transforms give the four factors on the same grid.
    let (vz, w23) = with_fft2(m, |eng| {
        eng.inverse(v, Some(z));
        let vz: Vec<Complex64> = eng.buf.clone();
        eng.inverse(z2, Some(z3));
        (vz, eng.buf.clone())
    });
    with_fft2(m, |eng| {
        for (c, (a, b)) in eng.buf.iter_mut().zip(vz.iter().zip(&w23)) {
            let (v, z, z2, z3) = (a.re, a.im, b.re, b.im);
            *c = Complex64::new(v * v * v + 3.0 * v * v * z + 3.0 * v * z2 + z3, 0.0);
        }
        eng.forward(v.band())
    })
}

/// `Σ_j c_j σ^j :(v+z)^{2k+1-2j}:` on its full band `(2k+1)N`, which equals
/// `(v + z)^{2k+1}` pointwise.
pub fn general_power_nonlinearity(v: &SpectralField, z: &SpectralField, sigma: f64, k: usize) -> SpectralField {
    assert!((1..=3).contains(&k), "power index must be 1, 2 or 3");
    let band = v.band().max(z.band());
    let top = (2 * k + 1) * band;
    let forcing = Forcing::Power {
        sigma,
        k,
        coeffs: wick_coefficients(k).coeffs,
        lambda: 0.0,
    };
    forcing_field(&forcing, &v.with_band(band), Some(&z.with_band(band)), product_grid(band, 2 * k + 1, top), top)
}

/// `E = ½‖∇v‖² + ½‖∂_t v‖² + ¼‖v‖⁴_{L⁴} + ½λ‖v‖²`.
pub fn energy(v: &PairState, lambda: f64) -> f64 {
    let mut grad = 0.0;
    let mut mass = 0.0;
    for (m, c) in v.pos.modes() {
        grad += m.norm_sq() as f64 * c.norm_sqr();
        mass += c.norm_sqr();
    }
    let kinetic: f64 = v.vel.modes().map(|(_, c)| c.norm_sqr()).sum();
    let band = v.band();
    let m = fft_size_at_least(4 * band + 2);
    let quartic = with_fft2(m, |eng| {
        eng.inverse(&v.pos, None);
        let mean = eng.buf.iter().map(|c| c.re.powi(4)).sum::<f64>() / (m * m) as f64;
        4.0 * PI * PI * mean
    });
    0.5 * grad + 0.5 * kinetic + 0.25 * quartic + 0.5 * lambda * mass
}

/// Diagnostics and times of one trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryRecord {
    pub n: usize,
    pub seed: u64,
    pub replica: u64,
    pub times: Vec<f64>,
    pub values: BTreeMap<String, Vec<f64>>,
    /// Time of the first step whose state exceeded the blow-up threshold.
    pub blowup: Option<f64>,
}

impl TrajectoryRecord {
    fn new(n: usize, stream: &NoiseStream) -> Self {
        TrajectoryRecord {
            n,
            seed: stream.seed,
            replica: stream.replica,
            times: Vec::new(),
            values: BTreeMap::new(),
            blowup: None,
        }
    }

    fn push(&mut self, t: f64, entries: &[(&str, f64)]) {
        self.times.push(t);
        for (name, value) in entries {
            self.values.entry(name.to_string()).or_default().push(*value);
        }
    }

    pub fn series(&self, name: &str) -> Option<&[f64]> {
        self.values.get(name).map(|v| v.as_slice())
    }
}

/// A running trajectory `u = z + v` that can be stepped and inspected.
pub struct Simulation {
    cfg: SimConfig,
    rc: RenormConstants,
    syms: ModeSymbols,
    forcing: Forcing,
    flow: TransitionOperator,
    noise: Option<(TransitionOperator, usize)>,
    stream: NoiseStream,
    grid: usize,
    z: PairState,
    v: PairState,
    step: usize,
    noise_step: u64,
    blowup: Option<f64>,
}

impl Simulation {
    /// Starts from `v = config.initial` and `z` drawn from the invariant
    /// measure (zero when `α = 0`).
    pub fn new(cfg: &SimConfig, rc: RenormConstants, stream: NoiseStream) -> Result<Self> {
        let v0 = cfg.initial.state(cfg.n);
        Self::with_initial(cfg, rc, stream, v0)
    }

    pub fn with_initial(cfg: &SimConfig, rc: RenormConstants, stream: NoiseStream, v0: PairState) -> Result<Self> {
        cfg.validate()?;
        if rc.n != cfg.n || v0.band() != cfg.n {
            return Err(Error::InvalidConfig("band of constants or data differs from N".into()));
        }
        let syms = propagator_symbols(&rc);
        let forcing = Forcing::for_config(cfg, &rc);
        let flow = transition_covariance(&syms, 0.0, cfg.h);
        let noise = if rc.alpha != 0.0 {
            let dt = cfg.noise_dt.unwrap_or(cfg.h);
            let sub = (cfg.h / dt).round() as usize;
            Some((transition_covariance(&syms, rc.alpha, dt), sub))
        } else {
            None
        };
        let z = if rc.alpha != 0.0 {
            sample_initial(&rc, &stream).into_state()
        } else {
            PairState::zeros(cfg.n)
        };
        let grid = product_grid(cfg.n, forcing.degree(), cfg.n);
        Ok(Simulation {
            cfg: cfg.clone(),
            rc,
            syms,
            forcing,
            flow,
            noise,
            stream: stream.with_role(Role::Wiener),
            grid,
            z,
            v: v0,
            step: 0,
            noise_step: 0,
            blowup: None,
        })
    }

    pub fn time(&self) -> f64 {
        self.step as f64 * self.cfg.h
    }

    pub fn steps_taken(&self) -> usize {
        self.step
    }

    pub fn z(&self) -> &PairState {
        &self.z
    }

    pub fn v(&self) -> &PairState {
        &self.v
    }

    /// `u = z + v`.
    pub fn u(&self) -> PairState {
        PairState::new(&self.z.pos + &self.v.pos, &self.z.vel + &self.v.vel)
    }

    pub fn constants(&self) -> &RenormConstants {
        &self.rc
    }

    pub fn symbols(&self) -> &ModeSymbols {
        &self.syms
    }

    pub fn blowup(&self) -> Option<f64> {
        self.blowup
    }

    fn eval_forcing(&self, v: &SpectralField, z: &SpectralField) -> SpectralField {
        let zarg = self.noise.as_ref().map(|_| z);
        forcing_field(&self.forcing, v, zarg, self.grid, self.cfg.n)
    }

    fn advance_z(&mut self) {
        if let Some((op, sub)) = &self.noise {
            for _ in 0..*sub {
                self.z = zn_step(&self.z, op, &self.stream, self.noise_step);
                self.noise_step += 1;
            }
        }
    }

    /// One predictor-corrector step. Fails with [`Error::BlowUp`] once the
    /// state is non-finite or its `H¹ × L²` norm exceeds [`BLOWUP_NORM`].
    pub fn step(&mut self) -> Result<()> {
        if let Some(time) = self.blowup {
            return Err(Error::BlowUp { time });
        }
        let z_now = self.z.pos.clone();
        self.advance_z();
        let z_next = self.z.pos.clone();
        let next = step_vn(&self.v, &self.flow, |stage, v| {
            let z = if stage == 0 { &z_now } else { &z_next };
            self.eval_forcing(v, z)
        });
        self.v = next;
        self.step += 1;
        if !self.v.pos.is_finite() || !self.v.vel.is_finite() || self.v.energy_norm(1.0) > BLOWUP_NORM {
            let time = self.time();
            self.blowup = Some(time);
            return Err(Error::BlowUp { time });
        }
        Ok(())
    }

    /// `‖(I - P_N) F‖_{H^{-1}}`, the part of the forcing at the current state
    /// that the band-limited dynamics discards.
    pub fn forcing_tail_norm(&self) -> f64 {
        let n = self.cfg.n;
        let top = self.forcing.degree() * n;
        let zarg = self.noise.as_ref().map(|_| &self.z.pos);
        let full = forcing_field(&self.forcing, &self.v.pos, zarg, product_grid(n, self.forcing.degree(), top), top);
        let tail: f64 = full
            .modes()
            .filter(|(m, _)| !m.in_ball(n))
            .map(|(m, c)| c.norm_sqr() / (1.0 + m.norm_sq() as f64))
            .sum();
        tail.sqrt()
    }

    fn standard_diagnostics(&self) -> Vec<(&'static str, f64)> {
        let eps = self.cfg.epsilon;
        let u = &self.z.pos + &self.v.pos;
        vec![
            ("u_h_minus_eps", sobolev_norm(&u, -eps)),
            ("z_h_minus_eps", sobolev_norm(&self.z.pos, -eps)),
            ("v_h_one_minus_eps", sobolev_norm(&self.v.pos, 1.0 - eps)),
            ("v_x1", self.v.energy_norm(1.0)),
            ("energy_v", energy(&self.v, self.rc.lambda)),
            ("forcing_tail_h_minus1", self.forcing_tail_norm()),
        ]
    }
}

/// Runs one trajectory and records the standard diagnostics every
/// `record_every` steps. A blow-up ends the record early and is reported in
/// [`TrajectoryRecord::blowup`].
pub fn simulate(cfg: &SimConfig, rc: &RenormConstants, stream: &NoiseStream) -> Result<TrajectoryRecord> {
    let mut sim = Simulation::new(cfg, *rc, *stream)?;
    let mut rec = TrajectoryRecord::new(cfg.n, stream);
    rec.push(0.0, &sim.standard_diagnostics());
    for k in 1..=cfg.steps() {
        match sim.step() {
            Ok(()) => {}
            Err(Error::BlowUp { time }) => {
                rec.blowup = Some(time);
                break;
            }
            Err(e) => return Err(e),
        }
        if k % cfg.record_every == 0 || k == cfg.steps() {
            rec.push(sim.time(), &sim.standard_diagnostics());
        }
    }
    Ok(rec)
}

/// Snapshots of the noiseless limit solution `w` at every `record_every`
/// steps, including `t = 0`.
pub fn deterministic_path(cfg: &SimConfig, v0: &PairState) -> Result<(Vec<f64>, Vec<PairState>)> {
    let mut cfg = cfg.clone();
    cfg.regime = Regime::Deterministic;
    let rc = cfg.renorm_constants()?;
    let stream = NoiseStream::new(cfg.seed, 0, Role::Wiener);
    let mut sim = Simulation::with_initial(&cfg, rc, stream, v0.with_band(cfg.n))?;
    let (mut times, mut states) = (vec![0.0], vec![sim.v().clone()]);
    for k in 1..=cfg.steps() {
        sim.step()?;
        if k % cfg.record_every == 0 || k == cfg.steps() {
            times.push(sim.time());
            states.push(sim.v().clone());
        }
    }
    Ok((times, states))
}

/// Solves `∂_t²w - Δw + ∂_t w + (3/4π)κ² w + w³ = 0` from `v0v1` and records
/// the standard diagnostics (with `w` in place of `v` and `z = 0`).
pub fn solve_deterministic_limit(kappa: f64, v0v1: &PairState, t_final: f64, h: f64) -> Result<TrajectoryRecord> {
    let mut cfg = SimConfig::new(v0v1.band(), Regime::Deterministic);
    cfg.kappa = kappa;
    cfg.t_final = t_final;
    cfg.h = h;
    let rc = cfg.renorm_constants()?;
    let stream = NoiseStream::new(0, 0, Role::Wiener);
    let mut sim = Simulation::with_initial(&cfg, rc, stream, v0v1.clone())?;
    let mut rec = TrajectoryRecord::new(cfg.n, &stream);
    rec.push(0.0, &sim.standard_diagnostics());
    for _ in 0..cfg.steps() {
        sim.step()?;
        rec.push(sim.time(), &sim.standard_diagnostics());
    }
    Ok(rec)
}
