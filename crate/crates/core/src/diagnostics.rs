//! Norms and statistics of simulated fields.
//!
//! The space-time norm `H^b([0,T]; H^s)` is evaluated on the extension
//! `χ_T u`, where `χ_T ≡ 1` on `[0, T]` and vanishes outside `(-T/2, 3T/2)`.
//! Trajectories known only on `[0, T]` are extended to the window by even
//! reflection at `0` and `T` before the cutoff is applied.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::integrator::{wick_powers, TrajectoryRecord};
use crate::linear_flow::{evolve_homogeneous, gauss_legendre, propagator_symbols, transition_covariance, zn_step};
use crate::renorm::RenormConstants;
use crate::sampler::{sample_initial, NoiseStream, Role};
use crate::spectral::{canonical_modes, sobolev_norm, winfty_norm, winfty_norm_pair, Mode, PairState, SpectralField};

/// Standard mollifier `exp(-1/(1-x²))` on `(-1, 1)`, unnormalized.
fn mollifier(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - x * x)).exp()
    }
}

/// `∫_{-1}^{x} ρ` for `x ≤ 0` by composite Gauss-Legendre on 32 panels.
fn mollifier_integral(x: f64) -> f64 {
    let x = x.clamp(-1.0, 0.0);
    if x <= -1.0 {
        return 0.0;
    }
    let nodes = gauss_legendre(16);
    let panels = 32;
    let width = (x + 1.0) / panels as f64;
    (0..panels)
        .map(|p| {
            let mid = -1.0 + (p as f64 + 0.5) * width;
            nodes
                .iter()
                .map(|(t, w)| w * mollifier(mid + 0.5 * width * t))
                .sum::<f64>()
                * 0.5
                * width
        })
        .sum()
}

/// Mollified step rising from 0 at `x = -1` to 1 at `x = 1`.
fn smooth_step(x: f64) -> f64 {
    if x <= -1.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else if x <= 0.0 {
        0.5 * mollifier_integral(x) / mollifier_integral(0.0)
    } else {
        1.0 - 0.5 * mollifier_integral(-x) / mollifier_integral(0.0)
    }
}

/// Cutoff `χ_T`: the indicator of `[-T/4, 5T/4]` mollified at radius `T/4`.
/// Equal to 1 on `[0, T]` and to 0 outside `(-T/2, 3T/2)`.
pub fn chi_window(t: f64, t_final: f64) -> f64 {
    let r = t_final / 4.0;
    smooth_step((t + r) / r) - smooth_step((t - 5.0 * r) / r)
}

/// Values of a real field on the uniform grid `t_j = -T/2 + j·dt`,
/// `j < 2T/dt`, stored as the coefficients of the canonical modes.
#[derive(Clone, Debug, PartialEq)]
pub struct SpaceTimeSample {
    pub band: usize,
    pub t_final: f64,
    pub dt: f64,
    pub modes: Vec<Mode>,
    /// `values[j][i]` is the coefficient of `modes[i]` at `times()[j]`.
    pub values: Vec<Vec<Complex64>>,
    /// `χ_T(t_j)`.
    pub window: Vec<f64>,
}

impl SpaceTimeSample {
    fn grid_len(t_final: f64, dt: f64) -> Result<usize> {
        let half = 0.5 * t_final / dt;
        if !(dt > 0.0) || !(t_final > 0.0) || (half - half.round()).abs() > 1e-9 || half.round() < 1.0 {
            return Err(Error::InvalidConfig("dt must divide T/2".into()));
        }
        Ok(4 * half.round() as usize)
    }

    /// Samples `f(t)` at every window time.
    pub fn from_fn(band: usize, t_final: f64, dt: f64, mut f: impl FnMut(f64) -> SpectralField) -> Result<Self> {
        let len = Self::grid_len(t_final, dt)?;
        let modes = canonical_modes(band);
        let mut values = Vec::with_capacity(len);
        let mut window = Vec::with_capacity(len);
        for j in 0..len {
            let t = -0.5 * t_final + j as f64 * dt;
            let field = f(t);
            values.push(modes.iter().map(|m| field.get(*m)).collect());
            window.push(chi_window(t, t_final));
        }
        Ok(SpaceTimeSample { band, t_final, dt, modes, values, window })
    }

    /// Builds the window sample from snapshots at `0, dt, ..., T`, extended
    /// by `u(-t) = u(t)` and `u(T + t) = u(T - t)`.
    pub fn from_trajectory(band: usize, t_final: f64, dt: f64, snapshots: &[SpectralField]) -> Result<Self> {
        let len = Self::grid_len(t_final, dt)?;
        let steps = len / 2;
        if snapshots.len() != steps + 1 {
            return Err(Error::InvalidConfig(format!(
                "expected {} snapshots on [0, T], got {}",
                steps + 1,
                snapshots.len()
            )));
        }
        let modes = canonical_modes(band);
        let coeffs: Vec<Vec<Complex64>> = snapshots
            .iter()
            .map(|f| modes.iter().map(|m| f.get(*m)).collect())
            .collect();
        let quarter = steps / 2;
        let mut values = Vec::with_capacity(len);
        let mut window = Vec::with_capacity(len);
        for j in 0..len {
            // Index relative to t = 0, in units of dt.
            let k = j as i64 - quarter as i64;
            let idx = if k < 0 {
                (-k) as usize
            } else if k as usize > steps {
                2 * steps - k as usize
            } else {
                k as usize
            };
            values.push(coeffs[idx].clone());
            window.push(chi_window(-0.5 * t_final + j as f64 * dt, t_final));
        }
        Ok(SpaceTimeSample { band, t_final, dt, modes, values, window })
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.values.len())
            .map(|j| -0.5 * self.t_final + j as f64 * self.dt)
            .collect()
    }
}

/// Zero-padding factor of the time transform. The `τ` grid spacing is
/// `2π/(TIME_OVERSAMPLE·len·dt)`, fine enough that the Riemann sum in `τ`
/// no longer depends on the length of the sampled window.
pub const TIME_OVERSAMPLE: usize = 8;

/// `‖χ_T u‖_{H^b(R; H^s)}` by a discrete Fourier transform in time:
/// `ŵ(τ, n) = (2π)^{-1/2} Σ_j dt e^{-iτt_j} χ(t_j) û(t_j, n)` and
/// `(Σ_τ Σ_n ⟨τ⟩^{2b}⟨n⟩^{2s}|ŵ(τ,n)|² Δτ)^{1/2}`, with `τ` on the grid of
/// the sample zero-padded to `TIME_OVERSAMPLE` times its length.
pub fn spacetime_norm(sample: &SpaceTimeSample, b: f64, s: f64) -> Result<f64> {
    let samples = sample.values.len();
    if samples == 0 {
        return Err(Error::Empty);
    }
    for (t, w) in sample.times().iter().zip(&sample.window) {
        if *t >= 0.0 && *t <= sample.t_final && (w - 1.0).abs() > 1e-12 {
            return Err(Error::WindowNotUnit);
        }
    }
    let len = (samples * TIME_OVERSAMPLE).next_power_of_two();
    let dtau = 2.0 * std::f64::consts::PI / (len as f64 * sample.dt);
    let tau_weight: Vec<f64> = (0..len)
        .map(|k| {
            let signed = if k <= len / 2 { k as f64 } else { k as f64 - len as f64 };
            let tau = signed * dtau;
            (1.0 + tau * tau).powf(b)
        })
        .collect();
    let fft = FftPlanner::new().plan_fft_forward(len);
    let scale = sample.dt * sample.dt / (2.0 * std::f64::consts::PI);
    let mut buf = vec![Complex64::new(0.0, 0.0); len];
    let mut total = 0.0;
    for (i, m) in sample.modes.iter().enumerate() {
        for (j, b) in buf.iter_mut().enumerate() {
            *b = if j < samples { sample.values[j][i] * sample.window[j] } else { Complex64::new(0.0, 0.0) };
        }
        fft.process(&mut buf);
        let spectral: f64 = buf.iter().zip(&tau_weight).map(|(c, w)| w * c.norm_sqr()).sum();
        // The partner -n contributes the same amount for a real field.
        let multiplicity = if *m == Mode::ZERO { 1.0 } else { 2.0 };
        total += multiplicity * (1.0 + m.norm_sq() as f64).powf(s) * spectral;
    }
    Ok((total * scale * dtau).sqrt())
}

/// The homogeneous solution `v^lin(t) = ∂_tD(t)v0 + D(t)(v0 + v1)` sampled
/// exactly on the window grid, negative times included. The sample keeps the
/// band of the data, truncated to `N`; the flow does not widen it.
pub fn vlin_trajectory(v0v1: &PairState, rc: &RenormConstants, t_final: f64, dt: f64) -> Result<SpaceTimeSample> {
    let syms = propagator_symbols(rc);
    let band = v0v1.band().min(rc.n);
    let start = v0v1.with_band(band);
    SpaceTimeSample::from_fn(band, t_final, dt, |t| evolve_homogeneous(&start, &syms, t).pos)
}

/// Mean, standard error and quantiles of one statistic over replicas.
#[derive(Clone, Debug, PartialEq)]
pub struct McSummary {
    pub count: usize,
    pub mean: f64,
    /// `std/sqrt(count)` with the `count - 1` sample deviation; 0 when
    /// `count == 1`, flagged by `se_defined`.
    pub std_err: f64,
    pub se_defined: bool,
    pub median: f64,
    pub q90: f64,
    /// Replicas excluded because they blew up.
    pub blowups: usize,
}

/// Type-7 quantile (linear interpolation between order statistics).
pub fn quantile(values: &[f64], p: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Empty);
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let h = (v.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(v.len() - 1);
    Ok(v[lo] + (h - lo as f64) * (v[hi] - v[lo]))
}

impl McSummary {
    pub fn from_values(values: &[f64], blowups: usize) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty);
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let (std_err, se_defined) = if values.len() > 1 {
            let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
            ((var / n).sqrt(), true)
        } else {
            (0.0, false)
        };
        Ok(McSummary {
            count: values.len(),
            mean,
            std_err,
            se_defined,
            median: quantile(values, 0.5)?,
            q90: quantile(values, 0.9)?,
            blowups,
        })
    }
}

/// Summary of one diagnostic at one recorded time.
#[derive(Clone, Debug, PartialEq)]
pub struct AggregateRow {
    pub diagnostic: String,
    pub time: f64,
    pub summary: McSummary,
}

/// Per-diagnostic, per-time summaries across replicas. Records that blew up
/// are excluded and counted in every row.
pub fn aggregate(records: &[TrajectoryRecord]) -> Result<Vec<AggregateRow>> {
    if records.is_empty() {
        return Err(Error::Empty);
    }
    let (good, bad): (Vec<_>, Vec<_>) = records.iter().partition(|r| r.blowup.is_none());
    let blowups = bad.len();
    let Some(first) = good.first() else {
        return Err(Error::Empty);
    };
    if good.iter().any(|r| r.times != first.times || r.values.len() != first.values.len()) {
        return Err(Error::InvalidConfig("records do not share a time grid".into()));
    }
    let mut columns: BTreeMap<&str, Vec<Vec<f64>>> = BTreeMap::new();
    for rec in &good {
        for (name, series) in &rec.values {
            let col = columns.entry(name.as_str()).or_insert_with(|| vec![Vec::new(); first.times.len()]);
            for (slot, v) in col.iter_mut().zip(series) {
                slot.push(*v);
            }
        }
    }
    let mut rows = Vec::new();
    for (name, per_time) in columns {
        for (t, vals) in first.times.iter().zip(per_time) {
            rows.push(AggregateRow {
                diagnostic: name.to_string(),
                time: *t,
                summary: McSummary::from_values(&vals, blowups)?,
            });
        }
    }
    Ok(rows)
}

/// Settings of the Wick-power decay estimate.
#[derive(Clone, Debug, PartialEq)]
pub struct WickConfig {
    pub t_final: f64,
    /// Number of equispaced times on `[0, T]`, endpoints included.
    pub time_points: usize,
    pub epsilon: f64,
    pub oversample: usize,
    pub seed: u64,
}

/// Norms of one replica: `‖:z^ℓ:‖_{L²_T W^{-ε,∞}}` for `ℓ = 1, 2, 3` and
/// `‖z‖_{C_T H^{-ε}}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WickReplica {
    pub wick: [f64; 3],
    pub z_sup: f64,
}

/// Advances the stationary `z_N` exactly through the time grid and evaluates
/// the Wick norms; time integrals use the trapezoid rule.
pub fn wick_replica(rc: &RenormConstants, cfg: &WickConfig, replica: u64) -> Result<WickReplica> {
    if cfg.time_points < 2 || !(cfg.t_final > 0.0) {
        return Err(Error::InvalidConfig("need at least two times and T > 0".into()));
    }
    let dt = cfg.t_final / (cfg.time_points - 1) as f64;
    let syms = propagator_symbols(rc);
    let op = transition_covariance(&syms, rc.alpha, dt);
    let stream = NoiseStream::new(cfg.seed, replica, Role::Wiener);
    let mut z = sample_initial(rc, &stream).into_state();
    let mut sq = [0.0; 3];
    let mut z_sup = 0.0f64;
    for j in 0..cfg.time_points {
        if j > 0 {
            z = zn_step(&z, &op, &stream, (j - 1) as u64);
        }
        let (z2, z3) = wick_powers(&z.pos, rc.sigma);
        let w1 = winfty_norm(&z.pos, -cfg.epsilon, cfg.oversample);
        let (w2, w3) = winfty_norm_pair(&z2, &z3, -cfg.epsilon, cfg.oversample);
        let weight = if j == 0 || j + 1 == cfg.time_points { 0.5 * dt } else { dt };
        for (acc, w) in sq.iter_mut().zip([w1, w2, w3]) {
            *acc += weight * w * w;
        }
        z_sup = z_sup.max(sobolev_norm(&z.pos, -cfg.epsilon));
    }
    Ok(WickReplica { wick: sq.map(f64::sqrt), z_sup })
}

/// Summaries of the Wick norms at one truncation level.
#[derive(Clone, Debug, PartialEq)]
pub struct WickCurvePoint {
    pub n: usize,
    pub lambda: f64,
    pub wick: [McSummary; 3],
    pub z_sup: McSummary,
}

/// Collects replica norms into a curve point.
pub fn wick_curve_point(rc: &RenormConstants, replicas: &[WickReplica]) -> Result<WickCurvePoint> {
    let col = |f: &dyn Fn(&WickReplica) -> f64| -> Result<McSummary> {
        McSummary::from_values(&replicas.iter().map(f).collect::<Vec<_>>(), 0)
    };
    Ok(WickCurvePoint {
        n: rc.n,
        lambda: rc.lambda,
        wick: [col(&|r| r.wick[0])?, col(&|r| r.wick[1])?, col(&|r| r.wick[2])?],
        z_sup: col(&|r| r.z_sup)?,
    })
}

/// Wick decay curve over a ladder of truncations, replicas run in sequence.
pub fn wick_decay_curve(constants: &[RenormConstants], cfg: &WickConfig, replicas: usize) -> Result<Vec<WickCurvePoint>> {
    constants
        .iter()
        .map(|rc| {
            let reps = (0..replicas as u64)
                .map(|r| wick_replica(rc, cfg, r))
                .collect::<Result<Vec<_>>>()?;
            wick_curve_point(rc, &reps)
        })
        .collect()
}

/// Reference rate `λ_N^{-ε/4}` for the Wick norms.
pub fn wick_guide(lambda: f64, epsilon: f64) -> f64 {
    lambda.powf(-epsilon / 4.0)
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let cov: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let var: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    cov / var
}

/// True when every entry is strictly smaller than its predecessor.
pub fn strictly_decreasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] < w[0])
}
