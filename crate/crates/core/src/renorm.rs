//! Renormalization constants, Hermite polynomials and Wick expansion
//! coefficients.
//!
//! In the strong regime `λ_N` is the unique positive root of
//! `λ = (3α²/8π²) Σ_{|n|≤N} 1/(λ + |n|²)` and `σ_N = λ_N/3` is the pointwise
//! variance of the stationary linear solution. In the weak regime the flow keeps
//! `λ = 1` and `σ_N = (α²/8π²) Σ_{|n|≤N} 1/⟨n⟩²`.
//!
//! With damping `γ` in front of `∂_t` the stationary variances scale with
//! `α²/γ` instead of `α²`; all constants below use that effective strength.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Lattice shells `|n|² = k` of the ball `|n| ≤ N` with their multiplicities.
///
/// Sums of radial functions over the ball reduce to sums over shells, which is
/// what keeps `N = 4096` (5·10⁷ modes, 3·10⁶ shells) cheap.
#[derive(Clone, Debug)]
pub struct Shells {
    pub k: Vec<f64>,
    pub mult: Vec<f64>,
}

impl Shells {
    pub fn new(n: usize) -> Self {
        let n2 = n * n;
        let mut counts = vec![0u32; n2 + 1];
        for a in 0..=n {
            let rest = n2 - a * a;
            let mut b = 0usize;
            while b * b <= rest {
                let w = if a == 0 { 1 } else { 2 } * if b == 0 { 1 } else { 2 };
                counts[a * a + b * b] += w;
                b += 1;
            }
        }
        let (mut k, mut mult) = (Vec::new(), Vec::new());
        for (i, c) in counts.into_iter().enumerate() {
            if c > 0 {
                k.push(i as f64);
                mult.push(c as f64);
            }
        }
        Shells { k, mult }
    }

    /// Number of lattice points in the ball.
    pub fn count(&self) -> f64 {
        self.mult.iter().sum()
    }

    /// `Σ_{|n|≤N} 1/(a + |n|²)`.
    pub fn resolvent_sum(&self, a: f64) -> f64 {
        self.k.iter().zip(&self.mult).map(|(k, m)| m / (a + k)).sum()
    }
}

/// `(3/8π²)`, the constant in front of the mode sum in the λ equation.
fn lambda_prefactor(alpha_sq: f64) -> f64 {
    3.0 * alpha_sq / (8.0 * PI * PI)
}

/// `Σ_{|n|≤N} 1/(λ + |n|²)`, exact over the integer ball.
pub fn mode_sum(lambda: f64, n: usize) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::NonPositiveLambda(lambda));
    }
    Ok(Shells::new(n).resolvent_sum(lambda))
}

const BISECTION_CAP: usize = 400;

fn solve_lambda_sq(alpha_sq: f64, shells: &Shells, n: usize) -> Result<f64> {
    let c = lambda_prefactor(alpha_sq);
    // λ = cΣ1/(λ+|n|²) ≤ c·#modes/λ bounds the root by sqrt(c·#modes), and
    // λ ≥ c·#modes/(λ + N²) then gives the lower end.
    let hi0 = (c * shells.count()).sqrt();
    let lo0 = c * shells.count() / (hi0 + (n * n) as f64);
    let g = |l: f64| l - c * shells.resolvent_sum(l);
    let (mut lo, mut hi) = (lo0, hi0);
    if g(lo) > 0.0 || g(hi) < 0.0 {
        return Err(Error::NoConvergence(0));
    }
    for _ in 0..BISECTION_CAP {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Ok(if g(hi).abs() < g(lo).abs() { hi } else { lo });
        }
        if g(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Err(Error::NoConvergence(BISECTION_CAP))
}

/// The unique root of `λ = (3α²/8π²)·mode_sum(λ, N)`, by bisection.
pub fn solve_lambda(alpha: f64, n: usize) -> Result<f64> {
    if alpha == 0.0 {
        return Err(Error::InvalidConfig("solve_lambda needs alpha != 0".into()));
    }
    solve_lambda_sq(alpha * alpha, &Shells::new(n), n)
}

/// `|λ - (3α²/8π²)·mode_sum(λ, N)|`.
pub fn lambda_residual(alpha: f64, n: usize, lambda: f64) -> Result<f64> {
    Ok((lambda - lambda_prefactor(alpha * alpha) * mode_sum(lambda, n)?).abs())
}

/// `σ_N = (α²/8π²) Σ_{|n|≤N} 1/⟨n⟩²`.
pub fn sigma_weak(alpha: f64, n: usize) -> f64 {
    alpha * alpha / (8.0 * PI * PI) * Shells::new(n).resolvent_sum(1.0)
}

/// `(3/4π)·α²·log N`, the leading asymptotics of `λ_N`.
pub fn asymptotic_reference(alpha: f64, n: usize) -> f64 {
    3.0 / (4.0 * PI) * alpha * alpha * (n as f64).ln()
}

/// Left and right sides of the Riemann-sum estimate
/// `|Σ_{|n|≤N} 1/(a+|n|²) - π log(1 + N²/a)| ≲ a^{-1/2} min(1, N a^{-1/2})`.
pub fn log_sum_bound_check(a: f64, n: usize) -> Result<(f64, f64)> {
    let nf = n as f64;
    let lhs = (mode_sum(a, n)? - PI * (1.0 + nf * nf / a).ln()).abs();
    let rhs = a.sqrt().recip() * (nf / a.sqrt()).min(1.0);
    Ok((lhs, rhs))
}

/// `β_N = 3(σ_N - κ²/4π)`, the vanishing mass mismatch of the weak regime.
pub fn beta_n(sigma: f64, kappa: f64) -> f64 {
    3.0 * (sigma - kappa * kappa / (4.0 * PI))
}

/// Which renormalization is in force.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RenormRegime {
    /// `λ_N = 3σ_N` solved self-consistently.
    Strong,
    /// `λ = 1` in the flow, `σ_N` from the bare sum.
    Weak,
}

/// Constants of one truncation level.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RenormConstants {
    pub n: usize,
    pub alpha: f64,
    /// Coefficient of `∂_t` in the flow; 1 except for the tuned-damping runs.
    pub damping: f64,
    pub lambda: f64,
    pub sigma: f64,
    pub regime: RenormRegime,
}

impl RenormConstants {
    /// Strong-regime constants with unit damping.
    pub fn strong(alpha: f64, n: usize) -> Result<Self> {
        Self::strong_damped(alpha, 1.0, n)
    }

    /// Strong-regime constants for damping `γ`: the root is taken with the
    /// effective strength `α²/γ`.
    pub fn strong_damped(alpha: f64, damping: f64, n: usize) -> Result<Self> {
        check_damping(damping)?;
        if alpha == 0.0 {
            return Err(Error::InvalidConfig("strong regime needs alpha != 0".into()));
        }
        let lambda = solve_lambda_sq(alpha * alpha / damping, &Shells::new(n), n)?;
        Ok(RenormConstants {
            n,
            alpha,
            damping,
            lambda,
            sigma: lambda / 3.0,
            regime: RenormRegime::Strong,
        })
    }

    /// Weak-regime constants with unit damping.
    pub fn weak(alpha: f64, n: usize) -> Self {
        Self::weak_damped(alpha, 1.0, n).expect("unit damping is valid")
    }

    pub fn weak_damped(alpha: f64, damping: f64, n: usize) -> Result<Self> {
        check_damping(damping)?;
        Ok(RenormConstants {
            n,
            alpha,
            damping,
            lambda: 1.0,
            sigma: sigma_weak(alpha / damping.sqrt(), n),
            regime: RenormRegime::Weak,
        })
    }

    /// A noiseless flow with mass `lambda` and the given damping (which may be
    /// zero here, since no invariant measure is needed).
    pub fn noiseless(n: usize, lambda: f64, damping: f64) -> Self {
        RenormConstants {
            n,
            alpha: 0.0,
            damping,
            lambda,
            sigma: 0.0,
            regime: RenormRegime::Weak,
        }
    }

    /// `α²/γ`, twice the stationary velocity variance per mode.
    pub fn noise_scale_sq(&self) -> f64 {
        if self.alpha == 0.0 {
            0.0
        } else {
            self.alpha * self.alpha / self.damping
        }
    }

    /// `⟨n⟩_N² = λ + |n|²`.
    pub fn bracket_n_sq(&self, norm_sq: i64) -> f64 {
        self.lambda + norm_sq as f64
    }
}

fn check_damping(damping: f64) -> Result<()> {
    if damping > 0.0 && damping.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("damping must be positive, got {damping}")))
    }
}

/// `σ_N = (α²/8π²)·mode_sum(λ_N, N)` for solved strong-regime constants.
pub fn sigma_strong(rc: &RenormConstants) -> Result<f64> {
    Ok(rc.noise_scale_sq() / (8.0 * PI * PI) * mode_sum(rc.lambda, rc.n)?)
}

/// `H_k(x; σ)` by the recurrence `H_{k+1} = x H_k - kσ H_{k-1}`.
pub fn hermite(k: usize, x: f64, sigma: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, x);
    if k == 0 {
        return prev;
    }
    for j in 1..k {
        let next = x * cur - j as f64 * sigma * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// All `H_0..=H_k` at one point.
pub fn hermite_all(k: usize, x: f64, sigma: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(k + 1);
    out.push(1.0);
    if k >= 1 {
        out.push(x);
    }
    for j in 1..k {
        out.push(x * out[j] - j as f64 * sigma * out[j - 1]);
    }
    out
}

/// Coefficients of `u^{2k+1} = Σ_j c_j σ^j H_{2k+1-2j}(u; σ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct WickCoefficients {
    pub k: usize,
    pub coeffs: Vec<f64>,
}

pub fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `(2j-1)!!` with `(-1)!! = 1`.
pub fn odd_double_factorial(j: usize) -> f64 {
    (1..=j).map(|i| (2 * i - 1) as f64).product()
}

/// `c_j = binom(2k+1, 2j)·(2j-1)!!` for `j = 0..=k`.
pub fn wick_coefficients(k: usize) -> WickCoefficients {
    assert!(k >= 1, "power index k must be at least 1");
    let coeffs = (0..=k)
        .map(|j| binomial(2 * k + 1, 2 * j) * odd_double_factorial(j))
        .collect();
    WickCoefficients { k, coeffs }
}
