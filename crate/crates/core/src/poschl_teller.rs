//! Relativistic Pöschl–Teller scalar potential.
//!
//! On `|x| < L = π/(2ω)` the potential `S(x) = -m ± m / cos(ωx)` gives
//! `(m + S)² = m² / cos²(ωx)`, and the scalar Hamiltonian becomes the
//! trigonometric Pöschl–Teller operator. Its eigenvalues are
//! `ε_n = ω²(n + λ)² / 2m`, so the relativistic energies `E_n = ω(n + λ)`
//! are exactly equally spaced. Annihilation-operator eigenstates therefore
//! stay eigenstates under time evolution, with eigenvalue `α e^{-iωt}`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numerics::{bessel_k_scaled, gegenbauer_all, integrate_adaptive, log_factorial, log_gamma};

pub const DEFAULT_TRUNCATION: usize = 60;

/// Largest moment order the double-precision verifier accepts.
pub const MAX_MOMENT_ORDER: usize = 12;

/// Which sign of `±m / cos(ωx)` the potential uses. Both give the same
/// `(m + S)²` and hence the same spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SignBranch {
    #[default]
    Plus,
    Minus,
}

/// `λ = 1/2 + 1/2 sqrt(4m²/ω² + 1)`.
pub fn lambda_of(mass: f64, omega: f64) -> Result<f64> {
    if !(mass > 0.0) || !mass.is_finite() {
        return Err(Error::InvalidArgument("mass must be positive".into()));
    }
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(Error::InvalidArgument("frequency must be positive".into()));
    }
    let ratio = mass / omega;
    Ok(0.5 + 0.5 * (4.0 * ratio * ratio + 1.0).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PTModel {
    mass: f64,
    omega: f64,
    lambda: f64,
    branch: SignBranch,
}

impl PTModel {
    pub fn new(mass: f64, omega: f64) -> Result<Self> {
        let lambda = lambda_of(mass, omega)?;
        Ok(Self { mass, omega, lambda, branch: SignBranch::Plus })
    }

    pub fn with_branch(self, branch: SignBranch) -> Self {
        Self { branch, ..self }
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn branch(&self) -> SignBranch {
        self.branch
    }

    /// Half-width `L = π / 2ω` of the confining interval.
    pub fn half_width(&self) -> f64 {
        PI / (2.0 * self.omega)
    }

    /// `E_n = ω (n + λ)`.
    pub fn energy(&self, n: usize) -> f64 {
        self.omega * (n as f64 + self.lambda)
    }

    pub fn schrodinger_eigenvalue(&self, n: usize) -> f64 {
        let e = self.energy(n);
        e * e / (2.0 * self.mass)
    }

    /// `S(x)` on the open interval; infinite at and beyond the walls.
    pub fn potential(&self, x: f64) -> f64 {
        if x.abs() >= self.half_width() {
            return f64::INFINITY;
        }
        let secant = self.mass / (self.omega * x).cos();
        match self.branch {
            SignBranch::Plus => -self.mass + secant,
            SignBranch::Minus => -self.mass - secant,
        }
    }

    /// `ln` of the normalisation constant of `u_n`.
    ///
    /// `∫ (1 - t²)^{λ-1/2} (C_n^λ)² dt = π 2^{1-2λ} Γ(n+2λ) / (n! (n+λ) Γ(λ)²)`
    /// and `dt = ω cos(ωx) dx` fix `𝒩_n² = ω / h_n`.
    fn log_norm(&self, n: usize) -> f64 {
        let lam = self.lambda;
        let nf = n as f64;
        let log_h =
            PI.ln() + (1.0 - 2.0 * lam) * std::f64::consts::LN_2 + log_gamma(nf + 2.0 * lam).expect("n + 2λ > 0")
                - log_factorial(n)
                - (nf + lam).ln()
                - 2.0 * log_gamma(lam).expect("λ > 0");
        0.5 * (self.omega.ln() - log_h)
    }

    /// `u_n(x) = 𝒩_n cos^λ(ωx) C_n^λ(sin ωx)`, zero for `|x| >= L`.
    pub fn eigenfunction(&self, n: usize, x: f64) -> f64 {
        self.eigenfunctions(n, x)[n]
    }

    /// `u_0(x) ..= u_{n_max}(x)`.
    pub fn eigenfunctions(&self, n_max: usize, x: f64) -> Vec<f64> {
        if x.abs() >= self.half_width() {
            return vec![0.0; n_max + 1];
        }
        let phase = self.omega * x;
        let envelope = phase.cos().powf(self.lambda);
        let t = phase.sin().clamp(-1.0, 1.0);
        let poly = gegenbauer_all(n_max, self.lambda, t).expect("λ > 1 and |t| <= 1");
        poly.iter().enumerate().map(|(n, c)| self.log_norm(n).exp() * envelope * c).collect()
    }
}

/// `D(n, λ) = sqrt((n+1)(2λ+n) / ((n+λ)(n+1+λ)))`.
pub fn ladder_coeff(n: usize, lambda: f64) -> f64 {
    let nf = n as f64;
    (((nf + 1.0) * (2.0 * lambda + nf)) / ((nf + lambda) * (nf + 1.0 + lambda))).sqrt()
}

/// Lowering operator on coefficient vectors:
/// `out_n = c_{n+1} (n + 1 + λ) D(n, λ)`, with `out_N = 0`.
pub fn apply_annihilation(model: &PTModel, c: &[Complex64]) -> Vec<Complex64> {
    let lam = model.lambda;
    let mut out = vec![Complex64::new(0.0, 0.0); c.len()];
    for n in 0..c.len().saturating_sub(1) {
        out[n] = c[n + 1] * ((n as f64 + 1.0 + lam) * ladder_coeff(n, lam));
    }
    out
}

/// Raising counterpart `A₊ ψ_n = (n + λ) D(n, λ) ψ_{n+1}`; the top component
/// is dropped by the truncation.
pub fn apply_creation(model: &PTModel, c: &[Complex64]) -> Vec<Complex64> {
    let lam = model.lambda;
    let mut out = vec![Complex64::new(0.0, 0.0); c.len()];
    for n in 0..c.len().saturating_sub(1) {
        out[n + 1] = c[n] * ((n as f64 + lam) * ladder_coeff(n, lam));
    }
    out
}

/// Eigenstate of the lowering operator, truncated at `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct PTCoherentState {
    pub model: PTModel,
    pub alpha: Complex64,
    pub truncation: usize,
    pub coefficients: Vec<Complex64>,
    /// `S(α) = Σ_{n<=N} |α|^{2n} / (n! (n+λ) Γ(2λ+n))`.
    pub s_alpha: f64,
    pub ln_s_alpha: f64,
    /// `N_α = [λ Γ(2λ) S(α)]^{-1/2}`.
    pub n_alpha: f64,
}

/// `ln(n! (n+λ) Γ(2λ+n))`.
fn log_basis_weight(n: usize, lambda: f64) -> f64 {
    let nf = n as f64;
    log_factorial(n) + (nf + lambda).ln() + log_gamma(2.0 * lambda + nf).expect("2λ + n > 0")
}

fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

fn validate_alpha(alpha: Complex64, truncation: usize) -> Result<()> {
    if truncation < 1 {
        return Err(Error::InvalidArgument("truncation must be at least 1".into()));
    }
    if !alpha.re.is_finite() || !alpha.im.is_finite() {
        return Err(Error::InvalidArgument(format!("alpha must be finite, got {alpha}")));
    }
    Ok(())
}

/// `c_n = N_α αⁿ [λΓ(2λ) / (n! (n+λ) Γ(2λ+n))]^{1/2}` for `n = 0..=N`,
/// evaluated in log space.
pub fn coherent_coefficients(model: &PTModel, alpha: Complex64, truncation: usize) -> Result<PTCoherentState> {
    validate_alpha(alpha, truncation)?;
    let lam = model.lambda;
    let r = alpha.norm();
    let ln_r = if r > 0.0 { r.ln() } else { f64::NEG_INFINITY };
    let theta = alpha.arg();

    let log_w: Vec<f64> = (0..=truncation).map(|n| log_basis_weight(n, lam)).collect();
    let log_terms: Vec<f64> =
        log_w.iter().enumerate().map(|(n, lw)| if n == 0 { -lw } else { 2.0 * n as f64 * ln_r - lw }).collect();
    let ln_s = log_sum_exp(&log_terms);
    let ln_prefactor = lam.ln() + log_gamma(2.0 * lam)?;

    let coefficients = (0..=truncation)
        .map(|n| {
            let log_mod = if n == 0 { 0.0 } else { n as f64 * ln_r };
            let modulus = (log_mod - 0.5 * log_w[n] - 0.5 * ln_s).exp();
            Complex64::from_polar(modulus, n as f64 * theta)
        })
        .collect();

    Ok(PTCoherentState {
        model: *model,
        alpha,
        truncation,
        coefficients,
        s_alpha: ln_s.exp(),
        ln_s_alpha: ln_s,
        n_alpha: (-0.5 * (ln_prefactor + ln_s)).exp(),
    })
}

/// The same coefficients built by iterating
/// `c_{n+1} = α [(n+λ) / ((n+1)(2λ+n)(n+1+λ))]^{1/2} c_n` from `c_0 = N_α`.
pub fn recursion_coefficients(model: &PTModel, alpha: Complex64, truncation: usize) -> Result<Vec<Complex64>> {
    let state = coherent_coefficients(model, alpha, truncation)?;
    let lam = model.lambda;
    let mut c = Vec::with_capacity(truncation + 1);
    c.push(Complex64::new(state.n_alpha, 0.0));
    for n in 0..truncation {
        let nf = n as f64;
        let ratio = ((nf + lam) / ((nf + 1.0) * (2.0 * lam + nf) * (nf + 1.0 + lam))).sqrt();
        let next = c[n] * alpha * ratio;
        c.push(next);
    }
    Ok(c)
}

/// Upper bound on the part of `S(α)` beyond the truncation, relative to the
/// truncated sum. The term ratio decreases with `n`, so the first omitted
/// term and a geometric majorant bound the remainder.
pub fn series_tail_bound(model: &PTModel, alpha: Complex64, truncation: usize) -> Result<f64> {
    let state = coherent_coefficients(model, alpha, truncation)?;
    let r2 = alpha.norm_sqr();
    if r2 == 0.0 {
        return Ok(0.0);
    }
    let lam = model.lambda;
    let first = truncation + 1;
    let ln_first = first as f64 * r2.ln() - log_basis_weight(first, lam);
    let nf = first as f64;
    let ratio = r2 * (nf + lam) / ((nf + 1.0) * (nf + 1.0 + lam) * (2.0 * lam + nf));
    if ratio >= 1.0 {
        return Ok(f64::INFINITY);
    }
    Ok((ln_first - state.ln_s_alpha).exp() / (1.0 - ratio))
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// `‖A₋c - αc‖ / ‖c‖` for a coherent state.
pub fn eigenstate_residual(state: &PTCoherentState) -> f64 {
    let lowered = apply_annihilation(&state.model, &state.coefficients);
    let diff: Vec<Complex64> = lowered.iter().zip(&state.coefficients).map(|(l, c)| l - state.alpha * c).collect();
    norm(&diff) / norm(&state.coefficients)
}

/// Positive-energy evolution `c_n(t) = c_n e^{-iω(n+λ)t}`.
pub fn evolve(state: &PTCoherentState, t: f64) -> Vec<Complex64> {
    state
        .coefficients
        .iter()
        .enumerate()
        .map(|(n, c)| c * Complex64::from_polar(1.0, -state.model.energy(n) * t))
        .collect()
}

/// Relative distance between the evolved state and
/// `e^{-iωλt} ψ_{α e^{-iωt}}`; zero up to round-off for an equally spaced
/// spectrum.
pub fn phase_coherence_check(model: &PTModel, alpha: Complex64, truncation: usize, t: f64) -> Result<f64> {
    if !t.is_finite() {
        return Err(Error::InvalidArgument(format!("time must be finite, got {t}")));
    }
    let state = coherent_coefficients(model, alpha, truncation)?;
    let evolved = evolve(&state, t);
    let rotated_alpha = alpha * Complex64::from_polar(1.0, -model.omega * t);
    let rotated = coherent_coefficients(model, rotated_alpha, truncation)?;
    let global = Complex64::from_polar(1.0, -model.omega * model.lambda * t);
    let reference: Vec<Complex64> = rotated.coefficients.iter().map(|c| c * global).collect();
    let diff: Vec<Complex64> = evolved.iter().zip(&reference).map(|(a, b)| a - b).collect();
    Ok(norm(&diff) / norm(&reference))
}

/// Candidate weight for the resolution of unity,
/// `W(x) = (λ - 1) G(x) - x G'(x)` with `G(x) = 2 x^{λ-1/2} K_{2λ-1}(2√x)`.
///
/// `∫ xⁿ G dx = n! Γ(n + 2λ)` (Mellin transform of `K_ν`), and integrating
/// `-x G'` by parts adds a factor `(n + 1)`, so `∫ xⁿ W dx = n! (n+λ) Γ(2λ+n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasureWeight {
    lambda: f64,
}

impl MeasureWeight {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda > 0.5) || !lambda.is_finite() {
            return Err(Error::Domain(format!("measure weight requires λ > 1/2, got {lambda}")));
        }
        Ok(Self { lambda })
    }

    pub fn for_model(model: &PTModel) -> Self {
        Self { lambda: model.lambda }
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    fn order(&self) -> f64 {
        2.0 * self.lambda - 1.0
    }

    fn check(x: f64) -> Result<()> {
        if !(x > 0.0) || !x.is_finite() {
            return Err(Error::Domain(format!("measure weight requires x > 0, got {x}")));
        }
        Ok(())
    }

    pub fn g(&self, x: f64) -> Result<f64> {
        Self::check(x)?;
        let z = 2.0 * x.sqrt();
        let k = bessel_k_scaled(self.order(), z)?;
        Ok(2.0 * ((self.lambda - 0.5) * x.ln() - z).exp() * k)
    }

    /// `G'(x) = -2 x^{λ-1} K_{2λ-2}(2√x)`, free of the cancellation in the
    /// derivative recurrence at small `x`.
    pub fn g_prime(&self, x: f64) -> Result<f64> {
        Self::check(x)?;
        let z = 2.0 * x.sqrt();
        let k = bessel_k_scaled(self.order() - 1.0, z)?;
        Ok(-2.0 * ((self.lambda - 1.0) * x.ln() - z).exp() * k)
    }

    /// Equals `2 x^{λ-1/2} [(λ-1) K_{2λ-1}(2√x) + √x K_{2λ-2}(2√x)]`, positive
    /// for `λ >= 1`.
    pub fn weight(&self, x: f64) -> Result<f64> {
        Ok((self.lambda - 1.0) * self.g(x)? - x * self.g_prime(x)?)
    }

    /// `ln(n! (n+λ) Γ(2λ+n))`, the moments `W` must reproduce.
    pub fn log_target_moment(&self, n: usize) -> f64 {
        log_basis_weight(n, self.lambda)
    }
}

pub fn measure_weight(model: &PTModel, x: f64) -> Result<f64> {
    MeasureWeight::for_model(model).weight(x)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentCheck {
    pub n: usize,
    pub integral: f64,
    pub target: f64,
    pub rel_error: f64,
    /// Upper end of the truncated integration range in `x`.
    pub x_cut: f64,
    pub converged: bool,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentReport {
    pub lambda: f64,
    pub tol: f64,
    pub checks: Vec<MomentCheck>,
    /// Smallest weight value seen on a sampling grid over `(0, x_cut]`.
    pub weight_min_sampled: f64,
    pub weight_negative_samples: usize,
    pub weight_samples: usize,
}

impl MomentReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn max_rel_error(&self) -> f64 {
        self.checks.iter().map(|c| c.rel_error).fold(0.0, f64::max)
    }
}

/// Checks `∫₀^∞ xⁿ W(x) dx = n! (n+λ) Γ(2λ+n)` for `n = 0..=n_max`.
pub fn verify_measure_moments(model: &PTModel, n_max: usize, tol: f64) -> Result<MomentReport> {
    let weight = MeasureWeight::for_model(model);
    verify_moments_with(|x| weight.weight(x), model.lambda, n_max, tol)
}

/// Moment check for an arbitrary weight against the same targets; used for
/// negative controls.
pub fn verify_moments_with<F>(weight: F, lambda: f64, n_max: usize, tol: f64) -> Result<MomentReport>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    if n_max > MAX_MOMENT_ORDER {
        return Err(Error::InvalidArgument(format!(
            "moment order {n_max} exceeds the supported maximum {MAX_MOMENT_ORDER}"
        )));
    }
    if !(tol >= 1e-8) || !tol.is_finite() {
        return Err(Error::InvalidArgument(format!("moment tolerance must be at least 1e-8, got {tol}")));
    }
    let targets = MeasureWeight::new(lambda)?;

    let checks =
        (0..=n_max).into_par_iter().map(|n| moment_check(&weight, &targets, n, tol)).collect::<Result<Vec<_>>>()?;

    let x_cut = checks.iter().map(|c| c.x_cut).fold(0.0, f64::max);
    let samples = 400;
    let mut weight_min_sampled = f64::INFINITY;
    let mut weight_negative_samples = 0;
    for i in 1..=samples {
        // Sample uniformly in √x, matching the integration variable.
        let u = x_cut.sqrt() * i as f64 / samples as f64;
        let w = weight(u * u)?;
        weight_min_sampled = weight_min_sampled.min(w);
        if w < 0.0 {
            weight_negative_samples += 1;
        }
    }

    Ok(MomentReport { lambda, tol, checks, weight_min_sampled, weight_negative_samples, weight_samples: samples })
}

fn moment_check<F>(weight: &F, targets: &MeasureWeight, n: usize, tol: f64) -> Result<MomentCheck>
where
    F: Fn(f64) -> Result<f64>,
{
    let ln_target = targets.log_target_moment(n);
    let target = ln_target.exp();
    // x = u², dx = 2u du; the integrand then decays like e^{-2u}.
    let integrand = |u: f64| -> Result<f64> {
        if u <= 0.0 {
            return Ok(0.0);
        }
        Ok(2.0 * u.powi(2 * n as i32 + 1) * weight(u * u)?)
    };
    let tail_budget = tol * target * 1e-4;
    let mut u_cut = (4.0 * (n as f64 + targets.lambda()) + 8.0).max(12.0);
    while integrand(u_cut)?.abs() > tail_budget {
        u_cut *= 1.25;
    }

    let failure = std::cell::RefCell::new(None);
    let result = integrate_adaptive(
        |u| match integrand(u) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        },
        0.0,
        u_cut,
        tol * target * 1e-3,
        tol * 1e-3,
        4000,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let result = result?;
    let ratio = result.value * (-ln_target).exp();
    let rel_error = (ratio - 1.0).abs();
    Ok(MomentCheck {
        n,
        integral: result.value,
        target,
        rel_error,
        x_cut: u_cut * u_cut,
        converged: result.converged,
        passed: result.converged && rel_error <= tol,
    })
}
