//! Linear scalar potential `S(x) = k|x| - m`.
//!
//! With this potential `(m + S)² = k² x²`, so the scalar Hamiltonian is a
//! harmonic oscillator with `mω = k`. The relativistic energies
//! `E_n = sqrt((2n + 1) k)` are not equally spaced, which is what spoils the
//! coherence of the evolved annihilation-operator eigenstates.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numerics::{log_factorial, NeumaierSum};

pub const DEFAULT_COUPLING: f64 = 1.0;
pub const DEFAULT_TRUNCATION: usize = 50;
pub const DEFAULT_TIME_STEP: f64 = 0.05;

/// Variances down to this (negative) value are treated as round-off.
pub const VARIANCE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearModel {
    mass: f64,
    coupling: f64,
}

impl LinearModel {
    pub fn new(mass: f64, coupling: f64) -> Result<Self> {
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(Error::InvalidArgument("mass must be positive".into()));
        }
        if !(coupling > 0.0) || !coupling.is_finite() {
            return Err(Error::InvalidArgument("coupling must be positive".into()));
        }
        Ok(Self { mass, coupling })
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    /// Oscillator frequency `ω = k / m`.
    pub fn omega(&self) -> f64 {
        self.coupling / self.mass
    }

    /// Positive-branch energy `E_n = sqrt((2n + 1) k)`.
    pub fn energy(&self, n: usize) -> f64 {
        ((2 * n + 1) as f64 * self.coupling).sqrt()
    }

    /// Eigenvalue of the scalar Hamiltonian, `ε_n = (n + 1/2) ω = E_n² / 2m`.
    pub fn schrodinger_eigenvalue(&self, n: usize) -> f64 {
        (2 * n + 1) as f64 * self.coupling / (2.0 * self.mass)
    }

    pub fn potential(&self, x: f64) -> f64 {
        self.coupling * x.abs() - self.mass
    }

    /// Unit-normalised eigenfunction
    /// `u_n(x) = (k/π)^{1/4} (2ⁿ n!)^{-1/2} e^{-k x²/2} H_n(√k x)`.
    pub fn eigenfunction(&self, n: usize, x: f64) -> f64 {
        self.eigenfunctions(n, x)[n]
    }

    /// `u_0(x) ..= u_{n_max}(x)`.
    ///
    /// Uses the recursion for the normalised functions directly, so neither
    /// `H_n` nor `n!` is ever formed and nothing overflows.
    pub fn eigenfunctions(&self, n_max: usize, x: f64) -> Vec<f64> {
        let xi = self.coupling.sqrt() * x;
        let mut out = Vec::with_capacity(n_max + 1);
        out.push((self.coupling / PI).powf(0.25) * (-0.5 * xi * xi).exp());
        if n_max >= 1 {
            out.push(2f64.sqrt() * xi * out[0]);
        }
        for n in 1..n_max {
            let nf = n as f64;
            let next = (2.0 / (nf + 1.0)).sqrt() * xi * out[n] - (nf / (nf + 1.0)).sqrt() * out[n - 1];
            out.push(next);
        }
        out
    }
}

impl Default for LinearModel {
    fn default() -> Self {
        Self { mass: 1.0, coupling: DEFAULT_COUPLING }
    }
}

/// Eigenvalue `α = a + ib` and truncation order `N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherentSpec {
    alpha: Complex64,
    truncation: usize,
}

impl CoherentSpec {
    pub fn new(alpha: Complex64, truncation: usize) -> Result<Self> {
        if truncation < 1 {
            return Err(Error::InvalidArgument("truncation must be at least 1".into()));
        }
        if !alpha.re.is_finite() || !alpha.im.is_finite() || !alpha.norm_sqr().is_finite() {
            return Err(Error::InvalidArgument(format!("alpha must be finite, got {alpha}")));
        }
        Ok(Self { alpha, truncation })
    }

    pub fn alpha(&self) -> Complex64 {
        self.alpha
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }
}

/// Poisson weights `e^{-|α|²} |α|^{2n} / n!` for `n = 0..=n_max`.
fn poisson_weights(alpha: Complex64, n_max: usize) -> Vec<f64> {
    let r2 = alpha.norm_sqr();
    if r2 == 0.0 {
        let mut w = vec![0.0; n_max + 1];
        w[0] = 1.0;
        return w;
    }
    let ln_r2 = r2.ln();
    (0..=n_max).map(|n| (-r2 + n as f64 * ln_r2 - log_factorial(n)).exp()).collect()
}

/// Coefficients `c_n = e^{-|α|²/2} αⁿ / sqrt(n!)` for `n = 0..=N`.
pub fn coherent_coefficients(spec: &CoherentSpec) -> Vec<Complex64> {
    let n_max = spec.truncation;
    let alpha = spec.alpha;
    let r = alpha.norm();
    let mut c = vec![Complex64::new(0.0, 0.0); n_max + 1];
    if r == 0.0 {
        c[0] = Complex64::new(1.0, 0.0);
        return c;
    }
    let ln_r = r.ln();
    let theta = alpha.arg();
    for (n, slot) in c.iter_mut().enumerate() {
        let nf = n as f64;
        let modulus = (-0.5 * r * r + nf * ln_r - 0.5 * log_factorial(n)).exp();
        *slot = Complex64::from_polar(modulus, nf * theta);
    }
    c
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpectationValues {
    pub mean_x: f64,
    pub mean_p: f64,
    pub mean_x2: f64,
    pub mean_p2: f64,
}

impl ExpectationValues {
    pub fn var_x(&self) -> f64 {
        self.mean_x2 - self.mean_x * self.mean_x
    }

    pub fn var_p(&self) -> f64 {
        self.mean_p2 - self.mean_p * self.mean_p
    }
}

/// Closed-form `⟨x⟩, ⟨p⟩, ⟨x²⟩, ⟨p²⟩` of the evolved positive-energy state.
///
/// With `w_n = e^{-|α|²}|α|^{2n}/n!`, `θ1 = (E_n - E_{n+1}) t` and
/// `θ2 = (E_n - E_{n+2}) t`:
///
/// ```text
/// ⟨x⟩  = sqrt(2/k) Σ [a cos θ1 - b sin θ1] w_n
/// ⟨p⟩  = sqrt(2k)  Σ [a sin θ1 + b cos θ1] w_n
/// ⟨x²⟩ = (|α|² + 1/2)/k + (1/k) Σ [(a² - b²) cos θ2 - 2ab sin θ2] w_n
/// ⟨p²⟩ = k(|α|² + 1/2)  -  k    Σ [(a² - b²) cos θ2 - 2ab sin θ2] w_n
/// ```
///
/// summed over `n = 0..=N` with compensated summation.
pub fn expectation_series(model: &LinearModel, spec: &CoherentSpec, t: f64) -> Result<ExpectationValues> {
    if !t.is_finite() {
        return Err(Error::InvalidArgument(format!("time must be finite, got {t}")));
    }
    let k = model.coupling;
    let (a, b) = (spec.alpha.re, spec.alpha.im);
    let r2 = spec.alpha.norm_sqr();
    let weights = poisson_weights(spec.alpha, spec.truncation);

    let mut sx = NeumaierSum::new();
    let mut sp = NeumaierSum::new();
    let mut s2 = NeumaierSum::new();
    for (n, &w) in weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let e0 = model.energy(n);
        let theta1 = (e0 - model.energy(n + 1)) * t;
        let theta2 = (e0 - model.energy(n + 2)) * t;
        let (s1, c1) = theta1.sin_cos();
        let (s2_, c2) = theta2.sin_cos();
        sx.add((a * c1 - b * s1) * w);
        sp.add((a * s1 + b * c1) * w);
        s2.add(((a * a - b * b) * c2 - 2.0 * a * b * s2_) * w);
    }
    let second = s2.value();
    let values = ExpectationValues {
        mean_x: (2.0 / k).sqrt() * sx.value(),
        mean_p: (2.0 * k).sqrt() * sp.value(),
        mean_x2: (r2 + 0.5) / k + second / k,
        mean_p2: k * (r2 + 0.5) - k * second,
    };
    let all_finite = [values.mean_x, values.mean_p, values.mean_x2, values.mean_p2].iter().all(|v| v.is_finite());
    if !all_finite {
        return Err(Error::Overflow(format!("expectation series diverged at t = {t}")));
    }
    Ok(values)
}

/// `Δx`, `Δp` and their product.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Uncertainty {
    pub dx: f64,
    pub dp: f64,
    pub product: f64,
}

impl Uncertainty {
    /// Square roots of the variances; values in `[-1e-10, 0)` are clamped to
    /// zero, anything more negative is an error.
    pub fn from_variances(var_x: f64, var_p: f64) -> Result<Self> {
        for (name, v) in [("x", var_x), ("p", var_p)] {
            if !(v >= -VARIANCE_TOLERANCE) {
                return Err(Error::Consistency(format!("variance of {name} is {v:e}")));
            }
        }
        let dx = var_x.max(0.0).sqrt();
        let dp = var_p.max(0.0).sqrt();
        Ok(Self { dx, dp, product: dx * dp })
    }
}

pub fn uncertainties(model: &LinearModel, spec: &CoherentSpec, t: f64) -> Result<Uncertainty> {
    let ev = expectation_series(model, spec, t)?;
    Uncertainty::from_variances(ev.var_x(), ev.var_p())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeSample {
    pub t: f64,
    pub mean_x: f64,
    pub mean_p: f64,
    pub var_x: f64,
    pub var_p: f64,
    pub dx: f64,
    pub dp: f64,
    pub product: f64,
}

impl TimeSample {
    pub fn new(t: f64, mean_x: f64, mean_p: f64, var_x: f64, var_p: f64) -> Result<Self> {
        let u = Uncertainty::from_variances(var_x, var_p)?;
        Ok(Self { t, mean_x, mean_p, var_x, var_p, dx: u.dx, dp: u.dp, product: u.product })
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TimeSeries {
    pub samples: Vec<TimeSample>,
}

impl TimeSeries {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn column(&self, f: impl Fn(&TimeSample) -> f64) -> Vec<f64> {
        self.samples.iter().map(f).collect()
    }
}

/// Rejects empty or non-increasing time grids.
pub fn validate_time_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() {
        return Err(Error::InvalidArgument("time grid is empty".into()));
    }
    if t_grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidArgument("time grid contains non-finite values".into()));
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("time grid must be strictly increasing".into()));
    }
    Ok(())
}

/// `t0, t0 + dt, ...` up to and including `t1` (within a small fraction of `dt`).
/// Each sample is `t0 + i·dt`, not an accumulated sum.
pub fn uniform_times(t0: f64, t1: f64, dt: f64) -> Result<Vec<f64>> {
    if !(t0.is_finite() && t1.is_finite() && dt.is_finite()) || !(t0 < t1) || !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "time range requires t0 < t1 and dt > 0, got t0={t0} t1={t1} dt={dt}"
        )));
    }
    let steps = ((t1 - t0) / dt + 1e-9).floor() as usize;
    Ok((0..=steps).map(|i| t0 + i as f64 * dt).collect())
}

/// Closed-form time series over `t_grid`; samples are evaluated in parallel
/// and returned in grid order.
pub fn time_series(model: &LinearModel, spec: &CoherentSpec, t_grid: &[f64]) -> Result<TimeSeries> {
    validate_time_grid(t_grid)?;
    let samples = t_grid
        .par_iter()
        .map(|&t| {
            let ev = expectation_series(model, spec, t)?;
            TimeSample::new(t, ev.mean_x, ev.mean_p, ev.var_x(), ev.var_p())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TimeSeries { samples })
}
