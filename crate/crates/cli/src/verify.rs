//! Invariant suites behind `kgcoherent verify`.

use std::str::FromStr;

use kgcoherent::evolution::{self, BasisTable, GridMoments, Model, StateVector};
use kgcoherent::linear_osc::{self, CoherentSpec, LinearModel};
use kgcoherent::oracle::{self, PotentialSpec};
use kgcoherent::poschl_teller::{self as pt, MeasureWeight, PTModel};
use kgcoherent::Complex64;
use serde::Serialize;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Spectra,
    Coherence,
    Measure,
    Oracle,
    All,
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "spectra" => Ok(Self::Spectra),
            "coherence" => Ok(Self::Coherence),
            "measure" => Ok(Self::Measure),
            "oracle" => Ok(Self::Oracle),
            "all" => Ok(Self::All),
            _ => Err(format!("unknown suite '{s}' (expected spectra, coherence, measure, oracle or all)")),
        }
    }
}

impl Suite {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Spectra => "spectra",
            Self::Coherence => "coherence",
            Self::Measure => "measure",
            Self::Oracle => "oracle",
            Self::All => "all",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub bound: f64,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self { name: name.into(), measured, bound, passed: measured <= bound }
    }

    pub fn at_least(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self { name: name.into(), measured, bound, passed: measured >= bound }
    }
}

/// Physical parameters the suites run at.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteParams {
    pub linear: LinearModel,
    pub pt: PTModel,
    pub fd_grid_points: usize,
    pub moment_order: usize,
    pub moment_tol: f64,
}

/// `α` values used by the bound and oracle lattices.
pub const ALPHA_LATTICE: [Complex64; 4] =
    [Complex64::new(0.0, 0.0), Complex64::new(0.1, 0.2), Complex64::new(1.0, 2.0), Complex64::new(2.0, -1.0)];

pub const TIME_LATTICE: [f64; 4] = [0.0, 7.3, 23.1, 48.6];

const HEISENBERG_FLOOR: f64 = 0.5 * (1.0 - 1e-6);

pub fn run(suite: Suite, p: &SuiteParams) -> Result<Vec<Check>, CliError> {
    Ok(match suite {
        Suite::Spectra => spectra(p)?,
        Suite::Coherence => coherence(p)?,
        Suite::Measure => measure(p)?,
        Suite::Oracle => oracle_suite(p)?,
        Suite::All => {
            let mut all = spectra(p)?;
            all.extend(coherence(p)?);
            all.extend(measure(p)?);
            all.extend(oracle_suite(p)?);
            all
        }
    })
}

fn spectrum_checks(prefix: &str, report: &oracle::SpectrumReport) -> Vec<Check> {
    vec![
        Check::at_most(format!("{prefix}.fd_max_rel_error"), report.max_rel_error, oracle::SPECTRUM_TOLERANCE),
        Check::at_least(format!("{prefix}.fd_min_order"), report.min_order, 1.8),
        Check::at_most(format!("{prefix}.fd_max_order"), report.max_order, 2.2),
    ]
}

fn spectra(p: &SuiteParams) -> Result<Vec<Check>, CliError> {
    let levels = 9;
    let linear_e: Vec<f64> = (0..levels).map(|n| p.linear.energy(n)).collect();
    let pt_e: Vec<f64> = (0..levels).map(|n| p.pt.energy(n)).collect();
    let linear_spec = PotentialSpec::linear(&p.linear, p.fd_grid_points)?;
    let pt_spec = PotentialSpec::poschl_teller(&p.pt, p.fd_grid_points)?;
    let (linear, ptr) = rayon::join(
        || oracle::spectrum_compare(&linear_spec, &linear_e, levels),
        || oracle::spectrum_compare(&pt_spec, &pt_e, levels),
    );
    let mut checks = spectrum_checks("linear", &linear?);
    checks.extend(spectrum_checks("pt", &ptr?));

    let spacing = (0..=pt::DEFAULT_TRUNCATION)
        .map(|n| ((p.pt.energy(n + 1) - p.pt.energy(n)) - p.pt.omega()).abs() / p.pt.energy(n + 1))
        .fold(0.0, f64::max);
    checks.push(Check::at_most("pt.equal_spacing_deviation", spacing, 4.0 * f64::EPSILON));
    Ok(checks)
}

fn coherence(p: &SuiteParams) -> Result<Vec<Check>, CliError> {
    let alphas = [
        Complex64::new(0.5, 0.0),
        Complex64::new(1.0, 0.5),
        Complex64::new(-1.5, 1.0),
        Complex64::new(0.0, 2.0),
        Complex64::new(2.0, -2.0),
    ];
    let mut phase = 0.0f64;
    for alpha in alphas {
        for j in 0..20 {
            let t = 0.37 * j as f64;
            phase = phase.max(pt::phase_coherence_check(&p.pt, alpha, pt::DEFAULT_TRUNCATION, t)?);
        }
    }

    let disc: Vec<Complex64> = (0..=8)
        .flat_map(|i| (0..8).map(move |j| (i, j)))
        .map(|(i, j)| Complex64::from_polar(0.25 * i as f64, j as f64 * std::f64::consts::FRAC_PI_4))
        .collect();
    let mut eigen = 0.0f64;
    let mut recursion = 0.0f64;
    let mut pt_norm = 0.0f64;
    let mut linear_norm = 0.0f64;
    for &alpha in &disc {
        let state = pt::coherent_coefficients(&p.pt, alpha, pt::DEFAULT_TRUNCATION)?;
        eigen = eigen.max(pt::eigenstate_residual(&state));
        let iterated = pt::recursion_coefficients(&p.pt, alpha, pt::DEFAULT_TRUNCATION)?;
        for (a, b) in state.coefficients.iter().zip(&iterated) {
            if b.norm() > 0.0 {
                recursion = recursion.max((a - b).norm() / b.norm());
            }
        }
        pt_norm = pt_norm.max((state.coefficients.iter().map(|c| c.norm_sqr()).sum::<f64>() - 1.0).abs());
        let spec = CoherentSpec::new(alpha, linear_osc::DEFAULT_TRUNCATION)?;
        let c = linear_osc::coherent_coefficients(&spec);
        linear_norm = linear_norm.max((c.iter().map(|c| c.norm_sqr()).sum::<f64>() - 1.0).abs());
    }

    let big = StateVector::linear_coherent(
        &p.linear,
        &CoherentSpec::new(Complex64::new(1.0, 2.0), linear_osc::DEFAULT_TRUNCATION)?,
    );
    Ok(vec![
        Check::at_most("pt.phase_coherence", phase, 1e-12),
        Check::at_most("pt.eigenstate_residual", eigen, 1e-10),
        Check::at_most("pt.recursion_consistency", recursion, 1e-13),
        Check::at_most("pt.normalization", pt_norm, 1e-10),
        Check::at_most("linear.normalization", linear_norm, 1e-10),
        Check::at_most("linear.lowering_residual_t0", evolution::lowering_residual(&big, 0.0)?, 1e-12),
        Check::at_least("linear.lowering_residual_t1", evolution::lowering_residual(&big, 1.0)?, 1e-3),
    ])
}

fn measure(p: &SuiteParams) -> Result<Vec<Check>, CliError> {
    let report = pt::verify_measure_moments(&p.pt, p.moment_order, p.moment_tol)?;
    let mut checks: Vec<Check> = report
        .checks
        .iter()
        .map(|c| Check {
            name: format!("measure.moment_{}", c.n),
            measured: c.rel_error,
            bound: p.moment_tol,
            passed: c.passed,
        })
        .collect();
    let weight = MeasureWeight::for_model(&p.pt);
    let control = pt::verify_moments_with(|x| weight.g(x), weight.lambda(), 0, p.moment_tol)?;
    let control_error = control.checks[0].rel_error;
    checks.push(Check {
        name: "measure.negative_control_rejected".into(),
        measured: control_error,
        bound: p.moment_tol,
        passed: !control.all_passed(),
    });
    checks.push(Check::at_most("measure.weight_negative_samples", report.weight_negative_samples as f64, 0.0));
    Ok(checks)
}

fn oracle_suite(p: &SuiteParams) -> Result<Vec<Check>, CliError> {
    let grid = Model::from(p.linear).default_grid();
    let mut mismatch = 0.0f64;
    let mut quadrature_min = f64::INFINITY;
    let mut series_min = f64::INFINITY;
    let series_times = linear_osc::uniform_times(0.0, 50.0, linear_osc::DEFAULT_TIME_STEP)?;
    for alpha in ALPHA_LATTICE {
        let spec = CoherentSpec::new(alpha, linear_osc::DEFAULT_TRUNCATION)?;
        let state = StateVector::linear_coherent(&p.linear, &spec);
        let table = BasisTable::new(*state.model(), state.truncation(), grid)?;
        for t in TIME_LATTICE {
            let m = GridMoments::of(&table.synthesize(&state, t)?)?;
            let e = linear_osc::expectation_series(&p.linear, &spec, t)?;
            for (a, b) in [
                (m.position.mean_x, e.mean_x),
                (m.momentum.mean_p, e.mean_p),
                (m.position.mean_x2, e.mean_x2),
                (m.momentum.mean_p2, e.mean_p2),
            ] {
                mismatch = mismatch.max((a - b).abs() / b.abs().max(1e-2));
            }
            quadrature_min = quadrature_min.min(m.uncertainty()?.product);
        }
        let series = linear_osc::time_series(&p.linear, &spec, &series_times)?;
        series_min = series.samples.iter().map(|s| s.product).fold(series_min, f64::min);
    }
    let pt_state = StateVector::pt_coherent(&pt::coherent_coefficients(&p.pt, Complex64::new(1.0, 0.0), 60)?);
    let pt_product = evolution::heisenberg_product(&pt_state, &pt_state.model().default_grid(), 0.0)?.product;
    Ok(vec![
        Check::at_most("linear.closed_form_vs_quadrature", mismatch, 1e-6),
        Check::at_least("linear.heisenberg_series_min", series_min, HEISENBERG_FLOOR),
        Check::at_least("linear.heisenberg_quadrature_min", quadrature_min, HEISENBERG_FLOOR),
        Check::at_least("pt.heisenberg_quadrature", pt_product, HEISENBERG_FLOOR),
    ])
}
