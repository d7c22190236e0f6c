//! Subcommand implementations.

use std::fs;
use std::io::Write;
use std::path::Path;

use kgcoherent::evolution::{BasisTable, GridMoments, Model, StateVector};
use kgcoherent::linear_osc::{self, CoherentSpec, LinearModel, TimeSample};
use kgcoherent::numerics::Grid;
use kgcoherent::oracle::{self, PotentialSpec};
use kgcoherent::poschl_teller::{self as pt, PTModel, SignBranch};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Branch, Method, ModelSelector, OutputFormat, RunConfig};
use crate::figures::{self, FigureSelection};
use crate::output::{self, fmt_g9, SeriesRow};
use crate::verify::{self, Check, Suite, SuiteParams};
use crate::{CliError, Command};

const DEFAULT_SPECTRUM_LEVELS: usize = 10;
const DEFAULT_ORACLE_LEVELS: usize = 8;

pub fn dispatch(command: &Command, config: &RunConfig) -> Result<bool, CliError> {
    match command {
        Command::Spectrum => spectrum(config),
        Command::State => state(config),
        Command::Evolve => evolve(config),
        Command::Figures { figure } => write_figures(figure, config),
        Command::Verify { suite } => run_verify(*suite, config),
        Command::MeasureCheck => measure_check(config),
        Command::Oracle => run_oracle(config),
    }
}

fn linear_model(config: &RunConfig) -> Result<LinearModel, CliError> {
    Ok(LinearModel::new(config.m, config.k)?)
}

fn pt_model(config: &RunConfig) -> Result<PTModel, CliError> {
    let branch = match config.branch {
        Branch::Plus => SignBranch::Plus,
        Branch::Minus => SignBranch::Minus,
    };
    Ok(PTModel::new(config.m, config.omega)?.with_branch(branch))
}

fn model(config: &RunConfig) -> Result<Model, CliError> {
    Ok(match config.model {
        ModelSelector::Linear => Model::from(linear_model(config)?),
        ModelSelector::Pt => Model::from(pt_model(config)?),
    })
}

fn default_truncation(config: &RunConfig) -> usize {
    config.n.unwrap_or(match config.model {
        ModelSelector::Linear => linear_osc::DEFAULT_TRUNCATION,
        ModelSelector::Pt => pt::DEFAULT_TRUNCATION,
    })
}

/// Writes to `--output` when set, standard output otherwise.
fn emit(config: &RunConfig, text: &str) -> Result<(), CliError> {
    match &config.output {
        Some(path) => write_file(path, text),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, text)?;
    Ok(())
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    command: &'a str,
    config: &'a RunConfig,
    #[serde(flatten)]
    body: T,
}

fn emit_json<T: Serialize>(config: &RunConfig, command: &str, body: T) -> Result<(), CliError> {
    emit(config, &output::json(&Envelope { command, config, body })?)
}

#[derive(Serialize)]
struct Level {
    n: usize,
    energy: f64,
    epsilon: f64,
}

fn spectrum(config: &RunConfig) -> Result<bool, CliError> {
    let model = model(config)?;
    let count = config.n.unwrap_or(DEFAULT_SPECTRUM_LEVELS);
    let levels: Vec<Level> = (0..count)
        .map(|n| {
            let energy = model.energy(n);
            let epsilon = match model {
                Model::LinearScalar(m) => m.schrodinger_eigenvalue(n),
                Model::PoschlTeller(m) => m.schrodinger_eigenvalue(n),
            };
            Level { n, energy, epsilon }
        })
        .collect();
    match config.format.unwrap_or(OutputFormat::Csv) {
        OutputFormat::Csv => emit(
            config,
            &output::csv("n,E_n,epsilon_n", &levels, |l| vec![l.n.to_string(), fmt_g9(l.energy), fmt_g9(l.epsilon)]),
        )?,
        OutputFormat::Json => {
            #[derive(Serialize)]
            struct Body<'a> {
                levels: &'a [Level],
            }
            emit_json(config, "spectrum", Body { levels: &levels })?
        }
    }
    Ok(true)
}

#[derive(Serialize)]
struct CoefficientRow {
    n: usize,
    re: f64,
    im: f64,
    abs2: f64,
    cumulative: f64,
}

#[derive(Serialize)]
struct PtConstants {
    lambda: f64,
    s_alpha: f64,
    n_alpha: f64,
    tail_bound: f64,
}

fn state(config: &RunConfig) -> Result<bool, CliError> {
    let truncation = default_truncation(config);
    let (coefficients, constants) = match config.model {
        ModelSelector::Linear => {
            linear_model(config)?;
            let spec = CoherentSpec::new(config.alpha, truncation)?;
            (linear_osc::coherent_coefficients(&spec), None)
        }
        ModelSelector::Pt => {
            let model = pt_model(config)?;
            let s = pt::coherent_coefficients(&model, config.alpha, truncation)?;
            let constants = PtConstants {
                lambda: model.lambda(),
                s_alpha: s.s_alpha,
                n_alpha: s.n_alpha,
                tail_bound: pt::series_tail_bound(&model, config.alpha, truncation)?,
            };
            (s.coefficients, Some(constants))
        }
    };
    let mut cumulative = 0.0;
    let rows: Vec<CoefficientRow> = coefficients
        .iter()
        .enumerate()
        .map(|(n, c)| {
            cumulative += c.norm_sqr();
            CoefficientRow { n, re: c.re, im: c.im, abs2: c.norm_sqr(), cumulative }
        })
        .collect();
    match config.format.unwrap_or(OutputFormat::Json) {
        OutputFormat::Csv => emit(
            config,
            &output::csv("n,re,im,abs2,cumulative", &rows, |r| {
                vec![r.n.to_string(), fmt_g9(r.re), fmt_g9(r.im), fmt_g9(r.abs2), fmt_g9(r.cumulative)]
            }),
        )?,
        OutputFormat::Json => {
            #[derive(Serialize)]
            struct Body<'a> {
                truncation: usize,
                #[serde(skip_serializing_if = "Option::is_none")]
                constants: Option<PtConstants>,
                coefficients: &'a [CoefficientRow],
            }
            emit_json(config, "state", Body { truncation, constants, coefficients: &rows })?
        }
    }
    Ok(true)
}

fn quadrature_grid(config: &RunConfig, model: &Model) -> Result<Grid, CliError> {
    let default = model.default_grid();
    Ok(Grid::new(
        config.x_min.unwrap_or(default.x_min()),
        config.x_max.unwrap_or(default.x_max()),
        config.grid_points.unwrap_or(default.count()),
    )?)
}

fn evolve_series(config: &RunConfig) -> Result<Vec<TimeSample>, CliError> {
    let truncation = default_truncation(config);
    let times = linear_osc::uniform_times(config.t0, config.t1, config.dt)?;
    let method = config.method.unwrap_or(match config.model {
        ModelSelector::Linear => Method::Series,
        ModelSelector::Pt => Method::Quadrature,
    });
    let state = match config.model {
        ModelSelector::Linear => {
            let model = linear_model(config)?;
            let spec = CoherentSpec::new(config.alpha, truncation)?;
            if method == Method::Series {
                return Ok(linear_osc::time_series(&model, &spec, &times)?.samples);
            }
            StateVector::linear_coherent(&model, &spec)
        }
        ModelSelector::Pt => {
            if method == Method::Series {
                return Err(CliError::Usage("the series method is only available for the linear model".into()));
            }
            StateVector::pt_coherent(&pt::coherent_coefficients(&pt_model(config)?, config.alpha, truncation)?)
        }
    };
    let grid = quadrature_grid(config, state.model())?;
    let table = BasisTable::new(*state.model(), state.truncation(), grid)?;
    times
        .par_iter()
        .map(|&t| {
            let m = GridMoments::of(&table.synthesize(&state, t)?)?;
            TimeSample::new(t, m.position.mean_x, m.momentum.mean_p, m.var_x(), m.var_p())
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(CliError::from)
}

fn evolve(config: &RunConfig) -> Result<bool, CliError> {
    let samples = evolve_series(config)?;
    match config.format.unwrap_or(OutputFormat::Csv) {
        OutputFormat::Csv => emit(config, &output::series_csv(&samples))?,
        OutputFormat::Json => {
            #[derive(Serialize)]
            struct Body {
                samples: Vec<SeriesRow>,
            }
            let samples = samples.iter().map(SeriesRow::from).collect();
            emit_json(config, "evolve", Body { samples })?
        }
    }
    Ok(true)
}

fn write_figures(selection: &FigureSelection, config: &RunConfig) -> Result<bool, CliError> {
    let dir = &config.output_dir;
    fs::create_dir_all(dir)?;
    for fig in figures::render(selection, config.dt)? {
        let stem = format!("fig{}", fig.recipe.id);
        write_file(&dir.join(format!("{stem}.csv")), &output::series_csv(&fig.samples))?;
        write_file(&dir.join(format!("{stem}.meta.json")), &output::json(&fig.meta)?)?;
    }
    Ok(true)
}

#[derive(Serialize)]
struct SuiteSummary<'a> {
    suite: &'a str,
    passed: bool,
    checks: &'a [Check],
}

fn suite_params(config: &RunConfig) -> Result<SuiteParams, CliError> {
    Ok(SuiteParams {
        linear: linear_model(config)?,
        pt: pt_model(config)?,
        fd_grid_points: config.grid_points.unwrap_or(oracle::DEFAULT_GRID_POINTS),
        moment_order: config.n_max,
        moment_tol: config.tol,
    })
}

fn run_verify(suite: Suite, config: &RunConfig) -> Result<bool, CliError> {
    let checks = verify::run(suite, &suite_params(config)?)?;
    let passed = checks.iter().all(|c| c.passed);
    emit_json(config, "verify", SuiteSummary { suite: suite.name(), passed, checks: &checks })?;
    Ok(passed)
}

fn measure_check(config: &RunConfig) -> Result<bool, CliError> {
    let model = pt_model(config)?;
    let report = pt::verify_measure_moments(&model, config.n_max, config.tol)?;
    let passed = report.all_passed();
    match config.format.unwrap_or(OutputFormat::Json) {
        OutputFormat::Csv => emit(
            config,
            &output::csv("n,integral,target,rel_error,converged,passed", &report.checks, |c| {
                vec![
                    c.n.to_string(),
                    fmt_g9(c.integral),
                    fmt_g9(c.target),
                    fmt_g9(c.rel_error),
                    c.converged.to_string(),
                    c.passed.to_string(),
                ]
            }),
        )?,
        OutputFormat::Json => {
            #[derive(Serialize)]
            struct Row {
                n: usize,
                integral: f64,
                target: f64,
                rel_error: f64,
                x_cut: f64,
                converged: bool,
                passed: bool,
            }
            #[derive(Serialize)]
            struct Body {
                lambda: f64,
                passed: bool,
                weight_min_sampled: f64,
                weight_negative_samples: usize,
                weight_samples: usize,
                moments: Vec<Row>,
            }
            let moments = report
                .checks
                .iter()
                .map(|c| Row {
                    n: c.n,
                    integral: c.integral,
                    target: c.target,
                    rel_error: c.rel_error,
                    x_cut: c.x_cut,
                    converged: c.converged,
                    passed: c.passed,
                })
                .collect();
            emit_json(
                config,
                "measure-check",
                Body {
                    lambda: report.lambda,
                    passed,
                    weight_min_sampled: report.weight_min_sampled,
                    weight_negative_samples: report.weight_negative_samples,
                    weight_samples: report.weight_samples,
                    moments,
                },
            )?
        }
    }
    Ok(passed)
}

fn run_oracle(config: &RunConfig) -> Result<bool, CliError> {
    let count = config.grid_points.unwrap_or(oracle::DEFAULT_GRID_POINTS);
    let levels = config.n.unwrap_or(DEFAULT_ORACLE_LEVELS);
    let (spec, energies): (PotentialSpec, Vec<f64>) = match config.model {
        ModelSelector::Linear => {
            let m = linear_model(config)?;
            (PotentialSpec::linear(&m, count)?, (0..levels).map(|n| m.energy(n)).collect())
        }
        ModelSelector::Pt => {
            let m = pt_model(config)?;
            (PotentialSpec::poschl_teller(&m, count)?, (0..levels).map(|n| m.energy(n)).collect())
        }
    };
    let report = oracle::spectrum_compare(&spec, &energies, levels)?;
    match config.format.unwrap_or(OutputFormat::Json) {
        OutputFormat::Csv => emit(
            config,
            &output::csv(
                "n,analytic_energy,fd_energy,energy_rel_error,eigenvalue_rel_error,order",
                &report.levels,
                |l| {
                    vec![
                        l.n.to_string(),
                        fmt_g9(l.analytic_energy),
                        fmt_g9(l.fd_energy),
                        fmt_g9(l.energy_rel_error),
                        fmt_g9(l.eigenvalue_rel_error),
                        fmt_g9(l.order),
                    ]
                },
            ),
        )?,
        OutputFormat::Json => {
            #[derive(Serialize)]
            struct Row {
                n: usize,
                analytic_energy: f64,
                fd_energy: f64,
                energy_rel_error: f64,
                eigenvalue_rel_error: f64,
                coarse_eigenvalue_rel_error: f64,
                order: f64,
            }
            #[derive(Serialize)]
            struct Body {
                passed: bool,
                coarse_grid_points: usize,
                fine_grid_points: usize,
                max_rel_error: f64,
                min_order: f64,
                max_order: f64,
                tolerance: f64,
                levels: Vec<Row>,
            }
            let levels = report
                .levels
                .iter()
                .map(|l| Row {
                    n: l.n,
                    analytic_energy: l.analytic_energy,
                    fd_energy: l.fd_energy,
                    energy_rel_error: l.energy_rel_error,
                    eigenvalue_rel_error: l.eigenvalue_rel_error,
                    coarse_eigenvalue_rel_error: l.coarse_eigenvalue_rel_error,
                    order: l.order,
                })
                .collect();
            emit_json(
                config,
                "oracle",
                Body {
                    passed: report.passed,
                    coarse_grid_points: report.coarse_count,
                    fine_grid_points: report.fine_count,
                    max_rel_error: report.max_rel_error,
                    min_order: report.min_order,
                    max_order: report.max_order,
                    tolerance: report.tolerance,
                    levels,
                },
            )?
        }
    }
    Ok(report.passed)
}
