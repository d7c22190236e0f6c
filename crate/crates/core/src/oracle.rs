//! Finite-difference eigenvalues of the scalar Hamiltonian
//! `H_s = -1/(2m) d²/dx² + (m + S(x))² / 2m` on a Dirichlet box.
//!
//! The solver knows nothing about either model's closed forms, so it serves
//! as an independent check of their spectra.

use crate::error::{Error, Result};
use crate::linear_osc::LinearModel;
use crate::numerics::{tridiag_smallest_eigenvalues, Grid, TridiagonalMatrix};
use crate::poschl_teller::{PTModel, SignBranch};

/// Fewest interior points accepted by [`build_hamiltonian`].
pub const MIN_INTERIOR_POINTS: usize = 100;

/// Largest number of levels [`spectrum_compare`] pairs up.
pub const MAX_COMPARED_LEVELS: usize = 20;

/// Box half-width for the linear model, in units of `1/√k`.
pub const LINEAR_BOX_HALF_WIDTH: f64 = 12.0;

/// Distance of the Dirichlet walls from the Pöschl–Teller singularity, in
/// units of `1/ω`.
pub const PT_WALL_INSET: f64 = 1e-4;

pub const DEFAULT_GRID_POINTS: usize = 8001;

/// Relative energy error accepted by [`spectrum_compare`].
pub const SPECTRUM_TOLERANCE: f64 = 1e-3;

/// Smallest refinement order [`spectrum_compare`] accepts.
pub const MIN_CONVERGENCE_ORDER: f64 = 1.5;

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialKind {
    /// `S(x) = k|x| - m`.
    LinearAbs { mass: f64, coupling: f64 },
    /// `S(x) = -m ± m / cos(ωx)`.
    PoschlTeller { mass: f64, omega: f64, branch: SignBranch },
    /// `S` sampled on every point of the domain grid.
    Custom { mass: f64, samples: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PotentialSpec {
    kind: PotentialKind,
    domain: Grid,
}

impl PotentialSpec {
    pub fn new(kind: PotentialKind, domain: Grid) -> Result<Self> {
        let mass = match &kind {
            PotentialKind::LinearAbs { mass, .. }
            | PotentialKind::PoschlTeller { mass, .. }
            | PotentialKind::Custom { mass, .. } => *mass,
        };
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(Error::InvalidArgument("mass must be positive".into()));
        }
        match &kind {
            PotentialKind::Custom { samples, .. } if samples.len() != domain.count() => {
                return Err(Error::InvalidArgument(format!(
                    "{} potential samples for a {}-point grid",
                    samples.len(),
                    domain.count()
                )));
            }
            PotentialKind::PoschlTeller { omega, .. } => {
                let wall = std::f64::consts::FRAC_PI_2 / omega;
                if domain.x_min() <= -wall || domain.x_max() >= wall {
                    return Err(Error::Domain(format!(
                        "Pöschl–Teller domain must lie strictly inside (-{wall}, {wall})"
                    )));
                }
            }
            _ => {}
        }
        Ok(Self { kind, domain })
    }

    /// Box `[-12/√k, 12/√k]`.
    pub fn linear(model: &LinearModel, count: usize) -> Result<Self> {
        let half = LINEAR_BOX_HALF_WIDTH / model.coupling().sqrt();
        Self::new(
            PotentialKind::LinearAbs { mass: model.mass(), coupling: model.coupling() },
            Grid::new(-half, half, count)?,
        )
    }

    /// Box `(-L + δ, L - δ)` with `δ = 10⁻⁴/ω`.
    pub fn poschl_teller(model: &PTModel, count: usize) -> Result<Self> {
        let half = model.half_width() - PT_WALL_INSET / model.omega();
        Self::new(
            PotentialKind::PoschlTeller { mass: model.mass(), omega: model.omega(), branch: model.branch() },
            Grid::new(-half, half, count)?,
        )
    }

    pub fn kind(&self) -> &PotentialKind {
        &self.kind
    }

    pub fn domain(&self) -> &Grid {
        &self.domain
    }

    pub fn mass(&self) -> f64 {
        match &self.kind {
            PotentialKind::LinearAbs { mass, .. }
            | PotentialKind::PoschlTeller { mass, .. }
            | PotentialKind::Custom { mass, .. } => *mass,
        }
    }

    /// `S` at the i-th domain point.
    pub fn scalar_potential(&self, i: usize) -> f64 {
        let x = self.domain.point(i);
        match &self.kind {
            PotentialKind::LinearAbs { mass, coupling } => coupling * x.abs() - mass,
            PotentialKind::PoschlTeller { mass, omega, branch } => {
                let secant = mass / (omega * x).cos();
                match branch {
                    SignBranch::Plus => -mass + secant,
                    SignBranch::Minus => -mass - secant,
                }
            }
            PotentialKind::Custom { samples, .. } => samples[i],
        }
    }

    /// Same potential on a grid with `count` points over the same interval.
    pub fn with_count(&self, count: usize) -> Result<Self> {
        if let PotentialKind::Custom { .. } = self.kind {
            return Err(Error::InvalidArgument("a sampled potential cannot be regridded".into()));
        }
        let domain = Grid::new(self.domain.x_min(), self.domain.x_max(), count)?;
        Ok(Self { kind: self.kind.clone(), domain })
    }
}

/// Three-point Dirichlet discretisation over the interior grid points:
/// `diag_i = 1/(m h²) + (m + S(x_i))² / 2m`, `offdiag = -1/(2m h²)`.
pub fn build_hamiltonian(spec: &PotentialSpec) -> Result<TridiagonalMatrix> {
    let count = spec.domain.count();
    let interior = count - 2;
    if interior < MIN_INTERIOR_POINTS {
        return Err(Error::InvalidArgument(format!(
            "need at least {MIN_INTERIOR_POINTS} interior points, got {interior}"
        )));
    }
    let m = spec.mass();
    let h = spec.domain.step();
    let kinetic = 1.0 / (m * h * h);
    let mut diag = Vec::with_capacity(interior);
    for i in 1..count - 1 {
        let s = spec.scalar_potential(i);
        let shifted = m + s;
        let value = kinetic + shifted * shifted / (2.0 * m);
        if !value.is_finite() {
            return Err(Error::Domain(format!("potential is singular at x = {}", spec.domain.point(i))));
        }
        diag.push(value);
    }
    TridiagonalMatrix::new(diag, vec![-0.5 * kinetic; interior - 1])
}

/// The `n_count` lowest eigenvalues `ε_n` of the discretised `H_s`.
pub fn fd_eigenvalues(spec: &PotentialSpec, n_count: usize) -> Result<Vec<f64>> {
    tridiag_smallest_eigenvalues(&build_hamiltonian(spec)?, n_count)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelComparison {
    pub n: usize,
    pub analytic_energy: f64,
    pub fd_energy: f64,
    /// `|E_fd - E| / E` on the finer grid.
    pub energy_rel_error: f64,
    /// `|ε_fd - ε| / ε` on the finer grid, with `ε = E² / 2m`.
    pub eigenvalue_rel_error: f64,
    pub coarse_eigenvalue_rel_error: f64,
    /// `log2` of the coarse-to-fine error ratio.
    pub order: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumReport {
    pub coarse_count: usize,
    pub fine_count: usize,
    pub levels: Vec<LevelComparison>,
    pub max_rel_error: f64,
    pub min_order: f64,
    pub max_order: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Compares the FD spectrum with `analytic_energies` on the grid of `spec` and
/// on one with twice the step. Converts `ε → E = √(2mε)` for the error
/// report and fails if any level exceeds [`SPECTRUM_TOLERANCE`] or refines
/// slower than [`MIN_CONVERGENCE_ORDER`].
pub fn spectrum_compare(spec: &PotentialSpec, analytic_energies: &[f64], n_count: usize) -> Result<SpectrumReport> {
    if n_count == 0 || n_count > MAX_COMPARED_LEVELS {
        return Err(Error::InvalidArgument(format!("level count must be in 1..={MAX_COMPARED_LEVELS}, got {n_count}")));
    }
    if analytic_energies.len() < n_count {
        return Err(Error::InvalidArgument(format!(
            "{} analytic energies supplied for {n_count} levels",
            analytic_energies.len()
        )));
    }
    let fine_count = spec.domain.count();
    if fine_count.is_multiple_of(2) {
        return Err(Error::InvalidArgument("grid count must be odd so the coarse grid nests".into()));
    }
    let coarse_count = (fine_count - 1) / 2 + 1;
    let coarse = spec.with_count(coarse_count)?;
    let (fine_ev, coarse_ev) = rayon::join(|| fd_eigenvalues(spec, n_count), || fd_eigenvalues(&coarse, n_count));
    let (fine_ev, coarse_ev) = (fine_ev?, coarse_ev?);

    let m = spec.mass();
    let levels: Vec<LevelComparison> = (0..n_count)
        .map(|n| {
            let e = analytic_energies[n];
            let eps = e * e / (2.0 * m);
            let fd_energy = (2.0 * m * fine_ev[n]).sqrt();
            let fine_err = ((fine_ev[n] - eps) / eps).abs();
            let coarse_err = ((coarse_ev[n] - eps) / eps).abs();
            LevelComparison {
                n,
                analytic_energy: e,
                fd_energy,
                energy_rel_error: ((fd_energy - e) / e).abs(),
                eigenvalue_rel_error: fine_err,
                coarse_eigenvalue_rel_error: coarse_err,
                order: (coarse_err / fine_err).log2(),
            }
        })
        .collect();

    let max_rel_error = levels.iter().map(|l| l.energy_rel_error).fold(0.0, f64::max);
    let min_order = levels.iter().map(|l| l.order).fold(f64::INFINITY, f64::min);
    let max_order = levels.iter().map(|l| l.order).fold(f64::NEG_INFINITY, f64::max);
    let passed = max_rel_error <= SPECTRUM_TOLERANCE && min_order >= MIN_CONVERGENCE_ORDER;
    Ok(SpectrumReport {
        coarse_count,
        fine_count,
        levels,
        max_rel_error,
        min_order,
        max_order,
        tolerance: SPECTRUM_TOLERANCE,
        passed,
    })
}
