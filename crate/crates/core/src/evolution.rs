//! Model-independent wave-packet machinery.
//!
//! A state is a truncated expansion `ψ(x,t) = Σ c_n e^{-iE_n t} u_n(x)` over
//! the eigenfunctions of one of the two models. Moments are taken by
//! quadrature on a grid, which makes this module an independent check on the
//! closed-form expectation values.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linear_osc::{self, CoherentSpec, LinearModel, Uncertainty};
use crate::numerics::{simpson, Grid, GridFunction};
use crate::poschl_teller::{PTCoherentState, PTModel};

pub const DEFAULT_GRID_POINTS: usize = 4001;

/// Half-width of the default linear-model grid in units of `1/√k`.
pub const LINEAR_GRID_HALF_WIDTH: f64 = 12.0;

/// Minimal half-width, in units of `1/√k`, a linear-model grid must cover.
pub const LINEAR_SUPPORT_HALF_WIDTH: f64 = 8.0;

/// Smallest captured norm accepted by [`position_moments`].
pub const MIN_CAPTURED_NORM: f64 = 0.9;

/// Largest `|ψ|` allowed at a grid edge by [`momentum_moments`].
pub const BOUNDARY_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Model {
    LinearScalar(LinearModel),
    PoschlTeller(PTModel),
}

impl Model {
    pub fn energy(&self, n: usize) -> f64 {
        match self {
            Model::LinearScalar(m) => m.energy(n),
            Model::PoschlTeller(m) => m.energy(n),
        }
    }

    pub fn eigenfunctions(&self, n_max: usize, x: f64) -> Vec<f64> {
        match self {
            Model::LinearScalar(m) => m.eigenfunctions(n_max, x),
            Model::PoschlTeller(m) => m.eigenfunctions(n_max, x),
        }
    }

    /// Interval a synthesis grid has to cover.
    pub fn support(&self) -> (f64, f64) {
        match self {
            Model::LinearScalar(m) => {
                let half = LINEAR_SUPPORT_HALF_WIDTH / m.coupling().sqrt();
                (-half, half)
            }
            Model::PoschlTeller(m) => (-m.half_width(), m.half_width()),
        }
    }

    /// `[-12/√k, 12/√k]` for the linear model and `[-L, L]` for
    /// Pöschl–Teller, with [`DEFAULT_GRID_POINTS`] points.
    pub fn default_grid(&self) -> Grid {
        let half = match self {
            Model::LinearScalar(m) => LINEAR_GRID_HALF_WIDTH / m.coupling().sqrt(),
            Model::PoschlTeller(m) => m.half_width(),
        };
        Grid::new(-half, half, DEFAULT_GRID_POINTS).expect("positive half-width")
    }
}

impl From<LinearModel> for Model {
    fn from(m: LinearModel) -> Self {
        Model::LinearScalar(m)
    }
}

impl From<PTModel> for Model {
    fn from(m: PTModel) -> Self {
        Model::PoschlTeller(m)
    }
}

/// Expansion coefficients together with the energies that drive their phases.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    model: Model,
    coefficients: Vec<Complex64>,
    energies: Vec<f64>,
}

impl StateVector {
    pub fn new(model: impl Into<Model>, coefficients: Vec<Complex64>) -> Result<Self> {
        let model = model.into();
        if coefficients.is_empty() {
            return Err(Error::InvalidArgument("state needs at least one coefficient".into()));
        }
        if let Some(index) = coefficients.iter().position(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        let energies = (0..coefficients.len()).map(|n| model.energy(n)).collect();
        Ok(Self { model, coefficients, energies })
    }

    pub fn linear_coherent(model: &LinearModel, spec: &CoherentSpec) -> Self {
        Self::new(*model, linear_osc::coherent_coefficients(spec)).expect("finite coefficients")
    }

    pub fn pt_coherent(state: &PTCoherentState) -> Self {
        Self::new(state.model, state.coefficients.clone()).expect("finite coefficients")
    }

    /// Single eigenstate `u_n`, stored with `n + 1` coefficients.
    pub fn eigenstate(model: impl Into<Model>, n: usize) -> Self {
        let mut c = vec![Complex64::new(0.0, 0.0); n + 1];
        c[n] = Complex64::new(1.0, 0.0);
        Self::new(model, c).expect("finite coefficients")
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn truncation(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coefficients.iter().map(|c| c.norm_sqr()).sum()
    }

    /// `c_n e^{-iE_n t}`.
    pub fn evolved_coefficients(&self, t: f64) -> Vec<Complex64> {
        self.coefficients.iter().zip(&self.energies).map(|(c, e)| c * Complex64::from_polar(1.0, -e * t)).collect()
    }
}

fn check_support(model: &Model, grid: &Grid) -> Result<()> {
    let (lo, hi) = model.support();
    let slack = 1e-12 * hi.abs();
    if grid.x_min() > lo + slack || grid.x_max() < hi - slack {
        return Err(Error::Configuration(format!(
            "grid [{}, {}] does not cover the support [{lo}, {hi}]",
            grid.x_min(),
            grid.x_max()
        )));
    }
    Ok(())
}

/// Eigenfunctions tabulated once on a grid, reusable across times.
#[derive(Debug, Clone)]
pub struct BasisTable {
    model: Model,
    grid: Grid,
    n_max: usize,
    // Row-major: values[i * (n_max + 1) + n] = u_n(x_i).
    values: Vec<f64>,
}

impl BasisTable {
    pub fn new(model: Model, n_max: usize, grid: Grid) -> Result<Self> {
        check_support(&model, &grid)?;
        let values =
            (0..grid.count()).into_par_iter().flat_map_iter(|i| model.eigenfunctions(n_max, grid.point(i))).collect();
        Ok(Self { model, grid, n_max, values })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// `ψ(x_i, t)` for the state on this table's grid.
    pub fn synthesize(&self, state: &StateVector, t: f64) -> Result<GridFunction> {
        if state.model != self.model {
            return Err(Error::InvalidArgument("state and basis table belong to different models".into()));
        }
        if state.truncation() > self.n_max {
            return Err(Error::InvalidArgument(format!(
                "state truncation {} exceeds the tabulated basis size {}",
                state.truncation(),
                self.n_max
            )));
        }
        let c = state.evolved_coefficients(t);
        let width = self.n_max + 1;
        let values = self.values.par_chunks(width).map(|row| c.iter().zip(row).map(|(cn, u)| cn * u).sum()).collect();
        GridFunction::new(self.grid, values)
    }
}

/// `ψ(x, t) = Σ c_n e^{-iE_n t} u_n(x)` on `grid`.
pub fn synthesize(state: &StateVector, grid: &Grid, t: f64) -> Result<GridFunction> {
    BasisTable::new(state.model, state.truncation(), *grid)?.synthesize(state, t)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositionMoments {
    pub mean_x: f64,
    pub mean_x2: f64,
    pub norm: f64,
}

/// `⟨x⟩`, `⟨x²⟩` and `∫|ψ|²`, the moments normalised by the captured norm.
pub fn position_moments(f: &GridFunction) -> Result<PositionMoments> {
    let grid = f.grid();
    let h = grid.step();
    let density: Vec<f64> = f.values().iter().map(|v| v.norm_sqr()).collect();
    let norm = simpson(&density, h);
    if !(norm > MIN_CAPTURED_NORM) {
        return Err(Error::SupportTruncation { norm });
    }
    let first: Vec<f64> = density.iter().enumerate().map(|(i, d)| grid.point(i) * d).collect();
    let second: Vec<f64> = density
        .iter()
        .enumerate()
        .map(|(i, d)| {
            let x = grid.point(i);
            x * x * d
        })
        .collect();
    Ok(PositionMoments { mean_x: simpson(&first, h) / norm, mean_x2: simpson(&second, h) / norm, norm })
}

/// Fourth-order finite-difference derivative with one-sided closures at the
/// two points nearest each edge.
pub fn derivative(values: &[Complex64], h: f64) -> Result<Vec<Complex64>> {
    let n = values.len();
    if n < 5 {
        return Err(Error::InvalidArgument(format!("derivative needs at least 5 points, got {n}")));
    }
    let v = values;
    let s = 1.0 / (12.0 * h);
    let mut d = vec![Complex64::new(0.0, 0.0); n];
    d[0] = (v[0] * -25.0 + v[1] * 48.0 - v[2] * 36.0 + v[3] * 16.0 - v[4] * 3.0) * s;
    d[1] = (v[0] * -3.0 - v[1] * 10.0 + v[2] * 18.0 - v[3] * 6.0 + v[4]) * s;
    for i in 2..n - 2 {
        d[i] = (v[i - 2] - v[i - 1] * 8.0 + v[i + 1] * 8.0 - v[i + 2]) * s;
    }
    d[n - 2] = (v[n - 1] * 3.0 + v[n - 2] * 10.0 - v[n - 3] * 18.0 + v[n - 4] * 6.0 - v[n - 5]) * s;
    d[n - 1] = (v[n - 1] * 25.0 - v[n - 2] * 48.0 + v[n - 3] * 36.0 - v[n - 4] * 16.0 + v[n - 5] * 3.0) * s;
    Ok(d)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentumMoments {
    pub mean_p: f64,
    pub mean_p2: f64,
}

/// `⟨p⟩ = ∫ ψ̄ (-iψ')` and `⟨p²⟩ = ∫ |ψ'|²`, both normalised by `∫|ψ|²`.
/// The second form drops boundary terms, so `ψ` must vanish at the edges.
pub fn momentum_moments(f: &GridFunction) -> Result<MomentumMoments> {
    let values = f.values();
    let edge = values[0].norm().max(values[values.len() - 1].norm());
    if edge > BOUNDARY_TOLERANCE {
        return Err(Error::BoundaryLeak { amplitude: edge });
    }
    let h = f.grid().step();
    let d = derivative(values, h)?;
    let density: Vec<f64> = values.iter().map(|v| v.norm_sqr()).collect();
    let norm = simpson(&density, h);
    if !(norm > 0.0) {
        return Err(Error::SupportTruncation { norm });
    }
    // Re[ψ̄ (-iψ')] = Im[ψ̄ ψ']
    let current: Vec<f64> = values.iter().zip(&d).map(|(v, dv)| (v.conj() * dv).im).collect();
    let kinetic: Vec<f64> = d.iter().map(|dv| dv.norm_sqr()).collect();
    Ok(MomentumMoments { mean_p: simpson(&current, h) / norm, mean_p2: simpson(&kinetic, h) / norm })
}

/// Moments of a synthesised wave packet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridMoments {
    pub position: PositionMoments,
    pub momentum: MomentumMoments,
}

impl GridMoments {
    pub fn of(f: &GridFunction) -> Result<Self> {
        Ok(Self { position: position_moments(f)?, momentum: momentum_moments(f)? })
    }

    pub fn var_x(&self) -> f64 {
        self.position.mean_x2 - self.position.mean_x * self.position.mean_x
    }

    pub fn var_p(&self) -> f64 {
        self.momentum.mean_p2 - self.momentum.mean_p * self.momentum.mean_p
    }

    pub fn uncertainty(&self) -> Result<Uncertainty> {
        Uncertainty::from_variances(self.var_x(), self.var_p())
    }
}

/// `Δx`, `Δp` and their product from the synthesised wave packet.
pub fn heisenberg_product(state: &StateVector, grid: &Grid, t: f64) -> Result<Uncertainty> {
    GridMoments::of(&synthesize(state, grid, t)?)?.uncertainty()
}

/// Distance of the evolved linear-model state from the nearest eigenvector
/// of the lowering map `out_n = √(n+1) c_{n+1}`:
/// `min_μ ‖out - μc‖ / ‖c‖` with `μ = ⟨c, out⟩ / ⟨c, c⟩`.
pub fn lowering_residual(state: &StateVector, t: f64) -> Result<f64> {
    if !matches!(state.model, Model::LinearScalar(_)) {
        return Err(Error::InvalidArgument("lowering residual is defined for the linear model only".into()));
    }
    let c = state.evolved_coefficients(t);
    let cc: f64 = c.iter().map(|v| v.norm_sqr()).sum();
    if cc == 0.0 {
        return Err(Error::Domain("lowering residual of the zero state".into()));
    }
    let mut out = vec![Complex64::new(0.0, 0.0); c.len()];
    for n in 0..c.len() - 1 {
        out[n] = c[n + 1] * ((n + 1) as f64).sqrt();
    }
    let mu: Complex64 = c.iter().zip(&out).map(|(a, b)| a.conj() * b).sum::<Complex64>() / cc;
    let residual: f64 = out.iter().zip(&c).map(|(o, v)| (o - mu * v).norm_sqr()).sum();
    Ok((residual / cc).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linear_osc::expectation_series;
    use crate::poschl_teller::coherent_coefficients as pt_coherent;
    use proptest::prelude::*;

    fn linear() -> LinearModel {
        LinearModel::new(1.0, 1.0).unwrap()
    }

    fn pt() -> PTModel {
        PTModel::new(1.0, 1.0).unwrap()
    }

    fn linear_state(re: f64, im: f64) -> StateVector {
        let spec = CoherentSpec::new(Complex64::new(re, im), linear_osc::DEFAULT_TRUNCATION).unwrap();
        StateVector::linear_coherent(&linear(), &spec)
    }

    #[test]
    fn ground_state_is_stationary() {
        let model = Model::from(linear());
        let grid = model.default_grid();
        let s = StateVector::eigenstate(model, 0);
        let a = synthesize(&s, &grid, 0.0).unwrap();
        let b = synthesize(&s, &grid, 3.7).unwrap();
        for (u, v) in a.values().iter().zip(b.values()) {
            assert!((u.norm() - v.norm()).abs() < 1e-15);
        }
        let phase = Complex64::from_polar(1.0, -model.energy(0) * 3.7);
        assert!((b.values()[2000] - a.values()[2000] * phase).norm() < 1e-15);
    }

    #[test]
    fn ground_state_moments() {
        let model = Model::from(linear());
        let f = synthesize(&StateVector::eigenstate(model, 0), &model.default_grid(), 0.0).unwrap();
        let x = position_moments(&f).unwrap();
        assert!(x.mean_x.abs() < 1e-10);
        assert!((x.mean_x2 - 0.5).abs() < 1e-8);
        let p = momentum_moments(&f).unwrap();
        assert!(p.mean_p.abs() < 1e-10);
        assert!((p.mean_p2 - 0.5).abs() < 1e-7);
        let u = GridMoments::of(&f).unwrap().uncertainty().unwrap();
        assert!((u.product - 0.5).abs() < 1e-6);
    }

    #[test]
    fn first_excited_state_width() {
        for k in [1.0, 2.5] {
            let model = Model::from(LinearModel::new(1.0, k).unwrap());
            let f = synthesize(&StateVector::eigenstate(model, 1), &model.default_grid(), 0.0).unwrap();
            assert!((position_moments(&f).unwrap().mean_x2 - 1.5 / k).abs() < 1e-8, "k={k}");
        }
    }

    #[test]
    fn coherent_state_norm_and_momentum() {
        let s = linear_state(0.1, 0.2);
        let grid = s.model().default_grid();
        let f = synthesize(&s, &grid, 0.0).unwrap();
        let x = position_moments(&f).unwrap();
        assert!((x.norm - 1.0).abs() < 1e-8);
        let p = momentum_moments(&f).unwrap();
        assert!((p.mean_p - 2f64.sqrt() * 0.2).abs() < 1e-6);
    }

    #[test]
    fn pt_wave_vanishes_at_walls() {
        let state = pt_coherent(&pt(), Complex64::new(1.0, 0.5), 60).unwrap();
        let s = StateVector::pt_coherent(&state);
        let f = synthesize(&s, &s.model().default_grid(), 0.4).unwrap();
        assert_eq!(f.values()[0].norm(), 0.0);
        assert_eq!(f.values()[f.values().len() - 1].norm(), 0.0);
    }

    #[test]
    fn pt_product_respects_bound() {
        let s = StateVector::pt_coherent(&pt_coherent(&pt(), Complex64::new(1.0, 0.0), 60).unwrap());
        let u = heisenberg_product(&s, &s.model().default_grid(), 0.0).unwrap();
        assert!(u.product.is_finite() && u.product >= 0.5);
    }

    #[test]
    fn closed_forms_match_quadrature() {
        let s = linear_state(0.1, 0.2);
        let spec = CoherentSpec::new(Complex64::new(0.1, 0.2), linear_osc::DEFAULT_TRUNCATION).unwrap();
        let grid = s.model().default_grid();
        let u = heisenberg_product(&s, &grid, 7.3).unwrap();
        let closed = linear_osc::uncertainties(&linear(), &spec, 7.3).unwrap();
        assert!((u.product - closed.product).abs() < 1e-6 * closed.product);

        let table = BasisTable::new(*s.model(), s.truncation(), grid).unwrap();
        for t in [0.0, 1.3, 12.9, 44.0] {
            let m = GridMoments::of(&table.synthesize(&s, t).unwrap()).unwrap();
            let e = expectation_series(&linear(), &spec, t).unwrap();
            let close = |a: f64, b: f64| (a - b).abs() <= 1e-6 * b.abs() || (a - b).abs() <= 1e-8;
            assert!(close(m.position.mean_x, e.mean_x), "t={t}");
            assert!(close(m.momentum.mean_p, e.mean_p), "t={t}");
            assert!(close(m.position.mean_x2, e.mean_x2), "t={t}");
            assert!(close(m.momentum.mean_p2, e.mean_p2), "t={t}");
        }
    }

    #[test]
    fn support_policy() {
        let s = linear_state(0.1, 0.2);
        let narrow = Grid::new(-5.0, 5.0, 1001).unwrap();
        assert!(matches!(synthesize(&s, &narrow, 0.0), Err(Error::Configuration(_))));
        let p = StateVector::pt_coherent(&pt_coherent(&pt(), Complex64::new(1.0, 0.0), 10).unwrap());
        let short = Grid::new(-1.5, 1.5, 1001).unwrap();
        assert!(matches!(synthesize(&p, &short, 0.0), Err(Error::Configuration(_))));
    }

    #[test]
    fn truncated_support_and_leaks_are_errors() {
        let grid = Grid::new(0.0, 4.0, 401).unwrap();
        let half = GridFunction::from_fn(grid, |x| {
            Complex64::new((-0.5 * x * x).exp() / std::f64::consts::PI.powf(0.25), 0.0)
        });
        assert!(matches!(position_moments(&half), Err(Error::SupportTruncation { .. })));
        assert!(matches!(momentum_moments(&half), Err(Error::BoundaryLeak { .. })));
    }

    #[test]
    fn derivative_is_fourth_order() {
        let err = |n: usize| {
            let grid = Grid::new(0.0, 2.0, n).unwrap();
            let v: Vec<Complex64> = grid.points().map(|x| Complex64::new(x.sin(), x.cos())).collect();
            let d = derivative(&v, grid.step()).unwrap();
            d.iter()
                .enumerate()
                .map(|(i, dv)| (dv - Complex64::new(grid.point(i).cos(), -grid.point(i).sin())).norm())
                .fold(0.0, f64::max)
        };
        let order = (err(41) / err(81)).log2();
        assert!(order > 3.7, "order {order}");
    }

    #[test]
    fn lowering_residual_examples() {
        assert!(lowering_residual(&linear_state(1.0, 2.0), 0.0).unwrap() < 1e-12);
        assert!(lowering_residual(&linear_state(0.3, -0.4), 0.0).unwrap() < 1e-12);
        assert!(lowering_residual(&linear_state(1.0, 2.0), 1.0).unwrap() > 1e-3);
        assert_eq!(lowering_residual(&linear_state(0.0, 0.0), 2.0).unwrap(), 0.0);
        let zero = StateVector::new(linear(), vec![Complex64::new(0.0, 0.0); 4]).unwrap();
        assert!(matches!(lowering_residual(&zero, 0.0), Err(Error::Domain(_))));
        let p = StateVector::eigenstate(pt(), 0);
        assert!(lowering_residual(&p, 0.0).is_err());
    }

    #[test]
    fn grid_convergence_at_default_resolution() {
        let check = |s: &StateVector, t: f64| {
            let coarse = s.model().default_grid();
            let a = GridMoments::of(&synthesize(s, &coarse, t).unwrap()).unwrap();
            let b = GridMoments::of(&synthesize(s, &coarse.refined(), t).unwrap()).unwrap();
            let pairs = [
                (a.position.mean_x, b.position.mean_x),
                (a.position.mean_x2, b.position.mean_x2),
                (a.momentum.mean_p, b.momentum.mean_p),
                (a.momentum.mean_p2, b.momentum.mean_p2),
            ];
            for (i, (u, v)) in pairs.iter().enumerate() {
                assert!((u - v).abs() <= 1e-8, "moment {i}: {u} vs {v} (diff {:e})", (u - v).abs());
            }
        };
        check(&linear_state(1.0, 2.0), 3.1);
        let p = StateVector::pt_coherent(&pt_coherent(&pt(), Complex64::new(1.0, 2.0), 60).unwrap());
        check(&p, 3.1);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn norm_is_conserved(re in -2.0f64..2.0, im in -2.0f64..2.0, t in 0.0f64..50.0) {
            let s = linear_state(re, im);
            let grid = s.model().default_grid();
            let n0 = position_moments(&synthesize(&s, &grid, 0.0).unwrap()).unwrap().norm;
            let nt = position_moments(&synthesize(&s, &grid, t).unwrap()).unwrap().norm;
            prop_assert!((n0 - nt).abs() < 1e-10);
        }

        #[test]
        fn real_even_patterns_have_no_drift(c0 in -1.0f64..1.0, c2 in -1.0f64..1.0, c4 in -1.0f64..1.0) {
            prop_assume!(c0.abs() + c2.abs() + c4.abs() > 0.1);
            let scale = (c0 * c0 + c2 * c2 + c4 * c4).sqrt();
            let c: Vec<Complex64> = [c0, 0.0, c2, 0.0, c4].iter().map(|&v| Complex64::new(v / scale, 0.0)).collect();
            let s = StateVector::new(linear(), c).unwrap();
            let f = synthesize(&s, &s.model().default_grid(), 0.0).unwrap();
            prop_assert!(position_moments(&f).unwrap().mean_x.abs() < 1e-10);
            prop_assert!(momentum_moments(&f).unwrap().mean_p.abs() < 1e-10);
        }
    }
}
