//! Recipes for the eleven linear-model figures: `k = 1`, `m = 1`, `N = 50`.

use std::str::FromStr;

use kgcoherent::linear_osc::{self, CoherentSpec, LinearModel, TimeSample};
use kgcoherent::Complex64;
use serde::Serialize;

use crate::config::format_complex;
use crate::CliError;

pub const FIGURE_TRUNCATION: usize = 50;
pub const ALPHA_SMALL: Complex64 = Complex64::new(0.1, 0.2);
pub const ALPHA_LARGE: Complex64 = Complex64::new(1.0, 2.0);

/// Quantity each figure plots against time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Quantity {
    Product,
    Dx,
    Dp,
    Ex,
    Ep,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FigureRecipe {
    pub id: u8,
    pub alpha: Complex64,
    pub t0: f64,
    pub t1: f64,
    pub quantity: Quantity,
}

pub const RECIPES: [FigureRecipe; 11] = [
    FigureRecipe { id: 1, alpha: ALPHA_SMALL, t0: 0.0, t1: 50.0, quantity: Quantity::Product },
    FigureRecipe { id: 2, alpha: ALPHA_LARGE, t0: 0.0, t1: 50.0, quantity: Quantity::Product },
    FigureRecipe { id: 3, alpha: ALPHA_LARGE, t0: 50.0, t1: 100.0, quantity: Quantity::Product },
    FigureRecipe { id: 4, alpha: ALPHA_SMALL, t0: 0.0, t1: 50.0, quantity: Quantity::Dx },
    FigureRecipe { id: 5, alpha: ALPHA_SMALL, t0: 0.0, t1: 50.0, quantity: Quantity::Dp },
    FigureRecipe { id: 6, alpha: ALPHA_LARGE, t0: 0.0, t1: 100.0, quantity: Quantity::Dx },
    FigureRecipe { id: 7, alpha: ALPHA_LARGE, t0: 0.0, t1: 100.0, quantity: Quantity::Dp },
    FigureRecipe { id: 8, alpha: ALPHA_SMALL, t0: 0.0, t1: 50.0, quantity: Quantity::Ex },
    FigureRecipe { id: 9, alpha: ALPHA_SMALL, t0: 0.0, t1: 50.0, quantity: Quantity::Ep },
    FigureRecipe { id: 10, alpha: ALPHA_LARGE, t0: 0.0, t1: 100.0, quantity: Quantity::Ex },
    FigureRecipe { id: 11, alpha: ALPHA_LARGE, t0: 0.0, t1: 100.0, quantity: Quantity::Ep },
];

/// `fig1` .. `fig11`, or `all`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FigureSelection {
    All,
    One(u8),
}

impl FromStr for FigureSelection {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("all") {
            return Ok(Self::All);
        }
        s.strip_prefix("fig")
            .and_then(|n| n.parse::<u8>().ok())
            .filter(|n| (1..=11).contains(n))
            .map(Self::One)
            .ok_or_else(|| format!("unknown figure '{s}' (expected fig1..fig11 or all)"))
    }
}

impl FigureSelection {
    pub fn recipes(&self) -> Vec<FigureRecipe> {
        match self {
            Self::All => RECIPES.to_vec(),
            Self::One(id) => vec![RECIPES[*id as usize - 1]],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FigureMeta {
    pub figure: String,
    pub quantity: Quantity,
    pub model: &'static str,
    pub m: f64,
    pub k: f64,
    pub alpha: String,
    pub truncation: usize,
    pub t0: f64,
    pub t1: f64,
    pub dt: f64,
    pub samples: usize,
    pub columns: [&'static str; 6],
}

pub struct RenderedFigure {
    pub recipe: FigureRecipe,
    pub samples: Vec<TimeSample>,
    pub meta: FigureMeta,
}

/// Evaluates every requested figure. Figures sharing an `α` reuse one time
/// series computed from `t = 0` to the latest requested end time, so a
/// split range (Figs. 2 and 3) comes from one computation.
pub fn render(selection: &FigureSelection, dt: f64) -> Result<Vec<RenderedFigure>, CliError> {
    let recipes = selection.recipes();
    let model = LinearModel::new(1.0, linear_osc::DEFAULT_COUPLING)?;
    let mut series: Vec<(Complex64, Vec<TimeSample>)> = Vec::new();
    for alpha in [ALPHA_SMALL, ALPHA_LARGE] {
        let t1 = recipes.iter().filter(|r| r.alpha == alpha).map(|r| r.t1).fold(f64::NAN, f64::max);
        if t1.is_nan() {
            continue;
        }
        let spec = CoherentSpec::new(alpha, FIGURE_TRUNCATION)?;
        let times = linear_osc::uniform_times(0.0, t1, dt)?;
        series.push((alpha, linear_osc::time_series(&model, &spec, &times)?.samples));
    }
    let slack = 1e-9 * dt;
    Ok(recipes
        .into_iter()
        .map(|recipe| {
            let full = &series.iter().find(|(a, _)| *a == recipe.alpha).expect("series computed").1;
            let samples: Vec<TimeSample> =
                full.iter().filter(|s| s.t >= recipe.t0 - slack && s.t <= recipe.t1 + slack).cloned().collect();
            let meta = FigureMeta {
                figure: format!("fig{}", recipe.id),
                quantity: recipe.quantity,
                model: "linear",
                m: model.mass(),
                k: model.coupling(),
                alpha: format_complex(recipe.alpha),
                truncation: FIGURE_TRUNCATION,
                t0: recipe.t0,
                t1: recipe.t1,
                dt,
                samples: samples.len(),
                columns: ["t", "dx", "dp", "product", "ex", "ep"],
            };
            RenderedFigure { recipe, samples, meta }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selection_parsing() {
        assert_eq!("fig1".parse::<FigureSelection>().unwrap(), FigureSelection::One(1));
        assert_eq!("fig11".parse::<FigureSelection>().unwrap(), FigureSelection::One(11));
        assert_eq!("all".parse::<FigureSelection>().unwrap(), FigureSelection::All);
        for bad in ["fig0", "fig12", "figure1", "1", ""] {
            assert!(bad.parse::<FigureSelection>().is_err(), "{bad}");
        }
    }

    #[test]
    fn recipes_follow_captions() {
        for r in RECIPES {
            let small = [1, 4, 5, 8, 9].contains(&r.id);
            assert_eq!(r.alpha, if small { ALPHA_SMALL } else { ALPHA_LARGE }, "fig{}", r.id);
        }
    }

    #[test]
    fn split_range_shares_the_boundary_sample() {
        let figs = render(&FigureSelection::All, 0.05).unwrap();
        let two = &figs[1];
        let three = &figs[2];
        assert_eq!(two.samples.len(), 1001);
        assert_eq!(three.samples.len(), 1001);
        assert_eq!(two.samples.last().unwrap(), three.samples.first().unwrap());
        assert_eq!(figs[5].samples.len(), 2001);
        assert_eq!(figs[0].samples.len(), 1001);
    }

    #[test]
    fn fig8_starts_at_closed_form_mean() {
        let figs = render(&FigureSelection::One(8), 0.05).unwrap();
        assert!((figs[0].samples[0].mean_x - 0.141_421).abs() < 1e-6);
    }
}
