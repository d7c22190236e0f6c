//! Uniform grids, Simpson quadrature over sampled functions and adaptive
//! Gauss–Kronrod integration of closures.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Uniform grid of `count` points spanning `[x_min, x_max]`, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    x_min: f64,
    x_max: f64,
    count: usize,
}

impl Grid {
    pub fn new(x_min: f64, x_max: f64, count: usize) -> Result<Self> {
        if !x_min.is_finite() || !x_max.is_finite() || x_min >= x_max {
            return Err(Error::InvalidArgument(format!("grid requires finite x_min < x_max, got [{x_min}, {x_max}]")));
        }
        if count < 3 {
            return Err(Error::InvalidArgument(format!("grid requires at least 3 points, got {count}")));
        }
        Ok(Self { x_min, x_max, count })
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn step(&self) -> f64 {
        (self.x_max - self.x_min) / (self.count - 1) as f64
    }

    /// The i-th grid point; the last point is exactly `x_max`.
    pub fn point(&self, i: usize) -> f64 {
        if i + 1 == self.count {
            self.x_max
        } else {
            self.x_min + i as f64 * self.step()
        }
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(move |i| self.point(i))
    }

    /// Same interval with the step halved.
    pub fn refined(&self) -> Self {
        Self { count: 2 * self.count - 1, ..*self }
    }
}

/// Complex samples of a function on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<Complex64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.count() {
            return Err(Error::InvalidArgument(format!(
                "grid has {} points but {} values were given",
                grid.count(),
                values.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> Complex64) -> Self {
        let values = grid.points().map(f).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Pointwise map onto a new function on the same grid.
    pub fn map(&self, f: impl Fn(f64, Complex64) -> Complex64) -> Self {
        let values = self.values.iter().enumerate().map(|(i, &v)| f(self.grid.point(i), v)).collect();
        Self { grid: self.grid, values }
    }
}

/// Composite Simpson integral of a grid function.
///
/// With an even point count the final panel is closed with the trapezoid rule.
pub fn quadrature(f: &GridFunction) -> Complex64 {
    let re: Vec<f64> = f.values.iter().map(|v| v.re).collect();
    let im: Vec<f64> = f.values.iter().map(|v| v.im).collect();
    let h = f.grid.step();
    Complex64::new(simpson(&re, h), simpson(&im, h))
}

/// Composite Simpson over uniformly spaced real samples.
pub fn simpson(samples: &[f64], h: f64) -> f64 {
    let n = samples.len();
    match n {
        0 | 1 => 0.0,
        2 => 0.5 * h * (samples[0] + samples[1]),
        _ => {
            let odd_count = n % 2 == 1;
            let last = if odd_count { n - 1 } else { n - 2 };
            let mut acc = samples[0] + samples[last];
            for (i, &v) in samples.iter().enumerate().take(last).skip(1) {
                acc += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
            }
            let mut total = acc * h / 3.0;
            if !odd_count {
                total += 0.5 * h * (samples[n - 2] + samples[n - 1]);
            }
            total
        }
    }
}

// Gauss–Kronrod 7/15 nodes and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Result of [`integrate_adaptive`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveIntegral {
    pub value: f64,
    pub error_estimate: f64,
    pub converged: bool,
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod_segment(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Segment { a, b, value: kronrod * half, error: ((kronrod - gauss) * half).abs() }
}

/// Globally adaptive Gauss–Kronrod (7/15) integration of `f` over `[a, b]`.
///
/// The segment with the largest error estimate is bisected until the summed
/// estimate drops below `max(abs_tol, rel_tol * |value|)` or the subdivision
/// budget runs out, in which case `converged` is false.
pub fn integrate_adaptive(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_segments: usize,
) -> Result<AdaptiveIntegral> {
    if !a.is_finite() || !b.is_finite() || a >= b {
        return Err(Error::InvalidArgument(format!("integration interval must be finite with a < b, got [{a}, {b}]")));
    }
    let mut heap = BinaryHeap::new();
    heap.push(kronrod_segment(&f, a, b));
    loop {
        let value: f64 = heap.iter().map(|s| s.value).sum();
        let error: f64 = heap.iter().map(|s| s.error).sum();
        if !value.is_finite() {
            return Err(Error::Overflow("integrand produced a non-finite value".into()));
        }
        let target = abs_tol.max(rel_tol * value.abs());
        if error <= target || heap.len() >= max_segments {
            return Ok(AdaptiveIntegral { value, error_estimate: error, converged: error <= target });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        heap.push(kronrod_segment(&f, worst.a, mid));
        heap.push(kronrod_segment(&f, mid, worst.b));
    }
}
