//! Effective run configuration: defaults, then a key=value file, then the
//! output-directory environment variable, then command-line flags.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use kgcoherent::Complex64;
use serde::{Serialize, Serializer};

use crate::CliError;

/// Environment variable that overrides the output directory (and nothing else).
pub const OUTPUT_DIR_ENV: &str = "KGCOHERENT_OUTPUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModelSelector {
    Linear,
    Pt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Closed-form expectation series (linear model only).
    Series,
    /// Moments of the wave packet synthesised on a grid.
    Quadrature,
}

/// Settings that may come from a config file or from flags. `None` leaves
/// the lower-priority value in place.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub model: Option<ModelSelector>,
    pub m: Option<f64>,
    pub k: Option<f64>,
    pub omega: Option<f64>,
    pub branch: Option<Branch>,
    pub alpha: Option<Complex64>,
    pub n: Option<usize>,
    pub t0: Option<f64>,
    pub t1: Option<f64>,
    pub dt: Option<f64>,
    pub grid_points: Option<usize>,
    pub x_min: Option<f64>,
    pub x_max: Option<f64>,
    pub output: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    pub format: Option<OutputFormat>,
    pub method: Option<Method>,
    pub n_max: Option<usize>,
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub model: ModelSelector,
    pub m: f64,
    pub k: f64,
    pub omega: f64,
    pub branch: Branch,
    #[serde(serialize_with = "serialize_alpha")]
    pub alpha: Complex64,
    pub n: Option<usize>,
    pub t0: f64,
    pub t1: f64,
    pub dt: f64,
    pub grid_points: Option<usize>,
    pub x_min: Option<f64>,
    pub x_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub format: Option<OutputFormat>,
    pub method: Option<Method>,
    pub n_max: usize,
    pub tol: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: ModelSelector::Linear,
            m: 1.0,
            k: 1.0,
            omega: 1.0,
            branch: Branch::Plus,
            alpha: Complex64::new(0.1, 0.2),
            n: None,
            t0: 0.0,
            t1: 50.0,
            dt: kgcoherent::linear_osc::DEFAULT_TIME_STEP,
            grid_points: None,
            x_min: None,
            x_max: None,
            output: None,
            output_dir: PathBuf::from("."),
            format: None,
            method: None,
            n_max: 10,
            tol: 1e-6,
        }
    }
}

fn serialize_alpha<S: Serializer>(alpha: &Complex64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format_complex(*alpha))
}

/// `a+bi` / `a-bi` using the shortest round-trip decimal forms.
pub fn format_complex(z: Complex64) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{}{}{}i", z.re, sign, z.im.abs())
}

/// Parses `a+bi`, `a-bi`, `a`, `bi` and `±i`, ignoring whitespace.
pub fn parse_complex(text: &str) -> Result<Complex64, String> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || format!("cannot parse '{text}' as a complex number of the form a+bi");
    if s.is_empty() {
        return Err(bad());
    }
    let Some(body) = s.strip_suffix(['i', 'j']) else {
        return s.parse::<f64>().map(|re| Complex64::new(re, 0.0)).map_err(|_| bad());
    };
    // Split at the last sign that is not a leading sign or part of an exponent.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let (re_text, im_text) = match split {
        Some(i) => (&body[..i], &body[i..]),
        None => ("0", body),
    };
    let im = match im_text {
        "" | "+" => 1.0,
        "-" => -1.0,
        t => t.parse::<f64>().map_err(|_| bad())?,
    };
    let re = re_text.parse::<f64>().map_err(|_| bad())?;
    if !re.is_finite() || !im.is_finite() {
        return Err(bad());
    }
    Ok(Complex64::new(re, im))
}

fn parse_enum<T: ValueEnum>(key: &str, value: &str) -> Result<T, CliError> {
    T::from_str(value, true).map_err(|_| CliError::Usage(format!("invalid value '{value}' for '{key}'")))
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value.parse().map_err(|_| CliError::Usage(format!("invalid value '{value}' for '{key}'")))
}

impl Overrides {
    /// Reads `key = value` lines; `#` starts a comment. Keys are the long
    /// flag names, with `_` accepted in place of `-`.
    pub fn from_config_text(text: &str) -> Result<Self, CliError> {
        let mut o = Overrides::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Usage(format!("config line {}: expected key=value", lineno + 1)));
            };
            let key = key.trim().replace('_', "-");
            let value = value.trim();
            match key.as_str() {
                "model" => o.model = Some(parse_enum(&key, value)?),
                "m" => o.m = Some(parse_value(&key, value)?),
                "k" => o.k = Some(parse_value(&key, value)?),
                "omega" => o.omega = Some(parse_value(&key, value)?),
                "branch" => o.branch = Some(parse_enum(&key, value)?),
                "alpha" => o.alpha = Some(parse_complex(value).map_err(CliError::Usage)?),
                "n" => o.n = Some(parse_value(&key, value)?),
                "t0" => o.t0 = Some(parse_value(&key, value)?),
                "t1" => o.t1 = Some(parse_value(&key, value)?),
                "dt" => o.dt = Some(parse_value(&key, value)?),
                "grid-points" => o.grid_points = Some(parse_value(&key, value)?),
                "x-min" => o.x_min = Some(parse_value(&key, value)?),
                "x-max" => o.x_max = Some(parse_value(&key, value)?),
                "output" => o.output = Some(PathBuf::from(value)),
                "output-dir" => o.output_dir = Some(PathBuf::from(value)),
                "format" => o.format = Some(parse_enum(&key, value)?),
                "method" => o.method = Some(parse_enum(&key, value)?),
                "n-max" => o.n_max = Some(parse_value(&key, value)?),
                "tol" => o.tol = Some(parse_value(&key, value)?),
                _ => return Err(CliError::Usage(format!("config line {}: unknown key '{key}'", lineno + 1))),
            }
        }
        Ok(o)
    }

    pub fn from_config_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config file {}: {e}", path.display())))?;
        Self::from_config_text(&text)
    }
}

impl RunConfig {
    pub fn apply(mut self, o: &Overrides) -> Self {
        macro_rules! take {
            ($($field:ident),*) => {
                $(if let Some(v) = o.$field.clone() { self.$field = v; })*
            };
        }
        take!(model, m, k, omega, branch, alpha, t0, t1, dt, output_dir, n_max, tol);
        macro_rules! take_opt {
            ($($field:ident),*) => {
                $(if o.$field.is_some() { self.$field = o.$field.clone(); })*
            };
        }
        take_opt!(n, grid_points, x_min, x_max, output, format, method);
        self
    }

    /// Layers the config file, the environment and the flags over the defaults.
    pub fn resolve(file: Option<&Overrides>, env_output_dir: Option<PathBuf>, flags: &Overrides) -> Self {
        let mut config = RunConfig::default();
        if let Some(file) = file {
            config = config.apply(file);
        }
        if let Some(dir) = env_output_dir {
            config.output_dir = dir;
        }
        config.apply(flags)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let usage = |msg: &str| Err(CliError::Usage(msg.to_string()));
        if !(self.m > 0.0) || !self.m.is_finite() {
            return usage("mass must be positive");
        }
        if !(self.k > 0.0) || !self.k.is_finite() {
            return usage("coupling must be positive");
        }
        if !(self.omega > 0.0) || !self.omega.is_finite() {
            return usage("frequency must be positive");
        }
        if !self.t0.is_finite() || !self.t1.is_finite() || self.t0 >= self.t1 {
            return usage("time range requires t0 < t1");
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return usage("time step must be positive");
        }
        if self.n == Some(0) {
            return usage("n must be at least 1");
        }
        if matches!(self.grid_points, Some(p) if p < 5) {
            return usage("grid-points must be at least 5");
        }
        if let (Some(a), Some(b)) = (self.x_min, self.x_max) {
            if !(a < b) {
                return usage("grid override requires x-min < x-max");
            }
        }
        if !(self.tol > 0.0) || !self.tol.is_finite() {
            return usage("tol must be positive");
        }
        Ok(())
    }

    /// The configuration as a config file that reproduces it.
    pub fn to_config_text(&self) -> String {
        let mut s = String::new();
        let mut line = |k: &str, v: String| writeln!(s, "{k} = {v}").expect("write to string");
        line("model", enum_name(self.model));
        line("m", self.m.to_string());
        line("k", self.k.to_string());
        line("omega", self.omega.to_string());
        line("branch", enum_name(self.branch));
        line("alpha", format_complex(self.alpha));
        if let Some(n) = self.n {
            line("n", n.to_string());
        }
        line("t0", self.t0.to_string());
        line("t1", self.t1.to_string());
        line("dt", self.dt.to_string());
        if let Some(p) = self.grid_points {
            line("grid-points", p.to_string());
        }
        if let Some(x) = self.x_min {
            line("x-min", x.to_string());
        }
        if let Some(x) = self.x_max {
            line("x-max", x.to_string());
        }
        if let Some(p) = &self.output {
            line("output", p.display().to_string());
        }
        line("output-dir", self.output_dir.display().to_string());
        if let Some(f) = self.format {
            line("format", enum_name(f));
        }
        if let Some(m) = self.method {
            line("method", enum_name(m));
        }
        line("n-max", self.n_max.to_string());
        line("tol", self.tol.to_string());
        s
    }
}

fn enum_name<T: ValueEnum>(v: T) -> String {
    v.to_possible_value().expect("no skipped variants").get_name().to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_forms() {
        assert_eq!(parse_complex("0.1+0.2i").unwrap(), Complex64::new(0.1, 0.2));
        assert_eq!(parse_complex(" 1 - 2 i ").unwrap(), Complex64::new(1.0, -2.0));
        assert_eq!(parse_complex("-1.5e-3+2E+1i").unwrap(), Complex64::new(-1.5e-3, 20.0));
        assert_eq!(parse_complex("3").unwrap(), Complex64::new(3.0, 0.0));
        assert_eq!(parse_complex("-2i").unwrap(), Complex64::new(0.0, -2.0));
        assert_eq!(parse_complex("1-i").unwrap(), Complex64::new(1.0, -1.0));
        assert_eq!(parse_complex("i").unwrap(), Complex64::new(0.0, 1.0));
        assert!(parse_complex("").is_err());
        assert!(parse_complex("1+2").is_err());
        assert!(parse_complex("a+bi").is_err());
        assert!(parse_complex("nan+1i").is_err());
    }

    #[test]
    fn complex_round_trip() {
        for z in [Complex64::new(0.1, 0.2), Complex64::new(1.0, -2.0), Complex64::new(-0.0, 1e-300)] {
            assert_eq!(parse_complex(&format_complex(z)).unwrap(), z);
        }
    }

    #[test]
    fn flags_beat_file_and_env_sets_only_output_dir() {
        let file = Overrides::from_config_text("k = 2\nalpha = 1+2i\noutput_dir = from-file # note\n").unwrap();
        let flags = Overrides { k: Some(3.0), ..Default::default() };
        let c = RunConfig::resolve(Some(&file), Some(PathBuf::from("from-env")), &flags);
        assert_eq!(c.k, 3.0);
        assert_eq!(c.alpha, Complex64::new(1.0, 2.0));
        assert_eq!(c.output_dir, PathBuf::from("from-env"));
        let flags = Overrides { output_dir: Some(PathBuf::from("from-flag")), ..Default::default() };
        let c = RunConfig::resolve(Some(&file), Some(PathBuf::from("from-env")), &flags);
        assert_eq!(c.output_dir, PathBuf::from("from-flag"));
    }

    #[test]
    fn config_text_round_trip() {
        let c = RunConfig {
            model: ModelSelector::Pt,
            alpha: Complex64::new(-0.3, 0.7),
            n: Some(17),
            x_min: Some(-2.5),
            format: Some(OutputFormat::Json),
            method: Some(Method::Quadrature),
            ..RunConfig::default()
        };
        let back = RunConfig::default().apply(&Overrides::from_config_text(&c.to_config_text()).unwrap());
        assert_eq!(back, c);
    }

    #[test]
    fn bad_config_lines() {
        assert!(Overrides::from_config_text("nonsense").is_err());
        assert!(Overrides::from_config_text("colour = red").is_err());
        assert!(Overrides::from_config_text("k = one").is_err());
        assert!(Overrides::from_config_text("model = cubic").is_err());
    }

    #[test]
    fn validation_messages() {
        let c = RunConfig { k: -1.0, ..Default::default() };
        assert!(matches!(c.validate(), Err(CliError::Usage(m)) if m == "coupling must be positive"));
        let c = RunConfig { t0: 5.0, t1: 1.0, ..Default::default() };
        assert!(c.validate().is_err());
        assert!(RunConfig::default().validate().is_ok());
    }
}
