//! CSV and JSON emission.

use serde::Serialize;

use kgcoherent::linear_osc::TimeSample;

use crate::CliError;

/// Header of every time-series CSV.
pub const SERIES_HEADER: &str = "t,dx,dp,product,ex,ep";

/// C-style `%.9g`: nine significant digits, trailing zeros removed,
/// exponent form outside `1e-4 <= |x| < 1e9`.
pub fn fmt_g9(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..9).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{mantissa}e{sign}{:02}", exp.abs());
    }
    let decimals = (8 - exp) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Header line plus one row per item, LF-terminated.
pub fn csv<T>(header: &str, rows: impl IntoIterator<Item = T>, fields: impl Fn(&T) -> Vec<String>) -> String {
    let mut out = String::with_capacity(64 * 1024);
    out.push_str(header);
    out.push('\n');
    for row in rows {
        out.push_str(&fields(&row).join(","));
        out.push('\n');
    }
    out
}

pub fn series_csv(samples: &[TimeSample]) -> String {
    csv(SERIES_HEADER, samples, |s| {
        [s.t, s.dx, s.dp, s.product, s.mean_x, s.mean_p].iter().map(|&v| fmt_g9(v)).collect()
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesRow {
    pub t: f64,
    pub dx: f64,
    pub dp: f64,
    pub product: f64,
    pub ex: f64,
    pub ep: f64,
}

impl From<&TimeSample> for SeriesRow {
    fn from(s: &TimeSample) -> Self {
        Self { t: s.t, dx: s.dx, dp: s.dp, product: s.product, ex: s.mean_x, ep: s.mean_p }
    }
}

/// Pretty-printed JSON with a trailing newline.
pub fn json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Failure(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_printf_g() {
        let cases = [
            (1.0, "1"),
            (3f64.sqrt(), "1.73205081"),
            (5f64.sqrt(), "2.23606798"),
            (0.5, "0.5"),
            (0.141_421_356_237_309_5, "0.141421356"),
            (-2.5e-7, "-2.5e-07"),
            (123_456_789.0, "123456789"),
            (1_234_567_890.0, "1.23456789e+09"),
            (0.000_012_345_678_91, "1.23456789e-05"),
            (0.000_123_456_789_1, "0.000123456789"),
            (99.999_999_999, "100"),
            (999_999_999.7, "1e+09"),
            (50.0, "50"),
        ];
        for (x, want) in cases {
            assert_eq!(fmt_g9(x), want, "{x}");
        }
    }
}
