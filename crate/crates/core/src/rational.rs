//! Exact rational helpers shared by reports, CSV output and formulas.

use num_integer::Integer;
use num_rational::Rational64;
use num_traits::ToPrimitive;

pub type Ratio = Rational64;

pub fn int(v: i64) -> Ratio {
    Ratio::from_integer(v)
}

pub fn frac(p: i64, q: i64) -> Ratio {
    Ratio::new(p, q)
}

/// `"3"` for integers, `"11/2"` otherwise.
pub fn render_ratio(r: Ratio) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Accepts `"p/q"`, `"p"` or a finite decimal such as `"1.5"`.
pub fn parse_ratio(s: &str) -> Option<Ratio> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let q: i64 = q.trim().parse().ok()?;
        if q == 0 {
            return None;
        }
        return Some(Ratio::new(p.trim().parse().ok()?, q));
    }
    if let Some((whole, dec)) = s.split_once('.') {
        if dec.is_empty() || dec.len() > 12 || !dec.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let neg = whole.starts_with('-');
        let w: i64 = if whole.is_empty() || whole == "-" {
            0
        } else {
            whole.parse().ok()?
        };
        let scale = 10i64.pow(dec.len() as u32);
        let f: i64 = dec.parse().ok()?;
        let mag = w.abs() * scale + f;
        return Some(Ratio::new(if neg { -mag } else { mag }, scale));
    }
    s.parse().ok().map(Ratio::from_integer)
}

pub fn to_f64(r: Ratio) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Six-decimal rendering used in CSV and CLI output.
pub fn render_float(r: Ratio) -> String {
    format!("{:.6}", to_f64(r))
}

pub fn ceil_div(a: usize, b: usize) -> usize {
    a.div_ceil(b)
}

pub fn ceil(r: Ratio) -> i64 {
    Integer::div_ceil(r.numer(), r.denom())
}
