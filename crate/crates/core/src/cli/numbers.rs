//! Exact reading of decimal command-line values and fixed-precision output.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

/// Reads `[+-]digits[.digits][e[+-]digits]` or `[+-]digits/digits` exactly.
pub fn parse_exact(text: &str) -> Result<BigRational, String> {
    let s = text.trim();
    let bad = || format!("'{text}' is not a decimal number");
    let (neg, body) = match s.as_bytes().first() {
        Some(b'-') => (true, &s[1..]),
        Some(b'+') => (false, &s[1..]),
        _ => (false, s),
    };
    let value = if let Some((num, den)) = body.split_once('/') {
        let n = parse_digits(num).ok_or_else(bad)?;
        let d = parse_digits(den).ok_or_else(bad)?;
        if d.is_zero() {
            return Err(format!("'{text}' has a zero denominator"));
        }
        BigRational::new(n, d)
    } else {
        let (mantissa, exp) = match body.find(['e', 'E']) {
            Some(i) => {
                let e: i32 = body[i + 1..].parse().map_err(|_| bad())?;
                (&body[..i], e)
            }
            None => (body, 0),
        };
        let (whole, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
        if whole.is_empty() && frac.is_empty() {
            return Err(bad());
        }
        let digits = format!("{whole}{frac}");
        let n = parse_digits(&digits).ok_or_else(bad)?;
        let shift = exp - frac.len() as i32;
        let ten = BigInt::from(10);
        if shift >= 0 {
            BigRational::from_integer(n * num_traits::pow(ten, shift as usize))
        } else {
            BigRational::new(n, num_traits::pow(ten, (-shift) as usize))
        }
    };
    Ok(if neg { -value } else { value })
}

fn parse_digits(s: &str) -> Option<BigInt> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

pub fn parse_exact_list(text: &str) -> Result<Vec<BigRational>, String> {
    text.split(',').map(parse_exact).collect()
}

pub fn parse_f64_list(text: &str) -> Result<Vec<f64>, String> {
    text.split(',')
        .map(|s| {
            let v: f64 = s.trim().parse().map_err(|_| format!("'{s}' is not a number"))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(format!("'{s}' is not finite"))
            }
        })
        .collect()
}

/// Rounds to 15 significant digits and prints the shortest form of that.
pub fn sig15(v: f64) -> String {
    let rounded: f64 = format!("{v:.14e}").parse().expect("formatted float");
    let rounded = if rounded == 0.0 { 0.0 } else { rounded };
    format!("{rounded}")
}

/// `a`, `a + bi` or `a - bi`, each part at 15 significant digits.
pub fn format_complex(re: f64, im: f64) -> String {
    let im_r: f64 = sig15(im).parse().expect("formatted float");
    if im_r == 0.0 {
        return sig15(re);
    }
    let sign = if im_r < 0.0 { '-' } else { '+' };
    let mag = sig15(im_r.abs());
    format!("{} {sign} {mag}i", sig15(re))
}

pub fn is_positive(r: &BigRational) -> bool {
    r > &BigRational::zero()
}
