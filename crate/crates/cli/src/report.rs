use rug::float::Round;
use rug::ops::Pow;
use rug::{Complex, Float, Integer};
use serde::Serialize;

/// Echo of the inputs that produced a value.
#[derive(Clone, Debug, Serialize)]
pub struct Params {
    pub base: u32,
    pub digits: String,
    pub s: String,
    pub level: u32,
    pub digits_out: u32,
}

/// One evaluation, in the shape printed by `zeta` and `kempner`.
#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub params: Params,
    pub value_re: String,
    pub value_im: String,
    pub error_bound: String,
    pub terms: usize,
    pub level: u32,
    pub elapsed_ms: u128,
    pub method: String,
    #[serde(skip)]
    pub bracket: Option<(String, String)>,
}

impl RunReport {
    pub fn print(&self, json: bool) {
        if json {
            println!("{}", serde_json::to_string(self).expect("serializable"));
            return;
        }
        let p = &self.params;
        println!("{:<12} b={} A={} s={}", "params", p.base, p.digits, p.s);
        println!("{:<12} {}", "value_re", self.value_re);
        println!("{:<12} {}", "value_im", self.value_im);
        println!("{:<12} {}", "error_bound", self.error_bound);
        if let Some((lo, hi)) = &self.bracket {
            println!("{:<12} {}", "lower", lo);
            println!("{:<12} {}", "upper", hi);
        }
        println!("{:<12} {}", "terms", self.terms);
        println!("{:<12} {}", "level", self.level);
        println!("{:<12} {}", "elapsed_ms", self.elapsed_ms);
        println!("{:<12} {}", "method", self.method);
    }
}

/// `x` rounded to `decimals` places after the point, as a fixed-point string.
pub fn fixed(x: &Float, decimals: u32) -> String {
    fixed_rounded(x, decimals, Round::Nearest)
}

/// [`fixed`] with an explicit rounding direction, for printing enclosures.
pub fn fixed_rounded(x: &Float, decimals: u32, round: Round) -> String {
    let bits = x.prec().max(64) + decimals * 4;
    let scale = Float::with_val(bits, Integer::from(10).pow(decimals));
    let scaled = Float::with_val(bits, x * &scale);
    let n = scaled
        .to_integer_round(round)
        .map(|(n, _)| n)
        .unwrap_or_default();
    let negative = n < 0;
    let digits = n.abs().to_string();
    let d = decimals as usize;
    let padded = format!("{digits:0>width$}", width = d + 1);
    let (int, frac) = padded.split_at(padded.len() - d);
    let sign = if negative { "-" } else { "" };
    if d == 0 {
        format!("{sign}{int}")
    } else {
        format!("{sign}{int}.{frac}")
    }
}

pub fn fixed_complex(z: &Complex, decimals: u32) -> (String, String) {
    (fixed(z.real(), decimals), fixed(z.imag(), decimals))
}

/// Three significant digits, rounded up, so the printed bound never
/// understates the internal one.
pub fn bound_up(x: &Float) -> String {
    if x.is_zero() {
        return "0".into();
    }
    let bits = 128;
    let x = Float::with_val(bits, x);
    let exp = Float::with_val(bits, x.log10_ref()).floor().to_f64() as i32;
    let pow = |e: i32| {
        let ten = Float::with_val(bits, 10);
        if e >= 0 {
            Float::with_val(bits, ten.pow(e as u32))
        } else {
            Float::with_val(bits, ten.pow(-e as u32)).recip()
        }
    };
    let mut exp = exp;
    let mut mantissa = Float::with_val(bits, &x / pow(exp - 2)).ceil();
    if mantissa >= 1000 {
        exp += 1;
        mantissa = Float::with_val(bits, &x / pow(exp - 2)).ceil();
    }
    let m = mantissa.to_f64() as u32;
    format!("{}.{:02}e{}", m / 100, m % 100, exp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_point_rounding() {
        let x = Float::with_val(200, 1.25);
        assert_eq!(fixed(&x, 1), "1.2");
        assert_eq!(fixed(&Float::with_val(200, -0.5), 3), "-0.500");
        assert_eq!(fixed(&Float::with_val(200, 0.004), 2), "0.00");
        assert_eq!(fixed(&Float::with_val(200, 12.0), 0), "12");
        let third = Float::with_val(200, 1) / 3u32;
        assert_eq!(fixed(&third, 5), "0.33333");
        assert_eq!(fixed_rounded(&third, 5, Round::Up), "0.33334");
        assert_eq!(fixed_rounded(&-third, 2, Round::Down), "-0.34");
    }

    #[test]
    fn bounds_round_up() {
        assert_eq!(bound_up(&Float::with_val(64, 1.234e-20)), "1.24e-20");
        assert_eq!(bound_up(&Float::with_val(64, 9.999e-5)), "1.00e-4");
        assert_eq!(bound_up(&Float::with_val(64, 2.0)), "2.00e0");
        assert_eq!(bound_up(&Float::new(64)), "0");
        let tiny = Float::with_val(64, Float::i_exp(1, -400));
        let printed: Float = Float::with_val(64, Float::parse(bound_up(&tiny)).unwrap());
        assert!(printed >= tiny);
    }
}
