//! Reference computations that share no algorithm with the series module.
//!
//! `zeta_reference` accelerates the alternating eta series with
//! Chebyshev-derived weights; `restricted_sum_bracket` enumerates admissible
//! integers and closes the remainder with a geometric digit-count bound.

use rayon::prelude::*;
use rug::float::Round;
use rug::ops::Pow;
use rug::{Complex, Float, Integer, Rational};

use crate::digitset::DigitSet;
use crate::error::{Error, Result};
use crate::moments::MomentTable;
use crate::numerics::{digits_to_bits, BernoulliCache, ComplexParameter, PrecisionContext};

/// A rigorous real enclosure `[lower, upper]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Bracket {
    pub lower: Float,
    pub upper: Float,
}

impl Bracket {
    pub fn new(lower: Float, upper: Float) -> Self {
        assert!(lower <= upper, "inverted bracket");
        Bracket { lower, upper }
    }

    pub fn contains(&self, x: &Float) -> bool {
        self.lower <= *x && *x <= self.upper
    }

    pub fn width(&self) -> Float {
        Float::with_val(self.upper.prec(), &self.upper - &self.lower)
    }

    pub fn midpoint(&self) -> Float {
        Float::with_val(self.upper.prec(), &self.upper + &self.lower) / 2u32
    }

    pub fn intersects(&self, other: &Bracket) -> bool {
        self.lower <= other.upper && other.lower <= self.upper
    }
}

/// `zeta(s)` for `Re s > 1` to `digits` correct digits (absolute), through
/// `eta(s) / (1 - 2^(1-s))` and the weights
/// `d_k = n sum_{i<=k} (n+i-1)! 4^i / ((n-i)! (2i)!)`.
pub fn zeta_reference(s: &ComplexParameter, digits: u32) -> Result<Complex> {
    s.check_convergence(&DigitSet::full(2)?)?;
    let t = s.t().abs();
    let probe = 53;
    let sv = s.at(probe);
    let one_minus = {
        let e = Complex::with_val(probe, 1 - sv.clone());
        let p = (e * Float::with_val(probe, rug::float::Constant::Log2)).exp();
        Complex::with_val(probe, 1 - p)
    };
    let denom = one_minus.abs().real().to_f64();
    // error <= 3 (1 + 2|t|) e^(pi |t| / 2) / ((3 + sqrt 8)^n |1 - 2^(1-s)|)
    let need = digits as f64
        + 2.0
        + (3.0 * (1.0 + 2.0 * t)).log10()
        + t * std::f64::consts::PI / 2.0 / std::f64::consts::LN_10
        - denom.log10();
    let n = (need / (3.0 + 8f64.sqrt()).log10()).ceil().max(1.0) as u64;
    let bits = digits_to_bits(digits + 12 + (n as f64).log10().ceil() as u32)
        + (t * 0.5).ceil() as u32;

    // exact d_0..=d_n from the term ratio
    // t_(i+1) / t_i = 4 (n+i)(n-i) / ((2i+1)(2i+2)), t_0 = 1
    let mut d = Vec::with_capacity(n as usize + 1);
    let mut term = Rational::from(1);
    let mut acc = Rational::from(0);
    for i in 0..=n {
        acc += &term;
        d.push(Rational::from(&acc * Integer::from(n)));
        term *= Rational::from((4 * (n + i) * (n - i), (2 * i + 1) * (2 * i + 2)));
    }
    let dn = d[n as usize].clone();
    debug_assert!(*dn.denom() == 1);
    let sv = s.at(bits);
    let mut sum = Complex::with_val(bits, 0);
    for k in 0..n {
        let w = Float::with_val(bits, Rational::from(&d[k as usize] - &dn));
        let ln = Float::with_val(bits, k + 1).ln();
        let mut e = Complex::with_val(bits, &sv * &ln);
        e = -e;
        let mut x = e.exp() * w;
        if k % 2 == 1 {
            x = -x;
        }
        sum += x;
    }
    let eta = -sum / Float::with_val(bits, &dn);
    let e = Complex::with_val(bits, 1 - sv);
    let p = (e * Float::with_val(bits, rug::float::Constant::Log2)).exp();
    Ok(eta / Complex::with_val(bits, 1 - p))
}

/// Encloses `K_{b,A}(sigma) = sum' n^-sigma` for real `sigma` by summing all
/// admissible `n < b^depth` and bounding the rest by
/// `sum_{l>depth} N1 N^(l-1) b^(-sigma(l-1))`.
pub fn restricted_sum_bracket(
    ds: &DigitSet,
    sigma: &ComplexParameter,
    depth: u32,
    bits: u32,
) -> Result<Bracket> {
    if !sigma.is_real() {
        return Err(Error::InvalidArgument(
            "the enumeration bracket needs a real exponent".into(),
        ));
    }
    sigma.check_convergence(ds)?;
    if depth == 0 {
        return Err(Error::InvalidLevel);
    }
    let ns: Vec<u64> = ds.admissible_below(depth + 1)?.collect();
    let sv = Float::with_val(bits, sigma.at(bits).real());
    // integer exponents avoid exp/log
    let int_sigma = sv.to_u32_saturating().filter(|&k| sv == k && (1..=8).contains(&k));
    let partial: Vec<Float> = ns
        .par_chunks(4096)
        .map(|chunk| {
            chunk.iter().fold(Float::with_val(bits, 0), |acc, &n| {
                let x = if let Some(k) = int_sigma {
                    Float::with_val(bits, Integer::from(n).pow(k)).recip()
                } else {
                    let e = -Float::with_val(bits, &sv * Float::with_val(bits, n).ln());
                    e.exp()
                };
                acc + x
            })
        })
        .collect();
    let sum = partial
        .into_iter()
        .fold(Float::with_val(bits, 0), |acc, p| acc + p);

    // each term and each addition carries a few units of relative rounding
    let ulp = Float::with_val(bits, Float::i_exp(1, 4 - bits as i32));
    let slack = Float::with_val(bits, &sum * &ulp) * (ns.len() as u64 + 8);

    let b = Float::with_val(bits, ds.base());
    let rho = Float::with_val(bits, ds.count()) / Float::with_val(bits, (&b).pow(&sv));
    let one_minus = Float::with_val(bits, 1 - &rho);
    let tail = Float::with_val(bits, (&rho).pow(depth)) * ds.nonzero_count() / one_minus;
    let tail = tail * (Float::with_val(bits, &ulp * 16u32) + 1u32);

    let mut lower = Float::with_val(bits, &sum - &slack);
    lower.set_prec_round(bits, Round::Down);
    let upper = Float::with_val(bits, &sum + &slack) + tail;
    Ok(Bracket::new(lower, upper))
}

/// Relative errors of `u_m(s)` in double precision for the full digit set:
/// `(closed form, recurrence)`, both measured against the recurrence at 100
/// digits.
pub fn double_precision_closed_form_demo(base: u32, s: f64, m: usize) -> Result<(f64, f64)> {
    let ds = DigitSet::full(base)?;
    let param = ComplexParameter::real(s);
    param.check_convergence(&ds)?;
    let truth = MomentTable::build(&ds, &param, m, &PrecisionContext::with_guard(100, 20))?
        .moment(m)
        .real()
        .to_f64();

    let b = base as f64;
    let g = |k: f64| {
        let p = b.powf(s + k);
        p / (p - b)
    };
    let closed = if m == 0 {
        g(0.0)
    } else {
        let bern = BernoulliCache::global();
        let mut acc = g(0.0) / (m as f64 + 1.0) - g(1.0) / 2.0;
        for k in 1..=m / 2 {
            let mut falling = 1.0;
            for i in (m - 2 * k + 2)..=m {
                falling *= i as f64;
            }
            let fact: f64 = (1..=2 * k).map(|i| i as f64).product();
            let b2k = bern.bernoulli(2 * k).to_f64();
            acc += falling * b2k / fact * g(2.0 * k as f64);
        }
        acc
    };

    let sums: Vec<f64> = ds.power_sums(m).iter().map(|x| x.to_f64()).collect();
    let n = ds.count() as f64;
    let mut c = vec![1.0f64];
    for k in 1..=m {
        let mut acc = 0.0;
        let mut coef = 1.0;
        for j in 1..=k {
            coef *= (s + (k - j + 1) as f64) / j as f64;
            acc += coef * sums[j] * c[k - j];
        }
        c.push(acc / (b.powf(s + k as f64) - n));
    }
    let mass = b.powf(s) / (b.powf(s) - n);
    let mut recurrence = mass * c[m];
    for k in 1..=m {
        recurrence *= k as f64 / (s + k as f64);
    }

    let rel = |x: f64| ((x - truth) / truth).abs();
    Ok((rel(closed), rel(recurrence)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digitset::parse_digit_spec;
    use crate::numerics::{abs, log10_abs};
    use rug::float::Constant;

    fn close(a: &Complex, b: &Float, log10_tol: f64) -> bool {
        let d = Complex::with_val(a.prec().0, a - b);
        log10_abs(&abs(&d)) < log10_tol
    }

    #[test]
    fn zeta_even_values() {
        let bits = 400;
        let pi = Float::with_val(bits, Constant::Pi);
        let z2 = Float::with_val(bits, pi.square_ref()) / 6u32;
        let z4 = Float::with_val(bits, (&pi).pow(4u32)) / 90u32;
        assert!(close(&zeta_reference(&ComplexParameter::real(2.0), 80).unwrap(), &z2, -80.0));
        assert!(close(&zeta_reference(&ComplexParameter::real(4.0), 60).unwrap(), &z4, -60.0));
    }

    #[test]
    fn zeta_doubling_digits_is_stable() {
        let s = ComplexParameter::from_f64(1.5, 7.0);
        let a = zeta_reference(&s, 30).unwrap();
        let b = zeta_reference(&s, 60).unwrap();
        let d = Complex::with_val(300, &a - &b);
        assert!(log10_abs(&abs(&d)) < -30.0);
    }

    #[test]
    fn zeta_rejects_pole_region() {
        assert!(zeta_reference(&ComplexParameter::real(1.0), 20).is_err());
        assert!(zeta_reference(&ComplexParameter::real(0.5), 20).is_err());
    }

    #[test]
    fn binary_bracket_width() {
        let ds = DigitSet::full(2).unwrap();
        let br = restricted_sum_bracket(&ds, &ComplexParameter::real(2.0), 20, 128).unwrap();
        let pi = Float::with_val(128, Constant::Pi);
        let z2 = Float::with_val(128, pi.square_ref()) / 6u32;
        assert!(br.contains(&z2), "{br:?} {z2}");
        let limit = Float::with_val(128, Float::i_exp(1, -19)) * (Float::with_val(128, 1e-20) + 1u32);
        assert!(br.width() <= limit);
    }

    #[test]
    fn repunit_bracket_lower() {
        let ds = parse_digit_spec("1", 10).unwrap();
        let br = restricted_sum_bracket(&ds, &ComplexParameter::real(1.0), 4, 200).unwrap();
        let exact = Rational::from((1, 1)) + Rational::from((1, 11)) + Rational::from((1, 111))
            + Rational::from((1, 1111));
        let exact = Float::with_val(200, &exact);
        let d = Float::with_val(200, &br.lower - &exact).abs();
        assert!(log10_abs(&d) < -50.0);
        assert!(br.lower <= exact);
    }

    #[test]
    fn bracket_shrinks_geometrically() {
        let ds = parse_digit_spec("0-8", 10).unwrap();
        let s = ComplexParameter::real(1.5);
        let w4 = restricted_sum_bracket(&ds, &s, 4, 128).unwrap().width().to_f64();
        let w5 = restricted_sum_bracket(&ds, &s, 5, 128).unwrap().width().to_f64();
        let rho = 9.0 / 10f64.powf(1.5);
        assert!((w5 / w4 - rho).abs() < 1e-6);
    }

    #[test]
    fn bracket_domain() {
        let ds = parse_digit_spec("0-8", 10).unwrap();
        let below = ComplexParameter::real(0.9);
        assert!(matches!(
            restricted_sum_bracket(&ds, &below, 3, 64),
            Err(Error::BelowAbscissa { .. })
        ));
        let complex = ComplexParameter::from_f64(2.0, 1.0);
        assert!(restricted_sum_bracket(&ds, &complex, 3, 64).is_err());
    }

    #[test]
    fn demo_small_order_is_accurate() {
        let (closed, rec) = double_precision_closed_form_demo(2, 3.0, 2).unwrap();
        assert!(closed < 1e-12 && rec < 1e-12);
    }

    #[test]
    fn demo_closed_form_degrades() {
        let (c30, r30) = double_precision_closed_form_demo(2, 3.0, 30).unwrap();
        assert!(c30 > 1e3 * r30, "{c30} vs {r30}");
        let (c40, r40) = double_precision_closed_form_demo(2, 3.0, 40).unwrap();
        assert!(c40 > 1e3 * r40);
        assert!(c40 > c30);
    }
}
