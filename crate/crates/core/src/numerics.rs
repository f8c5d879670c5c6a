//! Multiprecision plumbing: precision policy, the complex parameter `s`,
//! powers `n^(-s)`, exact Bernoulli numbers, and Gamma-function estimates.
//!
//! Arithmetic is MPFR/MPC through `rug`, round-to-nearest at the working
//! precision. Precision is specified in decimal digits and converted to bits
//! internally.

use std::sync::{OnceLock, RwLock};

use num_complex::Complex64;
use rug::float::Constant;
use rug::ops::Pow;
use rug::{Complex, Float, Integer, Rational};

use crate::digitset::DigitSet;
use crate::error::{Error, Result};

const LOG2_10: f64 = std::f64::consts::LOG2_10;

/// Minimum number of guard digits carried beyond the target.
pub const MIN_GUARD_DIGITS: u32 = 10;

pub fn digits_to_bits(digits: u32) -> u32 {
    (digits as f64 * LOG2_10).ceil() as u32 + 4
}

/// Target and working precision in decimal digits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrecisionContext {
    target_digits: u32,
    working_digits: u32,
}

impl PrecisionContext {
    pub fn new(target_digits: u32) -> Self {
        Self::with_guard(target_digits, MIN_GUARD_DIGITS)
    }

    pub fn with_guard(target_digits: u32, guard_digits: u32) -> Self {
        PrecisionContext {
            target_digits,
            working_digits: target_digits + guard_digits.max(MIN_GUARD_DIGITS),
        }
    }

    /// Guard digits needed to absorb rounding over `terms` series terms on a
    /// block of `b^level` integers.
    pub fn required_guard(terms: usize, base: u32, level: u32) -> u32 {
        let count = ((terms + 1) as f64).log10().ceil() as u32;
        let block = (level as f64 * (base as f64).log10()).ceil() as u32;
        MIN_GUARD_DIGITS + count + block
    }

    /// Returns a context whose guard covers a plan of `terms` terms plus
    /// `extra` digits lost to cancellation.
    pub fn for_plan(&self, terms: usize, base: u32, level: u32, extra: u32) -> Self {
        let needed = Self::required_guard(terms, base, level) + extra;
        if needed <= self.guard_digits() {
            *self
        } else {
            Self::with_guard(self.target_digits, needed)
        }
    }

    pub fn target_digits(&self) -> u32 {
        self.target_digits
    }

    pub fn working_digits(&self) -> u32 {
        self.working_digits
    }

    pub fn guard_digits(&self) -> u32 {
        self.working_digits - self.target_digits
    }

    /// Working precision in bits.
    pub fn bits(&self) -> u32 {
        digits_to_bits(self.working_digits)
    }

    /// `log10` of the absolute accuracy a result must reach.
    pub fn log10_eps(&self) -> f64 {
        -(self.target_digits as f64) - 1.0
    }

    pub fn eps(&self) -> Float {
        Float::with_val(self.bits(), 10).pow(self.log10_eps() as i32)
    }

    /// Relative size of one rounding error at working precision.
    pub fn unit_roundoff(&self) -> f64 {
        2f64.powi(-(self.bits() as i32))
    }
}

/// The complex argument `s = sigma + i t`.
///
/// Parsed values keep their decimal literal so they can be re-rounded
/// exactly at any precision.
#[derive(Clone, Debug)]
pub struct ComplexParameter {
    value: Complex,
    literal: Option<(String, String)>,
}

impl ComplexParameter {
    pub fn new(value: Complex) -> Self {
        ComplexParameter {
            value,
            literal: None,
        }
    }

    /// `sigma + i t` from doubles (exact binary values).
    pub fn from_f64(sigma: f64, t: f64) -> Self {
        Self::new(Complex::with_val(64, (sigma, t)))
    }

    pub fn real(sigma: f64) -> Self {
        Self::from_f64(sigma, 0.0)
    }

    /// Parses `"<sigma>"`, `"<sigma>+<t>i"` or `"<sigma>-<t>i"` with plain
    /// decimal literals.
    pub fn parse(text: &str, bits: u32) -> Result<Self> {
        let bad = || Error::MalformedComplex(text.to_string());
        let (re, im) = match text.strip_suffix('i') {
            None => (text.to_string(), "0".to_string()),
            Some(body) => {
                let split = body
                    .char_indices()
                    .skip(1)
                    .filter(|&(_, c)| c == '+' || c == '-')
                    .map(|(i, _)| i)
                    .last()
                    .ok_or_else(bad)?;
                let (re, im) = body.split_at(split);
                let im = im.strip_prefix('+').unwrap_or(im);
                (re.to_string(), im.to_string())
            }
        };
        if !is_decimal_literal(&re) || !is_decimal_literal(&im) {
            return Err(bad());
        }
        let literal = (re, im);
        let value = parse_literal(&literal, bits);
        Ok(ComplexParameter {
            value,
            literal: Some(literal),
        })
    }

    pub fn value(&self) -> &Complex {
        &self.value
    }

    /// `s` rounded (or re-parsed) at the given precision.
    pub fn at(&self, bits: u32) -> Complex {
        match &self.literal {
            Some(lit) => parse_literal(lit, bits),
            None => Complex::with_val(bits, &self.value),
        }
    }

    pub fn sigma(&self) -> f64 {
        self.value.real().to_f64()
    }

    pub fn t(&self) -> f64 {
        self.value.imag().to_f64()
    }

    pub fn is_real(&self) -> bool {
        self.value.imag().is_zero()
    }

    /// The real parameter `sigma = Re s` (same literal precision).
    pub fn real_part(&self) -> Self {
        ComplexParameter {
            value: Complex::with_val(self.value.prec(), (self.value.real(), 0)),
            literal: self.literal.as_ref().map(|(re, _)| (re.clone(), "0".to_string())),
        }
    }

    /// `s + i dt`.
    pub fn shift_imag(&self, dt: &Float) -> Self {
        let prec = self.value.prec().0.max(dt.prec());
        let mut value = Complex::with_val(prec, &self.value);
        *value.mut_imag() += dt;
        Self::new(value)
    }

    /// Checks `Re s > log_b N`; the boundary itself is a distinct error.
    pub fn check_convergence(&self, ds: &DigitSet) -> Result<()> {
        let prec = self.value.prec().0.max(128);
        let sigma = self.at(prec).real().clone();
        let abscissa = ds.abscissa();
        let err_on = || Error::OnAbscissa {
            sigma: sigma.to_f64(),
            abscissa,
        };
        let err_below = || Error::BelowAbscissa {
            sigma: sigma.to_f64(),
            abscissa,
        };
        let n = ds.count();
        let diff = if n == 1 {
            sigma.clone()
        } else {
            let lhs = Float::with_val(prec, &sigma * Float::with_val(prec, ds.base()).ln());
            lhs - Float::with_val(prec, n).ln()
        };
        let tol = Float::with_val(prec, Float::i_exp(1, 16 - prec as i32));
        if diff.clone().abs() <= tol {
            Err(err_on())
        } else if diff < 0 {
            Err(err_below())
        } else {
            Ok(())
        }
    }
}

fn is_decimal_literal(s: &str) -> bool {
    let s = s.strip_prefix('-').unwrap_or(s);
    let (int, frac) = match s.split_once('.') {
        Some((i, f)) => (i, Some(f)),
        None => (s, None),
    };
    !int.is_empty()
        && int.bytes().all(|c| c.is_ascii_digit())
        && frac.is_none_or(|f| !f.is_empty() && f.bytes().all(|c| c.is_ascii_digit()))
}

fn parse_literal((re, im): &(String, String), bits: u32) -> Complex {
    let re = Float::with_val(bits, Float::parse(re).expect("validated literal"));
    let im = Float::with_val(bits, Float::parse(im).expect("validated literal"));
    Complex::with_val(bits, (re, im))
}

/// `n^(-s) = exp(-s log n)`; exactly 1 for `n = 1`.
pub fn neg_power(n: u64, s: &Complex, bits: u32) -> Complex {
    if n == 1 {
        return Complex::with_val(bits, 1);
    }
    let log_n = Float::with_val(bits, n).ln();
    let mut e = Complex::with_val(bits, s * &log_n);
    e = -e;
    e.exp()
}

/// `x^(-s)` for a real `x > 0`.
pub fn neg_power_real(x: &Float, s: &Complex, bits: u32) -> Complex {
    let log_x = Float::with_val(bits, x.ln_ref());
    let mut e = Complex::with_val(bits, s * &log_x);
    e = -e;
    e.exp()
}

/// `b^s` for an integer base.
pub fn int_pow(b: u32, s: &Complex, bits: u32) -> Complex {
    let log_b = Float::with_val(bits, b).ln();
    Complex::with_val(bits, s * &log_b).exp()
}

/// Exact Bernoulli numbers, filled on demand and shared between threads.
#[derive(Debug, Default)]
pub struct BernoulliCache {
    values: RwLock<Vec<Rational>>,
}

impl BernoulliCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// Process-wide cache.
    pub fn global() -> &'static BernoulliCache {
        static CACHE: OnceLock<BernoulliCache> = OnceLock::new();
        CACHE.get_or_init(BernoulliCache::new)
    }

    /// `B_n` with `B_1 = -1/2`.
    pub fn bernoulli(&self, n: usize) -> Rational {
        if n > 1 && n % 2 == 1 {
            return Rational::new();
        }
        if let Some(v) = self.values.read().expect("poisoned").get(n) {
            return v.clone();
        }
        let mut values = self.values.write().expect("poisoned");
        if values.is_empty() {
            values.push(Rational::from(1));
        }
        // sum_{j=0}^{m} C(m+1, j) B_j = 0
        for m in values.len()..=n {
            let next = if m == 1 {
                Rational::from((-1, 2))
            } else if m % 2 == 1 {
                Rational::new()
            } else {
                let mut acc = Rational::new();
                for (j, bj) in values.iter().enumerate() {
                    if bj.cmp0().is_ne() {
                        acc += Integer::from(Integer::binomial_u(m as u32 + 1, j as u32))
                            * bj.clone();
                    }
                }
                -acc / Integer::from(m + 1)
            };
            values.push(next);
        }
        values[n].clone()
    }

    /// Number of cached entries.
    pub fn len(&self) -> usize {
        self.values.read().expect("poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// `ln Gamma(z)` in double precision (Stirling series after shifting to
/// `Re z >= 12`). Only the real part, `ln |Gamma(z)|`, is branch-free.
pub fn ln_gamma_f64(z: Complex64) -> Complex64 {
    const COEFFS: [f64; 8] = [
        1.0 / 12.0,
        -1.0 / 360.0,
        1.0 / 1260.0,
        -1.0 / 1680.0,
        1.0 / 1188.0,
        -691.0 / 360360.0,
        1.0 / 156.0,
        -3617.0 / 122400.0,
    ];
    let mut z = z;
    let mut shift = Complex64::new(0.0, 0.0);
    while z.re < 12.0 {
        shift += z.ln();
        z += 1.0;
    }
    let half_ln_2pi = 0.5 * (2.0 * std::f64::consts::PI).ln();
    let mut series = Complex64::new(0.0, 0.0);
    let inv = z.inv();
    let inv2 = inv * inv;
    let mut p = inv;
    for c in COEFFS {
        series += p * c;
        p *= inv2;
    }
    (z - 0.5) * z.ln() - z + half_ln_2pi + series - shift
}

/// Upper estimate of `Gamma(sigma + 1) / |Gamma(s + 1)|` in double precision.
///
/// Used only to plan term counts. Saturates to `+inf` on overflow.
pub fn pochhammer_ratio_bound(sigma: f64, s: Complex64) -> f64 {
    if s.im == 0.0 {
        return 1.0;
    }
    let num = ln_gamma_f64(Complex64::new(sigma + 1.0, 0.0)).re;
    let den = ln_gamma_f64(s + 1.0).re;
    let log_ratio = num - den;
    // inflate for the truncated Stirling tail and rounding
    let r = (log_ratio + 1e-12 * (1.0 + log_ratio.abs())).exp();
    if r.is_finite() {
        r.max(1.0)
    } else {
        f64::INFINITY
    }
}

/// `log10` of [`pochhammer_ratio_bound`], safe from overflow.
pub fn log10_pochhammer_ratio_bound(sigma: f64, s: Complex64) -> f64 {
    if s.im == 0.0 {
        return 0.0;
    }
    let num = ln_gamma_f64(Complex64::new(sigma + 1.0, 0.0)).re;
    let den = ln_gamma_f64(s + 1.0).re;
    let log_ratio = num - den;
    ((log_ratio + 1e-12 * (1.0 + log_ratio.abs())) / std::f64::consts::LN_10).max(0.0)
}

/// `|(s+1)_m| / (sigma+1)_m` as a `log10`, computed term by term in doubles.
/// Non-decreasing in `m` and bounded by [`pochhammer_ratio_bound`].
pub fn log10_pochhammer_ratio(s: Complex64, m: usize) -> f64 {
    let sigma = s.re;
    (1..=m)
        .map(|k| {
            let k = k as f64;
            0.5 * ((s.re + k).powi(2) + s.im * s.im).log10() - (sigma + k).log10()
        })
        .sum()
}

/// Multiprecision `Gamma(z)` for `Re z > 0`, via the Stirling series after
/// an argument shift.
pub fn gamma_complex(z: &Complex, bits: u32) -> Complex {
    let work = bits + 32;
    let threshold = 0.12 * work as f64 + 10.0;
    let re = z.real().to_f64();
    let shift = if re < threshold {
        (threshold - re).ceil() as u32
    } else {
        0
    };
    let mut w = Complex::with_val(work, z);
    let mut prod = Complex::with_val(work, 1);
    for _ in 0..shift {
        prod *= &w;
        w += 1;
    }
    let ln = ln_gamma_stirling(&w, work);
    let g = ln.exp() / prod;
    Complex::with_val(bits, g)
}

fn ln_gamma_stirling(w: &Complex, bits: u32) -> Complex {
    let cache = BernoulliCache::global();
    let pi = Float::with_val(bits, Constant::Pi);
    let half_ln_2pi = Float::with_val(bits, pi * 2u32).ln() / 2u32;
    let ln_w = Complex::with_val(bits, w.ln_ref());
    let mut acc = Complex::with_val(bits, w - 0.5f64) * &ln_w;
    acc -= w;
    acc += &half_ln_2pi;
    let inv = Complex::with_val(bits, w.recip_ref());
    let inv2 = Complex::with_val(bits, inv.square_ref());
    let mut p = inv;
    let tiny = Float::with_val(bits, Float::i_exp(1, -(bits as i32)));
    let mut prev = Float::with_val(bits, f64::INFINITY);
    for k in 1.. {
        let b = cache.bernoulli(2 * k);
        let coeff = Float::with_val(bits, &b) / ((2 * k) as u64 * (2 * k - 1) as u64);
        let term = Complex::with_val(bits, &p * &coeff);
        let mag = Float::with_val(bits, term.abs_ref());
        acc += &term;
        if mag < tiny || mag > prev {
            break;
        }
        prev = mag;
        p *= &inv2;
    }
    acc
}

/// `|z|` as a float at the precision of `z`.
pub fn abs(z: &Complex) -> Float {
    Float::with_val(z.prec().0, z.abs_ref())
}

pub fn to_c64(z: &Complex) -> Complex64 {
    Complex64::new(z.real().to_f64(), z.imag().to_f64())
}

/// `log10 |x|`, finite for tiny or huge `x` where `to_f64` would under/overflow.
pub fn log10_abs(x: &Float) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let (m, e) = x.to_f64_exp();
    m.abs().log10() + e as f64 * std::f64::consts::LOG10_2
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &Complex, b: &Complex, tol_log10: f64) -> bool {
        let d = Complex::with_val(a.prec().0, a - b);
        log10_abs(&abs(&d)) < tol_log10
    }

    #[test]
    fn bernoulli_values() {
        let c = BernoulliCache::new();
        assert_eq!(c.bernoulli(0), Rational::from(1));
        assert_eq!(c.bernoulli(1), Rational::from((-1, 2)));
        assert_eq!(c.bernoulli(2), Rational::from((1, 6)));
        assert_eq!(c.bernoulli(4), Rational::from((-1, 30)));
        assert_eq!(c.bernoulli(12), Rational::from((-691, 2730)));
        assert_eq!(c.bernoulli(7), Rational::new());
    }

    #[test]
    fn bernoulli_recurrence_exact() {
        let c = BernoulliCache::new();
        for m in 1..=60u32 {
            let mut acc = Rational::new();
            for j in 0..=m {
                acc += Integer::from(Integer::binomial_u(m + 1, j)) * c.bernoulli(j as usize);
            }
            assert_eq!(acc, 0, "m = {m}");
        }
    }

    #[test]
    fn neg_power_basics() {
        let s = Complex::with_val(200, (2, 0));
        assert_eq!(neg_power(1, &s, 200), Complex::with_val(200, 1));
        let q = neg_power(2, &s, 200);
        assert!(close(&q, &Complex::with_val(200, 0.25), -58.0));
    }

    #[test]
    fn neg_power_complex_against_polar_form() {
        // 3^-(1+i) = (1/3) (cos(ln 3) - i sin(ln 3)), assembled from real MPFR calls
        let bits = 300;
        let s = Complex::with_val(bits, (1, 1));
        let got = neg_power(3, &s, bits);
        let l = Float::with_val(bits, 3).ln();
        let re = Float::with_val(bits, l.cos_ref()) / 3u32;
        let im = -Float::with_val(bits, l.sin_ref()) / 3u32;
        assert!(close(&got, &Complex::with_val(bits, (re, im)), -85.0));
    }

    #[test]
    fn neg_power_inverse_identity() {
        let bits = 256;
        for &(n, re, im) in &[(2u64, 2.5, 3.0), (7, 1.1, -20.0), (1000, 0.3, 50.0)] {
            let s = Complex::with_val(bits, (re, im));
            let ms = Complex::with_val(bits, -&s);
            let prod = neg_power(n, &s, bits) * neg_power(n, &ms, bits);
            assert!(close(&prod, &Complex::with_val(bits, 1), -70.0));
        }
    }

    #[test]
    fn precision_context_guard() {
        let ctx = PrecisionContext::new(50);
        assert_eq!(ctx.guard_digits(), 10);
        assert_eq!(ctx.working_digits(), 60);
        let planned = ctx.for_plan(99, 2, 3, 0);
        // 10 + ceil(log10 100) + ceil(log10 8)
        assert_eq!(planned.guard_digits(), 13);
        assert_eq!(planned.target_digits(), 50);
        assert!(ctx.bits() >= 200);
    }

    #[test]
    fn parse_complex_grammar() {
        let s = ComplexParameter::parse("2", 128).unwrap();
        assert_eq!(s.sigma(), 2.0);
        assert!(s.is_real());
        let s = ComplexParameter::parse("2.5+10i", 128).unwrap();
        assert_eq!((s.sigma(), s.t()), (2.5, 10.0));
        let s = ComplexParameter::parse("2-3.25i", 128).unwrap();
        assert_eq!((s.sigma(), s.t()), (2.0, -3.25));
        let s = ComplexParameter::parse("-0.5+1i", 128).unwrap();
        assert_eq!((s.sigma(), s.t()), (-0.5, 1.0));
        for bad in ["", "2+i", "1e3", "2+3", "abc", "2.+1i", "+2", "2+3ii", "2 + 3i"] {
            assert!(ComplexParameter::parse(bad, 128).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn literal_reparses_at_higher_precision() {
        let s = ComplexParameter::parse("0.1", 64).unwrap();
        let hi = s.at(512);
        let expect = Float::with_val(512, Float::parse("0.1").unwrap());
        assert_eq!(*hi.real(), expect);
    }

    #[test]
    fn convergence_half_plane() {
        let full = DigitSet::full(2).unwrap();
        assert!(ComplexParameter::real(2.0).check_convergence(&full).is_ok());
        assert!(matches!(
            ComplexParameter::real(1.0).check_convergence(&full),
            Err(Error::OnAbscissa { .. })
        ));
        assert!(matches!(
            ComplexParameter::from_f64(1.0, 5.0).check_convergence(&full),
            Err(Error::OnAbscissa { .. })
        ));
        assert!(matches!(
            ComplexParameter::real(0.9).check_convergence(&full),
            Err(Error::BelowAbscissa { .. })
        ));
        let half = DigitSet::new(4, [1, 3]).unwrap();
        assert!(matches!(
            ComplexParameter::parse("0.5", 64).unwrap().check_convergence(&half),
            Err(Error::OnAbscissa { .. })
        ));
        assert!(ComplexParameter::real(0.51).check_convergence(&half).is_ok());
        let no9 = DigitSet::new(10, 0..9).unwrap();
        assert!(ComplexParameter::real(1.0).check_convergence(&no9).is_ok());
        assert!(ComplexParameter::real(0.95).check_convergence(&no9).is_err());
        let single = DigitSet::new(10, [1]).unwrap();
        assert!(ComplexParameter::real(0.01).check_convergence(&single).is_ok());
    }

    #[test]
    fn pochhammer_ratio_real_is_one() {
        assert_eq!(pochhammer_ratio_bound(2.0, Complex64::new(2.0, 0.0)), 1.0);
        assert_eq!(pochhammer_ratio_bound(3.7, Complex64::new(3.7, 0.0)), 1.0);
    }

    #[test]
    fn pochhammer_ratio_matches_multiprecision_gamma() {
        // Gamma(3) / |Gamma(3 + 10i)| with a 30-digit Gamma
        let bits = digits_to_bits(30);
        let g = gamma_complex(&Complex::with_val(bits, (3, 10)), bits);
        let exact = 2.0 / abs(&g).to_f64();
        let est = pochhammer_ratio_bound(2.0, Complex64::new(2.0, 10.0));
        assert!(est >= exact);
        assert!((est - exact).abs() / exact < 1e-10, "{est} vs {exact}");
    }

    #[test]
    fn pochhammer_ratio_dominates_partial_products() {
        for &(sigma, t) in &[(1.5, 3.0), (2.0, 10.0), (3.0, 40.0), (1.1, 0.5)] {
            let s = Complex64::new(sigma, t);
            let bound = log10_pochhammer_ratio_bound(sigma, s);
            let mut prev = 0.0;
            for m in [1, 2, 5, 10, 50, 100, 250, 500] {
                let r = log10_pochhammer_ratio(s, m);
                assert!(r >= prev - 1e-12);
                assert!(r <= bound + 1e-12, "m={m} {r} > {bound}");
                prev = r;
            }
        }
    }

    #[test]
    fn gamma_complex_known_values() {
        let bits = digits_to_bits(40);
        // Gamma(5) = 24
        let g = gamma_complex(&Complex::with_val(bits, (5, 0)), bits);
        assert!(close(&g, &Complex::with_val(bits, 24), -35.0));
        // Gamma(1/2) = sqrt(pi)
        let g = gamma_complex(&Complex::with_val(bits, (0.5, 0)), bits);
        let sp = Float::with_val(bits, Constant::Pi).sqrt();
        assert!(close(&g, &Complex::with_val(bits, sp), -35.0));
        // |Gamma(1/2 + i t)|^2 = pi / cosh(pi t)
        let t = 7.5;
        let g = gamma_complex(&Complex::with_val(bits, (0.5, t)), bits);
        let lhs = Float::with_val(bits, g.norm_ref());
        let pi = Float::with_val(bits, Constant::Pi);
        let rhs = Float::with_val(bits, &pi / Float::with_val(bits, &pi * t).cosh());
        let rel = (Float::with_val(bits, &lhs - &rhs) / &rhs).abs();
        assert!(log10_abs(&rel) < -35.0);
        // against MPFR's real gamma
        let x = Float::with_val(bits, 3.3);
        let g = gamma_complex(&Complex::with_val(bits, (&x, 0)), bits);
        let r = Float::with_val(bits, x.gamma_ref());
        assert!(close(&g, &Complex::with_val(bits, r), -35.0));
    }

    #[test]
    fn ln_gamma_f64_matches_factorials() {
        let v = ln_gamma_f64(Complex64::new(11.0, 0.0)).re;
        assert!((v - 3628800f64.ln()).abs() < 1e-12);
        let v = ln_gamma_f64(Complex64::new(0.5, 0.0)).re;
        assert!((v - std::f64::consts::PI.sqrt().ln()).abs() < 1e-12);
    }
}
