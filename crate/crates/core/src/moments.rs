//! Moment tables for the word measure attached to a digit set.
//!
//! For `Re s > log_b N` the moments `u_m(s)` of the measure satisfy a linear
//! recurrence whose coefficients involve the digit power sums. The series for
//! the restricted Dirichlet sum uses the rescaled moments
//! `u*_m(s) = (s+1)_m / m! * u_m(s)`, which obey
//!
//! ```text
//! (b^(m+s) - N) u*_m = sum_{j=1..m} (s+m)(s+m-1)...(s+m-j+1)/j! * S_j * u*_(m-j)
//! ```
//!
//! Tables store `c_m = u*_m / u*_0`, so `c_0 = 1` and the mass
//! `u*_0 = b^s / (b^s - N)` is kept separately.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use rug::ops::Pow;
use rug::{Assign, Complex, Float, Integer, Rational};

use crate::digitset::DigitSet;
use crate::error::{Error, Result};
use crate::numerics::{
    self, int_pow, log10_pochhammer_ratio, log10_pochhammer_ratio_bound, BernoulliCache,
    ComplexParameter, PrecisionContext, MIN_GUARD_DIGITS,
};

/// Normalized rescaled moments `c_0..=c_M` for fixed `(b, A, s)`.
#[derive(Clone, Debug)]
pub struct MomentTable {
    digitset: DigitSet,
    s: Complex,
    bits: u32,
    b_pow_s: Complex,
    mass: Complex,
    power_sums: Vec<Float>,
    normalized: Vec<Complex>,
}

impl MomentTable {
    /// Builds `c_0..=c_M` at the working precision of `ctx`.
    pub fn build(
        ds: &DigitSet,
        s: &ComplexParameter,
        max_index: usize,
        ctx: &PrecisionContext,
    ) -> Result<Self> {
        s.check_convergence(ds)?;
        let required = MIN_GUARD_DIGITS + ((max_index + 1) as f64).log10().ceil() as u32;
        if ctx.guard_digits() < required {
            return Err(Error::InsufficientPrecision {
                required,
                available: ctx.guard_digits(),
            });
        }
        let bits = ctx.bits();
        let sv = s.at(bits);
        let b_pow_s = int_pow(ds.base(), &sv, bits);
        let denom = Complex::with_val(bits, &b_pow_s - ds.count());
        let mass = Complex::with_val(bits, &b_pow_s / &denom);
        let mut table = MomentTable {
            digitset: ds.clone(),
            s: sv,
            bits,
            b_pow_s,
            mass,
            power_sums: Vec::new(),
            normalized: vec![Complex::with_val(bits, 1)],
        };
        table.extend_to(max_index);
        Ok(table)
    }

    /// Extends the table in place up to index `max_index`.
    pub fn extend_to(&mut self, max_index: usize) {
        if max_index < self.normalized.len() {
            return;
        }
        if self.power_sums.len() <= max_index {
            self.power_sums = self
                .digitset
                .power_sums(max_index)
                .into_iter()
                .map(|x| Float::with_val(self.bits, x))
                .collect();
        }
        let start = self.normalized.len();
        let new = recurrence_steps(
            &self.s,
            &self.b_pow_s,
            self.digitset.base(),
            self.digitset.count(),
            &self.power_sums,
            &self.normalized,
            start..=max_index,
            self.bits,
        );
        self.normalized.extend(new);
    }

    pub fn digitset(&self) -> &DigitSet {
        &self.digitset
    }

    pub fn s(&self) -> &Complex {
        &self.s
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// Largest index held.
    pub fn max_index(&self) -> usize {
        self.normalized.len() - 1
    }

    /// `u*_0 = b^s / (b^s - N)`.
    pub fn mass(&self) -> &Complex {
        &self.mass
    }

    /// `c_m = u*_m / u*_0`.
    pub fn normalized(&self, m: usize) -> &Complex {
        &self.normalized[m]
    }

    pub fn normalized_all(&self) -> &[Complex] {
        &self.normalized
    }

    /// `u*_m = mass * c_m`.
    pub fn u_star(&self, m: usize) -> Complex {
        Complex::with_val(self.bits, &self.mass * &self.normalized[m])
    }

    /// `m! / (s+1)_m`.
    fn inverse_pochhammer(&self, m: usize) -> Complex {
        let mut f = Complex::with_val(self.bits, 1);
        for k in 1..=m {
            let sk = Complex::with_val(self.bits, &self.s + k as u32);
            f *= k as u32;
            f /= sk;
        }
        f
    }

    /// The plain moment `u_m(s) = m!/(s+1)_m * u*_m`.
    pub fn moment(&self, m: usize) -> Complex {
        self.inverse_pochhammer(m) * self.u_star(m)
    }

    /// `u_m(s) / u_0(s)`, which is invariant under `s -> s + 2 pi i / log b`
    /// and dominated in modulus by its value at `Re s`.
    pub fn plain_normalized(&self, m: usize) -> Complex {
        self.inverse_pochhammer(m) * &self.normalized[m]
    }
}

#[allow(clippy::too_many_arguments)]
fn recurrence_steps(
    s: &Complex,
    b_pow_s: &Complex,
    base: u32,
    count: u32,
    power_sums: &[Float],
    known: &[Complex],
    range: std::ops::RangeInclusive<usize>,
    bits: u32,
) -> Vec<Complex> {
    let mut out: Vec<Complex> = Vec::with_capacity(range.clone().count());
    let mut b_pow = Complex::with_val(bits, b_pow_s * Float::with_val(bits, base).pow(*range.start() as u32));
    let mut coef = Complex::new(bits);
    let mut term = Complex::new(bits);
    for m in range {
        let mut acc = Complex::with_val(bits, 0);
        coef.assign(1);
        for j in 1..=m {
            // (s+m)(s+m-1)...(s+m-j+1)/j!
            let factor = Complex::with_val(bits, s + (m - j + 1) as u32);
            coef *= factor;
            coef /= j as u32;
            term.assign(&coef * &power_sums[j]);
            let i = m - j;
            term *= if i < known.len() { &known[i] } else { &out[i - known.len()] };
            acc += &term;
        }
        let denom = Complex::with_val(bits, &b_pow - count);
        out.push(acc / denom);
        b_pow *= base;
    }
    out
}

/// The normalized recurrence started from `c_0 = 1` without any
/// convergence check. Meaningful wherever `b^(m+s) != N` for `m >= 1`,
/// e.g. at the pole `s = 1` of the full-digit mass.
pub fn normalized_recurrence(
    ds: &DigitSet,
    s: &Complex,
    max_index: usize,
    bits: u32,
) -> Vec<Complex> {
    let sv = Complex::with_val(bits, s);
    let b_pow_s = int_pow(ds.base(), &sv, bits);
    let sums: Vec<Float> = ds
        .power_sums(max_index)
        .into_iter()
        .map(|x| Float::with_val(bits, x))
        .collect();
    let first = vec![Complex::with_val(bits, 1)];
    let mut out = first.clone();
    if max_index >= 1 {
        out.extend(recurrence_steps(
            &sv,
            &b_pow_s,
            ds.base(),
            ds.count(),
            &sums,
            &first,
            1..=max_index,
            bits,
        ));
    }
    out
}

/// The normalized recurrence in exact rational arithmetic for a
/// nonnegative integer `s`.
pub fn exact_normalized_recurrence(ds: &DigitSet, s: u32, max_index: usize) -> Result<Vec<Rational>> {
    let sums = ds.power_sums(max_index);
    let b = Integer::from(ds.base());
    let mut out = vec![Rational::from(1)];
    for m in 1..=max_index {
        let mut acc = Rational::new();
        let mut coef = Rational::from(1);
        for j in 1..=m {
            coef *= Integer::from(s as usize + m - j + 1);
            coef /= Integer::from(j);
            acc += Rational::from(&coef * &sums[j]) * &out[m - j];
        }
        let denom = Integer::from(b.clone().pow(s + m as u32)) - ds.count();
        if denom == 0 {
            return Err(Error::InvalidArgument(format!(
                "b^(m+s) = N at m = {m}; the recurrence is singular"
            )));
        }
        out.push(acc / denom);
    }
    Ok(out)
}

/// Shared tables keyed by `(b, A, s, precision)`, reused across levels.
#[derive(Debug, Default)]
pub struct MomentCache {
    tables: Mutex<HashMap<(DigitSet, String, u32), Arc<MomentTable>>>,
}

impl MomentCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get_or_build(
        &self,
        ds: &DigitSet,
        s: &ComplexParameter,
        max_index: usize,
        ctx: &PrecisionContext,
    ) -> Result<Arc<MomentTable>> {
        let key = (
            ds.clone(),
            s.at(ctx.bits()).to_string_radix(16, None),
            ctx.bits(),
        );
        let mut tables = self.tables.lock().expect("poisoned");
        if let Some(t) = tables.get(&key) {
            if t.max_index() >= max_index {
                return Ok(Arc::clone(t));
            }
        }
        let table = match tables.get(&key) {
            Some(t) => {
                let mut t = (**t).clone();
                t.extend_to(max_index);
                t
            }
            None => MomentTable::build(ds, s, max_index, ctx)?,
        };
        let table = Arc::new(table);
        tables.insert(key, Arc::clone(&table));
        Ok(table)
    }

    pub fn len(&self) -> usize {
        self.tables.lock().expect("poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn closed_form_terms(
    ds: &DigitSet,
    s: &ComplexParameter,
    m: usize,
    cache: &BernoulliCache,
    bits: u32,
) -> Result<Vec<Complex>> {
    if !ds.is_full() {
        return Err(Error::NotFullDigitSet);
    }
    s.check_convergence(ds)?;
    let b = ds.base();
    let sv = s.at(bits);
    let bs = int_pow(b, &sv, bits);
    // g(k) = b^(s+k) / (b^(s+k) - b)
    let g = |k: u32| -> Complex {
        let p = Complex::with_val(bits, &bs * Float::with_val(bits, b).pow(k));
        let d = Complex::with_val(bits, &p - b);
        p / d
    };
    if m == 0 {
        return Ok(vec![g(0)]);
    }
    let mut terms = vec![g(0) / (m as u32 + 1), -g(1) / 2u32];
    for k in 1..=m / 2 {
        let falling = Integer::from(Integer::factorial(m as u32))
            / Integer::from(Integer::factorial((m - 2 * k + 1) as u32));
        let coeff = cache.bernoulli(2 * k) * falling
            / Integer::from(Integer::factorial(2 * k as u32));
        terms.push(g(2 * k as u32) * Float::with_val(bits, &coeff));
    }
    Ok(terms)
}

/// `u_m(s)` for the full digit set from its Bernoulli-number expansion.
///
/// Severe cancellation between summands; evaluate at full working precision.
pub fn moment_closed_form(
    ds: &DigitSet,
    s: &ComplexParameter,
    m: usize,
    cache: &BernoulliCache,
    ctx: &PrecisionContext,
) -> Result<Complex> {
    let bits = ctx.bits();
    let terms = closed_form_terms(ds, s, m, cache, bits)?;
    Ok(terms
        .into_iter()
        .fold(Complex::with_val(bits, 0), |acc, t| acc + t))
}

/// `max |summand| / |u_m(s)|` for the closed form: how many digits the
/// expansion cancels away.
pub fn closed_form_cancellation(
    ds: &DigitSet,
    s: &ComplexParameter,
    m: usize,
    cache: &BernoulliCache,
    ctx: &PrecisionContext,
) -> Result<f64> {
    let bits = ctx.bits();
    let terms = closed_form_terms(ds, s, m, cache, bits)?;
    let mut total = Complex::with_val(bits, 0);
    let mut largest = Float::with_val(bits, 0);
    for t in &terms {
        total += t;
        largest.max_mut(&numerics::abs(t));
    }
    let ratio = largest / numerics::abs(&total);
    Ok(ratio.to_f64())
}

fn require_bound_domain(ds: &DigitSet, s: &ComplexParameter) -> Result<()> {
    s.check_convergence(ds)
}

/// `log10` of `b^sigma / |b^s - N|`.
fn log10_mass_bound(ds: &DigitSet, s: Complex64) -> f64 {
    let b = ds.base() as f64;
    let n = ds.count() as f64;
    let bs = Complex64::new(b.ln() * s.re, b.ln() * s.im).exp();
    s.re * b.log10() - (bs - n).norm().log10()
}

/// `log10` of an upper bound for `|u*_m(s)|` valid for every
/// `Re s > log_b N`. Used for term planning.
///
/// For `sigma >= 1` this is the Pochhammer-ratio bound times `lambda^m`;
/// below that it falls back to `|(s+1)_m|/m! * lambda^m * b^sigma/|b^s - N|`,
/// which uses only `x(w) < lambda` on admissible words.
pub fn log10_u_star_bound(ds: &DigitSet, s: Complex64, m: usize) -> f64 {
    let lam = ds.lambda_f64().log10();
    // slack for double-precision rounding of the estimate itself
    let base = log10_mass_bound(ds, s) + m as f64 * lam + 1e-12;
    if s.re >= 1.0 {
        let direct = log10_pochhammer_ratio(s, m);
        let gamma = log10_pochhammer_ratio_bound(s.re, s);
        base + direct.min(gamma)
    } else {
        let growth: f64 = (1..=m)
            .map(|k| {
                let k = k as f64;
                0.5 * ((s.re + 1.0 + k - 1.0).powi(2) + s.im * s.im).log10() - k.log10()
            })
            .sum();
        base + growth
    }
}

/// Upper bound for `|u*_m(s)|`.
///
/// For `sigma >= 1` the minimum of the Gamma-ratio bound and the direct
/// Pochhammer ratio, both times `lambda^m b^sigma / |b^s - N|`. For
/// `sigma < 1` the bound is built from a real-parameter table:
/// `|(s+1)_m|/(sigma+1)_m * (b^sigma - N)/|b^s - N| * u*_m(sigma)`.
pub fn bound_u_star(ds: &DigitSet, s: &ComplexParameter, m: usize) -> Result<f64> {
    require_bound_domain(ds, s)?;
    let sc = numerics::to_c64(s.value());
    if sc.re >= 1.0 {
        return Ok(10f64.powf(log10_u_star_bound(ds, sc, m)) * (1.0 + 1e-12));
    }
    let ctx = PrecisionContext::with_guard(30, MIN_GUARD_DIGITS + 4);
    let real = s.real_part();
    let table = MomentTable::build(ds, &real, m, &ctx)?;
    let u_sigma = table.u_star(m).real().to_f64();
    let bits = ctx.bits();
    let sigma = Float::with_val(bits, s.at(bits).real());
    let b = Float::with_val(bits, ds.base());
    let b_sigma = Float::with_val(bits, b.pow(&sigma));
    let bs = int_pow(ds.base(), &s.at(bits), bits);
    let ratio = Float::with_val(bits, &b_sigma - ds.count()) / numerics::abs(&(bs - ds.count()));
    let poch = 10f64.powf(log10_pochhammer_ratio(sc, m));
    Ok(poch * ratio.to_f64() * u_sigma * (1.0 + 1e-12))
}

/// Strict lower bound `lambda^m / (b^sigma - N)` for `u*_m(sigma)`, real `sigma`.
pub fn lower_bound_u_star(ds: &DigitSet, sigma: f64, m: usize) -> Result<f64> {
    ComplexParameter::real(sigma).check_convergence(ds)?;
    let denom = (ds.base() as f64).powf(sigma) - ds.count() as f64;
    Ok(ds.lambda_f64().powi(m as i32) / denom * (1.0 - 1e-12))
}
