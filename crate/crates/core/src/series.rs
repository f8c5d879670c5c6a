//! The restricted Dirichlet series `K_{b,A}(s)` (and `zeta(s)` for the full
//! digit set) as a geometrically convergent series over moments.
//!
//! With a level `l`, admissible integers below `b^(l-1)` are summed directly
//! and every longer admissible integer is grouped by its first `l` digits:
//!
//! ```text
//! K = sum'_{0<n<b^(l-1)} n^-s + u*_0 P_0 + sum_{m>=1} (-1)^m s/(s+m) u*_m P_m,
//! P_m = sum'_{b^(l-1) <= n < b^l} n^-(s+m).
//! ```
//!
//! For real `s` consecutive partial sums (after the head and mass terms)
//! bracket the value.

use std::time::{Duration, Instant};

use num_complex::Complex64;
use rayon::prelude::*;
use rug::{Complex, Float};

use crate::digitset::DigitSet;
use crate::error::{Error, Result};
use crate::moments::{self, MomentCache, MomentTable};
use crate::numerics::{self, log10_abs, neg_power, ComplexParameter, PrecisionContext};

/// Integers per parallel work unit. Fixed so that the summation order, and
/// therefore every rounded result, does not depend on the thread count.
const CHUNK: usize = 64;

/// Default number of terms a caller may plan before the evaluation is
/// declared unattainable.
pub const DEFAULT_MAX_TERMS: usize = 100_000;

/// Default level: 3 for bases 2 and 3, 2 otherwise.
pub fn default_level(base: u32) -> u32 {
    if base <= 3 {
        3
    } else {
        2
    }
}

/// Level preconditions. Level 1 is accepted only when the series is
/// geometrically convergent, i.e. unless both 1 and `b-1` are admissible.
pub fn check_level(ds: &DigitSet, level: u32) -> Result<()> {
    if level == 0 {
        return Err(Error::InvalidLevel);
    }
    if level == 1 && ds.contains(1) && ds.contains(ds.base() - 1) {
        return Err(Error::SemiConvergent);
    }
    (ds.base() as u64)
        .checked_pow(level)
        .ok_or(Error::LevelTooDeep {
            base: ds.base(),
            level,
        })?;
    Ok(())
}

/// A-priori term plan from the geometric bound model.
///
/// Term `m` is bounded by `|u*_m| * count * n_min^-(sigma+m)`, where
/// `n_min` is the smallest integer of the block; with `|u*_m| <= C lambda^m`
/// this is geometric with ratio `lambda / n_min` (`b^(1-l)` for the full
/// digit set).
#[derive(Clone, Debug)]
pub struct TermPlan {
    /// Planned number of moment terms `M`.
    pub terms: usize,
    /// Geometric ratio of the per-term bound.
    pub ratio: f64,
    /// `log10` of the per-term prefactor `C count n_min^-sigma`.
    pub log10_prefactor: f64,
    /// `log10` of the predicted remainder after `M` terms.
    pub log10_tail: f64,
    /// `log10` of the largest predicted term, a measure of cancellation.
    pub log10_peak_term: f64,
    ds: DigitSet,
    s: Complex64,
    n_min: u64,
    count: u64,
}

impl TermPlan {
    fn log10_block(&self, m: usize) -> f64 {
        (self.count as f64).log10() - (self.s.re + m as f64) * (self.n_min as f64).log10()
    }

    /// `log10` bound for `|term_m|`, using the tightest available moment bound.
    pub fn log10_term_bound(&self, m: usize) -> f64 {
        moments::log10_u_star_bound(&self.ds, self.s, m) + self.log10_block(m)
    }

    /// `log10` bound for the remainder `sum_{k>m} |term_k|`.
    pub fn log10_tail_after(&self, m: usize) -> f64 {
        tail_after(&self.ds, self.s, self.n_min, self.count, m)
    }
}

fn tail_after(ds: &DigitSet, s: Complex64, n_min: u64, count: u64, m: usize) -> f64 {
    let log_n = (n_min as f64).log10();
    let block = |k: usize| (count as f64).log10() - (s.re + k as f64) * log_n;
    let rho = ds.lambda_f64() / n_min as f64;
    if s.re >= 1.0 {
        // |u*_k| <= G lambda^k b^sigma / |b^s - N| for every k
        let gamma = numerics::log10_pochhammer_ratio_bound(s.re, s);
        let c = moments::log10_u_star_bound(ds, Complex64::new(s.re, 0.0), 0) + gamma;
        let lam = ds.lambda_f64().log10();
        let first = c + (m + 1) as f64 * lam + block(m + 1);
        first - (1.0 - rho).log10()
    } else {
        // successive bounds shrink by rho |s + k + 1| / (k + 1), decreasing in k
        let k = m + 1;
        let q = rho * Complex64::new(s.re + k as f64 + 1.0, s.im).norm() / (k as f64 + 1.0);
        if q >= 1.0 {
            return f64::INFINITY;
        }
        moments::log10_u_star_bound(ds, s, k) + block(k) - (1.0 - q).log10()
    }
}

fn block_extent(ds: &DigitSet, level: u32) -> Result<(u64, u64)> {
    let mut block = ds.admissible_in_block(level)?;
    let n_min = block.next().expect("blocks are never empty");
    Ok((n_min, ds.block_len(level)))
}

/// Plans the number of terms for an absolute accuracy `10^log10_eps`.
pub fn plan_terms_log10(
    ds: &DigitSet,
    s: &ComplexParameter,
    level: u32,
    log10_eps: f64,
    max_terms: usize,
) -> Result<TermPlan> {
    if !log10_eps.is_finite() {
        return Err(Error::InvalidTolerance);
    }
    s.check_convergence(ds)?;
    check_level(ds, level)?;
    let (n_min, count) = block_extent(ds, level)?;
    let sc = numerics::to_c64(s.value());
    let mut m = 0;
    loop {
        if tail_after(ds, sc, n_min, count, m) <= log10_eps {
            break;
        }
        if m > max_terms {
            return Err(Error::TermCapExceeded {
                planned: m,
                cap: max_terms,
            });
        }
        m += 1;
    }
    let gamma = if sc.re >= 1.0 {
        numerics::log10_pochhammer_ratio_bound(sc.re, sc)
    } else {
        0.0
    };
    let mut plan = TermPlan {
        terms: m,
        ratio: ds.lambda_f64() / n_min as f64,
        log10_prefactor: moments::log10_u_star_bound(ds, Complex64::new(sc.re, 0.0), 0)
            + gamma
            + (count as f64).log10()
            - sc.re * (n_min as f64).log10(),
        log10_tail: tail_after(ds, sc, n_min, count, m),
        log10_peak_term: f64::NEG_INFINITY,
        ds: ds.clone(),
        s: sc,
        n_min,
        count,
    };
    plan.log10_peak_term = (1..=m.max(1))
        .map(|k| plan.log10_term_bound(k))
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(plan)
}

/// Plans the number of terms for an absolute accuracy `eps > 0`.
pub fn plan_terms(ds: &DigitSet, s: &ComplexParameter, level: u32, eps: f64) -> Result<TermPlan> {
    if eps.is_nan() || eps <= 0.0 || !eps.is_finite() {
        return Err(Error::InvalidTolerance);
    }
    plan_terms_log10(ds, s, level, eps.log10(), DEFAULT_MAX_TERMS)
}

/// `sum_{n in ns} n^-s`, summed in fixed chunks for reproducibility.
pub fn sum_neg_powers(ns: &[u64], s: &Complex, bits: u32) -> Complex {
    let partial: Vec<Complex> = ns
        .par_chunks(CHUNK)
        .map(|chunk| {
            chunk.iter().fold(Complex::with_val(bits, 0), |acc, &n| {
                acc + neg_power(n, s, bits)
            })
        })
        .collect();
    partial
        .into_iter()
        .fold(Complex::with_val(bits, 0), |acc, p| acc + p)
}

/// `P_m = sum_{n in block} n^-(s+m)` for `m = 0..=max_m`.
pub fn block_power_sums(block: &[u64], s: &Complex, max_m: usize, bits: u32) -> Vec<Complex> {
    let partial: Vec<Vec<Complex>> = block
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut sums = vec![Complex::with_val(bits, 0); max_m + 1];
            for &n in chunk {
                let inv = Float::with_val(bits, n).recip();
                let mut p = neg_power(n, s, bits);
                for (m, acc) in sums.iter_mut().enumerate() {
                    *acc += &p;
                    if m < max_m {
                        p *= &inv;
                    }
                }
            }
            sums
        })
        .collect();
    let mut out = vec![Complex::with_val(bits, 0); max_m + 1];
    for chunk in partial {
        for (o, c) in out.iter_mut().zip(chunk) {
            *o += c;
        }
    }
    out
}

/// The pieces of the series up to a fixed number of terms.
#[derive(Clone, Debug)]
pub struct SeriesTerms {
    /// Direct sum over admissible `n < b^(l-1)`.
    pub head: Complex,
    /// `u*_0 P_0`.
    pub leading: Complex,
    /// `terms[m-1] = (-1)^m s/(s+m) u*_m P_m` for `m = 1..=M`.
    pub terms: Vec<Complex>,
}

impl SeriesTerms {
    /// `S_0 = head + leading`, then `S_k = S_(k-1) + term_k`.
    pub fn partial_sums(&self) -> Vec<Complex> {
        let mut acc = Complex::with_val(self.head.prec(), &self.head + &self.leading);
        let mut out = vec![acc.clone()];
        for t in &self.terms {
            acc += t;
            out.push(acc.clone());
        }
        out
    }
}

/// Computes head, leading term and the first `max_m` series terms from a
/// moment table (which must hold at least `max_m` entries).
pub fn expand_with_table(
    table: &MomentTable,
    level: u32,
    max_m: usize,
) -> Result<SeriesTerms> {
    let ds = table.digitset();
    check_level(ds, level)?;
    let bits = table.bits();
    let s = table.s();
    let head_ns: Vec<u64> = ds.admissible_below(level)?.collect();
    let block: Vec<u64> = ds.admissible_in_block(level)?.collect();
    let head = sum_neg_powers(&head_ns, s, bits);
    let sums = block_power_sums(&block, s, max_m, bits);
    let leading = Complex::with_val(bits, table.mass() * &sums[0]);
    let mut terms = Vec::with_capacity(max_m);
    for (m, p) in sums.iter().enumerate().skip(1) {
        let ratio = Complex::with_val(bits, s / Complex::with_val(bits, s + m as u32));
        let mut t = table.u_star(m) * ratio * p;
        if m % 2 == 1 {
            t = -t;
        }
        terms.push(t);
    }
    Ok(SeriesTerms {
        head,
        leading,
        terms,
    })
}

/// Builds the moment table and expands the series to `max_m` terms.
pub fn expand_series(
    ds: &DigitSet,
    s: &ComplexParameter,
    level: u32,
    max_m: usize,
    ctx: &PrecisionContext,
) -> Result<SeriesTerms> {
    check_level(ds, level)?;
    let ctx = ctx.for_plan(max_m, ds.base(), level, 0);
    let table = MomentTable::build(ds, s, max_m, &ctx)?;
    expand_with_table(&table, level, max_m)
}

/// Value, rigorous error bound and bookkeeping of one evaluation.
#[derive(Clone, Debug)]
pub struct SeriesResult {
    pub value: Complex,
    /// Tail bound plus rounding allowance.
    pub error_bound: Float,
    pub terms_used: usize,
    pub planned_terms: usize,
    pub level: u32,
    /// Enclosure of the value for real `s`.
    pub bracket: Option<(Float, Float)>,
    pub working_digits: u32,
    pub elapsed: Duration,
}

/// Evaluation knobs.
#[derive(Clone, Copy, Debug)]
pub struct SeriesOptions {
    pub max_terms: usize,
    /// Stop once three consecutive terms fall below `eps/4`, provided the
    /// truncation is then still rigorously bounded by `eps`.
    pub early_exit: bool,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        SeriesOptions {
            max_terms: DEFAULT_MAX_TERMS,
            early_exit: true,
        }
    }
}

/// Evaluates `K_{b,A}(s)` to the target precision of `ctx`.
pub fn evaluate_series(
    ds: &DigitSet,
    s: &ComplexParameter,
    level: u32,
    ctx: &PrecisionContext,
) -> Result<SeriesResult> {
    evaluate_series_with(ds, s, level, ctx, &SeriesOptions::default(), None)
}

/// [`evaluate_series`] with explicit options and an optional table cache.
pub fn evaluate_series_with(
    ds: &DigitSet,
    s: &ComplexParameter,
    level: u32,
    ctx: &PrecisionContext,
    opts: &SeriesOptions,
    cache: Option<&MomentCache>,
) -> Result<SeriesResult> {
    let start = Instant::now();
    s.check_convergence(ds)?;
    check_level(ds, level)?;
    let log10_eps = ctx.log10_eps();
    let plan = plan_terms_log10(ds, s, level, log10_eps, opts.max_terms)?;
    if plan.terms > opts.max_terms {
        return Err(Error::TermCapExceeded {
            planned: plan.terms,
            cap: opts.max_terms,
        });
    }
    let sc = numerics::to_c64(s.value());
    let mass_scale = moments::log10_u_star_bound(ds, Complex64::new(sc.re, 0.0), 0)
        + plan.log10_block(0);
    let log10_scale = plan.log10_peak_term.max(mass_scale).max(0.0);
    let extra = log10_scale.ceil() as u32;
    let ctx = ctx.for_plan(plan.terms, ds.base(), level, extra);
    let bits = ctx.bits();

    let table = match cache {
        Some(c) => c.get_or_build(ds, s, plan.terms, &ctx)?,
        None => std::sync::Arc::new(MomentTable::build(ds, s, plan.terms, &ctx)?),
    };
    let expansion = expand_with_table(&table, level, plan.terms)?;

    let head_len = ds.admissible_below(level)?.count() as f64;
    let ops = (plan.terms as f64 + 1.0) * (plan.count as f64 + head_len + 1.0);
    let log10_rounding = -(ctx.working_digits() as f64) + ops.log10() + log10_scale + 1.0;

    let quarter_eps = log10_eps - 4f64.log10();
    let mut value = Complex::with_val(bits, &expansion.head + &expansion.leading);
    let mut previous = value.clone();
    let mut used = 0;
    let mut small_run = 0;
    let mut alternating_bound = None;
    for (i, term) in expansion.terms.iter().enumerate() {
        let m = i + 1;
        previous.assign_from(&value);
        value += term;
        used = m;
        let mag = log10_abs(&numerics::abs(term));
        small_run = if mag < quarter_eps { small_run + 1 } else { 0 };
        if s.is_real() {
            alternating_bound = Some(mag);
        }
        if opts.early_exit && small_run >= 3 {
            let rigorous = if s.is_real() {
                mag
            } else {
                plan.log10_tail_after(m)
            };
            if rigorous <= log10_eps {
                break;
            }
        }
    }
    let log10_tail = if used == plan.terms {
        plan.log10_tail
    } else {
        plan.log10_tail_after(used)
    };
    let log10_trunc = match alternating_bound {
        Some(a) => a.min(log10_tail),
        None => log10_tail,
    };
    let error_bound = pow10_up(log10_trunc) + pow10_up(log10_rounding);

    let bracket = if s.is_real() {
        let v = value.real().clone();
        let round = pow10_up(log10_rounding);
        let (lo, hi) = if used == 0 {
            (v.clone(), v.clone())
        } else {
            let p = previous.real().clone();
            if p < v {
                (p, v.clone())
            } else {
                (v.clone(), p)
            }
        };
        let lo_tail = Float::with_val(bits, &v - &error_bound);
        let hi_tail = Float::with_val(bits, &v + &error_bound);
        let lo = Float::with_val(bits, lo.max(&lo_tail) - &round);
        let hi = Float::with_val(bits, hi.min(&hi_tail) + &round);
        Some((lo, hi))
    } else {
        None
    };

    Ok(SeriesResult {
        value,
        error_bound,
        terms_used: used,
        planned_terms: plan.terms,
        level,
        bracket,
        working_digits: ctx.working_digits(),
        elapsed: start.elapsed(),
    })
}

trait AssignFrom {
    fn assign_from(&mut self, other: &Self);
}

impl AssignFrom for Complex {
    fn assign_from(&mut self, other: &Complex) {
        use rug::Assign;
        self.assign(other);
    }
}

/// `10^x` rounded up, at 64 bits.
fn pow10_up(x: f64) -> Float {
    if x == f64::NEG_INFINITY {
        return Float::new(64);
    }
    let e = Float::with_val(64, x) * Float::with_val(64, 10).ln();
    let v = e.exp();
    v * Float::with_val(64, 1.0 + 1e-15)
}

/// Truncated limit identity at `s = 1`, `b = 2`:
/// `sum_{m=0..=M} (-1)^m c_m/(m+1) sum_{2^(l-1) <= n < 2^l} n^-(m+1)`, with
/// `c_m` taken from the normalized recurrence at `s = 1` (identically 1).
/// Tends to `log 2`.
pub fn limit_identity_log2(level: u32, max_m: usize, ctx: &PrecisionContext) -> Result<Float> {
    if level < 2 {
        return Err(Error::InvalidLevel);
    }
    let ds = DigitSet::full(2)?;
    let bits = ctx.bits();
    let one = Complex::with_val(bits, 1);
    let c = moments::normalized_recurrence(&ds, &one, max_m, bits);
    let block: Vec<u64> = ds.admissible_in_block(level)?.collect();
    let sums = block_power_sums(&block, &one, max_m, bits);
    let mut acc = Float::with_val(bits, 0);
    for (m, (cm, p)) in c.iter().zip(&sums).enumerate() {
        let mut t = Float::with_val(bits, cm.real() * p.real()) / (m as u32 + 1);
        if m % 2 == 1 {
            t = -t;
        }
        acc += t;
    }
    Ok(acc)
}
