//! Invariant families run by `rzeta check`.

use clap::ValueEnum;
use rug::float::Constant;
use rug::ops::Pow;
use rug::{Complex, Float};

use rzeta::mgf::{evaluate_f, functional_equation_residual, taylor_moments};
use rzeta::moments::{bound_u_star, exact_normalized_recurrence, moment_closed_form};
use rzeta::numerics::{abs, log10_abs, log10_pochhammer_ratio_bound, to_c64};
use rzeta::series::{expand_series, limit_identity_log2};
use rzeta::{
    evaluate_series, parse_digit_spec, restricted_sum_bracket, zeta_reference, BernoulliCache,
    ComplexParameter, DigitSet, MomentTable, PrecisionContext, Result,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Family {
    All,
    Bounds,
    Exact,
    Log2,
    Oracle,
    Levels,
    Bracket,
    ClosedForm,
    Mgf,
}

impl Family {
    fn members() -> [Family; 8] {
        [
            Family::Bounds,
            Family::Exact,
            Family::Log2,
            Family::Oracle,
            Family::Levels,
            Family::Bracket,
            Family::ClosedForm,
            Family::Mgf,
        ]
    }

    fn name(self) -> &'static str {
        match self {
            Family::All => "all",
            Family::Bounds => "bounds",
            Family::Exact => "exact",
            Family::Log2 => "log2",
            Family::Oracle => "oracle",
            Family::Levels => "levels",
            Family::Bracket => "bracket",
            Family::ClosedForm => "closed-form",
            Family::Mgf => "mgf",
        }
    }
}

/// Outcome of one invariant family; `failure` names the offending
/// `(digit set, s, m)` when there is one.
pub struct FamilyReport {
    pub family: &'static str,
    pub checked: usize,
    pub failure: Option<String>,
}

pub struct Grid {
    pub sigma: Option<f64>,
    pub t: Option<f64>,
}

pub fn run(family: Family, grid: &Grid) -> Result<Vec<FamilyReport>> {
    let families: Vec<Family> = match family {
        Family::All => Family::members().to_vec(),
        f => vec![f],
    };
    families
        .into_iter()
        .map(|f| {
            let (checked, failure) = match f {
                Family::Bounds => bounds(grid)?,
                Family::Exact => exact()?,
                Family::Log2 => log2()?,
                Family::Oracle => oracle(grid)?,
                Family::Levels => levels(grid)?,
                Family::Bracket => bracket(grid)?,
                Family::ClosedForm => closed_form()?,
                Family::Mgf => mgf(grid)?,
                Family::All => unreachable!(),
            };
            Ok(FamilyReport {
                family: f.name(),
                checked,
                failure,
            })
        })
        .collect()
}

type Outcome = Result<(usize, Option<String>)>;

fn sigmas(grid: &Grid, default: &[f64]) -> Vec<f64> {
    grid.sigma.map_or_else(|| default.to_vec(), |s| vec![s])
}

fn ts(grid: &Grid, default: &[f64]) -> Vec<f64> {
    grid.t.map_or_else(|| default.to_vec(), |t| vec![t])
}

fn diff(a: &Complex, b: &Complex) -> Float {
    abs(&Complex::with_val(a.prec().0.max(b.prec().0), a - b))
}

fn restricted_sets() -> Vec<DigitSet> {
    vec![
        DigitSet::full(2).unwrap(),
        DigitSet::full(10).unwrap(),
        parse_digit_spec("0-8", 10).unwrap(),
        parse_digit_spec("1,3,4", 7).unwrap(),
    ]
}

/// Uniform sandwich on the full set, a-priori upper bound and domination of
/// the plain normalized moments at complex `s`.
fn bounds(grid: &Grid) -> Outcome {
    let mut checked = 0;
    let max_m = 100;
    for b in [2u32, 10] {
        let ds = DigitSet::full(b)?;
        for sigma in sigmas(grid, &[1.1, 2.0, 3.0, 5.0]) {
            if sigma <= 1.0 {
                continue;
            }
            let s = ComplexParameter::real(sigma);
            let ctx = PrecisionContext::with_guard(30, 16);
            let bits = ctx.bits();
            let table = MomentTable::build(&ds, &s, max_m, &ctx)?;
            let b_sigma = Float::with_val(bits, Float::with_val(bits, b).pow(sigma));
            let gap = Float::with_val(bits, &b_sigma - b);
            let lower = Float::with_val(bits, gap.recip_ref());
            let slack = Float::with_val(bits, 1e-25) + 1u32;
            let upper = Float::with_val(bits, &b_sigma / &gap) * slack;
            for m in 0..=max_m {
                let u = table.u_star(m).real().clone();
                if !(u > lower && u <= upper) {
                    return Ok((checked, Some(format!("sandwich: ({ds}, s={sigma}, m={m})"))));
                }
                checked += 1;
            }
        }
    }
    for ds in restricted_sets() {
        for sigma in sigmas(grid, &[2.0, 3.5]) {
            for t in ts(grid, &[0.0, 10.0, -25.0]) {
                let s = ComplexParameter::from_f64(sigma, t);
                if s.check_convergence(&ds).is_err() {
                    continue;
                }
                let g = log10_pochhammer_ratio_bound(sigma.max(1.0), to_c64(s.value()));
                let ctx = PrecisionContext::with_guard(20, 20 + g.max(0.0).ceil() as u32);
                let at_s = MomentTable::build(&ds, &s, max_m, &ctx)?;
                let at_sigma = MomentTable::build(&ds, &s.real_part(), max_m, &ctx)?;
                for m in 0..=max_m {
                    let lhs = abs(&at_s.plain_normalized(m));
                    let rhs = at_sigma.plain_normalized(m).real().clone() * (1.0 + 1e-15);
                    let star = abs(&at_s.u_star(m)).to_f64();
                    if lhs > rhs || star > bound_u_star(&ds, &s, m)? {
                        return Ok((checked, Some(format!("domination: ({ds}, s={sigma}+{t}i, m={m})"))));
                    }
                    checked += 1;
                }
            }
        }
    }
    Ok((checked, None))
}

fn exact() -> Outcome {
    let c = exact_normalized_recurrence(&DigitSet::full(2)?, 1, 50)?;
    Ok(match c.iter().position(|x| *x != 1) {
        None => (c.len(), None),
        Some(m) => (m, Some(format!("constant sequence: (b=2 A=all, s=1, m={m})"))),
    })
}

fn log2() -> Outcome {
    let ctx = PrecisionContext::new(40);
    let v = limit_identity_log2(2, 120, &ctx)?;
    let ln2 = Float::with_val(ctx.bits(), Constant::Log2);
    let d = Float::with_val(ctx.bits(), &v - &ln2).abs();
    if log10_abs(&d) < -30.0 {
        Ok((1, None))
    } else {
        Ok((1, Some(format!("log 2 identity off by {:.3e}", d.to_f64()))))
    }
}

fn oracle(grid: &Grid) -> Outcome {
    let ctx = PrecisionContext::new(30);
    let mut checked = 0;
    for b in [2u32, 3, 10] {
        let ds = DigitSet::full(b)?;
        for sigma in sigmas(grid, &[1.5, 3.0]) {
            for t in ts(grid, &[0.0, 7.0]) {
                let s = ComplexParameter::from_f64(sigma, t);
                let level = if b <= 3 { 3 } else { 2 };
                let r = evaluate_series(&ds, &s, level, &ctx)?;
                let z = zeta_reference(&s, 40)?;
                let allowed = Float::with_val(64, &r.error_bound + 1e-39);
                if diff(&r.value, &z) > allowed {
                    return Ok((checked, Some(format!("oracle: ({ds}, s={sigma}+{t}i, m={})", r.terms_used))));
                }
                checked += 1;
            }
        }
    }
    Ok((checked, None))
}

fn levels(grid: &Grid) -> Outcome {
    let ctx = PrecisionContext::new(30);
    let mut checked = 0;
    for ds in restricted_sets() {
        for sigma in sigmas(grid, &[2.5]) {
            for t in ts(grid, &[0.0, 4.0]) {
                let s = ComplexParameter::from_f64(sigma, t);
                if s.check_convergence(&ds).is_err() {
                    continue;
                }
                let top = if ds.base() <= 3 { 5 } else { 3 };
                let results = (2..=top)
                    .map(|l| evaluate_series(&ds, &s, l, &ctx))
                    .collect::<Result<Vec<_>>>()?;
                for a in &results {
                    for b in &results {
                        let bound = Float::with_val(64, &a.error_bound + &b.error_bound);
                        if diff(&a.value, &b.value) > bound {
                            return Ok((checked, Some(format!(
                                "levels {} vs {}: ({ds}, s={sigma}+{t}i, m={})",
                                a.level, b.level, a.terms_used
                            ))));
                        }
                        checked += 1;
                    }
                }
            }
        }
    }
    Ok((checked, None))
}

fn bracket(grid: &Grid) -> Outcome {
    let mut checked = 0;
    for ds in restricted_sets() {
        for sigma in sigmas(grid, &[1.5, 2.0, 3.0, 6.0]) {
            let s = ComplexParameter::real(sigma);
            if s.check_convergence(&ds).is_err() {
                continue;
            }
            let truth = evaluate_series(&ds, &s, 3, &PrecisionContext::new(50))?.value;
            let v = truth.real();
            for level in 2..=3 {
                let ex = expand_series(&ds, &s, level, 30, &PrecisionContext::new(45))?;
                let sums = ex.partial_sums();
                for k in 0..ex.terms.len() {
                    if log10_abs(&abs(&ex.terms[k])) < -40.0 {
                        break;
                    }
                    let (a, b) = (sums[k].real(), sums[k + 1].real());
                    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                    if !(lo <= v && v <= hi) {
                        return Ok((checked, Some(format!("alternation: ({ds}, s={sigma}, m={})", k + 1))));
                    }
                    checked += 1;
                }
            }
            let depth = if ds.base() >= 7 { 4 } else { 12 };
            let enclosure = restricted_sum_bracket(&ds, &s, depth, 128)?;
            if !enclosure.contains(v) {
                return Ok((checked, Some(format!("enumeration: ({ds}, s={sigma}, depth={depth})"))));
            }
            checked += 1;
        }
    }
    Ok((checked, None))
}

fn closed_form() -> Outcome {
    let ds = DigitSet::full(2)?;
    let ctx = PrecisionContext::with_guard(90, 10);
    let cache = BernoulliCache::global();
    let mut checked = 0;
    for (sigma, t) in [(2.0, 0.0), (3.0, 0.0), (4.0, 5.0)] {
        let s = ComplexParameter::from_f64(sigma, t);
        let table = MomentTable::build(&ds, &s, 60, &PrecisionContext::with_guard(100, 20))?;
        for m in 0..=60 {
            let closed = moment_closed_form(&ds, &s, m, cache, &ctx)?;
            if log10_abs(&diff(&closed, &table.moment(m))) >= -60.0 {
                return Ok((checked, Some(format!("closed form: ({ds}, s={sigma}+{t}i, m={m})"))));
            }
            checked += 1;
        }
    }
    Ok((checked, None))
}

fn mgf(grid: &Grid) -> Outcome {
    let mut checked = 0;
    let sigma = grid.sigma.unwrap_or(2.0);
    let t = grid.t.unwrap_or(1.0);
    for ds in restricted_sets() {
        let s = ComplexParameter::from_f64(sigma, t);
        if s.check_convergence(&ds).is_err() {
            continue;
        }
        let (ok, what) = mgf_family(&ds, &s)?;
        checked += ok;
        if let Some(what) = what {
            return Ok((checked, Some(format!("{what}: ({ds}, s={sigma}+{t}i)"))));
        }
    }
    Ok((checked, None))
}

/// Functional equation, Taylor coefficients and periodicity of `F` for one
/// `(ds, s)`; shared with `mgf-check`.
pub fn mgf_family(ds: &DigitSet, s: &ComplexParameter) -> Result<(usize, Option<&'static str>)> {
    let ctx = PrecisionContext::with_guard(30, 10);
    let bits = ctx.bits();
    let mut checked = 0;
    for (re, im) in [(0.5, 0.0), (-2.0, 1.5), (3.0, -4.0), (0.0, 5.0)] {
        let t = Complex::with_val(bits, (re, im));
        let r = functional_equation_residual(ds, s, &t, &ctx)?;
        if log10_abs(&abs(&r)) >= -29.0 {
            return Ok((checked, Some("functional equation")));
        }
        checked += 1;
    }
    let taylor = taylor_moments(ds, s, 10, 1.0, 64, &ctx)?;
    let g = log10_pochhammer_ratio_bound(s.sigma().max(1.0), to_c64(s.value()));
    let table = MomentTable::build(ds, s, 10, &PrecisionContext::with_guard(30, 20 + g.max(0.0) as u32))?;
    for (m, u) in taylor.iter().enumerate() {
        if log10_abs(&diff(u, &table.moment(m))) >= -25.0 {
            return Ok((checked, Some("Taylor coefficients")));
        }
        checked += 1;
    }
    let fctx = PrecisionContext::new(25);
    for (re, im) in [(0.5, 0.0), (1.3, 0.4), (2.0, -0.7)] {
        let t = Complex::with_val(fctx.bits(), (re, im));
        let a = evaluate_f(ds, s, &t, &fctx)?.value;
        let tb = Complex::with_val(fctx.bits(), &t * ds.base());
        let b = evaluate_f(ds, s, &tb, &fctx)?.value;
        if log10_abs(&diff(&a, &b)) >= -20.0 {
            return Ok((checked, Some("periodicity of F")));
        }
        checked += 1;
    }
    Ok((checked, None))
}
