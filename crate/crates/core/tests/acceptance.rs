//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//!
//! Run with `cargo test -p rzeta --test acceptance`.

use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rug::float::Constant;
use rug::ops::Pow;
use rug::{Complex, Float};

use rzeta::mgf::{
    evaluate_f, fourier_coefficient, fourier_quadrature, functional_equation_residual,
    taylor_moments,
};
use rzeta::moments::{exact_normalized_recurrence, moment_closed_form};
use rzeta::numerics::{abs, log10_abs, log10_pochhammer_ratio_bound, to_c64};
use rzeta::series::{evaluate_series, expand_series, limit_identity_log2};
use rzeta::{
    double_precision_closed_form_demo, parse_digit_spec, restricted_sum_bracket, zeta_reference,
    BernoulliCache, ComplexParameter, DigitSet, MomentTable, PrecisionContext,
};

type Outcome = Result<String, String>;

fn diff(a: &Complex, b: &Complex) -> Float {
    abs(&Complex::with_val(a.prec().0.max(b.prec().0), a - b))
}

fn sci(x: &Float) -> String {
    match x.to_f64() {
        v if x.is_zero() || v != 0.0 => format!("{v:.2e}"),
        _ => format!("1e{:.1}", log10_abs(x)),
    }
}

fn log10_of(x: &Float) -> f64 {
    log10_abs(x)
}

fn full(b: u32) -> DigitSet {
    DigitSet::full(b).unwrap()
}

fn zeta_two_hundred_digits() -> Outcome {
    let ds = full(2);
    let start = Instant::now();
    let r = evaluate_series(&ds, &ComplexParameter::real(2.0), 3, &PrecisionContext::new(100))
        .map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let bits = 500;
    let pi = Float::with_val(bits, Constant::Pi);
    let exact = Complex::with_val(bits, Float::with_val(bits, pi.square_ref()) / 6u32);
    let d = diff(&r.value, &exact);
    let detail = format!("|err| = {}, {} terms, {:.2} s", sci(&d), r.terms_used, secs);
    if log10_of(&d) < -100.0 && secs < 10.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn zeta_oracle_agreement() -> Outcome {
    let ds = full(2);
    let ctx = PrecisionContext::new(50);
    let mut worst = f64::NEG_INFINITY;
    for (sigma, t) in [(3.0, 0.0), (2.5, 0.0), (2.0, 3.0), (2.0, 10.0)] {
        let s = ComplexParameter::from_f64(sigma, t);
        let r = evaluate_series(&ds, &s, 3, &ctx).map_err(|e| e.to_string())?;
        let z = zeta_reference(&s, 60).map_err(|e| e.to_string())?;
        let d = diff(&r.value, &z);
        let allowed = Float::with_val(64, &r.error_bound + 1e-60);
        if d > allowed || log10_of(&d) >= -45.0 {
            return Err(format!("s = {sigma}+{t}i: |diff| = {}", sci(&d)));
        }
        worst = worst.max(log10_of(&d));
    }
    Ok(format!("max |diff| = 1e{worst:.1}"))
}

fn base_invariance() -> Outcome {
    let ctx = PrecisionContext::new(50);
    let s = ComplexParameter::real(3.0);
    let values: Vec<Complex> = [(2, 3), (3, 3), (10, 2)]
        .iter()
        .map(|&(b, l)| evaluate_series(&full(b), &s, l, &ctx).map(|r| r.value))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let mut worst = Float::with_val(64, 0);
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            worst.max_mut(&diff(&values[i], &values[j]));
        }
    }
    let detail = format!("bases 2, 3, 10: max |diff| = {}", sci(&worst));
    if log10_of(&worst) < -45.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn level_invariance() -> Outcome {
    let ds = full(2);
    let ctx = PrecisionContext::new(50);
    let s = ComplexParameter::real(2.5);
    let results = (2..=5)
        .map(|l| evaluate_series(&ds, &s, l, &ctx))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let mut spread = Float::with_val(64, 0);
    for a in &results {
        for b in &results {
            let d = diff(&a.value, &b.value);
            let bound = Float::with_val(64, &a.error_bound + &b.error_bound);
            if d > bound {
                return Err(format!(
                    "levels {} and {} differ by {} > {}",
                    a.level,
                    b.level,
                    sci(&d),
                    sci(&bound)
                ));
            }
            spread.max_mut(&d);
        }
    }
    let detail = format!("levels 2..5: spread = {}", sci(&spread));
    if log10_of(&spread) < -45.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn kempner_no_nine() -> Outcome {
    let ds = parse_digit_spec("0-8", 10).unwrap();
    let s = ComplexParameter::real(1.0);
    let ctx = PrecisionContext::new(50);
    let two = evaluate_series(&ds, &s, 2, &ctx).map_err(|e| e.to_string())?;
    let three = evaluate_series(&ds, &s, 3, &ctx).map_err(|e| e.to_string())?;
    let bracket = restricted_sum_bracket(&ds, &s, 7, 128).map_err(|e| e.to_string())?;
    let d = diff(&two.value, &three.value);
    let inside = bracket.contains(two.value.real());
    let detail = format!(
        "K = {}, bracket [{:.6}, {:.6}], |l2 - l3| = {}",
        two.value.real().to_string_radix(10, Some(25)),
        bracket.lower.to_f64(),
        bracket.upper.to_f64(),
        sci(&d)
    );
    if inside && log10_of(&d) < -40.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn log_two_identity() -> Outcome {
    let ctx = PrecisionContext::new(40);
    let v = limit_identity_log2(2, 120, &ctx).map_err(|e| e.to_string())?;
    let ln2 = Float::with_val(ctx.bits(), Constant::Log2);
    let d = Float::with_val(ctx.bits(), &v - &ln2).abs();
    let detail = format!("|sum - log 2| = {}", sci(&d));
    if log10_of(&d) < -30.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn constant_sequence() -> Outcome {
    let c = exact_normalized_recurrence(&full(2), 1, 50).map_err(|e| e.to_string())?;
    match c.iter().position(|x| *x != 1) {
        None => Ok("c_m = 1 exactly for m = 0..=50".into()),
        Some(m) => Err(format!("c_{m} = {}", c[m])),
    }
}

fn bound_sandwich() -> Outcome {
    let ctx = PrecisionContext::with_guard(40, 16);
    let bits = ctx.bits();
    let rel = Float::with_val(bits, 1e-35);
    let mut checked = 0;
    for b in [2u32, 10] {
        for sigma in [1.1, 2.0, 3.0, 5.0] {
            let s = ComplexParameter::real(sigma);
            let table = MomentTable::build(&full(b), &s, 200, &ctx).map_err(|e| e.to_string())?;
            let sv = Float::with_val(bits, s.at(bits).real());
            let b_sigma = Float::with_val(bits, Float::with_val(bits, b).pow(&sv));
            let gap = Float::with_val(bits, &b_sigma - b);
            let lower = Float::with_val(bits, gap.recip_ref());
            let upper = Float::with_val(bits, &b_sigma / &gap);
            let upper_slack = Float::with_val(bits, &upper * Float::with_val(bits, 1 + &rel));
            for m in 0..=200 {
                let u = table.u_star(m).real().clone();
                if !(u > lower && u <= upper_slack) {
                    return Err(format!("b = {b}, sigma = {sigma}, m = {m}: u* = {}", u.to_f64()));
                }
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} moments inside the sandwich"))
}

fn random_digit_set(rng: &mut StdRng) -> DigitSet {
    let base = [2u32, 3, 5, 7, 10][rng.random_range(0..5)];
    loop {
        let digits: Vec<u32> = (0..base).filter(|_| rng.random_bool(0.6)).collect();
        if let Ok(ds) = DigitSet::new(base, digits) {
            return ds;
        }
    }
}

fn normalized_domination() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x5eed_0009);
    let max_m = 150;
    let mut checked = 0;
    for _ in 0..100 {
        let ds = random_digit_set(&mut rng);
        let sigma = rng.random_range(ds.abscissa() + 0.05..=6.0);
        let t = rng.random_range(-50.0..=50.0);
        let s = ComplexParameter::from_f64(sigma, t);
        let growth = log10_pochhammer_ratio_bound(sigma.max(1.0), to_c64(s.value())).max(0.0);
        let ctx = PrecisionContext::with_guard(30, 20 + growth.ceil() as u32);
        let at_s = MomentTable::build(&ds, &s, max_m, &ctx).map_err(|e| e.to_string())?;
        let at_sigma =
            MomentTable::build(&ds, &s.real_part(), max_m, &ctx).map_err(|e| e.to_string())?;
        let bits = ctx.bits();
        let slack = Float::with_val(bits, 1e-25) + 1u32;
        for m in 0..=max_m {
            let lhs = abs(&at_s.plain_normalized(m));
            let rhs = Float::with_val(bits, at_sigma.plain_normalized(m).real() * &slack);
            if lhs > rhs {
                return Err(format!("{ds}, s = {sigma}+{t}i, m = {m}"));
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} comparisons, 100 random s"))
}

fn closed_form_vs_recurrence() -> Outcome {
    let ds = full(2);
    let ctx = PrecisionContext::with_guard(90, 10);
    let cache = BernoulliCache::global();
    let mut worst = f64::NEG_INFINITY;
    for (sigma, t) in [(2.0, 0.0), (3.0, 0.0), (4.0, 5.0)] {
        let s = ComplexParameter::from_f64(sigma, t);
        let table = MomentTable::build(&ds, &s, 60, &PrecisionContext::with_guard(100, 20))
            .map_err(|e| e.to_string())?;
        for m in 0..=60 {
            let closed = moment_closed_form(&ds, &s, m, cache, &ctx).map_err(|e| e.to_string())?;
            let d = log10_of(&diff(&closed, &table.moment(m)));
            worst = worst.max(d);
        }
    }
    let (closed, rec) = double_precision_closed_form_demo(2, 3.0, 30).map_err(|e| e.to_string())?;
    let detail = format!(
        "max |diff| = 1e{worst:.1}; double precision at m = 30: closed {closed:.1e} vs recurrence {rec:.1e}"
    );
    if worst < -60.0 && closed > 1e3 * rec {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn real_bracketing() -> Outcome {
    let cases = [(full(2), "all"), (parse_digit_spec("0-8", 10).unwrap(), "0-8")];
    let mut checked = 0;
    for (ds, name) in &cases {
        for sigma in [1.5, 2.0, 3.0, 6.0] {
            let s = ComplexParameter::real(sigma);
            let truth = evaluate_series(ds, &s, 3, &PrecisionContext::new(60))
                .map_err(|e| e.to_string())?
                .value;
            let v = truth.real();
            for level in 2..=5 {
                if ds.base() == 10 && level > 3 {
                    continue;
                }
                let ex = expand_series(ds, &s, level, 40, &PrecisionContext::new(50))
                    .map_err(|e| e.to_string())?;
                let sums = ex.partial_sums();
                for k in 0..ex.terms.len() {
                    // beyond this the bracket is below the arithmetic resolution
                    if log10_of(&abs(&ex.terms[k])) < -45.0 {
                        break;
                    }
                    let (a, b) = (sums[k].real(), sums[k + 1].real());
                    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                    if !(lo <= v && v <= hi) {
                        return Err(format!("A = {name}, sigma = {sigma}, level {level}, k = {k}"));
                    }
                    checked += 1;
                }
            }
        }
    }
    Ok(format!("{checked} consecutive partial-sum pairs bracket the value"))
}

fn mgf_suite() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x5eed_0012);
    let ds = parse_digit_spec("0,2,5", 6).unwrap();
    let s = ComplexParameter::from_f64(2.0, 1.5);
    let ctx = PrecisionContext::with_guard(30, 10);
    let mut fe = f64::NEG_INFINITY;
    for _ in 0..20 {
        let (r, phi) = (rng.random_range(0.0..=5.0), rng.random_range(0.0..std::f64::consts::TAU));
        let t = Complex::with_val(ctx.bits(), (r * phi.cos(), r * phi.sin()));
        let res = functional_equation_residual(&ds, &s, &t, &ctx).map_err(|e| e.to_string())?;
        fe = fe.max(log10_of(&abs(&res)));
    }

    let taylor = taylor_moments(&ds, &s, 10, 1.0, 64, &ctx).map_err(|e| e.to_string())?;
    let table = MomentTable::build(&ds, &s, 10, &PrecisionContext::with_guard(40, 20))
        .map_err(|e| e.to_string())?;
    let tc = (0..=10)
        .map(|m| log10_of(&diff(&taylor[m], &table.moment(m))))
        .fold(f64::NEG_INFINITY, f64::max);

    let fctx = PrecisionContext::new(30);
    let bits = fctx.bits();
    let mut per = f64::NEG_INFINITY;
    for _ in 0..5 {
        let t = Complex::with_val(bits, (rng.random_range(0.5..=2.0), rng.random_range(-1.0..=1.0)));
        let a = evaluate_f(&ds, &s, &t, &fctx).map_err(|e| e.to_string())?;
        let tb = Complex::with_val(bits, &t * ds.base());
        let b = evaluate_f(&ds, &s, &tb, &fctx).map_err(|e| e.to_string())?;
        per = per.max(log10_of(&diff(&a.value, &b.value)));
    }

    let two = full(2);
    let three = ComplexParameter::real(3.0);
    let qctx = PrecisionContext::new(20);
    let quad = fourier_quadrature(&two, &three, 0, 1e-12, &qctx).map_err(|e| e.to_string())?;
    let z3 = zeta_reference(&three, 40).map_err(|e| e.to_string())?;
    let expect = z3 * 2u32 / Float::with_val(qctx.bits(), Constant::Log2);
    let q = log10_of(&diff(&quad.value, &expect));
    let coefficient = fourier_coefficient(&two, &three, 0, &qctx).map_err(|e| e.to_string())?;
    let fc = log10_of(&diff(&coefficient.value, &expect));

    let detail = format!(
        "functional eq 1e{fe:.1}, Taylor 1e{tc:.1}, periodicity 1e{per:.1}, quadrature 1e{q:.1}, series coefficient 1e{fc:.1}"
    );
    if fe < -30.0 && tc < -25.0 && per < -20.0 && q < -8.0 && fc <= coefficient.log10_tail + 0.5 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn term_growth() -> Outcome {
    let ds = full(2);
    let ctx = PrecisionContext::new(30);
    let terms = [0.0, 20.0, 50.0]
        .iter()
        .map(|&t| evaluate_series(&ds, &ComplexParameter::from_f64(2.0, t), 3, &ctx).map(|r| r.terms_used))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let detail = format!("terms at t = 0, 20, 50: {terms:?}");
    if terms.windows(2).all(|w| w[0] < w[1]) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 13] = [
        ("zeta(2) to 100 digits", zeta_two_hundred_digits),
        ("zeta oracle agreement", zeta_oracle_agreement),
        ("base invariance", base_invariance),
        ("level invariance", level_invariance),
        ("Kempner no-9", kempner_no_nine),
        ("log 2 identity", log_two_identity),
        ("constant sequence at s = 1", constant_sequence),
        ("moment sandwich", bound_sandwich),
        ("normalized domination", normalized_domination),
        ("closed form vs recurrence", closed_form_vs_recurrence),
        ("real bracketing", real_bracketing),
        ("generating function suite", mgf_suite),
        ("term growth in t", term_growth),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} [{secs:.1} s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail} [{secs:.1} s]", i + 1)
            }
        }
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
