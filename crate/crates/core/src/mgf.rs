//! The moment generating function `E(t) = sum_m u_m(s) t^m / m!` of the
//! word measure, its log-periodic limit `F(t)`, and the Fourier coefficients
//! of `F`. Used as a second route to the moments.
//!
//! ```text
//! E(t) = 1 + sum_{j>=1} b^(-js) prod_{i=1..j} alpha(b^-i t),   alpha(t) = sum_{a in A} e^(at)
//! E(t) = 1 + b^-s alpha(t/b) E(t/b)
//! F(t) = t^s e^(-lambda t) phi_B(q) E(t) + sum_{j>=1} (b^j t)^s e^(-lambda b^j t) phi_B(q^(b^j))
//! ```
//!
//! with `q = e^-t`, `B = f - A` and `phi_B(q) = sum_{n B-admissible} q^n`
//! (including `n = 0`). `F(bt) = F(t)`.

use std::f64::consts::{LN_10, PI};

use num_complex::Complex64;
use rug::float::Constant;
use rug::ops::Pow;
use rug::{Complex, Float};

use crate::digitset::{BlockIter, DigitSet};
use crate::error::{Error, Result};
use crate::numerics::{self, gamma_complex, log10_abs, ComplexParameter, PrecisionContext};

/// Largest admissible-set enumeration accepted by `phi_B` and the Fourier
/// sums.
pub const MAX_ENUMERATION: u64 = 1 << 18;

const MAX_DEPTH: usize = 1_000_000;

/// `alpha_A(t) = sum_{a in A} e^(at)`.
pub fn alpha(ds: &DigitSet, t: &Complex, bits: u32) -> Complex {
    if t.is_zero() {
        return Complex::with_val(bits, ds.count());
    }
    // the closed form cancels near t = 0, where the direct sum is exact enough
    if ds.is_full() && numerics::abs(t) >= 0.5 {
        let wp = bits + 8;
        let tw = Complex::with_val(wp, t);
        let num = Complex::with_val(wp, &tw * ds.base()).exp() - 1u32;
        let den = tw.exp() - 1u32;
        return Complex::with_val(bits, num / den);
    }
    ds.digits().iter().fold(Complex::with_val(bits, 0), |acc, &a| {
        acc + Complex::with_val(bits, t * a).exp()
    })
}

/// A truncated evaluation of `E(t)`.
#[derive(Clone, Debug)]
pub struct MgfEvaluation {
    pub t: Complex,
    /// Number of `j`-terms summed.
    pub depth: usize,
    pub value: Complex,
    /// `log10` bound for the omitted terms.
    pub log10_tail: f64,
}

/// `log10` bound of `sum_{j>J} |b^-js prod alpha(b^-i t)|`, from
/// `|alpha(w)| <= N e^(f Re+ w)`: `e^(lambda Re+ t) rho^(J+1) / (1 - rho)`
/// with `rho = N / b^sigma`.
pub fn e_tail_log10(ds: &DigitSet, sigma: f64, t: Complex64, depth: usize) -> f64 {
    let log_rho = (ds.count() as f64).log10() - sigma * (ds.base() as f64).log10();
    let rho = 10f64.powf(log_rho);
    ds.lambda_f64() * t.re.max(0.0) / LN_10 + (depth + 1) as f64 * log_rho - (1.0 - rho).log10()
}

fn b_pow_neg_s(s: &Complex, b: &Float, bits: u32) -> Complex {
    let e = Complex::with_val(bits, s * Float::with_val(bits, b.ln_ref()));
    (-e).exp()
}

/// `E(t)` with exactly `depth` product terms.
pub fn evaluate_e_to_depth(
    ds: &DigitSet,
    s: &ComplexParameter,
    t: &Complex,
    depth: usize,
    bits: u32,
) -> Complex {
    let sv = s.at(bits);
    let b = Float::with_val(bits, ds.base());
    let b_neg_s = b_pow_neg_s(&sv, &b, bits);
    let mut value = Complex::with_val(bits, 1);
    let mut product = Complex::with_val(bits, 1);
    let mut w = Complex::with_val(bits, t);
    for _ in 0..depth {
        w /= ds.base();
        product *= alpha(ds, &w, bits);
        product *= &b_neg_s;
        value += &product;
    }
    value
}

/// `E(t)` truncated where the geometric tail bound drops below the target
/// accuracy of `ctx`.
pub fn evaluate_e(
    ds: &DigitSet,
    s: &ComplexParameter,
    t: &Complex,
    ctx: &PrecisionContext,
) -> Result<MgfEvaluation> {
    s.check_convergence(ds)?;
    let tc = numerics::to_c64(t);
    let log10_eps = ctx.log10_eps();
    let depth = (0..=MAX_DEPTH)
        .find(|&j| e_tail_log10(ds, s.sigma(), tc, j) <= log10_eps)
        .ok_or(Error::TermCapExceeded {
            planned: MAX_DEPTH + 1,
            cap: MAX_DEPTH,
        })?;
    let bits = ctx.bits();
    Ok(MgfEvaluation {
        t: Complex::with_val(bits, t),
        depth,
        value: evaluate_e_to_depth(ds, s, t, depth, bits),
        log10_tail: e_tail_log10(ds, s.sigma(), tc, depth),
    })
}

/// `E(t) - 1 - b^-s alpha(t/b) E(t/b)`.
pub fn functional_equation_residual(
    ds: &DigitSet,
    s: &ComplexParameter,
    t: &Complex,
    ctx: &PrecisionContext,
) -> Result<Complex> {
    let bits = ctx.bits();
    let e_t = evaluate_e(ds, s, t, ctx)?.value;
    let t_b = Complex::with_val(bits, t / ds.base());
    let e_tb = evaluate_e(ds, s, &t_b, ctx)?.value;
    let sv = s.at(bits);
    let b_neg_s = b_pow_neg_s(&sv, &Float::with_val(bits, ds.base()), bits);
    let rhs = b_neg_s * alpha(ds, &t_b, bits) * e_tb + 1u32;
    Ok(e_t - rhs)
}

/// `phi_B(e^-tau) = sum_{n in B-admissible, n >= 0} e^(-n tau)` for
/// `Re tau > 0`, truncated by digit length; returns the value and the
/// `log10` tail bound.
fn phi_reflected(ds: &DigitSet, tau: &Complex, bits: u32, log10_eps: f64) -> Result<(Complex, f64)> {
    let reflected = ds.reflected_digits();
    let re = tau.real().to_f64();
    let len = log10_phi_length(ds, re, log10_eps)?;
    let mut value = Complex::with_val(bits, 1);
    for l in 1..=len {
        for n in BlockIter::new(ds.base(), &reflected, l)? {
            let e = Complex::with_val(bits, tau * n);
            value += (-e).exp();
        }
    }
    Ok((value, phi_tail_log10(ds, re, len)))
}

/// `log10 sum_{l>len} N^l e^(-b^(l-1) re)`.
fn phi_tail_log10(ds: &DigitSet, re: f64, len: u32) -> f64 {
    let n = (ds.count() as f64).ln();
    let b = ds.base() as f64;
    let logs: Vec<f64> = (len + 1..len + 64)
        .map(|l| l as f64 * n - b.powi(l as i32 - 1) * re)
        .take_while(|x| x.is_finite())
        .collect();
    let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let sum: f64 = logs.iter().map(|x| (x - top).exp()).sum();
    (top + sum.ln()) / LN_10
}

fn log10_phi_length(ds: &DigitSet, re: f64, log10_eps: f64) -> Result<u32> {
    if re.is_nan() || re <= 0.0 {
        return Err(Error::InvalidArgument("phi_B needs Re t > 0".into()));
    }
    let mut len = 0;
    while phi_tail_log10(ds, re, len) > log10_eps {
        len += 1;
        if (ds.count() as u64).saturating_pow(len) > MAX_ENUMERATION {
            return Err(Error::InvalidArgument(format!(
                "Re t = {re} is too small for the admissible-set enumeration"
            )));
        }
    }
    Ok(len)
}

/// A truncated evaluation of `F(t)`.
#[derive(Clone, Debug)]
pub struct LimitFunctionEvaluation {
    pub t: Complex,
    /// Number of positive-index terms summed.
    pub positive_depth: usize,
    pub value: Complex,
    pub log10_tail: f64,
}

fn z_pow_s(z: &Complex, s: &Complex, bits: u32) -> Complex {
    let ln = Complex::with_val(bits, z.ln_ref());
    (ln * s).exp()
}

/// `F(t)` for `Re t > 0`.
pub fn evaluate_f(
    ds: &DigitSet,
    s: &ComplexParameter,
    t: &Complex,
    ctx: &PrecisionContext,
) -> Result<LimitFunctionEvaluation> {
    s.check_convergence(ds)?;
    let re = t.real().to_f64();
    if re.is_nan() || re <= 0.0 {
        return Err(Error::InvalidArgument("F(t) needs Re t > 0".into()));
    }
    let bits = ctx.bits();
    let log10_eps = ctx.log10_eps();
    let sv = s.at(bits);
    let lambda = Float::with_val(bits, ds.lambda());
    let lam = ds.lambda_f64();
    let sigma = s.sigma();

    let term = |tau: &Complex, with_e: bool| -> Result<(Complex, f64)> {
        let (phi, phi_tail) = phi_reflected(ds, tau, bits, log10_eps - 2.0)?;
        let damp = Complex::with_val(bits, -Complex::with_val(bits, tau * &lambda)).exp();
        let mut v = z_pow_s(tau, &sv, bits) * damp * phi;
        let mut tail = phi_tail;
        if with_e {
            let e = evaluate_e(ds, s, tau, &ctx.for_plan(0, 2, 0, 2))?;
            tail = tail.max(e.log10_tail);
            v *= e.value;
        }
        Ok((v, tail))
    };

    let (mut value, mut log10_tail) = term(t, true)?;
    // bound for |(b^j t)^s e^(-lambda b^j t) phi_B(q^(b^j))|
    let tc = numerics::to_c64(t);
    let log10_phi_max = phi_tail_log10(ds, re, 0).max(0.0) + 2f64.log10();
    let bound = |j: i32| {
        let scale = (ds.base() as f64).powi(j);
        sigma * (scale * tc.norm()).log10() + s.t().abs() * tc.arg().abs() / LN_10
            - lam * scale * re / LN_10
            + log10_phi_max
    };
    let mut j = 1;
    loop {
        let scale = (ds.base() as f64).powi(j);
        if bound(j) < log10_eps - 2.0 && lam * scale * re > sigma + 1.0 {
            break;
        }
        let scale = Float::with_val(bits, Float::with_val(bits, ds.base()).pow(j as u32));
        let tau = Complex::with_val(bits, t * scale);
        let (v, tail) = term(&tau, false)?;
        value += v;
        log10_tail = log10_tail.max(tail);
        j += 1;
        if j > 200 {
            return Err(Error::InvalidArgument("positive-index terms fail to decay".into()));
        }
    }
    let log10_tail = log10_tail.max(bound(j) + 2f64.log10());
    Ok(LimitFunctionEvaluation {
        t: Complex::with_val(bits, t),
        positive_depth: (j - 1) as usize,
        value,
        log10_tail,
    })
}

/// Fourier coefficient of `u -> F(b^u)` from the Mellin side:
/// `Gamma(s')/log b * sum_{n in B-admissible} (n + lambda)^-s'`,
/// `s' = s - 2 pi i k / log b`.
#[derive(Clone, Debug)]
pub struct FourierCoefficient {
    pub k: i64,
    pub value: Complex,
    /// Digit length of the enumerated part of the admissible sum.
    pub depth: u32,
    pub log10_tail: f64,
}

pub fn fourier_coefficient(
    ds: &DigitSet,
    s: &ComplexParameter,
    k: i64,
    ctx: &PrecisionContext,
) -> Result<FourierCoefficient> {
    s.check_convergence(ds)?;
    let bits = ctx.bits();
    let ln_b = Float::with_val(bits, ds.base()).ln();
    let shift = Float::with_val(bits, Constant::Pi) * 2u32 * k / &ln_b;
    let sp = s.shift_imag(&(-shift)).at(bits);
    let gamma = gamma_complex(&sp, bits);

    // admissible with l digits: (N-1) N^(l-1) values, all >= b^(l-1)
    let n = ds.count() as f64;
    let sigma = s.sigma();
    let log_rho = n.log10() - sigma * (ds.base() as f64).log10();
    let rho = 10f64.powf(log_rho);
    let gamma_mag = log10_abs(&numerics::abs(&gamma)) - ln_b.to_f64().log10();
    let tail = |d: u32| {
        if ds.count() == 1 {
            f64::NEG_INFINITY
        } else {
            gamma_mag + (n - 1.0).log10() + d as f64 * log_rho - (1.0 - rho).log10()
        }
    };
    let mut depth = 0;
    while tail(depth) > ctx.log10_eps() {
        if (ds.count() as u64).saturating_pow(depth + 1) > MAX_ENUMERATION {
            break;
        }
        depth += 1;
    }

    let reflected = ds.reflected_digits();
    let lambda = Float::with_val(bits, ds.lambda());
    let mut sum = numerics::neg_power_real(&lambda, &sp, bits);
    for l in 1..=depth {
        for m in BlockIter::new(ds.base(), &reflected, l)? {
            let x = Float::with_val(bits, &lambda + m);
            sum += numerics::neg_power_real(&x, &sp, bits);
        }
    }
    Ok(FourierCoefficient {
        k,
        value: gamma * sum / ln_b,
        depth,
        log10_tail: tail(depth),
    })
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(order: usize, bits: u32) -> Vec<(Float, Float)> {
    let mut out = Vec::with_capacity(order);
    let tol = Float::with_val(bits, Float::i_exp(1, 8 - bits as i32));
    for i in 1..=order {
        let guess = (PI * (i as f64 - 0.25) / (order as f64 + 0.5)).cos();
        let mut x = Float::with_val(bits, guess);
        let mut deriv = Float::new(bits);
        for _ in 0..200 {
            let (p, dp) = legendre(order, &x, bits);
            let dx = Float::with_val(bits, &p / &dp);
            x -= &dx;
            deriv = dp;
            if dx.abs() <= tol {
                let (_, dp) = legendre(order, &x, bits);
                deriv = dp;
                break;
            }
        }
        let one_minus = Float::with_val(bits, 1 - Float::with_val(bits, x.square_ref()));
        let w = Float::with_val(bits, 2) / (one_minus * Float::with_val(bits, deriv.square_ref()));
        out.push((x, w));
    }
    out
}

/// `(P_n(x), P_n'(x))`.
fn legendre(n: usize, x: &Float, bits: u32) -> (Float, Float) {
    let mut p0 = Float::with_val(bits, 1);
    let mut p1 = Float::with_val(bits, x);
    for k in 2..=n {
        let a = Float::with_val(bits, x * &p1) * (2 * k - 1) as u32;
        let p2 = (a - Float::with_val(bits, &p0 * (k - 1) as u32)) / k as u32;
        p0 = p1;
        p1 = p2;
    }
    let xp = Float::with_val(bits, x * &p1);
    let num = (xp - &p0) * n as u32;
    let den = Float::with_val(bits, x.square_ref()) - 1u32;
    (p1, num / den)
}

/// Result of the composite quadrature of `F(b^u) e^(-2 pi i k u)` over one
/// period.
#[derive(Clone, Debug)]
pub struct QuadratureResult {
    pub value: Complex,
    pub panels: usize,
    /// `|I(panels) - I(panels/2)|`.
    pub change: f64,
}

/// Composite Gauss-Legendre with panel doubling until successive estimates
/// differ by less than `tol`.
pub fn fourier_quadrature(
    ds: &DigitSet,
    s: &ComplexParameter,
    k: i64,
    tol: f64,
    ctx: &PrecisionContext,
) -> Result<QuadratureResult> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidTolerance);
    }
    let bits = ctx.bits();
    let nodes = gauss_legendre(16, bits);
    let ln_b = Float::with_val(bits, ds.base()).ln();
    let two_pi = Float::with_val(bits, Constant::Pi) * 2u32;
    let integrate = |panels: usize| -> Result<Complex> {
        let h = Float::with_val(bits, 1) / panels as u32;
        let mut acc = Complex::with_val(bits, 0);
        for p in 0..panels {
            let left = Float::with_val(bits, &h * p as u32);
            for (x, w) in &nodes {
                let u = Float::with_val(bits, x + 1u32) * &h / 2u32 + &left;
                let t = Float::with_val(bits, &u * &ln_b).exp();
                let f = evaluate_f(ds, s, &Complex::with_val(bits, t), ctx)?.value;
                let phase = Float::with_val(bits, &u * &two_pi) * k;
                let rot = Complex::with_val(bits, (phase.clone().cos(), -phase.sin()));
                acc += f * rot * w;
            }
        }
        Ok(acc * h / 2u32)
    };
    let mut panels = 1;
    let mut prev = integrate(panels)?;
    loop {
        panels *= 2;
        let next = integrate(panels)?;
        let change = numerics::abs(&Complex::with_val(bits, &next - &prev)).to_f64();
        if change < tol || panels >= 64 {
            return Ok(QuadratureResult {
                value: next,
                panels,
                change,
            });
        }
        prev = next;
    }
}

/// `u_0..=u_max_m` recovered from `E` by the trapezoid rule on the circle
/// `|t| = radius` with `points` nodes: `u_m = m!/(K r^m) sum_k E(r w^k) w^-km`.
pub fn taylor_moments(
    ds: &DigitSet,
    s: &ComplexParameter,
    max_m: usize,
    radius: f64,
    points: usize,
    ctx: &PrecisionContext,
) -> Result<Vec<Complex>> {
    if points <= max_m || radius.is_nan() || radius <= 0.0 {
        return Err(Error::InvalidArgument(
            "need more contour points than coefficients and a positive radius".into(),
        ));
    }
    let bits = ctx.bits();
    let two_pi = Float::with_val(bits, Constant::Pi) * 2u32;
    let r = Float::with_val(bits, radius);
    let values: Vec<(Complex, Complex)> = (0..points)
        .map(|k| {
            let angle = Float::with_val(bits, &two_pi * k as u32) / points as u32;
            let w = Complex::with_val(bits, (angle.clone().cos(), angle.sin()));
            let t = Complex::with_val(bits, &w * &r);
            evaluate_e(ds, s, &t, ctx).map(|e| (w, e.value))
        })
        .collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(max_m + 1);
    let mut factorial = Float::with_val(bits, 1);
    let mut r_pow = Float::with_val(bits, 1);
    for m in 0..=max_m {
        if m > 0 {
            factorial *= m as u32;
            r_pow *= &r;
        }
        let mut acc = Complex::with_val(bits, 0);
        for (w, e) in &values {
            let wm = Complex::with_val(bits, w.conj_ref()).pow(m as u32);
            acc += Complex::with_val(bits, e * &wm);
        }
        out.push(acc * &factorial / (Float::with_val(bits, &r_pow) * points as u32));
    }
    Ok(out)
}
