//! Radix and admissible-digit configuration.
//!
//! An integer is *admissible* when every digit of its minimal radix-`b`
//! representation belongs to the chosen digit set `A`. Words over `A` are
//! never materialized: everything downstream only needs the admissible
//! integers of a given length (enumerated by an odometer over digit
//! positions) and the digit power sums `S_j = sum_{a in A} a^j`.

use std::fmt;

use rug::{Integer, Rational};

use crate::error::{Error, Result};

/// Radix `b >= 2` together with a set `A` of admissible digits.
///
/// `A` is never empty and never reduced to `{0}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DigitSet {
    base: u32,
    digits: Vec<u32>,
}

impl DigitSet {
    pub fn new(base: u32, digits: impl IntoIterator<Item = u32>) -> Result<Self> {
        if base < 2 {
            return Err(Error::InvalidBase(base));
        }
        let mut digits: Vec<u32> = digits.into_iter().collect();
        if let Some(&d) = digits.iter().find(|&&d| d >= base) {
            return Err(Error::DigitOutOfRange {
                digit: d as u64,
                base,
            });
        }
        digits.sort_unstable();
        digits.dedup();
        if digits.is_empty() || digits == [0] {
            return Err(Error::DegenerateDigitSet);
        }
        Ok(DigitSet { base, digits })
    }

    /// All `b` digits; the restricted series is then the Riemann zeta function.
    pub fn full(base: u32) -> Result<Self> {
        Self::new(base, 0..base)
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    /// Admissible digits in ascending order.
    pub fn digits(&self) -> &[u32] {
        &self.digits
    }

    /// `N = |A|`.
    pub fn count(&self) -> u32 {
        self.digits.len() as u32
    }

    /// `N1 = |A \ {0}|`.
    pub fn nonzero_count(&self) -> u32 {
        self.digits.iter().filter(|&&d| d != 0).count() as u32
    }

    /// `f = max A`.
    pub fn max_digit(&self) -> u32 {
        *self.digits.last().expect("digit set is never empty")
    }

    pub fn contains(&self, digit: u32) -> bool {
        self.digits.binary_search(&digit).is_ok()
    }

    pub fn is_full(&self) -> bool {
        self.count() == self.base
    }

    /// `lambda = f / (b - 1)`, exact.
    pub fn lambda(&self) -> Rational {
        Rational::from((self.max_digit(), self.base - 1))
    }

    pub fn lambda_f64(&self) -> f64 {
        self.max_digit() as f64 / (self.base - 1) as f64
    }

    /// `log_b N`: the restricted series converges iff `Re s` exceeds it.
    pub fn abscissa(&self) -> f64 {
        (self.count() as f64).ln() / (self.base as f64).ln()
    }

    /// The reflected digits `B = f - A`, which always contain 0.
    pub fn reflected_digits(&self) -> Vec<u32> {
        let f = self.max_digit();
        let mut out: Vec<u32> = self.digits.iter().map(|&a| f - a).collect();
        out.sort_unstable();
        out
    }

    /// Admissible integers in `[b^(level-1), b^level)`, ascending.
    pub fn admissible_in_block(&self, level: u32) -> Result<BlockIter> {
        BlockIter::new(self.base, &self.digits, level)
    }

    /// Admissible integers `0 < n < b^(level-1)`, ascending.
    pub fn admissible_below(&self, level: u32) -> Result<impl Iterator<Item = u64>> {
        if level == 0 {
            return Err(Error::InvalidLevel);
        }
        let blocks = (1..level)
            .map(|l| BlockIter::new(self.base, &self.digits, l))
            .collect::<Result<Vec<_>>>()?;
        Ok(blocks.into_iter().flatten())
    }

    /// Number of admissible integers in the block of the given level, `N1 N^(level-1)`.
    pub fn block_len(&self, level: u32) -> u64 {
        if level == 0 {
            return 0;
        }
        self.nonzero_count() as u64 * (self.count() as u64).pow(level - 1)
    }

    /// Exact power sums `S_0..=S_{m_max}` with `0^0 = 1`.
    pub fn power_sums(&self, m_max: usize) -> Vec<Integer> {
        let mut sums = vec![Integer::from(self.count())];
        let mut powers: Vec<Integer> = self.digits.iter().map(|&a| Integer::from(a)).collect();
        for _ in 1..=m_max {
            sums.push(powers.iter().sum());
            for (p, &a) in powers.iter_mut().zip(&self.digits) {
                *p *= a;
            }
        }
        sums
    }

    /// True when every radix-`b` digit of `n > 0` lies in `A`.
    pub fn is_admissible(&self, mut n: u64) -> bool {
        let b = self.base as u64;
        while n > 0 {
            if !self.contains((n % b) as u32) {
                return false;
            }
            n /= b;
        }
        true
    }

    /// Renders the digit set in the grammar accepted by [`parse_digit_spec`].
    pub fn spec_string(&self) -> String {
        if self.is_full() {
            return "all".to_string();
        }
        let mut parts = Vec::new();
        let mut i = 0;
        while i < self.digits.len() {
            let start = self.digits[i];
            let mut j = i;
            while j + 1 < self.digits.len() && self.digits[j + 1] == self.digits[j] + 1 {
                j += 1;
            }
            let end = self.digits[j];
            if end > start {
                parts.push(format!("{start}-{end}"));
            } else {
                parts.push(start.to_string());
            }
            i = j + 1;
        }
        parts.join(",")
    }
}

impl fmt::Display for DigitSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "b={} A={{{}}}", self.base, self.spec_string())
    }
}

/// Parses `spec := "all" | item ("," item)*`, `item := digit | digit "-" digit`.
pub fn parse_digit_spec(spec: &str, base: u32) -> Result<DigitSet> {
    if base < 2 {
        return Err(Error::InvalidBase(base));
    }
    if spec == "all" {
        return DigitSet::full(base);
    }
    let malformed = |reason: &str| Error::MalformedDigitSpec {
        spec: spec.to_string(),
        reason: reason.to_string(),
    };
    let parse_digit = |s: &str| -> Result<u32> {
        if s.is_empty() || !s.bytes().all(|c| c.is_ascii_digit()) {
            return Err(malformed("expected a decimal digit"));
        }
        let d: u64 = s.parse().map_err(|_| malformed("digit too large"))?;
        if d >= base as u64 {
            return Err(Error::DigitOutOfRange { digit: d, base });
        }
        Ok(d as u32)
    };
    let mut digits = Vec::new();
    for item in spec.split(',') {
        match item.split_once('-') {
            Some((lo, hi)) => {
                let (lo, hi) = (parse_digit(lo)?, parse_digit(hi)?);
                if lo > hi {
                    return Err(malformed("range is decreasing"));
                }
                digits.extend(lo..=hi);
            }
            None => digits.push(parse_digit(item)?),
        }
    }
    DigitSet::new(base, digits)
}

/// Odometer over the admissible integers with exactly `level` digits.
///
/// The leading digit runs over the nonzero digits, every other position over
/// all digits. Works for any digit list (including ones containing only 0,
/// which yield an empty block).
#[derive(Clone, Debug)]
pub struct BlockIter {
    base: u64,
    digits: Vec<u64>,
    leading: Vec<u64>,
    // digit index per position, most significant first
    state: Vec<usize>,
    weights: Vec<u64>,
    value: u64,
    remaining: u64,
}

impl BlockIter {
    pub fn new(base: u32, digits: &[u32], level: u32) -> Result<Self> {
        if level == 0 {
            return Err(Error::InvalidLevel);
        }
        let b = base as u64;
        b.checked_pow(level)
            .ok_or(Error::LevelTooDeep { base, level })?;
        let mut digits: Vec<u64> = digits.iter().map(|&d| d as u64).collect();
        digits.sort_unstable();
        digits.dedup();
        let leading: Vec<u64> = digits.iter().copied().filter(|&d| d != 0).collect();
        let weights: Vec<u64> = (0..level).rev().map(|p| b.pow(p)).collect();
        let remaining = if leading.is_empty() {
            0
        } else {
            leading.len() as u64 * (digits.len() as u64).pow(level - 1)
        };
        let state = vec![0; level as usize];
        let value = if remaining == 0 {
            0
        } else {
            leading[0] * weights[0]
                + weights[1..].iter().map(|w| digits[0] * w).sum::<u64>()
        };
        Ok(BlockIter {
            base: b,
            digits,
            leading,
            state,
            weights,
            value,
            remaining,
        })
    }

    fn advance(&mut self) {
        for pos in (0..self.state.len()).rev() {
            let alphabet = if pos == 0 { &self.leading } else { &self.digits };
            let idx = self.state[pos];
            if idx + 1 < alphabet.len() {
                self.value += (alphabet[idx + 1] - alphabet[idx]) * self.weights[pos];
                self.state[pos] = idx + 1;
                return;
            }
            self.value -= (alphabet[idx] - alphabet[0]) * self.weights[pos];
            self.state[pos] = 0;
        }
    }

    pub fn base(&self) -> u64 {
        self.base
    }
}

impl Iterator for BlockIter {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        if self.remaining == 0 {
            return None;
        }
        let out = self.value;
        self.remaining -= 1;
        if self.remaining > 0 {
            self.advance();
        }
        Some(out)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.remaining as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for BlockIter {}
