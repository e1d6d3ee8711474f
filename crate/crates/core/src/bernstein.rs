//! Degree-`(n-1)` Bernstein basis and the policy polynomial.
//!
//! Ranks are 1-based: `a_i(x) = C(n-1, i-1) x^(n-i) (1-x)^(i-1)`, so `a_1`
//! is the top-rank kernel `x^(n-1)` and `a_n` is `(1-x)^(n-1)`. The policy
//! polynomial is `h(x, p) = sum_i a_i(x) p_i`; it is the expected share of a
//! contestant who beats each opponent independently with probability `x`.

use crate::error::{Error, Result};
use crate::policy::Policy;

/// Absolute tolerance of [`h_inverse`].
pub const TOL_INV: f64 = 1e-12;

/// Bisection budget of [`h_inverse`].
pub const MAX_BISECTION_STEPS: usize = 200;

/// `ln C(n, k)`, accumulated as a sum of logs so it never overflows.
pub fn ln_binomial(n: usize, k: usize) -> f64 {
    assert!(k <= n, "ln_binomial: k = {k} > n = {n}");
    let k = k.min(n - k);
    (1..=k)
        .map(|j| ((n - k + j) as f64).ln() - (j as f64).ln())
        .sum()
}

/// A validated `(n, i)` pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BasisIndex {
    n: usize,
    i: usize,
}

impl BasisIndex {
    pub fn new(n: usize, i: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!("contestant count n = {n} < 2")));
        }
        if i == 0 || i > n {
            return Err(Error::Domain(format!("rank {i} outside 1..={n}")));
        }
        Ok(Self { n, i })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.i
    }

    /// `a_i(x)`; caller guarantees `x` in `[0, 1]`.
    pub fn eval_unchecked(&self, x: f64) -> f64 {
        bernstein(self.n - 1, self.n - self.i, x)
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        check_unit(x)?;
        Ok(self.eval_unchecked(x))
    }

    /// Exact moment `1/n`.
    pub fn integral(&self) -> f64 {
        1.0 / self.n as f64
    }
}

pub(crate) fn check_unit(x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::Range {
            value: x,
            lo: 0.0,
            hi: 1.0,
        })
    }
}

/// Standard Bernstein polynomial `C(deg, k) x^k (1-x)^(deg-k)` in log space.
pub(crate) fn bernstein(deg: usize, k: usize, x: f64) -> f64 {
    if x <= 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if x >= 1.0 {
        return if k == deg { 1.0 } else { 0.0 };
    }
    let ln = ln_binomial(deg, k) + k as f64 * x.ln() + (deg - k) as f64 * (-x).ln_1p();
    ln.exp()
}

/// Fills `out[i-1] = a_i(x)` for every rank.
pub fn basis_row(n: usize, x: f64, out: &mut [f64]) {
    debug_assert_eq!(out.len(), n);
    for (idx, slot) in out.iter_mut().enumerate() {
        *slot = bernstein(n - 1, n - 1 - idx, x);
    }
}

pub fn basis_eval(n: usize, i: usize, x: f64) -> Result<f64> {
    BasisIndex::new(n, i)?.eval(x)
}

/// `∫_0^1 a_i(x) dx`, which is `1/n` for every rank.
pub fn basis_integral(n: usize, i: usize) -> Result<f64> {
    Ok(BasisIndex::new(n, i)?.integral())
}

/// `h(x, p)` by de Casteljau's algorithm on the control points
/// `(p_n, p_{n-1}, ..., p_1)`.
pub fn h_eval(p: &Policy, x: f64) -> Result<f64> {
    check_unit(x)?;
    Ok(h_eval_unchecked(p.shares(), x))
}

pub(crate) fn h_eval_unchecked(shares: &[f64], x: f64) -> f64 {
    let mut b: Vec<f64> = shares.iter().rev().copied().collect();
    let n = b.len();
    let y = 1.0 - x;
    for r in 1..n {
        for k in 0..n - r {
            b[k] = y * b[k] + x * b[k + 1];
        }
    }
    b[0]
}

/// `dh/dx`, written term by term as the difference of degree-`(n-2)`
/// Bernstein polynomials, with the two boundary ranks handled separately.
pub fn h_derivative(p: &Policy, x: f64) -> f64 {
    let s = p.shares();
    let n = s.len();
    let m = (n - 1) as f64;
    let mut psi = 0.0;
    for i in 2..n {
        // C(n-2, i-1) x^(n-i-1) (1-x)^(i-1) - C(n-2, i-2) x^(n-i) (1-x)^(i-2)
        let up = bernstein(n - 2, n - i - 1, x);
        let down = bernstein(n - 2, n - i, x);
        psi += s[i - 1] * m * (up - down);
    }
    psi += s[0] * m * bernstein(n - 2, n - 2, x);
    psi -= s[n - 1] * m * bernstein(n - 2, 0, x);
    psi
}

/// The unique `x` in `[0, 1]` with `h(x, p) = y`, by bisection.
pub fn h_inverse(p: &Policy, y: f64) -> Result<f64> {
    if !p.is_nontrivial() {
        return Err(Error::TrivialPolicy);
    }
    let (lo_y, hi_y) = (p.last(), p.top());
    let slack = 1e-14;
    if !(y >= lo_y - slack && y <= hi_y + slack) {
        return Err(Error::Range {
            value: y,
            lo: lo_y,
            hi: hi_y,
        });
    }
    if y >= hi_y {
        return Ok(1.0);
    }
    if y <= lo_y {
        return Ok(0.0);
    }
    let s = p.shares();
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..MAX_BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if h_eval_unchecked(s, mid) < y {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= TOL_INV {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Binomial coefficients `C(deg, k)` for `k = 0..=deg`.
pub(crate) fn binomial_row(deg: usize) -> Vec<f64> {
    let mut row = Vec::with_capacity(deg + 1);
    let mut c = 1.0_f64;
    for k in 0..=deg {
        row.push(c);
        c = c * (deg - k) as f64 / (k + 1) as f64;
        if c < 9.0e15 {
            c = c.round();
        }
    }
    row
}

/// A point `x` prepared for O(deg) evaluation of degree-`deg` Bernstein sums.
///
/// For `x <= 1/2` the sum is `(1-x)^deg * sum_k b_k u^k` with `u = x/(1-x)`;
/// otherwise `x^deg * sum_k b_k v^(deg-k)` with `v = (1-x)/x`. The ratio never
/// exceeds 1, so nonnegative coefficients are summed without cancellation.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ScaledPoint {
    left: bool,
    ratio: f64,
    scale: f64,
}

impl ScaledPoint {
    pub(crate) fn new(deg: usize, x: f64) -> Self {
        if x <= 0.5 {
            Self {
                left: true,
                ratio: x / (1.0 - x),
                scale: (1.0 - x).powi(deg as i32),
            }
        } else {
            Self {
                left: false,
                ratio: (1.0 - x) / x,
                scale: x.powi(deg as i32),
            }
        }
    }

    /// `sum_k coef[k] x^k (1-x)^(deg-k)`, binomials already folded into `coef`.
    pub(crate) fn sum(&self, coef: &[f64]) -> f64 {
        let mut acc = 0.0;
        if self.left {
            for c in coef.iter().rev() {
                acc = acc * self.ratio + c;
            }
        } else {
            for c in coef {
                acc = acc * self.ratio + c;
            }
        }
        acc * self.scale
    }

    /// `out[k] = C(deg, k) x^k (1-x)^(deg-k)`.
    pub(crate) fn row(&self, binom: &[f64], out: &mut [f64]) {
        let deg = binom.len() - 1;
        let mut t = self.scale;
        if self.left {
            for k in 0..=deg {
                out[k] = binom[k] * t;
                t *= self.ratio;
            }
        } else {
            for k in (0..=deg).rev() {
                out[k] = binom[k] * t;
                t *= self.ratio;
            }
        }
    }
}

/// Coefficients of `h(., p)` for [`ScaledPoint::sum`]: `p_(n-k) C(n-1, k)`.
pub(crate) fn h_coefficients(shares: &[f64], binom: &[f64]) -> Vec<f64> {
    shares.iter().rev().zip(binom).map(|(p, c)| p * c).collect()
}
