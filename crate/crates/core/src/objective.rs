//! Designer objectives in equilibrium-free form.
//!
//! At the symmetric equilibrium a contestant's quality is
//! `q = g(U)^(1/β)` with `U` uniform and `g = h - p_n`, so every objective
//! becomes a one-dimensional integral of powers of `g`. When `p_n = 0`
//! (the reduced form) `g = h`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bernstein::{binomial_row, h_coefficients, ScaledPoint};
use crate::error::{Error, Result};
use crate::format::sig9;
use crate::policy::Policy;
use crate::quadrature::QuadratureConfig;

/// Largest `p_n` accepted by the reduced form.
pub const REDUCTION_TOL: f64 = 1e-12;

/// Cost exponent: producing quality `q` costs `q^β`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct CostParams {
    beta: f64,
}

impl CostParams {
    pub fn new(beta: f64) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::Domain(format!("cost exponent beta must be > 0, got {beta}")));
        }
        Ok(Self { beta })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

impl TryFrom<f64> for CostParams {
    type Error = Error;
    fn try_from(beta: f64) -> Result<Self> {
        Self::new(beta)
    }
}

impl From<CostParams> for f64 {
    fn from(c: CostParams) -> f64 {
        c.beta
    }
}

/// One term `coef * E[q^exponent]` of a posynomial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PosyTerm {
    pub coef: f64,
    pub exponent: f64,
}

impl PosyTerm {
    pub fn new(coef: f64, exponent: f64) -> Self {
        Self { coef, exponent }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "objective", rename_all = "snake_case")]
pub enum ObjectiveSpec {
    /// `α W + (1-α) Q`: user welfare against average quality.
    ConvexCombo { alpha: f64 },
    /// `sum_j e_j E[q^(k_j)]`, exponents strictly increasing.
    Posynomial { terms: Vec<PosyTerm> },
    /// Expected best quality `E[q_(1)]`.
    MaxOrderStat,
    /// `sum_λ E[exp(λ q)]` through its Taylor series truncated at degree `M`.
    /// `None` picks `M = ceil(3λ) + 20` per rate.
    Exponential {
        lambdas: Vec<f64>,
        truncation: Option<usize>,
    },
    /// User welfare plus a platform posynomial plus contestant utilities.
    SocialWelfare { platform_terms: Vec<PosyTerm> },
}

impl ObjectiveSpec {
    pub fn convex(alpha: f64) -> Result<Self> {
        let s = Self::ConvexCombo { alpha };
        s.validate()?;
        Ok(s)
    }

    /// Sorts the terms by exponent; duplicate exponents are rejected.
    pub fn posynomial(mut terms: Vec<PosyTerm>) -> Result<Self> {
        terms.sort_by(|a, b| a.exponent.total_cmp(&b.exponent));
        let s = Self::Posynomial { terms };
        s.validate()?;
        Ok(s)
    }

    pub fn exponential(lambdas: Vec<f64>, truncation: Option<usize>) -> Result<Self> {
        let s = Self::Exponential {
            lambdas,
            truncation,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn social_welfare(mut platform_terms: Vec<PosyTerm>) -> Result<Self> {
        platform_terms.sort_by(|a, b| a.exponent.total_cmp(&b.exponent));
        let s = Self::SocialWelfare { platform_terms };
        s.validate()?;
        Ok(s)
    }

    /// The inverse-S platform utility `2q^3 - 3q^2 + 2q`.
    pub fn inverse_s() -> Self {
        Self::posynomial(vec![
            PosyTerm::new(2.0, 1.0),
            PosyTerm::new(-3.0, 2.0),
            PosyTerm::new(2.0, 3.0),
        ])
        .expect("valid terms")
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::ConvexCombo { alpha } => {
                if !(0.0..=1.0).contains(alpha) {
                    return Err(Error::Range {
                        value: *alpha,
                        lo: 0.0,
                        hi: 1.0,
                    });
                }
            }
            Self::Posynomial { terms } => {
                if terms.is_empty() {
                    return Err(Error::Domain("posynomial needs at least one term".into()));
                }
                check_terms(terms)?;
            }
            Self::SocialWelfare { platform_terms } => {
                check_terms(platform_terms)?;
                if let Some(t) = platform_terms.iter().find(|t| t.coef < 0.0) {
                    return Err(Error::Domain(format!(
                        "social welfare platform coefficients must be >= 0, got {}",
                        t.coef
                    )));
                }
            }
            Self::MaxOrderStat => {}
            Self::Exponential {
                lambdas,
                truncation,
            } => {
                if lambdas.is_empty() {
                    return Err(Error::Domain("exponential utility needs a rate".into()));
                }
                if let Some(l) = lambdas.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
                    return Err(Error::Domain(format!("rate lambda must be > 0, got {l}")));
                }
                if *truncation == Some(0) {
                    return Err(Error::Domain("truncation M must be >= 1".into()));
                }
            }
        }
        Ok(())
    }

    pub fn alpha(&self) -> Option<f64> {
        match self {
            Self::ConvexCombo { alpha } => Some(*alpha),
            _ => None,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::ConvexCombo { .. } => "convex",
            Self::Posynomial { .. } => "posynomial",
            Self::MaxOrderStat => "orderstat",
            Self::Exponential { .. } => "exp",
            Self::SocialWelfare { .. } => "social",
        }
    }

    /// Whether the two-level structure theorem covers this objective, with
    /// the posynomial sign transition when one applies.
    pub fn structure_condition(&self, beta: CostParams, n: usize) -> PosyCondition {
        match self {
            Self::ConvexCombo { alpha } => {
                let terms = [
                    PosyTerm::new(1.0 - alpha, 1.0),
                    PosyTerm::new(alpha * n as f64, beta.beta() + 1.0),
                ];
                check_posynomial_condition(&terms, beta)
            }
            Self::Posynomial { terms } => check_posynomial_condition(terms, beta),
            Self::MaxOrderStat => PosyCondition {
                holds: true,
                transition: None,
            },
            Self::Exponential { .. } => PosyCondition {
                holds: true,
                transition: None,
            },
            Self::SocialWelfare { platform_terms } => {
                let mut terms = platform_terms.clone();
                let k = beta.beta() + 1.0;
                match terms.iter_mut().find(|t| t.exponent == k) {
                    Some(t) => t.coef += n as f64,
                    None => terms.push(PosyTerm::new(n as f64, k)),
                }
                terms.sort_by(|a, b| a.exponent.total_cmp(&b.exponent));
                check_posynomial_condition(&terms, beta)
            }
        }
    }
}

fn check_terms(terms: &[PosyTerm]) -> Result<()> {
    for t in terms {
        if !(t.exponent.is_finite() && t.exponent > 0.0) || !t.coef.is_finite() {
            return Err(Error::Domain(format!(
                "posynomial term {}:{} needs a finite coefficient and exponent > 0",
                t.coef, t.exponent
            )));
        }
    }
    if terms.windows(2).any(|w| w[1].exponent <= w[0].exponent) {
        return Err(Error::Domain(
            "posynomial exponents must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Default Taylor degree for rate `λ`.
pub fn default_truncation(lambda: f64) -> usize {
    (3.0 * lambda).ceil() as usize + 20
}

/// `e^λ λ^(M+1) / (M+1)!`, bounding the Taylor tail of `E[exp(λ q)]` for `q <= 1`.
pub fn truncation_remainder(lambda: f64, m: usize) -> f64 {
    let k = (m + 1) as f64;
    let ln_factorial: f64 = (1..=m + 1).map(|j| (j as f64).ln()).sum();
    (lambda + k * lambda.ln() - ln_factorial).exp()
}

/// Outcome of the posynomial sign test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PosyCondition {
    pub holds: bool,
    /// Number of leading terms with `e_j (k_j - β) <= 0`; the last such index
    /// is the transition `j*` (1-based). `None` when the test does not apply
    /// or fails.
    pub transition: Option<usize>,
}

/// Tests that `e_j (k_j - β)`, in increasing-exponent order, is nonpositive
/// and then nonnegative (either part may be empty).
pub fn check_posynomial_condition(terms: &[PosyTerm], beta: CostParams) -> PosyCondition {
    let signs: Vec<i8> = terms
        .iter()
        .map(|t| {
            let v = t.coef * (t.exponent - beta.beta());
            if v.abs() <= 1e-12 {
                0
            } else if v > 0.0 {
                1
            } else {
                -1
            }
        })
        .collect();
    let first_pos = signs.iter().position(|s| *s > 0).unwrap_or(signs.len());
    let holds = signs[first_pos..].iter().all(|s| *s >= 0);
    PosyCondition {
        holds,
        transition: holds.then_some(first_pos),
    }
}

impl fmt::Display for ObjectiveSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = |ts: &[PosyTerm]| {
            ts.iter()
                .map(|t| format!("{}:{}", sig9(t.coef), sig9(t.exponent)))
                .collect::<Vec<_>>()
                .join(",")
        };
        match self {
            Self::ConvexCombo { alpha } => write!(f, "objective=convex alpha={}", sig9(*alpha)),
            Self::Posynomial { terms: ts } => write!(f, "objective=posynomial terms={}", terms(ts)),
            Self::MaxOrderStat => f.write_str("objective=orderstat"),
            Self::Exponential {
                lambdas,
                truncation,
            } => {
                let ls: Vec<String> = lambdas.iter().map(|l| sig9(*l)).collect();
                write!(f, "objective=exp lambdas={}", ls.join(","))?;
                if let Some(m) = truncation {
                    write!(f, " truncation={m}")?;
                }
                Ok(())
            }
            Self::SocialWelfare { platform_terms } => {
                f.write_str("objective=social")?;
                if !platform_terms.is_empty() {
                    write!(f, " terms={}", terms(platform_terms))?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for ObjectiveSpec {
    type Err = Error;

    /// Parses the flat `key=value` form, e.g. `objective=convex alpha=0.24`.
    fn from_str(s: &str) -> Result<Self> {
        let mut kind = None;
        let mut alpha = None;
        let mut terms = None;
        let mut lambdas = None;
        let mut truncation = None;
        let mut offset = 0;
        for (k, token) in s.split(' ').enumerate() {
            let at = offset;
            offset += token.len() + 1;
            if token.is_empty() {
                continue;
            }
            let err = |message: String| Error::Parse {
                field: k + 1,
                offset: at,
                message,
            };
            let (key, value) = token
                .split_once('=')
                .ok_or_else(|| err(format!("expected key=value, got '{token}'")))?;
            let num = |v: &str| v.parse::<f64>().map_err(|_| err(format!("'{v}' is not a number")));
            match key {
                "objective" => kind = Some(value.to_string()),
                "alpha" => alpha = Some(num(value)?),
                "terms" => {
                    let mut ts = Vec::new();
                    for part in value.split(',').filter(|p| !p.is_empty()) {
                        let (c, e) = part
                            .split_once(':')
                            .ok_or_else(|| err(format!("term '{part}' is not coef:exponent")))?;
                        ts.push(PosyTerm::new(num(c)?, num(e)?));
                    }
                    terms = Some(ts);
                }
                "lambdas" | "lambda" => {
                    lambdas = Some(value.split(',').map(num).collect::<Result<Vec<_>>>()?);
                }
                "truncation" | "M" => {
                    truncation = Some(
                        value
                            .parse::<usize>()
                            .map_err(|_| err(format!("'{value}' is not a count")))?,
                    );
                }
                other => return Err(err(format!("unknown key '{other}'"))),
            }
        }
        let missing = |what: &str| Error::Parse {
            field: 0,
            offset: 0,
            message: format!("missing {what}"),
        };
        match kind.as_deref() {
            Some("convex") => Self::convex(alpha.ok_or_else(|| missing("alpha"))?),
            Some("posynomial") => Self::posynomial(terms.ok_or_else(|| missing("terms"))?),
            Some("orderstat") => Ok(Self::MaxOrderStat),
            Some("exp") => Self::exponential(lambdas.ok_or_else(|| missing("lambdas"))?, truncation),
            Some("social") => Self::social_welfare(terms.unwrap_or_default()),
            Some(other) => Err(Error::Parse {
                field: 1,
                offset: 0,
                message: format!("unknown objective '{other}'"),
            }),
            None => Err(missing("objective=")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kernel {
    /// `g^e`
    Plain,
    /// `h g^e`
    Welfare,
    /// `x^(n-1) g^e`
    TopOrder,
}

#[derive(Debug, Clone, Copy)]
struct Term {
    coef: f64,
    exponent: f64,
    kernel: Kernel,
}

/// An objective expanded into kernel terms for a fixed `(β, n)`.
#[derive(Debug, Clone)]
pub(crate) struct Compiled {
    n: usize,
    terms: Vec<Term>,
    /// Sum of coefficients of exponent-0 terms, integrated exactly.
    constant: f64,
    user_utility: bool,
}

impl Compiled {
    pub(crate) fn new(spec: &ObjectiveSpec, beta: CostParams, n: usize) -> Self {
        let inv = 1.0 / beta.beta();
        let nf = n as f64;
        let term = |coef, exponent, kernel| Term {
            coef,
            exponent,
            kernel,
        };
        let mut terms = Vec::new();
        let mut constant = 0.0;
        let mut user_utility = false;
        match spec {
            ObjectiveSpec::ConvexCombo { alpha } => {
                terms.push(term(alpha * nf, inv, Kernel::Welfare));
                terms.push(term(1.0 - alpha, inv, Kernel::Plain));
            }
            ObjectiveSpec::Posynomial { terms: ts } => {
                for t in ts {
                    terms.push(term(t.coef, t.exponent * inv, Kernel::Plain));
                }
            }
            ObjectiveSpec::MaxOrderStat => terms.push(term(nf, inv, Kernel::TopOrder)),
            ObjectiveSpec::Exponential {
                lambdas,
                truncation,
            } => {
                let mut by_degree: Vec<f64> = Vec::new();
                for &l in lambdas {
                    let m = truncation.unwrap_or_else(|| default_truncation(l));
                    if by_degree.len() < m + 1 {
                        by_degree.resize(m + 1, 0.0);
                    }
                    let mut c = 1.0;
                    for (j, slot) in by_degree.iter_mut().enumerate().take(m + 1) {
                        if j > 0 {
                            c *= l / j as f64;
                        }
                        *slot += c;
                    }
                }
                constant += by_degree[0];
                for (j, c) in by_degree.iter().enumerate().skip(1) {
                    terms.push(term(*c, j as f64 * inv, Kernel::Plain));
                }
            }
            ObjectiveSpec::SocialWelfare { platform_terms } => {
                terms.push(term(nf, inv, Kernel::Welfare));
                for t in platform_terms {
                    terms.push(term(t.coef, t.exponent * inv, Kernel::Plain));
                }
                user_utility = true;
            }
        }
        Self {
            n,
            terms,
            constant,
            user_utility,
        }
    }

    /// Non-constant part of the integrand; `g = h - p_n` clamped at 0.
    #[inline]
    pub(crate) fn integrand(&self, h: f64, g: f64, xpow: f64) -> f64 {
        let g = g.max(0.0);
        let mut acc = 0.0;
        for t in &self.terms {
            let base = t.coef * pow(g, t.exponent);
            acc += match t.kernel {
                Kernel::Plain => base,
                Kernel::Welfare => h * base,
                Kernel::TopOrder => xpow * base,
            };
        }
        acc
    }

    /// Exact contributions outside the integral.
    pub(crate) fn offset(&self, last: f64) -> f64 {
        let utility = if self.user_utility { self.n as f64 * last } else { 0.0 };
        self.constant + utility
    }

    /// `d/dh` of the reduced integrand: the common weight multiplying `a_i`
    /// in every partial derivative.
    #[inline]
    pub(crate) fn weight(&self, h: f64, xpow: f64) -> f64 {
        let h = h.max(f64::MIN_POSITIVE);
        let mut acc = 0.0;
        for t in &self.terms {
            acc += match t.kernel {
                Kernel::Plain => t.coef * t.exponent * pow(h, t.exponent - 1.0),
                Kernel::Welfare => t.coef * (1.0 + t.exponent) * pow(h, t.exponent),
                Kernel::TopOrder => t.coef * t.exponent * xpow * pow(h, t.exponent - 1.0),
            };
        }
        acc
    }

    fn has_top_order(&self) -> bool {
        self.terms.iter().any(|t| t.kernel == Kernel::TopOrder)
    }
}

/// `g^e` with fast paths for the exponents that dominate sweeps.
#[inline]
pub(crate) fn pow(g: f64, e: f64) -> f64 {
    if e == 1.0 {
        g
    } else if e == 0.5 {
        g.sqrt()
    } else if e == 2.0 {
        g * g
    } else if e == 0.0 {
        1.0
    } else if e == 0.25 {
        g.sqrt().sqrt()
    } else if e.fract() == 0.0 && e.abs() < 64.0 {
        g.powi(e as i32)
    } else {
        g.powf(e)
    }
}

/// A quadrature value with its worst-case error for monotone integrands.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub value: f64,
    pub error_bound: f64,
}

/// Partial derivatives `d_1..d_(n-1)` with an estimate of their quadrature
/// error (discrete total variation over `m`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gradient {
    pub values: Vec<f64>,
    pub error_estimate: f64,
}

/// Quadrature nodes prepared for one contestant count.
#[derive(Debug, Clone)]
pub struct Evaluator {
    n: usize,
    quad: QuadratureConfig,
    x: Vec<f64>,
    w: Vec<f64>,
    pts: Vec<ScaledPoint>,
    xpow: Vec<f64>,
    binom: Vec<f64>,
}

impl Evaluator {
    pub fn new(n: usize, quad: QuadratureConfig) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!("contestant count n = {n} < 2")));
        }
        quad.validate()?;
        let deg = n - 1;
        let nodes = quad.nodes();
        Ok(Self {
            n,
            quad,
            x: nodes.iter().map(|(x, _)| *x).collect(),
            w: nodes.iter().map(|(_, w)| *w).collect(),
            pts: nodes.iter().map(|(x, _)| ScaledPoint::new(deg, *x)).collect(),
            xpow: nodes.iter().map(|(x, _)| x.powi(deg as i32)).collect(),
            binom: binomial_row(deg),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn quad(&self) -> &QuadratureConfig {
        &self.quad
    }

    pub(crate) fn nodes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.x.iter().copied().zip(self.w.iter().copied())
    }

    /// `h(x_j, p)` at every node.
    pub(crate) fn h_values(&self, shares: &[f64], out: &mut Vec<f64>) {
        let coef = h_coefficients(shares, &self.binom);
        out.clear();
        out.extend(self.pts.iter().map(|pt| pt.sum(&coef)));
    }

    fn check_n(&self, p: &Policy) -> Result<()> {
        if p.n() != self.n {
            return Err(Error::Domain(format!(
                "policy has {} shares, evaluator built for n = {}",
                p.n(),
                self.n
            )));
        }
        Ok(())
    }

    pub(crate) fn integrate_shares(&self, c: &Compiled, shares: &[f64]) -> f64 {
        let coef = h_coefficients(shares, &self.binom);
        let last = shares[shares.len() - 1];
        let top_order = c.has_top_order();
        let mut acc = 0.0;
        for j in 0..self.pts.len() {
            let h = self.pts[j].sum(&coef);
            let xp = if top_order { self.xpow[j] } else { 0.0 };
            acc += self.w[j] * c.integrand(h, h - last, xp);
        }
        acc + c.offset(last)
    }

    fn bound(&self, c: &Compiled, p: &Policy) -> f64 {
        let f0 = c.integrand(p.last(), 0.0, 0.0);
        let f1 = c.integrand(p.top(), p.top() - p.last(), 1.0);
        self.quad.monotone_error_bound(f0, f1)
    }

    /// Reduced-form objective; requires `p_n = 0`.
    pub fn evaluate(&self, spec: &ObjectiveSpec, beta: CostParams, p: &Policy) -> Result<Evaluation> {
        check_reduced(p)?;
        self.evaluate_general(spec, beta, p)
    }

    /// Objective through `g = h - p_n`, valid for every policy.
    pub fn evaluate_general(
        &self,
        spec: &ObjectiveSpec,
        beta: CostParams,
        p: &Policy,
    ) -> Result<Evaluation> {
        self.check_n(p)?;
        spec.validate()?;
        let c = Compiled::new(spec, beta, self.n);
        Ok(Evaluation {
            value: self.integrate_shares(&c, p.shares()),
            error_bound: self.bound(&c, p),
        })
    }

    pub fn gradient(&self, spec: &ObjectiveSpec, beta: CostParams, p: &Policy) -> Result<Gradient> {
        self.check_n(p)?;
        check_reduced(p)?;
        spec.validate()?;
        let c = Compiled::new(spec, beta, self.n);
        let n = self.n;
        let coef = h_coefficients(p.shares(), &self.binom);
        let mut row = vec![0.0; n];
        let mut d = vec![0.0; n - 1];
        let mut prev = vec![0.0; n - 1];
        let mut variation = vec![0.0; n - 1];
        for j in 0..self.pts.len() {
            let pt = &self.pts[j];
            let h = pt.sum(&coef);
            let q = c.weight(h, self.xpow[j]);
            pt.row(&self.binom, &mut row);
            for i in 1..n {
                // a_i sits at power-basis slot n - i.
                let f = q * row[n - i];
                d[i - 1] += self.w[j] * f;
                variation[i - 1] += (f - prev[i - 1]).abs();
                prev[i - 1] = f;
            }
        }
        let m = self.quad.m as f64;
        let error_estimate = variation.iter().fold(0.0_f64, |a, v| a.max(*v)) / m;
        Ok(Gradient {
            values: d,
            error_estimate,
        })
    }

    /// The weight `q(x)` multiplying `a_i(x)` in every partial derivative.
    pub fn gradient_weight(&self, spec: &ObjectiveSpec, beta: CostParams, p: &Policy, x: f64) -> Result<f64> {
        check_reduced(p)?;
        let c = Compiled::new(spec, beta, self.n);
        let h = crate::bernstein::h_eval(p, x)?;
        Ok(c.weight(h, x.powi(self.n as i32 - 1)))
    }
}

fn check_reduced(p: &Policy) -> Result<()> {
    if p.last() > REDUCTION_TOL {
        return Err(Error::ReductionPrecondition {
            last_share: p.last(),
        });
    }
    Ok(())
}

/// Pointwise reduced integrand, including exactly-integrated constants.
pub fn reduced_integrand(spec: &ObjectiveSpec, beta: CostParams, p: &Policy, x: f64) -> Result<f64> {
    check_reduced(p)?;
    spec.validate()?;
    let c = Compiled::new(spec, beta, p.n());
    let h = crate::bernstein::h_eval(p, x)?;
    Ok(c.integrand(h, h, x.powi(p.n() as i32 - 1)) + c.offset(p.last()))
}

pub fn evaluate(spec: &ObjectiveSpec, beta: CostParams, p: &Policy, quad: &QuadratureConfig) -> Result<f64> {
    Ok(evaluate_with_error(spec, beta, p, quad)?.value)
}

pub fn evaluate_with_error(
    spec: &ObjectiveSpec,
    beta: CostParams,
    p: &Policy,
    quad: &QuadratureConfig,
) -> Result<Evaluation> {
    Evaluator::new(p.n(), *quad)?.evaluate(spec, beta, p)
}

pub fn evaluate_general(
    spec: &ObjectiveSpec,
    beta: CostParams,
    p: &Policy,
    quad: &QuadratureConfig,
) -> Result<Evaluation> {
    Evaluator::new(p.n(), *quad)?.evaluate_general(spec, beta, p)
}

pub fn gradient(spec: &ObjectiveSpec, beta: CostParams, p: &Policy, quad: &QuadratureConfig) -> Result<Gradient> {
    Evaluator::new(p.n(), *quad)?.gradient(spec, beta, p)
}

/// `α β n / (β n + n - 1) + (1 - α) β / (β + n - 1)`, the winner-take-all
/// value. Requires `n >= 2`.
pub fn evaluate_hm_closed_form(alpha: f64, beta: CostParams, n: usize) -> f64 {
    let b = beta.beta();
    let nf = n as f64;
    alpha * b * nf / (b * nf + nf - 1.0) + (1.0 - alpha) * b / (b + nf - 1.0)
}
