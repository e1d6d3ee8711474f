//! Optimal policy search.
//!
//! Covered objectives have optima of the form
//! `p_1 >= p_2 = ... = p_{n-1} >= p_n = 0`, a one-parameter family in `p_1`
//! over `[1/(n-1), 1]`. [`branch_and_bound`] certifies the ConvexCombo
//! optimum on that family, [`two_level_line_search`] scans it for any covered
//! objective, and [`grid_search`] brute-forces the whole ordered simplex on a
//! lattice without assuming the structure.

mod bnb;
mod grid;
mod line;

pub use bnb::{
    branch_and_bound, branch_and_bound_traced, depth_bound, BnbConfig, BnbTrace, Interval,
};
pub use grid::{count_lattice_policies, grid_search, GRID_CANDIDATE_LIMIT};
pub use line::two_level_line_search;

use serde::{Deserialize, Serialize};

use crate::bernstein::check_unit;
use crate::error::{Error, Result};
use crate::objective::{evaluate_hm_closed_form, CostParams};
use crate::policy::{classify_structure, Policy, StructureClass};
use crate::quadrature::{QuadratureConfig, Rule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Bnb,
    Grid,
    Line,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Bnb => "bnb",
            Method::Grid => "grid",
            Method::Line => "line",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bnb" => Ok(Method::Bnb),
            "grid" => Ok(Method::Grid),
            "line" => Ok(Method::Line),
            other => Err(Error::Domain(format!(
                "unknown method '{other}' (expected bnb, grid or line)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptResult {
    pub policy: Policy,
    pub value: f64,
    /// Certified bound on `OPT - value`, when the method provides one.
    pub gap: Option<f64>,
    pub nodes: usize,
    pub method: Method,
    pub certified: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_depth: Option<usize>,
    pub config: serde_json::Value,
}

impl OptResult {
    pub fn structure(&self, tol: f64) -> StructureClass {
        classify_structure(&self.policy, tol)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("OptResult serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            field: e.line(),
            offset: e.column(),
            message: e.to_string(),
        })
    }
}

/// `(c0, c1)` with `h(x, two_level(n, p1)) = c0(x) + c1(x) p1`.
pub fn c_decomposition(n: usize, x: f64) -> Result<(f64, f64)> {
    if n == 2 {
        return Err(Error::DegenerateFamily);
    }
    if n < 2 {
        return Err(Error::Domain(format!("contestant count n = {n} < 2")));
    }
    check_unit(x)?;
    Ok(c_pair(n, x))
}

fn c_pair(n: usize, x: f64) -> (f64, f64) {
    let deg = (n - 1) as i32;
    let a1 = x.powi(deg);
    // 1 - (1-x)^(n-1) without cancellation near x = 0.
    let not_last = -((n - 1) as f64 * (-x).ln_1p()).exp_m1();
    let c0 = (not_last - a1).max(0.0) / (n - 2) as f64;
    (c0, a1 - c0)
}

/// Lower end of the two-level family, `1/(n-1)` (the UNI policy).
pub fn family_lower(n: usize) -> f64 {
    1.0 / (n - 1) as f64
}

/// Which `C1, C2` to report for the depth bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstantsMode {
    /// Quadratures of `|c1|` and `|c1|^(1/β)`.
    Exact,
    /// Closed-form upper bounds.
    Rough,
}

/// The ConvexCombo objective restricted to the two-level family, with
/// `c0, c1` tabulated at the quadrature nodes.
#[derive(Debug, Clone)]
pub struct TwoLevelFamily {
    n: usize,
    alpha: f64,
    beta: CostParams,
    quad: QuadratureConfig,
    w: Vec<f64>,
    c0: Vec<f64>,
    c1: Vec<f64>,
}

impl TwoLevelFamily {
    pub fn new(n: usize, alpha: f64, beta: CostParams, quad: QuadratureConfig) -> Result<Self> {
        if n == 2 {
            return Err(Error::DegenerateFamily);
        }
        if n < 2 {
            return Err(Error::Domain(format!("contestant count n = {n} < 2")));
        }
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::Range {
                value: alpha,
                lo: 0.0,
                hi: 1.0,
            });
        }
        quad.validate()?;
        let nodes = quad.nodes();
        let (c0, c1) = nodes.iter().map(|(x, _)| c_pair(n, *x)).unzip();
        Ok(Self {
            n,
            alpha,
            beta,
            quad,
            w: nodes.iter().map(|(_, w)| *w).collect(),
            c0,
            c1,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn domain(&self) -> (f64, f64) {
        (family_lower(self.n), 1.0)
    }

    fn check(&self, p1: f64) -> Result<()> {
        let (lo, hi) = self.domain();
        if !(p1 >= lo - 1e-12 && p1 <= hi + 1e-12) {
            return Err(Error::Range { value: p1, lo, hi });
        }
        Ok(())
    }

    #[inline]
    fn integrand(&self, h: f64) -> f64 {
        let h = h.max(0.0);
        let r = crate::objective::pow(h, 1.0 / self.beta.beta());
        self.alpha * self.n as f64 * h * r + (1.0 - self.alpha) * r
    }

    /// `G(p1)`.
    pub fn value(&self, p1: f64) -> Result<f64> {
        self.check(p1)?;
        Ok(self
            .w
            .iter()
            .zip(self.c0.iter().zip(&self.c1))
            .map(|(w, (c0, c1))| w * self.integrand(c0 + c1 * p1))
            .sum())
    }

    /// `(L, U)` on `[lo, hi]`. `U` integrates the pointwise larger endpoint
    /// integrand; since `h` is affine in `p1`, that is `max(h(lo), h(hi))`.
    pub fn interval_bounds(&self, lo: f64, hi: f64) -> Result<(f64, f64)> {
        let (g_lo, g_hi) = (self.value(lo)?, self.value(hi)?);
        Ok((g_lo.max(g_hi), self.upper(lo, hi)?))
    }

    pub fn upper(&self, lo: f64, hi: f64) -> Result<f64> {
        self.check(lo)?;
        self.check(hi)?;
        if lo > hi {
            return Err(Error::Domain(format!("interval [{lo}, {hi}] is reversed")));
        }
        Ok(self
            .w
            .iter()
            .zip(self.c0.iter().zip(&self.c1))
            .map(|(w, (c0, c1))| w * self.integrand(c0 + (c1 * lo).max(c1 * hi)))
            .sum())
    }

    /// `(C1, C2)` of the gap bound `U - L <= C1 |I| + C2 |I|^(1/β)`.
    pub fn gap_constants(&self, mode: ConstantsMode) -> (f64, f64) {
        let b = self.beta.beta();
        let a = self.alpha;
        let nf = self.n as f64;
        match mode {
            ConstantsMode::Exact => {
                let int_abs: f64 = self.w.iter().zip(&self.c1).map(|(w, c)| w * c.abs()).sum();
                let int_pow: f64 = self
                    .w
                    .iter()
                    .zip(&self.c1)
                    .map(|(w, c)| w * c.abs().powf(1.0 / b))
                    .sum();
                (a * nf * (1.0 + 1.0 / b) * int_abs, (1.0 - a) * int_pow)
            }
            ConstantsMode::Rough => rough_constants(self.n, a, self.beta),
        }
    }

    /// Worst-case quadrature error of any `G` or `U` value: the integrands
    /// are increasing in `x`, vanish at 0 and are at most `α n + 1 - α` at 1.
    pub fn quadrature_error(&self) -> f64 {
        quadrature_budget(self.n, self.alpha, &self.quad)
    }
}

fn quadrature_budget(n: usize, alpha: f64, quad: &QuadratureConfig) -> f64 {
    let top = alpha * n as f64 + 1.0 - alpha;
    match quad.rule {
        Rule::RightRiemann => top / quad.m as f64,
        Rule::Trapezoid => top / (2.0 * quad.m as f64),
    }
}

/// `C1' = 2α(1 + 1/β)`, `C2' = (1-α)(β/(β+n-1) + (n-2)^(-1/β))`.
pub fn rough_constants(n: usize, alpha: f64, beta: CostParams) -> (f64, f64) {
    let b = beta.beta();
    let nf = n as f64;
    (
        2.0 * alpha * (1.0 + 1.0 / b),
        (1.0 - alpha) * (b / (b + nf - 1.0) + (nf - 2.0).powf(-1.0 / b)),
    )
}

/// `(L, U)` for `I = [lo, hi]` inside `[1/(n-1), 1]`.
pub fn interval_bounds(
    n: usize,
    alpha: f64,
    beta: CostParams,
    interval: (f64, f64),
    quad: &QuadratureConfig,
) -> Result<(f64, f64)> {
    TwoLevelFamily::new(n, alpha, beta, *quad)?.interval_bounds(interval.0, interval.1)
}

pub fn gap_constants(
    n: usize,
    alpha: f64,
    beta: CostParams,
    mode: ConstantsMode,
    quad: &QuadratureConfig,
) -> Result<(f64, f64)> {
    Ok(TwoLevelFamily::new(n, alpha, beta, *quad)?.gap_constants(mode))
}

/// The `n = 2` answer: only HM has `p_n = 0`.
fn two_contestant_result(alpha: Option<f64>, beta: CostParams, value: f64, method: Method) -> OptResult {
    let config = serde_json::json!({
        "n": 2,
        "beta": beta.beta(),
        "alpha": alpha,
        "short_circuit": "n = 2: HM is the only policy with p_n = 0",
        "closed_form": alpha.map(|a| evaluate_hm_closed_form(a, beta, 2)),
    });
    OptResult {
        policy: Policy::hm(2).expect("n = 2 is valid"),
        value,
        gap: Some(0.0),
        nodes: 0,
        method,
        certified: true,
        max_depth: Some(0),
        config,
    }
}
