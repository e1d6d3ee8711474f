//! Active-set branch-and-bound over `p_1` for the ConvexCombo objective.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use super::{
    family_lower, quadrature_budget, two_contestant_result, ConstantsMode, Method, OptResult,
    TwoLevelFamily,
};
use crate::error::{Error, Result};
use crate::objective::{CostParams, Evaluator, ObjectiveSpec};
use crate::policy::Policy;
use crate::quadrature::QuadratureConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BnbConfig {
    pub epsilon: f64,
    pub constants_mode: ConstantsMode,
    pub quad: QuadratureConfig,
    pub max_nodes: usize,
}

impl BnbConfig {
    /// Picks a trapezoid rule whose error budget uses at most half of `epsilon`.
    pub fn new(epsilon: f64, n: usize, alpha: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::Domain(format!("epsilon must be > 0, got {epsilon}")));
        }
        let top = alpha * n as f64 + 1.0 - alpha;
        // Trapezoid error top/(2m) <= epsilon/4.
        let m = ((2.0 * top / epsilon).ceil() as usize).max(1000);
        Ok(Self {
            epsilon,
            constants_mode: ConstantsMode::Exact,
            quad: QuadratureConfig::trapezoid(m)?,
            max_nodes: 200_000,
        })
    }
}

/// An explored interval with its bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lower: f64,
    pub upper: f64,
    pub depth: usize,
}

/// Per-iteration history of a run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BnbTrace {
    /// Incumbent `L*` after each iteration.
    pub incumbents: Vec<f64>,
    /// `max U` over the active set after each iteration.
    pub active_upper: Vec<f64>,
    /// Every interval whose bounds were computed.
    pub intervals: Vec<Interval>,
}

struct Node {
    iv: Interval,
    g_lo: f64,
    g_hi: f64,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    /// Largest `U` first; among equal `U` the leftmost interval.
    fn cmp(&self, other: &Self) -> Ordering {
        self.iv
            .upper
            .total_cmp(&other.iv.upper)
            .then_with(|| other.iv.lo.total_cmp(&self.iv.lo))
    }
}

/// Theorem-style depth bound
/// `max{log2(C1 D/ε), β log2(C2 D^(1/β)/ε)} + 1`, `D = 1 - 1/(n-1)`.
pub fn depth_bound(c1: f64, c2: f64, beta: CostParams, n: usize, epsilon: f64) -> f64 {
    let b = beta.beta();
    let d = 1.0 - family_lower(n);
    let t1 = if c1 > 0.0 { (c1 * d / epsilon).log2() } else { f64::NEG_INFINITY };
    let t2 = if c2 > 0.0 {
        b * (c2 * d.powf(1.0 / b) / epsilon).log2()
    } else {
        f64::NEG_INFINITY
    };
    t1.max(t2).max(0.0) + 1.0
}

pub fn branch_and_bound(n: usize, alpha: f64, beta: CostParams, cfg: &BnbConfig) -> Result<OptResult> {
    run(n, alpha, beta, cfg, None)
}

pub fn branch_and_bound_traced(
    n: usize,
    alpha: f64,
    beta: CostParams,
    cfg: &BnbConfig,
) -> Result<(OptResult, BnbTrace)> {
    let mut trace = BnbTrace::default();
    let r = run(n, alpha, beta, cfg, Some(&mut trace))?;
    Ok((r, trace))
}

fn run(
    n: usize,
    alpha: f64,
    beta: CostParams,
    cfg: &BnbConfig,
    mut trace: Option<&mut BnbTrace>,
) -> Result<OptResult> {
    if !(cfg.epsilon > 0.0) {
        return Err(Error::Domain(format!("epsilon must be > 0, got {}", cfg.epsilon)));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Range {
            value: alpha,
            lo: 0.0,
            hi: 1.0,
        });
    }
    if n < 2 {
        return Err(Error::Domain(format!("contestant count n = {n} < 2")));
    }
    let delta_q = quadrature_budget(n, alpha, &cfg.quad);
    let eps_eff = cfg.epsilon - 2.0 * delta_q;
    if eps_eff <= 0.0 {
        return Err(Error::Precision(format!(
            "quadrature error {delta_q:.3e} (m = {}) leaves no budget for epsilon = {}; increase m",
            cfg.quad.m, cfg.epsilon
        )));
    }
    if n == 2 {
        let spec = ObjectiveSpec::convex(alpha)?;
        let hm = Policy::hm(2)?;
        let value = Evaluator::new(2, cfg.quad)?.evaluate(&spec, beta, &hm)?.value;
        return Ok(two_contestant_result(Some(alpha), beta, value, Method::Bnb));
    }

    let fam = TwoLevelFamily::new(n, alpha, beta, cfg.quad)?;
    let (c1, c2) = fam.gap_constants(cfg.constants_mode);
    let bound = depth_bound(c1, c2, beta, n, cfg.epsilon);
    let (lo, hi) = fam.domain();

    let make = |lo: f64, hi: f64, g_lo: f64, g_hi: f64, depth: usize| -> Result<Node> {
        let upper = fam.upper(lo, hi)?.max(g_lo.max(g_hi));
        Ok(Node {
            iv: Interval {
                lo,
                hi,
                lower: g_lo.max(g_hi),
                upper,
                depth,
            },
            g_lo,
            g_hi,
        })
    };

    let g_lo = fam.value(lo)?;
    let g_hi = fam.value(hi)?;
    let root = make(lo, hi, g_lo, g_hi, 0)?;
    // Ties keep the first (lowest p1) incumbent.
    let (mut best, mut best_p1) = if g_hi > g_lo { (g_hi, hi) } else { (g_lo, lo) };
    let mut nodes = 1;
    let mut max_depth = 0;
    if let Some(t) = trace.as_deref_mut() {
        t.intervals.push(root.iv);
    }
    let mut heap = BinaryHeap::new();
    heap.push(root);
    let mut certified = true;

    while let Some(top) = heap.peek() {
        if top.iv.upper <= best + eps_eff {
            break;
        }
        if nodes + 2 > cfg.max_nodes {
            certified = false;
            log::warn!("branch-and-bound stopped at the node limit {}", cfg.max_nodes);
            break;
        }
        let node = heap.pop().expect("peeked");
        let iv = node.iv;
        let mid = 0.5 * (iv.lo + iv.hi);
        let g_mid = fam.value(mid)?;
        let left = make(iv.lo, mid, node.g_lo, g_mid, iv.depth + 1)?;
        let right = make(mid, iv.hi, g_mid, node.g_hi, iv.depth + 1)?;
        nodes += 2;
        max_depth = max_depth.max(iv.depth + 1);
        if g_mid > best {
            best = g_mid;
            best_p1 = mid;
        }
        if let Some(t) = trace.as_deref_mut() {
            t.intervals.push(left.iv);
            t.intervals.push(right.iv);
        }
        heap.push(left);
        heap.push(right);
        if let Some(t) = trace.as_deref_mut() {
            t.incumbents.push(best);
            t.active_upper.push(heap.peek().map_or(best, |n| n.iv.upper));
        }
    }

    let max_upper = heap.peek().map_or(best, |n| n.iv.upper).max(best);
    let gap = (max_upper - best) + 2.0 * delta_q;
    let certified = certified && gap <= cfg.epsilon * (1.0 + 1e-12);
    let config = serde_json::json!({
        "objective": ObjectiveSpec::ConvexCombo { alpha }.to_string(),
        "n": n,
        "alpha": alpha,
        "beta": beta.beta(),
        "epsilon": cfg.epsilon,
        "epsilon_eff": eps_eff,
        "quadrature": cfg.quad,
        "quadrature_error": delta_q,
        "constants_mode": cfg.constants_mode,
        "c1": c1,
        "c2": c2,
        "depth_bound": bound,
        "max_nodes": cfg.max_nodes,
        "p1": best_p1,
    });
    Ok(OptResult {
        policy: Policy::two_level(n, best_p1)?,
        value: best,
        gap: Some(gap),
        nodes,
        method: Method::Bnb,
        certified,
        max_depth: Some(max_depth),
        config,
    })
}
