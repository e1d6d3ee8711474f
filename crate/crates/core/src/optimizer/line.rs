//! Uniform scan of the two-level family with optional golden-section polish.

use super::{family_lower, quadrature_budget, two_contestant_result, Method, OptResult, TwoLevelFamily};
use crate::error::{Error, Result};
use crate::objective::{CostParams, Evaluator, ObjectiveSpec};
use crate::policy::Policy;
use crate::quadrature::QuadratureConfig;

const GOLDEN_ITERATIONS: usize = 60;

/// Relative difference below which two scanned values count as tied.
const TIE_TOL: f64 = 1e-12;

enum Oracle {
    Family(TwoLevelFamily),
    General(Evaluator, ObjectiveSpec, CostParams),
}

impl Oracle {
    fn value(&self, n: usize, p1: f64) -> Result<f64> {
        match self {
            Oracle::Family(f) => f.value(p1),
            Oracle::General(ev, spec, beta) => {
                Ok(ev.evaluate(spec, *beta, &Policy::two_level(n, p1)?)?.value)
            }
        }
    }
}

/// Best `two_level(n, p1)` over `steps` evenly spaced `p1` in
/// `[1/(n-1), 1]`; the lowest `p1` wins ties. With `refine`, a
/// golden-section search on the neighbouring cells may improve it.
///
/// Refuses objectives outside the structure theorem. ConvexCombo results
/// carry a certificate from the interval upper bounds of every cell.
pub fn two_level_line_search(
    spec: &ObjectiveSpec,
    beta: CostParams,
    n: usize,
    steps: usize,
    refine: bool,
    quad: &QuadratureConfig,
) -> Result<OptResult> {
    spec.validate()?;
    if steps < 2 {
        return Err(Error::Domain(format!("line search needs steps >= 2, got {steps}")));
    }
    let cond = spec.structure_condition(beta, n);
    if !cond.holds {
        return Err(Error::StructureUnavailable(format!(
            "{spec} with beta = {} violates the sign condition on e_j (k_j - beta); \
             the two-level structure is not guaranteed, use grid search instead",
            beta.beta()
        )));
    }
    if n == 2 {
        let hm = Policy::hm(2)?;
        let value = Evaluator::new(2, *quad)?.evaluate(spec, beta, &hm)?.value;
        let mut r = two_contestant_result(spec.alpha(), beta, value, Method::Line);
        if spec.alpha().is_none() {
            r.gap = None;
            r.certified = false;
        }
        return Ok(r);
    }

    let oracle = match spec {
        ObjectiveSpec::ConvexCombo { alpha } => {
            Oracle::Family(TwoLevelFamily::new(n, *alpha, beta, *quad)?)
        }
        _ => Oracle::General(Evaluator::new(n, *quad)?, spec.clone(), beta),
    };
    let lo = family_lower(n);
    let grid: Vec<f64> = (0..steps)
        .map(|k| {
            if k + 1 == steps {
                1.0
            } else {
                lo + (1.0 - lo) * k as f64 / (steps - 1) as f64
            }
        })
        .collect();
    let values: Vec<f64> = grid
        .iter()
        .map(|p1| oracle.value(n, *p1))
        .collect::<Result<_>>()?;
    let mut k_best = 0;
    for (k, v) in values.iter().enumerate() {
        if *v > values[k_best] + TIE_TOL * values[k_best].abs() {
            k_best = k;
        }
    }
    let (mut best_p1, mut best) = (grid[k_best], values[k_best]);
    let mut evaluations = steps;

    if refine {
        let a = grid[k_best.saturating_sub(1)];
        let b = grid[(k_best + 1).min(steps - 1)];
        let (p1, v, used) = golden_section(|p| oracle.value(n, p), a, b)?;
        evaluations += used;
        if v > best + TIE_TOL * best.abs() {
            best = v;
            best_p1 = p1;
        }
    }

    let mut gap = None;
    if let Oracle::Family(fam) = &oracle {
        let mut max_upper = best;
        for k in 0..steps - 1 {
            max_upper = max_upper.max(fam.upper(grid[k], grid[k + 1])?);
        }
        let alpha = spec.alpha().expect("family oracle is ConvexCombo");
        gap = Some(max_upper - best + 2.0 * quadrature_budget(n, alpha, quad));
    }

    let config = serde_json::json!({
        "objective": spec.to_string(),
        "n": n,
        "beta": beta.beta(),
        "steps": steps,
        "refine": refine,
        "quadrature": quad,
        "structure_transition": cond.transition,
        "p1": best_p1,
    });
    Ok(OptResult {
        policy: Policy::two_level(n, best_p1)?,
        value: best,
        gap,
        nodes: evaluations,
        method: Method::Line,
        certified: gap.is_some(),
        max_depth: None,
        config,
    })
}

fn golden_section<F: Fn(f64) -> Result<f64>>(f: F, mut a: f64, mut b: f64) -> Result<(f64, f64, usize)> {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    let mut used = 2;
    for _ in 0..GOLDEN_ITERATIONS {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d)?;
        }
        used += 1;
    }
    Ok(if fc >= fd { (c, fc, used) } else { (d, fd, used) })
}
