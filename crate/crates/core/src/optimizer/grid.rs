//! Brute force over every ordered policy on a lattice.

use rayon::prelude::*;

use super::{Method, OptResult};
use crate::error::{Error, Result};
use crate::objective::{Compiled, CostParams, Evaluator, ObjectiveSpec};
use crate::policy::Policy;
use crate::quadrature::QuadratureConfig;

/// Largest candidate count [`grid_search`] will enumerate.
pub const GRID_CANDIDATE_LIMIT: u128 = 100_000_000;

const CHUNK: usize = 1 << 14;

/// Number of nonincreasing `n`-tuples of nonnegative integers summing to
/// `units` (partitions of `units` into at most `n` parts).
pub fn count_lattice_policies(units: usize, n: usize) -> u128 {
    // Partitions into at most n parts equal partitions into parts <= n.
    let mut ways = vec![0u128; units + 1];
    ways[0] = 1;
    for part in 1..=n.min(units.max(1)) {
        for total in part..=units {
            ways[total] = ways[total].saturating_add(ways[total - part]);
        }
    }
    ways[units]
}

fn lattice_units(granularity: f64) -> Result<usize> {
    if !(granularity > 0.0 && granularity <= 1.0) {
        return Err(Error::Domain(format!(
            "granularity must be in (0, 1], got {granularity}"
        )));
    }
    let units = (1.0 / granularity).round();
    if (units * granularity - 1.0).abs() > 1e-9 {
        return Err(Error::Domain(format!(
            "granularity {granularity} does not divide 1"
        )));
    }
    Ok(units as usize)
}

/// Visits tuples in decreasing lexicographic order (HM first).
fn enumerate<F: FnMut(&[u32])>(n: usize, units: usize, visit: &mut F) {
    fn rec<F: FnMut(&[u32])>(pos: usize, remaining: u32, cap: u32, cur: &mut Vec<u32>, visit: &mut F) {
        let n = cur.len();
        let slots = (n - pos) as u32;
        if slots == 1 {
            if remaining <= cap {
                cur[pos] = remaining;
                visit(cur);
            }
            return;
        }
        let lo = remaining.div_ceil(slots);
        let hi = cap.min(remaining);
        let mut v = hi;
        while v >= lo {
            cur[pos] = v;
            rec(pos + 1, remaining - v, v, cur, visit);
            if v == 0 {
                break;
            }
            v -= 1;
        }
    }
    let mut cur = vec![0u32; n];
    rec(0, units as u32, units as u32, &mut cur, visit);
}

#[derive(Debug, Clone, Copy)]
struct Best {
    value: f64,
    index: usize,
}

impl Best {
    fn better(a: Best, b: Best) -> Best {
        match a.value.total_cmp(&b.value) {
            std::cmp::Ordering::Greater => a,
            std::cmp::Ordering::Less => b,
            std::cmp::Ordering::Equal => {
                if a.index <= b.index {
                    a
                } else {
                    b
                }
            }
        }
    }
}

/// Lattice argmax of the objective over the ordered simplex with step
/// `granularity`, `p_n` unrestricted. Policies with `p_n > 0` are evaluated
/// through `g = h - p_n`. The uniform policy is skipped. Ties go to the
/// first tuple in decreasing lexicographic order.
pub fn grid_search(
    spec: &ObjectiveSpec,
    beta: CostParams,
    n: usize,
    granularity: f64,
    quad: &QuadratureConfig,
) -> Result<OptResult> {
    spec.validate()?;
    let units = lattice_units(granularity)?;
    let candidates = count_lattice_policies(units, n);
    if candidates > GRID_CANDIDATE_LIMIT {
        return Err(Error::Budget(format!(
            "grid search over n = {n} at granularity {granularity} needs {candidates} candidates \
             (limit {GRID_CANDIDATE_LIMIT}); use two_level_line_search instead"
        )));
    }
    let ev = Evaluator::new(n, *quad)?;
    let compiled = Compiled::new(spec, beta, n);
    let scale = 1.0 / units as f64;

    let mut buffer: Vec<u32> = Vec::with_capacity(CHUNK * n);
    let mut buffer_start = 0usize;
    let mut seen = 0usize;
    let mut best: Option<Best> = None;
    let mut best_tuple: Vec<u32> = Vec::new();
    let mut evaluated = 0usize;

    let flush = |buffer: &mut Vec<u32>, start: usize, best: &mut Option<Best>, best_tuple: &mut Vec<u32>| {
        let chunk_best = buffer
            .par_chunks(n)
            .enumerate()
            .filter(|(_, t)| t.iter().any(|v| *v != t[0]))
            .map(|(k, t)| {
                let shares: Vec<f64> = t.iter().map(|v| *v as f64 * scale).collect();
                Best {
                    value: ev.integrate_shares(&compiled, &shares),
                    index: start + k,
                }
            })
            .reduce_with(Best::better);
        if let Some(c) = chunk_best {
            let merged = best.map_or(c, |b| Best::better(b, c));
            if merged.index == c.index {
                let off = (c.index - start) * n;
                *best_tuple = buffer[off..off + n].to_vec();
            }
            *best = Some(merged);
        }
        buffer.clear();
    };

    enumerate(n, units, &mut |t: &[u32]| {
        if t.iter().any(|v| *v != t[0]) {
            evaluated += 1;
        }
        buffer.extend_from_slice(t);
        seen += 1;
        if buffer.len() == CHUNK * n {
            flush(&mut buffer, buffer_start, &mut best, &mut best_tuple);
            buffer_start = seen;
        }
    });
    flush(&mut buffer, buffer_start, &mut best, &mut best_tuple);

    let best = best.ok_or_else(|| Error::Domain("lattice has no nontrivial policy".into()))?;
    let shares: Vec<f64> = best_tuple.iter().map(|v| *v as f64 * scale).collect();
    let policy = Policy::new(normalize_lattice(shares))?;
    let config = serde_json::json!({
        "objective": spec.to_string(),
        "n": n,
        "beta": beta.beta(),
        "granularity": granularity,
        "quadrature": quad,
        "candidates": candidates.to_string(),
        "argmax_units": best_tuple,
    });
    Ok(OptResult {
        policy,
        value: best.value,
        gap: None,
        nodes: evaluated,
        method: Method::Grid,
        certified: false,
        max_depth: None,
        config,
    })
}

/// Removes the rounding residue of `sum k_i/K` from the top share.
fn normalize_lattice(mut shares: Vec<f64>) -> Vec<f64> {
    let residue = 1.0 - shares.iter().sum::<f64>();
    shares[0] += residue;
    shares
}
