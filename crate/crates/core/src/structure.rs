//! Numerical checks of the structural facts behind the two-level optimum:
//! sign changes, quasiconvex gradients, Schur direction and kernel minors.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bernstein::bernstein;
use crate::error::{Error, Result};
use crate::objective::{CostParams, Evaluator, ObjectiveSpec};
use crate::policy::Policy;
use crate::quadrature::{QuadratureConfig, Rule};

/// Sign changes of a real sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignPattern {
    /// Strict sign changes, zeros ignored.
    pub s_minus: usize,
    /// Sign changes when every zero takes the sign that maximizes the count.
    pub s_plus: usize,
    /// Signs of the nonzero entries, in order.
    pub pattern: Vec<i8>,
    /// Every entry was zero.
    pub degenerate: bool,
}

pub fn sign_changes(seq: &[f64], zero_tol: f64) -> Result<SignPattern> {
    if seq.is_empty() {
        return Err(Error::Domain("sign_changes needs a nonempty sequence".into()));
    }
    let signs: Vec<i8> = seq
        .iter()
        .map(|v| {
            if v.abs() <= zero_tol {
                0
            } else if *v > 0.0 {
                1
            } else {
                -1
            }
        })
        .collect();
    let pattern: Vec<i8> = signs.iter().copied().filter(|s| *s != 0).collect();
    let s_minus = pattern.windows(2).filter(|w| w[0] != w[1]).count();
    if pattern.is_empty() {
        return Ok(SignPattern {
            s_minus: 0,
            s_plus: seq.len() - 1,
            pattern,
            degenerate: true,
        });
    }
    // best[0] ends in -, best[1] ends in +; None marks an impossible ending.
    let allowed = |s: i8| -> [bool; 2] {
        match s {
            -1 => [true, false],
            1 => [false, true],
            _ => [true, true],
        }
    };
    let first = allowed(signs[0]);
    let mut best: [Option<usize>; 2] = [first[0].then_some(0), first[1].then_some(0)];
    for s in &signs[1..] {
        let ok = allowed(*s);
        let mut next = [None, None];
        for (end, slot) in next.iter_mut().enumerate() {
            if !ok[end] {
                continue;
            }
            let stay = best[end];
            let flip = best[1 - end].map(|c| c + 1);
            *slot = stay.max(flip);
        }
        best = next;
    }
    let s_plus = best[0].max(best[1]).expect("some ending is always feasible");
    Ok(SignPattern {
        s_minus,
        s_plus,
        pattern,
        degenerate: false,
    })
}

/// Which allowed plateau placement applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlateauCase {
    /// Decreasing then increasing; the plateau touches the minimum.
    Valley,
    /// Nonincreasing throughout; the plateau is the last pair.
    Decreasing,
    /// Nondecreasing throughout; the plateau is the first pair.
    Increasing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuasiconvexityReport {
    pub is_quasiconvex: bool,
    /// 1-based index of the leftmost minimizer.
    pub transition_index: Option<usize>,
    /// 1-based `i` with `d_i = d_(i+1)` within tolerance.
    pub plateau_locations: Vec<usize>,
    pub violations: Vec<String>,
    /// All entries equal within tolerance.
    pub degenerate: bool,
    pub plateau_case: Option<PlateauCase>,
}

fn diff_signs(seq: &[f64], tol: f64) -> Vec<i8> {
    seq.windows(2)
        .map(|w| {
            let d = w[1] - w[0];
            if d.abs() <= tol {
                0
            } else if d > 0.0 {
                1
            } else {
                -1
            }
        })
        .collect()
}

/// Shape-only check: no rise is ever followed by a fall.
fn shape_report(seq: &[f64], tol: f64) -> QuasiconvexityReport {
    let signs = diff_signs(seq, tol);
    let mut violations = Vec::new();
    let first_up = signs.iter().position(|s| *s == 1);
    let last_down = signs.iter().rposition(|s| *s == -1);
    if let (Some(u), Some(d)) = (first_up, last_down) {
        if u < d {
            violations.push(format!(
                "rises between entries {} and {} but falls again between {} and {}",
                u + 1,
                u + 2,
                d + 1,
                d + 2
            ));
        }
    }
    let plateau_locations: Vec<usize> = signs
        .iter()
        .enumerate()
        .filter(|(_, s)| **s == 0)
        .map(|(i, _)| i + 1)
        .collect();
    let degenerate = !signs.is_empty() && plateau_locations.len() == signs.len();
    QuasiconvexityReport {
        is_quasiconvex: violations.is_empty(),
        transition_index: violations.is_empty().then(|| last_down.map_or(1, |d| d + 2)),
        plateau_locations,
        violations,
        degenerate,
        plateau_case: None,
    }
}

/// Tolerance for comparing adjacent gradient entries.
pub fn gradient_tolerance(d: &[f64], quadrature_error: f64) -> f64 {
    1e-9 * d.iter().fold(0.0_f64, |a, v| a.max(v.abs())) + quadrature_error
}

/// Checks that `d_1..d_(n-1)` falls then rises, that equal neighbours only
/// occur next to the minimum (or at the free end of a monotone sequence),
/// and that at most one such pair exists.
pub fn check_gradient_quasiconvexity(d: &[f64], p: &Policy, tol: f64) -> QuasiconvexityReport {
    let n = p.n();
    let mut report = shape_report(d, tol);
    if d.len() + 1 != n {
        report.violations.push(format!(
            "gradient has {} entries, expected n - 1 = {}",
            d.len(),
            n - 1
        ));
        report.is_quasiconvex = false;
        report.transition_index = None;
        return report;
    }
    if report.degenerate {
        log::debug!("gradient is constant within {tol:.3e}");
        return report;
    }
    if !report.plateau_locations.is_empty() && n <= 4 {
        log::warn!("plateau placement checked at n = {n} <= 4, where constant stretches are not ruled out");
    }
    let signs = diff_signs(d, tol);
    let first_up = signs.iter().position(|s| *s == 1);
    let last_down = signs.iter().rposition(|s| *s == -1);
    let (lo, hi, case) = match (last_down, first_up) {
        (Some(a), Some(b)) => (a + 1, b, PlateauCase::Valley),
        (Some(a), None) => (a + 1, signs.len(), PlateauCase::Decreasing),
        (None, Some(b)) => (0, b, PlateauCase::Increasing),
        (None, None) => unreachable!("non-degenerate sequence has a strict step"),
    };
    for i in &report.plateau_locations {
        if *i - 1 < lo || *i - 1 >= hi {
            report
                .violations
                .push(format!("d_{i} = d_{} away from the minimum", i + 1));
        }
    }
    let bottom = report
        .plateau_locations
        .iter()
        .filter(|i| **i - 1 >= lo && **i - 1 < hi)
        .count();
    if bottom > 1 {
        report
            .violations
            .push(format!("{bottom} consecutive equal pairs at the minimum"));
    }
    if bottom == 1 {
        log::debug!("plateau accepted under case {case:?}");
        report.plateau_case = Some(case);
    }
    report.is_quasiconvex = report.violations.is_empty();
    if !report.is_quasiconvex {
        report.transition_index = None;
    }
    report
}

/// Samples the gradient weight `q(x)` at `grid_m` interior points and checks
/// it falls then rises. Reports; never errors on a failing shape.
pub fn check_weight_quasiconvexity(
    spec: &ObjectiveSpec,
    beta: CostParams,
    p: &Policy,
    grid_m: usize,
) -> Result<QuasiconvexityReport> {
    if grid_m < 2 {
        return Err(Error::Domain(format!("grid_m must be >= 2, got {grid_m}")));
    }
    let ev = Evaluator::new(p.n(), QuadratureConfig::trapezoid(2)?)?;
    let q: Vec<f64> = (1..=grid_m)
        .map(|k| ev.gradient_weight(spec, beta, p, k as f64 / (grid_m + 1) as f64))
        .collect::<Result<_>>()?;
    let tol = 1e-9 * q.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    Ok(shape_report(&q, tol))
}

/// Largest `S^+(d - λ)` over `lambdas`, and whether every two-change case
/// has the pattern `(+, -, +)`.
pub fn variation_diminishing(d: &[f64], lambdas: &[f64], zero_tol: f64) -> Result<(usize, bool)> {
    let mut worst = 0;
    let mut patterns_ok = true;
    for lambda in lambdas {
        let shifted: Vec<f64> = d.iter().map(|v| v - lambda).collect();
        let sp = sign_changes(&shifted, zero_tol)?;
        worst = worst.max(sp.s_plus);
        if sp.s_minus == 2 && sp.pattern.first() != Some(&1) {
            patterns_ok = false;
        }
    }
    Ok((worst, patterns_ok))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchurDirection {
    Convex,
    Concave,
    Flat,
}

/// A majorization pair `p ≻ p'` whose difference has the minority sign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchurCounterexample {
    pub trial: usize,
    pub p: Vec<f64>,
    pub p_prime: Vec<f64>,
    pub difference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchurReport {
    pub direction: SchurDirection,
    pub counterexample: Option<SchurCounterexample>,
    pub increases: usize,
    pub decreases: usize,
    pub inconclusive: usize,
    /// Smallest `|∫O^r(p) - ∫O^r(p')|` among conclusive trials.
    pub worst_margin: f64,
}

const SCHUR_M: usize = 20_000;
const SCHUR_TOL: f64 = 1e-9;

/// `∫ O(x,p)^r dx`, where `O` is `h` with the shares sorted decreasingly.
pub fn symmetric_power_integral(p: &[f64], r: f64, quad: &QuadratureConfig) -> Result<f64> {
    let mut sorted = p.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let ev = Evaluator::new(sorted.len(), *quad)?;
    Ok(power_integral(&ev, &sorted, r))
}

fn power_integral(ev: &Evaluator, sorted: &[f64], r: f64) -> f64 {
    let mut h = Vec::new();
    ev.h_values(sorted, &mut h);
    ev.nodes()
        .zip(h)
        .map(|((_, w), hv)| w * hv.max(0.0).powf(r))
        .sum()
}

/// Estimates the Schur direction of `p ↦ ∫O(x,p)^r` from random Dirichlet
/// policies and single Robin-Hood transfers.
pub fn schur_direction(r: f64, n: usize, trials: usize, seed: u64) -> Result<SchurReport> {
    if trials == 0 {
        return Err(Error::Domain("schur_direction needs at least one trial".into()));
    }
    if n < 2 {
        return Err(Error::Domain(format!("contestant count n = {n} < 2")));
    }
    if !r.is_finite() {
        return Err(Error::Domain(format!("exponent r must be finite, got {r}")));
    }
    // Both endpoints kept so the x = 0 node does not bias transfers into p_n.
    let quad = QuadratureConfig::new(SCHUR_M, Rule::Trapezoid, false)?;
    let ev = Evaluator::new(n, quad)?;
    let diffs: Vec<(Vec<f64>, Vec<f64>, f64)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t as u64);
            let (p, pp) = robin_hood_pair(&mut rng, n);
            let diff = power_integral(&ev, &p, r) - power_integral(&ev, &pp, r);
            (p, pp, diff)
        })
        .collect();
    let increases = diffs.iter().filter(|d| d.2 > SCHUR_TOL).count();
    let decreases = diffs.iter().filter(|d| d.2 < -SCHUR_TOL).count();
    let inconclusive = trials - increases - decreases;
    let direction = if increases == 0 && decreases == 0 {
        SchurDirection::Flat
    } else if increases >= decreases {
        SchurDirection::Convex
    } else {
        SchurDirection::Concave
    };
    let minority = |d: f64| match direction {
        SchurDirection::Convex => d < -SCHUR_TOL,
        SchurDirection::Concave => d > SCHUR_TOL,
        SchurDirection::Flat => false,
    };
    let counterexample = diffs
        .iter()
        .enumerate()
        .find(|(_, d)| minority(d.2))
        .map(|(trial, d)| SchurCounterexample {
            trial,
            p: d.0.clone(),
            p_prime: d.1.clone(),
            difference: d.2,
        });
    let worst_margin = match direction {
        SchurDirection::Flat => diffs.iter().fold(0.0_f64, |a, d| a.max(d.2.abs())),
        _ => diffs
            .iter()
            .filter(|d| d.2.abs() > SCHUR_TOL)
            .fold(f64::INFINITY, |a, d| a.min(d.2.abs())),
    };
    Ok(SchurReport {
        direction,
        counterexample,
        increases,
        decreases,
        inconclusive,
        worst_margin,
    })
}

/// A flat-Dirichlet `p` (sorted decreasingly) and `p'` obtained by moving
/// `t ∈ (0, gap/2]` from a larger to a smaller coordinate, so `p ≻ p'`.
fn robin_hood_pair(rng: &mut ChaCha8Rng, n: usize) -> (Vec<f64>, Vec<f64>) {
    loop {
        let mut p: Vec<f64> = (0..n).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
        let s: f64 = p.iter().sum();
        p.iter_mut().for_each(|v| *v /= s);
        p.sort_by(|a, b| b.total_cmp(a));
        let j = rng.gen_range(0..n - 1);
        let k = rng.gen_range(j + 1..n);
        let gap = p[j] - p[k];
        if gap <= 1e-12 {
            continue;
        }
        let t = (1.0 - rng.gen::<f64>()) * gap / 2.0;
        let mut pp = p.clone();
        pp[j] -= t;
        pp[k] += t;
        pp.sort_by(|a, b| b.total_cmp(a));
        return (p, pp);
    }
}

const MAX_MINOR: usize = 6;

/// `det[a_(i_s)(1 - x_l)]` for strictly increasing points in `(0,1)` and
/// strictly increasing ranks in `1..n-1`.
pub fn vandermonde_minor(n: usize, x: &[f64], i: &[usize]) -> Result<f64> {
    let k = x.len();
    if k == 0 || k != i.len() {
        return Err(Error::Domain(format!(
            "need equally many points and ranks, got {} and {}",
            x.len(),
            i.len()
        )));
    }
    if k > MAX_MINOR {
        return Err(Error::Domain(format!("minor order {k} exceeds {MAX_MINOR}")));
    }
    if x.iter().any(|v| !(*v > 0.0 && *v < 1.0)) {
        return Err(Error::Domain("points must lie in (0, 1)".into()));
    }
    if x.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain("points must be strictly increasing".into()));
    }
    if i.iter().any(|r| *r < 1 || *r + 1 > n) {
        return Err(Error::Domain(format!("ranks must lie in 1..={}", n.saturating_sub(1))));
    }
    if i.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain("ranks must be strictly increasing".into()));
    }
    // a_i(1 - x) = B_{i-1}^{n-1}(x).
    let mut m: Vec<Vec<f64>> = i
        .iter()
        .map(|r| x.iter().map(|xl| bernstein(n - 1, r - 1, *xl)).collect())
        .collect();
    Ok(determinant(&mut m))
}

/// LU with partial pivoting; consumes `m`.
fn determinant(m: &mut [Vec<f64>]) -> f64 {
    let k = m.len();
    let mut det = 1.0;
    for c in 0..k {
        let piv = (c..k)
            .max_by(|a, b| m[*a][c].abs().total_cmp(&m[*b][c].abs()))
            .expect("nonempty range");
        if m[piv][c] == 0.0 {
            return 0.0;
        }
        if piv != c {
            m.swap(piv, c);
            det = -det;
        }
        det *= m[c][c];
        for r in c + 1..k {
            let f = m[r][c] / m[c][c];
            for col in c..k {
                m[r][col] -= f * m[c][col];
            }
        }
    }
    det
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::{gradient, PosyTerm};
    use proptest::prelude::*;
    use rand::Rng;

    fn beta(b: f64) -> CostParams {
        CostParams::new(b).unwrap()
    }

    #[test]
    fn sign_change_examples() {
        let sp = sign_changes(&[1.0, -2.0, 3.0, 0.0, 4.0], 0.0).unwrap();
        assert_eq!((sp.s_minus, sp.s_plus), (2, 4));
        assert_eq!(sp.pattern, vec![1, -1, 1, 1]);
        let sp = sign_changes(&[1.0, 1.0, 1.0], 0.0).unwrap();
        assert_eq!((sp.s_minus, sp.s_plus), (0, 0));
        let sp = sign_changes(&[0.0, 1.0], 0.0).unwrap();
        assert_eq!((sp.s_minus, sp.s_plus), (0, 1));
        let sp = sign_changes(&[0.0, 1e-12, 0.0], 1e-9).unwrap();
        assert!(sp.degenerate);
        assert_eq!((sp.s_minus, sp.s_plus), (0, 2));
        assert!(sign_changes(&[], 0.0).is_err());
    }

    #[test]
    fn gradient_shapes_for_canonical_policies() {
        let q = QuadratureConfig::trapezoid(20_000).unwrap();
        let spec = ObjectiveSpec::convex(0.24).unwrap();
        let uni = Policy::uni(5).unwrap();
        let g = gradient(&spec, beta(2.0), &uni, &q).unwrap();
        let r = check_gradient_quasiconvexity(&g.values, &uni, gradient_tolerance(&g.values, g.error_estimate));
        assert!(r.is_quasiconvex, "{:?} {:?}", g.values, r.violations);
        assert!(!r.degenerate);
        // Under HM, d_(n-1) diverges when beta > 1, so the TV estimate is useless.
        let hm = Policy::hm(5).unwrap();
        let g = gradient(&spec, beta(2.0), &hm, &q).unwrap();
        let r = check_gradient_quasiconvexity(&g.values, &hm, 1e-6);
        assert!(r.is_quasiconvex, "{:?} {:?}", g.values, r.violations);
        assert_eq!(r.transition_index, Some(1));
        let g = gradient(&ObjectiveSpec::convex(0.9).unwrap(), beta(2.0), &hm, &q).unwrap();
        let r = check_gradient_quasiconvexity(&g.values, &hm, 1e-6);
        assert!(r.is_quasiconvex);
        let k = r.transition_index.unwrap();
        assert!(k > 1 && k < 4, "U-shaped, k = {k}, d = {:?}", g.values);
    }

    #[test]
    fn flat_gradient_is_degenerate() {
        let q = QuadratureConfig::trapezoid(20_000).unwrap();
        let p = Policy::two_level(5, 0.4).unwrap();
        let g = gradient(&ObjectiveSpec::convex(0.0).unwrap(), beta(1.0), &p, &q).unwrap();
        let r = check_gradient_quasiconvexity(&g.values, &p, gradient_tolerance(&g.values, g.error_estimate));
        assert!(r.is_quasiconvex && r.degenerate);
    }

    #[test]
    fn plateau_rules() {
        let p = Policy::hm(6).unwrap();
        let ok = check_gradient_quasiconvexity(&[3.0, 2.0, 1.0, 1.0, 2.0], &p, 1e-12);
        assert!(ok.is_quasiconvex);
        assert_eq!(ok.plateau_locations, vec![3]);
        assert_eq!(ok.plateau_case, Some(PlateauCase::Valley));
        assert_eq!(ok.transition_index, Some(3));
        let two = check_gradient_quasiconvexity(&[3.0, 1.0, 1.0, 1.0, 2.0], &p, 1e-12);
        assert!(!two.is_quasiconvex);
        let away = check_gradient_quasiconvexity(&[3.0, 3.0, 1.0, 2.0, 4.0], &p, 1e-12);
        assert!(!away.is_quasiconvex);
        let dec = check_gradient_quasiconvexity(&[4.0, 3.0, 2.0, 1.0, 1.0], &p, 1e-12);
        assert_eq!(dec.plateau_case, Some(PlateauCase::Decreasing));
        let inc = check_gradient_quasiconvexity(&[1.0, 1.0, 2.0, 3.0, 4.0], &p, 1e-12);
        assert_eq!(inc.plateau_case, Some(PlateauCase::Increasing));
        let bump = check_gradient_quasiconvexity(&[1.0, 2.0, 1.0, 2.0, 3.0], &p, 1e-12);
        assert!(!bump.is_quasiconvex && !bump.violations.is_empty());
        let short = check_gradient_quasiconvexity(&[1.0, 2.0], &p, 1e-12);
        assert!(!short.is_quasiconvex);
    }

    #[test]
    fn weight_shapes() {
        let hm = Policy::hm(5).unwrap();
        let r = check_weight_quasiconvexity(&ObjectiveSpec::convex(0.24).unwrap(), beta(2.0), &hm, 400).unwrap();
        assert!(r.is_quasiconvex);
        let p = Policy::two_level(5, 0.6).unwrap();
        let r = check_weight_quasiconvexity(&ObjectiveSpec::convex(1.0).unwrap(), beta(0.7), &p, 400).unwrap();
        assert!(r.is_quasiconvex);
        assert_eq!(r.transition_index, Some(1));
        let bad = ObjectiveSpec::posynomial(vec![
            PosyTerm::new(1.0, 1.0),
            PosyTerm::new(-1.0, 2.0),
            PosyTerm::new(1.0, 3.0),
        ])
        .unwrap();
        assert!(check_weight_quasiconvexity(&bad, beta(5.0), &hm, 400).is_ok());
    }

    #[test]
    fn schur_directions() {
        assert_eq!(schur_direction(1.0, 5, 40, 1).unwrap().direction, SchurDirection::Flat);
        let r = schur_direction(1.5, 5, 40, 1).unwrap();
        assert_eq!(r.direction, SchurDirection::Convex);
        assert!(r.counterexample.is_none());
        let r = schur_direction(0.5, 5, 40, 1).unwrap();
        assert_eq!(r.direction, SchurDirection::Concave);
        assert!(r.counterexample.is_none());
        assert!(schur_direction(0.5, 5, 0, 1).is_err());
    }

    #[test]
    fn schur_is_deterministic_in_seed() {
        assert_eq!(schur_direction(3.0, 3, 20, 9).unwrap(), schur_direction(3.0, 3, 20, 9).unwrap());
    }

    #[test]
    fn minor_oracle_and_errors() {
        let v = vandermonde_minor(5, &[0.3, 0.6], &[1, 3]).unwrap();
        assert!((v - 0.0762048).abs() < 1e-14, "{v}");
        assert!(vandermonde_minor(5, &[0.4], &[2]).unwrap() > 0.0);
        assert!(vandermonde_minor(5, &[0.3, 0.3], &[1, 2]).is_err());
        assert!(vandermonde_minor(5, &[0.3, 0.6], &[2, 2]).is_err());
        assert!(vandermonde_minor(5, &[0.3, 0.6], &[1, 5]).is_err());
        assert!(vandermonde_minor(5, &[0.0, 0.6], &[1, 2]).is_err());
        let x: Vec<f64> = (1..=7).map(|k| k as f64 / 8.0).collect();
        let i: Vec<usize> = (1..=7).collect();
        assert!(vandermonde_minor(8, &x, &i).is_err());
    }

    fn leibniz(m: &[Vec<f64>]) -> f64 {
        fn rec(m: &[Vec<f64>], row: usize, used: &mut Vec<bool>, sign: f64) -> f64 {
            if row == m.len() {
                return sign;
            }
            let mut acc = 0.0;
            let mut inversions_before = 0;
            for c in 0..m.len() {
                if used[c] {
                    continue;
                }
                used[c] = true;
                let s = if inversions_before % 2 == 0 { sign } else { -sign };
                acc += m[row][c] * rec(m, row + 1, used, s);
                used[c] = false;
                inversions_before += 1;
            }
            acc
        }
        rec(m, 0, &mut vec![false; m.len()], 1.0)
    }

    proptest! {
        #[test]
        fn s_minus_never_exceeds_s_plus(v in proptest::collection::vec(-2i8..=2, 1..12)) {
            let seq: Vec<f64> = v.iter().map(|x| *x as f64).collect();
            let sp = sign_changes(&seq, 0.0).unwrap();
            prop_assert!(sp.s_minus <= sp.s_plus);
            prop_assert!(sp.s_plus < seq.len());
        }

        #[test]
        fn lu_matches_leibniz(k in 1usize..=4, n in 5usize..=10, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut x: Vec<f64> = (0..k).map(|_| rng.gen_range(0.01..0.99)).collect();
            x.sort_by(|a, b| a.total_cmp(b));
            prop_assume!(x.windows(2).all(|w| w[1] - w[0] > 1e-3));
            let mut ranks: Vec<usize> = (1..n).collect();
            for s in (1..ranks.len()).rev() {
                ranks.swap(s, rng.gen_range(0..=s));
            }
            let mut i: Vec<usize> = ranks[..k].to_vec();
            i.sort();
            let m: Vec<Vec<f64>> = i.iter().map(|r| x.iter().map(|xl| bernstein(n - 1, r - 1, *xl)).collect()).collect();
            let lu = vandermonde_minor(n, &x, &i).unwrap();
            let exact = leibniz(&m);
            prop_assert!((lu - exact).abs() <= 1e-12 * (1.0 + exact.abs()));
            prop_assert!(lu > 0.0);
        }
    }
}
