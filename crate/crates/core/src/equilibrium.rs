//! The symmetric mixed equilibrium of the contest.
//!
//! Each contestant draws quality from `F(q) = h^{-1}(p_n + q^β)` on
//! `[0, q_max]` with `q_max = (p_1 - p_n)^(1/β)`. Equivalently
//! `q = (h(U) - p_n)^(1/β)` with `U` uniform, which is how [`simulate`]
//! samples it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bernstein::{binomial_row, h_coefficients, h_eval, h_eval_unchecked, h_inverse, ScaledPoint};
use crate::error::{Error, Result};
use crate::format::{sig9, Table};
use crate::objective::{CostParams, Evaluation, Evaluator, ObjectiveSpec};
use crate::policy::Policy;
use crate::quadrature::QuadratureConfig;

/// Independent random streams used by [`simulate`]; fixed so results do not
/// depend on the thread count.
pub const SIM_PARTITIONS: u64 = 8;

/// Smallest sample count accepted by [`simulate`].
pub const MIN_SAMPLES: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumModel {
    policy: Policy,
    beta: CostParams,
    q_max: f64,
}

impl EquilibriumModel {
    pub fn new(policy: Policy, beta: CostParams) -> Result<Self> {
        if !policy.is_nontrivial() {
            return Err(Error::TrivialPolicy);
        }
        let q_max = (policy.top() - policy.last()).powf(1.0 / beta.beta());
        Ok(Self {
            policy,
            beta,
            q_max,
        })
    }

    pub fn policy(&self) -> &Policy {
        &self.policy
    }

    pub fn beta(&self) -> CostParams {
        self.beta
    }

    pub fn q_max(&self) -> f64 {
        self.q_max
    }

    /// `F(q) = h^{-1}(p_n + q^β)` on `[0, q_max]`.
    pub fn cdf(&self, q: f64) -> Result<f64> {
        let slack = 1e-12;
        if !(q >= -slack && q <= self.q_max + slack) {
            return Err(Error::Range {
                value: q,
                lo: 0.0,
                hi: self.q_max,
            });
        }
        let q = q.clamp(0.0, self.q_max);
        if q == self.q_max {
            return Ok(1.0);
        }
        let y = (self.policy.last() + q.powf(self.beta.beta())).min(self.policy.top());
        h_inverse(&self.policy, y)
    }

    /// `(h(u) - p_n)^(1/β)`.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        let g = h_eval(&self.policy, u)? - self.policy.last();
        Ok(g.max(0.0).powf(1.0 / self.beta.beta()))
    }

    /// Expected payoff of playing `q >= 0` against `n - 1` equilibrium
    /// opponents.
    pub fn utility(&self, q: f64) -> Result<f64> {
        if !(q >= 0.0 && q.is_finite()) {
            return Err(Error::Domain(format!("quality must be >= 0, got {q}")));
        }
        let cost = q.powf(self.beta.beta());
        if q >= self.q_max {
            return Ok(self.policy.top() - cost);
        }
        Ok(expected_revenue(&self.policy, self.cdf(q)?)? - cost)
    }

    /// `q, F(q)` on `points` evenly spaced qualities covering the support.
    pub fn cdf_table(&self, points: usize) -> Result<Table> {
        if points < 2 {
            return Err(Error::Domain("a CDF table needs at least 2 points".into()));
        }
        let mut t = Table::new(["q", "F"]);
        for k in 0..points {
            let q = self.q_max * k as f64 / (points - 1) as f64;
            t.push(vec![sig9(q), sig9(self.cdf(q)?)]);
        }
        Ok(t)
    }
}

/// Expected prize share of beating each opponent with probability `f`.
pub fn expected_revenue(p: &Policy, f: f64) -> Result<f64> {
    h_eval(p, f)
}

/// `(W, Q) = (n ∫h^(1+1/β), ∫h^(1/β))` with their quadrature error bounds.
pub fn welfare_quality_analytic(
    p: &Policy,
    beta: CostParams,
    quad: &QuadratureConfig,
) -> Result<(Evaluation, Evaluation)> {
    let ev = Evaluator::new(p.n(), *quad)?;
    let w = ev.evaluate(&ObjectiveSpec::ConvexCombo { alpha: 1.0 }, beta, p)?;
    let q = ev.evaluate(&ObjectiveSpec::ConvexCombo { alpha: 0.0 }, beta, p)?;
    Ok((w, q))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    /// Mean quality of the recommended contestant.
    pub empirical_welfare: f64,
    pub welfare_se: f64,
    /// Mean quality over all contestants.
    pub empirical_quality: f64,
    pub quality_se: f64,
    /// Largest `payoff(q) - p_n` over the deviation grid.
    pub max_deviation_gain: f64,
    /// Standard error of the grid point attaining the maximum.
    pub deviation_se: f64,
    pub deviation_argmax: f64,
    pub samples: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Default)]
struct Moments {
    sum: f64,
    sum_sq: f64,
}

impl Moments {
    fn push(&mut self, v: f64) {
        self.sum += v;
        self.sum_sq += v * v;
    }

    fn merge(&mut self, o: &Moments) {
        self.sum += o.sum;
        self.sum_sq += o.sum_sq;
    }

    fn mean_se(&self, count: usize) -> (f64, f64) {
        let c = count as f64;
        let mean = self.sum / c;
        let var = ((self.sum_sq / c - mean * mean) * c / (c - 1.0)).max(0.0);
        (mean, (var / c).sqrt())
    }
}

#[derive(Debug, Clone)]
struct Partial {
    welfare: Moments,
    quality: Moments,
    deviation: Vec<Moments>,
}

/// Plays `samples` rounds of the contest at the symmetric equilibrium.
///
/// Each round draws `n` qualities, ranks them (exact ties in random order)
/// and recommends rank `k` with probability `p_k`. A deviator playing each
/// grid quality `q_k = 1.25 q_max k / (G - 1)` faces the round's first
/// `n - 1` draws as opponents. Samples are split over [`SIM_PARTITIONS`]
/// ChaCha8 streams of `seed`, so the report depends only on `seed`.
pub fn simulate(
    model: &EquilibriumModel,
    samples: usize,
    seed: u64,
    deviation_grid: usize,
) -> Result<SimReport> {
    if samples < MIN_SAMPLES {
        return Err(Error::Domain(format!(
            "simulation needs at least {MIN_SAMPLES} samples, got {samples}"
        )));
    }
    if deviation_grid < 2 {
        return Err(Error::Domain("deviation grid needs at least 2 points".into()));
    }
    let p = model.policy.shares();
    let n = p.len();
    let inv_beta = 1.0 / model.beta.beta();
    let binom = binomial_row(n - 1);
    let coef = h_coefficients(p, &binom);
    let last = model.policy.last();
    let grid: Vec<f64> = (0..deviation_grid)
        .map(|k| 1.25 * model.q_max * k as f64 / (deviation_grid - 1) as f64)
        .collect();
    let costs: Vec<f64> = grid.iter().map(|q| q.powf(model.beta.beta())).collect();
    let parts = SIM_PARTITIONS as usize;
    let counts: Vec<usize> = (0..parts)
        .map(|k| samples / parts + usize::from(k < samples % parts))
        .collect();

    let run = |part: usize| -> Partial {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(part as u64);
        let mut out = Partial {
            welfare: Moments::default(),
            quality: Moments::default(),
            deviation: vec![Moments::default(); grid.len()],
        };
        let mut draws: Vec<(f64, f64)> = vec![(0.0, 0.0); n];
        for _ in 0..counts[part] {
            let mut total = 0.0;
            for d in draws.iter_mut() {
                let u: f64 = rng.gen();
                let g = (ScaledPoint::new(n - 1, u).sum(&coef) - last).max(0.0);
                let q = g.powf(inv_beta);
                total += q;
                *d = (q, 0.0);
            }
            out.quality.push(total / n as f64);

            let pick = pick_rank(p, rng.gen());
            let welfare = if has_ties(&draws) {
                for d in draws.iter_mut() {
                    d.1 = rng.gen();
                }
                let mut ranked = draws.clone();
                ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then(b.1.total_cmp(&a.1)));
                ranked[pick].0
            } else {
                let mut qs: Vec<f64> = draws.iter().map(|d| d.0).collect();
                qs.sort_by(|a, b| b.total_cmp(a));
                qs[pick]
            };
            out.welfare.push(welfare);

            let opponents = &draws[..n - 1];
            for (k, q) in grid.iter().enumerate() {
                let above = opponents.iter().filter(|o| o.0 > *q).count();
                let tied = opponents.iter().filter(|o| o.0 == *q).count();
                // Uniform tie-breaking, in expectation over the tied ranks.
                let share = p[above..=above + tied].iter().sum::<f64>() / (tied + 1) as f64;
                out.deviation[k].push(share - costs[k]);
            }
        }
        out
    };

    let partials: Vec<Partial> = (0..parts).into_par_iter().map(run).collect();
    let mut total = Partial {
        welfare: Moments::default(),
        quality: Moments::default(),
        deviation: vec![Moments::default(); grid.len()],
    };
    for part in &partials {
        total.welfare.merge(&part.welfare);
        total.quality.merge(&part.quality);
        for (a, b) in total.deviation.iter_mut().zip(&part.deviation) {
            a.merge(b);
        }
    }
    let (w, w_se) = total.welfare.mean_se(samples);
    let (q, q_se) = total.quality.mean_se(samples);
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    for (k, m) in total.deviation.iter().enumerate() {
        let (mean, se) = m.mean_se(samples);
        if mean - last > best.0 {
            best = (mean - last, se, grid[k]);
        }
    }
    Ok(SimReport {
        empirical_welfare: w,
        welfare_se: w_se,
        empirical_quality: q,
        quality_se: q_se,
        max_deviation_gain: best.0,
        deviation_se: best.1,
        deviation_argmax: best.2,
        samples,
        seed,
    })
}

fn pick_rank(p: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (k, share) in p.iter().enumerate() {
        acc += share;
        if u < acc {
            return k;
        }
    }
    // Rounding left `u` above the cumulative sum; take the last positive share.
    p.iter().rposition(|s| *s > 0.0).unwrap_or(0)
}

fn has_ties(draws: &[(f64, f64)]) -> bool {
    draws
        .iter()
        .enumerate()
        .any(|(i, a)| draws[i + 1..].iter().any(|b| b.0 == a.0))
}

/// `|h(F(q)) - p_n - q^β|`, the equilibrium indifference residual at `q`.
pub fn indifference_residual(model: &EquilibriumModel, q: f64) -> Result<f64> {
    let f = model.cdf(q)?;
    let h = h_eval_unchecked(model.policy.shares(), f);
    Ok((h - model.policy.last() - q.powf(model.beta.beta())).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bernstein::TOL_INV;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn model(p: Policy, b: f64) -> EquilibriumModel {
        EquilibriumModel::new(p, CostParams::new(b).unwrap()).unwrap()
    }

    #[test]
    fn cdf_examples() {
        let hm = model(Policy::hm(5).unwrap(), 2.0);
        for q in [0.1, 0.4, 0.8] {
            assert_abs_diff_eq!(hm.cdf(q).unwrap(), q.powf(0.5), epsilon = 1e-11);
        }
        let hm2 = model(Policy::hm(2).unwrap(), 1.0);
        assert_abs_diff_eq!(hm2.cdf(0.7).unwrap(), 0.7, epsilon = 1e-11);
        let uni = model(Policy::uni(5).unwrap(), 2.0);
        assert_eq!(uni.cdf(uni.q_max()).unwrap(), 1.0);
        assert_eq!(uni.cdf(0.0).unwrap(), 0.0);
        assert!(uni.cdf(0.6).is_err());
    }

    #[test]
    fn trivial_policy_is_rejected() {
        let flat = Policy::new(vec![0.2; 5]).unwrap();
        assert_eq!(
            EquilibriumModel::new(flat, CostParams::new(1.0).unwrap()),
            Err(Error::TrivialPolicy)
        );
    }

    #[test]
    fn quantile_examples() {
        let uni = model(Policy::uni(5).unwrap(), 2.0);
        assert_abs_diff_eq!(uni.quantile(1.0).unwrap(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(uni.q_max(), 0.5, epsilon = 1e-15);
        let hm = model(Policy::hm(5).unwrap(), 2.0);
        assert_abs_diff_eq!(hm.quantile(0.5).unwrap(), 0.25, epsilon = 1e-15);
        assert_eq!(hm.quantile(0.0).unwrap(), 0.0);
    }

    #[test]
    fn revenue_and_utility_examples() {
        let uni = Policy::uni(5).unwrap();
        assert_abs_diff_eq!(expected_revenue(&uni, 0.5).unwrap(), 0.234375, epsilon = 1e-15);
        let p = Policy::new(vec![0.5, 0.3, 0.2]).unwrap();
        assert_abs_diff_eq!(expected_revenue(&p, 1.0).unwrap(), 0.5);
        assert_abs_diff_eq!(expected_revenue(&p, 0.0).unwrap(), 0.2);

        let m = model(p, 1.5);
        assert_abs_diff_eq!(m.utility(0.0).unwrap(), 0.2, epsilon = 1e-12);
        let hm = model(Policy::hm(5).unwrap(), 2.0);
        assert_abs_diff_eq!(hm.utility(1.0).unwrap(), 0.0, epsilon = 1e-15);
        let um = model(Policy::uni(5).unwrap(), 2.0);
        assert_abs_diff_eq!(um.utility(0.7).unwrap(), 0.25 - 0.49, epsilon = 1e-15);
    }

    #[test]
    fn analytic_welfare_and_quality() {
        let q = QuadratureConfig::acceptance();
        let b = CostParams::new(2.0).unwrap();
        let (w, qq) = welfare_quality_analytic(&Policy::hm(5).unwrap(), b, &q).unwrap();
        assert!((w.value - 5.0 / 7.0).abs() <= w.error_bound);
        assert!((qq.value - 1.0 / 3.0).abs() <= qq.error_bound);
        // Reference values from a 30-digit computation.
        let (w, qq) = welfare_quality_analytic(&Policy::uni(5).unwrap(), b, &q).unwrap();
        assert!((w.value - 0.468_224_563_266_449_97).abs() <= w.error_bound);
        assert!((qq.value - 0.437_009_592_382_019_97).abs() <= qq.error_bound);
        let one = CostParams::new(1.0).unwrap();
        let p = Policy::new(vec![0.6, 0.3, 0.1, 0.0]).unwrap();
        let (_, qq) = welfare_quality_analytic(&p, one, &q).unwrap();
        assert_abs_diff_eq!(qq.value, 0.25, epsilon = 1e-5);
    }

    #[test]
    fn cdf_table_round_trips() {
        let m = model(Policy::hm(5).unwrap(), 2.0);
        let t = m.cdf_table(11).unwrap();
        let back = Table::read(t.to_csv_string().as_bytes()).unwrap();
        let q = back.column_f64("q").unwrap();
        let f = back.column_f64("F").unwrap();
        assert_eq!(q.len(), 11);
        for (q, f) in q.iter().zip(f) {
            assert_abs_diff_eq!(f, q.sqrt(), epsilon = 1e-8);
        }
    }

    #[test]
    fn simulation_is_deterministic_and_consistent() {
        let m = model(Policy::hm(5).unwrap(), 2.0);
        let a = simulate(&m, 20_000, 7, 20).unwrap();
        let b = simulate(&m, 20_000, 7, 20).unwrap();
        assert_eq!(a, b);
        assert!((a.empirical_quality - 1.0 / 3.0).abs() <= 4.0 * a.quality_se);
        assert!((a.empirical_welfare - 5.0 / 7.0).abs() <= 4.0 * a.welfare_se);
        assert!(a.max_deviation_gain <= 4.0 * a.deviation_se + 1e-3);
        assert!(simulate(&m, 999, 7, 20).is_err());
        let c = simulate(&m, 20_000, 8, 20).unwrap();
        assert_ne!(a.empirical_quality, c.empirical_quality);
    }

    #[test]
    fn rank_picking() {
        let p = [0.5, 0.3, 0.2, 0.0];
        assert_eq!(pick_rank(&p, 0.0), 0);
        assert_eq!(pick_rank(&p, 0.6), 1);
        assert_eq!(pick_rank(&p, 0.95), 2);
        assert_eq!(pick_rank(&p, 1.0), 2);
    }

    proptest! {
        #[test]
        fn cdf_and_quantile_invert(
            n in 2usize..9,
            raw in prop::collection::vec(0.01f64..1.0, 8),
            b in 0.3f64..4.0,
            u in 0.0f64..=1.0,
            last in 0.0f64..0.1,
        ) {
            let mut v: Vec<f64> = raw[..n].to_vec();
            v.sort_by(|a, c| c.total_cmp(a));
            v[n - 1] = v[n - 1].min(last);
            let s: f64 = v.iter().sum();
            let v: Vec<f64> = v.iter().map(|x| x / s).collect();
            let p = Policy::new(v).unwrap();
            prop_assume!(p.top() - p.last() > 1e-3);
            let m = model(p, b);
            let q = m.quantile(u).unwrap();
            let back = m.cdf(q).unwrap();
            // h has slope >= (p_1 - p_n) x^(n-2)-ish; compare in h-space where the
            // round trip is literally exact.
            let h = |x: f64| h_eval(m.policy(), x).unwrap();
            prop_assert!((h(back) - h(u)).abs() <= 4.0 * TOL_INV);

            let qs = q.min(m.q_max());
            prop_assert!(indifference_residual(&m, qs).unwrap() <= 4.0 * TOL_INV);
            let above = m.q_max() * (1.0 + u) + 1e-9;
            prop_assert!(m.utility(above).unwrap() <= m.policy().last() + 1e-12);
        }

        #[test]
        fn revenue_is_monotone(n in 2usize..9, raw in prop::collection::vec(0.01f64..1.0, 8), a in 0.0f64..1.0, d in 0.0f64..1.0) {
            let mut v: Vec<f64> = raw[..n].to_vec();
            v.sort_by(|x, y| y.total_cmp(x));
            let s: f64 = v.iter().sum();
            let p = Policy::new(v.iter().map(|x| x / s).collect()).unwrap();
            let b = (a + d * (1.0 - a)).min(1.0);
            prop_assert!(expected_revenue(&p, a).unwrap() <= expected_revenue(&p, b).unwrap() + 1e-15);
        }
    }
}
