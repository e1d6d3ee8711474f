//! Invariant suites run by `contest-opt verify`.
//!
//! Every check yields one [`CheckRecord`]. `worst_margin` is the smallest
//! slack observed (allowed minus measured), so it is negative exactly when
//! the check fails.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bernstein::{basis_row, h_derivative, h_eval, h_inverse, BasisIndex};
use crate::equilibrium::{indifference_residual, simulate, welfare_quality_analytic, EquilibriumModel};
use crate::error::{Error, Result};
use crate::objective::{evaluate_hm_closed_form, CostParams, Evaluator, ObjectiveSpec};
use crate::optimizer::{branch_and_bound, family_lower, two_level_line_search, BnbConfig};
use crate::policy::Policy;
use crate::quadrature::{QuadratureConfig, Rule};
use crate::structure::{
    check_gradient_quasiconvexity, check_weight_quasiconvexity, gradient_tolerance, schur_direction,
    vandermonde_minor, variation_diminishing, SchurDirection,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Bernstein,
    Objective,
    Equilibrium,
    Optimizer,
    Schur,
    Minors,
    Structure,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Bernstein,
        Suite::Objective,
        Suite::Equilibrium,
        Suite::Optimizer,
        Suite::Schur,
        Suite::Minors,
        Suite::Structure,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Suite::Bernstein => "bernstein",
            Suite::Objective => "objective",
            Suite::Equilibrium => "equilibrium",
            Suite::Optimizer => "optimizer",
            Suite::Schur => "schur",
            Suite::Minors => "minors",
            Suite::Structure => "structure",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.as_str() == s)
            .ok_or_else(|| {
                Error::Domain(format!(
                    "unknown suite '{s}' (expected one of bernstein, objective, equilibrium, \
                     optimizer, schur, minors, structure)"
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub status: Status,
    pub worst_margin: f64,
    pub seed: u64,
}

impl CheckRecord {
    fn from_margin(name: impl Into<String>, worst_margin: f64, seed: u64) -> Self {
        let status = if worst_margin >= 0.0 { Status::Pass } else { Status::Fail };
        Self {
            name: name.into(),
            status,
            worst_margin,
            seed,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub checks: Vec<CheckRecord>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status == Status::Pass)
    }

    /// One JSON object per line.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&serde_json::to_string(c).expect("record serializes"));
            out.push('\n');
        }
        out
    }

    pub fn from_json_lines(text: &str) -> Result<Self> {
        let checks = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(k, l)| {
                serde_json::from_str(l).map_err(|e| Error::Parse {
                    field: k + 1,
                    offset: e.column(),
                    message: e.to_string(),
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self { checks })
    }
}

/// Runs `only` (every suite when `None`) with `trials` random draws per
/// randomized check.
pub fn run(seed: u64, trials: usize, only: Option<&[Suite]>) -> Result<VerifyReport> {
    if trials == 0 {
        return Err(Error::Domain("verify needs trials >= 1".into()));
    }
    let suites: Vec<Suite> = match only {
        Some(s) => Suite::ALL.into_iter().filter(|x| s.contains(x)).collect(),
        None => Suite::ALL.to_vec(),
    };
    let mut report = VerifyReport::default();
    for suite in suites {
        log::info!("running suite {suite}");
        let checks = match suite {
            Suite::Bernstein => bernstein_suite(seed, trials)?,
            Suite::Objective => objective_suite(seed, trials)?,
            Suite::Equilibrium => equilibrium_suite(seed, trials)?,
            Suite::Optimizer => optimizer_suite(seed, trials)?,
            Suite::Schur => schur_suite(seed, trials)?,
            Suite::Minors => minors_suite(seed, trials)?,
            Suite::Structure => structure_suite(seed, trials)?,
        };
        report.checks.extend(checks);
    }
    Ok(report)
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// A flat-Dirichlet draw over `n` shares, sorted decreasingly.
pub fn random_simplex_point(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= s);
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// A random ordered policy with `p_n = 0`.
pub fn random_reduced_policy(rng: &mut impl Rng, n: usize) -> Result<Policy> {
    let mut v = random_simplex_point(rng, n - 1);
    v.push(0.0);
    let residue = 1.0 - v.iter().sum::<f64>();
    v[0] += residue;
    Policy::new(v)
}

/// `two_level(n, p1)` with `p1` uniform on the family.
pub fn random_two_level_policy(rng: &mut impl Rng, n: usize) -> Result<Policy> {
    let lo = family_lower(n);
    Policy::two_level(n, rng.gen_range(lo..=1.0))
}

fn bernstein_suite(seed: u64, trials: usize) -> Result<Vec<CheckRecord>> {
    let mut rng = rng_for(seed, 1);
    let mut unity: f64 = 0.0;
    let mut roundtrip: f64 = 0.0;
    let mut derivative: f64 = 0.0;
    for _ in 0..trials {
        let n = rng.gen_range(2..=12);
        let x: f64 = rng.gen();
        let mut row = vec![0.0; n];
        basis_row(n, x, &mut row);
        unity = unity.max((row.iter().sum::<f64>() - 1.0).abs());

        let p = Policy::new(random_simplex_point(&mut rng, n))?;
        let y = p.last() + rng.gen::<f64>() * (p.top() - p.last());
        let back = h_eval(&p, h_inverse(&p, y)?)?;
        roundtrip = roundtrip.max((back - y).abs());

        let t = 1e-6;
        let x = rng.gen_range(0.01..0.99);
        let fd = (h_eval(&p, x + t)? - h_eval(&p, x - t)?) / (2.0 * t);
        derivative = derivative.max((fd - h_derivative(&p, x)).abs());
    }
    let quad = QuadratureConfig::new(20_000, Rule::Trapezoid, false)?;
    let mut integral: f64 = 0.0;
    for n in 2..=12 {
        for i in 1..=n {
            let b = BasisIndex::new(n, i)?;
            let v = quad.integrate(|x| b.eval_unchecked(x));
            integral = integral.max((v - 1.0 / n as f64).abs());
        }
    }
    Ok(vec![
        CheckRecord::from_margin("bernstein.partition_of_unity", 1e-12 - unity, seed),
        CheckRecord::from_margin("bernstein.basis_integral", 1e-6 - integral, seed),
        CheckRecord::from_margin("bernstein.inverse_roundtrip", 1e-10 - roundtrip, seed),
        CheckRecord::from_margin("bernstein.derivative", 1e-6 - derivative, seed),
    ])
}

fn objective_suite(seed: u64, trials: usize) -> Result<Vec<CheckRecord>> {
    let quad = QuadratureConfig::right_riemann(100_000)?;
    let mut closed: f64 = f64::INFINITY;
    for n in [2, 3, 5, 8] {
        let ev = Evaluator::new(n, quad)?;
        let hm = Policy::hm(n)?;
        for alpha in [0.0, 0.24, 0.5, 1.0] {
            for b in [0.5, 1.0, 2.0, 4.0] {
                let beta = CostParams::new(b)?;
                let v = ev.evaluate(&ObjectiveSpec::convex(alpha)?, beta, &hm)?.value;
                let err = (v - evaluate_hm_closed_form(alpha, beta, n)).abs();
                // Each component integral is within 1/m; G weights them by αn and 1-α.
                let bound = (alpha * n as f64 + 1.0 - alpha) / quad.m as f64;
                closed = closed.min(bound - err);
            }
        }
    }

    // Directional derivative along e_i - e_(i+1) stays on the simplex.
    let mut rng = rng_for(seed, 2);
    let fine = QuadratureConfig::trapezoid(20_000)?;
    let mut fd_margin: f64 = f64::INFINITY;
    for _ in 0..trials.min(50) {
        let n = rng.gen_range(3..=8);
        let p = random_reduced_policy(&mut rng, n)?;
        let s = p.shares();
        let i = rng.gen_range(0..n - 2);
        let room = (s[i] - s[i + 1]).min(if i == 0 { f64::INFINITY } else { s[i - 1] - s[i] });
        let room = room.min(s[i + 1] - s[i + 2]);
        if room < 1e-3 {
            continue;
        }
        let t = 1e-5;
        let alpha = rng.gen::<f64>();
        let beta = CostParams::new(rng.gen_range(0.5..4.0))?;
        let spec = ObjectiveSpec::convex(alpha)?;
        let ev = Evaluator::new(n, fine)?;
        let shifted = |sign: f64| -> Result<f64> {
            let mut v = s.to_vec();
            v[i] += sign * t;
            v[i + 1] -= sign * t;
            Ok(ev.evaluate(&spec, beta, &Policy::new(v)?)?.value)
        };
        let fd = (shifted(1.0)? - shifted(-1.0)?) / (2.0 * t);
        let g = ev.gradient(&spec, beta, &p)?;
        let exact = g.values[i] - g.values[i + 1];
        let tol = 1e-4 * (1.0 + exact.abs()) + 2.0 * g.error_estimate;
        fd_margin = fd_margin.min(tol - (fd - exact).abs());
    }
    Ok(vec![
        CheckRecord::from_margin("objective.hm_closed_form", closed, seed),
        CheckRecord::from_margin("objective.gradient_fd", finite_or_zero(fd_margin), seed),
    ])
}

fn finite_or_zero(v: f64) -> f64 {
    if v.is_finite() {
        v
    } else {
        0.0
    }
}

fn equilibrium_suite(seed: u64, trials: usize) -> Result<Vec<CheckRecord>> {
    let mut rng = rng_for(seed, 3);
    let mut resid: f64 = 0.0;
    for _ in 0..trials {
        let n = rng.gen_range(2..=8);
        let p = Policy::new(random_simplex_point(&mut rng, n))?;
        if !p.is_nontrivial() {
            continue;
        }
        let beta = CostParams::new(rng.gen_range(0.3..4.0))?;
        let model = EquilibriumModel::new(p, beta)?;
        let q = rng.gen::<f64>() * model.q_max();
        resid = resid.max(indifference_residual(&model, q)?);
    }

    let beta = CostParams::new(2.0)?;
    let hm = Policy::hm(5)?;
    let model = EquilibriumModel::new(hm.clone(), beta)?;
    let samples = (trials * 2000).clamp(20_000, 1_000_000);
    let sim = simulate(&model, samples, seed, 50)?;
    let (w, q) = welfare_quality_analytic(&hm, beta, &QuadratureConfig::trapezoid(20_000)?)?;
    let welfare = 4.0 * sim.welfare_se - (sim.empirical_welfare - w.value).abs();
    let quality = 4.0 * sim.quality_se - (sim.empirical_quality - q.value).abs();
    let deviation = 3.0 * sim.deviation_se + 1e-3 - sim.max_deviation_gain;
    Ok(vec![
        CheckRecord::from_margin("equilibrium.indifference", 1e-9 - resid, seed),
        CheckRecord::from_margin("equilibrium.monte_carlo", welfare.min(quality), seed),
        CheckRecord::from_margin("equilibrium.no_profitable_deviation", deviation, seed),
    ])
}

fn optimizer_suite(seed: u64, trials: usize) -> Result<Vec<CheckRecord>> {
    let mut rng = rng_for(seed, 4);
    let eps = 1e-3;
    let runs = (trials / 20).clamp(1, 5);
    let mut gap_margin: f64 = f64::INFINITY;
    let mut value_margin: f64 = f64::INFINITY;
    let mut depth_margin: f64 = f64::INFINITY;
    for _ in 0..runs {
        let alpha = rng.gen_range(0.05..=1.0);
        let beta = CostParams::new(rng.gen_range(0.5..=4.0))?;
        let cfg = BnbConfig::new(eps, 5, alpha)?;
        let r = branch_and_bound(5, alpha, beta, &cfg)?;
        let gap = r.gap.unwrap_or(f64::INFINITY);
        gap_margin = gap_margin.min(if r.certified { eps - gap } else { -1.0 });
        let spec = ObjectiveSpec::convex(alpha)?;
        let line = two_level_line_search(&spec, beta, 5, 200, true, &cfg.quad)?;
        value_margin = value_margin.min(r.value - (line.value - eps));
        let bound = r.config["depth_bound"].as_f64().unwrap_or(0.0);
        depth_margin = depth_margin.min(bound - r.max_depth.unwrap_or(usize::MAX) as f64);
    }
    Ok(vec![
        CheckRecord::from_margin("optimizer.bnb_certificate", gap_margin, seed),
        CheckRecord::from_margin("optimizer.bnb_vs_line_search", value_margin, seed),
        CheckRecord::from_margin("optimizer.depth_bound", depth_margin, seed),
    ])
}

fn schur_suite(seed: u64, trials: usize) -> Result<Vec<CheckRecord>> {
    let trials = trials.max(200);
    let cases = [
        (0.3, SchurDirection::Concave),
        (0.7, SchurDirection::Concave),
        (1.0, SchurDirection::Flat),
        (1.5, SchurDirection::Convex),
        (3.0, SchurDirection::Convex),
    ];
    let mut out = Vec::new();
    for (r, expected) in cases {
        let mut margin: f64 = f64::INFINITY;
        for n in [3, 5, 8] {
            let rep = schur_direction(r, n, trials, seed)?;
            let ok = rep.direction == expected && rep.counterexample.is_none();
            let m = match (ok, expected) {
                (false, _) => -1.0,
                // Largest deviation from exact flatness, measured against 1e-9.
                (true, SchurDirection::Flat) => 1e-9 - rep.worst_margin,
                (true, _) => rep.worst_margin,
            };
            margin = margin.min(m);
        }
        out.push(CheckRecord::from_margin(format!("schur.r={r}"), margin, seed));
    }
    Ok(out)
}

fn minors_suite(seed: u64, trials: usize) -> Result<Vec<CheckRecord>> {
    let mut out = Vec::new();
    for k in 1..=4usize {
        let mut rng = rng_for(seed, 10 + k as u64);
        let mut smallest: f64 = f64::INFINITY;
        for n in (k + 1).max(3)..=10 {
            for _ in 0..trials {
                let x = sorted_distinct(&mut rng, k);
                let mut ranks: Vec<usize> = (1..n).collect();
                for s in (1..ranks.len()).rev() {
                    ranks.swap(s, rng.gen_range(0..=s));
                }
                let mut i = ranks[..k].to_vec();
                i.sort_unstable();
                smallest = smallest.min(vandermonde_minor(n, &x, &i)?);
            }
        }
        out.push(CheckRecord::from_margin(format!("minors.k={k}"), positive_margin(smallest), seed));
    }
    Ok(out)
}

/// A strictly positive value reports as a nonnegative margin.
fn positive_margin(v: f64) -> f64 {
    if v > 0.0 {
        v
    } else {
        v.min(-f64::MIN_POSITIVE)
    }
}

fn failures(count: usize) -> f64 {
    if count == 0 {
        0.0
    } else {
        -(count as f64)
    }
}

fn sorted_distinct(rng: &mut impl Rng, k: usize) -> Vec<f64> {
    loop {
        let mut x: Vec<f64> = (0..k).map(|_| rng.gen_range(0.02..0.98)).collect();
        x.sort_by(|a, b| a.total_cmp(b));
        if x.windows(2).all(|w| w[1] - w[0] > 1e-3) {
            return x;
        }
    }
}

fn structure_suite(seed: u64, trials: usize) -> Result<Vec<CheckRecord>> {
    let mut rng = rng_for(seed, 20);
    let quad = QuadratureConfig::trapezoid(20_000)?;
    let mut quasi_fail = 0usize;
    let mut vd_worst = 0usize;
    let mut vd_pattern = true;
    let mut weight_fail = 0usize;
    for t in 0..trials {
        let n = [3, 5, 8][t % 3];
        let alpha = rng.gen::<f64>();
        let beta = CostParams::new(rng.gen_range(0.3..4.0))?;
        let p = if rng.gen_bool(0.5) {
            random_two_level_policy(&mut rng, n)?
        } else {
            random_reduced_policy(&mut rng, n)?
        };
        let spec = ObjectiveSpec::convex(alpha)?;
        let g = Evaluator::new(n, quad)?.gradient(&spec, beta, &p)?;
        let tol = gradient_tolerance(&g.values, g.error_estimate);
        let rep = check_gradient_quasiconvexity(&g.values, &p, tol);
        if !rep.is_quasiconvex {
            log::warn!("gradient not quasiconvex for {p} alpha={alpha} beta={beta:?}: {:?}", rep.violations);
            quasi_fail += 1;
        }
        let (lo, hi) = g
            .values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
        let lambdas: Vec<f64> = (0..50).map(|k| lo + (hi - lo) * k as f64 / 49.0).collect();
        let (worst, pattern) = variation_diminishing(&g.values, &lambdas, tol)?;
        vd_worst = vd_worst.max(worst);
        vd_pattern &= pattern;
        if !check_weight_quasiconvexity(&spec, beta, &p, 200)?.is_quasiconvex {
            weight_fail += 1;
        }
    }
    Ok(vec![
        CheckRecord::from_margin("structure.gradient_quasiconvex", failures(quasi_fail), seed),
        CheckRecord::from_margin(
            "structure.variation_diminishing",
            if vd_pattern { 2.0 - vd_worst as f64 } else { -1.0 },
            seed,
        ),
        CheckRecord::from_margin("structure.weight_quasiconvex", failures(weight_fail), seed),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.as_str().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn subset_run_passes_and_round_trips() {
        let rep = run(7, 10, Some(&[Suite::Bernstein, Suite::Minors])).unwrap();
        assert_eq!(rep.checks.len(), 8);
        assert!(rep.passed(), "{}", rep.to_json_lines());
        let back = VerifyReport::from_json_lines(&rep.to_json_lines()).unwrap();
        assert_eq!(back, rep);
    }

    #[test]
    fn structure_suite_passes() {
        let rep = run(3, 30, Some(&[Suite::Structure])).unwrap();
        assert!(rep.passed(), "{}", rep.to_json_lines());
    }

    #[test]
    fn random_policies_are_valid() {
        let mut rng = rng_for(1, 0);
        for n in 2..10 {
            let p = random_reduced_policy(&mut rng, n).unwrap();
            assert_eq!(p.last(), 0.0);
            random_two_level_policy(&mut rng, n.max(3)).unwrap();
        }
        assert!(run(1, 0, None).is_err());
    }
}
