//! One-dimensional quadrature on `[0, 1]` with error accounting for
//! monotone integrands.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    /// Nodes `j/m` for `j = 1..=m`, equal weights `1/m`.
    RightRiemann,
    /// Nodes `j/m` for `j = 0..=m`, half weight at both ends.
    Trapezoid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub m: usize,
    pub rule: Rule,
    /// Never evaluate the integrand at `x = 0`. Only changes the trapezoid
    /// rule, whose `x = 0` node is dropped; right-Riemann never touches it.
    pub exclude_left_endpoint: bool,
}

impl QuadratureConfig {
    pub fn new(m: usize, rule: Rule, exclude_left_endpoint: bool) -> Result<Self> {
        if m < 2 {
            return Err(Error::Domain(format!("quadrature needs m >= 2, got {m}")));
        }
        Ok(Self {
            m,
            rule,
            exclude_left_endpoint,
        })
    }

    pub fn right_riemann(m: usize) -> Result<Self> {
        Self::new(m, Rule::RightRiemann, true)
    }

    pub fn trapezoid(m: usize) -> Result<Self> {
        Self::new(m, Rule::Trapezoid, true)
    }

    /// Right-Riemann with `m = 10^5`.
    pub fn acceptance() -> Self {
        Self {
            m: 100_000,
            rule: Rule::RightRiemann,
            exclude_left_endpoint: true,
        }
    }

    /// Trapezoid with `m = 200`, as used for the heatmap sweeps.
    pub fn plotting() -> Self {
        Self {
            m: 200,
            rule: Rule::Trapezoid,
            exclude_left_endpoint: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        Self::new(self.m, self.rule, self.exclude_left_endpoint).map(|_| ())
    }

    /// Node positions and weights, in increasing order of `x`.
    pub fn nodes(&self) -> Vec<(f64, f64)> {
        let m = self.m;
        let h = 1.0 / m as f64;
        match self.rule {
            Rule::RightRiemann => (1..=m).map(|j| (j as f64 * h, h)).collect(),
            Rule::Trapezoid => {
                let start = usize::from(self.exclude_left_endpoint);
                (start..=m)
                    .map(|j| {
                        let w = if j == 0 || j == m { 0.5 * h } else { h };
                        (j as f64 * h, w)
                    })
                    .collect()
            }
        }
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes().into_iter().map(|(x, w)| w * f(x)).sum()
    }

    /// Worst-case absolute error for a monotone integrand with endpoint
    /// values `f0 = f(0)` and `f1 = f(1)`.
    ///
    /// Right-Riemann brackets the integral between the left and right sums,
    /// which differ by `(f1 - f0)/m`; the trapezoid rule is their average.
    /// Dropping the `x = 0` trapezoid node adds `|f0|/(2m)`.
    pub fn monotone_error_bound(&self, f0: f64, f1: f64) -> f64 {
        let m = self.m as f64;
        let spread = (f1 - f0).abs();
        match self.rule {
            Rule::RightRiemann => spread / m,
            Rule::Trapezoid => {
                let dropped = if self.exclude_left_endpoint { f0.abs() } else { 0.0 };
                (spread + dropped) / (2.0 * m)
            }
        }
    }
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self::acceptance()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_tiny_m() {
        assert!(QuadratureConfig::right_riemann(1).is_err());
        assert!(QuadratureConfig::trapezoid(2).is_ok());
    }

    #[test]
    fn node_layout() {
        let q = QuadratureConfig::right_riemann(4).unwrap();
        let nodes = q.nodes();
        assert_eq!(nodes.len(), 4);
        assert_eq!(nodes[0], (0.25, 0.25));
        assert_eq!(nodes[3], (1.0, 0.25));

        let t = QuadratureConfig::new(4, Rule::Trapezoid, false).unwrap();
        assert_eq!(t.nodes().len(), 5);
        let total: f64 = t.nodes().iter().map(|(_, w)| w).sum();
        assert!((total - 1.0).abs() < 1e-15);
        assert_eq!(QuadratureConfig::trapezoid(4).unwrap().nodes()[0].0, 0.25);
    }

    #[test]
    fn exact_on_linear_functions() {
        let t = QuadratureConfig::new(10, Rule::Trapezoid, false).unwrap();
        assert!((t.integrate(|x| 3.0 * x + 1.0) - 2.5).abs() < 1e-14);
        let r = QuadratureConfig::right_riemann(10).unwrap();
        assert!((r.integrate(|x| x) - 0.55).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn monotone_bound_holds(k in 0.05f64..6.0, c in 0.0f64..3.0, m in 2usize..400, trap in any::<bool>()) {
            // f(x) = c + x^k is increasing with integral c + 1/(k+1).
            let rule = if trap { Rule::Trapezoid } else { Rule::RightRiemann };
            let q = QuadratureConfig::new(m, rule, true).unwrap();
            let exact = c + 1.0 / (k + 1.0);
            let err = (q.integrate(|x| c + x.powf(k)) - exact).abs();
            prop_assert!(err <= q.monotone_error_bound(c, c + 1.0) + 1e-12);
        }
    }
}
