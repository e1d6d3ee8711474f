//! Prize policies on the ordered simplex.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordering and normalisation tolerance of [`Policy::new`].
pub const TOL_ORDER: f64 = 1e-12;

/// Classification tolerance for analytically produced policies.
pub const DEFAULT_CLASSIFY_TOL: f64 = 1e-6;

/// A prize vector `p_1 >= ... >= p_n >= 0` with `sum p_i = 1`.
///
/// Construction never sorts or renormalises; an invalid vector is an error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Policy {
    shares: Vec<f64>,
}

impl Policy {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::Domain(format!(
                "policy needs at least 2 shares, got {}",
                values.len()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite() || **v < -TOL_ORDER) {
            return Err(Error::Domain(format!("share {bad} is negative or not finite")));
        }
        for k in 1..values.len() {
            if values[k] > values[k - 1] + TOL_ORDER {
                return Err(Error::OrderViolation { index: k + 1 });
            }
        }
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > TOL_ORDER {
            return Err(Error::Normalization { sum });
        }
        Ok(Self { shares: values })
    }

    /// Winner-take-all: `(1, 0, ..., 0)`.
    pub fn hm(n: usize) -> Result<Self> {
        check_n(n)?;
        let mut v = vec![0.0; n];
        v[0] = 1.0;
        Ok(Self { shares: v })
    }

    /// `1/(n-1)` to every rank but the last.
    pub fn uni(n: usize) -> Result<Self> {
        check_n(n)?;
        let mut v = vec![1.0 / (n - 1) as f64; n];
        v[n - 1] = 0.0;
        Ok(Self { shares: v })
    }

    /// `(p1, (1-p1)/(n-2), ..., (1-p1)/(n-2), 0)` for `p1` in `[1/(n-1), 1]`.
    pub fn two_level(n: usize, p1: f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::Domain(format!("two-level policies need n >= 3, got {n}")));
        }
        let lo = 1.0 / (n - 1) as f64;
        if !(p1 >= lo - TOL_ORDER && p1 <= 1.0 + TOL_ORDER) {
            return Err(Error::Range {
                value: p1,
                lo,
                hi: 1.0,
            });
        }
        let p1 = p1.clamp(lo, 1.0);
        let mid = ((1.0 - p1) / (n - 2) as f64).min(p1);
        let mut v = vec![mid; n];
        v[0] = p1;
        v[n - 1] = 0.0;
        Ok(Self { shares: v })
    }

    /// Parses a comma-separated share list or one of the names `hm`, `uni`,
    /// `two:<p1>`. Names need `n`; explicit lists must agree with it if given.
    pub fn parse(text: &str, n: Option<usize>) -> Result<Self> {
        let t = text.trim();
        let named = |what: &str| {
            n.ok_or_else(|| Error::Parse {
                field: 1,
                offset: 0,
                message: format!("named policy '{what}' needs a contestant count"),
            })
        };
        let policy = match t.to_ascii_lowercase().as_str() {
            "hm" => Self::hm(named("hm")?)?,
            "uni" => Self::uni(named("uni")?)?,
            s if s.starts_with("two:") => {
                let raw = &t[4..];
                let p1: f64 = raw.trim().parse().map_err(|_| Error::Parse {
                    field: 1,
                    offset: 4,
                    message: format!("'{raw}' is not a number"),
                })?;
                Self::two_level(named("two")?, p1)?
            }
            _ => t.parse::<Self>()?,
        };
        if let Some(n) = n {
            if policy.n() != n {
                return Err(Error::Domain(format!(
                    "policy has {} shares but n = {n}",
                    policy.n()
                )));
            }
        }
        Ok(policy)
    }

    pub fn n(&self) -> usize {
        self.shares.len()
    }

    pub fn shares(&self) -> &[f64] {
        &self.shares
    }

    pub fn top(&self) -> f64 {
        self.shares[0]
    }

    pub fn last(&self) -> f64 {
        self.shares[self.shares.len() - 1]
    }

    /// True unless every share equals `1/n` (up to [`TOL_ORDER`]).
    pub fn is_nontrivial(&self) -> bool {
        self.top() - self.last() > TOL_ORDER
    }

    pub fn classify(&self, tol: f64) -> StructureClass {
        classify_structure(self, tol)
    }
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        Err(Error::Domain(format!("contestant count n = {n} < 2")))
    } else {
        Ok(())
    }
}

impl FromStr for Policy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut values = Vec::new();
        let mut offset = 0;
        for (k, field) in s.split(',').enumerate() {
            let v: f64 = field.trim().parse().map_err(|_| Error::Parse {
                field: k + 1,
                offset,
                message: format!("'{}' is not a number", field.trim()),
            })?;
            values.push(v);
            offset += field.len() + 1;
        }
        Self::new(values)
    }
}

impl TryFrom<Vec<f64>> for Policy {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<Policy> for Vec<f64> {
    fn from(p: Policy) -> Self {
        p.shares
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.shares.iter().map(|v| crate::format::sig9(*v)).collect();
        write!(f, "{}", parts.join(","))
    }
}

/// Shape of a policy relative to the two-level optimum
/// `p_1 >= p_2 = ... = p_{n-1} >= p_n = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "lowercase")]
pub enum StructureClass {
    Hm,
    Uni,
    TwoLevel { p1: f64 },
    Other,
}

impl StructureClass {
    pub fn tag(&self) -> &'static str {
        match self {
            StructureClass::Hm => "HM",
            StructureClass::Uni => "UNI",
            StructureClass::TwoLevel { .. } => "TwoLevel",
            StructureClass::Other => "Other",
        }
    }

    /// Anything but `Other`.
    pub fn is_two_level_family(&self) -> bool {
        !matches!(self, StructureClass::Other)
    }
}

impl fmt::Display for StructureClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StructureClass::TwoLevel { p1 } => write!(f, "TwoLevel(p1={})", crate::format::sig9(*p1)),
            other => f.write_str(other.tag()),
        }
    }
}

/// HM and UNI take precedence over the generic two-level tag.
pub fn classify_structure(p: &Policy, tol: f64) -> StructureClass {
    let s = p.shares();
    let n = s.len();
    if p.last() > tol {
        return StructureClass::Other;
    }
    if n == 2 {
        // (1, 0) is both HM and UNI for two contestants.
        return StructureClass::Hm;
    }
    let middle = &s[1..n - 1];
    let mean = middle.iter().sum::<f64>() / middle.len() as f64;
    let spread = middle.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max);
    if spread > tol {
        return StructureClass::Other;
    }
    let p1 = s[0];
    if (p1 - 1.0).abs() <= tol {
        StructureClass::Hm
    } else if (p1 - mean).abs() <= tol {
        StructureClass::Uni
    } else {
        StructureClass::TwoLevel { p1 }
    }
}

pub fn is_nontrivial(p: &Policy) -> bool {
    p.is_nontrivial()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn make_policy_examples() {
        assert_eq!(Policy::new(vec![1.0, 0.0, 0.0, 0.0, 0.0]).unwrap(), Policy::hm(5).unwrap());
        assert_eq!(
            Policy::new(vec![0.25, 0.25, 0.25, 0.25, 0.0]).unwrap(),
            Policy::uni(5).unwrap()
        );
        assert_eq!(
            Policy::new(vec![0.2, 0.3, 0.5]),
            Err(Error::OrderViolation { index: 2 })
        );
        assert!(matches!(
            Policy::new(vec![0.5, 0.4]),
            Err(Error::Normalization { .. })
        ));
        assert!(matches!(Policy::new(vec![1.1, -0.1]), Err(Error::Domain(_))));
        assert!(matches!(Policy::new(vec![1.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn two_level_examples() {
        assert_eq!(Policy::two_level(5, 0.25).unwrap(), Policy::uni(5).unwrap());
        assert_eq!(Policy::two_level(5, 1.0).unwrap(), Policy::hm(5).unwrap());
        let p = Policy::two_level(5, 0.4).unwrap();
        let expected = [0.4, 0.2, 0.2, 0.2, 0.0];
        for (a, b) in p.shares().iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(Policy::two_level(5, 0.2).is_err());
        assert!(Policy::two_level(5, 1.01).is_err());
        assert!(Policy::two_level(2, 1.0).is_err());
    }

    #[test]
    fn nontriviality() {
        assert!(!Policy::new(vec![0.2; 5]).unwrap().is_nontrivial());
        assert!(Policy::hm(5).unwrap().is_nontrivial());
        let nearly = Policy::new(vec![0.2 + 1e-15, 0.2 - 1e-15, 0.2, 0.2, 0.2]);
        // The perturbed vector is unordered by 2e-15, inside the ordering tolerance.
        assert!(!nearly.unwrap().is_nontrivial());
    }

    #[test]
    fn classification_examples() {
        let tl = Policy::new(vec![0.4, 0.2, 0.2, 0.2, 0.0]).unwrap();
        assert_eq!(classify_structure(&tl, 1e-9), StructureClass::TwoLevel { p1: 0.4 });
        let other = Policy::new(vec![0.4, 0.3, 0.2, 0.1, 0.0]).unwrap();
        assert_eq!(classify_structure(&other, 1e-9), StructureClass::Other);
        assert_eq!(classify_structure(&Policy::hm(5).unwrap(), 1e-9), StructureClass::Hm);
        assert_eq!(classify_structure(&Policy::uni(5).unwrap(), 1e-9), StructureClass::Uni);
        let tail = Policy::new(vec![0.4, 0.2, 0.2, 0.1, 0.1]).unwrap();
        assert_eq!(classify_structure(&tail, 1e-9), StructureClass::Other);
    }

    #[test]
    fn parsing() {
        let p = Policy::parse("0.4,0.2,0.2,0.2,0", None).unwrap();
        assert_eq!(p.n(), 5);
        assert_eq!(Policy::parse("hm", Some(4)).unwrap(), Policy::hm(4).unwrap());
        assert_eq!(Policy::parse("UNI", Some(4)).unwrap(), Policy::uni(4).unwrap());
        assert_eq!(
            Policy::parse("two:0.4", Some(5)).unwrap(),
            Policy::two_level(5, 0.4).unwrap()
        );
        assert!(matches!(Policy::parse("hm", None), Err(Error::Parse { .. })));
        assert_eq!(
            Policy::parse("0.5,abc,0.5", None),
            Err(Error::Parse {
                field: 2,
                offset: 4,
                message: "'abc' is not a number".into()
            })
        );
        assert_eq!(Policy::parse("0.2,0.3,0.5", None), Err(Error::OrderViolation { index: 2 }));
        assert!(Policy::parse("1,0,0", Some(4)).is_err());
    }

    #[test]
    fn serde_rejects_invalid_vectors() {
        let p: Policy = serde_json::from_str("[0.5,0.5,0.0]").unwrap();
        assert_eq!(p.n(), 3);
        assert!(serde_json::from_str::<Policy>("[0.2,0.8]").is_err());
    }

    proptest! {
        #[test]
        fn two_level_round_trips_through_classification(n in 3usize..30, t in 0.0f64..=1.0) {
            let lo = 1.0 / (n - 1) as f64;
            let p1 = lo + t * (1.0 - lo);
            let p = Policy::two_level(n, p1).unwrap();
            let tol = 1e-9;
            let class = classify_structure(&p, tol);
            if (p1 - 1.0).abs() <= tol {
                prop_assert_eq!(class, StructureClass::Hm);
            } else if (p1 - lo).abs() <= tol {
                prop_assert_eq!(class, StructureClass::Uni);
            } else {
                prop_assert_eq!(class, StructureClass::TwoLevel { p1 });
            }
        }

        #[test]
        fn constructor_rejects_every_invalid_vector(raw in prop::collection::vec(-0.5f64..1.5, 2..8)) {
            let sum: f64 = raw.iter().sum();
            let ordered = raw.windows(2).all(|w| w[1] <= w[0] + TOL_ORDER);
            let nonneg = raw.iter().all(|v| *v >= -TOL_ORDER);
            let normalized = (sum - 1.0).abs() <= TOL_ORDER;
            prop_assert_eq!(Policy::new(raw.clone()).is_ok(), ordered && nonneg && normalized);
        }
    }
}
