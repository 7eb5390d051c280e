//! Probability mass functions over `m` outcomes and membership tests for the
//! three ambiguity sets used by the toolkit:
//!
//! * the density-ratio ball `{p : p(i)/q0(i) <= 1 + d for all i}`,
//! * its entropy form `{p : r_i ln r_i <= r_i ln(1 + d)}` (same set, `0 ln 0 = 0`),
//! * the total-variation ball `{p : E_q0 |r - 1| <= d}`.
//!
//! Membership comparisons are exact `<=` on floats with no slack.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance on `sum(mass) == 1`.
pub const SUM_TOLERANCE: f64 = 1e-12;
/// Deviations up to this bound are renormalized instead of rejected.
pub const NORMALIZE_TOLERANCE: f64 = 1e-9;

/// Nonnegative mass over `m` outcomes summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ProbabilityVector {
    mass: Vec<f64>,
}

impl ProbabilityVector {
    pub fn new(mass: Vec<f64>) -> Result<Self> {
        if mass.is_empty() {
            return Err(Error::InvalidProbability("empty mass vector".into()));
        }
        for (i, &p) in mass.iter().enumerate() {
            if !p.is_finite() || p < 0.0 {
                return Err(Error::InvalidProbability(format!(
                    "component {i} = {p} is not a nonnegative finite number"
                )));
            }
        }
        let total: f64 = mass.iter().sum();
        let deviation = (total - 1.0).abs();
        if deviation <= SUM_TOLERANCE {
            Ok(Self { mass })
        } else if deviation <= NORMALIZE_TOLERANCE {
            Ok(Self {
                mass: mass.into_iter().map(|p| p / total).collect(),
            })
        } else {
            Err(Error::InvalidProbability(format!(
                "components sum to {total}, not 1"
            )))
        }
    }

    pub fn uniform(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidProbability("empty mass vector".into()));
        }
        Ok(Self {
            mass: vec![1.0 / m as f64; m],
        })
    }

    /// Normalizes an arbitrary nonnegative vector with positive total.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total.is_finite() && total > 0.0) || weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::InvalidProbability(
                "weights must be nonnegative with a positive finite total".into(),
            ));
        }
        Self::new(weights.iter().map(|w| w / total).collect())
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.mass
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.mass.iter().all(|&p| p > 0.0)
    }

    /// `E_p[values]`.
    pub fn expectation(&self, values: &[f64]) -> Result<f64> {
        check_len(self.len(), values.len())?;
        Ok(self.mass.iter().zip(values).map(|(p, v)| p * v).sum())
    }
}

impl TryFrom<Vec<f64>> for ProbabilityVector {
    type Error = Error;
    fn try_from(mass: Vec<f64>) -> Result<Self> {
        Self::new(mass)
    }
}

impl From<ProbabilityVector> for Vec<f64> {
    fn from(p: ProbabilityVector) -> Self {
        p.mass
    }
}

impl std::ops::Index<usize> for ProbabilityVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.mass[i]
    }
}

/// Nominal distribution `q0` (strictly positive) together with the radius `d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmbiguitySet {
    nominal: ProbabilityVector,
    radius: f64,
}

impl AmbiguitySet {
    pub fn new(nominal: ProbabilityVector, radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidRadius(radius));
        }
        Self::build(nominal, radius)
    }

    /// The degenerate `d = 0` set `{q0}`. Only meaningful for the exact oracles;
    /// the dual solvers reject it.
    pub fn singleton(nominal: ProbabilityVector) -> Result<Self> {
        Self::build(nominal, 0.0)
    }

    /// Radius for which the worst-case expectation under a uniform nominal is the
    /// average of the `c` largest costs: `d = m / c - 1`.
    pub fn radius_for_subset_size(m: usize, c: usize) -> Result<f64> {
        if c == 0 || c > m {
            return Err(Error::InvalidArgument(format!(
                "subset size {c} outside 1..={m}"
            )));
        }
        Ok(m as f64 / c as f64 - 1.0)
    }

    fn build(nominal: ProbabilityVector, radius: f64) -> Result<Self> {
        if let Some(index) = nominal.as_slice().iter().position(|&q| q <= 0.0) {
            return Err(Error::ZeroNominal { index });
        }
        Ok(Self { nominal, radius })
    }

    pub fn nominal(&self) -> &ProbabilityVector {
        &self.nominal
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.nominal.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nominal.is_empty()
    }

    /// Per-outcome upper bound on the density ratio.
    pub fn ratio_cap(&self) -> f64 {
        1.0 + self.radius
    }
}

fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        Err(Error::DimensionMismatch { expected, actual })
    } else {
        Ok(())
    }
}

/// Componentwise `p(i) / q0(i)`.
pub fn density_ratio(p: &ProbabilityVector, q0: &ProbabilityVector) -> Result<Vec<f64>> {
    check_len(q0.len(), p.len())?;
    if let Some(index) = q0.as_slice().iter().position(|&q| q <= 0.0) {
        return Err(Error::ZeroNominal { index });
    }
    Ok(p.as_slice()
        .iter()
        .zip(q0.as_slice())
        .map(|(pi, qi)| pi / qi)
        .collect())
}

pub fn member_density_ball(p: &ProbabilityVector, set: &AmbiguitySet) -> Result<bool> {
    let cap = set.ratio_cap();
    Ok(density_ratio(p, set.nominal())?.iter().all(|&r| r <= cap))
}

/// Entropy form of the density-ratio ball: `r ln r <= r ln(1 + d)` for every
/// outcome, with `0 ln 0 = 0`.
pub fn member_entropy_ball(p: &ProbabilityVector, set: &AmbiguitySet) -> Result<bool> {
    let cap = set.ratio_cap();
    Ok(density_ratio(p, set.nominal())?.iter().all(|&r| {
        if r == 0.0 {
            // 0 ln 0 = 0 <= 0 ln(1 + d) = 0
            true
        } else {
            // r ln r - r ln(1+d), folded so the log is taken of a single quotient
            r * (r / cap).ln() <= 0.0
        }
    }))
}

/// Total-variation style ball `E_q0 |r - 1| <= d`.
pub fn member_tv_ball(p: &ProbabilityVector, set: &AmbiguitySet) -> Result<bool> {
    Ok(tv_distance(p, set.nominal())? <= set.radius())
}

/// `E_q0 |p/q0 - 1|`, i.e. the L1 distance between `p` and `q0`.
pub fn tv_distance(p: &ProbabilityVector, q0: &ProbabilityVector) -> Result<f64> {
    let ratio = density_ratio(p, q0)?;
    Ok(q0
        .as_slice()
        .iter()
        .zip(&ratio)
        .map(|(q, r)| q * (r - 1.0).abs())
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pv(v: &[f64]) -> ProbabilityVector {
        ProbabilityVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn constructor_tolerances() {
        assert!(ProbabilityVector::new(vec![0.5, 0.5]).is_ok());
        let p = ProbabilityVector::new(vec![0.5, 0.5 + 5e-10]).unwrap();
        assert!((p.as_slice().iter().sum::<f64>() - 1.0).abs() <= SUM_TOLERANCE);
        assert!(ProbabilityVector::new(vec![0.5, 0.5 + 1e-6]).is_err());
        assert!(ProbabilityVector::new(vec![1.5, -0.5]).is_err());
        assert!(ProbabilityVector::new(vec![]).is_err());
        assert!(ProbabilityVector::new(vec![f64::NAN, 1.0]).is_err());
    }

    #[test]
    fn ratio_examples() {
        let half = pv(&[0.5, 0.5]);
        assert_eq!(density_ratio(&half, &half).unwrap(), vec![1.0, 1.0]);
        assert_eq!(
            density_ratio(&pv(&[1.0, 0.0]), &half).unwrap(),
            vec![2.0, 0.0]
        );
        assert_eq!(
            density_ratio(&half, &pv(&[1.0, 0.0])),
            Err(Error::ZeroNominal { index: 1 })
        );
        assert!(matches!(
            density_ratio(&half, &pv(&[0.2, 0.3, 0.5])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn ambiguity_set_validation() {
        assert!(AmbiguitySet::new(pv(&[0.5, 0.5]), 0.0).is_err());
        assert!(AmbiguitySet::new(pv(&[0.5, 0.5]), -1.0).is_err());
        assert!(AmbiguitySet::new(pv(&[1.0, 0.0]), 1.0).is_err());
        assert_eq!(AmbiguitySet::singleton(pv(&[0.5, 0.5])).unwrap().radius(), 0.0);
        assert_eq!(AmbiguitySet::radius_for_subset_size(18, 9).unwrap(), 1.0);
        assert!(AmbiguitySet::radius_for_subset_size(4, 0).is_err());
        assert!(AmbiguitySet::radius_for_subset_size(4, 5).is_err());
    }

    #[test]
    fn density_ball_examples() {
        let q0 = pv(&[0.5, 0.5]);
        assert!(member_density_ball(&q0, &AmbiguitySet::new(q0.clone(), 0.5).unwrap()).unwrap());
        let corner = pv(&[1.0, 0.0]);
        assert!(member_density_ball(&corner, &AmbiguitySet::new(q0.clone(), 1.0).unwrap()).unwrap());
        assert!(!member_density_ball(&corner, &AmbiguitySet::new(q0, 0.5).unwrap()).unwrap());
    }

    #[test]
    fn entropy_ball_examples() {
        let q0 = pv(&[0.25, 0.25, 0.5]);
        let set = AmbiguitySet::new(q0.clone(), 1.0).unwrap();
        assert!(member_entropy_ball(&pv(&[0.0, 0.5, 0.5]), &set).unwrap());
        assert!(member_entropy_ball(&q0, &set).unwrap());
        assert!(!member_entropy_ball(&pv(&[0.6, 0.0, 0.4]), &set).unwrap());
    }

    #[test]
    fn tv_ball_examples() {
        let q0 = pv(&[0.5, 0.5]);
        for d in [1e-6, 0.3, 2.0] {
            assert!(member_tv_ball(&q0, &AmbiguitySet::new(q0.clone(), d).unwrap()).unwrap());
        }
        let corner = pv(&[1.0, 0.0]);
        assert!(member_tv_ball(&corner, &AmbiguitySet::new(q0.clone(), 1.0).unwrap()).unwrap());
        assert!(!member_tv_ball(&corner, &AmbiguitySet::new(q0, 0.99).unwrap()).unwrap());
    }

    #[test]
    fn boundary_ratio_agrees_between_forms() {
        // ratio exactly at, and one ulp above, the cap for a large radius where
        // ln(cap) collapses neighbouring floats
        let q0 = pv(&[1.0 / 12.0; 12]);
        let set = AmbiguitySet::new(q0.clone(), 11.0).unwrap();
        let p = pv(&[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(
            member_density_ball(&p, &set).unwrap(),
            member_entropy_ball(&p, &set).unwrap()
        );
        let cap = set.ratio_cap();
        let above = f64::from_bits(cap.to_bits() + 1);
        assert!(!(above * (above / cap).ln() <= 0.0));
    }

    fn arb_instance() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, f64)> {
        (2usize..10).prop_flat_map(|m| {
            (
                prop::collection::vec(0.01f64..1.0, m),
                prop::collection::vec(prop_oneof![Just(0.0), 0.0f64..1.0], m),
                0.01f64..5.0,
            )
        })
    }

    proptest! {
        #[test]
        fn entropy_and_density_forms_agree((q, p, d) in arb_instance()) {
            prop_assume!(p.iter().sum::<f64>() > 0.0);
            let q0 = ProbabilityVector::from_weights(&q).unwrap();
            let p = ProbabilityVector::from_weights(&p).unwrap();
            let set = AmbiguitySet::new(q0, d).unwrap();
            prop_assert_eq!(member_entropy_ball(&p, &set).unwrap(), member_density_ball(&p, &set).unwrap());
        }

        #[test]
        fn ratio_conserves_mass((q, p, _d) in arb_instance()) {
            prop_assume!(p.iter().sum::<f64>() > 0.0);
            let q0 = ProbabilityVector::from_weights(&q).unwrap();
            let p = ProbabilityVector::from_weights(&p).unwrap();
            let r = density_ratio(&p, &q0).unwrap();
            let total: f64 = r.iter().zip(q0.as_slice()).map(|(r, q)| r * q).sum();
            prop_assert!((total - 1.0).abs() <= 1e-12);
        }
    }
}
