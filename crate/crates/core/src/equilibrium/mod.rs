//! The two-player Claimer/Skeptic game over a two-level claim: closed-form
//! equilibrium, outcome probabilities, a Monte Carlo estimator and an exact
//! best-response check.

mod montecarlo;
mod oracle;
mod outcomes;
mod sweep;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use montecarlo::{monte_carlo_estimate, Estimate, MonteCarloComparison, MonteCarloReport};
pub use oracle::{best_response_check, Deviation, DeviationReport};
pub use outcomes::{outcome_probabilities, OutcomeProbabilities};
pub use sweep::{linspace, sweep, sweep_csv, SweepRow, SWEEP_HEADER};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EquilibriumError {
    #[error("degenerate parameters: {0}")]
    Degenerate(String),
    #[error("no interior mixing: pi_e = {pi_e} is not below pi1* = {pi1_star}")]
    NoInteriorMixing { pi_e: f64, pi1_star: f64 },
    #[error("inconsistent solution: {0}")]
    Inconsistent(String),
    #[error("unknown parameter {0:?} (expected one of b0, b1, b2, sigma1, sigma2, beta0, beta1)")]
    UnknownParameter(String),
}

/// Benefits, aggregated stakes and bounties of the game.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GameParameters {
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
    /// σ₁ = σ₁↑ + σ₁↓.
    pub sigma1: f64,
    /// σ₂ = σ₂↓.
    pub sigma2: f64,
    pub beta0: f64,
    pub beta1: f64,
}

/// Names accepted by [`GameParameters::set`].
pub const PARAMETER_NAMES: [&str; 7] = ["b0", "b1", "b2", "sigma1", "sigma2", "beta0", "beta1"];

impl GameParameters {
    /// B₂ = 10, B₁ = B₀ = 40, β₁ = σ₁ = β₀ = 5.
    pub fn baseline(sigma2: f64) -> Self {
        Self {
            b0: 40.0,
            b1: 40.0,
            b2: 10.0,
            sigma1: 5.0,
            sigma2,
            beta0: 5.0,
            beta1: 5.0,
        }
    }

    pub fn get(&self, name: &str) -> Result<f64, EquilibriumError> {
        Ok(match name {
            "b0" => self.b0,
            "b1" => self.b1,
            "b2" => self.b2,
            "sigma1" => self.sigma1,
            "sigma2" => self.sigma2,
            "beta0" => self.beta0,
            "beta1" => self.beta1,
            _ => return Err(EquilibriumError::UnknownParameter(name.into())),
        })
    }

    pub fn set(&mut self, name: &str, value: f64) -> Result<(), EquilibriumError> {
        let slot = match name {
            "b0" => &mut self.b0,
            "b1" => &mut self.b1,
            "b2" => &mut self.b2,
            "sigma1" => &mut self.sigma1,
            "sigma2" => &mut self.sigma2,
            "beta0" => &mut self.beta0,
            "beta1" => &mut self.beta1,
            _ => return Err(EquilibriumError::UnknownParameter(name.into())),
        };
        *slot = value;
        Ok(())
    }

    pub fn with(mut self, name: &str, value: f64) -> Result<Self, EquilibriumError> {
        self.set(name, value)?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), EquilibriumError> {
        for name in PARAMETER_NAMES {
            let v = self.get(name)?;
            if !v.is_finite() || v < 0.0 {
                return Err(EquilibriumError::Degenerate(format!(
                    "{name} = {v} must be finite and non-negative"
                )));
            }
        }
        if self.sigma2 + self.sigma1 + self.beta1 + self.beta0 <= 0.0 {
            return Err(EquilibriumError::Degenerate(
                "sigma2 + sigma1 + beta1 + beta0 must be positive".into(),
            ));
        }
        if self.b1 + self.sigma2 + self.beta1 + self.sigma1 <= 0.0 {
            return Err(EquilibriumError::Degenerate(
                "b1 + sigma2 + beta1 + sigma1 must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Equilibrium types: 1 always challenges, 2 mixes, 3 never challenges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum EqType {
    AlwaysChallenge = 1,
    MixedChallenge = 2,
    NeverChallenge = 3,
}

impl EqType {
    pub fn number(self) -> u8 {
        self as u8
    }
}

impl From<EqType> for u8 {
    fn from(t: EqType) -> u8 {
        t.number()
    }
}

impl TryFrom<u8> for EqType {
    type Error = String;

    fn try_from(v: u8) -> Result<Self, String> {
        match v {
            1 => Ok(EqType::AlwaysChallenge),
            2 => Ok(EqType::MixedChallenge),
            3 => Ok(EqType::NeverChallenge),
            _ => Err(format!("equilibrium type must be 1, 2 or 3, got {v}")),
        }
    }
}

impl fmt::Display for EqType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

impl FromStr for EqType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        s.parse::<u8>().map_err(|e| e.to_string()).and_then(EqType::try_from)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumSolution {
    pub eq_type: EqType,
    /// Claimer posts iff her signal is at least π*.
    pub pi_star: f64,
    pub pi1_star: f64,
    /// Skeptic's belief after a post, (1 + π*)/2.
    pub pi_e: f64,
    /// Reply probability when the claim is not validatable.
    pub p: f64,
    /// Second-challenge probability.
    pub q1: f64,
    /// First-challenge probability.
    pub q2: f64,
}

/// Skeptic's belief at which a second challenge is a matter of indifference.
pub fn pi1_star(theta: &GameParameters) -> Result<f64, EquilibriumError> {
    theta.validate()?;
    let num = theta.sigma2 + theta.sigma1 + theta.beta1;
    Ok(num / (num + theta.beta0))
}

/// Claimer's indifference pins the second-challenge probability.
pub fn q1(theta: &GameParameters) -> Result<f64, EquilibriumError> {
    theta.validate()?;
    let num = theta.b1 + theta.sigma2 + theta.beta1;
    Ok(num / (num + theta.sigma1))
}

/// Claimer's expected payoff after a challenge when the claim is validatable.
pub fn challenged_value(theta: &GameParameters) -> Result<f64, EquilibriumError> {
    let q = q1(theta)?;
    Ok(q * (theta.b0 + theta.beta1 + theta.beta0) + (1.0 - q) * (theta.b1 + theta.beta1))
}

/// Reply probability making the posterior after a reply equal π₁*.
pub fn reply_prob_p(pi_e: f64, theta: &GameParameters) -> Result<f64, EquilibriumError> {
    let star = pi1_star(theta)?;
    let interior = pi_e < star && star > 0.0 && (0.0..1.0).contains(&pi_e);
    if !interior {
        return Err(EquilibriumError::NoInteriorMixing { pi_e, pi1_star: star });
    }
    Ok(pi_e * (1.0 - star) / (star * (1.0 - pi_e)))
}

/// Slope of the linear form φ = σ₂ + π_e · slope.
pub fn phi_slope(theta: &GameParameters) -> Result<f64, EquilibriumError> {
    let star = pi1_star(theta)?;
    let q = q1(theta)?;
    if star <= 0.0 {
        return Err(EquilibriumError::NoInteriorMixing {
            pi_e: 0.0,
            pi1_star: star,
        });
    }
    let s1 = -q * (theta.beta1 + theta.beta0) - (1.0 - q) * theta.beta1;
    Ok(s1 - theta.sigma2 - (1.0 - star) / star * (theta.sigma2 + theta.beta1))
}

/// The linear form of φ in π_e; defined for any π_e, including outside the
/// range where the mixing probability exists.
pub fn phi_linear(pi_e: f64, theta: &GameParameters) -> Result<f64, EquilibriumError> {
    Ok(theta.sigma2 + pi_e * phi_slope(theta)?)
}

/// Skeptic's expected payoff of challenging the initial claim when Claimer
/// posts above `pi_star`.
pub fn phi(pi_star: f64, theta: &GameParameters) -> Result<f64, EquilibriumError> {
    let pi_e = (1.0 + pi_star) / 2.0;
    let p = reply_prob_p(pi_e, theta)?;
    let q = q1(theta)?;
    let (s2, b1, b0) = (theta.sigma2, theta.beta1, theta.beta0);
    Ok(pi_e * (-q * (b1 + b0) - (1.0 - q) * b1) + (1.0 - pi_e) * ((1.0 - p) * s2 - p * b1))
}

/// Skeptic's expected entry-challenge payoff evaluated branch by branch on
/// the game tree, with the reply branch for a non-validatable claim valued
/// at its actual continuation.
pub fn phi_exact(pi_star: f64, theta: &GameParameters) -> Result<f64, EquilibriumError> {
    let pi_e = (1.0 + pi_star) / 2.0;
    let p = reply_prob_p(pi_e, theta)?;
    let q = q1(theta)?;
    let (s2, s1, b1, b0) = (theta.sigma2, theta.sigma1, theta.beta1, theta.beta0);
    let valid = -q * (b1 + b0) - (1.0 - q) * b1;
    let invalid = (1.0 - p) * s2 + p * (q * (s2 + s1) - (1.0 - q) * b1);
    Ok(pi_e * valid + (1.0 - pi_e) * invalid)
}

/// Classifies and solves the unique equilibrium.
pub fn solve_pbe(theta: &GameParameters) -> Result<EquilibriumSolution, EquilibriumError> {
    theta.validate()?;
    let star = pi1_star(theta)?;
    let q = q1(theta)?;
    let v = challenged_value(theta)?;

    // Always challenge: Claimer indifferent at π* against a sure challenge.
    let t1 = theta.sigma2 / (v + theta.sigma2);
    let e1 = (1.0 + t1) / 2.0;
    if e1 < star && phi(t1, theta)? >= 0.0 {
        return Ok(EquilibriumSolution {
            eq_type: EqType::AlwaysChallenge,
            pi_star: t1,
            pi1_star: star,
            pi_e: e1,
            p: reply_prob_p(e1, theta)?,
            q1: q,
            q2: 1.0,
        });
    }

    let never = 0.5 >= star || phi(0.0, theta)? < 0.0;
    if !never {
        let pi_e = -theta.sigma2 / phi_slope(theta)?;
        let pi_star = 2.0 * pi_e - 1.0;
        let q2 = theta.b2 / (theta.b2 - pi_star * v + (1.0 - pi_star) * theta.sigma2);
        if !(pi_e < star && (0.0..1.0).contains(&pi_star) && q2 > 0.0 && q2 <= 1.0) {
            return Err(EquilibriumError::Inconsistent(format!(
                "no type classifies: mixed candidate pi* = {pi_star}, q2 = {q2}"
            )));
        }
        return Ok(EquilibriumSolution {
            eq_type: EqType::MixedChallenge,
            pi_star,
            pi1_star: star,
            pi_e,
            p: reply_prob_p(pi_e, theta)?,
            q1: q,
            q2,
        });
    }

    // Off-path play after a challenge: the subgame equilibrium at π_e = ½.
    let (p, q1) = if 0.5 < star {
        (reply_prob_p(0.5, theta)?, q)
    } else {
        (1.0, 0.0)
    };
    Ok(EquilibriumSolution {
        eq_type: EqType::NeverChallenge,
        pi_star: 0.0,
        pi1_star: star,
        pi_e: 0.5,
        p,
        q1,
        q2: 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn pi1_star_examples() {
        let mut t = GameParameters::baseline(5.0);
        assert_eq!(pi1_star(&t).unwrap(), 0.75);
        // indifference −β₁ = π(−β₁−β₀) + (1−π)(σ₂+σ₁) solved directly
        let pi = (t.sigma2 + t.sigma1 + t.beta1) / (t.sigma2 + t.sigma1 + t.beta1 + t.beta0);
        assert!(close(
            -t.beta1,
            pi * (-t.beta1 - t.beta0) + (1.0 - pi) * (t.sigma2 + t.sigma1),
            1e-12
        ));
        t.beta0 = 0.0;
        assert_eq!(pi1_star(&t).unwrap(), 1.0);
        let t = GameParameters {
            sigma2: 0.0,
            sigma1: 0.0,
            beta1: 0.0,
            ..GameParameters::baseline(0.0)
        };
        assert_eq!(pi1_star(&t).unwrap(), 0.0);
    }

    #[test]
    fn q1_examples() {
        let t = GameParameters::baseline(40.0);
        let q = q1(&t).unwrap();
        assert!(close(q, 85.0 / 90.0, 1e-15));
        assert!(close(
            -t.sigma2,
            (1.0 - q) * (t.b1 + t.beta1) - q * (t.sigma2 + t.sigma1),
            1e-12
        ));
        assert_eq!(q1(&GameParameters { sigma1: 0.0, ..t }).unwrap(), 1.0);
        let zero = GameParameters {
            b1: 0.0,
            sigma2: 0.0,
            beta1: 0.0,
            ..t
        };
        assert_eq!(q1(&zero).unwrap(), 0.0);
    }

    #[test]
    fn reply_probability_examples() {
        let t = GameParameters::baseline(40.0);
        assert_eq!(reply_prob_p(0.0, &t).unwrap(), 0.0);
        let star = pi1_star(&t).unwrap();
        let pe = star / (2.0 - star);
        let p = reply_prob_p(pe, &t).unwrap();
        assert!(close(pe / (pe + (1.0 - pe) * p), star, 1e-12));
        let p = reply_prob_p(0.7229, &GameParameters::baseline(40.0)).unwrap();
        assert!(close(p, 0.2609, 5e-4), "{p}");
        assert!(matches!(
            reply_prob_p(star, &t),
            Err(EquilibriumError::NoInteriorMixing { .. })
        ));
    }

    #[test]
    fn phi_examples() {
        let t = GameParameters::baseline(5.0);
        let v = phi(0.0, &t).unwrap();
        assert!(close(v, -3.9394, 1e-3), "{v}");
        assert!(close(v, phi_linear(0.5, &t).unwrap(), 1e-12));
        assert_eq!(phi_linear(0.0, &t).unwrap(), t.sigma2);
        // near π₁*, p → 1 and φ turns negative
        let t = GameParameters::baseline(40.0);
        let star = pi1_star(&t).unwrap();
        let v = phi(2.0 * (star - 1e-9) - 1.0, &t).unwrap();
        assert!(v < 0.0);
        assert!(phi(2.0 * star - 1.0, &t).is_err());
    }

    #[test]
    fn spot_solutions() {
        let s = solve_pbe(&GameParameters::baseline(5.0)).unwrap();
        assert_eq!(s.eq_type, EqType::NeverChallenge);
        assert_eq!(s.pi_star, 0.0);

        let t = GameParameters::baseline(30.0);
        let s = solve_pbe(&t).unwrap();
        assert_eq!(s.eq_type, EqType::MixedChallenge);
        assert!(close(s.pi_star, 0.3617, 5e-4), "{}", s.pi_star);
        assert!(close(s.q2, 0.895, 1e-3), "{}", s.q2);
        assert!(close(phi_slope(&t).unwrap(), -44.0625, 1e-12));

        let s = solve_pbe(&GameParameters::baseline(40.0)).unwrap();
        assert_eq!(s.eq_type, EqType::AlwaysChallenge);
        assert!(close(s.pi_star, 0.4458, 5e-4));
        assert!(close(s.q1, 0.9444, 5e-4));
        assert!(close(s.p, 0.2609, 5e-4));
        assert!(phi(s.pi_star, &GameParameters::baseline(40.0)).unwrap() > 0.0);
    }

    #[test]
    fn exact_phi_adds_the_final_bounty_term() {
        let t = GameParameters::baseline(30.0);
        for pi_star in [0.0, 0.2, 0.5] {
            let pe = (1.0 + pi_star) / 2.0;
            let gap = phi_exact(pi_star, &t).unwrap() - phi(pi_star, &t).unwrap();
            assert!(close(gap, pe * q1(&t).unwrap() * t.beta0, 1e-12));
        }
    }

    #[test]
    fn degenerate_parameters_are_rejected() {
        let zero = GameParameters {
            b0: 0.0,
            b1: 0.0,
            b2: 0.0,
            sigma1: 0.0,
            sigma2: 0.0,
            beta0: 0.0,
            beta1: 0.0,
        };
        assert!(matches!(solve_pbe(&zero), Err(EquilibriumError::Degenerate(_))));
        let neg = GameParameters {
            b2: -1.0,
            ..GameParameters::baseline(5.0)
        };
        assert!(solve_pbe(&neg).is_err());
        assert!(GameParameters::baseline(1.0).with("gamma", 1.0).is_err());
    }

    #[test]
    fn eq_type_serializes_as_number() {
        assert_eq!(serde_json::to_string(&EqType::MixedChallenge).unwrap(), "2");
        assert_eq!(serde_json::from_str::<EqType>("3").unwrap(), EqType::NeverChallenge);
        assert!(serde_json::from_str::<EqType>("4").is_err());
    }
}
