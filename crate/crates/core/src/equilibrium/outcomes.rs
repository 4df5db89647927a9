use serde::{Deserialize, Serialize};

use super::{EqType, EquilibriumError, EquilibriumSolution, GameParameters};

/// Acceptance probabilities under an equilibrium. `A` is acceptance, `X = 1`
/// validatability, `A₂`/`A₁` acceptance without a challenge / after one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutcomeProbabilities {
    pub p_accept: f64,
    pub p_accept_and_valid: f64,
    pub p_accept_given_valid: f64,
    pub p_accept_given_invalid: f64,
    pub p_valid_given_accept: f64,
    /// Undefined when every claim is accepted.
    pub p_valid_given_reject: Option<f64>,
    pub p_a2_given_accept_valid: f64,
    pub p_a1_given_accept_valid: f64,
    /// Claimer posts, given a validatable claim.
    pub p_enter_given_valid: f64,
    pub p_enter_given_invalid: f64,
    /// P(A, X=1) / P(A).
    pub reliability_ratio: f64,
}

impl OutcomeProbabilities {
    /// Named values, in a fixed order; `None` where undefined.
    pub fn fields(&self) -> [(&'static str, Option<f64>); 11] {
        [
            ("p_accept", Some(self.p_accept)),
            ("p_accept_and_valid", Some(self.p_accept_and_valid)),
            ("p_accept_given_valid", Some(self.p_accept_given_valid)),
            ("p_accept_given_invalid", Some(self.p_accept_given_invalid)),
            ("p_valid_given_accept", Some(self.p_valid_given_accept)),
            ("p_valid_given_reject", self.p_valid_given_reject),
            ("p_a2_given_accept_valid", Some(self.p_a2_given_accept_valid)),
            ("p_a1_given_accept_valid", Some(self.p_a1_given_accept_valid)),
            ("p_enter_given_valid", Some(self.p_enter_given_valid)),
            ("p_enter_given_invalid", Some(self.p_enter_given_invalid)),
            ("reliability_ratio", Some(self.reliability_ratio)),
        ]
    }
}

fn unit(name: &str, v: f64) -> Result<(), EquilibriumError> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(EquilibriumError::Inconsistent(format!(
            "{name} = {v} is not a probability"
        )))
    }
}

pub fn outcome_probabilities(
    sol: &EquilibriumSolution,
    theta: &GameParameters,
) -> Result<OutcomeProbabilities, EquilibriumError> {
    theta.validate()?;
    for (name, v) in [
        ("pi_star", sol.pi_star),
        ("p", sol.p),
        ("q1", sol.q1),
        ("q2", sol.q2),
        ("pi_e", sol.pi_e),
    ] {
        unit(name, v)?;
    }
    if sol.pi_star >= 1.0 {
        return Err(EquilibriumError::Inconsistent("pi_star must be below 1".into()));
    }
    let ps = sol.pi_star;
    let enter_valid = (1.0 + ps) * (1.0 - ps);
    let enter_invalid = (1.0 - ps) * (1.0 - ps);

    // probability an invalid posted claim survives
    let (survive, a2, a1) = match sol.eq_type {
        EqType::AlwaysChallenge => {
            if sol.q2 != 1.0 {
                return Err(EquilibriumError::Inconsistent("type 1 requires q2 = 1".into()));
            }
            (sol.p * (1.0 - sol.q1), 0.0, 1.0 - sol.q1)
        }
        EqType::MixedChallenge => (
            1.0 - sol.q2 + sol.q2 * sol.p * (1.0 - sol.q1),
            1.0 - sol.q2,
            sol.q2 * (1.0 - sol.q1),
        ),
        EqType::NeverChallenge => {
            if sol.q2 != 0.0 || ps != 0.0 {
                return Err(EquilibriumError::Inconsistent(
                    "type 3 requires pi* = 0 and q2 = 0".into(),
                ));
            }
            (1.0, 1.0, 0.0)
        }
    };
    let given_valid = enter_valid;
    let given_invalid = enter_invalid * survive;
    let joint = 0.5 * given_valid;
    let accept = 0.5 * (given_valid + given_invalid);
    let valid_given_accept = (1.0 + ps) / (1.0 + ps + (1.0 - ps) * survive);
    let reject_mass = ps * ps + 1.0 - enter_invalid * survive;
    let valid_given_reject = if reject_mass > 0.0 {
        Some(ps * ps / reject_mass)
    } else {
        None
    };
    Ok(OutcomeProbabilities {
        p_accept: accept,
        p_accept_and_valid: joint,
        p_accept_given_valid: given_valid,
        p_accept_given_invalid: given_invalid,
        p_valid_given_accept: valid_given_accept,
        p_valid_given_reject: valid_given_reject,
        p_a2_given_accept_valid: a2,
        p_a1_given_accept_valid: a1,
        p_enter_given_valid: enter_valid,
        p_enter_given_invalid: enter_invalid,
        reliability_ratio: joint / accept,
    })
}
