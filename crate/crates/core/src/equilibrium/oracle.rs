use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::{EquilibriumSolution, GameParameters};

/// A profitable unilateral deviation found at one decision node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Deviation {
    pub node: String,
    pub player: String,
    pub alternative: String,
    /// Payoff gain over the prescribed behaviour.
    pub gain: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DeviationReport {
    pub epsilon: f64,
    pub deviations: Vec<Deviation>,
}

impl DeviationReport {
    pub fn is_empty(&self) -> bool {
        self.deviations.is_empty()
    }

    pub fn max_gain(&self) -> f64 {
        self.deviations.iter().map(|d| d.gain).fold(0.0, f64::max)
    }
}

type Q = BigRational;

fn q(x: f64) -> Q {
    Q::from_float(x).expect("finite values")
}

fn qi(x: i64) -> Q {
    Q::from_integer(BigInt::from(x))
}

fn mix(prob: &Q, a: &Q, b: &Q) -> Q {
    prob * a + (Q::one() - prob) * b
}

struct Checker {
    eps: Q,
    epsilon: f64,
    out: Vec<Deviation>,
}

impl Checker {
    /// `prescribed` is the probability of taking `a` over `b`.
    fn binary(&mut self, node: &str, player: &str, prescribed: &Q, (a_name, a): (&str, Q), (b_name, b): (&str, Q)) {
        let current = mix(prescribed, &a, &b);
        for (name, value) in [(a_name, &a), (b_name, &b)] {
            let gain = value - &current;
            if gain > self.eps {
                self.out.push(Deviation {
                    node: node.into(),
                    player: player.into(),
                    alternative: name.into(),
                    gain: gain.to_f64().unwrap_or(f64::INFINITY),
                });
            }
        }
    }
}

/// Exact payoff evaluation at every decision node of the two-level game,
/// with beliefs obtained by Bayes' rule from the solution's strategies.
pub fn best_response_check(theta: &GameParameters, sol: &EquilibriumSolution, epsilon: f64) -> DeviationReport {
    assert!(epsilon > 0.0, "epsilon must be positive");
    let (b0, b1, b2) = (q(theta.b0), q(theta.b1), q(theta.b2));
    let (s1, s2) = (q(theta.sigma1), q(theta.sigma2));
    let (be0, be1) = (q(theta.beta0), q(theta.beta1));
    let (pi_star, p, q1, q2) = (q(sol.pi_star), q(sol.p), q(sol.q1), q(sol.q2));
    let one = Q::one();
    let mut ck = Checker {
        eps: q(epsilon),
        epsilon,
        out: Vec::new(),
    };

    // Level 0: Claimer supplies the machine proof iff she can.
    let machine_win = &b0 + &be1 + &be0;
    let machine_loss = -(&s2 + &s1);
    ck.binary(
        "machine_step|X=1",
        "claimer",
        &one,
        ("prove", machine_win.clone()),
        ("concede", machine_loss.clone()),
    );

    // Claimer's continuation after replying, by state.
    let after_reply_valid = mix(&q1, &machine_win, &(&b1 + &be1));
    let after_reply_invalid = mix(&q1, &machine_loss, &(&b1 + &be1));
    let no_reply = -s2.clone();
    ck.binary(
        "reply|X=1",
        "claimer",
        &one,
        ("reply", after_reply_valid.clone()),
        ("abandon", no_reply.clone()),
    );
    ck.binary(
        "reply|X=0",
        "claimer",
        &p,
        ("reply", after_reply_invalid.clone()),
        ("abandon", no_reply.clone()),
    );

    // Skeptic after a reply, with the Bayes posterior.
    let pi_e = (&one + &pi_star) / qi(2);
    let reach_reply = &pi_e + (&one - &pi_e) * &p;
    if reach_reply.is_positive() {
        let pi1 = &pi_e / &reach_reply;
        let challenge = mix(&pi1, &-(&be1 + &be0), &(&s2 + &s1));
        ck.binary(
            "second_challenge",
            "skeptic",
            &q1,
            ("challenge", challenge),
            ("concede", -be1.clone()),
        );
    }

    // Skeptic after the initial post.
    let skeptic_after_reply_valid = mix(&q1, &-(&be1 + &be0), &-be1.clone());
    let skeptic_after_reply_invalid = mix(&q1, &(&s2 + &s1), &-be1.clone());
    let skeptic_valid = skeptic_after_reply_valid;
    let skeptic_invalid = mix(&p, &skeptic_after_reply_invalid, &s2);
    let challenge = mix(&pi_e, &skeptic_valid, &skeptic_invalid);
    ck.binary(
        "first_challenge",
        "skeptic",
        &q2,
        ("challenge", challenge),
        ("ignore", Q::zero()),
    );

    // Claimer's entry: posting is linear in the signal, so the threshold
    // rule is optimal iff posting is unprofitable below π* and profitable above.
    let claimer_valid = after_reply_valid;
    let claimer_invalid = mix(&p, &after_reply_invalid, &no_reply);
    let post = |signal: &Q| mix(&q2, &mix(signal, &claimer_valid, &claimer_invalid), &b2);
    let at_threshold = post(&pi_star);
    let at_top = post(&one);
    for (label, value) in [("post|P=pi*", &at_threshold), ("post|P=1", &at_top)] {
        let gain = -value.clone();
        if gain > ck.eps {
            ck.out.push(Deviation {
                node: label.into(),
                player: "claimer".into(),
                alternative: "stay_out".into(),
                gain: gain.to_f64().unwrap_or(f64::INFINITY),
            });
        }
    }
    if pi_star.is_positive() {
        let below = [("post|P=pi*", &at_threshold), ("post|P=0", &post(&Q::zero()))];
        for (label, value) in below {
            if value > &ck.eps {
                ck.out.push(Deviation {
                    node: label.into(),
                    player: "claimer".into(),
                    alternative: "post_below_threshold".into(),
                    gain: value.to_f64().unwrap_or(f64::INFINITY),
                });
            }
        }
    }

    DeviationReport {
        epsilon: ck.epsilon,
        deviations: ck.out,
    }
}

#[cfg(test)]
mod tests {
    use super::super::{solve_pbe, EqType};
    use super::*;

    #[test]
    fn baseline_type1_is_an_epsilon_equilibrium() {
        let t = GameParameters::baseline(40.0);
        let r = best_response_check(&t, &solve_pbe(&t).unwrap(), 1e-9);
        assert!(r.is_empty(), "{r:?}");
    }

    #[test]
    fn baseline_type3_is_an_epsilon_equilibrium() {
        let t = GameParameters::baseline(5.0);
        let s = solve_pbe(&t).unwrap();
        assert_eq!(s.eq_type, EqType::NeverChallenge);
        let r = best_response_check(&t, &s, 1e-9);
        assert!(r.is_empty(), "{r:?}");
    }

    #[test]
    fn perturbed_q1_breaks_claimer_indifference() {
        let t = GameParameters::baseline(40.0);
        let mut s = solve_pbe(&t).unwrap();
        s.q1 = (s.q1 + 0.1).min(1.0);
        let r = best_response_check(&t, &s, 1e-9);
        assert!(r.deviations.iter().any(|d| d.node == "reply|X=0"), "{r:?}");
    }

    #[test]
    fn exact_challenge_value_under_mixed_solution() {
        // gain of a sure challenge is (1 − q₂) times the branch-by-branch φ
        let t = GameParameters::baseline(30.0);
        let s = solve_pbe(&t).unwrap();
        let r = best_response_check(&t, &s, 1e-9);
        let phi = super::super::phi_exact(s.pi_star, &t).unwrap();
        let want = (1.0 - s.q2) * phi;
        let found = r
            .deviations
            .iter()
            .find(|d| d.node == "first_challenge")
            .expect("deviation reported");
        assert!((found.gain - want).abs() < 1e-9, "{found:?} vs {want}");
    }
}
