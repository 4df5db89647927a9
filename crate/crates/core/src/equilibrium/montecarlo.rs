use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{EquilibriumSolution, OutcomeProbabilities};

const CHUNK: u64 = 1 << 16;

/// An empirical frequency with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
    /// Size of the conditioning population.
    pub samples: u64,
}

impl Estimate {
    fn ratio(hits: u64, of: u64) -> Option<Self> {
        (of > 0).then(|| {
            let value = hits as f64 / of as f64;
            Self {
                value,
                std_error: (value * (1.0 - value) / of as f64).sqrt(),
                samples: of,
            }
        })
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Counts {
    games: u64,
    valid: u64,
    entered_valid: u64,
    entered_invalid: u64,
    accepted: u64,
    accepted_valid: u64,
    accepted_invalid: u64,
    accepted_valid_unchallenged: u64,
    accepted_valid_after_reply: u64,
    rejected: u64,
    rejected_valid: u64,
}

impl Counts {
    fn merge(mut self, o: Counts) -> Counts {
        self.games += o.games;
        self.valid += o.valid;
        self.entered_valid += o.entered_valid;
        self.entered_invalid += o.entered_invalid;
        self.accepted += o.accepted;
        self.accepted_valid += o.accepted_valid;
        self.accepted_invalid += o.accepted_invalid;
        self.accepted_valid_unchallenged += o.accepted_valid_unchallenged;
        self.accepted_valid_after_reply += o.accepted_valid_after_reply;
        self.rejected += o.rejected;
        self.rejected_valid += o.rejected_valid;
        self
    }
}

enum Outcome {
    NotPosted,
    Unchallenged,
    Abandoned,
    AcceptedAfterReply,
    MachineChecked,
}

fn play(sol: &EquilibriumSolution, rng: &mut ChaCha8Rng) -> (bool, Outcome) {
    let signal: f64 = rng.gen();
    let valid = rng.gen::<f64>() < signal;
    if signal < sol.pi_star {
        return (valid, Outcome::NotPosted);
    }
    if !rng.gen_bool(sol.q2) {
        return (valid, Outcome::Unchallenged);
    }
    if !valid && !rng.gen_bool(sol.p) {
        return (valid, Outcome::Abandoned);
    }
    if !rng.gen_bool(sol.q1) {
        return (valid, Outcome::AcceptedAfterReply);
    }
    (valid, Outcome::MachineChecked)
}

fn run_chunk(sol: &EquilibriumSolution, seed: u64, chunk: u64, n: u64) -> Counts {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    let mut c = Counts::default();
    for _ in 0..n {
        let (valid, outcome) = play(sol, &mut rng);
        let accepted = match outcome {
            Outcome::NotPosted | Outcome::Abandoned => false,
            Outcome::Unchallenged | Outcome::AcceptedAfterReply => true,
            Outcome::MachineChecked => valid,
        };
        c.games += 1;
        c.valid += valid as u64;
        if !matches!(outcome, Outcome::NotPosted) {
            if valid {
                c.entered_valid += 1;
            } else {
                c.entered_invalid += 1;
            }
        }
        if accepted {
            c.accepted += 1;
            if valid {
                c.accepted_valid += 1;
                match outcome {
                    Outcome::Unchallenged => c.accepted_valid_unchallenged += 1,
                    Outcome::AcceptedAfterReply => c.accepted_valid_after_reply += 1,
                    _ => {}
                }
            } else {
                c.accepted_invalid += 1;
            }
        } else {
            c.rejected += 1;
            c.rejected_valid += valid as u64;
        }
    }
    c
}

/// Monte Carlo estimates of each [`OutcomeProbabilities`] field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloReport {
    pub n: u64,
    pub seed: u64,
    pub p_accept: Estimate,
    pub p_accept_and_valid: Estimate,
    pub p_accept_given_valid: Option<Estimate>,
    pub p_accept_given_invalid: Option<Estimate>,
    pub p_valid_given_accept: Option<Estimate>,
    pub p_valid_given_reject: Option<Estimate>,
    pub p_a2_given_accept_valid: Option<Estimate>,
    pub p_a1_given_accept_valid: Option<Estimate>,
    pub p_enter_given_valid: Option<Estimate>,
    pub p_enter_given_invalid: Option<Estimate>,
    pub reliability_ratio: Option<Estimate>,
}

impl MonteCarloReport {
    pub fn fields(&self) -> [(&'static str, Option<Estimate>); 11] {
        [
            ("p_accept", Some(self.p_accept)),
            ("p_accept_and_valid", Some(self.p_accept_and_valid)),
            ("p_accept_given_valid", self.p_accept_given_valid),
            ("p_accept_given_invalid", self.p_accept_given_invalid),
            ("p_valid_given_accept", self.p_valid_given_accept),
            ("p_valid_given_reject", self.p_valid_given_reject),
            ("p_a2_given_accept_valid", self.p_a2_given_accept_valid),
            ("p_a1_given_accept_valid", self.p_a1_given_accept_valid),
            ("p_enter_given_valid", self.p_enter_given_valid),
            ("p_enter_given_invalid", self.p_enter_given_invalid),
            ("reliability_ratio", self.reliability_ratio),
        ]
    }

    /// Field-by-field comparison against closed-form values at `k` standard errors.
    pub fn compare(&self, exact: &OutcomeProbabilities, k: f64) -> Vec<MonteCarloComparison> {
        self.fields()
            .into_iter()
            .zip(exact.fields())
            .map(|((name, est), (_, want))| {
                let pass = match (est, want) {
                    (Some(e), Some(w)) => (e.value - w).abs() <= k * e.std_error + 1e-12,
                    (None, None) => true,
                    // an empty conditioning population is consistent with a
                    // zero-probability event only
                    (None, Some(_)) | (Some(_), None) => false,
                };
                MonteCarloComparison {
                    name,
                    exact: want,
                    estimate: est,
                    pass,
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloComparison {
    pub name: &'static str,
    pub exact: Option<f64>,
    pub estimate: Option<Estimate>,
    pub pass: bool,
}

/// Plays `n` games under `sol`. The result depends only on `(sol, n, seed)`.
pub fn monte_carlo_estimate(sol: &EquilibriumSolution, n: u64, seed: u64) -> MonteCarloReport {
    assert!(n >= 1, "at least one game");
    let chunks = n.div_ceil(CHUNK);
    let c = (0..chunks)
        .into_par_iter()
        .map(|i| run_chunk(sol, seed, i, CHUNK.min(n - i * CHUNK)))
        .reduce(Counts::default, Counts::merge);
    let invalid = c.games - c.valid;
    MonteCarloReport {
        n,
        seed,
        p_accept: Estimate::ratio(c.accepted, c.games).expect("n >= 1"),
        p_accept_and_valid: Estimate::ratio(c.accepted_valid, c.games).expect("n >= 1"),
        p_accept_given_valid: Estimate::ratio(c.accepted_valid, c.valid),
        p_accept_given_invalid: Estimate::ratio(c.accepted_invalid, invalid),
        p_valid_given_accept: Estimate::ratio(c.accepted_valid, c.accepted),
        p_valid_given_reject: Estimate::ratio(c.rejected_valid, c.rejected),
        p_a2_given_accept_valid: Estimate::ratio(c.accepted_valid_unchallenged, c.accepted_valid),
        p_a1_given_accept_valid: Estimate::ratio(c.accepted_valid_after_reply, c.accepted_valid),
        p_enter_given_valid: Estimate::ratio(c.entered_valid, c.valid),
        p_enter_given_invalid: Estimate::ratio(c.entered_invalid, invalid),
        reliability_ratio: Estimate::ratio(c.accepted_valid, c.accepted),
    }
}

#[cfg(test)]
mod tests {
    use super::super::{outcome_probabilities, solve_pbe, EqType, GameParameters};
    use super::*;

    #[test]
    fn fixed_seed_repeats() {
        let t = GameParameters::baseline(40.0);
        let sol = solve_pbe(&t).unwrap();
        assert_eq!(
            monte_carlo_estimate(&sol, 100_000, 7),
            monte_carlo_estimate(&sol, 100_000, 7)
        );
        assert_ne!(
            monte_carlo_estimate(&sol, 100_000, 7),
            monte_carlo_estimate(&sol, 100_000, 8)
        );
    }

    #[test]
    fn entry_measure_near_one() {
        let eps = 0.01;
        let sol = EquilibriumSolution {
            eq_type: EqType::NeverChallenge,
            pi_star: 1.0 - eps,
            pi1_star: 0.75,
            pi_e: 1.0 - eps / 2.0,
            p: 1.0,
            q1: 0.0,
            q2: 0.0,
        };
        let r = monte_carlo_estimate(&sol, 200_000, 1);
        assert!((r.p_accept.value - eps).abs() <= 3.0 * r.p_accept.std_error);
    }

    #[test]
    fn small_run_agrees_with_closed_form() {
        for s2 in [5.0, 30.0, 40.0] {
            let t = GameParameters::baseline(s2);
            let sol = solve_pbe(&t).unwrap();
            let exact = outcome_probabilities(&sol, &t).unwrap();
            let r = monte_carlo_estimate(&sol, 200_000, 42);
            for c in r.compare(&exact, 4.0) {
                assert!(c.pass, "sigma2 = {s2}: {c:?}");
            }
        }
    }
}
