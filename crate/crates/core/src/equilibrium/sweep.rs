use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{outcome_probabilities, solve_pbe, EquilibriumError, GameParameters};

/// One CSV row. Cells other than `param` and `value` are empty on degenerate rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub param: String,
    pub value: f64,
    pub degenerate: bool,
    pub eq_type: Option<u8>,
    pub pi_star: Option<f64>,
    pub pi1_star: Option<f64>,
    pub pi_e: Option<f64>,
    pub p: Option<f64>,
    pub q1: Option<f64>,
    pub q2: Option<f64>,
    pub p_accept: Option<f64>,
    pub p_accept_and_valid: Option<f64>,
    pub p_accept_given_valid: Option<f64>,
    pub p_accept_given_invalid: Option<f64>,
    pub p_valid_given_accept: Option<f64>,
    pub p_valid_given_reject: Option<f64>,
    pub p_a2_given_accept_valid: Option<f64>,
    pub p_a1_given_accept_valid: Option<f64>,
    pub rr: Option<f64>,
}

pub const SWEEP_HEADER: &str =
    "param,value,degenerate,eq_type,pi_star,pi1_star,pi_e,p,q1,q2,p_accept,p_accept_and_valid,\
p_accept_given_valid,p_accept_given_invalid,p_valid_given_accept,p_valid_given_reject,p_a2_given_accept_valid,\
p_a1_given_accept_valid,rr";

fn row(base: &GameParameters, param: &str, value: f64) -> Result<SweepRow, EquilibriumError> {
    let theta = base.with(param, value)?;
    let mut row = SweepRow {
        param: param.to_string(),
        value,
        degenerate: true,
        eq_type: None,
        pi_star: None,
        pi1_star: None,
        pi_e: None,
        p: None,
        q1: None,
        q2: None,
        p_accept: None,
        p_accept_and_valid: None,
        p_accept_given_valid: None,
        p_accept_given_invalid: None,
        p_valid_given_accept: None,
        p_valid_given_reject: None,
        p_a2_given_accept_valid: None,
        p_a1_given_accept_valid: None,
        rr: None,
    };
    let Ok(sol) = solve_pbe(&theta) else {
        return Ok(row);
    };
    let o = outcome_probabilities(&sol, &theta)?;
    row.degenerate = false;
    row.eq_type = Some(sol.eq_type.number());
    row.pi_star = Some(sol.pi_star);
    row.pi1_star = Some(sol.pi1_star);
    row.pi_e = Some(sol.pi_e);
    row.p = Some(sol.p);
    row.q1 = Some(sol.q1);
    row.q2 = Some(sol.q2);
    row.p_accept = Some(o.p_accept);
    row.p_accept_and_valid = Some(o.p_accept_and_valid);
    row.p_accept_given_valid = Some(o.p_accept_given_valid);
    row.p_accept_given_invalid = Some(o.p_accept_given_invalid);
    row.p_valid_given_accept = Some(o.p_valid_given_accept);
    row.p_valid_given_reject = o.p_valid_given_reject;
    row.p_a2_given_accept_valid = Some(o.p_a2_given_accept_valid);
    row.p_a1_given_accept_valid = Some(o.p_a1_given_accept_valid);
    row.rr = Some(o.reliability_ratio);
    Ok(row)
}

/// Solves at each value of `param`, keeping the order of `values`.
pub fn sweep(base: &GameParameters, param: &str, values: &[f64]) -> Result<Vec<SweepRow>, EquilibriumError> {
    if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(EquilibriumError::Degenerate(format!("sweep value {bad} is not finite")));
    }
    base.get(param)?;
    values.par_iter().map(|&v| row(base, param, v)).collect()
}

/// `steps` evenly spaced values from `from` to `to` inclusive.
pub fn linspace(from: f64, to: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![from],
        _ => (0..steps)
            .map(|i| from + (to - from) * i as f64 / (steps - 1) as f64)
            .collect(),
    }
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("rows serialize");
    }
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("csv is utf-8")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_matches_serialized_fields() {
        let rows = sweep(&GameParameters::baseline(0.0), "sigma2", &[5.0]).unwrap();
        let csv = sweep_csv(&rows);
        assert_eq!(csv.lines().next().unwrap(), SWEEP_HEADER);
    }

    #[test]
    fn degenerate_rows_are_marked() {
        let base = GameParameters {
            b1: 0.0,
            sigma1: 0.0,
            beta1: 0.0,
            beta0: 0.0,
            ..GameParameters::baseline(0.0)
        };
        let rows = sweep(&base, "sigma2", &[0.0, 1.0]).unwrap();
        assert!(rows[0].degenerate);
        assert!(!rows[1].degenerate);
        assert!(sweep(&base, "sigma2", &[f64::NAN]).is_err());
        assert!(sweep(&base, "nope", &[1.0]).is_err());
    }

    #[test]
    fn linspace_endpoints() {
        let v = linspace(0.0, 60.0, 121);
        assert_eq!(v.len(), 121);
        assert_eq!(v[0], 0.0);
        assert_eq!(v[120], 60.0);
        assert_eq!(v[1], 0.5);
    }
}
