//! Machine-level arbitration of level-0 claims.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::proof::{Formula, MachineProof, PremiseRef, Statement};
use crate::protocol::NodeId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub validated: bool,
    /// 0-based index of the first offending step.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<usize>,
}

impl Verdict {
    pub fn valid() -> Self {
        Self {
            validated: true,
            diagnostic: None,
        }
    }

    pub fn invalid(at: Option<usize>) -> Self {
        Self {
            validated: false,
            diagnostic: at,
        }
    }
}

/// Scripted verdicts, looked up by claim node first and by statement hash second.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScriptedOracle {
    #[serde(default)]
    pub by_node: BTreeMap<NodeId, bool>,
    #[serde(default)]
    pub by_statement: BTreeMap<String, bool>,
}

impl ScriptedOracle {
    pub fn with_statement(mut self, statement: &Statement, valid: bool) -> Self {
        self.by_statement.insert(statement.key().0, valid);
        self
    }

    pub fn with_node(mut self, node: NodeId, valid: bool) -> Self {
        self.by_node.insert(node, valid);
        self
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VerifierBackend {
    #[default]
    Toy,
    Scripted(ScriptedOracle),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifierError {
    #[error("unscripted verdict for statement {0}")]
    Unscripted(String),
}

impl VerifierBackend {
    pub fn check(&self, statement: &Statement, proof: &MachineProof) -> Result<Verdict, VerifierError> {
        self.check_claim(None, statement, proof)
    }

    /// Like [`check`](Self::check), letting the scripted backend key on the claim node.
    pub fn check_claim(
        &self,
        node: Option<NodeId>,
        statement: &Statement,
        proof: &MachineProof,
    ) -> Result<Verdict, VerifierError> {
        match self {
            VerifierBackend::Toy => Ok(toy_check(statement, proof)),
            VerifierBackend::Scripted(oracle) => {
                let key = statement.key().0;
                let scripted = node
                    .and_then(|n| oracle.by_node.get(&n))
                    .or_else(|| oracle.by_statement.get(&key))
                    .copied()
                    .ok_or(VerifierError::Unscripted(key))?;
                Ok(if scripted {
                    Verdict::valid()
                } else {
                    Verdict::invalid(None)
                })
            }
        }
    }
}

pub fn check(statement: &Statement, proof: &MachineProof, backend: &VerifierBackend) -> Result<Verdict, VerifierError> {
    backend.check(statement, proof)
}

/// The toy natural-deduction checker.
pub fn toy_check(statement: &Statement, proof: &MachineProof) -> Verdict {
    let assumptions: Vec<&Formula> = statement.assumptions.iter().collect();
    for (i, step) in proof.steps.iter().enumerate() {
        if step.formula.atoms().iter().any(|a| !statement.context.declares(a)) {
            return Verdict::invalid(Some(i));
        }
        let mut premises = Vec::with_capacity(step.premises.len());
        for p in &step.premises {
            let formula = match *p {
                PremiseRef::Step(s) if s < i => &proof.steps[s].formula,
                PremiseRef::Assumption(a) if a < assumptions.len() => assumptions[a],
                _ => return Verdict::invalid(Some(i)),
            };
            premises.push(formula);
        }
        if !step.rule.admits(&premises, &step.formula) {
            return Verdict::invalid(Some(i));
        }
    }
    match proof.conclusion() {
        None => Verdict::invalid(Some(0)),
        Some(last) if *last != statement.conclusion => Verdict::invalid(Some(proof.len() - 1)),
        Some(_) => Verdict::valid(),
    }
}

/// Finds a one-step toy derivation of `statement` when one exists.
///
/// Covers reiteration, conjunction elimination and modus ponens over the
/// assumptions; enough for the shallow statements used in scenarios.
pub fn toy_prove(statement: &Statement) -> Option<MachineProof> {
    use crate::proof::{MachineStep, Rule};
    let goal = &statement.conclusion;
    let assumptions: Vec<&Formula> = statement.assumptions.iter().collect();
    let index = |f: &Formula| assumptions.iter().position(|a| *a == f);
    let single =
        |rule, premises: Vec<PremiseRef>| Some(MachineProof::new(vec![MachineStep::new(goal.clone(), rule, premises)]));
    if let Some(i) = index(goal) {
        return single(Rule::Reiterate, vec![PremiseRef::Assumption(i)]);
    }
    for (i, a) in assumptions.iter().enumerate() {
        match a {
            Formula::And(l, _) if **l == *goal => return single(Rule::AndElimLeft, vec![PremiseRef::Assumption(i)]),
            Formula::And(_, r) if **r == *goal => return single(Rule::AndElimRight, vec![PremiseRef::Assumption(i)]),
            Formula::Implies(x, c) if **c == *goal => {
                if let Some(j) = index(x) {
                    return single(
                        Rule::ImpElim,
                        vec![PremiseRef::Assumption(i), PremiseRef::Assumption(j)],
                    );
                }
            }
            _ => {}
        }
    }
    None
}

/// A proof of `statement`'s conclusion the toy checker always rejects.
pub fn bogus_proof(statement: &Statement) -> MachineProof {
    use crate::proof::{MachineStep, Rule};
    MachineProof::new(vec![MachineStep::new(statement.conclusion.clone(), Rule::AndIntro, [])])
}
