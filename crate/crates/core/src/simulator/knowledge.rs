use std::collections::BTreeMap;

use crate::proof::{ChainDocument, MachineProof, Proof, ProofChain, ProofTree, Statement};
use crate::verifier::{bogus_proof, toy_prove, VerifierBackend};

/// What agents know: the scripted proof tree, indexed by the statement each
/// chain proves, and the verifier that decides machine-level claims.
#[derive(Debug, Clone)]
pub struct Knowledge {
    root: Statement,
    chains: BTreeMap<String, ProofChain>,
    verifier: VerifierBackend,
}

impl Knowledge {
    pub fn new(document: &ChainDocument, verifier: VerifierBackend) -> Self {
        let mut chains = BTreeMap::new();
        index(&document.target, &document.proof, &mut chains);
        Self {
            root: document.target.clone(),
            chains,
            verifier,
        }
    }

    pub fn root(&self) -> &Statement {
        &self.root
    }

    pub fn verifier(&self) -> &VerifierBackend {
        &self.verifier
    }

    /// The scripted chain proving `statement`, if any.
    pub fn chain_for(&self, statement: &Statement) -> Option<&ProofChain> {
        self.chains.get(&statement.key().0)
    }

    /// A machine proof of `statement` the verifier accepts, if one is held.
    pub fn machine_proof(&self, statement: &Statement) -> Option<MachineProof> {
        let candidate = toy_prove(statement).unwrap_or_else(|| bogus_proof(statement));
        match self.verifier.check(statement, &candidate) {
            Ok(v) if v.validated => Some(candidate),
            _ => None,
        }
    }

    /// Ground truth: a statement is valid iff a machine proof of it is held,
    /// or its scripted chain has only valid steps. A chain citing a statement
    /// already under evaluation proves nothing new.
    pub fn is_valid(&self, statement: &Statement) -> bool {
        self.valid_avoiding(statement, &mut Vec::new())
    }

    fn valid_avoiding(&self, statement: &Statement, open: &mut Vec<String>) -> bool {
        if self.machine_proof(statement).is_some() {
            return true;
        }
        let key = statement.key().0;
        let Some(chain) = self.chains.get(&key) else {
            return false;
        };
        if open.contains(&key) {
            return false;
        }
        open.push(key);
        let ok = (1..=chain.len()).all(|j| {
            chain
                .step_statement(statement, j)
                .is_some_and(|s| self.valid_avoiding(&s, open))
        });
        open.pop();
        ok
    }

    /// The best answer held for a question at `level`: the scripted chain
    /// when the level allows one, else a machine proof.
    pub fn answer_for(&self, statement: &Statement, level: u32) -> Option<Proof> {
        if level > 0 {
            if let Some(chain) = self.chain_for(statement) {
                return Some(Proof::Chain(chain.clone()));
            }
        }
        self.machine_proof(statement).map(Proof::Machine)
    }
}

fn index(target: &Statement, tree: &ProofTree, out: &mut BTreeMap<String, ProofChain>) {
    out.entry(target.key().0).or_insert_with(|| tree.chain.clone());
    for (&j, sub) in &tree.expansions {
        if let Some(step) = tree.chain.step_statement(target, j) {
            index(&step, sub, out);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{scenario_statement, two_step_chain};

    #[test]
    fn two_step_tree_is_valid_and_indexed() {
        let target = scenario_statement();
        let doc = ChainDocument {
            target: target.clone(),
            proof: ProofTree::leaf(two_step_chain(&target)),
        };
        let k = Knowledge::new(&doc, VerifierBackend::Toy);
        assert!(k.chain_for(&target).is_some());
        assert!(k.is_valid(&target));
        assert!(matches!(k.answer_for(&target, 0), Some(Proof::Machine(_))));
        assert!(matches!(k.answer_for(&target, 1), Some(Proof::Chain(_))));
    }
}
