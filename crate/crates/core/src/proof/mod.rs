//! Statements, definitions and hierarchical claims of proof.

mod chain;
mod document;
mod formula;
mod machine;
mod measure;
mod statement;

use thiserror::Error;

pub use chain::{
    validate_chain, validate_tree, ChainStep, ProofChain, ProofTree, ReportEntry, ValidationReport, Violation,
};
pub use document::{parse_proof_document, ChainDocument, MachineDocument, ProofDocument};
pub use formula::{Formula, FormulaParseError, Token};
pub use machine::{MachineProof, MachineStep, PremiseRef, Rule};
pub use measure::{Length, LengthMeasure, Measurable, PREMISE_SYMBOL};
pub use statement::{Definition, DefinitionSet, DuplicateSymbol, Statement, StatementKey};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProofError {
    #[error("level limit must be at least 1")]
    LevelLimit,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DocumentError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema violation at {path}: {message}")]
    Schema { path: String, message: String },
}

/// Either kind of claim of proof.
#[derive(Debug, Clone, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Proof {
    Chain(ProofChain),
    Machine(MachineProof),
}

impl Proof {
    pub fn is_machine(&self) -> bool {
        matches!(self, Proof::Machine(_))
    }

    pub fn as_chain(&self) -> Option<&ProofChain> {
        match self {
            Proof::Chain(c) => Some(c),
            Proof::Machine(_) => None,
        }
    }

    pub fn length(&self, mu: &LengthMeasure) -> Length {
        match self {
            Proof::Chain(c) => mu.measure(c),
            Proof::Machine(m) => mu.measure(m),
        }
    }
}

/// μ of either claim-of-proof kind.
pub fn measure_length(proof: &Proof, mu: &LengthMeasure) -> Length {
    proof.length(mu)
}
