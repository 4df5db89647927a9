//! Claim/question proof verification: a chain proof format with a toy
//! machine verifier, the escrowed protocol state machine, an agent-based
//! simulator and a solver for the two-level challenge game.

pub mod canonical;
pub mod equilibrium;
pub mod fixtures;
pub mod proof;
pub mod protocol;
pub mod simulator;
pub mod verifier;

pub use equilibrium::{solve_pbe, EqType, EquilibriumError, EquilibriumSolution, GameParameters};
pub use proof::{ChainDocument, Formula, ProofChain, ProofDocument, ProofTree, Statement, ValidationReport, Violation};
pub use protocol::{
    AccountId, InstanceConfig, Move, MoveRecord, NodeId, ParameterCascade, ProtocolError, ProtocolInstance, Settlement,
    Setup, Status, Timestamp,
};
pub use simulator::{run_scenario, ScenarioConfig, SimulationError, SimulationTrace};
pub use verifier::{Verdict, VerifierBackend};
