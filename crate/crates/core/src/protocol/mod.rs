//! The claim/question debate state machine with escrow and payouts.

mod instance;
mod ledger;
mod movelog;
mod params;
mod resolve;
mod settle;
mod types;

use thiserror::Error;

use crate::proof::{Length, ValidationReport};
use crate::verifier::VerifierError;

pub use instance::{InstanceConfig, Node, NodeKind, ProtocolInstance, Snapshot};
pub use ledger::Ledger;
pub use movelog::{read_move_log, replay, replay_records, write_move_log, Move, MoveRecord, ReplayError, Setup};
pub use params::{LevelParameters, MachineParameters, ParameterCascade};
pub use settle::{Settlement, Transfer, TransferReason};
pub use types::{AccountId, Mode, NodeId, Resolution, Status, Timestamp};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProtocolError {
    #[error("insufficient funds: {account} needs {needed}, has {available}")]
    InsufficientFunds {
        account: AccountId,
        needed: u64,
        available: u64,
    },
    #[error("window closed: {node} stopped accepting moves at {closes}, move at {t}")]
    WindowClosed { node: NodeId, closes: u64, t: u64 },
    #[error("bad step index {step} (chain has {len} steps)")]
    BadStepIndex { step: usize, len: usize },
    #[error("machine claims are not questionable ({0})")]
    MachineClaimNotQuestionable(NodeId),
    #[error("{0} cannot be the origin of this move")]
    WrongTarget(NodeId),
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("level-0 questions can only be answered by machine claims")]
    ChainAtMachineLevel,
    #[error("structural violation: {}", .0.violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Structural(ValidationReport),
    #[error("length exceeded: {length} > {limit}")]
    LengthExceeded { length: Length, limit: u64 },
    #[error("time moving backwards: clock is {clock}, requested {to}")]
    TimeBackwards { clock: u64, to: u64 },
    #[error("instance stopped: the root already has a status")]
    Stopped,
    #[error("unresolved nodes")]
    UnresolvedNodes,
    #[error("instance already settled")]
    AlreadySettled,
    #[error("invalid cascade: {0}")]
    InvalidCascade(String),
    #[error("root claims require a zero upward stake at the root level, cascade has {0}")]
    RootStakeUp(u64),
    #[error("the first move must be a root claim or root question")]
    NoRoot,
    #[error("instance already has a root")]
    SecondRoot,
    #[error(transparent)]
    Verifier(#[from] VerifierError),
}
