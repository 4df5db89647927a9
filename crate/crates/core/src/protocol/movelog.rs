use std::collections::BTreeMap;
use std::io::BufRead;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::instance::{InstanceConfig, ProtocolInstance};
use super::ledger::Ledger;
use super::types::{AccountId, NodeId, Timestamp};
use super::ProtocolError;
use crate::canonical;
use crate::proof::{Proof, ProofChain, Statement};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case")]
pub enum Move {
    RootClaim { statement: Statement, chain: ProofChain },
    RootQuestion { statement: Statement },
    Question { origin: NodeId, step: usize },
    Answer { origin: NodeId, proof: Proof },
}

impl Move {
    pub fn is_root(&self) -> bool {
        matches!(self, Move::RootClaim { .. } | Move::RootQuestion { .. })
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Move::RootClaim { .. } => "root_claim",
            Move::RootQuestion { .. } => "root_question",
            Move::Question { .. } => "question",
            Move::Answer { .. } => "answer",
        }
    }

    /// SHA-256 of the canonical payload.
    pub fn payload_hash(&self) -> String {
        let value = serde_json::to_value(self).expect("moves always serialize");
        canonical::canonical_hash(&value["payload"])
    }
}

/// One line of a move log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveRecord {
    pub seq: u64,
    pub time: u64,
    pub actor: AccountId,
    pub payload_hash: String,
    #[serde(flatten)]
    pub mv: Move,
}

impl MoveRecord {
    pub fn new(at: Timestamp, actor: AccountId, mv: Move) -> Self {
        Self {
            seq: at.seq,
            time: at.time,
            actor,
            payload_hash: mv.payload_hash(),
            mv,
        }
    }

    pub fn timestamp(&self) -> Timestamp {
        Timestamp::new(self.time, self.seq)
    }

    pub fn to_line(&self) -> String {
        canonical::to_canonical_string(self)
    }
}

/// Canonical JSON-lines rendering of a move log.
pub fn write_move_log(records: &[MoveRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&r.to_line());
        out.push('\n');
    }
    out
}

/// What a move log needs besides its moves: parameters and opening balances.
///
/// Unknown keys are rejected by the flattened config.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "RawSetup")]
pub struct Setup {
    #[serde(flatten)]
    pub config: InstanceConfig,
    pub accounts: BTreeMap<AccountId, u64>,
    /// Clock value to advance to after the last move.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<u64>,
}

// `flatten` ignores unknown keys, so deserialization goes through a flat mirror.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSetup {
    cascade: crate::protocol::ParameterCascade,
    #[serde(default)]
    verifier: crate::verifier::VerifierBackend,
    #[serde(default)]
    mode: crate::protocol::Mode,
    #[serde(default)]
    measure: crate::proof::LengthMeasure,
    accounts: BTreeMap<AccountId, u64>,
    #[serde(default)]
    horizon: Option<u64>,
}

impl From<RawSetup> for Setup {
    fn from(r: RawSetup) -> Self {
        Setup {
            config: InstanceConfig {
                cascade: r.cascade,
                verifier: r.verifier,
                mode: r.mode,
                measure: r.measure,
            },
            accounts: r.accounts,
            horizon: r.horizon,
        }
    }
}

impl Setup {
    pub fn ledger(&self) -> Ledger {
        Ledger {
            balances: self.accounts.clone(),
            ..Ledger::default()
        }
    }
}

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: {source}")]
    Illegal {
        line: usize,
        #[source]
        source: ProtocolError,
    },
    #[error("line {line}: payload hash mismatch")]
    HashMismatch { line: usize },
    #[error("line {line}: expected sequence number {expected}, log says {found}")]
    Sequence { line: usize, expected: u64, found: u64 },
    #[error("move log is empty and has no root")]
    Empty,
    #[error("horizon: {0}")]
    Horizon(#[source] ProtocolError),
    #[error("reading move log: {0}")]
    Io(#[from] std::io::Error),
}

impl ReplayError {
    pub fn line(&self) -> Option<usize> {
        match self {
            ReplayError::Parse { line, .. }
            | ReplayError::Illegal { line, .. }
            | ReplayError::HashMismatch { line }
            | ReplayError::Sequence { line, .. } => Some(*line),
            _ => None,
        }
    }
}

/// Parses JSON lines; blank lines are skipped. Line numbers are 1-based.
pub fn read_move_log(reader: impl BufRead) -> Result<Vec<(usize, MoveRecord)>, ReplayError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: MoveRecord = serde_json::from_str(&line).map_err(|e| ReplayError::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push((i + 1, record));
    }
    Ok(out)
}

/// Replays a move log against a setup.
pub fn replay(setup: &Setup, records: &[(usize, MoveRecord)]) -> Result<ProtocolInstance, ReplayError> {
    let mut instance: Option<ProtocolInstance> = None;
    for (line, record) in records {
        let line = *line;
        if record.payload_hash != record.mv.payload_hash() {
            return Err(ReplayError::HashMismatch { line });
        }
        let illegal = |source| ReplayError::Illegal { line, source };
        let id = match instance.as_mut() {
            None => {
                let created = ProtocolInstance::create(
                    setup.config.clone(),
                    setup.ledger(),
                    record.actor.clone(),
                    record.mv.clone(),
                    record.time,
                )
                .map_err(illegal)?;
                instance.insert(created).root().id
            }
            Some(inst) => inst
                .apply(record.actor.clone(), record.mv.clone(), record.time)
                .map_err(illegal)?,
        };
        let inst = instance.as_ref().expect("set above");
        let expected = inst.node(id).expect("just posted").posted_at.seq;
        if expected != record.seq {
            return Err(ReplayError::Sequence {
                line,
                expected,
                found: record.seq,
            });
        }
    }
    let mut instance = instance.ok_or(ReplayError::Empty)?;
    if let Some(h) = setup.horizon {
        if h > instance.clock() {
            instance.advance_clock(h).map_err(ReplayError::Horizon)?;
        }
    }
    Ok(instance)
}

/// Replays in-memory records, numbering them from line 1.
pub fn replay_records(setup: &Setup, records: &[MoveRecord]) -> Result<ProtocolInstance, ReplayError> {
    let numbered: Vec<(usize, MoveRecord)> = records.iter().cloned().enumerate().map(|(i, r)| (i + 1, r)).collect();
    replay(setup, &numbered)
}
