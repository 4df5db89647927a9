use std::collections::BTreeMap;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use super::ledger::Ledger;
use super::movelog::{Move, MoveRecord};
use super::params::ParameterCascade;
use super::resolve::compute_statuses;
use super::settle::{settle_nodes, Settlement};
use super::types::{AccountId, Mode, NodeId, Resolution, Status, Timestamp};
use super::ProtocolError;
use crate::canonical;
use crate::proof::{validate_chain, LengthMeasure, Proof, ProofChain, Statement};
use crate::verifier::{Verdict, VerifierBackend};

/// Everything fixed when an instance is created, apart from the root move.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceConfig {
    pub cascade: ParameterCascade,
    #[serde(default)]
    pub verifier: VerifierBackend,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub measure: LengthMeasure,
}

impl InstanceConfig {
    pub fn new(cascade: ParameterCascade) -> Self {
        Self {
            cascade,
            verifier: VerifierBackend::Toy,
            mode: Mode::Quiescence,
            measure: LengthMeasure::unit(),
        }
    }

    pub fn with_verifier(mut self, verifier: VerifierBackend) -> Self {
        self.verifier = verifier;
        self
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum NodeKind {
    Claim {
        proof: Proof,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        verdict: Option<Verdict>,
    },
    Question {
        /// Disputed step (1-based); none for a root question.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        step: Option<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub id: NodeId,
    pub owner: AccountId,
    pub origin: Option<NodeId>,
    pub level: u32,
    pub statement: Statement,
    #[serde(flatten)]
    pub kind: NodeKind,
    pub posted_at: Timestamp,
    /// Tokens locked at posting, including any burned verification cost.
    pub escrow: u64,
    pub status: Status,
    pub determined_at: Option<Timestamp>,
    pub children: Vec<NodeId>,
}

impl Node {
    pub fn is_claim(&self) -> bool {
        matches!(self.kind, NodeKind::Claim { .. })
    }

    pub fn is_question(&self) -> bool {
        !self.is_claim()
    }

    pub fn is_machine_claim(&self) -> bool {
        matches!(
            &self.kind,
            NodeKind::Claim {
                proof: Proof::Machine(_),
                ..
            }
        )
    }

    pub fn chain(&self) -> Option<&ProofChain> {
        match &self.kind {
            NodeKind::Claim { proof, .. } => proof.as_chain(),
            NodeKind::Question { .. } => None,
        }
    }

    pub fn proof(&self) -> Option<&Proof> {
        match &self.kind {
            NodeKind::Claim { proof, .. } => Some(proof),
            NodeKind::Question { .. } => None,
        }
    }

    pub fn step(&self) -> Option<usize> {
        match self.kind {
            NodeKind::Question { step } => step,
            NodeKind::Claim { .. } => None,
        }
    }

    pub fn verdict(&self) -> Option<Verdict> {
        match self.kind {
            NodeKind::Claim { verdict, .. } => verdict,
            NodeKind::Question { .. } => None,
        }
    }

    /// Time at which this node stops accepting children; none for machine claims.
    pub fn window_closes(&self, cascade: &ParameterCascade) -> Option<u64> {
        let span = match &self.kind {
            NodeKind::Claim {
                proof: Proof::Machine(_),
                ..
            } => return None,
            NodeKind::Claim { .. } => cascade.level(self.level).verification_time,
            NodeKind::Question { .. } => cascade.response_time(self.level),
        };
        Some(self.posted_at.time.saturating_add(span))
    }
}

/// A single debate tree: nodes, escrow and the clock.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProtocolInstance {
    config: InstanceConfig,
    nodes: Vec<Node>,
    ledger: Ledger,
    initial_balances: BTreeMap<AccountId, u64>,
    clock: u64,
    next_seq: u64,
    log: Vec<MoveRecord>,
    events: Vec<Resolution>,
    stopped_at: Option<Timestamp>,
    settlement: Option<Settlement>,
}

/// Serializable view of an instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Snapshot {
    pub clock: u64,
    pub next_seq: u64,
    pub mode: Mode,
    pub nodes: Vec<Node>,
    pub ledger: Ledger,
    pub stopped_at: Option<Timestamp>,
    pub settled: bool,
}

impl ProtocolInstance {
    fn empty(config: InstanceConfig, ledger: Ledger) -> Result<Self, ProtocolError> {
        config.cascade.validate()?;
        Ok(Self {
            initial_balances: ledger.balances.clone(),
            config,
            nodes: Vec::new(),
            ledger,
            clock: 0,
            next_seq: 1,
            log: Vec::new(),
            events: Vec::new(),
            stopped_at: None,
            settlement: None,
        })
    }

    /// Starts an instance whose root is a level-L claim.
    pub fn create_root_claim(
        config: InstanceConfig,
        ledger: Ledger,
        owner: AccountId,
        statement: Statement,
        chain: ProofChain,
        t: u64,
    ) -> Result<Self, ProtocolError> {
        let mut instance = Self::empty(config, ledger)?;
        instance.apply(owner, Move::RootClaim { statement, chain }, t)?;
        Ok(instance)
    }

    /// Starts an instance whose root is a level-L question.
    pub fn create_root_question(
        config: InstanceConfig,
        ledger: Ledger,
        owner: AccountId,
        statement: Statement,
        t: u64,
    ) -> Result<Self, ProtocolError> {
        let mut instance = Self::empty(config, ledger)?;
        instance.apply(owner, Move::RootQuestion { statement }, t)?;
        Ok(instance)
    }

    /// Starts an instance from its root move.
    pub fn create(
        config: InstanceConfig,
        ledger: Ledger,
        owner: AccountId,
        root: Move,
        t: u64,
    ) -> Result<Self, ProtocolError> {
        if !root.is_root() {
            return Err(ProtocolError::NoRoot);
        }
        let mut instance = Self::empty(config, ledger)?;
        instance.apply(owner, root, t)?;
        Ok(instance)
    }

    pub fn config(&self) -> &InstanceConfig {
        &self.config
    }

    pub fn cascade(&self) -> &ParameterCascade {
        &self.config.cascade
    }

    pub fn mode(&self) -> Mode {
        self.config.mode
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> Option<&Node> {
        self.nodes.get(id.0 as usize)
    }

    pub fn root(&self) -> &Node {
        &self.nodes[0]
    }

    pub fn ledger(&self) -> &Ledger {
        &self.ledger
    }

    pub fn initial_balances(&self) -> &BTreeMap<AccountId, u64> {
        &self.initial_balances
    }

    pub fn clock(&self) -> u64 {
        self.clock
    }

    pub fn log(&self) -> &[MoveRecord] {
        &self.log
    }

    /// Every status change so far, in the order resolution found them.
    pub fn events(&self) -> &[Resolution] {
        &self.events
    }

    /// Set once the root is statused in early-stop mode.
    pub fn stopped_at(&self) -> Option<Timestamp> {
        self.stopped_at
    }

    pub fn settlement(&self) -> Option<&Settlement> {
        self.settlement.as_ref()
    }

    pub fn is_settled(&self) -> bool {
        self.settlement.is_some()
    }

    pub fn status(&self, id: NodeId) -> Option<Status> {
        self.node(id).map(|n| n.status)
    }

    /// Latest window-closing time over all nodes.
    pub fn last_deadline(&self) -> u64 {
        self.nodes
            .iter()
            .filter_map(|n| n.window_closes(&self.config.cascade))
            .max()
            .unwrap_or(self.clock)
    }

    /// Whether every node is statused and every window has closed.
    pub fn is_quiescent(&self) -> bool {
        self.nodes.iter().all(|n| !n.status.is_pending()) && self.clock >= self.last_deadline()
    }

    /// Whether `settle` may be called.
    pub fn is_settleable(&self) -> bool {
        match self.config.mode {
            Mode::Quiescence => self.is_quiescent(),
            Mode::EarlyStop => !self.root().status.is_pending(),
        }
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot {
            clock: self.clock,
            next_seq: self.next_seq,
            mode: self.config.mode,
            nodes: self.nodes.clone(),
            ledger: self.ledger.clone(),
            stopped_at: self.stopped_at,
            settled: self.settlement.is_some(),
        }
    }

    /// Canonical JSON of [`snapshot`](Self::snapshot).
    pub fn snapshot_json(&self) -> String {
        canonical::to_canonical_string(&self.snapshot())
    }

    /// Moves the clock to `to` and resolves statuses there.
    pub fn advance_clock(&mut self, to: u64) -> Result<Vec<Resolution>, ProtocolError> {
        if to < self.clock {
            return Err(ProtocolError::TimeBackwards { clock: self.clock, to });
        }
        self.clock = to;
        Ok(self.resolve())
    }

    /// Recomputes the status fixpoint at the current clock and records changes.
    pub fn resolve(&mut self) -> Vec<Resolution> {
        if self.nodes.is_empty() {
            return Vec::new();
        }
        let mut computed = compute_statuses(&self.nodes, &self.config.cascade, self.clock);
        if self.config.mode == Mode::EarlyStop {
            if let (status, Some(root_at)) = computed[0] {
                debug_assert!(!status.is_pending());
                for entry in computed.iter_mut() {
                    if entry.1.is_some_and(|at| at > root_at) {
                        *entry = (Status::Pending, None);
                    }
                }
                self.stopped_at = Some(root_at);
            }
        }
        let mut changes = Vec::new();
        for (node, (status, at)) in self.nodes.iter_mut().zip(computed) {
            if node.status.is_pending() && !status.is_pending() {
                node.status = status;
                node.determined_at = at;
                changes.push(Resolution {
                    node: node.id,
                    status,
                    determined_at: at.expect("statused nodes carry a time"),
                });
            } else {
                debug_assert!(node.status.is_pending() || node.status == status);
            }
        }
        changes.sort_by_key(|r| (r.determined_at, r.node));
        self.events.extend(changes.iter().copied());
        changes
    }

    pub fn post_question(
        &mut self,
        owner: AccountId,
        origin: NodeId,
        step: usize,
        t: u64,
    ) -> Result<NodeId, ProtocolError> {
        self.apply(owner, Move::Question { origin, step }, t)
    }

    pub fn post_answer_claim(
        &mut self,
        owner: AccountId,
        origin: NodeId,
        proof: Proof,
        t: u64,
    ) -> Result<NodeId, ProtocolError> {
        self.apply(owner, Move::Answer { origin, proof }, t)
    }

    /// Checks `mv` at time `t` without changing the instance.
    pub fn check_move(&self, owner: &AccountId, mv: &Move, t: u64) -> Result<(), ProtocolError> {
        let mut probe = self.clone();
        probe.log.clear();
        probe.events.clear();
        probe.apply(owner.clone(), mv.clone(), t).map(|_| ())
    }

    /// Advances the clock to `t`, validates `mv` and applies it.
    pub fn apply(&mut self, owner: AccountId, mv: Move, t: u64) -> Result<NodeId, ProtocolError> {
        if self.settlement.is_some() {
            return Err(ProtocolError::AlreadySettled);
        }
        if t < self.clock {
            return Err(ProtocolError::TimeBackwards {
                clock: self.clock,
                to: t,
            });
        }
        if mv.is_root() != self.nodes.is_empty() {
            return Err(if self.nodes.is_empty() {
                ProtocolError::NoRoot
            } else {
                ProtocolError::SecondRoot
            });
        }
        // Resolution at `t` must see the state before this move, but a
        // rejected move must not leave the clock advanced.
        let mut next = self.clone();
        next.advance_clock(t)?;
        if next.stopped_at.is_some() {
            return Err(ProtocolError::Stopped);
        }
        let posted_at = Timestamp::new(t, next.next_seq);
        let id = NodeId(next.nodes.len() as u64);
        let node = next.build_node(id, &owner, &mv, posted_at)?;

        let burn = if node.is_machine_claim() {
            next.config.cascade.machine.cost
        } else {
            0
        };
        next.ledger.lock(&owner, id, node.escrow, burn)?;
        if let Some(parent) = node.origin {
            next.nodes[parent.0 as usize].children.push(id);
        }
        next.nodes.push(node);
        next.log.push(MoveRecord::new(posted_at, owner, mv));
        next.next_seq += 1;
        next.resolve();
        *self = next;
        Ok(id)
    }

    fn build_node(
        &self,
        id: NodeId,
        owner: &AccountId,
        mv: &Move,
        posted_at: Timestamp,
    ) -> Result<Node, ProtocolError> {
        let cascade = &self.config.cascade;
        let root_level = cascade.root_level();
        let t = posted_at.time;
        let node = |origin, level, statement, kind, escrow| Node {
            id,
            owner: owner.clone(),
            origin,
            level,
            statement,
            kind,
            posted_at,
            escrow,
            status: Status::Pending,
            determined_at: None,
            children: Vec::new(),
        };
        match mv {
            Move::RootClaim { statement, chain } => {
                let params = cascade.level(root_level);
                if params.stake_up != 0 {
                    return Err(ProtocolError::RootStakeUp(params.stake_up));
                }
                self.check_chain(statement, chain, root_level)?;
                let escrow = params.stake_up + params.stake_down;
                self.ledger.require(owner, escrow)?;
                let kind = NodeKind::Claim {
                    proof: Proof::Chain(chain.clone()),
                    verdict: None,
                };
                Ok(node(None, root_level, statement.clone(), kind, escrow))
            }
            Move::RootQuestion { statement } => {
                let escrow = cascade.bounty(root_level);
                self.ledger.require(owner, escrow)?;
                Ok(node(
                    None,
                    root_level,
                    statement.clone(),
                    NodeKind::Question { step: None },
                    escrow,
                ))
            }
            Move::Question { origin, step } => {
                let parent = self.node(*origin).ok_or(ProtocolError::UnknownNode(*origin))?;
                let chain = match &parent.kind {
                    NodeKind::Claim {
                        proof: Proof::Chain(chain),
                        ..
                    } => chain,
                    NodeKind::Claim {
                        proof: Proof::Machine(_),
                        ..
                    } => return Err(ProtocolError::MachineClaimNotQuestionable(*origin)),
                    NodeKind::Question { .. } => return Err(ProtocolError::WrongTarget(*origin)),
                };
                let closes = parent.window_closes(cascade).expect("chain claims have a window");
                if t >= closes {
                    return Err(ProtocolError::WindowClosed {
                        node: *origin,
                        closes,
                        t,
                    });
                }
                let statement = chain
                    .step_statement(&parent.statement, *step)
                    .ok_or(ProtocolError::BadStepIndex {
                        step: *step,
                        len: chain.len(),
                    })?;
                let level = parent.level - 1;
                let escrow = cascade.bounty(level);
                self.ledger.require(owner, escrow)?;
                Ok(node(
                    Some(*origin),
                    level,
                    statement,
                    NodeKind::Question { step: Some(*step) },
                    escrow,
                ))
            }
            Move::Answer { origin, proof } => {
                let parent = self.node(*origin).ok_or(ProtocolError::UnknownNode(*origin))?;
                if parent.is_claim() {
                    return Err(ProtocolError::WrongTarget(*origin));
                }
                let closes = parent.window_closes(cascade).expect("questions have a window");
                if t >= closes {
                    return Err(ProtocolError::WindowClosed {
                        node: *origin,
                        closes,
                        t,
                    });
                }
                let statement = parent.statement.clone();
                match proof {
                    Proof::Chain(chain) => {
                        if parent.level == 0 {
                            return Err(ProtocolError::ChainAtMachineLevel);
                        }
                        self.check_chain(&statement, chain, parent.level)?;
                        let params = cascade.level(parent.level);
                        let escrow = params.stake_up + params.stake_down;
                        self.ledger.require(owner, escrow)?;
                        let kind = NodeKind::Claim {
                            proof: proof.clone(),
                            verdict: None,
                        };
                        Ok(node(Some(*origin), parent.level, statement, kind, escrow))
                    }
                    Proof::Machine(machine) => {
                        let mp = &cascade.machine;
                        self.check_length(proof, mp.max_length)?;
                        let escrow = mp.stake_up + mp.cost;
                        self.ledger.require(owner, escrow)?;
                        let verdict = self.config.verifier.check_claim(Some(id), &statement, machine)?;
                        let kind = NodeKind::Claim {
                            proof: proof.clone(),
                            verdict: Some(verdict),
                        };
                        Ok(node(Some(*origin), 0, statement, kind, escrow))
                    }
                }
            }
        }
    }

    fn check_length(&self, proof: &Proof, limit: u64) -> Result<(), ProtocolError> {
        let length = proof.length(&self.config.measure);
        if length > Ratio::from_integer(limit) {
            return Err(ProtocolError::LengthExceeded { length, limit });
        }
        Ok(())
    }

    fn check_chain(&self, statement: &Statement, chain: &ProofChain, level: u32) -> Result<(), ProtocolError> {
        let report = validate_chain(statement, chain, level).expect("levels of chain claims are at least 1");
        if !report.is_valid() {
            return Err(ProtocolError::Structural(report));
        }
        self.check_length(
            &Proof::Chain(chain.clone()),
            self.config.cascade.level(level).max_length,
        )
    }

    /// Executes the payouts. Requires quiescence, or a statused root in early-stop mode.
    pub fn settle(&mut self) -> Result<Settlement, ProtocolError> {
        if self.settlement.is_some() {
            return Err(ProtocolError::AlreadySettled);
        }
        if self.nodes.is_empty() || !self.is_settleable() {
            return Err(ProtocolError::UnresolvedNodes);
        }
        let before = self.ledger.total();
        let transfers = settle_nodes(&self.nodes, &self.config.cascade);
        for tr in &transfers {
            self.ledger.release(tr.node, &tr.to, tr.amount);
        }
        assert!(self.ledger.escrowed.is_empty(), "escrow left after settlement");
        assert_eq!(self.ledger.total(), before, "settlement changed the token supply");
        let settlement = Settlement::new(transfers, &self.initial_balances, &self.ledger);
        self.settlement = Some(settlement.clone());
        Ok(settlement)
    }
}
