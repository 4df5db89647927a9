//! Agent-based debates: strategies poll a protocol instance once per time
//! unit, in rounds, until nobody has anything more to say at that instant.

mod knowledge;
pub mod presets;
mod strategies;

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use knowledge::Knowledge;
pub use strategies::{
    attack_strategy, pad_with_decoys, AttackKind, Claimer, Defender, MisleaderVariant, Nitpicker, Passive, Plagiarist,
    ScriptedMove, Skeptic, Strategy, StrategySpec, View,
};

use crate::proof::{validate_tree, ChainDocument};
use crate::protocol::{
    replay_records, AccountId, InstanceConfig, Ledger, Move, MoveRecord, Node, ProtocolError, ProtocolInstance,
    ReplayError, Resolution, Settlement, Setup, Status, Timestamp,
};

/// Polling rounds per time unit before the simulator moves on regardless.
pub const MAX_ROUNDS: usize = 32;

#[derive(Debug, Error)]
pub enum SimulationError {
    #[error("ill-formed scenario: {0}")]
    Config(String),
    #[error("protocol error: {0}")]
    Protocol(#[from] ProtocolError),
    #[error("trace is not settled")]
    Unsettled,
    #[error("net payoffs sum to {sum}, expected -{burned}")]
    Conservation { sum: i64, burned: u64 },
    #[error("replay failed: {0}")]
    Replay(#[from] ReplayError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RootKind {
    Claim,
    Question,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RootSpec {
    pub kind: RootKind,
    pub owner: AccountId,
    #[serde(default)]
    pub time: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentSpec {
    pub name: AccountId,
    pub balance: u64,
    pub strategy: StrategySpec,
}

/// A complete, seeded simulation input. Ground truth is the proof document
/// together with the verifier: a statement is valid iff its scripted chain
/// is valid step by step, or the verifier accepts a machine proof of it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "RawScenario")]
pub struct ScenarioConfig {
    #[serde(default)]
    pub name: String,
    #[serde(flatten)]
    pub instance: InstanceConfig,
    pub root: RootSpec,
    pub proof: ChainDocument,
    pub agents: Vec<AgentSpec>,
    pub horizon: u64,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    #[serde(default)]
    name: String,
    cascade: crate::protocol::ParameterCascade,
    #[serde(default)]
    verifier: crate::verifier::VerifierBackend,
    #[serde(default)]
    mode: crate::protocol::Mode,
    #[serde(default)]
    measure: crate::proof::LengthMeasure,
    root: RootSpec,
    proof: ChainDocument,
    agents: Vec<AgentSpec>,
    horizon: u64,
    #[serde(default)]
    seed: u64,
}

impl From<RawScenario> for ScenarioConfig {
    fn from(r: RawScenario) -> Self {
        Self {
            name: r.name,
            instance: InstanceConfig {
                cascade: r.cascade,
                verifier: r.verifier,
                mode: r.mode,
                measure: r.measure,
            },
            root: r.root,
            proof: r.proof,
            agents: r.agents,
            horizon: r.horizon,
            seed: r.seed,
        }
    }
}

impl ScenarioConfig {
    /// Parses a JSON scenario, naming the offending path on failure.
    pub fn from_json(text: &str) -> Result<Self, SimulationError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| SimulationError::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<(), SimulationError> {
        let bad = |m: String| Err(SimulationError::Config(m));
        self.instance
            .cascade
            .validate()
            .map_err(|e| SimulationError::Config(e.to_string()))?;
        let mut names = BTreeSet::new();
        for a in &self.agents {
            if !names.insert(&a.name) {
                return bad(format!("duplicate agent {}", a.name));
            }
        }
        if !names.contains(&self.root.owner) {
            return bad(format!("root owner {} is not an agent", self.root.owner));
        }
        if self.root.time > self.horizon {
            return bad(format!(
                "root time {} is past the horizon {}",
                self.root.time, self.horizon
            ));
        }
        let level = self.instance.cascade.root_level();
        let report = validate_tree(&self.proof.target, &self.proof.proof, level)
            .map_err(|e| SimulationError::Config(e.to_string()))?;
        if !report.is_valid() {
            return bad(format!(
                "proof document has {} structural violations",
                report.violations.len()
            ));
        }
        Ok(())
    }

    pub fn setup(&self) -> Setup {
        Setup {
            config: self.instance.clone(),
            accounts: self.agents.iter().map(|a| (a.name.clone(), a.balance)).collect(),
            horizon: Some(self.horizon),
        }
    }
}

/// An intent the protocol refused.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RejectedIntent {
    pub time: u64,
    pub actor: AccountId,
    pub intent: Move,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum TraceEvent {
    Move(MoveRecord),
    Rejected(RejectedIntent),
    Resolution(Resolution),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeMetrics {
    pub nodes: usize,
    pub claims: usize,
    pub questions: usize,
    pub machine_claims: usize,
    /// Longest root-to-node path, in edges.
    pub depth: usize,
    pub machine_level_reached: bool,
    pub root_status: Status,
    pub root_determined_at: Option<Timestamp>,
}

impl TreeMetrics {
    fn of(nodes: &[Node]) -> Self {
        let mut depth = vec![0usize; nodes.len()];
        for n in nodes {
            if let Some(p) = n.origin {
                depth[n.id.0 as usize] = depth[p.0 as usize] + 1;
            }
        }
        let root = &nodes[0];
        Self {
            nodes: nodes.len(),
            claims: nodes.iter().filter(|n| n.is_claim()).count(),
            questions: nodes.iter().filter(|n| n.is_question()).count(),
            machine_claims: nodes.iter().filter(|n| n.is_machine_claim()).count(),
            depth: depth.iter().copied().max().unwrap_or(0),
            machine_level_reached: nodes.iter().any(|n| n.level == 0),
            root_status: root.status,
            root_determined_at: root.determined_at,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationTrace {
    pub name: String,
    pub seed: u64,
    pub setup: Setup,
    /// Everything in the order it happened.
    pub events: Vec<TraceEvent>,
    pub accepted: Vec<MoveRecord>,
    pub rejected: Vec<RejectedIntent>,
    pub resolutions: Vec<Resolution>,
    /// Clock when the instance was settled; also the setup's horizon.
    pub final_clock: u64,
    pub final_nodes: Vec<Node>,
    pub final_ledger: Ledger,
    pub settlement: Option<Settlement>,
    pub net: BTreeMap<AccountId, i64>,
    pub metrics: TreeMetrics,
}

impl SimulationTrace {
    pub fn node(&self, id: crate::protocol::NodeId) -> Option<&Node> {
        self.final_nodes.get(id.0 as usize)
    }

    pub fn net_of(&self, agent: &str) -> i64 {
        self.net.get(&AccountId::new(agent)).copied().unwrap_or(0)
    }

    /// Replays the accepted moves up to the final clock, settling if the run did.
    pub fn replay(&self) -> Result<ProtocolInstance, SimulationError> {
        let mut inst = replay_records(&self.setup, &self.accepted)?;
        if self.settlement.is_some() {
            inst.settle()?;
        }
        Ok(inst)
    }

    /// One JSON object per event, then a summary line.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&serde_json::to_string(e).expect("events serialize"));
            out.push('\n');
        }
        let summary = serde_json::json!({
            "event": "summary",
            "name": self.name,
            "seed": self.seed,
            "metrics": self.metrics,
            "net": self.net,
            "burned": self.final_ledger.burned,
        });
        out.push_str(&summary.to_string());
        out.push('\n');
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub name: String,
    pub seed: u64,
    pub root_status: Status,
    pub nodes: usize,
    pub claims: usize,
    pub questions: usize,
    pub machine_claims: usize,
    pub depth: usize,
    pub machine_level_reached: bool,
    pub accepted: usize,
    pub rejected: usize,
    pub burned: u64,
}

impl MetricsRow {
    pub fn of(trace: &SimulationTrace) -> Self {
        let m = &trace.metrics;
        Self {
            name: trace.name.clone(),
            seed: trace.seed,
            root_status: m.root_status,
            nodes: m.nodes,
            claims: m.claims,
            questions: m.questions,
            machine_claims: m.machine_claims,
            depth: m.depth,
            machine_level_reached: m.machine_level_reached,
            accepted: trace.accepted.len(),
            rejected: trace.rejected.len(),
            burned: trace.final_ledger.burned,
        }
    }
}

pub fn metrics_csv(traces: &[SimulationTrace]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for t in traces {
        w.serialize(MetricsRow::of(t)).expect("rows serialize");
    }
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("csv is utf-8")
}

/// A participant: an account with its decision rule.
pub struct Agent {
    pub name: AccountId,
    pub balance: u64,
    pub strategy: Box<dyn Strategy>,
}

pub fn run_scenario(config: &ScenarioConfig) -> Result<SimulationTrace, SimulationError> {
    let agents = config
        .agents
        .iter()
        .map(|a| Agent {
            name: a.name.clone(),
            balance: a.balance,
            strategy: a.strategy.build(),
        })
        .collect();
    run_with_agents(config, agents)
}

/// Runs `config` with caller-supplied agents in place of `config.agents`.
pub fn run_with_agents(config: &ScenarioConfig, mut agents: Vec<Agent>) -> Result<SimulationTrace, SimulationError> {
    config.validate()?;
    let names: BTreeSet<_> = agents.iter().map(|a| &a.name).collect();
    if names.len() != agents.len() || !names.contains(&config.root.owner) {
        return Err(SimulationError::Config(
            "agents must be distinct and include the root owner".into(),
        ));
    }
    let knowledge = Knowledge::new(&config.proof, config.instance.verifier.clone());
    let ledger = Ledger::with_balances(agents.iter().map(|a| (a.name.clone(), a.balance)));
    let target = config.proof.target.clone();
    let owner = agents
        .iter()
        .find(|a| a.name == config.root.owner)
        .expect("checked above");
    let root = match config.root.kind {
        RootKind::Claim => {
            let chain = owner
                .strategy
                .root_chain(&knowledge, &target)
                .ok_or_else(|| SimulationError::Config("root owner holds no chain for the root statement".into()))?;
            Move::RootClaim {
                statement: target,
                chain,
            }
        }
        RootKind::Question => Move::RootQuestion { statement: target },
    };
    let mut inst = ProtocolInstance::create(
        config.instance.clone(),
        ledger,
        config.root.owner.clone(),
        root,
        config.root.time,
    )?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut rec = Recorder::default();
    rec.sync(&inst);

    let mut order: Vec<usize> = (0..agents.len()).collect();
    for t in config.root.time..=config.horizon {
        if inst.stopped_at().is_some() {
            break;
        }
        inst.advance_clock(t)?;
        rec.sync(&inst);
        for _ in 0..MAX_ROUNDS {
            order.shuffle(&mut rng);
            let mut progressed = false;
            for &i in &order {
                let agent = &mut agents[i];
                let intents = {
                    let view = View {
                        instance: &inst,
                        knowledge: &knowledge,
                        me: &agent.name,
                        time: t,
                    };
                    agent.strategy.decide(&view, &mut rng)
                };
                for mv in intents {
                    match inst.apply(agent.name.clone(), mv.clone(), t) {
                        Ok(_) => progressed = true,
                        Err(e) => rec.events.push(TraceEvent::Rejected(RejectedIntent {
                            time: t,
                            actor: agent.name.clone(),
                            intent: mv,
                            reason: e.to_string(),
                        })),
                    }
                    rec.sync(&inst);
                }
            }
            if !progressed {
                break;
            }
        }
    }
    let end = inst.clock().max(inst.last_deadline()).max(config.horizon);
    if inst.stopped_at().is_none() {
        inst.advance_clock(end)?;
        rec.sync(&inst);
    }
    let settlement = inst.settle()?;
    Ok(rec.finish(config, inst, settlement))
}

#[derive(Default)]
struct Recorder {
    events: Vec<TraceEvent>,
    moves: usize,
    resolutions: usize,
}

impl Recorder {
    fn sync(&mut self, inst: &ProtocolInstance) {
        for r in &inst.log()[self.moves..] {
            self.events.push(TraceEvent::Move(r.clone()));
        }
        self.moves = inst.log().len();
        for r in &inst.events()[self.resolutions..] {
            self.events.push(TraceEvent::Resolution(*r));
        }
        self.resolutions = inst.events().len();
    }

    fn finish(self, config: &ScenarioConfig, inst: ProtocolInstance, settlement: Settlement) -> SimulationTrace {
        let initial = inst.initial_balances();
        let ledger = inst.ledger().clone();
        let net = initial
            .iter()
            .map(|(a, &b)| (a.clone(), ledger.balance(a) as i64 - b as i64))
            .collect();
        let rejected = self
            .events
            .iter()
            .filter_map(|e| match e {
                TraceEvent::Rejected(r) => Some(r.clone()),
                _ => None,
            })
            .collect();
        SimulationTrace {
            name: config.name.clone(),
            seed: config.seed,
            setup: Setup {
                horizon: Some(inst.clock()),
                ..config.setup()
            },
            accepted: inst.log().to_vec(),
            resolutions: inst.events().to_vec(),
            rejected,
            events: self.events,
            final_clock: inst.clock(),
            metrics: TreeMetrics::of(inst.nodes()),
            final_nodes: inst.nodes().to_vec(),
            final_ledger: ledger,
            settlement: Some(settlement),
            net,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PayoffRow {
    pub agent: AccountId,
    pub initial: u64,
    #[serde(rename = "final")]
    pub final_balance: u64,
    pub net: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PayoffReport {
    pub rows: Vec<PayoffRow>,
    pub burned: u64,
}

impl PayoffReport {
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r).expect("rows serialize");
        }
        String::from_utf8(w.into_inner().expect("in-memory writer")).expect("csv is utf-8")
    }
}

/// Net payoff per agent; the column sums to minus the burned total.
pub fn payoff_report(trace: &SimulationTrace) -> Result<PayoffReport, SimulationError> {
    if trace.settlement.is_none() {
        return Err(SimulationError::Unsettled);
    }
    let rows: Vec<PayoffRow> = trace
        .setup
        .accounts
        .iter()
        .map(|(a, &initial)| {
            let final_balance = trace.final_ledger.balance(a);
            PayoffRow {
                agent: a.clone(),
                initial,
                final_balance,
                net: final_balance as i64 - initial as i64,
            }
        })
        .collect();
    let sum: i64 = rows.iter().map(|r| r.net).sum();
    let burned = trace.final_ledger.burned;
    if sum != -(burned as i64) {
        return Err(SimulationError::Conservation { sum, burned });
    }
    Ok(PayoffReport { rows, burned })
}
