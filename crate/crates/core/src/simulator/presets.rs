//! Ready-made scenarios over a depth-2 tree for `{p, p -> q, q -> r, s -> r} ⊢ r`.
//!
//! The valid tree goes through `q`; the invalid one goes through `s`, which
//! nothing proves. Every other leaf has a one-step toy proof.

use super::{AgentSpec, MisleaderVariant, RootKind, RootSpec, ScenarioConfig, StrategySpec};
use crate::fixtures::two_step_chain;
use crate::proof::{ChainDocument, DefinitionSet, Formula, ProofChain, ProofTree, Statement};
use crate::protocol::{AccountId, InstanceConfig, LevelParameters, MachineParameters, ParameterCascade};

/// Scenarios under which the attacks are expected not to pay.
pub const DETERRENCE: [&str; 3] = ["carpet_bomber", "sandbagger", "plagiarist_defense"];

fn f(s: &str) -> Formula {
    s.parse().expect("preset formulas parse")
}

pub fn root_statement() -> Statement {
    Statement::new(
        DefinitionSet::with_imports(["p", "q", "r", "s"]).expect("distinct"),
        [f("p"), f("p -> q"), f("q -> r"), f("s -> r")],
        f("r"),
    )
}

fn document(via: &str) -> ChainDocument {
    let target = root_statement();
    let chain = ProofChain::from_imports(&target, DefinitionSet::empty(), [(f(via), vec![]), (f("r"), vec![1])]);
    let mut tree = ProofTree::leaf(chain.clone());
    for j in 1..=chain.len() {
        let step = chain.step_statement(&target, j).expect("in range");
        tree = tree.expand(j, ProofTree::leaf(two_step_chain(&step)));
    }
    ChainDocument { target, proof: tree }
}

/// Every leaf machine-provable.
pub fn valid_document() -> ChainDocument {
    document("q")
}

/// The first step's first leaf, `A ⊢ s`, has no proof.
pub fn invalid_document() -> ChainDocument {
    document("s")
}

/// Two levels: λ = 1000, σ↑ = 4, σ↓ = 6, θ = 8, β = 2, τ = 4; machine level
/// σ↑₀ = 3, c₀ = 1, β₀ = 2, τ₀ = 4.
pub fn preset_cascade(root_is_claim: bool) -> ParameterCascade {
    let level = LevelParameters {
        max_length: 1_000,
        stake_up: 4,
        stake_down: 6,
        verification_time: 8,
        bounty: 2,
        response_time: 4,
    };
    let machine = MachineParameters {
        max_length: 1_000,
        stake_up: 3,
        cost: 1,
        bounty: 2,
        response_time: 4,
    };
    let mut levels = vec![level; 2];
    if root_is_claim {
        levels[1].stake_up = 0;
    }
    ParameterCascade::new(levels, machine).expect("preset cascade is valid")
}

fn agent(name: &str, balance: u64, strategy: StrategySpec) -> AgentSpec {
    AgentSpec {
        name: AccountId::new(name),
        balance,
        strategy,
    }
}

fn scenario(name: &str, kind: RootKind, owner: &str, proof: ChainDocument, agents: Vec<AgentSpec>) -> ScenarioConfig {
    ScenarioConfig {
        name: name.into(),
        instance: InstanceConfig::new(preset_cascade(kind == RootKind::Claim)),
        root: RootSpec {
            kind,
            owner: AccountId::new(owner),
            time: 0,
        },
        proof,
        agents,
        horizon: 30,
        seed: 1,
    }
}

fn honest() -> StrategySpec {
    StrategySpec::HonestClaimer {
        plagiarist_defense: false,
    }
}

fn skeptic(exhaustive: bool) -> StrategySpec {
    StrategySpec::HonestSkeptic {
        exhaustive,
        only: Vec::new(),
        delay: 0,
    }
}

pub fn honest_unchallenged() -> ScenarioConfig {
    scenario(
        "honest_unchallenged",
        RootKind::Claim,
        "alice",
        valid_document(),
        vec![agent("alice", 100, honest()), agent("bob", 100, StrategySpec::Passive)],
    )
}

pub fn invalid_leaf_exhaustive() -> ScenarioConfig {
    scenario(
        "invalid_leaf_exhaustive",
        RootKind::Claim,
        "alice",
        invalid_document(),
        vec![agent("alice", 100, honest()), agent("bob", 100, skeptic(true))],
    )
}

pub fn carpet_bomber() -> ScenarioConfig {
    scenario(
        "carpet_bomber",
        RootKind::Claim,
        "alice",
        valid_document(),
        vec![
            agent("alice", 100, honest()),
            agent("mallory", 100, StrategySpec::CarpetBomber),
            agent("carol", 100, StrategySpec::Defender { delay: 1 }),
        ],
    )
}

pub fn sandbagger() -> ScenarioConfig {
    scenario(
        "sandbagger",
        RootKind::Question,
        "inst",
        invalid_document(),
        vec![
            agent("inst", 100, StrategySpec::Passive),
            agent("mallory", 300, StrategySpec::Sandbagger { claims: 3 }),
            agent("bob", 100, skeptic(false)),
        ],
    )
}

pub fn plagiarist_defense() -> ScenarioConfig {
    scenario(
        "plagiarist_defense",
        RootKind::Question,
        "inst",
        valid_document(),
        vec![
            agent("inst", 100, StrategySpec::Passive),
            agent(
                "alice",
                300,
                StrategySpec::HonestClaimer {
                    plagiarist_defense: true,
                },
            ),
            agent(
                "charlie",
                300,
                StrategySpec::Plagiarist {
                    target: AccountId::new("alice"),
                },
            ),
            agent(
                "dave",
                100,
                StrategySpec::HonestSkeptic {
                    exhaustive: true,
                    only: vec![AccountId::new("alice")],
                    delay: 2,
                },
            ),
        ],
    )
}

pub fn nitpicker() -> ScenarioConfig {
    scenario(
        "nitpicker",
        RootKind::Claim,
        "alice",
        valid_document(),
        vec![
            agent("alice", 100, honest()),
            agent("mallory", 100, StrategySpec::Nitpicker),
        ],
    )
}

pub fn evasive_prover() -> ScenarioConfig {
    scenario(
        "evasive_prover",
        RootKind::Claim,
        "mallory",
        invalid_document(),
        vec![
            agent("mallory", 100, StrategySpec::EvasiveProver { decoys: 2 }),
            agent("bob", 100, skeptic(false)),
        ],
    )
}

pub fn misleader(variant: MisleaderVariant) -> ScenarioConfig {
    let name = match variant {
        MisleaderVariant::A => "misleader_a",
        MisleaderVariant::B => "misleader_b",
    };
    scenario(
        name,
        RootKind::Claim,
        "mallory",
        valid_document(),
        vec![
            agent("mallory", 100, StrategySpec::Misleader { variant }),
            agent("bob", 100, skeptic(false)),
        ],
    )
}

pub fn all() -> Vec<ScenarioConfig> {
    vec![
        honest_unchallenged(),
        invalid_leaf_exhaustive(),
        carpet_bomber(),
        sandbagger(),
        plagiarist_defense(),
        nitpicker(),
        evasive_prover(),
        misleader(MisleaderVariant::A),
        misleader(MisleaderVariant::B),
    ]
}

pub fn by_name(name: &str) -> Option<ScenarioConfig> {
    all().into_iter().find(|s| s.name == name)
}
