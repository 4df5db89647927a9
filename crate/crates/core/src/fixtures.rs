//! Worked examples: three hierarchical proofs over opaque atoms, and six
//! small debate scenarios with their expected final statuses.

use std::collections::BTreeMap;

use crate::proof::{
    ChainDocument, ChainStep, Definition, DefinitionSet, Formula, ProofChain, ProofDocument, ProofTree, Statement,
};
use crate::protocol::{
    AccountId, InstanceConfig, LevelParameters, MachineParameters, Mode, Move, MoveRecord, NodeId, ParameterCascade,
    ProtocolInstance, Setup, Status,
};
use crate::verifier::{bogus_proof, toy_prove, VerifierBackend};

fn f(s: &str) -> Formula {
    s.parse().expect("fixture formulas parse")
}

fn imports(names: &[&str]) -> DefinitionSet {
    DefinitionSet::with_imports(names.iter().copied()).expect("fixture symbols are distinct")
}

fn chain(target: &Statement, defs: DefinitionSet, steps: &[(&str, &[usize])]) -> ProofChain {
    ProofChain::from_imports(target, defs, steps.iter().map(|(c, i)| (f(c), i.to_vec())))
}

/// Infinitely many primes: three steps, the middle one expanded once.
pub fn infinite_primes() -> ChainDocument {
    let target = Statement::new(
        imports(&["A0", "infinitely_many_primes"]),
        [f("A0")],
        f("infinitely_many_primes"),
    );
    let root = chain(
        &target,
        imports(&["factorial_succ_coprime", "prime_above_every_n"]),
        &[
            ("factorial_succ_coprime", &[]),
            ("prime_above_every_n", &[1]),
            ("infinitely_many_primes", &[2]),
        ],
    );
    let s2 = root.step_statement(&target, 2).expect("step 2 exists");
    let sub = chain(
        &s2,
        imports(&["prime_factors_exceed_n"]),
        &[("prime_factors_exceed_n", &[]), ("prime_above_every_n", &[1])],
    );
    ChainDocument {
        target,
        proof: ProofTree::leaf(root).expand(2, ProofTree::leaf(sub)),
    }
}

/// Fundamental theorem of algebra by contradiction.
pub fn algebra_by_contradiction() -> ChainDocument {
    let target = Statement::new(
        imports(&["A0", "nonconstant_poly", "has_root"]),
        [f("A0"), f("nonconstant_poly")],
        f("has_root"),
    );
    let root = chain(
        &target,
        imports(&["bounded_below_far", "nonzero_min"]),
        &[("bounded_below_far", &[]), ("~nonzero_min", &[]), ("has_root", &[1, 2])],
    );
    let s2 = root.step_statement(&target, 2).expect("step 2 exists");
    let sub = chain(
        &s2,
        imports(&["descent_step", "bottom"]),
        &[
            ("descent_step", &[]),
            ("nonzero_min -> bottom", &[1]),
            ("~nonzero_min", &[2]),
        ],
    );
    ChainDocument {
        target,
        proof: ProofTree::leaf(root).expand(2, ProofTree::leaf(sub)),
    }
}

/// Inverse function theorem: expansions two levels deep.
pub fn inverse_function() -> ChainDocument {
    let target = Statement::new(imports(&["A0", "alpha", "gamma"]), [f("A0"), f("alpha")], f("gamma"));
    let root = chain(
        &target,
        imports(&["alpha1"]),
        &[("alpha1 -> gamma", &[]), ("gamma", &[1])],
    );
    let s1 = root.step_statement(&target, 1).expect("step 1 exists");
    let s1_defs = DefinitionSet::new(
        vec![Definition {
            symbol: "g15".into(),
            formula: f("g14 & inverse_differentiable"),
        }],
        ["g11", "g12", "g13", "g14", "inverse_differentiable"]
            .map(String::from)
            .to_vec(),
    )
    .expect("fixture symbols are distinct");
    let s1_chain = chain(
        &s1,
        s1_defs,
        &[
            ("alpha1 -> g11", &[]),
            ("alpha1 -> g12", &[1]),
            ("alpha1 -> g13", &[2]),
            ("alpha1 -> g14", &[3]),
            ("alpha1 -> g15", &[4]),
            ("alpha1 -> gamma", &[5]),
        ],
    );
    let s15 = s1_chain.step_statement(&s1, 5).expect("step 5 exists");
    let s15_chain = chain(
        &s15,
        imports(&["norm_ratio_to_one", "remainder_vanishes", "inverse_exists", "inverse_remainder_vanishes"]),
        &[
            ("alpha1 -> (g14 & norm_ratio_to_one)", &[]),
            ("alpha1 -> ((g14 & norm_ratio_to_one) & remainder_vanishes)", &[1]),
            (
                "alpha1 -> (((g14 & norm_ratio_to_one) & remainder_vanishes) & (inverse_exists & inverse_remainder_vanishes))",
                &[2],
            ),
            ("alpha1 -> g15", &[3]),
        ],
    );
    ChainDocument {
        target,
        proof: ProofTree::leaf(root).expand(1, ProofTree::leaf(s1_chain).expand(5, ProofTree::leaf(s15_chain))),
    }
}

/// The three worked proofs as documents, with file-friendly names.
pub fn worked_proofs() -> Vec<(&'static str, ProofDocument)> {
    vec![
        ("infinite_primes", ProofDocument::Chain(infinite_primes())),
        (
            "algebra_by_contradiction",
            ProofDocument::Chain(algebra_by_contradiction()),
        ),
        ("inverse_function", ProofDocument::Chain(inverse_function())),
    ]
}

pub const ACCOUNTS: [&str; 6] = ["alice", "bob", "carol", "dave", "erin", "frank"];

/// θ = τ = 10 everywhere, σ↑ = 2, σ↓ = 3, β = 1, c₀ = 1, σ↑₀ = 2.
pub fn scenario_cascade(root_level: u32, root_is_claim: bool) -> ParameterCascade {
    let level = LevelParameters {
        max_length: 1_000,
        stake_up: 2,
        stake_down: 3,
        verification_time: 10,
        bounty: 1,
        response_time: 10,
    };
    let machine = MachineParameters {
        max_length: 1_000,
        stake_up: 2,
        cost: 1,
        bounty: 1,
        response_time: 10,
    };
    let mut levels = vec![level; root_level as usize];
    if root_is_claim {
        levels[root_level as usize - 1].stake_up = 0;
    }
    ParameterCascade::new(levels, machine).expect("fixture cascades are valid")
}

/// `{p, p -> q} ⊢ q`.
pub fn scenario_statement() -> Statement {
    Statement::new(imports(&["p", "q"]), [f("p"), f("p -> q")], f("q"))
}

/// `S_1 = A ⊢ C`, `S_2 = A ∪ {C} ⊢ C`: structurally valid for any target and
/// machine-provable whenever the target is.
pub fn two_step_chain(target: &Statement) -> ProofChain {
    ProofChain::new(
        DefinitionSet::empty(),
        vec![
            ChainStep::new(target.assumptions.clone(), target.conclusion.clone(), []),
            ChainStep::new(
                target.assumptions.iter().cloned().chain([target.conclusion.clone()]),
                target.conclusion.clone(),
                [1],
            ),
        ],
    )
}

/// A recorded scenario plus the statuses it must end in.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: &'static str,
    pub setup: Setup,
    pub records: Vec<MoveRecord>,
    pub labels: BTreeMap<String, NodeId>,
    pub expected: Vec<(String, Status)>,
}

impl Scenario {
    pub fn node(&self, label: &str) -> NodeId {
        self.labels[label]
    }
}

struct Script {
    instance: ProtocolInstance,
    labels: BTreeMap<String, NodeId>,
}

impl Script {
    fn start(config: InstanceConfig, label: &str, owner: &str, root: Move) -> Self {
        let ledger = crate::protocol::Ledger::with_balances(ACCOUNTS.map(|a| (a, 100u64)));
        let instance = ProtocolInstance::create(config, ledger, owner.into(), root, 0).expect("fixture root is legal");
        let mut labels = BTreeMap::new();
        labels.insert(label.to_string(), NodeId(0));
        Self { instance, labels }
    }

    fn push(&mut self, label: &str, owner: &str, t: u64, mv: Move) {
        let id = self
            .instance
            .apply(AccountId::new(owner), mv, t)
            .unwrap_or_else(|e| panic!("fixture move {label} rejected: {e}"));
        self.labels.insert(label.to_string(), id);
    }

    fn question(&mut self, label: &str, owner: &str, t: u64, on: &str, step: usize) {
        let origin = self.labels[on];
        self.push(label, owner, t, Move::Question { origin, step });
    }

    fn answer(&mut self, label: &str, owner: &str, t: u64, on: &str) {
        let origin = self.labels[on];
        let statement = self.instance.node(origin).expect("labelled").statement.clone();
        let proof = crate::proof::Proof::Chain(two_step_chain(&statement));
        self.push(label, owner, t, Move::Answer { origin, proof });
    }

    fn machine(&mut self, label: &str, owner: &str, t: u64, on: &str, valid: bool) {
        let origin = self.labels[on];
        let statement = self.instance.node(origin).expect("labelled").statement.clone();
        let proof = if valid {
            toy_prove(&statement).expect("fixture statements are shallow")
        } else {
            bogus_proof(&statement)
        };
        self.push(
            label,
            owner,
            t,
            Move::Answer {
                origin,
                proof: crate::proof::Proof::Machine(proof),
            },
        );
    }

    fn finish(self, name: &'static str, horizon: u64, expected: &[(&str, Status)]) -> Scenario {
        let config = self.instance.config().clone();
        Scenario {
            name,
            setup: Setup {
                config,
                accounts: ACCOUNTS.iter().map(|a| (AccountId::new(*a), 100)).collect(),
                horizon: Some(horizon),
            },
            records: self.instance.log().to_vec(),
            labels: self.labels,
            expected: expected.iter().map(|(l, s)| (l.to_string(), *s)).collect(),
        }
    }
}

fn claim_root(root_level: u32, mode: Mode) -> Script {
    let config = InstanceConfig::new(scenario_cascade(root_level, true))
        .with_verifier(VerifierBackend::Toy)
        .with_mode(mode);
    let statement = scenario_statement();
    let chain = two_step_chain(&statement);
    Script::start(config, "R", "alice", Move::RootClaim { statement, chain })
}

fn question_root(root_level: u32, mode: Mode) -> Script {
    let config = InstanceConfig::new(scenario_cascade(root_level, false))
        .with_verifier(VerifierBackend::Toy)
        .with_mode(mode);
    Script::start(
        config,
        "RQ",
        "alice",
        Move::RootQuestion {
            statement: scenario_statement(),
        },
    )
}

use Status::{Answered, Invalidated, Pending, Unanswered, Validated};

/// One question; its first answer falls to two unanswered questions, its
/// second answer goes unchallenged.
pub fn validated_claim() -> Scenario {
    let mut s = claim_root(2, Mode::Quiescence);
    s.question("Q1", "bob", 1, "R", 1);
    s.answer("C1", "carol", 2, "Q1");
    s.question("Qa", "dave", 3, "C1", 1);
    s.question("Qb", "erin", 4, "C1", 2);
    s.answer("C2", "frank", 5, "Q1");
    s.finish(
        "validated_claim",
        20,
        &[
            ("R", Validated),
            ("Q1", Answered),
            ("C1", Invalidated),
            ("Qa", Unanswered),
            ("Qb", Unanswered),
            ("C2", Validated),
        ],
    )
}

/// A chain of answers three levels deep whose last claim meets one
/// unanswered and one machine-answered question.
pub fn invalidated_claim() -> Scenario {
    let mut s = claim_root(3, Mode::Quiescence);
    s.question("Q1", "bob", 1, "R", 1);
    s.answer("C1", "carol", 2, "Q1");
    s.question("Q2", "dave", 3, "C1", 1);
    s.answer("C2", "carol", 4, "Q2");
    s.question("Q3a", "erin", 5, "C2", 1);
    s.question("Q3b", "frank", 6, "C2", 2);
    s.machine("M", "carol", 7, "Q3b", true);
    s.finish(
        "invalidated_claim",
        20,
        &[
            ("R", Invalidated),
            ("Q1", Unanswered),
            ("C1", Invalidated),
            ("Q2", Unanswered),
            ("C2", Invalidated),
            ("Q3a", Unanswered),
            ("Q3b", Answered),
            ("M", Validated),
        ],
    )
}

/// A root question whose first answer is defeated and whose second answer
/// survives a question that gets answered.
pub fn answered_question() -> Scenario {
    let mut s = question_root(2, Mode::Quiescence);
    s.answer("C1", "bob", 1, "RQ");
    s.question("Qx", "carol", 2, "C1", 1);
    s.answer("C2", "dave", 3, "RQ");
    s.question("Qy", "erin", 4, "C2", 2);
    s.answer("Cy", "dave", 5, "Qy");
    s.finish(
        "answered_question",
        20,
        &[
            ("RQ", Answered),
            ("C1", Invalidated),
            ("Qx", Unanswered),
            ("C2", Validated),
            ("Qy", Answered),
            ("Cy", Validated),
        ],
    )
}

/// A root question whose only answer survives one question but not a second.
pub fn unanswered_question() -> Scenario {
    let mut s = question_root(2, Mode::Quiescence);
    s.answer("C1", "bob", 1, "RQ");
    s.question("Q1", "carol", 2, "C1", 1);
    s.answer("Ca", "bob", 3, "Q1");
    s.question("Q2", "dave", 4, "C1", 2);
    s.answer("Cb", "bob", 5, "Q2");
    s.question("Qc", "erin", 6, "Cb", 1);
    s.finish(
        "unanswered_question",
        20,
        &[
            ("RQ", Unanswered),
            ("C1", Invalidated),
            ("Q1", Answered),
            ("Ca", Validated),
            ("Q2", Unanswered),
            ("Cb", Invalidated),
            ("Qc", Unanswered),
        ],
    )
}

/// A level-5 root claim that survives four questions, one of them fought
/// down to the machine level.
pub fn claim_root_complete() -> Scenario {
    let mut s = claim_root(5, Mode::Quiescence);
    s.question("Q1", "bob", 1, "R", 1);
    s.question("Q2", "carol", 2, "R", 2);
    s.answer("C1a", "frank", 2, "Q1");
    s.question("Q3", "dave", 3, "R", 1);
    s.question("Qa", "bob", 3, "C1a", 1);
    s.question("Q4", "erin", 4, "R", 2);
    s.answer("C1b", "alice", 4, "Q1");
    s.question("Qb1", "bob", 5, "C1b", 1);
    s.answer("C2", "alice", 5, "Q2");
    s.answer("C4a", "frank", 5, "Q4");
    s.answer("D1", "frank", 6, "Qb1");
    s.answer("C3", "alice", 6, "Q3");
    s.question("Q4a", "erin", 6, "C4a", 1);
    s.question("Qd", "bob", 7, "D1", 1);
    s.answer("D2", "alice", 7, "Qb1");
    s.answer("C4b", "alice", 7, "Q4");
    s.answer("E1", "frank", 8, "Qd");
    s.question("Qm", "bob", 8, "D2", 2);
    s.question("Qe", "bob", 9, "E1", 1);
    s.machine("M1", "alice", 9, "Qm", true);
    s.answer("F1", "frank", 10, "Qe");
    s.question("Qf", "bob", 11, "F1", 2);
    s.finish(
        "claim_root_complete",
        30,
        &[
            ("R", Validated),
            ("Q1", Answered),
            ("Q2", Answered),
            ("Q3", Answered),
            ("Q4", Answered),
            ("C1a", Invalidated),
            ("Qa", Unanswered),
            ("C1b", Validated),
            ("Qb1", Answered),
            ("D1", Invalidated),
            ("Qd", Unanswered),
            ("E1", Invalidated),
            ("Qe", Unanswered),
            ("F1", Invalidated),
            ("Qf", Unanswered),
            ("D2", Validated),
            ("Qm", Answered),
            ("M1", Validated),
            ("C2", Validated),
            ("C3", Validated),
            ("C4a", Invalidated),
            ("Q4a", Unanswered),
            ("C4b", Validated),
        ],
    )
}

/// A root question in early-stop mode, answered by its third claim while a
/// fourth is still undecided.
pub fn question_root_early_stop() -> Scenario {
    let mut s = question_root(2, Mode::EarlyStop);
    s.answer("C1", "bob", 1, "RQ");
    s.question("Q1x", "carol", 2, "C1", 1);
    s.answer("C2", "dave", 2, "RQ");
    s.question("Q2x", "carol", 2, "C2", 2);
    s.answer("C3", "erin", 3, "RQ");
    s.answer("C4", "frank", 5, "RQ");
    s.question("Qc4", "carol", 6, "C4", 1);
    s.finish(
        "question_root_early_stop",
        20,
        &[
            ("RQ", Answered),
            ("C1", Invalidated),
            ("Q1x", Unanswered),
            ("C2", Invalidated),
            ("Q2x", Unanswered),
            ("C3", Validated),
            ("C4", Pending),
            ("Qc4", Pending),
        ],
    )
}

pub fn protocol_scenarios() -> Vec<Scenario> {
    vec![
        validated_claim(),
        invalidated_claim(),
        answered_question(),
        unanswered_question(),
        claim_root_complete(),
        question_root_early_stop(),
    ]
}

/// Every checked-in fixture file, as (path relative to `fixtures/`, contents).
pub fn fixture_files() -> Vec<(String, String)> {
    let pretty = |v: &serde_json::Value| serde_json::to_string_pretty(v).expect("values serialize") + "\n";
    let mut out = Vec::new();
    for (name, doc) in worked_proofs() {
        out.push((format!("proofs/{name}.json"), pretty(&doc.to_value())));
    }
    out.push((
        "proofs/scenario_statement.json".into(),
        pretty(&ProofDocument::Statement(scenario_statement()).to_value()),
    ));
    for s in protocol_scenarios() {
        let setup = serde_json::to_value(&s.setup).expect("setups serialize");
        out.push((format!("protocol/{}.setup.json", s.name), pretty(&setup)));
        out.push((
            format!("protocol/{}.log", s.name),
            crate::protocol::write_move_log(&s.records),
        ));
        let expected: BTreeMap<String, serde_json::Value> = s
            .expected
            .iter()
            .map(|(label, status)| {
                (
                    label.clone(),
                    serde_json::json!({ "node": s.node(label), "status": status }),
                )
            })
            .collect();
        out.push((
            format!("protocol/{}.expected.json", s.name),
            pretty(&serde_json::to_value(expected).expect("maps serialize")),
        ));
    }
    for s in crate::simulator::presets::all() {
        let v = serde_json::to_value(&s).expect("scenarios serialize");
        out.push((format!("scenarios/{}.json", s.name), pretty(&v)));
    }
    out
}
