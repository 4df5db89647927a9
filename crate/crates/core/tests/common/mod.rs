#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sprig_core::fixtures::{scenario_cascade, scenario_statement, two_step_chain};
use sprig_core::proof::Proof;
use sprig_core::protocol::{
    AccountId, InstanceConfig, Ledger, Mode, Move, Node, NodeKind, ParameterCascade, ProtocolInstance, Status,
    Timestamp,
};
use sprig_core::verifier::{bogus_proof, toy_prove};

/// Eventual outcome of `id` once no more moves arrive, evaluated top-down by
/// plain recursion over the status rules.
fn eventual(nodes: &[Node], cascade: &ParameterCascade, id: usize) -> (Status, Timestamp) {
    let node = &nodes[id];
    let kids: Vec<(Status, Timestamp)> = node
        .children
        .iter()
        .map(|c| eventual(nodes, cascade, c.0 as usize))
        .collect();
    match &node.kind {
        NodeKind::Claim { verdict: Some(v), .. } => (
            if v.validated {
                Status::Validated
            } else {
                Status::Invalidated
            },
            node.posted_at,
        ),
        NodeKind::Claim { verdict: None, .. } => {
            let theta = cascade.level(node.level).verification_time;
            let defeat = kids.iter().filter(|k| k.0 == Status::Unanswered).map(|k| k.1).min();
            match defeat {
                Some(t) => (Status::Invalidated, t),
                None => {
                    let close = Timestamp::new(node.posted_at.time + theta, 0);
                    let t = kids.iter().map(|k| k.1).fold(close, Timestamp::max);
                    (Status::Validated, t)
                }
            }
        }
        NodeKind::Question { .. } => {
            let tau = cascade.response_time(node.level);
            let win = kids.iter().filter(|k| k.0 == Status::Validated).map(|k| k.1).min();
            match win {
                Some(t) => (Status::Answered, t),
                None => {
                    let close = Timestamp::new(node.posted_at.time + tau, 0);
                    let t = kids.iter().map(|k| k.1).fold(close, Timestamp::max);
                    (Status::Unanswered, t)
                }
            }
        }
    }
}

/// Statuses at `now` according to the brute-force evaluator.
pub fn oracle_statuses(
    nodes: &[Node],
    cascade: &ParameterCascade,
    mode: Mode,
    now: u64,
) -> Vec<(Status, Option<Timestamp>)> {
    let all: Vec<(Status, Timestamp)> = (0..nodes.len()).map(|i| eventual(nodes, cascade, i)).collect();
    let cutoff = |t: Timestamp| t.time <= now;
    let mut out: Vec<(Status, Option<Timestamp>)> = all
        .iter()
        .map(|&(s, t)| {
            if cutoff(t) {
                (s, Some(t))
            } else {
                (Status::Pending, None)
            }
        })
        .collect();
    if mode == Mode::EarlyStop {
        if let Some(root_at) = out[0].1 {
            for e in out.iter_mut() {
                if e.1.is_some_and(|t| t > root_at) {
                    *e = (Status::Pending, None);
                }
            }
        }
    }
    out
}

pub fn statuses(inst: &ProtocolInstance) -> Vec<(Status, Option<Timestamp>)> {
    inst.nodes().iter().map(|n| (n.status, n.determined_at)).collect()
}

pub const PLAYERS: [&str; 4] = ["ann", "ben", "cat", "dan"];

/// A random small cascade, and whether the root should be a claim.
pub fn random_config(rng: &mut ChaCha8Rng) -> (InstanceConfig, bool) {
    let root_level = rng.gen_range(1..=3);
    let root_claim = rng.gen_bool(0.5);
    let mut cascade = scenario_cascade(root_level, root_claim);
    for lp in cascade.levels.iter_mut() {
        lp.verification_time = rng.gen_range(1..=6);
        lp.response_time = rng.gen_range(1..=6);
        lp.bounty = rng.gen_range(0..=3);
        lp.stake_down = rng.gen_range(0..=4);
    }
    cascade.machine.response_time = rng.gen_range(1..=6);
    cascade.machine.cost = rng.gen_range(0..=2);
    let mode = if rng.gen_bool(0.25) {
        Mode::EarlyStop
    } else {
        Mode::Quiescence
    };
    (InstanceConfig::new(cascade).with_mode(mode), root_claim)
}

/// A random instance with at most `max_nodes` nodes built from at most
/// `max_moves` attempted moves; rejected attempts are dropped.
pub fn random_instance(seed: u64, max_moves: usize, max_nodes: usize) -> ProtocolInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (config, root_claim) = random_config(&mut rng);
    let balance = rng.gen_range(5..=40);
    let ledger = Ledger::with_balances(PLAYERS.map(|p| (p, balance)));
    let statement = scenario_statement();
    let root = if root_claim {
        let chain = two_step_chain(&statement);
        Move::RootClaim { statement, chain }
    } else {
        Move::RootQuestion { statement }
    };
    let mut inst = ProtocolInstance::create(config, ledger, AccountId::new("ann"), root, 0).expect("root is funded");
    let mut t = 0u64;
    for _ in 0..max_moves {
        if inst.nodes().len() >= max_nodes {
            break;
        }
        t += rng.gen_range(0..=2);
        let target = inst.nodes().choose(&mut rng).expect("has root").clone();
        let actor = AccountId::new(*PLAYERS.choose(&mut rng).unwrap());
        let mv = if target.is_claim() {
            Move::Question {
                origin: target.id,
                step: rng.gen_range(0..=3),
            }
        } else if target.level > 0 && rng.gen_bool(0.6) {
            Move::Answer {
                origin: target.id,
                proof: Proof::Chain(two_step_chain(&target.statement)),
            }
        } else {
            let proof = if rng.gen_bool(0.6) {
                toy_prove(&target.statement).expect("shallow statements")
            } else {
                bogus_proof(&target.statement)
            };
            Move::Answer {
                origin: target.id,
                proof: Proof::Machine(proof),
            }
        };
        let _ = inst.apply(actor, mv, t);
    }
    inst
}
