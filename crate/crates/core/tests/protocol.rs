mod common;

use proptest::prelude::*;

use sprig_core::fixtures::{self, scenario_cascade, scenario_statement, two_step_chain};
use sprig_core::proof::{LengthMeasure, Measurable, Proof};
use sprig_core::protocol::{
    read_move_log, replay_records, write_move_log, AccountId, InstanceConfig, Ledger, Mode, NodeId, ProtocolError,
    ProtocolInstance, Status, Timestamp, TransferReason,
};
use sprig_core::verifier::{bogus_proof, toy_prove};

fn acct(s: &str) -> AccountId {
    AccountId::new(s)
}

fn funded(balance: u64) -> Ledger {
    Ledger::with_balances(fixtures::ACCOUNTS.map(|a| (a, balance)))
}

fn root_claim(root_level: u32, ledger: Ledger) -> Result<ProtocolInstance, ProtocolError> {
    let statement = scenario_statement();
    let chain = two_step_chain(&statement);
    let config = InstanceConfig::new(scenario_cascade(root_level, true));
    ProtocolInstance::create_root_claim(config, ledger, acct("alice"), statement, chain, 0)
}

#[test]
fn root_claim_escrows_down_stake() {
    let inst = root_claim(2, funded(100)).unwrap();
    assert_eq!(inst.root().status, Status::Pending);
    assert_eq!(inst.ledger().escrow(NodeId(0)), 3);
    assert_eq!(inst.ledger().balance(&acct("alice")), 97);
}

#[test]
fn root_claim_one_token_short_is_rejected() {
    let err = root_claim(2, funded(2)).unwrap_err();
    assert!(
        matches!(
            err,
            ProtocolError::InsufficientFunds {
                needed: 3,
                available: 2,
                ..
            }
        ),
        "{err}"
    );
}

#[test]
fn root_claim_over_length_is_rejected() {
    let statement = scenario_statement();
    let chain = two_step_chain(&statement);
    let mu = LengthMeasure::unit().measure(&chain);
    let mu = *mu.numer() / *mu.denom();
    let mut cascade = scenario_cascade(2, true);
    cascade.levels[1].max_length = mu;
    let ok = ProtocolInstance::create_root_claim(
        InstanceConfig::new(cascade.clone()),
        funded(100),
        acct("alice"),
        statement.clone(),
        chain.clone(),
        0,
    );
    assert!(ok.is_ok());
    cascade.levels[1].max_length = mu - 1;
    let err = ProtocolInstance::create_root_claim(
        InstanceConfig::new(cascade),
        funded(100),
        acct("alice"),
        statement,
        chain,
        0,
    )
    .unwrap_err();
    assert!(matches!(err, ProtocolError::LengthExceeded { .. }), "{err}");
    assert_eq!(chain_symbols(), mu);
}

fn chain_symbols() -> u64 {
    two_step_chain(&scenario_statement()).symbol_count() as u64
}

#[test]
fn root_claim_with_up_stake_is_rejected() {
    let statement = scenario_statement();
    let chain = two_step_chain(&statement);
    let config = InstanceConfig::new(scenario_cascade(2, false));
    let err = ProtocolInstance::create_root_claim(config, funded(100), acct("alice"), statement, chain, 0).unwrap_err();
    assert!(matches!(err, ProtocolError::RootStakeUp(2)));
}

#[test]
fn root_question_escrows_bounty_and_zero_bounty_is_legal() {
    let config = InstanceConfig::new(scenario_cascade(2, false));
    let inst =
        ProtocolInstance::create_root_question(config, funded(100), acct("alice"), scenario_statement(), 0).unwrap();
    assert_eq!(inst.ledger().escrow(NodeId(0)), 1);

    let mut cascade = scenario_cascade(2, false);
    cascade.levels[1].bounty = 0;
    let inst = ProtocolInstance::create_root_question(
        InstanceConfig::new(cascade),
        funded(0),
        acct("alice"),
        scenario_statement(),
        0,
    )
    .unwrap();
    assert_eq!(inst.ledger().escrow(NodeId(0)), 0);

    let config = InstanceConfig::new(scenario_cascade(2, false));
    let err =
        ProtocolInstance::create_root_question(config, funded(0), acct("alice"), scenario_statement(), 0).unwrap_err();
    assert!(matches!(err, ProtocolError::InsufficientFunds { .. }));
}

#[test]
fn question_window_is_half_open() {
    let mut inst = root_claim(2, funded(100)).unwrap();
    let last = inst.clone().post_question(acct("bob"), NodeId(0), 1, 9);
    assert!(last.is_ok());
    let err = inst.post_question(acct("bob"), NodeId(0), 1, 10).unwrap_err();
    assert!(
        matches!(err, ProtocolError::WindowClosed { closes: 10, t: 10, .. }),
        "{err}"
    );
}

#[test]
fn question_step_index_must_be_in_range() {
    let mut inst = root_claim(2, funded(100)).unwrap();
    for bad in [0, 3] {
        let err = inst.post_question(acct("bob"), NodeId(0), bad, 1).unwrap_err();
        assert!(matches!(err, ProtocolError::BadStepIndex { len: 2, .. }), "{err}");
    }
    let a = inst.post_question(acct("bob"), NodeId(0), 2, 1).unwrap();
    let b = inst.post_question(acct("carol"), NodeId(0), 2, 1).unwrap();
    assert_ne!(a, b, "duplicate questions are allowed");
}

#[test]
fn machine_claims_are_not_questionable() {
    let mut inst = root_claim(1, funded(100)).unwrap();
    let q = inst.post_question(acct("bob"), NodeId(0), 1, 1).unwrap();
    let statement = inst.node(q).unwrap().statement.clone();
    let m = inst
        .post_answer_claim(acct("alice"), q, Proof::Machine(toy_prove(&statement).unwrap()), 2)
        .unwrap();
    assert_eq!(inst.status(m), Some(Status::Validated));
    let err = inst.post_question(acct("bob"), m, 1, 3).unwrap_err();
    assert_eq!(err.to_string(), format!("machine claims are not questionable ({m})"));
}

#[test]
fn answers_respect_window_and_level() {
    let mut inst = root_claim(2, funded(100)).unwrap();
    let q = inst.post_question(acct("bob"), NodeId(0), 1, 1).unwrap();
    let statement = inst.node(q).unwrap().statement.clone();
    let chain = Proof::Chain(two_step_chain(&statement));
    let c = inst
        .clone()
        .post_answer_claim(acct("carol"), q, chain.clone(), 10)
        .unwrap();
    assert_eq!(inst.clone().node(q).unwrap().level, 1);
    assert!(c.0 > q.0);
    let err = inst
        .clone()
        .post_answer_claim(acct("carol"), q, chain.clone(), 11)
        .unwrap_err();
    assert!(matches!(err, ProtocolError::WindowClosed { closes: 11, .. }), "{err}");

    // skip straight to level 0
    let m = inst
        .post_answer_claim(acct("carol"), q, Proof::Machine(toy_prove(&statement).unwrap()), 2)
        .unwrap();
    let node = inst.node(m).unwrap();
    assert_eq!(node.level, 0);
    assert_eq!(node.status, Status::Validated);
    assert_eq!(node.determined_at, Some(node.posted_at));
    assert_eq!(inst.ledger().burned, 1);
    assert_eq!(inst.ledger().escrow(m), 2);
}

#[test]
fn level_zero_questions_need_machine_answers() {
    let mut inst = root_claim(1, funded(100)).unwrap();
    let q = inst.post_question(acct("bob"), NodeId(0), 1, 1).unwrap();
    let statement = inst.node(q).unwrap().statement.clone();
    let err = inst
        .post_answer_claim(acct("carol"), q, Proof::Chain(two_step_chain(&statement)), 2)
        .unwrap_err();
    assert!(matches!(err, ProtocolError::ChainAtMachineLevel));
}

#[test]
fn rejected_moves_leave_the_instance_untouched() {
    let mut inst = root_claim(2, funded(100)).unwrap();
    let before = inst.snapshot_json();
    assert!(inst.post_question(acct("bob"), NodeId(0), 7, 5).is_err());
    assert_eq!(inst.snapshot_json(), before);
    assert!(inst.post_question(acct("nobody"), NodeId(0), 1, 5).is_err());
    assert_eq!(inst.snapshot_json(), before);
}

#[test]
fn unchallenged_claim_validates_at_window_close() {
    let mut inst = root_claim(2, funded(100)).unwrap();
    inst.advance_clock(9).unwrap();
    assert_eq!(inst.root().status, Status::Pending);
    let before = inst.snapshot_json();
    assert!(inst.advance_clock(9).unwrap().is_empty());
    assert_eq!(inst.snapshot_json(), before, "advancing by zero is a no-op");
    let events = inst.advance_clock(10).unwrap();
    assert_eq!(events.len(), 1);
    assert_eq!(inst.root().status, Status::Validated);
    assert_eq!(inst.root().determined_at, Some(Timestamp::new(10, 0)));
    assert!(matches!(
        inst.advance_clock(3),
        Err(ProtocolError::TimeBackwards { .. })
    ));
    let s = inst.settle().unwrap();
    assert_eq!(s.net_of(&acct("alice")), 0);
}

#[test]
fn settle_before_quiescence_fails() {
    let mut inst = root_claim(2, funded(100)).unwrap();
    assert_eq!(inst.settle().unwrap_err().to_string(), "unresolved nodes");
}

#[test]
fn three_node_settlement() {
    // root claim, one question, one validated answer
    let mut inst = root_claim(2, funded(100)).unwrap();
    let q = inst.post_question(acct("bob"), NodeId(0), 1, 1).unwrap();
    let statement = inst.node(q).unwrap().statement.clone();
    inst.post_answer_claim(acct("alice"), q, Proof::Chain(two_step_chain(&statement)), 2)
        .unwrap();
    inst.advance_clock(inst.last_deadline()).unwrap();
    assert_eq!(inst.root().status, Status::Validated);
    let s = inst.settle().unwrap();
    assert_eq!(s.net_of(&acct("alice")), 1);
    assert_eq!(s.net_of(&acct("bob")), -1);
    assert!(s
        .transfers
        .iter()
        .any(|t| t.reason == TransferReason::BountyPaid && t.amount == 1));
}

#[test]
fn validated_claim_settlement_values() {
    let sc = fixtures::validated_claim();
    let mut inst = replay_records(&sc.setup, &sc.records).unwrap();
    let s = inst.settle().unwrap();
    let want = [
        ("alice", 0),
        ("bob", 1),
        ("carol", -5),
        ("dave", 3),
        ("erin", 0),
        ("frank", 1),
    ];
    for (who, net) in want {
        assert_eq!(s.net_of(&acct(who)), net, "{who}");
    }
    let c1 = sc.node("C1");
    let up = s
        .transfers
        .iter()
        .find(|t| t.node == c1 && t.reason == TransferReason::StakeUpForfeited)
        .unwrap();
    assert_eq!((up.to.as_str(), up.amount), ("bob", 2));
    let down = s
        .transfers
        .iter()
        .find(|t| t.node == c1 && t.reason == TransferReason::StakeDownForfeited)
        .unwrap();
    assert_eq!((down.to.as_str(), down.amount), ("dave", 3));
}

#[test]
fn invalidated_claim_burn_matches_net_sum() {
    let sc = fixtures::invalidated_claim();
    let mut inst = replay_records(&sc.setup, &sc.records).unwrap();
    let s = inst.settle().unwrap();
    let want = [
        ("alice", -3),
        ("bob", 5),
        ("carol", -10),
        ("dave", 5),
        ("erin", 3),
        ("frank", -1),
    ];
    for (who, net) in want {
        assert_eq!(s.net_of(&acct(who)), net, "{who}");
    }
    assert_eq!(s.net.values().sum::<i64>(), -(s.burned as i64));
}

#[test]
fn early_stop_halts_and_refunds_pending() {
    let sc = fixtures::question_root_early_stop();
    let mut inst = replay_records(&sc.setup, &sc.records).unwrap();
    assert_eq!(inst.stopped_at(), Some(Timestamp::new(13, 0)));
    let c4 = sc.node("C4");
    let err = inst.post_question(acct("bob"), c4, 1, inst.clock()).unwrap_err();
    assert!(matches!(err, ProtocolError::Stopped));
    let s = inst.settle().unwrap();
    let refunds: Vec<_> = s
        .transfers
        .iter()
        .filter(|t| t.reason == TransferReason::PendingRefund)
        .collect();
    assert_eq!(refunds.len(), 2);
    assert_eq!(s.net_of(&acct("frank")), 0);
}

#[test]
fn fixtures_replay_through_the_text_log() {
    for sc in fixtures::protocol_scenarios() {
        let text = write_move_log(&sc.records);
        let records = read_move_log(text.as_bytes()).unwrap();
        let a = sprig_core::protocol::replay(&sc.setup, &records).unwrap();
        let b = replay_records(&sc.setup, &sc.records).unwrap();
        assert_eq!(a.snapshot_json(), b.snapshot_json(), "{}", sc.name);
        assert_eq!(write_move_log(a.log()), text);
    }
}

#[test]
fn tampered_log_lines_are_named() {
    let sc = fixtures::validated_claim();
    let mut lines: Vec<String> = write_move_log(&sc.records).lines().map(String::from).collect();
    // question on a step that does not exist
    lines[3] = lines[3].replace("\"step\":1", "\"step\":9");
    let text = lines.join("\n");
    let records = read_move_log(text.as_bytes()).unwrap();
    let err = sprig_core::protocol::replay(&sc.setup, &records).unwrap_err();
    assert_eq!(err.line(), Some(4), "{err}");
}

#[test]
fn machine_answer_with_bad_proof_is_invalidated_and_forfeits() {
    let mut inst = root_claim(1, funded(100)).unwrap();
    let q = inst.post_question(acct("bob"), NodeId(0), 1, 1).unwrap();
    let statement = inst.node(q).unwrap().statement.clone();
    let m = inst
        .post_answer_claim(acct("carol"), q, Proof::Machine(bogus_proof(&statement)), 2)
        .unwrap();
    assert_eq!(inst.status(m), Some(Status::Invalidated));
    inst.advance_clock(inst.last_deadline()).unwrap();
    assert_eq!(inst.status(q), Some(Status::Unanswered));
    assert_eq!(inst.root().status, Status::Invalidated);
    let s = inst.settle().unwrap();
    // bob: bounty back, σ↑₀ from carol, σ↓ from alice
    assert_eq!(s.net_of(&acct("bob")), 5);
    assert_eq!(s.net_of(&acct("carol")), -3);
    assert_eq!(s.net_of(&acct("alice")), -3);
    assert_eq!(s.burned, 1);
}

#[test]
fn early_stop_on_root_claim() {
    let statement = scenario_statement();
    let chain = two_step_chain(&statement);
    let config = InstanceConfig::new(scenario_cascade(1, true)).with_mode(Mode::EarlyStop);
    let mut inst =
        ProtocolInstance::create_root_claim(config, funded(100), acct("alice"), statement, chain, 0).unwrap();
    inst.advance_clock(10).unwrap();
    assert!(inst.is_settleable());
    assert!(matches!(
        inst.post_question(acct("bob"), NodeId(0), 1, 10),
        Err(ProtocolError::Stopped)
    ));
}

const FUZZ_CASES: u64 = 1_000;

#[test]
fn resolve_matches_brute_force_oracle() {
    let mut nontrivial = 0;
    for seed in 0..FUZZ_CASES {
        let inst = common::random_instance(seed, 50, 8);
        if inst.nodes().len() > 3 {
            nontrivial += 1;
        }
        let horizon = inst.last_deadline() + 2;
        let mode = inst.mode();
        let cascade = inst.cascade().clone();
        // statuses at every intermediate time, from a fresh replay jumped there
        for now in inst.clock()..=horizon {
            let mut probe = inst.clone();
            probe.advance_clock(now).unwrap();
            let want = common::oracle_statuses(probe.nodes(), &cascade, mode, now);
            assert_eq!(common::statuses(&probe), want, "seed {seed} at {now}");
        }
    }
    assert!(
        nontrivial > FUZZ_CASES / 4,
        "generator produced too few interesting trees: {nontrivial}"
    );
}

#[test]
fn incremental_and_jump_advance_agree() {
    for seed in 0..FUZZ_CASES {
        let inst = common::random_instance(seed, 50, 8);
        let horizon = inst.last_deadline() + 1;
        let mut stepped = inst.clone();
        for t in inst.clock()..=horizon {
            stepped.advance_clock(t).unwrap();
        }
        let mut jumped = inst.clone();
        jumped.advance_clock(horizon).unwrap();
        assert_eq!(common::statuses(&stepped), common::statuses(&jumped), "seed {seed}");

        // replaying the log with a single final jump gives the same state
        let setup = sprig_core::protocol::Setup {
            config: inst.config().clone(),
            accounts: inst.initial_balances().clone(),
            horizon: Some(horizon),
        };
        let replayed = replay_records(&setup, inst.log()).unwrap();
        assert_eq!(common::statuses(&replayed), common::statuses(&jumped), "seed {seed}");
    }
}

#[test]
fn settlement_conserves_tokens_exactly() {
    for seed in 0..FUZZ_CASES {
        let mut inst = common::random_instance(seed, 50, 8);
        let start: u128 = inst.initial_balances().values().map(|&b| b as u128).sum();
        assert_eq!(inst.ledger().total(), start);
        let machine = inst.nodes().iter().filter(|n| n.is_machine_claim()).count() as u64;
        assert_eq!(inst.ledger().burned, machine * inst.cascade().machine.cost);
        inst.advance_clock(inst.last_deadline()).unwrap();
        let s = inst.settle().unwrap();
        assert_eq!(inst.ledger().total(), start, "seed {seed}");
        assert!(inst.ledger().escrowed.is_empty());
        assert_eq!(s.net.values().sum::<i64>(), -(s.burned as i64), "seed {seed}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn statuses_change_at_most_once(seed in any::<u64>()) {
        let mut inst = common::random_instance(seed, 50, 8);
        let mut seen = common::statuses(&inst);
        for t in inst.clock()..=inst.last_deadline() {
            inst.advance_clock(t).unwrap();
            let now = common::statuses(&inst);
            for (a, b) in seen.iter().zip(&now) {
                if a.0 != Status::Pending {
                    prop_assert_eq!(a, b);
                }
            }
            seen = now;
        }
    }

    #[test]
    fn identical_logs_give_identical_snapshots(seed in any::<u64>()) {
        let inst = common::random_instance(seed, 50, 8);
        let setup = sprig_core::protocol::Setup {
            config: inst.config().clone(),
            accounts: inst.initial_balances().clone(),
            horizon: Some(inst.last_deadline()),
        };
        let a = replay_records(&setup, inst.log()).unwrap();
        let b = replay_records(&setup, inst.log()).unwrap();
        prop_assert_eq!(a.snapshot_json(), b.snapshot_json());
    }

    #[test]
    fn tree_levels_are_consistent(seed in any::<u64>()) {
        let inst = common::random_instance(seed, 50, 8);
        for node in inst.nodes() {
            if let Some(parent) = node.origin {
                let p = inst.node(parent).unwrap();
                prop_assert!(p.children.contains(&node.id));
                if node.is_question() {
                    prop_assert!(p.is_claim() && !p.is_machine_claim());
                    prop_assert_eq!(node.level + 1, p.level);
                    prop_assert_eq!(&node.statement, &p.chain().unwrap().step_statement(&p.statement, node.step().unwrap()).unwrap());
                } else {
                    prop_assert!(p.is_question());
                    prop_assert!(node.level == p.level || node.level == 0);
                    prop_assert_eq!(&node.statement, &p.statement);
                }
            }
        }
    }
}
