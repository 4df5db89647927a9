use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::knowledge::Knowledge;
use crate::proof::{ChainStep, Proof, ProofChain, Statement};
use crate::protocol::{AccountId, Move, Node, NodeId, ProtocolInstance};

/// The public state an agent decides on, plus its private knowledge.
pub struct View<'a> {
    pub instance: &'a ProtocolInstance,
    pub knowledge: &'a Knowledge,
    pub me: &'a AccountId,
    pub time: u64,
}

impl<'a> View<'a> {
    pub fn balance(&self) -> u64 {
        self.instance.ledger().balance(self.me)
    }

    /// Pending and still accepting children at `time`.
    pub fn is_open(&self, node: &Node) -> bool {
        self.instance.stopped_at().is_none()
            && node.status.is_pending()
            && node
                .window_closes(self.instance.cascade())
                .is_some_and(|c| self.time < c)
    }

    pub fn open_chain_claims(&self) -> impl Iterator<Item = &'a Node> + '_ {
        self.instance
            .nodes()
            .iter()
            .filter(move |n| n.chain().is_some() && self.is_open(n))
    }

    pub fn open_questions(&self) -> impl Iterator<Item = &'a Node> + '_ {
        self.instance
            .nodes()
            .iter()
            .filter(move |n| n.is_question() && self.is_open(n))
    }

    fn children(&self, id: NodeId) -> impl Iterator<Item = &'a Node> + '_ {
        let inst = self.instance;
        inst.node(id)
            .into_iter()
            .flat_map(|n| n.children.iter())
            .filter_map(move |c| inst.node(*c))
    }

    pub fn questions_on(&self, claim: NodeId, step: usize) -> impl Iterator<Item = &'a Node> + '_ {
        self.children(claim).filter(move |q| q.step() == Some(step))
    }

    pub fn answers_to(&self, question: NodeId) -> impl Iterator<Item = &'a Node> + '_ {
        self.children(question)
    }

    fn asked_by(&self, who: &AccountId, claim: NodeId, step: usize) -> bool {
        self.questions_on(claim, step).any(|q| &q.owner == who)
    }

    fn owned_by(&self, id: Option<NodeId>, who: &AccountId) -> bool {
        id.and_then(|i| self.instance.node(i)).is_some_and(|n| &n.owner == who)
    }

    pub fn question_cost(&self, claim: &Node) -> u64 {
        self.instance.cascade().bounty(claim.level - 1)
    }

    pub fn answer_cost(&self, question: &Node, proof: &Proof) -> u64 {
        answer_cost_at(self, question.level, proof)
    }
}

fn answer_cost_at(view: &View<'_>, level: u32, proof: &Proof) -> u64 {
    let c = view.instance.cascade();
    match proof {
        Proof::Machine(_) => c.machine.stake_up + c.machine.cost,
        Proof::Chain(_) => {
            let p = c.level(level);
            p.stake_up + p.stake_down
        }
    }
}

/// Local spending limit for one batch of intents.
struct Budget(u64);

impl Budget {
    fn take(&mut self, amount: u64) -> bool {
        if self.0 >= amount {
            self.0 -= amount;
            true
        } else {
            false
        }
    }
}

pub trait Strategy: Send {
    /// Intended moves at `view.time`; moves are applied in order.
    fn decide(&mut self, view: &View<'_>, rng: &mut ChaCha8Rng) -> Vec<Move>;

    /// The chain this agent posts for `target`, when it starts the instance.
    fn root_chain(&self, knowledge: &Knowledge, target: &Statement) -> Option<ProofChain> {
        knowledge.chain_for(target).cloned()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MisleaderVariant {
    /// Self-answers immediately.
    A,
    /// Self-answers at the last legal instant.
    B,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptedMove {
    pub time: u64,
    /// Global position in the move log; the move waits for it when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seq: Option<u64>,
    #[serde(rename = "move")]
    pub mv: Move,
}

/// Serializable strategy description.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StrategySpec {
    HonestClaimer {
        #[serde(default)]
        plagiarist_defense: bool,
    },
    HonestSkeptic {
        #[serde(default)]
        exhaustive: bool,
        /// Only question claims of these owners; empty means everyone.
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        only: Vec<AccountId>,
        #[serde(default)]
        delay: u64,
    },
    Defender {
        #[serde(default = "one")]
        delay: u64,
    },
    CarpetBomber,
    Nitpicker,
    EvasiveProver {
        decoys: usize,
    },
    Sandbagger {
        claims: usize,
    },
    Misleader {
        variant: MisleaderVariant,
    },
    Plagiarist {
        target: AccountId,
    },
    Passive,
    Scripted {
        moves: Vec<ScriptedMove>,
    },
}

fn one() -> u64 {
    1
}

impl StrategySpec {
    pub fn build(&self) -> Box<dyn Strategy> {
        match self {
            StrategySpec::HonestClaimer { plagiarist_defense } => Box::new(Claimer {
                defense: *plagiarist_defense,
                ..Claimer::default()
            }),
            StrategySpec::HonestSkeptic {
                exhaustive,
                only,
                delay,
            } => Box::new(Skeptic {
                exhaustive: *exhaustive,
                only: only.clone(),
                delay: *delay,
            }),
            StrategySpec::Defender { delay } => Box::new(Defender { delay: *delay }),
            StrategySpec::CarpetBomber => attack_strategy(AttackKind::CarpetBomber),
            StrategySpec::Nitpicker => attack_strategy(AttackKind::Nitpicker),
            StrategySpec::EvasiveProver { decoys } => Box::new(Claimer {
                decoys: *decoys,
                ..Claimer::default()
            }),
            StrategySpec::Sandbagger { claims } => Box::new(Claimer {
                copies: (*claims).max(1),
                ..Claimer::default()
            }),
            StrategySpec::Misleader { variant } => Box::new(Claimer {
                misleader: Some(*variant),
                ..Claimer::default()
            }),
            StrategySpec::Plagiarist { target } => Box::new(Plagiarist { target: target.clone() }),
            StrategySpec::Passive => Box::new(Passive),
            StrategySpec::Scripted { moves } => Box::new(Scripted {
                moves: moves.clone(),
                next: 0,
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackKind {
    CarpetBomber,
    Nitpicker,
    EvasiveProver,
    Sandbagger,
    Misleader,
    Plagiarist,
}

/// The attack with default knobs: three decoys, three claims per answer,
/// misleader variant A, a plagiarist copying `alice`.
pub fn attack_strategy(kind: AttackKind) -> Box<dyn Strategy> {
    match kind {
        AttackKind::CarpetBomber => Box::new(Skeptic {
            exhaustive: true,
            only: Vec::new(),
            delay: 0,
        }),
        AttackKind::Nitpicker => Box::new(Nitpicker),
        AttackKind::EvasiveProver => StrategySpec::EvasiveProver { decoys: 3 }.build(),
        AttackKind::Sandbagger => StrategySpec::Sandbagger { claims: 3 }.build(),
        AttackKind::Misleader => StrategySpec::Misleader {
            variant: MisleaderVariant::A,
        }
        .build(),
        AttackKind::Plagiarist => StrategySpec::Plagiarist {
            target: AccountId::new("alice"),
        }
        .build(),
    }
}

/// Prepends `A ⊢ a` steps, `a` cycling through the target's assumptions,
/// and shifts the original import indices past them.
pub fn pad_with_decoys(chain: &ProofChain, target: &Statement, decoys: usize) -> ProofChain {
    let assumptions: Vec<_> = target.assumptions.iter().cloned().collect();
    if assumptions.is_empty() || decoys == 0 {
        return chain.clone();
    }
    let mut steps: Vec<ChainStep> = (0..decoys)
        .map(|i| {
            ChainStep::new(
                target.assumptions.clone(),
                assumptions[i % assumptions.len()].clone(),
                [],
            )
        })
        .collect();
    for s in &chain.steps {
        let mut shifted = s.clone();
        shifted.imports = s.imports.iter().map(|i| i + decoys).collect();
        steps.push(shifted);
    }
    ProofChain::new(chain.definitions.clone(), steps)
}

/// Answers questions raised against its own claims with the best proof it
/// holds. The knobs turn it into the evasive prover, the sandbagger or the
/// misleader, and enable the defense against plagiarism.
#[derive(Debug, Clone)]
pub struct Claimer {
    pub decoys: usize,
    pub copies: usize,
    pub defense: bool,
    pub misleader: Option<MisleaderVariant>,
}

impl Default for Claimer {
    fn default() -> Self {
        Self {
            decoys: 0,
            copies: 1,
            defense: false,
            misleader: None,
        }
    }
}

impl Claimer {
    fn prepare(&self, proof: Proof, target: &Statement) -> Proof {
        match proof {
            Proof::Chain(c) if self.decoys > 0 => Proof::Chain(pad_with_decoys(&c, target, self.decoys)),
            other => other,
        }
    }

    fn answers(&self, view: &View<'_>, budget: &mut Budget, out: &mut Vec<Move>) {
        for q in view.open_questions() {
            let on_mine = view.owned_by(q.origin, view.me);
            let root_question = q.origin.is_none() && &q.owner != view.me;
            let own_question = &q.owner == view.me;
            let on_copy = own_question && self.defense && is_copy_of_mine(view, q.origin);
            if !(on_mine || root_question || on_copy) {
                continue;
            }
            if own_question && on_mine && self.misleader == Some(MisleaderVariant::B) {
                let closes = q.window_closes(view.instance.cascade()).unwrap_or(0);
                if view.time + 1 < closes {
                    continue;
                }
            }
            let mine = view.answers_to(q.id).filter(|a| &a.owner == view.me).count();
            if mine >= self.copies {
                continue;
            }
            let Some(proof) = view.knowledge.answer_for(&q.statement, q.level) else {
                continue;
            };
            let proof = self.prepare(proof, &q.statement);
            let cost = view.answer_cost(q, &proof);
            for _ in mine..self.copies {
                if !budget.take(cost) {
                    break;
                }
                out.push(Move::Answer {
                    origin: q.id,
                    proof: proof.clone(),
                });
            }
        }
    }

    fn self_questions(&self, view: &View<'_>, budget: &mut Budget, out: &mut Vec<Move>) {
        for c in view.open_chain_claims().filter(|c| &c.owner == view.me) {
            let chain = c.chain().expect("chain claims");
            for j in 1..=chain.len() {
                let step = chain.step_statement(&c.statement, j).expect("index in range");
                if view.asked_by(view.me, c.id, j) || !view.knowledge.is_valid(&step) {
                    continue;
                }
                if budget.take(view.question_cost(c)) {
                    out.push(Move::Question { origin: c.id, step: j });
                }
            }
        }
    }

    /// Mirrors every question against its own answer onto verbatim copies of
    /// that answer, and challenges circular rival answers.
    fn defend(&self, view: &View<'_>, budget: &mut Budget, out: &mut Vec<Move>) {
        let nodes = view.instance.nodes();
        for mine in nodes.iter().filter(|n| &n.owner == view.me && n.chain().is_some()) {
            let Some(q0) = mine.origin else { continue };
            for rival in view.answers_to(q0).filter(|r| &r.owner != view.me && view.is_open(r)) {
                let Some(rc) = rival.chain() else { continue };
                if rival.proof() == mine.proof() {
                    for j in 1..=rc.len() {
                        let challenged = view.questions_on(mine.id, j).next().is_some();
                        if !challenged || view.asked_by(view.me, rival.id, j) {
                            continue;
                        }
                        let step = rc.step_statement(&rival.statement, j).expect("index in range");
                        let Some(proof) = view.knowledge.answer_for(&step, rival.level - 1) else {
                            continue;
                        };
                        let proof = self.prepare(proof, &step);
                        let cost = view.question_cost(rival) + answer_cost_at(view, rival.level - 1, &proof);
                        if budget.take(cost) {
                            // the question and its answer go out together
                            let question = NodeId((view.instance.nodes().len() + out.len()) as u64);
                            out.push(Move::Question {
                                origin: rival.id,
                                step: j,
                            });
                            out.push(Move::Answer {
                                origin: question,
                                proof,
                            });
                        }
                    }
                } else if *rc == ProofChain::identity(&rival.statement)
                    && !view.asked_by(view.me, rival.id, 1)
                    && budget.take(view.question_cost(rival))
                {
                    out.push(Move::Question {
                        origin: rival.id,
                        step: 1,
                    });
                }
            }
        }
    }
}

impl Strategy for Claimer {
    fn decide(&mut self, view: &View<'_>, _rng: &mut ChaCha8Rng) -> Vec<Move> {
        let mut budget = Budget(view.balance());
        let mut out = Vec::new();
        self.answers(view, &mut budget, &mut out);
        if self.misleader.is_some() {
            self.self_questions(view, &mut budget, &mut out);
        }
        if self.defense {
            self.defend(view, &mut budget, &mut out);
        }
        out
    }

    fn root_chain(&self, knowledge: &Knowledge, target: &Statement) -> Option<ProofChain> {
        let chain = knowledge.chain_for(target)?;
        Some(pad_with_decoys(chain, target, self.decoys))
    }
}

/// A rival claim repeating one of `view.me`'s answers to the same question.
fn is_copy_of_mine(view: &View<'_>, claim: Option<NodeId>) -> bool {
    let Some(rival) = claim.and_then(|c| view.instance.node(c)) else {
        return false;
    };
    rival.origin.is_some_and(|q0| {
        view.answers_to(q0)
            .any(|m| &m.owner == view.me && m.id != rival.id && m.proof() == rival.proof())
    })
}

/// Questions the steps it believes invalid, or every step when exhaustive,
/// once a claim has been up for `delay` time units.
#[derive(Debug, Clone)]
pub struct Skeptic {
    pub exhaustive: bool,
    pub only: Vec<AccountId>,
    pub delay: u64,
}

impl Strategy for Skeptic {
    fn decide(&mut self, view: &View<'_>, _rng: &mut ChaCha8Rng) -> Vec<Move> {
        let mut budget = Budget(view.balance());
        let mut out = Vec::new();
        for c in view.open_chain_claims() {
            let early = view.time < c.posted_at.time + self.delay;
            if early || &c.owner == view.me || (!self.only.is_empty() && !self.only.contains(&c.owner)) {
                continue;
            }
            let chain = c.chain().expect("chain claims");
            for j in 1..=chain.len() {
                if view.asked_by(view.me, c.id, j) {
                    continue;
                }
                let doubt = self.exhaustive || {
                    let step = chain.step_statement(&c.statement, j).expect("index in range");
                    !view.knowledge.is_valid(&step)
                };
                if doubt && budget.take(view.question_cost(c)) {
                    out.push(Move::Question { origin: c.id, step: j });
                }
            }
        }
        out
    }
}

/// Raises one question, at a random step, against every chain claim of others.
#[derive(Debug, Clone, Copy)]
pub struct Nitpicker;

impl Strategy for Nitpicker {
    fn decide(&mut self, view: &View<'_>, rng: &mut ChaCha8Rng) -> Vec<Move> {
        let mut budget = Budget(view.balance());
        let mut out = Vec::new();
        for c in view.open_chain_claims().filter(|c| &c.owner != view.me) {
            let len = c.chain().expect("chain claims").len();
            let asked = (1..=len).any(|j| view.asked_by(view.me, c.id, j));
            if !asked && budget.take(view.question_cost(c)) {
                out.push(Move::Question {
                    origin: c.id,
                    step: rng.gen_range(1..=len),
                });
            }
        }
        out
    }
}

/// A third party answering valid questions left unanswered for `delay` time units.
#[derive(Debug, Clone, Copy)]
pub struct Defender {
    pub delay: u64,
}

impl Strategy for Defender {
    fn decide(&mut self, view: &View<'_>, _rng: &mut ChaCha8Rng) -> Vec<Move> {
        let mut budget = Budget(view.balance());
        let mut out = Vec::new();
        for q in view.open_questions() {
            if &q.owner == view.me
                || !q.children.is_empty()
                || view.time < q.posted_at.time + self.delay
                || !view.knowledge.is_valid(&q.statement)
            {
                continue;
            }
            if let Some(proof) = view.knowledge.answer_for(&q.statement, q.level) {
                if budget.take(view.answer_cost(q, &proof)) {
                    out.push(Move::Answer { origin: q.id, proof });
                }
            }
        }
        out
    }
}

/// Answers circularly until `target` answers, then copies the target's
/// answers and forwards the questions it receives to the target.
#[derive(Debug, Clone)]
pub struct Plagiarist {
    pub target: AccountId,
}

impl Plagiarist {
    /// Target claims this claim is a verbatim copy of.
    fn originals<'a>(&self, view: &View<'a>, copy: &'a Node) -> Vec<&'a Node> {
        view.instance
            .nodes()
            .iter()
            .filter(|n| {
                n.owner == self.target
                    && n.proof().is_some()
                    && n.proof() == copy.proof()
                    && n.statement == copy.statement
            })
            .collect()
    }
}

impl Strategy for Plagiarist {
    fn decide(&mut self, view: &View<'_>, _rng: &mut ChaCha8Rng) -> Vec<Move> {
        let me = view.me;
        let mut budget = Budget(view.balance());
        let mut out = Vec::new();
        for q in view.open_questions().filter(|q| &q.owner != me) {
            let from_target: Vec<&Node> = view.answers_to(q.id).filter(|a| a.owner == self.target).collect();
            for a in &from_target {
                copy_answer(
                    view,
                    &mut budget,
                    q,
                    a.proof().expect("answers are claims").clone(),
                    &mut out,
                );
            }
            let relevant = q.origin.is_none() || view.owned_by(q.origin, &self.target);
            let answered_by_me = view.answers_to(q.id).any(|a| &a.owner == me);
            if relevant && from_target.is_empty() && !answered_by_me && q.level > 0 {
                copy_answer(
                    view,
                    &mut budget,
                    q,
                    Proof::Chain(ProofChain::identity(&q.statement)),
                    &mut out,
                );
            }
            // questions against my copies: forward, then copy the reply
            let Some(copy) = q.origin.and_then(|o| view.instance.node(o)).filter(|c| &c.owner == me) else {
                continue;
            };
            let step = q.step().expect("questions on claims have a step");
            for original in self.originals(view, copy) {
                let asked: Vec<&Node> = view.questions_on(original.id, step).collect();
                if asked.is_empty() && view.is_open(original) && budget.take(view.question_cost(original)) {
                    out.push(Move::Question {
                        origin: original.id,
                        step,
                    });
                }
                for oq in asked {
                    for a in view.answers_to(oq.id).filter(|a| a.owner == self.target) {
                        copy_answer(
                            view,
                            &mut budget,
                            q,
                            a.proof().expect("answers are claims").clone(),
                            &mut out,
                        );
                    }
                }
            }
        }
        out
    }
}

fn copy_answer(view: &View<'_>, budget: &mut Budget, q: &Node, proof: Proof, out: &mut Vec<Move>) {
    if !proof.is_machine() && q.level == 0 {
        return;
    }
    let dup = view
        .answers_to(q.id)
        .any(|a| &a.owner == view.me && a.proof() == Some(&proof));
    let cost = view.answer_cost(q, &proof);
    let mv = Move::Answer { origin: q.id, proof };
    if !dup && !out.contains(&mv) && budget.take(cost) {
        out.push(mv);
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Passive;

impl Strategy for Passive {
    fn decide(&mut self, _view: &View<'_>, _rng: &mut ChaCha8Rng) -> Vec<Move> {
        Vec::new()
    }
}

/// Replays fixed moves at fixed times.
#[derive(Debug, Clone)]
pub struct Scripted {
    moves: Vec<ScriptedMove>,
    next: usize,
}

impl Strategy for Scripted {
    fn decide(&mut self, view: &View<'_>, _rng: &mut ChaCha8Rng) -> Vec<Move> {
        let mut out = Vec::new();
        let next_seq = view.instance.log().len() as u64 + 1;
        while let Some(m) = self.moves.get(self.next) {
            if m.time > view.time || m.seq.is_some_and(|s| s != next_seq + out.len() as u64) {
                break;
            }
            self.next += 1;
            if m.time == view.time {
                out.push(m.mv.clone());
            }
        }
        out
    }
}
