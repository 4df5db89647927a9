use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::instance::{Node, NodeKind};
use super::ledger::Ledger;
use super::params::ParameterCascade;
use super::types::{AccountId, NodeId, Status, Timestamp};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransferReason {
    /// Stake returned to a validated claim's owner.
    StakeReturned,
    /// σ↑ of an invalidated claim, to its origin question's owner.
    StakeUpForfeited,
    /// σ↓ of an invalidated claim, to its first defeating question's owner.
    StakeDownForfeited,
    /// A question's bounty, to the first validated answer's owner.
    BountyPaid,
    /// An unanswered question's bounty, back to its owner.
    BountyRefunded,
    /// Full escrow of a node left pending by an early stop.
    PendingRefund,
}

/// One payout from a node's escrow.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transfer {
    pub node: NodeId,
    pub to: AccountId,
    pub amount: u64,
    pub reason: TransferReason,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Settlement {
    pub transfers: Vec<Transfer>,
    /// Final minus initial balance, per account.
    pub net: BTreeMap<AccountId, i64>,
    pub burned: u64,
}

impl Settlement {
    pub(crate) fn new(transfers: Vec<Transfer>, initial: &BTreeMap<AccountId, u64>, ledger: &Ledger) -> Self {
        let mut net: BTreeMap<AccountId, i64> = BTreeMap::new();
        for (account, &start) in initial {
            net.insert(account.clone(), ledger.balance(account) as i64 - start as i64);
        }
        for (account, &end) in &ledger.balances {
            net.entry(account.clone()).or_insert(end as i64);
        }
        Self {
            transfers,
            net,
            burned: ledger.burned,
        }
    }

    pub fn net_of(&self, account: &AccountId) -> i64 {
        self.net.get(account).copied().unwrap_or(0)
    }
}

/// Key ordering "first" among statused siblings.
fn order_key(node: &Node) -> (Timestamp, Timestamp, NodeId) {
    (node.determined_at.expect("statused"), node.posted_at, node.id)
}

/// The earliest child of `node` having `status`, if any.
pub(crate) fn first_child_with<'a>(nodes: &'a [Node], node: &Node, status: Status) -> Option<&'a Node> {
    node.children
        .iter()
        .map(|c| &nodes[c.0 as usize])
        .filter(|c| c.status == status)
        .min_by_key(|c| order_key(c))
}

/// Payouts for the current statuses. Every node's net escrow is paid out
/// exactly once.
pub(crate) fn settle_nodes(nodes: &[Node], cascade: &ParameterCascade) -> Vec<Transfer> {
    let mut out = Vec::new();
    let mut pay = |node: NodeId, to: &AccountId, amount: u64, reason| {
        if amount > 0 {
            out.push(Transfer {
                node,
                to: to.clone(),
                amount,
                reason,
            });
        }
    };
    for node in nodes {
        let origin_owner = node.origin.map(|o| &nodes[o.0 as usize].owner);
        match (&node.kind, node.status) {
            (NodeKind::Claim { verdict: Some(_), .. }, status) => {
                // the machine cost was burned at posting; σ↑₀ remains
                let held = node.escrow - cascade.machine.cost;
                if status == Status::Validated {
                    pay(node.id, &node.owner, held, TransferReason::StakeReturned);
                } else {
                    let to = origin_owner.unwrap_or(&node.owner);
                    pay(node.id, to, held, TransferReason::StakeUpForfeited);
                }
            }
            (NodeKind::Claim { .. }, Status::Pending) | (NodeKind::Question { .. }, Status::Pending) => {
                pay(node.id, &node.owner, node.escrow, TransferReason::PendingRefund);
            }
            (NodeKind::Claim { .. }, Status::Validated) => {
                pay(node.id, &node.owner, node.escrow, TransferReason::StakeReturned);
            }
            (NodeKind::Claim { .. }, _) => {
                let params = cascade.level(node.level);
                let (up, down) = (params.stake_up, params.stake_down);
                let to = origin_owner.unwrap_or(&node.owner);
                pay(node.id, to, up, TransferReason::StakeUpForfeited);
                let defeater = first_child_with(nodes, node, Status::Unanswered)
                    .expect("invalidated claims have an unanswered question");
                pay(node.id, &defeater.owner, down, TransferReason::StakeDownForfeited);
            }
            (NodeKind::Question { .. }, Status::Answered) => {
                let winner = first_child_with(nodes, node, Status::Validated)
                    .expect("answered questions have a validated claim");
                pay(node.id, &winner.owner, node.escrow, TransferReason::BountyPaid);
            }
            (NodeKind::Question { .. }, _) => {
                pay(node.id, &node.owner, node.escrow, TransferReason::BountyRefunded);
            }
        }
    }
    out
}
