use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::types::{AccountId, NodeId};
use super::ProtocolError;

/// Token balances, per-node escrow and the burned total.
///
/// `total()` is invariant under every operation.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ledger {
    pub balances: BTreeMap<AccountId, u64>,
    #[serde(default)]
    pub escrowed: BTreeMap<NodeId, u64>,
    #[serde(default)]
    pub burned: u64,
}

impl Ledger {
    pub fn with_balances<I, A>(balances: I) -> Self
    where
        I: IntoIterator<Item = (A, u64)>,
        A: Into<AccountId>,
    {
        Self {
            balances: balances.into_iter().map(|(a, b)| (a.into(), b)).collect(),
            ..Self::default()
        }
    }

    pub fn balance(&self, account: &AccountId) -> u64 {
        self.balances.get(account).copied().unwrap_or(0)
    }

    pub fn escrow(&self, node: NodeId) -> u64 {
        self.escrowed.get(&node).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u128 {
        self.balances.values().map(|&b| b as u128).sum::<u128>()
            + self.escrowed.values().map(|&b| b as u128).sum::<u128>()
            + self.burned as u128
    }

    pub fn total_escrowed(&self) -> u64 {
        self.escrowed.values().sum()
    }

    pub(crate) fn require(&self, account: &AccountId, amount: u64) -> Result<(), ProtocolError> {
        let available = self.balance(account);
        if available < amount {
            return Err(ProtocolError::InsufficientFunds {
                account: account.clone(),
                needed: amount,
                available,
            });
        }
        Ok(())
    }

    /// Moves `amount` from `account` into escrow for `node`, burning `burn` of it.
    pub(crate) fn lock(
        &mut self,
        account: &AccountId,
        node: NodeId,
        amount: u64,
        burn: u64,
    ) -> Result<(), ProtocolError> {
        debug_assert!(burn <= amount);
        self.require(account, amount)?;
        if amount == 0 {
            return Ok(());
        }
        *self.balances.get_mut(account).expect("checked by require") -= amount;
        if amount > burn {
            *self.escrowed.entry(node).or_insert(0) += amount - burn;
        }
        self.burned += burn;
        Ok(())
    }

    /// Pays `amount` out of `node`'s escrow to `account`.
    pub(crate) fn release(&mut self, node: NodeId, account: &AccountId, amount: u64) {
        let held = self
            .escrowed
            .get_mut(&node)
            .expect("releasing from a node without escrow");
        assert!(*held >= amount, "escrow of {node} overdrawn");
        *held -= amount;
        if *held == 0 {
            self.escrowed.remove(&node);
        }
        *self.balances.entry(account.clone()).or_insert(0) += amount;
    }
}
