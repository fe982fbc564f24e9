//! Per-agent memory of favours received and not yet repaid.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::model::AgentId;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LedgerError {
    #[error("agent {0} cannot owe itself a favour")]
    SelfFavour(AgentId),
    #[error("agent {owner} owes no favour to agent {counterpart}")]
    NothingOwed {
        owner: AgentId,
        counterpart: AgentId,
    },
}

/// Favours an agent has received from each counterpart, minus those it
/// has repaid. Entries are created on first record and kept at zero after
/// full repayment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FavourLedger {
    owner: AgentId,
    owed: BTreeMap<AgentId, u32>,
}

impl FavourLedger {
    pub fn new(owner: AgentId) -> Self {
        Self {
            owner,
            owed: BTreeMap::new(),
        }
    }

    pub fn owner(&self) -> AgentId {
        self.owner
    }

    pub fn owed_to(&self, counterpart: AgentId) -> u32 {
        self.owed.get(&counterpart).copied().unwrap_or(0)
    }

    /// `giver` granted one of this agent's requests.
    pub fn record_favour(&mut self, giver: AgentId) -> Result<(), LedgerError> {
        if giver == self.owner {
            return Err(LedgerError::SelfFavour(giver));
        }
        *self.owed.entry(giver).or_insert(0) += 1;
        Ok(())
    }

    /// This agent accepted a neutral exchange from `counterpart` to settle
    /// an earlier favour.
    pub fn repay_favour(&mut self, counterpart: AgentId) -> Result<(), LedgerError> {
        match self.owed.get_mut(&counterpart) {
            Some(count) if *count > 0 => {
                *count -= 1;
                Ok(())
            }
            _ => Err(LedgerError::NothingOwed {
                owner: self.owner,
                counterpart,
            }),
        }
    }

    /// Sum of outstanding favours across counterparts.
    pub fn total_owed(&self) -> u64 {
        self.owed.values().map(|&c| c as u64).sum()
    }

    pub fn entries(&self) -> impl Iterator<Item = (AgentId, u32)> + '_ {
        self.owed.iter().map(|(&a, &c)| (a, c))
    }
}
