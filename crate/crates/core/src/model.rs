//! Agents, time-slots, daily preferences and allocations.

use std::fmt;

use rand::seq::index;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::SimConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AgentId(pub u32);

impl AgentId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for AgentId {
    fn from(index: usize) -> Self {
        AgentId(index as u32)
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// One of the hour-long periods of a day.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SlotId(pub u8);

impl SlotId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for SlotId {
    fn from(index: usize) -> Self {
        debug_assert!(index < crate::config::MAX_SLOTS_PER_DAY);
        SlotId(index as u8)
    }
}

impl fmt::Display for SlotId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Set of distinct slots, stored as a bitmask.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct SlotSet(u64);

impl SlotSet {
    pub const EMPTY: SlotSet = SlotSet(0);

    pub fn from_bits(bits: u64) -> Self {
        SlotSet(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, slot: SlotId) -> bool {
        self.0 & (1 << slot.0) != 0
    }

    /// Returns false if the slot was already present.
    pub fn insert(&mut self, slot: SlotId) -> bool {
        let had = self.contains(slot);
        self.0 |= 1 << slot.0;
        !had
    }

    /// Returns false if the slot was absent.
    pub fn remove(&mut self, slot: SlotId) -> bool {
        let had = self.contains(slot);
        self.0 &= !(1 << slot.0);
        had
    }

    pub fn intersection(self, other: SlotSet) -> SlotSet {
        SlotSet(self.0 & other.0)
    }

    pub fn difference(self, other: SlotSet) -> SlotSet {
        SlotSet(self.0 & !other.0)
    }

    /// Slots in ascending order.
    pub fn iter(self) -> impl Iterator<Item = SlotId> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                return None;
            }
            let slot = bits.trailing_zeros() as u8;
            bits &= bits - 1;
            Some(SlotId(slot))
        })
    }

    /// The `n`-th slot in ascending order.
    pub fn nth(self, n: usize) -> Option<SlotId> {
        self.iter().nth(n)
    }
}

impl FromIterator<SlotId> for SlotSet {
    fn from_iter<I: IntoIterator<Item = SlotId>>(iter: I) -> Self {
        let mut set = SlotSet::EMPTY;
        for slot in iter {
            set.insert(slot);
        }
        set
    }
}

impl fmt::Display for SlotSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, slot) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{slot}")?;
        }
        f.write_str("}")
    }
}

/// Shorthand for building a set from slot indices.
pub fn slots<I: IntoIterator<Item = usize>>(indices: I) -> SlotSet {
    indices.into_iter().map(SlotId::from).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// Accepts only exchanges that hand it a slot it wants and lacks.
    Selfish,
    /// Also accepts neutral exchanges: as favour repayments when social
    /// capital is tracked, unconditionally when it is not.
    Social,
}

impl Strategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Selfish => "selfish",
            Strategy::Social => "social",
        }
    }
}

/// The slots an agent requests for the day.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PreferenceSet(SlotSet);

impl PreferenceSet {
    pub fn new(slots: SlotSet) -> Self {
        PreferenceSet(slots)
    }

    pub fn slots(self) -> SlotSet {
        self.0
    }

    pub fn contains(self, slot: SlotId) -> bool {
        self.0.contains(slot)
    }
}

/// Fraction of an agent's requested slots that it holds, kept as the
/// exact ratio `matched / of`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Satisfaction {
    pub matched: u32,
    pub of: u32,
}

impl Satisfaction {
    pub fn value(self) -> f64 {
        if self.of == 0 {
            1.0
        } else {
            self.matched as f64 / self.of as f64
        }
    }

    pub fn is_full(self) -> bool {
        self.matched == self.of
    }
}

pub fn satisfaction(holdings: SlotSet, prefs: PreferenceSet) -> Satisfaction {
    debug_assert_eq!(holdings.len(), prefs.slots().len());
    Satisfaction {
        matched: holdings.intersection(prefs.slots()).len() as u32,
        of: prefs.slots().len() as u32,
    }
}

/// Each agent requests `slots_per_agent` distinct slots drawn uniformly
/// without replacement.
pub fn generate_preferences<R: Rng + ?Sized>(rng: &mut R, cfg: &SimConfig) -> Vec<PreferenceSet> {
    (0..cfg.population_size)
        .map(|_| {
            let picked = index::sample(rng, cfg.slots_per_day, cfg.slots_per_agent);
            PreferenceSet(picked.iter().map(SlotId::from).collect())
        })
        .collect()
}

/// Who holds which slots on the current day.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AllocationState {
    holdings: Vec<SlotSet>,
    occupancy: Vec<u32>,
}

impl AllocationState {
    /// Builds a state from explicit holdings, deriving occupancy.
    pub fn from_holdings(holdings: Vec<SlotSet>, slots_per_day: usize) -> Self {
        let mut occupancy = vec![0u32; slots_per_day];
        for held in &holdings {
            for slot in held.iter() {
                occupancy[slot.index()] += 1;
            }
        }
        AllocationState {
            holdings,
            occupancy,
        }
    }

    pub fn holdings(&self, agent: AgentId) -> SlotSet {
        self.holdings[agent.index()]
    }

    pub fn all_holdings(&self) -> &[SlotSet] {
        &self.holdings
    }

    pub fn occupancy(&self) -> &[u32] {
        &self.occupancy
    }

    pub fn population(&self) -> usize {
        self.holdings.len()
    }

    pub(crate) fn holdings_mut(&mut self, agent: AgentId) -> &mut SlotSet {
        &mut self.holdings[agent.index()]
    }

    /// Checks the per-agent size, occupancy bookkeeping and capacity.
    pub fn check(&self, slots_per_agent: usize, capacity: usize) -> Result<(), String> {
        let mut counted = vec![0u32; self.occupancy.len()];
        for (agent, held) in self.holdings.iter().enumerate() {
            if held.len() != slots_per_agent {
                return Err(format!("agent {agent} holds {} slots", held.len()));
            }
            for slot in held.iter() {
                let Some(count) = counted.get_mut(slot.index()) else {
                    return Err(format!("agent {agent} holds out-of-range slot {slot}"));
                };
                *count += 1;
            }
        }
        if counted != self.occupancy {
            return Err("occupancy does not match holdings".into());
        }
        if let Some(slot) = self.occupancy.iter().position(|&c| c as usize > capacity) {
            return Err(format!("slot {slot} exceeds capacity"));
        }
        Ok(())
    }
}

/// Random capacity-respecting allocation, independent of preferences.
///
/// Every slot contributes `slot_capacity` tokens; the shuffled tokens are
/// dealt `slots_per_agent` to each agent and any spare tokens form a pool.
/// Agents dealt the same slot twice are repaired by swapping the surplus
/// token with another holder (or the pool). Each repair swap strictly
/// reduces the total number of duplicate tokens, so the loop terminates,
/// and the exchange of tokens leaves per-slot occupancy untouched.
pub fn initial_allocation<R: Rng + ?Sized>(rng: &mut R, cfg: &SimConfig) -> AllocationState {
    let n = cfg.population_size;
    let k = cfg.slots_per_agent;
    let s = cfg.slots_per_day;

    let mut tokens: Vec<u8> = (0..s)
        .flat_map(|slot| std::iter::repeat_n(slot as u8, cfg.slot_capacity))
        .collect();
    tokens.shuffle(rng);

    // counts[a * s + slot]; the pool (row n) has no distinctness constraint.
    let mut counts = vec![0u16; (n + 1) * s];
    let owner_of = |position: usize| (position / k).min(n);
    for (position, &slot) in tokens.iter().enumerate() {
        counts[owner_of(position) * s + slot as usize] += 1;
    }

    let mut candidates: Vec<usize> = Vec::new();
    for agent in 0..n {
        let row = agent * s;
        for offset in 0..k {
            let position = agent * k + offset;
            let dup = tokens[position] as usize;
            if counts[row + dup] < 2 {
                continue;
            }
            candidates.clear();
            for (other, &slot) in tokens.iter().enumerate() {
                let owner = owner_of(other);
                if owner == agent {
                    continue;
                }
                let slot = slot as usize;
                let orow = owner * s;
                let fresh_for_agent = counts[row + slot] == 0;
                let no_new_duplicate =
                    owner == n || counts[orow + dup] == 0 || counts[orow + slot] >= 2;
                if fresh_for_agent && no_new_duplicate {
                    candidates.push(other);
                }
            }
            let other = *candidates
                .choose(rng)
                .expect("a duplicate-reducing swap exists for every feasible configuration");
            let slot = tokens[other] as usize;
            let orow = owner_of(other) * s;
            counts[row + dup] -= 1;
            counts[row + slot] += 1;
            counts[orow + slot] -= 1;
            counts[orow + dup] += 1;
            tokens.swap(position, other);
        }
    }

    let holdings: Vec<SlotSet> = (0..n)
        .map(|agent| {
            tokens[agent * k..(agent + 1) * k]
                .iter()
                .map(|&slot| SlotId(slot))
                .collect()
        })
        .collect();
    // Repairs on later agents can hand earlier agents a fresh duplicate only
    // through the `counts >= 2` branch, which never targets a repaired agent.
    debug_assert!(holdings.iter().all(|h| h.len() == k));
    AllocationState::from_holdings(holdings, s)
}

/// Number of requested slot units that could be served under the capacity
/// limit: `sum over slots of min(demand, capacity)`.
pub fn optimum_units(prefs: &[PreferenceSet], cfg: &SimConfig) -> u64 {
    let mut demand = vec![0usize; cfg.slots_per_day];
    for pref in prefs {
        for slot in pref.slots().iter() {
            demand[slot.index()] += 1;
        }
    }
    demand
        .iter()
        .map(|&d| d.min(cfg.slot_capacity) as u64)
        .sum()
}

/// Upper bound on mean satisfaction for a preference profile.
pub fn optimum_satisfaction(prefs: &[PreferenceSet], cfg: &SimConfig) -> f64 {
    let requested: usize = prefs.iter().map(|p| p.slots().len()).sum();
    if requested == 0 {
        return 1.0;
    }
    optimum_units(prefs, cfg) as f64 / requested as f64
}
