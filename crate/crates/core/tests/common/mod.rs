#![allow(dead_code)]

use std::collections::BTreeMap;

use slot_exchange::engine::DayObserver;
use slot_exchange::learning::LearningEvent;
use slot_exchange::model::satisfaction;
use slot_exchange::protocol::{AcceptDecision, LedgerChange, RoundEvent, RoundStats};
use slot_exchange::{AgentId, AllocationState, FavourLedger, PreferenceSet, SlotSet, Strategy};

/// Maximum served preference units by exhaustive search: every agent picks
/// a subset of its wanted slots to be served, subject to slot capacity.
pub fn brute_force_optimum(prefs: &[PreferenceSet], slots: usize, capacity: usize) -> u64 {
    fn go(prefs: &[PreferenceSet], load: &mut [usize], capacity: usize) -> u64 {
        let Some((first, rest)) = prefs.split_first() else {
            return 0;
        };
        let wanted: Vec<_> = first.slots().iter().collect();
        let mut best = 0;
        for mask in 0u32..(1 << wanted.len()) {
            let chosen: Vec<_> = (0..wanted.len())
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| wanted[i])
                .collect();
            if chosen.iter().any(|s| load[s.index()] >= capacity) {
                continue;
            }
            for s in &chosen {
                load[s.index()] += 1;
            }
            best = best.max(chosen.len() as u64 + go(rest, load, capacity));
            for s in &chosen {
                load[s.index()] -= 1;
            }
        }
        best
    }
    go(prefs, &mut vec![0; slots], capacity)
}

/// Two-sided exact Mann-Whitney p-value by listing every split of the pooled
/// sample. Ranks are doubled midranks so ties stay exact.
pub fn enumerated_p(a: &[f64], b: &[f64]) -> (f64, f64) {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let n = pooled.len();
    let rank2: Vec<i64> = pooled
        .iter()
        .map(|&x| {
            let less = pooled.iter().filter(|&&y| y < x).count() as i64;
            let equal = pooled.iter().filter(|&&y| y == x).count() as i64;
            2 * less + equal + 1
        })
        .collect();
    let na = a.len();
    let u2_of = |members: &[usize]| -> i64 {
        members.iter().map(|&i| rank2[i]).sum::<i64>() - (na * (na + 1)) as i64
    };
    let observed: Vec<usize> = (0..na).collect();
    let u2 = u2_of(&observed);
    let (mut total, mut le, mut ge) = (0u64, 0u64, 0u64);
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != na {
            continue;
        }
        let members: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let s = u2_of(&members);
        total += 1;
        le += (s <= u2) as u64;
        ge += (s >= u2) as u64;
    }
    let p = (2.0 * le.min(ge) as f64 / total as f64).min(1.0);
    (u2 as f64 / 2.0, p)
}

/// Replays every swap of a day on a private copy of the allocation and
/// records any invariant violation.
#[derive(Default)]
pub struct InvariantChecker {
    pub capacity: usize,
    pub social_capital: bool,
    pub expected_learners: usize,
    prefs: Vec<PreferenceSet>,
    state: Option<Vec<SlotSet>>,
    occupancy: Vec<u32>,
    pub days: usize,
    pub swaps: u64,
    pub beneficial: u64,
    pub repays: u64,
    pub violations: Vec<String>,
    balances: BTreeMap<(AgentId, AgentId), i64>,
}

impl InvariantChecker {
    pub fn new(capacity: usize, social_capital: bool, expected_learners: usize) -> Self {
        Self {
            capacity,
            social_capital,
            expected_learners,
            ..Self::default()
        }
    }

    fn sat(&self, holdings: &[SlotSet], agent: AgentId) -> f64 {
        satisfaction(holdings[agent.index()], self.prefs[agent.index()]).value()
    }
}

impl DayObserver for InvariantChecker {
    fn on_allocation(&mut self, state: &AllocationState, prefs: &[PreferenceSet]) {
        self.days += 1;
        self.prefs = prefs.to_vec();
        self.state = Some(state.all_holdings().to_vec());
        self.occupancy = state.occupancy().to_vec();
        if self.occupancy.iter().any(|&o| o as usize > self.capacity) {
            self.violations.push(format!(
                "day {}: initial occupancy over capacity",
                self.days
            ));
        }
    }

    fn after_round(
        &mut self,
        round: usize,
        state: &AllocationState,
        ledgers: &[FavourLedger],
        _stats: &RoundStats,
        events: &[RoundEvent],
    ) {
        let mut holdings = self.state.take().expect("allocation seen");
        let mut last_decision = None;
        for event in events {
            match *event {
                RoundEvent::Decision { decision, .. } => {
                    if matches!(decision, AcceptDecision::AcceptFavourRepay { .. }) {
                        self.repays += 1;
                        if !self.social_capital {
                            self.violations.push(format!(
                                "day {} round {round}: favour repaid without SC",
                                self.days
                            ));
                        }
                    }
                    last_decision = Some(decision);
                }
                RoundEvent::Swap(req) => {
                    let before_req = self.sat(&holdings, req.requester);
                    let before_rec = self.sat(&holdings, req.receiver);
                    let (r, v) = (req.requester.index(), req.receiver.index());
                    holdings[r].remove(req.offered_slot);
                    holdings[r].insert(req.requested_slot);
                    holdings[v].remove(req.requested_slot);
                    holdings[v].insert(req.offered_slot);
                    let occupancy: Vec<u32> = {
                        let mut occ = vec![0u32; self.occupancy.len()];
                        for h in &holdings {
                            for s in h.iter() {
                                occ[s.index()] += 1;
                            }
                        }
                        occ
                    };
                    if occupancy != self.occupancy {
                        self.violations.push(format!(
                            "day {} round {round}: occupancy changed",
                            self.days
                        ));
                    }
                    if occupancy.iter().any(|&o| o as usize > self.capacity) {
                        self.violations.push(format!(
                            "day {} round {round}: capacity exceeded",
                            self.days
                        ));
                    }
                    if self.sat(&holdings, req.requester) <= before_req {
                        self.violations.push(format!(
                            "day {} round {round}: requester not better off",
                            self.days
                        ));
                    }
                    let after_rec = self.sat(&holdings, req.receiver);
                    if last_decision == Some(AcceptDecision::AcceptBeneficial) {
                        self.beneficial += 1;
                        if after_rec <= before_rec {
                            self.violations.push(format!(
                                "day {} round {round}: beneficial swap did not help",
                                self.days
                            ));
                        }
                    } else if after_rec < before_rec {
                        self.violations.push(format!(
                            "day {} round {round}: receiver worse off",
                            self.days
                        ));
                    }
                    self.swaps += 1;
                }
                _ => {}
            }
        }
        if holdings != state.all_holdings() {
            self.violations.push(format!(
                "day {} round {round}: replayed holdings diverge",
                self.days
            ));
        }
        if state.occupancy() != self.occupancy.as_slice() {
            self.violations.push(format!(
                "day {} round {round}: occupancy vector changed",
                self.days
            ));
        }
        for event in events {
            if let RoundEvent::Ledger {
                owner,
                counterpart,
                change,
            } = *event
            {
                let balance = self.balances.entry((owner, counterpart)).or_insert(0);
                *balance += match change {
                    LedgerChange::Recorded => 1,
                    LedgerChange::Repaid => -1,
                };
                if *balance < 0 {
                    self.violations.push(format!(
                        "day {} round {round}: negative ledger balance",
                        self.days
                    ));
                }
            }
        }
        for ledger in ledgers {
            for (counterpart, owed) in ledger.entries() {
                let replayed = self
                    .balances
                    .get(&(ledger.owner(), counterpart))
                    .copied()
                    .unwrap_or(0);
                if replayed != owed as i64 {
                    self.violations.push(format!(
                        "day {} round {round}: ledger differs from replay",
                        self.days
                    ));
                }
            }
        }
        let replayed_total: i64 = self.balances.values().sum();
        let owed: u64 = ledgers.iter().map(FavourLedger::total_owed).sum();
        if replayed_total != owed as i64 {
            self.violations.push(format!(
                "day {} round {round}: ledger total differs from replay",
                self.days
            ));
        }
        self.state = Some(holdings);
    }

    fn after_learning(&mut self, events: &[LearningEvent], _strategies: &[Strategy]) {
        if events.len() != self.expected_learners {
            self.violations.push(format!(
                "day {}: {} learners, expected {}",
                self.days,
                events.len(),
                self.expected_learners
            ));
        }
        for e in events {
            if e.copied && e.observed_sat.value() <= e.learner_sat.value() {
                self.violations
                    .push(format!("day {}: copied a worse agent", self.days));
            }
            if e.learner == e.observed {
                self.violations
                    .push(format!("day {}: learner observed itself", self.days));
            }
        }
    }
}
