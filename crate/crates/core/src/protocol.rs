//! One exchange round: advertising board, requests, acceptance decisions,
//! swaps and favour bookkeeping.

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::ledger::FavourLedger;
use crate::model::{AgentId, AllocationState, PreferenceSet, SlotId, SlotSet, Strategy};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Advert {
    pub owner: AgentId,
    pub slot: SlotId,
}

/// Anonymous listing of held-but-unwanted slots, indexed by slot.
///
/// Owners become locked once a request has been addressed to them; a
/// locked owner receives no further requests and makes none of its own
/// for the rest of the round.
#[derive(Debug, Clone)]
pub struct AdvertBoard {
    by_slot: Vec<Vec<AgentId>>,
    locked: Vec<bool>,
    len: usize,
}

impl AdvertBoard {
    pub fn new(slots_per_day: usize, population: usize) -> Self {
        Self {
            by_slot: vec![Vec::new(); slots_per_day],
            locked: vec![false; population],
            len: 0,
        }
    }

    /// Lists every agent's unwanted holdings and clears all locks.
    pub fn rebuild(&mut self, state: &AllocationState, prefs: &[PreferenceSet]) {
        for owners in &mut self.by_slot {
            owners.clear();
        }
        self.locked.clear();
        self.locked.resize(state.population(), false);
        self.len = 0;
        for (agent, (&held, pref)) in state.all_holdings().iter().zip(prefs).enumerate() {
            for slot in held.difference(pref.slots()).iter() {
                self.by_slot[slot.index()].push(AgentId::from(agent));
                self.len += 1;
            }
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Adverts ordered by slot, then by owner.
    pub fn adverts(&self) -> impl Iterator<Item = Advert> + '_ {
        self.by_slot.iter().enumerate().flat_map(|(slot, owners)| {
            owners.iter().map(move |&owner| Advert {
                owner,
                slot: SlotId::from(slot),
            })
        })
    }

    pub fn advertisers(&self, slot: SlotId) -> &[AgentId] {
        &self.by_slot[slot.index()]
    }

    pub fn is_locked(&self, agent: AgentId) -> bool {
        self.locked[agent.index()]
    }

    pub fn lock(&mut self, agent: AgentId) {
        self.locked[agent.index()] = true;
    }

    pub fn locked_count(&self) -> usize {
        self.locked.iter().filter(|&&l| l).count()
    }
}

pub fn build_board(state: &AllocationState, prefs: &[PreferenceSet]) -> AdvertBoard {
    let mut board = AdvertBoard::new(state.occupancy().len(), state.population());
    board.rebuild(state, prefs);
    board
}

/// A proposed one-for-one swap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExchangeRequest {
    pub requester: AgentId,
    pub receiver: AgentId,
    /// Advertised by the receiver; wanted and lacked by the requester.
    pub requested_slot: SlotId,
    /// One of the requester's unwanted holdings.
    pub offered_slot: SlotId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AcceptDecision {
    /// The offered slot is one the receiver wants and lacks.
    AcceptBeneficial,
    /// Neutral exchange accepted to settle a favour owed to `counterpart`.
    AcceptFavourRepay { counterpart: AgentId },
    /// Neutral exchange accepted by a social agent when favours are not tracked.
    AcceptUnconditional,
    /// `stale` marks a request that no longer matches the receiver's holdings.
    Reject { stale: bool },
}

impl AcceptDecision {
    pub fn is_accept(self) -> bool {
        !matches!(self, AcceptDecision::Reject { .. })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            AcceptDecision::AcceptBeneficial => "accept-beneficial",
            AcceptDecision::AcceptFavourRepay { .. } => "accept-favour-repay",
            AcceptDecision::AcceptUnconditional => "accept-unconditional",
            AcceptDecision::Reject { stale: false } => "reject",
            AcceptDecision::Reject { stale: true } => "reject-stale",
        }
    }
}

/// Picks a request for `agent`, or `None` if it is locked, fully
/// satisfied, or no unlocked owner advertises a slot it wants and lacks.
///
/// The advert is uniform over all eligible adverts (so a locked owner is
/// equivalent to redrawing among the rest); the offered slot is uniform
/// over the agent's unwanted holdings.
pub fn select_request<R: Rng + ?Sized>(
    agent: AgentId,
    state: &AllocationState,
    prefs: &[PreferenceSet],
    board: &AdvertBoard,
    rng: &mut R,
) -> Option<ExchangeRequest> {
    if board.is_locked(agent) {
        return None;
    }
    let held = state.holdings(agent);
    let wanted = prefs[agent.index()].slots().difference(held);
    if wanted.is_empty() {
        return None;
    }
    let eligible = |slot: SlotId| {
        board
            .advertisers(slot)
            .iter()
            .filter(move |&&owner| owner != agent && !board.is_locked(owner))
    };
    let count: usize = wanted.iter().map(|slot| eligible(slot).count()).sum();
    if count == 0 {
        return None;
    }
    let (receiver, requested_slot) = wanted
        .iter()
        .flat_map(|slot| eligible(slot).map(move |&owner| (owner, slot)))
        .nth(rng.gen_range(0..count))
        .expect("index below eligible count");

    let unwanted = held.difference(prefs[agent.index()].slots());
    let offered_slot = unwanted
        .nth(rng.gen_range(0..unwanted.len()))
        .expect("an unsatisfied agent holds an unwanted slot");
    Some(ExchangeRequest {
        requester: agent,
        receiver,
        requested_slot,
        offered_slot,
    })
}

/// The receiver's answer to `req`, from its own strategy, ledger,
/// preferences and holdings. Pure.
pub fn decide(
    req: &ExchangeRequest,
    strategy: Strategy,
    ledger: &FavourLedger,
    prefs: PreferenceSet,
    holdings: SlotSet,
    social_capital: bool,
) -> AcceptDecision {
    let stale = !holdings.contains(req.requested_slot)
        || prefs.contains(req.requested_slot)
        || holdings.contains(req.offered_slot);
    if stale {
        return AcceptDecision::Reject { stale: true };
    }
    if prefs.contains(req.offered_slot) {
        return AcceptDecision::AcceptBeneficial;
    }
    match (strategy, social_capital) {
        (Strategy::Social, true) if ledger.owed_to(req.requester) >= 1 => {
            AcceptDecision::AcceptFavourRepay {
                counterpart: req.requester,
            }
        }
        (Strategy::Social, false) => AcceptDecision::AcceptUnconditional,
        _ => AcceptDecision::Reject { stale: false },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum ExchangeError {
    #[error("requester {0} no longer holds the offered slot or already holds the requested one")]
    RequesterStale(AgentId),
    #[error("receiver {0} no longer holds the requested slot or already holds the offered one")]
    ReceiverStale(AgentId),
}

/// Swaps the two slots in place; leaves the state untouched on error.
pub fn apply_exchange(
    state: &mut AllocationState,
    req: &ExchangeRequest,
) -> Result<(), ExchangeError> {
    let requester = state.holdings(req.requester);
    let receiver = state.holdings(req.receiver);
    if !requester.contains(req.offered_slot) || requester.contains(req.requested_slot) {
        return Err(ExchangeError::RequesterStale(req.requester));
    }
    if !receiver.contains(req.requested_slot) || receiver.contains(req.offered_slot) {
        return Err(ExchangeError::ReceiverStale(req.receiver));
    }
    let held = state.holdings_mut(req.requester);
    held.remove(req.offered_slot);
    held.insert(req.requested_slot);
    let held = state.holdings_mut(req.receiver);
    held.remove(req.requested_slot);
    held.insert(req.offered_slot);
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LedgerChange {
    Recorded,
    Repaid,
}

/// Everything that happens in a round, in order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoundEvent {
    Request(ExchangeRequest),
    Decision {
        request: ExchangeRequest,
        decision: AcceptDecision,
    },
    Swap(ExchangeRequest),
    SwapFailed(ExchangeRequest),
    Ledger {
        owner: AgentId,
        counterpart: AgentId,
        change: LedgerChange,
    },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RoundStats {
    pub requests: u32,
    pub accepted_beneficial: u32,
    pub accepted_repay: u32,
    pub accepted_unconditional: u32,
    pub rejected: u32,
    pub stale: u32,
    /// Accepted but no longer applicable when the swap was attempted.
    pub failed: u32,
    pub favours_recorded: u32,
    pub favours_repaid: u32,
}

impl RoundStats {
    /// Swaps actually carried out.
    pub fn accepted(&self) -> u32 {
        self.accepted_beneficial + self.accepted_repay + self.accepted_unconditional
    }

    pub fn add(&mut self, other: &RoundStats) {
        self.requests += other.requests;
        self.accepted_beneficial += other.accepted_beneficial;
        self.accepted_repay += other.accepted_repay;
        self.accepted_unconditional += other.accepted_unconditional;
        self.rejected += other.rejected;
        self.stale += other.stale;
        self.failed += other.failed;
        self.favours_recorded += other.favours_recorded;
        self.favours_repaid += other.favours_repaid;
    }
}

/// Per-day inputs that stay fixed across rounds.
#[derive(Debug, Clone, Copy)]
pub struct RoundInputs<'a> {
    pub prefs: &'a [PreferenceSet],
    pub strategies: &'a [Strategy],
    pub social_capital: bool,
}

impl RoundInputs<'_> {
    fn tracks_favours(&self, agent: AgentId) -> bool {
        self.social_capital && self.strategies[agent.index()] == Strategy::Social
    }
}

/// Buffers reused from round to round.
#[derive(Debug, Clone)]
pub struct RoundScratch {
    board: AdvertBoard,
    order: Vec<AgentId>,
    requests: Vec<ExchangeRequest>,
    accepted: Vec<(ExchangeRequest, AcceptDecision)>,
}

impl RoundScratch {
    pub fn new(slots_per_day: usize, population: usize) -> Self {
        Self {
            board: AdvertBoard::new(slots_per_day, population),
            order: Vec::with_capacity(population),
            requests: Vec::with_capacity(population),
            accepted: Vec::with_capacity(population),
        }
    }

    pub fn board(&self) -> &AdvertBoard {
        &self.board
    }
}

/// Runs one round.
///
/// The board is rebuilt, agents are visited in a fresh random order and
/// each unlocked, unsatisfied agent issues at most one request, locking its
/// receiver. Receivers then decide in request order, each swap being applied
/// as soon as it is accepted. Favour records and repayments are applied
/// once every decision of the round has been made.
pub fn run_exchange_round<R: Rng + ?Sized>(
    state: &mut AllocationState,
    inputs: &RoundInputs<'_>,
    ledgers: &mut [FavourLedger],
    rng: &mut R,
    scratch: &mut RoundScratch,
    mut events: Option<&mut Vec<RoundEvent>>,
) -> RoundStats {
    let mut stats = RoundStats::default();
    let RoundScratch {
        board,
        order,
        requests,
        accepted,
    } = scratch;

    board.rebuild(state, inputs.prefs);
    order.clear();
    order.extend((0..state.population()).map(AgentId::from));
    order.shuffle(rng);
    requests.clear();
    accepted.clear();

    for &agent in order.iter() {
        if let Some(req) = select_request(agent, state, inputs.prefs, board, rng) {
            board.lock(req.receiver);
            requests.push(req);
            if let Some(log) = events.as_deref_mut() {
                log.push(RoundEvent::Request(req));
            }
        }
    }
    stats.requests = requests.len() as u32;

    for req in requests.iter() {
        let receiver = req.receiver.index();
        let decision = decide(
            req,
            inputs.strategies[receiver],
            &ledgers[receiver],
            inputs.prefs[receiver],
            state.holdings(req.receiver),
            inputs.social_capital,
        );
        if let Some(log) = events.as_deref_mut() {
            log.push(RoundEvent::Decision {
                request: *req,
                decision,
            });
        }
        match decision {
            AcceptDecision::Reject { stale } => {
                stats.rejected += 1;
                if stale {
                    stats.stale += 1;
                }
            }
            _ => match apply_exchange(state, req) {
                Ok(()) => {
                    match decision {
                        AcceptDecision::AcceptBeneficial => stats.accepted_beneficial += 1,
                        AcceptDecision::AcceptFavourRepay { .. } => stats.accepted_repay += 1,
                        _ => stats.accepted_unconditional += 1,
                    }
                    accepted.push((*req, decision));
                    if let Some(log) = events.as_deref_mut() {
                        log.push(RoundEvent::Swap(*req));
                    }
                }
                Err(_) => {
                    stats.failed += 1;
                    if let Some(log) = events.as_deref_mut() {
                        log.push(RoundEvent::SwapFailed(*req));
                    }
                }
            },
        }
    }

    for (req, decision) in accepted.iter() {
        if inputs.tracks_favours(req.requester) {
            ledgers[req.requester.index()]
                .record_favour(req.receiver)
                .expect("requester and receiver differ");
            stats.favours_recorded += 1;
            if let Some(log) = events.as_deref_mut() {
                log.push(RoundEvent::Ledger {
                    owner: req.requester,
                    counterpart: req.receiver,
                    change: LedgerChange::Recorded,
                });
            }
        }
        if let AcceptDecision::AcceptFavourRepay { counterpart } = *decision {
            ledgers[req.receiver.index()]
                .repay_favour(counterpart)
                .expect("repayment decided against a positive balance");
            stats.favours_repaid += 1;
            if let Some(log) = events.as_deref_mut() {
                log.push(RoundEvent::Ledger {
                    owner: req.receiver,
                    counterpart,
                    change: LedgerChange::Repaid,
                });
            }
        }
    }
    stats
}
