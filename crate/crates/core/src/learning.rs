//! End-of-day payoff-biased imitation.

use rand::seq::index;
use rand::Rng;

use crate::model::{AgentId, Satisfaction, Strategy};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LearningEvent {
    pub learner: AgentId,
    pub observed: AgentId,
    pub learner_sat: Satisfaction,
    pub observed_sat: Satisfaction,
    /// Strategy the learner held before this event.
    pub before: Strategy,
    pub copied: bool,
}

/// Revises strategies in place and returns one event per learner.
///
/// `learners` distinct agents are drawn without replacement and processed
/// in draw order. Each observes a uniformly chosen other agent and copies
/// that agent's current strategy iff `observed - own > x` for a fresh
/// uniform `x` in `[0, 1)`. Satisfactions are the day-end snapshot, so an
/// earlier copy in the same step changes what is copied but not the odds.
pub fn learning_step<R: Rng + ?Sized>(
    strategies: &mut [Strategy],
    satisfactions: &[Satisfaction],
    learners: usize,
    rng: &mut R,
) -> Vec<LearningEvent> {
    let n = strategies.len();
    debug_assert_eq!(n, satisfactions.len());
    if n < 2 || learners == 0 {
        return Vec::new();
    }
    let chosen = index::sample(rng, n, learners.min(n));
    let mut events = Vec::with_capacity(chosen.len());
    for learner in chosen.iter() {
        let mut observed = rng.gen_range(0..n - 1);
        if observed >= learner {
            observed += 1;
        }
        let own = satisfactions[learner];
        let other = satisfactions[observed];
        let before = strategies[learner];
        let mut copied = false;
        if own.value() < other.value() {
            let x: f64 = rng.gen();
            if other.value() - own.value() > x {
                strategies[learner] = strategies[observed];
                copied = true;
            }
        }
        events.push(LearningEvent {
            learner: AgentId::from(learner),
            observed: AgentId::from(observed),
            learner_sat: own,
            observed_sat: other,
            before,
            copied,
        });
    }
    events
}
