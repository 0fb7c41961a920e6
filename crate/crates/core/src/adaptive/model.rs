use std::collections::HashMap;

use crate::adaptive::state::Revealed;
use crate::error::{Error, Result};
use crate::predict::{IrtModel, ResponseModel};
use crate::scalar::Scalar;

/// A predictor that can absorb answers revealed during an episode.
pub trait AdaptiveModel<F: Scalar> {
    /// Probability that `user_id` answers `question_id` correctly.
    fn probability(&self, user_id: u64, question_id: u64) -> Result<F>;

    /// Fisher information of the question for this student. Without item
    /// discriminations this is `p(1 - p)`.
    fn information(&self, user_id: u64, question_id: u64) -> Result<F> {
        let p = self.probability(user_id, question_id)?;
        Ok(p * (F::one() - p))
    }

    fn update(&mut self, revealed: &[(u64, Revealed)]) -> Result<()>;
}

/// Wraps a fixed model; updates are ignored.
#[derive(Debug, Clone)]
pub struct Frozen<M>(pub M);

impl<F: Scalar, M: ResponseModel<F>> AdaptiveModel<F> for Frozen<M> {
    fn probability(&self, user_id: u64, question_id: u64) -> Result<F> {
        self.0.predict_proba(user_id, question_id)
    }

    fn update(&mut self, _revealed: &[(u64, Revealed)]) -> Result<()> {
        Ok(())
    }
}

/// Per-student abilities over a frozen IRT item bank.
///
/// Every student starts at `theta = 0`; each update re-estimates the
/// student's MAP ability from all of their revealed answers.
#[derive(Debug, Clone)]
pub struct IrtAbilityTracker<F> {
    items: IrtModel<F>,
    prior_precision: F,
    newton_steps: usize,
    theta: HashMap<u64, F>,
    responses: HashMap<u64, Vec<(usize, bool)>>,
}

impl<F: Scalar> IrtAbilityTracker<F> {
    pub const DEFAULT_NEWTON_STEPS: usize = 20;

    pub fn new(items: IrtModel<F>) -> Self {
        Self::with_settings(items, F::one(), Self::DEFAULT_NEWTON_STEPS)
    }

    pub fn with_settings(items: IrtModel<F>, prior_precision: F, newton_steps: usize) -> Self {
        IrtAbilityTracker { items, prior_precision, newton_steps, theta: HashMap::new(), responses: HashMap::new() }
    }

    pub fn items(&self) -> &IrtModel<F> {
        &self.items
    }

    pub fn ability(&self, user_id: u64) -> F {
        self.theta.get(&user_id).copied().unwrap_or_else(F::zero)
    }

    fn question(&self, question_id: u64) -> Result<usize> {
        self.items.question_index(question_id).ok_or(Error::UnknownId { kind: "question", id: question_id })
    }
}

impl<F: Scalar> AdaptiveModel<F> for IrtAbilityTracker<F> {
    fn probability(&self, user_id: u64, question_id: u64) -> Result<F> {
        Ok(self.items.probability_at(self.ability(user_id), self.question(question_id)?))
    }

    fn information(&self, user_id: u64, question_id: u64) -> Result<F> {
        Ok(self.items.item_information(self.ability(user_id), self.question(question_id)?))
    }

    fn update(&mut self, revealed: &[(u64, Revealed)]) -> Result<()> {
        let mut touched = Vec::new();
        for &(s, r) in revealed {
            let q = self.question(r.question_id)?;
            self.responses.entry(s).or_default().push((q, r.is_correct));
            touched.push(s);
        }
        touched.sort_unstable();
        touched.dedup();
        for s in touched {
            let start = self.ability(s);
            let theta = self.items.estimate_ability(&self.responses[&s], start, self.newton_steps, self.prior_precision);
            self.theta.insert(s, theta);
        }
        Ok(())
    }
}
