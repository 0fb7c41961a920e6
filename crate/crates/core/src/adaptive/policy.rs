use std::collections::BTreeMap;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::adaptive::model::AdaptiveModel;
use crate::adaptive::state::SelectionState;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    Random,
    MaxUncertainty,
    FisherInformation,
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "random" => Ok(PolicyKind::Random),
            "max_uncertainty" | "uncertainty" => Ok(PolicyKind::MaxUncertainty),
            "fisher_information" | "fisher" => Ok(PolicyKind::FisherInformation),
            other => Err(Error::InvalidArgument(format!("unknown policy `{other}`"))),
        }
    }
}

/// A question-selection rule with its own seeded random stream.
#[derive(Debug, Clone)]
pub struct SelectionPolicy {
    kind: PolicyKind,
    rng: ChaCha8Rng,
}

impl SelectionPolicy {
    pub fn new(kind: PolicyKind, seed: u64) -> Self {
        SelectionPolicy { kind, rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn kind(&self) -> PolicyKind {
        self.kind
    }

    /// One remaining candidate per student. Students with no candidates left
    /// are skipped. Scored policies break ties by the smallest question id.
    pub fn select<F: Scalar, M: AdaptiveModel<F> + ?Sized>(
        &mut self,
        state: &SelectionState,
        model: &M,
    ) -> Result<BTreeMap<u64, u64>> {
        if state.is_finished() {
            return Err(Error::Contract(format!("budget of {} steps exhausted", state.budget())));
        }
        let mut out = BTreeMap::new();
        for &s in state.students() {
            let remaining = state.candidates(s);
            if remaining.is_empty() {
                continue;
            }
            let choice = match self.kind {
                PolicyKind::Random => {
                    *remaining.iter().nth(self.rng.random_range(0..remaining.len())).expect("index in range")
                }
                PolicyKind::MaxUncertainty => best(remaining.iter().copied(), |q| {
                    let p = model.probability(s, q)?;
                    Ok(p * (F::one() - p))
                })?,
                PolicyKind::FisherInformation => best(remaining.iter().copied(), |q| model.information(s, q))?,
            };
            out.insert(s, choice);
        }
        Ok(out)
    }
}

/// First question (in ascending id order) with the strictly largest score.
fn best<F: Scalar>(questions: impl Iterator<Item = u64>, mut score: impl FnMut(u64) -> Result<F>) -> Result<u64> {
    let mut top: Option<(u64, F)> = None;
    for q in questions {
        let v = score(q)?;
        if top.is_none_or(|(_, b)| v > b) {
            top = Some((q, v));
        }
    }
    Ok(top.expect("caller passes a nonempty set").0)
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;
    use crate::adaptive::state::{init_episode, Revealed};

    /// Fixed per-question probabilities and discriminations.
    struct Table(BTreeMap<u64, (f64, f64)>);

    impl AdaptiveModel<f64> for Table {
        fn probability(&self, _: u64, q: u64) -> Result<f64> {
            Ok(self.0[&q].0)
        }

        fn information(&self, _: u64, q: u64) -> Result<f64> {
            let (p, a) = self.0[&q];
            Ok(a * a * p * (1.0 - p))
        }

        fn update(&mut self, _: &[(u64, Revealed)]) -> Result<()> {
            Ok(())
        }
    }

    fn state(candidates: &[u64]) -> SelectionState {
        let c: BTreeSet<u64> = candidates.iter().copied().collect();
        init_episode(&[1, 2], [(1, c)].into(), BTreeMap::new(), 10).unwrap()
    }

    #[test]
    fn scored_policies() {
        let model = Table([(1, (0.9, 1.0)), (2, (0.5, 1.0)), (3, (0.1, 1.0))].into());
        let s = state(&[1, 2, 3]);
        let mut p = SelectionPolicy::new(PolicyKind::MaxUncertainty, 0);
        assert_eq!(p.select(&s, &model).unwrap(), [(1, 2)].into());
        let model = Table([(4, (0.5, 1.0)), (5, (0.7, 1.0))].into());
        let mut f = SelectionPolicy::new(PolicyKind::FisherInformation, 0);
        assert_eq!(f.select(&state(&[4, 5]), &model).unwrap(), [(1, 4)].into());
    }

    #[test]
    fn ties_to_smallest_and_forced_moves() {
        let model = Table([(8, (0.3, 1.0)), (6, (0.7, 1.0)), (9, (0.2, 2.0))].into());
        let mut u = SelectionPolicy::new(PolicyKind::MaxUncertainty, 0);
        assert_eq!(u.select(&state(&[8, 6]), &model).unwrap(), [(1, 6)].into());
        for kind in [PolicyKind::Random, PolicyKind::MaxUncertainty, PolicyKind::FisherInformation] {
            let mut p = SelectionPolicy::new(kind, 3);
            assert_eq!(p.select(&state(&[9]), &model).unwrap(), [(1, 9)].into());
        }
    }

    #[test]
    fn random_is_seeded() {
        let model = Table((0..50).map(|q| (q, (0.5, 1.0))).collect());
        let s = state(&(0..50).collect::<Vec<_>>());
        let a = SelectionPolicy::new(PolicyKind::Random, 11).select(&s, &model).unwrap();
        let b = SelectionPolicy::new(PolicyKind::Random, 11).select(&s, &model).unwrap();
        assert_eq!(a, b);
        assert!("greedy".parse::<PolicyKind>().is_err());
        assert_eq!("fisher-information".parse::<PolicyKind>().unwrap(), PolicyKind::FisherInformation);
    }
}
