use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::adaptive::model::AdaptiveModel;
use crate::adaptive::policy::SelectionPolicy;
use crate::adaptive::state::{AnswerSource, SelectionState};
use crate::error::{Error, Result};
use crate::predict::{accuracy, THRESHOLD};
use crate::scalar::Scalar;

/// Hard label per (student, target question), ordered by student then question.
pub fn predict_targets<F: Scalar, M: AdaptiveModel<F> + ?Sized>(
    model: &M,
    state: &SelectionState,
) -> Result<Vec<((u64, u64), u8)>> {
    let mut out = Vec::new();
    for &s in state.students() {
        for &q in state.targets(s) {
            out.push(((s, q), u8::from(model.probability(s, q)?.f64() >= THRESHOLD)));
        }
    }
    Ok(out)
}

/// Accuracy of [`predict_targets`] against the environment's truth.
pub fn target_accuracy<F: Scalar, M: AdaptiveModel<F> + ?Sized, E: AnswerSource + ?Sized>(
    model: &M,
    state: &SelectionState,
    environment: &E,
) -> Result<f64> {
    let predictions = predict_targets(model, state)?;
    let mut labels = Vec::with_capacity(predictions.len());
    let mut truth = Vec::with_capacity(predictions.len());
    for ((s, q), label) in predictions {
        let (_, correct) = environment
            .answer(s, q)
            .ok_or_else(|| Error::Contract(format!("environment has no answer for target ({s}, {q})")))?;
        labels.push(label);
        truth.push(u8::from(correct));
    }
    accuracy(&labels, &truth)
}

/// One line of the episode trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRecord {
    pub step: usize,
    pub selections: BTreeMap<u64, u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpisodeResult {
    /// Questions revealed per student, in order.
    pub selected: BTreeMap<u64, Vec<u64>>,
    pub final_accuracy: f64,
    /// Target accuracy before the first step and after each step, when tracked.
    pub per_step_accuracy: Option<Vec<f64>>,
    pub trace: Vec<StepRecord>,
}

#[derive(Debug, Serialize)]
struct Summary<'a> {
    summary: bool,
    students: usize,
    steps: usize,
    final_accuracy: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    per_step_accuracy: Option<&'a [f64]>,
}

impl EpisodeResult {
    /// JSON lines: one per step, then a summary object.
    pub fn write_trace<W: Write>(&self, mut output: W) -> Result<()> {
        let io = |e: std::io::Error| Error::io("<trace>", e);
        for record in &self.trace {
            serde_json::to_writer(&mut output, record).map_err(|e| Error::Contract(e.to_string()))?;
            output.write_all(b"\n").map_err(io)?;
        }
        let summary = Summary {
            summary: true,
            students: self.selected.len(),
            steps: self.trace.len(),
            final_accuracy: self.final_accuracy,
            per_step_accuracy: self.per_step_accuracy.as_deref(),
        };
        serde_json::to_writer(&mut output, &summary).map_err(|e| Error::Contract(e.to_string()))?;
        output.write_all(b"\n").map_err(io)
    }
}

/// Runs select, reveal and update until the budget is spent, then scores the
/// targets. The model sees only revealed answers.
pub fn run_episode<F, M, E>(
    model: &mut M,
    environment: &E,
    mut state: SelectionState,
    policy: &mut SelectionPolicy,
    track_steps: bool,
) -> Result<EpisodeResult>
where
    F: Scalar,
    M: AdaptiveModel<F> + ?Sized,
    E: AnswerSource + ?Sized,
{
    let mut per_step = Vec::new();
    if track_steps {
        per_step.push(target_accuracy(model, &state, environment)?);
    }
    let mut trace = Vec::with_capacity(state.budget());
    while !state.is_finished() {
        let selections = policy.select(&state, model)?;
        let revealed = state.reveal(environment, &selections)?;
        model.update(&revealed)?;
        let accuracy = if track_steps {
            let a = target_accuracy(model, &state, environment)?;
            per_step.push(a);
            Some(a)
        } else {
            None
        };
        trace.push(StepRecord { step: state.step(), selections, accuracy });
    }
    let final_accuracy = match per_step.last() {
        Some(&a) => a,
        None => target_accuracy(model, &state, environment)?,
    };
    let selected = state
        .students()
        .iter()
        .map(|&s| (s, state.observed(s).iter().map(|r| r.question_id).collect()))
        .collect();
    Ok(EpisodeResult { selected, final_accuracy, per_step_accuracy: track_steps.then_some(per_step), trace })
}

/// Candidate and target masks for one episode.
pub type Masks = (BTreeMap<u64, BTreeSet<u64>>, BTreeMap<u64, BTreeSet<u64>>);

/// Per student, a seeded shuffle of their pool: the first `n_targets`
/// questions become targets, the next `n_candidates` (all remaining when
/// `None`) become candidates. Errors when a pool has fewer than `n_targets`.
pub fn sample_masks(
    pools: &BTreeMap<u64, BTreeSet<u64>>,
    n_targets: usize,
    n_candidates: Option<usize>,
    seed: u64,
) -> Result<Masks> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut candidates = BTreeMap::new();
    let mut targets = BTreeMap::new();
    for (&s, pool) in pools {
        if pool.len() < n_targets {
            return Err(Error::InvalidArgument(format!(
                "student {s} has {} questions, fewer than {n_targets} targets",
                pool.len()
            )));
        }
        let mut order: Vec<u64> = pool.iter().copied().collect();
        order.shuffle(&mut rng);
        let rest = &order[n_targets..];
        let take = n_candidates.map_or(rest.len(), |n| n.min(rest.len()));
        targets.insert(s, order[..n_targets].iter().copied().collect());
        candidates.insert(s, rest[..take].iter().copied().collect());
    }
    Ok((candidates, targets))
}

/// Like [`sample_masks`] with each student's target count set to
/// `round(fraction * pool size)`, at least one when the pool is nonempty.
pub fn sample_masks_fraction(pools: &BTreeMap<u64, BTreeSet<u64>>, fraction: f64, seed: u64) -> Result<Masks> {
    if !(0.0..1.0).contains(&fraction) || fraction == 0.0 {
        return Err(Error::InvalidArgument(format!("target fraction {fraction} outside (0, 1)")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut candidates = BTreeMap::new();
    let mut targets = BTreeMap::new();
    for (&s, pool) in pools {
        let mut order: Vec<u64> = pool.iter().copied().collect();
        order.shuffle(&mut rng);
        let n = ((fraction * order.len() as f64).round() as usize).clamp(usize::from(!order.is_empty()), order.len());
        targets.insert(s, order[..n].iter().copied().collect());
        candidates.insert(s, order[n..].iter().copied().collect());
    }
    Ok((candidates, targets))
}
