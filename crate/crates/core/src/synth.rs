//! Seeded 2PL simulator with known ground truth.
//!
//! Students have ability `θ ~ N(0, 1)`; questions have discrimination
//! `a = exp(N(0, 0.25²))`, difficulty `b ~ N(0, 1)`, a uniformly drawn correct
//! option and a `Dirichlet(1, 1, 1)` distribution over the three distractors.
//! A respondent answers correctly with probability `σ(a(θ − b))`; otherwise
//! they pick a distractor from the question's distractor distribution.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::{Duration, NaiveDate, NaiveDateTime};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Dirichlet, Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::dataset::{
    self, AnswerMeta, Gender, QuestionMeta, ResponseRecord, StudentMeta, SubjectNode, SubjectTree,
};
use crate::error::{Error, Result};
use crate::io::write_atomic;
use crate::scalar::sigmoid;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub n_students: usize,
    pub n_questions: usize,
    /// Probability that any given (student, question) cell is observed.
    pub density: f64,
    pub seed: u64,
    pub n_groups: usize,
    pub n_quizzes: usize,
    /// Standard deviation of the noise on reported confidence, in points.
    pub confidence_noise: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_students: 200,
            n_questions: 100,
            density: 0.5,
            seed: 0,
            n_groups: 20,
            n_quizzes: 20,
            confidence_noise: 10.0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_students == 0 || self.n_questions == 0 || self.n_groups == 0 || self.n_quizzes == 0 {
            return Err(Error::InvalidArgument("synthetic counts must be at least 1".into()));
        }
        if !(self.density > 0.0 && self.density <= 1.0) {
            return Err(Error::InvalidArgument(format!("density {} outside (0, 1]", self.density)));
        }
        if !(self.confidence_noise >= 0.0) {
            return Err(Error::InvalidArgument("confidence noise must be non-negative".into()));
        }
        Ok(())
    }
}

/// Maps a correctness probability to reported confidence:
/// `clamp(round(scale · p + N(0, noise²)), 0, 100)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceLink {
    pub scale: f64,
    pub noise: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub theta: Vec<f64>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    /// Per question, probability of each option among incorrect answers;
    /// zero at the correct option.
    pub distractor_dist: Vec<[f64; 4]>,
    /// Per question, 1..=4.
    pub correct_option: Vec<u8>,
    pub confidence_link: ConfidenceLink,
}

pub fn gen_ground_truth(config: &SynthConfig) -> Result<GroundTruth> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let std_normal = Normal::new(0.0f64, 1.0).expect("valid");
    let log_a = Normal::new(0.0f64, 0.25).expect("valid");
    let dirichlet = Dirichlet::new([1.0f64; 3]).expect("valid");
    let theta = (0..config.n_students).map(|_| std_normal.sample(&mut rng)).collect();
    let mut a = Vec::with_capacity(config.n_questions);
    let mut b = Vec::with_capacity(config.n_questions);
    let mut correct_option = Vec::with_capacity(config.n_questions);
    let mut distractor_dist = Vec::with_capacity(config.n_questions);
    for _ in 0..config.n_questions {
        a.push(log_a.sample(&mut rng).exp());
        b.push(std_normal.sample(&mut rng));
        let correct: u8 = rng.random_range(1..=4);
        let weights = dirichlet.sample(&mut rng);
        let mut dist = [0.0; 4];
        let mut w = weights.iter();
        for (i, d) in dist.iter_mut().enumerate() {
            if i + 1 != usize::from(correct) {
                *d = *w.next().expect("three distractors");
            }
        }
        correct_option.push(correct);
        distractor_dist.push(dist);
    }
    Ok(GroundTruth {
        theta,
        a,
        b,
        distractor_dist,
        correct_option,
        confidence_link: ConfidenceLink { scale: 100.0, noise: config.confidence_noise },
    })
}

impl GroundTruth {
    pub fn n_students(&self) -> usize {
        self.theta.len()
    }

    pub fn n_questions(&self) -> usize {
        self.b.len()
    }

    pub fn oracle_probability(&self, student: usize, question: usize) -> Result<f64> {
        let theta = *self.theta.get(student).ok_or(Error::UnknownId { kind: "user", id: student as u64 })?;
        if question >= self.b.len() {
            return Err(Error::UnknownId { kind: "question", id: question as u64 });
        }
        Ok(sigmoid(self.a[question] * (theta - self.b[question])))
    }

    /// Probability of each option for one student on one question.
    pub fn option_distribution(&self, student: usize, question: usize) -> Result<[f64; 4]> {
        let p = self.oracle_probability(student, question)?;
        let mut dist = self.distractor_dist[question].map(|d| d * (1.0 - p));
        dist[usize::from(self.correct_option[question] - 1)] = p;
        Ok(dist)
    }
}

/// A generated dataset in the same shape as the ingested files.
#[derive(Debug, Clone)]
pub struct SynthData {
    pub records: Vec<ResponseRecord>,
    pub answer_meta: Vec<AnswerMeta>,
    pub student_meta: Vec<StudentMeta>,
    pub question_meta: Vec<QuestionMeta>,
    pub subjects: SubjectTree,
}

impl SynthData {
    pub fn answer_table(&self) -> HashMap<u64, AnswerMeta> {
        self.answer_meta.iter().map(|a| (a.answer_id, a.clone())).collect()
    }

    pub fn student_table(&self) -> HashMap<u64, StudentMeta> {
        self.student_meta.iter().map(|s| (s.user_id, s.clone())).collect()
    }

    pub fn question_table(&self) -> HashMap<u64, QuestionMeta> {
        self.question_meta.iter().map(|q| (q.question_id, q.clone())).collect()
    }
}

const SUBJECT_ROOT: u64 = 3;
const N_TOPICS: u64 = 6;

fn subject_tree() -> SubjectTree {
    let mut nodes = BTreeMap::new();
    nodes.insert(SUBJECT_ROOT, SubjectNode { name: "Maths".into(), parent_id: None, level: 0 });
    for t in 0..N_TOPICS {
        nodes.insert(100 + t, SubjectNode { name: format!("Topic {t}"), parent_id: Some(SUBJECT_ROOT), level: 1 });
    }
    SubjectTree::new(nodes).expect("static tree is valid")
}

/// Samples answer records and metadata. User and question ids equal their
/// indices in `truth`; answer ids are sequential from 0 in record order.
pub fn sample_responses(truth: &GroundTruth, config: &SynthConfig) -> Result<SynthData> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(1);
    let noise = Normal::new(0.0, truth.confidence_link.noise.max(0.0)).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let start: NaiveDateTime = NaiveDate::from_ymd_opt(2018, 9, 1).unwrap().and_hms_opt(0, 0, 0).unwrap();
    let span_secs: i64 = 660 * 24 * 3600;

    let mut records = Vec::new();
    let mut answer_meta = Vec::new();
    for s in 0..truth.n_students() {
        for q in 0..truth.n_questions() {
            if config.density < 1.0 && rng.random::<f64>() >= config.density {
                continue;
            }
            let p = truth.oracle_probability(s, q)?;
            let correct_option = truth.correct_option[q];
            let answer_value = if rng.random::<f64>() < p {
                correct_option
            } else {
                let u: f64 = rng.random();
                let dist = &truth.distractor_dist[q];
                let mut acc = 0.0;
                let mut pick = None;
                for (i, &d) in dist.iter().enumerate() {
                    acc += d;
                    if d > 0.0 && u < acc {
                        pick = Some(i);
                        break;
                    }
                }
                // rounding can leave u just above the cumulative total
                let last = (0..4).rev().find(|&i| dist[i] > 0.0).unwrap_or(0);
                pick.unwrap_or(last) as u8 + 1
            };
            let answer_id = records.len() as u64;
            records.push(ResponseRecord::answered(q as u64, s as u64, answer_id, answer_value, correct_option));
            let raw = truth.confidence_link.scale * p + noise.sample(&mut rng);
            answer_meta.push(AnswerMeta {
                answer_id,
                date_answered: start + Duration::seconds(rng.random_range(0..span_secs)),
                confidence: Some(raw.round().clamp(0.0, 100.0) as u8),
                group_id: rng.random_range(0..config.n_groups) as u64,
                quiz_id: rng.random_range(0..config.n_quizzes) as u64,
                scheme_of_work_id: rng.random_range(0..config.n_quizzes) as u64 % 8,
            });
        }
    }

    let student_meta = (0..truth.n_students())
        .map(|s| StudentMeta {
            user_id: s as u64,
            gender: Gender::from_code(rng.random_range(0..4)).expect("code in range"),
            date_of_birth: if rng.random::<f64>() < 0.9 {
                NaiveDate::from_ymd_opt(rng.random_range(2006..=2010), rng.random_range(1..=12), 1)
            } else {
                None
            },
            premium_pupil: match rng.random_range(0..5) {
                0 => None,
                1 => Some(true),
                _ => Some(false),
            },
        })
        .collect();
    let question_meta = (0..truth.n_questions())
        .map(|q| QuestionMeta {
            question_id: q as u64,
            subject_ids: vec![SUBJECT_ROOT, 100 + rng.random_range(0..N_TOPICS)],
        })
        .collect();

    Ok(SynthData { records, answer_meta, student_meta, question_meta, subjects: subject_tree() })
}

pub const GROUND_TRUTH_COLUMNS: [&str; 6] = ["StudentOrQuestionId", "Role", "Theta", "A", "B", "CorrectOption"];

pub fn write_ground_truth<W: Write>(output: W, truth: &GroundTruth) -> Result<()> {
    let mut w = dataset::csv_writer(output);
    w.write_record(GROUND_TRUTH_COLUMNS)?;
    for (s, theta) in truth.theta.iter().enumerate() {
        w.write_record([s.to_string(), "student".into(), theta.to_string(), String::new(), String::new(), String::new()])?;
    }
    for q in 0..truth.n_questions() {
        w.write_record([
            q.to_string(),
            "question".into(),
            String::new(),
            truth.a[q].to_string(),
            truth.b[q].to_string(),
            truth.correct_option[q].to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<csv writer>", e))
}

/// File names written by [`write_dataset`].
pub const DATASET_FILES: [&str; 6] = [
    "train_task_1_2.csv",
    "answer_metadata_task_1_2.csv",
    "question_metadata_task_1_2.csv",
    "student_metadata_task_1_2.csv",
    "subject_metadata.csv",
    "ground_truth.csv",
];

/// Writes the full CSV file set plus `ground_truth.csv` into `dir`.
pub fn write_dataset(dir: impl AsRef<Path>, data: &SynthData, truth: &GroundTruth) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let paths: Vec<PathBuf> = DATASET_FILES.iter().map(|f| dir.join(f)).collect();
    write_atomic(&paths[0], |w| dataset::write_records(w, &data.records))?;
    write_atomic(&paths[1], |w| dataset::write_answer_meta(w, &data.answer_meta))?;
    write_atomic(&paths[2], |w| dataset::write_question_meta(w, &data.question_meta))?;
    write_atomic(&paths[3], |w| dataset::write_student_meta(w, &data.student_meta))?;
    write_atomic(&paths[4], |w| dataset::write_subject_tree(w, &data.subjects))?;
    write_atomic(&paths[5], |w| write_ground_truth(w, truth))?;
    Ok(paths)
}
