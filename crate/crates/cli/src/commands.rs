use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use diagq::adaptive::{
    init_episode, run_episode, sample_masks_fraction, AdaptiveModel, Frozen, IrtAbilityTracker, PolicyKind,
    RecordEnvironment, SelectionPolicy, DEFAULT_BUDGET,
};
use diagq::dataset::{parse_records, read_answer_meta, ResponseMatrix, split_records, split_students, write_records, SplitFractions};
use diagq::io::write_atomic;
use diagq::predict::{Checkpoint, IrtModel, MajorityModel, MfModel, Mode};
use diagq::quality::{
    agreement_by_expert, aggregate_ranks_mean, confidence_ranking, feature_column, max_of, quality_features,
    rank_by_feature, weighted_feature_rank, Condition, Direction, ExpertJudgments, QualityRanking,
};
use diagq::submission::{fill_pair_template, fill_ranking_template, read_pair_predictions, score_pairs, write_confusion, PairTask};
use diagq::synth::{gen_ground_truth, sample_responses, write_dataset, SynthConfig};
use log::info;
use serde::Serialize;
use serde_json::json;

use crate::config::{parse_fractions, pick, FileConfig};
use crate::{Cli, Command, EpisodeArgs, EvalPairArgs, EvalRankingArgs, RankArgs, SimulateArgs, SplitArgs, SubmitArgs, TrainArgs};

/// File-name prefix that marks an adaptive-episode model.
pub const EPISODE_MODEL_PREFIX: &str = "model_task_4_";

/// Settings shared by every command.
struct Common {
    file: FileConfig,
    seed: u64,
    outdir: PathBuf,
}

pub fn run(cli: Cli) -> Result<()> {
    let file = FileConfig::load(cli.config.as_deref())?;
    let seed = pick(cli.seed, file.seed, 0);
    let outdir = pick(cli.outdir, file.outdir.clone(), PathBuf::from("."));
    let common = Common { file, seed, outdir };
    match cli.command {
        Command::Split(a) => split(&common, a),
        Command::Train(a) => train(&common, a),
        Command::Rank(a) => rank(&common, a),
        Command::EvalTask1(a) => eval_pairs(&common, a, PairTask::Correctness),
        Command::EvalTask2(a) => eval_pairs(&common, a, PairTask::AnswerChoice),
        Command::EvalTask3(a) => eval_ranking(&common, a),
        Command::Episode(a) => episode(&common, a),
        Command::Submit(a) => submit(&common, a),
        Command::Simulate(a) => simulate(&common, a),
    }
}

fn log_resolved(command: &str, settings: &impl Serialize) {
    info!("{command}: resolved configuration {}", serde_json::to_string(settings).unwrap_or_default());
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn input_path(flag: Option<PathBuf>, file: &FileConfig) -> Result<PathBuf> {
    flag.or_else(|| file.input.clone()).ok_or_else(|| anyhow!("--input is required"))
}

fn parse_mode(text: &str) -> Result<Mode> {
    match text {
        "binary" => Ok(Mode::Binary),
        "categorical" => Ok(Mode::Categorical),
        other => bail!("unknown mode `{other}` (binary or categorical)"),
    }
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    write_atomic(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value).map_err(|e| diagq::Error::Contract(e.to_string()))?;
        std::io::Write::write_all(w, b"\n").map_err(|e| diagq::Error::Contract(e.to_string()))
    })?;
    Ok(())
}

fn split(c: &Common, a: SplitArgs) -> Result<()> {
    let input = input_path(a.input, &c.file)?;
    let mode = pick(a.mode, c.file.mode.clone(), "records".into());
    let fractions = match a.fractions {
        Some(text) => parse_fractions(&text)?,
        None => c.file.fractions.clone().unwrap_or_else(|| vec![0.8, 0.1, 0.1]),
    };
    log_resolved("split", &json!({"input": input, "mode": mode, "fractions": fractions, "seed": c.seed, "outdir": c.outdir}));
    let [train, public, private] = fractions[..] else {
        bail!("expected three fractions, got {}", fractions.len());
    };
    let fractions = SplitFractions::new(train, public, private)?;
    let records = parse_records(&input, false)?.records;
    let parts = match mode.as_str() {
        "records" => split_records(&records, &fractions, c.seed)?,
        "students" => split_students(&records, &fractions, c.seed)?,
        other => bail!("unknown split mode `{other}` (records or students)"),
    };
    ensure_dir(&c.outdir)?;
    for (name, rows) in [("train.csv", &parts.train), ("test_public.csv", &parts.public_test), ("test_private.csv", &parts.private_test)] {
        write_atomic(c.outdir.join(name), |w| write_records(w, rows))?;
        println!("{name}\t{}", rows.len());
    }
    Ok(())
}

fn train(c: &Common, a: TrainArgs) -> Result<()> {
    let input = input_path(a.input, &c.file)?;
    let kind = pick(a.model, c.file.model.clone(), "irt".into());
    let mode = parse_mode(&pick(a.mode, c.file.mode.clone(), "binary".into()))?;
    let name = a.name.unwrap_or_else(|| format!("model_{kind}.bin"));
    let mut irt = c.file.irt.clone().unwrap_or_default();
    irt.seed = c.seed;
    let mut mf = c.file.mf.clone().unwrap_or_default();
    mf.seed = c.seed;
    mf.mode = mode;
    log_resolved(
        "train",
        &json!({"input": input, "model": kind, "mode": mode, "seed": c.seed, "outdir": c.outdir, "name": name, "irt": irt, "mf": mf}),
    );
    let records = parse_records(&input, false)?.records;
    let matrix = ResponseMatrix::from_records(&records)?;
    let (checkpoint, loss) = match kind.as_str() {
        "majority" => (Checkpoint::Majority(MajorityModel::<f64>::fit(&matrix)?), None),
        "irt" => {
            if mode != Mode::Binary {
                bail!("IRT predicts correctness only; use --mode binary");
            }
            let fitted = IrtModel::<f64>::fit(&matrix, &irt)?;
            (Checkpoint::Irt(fitted.model), fitted.losses.last().copied())
        }
        "mf" => {
            let fitted = MfModel::<f64>::fit(&matrix, &mf)?;
            (Checkpoint::Mf(fitted.model), fitted.losses.last().copied())
        }
        other => bail!("unknown model `{other}` (majority, irt or mf)"),
    };
    ensure_dir(&c.outdir)?;
    let path = c.outdir.join(&name);
    checkpoint.save(&path)?;
    println!("model\t{}", path.display());
    if let Some(loss) = loss {
        println!("final_loss\t{loss:.6}");
    }
    Ok(())
}

fn rank(c: &Common, a: RankArgs) -> Result<()> {
    let input = input_path(a.input, &c.file)?;
    let file = c.file.rank.clone().unwrap_or_default();
    let method = pick(a.method, file.method, "confidence".into());
    let condition = pick(a.condition, file.condition, "group".into());
    let weights = pick(a.weights, file.weights, vec![1.0, 1.0, 1.0, 1.0]);
    log_resolved(
        "rank",
        &json!({"input": input, "answers": a.answers, "method": method, "condition": condition, "weights": weights, "outdir": c.outdir}),
    );
    let records = parse_records(&input, false)?.records;
    let answers = read_answer_meta(&a.answers)?;
    let features = quality_features::<f64>(&records, &answers, condition.parse::<Condition>()?)?;
    let by = |pick: fn(&diagq::QualityFeatures64) -> Option<f64>| {
        rank_by_feature(&feature_column(&features, pick), Direction::HigherIsBetter)
    };
    let choice = || by(|f| Some(f.choice_entropy));
    let correctness = || by(|f| Some(f.correctness_entropy));
    let conditional = || by(|f| f.conditional_correctness_entropy);
    let ranking = match method.as_str() {
        "choice-entropy" => choice(),
        "correctness-entropy" => correctness(),
        "conditional-entropy" => conditional(),
        "confidence" => confidence_ranking(&features),
        "mean-rank" => aggregate_ranks_mean(&[choice(), correctness(), conditional(), confidence_ranking(&features)])?,
        "weighted" => {
            // absent conditional entropy falls back to the unconditional value, absent confidence to 0
            let table: BTreeMap<u64, Vec<f64>> = features
                .iter()
                .map(|(&q, f)| {
                    let cond = f.conditional_correctness_entropy.unwrap_or(f.correctness_entropy);
                    (q, vec![f.choice_entropy, f.correctness_entropy, cond, f.mean_confidence.unwrap_or(0.0)])
                })
                .collect();
            weighted_feature_rank(&table, &weights)?
        }
        other => bail!("unknown ranking method `{other}`"),
    };
    ensure_dir(&c.outdir)?;
    let path = c.outdir.join("ranking.csv");
    write_atomic(&path, |w| ranking.write_csv(w))?;
    println!("ranking\t{}\t{} questions", path.display(), ranking.len());
    Ok(())
}

fn eval_pairs(c: &Common, a: EvalPairArgs, task: PairTask) -> Result<()> {
    log_resolved("eval", &json!({"task": task.number(), "predictions": a.predictions, "truth": a.truth, "outdir": c.outdir}));
    let file = File::open(&a.predictions).with_context(|| format!("opening {}", a.predictions.display()))?;
    let predictions = read_pair_predictions(BufReader::new(file), task, &a.predictions.display().to_string())?;
    let truth = parse_records(&a.truth, true)?.records;
    let score = score_pairs(&predictions, &truth, task)?;
    ensure_dir(&c.outdir)?;
    let n = task.number();
    write_atomic(c.outdir.join(format!("confusion_task_{n}.csv")), |w| write_confusion(w, &score.confusion))?;
    write_json(&c.outdir.join(format!("score_task_{n}.json")), &json!({"task": n, "accuracy": score.accuracy, "n": score.n}))?;
    println!("accuracy\t{}", score.accuracy);
    Ok(())
}

fn eval_ranking(c: &Common, a: EvalRankingArgs) -> Result<()> {
    log_resolved("eval-task3", &json!({"ranking": a.ranking, "judgments": a.judgments, "outdir": c.outdir}));
    let ranking = QualityRanking::load(&a.ranking)?;
    let judgments = ExpertJudgments::load(&a.judgments)?;
    if judgments.is_empty() {
        bail!("{} holds no judgments", a.judgments.display());
    }
    let per_expert = agreement_by_expert(&ranking, &judgments)?;
    let (a_max, expert) = max_of(&per_expert)?;
    for (e, v) in &per_expert {
        println!("expert {e}\t{v}");
    }
    println!("A_max\t{a_max}\texpert {expert}");
    ensure_dir(&c.outdir)?;
    let per: BTreeMap<String, f64> = per_expert.iter().map(|(e, v)| (e.to_string(), *v)).collect();
    write_json(&c.outdir.join("score_task_3.json"), &json!({"task": 3, "per_expert": per, "a_max": a_max, "expert": expert}))
}

/// Resolves `path` to a checkpoint file; a directory must contain exactly one
/// file whose name starts with [`EPISODE_MODEL_PREFIX`].
pub fn locate_episode_model(path: &Path) -> Result<PathBuf> {
    if !path.is_dir() {
        return Ok(path.to_path_buf());
    }
    let mut found: Vec<PathBuf> = std::fs::read_dir(path)
        .with_context(|| format!("listing {}", path.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.file_name().is_some_and(|n| n.to_string_lossy().starts_with(EPISODE_MODEL_PREFIX)))
        .collect();
    found.sort();
    match found.len() {
        1 => Ok(found.remove(0)),
        0 => bail!("no file named {EPISODE_MODEL_PREFIX}* in {}", path.display()),
        n => bail!("{n} files named {EPISODE_MODEL_PREFIX}* in {}; pass one explicitly", path.display()),
    }
}

fn episode(c: &Common, a: EpisodeArgs) -> Result<()> {
    let input = input_path(a.input, &c.file)?;
    let model_path = a.model.or_else(|| c.file.model.clone().map(PathBuf::from)).unwrap_or_else(|| c.outdir.clone());
    let model_path = locate_episode_model(&model_path)?;
    let policy = pick(a.policy, c.file.policy.clone(), "fisher_information".into());
    let budget = pick(a.budget, c.file.budget, DEFAULT_BUDGET);
    let file = c.file.episode.clone().unwrap_or_default();
    let target_fraction = pick(a.target_fraction, file.target_fraction, 0.2);
    let prior_precision = file.prior_precision.unwrap_or(1.0);
    let newton_steps = file.newton_steps.unwrap_or(IrtAbilityTracker::<f64>::DEFAULT_NEWTON_STEPS);
    log_resolved(
        "episode",
        &json!({"model": model_path, "input": input, "policy": policy, "budget": budget, "seed": c.seed,
                "target_fraction": target_fraction, "prior_precision": prior_precision, "newton_steps": newton_steps,
                "outdir": c.outdir}),
    );
    let checkpoint = Checkpoint::<f64>::load(&model_path)?;
    let records = parse_records(&input, false)?.records;
    let environment = RecordEnvironment::new(&records)?;
    let mut pools = environment.answered();
    let mut model: Box<dyn AdaptiveModel<f64>> = match checkpoint {
        Checkpoint::Irt(items) => {
            for pool in pools.values_mut() {
                pool.retain(|&q| items.question_index(q).is_some());
            }
            Box::new(IrtAbilityTracker::with_settings(items, prior_precision, newton_steps))
        }
        other => Box::new(Frozen(other)),
    };
    pools.retain(|_, pool| !pool.is_empty());
    let students: Vec<u64> = pools.keys().copied().collect();
    let (candidates, targets) = sample_masks_fraction(&pools, target_fraction, c.seed)?;
    let state = init_episode(&students, candidates, targets, budget)?;
    let mut selector = SelectionPolicy::new(policy.parse::<PolicyKind>()?, c.seed);
    let result = run_episode(model.as_mut(), &environment, state, &mut selector, a.track_steps)?;
    ensure_dir(&c.outdir)?;
    let trace = c.outdir.join("episode_trace.jsonl");
    write_atomic(&trace, |w| result.write_trace(w))?;
    for (s, picked) in &result.selected {
        let list: Vec<String> = picked.iter().map(u64::to_string).collect();
        println!("student {s}\t{}", list.join(" "));
    }
    if let Some(steps) = &result.per_step_accuracy {
        for (i, acc) in steps.iter().enumerate() {
            println!("step {i}\t{acc}");
        }
    }
    println!("final_accuracy\t{}", result.final_accuracy);
    Ok(())
}

fn submit(c: &Common, a: SubmitArgs) -> Result<()> {
    log_resolved("submit", &json!({"task": a.task, "model": a.model, "ranking": a.ranking, "template": a.template, "outdir": c.outdir}));
    let template = File::open(&a.template).with_context(|| format!("opening {}", a.template.display()))?;
    let template = BufReader::new(template);
    let context = a.template.display().to_string();
    ensure_dir(&c.outdir)?;
    let out = c.outdir.join(format!("submission_task_{}.csv", a.task));
    let rows = match a.task {
        1 | 2 => {
            let task: PairTask = a.task.to_string().parse()?;
            let path = a.model.ok_or_else(|| anyhow!("--model is required for task {}", a.task))?;
            let model = Checkpoint::<f64>::load(&path)?;
            write_atomic(&out, |w| fill_pair_template(template, w, task, &model, &context))?
        }
        3 => {
            let path = a.ranking.ok_or_else(|| anyhow!("--ranking is required for task 3"))?;
            let ranking = QualityRanking::load(&path)?;
            write_atomic(&out, |w| fill_ranking_template(template, w, &ranking, &context))?
        }
        other => bail!("unknown task {other} (1, 2 or 3)"),
    };
    println!("submission\t{}\t{rows} rows", out.display());
    Ok(())
}

fn simulate(c: &Common, a: SimulateArgs) -> Result<()> {
    let base = c.file.synth.clone().unwrap_or_default();
    let config = SynthConfig {
        n_students: a.students.unwrap_or(base.n_students),
        n_questions: a.questions.unwrap_or(base.n_questions),
        density: a.density.unwrap_or(base.density),
        confidence_noise: a.confidence_noise.unwrap_or(base.confidence_noise),
        seed: c.seed,
        ..base
    };
    log_resolved("simulate", &json!({"synth": config, "outdir": c.outdir}));
    let truth = gen_ground_truth(&config)?;
    let data = sample_responses(&truth, &config)?;
    ensure_dir(&c.outdir)?;
    let files = write_dataset(&c.outdir, &data, &truth)?;
    let n = data.records.len();
    let correct = data.records.iter().filter(|r| r.is_correct).count();
    let cells = config.n_students * config.n_questions;
    println!("records\t{n}");
    println!("density\t{:.4}", n as f64 / cells as f64);
    println!("correct_rate\t{:.4}", if n == 0 { 0.0 } else { correct as f64 / n as f64 });
    let distinct: BTreeSet<u64> = data.records.iter().map(|r| r.question_id).collect();
    println!("questions_answered\t{}", distinct.len());
    for f in files {
        println!("wrote\t{}", f.display());
    }
    Ok(())
}

