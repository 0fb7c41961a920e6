use diagq::dataset::{split_records, ResponseMatrix, SplitFractions};
use diagq::predict::{
    accuracy, IrtConfig, IrtKind, IrtModel, IrtObjective, MajorityModel, MfConfig, MfModel, Mode, PredictionSet,
};
use diagq::synth::{gen_ground_truth, sample_responses, SynthConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn data(n_students: usize, n_questions: usize, density: f64, seed: u64) -> (diagq::synth::GroundTruth, diagq::synth::SynthData) {
    let config = SynthConfig { n_students, n_questions, density, seed, ..Default::default() };
    let truth = gen_ground_truth(&config).unwrap();
    let data = sample_responses(&truth, &config).unwrap();
    (truth, data)
}

#[test]
fn irt_gradient_matches_central_differences() {
    let (_, d) = data(30, 15, 0.7, 1);
    let matrix = ResponseMatrix::from_records(&d.records).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for kind in [IrtKind::OnePl, IrtKind::TwoPl] {
        let objective = IrtObjective::new(&matrix, kind, 1.0f64);
        for _ in 0..10 {
            let x: Vec<f64> = (0..objective.n_params()).map(|_| rng.random_range(-1.5..1.5)).collect();
            let analytic = objective.gradient(&x);
            let h = 1e-5;
            let numeric: Vec<f64> = (0..x.len())
                .map(|i| {
                    let mut up = x.clone();
                    let mut down = x.clone();
                    up[i] += h;
                    down[i] -= h;
                    (objective.loss(&up) - objective.loss(&down)) / (2.0 * h)
                })
                .collect();
            let diff: f64 = analytic.iter().zip(&numeric).map(|(a, n)| (a - n).powi(2)).sum::<f64>().sqrt();
            let norm: f64 = numeric.iter().map(|n| n * n).sum::<f64>().sqrt().max(1e-12);
            assert!(diff / norm < 1e-4, "{kind:?}: relative error {}", diff / norm);
        }
    }
}

#[test]
fn training_losses_never_increase() {
    let (_, d) = data(120, 40, 0.5, 2);
    let matrix = ResponseMatrix::from_records(&d.records).unwrap();
    let check = |losses: &[f64], what: &str| {
        for w in losses.windows(2).skip(1) {
            assert!(w[1] <= w[0] + 1e-6, "{what}: {} -> {}", w[0], w[1]);
        }
    };
    for kind in [IrtKind::OnePl, IrtKind::TwoPl] {
        let fit = IrtModel::<f64>::fit(&matrix, &IrtConfig { kind, epochs: 30, ..Default::default() }).unwrap();
        check(&fit.losses, "irt");
    }
    for mode in [Mode::Binary, Mode::Categorical] {
        let fit = MfModel::<f64>::fit(&matrix, &MfConfig { mode, epochs: 20, k: 3, ..Default::default() }).unwrap();
        check(&fit.losses, "mf");
    }
    let f32_fit = IrtModel::<f32>::fit(&matrix, &IrtConfig { epochs: 20, ..Default::default() }).unwrap();
    for w in f32_fit.losses.windows(2).skip(1) {
        assert!(w[1] <= w[0] * (1.0 + 1e-5));
    }
}

#[test]
fn majority_beats_constant_on_training_data() {
    let (_, d) = data(100, 30, 0.6, 3);
    let matrix = ResponseMatrix::from_records(&d.records).unwrap();
    let model = MajorityModel::<f64>::fit(&matrix).unwrap();
    let pairs: Vec<_> = d.records.iter().map(|r| r.pair()).collect();
    let truth: Vec<u8> = d.records.iter().map(|r| u8::from(r.is_correct)).collect();
    let labels = PredictionSet::compute(&model, &pairs, Mode::Binary).unwrap().labels();
    let own = accuracy(&labels, &truth).unwrap();
    for constant in [0u8, 1] {
        assert!(own >= accuracy(&vec![constant; truth.len()], &truth).unwrap());
    }
}

#[test]
fn bayes_oracle_is_not_beaten_by_fitted_models() {
    let (truth, d) = data(300, 80, 0.5, 4);
    let split = split_records(&d.records, &SplitFractions::new(0.8, 0.2, 0.0).unwrap(), 4).unwrap();
    let matrix = ResponseMatrix::from_records(&split.train).unwrap();
    let test = &split.public_test;
    let pairs: Vec<_> = test.iter().map(|r| r.pair()).collect();
    let actual: Vec<u8> = test.iter().map(|r| u8::from(r.is_correct)).collect();
    let bayes: Vec<u8> = test
        .iter()
        .map(|r| u8::from(truth.oracle_probability(r.user_id as usize, r.question_id as usize).unwrap() >= 0.5))
        .collect();
    let bayes_acc = accuracy(&bayes, &actual).unwrap();
    let se = (bayes_acc * (1.0 - bayes_acc) / actual.len() as f64).sqrt();
    let irt = IrtModel::<f64>::fit(&matrix, &IrtConfig::default()).unwrap().model;
    let majority = MajorityModel::<f64>::fit(&matrix).unwrap();
    for labels in [
        PredictionSet::compute(&irt, &pairs, Mode::Binary).unwrap().labels(),
        PredictionSet::compute(&majority, &pairs, Mode::Binary).unwrap().labels(),
    ] {
        assert!(accuracy(&labels, &actual).unwrap() <= bayes_acc + 2.0 * se);
    }
}
