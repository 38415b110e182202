use std::path::PathBuf;

use irs_jsce::harness::*;
use irs_jsce::scheduler::LinkSet;
use irs_jsce::semantic::{evaluate, PhaseMode};
use irs_jsce::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn scenario_file() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios/default.toml")
}

fn tiny() -> Config {
    let mut cfg = Config::default();
    let s = &mut cfg.scenario;
    s.positions.truncate(3);
    s.demand = vec![[1, 2], [1, 3]];
    s.irs_rows = 2;
    s.irs_cols = 2;
    s.slots = 2;
    s.image_side = 3;
    s.symbols = 8;
    s.train_images = 16;
    s.test_images = 8;
    let c = &mut cfg.codec;
    c.hidden = 12;
    c.attention_hidden = 5;
    c.batch_size = 8;
    c.pretrain_epochs = 2;
    c.inner_epochs = 1;
    c.irs_epochs = 1;
    c.finetune_epochs = 1;
    let d = &mut cfg.ddpg;
    d.episodes = 6;
    d.hidden = 8;
    d.batch_size = 4;
    d.capacity = 64;
    cfg.sweep.sizes = vec![0, 4];
    cfg.sweep.epochs = 2;
    cfg
}

#[test]
fn default_scenario_loads() {
    let cfg = load_scenario(scenario_file()).unwrap();
    assert_eq!(cfg.users(), 5);
    assert_eq!(cfg.scenario.kappa, 10.0);
    assert_eq!(cfg.scenario.noise_power, 0.1);
    assert_eq!(cfg.scenario.slots, 5);
    assert_eq!(cfg.scenario.positions[0], [1.13, 0.50]);
    assert_eq!(cfg, Config::default());
}

#[test]
fn omitted_fields_take_defaults() {
    let cfg = Config::parse("[scenario]\nslots = 3\n").unwrap();
    assert_eq!(cfg.scenario.slots, 3);
    assert_eq!(cfg.scenario.kappa, 10.0);
    assert_eq!(cfg.codec, CodecSection::default());
    assert_eq!(cfg.ddpg.episodes, 200);
    assert_eq!(cfg.ddpg.evaluator, EvaluatorSetting::Surrogate);
    assert_eq!(cfg.ddpg.reward, RewardSetting::Similarity);
    assert_eq!(Config::parse("").unwrap(), Config::default());
}

#[test]
fn malformed_value_names_line_and_key() {
    let text = "[scenario]\nslots = 5\nkappa = \"ten\"\n";
    let err = Config::parse(text).unwrap_err();
    assert!(matches!(err, Error::Config(_)));
    let msg = err.to_string();
    assert!(msg.contains("line 3"), "{msg}");
    assert!(msg.contains("scenario.kappa"), "{msg}");
}

#[test]
fn unknown_keys_are_listed() {
    let msg = Config::parse("[scenario]\nslot = 5\n[codec]\nwidth = 3\n").unwrap_err().to_string();
    assert!(msg.contains("scenario.slot"), "{msg}");
    assert!(msg.contains("codec.width"), "{msg}");
}

#[test]
fn constraint_violations_name_the_field() {
    for (text, field) in [
        ("[scenario]\npositions = [[0.0, 1.0]]\n", "scenario.positions"),
        ("[scenario]\nnoise_power = -1.0\n", "scenario.noise_power"),
        ("[scenario]\nslots = 0\n", "scenario.slots"),
        ("[scenario]\ndemand = [[1, 1]]\n", "scenario.demand"),
        ("[scenario]\ndemand = [[1, 9]]\n", "scenario.demand"),
        ("[scenario]\nirs_rows = 0\n", "scenario.irs_rows"),
        ("[scenario]\nusers = 4\n", "scenario.users"),
    ] {
        let msg = Config::parse(text).unwrap_err().to_string();
        assert!(msg.contains(field), "{text:?}: {msg}");
    }
}

#[test]
fn canonical_form_is_a_fixpoint() {
    for cfg in [Config::default(), tiny(), Config::parse("[codec]\nlearning_rate = 3e-4\n").unwrap()] {
        let text = cfg.canonical();
        let back = Config::parse(&text).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.canonical(), text);
        assert_eq!(back.hash(), cfg.hash());
    }
    assert_ne!(tiny().hash(), Config::default().hash());
}

#[test]
fn missing_file_is_an_io_error() {
    let err = load_scenario("/nonexistent/scenario.toml").unwrap_err();
    assert_eq!(err.kind(), "io");
}

#[test]
fn grid_is_most_square() {
    assert_eq!(grid(0), (0, 0));
    assert_eq!(grid(1), (1, 1));
    assert_eq!(grid(9), (3, 3));
    assert_eq!(grid(12), (3, 4));
    assert_eq!(grid(7), (1, 7));
    for n in 1..200 {
        let (r, c) = grid(n);
        assert_eq!(r * c, n);
        assert!(r <= c);
    }
}

#[test]
fn csv_layout_is_fixed() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("loss.csv");
    emit_csv(&[LossRow { seed: 3, epoch: 1, loss: 0.25 }], &path).unwrap();
    assert_eq!(std::fs::read_to_string(&path).unwrap(), "seed,epoch,loss\n3,1,2.50000000e-1\n");
    assert!(emit_csv::<LossRow>(&[], &path).is_err());
    assert!(emit_csv(&[LossRow { seed: 0, epoch: 0, loss: 1.0 }], dir.path().join("missing/loss.csv")).is_err());
}

#[test]
fn csv_round_trips_at_print_precision() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("baseline.csv");
    let rows: Vec<BaselineRow> = (0..5)
        .map(|i| BaselineRow {
            seed: i,
            scheme: "jsce".into(),
            transmitter: 1,
            receiver: 2 + i as usize,
            served: 3,
            similarity: 1.0 / (3.0 + i as f64),
            sinr: std::f64::consts::PI * 1e3 * (i as f64 + 1.0),
            throughput: 2.0f64.sqrt() * i as f64,
            gain: 1e-7 * (i as f64 + 0.5),
            parameters: 1234,
        })
        .collect();
    emit_csv(&rows, &path).unwrap();
    let mut rd = csv::Reader::from_path(&path).unwrap();
    assert_eq!(rd.headers().unwrap().iter().collect::<Vec<_>>(), BaselineRow::header());
    for (rec, row) in rd.records().zip(&rows) {
        let rec = rec.unwrap();
        assert_eq!(rec[1].to_string(), row.scheme);
        for (i, want) in [(5, row.similarity), (6, row.sinr), (7, row.throughput), (8, row.gain)] {
            let got: f64 = rec[i].parse().unwrap();
            assert!((got - want).abs() <= 5e-9 * want.abs(), "{got} vs {want}");
        }
    }
}

#[test]
fn fmt_float_has_nine_significant_digits() {
    assert_eq!(fmt_float(1.0), "1.00000000e0");
    assert_eq!(fmt_float(-123456789.123), "-1.23456789e8");
    assert_eq!(fmt_float(0.0), "0.00000000e0");
}

#[test]
fn baseline_rows_number_users_from_one() {
    use irs_jsce::throughput::{PairThroughput, ThroughputReport};
    let report = ThroughputReport {
        scheme: "semantic-tdma".into(),
        pairs: vec![PairThroughput {
            pair: (0, 2),
            served: 1,
            similarity: 0.5,
            sinr: 2.0,
            throughput: 0.4,
            gain: 1.5,
        }],
        min_throughput: 0.4,
        mean_throughput: 0.4,
        min_similarity: 0.5,
        mean_similarity: 0.5,
        mean_gain: 1.5,
        parameter_count: 10,
    };
    let rows = baseline_rows(7, &report);
    assert_eq!((rows[0].transmitter, rows[0].receiver, rows[0].seed), (1, 3, 7));
}

#[test]
fn workloads_are_seeded() {
    let cfg = tiny();
    let a = Workload::draw(&cfg, 4).unwrap();
    let b = Workload::draw(&cfg, 4).unwrap();
    let c = Workload::draw(&cfg, 5).unwrap();
    assert_eq!(a.channel, b.channel);
    assert_eq!(a.train, b.train);
    assert_ne!(a.channel, c.channel);
    assert_eq!(a.train.len(), 16);
    assert_eq!(a.test.len(), 8);
    let bare = Workload::draw_with(&cfg, 4, 0, 0).unwrap();
    assert_eq!(bare.channel, a.channel.without_irs());
    assert_eq!(bare.test, a.test);
}

#[test]
fn zero_episodes_give_an_empty_trace() {
    let mut cfg = tiny();
    cfg.ddpg.episodes = 0;
    let work = Workload::draw(&cfg, 0).unwrap();
    let codec = init_codec(&cfg, 0, work.channel.irs_elements()).unwrap();
    let rec = run_xddrl(&cfg, 0, &work, &codec).unwrap();
    assert!(rec.reward_trace.is_empty());
    assert_eq!(rec.config_hash, cfg.hash());
}

#[test]
fn runs_are_reproducible() {
    let cfg = tiny();
    let work = Workload::draw(&cfg, 1).unwrap();
    let (codec, trace) = pretrain(&cfg, 1, &work).unwrap();
    assert_eq!(trace.len(), 2);
    let (again, _) = pretrain(&cfg, 1, &work).unwrap();
    assert_eq!(codec, again);
    let a = run_xddrl(&cfg, 1, &work, &codec).unwrap();
    let b = run_xddrl(&cfg, 1, &work, &codec).unwrap();
    assert_eq!(a.hash(), b.hash());
    assert_eq!(a.reward_trace.len(), 6);
    assert!(a.reward_trace.iter().all(|&r| r >= 0.0));
    assert!(a.best_objective >= a.objective);
    let mut other = cfg.clone();
    other.ddpg.actor_lr *= 2.0;
    let c = run_xddrl(&other, 1, &work, &codec).unwrap();
    assert_ne!(c.hash(), a.hash());
}

#[test]
fn codec_evaluator_runs_the_inner_loop() {
    let mut cfg = tiny();
    cfg.ddpg.evaluator = EvaluatorSetting::Codec;
    cfg.ddpg.episodes = 2;
    let work = Workload::draw(&cfg, 2).unwrap();
    let codec = init_codec(&cfg, 2, work.channel.irs_elements()).unwrap();
    let a = run_xddrl(&cfg, 2, &work, &codec).unwrap();
    let b = run_xddrl(&cfg, 2, &work, &codec).unwrap();
    assert_eq!(a.hash(), b.hash());
    assert!(a.reward_trace.iter().all(|r| (0.0..=1.0).contains(r)));
}

#[test]
fn sweep_without_surface_matches_the_no_irs_pipeline() {
    let cfg = tiny();
    let rows = sweep_irs_size(&cfg, 3, &cfg.sweep.sizes).unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!((rows[1].elements, rows[1].rows, rows[1].cols), (4, 2, 2));

    let work = Workload::draw(&cfg, 3).unwrap();
    let channel = work.channel.without_irs();
    let links = LinkSet::all_pairs(3).unwrap();
    let mut codec = init_codec(&cfg, 3, 0).unwrap();
    let mut train_rng = ChaCha8Rng::seed_from_u64(3);
    train_rng.set_stream(7);
    refine(&cfg, &mut codec, &channel, &links, &work.train, 2, 0, true, &mut train_rng).unwrap();
    let mut eval_rng = ChaCha8Rng::seed_from_u64(3);
    eval_rng.set_stream(5);
    let rep = evaluate(&codec, &channel, &links, &work.test, PhaseMode::Quantized, &mut eval_rng).unwrap();
    assert_eq!(rows[0].ssim, rep.mean_ssim());
    assert_eq!(rows[0].psnr, rep.mean_psnr());

    assert_eq!(sweep_irs_size(&cfg, 3, &cfg.sweep.sizes).unwrap(), rows);
    assert_eq!(sweep_irs_size(&cfg, 3, &[4]).unwrap(), vec![rows[1].clone()]);
    assert!(sweep_irs_size(&cfg, 3, &[]).is_err());
}

#[test]
fn for_seeds_sorts_results() {
    let out = for_seeds(&[4, 1, 3], |s| Ok(s * 10)).unwrap();
    assert_eq!(out, vec![(1, 10), (3, 30), (4, 40)]);
    let err = for_seeds(&[0, 2], |s| if s == 2 { Err(Error::invalid("boom")) } else { Ok(s) }).unwrap_err();
    assert!(err.to_string().contains("seed 2"));
}

#[test]
fn schemes_train_and_compare() {
    use irs_jsce::throughput::Scheme;
    let cfg = tiny();
    let work = Workload::draw(&cfg, 0).unwrap();
    let reports = compare_schemes(&cfg, 0, &Scheme::ALL, &work).unwrap();
    assert_eq!(reports.len(), Scheme::ALL.len());
    let shared = reports.iter().find(|r| r.scheme == "jsce").unwrap();
    let independent = reports.iter().find(|r| r.scheme == "independent-codebook").unwrap();
    assert!(independent.parameter_count > shared.parameter_count);
    let again = compare_schemes(&cfg, 0, &[Scheme::Jsce], &work).unwrap();
    assert_eq!(again[0], *shared);
}

#[test]
fn built_in_surrogate_matches_the_pretrained_codec() {
    use irs_jsce::throughput::SimilaritySurrogate;
    let cfg = Config::default();
    let work = Workload::draw(&cfg, 0).unwrap();
    let (codec, _) = pretrain(&cfg, 0, &work).unwrap();
    let samples = calibration_samples(&cfg, 0, &work, &codec, 2, 16, 12).unwrap();
    let fitted = SimilaritySurrogate::fit(&samples).unwrap();
    let built_in = SimilaritySurrogate::calibrated();
    assert_eq!(fitted.knots().len(), built_in.knots().len());
    for (a, b) in fitted.knots().iter().zip(built_in.knots()) {
        assert!((a.0 - b.0).abs() <= 1e-9 * b.0 && (a.1 - b.1).abs() <= 1e-9, "{a:?} vs {b:?}");
    }
}

#[test]
fn calibration_needs_bins_and_images() {
    let cfg = tiny();
    let work = Workload::draw(&cfg, 0).unwrap();
    let codec = init_codec(&cfg, 0, work.channel.irs_elements()).unwrap();
    assert!(calibration_samples(&cfg, 0, &work, &codec, 2, 4, 0).is_err());
    assert!(calibration_samples(&cfg, 0, &work, &codec, 2, 0, 3).is_err());
    let s = calibration_samples(&cfg, 0, &work, &codec, 1, 4, 3).unwrap();
    assert_eq!(s.len(), 3);
    assert!(s.windows(2).all(|w| w[0].0 <= w[1].0));
}
