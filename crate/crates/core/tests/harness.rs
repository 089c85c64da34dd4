use seld_core::autodiff::{Graph, Mode};
use seld_core::features::{ClipFormat, FeatureConfig, FeatureTensor};
use seld_core::harness::{
    augment_segment, evaluate_clips, lr_at, predict_clip, prepare_clips, sample_segment, standardize, train,
    window_starts, Checkpoint, EpochRecord, FrameErrors, PreparedClip, Standardizer, TrainConfig, TrainData,
    INFER_WINDOW,
};
use seld_core::labels::LabelSequence;
use seld_core::losses::LossConfig;
use seld_core::model::{ModelConfig, Predictions, SeldModel};
use seld_core::rng::seeded;
use seld_core::synth::{generate_clip, SynthConfig};
use seld_core::Tensor;

fn ramp_clip(frames: usize) -> PreparedClip {
    // feature value encodes the frame index so crops can be located
    let data = (0..frames * 64 * 7).map(|i| (i / (64 * 7)) as f64).collect();
    let features = FeatureTensor::new(frames, 64, ClipFormat::Foa, data, 0.02).unwrap();
    let mut labels = LabelSequence::empty(frames / 5, 2);
    for t in 0..frames / 5 {
        labels.set_active(t, t % 2, [1.0, 0.0, t as f64]);
    }
    PreparedClip { id: "ramp".into(), features, labels }
}

fn small_model_cfg() -> ModelConfig {
    ModelConfig { dropout_conv: 0.0, dropout_rnn: 0.0, dropout_fc: 0.0, ..ModelConfig::desk(4, 7) }
}

fn tiny_set(seed: u64, n: u64) -> Vec<PreparedClip> {
    let cfg = SynthConfig { clip_seconds: 2.0, events_per_second: 1.0, ..SynthConfig::default() };
    let clips: Vec<_> = (0..n).map(|i| generate_clip(seed, i, &cfg).unwrap()).collect();
    let mut set = prepare_clips(&clips.iter().collect::<Vec<_>>(), &FeatureConfig::default(), false).unwrap();
    let train = set.clone();
    standardize(&train, &mut [&mut set]).unwrap();
    set
}

#[test]
fn desk_schedule_warms_up_then_decays() {
    let cfg = TrainConfig::desk();
    assert_eq!(lr_at(0, &cfg), cfg.warmup_lr);
    assert_eq!(lr_at(cfg.warmup_epochs, &cfg), cfg.lr_init);
    assert_eq!(lr_at(250, &cfg), 1.6e-3);
}

#[test]
fn segments_are_aligned_and_uniform() {
    let clip = ramp_clip(200);
    let mut rng = seeded(4);
    let positions = (200 - 100) / 5 + 1;
    let mut hist = vec![0usize; positions];
    let draws = 10_000;
    for _ in 0..draws {
        let (f, l, off) = sample_segment(&clip, 100, &mut rng).unwrap();
        assert_eq!(off % 5, 0);
        assert_eq!(f.at(0, 0, 0), off as f64);
        assert_eq!(f.at(99, 63, 6), (off + 99) as f64);
        assert_eq!(l.frames, 20);
        assert_eq!(l.doa_at(0, (off / 5) % 2)[2], clip.labels.doa_at(off / 5, (off / 5) % 2)[2]);
        hist[off / 5] += 1;
    }
    // chi-square against uniform, 20 dof; 0.999 quantile is about 45.3
    let expected = draws as f64 / positions as f64;
    let chi2: f64 = hist.iter().map(|&o| (o as f64 - expected).powi(2) / expected).sum();
    assert!(chi2 < 45.3, "chi2 {chi2}");
}

#[test]
fn full_length_segment_has_one_position() {
    let clip = ramp_clip(100);
    let (f, l, off) = sample_segment(&clip, 100, &mut seeded(0)).unwrap();
    assert_eq!((off, f.frames, l.frames), (0, 100, 20));
    assert_eq!(f, clip.features);
    assert!(sample_segment(&clip, 105, &mut seeded(0)).is_err());
    assert!(sample_segment(&clip, 52, &mut seeded(0)).is_err());
}

#[test]
fn augmentation_masks_whole_rows_and_replays() {
    let clip = ramp_clip(100);
    let mut base = clip.features.clone();
    base.data.iter_mut().for_each(|v| *v += 1.0);
    let mut a = base.clone();
    augment_segment(&mut a, &mut seeded(9));
    let mut b = base.clone();
    augment_segment(&mut b, &mut seeded(9));
    assert_eq!(a, b);
    // every cell is either untouched or zero across all channels
    for (ca, cb) in a.data.chunks(7).zip(base.data.chunks(7)) {
        assert!(ca == cb || ca.iter().all(|&v| v == 0.0));
    }
    // zeroed cells form whole frames or whole bands
    let zero = |t: usize, f: usize| a.at(t, f, 0) == 0.0;
    for t in 0..100 {
        for f in 0..64 {
            if zero(t, f) {
                let row = (0..64).all(|g| zero(t, g));
                let col = (0..100).all(|s| zero(s, f));
                assert!(row || col, "({t},{f})");
            }
        }
    }
}

#[test]
fn standardizer_zero_mean_unit_variance() {
    let set = tiny_set(1, 3);
    let s = Standardizer::fit(&set.iter().map(|c| &c.features).collect::<Vec<_>>()).unwrap();
    for k in 0..7 {
        assert!(s.mean[k].abs() < 1e-9, "channel {k} mean {}", s.mean[k]);
        assert!((s.std[k] - 1.0).abs() < 1e-6 || s.std[k] == 1.0);
    }
    assert_eq!(Standardizer::from_records(&s.records()).unwrap(), s);
}

#[test]
fn long_clip_tiles_into_windows() {
    assert_eq!(window_starts(3000, INFER_WINDOW).len(), 30);
    assert_eq!(window_starts(250, 100), vec![0, 100, 200]);
    let mut model = SeldModel::new(small_model_cfg(), &mut seeded(2)).unwrap();
    let mut g = Graph::new();
    model.forward(&mut g, &Tensor::zeros(&[1, 100, 64, 7]), Mode::Train, &mut seeded(0)).unwrap();
    let features = FeatureTensor::new(3000, 64, ClipFormat::Foa, vec![0.1; 3000 * 64 * 7], 0.02).unwrap();
    let p = predict_clip(&model, &features, INFER_WINDOW).unwrap();
    assert_eq!((p.frames, p.classes), (600, 4));
    // partial trailing window is padded then trimmed
    let short = features.crop(0, 230);
    let q = predict_clip(&model, &short, INFER_WINDOW).unwrap();
    assert_eq!(q.frames, 46);
    assert_eq!(&q.activity[..40 * 4], &p.activity[..40 * 4]);
}

#[test]
fn frame_errors_hand_counted() {
    let mut labels = LabelSequence::empty(3, 2);
    labels.set_active(0, 0, [1.0, 0.0, 0.0]);
    labels.set_active(1, 0, [0.0, 1.0, 0.0]);
    labels.set_active(1, 1, [0.0, 0.0, 1.0]);
    let mut pred = Predictions::zeros(3, 2);
    // frame 0: class 1 instead of 0 -> one substitution
    pred.activity[1] = 0.9;
    // frame 1: only class 0 found -> one deletion; doa along y exactly
    pred.activity[2] = 0.8;
    pred.doa[2 * 3 + 1] = 0.5;
    // frame 2: spurious class 1 -> one insertion
    pred.activity[5] = 0.7;
    let e = FrameErrors::measure(&pred, &labels).unwrap();
    assert_eq!((e.substitutions, e.deletions, e.insertions, e.references), (1, 1, 1, 3));
    assert!((e.sed_error() - 1.0).abs() < 1e-12);
    // frame 0 class 0 and frame 1 class 1 have zero predicted doa (90 deg); frame 1 class 0 is exact
    assert!((e.doa_error() - 60.0).abs() < 1e-9);
}

fn run(cfg: &TrainConfig, train_set: &[PreparedClip], val: Option<&[PreparedClip]>) -> (seld_core::harness::TrainOutcome, Vec<EpochRecord>) {
    let mut seen = Vec::new();
    let data = TrainData { train: train_set, val, monitors: vec![] };
    let out = train(&small_model_cfg(), cfg, &data, &mut |r| seen.push(r.clone())).unwrap();
    (out, seen)
}

fn quick_cfg(epochs: usize) -> TrainConfig {
    TrainConfig { epochs, minibatch: 2, warmup_epochs: 1, ..TrainConfig::desk() }
}

#[test]
fn zero_learning_rate_leaves_parameters() {
    let set = tiny_set(2, 2);
    let cfg = TrainConfig { warmup_lr: 0.0, lr_init: 1e-12, warmup_epochs: 10, ..quick_cfg(2) };
    let (out, _) = run(&cfg, &set, None);
    let fresh = SeldModel::new(
        ModelConfig { input_frames: cfg.segment_frames, ..small_model_cfg() },
        &mut seeded(cfg.seed),
    )
    .unwrap();
    assert_eq!(out.final_model.params, fresh.params);
}

#[test]
fn training_is_deterministic() {
    let set = tiny_set(3, 2);
    let (a, ha) = run(&quick_cfg(3), &set, Some(&set));
    let (b, hb) = run(&quick_cfg(3), &set, Some(&set));
    assert_eq!(ha, hb);
    assert_eq!(a.final_model, b.final_model);
    let (c, _) = run(&TrainConfig { seed: 1, ..quick_cfg(3) }, &set, Some(&set));
    assert_ne!(a.final_model.params, c.final_model.params);
}

#[test]
fn best_checkpoint_follows_validation_score() {
    let set = tiny_set(4, 2);
    let (out, hist) = run(&quick_cfg(6), &set, Some(&set));
    let scores: Vec<f64> = hist.iter().map(|r| r.val_seld().unwrap()).collect();
    let best = scores.iter().enumerate().fold(0, |b, (i, s)| if *s < scores[b] { i } else { b });
    assert_eq!(out.best_epoch, Some(best));
    // the retained model reproduces the best epoch's validation summary
    let again = evaluate_clips(&out.model, &set, &quick_cfg(6).loss).unwrap();
    assert_eq!(Some(&again), hist[best].val.as_ref());
    let (plain, _) = run(&quick_cfg(2), &set, None);
    assert_eq!(plain.best_epoch, None);
    assert_eq!(plain.model, plain.final_model);
}

#[test]
fn checkpoint_roundtrip() {
    let set = tiny_set(5, 2);
    let (out, _) = run(&quick_cfg(2), &set, None);
    let ck = Checkpoint {
        model: out.final_model,
        standardizer: Standardizer::identity(7),
        format: ClipFormat::Foa,
        adam: Some(out.adam),
    };
    let dir = tempfile::tempdir().unwrap();
    ck.save(dir.path()).unwrap();
    let back = Checkpoint::load(dir.path()).unwrap();
    assert_eq!(back.format, ClipFormat::Foa);
    assert_eq!(back.model.config, ck.model.config);
    assert_eq!(back.adam.as_ref().unwrap().step, ck.adam.as_ref().unwrap().step);
    // stored as f32: one more roundtrip is exact
    for (a, b) in back.model.params.iter().zip(&ck.model.params) {
        for (x, y) in a.data().iter().zip(b.data()) {
            assert_eq!(*x, *y as f32 as f64);
        }
    }
    let dir2 = tempfile::tempdir().unwrap();
    back.save(dir2.path()).unwrap();
    assert_eq!(Checkpoint::load(dir2.path()).unwrap(), back);
    // inference still runs on the restored model
    predict_clip(&back.model, &set[0].features, INFER_WINDOW).unwrap();
}

#[test]
fn divergence_is_reported() {
    let set = tiny_set(6, 2);
    let mut bad = set.clone();
    bad[0].features.data[10] = f64::NAN;
    let data = TrainData { train: &bad, val: None, monitors: vec![] };
    let err = train(&small_model_cfg(), &quick_cfg(1), &data, &mut |_| {}).err().unwrap();
    assert!(matches!(err, seld_core::SeldError::Divergence(_)), "{err}");
}

#[test]
fn overfits_two_clips() {
    let set = tiny_set(7, 2);
    let cfg = TrainConfig { epochs: 120, loss: LossConfig::mse_only(), augment: false, ..quick_cfg(0) };
    let (out, _) = run(&cfg, &set, None);
    let s = evaluate_clips(&out.final_model, &set, &cfg.loss).unwrap();
    assert!(s.frame.sed_error() < 0.2, "sed {}", s.frame.sed_error());
    assert!(s.frame.doa_error() < 25.0, "doa {}", s.frame.doa_error());
}
