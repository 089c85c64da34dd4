mod support;

use seld_core::features::ClipFormat;
use seld_core::metrics::label_events;
use seld_core::rng::seeded;
use seld_core::synth::{
    dataset, generate_clip, generate_from_events, place_events, read_manifest, write_dataset, EventSpec, Split,
    SynthConfig, LABEL_HOP,
};
use support::dsp_oracle::{foa_mean_error, mic_lags, test_directions};

#[test]
fn generation_is_deterministic() {
    let cfg = SynthConfig::default();
    let a = generate_clip(3, 1, &cfg).unwrap();
    let b = generate_clip(3, 1, &cfg).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.clip, generate_clip(3, 2, &cfg).unwrap().clip);
}

#[test]
fn foa_intensity_points_at_sources() {
    for (az, el) in test_directions() {
        let e = foa_mean_error(az, el);
        assert!(e < 5.0, "az {az} el {el}: {e} deg");
    }
}

#[test]
fn mic_gcc_lags_match_geometry() {
    for (az, el) in test_directions() {
        for (p, (got, want)) in mic_lags(az, el).into_iter().enumerate() {
            assert!((got as f64 - want).abs() <= 1.0, "az {az} el {el} pair {p}: {got} vs {want:.2}");
        }
    }
}

#[test]
fn labels_are_consistent() {
    let cfg = SynthConfig { clip_seconds: 10.0, moving_probability: 0.5, ..SynthConfig::default() };
    for idx in 0..10 {
        let c = generate_clip(5, idx, &cfg).unwrap();
        c.labels.validate().unwrap();
        assert_eq!(c.labels.frames, 100);
        for ev in &c.events {
            let on = (ev.onset / LABEL_HOP).round() as usize;
            let off = (ev.offset() / LABEL_HOP).round() as usize;
            assert!(c.labels.is_active(on, ev.class_idx));
            assert!(c.labels.is_active(off - 1, ev.class_idx));
            if on > 0 && !c.events.iter().any(|o| o != ev && o.class_idx == ev.class_idx && o.covers_frame(on - 1)) {
                assert!(!c.labels.is_active(on - 1, ev.class_idx));
            }
        }
        for t in 0..100 {
            let active = (0..cfg.num_classes).filter(|&k| c.labels.is_active(t, k)).count();
            assert!(active <= cfg.max_overlap);
        }
    }
}

#[test]
fn formats_share_labels() {
    let foa = SynthConfig::default();
    let mic = SynthConfig { format: ClipFormat::Mic, ..foa.clone() };
    let a = generate_clip(9, 0, &foa).unwrap();
    let b = generate_clip(9, 0, &mic).unwrap();
    assert_eq!(a.events, b.events);
    assert_eq!(a.labels, b.labels);
}

#[test]
fn dataset_splits() {
    let cfg = SynthConfig { clip_seconds: 1.0, ..SynthConfig::default() };
    let ds = dataset(1, 8, [0.5, 0.25, 0.25], &cfg).unwrap();
    assert_eq!((ds.count(Split::Train), ds.count(Split::Val), ds.count(Split::Test)), (4, 2, 2));
    assert_eq!(ds, dataset(1, 8, [0.5, 0.25, 0.25], &cfg).unwrap());
    assert!(dataset(1, 8, [0.5, 0.5, 0.25], &cfg).is_err());
    let mut ids: Vec<&str> = ds.clips.iter().map(|(_, c)| c.id.as_str()).collect();
    ids.dedup();
    assert_eq!(ids.len(), 8);
}

#[test]
fn seeds_change_placement_not_inventory() {
    let cfg = SynthConfig { clip_seconds: 6.0, ..SynthConfig::default() };
    let placements: Vec<Vec<EventSpec>> = (0..10).map(|s| generate_clip(s, 0, &cfg).unwrap().events).collect();
    for i in 0..10 {
        for j in i + 1..10 {
            assert_ne!(placements[i], placements[j]);
        }
    }
    assert!(placements.iter().flatten().all(|e| e.class_idx < cfg.num_classes));
    let mut seen: Vec<usize> = placements.iter().flatten().map(|e| e.class_idx).collect();
    seen.sort_unstable();
    seen.dedup();
    assert_eq!(seen, (0..cfg.num_classes).collect::<Vec<_>>());
}

#[test]
fn infeasible_placement_is_reported() {
    let cfg = SynthConfig { num_classes: 1, clip_seconds: 1.0, events_per_second: 5.0, ..SynthConfig::default() };
    assert!(place_events(&cfg, &mut seeded(0)).is_err());
}

#[test]
fn bad_event_rejected() {
    let cfg = SynthConfig::default();
    let ev = EventSpec { class_idx: 0, onset: 3.5, duration: 1.0, azimuth: (0.0, 0.0), elevation: (0.0, 0.0), snr_db: 20.0 };
    assert!(generate_from_events("x".into(), vec![ev], &cfg, &mut seeded(0)).is_err());
}

#[test]
fn writes_wavs_labels_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = SynthConfig { clip_seconds: 1.0, ..SynthConfig::default() };
    let ds = dataset(2, 4, [0.5, 0.25, 0.25], &cfg).unwrap();
    write_dataset(&ds, dir.path()).unwrap();
    let m = read_manifest(&dir.path().join("manifest.csv")).unwrap();
    assert_eq!(m.len(), 4);
    for (entry, (split, clip)) in m.iter().zip(&ds.clips) {
        assert_eq!(entry.clip_id, clip.id);
        assert_eq!(entry.split, *split);
        let wav = seld_core::features::wav::read_wav(dir.path().join(format!("{}.wav", clip.id)), ClipFormat::Foa).unwrap();
        assert_eq!(wav.len(), clip.clip.len());
        let text = std::fs::read_to_string(dir.path().join(format!("{}.csv", clip.id))).unwrap();
        let events = seld_core::metrics::read_event_csv(text.as_bytes()).unwrap();
        assert_eq!(events.get(&clip.id).map_or(0, Vec::len), label_events(&clip.labels).len());
    }
}

#[test]
fn label_csv_roundtrip() {
    use seld_core::metrics::{labels_from_events, read_event_csv};
    let clip = generate_clip(8, 0, &SynthConfig::default()).unwrap();
    let mut buf = Vec::new();
    seld_core::metrics::write_event_csv(&mut buf, &clip.id, &label_events(&clip.labels), true).unwrap();
    let parsed = read_event_csv(&buf[..]).unwrap();
    let back = labels_from_events(&parsed[&clip.id], clip.labels.frames, clip.labels.classes).unwrap();
    assert_eq!(back.activity, clip.labels.activity);
    for (a, b) in back.doa.iter().zip(&clip.labels.doa) {
        assert!((a - b).abs() < 1e-6);
    }
}
