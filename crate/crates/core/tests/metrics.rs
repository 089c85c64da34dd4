mod support;

use seld_core::metrics::{
    angular_error, evaluate, frames_to_segments, labels_to_segments, seld_combine, SegmentEvents,
};
use seld_core::model::Predictions;
use seld_core::labels::LabelSequence;
use seld_core::SeldError;
use support::metric_oracle::{agrees, direction_grid, exhaustive_cases, oracle};

#[test]
fn table_rows_combine() {
    for (er, f, le, lr, want) in [
        (0.72, 0.377, 23.5, 0.620, 0.46),
        (0.60, 0.492, 19.0, 0.656, 0.39),
        (0.52, 0.578, 16.8, 0.698, 0.33),
        (0.66, 0.433, 20.5, 0.650, 0.42),
    ] {
        let s = seld_combine(er, f, le, lr).unwrap();
        assert!((s - want).abs() <= 0.005, "{s} vs {want}");
    }
}

#[test]
fn combine_is_monotone() {
    let base = seld_combine(0.5, 0.5, 30.0, 0.5).unwrap();
    assert!(seld_combine(0.6, 0.5, 30.0, 0.5).unwrap() > base);
    assert!(seld_combine(0.5, 0.6, 30.0, 0.5).unwrap() < base);
    assert!(seld_combine(0.5, 0.5, 40.0, 0.5).unwrap() > base);
    assert!(seld_combine(0.5, 0.5, 30.0, 0.6).unwrap() < base);
}

#[test]
fn identical_reference_and_prediction() {
    let s = vec![SegmentEvents { entries: vec![(0, [1.0, 0.0, 0.0]), (3, [0.0, 0.0, 1.0])] }];
    let r = evaluate(&s, &s).unwrap();
    assert_eq!((r.er20, r.f20, r.le_cd, r.lr_cd, r.seld), (0.0, 1.0, 0.0, 1.0, 0.0));
}

#[test]
fn pair_beyond_threshold_is_a_substitution() {
    let a = 25f64.to_radians();
    let reference = vec![SegmentEvents { entries: vec![(0, [1.0, 0.0, 0.0])] }];
    let pred = vec![SegmentEvents { entries: vec![(0, [a.cos(), a.sin(), 0.0])] }];
    let r = evaluate(&reference, &pred).unwrap();
    assert_eq!(r.counts.tp, 0);
    assert_eq!((r.counts.fp, r.counts.fn_, r.counts.substitutions), (1, 1, 1));
    assert_eq!(r.er20, 1.0);
    assert_eq!(r.lr_cd, 1.0);
    assert!((r.le_cd - 25.0).abs() < 1e-9);
}

#[test]
fn empty_reference_is_an_error() {
    let empty = vec![SegmentEvents::default()];
    let pred = vec![SegmentEvents { entries: vec![(0, [1.0, 0.0, 0.0])] }];
    assert!(matches!(evaluate(&empty, &pred), Err(SeldError::EmptyReference)));
    assert!(evaluate(&empty, &[]).is_err());
}

#[test]
fn exhaustive_oracle_agreement() {
    let cases = exhaustive_cases();
    assert!(cases.len() >= 500);
    for (r, p) in &cases {
        let o = oracle(r, p);
        match evaluate(r, p) {
            Ok(rep) => assert!(agrees(&rep, &o), "{r:?} / {p:?}"),
            Err(SeldError::EmptyReference) => assert_eq!(o.nref, 0),
            Err(e) => panic!("{e}"),
        }
    }
}

#[test]
fn multi_instance_matching_agrees_with_oracle() {
    // two instances of one class per side, every grid combination
    let grid = direction_grid();
    let mut checked = 0;
    for a in 0..5 {
        for b in 0..5 {
            for c in 0..5 {
                for d in 0..5 {
                    let r = vec![SegmentEvents { entries: vec![(0, grid[a]), (0, grid[b])] }];
                    let p = vec![SegmentEvents { entries: vec![(0, grid[c]), (0, grid[d]), (1, grid[0])] }];
                    let o = oracle(&r, &p);
                    if !o.unique {
                        continue;
                    }
                    assert!(agrees(&evaluate(&r, &p).unwrap(), &o));
                    checked += 1;
                }
            }
        }
    }
    assert!(checked > 300);
}

#[test]
fn invariants_over_cases() {
    for (r, p) in exhaustive_cases().iter().step_by(7) {
        let Ok(rep) = evaluate(r, p) else { continue };
        assert!((0.0..=1.0).contains(&rep.f20));
        assert!((0.0..=1.0).contains(&rep.lr_cd));
        assert!((0.0..=180.0).contains(&rep.le_cd));
        let want = (rep.er20 + 1.0 - rep.f20 + rep.le_cd / 180.0 + 1.0 - rep.lr_cd) / 4.0;
        assert!((rep.seld - want).abs() < 1e-15);
        if r.len() == 2 {
            // segment order does not matter
            let rr: Vec<_> = r.iter().rev().cloned().collect();
            let pr: Vec<_> = p.iter().rev().cloned().collect();
            let rev = evaluate(&rr, &pr).unwrap();
            assert_eq!(rev.counts.tp, rep.counts.tp);
            assert!((rev.seld - rep.seld).abs() < 1e-12);
        }
    }
}

#[test]
fn labels_and_predictions_segment_alike() {
    let mut l = LabelSequence::empty(25, 3);
    for t in 4..17 {
        l.set_active(t, 2, [0.0, 1.0, 0.0]);
    }
    let mut p = Predictions::zeros(25, 3);
    for t in 0..25 {
        for c in 0..3 {
            let i = t * 3 + c;
            p.activity[i] = l.activity[i];
            p.doa[3 * i..3 * i + 3].copy_from_slice(&l.doa[3 * i..3 * i + 3]);
        }
    }
    let a = labels_to_segments(&l);
    assert_eq!(a.len(), 3);
    assert_eq!(a, frames_to_segments(&p, 0.5));
    assert_eq!(a[2].len(), 0);
    assert_eq!(angular_error(a[1].entries[0].1, [0.0, 1.0, 0.0]).unwrap(), 0.0);
}
