use proptest::prelude::*;

use super::*;
use crate::model::{BoxRecord, SampleInfo};

const CAR: DetectionClass = DetectionClass::Car;

#[derive(Default)]
struct Fixture {
    scenes: Vec<Scene>,
    gt: EvalSet<GroundTruthBox>,
    preds: EvalSet<TrackBox>,
}

impl Fixture {
    /// One scene of `n` keyframes at 2 Hz.
    fn new(n: usize) -> Self {
        let samples = (0..n)
            .map(|i| SampleInfo {
                sample_id: format!("s{i}"),
                timestamp: i as i64 * 500_000,
                ego_translation: [0.0; 3],
            })
            .collect();
        Fixture {
            scenes: vec![Scene {
                scene_id: "scene".into(),
                samples,
                keyframe_rate: 2.0,
            }],
            ..Default::default()
        }
    }

    fn frames(&self) -> usize {
        self.scenes[0].samples.len()
    }

    /// Ground-truth track `k` drives along x at y = 10 k.
    fn position(k: usize, frame: usize) -> [f64; 3] {
        [frame as f64, 10.0 * k as f64, 0.0]
    }

    fn add_gt(&mut self, k: usize) {
        for f in 0..self.frames() {
            let base = BoxRecord::new(format!("s{f}"), CAR, Self::position(k, f), [2.0, 4.0, 1.5], 0.0);
            self.gt
                .entry(format!("s{f}"))
                .or_default()
                .push(GroundTruthBox::new(base, format!("inst{k}")));
        }
    }

    fn add_pred(&mut self, frame: usize, at: [f64; 3], id: &str, score: f64) {
        let base = BoxRecord::new(format!("s{frame}"), CAR, at, [2.0, 4.0, 1.5], 0.0);
        self.preds.entry(format!("s{frame}")).or_default().push(TrackBox {
            base,
            score,
            tracking_id: id.into(),
        });
    }

    /// Echo track `k` in every frame where `keep(frame)`, with id `id(frame)`.
    fn echo(&mut self, k: usize, keep: impl Fn(usize) -> bool, id: impl Fn(usize) -> String) {
        for f in 0..self.frames() {
            if keep(f) {
                self.add_pred(f, Self::position(k, f), &id(f), 1.0);
            }
        }
    }

    fn eval(&self) -> TrackingMetrics {
        evaluate_tracking(&self.scenes, &self.gt, &self.preds, &EvalConfig::default()).unwrap()
    }
}

fn car(m: &TrackingMetrics) -> &CategoryTracking {
    &m.per_category[&CAR]
}

#[test]
fn motar_formula_cases() {
    // errors exactly (1 - r) P
    assert_eq!(motar(0, 0, 5, 0.5, 10), Some(1.0));
    assert_eq!(motar(0, 5, 0, 1.0, 10), Some(0.5));
    assert_eq!(motar(0, 10_000, 0, 1.0, 10), Some(0.0));
    assert_eq!(motar(1, 2, 5, 0.5, 10), Some(1.0 - 3.0 / 5.0));
    assert_eq!(motar(0, 0, 0, 1.0, 0), None);
    assert_eq!(motar(0, 0, 0, 0.0, 10), None);
}

fn stats(motar: f64, motp: f64, achieved: bool) -> ThresholdStats {
    ThresholdStats {
        recall_target: 1.0,
        confidence_threshold: achieved.then_some(0.5),
        achieved,
        tp: 0,
        fp: 0,
        fn_: 0,
        ids: 0,
        frag: 0,
        motar,
        motp,
        num_gt: 1,
    }
}

#[test]
fn half_achieved_sweep() {
    let sweep: Vec<_> = (0..40)
        .map(|i| if i < 20 { stats(1.0, 0.0, true) } else { stats(0.0, 2.0, false) })
        .collect();
    let (amota, amotp, achieved) = amota_amotp(&sweep);
    assert_eq!(amota, 0.5);
    assert_eq!(amotp, 1.0);
    assert_eq!(achieved, Some(0.0));
}

#[test]
fn amota_is_plain_mean() {
    let values = [0.1, 0.7, 0.0, 0.95, 0.3];
    let sweep: Vec<_> = values.iter().map(|&v| stats(v, 1.0 - v, true)).collect();
    let (amota, amotp, _) = amota_amotp(&sweep);
    let mut oracle = 0.0;
    for v in values {
        oracle += v;
    }
    assert!((amota - oracle / 5.0).abs() < 1e-15);
    assert!((amotp - (5.0 - oracle) / 5.0).abs() < 1e-15);
}

#[test]
fn recall_targets_span() {
    let r = recall_targets(0.1, 40);
    assert_eq!(r.len(), 40);
    assert_eq!(r[0], 0.1);
    assert_eq!(r[39], 1.0);
    assert!(r.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn perfect_tracker() {
    let mut fx = Fixture::new(10);
    for k in 0..2 {
        fx.add_gt(k);
        fx.echo(k, |_| true, |_| format!("t{k}"));
    }
    let m = fx.eval();
    assert_eq!(m.amota, 1.0);
    assert_eq!(m.amotp, 0.0);
    assert_eq!((m.mota, m.faf, m.mt, m.ml, m.ids, m.frag), (1.0, 0.0, 2, 0, 0, 0));
    assert_eq!((m.tid, m.lgd), (0.0, 0.0));
    let c = car(&m);
    assert!(c.sweep.iter().all(|s| s.achieved && s.motar == 1.0 && s.ids == 0));
    // every MOTAR ties; the highest recall wins
    assert_eq!(c.best.recall_target, Some(1.0));
    assert!(m.skipped_categories.contains(&DetectionClass::Pedestrian));
    assert!(!m.per_category.contains_key(&DetectionClass::Pedestrian));
}

#[test]
fn swapped_ids_count_once_per_track() {
    let mut fx = Fixture::new(5);
    for k in 0..2 {
        fx.add_gt(k);
        fx.echo(k, |_| true, |f| format!("t{}", if f < 2 { k } else { 1 - k }));
    }
    let c = car(&fx.eval()).clone();
    let last = c.sweep.last().unwrap();
    assert_eq!(last.recall_target, 1.0);
    assert_eq!(last.ids, 2);
    assert_eq!(last.frag, 0);
}

#[test]
fn forced_switch() {
    let mut fx = Fixture::new(6);
    fx.add_gt(0);
    fx.echo(0, |_| true, |f| if f < 3 { "a".into() } else { "b".into() });
    let m = fx.eval();
    assert_eq!(m.ids, 1);
    assert_eq!(car(&m).sweep.last().unwrap().ids, 1);
}

#[test]
fn switching_back_counts_again() {
    let mut fx = Fixture::new(6);
    fx.add_gt(0);
    fx.echo(0, |_| true, |f| if f == 2 { "b".into() } else { "a".into() });
    assert_eq!(fx.eval().ids, 2);
}

#[test]
fn consistent_relabel_has_no_switches() {
    let mut a = Fixture::new(8);
    let mut b = Fixture::new(8);
    for k in 0..3 {
        a.add_gt(k);
        b.add_gt(k);
        a.echo(k, |f| f % 3 != 1, |_| format!("inst{k}"));
        b.echo(k, |f| f % 3 != 1, |_| format!("other-{}", 7 * k + 3));
    }
    let (ma, mb) = (a.eval(), b.eval());
    assert_eq!(ma.ids, 0);
    assert_eq!(ma, mb);
}

#[test]
fn late_start_tid() {
    let mut fx = Fixture::new(10);
    fx.add_gt(0);
    fx.echo(0, |f| f >= 4, |_| "a".into());
    let m = fx.eval();
    assert_eq!(m.tid, 2.0);
    assert_eq!(m.lgd, 2.0);
}

#[test]
fn never_matched_track_takes_full_duration() {
    let mut fx = Fixture::new(10);
    fx.add_gt(0);
    fx.add_gt(1);
    fx.echo(0, |_| true, |_| "a".into());
    let m = fx.eval();
    assert_eq!(m.tid, 2.25);
    assert_eq!(m.lgd, 2.25);
    assert_eq!((car(&m).best.mt, car(&m).best.ml), (1, 1));
}

#[test]
fn occlusion_gap() {
    let mut fx = Fixture::new(10);
    fx.add_gt(0);
    fx.echo(0, |f| f != 4 && f != 5, |_| "a".into());
    let m = fx.eval();
    assert_eq!(m.tid, 0.0);
    assert_eq!(m.lgd, 1.0);
    assert_eq!(m.frag, 1);
}

#[test]
fn mostly_tracked_and_lost() {
    let mut fx = Fixture::new(10);
    for k in 0..3 {
        fx.add_gt(k);
    }
    // coverage 0.9, 0.5, 0.1
    fx.echo(0, |f| f != 3, |_| "a".into());
    fx.echo(1, |f| f % 2 == 0, |_| "b".into());
    fx.echo(2, |f| f == 0, |_| "c".into());
    let m = fx.eval();
    let best = &car(&m).best;
    assert_eq!((best.mt, best.ml), (1, 1));
}

#[test]
fn clutter_lowers_amota() {
    let mut fx = Fixture::new(10);
    for k in 0..2 {
        fx.add_gt(k);
        for f in 0..10 {
            fx.add_pred(f, Fixture::position(k, f), &format!("t{k}"), 0.5);
        }
    }
    let clean = fx.eval();
    for f in (0..10).step_by(3) {
        fx.add_pred(f, [50.0, 50.0, 0.0], "clutter", 0.9);
    }
    let noisy = fx.eval();
    assert_eq!(clean.amota, 1.0);
    assert!(noisy.amota < clean.amota);
    assert_eq!(noisy.fp, 4);
    assert!((noisy.faf - 0.4).abs() < 1e-12);
}

#[test]
fn empty_submission() {
    let mut fx = Fixture::new(5);
    fx.add_gt(0);
    fx.add_gt(1);
    let m = fx.eval();
    let c = car(&m);
    assert_eq!(m.amota, 0.0);
    assert_eq!(m.amotp, 2.0);
    assert_eq!(m.amotp_achieved_only, None);
    assert!(c.sweep.iter().all(|s| !s.achieved && s.confidence_threshold.is_none()));
    assert!(!c.best.achieved);
    assert_eq!((c.best.ml, c.best.fn_, c.best.mt), (2, 10, 0));
    assert_eq!((m.tid, m.lgd), (2.0, 2.0));
}

#[test]
fn low_confidence_tail_is_cut() {
    // track 0 at score 1; track 1 and some clutter at score 0.2, with track 1
    // switching ids every frame. The best threshold drops all of it.
    let mut fx = Fixture::new(6);
    fx.add_gt(0);
    fx.add_gt(1);
    fx.echo(0, |_| true, |_| "a".into());
    for f in 0..6 {
        fx.add_pred(f, Fixture::position(1, f), &format!("b{}", f % 2), 0.2);
        fx.add_pred(f, [80.0, 0.0, 0.0], "clutter", 0.2);
    }
    let c = car(&fx.eval()).clone();
    let last = c.sweep.last().unwrap();
    assert_eq!(last.ids, 5);
    assert_eq!(c.best.recall_target.unwrap(), c.sweep[17].recall_target);
    assert!(c.best.recall_target.unwrap() <= 0.5);
    assert_eq!(c.best.ids, 0);
    assert_eq!(c.best.confidence_threshold, Some(1.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bounded_outputs(
        keep in prop::collection::vec(any::<bool>(), 24),
        scores in prop::collection::vec(0.01f64..1.0, 24),
        ids in prop::collection::vec(0u8..3, 24),
        offsets in prop::collection::vec(-2.5f64..2.5, 24),
    ) {
        let mut fx = Fixture::new(8);
        for k in 0..3 {
            fx.add_gt(k);
        }
        for i in 0..24 {
            let (k, f) = (i / 8, i % 8);
            if keep[i] {
                let mut at = Fixture::position(k, f);
                at[0] += offsets[i];
                fx.add_pred(f, at, &format!("t{}", ids[i]), scores[i]);
            }
        }
        let m = fx.eval();
        prop_assert!((0.0..=1.0).contains(&m.amota));
        prop_assert!(m.amotp >= 0.0 && m.amotp <= 2.0);
        prop_assert!(m.tid <= 3.5 && m.lgd <= 3.5);
        for s in &car(&m).sweep {
            prop_assert!((0.0..=1.0).contains(&s.motar));
            if s.achieved {
                prop_assert_eq!(s.tp + s.fn_, s.num_gt);
                prop_assert!(s.tp as f64 >= s.recall_target * s.num_gt as f64 - 1e-9);
            }
        }
    }

    #[test]
    fn perfect_tracks_ignore_scores(scores in prop::collection::vec(0.01f64..1.0, 20)) {
        let mut fx = Fixture::new(10);
        for k in 0..2 {
            fx.add_gt(k);
            for f in 0..10 {
                fx.add_pred(f, Fixture::position(k, f), &format!("t{k}"), scores[k * 10 + f]);
            }
        }
        let m = fx.eval();
        prop_assert_eq!(m.amota, 1.0);
        prop_assert_eq!((m.tid, m.lgd, m.ids), (0.0, 0.0, 0));
    }
}
