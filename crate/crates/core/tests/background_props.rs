use std::time::{Duration, Instant};

use gaitlock::background::{model_cdm, model_histogram, model_median};
use gaitlock::imagery::{Frame, FrameSequence};
use gaitlock::synth::{generate, Scene, WalkerSpec};
use gaitlock::threshold::Threshold;
use proptest::prelude::*;

fn sequence(w: usize, h: usize, frames: Vec<Vec<u8>>) -> FrameSequence {
    FrameSequence::new(frames.into_iter().map(|p| Frame::new(w, h, p).unwrap()).collect(), 25.0).unwrap()
}

/// Per pixel, the background value in a strict majority of frames and anything else elsewhere.
fn majority_background() -> impl Strategy<Value = (usize, usize, Vec<u8>, Vec<Vec<u8>>)> {
    (1usize..6, 1usize..6, 1usize..12).prop_flat_map(|(w, h, n)| {
        let px = w * h;
        (
            Just(w),
            Just(h),
            proptest::collection::vec(any::<u8>(), px),
            proptest::collection::vec(proptest::collection::vec(any::<u8>(), px), n),
            proptest::collection::vec(proptest::sample::subsequence((0..n).collect::<Vec<_>>(), 0..=(n - 1) / 2), px),
        )
            .prop_map(move |(w, h, bg, mut frames, occluded)| {
                for (i, frames_hit) in occluded.iter().enumerate() {
                    for (t, frame) in frames.iter_mut().enumerate() {
                        if !frames_hit.contains(&t) {
                            frame[i] = bg[i];
                        }
                    }
                }
                (w, h, bg, frames)
            })
    })
}

proptest! {
    #[test]
    fn median_recovers_majority_background((w, h, bg, frames) in majority_background()) {
        let model = model_median(&sequence(w, h, frames));
        prop_assert_eq!(model.reference.pixels(), &bg[..]);
    }

    #[test]
    fn histogram_matches_median_on_constant_pixels(w in 1usize..6, h in 1usize..6, n in 1usize..10, seed in any::<u64>()) {
        let px: Vec<u8> = (0..w * h).map(|i| (seed.wrapping_mul(i as u64 + 7) >> 11) as u8).collect();
        let seq = sequence(w, h, vec![px; n]);
        prop_assert_eq!(model_histogram(&seq).reference, model_median(&seq).reference);
    }

    #[test]
    fn histogram_mode_is_the_lowest_most_frequent(values in proptest::collection::vec(any::<u8>(), 1..30)) {
        let model = model_histogram(&sequence(1, 1, values.iter().map(|&v| vec![v]).collect()));
        let count = |v: u8| values.iter().filter(|&&x| x == v).count();
        let best = (0..=255u8).max_by(|&a, &b| count(a).cmp(&count(b)).then(b.cmp(&a))).unwrap();
        prop_assert_eq!(model.reference.pixels()[0], best);
    }

    #[test]
    fn cdm_on_static_sequence_is_the_frame(px in proptest::collection::vec(any::<u8>(), 9), n in 2usize..8, t in 1u8..60) {
        let seq = sequence(3, 3, vec![px.clone(); n]);
        let model = model_cdm(&seq, Threshold::Fixed(t)).unwrap();
        prop_assert_eq!(model.reference.pixels(), &px[..]);
    }
}

#[test]
fn hand_traced_cases() {
    let col = |v: &[u8]| sequence(1, 1, v.iter().map(|&x| vec![x]).collect());
    assert_eq!(model_median(&col(&[5, 7, 200, 6, 5])).reference.pixels(), &[6]);
    assert_eq!(model_histogram(&col(&[10, 10, 200, 10, 30])).reference.pixels(), &[10]);
    assert_eq!(model_histogram(&col(&[12, 12, 40, 40, 7])).reference.pixels(), &[12]);
    assert_eq!(model_cdm(&col(&[10, 10, 10, 50, 10]), Threshold::Fixed(20)).unwrap().reference.pixels(), &[10]);
    assert_eq!(model_cdm(&col(&[10, 50]), Threshold::Fixed(20)).unwrap().reference.pixels(), &[10]);
}

#[test]
fn walker_occluding_a_minority_of_frames() {
    let walker = WalkerSpec {
        body_height: 40,
        body_width: 10,
        period_frames: 10,
        stride_px: 10.0,
        leg_swing_amplitude: 12.0,
        start_x: 15.0,
        direction: 1,
        noise_rate: 0.0,
        seed: 3,
    };
    let scene = Scene { width: 60, height: 50, n_frames: 30, background_level: 40, fps: 25.0 };
    let seq = generate(&walker, &scene).unwrap();
    let model = model_median(&seq.frames);
    assert!(model.reference.pixels().iter().all(|&v| v == 40));
}

fn fastest(mut f: impl FnMut()) -> Duration {
    (0..7)
        .map(|_| {
            let t = Instant::now();
            f();
            t.elapsed()
        })
        .min()
        .unwrap()
}

#[test]
fn histogram_is_faster_than_median_which_is_faster_than_cdm() {
    let walker = WalkerSpec {
        body_height: 120,
        body_width: 26,
        period_frames: 30,
        stride_px: 30.0,
        leg_swing_amplitude: 48.0,
        start_x: 45.0,
        direction: 1,
        noise_rate: 0.005,
        seed: 11,
    };
    let scene = Scene { width: 256, height: 160, n_frames: 120, background_level: 60, fps: 25.0 };
    let seq = generate(&walker, &scene).unwrap().frames;
    let h = fastest(|| drop(model_histogram(&seq)));
    let m = fastest(|| drop(model_median(&seq)));
    let c = fastest(|| drop(model_cdm(&seq, Threshold::Auto).unwrap()));
    println!("histogram {h:?}, median {m:?}, cdm {c:?}");
    assert!(h < m && m < c, "histogram {h:?}, median {m:?}, cdm {c:?}");
}
