use gaitlock::background::model_median;
use gaitlock::gaitcycle::{estimate_period, WidthSignal};
use gaitlock::pipeline::{analyze_sequence, PipelineConfig};
use gaitlock::segmentation::segment;
use gaitlock::synth::{benchmark, generate, proportioned_walker, Scene, WalkerSpec};
use gaitlock::threshold::Threshold;

fn scene(n_frames: usize) -> Scene {
    Scene { width: 256, height: 180, n_frames, background_level: 60, fps: 25.0 }
}

fn walker(height: usize, period: usize, noise: f64, seed: u64) -> WalkerSpec {
    WalkerSpec { noise_rate: noise, seed, ..proportioned_walker(height, period, 24.0) }
}

#[test]
fn segmented_boxes_match_ground_truth() {
    for (height, period, noise, seed) in [(90, 20, 0.0, 1), (120, 28, 0.005, 2), (70, 16, 0.01, 3), (150, 24, 0.01, 4)] {
        let seq = generate(&walker(height, period, noise, seed), &scene(4 * period)).unwrap();
        let bg = model_median(&seq.frames);
        for (t, frame) in seq.frames.frames().iter().enumerate() {
            let got = segment(frame, &bg, Threshold::Auto).unwrap().bbox().expect("walker visible");
            let want = seq.truth.bboxes[t];
            let off = [
                got.x_min.abs_diff(want.x_min),
                got.x_max.abs_diff(want.x_max),
                got.y_min.abs_diff(want.y_min),
                got.y_max.abs_diff(want.y_max),
            ];
            assert!(off.iter().all(|&d| d <= 2), "h={height} p={period} frame {t}: {got:?} vs {want:?}");
        }
    }
}

#[test]
fn segmented_period_matches_ground_truth() {
    for (k, period) in (8..=40).step_by(4).enumerate() {
        for noise in [0.0, 0.005, 0.01] {
            let seq = generate(&walker(100, period, noise, k as u64), &scene(4 * period)).unwrap();
            let bg = model_median(&seq.frames);
            let masks: Vec<_> = seq.frames.frames().iter().map(|f| segment(f, &bg, Threshold::Auto).unwrap()).collect();
            let p = estimate_period(&WidthSignal::<f64>::from_masks(&masks, 25.0)).unwrap();
            assert!(p.abs_diff(period) <= 1, "period {period} noise {noise}: estimated {p}");
        }
    }
}

#[test]
fn period_28_walker() {
    let seq = generate(&walker(110, 28, 0.005, 9), &scene(112)).unwrap();
    let a = analyze_sequence(&seq.frames, &PipelineConfig::default(), "w").unwrap();
    assert!((27..=29).contains(&a.period), "{}", a.period);
}

#[test]
fn height_difference_survives_the_pipeline() {
    let cfg = PipelineConfig::default();
    let mean_height = |h| {
        let seq = generate(&walker(h, 24, 0.005, 5), &scene(96)).unwrap();
        analyze_sequence(&seq.frames, &cfg, "w").unwrap().features.spatial[0]
    };
    let (a, b) = (mean_height(90), mean_height(120));
    assert!(b - a >= 20.0, "{a} vs {b}");
}

#[test]
fn benchmark_recipes_are_distinct_and_valid() {
    let recipes = benchmark(8, 4, 0.005, 1);
    assert_eq!(recipes.len(), 32);
    let mut seeds: Vec<u64> = recipes.iter().map(|r| r.walker.seed).collect();
    seeds.sort_unstable();
    seeds.dedup();
    assert_eq!(seeds.len(), 32);
    for r in &recipes {
        r.generate().unwrap();
    }
}
