use gaitlock::features::{haar_dwt2, haar_idwt2, spatial_features, wavelet_features, Grid};
use gaitlock::scalar::sample_std;
use gaitlock::segmentation::{BoundingBox, SilhouetteMask};
use proptest::prelude::*;

fn grid(side: usize) -> impl Strategy<Value = Grid<f64>> {
    proptest::collection::vec(-1000.0f64..1000.0, side * side).prop_map(move |d| Grid::new(side, d).unwrap())
}

fn blob(w: usize, h: usize, dx: usize, dy: usize, shape: &[(usize, usize)]) -> SilhouetteMask {
    let mut bits = vec![0u8; w * h];
    for &(x, y) in shape {
        bits[(y + dy) * w + x + dx] = 1;
    }
    SilhouetteMask::from_bits(w, h, bits).unwrap()
}

proptest! {
    #[test]
    fn parseval(g in grid(16)) {
        let bands = haar_dwt2(&g).unwrap();
        let (a, b) = (g.energy(), bands.energy());
        prop_assert!((a - b).abs() <= 1e-9 * a.max(1.0));
    }

    #[test]
    fn inverse_reconstructs(g in grid(8)) {
        let back = haar_idwt2(&haar_dwt2(&g).unwrap()).unwrap();
        for (x, y) in g.data().iter().zip(back.data()) {
            prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0));
        }
    }

    #[test]
    fn sample_std_matches_two_pass(values in proptest::collection::vec(-1e4f64..1e4, 2..40)) {
        let n = values.len() as f64;
        let m = values.iter().sum::<f64>() / n;
        let oracle = (values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1.0)).sqrt();
        let got = sample_std(&values).unwrap();
        prop_assert!((got - oracle).abs() <= 1e-9 * oracle.max(1.0), "{} vs {}", got, oracle);
    }

    #[test]
    fn spatial_translation_invariance(
        boxes in proptest::collection::vec((0usize..50, 0usize..50, 1usize..40, 1usize..40), 1..10),
        dx in 0usize..100,
        dy in 0usize..100,
    ) {
        let mk = |ox: usize, oy: usize| -> Vec<Option<BoundingBox>> {
            boxes.iter().map(|&(x, y, w, h)| Some(BoundingBox { x_min: x + ox, y_min: y + oy, x_max: x + ox + w - 1, y_max: y + oy + h - 1 })).collect()
        };
        let a: [f64; 4] = spatial_features(&mk(0, 0)).unwrap();
        let b: [f64; 4] = spatial_features(&mk(dx, dy)).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn wavelet_translation_invariance(
        pts in proptest::collection::vec((0usize..20, 0usize..20), 1..60),
        pts2 in proptest::collection::vec((0usize..20, 0usize..20), 1..60),
        dx in 0usize..20,
        dy in 0usize..20,
    ) {
        let a: [f64; 6] = wavelet_features(&[blob(40, 40, 0, 0, &pts), blob(40, 40, 3, 1, &pts2)]).unwrap();
        let b: [f64; 6] = wavelet_features(&[blob(40, 40, dx, dy, &pts), blob(40, 40, dx / 2, dy, &pts2)]).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn single_block_transform() {
    let bands = haar_dwt2(&Grid::new(2, vec![4.0f64, 0.0, 0.0, 0.0]).unwrap()).unwrap();
    assert_eq!((bands.ll.data()[0], bands.lh.data()[0], bands.hl.data()[0], bands.hh.data()[0]), (2.0, 2.0, 2.0, 2.0));
}

#[test]
fn rejects_non_power_of_two() {
    assert!(haar_dwt2(&Grid::new(6, vec![0.0f64; 36]).unwrap()).is_err());
}
