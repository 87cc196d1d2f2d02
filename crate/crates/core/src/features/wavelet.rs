use crate::error::{Error, Result};
use crate::scalar::{self, Scalar};
use crate::segmentation::SilhouetteMask;

use super::haar::{haar_dwt2, Grid};

/// Side of the square the cropped silhouette is resampled to before the transform.
pub const WAVELET_SIDE: usize = 64;

/// Crops the mask to its bounding box and resamples it to `side x side` by nearest neighbour
/// (sampling at cell centres). `None` for an empty mask.
pub fn normalized_silhouette<T: Scalar>(mask: &SilhouetteMask, side: usize) -> Option<Grid<T>> {
    let b = mask.bbox()?;
    let (bw, bh) = (b.width(), b.height());
    Some(Grid::from_fn(side, |x, y| {
        let sx = b.x_min + (2 * x + 1) * bw / (2 * side);
        let sy = b.y_min + (2 * y + 1) * bh / (2 * side);
        if mask.get(sx, sy) {
            T::one()
        } else {
            T::zero()
        }
    }))
}

/// Mean squared coefficient of the LL, LH and HL subbands of one normalized silhouette.
pub fn subband_energies<T: Scalar>(image: &Grid<T>) -> Result<[T; 3]> {
    let bands = haar_dwt2(image)?;
    Ok([bands.ll.mean_energy(), bands.lh.mean_energy(), bands.hl.mean_energy()])
}

/// `[mu_LL, sigma_LL, mu_LH, sigma_LH, mu_HL, sigma_HL]`: mean and sample standard deviation of
/// each subband energy across the frames that have a silhouette. The diagonal (HH) band is not
/// used.
pub fn wavelet_features<T: Scalar>(masks: &[SilhouetteMask]) -> Result<[T; 6]> {
    let mut series: [Vec<T>; 3] = Default::default();
    for mask in masks {
        let Some(grid) = normalized_silhouette::<T>(mask, WAVELET_SIDE) else { continue };
        for (s, e) in series.iter_mut().zip(subband_energies(&grid)?) {
            s.push(e);
        }
    }
    match series[0].len() {
        0 => return Err(Error::EmptyWindow),
        1 => return Err(Error::TooFewFrames { needed: 2, got: 1 }),
        _ => {}
    }
    let mut out = [T::zero(); 6];
    for (k, s) in series.iter().enumerate() {
        out[2 * k] = scalar::mean(s).expect("non-empty");
        out[2 * k + 1] = scalar::sample_std(s).expect("at least two values");
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn block_mask(w: usize, h: usize, x0: usize, y0: usize, rw: usize, rh: usize) -> SilhouetteMask {
        let mut bits = vec![0u8; w * h];
        for y in y0..y0 + rh {
            for x in x0..x0 + rw {
                bits[y * w + x] = 1;
            }
        }
        SilhouetteMask::from_bits(w, h, bits).unwrap()
    }

    /// A right triangle, so both detail bands see staircase edges.
    fn triangle_mask(w: usize, h: usize, x0: usize, y0: usize) -> SilhouetteMask {
        let mut bits = vec![0u8; w * h];
        for dy in 0..30 {
            for dx in 0..=dy {
                bits[(y0 + dy) * w + x0 + dx] = 1;
            }
        }
        SilhouetteMask::from_bits(w, h, bits).unwrap()
    }

    #[test]
    fn identical_frames_have_zero_spread() {
        let masks = vec![triangle_mask(50, 50, 5, 5); 4];
        let w: [f64; 6] = wavelet_features(&masks).unwrap();
        assert_eq!((w[1], w[3], w[5]), (0.0, 0.0, 0.0));
        assert!(w[2] > 0.0 && w[4] > 0.0);
    }

    #[test]
    fn full_block_has_no_detail_energy() {
        let masks = vec![block_mask(64, 64, 0, 0, 64, 64); 3];
        let w: [f64; 6] = wavelet_features(&masks).unwrap();
        assert_eq!(w[0], 4.0);
        assert_eq!(&w[1..], &[0.0; 5]);
    }

    #[test]
    fn translation_does_not_change_energies() {
        let a: [f64; 6] = wavelet_features(&[triangle_mask(80, 60, 2, 3), triangle_mask(80, 60, 10, 20)]).unwrap();
        let b: [f64; 6] = wavelet_features(&[triangle_mask(80, 60, 40, 25), triangle_mask(80, 60, 50, 1)]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn needs_two_silhouettes() {
        let empty = SilhouetteMask::empty(10, 10).unwrap();
        assert!(matches!(wavelet_features::<f64>(std::slice::from_ref(&empty)), Err(Error::EmptyWindow)));
        let one = block_mask(10, 10, 1, 1, 4, 4);
        assert!(matches!(wavelet_features::<f64>(&[one, empty]), Err(Error::TooFewFrames { .. })));
    }

    #[test]
    fn resampling_covers_the_box() {
        let m = block_mask(20, 20, 3, 4, 5, 9);
        let g = normalized_silhouette::<f64>(&m, 8).unwrap();
        assert!(g.data().iter().all(|&v| v == 1.0));
    }
}
