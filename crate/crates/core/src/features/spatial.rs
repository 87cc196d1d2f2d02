use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::segmentation::BoundingBox;

/// `[mean height, mean width, mean angle (degrees), aspect ratio]` of the bounding boxes.
///
/// Frames without a box are skipped. The angle is the per-frame angle between the x axis and the
/// box diagonal, averaged over frames; the aspect ratio is mean height over mean width.
pub fn spatial_features<T: Scalar>(boxes: &[Option<BoundingBox>]) -> Result<[T; 4]> {
    let present: Vec<BoundingBox> = boxes.iter().flatten().copied().collect();
    if present.is_empty() {
        return Err(Error::EmptyWindow);
    }
    let n = T::from_usize_lossy(present.len());
    let mut height = T::zero();
    let mut width = T::zero();
    let mut angle = T::zero();
    for b in &present {
        let h = T::from_usize_lossy(b.height());
        let w = T::from_usize_lossy(b.width());
        height = height + h;
        width = width + w;
        angle = angle + (h / w).atan().to_degrees();
    }
    let height = height / n;
    let width = width / n;
    Ok([height, width, angle / n, height / width])
}
