//! One-level orthonormal 2-D Haar transform.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Square row-major grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    side: usize,
    data: Vec<T>,
}

impl<T: Scalar> Grid<T> {
    pub fn new(side: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != side * side {
            return Err(Error::BadDimensions(format!("{} values for a {side}x{side} grid", data.len())));
        }
        Ok(Self { side, data })
    }

    pub fn from_fn(side: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(side * side);
        for y in 0..side {
            for x in 0..side {
                data.push(f(x, y));
            }
        }
        Self { side, data }
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> T {
        self.data[y * self.side + x]
    }

    pub fn energy(&self) -> T {
        self.data.iter().map(|&v| v * v).sum()
    }

    /// Mean of squared values.
    pub fn mean_energy(&self) -> T {
        self.energy() / T::from_usize_lossy(self.data.len())
    }
}

/// Approximation and detail subbands, each `side / 2` square.
///
/// `lh` holds horizontal differences (left minus right columns of each 2x2 block), `hl`
/// vertical differences (top minus bottom rows) and `hh` the diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct Subbands<T> {
    pub ll: Grid<T>,
    pub lh: Grid<T>,
    pub hl: Grid<T>,
    pub hh: Grid<T>,
}

impl<T: Scalar> Subbands<T> {
    pub fn energy(&self) -> T {
        self.ll.energy() + self.lh.energy() + self.hl.energy() + self.hh.energy()
    }
}

/// For every 2x2 block `[[a, b], [c, d]]`:
/// `LL = (a+b+c+d)/2`, `LH = (a-b+c-d)/2`, `HL = (a+b-c-d)/2`, `HH = (a-b-c+d)/2`.
pub fn haar_dwt2<T: Scalar>(image: &Grid<T>) -> Result<Subbands<T>> {
    let side = image.side;
    if side < 2 || !side.is_power_of_two() {
        return Err(Error::BadDimensions(format!("side must be a power of two >= 2, got {side}")));
    }
    let half = side / 2;
    let two = T::lit(2.0);
    let mut ll = Vec::with_capacity(half * half);
    let mut lh = Vec::with_capacity(half * half);
    let mut hl = Vec::with_capacity(half * half);
    let mut hh = Vec::with_capacity(half * half);
    for by in 0..half {
        for bx in 0..half {
            let a = image.get(2 * bx, 2 * by);
            let b = image.get(2 * bx + 1, 2 * by);
            let c = image.get(2 * bx, 2 * by + 1);
            let d = image.get(2 * bx + 1, 2 * by + 1);
            ll.push((a + b + c + d) / two);
            lh.push((a - b + c - d) / two);
            hl.push((a + b - c - d) / two);
            hh.push((a - b - c + d) / two);
        }
    }
    Ok(Subbands {
        ll: Grid { side: half, data: ll },
        lh: Grid { side: half, data: lh },
        hl: Grid { side: half, data: hl },
        hh: Grid { side: half, data: hh },
    })
}

/// Inverse of [`haar_dwt2`].
pub fn haar_idwt2<T: Scalar>(bands: &Subbands<T>) -> Result<Grid<T>> {
    let half = bands.ll.side;
    if [&bands.lh, &bands.hl, &bands.hh].iter().any(|g| g.side != half) || half == 0 {
        return Err(Error::BadDimensions("subbands differ in size".into()));
    }
    let side = 2 * half;
    let two = T::lit(2.0);
    let mut data = vec![T::zero(); side * side];
    for by in 0..half {
        for bx in 0..half {
            let i = by * half + bx;
            let (s, h, v, dg) = (bands.ll.data[i], bands.lh.data[i], bands.hl.data[i], bands.hh.data[i]);
            data[2 * by * side + 2 * bx] = (s + h + v + dg) / two;
            data[2 * by * side + 2 * bx + 1] = (s - h + v - dg) / two;
            data[(2 * by + 1) * side + 2 * bx] = (s + h - v - dg) / two;
            data[(2 * by + 1) * side + 2 * bx + 1] = (s - h - v + dg) / two;
        }
    }
    Ok(Grid { side, data })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_image_has_no_detail() {
        let g = Grid::from_fn(8, |_, _| 1.0f64);
        let b = haar_dwt2(&g).unwrap();
        assert!(b.ll.data().iter().all(|&v| v == 2.0));
        for band in [&b.lh, &b.hl, &b.hh] {
            assert!(band.data().iter().all(|&v| v == 0.0));
        }
        assert_eq!(b.ll.side(), 4);
    }

    #[test]
    fn single_corner_block() {
        let g = Grid::new(2, vec![4.0f64, 0.0, 0.0, 0.0]).unwrap();
        let b = haar_dwt2(&g).unwrap();
        assert_eq!((b.ll.data()[0], b.lh.data()[0], b.hl.data()[0], b.hh.data()[0]), (2.0, 2.0, 2.0, 2.0));
    }

    #[test]
    fn orientation_of_detail_bands() {
        // left column bright: horizontal difference only
        let g = Grid::new(2, vec![1.0f64, 0.0, 1.0, 0.0]).unwrap();
        let b = haar_dwt2(&g).unwrap();
        assert_eq!((b.lh.data()[0], b.hl.data()[0], b.hh.data()[0]), (1.0, 0.0, 0.0));
        // top row bright: vertical difference only
        let g = Grid::new(2, vec![1.0f64, 1.0, 0.0, 0.0]).unwrap();
        let b = haar_dwt2(&g).unwrap();
        assert_eq!((b.lh.data()[0], b.hl.data()[0], b.hh.data()[0]), (0.0, 1.0, 0.0));
    }

    #[test]
    fn rejects_non_dyadic_sides() {
        for side in [1usize, 3, 6, 12] {
            let g = Grid::from_fn(side, |_, _| 0.0f64);
            assert!(matches!(haar_dwt2(&g), Err(Error::BadDimensions(_))));
        }
        assert!(Grid::<f64>::new(3, vec![0.0; 8]).is_err());
    }

    #[test]
    fn inverse_reconstructs() {
        let g = Grid::from_fn(4, |x, y| (x * 3 + y * 7) as f32 * 0.25);
        let back = haar_idwt2(&haar_dwt2(&g).unwrap()).unwrap();
        assert_eq!(back, g);
    }
}
