use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

/// Which matrix axis carries the head dimension.
///
/// Q/K/V-style projections stack heads along rows (output features); an
/// O-style projection stacks them along columns.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeadAxis {
    Rows,
    Cols,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeadLayout {
    pub num_heads: usize,
    pub axis: HeadAxis,
}

impl HeadLayout {
    pub fn new(num_heads: usize, axis: HeadAxis) -> Result<Self> {
        if num_heads == 0 {
            return Err(Error::Config("num_heads must be positive".into()));
        }
        Ok(HeadLayout { num_heads, axis })
    }

    pub fn rows(num_heads: usize) -> Result<Self> {
        Self::new(num_heads, HeadAxis::Rows)
    }

    pub fn cols(num_heads: usize) -> Result<Self> {
        Self::new(num_heads, HeadAxis::Cols)
    }

    /// Width of one head along the split axis.
    pub fn block_extent(&self, shape: (usize, usize)) -> Result<usize> {
        if self.num_heads == 0 {
            return Err(Error::Config("num_heads must be positive".into()));
        }
        let extent = match self.axis {
            HeadAxis::Rows => shape.0,
            HeadAxis::Cols => shape.1,
        };
        if extent % self.num_heads != 0 {
            return Err(Error::Config(format!(
                "{:?} extent {extent} is not divisible by {} heads",
                self.axis, self.num_heads
            )));
        }
        Ok(extent / self.num_heads)
    }
}

/// Contiguous per-head blocks along the layout's axis.
pub fn per_head_split(m: &DenseMatrix, layout: &HeadLayout) -> Result<Vec<DenseMatrix>> {
    let e = layout.block_extent(m.shape())?;
    (0..layout.num_heads)
        .map(|h| match layout.axis {
            HeadAxis::Rows => m.row_block(h * e..(h + 1) * e),
            HeadAxis::Cols => m.col_block(h * e..(h + 1) * e),
        })
        .collect()
}

pub fn per_head_merge(blocks: &[DenseMatrix], layout: &HeadLayout) -> Result<DenseMatrix> {
    if blocks.len() != layout.num_heads {
        return Err(Error::Config(format!(
            "expected {} head blocks, got {}",
            layout.num_heads,
            blocks.len()
        )));
    }
    let first = blocks[0].shape();
    if let Some(b) = blocks.iter().find(|b| b.shape() != first) {
        return Err(Error::Shape {
            op: "per_head_merge",
            lhs: first,
            rhs: b.shape(),
        });
    }
    match layout.axis {
        HeadAxis::Rows => DenseMatrix::vstack(blocks),
        HeadAxis::Cols => DenseMatrix::hstack(blocks),
    }
}

/// Rank-2 momentum `σ₁u₁v₁ᵀ + σ₂u₂v₂ᵀ` with two columns per head, where
/// head `h` carries `cos θ_h` of `v₁` and `sin θ_h` of `v₂`.
///
/// Each angle in `half_angles` is paired with its complement `π/2 − θ`, so
/// every head holds the same share of `v₁` and `v₂` mass. Whole-matrix
/// filtering that saturates both singular values therefore gives equal
/// per-head update norms, while per-head filtering sees a different
/// normalized spectrum in each head.
pub fn rotated_head_fixture(
    rows: usize,
    half_angles: &[f64],
    sigma: (f64, f64),
) -> Result<(DenseMatrix, HeadLayout)> {
    if rows < 2 || half_angles.is_empty() {
        return Err(Error::Config("fixture needs rows >= 2 and at least one angle".into()));
    }
    let angles: Vec<f64> = half_angles
        .iter()
        .flat_map(|a| [*a, std::f64::consts::FRAC_PI_2 - a])
        .collect();
    let layout = HeadLayout::cols(angles.len())?;
    let scale = (angles.len() as f64 / 2.0).sqrt();
    let m = DenseMatrix::from_fn(rows, 2 * angles.len(), |i, j| {
        let a = angles[j / 2];
        match (i, j % 2) {
            (0, 0) => sigma.0 * a.cos() / scale,
            (1, 1) => sigma.1 * a.sin() / scale,
            _ => 0.0,
        }
    })?;
    Ok((m, layout))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_has_the_requested_spectrum() {
        let (m, layout) = rotated_head_fixture(4, &[0.1, 0.5], (1.5, 1.0)).unwrap();
        assert_eq!(m.shape(), (4, 8));
        assert_eq!(layout.num_heads, 4);
        let s = crate::svd::svd_compact(&m, 1e-12).unwrap();
        assert!((s.sigma[0] - 1.5).abs() < 1e-12 && (s.sigma[1] - 1.0).abs() < 1e-12);
    }

    fn counting(rows: usize, cols: usize) -> DenseMatrix {
        DenseMatrix::from_fn(rows, cols, |i, j| (i * cols + j) as f64).unwrap()
    }

    #[test]
    fn split_rows_into_two_heads() {
        let m = counting(4, 2);
        let blocks = per_head_split(&m, &HeadLayout::rows(2).unwrap()).unwrap();
        assert_eq!(blocks[0].as_slice(), &[0.0, 1.0, 2.0, 3.0]);
        assert_eq!(blocks[1].as_slice(), &[4.0, 5.0, 6.0, 7.0]);
    }

    #[test]
    fn split_six_rows_into_three() {
        let blocks = per_head_split(&counting(6, 4), &HeadLayout::rows(3).unwrap()).unwrap();
        assert_eq!(blocks.len(), 3);
        assert!(blocks.iter().all(|b| b.shape() == (2, 4)));
    }

    #[test]
    fn round_trip_both_axes() {
        let m = counting(6, 4);
        for layout in [HeadLayout::rows(3).unwrap(), HeadLayout::cols(2).unwrap()] {
            let blocks = per_head_split(&m, &layout).unwrap();
            assert_eq!(per_head_merge(&blocks, &layout).unwrap(), m);
        }
    }

    #[test]
    fn divisibility_is_enforced() {
        let m = counting(6, 4);
        assert!(matches!(
            per_head_split(&m, &HeadLayout::rows(4).unwrap()),
            Err(Error::Config(_))
        ));
        assert!(HeadLayout::rows(0).is_err());
        let blocks = per_head_split(&m, &HeadLayout::rows(2).unwrap()).unwrap();
        assert!(per_head_merge(&blocks, &HeadLayout::rows(3).unwrap()).is_err());
    }
}
