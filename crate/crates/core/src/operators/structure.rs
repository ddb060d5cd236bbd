use super::TruncatedOperator;
use crate::error::{Error, Result};
use crate::scalar::*;
use std::ops::Range;

/// Rectangle of block indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowSpec {
    pub rows: Range<usize>,
    pub cols: Range<usize>,
}

impl WindowSpec {
    pub fn square(r: Range<usize>) -> Self {
        WindowSpec {
            rows: r.clone(),
            cols: r,
        }
    }

    /// `[0, N - margin)` in both directions.
    pub fn interior(len: usize, margin: usize) -> Self {
        Self::square(0..len.saturating_sub(margin))
    }

    fn check(&self, len: usize, shifted: bool) -> Result<()> {
        let lim = if shifted { len.saturating_sub(1) } else { len };
        if self.rows.end > lim || self.cols.end > lim {
            return Err(Error::WindowEdge(format!(
                "window rows {:?} cols {:?} reaches the truncation edge (N = {len})",
                self.rows, self.cols
            )));
        }
        Ok(())
    }
}

impl<T: Real> TruncatedOperator<T> {
    fn max_block_dev(&self, w: &WindowSpec, f: impl Fn(usize, usize) -> (usize, usize, usize, usize)) -> T {
        let n = self.n();
        let mut worst = T::zero();
        for i in w.rows.clone() {
            for j in w.cols.clone() {
                let (a, b, c, d) = f(i, j);
                for p in 0..n {
                    for q in 0..n {
                        let x = self.data()[(a * n + p, b * n + q)] - self.data()[(c * n + p, d * n + q)];
                        let m = cabs(x);
                        if m > worst {
                            worst = m;
                        }
                    }
                }
            }
        }
        worst
    }

    /// Largest block of `S^* X S - X` over the window.
    pub fn is_toeplitz_window(&self, w: &WindowSpec) -> Result<T> {
        w.check(self.len(), true)?;
        Ok(self.max_block_dev(w, |i, j| (i + 1, j + 1, i, j)))
    }

    /// Largest block of `X S - S^* X` over the window.
    pub fn is_hankel_window(&self, w: &WindowSpec) -> Result<T> {
        w.check(self.len(), true)?;
        Ok(self.max_block_dev(w, |i, j| (i, j + 1, i + 1, j)))
    }

    /// Largest entry of `self - other` inside the window.
    pub fn window_diff(&self, other: &Self, w: &WindowSpec) -> Result<T> {
        if self.n() != other.n() {
            return Err(Error::Dimension("block sizes differ".into()));
        }
        w.check(self.len().min(other.len()), false)?;
        let n = self.n();
        let mut worst = T::zero();
        for i in w.rows.start * n..w.rows.end * n {
            for j in w.cols.start * n..w.cols.end * n {
                let m = cabs(self.data()[(i, j)] - other.data()[(i, j)]);
                if m > worst {
                    worst = m;
                }
            }
        }
        Ok(worst)
    }

    /// Leading `len x len` block corner as its own operator.
    pub fn corner(&self, len: usize) -> Result<Self> {
        if len > self.len() {
            return Err(Error::Dimension("corner larger than the truncation".into()));
        }
        let d = len * self.n();
        Self::from_matrix(
            self.n(),
            len,
            self.data().view((0, 0), (d, d)).into_owned(),
            self.provenance(),
        )
    }

    /// Window entries as a dense matrix.
    pub fn window_matrix(&self, w: &WindowSpec) -> CMat<T> {
        let n = self.n();
        self.data()
            .view(
                (w.rows.start * n, w.cols.start * n),
                (w.rows.len() * n, w.cols.len() * n),
            )
            .into_owned()
    }
}
