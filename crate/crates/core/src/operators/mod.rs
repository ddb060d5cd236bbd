//! Finite truncations of block Toeplitz and Hankel operators.
//!
//! A truncation of length `N` acts on the span of `w^j e_i`, `0 <= j < N`,
//! `0 <= i < n`, ordered block by block (index `j * n + i`).

mod dump;
mod norms;
mod structure;

pub use dump::{read_csv, write_csv};
pub use norms::NormEstimate;
pub use structure::WindowSpec;

use crate::error::{Error, Result};
use crate::scalar::*;
use crate::symbols::MatrixSymbol;
use num_complex::Complex;
use std::fmt;

/// Dense products are refused above this many rows.
pub const MAX_DIM: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Toeplitz,
    Hankel,
    RankOneSum,
    Composite,
}

impl Provenance {
    pub fn tag(&self) -> &'static str {
        match self {
            Provenance::Toeplitz => "toeplitz",
            Provenance::Hankel => "hankel",
            Provenance::RankOneSum => "rank-one-sum",
            Provenance::Composite => "composite",
        }
    }

    pub fn from_tag(s: &str) -> Option<Self> {
        Some(match s {
            "toeplitz" => Provenance::Toeplitz,
            "hankel" => Provenance::Hankel,
            "rank-one-sum" => Provenance::RankOneSum,
            "composite" => Provenance::Composite,
            _ => return None,
        })
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedOperator<T: Real> {
    n: usize,
    len: usize,
    data: CMat<T>,
    provenance: Provenance,
}

fn check_size(n: usize, len: usize) -> Result<()> {
    if n == 0 || len == 0 {
        return Err(Error::Dimension("block size and truncation length must be positive".into()));
    }
    if n * len > MAX_DIM {
        return Err(Error::Dimension(format!(
            "N*n = {} exceeds the dense limit {MAX_DIM}",
            n * len
        )));
    }
    Ok(())
}

impl<T: Real> TruncatedOperator<T> {
    pub fn from_matrix(n: usize, len: usize, data: CMat<T>, provenance: Provenance) -> Result<Self> {
        check_size(n, len)?;
        if data.shape() != (n * len, n * len) {
            return Err(Error::Dimension(format!(
                "matrix shape {:?} does not match N*n = {}",
                data.shape(),
                n * len
            )));
        }
        Ok(TruncatedOperator {
            n,
            len,
            data,
            provenance,
        })
    }

    pub fn identity(n: usize, len: usize) -> Result<Self> {
        check_size(n, len)?;
        Ok(TruncatedOperator {
            n,
            len,
            data: identity(n * len),
            provenance: Provenance::Toeplitz,
        })
    }

    pub fn zero(n: usize, len: usize) -> Result<Self> {
        check_size(n, len)?;
        Ok(TruncatedOperator {
            n,
            len,
            data: zeros(n * len, n * len),
            provenance: Provenance::Composite,
        })
    }

    /// `blockdiag(A, ..., A)`, the Toeplitz operator of a constant symbol.
    pub fn constant(a: &CMat<T>, len: usize) -> Result<Self> {
        let n = a.nrows();
        check_size(n, len)?;
        let mut data = zeros(n * len, n * len);
        for b in 0..len {
            data.view_mut((b * n, b * n), (n, n)).copy_from(a);
        }
        Ok(TruncatedOperator {
            n,
            len,
            data,
            provenance: Provenance::Toeplitz,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Truncation length `N` (number of blocks).
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn dim(&self) -> usize {
        self.n * self.len
    }

    pub fn data(&self) -> &CMat<T> {
        &self.data
    }

    pub fn into_data(self) -> CMat<T> {
        self.data
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn block(&self, i: usize, j: usize) -> CMat<T> {
        let n = self.n;
        self.data.view((i * n, j * n), (n, n)).into_owned()
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.n != other.n || self.len != other.len {
            return Err(Error::Dimension(format!(
                "operators of shape (n={}, N={}) and (n={}, N={})",
                self.n, self.len, other.n, other.len
            )));
        }
        Ok(())
    }

    fn composite(&self, data: CMat<T>) -> Self {
        TruncatedOperator {
            n: self.n,
            len: self.len,
            data,
            provenance: Provenance::Composite,
        }
    }

    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(self.composite(cmatmul(&self.data, &other.data)))
    }

    pub fn adjoint(&self) -> Self {
        TruncatedOperator {
            n: self.n,
            len: self.len,
            data: self.data.adjoint(),
            provenance: self.provenance,
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(self.composite(&self.data + &other.data))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(self.composite(&self.data - &other.data))
    }

    pub fn scale(&self, c: Complex<T>) -> Self {
        let mut out = self.composite(&self.data * c);
        out.provenance = self.provenance;
        out
    }

    pub fn apply(&self, v: &CVec<T>) -> Result<CVec<T>> {
        if v.len() != self.dim() {
            return Err(Error::Dimension(format!(
                "vector of length {} applied to an operator of size {}",
                v.len(),
                self.dim()
            )));
        }
        Ok(&self.data * v)
    }

    pub fn frob_norm(&self) -> T {
        frob(&self.data)
    }

    pub fn trace_of(&self) -> Complex<T> {
        self.data.trace()
    }
}

/// Block `(i, j)` is `s^(i - j)`.
pub fn toeplitz_trunc<T: Real>(s: &MatrixSymbol<T>, len: usize) -> Result<TruncatedOperator<T>> {
    let n = s.n();
    check_size(n, len)?;
    let l = len as i64;
    let cs = s.coeffs_range(-(l - 1), l - 1);
    let mut data = zeros(n * len, n * len);
    for i in 0..len {
        for j in 0..len {
            let c = &cs[(i as i64 - j as i64 + l - 1) as usize];
            data.view_mut((i * n, j * n), (n, n)).copy_from(c);
        }
    }
    Ok(TruncatedOperator {
        n,
        len,
        data,
        provenance: Provenance::Toeplitz,
    })
}

/// Block `(i, j)` is `s^(-i - j - 1)`; only the co-analytic part enters.
pub fn hankel_trunc<T: Real>(s: &MatrixSymbol<T>, len: usize) -> Result<TruncatedOperator<T>> {
    let n = s.n();
    check_size(n, len)?;
    let l = len as i64;
    // cs[m] = s^(-(m + 1)), m = i + j
    let cs: Vec<CMat<T>> = (0..2 * l - 1).map(|m| s.coeff(-m - 1)).collect();
    let mut data = zeros(n * len, n * len);
    for i in 0..len {
        for j in 0..len {
            data.view_mut((i * n, j * n), (n, n)).copy_from(&cs[i + j]);
        }
    }
    Ok(TruncatedOperator {
        n,
        len,
        data,
        provenance: Provenance::Hankel,
    })
}

/// `sum_i u_i (x) v_i`, where `(u (x) v) f = <f, v> u`.
pub fn rank_one_sum<T: Real>(
    n: usize,
    len: usize,
    pairs: &[(CVec<T>, CVec<T>)],
) -> Result<TruncatedOperator<T>> {
    check_size(n, len)?;
    let d = n * len;
    let mut data = zeros(d, d);
    for (k, (u, v)) in pairs.iter().enumerate() {
        if u.len() != d || v.len() != d {
            return Err(Error::Dimension(format!(
                "pair {k} has lengths ({}, {}), expected {d}",
                u.len(),
                v.len()
            )));
        }
        data += u * v.adjoint();
    }
    Ok(TruncatedOperator {
        n,
        len,
        data,
        provenance: Provenance::RankOneSum,
    })
}

/// The vector `f e_i` for a scalar coefficient vector `f` (length `N`).
pub fn block_vector<T: Real>(f: &CVec<T>, i: usize, n: usize) -> CVec<T> {
    let mut v = CVec::zeros(f.len() * n);
    for (j, c) in f.iter().enumerate() {
        v[j * n + i] = *c;
    }
    v
}

#[cfg(test)]
mod tests;
