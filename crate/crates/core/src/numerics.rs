//! Complex-vector primitives shared by the channel, protocol and optimizer code.
//!
//! The DFT convention is forward-unnormalized, `X[n] = sum_k x[k] exp(-j 2 pi n k / N)`,
//! with the `1/N` factor carried by the inverse.

use std::f64::consts::PI;
use std::ops::{Deref, DerefMut};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Fixed-length vector of finite complex samples.
///
/// Derefs to a slice, so elements can be read and overwritten but the length
/// never changes after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexVec(Vec<C64>);

impl ComplexVec {
    pub fn new(data: Vec<C64>) -> Result<Self> {
        if let Some(index) = data.iter().position(|z| !z.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self(data))
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![C64::new(0.0, 0.0); len])
    }

    /// Unit impulse `e_index` of length `len`.
    pub fn impulse(len: usize, index: usize) -> Self {
        let mut v = Self::zeros(len);
        v.0[index] = C64::new(1.0, 0.0);
        v
    }

    pub(crate) fn from_vec_unchecked(data: Vec<C64>) -> Self {
        debug_assert!(data.iter().all(|z| z.is_finite()));
        Self(data)
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.0
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.0)
    }
}

impl Deref for ComplexVec {
    type Target = [C64];

    fn deref(&self) -> &[C64] {
        &self.0
    }
}

impl DerefMut for ComplexVec {
    fn deref_mut(&mut self) -> &mut [C64] {
        &mut self.0
    }
}

impl From<ComplexVec> for Vec<C64> {
    fn from(v: ComplexVec) -> Self {
        v.0
    }
}

/// Dense complex matrix stored column-major; columns are the natural unit
/// here (one column per IRS element or group).
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMat {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn from_columns(rows: usize, columns: &[Vec<C64>]) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * columns.len());
        for (k, col) in columns.iter().enumerate() {
            if col.len() != rows {
                return Err(Error::Dimension(format!(
                    "column {k} has length {}, expected {rows}",
                    col.len()
                )));
            }
            data.extend_from_slice(col);
        }
        if let Some(index) = data.iter().position(|z| !z.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self {
            rows,
            cols: columns.len(),
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn col(&self, k: usize) -> &[C64] {
        &self.data[k * self.rows..(k + 1) * self.rows]
    }

    pub fn col_mut(&mut self, k: usize) -> &mut [C64] {
        &mut self.data[k * self.rows..(k + 1) * self.rows]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[C64]> {
        self.data.chunks_exact(self.rows.max(1)).take(self.cols)
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.data[col * self.rows + row]
    }

    /// `self * x`.
    pub fn mul_vec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.cols, "matrix-vector dimension mismatch");
        let mut out = vec![C64::new(0.0, 0.0); self.rows];
        for (col, &xk) in self.columns().zip(x) {
            if xk == C64::new(0.0, 0.0) {
                continue;
            }
            for (o, &a) in out.iter_mut().zip(col) {
                *o += a * xk;
            }
        }
        out
    }

    /// Applies `dft` to every column.
    pub fn dft_columns(&self) -> ComplexMat {
        let mut out = ComplexMat::zeros(self.rows, self.cols);
        let tw = twiddles(self.rows);
        for k in 0..self.cols {
            dft_into(self.col(k), &tw, out.col_mut(k));
        }
        out
    }

    pub fn scale(&mut self, factor: f64) {
        self.data.iter_mut().for_each(|z| *z *= factor);
    }
}

fn twiddles(n: usize) -> Vec<C64> {
    (0..n)
        .map(|k| C64::from_polar(1.0, -2.0 * PI * k as f64 / n as f64))
        .collect()
}

fn dft_into(x: &[C64], tw: &[C64], out: &mut [C64]) {
    let n = x.len();
    for (row, o) in out.iter_mut().enumerate() {
        let mut acc = C64::new(0.0, 0.0);
        let mut idx = 0usize;
        for &xk in x {
            acc += xk * tw[idx];
            idx += row;
            if idx >= n {
                idx %= n;
            }
        }
        *o = acc;
    }
}

/// Forward DFT (multiplication by `F_N`).
pub fn dft(x: &[C64]) -> ComplexVec {
    let mut out = vec![C64::new(0.0, 0.0); x.len()];
    dft_into(x, &twiddles(x.len()), &mut out);
    ComplexVec::from_vec_unchecked(out)
}

/// Inverse DFT, `(1/N) F_N^H X`.
pub fn idft(x: &[C64]) -> ComplexVec {
    let n = x.len();
    let conj: Vec<C64> = x.iter().map(|z| z.conj()).collect();
    let mut out = vec![C64::new(0.0, 0.0); n];
    dft_into(&conj, &twiddles(n), &mut out);
    let scale = 1.0 / n as f64;
    out.iter_mut().for_each(|z| *z = z.conj() * scale);
    ComplexVec::from_vec_unchecked(out)
}

/// Full linear convolution, length `a.len() + b.len() - 1`.
pub fn linear_convolve(a: &[C64], b: &[C64]) -> ComplexVec {
    assert!(!a.is_empty() && !b.is_empty(), "convolution of an empty sequence");
    let mut out = vec![C64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        for (j, &bj) in b.iter().enumerate() {
            out[i + j] += ai * bj;
        }
    }
    ComplexVec::from_vec_unchecked(out)
}

pub fn zero_pad(x: &[C64], len: usize) -> Result<ComplexVec> {
    if len < x.len() {
        return Err(Error::InvalidPadding {
            len: x.len(),
            target: len,
        });
    }
    let mut out = x.to_vec();
    out.resize(len, C64::new(0.0, 0.0));
    Ok(ComplexVec::from_vec_unchecked(out))
}

pub fn norm_sqr(x: &[C64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum()
}

/// Hermitian inner product `a^H b`.
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Circularly-symmetric complex Gaussian sample with the given variance.
pub fn cscg<R: rand::Rng + ?Sized>(rng: &mut R, variance: f64) -> C64 {
    use rand_distr::StandardNormal;
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * (variance / 2.0).sqrt()
}
