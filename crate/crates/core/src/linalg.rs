//! Dense square matrices over a [`Scalar`] ring.

use std::fmt;

use crate::error::{usage, Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<S: Scalar> {
    side: usize,
    data: Vec<S>,
}

impl<S: Scalar> Matrix<S> {
    pub fn zeros(side: usize) -> Self {
        Matrix { side, data: vec![S::zero(); side * side] }
    }

    pub fn identity(side: usize) -> Self {
        let mut m = Self::zeros(side);
        for i in 0..side {
            m.data[i * side + i] = S::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<S>>) -> Result<Self> {
        let side = rows.len();
        let mut data = Vec::with_capacity(side * side);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != side {
                return usage(format!("row {i} has {} entries, expected {side}", row.len()));
            }
            data.extend(row);
        }
        Ok(Matrix { side, data })
    }

    pub fn from_fn(side: usize, f: impl Fn(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(side * side);
        for i in 0..side {
            for j in 0..side {
                data.push(f(i, j));
            }
        }
        Matrix { side, data }
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn get(&self, i: usize, j: usize) -> &S {
        &self.data[i * self.side + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: S) {
        self.data[i * self.side + j] = v;
    }

    pub fn entries(&self) -> &[S] {
        &self.data
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Matrix<T> {
        Matrix { side: self.side, data: self.data.iter().map(f).collect() }
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.side != other.side {
            return usage(format!("matrix sides differ: {} vs {}", self.side, other.side));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a.clone() + b.clone()).collect();
        Ok(Matrix { side: self.side, data })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a.clone() - b.clone()).collect();
        Ok(Matrix { side: self.side, data })
    }

    pub fn scale(&self, s: &S) -> Self {
        self.map(|v| v.clone() * s.clone())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let n = self.side;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for l in 0..n {
                let a = &self.data[i * n + l];
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let b = &other.data[l * n + j];
                    if !b.is_zero() {
                        let cell = &mut out.data[i * n + j];
                        *cell = cell.clone() + a.clone() * b.clone();
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.side, |i, j| self.get(j, i).clone())
    }

    pub fn trace(&self) -> S {
        (0..self.side).fold(S::zero(), |acc, i| acc + self.get(i, i).clone())
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(Scalar::magnitude).fold(0.0, f64::max)
    }

    /// Largest entrywise difference.
    pub fn max_diff(&self, other: &Self) -> Result<f64> {
        Ok(self.sub(other)?.max_abs())
    }

    /// Frobenius-type size: sum of squared magnitudes, rooted.
    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v.magnitude().powi(2)).sum::<f64>().sqrt()
    }

    /// Determinant by elimination, pivoting on the largest magnitude.
    pub fn det(&self) -> S {
        let n = self.side;
        let mut a = self.data.clone();
        let mut det = S::one();
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&x, &y| a[x * n + col].magnitude().total_cmp(&a[y * n + col].magnitude()))
                .unwrap();
            let inv = match a[pivot * n + col].recip() {
                Some(inv) => inv,
                None => return S::zero(),
            };
            if pivot != col {
                for j in 0..n {
                    a.swap(pivot * n + j, col * n + j);
                }
                det = -det;
            }
            det = det * a[col * n + col].clone();
            for row in col + 1..n {
                let factor = a[row * n + col].clone() * inv.clone();
                if factor.is_zero() {
                    continue;
                }
                for j in col..n {
                    let v = a[col * n + j].clone();
                    a[row * n + j] = a[row * n + j].clone() - factor.clone() * v;
                }
            }
        }
        det
    }

    /// Inverse by Gauss-Jordan elimination.
    pub fn inverse(&self) -> Result<Self> {
        let n = self.side;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&x, &y| a.get(x, col).magnitude().total_cmp(&a.get(y, col).magnitude()))
                .unwrap();
            let p = a.get(pivot, col).recip().ok_or_else(|| Error::Singular("matrix is not invertible".into()))?;
            if pivot != col {
                for j in 0..n {
                    a.data.swap(pivot * n + j, col * n + j);
                    inv.data.swap(pivot * n + j, col * n + j);
                }
            }
            for j in 0..n {
                a.data[col * n + j] = a.data[col * n + j].clone() * p.clone();
                inv.data[col * n + j] = inv.data[col * n + j].clone() * p.clone();
            }
            for row in 0..n {
                if row == col {
                    continue;
                }
                let factor = a.get(row, col).clone();
                if factor.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let (x, y) = (a.data[col * n + j].clone(), inv.data[col * n + j].clone());
                    a.data[row * n + j] = a.data[row * n + j].clone() - factor.clone() * x;
                    inv.data[row * n + j] = inv.data[row * n + j].clone() - factor.clone() * y;
                }
            }
        }
        Ok(inv)
    }

    /// `Σ_j coeffs[j] X^j`, stopping early when a power vanishes exactly.
    pub fn poly(&self, coeffs: &[S]) -> Result<Self> {
        let mut acc = Self::zeros(self.side);
        let mut pow = Self::identity(self.side);
        for (j, c) in coeffs.iter().enumerate() {
            if j > 0 {
                pow = pow.mul(self)?;
                if pow.data.iter().all(Scalar::is_zero) {
                    break;
                }
            }
            acc = acc.add(&pow.scale(c))?;
        }
        Ok(acc)
    }

    /// `tr(X^j)` for `j = 0..=order`, stopping early on an exactly zero power.
    pub fn power_traces(&self, order: usize) -> Result<Vec<S>> {
        let mut out = vec![S::from_i64(self.side as i64)];
        let mut pow = Self::identity(self.side);
        for _ in 1..=order {
            pow = pow.mul(self)?;
            if pow.data.iter().all(Scalar::is_zero) {
                break;
            }
            out.push(pow.trace());
        }
        Ok(out)
    }
}

impl<S: Scalar> fmt::Display for Matrix<S> {
    /// Row-major, `;` between rows and `,` between entries.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.side {
            if i > 0 {
                f.write_str("; ")?;
            }
            for j in 0..self.side {
                if j > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
        }
        Ok(())
    }
}
