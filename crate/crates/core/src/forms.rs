//! Characteristic forms of antisymmetric matrices.
//!
//! Every kernel has two independent evaluations:
//!
//! * the Chern-root path, which brings `M` to `2×2` blocks
//!   `[[0, -x], [x, 0]]` and multiplies a scalar function of each root `x`;
//! * the series path, which writes `det^{1/2} f(M) = exp(½ tr log f(M))` and
//!   sums `Σ_j l_j tr(M^j)` from the Taylor coefficients `l_j` of `log f`.
//!
//! The Pfaffian is fixed by the Berezin definition
//! `Pf(M) = T(exp(Σ_{s<t} M_{ts} h^s ∧ h^t))`, so a block `[[0, -x], [x, 0]]`
//! has Pfaffian `+x`. In terms of the usual row expansion this is `Pf(M^T)`.


use crate::blade::{full_mask, BigradedForm, BladePair};
use crate::error::{usage, Error, Result};
use crate::linalg::Matrix;
use crate::matrix_rep::plane_isometry;
use crate::scalar::{Analytic, Complex64, Nil, Scalar};

/// Every `π` factor used when assembling densities, in one place.
pub mod normalization {
    use std::f64::consts::PI;

    /// `cosh`, `sinh(x)/x` and the Pfaffian kernels evaluate at `M/2`.
    pub const KERNEL_HALF: f64 = 0.5;
    /// `Â(R) = det^{1/2}((R/4π)/sinh(R/4π))`.
    pub const A_HAT_SCALE: f64 = 1.0 / (4.0 * PI);
    /// `ν_φ(R) = det^{-1/2}(1 - φ e^{-R/2π})`.
    pub const NU_SCALE: f64 = 1.0 / (2.0 * PI);
    /// Curvature enters the `E` and `E⊥` kernels as `R/4π - L/2`.
    pub const DENSITY_CURVATURE: f64 = 1.0 / (4.0 * PI);
    /// The heat kernel of the fixed set carries `(4πt)^{-a/2}`.
    pub const HEAT_FIXED: f64 = 4.0 * PI;
    /// Fixed-set form degree is rescaled by `2π` between the two sides.
    pub const FORM_SCALE: f64 = 2.0 * PI;
}

// ---------------------------------------------------------------------------
// Types

/// Real or ring-valued antisymmetric matrix; only the strict upper triangle is stored.
#[derive(Clone, Debug, PartialEq)]
pub struct AntisymmetricMatrix<S: Scalar> {
    side: usize,
    upper: Vec<S>,
}

impl<S: Scalar> AntisymmetricMatrix<S> {
    pub fn zeros(side: usize) -> Self {
        AntisymmetricMatrix { side, upper: vec![S::zero(); side * side.saturating_sub(1) / 2] }
    }

    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < j && j < self.side);
        i * (2 * self.side - i - 1) / 2 + (j - i - 1)
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn get(&self, i: usize, j: usize) -> S {
        use std::cmp::Ordering::*;
        match i.cmp(&j) {
            Equal => S::zero(),
            Less => self.upper[self.slot(i, j)].clone(),
            Greater => -self.upper[self.slot(j, i)].clone(),
        }
    }

    /// Set `M_{ij} = v` and `M_{ji} = -v`.
    pub fn set(&mut self, i: usize, j: usize, v: S) -> Result<()> {
        if i == j || i >= self.side || j >= self.side {
            return usage(format!("invalid antisymmetric entry ({i},{j}) for side {}", self.side));
        }
        if i < j {
            let s = self.slot(i, j);
            self.upper[s] = v;
        } else {
            let s = self.slot(j, i);
            self.upper[s] = -v;
        }
        Ok(())
    }

    /// Accept a dense matrix whose symmetric part vanishes up to `tol`
    /// (exactly when `tol == 0`).
    pub fn from_matrix(m: &Matrix<S>, tol: f64) -> Result<Self> {
        let side = m.side();
        let mut out = Self::zeros(side);
        for i in 0..side {
            if m.get(i, i).magnitude() > tol {
                return usage(format!("diagonal entry ({i},{i}) is nonzero"));
            }
            for j in i + 1..side {
                let sym = m.get(i, j).clone() + m.get(j, i).clone();
                if sym.magnitude() > tol {
                    return usage(format!("entries ({i},{j}) and ({j},{i}) are not antisymmetric"));
                }
                out.set(i, j, m.get(i, j).clone())?;
            }
        }
        Ok(out)
    }

    pub fn to_matrix(&self) -> Matrix<S> {
        Matrix::from_fn(self.side, |i, j| self.get(i, j))
    }

    pub fn scale(&self, s: &S) -> Self {
        AntisymmetricMatrix { side: self.side, upper: self.upper.iter().map(|v| v.clone() * s.clone()).collect() }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.side != other.side {
            return usage("antisymmetric matrices of different sides");
        }
        let upper = self.upper.iter().zip(&other.upper).map(|(a, b)| a.clone() + b.clone()).collect();
        Ok(AntisymmetricMatrix { side: self.side, upper })
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> AntisymmetricMatrix<T> {
        AntisymmetricMatrix { side: self.side, upper: self.upper.iter().map(f).collect() }
    }

    /// Principal submatrix on `lo..hi`.
    pub fn sub_block(&self, lo: usize, hi: usize) -> Self {
        let mut out = Self::zeros(hi - lo);
        for i in lo..hi {
            for j in i + 1..hi {
                out.set(i - lo, j - lo, self.get(i, j)).expect("in range");
            }
        }
        out
    }

    /// Block-diagonal matrix with blocks `[[0, -x_j], [x_j, 0]]`, plus a
    /// trailing zero row when `zero_row`.
    pub fn from_roots(roots: &[S], zero_row: bool) -> Self {
        let mut out = Self::zeros(2 * roots.len() + usize::from(zero_row));
        for (j, x) in roots.iter().enumerate() {
            out.set(2 * j + 1, 2 * j, x.clone()).expect("in range");
        }
        out
    }

    /// Roots `x_j = M_{2j+1, 2j}` when `M` is already in block form (the
    /// trailing zero row is reported by the flag).
    pub fn block_roots(&self) -> Option<(Vec<S>, bool)> {
        let blocks = self.side / 2;
        for i in 0..self.side {
            for j in i + 1..self.side {
                let on_block = j == i + 1 && i % 2 == 0 && i / 2 < blocks;
                if !on_block && !self.get(i, j).is_zero() {
                    return None;
                }
            }
        }
        let roots = (0..blocks).map(|j| self.get(2 * j + 1, 2 * j)).collect();
        Some((roots, self.side % 2 == 1))
    }

    /// Sum of entry magnitudes over the full matrix.
    pub fn norm(&self) -> f64 {
        2.0 * self.upper.iter().map(Scalar::magnitude).sum::<f64>()
    }
}

impl AntisymmetricMatrix<Complex64> {
    pub fn from_real(side: usize, upper_rows: &[f64]) -> Result<Self> {
        if upper_rows.len() != side * side.saturating_sub(1) / 2 {
            return usage("wrong number of upper-triangle entries");
        }
        Ok(AntisymmetricMatrix { side, upper: upper_rows.iter().map(|&v| Complex64::new(v, 0.0)).collect() })
    }

    /// Operator 2-norm of the real part (largest `|x_j|`).
    pub fn spectral_radius(&self) -> f64 {
        chern_roots(self).map(|c| c.roots.angles.iter().fold(0.0, |a: f64, &b| a.max(b))).unwrap_or(f64::INFINITY)
    }

    /// `Q M Q^T` for a real orthogonal `Q` given row-major.
    pub fn conjugate(&self, q: &[f64]) -> Result<Self> {
        let m = self.side;
        if q.len() != m * m {
            return usage("conjugating matrix has the wrong size");
        }
        let qm = Matrix::from_fn(m, |i, j| Complex64::new(q[i * m + j], 0.0));
        let prod = qm.mul(&self.to_matrix())?.mul(&qm.transpose())?;
        let mut out = Self::zeros(m);
        for i in 0..m {
            for j in i + 1..m {
                out.set(i, j, *prod.get(i, j))?;
            }
        }
        Ok(out)
    }
}

/// Angles of a block rotation `[[0, -θ_j], [θ_j, 0]]`, optionally followed
/// by a zero row and column.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockRotation {
    pub angles: Vec<f64>,
    pub has_zero_row: bool,
}

impl BlockRotation {
    pub fn side(&self) -> usize {
        2 * self.angles.len() + usize::from(self.has_zero_row)
    }

    pub fn to_matrix<S: Scalar>(&self) -> AntisymmetricMatrix<S> {
        let roots: Vec<S> = self.angles.iter().map(|&t| S::from_f64(t)).collect();
        AntisymmetricMatrix::from_roots(&roots, self.has_zero_row)
    }
}

/// Normal part `φ^N` of an isometry, one planar rotation per angle, with
/// blocks `[[cos θ, sin θ], [-sin θ, cos θ]] = exp([[0, θ], [-θ, 0]])`.
/// `reflected` appends one `-1` direction.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupElement {
    pub angles: Vec<f64>,
    pub reflected: bool,
}

impl GroupElement {
    pub fn rotation(angles: &[f64]) -> Self {
        GroupElement { angles: angles.to_vec(), reflected: false }
    }

    pub fn side(&self) -> usize {
        2 * self.angles.len() + usize::from(self.reflected)
    }

    /// The matrix of `φ^N`.
    pub fn matrix<S: Scalar>(&self) -> Matrix<S> {
        let neg: Vec<f64> = self.angles.iter().map(|t| -t).collect();
        plane_isometry(&neg, self.side(), 0, self.reflected).expect("sized to fit")
    }

    /// The block logarithm `A` with `exp(A) = φ^N` on the rotation planes.
    pub fn log_blocks<S: Scalar>(&self) -> AntisymmetricMatrix<S> {
        let roots: Vec<S> = self.angles.iter().map(|&t| S::from_f64(-t)).collect();
        AntisymmetricMatrix::from_roots(&roots, false)
    }

    /// `det^{1/2}(1 - φ^N) = ∏ 2 sin(θ_j/2)` (rotation part only); this is the
    /// branch continuous in the angles and positive on `(0, 2π)`.
    pub fn det_sqrt_one_minus(&self) -> Result<f64> {
        let v: f64 = self.angles.iter().map(|t| 2.0 * (t / 2.0).sin()).product();
        if v.abs() < 1e-300 {
            return Err(Error::Singular("det(1 - φ^N) vanishes".into()));
        }
        Ok(v)
    }
}

// ---------------------------------------------------------------------------
// Chern roots

/// Orthogonal block-diagonalization `M = Q B Q^T`.
#[derive(Clone, Debug)]
pub struct ChernDecomposition {
    pub roots: BlockRotation,
    /// Columns of `Q`, row-major `side × side`.
    pub frame: Vec<f64>,
    /// `det Q`, `±1`.
    pub orientation: i64,
    /// Largest entry of `Q B Q^T - M`.
    pub residual: f64,
}

fn real_entries(m: &AntisymmetricMatrix<Complex64>) -> Result<Vec<f64>> {
    let n = m.side();
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let v = m.get(i, j);
            if v.im != 0.0 {
                return usage("Chern roots need a real matrix");
            }
            out[i * n + j] = v.re;
        }
    }
    Ok(out)
}

/// Cyclic Jacobi eigen-decomposition of a symmetric matrix; returns
/// `(eigenvalues, eigenvectors as columns)`.
fn jacobi_symmetric(mut a: Vec<f64>, n: usize, tol: f64) -> (Vec<f64>, Vec<f64>) {
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let scale = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i * n + j].powi(2)).sum();
        if off.sqrt() <= tol * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k * n + p], a[k * n + q]);
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p * n + k], a[q * n + k]);
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[k * n + p], v[k * n + q]);
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..n).map(|i| a[i * n + i]).collect(), v)
}

fn mat_vec(m: &[f64], n: usize, x: &[f64]) -> Vec<f64> {
    (0..n).map(|i| (0..n).map(|j| m[i * n + j] * x[j]).sum()).collect()
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

fn orthogonalize(v: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for u in basis {
            let d = dot(v, u);
            for (vi, ui) in v.iter_mut().zip(u) {
                *vi -= d * ui;
            }
        }
    }
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = dot(v, v).sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

fn real_det(mut a: Vec<f64>, n: usize) -> f64 {
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n).max_by(|&x, &y| a[x * n + col].abs().total_cmp(&a[y * n + col].abs())).unwrap();
        if a[pivot * n + col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            for j in 0..n {
                a.swap(pivot * n + j, col * n + j);
            }
            det = -det;
        }
        det *= a[col * n + col];
        for row in col + 1..n {
            let f = a[row * n + col] / a[col * n + col];
            for j in col..n {
                a[row * n + j] -= f * a[col * n + j];
            }
        }
    }
    det
}

/// Chern roots of a real antisymmetric matrix by Jacobi rotations on `M^T M`.
///
/// Angles are nonnegative; the orientation of each plane is absorbed in the frame.
pub fn chern_roots(m: &AntisymmetricMatrix<Complex64>) -> Result<ChernDecomposition> {
    let n = m.side();
    let a = real_entries(m)?;
    let mut mtm = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            mtm[i * n + j] = (0..n).map(|k| a[k * n + i] * a[k * n + j]).sum();
        }
    }
    let (values, vectors) = jacobi_symmetric(mtm, n, 1e-15);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| values[y].total_cmp(&values[x]));
    let scale = a.iter().fold(0.0f64, |acc, x| acc.max(x.abs())).max(1.0);
    let mut chosen: Vec<Vec<f64>> = Vec::new();
    let mut angles = Vec::new();
    let mut kernel: Vec<Vec<f64>> = Vec::new();
    for &idx in &order {
        if chosen.len() + kernel.len() >= n {
            break;
        }
        let mut v: Vec<f64> = (0..n).map(|k| vectors[k * n + idx]).collect();
        orthogonalize(&mut v, &chosen);
        orthogonalize(&mut v, &kernel);
        if normalize(&mut v) < 0.5 {
            continue;
        }
        let mut w = mat_vec(&a, n, &v);
        orthogonalize(&mut w, &chosen);
        let theta = normalize(&mut w);
        if theta > 1e-12 * scale && chosen.len() + 2 <= n {
            angles.push(dot(&w, &mat_vec(&a, n, &v)));
            chosen.push(v);
            chosen.push(w);
        } else {
            kernel.push(v);
        }
    }
    // Complete the kernel from the standard basis if eigenvectors were lost to roundoff.
    for k in 0..n {
        if chosen.len() + kernel.len() >= n {
            break;
        }
        let mut v = vec![0.0; n];
        v[k] = 1.0;
        orthogonalize(&mut v, &chosen);
        orthogonalize(&mut v, &kernel);
        if normalize(&mut v) > 0.5 {
            kernel.push(v);
        }
    }
    for pair in kernel.chunks(2) {
        chosen.extend(pair.iter().cloned());
        if pair.len() == 2 {
            angles.push(0.0);
        }
    }
    let has_zero_row = n % 2 == 1;
    let mut frame = vec![0.0; n * n];
    for (col, u) in chosen.iter().enumerate() {
        for row in 0..n {
            frame[row * n + col] = u[row];
        }
    }
    let orientation = if real_det(frame.clone(), n) < 0.0 { -1 } else { 1 };
    let roots = BlockRotation { angles, has_zero_row };
    let block = roots.to_matrix::<Complex64>().to_matrix();
    let q = Matrix::from_fn(n, |i, j| Complex64::new(frame[i * n + j], 0.0));
    let rebuilt = q.mul(&block)?.mul(&q.transpose())?;
    let residual = rebuilt.max_diff(&m.to_matrix())?;
    if residual > 1e-8 * scale {
        return Err(Error::Numeric(format!("Chern-root reconstruction error {residual:e}")));
    }
    Ok(ChernDecomposition { roots, frame, orientation, residual })
}

// ---------------------------------------------------------------------------
// Pfaffians

/// `T(exp(Σ_{s<t} M_{ts} h^s ∧ h^t))`.
pub fn pfaffian_berezin<S: Scalar>(m: &AntisymmetricMatrix<S>) -> Result<S> {
    let side = m.side();
    if side % 2 == 1 {
        return usage(format!("Pfaffian of odd side {side}"));
    }
    if side == 0 {
        return Ok(S::one());
    }
    let mut terms = Vec::new();
    for s in 0..side {
        for t in s + 1..side {
            terms.push((BladePair::new((1 << s) | (1 << t), 0), m.get(t, s)));
        }
    }
    let omega = BigradedForm::from_terms(side, 0, terms)?;
    // the top coefficient of exp(ω) is that of ω^{m/2}/(m/2)!
    let mut pow = BigradedForm::from_terms(side, 0, [(BladePair::ONE, S::one())])?;
    for _ in 0..side / 2 {
        pow = pow.wedge(&omega)?;
    }
    let fact: i64 = (1..=(side / 2) as i64).product();
    Ok(pow.coeff(BladePair::new(full_mask(side), 0)) * S::from_ratio(1, fact))
}

/// Row expansion of `Pf(M^T)`.
pub fn pfaffian_recursive<S: Scalar>(m: &AntisymmetricMatrix<S>) -> Result<S> {
    if m.side() % 2 == 1 {
        return usage(format!("Pfaffian of odd side {}", m.side()));
    }
    fn expand<S: Scalar>(m: &AntisymmetricMatrix<S>, idx: &[usize]) -> S {
        if idx.is_empty() {
            return S::one();
        }
        let first = idx[0];
        let mut acc = S::zero();
        for (pos, &j) in idx.iter().enumerate().skip(1) {
            let entry = m.get(j, first);
            if entry.is_zero() {
                continue;
            }
            let rest: Vec<usize> = idx.iter().copied().filter(|&x| x != first && x != j).collect();
            let term = entry * expand(m, &rest);
            acc = if pos % 2 == 1 { acc + term } else { acc - term };
        }
        acc
    }
    let idx: Vec<usize> = (0..m.side()).collect();
    Ok(expand(m, &idx))
}

/// The Pfaffian, by the Berezin definition.
pub fn pfaffian<S: Scalar>(m: &AntisymmetricMatrix<S>) -> Result<S> {
    pfaffian_berezin(m)
}

/// Product of the `2×2` block roots of a matrix in odd block form (trailing zero row).
pub fn pfaffian_odd<S: Scalar>(m: &AntisymmetricMatrix<S>) -> Result<S> {
    if m.side().is_multiple_of(2) {
        return usage("odd Pfaffian needs an odd side");
    }
    let (roots, _) = m.block_roots().ok_or_else(|| Error::Usage("matrix is not in odd block form".into()))?;
    Ok(roots.into_iter().fold(S::one(), |acc, x| acc * x))
}

/// Pfaffian through Chern roots: `det Q · ∏ x_j`.
pub fn pfaffian_chern(m: &AntisymmetricMatrix<Complex64>) -> Result<Complex64> {
    if m.side() % 2 == 1 {
        return usage(format!("Pfaffian of odd side {}", m.side()));
    }
    let c = chern_roots(m)?;
    Ok(Complex64::new(c.orientation as f64 * c.roots.angles.iter().product::<f64>(), 0.0))
}

// ---------------------------------------------------------------------------
// det^{1/2} kernels

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelPath {
    ChernRoots,
    Series,
}

/// Rings whose antisymmetric matrices can be split into Chern roots.
pub trait RootRing: Analytic {
    /// Roots `x_j` and the orientation sign of the splitting frame.
    fn roots(m: &AntisymmetricMatrix<Self>) -> Result<(Vec<Self>, i64)>;
}

impl RootRing for Complex64 {
    fn roots(m: &AntisymmetricMatrix<Self>) -> Result<(Vec<Self>, i64)> {
        if let Some((r, _)) = m.block_roots() {
            return Ok((r, 1));
        }
        let c = chern_roots(m)?;
        Ok((c.roots.angles.iter().map(|&t| Complex64::new(t, 0.0)).collect(), c.orientation))
    }
}

impl RootRing for Nil {
    fn roots(m: &AntisymmetricMatrix<Self>) -> Result<(Vec<Self>, i64)> {
        match m.block_roots() {
            Some((r, _)) => Ok((r, 1)),
            None => usage("nilpotent curvature must be supplied in block form"),
        }
    }
}

/// Taylor coefficients of `log f` from those of `f` (with `f_0 = 1`).
fn series_log(f: &[f64]) -> Vec<f64> {
    let n = f.len();
    let mut l = vec![0.0; n];
    for k in 1..n {
        let mut s = f[k];
        for j in 1..k {
            s -= (j as f64) * l[j] * f[k - j] / (k as f64);
        }
        l[k] = s;
    }
    l
}

const SERIES_ORDER: usize = 240;

/// Coefficients of `cosh(s x)` (`odd = false`) or `sinh(s x)/(s x)` (`odd = true`).
fn hyperbolic_coeffs(s: f64, odd: bool) -> Vec<f64> {
    let mut out = vec![0.0; SERIES_ORDER + 1];
    let mut c = 1.0;
    out[0] = 1.0;
    for j in 1..=SERIES_ORDER / 2 {
        let (a, b) = if odd { (2 * j, 2 * j + 1) } else { (2 * j - 1, 2 * j) };
        c *= s * s / ((a * b) as f64);
        out[2 * j] = c;
    }
    out
}

/// `exp(weight · Σ_j l_j tr(M^j))`.
fn trace_log_exp<S: Analytic>(m: &AntisymmetricMatrix<S>, log_coeffs: &[f64], weight: f64) -> Result<S> {
    let mat = m.to_matrix();
    let mut pow = Matrix::identity(m.side());
    let mut acc = S::zero();
    let mut small = 0;
    let mut last = f64::INFINITY;
    for &l in log_coeffs.iter().skip(1) {
        pow = pow.mul(&mat)?;
        if pow.entries().iter().all(Scalar::is_zero) {
            return Ok((acc * S::from_f64(weight)).exp());
        }
        if l == 0.0 {
            continue;
        }
        let term = pow.trace() * S::from_f64(l);
        let mag = term.magnitude();
        if !mag.is_finite() {
            break;
        }
        acc = acc + term;
        if mag < 1e-17 * (1.0 + acc.magnitude()) {
            small += 1;
            if small >= 3 {
                return Ok((acc * S::from_f64(weight)).exp());
            }
        } else {
            small = 0;
        }
        last = mag;
    }
    Err(Error::Numeric(format!(
        "characteristic-form series did not converge (last term {last:e}); use the Chern-root path"
    )))
}

/// `det^{1/2} cosh(M/2)`.
pub fn det_sqrt_cosh<S: RootRing>(m: &AntisymmetricMatrix<S>, path: KernelPath) -> Result<S> {
    let h = normalization::KERNEL_HALF;
    match path {
        KernelPath::ChernRoots => {
            let (roots, _) = S::roots(m)?;
            Ok(roots.iter().fold(S::one(), |acc, x| acc * (x.clone() * S::from_f64(h)).cos()))
        }
        KernelPath::Series => trace_log_exp(m, &series_log(&hyperbolic_coeffs(h, false)), 0.5),
    }
}

/// `det^{1/2}(sinh(M/2)/(M/2))`.
pub fn det_sqrt_sinhc<S: RootRing>(m: &AntisymmetricMatrix<S>, path: KernelPath) -> Result<S> {
    let h = normalization::KERNEL_HALF;
    match path {
        KernelPath::ChernRoots => {
            let (roots, _) = S::roots(m)?;
            Ok(roots.iter().fold(S::one(), |acc, x| acc * (x.clone() * S::from_f64(h)).sinc()))
        }
        KernelPath::Series => trace_log_exp(m, &series_log(&hyperbolic_coeffs(h, true)), 0.5),
    }
}

/// `Â(M) = det^{1/2}((M/4π)/sinh(M/4π))`.
pub fn a_hat<S: RootRing>(m: &AntisymmetricMatrix<S>, path: KernelPath) -> Result<S> {
    let s = normalization::A_HAT_SCALE;
    match path {
        KernelPath::ChernRoots => {
            let (roots, _) = S::roots(m)?;
            let mut acc = S::one();
            for x in &roots {
                let v = (x.clone() * S::from_f64(s)).sinc();
                acc = acc * v.recip().ok_or_else(|| Error::Singular("pole of the Â kernel".into()))?;
            }
            Ok(acc)
        }
        KernelPath::Series => trace_log_exp(m, &series_log(&hyperbolic_coeffs(s, true)), -0.5),
    }
}

/// Pfaffian by the requested path.
pub fn pfaffian_by<S: RootRing>(m: &AntisymmetricMatrix<S>, path: KernelPath) -> Result<S> {
    match path {
        KernelPath::ChernRoots => {
            if m.side() % 2 == 1 {
                return usage(format!("Pfaffian of odd side {}", m.side()));
            }
            let (roots, orientation) = S::roots(m)?;
            Ok(roots.into_iter().fold(S::from_i64(orientation), |acc, x| acc * x))
        }
        KernelPath::Series => pfaffian_berezin(m),
    }
}

/// Matrix exponential by Taylor series with scaling and squaring.
pub fn matrix_exp<S: Scalar>(m: &Matrix<S>) -> Result<Matrix<S>> {
    let norm = m.frobenius();
    let mut squarings = 0;
    while norm / f64::powi(2.0, squarings) > 0.5 && squarings < 60 {
        squarings += 1;
    }
    let y = m.scale(&S::from_f64(f64::powi(2.0, -squarings)));
    let mut acc = Matrix::identity(m.side());
    let mut term = Matrix::identity(m.side());
    for j in 1..200 {
        term = term.mul(&y)?.scale(&S::from_ratio(1, j));
        if term.entries().iter().all(Scalar::is_zero) {
            break;
        }
        acc = acc.add(&term)?;
        if term.max_abs() < 1e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        acc = acc.mul(&acc)?;
    }
    Ok(acc)
}

/// `ν_φ(M) = det^{-1/2}(1 - φ^N e^{-M/2π})`.
///
/// With `g.reflected`, `M` has a trailing zero row for the reflected direction.
///
/// The Chern-root path needs `M` in block form on the planes of `φ^N`; the
/// series path factors out `det^{-1/2}(1 - φ^N)` (principal branch) and
/// expands `-½ tr log(1 - Y)` with `Y = (1-φ^N)^{-1} φ^N (e^{-M/2π} - 1)`.
pub fn nu_phi<S: RootRing>(g: &GroupElement, m: &AntisymmetricMatrix<S>, path: KernelPath) -> Result<S> {
    if m.side() != g.side() {
        return usage(format!("curvature side {} does not match φ^N side {}", m.side(), g.side()));
    }
    let s = normalization::NU_SCALE;
    match path {
        KernelPath::ChernRoots => {
            let (roots, _) = m
                .block_roots()
                .ok_or_else(|| Error::Usage("Chern-root path for ν_φ needs curvature aligned with the rotation planes".into()))?;
            // a reflected direction carries no curvature and contributes det^{-1/2}(2)
            let mut acc = if g.reflected { S::from_f64(0.5f64.sqrt()) } else { S::one() };
            for (theta, x) in g.angles.iter().zip(&roots) {
                let arg = (S::from_f64(*theta) + x.clone() * S::from_f64(s)) * S::from_f64(0.5);
                let d = arg.sin() * S::from_i64(2);
                acc = acc * d.recip().ok_or_else(|| Error::Singular("det(1 - φ^N e^{-M/2π}) vanishes".into()))?;
            }
            Ok(acc)
        }
        KernelPath::Series => {
            let side = g.side();
            let phi: Matrix<S> = g.matrix();
            let one_minus = Matrix::identity(side).sub(&phi)?;
            let det0 = one_minus.det();
            let inv_sqrt = det0
                .sqrt()
                .recip()
                .ok_or_else(|| Error::Singular("det(1 - φ^N) vanishes".into()))?;
            let e = matrix_exp(&m.to_matrix().scale(&S::from_f64(-s)))?;
            let y = one_minus.inverse()?.mul(&phi)?.mul(&e.sub(&Matrix::identity(side))?)?;
            let mut pow = Matrix::identity(side);
            let mut acc = S::zero();
            let mut small = 0;
            for j in 1..=400 {
                pow = pow.mul(&y)?;
                if pow.entries().iter().all(Scalar::is_zero) {
                    return Ok(inv_sqrt * (acc * S::from_f64(0.5)).exp());
                }
                let term = pow.trace() * S::from_ratio(1, j);
                let mag = term.magnitude();
                acc = acc + term;
                if mag < 1e-17 * (1.0 + acc.magnitude()) {
                    small += 1;
                    if small >= 3 {
                        return Ok(inv_sqrt * (acc * S::from_f64(0.5)).exp());
                    }
                } else {
                    small = 0;
                }
            }
            Err(Error::Numeric("ν_φ series did not converge; use the Chern-root path".into()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::GaussQ;
    use std::f64::consts::PI;

    fn c(v: f64) -> Complex64 {
        Complex64::new(v, 0.0)
    }

    fn close(a: Complex64, b: f64, tol: f64) -> bool {
        (a - c(b)).norm() <= tol
    }

    #[test]
    fn storage_round_trip() {
        let mut m = AntisymmetricMatrix::<GaussQ>::zeros(4);
        m.set(0, 3, GaussQ::from_i64(5)).unwrap();
        m.set(2, 1, GaussQ::from_i64(2)).unwrap();
        assert_eq!(m.get(3, 0), GaussQ::from_i64(-5));
        assert_eq!(m.get(1, 2), GaussQ::from_i64(-2));
        let back = AntisymmetricMatrix::from_matrix(&m.to_matrix(), 0.0).unwrap();
        assert_eq!(back, m);
        assert!(m.set(1, 1, GaussQ::one()).is_err());
    }

    #[test]
    fn block_pfaffian_is_positive_root() {
        let theta = 0.8;
        let m = AntisymmetricMatrix::from_roots(&[c(theta)], false).scale(&c(0.5));
        assert!(close(pfaffian(&m).unwrap(), theta / 2.0, 1e-15));
        assert!(close(pfaffian_recursive(&m).unwrap(), theta / 2.0, 1e-15));
        assert!(close(pfaffian(&AntisymmetricMatrix::<Complex64>::zeros(2)).unwrap(), 0.0, 0.0));
    }

    #[test]
    fn odd_pfaffian_cases() {
        let m = AntisymmetricMatrix::from_roots(&[c(1.0), c(0.6)], true).scale(&c(0.5));
        assert!(close(pfaffian_odd(&m).unwrap(), 0.15, 1e-15));
        assert!(close(pfaffian_odd(&AntisymmetricMatrix::<Complex64>::zeros(1)).unwrap(), 1.0, 0.0));
        let mut bad = AntisymmetricMatrix::<Complex64>::zeros(3);
        bad.set(0, 2, c(1.0)).unwrap();
        assert!(matches!(pfaffian_odd(&bad), Err(Error::Usage(_))));
        assert!(pfaffian(&AntisymmetricMatrix::<Complex64>::zeros(3)).is_err());
    }

    #[test]
    fn kernels_on_a_single_block() {
        let t = 1.1;
        let m = AntisymmetricMatrix::from_roots(&[c(t)], false);
        for path in [KernelPath::ChernRoots, KernelPath::Series] {
            assert!(close(det_sqrt_cosh(&m, path).unwrap(), (t / 2.0).cos(), 1e-13), "{path:?}");
            assert!(close(det_sqrt_sinhc(&m, path).unwrap(), (t / 2.0).sin() / (t / 2.0), 1e-13));
            let y = t / (4.0 * PI);
            assert!(close(a_hat(&m, path).unwrap(), y / y.sin(), 1e-13));
        }
    }

    #[test]
    fn nu_phi_at_zero_curvature() {
        let z = AntisymmetricMatrix::<Complex64>::zeros(2);
        for path in [KernelPath::ChernRoots, KernelPath::Series] {
            let half_turn = GroupElement::rotation(&[PI]);
            assert!(close(nu_phi(&half_turn, &z, path).unwrap(), 0.5, 1e-14));
            let quarter = GroupElement::rotation(&[PI / 2.0]);
            assert!(close(nu_phi(&quarter, &z, path).unwrap(), 1.0 / 2f64.sqrt(), 1e-14));
        }
        let id = GroupElement::rotation(&[0.0]);
        assert!(matches!(nu_phi(&id, &z, KernelPath::ChernRoots), Err(Error::Singular(_))));
        assert!(matches!(nu_phi(&id, &z, KernelPath::Series), Err(Error::Singular(_))));
    }

    #[test]
    fn chern_roots_of_conjugated_block() {
        let m = AntisymmetricMatrix::from_roots(&[c(0.9), c(0.3)], false);
        let (a, b) = (0.4f64, 1.3f64);
        // rotation in the (0,2) plane followed by one in the (1,3) plane
        let q = vec![
            a.cos(), 0.0, -a.sin(), 0.0, //
            0.0, b.cos(), 0.0, -b.sin(), //
            a.sin(), 0.0, a.cos(), 0.0, //
            0.0, b.sin(), 0.0, b.cos(),
        ];
        let conj = m.conjugate(&q).unwrap();
        let d = chern_roots(&conj).unwrap();
        let mut angles = d.roots.angles.clone();
        angles.sort_by(f64::total_cmp);
        assert!((angles[0] - 0.3).abs() < 1e-12 && (angles[1] - 0.9).abs() < 1e-12);
        assert!(d.residual < 1e-12);
        let z = chern_roots(&AntisymmetricMatrix::zeros(3)).unwrap();
        assert_eq!(z.roots.angles, vec![0.0]);
        assert!(z.roots.has_zero_row);
    }

    #[test]
    fn group_element_log_matches_matrix() {
        let g = GroupElement::rotation(&[0.7]);
        let e = matrix_exp(&g.log_blocks::<Complex64>().to_matrix()).unwrap();
        assert!(e.max_diff(&g.matrix()).unwrap() < 1e-14);
        assert!((g.matrix::<Complex64>().get(0, 1).re - 0.7f64.sin()).abs() < 1e-15);
    }
}
