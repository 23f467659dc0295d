//! The representation `c ⊗ ĉ` on `ΛV` by exterior and interior multiplication.
//!
//! Basis vectors of `ΛV` are subsets `S ⊆ {1..n}`, stored at position equal
//! to their bitmask. `c(e_j) = ε(e_j) - ι(e_j)` and `ĉ(e_j) = ε(e_j) + ι(e_j)`
//! map basis vectors to signed basis vectors, so a blade acts as a signed
//! permutation and `rep` never multiplies dense matrices.

use crate::blade::{full_mask, BladePair, CliffordElement};
use crate::error::{usage, Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// Default cap on `n` for dense representations (`2^10 = 1024`).
pub const DEFAULT_CAP: usize = 10;

/// Subset-as-bitmask indexing of the exterior basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExteriorBasis {
    pub n: usize,
}

impl ExteriorBasis {
    pub fn new(n: usize) -> Self {
        ExteriorBasis { n }
    }

    pub fn len(&self) -> usize {
        1 << self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn position(&self, subset: u32) -> usize {
        subset as usize
    }

    pub fn subset(&self, position: usize) -> u32 {
        position as u32
    }

    /// `(-1)^{|S|}`.
    pub fn parity(&self, position: usize) -> i64 {
        if position.count_ones().is_multiple_of(2) {
            1
        } else {
            -1
        }
    }
}

pub type OperatorMatrix<S> = Matrix<S>;

/// `c(e_j)` (or `ĉ(e_j)` when `hat`) applied to the basis vector `set`.
fn generator_action(bit: u32, hat: bool, set: u32) -> (i64, u32) {
    let below = (set & (bit - 1)).count_ones();
    let sign = if below.is_multiple_of(2) { 1 } else { -1 };
    if set & bit == 0 {
        (sign, set | bit)
    } else if hat {
        (sign, set & !bit)
    } else {
        (-sign, set & !bit)
    }
}

/// A blade pair applied to a basis vector: the rightmost generator acts first.
pub fn blade_action(pair: BladePair, set: u32) -> (i64, u32) {
    let mut sign = 1;
    let mut s = set;
    for (mask, hat) in [(pair.h, true), (pair.c, false)] {
        let mut rest = mask;
        while rest != 0 {
            let top = 31 - rest.leading_zeros();
            rest &= !(1 << top);
            let (g, t) = generator_action(1 << top, hat, s);
            sign *= g;
            s = t;
        }
    }
    (sign, s)
}

fn check_cap(n: usize, cap: usize) -> Result<()> {
    if n > cap {
        return Err(Error::Resource(format!("dense representation of n = {n} exceeds cap {cap}")));
    }
    Ok(())
}

/// Dense matrix of `x` acting on `ΛV`, with an explicit size cap.
pub fn rep_with_cap<S: Scalar>(x: &CliffordElement<S>, cap: usize) -> Result<OperatorMatrix<S>> {
    let n = x.dim();
    check_cap(n, cap)?;
    let basis = ExteriorBasis::new(n);
    let mut m: Matrix<S> = Matrix::zeros(basis.len());
    for col in 0..basis.len() {
        for (pair, coeff) in x.terms() {
            let (sign, row) = blade_action(*pair, basis.subset(col));
            let row = basis.position(row);
            let v = if sign < 0 { -coeff.clone() } else { coeff.clone() };
            let cell = m.get(row, col).clone() + v;
            m.set(row, col, cell);
        }
    }
    Ok(m)
}

pub fn rep<S: Scalar>(x: &CliffordElement<S>) -> Result<OperatorMatrix<S>> {
    rep_with_cap(x, DEFAULT_CAP)
}

/// Diagonal grading `(-1)^{|S|}`.
pub fn grading_matrix<S: Scalar>(n: usize) -> Result<OperatorMatrix<S>> {
    check_cap(n, DEFAULT_CAP)?;
    let basis = ExteriorBasis::new(n);
    let mut m = Matrix::zeros(basis.len());
    for p in 0..basis.len() {
        m.set(p, p, S::from_i64(basis.parity(p)));
    }
    Ok(m)
}

/// `Str(x) = Σ_S (-1)^{|S|} rep(x)[S][S]`.
pub fn oracle_supertrace<S: Scalar>(x: &CliffordElement<S>) -> Result<S> {
    let m = rep(x)?;
    let basis = ExteriorBasis::new(x.dim());
    Ok((0..basis.len()).fold(S::zero(), |acc, p| {
        let d = m.get(p, p).clone();
        if basis.parity(p) < 0 {
            acc - d
        } else {
            acc + d
        }
    }))
}

/// Ordinary trace of `rep(x)`.
pub fn oracle_trace<S: Scalar>(x: &CliffordElement<S>) -> Result<S> {
    Ok(rep(x)?.trace())
}

/// `τ = ε ĉ(e_1)..ĉ(e_k)` as a matrix.
pub fn tau_matrix<S: Scalar>(n: usize, k: usize) -> Result<OperatorMatrix<S>> {
    let chat = crate::blade::chat_e::<S>(n, k)?;
    grading_matrix(n)?.mul(&rep(&chat)?)
}

/// The isometry `g` of `V` built from plane rotations: on the plane
/// `(p, q) = (offset+2j-1, offset+2j)`, `g e_p = cos θ_j e_p + sin θ_j e_q`.
/// With `reflect_last`, additionally `g e_n = -e_n`.
pub fn plane_isometry<S: Scalar>(angles: &[f64], n: usize, offset: usize, reflect_last: bool) -> Result<Matrix<S>> {
    let used = offset + 2 * angles.len() + usize::from(reflect_last);
    if used > n {
        return usage(format!("{} planes after offset {offset} do not fit in dimension {n}", angles.len()));
    }
    let mut g = Matrix::identity(n);
    for (j, &theta) in angles.iter().enumerate() {
        let p = offset + 2 * j;
        let (c, s) = (theta.cos(), theta.sin());
        g.set(p, p, S::from_f64(c));
        g.set(p + 1, p, S::from_f64(s));
        g.set(p, p + 1, S::from_f64(-s));
        g.set(p + 1, p + 1, S::from_f64(c));
    }
    if reflect_last {
        g.set(n - 1, n - 1, -S::one());
    }
    Ok(g)
}

/// Functorial exterior power: `e^{s_1} ∧ .. ∧ e^{s_p} ↦ g e^{s_1} ∧ .. ∧ g e^{s_p}`.
pub fn exterior_power<S: Scalar>(g: &Matrix<S>) -> Result<OperatorMatrix<S>> {
    let n = g.side();
    check_cap(n, DEFAULT_CAP)?;
    let basis = ExteriorBasis::new(n);
    let mut out = Matrix::zeros(basis.len());
    for col in 0..basis.len() {
        let mut v: Vec<S> = vec![S::zero(); basis.len()];
        v[0] = S::one();
        let mut rest = basis.subset(col);
        while rest != 0 {
            let s = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let mut next = vec![S::zero(); basis.len()];
            for (t, coeff) in v.iter().enumerate() {
                if coeff.is_zero() {
                    continue;
                }
                let t = t as u32;
                for j in 0..n {
                    let gj = g.get(j, s);
                    let bit = 1u32 << j;
                    if gj.is_zero() || t & bit != 0 {
                        continue;
                    }
                    // right wedge with e^j passes over the indices above j
                    let above = (t & !full_mask(j + 1)).count_ones();
                    let term = coeff.clone() * gj.clone();
                    let slot = &mut next[(t | bit) as usize];
                    *slot = if above.is_multiple_of(2) { slot.clone() + term } else { slot.clone() - term };
                }
            }
            v = next;
        }
        for (row, value) in v.into_iter().enumerate() {
            out.set(row, col, value);
        }
    }
    Ok(out)
}

/// Pullback action on `ΛV` of the block rotation fixing the first `a` coordinates.
pub fn pullback_lift<S: Scalar>(angles: &[f64], n: usize, a: usize) -> Result<OperatorMatrix<S>> {
    if a > n || (n - a) != 2 * angles.len() {
        return usage(format!("{} angles do not match n = {n}, a = {a}", angles.len()));
    }
    exterior_power(&plane_isometry(angles, n, a, false)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blade::{rotation_lift, supertrace};
    use crate::scalar::{Complex64, GaussQ};

    type Q = CliffordElement<GaussQ>;

    fn q(v: i64) -> GaussQ {
        GaussQ::from_i64(v)
    }

    #[test]
    fn single_generators_on_line() {
        let c = rep(&Q::c(1, 1).unwrap()).unwrap();
        assert_eq!(c, Matrix::from_rows(vec![vec![q(0), q(-1)], vec![q(1), q(0)]]).unwrap());
        let h = rep(&Q::chat(1, 1).unwrap()).unwrap();
        assert_eq!(h, Matrix::from_rows(vec![vec![q(0), q(1)], vec![q(1), q(0)]]).unwrap());
    }

    #[test]
    fn identity_supertrace_vanishes() {
        assert_eq!(oracle_supertrace(&Q::one(2)).unwrap(), q(0));
    }

    #[test]
    fn full_word_supertrace_matches_blade_side() {
        for n in 1..=5 {
            let full = full_mask(n);
            let x = Q::blade(n, BladePair::new(full, full), q(1)).unwrap();
            assert_eq!(oracle_supertrace(&x).unwrap(), supertrace(&x), "n = {n}");
        }
    }

    #[test]
    fn cap_is_enforced() {
        let x = Q::one(11);
        assert!(matches!(rep(&x), Err(Error::Resource(_))));
    }

    #[test]
    fn pullback_of_half_turn() {
        let m = pullback_lift::<Complex64>(&[std::f64::consts::PI], 2, 0).unwrap();
        let diag = [1.0, -1.0, -1.0, 1.0];
        for (p, d) in diag.iter().enumerate() {
            assert!((m.get(p, p).re - d).abs() < 1e-15);
        }
    }

    #[test]
    fn pullback_matches_lift_on_one_plane() {
        let theta = 0.7;
        let m = pullback_lift::<Complex64>(&[theta], 2, 0).unwrap();
        let r = rep(&rotation_lift::<Complex64>(&[theta], 2, 0).unwrap()).unwrap();
        assert!(m.max_diff(&r).unwrap() < 1e-15, "{m}\n{r}");
        // e^1 -> cos e^1 + sin e^2
        assert!((m.get(0b01, 0b01).re - theta.cos()).abs() < 1e-15);
        assert!((m.get(0b10, 0b01).re - theta.sin()).abs() < 1e-15);
    }
}
