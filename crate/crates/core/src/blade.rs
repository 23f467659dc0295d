//! Exact arithmetic in `Cl(V, q) ⊗̂ Cl(V, -q)`.
//!
//! A basis element is a [`BladePair`]: an ascending `c`-word followed by an
//! ascending `ĉ`-word,
//!
//! ```text
//! c(e_i1) ... c(e_ip) ĉ(e_j1) ... ĉ(e_jq),   i1 < ... < ip,  j1 < ... < jq.
//! ```
//!
//! Bit `i - 1` of a mask stands for the index `i`.
//!
//! # Sign convention
//!
//! The product of two blade pairs `(c1, h1) (c2, h2) = c1 h1 c2 h2` is brought
//! back to canonical order in three steps:
//!
//! 1. `c2` is moved left past `h1`. Every `c` anticommutes with every `ĉ`,
//!    including equal indices, so this costs `(-1)^{|h1| |c2|}`.
//! 2. `c1 c2` is sorted. Each inversion costs `-1`; each repeated index
//!    contracts with `c(e_i)^2 = -1`.
//! 3. `h1 h2` is sorted the same way, with `ĉ(e_i)^2 = +1`.
//!
//! Inversions are counted with popcounts over crossing bits. The symbol map
//! sends a blade pair to the bigraded form with the same masks, so the
//! supertrace reads off the coefficient of the full pair.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{usage, Error, Result};
use crate::scalar::{sign_pow, Scalar};

/// Largest supported dimension of `V`.
pub const MAX_DIM: usize = 16;

/// Canonical basis word of the bigraded Clifford algebra (or, through the
/// symbol map, of the bigraded exterior algebra).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct BladePair {
    /// Indices of the `c`-word (or of the unhatted form word).
    pub c: u32,
    /// Indices of the `ĉ`-word (or of the hatted form word).
    pub h: u32,
}

impl BladePair {
    pub const ONE: BladePair = BladePair { c: 0, h: 0 };

    pub fn new(c: u32, h: u32) -> Self {
        BladePair { c, h }
    }

    /// Build from 1-based index lists; indices must be strictly ascending.
    pub fn from_indices(c: &[usize], h: &[usize]) -> Result<Self> {
        Ok(BladePair { c: mask_of(c)?, h: mask_of(h)? })
    }

    pub fn c_grade(self) -> u32 {
        self.c.count_ones()
    }

    pub fn h_grade(self) -> u32 {
        self.h.count_ones()
    }

    pub fn is_even(self) -> bool {
        (self.c_grade() + self.h_grade()).is_multiple_of(2)
    }

    pub fn fits(self, dim: usize) -> bool {
        let full = full_mask(dim);
        self.c & !full == 0 && self.h & !full == 0
    }
}

fn mask_of(indices: &[usize]) -> Result<u32> {
    let mut mask = 0u32;
    let mut last = 0usize;
    for &i in indices {
        if i == 0 || i > MAX_DIM {
            return usage(format!("index {i} outside 1..={MAX_DIM}"));
        }
        if i <= last {
            return usage("indices must be strictly ascending");
        }
        last = i;
        mask |= 1 << (i - 1);
    }
    Ok(mask)
}

/// Mask with bits `0..dim` set.
pub fn full_mask(dim: usize) -> u32 {
    if dim >= 32 {
        u32::MAX
    } else {
        (1u32 << dim) - 1
    }
}

/// Mask of the 1-based index range `lo..=hi`.
pub fn range_mask(lo: usize, hi: usize) -> u32 {
    if hi < lo {
        0
    } else {
        full_mask(hi) & !full_mask(lo - 1)
    }
}

pub fn indices_of(mask: u32) -> Vec<usize> {
    (0..32).filter(|b| mask >> b & 1 == 1).map(|b| b + 1).collect()
}

/// Parity of the number of pairs `(i in a, j in b)` with `i > j`.
fn inversions_odd(a: u32, b: u32) -> bool {
    let mut count = 0u32;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        rest &= rest - 1;
        count += (a >> j >> 1).count_ones();
    }
    count % 2 == 1
}

/// Product of two basis words in `Cl(V,q) ⊗̂ Cl(V,-q)`: `(sign, word)`.
pub fn blade_product(x: BladePair, y: BladePair) -> (i64, BladePair) {
    let mut odd = (x.h_grade() * y.c_grade()) % 2 == 1;
    odd ^= inversions_odd(x.c, y.c);
    odd ^= (x.c & y.c).count_ones() % 2 == 1;
    odd ^= inversions_odd(x.h, y.h);
    let sign = if odd { -1 } else { 1 };
    (sign, BladePair { c: x.c ^ y.c, h: x.h ^ y.h })
}

/// Wedge product of two basis words in `Λ V ⊗̂ Λ V`; `None` when it vanishes.
pub fn form_product(x: BladePair, y: BladePair) -> Option<(i64, BladePair)> {
    if x.c & y.c != 0 || x.h & y.h != 0 {
        return None;
    }
    let mut odd = (x.h_grade() * y.c_grade()) % 2 == 1;
    odd ^= inversions_odd(x.c, y.c);
    odd ^= inversions_odd(x.h, y.h);
    Some((if odd { -1 } else { 1 }, BladePair { c: x.c | y.c, h: x.h | y.h }))
}

fn check_dim(dim: usize) -> Result<()> {
    if dim > MAX_DIM {
        Err(Error::Resource(format!("dimension {dim} exceeds {MAX_DIM}")))
    } else {
        Ok(())
    }
}

fn fmt_word(f: &mut fmt::Formatter<'_>, pair: BladePair, c: &str, h: &str) -> fmt::Result {
    let list = |m: u32| indices_of(m).iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",");
    write!(f, "{c}[{}] ^ {h}[{}]", list(pair.c), list(pair.h))
}

fn insert_term<S: Scalar>(terms: &mut BTreeMap<BladePair, S>, key: BladePair, value: S) {
    if value.is_zero() {
        return;
    }
    match terms.remove(&key) {
        Some(old) => {
            let sum = old + value;
            if !sum.is_zero() {
                terms.insert(key, sum);
            }
        }
        None => {
            terms.insert(key, value);
        }
    }
}

// ---------------------------------------------------------------------------
// Clifford elements

/// Finite linear combination of blade pairs over the ring `S`.
///
/// Terms are kept sorted by blade key and never hold a zero coefficient.
#[derive(Clone, Debug, PartialEq)]
pub struct CliffordElement<S: Scalar> {
    dim: usize,
    terms: BTreeMap<BladePair, S>,
}

impl<S: Scalar> CliffordElement<S> {
    pub fn zero(dim: usize) -> Self {
        CliffordElement { dim, terms: BTreeMap::new() }
    }

    pub fn scalar(dim: usize, value: S) -> Self {
        Self::from_blade(dim, BladePair::ONE, value)
    }

    pub fn one(dim: usize) -> Self {
        Self::scalar(dim, S::one())
    }

    fn from_blade(dim: usize, pair: BladePair, value: S) -> Self {
        let mut terms = BTreeMap::new();
        insert_term(&mut terms, pair, value);
        CliffordElement { dim, terms }
    }

    /// `value` times the basis word `pair`.
    pub fn blade(dim: usize, pair: BladePair, value: S) -> Result<Self> {
        check_dim(dim)?;
        if !pair.fits(dim) {
            return usage(format!("blade {pair:?} does not fit in dimension {dim}"));
        }
        Ok(Self::from_blade(dim, pair, value))
    }

    /// The generator `c(e_i)`, 1-based.
    pub fn c(dim: usize, i: usize) -> Result<Self> {
        if i == 0 || i > dim {
            return usage(format!("generator index {i} outside 1..={dim}"));
        }
        Self::blade(dim, BladePair::new(1 << (i - 1), 0), S::one())
    }

    /// The generator `ĉ(e_i)`, 1-based.
    pub fn chat(dim: usize, i: usize) -> Result<Self> {
        if i == 0 || i > dim {
            return usage(format!("generator index {i} outside 1..={dim}"));
        }
        Self::blade(dim, BladePair::new(0, 1 << (i - 1)), S::one())
    }

    pub fn from_terms(dim: usize, terms: impl IntoIterator<Item = (BladePair, S)>) -> Result<Self> {
        check_dim(dim)?;
        let mut out = Self::zero(dim);
        for (pair, value) in terms {
            if !pair.fits(dim) {
                return usage(format!("blade {pair:?} does not fit in dimension {dim}"));
            }
            insert_term(&mut out.terms, pair, value);
        }
        Ok(out)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&BladePair, &S)> {
        self.terms.iter()
    }

    pub fn coeff(&self, pair: BladePair) -> S {
        self.terms.get(&pair).cloned().unwrap_or_else(S::zero)
    }

    /// Sum of coefficient magnitudes.
    pub fn norm(&self) -> f64 {
        self.terms.values().map(Scalar::magnitude).sum()
    }

    pub fn scale(&self, s: &S) -> Self {
        let mut out = Self::zero(self.dim);
        for (k, v) in &self.terms {
            insert_term(&mut out.terms, *k, v.clone() * s.clone());
        }
        out
    }

    fn same_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return usage(format!("dimension mismatch: {} vs {}", self.dim, other.dim));
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.same_dim(other)?;
        let mut out = self.clone();
        for (k, v) in &other.terms {
            insert_term(&mut out.terms, *k, v.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.checked_add(&-other.clone())
    }

    /// Bilinear associative product.
    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.same_dim(other)?;
        let mut out = Self::zero(self.dim);
        for (kx, vx) in &self.terms {
            for (ky, vy) in &other.terms {
                let (sign, k) = blade_product(*kx, *ky);
                let v = vx.clone() * vy.clone();
                insert_term(&mut out.terms, k, if sign < 0 { -v } else { v });
            }
        }
        Ok(out)
    }

    /// Supercommutator `[x, y]_s = xy - (-1)^{|x||y|} yx` on homogeneous parts.
    pub fn supercommutator(&self, other: &Self) -> Result<Self> {
        self.same_dim(other)?;
        let mut out = Self::zero(self.dim);
        for (kx, vx) in &self.terms {
            for (ky, vy) in &other.terms {
                let v = vx.clone() * vy.clone();
                let (s1, k1) = blade_product(*kx, *ky);
                let (s2, k2) = blade_product(*ky, *kx);
                let both_odd = !kx.is_even() && !ky.is_even();
                let s2 = if both_odd { -s2 } else { s2 };
                insert_term(&mut out.terms, k1, if s1 < 0 { -v.clone() } else { v.clone() });
                insert_term(&mut out.terms, k2, if s2 < 0 { v } else { -v });
            }
        }
        Ok(out)
    }

    /// Product of a sequence of factors, left to right.
    pub fn product<'a>(dim: usize, factors: impl IntoIterator<Item = &'a Self>) -> Result<Self> {
        let mut acc = Self::one(dim);
        for f in factors {
            acc = acc.checked_mul(f)?;
        }
        Ok(acc)
    }

    /// Keep only the terms accepted by `keep`.
    pub fn filter(&self, keep: impl Fn(BladePair) -> bool) -> Self {
        CliffordElement {
            dim: self.dim,
            terms: self.terms.iter().filter(|(k, _)| keep(**k)).map(|(k, v)| (*k, v.clone())).collect(),
        }
    }

    pub fn map_coeffs<T: Scalar>(&self, f: impl Fn(&S) -> T) -> CliffordElement<T> {
        let mut out = CliffordElement::zero(self.dim);
        for (k, v) in &self.terms {
            insert_term(&mut out.terms, *k, f(v));
        }
        out
    }
}

impl<S: Scalar> fmt::Display for CliffordElement<S> {
    /// Canonical text form: `coeff * c[i,..] ^ ĉ[j,..]` terms joined by ` + `.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (n, (k, v)) in self.terms.iter().enumerate() {
            if n > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{v} * ")?;
            fmt_word(f, *k, "c", "ĉ")?;
        }
        Ok(())
    }
}

impl<S: Scalar> Neg for CliffordElement<S> {
    type Output = Self;
    fn neg(self) -> Self {
        CliffordElement { dim: self.dim, terms: self.terms.into_iter().map(|(k, v)| (k, -v)).collect() }
    }
}

// Operator forms panic on dimension mismatch; the `checked_*` methods report it.
impl<S: Scalar> Add for &CliffordElement<S> {
    type Output = CliffordElement<S>;
    fn add(self, o: Self) -> CliffordElement<S> {
        self.checked_add(o).expect("dimension mismatch in Clifford addition")
    }
}

impl<S: Scalar> Sub for &CliffordElement<S> {
    type Output = CliffordElement<S>;
    fn sub(self, o: Self) -> CliffordElement<S> {
        self.checked_sub(o).expect("dimension mismatch in Clifford subtraction")
    }
}

impl<S: Scalar> Mul for &CliffordElement<S> {
    type Output = CliffordElement<S>;
    fn mul(self, o: Self) -> CliffordElement<S> {
        self.checked_mul(o).expect("dimension mismatch in Clifford product")
    }
}

// ---------------------------------------------------------------------------
// Bigraded forms

/// Element of `Λ(n) ⊗̂ Λ(n)`, with the fixed-set/normal split at `a`.
///
/// The first factor is graded by `(k, l̄)` = (indices `<= a`, indices `> a`),
/// likewise the hatted factor.
#[derive(Clone, Debug, PartialEq)]
pub struct BigradedForm<S: Scalar> {
    dim: usize,
    split: usize,
    terms: BTreeMap<BladePair, S>,
}

/// Bidegree `(k, l̄)` of one factor.
pub type Bidegree = (usize, usize);

impl<S: Scalar> BigradedForm<S> {
    pub fn zero(dim: usize, split: usize) -> Self {
        BigradedForm { dim, split, terms: BTreeMap::new() }
    }

    pub fn from_terms(dim: usize, split: usize, terms: impl IntoIterator<Item = (BladePair, S)>) -> Result<Self> {
        check_dim(dim)?;
        if split > dim {
            return usage(format!("split {split} exceeds dimension {dim}"));
        }
        let mut out = Self::zero(dim, split);
        for (k, v) in terms {
            if !k.fits(dim) {
                return usage(format!("form word {k:?} does not fit in dimension {dim}"));
            }
            insert_term(&mut out.terms, k, v);
        }
        Ok(out)
    }

    /// The volume element `e^1 ∧ .. ∧ e^n ∧ ê^1 ∧ .. ∧ ê^n`.
    pub fn volume(dim: usize, split: usize) -> Result<Self> {
        let full = full_mask(dim);
        Self::from_terms(dim, split, [(BladePair::new(full, full), S::one())])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn split(&self) -> usize {
        self.split
    }

    pub fn with_split(mut self, split: usize) -> Result<Self> {
        if split > self.dim {
            return usage(format!("split {split} exceeds dimension {}", self.dim));
        }
        self.split = split;
        Ok(self)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&BladePair, &S)> {
        self.terms.iter()
    }

    pub fn coeff(&self, word: BladePair) -> S {
        self.terms.get(&word).cloned().unwrap_or_else(S::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.terms.values().map(Scalar::magnitude).sum()
    }

    pub fn bidegree(&self, mask: u32) -> Bidegree {
        let fixed = full_mask(self.split);
        ((mask & fixed).count_ones() as usize, (mask & !fixed).count_ones() as usize)
    }

    pub fn scale(&self, s: &S) -> Self {
        let mut out = Self::zero(self.dim, self.split);
        for (k, v) in &self.terms {
            insert_term(&mut out.terms, *k, v.clone() * s.clone());
        }
        out
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim || self.split != other.split {
            return usage("bigraded forms with different dimension or split");
        }
        let mut out = self.clone();
        for (k, v) in &other.terms {
            insert_term(&mut out.terms, *k, v.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.checked_add(&other.scale(&-S::one()))
    }

    /// Graded wedge product in `Λ(n) ⊗̂ Λ(n)`.
    pub fn wedge(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim || self.split != other.split {
            return usage("bigraded forms with different dimension or split");
        }
        let mut out = Self::zero(self.dim, self.split);
        for (kx, vx) in &self.terms {
            for (ky, vy) in &other.terms {
                if let Some((sign, k)) = form_product(*kx, *ky) {
                    let v = vx.clone() * vy.clone();
                    insert_term(&mut out.terms, k, if sign < 0 { -v } else { v });
                }
            }
        }
        Ok(out)
    }
}

impl<S: Scalar> fmt::Display for BigradedForm<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (n, (k, v)) in self.terms.iter().enumerate() {
            if n > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{v} * ")?;
            fmt_word(f, *k, "e", "ê")?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Operations

/// `ĉ(E) = ĉ(f_1) .. ĉ(f_k)` with `f_α = e_α`.
pub fn chat_e<S: Scalar>(n: usize, k: usize) -> Result<CliffordElement<S>> {
    if k > n {
        return usage(format!("rank k = {k} exceeds dimension n = {n}"));
    }
    CliffordElement::blade(n, BladePair::new(0, full_mask(k)), S::one())
}

/// `τ(M, g^E) = ε ĉ(E)`.
///
/// The grading `ε` of `ΛV` is kept as a flag next to the `ĉ`-word; its
/// matrix lives in [`crate::matrix_rep`], where identities involving `τ` are
/// checked.
#[derive(Clone, Debug, PartialEq)]
pub struct Tau<S: Scalar> {
    pub graded: bool,
    pub chat_e: CliffordElement<S>,
}

pub fn build_tau<S: Scalar>(n: usize, k: usize) -> Result<Tau<S>> {
    Ok(Tau { graded: true, chat_e: chat_e(n, k)? })
}

/// Symbol map: each `c`-word becomes the form word on the same indices, each
/// `ĉ`-word the hatted form word.
pub fn symbol<S: Scalar>(x: &CliffordElement<S>) -> BigradedForm<S> {
    BigradedForm { dim: x.dim, split: 0, terms: x.terms.clone() }
}

/// Berezin trace: coefficient of `e^1..e^n ê^1..ê^n`.
pub fn berezin_t<S: Scalar>(w: &BigradedForm<S>) -> S {
    let full = full_mask(w.dim);
    w.coeff(BladePair::new(full, full))
}

/// `(-1)^{n(n+1)/2} 2^n`.
pub fn supertrace_normalization(n: usize) -> i64 {
    let n = n as i64;
    sign_pow(n * (n + 1) / 2) * (1i64 << n)
}

/// Supertrace through the symbol: `(-1)^{n(n+1)/2} 2^n T(σ(x))`.
pub fn supertrace<S: Scalar>(x: &CliffordElement<S>) -> S {
    berezin_t(&symbol(x)) * S::from_i64(supertrace_normalization(x.dim))
}

/// Component of bidegree `((k1, l̄1), (k2, l̄2))` with respect to the split of `w`.
pub fn bigraded_component<S: Scalar>(w: &BigradedForm<S>, form: Bidegree, hat: Bidegree) -> Result<BigradedForm<S>> {
    let (a, b) = (w.split, w.dim - w.split);
    for (k, l) in [form, hat] {
        if k > a || l > b {
            return usage(format!("bidegree ({k},{l}) outside ({a},{b})"));
        }
    }
    let terms = w
        .terms
        .iter()
        .filter(|(key, _)| w.bidegree(key.c) == form && w.bidegree(key.h) == hat)
        .map(|(k, v)| (*k, v.clone()))
        .collect();
    Ok(BigradedForm { dim: w.dim, split: w.split, terms })
}

/// Exponential by scaling and squaring of a truncated power series.
///
/// The series stops once a term vanishes exactly (nilpotent arguments) or its
/// norm drops below `tol`.
pub fn clifford_exp<S: Scalar>(x: &CliffordElement<S>, tol: f64) -> Result<CliffordElement<S>> {
    const MAX_TERMS: usize = 400;
    let dim = x.dim;
    let norm = x.norm();
    if !norm.is_finite() {
        return Err(Error::Numeric("non-finite argument to exp".into()));
    }
    let mut squarings = 0u32;
    while norm / f64::powi(2.0, squarings as i32) > 0.5 && squarings < 60 {
        squarings += 1;
    }
    let y = if squarings == 0 {
        x.clone()
    } else {
        x.scale(&S::from_f64(f64::powi(2.0, -(squarings as i32))))
    };
    let mut acc = CliffordElement::one(dim);
    let mut term = CliffordElement::one(dim);
    let mut converged = false;
    for j in 1..MAX_TERMS {
        term = term.checked_mul(&y)?.scale(&S::from_ratio(1, j as i64));
        if term.is_zero() {
            converged = true;
            break;
        }
        acc = acc.checked_add(&term)?;
        if term.norm() < tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Numeric(format!("exp series did not converge in {MAX_TERMS} terms")));
    }
    for _ in 0..squarings {
        acc = acc.checked_mul(&acc)?;
    }
    Ok(acc)
}

/// Index pair `(p, p+1)` (1-based) of the `m`-th normal rotation plane.
pub fn normal_plane(a: usize, m: usize) -> (usize, usize) {
    (a + 2 * m + 1, a + 2 * m + 2)
}

/// Closed-form lift of a normal block rotation to `ΛV`:
///
/// ```text
/// (1/2)^{b/2} ∏_j [ (1 + cos θ_j) - (1 - cos θ_j) c c ĉ ĉ + sin θ_j (c c - ĉ ĉ) ]
/// ```
///
/// over the planes `(a+2j-1, a+2j)`, `j = 1..b/2`.
pub fn rotation_lift<S: Scalar>(angles: &[f64], n: usize, a: usize) -> Result<CliffordElement<S>> {
    if a > n {
        return usage(format!("fixed dimension a = {a} exceeds n = {n}"));
    }
    let b = n - a;
    if !b.is_multiple_of(2) {
        return usage(format!("normal dimension b = {b} must be even"));
    }
    if angles.len() != b / 2 {
        return usage(format!("expected {} angles, got {}", b / 2, angles.len()));
    }
    planar_lift(angles, n, a)
}

/// The same product over the planes `(offset+2j-1, offset+2j)` only; the
/// remaining coordinates after the last plane are left fixed.
pub fn planar_lift<S: Scalar>(angles: &[f64], n: usize, offset: usize) -> Result<CliffordElement<S>> {
    if offset + 2 * angles.len() > n {
        return usage(format!("{} planes after offset {offset} do not fit in dimension {n}", angles.len()));
    }
    check_dim(n)?;
    let mut acc = CliffordElement::one(n);
    for (m, &theta) in angles.iter().enumerate() {
        let (p, q) = normal_plane(offset, m);
        let (p, q) = (1u32 << (p - 1), 1u32 << (q - 1));
        let (cos, sin) = (theta.cos(), theta.sin());
        let factor = CliffordElement::from_terms(
            n,
            [
                (BladePair::ONE, S::from_f64(0.5 * (1.0 + cos))),
                (BladePair::new(p | q, p | q), S::from_f64(-0.5 * (1.0 - cos))),
                (BladePair::new(p | q, 0), S::from_f64(0.5 * sin)),
                (BladePair::new(0, p | q), S::from_f64(-0.5 * sin)),
            ],
        )?;
        acc = acc.checked_mul(&factor)?;
    }
    Ok(acc)
}

/// Lift of the reflection `e_i -> -e_i`: acts on `ΛV` as `(-1)^{[i ∈ S]}`, which is `-c(e_i) ĉ(e_i)`.
pub fn reflection_lift<S: Scalar>(n: usize, i: usize) -> Result<CliffordElement<S>> {
    if i == 0 || i > n {
        return usage(format!("reflection index {i} outside 1..={n}"));
    }
    let bit = 1u32 << (i - 1);
    CliffordElement::blade(n, BladePair::new(bit, bit), -S::one())
}

/// The grading `ε` of `ΛV` as a Clifford element: `∏_i (-c(e_i) ĉ(e_i))`.
pub fn grading_element<S: Scalar>(n: usize) -> Result<CliffordElement<S>> {
    let mut acc = CliffordElement::one(n);
    for i in 1..=n {
        acc = acc.checked_mul(&reflection_lift(n, i)?)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{Complex64, GaussQ};

    type Q = CliffordElement<GaussQ>;

    fn q(v: i64) -> GaussQ {
        GaussQ::from_i64(v)
    }

    #[test]
    fn generator_squares() {
        let c1 = Q::c(3, 1).unwrap();
        let h1 = Q::chat(3, 1).unwrap();
        assert_eq!(&c1 * &c1, Q::scalar(3, q(-1)));
        assert_eq!(&h1 * &h1, Q::one(3));
    }

    #[test]
    fn mixed_generators_anticommute() {
        for i in 1..=3 {
            for j in 1..=3 {
                let c = Q::c(3, i).unwrap();
                let h = Q::chat(3, j).unwrap();
                assert!((&(&c * &h) + &(&h * &c)).is_zero(), "c{i} ĉ{j}");
            }
        }
    }

    #[test]
    fn reversed_pair_product_is_one() {
        let c1 = Q::c(2, 1).unwrap();
        let c2 = Q::c(2, 2).unwrap();
        let x = &c1 * &c2;
        let y = &c2 * &c1;
        assert_eq!(&x * &y, Q::one(2));
    }

    #[test]
    fn chat_e_shapes() {
        assert_eq!(chat_e::<GaussQ>(4, 0).unwrap(), Q::one(4));
        let e = chat_e::<GaussQ>(4, 2).unwrap();
        assert_eq!(e.coeff(BladePair::from_indices(&[], &[1, 2]).unwrap()), q(1));
        assert_eq!(chat_e::<GaussQ>(3, 3).unwrap().len(), 1);
        assert!(matches!(chat_e::<GaussQ>(2, 3), Err(Error::Usage(_))));
    }

    #[test]
    fn symbol_examples() {
        let c1 = Q::c(2, 1).unwrap();
        let c2 = Q::c(2, 2).unwrap();
        let s = symbol(&(&c1 * &c2));
        assert_eq!(s.coeff(BladePair::new(0b11, 0)), q(1));
        let x = &Q::chat(2, 2).unwrap().scale(&q(3)) - &c1;
        let s = symbol(&x);
        assert_eq!(s.coeff(BladePair::new(0, 0b10)), q(3));
        assert_eq!(s.coeff(BladePair::new(0b01, 0)), q(-1));
        assert_eq!(symbol(&Q::one(2)).coeff(BladePair::ONE), q(1));
    }

    #[test]
    fn berezin_examples() {
        let w = BigradedForm::<GaussQ>::volume(2, 0).unwrap();
        assert_eq!(berezin_t(&w), q(1));
        let one = BigradedForm::from_terms(2, 0, [(BladePair::ONE, q(1))]).unwrap();
        assert_eq!(berezin_t(&one), q(0));
        let mix = w.scale(&q(5)).checked_add(&BigradedForm::from_terms(2, 0, [(BladePair::new(1, 0), q(1))]).unwrap());
        assert_eq!(berezin_t(&mix.unwrap()), q(5));
    }

    #[test]
    fn supertrace_of_full_words() {
        let full2 = Q::blade(2, BladePair::new(0b11, 0b11), q(1)).unwrap();
        assert_eq!(supertrace(&full2), q(-4));
        let partial = Q::blade(2, BladePair::new(0b01, 0b01), q(1)).unwrap();
        assert_eq!(supertrace(&partial), q(0));
        let full3 = Q::blade(3, BladePair::new(0b111, 0b111), q(1)).unwrap();
        assert_eq!(supertrace(&full3), q(8));
    }

    #[test]
    fn bigraded_component_partitions() {
        let w = BigradedForm::from_terms(2, 1, [(BladePair::new(0b01, 0b10), q(1))]).unwrap();
        let c = bigraded_component(&w, (1, 0), (0, 1)).unwrap();
        assert_eq!(c, w);
        let other = bigraded_component(&w, (0, 1), (0, 1)).unwrap();
        assert!(other.is_zero());
        assert!(bigraded_component(&w, (2, 0), (0, 0)).is_err());
    }

    #[test]
    fn exp_of_zero_and_rotation_generator() {
        let z = CliffordElement::<Complex64>::zero(2);
        assert_eq!(clifford_exp(&z, 1e-16).unwrap(), CliffordElement::one(2));
        let theta: f64 = 1.3;
        let h12 = CliffordElement::<Complex64>::blade(2, BladePair::new(0, 0b11), Complex64::new(theta / 2.0, 0.0)).unwrap();
        let e = clifford_exp(&h12, 1e-17).unwrap();
        assert!((e.coeff(BladePair::ONE).re - (theta / 2.0).cos()).abs() < 1e-14);
        assert!((e.coeff(BladePair::new(0, 0b11)).re - (theta / 2.0).sin()).abs() < 1e-14);
    }

    #[test]
    fn rotation_lift_trivial_cases() {
        let id = rotation_lift::<Complex64>(&[0.0, 0.0], 4, 0).unwrap();
        assert_eq!(id, CliffordElement::one(4));
        let pi = rotation_lift::<Complex64>(&[std::f64::consts::PI], 2, 0).unwrap();
        let full = pi.coeff(BladePair::new(0b11, 0b11));
        assert!((full.re + 1.0).abs() < 1e-15);
        assert!(pi.coeff(BladePair::ONE).norm() < 1e-15);
        assert!(rotation_lift::<Complex64>(&[0.0], 3, 0).is_err());
    }

    #[test]
    fn grading_element_is_an_involution() {
        let eps = grading_element::<GaussQ>(3).unwrap();
        assert_eq!(&eps * &eps, Q::one(3));
    }

    #[test]
    fn text_form() {
        let x = &Q::c(2, 1).unwrap().scale(&q(2)) + &Q::chat(2, 2).unwrap();
        assert_eq!(x.to_string(), "1 * c[] ^ ĉ[2] + 2 * c[1] ^ ĉ[]");
    }
}
