//! The two sides of the local equivariant index density at a fixed point.
//!
//! Coordinates are grouped into planes `(2p-1, 2p)`, `p = 1..n/2`. The first
//! `a/2` planes span the fixed set, the remaining ones carry the rotation
//! `φ^N`. The bundle `E` is spanned by the first `k` coordinates (`f_α = e_α`)
//! and `E⊥` by the rest (`h_s = e_{k+s}`), so `dφ` preserves both.
//!
//! Curvature is block diagonal on the same planes, `[[0, -Ω_p], [Ω_p, 0]]`.
//! At an isolated fixed point it vanishes; on a fixed set of dimension
//! `a > 0` each `Ω_p` is a combination of the commuting 2-forms
//! `ε_q = e^{2q-1} ∧ e^{2q}`, `q = 1..a/2`, held in the [`Nil`] ring.
//!
//! # Factor bookkeeping
//!
//! The supertrace side is
//!
//! ```text
//! (√-1)^{k/2} (-1)^{n(n+1)/2} 2^n (4π)^{-a/2}
//!     × [ε_1..ε_{a/2}] coefficient of
//!       P · ⟨φ̃ ĉ(E) exp(Ṙ + R̈)⟩_{c = e_{a+1}..e_n, ĉ = all}
//! ```
//!
//! with `P = det^{1/2}((R'/2)/sinh(R'/2)) det^{-1/2}(1 - φ^N e^{-R''}) / det^{1/2}(1 - φ^N)`.
//! The rotation enters only through the lift `φ̃`; the exponential carries
//! curvature alone. The form factor `e^1..e^a` of the top word is supplied
//! by `ε_1 .. ε_{a/2}`, which is already in ascending order.
//!
//! The characteristic-form side is
//!
//! ```text
//! (1/√-1)^{k/2} 2^{n/2} Â(R') ν_φ(R'') det^{1/2} cosh(X_E) det^{1/2}(sinh X_⊥ / X_⊥) Pf(X_⊥)
//! ```
//!
//! with `X = R/4π - L/2` and `L` the block logarithm of `dφ`.
//!
//! The curvature Clifford elements use `Ṙ = ¼ Σ_{αβ} ⟨M f_β, f_α⟩ ĉ(f_α) ĉ(f_β)`.
//! With this pairing a block `[[0, -x], [x, 0]]` gives `-½ x ĉ ĉ`, which is
//! the sign `exp(-¼ Σ A_{ij} ĉ ĉ)` of the lift expansion requires.

use crate::blade::{
    bigraded_component, chat_e, clifford_exp, full_mask, grading_element, planar_lift, reflection_lift, rotation_lift,
    supertrace, supertrace_normalization, symbol, BigradedForm, BladePair, CliffordElement,
};
use crate::error::{usage, Error, Result};
use crate::forms::{
    a_hat, det_sqrt_cosh, det_sqrt_sinhc, normalization, nu_phi, pfaffian_berezin, pfaffian_by, pfaffian_odd,
    AntisymmetricMatrix, GroupElement, KernelPath, RootRing,
};
use crate::linalg::Matrix;
use crate::scalar::{times_i_pow, Complex64, Nil, Scalar};

/// Tolerance for the exponential series on Clifford elements.
pub const EXP_TOL: f64 = 1e-19;

/// Largest `n` accepted by the density assembly.
pub const MAX_N: usize = 12;

/// Rings in which densities are assembled: plain complex numbers at isolated
/// fixed points, nilpotent forms on positive-dimensional fixed sets.
pub trait FormRing: RootRing {
    /// The coefficient of the top fixed-set form `ε_1 .. ε_{a/2}`.
    fn top_form(&self, a: usize) -> Complex64;
    /// Whether curvature in this ring is allowed at fixed-set dimension `a`.
    fn supports_fixed_dim(a: usize) -> bool;
}

impl FormRing for Complex64 {
    fn top_form(&self, _a: usize) -> Complex64 {
        *self
    }
    fn supports_fixed_dim(a: usize) -> bool {
        a == 0
    }
}

impl FormRing for Nil {
    fn top_form(&self, a: usize) -> Complex64 {
        self.top_coefficient(a / 2)
    }
    fn supports_fixed_dim(a: usize) -> bool {
        a / 2 <= Nil::MAX_GENERATORS
    }
}

/// Fixed-point data in the even case.
#[derive(Clone, Debug, PartialEq)]
pub struct FixedPointData<S: Scalar> {
    pub n: usize,
    pub a: usize,
    pub k: usize,
    /// Rotation angles of `φ^N`, one per normal plane.
    pub phi_angles: Vec<f64>,
    /// `Ω_p` for every plane `p = 1..n/2`.
    pub curvature: Vec<S>,
}

impl<S: FormRing> FixedPointData<S> {
    /// Isolated-style data with vanishing curvature.
    pub fn flat(n: usize, a: usize, k: usize, phi_angles: &[f64]) -> Self {
        FixedPointData { n, a, k, phi_angles: phi_angles.to_vec(), curvature: vec![S::zero(); n / 2] }
    }

    pub fn validate(&self) -> Result<()> {
        let FixedPointData { n, a, k, .. } = *self;
        if n == 0 || n % 2 == 1 || n > MAX_N {
            return usage(format!("n = {n} must be even and in 2..={MAX_N}"));
        }
        if a % 2 == 1 || a > n {
            return usage(format!("fixed dimension a = {a} must be even and at most n"));
        }
        if k % 2 == 1 {
            return usage(format!("rank k = {k} must be even"));
        }
        if k + 2 > n {
            return usage(format!("rank k = {k} must satisfy k <= n - 2 so that E⊥ is nonzero"));
        }
        if self.phi_angles.len() != (n - a) / 2 {
            return usage(format!("expected {} rotation angles, got {}", (n - a) / 2, self.phi_angles.len()));
        }
        if self.curvature.len() != n / 2 {
            return usage(format!("expected {} curvature entries, got {}", n / 2, self.curvature.len()));
        }
        if !S::supports_fixed_dim(a) {
            return usage(format!("fixed dimension a = {a} needs nilpotent-form mode"));
        }
        for (p, w) in self.curvature.iter().enumerate() {
            if !w.to_complex().norm().eq(&0.0) {
                return usage(format!("curvature of plane {} has a nonzero scalar part", p + 1));
            }
        }
        for (j, t) in self.phi_angles.iter().enumerate() {
            if !t.is_finite() {
                return usage(format!("rotation angle {} is not finite", j + 1));
            }
            if (t / 2.0).sin().abs() < 1e-12 {
                return Err(Error::Singular(format!("rotation angle {} makes det(1 - φ^N) vanish", j + 1)));
            }
        }
        Ok(())
    }

    pub fn b(&self) -> usize {
        self.n - self.a
    }

    /// `(θ_p, Ω_p)` per plane, with `θ_p = 0` on the fixed set.
    pub fn planes(&self) -> Vec<(f64, S)> {
        (0..self.n / 2)
            .map(|p| {
                let theta = if 2 * p < self.a { 0.0 } else { self.phi_angles[p - self.a / 2] };
                (theta, self.curvature[p].clone())
            })
            .collect()
    }

    fn curvature_blocks(&self, planes: std::ops::Range<usize>) -> AntisymmetricMatrix<S> {
        AntisymmetricMatrix::from_roots(&self.curvature[planes], false)
    }

    fn log_blocks(&self, planes: std::ops::Range<usize>) -> AntisymmetricMatrix<S> {
        let roots: Vec<S> = self.planes()[planes].iter().map(|(t, _)| S::from_f64(-t)).collect();
        AntisymmetricMatrix::from_roots(&roots, false)
    }

    /// `R'`, curvature of the fixed set.
    pub fn r_prime(&self) -> AntisymmetricMatrix<S> {
        self.curvature_blocks(0..self.a / 2)
    }

    /// `R''`, curvature of the normal bundle.
    pub fn r_double_prime(&self) -> AntisymmetricMatrix<S> {
        self.curvature_blocks(self.a / 2..self.n / 2)
    }

    /// `R^E`.
    pub fn r_e(&self) -> AntisymmetricMatrix<S> {
        self.curvature_blocks(0..self.k / 2)
    }

    /// `R^{E⊥}`.
    pub fn r_e_perp(&self) -> AntisymmetricMatrix<S> {
        self.curvature_blocks(self.k / 2..self.n / 2)
    }

    /// `L_1 = log dφ|_E`.
    pub fn l1(&self) -> AntisymmetricMatrix<S> {
        self.log_blocks(0..self.k / 2)
    }

    /// `L_2 = log dφ|_{E⊥}`.
    pub fn l2(&self) -> AntisymmetricMatrix<S> {
        self.log_blocks(self.k / 2..self.n / 2)
    }

    pub fn group_element(&self) -> GroupElement {
        GroupElement::rotation(&self.phi_angles)
    }
}

/// `weight · Σ_{i,j} M_{ij} ĉ(e_{offset+i}) ĉ(e_{offset+j})`.
pub fn chat_quadratic<S: Scalar>(n: usize, offset: usize, m: &AntisymmetricMatrix<S>, weight: &S) -> Result<CliffordElement<S>> {
    if offset + m.side() > n {
        return usage("quadratic form does not fit");
    }
    let mut terms = Vec::new();
    for i in 0..m.side() {
        for j in i + 1..m.side() {
            let v = m.get(i, j) * weight.clone() * S::from_i64(2);
            terms.push((BladePair::new(0, (1 << (offset + i)) | (1 << (offset + j))), v));
        }
    }
    CliffordElement::from_terms(n, terms)
}

/// `Ṙ, R̈` and their shifted versions `Ṙ̃, R̈̃` built from `R - L`.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureElements<S: Scalar> {
    pub rdot: CliffordElement<S>,
    pub rddot: CliffordElement<S>,
    pub rdot_tilde: CliffordElement<S>,
    pub rddot_tilde: CliffordElement<S>,
}

pub fn curvature_elements<S: FormRing>(d: &FixedPointData<S>) -> Result<CurvatureElements<S>> {
    let quarter = S::from_ratio(1, 4);
    let neg = S::from_i64(-1);
    let n = d.n;
    let e_tilde = d.r_e().add(&d.l1().scale(&neg))?;
    let p_tilde = d.r_e_perp().add(&d.l2().scale(&neg))?;
    Ok(CurvatureElements {
        rdot: chat_quadratic(n, 0, &d.r_e(), &quarter)?,
        rddot: chat_quadratic(n, d.k, &d.r_e_perp(), &quarter)?,
        rdot_tilde: chat_quadratic(n, 0, &e_tilde, &quarter)?,
        rddot_tilde: chat_quadratic(n, d.k, &p_tilde, &quarter)?,
    })
}

// ---------------------------------------------------------------------------
// Lift expansion

/// Both sides of the symbol expansion of the rotation lift in the bidegree
/// `((0, b), (0, l₂))`.
pub fn symbol_expansion_lift<S: FormRing>(d: &FixedPointData<S>, l2: usize) -> Result<(BigradedForm<S>, BigradedForm<S>)> {
    let (n, a, b) = (d.n, d.a, d.b());
    if a > n || b % 2 == 1 || d.phi_angles.len() != b / 2 {
        return usage("lift data does not match n and a");
    }
    if l2 > b {
        let z = BigradedForm::zero(n, a);
        return Ok((z.clone(), z));
    }
    let lift = rotation_lift::<S>(&d.phi_angles, n, a)?;
    let left = bigraded_component(&symbol(&lift).with_split(a)?, (0, b), (0, l2))?;

    let g = d.group_element();
    let log = g.log_blocks::<S>();
    let exponent = chat_quadratic(n, a, &log, &S::from_ratio(-1, 4))?;
    let e = clifford_exp(&exponent, EXP_TOL)?;
    let normal = BigradedForm::from_terms(n, a, [(BladePair::new(full_mask(n) & !full_mask(a), 0), S::one())])?;
    let scale = S::from_f64(0.5f64.powi((b / 2) as i32) * g.det_sqrt_one_minus()?);
    let right_full = normal.wedge(&symbol(&e).with_split(a)?)?.scale(&scale);
    let right = bigraded_component(&right_full, (0, b), (0, l2))?;
    Ok((left, right))
}

// ---------------------------------------------------------------------------
// Berezin coefficient identity

/// Input of the Berezin coefficient identity: `R^E - L_1` on `E` and `R^{E⊥} - L_2` on `E⊥`.
#[derive(Clone, Debug, PartialEq)]
pub struct BerezinInput<S: Scalar> {
    pub n: usize,
    pub k: usize,
    pub e_block: AntisymmetricMatrix<S>,
    pub perp_block: AntisymmetricMatrix<S>,
}

impl<S: RootRing> BerezinInput<S> {
    /// Block-form input: `θ_j` on `E`, `θ̂_l` on `E⊥`.
    pub fn from_angles(n: usize, k: usize, e_angles: &[f64], hat_angles: &[f64]) -> Result<Self> {
        let e: Vec<S> = e_angles.iter().map(|&t| S::from_f64(t)).collect();
        let h: Vec<S> = hat_angles.iter().map(|&t| S::from_f64(t)).collect();
        let input = BerezinInput {
            n,
            k,
            e_block: AntisymmetricMatrix::from_roots(&e, false),
            perp_block: AntisymmetricMatrix::from_roots(&h, false),
        };
        input.validate()?;
        Ok(input)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n % 2 == 1 || self.k % 2 == 1 || self.k > self.n {
            return usage(format!("Berezin identity needs even n and k with k <= n (got n = {}, k = {})", self.n, self.k));
        }
        if self.e_block.side() != self.k || self.perp_block.side() != self.n - self.k {
            return usage("block sizes do not match k and n - k");
        }
        Ok(())
    }
}

/// Top `ĉ`-degree coefficient of `σ[ĉ(f_1)..ĉ(f_k) exp(Ṙ̃ + R̈̃)]`.
pub fn berezin_lhs<S: RootRing>(input: &BerezinInput<S>) -> Result<S> {
    input.validate()?;
    let (n, k) = (input.n, input.k);
    let quarter = S::from_ratio(1, 4);
    let exponent = chat_quadratic(n, 0, &input.e_block, &quarter)?.checked_add(&chat_quadratic(n, k, &input.perp_block, &quarter)?)?;
    let x = chat_e::<S>(n, k)?.checked_mul(&clifford_exp(&exponent, EXP_TOL)?)?;
    Ok(symbol(&x).coeff(BladePair::new(0, full_mask(n))))
}

/// `(-1)^{(n-k)/2} det^{1/2} cosh(M_E/2) det^{1/2}(sinh(M_⊥/2)/(M_⊥/2)) Pf(M_⊥/2)`.
pub fn berezin_rhs<S: RootRing>(input: &BerezinInput<S>) -> Result<S> {
    input.validate()?;
    let half = S::from_ratio(1, 2);
    let sign = S::from_i64(if ((input.n - input.k) / 2).is_multiple_of(2) { 1 } else { -1 });
    let cosh = det_sqrt_cosh(&input.e_block, KernelPath::ChernRoots)?;
    let sinhc = det_sqrt_sinhc(&input.perp_block, KernelPath::ChernRoots)?;
    let pf = pfaffian_by(&input.perp_block.scale(&half), KernelPath::ChernRoots)?;
    Ok(sign * cosh * sinhc * pf)
}

// ---------------------------------------------------------------------------
// Mehler factor

/// The model heat-kernel factor, split into its parts.
#[derive(Clone, Debug, PartialEq)]
pub struct MehlerValue<S: Scalar> {
    /// `(4πt)^{-a/2} det^{1/2}((tR'/2)/sinh(tR'/2)) det^{-1/2}(1 - φ^N e^{-tR''}) / det^{1/2}(1 - φ^N)`.
    pub prefactor: S,
    /// `exp(t(Ṙ + R̈))`.
    pub exponential: CliffordElement<S>,
    /// `(√-1)^{k/2} ĉ(E)`.
    pub chat_e_factor: CliffordElement<S>,
}

pub fn mehler_value<S: FormRing>(d: &FixedPointData<S>, t: f64) -> Result<MehlerValue<S>> {
    if !(t > 0.0 && t.is_finite()) {
        return usage(format!("time t = {t} must be positive"));
    }
    let n = d.n;
    let ts = S::from_f64(t);
    let g = d.group_element();
    let side = g.side();
    let phi: Matrix<S> = g.matrix();
    let det0 = Matrix::identity(side).sub(&phi)?.det();
    // nu_phi expands det^{-1/2}(1 - φ^N e^{-M/2π}); feed it M = 2π t R''.
    let nu = nu_phi(&g, &d.r_double_prime().scale(&S::from_f64(t * normalization::FORM_SCALE)), KernelPath::Series)?;
    let sinhc = det_sqrt_sinhc(&d.r_prime().scale(&ts), KernelPath::Series)?;
    let inv_sinhc = sinhc.recip().ok_or_else(|| Error::Singular("pole of (tR'/2)/sinh(tR'/2)".into()))?;
    let heat = S::from_f64((normalization::HEAT_FIXED * t).powf(-(d.a as f64) / 2.0));
    // nu already carries one factor det^{-1/2}(1 - φ^N); a second one completes 1/det.
    let root = det0_sqrt_inverse(&det0)?;
    let prefactor = heat * inv_sinhc * nu * root;

    let quarter = S::from_ratio(1, 4);
    let exponent = chat_quadratic(n, 0, &d.r_e(), &quarter)?.checked_add(&chat_quadratic(n, d.k, &d.r_e_perp(), &quarter)?)?;
    let exponential = clifford_exp(&exponent.scale(&ts), EXP_TOL)?;
    let chat_e_factor = chat_e::<S>(n, d.k)?.scale(&times_i_pow(S::one(), (d.k / 2) as i64));
    Ok(MehlerValue { prefactor, exponential, chat_e_factor })
}

fn det0_sqrt_inverse<S: RootRing>(det0: &S) -> Result<S> {
    det0.sqrt().recip().ok_or_else(|| Error::Singular("det(1 - φ^N) vanishes".into()))
}

/// `exp(t(Ṙ + R̈))` as a product of per-plane factors `cos(tΩ/2) - sin(tΩ/2) ĉ ĉ`.
pub fn curvature_exponential_closed<S: FormRing>(d: &FixedPointData<S>, t: f64) -> Result<CliffordElement<S>> {
    let n = d.n;
    let mut acc = CliffordElement::one(n);
    for (p, w) in d.curvature.iter().enumerate() {
        let x = w.clone() * S::from_f64(t / 2.0);
        let pair = 0b11u32 << (2 * p);
        let factor = CliffordElement::from_terms(n, [(BladePair::ONE, x.cos()), (BladePair::new(0, pair), -x.sin())])?;
        acc = acc.checked_mul(&factor)?;
    }
    Ok(acc)
}

// ---------------------------------------------------------------------------
// Densities

/// Supertrace side of the density.
pub fn lhs_density<S: FormRing>(d: &FixedPointData<S>) -> Result<Complex64> {
    d.validate()?;
    let (n, a) = (d.n, d.a);
    let lift = rotation_lift::<S>(&d.phi_angles, n, a)?;
    let m = mehler_value(d, 1.0)?;
    let x = lift.checked_mul(&m.chat_e_factor)?.checked_mul(&m.exponential)?;
    let value = if a == 0 {
        supertrace(&x)
    } else {
        let word = BladePair::new(full_mask(n) & !full_mask(a), full_mask(n));
        x.coeff(word) * S::from_i64(supertrace_normalization(n))
    };
    Ok((value * m.prefactor).top_form(a))
}

/// Characteristic-form side of the density.
pub fn rhs_density<S: FormRing>(d: &FixedPointData<S>) -> Result<Complex64> {
    d.validate()?;
    let path = KernelPath::ChernRoots;
    let s = S::from_f64(normalization::DENSITY_CURVATURE);
    let neg_half = S::from_ratio(-1, 2);
    let two = S::from_i64(2);
    let x_e = d.r_e().scale(&s).add(&d.l1().scale(&neg_half))?;
    let x_perp = d.r_e_perp().scale(&s).add(&d.l2().scale(&neg_half))?;
    let a_hat = a_hat(&d.r_prime(), path)?;
    let nu = nu_phi(&d.group_element(), &d.r_double_prime(), path)?;
    // the kernels evaluate at half their argument
    let cosh = det_sqrt_cosh(&x_e.scale(&two), path)?;
    let sinhc = det_sqrt_sinhc(&x_perp.scale(&two), path)?;
    let pf = pfaffian_by(&x_perp, path)?;
    let scale = S::from_f64(2f64.powi((d.n / 2) as i32));
    let value = times_i_pow(scale * a_hat * nu * cosh * sinhc * pf, -((d.k / 2) as i64));
    Ok(value.top_form(d.a))
}

/// A pair of values from two independent paths.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityPair {
    pub lhs: Complex64,
    pub rhs: Complex64,
}

impl DensityPair {
    pub fn abs_err(&self) -> f64 {
        (self.lhs - self.rhs).norm()
    }

    /// `|lhs - rhs| / max(|lhs|, |rhs|)`, or the absolute error when both vanish.
    pub fn rel_err(&self) -> f64 {
        let scale = self.lhs.norm().max(self.rhs.norm());
        if scale == 0.0 {
            0.0
        } else {
            self.abs_err() / scale
        }
    }
}

pub fn density_pair<S: FormRing>(d: &FixedPointData<S>) -> Result<DensityPair> {
    Ok(DensityPair { lhs: lhs_density(d)?, rhs: rhs_density(d)? })
}

// ---------------------------------------------------------------------------
// Odd case

/// Isolated fixed point of an orientation-reversing isometry in odd
/// dimension: rotations on the planes `(2j-1, 2j)` and `e_n ↦ -e_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct OddFixedPointData {
    pub n: usize,
    pub k: usize,
    pub phi_angles: Vec<f64>,
}

impl OddFixedPointData {
    pub fn validate(&self) -> Result<()> {
        let (n, k) = (self.n, self.k);
        if n % 2 == 0 || n > MAX_N {
            return usage(format!("odd case needs odd n <= {MAX_N}, got {n}"));
        }
        if k % 2 == 1 || k >= n {
            return usage(format!("rank k = {k} must be even and below n"));
        }
        if self.phi_angles.len() != (n - 1) / 2 {
            return usage(format!("expected {} rotation angles, got {}", (n - 1) / 2, self.phi_angles.len()));
        }
        for (j, t) in self.phi_angles.iter().enumerate() {
            if (t / 2.0).sin().abs() < 1e-12 {
                return Err(Error::Singular(format!("rotation angle {} makes det(1 - dγ^N) vanish", j + 1)));
            }
        }
        Ok(())
    }

    pub fn group_element(&self) -> GroupElement {
        GroupElement { angles: self.phi_angles.clone(), reflected: true }
    }

    /// The self-adjoint lift `γ̃ = φ̃ (-c(e_n) ĉ(e_n)) ε`.
    pub fn lift(&self) -> Result<CliffordElement<Complex64>> {
        let n = self.n;
        let rot = planar_lift::<Complex64>(&self.phi_angles, n, 0)?;
        rot.checked_mul(&reflection_lift(n, n)?)?.checked_mul(&grading_element(n)?)
    }
}

/// `Tr[γ̃ ĉ(E)] / det(1 - dγ^N)` and `-(1/√-1)^{k/2-1} 2^{n/2} ν Â cosh sinhc Pf`.
pub fn odd_density_pair(d: &OddFixedPointData) -> Result<DensityPair> {
    d.validate()?;
    let (n, k) = (d.n, d.k);
    let g = d.group_element();
    let x = d.lift()?.checked_mul(&chat_e(n, k)?)?;
    // Tr[X] = Str[ε X]
    let trace = supertrace(&grading_element(n)?.checked_mul(&x)?);
    let det: Complex64 = Matrix::identity(n).sub(&g.matrix())?.det();
    let inv = det.recip().ok_or_else(|| Error::Singular("det(1 - dγ^N) vanishes".into()))?;
    let lhs = trace * inv;

    let path = KernelPath::ChernRoots;
    let c = |v: f64| Complex64::new(v, 0.0);
    let e_roots: Vec<Complex64> = d.phi_angles[..k / 2].iter().map(|&t| c(t / 2.0)).collect();
    let p_roots: Vec<Complex64> = d.phi_angles[k / 2..].iter().map(|&t| c(t / 2.0)).collect();
    let x_e = AntisymmetricMatrix::from_roots(&e_roots, false);
    let x_perp = AntisymmetricMatrix::from_roots(&p_roots, true);
    let nu = nu_phi(&g, &AntisymmetricMatrix::<Complex64>::zeros(n), path)?;
    let cosh = det_sqrt_cosh(&x_e.scale(&c(2.0)), path)?;
    let sinhc = det_sqrt_sinhc(&x_perp.scale(&c(2.0)), path)?;
    let pf = pfaffian_odd(&x_perp)?;
    let scale = c(-(2f64.powf(n as f64 / 2.0)));
    let rhs = times_i_pow(scale * nu * cosh * sinhc * pf, 1 - (k / 2) as i64);
    Ok(DensityPair { lhs, rhs })
}

/// Pfaffian through the Berezin definition, re-exported for density callers
/// that work with general (non-block) `E⊥` data.
pub fn berezin_pfaffian<S: Scalar>(m: &AntisymmetricMatrix<S>) -> Result<S> {
    pfaffian_berezin(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + b.norm())
    }

    #[test]
    fn half_turn_in_the_plane() {
        let d = FixedPointData::<Complex64>::flat(2, 0, 0, &[PI]);
        let p = density_pair(&d).unwrap();
        assert!(close(p.lhs, p.rhs, 1e-12), "{p:?}");
        assert!(close(p.lhs, Complex64::new(1.0, 0.0), 1e-12));
    }

    #[test]
    fn rank_two_in_dimension_four() {
        let d = FixedPointData::<Complex64>::flat(4, 0, 2, &[0.9, 2.3]);
        let p = density_pair(&d).unwrap();
        assert!(p.rel_err() < 1e-10, "{p:?}");
        // (1/√-1) cot(θ_1/2)
        let expect = Complex64::new(0.0, -1.0 / (0.45f64).tan());
        assert!(close(p.lhs, expect, 1e-12), "{p:?}");
    }

    #[test]
    fn full_rank_is_rejected() {
        let d = FixedPointData::<Complex64>::flat(4, 0, 4, &[0.9, 2.3]);
        assert!(matches!(lhs_density(&d), Err(Error::Usage(_))));
    }

    #[test]
    fn berezin_block_example() {
        let (t, h) = (0.7, 1.9);
        let input = BerezinInput::<Complex64>::from_angles(4, 2, &[t], &[h]).unwrap();
        let l = berezin_lhs(&input).unwrap();
        let r = berezin_rhs(&input).unwrap();
        let expect = -(t / 2.0).cos() * (h / 2.0).sin();
        assert!(close(l, Complex64::new(expect, 0.0), 1e-13), "{l}");
        assert!(close(r, Complex64::new(expect, 0.0), 1e-13), "{r}");
    }

    #[test]
    fn lift_expansion_single_plane() {
        let d = FixedPointData::<Complex64>::flat(2, 0, 0, &[1.2]);
        for l2 in [0, 2, 4] {
            let (l, r) = symbol_expansion_lift(&d, l2).unwrap();
            assert!(l.checked_sub(&r).unwrap().norm() < 1e-14, "l2 = {l2}: {l} vs {r}");
        }
    }

    #[test]
    fn mehler_prefactor_without_curvature() {
        let d = FixedPointData::<Complex64>::flat(2, 0, 0, &[PI / 2.0]);
        let m = mehler_value(&d, 1.0).unwrap();
        assert!(close(m.prefactor, Complex64::new(0.5, 0.0), 1e-14));
        assert_eq!(m.exponential, CliffordElement::one(2));
    }

    #[test]
    fn odd_rank_two_prefactor_sign() {
        let d = OddFixedPointData { n: 5, k: 2, phi_angles: vec![0.8, 2.0] };
        let p = odd_density_pair(&d).unwrap();
        assert!(p.rel_err() < 1e-10, "{p:?}");
    }
}
