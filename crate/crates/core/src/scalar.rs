//! Pluggable coefficient rings.
//!
//! Three rings are provided:
//!
//! * [`GaussQ`]: exact Gaussian rationals, for sign and combinatorial identities;
//! * [`Complex64`]: complex doubles, for closed forms involving angles;
//! * [`Nil`]: truncated polynomials over complex doubles in commuting square-zero
//!   generators, standing in for curvature 2-forms so that every
//!   characteristic-form series terminates.
//!
//! Zero tests are exact in every ring. Float coefficients are never pruned
//! against an epsilon.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

pub use num_complex::Complex64;

/// Tag naming the ring an element lives in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RingKind {
    GaussianRational,
    Complex,
    Nilpotent,
}

impl fmt::Display for RingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RingKind::GaussianRational => "gaussian-rational",
            RingKind::Complex => "complex",
            RingKind::Nilpotent => "nilpotent",
        })
    }
}

pub trait Scalar:
    Clone
    + fmt::Debug
    + fmt::Display
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    const RING: RingKind;

    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn from_i64(v: i64) -> Self;
    /// `num / den`; panics on `den == 0`.
    fn from_ratio(num: i64, den: i64) -> Self;
    /// Exact in the rational ring (every finite double is a dyadic rational).
    fn from_f64(v: f64) -> Self;
    fn imag_unit() -> Self;
    /// Multiplicative inverse, `None` when the element is not a unit.
    fn recip(&self) -> Option<Self>;
    /// A size used for pivot choice and series convergence tests.
    fn magnitude(&self) -> f64;
    /// Lossy projection to a complex double (the constant term for [`Nil`]).
    fn to_complex(&self) -> Complex64;

    fn scale(&self, s: &Self) -> Self {
        self.clone() * s.clone()
    }
}

/// Rings carrying the transcendental functions used by the characteristic forms.
pub trait Analytic: Scalar {
    fn exp(&self) -> Self;
    fn cos(&self) -> Self;
    fn sin(&self) -> Self;
    fn cosh(&self) -> Self;
    fn sinh(&self) -> Self;
    /// Principal branch.
    fn sqrt(&self) -> Self;
    /// Principal branch.
    fn ln(&self) -> Self;
    /// `sin(x)/x`, entire.
    fn sinc(&self) -> Self;
    /// `sinh(x)/x`, entire.
    fn sinhc(&self) -> Self;
}

// ---------------------------------------------------------------------------
// Gaussian rationals

/// Exact complex number with rational real and imaginary parts.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GaussQ {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussQ {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussQ { re, im }
    }

    pub fn real(re: BigRational) -> Self {
        GaussQ { re, im: BigRational::zero() }
    }

    pub fn conj(&self) -> Self {
        GaussQ { re: self.re.clone(), im: -self.im.clone() }
    }
}

impl Add for GaussQ {
    type Output = GaussQ;
    fn add(self, o: GaussQ) -> GaussQ {
        GaussQ { re: self.re + o.re, im: self.im + o.im }
    }
}

impl Sub for GaussQ {
    type Output = GaussQ;
    fn sub(self, o: GaussQ) -> GaussQ {
        GaussQ { re: self.re - o.re, im: self.im - o.im }
    }
}

impl Mul for GaussQ {
    type Output = GaussQ;
    fn mul(self, o: GaussQ) -> GaussQ {
        if self.im.is_zero() && o.im.is_zero() {
            return GaussQ::real(self.re * o.re);
        }
        GaussQ {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }
}

impl Neg for GaussQ {
    type Output = GaussQ;
    fn neg(self) -> GaussQ {
        GaussQ { re: -self.re, im: -self.im }
    }
}

fn fmt_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

impl fmt::Display for GaussQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", fmt_rational(&self.re)),
            (true, false) => write!(f, "{}i", fmt_rational(&self.im)),
            (false, false) => {
                let sign = if self.im.is_negative() { "-" } else { "+" };
                write!(f, "({}{}{}i)", fmt_rational(&self.re), sign, fmt_rational(&self.im.abs()))
            }
        }
    }
}

fn rational_to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

impl Scalar for GaussQ {
    const RING: RingKind = RingKind::GaussianRational;

    fn zero() -> Self {
        GaussQ::real(BigRational::zero())
    }
    fn one() -> Self {
        GaussQ::real(BigRational::one())
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    fn from_i64(v: i64) -> Self {
        GaussQ::real(BigRational::from_integer(BigInt::from(v)))
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        GaussQ::real(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }
    fn from_f64(v: f64) -> Self {
        GaussQ::real(BigRational::from_float(v).expect("finite float"))
    }
    fn imag_unit() -> Self {
        GaussQ::new(BigRational::zero(), BigRational::one())
    }
    fn recip(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let norm = &self.re * &self.re + &self.im * &self.im;
        Some(GaussQ { re: &self.re / &norm, im: -(&self.im / &norm) })
    }
    fn magnitude(&self) -> f64 {
        self.to_complex().norm()
    }
    fn to_complex(&self) -> Complex64 {
        Complex64::new(rational_to_f64(&self.re), rational_to_f64(&self.im))
    }
}

// ---------------------------------------------------------------------------
// Complex doubles

fn fmt_f64(v: f64) -> String {
    // Shortest round-trip representation; deterministic across runs.
    format!("{v:?}")
}

impl Scalar for Complex64 {
    const RING: RingKind = RingKind::Complex;

    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn from_i64(v: i64) -> Self {
        Complex64::new(v as f64, 0.0)
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Complex64::new(num as f64 / den as f64, 0.0)
    }
    fn from_f64(v: f64) -> Self {
        Complex64::new(v, 0.0)
    }
    fn imag_unit() -> Self {
        Complex64::new(0.0, 1.0)
    }
    fn recip(&self) -> Option<Self> {
        if Scalar::is_zero(self) {
            None
        } else {
            Some(self.inv())
        }
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn to_complex(&self) -> Complex64 {
        *self
    }
}

/// Power series `sum coeff(j) x^j` evaluated in a ring, stopped once two
/// consecutive terms fall below `1e-18` in magnitude.
fn power_series<S: Scalar>(x: &S, coeff: impl Fn(usize) -> f64, max_terms: usize) -> S {
    let mut acc = S::zero();
    let mut pow = S::one();
    let mut small = 0;
    for j in 0..max_terms {
        let c = coeff(j);
        if c != 0.0 {
            let term = pow.clone() * S::from_f64(c);
            let mag = term.magnitude();
            acc = acc + term;
            if mag < 1e-18 {
                small += 1;
                if small >= 2 {
                    break;
                }
            } else {
                small = 0;
            }
        }
        pow = pow * x.clone();
        if pow.is_zero() {
            break;
        }
    }
    acc
}

fn sinc_coeff(j: usize) -> f64 {
    if j % 2 == 1 {
        return 0.0;
    }
    let i = j / 2;
    let mut f = 1.0;
    for m in 2..=(2 * i + 1) {
        f *= m as f64;
    }
    if i.is_multiple_of(2) {
        1.0 / f
    } else {
        -1.0 / f
    }
}

fn sinhc_coeff(j: usize) -> f64 {
    sinc_coeff(j).abs()
}

impl Analytic for Complex64 {
    fn exp(&self) -> Self {
        Complex64::exp(*self)
    }
    fn cos(&self) -> Self {
        Complex64::cos(*self)
    }
    fn sin(&self) -> Self {
        Complex64::sin(*self)
    }
    fn cosh(&self) -> Self {
        Complex64::cosh(*self)
    }
    fn sinh(&self) -> Self {
        Complex64::sinh(*self)
    }
    fn sqrt(&self) -> Self {
        Complex64::sqrt(*self)
    }
    fn ln(&self) -> Self {
        Complex64::ln(*self)
    }
    fn sinc(&self) -> Self {
        if self.norm() < 0.5 {
            power_series(self, sinc_coeff, 64)
        } else {
            Complex64::sin(*self) / *self
        }
    }
    fn sinhc(&self) -> Self {
        if self.norm() < 0.5 {
            power_series(self, sinhc_coeff, 64)
        } else {
            Complex64::sinh(*self) / *self
        }
    }
}

// ---------------------------------------------------------------------------
// Truncated nilpotent polynomials

/// Element of `C[eps_1..eps_m] / (eps_i^2)`.
///
/// Coefficients are indexed by the bit-mask of the monomial. Elements with
/// fewer generators are padded with zeros when combined, so constants mix
/// freely with elements of any generator count.
#[derive(Clone, Debug)]
pub struct Nil {
    coeffs: Vec<Complex64>,
}

impl Nil {
    pub const MAX_GENERATORS: usize = 12;

    pub fn constant(c: Complex64) -> Self {
        Nil { coeffs: vec![c] }
    }

    /// The generator `eps_index` (0-based) in a ring with `count` generators.
    pub fn generator(index: usize, count: usize) -> Self {
        assert!(index < count && count <= Self::MAX_GENERATORS);
        let mut coeffs = vec![Complex64::new(0.0, 0.0); 1 << count];
        coeffs[1 << index] = Complex64::new(1.0, 0.0);
        Nil { coeffs }
    }

    pub fn from_coeffs(coeffs: Vec<Complex64>) -> Self {
        assert!(coeffs.len().is_power_of_two(), "coefficient count must be a power of two");
        Nil { coeffs }
    }

    pub fn generators(&self) -> usize {
        self.coeffs.len().trailing_zeros() as usize
    }

    pub fn coeff(&self, monomial: usize) -> Complex64 {
        self.coeffs.get(monomial).copied().unwrap_or_default()
    }

    pub fn constant_term(&self) -> Complex64 {
        self.coeffs[0]
    }

    /// Coefficient of `eps_1 eps_2 .. eps_m`.
    pub fn top_coefficient(&self, m: usize) -> Complex64 {
        self.coeff((1usize << m) - 1)
    }

    /// The nilpotent part `x - x_0`.
    pub fn nilpotent_part(&self) -> Nil {
        let mut out = self.clone();
        out.coeffs[0] = Complex64::new(0.0, 0.0);
        out
    }

    fn padded(&self, len: usize) -> Vec<Complex64> {
        let mut v = self.coeffs.clone();
        v.resize(len, Complex64::new(0.0, 0.0));
        v
    }

    /// `f(x0 + N) = sum_j f^(j)(x0) N^j / j!`; `derivs(x0, j)` returns `f^(j)(x0)`.
    fn taylor(&self, derivs: impl Fn(Complex64, usize) -> Complex64) -> Nil {
        let x0 = self.constant_term();
        let n = self.nilpotent_part();
        let m = self.generators();
        let mut acc = Nil::constant(derivs(x0, 0));
        let mut pow = Nil::constant(Complex64::new(1.0, 0.0));
        let mut fact = 1.0;
        for j in 1..=m {
            pow = pow * n.clone();
            if Scalar::is_zero(&pow) {
                break;
            }
            fact *= j as f64;
            acc = acc + pow.clone() * Nil::constant(derivs(x0, j) / fact);
        }
        acc
    }
}

impl PartialEq for Nil {
    fn eq(&self, other: &Nil) -> bool {
        let len = self.coeffs.len().max(other.coeffs.len());
        self.padded(len) == other.padded(len)
    }
}

impl Add for Nil {
    type Output = Nil;
    fn add(self, o: Nil) -> Nil {
        let len = self.coeffs.len().max(o.coeffs.len());
        let mut a = self.padded(len);
        for (x, y) in a.iter_mut().zip(o.coeffs.iter()) {
            *x += *y;
        }
        Nil { coeffs: a }
    }
}

impl Sub for Nil {
    type Output = Nil;
    fn sub(self, o: Nil) -> Nil {
        self + (-o)
    }
}

impl Neg for Nil {
    type Output = Nil;
    fn neg(self) -> Nil {
        Nil { coeffs: self.coeffs.into_iter().map(|c| -c).collect() }
    }
}

impl Mul for Nil {
    type Output = Nil;
    fn mul(self, o: Nil) -> Nil {
        let len = self.coeffs.len().max(o.coeffs.len());
        let mut out = vec![Complex64::new(0.0, 0.0); len];
        for (i, a) in self.coeffs.iter().enumerate() {
            if Scalar::is_zero(a) {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                if i & j == 0 && !Scalar::is_zero(b) {
                    out[i | j] += *a * *b;
                }
            }
        }
        Nil { coeffs: out }
    }
}

impl fmt::Display for Nil {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        f.write_str("[")?;
        for (mono, c) in self.coeffs.iter().enumerate() {
            if Scalar::is_zero(c) && !(mono == 0 && self.coeffs.iter().all(Scalar::is_zero)) {
                continue;
            }
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            f.write_str(&fmt_complex(c))?;
            for g in 0..self.generators() {
                if mono >> g & 1 == 1 {
                    write!(f, "*eps{}", g + 1)?;
                }
            }
        }
        f.write_str("]")
    }
}

impl Scalar for Nil {
    const RING: RingKind = RingKind::Nilpotent;

    fn zero() -> Self {
        Nil::constant(Complex64::new(0.0, 0.0))
    }
    fn one() -> Self {
        Nil::constant(Complex64::new(1.0, 0.0))
    }
    fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Scalar::is_zero)
    }
    fn from_i64(v: i64) -> Self {
        Nil::constant(Complex64::from_i64(v))
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        Nil::constant(Complex64::from_ratio(num, den))
    }
    fn from_f64(v: f64) -> Self {
        Nil::constant(Complex64::new(v, 0.0))
    }
    fn imag_unit() -> Self {
        Nil::constant(Complex64::new(0.0, 1.0))
    }
    fn recip(&self) -> Option<Self> {
        let x0 = self.constant_term();
        if Scalar::is_zero(&x0) {
            return None;
        }
        // 1/x^(j) = (-1)^j j! / x^(j+1)
        Some(self.taylor(|x0, j| {
            let mut fact = 1.0;
            for m in 2..=j {
                fact *= m as f64;
            }
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            sign * fact / x0.powu(j as u32 + 1)
        }))
    }
    fn magnitude(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).sum()
    }
    fn to_complex(&self) -> Complex64 {
        self.constant_term()
    }
}

/// Canonical text for a complex double: `(re, im)` in shortest round-trip form.
pub fn fmt_complex(c: &Complex64) -> String {
    format!("({}, {})", fmt_f64(c.re), fmt_f64(c.im))
}

fn cyclic(values: [Complex64; 4], j: usize) -> Complex64 {
    values[j % 4]
}

impl Analytic for Nil {
    fn exp(&self) -> Self {
        self.taylor(|x0, _| x0.exp())
    }
    fn cos(&self) -> Self {
        self.taylor(|x0, j| {
            let (c, s) = (x0.cos(), x0.sin());
            cyclic([c, -s, -c, s], j)
        })
    }
    fn sin(&self) -> Self {
        self.taylor(|x0, j| {
            let (c, s) = (x0.cos(), x0.sin());
            cyclic([s, c, -s, -c], j)
        })
    }
    fn cosh(&self) -> Self {
        self.taylor(|x0, j| if j % 2 == 0 { x0.cosh() } else { x0.sinh() })
    }
    fn sinh(&self) -> Self {
        self.taylor(|x0, j| if j % 2 == 0 { x0.sinh() } else { x0.cosh() })
    }
    fn sqrt(&self) -> Self {
        self.taylor(|x0, j| {
            let mut d = x0.sqrt();
            for i in 0..j {
                d = d * (0.5 - i as f64) / x0;
            }
            d
        })
    }
    fn ln(&self) -> Self {
        self.taylor(|x0, j| {
            if j == 0 {
                return x0.ln();
            }
            let mut fact = 1.0;
            for m in 2..j {
                fact *= m as f64;
            }
            let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
            sign * fact / x0.powu(j as u32)
        })
    }
    fn sinc(&self) -> Self {
        if self.constant_term().norm() < 0.5 {
            power_series(self, sinc_coeff, 64)
        } else {
            Analytic::sin(self) * self.recip().expect("nonzero constant term")
        }
    }
    fn sinhc(&self) -> Self {
        if self.constant_term().norm() < 0.5 {
            power_series(self, sinhc_coeff, 64)
        } else {
            Analytic::sinh(self) * self.recip().expect("nonzero constant term")
        }
    }
}

/// Multiply by `(sqrt(-1))^p` exactly, for any integer `p`.
pub fn times_i_pow<S: Scalar>(x: S, p: i64) -> S {
    match p.rem_euclid(4) {
        0 => x,
        1 => x * S::imag_unit(),
        2 => -x,
        _ => -(x * S::imag_unit()),
    }
}

/// `(-1)^p`.
pub fn sign_pow(p: i64) -> i64 {
    if p.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn gaussian_rational_field_ops() {
        let a = GaussQ::from_ratio(3, 4) + GaussQ::imag_unit();
        let inv = a.recip().unwrap();
        assert_eq!(a.clone() * inv, GaussQ::one());
        assert!(GaussQ::zero().recip().is_none());
        assert_eq!((GaussQ::imag_unit() * GaussQ::imag_unit()), GaussQ::from_i64(-1));
        assert_eq!(a.to_string(), "(3/4+1i)");
    }

    #[test]
    fn from_f64_is_exact_for_dyadics() {
        assert_eq!(GaussQ::from_f64(0.375), GaussQ::from_ratio(3, 8));
    }

    #[test]
    fn nilpotent_generators_square_to_zero_and_commute() {
        let e1 = Nil::generator(0, 2);
        let e2 = Nil::generator(1, 2);
        assert!((e1.clone() * e1.clone()).is_zero());
        assert_eq!(e1.clone() * e2.clone(), e2.clone() * e1.clone());
        assert_eq!((e1 * e2).top_coefficient(2), c(1.0));
    }

    #[test]
    fn nilpotent_taylor_matches_first_order() {
        // exp(x0 + e) = exp(x0)(1 + e)
        let x = Nil::constant(c(0.3)) + Nil::generator(0, 1);
        let y = Analytic::exp(&x);
        assert!((y.coeff(0) - c(0.3f64.exp())).norm() < 1e-15);
        assert!((y.coeff(1) - c(0.3f64.exp())).norm() < 1e-15);
    }

    #[test]
    fn nilpotent_second_order_terms() {
        // cos(x0 + e1 + e2) has e1 e2 coefficient -cos(x0)
        let x = Nil::constant(c(0.7)) + Nil::generator(0, 2) + Nil::generator(1, 2);
        let y = Analytic::cos(&x);
        assert!((y.top_coefficient(2) + c(0.7f64.cos())).norm() < 1e-15);
        let r = x.recip().unwrap() * x.clone();
        assert!((r - Nil::one()).magnitude() < 1e-14);
        let s = Analytic::sqrt(&x);
        assert!(((s.clone() * s) - x.clone()).magnitude() < 1e-14);
        let l = Analytic::ln(&x);
        assert!((Analytic::exp(&l) - x).magnitude() < 1e-14);
    }

    #[test]
    fn sinc_family_near_and_away_from_zero() {
        for v in [0.0, 1e-9, 0.3, 0.49, 0.51, 2.0] {
            let x = c(v);
            let expect = if v == 0.0 { 1.0 } else { v.sin() / v };
            assert!((Analytic::sinc(&x) - c(expect)).norm() < 1e-15, "{v}");
            let expect_h = if v == 0.0 { 1.0 } else { v.sinh() / v };
            assert!((Analytic::sinhc(&x) - c(expect_h)).norm() < 1e-15, "{v}");
        }
        // pure nilpotent argument: sinc(e) = 1, sinc(e1+e2) = 1 - (2 e1 e2)/6
        let x = Nil::generator(0, 2) + Nil::generator(1, 2);
        let y = Analytic::sinc(&x);
        assert!((y.top_coefficient(2) - c(-1.0 / 3.0)).norm() < 1e-15);
    }

    #[test]
    fn imaginary_powers() {
        assert_eq!(times_i_pow(GaussQ::one(), 2), GaussQ::from_i64(-1));
        assert_eq!(times_i_pow(GaussQ::one(), -1), -GaussQ::imag_unit());
        assert_eq!(sign_pow(-3), -1);
    }
}
