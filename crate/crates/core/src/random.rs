//! Seeded generators for randomized trials.
//!
//! Each trial draws from its own ChaCha stream, so results do not depend on
//! how trials are spread over threads.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::blade::{full_mask, BladePair, CliffordElement};
use crate::forms::AntisymmetricMatrix;
use crate::scalar::Scalar;
use crate::scalar::{Complex64, GaussQ, Nil};

/// Margin kept between random angles and the degenerate values `0, 2π`.
pub const ANGLE_MARGIN: f64 = 0.2;

pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Angles uniform in `[margin, 2π - margin]`.
pub fn angles(rng: &mut impl Rng, count: usize, margin: f64) -> Vec<f64> {
    let tau = std::f64::consts::TAU;
    (0..count).map(|_| rng.gen_range(margin..tau - margin)).collect()
}

/// Small Gaussian rational: `p/q + i r/s` with `|p|, |r| <= 5`, `q, s <= 4`.
pub fn gauss_rational(rng: &mut impl Rng) -> GaussQ {
    fn part(rng: &mut impl Rng) -> BigRational {
        BigRational::new(BigInt::from(rng.gen_range(-5i64..=5)), BigInt::from(rng.gen_range(1i64..=4)))
    }
    let re = part(rng);
    let im = if rng.gen_bool(0.3) { part(rng) } else { BigRational::from_integer(BigInt::from(0)) };
    GaussQ::new(re, im)
}

fn random_pair(rng: &mut impl Rng, n: usize) -> BladePair {
    let full = full_mask(n);
    BladePair::new(rng.gen::<u32>() & full, rng.gen::<u32>() & full)
}

/// Random element with up to `terms` blade pairs and Gaussian rational coefficients.
pub fn exact_element(rng: &mut impl Rng, n: usize, terms: usize) -> CliffordElement<GaussQ> {
    let list: Vec<_> = (0..terms).map(|_| (random_pair(rng, n), gauss_rational(rng))).collect();
    CliffordElement::from_terms(n, list).expect("blades fit by construction")
}

/// Random element with complex coefficients in the unit square.
pub fn float_element(rng: &mut impl Rng, n: usize, terms: usize) -> CliffordElement<Complex64> {
    let list: Vec<_> = (0..terms)
        .map(|_| (random_pair(rng, n), Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))))
        .collect();
    CliffordElement::from_terms(n, list).expect("blades fit by construction")
}

/// Real antisymmetric matrix with standard normal-ish entries, rescaled so
/// that its largest Chern root is `radius`.
pub fn antisymmetric(rng: &mut impl Rng, side: usize, radius: f64) -> AntisymmetricMatrix<Complex64> {
    let upper: Vec<f64> = (0..side * side.saturating_sub(1) / 2).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let m = AntisymmetricMatrix::from_real(side, &upper).expect("sized by construction");
    let r = m.spectral_radius();
    if r > 0.0 {
        m.scale(&Complex64::new(radius / r, 0.0))
    } else {
        m
    }
}

/// Exact antisymmetric matrix with small integer-over-small-integer entries.
pub fn antisymmetric_exact(rng: &mut impl Rng, side: usize) -> AntisymmetricMatrix<GaussQ> {
    let mut m = AntisymmetricMatrix::zeros(side);
    for i in 0..side {
        for j in i + 1..side {
            let v = BigRational::new(BigInt::from(rng.gen_range(-6i64..=6)), BigInt::from(rng.gen_range(1i64..=3)));
            m.set(i, j, GaussQ::real(v)).expect("in range");
        }
    }
    m
}

/// Curvature `Ω_p = Σ_q c_{pq} ε_q` for the `n/2` planes with `a/2`
/// nilpotent generators and `c_{pq}` uniform in `[-1, 1]`.
pub fn nil_curvature(rng: &mut impl Rng, n: usize, a: usize) -> Vec<Nil> {
    (0..n / 2)
        .map(|_| {
            (0..a / 2).fold(Nil::zero(), |acc, q| {
                acc + Nil::generator(q, a / 2) * Nil::constant(Complex64::new(rng.gen_range(-1.0..1.0), 0.0))
            })
        })
        .collect()
}

/// Special orthogonal matrix (row-major) as a product of random plane rotations.
pub fn special_orthogonal(rng: &mut impl Rng, side: usize) -> Vec<f64> {
    let mut q = vec![0.0; side * side];
    for i in 0..side {
        q[i * side + i] = 1.0;
    }
    for _ in 0..2 {
        for p in 0..side {
            for r in p + 1..side {
                let a: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                let (c, s) = (a.cos(), a.sin());
                for k in 0..side {
                    let (x, y) = (q[p * side + k], q[r * side + k]);
                    q[p * side + k] = c * x - s * y;
                    q[r * side + k] = s * x + c * y;
                }
            }
        }
    }
    q
}
