//! The harmonic-oscillator factor of the model heat kernel and a
//! finite-difference oracle for it.
//!
//! With a real antisymmetric coupling `B` the model operator is
//! `Σ_i (∂_i + ¼ (By)_i)^2 = Δ + ½ (By)·∇ + (1/16)|By|^2`, so the heat
//! equation solved here is
//!
//! ```text
//! u_t = Δu + ½ (By)·∇u + (1/16)|By|^2 u.
//! ```
//!
//! Its kernel on the diagonal at the origin, divided by the free kernel, is
//! `det^{1/2}((tB/2)/sinh(tB/2))`. For a block with angle `θ` this is
//! `(tθ/2)/sin(tθ/2) = 1 + (tθ)^2/24 + O(t^4)`, increasing in `t` up to the
//! pole at `tθ = 2π`.

use rayon::prelude::*;

use crate::error::{usage, Error, Result};
use crate::forms::{det_sqrt_sinhc, AntisymmetricMatrix, KernelPath};
use crate::scalar::Complex64;

/// Explicit step as a fraction of `h^2`.
pub const DT_FACTOR: f64 = 1.0 / 8.0;
/// Width of the initial Gaussian in grid cells.
pub const INITIAL_WIDTH_CELLS: f64 = 2.0;

/// Coupling, grid and time step of one finite-difference run.
#[derive(Clone, Debug, PartialEq)]
pub struct OscillatorSpec {
    /// Dimension `m`, 1 or 2.
    pub m: usize,
    /// Row-major `m × m` antisymmetric coupling.
    pub b: Vec<f64>,
    /// Half-width of the square domain `[-L, L]^m`.
    pub extent: f64,
    pub spacing: f64,
    pub dt: f64,
}

fn coupling_norm(b: &[f64]) -> f64 {
    b.iter().map(|x| x * x).sum::<f64>().sqrt() / std::f64::consts::SQRT_2
}

impl OscillatorSpec {
    /// Default grid for time `t`: extent `6 √t max(1, ‖B‖)` rounded up to a
    /// whole number of cells, and `dt = h^2/8`.
    pub fn new(m: usize, b: Vec<f64>, spacing: f64, t: f64) -> Result<Self> {
        let extent_min = 6.0 * t.sqrt() * coupling_norm(&b).max(1.0);
        let cells = (extent_min / spacing).ceil();
        let spec = OscillatorSpec { m, b, extent: cells * spacing, spacing, dt: DT_FACTOR * spacing * spacing };
        spec.validate(t)?;
        Ok(spec)
    }

    /// Planar coupling `[[0, -θ], [θ, 0]]`.
    pub fn planar(theta: f64, spacing: f64, t: f64) -> Result<Self> {
        Self::new(2, vec![0.0, -theta, theta, 0.0], spacing, t)
    }

    pub fn validate(&self, t: f64) -> Result<()> {
        let m = self.m;
        if !(m == 1 || m == 2) {
            return usage(format!("oscillator dimension m = {m} must be 1 or 2"));
        }
        if self.b.len() != m * m {
            return usage("coupling has the wrong size");
        }
        for i in 0..m {
            for j in 0..m {
                if self.b[i * m + j] != -self.b[j * m + i] {
                    return usage("coupling must be antisymmetric");
                }
            }
        }
        if !(t > 0.0 && t.is_finite()) {
            return usage(format!("time t = {t} must be positive"));
        }
        if !(self.spacing > 0.0) {
            return usage("grid spacing must be positive");
        }
        if self.extent + 1e-12 < 6.0 * t.sqrt() * coupling_norm(&self.b).max(1.0) {
            return usage("grid extent must be at least 6 √t max(1, ‖B‖)");
        }
        if !(self.dt > 0.0) || self.dt > self.spacing * self.spacing / (2.0 * m as f64) {
            return usage("time step violates the explicit stability bound h^2/(2m)");
        }
        Ok(())
    }

    /// The coupling as an antisymmetric matrix.
    pub fn coupling(&self) -> Result<AntisymmetricMatrix<Complex64>> {
        AntisymmetricMatrix::from_real(
            self.m,
            &(0..self.m).flat_map(|i| (i + 1..self.m).map(move |j| (i, j))).map(|(i, j)| self.b[i * self.m + j]).collect::<Vec<_>>(),
        )
    }
}

/// `det^{1/2}((tB/2)/sinh(tB/2))`.
pub fn closed_form_trace_factor(b: &AntisymmetricMatrix<Complex64>, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return usage(format!("time t = {t} must be positive"));
    }
    let s = det_sqrt_sinhc(&b.scale(&Complex64::new(t, 0.0)), KernelPath::ChernRoots)?;
    if s.norm() < 1e-12 {
        return Err(Error::Numeric(format!("oscillator factor has a pole at t = {t}")));
    }
    Ok((Complex64::new(1.0, 0.0) / s).re)
}

/// Planar convenience form of [`closed_form_trace_factor`].
pub fn closed_form_planar(theta: f64, t: f64) -> Result<f64> {
    closed_form_trace_factor(&AntisymmetricMatrix::from_roots(&[Complex64::new(theta, 0.0)], false), t)
}

struct Grid {
    cells: usize,
    side: usize,
    h: f64,
}

impl Grid {
    fn coord(&self, i: usize) -> f64 {
        (i as f64 - self.cells as f64) * self.h
    }
}

/// Value at the origin of the solution started from a Gaussian of width
/// `2h` (the free kernel at time `s0 = 2h^2`) and evolved to `t`.
fn evolve_at_origin(spec: &OscillatorSpec, t: f64, coupled: bool) -> Result<f64> {
    let h = spec.spacing;
    let cells = (spec.extent / h).round() as usize;
    let grid = Grid { cells, side: 2 * cells + 1, h };
    let sigma = INITIAL_WIDTH_CELLS * h;
    let s0 = sigma * sigma / 2.0;
    if s0 >= t {
        return usage(format!("grid spacing {h} is too coarse for t = {t}"));
    }
    let steps = ((t - s0) / spec.dt).ceil() as usize;
    let dt = (t - s0) / steps as f64;
    let m = spec.m;
    let b = if coupled { spec.b.clone() } else { vec![0.0; m * m] };
    let n = grid.side;
    let total = if m == 1 { n } else { n * n };
    let norm = (4.0 * std::f64::consts::PI * s0).powf(-(m as f64) / 2.0);
    let mut u = vec![0.0; total];
    for idx in 0..total {
        let (i, j) = (idx % n, idx / n);
        let r2 = if m == 1 { grid.coord(i).powi(2) } else { grid.coord(i).powi(2) + grid.coord(j).powi(2) };
        u[idx] = norm * (-r2 / (4.0 * s0)).exp();
    }
    let peak = norm;
    let mut next = vec![0.0; total];
    let inv_h2 = 1.0 / (h * h);
    let inv_2h = 1.0 / (2.0 * h);
    for step in 0..steps {
        if m == 1 {
            for i in 1..n - 1 {
                next[i] = u[i] + dt * (u[i + 1] - 2.0 * u[i] + u[i - 1]) * inv_h2;
            }
        } else {
            for j in 1..n - 1 {
                let y2 = grid.coord(j);
                for i in 1..n - 1 {
                    let y1 = grid.coord(i);
                    let idx = j * n + i;
                    let by1 = b[0] * y1 + b[1] * y2;
                    let by2 = b[2] * y1 + b[3] * y2;
                    let c = u[idx];
                    let lap = (u[idx + 1] + u[idx - 1] + u[idx + n] + u[idx - n] - 4.0 * c) * inv_h2;
                    let grad1 = (u[idx + 1] - u[idx - 1]) * inv_2h;
                    let grad2 = (u[idx + n] - u[idx - n]) * inv_2h;
                    let drift = 0.5 * (by1 * grad1 + by2 * grad2);
                    let potential = (by1 * by1 + by2 * by2) / 16.0 * c;
                    next[idx] = c + dt * (lap + drift + potential);
                }
            }
        }
        std::mem::swap(&mut u, &mut next);
        if step % 64 == 0 {
            let max = u.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            if !max.is_finite() || max > 1e6 * peak {
                return Err(Error::Numeric(format!("finite-difference solution blew up at step {step}")));
            }
        }
    }
    let centre = if m == 1 { cells } else { cells * n + cells };
    Ok(u[centre])
}

/// Diagonal heat-kernel value at the origin, normalized by the free kernel
/// computed with the same scheme.
pub fn fd_heat_trace(spec: &OscillatorSpec, t: f64) -> Result<f64> {
    spec.validate(t)?;
    let (coupled, free) = rayon::join(|| evolve_at_origin(spec, t, true), || evolve_at_origin(spec, t, false));
    Ok(coupled? / free?)
}

/// One grid of a refinement study.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub spacing: f64,
    pub fd: f64,
    pub closed: f64,
    pub error: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceStudy {
    pub m: usize,
    /// Row-major coupling.
    pub coupling: Vec<f64>,
    pub t: f64,
    pub rows: Vec<ConvergenceRow>,
    /// `log2(e_i / e_{i+1})` for successive halvings.
    pub orders: Vec<f64>,
}

impl ConvergenceStudy {
    pub fn finest_error(&self) -> f64 {
        self.rows.last().map(|r| r.error).unwrap_or(f64::INFINITY)
    }

    /// CSV with header `spacing,fd,closed,error`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("spacing,fd,closed,error\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{},{}\n", r.spacing, r.fd, r.closed, r.error));
        }
        out
    }
}

/// Accepted range for the observed order on the finest pair of grids.
/// Coarse pairs sit above 2 before the error settles into its `h^2` regime.
pub const ORDER_BAND: (f64, f64) = (1.7, 2.5);

/// Default refinement ladder.
pub const DEFAULT_SPACINGS: [f64; 4] = [0.2, 0.1, 0.05, 0.025];

/// Planar refinement study.
pub fn convergence_study(theta: f64, t: f64, spacings: &[f64]) -> Result<ConvergenceStudy> {
    convergence_study_with(2, vec![0.0, -theta, theta, 0.0], t, spacings)
}

/// Refinement study for a general coupling; grids run in parallel, rows keep
/// the input order.
pub fn convergence_study_with(m: usize, coupling: Vec<f64>, t: f64, spacings: &[f64]) -> Result<ConvergenceStudy> {
    let Some(&first) = spacings.first() else {
        return usage("at least one grid spacing is required");
    };
    let closed = closed_form_trace_factor(&OscillatorSpec::new(m, coupling.clone(), first, t)?.coupling()?, t)?;
    let rows = spacings
        .par_iter()
        .map(|&h| {
            let spec = OscillatorSpec::new(m, coupling.clone(), h, t)?;
            let fd = fd_heat_trace(&spec, t)?;
            Ok(ConvergenceRow { spacing: h, fd, closed, error: (fd - closed).abs() })
        })
        .collect::<Result<Vec<_>>>()?;
    let orders = rows
        .windows(2)
        .map(|w| (w[0].error / w[1].error).ln() / (w[0].spacing / w[1].spacing).ln())
        .collect();
    Ok(ConvergenceStudy { m, coupling, t, rows, orders })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_values() {
        let z = AntisymmetricMatrix::<Complex64>::zeros(2);
        assert_eq!(closed_form_trace_factor(&z, 3.0).unwrap(), 1.0);
        let (theta, t) = (0.5, 0.5);
        let x = t * theta / 2.0;
        assert!((closed_form_planar(theta, t).unwrap() - x / x.sin()).abs() < 1e-15);
        assert!(closed_form_planar(1.0, 2.0 * std::f64::consts::PI).is_err());
    }

    #[test]
    fn homogeneity() {
        let a = closed_form_planar(0.8, 1.7).unwrap();
        let b = closed_form_planar(0.8 * 1.7, 1.0).unwrap();
        assert!((a - b).abs() < 1e-14);
    }

    #[test]
    fn spec_validation() {
        assert!(OscillatorSpec::planar(0.5, 0.1, 0.5).is_ok());
        let mut s = OscillatorSpec::planar(0.5, 0.1, 0.5).unwrap();
        s.dt = 1.0;
        assert!(s.validate(0.5).is_err());
        s.dt = 0.001;
        s.extent = 1.0;
        assert!(s.validate(0.5).is_err());
        assert!(OscillatorSpec::new(3, vec![0.0; 9], 0.1, 0.5).is_err());
    }

    #[test]
    fn free_ratio_is_one() {
        let spec = OscillatorSpec::new(2, vec![0.0; 4], 0.2, 0.5).unwrap();
        assert!((fd_heat_trace(&spec, 0.5).unwrap() - 1.0).abs() < 1e-12);
    }
}
