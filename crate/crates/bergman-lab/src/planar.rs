//! Riemann maps recovered from Bergman kernels, Green functions of simply
//! connected domains, the Schiffer cross-check between kernel and Green
//! function, hyperbolic exhaustion functions with the inradius sandwich,
//! and Green-function stability scans over domain families.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::geometry::{DomainFamily, DomainSpec, ExhaustionFunction, GeometryError};
use crate::kernel::{assemble, KernelError, KernelEvaluator, Weight};
use crate::numeric::{gauss_legendre_01, LogLogFit};
use crate::parametric::{ScanEngine, ScanError, PASS_SLACK};
use crate::quadrature::{build_rule, QuadratureError};

#[derive(Debug, Error)]
pub enum PlanarError {
    #[error("base point {0} is not interior to the domain")]
    BaseNotInterior(Complex64),
    #[error("integration segment leaves the domain at {0}; the domain is not star-shaped about the base point")]
    PathExitsDomain(Complex64),
    #[error("base point {got} is not the inradius-achieving center {want}")]
    BaseNotInradiusCenter { got: Complex64, want: Complex64 },
    #[error("exhaustion sandwich violated at {z}: ({lower}) <= {value} <= ({upper}) fails")]
    SandwichViolation { z: Complex64, lower: f64, value: f64, upper: f64 },
    #[error("finite-difference stencil leaves the domain near {0}")]
    StencilExitsDomain(Complex64),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Conformal map onto the unit disc, normalized to fix the base point and
/// have positive derivative there, evaluated as a Gauss-Legendre line
/// integral of the kernel section along radial segments.
pub struct ConformalMap {
    kernel: KernelEvaluator,
    base: Complex64,
    diag_at_base: f64,
    /// Coefficients of `zeta -> K(zeta, base)` in the kernel's scaled basis.
    coeffs: Vec<Complex64>,
    gl_nodes: Vec<f64>,
    gl_weights: Vec<f64>,
}

impl std::fmt::Debug for ConformalMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ConformalMap")
            .field("base", &self.base)
            .field("diag_at_base", &self.diag_at_base)
            .finish()
    }
}

/// Build the Riemann map from an assembled kernel: the normalized
/// antiderivative of `K(., z0)` with `F(z0) = 0` and
/// `F'(z0) = sqrt(pi K(z0, z0)) > 0`. Segments from the base point stay
/// inside star-shaped domains; a construction-time grid check asserts it.
pub fn riemann_map(kernel: KernelEvaluator, z0: Complex64) -> Result<ConformalMap, PlanarError> {
    let domain = kernel.domain().clone();
    if !domain.contains(z0) {
        return Err(PlanarError::BaseNotInterior(z0));
    }
    let coeffs = kernel.section_coefficients(z0);
    let diag_at_base = kernel.eval_diag(z0);
    // enough nodes to integrate the degree-N section exactly
    let n_gl = kernel.degree() / 2 + 4;
    let (gl_nodes, gl_weights) = gauss_legendre_01(n_gl);

    // segments from z0 toward the boundary must stay interior
    for j in 0..64 {
        let theta = 2.0 * std::f64::consts::PI * j as f64 / 64.0;
        let target = domain.center()
            + Complex64::from_polar(0.995 * domain.boundary_radius(theta), theta);
        for i in 1..8 {
            let p = z0 + (target - z0) * (i as f64 / 8.0);
            if !domain.contains(p) {
                return Err(PlanarError::PathExitsDomain(p));
            }
        }
    }

    Ok(ConformalMap {
        kernel,
        base: z0,
        diag_at_base,
        coeffs,
        gl_nodes,
        gl_weights,
    })
}

impl ConformalMap {
    pub fn base(&self) -> Complex64 {
        self.base
    }

    pub fn domain(&self) -> &DomainSpec {
        self.kernel.domain()
    }

    pub fn kernel(&self) -> &KernelEvaluator {
        &self.kernel
    }

    fn normalization(&self) -> f64 {
        (std::f64::consts::PI / self.diag_at_base).sqrt()
    }

    /// F(z) along the segment [z0, z].
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let d = z - self.base;
        let mut acc = Complex64::new(0.0, 0.0);
        for (&s, &w) in self.gl_nodes.iter().zip(&self.gl_weights) {
            let zeta = self.base + s * d;
            acc += w * self.kernel.eval_section(&self.coeffs, zeta);
        }
        self.normalization() * acc * d
    }

    /// F'(z) = sqrt(pi / K(z0,z0)) K(z, z0).
    pub fn derivative(&self, z: Complex64) -> Complex64 {
        self.normalization() * self.kernel.eval_section(&self.coeffs, z)
    }

    /// F''(z) from the derivative of the kernel section.
    pub fn second_derivative(&self, z: Complex64) -> Complex64 {
        let scale = self.kernel.basis_scale();
        let u = (z - self.kernel.center()) / scale;
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, &c) in self.coeffs.iter().enumerate().skip(1).rev() {
            acc = acc * u + c * j as f64;
        }
        self.normalization() * acc / scale
    }
}

/// Green function of a simply connected domain through its Riemann map:
/// `g(z, w) = log | (F(z) - F(w)) / (1 - conj(F(w)) F(z)) |`, with the
/// harmonic remainder `h = g - log |z - w|` completed across the diagonal.
#[derive(Debug, Clone)]
pub struct GreenFunction {
    map: Arc<ConformalMap>,
}

/// Separation below which the remainder switches to its diagonal limit
/// `log(|F'| / (1 - |F|^2))` with a first-order correction.
const DIAGONAL_CUTOFF: f64 = 1e-6;

pub fn green_from_map(map: Arc<ConformalMap>) -> GreenFunction {
    GreenFunction { map }
}

impl GreenFunction {
    pub fn map(&self) -> &ConformalMap {
        &self.map
    }

    pub fn g(&self, z: Complex64, w: Complex64) -> f64 {
        let fz = self.map.eval(z);
        let fw = self.map.eval(w);
        let num = (fz - fw).norm();
        let den = (Complex64::new(1.0, 0.0) - fw.conj() * fz).norm();
        (num / den).ln()
    }

    /// Harmonic remainder h(z, w) = g(z, w) - log |z - w|.
    pub fn h(&self, z: Complex64, w: Complex64) -> f64 {
        let sep = (z - w).norm();
        if sep < DIAGONAL_CUTOFF {
            // (F(z) - F(w))/(z - w) = F'(m) + O(|z - w|^2) at the midpoint;
            // the difference quotient itself would cancel catastrophically
            let mid = 0.5 * (z + w);
            let f = self.map.eval(mid);
            let q = self.map.derivative(mid);
            let den = (Complex64::new(1.0, 0.0) - f.conj() * f).norm();
            (q.norm() / den).ln()
        } else {
            let fz = self.map.eval(z);
            let fw = self.map.eval(w);
            let q = (fz - fw) / (z - w);
            let den = (Complex64::new(1.0, 0.0) - fw.conj() * fz).norm();
            (q.norm() / den).ln()
        }
    }
}

/// Relative errors of the identity `K = (2/pi) d^2 h / dz dwbar` at probe
/// pairs, with the mixed Wirtinger derivative taken by centered
/// differences (Richardson-extrapolated once).
#[derive(Debug, Clone)]
pub struct SchifferReport {
    pub rows: Vec<SchifferRow>,
    pub max_rel_err: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct SchifferRow {
    pub z: Complex64,
    pub w: Complex64,
    pub kernel_value: Complex64,
    pub stencil_value: Complex64,
    pub rel_err: f64,
}

pub fn schiffer_check(
    kernel: &KernelEvaluator,
    green: &GreenFunction,
    pairs: &[(Complex64, Complex64)],
    h_step: f64,
) -> Result<SchifferReport, PlanarError> {
    let domain = kernel.domain();
    for &(z, w) in pairs {
        for &p in &[z, w] {
            // the widest stencil offset is 2 * h_step in each coordinate
            if domain.boundary_distance(p) < 3.0 * h_step {
                return Err(PlanarError::StencilExitsDomain(p));
            }
        }
    }
    let rows: Vec<SchifferRow> = pairs
        .par_iter()
        .map(|&(z, w)| {
            let coarse = mixed_wirtinger(green, z, w, h_step);
            let fine = mixed_wirtinger(green, z, w, 0.5 * h_step);
            // Richardson for the O(h^2) centered stencil
            let d = (4.0 * fine - coarse) / 3.0;
            let stencil_value = 2.0 / std::f64::consts::PI * d;
            let kernel_value = kernel.eval(z, w);
            let rel_err = (stencil_value - kernel_value).norm() / kernel_value.norm().max(1e-300);
            SchifferRow {
                z,
                w,
                kernel_value,
                stencil_value,
                rel_err,
            }
        })
        .collect();
    let max_rel_err = rows.iter().map(|r| r.rel_err).fold(0.0, f64::max);
    Ok(SchifferReport { rows, max_rel_err })
}

/// Mixed derivative d^2 h / dz dwbar by centered differences:
/// dz = (dx - i dy)/2 acting on z, dwbar = (du + i dv)/2 acting on w.
fn mixed_wirtinger(green: &GreenFunction, z: Complex64, w: Complex64, h: f64) -> Complex64 {
    let ex = Complex64::new(h, 0.0);
    let ey = Complex64::new(0.0, h);
    let dd = |za: Complex64, zb: Complex64, wa: Complex64, wb: Complex64| -> f64 {
        (green.h(za, wa) - green.h(za, wb) - green.h(zb, wa) + green.h(zb, wb)) / (4.0 * h * h)
    };
    let dxu = dd(z + ex, z - ex, w + ex, w - ex);
    let dxv = dd(z + ex, z - ex, w + ey, w - ey);
    let dyu = dd(z + ey, z - ey, w + ex, w - ex);
    let dyv = dd(z + ey, z - ey, w + ey, w - ey);
    0.25 * Complex64::new(dxu + dyv, dxv - dyu)
}

/// Grid check of the inradius sandwich for the hyperbolic exhaustion
/// pulled back through a map.
///
/// Two lower bounds are evaluated. The sound one follows from the segment
/// path out of the inradius center, along which the boundary distance
/// shrinks at most at unit rate: `-rho >= ((r - |z - z0|)^+ / r)^2`. The
/// strict boundary-distance form `-rho >= (delta / r)^2` coincides with it
/// on discs (there `delta = r - |z - z0|` exactly) but fails on elongated
/// domains, where `delta` decays slower than the center distance: on the
/// 2:1 ellipse the hyperbolic distance from 0 to 0.1 is ~0.165 while
/// `2 log(r/delta) ~ 0.003`. Both margins are reported; `violations`
/// counts the sound sandwich together with the upper bound
/// `-rho <= (delta / r)^{1/2}`.
#[derive(Debug, Clone)]
pub struct SandwichReport {
    pub points: usize,
    /// Violations of the sound sandwich (center-distance lower bound and
    /// boundary-distance upper bound).
    pub violations: Vec<SandwichViolationAt>,
    /// Points violating the strict boundary-distance lower bound.
    pub strict_lower_violations: usize,
    /// Smallest slack of `-rho` over the center-distance lower bound.
    pub min_lower_margin: f64,
    /// Smallest slack of `-rho` over the strict boundary-distance lower
    /// bound; negative when that form fails somewhere on the grid.
    pub min_strict_lower_margin: f64,
    /// Smallest slack of the upper bound over `-rho`.
    pub min_upper_margin: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct SandwichViolationAt {
    pub z: Complex64,
    pub lower: f64,
    pub value: f64,
    pub upper: f64,
}

fn hyperbolic_minus_rho(map: &ConformalMap, z: Complex64) -> f64 {
    let f = map.eval(z).norm().min(1.0 - 1e-15);
    (1.0 - f) / (1.0 + f)
}

/// Evaluate the sandwich on an `n_radial x n_angular` interior grid with
/// radial fractions up to 0.8 of the boundary, where the finite kernel
/// section is trustworthy.
pub fn exhaustion_sandwich_report(
    map: &ConformalMap,
    domain: &DomainSpec,
    n_radial: usize,
    n_angular: usize,
) -> SandwichReport {
    let inradius = domain.inradius();
    let base = map.base();
    let mut violations = Vec::new();
    let mut strict_lower_violations = 0usize;
    let mut min_lower = f64::MAX;
    let mut min_strict = f64::MAX;
    let mut min_upper = f64::MAX;
    let mut points = 0usize;
    for i in 0..n_radial {
        let s = 0.05 + 0.75 * i as f64 / (n_radial.max(2) - 1) as f64;
        for j in 0..n_angular {
            let theta = 2.0 * std::f64::consts::PI * j as f64 / n_angular as f64;
            let z =
                domain.center() + Complex64::from_polar(s * domain.boundary_radius(theta), theta);
            let value = hyperbolic_minus_rho(map, z);
            let ratio = domain.boundary_distance(z) / inradius;
            let center_ratio = ((inradius - (z - base).norm()).max(0.0)) / inradius;
            let lower = center_ratio * center_ratio;
            let strict_lower = ratio * ratio;
            let upper = ratio.sqrt();
            points += 1;
            min_lower = min_lower.min(value - lower);
            min_strict = min_strict.min(value - strict_lower);
            min_upper = min_upper.min(upper - value);
            if value < strict_lower - 1e-9 {
                strict_lower_violations += 1;
            }
            if value < lower - 1e-9 || value > upper + 1e-9 {
                violations.push(SandwichViolationAt {
                    z,
                    lower,
                    value,
                    upper,
                });
            }
        }
    }
    SandwichReport {
        points,
        violations,
        strict_lower_violations,
        min_lower_margin: min_lower,
        min_strict_lower_margin: min_strict,
        min_upper_margin: min_upper,
    }
}

/// Negative exhaustion from the hyperbolic distance of the disc pulled
/// back through the map: `-rho = (1 - |F|) / (1 + |F|)`, sandwiched
/// between `(delta / r)^2` and `(delta / r)^{1/2}` where delta is the
/// boundary distance and r the inradius. The base point must achieve the
/// inradius; the sandwich is asserted on an interior grid.
pub fn build_hyperbolic_exhaustion(
    map: Arc<ConformalMap>,
    domain: &DomainSpec,
) -> Result<ExhaustionFunction, PlanarError> {
    let (_, center) = domain.inradius_center();
    if (map.base() - center).norm() > 1e-6 {
        return Err(PlanarError::BaseNotInradiusCenter {
            got: map.base(),
            want: center,
        });
    }

    let report = exhaustion_sandwich_report(&map, domain, 16, 64);
    if let Some(v) = report.violations.first() {
        return Err(PlanarError::SandwichViolation {
            z: v.z,
            lower: v.lower,
            value: v.value,
            upper: v.upper,
        });
    }

    let eval_map = map.clone();
    let rho = move |z: Complex64| -hyperbolic_minus_rho(&eval_map, z);
    Ok(ExhaustionFunction::new(domain.clone(), rho)?)
}

/// Fitted Hölder exponent of `t -> g_t` over a domain family, measured by
/// the maximum deviation over probe pairs.
#[derive(Debug, Clone)]
pub struct GreenStabilityResult {
    pub pairs: Vec<(Complex64, Complex64)>,
    pub t0: f64,
    pub offsets: Vec<f64>,
    pub deviations: Vec<f64>,
    pub used: Vec<bool>,
    pub noise_floor: f64,
    pub fit: LogLogFit,
    /// The scan passes when the fit clears alpha/2 minus the slack.
    pub pass: bool,
}

pub fn green_stability(
    family: &DomainFamily,
    pairs: &[(Complex64, Complex64)],
    t0: f64,
    offsets: &[f64],
    engine: &ScanEngine,
) -> Result<GreenStabilityResult, ScanError> {
    let green_at = |t: f64, degree: usize| -> Result<Vec<f64>, ScanError> {
        let domain = family.domain_at(t);
        for &(z, w) in pairs {
            for &p in &[z, w] {
                if !domain.contains(p) {
                    return Err(ScanError::ProbeOutsideDomain { t, z: p });
                }
            }
        }
        let rule = build_rule(&domain, engine.n_radial, engine.n_angular, None, 1.0)?;
        let kernel = assemble(&domain, &Weight::Unweighted, degree, &rule)?;
        let map = riemann_map(kernel, domain.center()).map_err(|e| match e {
            PlanarError::Kernel(k) => ScanError::Kernel(k),
            PlanarError::Quadrature(q) => ScanError::Quadrature(q),
            other => ScanError::ProbeOutsideDomain {
                t,
                z: match other {
                    PlanarError::BaseNotInterior(z) | PlanarError::PathExitsDomain(z) => z,
                    _ => domain.center(),
                },
            },
        })?;
        let green = green_from_map(Arc::new(map));
        Ok(pairs.iter().map(|&(z, w)| green.g(z, w)).collect())
    };

    let base = green_at(t0, engine.degree)?;
    let base_coarse = green_at(t0, engine.degree - engine.refine_drop)?;
    let floor_raw = base
        .iter()
        .zip(&base_coarse)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let noise_floor = 10.0 * floor_raw + 1e-12;

    let per_t: Vec<Vec<f64>> = offsets
        .par_iter()
        .map(|&dt| green_at(t0 + dt, engine.degree))
        .collect::<Result<_, _>>()?;
    let deviations: Vec<f64> = per_t
        .iter()
        .map(|vals| {
            vals.iter()
                .zip(&base)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        })
        .collect();

    let used: Vec<bool> = deviations.iter().map(|&d| d > noise_floor).collect();
    let n_used = used.iter().filter(|&&u| u).count();
    if n_used == 0 {
        return Err(ScanError::BelowNoiseFloor { floor: noise_floor });
    }
    if n_used < 5 {
        return Err(ScanError::TooFewSamples {
            need: 5,
            got: n_used,
        });
    }
    let xs: Vec<f64> = offsets
        .iter()
        .zip(&used)
        .filter(|(_, &u)| u)
        .map(|(&x, _)| x)
        .collect();
    let ys: Vec<f64> = deviations
        .iter()
        .zip(&used)
        .filter(|(_, &u)| u)
        .map(|(&y, _)| y)
        .collect();
    let fit = crate::numeric::log_log_fit(&xs, &ys).ok_or(ScanError::TooFewSamples {
        need: 5,
        got: n_used,
    })?;
    let pass = fit.exponent >= family.alpha() / 2.0 - PASS_SLACK;

    Ok(GreenStabilityResult {
        pairs: pairs.to_vec(),
        t0,
        offsets: offsets.to_vec(),
        deviations,
        used,
        noise_floor,
        fit,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parametric::default_offsets;
    use std::f64::consts::PI;

    fn c(x: f64, y: f64) -> Complex64 {
        Complex64::new(x, y)
    }

    fn disc_map(n: usize) -> ConformalMap {
        let rule = build_rule(&DomainSpec::UnitDisc, 48, 64, None, 1.0).unwrap();
        let k = assemble(&DomainSpec::UnitDisc, &Weight::Unweighted, n, &rule).unwrap();
        riemann_map(k, c(0.0, 0.0)).unwrap()
    }

    #[test]
    fn riemann_map_of_unit_disc_is_identity() {
        let map = disc_map(20);
        for z in [c(0.3, 0.2), c(-0.5, 0.6), c(0.0, -0.8), c(0.79, 0.0)] {
            assert!((map.eval(z) - z).norm() < 1e-8, "F({z}) = {}", map.eval(z));
        }
        assert!((map.derivative(c(0.0, 0.0)) - c(1.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn riemann_map_of_scaled_disc_divides_by_radius() {
        let t = 2.0;
        let d = DomainSpec::disc(c(0.0, 0.0), t).unwrap();
        let rule = build_rule(&d, 48, 64, None, 1.0).unwrap();
        let k = assemble(&d, &Weight::Unweighted, 16, &rule).unwrap();
        let map = riemann_map(k, c(0.0, 0.0)).unwrap();
        for z in [c(0.4, 0.3), c(-1.0, 0.5)] {
            assert!((map.eval(z) - z / t).norm() < 1e-9);
        }
    }

    #[test]
    fn ellipse_map_satisfies_pullback_identity() {
        let e = DomainSpec::ellipse(2.0, 1.0).unwrap();
        let rule = build_rule(&e, 96, 128, None, 1.0).unwrap();
        let k = assemble(&e, &Weight::Unweighted, 32, &rule).unwrap();
        let map = riemann_map(k, c(0.0, 0.0)).unwrap();
        assert!((map.eval(c(0.0, 0.0))).norm() < 1e-12);
        let fp0 = map.derivative(c(0.0, 0.0));
        assert!(fp0.re > 0.0 && fp0.im.abs() < 1e-12);

        let disc_kernel = |z: Complex64, w: Complex64| {
            let d = Complex64::new(1.0, 0.0) - z * w.conj();
            1.0 / (PI * d * d)
        };
        let pairs = [
            (c(0.3, 0.2), c(-0.4, 0.1)),
            (c(0.8, 0.0), c(0.5, -0.3)),
            (c(0.0, 0.4), c(-0.9, -0.2)),
        ];
        for (z, w) in pairs {
            assert!(map.eval(z).norm() < 1.0);
            let lhs = map.kernel().eval(z, w);
            let rhs = map.derivative(z) * map.derivative(w).conj()
                * disc_kernel(map.eval(z), map.eval(w));
            let rel = (lhs - rhs).norm() / rhs.norm();
            assert!(rel < 1e-4, "pullback rel err {rel} at ({z}, {w})");
        }
    }

    #[test]
    fn green_function_of_disc_is_log_modulus() {
        let map = Arc::new(disc_map(20));
        let green = green_from_map(map);
        for z in [c(0.3, 0.0), c(-0.2, 0.5), c(0.0, 0.7)] {
            let want = z.norm().ln();
            assert!((green.g(z, c(0.0, 0.0)) - want).abs() < 1e-8);
        }
        // h(z, w) = -log |1 - conj(w) z|
        for (z, w) in [(c(0.3, 0.1), c(0.2, -0.4)), (c(0.6, 0.0), c(0.5, 0.0))] {
            let want = -(Complex64::new(1.0, 0.0) - w.conj() * z).norm().ln();
            assert!((green.h(z, w) - want).abs() < 1e-8);
        }
    }

    #[test]
    fn green_function_of_scaled_disc() {
        let t = 2.0;
        let d = DomainSpec::disc(c(0.0, 0.0), t).unwrap();
        let rule = build_rule(&d, 48, 64, None, 1.0).unwrap();
        let k = assemble(&d, &Weight::Unweighted, 16, &rule).unwrap();
        let green = green_from_map(Arc::new(riemann_map(k, c(0.0, 0.0)).unwrap()));
        for z in [c(0.5, 0.2), c(-1.2, 0.3)] {
            assert!((green.g(z, c(0.0, 0.0)) - (z.norm() / t).ln()).abs() < 1e-8);
        }
    }

    #[test]
    fn green_symmetry_and_negativity_on_random_pairs() {
        let green = green_from_map(Arc::new(disc_map(20)));
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..200 {
            let z = Complex64::from_polar(0.85 * next(), 2.0 * PI * next());
            let w = Complex64::from_polar(0.85 * next(), 2.0 * PI * next());
            if (z - w).norm() < 1e-3 {
                continue;
            }
            let gzw = green.g(z, w);
            let gwz = green.g(w, z);
            assert!((gzw - gwz).abs() < 1e-8);
            assert!(gzw < 0.0);
        }
    }

    #[test]
    fn green_vanishes_toward_the_boundary() {
        let green = green_from_map(Arc::new(disc_map(24)));
        let w = c(0.2, 0.1);
        let mut prev = f64::NEG_INFINITY;
        for r in [0.9, 0.99, 0.999] {
            let g = green.g(c(r, 0.0), w);
            assert!(g > prev);
            prev = g;
        }
        assert!(prev.abs() < 5e-3);
    }

    #[test]
    fn harmonic_remainder_has_small_laplacian() {
        let green = green_from_map(Arc::new(disc_map(24)));
        let w = c(0.3, -0.2);
        let h = 1e-3;
        for z in [c(0.2, 0.4), c(-0.5, 0.1)] {
            let lap = green.h(z + c(h, 0.0), w)
                + green.h(z - c(h, 0.0), w)
                + green.h(z + c(0.0, h), w)
                + green.h(z - c(0.0, h), w)
                - 4.0 * green.h(z, w);
            assert!(lap.abs() < 1e-4, "laplacian residual {lap}");
        }
    }

    #[test]
    fn poisson_average_recovers_remainder() {
        let green = green_from_map(Arc::new(disc_map(24)));
        let w = c(0.25, 0.15);
        let xi = c(-0.2, 0.3);
        let eps0 = 0.05;
        let n = 256;
        let mut mean = 0.0;
        for i in 0..n {
            let theta = 2.0 * PI * i as f64 / n as f64;
            mean += green.h(xi + Complex64::from_polar(eps0, theta), w);
        }
        mean /= n as f64;
        assert!((mean - green.h(xi, w)).abs() < 1e-6);
    }

    #[test]
    fn schiffer_identity_on_the_disc() {
        let rule = build_rule(&DomainSpec::UnitDisc, 48, 64, None, 1.0).unwrap();
        let k = assemble(&DomainSpec::UnitDisc, &Weight::Unweighted, 20, &rule).unwrap();
        let green = green_from_map(Arc::new(disc_map(20)));
        let pairs = [
            (c(0.3, 0.0), c(0.2, 0.0)),
            (c(0.0, 0.0), c(0.0, 0.0)),
            (c(0.25, -0.3), c(-0.1, 0.35)),
        ];
        let rep = schiffer_check(&k, &green, &pairs, 1e-3).unwrap();
        assert!(rep.max_rel_err < 1e-5, "max rel err {}", rep.max_rel_err);
        // closed-form check at the first pair
        let (z, w) = pairs[0];
        let d = Complex64::new(1.0, 0.0) - z * w.conj();
        let want = 1.0 / (PI * d * d);
        assert!((rep.rows[0].stencil_value - want).norm() < 1e-5 * want.norm());
    }

    #[test]
    fn schiffer_stencil_domain_guard() {
        let rule = build_rule(&DomainSpec::UnitDisc, 24, 32, None, 1.0).unwrap();
        let k = assemble(&DomainSpec::UnitDisc, &Weight::Unweighted, 12, &rule).unwrap();
        let green = green_from_map(Arc::new(disc_map(12)));
        let err = schiffer_check(&k, &green, &[(c(0.9995, 0.0), c(0.0, 0.0))], 1e-3).unwrap_err();
        assert!(matches!(err, PlanarError::StencilExitsDomain(_)));
    }

    #[test]
    fn hyperbolic_exhaustion_on_the_disc() {
        let map = Arc::new(disc_map(20));
        let exh = build_hyperbolic_exhaustion(map, &DomainSpec::UnitDisc).unwrap();
        // -rho = (1 - |z|)/(1 + |z|)
        for z in [c(0.0, 0.0), c(0.5, 0.0), c(0.0, -0.8)] {
            let want = -(1.0 - z.norm()) / (1.0 + z.norm());
            assert!((exh.rho(z) - want).abs() < 1e-8);
        }
        // tight at the base point
        assert!((-exh.rho(c(0.0, 0.0)) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn disc_sandwich_holds_in_strict_form_on_dense_grid() {
        let map = disc_map(20);
        let rep = exhaustion_sandwich_report(&map, &DomainSpec::UnitDisc, 16, 64);
        assert_eq!(rep.points, 1024);
        assert!(rep.violations.is_empty());
        // on discs the strict boundary-distance form coincides with the
        // center-distance bound and holds everywhere
        assert_eq!(rep.strict_lower_violations, 0);
        assert!(rep.min_strict_lower_margin >= 0.0);
        assert!(rep.min_upper_margin >= 0.0);
    }

    #[test]
    fn ellipse_sandwich_sound_bounds_hold_strict_lower_fails() {
        let e = DomainSpec::ellipse(2.0, 1.0).unwrap();
        let rule = build_rule(&e, 96, 128, None, 1.0).unwrap();
        let k = assemble(&e, &Weight::Unweighted, 32, &rule).unwrap();
        let map = riemann_map(k, c(0.0, 0.0)).unwrap();
        let rep = exhaustion_sandwich_report(&map, &e, 16, 64);
        assert!(rep.violations.is_empty(), "{:?}", rep.violations.first());
        assert!(rep.min_upper_margin >= 0.0);
        // along the major axis delta decays much slower than the center
        // distance, so the boundary-distance lower bound overshoots: near
        // z = 0.1 the hyperbolic distance is ~0.165 while 2 log(r/delta)
        // is only ~0.003
        assert!(rep.strict_lower_violations > 0);
        assert!(rep.min_strict_lower_margin < 0.0);
    }

    #[test]
    fn hyperbolic_exhaustion_requires_inradius_center() {
        let rule = build_rule(&DomainSpec::UnitDisc, 48, 64, None, 1.0).unwrap();
        let k = assemble(&DomainSpec::UnitDisc, &Weight::Unweighted, 16, &rule).unwrap();
        let map = Arc::new(riemann_map(k, c(0.4, 0.0)).unwrap());
        let err = build_hyperbolic_exhaustion(map, &DomainSpec::UnitDisc).unwrap_err();
        assert!(matches!(err, PlanarError::BaseNotInradiusCenter { .. }));
    }

    #[test]
    fn green_stability_on_dilating_discs() {
        let fam = DomainFamily::dilating_discs();
        let engine = ScanEngine {
            degree: 12,
            n_radial: 24,
            n_angular: 32,
            ..Default::default()
        };
        let pairs = [(c(0.3, 0.0), c(0.0, 0.0)), (c(-0.2, 0.25), c(0.4, 0.1))];
        let res = green_stability(&fam, &pairs, 0.0, &default_offsets(), &engine).unwrap();
        // deviations are Lipschitz in t, well above the alpha/2 = 1/2 bar
        assert!(res.fit.exponent >= 0.5, "exponent {}", res.fit.exponent);
        assert!(res.pass);
    }

    #[test]
    fn green_stability_constant_family_below_floor() {
        let fam = DomainFamily::constant(DomainSpec::UnitDisc);
        let engine = ScanEngine {
            degree: 10,
            n_radial: 20,
            n_angular: 24,
            ..Default::default()
        };
        let pairs = [(c(0.3, 0.0), c(0.0, 0.0))];
        let err = green_stability(&fam, &pairs, 0.0, &default_offsets(), &engine).unwrap_err();
        assert!(matches!(err, ScanError::BelowNoiseFloor { .. }));
    }
}
