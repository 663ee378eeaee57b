//! Weighted Bergman kernel engine: Gram-matrix assembly over a monomial
//! basis, pivoted Cholesky factorization, finite-section kernel evaluation,
//! and radial moment kernels for circle-invariant weights on discs and on
//! the whole plane.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::geometry::DomainSpec;
use crate::numeric::{gauss_legendre_01, pairwise_sum, pairwise_sum_complex};
use crate::quadrature::QuadratureRule;
use crate::weights::{estimate_threshold_at_infinity, EstimateOptions, SingularityEstimate};

/// Hard cap on the basis degree; finite sections beyond this are slower
/// and no more accurate at interior evaluation points.
pub const MAX_DEGREE: usize = 64;

#[derive(Debug, Error)]
pub enum KernelError {
    #[error("basis degree {0} exceeds the supported maximum {MAX_DEGREE}")]
    DegreeTooLarge(usize),
    #[error("quadrature rule was built for a different domain")]
    DomainMismatch,
    #[error("weight is not finite at node {0}; resolve the singularity first")]
    NonFiniteWeight(Complex64),
    #[error("Gram matrix has a negative retained pivot at index {index} ({value}); quadrature resolution is too low for the weight singularity")]
    IndefiniteGram { index: usize, value: f64 },
    #[error("factorization residual {0} exceeds tolerance; Gram matrix is numerically inconsistent")]
    FactorizationResidual(f64),
}

/// Weight of the measure `e^{-phi} dA`.
#[derive(Clone)]
pub enum Weight {
    Unweighted,
    /// The exponent phi; the measure carries `e^{-phi}`.
    Exponent(Arc<dyn Fn(Complex64) -> f64 + Send + Sync>),
}

impl Weight {
    pub fn exponent(phi: impl Fn(Complex64) -> f64 + Send + Sync + 'static) -> Self {
        Weight::Exponent(Arc::new(phi))
    }

    pub fn measure_factor(&self, z: Complex64) -> f64 {
        match self {
            Weight::Unweighted => 1.0,
            Weight::Exponent(phi) => (-phi(z)).exp(),
        }
    }
}

impl std::fmt::Debug for Weight {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Weight::Unweighted => write!(f, "Unweighted"),
            Weight::Exponent(_) => write!(f, "Exponent(..)"),
        }
    }
}

/// Finite-section Bergman kernel: scaled monomial basis centered at an
/// interior point, Gram matrix factored with diagonal pivoting, evaluation
/// through two triangular solves.
pub struct KernelEvaluator {
    center: Complex64,
    degree: usize,
    scale: f64,
    /// perm[i] = basis index placed at pivot position i.
    perm: Vec<usize>,
    retained: usize,
    dropped: Vec<usize>,
    /// Lower-triangular factor of the permuted retained Gram block,
    /// row-major `retained x retained`.
    factor: Vec<Complex64>,
    residual: f64,
    rule: QuadratureRule,
    /// Quadrature weight times e^{-phi} per node.
    node_measure: Vec<f64>,
}

impl std::fmt::Debug for KernelEvaluator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("KernelEvaluator")
            .field("center", &self.center)
            .field("degree", &self.degree)
            .field("retained", &self.retained)
            .field("dropped", &self.dropped)
            .field("residual", &self.residual)
            .finish()
    }
}

/// Assemble the finite-section kernel of degree `n` for the weighted
/// Bergman space on `domain`. The Gram matrix
/// `G_jk = int (z-z0)^j conj(z-z0)^k e^{-phi} dA` is built with the given
/// rule, with the basis rescaled by the domain size for conditioning, and
/// factored with diagonal pivoting; pivots below `1e-12` of the largest
/// diagonal are dropped, which shrinks the section while preserving
/// positivity.
pub fn assemble(
    domain: &DomainSpec,
    weight: &Weight,
    n: usize,
    rule: &QuadratureRule,
) -> Result<KernelEvaluator, KernelError> {
    if n > MAX_DEGREE {
        return Err(KernelError::DegreeTooLarge(n));
    }
    if rule.domain() != domain {
        return Err(KernelError::DomainMismatch);
    }
    let center = domain.center();
    let scale = basis_scale(domain);

    let nodes = rule.nodes();
    let mut node_measure = Vec::with_capacity(nodes.len());
    for (&z, &w) in nodes.iter().zip(rule.weights()) {
        let m = w * weight.measure_factor(z);
        if !m.is_finite() {
            return Err(KernelError::NonFiniteWeight(z));
        }
        node_measure.push(m);
    }

    let dim = n + 1;
    // powers of the scaled coordinate per node, laid out node-major
    let mut powers = vec![Complex64::new(0.0, 0.0); nodes.len() * dim];
    for (m, &z) in nodes.iter().enumerate() {
        let u = (z - center) / scale;
        let row = &mut powers[m * dim..(m + 1) * dim];
        row[0] = Complex64::new(1.0, 0.0);
        for j in 1..dim {
            row[j] = row[j - 1] * u;
        }
    }

    // Hermitian Gram; each entry is a deterministic pairwise sum over the
    // nodes, so row-parallelism cannot change the result
    let rows: Vec<Vec<Complex64>> = (0..dim)
        .into_par_iter()
        .map(|j| {
            let mut row = vec![Complex64::new(0.0, 0.0); dim];
            let mut terms = vec![Complex64::new(0.0, 0.0); nodes.len()];
            for k in 0..=j {
                for m in 0..nodes.len() {
                    let p = &powers[m * dim..(m + 1) * dim];
                    terms[m] = node_measure[m] * p[j] * p[k].conj();
                }
                row[k] = pairwise_sum_complex(&terms);
            }
            row
        })
        .collect();
    let mut gram = vec![Complex64::new(0.0, 0.0); dim * dim];
    for j in 0..dim {
        for k in 0..=j {
            gram[j * dim + k] = rows[j][k];
            gram[k * dim + j] = rows[j][k].conj();
        }
    }

    let chol = pivoted_cholesky(&gram, dim)?;
    let residual = factor_residual(&gram, dim, &chol);
    if residual > 1e-8 {
        return Err(KernelError::FactorizationResidual(residual));
    }

    Ok(KernelEvaluator {
        center,
        degree: n,
        scale,
        perm: chol.perm,
        retained: chol.retained,
        dropped: chol.dropped,
        factor: chol.factor,
        residual,
        rule: rule.clone(),
        node_measure,
    })
}

fn basis_scale(domain: &DomainSpec) -> f64 {
    let c = domain.center();
    let mut r: f64 = 0.0;
    for i in 0..256 {
        let theta = 2.0 * std::f64::consts::PI * i as f64 / 256.0;
        r = r.max((domain.boundary_point(theta) - c).norm());
    }
    r
}

struct PivotedFactor {
    perm: Vec<usize>,
    retained: usize,
    dropped: Vec<usize>,
    factor: Vec<Complex64>,
}

/// Cholesky with diagonal pivoting on a Hermitian PSD matrix. Pivots below
/// `1e-12` of the initial maximum diagonal end the factorization; the
/// remaining indices are reported as dropped.
fn pivoted_cholesky(gram: &[Complex64], dim: usize) -> Result<PivotedFactor, KernelError> {
    let mut a = gram.to_vec();
    let mut perm: Vec<usize> = (0..dim).collect();
    let d0 = (0..dim)
        .map(|j| gram[j * dim + j].re)
        .fold(f64::MIN, f64::max);
    let drop_tol = 1e-12 * d0;

    let mut step = 0usize;
    while step < dim {
        // find the largest remaining diagonal
        let (mut p, mut dmax) = (step, a[perm[step] * dim + perm[step]].re);
        for i in step + 1..dim {
            let d = a[perm[i] * dim + perm[i]].re;
            if d > dmax {
                p = i;
                dmax = d;
            }
        }
        if dmax <= drop_tol {
            if dmax < -drop_tol {
                return Err(KernelError::IndefiniteGram {
                    index: perm[p],
                    value: dmax,
                });
            }
            break;
        }
        perm.swap(step, p);
        let pk = perm[step];
        let l_kk = dmax.sqrt();
        a[pk * dim + pk] = Complex64::new(l_kk, 0.0);
        for i in step + 1..dim {
            let pi = perm[i];
            let v = a[pi * dim + pk] / l_kk;
            a[pi * dim + pk] = v;
        }
        // trailing update (right-looking)
        for i in step + 1..dim {
            let pi = perm[i];
            let lik = a[pi * dim + pk];
            for j in step + 1..=i {
                let pj = perm[j];
                let ljk = a[pj * dim + pk];
                let upd = lik * ljk.conj();
                a[pi * dim + pj] -= upd;
                if pi != pj {
                    a[pj * dim + pi] = a[pi * dim + pj].conj();
                }
            }
        }
        step += 1;
    }

    let retained = step;
    let dropped: Vec<usize> = perm[retained..].to_vec();
    let mut factor = vec![Complex64::new(0.0, 0.0); retained * retained];
    for i in 0..retained {
        for j in 0..=i {
            factor[i * retained + j] = a[perm[i] * dim + perm[j]];
        }
    }
    Ok(PivotedFactor {
        perm,
        retained,
        dropped,
        factor,
    })
}

fn factor_residual(gram: &[Complex64], dim: usize, chol: &PivotedFactor) -> f64 {
    let m = chol.retained;
    let gmax = (0..dim * dim).map(|i| gram[i].norm()).fold(0.0, f64::max);
    if gmax == 0.0 {
        return 0.0;
    }
    let mut worst: f64 = 0.0;
    for i in 0..m {
        for j in 0..=i {
            let mut s = Complex64::new(0.0, 0.0);
            for k in 0..=j {
                s += chol.factor[i * m + k] * chol.factor[j * m + k].conj();
            }
            let g = gram[chol.perm[i] * dim + chol.perm[j]];
            worst = worst.max((s - g).norm());
        }
    }
    worst / gmax
}

impl KernelEvaluator {
    pub fn center(&self) -> Complex64 {
        self.center
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn domain(&self) -> &DomainSpec {
        self.rule.domain()
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    pub fn dropped_pivots(&self) -> &[usize] {
        &self.dropped
    }

    pub fn factor_residual(&self) -> f64 {
        self.residual
    }

    /// Solve `L s = conj(P b(z))` for the permuted, scaled basis vector.
    fn solve_basis(&self, z: Complex64) -> Vec<Complex64> {
        let dim = self.degree + 1;
        let u = (z - self.center) / self.scale;
        let mut b = vec![Complex64::new(1.0, 0.0); dim];
        for j in 1..dim {
            b[j] = b[j - 1] * u;
        }
        let m = self.retained;
        let mut s = vec![Complex64::new(0.0, 0.0); m];
        for i in 0..m {
            let mut acc = b[self.perm[i]].conj();
            for k in 0..i {
                acc -= self.factor[i * m + k] * s[k];
            }
            s[i] = acc / self.factor[i * m + i];
        }
        s
    }

    /// K_N(z, w), holomorphic in z and conjugate-holomorphic in w.
    pub fn eval(&self, z: Complex64, w: Complex64) -> Complex64 {
        let sz = self.solve_basis(z);
        let sw = self.solve_basis(w);
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..self.retained {
            acc += sz[i].conj() * sw[i];
        }
        acc
    }

    /// Diagonal value K_N(z, z) >= 0.
    pub fn eval_diag(&self, z: Complex64) -> f64 {
        let s = self.solve_basis(z);
        s.iter().map(|v| v.norm_sqr()).sum()
    }

    /// Coefficients c_j of `zeta -> K_N(zeta, w)` in the scaled basis
    /// `((zeta - z0)/R)^j`, from a backward solve with the adjoint factor.
    pub fn section_coefficients(&self, w: Complex64) -> Vec<Complex64> {
        let m = self.retained;
        let sw = self.solve_basis(w);
        // solve L^* x = s(w)
        let mut x = vec![Complex64::new(0.0, 0.0); m];
        for i in (0..m).rev() {
            let mut acc = sw[i];
            for k in i + 1..m {
                acc -= self.factor[k * m + i].conj() * x[k];
            }
            x[i] = acc / self.factor[i * m + i].conj();
        }
        let mut coeffs = vec![Complex64::new(0.0, 0.0); self.degree + 1];
        for i in 0..m {
            coeffs[self.perm[i]] = x[i];
        }
        coeffs
    }

    /// Evaluate a coefficient vector from [`Self::section_coefficients`].
    pub fn eval_section(&self, coeffs: &[Complex64], z: Complex64) -> Complex64 {
        let u = (z - self.center) / self.scale;
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in coeffs.iter().rev() {
            acc = acc * u + c;
        }
        acc
    }

    /// Basis scale R used for conditioning; `u = (z - z0) / R`.
    pub fn basis_scale(&self) -> f64 {
        self.scale
    }

    /// Reproducing defect `|<f, K_N(., z)> - f(z)|` in the weighted inner
    /// product, evaluated with the assembly quadrature. For `deg f <= N`
    /// this is quadrature-level small; beyond the section it reports the
    /// truncation error `|f(z) - P_N f(z)|`.
    pub fn reproducing_defect(&self, f: &Polynomial, z: Complex64) -> f64 {
        let coeffs = self.section_coefficients(z);
        let nodes = self.rule.nodes();
        let mut terms = Vec::with_capacity(nodes.len());
        for (m, &zeta) in nodes.iter().enumerate() {
            // K_N(zeta, z) = conj(K_N(z, zeta)); the section coefficients give
            // the holomorphic-in-zeta function directly
            let k = self.eval_section(&coeffs, zeta);
            terms.push(self.node_measure[m] * f.eval(zeta) * k.conj());
        }
        let inner = pairwise_sum_complex(&terms);
        (inner - f.eval(z)).norm()
    }
}

/// Polynomial in the global coordinate, `sum_j coeffs[j] z^j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    pub coeffs: Vec<Complex64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        Polynomial { coeffs }
    }

    pub fn monomial(k: usize) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); k + 1];
        coeffs[k] = Complex64::new(1.0, 0.0);
        Polynomial { coeffs }
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }
}

/// Radial setting for moment kernels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RadialDomain {
    Disc { radius: f64 },
    Entire,
}

/// Kernel for a circle-invariant weight: monomials are orthogonal, so the
/// kernel is `sum_j (z conj(w))^j / m_j` over the moments
/// `m_j = 2 pi int r^{2j+1} e^{-t phi(r)} dr` that converge.
#[derive(Debug, Clone)]
pub struct RadialKernel {
    /// m_j for j = 0..=degree; `None` marks a divergent moment.
    moments: Vec<Option<f64>>,
}

impl RadialKernel {
    pub fn moment(&self, j: usize) -> Option<f64> {
        self.moments.get(j).copied().flatten()
    }

    pub fn moments(&self) -> &[Option<f64>] {
        &self.moments
    }

    /// All moments divergent realizes the identically-zero kernel.
    pub fn is_identically_zero(&self) -> bool {
        self.moments.iter().all(|m| m.is_none())
    }

    pub fn eval(&self, z: Complex64, w: Complex64) -> Complex64 {
        let x = z * w.conj();
        let mut acc = Complex64::new(0.0, 0.0);
        let mut pow = Complex64::new(1.0, 0.0);
        for m in &self.moments {
            if let Some(m) = m {
                acc += pow / m;
            }
            pow *= x;
        }
        acc
    }

    pub fn eval_diag(&self, z: Complex64) -> f64 {
        self.eval(z, z).re
    }
}

/// Radial moments through dyadic blocks with a ratio test: geometric decay
/// of the block masses means convergence (the remaining tail is added from
/// the measured ratio), sustained non-decay means the moment diverges.
pub fn radial_kernel(
    domain: RadialDomain,
    phi: &dyn Fn(f64) -> f64,
    t: f64,
    degree: usize,
) -> RadialKernel {
    let moments = (0..=degree)
        .map(|j| radial_moment(domain, phi, t, j))
        .collect();
    RadialKernel { moments }
}

fn radial_moment(domain: RadialDomain, phi: &dyn Fn(f64) -> f64, t: f64, j: usize) -> Option<f64> {
    let two_pi = 2.0 * std::f64::consts::PI;
    let integrand = |r: f64| r.powi(2 * j as i32 + 1) * (-t * phi(r)).exp();
    match domain {
        RadialDomain::Disc { radius } => {
            // inward dyadic blocks toward the possible singularity at 0
            let mut blocks = Vec::new();
            for i in 0..60 {
                let hi = radius * 2f64.powi(-i);
                let lo = 0.5 * hi;
                blocks.push(block_integral(&integrand, lo, hi));
            }
            sum_blocks(&blocks).map(|s| two_pi * s)
        }
        RadialDomain::Entire => {
            let inner = block_integral(&integrand, 0.0, 1.0);
            let mut blocks = vec![inner];
            for i in 0..60 {
                let lo = 2f64.powi(i);
                blocks.push(block_integral(&integrand, lo, 2.0 * lo));
            }
            sum_blocks(&blocks).map(|s| two_pi * s)
        }
    }
}

fn block_integral(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let (u, w) = gauss_legendre_01(48);
    let mut terms = Vec::with_capacity(u.len());
    for (ui, wi) in u.iter().zip(&w) {
        let r = lo + (hi - lo) * ui;
        terms.push((hi - lo) * wi * f(r));
    }
    pairwise_sum(&terms)
}

/// Ratio test over dyadic blocks. `blocks[0]` is the starting block and the
/// rest follow the dyadic progression; `None` signals divergence.
fn sum_blocks(blocks: &[f64]) -> Option<f64> {
    let mut total = 0.0;
    for (i, &b) in blocks.iter().enumerate() {
        if !b.is_finite() || b > 1e280 {
            return None;
        }
        total += b;
        if i >= 2 {
            let prev = blocks[i - 1];
            if prev > 0.0 && b > 0.0 {
                let ratio = b / prev;
                // ratios settle quickly for weights with power-law tails;
                // a sustained ratio at or above 1 means divergence
                if i >= 8 && ratio >= 1.0 - 1e-9 {
                    return None;
                }
                if ratio < 1.0 - 1e-9 && b / total.max(1e-300) < 1e-16 {
                    // converged; add the geometric tail estimate
                    return Some(total + b * ratio / (1.0 - ratio));
                }
            }
            if b == 0.0 && blocks[i - 1] == 0.0 {
                return Some(total);
            }
        }
    }
    // ran out of blocks: decide by the last ratio
    let n = blocks.len();
    let (a, b) = (blocks[n - 2], blocks[n - 1]);
    if b > 0.0 && a > 0.0 {
        let ratio = b / a;
        if ratio >= 1.0 - 1e-9 {
            return None;
        }
        return Some(total + b * ratio / (1.0 - ratio));
    }
    Some(total)
}

#[derive(Debug, Clone)]
pub struct ThresholdScanRow {
    pub t: f64,
    pub diagonal_nonzero: bool,
    pub any_moment_finite: bool,
}

/// Kernel-vanishing thresholds of an entire radial weight scanned over a
/// parameter grid: the diagonal threshold is the infimum of t with
/// `K_t(0) != 0` (first finite zeroth moment), the vanishing threshold the
/// infimum with `K_t` not identically zero (any finite moment). Both are
/// bracketed by adjacent grid points and compared against the integral
/// threshold at infinity, which can only be larger.
#[derive(Debug, Clone)]
pub struct ThresholdScan {
    pub rows: Vec<ThresholdScanRow>,
    pub diagonal_threshold: Option<(f64, f64)>,
    pub vanishing_threshold: Option<(f64, f64)>,
    pub at_infinity: Option<SingularityEstimate>,
    pub chain_ok: bool,
}

pub fn thresholds_from_kernel(
    phi: &(dyn Fn(f64) -> f64 + Sync),
    t_grid: &[f64],
    degree: usize,
) -> ThresholdScan {
    let rows: Vec<ThresholdScanRow> = t_grid
        .par_iter()
        .map(|&t| {
            let rk = radial_kernel(RadialDomain::Entire, &|r| phi(r), t, degree);
            ThresholdScanRow {
                t,
                diagonal_nonzero: rk.moment(0).is_some(),
                any_moment_finite: !rk.is_identically_zero(),
            }
        })
        .collect();

    let bracket = |pred: &dyn Fn(&ThresholdScanRow) -> bool| -> Option<(f64, f64)> {
        let first = rows.iter().position(pred)?;
        let lo = if first == 0 {
            0.0
        } else {
            rows[first - 1].t
        };
        Some((lo, rows[first].t))
    };
    let diagonal_threshold = bracket(&|r| r.diagonal_nonzero);
    let vanishing_threshold = bracket(&|r| r.any_moment_finite);

    let at_infinity = estimate_threshold_at_infinity(phi, &EstimateOptions::default()).ok();
    // the chain: integral threshold >= diagonal threshold >= vanishing
    let chain_ok = match (&at_infinity, diagonal_threshold, vanishing_threshold) {
        (Some(ci), Some(dp), Some(vp)) => ci.bracket.1 >= dp.0 - 1e-12 && dp.1 >= vp.0 - 1e-12,
        _ => true,
    };
    ThresholdScan {
        rows,
        diagonal_threshold,
        vanishing_threshold,
        at_infinity,
        chain_ok,
    }
}
