//! Weight families and singularity-exponent estimators: log canonical
//! threshold at 0, Lojasiewicz exponent, threshold at infinity, openness
//! scans and integrability-rate classification.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::geometry::DomainSpec;
use crate::quadrature::{annulus_integral, annulus_integrals, outward_annulus_integrals};

#[derive(Debug, Error)]
pub enum WeightError {
    #[error(
        "decay exponent has constant sign on the bracket (sigma_lo = {sigma_lo}, sigma_hi = {sigma_hi}); \
         all-finite = {all_finite}"
    )]
    NoSignChange {
        all_finite: bool,
        sigma_lo: f64,
        sigma_hi: f64,
    },
    #[error("weight family invariant violated: {0}")]
    InvalidFamily(String),
}

/// Declared Hölder control |e^{phi_t} - e^{phi_0}| <= C |t|^alpha.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolderData {
    pub c: f64,
    pub alpha: f64,
}

/// Which singularity exponent an estimate refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExponentKind {
    /// Log canonical threshold at 0: sup { c : e^{-c phi} locally L^1 }.
    Lct,
    /// Lojasiewicz exponent at 0: inf { c : e^{phi} >= const |z|^c }.
    Lojasiewicz,
    /// Threshold at infinity: inf { t : e^{-t phi} in L^1(C) }.
    AtInfinity,
}

/// A fitted singularity exponent with its bracket and the per-annulus
/// diagnostics it was derived from.
#[derive(Debug, Clone)]
pub struct SingularityEstimate {
    pub kind: ExponentKind,
    pub value: f64,
    pub bracket: (f64, f64),
    pub diagnostics: Vec<f64>,
}

impl SingularityEstimate {
    pub fn width(&self) -> f64 {
        self.bracket.1 - self.bracket.0
    }
}

/// Options shared by the annulus-based estimators.
#[derive(Debug, Clone, Copy)]
pub struct EstimateOptions {
    /// Bracket width at which bisection stops.
    pub tol: f64,
    /// Deepest dyadic annulus index.
    pub k_max: usize,
    /// Innermost annuli skipped when averaging decay exponents, where
    /// quadrature grading dominates the error.
    pub k_skip: usize,
    /// Upper end of the initial exponent bracket.
    pub c_hi: f64,
    pub n_radial: usize,
    pub n_angular: usize,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        EstimateOptions {
            tol: 1e-3,
            k_max: 24,
            k_skip: 4,
            c_hi: 8.0,
            n_radial: 16,
            n_angular: 32,
        }
    }
}

fn sigma_inward(phi: &(dyn Fn(Complex64) -> f64 + Sync), c: f64, opts: &EstimateOptions) -> f64 {
    annulus_integrals(phi, c, opts.k_max, opts.n_radial, opts.n_angular)
        .mean_decay(opts.k_skip, opts.k_max)
}

fn sigma_outward(phi: &(dyn Fn(Complex64) -> f64 + Sync), t: f64, opts: &EstimateOptions) -> f64 {
    outward_annulus_integrals(phi, t, opts.k_max, opts.n_radial, opts.n_angular)
        .mean_decay(opts.k_skip, opts.k_max)
}

/// Log canonical threshold of `phi` at 0 by bisection on the mean dyadic
/// decay exponent sigma(c): the mass `e^{-c phi}` is locally integrable iff
/// sigma(c) > 0.
pub fn estimate_lct(
    phi: &(dyn Fn(Complex64) -> f64 + Sync),
    opts: &EstimateOptions,
) -> Result<SingularityEstimate, WeightError> {
    let mut lo = opts.tol * 1e-3;
    let mut hi = opts.c_hi;
    let sigma_lo = sigma_inward(phi, lo, opts);
    let sigma_hi = sigma_inward(phi, hi, opts);
    if sigma_lo <= 0.0 || sigma_hi > 0.0 {
        return Err(WeightError::NoSignChange {
            all_finite: sigma_lo > 0.0 && sigma_hi > 0.0,
            sigma_lo,
            sigma_hi,
        });
    }
    while hi - lo > opts.tol {
        let mid = 0.5 * (lo + hi);
        if sigma_inward(phi, mid, opts) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let value = 0.5 * (lo + hi);
    let diagnostics = annulus_integrals(phi, value, opts.k_max, opts.n_radial, opts.n_angular)
        .decay_exponents();
    Ok(SingularityEstimate {
        kind: ExponentKind::Lct,
        value,
        bracket: (lo, hi),
        diagnostics,
    })
}

/// Lojasiewicz exponent of `phi` at 0: per-annulus maxima of
/// `phi(z)/log|z|` extrapolated by a two-term geometric (Aitken) fit. The
/// infinity sentinel is returned once the maxima exceed 1e3, matching the
/// convention that the exponent is infinite when no polynomial lower bound
/// exists.
pub fn estimate_lojasiewicz(
    phi: &(dyn Fn(Complex64) -> f64 + Sync),
    opts: &EstimateOptions,
) -> Result<SingularityEstimate, WeightError> {
    let k_max = opts.k_max;
    let mut levels = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        let r_out = 2f64.powi(-(k as i32));
        let mut max_ratio = f64::MIN;
        for i in 0..16 {
            let r = r_out * (0.5 + 0.5 * (i as f64 + 0.5) / 16.0);
            for j in 0..opts.n_angular {
                let theta = 2.0 * std::f64::consts::PI * j as f64 / opts.n_angular as f64;
                let z = Complex64::from_polar(r, theta);
                let ratio = phi(z) / r.ln();
                if ratio.is_finite() {
                    max_ratio = max_ratio.max(ratio);
                }
            }
        }
        if max_ratio > 1e3 {
            return Ok(SingularityEstimate {
                kind: ExponentKind::Lojasiewicz,
                value: f64::INFINITY,
                bracket: (1e3, f64::INFINITY),
                diagnostics: levels,
            });
        }
        levels.push(max_ratio);
    }

    let m = levels.len() - 1;
    let last3 = [levels[m - 2], levels[m - 1], levels[m]];
    let d1 = last3[0] - last3[1];
    let d2 = last3[1] - last3[2];
    let value = if d1.abs() < 1e-12 && d2.abs() < 1e-12 {
        last3[2]
    } else if d1 * d2 > 0.0 && d2.abs() < d1.abs() {
        // Aitken delta-squared on the geometric model L_k = L + a 2^{-bk}
        last3[2] - d2 * d2 / (d1 - d2)
    } else {
        last3[2]
    };
    let lo = last3.iter().cloned().fold(value, f64::min);
    let hi = last3.iter().cloned().fold(value, f64::max);
    Ok(SingularityEstimate {
        kind: ExponentKind::Lojasiewicz,
        value,
        bracket: (lo, hi),
        diagnostics: levels,
    })
}

/// Threshold at infinity of a radial weight in the class of positive
/// continuous psh functions growing at infinity: bisection on the outward
/// dyadic decay exponent.
pub fn estimate_threshold_at_infinity(
    phi_radial: &(dyn Fn(f64) -> f64 + Sync),
    opts: &EstimateOptions,
) -> Result<SingularityEstimate, WeightError> {
    let phi = |z: Complex64| phi_radial(z.norm());
    // push the decay window outward: the inner annuli carry O(2^{-2k})
    // curvature corrections that would bias the crossing
    let opts = &EstimateOptions {
        k_skip: opts.k_skip.max(10),
        k_max: opts.k_max.max(40),
        ..*opts
    };
    let mut lo = opts.tol * 1e-3;
    let mut hi = opts.c_hi;
    let sigma_lo = sigma_outward(&phi, lo, opts);
    let sigma_hi = sigma_outward(&phi, hi, opts);
    // decay improves with t; convergence everywhere means the threshold is 0
    if sigma_lo > 0.0 || sigma_hi <= 0.0 {
        return Err(WeightError::NoSignChange {
            all_finite: sigma_lo > 0.0 && sigma_hi > 0.0,
            sigma_lo,
            sigma_hi,
        });
    }
    while hi - lo > opts.tol {
        let mid = 0.5 * (lo + hi);
        if sigma_outward(&phi, mid, opts) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let value = 0.5 * (lo + hi);
    let diagnostics =
        outward_annulus_integrals(&phi, value, opts.k_max, opts.n_radial, opts.n_angular)
            .decay_exponents();
    Ok(SingularityEstimate {
        kind: ExponentKind::AtInfinity,
        value,
        bracket: (lo, hi),
        diagnostics,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct OpennessRow {
    pub p: f64,
    pub finite: bool,
    /// Dyadic partial mass, plus a geometric tail estimate when convergent.
    pub mass: f64,
}

#[derive(Debug, Clone)]
pub struct OpennessReport {
    pub base_integrable: bool,
    pub rows: Vec<OpennessRow>,
    pub first_finite: Option<f64>,
}

/// For each p in the grid, test whether `e^{-p phi}` stays integrable near
/// 0. When the base mass `e^{-phi}` is finite some p > 1 must remain
/// finite; the report records the first such grid point.
pub fn openness_check(
    phi: &(dyn Fn(Complex64) -> f64 + Sync),
    p_grid: &[f64],
    opts: &EstimateOptions,
) -> OpennessReport {
    let base_integrable = sigma_inward(phi, 1.0, opts) > 0.0;
    let rows: Vec<OpennessRow> = p_grid
        .par_iter()
        .map(|&p| {
            let scan = annulus_integrals(phi, p, opts.k_max, opts.n_radial, opts.n_angular);
            let sigma = scan.mean_decay(opts.k_skip, opts.k_max);
            let finite = sigma > 0.0;
            let mut mass = scan.partial_sum();
            if finite && sigma.is_finite() {
                let rho = 2f64.powf(-sigma);
                let last = scan.integrals[opts.k_max];
                if last.is_finite() && rho < 1.0 {
                    mass += last * rho / (1.0 - rho);
                }
            }
            OpennessRow { p, finite, mass }
        })
        .collect();
    let first_finite = rows.iter().find(|r| r.finite).map(|r| r.p);
    OpennessReport {
        base_integrable,
        rows,
        first_finite,
    }
}

/// Growth class of the partial sums of a dyadic mass series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrowthClass {
    DivergentLike,
    ConvergentLike,
}

impl std::fmt::Display for GrowthClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GrowthClass::DivergentLike => write!(f, "divergent-like"),
            GrowthClass::ConvergentLike => write!(f, "convergent-like"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RateRow {
    pub r: f64,
    /// Per-annulus increments of the partial sums.
    pub increments: Vec<f64>,
    pub partial_sums: Vec<f64>,
    /// Fitted decay exponent of the increments against the annulus index.
    pub increment_decay: f64,
    /// Residual of fitting the partial sums against log K.
    pub log_fit_residual: f64,
    /// Residual of fitting the partial sums against a constant.
    pub const_fit_residual: f64,
    pub class: GrowthClass,
}

#[derive(Debug, Clone)]
pub struct RateReport {
    pub c0: f64,
    pub rows: Vec<RateRow>,
}

/// Partial sums S_K of the dyadic masses of `e^{-c0 phi} / |phi|^r` for
/// each r in the grid, classified as divergent-like (increments decay no
/// faster than 1/k, so S_K grows at least logarithmically) or
/// convergent-like (increments summable). The class is decided by the
/// fitted increment-decay exponent; residuals of the log-K and constant
/// fits of S_K are reported alongside.
pub fn rate_check(
    phi: &(dyn Fn(Complex64) -> f64 + Sync),
    c0: f64,
    r_grid: &[f64],
    opts: &EstimateOptions,
) -> RateReport {
    let k_max = opts.k_max.max(48);
    let rows: Vec<RateRow> = r_grid
        .par_iter()
        .map(|&r| {
            let mut increments = Vec::with_capacity(k_max);
            for k in 1..=k_max {
                let r_out = 2f64.powi(-(k as i32));
                let v = annulus_integral(
                    |z| (-c0 * phi(z)).exp() / phi(z).abs().powf(r),
                    0.5 * r_out,
                    r_out,
                    opts.n_radial,
                    opts.n_angular,
                );
                increments.push(v);
            }
            let mut partial_sums = Vec::with_capacity(k_max);
            let mut acc = 0.0;
            for &v in &increments {
                acc += v;
                partial_sums.push(acc);
            }
            let ks: Vec<f64> = (1..=k_max).map(|k| k as f64).collect();
            let window = 8..k_max;
            let fit = crate::numeric::log_log_fit(&ks[window.clone()], &increments[window.clone()]);
            let increment_decay = fit.map(|f| -f.exponent).unwrap_or(f64::INFINITY);
            let (log_fit_residual, const_fit_residual) =
                sum_fit_residuals(&ks[window.clone()], &partial_sums[window]);
            let class = if increment_decay > 1.0 {
                GrowthClass::ConvergentLike
            } else {
                GrowthClass::DivergentLike
            };
            RateRow {
                r,
                increments,
                partial_sums,
                increment_decay,
                log_fit_residual,
                const_fit_residual,
                class,
            }
        })
        .collect();
    RateReport { c0, rows }
}

fn sum_fit_residuals(ks: &[f64], sums: &[f64]) -> (f64, f64) {
    let n = ks.len() as f64;
    let xs: Vec<f64> = ks.iter().map(|k| k.ln()).collect();
    let sx: f64 = xs.iter().sum();
    let sy: f64 = sums.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(sums).map(|(x, y)| x * y).sum();
    let denom = n * sxx - sx * sx;
    let slope = if denom.abs() < 1e-12 {
        0.0
    } else {
        (n * sxy - sx * sy) / denom
    };
    let intercept = (sy - slope * sx) / n;
    let log_res = (xs
        .iter()
        .zip(sums)
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    let mean = sy / n;
    let const_res = (sums.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / n).sqrt();
    (log_res, const_res)
}

/// Family of negative psh weights `t -> phi_t` on a bounded domain,
/// presented through `e^{phi_t}` so that weights with poles stay
/// evaluable. Analytic metadata carries exact exponents when known.
#[derive(Clone)]
pub struct NegativeWeightFamily {
    label: String,
    domain: DomainSpec,
    exp_phi: Arc<dyn Fn(f64, Complex64) -> f64 + Send + Sync>,
    /// Location of the weight singularity (built-ins put it at 0).
    pub singularity: Complex64,
    pub holder: Option<HolderData>,
    pub exact_lct: Option<f64>,
    pub exact_lojasiewicz: Option<f64>,
    /// Uniform local L^1 domination of e^{-phi_t} away from the singular
    /// set holds by construction for the built-in families.
    pub uniformly_dominated: bool,
}

impl std::fmt::Debug for NegativeWeightFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NegativeWeightFamily")
            .field("label", &self.label)
            .field("holder", &self.holder)
            .field("exact_lct", &self.exact_lct)
            .finish()
    }
}

impl NegativeWeightFamily {
    /// phi_t(z) = log(|z|^s + |t|) on the unit disc; phi_0 = s log|z|,
    /// Hölder data (C, alpha) = (1, 1), exact thresholds 2/s and s.
    pub fn power_log(s: f64) -> Self {
        assert!(s > 0.0);
        NegativeWeightFamily {
            label: format!("power-log:s={s}"),
            domain: DomainSpec::UnitDisc,
            exp_phi: Arc::new(move |t, z| z.norm().powf(s) + t.abs()),
            singularity: Complex64::new(0.0, 0.0),
            holder: Some(HolderData { c: 1.0, alpha: 1.0 }),
            exact_lct: Some(2.0 / s),
            exact_lojasiewicz: Some(s),
            uniformly_dominated: true,
        }
    }

    /// phi_t = t psi for a fixed negative psh psi, t > 0.
    pub fn scaled_log(psi: impl Fn(Complex64) -> f64 + Send + Sync + 'static) -> Self {
        NegativeWeightFamily {
            label: "scaled-log".to_string(),
            domain: DomainSpec::UnitDisc,
            exp_phi: Arc::new(move |t, z| (t * psi(z)).exp()),
            singularity: Complex64::new(0.0, 0.0),
            holder: None,
            exact_lct: None,
            exact_lojasiewicz: None,
            uniformly_dominated: true,
        }
    }

    /// Blended family e^{psi_t} = (sum_j |f_j(z,t)|^2)^{alpha(t)} with
    /// continuous alpha bounded below; e^{psi_t} is jointly continuous.
    pub fn continuous_interp(
        alpha: impl Fn(f64) -> f64 + Send + Sync + 'static,
        fs: Vec<Arc<dyn Fn(f64, Complex64) -> Complex64 + Send + Sync>>,
    ) -> Self {
        NegativeWeightFamily {
            label: "continuous-interp".to_string(),
            domain: DomainSpec::UnitDisc,
            exp_phi: Arc::new(move |t, z| {
                let s: f64 = fs.iter().map(|f| f(t, z).norm_sqr()).sum();
                s.powf(alpha(t))
            }),
            singularity: Complex64::new(0.0, 0.0),
            holder: None,
            exact_lct: None,
            exact_lojasiewicz: None,
            uniformly_dominated: true,
        }
    }

    /// Constant family phi_t = phi_0, useful as a noise-floor control.
    pub fn constant(
        label: impl Into<String>,
        phi0: impl Fn(Complex64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        NegativeWeightFamily {
            label: label.into(),
            domain: DomainSpec::UnitDisc,
            exp_phi: Arc::new(move |_, z| phi0(z).exp()),
            singularity: Complex64::new(0.0, 0.0),
            holder: Some(HolderData { c: 0.0, alpha: 1.0 }),
            exact_lct: None,
            exact_lojasiewicz: None,
            uniformly_dominated: true,
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    pub fn exp_phi(&self, t: f64, z: Complex64) -> f64 {
        (self.exp_phi)(t, z)
    }

    pub fn phi(&self, t: f64, z: Complex64) -> f64 {
        self.exp_phi(t, z).ln()
    }

    /// The weight exponent phi_t as a shareable closure.
    pub fn phi_at(&self, t: f64) -> Arc<dyn Fn(Complex64) -> f64 + Send + Sync> {
        let f = self.exp_phi.clone();
        Arc::new(move |z| f(t, z).ln())
    }

    /// Grid validation of the family invariants: positivity of e^{phi_t},
    /// negativity of phi_0, and the declared Hölder control. For t away
    /// from 0 the weight may exceed 1 by at most C |t|^alpha, the slack the
    /// Hölder data itself allows.
    pub fn validate_on_grid(
        &self,
        t_samples: &[f64],
        z_samples: &[Complex64],
    ) -> Result<(), WeightError> {
        for &z in z_samples {
            let v0 = self.exp_phi(0.0, z);
            let at_singularity = (z - self.singularity).norm() < 1e-14;
            // e^{phi_0} lies in (0, 1], with the isolated zero allowed at
            // the singular point itself
            if !(v0 >= 0.0 && v0 <= 1.0 + 1e-12) || (v0 == 0.0 && !at_singularity) {
                return Err(WeightError::InvalidFamily(format!(
                    "e^{{phi_0}} = {v0} outside (0, 1] at z = {z}"
                )));
            }
            for &t in t_samples {
                let v = self.exp_phi(t, z);
                if !(v >= 0.0) || (v == 0.0 && !at_singularity) {
                    return Err(WeightError::InvalidFamily(format!(
                        "e^{{phi_t}} = {v} not positive at t = {t}, z = {z}"
                    )));
                }
                if let Some(h) = self.holder {
                    let slack = h.c * t.abs().powf(h.alpha);
                    if v > 1.0 + slack + 1e-12 {
                        return Err(WeightError::InvalidFamily(format!(
                            "e^{{phi_t}} = {v} exceeds 1 + C|t|^alpha at t = {t}, z = {z}"
                        )));
                    }
                    if (v - v0).abs() > slack + 1e-12 {
                        return Err(WeightError::InvalidFamily(format!(
                            "Hölder control violated at t = {t}, z = {z}: |delta| = {}",
                            (v - v0).abs()
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// A fixed positive radial psh weight on the plane growing at infinity;
/// members of the associated family carry the weight `t phi`.
#[derive(Clone)]
pub struct EntireRadialWeight {
    label: String,
    phi: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub exact_threshold_at_infinity: Option<f64>,
}

impl std::fmt::Debug for EntireRadialWeight {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EntireRadialWeight")
            .field("label", &self.label)
            .field(
                "exact_threshold_at_infinity",
                &self.exact_threshold_at_infinity,
            )
            .finish()
    }
}

impl EntireRadialWeight {
    pub fn new(
        label: impl Into<String>,
        phi: impl Fn(f64) -> f64 + Send + Sync + 'static,
        exact_threshold_at_infinity: Option<f64>,
    ) -> Self {
        EntireRadialWeight {
            label: label.into(),
            phi: Arc::new(phi),
            exact_threshold_at_infinity,
        }
    }

    /// phi(z) = 2 log(1 + |z|^2); the mass e^{-t phi} is integrable exactly
    /// for t > 1/2.
    pub fn log_one_plus_square() -> Self {
        Self::new(
            "log-one-plus-sq",
            |r| 2.0 * (1.0 + r * r).ln(),
            Some(0.5),
        )
    }

    /// Gaussian growth phi(z) = |z|^2; every t > 0 gives finite mass.
    pub fn gaussian() -> Self {
        Self::new("gaussian", |r| r * r, None)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn phi_radial(&self, r: f64) -> f64 {
        (self.phi)(r)
    }

    pub fn phi(&self, z: Complex64) -> f64 {
        (self.phi)(z.norm())
    }

    pub fn radial_fn(&self) -> Arc<dyn Fn(f64) -> f64 + Send + Sync> {
        self.phi.clone()
    }

    /// Positivity, continuity at sampled radii, and growth past any bound
    /// at |z| = 1e3.
    pub fn validate(&self) -> Result<(), WeightError> {
        for i in 0..200 {
            let r = 1e-3 * 1.072f64.powi(i);
            let v = self.phi_radial(r);
            if !(v > 0.0) || !v.is_finite() {
                return Err(WeightError::InvalidFamily(format!(
                    "phi({r}) = {v} not positive"
                )));
            }
        }
        let far = self.phi_radial(1e3);
        if far < 10.0 {
            return Err(WeightError::InvalidFamily(format!(
                "phi(1e3) = {far} does not grow"
            )));
        }
        Ok(())
    }
}
