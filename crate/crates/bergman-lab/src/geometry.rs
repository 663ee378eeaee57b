//! Planar domains, one-parameter domain families, boundary distance and
//! inradius, exhaustion functions, and sublevel-inclusion verification for
//! Hölder-continuous families.

use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("radius must be positive, got {0}")]
    InvalidRadius(f64),
    #[error("boundary radius r(theta) is not positive at theta = {theta}: r = {r}")]
    NonPositiveBoundary { theta: f64, r: f64 },
    #[error("star-shaped boundary supports at most {max} Fourier modes, got {got}")]
    TooManyModes { max: usize, got: usize },
    #[error("no inclusion constant b <= gamma * 2^30 works at the probe resolution")]
    NoBFound { witnesses: Vec<HolderWitness> },
    #[error("exhaustion function invalid: {0}")]
    ExhaustionInvalid(String),
}

/// Maximum number of Fourier modes for a star-shaped boundary radius.
pub const MAX_FOURIER_MODES: usize = 32;

/// Truncated Fourier series r(theta) = a0 + sum_k (a_k cos k theta + b_k sin k theta).
#[derive(Debug, Clone, PartialEq)]
pub struct RadialFourier {
    pub a0: f64,
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
}

impl RadialFourier {
    pub fn eval(&self, theta: f64) -> f64 {
        let mut r = self.a0;
        // direct evaluation; mode counts are small by construction
        for (k, &a) in self.cos.iter().enumerate() {
            r += a * ((k + 1) as f64 * theta).cos();
        }
        for (k, &b) in self.sin.iter().enumerate() {
            r += b * ((k + 1) as f64 * theta).sin();
        }
        r
    }

    fn modes(&self) -> usize {
        self.cos.len().max(self.sin.len())
    }
}

/// A bounded planar domain: the unit disc, a general disc, or a star-shaped
/// domain with smooth boundary given by a truncated Fourier radius.
#[derive(Debug, Clone, PartialEq)]
pub enum DomainSpec {
    UnitDisc,
    Disc {
        center: Complex64,
        radius: f64,
    },
    StarShaped {
        center: Complex64,
        radial: RadialFourier,
    },
}

impl DomainSpec {
    pub fn disc(center: Complex64, radius: f64) -> Result<Self, GeometryError> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(GeometryError::InvalidRadius(radius));
        }
        Ok(DomainSpec::Disc { center, radius })
    }

    /// Star-shaped domain about `center` with boundary radius given by the
    /// Fourier data. Positivity of r(theta) is checked on a dense grid.
    pub fn star_shaped(
        center: Complex64,
        a0: f64,
        cos: Vec<f64>,
        sin: Vec<f64>,
    ) -> Result<Self, GeometryError> {
        let radial = RadialFourier { a0, cos, sin };
        if radial.modes() > MAX_FOURIER_MODES {
            return Err(GeometryError::TooManyModes {
                max: MAX_FOURIER_MODES,
                got: radial.modes(),
            });
        }
        let n = 4096;
        for i in 0..n {
            let theta = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
            let r = radial.eval(theta);
            if !(r > 0.0) || !r.is_finite() {
                return Err(GeometryError::NonPositiveBoundary { theta, r });
            }
        }
        Ok(DomainSpec::StarShaped { center, radial })
    }

    /// Ellipse with semi-axes `a`, `b` centered at the origin, encoded as a
    /// star-shaped domain via Fourier projection of its polar radius.
    pub fn ellipse(a: f64, b: f64) -> Result<Self, GeometryError> {
        if !(a > 0.0 && b > 0.0) {
            return Err(GeometryError::InvalidRadius(a.min(b)));
        }
        let r = |theta: f64| {
            let (s, c) = theta.sin_cos();
            a * b / ((b * c).powi(2) + (a * s).powi(2)).sqrt()
        };
        // trapezoid projection; the radius is analytic so coefficients decay
        // geometrically and 32 modes reach ~1e-8 for moderate aspect ratios
        let n = 8192usize;
        let mut a0 = 0.0;
        let mut cos = vec![0.0; MAX_FOURIER_MODES];
        let mut sin = vec![0.0; MAX_FOURIER_MODES];
        for i in 0..n {
            let theta = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
            let v = r(theta);
            a0 += v;
            for k in 1..=MAX_FOURIER_MODES {
                cos[k - 1] += v * (k as f64 * theta).cos();
                sin[k - 1] += v * (k as f64 * theta).sin();
            }
        }
        a0 /= n as f64;
        for k in 0..MAX_FOURIER_MODES {
            cos[k] *= 2.0 / n as f64;
            sin[k] *= 2.0 / n as f64;
        }
        // drop negligible modes so the representation stays tight
        let keep = |v: &f64| v.abs() > 1e-13;
        let last_cos = cos.iter().rposition(keep).map_or(0, |i| i + 1);
        let last_sin = sin.iter().rposition(keep).map_or(0, |i| i + 1);
        cos.truncate(last_cos);
        sin.truncate(last_sin);
        Self::star_shaped(Complex64::new(0.0, 0.0), a0, cos, sin)
    }

    pub fn center(&self) -> Complex64 {
        match self {
            DomainSpec::UnitDisc => Complex64::new(0.0, 0.0),
            DomainSpec::Disc { center, .. } => *center,
            DomainSpec::StarShaped { center, .. } => *center,
        }
    }

    /// Boundary radius in direction `theta` as seen from the domain center.
    pub fn boundary_radius(&self, theta: f64) -> f64 {
        match self {
            DomainSpec::UnitDisc => 1.0,
            DomainSpec::Disc { radius, .. } => *radius,
            DomainSpec::StarShaped { radial, .. } => radial.eval(theta),
        }
    }

    pub fn boundary_point(&self, theta: f64) -> Complex64 {
        self.center() + Complex64::from_polar(self.boundary_radius(theta), theta)
    }

    pub fn max_boundary_radius(&self) -> f64 {
        match self {
            DomainSpec::UnitDisc => 1.0,
            DomainSpec::Disc { radius, .. } => *radius,
            DomainSpec::StarShaped { radial, .. } => {
                let n = 4096;
                (0..n)
                    .map(|i| radial.eval(2.0 * std::f64::consts::PI * i as f64 / n as f64))
                    .fold(f64::MIN, f64::max)
            }
        }
    }

    /// Exact area: pi R^2 for discs, Parseval for star-shaped boundaries.
    pub fn area(&self) -> f64 {
        use std::f64::consts::PI;
        match self {
            DomainSpec::UnitDisc => PI,
            DomainSpec::Disc { radius, .. } => PI * radius * radius,
            DomainSpec::StarShaped { radial, .. } => {
                let mut s = radial.a0 * radial.a0;
                for &a in &radial.cos {
                    s += 0.5 * a * a;
                }
                for &b in &radial.sin {
                    s += 0.5 * b * b;
                }
                PI * s
            }
        }
    }

    pub fn contains(&self, z: Complex64) -> bool {
        let d = z - self.center();
        let rho = d.norm();
        if rho == 0.0 {
            return true;
        }
        rho < self.boundary_radius(d.arg())
    }

    /// Euclidean distance to the boundary; 0 for points outside the domain.
    ///
    /// Exact for discs; star-shaped boundaries are minimized over a dense
    /// polyline with local golden-section refinement.
    pub fn boundary_distance(&self, z: Complex64) -> f64 {
        match self {
            DomainSpec::UnitDisc => (1.0 - z.norm()).max(0.0),
            DomainSpec::Disc { center, radius } => (radius - (z - center).norm()).max(0.0),
            DomainSpec::StarShaped { .. } => {
                if !self.contains(z) {
                    return 0.0;
                }
                self.star_boundary_distance(z)
            }
        }
    }

    fn star_boundary_distance(&self, z: Complex64) -> f64 {
        use std::f64::consts::PI;
        let dist = |theta: f64| (z - self.boundary_point(theta)).norm();
        let n = 1024usize;
        let step = 2.0 * PI / n as f64;
        let coarse: Vec<f64> = (0..n).map(|i| dist(i as f64 * step)).collect();
        // refine every coarse local minimum; the distance function along a
        // smooth boundary has finitely many of them
        let mut best = f64::MAX;
        for i in 0..n {
            let prev = coarse[(i + n - 1) % n];
            let next = coarse[(i + 1) % n];
            if coarse[i] <= prev && coarse[i] <= next {
                let refined = golden_min(&dist, i as f64 * step - step, i as f64 * step + step);
                best = best.min(refined);
            }
        }
        best
    }

    /// Radius of the largest inscribed disc.
    pub fn inradius(&self) -> f64 {
        self.inradius_center().0
    }

    /// Inradius together with a point achieving it.
    pub fn inradius_center(&self) -> (f64, Complex64) {
        match self {
            DomainSpec::UnitDisc => (1.0, Complex64::new(0.0, 0.0)),
            DomainSpec::Disc { center, radius } => (*radius, *center),
            DomainSpec::StarShaped { center, .. } => {
                // coarse interior grid, then coordinate descent
                let mut best = (self.boundary_distance(*center), *center);
                let n_s = 24;
                let n_t = 64;
                for i in 1..n_s {
                    let s = i as f64 / n_s as f64;
                    for j in 0..n_t {
                        let theta = 2.0 * std::f64::consts::PI * j as f64 / n_t as f64;
                        let r = self.boundary_radius(theta);
                        let z = center + Complex64::from_polar(0.95 * s * r, theta);
                        let d = self.boundary_distance(z);
                        if d > best.0 {
                            best = (d, z);
                        }
                    }
                }
                let mut z = best.1;
                let mut step = 0.25 * self.max_boundary_radius();
                while step > 1e-9 {
                    let mut improved = false;
                    for dir in [
                        Complex64::new(1.0, 0.0),
                        Complex64::new(-1.0, 0.0),
                        Complex64::new(0.0, 1.0),
                        Complex64::new(0.0, -1.0),
                    ] {
                        let cand = z + dir * step;
                        let d = self.boundary_distance(cand);
                        if d > best.0 {
                            best = (d, cand);
                            z = cand;
                            improved = true;
                        }
                    }
                    if !improved {
                        step *= 0.5;
                    }
                }
                best
            }
        }
    }

    /// Dilation about the origin by `c > 0`.
    pub fn scaled(&self, c: f64) -> DomainSpec {
        match self {
            DomainSpec::UnitDisc => DomainSpec::Disc {
                center: Complex64::new(0.0, 0.0),
                radius: c,
            },
            DomainSpec::Disc { center, radius } => DomainSpec::Disc {
                center: c * center,
                radius: c * radius,
            },
            DomainSpec::StarShaped { center, radial } => DomainSpec::StarShaped {
                center: c * center,
                radial: RadialFourier {
                    a0: c * radial.a0,
                    cos: radial.cos.iter().map(|a| c * a).collect(),
                    sin: radial.sin.iter().map(|b| c * b).collect(),
                },
            },
        }
    }
}

fn golden_min(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let inv_phi = 0.618_033_988_749_894_9;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > 1e-12 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    fc.min(fd)
}

/// One-parameter family of domains `t -> Omega_t` on t in (-1, 1), with an
/// optional sublevel representation `Omega_t = { rho < t }` and a declared
/// Hölder order alpha of the boundary-distance exhaustions.
#[derive(Clone)]
pub struct DomainFamily {
    map: Arc<dyn Fn(f64) -> DomainSpec + Send + Sync>,
    sublevel: Option<Arc<dyn Fn(Complex64) -> f64 + Send + Sync>>,
    alpha: f64,
    label: String,
}

impl std::fmt::Debug for DomainFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DomainFamily")
            .field("alpha", &self.alpha)
            .field("label", &self.label)
            .finish()
    }
}

impl DomainFamily {
    pub fn new(
        label: impl Into<String>,
        alpha: f64,
        map: impl Fn(f64) -> DomainSpec + Send + Sync + 'static,
    ) -> Self {
        DomainFamily {
            map: Arc::new(map),
            sublevel: None,
            alpha,
            label: label.into(),
        }
    }

    /// Attach a sublevel function rho with Omega_t = { rho < t }; the
    /// representation is checked on a grid of parameters and probe points.
    pub fn with_sublevel(
        mut self,
        rho: impl Fn(Complex64) -> f64 + Send + Sync + 'static,
        t_check: &[f64],
    ) -> Result<Self, GeometryError> {
        let rho = Arc::new(rho);
        for &t in t_check {
            let d = (self.map)(t);
            let (r_max, c) = (d.max_boundary_radius(), d.center());
            for i in 0..24 {
                for j in 0..16 {
                    let s = (i as f64 + 0.5) / 24.0;
                    let theta = 2.0 * std::f64::consts::PI * j as f64 / 16.0;
                    let z = c + Complex64::from_polar(1.3 * s * r_max, theta);
                    let inside = d.contains(z);
                    let sub = rho(z) < t;
                    // skip points within a thin shell of the boundary where
                    // grid membership is ambiguous
                    if d.boundary_distance(z) < 1e-9 && !inside {
                        continue;
                    }
                    if inside != sub {
                        return Err(GeometryError::ExhaustionInvalid(format!(
                            "sublevel mismatch at t={t}, z={z}: contains={inside}, rho<t={sub}"
                        )));
                    }
                }
            }
        }
        // monotonicity s < t => Omega_s subset Omega_t follows from the
        // sublevel representation once it matches on the grid
        self.sublevel = Some(rho);
        Ok(self)
    }

    pub fn domain_at(&self, t: f64) -> DomainSpec {
        (self.map)(t)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn has_sublevel(&self) -> bool {
        self.sublevel.is_some()
    }

    /// Default exhaustion rho_t = -boundary distance of Omega_t.
    pub fn rho(&self, t: f64, z: Complex64) -> f64 {
        -self.domain_at(t).boundary_distance(z)
    }

    /// Constant family Omega_t = Omega.
    pub fn constant(domain: DomainSpec) -> Self {
        let label = "constant".to_string();
        DomainFamily {
            map: Arc::new(move |_| domain.clone()),
            sublevel: None,
            alpha: 1.0,
            label,
        }
    }

    /// Dilating discs Omega_t = (1 + t/2) * unit disc.
    pub fn dilating_discs() -> Self {
        DomainFamily::new("dilating-discs", 1.0, |t| DomainSpec::Disc {
            center: Complex64::new(0.0, 0.0),
            radius: 1.0 + 0.5 * t,
        })
    }

    /// Discs of radius 1 + |t|^alpha, Hölder of exactly that order at t = 0.
    pub fn disc_radius_power(alpha: f64) -> Self {
        DomainFamily::new(format!("disc-power:{alpha}"), alpha, move |t| {
            DomainSpec::Disc {
                center: Complex64::new(0.0, 0.0),
                radius: 1.0 + t.abs().powf(alpha),
            }
        })
    }

    /// Sublevel discs { |z|^2 < t } for t near 1.
    pub fn sublevel_discs() -> Result<Self, GeometryError> {
        DomainFamily::new("sublevel-disc", 1.0, |t| DomainSpec::Disc {
            center: Complex64::new(0.0, 0.0),
            radius: t.max(1e-6).sqrt(),
        })
        .with_sublevel(|z| z.norm_sqr(), &[0.5, 0.8, 1.0])
    }
}

/// A negative continuous exhaustion of a domain: rho < 0 inside, -rho -> 0
/// at the boundary.
#[derive(Clone)]
pub struct ExhaustionFunction {
    domain: DomainSpec,
    inradius: f64,
    eval: Arc<dyn Fn(Complex64) -> f64 + Send + Sync>,
}

impl std::fmt::Debug for ExhaustionFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ExhaustionFunction")
            .field("domain", &self.domain)
            .field("inradius", &self.inradius)
            .finish()
    }
}

impl ExhaustionFunction {
    /// Wrap an evaluator after grid checks: rho negative on an interior grid
    /// and -rho small on a near-boundary ring.
    pub fn new(
        domain: DomainSpec,
        eval: impl Fn(Complex64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self, GeometryError> {
        let eval: Arc<dyn Fn(Complex64) -> f64 + Send + Sync> = Arc::new(eval);
        let c = domain.center();
        for i in 0..20 {
            let s = (i as f64 + 0.5) / 20.0;
            for j in 0..32 {
                let theta = 2.0 * std::f64::consts::PI * j as f64 / 32.0;
                let z = c + Complex64::from_polar(s * 0.999 * domain.boundary_radius(theta), theta);
                let r = eval(z);
                if !(r < 0.0) {
                    return Err(GeometryError::ExhaustionInvalid(format!(
                        "rho not negative at interior point {z}: {r}"
                    )));
                }
            }
        }
        for j in 0..64 {
            let theta = 2.0 * std::f64::consts::PI * j as f64 / 64.0;
            let z = c + Complex64::from_polar(0.9995 * domain.boundary_radius(theta), theta);
            let r = -eval(z);
            if r > 0.1 {
                return Err(GeometryError::ExhaustionInvalid(format!(
                    "-rho = {r} does not vanish near the boundary at {z}"
                )));
            }
        }
        let inradius = domain.inradius();
        Ok(ExhaustionFunction {
            domain,
            inradius,
            eval,
        })
    }

    pub fn rho(&self, z: Complex64) -> f64 {
        (self.eval)(z)
    }

    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    pub fn inradius(&self) -> f64 {
        self.inradius
    }
}

/// A parameter pair and probe point violating the sublevel inclusion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolderWitness {
    pub t: f64,
    pub s: f64,
    pub z: Complex64,
}

#[derive(Debug, Clone)]
pub struct FamilyHolderReport {
    pub gamma: f64,
    pub b_gamma: f64,
    pub c_gamma: f64,
    pub pairs_checked: usize,
}

/// Search for the smallest inclusion constant `b` on the geometric grid
/// `gamma * 2^k` such that
/// `{ -rho_t > b |t-s|^alpha }  subset  { -rho_s > gamma |t-s|^alpha }`
/// holds at every probe point for all grid pairs with `|t-s| <= c_gamma`,
/// with `rho_t = -` boundary distance. The pair-separation cap `c_gamma` is
/// halved until some `b` works; if none does the family is not Hölder of
/// the declared order at this resolution.
pub fn verify_family_holder(
    family: &DomainFamily,
    gamma: f64,
    t_grid: &[f64],
    probes: &[Complex64],
) -> Result<FamilyHolderReport, GeometryError> {
    assert!(gamma > 0.0);
    let alpha = family.alpha();
    let deltas: Vec<Vec<f64>> = t_grid
        .iter()
        .map(|&t| {
            let d = family.domain_at(t);
            probes.iter().map(|&z| d.boundary_distance(z)).collect()
        })
        .collect();

    let mut spacings: Vec<f64> = Vec::new();
    for (i, &t) in t_grid.iter().enumerate() {
        for &s in &t_grid[i + 1..] {
            if (t - s).abs() > 0.0 {
                spacings.push((t - s).abs());
            }
        }
    }
    if spacings.is_empty() {
        return Ok(FamilyHolderReport {
            gamma,
            b_gamma: gamma,
            c_gamma: 0.0,
            pairs_checked: 0,
        });
    }
    let max_sep = spacings.iter().cloned().fold(f64::MIN, f64::max);
    let min_sep = spacings.iter().cloned().fold(f64::MAX, f64::min);

    let mut c_gamma = max_sep;
    let mut last_witnesses = Vec::new();
    loop {
        for k in 0..=30u32 {
            let b = gamma * 2f64.powi(k as i32);
            let mut witnesses = Vec::new();
            let mut pairs = 0usize;
            for (i, &t) in t_grid.iter().enumerate() {
                for (j, &s) in t_grid.iter().enumerate() {
                    if i == j {
                        continue;
                    }
                    let sep = (t - s).abs();
                    if sep > c_gamma || sep == 0.0 {
                        continue;
                    }
                    pairs += 1;
                    let eps = sep.powf(alpha);
                    for (p, &z) in probes.iter().enumerate() {
                        if deltas[i][p] > b * eps && !(deltas[j][p] > gamma * eps) {
                            witnesses.push(HolderWitness { t, s, z });
                        }
                    }
                }
            }
            if witnesses.is_empty() {
                return Ok(FamilyHolderReport {
                    gamma,
                    b_gamma: b,
                    c_gamma,
                    pairs_checked: pairs / 2,
                });
            }
            last_witnesses = witnesses;
        }
        c_gamma *= 0.5;
        if c_gamma < min_sep {
            return Err(GeometryError::NoBFound {
                witnesses: last_witnesses,
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64, y: f64) -> Complex64 {
        Complex64::new(x, y)
    }

    #[test]
    fn boundary_distance_unit_disc_center() {
        assert_eq!(DomainSpec::UnitDisc.boundary_distance(c(0.0, 0.0)), 1.0);
        assert_eq!(DomainSpec::UnitDisc.boundary_distance(c(2.0, 0.0)), 0.0);
    }

    #[test]
    fn boundary_distance_disc_radius_two() {
        let d = DomainSpec::disc(c(0.0, 0.0), 2.0).unwrap();
        assert!((d.boundary_distance(c(1.0, 0.0)) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn boundary_distance_ellipse_center_matches_dense_oracle() {
        let d = DomainSpec::ellipse(2.0, 1.0).unwrap();
        // oracle: dense sampling of the represented boundary curve
        let n = 1_000_000usize;
        let mut oracle = f64::MAX;
        for i in 0..n {
            let theta = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
            oracle = oracle.min(d.boundary_point(theta).norm());
        }
        let got = d.boundary_distance(c(0.0, 0.0));
        assert!((got - oracle).abs() < 1e-9, "got {got}, oracle {oracle}");
        assert!((got - 1.0).abs() < 1e-6);
    }

    #[test]
    fn ellipse_area_matches_closed_form() {
        let d = DomainSpec::ellipse(2.0, 1.0).unwrap();
        assert!((d.area() - 2.0 * std::f64::consts::PI).abs() < 1e-8);
    }

    #[test]
    fn boundary_distance_scales_under_dilation() {
        let star = DomainSpec::star_shaped(
            c(0.0, 0.0),
            1.0,
            vec![0.12, 0.0, -0.05],
            vec![0.0, 0.08],
        )
        .unwrap();
        for dom in [DomainSpec::UnitDisc, star] {
            for factor in [0.5, 2.0, 3.25] {
                let scaled = dom.scaled(factor);
                for z in [c(0.1, 0.2), c(-0.3, 0.05), c(0.0, -0.4)] {
                    let a = scaled.boundary_distance(factor * z);
                    let b = factor * dom.boundary_distance(z);
                    assert!((a - b).abs() < 1e-12 * (1.0 + b), "{a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn inradius_of_discs_and_ellipse() {
        assert_eq!(DomainSpec::UnitDisc.inradius(), 1.0);
        let d = DomainSpec::disc(c(3.0, 0.0), 0.5).unwrap();
        assert_eq!(d.inradius(), 0.5);
        let e = DomainSpec::ellipse(2.0, 1.0).unwrap();
        // oracle: dense grid maximum of the boundary distance
        let mut oracle: f64 = 0.0;
        for i in 0..60 {
            for j in 0..60 {
                let z = c(-1.9 + 3.8 * i as f64 / 59.0, -0.95 + 1.9 * j as f64 / 59.0);
                oracle = oracle.max(e.boundary_distance(z));
            }
        }
        let got = e.inradius();
        assert!(got >= oracle - 1e-9);
        assert!((got - 1.0).abs() < 1e-6, "inradius {got}");
    }

    #[test]
    fn interior_distance_bounded_by_inradius() {
        let e = DomainSpec::ellipse(2.0, 1.0).unwrap();
        let (r, center) = e.inradius_center();
        for i in 0..40 {
            let theta = 2.0 * std::f64::consts::PI * i as f64 / 40.0;
            let z = Complex64::from_polar(0.7 * e.boundary_radius(theta), theta);
            assert!(e.boundary_distance(z) <= r + 1e-9);
        }
        assert!((e.boundary_distance(center) - r).abs() < 1e-6);
    }

    #[test]
    fn family_holder_constant_family_needs_b_equal_gamma() {
        let fam = DomainFamily::constant(DomainSpec::UnitDisc);
        let t_grid: Vec<f64> = (0..9).map(|i| -0.2 + 0.05 * i as f64).collect();
        let probes: Vec<Complex64> = (0..25)
            .map(|i| Complex64::from_polar(0.037 * i as f64, 0.7 * i as f64))
            .collect();
        for gamma in [0.25, 1.0, 3.0] {
            let rep = verify_family_holder(&fam, gamma, &t_grid, &probes).unwrap();
            assert_eq!(rep.b_gamma, gamma);
        }
    }

    #[test]
    fn family_holder_dilating_discs() {
        let fam = DomainFamily::dilating_discs();
        let t_grid: Vec<f64> = (0..11).map(|i| -0.25 + 0.05 * i as f64).collect();
        let probes: Vec<Complex64> = (0..40)
            .map(|i| Complex64::from_polar(0.02 * i as f64, 1.3 * i as f64))
            .collect();
        let rep = verify_family_holder(&fam, 1.0, &t_grid, &probes).unwrap();
        // delta_t(z) = 1 + t/2 - |z| gives |delta_t - delta_s| = |t-s|/2,
        // so b = gamma + 1/2 suffices; the dyadic search lands at 2 * gamma
        assert!(rep.b_gamma <= 2.0);
    }

    #[test]
    fn family_holder_sublevel_discs_near_one() {
        let fam = DomainFamily::sublevel_discs().unwrap();
        let t_grid: Vec<f64> = (0..9).map(|i| 0.8 + 0.05 * i as f64).collect();
        let probes: Vec<Complex64> = (0..30)
            .map(|i| Complex64::from_polar(0.025 * i as f64, 0.9 * i as f64))
            .collect();
        let rep = verify_family_holder(&fam, 1.0, &t_grid, &probes).unwrap();
        assert!(rep.b_gamma.is_finite());
        assert!(rep.b_gamma <= 2f64.powi(30));
    }

    #[test]
    fn exhaustion_function_checks_sign() {
        let ok = ExhaustionFunction::new(DomainSpec::UnitDisc, |z| z.norm_sqr() - 1.0);
        assert!(ok.is_ok());
        let bad = ExhaustionFunction::new(DomainSpec::UnitDisc, |z| z.norm_sqr());
        assert!(bad.is_err());
    }

    #[test]
    fn star_shaped_rejects_nonpositive_radius() {
        let r = DomainSpec::star_shaped(c(0.0, 0.0), 0.5, vec![0.6], vec![]);
        assert!(r.is_err());
    }
}
