//! Divergence generator functions, their Legendre transforms, and a
//! quadrature/Monte-Carlo ground-truth oracle for Gaussian measures.
//!
//! Conventions: every generator f is convex with f(1) = 0, extended by +inf
//! outside the closure of its domain. Values of f and f* are IEEE
//! extended-reals, so +inf propagates through expectations without NaN.

use crate::error::{DivError, Result};
use crate::linalg::Cholesky;
use crate::quad;
use rand::Rng;
use rand_distr::StandardNormal;

/// Allowed range for the alpha parameter of the alpha-divergence family.
/// Larger alpha is numerically explosive: the variance formulas require
/// (dQ/dP)^{2 alpha} integrable under P.
pub const ALPHA_MIN: f64 = 0.0;
pub const ALPHA_MAX: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FamilyKind {
    Kl,
    Alpha(f64),
    ChiSquared,
    Hellinger,
}

/// One named f-divergence: generator, Legendre transform, derivatives, and
/// domain metadata.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivergenceFamily {
    kind: FamilyKind,
}

impl DivergenceFamily {
    pub fn kl() -> Self {
        DivergenceFamily { kind: FamilyKind::Kl }
    }

    pub fn chi_squared() -> Self {
        DivergenceFamily { kind: FamilyKind::ChiSquared }
    }

    pub fn hellinger() -> Self {
        DivergenceFamily { kind: FamilyKind::Hellinger }
    }

    /// Alpha-divergence with generator (t^a - 1)/(a(a-1)); a in (0,1) or (1,4].
    pub fn alpha(a: f64) -> Result<Self> {
        if !a.is_finite() || a <= ALPHA_MIN || a > ALPHA_MAX || a == 1.0 {
            return Err(DivError::Domain(format!(
                "alpha must lie in (0,1) or (1,{ALPHA_MAX}], got {a}"
            )));
        }
        Ok(DivergenceFamily { kind: FamilyKind::Alpha(a) })
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    /// The alpha exponent this family evaluates with, if it is an alpha-type
    /// generator (Hellinger is alpha = 1/2, chi-squared is alpha = 2).
    pub fn alpha_value(&self) -> Option<f64> {
        match self.kind {
            FamilyKind::Kl => None,
            FamilyKind::Alpha(a) => Some(a),
            FamilyKind::Hellinger => Some(0.5),
            FamilyKind::ChiSquared => Some(2.0),
        }
    }

    pub fn name(&self) -> String {
        match self.kind {
            FamilyKind::Kl => "kl".into(),
            FamilyKind::Alpha(a) => format!("alpha({a})"),
            FamilyKind::ChiSquared => "chi2".into(),
            FamilyKind::Hellinger => "hellinger".into(),
        }
    }

    /// Domain (a, b) of the generator f.
    pub fn domain_f(&self) -> (f64, f64) {
        match self.kind {
            FamilyKind::ChiSquared => (f64::NEG_INFINITY, f64::INFINITY),
            _ => (0.0, f64::INFINITY),
        }
    }

    /// Domain (c, d) of the Legendre transform f*. For alpha families the
    /// domain is the sign-restricted one matching the positivity of the
    /// exact optimizer; f* returns +inf outside it.
    pub fn domain_fstar(&self) -> (f64, f64) {
        match self.kind {
            FamilyKind::Kl | FamilyKind::ChiSquared => (f64::NEG_INFINITY, f64::INFINITY),
            FamilyKind::Alpha(a) if a > 1.0 => (0.0, f64::INFINITY),
            _ => (f64::NEG_INFINITY, 0.0),
        }
    }

    /// f(x), extended by +inf outside the closure of the domain.
    pub fn f(&self, x: f64) -> f64 {
        match self.kind {
            FamilyKind::Kl => {
                if x < 0.0 {
                    f64::INFINITY
                } else if x == 0.0 {
                    0.0
                } else {
                    x * x.ln()
                }
            }
            FamilyKind::ChiSquared => (x * x - 1.0) / 2.0,
            FamilyKind::Alpha(a) => alpha_f(a, x),
            FamilyKind::Hellinger => alpha_f(0.5, x),
        }
    }

    /// f'(x) on the interior of the domain.
    pub fn f_d1(&self, x: f64) -> f64 {
        match self.kind {
            FamilyKind::Kl => x.ln() + 1.0,
            FamilyKind::ChiSquared => x,
            FamilyKind::Alpha(a) => x.powf(a - 1.0) / (a - 1.0),
            FamilyKind::Hellinger => x.powf(-0.5) / (-0.5),
        }
    }

    /// f''(x) on the interior of the domain.
    pub fn f_d2(&self, x: f64) -> f64 {
        match self.kind {
            FamilyKind::Kl => 1.0 / x,
            FamilyKind::ChiSquared => 1.0,
            FamilyKind::Alpha(a) => x.powf(a - 2.0),
            FamilyKind::Hellinger => x.powf(-1.5),
        }
    }

    /// Legendre transform f*(y) = sup_x { xy - f(x) }, +inf outside dom(f*).
    pub fn f_star(&self, y: f64) -> f64 {
        match self.kind {
            FamilyKind::Kl => (y - 1.0).exp(),
            FamilyKind::ChiSquared => (y * y + 1.0) / 2.0,
            FamilyKind::Alpha(a) => alpha_f_star(a, y),
            FamilyKind::Hellinger => alpha_f_star(0.5, y),
        }
    }

    /// (f*)'(y) on the interior of dom(f*). Equals the inverse of f'.
    pub fn f_star_d1(&self, y: f64) -> f64 {
        match self.kind {
            FamilyKind::Kl => (y - 1.0).exp(),
            FamilyKind::ChiSquared => y,
            FamilyKind::Alpha(a) => alpha_f_star_d1(a, y),
            FamilyKind::Hellinger => alpha_f_star_d1(0.5, y),
        }
    }

    /// (f*)''(y) on the interior of dom(f*); strictly positive there.
    pub fn f_star_d2(&self, y: f64) -> f64 {
        match self.kind {
            FamilyKind::Kl => (y - 1.0).exp(),
            FamilyKind::ChiSquared => 1.0,
            FamilyKind::Alpha(a) => alpha_f_star_d2(a, y),
            FamilyKind::Hellinger => alpha_f_star_d2(0.5, y),
        }
    }

    /// Value of the Legendre-transform-objective optimizer f'(r) at a density
    /// ratio value r = dQ/dP(x).
    pub fn lt_optimizer(&self, ratio: f64) -> Result<f64> {
        let needs_positive = matches!(
            self.kind,
            FamilyKind::Kl | FamilyKind::Hellinger | FamilyKind::Alpha(_)
        ) && !matches!(self.kind, FamilyKind::Alpha(a) if a > 1.0);
        if needs_positive && ratio <= 0.0 {
            return Err(DivError::Domain(format!(
                "density ratio must be positive for {}, got {ratio}",
                self.name()
            )));
        }
        if ratio < 0.0 {
            return Err(DivError::Domain(format!("density ratio {ratio} is negative")));
        }
        Ok(self.f_d1(ratio))
    }
}

fn alpha_f(a: f64, x: f64) -> f64 {
    if x < 0.0 {
        f64::INFINITY
    } else {
        (x.powf(a) - 1.0) / (a * (a - 1.0))
    }
}

fn alpha_f_star(a: f64, y: f64) -> f64 {
    if a > 1.0 {
        if y < 0.0 {
            f64::INFINITY
        } else {
            y.powf(a / (a - 1.0)) * (a - 1.0).powf(a / (a - 1.0)) / a + 1.0 / (a * (a - 1.0))
        }
    } else {
        // 0 < a < 1
        if y >= 0.0 {
            f64::INFINITY
        } else {
            (-y).powf(-a / (1.0 - a)) * (1.0 - a).powf(-a / (1.0 - a)) / a - 1.0 / (a * (1.0 - a))
        }
    }
}

fn alpha_f_star_d1(a: f64, y: f64) -> f64 {
    if a > 1.0 {
        ((a - 1.0) * y).powf(1.0 / (a - 1.0))
    } else {
        ((1.0 - a) * (-y)).powf(-1.0 / (1.0 - a))
    }
}

fn alpha_f_star_d2(a: f64, y: f64) -> f64 {
    if a > 1.0 {
        (a - 1.0).powf(1.0 / (a - 1.0) - 1.0) * y.powf((2.0 - a) / (a - 1.0))
    } else {
        (1.0 - a).powf(-1.0 / (1.0 - a) - 1.0) * (-y).powf(-(2.0 - a) / (1.0 - a))
    }
}

/// Which optimizer representation an objective family trains towards.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimizerForm {
    /// phi* = f'(dQ/dP), the maximizer of the plain Legendre-transform objective.
    LegendreTransform,
    /// phi* = (dQ/dP)^{alpha-1}, the scale-invariant representative for the
    /// scaling-optimized alpha objective.
    AlphaScale,
    /// g* = log(dQ/dP) for the Renyi (and Donsker-Varadhan) objectives.
    LogRatio,
}

/// phi*(x) for a given density-ratio function, in the requested form.
pub fn exact_optimizer<R>(
    family: DivergenceFamily,
    form: OptimizerForm,
    ratio: R,
) -> impl Fn(f64) -> Result<f64>
where
    R: Fn(f64) -> f64,
{
    move |x: f64| {
        let r = ratio(x);
        match form {
            OptimizerForm::LegendreTransform => family.lt_optimizer(r),
            OptimizerForm::AlphaScale => {
                let a = family.alpha_value().ok_or_else(|| {
                    DivError::Domain("alpha-scale optimizer needs an alpha family".into())
                })?;
                if r <= 0.0 && a < 1.0 {
                    return Err(DivError::Domain(format!("density ratio {r} not positive")));
                }
                if r < 0.0 {
                    return Err(DivError::Domain(format!("density ratio {r} is negative")));
                }
                Ok(r.powf(a - 1.0))
            }
            OptimizerForm::LogRatio => {
                if r <= 0.0 {
                    return Err(DivError::Domain(format!("density ratio {r} not positive")));
                }
                Ok(r.ln())
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Gaussian measures
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub enum Covariance {
    /// sigma^2 * I
    Scalar(f64),
    Diagonal(Vec<f64>),
    /// Row-major symmetric matrix.
    Full(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianSpec {
    pub mean: Vec<f64>,
    pub cov: Covariance,
}

impl GaussianSpec {
    pub fn scalar(mean: Vec<f64>, var: f64) -> Self {
        GaussianSpec { mean, cov: Covariance::Scalar(var) }
    }

    pub fn standard(dim: usize) -> Self {
        GaussianSpec::scalar(vec![0.0; dim], 1.0)
    }

    pub fn diagonal(mean: Vec<f64>, vars: Vec<f64>) -> Self {
        GaussianSpec { mean, cov: Covariance::Diagonal(vars) }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn diagonal_variances(&self) -> Option<Vec<f64>> {
        match &self.cov {
            Covariance::Scalar(v) => Some(vec![*v; self.dim()]),
            Covariance::Diagonal(v) => Some(v.clone()),
            Covariance::Full(_) => None,
        }
    }

    pub fn cov_matrix(&self) -> Vec<f64> {
        let d = self.dim();
        match &self.cov {
            Covariance::Full(m) => m.clone(),
            _ => {
                let vars = self.diagonal_variances().unwrap();
                let mut m = vec![0.0; d * d];
                for i in 0..d {
                    m[i * d + i] = vars[i];
                }
                m
            }
        }
    }

    /// Cholesky factor of the covariance; fails on non-PD input, which is
    /// also the positive-definiteness check required by the invariants.
    pub fn cholesky(&self) -> Result<Cholesky> {
        match &self.cov {
            Covariance::Scalar(v) => Cholesky::from_diagonal(&vec![*v; self.dim()]),
            Covariance::Diagonal(v) => {
                if v.len() != self.dim() {
                    return Err(DivError::Factorization("diagonal length != dim".into()));
                }
                Cholesky::from_diagonal(v)
            }
            Covariance::Full(m) => Cholesky::factor(m, self.dim()),
        }
    }
}

/// One-dimensional Gaussian, the workhorse of the quadrature oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gaussian1d {
    pub mean: f64,
    pub var: f64,
}

impl Gaussian1d {
    pub fn new(mean: f64, var: f64) -> Self {
        Gaussian1d { mean, var }
    }

    pub fn sd(&self) -> f64 {
        self.var.sqrt()
    }

    pub fn log_pdf(&self, x: f64) -> f64 {
        let z = x - self.mean;
        -0.5 * (z * z / self.var) - 0.5 * (2.0 * std::f64::consts::PI * self.var).ln()
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.log_pdf(x).exp()
    }

    /// E[h(X)] by adaptive quadrature.
    pub fn expect<F: Fn(f64) -> f64>(&self, h: F, tol: f64) -> Result<f64> {
        quad::gauss_expect(self.mean, self.sd(), h, tol)
    }

    /// E[h(X)], reporting a divergent expectation as +inf.
    pub fn expect_ext<F: Fn(f64) -> f64>(&self, h: F, tol: f64) -> Result<f64> {
        quad::gauss_expect_ext(self.mean, self.sd(), h, tol)
    }
}

/// dQ/dP as a function, for 1-d Gaussians.
pub fn density_ratio_1d(q: Gaussian1d, p: Gaussian1d) -> impl Fn(f64) -> f64 + Copy {
    move |x| (q.log_pdf(x) - p.log_pdf(x)).exp()
}

// ---------------------------------------------------------------------------
// Oracle
// ---------------------------------------------------------------------------

/// What the oracle should compute: an f-divergence or a Renyi divergence
/// (paper normalization: R_a = log(a(a-1) D_{f_a} + 1) / (a(a-1))).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OracleTarget {
    Family(DivergenceFamily),
    Renyi { alpha: f64 },
}

impl OracleTarget {
    pub fn renyi(alpha: f64) -> Result<Self> {
        // reuse the alpha-range validation
        DivergenceFamily::alpha(alpha)?;
        Ok(OracleTarget::Renyi { alpha })
    }

    pub fn name(&self) -> String {
        match self {
            OracleTarget::Family(f) => f.name(),
            OracleTarget::Renyi { alpha } => format!("renyi({alpha})"),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct OracleOptions {
    /// Absolute tolerance for the quadrature path.
    pub quad_tol: f64,
    /// Sample count for the Monte Carlo fallback (non-diagonal covariances).
    pub mc_samples: usize,
    /// If set, the Monte Carlo standard error must not exceed this.
    pub mc_tol: Option<f64>,
    pub seed: u64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions { quad_tol: 1e-9, mc_samples: 1_000_000, mc_tol: None, seed: 0x0dd5_eed }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct OracleResult {
    pub value: f64,
    /// Standard error of the Monte Carlo path; None for the quadrature path.
    pub standard_error: Option<f64>,
}

/// Ground-truth divergence between Gaussian measures, independent of every
/// variational code path. Diagonal covariances are handled by per-coordinate
/// quadrature (KL is additive over coordinates; alpha-type divergences and
/// Renyi combine through E_P[(dQ/dP)^a], which is multiplicative). Anything
/// else falls back to Monte Carlo with a reported standard error.
pub fn oracle_divergence(
    target: OracleTarget,
    q: &GaussianSpec,
    p: &GaussianSpec,
    opts: &OracleOptions,
) -> Result<OracleResult> {
    if q.dim() != p.dim() {
        return Err(DivError::Domain(format!(
            "dimension mismatch: Q has {}, P has {}",
            q.dim(),
            p.dim()
        )));
    }
    // positive-definiteness check up front
    let _ = q.cholesky()?;
    let _ = p.cholesky()?;

    match (q.diagonal_variances(), p.diagonal_variances()) {
        (Some(qv), Some(pv)) => oracle_diagonal(target, q, p, &qv, &pv, opts),
        _ => oracle_monte_carlo(target, q, p, opts),
    }
}

fn clamp_tiny_negative(v: f64, tol: f64) -> f64 {
    if v < 0.0 && v > -100.0 * tol {
        0.0
    } else {
        v
    }
}

fn oracle_diagonal(
    target: OracleTarget,
    q: &GaussianSpec,
    p: &GaussianSpec,
    qv: &[f64],
    pv: &[f64],
    opts: &OracleOptions,
) -> Result<OracleResult> {
    let d = q.dim();
    let tol = opts.quad_tol;
    let coord = |i: usize| {
        (
            Gaussian1d::new(q.mean[i], qv[i]),
            Gaussian1d::new(p.mean[i], pv[i]),
        )
    };

    let value = match target {
        OracleTarget::Family(family) if family.kind() == FamilyKind::Kl => {
            let mut total = 0.0;
            for i in 0..d {
                let (qi, pi) = coord(i);
                let r = density_ratio_1d(qi, pi);
                total += pi.expect(|x| family.f(r(x)), tol)?;
            }
            total
        }
        OracleTarget::Family(family) => {
            let a = family.alpha_value().expect("non-KL families are alpha-type");
            let scale = a * (a - 1.0);
            let mut log_i_total = 0.0;
            for i in 0..d {
                let (qi, pi) = coord(i);
                let r = density_ratio_1d(qi, pi);
                let di = pi.expect(|x| family.f(r(x)), tol)?;
                let ii = scale * di + 1.0;
                if ii <= 0.0 {
                    return Err(DivError::Convergence(format!(
                        "per-coordinate integral {ii:.3e} not positive"
                    )));
                }
                log_i_total += ii.ln();
            }
            (log_i_total.exp() - 1.0) / scale
        }
        OracleTarget::Renyi { alpha } => {
            let family = DivergenceFamily::alpha(alpha)?;
            let scale = alpha * (alpha - 1.0);
            let mut log_i_total = 0.0;
            for i in 0..d {
                let (qi, pi) = coord(i);
                let r = density_ratio_1d(qi, pi);
                let di = pi.expect(|x| family.f(r(x)), tol)?;
                log_i_total += (scale * di + 1.0).ln();
            }
            log_i_total / scale
        }
    };
    Ok(OracleResult { value: clamp_tiny_negative(value, tol), standard_error: None })
}

struct GaussianDensity {
    mean: Vec<f64>,
    chol: Cholesky,
    log_norm: f64,
}

impl GaussianDensity {
    fn new(spec: &GaussianSpec) -> Result<Self> {
        let chol = spec.cholesky()?;
        let d = spec.dim() as f64;
        let log_norm = -0.5 * (d * (2.0 * std::f64::consts::PI).ln() + chol.log_det());
        Ok(GaussianDensity { mean: spec.mean.clone(), chol, log_norm })
    }

    fn log_pdf(&self, x: &[f64]) -> f64 {
        let diff: Vec<f64> = x.iter().zip(&self.mean).map(|(a, b)| a - b).collect();
        self.log_norm - 0.5 * self.chol.inv_quadratic_form(&diff)
    }
}

fn oracle_monte_carlo(
    target: OracleTarget,
    q: &GaussianSpec,
    p: &GaussianSpec,
    opts: &OracleOptions,
) -> Result<OracleResult> {
    use rand_chacha::rand_core::SeedableRng;
    let qd = GaussianDensity::new(q)?;
    let pd = GaussianDensity::new(p)?;
    let d = q.dim();
    let n = opts.mc_samples.max(1_000_000);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(opts.seed);

    // integrand under P: f(r) for a family target, r^alpha for Renyi
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut z = vec![0.0; d];
    let mut x = vec![0.0; d];
    for _ in 0..n {
        for zi in z.iter_mut() {
            *zi = rng.sample(StandardNormal);
        }
        pd.chol.apply(&z, &mut x);
        for (xi, mi) in x.iter_mut().zip(&p.mean) {
            *xi += mi;
        }
        let log_r = qd.log_pdf(&x) - pd.log_pdf(&x);
        let v = match target {
            OracleTarget::Family(family) => family.f(log_r.exp()),
            OracleTarget::Renyi { alpha } => (alpha * log_r).exp(),
        };
        sum += v;
        sum_sq += v * v;
    }
    let nf = n as f64;
    let mean = sum / nf;
    let var = (sum_sq / nf - mean * mean).max(0.0);
    let se_mean = (var / nf).sqrt();

    let (value, se) = match target {
        OracleTarget::Family(_) => (mean, se_mean),
        OracleTarget::Renyi { alpha } => {
            let scale = alpha * (alpha - 1.0);
            // R = log(E_P[r^alpha]) / scale; delta-method standard error
            (mean.ln() / scale, se_mean / (mean * scale.abs()))
        }
    };
    if let Some(tol) = opts.mc_tol {
        if se > tol {
            return Err(DivError::Convergence(format!(
                "Monte Carlo standard error {se:.3e} exceeds requested tolerance {tol:.1e}"
            )));
        }
    }
    Ok(OracleResult { value, standard_error: Some(se) })
}

/// Closed form for E_P[(dQ/dP)^a] between arbitrary Gaussians, valid whenever
/// the mixture covariance a*Cov_P + (1-a)*Cov_Q is positive-definite. Used by
/// the mutual-information oracle and as a cross-check of the quadrature path.
pub fn gaussian_alpha_integral(q: &GaussianSpec, p: &GaussianSpec, alpha: f64) -> Result<f64> {
    if q.dim() != p.dim() {
        return Err(DivError::Domain("dimension mismatch".into()));
    }
    let d = q.dim();
    let cq = q.cov_matrix();
    let cp = p.cov_matrix();
    let mut mix = vec![0.0; d * d];
    for i in 0..d * d {
        mix[i] = alpha * cp[i] + (1.0 - alpha) * cq[i];
    }
    let chol_q = Cholesky::factor(&cq, d)?;
    let chol_p = Cholesky::factor(&cp, d)?;
    let chol_m = Cholesky::factor(&mix, d)
        .map_err(|_| DivError::Factorization("mixture covariance not positive-definite".into()))?;
    let diff: Vec<f64> = q.mean.iter().zip(&p.mean).map(|(a, b)| a - b).collect();
    let log_i = 0.5
        * ((1.0 - alpha) * chol_q.log_det() + alpha * chol_p.log_det() - chol_m.log_det())
        - 0.5 * alpha * (1.0 - alpha) * chol_m.inv_quadratic_form(&diff);
    Ok(log_i.exp())
}

/// Closed-form Gaussian divergence (KL analytic; alpha-type and Renyi through
/// [`gaussian_alpha_integral`]). Independent of the quadrature and Monte Carlo
/// paths; used where an exact reference is needed at scale.
pub fn gaussian_divergence_closed(
    target: OracleTarget,
    q: &GaussianSpec,
    p: &GaussianSpec,
) -> Result<f64> {
    match target {
        OracleTarget::Family(family) if family.kind() == FamilyKind::Kl => {
            let d = q.dim();
            if p.dim() != d {
                return Err(DivError::Domain("dimension mismatch".into()));
            }
            // 0.5 (tr(Sp^-1 Sq) + diff' Sp^-1 diff - d + logdet Sp - logdet Sq)
            let cq = q.cov_matrix();
            let cp = p.cov_matrix();
            let chol_q = Cholesky::factor(&cq, d)?;
            let chol_p = Cholesky::factor(&cp, d)?;
            let mut trace = 0.0;
            let mut col = vec![0.0; d];
            for j in 0..d {
                for i in 0..d {
                    col[i] = cq[i * d + j];
                }
                trace += chol_p.solve(&col)[j];
            }
            let diff: Vec<f64> = q.mean.iter().zip(&p.mean).map(|(a, b)| a - b).collect();
            let quad_form = chol_p.inv_quadratic_form(&diff);
            Ok(0.5 * (trace + quad_form - d as f64 + chol_p.log_det() - chol_q.log_det()))
        }
        OracleTarget::Family(family) => {
            let a = family.alpha_value().expect("non-KL families are alpha-type");
            let i = gaussian_alpha_integral(q, p, a)?;
            Ok((i - 1.0) / (a * (a - 1.0)))
        }
        OracleTarget::Renyi { alpha } => {
            let i = gaussian_alpha_integral(q, p, alpha)?;
            Ok(i.ln() / (alpha * (alpha - 1.0)))
        }
    }
}
