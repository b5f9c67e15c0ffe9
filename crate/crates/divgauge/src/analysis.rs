//! Diagnostic mathematics: Gateaux curvature of objectives at the optimizer
//! (numeric and closed form), asymptotic-variance formulas, relative
//! variance, and the consistency-identity ratios.

use crate::divergence::{density_ratio_1d, DivergenceFamily, FamilyKind, Gaussian1d, GaussianSpec};
use crate::error::{DivError, Result};
use crate::exact::{GaussianPair, TransformFamily};
use crate::objectives;
use crate::rng::{RunRng, StreamKind};
use rand::Rng;
use rand_distr::StandardNormal;

// ---------------------------------------------------------------------------
// Gateaux derivatives
// ---------------------------------------------------------------------------

/// Central second difference of J(e) = H_T[phi* + e psi] with Richardson
/// extrapolation over eps and eps/2. The inner transform optimization is done
/// by grid refinement at each eps. Errors if the two estimates disagree by
/// more than 1e-3 relative.
pub fn gateaux_second_derivative<Psi>(
    family: DivergenceFamily,
    transform: TransformFamily,
    q: Gaussian1d,
    p: Gaussian1d,
    psi: Psi,
    eps: f64,
) -> Result<f64>
where
    Psi: Fn(f64) -> f64 + Copy,
{
    if !(1e-4..=1e-1).contains(&eps) {
        return Err(DivError::Domain(format!("eps must lie in [1e-4, 1e-1], got {eps}")));
    }
    let pair = GaussianPair::new(q, p);
    let ratio = density_ratio_1d(q, p);
    let j = |e: f64| -> Result<f64> {
        let phi = move |x: f64| family.f_d1(ratio(x)) + e * psi(x);
        pair.h_transform(family, transform, phi)
    };
    let j0 = j(0.0)?;
    let second = |e: f64| -> Result<f64> { Ok((j(e)? - 2.0 * j0 + j(-e)?) / (e * e)) };
    let d_full = second(eps)?;
    let d_half = second(eps / 2.0)?;
    let extrapolated = (4.0 * d_half - d_full) / 3.0;
    let disagreement = (d_full - d_half).abs() / extrapolated.abs().max(1e-3);
    if disagreement > 1e-3 {
        return Err(DivError::Convergence(format!(
            "Richardson disagreement {disagreement:.3e} for {} / {}",
            family.name(),
            transform.name()
        )));
    }
    Ok(extrapolated)
}

/// Central first difference of J at 0; ~0 at the optimizer (optimality).
pub fn gateaux_first_derivative<Psi>(
    family: DivergenceFamily,
    transform: TransformFamily,
    q: Gaussian1d,
    p: Gaussian1d,
    psi: Psi,
    eps: f64,
) -> Result<f64>
where
    Psi: Fn(f64) -> f64 + Copy,
{
    let pair = GaussianPair::new(q, p);
    let ratio = density_ratio_1d(q, p);
    let j = |e: f64| -> Result<f64> {
        let phi = move |x: f64| family.f_d1(ratio(x)) + e * psi(x);
        pair.h_transform(family, transform, phi)
    };
    Ok((j(eps)? - j(-eps)?) / (2.0 * eps))
}

/// Closed-form KL curvatures at phi* = log(dQ/dP) + 1.
#[derive(Debug, Clone, Copy)]
pub struct KlCurvatures {
    pub id: f64,
    pub shift: f64,
    pub affine: f64,
}

pub fn kl_hessian_closed_forms<Psi>(q: Gaussian1d, p: Gaussian1d, psi: Psi) -> Result<KlCurvatures>
where
    Psi: Fn(f64) -> f64 + Copy,
{
    let tol = 1e-10;
    let ratio = density_ratio_1d(q, p);
    let phi_star = move |x: f64| ratio(x).ln() + 1.0;
    let e_psi = q.expect(psi, tol)?;
    let e_psi2 = q.expect(|x| psi(x) * psi(x), tol)?;
    let var_psi = e_psi2 - e_psi * e_psi;
    let e_phi = q.expect(phi_star, tol)?;
    let e_phi2 = q.expect(|x| phi_star(x) * phi_star(x), tol)?;
    let var_phi = e_phi2 - e_phi * e_phi;
    let cov = q.expect(|x| phi_star(x) * psi(x), tol)? - e_phi * e_psi;
    if var_phi < objectives::DEGENERATE_VAR {
        return Err(DivError::Domain(
            "Var_Q[phi*] = 0 (Q = P): affine curvature undefined".into(),
        ));
    }
    Ok(KlCurvatures {
        id: -var_psi - e_psi * e_psi,
        shift: -var_psi,
        affine: -var_psi + cov * cov / var_phi,
    })
}

/// Closed-form curvatures for a general f-divergence at phi* = f'(dQ/dP),
/// expressed through the tilted measure dP* ∝ (f*)''(phi*) dP.
#[derive(Debug, Clone, Copy)]
pub struct FdivCurvatures {
    pub id: f64,
    pub shift: f64,
    pub scale: f64,
    pub affine: f64,
}

impl FdivCurvatures {
    pub fn get(&self, t: TransformFamily) -> f64 {
        match t {
            TransformFamily::Id => self.id,
            TransformFamily::Shift => self.shift,
            TransformFamily::Scale => self.scale,
            TransformFamily::Affine => self.affine,
        }
    }
}

pub fn fdiv_hessian_closed_forms<Psi>(
    family: DivergenceFamily,
    q: Gaussian1d,
    p: Gaussian1d,
    psi: Psi,
) -> Result<FdivCurvatures>
where
    Psi: Fn(f64) -> f64 + Copy,
{
    let tol = 1e-10;
    let ratio = density_ratio_1d(q, p);
    let phi_star = move |x: f64| family.f_d1(ratio(x));
    let weight = move |x: f64| family.f_star_d2(phi_star(x));
    // moments of the affine stationarity system under P
    let b = p.expect(weight, tol)?;
    let a = p.expect(|x| weight(x) * phi_star(x), tol)?;
    let c = p.expect(|x| weight(x) * phi_star(x) * phi_star(x), tol)?;
    let g = p.expect(|x| weight(x) * psi(x), tol)?;
    let h = p.expect(|x| weight(x) * phi_star(x) * psi(x), tol)?;
    let e_psi2_w = p.expect(|x| weight(x) * psi(x) * psi(x), tol)?;
    if b <= 0.0 {
        return Err(DivError::Domain("E_P[(f*)''(phi*)] must be positive".into()));
    }

    // tilted moments
    let ts_psi = g / b; // E_{P*}[psi]
    let ts_psi2 = e_psi2_w / b; // E_{P*}[psi^2]
    let ts_phi = a / b;
    let ts_phi2 = c / b;
    let ts_phipsi = h / b;
    let var_psi = ts_psi2 - ts_psi * ts_psi;

    let id = -b * ts_psi2;
    let shift = -b * var_psi;
    let scale = -b * (ts_psi2 - ts_phipsi * ts_phipsi / ts_phi2);
    // affine gain via the 2x2 stationarity system in (eta, nu)
    let det = b * c - a * a;
    if det <= 0.0 {
        return Err(DivError::Domain("affine stationarity system degenerate (Q = P)".into()));
    }
    let gain = (b * h * h - 2.0 * a * h * g + c * g * g) / det;
    let affine = id + gain;
    Ok(FdivCurvatures { id, shift, scale, affine })
}

// ---------------------------------------------------------------------------
// Asymptotic variance
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentMode {
    /// Quadrature moments on 1-d Gaussians.
    Exact,
    /// Moments from a one-shot n-sample draw.
    Empirical,
}

#[derive(Debug, Clone, Copy)]
pub struct VarianceReport {
    /// The n * Var limit from the closed-form expression.
    pub formula_value: f64,
    /// n * empirical variance of the objective over `repeats` evaluations.
    pub mc_value: f64,
    /// Standard error of `mc_value` (normal-theory).
    pub mc_standard_error: f64,
    pub n: usize,
    pub repeats: usize,
}

fn sample_phi_1d<F: Fn(f64) -> f64>(
    g: Gaussian1d,
    phi: F,
    n: usize,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> Vec<f64> {
    (0..n)
        .map(|_| {
            let z: f64 = rng.sample(StandardNormal);
            phi(g.mean + g.sd() * z)
        })
        .collect()
}

fn mc_variance_of<FObj: Fn(&[f64], &[f64]) -> f64>(
    q: Gaussian1d,
    p: Gaussian1d,
    phi: impl Fn(f64) -> f64 + Copy,
    objective: FObj,
    n: usize,
    repeats: usize,
    seed: u64,
) -> (f64, f64) {
    let rng = RunRng::new(seed);
    let mut values = Vec::with_capacity(repeats);
    for r in 0..repeats {
        let mut qs = rng.substream(StreamKind::SampleQ, r as u64);
        let mut ps = rng.substream(StreamKind::SampleP, r as u64);
        let uq = sample_phi_1d(q, phi, n, &mut qs);
        let up = sample_phi_1d(p, phi, n, &mut ps);
        values.push(objective(&uq, &up));
    }
    let var = objectives::variance(&values);
    let mc = n as f64 * var;
    // normal-theory relative standard error of a sample variance
    let se = mc * (2.0 / (repeats as f64 - 1.0)).sqrt();
    (mc, se)
}

/// n * Var of the LT objective (Var_Q[phi] + Var_P[f*(phi)]) against a Monte
/// Carlo estimate over `repeats` independent n-sample evaluations.
pub fn lt_variance<F: Fn(f64) -> f64 + Copy>(
    family: DivergenceFamily,
    phi: F,
    q: Gaussian1d,
    p: Gaussian1d,
    mode: MomentMode,
    n: usize,
    repeats: usize,
    seed: u64,
) -> Result<VarianceReport> {
    if n < 1000 {
        return Err(DivError::Domain("variance study needs n >= 1000".into()));
    }
    let tol = 1e-9;
    let formula_value = match mode {
        MomentMode::Exact => {
            let vq = {
                let m = q.expect(phi, tol)?;
                q.expect(|x| (phi(x) - m) * (phi(x) - m), tol)?
            };
            let vp = {
                let m = p.expect(|x| family.f_star(phi(x)), tol)?;
                p.expect(|x| (family.f_star(phi(x)) - m) * (family.f_star(phi(x)) - m), tol)?
            };
            vq + vp
        }
        MomentMode::Empirical => {
            let rng = RunRng::new(seed);
            let uq = sample_phi_1d(q, phi, n, &mut rng.substream(StreamKind::Aux, 0));
            let up = sample_phi_1d(p, phi, n, &mut rng.substream(StreamKind::Aux, 1));
            let fp: Vec<f64> = up.iter().map(|&v| family.f_star(v)).collect();
            objectives::variance(&uq) + objectives::variance(&fp)
        }
    };
    let (mc_value, mc_standard_error) = mc_variance_of(
        q,
        p,
        phi,
        |uq, up| {
            let n = uq.len() as f64;
            let m = up.len() as f64;
            uq.iter().sum::<f64>() / n - up.iter().map(|&v| family.f_star(v)).sum::<f64>() / m
        },
        n,
        repeats,
        seed,
    );
    Ok(VarianceReport { formula_value, mc_value, mc_standard_error, n, repeats })
}

/// Asymptotic n * Var of the scaling-optimized alpha objective (delta
/// method), against Monte Carlo. phi must be positive.
pub fn alpha_scale_asymptotic_variance<F: Fn(f64) -> f64 + Copy>(
    alpha: f64,
    phi: F,
    q: Gaussian1d,
    p: Gaussian1d,
    n: usize,
    repeats: usize,
    seed: u64,
) -> Result<VarianceReport> {
    if n < 1000 {
        return Err(DivError::Domain("variance study needs n >= 1000".into()));
    }
    DivergenceFamily::alpha(alpha)?;
    let tol = 1e-9;
    let psi_alpha = move |x: f64| phi(x).powf(alpha / (alpha - 1.0));
    let eq = q.expect(phi, tol)?;
    let ep = p.expect(psi_alpha, tol)?;
    let var_q = q.expect(|x| (phi(x) - eq) * (phi(x) - eq), tol)?;
    let var_p = p.expect(|x| (psi_alpha(x) - ep) * (psi_alpha(x) - ep), tol)?;
    let ratio = eq / ep;
    let formula_value = ratio.powf(2.0 * (alpha - 1.0)) * var_q / ((alpha - 1.0) * (alpha - 1.0))
        + ratio.powf(2.0 * alpha) * var_p / (alpha * alpha);

    let (mc_value, mc_standard_error) = mc_variance_of(
        q,
        p,
        phi,
        |uq, up| {
            let b = objectives::BatchEval::new(uq.to_vec(), up.to_vec()).expect("finite batch");
            objectives::alpha_scale_objective(alpha, &b).expect("positive batch").value
        },
        n,
        repeats,
        seed,
    );
    Ok(VarianceReport { formula_value, mc_value, mc_standard_error, n, repeats })
}

/// n * Var at the exact optimizer phi* = (dQ/dP)^{alpha-1}:
/// |a-1|^{-2} Var_Q[(dQ/dP)^{a-1}] + a^{-2} Var_P[(dQ/dP)^a].
pub fn alpha_variance_at_optimizer(alpha: f64, q: Gaussian1d, p: Gaussian1d) -> Result<f64> {
    DivergenceFamily::alpha(alpha)?;
    let tol = 1e-9;
    let ratio = density_ratio_1d(q, p);
    let opt = move |x: f64| ratio(x).powf(alpha - 1.0);
    let ra = move |x: f64| ratio(x).powf(alpha);
    let m_opt = q.expect(opt, tol)?;
    let var_q = q.expect(|x| (opt(x) - m_opt) * (opt(x) - m_opt), tol)?;
    let m_ra = p.expect(ra, tol)?;
    let var_p = p.expect(|x| (ra(x) - m_ra) * (ra(x) - m_ra), tol)?;
    Ok(var_q / ((alpha - 1.0) * (alpha - 1.0)) + var_p / (alpha * alpha))
}

/// Relative asymptotic variance of the Hellinger scale objective at the
/// optimizer: (8 - D) / (2 D), for D in (0, 8).
pub fn hellinger_relative_variance(d: f64) -> Result<f64> {
    if !(0.0 < d && d < 8.0) {
        return Err(DivError::Domain(format!(
            "Hellinger divergence must lie in (0, 8), got {d}"
        )));
    }
    Ok((8.0 - d) / (2.0 * d))
}

// ---------------------------------------------------------------------------
// Consistency identities
// ---------------------------------------------------------------------------

const DEGENERATE_ESTIMATE: f64 = 1e-4;

/// Ratio testing the data-processing equality D(Q x k || P x k) = D(Q||P);
/// ideally 1.
pub fn data_processing_ratio(augmented_estimate: f64, base_estimate: f64) -> Result<f64> {
    if base_estimate.abs() < DEGENERATE_ESTIMATE {
        return Err(DivError::Degenerate(format!(
            "base divergence estimate {base_estimate:.3e} too close to zero"
        )));
    }
    Ok(augmented_estimate / base_estimate)
}

/// Ratio testing the product identity
/// D(prod Q_i || prod P_i) = (prod(a(a-1) D_i + 1) - 1)/(a(a-1)); ideally 1.
pub fn product_property_ratio(alpha: f64, factors: &[f64], joint_estimate: f64) -> Result<f64> {
    DivergenceFamily::alpha(alpha)?;
    if factors.is_empty() {
        return Err(DivError::Domain("need at least one factor estimate".into()));
    }
    if joint_estimate.abs() < DEGENERATE_ESTIMATE {
        return Err(DivError::Degenerate(format!(
            "joint divergence estimate {joint_estimate:.3e} too close to zero"
        )));
    }
    let scale = alpha * (alpha - 1.0);
    let combined = (factors.iter().map(|d| scale * d + 1.0).product::<f64>() - 1.0) / scale;
    Ok(combined / joint_estimate)
}

/// Exact alpha-divergence (or Renyi) mutual-information reference for
/// componentwise-correlated Gaussian pairs, via the closed-form Gaussian
/// integral E_P[(dQ/dP)^a] per component pair.
pub fn gaussian_mi_reference(alpha: f64, d: usize, rho: f64) -> Result<f64> {
    if !(rho.abs() < 1.0) {
        return Err(DivError::Domain(format!("|rho| must be < 1, got {rho}")));
    }
    DivergenceFamily::alpha(alpha)?;
    // per-pair integral for Q = N(0, [[1, rho], [rho, 1]]), P = N(0, I2)
    let det_q = 1.0 - rho * rho;
    let det_m = 1.0 - (1.0 - alpha) * (1.0 - alpha) * rho * rho;
    if det_m <= 0.0 {
        return Err(DivError::Domain("mixture covariance not positive-definite".into()));
    }
    let per_pair = (det_q.powf(1.0 - alpha) / det_m).sqrt();
    let total = per_pair.powi(d as i32);
    Ok((total - 1.0) / (alpha * (alpha - 1.0)))
}

/// KL mutual information for the same pair structure (for DV-family runs).
pub fn gaussian_mi_kl_reference(d: usize, rho: f64) -> Result<f64> {
    if !(rho.abs() < 1.0) {
        return Err(DivError::Domain(format!("|rho| must be < 1, got {rho}")));
    }
    Ok(-0.5 * d as f64 * (1.0 - rho * rho).ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divergence::{oracle_divergence, OracleOptions, OracleTarget};

    fn qp() -> (Gaussian1d, Gaussian1d) {
        (Gaussian1d::new(0.0, 0.5), Gaussian1d::new(0.0, 1.0))
    }

    #[test]
    fn kl_closed_forms_for_linear_direction() {
        let (q, p) = qp();
        let c = kl_hessian_closed_forms(q, p, |x| x).unwrap();
        assert!((c.id + 0.5).abs() < 1e-8, "{}", c.id);
        assert!((c.shift + 0.5).abs() < 1e-8);
        assert!((c.affine + 0.5).abs() < 1e-8);
    }

    #[test]
    fn kl_closed_forms_for_quadratic_direction() {
        let (q, p) = qp();
        let c = kl_hessian_closed_forms(q, p, |x| x * x).unwrap();
        assert!((c.id + 0.75).abs() < 1e-8, "{}", c.id);
        assert!((c.shift + 0.5).abs() < 1e-8);
        assert!(c.affine.abs() < 1e-8, "{}", c.affine);
    }

    #[test]
    fn kl_affine_rejects_equal_measures() {
        let p = Gaussian1d::new(0.0, 1.0);
        assert!(kl_hessian_closed_forms(p, p, |x| x).is_err());
    }

    #[test]
    fn fdiv_closed_forms_match_kl_special_case() {
        let (q, p) = qp();
        for psi in [|x: f64| x, |x: f64| x * x] {
            let kl = kl_hessian_closed_forms(q, p, psi).unwrap();
            let gen = fdiv_hessian_closed_forms(DivergenceFamily::kl(), q, p, psi).unwrap();
            assert!((kl.id - gen.id).abs() < 1e-7);
            assert!((kl.shift - gen.shift).abs() < 1e-7);
            assert!((kl.affine - gen.affine).abs() < 1e-7);
        }
    }

    #[test]
    fn fdiv_affine_matrix_form_matches_covariance_form() {
        let (q, p) = qp();
        let fam = DivergenceFamily::hellinger();
        let psi = |x: f64| x * x;
        let c = fdiv_hessian_closed_forms(fam, q, p, psi).unwrap();
        // covariance form of the affine Hessian
        let tol = 1e-10;
        let ratio = density_ratio_1d(q, p);
        let phi_star = move |x: f64| fam.f_d1(ratio(x));
        let w = move |x: f64| fam.f_star_d2(phi_star(x));
        let b = p.expect(w, tol).unwrap();
        let e = |h: &dyn Fn(f64) -> f64| p.expect(|x| w(x) * h(x), tol).unwrap() / b;
        let var_psi = e(&|x| psi(x) * psi(x)) - e(&psi).powi(2);
        let var_phi = e(&|x| phi_star(x) * phi_star(x)) - e(&phi_star).powi(2);
        let cov = e(&|x| phi_star(x) * psi(x)) - e(&phi_star) * e(&psi);
        let affine_cov_form = -b * (var_psi - cov * cov / var_phi);
        assert!((c.affine - affine_cov_form).abs() < 1e-7, "{} vs {affine_cov_form}", c.affine);
    }

    #[test]
    fn scale_form_vanishes_along_optimizer_direction() {
        let (q, p) = qp();
        let fam = DivergenceFamily::hellinger();
        let ratio = density_ratio_1d(q, p);
        let psi = move |x: f64| fam.f_d1(ratio(x));
        let c = fdiv_hessian_closed_forms(fam, q, p, psi).unwrap();
        assert!(c.scale.abs() < 1e-8, "{}", c.scale);
    }

    #[test]
    fn numeric_gateaux_matches_kl_closed_forms() {
        let (q, p) = qp();
        let psi = |x: f64| x;
        let closed = kl_hessian_closed_forms(q, p, psi).unwrap();
        for (t, expect) in [
            (TransformFamily::Id, closed.id),
            (TransformFamily::Shift, closed.shift),
            (TransformFamily::Affine, closed.affine),
        ] {
            let num =
                gateaux_second_derivative(DivergenceFamily::kl(), t, q, p, psi, 1e-2).unwrap();
            assert!(
                (num - expect).abs() / expect.abs().max(1e-3) < 1e-3,
                "{}: {num} vs {expect}",
                t.name()
            );
        }
    }

    #[test]
    fn numeric_gateaux_zero_direction_is_zero() {
        let (q, p) = qp();
        let v = gateaux_second_derivative(
            DivergenceFamily::kl(),
            TransformFamily::Shift,
            q,
            p,
            |_| 0.0,
            1e-2,
        )
        .unwrap();
        assert!(v.abs() < 1e-9, "{v}");
    }

    #[test]
    fn first_gateaux_derivative_vanishes_at_optimizer() {
        let (q, p) = qp();
        for fam in [DivergenceFamily::kl(), DivergenceFamily::hellinger()] {
            for t in [TransformFamily::Id, TransformFamily::Shift, TransformFamily::Scale] {
                let d1 = gateaux_first_derivative(fam, t, q, p, |x| x, 1e-2).unwrap();
                assert!(d1.abs() < 1e-6, "{} {}: {d1}", fam.name(), t.name());
            }
        }
    }

    #[test]
    fn eps_range_is_validated() {
        let (q, p) = qp();
        assert!(gateaux_second_derivative(
            DivergenceFamily::kl(),
            TransformFamily::Id,
            q,
            p,
            |x| x,
            0.5
        )
        .is_err());
    }

    #[test]
    fn curvature_ordering_over_random_polynomials() {
        use rand::SeedableRng;
        let (q, p) = qp();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        for _ in 0..100 {
            let (c0, c1, c2) =
                (rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
            let psi = move |x: f64| c0 + c1 * x + c2 * x * x;
            let c = kl_hessian_closed_forms(q, p, psi).unwrap();
            assert!(c.id <= c.shift + 1e-10 && c.shift <= c.affine + 1e-10);
            let f = fdiv_hessian_closed_forms(DivergenceFamily::hellinger(), q, p, psi).unwrap();
            assert!(f.id <= f.shift + 1e-10 && f.shift <= f.affine + 1e-10);
            assert!(f.id <= f.scale + 1e-10 && f.scale <= f.affine + 1e-10);
        }
    }

    #[test]
    fn lt_variance_formula_vs_monte_carlo() {
        let (q, p) = qp();
        let fam = DivergenceFamily::kl();
        let ratio = density_ratio_1d(q, p);
        let phi = move |x: f64| ratio(x).ln() + 1.0;
        let rep =
            lt_variance(fam, phi, q, p, MomentMode::Exact, 20_000, 120, 0xfeed).unwrap();
        assert!(
            (rep.mc_value - rep.formula_value).abs() < 3.0 * rep.mc_standard_error,
            "{} vs {} (se {})",
            rep.mc_value,
            rep.formula_value,
            rep.mc_standard_error
        );
        let emp =
            lt_variance(fam, phi, q, p, MomentMode::Empirical, 20_000, 10, 0xfeed).unwrap();
        assert!((emp.formula_value - rep.formula_value).abs() / rep.formula_value < 0.1);
    }

    #[test]
    fn constant_phi_has_zero_lt_variance() {
        let (q, p) = qp();
        let rep = lt_variance(
            DivergenceFamily::kl(),
            |_| 0.7,
            q,
            p,
            MomentMode::Exact,
            2000,
            10,
            1,
        )
        .unwrap();
        assert!(rep.formula_value.abs() < 1e-9);
        assert!(rep.mc_value.abs() < 1e-12);
    }

    #[test]
    fn alpha_variance_formula_reduces_at_optimizer() {
        let (q, p) = qp();
        let alpha = 0.5;
        let ratio = density_ratio_1d(q, p);
        let phi = move |x: f64| ratio(x).powf(alpha - 1.0);
        let rep =
            alpha_scale_asymptotic_variance(alpha, phi, q, p, 10_000, 60, 0xabc).unwrap();
        let at_opt = alpha_variance_at_optimizer(alpha, q, p).unwrap();
        assert!((rep.formula_value - at_opt).abs() < 1e-6, "{} vs {at_opt}", rep.formula_value);
        assert!((rep.mc_value - rep.formula_value).abs() < 3.0 * rep.mc_standard_error);
    }

    #[test]
    fn hellinger_relative_variance_formula() {
        assert!((hellinger_relative_variance(0.5).unwrap() - 7.5).abs() < 1e-12);
        assert!((hellinger_relative_variance(4.0).unwrap() - 0.5).abs() < 1e-12);
        assert!(hellinger_relative_variance(0.0).is_err());
        assert!(hellinger_relative_variance(8.0).is_err());
        // matches the at-optimizer formula normalized by D^2
        let (q, p) = qp();
        let d = oracle_divergence(
            OracleTarget::Family(DivergenceFamily::hellinger()),
            &GaussianSpec::scalar(vec![0.0], 0.5),
            &GaussianSpec::scalar(vec![0.0], 1.0),
            &OracleOptions::default(),
        )
        .unwrap()
        .value;
        let nvar = alpha_variance_at_optimizer(0.5, q, p).unwrap();
        let rel = hellinger_relative_variance(d).unwrap();
        assert!((nvar / (d * d) - rel).abs() / rel < 1e-6, "{} vs {rel}", nvar / (d * d));
    }

    #[test]
    fn consistency_ratios() {
        assert!((data_processing_ratio(0.8, 0.8).unwrap() - 1.0).abs() < 1e-12);
        assert!(data_processing_ratio(0.5, 1e-6).is_err());
        // single factor: ratio is factor / joint
        let r = product_property_ratio(0.5, &[0.3], 0.3).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
        // the combination rule matches the oracle on diagonal Gaussians
        let alpha = 0.5;
        let q1 = GaussianSpec::scalar(vec![0.2], 0.7);
        let p1 = GaussianSpec::scalar(vec![0.0], 1.0);
        let q2 = GaussianSpec::scalar(vec![-0.1], 1.4);
        let p2 = GaussianSpec::scalar(vec![0.0], 1.0);
        let opts = OracleOptions::default();
        let fam = OracleTarget::Family(DivergenceFamily::alpha(alpha).unwrap());
        let d1 = oracle_divergence(fam, &q1, &p1, &opts).unwrap().value;
        let d2 = oracle_divergence(fam, &q2, &p2, &opts).unwrap().value;
        let qj = GaussianSpec::diagonal(vec![0.2, -0.1], vec![0.7, 1.4]);
        let pj = GaussianSpec::standard(2);
        let dj = oracle_divergence(fam, &qj, &pj, &opts).unwrap().value;
        let ratio = product_property_ratio(alpha, &[d1, d2], dj).unwrap();
        assert!((ratio - 1.0).abs() < 1e-6, "{ratio}");
    }

    #[test]
    fn mi_reference_matches_oracle_for_one_pair() {
        // d = 1: MI oracle equals the 2-d joint-vs-product divergence
        let sampler = crate::data::MiPairSampler::new(1, 0.5, None).unwrap();
        let (joint, product) = sampler.joint_product_specs();
        let mc = oracle_divergence(
            OracleTarget::Family(DivergenceFamily::hellinger()),
            &joint,
            &product,
            &OracleOptions::default(),
        )
        .unwrap();
        let closed = gaussian_mi_reference(0.5, 1, 0.5).unwrap();
        let se = mc.standard_error.unwrap();
        assert!((mc.value - closed).abs() < 5.0 * se + 1e-4, "{} vs {closed}", mc.value);
        // and the Bhattacharyya route: D = 4 (1 - BC)
        let bc = 1.0 - closed / 4.0;
        assert!(bc > 0.9 && bc < 1.0);
    }

    #[test]
    fn mi_kl_reference_known_value() {
        let v = gaussian_mi_kl_reference(1, 0.5).unwrap();
        assert!((v + 0.5 * (0.75f64).ln()).abs() < 1e-12);
    }
}
