//! Maximum-likelihood fitting of the Weibull AFT model to right-censored
//! data, over `(beta, log sigma)` so the scale stays positive without
//! constraints.

use crate::error::{Error, Result};
use crate::lifestress::LifeStressModel;
use crate::nelder;
use crate::weibull::{AftParams, CensoredDataset};

/// Result of a maximum-likelihood fit.
#[derive(Debug, Clone)]
pub struct FittedModel {
    pub params: AftParams,
    pub log_likelihood: f64,
    pub converged: bool,
    pub n_params: usize,
    pub aic: f64,
}

/// AIC of a converged fit: `2 k - 2 ll`.
pub fn aic(fit: &FittedModel) -> Result<f64> {
    if !fit.converged {
        return Err(Error::InvalidArgument(
            "AIC requested for an unconverged fit".into(),
        ));
    }
    Ok(fit.aic)
}

/// Precomputed design rows: basis vector, log-time and censoring flag per
/// observation. Shared by the likelihood evaluations inside one fit.
struct Design {
    dim: usize,
    // Row-major basis vectors, data.n() x dim.
    rows: Vec<f64>,
    log_times: Vec<f64>,
    observed: Vec<bool>,
    // Constant term of the likelihood: -sum of log t over observed failures.
    log_time_constant: f64,
}

impl Design {
    fn build(data: &CensoredDataset, model: &LifeStressModel) -> Result<Self> {
        let dim = model.basis_dimension();
        let n = data.n();
        let mut rows = vec![0.0; n * dim];
        let mut log_times = Vec::with_capacity(n);
        let mut observed = Vec::with_capacity(n);
        let mut log_time_constant = 0.0;
        for (i, o) in data.observations.iter().enumerate() {
            if !(o.time > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "time must be positive, got {}",
                    o.time
                )));
            }
            model.basis_into(o.stress, &mut rows[i * dim..(i + 1) * dim])?;
            let lt = o.time.ln();
            log_times.push(lt);
            observed.push(o.observed);
            if o.observed {
                log_time_constant -= lt;
            }
        }
        Ok(Self {
            dim,
            rows,
            log_times,
            observed,
            log_time_constant,
        })
    }

    /// Log-likelihood at `theta = (beta.., log sigma)`.
    fn log_likelihood(&self, theta: &[f64]) -> f64 {
        let dim = self.dim;
        let log_sigma = theta[dim];
        let inv_sigma = (-log_sigma).exp();
        let beta = &theta[..dim];
        let mut ll = self.log_time_constant;
        let mut n_observed = 0usize;
        for i in 0..self.log_times.len() {
            let row = &self.rows[i * dim..(i + 1) * dim];
            let mut mu = 0.0;
            for (x, b) in row.iter().zip(beta) {
                mu += x * b;
            }
            let z = (self.log_times[i] - mu) * inv_sigma;
            if self.observed[i] {
                ll += z - z.exp();
                n_observed += 1;
            } else {
                ll -= z.exp();
            }
        }
        ll - n_observed as f64 * log_sigma
    }
}

fn check_identifiable(data: &CensoredDataset, model: &LifeStressModel) -> Result<()> {
    let dim = model.basis_dimension();
    let failures: Vec<&crate::weibull::CensoredObservation> =
        data.observations.iter().filter(|o| o.observed).collect();
    if failures.len() < dim + 1 {
        return Err(Error::Unidentifiable(format!(
            "need at least {} observed failures for a {}-parameter regression, got {}",
            dim + 1,
            dim + 1,
            failures.len()
        )));
    }
    let mut stresses: Vec<f64> = failures.iter().map(|o| o.stress).collect();
    stresses.sort_by(f64::total_cmp);
    stresses.dedup();
    if stresses.len() < 2 {
        return Err(Error::Unidentifiable(
            "observed failures span fewer than 2 distinct stresses".into(),
        ));
    }
    Ok(())
}

/// Solves the dense symmetric system `A x = b` by Gaussian elimination with
/// partial pivoting. `A` is row-major `n x n`.
fn solve_linear(mut a: Vec<f64>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let mut pivot = col;
        for r in col + 1..n {
            if a[r * n + col].abs() > a[pivot * n + col].abs() {
                pivot = r;
            }
        }
        if a[pivot * n + col].abs() < 1e-12 {
            return Err(Error::Unidentifiable(
                "singular normal equations in the least-squares initializer".into(),
            ));
        }
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            b.swap(col, pivot);
        }
        for r in col + 1..n {
            let factor = a[r * n + col] / a[col * n + col];
            for k in col..n {
                a[r * n + k] -= factor * a[col * n + k];
            }
            b[r] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for col in (0..n).rev() {
        let mut v = b[col];
        for k in col + 1..n {
            v -= a[col * n + k] * x[k];
        }
        x[col] = v / a[col * n + col];
    }
    Ok(x)
}

/// Least-squares regression of log-time on the basis, observed failures only,
/// with sigma initialized to the residual standard deviation. Used to start
/// the simplex search and as the fallback estimate when the full fit fails.
pub fn least_squares_init(data: &CensoredDataset, model: &LifeStressModel) -> Result<AftParams> {
    check_identifiable(data, model)?;
    let dim = model.basis_dimension();
    let mut xtx = vec![0.0; dim * dim];
    let mut xty = vec![0.0; dim];
    let mut x = vec![0.0; dim];
    let mut n_obs = 0usize;
    for o in data.observations.iter().filter(|o| o.observed) {
        model.basis_into(o.stress, &mut x)?;
        let y = o.time.ln();
        for i in 0..dim {
            for j in 0..dim {
                xtx[i * dim + j] += x[i] * x[j];
            }
            xty[i] += x[i] * y;
        }
        n_obs += 1;
    }
    let beta = solve_linear(xtx, xty)?;
    let mut ss = 0.0;
    for o in data.observations.iter().filter(|o| o.observed) {
        model.basis_into(o.stress, &mut x)?;
        let fitted: f64 = x.iter().zip(&beta).map(|(a, b)| a * b).sum();
        ss += (o.time.ln() - fitted).powi(2);
    }
    let dof = (n_obs.saturating_sub(dim)).max(1) as f64;
    let sigma = (ss / dof).sqrt().max(1e-3);
    AftParams::new(beta, sigma)
}

const FIT_TOLERANCE: f64 = 1e-8;

/// Maximizes the right-censored log-likelihood over `(beta, log sigma)` with
/// a derivative-free simplex search started from the least-squares fit.
///
/// `converged = false` signals that the simplex did not reach the relative
/// tolerance within the evaluation budget; the caller decides policy.
pub fn fit_mle(
    data: &CensoredDataset,
    model: &LifeStressModel,
    init: Option<AftParams>,
) -> Result<FittedModel> {
    check_identifiable(data, model)?;
    let dim = model.basis_dimension();
    let start = match init {
        Some(p) => {
            if p.beta.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: p.beta.len(),
                });
            }
            p
        }
        None => least_squares_init(data, model)?,
    };

    let design = Design::build(data, model)?;
    let mut theta0 = start.beta.clone();
    theta0.push(start.sigma.ln());
    let steps: Vec<f64> = theta0
        .iter()
        .map(|v| (0.1 * v.abs()).max(0.05))
        .collect();

    let result = nelder::minimize(
        |theta| -design.log_likelihood(theta),
        &theta0,
        &steps,
        FIT_TOLERANCE,
        400 * (dim + 1),
    );

    let sigma = result.x[dim].exp();
    let params = AftParams::new(result.x[..dim].to_vec(), sigma)?;
    let ll = -result.fx;
    let n_params = dim + 1;
    Ok(FittedModel {
        params,
        log_likelihood: ll,
        converged: result.converged && ll.is_finite(),
        n_params,
        aic: 2.0 * n_params as f64 - 2.0 * ll,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lifestress::StressBasis;
    use crate::weibull::{log_likelihood, quantile, CensoredObservation};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn simulate_uncensored(
        model: &LifeStressModel,
        params: &AftParams,
        stresses: &[f64],
        per_stress: usize,
        seed: u64,
    ) -> CensoredDataset {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut obs = Vec::new();
        for &s in stresses {
            for _ in 0..per_stress {
                let u: f64 = rng.gen_range(f64::EPSILON..1.0);
                let t = crate::weibull::sample_lifetime(s, model, params, u).unwrap();
                obs.push(CensoredObservation {
                    stress: s,
                    time: t,
                    observed: true,
                });
            }
        }
        CensoredDataset::new(obs)
    }

    #[test]
    fn recovers_generating_parameters() {
        let model = LifeStressModel::new(StressBasis::Identity, 0.0, 1.0).unwrap();
        let truth = AftParams::new(vec![12.5, -19.5], 0.5).unwrap();
        let data = simulate_uncensored(&model, &truth, &[0.2, 0.9], 2000, 7);
        let fit = fit_mle(&data, &model, None).unwrap();
        assert!(fit.converged);
        for (est, tru) in fit.params.beta.iter().zip(&truth.beta) {
            assert!((est / tru - 1.0).abs() < 0.02, "{est} vs {tru}");
        }
        assert!((fit.params.sigma / truth.sigma - 1.0).abs() < 0.05);
    }

    #[test]
    fn fitted_likelihood_not_below_truth_or_init() {
        let model = LifeStressModel::new(StressBasis::Identity, 0.0, 1.0).unwrap();
        let truth = AftParams::new(vec![12.5, -19.5], 0.5).unwrap();
        let data = simulate_uncensored(&model, &truth, &[0.2, 0.5, 0.9], 50, 11);
        let fit = fit_mle(&data, &model, None).unwrap();
        let ll_truth = log_likelihood(&data, &model, &truth).unwrap();
        assert!(fit.log_likelihood >= ll_truth - 1e-6);
        let init = least_squares_init(&data, &model).unwrap();
        let ll_init = log_likelihood(&data, &model, &init).unwrap();
        assert!(fit.log_likelihood >= ll_init - 1e-6);
    }

    #[test]
    fn all_censored_is_unidentifiable() {
        let model = LifeStressModel::new(StressBasis::Identity, 0.0, 1.0).unwrap();
        let data = CensoredDataset::new(vec![
            CensoredObservation { stress: 0.2, time: 100.0, observed: false };
            20
        ]);
        match fit_mle(&data, &model, None) {
            Err(Error::Unidentifiable(_)) => {}
            other => panic!("expected Unidentifiable, got {other:?}"),
        }
    }

    #[test]
    fn single_stress_is_unidentifiable() {
        let model = LifeStressModel::new(StressBasis::Identity, 0.0, 1.0).unwrap();
        let truth = AftParams::new(vec![12.5, -19.5], 0.5).unwrap();
        let data = simulate_uncensored(&model, &truth, &[0.4], 30, 3);
        assert!(matches!(
            fit_mle(&data, &model, None),
            Err(Error::Unidentifiable(_))
        ));
    }

    #[test]
    fn time_scale_consistency() {
        // Multiplying all times by c shifts beta0 by ln c, leaves the rest.
        let model = LifeStressModel::new(StressBasis::Identity, 0.0, 1.0).unwrap();
        let truth = AftParams::new(vec![12.5, -19.5], 0.5).unwrap();
        let data = simulate_uncensored(&model, &truth, &[0.2, 0.9], 200, 5);
        let fit = fit_mle(&data, &model, None).unwrap();
        let c = 7.5;
        let scaled = CensoredDataset::new(
            data.observations
                .iter()
                .map(|o| CensoredObservation {
                    stress: o.stress,
                    time: o.time * c,
                    observed: o.observed,
                })
                .collect(),
        );
        let fit2 = fit_mle(&scaled, &model, None).unwrap();
        assert!((fit2.params.beta[0] - fit.params.beta[0] - c.ln()).abs() < 1e-4);
        assert!((fit2.params.beta[1] - fit.params.beta[1]).abs() < 1e-4);
        assert!((fit2.params.sigma - fit.params.sigma).abs() < 1e-5);
    }

    #[test]
    fn aic_definition_and_param_counts() {
        let model = LifeStressModel::new(StressBasis::Identity, 0.0, 1.0).unwrap();
        let truth = AftParams::new(vec![12.5, -19.5], 0.5).unwrap();
        let data = simulate_uncensored(&model, &truth, &[0.2, 0.9], 40, 9);
        let fit = fit_mle(&data, &model, None).unwrap();
        assert_eq!(fit.n_params, 3);
        assert!((fit.aic - (2.0 * 3.0 - 2.0 * fit.log_likelihood)).abs() < 1e-10);
        assert!((aic(&fit).unwrap() - fit.aic).abs() == 0.0);

        let quad = LifeStressModel::new(StressBasis::Polynomial(2), 0.0, 1.0).unwrap();
        let qtruth = AftParams::new(vec![13.4, -37.9, 17.7], 0.5).unwrap();
        let qdata = simulate_uncensored(&quad, &qtruth, &[0.1, 0.5, 0.9], 60, 13);
        let qfit = fit_mle(&qdata, &quad, None).unwrap();
        assert_eq!(qfit.n_params, 4);
    }

    #[test]
    fn aic_rejects_unconverged_fit() {
        let model = LifeStressModel::new(StressBasis::Identity, 0.0, 1.0).unwrap();
        let fake = FittedModel {
            params: AftParams::new(vec![0.0, 0.0], 1.0).unwrap(),
            log_likelihood: -1.0,
            converged: false,
            n_params: 3,
            aic: 8.0,
        };
        let _ = model;
        assert!(aic(&fake).is_err());
    }

    #[test]
    fn quadratic_model_wins_aic_on_quadratic_data() {
        let quad = LifeStressModel::new(StressBasis::Polynomial(2), 0.0, 1.0).unwrap();
        let lin = LifeStressModel::new(StressBasis::Identity, 0.0, 1.0).unwrap();
        let truth = AftParams::new(vec![13.4, -37.9, 17.7], 0.5).unwrap();
        let data = simulate_uncensored(&quad, &truth, &[0.1, 0.3, 0.5, 0.7, 0.9], 60, 21);
        let qfit = fit_mle(&data, &quad, None).unwrap();
        let lfit = fit_mle(&data, &lin, None).unwrap();
        assert!(qfit.aic < lfit.aic);
    }

    #[test]
    fn finite_difference_gradient_near_zero_at_optimum() {
        let model = LifeStressModel::new(StressBasis::Identity, 0.0, 1.0).unwrap();
        let truth = AftParams::new(vec![12.5, -19.5], 0.5).unwrap();
        let data = simulate_uncensored(&model, &truth, &[0.2, 0.9], 300, 17);
        let fit = fit_mle(&data, &model, None).unwrap();
        let design = Design::build(&data, &model).unwrap();
        let mut theta = fit.params.beta.clone();
        theta.push(fit.params.sigma.ln());
        let f0 = design.log_likelihood(&theta);
        for i in 0..theta.len() {
            let h = 1e-5 * theta[i].abs().max(1.0);
            let mut tp = theta.clone();
            tp[i] += h;
            let mut tm = theta.clone();
            tm[i] -= h;
            let g = (design.log_likelihood(&tp) - design.log_likelihood(&tm)) / (2.0 * h);
            // Gradient relative to the curvature scale of the likelihood.
            assert!(g.abs() < 1e-2 * f0.abs().max(1.0), "coord {i}: grad {g}");
        }
    }

    #[test]
    fn design_likelihood_matches_direct_evaluation() {
        let model = LifeStressModel::new(StressBasis::Identity, 0.0, 1.0).unwrap();
        let params = AftParams::new(vec![12.5, -19.5], 0.5).unwrap();
        let data = CensoredDataset::new(vec![
            CensoredObservation { stress: 0.2, time: 120.0, observed: true },
            CensoredObservation { stress: 0.5, time: 60.0, observed: false },
            CensoredObservation { stress: 0.9, time: 2.5, observed: true },
        ]);
        let design = Design::build(&data, &model).unwrap();
        let mut theta = params.beta.clone();
        theta.push(params.sigma.ln());
        let a = design.log_likelihood(&theta);
        let b = log_likelihood(&data, &model, &params).unwrap();
        assert!((a - b).abs() < 1e-10, "{a} vs {b}");
    }

    #[test]
    fn median_prediction_from_recovered_fit_is_close() {
        let model = LifeStressModel::new(StressBasis::Identity, 0.0, 1.0).unwrap();
        let truth = AftParams::new(vec![12.5, -19.5], 0.5).unwrap();
        let data = simulate_uncensored(&model, &truth, &[0.2, 0.9], 2000, 31);
        let fit = fit_mle(&data, &model, None).unwrap();
        let q_true = quantile(0.5, 0.05, &model, &truth).unwrap();
        let q_hat = quantile(0.5, 0.05, &model, &fit.params).unwrap();
        assert!((q_hat / q_true - 1.0).abs() < 0.25, "{q_hat} vs {q_true}");
    }
}
