//! Minimal Nelder-Mead simplex minimizer used by the censored-likelihood fit.

pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub fx: f64,
    pub converged: bool,
    pub evaluations: usize,
}

/// Minimizes `f` starting from `x0` with per-coordinate initial steps.
///
/// Converged when both the relative function spread and the relative
/// coordinate spread of the simplex fall below `tol`.
pub fn minimize<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    steps: &[f64],
    tol: f64,
    max_evaluations: usize,
) -> NelderMeadResult {
    let dim = x0.len();
    debug_assert_eq!(steps.len(), dim);

    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| -> f64 {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    // Simplex: dim+1 points with their values.
    let mut points: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
    points.push(x0.to_vec());
    for i in 0..dim {
        let mut p = x0.to_vec();
        p[i] += steps[i];
        points.push(p);
    }
    let mut values: Vec<f64> = points.iter().map(|p| eval(p, &mut evals)).collect();

    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    let mut centroid = vec![0.0; dim];
    let mut converged = false;

    while evals < max_evaluations {
        // Order best..worst.
        let mut order: Vec<usize> = (0..=dim).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let best = order[0];
        let worst = order[dim];
        let second_worst = order[dim - 1];

        let f_best = values[best];
        let f_worst = values[worst];

        let f_spread = (f_worst - f_best).abs();
        let x_spread = points
            .iter()
            .map(|p| {
                p.iter()
                    .zip(&points[best])
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        let x_scale = points[best].iter().map(|v| v.abs()).fold(1.0, f64::max);
        if f_spread <= tol * (f_best.abs() + tol) && x_spread <= tol * x_scale {
            converged = true;
            break;
        }

        for (j, c) in centroid.iter_mut().enumerate() {
            *c = 0.0;
            for (i, p) in points.iter().enumerate() {
                if i != worst {
                    *c += p[j];
                }
            }
            *c /= dim as f64;
        }

        let reflect: Vec<f64> = centroid
            .iter()
            .zip(&points[worst])
            .map(|(c, w)| c + alpha * (c - w))
            .collect();
        let f_reflect = eval(&reflect, &mut evals);

        if f_reflect < f_best {
            let expand: Vec<f64> = centroid
                .iter()
                .zip(&points[worst])
                .map(|(c, w)| c + gamma * (c - w))
                .collect();
            let f_expand = eval(&expand, &mut evals);
            if f_expand < f_reflect {
                points[worst] = expand;
                values[worst] = f_expand;
            } else {
                points[worst] = reflect;
                values[worst] = f_reflect;
            }
        } else if f_reflect < values[second_worst] {
            points[worst] = reflect;
            values[worst] = f_reflect;
        } else {
            let contract: Vec<f64> = if f_reflect < f_worst {
                centroid
                    .iter()
                    .zip(&reflect)
                    .map(|(c, r)| c + rho * (r - c))
                    .collect()
            } else {
                centroid
                    .iter()
                    .zip(&points[worst])
                    .map(|(c, w)| c + rho * (w - c))
                    .collect()
            };
            let f_contract = eval(&contract, &mut evals);
            if f_contract < f_worst.min(f_reflect) {
                points[worst] = contract;
                values[worst] = f_contract;
            } else {
                // Shrink toward the best point.
                let best_point = points[best].clone();
                for i in 0..=dim {
                    if i == best {
                        continue;
                    }
                    for j in 0..dim {
                        points[i][j] = best_point[j] + sigma * (points[i][j] - best_point[j]);
                    }
                    values[i] = eval(&points[i].clone(), &mut evals);
                }
            }
        }
    }

    let mut best = 0;
    for i in 1..=dim {
        if values[i] < values[best] {
            best = i;
        }
    }
    NelderMeadResult {
        x: points[best].clone(),
        fx: values[best],
        converged,
        evaluations: evals,
    }
}
