//! Compact Nelder-Mead simplex minimizer for the low-dimensional smooth
//! objectives in this crate.

/// Result of one simplex run.
#[derive(Debug, Clone)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub fx: f64,
    pub evals: usize,
    pub converged: bool,
    /// Best objective value after each iteration.
    pub history: Vec<f64>,
}

/// Minimize `f` from `x0` with initial step sizes `steps`, stopping when the
/// objective spread across the simplex falls below `ftol` or `max_evals` is
/// exhausted.
pub fn nelder_mead<F>(
    mut f: F,
    x0: &[f64],
    steps: &[f64],
    ftol: f64,
    max_evals: usize,
) -> SimplexResult
where
    F: FnMut(&[f64]) -> f64,
{
    let dim = x0.len();
    assert_eq!(steps.len(), dim);
    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);

    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| -> f64 {
        *evals += 1;
        f(x)
    };

    let mut pts: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    let fx0 = eval(x0, &mut evals);
    pts.push((x0.to_vec(), fx0));
    for i in 0..dim {
        let mut x = x0.to_vec();
        x[i] += steps[i];
        let fx = eval(&x, &mut evals);
        pts.push((x, fx));
    }

    let mut history = Vec::new();
    let mut converged = false;
    while evals < max_evals {
        pts.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        history.push(pts[0].1);
        if (pts[dim].1 - pts[0].1).abs() < ftol {
            converged = true;
            break;
        }
        // centroid of all but the worst
        let mut centroid = vec![0.0; dim];
        for (x, _) in pts.iter().take(dim) {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / dim as f64;
            }
        }
        let worst = pts[dim].clone();
        let second_worst = pts[dim - 1].1;
        let lerp = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&worst.0)
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };
        let xr = lerp(alpha);
        let fr = eval(&xr, &mut evals);
        if fr < pts[0].1 {
            let xe = lerp(gamma);
            let fe = eval(&xe, &mut evals);
            pts[dim] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < second_worst {
            pts[dim] = (xr, fr);
        } else {
            let xc = lerp(-rho);
            let fc = eval(&xc, &mut evals);
            if fc < worst.1 {
                pts[dim] = (xc, fc);
            } else {
                // shrink toward the best point
                let best = pts[0].0.clone();
                for entry in pts.iter_mut().skip(1) {
                    let x: Vec<f64> = best
                        .iter()
                        .zip(&entry.0)
                        .map(|(b, x)| b + sigma * (x - b))
                        .collect();
                    let fx = eval(&x, &mut evals);
                    *entry = (x, fx);
                }
            }
        }
    }
    pts.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    SimplexResult { x: pts[0].0.clone(), fx: pts[0].1, evals, converged, history }
}
