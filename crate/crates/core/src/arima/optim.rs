//! Unconstrained parameterization of causal/invertible polynomials and a
//! derivative-free simplex minimizer.

/// Expands unconstrained values into polynomial coefficients by mapping
/// through tanh to partial correlations in (-1, 1) and running the
/// Durbin-Levinson recursion. The resulting AR (or MA) polynomial is causal
/// (or invertible) by construction.
pub fn expand_pacf(raw: &[f64]) -> Vec<f64> {
    // tanh rounds to exactly +-1.0 for |x| beyond ~19, which would put the
    // polynomial on the unit-root boundary; keep partials strictly inside.
    const LIMIT: f64 = 1.0 - 1e-10;
    let k = raw.len();
    let mut coef: Vec<f64> = raw.iter().map(|x| x.tanh().clamp(-LIMIT, LIMIT)).collect();
    let mut work = coef.clone();
    for j in 1..k {
        let a = coef[j];
        for i in 0..j {
            work[i] = coef[i] - a * coef[j - 1 - i];
        }
        coef[..j].copy_from_slice(&work[..j]);
    }
    coef
}

/// Inverse of [`expand_pacf`]: recovers the unconstrained values from
/// coefficients, or `None` when the polynomial is not strictly
/// causal/invertible.
#[cfg(test)]
pub fn contract_pacf(coef: &[f64]) -> Option<Vec<f64>> {
    let k = coef.len();
    let mut a = coef.to_vec();
    let mut pacf = vec![0.0; k];
    for j in (1..k).rev() {
        let r = a[j];
        if r.abs() >= 1.0 {
            return None;
        }
        pacf[j] = r;
        let denom = 1.0 - r * r;
        let prev: Vec<f64> = (0..j).map(|i| (a[i] + r * a[j - 1 - i]) / denom).collect();
        a[..j].copy_from_slice(&prev);
    }
    if k > 0 {
        if a[0].abs() >= 1.0 {
            return None;
        }
        pacf[0] = a[0];
    }
    Some(pacf.iter().map(|r| r.atanh()).collect())
}

/// Nelder-Mead minimization; returns the best point and value. `f` may
/// return infinity to reject a point. Deterministic for fixed inputs.
pub fn nelder_mead<F>(
    mut f: F,
    x0: &[f64],
    step: f64,
    max_iter: usize,
    ftol: f64,
) -> (Vec<f64>, f64)
where
    F: FnMut(&[f64]) -> f64,
{
    let dim = x0.len();
    if dim == 0 {
        let v = f(x0);
        return (x0.to_vec(), v);
    }
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
    simplex.push(x0.to_vec());
    for i in 0..dim {
        let mut v = x0.to_vec();
        v[i] += step;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|x| f(x)).collect();

    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    for _ in 0..max_iter {
        let mut order: Vec<usize> = (0..=dim).collect();
        order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(std::cmp::Ordering::Equal));
        let best = order[0];
        let worst = order[dim];
        let second_worst = order[dim - 1];

        if (values[worst] - values[best]).abs()
            <= ftol * (1.0 + values[best].abs() + values[worst].abs())
        {
            break;
        }

        // Centroid of all but the worst point.
        let mut centroid = vec![0.0; dim];
        for (idx, vertex) in simplex.iter().enumerate() {
            if idx == worst {
                continue;
            }
            for i in 0..dim {
                centroid[i] += vertex[i] / dim as f64;
            }
        }

        let reflect: Vec<f64> = (0..dim)
            .map(|i| centroid[i] + alpha * (centroid[i] - simplex[worst][i]))
            .collect();
        let fr = f(&reflect);

        if fr < values[best] {
            let expand: Vec<f64> = (0..dim)
                .map(|i| centroid[i] + gamma * (centroid[i] - simplex[worst][i]))
                .collect();
            let fe = f(&expand);
            if fe < fr {
                simplex[worst] = expand;
                values[worst] = fe;
            } else {
                simplex[worst] = reflect;
                values[worst] = fr;
            }
        } else if fr < values[second_worst] {
            simplex[worst] = reflect;
            values[worst] = fr;
        } else {
            let contract: Vec<f64> = (0..dim)
                .map(|i| centroid[i] + rho * (simplex[worst][i] - centroid[i]))
                .collect();
            let fc = f(&contract);
            if fc < values[worst] {
                simplex[worst] = contract;
                values[worst] = fc;
            } else {
                // Shrink toward the best vertex.
                let anchor = simplex[best].clone();
                for (idx, vertex) in simplex.iter_mut().enumerate() {
                    if idx == best {
                        continue;
                    }
                    for i in 0..dim {
                        vertex[i] = anchor[i] + sigma * (vertex[i] - anchor[i]);
                    }
                    values[idx] = f(vertex);
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
    (simplex[best].clone(), values[best])
}
