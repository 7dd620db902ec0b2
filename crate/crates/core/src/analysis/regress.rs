//! Ordinary least squares with an intercept and permutation p-values.
//!
//! A coefficient's p-value uses the Freedman-Lane scheme: the outcome is
//! rebuilt from the fitted values of the model without that predictor plus
//! permuted residuals of the same model, and the full model is refitted.
//! With a single predictor this is plain shuffling of `y`.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::seed::derive_seed;

pub const DEFAULT_PERMUTATIONS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressOptions {
    pub n_permutations: usize,
    pub seed: u64,
    /// Optional per-observation weights (weighted least squares).
    pub weights: Option<Vec<f64>>,
}

impl Default for RegressOptions {
    fn default() -> Self {
        RegressOptions {
            n_permutations: DEFAULT_PERMUTATIONS,
            seed: 0,
            weights: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionResult {
    /// `"intercept"` followed by the predictor names.
    pub names: Vec<String>,
    pub coefficients: Vec<f64>,
    /// Two-sided permutation p-values; none for the intercept.
    pub p_values: Vec<Option<f64>>,
    pub r_squared: f64,
    pub n: usize,
}

impl RegressionResult {
    pub fn coefficient(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|i| self.coefficients[i])
    }

    pub fn p_value(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).and_then(|i| self.p_values[i])
    }
}

/// Least-squares solver for a fixed design: coefficients are `solve * y`.
struct Design {
    x: DMatrix<f64>,
    solve: DMatrix<f64>,
    sqrt_w: DVector<f64>,
}

impl Design {
    fn new(columns: &[&[f64]], n: usize, weights: Option<&[f64]>) -> Result<Design, AnalysisError> {
        let p = columns.len() + 1;
        let x = DMatrix::from_fn(n, p, |i, j| if j == 0 { 1.0 } else { columns[j - 1][i] });
        let sqrt_w = DVector::from_fn(n, |i, _| weights.map_or(1.0, |w| w[i].sqrt()));
        let xw = DMatrix::from_fn(n, p, |i, j| x[(i, j)] * sqrt_w[i]);
        let svd = xw.clone().svd(true, true);
        let max_sv = svd.singular_values.max();
        let min_sv = svd.singular_values.min();
        if !(max_sv > 0.0) || min_sv <= max_sv * 1e-10 {
            return Err(AnalysisError::SingularDesign);
        }
        let pinv = svd.pseudo_inverse(0.0).map_err(|_| AnalysisError::SingularDesign)?;
        // beta = pinv(Xw) * (sqrt_w .* y)
        let solve = DMatrix::from_fn(p, n, |j, i| pinv[(j, i)] * sqrt_w[i]);
        Ok(Design { x, solve, sqrt_w })
    }

    fn fit(&self, y: &DVector<f64>) -> DVector<f64> {
        &self.solve * y
    }

    fn fitted(&self, beta: &DVector<f64>) -> DVector<f64> {
        &self.x * beta
    }
}

pub fn regress(
    y: &[f64],
    predictors: &[(&str, &[f64])],
    options: &RegressOptions,
) -> Result<RegressionResult, AnalysisError> {
    let n = y.len();
    let p = predictors.len() + 1;
    if predictors.iter().any(|(_, col)| col.len() != n) {
        return Err(AnalysisError::LengthMismatch);
    }
    if n <= p {
        return Err(AnalysisError::TooFewObservations { n, parameters: p });
    }
    let weights = options.weights.as_deref();
    if weights.is_some_and(|w| w.len() != n || w.iter().any(|&v| !(v > 0.0))) {
        return Err(AnalysisError::LengthMismatch);
    }
    let columns: Vec<&[f64]> = predictors.iter().map(|(_, c)| *c).collect();
    let full = Design::new(&columns, n, weights)?;
    let yv = DVector::from_column_slice(y);
    let beta = full.fit(&yv);

    let resid = &yv - full.fitted(&beta);
    let w = &full.sqrt_w;
    let wsum: f64 = w.iter().map(|s| s * s).sum();
    let ybar = yv.iter().zip(w.iter()).map(|(v, s)| v * s * s).sum::<f64>() / wsum;
    let ss_res: f64 = resid.iter().zip(w.iter()).map(|(r, s)| (r * s).powi(2)).sum();
    let ss_tot: f64 = yv.iter().zip(w.iter()).map(|(v, s)| ((v - ybar) * s).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };

    let mut p_values = vec![None];
    for j in 0..predictors.len() {
        let reduced_cols: Vec<&[f64]> = columns
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != j)
            .map(|(_, c)| *c)
            .collect();
        let reduced = Design::new(&reduced_cols, n, weights)?;
        let fitted_r = reduced.fitted(&reduced.fit(&yv));
        let resid_r: Vec<f64> = yv.iter().zip(fitted_r.iter()).map(|(a, b)| a - b).collect();
        let observed = beta[j + 1].abs();
        let tol = 1e-12 * observed.max(1e-300);
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(options.seed, &format!("regress/{}", predictors[j].0)));
        let mut perm = resid_r.clone();
        let mut y_star = DVector::zeros(n);
        let mut extreme = 0usize;
        for _ in 0..options.n_permutations {
            perm.shuffle(&mut rng);
            for i in 0..n {
                y_star[i] = fitted_r[i] + perm[i];
            }
            let b = full.solve.row(j + 1).transpose().dot(&y_star);
            if b.abs() >= observed - tol {
                extreme += 1;
            }
        }
        p_values.push(Some((1 + extreme) as f64 / (1 + options.n_permutations) as f64));
    }

    let mut names = vec!["intercept".to_string()];
    names.extend(predictors.iter().map(|(name, _)| name.to_string()));
    Ok(RegressionResult {
        names,
        coefficients: beta.iter().copied().collect(),
        p_values,
        r_squared,
        n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> RegressOptions {
        RegressOptions {
            n_permutations: 999,
            ..RegressOptions::default()
        }
    }

    #[test]
    fn exact_line() {
        let x: Vec<f64> = (0..10).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        let r = regress(&y, &[("x", &x)], &quick()).unwrap();
        assert!((r.coefficients[1] - 2.0).abs() < 1e-12);
        assert!(r.coefficients[0].abs() < 1e-12);
        assert!((r.r_squared - 1.0).abs() < 1e-12);
        assert!(r.p_value("x").unwrap() < 0.01);
        assert_eq!(r.p_values[0], None);
    }

    #[test]
    fn singular_and_short_designs() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        let y = [1.0, 3.0, 2.0, 5.0, 4.0];
        assert_eq!(
            regress(&y, &[("a", &x), ("b", &x)], &quick()),
            Err(AnalysisError::SingularDesign)
        );
        let constant = [3.0; 5];
        assert_eq!(regress(&y, &[("c", &constant)], &quick()), Err(AnalysisError::SingularDesign));
        assert!(matches!(
            regress(&y[..2], &[("a", &x[..2])], &quick()),
            Err(AnalysisError::TooFewObservations { .. })
        ));
    }

    #[test]
    fn partial_effect_controls_for_other_predictor() {
        // y depends on b only; a is correlated with b.
        let b: Vec<f64> = (0..40).map(|i| f64::from(i % 7) + 0.1 * f64::from(i)).collect();
        let a: Vec<f64> = b.iter().enumerate().map(|(i, v)| v + ((i * 37 % 11) as f64 - 5.0) * 0.3).collect();
        let y: Vec<f64> = b.iter().enumerate().map(|(i, v)| 3.0 * v + ((i * 13 % 5) as f64 - 2.0) * 0.5).collect();
        let r = regress(&y, &[("a", &a), ("b", &b)], &quick()).unwrap();
        assert!(r.p_value("b").unwrap() < 0.01);
        assert!(r.coefficient("b").unwrap() > 2.0);
    }

    #[test]
    fn weighted_fit_matches_replication() {
        // Integer weights behave like duplicated rows.
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [0.5, 0.7, 2.9, 3.1];
        let w = [1.0, 2.0, 1.0, 3.0];
        let opts = RegressOptions {
            weights: Some(w.to_vec()),
            ..quick()
        };
        let weighted = regress(&y, &[("x", &x)], &opts).unwrap();
        let xs = [0.0, 1.0, 1.0, 2.0, 3.0, 3.0, 3.0];
        let ys = [0.5, 0.7, 0.7, 2.9, 3.1, 3.1, 3.1];
        let dup = regress(&ys, &[("x", &xs)], &quick()).unwrap();
        for (a, b) in weighted.coefficients.iter().zip(&dup.coefficients) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
