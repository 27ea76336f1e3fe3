//! Paired Student t-test.

use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTestResult {
    pub t_statistic: f64,
    /// Two-sided.
    pub p_value: f64,
    pub df: usize,
}

/// Paired t-test on `a - b`.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<TTestResult> {
    if a.len() != b.len() {
        return Err(Error::Shape(format!(
            "paired samples of length {} and {}",
            a.len(),
            b.len()
        )));
    }
    let n = a.len();
    if n < 2 {
        return Err(Error::Input(format!("need at least two pairs, got {n}")));
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mean = d.iter().sum::<f64>() / n as f64;
    let var = d.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    if !(var > 0.0) {
        return Err(Error::Degenerate(
            "paired differences have zero variance".into(),
        ));
    }
    let t = mean / (var / n as f64).sqrt();
    let df = n - 1;
    Ok(TTestResult {
        t_statistic: t,
        p_value: student_t_two_sided(t, df as f64),
        df,
    })
}

/// P(|T| ≥ |t|) for Student's t with `df` degrees of freedom.
pub fn student_t_two_sided(t: f64, df: f64) -> f64 {
    if t.is_nan() {
        return f64::NAN;
    }
    if t.is_infinite() {
        return 0.0;
    }
    let x = df / (df + t * t);
    beta_reg(0.5 * df, 0.5, x).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn t_distribution_with_one_df_is_cauchy() {
        for &t in &[0.3f64, 1.0, 4.0, 25.0] {
            let expect = 1.0 - 2.0 * t.atan() / std::f64::consts::PI;
            assert_abs_diff_eq!(student_t_two_sided(t, 1.0), expect, epsilon = 1e-13);
        }
    }

    #[test]
    fn linear_differences() {
        let a = [1.0, 2.0, 3.0, 4.0, 5.0];
        let b = [0.0; 5];
        let r = paired_t_test(&a, &b).unwrap();
        assert_abs_diff_eq!(r.t_statistic, 4.242_640_687_119_285, epsilon = 1e-12);
        assert_eq!(r.df, 4);
        // reference evaluated at 50 digits
        assert_abs_diff_eq!(r.p_value, 0.013_235_599_563_682_69, epsilon = 1e-12);
    }

    #[test]
    fn degenerate_and_short_inputs() {
        let a = [1.0, 2.0, 3.0];
        let b = [0.5, 1.5, 2.5];
        assert!(matches!(paired_t_test(&a, &b), Err(Error::Degenerate(_))));
        assert!(paired_t_test(&[1.0], &[2.0]).is_err());
        assert!(paired_t_test(&[1.0, 2.0], &[2.0]).is_err());
    }

    #[test]
    fn swap_negates_t() {
        let a = [3.0, 1.5, 4.25, 2.0];
        let b = [1.0, 1.0, 2.0, 2.5];
        let ab = paired_t_test(&a, &b).unwrap();
        let ba = paired_t_test(&b, &a).unwrap();
        assert_eq!(ab.t_statistic, -ba.t_statistic);
        assert_eq!(ab.p_value, ba.p_value);
    }
}
