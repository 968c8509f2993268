//! Fairness and summary statistics.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Jain fairness index `(Σx)² / (n·Σx²)`.
pub fn jain_index<S: Scalar>(throughputs: &[S]) -> Result<S> {
    let sum = throughputs.iter().fold(S::zero(), |a, &b| a + b);
    let sum_sq = throughputs.iter().fold(S::zero(), |a, &b| a + b * b);
    if throughputs.is_empty() || sum_sq.is_nan() || sum_sq <= S::zero() {
        return Err(Error::AllZeroThroughput);
    }
    Ok(sum * sum / (S::from_count(throughputs.len()) * sum_sq))
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

/// `(max − min) / mean`.
pub fn relative_spread(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    (max - min) / mean(values)
}

/// Average ranks (1-based), ties share the mean rank.
fn ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut out = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            out[k] = rank;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation (Pearson correlation of average ranks).
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len(), "spearman needs paired samples");
    let (rx, ry) = (ranks(x), ranks(y));
    let (mx, my) = (mean(&rx), mean(&ry));
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        cov += (a - mx) * (b - my);
        vx += (a - mx) * (a - mx);
        vy += (b - my) * (b - my);
    }
    cov / (vx * vy).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn jain_examples() {
        assert_eq!(jain_index(&[5.0, 5.0, 5.0, 5.0]).unwrap(), 1.0);
        assert_eq!(jain_index(&[1.0, 0.0, 0.0, 0.0]).unwrap(), 0.25);
        assert_relative_eq!(jain_index(&[1.0, 2.0, 3.0]).unwrap(), 36.0 / 42.0, epsilon = 1e-15);
        assert!(matches!(jain_index(&[0.0, 0.0]), Err(Error::AllZeroThroughput)));
        assert!(jain_index::<f64>(&[]).is_err());
    }

    #[test]
    fn spearman_basics() {
        assert_relative_eq!(spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]), 1.0);
        assert_relative_eq!(spearman(&[1.0, 2.0, 3.0, 4.0], &[9.0, 7.0, 3.0, 1.0]), -1.0);
        // ties: ranks [1.5,1.5,3] vs [1,2,3]
        assert_relative_eq!(
            spearman(&[1.0, 1.0, 2.0], &[1.0, 2.0, 3.0]),
            0.866_025_403_784_438_6,
            epsilon = 1e-12
        );
    }

    #[test]
    fn spread() {
        assert_relative_eq!(relative_spread(&[9.0, 10.0, 11.0]), 0.2);
    }
}
