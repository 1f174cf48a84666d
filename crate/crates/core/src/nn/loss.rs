use crate::error::{Error, Result};
use crate::Scalar;

/// Softmax over two logits with cross-entropy against `label`.
///
/// Returns `(probs, loss, grad_logits)` where `grad_logits = probs - onehot`.
pub fn softmax_xent<S: Scalar>(logits: [S; 2], label: usize) -> Result<([S; 2], S, [S; 2])> {
    if label > 1 {
        return Err(Error::invalid(format!("label {label} is not 0 or 1")));
    }
    if !logits[0].is_finite() || !logits[1].is_finite() {
        return Err(Error::Numeric(format!("non-finite logits ({}, {})", logits[0], logits[1])));
    }
    let probs = softmax(logits);
    let m = logits[0].max(logits[1]);
    let lse = m + ((logits[0] - m).exp() + (logits[1] - m).exp()).ln();
    let loss = lse - logits[label];
    let mut grad = probs;
    grad[label] -= S::one();
    Ok((probs, loss, grad))
}

pub fn softmax<S: Scalar>(logits: [S; 2]) -> [S; 2] {
    let m = logits[0].max(logits[1]);
    let e0 = (logits[0] - m).exp();
    let e1 = (logits[1] - m).exp();
    let z = e0 + e1;
    [e0 / z, e1 / z]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_logits() {
        let (p, loss, _) = softmax_xent([0.0f64, 0.0], 0).unwrap();
        assert_eq!(p, [0.5, 0.5]);
        assert!((loss - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn large_logits_are_stable() {
        let (p, loss, g) = softmax_xent([1000.0f64, 0.0], 0).unwrap();
        assert!((p[0] - 1.0).abs() < 1e-12 && p[1] < 1e-300);
        assert!(loss.abs() < 1e-12);
        assert!(g.iter().all(|v| v.is_finite()));
        let (_, loss, _) = softmax_xent([1000.0f32, 0.0], 1).unwrap();
        assert_eq!(loss, 1000.0);
    }

    #[test]
    fn gradient_matches_central_differences() {
        let h = 1e-4;
        for &(a, b) in &[(0.3f64, -1.2), (2.5, 2.4), (-4.0, 3.0)] {
            for label in 0..2 {
                let (p, _, g) = softmax_xent([a, b], label).unwrap();
                assert!((p[0] + p[1] - 1.0).abs() < 1e-9);
                let f = |x: [f64; 2]| softmax_xent(x, label).unwrap().1;
                let n0 = (f([a + h, b]) - f([a - h, b])) / (2.0 * h);
                let n1 = (f([a, b + h]) - f([a, b - h])) / (2.0 * h);
                for (num, an) in [(n0, g[0]), (n1, g[1])] {
                    assert!((num - an).abs() / (num.abs() + an.abs()).max(1e-12) < 1e-5);
                }
            }
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(softmax_xent([f64::NAN, 0.0], 0), Err(Error::Numeric(_))));
        assert!(softmax_xent([f64::INFINITY, 0.0], 0).is_err());
        assert!(softmax_xent([0.0f64, 0.0], 2).is_err());
    }
}
