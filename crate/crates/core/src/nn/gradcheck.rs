//! Finite-difference verification of the backward pass.

use super::network::{Layer, Network};
use crate::error::Result;
use crate::Scalar;

/// Deliberate corruption of the analytic gradient, used as a negative control.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Fault {
    #[default]
    None,
    /// Negate every convolution weight and bias gradient.
    FlipConvSign,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    /// Parameter count compared.
    pub checked: usize,
}

/// Differences below this are treated as noise rather than relative error.
const ABS_FLOOR: f64 = 1e-7;

/// Compares analytic gradients against central differences on every
/// parameter. Relative error is `|a - n| / max(|a| + |n|, floor)`.
pub fn grad_check<S: Scalar>(net: &Network<S>, x: &[S], label: usize, eps: f64) -> Result<GradCheckReport> {
    grad_check_with(net, x, label, eps, Fault::None)
}

pub fn grad_check_with<S: Scalar>(
    net: &Network<S>,
    x: &[S],
    label: usize,
    eps: f64,
    fault: Fault,
) -> Result<GradCheckReport> {
    let analytic = net.loss_and_grads(x, &[label], 1)?.grads;
    let mut probe = net.clone();
    let mut max_rel: f64 = 0.0;
    let mut checked = 0;
    let h = S::from_f64_lossy(eps);
    let mut buffer = 0;
    for (li, layer) in net.layers().iter().enumerate() {
        let flip = matches!(layer, Layer::Conv(_)) && fault == Fault::FlipConvSign;
        let (dw, db) = &analytic.layers[li];
        for grads in [dw, db] {
            if grads.is_empty() {
                continue;
            }
            for (k, &g) in grads.iter().enumerate() {
                let a = if flip { -g } else { g }.to_f64_lossy();
                let orig = probe.params_mut()[buffer][k];
                probe.params_mut()[buffer][k] = orig + h;
                let up = probe.loss_and_grads(x, &[label], 1)?.loss.to_f64_lossy();
                probe.params_mut()[buffer][k] = orig - h;
                let down = probe.loss_and_grads(x, &[label], 1)?.loss.to_f64_lossy();
                probe.params_mut()[buffer][k] = orig;
                let numeric = (up - down) / (2.0 * eps);
                let rel = (a - numeric).abs() / (a.abs() + numeric.abs()).max(ABS_FLOOR);
                max_rel = max_rel.max(rel);
                checked += 1;
            }
            buffer += 1;
        }
    }
    Ok(GradCheckReport {
        max_rel_error: max_rel,
        checked,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::NetworkSpec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Random input whose ReLU and pool decisions sit well clear of ties.
    pub(crate) fn smooth_input(net: &Network<f64>, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        loop {
            let x: Vec<f64> = (0..net.input_dim()).map(|_| rng.gen_range(0.0..4.0)).collect();
            if net.kink_margin(&x).unwrap() > 1e-3 {
                return x;
            }
        }
    }

    #[test]
    fn small_network_passes() {
        let net = Network::<f64>::new(NetworkSpec::reduced(3, 8), 11).unwrap();
        let x = smooth_input(&net, 1);
        let r = grad_check(&net, &x, 0, 1e-4).unwrap();
        assert_eq!(r.checked, net.param_count());
        assert!(r.max_rel_error < 1e-3, "{r:?}");
    }

    #[test]
    fn flipped_conv_gradient_is_caught() {
        let net = Network::<f64>::new(NetworkSpec::reduced(3, 8), 11).unwrap();
        let x = smooth_input(&net, 1);
        let r = grad_check_with(&net, &x, 1, 1e-4, Fault::FlipConvSign).unwrap();
        assert!(r.max_rel_error > 0.1, "{r:?}");
    }
}
