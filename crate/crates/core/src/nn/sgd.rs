use crate::Scalar;

/// Classical momentum: `v = momentum * v - lr * g; p += v`.
pub fn sgd_step<S: Scalar>(params: &mut [S], grads: &[S], velocity: &mut [S], lr: S, momentum: S) {
    debug_assert!(params.len() == grads.len() && params.len() == velocity.len());
    for ((p, &g), v) in params.iter_mut().zip(grads).zip(velocity.iter_mut()) {
        *v = momentum * *v - lr * g;
        *p += *v;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_step() {
        let (mut p, mut v) = ([1.0f64], [0.0]);
        sgd_step(&mut p, &[0.25], &mut v, 1.0, 0.0);
        assert_eq!(p, [0.75]);
    }

    #[test]
    fn coasts_on_velocity() {
        let (mut p, mut v) = ([0.0f64], [2.0]);
        sgd_step(&mut p, &[0.0], &mut v, 0.1, 0.5);
        assert_eq!((p, v), ([1.0], [1.0]));
        sgd_step(&mut p, &[0.0], &mut v, 0.1, 0.5);
        assert_eq!((p, v), ([1.5], [0.5]));
    }

    #[test]
    fn two_step_trace() {
        let (lr, m) = (0.0005f64, 0.9);
        let (mut p, mut v) = ([0.4, -1.0], [0.0, 0.0]);
        sgd_step(&mut p, &[2.0, -0.5], &mut v, lr, m);
        sgd_step(&mut p, &[1.0, 0.5], &mut v, lr, m);
        // v1 = -lr*g1; v2 = m*v1 - lr*g2
        let v1 = [-0.001, 0.00025];
        let v2 = [0.9 * -0.001 - 0.0005, 0.9 * 0.00025 - 0.00025];
        assert_eq!(v, v2);
        assert_eq!(p, [0.4 + v1[0] + v2[0], -1.0 + v1[1] + v2[1]]);
        assert!((p[0] - 0.3976).abs() < 1e-15);
        assert!((p[1] - -0.999775).abs() < 1e-15);
    }
}
