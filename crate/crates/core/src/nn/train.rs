use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::network::Network;
use super::sgd::sgd_step;
use crate::error::{Error, Result};
use crate::Scalar;

/// SGD hyperparameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub momentum: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.0005,
            batch_size: 200,
            momentum: 0.9,
            epochs: 20,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::invalid(format!("learning rate must be positive, got {}", self.learning_rate)));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::invalid(format!("momentum must be in [0, 1), got {}", self.momentum)));
        }
        if self.batch_size == 0 || self.epochs == 0 {
            return Err(Error::invalid("batch size and epochs must be positive"));
        }
        Ok(())
    }
}

/// Flat feature rows with class labels (0 tampered, 1 authentic).
#[derive(Clone, Debug, PartialEq)]
pub struct Samples<S> {
    dim: usize,
    features: Vec<S>,
    labels: Vec<usize>,
}

impl<S: Scalar> Samples<S> {
    pub fn new(dim: usize, features: Vec<S>, labels: Vec<usize>) -> Result<Self> {
        if dim == 0 || features.len() != dim * labels.len() {
            return Err(Error::invalid(format!(
                "{} values do not form {} rows of {dim}",
                features.len(),
                labels.len()
            )));
        }
        if labels.iter().any(|&l| l > 1) {
            return Err(Error::invalid("labels must be 0 or 1"));
        }
        Ok(Self { dim, features, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn features(&self) -> &[S] {
        &self.features
    }

    fn gather(&self, idx: &[usize]) -> (Vec<S>, Vec<usize>) {
        let mut x = Vec::with_capacity(idx.len() * self.dim);
        for &i in idx {
            x.extend_from_slice(self.row(i));
        }
        (x, idx.iter().map(|&i| self.labels[i]).collect())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_acc: f64,
    pub val_loss: Option<f64>,
    pub val_acc: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Evaluation {
    pub loss: f64,
    pub accuracy: f64,
}

const EVAL_BATCH: usize = 256;

/// Mean loss and accuracy without touching the weights.
pub fn evaluate<S: Scalar>(net: &Network<S>, data: &Samples<S>) -> Result<Evaluation> {
    if data.is_empty() {
        return Err(Error::invalid("cannot evaluate on an empty set"));
    }
    let mut loss = 0.0;
    let mut correct = 0;
    let idx: Vec<usize> = (0..data.len()).collect();
    for chunk in idx.chunks(EVAL_BATCH) {
        let (x, y) = data.gather(chunk);
        let logits = net.logits_batch(&x, chunk.len())?;
        for (l, &label) in logits.iter().zip(&y) {
            let (p, sample_loss, _) = super::loss::softmax_xent(*l, label)?;
            loss += sample_loss.to_f64_lossy();
            correct += usize::from((if p[0] > p[1] { 0 } else { 1 }) == label);
        }
    }
    Ok(Evaluation {
        loss: loss / data.len() as f64,
        accuracy: correct as f64 / data.len() as f64,
    })
}

/// Trains in place with minibatch SGD and momentum, shuffling every epoch from
/// the configured seed. `on_epoch` sees each epoch's statistics as they are
/// produced.
pub fn train<S: Scalar>(
    net: &mut Network<S>,
    train_set: &Samples<S>,
    val_set: Option<&Samples<S>>,
    cfg: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochStats),
) -> Result<Vec<EpochStats>> {
    cfg.validate()?;
    if train_set.is_empty() {
        return Err(Error::invalid("training set is empty"));
    }
    if train_set.dim() != net.input_dim() {
        return Err(Error::invalid(format!(
            "training rows have {} values, network expects {}",
            train_set.dim(),
            net.input_dim()
        )));
    }
    let lr = S::from_f64_lossy(cfg.learning_rate);
    let momentum = S::from_f64_lossy(cfg.momentum);
    let mut velocity: Vec<Vec<S>> = net.params_mut().iter().map(|p| vec![S::zero(); p.len()]).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut history = Vec::with_capacity(cfg.epochs);
    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        let (mut loss_sum, mut correct) = (0.0, 0);
        for chunk in order.chunks(cfg.batch_size) {
            let (x, y) = train_set.gather(chunk);
            let r = net.loss_and_grads(&x, &y, chunk.len())?;
            loss_sum += r.loss.to_f64_lossy() * chunk.len() as f64;
            correct += r.correct;
            let grads = r.grads.layers.iter().flat_map(|(w, b)| [w, b]).filter(|g| !g.is_empty());
            for ((p, g), v) in net.params_mut().into_iter().zip(grads).zip(velocity.iter_mut()) {
                sgd_step(p, g, v, lr, momentum);
            }
        }
        for p in net.params_mut() {
            super::tensor::check_finite(p).map_err(|_| Error::Numeric(format!("training diverged in epoch {epoch}")))?;
        }
        let val = val_set.filter(|v| !v.is_empty()).map(|v| evaluate(net, v)).transpose()?;
        let stats = EpochStats {
            epoch,
            train_loss: loss_sum / train_set.len() as f64,
            train_acc: correct as f64 / train_set.len() as f64,
            val_loss: val.map(|v| v.loss),
            val_acc: val.map(|v| v.accuracy),
        };
        log::info!(
            "epoch {epoch}: loss {:.5} acc {:.4} val_acc {}",
            stats.train_loss,
            stats.train_acc,
            stats.val_acc.map_or("-".into(), |a| format!("{a:.4}"))
        );
        on_epoch(&stats);
        history.push(stats);
    }
    Ok(history)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::NetworkSpec;
    use rand::Rng;

    /// Class 1 puts mass on even positions, class 0 on odd ones.
    fn toy(n: usize, seed: u64) -> Samples<f32> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..n {
            let label = i % 2;
            for p in 0..279 {
                let on = (p % 2 == 0) == (label == 1);
                x.push(if on { rng.gen_range(0.5..1.5) } else { rng.gen_range(0.0..0.2) });
            }
            y.push(label);
        }
        Samples::new(279, x, y).unwrap()
    }

    fn cfg(epochs: usize) -> TrainConfig {
        TrainConfig {
            learning_rate: 0.01,
            batch_size: 16,
            epochs,
            seed: 5,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn defaults() {
        let c = TrainConfig::default();
        assert_eq!((c.learning_rate, c.batch_size, c.momentum, c.epochs), (0.0005, 200, 0.9, 20));
    }

    #[test]
    fn config_validation() {
        let bad = [
            TrainConfig { learning_rate: 0.0, ..cfg(1) },
            TrainConfig { batch_size: 0, ..cfg(1) },
            TrainConfig { momentum: 1.0, ..cfg(1) },
            TrainConfig { epochs: 0, ..cfg(1) },
        ];
        for c in bad {
            assert!(c.validate().is_err());
        }
    }

    #[test]
    fn loss_falls_on_separable_toy() {
        let data = toy(96, 1);
        let val = toy(32, 2);
        let mut net = Network::<f32>::new(NetworkSpec::reduced(4, 16), 3).unwrap();
        let hist = train(&mut net, &data, Some(&val), &cfg(4), |_| {}).unwrap();
        for w in hist.windows(2) {
            assert!(w[1].train_loss < w[0].train_loss, "{hist:?}");
        }
        assert!(hist.last().unwrap().val_acc.unwrap() >= 0.95);
    }

    #[test]
    fn training_is_reproducible() {
        let data = toy(40, 3);
        let run = || {
            let mut net = Network::<f32>::new(NetworkSpec::reduced(3, 8), 9).unwrap();
            let h = train(&mut net, &data, None, &cfg(2), |_| {}).unwrap();
            (net, h)
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn rejects_mismatched_data() {
        let mut net = Network::<f32>::new(NetworkSpec::reduced(3, 8), 9).unwrap();
        let wrong = Samples::new(10, vec![0.0; 20], vec![0, 1]).unwrap();
        assert!(train(&mut net, &wrong, None, &cfg(1), |_| {}).is_err());
        let empty = Samples::<f32>::new(279, vec![], vec![]).unwrap();
        assert!(train(&mut net, &empty, None, &cfg(1), |_| {}).is_err());
        assert!(Samples::new(2, vec![0.0f32; 4], vec![0, 3]).is_err());
        assert!(Samples::new(2, vec![0.0f32; 3], vec![0, 1]).is_err());
    }
}
