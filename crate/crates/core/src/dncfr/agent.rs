//! The neural agent: regression of a network onto per-infoset targets, warm-started from the
//! previous parameters.

use num_traits::Float;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::TrainError;
use crate::neural::{clip_gradients, Adam, FeatureSequence, Network, PlateauScheduler};

/// `β*`: optimization settings of one network.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentHyperparams {
    /// `β_epoch`.
    pub epochs: usize,
    /// `β_lr`, also the rate restored on reset.
    pub lr: f64,
    /// `β_loss`: early stop once the average epoch loss drops below it.
    pub loss_threshold: f64,
    /// `β_re`: epochs without a new best before the learning rate is reset.
    pub reset_after: usize,
    /// Neural mini-batch size `m`.
    pub batch: usize,
    pub factor: f64,
    pub patience: usize,
    pub min_lr: f64,
    /// Element-wise gradient clip `ε`.
    pub clip: f64,
}

impl AgentHyperparams {
    pub fn rsn() -> Self {
        Self {
            epochs: 2000,
            lr: 0.001,
            loss_threshold: 1e-4,
            reset_after: 100,
            batch: 256,
            factor: 0.5,
            patience: 10,
            min_lr: 1e-6,
            clip: 1.0,
        }
    }

    pub fn asn() -> Self {
        Self { loss_threshold: 1e-5, factor: 0.7, patience: 15, ..Self::rsn() }
    }
}

/// One regression example: the infoset's features and a target per legal action.
#[derive(Debug, Clone)]
pub struct TrainingSample<'a, T> {
    pub input: &'a FeatureSequence<T>,
    pub target: Vec<T>,
}

#[derive(Debug, Clone)]
pub struct FitReport<T> {
    /// The parameters of the best epoch.
    pub net: Network<T>,
    pub best_loss: f64,
    pub epochs: usize,
    pub early_stopped: bool,
    pub final_lr: f64,
}

/// `(√(t−1) · R̂^{t−1} + r̃) / √t`, with `R̂^0 = 0`.
pub fn rsn_target<T: Float>(previous: &[T], increment: &[T], t: u64) -> Vec<T> {
    assert!(t >= 1, "iterations start at 1");
    let t = T::from(t).expect("iteration fits the scalar");
    let keep = (t - T::one()).sqrt();
    let root = t.sqrt();
    previous.iter().zip(increment).map(|(&p, &r)| (keep * p + r) / root).collect()
}

/// `S(·|θ^{t−1}) + s`.
pub fn asn_target<T: Float>(previous: &[T], increment: &[T]) -> Vec<T> {
    previous.iter().zip(increment).map(|(&p, &s)| p + s).collect()
}

/// Squared error over the legal actions, summed over actions.
fn sample_loss<T: Float>(output: &[T], target: &[T]) -> T {
    output.iter().zip(target).fold(T::zero(), |acc, (&y, &t)| acc + (y - t) * (y - t))
}

/// Minimizes the mean over mini-batches of `Σ_a (target_a − f(a|x, θ))²` starting from
/// `start`, with clipping, a plateau scheduler, learning-rate resets and early stopping.
pub fn neural_agent_fit<T: Float, R: Rng + ?Sized>(
    start: &Network<T>,
    samples: &[TrainingSample<'_, T>],
    hp: &AgentHyperparams,
    rng: &mut R,
) -> Result<FitReport<T>, TrainError> {
    if samples.is_empty() {
        return Err(TrainError::EmptyMemory);
    }
    let mut net = start.clone();
    let mut adam = Adam::new(net.num_params());
    let mut scheduler = PlateauScheduler::new(hp.lr, hp.factor, hp.patience, hp.min_lr);
    let mut lr = hp.lr;
    let clip = T::from(hp.clip).expect("finite clip");
    let mut best = net.clone();
    let mut best_loss = f64::INFINITY;
    let mut best_epoch = 0;
    let mut last_reset = 0;
    let mut order: Vec<usize> = (0..samples.len()).collect();
    let mut grad = vec![T::zero(); net.num_params()];
    let mut epochs = 0;
    let mut early_stopped = false;

    for epoch in 1..=hp.epochs {
        epochs = epoch;
        order.shuffle(rng);
        let mut loss_sum = 0.0;
        let mut batches = 0;
        for batch in order.chunks(hp.batch.max(1)) {
            grad.iter_mut().for_each(|g| *g = T::zero());
            let m = T::from(batch.len()).expect("batch size fits");
            let mut batch_loss = T::zero();
            for &k in batch {
                let sample = &samples[k];
                let fwd = net.forward_cached(sample.input);
                let n = sample.target.len();
                batch_loss = batch_loss + sample_loss(&fwd.output[..n], &sample.target);
                let two = T::one() + T::one();
                let mut dy = vec![T::zero(); fwd.output.len()];
                for a in 0..n {
                    dy[a] = two * (fwd.output[a] - sample.target[a]) / m;
                }
                net.backward(&fwd, &dy, &mut grad);
            }
            let batch_loss = (batch_loss / m).to_f64().unwrap_or(f64::NAN);
            if !batch_loss.is_finite() {
                return Err(TrainError::NonFiniteLoss { epoch, loss: batch_loss, lr, records: samples.len() });
            }
            clip_gradients(&mut grad, clip);
            adam.step(net.params_mut(), &grad, T::from(lr).expect("finite lr"));
            loss_sum += batch_loss;
            batches += 1;
        }
        let avg = loss_sum / batches as f64;
        lr = scheduler.step(avg);
        if avg < hp.loss_threshold {
            best = net.clone();
            best_loss = avg;
            early_stopped = true;
            break;
        } else if avg < best_loss {
            best_loss = avg;
            best_epoch = epoch;
            best = net.clone();
        }
        if epoch - best_epoch.max(last_reset) > hp.reset_after {
            scheduler.reset();
            lr = hp.lr;
            last_reset = epoch;
        }
    }
    Ok(FitReport { net: best, best_loss, epochs, early_stopped, final_lr: lr })
}
