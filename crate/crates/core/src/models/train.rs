use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::checkpoint::Preprocess;
use super::network::{to_regressor, Network};
use super::{
    derive_seed, ClassProbabilities, Label, MmseScore, ModelError, ModelInput, Task, TrainConfig,
};
use crate::nn::{mse_loss, softmax_xent, AdamState, Tensor2};

const SHUFFLE_TAG: u64 = 0x5348_5546;

#[derive(Debug, Clone, Default)]
pub struct ClassificationSet {
    pub inputs: Vec<ModelInput>,
    pub labels: Vec<Label>,
}

impl ClassificationSet {
    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }
}

#[derive(Debug, Clone, Default)]
pub struct RegressionSet {
    pub inputs: Vec<ModelInput>,
    pub targets: Vec<f64>,
}

impl RegressionSet {
    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }
}

/// One row of the training history. For regression runs `train_metric` and
/// `val_metric` hold RMSE; for classification they hold accuracy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    pub train_metric: f64,
    pub val_metric: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingHistory {
    pub task: Task,
    /// Validation loss of the untrained model.
    pub initial_val_loss: f64,
    pub best_epoch: usize,
    pub records: Vec<EpochRecord>,
}

impl TrainingHistory {
    pub fn best_val_loss(&self) -> f64 {
        self.records
            .iter()
            .map(|r| r.val_loss)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Trained weights from the epoch with the lowest validation loss, plus the
/// preprocessing needed to turn raw subject data into model inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelCheckpoint {
    pub network: Network,
    pub preprocess: Preprocess,
    pub train_config: TrainConfig,
    pub best_val_loss: f64,
}

impl ModelCheckpoint {
    pub fn predict_proba(&self, input: &ModelInput) -> Result<ClassProbabilities, ModelError> {
        self.network.predict_proba(input)
    }

    pub fn predict_mmse(&self, input: &ModelInput) -> Result<MmseScore, ModelError> {
        self.network.predict_mmse(input)
    }

    /// Untrained regressor sharing this checkpoint's (frozen) body.
    pub fn to_regressor(&self) -> Result<Network, ModelError> {
        to_regressor(&self.network, self.train_config.seed)
    }

    pub fn with_preprocess(mut self, preprocess: Preprocess) -> Self {
        self.preprocess = preprocess;
        self
    }
}

fn onehot(labels: &[Label]) -> Tensor2 {
    let mut t = Tensor2::zeros(labels.len(), 2);
    for (i, l) in labels.iter().enumerate() {
        t.set(i, l.index(), 1.0);
    }
    t
}

/// Mean cross-entropy and accuracy of `net` on `set`.
fn evaluate_classification(
    net: &Network,
    set: &ClassificationSet,
) -> Result<(f64, f64), ModelError> {
    let reps = set
        .inputs
        .iter()
        .map(|x| net.representation(x))
        .collect::<Result<Vec<_>, _>>()?;
    let logits = net.head.pre_activation(&Tensor2::from_rows(&reps)?)?;
    let (loss, _) = softmax_xent(&logits, &onehot(&set.labels))?;
    let correct = (0..logits.rows())
        .filter(|&i| {
            let predicted = if logits.get(i, 1) > logits.get(i, 0) {
                Label::Ad
            } else {
                Label::Cn
            };
            predicted == set.labels[i]
        })
        .count();
    Ok((loss, correct as f64 / set.len() as f64))
}

/// Mini-batch Adam on categorical cross-entropy with best-validation-loss
/// checkpointing at epoch granularity.
pub fn train_classifier(
    mut net: Network,
    train: &ClassificationSet,
    val: &ClassificationSet,
    config: &TrainConfig,
) -> Result<(ModelCheckpoint, TrainingHistory), ModelError> {
    net.expect_task(Task::Classification)?;
    if train.is_empty() {
        return Err(ModelError::EmptySplit("training"));
    }
    if val.is_empty() {
        return Err(ModelError::EmptySplit("validation"));
    }

    let mut rng =
        ChaCha8Rng::seed_from_u64(derive_seed(config.seed, SHUFFLE_TAG ^ net.kind as u64));
    let mut adam = AdamState::new(config.lr_classification);
    let mut order: Vec<usize> = (0..train.len()).collect();

    let (initial_val_loss, _) = evaluate_classification(&net, val)?;
    let mut best = net.clone();
    let mut best_loss = f64::INFINITY;
    let mut best_epoch = 0;
    let mut records = Vec::with_capacity(config.max_epochs);

    for epoch in 1..=config.max_epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(config.batch_size.max(1)) {
            let mut reps = Vec::with_capacity(batch.len());
            let mut caches = Vec::with_capacity(batch.len());
            for &i in batch {
                let (h, cache) = net.represent(&train.inputs[i])?;
                reps.push(h);
                caches.push(cache);
            }
            let hidden = Tensor2::from_rows(&reps)?;
            let logits = net.head.pre_activation(&hidden)?;
            let labels: Vec<Label> = batch.iter().map(|&i| train.labels[i]).collect();
            let (_, dlogits) = softmax_xent(&logits, &onehot(&labels))?;
            let (head_grads, dhidden) = net.head.backward_from_pre(&hidden, &dlogits)?;

            let mut grads: Option<Vec<Vec<f64>>> = None;
            for (row, cache) in caches.iter().enumerate() {
                let g = net.body_backward(cache, dhidden.row(row))?;
                match &mut grads {
                    None => grads = Some(g),
                    Some(acc) => {
                        for (a, b) in acc.iter_mut().zip(g) {
                            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                        }
                    }
                }
            }
            let mut grads = grads.expect("non-empty batch");
            grads.push(head_grads.w.into_vec());
            grads.push(head_grads.b);
            let grad_refs: Vec<&[f64]> = grads.iter().map(Vec::as_slice).collect();
            adam.update(&mut net.param_groups_mut(false), &grad_refs)?;
        }

        let (train_loss, train_acc) = evaluate_classification(&net, train)?;
        let (val_loss, val_acc) = evaluate_classification(&net, val)?;
        records.push(EpochRecord {
            epoch,
            train_loss,
            val_loss,
            train_metric: train_acc,
            val_metric: val_acc,
        });
        if val_loss < best_loss {
            best_loss = val_loss;
            best = net.clone();
            best_epoch = epoch;
        }
    }

    if records.is_empty() {
        best_loss = initial_val_loss;
    }
    Ok((
        ModelCheckpoint {
            network: best,
            preprocess: Preprocess::None,
            train_config: config.clone(),
            best_val_loss: best_loss,
        },
        TrainingHistory {
            task: Task::Classification,
            initial_val_loss,
            best_epoch,
            records,
        },
    ))
}

fn head_predictions(net: &Network, reps: &Tensor2) -> Result<Vec<f64>, ModelError> {
    Ok(net.head.pre_activation(reps)?.into_vec())
}

/// Trains only the regression head on MSE. The body is frozen, so
/// representations are computed once up front.
///
/// The head bias starts at the mean training target.
pub fn train_regressor(
    mut net: Network,
    train: &RegressionSet,
    val: &RegressionSet,
    config: &TrainConfig,
) -> Result<(ModelCheckpoint, TrainingHistory), ModelError> {
    net.expect_task(Task::Regression)?;
    if train.is_empty() {
        return Err(ModelError::EmptySplit("training"));
    }
    if val.is_empty() {
        return Err(ModelError::EmptySplit("validation"));
    }
    let represent_all = |set: &RegressionSet| -> Result<Tensor2, ModelError> {
        let reps = set
            .inputs
            .iter()
            .map(|x| net.representation(x))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Tensor2::from_rows(&reps)?)
    };
    let train_reps = represent_all(train)?;
    let val_reps = represent_all(val)?;

    net.head.b[0] = train.targets.iter().sum::<f64>() / train.len() as f64;

    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(
        config.seed,
        SHUFFLE_TAG ^ 0x100 ^ net.kind as u64,
    ));
    let mut adam = AdamState::new(config.lr_regression);
    let mut order: Vec<usize> = (0..train.len()).collect();

    let (initial_val_loss, _) = mse_loss(&head_predictions(&net, &val_reps)?, &val.targets)?;
    let mut best = net.clone();
    let mut best_loss = f64::INFINITY;
    let mut best_epoch = 0;
    let mut records = Vec::with_capacity(config.max_epochs);

    for epoch in 1..=config.max_epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(config.batch_size.max(1)) {
            let rows: Vec<&[f64]> = batch.iter().map(|&i| train_reps.row(i)).collect();
            let hidden = Tensor2::from_rows(&rows)?;
            let targets: Vec<f64> = batch.iter().map(|&i| train.targets[i]).collect();
            let pred = head_predictions(&net, &hidden)?;
            let (_, dpred) = mse_loss(&pred, &targets)?;
            let dpred = Tensor2::from_vec(batch.len(), 1, dpred)?;
            let (g, _) = net.head.backward_from_pre(&hidden, &dpred)?;
            let w = g.w.into_vec();
            adam.update(&mut net.param_groups_mut(true), &[&w, &g.b])?;
        }

        let (train_loss, _) = mse_loss(&head_predictions(&net, &train_reps)?, &train.targets)?;
        let (val_loss, _) = mse_loss(&head_predictions(&net, &val_reps)?, &val.targets)?;
        records.push(EpochRecord {
            epoch,
            train_loss,
            val_loss,
            train_metric: train_loss.sqrt(),
            val_metric: val_loss.sqrt(),
        });
        if val_loss < best_loss {
            best_loss = val_loss;
            best = net.clone();
            best_epoch = epoch;
        }
    }

    if records.is_empty() {
        best_loss = initial_val_loss;
    }
    Ok((
        ModelCheckpoint {
            network: best,
            preprocess: Preprocess::None,
            train_config: config.clone(),
            best_val_loss: best_loss,
        },
        TrainingHistory {
            task: Task::Regression,
            initial_val_loss,
            best_epoch,
            records,
        },
    ))
}
