use std::collections::hash_map::DefaultHasher;
use std::hash::Hasher;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    derive_seed, ArchConfig, ClassProbabilities, MmseScore, ModelError, ModelInput, ModelKind, Task,
};
use crate::nn::{softmax_rows, Activation, DenseCache, DenseLayer, LstmCache, LstmCell, Tensor2};

/// Feature extractor below the output layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Body {
    Dense(DenseLayer),
    Recurrent { cell: LstmCell, seq_len: usize },
}

pub(crate) enum BodyCache {
    Dense(DenseCache),
    Recurrent(LstmCache),
}

/// A body plus an output head. Classification heads are 2-way softmax;
/// regression heads are a single linear unit on top of a frozen body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub kind: ModelKind,
    pub task: Task,
    pub body: Body,
    pub head: DenseLayer,
}

const KIND_TAG: [u64; 3] = [0x11, 0x22, 0x33];
const REGRESSION_HEAD_TAG: u64 = 0x5245_4752;

/// Untrained classifier with seeded Glorot initialization.
pub fn build_classifier(kind: ModelKind, arch: &ArchConfig, seed: u64) -> Network {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, KIND_TAG[kind as usize]));
    let (body, width) = match kind {
        ModelKind::Disfluency => (
            Body::Dense(DenseLayer::glorot(
                arch.disfluency_inputs,
                arch.disfluency_hidden,
                Activation::Relu,
                &mut rng,
            )),
            arch.disfluency_hidden,
        ),
        ModelKind::Acoustic => (
            Body::Dense(DenseLayer::glorot(
                arch.acoustic_inputs,
                arch.acoustic_hidden,
                Activation::Relu,
                &mut rng,
            )),
            arch.acoustic_hidden,
        ),
        ModelKind::Interventions => (
            Body::Recurrent {
                cell: LstmCell::glorot(3, arch.lstm_hidden, &mut rng),
                seq_len: arch.sequence_len,
            },
            arch.lstm_hidden,
        ),
    };
    Network {
        kind,
        task: Task::Classification,
        body,
        head: DenseLayer::glorot(width, 2, Activation::Softmax, &mut rng),
    }
}

/// Replaces the softmax head with one linear unit; the body is frozen.
pub fn to_regressor(source: &Network, seed: u64) -> Result<Network, ModelError> {
    if source.task != Task::Classification {
        return Err(ModelError::WrongTask {
            expected: Task::Classification,
            got: source.task,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, REGRESSION_HEAD_TAG));
    Ok(Network {
        kind: source.kind,
        task: Task::Regression,
        body: source.body.clone(),
        head: DenseLayer::glorot(
            source.representation_width(),
            1,
            Activation::Linear,
            &mut rng,
        ),
    })
}

impl Network {
    pub fn representation_width(&self) -> usize {
        match &self.body {
            Body::Dense(l) => l.outputs(),
            Body::Recurrent { cell, .. } => cell.hidden_size,
        }
    }

    pub fn body_param_count(&self) -> usize {
        match &self.body {
            Body::Dense(l) => l.param_count(),
            Body::Recurrent { cell, .. } => cell.param_count(),
        }
    }

    pub fn param_count(&self) -> usize {
        self.body_param_count() + self.head.param_count()
    }

    pub fn body_frozen(&self) -> bool {
        self.task == Task::Regression
    }

    pub fn trainable_param_count(&self) -> usize {
        if self.body_frozen() {
            self.head.param_count()
        } else {
            self.param_count()
        }
    }

    /// Penultimate representation of one input.
    pub(crate) fn represent(
        &self,
        input: &ModelInput,
    ) -> Result<(Vec<f64>, BodyCache), ModelError> {
        match (&self.body, input) {
            (Body::Dense(layer), ModelInput::Vector(x)) => {
                if x.len() != layer.inputs() {
                    return Err(self.input_mismatch(format!(
                        "{} features, expected {}",
                        x.len(),
                        layer.inputs()
                    )));
                }
                let (y, cache) = layer.forward(&Tensor2::row_vector(x))?;
                Ok((y.into_vec(), BodyCache::Dense(cache)))
            }
            (Body::Recurrent { cell, seq_len }, ModelInput::Sequence(seq)) => {
                let (h, cache) = cell.forward(seq, Some(*seq_len))?;
                Ok((h, BodyCache::Recurrent(cache)))
            }
            (Body::Dense(_), ModelInput::Sequence(_)) => {
                Err(self.input_mismatch("sequence input for a dense body".into()))
            }
            (Body::Recurrent { .. }, ModelInput::Vector(_)) => {
                Err(self.input_mismatch("vector input for a recurrent body".into()))
            }
        }
    }

    pub fn representation(&self, input: &ModelInput) -> Result<Vec<f64>, ModelError> {
        Ok(self.represent(input)?.0)
    }

    fn input_mismatch(&self, detail: String) -> ModelError {
        ModelError::InputMismatch {
            kind: self.kind,
            detail,
        }
    }

    /// Head pre-activations (logits or the raw regression output).
    pub fn head_output(&self, input: &ModelInput) -> Result<Vec<f64>, ModelError> {
        let h = self.representation(input)?;
        Ok(self
            .head
            .pre_activation(&Tensor2::row_vector(&h))?
            .into_vec())
    }

    pub fn predict_proba(&self, input: &ModelInput) -> Result<ClassProbabilities, ModelError> {
        self.expect_task(Task::Classification)?;
        let logits = Tensor2::row_vector(&self.head_output(input)?);
        let p = softmax_rows(&logits);
        ClassProbabilities::new([p.get(0, 0), p.get(0, 1)])
    }

    /// Linear head output clamped to the MMSE range.
    pub fn predict_mmse(&self, input: &ModelInput) -> Result<MmseScore, ModelError> {
        self.expect_task(Task::Regression)?;
        Ok(MmseScore::clamped(self.head_output(input)?[0]))
    }

    pub(crate) fn expect_task(&self, task: Task) -> Result<(), ModelError> {
        if self.task != task {
            return Err(ModelError::WrongTask {
                expected: task,
                got: self.task,
            });
        }
        Ok(())
    }

    /// Gradients of the body parameters, in [`Network::param_groups_mut`] order.
    pub(crate) fn body_backward(
        &self,
        cache: &BodyCache,
        upstream: &[f64],
    ) -> Result<Vec<Vec<f64>>, ModelError> {
        match (&self.body, cache) {
            (Body::Dense(layer), BodyCache::Dense(c)) => {
                let (g, _) = layer.backward(c, &Tensor2::row_vector(upstream))?;
                Ok(vec![g.w.into_vec(), g.b])
            }
            (Body::Recurrent { cell, .. }, BodyCache::Recurrent(c)) => {
                let g = cell.backward(c, upstream)?;
                Ok(vec![g.w_x.into_vec(), g.w_h.into_vec(), g.b])
            }
            _ => unreachable!("cache produced by the same body"),
        }
    }

    /// Mutable parameter groups: body groups (unless `head_only`), then head
    /// weights and bias.
    pub(crate) fn param_groups_mut(&mut self, head_only: bool) -> Vec<&mut [f64]> {
        let mut groups: Vec<&mut [f64]> = Vec::new();
        if !head_only {
            match &mut self.body {
                Body::Dense(l) => {
                    groups.push(l.w.data_mut());
                    groups.push(&mut l.b);
                }
                Body::Recurrent { cell, .. } => {
                    groups.push(cell.w_x.data_mut());
                    groups.push(cell.w_h.data_mut());
                    groups.push(&mut cell.b);
                }
            }
        }
        groups.push(self.head.w.data_mut());
        groups.push(&mut self.head.b);
        groups
    }

    /// Named parameter blocks in declaration order: `(name, rows, cols, values)`.
    pub fn param_blocks(&self) -> Vec<(&'static str, usize, usize, &[f64])> {
        let mut blocks = Vec::new();
        match &self.body {
            Body::Dense(l) => {
                blocks.push(("body.w", l.w.rows(), l.w.cols(), l.w.data()));
                blocks.push(("body.b", 1, l.b.len(), &l.b[..]));
            }
            Body::Recurrent { cell, .. } => {
                blocks.push((
                    "body.w_x",
                    cell.w_x.rows(),
                    cell.w_x.cols(),
                    cell.w_x.data(),
                ));
                blocks.push((
                    "body.w_h",
                    cell.w_h.rows(),
                    cell.w_h.cols(),
                    cell.w_h.data(),
                ));
                blocks.push(("body.b", 1, cell.b.len(), &cell.b[..]));
            }
        }
        blocks.push((
            "head.w",
            self.head.w.rows(),
            self.head.w.cols(),
            self.head.w.data(),
        ));
        blocks.push(("head.b", 1, self.head.b.len(), &self.head.b[..]));
        blocks
    }

    /// Hash of the exact bit patterns of the body parameters.
    pub fn body_fingerprint(&self) -> u64 {
        let mut h = DefaultHasher::new();
        for (name, _, _, values) in self.param_blocks() {
            if name.starts_with("body.") {
                for v in values {
                    h.write_u64(v.to_bits());
                }
            }
        }
        h.finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disfluency_parameter_count() {
        let net = build_classifier(ModelKind::Disfluency, &ArchConfig::default(), 1);
        assert_eq!(net.param_count(), 11 * 24 + 24 + 24 * 2 + 2);
        assert_eq!(net.param_count(), 338);
    }

    #[test]
    fn seeded_init_is_reproducible() {
        for kind in ModelKind::ALL {
            let a = build_classifier(kind, &ArchConfig::default(), 42);
            let b = build_classifier(kind, &ArchConfig::default(), 42);
            assert_eq!(a, b);
            assert_ne!(a, build_classifier(kind, &ArchConfig::default(), 43));
        }
    }

    #[test]
    fn zero_head_predicts_even_odds() {
        let mut net = build_classifier(ModelKind::Acoustic, &ArchConfig::default(), 3);
        net.head.w = Tensor2::zeros(2, 16);
        let p = net
            .predict_proba(&ModelInput::Vector(vec![0.3; 21]))
            .unwrap();
        assert_eq!(p.as_array(), [0.5, 0.5]);
    }

    #[test]
    fn regressor_shape_and_guard() {
        let net = build_classifier(ModelKind::Disfluency, &ArchConfig::default(), 1);
        let reg = to_regressor(&net, 1).unwrap();
        assert_eq!(reg.trainable_param_count(), 25);
        assert_eq!(reg.body, net.body);
        assert!(matches!(
            to_regressor(&reg, 1),
            Err(ModelError::WrongTask { .. })
        ));
    }

    #[test]
    fn regression_output_is_clamped() {
        let net = build_classifier(ModelKind::Disfluency, &ArchConfig::default(), 1);
        let mut reg = to_regressor(&net, 1).unwrap();
        reg.head.w = Tensor2::zeros(1, 24);
        let x = ModelInput::Vector(vec![0.5; 11]);
        reg.head.b = vec![15.0];
        assert_eq!(reg.predict_mmse(&x).unwrap().value(), 15.0);
        reg.head.b = vec![45.0];
        assert_eq!(reg.predict_mmse(&x).unwrap().value(), 30.0);
        assert!(reg.predict_proba(&x).is_err());
    }

    #[test]
    fn input_kind_is_checked() {
        let arch = ArchConfig::default();
        let mlp = build_classifier(ModelKind::Disfluency, &arch, 0);
        let rnn = build_classifier(ModelKind::Interventions, &arch, 0);
        assert!(mlp
            .predict_proba(&ModelInput::Sequence(Tensor2::zeros(32, 3)))
            .is_err());
        assert!(mlp
            .predict_proba(&ModelInput::Vector(vec![0.0; 10]))
            .is_err());
        assert!(rnn
            .predict_proba(&ModelInput::Vector(vec![0.0; 11]))
            .is_err());
        assert!(rnn
            .predict_proba(&ModelInput::Sequence(Tensor2::zeros(31, 3)))
            .is_err());
        assert!(rnn
            .predict_proba(&ModelInput::Sequence(Tensor2::zeros(32, 3)))
            .is_ok());
    }
}
