//! Checkpoint container.
//!
//! Layout:
//!
//! ```text
//! magic      8 bytes   b"ADSCKPT\0"
//! header_len u32 LE    length of the JSON header in bytes
//! header     JSON      format/version, architecture, train config,
//!                      preprocessing scalars and the ordered block table
//! blocks     f64 LE    each block's rows*cols values, in block-table order
//! ```
//!
//! Parameter blocks come first in declaration order (body, then head),
//! followed by preprocessing arrays.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::network::{Body, Network};
use super::train::ModelCheckpoint;
use super::{ModelError, ModelKind, Task, TrainConfig};
use crate::features::{MinMaxStats, PcaModel, ZScoreStats};
use crate::nn::{Activation, DenseLayer, LstmCell, Tensor2};

pub const CHECKPOINT_VERSION: u32 = 1;
const MAGIC: &[u8; 8] = b"ADSCKPT\0";
const FORMAT: &str = "adscreen-checkpoint";

/// Preprocessing fitted alongside a model, needed to featurize new subjects.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Preprocess {
    None,
    Disfluency(MinMaxStats),
    Acoustic { zscore: ZScoreStats, pca: PcaModel },
    Interventions { seq_len: usize },
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
enum BodySpec {
    Dense {
        inputs: usize,
        outputs: usize,
        activation: Activation,
    },
    Lstm {
        inputs: usize,
        hidden: usize,
        seq_len: usize,
    },
}

#[derive(Serialize, Deserialize)]
struct HeadSpec {
    inputs: usize,
    outputs: usize,
    activation: Activation,
}

#[derive(Serialize, Deserialize)]
struct Architecture {
    body: BodySpec,
    head: HeadSpec,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
enum PreprocessSpec {
    None,
    Minmax {
        dim: usize,
    },
    Acoustic {
        dim: usize,
        k: usize,
        total_variance: f64,
    },
    Sequence {
        seq_len: usize,
    },
}

#[derive(Serialize, Deserialize)]
struct BlockSpec {
    name: String,
    rows: usize,
    cols: usize,
}

#[derive(Serialize, Deserialize)]
struct Header {
    format: String,
    version: u32,
    kind: ModelKind,
    task: Task,
    architecture: Architecture,
    train_config: TrainConfig,
    /// Absent when the checkpoint was never evaluated.
    best_val_loss: Option<f64>,
    preprocess: PreprocessSpec,
    blocks: Vec<BlockSpec>,
}

fn bad(msg: impl Into<String>) -> ModelError {
    ModelError::Checkpoint(msg.into())
}

pub fn write_checkpoint<W: Write>(ckpt: &ModelCheckpoint, mut out: W) -> Result<(), ModelError> {
    let net = &ckpt.network;
    let mut blocks: Vec<(String, usize, usize, Vec<f64>)> = net
        .param_blocks()
        .into_iter()
        .map(|(name, r, c, v)| (name.to_string(), r, c, v.to_vec()))
        .collect();

    let preprocess = match &ckpt.preprocess {
        Preprocess::None => PreprocessSpec::None,
        Preprocess::Disfluency(mm) => {
            blocks.push(("pre.min".into(), 1, mm.dim(), mm.min.clone()));
            blocks.push(("pre.max".into(), 1, mm.dim(), mm.max.clone()));
            PreprocessSpec::Minmax { dim: mm.dim() }
        }
        Preprocess::Acoustic { zscore, pca } => {
            let dim = zscore.dim();
            blocks.push(("pre.z_mean".into(), 1, dim, zscore.mean.clone()));
            blocks.push(("pre.z_std".into(), 1, dim, zscore.std.clone()));
            blocks.push(("pre.pca_mean".into(), 1, pca.dim(), pca.mean.clone()));
            blocks.push((
                "pre.pca_components".into(),
                pca.k(),
                pca.dim(),
                pca.components.concat(),
            ));
            blocks.push((
                "pre.pca_variance".into(),
                1,
                pca.k(),
                pca.explained_variance.clone(),
            ));
            PreprocessSpec::Acoustic {
                dim,
                k: pca.k(),
                total_variance: pca.total_variance,
            }
        }
        Preprocess::Interventions { seq_len } => PreprocessSpec::Sequence { seq_len: *seq_len },
    };

    let body = match &net.body {
        Body::Dense(l) => BodySpec::Dense {
            inputs: l.inputs(),
            outputs: l.outputs(),
            activation: l.activation,
        },
        Body::Recurrent { cell, seq_len } => BodySpec::Lstm {
            inputs: cell.input_size(),
            hidden: cell.hidden_size,
            seq_len: *seq_len,
        },
    };
    let header = Header {
        format: FORMAT.into(),
        version: CHECKPOINT_VERSION,
        kind: net.kind,
        task: net.task,
        architecture: Architecture {
            body,
            head: HeadSpec {
                inputs: net.head.inputs(),
                outputs: net.head.outputs(),
                activation: net.head.activation,
            },
        },
        train_config: ckpt.train_config.clone(),
        best_val_loss: ckpt.best_val_loss.is_finite().then_some(ckpt.best_val_loss),
        preprocess,
        blocks: blocks
            .iter()
            .map(|(name, rows, cols, _)| BlockSpec {
                name: name.clone(),
                rows: *rows,
                cols: *cols,
            })
            .collect(),
    };
    let json = serde_json::to_vec(&header).map_err(|e| bad(e.to_string()))?;

    out.write_all(MAGIC)?;
    out.write_all(&(json.len() as u32).to_le_bytes())?;
    out.write_all(&json)?;
    for (_, _, _, values) in &blocks {
        for v in values {
            out.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_checkpoint<R: Read>(mut input: R) -> Result<ModelCheckpoint, ModelError> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    if bytes.len() < 12 || &bytes[..8] != MAGIC {
        return Err(bad("not an adscreen checkpoint (bad magic)"));
    }
    let header_len = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes")) as usize;
    let header_end = 12usize
        .checked_add(header_len)
        .filter(|&e| e <= bytes.len())
        .ok_or_else(|| bad("truncated header"))?;
    let header: Header =
        serde_json::from_slice(&bytes[12..header_end]).map_err(|e| bad(format!("header: {e}")))?;
    if header.format != FORMAT {
        return Err(bad(format!("unexpected format {:?}", header.format)));
    }
    if header.version != CHECKPOINT_VERSION {
        return Err(bad(format!("unsupported version {}", header.version)));
    }

    let mut payload = &bytes[header_end..];
    let mut blocks = Vec::with_capacity(header.blocks.len());
    for spec in &header.blocks {
        let count = spec
            .rows
            .checked_mul(spec.cols)
            .ok_or_else(|| bad("block size overflow"))?;
        let nbytes = count
            .checked_mul(8)
            .filter(|&n| n <= payload.len())
            .ok_or_else(|| bad(format!("block {} truncated", spec.name)))?;
        let values: Vec<f64> = payload[..nbytes]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        payload = &payload[nbytes..];
        blocks.push((spec, values));
    }
    if !payload.is_empty() {
        return Err(bad(format!("{} trailing bytes", payload.len())));
    }

    let mut iter = blocks.into_iter();
    let mut next = |name: &str, rows: usize, cols: usize| -> Result<Vec<f64>, ModelError> {
        let (spec, values) = iter
            .next()
            .ok_or_else(|| bad(format!("missing block {name}")))?;
        if spec.name != name || spec.rows != rows || spec.cols != cols {
            return Err(bad(format!(
                "block {} ({}x{}) where {name} ({rows}x{cols}) was expected",
                spec.name, spec.rows, spec.cols
            )));
        }
        Ok(values)
    };

    let body = match header.architecture.body {
        BodySpec::Dense {
            inputs,
            outputs,
            activation,
        } => Body::Dense(DenseLayer {
            w: Tensor2::from_vec(outputs, inputs, next("body.w", outputs, inputs)?)?,
            b: next("body.b", 1, outputs)?,
            activation,
        }),
        BodySpec::Lstm {
            inputs,
            hidden,
            seq_len,
        } => Body::Recurrent {
            cell: LstmCell {
                w_x: Tensor2::from_vec(4 * hidden, inputs, next("body.w_x", 4 * hidden, inputs)?)?,
                w_h: Tensor2::from_vec(4 * hidden, hidden, next("body.w_h", 4 * hidden, hidden)?)?,
                b: next("body.b", 1, 4 * hidden)?,
                hidden_size: hidden,
            },
            seq_len,
        },
    };
    let h = &header.architecture.head;
    let head = DenseLayer {
        w: Tensor2::from_vec(h.outputs, h.inputs, next("head.w", h.outputs, h.inputs)?)?,
        b: next("head.b", 1, h.outputs)?,
        activation: h.activation,
    };

    let preprocess = match header.preprocess {
        PreprocessSpec::None => Preprocess::None,
        PreprocessSpec::Minmax { dim } => Preprocess::Disfluency(MinMaxStats {
            min: next("pre.min", 1, dim)?,
            max: next("pre.max", 1, dim)?,
        }),
        PreprocessSpec::Acoustic {
            dim,
            k,
            total_variance,
        } => {
            let zscore = ZScoreStats {
                mean: next("pre.z_mean", 1, dim)?,
                std: next("pre.z_std", 1, dim)?,
            };
            let mean = next("pre.pca_mean", 1, dim)?;
            let flat = next("pre.pca_components", k, dim)?;
            let explained_variance = next("pre.pca_variance", 1, k)?;
            Preprocess::Acoustic {
                zscore,
                pca: PcaModel {
                    mean,
                    components: flat.chunks(dim.max(1)).map(<[f64]>::to_vec).collect(),
                    explained_variance,
                    total_variance,
                },
            }
        }
        PreprocessSpec::Sequence { seq_len } => Preprocess::Interventions { seq_len },
    };
    if iter.next().is_some() {
        return Err(bad("unexpected extra blocks"));
    }

    let network = Network {
        kind: header.kind,
        task: header.task,
        body,
        head,
    };
    if network.head.inputs() != network.representation_width() {
        return Err(bad("head width does not match body output"));
    }
    Ok(ModelCheckpoint {
        network,
        preprocess,
        train_config: header.train_config,
        best_val_loss: header.best_val_loss.unwrap_or(f64::INFINITY),
    })
}

pub fn save_checkpoint(ckpt: &ModelCheckpoint, path: &Path) -> Result<(), ModelError> {
    let mut buf = Vec::new();
    write_checkpoint(ckpt, &mut buf)?;
    fs::write(path, buf)?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<ModelCheckpoint, ModelError> {
    read_checkpoint(fs::File::open(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{build_classifier, ArchConfig, ModelInput};

    fn sample(kind: ModelKind) -> ModelCheckpoint {
        let arch = ArchConfig {
            acoustic_inputs: 3,
            ..ArchConfig::default()
        };
        let preprocess = match kind {
            ModelKind::Disfluency => Preprocess::Disfluency(MinMaxStats {
                min: vec![0.1; 11],
                max: vec![0.9; 11],
            }),
            ModelKind::Acoustic => Preprocess::Acoustic {
                zscore: ZScoreStats {
                    mean: vec![1.0, 2.0, 3.0, 4.0],
                    std: vec![0.5, 0.0, 1.0, 2.0],
                },
                pca: PcaModel {
                    mean: vec![0.0; 4],
                    components: vec![
                        vec![1.0, 0.0, 0.0, 0.0],
                        vec![0.0, 1.0, 0.0, 0.0],
                        vec![0.0, 0.0, 0.6, 0.8],
                    ],
                    explained_variance: vec![3.0, 2.0, 1.0],
                    total_variance: 6.5,
                },
            },
            ModelKind::Interventions => Preprocess::Interventions { seq_len: 32 },
        };
        ModelCheckpoint {
            network: build_classifier(kind, &arch, 17),
            preprocess,
            train_config: TrainConfig::default(),
            best_val_loss: 0.123_456_789_012_345_6,
        }
    }

    #[test]
    fn round_trip_is_exact() {
        for kind in ModelKind::ALL {
            let ckpt = sample(kind);
            let mut buf = Vec::new();
            write_checkpoint(&ckpt, &mut buf).unwrap();
            let back = read_checkpoint(&buf[..]).unwrap();
            assert_eq!(back, ckpt);
        }
    }

    #[test]
    fn regression_round_trip() {
        let ckpt = sample(ModelKind::Interventions);
        let reg = ModelCheckpoint {
            network: ckpt.to_regressor().unwrap(),
            best_val_loss: f64::INFINITY,
            ..ckpt
        };
        let mut buf = Vec::new();
        write_checkpoint(&reg, &mut buf).unwrap();
        let back = read_checkpoint(&buf[..]).unwrap();
        assert_eq!(back, reg);
        let x = ModelInput::Sequence(Tensor2::zeros(32, 3));
        assert_eq!(
            back.predict_mmse(&x).unwrap(),
            reg.predict_mmse(&x).unwrap()
        );
    }

    #[test]
    fn rejects_corruption() {
        let ckpt = sample(ModelKind::Disfluency);
        let mut buf = Vec::new();
        write_checkpoint(&ckpt, &mut buf).unwrap();
        assert!(read_checkpoint(&buf[..buf.len() - 1]).is_err());
        let mut extra = buf.clone();
        extra.push(0);
        assert!(read_checkpoint(&extra[..]).is_err());
        let mut magic = buf.clone();
        magic[0] = b'X';
        assert!(read_checkpoint(&magic[..]).is_err());
        let text = String::from_utf8_lossy(&buf).replace("\"version\":1", "\"version\":9");
        assert!(read_checkpoint(text.as_bytes()).is_err());
    }
}
