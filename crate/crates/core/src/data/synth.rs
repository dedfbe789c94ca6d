use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{
    io_error, write_compare_csv, write_manifest, write_wav_stub, DataError, DatasetManifest,
    ManifestRow,
};
use crate::features::COMPARE_DIM;
use crate::models::{Label, MMSE_MAX};

/// Parameters of the synthetic corpus.
///
/// Each subject has a latent severity `z ~ N(+sep, 1)` for AD and
/// `N(-sep, 1)` for controls. Every feature view and the MMSE score are noisy
/// functions of `z`; at `sep = 0` both classes share one distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub n_subjects: usize,
    pub separation: f64,
    pub seed: u64,
    pub acoustic_dim: usize,
    /// Acoustic columns that carry `z`; the rest are pure noise.
    pub informative_dims: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_subjects: 80,
            separation: 3.0,
            seed: 0,
            acoustic_dim: COMPARE_DIM,
            informative_dims: 8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub manifest: DatasetManifest,
    pub manifest_path: PathBuf,
    /// Latent severity per subject, in manifest order.
    pub latent: Vec<f64>,
}

const WORDS: [&str; 24] = [
    "the", "boy", "is", "on", "stool", "cookie", "jar", "mother", "washing", "dishes", "water",
    "sink", "girl", "reaching", "window", "curtain", "plate", "floor", "falling", "over", "and",
    "she", "he", "kitchen",
];
const FILLERS: [&str; 3] = ["&uh", "&um", "&-uh"];
const PAUSES: [&str; 4] = ["(.)", "(..)", "(...)", "(1.5)"];
const PROMPTS: [&str; 4] = [
    "mhm .",
    "anything else ?",
    "what else do you see ?",
    "okay .",
];

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// One participant utterance whose disfluency density grows with `z`.
fn par_utterance(rng: &mut ChaCha8Rng, z: f64) -> String {
    let severity = sigmoid(0.9 * z);
    let n_words = rng.random_range(4..9) + ((1.0 - severity) * 4.0).round() as usize;
    let mut tokens: Vec<String> = Vec::new();
    for i in 0..n_words {
        if rng.random_bool(0.05 + 0.25 * severity) {
            tokens.push(FILLERS[rng.random_range(0..FILLERS.len())].into());
        }
        if i > 0 && rng.random_bool(0.04 + 0.22 * severity) {
            tokens.push(PAUSES[rng.random_range(0..PAUSES.len())].into());
        }
        let w = WORDS[rng.random_range(0..WORDS.len())];
        if rng.random_bool(0.02 + 0.10 * severity) {
            tokens.push(format!("{w} [/] {w}"));
        } else if rng.random_bool(0.01 + 0.08 * severity) {
            tokens.push(format!("<{w}> [//] {w}"));
        } else if rng.random_bool(0.01 + 0.06 * severity) {
            tokens.push("xxx".into());
        } else {
            tokens.push(w.into());
        }
    }
    if rng.random_bool(0.03 + 0.2 * severity) {
        tokens.push("+...".into());
    } else {
        tokens.push(".".into());
    }
    tokens.join(" ")
}

fn transcript(rng: &mut ChaCha8Rng, id: &str, label: Label, z: f64) -> String {
    let mut t = String::new();
    t.push_str(
        "@UTF8\n@Begin\n@Languages:\teng\n@Participants:\tPAR Participant, INV Investigator\n",
    );
    let _ = writeln!(
        t,
        "@ID:\teng|synthetic|PAR|||{}||Participant|||",
        if label.is_ad() {
            "ProbableAD"
        } else {
            "Control"
        }
    );
    let _ = writeln!(t, "@Media:\t{id}, audio");
    t.push_str("*INV:\tjust tell me everything you see going on in the picture .\n");
    let p_inv = 0.08 + 0.5 * sigmoid(1.1 * z);
    let n_par = rng.random_range(8..14);
    for _ in 0..n_par {
        let _ = writeln!(t, "*PAR:\t{}", par_utterance(rng, z));
        if rng.random_bool(p_inv) {
            let _ = writeln!(t, "*INV:\t{}", PROMPTS[rng.random_range(0..PROMPTS.len())]);
        }
    }
    t.push_str("@End\n");
    t
}

/// Writes transcripts, acoustic CSVs, WAV stubs and `manifest.csv` under
/// `out_dir`. Output is byte-identical for a given configuration.
pub fn generate_synthetic_corpus(
    config: &SynthConfig,
    out_dir: &Path,
) -> Result<SyntheticCorpus, DataError> {
    let n = config.n_subjects;
    if n == 0 || n % 2 == 1 {
        return Err(DataError::InvalidArity(n));
    }
    if !config.separation.is_finite() || config.separation < 0.0 {
        return Err(DataError::InvalidSeparation(config.separation));
    }
    for sub in ["transcripts", "acoustic", "audio"] {
        let d = out_dir.join(sub);
        fs::create_dir_all(&d).map_err(io_error(&d))?;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let width = n.to_string().len().max(3);
    let informative = config.informative_dims.min(config.acoustic_dim);

    let mut rows = Vec::with_capacity(n);
    let mut latent = Vec::with_capacity(n);
    for i in 0..n {
        let id = format!("S{:0width$}", i + 1);
        let label = if i % 2 == 0 { Label::Ad } else { Label::Cn };
        let centre = if label.is_ad() {
            config.separation
        } else {
            -config.separation
        };
        let z = centre + unit.sample(&mut rng);

        let transcript_path = out_dir.join("transcripts").join(format!("{id}.cha"));
        fs::write(&transcript_path, transcript(&mut rng, &id, label, z))
            .map_err(io_error(&transcript_path))?;

        let acoustic: Vec<f64> = (0..config.acoustic_dim)
            .map(|j| {
                let v = if j < informative {
                    z + 0.5 * unit.sample(&mut rng)
                } else {
                    unit.sample(&mut rng)
                };
                (v * 1e6).round() / 1e6
            })
            .collect();
        let acoustic_csv_path = out_dir.join("acoustic").join(format!("{id}.csv"));
        write_compare_csv(&acoustic_csv_path, &id, &acoustic)?;

        let duration = (rng.random_range(45.0..90.0f64) * 100.0).round() / 100.0;
        let audio_path = out_dir.join("audio").join(format!("{id}.wav"));
        write_wav_stub(&audio_path, duration, 100, 1, 8)?;

        let mmse = (21.0 - 2.2 * z + unit.sample(&mut rng))
            .round()
            .clamp(0.0, MMSE_MAX);

        rows.push(ManifestRow {
            subject_id: id.clone(),
            transcript_path,
            audio_path: Some(audio_path),
            duration_s: None,
            acoustic_csv_path,
            label: Some(label),
            mmse: Some(mmse),
            group_id: id,
        });
        latent.push(z);
    }

    let manifest = DatasetManifest {
        root: out_dir.to_path_buf(),
        rows,
    };
    let manifest_path = out_dir.join("manifest.csv");
    write_manifest(&manifest, &manifest_path)?;
    Ok(SyntheticCorpus {
        manifest,
        manifest_path,
        latent,
    })
}
