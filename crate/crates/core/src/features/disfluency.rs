use super::{FeatureError, DISFLUENCY_DIM};
use crate::chat::{aggregate_counts, EventKind, Role, TranscriptDocument};

pub const DISFLUENCY_FEATURE_NAMES: [&str; DISFLUENCY_DIM] = [
    "word_rate",
    "intervention_rate",
    "short_pause_rate",
    "medium_pause_rate",
    "long_pause_rate",
    "timed_pause_rate",
    "filled_pause_rate",
    "repetition_rate",
    "retracing_rate",
    "trailing_off_rate",
    "unintelligible_rate",
];

/// Per-second rates: participant words, interviewer utterances, then the nine
/// participant event kinds in [`EventKind`] order.
pub fn extract_disfluency_raw(
    doc: &TranscriptDocument,
    audio_duration: f64,
) -> Result<Vec<f64>, FeatureError> {
    if !audio_duration.is_finite() || audio_duration <= 0.0 {
        return Err(FeatureError::NonPositiveDuration(audio_duration));
    }
    let par = aggregate_counts(doc, Role::Par);
    let inv = aggregate_counts(doc, Role::Inv);
    let mut v = Vec::with_capacity(DISFLUENCY_DIM);
    v.push(par.words as f64 / audio_duration);
    v.push(inv.utterances as f64 / audio_duration);
    v.extend(
        EventKind::ALL
            .iter()
            .map(|&k| par.events.get(k) as f64 / audio_duration),
    );
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chat::parse_transcript;

    #[test]
    fn word_rate() {
        let words = vec!["w"; 30].join(" ");
        let doc = parse_transcript(&format!("*PAR:\t{words} .\n"), "s").unwrap();
        let v = extract_disfluency_raw(&doc, 60.0).unwrap();
        assert_eq!(v[0], 0.5);
        assert!(v[1..].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn intervention_rate_counts_interviewer_turns() {
        let doc = parse_transcript("*PAR:\ta b .\n*INV:\tok .\n*INV:\tgo on .\n", "s").unwrap();
        let v = extract_disfluency_raw(&doc, 4.0).unwrap();
        assert_eq!(v[0], 0.5);
        assert_eq!(v[1], 0.5);
    }

    #[test]
    fn rejects_non_positive_duration() {
        let doc = parse_transcript("*PAR:\ta .\n", "s").unwrap();
        assert_eq!(
            extract_disfluency_raw(&doc, 0.0).unwrap_err(),
            FeatureError::NonPositiveDuration(0.0)
        );
        assert!(extract_disfluency_raw(&doc, -1.0).is_err());
        assert!(extract_disfluency_raw(&doc, f64::NAN).is_err());
    }
}
