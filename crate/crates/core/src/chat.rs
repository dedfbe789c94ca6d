//! Parser for the subset of the CHAT transcription format used by
//! picture-description corpora.
//!
//! Only main tiers (`*PAR:`, `*INV:`, ...) carry signal. Headers (`@Key:`) are
//! kept as a key/value map, dependent tiers (`%mor:`, `%gra:`, ...) are skipped,
//! and tab-indented lines continue whatever tier precedes them.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ChatError {
    #[error("line {line}: main tier without ':' separator: {text:?}")]
    MalformedTier { line: usize, text: String },
    #[error("transcript contains no main tiers")]
    EmptyDocument,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Speaker {
    /// The participant (subject).
    Par,
    /// The investigator (interviewer).
    Inv,
    Other,
}

impl Speaker {
    pub fn from_code(code: &str) -> Self {
        match code {
            "PAR" => Speaker::Par,
            "INV" => Speaker::Inv,
            _ => Speaker::Other,
        }
    }

    pub fn code(self) -> &'static str {
        match self {
            Speaker::Par => "PAR",
            Speaker::Inv => "INV",
            Speaker::Other => "OTHER",
        }
    }
}

impl fmt::Display for Speaker {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

/// Speaker role after collapsing everyone who is not the subject into the
/// interviewer side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Role {
    Par,
    Inv,
}

/// Disfluency-relevant token events. The declaration order is the order used
/// by the disfluency feature vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EventKind {
    ShortPause,
    MediumPause,
    LongPause,
    TimedPause,
    FilledPause,
    Repetition,
    Retracing,
    TrailingOff,
    Unintelligible,
}

impl EventKind {
    pub const ALL: [EventKind; 9] = [
        EventKind::ShortPause,
        EventKind::MediumPause,
        EventKind::LongPause,
        EventKind::TimedPause,
        EventKind::FilledPause,
        EventKind::Repetition,
        EventKind::Retracing,
        EventKind::TrailingOff,
        EventKind::Unintelligible,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            EventKind::ShortPause => "ShortPause",
            EventKind::MediumPause => "MediumPause",
            EventKind::LongPause => "LongPause",
            EventKind::TimedPause => "TimedPause",
            EventKind::FilledPause => "FilledPause",
            EventKind::Repetition => "Repetition",
            EventKind::Retracing => "Retracing",
            EventKind::TrailingOff => "TrailingOff",
            EventKind::Unintelligible => "Unintelligible",
        }
    }
}

/// Fixed-size event counter indexed by [`EventKind`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EventCounts([u32; 9]);

impl EventCounts {
    pub fn get(&self, kind: EventKind) -> u32 {
        self.0[kind.index()]
    }

    pub fn bump(&mut self, kind: EventKind) {
        self.0[kind.index()] += 1;
    }

    pub fn add(&mut self, other: &EventCounts) {
        for (a, b) in self.0.iter_mut().zip(other.0.iter()) {
            *a += b;
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (EventKind, u32)> + '_ {
        EventKind::ALL.iter().map(move |&k| (k, self.get(k)))
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Utterance {
    pub speaker: Speaker,
    pub word_count: u32,
    pub event_counts: EventCounts,
    pub raw_text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptDocument {
    pub subject_id: String,
    pub utterances: Vec<Utterance>,
    pub header_fields: BTreeMap<String, String>,
}

/// Per-speaker totals produced by [`aggregate_counts`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SpeakerTotals {
    pub words: u32,
    pub utterances: u32,
    pub events: EventCounts,
}

impl SpeakerTotals {
    pub fn add(&mut self, other: &SpeakerTotals) {
        self.words += other.words;
        self.utterances += other.utterances;
        self.events.add(&other.events);
    }
}

/// Parses raw bytes, replacing invalid UTF-8 sequences.
pub fn parse_transcript_bytes(
    bytes: &[u8],
    subject_id: &str,
) -> Result<TranscriptDocument, ChatError> {
    parse_transcript(&String::from_utf8_lossy(bytes), subject_id)
}

pub fn parse_transcript(text: &str, subject_id: &str) -> Result<TranscriptDocument, ChatError> {
    enum Current {
        None,
        Header(String),
        Main(Speaker, String),
        Dependent,
    }

    let mut header_fields = BTreeMap::new();
    let mut utterances = Vec::new();
    let mut current = Current::None;

    let flush = |current: &mut Current, utterances: &mut Vec<Utterance>| {
        if let Current::Main(speaker, body) = std::mem::replace(current, Current::None) {
            utterances.push(analyze_utterance(speaker, body));
        }
    };

    for (lineno, raw_line) in text.lines().enumerate() {
        let line = raw_line.trim_end_matches('\r');
        if line.starts_with('\t') || (line.starts_with(' ') && !line.trim().is_empty()) {
            match &mut current {
                Current::Main(_, body) => {
                    body.push(' ');
                    body.push_str(line.trim());
                }
                Current::Header(key) => {
                    let entry: &mut String = header_fields.entry(key.clone()).or_default();
                    entry.push(' ');
                    entry.push_str(line.trim());
                }
                Current::Dependent | Current::None => {}
            }
            continue;
        }

        flush(&mut current, &mut utterances);

        if let Some(rest) = line.strip_prefix('*') {
            let Some((code, body)) = rest.split_once(':') else {
                return Err(ChatError::MalformedTier {
                    line: lineno + 1,
                    text: line.to_string(),
                });
            };
            current = Current::Main(Speaker::from_code(code.trim()), body.trim().to_string());
        } else if let Some(rest) = line.strip_prefix('@') {
            let (key, value) = match rest.split_once(':') {
                Some((k, v)) => (k.trim(), v.trim()),
                None => (rest.trim(), ""),
            };
            header_fields.insert(key.to_string(), value.to_string());
            current = Current::Header(key.to_string());
        } else if line.starts_with('%') {
            current = Current::Dependent;
        }
    }
    flush(&mut current, &mut utterances);

    if utterances.is_empty() {
        return Err(ChatError::EmptyDocument);
    }
    Ok(TranscriptDocument {
        subject_id: subject_id.to_string(),
        utterances,
        header_fields,
    })
}

const FILLERS: &[&str] = &[
    "uh", "um", "er", "ah", "eh", "hm", "hmm", "mm", "uhm", "erm", "uhuh", "mhm",
];

fn analyze_utterance(speaker: Speaker, raw_text: String) -> Utterance {
    let mut events = EventCounts::default();
    let stripped = strip_annotations(&raw_text, &mut events);

    let mut word_count = 0;
    for token in stripped.split_whitespace() {
        match classify_token(token) {
            Token::Event(kind) => events.bump(kind),
            Token::Word => word_count += 1,
            Token::Skip => {}
        }
    }

    Utterance {
        speaker,
        word_count,
        event_counts: events,
        raw_text,
    }
}

/// Removes `[...]` annotations (counting `[/]` and `[//]`), media bullets and
/// `<` `>` scope markers. The result is split on whitespace by the caller.
fn strip_annotations(text: &str, events: &mut EventCounts) -> String {
    let mut out = String::with_capacity(text.len());
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '[' => {
                let mut inner = String::new();
                for d in chars.by_ref() {
                    if d == ']' {
                        break;
                    }
                    inner.push(d);
                }
                match inner.trim() {
                    "/" => events.bump(EventKind::Repetition),
                    "//" => events.bump(EventKind::Retracing),
                    _ => {}
                }
                out.push(' ');
            }
            '\u{15}' => {
                for d in chars.by_ref() {
                    if d == '\u{15}' {
                        break;
                    }
                }
                out.push(' ');
            }
            '<' | '>' => out.push(' '),
            _ => out.push(c),
        }
    }
    out
}

enum Token {
    Event(EventKind),
    Word,
    Skip,
}

fn classify_token(token: &str) -> Token {
    match token {
        "(.)" => return Token::Event(EventKind::ShortPause),
        "(..)" => return Token::Event(EventKind::MediumPause),
        "(...)" => return Token::Event(EventKind::LongPause),
        "xxx" => return Token::Event(EventKind::Unintelligible),
        "yyy" | "www" => return Token::Skip,
        _ => {}
    }
    if let Some(inner) = token.strip_prefix('(').and_then(|t| t.strip_suffix(')')) {
        if is_timed_pause(inner) {
            return Token::Event(EventKind::TimedPause);
        }
    }
    if let Some(rest) = token.strip_prefix('+') {
        // Utterance linkers/terminators; `+...` and `+..?` mark trailing off.
        return if rest == "..." || rest == "..?" {
            Token::Event(EventKind::TrailingOff)
        } else {
            Token::Skip
        };
    }
    if let Some(rest) = token.strip_prefix('&') {
        if let Some(filler) = rest.strip_prefix('-') {
            return if filler.is_empty() {
                Token::Skip
            } else {
                Token::Event(EventKind::FilledPause)
            };
        }
        let lowered = rest.to_lowercase();
        return if FILLERS.contains(&lowered.as_str()) {
            Token::Event(EventKind::FilledPause)
        } else {
            // &=event, &+fragment, &*interposed and the like are not words.
            Token::Skip
        };
    }
    if token.starts_with('0') && token.len() > 1 {
        // Omitted word.
        return Token::Skip;
    }
    if token.chars().any(char::is_alphanumeric) {
        Token::Word
    } else {
        Token::Skip
    }
}

/// Matches `N`, `N.N`, `N.` and `M:SS.S` style durations.
fn is_timed_pause(inner: &str) -> bool {
    !inner.is_empty()
        && inner.chars().any(|c| c.is_ascii_digit())
        && inner
            .chars()
            .all(|c| c.is_ascii_digit() || c == '.' || c == ':')
}

/// Speaker roles in tier order; anyone other than the participant counts as
/// the interviewer side.
pub fn speaker_sequence(doc: &TranscriptDocument) -> Vec<Role> {
    doc.utterances.iter().map(|u| u.speaker.role()).collect()
}

impl Speaker {
    pub fn role(self) -> Role {
        match self {
            Speaker::Par => Role::Par,
            Speaker::Inv | Speaker::Other => Role::Inv,
        }
    }
}

/// Sums word, utterance and event counts over utterances of one role.
/// `OTHER` speakers count on the interviewer side, as in [`speaker_sequence`].
pub fn aggregate_counts(doc: &TranscriptDocument, role: Role) -> SpeakerTotals {
    let mut totals = SpeakerTotals::default();
    for u in doc.utterances.iter().filter(|u| u.speaker.role() == role) {
        totals.words += u.word_count;
        totals.utterances += 1;
        totals.events.add(&u.event_counts);
    }
    totals
}

/// Sums over every utterance regardless of speaker.
pub fn document_totals(doc: &TranscriptDocument) -> SpeakerTotals {
    let mut totals = SpeakerTotals::default();
    for u in &doc.utterances {
        totals.words += u.word_count;
        totals.utterances += 1;
        totals.events.add(&u.event_counts);
    }
    totals
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_tier_hand_count() {
        let doc = parse_transcript("*PAR:\tthe boy (.) falls .\n", "s1").unwrap();
        assert_eq!(doc.utterances.len(), 1);
        let u = &doc.utterances[0];
        assert_eq!(u.speaker, Speaker::Par);
        assert_eq!(u.word_count, 3);
        assert_eq!(u.event_counts.get(EventKind::ShortPause), 1);
        assert_eq!(u.event_counts.total(), 1);
    }

    #[test]
    fn headers_only_is_empty() {
        let err = parse_transcript("@Begin\n@Languages:\teng\n", "s").unwrap_err();
        assert_eq!(err, ChatError::EmptyDocument);
    }

    #[test]
    fn main_tier_needs_colon() {
        let err = parse_transcript("@Begin\n*PAR the boy .\n", "s").unwrap_err();
        assert!(matches!(err, ChatError::MalformedTier { line: 2, .. }));
    }

    #[test]
    fn headers_are_collected() {
        let doc =
            parse_transcript("@Begin\n@Languages:\teng\n*INV:\thello .\n@End\n", "s").unwrap();
        assert_eq!(
            doc.header_fields.get("Languages").map(String::as_str),
            Some("eng")
        );
        assert_eq!(doc.header_fields.get("Begin").map(String::as_str), Some(""));
    }

    #[test]
    fn speaker_mapping() {
        let doc = parse_transcript("*PAR:\ta .\n*INV:\tb .\n*PAR:\tc .\n", "s").unwrap();
        assert_eq!(
            speaker_sequence(&doc),
            vec![Role::Par, Role::Inv, Role::Par]
        );
        let doc = parse_transcript("*PAR:\ta .\n*MOT:\tb .\n", "s").unwrap();
        assert_eq!(doc.utterances[1].speaker, Speaker::Other);
        assert_eq!(speaker_sequence(&doc), vec![Role::Par, Role::Inv]);
    }

    #[test]
    fn aggregate_sums_one_speaker() {
        let doc = parse_transcript("*PAR:\ta b c .\n*PAR:\td e f g .\n", "s").unwrap();
        let par = aggregate_counts(&doc, Role::Par);
        assert_eq!((par.words, par.utterances), (7, 2));
        assert_eq!(aggregate_counts(&doc, Role::Inv), SpeakerTotals::default());
    }

    #[test]
    fn token_taxonomy() {
        let doc = parse_transcript(
            "*PAR:\t&um &-uh &=laughs &+fr (2) (0.5) (1:02.5) (..) (...) <a b> [/] a b [//] c [* s:r] [+ exc] xxx yyy 0is +...\n",
            "s",
        )
        .unwrap();
        let u = &doc.utterances[0];
        let e = &u.event_counts;
        assert_eq!(e.get(EventKind::FilledPause), 2);
        assert_eq!(e.get(EventKind::TimedPause), 3);
        assert_eq!(e.get(EventKind::MediumPause), 1);
        assert_eq!(e.get(EventKind::LongPause), 1);
        assert_eq!(e.get(EventKind::Repetition), 1);
        assert_eq!(e.get(EventKind::Retracing), 1);
        assert_eq!(e.get(EventKind::Unintelligible), 1);
        assert_eq!(e.get(EventKind::TrailingOff), 1);
        // a b a b c
        assert_eq!(u.word_count, 5);
    }

    #[test]
    fn partial_word_in_parens_is_a_word() {
        let doc = parse_transcript("*PAR:\t(be)cause it fell .\n", "s").unwrap();
        assert_eq!(doc.utterances[0].word_count, 3);
        assert_eq!(doc.utterances[0].event_counts.total(), 0);
    }

    #[test]
    fn continuation_lines_join_main_tier() {
        let doc = parse_transcript(
            "*PAR:\tthe boy\n\tis (.) falling .\n%mor:\tx y\n\tz w\n",
            "s",
        )
        .unwrap();
        assert_eq!(doc.utterances.len(), 1);
        assert_eq!(doc.utterances[0].word_count, 4);
        assert_eq!(doc.utterances[0].event_counts.get(EventKind::ShortPause), 1);
    }

    #[test]
    fn dependent_tiers_do_not_change_counts() {
        let plain = parse_transcript("*PAR:\tthe &uh boy .\n*INV:\tyes .\n", "s").unwrap();
        let with_dep = parse_transcript(
            "*PAR:\tthe &uh boy .\n%mor:\tdet|the n|boy (.) xxx\n*INV:\tyes .\n%gra:\t1|2|DET\n",
            "s",
        )
        .unwrap();
        assert_eq!(plain, with_dep);
    }

    #[test]
    fn invalid_utf8_is_replaced() {
        let bytes = b"*PAR:\tthe \xff\xfe boy .\n";
        let doc = parse_transcript_bytes(bytes, "s").unwrap();
        assert_eq!(doc.utterances[0].word_count, 2);
    }

    proptest! {
        #[test]
        fn never_panics_on_arbitrary_bytes(bytes in proptest::collection::vec(any::<u8>(), 0..512)) {
            let _ = parse_transcript_bytes(&bytes, "fuzz");
        }

        #[test]
        fn never_panics_on_chat_like_text(lines in proptest::collection::vec(
            prop_oneof![
                "\\*(PAR|INV|MOT):\t[a-z &.()\\[\\]/<>+x0-9-]{0,40}",
                "%[a-z]{3}:\t[a-z |]{0,20}",
                "@[A-Za-z]{1,8}(:\t[a-z]{0,8})?",
                "\t[a-z (.)]{0,20}",
                "\\*[A-Z]{0,3}",
            ], 0..20)) {
            let text = lines.join("\n");
            let first = parse_transcript(&text, "p");
            let second = parse_transcript(&text, "p");
            prop_assert_eq!(&first, &second);
            if let Ok(doc) = first {
                let mut sum = aggregate_counts(&doc, Role::Par);
                sum.add(&aggregate_counts(&doc, Role::Inv));
                prop_assert_eq!(sum, document_totals(&doc));
                prop_assert_eq!(speaker_sequence(&doc).len(), doc.utterances.len());
            }
        }
    }
}
