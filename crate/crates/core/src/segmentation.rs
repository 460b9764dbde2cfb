//! Deterministic sentence splitting and grouping of sentences into
//! fixed-size subsequences.
//!
//! The splitter is rule based: a sentence ends after a run of terminators
//! (`.`, `!`, `?`, `…`) that is followed by whitespace or the end of the
//! text, unless the token ending at the terminator is a known abbreviation
//! or the terminator sits inside an open quote or bracket. Closing quotes
//! and brackets directly after a terminator belong to the sentence they
//! close.

use std::collections::HashSet;
use std::ops::Range;
use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::retention::RetentionMask;

const DEFAULT_ABBREVIATIONS: &str = include_str!("../data/abbreviations.txt");

/// Binary document label. Serialized as `0` (human) or `1` (machine).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Label {
    Human,
    Machine,
}

impl Label {
    pub fn as_f64(self) -> f64 {
        match self {
            Label::Human => 0.0,
            Label::Machine => 1.0,
        }
    }

    pub fn flipped(self) -> Label {
        match self {
            Label::Human => Label::Machine,
            Label::Machine => Label::Human,
        }
    }
}

impl TryFrom<u8> for Label {
    type Error = String;

    fn try_from(v: u8) -> std::result::Result<Self, Self::Error> {
        match v {
            0 => Ok(Label::Human),
            1 => Ok(Label::Machine),
            other => Err(format!("label must be 0 or 1, got {other}")),
        }
    }
}

impl From<Label> for u8 {
    fn from(l: Label) -> u8 {
        match l {
            Label::Human => 0,
            Label::Machine => 1,
        }
    }
}

/// Byte range of one sentence inside [`Document::text`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn range(self) -> Range<usize> {
        self.start..self.end
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub text: String,
    pub label: Option<Label>,
    pub sentences: Vec<Span>,
}

impl Document {
    /// Builds a document, splitting `text` with the default segmenter.
    pub fn new(id: impl Into<String>, text: impl Into<String>, label: Option<Label>) -> Result<Self> {
        Self::with_segmenter(id, text, label, Segmenter::default_ref())
    }

    pub fn with_segmenter(
        id: impl Into<String>,
        text: impl Into<String>,
        label: Option<Label>,
        segmenter: &Segmenter,
    ) -> Result<Self> {
        let text = text.into();
        let sentences = segmenter.split(&text)?;
        Ok(Document {
            id: id.into(),
            text,
            label,
            sentences,
        })
    }

    /// Builds a document whose segmentation is exactly `sentences`, joined
    /// by single spaces. Every piece must be non-blank.
    pub fn from_sentences<S: AsRef<str>>(id: impl Into<String>, sentences: &[S], label: Option<Label>) -> Result<Self> {
        let mut text = String::new();
        let mut spans = Vec::with_capacity(sentences.len());
        for s in sentences {
            let s = s.as_ref().trim();
            if s.is_empty() {
                return Err(Error::EmptyDocument);
            }
            if !text.is_empty() {
                text.push(' ');
            }
            let start = text.len();
            text.push_str(s);
            spans.push(Span { start, end: text.len() });
        }
        if spans.is_empty() {
            return Err(Error::EmptyDocument);
        }
        Ok(Document {
            id: id.into(),
            text,
            label,
            sentences: spans,
        })
    }

    pub fn sentence(&self, i: usize) -> &str {
        &self.text[self.sentences[i].range()]
    }

    pub fn sentence_texts(&self) -> impl Iterator<Item = &str> {
        self.sentences.iter().map(move |s| &self.text[s.range()])
    }

    pub fn n_sentences(&self) -> usize {
        self.sentences.len()
    }
}

/// Partition of a document's sentences into consecutive groups of at most
/// `k` sentences.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsequenceSet {
    pub parent: String,
    pub groups: Vec<Range<usize>>,
    pub k: usize,
}

impl SubsequenceSet {
    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    /// Verbatim text of group `g`, from the first byte of its first sentence
    /// to the last byte of its last sentence.
    pub fn group_text<'d>(&self, doc: &'d Document, g: usize) -> &'d str {
        let r = &self.groups[g];
        let start = doc.sentences[r.start].start;
        let end = doc.sentences[r.end - 1].end;
        &doc.text[start..end]
    }

    pub fn group_texts<'d>(&'d self, doc: &'d Document) -> impl Iterator<Item = &'d str> + 'd {
        (0..self.groups.len()).map(move |g| self.group_text(doc, g))
    }
}

#[derive(Debug, Clone)]
pub struct Segmenter {
    abbreviations: HashSet<String>,
}

impl Default for Segmenter {
    fn default() -> Self {
        Segmenter::from_list(DEFAULT_ABBREVIATIONS)
    }
}

impl Segmenter {
    pub fn default_ref() -> &'static Segmenter {
        static DEFAULT: OnceLock<Segmenter> = OnceLock::new();
        DEFAULT.get_or_init(Segmenter::default)
    }

    /// Parses an abbreviation list: one entry per line, `#` starts a comment.
    pub fn from_list(list: &str) -> Self {
        Segmenter::with_abbreviations(
            list.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#')),
        )
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Ok(Segmenter::from_list(&std::fs::read_to_string(path)?))
    }

    pub fn with_abbreviations<I, S>(abbrevs: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Segmenter {
            abbreviations: abbrevs.into_iter().map(|a| a.as_ref().to_lowercase()).collect(),
        }
    }

    pub fn is_abbreviation(&self, token: &str) -> bool {
        self.abbreviations.contains(&token.to_lowercase())
    }

    pub fn split(&self, text: &str) -> Result<Vec<Span>> {
        if text.trim().is_empty() {
            return Err(Error::EmptyDocument);
        }
        let chars: Vec<(usize, char)> = text.char_indices().collect();
        let mut spans = Vec::new();
        let mut start: Option<usize> = None;
        let mut depth: usize = 0;
        let mut in_straight_quote = false;
        let mut i = 0;
        while i < chars.len() {
            let (pos, c) = chars[i];
            if start.is_none() {
                if c.is_whitespace() {
                    i += 1;
                    continue;
                }
                start = Some(pos);
            }
            if is_terminator(c) {
                let term_at = i;
                let mut j = i + 1;
                while j < chars.len() && is_terminator(chars[j].1) {
                    j += 1;
                }
                // closers hugging the terminator belong to this sentence
                while j < chars.len() {
                    let cj = chars[j].1;
                    if cj == '"' && in_straight_quote {
                        in_straight_quote = false;
                    } else if is_closer(cj) {
                        depth = depth.saturating_sub(1);
                    } else {
                        break;
                    }
                    j += 1;
                }
                let at_boundary = j == chars.len() || chars[j].1.is_whitespace();
                let quoted = depth > 0 || in_straight_quote;
                if at_boundary && !quoted && !self.ends_with_abbreviation(text, &chars, term_at) {
                    let end = if j == chars.len() { text.len() } else { chars[j].0 };
                    spans.push(Span {
                        start: start.take().expect("sentence start"),
                        end,
                    });
                }
                i = j;
                continue;
            }
            if c == '"' {
                in_straight_quote = !in_straight_quote;
            } else if is_opener(c) {
                depth += 1;
            } else if is_closer(c) {
                depth = depth.saturating_sub(1);
            } else if c == '\n' && i + 1 < chars.len() && chars[i + 1].1 == '\n' {
                // a blank line resets unbalanced quoting
                depth = 0;
                in_straight_quote = false;
            }
            i += 1;
        }
        if let Some(s) = start {
            let end = s + text[s..].trim_end().len();
            spans.push(Span { start: s, end });
        }
        Ok(spans)
    }

    fn ends_with_abbreviation(&self, text: &str, chars: &[(usize, char)], term_at: usize) -> bool {
        if chars[term_at].1 != '.' {
            return false;
        }
        let mut b = term_at;
        while b > 0 {
            let c = chars[b - 1].1;
            if c.is_whitespace() || is_opener(c) || c == '"' {
                break;
            }
            b -= 1;
        }
        if b == term_at {
            return false;
        }
        let token_end = chars[term_at].0 + '.'.len_utf8();
        self.is_abbreviation(&text[chars[b].0..token_end])
    }
}

fn is_terminator(c: char) -> bool {
    matches!(c, '.' | '!' | '?' | '…')
}

fn is_opener(c: char) -> bool {
    matches!(c, '(' | '[' | '{' | '“' | '«' | '‘')
}

fn is_closer(c: char) -> bool {
    matches!(c, ')' | ']' | '}' | '”' | '»' | '’')
}

/// Splits `text` into sentence spans with the default abbreviation list.
pub fn split_sentences(text: &str) -> Result<Vec<Span>> {
    Segmenter::default_ref().split(text)
}

/// Greedy left-to-right grouping into `ceil(n / k)` groups.
pub fn group_subsequences(doc: &Document, k: usize) -> Result<SubsequenceSet> {
    if k < 1 {
        return Err(Error::config("subsequence size k must be at least 1"));
    }
    let n = doc.sentences.len();
    if n == 0 {
        return Err(Error::EmptyDocument);
    }
    let groups = (0..n).step_by(k).map(|s| s..(s + k).min(n)).collect();
    Ok(SubsequenceSet {
        parent: doc.id.clone(),
        groups,
        k,
    })
}

/// Concatenates retained groups in document order, separated by one space.
pub fn reconstruct(doc: &Document, groups: &SubsequenceSet, mask: &RetentionMask) -> Result<String> {
    if mask.len() != groups.len() {
        return Err(Error::config(format!(
            "mask has {} bits but document has {} groups",
            mask.len(),
            groups.len()
        )));
    }
    if mask.n_retained() == 0 {
        return Err(Error::EmptyRetention);
    }
    let mut out = String::with_capacity(doc.text.len());
    for (g, keep) in mask.bits().iter().enumerate() {
        if *keep {
            if !out.is_empty() {
                out.push(' ');
            }
            out.push_str(groups.group_text(doc, g));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn texts(text: &str) -> Vec<&str> {
        split_sentences(text)
            .unwrap()
            .into_iter()
            .map(|s| &text[s.range()])
            .collect()
    }

    fn doc(n: usize) -> Document {
        let s: Vec<String> = (0..n).map(|i| format!("Sentence {i}.")).collect();
        Document::from_sentences("d", &s, None).unwrap()
    }

    #[test]
    fn single_sentence() {
        assert_eq!(texts("Hello world."), vec!["Hello world."]);
    }

    #[test]
    fn three_terminators() {
        assert_eq!(texts("A. B? C!"), vec!["A.", "B?", "C!"]);
    }

    #[test]
    fn abbreviation_is_not_a_break() {
        assert_eq!(
            texts("Dr. Smith left. He returned."),
            vec!["Dr. Smith left.", "He returned."]
        );
        assert_eq!(
            texts("Bring fruit, e.g. apples. Then go."),
            vec!["Bring fruit, e.g. apples.", "Then go."]
        );
    }

    #[test]
    fn quotes_and_brackets() {
        assert_eq!(
            texts("He said \"Stop. Now.\" Then left."),
            vec!["He said \"Stop. Now.\"", "Then left."]
        );
        assert_eq!(
            texts("See (this one. and that) please. Ok."),
            vec!["See (this one. and that) please.", "Ok."]
        );
        assert_eq!(texts("Wait… what?! Fine."), vec!["Wait…", "what?!", "Fine."]);
    }

    #[test]
    fn decimals_and_unterminated_tail() {
        assert_eq!(
            texts("Pi is 3.14 roughly. and more"),
            vec!["Pi is 3.14 roughly.", "and more"]
        );
        assert_eq!(texts("  padded text  "), vec!["padded text"]);
    }

    #[test]
    fn empty_text_is_rejected() {
        assert!(matches!(split_sentences(""), Err(Error::EmptyDocument)));
        assert!(matches!(split_sentences(" \n\t "), Err(Error::EmptyDocument)));
    }

    #[test]
    fn custom_abbreviations_override_defaults() {
        let seg = Segmenter::with_abbreviations(["foo."]);
        let spans = seg.split("Dr. Who. A foo. bar.").unwrap();
        assert_eq!(spans.len(), 3);
    }

    #[test]
    fn grouping_shapes() {
        let sizes = |n, k| -> Vec<usize> {
            group_subsequences(&doc(n), k)
                .unwrap()
                .groups
                .iter()
                .map(|g| g.len())
                .collect()
        };
        assert_eq!(sizes(5, 1), vec![1; 5]);
        assert_eq!(sizes(5, 2), vec![2, 2, 1]);
        assert_eq!(sizes(6, 3), vec![3, 3]);
        assert!(matches!(group_subsequences(&doc(3), 0), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn reconstruct_masks() {
        let d = Document::from_sentences("d", &["A.", "B.", "C."], None).unwrap();
        let g = group_subsequences(&d, 1).unwrap();
        let m = |b: &[u8]| RetentionMask::from_bits(b.iter().map(|&x| x == 1).collect()).unwrap();
        assert_eq!(reconstruct(&d, &g, &m(&[1, 1, 1])).unwrap(), "A. B. C.");
        assert_eq!(reconstruct(&d, &g, &m(&[1, 0, 1])).unwrap(), "A. C.");
        let d2 = Document::from_sentences("d", &["A.", "B."], None).unwrap();
        let g2 = group_subsequences(&d2, 1).unwrap();
        assert_eq!(reconstruct(&d2, &g2, &m(&[0, 1])).unwrap(), "B.");
        let all_zero = RetentionMask::from_bits_unchecked(vec![false, false]);
        assert!(matches!(reconstruct(&d2, &g2, &all_zero), Err(Error::EmptyRetention)));
        assert!(matches!(reconstruct(&d2, &g2, &m(&[1])), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn label_serde() {
        assert_eq!(serde_json::to_string(&Label::Machine).unwrap(), "1");
        assert_eq!(serde_json::from_str::<Label>("0").unwrap(), Label::Human);
        assert!(serde_json::from_str::<Label>("2").is_err());
    }
}
