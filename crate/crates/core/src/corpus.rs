//! JSON Lines corpus ingestion: one `{"id", "text", "label"?}` object per line.

use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::segmentation::{Document, Label, Segmenter};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusRecord {
    pub id: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<Label>,
}

impl From<&Document> for CorpusRecord {
    fn from(d: &Document) -> Self {
        CorpusRecord {
            id: d.id.clone(),
            text: d.text.clone(),
            label: d.label,
        }
    }
}

pub fn read_corpus(path: &Path) -> Result<Vec<Document>> {
    read_corpus_with(path, &Segmenter::default())
}

pub fn read_corpus_with(path: &Path, segmenter: &Segmenter) -> Result<Vec<Document>> {
    let file = std::fs::File::open(path)?;
    parse_corpus(BufReader::new(file), path, segmenter)
}

/// Parses a JSONL stream. `origin` is only used in error messages.
pub fn parse_corpus<R: BufRead>(reader: R, origin: &Path, segmenter: &Segmenter) -> Result<Vec<Document>> {
    let mut docs = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |message: String| Error::Corpus {
            path: PathBuf::from(origin),
            line: i + 1,
            message,
        };
        let rec: CorpusRecord = serde_json::from_str(&line).map_err(|e| bad(e.to_string()))?;
        let doc = Document::with_segmenter(rec.id, rec.text, rec.label, segmenter).map_err(|e| bad(e.to_string()))?;
        docs.push(doc);
    }
    Ok(docs)
}

pub fn write_corpus<W: Write>(mut out: W, docs: &[Document]) -> Result<()> {
    for d in docs {
        serde_json::to_writer(&mut out, &CorpusRecord::from(d)).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_labels_and_skips_blank_lines() {
        let input = "{\"id\":\"a\",\"text\":\"One. Two.\",\"label\":1}\n\n{\"id\":\"b\",\"text\":\"Three.\"}\n";
        let docs = parse_corpus(input.as_bytes(), Path::new("mem"), &Segmenter::default()).unwrap();
        assert_eq!(docs.len(), 2);
        assert_eq!(docs[0].label, Some(Label::Machine));
        assert_eq!(docs[0].n_sentences(), 2);
        assert_eq!(docs[1].label, None);
    }

    #[test]
    fn reports_line_numbers() {
        let input = "{\"id\":\"a\",\"text\":\"ok.\"}\n{\"id\":\"b\",\"text\":\"x\",\"label\":7}\n";
        let err = parse_corpus(input.as_bytes(), Path::new("mem"), &Segmenter::default()).unwrap_err();
        assert!(matches!(err, Error::Corpus { line: 2, .. }), "{err}");
        let input = "{\"id\":\"a\",\"text\":\"  \"}\n";
        let err = parse_corpus(input.as_bytes(), Path::new("mem"), &Segmenter::default()).unwrap_err();
        assert!(matches!(err, Error::Corpus { line: 1, .. }));
    }

    #[test]
    fn write_then_read() {
        let docs = vec![Document::new("x", "Hello there. Bye.", Some(Label::Human)).unwrap()];
        let mut buf = Vec::new();
        write_corpus(&mut buf, &docs).unwrap();
        let back = parse_corpus(buf.as_slice(), Path::new("mem"), &Segmenter::default()).unwrap();
        assert_eq!(back, docs);
    }
}
