//! Adapter for third-party detectors running as a child process.
//!
//! Protocol: the adapter receives one JSON string literal per line on
//! stdin (one per text, in order) and must print exactly one decimal score
//! per line on stdout, in the same order, then exit with status 0. Any
//! violation fails the whole batch.

use std::io::{Read, Write};
use std::process::{Command, Stdio};

use serde::{Deserialize, Serialize};

use crate::detector::{require_text, Detector, DetectorScore};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExternalDetector {
    pub command: String,
    #[serde(default)]
    pub args: Vec<String>,
}

/// A score outside `[0, 1]` that was clamped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClampRecord {
    pub index: usize,
    pub raw: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExternalBatch {
    pub scores: Vec<DetectorScore>,
    pub clamped: Vec<ClampRecord>,
}

impl ExternalDetector {
    pub fn new(command: impl Into<String>, args: impl IntoIterator<Item = impl Into<String>>) -> Self {
        ExternalDetector {
            command: command.into(),
            args: args.into_iter().map(Into::into).collect(),
        }
    }
}

pub fn external_score(adapter: &ExternalDetector, texts: &[&str]) -> Result<ExternalBatch> {
    if adapter.command.trim().is_empty() {
        return Err(Error::config("external detector command is empty"));
    }
    if texts.is_empty() {
        return Ok(ExternalBatch {
            scores: Vec::new(),
            clamped: Vec::new(),
        });
    }
    let proto = |m: String| Error::AdapterProtocol(m);
    let mut payload = Vec::new();
    for t in texts {
        serde_json::to_writer(&mut payload, t).map_err(std::io::Error::from)?;
        payload.push(b'\n');
    }

    let mut child = Command::new(&adapter.command)
        .args(&adapter.args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| proto(format!("cannot start '{}': {e}", adapter.command)))?;
    let mut stdin = child.stdin.take().expect("piped stdin");
    let mut stdout = child.stdout.take().expect("piped stdout");
    let mut stderr = child.stderr.take().expect("piped stderr");

    let (out, err) = std::thread::scope(|s| {
        // feed stdin concurrently so a chatty child cannot deadlock us
        s.spawn(move || {
            // a child that exits early closes the pipe; the exit status and
            // line count checks below report that
            let _ = stdin.write_all(&payload);
        });
        let err_reader = s.spawn(move || {
            let mut e = String::new();
            let _ = stderr.read_to_string(&mut e);
            e
        });
        let mut o = Vec::new();
        let read = stdout.read_to_end(&mut o);
        (read.map(|_| o), err_reader.join().unwrap_or_default())
    });
    let status = child.wait()?;
    let out = out?;
    if !status.success() {
        let tail = err.lines().last().unwrap_or("").trim();
        return Err(proto(format!("adapter exited with {status}: {tail}")));
    }
    let out = String::from_utf8(out).map_err(|_| proto("adapter output is not UTF-8".into()))?;
    let lines: Vec<&str> = out.lines().collect();
    if lines.len() != texts.len() {
        return Err(proto(format!(
            "adapter returned {} scores for {} texts",
            lines.len(),
            texts.len()
        )));
    }
    let mut scores = Vec::with_capacity(lines.len());
    let mut clamped = Vec::new();
    for (i, line) in lines.iter().enumerate() {
        let raw: f64 = line
            .trim()
            .parse()
            .map_err(|_| proto(format!("line {}: '{}' is not a decimal score", i + 1, line.trim())))?;
        let s = DetectorScore::clamped(raw).ok_or_else(|| proto(format!("line {}: score is NaN", i + 1)))?;
        if s.value() != raw {
            log::warn!("external detector score {raw} at index {i} clamped to {}", s.value());
            clamped.push(ClampRecord { index: i, raw });
        }
        scores.push(s);
    }
    Ok(ExternalBatch { scores, clamped })
}

impl Detector for ExternalDetector {
    fn score(&self, text: &str) -> Result<DetectorScore> {
        let mut s = self.score_batch(&[text])?;
        Ok(s.pop().expect("one score per text"))
    }

    fn score_batch(&self, texts: &[&str]) -> Result<Vec<DetectorScore>> {
        for t in texts {
            require_text(t)?;
        }
        Ok(external_score(self, texts)?.scores)
    }

    fn name(&self) -> String {
        format!("external:{}", self.command)
    }
}
