//! Binary logistic-regression model format.
//!
//! ```text
//! offset  size  field
//! 0       4     magic "SDLR"
//! 4       1     format version
//! 5       1     feature mode (0 = word, 1 = char)
//! 6       2     reserved, zero
//! 8       4     n-gram order, u32 LE
//! 12      4     hash buckets B, u32 LE
//! 16      8     bias, f64 LE
//! 24      8*B   weights, f64 LE
//! ```
//!
//! Floats are stored as raw IEEE-754 bits, so a loaded model reproduces the
//! saved model's scores exactly.

use crate::detector::features::FeatureMode;
use crate::detector::logreg::NGramLogRegModel;
use crate::error::{Error, Result};

pub(crate) const LOGREG_MAGIC: &[u8; 4] = b"SDLR";
pub const MODEL_FORMAT_VERSION: u8 = 1;
const HEADER_LEN: usize = 24;

impl NGramLogRegModel {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + 8 * self.weights.len());
        out.extend_from_slice(LOGREG_MAGIC);
        out.push(MODEL_FORMAT_VERSION);
        out.push(self.feature_mode.code());
        out.extend_from_slice(&[0, 0]);
        out.extend_from_slice(&(self.n as u32).to_le_bytes());
        out.extend_from_slice(&(self.hash_buckets as u32).to_le_bytes());
        out.extend_from_slice(&self.bias.to_le_bytes());
        for w in &self.weights {
            out.extend_from_slice(&w.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = |m: String| Error::ModelFormat(m);
        if bytes.len() < HEADER_LEN {
            return Err(bad(format!("truncated header: {} bytes", bytes.len())));
        }
        if &bytes[0..4] != LOGREG_MAGIC {
            return Err(bad("bad magic".into()));
        }
        if bytes[4] != MODEL_FORMAT_VERSION {
            return Err(bad(format!(
                "unsupported format version {} (expected {MODEL_FORMAT_VERSION})",
                bytes[4]
            )));
        }
        let mode = FeatureMode::from_code(bytes[5]).ok_or_else(|| bad(format!("unknown feature mode {}", bytes[5])))?;
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().expect("4 bytes")) as usize;
        let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().expect("8 bytes"));
        let n = u32_at(8);
        let buckets = u32_at(12);
        let expected = HEADER_LEN + 8 * buckets;
        if bytes.len() != expected {
            return Err(bad(format!(
                "expected {expected} bytes for {buckets} buckets, found {}",
                bytes.len()
            )));
        }
        let bias = f64_at(16);
        let weights = (0..buckets).map(|i| f64_at(HEADER_LEN + 8 * i)).collect();
        NGramLogRegModel::with_parameters(n, mode, weights, bias).map_err(|e| bad(format!("invalid parameters: {e}")))
    }
}
