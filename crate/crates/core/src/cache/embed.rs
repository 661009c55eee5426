//! Feature-hashed bag of unigrams and bigrams.
//!
//! 1. Lowercase and split on whitespace.
//! 2. Features are every token plus every adjacent pair (joined by one
//!    space) of the sequence wrapped in `<s>` and `</s>`.
//! 3. Each feature is hashed with 64-bit FNV-1a over its UTF-8 bytes; the
//!    bucket is `h % 256` and the sign is `-1` when the top bit is set.
//! 4. The vector is L2-normalized. If signed hashing cancels to zero the
//!    unsigned counts are used instead, so the norm is always 1.

use serde::{Deserialize, Serialize};

use super::CacheError;

pub const DIM: usize = 256;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

pub fn fnv1a(bytes: &[u8]) -> u64 {
    bytes
        .iter()
        .fold(FNV_OFFSET, |h, b| (h ^ u64::from(*b)).wrapping_mul(FNV_PRIME))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Embedding(Vec<f64>);

impl Embedding {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Dot product; both sides are unit vectors so this is the cosine.
    /// Identical vectors score exactly 1.
    pub fn cosine(&self, other: &Embedding) -> f64 {
        if self == other {
            return 1.0;
        }
        let dot: f64 = self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum();
        dot.clamp(-1.0, 1.0)
    }

    /// Little-endian bytes of every component.
    pub fn to_bytes(&self) -> Vec<u8> {
        self.0.iter().flat_map(|v| v.to_le_bytes()).collect()
    }
}

fn features(text: &str) -> Vec<String> {
    let tokens: Vec<String> = text.split_whitespace().map(str::to_lowercase).collect();
    let mut out = tokens.clone();
    let padded: Vec<&str> = std::iter::once("<s>")
        .chain(tokens.iter().map(String::as_str))
        .chain(std::iter::once("</s>"))
        .collect();
    out.extend(padded.windows(2).map(|w| format!("{} {}", w[0], w[1])));
    out
}

fn unit(mut v: Vec<f64>) -> Option<Vec<f64>> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return None;
    }
    v.iter_mut().for_each(|x| *x /= norm);
    Some(v)
}

pub fn embed(text: &str) -> Result<Embedding, CacheError> {
    if text.split_whitespace().next().is_none() {
        return Err(CacheError::EmptyText);
    }
    let mut signed = vec![0.0; DIM];
    let mut counts = vec![0.0; DIM];
    for f in features(text) {
        let h = fnv1a(f.as_bytes());
        let i = (h % DIM as u64) as usize;
        signed[i] += if h >> 63 == 1 { -1.0 } else { 1.0 };
        counts[i] += 1.0;
    }
    let v = unit(signed).or_else(|| unit(counts)).ok_or(CacheError::EmptyText)?;
    Ok(Embedding(v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fnv_reference_values() {
        assert_eq!(fnv1a(b""), 0xcbf2_9ce4_8422_2325);
        assert_eq!(fnv1a(b"a"), 0xaf63_dc4c_8601_ec8c);
        assert_eq!(fnv1a(b"foobar"), 0x8594_4171_f739_67e8);
    }

    #[test]
    fn deterministic_unit_vectors() {
        let a = embed("find plays where [PLAYER1] throws are intercepted").unwrap();
        let b = embed("find plays where [PLAYER1] throws are intercepted").unwrap();
        assert_eq!(a.to_bytes(), b.to_bytes());
        assert_eq!(a.values().len(), DIM);
        assert!((a.norm() - 1.0).abs() < 1e-9);
        assert_eq!(a.cosine(&a), 1.0);
    }

    #[test]
    fn case_is_ignored() {
        assert_eq!(embed("Show RUSHES").unwrap(), embed("show rushes").unwrap());
    }

    #[test]
    fn empty_text_is_an_error() {
        assert!(matches!(embed(""), Err(CacheError::EmptyText)));
        assert!(matches!(embed("   "), Err(CacheError::EmptyText)));
    }

    #[test]
    fn feature_list() {
        assert_eq!(features("A b"), ["a", "b", "<s> a", "a b", "b </s>"]);
    }
}
