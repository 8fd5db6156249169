//! Embedding providers: one contract, a deterministic mock and an HTTP client.

mod mock;
mod remote;

pub use mock::MockProvider;
pub use remote::{RemoteOptions, RemoteProvider};

use keyframe_core::{Frame, TextQuery};

/// Tolerance on the unit-norm contract of stored embeddings.
pub const NORM_TOLERANCE: f64 = 1e-6;

/// A unit-length embedding vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    values: Vec<f32>,
}

impl Embedding {
    /// Accepts a vector that is already unit length.
    pub fn from_unit(values: Vec<f32>) -> Result<Self, ProviderError> {
        let norm = l2_norm(&values);
        if values.is_empty() || (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(ProviderError::NotNormalized(norm));
        }
        Ok(Self { values })
    }

    /// Rescales `values` to unit length. Fails on zero or non-finite input.
    pub fn normalized(values: Vec<f32>) -> Result<Self, ProviderError> {
        let norm = l2_norm(&values);
        if !norm.is_finite() || norm == 0.0 {
            return Err(ProviderError::NotNormalized(norm));
        }
        Ok(Self { values: values.into_iter().map(|x| (x as f64 / norm) as f32).collect() })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }
}

pub(crate) fn l2_norm(values: &[f32]) -> f64 {
    values.iter().map(|&x| x as f64 * x as f64).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct ProviderInfo {
    pub name: String,
    pub dim: usize,
    pub token_budget: usize,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProviderError {
    #[error("transport: {message}")]
    Transport { message: String, retryable: bool },
    #[error("server rejected request ({status}): {message}")]
    Rejected { status: u16, message: String },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("expected {expected} vectors, got {got}")]
    CountMismatch { expected: usize, got: usize },
    #[error("vector norm {0} is not 1")]
    NotNormalized(f64),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("protocol: {0}")]
    Protocol(String),
}

impl ProviderError {
    pub fn is_retryable(&self) -> bool {
        matches!(self, ProviderError::Transport { retryable: true, .. })
    }
}

/// Maps texts and frames into a shared space. Implementations must be safe
/// to call from several workers at once.
pub trait EmbeddingProvider: Send + Sync {
    fn info(&self) -> &ProviderInfo;

    fn embed_texts(&self, texts: &[TextQuery]) -> Result<Vec<Embedding>, ProviderError>;

    fn embed_images(&self, frames: &[Frame]) -> Result<Vec<Embedding>, ProviderError>;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_check() {
        assert!(Embedding::from_unit(vec![0.6, 0.8]).is_ok());
        assert!(Embedding::from_unit(vec![3.0, 4.0]).is_err());
        assert!(Embedding::from_unit(vec![]).is_err());
        let e = Embedding::normalized(vec![3.0, 4.0]).unwrap();
        assert_eq!(e.values(), &[0.6, 0.8]);
        assert!(Embedding::normalized(vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn retryable_flag() {
        assert!(ProviderError::Transport { message: "x".into(), retryable: true }.is_retryable());
        assert!(!ProviderError::DimensionMismatch { expected: 2, got: 3 }.is_retryable());
    }
}
