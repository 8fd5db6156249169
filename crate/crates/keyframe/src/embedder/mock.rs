use keyframe_core::mock::{image_embedding, text_embedding, MOCK_DIM};
use keyframe_core::{Frame, TextQuery, DEFAULT_TOKEN_BUDGET};

use super::{Embedding, EmbeddingProvider, ProviderError, ProviderInfo};

/// Stateless color-keyword provider backed by `keyframe_core::mock`.
#[derive(Debug, Clone)]
pub struct MockProvider {
    info: ProviderInfo,
}

impl MockProvider {
    pub fn new() -> Self {
        Self::with_dim(MOCK_DIM)
    }

    pub fn with_dim(dim: usize) -> Self {
        assert!(dim > 4, "mock provider needs more than 4 dimensions");
        Self { info: ProviderInfo { name: "mock".into(), dim, token_budget: DEFAULT_TOKEN_BUDGET } }
    }
}

impl Default for MockProvider {
    fn default() -> Self {
        Self::new()
    }
}

impl EmbeddingProvider for MockProvider {
    fn info(&self) -> &ProviderInfo {
        &self.info
    }

    fn embed_texts(&self, texts: &[TextQuery]) -> Result<Vec<Embedding>, ProviderError> {
        texts
            .iter()
            .map(|t| {
                if t.text.trim().is_empty() {
                    return Err(ProviderError::InvalidInput("empty text".into()));
                }
                Embedding::from_unit(text_embedding(&t.text, self.info.dim))
            })
            .collect()
    }

    fn embed_images(&self, frames: &[Frame]) -> Result<Vec<Embedding>, ProviderError> {
        frames
            .iter()
            .map(|f| {
                if f.is_empty() {
                    return Err(ProviderError::InvalidInput(format!("frame {} has no pixels", f.index)));
                }
                Embedding::from_unit(image_embedding(f, self.info.dim))
            })
            .collect()
    }
}
