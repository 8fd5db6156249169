//! Reference embedding rules for the deterministic mock provider.
//!
//! Images map to their mean color in components 0..3; texts map color
//! keywords to the same components. A red frame and the text "red" are
//! therefore parallel, and a blue frame is orthogonal to both. Texts with no
//! color keyword fall back to hashed token buckets in components 4.., which
//! are orthogonal to every image embedding.

use alloc::vec;
use alloc::vec::Vec;

use crate::frame::Frame;
use crate::rng::fnv1a64;

pub const MOCK_DIM: usize = 512;
/// Component used for black / colorless content.
pub const NEUTRAL_COMPONENT: usize = 3;
const HASH_BASE: usize = 4;

const COLORS: [(&str, [f64; 4]); 8] = [
    ("red", [1.0, 0.0, 0.0, 0.0]),
    ("green", [0.0, 1.0, 0.0, 0.0]),
    ("blue", [0.0, 0.0, 1.0, 0.0]),
    ("white", [1.0, 1.0, 1.0, 0.0]),
    ("black", [0.0, 0.0, 0.0, 1.0]),
    ("yellow", [1.0, 1.0, 0.0, 0.0]),
    ("cyan", [0.0, 1.0, 1.0, 0.0]),
    ("magenta", [1.0, 0.0, 1.0, 0.0]),
];

/// The RGB value of a color keyword, if it is one the mock understands.
pub fn keyword_rgb(name: &str) -> Option<[u8; 3]> {
    COLORS.iter().find(|(n, _)| *n == name).map(|(_, c)| {
        let ch = |x: f64| if x > 0.0 { 255 } else { 0 };
        [ch(c[0]), ch(c[1]), ch(c[2])]
    })
}

pub fn color_keywords() -> impl Iterator<Item = &'static str> {
    COLORS.iter().map(|(n, _)| *n)
}

fn normalize(values: &[f64]) -> Vec<f32> {
    let norm = libm::sqrt(values.iter().fold(0.0, |acc, x| acc + x * x));
    values.iter().map(|x| (x / norm) as f32).collect()
}

/// Mean-color embedding of a frame.
pub fn image_embedding(frame: &Frame, dim: usize) -> Vec<f32> {
    assert!(dim > HASH_BASE, "mock dimension must exceed {HASH_BASE}");
    let mut v = vec![0.0f64; dim];
    let [r, g, b] = frame.mean_rgb();
    if libm::sqrt(r * r + g * g + b * b) < 1e-9 {
        v[NEUTRAL_COMPONENT] = 1.0;
    } else {
        v[0] = r;
        v[1] = g;
        v[2] = b;
    }
    normalize(&v)
}

fn token_key(token: &str) -> &str {
    let trimmed = token.trim_matches(|c: char| !c.is_alphanumeric());
    if trimmed.is_empty() {
        token
    } else {
        trimmed
    }
}

/// Keyword or hashed-token embedding of a text.
pub fn text_embedding(text: &str, dim: usize) -> Vec<f32> {
    assert!(dim > HASH_BASE, "mock dimension must exceed {HASH_BASE}");
    let lower = text.to_lowercase();
    let mut v = vec![0.0f64; dim];
    let mut matched = 0usize;
    for token in lower.split_whitespace() {
        if let Some((_, c)) = COLORS.iter().find(|(n, _)| *n == token_key(token)) {
            for (dst, src) in v.iter_mut().zip(c) {
                *dst += src;
            }
            matched += 1;
        }
    }
    if matched > 0 {
        for x in &mut v[..HASH_BASE] {
            *x /= matched as f64;
        }
    } else {
        let buckets = (dim - HASH_BASE) as u64;
        for token in lower.split_whitespace() {
            let h = fnv1a64(token_key(token).as_bytes());
            v[HASH_BASE + (h % buckets) as usize] += 1.0;
        }
        if lower.split_whitespace().next().is_none() {
            v[NEUTRAL_COMPONENT] = 1.0;
        }
    }
    normalize(&v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::score::cosine_score;

    fn norm(v: &[f32]) -> f64 {
        libm::sqrt(v.iter().map(|&x| x as f64 * x as f64).sum())
    }

    #[test]
    fn red_text_is_first_axis() {
        let v = text_embedding("red", MOCK_DIM);
        assert_eq!(v.len(), 512);
        assert_eq!(&v[..4], &[1.0, 0.0, 0.0, 0.0]);
        assert!(v[4..].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn text_is_deterministic() {
        assert_eq!(text_embedding("a dog runs", MOCK_DIM), text_embedding("a dog runs", MOCK_DIM));
    }

    #[test]
    fn punctuation_and_case_do_not_hide_keywords() {
        assert_eq!(text_embedding("What is RED?", MOCK_DIM), text_embedding("red", MOCK_DIM));
    }

    #[test]
    fn mixed_keywords_average() {
        let v = text_embedding("red black", MOCK_DIM);
        let h = core::f32::consts::FRAC_1_SQRT_2;
        assert!((v[0] - h).abs() < 1e-7 && (v[3] - h).abs() < 1e-7);
    }

    #[test]
    fn hashed_tokens_land_in_their_bucket() {
        let v = text_embedding("dog", MOCK_DIM);
        let bucket = 4 + (fnv1a64(b"dog") % 508) as usize;
        assert_eq!(v[bucket], 1.0);
        assert!((norm(&v) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn solid_images() {
        let red = image_embedding(&Frame::solid(0, 0.0, 4, 4, [255, 0, 0]), MOCK_DIM);
        assert_eq!(&red[..4], &[1.0, 0.0, 0.0, 0.0]);
        let black = image_embedding(&Frame::solid(0, 0.0, 4, 4, [0, 0, 0]), MOCK_DIM);
        assert_eq!(&black[..4], &[0.0, 0.0, 0.0, 1.0]);
        let white = image_embedding(&Frame::solid(0, 0.0, 4, 4, [255, 255, 255]), MOCK_DIM);
        assert!((norm(&white) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn text_to_image_alignment() {
        let red_text = text_embedding("red", MOCK_DIM);
        let red = image_embedding(&Frame::solid(0, 0.0, 8, 8, [255, 0, 0]), MOCK_DIM);
        let blue = image_embedding(&Frame::solid(0, 0.0, 8, 8, [0, 0, 255]), MOCK_DIM);
        assert!((cosine_score(&red_text, &red).unwrap() - 1.0).abs() <= 1e-6);
        assert!(cosine_score(&red_text, &blue).unwrap().abs() <= 1e-6);
    }

    #[test]
    fn keyword_colors() {
        assert_eq!(keyword_rgb("yellow"), Some([255, 255, 0]));
        assert_eq!(keyword_rgb("black"), Some([0, 0, 0]));
        assert_eq!(keyword_rgb("purple"), None);
        assert_eq!(color_keywords().count(), 8);
    }
}
