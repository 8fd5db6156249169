use alloc::vec::Vec;

/// A decoded video frame: packed 8-bit RGB, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    /// 0-based index in the source video.
    pub index: usize,
    /// Presentation time in seconds.
    pub timestamp: f64,
    pub width: u32,
    pub height: u32,
    pub pixels: Vec<u8>,
}

impl Frame {
    /// Returns `None` when `pixels` does not hold exactly `width * height` RGB triples.
    pub fn new(index: usize, timestamp: f64, width: u32, height: u32, pixels: Vec<u8>) -> Option<Self> {
        let expected = (width as usize).checked_mul(height as usize)?.checked_mul(3)?;
        (pixels.len() == expected).then_some(Self { index, timestamp, width, height, pixels })
    }

    /// A frame filled with one color.
    pub fn solid(index: usize, timestamp: f64, width: u32, height: u32, rgb: [u8; 3]) -> Self {
        let n = width as usize * height as usize;
        let mut pixels = Vec::with_capacity(n * 3);
        for _ in 0..n {
            pixels.extend_from_slice(&rgb);
        }
        Self { index, timestamp, width, height, pixels }
    }

    pub fn pixel_count(&self) -> usize {
        self.width as usize * self.height as usize
    }

    pub fn is_empty(&self) -> bool {
        self.pixel_count() == 0
    }

    /// Mean of each channel scaled to `[0, 1]`. Sums are exact integers, so
    /// the result does not depend on evaluation order.
    pub fn mean_rgb(&self) -> [f64; 3] {
        let n = self.pixel_count();
        if n == 0 {
            return [0.0; 3];
        }
        let mut sums = [0u64; 3];
        for px in self.pixels.chunks_exact(3) {
            sums[0] += px[0] as u64;
            sums[1] += px[1] as u64;
            sums[2] += px[2] as u64;
        }
        let denom = 255.0 * n as f64;
        [sums[0] as f64 / denom, sums[1] as f64 / denom, sums[2] as f64 / denom]
    }

    /// Grayscale plane, `0.299 R + 0.587 G + 0.114 B`.
    pub fn luma(&self) -> Vec<f64> {
        self.pixels
            .chunks_exact(3)
            .map(|px| 0.299 * px[0] as f64 + 0.587 * px[1] as f64 + 0.114 * px[2] as f64)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn rejects_wrong_buffer_length() {
        assert!(Frame::new(0, 0.0, 2, 2, vec![0; 11]).is_none());
        assert!(Frame::new(0, 0.0, 2, 2, vec![0; 12]).is_some());
    }

    #[test]
    fn mean_of_solid_color() {
        let f = Frame::solid(0, 0.0, 4, 3, [255, 0, 51]);
        assert_eq!(f.mean_rgb(), [1.0, 0.0, 0.2]);
    }
}
