//! PNG / animated PNG decoding and APNG writing.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use image::codecs::png::PngDecoder;
use image::{AnimationDecoder, DynamicImage};
use keyframe_core::Frame;

use super::{file_size, DecodeError, DecoderBackend, VideoMeta};

/// Reads still PNGs (one frame) and APNGs. Frame delays give the rate; a
/// still image reports 1 frame per second.
#[derive(Debug, Clone, Copy, Default)]
pub struct NativeDecoder;

fn open(path: &Path) -> Result<BufReader<File>, DecodeError> {
    File::open(path).map(BufReader::new).map_err(|e| DecodeError::new(path, e.to_string()))
}

fn rgba_to_frame(index: usize, timestamp: f64, img: image::RgbaImage) -> Frame {
    let (w, h) = img.dimensions();
    let rgb = DynamicImage::ImageRgba8(img).into_rgb8().into_raw();
    Frame { index, timestamp, width: w, height: h, pixels: rgb }
}

impl DecoderBackend for NativeDecoder {
    fn probe(&self, path: &Path) -> Result<VideoMeta, DecodeError> {
        let byte_size = file_size(path)?;
        let reader =
            png::Decoder::new(open(path)?).read_info().map_err(|e| DecodeError::new(path, format!("png: {e}")))?;
        let info = reader.info();
        let (frame_count, fps) = match (info.animation_control, info.frame_control) {
            (Some(actl), fctl) => {
                let fps = fctl
                    .map(|f| {
                        let den = if f.delay_den == 0 { 100.0 } else { f.delay_den as f64 };
                        if f.delay_num == 0 {
                            0.0
                        } else {
                            den / f.delay_num as f64
                        }
                    })
                    .filter(|r| r.is_finite() && *r > 0.0)
                    .unwrap_or(1.0);
                (actl.num_frames as usize, fps)
            }
            (None, _) => (1, 1.0),
        };
        if info.width == 0 || info.height == 0 {
            return Err(DecodeError::new(path, "zero-sized image"));
        }
        Ok(VideoMeta { frame_count, fps, width: info.width, height: info.height, byte_size })
    }

    fn extract(&self, path: &Path, meta: &VideoMeta, indices: &[usize]) -> Result<Vec<Frame>, DecodeError> {
        let err = |e: image::ImageError| DecodeError::new(path, e.to_string());
        let decoder = PngDecoder::new(open(path)?).map_err(err)?;
        if !decoder.is_apng().map_err(err)? {
            if indices != [0] {
                return Err(DecodeError::new(path, "still image has a single frame"));
            }
            let img = DynamicImage::from_decoder(decoder).map_err(err)?;
            return Ok(vec![rgba_to_frame(0, 0.0, img.into_rgba8())]);
        }
        let mut wanted = indices.iter().copied().peekable();
        let mut out = Vec::with_capacity(indices.len());
        for (i, frame) in decoder.apng().map_err(err)?.into_frames().enumerate() {
            let Some(&next) = wanted.peek() else { break };
            let frame = frame.map_err(|e| DecodeError::new(path, format!("frame {i}: {e}")))?;
            if i == next {
                out.push(rgba_to_frame(i, meta.timestamp(i), frame.into_buffer()));
                wanted.next();
            }
        }
        if let Some(missing) = wanted.next() {
            return Err(DecodeError::new(path, format!("stream ended before frame {missing}")));
        }
        Ok(out)
    }
}

fn frame_delay(fps: f64) -> (u16, u16) {
    let den = (fps * 1000.0).round();
    if den >= 1.0 && den <= u16::MAX as f64 {
        (1000, den as u16)
    } else {
        (1, fps.round().clamp(1.0, u16::MAX as f64) as u16)
    }
}

/// Writes `frames` as an animated PNG at `fps`. All frames must share the
/// first frame's dimensions.
pub fn write_apng(path: &Path, frames: &[Frame], fps: f64) -> Result<(), String> {
    let first = frames.first().ok_or("no frames to encode")?;
    if frames.iter().any(|f| f.width != first.width || f.height != first.height) {
        return Err("frames differ in size".into());
    }
    let file = File::create(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut enc = png::Encoder::new(BufWriter::new(file), first.width, first.height);
    enc.set_color(png::ColorType::Rgb);
    enc.set_depth(png::BitDepth::Eight);
    enc.set_animated(frames.len() as u32, 0).map_err(|e| e.to_string())?;
    let (num, den) = frame_delay(fps);
    enc.set_frame_delay(num, den).map_err(|e| e.to_string())?;
    let mut writer = enc.write_header().map_err(|e| e.to_string())?;
    for f in frames {
        writer.write_image_data(&f.pixels).map_err(|e| e.to_string())?;
    }
    writer.finish().map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::videoio::decode_frames;

    fn schedule(i: usize) -> [u8; 3] {
        [(i * 5) as u8, 255 - (i * 5) as u8, (i % 2 * 200) as u8]
    }

    fn clip(dir: &Path, n: usize, fps: f64) -> std::path::PathBuf {
        let frames: Vec<Frame> = (0..n).map(|i| Frame::solid(i, 0.0, 16, 8, schedule(i))).collect();
        let p = dir.join("clip.apng");
        write_apng(&p, &frames, fps).unwrap();
        p
    }

    #[test]
    fn probe_counts_frames_and_rate() {
        let dir = tempfile::tempdir().unwrap();
        let p = clip(dir.path(), 48, 24.0);
        let meta = NativeDecoder.probe(&p).unwrap();
        assert_eq!(meta.frame_count, 48);
        assert_eq!(meta.fps, 24.0);
        assert_eq!((meta.width, meta.height), (16, 8));
        assert_eq!(meta.byte_size, std::fs::metadata(&p).unwrap().len());
        // Independent count: decode everything.
        let all: Vec<usize> = (0..48).collect();
        assert_eq!(decode_frames(&NativeDecoder, &p, &meta, &all, 48).unwrap().len(), 48);
    }

    #[test]
    fn one_frame_video() {
        let dir = tempfile::tempdir().unwrap();
        let p = clip(dir.path(), 1, 24.0);
        assert_eq!(NativeDecoder.probe(&p).unwrap().frame_count, 1);
    }

    #[test]
    fn still_png_is_a_single_frame() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("still.png");
        image::RgbImage::from_pixel(5, 4, image::Rgb([1, 2, 3])).save(&p).unwrap();
        let meta = NativeDecoder.probe(&p).unwrap();
        assert_eq!((meta.frame_count, meta.fps), (1, 1.0));
        let set = decode_frames(&NativeDecoder, &p, &meta, &[0], 32).unwrap();
        assert_eq!(&set.frames[0].pixels[..3], &[1, 2, 3]);
    }

    #[test]
    fn decoded_colors_follow_schedule() {
        let dir = tempfile::tempdir().unwrap();
        let p = clip(dir.path(), 20, 10.0);
        let meta = NativeDecoder.probe(&p).unwrap();
        let set = decode_frames(&NativeDecoder, &p, &meta, &[0, 10], 32).unwrap();
        assert_eq!(set.indices(), vec![0, 10]);
        for f in &set.frames {
            let [r, g, b] = f.mean_rgb();
            let want = schedule(f.index);
            assert_eq!([(r * 255.0).round() as u8, (g * 255.0).round() as u8, (b * 255.0).round() as u8], want);
        }
        assert_eq!(set.frames[1].timestamp, 1.0);
        assert!(decode_frames(&NativeDecoder, &p, &meta, &[], 32).unwrap().is_empty());
        let err = decode_frames(&NativeDecoder, &p, &meta, &[3, 20], 32).unwrap_err();
        assert!(err.message.contains("out of range"));
        assert!(decode_frames(&NativeDecoder, &p, &meta, &[5, 5], 32).is_err());
    }

    #[test]
    fn truncated_stream_is_a_decode_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = clip(dir.path(), 30, 10.0);
        let meta = NativeDecoder.probe(&p).unwrap();
        let bytes = std::fs::read(&p).unwrap();
        std::fs::write(&p, &bytes[..bytes.len() / 2]).unwrap();
        assert!(decode_frames(&NativeDecoder, &p, &meta, &[0, 29], 32).is_err());
    }

    #[test]
    fn garbage_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.apng");
        std::fs::write(&p, b"\x89PNG\r\n\x1a\nnot really a png").unwrap();
        assert!(NativeDecoder.probe(&p).is_err());
    }
}
