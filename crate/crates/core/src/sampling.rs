//! Coarse uniform sampling over a video's frame range.

use alloc::vec::Vec;

/// Endpoint-inclusive, evenly spaced frame indices.
///
/// With `frame_count <= cn` every frame is returned. Otherwise index `i` of
/// the result is `round(i * (frame_count - 1) / (cn - 1))`, computed in
/// integers with halves rounded up, so the first and last frames are always
/// present. `cn == 1` yields the first frame only.
pub fn coarse_indices(frame_count: usize, cn: usize) -> Vec<usize> {
    assert!(cn >= 1, "cn must be at least 1");
    if frame_count <= cn {
        return (0..frame_count).collect();
    }
    if cn == 1 {
        return alloc::vec![0];
    }
    let span = (frame_count - 1) as u128;
    let steps = (cn - 1) as u128;
    let mut out: Vec<usize> = Vec::with_capacity(cn);
    for i in 0..cn as u128 {
        let idx = ((2 * i * span + steps) / (2 * steps)) as usize;
        if out.last() != Some(&idx) {
            out.push(idx);
        }
    }
    out
}
