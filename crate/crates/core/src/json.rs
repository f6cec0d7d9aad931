//! JSON schemas shared across the library and CLI.
//!
//! Complex matrices are row-major arrays of `[re, im]` pairs.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::basis::{FramePartition, HermitianFrame};
use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix};

/// Row-major `[[ [re, im], … ], … ]` representation.
pub fn matrix_to_rows(a: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..a.nrows())
        .map(|i| (0..a.ncols()).map(|j| [a[(i, j)].re, a[(i, j)].im]).collect())
        .collect()
}

pub fn matrix_from_rows(rows: &[Vec<[f64; 2]>]) -> Result<CMatrix> {
    let nrows = rows.len();
    let ncols = rows.first().map(Vec::len).unwrap_or(0);
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != ncols) {
        return Err(Error::InvalidInput(format!("row {i} has {} entries, expected {ncols}", r.len())));
    }
    Ok(CMatrix::from_fn(nrows, ncols, |i, j| c(rows[i][j][0], rows[i][j][1])))
}

/// `#[serde(with = "complex_matrix")]` adapter for [`CMatrix`] fields.
pub mod complex_matrix {
    use super::*;

    pub fn serialize<S: Serializer>(a: &CMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
        matrix_to_rows(a).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<CMatrix, D::Error> {
        let rows = Vec::<Vec<[f64; 2]>>::deserialize(d)?;
        matrix_from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

/// Rounds to `digits` significant decimal digits.
pub fn round_significant(x: f64, digits: u32) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let s = format!("{:.*e}", digits.saturating_sub(1) as usize, x);
    s.parse().unwrap_or(x)
}

/// Serializes an `f64` rounded to 12 significant digits.
pub fn serialize_sig12<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(round_significant(*x, 12))
}

/// Bumped whenever frame element ordering or construction changes.
pub const FRAME_ORDERING_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct FrameFile {
    version: u32,
    n: usize,
    m: usize,
    partition: FramePartition,
    elements: Vec<Vec<Vec<[f64; 2]>>>,
}

pub fn frame_to_json(frame: &HermitianFrame) -> Result<String> {
    let file = FrameFile {
        version: FRAME_ORDERING_VERSION,
        n: frame.photons(),
        m: frame.modes(),
        partition: frame.partition(),
        elements: frame.elements().iter().map(matrix_to_rows).collect(),
    };
    Ok(serde_json::to_string(&file)?)
}

/// Parses and re-validates a frame exported by [`frame_to_json`].
pub fn frame_from_json(text: &str) -> Result<HermitianFrame> {
    let file: FrameFile = serde_json::from_str(text)?;
    if file.version != FRAME_ORDERING_VERSION {
        return Err(Error::FrameCheck(format!(
            "frame ordering version {} does not match {FRAME_ORDERING_VERSION}",
            file.version
        )));
    }
    let elements = file
        .elements
        .iter()
        .map(|rows| matrix_from_rows(rows))
        .collect::<Result<Vec<_>>>()?;
    let frame = HermitianFrame::from_parts(file.n, file.m, elements)?;
    if frame.partition() != file.partition {
        return Err(Error::FrameCheck("stored partition disagrees with (n, m)".into()));
    }
    Ok(frame)
}

/// Content hash naming a cached frame: SHA-256 over `(n, m, ordering version)`.
pub fn frame_cache_key(n: usize, m: usize) -> String {
    let mut h = Sha256::new();
    h.update(format!("fockhtm-frame;n={n};m={m};ordering={FRAME_ORDERING_VERSION}"));
    hex::encode(h.finalize())
}

pub fn frame_cache_path(dir: &Path, n: usize, m: usize) -> PathBuf {
    dir.join(format!("frame-{}.json", &frame_cache_key(n, m)[..16]))
}

/// Loads a frame from `dir` when present and valid, otherwise builds it and
/// writes it back. With `dir = None` the frame is simply built.
pub fn load_or_build_frame(n: usize, m: usize, dir: Option<&Path>) -> Result<HermitianFrame> {
    let Some(dir) = dir else {
        return HermitianFrame::build(n, m);
    };
    let path = frame_cache_path(dir, n, m);
    if let Ok(text) = fs::read_to_string(&path) {
        if let Ok(frame) = frame_from_json(&text) {
            if frame.photons() == n && frame.modes() == m {
                return Ok(frame);
            }
        }
    }
    let frame = HermitianFrame::build(n, m)?;
    fs::create_dir_all(dir)?;
    let tmp = path.with_extension("json.tmp");
    fs::write(&tmp, frame_to_json(&frame)?)?;
    fs::rename(&tmp, &path)?;
    Ok(frame)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;

    #[test]
    fn matrix_round_trip() {
        let a = CMatrix::from_row_slice(2, 3, &[c(1.0, -2.0), c(0.5, 0.0), c(0.0, 3.0), c(-1.0, 1.0), c(2.0, 2.0), c(0.0, 0.0)]);
        let json = serde_json::to_string(&matrix_to_rows(&a)).unwrap();
        assert_eq!(json, "[[[1.0,-2.0],[0.5,0.0],[0.0,3.0]],[[-1.0,1.0],[2.0,2.0],[0.0,0.0]]]");
        let rows: Vec<Vec<[f64; 2]>> = serde_json::from_str(&json).unwrap();
        assert_eq!(matrix_from_rows(&rows).unwrap(), a);
    }

    #[test]
    fn ragged_rows_rejected() {
        let rows = vec![vec![[0.0, 0.0]; 2], vec![[0.0, 0.0]; 1]];
        assert!(matrix_from_rows(&rows).is_err());
    }

    #[test]
    fn significant_digit_rounding() {
        assert_eq!(round_significant(0.1234567890123456, 12), 0.123456789012);
        assert_eq!(round_significant(3.77777777777777, 3), 3.78);
        assert_eq!(round_significant(0.0, 12), 0.0);
        assert_eq!(round_significant(-12345.678, 2), -12000.0);
    }

    #[test]
    fn frame_json_round_trip() {
        let f = HermitianFrame::build(2, 2).unwrap();
        let back = frame_from_json(&frame_to_json(&f).unwrap()).unwrap();
        assert_eq!(back.partition(), f.partition());
        for (a, b) in f.elements().iter().zip(back.elements()) {
            assert!(max_abs_diff(a, b) == 0.0);
        }
    }

    #[test]
    fn tampered_frame_rejected() {
        let f = HermitianFrame::build(2, 2).unwrap();
        let mut v: serde_json::Value = serde_json::from_str(&frame_to_json(&f).unwrap()).unwrap();
        v["elements"][4][0][0][0] = serde_json::json!(0.9);
        assert!(frame_from_json(&v.to_string()).is_err());
    }

    #[test]
    fn cache_keys_distinguish_shapes() {
        assert_ne!(frame_cache_key(2, 2), frame_cache_key(2, 3));
        assert_eq!(frame_cache_key(2, 2), frame_cache_key(2, 2));
        assert_eq!(frame_cache_key(3, 2).len(), 64);
    }

    #[test]
    fn cache_is_written_and_reused() {
        let dir = std::env::temp_dir().join(format!("fockhtm-cache-test-{}", std::process::id()));
        let _ = fs::remove_dir_all(&dir);
        let a = load_or_build_frame(2, 3, Some(&dir)).unwrap();
        assert!(frame_cache_path(&dir, 2, 3).exists());
        let b = load_or_build_frame(2, 3, Some(&dir)).unwrap();
        assert_eq!(a.len(), b.len());
        fs::write(frame_cache_path(&dir, 2, 3), "not json").unwrap();
        let c = load_or_build_frame(2, 3, Some(&dir)).unwrap();
        assert_eq!(c.len(), 36);
        let _ = fs::remove_dir_all(&dir);
    }
}
