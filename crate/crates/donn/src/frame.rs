//! 2-D bit and intensity frames and their on-disk formats.
//!
//! A [`BitGrid`] is what a transmitter emits and a receiver decides; a
//! [`Frame`] holds real-valued intensities (relative units or photoelectron
//! counts) in between. Frames serialize to a flat binary format with a
//! 16-byte header (8-byte magic + u32 rows + u32 cols, little-endian,
//! row-major f64 payload), to CSV for inspection, and bit grids export as
//! binary PGM images for visual comparison of error maps.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const FRAME_MAGIC: &[u8; 8] = b"DONNFRM1";

/// Which neighbours count as "adjacent along a line".
///
/// `Row` treats each row as an independent line (neighbours sit left/right);
/// `Col` treats each column as a line (neighbours sit above/below).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Row,
    Col,
}

/// Crosstalk axis selection for a 2-D frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisSet {
    Rows,
    Cols,
    Both,
}

impl AxisSet {
    pub fn axes(self) -> &'static [Axis] {
        match self {
            AxisSet::Rows => &[Axis::Row],
            AxisSet::Cols => &[Axis::Col],
            AxisSet::Both => &[Axis::Row, Axis::Col],
        }
    }
}

/// Real-valued 2-D frame, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Frame {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Frame {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::usage(format!(
                "frame data length {} does not match {}x{}",
                data.len(),
                rows,
                cols
            )));
        }
        Ok(Frame { rows, cols, data })
    }

    pub fn from_bits(bits: &BitGrid) -> Self {
        Frame {
            rows: bits.rows,
            cols: bits.cols,
            data: bits.data.iter().map(|&b| b as f64).collect(),
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Number of lines when the frame is traversed along `axis`.
    pub fn line_count(&self, axis: Axis) -> usize {
        match axis {
            Axis::Row => self.rows,
            Axis::Col => self.cols,
        }
    }

    /// Length of each line along `axis`.
    pub fn line_len(&self, axis: Axis) -> usize {
        match axis {
            Axis::Row => self.cols,
            Axis::Col => self.rows,
        }
    }

    #[inline]
    pub fn line_get(&self, axis: Axis, line: usize, idx: usize) -> f64 {
        match axis {
            Axis::Row => self.get(line, idx),
            Axis::Col => self.get(idx, line),
        }
    }

    #[inline]
    pub fn line_set(&mut self, axis: Axis, line: usize, idx: usize, v: f64) {
        match axis {
            Axis::Row => self.set(line, idx, v),
            Axis::Col => self.set(idx, line, v),
        }
    }

    pub fn write_binary(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let mut emit = |buf: &[u8]| w.write_all(buf).map_err(|e| Error::io(path, e));
        emit(FRAME_MAGIC)?;
        emit(&(self.rows as u32).to_le_bytes())?;
        emit(&(self.cols as u32).to_le_bytes())?;
        for v in &self.data {
            emit(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary(path: &Path) -> Result<Frame> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut r = BufReader::new(file);
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic).map_err(|e| Error::io(path, e))?;
        if &magic != FRAME_MAGIC {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                offset: 0,
                reason: format!("bad magic {magic:?}, expected {FRAME_MAGIC:?}"),
            });
        }
        let mut u32buf = [0u8; 4];
        r.read_exact(&mut u32buf).map_err(|e| Error::io(path, e))?;
        let rows = u32::from_le_bytes(u32buf) as usize;
        r.read_exact(&mut u32buf).map_err(|e| Error::io(path, e))?;
        let cols = u32::from_le_bytes(u32buf) as usize;
        let mut data = Vec::with_capacity(rows * cols);
        let mut f64buf = [0u8; 8];
        for i in 0..rows * cols {
            r.read_exact(&mut f64buf).map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                offset: 16 + 8 * i as u64,
                reason: format!("truncated payload, expected {} values", rows * cols),
            })?;
            data.push(f64::from_le_bytes(f64buf));
        }
        Ok(Frame { rows, cols, data })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for r in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|c| self.get(r, c).to_string()).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Binary 2-D grid, row-major, values 0 or 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BitGrid {
    rows: usize,
    cols: usize,
    data: Vec<u8>,
}

impl BitGrid {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        BitGrid {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<u8>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::usage(format!(
                "bit grid data length {} does not match {}x{}",
                data.len(),
                rows,
                cols
            )));
        }
        if data.iter().any(|&b| b > 1) {
            return Err(Error::usage("bit grid values must be 0 or 1"));
        }
        Ok(BitGrid { rows, cols, data })
    }

    /// Uniformly random bits from the given generator.
    pub fn random(rows: usize, cols: usize, rng: &mut impl rand::Rng) -> Self {
        let data = (0..rows * cols)
            .map(|_| if rng.random_bool(0.5) { 1 } else { 0 })
            .collect();
        BitGrid { rows, cols, data }
    }

    /// The calibration pattern: bits alternate 1,0,1,0,... along each line
    /// of `axis`, identical across lines.
    pub fn alternating(rows: usize, cols: usize, axis: Axis) -> Self {
        let mut g = BitGrid::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                let idx = match axis {
                    Axis::Row => c,
                    Axis::Col => r,
                };
                g.set(r, c, (idx % 2 == 0) as u8);
            }
        }
        g
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u8 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u8) {
        self.data[r * self.cols + c] = v;
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn count_ones(&self) -> usize {
        self.data.iter().filter(|&&b| b == 1).count()
    }

    /// Write as binary PGM (P5), 0 -> black, 1 -> white.
    pub fn write_pgm(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        write!(w, "P5\n{} {}\n255\n", self.cols, self.rows).map_err(|e| Error::io(path, e))?;
        let pixels: Vec<u8> = self.data.iter().map(|&b| if b == 1 { 255 } else { 0 }).collect();
        w.write_all(&pixels).map_err(|e| Error::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn frame_binary_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("frame.bin");
        let f = Frame::from_vec(2, 3, vec![0.0, 1.5, -2.25, 1e-300, 3.125, f64::MAX]).unwrap();
        f.write_binary(&path).unwrap();
        let g = Frame::read_binary(&path).unwrap();
        assert_eq!(f, g);
        // 16-byte header + 6 little-endian doubles.
        assert_eq!(std::fs::metadata(&path).unwrap().len(), 16 + 6 * 8);
    }

    #[test]
    fn frame_binary_bad_magic() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.bin");
        std::fs::write(&path, b"NOTAFRMXxxxxxxxx").unwrap();
        assert!(matches!(
            Frame::read_binary(&path),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn frame_binary_truncated() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trunc.bin");
        let f = Frame::zeros(4, 4);
        f.write_binary(&path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 9]).unwrap();
        match Frame::read_binary(&path) {
            Err(Error::Parse { offset, .. }) => assert!(offset > 16),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn alternating_pattern_along_each_axis() {
        let row_wise = BitGrid::alternating(2, 4, Axis::Row);
        assert_eq!(row_wise.data(), &[1, 0, 1, 0, 1, 0, 1, 0]);
        let col_wise = BitGrid::alternating(4, 2, Axis::Col);
        assert_eq!(col_wise.data(), &[1, 1, 0, 0, 1, 1, 0, 0]);
    }

    #[test]
    fn pgm_export_shape() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("map.pgm");
        let mut g = BitGrid::zeros(2, 3);
        g.set(0, 0, 1);
        g.write_pgm(&path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        assert!(bytes.starts_with(b"P5\n3 2\n255\n"));
        assert_eq!(bytes.len(), b"P5\n3 2\n255\n".len() + 6);
    }

    proptest! {
        #[test]
        fn frame_round_trip_preserves_bits(values in proptest::collection::vec(-1e12f64..1e12, 1..64)) {
            let cols = values.len();
            let f = Frame::from_vec(1, cols, values).unwrap();
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("prop.bin");
            f.write_binary(&path).unwrap();
            let g = Frame::read_binary(&path).unwrap();
            prop_assert_eq!(f, g);
        }
    }
}
