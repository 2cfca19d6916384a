//! IDX-format dataset loading (the standard MNIST container).
//!
//! Images: magic 0x00000803, then count/rows/cols as big-endian u32 and the
//! raw pixel bytes. Labels: magic 0x00000801, count, then one byte per
//! label. The dataset is user-supplied by path; nothing here touches the
//! network.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

pub const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
pub const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Test,
}

impl Split {
    fn file_prefix(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "t10k",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }
}

/// A loaded image/label set.
#[derive(Debug, Clone)]
pub struct MnistSet {
    /// Flattened pixel bytes, `count * rows * cols`.
    pub images: Vec<u8>,
    pub labels: Vec<u8>,
    pub count: usize,
    pub rows: usize,
    pub cols: usize,
    pub split: &'static str,
}

impl MnistSet {
    /// Load `<dir>/{train|t10k}-images-idx3-ubyte` and the matching labels
    /// file, keeping at most `max_items` records in file order.
    pub fn load(dir: &Path, split: Split, max_items: Option<usize>) -> Result<MnistSet> {
        let images_path = dir.join(format!("{}-images-idx3-ubyte", split.file_prefix()));
        let labels_path = dir.join(format!("{}-labels-idx1-ubyte", split.file_prefix()));
        let (images, count, rows, cols) = load_idx_images(&images_path, max_items)?;
        let labels = load_idx_labels(&labels_path, max_items)?;
        if labels.len() != count {
            return Err(Error::usage(format!(
                "image count {} does not match label count {}",
                count,
                labels.len()
            )));
        }
        if let Some(bad) = labels.iter().find(|&&l| l > 9) {
            return Err(Error::usage(format!("label {bad} outside 0..=9")));
        }
        Ok(MnistSet {
            images,
            labels,
            count,
            rows,
            cols,
            split: split.name(),
        })
    }

    /// Pixel bytes of image `idx`.
    pub fn image(&self, idx: usize) -> &[u8] {
        let px = self.rows * self.cols;
        &self.images[idx * px..(idx + 1) * px]
    }
}

struct IdxReader {
    path: PathBuf,
    reader: BufReader<File>,
    offset: u64,
}

impl IdxReader {
    fn open(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Ok(IdxReader {
            path: path.to_path_buf(),
            reader: BufReader::new(file),
            offset: 0,
        })
    }

    fn parse_err(&self, reason: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.clone(),
            offset: self.offset,
            reason: reason.into(),
        }
    }

    fn read_u32_be(&mut self) -> Result<u32> {
        let mut buf = [0u8; 4];
        self.reader
            .read_exact(&mut buf)
            .map_err(|e| self.parse_err(format!("expected 4 header bytes: {e}")))?;
        self.offset += 4;
        Ok(u32::from_be_bytes(buf))
    }

    fn read_bytes(&mut self, n: usize, what: &str) -> Result<Vec<u8>> {
        let mut data = vec![0u8; n];
        self.reader.read_exact(&mut data).map_err(|_| {
            self.parse_err(format!(
                "truncated file: expected {n} bytes of {what} from this offset"
            ))
        })?;
        self.offset += n as u64;
        Ok(data)
    }
}

/// Parse an IDX image file. Returns (pixels, count, rows, cols).
pub fn load_idx_images(
    path: &Path,
    max_items: Option<usize>,
) -> Result<(Vec<u8>, usize, usize, usize)> {
    let mut r = IdxReader::open(path)?;
    let magic = r.read_u32_be()?;
    if magic != IDX_IMAGES_MAGIC {
        return Err(r.parse_err(format!(
            "bad image magic {magic:#010x}, expected {IDX_IMAGES_MAGIC:#010x}"
        )));
    }
    let count = r.read_u32_be()? as usize;
    let rows = r.read_u32_be()? as usize;
    let cols = r.read_u32_be()? as usize;
    if rows == 0 || cols == 0 {
        return Err(r.parse_err(format!("degenerate image dimensions {rows}x{cols}")));
    }
    let keep = max_items.map_or(count, |m| m.min(count));
    let pixels = r.read_bytes(keep * rows * cols, "pixel data")?;
    Ok((pixels, keep, rows, cols))
}

/// Parse an IDX label file.
pub fn load_idx_labels(path: &Path, max_items: Option<usize>) -> Result<Vec<u8>> {
    let mut r = IdxReader::open(path)?;
    let magic = r.read_u32_be()?;
    if magic != IDX_LABELS_MAGIC {
        return Err(r.parse_err(format!(
            "bad label magic {magic:#010x}, expected {IDX_LABELS_MAGIC:#010x}"
        )));
    }
    let count = r.read_u32_be()? as usize;
    let keep = max_items.map_or(count, |m| m.min(count));
    r.read_bytes(keep, "label data")
}

/// Write an IDX image file (test fixtures and round-trip checks).
pub fn write_idx_images(
    path: &Path,
    images: &[u8],
    count: usize,
    rows: usize,
    cols: usize,
) -> Result<()> {
    if images.len() != count * rows * cols {
        return Err(Error::usage("image byte count does not match dimensions"));
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut emit = |buf: &[u8]| w.write_all(buf).map_err(|e| Error::io(path, e));
    emit(&IDX_IMAGES_MAGIC.to_be_bytes())?;
    emit(&(count as u32).to_be_bytes())?;
    emit(&(rows as u32).to_be_bytes())?;
    emit(&(cols as u32).to_be_bytes())?;
    emit(images)
}

/// Write an IDX label file.
pub fn write_idx_labels(path: &Path, labels: &[u8]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut emit = |buf: &[u8]| w.write_all(buf).map_err(|e| Error::io(path, e));
    emit(&IDX_LABELS_MAGIC.to_be_bytes())?;
    emit(&(labels.len() as u32).to_be_bytes())?;
    emit(labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synth_set(dir: &Path, count: usize) {
        let rows = 4;
        let cols = 3;
        let images: Vec<u8> = (0..count * rows * cols).map(|i| (i % 251) as u8).collect();
        let labels: Vec<u8> = (0..count).map(|i| (i % 10) as u8).collect();
        write_idx_images(&dir.join("train-images-idx3-ubyte"), &images, count, rows, cols)
            .unwrap();
        write_idx_labels(&dir.join("train-labels-idx1-ubyte"), &labels).unwrap();
    }

    #[test]
    fn round_trip_synthetic_files() {
        let dir = tempfile::tempdir().unwrap();
        synth_set(dir.path(), 20);
        let set = MnistSet::load(dir.path(), Split::Train, None).unwrap();
        assert_eq!(set.count, 20);
        assert_eq!((set.rows, set.cols), (4, 3));
        assert_eq!(set.labels[13], 3);
        assert_eq!(set.image(1)[0], 12);

        // Byte-exact write-oracle round trip.
        let relooped = dir.path().join("copy-images-idx3-ubyte");
        write_idx_images(&relooped, &set.images, set.count, set.rows, set.cols).unwrap();
        let original = std::fs::read(dir.path().join("train-images-idx3-ubyte")).unwrap();
        let copied = std::fs::read(&relooped).unwrap();
        assert_eq!(original, copied);
    }

    #[test]
    fn max_items_keeps_prefix() {
        let dir = tempfile::tempdir().unwrap();
        synth_set(dir.path(), 20);
        let set = MnistSet::load(dir.path(), Split::Train, Some(5)).unwrap();
        assert_eq!(set.count, 5);
        assert_eq!(set.labels, vec![0, 1, 2, 3, 4]);
        // Asking for more than the file holds returns everything.
        let all = MnistSet::load(dir.path(), Split::Train, Some(500)).unwrap();
        assert_eq!(all.count, 20);
    }

    #[test]
    fn bad_magic_is_a_parse_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("train-images-idx3-ubyte");
        std::fs::write(&path, 0x0000_0801u32.to_be_bytes()).unwrap();
        match load_idx_images(&path, None) {
            Err(Error::Parse { offset, reason, .. }) => {
                assert_eq!(offset, 4);
                assert!(reason.contains("magic"));
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn truncated_file_names_offset() {
        let dir = tempfile::tempdir().unwrap();
        synth_set(dir.path(), 20);
        let path = dir.path().join("train-images-idx3-ubyte");
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() / 2]).unwrap();
        match load_idx_images(&path, None) {
            Err(Error::Parse { offset, reason, .. }) => {
                assert_eq!(offset, 16);
                assert!(reason.contains("truncated"));
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn missing_file_reports_path() {
        let dir = tempfile::tempdir().unwrap();
        match MnistSet::load(dir.path(), Split::Test, None) {
            Err(Error::Io { path, .. }) => {
                assert!(path.to_string_lossy().contains("t10k-images"));
            }
            other => panic!("expected io error, got {other:?}"),
        }
    }
}
