//! The optical transmission model.
//!
//! A binary frame is fanned out onto a detector grid, picks up deterministic
//! nearest-neighbour crosstalk, is converted to photoelectron counts with
//! Poisson shot noise, gets Gaussian kT/C thermal noise, and is finally
//! thresholded back to bits — optionally after the tridiagonal crosstalk
//! correction. All randomness is drawn from per-line ChaCha substreams keyed
//! by (seed, frame id, line), so results do not depend on evaluation order
//! and whole runs are reproducible from the config alone.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::energy::{BOLTZMANN, ELEMENTARY_CHARGE};
use crate::error::{Error, Result};
use crate::frame::{Axis, AxisSet, BitGrid, Frame};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    /// Fraction of a pixel's intensity leaking into each nearest neighbour.
    pub xtalk_fraction: f64,
    /// Mean photoelectrons for a full-on pixel.
    pub photons_per_bit: f64,
    /// Detector temperature, K.
    pub temperature_k: f64,
    /// Total load capacitance C_det + C_T, F (sets the kT/C noise).
    pub c_total: f64,
    /// Decision threshold as a fraction of `photons_per_bit`.
    pub threshold_fraction: f64,
    /// Master RNG seed.
    pub seed: u64,
    pub enable_shot: bool,
    pub enable_thermal: bool,
    pub enable_xtalk: bool,
    /// Axes along which crosstalk leaks (applied separably, rows first).
    pub xtalk_axes: AxisSet,
    /// Apply the tridiagonal correction before thresholding.
    pub correct_xtalk: bool,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        ChannelConfig {
            xtalk_fraction: 0.19,
            photons_per_bit: 1000.0,
            temperature_k: 300.0,
            c_total: 0.2e-15,
            threshold_fraction: 0.5,
            seed: 42,
            enable_shot: true,
            enable_thermal: true,
            enable_xtalk: true,
            xtalk_axes: AxisSet::Both,
            correct_xtalk: false,
        }
    }
}

impl ChannelConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.xtalk_fraction >= 0.0 && self.xtalk_fraction < 0.5) {
            return Err(Error::config("xtalk_fraction", "must be in [0, 0.5)"));
        }
        if !(self.photons_per_bit > 0.0) {
            return Err(Error::config("photons_per_bit", "must be > 0"));
        }
        if !(self.temperature_k > 0.0) {
            return Err(Error::config("temperature_k", "must be > 0"));
        }
        if !(self.c_total > 0.0) {
            return Err(Error::config("c_total", "must be > 0"));
        }
        if !(self.threshold_fraction > 0.0 && self.threshold_fraction < 1.0) {
            return Err(Error::config("threshold_fraction", "must be in (0, 1)"));
        }
        Ok(())
    }

    /// kT/C noise in electrons for this channel.
    pub fn sigma_thermal_electrons(&self) -> f64 {
        (BOLTZMANN * self.temperature_k * self.c_total).sqrt() / ELEMENTARY_CHARGE
    }

    /// Noise-free variant used by ideal-mode runs.
    pub fn noiseless(&self) -> ChannelConfig {
        ChannelConfig {
            enable_shot: false,
            enable_thermal: false,
            enable_xtalk: false,
            correct_xtalk: false,
            ..self.clone()
        }
    }
}

/// Replicate a 1-D bit vector onto a grid.
///
/// With `Axis::Row` each bit fills one row (`bits.len() x n_copies`, all
/// columns identical); with `Axis::Col` each bit fills one column
/// (`n_copies x bits.len()`, all rows identical).
pub fn fan_out_row(bits: &[u8], n_copies: usize, axis: Axis) -> Result<BitGrid> {
    if bits.is_empty() {
        return Err(Error::usage("fan-out input must be non-empty"));
    }
    if n_copies == 0 {
        return Err(Error::usage("fan-out needs at least one copy"));
    }
    if bits.iter().any(|&b| b > 1) {
        return Err(Error::usage("fan-out input must be binary"));
    }
    let grid = match axis {
        Axis::Row => {
            let mut g = BitGrid::zeros(bits.len(), n_copies);
            for (i, &b) in bits.iter().enumerate() {
                for j in 0..n_copies {
                    g.set(i, j, b);
                }
            }
            g
        }
        Axis::Col => {
            let mut g = BitGrid::zeros(n_copies, bits.len());
            for i in 0..n_copies {
                for (j, &b) in bits.iter().enumerate() {
                    g.set(i, j, b);
                }
            }
            g
        }
    };
    Ok(grid)
}

/// Forward leakage model: every pixel gains `xi` times each of its nearest
/// neighbours along the given axis. Boundary pixels have a single neighbour.
/// No renormalization is applied here.
pub fn apply_crosstalk(frame: &Frame, xi: f64, axis: Axis) -> Frame {
    debug_assert!((0.0..0.5).contains(&xi));
    let lines = frame.line_count(axis);
    let len = frame.line_len(axis);
    let mut out = frame.clone();
    if xi == 0.0 || len < 2 {
        return out;
    }
    for line in 0..lines {
        for i in 0..len {
            let mut v = frame.line_get(axis, line, i);
            if i > 0 {
                v += xi * frame.line_get(axis, line, i - 1);
            }
            if i + 1 < len {
                v += xi * frame.line_get(axis, line, i + 1);
            }
            out.line_set(axis, line, i, v);
        }
    }
    out
}

fn sample_shot(rng: &mut impl Rng, mean: f64) -> f64 {
    // An exactly dark pixel generates no photoelectrons.
    if mean <= 0.0 {
        return 0.0;
    }
    Poisson::new(mean).expect("valid Poisson mean").sample(rng)
}

/// Convert relative intensities to photoelectron counts with Poisson shot
/// noise: count ~ Poisson(intensity * n_p); zero intensity stays exactly 0.
pub fn apply_shot_noise(frame: &Frame, n_p: f64, rng: &mut impl Rng) -> Frame {
    debug_assert!(n_p > 0.0);
    let mut out = frame.clone();
    for v in out.data_mut() {
        *v = sample_shot(rng, *v * n_p);
    }
    out
}

/// Add zero-mean Gaussian kT/C noise (in electrons) to every pixel,
/// including dark ones.
pub fn apply_thermal_noise(frame: &Frame, cfg: &ChannelConfig, rng: &mut impl Rng) -> Frame {
    let sigma = cfg.sigma_thermal_electrons();
    let normal = Normal::new(0.0, sigma).expect("valid sigma");
    let mut out = frame.clone();
    for v in out.data_mut() {
        *v += normal.sample(rng);
    }
    out
}

/// Background-subtract and normalize: (frame - background) / (full_on - background).
pub fn normalize_frame(frame: &Frame, background: &Frame, full_on: &Frame) -> Result<Frame> {
    if frame.rows() != background.rows()
        || frame.cols() != background.cols()
        || frame.rows() != full_on.rows()
        || frame.cols() != full_on.cols()
    {
        return Err(Error::usage("normalize_frame shapes differ"));
    }
    let mut out = frame.clone();
    for i in 0..out.data().len() {
        let bg = background.data()[i];
        let span = full_on.data()[i] - bg;
        if !(span > 0.0) {
            return Err(Error::Calibration(format!(
                "full-on calibration not above background at pixel {i} ({} vs {bg})",
                full_on.data()[i]
            )));
        }
        out.data_mut()[i] = (frame.data()[i] - bg) / span;
    }
    Ok(out)
}

/// Threshold decision: value strictly above `threshold` reads as `1`.
/// A value exactly at the threshold reads as `0`.
pub fn threshold_frame(frame: &Frame, threshold: f64) -> BitGrid {
    let mut out = BitGrid::zeros(frame.rows(), frame.cols());
    for r in 0..frame.rows() {
        for c in 0..frame.cols() {
            out.set(r, c, (frame.get(r, c) > threshold) as u8);
        }
    }
    out
}

/// Tridiagonal crosstalk correction: each line is multiplied by the matrix
/// with 1 on the diagonal and -xi on the off-diagonals, then renormalized by
/// its maximum when that maximum exceeds 0.5 (all-dark lines are left alone).
pub fn correct_crosstalk(frame: &Frame, xi: f64, axis: Axis) -> Frame {
    debug_assert!((0.0..0.5).contains(&xi));
    let lines = frame.line_count(axis);
    let len = frame.line_len(axis);
    let mut out = frame.clone();
    if len < 2 {
        return out;
    }
    for line in 0..lines {
        let mut corrected = Vec::with_capacity(len);
        for i in 0..len {
            let mut v = frame.line_get(axis, line, i);
            if i > 0 {
                v -= xi * frame.line_get(axis, line, i - 1);
            }
            if i + 1 < len {
                v -= xi * frame.line_get(axis, line, i + 1);
            }
            corrected.push(v);
        }
        let max = corrected.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if max > 0.5 {
            for v in &mut corrected {
                *v /= max;
            }
        }
        for (i, v) in corrected.into_iter().enumerate() {
            out.line_set(axis, line, i, v);
        }
    }
    out
}

/// Estimate the crosstalk fraction from a received calibration frame.
///
/// `received` must be in relative units (full-on of 1) and `sent` must be an
/// alternating 1,0,1,0,... pattern along `axis`: each interior `0` then
/// collects leakage 2*xi, so xi is half the mean intensity at interior `0`
/// positions.
pub fn estimate_xtalk(received: &Frame, sent: &BitGrid, axis: Axis) -> Result<f64> {
    if received.rows() != sent.rows() || received.cols() != sent.cols() {
        return Err(Error::usage("estimate_xtalk shapes differ"));
    }
    let lines = received.line_count(axis);
    let len = received.line_len(axis);
    if len < 3 {
        return Err(Error::usage("calibration lines must have >= 3 pixels"));
    }
    let sent_at = |line: usize, i: usize| match axis {
        Axis::Row => sent.get(line, i),
        Axis::Col => sent.get(i, line),
    };
    let mut sum = 0.0;
    let mut count = 0usize;
    for line in 0..lines {
        for i in 0..len - 1 {
            if sent_at(line, i) == sent_at(line, i + 1) {
                return Err(Error::usage(format!(
                    "calibration frame is not alternating along line {line}"
                )));
            }
        }
        for i in 1..len - 1 {
            if sent_at(line, i) == 0 {
                sum += received.line_get(axis, line, i);
                count += 1;
            }
        }
    }
    if count == 0 {
        return Err(Error::usage("no interior zero pixels in calibration frame"));
    }
    Ok(sum / count as f64 / 2.0)
}

/// Bit-error counts and rates from one or more transmissions.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BerStats {
    pub total_bits: u64,
    pub zeros_sent: u64,
    pub ones_sent: u64,
    pub errors: u64,
    pub errors0: u64,
    pub errors1: u64,
}

impl BerStats {
    pub fn ber_total(&self) -> f64 {
        if self.total_bits == 0 {
            0.0
        } else {
            self.errors as f64 / self.total_bits as f64
        }
    }

    pub fn ber0(&self) -> f64 {
        if self.zeros_sent == 0 {
            0.0
        } else {
            self.errors0 as f64 / self.zeros_sent as f64
        }
    }

    pub fn ber1(&self) -> f64 {
        if self.ones_sent == 0 {
            0.0
        } else {
            self.errors1 as f64 / self.ones_sent as f64
        }
    }

    pub fn merge(&mut self, other: &BerStats) {
        self.total_bits += other.total_bits;
        self.zeros_sent += other.zeros_sent;
        self.ones_sent += other.ones_sent;
        self.errors += other.errors;
        self.errors0 += other.errors0;
        self.errors1 += other.errors1;
    }
}

/// Compare sent and received grids; returns the error statistics and the
/// per-pixel mismatch map.
pub fn measure_ber(sent: &BitGrid, received: &BitGrid) -> Result<(BerStats, BitGrid)> {
    if sent.rows() != received.rows() || sent.cols() != received.cols() {
        return Err(Error::usage(format!(
            "measure_ber shapes differ: {}x{} vs {}x{}",
            sent.rows(),
            sent.cols(),
            received.rows(),
            received.cols()
        )));
    }
    let mut stats = BerStats {
        total_bits: sent.len() as u64,
        ..BerStats::default()
    };
    let mut map = BitGrid::zeros(sent.rows(), sent.cols());
    for r in 0..sent.rows() {
        for c in 0..sent.cols() {
            let s = sent.get(r, c);
            let rx = received.get(r, c);
            if s == 0 {
                stats.zeros_sent += 1;
            } else {
                stats.ones_sent += 1;
            }
            if s != rx {
                stats.errors += 1;
                if s == 0 {
                    stats.errors0 += 1;
                } else {
                    stats.errors1 += 1;
                }
                map.set(r, c, 1);
            }
        }
    }
    Ok((stats, map))
}

/// A configured transmission channel.
#[derive(Debug, Clone)]
pub struct Channel {
    cfg: ChannelConfig,
    sigma_thermal: f64,
}

/// Rows per frame are capped so (frame, line) pairs pack into one u64
/// substream id.
const LINE_BITS: u32 = 20;

impl Channel {
    pub fn new(cfg: ChannelConfig) -> Result<Self> {
        cfg.validate()?;
        let sigma_thermal = cfg.sigma_thermal_electrons();
        Ok(Channel { cfg, sigma_thermal })
    }

    pub fn config(&self) -> &ChannelConfig {
        &self.cfg
    }

    fn line_rng(&self, frame_id: u64, line: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        rng.set_stream((frame_id << LINE_BITS) | line);
        rng
    }

    /// Physical stages only: fan-in of crosstalk, then photoelectron counts
    /// with the configured noise. Output units are electrons.
    pub fn transmit_intensities(&self, bits: &BitGrid, frame_id: u64) -> Frame {
        assert!(bits.rows() < (1 << LINE_BITS), "frame has too many rows");
        let mut frame = Frame::from_bits(bits);
        if self.cfg.enable_xtalk && self.cfg.xtalk_fraction > 0.0 {
            for &axis in self.cfg.xtalk_axes.axes() {
                frame = apply_crosstalk(&frame, self.cfg.xtalk_fraction, axis);
            }
        }
        let n_p = self.cfg.photons_per_bit;
        let normal = Normal::new(0.0, self.sigma_thermal).expect("valid sigma");
        let mut out = Frame::zeros(frame.rows(), frame.cols());
        for r in 0..frame.rows() {
            let mut rng = self.line_rng(frame_id, r as u64);
            for c in 0..frame.cols() {
                let mut electrons = if self.cfg.enable_shot {
                    sample_shot(&mut rng, frame.get(r, c) * n_p)
                } else {
                    frame.get(r, c) * n_p
                };
                if self.cfg.enable_thermal {
                    electrons += normal.sample(&mut rng);
                }
                out.set(r, c, electrons);
            }
        }
        out
    }

    /// Decision stage: normalize against the ideal calibration (dark = 0,
    /// full-on = n_p), optionally correct crosstalk, threshold.
    pub fn decide(&self, electrons: &Frame) -> BitGrid {
        let mut normalized = electrons.clone();
        let inv = 1.0 / self.cfg.photons_per_bit;
        for v in normalized.data_mut() {
            *v *= inv;
        }
        if self.cfg.correct_xtalk {
            // Undo the separable leakage in reverse application order.
            for &axis in self.cfg.xtalk_axes.axes().iter().rev() {
                normalized = correct_crosstalk(&normalized, self.cfg.xtalk_fraction, axis);
            }
        }
        threshold_frame(&normalized, self.cfg.threshold_fraction)
    }

    /// Full pipeline: bits in, received bits out.
    pub fn transmit(&self, bits: &BitGrid, frame_id: u64) -> BitGrid {
        self.decide(&self.transmit_intensities(bits, frame_id))
    }
}
