//! Cycle-level simulation of the output-stationary bit-serial GEMM.
//!
//! One B x K activation matrix multiplies a K x N weight matrix on a B x N
//! grid of multiply-accumulate units. At time step (k, bit): activation
//! column k's current bit is fanned out across the N PE columns while weight
//! row k's bit is fanned out across the B PE rows; after `bits_per_value`
//! steps every PE has assembled one activation/weight pair and accumulates
//! their product in place. The whole product takes `bits_per_value * K`
//! steps regardless of B and N.
//!
//! Transmitted frames optionally pass through the optical [`Channel`]; every
//! source bit is tallied for both the electrical-wire and optical energy
//! accounting models. Crosstalk inside a fanned frame couples adjacent
//! *source* bits, so the dataflow applies the leakage stencil along each
//! frame's source axis (copies of one bit along the fan-out axis are
//! identical and the per-line correction model follows the source lines).

use serde::{Deserialize, Serialize};

use crate::channel::{fan_out_row, measure_ber, BerStats, Channel, ChannelConfig};
use crate::energy::{
    electrical_energy_per_bit, optical_energy_per_bit, repeater_energy_per_bit, EnergyConfig,
};
use crate::error::{Error, Result};
use crate::frame::{Axis, AxisSet, BitGrid};
use crate::matrix::Matrix;
use crate::quant::{fit_quant_params, quantize, QuantTensor};

/// How transmitted bits reach the multiplier array.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimMode {
    /// No transmission model at all: the quantized ground truth.
    Ideal,
    /// Bits cross the optical channel with its configured noise.
    Optical,
    /// Bits move on electrical wires; transmission is error-free and only
    /// the energy accounting differs from `Ideal`.
    Electrical,
}

/// Problem dimensions for one bit-serial GEMM.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GemmShape {
    pub b: usize,
    pub k: usize,
    pub n: usize,
    pub bits_per_value: u8,
}

impl GemmShape {
    pub fn validate(&self) -> Result<()> {
        if self.b == 0 || self.k == 0 || self.n == 0 {
            return Err(Error::usage("GEMM dimensions must all be >= 1"));
        }
        if !(1..=8).contains(&self.bits_per_value) {
            return Err(Error::usage("bits_per_value must be in 1..=8"));
        }
        // Worst-case partial sum must fit the accumulator.
        let max_val = (1u128 << self.bits_per_value) - 1;
        if self.k as u128 * max_val * max_val > i64::MAX as u128 {
            return Err(Error::Simulation(format!(
                "accumulator overflow: K = {} with {}-bit values exceeds the i64 range",
                self.k, self.bits_per_value
            )));
        }
        Ok(())
    }

    /// Total time steps for the product: bits_per_value * K.
    pub fn steps(&self) -> u64 {
        self.bits_per_value as u64 * self.k as u64
    }
}

/// Bit and energy accounting for a simulated run. Counters only ever grow;
/// energies are in joules.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyTally {
    /// Simulated time steps (bit-serial; a spatially parallel bus would need
    /// 1/bits_per_value of these).
    pub steps: u64,
    /// Source bits emitted by the transmitters: bits * K * (B + N).
    pub bits_transmitted: u64,
    /// Fan-out-expanded bits arriving at PEs: 2 * bits * K * B * N.
    pub bits_received: u64,
    /// 0->1 transitions summed over every wire hop (sent stream).
    pub zero_to_one_transitions: u64,
    /// `1` bits summed over every receiver (sent stream times fan-out).
    pub ones_transmitted: u64,
    pub macs_performed: u64,
    /// Analytic electrical wire energy, per-hop topology: bits_received
    /// times the per-bit wire cost (1/4 switching factor already folded in).
    pub energy_electrical_j: f64,
    /// Electrical energy under the alternative single-long-bus topology:
    /// each source bit drives one wire spanning all of its receivers.
    pub energy_electrical_bus_j: f64,
    /// Analytic repeater energy: one repeater per hop, firing on the 0->1
    /// fraction (1/4 for random bits).
    pub energy_repeater_j: f64,
    /// Analytic optical energy: bits_received times the per-bit source cost
    /// (1/2 switching factor already folded in).
    pub energy_optical_j: f64,
}

impl EnergyTally {
    pub fn merge(&mut self, other: &EnergyTally) {
        self.steps += other.steps;
        self.bits_transmitted += other.bits_transmitted;
        self.bits_received += other.bits_received;
        self.zero_to_one_transitions += other.zero_to_one_transitions;
        self.ones_transmitted += other.ones_transmitted;
        self.macs_performed += other.macs_performed;
        self.energy_electrical_j += other.energy_electrical_j;
        self.energy_electrical_bus_j += other.energy_electrical_bus_j;
        self.energy_repeater_j += other.energy_repeater_j;
        self.energy_optical_j += other.energy_optical_j;
    }

    /// Electrical energy from the measured transition count instead of the
    /// random-bits 1/4 factor: each 0->1 transition pays the full load.
    pub fn empirical_electrical_energy(&self, cfg: &EnergyConfig) -> Result<f64> {
        Ok(self.zero_to_one_transitions as f64 * 4.0 * electrical_energy_per_bit(cfg)?)
    }

    /// Optical energy from the measured ones count: every received `1`
    /// costs the full photon budget at the source.
    pub fn empirical_optical_energy(&self, cfg: &EnergyConfig) -> Result<f64> {
        Ok(self.ones_transmitted as f64 * 2.0 * optical_energy_per_bit(cfg)?)
    }
}

/// The PE array state: one output-stationary accumulator per (b, n), plus
/// the bit-assembly shift registers and the received-value sums needed to
/// undo the affine quantization afterwards.
#[derive(Debug, Clone)]
pub struct PeGrid {
    b: usize,
    n: usize,
    act_reg: Vec<u16>,
    wgt_reg: Vec<u16>,
    acc: Vec<i64>,
    acc_act: Vec<i64>,
    acc_wgt: Vec<i64>,
}

impl PeGrid {
    fn new(b: usize, n: usize) -> Self {
        PeGrid {
            b,
            n,
            act_reg: vec![0; b * n],
            wgt_reg: vec![0; b * n],
            acc: vec![0; b * n],
            acc_act: vec![0; b * n],
            acc_wgt: vec![0; b * n],
        }
    }

    #[inline]
    fn shift_in(&mut self, act_bits: &BitGrid, wgt_bits: &BitGrid) {
        for i in 0..self.b {
            for j in 0..self.n {
                let idx = i * self.n + j;
                self.act_reg[idx] = (self.act_reg[idx] << 1) | act_bits.get(i, j) as u16;
                self.wgt_reg[idx] = (self.wgt_reg[idx] << 1) | wgt_bits.get(i, j) as u16;
            }
        }
    }

    /// Multiply the assembled pair at every PE, fold it into the stationary
    /// partial sum, and clear the registers for the next k.
    fn accumulate(&mut self) -> Result<()> {
        for idx in 0..self.acc.len() {
            let a = self.act_reg[idx] as i64;
            let w = self.wgt_reg[idx] as i64;
            self.acc[idx] = self.acc[idx]
                .checked_add(a * w)
                .ok_or_else(|| Error::Simulation("PE accumulator overflow".into()))?;
            self.acc_act[idx] += a;
            self.acc_wgt[idx] += w;
            self.act_reg[idx] = 0;
            self.wgt_reg[idx] = 0;
        }
        Ok(())
    }
}

/// Result of one bit-serial GEMM.
#[derive(Debug, Clone)]
pub struct GemmResult {
    pub shape: GemmShape,
    /// Integer products per PE, B x N row-major.
    pub y: Vec<i64>,
    /// Per-PE sum of received activation values over k (for dequantization).
    pub acc_act: Vec<i64>,
    /// Per-PE sum of received weight values over k.
    pub acc_wgt: Vec<i64>,
    pub steps: u64,
    /// Frames consumed from the channel id space (2 per step).
    pub frames_used: u64,
    pub tally: EnergyTally,
    pub ber: BerStats,
}

impl GemmResult {
    #[inline]
    pub fn y_at(&self, b: usize, n: usize) -> i64 {
        self.y[b * self.shape.n + n]
    }
}

fn msb_first_bit(value: u8, bit_index: u8, bits: u8) -> u8 {
    (value >> (bits - 1 - bit_index)) & 1
}

/// One line of the optional per-step trace.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceRecord {
    pub step: u64,
    pub k: usize,
    pub bit_index: u8,
    pub ber_this_step: f64,
}

/// Simulate the full B x K x N product with `bits_per_value * K` time steps.
///
/// `frame_id_base` offsets the channel substream ids so independent GEMMs
/// (layers, images) draw decorrelated noise under one seed.
pub fn bit_serial_gemm(
    x: &QuantTensor,
    w: &QuantTensor,
    mode: SimMode,
    channel_cfg: &ChannelConfig,
    energy_cfg: &EnergyConfig,
    frame_id_base: u64,
) -> Result<GemmResult> {
    bit_serial_gemm_traced(x, w, mode, channel_cfg, energy_cfg, frame_id_base, None)
}

/// [`bit_serial_gemm`] with an optional trace sink receiving one
/// line-delimited JSON [`TraceRecord`] per time step.
pub fn bit_serial_gemm_traced(
    x: &QuantTensor,
    w: &QuantTensor,
    mode: SimMode,
    channel_cfg: &ChannelConfig,
    energy_cfg: &EnergyConfig,
    frame_id_base: u64,
    mut trace: Option<&mut dyn std::io::Write>,
) -> Result<GemmResult> {
    if x.cols() != w.rows() {
        return Err(Error::usage(format!(
            "GEMM shapes not conformable: {}x{} * {}x{}",
            x.rows(),
            x.cols(),
            w.rows(),
            w.cols()
        )));
    }
    if x.params.num_bits != w.params.num_bits {
        return Err(Error::usage(
            "activation and weight tensors must share a bit width",
        ));
    }
    let shape = GemmShape {
        b: x.rows(),
        k: x.cols(),
        n: w.cols(),
        bits_per_value: x.params.num_bits,
    };
    shape.validate()?;
    let (b, k, n, bits) = (shape.b, shape.k, shape.n, shape.bits_per_value);

    // Optical transmission couples adjacent source bits: down the rows for
    // the activation frame, across the columns for the weight frame.
    let channels = match mode {
        SimMode::Optical => {
            let act_cfg = ChannelConfig {
                xtalk_axes: AxisSet::Cols,
                ..channel_cfg.clone()
            };
            let wgt_cfg = ChannelConfig {
                xtalk_axes: AxisSet::Rows,
                ..channel_cfg.clone()
            };
            Some((Channel::new(act_cfg)?, Channel::new(wgt_cfg)?))
        }
        SimMode::Ideal | SimMode::Electrical => None,
    };

    let mut pes = PeGrid::new(b, n);
    let mut tally = EnergyTally::default();
    let mut ber = BerStats::default();
    let mut act_prev = vec![0u8; b];
    let mut wgt_prev = vec![0u8; n];

    let mut frame_id = frame_id_base;
    let mut act_col = vec![0u8; b];
    let mut wgt_row = vec![0u8; n];

    for kk in 0..k {
        for bit in 0..bits {
            for (row, slot) in act_col.iter_mut().enumerate() {
                *slot = msb_first_bit(x.get(row, kk), bit, bits);
            }
            for (col, slot) in wgt_row.iter_mut().enumerate() {
                *slot = msb_first_bit(w.get(kk, col), bit, bits);
            }

            // Source-bit accounting. Each activation bit is re-driven over N
            // wire hops (one segment per PE in its row); each weight bit
            // over B hops.
            for (row, &bit_val) in act_col.iter().enumerate() {
                tally.bits_transmitted += 1;
                tally.bits_received += n as u64;
                if act_prev[row] == 0 && bit_val == 1 {
                    tally.zero_to_one_transitions += n as u64;
                }
                tally.ones_transmitted += bit_val as u64 * n as u64;
                act_prev[row] = bit_val;
            }
            for (col, &bit_val) in wgt_row.iter().enumerate() {
                tally.bits_transmitted += 1;
                tally.bits_received += b as u64;
                if wgt_prev[col] == 0 && bit_val == 1 {
                    tally.zero_to_one_transitions += b as u64;
                }
                tally.ones_transmitted += bit_val as u64 * b as u64;
                wgt_prev[col] = bit_val;
            }

            let act_sent = fan_out_row(&act_col, n, Axis::Row)?;
            let wgt_sent = fan_out_row(&wgt_row, b, Axis::Col)?;
            let mut step_errors = 0u64;
            let (act_recv, wgt_recv) = match &channels {
                Some((act_ch, wgt_ch)) => {
                    let a = act_ch.transmit(&act_sent, frame_id);
                    let w_recv = wgt_ch.transmit(&wgt_sent, frame_id + 1);
                    let (stats_a, _) = measure_ber(&act_sent, &a)?;
                    let (stats_w, _) = measure_ber(&wgt_sent, &w_recv)?;
                    step_errors = stats_a.errors + stats_w.errors;
                    ber.merge(&stats_a);
                    ber.merge(&stats_w);
                    (a, w_recv)
                }
                None => (act_sent, wgt_sent),
            };
            frame_id += 2;

            if let Some(sink) = trace.as_deref_mut() {
                let record = TraceRecord {
                    step: kk as u64 * bits as u64 + bit as u64,
                    k: kk,
                    bit_index: bit,
                    ber_this_step: step_errors as f64 / (2 * b * n) as f64,
                };
                serde_json::to_writer(&mut *sink, &record)?;
                sink.write_all(b"\n").map_err(|e| {
                    Error::Simulation(format!("trace sink write failed: {e}"))
                })?;
            }

            pes.shift_in(&act_recv, &wgt_recv);
            if bit == bits - 1 {
                pes.accumulate()?;
                tally.macs_performed += (b * n) as u64;
            }
        }
    }
    tally.steps = shape.steps();

    tally.energy_electrical_j =
        tally.bits_received as f64 * electrical_energy_per_bit(energy_cfg)?;
    tally.energy_repeater_j =
        tally.bits_received as f64 * 0.25 * repeater_energy_per_bit(energy_cfg)?;
    tally.energy_optical_j = tally.bits_received as f64 * optical_energy_per_bit(energy_cfg)?;
    // Single-bus alternative: one wire of length fanout * L per source bit.
    let bus_cost = |fanout: usize| -> Result<f64> {
        let mut cfg = energy_cfg.clone();
        cfg.wire_length_um *= fanout as f64;
        electrical_energy_per_bit(&cfg)
    };
    let steps_f = shape.steps() as f64;
    tally.energy_electrical_bus_j =
        steps_f * b as f64 * bus_cost(n)? + steps_f * n as f64 * bus_cost(b)?;

    Ok(GemmResult {
        shape,
        y: pes.acc,
        acc_act: pes.acc_act,
        acc_wgt: pes.acc_wgt,
        steps: shape.steps(),
        frames_used: frame_id - frame_id_base,
        tally,
        ber,
    })
}

/// Which cost model a bit stream is evaluated under.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwitchingMode {
    /// Wires pay on 0->1 transitions.
    Electrical,
    /// Optical sources pay per transmitted `1`.
    Optical,
}

/// Measured switching activity of a serial bit stream (initial wire state 0).
/// Random data gives ~1/4 electrically and ~1/2 optically.
pub fn empirical_switching_factor(stream: &[u8], mode: SwitchingMode) -> Result<f64> {
    if stream.len() < 2 {
        return Err(Error::usage("switching factor needs at least 2 bits"));
    }
    let count = match mode {
        SwitchingMode::Electrical => {
            let mut prev = 0u8;
            let mut transitions = 0u64;
            for &b in stream {
                if prev == 0 && b == 1 {
                    transitions += 1;
                }
                prev = b;
            }
            transitions
        }
        SwitchingMode::Optical => stream.iter().filter(|&&b| b == 1).count() as u64,
    };
    Ok(count as f64 / stream.len() as f64)
}

/// One fully-connected layer bound to the simulated hardware.
#[derive(Debug, Clone)]
pub struct LayerRun {
    /// Float pre-activation output, B x N (bias not yet added).
    pub output: Matrix,
    pub steps: u64,
    pub frames_used: u64,
    pub tally: EnergyTally,
    pub ber: BerStats,
}

/// Quantize float activations and weights, stream them through the
/// bit-serial GEMM in the given mode, and undo the affine maps on the
/// integer result.
pub fn run_layer(
    activations: &Matrix,
    weights: &Matrix,
    mode: SimMode,
    channel_cfg: &ChannelConfig,
    energy_cfg: &EnergyConfig,
    num_bits: u8,
    frame_id_base: u64,
) -> Result<LayerRun> {
    let x_params = fit_quant_params(activations, num_bits)?;
    let w_params = fit_quant_params(weights, num_bits)?;
    let xq = quantize(activations, &x_params)?;
    let wq = quantize(weights, &w_params)?;
    let gemm = bit_serial_gemm(&xq, &wq, mode, channel_cfg, energy_cfg, frame_id_base)?;

    // sum_k (min_x + s_x qx)(min_w + s_w qw) expands into the integer
    // product plus received-sum correction terms, so the float product of
    // the received values is recovered exactly.
    let (b, k, n) = (gemm.shape.b, gemm.shape.k, gemm.shape.n);
    let mut output = Matrix::zeros(b, n);
    let (sx, sw) = (x_params.scale, w_params.scale);
    let (mx, mw) = (x_params.floating_min, w_params.floating_min);
    for i in 0..b {
        for j in 0..n {
            let idx = i * n + j;
            let v = sx * sw * gemm.y[idx] as f64
                + mx * sw * gemm.acc_wgt[idx] as f64
                + mw * sx * gemm.acc_act[idx] as f64
                + k as f64 * mx * mw;
            output.set(i, j, v);
        }
    }
    Ok(LayerRun {
        output,
        steps: gemm.steps,
        frames_used: gemm.frames_used,
        tally: gemm.tally,
        ber: gemm.ber,
    })
}
