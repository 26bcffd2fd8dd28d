//! Analytic model of PEs fed by memory channels behind a host link.
//!
//! A run is a three-stage pipeline (host link, memory channels, compute)
//! with double buffering, so the slowest stage sets the run time.

mod presets;

pub use presets::{
    builtin_presets, preset, reference_tile, reference_workload, KernelCalibration, Preset,
    REFERENCE_DIMS,
};

use alloc::vec::Vec;
use core::fmt;

use crate::kernels::{count_flops_extent, Kernel};
use crate::tiling::WindowPlan;

const GIGA: f64 = 1e9;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("invalid machine model: {0}")]
    InvalidModel(&'static str),
    #[error(
        "{n_pe} PEs x {channels_per_pe} channels exceeds the {channels_total} available channels"
    )]
    ChannelBudget {
        n_pe: usize,
        channels_per_pe: usize,
        channels_total: usize,
    },
    #[error("PE count must be at least 1")]
    NoPe,
    #[error("workload moves no bytes")]
    ZeroTraffic,
    #[error("empty PE range")]
    EmptyRange,
}

/// Measured host CPU reference for one kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CpuBaseline {
    pub gflops: f64,
    pub power_w: f64,
}

impl CpuBaseline {
    pub fn efficiency(&self) -> f64 {
        self.gflops / self.power_w
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MachineModel {
    /// GB/s per memory channel.
    pub channel_bw: f64,
    pub channels_total: usize,
    pub channels_per_pe: usize,
    /// All PEs share one set of `channels_per_pe` channels.
    pub shared_channel: bool,
    pub host_link_bw_read: f64,
    pub host_link_bw_write: f64,
    /// Share of the workload's traffic that crosses the host link per run.
    /// 1 streams every byte from host memory; 0 keeps the data resident in
    /// device memory.
    pub host_traffic_fraction: f64,
    /// GFLOP/s per PE.
    pub pe_rate: f64,
    /// Seconds per kernel launch.
    pub invocation_overhead: f64,
    pub power_base: f64,
    pub power_per_channel: f64,
    pub power_per_pe: f64,
    pub cpu: Option<CpuBaseline>,
}

impl MachineModel {
    pub fn validate(&self) -> Result<(), ModelError> {
        let positive = [
            (self.channel_bw, "channel_bw must be > 0"),
            (self.host_link_bw_read, "host_link_bw_read must be > 0"),
            (self.host_link_bw_write, "host_link_bw_write must be > 0"),
            (self.pe_rate, "pe_rate must be > 0"),
            (self.power_base, "power_base must be > 0"),
        ];
        for (v, msg) in positive {
            if v.is_nan() || v <= 0.0 {
                return Err(ModelError::InvalidModel(msg));
            }
        }
        let non_negative = [
            (self.invocation_overhead, "invocation_overhead must be >= 0"),
            (self.power_per_channel, "power_per_channel must be >= 0"),
            (self.power_per_pe, "power_per_pe must be >= 0"),
        ];
        for (v, msg) in non_negative {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(ModelError::InvalidModel(msg));
            }
        }
        if !(0.0..=1.0).contains(&self.host_traffic_fraction) {
            return Err(ModelError::InvalidModel(
                "host_traffic_fraction must lie in [0, 1]",
            ));
        }
        if self.channels_per_pe == 0 || self.channels_per_pe > self.channels_total {
            return Err(ModelError::InvalidModel(
                "need 1 <= channels_per_pe <= channels_total",
            ));
        }
        if let Some(cpu) = self.cpu {
            if !(cpu.gflops > 0.0 && cpu.power_w > 0.0) {
                return Err(ModelError::InvalidModel("cpu baseline must be > 0"));
            }
        }
        Ok(())
    }

    /// Channels powered when `n_pe` PEs run.
    pub fn channels_used(&self, n_pe: usize) -> usize {
        if self.shared_channel {
            self.channels_per_pe
        } else {
            n_pe * self.channels_per_pe
        }
    }

    pub fn power(&self, n_pe: usize) -> f64 {
        self.power_base
            + self.channels_used(n_pe) as f64 * self.power_per_channel
            + n_pe as f64 * self.power_per_pe
    }
}

/// Traffic and work of one kernel invocation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Workload {
    pub kernel: Kernel,
    pub bytes_read: u64,
    pub bytes_written: u64,
    pub flops: u64,
}

impl Workload {
    /// Traffic implied by a window plan: every tile streams its read region
    /// for each input field and writes back its interior.
    pub fn from_plan(plan: &WindowPlan, bytes_per_elem: u64) -> Self {
        let fields = plan.kernel.input_fields() as u64;
        let mut w = Workload {
            kernel: plan.kernel,
            bytes_read: 0,
            bytes_written: 0,
            flops: 0,
        };
        for t in &plan.tiles {
            w.bytes_read += fields * t.read_region().volume() as u64 * bytes_per_elem;
            w.bytes_written += t.volume() as u64 * bytes_per_elem;
            w.flops += count_flops_extent(plan.kernel, t.extent).total;
        }
        w
    }

    /// Same traffic, `flops` operations.
    pub fn with_flops(self, flops: u64) -> Self {
        Workload { flops, ..self }
    }

    pub fn total_bytes(&self) -> u64 {
        self.bytes_read + self.bytes_written
    }
}

/// Flops per byte moved.
pub fn arithmetic_intensity(w: &Workload) -> Result<f64, ModelError> {
    match w.total_bytes() {
        0 => Err(ModelError::ZeroTraffic),
        b => Ok(w.flops as f64 / b as f64),
    }
}

/// `min(peak, ai * bw)`.
pub fn roofline_attainable(ai: f64, peak: f64, bw: f64) -> f64 {
    peak.min(ai * bw)
}

/// GB/s available to one of `n_pe` PEs.
pub fn effective_pe_bandwidth(model: &MachineModel, n_pe: usize) -> Result<f64, ModelError> {
    if n_pe == 0 {
        return Err(ModelError::NoPe);
    }
    let lanes = model.channels_per_pe as f64 * model.channel_bw;
    if model.shared_channel {
        return Ok(lanes / n_pe as f64);
    }
    if n_pe * model.channels_per_pe > model.channels_total {
        return Err(ModelError::ChannelBudget {
            n_pe,
            channels_per_pe: model.channels_per_pe,
            channels_total: model.channels_total,
        });
    }
    Ok(lanes)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Bottleneck {
    HostLink,
    Channel,
    Compute,
}

impl Bottleneck {
    pub const fn name(self) -> &'static str {
        match self {
            Bottleneck::HostLink => "host-link",
            Bottleneck::Channel => "channel",
            Bottleneck::Compute => "compute",
        }
    }
}

impl fmt::Display for Bottleneck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimResult {
    pub n_pe: usize,
    pub t_host: f64,
    pub t_channel: f64,
    pub t_compute: f64,
    pub time_s: f64,
    pub gflops: f64,
    pub power_w: f64,
    pub gflops_per_watt: f64,
    pub speedup_vs_cpu: Option<f64>,
    pub bottleneck: Bottleneck,
}

/// Bottleneck timing of `w` spread evenly over `n_pe` PEs.
///
/// Ties go to compute, then host link, so `Channel` is reported only when
/// more channel bandwidth would shorten the run.
pub fn simulate_run(
    w: &Workload,
    n_pe: usize,
    model: &MachineModel,
) -> Result<SimResult, ModelError> {
    model.validate()?;
    let bw = effective_pe_bandwidth(model, n_pe)?;
    let n = n_pe as f64;
    let traffic = w.total_bytes() as f64;

    let f = model.host_traffic_fraction;
    let t_host = f * w.bytes_read as f64 / (model.host_link_bw_read * GIGA)
        + f * w.bytes_written as f64 / (model.host_link_bw_write * GIGA);
    let t_channel = if model.shared_channel {
        // (traffic / n) / (lanes / n)
        traffic / (model.channels_per_pe as f64 * model.channel_bw * GIGA)
    } else {
        traffic / n / (bw * GIGA)
    };
    let t_compute = w.flops as f64 / n / (model.pe_rate * GIGA);

    let mut bottleneck = Bottleneck::Compute;
    let mut stage = t_compute;
    if t_host > stage {
        bottleneck = Bottleneck::HostLink;
        stage = t_host;
    }
    if t_channel > stage {
        bottleneck = Bottleneck::Channel;
        stage = t_channel;
    }
    let time_s = stage + model.invocation_overhead;
    let flops = w.flops as f64;
    let gflops = if flops == 0.0 || time_s == 0.0 {
        0.0
    } else if model.invocation_overhead == 0.0 {
        // Rate of the binding stage, so per-PE stage rates scale exactly by n.
        let ai = flops / traffic;
        match bottleneck {
            Bottleneck::Compute => n * model.pe_rate,
            Bottleneck::Channel if model.shared_channel => {
                ai * (model.channels_per_pe as f64 * model.channel_bw)
            }
            Bottleneck::Channel => n * (ai * bw),
            Bottleneck::HostLink => flops / t_host / GIGA,
        }
    } else {
        flops / time_s / GIGA
    };
    let power_w = model.power(n_pe);
    Ok(SimResult {
        n_pe,
        t_host,
        t_channel,
        t_compute,
        time_s,
        gflops,
        power_w,
        gflops_per_watt: gflops / power_w,
        speedup_vs_cpu: model.cpu.map(|c| gflops / c.gflops),
        bottleneck,
    })
}

/// One point of a scaling curve; infeasible counts keep their error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingPoint {
    pub n_pe: usize,
    pub result: Result<SimResult, ModelError>,
}

pub fn scaling_curve(
    w: &Workload,
    model: &MachineModel,
    pe_range: impl IntoIterator<Item = usize>,
) -> Result<Vec<ScalingPoint>, ModelError> {
    model.validate()?;
    let points: Vec<_> = pe_range
        .into_iter()
        .map(|n_pe| ScalingPoint {
            n_pe,
            result: simulate_run(w, n_pe, model),
        })
        .collect();
    if points.is_empty() {
        return Err(ModelError::EmptyRange);
    }
    Ok(points)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyReport {
    pub power_w: f64,
    pub energy_j: f64,
    pub gflops_per_watt: f64,
    pub cpu_efficiency: Option<f64>,
    pub efficiency_ratio: Option<f64>,
}

pub fn energy_report(model: &MachineModel, n_pe: usize, sim: &SimResult) -> EnergyReport {
    let power_w = model.power(n_pe);
    let gflops_per_watt = sim.gflops / power_w;
    let cpu_efficiency = model.cpu.map(|c| c.efficiency());
    EnergyReport {
        power_w,
        energy_j: power_w * sim.time_s,
        gflops_per_watt,
        cpu_efficiency,
        efficiency_ratio: cpu_efficiency.map(|c| gflops_per_watt / c),
    }
}

#[cfg(test)]
mod tests;
