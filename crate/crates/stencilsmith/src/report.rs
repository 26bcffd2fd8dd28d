//! CSV layouts. Numbers use Rust's shortest round-trip formatting, so the
//! output is locale-independent and byte-stable.

use std::io::Write;

use stencilsmith_core::autotune::{ParetoPoint, TuneResult};
use stencilsmith_core::perfmodel::{EnergyReport, ScalingPoint};
use stencilsmith_core::Kernel;

pub const SCALING_HEADER: [&str; 8] = [
    "kernel",
    "preset",
    "n_pe",
    "time_s",
    "gflops",
    "power_w",
    "gflops_per_watt",
    "bottleneck",
];
pub const ENERGY_HEADER: [&str; 8] = [
    "kernel",
    "preset",
    "n_pe",
    "power_w",
    "energy_j",
    "gflops_per_watt",
    "cpu_gflops_per_watt",
    "efficiency_ratio",
];
pub const TUNER_HEADER: [&str; 8] = [
    "kernel",
    "tx",
    "ty",
    "tz",
    "bytes_per_elem",
    "footprint_bytes",
    "gflops_model",
    "on_front",
];
pub const BENCH_HEADER: [&str; 10] = [
    "kernel",
    "nx",
    "ny",
    "nz",
    "tile",
    "workers",
    "precision",
    "time_s",
    "gflops",
    "checksum",
];

pub const INFEASIBLE: &str = "infeasible";

/// CSV writer with `\n` record terminators.
pub fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Infeasible points keep their PE count and leave the numeric columns
/// empty.
pub fn scaling_record(kernel: Kernel, preset: &str, p: &ScalingPoint) -> Vec<String> {
    let mut rec = vec![kernel.to_string(), preset.to_string(), p.n_pe.to_string()];
    match &p.result {
        Ok(r) => {
            rec.extend([r.time_s, r.gflops, r.power_w, r.gflops_per_watt].map(|v| v.to_string()));
            rec.push(r.bottleneck.to_string());
        }
        Err(_) => rec.extend(["", "", "", "", INFEASIBLE].map(String::from)),
    }
    rec
}

pub fn energy_record(kernel: Kernel, preset: &str, n_pe: usize, e: &EnergyReport) -> [String; 8] {
    [
        kernel.to_string(),
        preset.to_string(),
        n_pe.to_string(),
        e.power_w.to_string(),
        e.energy_j.to_string(),
        e.gflops_per_watt.to_string(),
        opt(e.cpu_efficiency),
        opt(e.efficiency_ratio),
    ]
}

pub fn tuner_record(
    kernel: Kernel,
    bytes_per_elem: u64,
    p: &ParetoPoint,
    on_front: bool,
) -> [String; 8] {
    [
        kernel.to_string(),
        p.tile.tx.to_string(),
        p.tile.ty.to_string(),
        p.tile.tz.to_string(),
        bytes_per_elem.to_string(),
        p.footprint.to_string(),
        p.throughput.to_string(),
        on_front.to_string(),
    ]
}

pub fn write_tuner_csv<W: Write>(
    w: W,
    kernel: Kernel,
    bytes_per_elem: u64,
    r: &TuneResult,
) -> csv::Result<()> {
    let mut out = writer(w);
    out.write_record(TUNER_HEADER)?;
    for p in &r.evaluated {
        out.write_record(tuner_record(kernel, bytes_per_elem, p, r.on_front(p)))?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub kernel: Kernel,
    pub dims: [usize; 3],
    pub tile: String,
    pub workers: usize,
    pub precision: String,
    pub time_s: f64,
    pub gflops: f64,
    pub checksum: f64,
}

impl BenchRow {
    pub fn record(&self) -> [String; 10] {
        [
            self.kernel.to_string(),
            self.dims[0].to_string(),
            self.dims[1].to_string(),
            self.dims[2].to_string(),
            self.tile.clone(),
            self.workers.to_string(),
            self.precision.clone(),
            self.time_s.to_string(),
            self.gflops.to_string(),
            self.checksum.to_string(),
        ]
    }
}
