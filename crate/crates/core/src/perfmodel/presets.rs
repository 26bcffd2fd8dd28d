//! Machine calibrations for the FPGA+HBM near-memory boards and the host CPU.
//!
//! Per-PE rates are reported totals divided by the PE count that produced
//! them. Per-PE power is whatever remains of the implied board power
//! (GFLOP/s over GFLOPS/W) after the base and per-channel terms.

use alloc::vec::Vec;

use super::{CpuBaseline, MachineModel, Workload};
use crate::grid::{Dims3, Halo};
use crate::kernels::Kernel;
use crate::tiling::{plan_windows, TileSpec};

/// Per-kernel part of a preset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelCalibration {
    pub kernel: Kernel,
    pub pe_rate: f64,
    pub power_base: f64,
    pub power_per_pe: f64,
    /// Largest PE count the board fits.
    pub max_pe: usize,
    pub cpu: Option<CpuBaseline>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    /// Kernel-independent fields; `pe_rate`, power and CPU terms are
    /// replaced per kernel by [`Preset::model`].
    pub base: MachineModel,
    pub kernels: Vec<KernelCalibration>,
}

impl Preset {
    pub fn calibration(&self, kernel: Kernel) -> Option<&KernelCalibration> {
        self.kernels.iter().find(|c| c.kernel == kernel)
    }

    pub fn model(&self, kernel: Kernel) -> Option<MachineModel> {
        self.calibration(kernel).map(|c| MachineModel {
            pe_rate: c.pe_rate,
            power_base: c.power_base,
            power_per_pe: c.power_per_pe,
            cpu: c.cpu,
            ..self.base
        })
    }

    pub fn max_pe(&self, kernel: Kernel) -> Option<usize> {
        self.calibration(kernel).map(|c| c.max_pe)
    }
}

const CPU_VADVC: CpuBaseline = CpuBaseline {
    gflops: 29.1,
    power_w: 99.2,
};
const CPU_HDIFF: CpuBaseline = CpuBaseline {
    gflops: 58.5,
    power_w: 97.9,
};

const HBM_CHANNEL_BW: f64 = 12.8;
const DDR4_CHANNEL_BW: f64 = 25.6;
const HBM_CHANNELS: usize = 32;
const POWER_BASE: f64 = 10.0;
const POWER_PER_CHANNEL: f64 = 1.0;

const VADVC_GFLOPS: f64 = 157.1;
const VADVC_PES: usize = 14;
const VADVC_EFFICIENCY: f64 = 1.61;
const HDIFF_GFLOPS: f64 = 608.4;
const HDIFF_PES: usize = 16;
const HDIFF_EFFICIENCY: f64 = 21.01;
/// OCAPI over CAPI2 throughput gain.
const VADVC_OCAPI_GAIN: f64 = 1.37;
const HDIFF_OCAPI_GAIN: f64 = 1.44;

/// Copy study: 1024-bit words of f32 at 250 MHz per PE.
const COPY_PE_RATE: f64 = 32.0 * 0.25;
const COPY_CHANNELS: usize = 24;

/// Grid shared by every calibration workload: a 64x64x64 interior.
pub const REFERENCE_DIMS: [usize; 3] = [68, 68, 64];

pub fn reference_tile(kernel: Kernel) -> TileSpec {
    match kernel {
        Kernel::Hdiff => TileSpec::new(16, 64, 8),
        Kernel::Vadvc => TileSpec::new(64, 2, 64),
        Kernel::Copy => TileSpec::new(64, 64, 64),
    }
}

/// Traffic and work of `kernel` on the reference grid. Copy counts one
/// operation per element copied.
pub fn reference_workload(kernel: Kernel, bytes_per_elem: u64) -> Workload {
    let [nx, ny, nz] = REFERENCE_DIMS;
    let dims = Dims3::new(nx, ny, nz).expect("reference dims are valid");
    let plan = plan_windows(dims, Halo::DYCORE, reference_tile(kernel), kernel)
        .expect("reference tiles are valid");
    let w = Workload::from_plan(&plan, bytes_per_elem);
    match kernel {
        Kernel::Copy => w.with_flops(plan.interior_volume() as u64),
        _ => w,
    }
}

fn per_pe_power(gflops: f64, efficiency: f64, n_pe: usize) -> f64 {
    let board = gflops / efficiency;
    (board - POWER_BASE - n_pe as f64 * POWER_PER_CHANNEL) / n_pe as f64
}

fn hbm_base(host_read: f64, host_write: f64) -> MachineModel {
    MachineModel {
        channel_bw: HBM_CHANNEL_BW,
        channels_total: HBM_CHANNELS,
        channels_per_pe: 1,
        shared_channel: false,
        host_link_bw_read: host_read,
        host_link_bw_write: host_write,
        host_traffic_fraction: 0.0,
        pe_rate: 1.0,
        invocation_overhead: 0.0,
        power_base: POWER_BASE,
        power_per_channel: POWER_PER_CHANNEL,
        power_per_pe: 0.0,
        cpu: None,
    }
}

fn accelerator_kernels(
    vadvc_gain: f64,
    hdiff_gain: f64,
    max_pe: [usize; 2],
) -> Vec<KernelCalibration> {
    alloc::vec![
        KernelCalibration {
            kernel: Kernel::Vadvc,
            pe_rate: VADVC_GFLOPS / VADVC_PES as f64 / vadvc_gain,
            power_base: POWER_BASE,
            power_per_pe: per_pe_power(VADVC_GFLOPS, VADVC_EFFICIENCY, VADVC_PES),
            max_pe: max_pe[0],
            cpu: Some(CPU_VADVC),
        },
        KernelCalibration {
            kernel: Kernel::Hdiff,
            pe_rate: HDIFF_GFLOPS / HDIFF_PES as f64 / hdiff_gain,
            power_base: POWER_BASE,
            power_per_pe: per_pe_power(HDIFF_GFLOPS, HDIFF_EFFICIENCY, HDIFF_PES),
            max_pe: max_pe[1],
            cpu: Some(CPU_HDIFF),
        },
    ]
}

/// All calibrated machines, in a fixed order.
pub fn builtin_presets() -> Vec<Preset> {
    let copy_base = MachineModel {
        channels_total: COPY_CHANNELS,
        ..hbm_base(22.1, 22.0)
    };
    let copy_work = reference_workload(Kernel::Copy, 4);
    // Launch overhead of half the single-PE streaming time puts the knee of
    // the copy curve at 16 PEs.
    let copy_overhead = copy_work.total_bytes() as f64 / (HBM_CHANNEL_BW * 1e9) / 2.0;

    alloc::vec![
        Preset {
            name: "hbm_ocapi",
            description: "HBM2 board over OpenCAPI: 12.8 GB/s per pseudo-channel, one channel per PE, \
                          32 channels; host link 22.1/22.0 GB/s R/W; vadvc 157.1 GFLOP/s at 14 PEs, \
                          1.61 GFLOPS/W; hdiff 608.4 GFLOP/s at 16 PEs, 21.01 GFLOPS/W; \
                          +1 W per enabled channel; 10 W base (assumed)",
            base: hbm_base(22.1, 22.0),
            kernels: accelerator_kernels(1.0, 1.0, [VADVC_PES, HDIFF_PES]),
        },
        Preset {
            name: "hbm_capi2",
            description: "HBM2 board over CAPI2: as hbm_ocapi with host link 13.9/14.0 GB/s R/W and \
                          per-PE rates lower by the OpenCAPI gains of 37% (vadvc) and 44% (hdiff); \
                          14/16 PEs",
            base: hbm_base(13.9, 14.0),
            kernels: accelerator_kernels(VADVC_OCAPI_GAIN, HDIFF_OCAPI_GAIN, [VADVC_PES, HDIFF_PES]),
        },
        Preset {
            name: "ddr4_capi2",
            description: "DDR4 board over CAPI2: every PE shares one 25.6 GB/s channel; host link \
                          13.9/14.0 GB/s R/W; CAPI2 per-PE rates; fits 4 PEs (vadvc) / 8 PEs (hdiff)",
            base: MachineModel {
                channel_bw: DDR4_CHANNEL_BW,
                channels_total: 1,
                shared_channel: true,
                ..hbm_base(13.9, 14.0)
            },
            kernels: accelerator_kernels(VADVC_OCAPI_GAIN, HDIFF_OCAPI_GAIN, [4, 8]),
        },
        Preset {
            name: "hbm_multi_ocapi",
            description: "HBM2 over OpenCAPI with 4 pseudo-channels per PE (51.2 GB/s per PE); \
                          12 channels close timing, so at most 3 PEs; OpenCAPI per-PE rates",
            base: MachineModel { channels_per_pe: 4, channels_total: 12, ..hbm_base(22.1, 22.0) },
            kernels: accelerator_kernels(1.0, 1.0, [3, 3]),
        },
        Preset {
            name: "hbm_copy",
            description: "Copy stencil on HBM over OpenCAPI: 24 usable channels at 12.8 GB/s, one per PE; \
                          8 G element ops/s per PE (1024-bit words at 250 MHz); launch overhead fitted \
                          so throughput saturates after 16 PEs",
            base: MachineModel { invocation_overhead: copy_overhead, ..copy_base },
            kernels: alloc::vec![KernelCalibration {
                kernel: Kernel::Copy,
                pe_rate: COPY_PE_RATE,
                power_base: POWER_BASE,
                power_per_pe: 0.0,
                max_pe: COPY_CHANNELS,
                cpu: None,
            }],
        },
        Preset {
            name: "cpu_power9",
            description: "16-core POWER9 host, 64 threads, as one PE: vadvc 29.1 GFLOP/s at 99.2 W, \
                          hdiff 58.5 GFLOP/s at 97.9 W; memory is folded into the measured rate",
            base: MachineModel {
                channel_bw: 1.0e6,
                channels_total: 1,
                power_per_channel: 0.0,
                ..hbm_base(1.0e6, 1.0e6)
            },
            kernels: [(Kernel::Vadvc, CPU_VADVC), (Kernel::Hdiff, CPU_HDIFF)]
                .into_iter()
                .map(|(kernel, cpu)| KernelCalibration {
                    kernel,
                    pe_rate: cpu.gflops,
                    power_base: cpu.power_w,
                    power_per_pe: 0.0,
                    max_pe: 1,
                    cpu: Some(cpu),
                })
                .collect(),
        },
    ]
}

pub fn preset(name: &str) -> Option<Preset> {
    builtin_presets().into_iter().find(|p| p.name == name)
}
