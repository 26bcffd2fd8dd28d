use std::fs::{self, File};
use std::io::{BufWriter, Write};

use stencilsmith_core::perfmodel::{energy_report, preset, scaling_curve, ScalingPoint, Workload};
use stencilsmith_core::Kernel;

use super::plan_for;
use crate::cli::CliError;
use crate::config::RunConfig;
use crate::report::{energy_record, scaling_record, writer, ENERGY_HEADER, SCALING_HEADER};

pub struct Curve {
    pub kernel: Kernel,
    pub model: stencilsmith_core::perfmodel::MachineModel,
    pub points: Vec<ScalingPoint>,
}

/// Scaling curves for the configured preset, one per kernel.
pub fn curves(cfg: &RunConfig) -> Result<(String, Vec<Curve>), CliError> {
    let p = preset(&cfg.preset).ok_or_else(|| CliError::UnknownPreset(cfg.preset.clone()))?;
    let kernels: Vec<Kernel> = match cfg.kernel {
        Some(k) => vec![k],
        None => p.kernels.iter().map(|c| c.kernel).collect(),
    };
    let mut out = Vec::new();
    for kernel in kernels {
        let uncalibrated = || CliError::Uncalibrated {
            preset: p.name.into(),
            kernel: kernel.to_string(),
        };
        let model = cfg.apply_model_overrides(p.model(kernel).ok_or_else(uncalibrated)?)?;
        model.validate()?;
        let plan = plan_for(cfg, kernel)?;
        let mut work = Workload::from_plan(&plan, cfg.model_bytes());
        if kernel == Kernel::Copy {
            work = work.with_flops(plan.interior_volume() as u64);
        }
        let max_pe = cfg.pe_max.or(p.max_pe(kernel)).unwrap_or(1);
        let points = scaling_curve(&work, &model, 1..=max_pe)?;
        out.push(Curve {
            kernel,
            model,
            points,
        });
    }
    Ok((p.name.to_string(), out))
}

pub fn write_scaling(w: impl Write, preset: &str, curves: &[Curve]) -> Result<(), CliError> {
    let mut csv = writer(w);
    csv.write_record(SCALING_HEADER)?;
    for c in curves {
        for p in &c.points {
            csv.write_record(scaling_record(c.kernel, preset, p))?;
        }
    }
    csv.flush()?;
    Ok(())
}

pub fn write_energy(w: impl Write, preset: &str, curves: &[Curve]) -> Result<(), CliError> {
    let mut csv = writer(w);
    csv.write_record(ENERGY_HEADER)?;
    for c in curves {
        for p in &c.points {
            if let Ok(sim) = &p.result {
                csv.write_record(energy_record(
                    c.kernel,
                    preset,
                    p.n_pe,
                    &energy_report(&c.model, p.n_pe, sim),
                ))?;
            }
        }
    }
    csv.flush()?;
    Ok(())
}

fn summary(w: &mut dyn Write, curves: &[Curve]) -> std::io::Result<()> {
    for c in curves {
        let best = c
            .points
            .iter()
            .filter_map(|p| p.result.ok())
            .max_by(|a, b| a.gflops.total_cmp(&b.gflops));
        let Some(best) = best else {
            writeln!(w, "{}: no feasible PE count", c.kernel)?;
            continue;
        };
        write!(
            w,
            "{}: peak {:.1} GFLOP/s at {} PEs, {:.2} GFLOPS/W",
            c.kernel, best.gflops, best.n_pe, best.gflops_per_watt
        )?;
        if let (Some(cpu), Some(speedup)) = (c.model.cpu, best.speedup_vs_cpu) {
            write!(
                w,
                "; CPU {} GFLOP/s at {} W; GFLOP/s ratio {speedup:.2}",
                cpu.gflops, cpu.power_w
            )?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Writes `scaling.csv` and `energy.csv` into the `out` directory, or both
/// tables to `out` separated by a blank line.
pub fn run(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let (name, curves) = curves(cfg)?;
    match &cfg.out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            write_scaling(
                BufWriter::new(File::create(dir.join("scaling.csv"))?),
                &name,
                &curves,
            )?;
            write_energy(
                BufWriter::new(File::create(dir.join("energy.csv"))?),
                &name,
                &curves,
            )?;
            summary(out, &curves)?;
        }
        None => {
            write_scaling(&mut *out, &name, &curves)?;
            writeln!(out)?;
            write_energy(&mut *out, &name, &curves)?;
            summary(&mut std::io::stderr(), &curves)?;
        }
    }
    Ok(())
}
