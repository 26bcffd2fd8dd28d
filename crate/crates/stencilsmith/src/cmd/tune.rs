use std::fs::File;
use std::io::{BufWriter, Write};

use stencilsmith_core::autotune::{
    pick_operating_point, precision_demo_model, precision_demo_space, search, SearchMode,
    SearchSpace, TuneResult,
};
use stencilsmith_core::perfmodel::preset;
use stencilsmith_core::{Halo, Kernel};

use crate::cli::CliError;
use crate::config::RunConfig;
use crate::report::write_tuner_csv;

/// Largest space a heuristic search is cross-checked against exhaustively.
const CROSS_CHECK_LIMIT: usize = 4096;

pub fn space_and_model(
    cfg: &RunConfig,
    demo: bool,
) -> Result<(SearchSpace, stencilsmith_core::perfmodel::MachineModel), CliError> {
    if demo {
        let mut space = precision_demo_space(cfg.model_bytes());
        if cfg.budget.is_some() {
            space.footprint_budget = cfg.budget;
        }
        return Ok((space, cfg.apply_model_overrides(precision_demo_model())?));
    }
    let kernel = cfg.kernel.unwrap_or(Kernel::Hdiff);
    let p = preset(&cfg.preset).ok_or_else(|| CliError::UnknownPreset(cfg.preset.clone()))?;
    let model = p.model(kernel).ok_or_else(|| CliError::Uncalibrated {
        preset: p.name.into(),
        kernel: kernel.to_string(),
    })?;
    let model = cfg.apply_model_overrides(model)?;
    model.validate()?;
    let mut space =
        SearchSpace::new(kernel, cfg.dims, Halo::DYCORE, cfg.model_bytes()).with_budget(cfg.budget);
    space.n_pe = cfg.n_pe;
    Ok((space, model))
}

pub fn run(cfg: &RunConfig, demo: bool, out: &mut dyn Write) -> Result<(), CliError> {
    let (space, model) = space_and_model(cfg, demo)?;
    let result = search(&space, cfg.mode, &model)?;
    let pick = pick_operating_point(&result.front, space.footprint_budget.unwrap_or(u64::MAX))?;

    let mut notes = vec![
        format!(
            "evaluations={} front={}",
            result.evaluations,
            result.front.len()
        ),
        format!(
            "picked tile={} gflops_model={} footprint_bytes={}",
            pick.tile, pick.throughput, pick.footprint
        ),
    ];
    let mut failure = None;
    if cfg.mode != SearchMode::Exhaustive && space.len() <= CROSS_CHECK_LIMIT {
        let full = search(&space, SearchMode::Exhaustive, &model)?;
        let ok = weakly_dominated(&result, &full);
        notes.push(format!("dominated_by_exhaustive_front={ok}"));
        if !ok {
            failure = Some("a heuristic front point beats the exhaustive front".to_string());
        }
    }

    match &cfg.out {
        Some(path) => {
            write_tuner_csv(
                BufWriter::new(File::create(path)?),
                space.kernel,
                space.bytes_per_elem,
                &result,
            )?;
            for n in &notes {
                writeln!(out, "{n}")?;
            }
        }
        None => {
            write_tuner_csv(&mut *out, space.kernel, space.bytes_per_elem, &result)?;
            for n in &notes {
                eprintln!("{n}");
            }
        }
    }
    match failure {
        Some(msg) => Err(CliError::Failed(msg)),
        None => Ok(()),
    }
}

/// Every point of `heuristic`'s front is matched or dominated by `exhaustive`'s.
pub fn weakly_dominated(heuristic: &TuneResult, exhaustive: &TuneResult) -> bool {
    heuristic.front.iter().all(|p| {
        exhaustive
            .front
            .iter()
            .any(|f| f.dominates(p) || (f.throughput == p.throughput && f.footprint == p.footprint))
    })
}
