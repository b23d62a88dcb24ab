//! CSV output. All floats are written with 17 significant digits so files
//! round-trip to the exact same f64 values and repeated seeded runs are
//! byte-identical.

use std::fs::File;
use std::io::{BufWriter, Result, Write};
use std::path::Path;

use crate::agent::RunMetrics;

use super::probe::ProbeMetrics;
use super::ArmAggregate;

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

/// Per-arm aggregate series: `episode,mean_cum_success,std_cum_success,mean_lambda`.
pub fn write_experiment_csv(path: &Path, agg: &ArmAggregate) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "episode,mean_cum_success,std_cum_success,mean_lambda")?;
    for e in 0..agg.mean_cum.len() {
        writeln!(
            w,
            "{},{},{},{}",
            e,
            fmt(agg.mean_cum[e]),
            fmt(agg.std_cum[e]),
            fmt(agg.mean_lambda[e])
        )?;
    }
    w.flush()
}

/// One run's raw series: `episode,success,cum_success,lambda,mean_loss`.
pub fn write_run_csv(path: &Path, run: &RunMetrics<f64>) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "episode,success,cum_success,lambda,mean_loss")?;
    for e in 0..run.success.len() {
        writeln!(
            w,
            "{},{},{},{},{}",
            e,
            run.success[e] as u8,
            run.cumulative[e],
            fmt(run.lambda[e]),
            fmt(run.mean_loss[e])
        )?;
    }
    w.flush()
}

/// Probe series, one row per (episode, sampler):
/// `episode,sampler,mean_prop,min_prop,max_prop`.
pub fn write_probe_csv(path: &Path, metrics: &ProbeMetrics) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "episode,sampler,mean_prop,min_prop,max_prop")?;
    for e in 0..metrics.oymb.len() {
        for (name, series) in [("oymb", &metrics.oymb), ("uniform", &metrics.uniform)] {
            let p = &series[e];
            writeln!(w, "{},{},{},{},{}", e, name, fmt(p.mean), fmt(p.min), fmt(p.max))?;
        }
    }
    w.flush()
}
