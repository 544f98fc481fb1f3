//! Subcommand bodies. Each writes its primary output to `out` and audit
//! information to `diag`, so tests can run them in-process.

use std::io::Write;
use std::path::{Path, PathBuf};

use essop_core::encoder::vector_exponent;
use essop_core::lfsr::TAPS;
use essop_core::oracle::{analytic_moments, clt_halfwidth, empirical_stats, SeedSchedule};
use essop_core::train::{train, RunMetrics};
use essop_core::{encode, exponent_ceil, f_scale, f_scale_with_lr, outer_product, probability_of, unit_cell_multiply, Binary16Value, LfsrState, OuterProductJob};
use serde::Serialize;

use crate::config::load_config;
use crate::error::{CliError, CliResult};
use crate::formats::{format_value, read_vector, write_matrix, Format};

fn io(e: std::io::Error) -> CliError {
    CliError::Input(e.to_string())
}

pub fn cmd_lfsr(seed: u16, count: usize, taps: Option<&[u32]>, out: &mut dyn Write) -> CliResult<()> {
    if let Some(t) = taps {
        if t != TAPS {
            return Err(CliError::Input(format!("unsupported taps {t:?}; only {TAPS:?} is implemented")));
        }
    }
    let mut rng = LfsrState::seed(seed)?;
    for _ in 0..count {
        writeln!(out, "{:04X}", rng.next_word()).map_err(io)?;
    }
    Ok(())
}

/// Exponent for a lone operand: the given one, or the ceiling of its own
/// magnitude (0 for a zero operand).
fn operand_exponent(v: Binary16Value, given: Option<i32>) -> CliResult<i32> {
    match given {
        Some(e) => Ok(e),
        None if v.is_zero() => Ok(0),
        None => Ok(exponent_ceil(v.abs().to_f64())?),
    }
}

fn bit_string(seq: &essop_core::StochasticSequence) -> String {
    (0..seq.seq_len()).map(|k| if seq.bit(k) { '1' } else { '0' }).collect()
}

pub fn cmd_encode(value: Binary16Value, exponent: Option<i32>, seed: u16, seq_len: usize, out: &mut dyn Write) -> CliResult<()> {
    let e = operand_exponent(value, exponent)?;
    let mut rng = LfsrState::seed(seed)?;
    let seq = encode(value, e, &mut rng, seq_len)?;
    writeln!(out, "bits {}", bit_string(&seq)).map_err(io)?;
    writeln!(out, "sign {}", if seq.sign() == 1 { '-' } else { '+' }).map_err(io)?;
    writeln!(out, "exponent {e}").map_err(io)?;
    writeln!(out, "probability {}", probability_of(value, e)?).map_err(io)?;
    writeln!(out, "ones {}", seq.popcount()).map_err(io)?;
    Ok(())
}

pub struct MulArgs {
    pub a: Binary16Value,
    pub b: Binary16Value,
    pub exp_a: Option<i32>,
    pub exp_b: Option<i32>,
    pub seq_len: usize,
    pub seed_a: u16,
    pub seed_b: u16,
    pub lr: Option<f64>,
}

pub fn cmd_mul(args: &MulArgs, out: &mut dyn Write) -> CliResult<()> {
    let ea = operand_exponent(args.a, args.exp_a)?;
    let eb = operand_exponent(args.b, args.exp_b)?;
    let sa = encode(args.a, ea, &mut LfsrState::seed(args.seed_a)?, args.seq_len)?;
    let sb = encode(args.b, eb, &mut LfsrState::seed(args.seed_b)?, args.seq_len)?;
    let scale = match args.lr {
        Some(lr) => f_scale_with_lr(ea, eb, args.seq_len, lr)?,
        None => f_scale(ea, eb, args.seq_len)?,
    };
    let r = unit_cell_multiply(&sa, &sb, scale)?;
    writeln!(out, "count {}", r.count).map_err(io)?;
    writeln!(out, "value {}", format_value(r.value)).map_err(io)?;
    writeln!(out, "status {:?}", r.status).map_err(io)?;
    writeln!(out, "scale_exponent {}", scale.exponent).map_err(io)?;
    let exact = args.a.to_f64() * args.b.to_f64() * args.lr.unwrap_or(1.0);
    writeln!(out, "exact {exact}").map_err(io)?;
    Ok(())
}

pub struct OuterArgs {
    pub x: PathBuf,
    pub delta: PathBuf,
    pub seq_len: usize,
    pub seed_x: u16,
    pub seed_delta: u16,
    pub lr: Option<f64>,
    pub out: PathBuf,
    pub format: Format,
}

pub fn cmd_outer(args: &OuterArgs, diag: &mut dyn Write) -> CliResult<()> {
    let x = read_vector(&args.x)?;
    let delta = read_vector(&args.delta)?;
    let mut job = OuterProductJob::new(x, delta, args.seq_len, args.seed_x, args.seed_delta);
    job.lr = args.lr;
    let r = outer_product(&job)?;
    write_matrix(&args.out, &r.matrix, args.format)?;
    writeln!(diag, "rng_draws={}", r.rng_draws).map_err(io)?;
    match r.scale {
        Some(s) => writeln!(diag, "scale_exponent={}", s.exponent),
        None => writeln!(diag, "scale_exponent=none"),
    }
    .map_err(io)?;
    if r.saturated + r.underflowed > 0 {
        writeln!(diag, "saturated={} underflowed={}", r.saturated, r.underflowed).map_err(io)?;
    }
    Ok(())
}

pub struct StatsArgs {
    pub x: PathBuf,
    pub delta: PathBuf,
    pub seq_len: usize,
    pub trials: usize,
    pub schedule: SeedSchedule,
    pub report: PathBuf,
}

#[derive(Serialize)]
struct StatsEntry {
    row: usize,
    col: usize,
    x: f64,
    delta: f64,
    exact: f64,
    analytic_mean: f64,
    analytic_variance: f64,
    mean: f64,
    variance: f64,
    ci_halfwidth: f64,
    /// |mean - analytic_mean| within three analytic CLT half-widths.
    within_3ci: bool,
}

#[derive(Serialize)]
struct StatsDoc {
    seq_len: usize,
    trials: usize,
    schedule: String,
    exp_x: Option<i32>,
    exp_delta: Option<i32>,
    rows: usize,
    cols: usize,
    entries_within_3ci: usize,
    entries: Vec<StatsEntry>,
}

pub fn cmd_stats(args: &StatsArgs, out: &mut dyn Write) -> CliResult<()> {
    let x = read_vector(&args.x)?;
    let delta = read_vector(&args.delta)?;
    let (seed_x, seed_delta) = args.schedule.seeds(0);
    let job = OuterProductJob::new(x.clone(), delta.clone(), args.seq_len, seed_x, seed_delta);
    let report = empirical_stats(&job, args.trials, args.schedule)?;
    let ex = vector_exponent(&x)?;
    let ed = vector_exponent(&delta)?;
    let zero = ex.is_zero_vector || ed.is_zero_vector;

    let mut entries = Vec::with_capacity(report.entries.len());
    for (j, d) in delta.iter().enumerate() {
        for (i, v) in x.iter().enumerate() {
            let (xv, dv) = (v.to_f64(), d.to_f64());
            let (am, av) = if zero {
                (0.0, 0.0)
            } else {
                let m = analytic_moments(xv, dv, ex.exponent, ed.exponent, args.seq_len)?;
                (m.mean, m.variance)
            };
            let e = report.entry(j, i);
            entries.push(StatsEntry {
                row: j,
                col: i,
                x: xv,
                delta: dv,
                exact: xv * dv,
                analytic_mean: am,
                analytic_variance: av,
                mean: e.mean,
                variance: e.variance,
                ci_halfwidth: e.confidence_halfwidth,
                within_3ci: (e.mean - am).abs() <= 3.0 * clt_halfwidth(av, args.trials),
            });
        }
    }
    let within = entries.iter().filter(|e| e.within_3ci).count();
    let schedule = match args.schedule {
        SeedSchedule::Fixed { seed_x, seed_delta } => format!("fixed:{seed_x:04X},{seed_delta:04X}"),
        SeedSchedule::Derived { base } => format!("derived:{base:04X}"),
    };
    let doc = StatsDoc {
        seq_len: args.seq_len,
        trials: args.trials,
        schedule,
        exp_x: (!zero).then_some(ex.exponent),
        exp_delta: (!zero).then_some(ed.exponent),
        rows: report.rows,
        cols: report.cols,
        entries_within_3ci: within,
        entries,
    };
    let mut text = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Input(e.to_string()))?;
    text.push('\n');
    std::fs::write(&args.report, text).map_err(|e| CliError::Input(format!("{}: {e}", args.report.display())))?;
    writeln!(out, "entries {} within_3ci {}", doc.rows * doc.cols, within).map_err(io)?;
    Ok(())
}

pub const METRICS_CSV: &str = "metrics.csv";
pub const METRICS_JSONL: &str = "metrics.jsonl";

pub fn summary_line(m: &RunMetrics) -> String {
    format!(
        "mode={} epochs={} final_test_accuracy={:.4} diverged={}",
        m.mode,
        m.epochs.len(),
        m.final_test_accuracy,
        m.diverged
    )
}

pub fn write_metrics(dir: &Path, m: &RunMetrics) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Input(format!("{}: {e}", dir.display())))?;
    let mut csv = String::from("epoch,train_loss,train_accuracy,test_loss,test_accuracy\n");
    let mut jsonl = String::new();
    for e in &m.epochs {
        csv.push_str(&format!("{},{},{},{},{}\n", e.epoch, e.train_loss, e.train_accuracy, e.test_loss, e.test_accuracy));
        let mut rec = serde_json::to_value(e).expect("plain struct");
        rec["mode"] = m.mode.clone().into();
        jsonl.push_str(&rec.to_string());
        jsonl.push('\n');
    }
    let summary = serde_json::json!({
        "summary": true,
        "mode": m.mode,
        "epochs": m.epochs.len(),
        "final_test_accuracy": m.final_test_accuracy,
        "diverged": m.diverged,
    });
    jsonl.push_str(&summary.to_string());
    jsonl.push('\n');
    let w = |name: &str, body: &str| std::fs::write(dir.join(name), body).map_err(|e| CliError::Input(format!("{name}: {e}")));
    w(METRICS_CSV, &csv)?;
    w(METRICS_JSONL, &jsonl)
}

pub fn cmd_train(config: &Path, out_dir: &Path, out: &mut dyn Write) -> CliResult<RunMetrics> {
    let cfg = load_config(config)?;
    let metrics = train(&cfg)?;
    write_metrics(out_dir, &metrics)?;
    writeln!(out, "{}", summary_line(&metrics)).map_err(io)?;
    Ok(metrics)
}
