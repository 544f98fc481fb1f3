//! File formats, configuration and subcommands behind the `essop` binary.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod formats;

use std::io::Write;

use essop_core::oracle::SeedSchedule;

use args::{Cli, Command};
use commands::{MulArgs, OuterArgs, StatsArgs};
use error::CliResult;

pub fn run(cli: Cli, out: &mut dyn Write, diag: &mut dyn Write) -> CliResult<()> {
    match cli.command {
        Command::Lfsr { seed, count, taps } => commands::cmd_lfsr(seed, count, taps.as_deref(), out),
        Command::Encode { value, exponent, seed, seq_len } => commands::cmd_encode(value, exponent, seed, seq_len, out),
        Command::Mul(m) => commands::cmd_mul(
            &MulArgs {
                a: m.a,
                b: m.b,
                exp_a: m.exp_a,
                exp_b: m.exp_b,
                seq_len: m.seq_len,
                seed_a: m.seed_a,
                seed_b: m.seed_b,
                lr: m.lr,
            },
            out,
        ),
        Command::Outer(o) => commands::cmd_outer(
            &OuterArgs {
                x: o.x,
                delta: o.delta,
                seq_len: o.seq_len,
                seed_x: o.seed_x,
                seed_delta: o.seed_delta,
                lr: o.lr,
                out: o.out,
                format: o.format,
            },
            diag,
        ),
        Command::Stats(s) => {
            let schedule = match (s.seed_x, s.seed_delta) {
                (Some(seed_x), Some(seed_delta)) => SeedSchedule::Fixed { seed_x, seed_delta },
                _ => SeedSchedule::Derived { base: s.seed_base },
            };
            commands::cmd_stats(
                &StatsArgs { x: s.x, delta: s.delta, seq_len: s.seq_len, trials: s.trials, schedule, report: s.report },
                out,
            )
        }
        Command::Train { config, out_dir } => commands::cmd_train(&config, &out_dir, out).map(|_| ()),
    }
}
