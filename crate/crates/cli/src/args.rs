use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use essop_core::Binary16Value;

use crate::formats::{parse_value, Format};

/// Hex word with optional `0x` prefix.
pub fn parse_hex_u16(s: &str) -> Result<u16, String> {
    let t = s.trim();
    let digits = t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")).unwrap_or(t);
    u16::from_str_radix(digits, 16).map_err(|_| format!("`{s}` is not a 16-bit hex value"))
}

fn parse_b16(s: &str) -> Result<Binary16Value, String> {
    parse_value(s).map_err(|e| e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "essop", version, about = "Stochastic-computing outer-product engine")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print LFSR words in hex, one per line.
    Lfsr {
        #[arg(long, value_parser = parse_hex_u16)]
        seed: u16,
        #[arg(long, default_value_t = 16)]
        count: usize,
        /// Feedback taps, comma separated; only 16,15,13,4 is available.
        #[arg(long, value_delimiter = ',')]
        taps: Option<Vec<u32>>,
    },
    /// Encode one value as a Bernoulli bitstream.
    Encode {
        #[arg(long, value_parser = parse_b16, allow_hyphen_values = true)]
        value: Binary16Value,
        /// Normalization exponent E; defaults to ceil(log2 |value|).
        #[arg(long, allow_hyphen_values = true)]
        exponent: Option<i32>,
        #[arg(long, value_parser = parse_hex_u16, default_value = "ACE1")]
        seed: u16,
        #[arg(long, default_value_t = 16)]
        seq_len: usize,
    },
    /// Multiply two values with one unit cell.
    Mul(MulCmd),
    /// Stochastic outer product of two vector files.
    Outer(OuterCmd),
    /// Monte-Carlo statistics of the outer product against the closed form.
    Stats(StatsCmd),
    /// Train a small MLP and write per-epoch metrics.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct MulCmd {
    #[arg(long, value_parser = parse_b16, allow_hyphen_values = true)]
    pub a: Binary16Value,
    #[arg(long, value_parser = parse_b16, allow_hyphen_values = true)]
    pub b: Binary16Value,
    #[arg(long, allow_hyphen_values = true)]
    pub exp_a: Option<i32>,
    #[arg(long, allow_hyphen_values = true)]
    pub exp_b: Option<i32>,
    #[arg(long, default_value_t = 16)]
    pub seq_len: usize,
    #[arg(long, value_parser = parse_hex_u16, default_value = "ACE1")]
    pub seed_a: u16,
    #[arg(long, value_parser = parse_hex_u16, default_value = "1234")]
    pub seed_b: u16,
    #[arg(long)]
    pub lr: Option<f64>,
}

#[derive(Debug, Args)]
pub struct OuterCmd {
    #[arg(long)]
    pub x: PathBuf,
    #[arg(long)]
    pub delta: PathBuf,
    #[arg(long)]
    pub seq_len: usize,
    #[arg(long, value_parser = parse_hex_u16)]
    pub seed_x: u16,
    #[arg(long, value_parser = parse_hex_u16)]
    pub seed_delta: u16,
    /// Fold this learning rate into the shift scale.
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value = "bin")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct StatsCmd {
    #[arg(long)]
    pub x: PathBuf,
    #[arg(long)]
    pub delta: PathBuf,
    #[arg(long)]
    pub seq_len: usize,
    #[arg(long)]
    pub trials: usize,
    /// Base for per-trial seed pairs.
    #[arg(long, value_parser = parse_hex_u16, default_value = "ACE1", conflicts_with_all = ["seed_x", "seed_delta"])]
    pub seed_base: u16,
    /// Reuse one fixed pair in every trial (requires --seed-delta).
    #[arg(long, value_parser = parse_hex_u16, requires = "seed_delta")]
    pub seed_x: Option<u16>,
    #[arg(long, value_parser = parse_hex_u16, requires = "seed_x")]
    pub seed_delta: Option<u16>,
    #[arg(long)]
    pub report: PathBuf,
}
