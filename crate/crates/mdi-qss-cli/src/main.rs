//! Command line harness: single runs, parameter sweeps, decomposition
//! printing, table verification, and detection-rate experiments, all emitted
//! as line-oriented records.

mod records;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};
use mdi_qss::adversary::{measure_detection_rate, AttackKind};
use mdi_qss::ghz::{
    decompose_in_ghz_basis, predict_collapse, table_rule_collapse, GhzLabel, ProductStateSpec,
};
use mdi_qss::protocol::{run_session, SessionConfig, Transcript};
use mdi_qss::quantum::{Eigenstate, AMP_TOL, XY_EIGENSTATES};
use mdi_qss::seed::derive_seed;
use rayon::prelude::*;
use records::{
    DecompositionLine, DetectionReport, Record, RunReport, SweepCell, TableCheck,
    TableCheckSummary,
};
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(
    name = "mdi-qss",
    version,
    about = "Simulator harness for a sender-controlled MDI quantum secret sharing protocol"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one session and emit a run_report record.
    Run(RunArgs),
    /// Run a session grid over attack, noise, and receiver-count axes.
    Sweep(SweepArgs),
    /// Print the entangled-basis decomposition of a product-state spec.
    Decompose(DecomposeArgs),
    /// Compare the collapse table rules against the projection oracle.
    CheckTables(CheckTablesArgs),
    /// Estimate attack detection rates over repeated sessions.
    Detect(DetectArgs),
}

/// Session parameters shared by the session-running subcommands. Flags
/// override values loaded from --config.
#[derive(Args, Clone)]
struct ConfigArgs {
    /// TOML file mirroring the session-config field names.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Master seed; every random stream derives from it.
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Attack model: none, intercept-resend, or teleport.
    #[arg(long, value_name = "KIND")]
    attack: Option<String>,
    /// Analyzer model: linear or ideal.
    #[arg(long, value_name = "KIND")]
    analyzer: Option<String>,
    /// Number of receivers.
    #[arg(long, value_name = "N")]
    receivers: Option<usize>,
    /// Number of photon pairs in the outgoing sequence.
    #[arg(long, value_name = "N")]
    k1: Option<usize>,
    /// Number of decoy photons in the outgoing sequence.
    #[arg(long, value_name = "N")]
    k2: Option<usize>,
    /// Depolarizing strength on the transit channel.
    #[arg(long, value_name = "FLOAT")]
    noise_p: Option<f64>,
    /// Dephasing strength on the transit channel.
    #[arg(long, value_name = "FLOAT")]
    noise_q: Option<f64>,
    /// Check error rate above which the session aborts.
    #[arg(long, value_name = "FLOAT")]
    threshold: Option<f64>,
    /// Message bits to encode, e.g. 10110.
    #[arg(long, value_name = "BITS")]
    message: Option<String>,
    /// Decode method: I (receiver measures) or II (sender publishes).
    #[arg(long, value_name = "METHOD")]
    decode_method: Option<String>,
    /// Cap on how many eligible rounds the security check consumes.
    #[arg(long, value_name = "N")]
    max_check_rounds: Option<usize>,
    /// Fraction of encoded positions reserved for integrity sampling.
    #[arg(long, value_name = "FLOAT")]
    sampling_fraction: Option<f64>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<SessionConfig> {
        let mut config: SessionConfig = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("cannot read {}", path.display()))?;
                toml::from_str(&text)
                    .with_context(|| format!("malformed config file {}", path.display()))?
            }
            None => SessionConfig::default(),
        };
        if let Some(seed) = self.seed {
            config.master_seed = seed;
        }
        if let Some(token) = &self.attack {
            config.attack = parse_token(token, "attack")?;
        }
        if let Some(token) = &self.analyzer {
            config.analyzer = parse_token(token, "analyzer")?;
        }
        if let Some(n) = self.receivers {
            config.n_receivers = n;
        }
        if let Some(k1) = self.k1 {
            config.k1 = k1;
        }
        if let Some(k2) = self.k2 {
            config.k2 = k2;
        }
        if self.noise_p.is_some() || self.noise_q.is_some() {
            let mut noise = config.noise.unwrap_or_default();
            if let Some(p) = self.noise_p {
                noise.depolarizing_p = p;
            }
            if let Some(q) = self.noise_q {
                noise.dephasing_q = q;
            }
            config.noise = Some(noise);
        }
        if let Some(threshold) = self.threshold {
            config.error_threshold = threshold;
        }
        if let Some(message) = &self.message {
            config.message = message.clone();
        }
        if let Some(token) = &self.decode_method {
            config.decode_method = parse_token(token, "decode method")?;
        }
        if let Some(cap) = self.max_check_rounds {
            config.max_check_rounds = Some(cap);
        }
        if let Some(fraction) = self.sampling_fraction {
            config.sampling_bit_fraction = fraction;
        }
        config.validate()?;
        Ok(config)
    }
}

/// Parses a flag value through the same tokens the record serializer uses.
fn parse_token<T: serde::de::DeserializeOwned>(token: &str, what: &str) -> Result<T> {
    serde_json::from_value(serde_json::Value::String(token.to_string()))
        .map_err(|_| anyhow!("unrecognized {what} `{token}`"))
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Write records here instead of standard output.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Also write the full session transcript as JSON.
    #[arg(long, value_name = "PATH")]
    transcript: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Comma-separated attack kinds forming one grid axis.
    #[arg(long, value_name = "LIST", value_delimiter = ',')]
    attack_grid: Vec<String>,
    /// Comma-separated depolarizing strengths forming one grid axis.
    #[arg(long, value_name = "LIST", value_delimiter = ',')]
    noise_grid: Vec<f64>,
    /// Comma-separated receiver counts forming one grid axis.
    #[arg(long, value_name = "LIST", value_delimiter = ',')]
    receivers_grid: Vec<usize>,
    /// Output format for the cell records.
    #[arg(long, value_enum, default_value_t = OutputFormat::Lines)]
    format: OutputFormat,
    /// Write records here instead of standard output.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum OutputFormat {
    Lines,
    Csv,
}

#[derive(Args)]
struct DecomposeArgs {
    /// Photon eigenstates, leftmost photon first, e.g. +x +y -x.
    #[arg(required = true, num_args = 2.., allow_hyphen_values = true, value_name = "STATE")]
    photons: Vec<String>,
    /// Write records here instead of standard output.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CheckTablesArgs {
    /// Write records here instead of standard output.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DetectArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Sessions to simulate for the estimate.
    #[arg(long, value_name = "N", default_value_t = 100)]
    trials: usize,
    /// Write records here instead of standard output.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

fn report_from(transcript: &Transcript) -> RunReport {
    let total = transcript.rounds.len();
    let analyzer_success_fraction = if total == 0 {
        0.0
    } else {
        transcript.analyzer_success_count() as f64 / total as f64
    };
    let message_bit_error_rate = transcript.decoded.as_ref().map(|decoded| {
        let sent = &transcript.config.message;
        let errors = sent
            .chars()
            .zip(decoded.message_bits().chars())
            .filter(|(a, b)| a != b)
            .count();
        errors as f64 / sent.len() as f64
    });
    RunReport {
        config: transcript.config.clone(),
        verdict: transcript.verdict(),
        check_error_rate: transcript.check.error_rate,
        analyzer_success_fraction,
        usable_round_count: transcript.usable_round_count(),
        message_bit_error_rate,
        integrity_ok: transcript.decoded.as_ref().map(|d| d.integrity_ok),
        wall_time: None,
    }
}

fn cmd_run(args: &RunArgs) -> Result<()> {
    let config = args.config.resolve()?;
    let started = Instant::now();
    let transcript = run_session(&config)?;
    let elapsed = started.elapsed().as_secs_f64();
    if let Some(path) = &args.transcript {
        fs::write(path, serde_json::to_string_pretty(&transcript)?)
            .with_context(|| format!("cannot write {}", path.display()))?;
    }
    records::emit_lines(&[Record::RunReport(report_from(&transcript))], args.out.as_deref())?;
    eprintln!("session finished in {elapsed:.3}s");
    Ok(())
}

fn cmd_sweep(args: &SweepArgs) -> Result<()> {
    let base = args.config.resolve()?;
    let attacks: Vec<AttackKind> = if args.attack_grid.is_empty() {
        vec![base.attack]
    } else {
        args.attack_grid
            .iter()
            .map(|token| parse_token(token, "attack"))
            .collect::<Result<_>>()?
    };
    let noise_levels: Vec<f64> = if args.noise_grid.is_empty() {
        vec![base.noise.map_or(0.0, |n| n.depolarizing_p)]
    } else {
        args.noise_grid.clone()
    };
    let receiver_counts: Vec<usize> = if args.receivers_grid.is_empty() {
        vec![base.n_receivers]
    } else {
        args.receivers_grid.clone()
    };

    // Cell order is the cartesian product with receivers innermost; each
    // cell reseeds independently so cells stay reproducible in isolation.
    let mut cells: Vec<(usize, SessionConfig, AttackKind, f64)> = Vec::new();
    for &attack in &attacks {
        for &noise_p in &noise_levels {
            for &n_receivers in &receiver_counts {
                let index = cells.len();
                let mut config = base.clone();
                config.attack = attack;
                config.n_receivers = n_receivers;
                let mut noise = base.noise.unwrap_or_default();
                noise.depolarizing_p = noise_p;
                config.noise = if noise.is_quiet() { None } else { Some(noise) };
                config.master_seed = derive_seed(base.master_seed, &format!("cell-{index}"));
                cells.push((index, config, attack, noise_p));
            }
        }
    }

    let started = Instant::now();
    let mut rows: Vec<SweepCell> = cells
        .par_iter()
        .map(|(index, config, attack, noise_p)| -> Result<SweepCell> {
            let transcript = run_session(config)
                .with_context(|| format!("sweep cell {index} failed"))?;
            let report = report_from(&transcript);
            Ok(SweepCell {
                cell: *index,
                attack: *attack,
                noise_p: *noise_p,
                n_receivers: config.n_receivers,
                seed: config.master_seed,
                verdict: report.verdict,
                check_error_rate: report.check_error_rate,
                analyzer_success_fraction: report.analyzer_success_fraction,
                usable_round_count: report.usable_round_count,
                message_bit_error_rate: report.message_bit_error_rate,
                integrity_ok: report.integrity_ok,
            })
        })
        .collect::<Result<_>>()?;
    rows.sort_by_key(|row| row.cell);
    let elapsed = started.elapsed().as_secs_f64();
    match args.format {
        OutputFormat::Lines => {
            let emitted: Vec<Record> = rows.into_iter().map(Record::SweepCell).collect();
            records::emit_lines(&emitted, args.out.as_deref())?;
        }
        OutputFormat::Csv => records::emit_csv(&rows, args.out.as_deref())?,
    }
    eprintln!("{} sweep cells finished in {elapsed:.3}s", cells.len());
    Ok(())
}

fn cmd_decompose(args: &DecomposeArgs) -> Result<()> {
    let photons: Vec<Eigenstate> = args
        .photons
        .iter()
        .map(|token| token.parse::<Eigenstate>().map_err(|e| anyhow!(e)))
        .collect::<Result<_>>()?;
    let echo: Vec<String> = photons.iter().map(|p| p.to_string()).collect();
    let spec = ProductStateSpec::new(photons)?;
    let decomposition = decompose_in_ghz_basis(&spec.state_vector())?;
    let emitted: Vec<Record> = decomposition
        .entries()
        .filter(|(_, amp)| amp.norm() > AMP_TOL)
        .map(|(label, amp)| {
            Record::Decomposition(DecompositionLine {
                photons: echo.clone(),
                label: label.to_string(),
                amplitude_re: amp.re,
                amplitude_im: amp.im,
                magnitude: amp.norm(),
                probability: amp.norm_sqr(),
            })
        })
        .collect();
    records::emit_lines(&emitted, args.out.as_deref())
}

fn cmd_check_tables(args: &CheckTablesArgs) -> Result<bool> {
    let mut emitted = Vec::new();
    let mut cases = 0;
    let mut agreements = 0;
    for label in GhzLabel::all(3)?.filter(GhzLabel::is_linear_optics_identifiable) {
        for first in XY_EIGENSTATES {
            for second in XY_EIGENSTATES {
                let receivers = [first, second];
                let rule = table_rule_collapse(label, &receivers)?;
                let oracle = predict_collapse(label, &receivers)?;
                let agree = rule == oracle;
                cases += 1;
                agreements += usize::from(agree);
                emitted.push(Record::TableCheck(TableCheck {
                    label: label.to_string(),
                    receivers: receivers.iter().map(|r| r.to_string()).collect(),
                    rule: rule.to_string(),
                    oracle: oracle.to_string(),
                    agree,
                }));
            }
        }
    }
    let all_agree = agreements == cases;
    emitted.push(Record::TableCheckSummary(TableCheckSummary {
        cases,
        agreements,
        all_agree,
    }));
    records::emit_lines(&emitted, args.out.as_deref())?;
    Ok(all_agree)
}

fn cmd_detect(args: &DetectArgs) -> Result<()> {
    let config = args.config.resolve()?;
    let started = Instant::now();
    let stats = measure_detection_rate(&config, config.attack, args.trials)?;
    let elapsed = started.elapsed().as_secs_f64();
    records::emit_lines(
        &[Record::Detection(DetectionReport {
            attack: config.attack,
            stats,
        })],
        args.out.as_deref(),
    )?;
    eprintln!("{} detection trials finished in {elapsed:.3}s", args.trials);
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            // Help and version land on stdout and are not failures.
            return if err.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = match &cli.command {
        Command::Run(args) => cmd_run(args).map(|()| ExitCode::SUCCESS),
        Command::Sweep(args) => cmd_sweep(args).map(|()| ExitCode::SUCCESS),
        Command::Decompose(args) => cmd_decompose(args).map(|()| ExitCode::SUCCESS),
        Command::CheckTables(args) => cmd_check_tables(args).map(|all_agree| {
            if all_agree {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }),
        Command::Detect(args) => cmd_detect(args).map(|()| ExitCode::SUCCESS),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
