//! `mwrc`: capacity regions and coding-scheme simulation for restricted
//! multi-way relay channels with deterministic uplinks.
//!
//! Exit codes: 0 valid / In, 1 Out, 2 Boundary, 64 usage, 65 bad channel
//! file or data, 74 I/O. Log verbosity is read from `MWRC_LOG`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use mwrc::channel::ChannelSpec;
use mwrc::document::{
    curve_csv, cut_id, format_sig, region_csv, ChannelFile, CommandEcho, ResultDocument,
};
use mwrc::region::{
    quarter_circle_directions, HullConfig, InputDistribution, MembershipVerdict, Region,
    RegionConfig, Status, DOWNLINK_BUDGET, DOWNLINK_TOLERANCE,
};
use mwrc::sim::{
    run_experiment, SimConfig, TypicalityKind, DEFAULT_EPSILON, DEFAULT_SEED, DEFAULT_TRIALS,
};
use serde::Serialize;

const EXIT_OUT: u8 = 1;
const EXIT_BOUNDARY: u8 = 2;
const EXIT_USAGE: u8 = 64;
const EXIT_DATA: u8 = 65;
const EXIT_IO: u8 = 74;

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] mwrc::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Core(mwrc::Error::Usage(_) | mwrc::Error::Capacity { .. }) => EXIT_USAGE,
            CliError::Core(mwrc::Error::Parse(_) | mwrc::Error::Validation(_)) => EXIT_DATA,
            CliError::Io { .. } => EXIT_IO,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(
    name = "mwrc",
    version,
    about = "Capacity regions of multi-way relay channels with deterministic uplinks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate a channel file and report whether the special case applies.
    Check {
        channel: PathBuf,
        /// Write the result document (JSON) here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide whether a rate tuple lies in the capacity region.
    Member {
        channel: PathBuf,
        /// Comma-separated rates in bits per channel use, one per user.
        #[arg(
            long,
            value_delimiter = ',',
            required = true,
            allow_negative_numbers = true
        )]
        rates: Vec<f64>,
        #[command(flatten)]
        region: RegionArgs,
        /// Write the result document (JSON) here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Trace the region boundary along a set of directions (CSV).
    Region {
        channel: PathBuf,
        /// A direction count (two users only, spread over the quarter circle)
        /// or explicit directions such as `1,0;1,1;0,1`.
        #[arg(long, default_value = "9")]
        directions: String,
        #[command(flatten)]
        region: RegionArgs,
        /// Write the CSV here (plus `<out>.json`); stdout otherwise.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate the relaying scheme and report error rates per block length (CSV).
    Simulate {
        channel: PathBuf,
        /// Comma-separated rates, one per user.
        #[arg(long, value_delimiter = ',', required = true)]
        rates: Vec<f64>,
        /// Comma-separated block lengths.
        #[arg(long = "n", value_delimiter = ',', default_value = "8,16,32")]
        block_lengths: Vec<usize>,
        #[arg(long, default_value_t = DEFAULT_TRIALS)]
        trials: usize,
        #[arg(long, default_value_t = DEFAULT_EPSILON)]
        epsilon: f64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Typicality::Weak)]
        typicality: Typicality,
        /// Number of blocks B; the effective rate is (B-1)/B of the nominal one.
        #[arg(long, default_value_t = 2)]
        blocks: usize,
        /// Simulate all B-1 block pairs instead of one.
        #[arg(long)]
        chain_blocks: bool,
        /// Redraw duplicate codewords within each codebook.
        #[arg(long)]
        distinct: bool,
        /// Draw one codebook for the whole run instead of one per trial.
        #[arg(long)]
        share_codebook: bool,
        /// Write the CSV here (plus `<out>.json`); stdout otherwise.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct RegionArgs {
    /// Slack within which a rate tuple counts as on the boundary.
    #[arg(long, default_value_t = DOWNLINK_TOLERANCE)]
    tolerance: f64,
    /// Seed of the randomized uplink hull search.
    #[arg(long, default_value_t = HullConfig::default().seed)]
    seed: u64,
    /// Product distributions evaluated while building the uplink hull.
    #[arg(long, default_value_t = HullConfig::default().budget)]
    budget: usize,
}

impl RegionArgs {
    fn config(&self) -> RegionConfig {
        RegionConfig {
            tolerance: self.tolerance,
            hull: HullConfig {
                budget: self.budget,
                seed: self.seed,
                ..HullConfig::default()
            },
            downlink_budget: DOWNLINK_BUDGET,
        }
    }

    fn echo(&self, args: &mut BTreeMap<String, String>) {
        args.insert("tolerance".into(), self.tolerance.to_string());
        args.insert("seed".into(), self.seed.to_string());
        args.insert("budget".into(), self.budget.to_string());
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Typicality {
    Weak,
    Robust,
}

impl From<Typicality> for TypicalityKind {
    fn from(t: Typicality) -> Self {
        match t {
            Typicality::Weak => TypicalityKind::Weak,
            Typicality::Robust => TypicalityKind::Robust,
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("MWRC_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(command: Command) -> CliResult<u8> {
    match command {
        Command::Check { channel, out } => check(&channel, out.as_deref()),
        Command::Member {
            channel,
            rates,
            region,
            out,
        } => member(&channel, &rates, &region, out.as_deref()),
        Command::Region {
            channel,
            directions,
            region,
            out,
        } => trace(&channel, &directions, &region, out.as_deref()),
        Command::Simulate {
            channel,
            rates,
            block_lengths,
            trials,
            epsilon,
            seed,
            typicality,
            blocks,
            chain_blocks,
            distinct,
            share_codebook,
            out,
        } => {
            let spec = load(&channel)?;
            let dist = InputDistribution::uniform(&spec);
            let mut config = SimConfig::new(spec, dist, rates, 1);
            config.trials = trials;
            config.epsilon = epsilon;
            config.seed = seed;
            config.typicality = typicality.into();
            config.blocks = blocks;
            config.chain_blocks = chain_blocks;
            config.distinct_codewords = distinct;
            config.share_codebook = share_codebook;
            simulate(&config, &block_lengths, typicality, out.as_deref())
        }
    }
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn load(path: &Path) -> CliResult<ChannelSpec> {
    let text = read(path)?;
    let spec = ChannelFile::parse(&text).and_then(|f| f.to_spec())?;
    info!("loaded {} ({} users)", path.display(), spec.num_users());
    Ok(spec)
}

fn echo(name: &str, args: BTreeMap<String, String>) -> CommandEcho {
    CommandEcho {
        name: name.into(),
        args,
    }
}

fn join(values: &[f64]) -> String {
    values
        .iter()
        .map(|&v| format_sig(v))
        .collect::<Vec<_>>()
        .join(",")
}

fn check(path: &Path, out: Option<&Path>) -> CliResult<u8> {
    let file = ChannelFile::parse(&read(path)?)?;
    let report = file.validate();
    if !report.is_valid() {
        for issue in &report.issues {
            eprintln!("invalid: {issue}");
        }
        return Err(mwrc::Error::Validation(format!(
            "{} issue(s) in {}",
            report.issues.len(),
            path.display()
        ))
        .into());
    }
    let spec = file.to_spec()?;
    let special = spec.check_special_case();
    println!("valid: true");
    println!("users: {}", spec.num_users());
    println!("special_case: {}", special.applies());
    println!("alphabet_condition: {}", special.alphabet_condition);
    println!("injective_uplink: {}", special.injective_uplink);
    for w in &special.witness {
        println!("violation: {w}");
    }
    if let Some(out) = out {
        #[derive(Serialize)]
        struct Payload<'a> {
            valid: bool,
            special_case: &'a mwrc::channel::SpecialCaseReport,
        }
        let doc = ResultDocument::new(
            echo("check", BTreeMap::new()),
            &spec,
            None,
            Payload {
                valid: true,
                special_case: &special,
            },
        );
        write(out, &doc.to_json())?;
    }
    Ok(0)
}

fn member(path: &Path, rates: &[f64], args: &RegionArgs, out: Option<&Path>) -> CliResult<u8> {
    let spec = load(path)?;
    if rates.len() != spec.num_users() {
        return Err(CliError::Usage(format!(
            "--rates has {} entries, the channel has {} users",
            rates.len(),
            spec.num_users()
        )));
    }
    let region = Region::new(&spec, args.config())?;
    let verdict = region.membership(rates)?;
    print_verdict(&verdict);
    if let Some(out) = out {
        let mut a = BTreeMap::new();
        a.insert("rates".into(), join(rates));
        args.echo(&mut a);
        write(
            out,
            &ResultDocument::new(echo("member", a), &spec, Some(args.seed), &verdict).to_json(),
        )?;
    }
    Ok(match verdict.status {
        Status::In => 0,
        Status::Out => EXIT_OUT,
        Status::Boundary => EXIT_BOUNDARY,
    })
}

fn print_verdict(v: &MembershipVerdict) {
    let status = match v.status {
        Status::In => "In",
        Status::Out => "Out",
        Status::Boundary => "Boundary",
    };
    println!("status: {status}");
    println!("rates: {}", join(&v.rates));
    println!("min_slack: {}", format_sig(v.min_slack));
    println!("binding: {} ({})", v.binding.cut, cut_id(&v.binding.cut));
    if let Some(cut) = &v.violated_cut {
        println!(
            "violated: {} ({}) by {}",
            cut.cut,
            cut_id(&cut.cut),
            format_sig(-cut.slack)
        );
    }
    if let Some(w) = &v.witness {
        println!("witness.q_weights: {}", join(&w.q_weights));
        for (q, laws) in w.user_conditionals.iter().enumerate() {
            for (i, law) in laws.iter().enumerate() {
                println!("witness.p(x_{}|q={q}): {}", i + 1, join(law));
            }
        }
        println!("witness.p(x_0): {}", join(&w.relay_input));
    }
}

fn parse_directions(text: &str, users: usize) -> CliResult<Vec<Vec<f64>>> {
    if let Ok(k) = text.trim().parse::<usize>() {
        if users != 2 {
            return Err(CliError::Usage(format!(
                "a direction count needs two users; give explicit directions for {users} users"
            )));
        }
        if k == 0 {
            return Err(CliError::Usage("direction count must be positive".into()));
        }
        return Ok(quarter_circle_directions(k));
    }
    text.split(';')
        .map(|d| {
            let v = d
                .split(',')
                .map(|x| {
                    x.trim()
                        .parse::<f64>()
                        .map_err(|e| CliError::Usage(format!("direction '{d}': {e}")))
                })
                .collect::<CliResult<Vec<f64>>>()?;
            if v.len() != users {
                return Err(CliError::Usage(format!(
                    "direction '{d}' has {} entries, expected {users}",
                    v.len()
                )));
            }
            Ok(v)
        })
        .collect()
}

fn trace(path: &Path, directions: &str, args: &RegionArgs, out: Option<&Path>) -> CliResult<u8> {
    let spec = load(path)?;
    let dirs = parse_directions(directions, spec.num_users())?;
    let region = Region::new(&spec, args.config())?;
    let points = dirs
        .iter()
        .map(|d| {
            info!("tracing direction {}", join(d));
            region.boundary_trace(d)
        })
        .collect::<mwrc::Result<Vec<_>>>()?;
    let csv = region_csv(spec.num_users(), &points);
    match out {
        Some(out) => {
            write(out, &csv)?;
            let mut a = BTreeMap::new();
            a.insert("directions".into(), directions.to_string());
            args.echo(&mut a);
            let doc = ResultDocument::new(echo("region", a), &spec, Some(args.seed), &points);
            write(&sidecar(out), &doc.to_json())?;
        }
        None => print!("{csv}"),
    }
    Ok(0)
}

fn sidecar(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_os_string();
    name.push(".json");
    PathBuf::from(name)
}

fn simulate(
    config: &SimConfig,
    block_lengths: &[usize],
    typicality: Typicality,
    out: Option<&Path>,
) -> CliResult<u8> {
    info!(
        "simulating n = {block_lengths:?} with {} trials each",
        config.trials
    );
    let rows = run_experiment(config, block_lengths)?;
    let csv = curve_csv(config.spec.num_users(), &rows);
    match out {
        Some(out) => {
            write(out, &csv)?;
            let mut a = BTreeMap::new();
            a.insert("rates".into(), join(&config.rates));
            a.insert(
                "n".into(),
                block_lengths
                    .iter()
                    .map(ToString::to_string)
                    .collect::<Vec<_>>()
                    .join(","),
            );
            a.insert("trials".into(), config.trials.to_string());
            a.insert("epsilon".into(), config.epsilon.to_string());
            a.insert(
                "typicality".into(),
                format!("{typicality:?}").to_lowercase(),
            );
            a.insert("blocks".into(), config.blocks.to_string());
            a.insert("chain_blocks".into(), config.chain_blocks.to_string());
            a.insert("distinct".into(), config.distinct_codewords.to_string());
            a.insert("share_codebook".into(), config.share_codebook.to_string());
            let doc =
                ResultDocument::new(echo("simulate", a), &config.spec, Some(config.seed), &rows);
            write(&sidecar(out), &doc.to_json())?;
        }
        None => print!("{csv}"),
    }
    Ok(0)
}
