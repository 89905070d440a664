use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

/// Bell nonlocality experiments and analyses. JSON goes to stdout, logs to
/// stderr. Exit codes: 0 ok, 2 validation error, 3 numerical failure,
/// 4 desk-scale exceeded.
#[derive(Debug, Parser)]
#[command(name = "bell-lab", version)]
pub struct Cli {
    /// Print compact rather than indented JSON.
    #[arg(long, global = true)]
    pub compact: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a CHSH experiment and estimate S with its confidence interval.
    Chsh(ChshArgs),
    /// Maximum of a Bell functional over deterministic strategies.
    Localbound(LocalBoundArgs),
    /// Decide whether a behavior has a local hidden-variable model.
    Membership(MembershipArgs),
    /// GHZ experiment under a finite-speed hidden-communication model.
    GhzSignal(GhzArgs),
    /// Lower bound on a hidden-influence speed from an Earth-rotation frame scan.
    SpeedScan(ScanArgs),
    /// Local model that fakes a PR box through post-selection on detections.
    Detection(DetectionArgs),
    /// Whether delaying outcome registration lets light-speed influences explain the data.
    DelayedOutcome(DelayedArgs),
    /// Print one of the shipped JSON schemas.
    Schema(SchemaArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SourceKind {
    /// PR box.
    Pr,
    /// Maximally entangled qubits, angles from --angles.
    Quantum,
    /// Uniform mixture of the eight CHSH-optimal deterministic strategies.
    Local,
    /// Behavior table from --behavior.
    File,
}

#[derive(Debug, clap::Args)]
pub struct ChshArgs {
    #[arg(long, value_enum)]
    pub source: SourceKind,
    /// Number of rounds (at least 1).
    #[arg(long, default_value_t = 100_000)]
    pub rounds: u64,
    /// Master seed.
    #[arg(long, env = "BELL_LAB_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Measurement angles in radians: A0,A1,B0,B1.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, default_values_t = [0.0, std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_4, -std::f64::consts::FRAC_PI_4])]
    pub angles: Vec<f64>,
    /// Behavior JSON for --source file.
    #[arg(long)]
    pub behavior: Option<PathBuf>,
    /// Party events JSON (list of {input, outcome}) for the locality audit.
    #[arg(long)]
    pub geometry: Option<PathBuf>,
    /// Treat ⊥ outcomes as independent of the hidden state.
    #[arg(long)]
    pub fair_sampling: bool,
    /// Write the tally CSV here and reference it from the report.
    #[arg(long)]
    pub tallies: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
pub struct LocalBoundArgs {
    /// parties,inputs,outputs (same for every party).
    #[arg(long, default_value = "2,2,2")]
    pub scenario: String,
    /// "chsh" (CHSH-S, lifted to larger scenarios), "zero", or a functional JSON file.
    #[arg(long, default_value = "chsh")]
    pub functional: String,
    /// Maximum number of deterministic strategies to enumerate.
    #[arg(long, default_value_t = 1_000_000)]
    pub cap: u128,
}

#[derive(Debug, clap::Args)]
pub struct MembershipArgs {
    /// Behavior JSON.
    #[arg(long)]
    pub behavior: PathBuf,
    /// Round-trip tolerance for local models.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// Maximum number of deterministic strategies to enumerate.
    #[arg(long, default_value_t = 1_000_000)]
    pub cap: u128,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AliceMode {
    On,
    Off,
    /// Both arms with equal priors, plus the signaling information.
    Both,
}

#[derive(Debug, clap::Args)]
pub struct GhzArgs {
    #[arg(long, value_enum, default_value = "both")]
    pub alice: AliceMode,
    /// Hidden-influence speed in units of c.
    #[arg(long, default_value_t = 1e4)]
    pub v: f64,
    #[arg(long, default_value_t = 100_000)]
    pub rounds: u64,
    #[arg(long, env = "BELL_LAB_SEED", default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, clap::Args)]
pub struct ScanArgs {
    /// Geometry JSON: {"sites": [..2], "omega_rad_s", "session_s", "azimuth_step_deg", "betas", "time_samples"}.
    #[arg(long, conflicts_with = "preset")]
    pub geometry: Option<PathBuf>,
    /// Named preset: geneva-18km-6ns or geneva-18km-0.6ns.
    #[arg(long)]
    pub preset: Option<String>,
    /// Synchronisation uncertainty in nanoseconds (defaults to the preset's).
    #[arg(long, allow_negative_numbers = true)]
    pub sync_ns: Option<f64>,
    /// Emit CSV instead of JSON.
    #[arg(long)]
    pub csv: bool,
}

#[derive(Debug, clap::Args)]
pub struct DetectionArgs {
    #[arg(long, default_value_t = 1_000_000)]
    pub rounds: u64,
    #[arg(long, env = "BELL_LAB_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Include per-party detection efficiencies.
    #[arg(long)]
    pub efficiency: bool,
}

#[derive(Debug, clap::Args)]
pub struct DelayedArgs {
    /// Party events JSON (list of {input, outcome}); overrides --distance-m.
    #[arg(long)]
    pub events: Option<PathBuf>,
    /// Separation of two simultaneous parties, in metres.
    #[arg(long, default_value_t = 18e3)]
    pub distance_m: f64,
    /// Outcome delay in microseconds.
    #[arg(long, default_value_t = 100.0)]
    pub delay_us: f64,
}

#[derive(Debug, clap::Args)]
pub struct SchemaArgs {
    /// Schema name; omit to list them.
    pub name: Option<String>,
}
