use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use levyglass::experiments::{ExperimentConfig, ModelKind};

pub const THREADS_ENV: &str = "LEVYGLASS_THREADS";

#[derive(Debug, Parser)]
#[command(name = "levyglass", version, about = "Heavy-tailed mean-field spin glass experiments")]
#[command(arg_required_else_help = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Quenched free energy of one model at --n.
    FreeEnergy {
        /// full, truncated, fixed-edge or multi-edge.
        #[arg(long, default_value = "full", value_parser = ModelKind::from_str)]
        model: ModelKind,
        #[command(flatten)]
        common: Common,
    },
    /// Free energies of the four models over --n-grid with paired differences.
    Reduce(Common),
    /// Superadditivity of the multi-edge model under a block split at --n1.
    Superadd(Common),
    /// Interpolation sweep over --r-grid and the one-step certificate.
    Interp(Common),
    /// Variance of log Z over --n-grid against N^(3 - alpha + delta).
    Concentrate(Common),
    /// Per-coupling deviation bound and p-th moment profile over --n-grid.
    Martingale(Common),
    /// Loop and multi-edge counts plus the distinct-edge growth process.
    Multiedge(Common),
    /// Concentration of the number of large couplings at --n.
    Chernoff(Common),
    /// Jensen sandwich for the truncation and block splits at --n.
    Jensen(Common),
    /// Free energy over --n-grid against the analytic upper bound.
    Bounded(Common),
    /// Exact log Z of a serialized instance.
    Exact {
        /// Instance file.
        #[arg(long)]
        instance: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::FreeEnergy { .. } => "free-energy",
            Command::Reduce(_) => "reduce",
            Command::Superadd(_) => "superadd",
            Command::Interp(_) => "interp",
            Command::Concentrate(_) => "concentrate",
            Command::Martingale(_) => "martingale",
            Command::Multiedge(_) => "multiedge",
            Command::Chernoff(_) => "chernoff",
            Command::Jensen(_) => "jensen",
            Command::Bounded(_) => "bounded",
            Command::Exact { .. } => "exact",
        }
    }

    pub fn common(&self) -> &Common {
        match self {
            Command::FreeEnergy { common, .. } | Command::Exact { common, .. } => common,
            Command::Reduce(c)
            | Command::Superadd(c)
            | Command::Interp(c)
            | Command::Concentrate(c)
            | Command::Martingale(c)
            | Command::Multiedge(c)
            | Command::Chernoff(c)
            | Command::Jensen(c)
            | Command::Bounded(c) => c,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        <Format as ValueEnum>::from_str(s, true)
    }
}

/// Flags shared by every subcommand. Unset flags fall back to the --config
/// file and then to the listed defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// Tail exponent in (1, 2) [default: 1.5]
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Tail constant in (0, 1] [default: 1]
    #[arg(long)]
    pub c0: Option<f64>,
    /// Truncation exponent [default: 0.1]
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Inverse temperature [default: 1]
    #[arg(long)]
    pub beta: Option<f64>,
    /// Slack exponent of the variance comparator [default: 0.2]
    #[arg(long)]
    pub delta: Option<f64>,
    /// System size [default: 10]
    #[arg(long)]
    pub n: Option<usize>,
    /// Comma-separated system sizes [default: 8,12,16]
    #[arg(long, value_delimiter = ',')]
    pub n_grid: Option<Vec<usize>>,
    /// Block size of the split [default: n/2]
    #[arg(long)]
    pub n1: Option<usize>,
    /// Disorder replicas [default: 200]
    #[arg(long)]
    pub samples: Option<usize>,
    /// Base seed [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads, 0 for all cores [default: $LEVYGLASS_THREADS or 0]
    #[arg(long)]
    pub threads: Option<usize>,
    /// Output format [default: csv]
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output file [default: stdout]
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// key=value file supplying any of the other flags
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Moment exponent in (1, alpha) [default: (1 + alpha)/2]
    #[arg(long)]
    pub burkholder_p: Option<f64>,
    /// Comma-separated interpolation steps [default: 0,S/2,S]
    #[arg(long, value_delimiter = ',')]
    pub r_grid: Option<Vec<usize>>,
    /// Comma-separated certificate weights [default: 0.1,0.5,1,2]
    #[arg(long, value_delimiter = ',')]
    pub x_grid: Option<Vec<f64>>,
}

/// Fully resolved invocation settings.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub config: ExperimentConfig,
    pub threads: usize,
    pub format: Format,
    pub out: Option<PathBuf>,
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T, String> {
    value.trim().parse().map_err(|_| format!("invalid value '{value}' for {key}"))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>, String> {
    value.split(',').map(|v| parse_value(key, v)).collect()
}

const CONFIG_KEYS: [&str; 16] = [
    "alpha", "c0", "epsilon", "beta", "delta", "n", "n-grid", "n1", "samples", "seed", "threads", "format", "out",
    "burkholder-p", "r-grid", "x-grid",
];

/// Parses a `key=value` file. Blank lines and lines starting with `#` are
/// skipped; keys may use `-` or `_`.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>, String> {
    let mut map = BTreeMap::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(format!("config line {}: expected key=value", k + 1));
        };
        let key = key.trim().replace('_', "-");
        if !CONFIG_KEYS.contains(&key.as_str()) {
            return Err(format!("config line {}: unknown key '{key}'", k + 1));
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

/// Merges flags over the config file over the defaults. `env_threads` is the
/// raw value of [`THREADS_ENV`], if set.
pub fn resolve(
    flags: &Common,
    file: &BTreeMap<String, String>,
    env_threads: Option<&str>,
) -> Result<Resolved, String> {
    let get = |key: &str| file.get(key).map(String::as_str);
    fn pick<T: FromStr>(flag: Option<T>, file: Option<&str>, key: &str, default: T) -> Result<T, String> {
        match (flag, file) {
            (Some(v), _) => Ok(v),
            (None, Some(s)) => parse_value(key, s),
            (None, None) => Ok(default),
        }
    }
    fn pick_opt<T: FromStr>(flag: Option<T>, file: Option<&str>, key: &str) -> Result<Option<T>, String> {
        match (flag, file) {
            (Some(v), _) => Ok(Some(v)),
            (None, Some(s)) => parse_value(key, s).map(Some),
            (None, None) => Ok(None),
        }
    }
    fn pick_list<T: FromStr>(flag: Option<Vec<T>>, file: Option<&str>, key: &str) -> Result<Option<Vec<T>>, String> {
        match (flag, file) {
            (Some(v), _) => Ok(Some(v)),
            (None, Some(s)) => parse_list(key, s).map(Some),
            (None, None) => Ok(None),
        }
    }

    let d = ExperimentConfig::default();
    let config = ExperimentConfig {
        alpha: pick(flags.alpha, get("alpha"), "alpha", d.alpha)?,
        c0: pick(flags.c0, get("c0"), "c0", d.c0)?,
        epsilon: pick(flags.epsilon, get("epsilon"), "epsilon", d.epsilon)?,
        beta: pick(flags.beta, get("beta"), "beta", d.beta)?,
        delta: pick(flags.delta, get("delta"), "delta", d.delta)?,
        n: pick(flags.n, get("n"), "n", d.n)?,
        n_grid: pick_list(flags.n_grid.clone(), get("n-grid"), "n-grid")?.unwrap_or(d.n_grid),
        n1: pick_opt(flags.n1, get("n1"), "n1")?,
        samples: pick(flags.samples, get("samples"), "samples", d.samples)?,
        seed: pick(flags.seed, get("seed"), "seed", d.seed)?,
        burkholder_p: pick_opt(flags.burkholder_p, get("burkholder-p"), "burkholder-p")?,
        r_grid: pick_list(flags.r_grid.clone(), get("r-grid"), "r-grid")?,
        x_grid: pick_list(flags.x_grid.clone(), get("x-grid"), "x-grid")?.unwrap_or(d.x_grid),
    };
    let threads = match (flags.threads, get("threads"), env_threads) {
        (Some(t), _, _) => t,
        (None, Some(s), _) => parse_value("threads", s)?,
        (None, None, Some(s)) => parse_value(THREADS_ENV, s)?,
        (None, None, None) => 0,
    };
    let format = pick(flags.format, get("format"), "format", Format::Csv)?;
    let out = flags.out.clone().or_else(|| get("out").map(PathBuf::from));
    Ok(Resolved { config, threads, format, out })
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

impl Resolved {
    /// `key = value` lines describing every setting, defaults included.
    pub fn describe(&self) -> Vec<String> {
        let c = &self.config;
        let threads = if self.threads == 0 {
            format!("0 ({} available)", rayon::current_num_threads())
        } else {
            self.threads.to_string()
        };
        let fields = [
            ("alpha", c.alpha.to_string()),
            ("c0", c.c0.to_string()),
            ("epsilon", c.epsilon.to_string()),
            ("beta", c.beta.to_string()),
            ("delta", c.delta.to_string()),
            ("n", c.n.to_string()),
            ("n-grid", join(&c.n_grid)),
            ("n1", c.n1().to_string()),
            ("samples", c.samples.to_string()),
            ("seed", c.seed.to_string()),
            ("burkholder-p", c.burkholder_p().to_string()),
            ("r-grid", c.r_grid.as_deref().map_or_else(|| "0,S/2,S".to_string(), join)),
            ("x-grid", join(&c.x_grid)),
            ("threads", threads),
            ("format", format!("{:?}", self.format).to_lowercase()),
            ("out", self.out.as_ref().map_or_else(|| "stdout".to_string(), |p| p.display().to_string())),
        ];
        fields.into_iter().map(|(k, v)| format!("{k} = {v}")).collect()
    }
}
