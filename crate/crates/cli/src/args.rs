use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use reserve_core::{AuctionEnv, LossParams, TypeDistribution};

#[derive(Parser, Debug)]
#[command(
    name = "reserve",
    version,
    about = "Reserve prices and secret reserves for loss-averse bidders in first-price auctions",
    args_override_self = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Equilibrium bid function as `type,bid,win_prob` rows.
    #[command(args_override_self = true, allow_negative_numbers = true)]
    BidCurve(BidCurveArgs),
    /// Revenue-maximising public reserve.
    #[command(args_override_self = true, allow_negative_numbers = true)]
    Optimize(OptimizeArgs),
    /// Optimal public reserve for each number of bidders in a range.
    #[command(args_override_self = true, allow_negative_numbers = true)]
    SweepN(SweepArgs),
    /// Near-optimal secret reserve: threshold distribution and reserve prices.
    #[command(args_override_self = true, allow_negative_numbers = true)]
    SecretScheme(SecretArgs),
    /// Auction followed by a take-it-or-leave-it offer.
    #[command(args_override_self = true, allow_negative_numbers = true)]
    Tioli(TioliArgs),
    /// Revenue of every mechanism at its optimum, plus the upper bound.
    #[command(args_override_self = true, allow_negative_numbers = true)]
    Compare(CompareArgs),
    /// Monte Carlo simulation of one mechanism.
    #[command(args_override_self = true, allow_negative_numbers = true)]
    Simulate(SimulateArgs),
    /// Grid search for profitable deviations from the equilibrium bids.
    #[command(args_override_self = true, allow_negative_numbers = true)]
    VerifyUpe(VerifyArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum DistKind {
    Uniform,
    Power,
    Truncexp,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum MechanismKind {
    Public,
    Secret,
    Tioli,
}

/// A single bidder count or an inclusive range `lo..hi`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Bidders {
    pub lo: usize,
    pub hi: usize,
}

impl FromStr for Bidders {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parse = |x: &str| {
            x.trim()
                .parse::<usize>()
                .map_err(|_| format!("expected a bidder count or lo..hi, got `{s}`"))
        };
        let (lo, hi) = match s.split_once("..") {
            Some((a, b)) => (parse(a)?, parse(b.trim_start_matches('='))?),
            None => {
                let n = parse(s)?;
                (n, n)
            }
        };
        if lo < 2 || hi < lo {
            return Err(format!(
                "bidder counts must satisfy 2 <= lo <= hi, got `{s}`"
            ));
        }
        Ok(Self { lo, hi })
    }
}

impl fmt::Display for Bidders {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.lo == self.hi {
            write!(f, "{}", self.lo)
        } else {
            write!(f, "{}..{}", self.lo, self.hi)
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Type distribution family.
    #[arg(long, value_enum, default_value_t = DistKind::Uniform)]
    pub dist: DistKind,
    /// Upper end of the type support.
    #[arg(long, default_value_t = 1.0)]
    pub upper: f64,
    /// Exponent of the power family, F(t) = (t/upper)^a.
    #[arg(long, default_value_t = 2.0)]
    pub a: f64,
    /// Rate of the truncated exponential family.
    #[arg(long, default_value_t = 1.0)]
    pub rate: f64,
    /// Number of bidders (`sweep-n` also takes a range `lo..hi`).
    #[arg(long, default_value = "2")]
    pub n: Bidders,
    /// Weight of gain-loss utility.
    #[arg(long, default_value_t = 1.0)]
    pub eta: f64,
    /// Loss aversion, at least 1.
    #[arg(long, default_value_t = 2.0)]
    pub lambda: f64,
    /// Seller's value for the good.
    #[arg(long = "tS", default_value_t = 0.0)]
    pub t_s: f64,
    /// Seed for simulation.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write CSV here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// File of whitespace-separated key=value tokens; flags given on the
    /// command line take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Usage errors detected after parsing; reported with exit code 2.
#[derive(Debug)]
pub struct Usage(pub String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

impl Common {
    pub fn distribution(&self) -> Result<TypeDistribution> {
        let d = match self.dist {
            DistKind::Uniform => TypeDistribution::uniform(self.upper),
            DistKind::Power => TypeDistribution::power(self.a, self.upper),
            DistKind::Truncexp => TypeDistribution::truncated_exponential(self.rate, self.upper),
        };
        Ok(d?)
    }

    pub fn single_n(&self) -> Result<usize> {
        if self.n.lo != self.n.hi {
            return Err(Usage(format!(
                "--n {} is a range; this command takes one bidder count",
                self.n
            ))
            .into());
        }
        Ok(self.n.lo)
    }

    pub fn env(&self) -> Result<AuctionEnv> {
        self.env_with_n(self.single_n()?)
    }

    pub fn env_with_n(&self, n: usize) -> Result<AuctionEnv> {
        Ok(AuctionEnv::new(self.distribution()?, n, self.t_s)?)
    }

    pub fn params(&self) -> Result<LossParams> {
        Ok(LossParams::new(self.eta, self.lambda)?)
    }
}

/// How a mechanism is parameterised on the command line.
#[derive(Args, Debug, Clone)]
pub struct MechanismArgs {
    /// Mechanism.
    #[arg(long, value_enum, default_value_t = MechanismKind::Public)]
    pub mechanism: MechanismKind,
    /// Threshold type: the marginal bidder of a public reserve or TIOLI
    /// auction, or the top of the secret threshold distribution. Defaults to
    /// the optimum.
    #[arg(long)]
    pub tr: Option<f64>,
    /// Concentration K of the secret threshold distribution (t/t_bar_r)^K.
    #[arg(long = "K", default_value_t = 1e4)]
    pub k: f64,
    /// Gap t_r - t_p between the auction and posted-price thresholds
    /// [default: upper/1000].
    #[arg(long)]
    pub epsilon: Option<f64>,
}

#[derive(Args, Debug)]
pub struct BidCurveArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub mechanism: MechanismArgs,
}

#[derive(Args, Debug)]
pub struct OptimizeArgs {
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct SecretArgs {
    #[command(flatten)]
    pub common: Common,
    /// Concentration K of the threshold distribution (t/t_bar_r)^K.
    #[arg(long = "K", default_value_t = 1e4)]
    pub k: f64,
    /// Top of the threshold distribution [default: maximiser of the bound].
    #[arg(long)]
    pub tr: Option<f64>,
    /// Number of evenly spaced threshold types in the table.
    #[arg(long, default_value_t = 101)]
    pub grid: usize,
}

#[derive(Args, Debug)]
pub struct TioliArgs {
    #[command(flatten)]
    pub common: Common,
    /// Auction threshold type [default: public optimum].
    #[arg(long)]
    pub tr: Option<f64>,
    /// Gap t_r - t_p [default: upper/1000].
    #[arg(long)]
    pub epsilon: Option<f64>,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    #[command(flatten)]
    pub common: Common,
    /// Concentration K of the secret scheme.
    #[arg(long = "K", default_value_t = 1e4)]
    pub k: f64,
    /// Gap t_r - t_p of the TIOLI construction [default: upper/1000].
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Also simulate every mechanism with this many draws.
    #[arg(long)]
    pub simulate: Option<u64>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub mechanism: MechanismArgs,
    /// Number of simulated auctions.
    #[arg(long, default_value_t = 1_000_000)]
    pub draws: u64,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub mechanism: MechanismArgs,
    /// Number of evenly spaced types checked.
    #[arg(long, default_value_t = 201)]
    pub grid: usize,
    /// Number of deviating bids, evenly spaced up to 1.1 times the top bid.
    #[arg(long, default_value_t = 401)]
    pub bids: usize,
    /// Raise every equilibrium bid by this amount before checking.
    #[arg(long, default_value_t = 0.0)]
    pub perturb: f64,
}

/// Splices the tokens of any `--config` file in directly after the
/// subcommand, so later command-line flags override them.
pub fn expand_config(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let strings: Vec<Option<&str>> = args.iter().map(|a| a.to_str()).collect();
    let mut path = None;
    for (i, a) in strings.iter().enumerate() {
        match a {
            Some("--config") => {
                let value = strings
                    .get(i + 1)
                    .copied()
                    .flatten()
                    .ok_or_else(|| Usage("--config needs a path".into()))?;
                path = Some(value.to_string());
            }
            Some(s) if s.starts_with("--config=") => {
                path = Some(s["--config=".len()..].to_string())
            }
            _ => {}
        }
    }
    let Some(path) = path else {
        return Ok(args);
    };
    let text =
        std::fs::read_to_string(&path).with_context(|| format!("reading config file {path}"))?;
    let tokens = config_tokens(&text)?;
    let mut out = Vec::with_capacity(args.len() + tokens.len());
    let mut iter = args.into_iter();
    out.extend(iter.by_ref().take(2));
    out.extend(tokens.into_iter().map(OsString::from));
    out.extend(iter);
    Ok(out)
}

fn config_tokens(text: &str) -> Result<Vec<String>> {
    let mut tokens = Vec::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("");
        for token in line.split_whitespace() {
            let token = token.trim_start_matches("--");
            let Some((key, value)) = token.split_once('=') else {
                bail!(Usage(format!("config token `{token}` is not key=value")));
            };
            if key == "config" {
                bail!(Usage(
                    "config files cannot include other config files".into()
                ));
            }
            tokens.push(format!("--{key}={value}"));
        }
    }
    Ok(tokens)
}
