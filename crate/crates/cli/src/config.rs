//! Flags shared by every subcommand.

use clap::Args;
use emlab::density::DEFAULT_ENUMERATION_BUDGET;
use emlab::largeness::DEFAULT_DIGIT_BUDGET;

use crate::report::{CliError, CliResult, Format};

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Most colorings an exact enumeration may visit.
    #[arg(long = "budget", global = true, env = "EMLAB_BUDGET", default_value_t = DEFAULT_ENUMERATION_BUDGET)]
    pub enumeration_budget: u64,
    /// Most decimal digits an endpoint may have.
    #[arg(long, global = true, default_value_t = DEFAULT_DIGIT_BUDGET)]
    pub digit_budget: u64,
    /// Samples for randomized modes.
    #[arg(long, global = true, default_value_t = 1000)]
    pub samples: u64,
    /// Run only shard INDEX/COUNT of an exact enumeration.
    #[arg(long, global = true, default_value = "0/1", value_parser = parse_shard)]
    pub shard: (u64, u64),
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Leave timestamps out so that output is byte-identical across runs.
    #[arg(long, global = true)]
    pub stable: bool,
}

fn parse_shard(text: &str) -> Result<(u64, u64), String> {
    let (i, n) = text.split_once('/').ok_or("expected INDEX/COUNT")?;
    let i = i.trim().parse::<u64>().map_err(|e| e.to_string())?;
    let n = n.trim().parse::<u64>().map_err(|e| e.to_string())?;
    Ok((i, n))
}

/// Validated run configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    pub seed: u64,
    pub enumeration_budget: u64,
    pub digit_budget: u64,
    pub samples: u64,
    pub shard: (u64, u64),
    pub format: Format,
    pub stable: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            enumeration_budget: DEFAULT_ENUMERATION_BUDGET,
            digit_budget: DEFAULT_DIGIT_BUDGET,
            samples: 1000,
            shard: (0, 1),
            format: Format::Json,
            stable: false,
        }
    }
}

impl TryFrom<&GlobalArgs> for RunConfig {
    type Error = CliError;

    fn try_from(g: &GlobalArgs) -> CliResult<Self> {
        if g.enumeration_budget == 0 || g.digit_budget == 0 {
            return Err(CliError::Usage("budgets must be positive".into()));
        }
        let (index, count) = g.shard;
        if count == 0 || index >= count {
            return Err(CliError::Usage(format!("shard index {index} must be below count {count}")));
        }
        Ok(RunConfig {
            seed: g.seed,
            enumeration_budget: g.enumeration_budget,
            digit_budget: g.digit_budget,
            samples: g.samples,
            shard: g.shard,
            format: g.format,
            stable: g.stable,
        })
    }
}
