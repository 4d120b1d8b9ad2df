//! Subcommands and their handlers.

use clap::{Args, Subcommand, ValueEnum};
use emlab::certificate::Certificate;
use emlab::coloring::{
    bit_member, encode_family, fallow_violation, indicator, transitive_violation, triple_coloring, PairColoring,
};
use emlab::density::{
    check_em_alpha_large, check_em_dense, merge_shards, refute_density, validate, DensityCertificate,
    DensityConfig, Evidence, Mode, PartitionReading, RankRange, RefuteOutcome, Verdict,
};
use emlab::largeness::{
    decompose_large, interval_is_large, is_alpha_large, is_alpha_sparse_capped, least_large_endpoint, sparsify,
};
use emlab::limitmin::{argmax_coloring, fallow_scan, qmin, r_trajectory, stability_scan, sweep_fallow, table_space};
use emlab::ordinal::DEFAULT_COEFFICIENT_CAP;
use emlab::witness::{
    build_grouping_with, em_witness_with, fallow_base_witness, nominal, stabilize, verify_grouping, AnchorSide,
    BaseStrategy, EmPlan, GreedyChain, GroupingPlan, WholeSet,
};
use emlab::{FinSet, Ordinal};
use num_bigint::BigUint;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::input::{self, ColoringSpec};
use crate::report::{settle, CliError, CliResult, Outcome, Table};
use crate::suite;

/// Endpoints further than this from `a` are not re-checked by stepping.
const ENDPOINT_RECHECK_SPAN: u64 = 10_000_000;

#[derive(Debug, Subcommand)]
pub enum Command {
    /// α-largeness of sets.
    #[command(subcommand)]
    Large(LargeCmd),
    /// α-sparseness of sets.
    #[command(subcommand)]
    Sparse(SparseCmd),
    /// Extract an ω^n-large, ω^m-sparse subset.
    Sparsify(SparsifyArgs),
    /// Pair colorings.
    #[command(subcommand)]
    Color(ColorCmd),
    /// Fallow witnesses and groupings.
    #[command(subcommand)]
    Witness(WitnessCmd),
    /// EM-largeness and EM-density.
    #[command(subcommand)]
    Density(DensityCmd),
    /// Window minima and the argmax coloring.
    #[command(subcommand)]
    Limitmin(LimitminCmd),
    /// The property suite.
    #[command(subcommand)]
    Suite(SuiteCmd),
}

pub fn dispatch(cmd: &Command, cfg: &RunConfig) -> CliResult<Outcome> {
    match cmd {
        Command::Large(c) => large(c, cfg),
        Command::Sparse(SparseCmd::Check(a)) => sparse_check(a),
        Command::Sparsify(a) => sparsify_cmd(a),
        Command::Color(c) => color(c),
        Command::Witness(c) => witness(c),
        Command::Density(c) => density_cmd(c, cfg),
        Command::Limitmin(c) => limitmin(c),
        Command::Suite(SuiteCmd::Run(a)) => Ok(suite::run_outcome(cfg, a.filter.as_deref())),
    }
}

// ---------------------------------------------------------------- large

#[derive(Debug, Subcommand)]
pub enum LargeCmd {
    /// Whether a set is α-large.
    Check(SetAlpha),
    /// Least N with {a, …, N} α-large.
    Endpoint(EndpointArgs),
    /// Split a set into consecutive blocks, block i minimally large for part i.
    Decompose(DecomposeArgs),
}

#[derive(Debug, Args)]
pub struct SetAlpha {
    #[arg(long)]
    pub set: String,
    #[arg(long)]
    pub alpha: String,
}

#[derive(Debug, Args)]
pub struct EndpointArgs {
    #[arg(long)]
    pub alpha: String,
    #[arg(long)]
    pub a: u64,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    #[arg(long)]
    pub set: String,
    /// Summands, trailing first; repeat the flag.
    #[arg(long = "part", required = true)]
    pub parts: Vec<String>,
}

fn large(cmd: &LargeCmd, cfg: &RunConfig) -> CliResult<Outcome> {
    match cmd {
        LargeCmd::Check(a) => {
            let set = input::set(&a.set)?;
            let alpha = input::ordinal(&a.alpha)?;
            let cert = Certificate::new("large check", json!({ "set": set, "alpha": alpha }));
            let large = settle(&cert, is_alpha_large(&set, &alpha))?;
            Ok(Outcome::new(cert.with_output(json!(large), true), large))
        }
        LargeCmd::Endpoint(a) => {
            let alpha = input::ordinal(&a.alpha)?;
            let cert = Certificate::new("large endpoint", json!({ "alpha": alpha, "a": a.a }))
                .nominal(&["a > 3"])
                .enforced(&["a > 3"]);
            let n = settle(&cert, least_large_endpoint(&alpha, a.a, cfg.digit_budget))?;
            let (verified, rechecked) = recheck_endpoint(&alpha, a.a, &n);
            let mut cert = cert.with_output(biguint_json(&n), verified);
            if rechecked {
                cert.enforced_preconditions
                    .push("{a..N} large and {a..N-1} not, by stepping".into());
            }
            Ok(Outcome::new(cert, true))
        }
        LargeCmd::Decompose(a) => {
            let set = input::set(&a.set)?;
            let parts = a.parts.iter().map(|p| input::ordinal(p)).collect::<CliResult<Vec<_>>>()?;
            let cert = Certificate::new("large decompose", json!({ "set": set, "parts": parts }));
            let blocks = settle(&cert, decompose_large(&set, &parts))?;
            let mut cert = cert;
            for (i, (b, p)) in blocks.iter().zip(&parts).enumerate() {
                if !settle(&cert, is_alpha_large(b, p))? {
                    cert = cert.violation(json!({ "block": i, "not_large_for": p }));
                }
            }
            let verified = cert.violations.is_empty();
            let mut table = Table::new(vec!["block", "part", "min", "max", "size"]);
            for (i, (b, p)) in blocks.iter().zip(&parts).enumerate() {
                table.push(vec![
                    i.to_string(),
                    p.to_string(),
                    b.min().map(|v| v.to_string()).unwrap_or_default(),
                    b.max().map(|v| v.to_string()).unwrap_or_default(),
                    b.len().to_string(),
                ]);
            }
            Ok(Outcome::new(cert.with_output(json!(blocks), verified), true).with_table(table))
        }
    }
}

/// Numbers that fit 64 bits as JSON numbers, others as decimal strings.
pub fn biguint_json(n: &BigUint) -> Value {
    match u64::try_from(n) {
        Ok(v) => json!(v),
        Err(_) => json!(n.to_string()),
    }
}

/// `(verified, rechecked)`: minimality is re-checked by stepping when the
/// interval is short enough.
fn recheck_endpoint(alpha: &Ordinal, a: u64, n: &BigUint) -> (bool, bool) {
    let Ok(n) = u64::try_from(n) else {
        return (true, false);
    };
    if n.saturating_sub(a) > ENDPOINT_RECHECK_SPAN {
        return (true, false);
    }
    let cap = u64::MAX;
    let full = interval_is_large(a, n + 1, alpha, cap).unwrap_or(false);
    let short = alpha.is_zero() || !interval_is_large(a, n, alpha, cap).unwrap_or(true);
    (full && short, true)
}

// ---------------------------------------------------------------- sparse

#[derive(Debug, Subcommand)]
pub enum SparseCmd {
    /// Whether a set is α-sparse.
    Check(SetAlpha),
}

fn sparse_check(a: &SetAlpha) -> CliResult<Outcome> {
    let set = input::set(&a.set)?;
    let alpha = input::ordinal(&a.alpha)?;
    let cert = Certificate::new("sparse check", json!({ "set": set, "alpha": alpha }));
    let sparse = settle(&cert, is_alpha_sparse_capped(&set, &alpha, DEFAULT_COEFFICIENT_CAP))?;
    Ok(Outcome::new(cert.with_output(json!(sparse), true), sparse))
}

#[derive(Debug, Args)]
pub struct SparsifyArgs {
    #[arg(long)]
    pub set: String,
    /// Target largeness ω^n.
    #[arg(long)]
    pub n: u32,
    /// Target sparseness ω^m.
    #[arg(long)]
    pub m: u32,
}

fn sparsify_cmd(a: &SparsifyArgs) -> CliResult<Outcome> {
    let set = input::set(&a.set)?;
    let cert = Certificate::new("sparsify", json!({ "set": set, "n": a.n, "m": a.m }))
        .nominal(&["min X > 3"])
        .enforced(&["min X > 3"]);
    let out = settle(&cert, sparsify(&set, a.n, a.m))?;
    let large = settle(&cert, is_alpha_large(&out, &Ordinal::omega_pow(a.n)))?;
    let sparse = settle(&cert, is_alpha_sparse_capped(&out, &Ordinal::omega_pow(a.m), DEFAULT_COEFFICIENT_CAP))?;
    let mut cert = cert;
    if !large {
        cert = cert.violation(json!({ "not_large": format!("w^{}", a.n) }));
    }
    if !sparse {
        cert = cert.violation(json!({ "not_sparse": format!("w^{}", a.m) }));
    }
    Ok(Outcome::new(cert.with_output(json!(out), large && sparse), true))
}

// ---------------------------------------------------------------- color

#[derive(Debug, Subcommand)]
pub enum ColorCmd {
    /// Whether a coloring is fallow on a set.
    Fallow(ColoringOn),
    /// Whether a coloring is transitive on a set.
    Transitive(ColoringOn),
    /// Bit-encode a family of 2-colorings into one coloring.
    Encode(EncodeArgs),
    /// The 2-coloring "color equals i".
    Indicator(IndicatorArgs),
    /// The triple coloring: 1 where the pair coloring is transitive.
    Triple(ColoringOn),
}

#[derive(Debug, Args)]
pub struct ColoringOn {
    /// JSON coloring or generator (hash:SEED:COLORS, const:COLORS:COLOR, mod:COLORS).
    #[arg(long)]
    pub coloring: String,
    /// Defaults to the ground of an explicit coloring.
    #[arg(long)]
    pub set: Option<String>,
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    /// JSON array of 2-colorings on a common ground.
    #[arg(long)]
    pub family: String,
}

#[derive(Debug, Args)]
pub struct IndicatorArgs {
    #[command(flatten)]
    pub on: ColoringOn,
    #[arg(long)]
    pub index: u32,
}

fn coloring_on(on: &ColoringOn) -> CliResult<(ColoringSpec, PairColoring)> {
    let spec = ColoringSpec::parse(&on.coloring)?;
    let ground = on.set.as_deref().map(input::set).transpose()?;
    let c = spec.materialize(ground.as_ref())?;
    Ok((spec, c))
}

fn triple_row(t: [u64; 3]) -> Vec<String> {
    t.iter().map(u64::to_string).collect()
}

fn color(cmd: &ColorCmd) -> CliResult<Outcome> {
    match cmd {
        ColorCmd::Fallow(on) | ColorCmd::Transitive(on) => {
            let fallow = matches!(cmd, ColorCmd::Fallow(_));
            let (spec, c) = coloring_on(on)?;
            let op = if fallow { "color fallow" } else { "color transitive" };
            let cert = Certificate::new(op, json!({ "coloring": spec.describe(), "set": c.ground() }));
            let ground = c.ground().clone();
            let found = if fallow {
                settle(&cert, fallow_violation(&c, &ground))?
            } else {
                settle(&cert, transitive_violation(&c, &ground))?
            };
            let mut table = Table::new(vec!["holds", "x", "y", "z"]);
            match found {
                Some(t) => table.push([vec!["false".to_string()], triple_row(t)].concat()),
                None => table.push(vec!["true".into(), String::new(), String::new(), String::new()]),
            }
            let cert = cert.with_output(json!({ "holds": found.is_none(), "violation": found }), true);
            Ok(Outcome::new(cert, found.is_none()).with_table(table))
        }
        ColorCmd::Encode(a) => {
            let family = input::coloring_family(&a.family)?;
            let cert = Certificate::new("color encode", json!({ "family": family }));
            let c = settle(&cert, encode_family(&family))?;
            let round_trip = family
                .iter()
                .enumerate()
                .all(|(i, m)| bit_member(&c, i as u32) == *m);
            Ok(Outcome::new(cert.with_output(json!(c), round_trip), true).with_table(pairs_table(&c)))
        }
        ColorCmd::Indicator(a) => {
            let (spec, c) = coloring_on(&a.on)?;
            let cert = Certificate::new(
                "color indicator",
                json!({ "coloring": spec.describe(), "set": c.ground(), "index": a.index }),
            );
            let out = settle(&cert, indicator(&c, a.index))?;
            let agrees = out.values().iter().zip(c.values()).all(|(&b, &v)| b == (v == a.index) as u32);
            Ok(Outcome::new(cert.with_output(json!(out), agrees), true).with_table(pairs_table(&out)))
        }
        ColorCmd::Triple(on) => {
            let (spec, c) = coloring_on(on)?;
            let cert = Certificate::new("color triple", json!({ "coloring": spec.describe(), "set": c.ground() }));
            let t = triple_coloring(&c);
            let values = t.table();
            let quad = t.zero_homogeneous_quadruple();
            let mut table = Table::new(vec!["x", "y", "z", "value"]);
            for ([x, y, z], v) in &values {
                table.push(vec![x.to_string(), y.to_string(), z.to_string(), v.to_string()]);
            }
            let rows: Vec<[u64; 4]> = values.iter().map(|&([x, y, z], v)| [x, y, z, v as u64]).collect();
            let mut cert = cert;
            if let Some(q) = quad {
                cert = cert.violation(json!({ "zero_homogeneous_quadruple": q }));
            }
            let cert = cert.with_output(json!({ "table": rows, "zero_homogeneous_quadruple": quad }), quad.is_none());
            Ok(Outcome::new(cert, quad.is_none()).with_table(table))
        }
    }
}

fn pairs_table(c: &PairColoring) -> Table {
    let mut t = Table::new(vec!["x", "y", "color"]);
    for p in c.triples() {
        t.push(triple_row(p));
    }
    t
}

// ---------------------------------------------------------------- witness

#[derive(Debug, Subcommand)]
pub enum WitnessCmd {
    /// A min-homogeneous, hence fallow, ω-large chain.
    Base(BaseArgs),
    /// Shrink a set so that every anchor sees one color.
    Stabilize(StabilizeArgs),
    /// An (ω^n, ω^k)-grouping.
    Grouping(GroupingArgs),
    /// An ω^n-large set on which the coloring is fallow.
    Em(EmArgs),
}

#[derive(Debug, Args)]
pub struct SetColoring {
    #[arg(long)]
    pub set: String,
    /// JSON coloring or generator (hash:SEED:COLORS, const:COLORS:COLOR, mod:COLORS).
    #[arg(long)]
    pub coloring: String,
}

#[derive(Debug, Args)]
pub struct BaseArgs {
    #[command(flatten)]
    pub on: SetColoring,
    /// Skip the |X| > (a+1)^(a+1) size check.
    #[arg(long)]
    pub lenient: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Side {
    Below,
    Above,
}

#[derive(Debug, Args)]
pub struct StabilizeArgs {
    #[command(flatten)]
    pub on: SetColoring,
    #[arg(long)]
    pub anchors: String,
    #[arg(long)]
    pub n: u32,
    #[arg(long, value_enum, default_value_t = Side::Below)]
    pub side: Side,
}

#[derive(Debug, Args)]
pub struct GroupingArgs {
    #[command(flatten)]
    pub on: SetColoring,
    #[arg(long)]
    pub n: u32,
    #[arg(long)]
    pub k: u32,
    #[arg(long, default_value_t = GroupingPlan::default().outer_offset)]
    pub outer_offset: u32,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Base {
    GreedyChain,
    WholeSet,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Plan {
    Default,
    Minimal,
}

#[derive(Debug, Args)]
pub struct EmArgs {
    #[command(flatten)]
    pub on: SetColoring,
    #[arg(long)]
    pub n: u32,
    #[arg(long, value_enum, default_value_t = Base::GreedyChain)]
    pub base: Base,
    #[arg(long, value_enum, default_value_t = Plan::Default)]
    pub plan: Plan,
}

fn set_coloring(on: &SetColoring) -> CliResult<(FinSet, ColoringSpec)> {
    Ok((input::set(&on.set)?, ColoringSpec::parse(&on.coloring)?))
}

/// Fallow, transitive and ω^n-large checks on a produced witness.
fn witness_checks(cert: Certificate, p: &dyn emlab::coloring::Coloring, set: &FinSet, out: &FinSet, n: u32) -> CliResult<Certificate> {
    let fallow = settle(&cert, fallow_violation(p, out))?;
    let transitive = settle(&cert, transitive_violation(p, out))?;
    let large = settle(&cert, is_alpha_large(out, &Ordinal::omega_pow(n)))?;
    let subset = out.is_subset_of(set);
    let mut cert = cert;
    if let Some(t) = fallow {
        cert = cert.violation(json!({ "not_fallow": t }));
    }
    if let Some(t) = transitive {
        cert = cert.violation(json!({ "not_transitive": t }));
    }
    if !large {
        cert = cert.violation(json!({ "not_large": format!("w^{n}") }));
    }
    if !subset {
        cert = cert.violation(json!({ "not_subset": true }));
    }
    let ok = cert.violations.is_empty();
    Ok(cert.with_output(
        json!({
            "witness": out,
            "fallow": fallow.is_none(),
            "transitive": transitive.is_none(),
            "large": large,
        }),
        ok,
    ))
}

fn witness(cmd: &WitnessCmd) -> CliResult<Outcome> {
    match cmd {
        WitnessCmd::Base(a) => {
            let (set, spec) = set_coloring(&a.on)?;
            let p = spec.build();
            let mut enforced = vec!["X is a subset of the domain of P", "colors <= min X"];
            if !a.lenient {
                enforced.push("|X| > (min X + 1)^(min X + 1)");
            }
            let cert = Certificate::new(
                "witness base",
                json!({ "set": set, "coloring": spec.describe(), "strict": !a.lenient }),
            )
            .nominal(nominal::BASE)
            .enforced(&enforced);
            let out = settle(&cert, fallow_base_witness(&set, &*p, !a.lenient))?;
            let cert = witness_checks(cert, &*p, &set, &out, 1)?;
            let ok = cert.verified;
            Ok(Outcome::new(cert, ok))
        }
        WitnessCmd::Stabilize(a) => {
            let (set, spec) = set_coloring(&a.on)?;
            let anchors = input::set(&a.anchors)?;
            let p = spec.build();
            let side = match a.side {
                Side::Below => AnchorSide::AnchorsBelow,
                Side::Above => AnchorSide::AnchorsAbove,
            };
            let cert = Certificate::new(
                "witness stabilize",
                json!({ "set": set, "anchors": anchors, "coloring": spec.describe(), "n": a.n, "side": side }),
            )
            .nominal(nominal::STABILIZE)
            .enforced(&["anchors and X are in the domain of P", "anchors lie on the declared side of X"]);
            let out = settle(&cert, stabilize(&set, &anchors, &*p, a.n, side))?;
            let mut cert = cert;
            for x in anchors.iter() {
                let colors: std::collections::BTreeSet<u32> = out
                    .iter()
                    .map(|y| match side {
                        AnchorSide::AnchorsBelow => p.color(x, y),
                        AnchorSide::AnchorsAbove => p.color(y, x),
                    })
                    .collect();
                if colors.len() > 1 {
                    cert = cert.violation(json!({ "anchor_not_stable": x }));
                }
            }
            let large = settle(&cert, is_alpha_large(&out, &Ordinal::omega_pow(a.n)))?;
            if !large {
                cert = cert.violation(json!({ "not_large": format!("w^{}", a.n) }));
            }
            let ok = cert.violations.is_empty();
            Ok(Outcome::new(cert.with_output(json!(out), ok), ok))
        }
        WitnessCmd::Grouping(a) => {
            let (set, spec) = set_coloring(&a.on)?;
            let p = spec.build();
            let plan = GroupingPlan {
                outer_offset: a.outer_offset,
            };
            let cert = Certificate::new(
                "witness grouping",
                json!({ "set": set, "coloring": spec.describe(), "n": a.n, "k": a.k, "outer_offset": a.outer_offset }),
            )
            .nominal(nominal::GROUPING)
            .enforced(&["X is in the domain of P", "colors <= min X"]);
            let g = settle(&cert, build_grouping_with(&set, &*p, a.n, a.k, &plan))?;
            let violations = settle(&cert, verify_grouping(&g, &*p))?;
            let mut cert = cert;
            for v in &violations {
                cert = cert.violation(json!(v));
            }
            let ok = violations.is_empty();
            let mut table = Table::new(vec!["block", "min", "max", "size"]);
            for (i, b) in g.blocks.iter().enumerate() {
                table.push(vec![
                    i.to_string(),
                    b.min().map(|v| v.to_string()).unwrap_or_default(),
                    b.max().map(|v| v.to_string()).unwrap_or_default(),
                    b.len().to_string(),
                ]);
            }
            Ok(Outcome::new(cert.with_output(json!(g), ok), ok).with_table(table))
        }
        WitnessCmd::Em(a) => {
            let (set, spec) = set_coloring(&a.on)?;
            let p = spec.build();
            let base: &dyn BaseStrategy = match a.base {
                Base::GreedyChain => &GreedyChain,
                Base::WholeSet => &WholeSet,
            };
            let plan = match a.plan {
                Plan::Default => EmPlan::default(),
                Plan::Minimal => EmPlan::minimal(),
            };
            let cert = Certificate::new(
                "witness em",
                json!({ "set": set, "coloring": spec.describe(), "n": a.n, "base": base.name(), "plan": plan }),
            )
            .nominal(nominal::EM)
            .enforced(&["colors <= min X", "output fallow and w^n-large"]);
            let p_ref: &dyn emlab::coloring::Coloring = &*p;
            let out = settle(&cert, em_witness_with(&set, &p_ref, a.n, base, &plan))?;
            let cert = witness_checks(cert, &*p, &set, &out, a.n)?;
            let ok = cert.verified;
            Ok(Outcome::new(cert, ok))
        }
    }
}

// ---------------------------------------------------------------- density

#[derive(Debug, Subcommand)]
pub enum DensityCmd {
    /// Decide or probe EM-m-density or EM-α-largeness.
    Check(DensityCheckArgs),
    /// Search for a counterexample to EM-m-density.
    Refute(RefuteArgs),
    /// Combine certificates of shards of one query.
    Merge(MergeArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Exact,
    Randomized,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ReadingArg {
    /// The number of blocks is at most min Z_0.
    MinBound,
    /// The number of blocks is at most |Z_0|.
    CardinalityBound,
}

impl From<ReadingArg> for PartitionReading {
    fn from(r: ReadingArg) -> Self {
        match r {
            ReadingArg::MinBound => PartitionReading::MinBound,
            ReadingArg::CardinalityBound => PartitionReading::CardinalityBound,
        }
    }
}

#[derive(Debug, Args)]
pub struct DensityCheckArgs {
    #[arg(long)]
    pub set: String,
    /// Density level.
    #[arg(long, conflicts_with = "alpha", required_unless_present = "alpha")]
    pub m: Option<u32>,
    /// Ask for EM-α-largeness instead.
    #[arg(long)]
    pub alpha: Option<String>,
    #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
    pub mode: ModeArg,
    #[arg(long, value_enum, default_value_t = ReadingArg::MinBound)]
    pub reading: ReadingArg,
    /// Resume an exact run on the coloring ranks start..end.
    #[arg(long)]
    pub ranks: Option<String>,
    /// Run the exact enumeration as this many shards in one process and merge them.
    #[arg(long, default_value_t = 1)]
    pub fan_out: u64,
}

#[derive(Debug, Args)]
pub struct RefuteArgs {
    #[arg(long)]
    pub set: String,
    #[arg(long)]
    pub m: u32,
    #[arg(long, value_enum, default_value_t = ReadingArg::MinBound)]
    pub reading: ReadingArg,
}

#[derive(Debug, Args)]
pub struct MergeArgs {
    /// Certificates printed by `density check`, usually as @path.
    #[arg(required = true)]
    pub parts: Vec<String>,
}

/// Size of the outermost coloring space, for sharding.
fn outer_space(set: &FinSet) -> CliResult<u64> {
    let min = set.min().map_err(|e| CliError::Usage(e.to_string()))?;
    let pairs = (set.len() * set.len().saturating_sub(1) / 2) as u32;
    min.checked_pow(pairs)
        .ok_or_else(|| CliError::Resource(format!("{min}^{pairs} colorings do not fit 64 bits")))
}

fn density_verdict_outcome(cert: Certificate, d: DensityCertificate) -> Outcome {
    let checked = validate::validate(&d);
    let mut cert = cert;
    if let Err(e) = &checked {
        cert = cert.violation(json!({ "validator": e }));
    }
    let passed = d.verdict != Verdict::False;
    let mut table = Table::new(vec!["verdict", "clause", "colorings_checked", "space"]);
    let clause = match &d.evidence {
        Some(Evidence::Base { .. }) => "base",
        Some(Evidence::Coloring { .. }) => "coloring",
        Some(Evidence::Partition { .. }) => "partition",
        None => "",
    };
    table.push(vec![
        json!(d.verdict).as_str().unwrap_or_default().to_string(),
        clause.to_string(),
        d.colorings_checked.to_string(),
        d.space.map(|s| s.to_string()).unwrap_or_default(),
    ]);
    Outcome::new(cert.with_output(json!(d), checked.is_ok()), passed).with_table(table)
}

fn density_cmd(cmd: &DensityCmd, cfg: &RunConfig) -> CliResult<Outcome> {
    match cmd {
        DensityCmd::Check(a) => {
            let set = input::set(&a.set)?;
            let alpha = a.alpha.as_deref().map(input::ordinal).transpose()?;
            let mode = match a.mode {
                ModeArg::Exact => Mode::Exact,
                ModeArg::Randomized => Mode::Randomized,
            };
            let mut config = DensityConfig {
                mode,
                seed: cfg.seed,
                samples: cfg.samples,
                budget: cfg.enumeration_budget,
                reading: a.reading.into(),
                ranks: None,
            };
            if let Some(r) = &a.ranks {
                let (start, end) = input::rank_range(r)?;
                config.ranks = Some(RankRange { start, end });
            }
            let (index, count) = cfg.shard;
            if a.fan_out == 0 {
                return Err(CliError::Usage("--fan-out must be positive".into()));
            }
            let sharded = mode == Mode::Exact && (count > 1 || a.fan_out > 1);
            if sharded && config.ranks.is_some() {
                return Err(CliError::Usage("--ranks cannot be combined with --shard or --fan-out".into()));
            }
            let cert = Certificate::new(
                "density check",
                json!({
                    "set": set,
                    "m": a.m,
                    "alpha": alpha,
                    "mode": mode,
                    "reading": config.reading,
                    "ranks": config.ranks,
                    "shard": [index, count],
                    "fan_out": a.fan_out,
                }),
            )
            .nominal(&["min X > 3 for m >= 1 and for EM-alpha-largeness"])
            .enforced(&["min X > 3 for m >= 1 and for EM-alpha-largeness", "coloring space within budget"]);
            let run = |config: &DensityConfig| match &alpha {
                Some(al) => check_em_alpha_large(&set, al, config),
                None => check_em_dense(&set, a.m.unwrap_or(0), config),
            };
            let d = if sharded {
                let space = outer_space(&set)?;
                let mut parts = Vec::new();
                for i in 0..a.fan_out {
                    let mut c = config.clone();
                    // Our shard of the overall plan, cut again into fan-out pieces.
                    let ours = settle(&cert, RankRange::shard(space, index, count))?;
                    let piece = settle(&cert, RankRange::shard(ours.end - ours.start, i, a.fan_out))?;
                    c.ranks = Some(RankRange {
                        start: ours.start + piece.start,
                        end: ours.start + piece.end,
                    });
                    parts.push(settle(&cert, run(&c))?);
                }
                settle(&cert, merge_shards(&parts))?
            } else {
                settle(&cert, run(&config))?
            };
            Ok(density_verdict_outcome(cert, d))
        }
        DensityCmd::Refute(a) => {
            let set = input::set(&a.set)?;
            let reading: PartitionReading = a.reading.into();
            let cert = Certificate::new(
                "density refute",
                json!({ "set": set, "m": a.m, "reading": reading, "samples": cfg.samples, "seed": cfg.seed }),
            )
            .nominal(&["min X > 3", "m >= 1"])
            .enforced(&["min X > 3", "m >= 1", "every counterexample re-validated"]);
            let out = settle(
                &cert,
                refute_density(&set, a.m, cfg.samples, cfg.seed, reading, cfg.enumeration_budget),
            )?;
            let found = matches!(out, RefuteOutcome::Counterexample { .. });
            Ok(Outcome::new(cert.with_output(json!(out), true), !found))
        }
        DensityCmd::Merge(a) => {
            let parts = a
                .parts
                .iter()
                .map(|p| {
                    let v: Value = input::json_file("certificate", p)?;
                    // Accept either the bare density certificate or our envelope around it.
                    let inner = v.get("output").cloned().unwrap_or(v);
                    serde_json::from_value::<DensityCertificate>(inner)
                        .map_err(|e| CliError::Usage(format!("bad certificate {p}: {e}")))
                })
                .collect::<CliResult<Vec<_>>>()?;
            let cert = Certificate::new("density merge", json!({ "parts": a.parts }));
            let d = settle(&cert, merge_shards(&parts))?;
            Ok(density_verdict_outcome(cert, d))
        }
    }
}

// ---------------------------------------------------------------- limitmin

#[derive(Debug, Subcommand)]
pub enum LimitminCmd {
    /// Componentwise minimum of h over the window [a, b).
    Qmin(QminArgs),
    /// The argmax coloring f.
    F(TableArg),
    /// Triples on which f is not fallow.
    Scan(TableArg),
    /// Whether f(a, ·) is constant on a tail before the horizon.
    Stability(StabilityArgs),
    /// r_a(z) along a theta table.
    Rtrajectory(RArgs),
    /// Count tables whose f is not fallow, by table rank.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct TableArg {
    /// JSON {"u", "horizon", "cap"?, "rows"}.
    #[arg(long)]
    pub table: String,
}

#[derive(Debug, Args)]
pub struct QminArgs {
    #[command(flatten)]
    pub table: TableArg,
    #[arg(long)]
    pub a: usize,
    #[arg(long)]
    pub b: usize,
}

#[derive(Debug, Args)]
pub struct StabilityArgs {
    #[command(flatten)]
    pub table: TableArg,
    #[arg(long)]
    pub a: usize,
}

#[derive(Debug, Args)]
pub struct RArgs {
    /// JSON {"bounds": [A, B, Y, Z], "cells": [a][b][y][z]}.
    #[arg(long)]
    pub theta: String,
    #[arg(long)]
    pub a: usize,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub u: usize,
    #[arg(long)]
    pub horizon: usize,
    #[arg(long)]
    pub cap: u64,
}

fn limitmin(cmd: &LimitminCmd) -> CliResult<Outcome> {
    match cmd {
        LimitminCmd::Qmin(a) => {
            let h = input::value_table(&a.table.table)?;
            let cert = Certificate::new("limitmin qmin", json!({ "table": h, "a": a.a, "b": a.b }));
            let q = settle(&cert, qmin(&h, a.a, a.b))?;
            let mut table = Table::new(vec!["x", "q"]);
            for (x, v) in q.iter().enumerate() {
                table.push(vec![x.to_string(), v.to_string()]);
            }
            Ok(Outcome::new(cert.with_output(json!(q), true), true).with_table(table))
        }
        LimitminCmd::F(a) => {
            let h = input::value_table(&a.table)?;
            let cert = Certificate::new("limitmin f", json!({ "table": h }));
            let f = settle(&cert, argmax_coloring(&h))?;
            Ok(Outcome::new(cert.with_output(json!(f), true), true).with_table(pairs_table(&f)))
        }
        LimitminCmd::Scan(a) => {
            let h = input::value_table(&a.table)?;
            let cert = Certificate::new("limitmin scan", json!({ "table": h }));
            let bad = settle(&cert, fallow_scan(&h))?;
            let mut table = Table::new(vec!["a", "b", "c"]);
            for t in &bad {
                table.push(triple_row(*t));
            }
            let mut cert = cert;
            for t in &bad {
                cert = cert.violation(json!({ "not_fallow": t }));
            }
            Ok(Outcome::new(cert.with_output(json!(bad), true), bad.is_empty()).with_table(table))
        }
        LimitminCmd::Stability(a) => {
            let h = input::value_table(&a.table.table)?;
            let cert = Certificate::new("limitmin stability", json!({ "table": h, "a": a.a }))
                .nominal(&["a < horizon - 1"])
                .enforced(&["a < horizon - 1"]);
            let r = settle(&cert, stability_scan(&h, a.a))?;
            let mut table = Table::new(vec!["a", "horizon", "witness", "value", "stable"]);
            table.push(vec![
                r.a.to_string(),
                r.horizon.to_string(),
                r.witness.to_string(),
                r.value.to_string(),
                r.stable.to_string(),
            ]);
            let stable = r.stable;
            Ok(Outcome::new(cert.with_output(json!(r), true), stable).with_table(table))
        }
        LimitminCmd::Rtrajectory(a) => {
            let t = input::theta_table(&a.theta)?;
            let cert = Certificate::new("limitmin rtrajectory", json!({ "bounds": t.bounds(), "a": a.a }));
            let r = settle(&cert, r_trajectory(&t, a.a))?;
            let mut table = Table::new(vec!["z", "r"]);
            for (z, v) in r.r.iter().enumerate() {
                table.push(vec![z.to_string(), v.to_string()]);
            }
            Ok(Outcome::new(cert.with_output(json!(r), true), true).with_table(table))
        }
        LimitminCmd::Sweep(a) => {
            let cert = Certificate::new("limitmin sweep", json!({ "u": a.u, "horizon": a.horizon, "cap": a.cap }));
            let space = table_space(a.u, a.horizon, a.cap)
                .ok_or_else(|| CliError::Resource("table space exceeds 128 bits".into()))?;
            let r = settle(&cert, sweep_fallow(a.u, a.horizon, a.cap, 0, space))?;
            let mut table = Table::new(vec!["tables", "non_fallow", "first_non_fallow"]);
            table.push(vec![
                r.tables.to_string(),
                r.non_fallow.to_string(),
                r.first_non_fallow.map(|v| v.to_string()).unwrap_or_default(),
            ]);
            let clean = r.non_fallow == 0;
            let out = json!({
                "u": r.u,
                "horizon": r.horizon,
                "cap": r.cap,
                "tables": r.tables.to_string(),
                "non_fallow": r.non_fallow.to_string(),
                "first_non_fallow": r.first_non_fallow.map(|v| v.to_string()),
            });
            Ok(Outcome::new(cert.with_output(out, true), clean).with_table(table))
        }
    }
}

// ---------------------------------------------------------------- suite

#[derive(Debug, Subcommand)]
pub enum SuiteCmd {
    /// Run the property suite.
    Run(SuiteArgs),
}

#[derive(Debug, Args)]
pub struct SuiteArgs {
    /// Only checks whose name contains this text.
    #[arg(long)]
    pub filter: Option<String>,
}
