//! Parsing of command-line values. Any value may be given as `@path` to read
//! it from a file.

use emlab::coloring::{hashed_coloring, Coloring, FnColoring, PairColoring};
use emlab::limitmin::{ThetaTable, ValueTable};
use emlab::{FinSet, Ordinal};
use serde::de::DeserializeOwned;
use serde_json::{json, Value};

use crate::report::{CliError, CliResult};

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// The text of `arg`, or the contents of the file it names after `@`.
pub fn resolve(arg: &str) -> CliResult<String> {
    match arg.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {path}: {e}"))),
        None => Ok(arg.to_string()),
    }
}

fn json<T: DeserializeOwned>(what: &str, text: &str) -> CliResult<T> {
    serde_json::from_str(text).map_err(|e| usage(format!("bad {what}: {e}")))
}

/// A JSON array, a `{"from": a, "to": b}` object, or `a..b` (inclusive).
pub fn set(arg: &str) -> CliResult<FinSet> {
    let text = resolve(arg)?;
    let text = text.trim();
    if let Some((a, b)) = text.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| usage(format!("bad set range {text:?}")))?;
        let b: u64 = b.trim().parse().map_err(|_| usage(format!("bad set range {text:?}")))?;
        return FinSet::interval(a, b).map_err(|e| usage(e.to_string()));
    }
    json("set", text)
}

pub fn ordinal(arg: &str) -> CliResult<Ordinal> {
    let text = resolve(arg)?;
    text.trim().parse().map_err(|e: emlab::ordinal::OrdinalError| usage(e.to_string()))
}

/// Half-open rank range written `start..end`.
pub fn rank_range(text: &str) -> CliResult<(u64, u64)> {
    let bad = || usage(format!("bad rank range {text:?}, expected start..end"));
    let (a, b) = text.split_once("..").ok_or_else(bad)?;
    let a = a.trim().parse().map_err(|_| bad())?;
    let b = b.trim().parse().map_err(|_| bad())?;
    if a > b {
        return Err(bad());
    }
    Ok((a, b))
}

pub fn value_table(arg: &str) -> CliResult<ValueTable> {
    json("value table", &resolve(arg)?)
}

pub fn theta_table(arg: &str) -> CliResult<ThetaTable> {
    json("theta table", &resolve(arg)?)
}

pub fn coloring_family(arg: &str) -> CliResult<Vec<PairColoring>> {
    json("coloring family", &resolve(arg)?)
}

/// Certificates written by earlier runs, one per argument.
pub fn json_file<T: DeserializeOwned>(what: &str, arg: &str) -> CliResult<T> {
    json(what, &resolve(arg)?)
}

/// A pair coloring, given explicitly or by a generator.
///
/// - `hash:SEED:COLORS`: pseudo-random colors from a seed,
/// - `const:COLORS:COLOR`: one color everywhere,
/// - `mod:COLORS`: `(x + y) mod COLORS`,
/// - otherwise a JSON object `{"ground", "colors", "pairs": [[x, y, c], ...]}`.
#[derive(Debug, Clone)]
pub enum ColoringSpec {
    Explicit(PairColoring),
    Hash { seed: u64, colors: u32 },
    Const { colors: u32, color: u32 },
    Mod { colors: u32 },
}

fn field<T: std::str::FromStr>(text: &str, part: Option<&str>) -> CliResult<T> {
    part.and_then(|p| p.parse().ok())
        .ok_or_else(|| usage(format!("bad coloring generator {text:?}")))
}

impl ColoringSpec {
    pub fn parse(arg: &str) -> CliResult<Self> {
        let text = resolve(arg)?;
        let text = text.trim();
        let mut parts = text.split(':');
        let spec = match parts.next() {
            Some("hash") => ColoringSpec::Hash {
                seed: field(text, parts.next())?,
                colors: field(text, parts.next())?,
            },
            Some("const") => ColoringSpec::Const {
                colors: field(text, parts.next())?,
                color: field(text, parts.next())?,
            },
            Some("mod") => ColoringSpec::Mod {
                colors: field(text, parts.next())?,
            },
            _ => return Ok(ColoringSpec::Explicit(json("coloring", text)?)),
        };
        if parts.next().is_some() {
            return Err(usage(format!("bad coloring generator {text:?}")));
        }
        match spec {
            ColoringSpec::Hash { colors: 0, .. } | ColoringSpec::Mod { colors: 0 } => {
                Err(usage("a coloring needs at least one color"))
            }
            ColoringSpec::Const { colors, color } if color >= colors => {
                Err(usage(format!("color {color} is not below {colors}")))
            }
            s => Ok(s),
        }
    }

    /// The coloring as a trait object over its whole domain.
    pub fn build(&self) -> Box<dyn Coloring> {
        match *self {
            ColoringSpec::Explicit(ref c) => Box::new(c.clone()),
            ColoringSpec::Hash { seed, colors } => Box::new(hashed_coloring(seed, colors)),
            ColoringSpec::Const { colors, color } => Box::new(FnColoring::new(colors, move |_, _| color)),
            ColoringSpec::Mod { colors } => Box::new(FnColoring::new(colors, move |x, y| ((x + y) % colors as u64) as u32)),
        }
    }

    /// Explicit colorings keep their ground; generators are tabulated on `ground`.
    pub fn materialize(&self, ground: Option<&FinSet>) -> CliResult<PairColoring> {
        if let ColoringSpec::Explicit(c) = self {
            return match ground {
                Some(g) if g != c.ground() => c.restrict(g).map_err(|e| usage(e.to_string())),
                _ => Ok(c.clone()),
            };
        }
        let ground = ground.ok_or_else(|| usage("a generated coloring needs --set for its ground"))?;
        let b = self.build();
        PairColoring::from_fn(ground.clone(), b.color_count(), |x, y| b.color(x, y)).map_err(|e| usage(e.to_string()))
    }

    /// How the coloring is echoed in certificate inputs.
    pub fn describe(&self) -> Value {
        match self {
            ColoringSpec::Explicit(c) => json!(c),
            ColoringSpec::Hash { seed, colors } => json!(format!("hash:{seed}:{colors}")),
            ColoringSpec::Const { colors, color } => json!(format!("const:{colors}:{color}")),
            ColoringSpec::Mod { colors } => json!(format!("mod:{colors}")),
        }
    }
}
