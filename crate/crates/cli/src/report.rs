//! Exit codes, error classification and output rendering.

use std::io::Write;

use emlab::certificate::Certificate;
use emlab::coloring::ColoringError;
use emlab::density::DensityError;
use emlab::finset::SetError;
use emlab::largeness::LargenessError;
use emlab::limitmin::LimitminError;
use emlab::ordinal::OrdinalError;
use emlab::witness::WitnessError;
use serde_json::{json, Value};
use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FALSE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Resource(String),
    /// The operation ran and failed; the certificate says how.
    #[error("operation failed")]
    Failed(Box<Certificate>),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Resource(_) => EXIT_RESOURCE,
            CliError::Failed(_) => EXIT_FALSE,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// How an error from the library should surface.
pub enum Class {
    Usage(String),
    Resource(String),
    Fail(String),
}

pub trait Classify: std::fmt::Display {
    fn class(&self) -> Class;
}

impl Classify for OrdinalError {
    fn class(&self) -> Class {
        match self {
            OrdinalError::CapExceeded { .. } => Class::Resource(self.to_string()),
            _ => Class::Usage(self.to_string()),
        }
    }
}

impl Classify for SetError {
    fn class(&self) -> Class {
        Class::Usage(self.to_string())
    }
}

impl Classify for ColoringError {
    fn class(&self) -> Class {
        Class::Usage(self.to_string())
    }
}

impl Classify for LargenessError {
    fn class(&self) -> Class {
        match self {
            LargenessError::ResourceLimit(_) => Class::Resource(self.to_string()),
            LargenessError::InsufficientLargeness { .. } => Class::Fail(self.to_string()),
            LargenessError::Precondition(_) | LargenessError::Set(_) => Class::Usage(self.to_string()),
            LargenessError::Ordinal(e) => e.class(),
        }
    }
}

impl Classify for WitnessError {
    fn class(&self) -> Class {
        match self {
            WitnessError::Largeness(e) => e.class(),
            WitnessError::Coloring(e) => e.class(),
            WitnessError::Set(e) => e.class(),
            WitnessError::Precondition(_) => Class::Usage(self.to_string()),
            _ => Class::Fail(self.to_string()),
        }
    }
}

impl Classify for DensityError {
    fn class(&self) -> Class {
        match self {
            DensityError::BudgetExceeded { .. } => Class::Resource(self.to_string()),
            DensityError::Largeness(e) => e.class(),
            DensityError::Coloring(e) => e.class(),
            DensityError::Set(e) => e.class(),
            DensityError::Precondition(_) => Class::Usage(self.to_string()),
        }
    }
}

impl Classify for LimitminError {
    fn class(&self) -> Class {
        match self {
            LimitminError::BoxTooSmall(_) => Class::Fail(self.to_string()),
            _ => Class::Usage(self.to_string()),
        }
    }
}

/// Unwraps `r`, turning failures into a failed copy of `cert`.
pub fn settle<T, E: Classify>(cert: &Certificate, r: Result<T, E>) -> CliResult<T> {
    r.map_err(|e| match e.class() {
        Class::Usage(m) => CliError::Usage(m),
        Class::Resource(m) => CliError::Resource(m),
        Class::Fail(m) => {
            let mut c = cert.clone();
            c.output = Value::Null;
            c.verified = false;
            c.violations.push(json!({ "error": m }));
            CliError::Failed(Box::new(c))
        }
    })
}

/// Rows for CSV output, with a fixed header.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Table { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

/// A finished command.
pub struct Outcome {
    pub certificate: Certificate,
    /// `false` exits with [`EXIT_FALSE`].
    pub passed: bool,
    pub table: Option<Table>,
}

impl Outcome {
    pub fn new(certificate: Certificate, passed: bool) -> Self {
        Outcome {
            certificate,
            passed,
            table: None,
        }
    }

    pub fn with_table(mut self, table: Table) -> Self {
        self.table = Some(table);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// `op,verified,output` for commands without a natural table.
fn fallback_table(c: &Certificate) -> Table {
    let mut t = Table::new(vec!["op", "verified", "output"]);
    t.push(vec![c.op.clone(), c.verified.to_string(), c.output.to_string()]);
    t
}

pub fn render(out: &mut dyn Write, certificate: &Certificate, table: Option<&Table>, format: Format) -> std::io::Result<()> {
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, certificate)?;
            writeln!(out)
        }
        Format::Csv => {
            let owned;
            let table = match table {
                Some(t) => t,
                None => {
                    owned = fallback_table(certificate);
                    &owned
                }
            };
            let mut w = csv::Writer::from_writer(out);
            w.write_record(&table.header)?;
            for row in &table.rows {
                w.write_record(row)?;
            }
            w.flush()
        }
    }
}
