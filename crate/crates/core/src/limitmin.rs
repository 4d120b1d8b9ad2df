//! Finite-horizon versions of the limit-minimum constructions.
//!
//! A [`ValueTable`] holds `h(x, z)` for `x < u`, `z < horizon`. From it,
//! `q_{a,b}(x) = min_{a <= z < b} h(x, z)` and the coloring `f(a, b)` picks
//! the largest `x` maximizing `q_{a,b}`. Since windows end at `b <= horizon`,
//! `f` colors pairs of `[0, horizon]`.
//!
//! A [`ThetaTable`] holds a boolean `θ(a, b, y, z)` over a box, from which
//! `q_a(b, z)` and `r_a(z)` are evaluated exactly.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coloring::{fallow_violation, PairColoring};
use crate::finset::FinSet;

pub const DEFAULT_VALUE_CAP: u64 = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LimitminError {
    #[error("window [{a}, {b}) is not inside [0, {horizon})")]
    WindowOutOfRange { a: u64, b: u64, horizon: u64 },
    #[error("table does not cover the evaluation: {0}")]
    BoxTooSmall(String),
    #[error("malformed table: {0}")]
    Shape(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, LimitminError>;

fn default_cap() -> u64 {
    DEFAULT_VALUE_CAP
}

/// `h(x, z)` for `x < u` and `z < horizon`, all values at most `cap`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValueTable {
    u: usize,
    horizon: usize,
    #[serde(default = "default_cap")]
    cap: u64,
    rows: Vec<Vec<u64>>,
}

#[derive(Deserialize)]
struct ValueTableWire {
    u: usize,
    horizon: usize,
    #[serde(default = "default_cap")]
    cap: u64,
    rows: Vec<Vec<u64>>,
}

impl<'de> Deserialize<'de> for ValueTable {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let w = ValueTableWire::deserialize(d)?;
        ValueTable::with_cap(w.rows, w.horizon, w.cap)
            .and_then(|t| {
                if t.u == w.u {
                    Ok(t)
                } else {
                    Err(LimitminError::Shape(format!("declared u = {} but {} rows", w.u, t.u)))
                }
            })
            .map_err(serde::de::Error::custom)
    }
}

impl ValueTable {
    pub fn new(rows: Vec<Vec<u64>>, horizon: usize) -> Result<Self> {
        Self::with_cap(rows, horizon, DEFAULT_VALUE_CAP)
    }

    pub fn with_cap(rows: Vec<Vec<u64>>, horizon: usize, cap: u64) -> Result<Self> {
        for (x, row) in rows.iter().enumerate() {
            if row.len() != horizon {
                return Err(LimitminError::Shape(format!(
                    "row {x} has {} entries, horizon is {horizon}",
                    row.len()
                )));
            }
            if let Some(v) = row.iter().find(|&&v| v > cap) {
                return Err(LimitminError::Shape(format!("value {v} in row {x} exceeds cap {cap}")));
            }
        }
        Ok(ValueTable {
            u: rows.len(),
            horizon,
            cap,
            rows,
        })
    }

    pub fn from_fn(u: usize, horizon: usize, mut h: impl FnMut(usize, usize) -> u64) -> Result<Self> {
        let rows = (0..u).map(|x| (0..horizon).map(|z| h(x, z)).collect()).collect();
        Self::new(rows, horizon)
    }

    /// The table with mixed-radix rank `rank` over values `0..=cap`, cells
    /// in row-major order, least significant first.
    pub fn from_rank(u: usize, horizon: usize, cap: u64, mut rank: u128) -> Result<Self> {
        let base = cap as u128 + 1;
        let mut rows = vec![vec![0; horizon]; u];
        for row in rows.iter_mut() {
            for v in row.iter_mut() {
                *v = (rank % base) as u64;
                rank /= base;
            }
        }
        Self::with_cap(rows, horizon, cap)
    }

    pub fn u(&self) -> usize {
        self.u
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn cap(&self) -> u64 {
        self.cap
    }

    pub fn rows(&self) -> &[Vec<u64>] {
        &self.rows
    }

    pub fn get(&self, x: usize, z: usize) -> u64 {
        self.rows[x][z]
    }
}

/// `q_{a,b}(x)` for every `x < u`.
pub fn qmin(h: &ValueTable, a: usize, b: usize) -> Result<Vec<u64>> {
    if a >= b || b > h.horizon {
        return Err(LimitminError::WindowOutOfRange {
            a: a as u64,
            b: b as u64,
            horizon: h.horizon as u64,
        });
    }
    Ok(h.rows.iter().map(|row| *row[a..b].iter().min().unwrap()).collect())
}

/// Largest index of a maximal entry.
fn last_argmax(q: &[u64]) -> usize {
    let best = *q.iter().max().expect("u >= 1");
    q.iter().rposition(|&v| v == best).unwrap()
}

/// `f(a, b)` on the ground `[0, horizon]`, with `u` colors.
pub fn argmax_coloring(h: &ValueTable) -> Result<PairColoring> {
    if h.u == 0 {
        return Err(LimitminError::Precondition("argmax needs u >= 1".into()));
    }
    let ground = FinSet::interval(0, h.horizon as u64).expect("ordered bounds");
    // q_{a,b} for fixed a is a running minimum over b.
    let n = h.horizon + 1;
    let mut colors = vec![vec![0u32; n]; n];
    for a in 0..h.horizon {
        let mut q: Vec<u64> = h.rows.iter().map(|row| row[a]).collect();
        for b in a + 1..n {
            if b > a + 1 {
                for (x, row) in h.rows.iter().enumerate() {
                    q[x] = q[x].min(row[b - 1]);
                }
            }
            colors[a][b] = last_argmax(&q) as u32;
        }
    }
    Ok(PairColoring::from_fn(ground, h.u as u32, |a, b| colors[a as usize][b as usize])
        .expect("argmax is below u"))
}

/// Every triple `a < b < c` with `f(a, c) ∉ {f(a, b), f(b, c)}`.
pub fn fallow_scan(h: &ValueTable) -> Result<Vec<[u64; 3]>> {
    let f = argmax_coloring(h)?;
    Ok(fallow_triples(&f))
}

fn fallow_triples(f: &PairColoring) -> Vec<[u64; 3]> {
    let n = f.ground().len();
    let mut out = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                let ac = f.color_at(a, c);
                if ac != f.color_at(a, b) && ac != f.color_at(b, c) {
                    out.push([a as u64, b as u64, c as u64]);
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub a: u64,
    pub horizon: u64,
    /// Least `D > a` with `f(a, ·)` constant on `[D, horizon]`.
    pub witness: u64,
    pub value: u32,
    /// The constant tail spans at least two points.
    pub stable: bool,
}

pub fn stability_scan(h: &ValueTable, a: usize) -> Result<StabilityReport> {
    if h.horizon < 2 || a >= h.horizon - 1 {
        return Err(LimitminError::Precondition(format!(
            "stability scan needs a < horizon - 1 (a = {a}, horizon = {})",
            h.horizon
        )));
    }
    let f = argmax_coloring(h)?;
    let last = f.color_at(a, h.horizon);
    let mut d = h.horizon;
    while d > a + 1 && f.color_at(a, d - 1) == last {
        d -= 1;
    }
    Ok(StabilityReport {
        a: a as u64,
        horizon: h.horizon as u64,
        witness: d as u64,
        value: last,
        stable: d < h.horizon,
    })
}

/// Counts of an exhaustive or ranged sweep over value tables.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepReport {
    pub u: usize,
    pub horizon: usize,
    pub cap: u64,
    pub start: u128,
    pub end: u128,
    pub tables: u128,
    pub non_fallow: u128,
    pub first_non_fallow: Option<u128>,
}

/// Number of tables with the given shape and values `0..=cap`.
pub fn table_space(u: usize, horizon: usize, cap: u64) -> Option<u128> {
    (cap as u128 + 1).checked_pow((u * horizon) as u32)
}

/// Runs [`fallow_scan`] over the tables of rank `[start, end)`.
pub fn sweep_fallow(u: usize, horizon: usize, cap: u64, start: u128, end: u128) -> Result<SweepReport> {
    if u == 0 {
        return Err(LimitminError::Precondition("sweep needs u >= 1".into()));
    }
    let space = table_space(u, horizon, cap)
        .ok_or_else(|| LimitminError::Precondition("table space exceeds 128 bits".into()))?;
    let end = end.min(space);
    let start = start.min(end);
    let bad: Vec<u128> = (start as u64..end as u64)
        .into_par_iter()
        .filter_map(|r| {
            let t = ValueTable::from_rank(u, horizon, cap, r as u128).expect("in range");
            let f = argmax_coloring(&t).expect("u >= 1");
            fallow_violation(&f, f.ground()).expect("own ground").map(|_| r as u128)
        })
        .collect();
    Ok(SweepReport {
        u,
        horizon,
        cap,
        start,
        end,
        tables: end - start,
        non_fallow: bad.len() as u128,
        first_non_fallow: bad.first().copied(),
    })
}

/// Boolean `θ(a, b, y, z)` on `[0, bounds[0]) × … × [0, bounds[3])`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ThetaTable {
    bounds: [usize; 4],
    cells: Vec<Vec<Vec<Vec<bool>>>>,
}

#[derive(Deserialize)]
struct ThetaWire {
    bounds: [usize; 4],
    cells: Vec<Vec<Vec<Vec<bool>>>>,
}

impl<'de> Deserialize<'de> for ThetaTable {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let w = ThetaWire::deserialize(d)?;
        ThetaTable::new(w.bounds, w.cells).map_err(serde::de::Error::custom)
    }
}

impl ThetaTable {
    pub fn new(bounds: [usize; 4], cells: Vec<Vec<Vec<Vec<bool>>>>) -> Result<Self> {
        let shape_ok = cells.len() == bounds[0]
            && cells.iter().all(|by_b| {
                by_b.len() == bounds[1]
                    && by_b
                        .iter()
                        .all(|by_y| by_y.len() == bounds[2] && by_y.iter().all(|by_z| by_z.len() == bounds[3]))
            });
        if !shape_ok {
            return Err(LimitminError::Shape(format!("cells do not fill the box {bounds:?}")));
        }
        Ok(ThetaTable { bounds, cells })
    }

    pub fn from_fn(bounds: [usize; 4], mut theta: impl FnMut(usize, usize, usize, usize) -> bool) -> Self {
        let cells = (0..bounds[0])
            .map(|a| {
                (0..bounds[1])
                    .map(|b| (0..bounds[2]).map(|y| (0..bounds[3]).map(|z| theta(a, b, y, z)).collect()).collect())
                    .collect()
            })
            .collect();
        ThetaTable { bounds, cells }
    }

    pub fn bounds(&self) -> [usize; 4] {
        self.bounds
    }

    pub fn get(&self, a: usize, b: usize, y: usize, z: usize) -> bool {
        self.cells[a][b][y][z]
    }
}

/// `r_a(z)` along the box, with the `q_a(b, z)` it was computed from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RTrajectory {
    pub a: u64,
    /// `r[z]` for `z` in `0..r.len()`.
    pub r: Vec<u64>,
    /// `q[z][b]` for `z <= r.len()` and `b < r.len()`.
    pub q: Vec<Vec<u64>>,
}

/// `q_a(b, z)`: least `y <= z` with `∀b' <= b ∃y' <= y ∀z' <= z ¬θ(a, b', y', z')`,
/// or `z` if there is none. Needs `b`, `z` inside the box.
fn q_value(t: &ThetaTable, a: usize, b: usize, z: usize) -> u64 {
    // clear[b'][y'] = ∀z' <= z ¬θ(a, b', y', z')
    let clear = |bp: usize, yp: usize| (0..=z).all(|zp| !t.get(a, bp, yp, zp));
    (0..=z)
        .find(|&y| (0..=b).all(|bp| (0..=y).any(|yp| clear(bp, yp))))
        .unwrap_or(z) as u64
}

/// Evaluates `r_a(z)` for every `z` whose evaluation stays inside the box:
/// `r_a(z)` consults `q_a(b, z + 1)` for `b <= z`, hence `θ(a, b', y', z')`
/// with `b' <= z`, `y' <= z + 1`, `z' <= z + 1`.
pub fn r_trajectory(t: &ThetaTable, a: usize) -> Result<RTrajectory> {
    let [na, nb, ny, nz] = t.bounds;
    if a >= na {
        return Err(LimitminError::BoxTooSmall(format!("a = {a} is outside [0, {na})")));
    }
    let len = nb.min(ny.saturating_sub(1)).min(nz.saturating_sub(1));
    if len == 0 {
        return Err(LimitminError::BoxTooSmall(format!(
            "bounds {:?} leave no z with r_a(z) inside the box",
            t.bounds
        )));
    }
    let q: Vec<Vec<u64>> = (0..=len)
        .map(|z| (0..len).map(|b| q_value(t, a, b, z)).collect())
        .collect();
    let r = (0..len)
        .map(|z| {
            (0..=z)
                .find(|&b| q[z][b] < q[z + 1][b])
                .unwrap_or(z) as u64
        })
        .collect();
    Ok(RTrajectory { a: a as u64, r, q })
}
