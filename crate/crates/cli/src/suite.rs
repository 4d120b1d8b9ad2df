//! The property suite behind `suite run`.
//!
//! Every check returns a certificate whose `verified` flag is its pass/fail
//! status. Fixtures are drawn from the run seed, each check on its own
//! ChaCha stream, and the output carries no timings, so `--stable` output is
//! byte-identical across runs.

use emlab::certificate::Certificate;
use emlab::coloring::{
    bit_member, encode_family, hashed_coloring, indicator, is_fallow, is_transitive, pair_count, triple_coloring,
    Coloring, FnColoring, PairColoring,
};
use emlab::density::{check_em_dense, validate, DensityConfig, Mode, Verdict};
use emlab::largeness::{decompose_large, is_alpha_large, least_large_endpoint, oracle, LargenessError};
use emlab::limitmin::{fallow_scan, qmin, sweep_fallow, table_space, ValueTable};
use emlab::ordinal::Term;
use emlab::witness::{em_witness, em_witness_with, fallow_base_witness, EmPlan, GreedyChain, WholeSet};
use emlab::{FinSet, Ordinal};
use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::report::{Outcome, Table};

/// One named check.
pub struct Check {
    pub name: &'static str,
    pub about: &'static str,
    run: fn(&RunConfig) -> Certificate,
}

impl Check {
    pub fn run(&self, cfg: &RunConfig) -> Certificate {
        (self.run)(cfg)
    }
}

static CHECKS: [Check; 8] = [
    Check {
        name: "hardy-agreement",
        about: "least large endpoints: closed forms against stepping",
        run: hardy_agreement,
    },
    Check {
        name: "base-extractor",
        about: "fallow base witnesses for random 4-colorings of {4..3130}",
        run: base_extractor,
    },
    Check {
        name: "lemma-equivalence",
        about: "encodings and indicators on 4-point grounds",
        run: lemma_equivalence,
    },
    Check {
        name: "decomposition",
        about: "decompose_large succeeds exactly on large sets",
        run: decomposition,
    },
    Check {
        name: "density-base",
        about: "EM-density at levels 0 and 1 on small intervals",
        run: density_base,
    },
    Check {
        name: "triple-coloring",
        about: "no quadruple homogeneously 0 for the triple coloring",
        run: triple_check,
    },
    Check {
        name: "limitmin-identities",
        about: "window minima, forward argmax and small-u fallowness",
        run: limitmin_identities,
    },
    Check {
        name: "witness-pipeline",
        about: "EM witnesses at n = 1 and n = 2",
        run: witness_pipeline,
    },
];

pub fn checks() -> &'static [Check] {
    &CHECKS
}

/// Runs the check called `name`.
pub fn run_check(name: &str, cfg: &RunConfig) -> Option<Certificate> {
    CHECKS.iter().find(|c| c.name == name).map(|c| c.run(cfg))
}

/// Runs every check whose name contains `filter`, in a fixed order.
pub fn run(cfg: &RunConfig, filter: Option<&str>) -> Vec<Certificate> {
    CHECKS
        .iter()
        .filter(|c| filter.is_none_or(|f| c.name.contains(f)))
        .map(|c| c.run(cfg))
        .collect()
}

pub fn run_outcome(cfg: &RunConfig, filter: Option<&str>) -> Outcome {
    let results = run(cfg, filter);
    let passed = results.iter().filter(|c| c.verified).count();
    let failed = results.len() - passed;
    let mut table = Table::new(vec!["check", "verified", "violations"]);
    for c in &results {
        table.push(vec![c.op.clone(), c.verified.to_string(), c.violations.len().to_string()]);
    }
    let ok = failed == 0 && !results.is_empty();
    let cert = Certificate::new("suite run", json!({ "seed": cfg.seed, "filter": filter })).with_output(
        json!({ "checks": results, "passed": passed, "failed": failed }),
        ok,
    );
    Outcome::new(cert, ok).with_table(table)
}

/// A generator for fixture `stream` of the run seed.
pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn interval(a: u64, b: u64) -> FinSet {
    FinSet::interval(a, b).expect("a <= b")
}

// ---------------------------------------------------------------- hardy

const MAX_BATCHES: u64 = 1_000_000;
/// Unit stepping is attempted when the endpoint is at most this far from `a`.
const UNIT_SPAN: u64 = 2_000_000;

/// `(α, a)` pairs: finite `k <= 20`, `ω·k` for `k <= 8` with `a` in `4..=12`,
/// and `ω²`, `ω²·2` with `a` in `4..=10`.
pub fn hardy_cases() -> Vec<(Ordinal, u64)> {
    let mut v = Vec::new();
    for k in 1..=20 {
        for a in 4..=12 {
            v.push((Ordinal::finite(k), a));
        }
    }
    for k in 1..=8 {
        for a in 4..=12 {
            v.push((Ordinal::monomial(1, k), a));
        }
    }
    for k in 1..=2 {
        for a in 4..=10 {
            v.push((Ordinal::monomial(2, k), a));
        }
    }
    v
}

fn hardy_agreement(cfg: &RunConfig) -> Certificate {
    let cases = hardy_cases();
    let rows: Vec<(Value, bool)> = cases
        .par_iter()
        .map(|(alpha, a)| {
            let closed = least_large_endpoint(alpha, *a, cfg.digit_budget);
            let batched = oracle::endpoint_by_batched_steps(alpha, *a, MAX_BATCHES);
            let unit = match &closed {
                Ok(n) if *n <= BigUint::from(a + UNIT_SPAN) => {
                    Some(oracle::endpoint_by_unit_steps(alpha, *a, UNIT_SPAN + 1).map(BigUint::from))
                }
                _ => None,
            };
            let text = |r: &Result<_, LargenessError>| match r {
                Ok(n) => json!(format!("{n}")),
                Err(e) => json!(format!("error: {e}")),
            };
            let agree = match (&closed, &batched) {
                (Ok(c), Ok(b)) => c == b && unit.as_ref().is_none_or(|u| matches!(u, Ok(u) if c == u)),
                _ => false,
            };
            let row = json!({
                "alpha": alpha,
                "a": a,
                "closed_form": text(&closed),
                "batched_steps": text(&batched),
                "unit_steps": unit.as_ref().map(text),
                "agree": agree,
            });
            (row, agree)
        })
        .collect();
    let mut cert = Certificate::new(
        "suite hardy-agreement",
        json!({ "cases": cases.len(), "digit_budget": cfg.digit_budget }),
    );
    for (row, agree) in &rows {
        if !agree {
            cert = cert.violation(row.clone());
        }
    }
    let ok = cert.violations.is_empty();
    let rows: Vec<Value> = rows.into_iter().map(|(r, _)| r).collect();
    cert.with_output(json!({ "rows": rows }), ok)
}

// ---------------------------------------------------------------- base

pub const BASE_SET: (u64, u64) = (4, 3130);
pub const BASE_COLORINGS: usize = 200;
pub const PIPELINE_SEEDS: usize = 50;

/// Seeds of the hashed colorings used by the base and pipeline checks.
pub fn coloring_seeds(seed: u64, which: u64, count: usize) -> Vec<u64> {
    let mut rng = stream(seed, which);
    (0..count).map(|_| rng.random()).collect()
}

fn base_extractor(cfg: &RunConfig) -> Certificate {
    let x = interval(BASE_SET.0, BASE_SET.1);
    let seeds = coloring_seeds(cfg.seed, 2, BASE_COLORINGS);
    let omega = Ordinal::omega();
    let rows: Vec<(Value, bool)> = seeds
        .par_iter()
        .map(|&s| {
            let p = hashed_coloring(s, 4);
            match fallow_base_witness(&x, &p, true) {
                Ok(y) => {
                    let ok = y.len() == 5
                        && y.min().ok() == Some(4)
                        && is_alpha_large(&y, &omega).unwrap_or(false)
                        && is_fallow(&p, &y).unwrap_or(false)
                        && is_transitive(&p, &y).unwrap_or(false);
                    (json!({ "seed": s, "witness": y, "ok": ok }), ok)
                }
                Err(e) => (json!({ "seed": s, "error": e.to_string(), "ok": false }), false),
            }
        })
        .collect();
    let passed = rows.iter().filter(|r| r.1).count();
    let mut cert = Certificate::new(
        "suite base-extractor",
        json!({ "set": { "from": BASE_SET.0, "to": BASE_SET.1 }, "colors": 4, "colorings": BASE_COLORINGS }),
    );
    for (row, ok) in &rows {
        if !ok {
            cert = cert.violation(row.clone());
        }
    }
    let ok = passed == BASE_COLORINGS;
    let rows: Vec<Value> = rows.into_iter().map(|(r, _)| r).collect();
    cert.with_output(json!({ "passed": passed, "runs": rows }), ok)
}

// ---------------------------------------------------------------- lemma

pub const LEMMA_GROUND: (u64, u64) = (4, 7);

fn all_on(ground: &FinSet, colors: u32) -> Vec<PairColoring> {
    let space = (colors as u64).pow(pair_count(ground.len()) as u32);
    (0..space)
        .map(|r| PairColoring::from_rank(ground.clone(), colors, r).expect("rank in range"))
        .collect()
}

fn lemma_equivalence(_cfg: &RunConfig) -> Certificate {
    let g = interval(LEMMA_GROUND.0, LEMMA_GROUND.1);
    let singles = all_on(&g, 2);
    let mut families_out = Vec::new();
    let mut cert = Certificate::new(
        "suite lemma-equivalence",
        json!({ "ground": g, "family_sizes": [1, 2], "colors": [1, 2, 3, 4] }),
    );
    for members in 1..=2usize {
        let total = singles.len().pow(members as u32);
        let (fallow, bad) = (0..total)
            .into_par_iter()
            .map(|mut r| {
                let family: Vec<PairColoring> = (0..members)
                    .map(|_| {
                        let c = singles[r % singles.len()].clone();
                        r /= singles.len();
                        c
                    })
                    .collect();
                let c = encode_family(&family).expect("family of 2-colorings");
                let round_trip = (0..members).all(|i| bit_member(&c, i as u32) == family[i]);
                let f = is_fallow(&c, &g).expect("ground");
                let ind = (0..c.color_count()).all(|i| is_transitive(&indicator(&c, i).expect("color"), &g).expect("ground"));
                (f as u64, (!round_trip || f != ind) as u64)
            })
            .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
        families_out.push(json!({ "members": members, "families": total, "fallow": fallow, "exceptions": bad }));
        if bad > 0 {
            cert = cert.violation(json!({ "members": members, "exceptions": bad }));
        }
    }
    let mut colorings_out = Vec::new();
    for colors in 1..=4u32 {
        let all = all_on(&g, colors);
        let (fallow, bad) = all
            .par_iter()
            .map(|c| {
                let f = is_fallow(c, &g).expect("ground");
                let mut ind = true;
                let mut exact = true;
                for i in 0..colors {
                    let d = indicator(c, i).expect("color");
                    exact &= d.values().iter().zip(c.values()).all(|(&b, &v)| b == (v == i) as u32);
                    ind &= is_transitive(&d, &g).expect("ground");
                }
                (f as u64, (!exact || f != ind) as u64)
            })
            .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
        colorings_out.push(json!({ "colors": colors, "colorings": all.len(), "fallow": fallow, "exceptions": bad }));
        if bad > 0 {
            cert = cert.violation(json!({ "colors": colors, "exceptions": bad }));
        }
    }
    let ok = cert.violations.is_empty();
    cert.with_output(json!({ "families": families_out, "colorings": colorings_out }), ok)
}

// ---------------------------------------------------------------- decomposition

pub const DECOMPOSITION_FIXTURES: usize = 500;

/// Random sum below `ω^3·2`, cut into consecutive parts listed trailing-first.
fn random_parts(rng: &mut ChaCha8Rng) -> Vec<Ordinal> {
    let mut terms: Vec<(u32, u64)> = Vec::new();
    for e in (0..3u32).rev() {
        if rng.random_bool(0.6) {
            terms.push((e, rng.random_range(1..=4)));
        }
    }
    if rng.random_bool(0.15) {
        terms.insert(0, (3, 1));
    }
    if terms.is_empty() {
        terms.push((0, rng.random_range(1..=4)));
    }
    let units: Vec<(u32, u64)> = terms.iter().flat_map(|&(e, k)| (0..k).map(move |_| (e, 1))).collect();
    let mut parts: Vec<Vec<(u32, u64)>> = Vec::new();
    for u in units.into_iter().rev() {
        match parts.last_mut() {
            Some(p) if rng.random_bool(0.5) => p.insert(0, u),
            _ => parts.push(vec![u]),
        }
    }
    parts
        .into_iter()
        .map(|p| {
            let mut merged: Vec<(u32, u64)> = Vec::new();
            for (e, k) in p {
                match merged.last_mut() {
                    Some(last) if last.0 == e => last.1 += k,
                    _ => merged.push((e, k)),
                }
            }
            Ordinal::from_terms(merged.into_iter().map(|(e, k)| Term::new(e, k)).collect()).expect("CNF order")
        })
        .collect()
}

fn random_set(rng: &mut ChaCha8Rng) -> FinSet {
    let min = rng.random_range(0..9u64);
    let len = rng.random_range(1..=10_000usize);
    let sparse = rng.random_bool(0.3);
    let mut x = min;
    let mut v = Vec::with_capacity(len);
    for _ in 0..len {
        v.push(x);
        x += if sparse { rng.random_range(1..4) } else { 1 };
    }
    FinSet::new(v).expect("increasing")
}

/// `(X, parts)` pairs, parts trailing-first, with `|X| <= 10^4`.
pub fn decomposition_fixtures(seed: u64) -> Vec<(FinSet, Vec<Ordinal>)> {
    let mut rng = stream(seed, 4);
    (0..DECOMPOSITION_FIXTURES)
        .map(|_| {
            let parts = random_parts(&mut rng);
            (random_set(&mut rng), parts)
        })
        .collect()
}

/// `α_{k-1} + … + α_0` for trailing-first parts.
pub fn sum_of_parts(parts: &[Ordinal]) -> Ordinal {
    Ordinal::make_sum(&parts.iter().rev().cloned().collect::<Vec<_>>()).expect("parts are in CNF")
}

fn decomposition(cfg: &RunConfig) -> Certificate {
    let fixtures = decomposition_fixtures(cfg.seed);
    let rows: Vec<(u8, Option<Value>)> = fixtures
        .par_iter()
        .enumerate()
        .map(|(i, (set, parts))| {
            let sum = sum_of_parts(parts);
            let exception = |why: &str| json!({ "fixture": i, "sum": sum, "len": set.len(), "why": why });
            let large = match is_alpha_large(set, &sum) {
                Ok(l) => l,
                Err(e) => return (2, Some(exception(&e.to_string()))),
            };
            match decompose_large(set, parts) {
                Ok(blocks) => {
                    let flat: Vec<u64> = blocks.iter().flat_map(|b| b.iter()).collect();
                    let reverified = blocks.len() == parts.len()
                        && flat == set.as_slice()
                        && blocks.iter().zip(parts).all(|(b, p)| is_alpha_large(b, p).unwrap_or(false));
                    match (large, reverified) {
                        (true, true) => (1, None),
                        (false, _) => (2, Some(exception("decomposed a set that is not large"))),
                        (true, false) => (2, Some(exception("blocks do not re-verify"))),
                    }
                }
                Err(LargenessError::InsufficientLargeness { .. }) if !large => (0, None),
                Err(e) => (2, Some(exception(&e.to_string()))),
            }
        })
        .collect();
    let succeeded = rows.iter().filter(|r| r.0 == 1).count();
    let refused = rows.iter().filter(|r| r.0 == 0).count();
    let mut cert = Certificate::new("suite decomposition", json!({ "fixtures": fixtures.len() }));
    for (_, e) in rows {
        if let Some(e) = e {
            cert = cert.violation(e);
        }
    }
    let exceptions = cert.violations.len();
    cert.with_output(
        json!({ "succeeded": succeeded, "refused": refused, "exceptions": exceptions }),
        exceptions == 0,
    )
}

// ---------------------------------------------------------------- density

/// `4^10`, the coloring budget of the level-1 check.
pub const DENSITY_BUDGET: u64 = 1 << 20;

fn density_base(cfg: &RunConfig) -> Certificate {
    let config = DensityConfig {
        mode: Mode::Exact,
        seed: cfg.seed,
        budget: DENSITY_BUDGET.min(cfg.enumeration_budget),
        ..DensityConfig::default()
    };
    let mut cert = Certificate::new("suite density-base", json!({ "budget": config.budget }));
    let cases = [
        (interval(4, 8), 0, Verdict::True),
        (interval(3, 7), 0, Verdict::False),
        (interval(4, 8), 1, Verdict::False),
    ];
    let mut out = Vec::new();
    for (set, m, expected) in cases {
        match check_em_dense(&set, m, &config) {
            Ok(d) => {
                let valid = validate::validate(&d);
                if d.verdict != expected || valid.is_err() {
                    cert = cert.violation(json!({
                        "set": set,
                        "m": m,
                        "expected": expected,
                        "got": d.verdict,
                        "validator": valid.err(),
                    }));
                }
                out.push(json!(d));
            }
            Err(e) => {
                cert = cert.violation(json!({ "set": set, "m": m, "error": e.to_string() }));
                out.push(Value::Null);
            }
        }
    }
    let ok = cert.violations.is_empty();
    cert.with_output(json!({ "certificates": out }), ok)
}

// ---------------------------------------------------------------- triple

fn triple_check(_cfg: &RunConfig) -> Certificate {
    let g = interval(LEMMA_GROUND.0, LEMMA_GROUND.1);
    let mut cert = Certificate::new("suite triple-coloring", json!({ "ground": g, "colors": [1, 2, 3, 4] }));
    let mut rows = Vec::new();
    for colors in 1..=4u32 {
        let all = all_on(&g, colors);
        let zero: Vec<u64> = all
            .par_iter()
            .enumerate()
            .filter(|(_, c)| triple_coloring(c).zero_homogeneous_quadruple().is_some())
            .map(|(r, _)| r as u64)
            .collect();
        rows.push(json!({ "colors": colors, "colorings": all.len(), "zero_quadruples": zero.len() }));
        if !zero.is_empty() {
            cert = cert.violation(json!({ "colors": colors, "ranks": zero }));
        }
    }
    let ok = cert.violations.is_empty();
    cert.with_output(json!({ "rows": rows }), ok)
}

// ---------------------------------------------------------------- limitmin

pub const RANDOM_TABLES: usize = 10_000;
pub const RANDOM_TABLE_CAP: u64 = 7;

/// Tables with `u` in `1..=5`, horizon in `2..=12` and values `0..=7`.
pub fn random_value_tables(seed: u64) -> Vec<ValueTable> {
    let mut rng = stream(seed, 7);
    (0..RANDOM_TABLES)
        .map(|_| {
            let u = rng.random_range(1..=5usize);
            let horizon = rng.random_range(2..=12usize);
            let rows = (0..u)
                .map(|_| (0..horizon).map(|_| rng.random_range(0..=RANDOM_TABLE_CAP)).collect())
                .collect();
            ValueTable::with_cap(rows, horizon, RANDOM_TABLE_CAP).expect("shape")
        })
        .collect()
}

/// The three-row table on which the argmax coloring is not fallow.
pub fn candidate_table() -> ValueTable {
    ValueTable::new(vec![vec![3, 0], vec![2, 2], vec![0, 3]], 2).expect("shape")
}

fn maximizers(q: &[u64]) -> Vec<bool> {
    let best = q.iter().copied().max().unwrap_or(0);
    q.iter().map(|&v| v == best).collect()
}

/// `(windows checked, splitting failures, argmax failures)` for one table.
fn table_identities(h: &ValueTable) -> (u64, u64, u64) {
    let n = h.horizon();
    let mut q = vec![vec![Vec::new(); n + 1]; n + 1];
    for (a, row) in q.iter_mut().enumerate() {
        for (b, cell) in row.iter_mut().enumerate().skip(a + 1) {
            *cell = qmin(h, a, b).expect("window inside the horizon");
        }
    }
    let (mut checked, mut split, mut argmax) = (0, 0, 0);
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..=n {
                checked += 1;
                let joined: Vec<u64> = q[a][b].iter().zip(&q[b][c]).map(|(x, y)| *x.min(y)).collect();
                if joined != q[a][c] {
                    split += 1;
                }
                let (l, r, w) = (maximizers(&q[a][b]), maximizers(&q[b][c]), maximizers(&q[a][c]));
                if (0..h.u()).any(|x| l[x] && r[x] && !w[x]) {
                    argmax += 1;
                }
            }
        }
    }
    (checked, split, argmax)
}

fn limitmin_identities(cfg: &RunConfig) -> Certificate {
    let tables = random_value_tables(cfg.seed);
    let (checked, split, argmax) = tables
        .par_iter()
        .map(table_identities)
        .reduce(|| (0, 0, 0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2));
    let mut cert = Certificate::new(
        "suite limitmin-identities",
        json!({ "random_tables": RANDOM_TABLES, "value_cap": RANDOM_TABLE_CAP, "sweep": { "u": [1, 2], "horizon": 5, "cap": 3 } }),
    );
    if split > 0 {
        cert = cert.violation(json!({ "window_splitting_failures": split }));
    }
    if argmax > 0 {
        cert = cert.violation(json!({ "forward_argmax_failures": argmax }));
    }
    let mut sweeps = Vec::new();
    for u in 1..=2 {
        let space = table_space(u, 5, 3).expect("small");
        match sweep_fallow(u, 5, 3, 0, space) {
            Ok(r) => {
                if r.non_fallow > 0 || r.tables != space {
                    cert = cert.violation(json!({ "u": u, "non_fallow": r.non_fallow.to_string() }));
                }
                sweeps.push(json!({ "u": u, "tables": r.tables.to_string(), "non_fallow": r.non_fallow.to_string() }));
            }
            Err(e) => cert = cert.violation(json!({ "u": u, "error": e.to_string() })),
        }
    }
    // Reported, not asserted.
    let candidate = candidate_table();
    let scan = fallow_scan(&candidate).map_err(|e| e.to_string());
    let ok = cert.violations.is_empty();
    cert.with_output(
        json!({
            "windows_checked": checked,
            "window_splitting_failures": split,
            "forward_argmax_failures": argmax,
            "sweeps": sweeps,
            "candidate": { "table": candidate, "fallow_scan": scan.as_ref().ok(), "error": scan.as_ref().err() },
        }),
        ok,
    )
}

// ---------------------------------------------------------------- witness

/// Blocks `{3..6}, {7..14}, {15..30}, …`: each the shortest ω-large interval
/// after the previous one.
pub fn block_of(x: u64) -> u64 {
    let (mut lo, mut b) = (3u64, 0u64);
    loop {
        let hi = 2 * lo;
        if x <= hi {
            return b;
        }
        lo = hi + 1;
        b += 1;
    }
}

/// Color 0 inside a block, otherwise the parity of the lower point's block.
pub fn layered_color(x: u64, y: u64) -> u32 {
    let (bx, by) = (block_of(x.min(y)), block_of(x.max(y)));
    if bx == by {
        0
    } else {
        (bx % 2) as u32
    }
}

/// The nested fixture `{3..510}`.
pub fn nested_fixture() -> FinSet {
    interval(3, 510)
}

fn witness_pipeline(cfg: &RunConfig) -> Certificate {
    let x = interval(BASE_SET.0, BASE_SET.1);
    let seeds = coloring_seeds(cfg.seed, 8, PIPELINE_SEEDS);
    let mut cert = Certificate::new(
        "suite witness-pipeline",
        json!({ "set": { "from": BASE_SET.0, "to": BASE_SET.1 }, "seeds": PIPELINE_SEEDS, "nested_fixture": { "from": 3, "to": 510 } }),
    );
    let mismatched: Vec<u64> = seeds
        .par_iter()
        .filter(|&&s| {
            let p = hashed_coloring(s, 4);
            let via_em = em_witness(&x, &p, 1, &GreedyChain).map(|h| serde_json::to_vec(&h).ok());
            let direct = fallow_base_witness(&x, &p, true).map(|h| serde_json::to_vec(&h).ok());
            !matches!((via_em, direct), (Ok(Some(a)), Ok(Some(b))) if a == b)
        })
        .copied()
        .collect();
    if !mismatched.is_empty() {
        cert = cert.violation(json!({ "n1_mismatch_seeds": mismatched }));
    }

    let layered = FnColoring::new(2, layered_color);
    let toy = match em_witness_with(&nested_fixture(), &layered, 2, &WholeSet, &EmPlan::minimal()) {
        Ok(h) => {
            let fallow = is_fallow(&layered, &h).unwrap_or(false);
            let large = is_alpha_large(&h, &Ordinal::omega_pow(2)).unwrap_or(false);
            if !(fallow && large) {
                cert = cert.violation(json!({ "toy": { "fallow": fallow, "large": large } }));
            }
            json!({ "witness": h, "fallow": fallow, "large": large })
        }
        Err(e) => {
            cert = cert.violation(json!({ "toy_error": e.to_string() }));
            Value::Null
        }
    };

    let p = hashed_coloring(seeds[0], 4);
    let genuine = match em_witness(&x, &p, 2, &GreedyChain) {
        Err(e) if e.is_shortfall() => json!({ "shortfall": e.to_string() }),
        Err(e) => {
            cert = cert.violation(json!({ "genuine_unexpected_error": e.to_string() }));
            Value::Null
        }
        Ok(h) => {
            cert = cert.violation(json!({ "genuine_unexpected_success": h }));
            Value::Null
        }
    };
    let ok = cert.violations.is_empty();
    cert.with_output(
        json!({
            "n1_matches": PIPELINE_SEEDS - mismatched.len(),
            "toy": toy,
            "genuine_n2": genuine,
        }),
        ok,
    )
}
