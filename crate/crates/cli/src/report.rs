//! JSON report layouts. Field order here is the key order in the output.

use std::time::Duration;

use eigcount::{Complex64, CountReport, EigenpairSet, SearchResult, Timings, Warning};
use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

/// `[re, im]`
pub type Pair = [f64; 2];

pub fn pair(z: Complex64) -> Pair {
    [z.re, z.im]
}

#[derive(Debug, Serialize)]
pub struct RunConfigEcho {
    pub a: String,
    pub b: Option<String>,
    pub center: Pair,
    pub radius: f64,
    pub q: usize,
    pub p: usize,
    pub alpha: f64,
    pub seed: u64,
    pub max_rounds: usize,
    pub tau_rank: Option<f64>,
    pub delta_band: f64,
    pub threads: usize,
    pub conj_symmetry: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa_cap: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct TimingsMs {
    pub factorize_ms: f64,
    pub solve_ms: f64,
    pub total_ms: f64,
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

impl From<Timings> for TimingsMs {
    fn from(t: Timings) -> Self {
        TimingsMs {
            factorize_ms: ms(t.factorize),
            solve_ms: ms(t.solve),
            total_ms: ms(t.total),
        }
    }
}

#[derive(Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WarningJson {
    BoundaryBand { value: Pair },
    NearSingularNode { node: usize, z: Pair },
}

impl From<&Warning> for WarningJson {
    fn from(w: &Warning) -> Self {
        match *w {
            Warning::BoundaryBand { value } => WarningJson::BoundaryBand { value: pair(value) },
            Warning::NearSingularNode { node, z } => WarningJson::NearSingularNode { node, z: pair(z) },
        }
    }
}

#[derive(Debug, Serialize)]
pub struct CountJson {
    pub schema_version: u32,
    pub report: &'static str,
    pub s: usize,
    pub s0: usize,
    pub s1: usize,
    pub mu_eigs: Vec<Pair>,
    pub warnings: Vec<WarningJson>,
    pub config: RunConfigEcho,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<TimingsMs>,
}

impl CountJson {
    pub fn new(r: &CountReport, config: RunConfigEcho, timings: Option<Timings>) -> Self {
        CountJson {
            schema_version: SCHEMA_VERSION,
            report: "count",
            s: r.s,
            s0: r.s0,
            s1: r.s1,
            mu_eigs: r.mu_eigs.iter().copied().map(pair).collect(),
            warnings: r.warnings.iter().map(WarningJson::from).collect(),
            config,
            timings: timings.map(TimingsMs::from),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct SearchJson {
    pub schema_version: u32,
    pub report: &'static str,
    pub s0: usize,
    pub s1: usize,
    pub trace_mean: Pair,
    pub block_width: usize,
    pub rounds_used: usize,
    pub total_solves: u64,
    pub config: RunConfigEcho,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<TimingsMs>,
}

impl SearchJson {
    pub fn new(r: &SearchResult, config: RunConfigEcho, timings: Option<Timings>) -> Self {
        SearchJson {
            schema_version: SCHEMA_VERSION,
            report: "search",
            s0: r.s0,
            s1: r.s1,
            trace_mean: pair(r.trace_mean),
            block_width: r.block_width,
            rounds_used: r.rounds_used,
            total_solves: r.total_solves,
            config,
            timings: timings.map(TimingsMs::from),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct EigsJson {
    pub schema_version: u32,
    pub report: &'static str,
    pub converged: bool,
    pub s: usize,
    pub s0: usize,
    pub s1: usize,
    pub iterations_used: usize,
    pub eigenvalues: Vec<Pair>,
    pub residuals: Vec<f64>,
    pub mu_eigs: Vec<Pair>,
    pub warnings: Vec<WarningJson>,
    pub vectors_file: Option<String>,
    pub config: RunConfigEcho,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<TimingsMs>,
}

impl EigsJson {
    pub fn new(set: &EigenpairSet, vectors_file: Option<String>, config: RunConfigEcho, with_timings: bool) -> Self {
        EigsJson {
            schema_version: SCHEMA_VERSION,
            report: "eigs",
            converged: set.converged,
            s: set.count.s,
            s0: set.count.s0,
            s1: set.count.s1,
            iterations_used: set.iterations_used,
            eigenvalues: set.values.iter().copied().map(pair).collect(),
            residuals: set.residuals.clone(),
            mu_eigs: set.count.mu_eigs.iter().copied().map(pair).collect(),
            warnings: set.count.warnings.iter().map(WarningJson::from).collect(),
            vectors_file,
            config,
            timings: with_timings.then(|| TimingsMs::from(set.timings)),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ErrorJson<'a> {
    pub error: ErrorBody<'a>,
}

#[derive(Debug, Serialize)]
pub struct ErrorBody<'a> {
    pub kind: &'a str,
    pub message: String,
    pub exit_code: i32,
}
