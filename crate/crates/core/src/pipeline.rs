//! End-to-end runs: graph, optional sparsification, matching, verification.

use std::fmt::Write as _;
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom::{density_estimate, depth, GeomObject, Instance};
use crate::graph::{build_graph, induced_subgraph};
use crate::matching::{algebraic_matching_on_graph, AlgebraicConfig, Matching};
use crate::oracle::blossom_maximum_matching;
use crate::sparsify::{combine_matchings, sparsify, StructureChoice};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[default]
    Algebraic,
    SparsifyThenAlgebraic,
    SparsifyThenBlossom,
    Blossom,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Algebraic => "algebraic",
            Mode::SparsifyThenAlgebraic => "sparsify-then-algebraic",
            Mode::SparsifyThenBlossom => "sparsify-then-blossom",
            Mode::Blossom => "blossom",
        }
    }

    fn sparsifies(self) -> bool {
        matches!(self, Mode::SparsifyThenAlgebraic | Mode::SparsifyThenBlossom)
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Mode::Algebraic, Mode::SparsifyThenAlgebraic, Mode::SparsifyThenBlossom, Mode::Blossom]
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidParams(format!("unknown mode {s:?}")))
    }
}

impl FromStr for StructureChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "naive" => Ok(StructureChoice::Naive),
            "unitdisk" => Ok(StructureChoice::UnitDisk),
            _ => Err(Error::InvalidParams(format!("unknown structure {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub seed: u64,
    pub verify: bool,
    pub structure: StructureChoice,
    /// Restarts of the algebraic matcher after a failed attempt.
    pub max_retries: usize,
    /// Record wall times. Off by default so reports are reproducible byte
    /// for byte.
    pub timings: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mode: Mode::Algebraic,
            seed: 0,
            verify: false,
            structure: StructureChoice::Naive,
            max_retries: AlgebraicConfig::default().max_retries,
            timings: false,
        }
    }
}

/// Stages timed in a report, in column order.
pub const STAGES: [&str; 4] = ["graph", "sparsify", "match", "verify"];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub instance_id: String,
    pub mode: Mode,
    pub seed: u64,
    pub n: usize,
    pub edges: usize,
    pub depth: usize,
    pub density_est: usize,
    pub psi: f64,
    pub matching_size: usize,
    pub valid: bool,
    pub oracle_size: Option<usize>,
    /// `Some(false)` when verification found a smaller matching.
    pub verified: Option<bool>,
    /// Size and depth of the kept family in sparsifying modes.
    pub kept: Option<usize>,
    pub kept_depth: Option<usize>,
    /// Algebraic attempts used, including the successful one.
    pub attempts: Option<usize>,
    /// Milliseconds per entry of [`STAGES`]; zero unless timings are on.
    pub stage_times_ms: [f64; 4],
    pub matching: Matching,
}

impl Report {
    pub fn mismatch(&self) -> bool {
        self.verified == Some(false)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn csv_header() -> String {
        let mut h = String::from("instance_id,mode,n,edges,depth,density_est,psi,matching_size,oracle_size");
        for s in STAGES {
            write!(h, ",{s}_ms").unwrap();
        }
        h.push_str(",seed");
        h
    }

    pub fn csv_row(&self) -> String {
        let oracle = self.oracle_size.map(|s| s.to_string()).unwrap_or_default();
        let mut r = format!(
            "{},{},{},{},{},{},{},{},{}",
            self.instance_id,
            self.mode.name(),
            self.n,
            self.edges,
            self.depth,
            self.density_est,
            self.psi,
            self.matching_size,
            oracle
        );
        for t in self.stage_times_ms {
            write!(r, ",{t:.3}").unwrap();
        }
        write!(r, ",{}", self.seed).unwrap();
        r
    }
}

fn staged<T>(stage: &'static str, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Stage { stage, source: Box::new(e) })
}

struct Clock {
    on: bool,
    at: Instant,
    times: [f64; 4],
}

impl Clock {
    fn lap(&mut self, stage: usize) {
        if self.on {
            let now = Instant::now();
            self.times[stage] += (now - self.at).as_secs_f64() * 1e3;
            self.at = now;
        }
    }
}

/// Runs one instance. Errors carry the stage they came from.
pub fn run(instance: &Instance, instance_id: &str, config: &RunConfig) -> Result<Report> {
    let objects = &instance.objects;
    let mut clock = Clock { on: config.timings, at: Instant::now(), times: [0.0; 4] };
    for o in objects {
        staged("graph", o.validate())?;
    }
    let g = build_graph(objects);
    clock.lap(0);

    let algebraic = AlgebraicConfig {
        seed: config.seed,
        max_retries: config.max_retries,
        ..Default::default()
    };
    let mut attempts = None;
    let mut kept_info = None;
    let matching = if config.mode.sparsifies() {
        let s = staged("sparsify", sparsify(objects, instance.psi, config.structure))?;
        let sub: Vec<GeomObject> = s
            .kept
            .iter()
            .enumerate()
            .map(|(i, &v)| GeomObject { id: i, ..objects[v] })
            .collect();
        kept_info = Some((s.kept.len(), depth(&sub)));
        clock.lap(1);
        let gw = induced_subgraph(&g, &s.kept).with_origin((0..s.kept.len()).collect());
        let mw = if config.mode == Mode::SparsifyThenAlgebraic {
            let out = staged("match", algebraic_matching_on_graph(&sub, &gw, &algebraic))?;
            attempts = Some(out.attempts);
            out.matching
        } else {
            blossom_maximum_matching(&gw)
        };
        combine_matchings(&mw.mapped(&s.kept), &s.residuals)
    } else if config.mode == Mode::Algebraic {
        let out = staged("match", algebraic_matching_on_graph(objects, &g, &algebraic))?;
        attempts = Some(out.attempts);
        out.matching
    } else {
        blossom_maximum_matching(&g)
    };
    clock.lap(2);

    let valid = matching.validate(&g).is_ok();
    let oracle_size = config.verify.then(|| blossom_maximum_matching(&g).len());
    clock.lap(3);

    Ok(Report {
        instance_id: instance_id.to_string(),
        mode: config.mode,
        seed: config.seed,
        n: objects.len(),
        edges: g.edge_count(),
        depth: depth(objects),
        density_est: density_estimate(objects),
        psi: instance.psi,
        matching_size: matching.len(),
        valid,
        verified: oracle_size.map(|s| valid && s == matching.len()),
        oracle_size,
        kept: kept_info.map(|k| k.0),
        kept_depth: kept_info.map(|k| k.1),
        attempts,
        stage_times_ms: clock.times,
        matching,
    })
}
