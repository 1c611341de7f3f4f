//! Analysis reports: a JSON document with fixed field order, and a text rendering.

use std::fmt::Write as _;

use serde::Serialize;

use super::scenario::{Analysis, Scenario};
use crate::error::{Error, Result};
use crate::expectation::{floor_k, quasi_basis, reconstruction_error, watatani_index, ConditionalExpectation};
use crate::module::{min_generators, FrameKind, ModuleFrame};
use crate::numkernel::ComplexMatrix;
use crate::synthesis::{self, StageCounts};

/// Probes and seed of the upper half of the `K` certificate.
pub const CERT_PROBES: usize = 500;
pub const CERT_SEED: u64 = 0xCE27;
const VALIDATE_SAMPLES: usize = 16;
const VALIDATE_SEED: u64 = 0xE0;
const FRAME_TOL: f64 = 1e-8;

/// Rounds to 10 significant digits so reports do not carry last-bit noise.
pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.9e}").parse().expect("formatted float")
}

fn round_all(v: &[f64]) -> Vec<f64> {
    v.iter().copied().map(round_sig).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KSection {
    pub value: f64,
    pub numeric: f64,
    pub closed_form: Option<f64>,
    pub floor: usize,
    pub floor_squared: usize,
    pub block_values: Vec<f64>,
    pub witness_block: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IndexSection {
    pub scalars: Vec<f64>,
    pub component_sum: f64,
    pub norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuasiBasisSection {
    pub size: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SynthesisSection {
    pub generators: usize,
    pub certified_bound: usize,
    pub stages: StageCounts,
    pub refinements_per_projection: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Compression {
    pub amb_block: usize,
    pub k: f64,
    pub centre_dim: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    #[serde(skip)]
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub scenario: Scenario,
    pub expectation_kind: String,
    pub relative_commutant_dim: usize,
    pub k: Option<KSection>,
    pub min_generators: Option<usize>,
    pub index: Option<IndexSection>,
    pub quasi_basis: Option<QuasiBasisSection>,
    pub synthesis: Option<SynthesisSection>,
    pub compressions: Option<Vec<Compression>>,
    pub checks: Vec<Check>,
    #[serde(skip)]
    pub wall_time_ms: f64,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn to_machine(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let s = &self.scenario;
        let _ = writeln!(out, "scenario {}", s.name);
        let _ = writeln!(out, "  N = {:?}  M = {:?}  lambda = {:?}", s.sub_dims, s.amb_dims, s.lambda);
        let _ = writeln!(out, "  expectation: {}", self.expectation_kind);
        let _ = writeln!(out, "  dim N' ∩ M = {}", self.relative_commutant_dim);
        if let Some(k) = &self.k {
            let closed = k.closed_form.map_or("n/a".to_string(), |c| format!("{c}"));
            let _ = writeln!(out, "  K(E) = {}  (numeric {}, closed form {closed})", k.value, k.numeric);
            let _ = writeln!(out, "  floor(K)^2 = {}", k.floor_squared);
        }
        if let Some(g) = self.min_generators {
            let _ = writeln!(out, "  min_generators = {g}");
        }
        if let Some(ind) = &self.index {
            let _ = writeln!(
                out,
                "  Ind(E) scalars = {:?}  component_sum = {}  norm = {}",
                ind.scalars, ind.component_sum, ind.norm
            );
        }
        if let Some(q) = &self.quasi_basis {
            let _ = writeln!(out, "  quasi-basis size = {}", q.size);
        }
        if let Some(sy) = &self.synthesis {
            let _ = writeln!(
                out,
                "  generators = {} (bound {})  stages: unreduced {}, classes {}, composed {}",
                sy.generators, sy.certified_bound, sy.stages.unreduced, sy.stages.classes, sy.stages.generators
            );
        }
        if let Some(cs) = &self.compressions {
            for c in cs {
                let _ = writeln!(out, "  compression at block {}: K = {}  dim Z(qN) = {}", c.amb_block, c.k, c.centre_dim);
            }
        }
        for c in &self.checks {
            let mark = if c.passed { "ok  " } else { "FAIL" };
            let _ = writeln!(out, "  [{mark}] {} {}", c.name, c.detail);
        }
        let _ = writeln!(out, "  wall time {:.1} ms", self.wall_time_ms);
        out
    }
}

fn check(checks: &mut Vec<Check>, name: &str, passed: bool, detail: String) {
    checks.push(Check { name: name.into(), passed, detail });
}

/// Runs the requested analyses in dependency order. Numerical failures and
/// bound violations abort the run with the corresponding error.
pub fn run(scenario: &Scenario) -> Result<Report> {
    let start = std::time::Instant::now();
    let e = scenario.expectation()?;
    let mut report = analyze(scenario, &e)?;
    report.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(report)
}

fn analyze(scenario: &Scenario, e: &ConditionalExpectation) -> Result<Report> {
    let inc = e.inclusion();
    let mut checks = Vec::new();
    e.validate(VALIDATE_SAMPLES, VALIDATE_SEED)?;
    check(&mut checks, "expectation_axioms", true, String::new());
    let commutant = inc.relative_commutant().len();
    check(
        &mut checks,
        "relative_commutant_dim",
        commutant == inc.commutant_dim_formula(),
        format!("kernel {commutant}, formula {}", inc.commutant_dim_formula()),
    );

    let needs_k = [Analysis::KConstant, Analysis::Synthesize, Analysis::CompressAll].iter().any(|&a| scenario.wants(a));
    let ka = if needs_k { Some(e.k_analysis()?) } else { None };
    let k = ka.as_ref().map(|a| a.value);
    let k_section = match (&ka, scenario.wants(Analysis::KConstant)) {
        (Some(a), true) => {
            let cert = e.k_certificate(CERT_PROBES, CERT_SEED)?;
            check(
                &mut checks,
                "k_certificate",
                cert.passed,
                format!("upper {:.3e}, witness {:.3e}", cert.upper_min_defect, cert.lower_witness_defect),
            );
            let fk = floor_k(a.value);
            Some(KSection {
                value: round_sig(a.value),
                numeric: round_sig(a.numeric),
                closed_form: a.closed_form.map(round_sig),
                floor: fk,
                floor_squared: fk * fk,
                block_values: round_all(&a.block_values),
                witness_block: a.witness.block,
            })
        }
        _ => None,
    };

    let min_gens = scenario.wants(Analysis::MinGenerators).then(|| min_generators(inc));

    let index = if scenario.wants(Analysis::Index) {
        let ind = watatani_index(e)?;
        check(&mut checks, "index_central", true, String::new());
        Some(IndexSection {
            scalars: round_all(&ind.scalars),
            component_sum: round_sig(ind.component_sum),
            norm: round_sig(ind.norm),
        })
    } else {
        None
    };

    let qb = if scenario.wants(Analysis::QuasiBasis) {
        let family = quasi_basis(e)?;
        let err = reconstruction_error(e, &family);
        check(&mut checks, "reconstruction", err <= FRAME_TOL, format!("{err:.3e}"));
        let frame = ModuleFrame { elements: family, kind: FrameKind::QuasiBasis };
        let d = inc.amb().dim();
        let theta = frame.theta_sum(e).dist(&ComplexMatrix::identity(d));
        check(&mut checks, "theta_sum_identity", theta <= FRAME_TOL, format!("{theta:.3e}"));
        Some(QuasiBasisSection { size: frame.elements.len() })
    } else {
        None
    };

    let synth = if scenario.wants(Analysis::Synthesize) {
        let k = k.expect("K computed");
        let trace = synthesis::stage_a_basis(e)?;
        synthesis::check_stage_a(&trace, k)?;
        check(&mut checks, "mu_window", true, String::new());
        check(&mut checks, "refinements_per_projection", true, String::new());
        let refinements = trace.refinement_counts();
        let trace = synthesis::stage_b_reduce(trace)?;
        let (set, trace) = synthesis::stage_c_compose(trace, k)?;
        check(&mut checks, "generating", true, String::new());
        check(
            &mut checks,
            "square_bound",
            set.generators.len() <= set.certified_bound,
            format!("{} <= {}", set.generators.len(), set.certified_bound),
        );
        Some(SynthesisSection {
            generators: set.generators.len(),
            certified_bound: set.certified_bound,
            stages: trace.counts.clone(),
            refinements_per_projection: refinements,
        })
    } else {
        None
    };

    let compressions = if scenario.wants(Analysis::CompressAll) {
        let mut out = Vec::new();
        for (i, q) in inc.amb().minimal_central_projections().iter().enumerate() {
            let c = e.compress(q)?;
            out.push(Compression {
                amb_block: i,
                k: round_sig(c.k_constant()?),
                centre_dim: c.inclusion().sub().num_blocks(),
            });
        }
        check(&mut checks, "compressions", true, String::new());
        Some(out)
    } else {
        None
    };

    Ok(Report {
        scenario: scenario.clone(),
        expectation_kind: e.kind().label().into(),
        relative_commutant_dim: commutant,
        k: k_section,
        min_generators: min_gens,
        index,
        quasi_basis: qb,
        synthesis: synth,
        compressions,
        checks,
        wall_time_ms: 0.0,
    })
}

/// Error unless every check passed.
pub fn require_passed(report: &Report) -> Result<()> {
    match report.checks.iter().find(|c| !c.passed) {
        Some(c) => Err(Error::Invariant(format!("check {} failed: {}", c.name, c.detail))),
        None => Ok(()),
    }
}
