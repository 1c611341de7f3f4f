//! Built-in demo families with their asserted closed forms.

use serde::Serialize;

use super::report::{round_sig, run, Check, Report};
use super::scenario::{Analysis, ExpectationSpec, Scenario};
use crate::algebra::TraceWeights;
use crate::error::{Error, Result};
use crate::expectation::{watatani_index, ConditionalExpectation};
use crate::inclusion::Inclusion;
use crate::module::min_generators;
use crate::synthesis::synthesize;

pub const MATRIX_TRACE_MAX_N: usize = 8;
pub const JP_MAX_K: usize = 20;
pub const JP_MAX_DIM: usize = 4;

#[derive(Clone, Debug, Serialize)]
pub struct MatrixTraceReport {
    pub n: usize,
    pub report: Report,
    pub assertions: Vec<Check>,
}

fn assertion(list: &mut Vec<Check>, name: String, passed: bool, detail: String) {
    list.push(Check { name, passed, detail });
}

fn require(list: &[Check]) -> Result<()> {
    match list.iter().find(|c| !c.passed) {
        Some(c) => Err(Error::Assertion(format!("{}: {}", c.name, c.detail))),
        None => Ok(()),
    }
}

pub fn matrix_trace_scenario(n: usize) -> Scenario {
    Scenario {
        name: format!("matrix_trace_{n}"),
        sub_dims: vec![1],
        amb_dims: vec![n],
        lambda: vec![vec![n]],
        trace_weights: Some(vec![1.0 / n as f64]),
        expectation: ExpectationSpec::TracePreserving,
        analyses: Analysis::ALL.to_vec(),
    }
}

/// `ℂ ⊆ M_n` with the normalized trace: `K = n` and `n²` generators, both forced.
pub fn matrix_trace(n: usize) -> Result<MatrixTraceReport> {
    if !(1..=MATRIX_TRACE_MAX_N).contains(&n) {
        return Err(Error::Validation {
            constraint: "demo size".into(),
            message: format!("n must lie in 1..={MATRIX_TRACE_MAX_N}, got {n}"),
        });
    }
    let report = run(&matrix_trace_scenario(n))?;
    let mut a = Vec::new();
    let k = report.k.as_ref().expect("requested").value;
    assertion(&mut a, "k_equals_n".into(), (k - n as f64).abs() <= 1e-6, format!("K = {k}"));
    let g = report.synthesis.as_ref().expect("requested").generators;
    assertion(&mut a, "generators_equal_n_squared".into(), g == n * n, format!("{g} generators"));
    let mg = report.min_generators.expect("requested");
    assertion(&mut a, "min_generators_equal_n_squared".into(), mg == n * n, format!("min_generators = {mg}"));
    require(&a)?;
    Ok(MatrixTraceReport { n, report, assertions: a })
}

#[derive(Clone, Debug, Serialize)]
pub struct JpPoint {
    pub k: usize,
    pub t: f64,
    pub k_tr: f64,
    pub ind_tr_component_sum: f64,
    pub ind_tr_expected: f64,
    pub ind_min_component_sum: f64,
    /// Scalars of `E_{1/2}` on the two minimal central projections of `M`.
    pub e_min_central: Vec<f64>,
    pub generators_tr: usize,
    pub min_generators: usize,
    pub relative_commutant_dim: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct JpReport {
    pub k_max: usize,
    pub dim: usize,
    pub points: Vec<JpPoint>,
    pub assertions: Vec<Check>,
}

fn diagonal(n: usize) -> Result<Inclusion> {
    Inclusion::new(vec![n], vec![n, n], vec![vec![1, 1]])
}

/// One point of the sweep, unrounded, with its assertions appended to `a`.
fn jp_point(inc: &Inclusion, k: usize, a: &mut Vec<Check>) -> Result<JpPoint> {
    let t = 0.5f64.powi(k as i32);
    let e_tr = ConditionalExpectation::trace_preserving(inc, &TraceWeights::new(vec![t, 1.0 - t])?)?;
    let e_min = ConditionalExpectation::trace_preserving(inc, &TraceWeights::new(vec![0.5, 0.5])?)?;
    let k_tr = e_tr.k_constant()?;
    let (set, _) = synthesize(&e_tr)?;
    let ind_tr = watatani_index(&e_tr)?.component_sum;
    let ind_min = watatani_index(&e_min)?.component_sum;
    let p = 2f64.powi(k as i32);
    let expected = p + p / (p - 1.0);
    let e_min_central: Vec<f64> = inc
        .amb()
        .minimal_central_projections()
        .iter()
        .map(|q| {
            let v = e_min.apply_sub(q);
            v.block(0).trace().re / inc.sub().block_dim(0) as f64
        })
        .collect();
    let mg = min_generators(inc);
    let commutant = inc.relative_commutant().len();

    assertion(a, format!("k{k}_ind_tr"), (ind_tr - expected).abs() <= 1e-7, format!("{ind_tr} vs {expected}"));
    assertion(a, format!("k{k}_ind_min"), (ind_min - 4.0).abs() <= 1e-9, format!("{ind_min}"));
    assertion(
        a,
        format!("k{k}_e_min_central"),
        e_min_central.iter().all(|c| (c - 0.5).abs() <= 1e-9),
        format!("{e_min_central:?}"),
    );
    assertion(a, format!("k{k}_k_tr"), (k_tr - p).abs() <= 1e-5 * p, format!("K = {k_tr}"));
    assertion(a, format!("k{k}_min_generators"), mg == 2, format!("{mg}"));
    assertion(a, format!("k{k}_commutant_dim"), commutant == 2, format!("{commutant}"));

    Ok(JpPoint {
        k,
        t,
        k_tr,
        ind_tr_component_sum: ind_tr,
        ind_tr_expected: expected,
        ind_min_component_sum: ind_min,
        e_min_central,
        generators_tr: set.generators.len(),
        min_generators: mg,
        relative_commutant_dim: commutant,
    })
}

/// Diagonal `M_n ⊆ M_n ⊕ M_n` under the traces `(2^{-k}, 1 − 2^{-k})` for
/// `k = 1..=k_max`, next to the equal-weight expectation. Points are
/// computed in parallel and reported in order of `k`.
pub fn jolissaint_popa(k_max: usize, dim: usize) -> Result<JpReport> {
    if !(1..=JP_MAX_K).contains(&k_max) || !(1..=JP_MAX_DIM).contains(&dim) {
        return Err(Error::Validation {
            constraint: "demo size".into(),
            message: format!("need 1 <= kmax <= {JP_MAX_K} and 1 <= dim <= {JP_MAX_DIM}"),
        });
    }
    let inc = diagonal(dim)?;
    let results: Vec<Result<(JpPoint, Vec<Check>)>> = std::thread::scope(|s| {
        let handles: Vec<_> = (1..=k_max)
            .map(|k| {
                let inc = &inc;
                s.spawn(move || {
                    let mut a = Vec::new();
                    jp_point(inc, k, &mut a).map(|p| (p, a))
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    let mut points = Vec::with_capacity(k_max);
    let mut assertions = Vec::new();
    for r in results {
        let (p, a) = r?;
        points.push(p);
        assertions.extend(a);
    }
    require(&assertions)?;
    for p in &mut points {
        p.k_tr = round_sig(p.k_tr);
        p.ind_tr_component_sum = round_sig(p.ind_tr_component_sum);
        p.ind_tr_expected = round_sig(p.ind_tr_expected);
        p.ind_min_component_sum = round_sig(p.ind_min_component_sum);
        p.e_min_central = p.e_min_central.iter().copied().map(round_sig).collect();
    }
    Ok(JpReport { k_max, dim, points, assertions })
}
