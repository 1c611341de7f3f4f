//! Line-oriented scenario files.
//!
//! ```text
//! name = diagonal
//! [algebras]
//! sub = 2
//! amb = 2 2
//! [inclusion]
//! row = 1 1
//! [weights]
//! trace = 0.5 0.5
//! [expectation]
//! kind = trace_preserving
//! [analyses]
//! run = all
//! ```
//!
//! `row` lines give `Λ` one sub block at a time. `kind = weighted` takes
//! `weights = s_1 .. s_s`, one scalar per ambient block; `kind = perturbed`
//! takes `entry = i j c d re [im]` lines setting entry `(c, d)` of the
//! commutant factor on the `(i, j)` slots (unset entries are those of `1`).
//! `#` starts a comment.

use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;

use crate::algebra::{AlgebraElement, TraceWeights};
use crate::error::{Error, Result};
use crate::expectation::ConditionalExpectation;
use crate::inclusion::Inclusion;
use crate::numkernel::ComplexMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Analysis {
    KConstant,
    MinGenerators,
    Index,
    QuasiBasis,
    Synthesize,
    CompressAll,
}

impl Analysis {
    pub const ALL: [Analysis; 6] = [
        Analysis::KConstant,
        Analysis::MinGenerators,
        Analysis::Index,
        Analysis::QuasiBasis,
        Analysis::Synthesize,
        Analysis::CompressAll,
    ];

    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "k_constant" => Analysis::KConstant,
            "min_generators" => Analysis::MinGenerators,
            "index" => Analysis::Index,
            "quasi_basis" => Analysis::QuasiBasis,
            "synthesize" => Analysis::Synthesize,
            "compress_all" => Analysis::CompressAll,
            _ => return None,
        })
    }
}

/// Entry `(row, col)` of the `Λ_{ji} × Λ_{ji}` factor of `N' ∩ M` on the
/// slots of sub block `sub_block` inside ambient block `amb_block`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CommutantEntry {
    pub amb_block: usize,
    pub sub_block: usize,
    pub row: usize,
    pub col: usize,
    pub re: f64,
    pub im: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExpectationSpec {
    TracePreserving,
    Perturbed { entries: Vec<CommutantEntry> },
    /// Perturbation by `Σ_i √s_i q_i` over the minimal central projections of `M`.
    Weighted { weights: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Scenario {
    pub name: String,
    pub sub_dims: Vec<usize>,
    pub amb_dims: Vec<usize>,
    pub lambda: Vec<Vec<usize>>,
    pub trace_weights: Option<Vec<f64>>,
    pub expectation: ExpectationSpec,
    /// Sorted into dependency order, without repeats.
    pub analyses: Vec<Analysis>,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn validation(constraint: &str, message: impl Into<String>) -> Error {
    Error::Validation { constraint: constraint.into(), message: message.into() }
}

fn numbers<T: std::str::FromStr>(line: usize, key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| parse_err(line, format!("{key}: cannot parse '{t}'"))))
        .collect()
}

#[derive(Default)]
struct Draft {
    name: Option<String>,
    sub: Option<Vec<usize>>,
    amb: Option<Vec<usize>>,
    rows: Vec<Vec<usize>>,
    trace: Option<Vec<f64>>,
    kind: Option<(usize, String)>,
    weights: Option<(usize, Vec<f64>)>,
    entries: Vec<(usize, CommutantEntry)>,
    analyses: Vec<Analysis>,
}

fn set_once<T>(slot: &mut Option<T>, value: T, line: usize, key: &str) -> Result<()> {
    if slot.is_some() {
        return Err(parse_err(line, format!("duplicate key '{key}'")));
    }
    *slot = Some(value);
    Ok(())
}

impl Scenario {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Parses and validates; the expectation is built once as part of validation.
    pub fn parse(text: &str) -> Result<Self> {
        let mut d = Draft::default();
        let mut section = String::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| parse_err(line, "unterminated section header"))?
                    .trim();
                if !["algebras", "inclusion", "weights", "expectation", "analyses"].contains(&name) {
                    return Err(parse_err(line, format!("unknown section [{name}]")));
                }
                section = name.to_string();
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| parse_err(line, "expected 'key = value'"))?;
            match (section.as_str(), key) {
                ("", "name") => set_once(&mut d.name, value.to_string(), line, key)?,
                ("algebras", "sub") => set_once(&mut d.sub, numbers(line, key, value)?, line, key)?,
                ("algebras", "amb") => set_once(&mut d.amb, numbers(line, key, value)?, line, key)?,
                ("inclusion", "row") => d.rows.push(numbers(line, key, value)?),
                ("weights", "trace") => set_once(&mut d.trace, numbers(line, key, value)?, line, key)?,
                ("expectation", "kind") => set_once(&mut d.kind, (line, value.to_string()), line, key)?,
                ("expectation", "weights") => {
                    set_once(&mut d.weights, (line, numbers(line, key, value)?), line, key)?
                }
                ("expectation", "entry") => {
                    let t: Vec<&str> = value.split_whitespace().collect();
                    if t.len() != 5 && t.len() != 6 {
                        return Err(parse_err(line, "entry: expected 'i j c d re [im]'"));
                    }
                    let idx: Vec<usize> = numbers(line, key, &t[..4].join(" "))?;
                    let val: Vec<f64> = numbers(line, key, &t[4..].join(" "))?;
                    let entry = CommutantEntry {
                        amb_block: idx[0],
                        sub_block: idx[1],
                        row: idx[2],
                        col: idx[3],
                        re: val[0],
                        im: val.get(1).copied().unwrap_or(0.0),
                    };
                    d.entries.push((line, entry));
                }
                ("analyses", "run") => {
                    for t in value.split([',', ' ']).filter(|t| !t.is_empty()) {
                        if t == "all" {
                            d.analyses.extend(Analysis::ALL);
                        } else {
                            let a = Analysis::parse(t).ok_or_else(|| parse_err(line, format!("unknown analysis '{t}'")))?;
                            d.analyses.push(a);
                        }
                    }
                }
                (s, k) => {
                    let place = if s.is_empty() { "top level".to_string() } else { format!("[{s}]") };
                    return Err(parse_err(line, format!("unknown key '{k}' in {place}")));
                }
            }
        }
        d.finish()
    }

    pub fn inclusion(&self) -> Result<Inclusion> {
        Inclusion::new(self.sub_dims.clone(), self.amb_dims.clone(), self.lambda.clone()).map_err(|e| {
            let constraint = match e {
                Error::NotUnital { .. } => "unitality",
                Error::DeadBlock { .. } => "no dead blocks",
                Error::DimensionMismatch(_) => "inclusion matrix shape",
                _ => "block dimensions",
            };
            validation(constraint, e.to_string())
        })
    }

    /// The conditional expectation described by the scenario.
    pub fn expectation(&self) -> Result<ConditionalExpectation> {
        let inc = self.inclusion()?;
        let s = inc.amb().num_blocks();
        let weights = match &self.trace_weights {
            Some(w) => {
                if w.len() != s {
                    return Err(validation(
                        "trace weight count",
                        format!("{} trace weights for {s} ambient blocks", w.len()),
                    ));
                }
                TraceWeights::new(w.clone()).map_err(|e| validation("positive weights", e.to_string()))?
            }
            None => TraceWeights::uniform(inc.amb()),
        };
        let base = ConditionalExpectation::trace_preserving(&inc, &weights)
            .map_err(|e| validation("faithful trace", e.to_string()))?;
        match &self.expectation {
            ExpectationSpec::TracePreserving => Ok(base),
            ExpectationSpec::Weighted { weights: sw } => {
                if sw.len() != s {
                    return Err(validation(
                        "weighted list length",
                        format!("{} weights for {s} ambient blocks", sw.len()),
                    ));
                }
                if let Some(x) = sw.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
                    return Err(validation("positive weights", format!("weight {x} is not positive")));
                }
                let blocks = sw
                    .iter()
                    .zip(inc.amb().block_dims())
                    .map(|(x, &n)| ComplexMatrix::from_real_diag(&vec![x.sqrt(); n]))
                    .collect();
                base.perturb(&inc.amb().element(blocks)?)
            }
            ExpectationSpec::Perturbed { entries } => base.perturb(&commutant_element(&inc, entries)?),
        }
    }

    pub fn wants(&self, a: Analysis) -> bool {
        self.analyses.contains(&a)
    }
}

/// Identity of `M` with the listed entries of the commutant factors overwritten.
fn commutant_element(inc: &Inclusion, entries: &[CommutantEntry]) -> Result<AlgebraElement> {
    let amb = inc.amb();
    let mut blocks: Vec<ComplexMatrix> = amb.block_dims().iter().map(|&n| ComplexMatrix::identity(n)).collect();
    for en in entries {
        let range = |what: &str| validation("commutant entry range", format!("{what} out of range in entry {en:?}"));
        if en.amb_block >= amb.num_blocks() {
            return Err(range("ambient block"));
        }
        if en.sub_block >= inc.sub().num_blocks() {
            return Err(range("sub block"));
        }
        let lam = inc.multiplicity(en.sub_block, en.amb_block);
        if en.row >= lam || en.col >= lam {
            return Err(range("copy index"));
        }
        let slots = inc.slots(en.amb_block);
        let find = |copy: usize| {
            slots.iter().position(|s| s.sub_block == en.sub_block && s.copy == copy).expect("copy exists")
        };
        let (sr, sc) = (find(en.row), find(en.col));
        let z = Complex64::new(en.re, en.im);
        for k in 0..inc.sub().block_dim(en.sub_block) {
            let (r, c) = (inc.slot_position(en.amb_block, sr, k), inc.slot_position(en.amb_block, sc, k));
            blocks[en.amb_block][(r, c)] = z;
        }
    }
    amb.element(blocks)
}

impl Draft {
    fn finish(self) -> Result<Scenario> {
        let sub_dims = self.sub.ok_or_else(|| validation("sub algebra", "missing 'sub' in [algebras]"))?;
        let amb_dims = self.amb.ok_or_else(|| validation("ambient algebra", "missing 'amb' in [algebras]"))?;
        if self.rows.is_empty() {
            return Err(validation("inclusion matrix shape", "missing 'row' lines in [inclusion]"));
        }
        let expectation = match self.kind.as_ref().map(|(l, k)| (*l, k.as_str())) {
            None | Some((_, "trace_preserving")) => {
                if self.trace.is_none() {
                    return Err(validation(
                        "trace weights",
                        "kind trace_preserving requires 'trace' in [weights]",
                    ));
                }
                ExpectationSpec::TracePreserving
            }
            Some((_, "weighted")) => {
                let (_, w) = self
                    .weights
                    .clone()
                    .ok_or_else(|| validation("weighted list", "kind weighted requires 'weights' in [expectation]"))?;
                ExpectationSpec::Weighted { weights: w }
            }
            Some((_, "perturbed")) => {
                if self.trace.is_none() {
                    return Err(validation("trace weights", "kind perturbed requires 'trace' in [weights]"));
                }
                ExpectationSpec::Perturbed { entries: self.entries.iter().map(|(_, e)| e.clone()).collect() }
            }
            Some((line, other)) => return Err(parse_err(line, format!("unknown expectation kind '{other}'"))),
        };
        if let Some((line, _)) = self.weights.as_ref().filter(|_| !matches!(expectation, ExpectationSpec::Weighted { .. })) {
            return Err(parse_err(*line, "'weights' only applies to kind weighted"));
        }
        if let Some((line, _)) = self.entries.first().filter(|_| !matches!(expectation, ExpectationSpec::Perturbed { .. })) {
            return Err(parse_err(*line, "'entry' only applies to kind perturbed"));
        }
        let mut analyses = self.analyses;
        if analyses.is_empty() {
            analyses.extend(Analysis::ALL);
        }
        analyses.sort();
        analyses.dedup();
        let scenario = Scenario {
            name: self.name.unwrap_or_else(|| "unnamed".into()),
            sub_dims,
            amb_dims,
            lambda: self.rows,
            trace_weights: self.trace,
            expectation,
            analyses,
        };
        scenario.expectation()?;
        Ok(scenario)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SCALARS: &str = "name = scalars\n[algebras]\nsub = 1\namb = 3\n[inclusion]\nrow = 3\n[weights]\ntrace = 1\n";

    #[test]
    fn parses_scalars_in_m3() {
        let s = Scenario::parse(SCALARS).unwrap();
        assert_eq!(s.name, "scalars");
        assert_eq!((s.sub_dims.clone(), s.amb_dims.clone(), s.lambda.clone()), (vec![1], vec![3], vec![vec![3]]));
        assert_eq!(s.expectation, ExpectationSpec::TracePreserving);
        assert_eq!(s.analyses, Analysis::ALL.to_vec());
    }

    #[test]
    fn unitality_is_named() {
        let text = SCALARS.replace("row = 3", "row = 2");
        match Scenario::parse(&text).unwrap_err() {
            Error::Validation { constraint, .. } => assert_eq!(constraint, "unitality"),
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn missing_trace_weights() {
        let text = SCALARS.replace("[weights]\ntrace = 1\n", "[expectation]\nkind = trace_preserving\n");
        match Scenario::parse(&text).unwrap_err() {
            Error::Validation { constraint, .. } => assert_eq!(constraint, "trace weights"),
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn parse_errors_carry_lines() {
        let cases = [
            ("[algebras]\nsub = 1\namb = x\n", 3),
            ("name = a\n\n[nope]\n", 3),
            ("[algebras]\nsub 1\n", 2),
            ("[algebras]\nsub = 1\nsub = 2\n", 3),
            ("[analyses]\nrun = index, bogus\n", 2),
            ("[algebras]\ncolour = 1\n", 2),
        ];
        for (text, want) in cases {
            match Scenario::parse(text).unwrap_err() {
                Error::Parse { line, .. } => assert_eq!(line, want, "{text}"),
                e => panic!("{text}: {e:?}"),
            }
        }
    }

    #[test]
    fn weighted_matches_trace_preserving() {
        let text = "[algebras]\nsub = 2\namb = 2 2\n[inclusion]\nrow = 1 1\n[expectation]\nkind = weighted\nweights = 0.25 0.75\n";
        let w = Scenario::parse(text).unwrap().expectation().unwrap();
        let inc = w.inclusion().clone();
        let t = ConditionalExpectation::trace_preserving(&inc, &TraceWeights::new(vec![0.25, 0.75]).unwrap()).unwrap();
        assert!(w.matrix().dist(t.matrix()) < 1e-12);
    }

    #[test]
    fn perturbed_entries() {
        let text = "[algebras]\nsub = 1\namb = 2\n[inclusion]\nrow = 2\n[weights]\ntrace = 1\n\
                    [expectation]\nkind = perturbed\nentry = 0 0 0 0 2\nentry = 0 0 0 1 0.5 0.5\n";
        let s = Scenario::parse(text).unwrap();
        assert!(matches!(&s.expectation, ExpectationSpec::Perturbed { entries } if entries.len() == 2));
        let bad = text.replace("0 0 0 1 0.5", "0 0 0 2 0.5");
        match Scenario::parse(&bad).unwrap_err() {
            Error::Validation { constraint, .. } => assert_eq!(constraint, "commutant entry range"),
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn commutant_violation_is_a_validation_error() {
        // entries must stay inside N' ∩ M; a singular factor cannot be normalized
        let text = "[algebras]\nsub = 1\namb = 2\n[inclusion]\nrow = 2\n[weights]\ntrace = 1\n\
                    [expectation]\nkind = perturbed\nentry = 0 0 1 1 0\n";
        assert_eq!(Scenario::parse(text).unwrap_err().exit_code(), 1);
    }
}
