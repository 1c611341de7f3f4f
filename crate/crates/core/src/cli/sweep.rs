//! One-parameter sweeps over a scenario file.

use serde::Serialize;

use super::report::{run, Report};
use super::scenario::{CommutantEntry, ExpectationSpec, Scenario};
use crate::error::{Error, Result};

/// `trace.i`, `weighted.i` or `slot.i.j.c`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepParam {
    Trace(usize),
    Weighted(usize),
    Slot { amb_block: usize, sub_block: usize, copy: usize },
}

fn bad(message: String) -> Error {
    Error::Validation { constraint: "sweep parameter".into(), message }
}

impl SweepParam {
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split('.').collect();
        let idx: Vec<usize> = parts[1..]
            .iter()
            .map(|p| p.parse().map_err(|_| bad(format!("'{p}' in '{s}' is not an index"))))
            .collect::<Result<_>>()?;
        match (parts[0], idx.as_slice()) {
            ("trace", [i]) => Ok(SweepParam::Trace(*i)),
            ("weighted", [i]) => Ok(SweepParam::Weighted(*i)),
            ("slot", [i, j, c]) => Ok(SweepParam::Slot { amb_block: *i, sub_block: *j, copy: *c }),
            _ => Err(bad(format!("unknown parameter '{s}'; expected trace.i, weighted.i or slot.i.j.c"))),
        }
    }

    /// The scenario with this parameter set to `value`.
    pub fn apply(&self, base: &Scenario, value: f64) -> Result<Scenario> {
        let mut s = base.clone();
        match (*self, &mut s.expectation) {
            (SweepParam::Trace(i), _) => {
                let w = s.trace_weights.as_mut().ok_or_else(|| bad("scenario has no trace weights".into()))?;
                *w.get_mut(i).ok_or_else(|| bad(format!("no trace weight {i}")))? = value;
            }
            (SweepParam::Weighted(i), ExpectationSpec::Weighted { weights }) => {
                *weights.get_mut(i).ok_or_else(|| bad(format!("no weighted entry {i}")))? = value;
            }
            (SweepParam::Slot { amb_block, sub_block, copy }, ExpectationSpec::Perturbed { entries }) => {
                let hit = entries
                    .iter_mut()
                    .find(|e| (e.amb_block, e.sub_block, e.row, e.col) == (amb_block, sub_block, copy, copy));
                match hit {
                    Some(e) => (e.re, e.im) = (value, 0.0),
                    None => entries.push(CommutantEntry { amb_block, sub_block, row: copy, col: copy, re: value, im: 0.0 }),
                }
            }
            (p, _) => return Err(bad(format!("{p:?} does not apply to this expectation kind"))),
        }
        s.expectation()?;
        Ok(s)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepPoint {
    pub value: f64,
    pub report: Report,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    pub scenario: String,
    pub param: String,
    pub points: Vec<SweepPoint>,
}

pub fn parse_values(list: &str) -> Result<Vec<f64>> {
    let v: Vec<f64> = list
        .split(',')
        .map(|t| t.trim().parse().map_err(|_| bad(format!("cannot parse value '{t}'"))))
        .collect::<Result<_>>()?;
    if v.is_empty() {
        return Err(bad("empty value list".into()));
    }
    Ok(v)
}

/// Runs the scenario once per value; points are reported in input order.
pub fn sweep(base: &Scenario, param: &str, values: &[f64]) -> Result<SweepReport> {
    let p = SweepParam::parse(param)?;
    let scenarios: Vec<Scenario> = values.iter().map(|&v| p.apply(base, v)).collect::<Result<_>>()?;
    let points = scenarios
        .iter()
        .zip(values)
        .map(|(s, &value)| run(s).map(|report| SweepPoint { value, report }))
        .collect::<Result<_>>()?;
    Ok(SweepReport { scenario: base.name.clone(), param: param.into(), points })
}
