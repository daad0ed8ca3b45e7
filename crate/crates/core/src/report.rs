//! Serializable summary of an analysis.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use serde::Serialize;
use serde_json::Value;

use crate::infer::Analysis;
use crate::logic::linear::Rel;
use crate::logic::{Condition, LinAtom, LinTerm};
use crate::symbol::Var;

#[derive(Clone, Debug, Serialize)]
pub struct AtomJson {
    pub vars: Vec<String>,
    pub coeffs: Vec<Value>,
    #[serde(rename = "const")]
    pub constant: Value,
    /// `>` or `>=`, against zero.
    pub rel: &'static str,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConditionJson {
    pub text: String,
    /// Disjunction of conjunctions of atoms `Σ coeff·var + const rel 0`.
    pub dnf: Vec<Vec<AtomJson>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AdornmentJson {
    pub name: String,
    pub condition: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct AdornmentSetJson {
    pub pred: String,
    pub adornments: Vec<AdornmentJson>,
}

#[derive(Clone, Debug, Serialize)]
pub struct WeightJson {
    pub weight: String,
    pub map: String,
    pub value: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ObligationJson {
    pub clause: usize,
    pub provenance: Option<String>,
    pub head: String,
    pub call: String,
    pub guard: String,
    pub decrease: String,
    pub outcome: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct TerminationReport {
    pub query: String,
    pub condition: ConditionJson,
    pub cond1: ConditionJson,
    pub cond2: ConditionJson,
    pub case: &'static str,
    pub adornments: Vec<AdornmentSetJson>,
    pub weights: BTreeMap<String, Vec<WeightJson>>,
    pub obligations: Vec<ObligationJson>,
    pub notes: Vec<String>,
    pub diagnostics: Vec<String>,
}

fn num(n: &BigInt) -> Value {
    match i64::try_from(n) {
        Ok(i) => Value::from(i),
        Err(_) => Value::from(n.to_string()),
    }
}

fn atom_json(a: &LinAtom) -> AtomJson {
    let t = a.term();
    AtomJson {
        vars: t.coeffs().keys().map(|v| v.to_string()).collect(),
        coeffs: t.coeffs().values().map(num).collect(),
        constant: num(t.constant_part()),
        rel: match a.rel() {
            Rel::Gt => ">",
            Rel::Ge => ">=",
        },
    }
}

pub fn condition_json(c: &Condition) -> ConditionJson {
    ConditionJson {
        text: c.to_string(),
        dnf: c
            .disjuncts()
            .iter()
            .map(|d| d.iter().map(atom_json).collect())
            .collect(),
    }
}

fn big(v: &Value) -> Result<BigInt, String> {
    match v {
        Value::Number(n) => n
            .as_i64()
            .map(BigInt::from)
            .ok_or_else(|| format!("not an integer: {}", n)),
        Value::String(s) => s.parse().map_err(|_| format!("not an integer: {}", s)),
        other => Err(format!("not an integer: {}", other)),
    }
}

/// Reads back the `dnf` array of a serialized condition.
pub fn condition_from_json(v: &Value) -> Result<Condition, String> {
    let dnf = v
        .get("dnf")
        .unwrap_or(v)
        .as_array()
        .ok_or("dnf must be an array")?;
    let mut disjuncts = Vec::new();
    for d in dnf {
        let mut conj = Vec::new();
        for a in d.as_array().ok_or("conjunction must be an array")? {
            let vars = a["vars"].as_array().ok_or("missing vars")?;
            let coeffs = a["coeffs"].as_array().ok_or("missing coeffs")?;
            if vars.len() != coeffs.len() {
                return Err("vars and coeffs differ in length".into());
            }
            let mut t = LinTerm::constant(big(&a["const"])?);
            for (v, c) in vars.iter().zip(coeffs) {
                let name = v.as_str().ok_or("variable must be a string")?;
                t.add_coeff(Var::new(name), big(c)?);
            }
            let rel = match a["rel"].as_str() {
                Some(">") => Rel::Gt,
                Some(">=") => Rel::Ge,
                _ => return Err("rel must be `>` or `>=`".into()),
            };
            conj.push(LinAtom::new(t, rel));
        }
        disjuncts.push(conj);
    }
    Condition::from_disjuncts(disjuncts).map_err(|e| e.to_string())
}

impl Analysis {
    pub fn report(&self) -> TerminationReport {
        let adornments = self
            .sets
            .values()
            .map(|s| AdornmentSetJson {
                pred: s.pred.to_string(),
                adornments: s
                    .adornments
                    .iter()
                    .map(|a| AdornmentJson {
                        name: a.name.clone(),
                        condition: a.cond.to_string(),
                    })
                    .collect(),
            })
            .collect();
        let mut weights: BTreeMap<String, Vec<WeightJson>> = BTreeMap::new();
        for s in &self.sccs {
            for (w, val) in s.weights.iter().flatten() {
                let map = self
                    .maps
                    .get(&w.pred)
                    .and_then(|m| m.maps.get(w.index))
                    .map(|m| m.expr.to_string())
                    .unwrap_or_default();
                weights
                    .entry(w.pred.name.to_string())
                    .or_default()
                    .push(WeightJson {
                        weight: w.to_string(),
                        map,
                        value: *val,
                    });
            }
        }
        let mut outcome = vec![String::from("unsolved"); self.obligations.len()];
        for s in &self.sccs {
            for (i, o) in s.obligations.iter().zip(&s.outcomes) {
                outcome[*i] = o.to_string();
            }
        }
        let obligations = self
            .obligations
            .iter()
            .zip(outcome)
            .map(|(o, outcome)| ObligationJson {
                clause: o.clause,
                provenance: o.provenance.as_ref().map(|p| p.to_string()),
                head: o.head.to_string(),
                call: o.call.to_string(),
                guard: o.guard.to_string(),
                decrease: match &o.decrease {
                    Ok(d) => d.to_string(),
                    Err(e) => format!("? ({})", e),
                },
                outcome,
            })
            .collect();
        TerminationReport {
            query: self.query.to_string(),
            condition: condition_json(&self.condition),
            cond1: condition_json(&self.cond1),
            cond2: condition_json(&self.cond2),
            case: self.case.letter(),
            adornments,
            weights,
            obligations,
            notes: self.notes.clone(),
            diagnostics: self.shapes.diagnostics.iter().cloned().collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        for s in [
            "true",
            "false",
            "q1 =< q2 \\/ (q1 > q2 /\\ q2 > 0)",
            "3*p1 - 2*p2 >= 7",
        ] {
            let c = Condition::parse(s).unwrap();
            let j = serde_json::to_value(condition_json(&c)).unwrap();
            let back = condition_from_json(&j).unwrap();
            assert!(back.equivalent(&c).unwrap(), "{}", s);
        }
    }

    #[test]
    fn huge_coefficients_become_strings() {
        let c = Condition::parse("p1 > 100000000000000000000000").unwrap();
        let j = serde_json::to_value(condition_json(&c)).unwrap();
        assert!(j["dnf"][0][0]["const"].is_string());
        assert!(condition_from_json(&j).unwrap().equivalent(&c).unwrap());
    }
}
