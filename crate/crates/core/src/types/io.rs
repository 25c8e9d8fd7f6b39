//! Derivation files: JSON Lines, one node per line, root first, children by id.

use super::derivation::{Context, Derivation, Payload, Rule};
use super::ty::{parse_type, Type};
use crate::syntax::{name, parse_term};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PayloadRecord {
    Weaken {
        var: String,
        #[serde(rename = "type")]
        ty: String,
    },
    Merge {
        vars: Vec<String>,
        target: String,
    },
    Inst {
        #[serde(rename = "type")]
        ty: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub id: usize,
    pub rule: String,
    pub context: Vec<(String, String)>,
    pub term: String,
    #[serde(rename = "type")]
    pub ty: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payload: Option<PayloadRecord>,
    #[serde(default)]
    pub children: Vec<usize>,
}

#[derive(Debug, Error)]
pub enum DerivationFileError {
    #[error("line {line}: {source}")]
    Json { line: usize, source: serde_json::Error },
    #[error("node {id}: {msg}")]
    Node { id: usize, msg: String },
    #[error("empty derivation file")]
    Empty,
}

pub fn to_records(d: &Derivation) -> Vec<NodeRecord> {
    fn go(d: &Derivation, out: &mut Vec<NodeRecord>) -> usize {
        let id = out.len();
        out.push(NodeRecord {
            id,
            rule: d.rule.tag().to_string(),
            context: d.ctx.iter().map(|(x, t)| (x.to_string(), t.to_string())).collect(),
            term: d.term.to_string(),
            ty: d.ty.to_string(),
            payload: match &d.payload {
                Payload::None => None,
                Payload::Weaken { var, ty } => Some(PayloadRecord::Weaken {
                    var: var.to_string(),
                    ty: ty.to_string(),
                }),
                Payload::Merge { vars, target } => Some(PayloadRecord::Merge {
                    vars: vars.iter().map(|v| v.to_string()).collect(),
                    target: target.to_string(),
                }),
                Payload::Inst(t) => Some(PayloadRecord::Inst { ty: t.to_string() }),
            },
            children: Vec::new(),
        });
        let kids: Vec<usize> = d.premises.iter().map(|p| go(p, out)).collect();
        out[id].children = kids;
        id
    }
    let mut out = Vec::new();
    go(d, &mut out);
    out
}

pub fn write_jsonl(d: &Derivation) -> String {
    let mut s = String::new();
    for r in to_records(d) {
        s.push_str(&serde_json::to_string(&r).expect("records serialize"));
        s.push('\n');
    }
    s
}

/// Rebuilds the tree exactly as written. Call `validate` to check it.
pub fn from_records(records: &[NodeRecord]) -> Result<Derivation, DerivationFileError> {
    let root = records.first().ok_or(DerivationFileError::Empty)?.id;
    let by_id: HashMap<usize, &NodeRecord> = records.iter().map(|r| (r.id, r)).collect();
    if by_id.len() != records.len() {
        return Err(DerivationFileError::Node {
            id: root,
            msg: "duplicate node ids".into(),
        });
    }
    fn ty(id: usize, s: &str) -> Result<Type, DerivationFileError> {
        parse_type(s).map_err(|e| DerivationFileError::Node {
            id,
            msg: format!("type {s:?}: {e}"),
        })
    }
    fn build(
        id: usize,
        by_id: &HashMap<usize, &NodeRecord>,
        depth: usize,
    ) -> Result<Derivation, DerivationFileError> {
        let err = |msg: String| DerivationFileError::Node { id, msg };
        if depth > by_id.len() {
            return Err(err("children form a cycle".into()));
        }
        let r = by_id.get(&id).ok_or_else(|| err("missing node".into()))?;
        let rule = Rule::from_tag(&r.rule).ok_or_else(|| err(format!("unknown rule {:?}", r.rule)))?;
        let mut ctx = Context::new();
        for (x, t) in &r.context {
            ctx.insert(name(x), ty(id, t)?);
        }
        let term = parse_term(&r.term).map_err(|e| err(format!("term {:?}: {e}", r.term)))?;
        let payload = match &r.payload {
            None => Payload::None,
            Some(PayloadRecord::Weaken { var, ty: t }) => Payload::Weaken {
                var: name(var),
                ty: ty(id, t)?,
            },
            Some(PayloadRecord::Merge { vars, target }) => Payload::Merge {
                vars: vars.iter().map(|v| name(v)).collect(),
                target: name(target),
            },
            Some(PayloadRecord::Inst { ty: t }) => Payload::Inst(ty(id, t)?),
        };
        let premises = r
            .children
            .iter()
            .map(|c| build(*c, by_id, depth + 1))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Derivation {
            rule,
            ctx,
            term,
            ty: ty(id, &r.ty)?,
            premises,
            payload,
        })
    }
    build(root, &by_id, 0)
}

pub fn read_jsonl(src: &str) -> Result<Derivation, DerivationFileError> {
    let mut records = Vec::new();
    for (i, line) in src.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let r: NodeRecord =
            serde_json::from_str(line).map_err(|source| DerivationFileError::Json { line: i + 1, source })?;
        records.push(r);
    }
    from_records(&records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{ATerm, Elaborator};

    #[test]
    fn round_trip() {
        let t = parse_term(r"(\f. \z. f (f z)) (\x. if x then x else x) 0").unwrap();
        let d = Elaborator::new().infer_closed(&ATerm::from_term(&t)).unwrap();
        let back = read_jsonl(&write_jsonl(&d)).unwrap();
        back.validate().unwrap();
        assert_eq!(back.node_count(), d.node_count());
        assert_eq!(back.degree(), d.degree());
        assert_eq!(back.weight(2), d.weight(2));
    }

    #[test]
    fn tampered_node_is_reported() {
        let t = parse_term(r"(\x. x) 0").unwrap();
        let d = Elaborator::new().infer_closed(&ATerm::from_term(&t)).unwrap();
        let mut recs = to_records(&d);
        let last = recs.len() - 1;
        recs[last].ty = "B -> B".into();
        let back = from_records(&recs).unwrap();
        assert!(back.validate().is_err());
    }
}
