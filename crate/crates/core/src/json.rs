//! JSON formats for lattices and arrangements.
//!
//! Lattices come either as a Hasse diagram `{"labels", "covers"}` with
//! `[a, b]` meaning `b` covers `a`, or in Birkhoff form
//! `{"ji_labels", "ji_order"}` with `[p, q]` meaning `p < q`. Either may
//! carry `"generators"`, a list of element names.

use serde::Deserialize;
use serde_json::{json, Value};

use crate::arrangement::{Arrangement, Hyperplane};
use crate::error::{Error, Result};
use crate::lattice::{Elem, FiniteDistLattice};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LatticeFile {
    #[serde(default)]
    labels: Option<Vec<String>>,
    #[serde(default)]
    covers: Option<Vec<(usize, usize)>>,
    #[serde(default)]
    ji_labels: Option<Vec<String>>,
    #[serde(default)]
    ji_order: Option<Vec<(usize, usize)>>,
    #[serde(default)]
    generators: Option<Vec<String>>,
    /// Informational; element names are recomputed.
    #[serde(default, rename = "elements")]
    _elements: Option<Vec<String>>,
}

/// A parsed lattice together with an optional generator list.
#[derive(Clone, Debug)]
pub struct LatticeInput {
    pub lattice: FiniteDistLattice,
    pub generators: Option<Vec<Elem>>,
}

fn input_error(e: impl std::fmt::Display) -> Error {
    Error::Input(e.to_string())
}

pub fn parse_lattice(v: &Value, cap: usize) -> Result<LatticeInput> {
    let file: LatticeFile = serde_json::from_value(v.clone()).map_err(input_error)?;
    let lattice = match (file.labels, file.covers, file.ji_labels, file.ji_order) {
        (Some(labels), Some(covers), None, None) => FiniteDistLattice::build_from_hasse(&labels, &covers, cap)?,
        (None, None, Some(labels), order) => {
            let order = order.unwrap_or_default();
            if let Some(&(p, q)) = order.iter().find(|&&(p, q)| p >= labels.len() || q >= labels.len()) {
                return Err(Error::Input(format!("order pair ({p}, {q}) out of range")));
            }
            FiniteDistLattice::from_ji_poset(labels, &order, cap)?
        }
        _ => return Err(Error::Input("expected either labels and covers, or ji_labels and ji_order".into())),
    };
    let generators = file
        .generators
        .map(|names| {
            names
                .iter()
                .map(|n| lattice.find(n).ok_or_else(|| Error::Input(format!("unknown generator {n}"))))
                .collect::<Result<Vec<_>>>()
        })
        .transpose()?;
    Ok(LatticeInput { lattice, generators })
}

/// Birkhoff form, with element names listed for reference.
pub fn lattice_to_json(l: &FiniteDistLattice) -> Value {
    json!({
        "ji_labels": l.ji_labels(),
        "ji_order": l.ji_covers(),
        "elements": l.elements().iter().map(|&e| l.name(e)).collect::<Vec<_>>(),
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ArrangementFile {
    dim: usize,
    normals: Vec<Vec<i64>>,
}

pub fn parse_arrangement(v: &Value, face_cap: usize) -> Result<Arrangement> {
    let file: ArrangementFile = serde_json::from_value(v.clone()).map_err(input_error)?;
    if let Some(n) = file.normals.iter().find(|n| n.len() > file.dim) {
        return Err(Error::Input(format!("normal {n:?} is longer than dim {}", file.dim)));
    }
    let hs = file.normals.iter().map(|n| Hyperplane::from_ints(n)).collect::<Result<Vec<_>>>()?;
    let mut arr = Arrangement::with_face_cap(face_cap);
    for h in hs {
        arr.add(h)?;
    }
    Ok(arr)
}

/// `{"dim", "normals"}`; big normals that overflow `i64` stay exact as strings.
pub fn arrangement_to_json(a: &Arrangement) -> Value {
    json!({ "dim": a.dim(), "normals": a.hyperplanes() })
}

/// Reads normals that may have been written as strings.
pub fn parse_normals(v: &Value) -> Result<Vec<Hyperplane>> {
    let rows = v.as_array().ok_or_else(|| Error::Input("normals must be an array".into()))?;
    rows.iter()
        .map(|row| {
            let ints = row
                .as_array()
                .ok_or_else(|| Error::Input("normal must be an array".into()))?
                .iter()
                .map(|x| match x {
                    Value::Number(n) => n.as_i64().map(num_bigint::BigInt::from).ok_or_else(|| Error::Input(format!("bad integer {n}"))),
                    Value::String(s) => s.parse().map_err(input_error),
                    _ => Err(Error::Input(format!("bad integer {x}"))),
                })
                .collect::<Result<Vec<_>>>()?;
            crate::arrangement::normalize(&ints)
        })
        .collect()
}
