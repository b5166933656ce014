//! JSON descriptor format `{"form": "...", "params": {...}, "L": number | "inf"}`.
//! `SampledPrimitive` reads inline arrays or a CSV file with columns `x,A,B,C`.

use std::path::Path;

use serde_json::{json, Map, Value};

use super::{Cell, CellTable, Form, Hamiltonian, Profile, SampledTable};
use crate::error::{Error, Result};

pub(crate) fn length_from(v: Option<&Value>) -> Result<f64> {
    match v {
        None => Ok(f64::INFINITY),
        Some(Value::String(s)) if s == "inf" || s == "infinity" => Ok(f64::INFINITY),
        Some(Value::Number(n)) => n
            .as_f64()
            .filter(|l| *l > 0.0)
            .ok_or_else(|| Error::Parse(format!("invalid domain length {n}"))),
        Some(other) => Err(Error::Parse(format!("invalid domain length {other}"))),
    }
}

pub(crate) fn length_to(l: f64) -> Value {
    if l.is_finite() {
        json!(l)
    } else {
        json!("inf")
    }
}

pub(crate) fn num(params: &Map<String, Value>, key: &str) -> Result<f64> {
    params
        .get(key)
        .and_then(Value::as_f64)
        .ok_or_else(|| Error::Parse(format!("missing numeric parameter '{key}'")))
}

pub(crate) fn floats(params: &Map<String, Value>, key: &str) -> Result<Vec<f64>> {
    let arr = params
        .get(key)
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Parse(format!("missing array parameter '{key}'")))?;
    arr.iter()
        .map(|v| {
            v.as_f64()
                .ok_or_else(|| Error::Parse(format!("non-numeric entry in '{key}'")))
        })
        .collect()
}

pub(crate) fn profile(params: &Map<String, Value>, key: &str) -> Result<Profile> {
    let v = params
        .get(key)
        .cloned()
        .ok_or_else(|| Error::Parse(format!("missing profile '{key}'")))?;
    Ok(serde_json::from_value(v)?)
}

/// Reads `x,A,B,C` rows (header required).
pub fn read_primitive_csv(path: &Path) -> Result<SampledTable> {
    let mut rdr = csv::Reader::from_path(path)?;
    let (mut x, mut a, mut b, mut c) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for row in rdr.records() {
        let row = row?;
        let get = |i: usize| -> Result<f64> {
            row.get(i)
                .ok_or_else(|| Error::Parse("short CSV row".into()))?
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(e.to_string()))
        };
        x.push(get(0)?);
        a.push(get(1)?);
        b.push(get(2)?);
        c.push(get(3)?);
    }
    SampledTable::new(x, a, b, c)
}

fn from_value(v: &Value, base: Option<&Path>) -> Result<Hamiltonian> {
    let obj = v
        .as_object()
        .ok_or_else(|| Error::Parse("descriptor must be an object".into()))?;
    let form = obj
        .get("form")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::Parse("missing 'form'".into()))?;
    let empty = Map::new();
    let params = obj
        .get("params")
        .and_then(Value::as_object)
        .unwrap_or(&empty);
    let length = length_from(obj.get("L"))?;
    let inner = |key: &str| -> Result<Box<Hamiltonian>> {
        let v = params
            .get(key)
            .ok_or_else(|| Error::Parse(format!("missing '{key}'")))?;
        Ok(Box::new(from_value(v, base)?))
    };
    let form = match form {
        "Constant" => Form::Constant {
            a0: num(params, "a0")?,
            b0: num(params, "b0")?,
            c0: num(params, "c0")?,
        },
        "PowerLawAlpha" => Form::PowerLawAlpha {
            alpha: num(params, "alpha")?,
        },
        "StepExample" => Form::StepExample,
        "DiagonalPower" => {
            let kappa = num(params, "kappa")?;
            let scale = params
                .get("scale")
                .and_then(Value::as_f64)
                .unwrap_or_else(|| super::c_kappa(kappa));
            Form::DiagonalPower { kappa, scale }
        }
        "PiecewiseConstant" => {
            let breakpoints = floats(params, "breakpoints")?;
            let cells = params
                .get("cells")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Parse("missing 'cells'".into()))?
                .iter()
                .map(|c| {
                    let t: [f64; 3] = serde_json::from_value(c.clone())?;
                    Ok(Cell::new(t[0], t[1], t[2]))
                })
                .collect::<Result<Vec<_>>>()?;
            Form::PiecewiseConstant(CellTable::new(breakpoints, cells)?)
        }
        "SampledPrimitive" => {
            if let Some(file) = params.get("csv").and_then(Value::as_str) {
                let path = base.map(|b| b.join(file)).unwrap_or_else(|| file.into());
                Form::SampledPrimitive(read_primitive_csv(&path)?)
            } else {
                Form::SampledPrimitive(SampledTable::new(
                    floats(params, "x")?,
                    floats(params, "A")?,
                    floats(params, "B")?,
                    floats(params, "C")?,
                )?)
            }
        }
        "Profiles" => Form::Profiles {
            a: profile(params, "a")?,
            b: profile(params, "b")?,
            c: profile(params, "c")?,
        },
        "KreinString" => Form::KreinString {
            w: profile(params, "w")?,
        },
        "Scaled" => Form::Scaled {
            inner: inner("inner")?,
            r1: num(params, "r1")?,
            r2: num(params, "r2")?,
            r3: num(params, "r3")?,
        },
        "Flipped" => Form::Flipped {
            inner: inner("inner")?,
        },
        "TraceNormalized" => Form::TraceNormalized {
            inner: inner("inner")?,
        },
        other => return Err(Error::Parse(format!("unknown form '{other}'"))),
    };
    Ok(Hamiltonian { length, form })
}

/// Parses a descriptor; relative CSV paths resolve against `base`.
pub fn parse_descriptor(text: &str, base: Option<&Path>) -> Result<Hamiltonian> {
    let v: Value = serde_json::from_str(text)?;
    from_value(&v, base)
}

pub fn read_descriptor(path: &Path) -> Result<Hamiltonian> {
    let text = std::fs::read_to_string(path)?;
    parse_descriptor(&text, path.parent())
}

/// Serializes a Hamiltonian; tabulated data is written inline.
pub fn to_descriptor_json(h: &Hamiltonian) -> Value {
    let (form, params) = match &h.form {
        Form::Constant { a0, b0, c0 } => ("Constant", json!({"a0": a0, "b0": b0, "c0": c0})),
        Form::PowerLawAlpha { alpha } => ("PowerLawAlpha", json!({ "alpha": alpha })),
        Form::StepExample => ("StepExample", json!({})),
        Form::DiagonalPower { kappa, scale } => {
            ("DiagonalPower", json!({"kappa": kappa, "scale": scale}))
        }
        Form::PiecewiseConstant(t) => (
            "PiecewiseConstant",
            json!({
                "breakpoints": t.breakpoints,
                "cells": t.cells.iter().map(|c| [c.a, c.b, c.c]).collect::<Vec<_>>(),
            }),
        ),
        Form::SampledPrimitive(t) => (
            "SampledPrimitive",
            json!({
                "x": t.grid,
                "A": t.values.iter().map(|p| p.a).collect::<Vec<_>>(),
                "B": t.values.iter().map(|p| p.b).collect::<Vec<_>>(),
                "C": t.values.iter().map(|p| p.c).collect::<Vec<_>>(),
            }),
        ),
        Form::Profiles { a, b, c } => ("Profiles", json!({"a": a, "b": b, "c": c})),
        Form::KreinString { w } => ("KreinString", json!({ "w": w })),
        Form::Scaled { inner, r1, r2, r3 } => (
            "Scaled",
            json!({"inner": to_descriptor_json(inner), "r1": r1, "r2": r2, "r3": r3}),
        ),
        Form::Flipped { inner } => ("Flipped", json!({ "inner": to_descriptor_json(inner) })),
        Form::TraceNormalized { inner } => (
            "TraceNormalized",
            json!({ "inner": to_descriptor_json(inner) }),
        ),
    };
    json!({"form": form, "params": params, "L": length_to(h.length)})
}
