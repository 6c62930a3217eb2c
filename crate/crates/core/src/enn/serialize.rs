//! Plain-text model files.
//!
//! ```text
//! # ennsplit model v1
//! input_dim=2
//! hidden=6
//! half_coeffs=6
//! dct_size=128
//! A1 <(input_dim+1)*hidden values, row-major>
//! A2 <hidden+1 values>
//! F1 <half_coeffs*hidden values, row-major>
//! F2 <half_coeffs values>
//! ```
//!
//! Floats are written in Rust's shortest round-trip form, so a save/load
//! cycle is bit-exact.

use std::fmt::Write as _;
use std::path::Path;

use ndarray::{Array1, Array2};

use super::model::{EnnConfig, EnnModel};
use crate::error::{Error, Result};

pub const HEADER: &str = "# ennsplit model v1";

fn push_row<'a>(out: &mut String, tag: &str, values: impl Iterator<Item = &'a f64>) {
    out.push_str(tag);
    for v in values {
        let _ = write!(out, " {v:?}");
    }
    out.push('\n');
}

pub fn to_text(model: &EnnModel) -> String {
    let c = model.config();
    let mut out = format!(
        "{HEADER}\ninput_dim={}\nhidden={}\nhalf_coeffs={}\ndct_size={}\n",
        c.input_dim, c.hidden, c.half_coeffs, c.dct_size
    );
    push_row(&mut out, "A1", model.a1.iter());
    push_row(&mut out, "A2", model.a2.iter());
    push_row(&mut out, "F1", model.f1.iter());
    push_row(&mut out, "F2", model.f2.iter());
    out
}

fn parse_count(value: &str, key: &str) -> Result<usize> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad value for {key}: `{value}`")))
}

fn parse_floats(rest: &str, tag: &str) -> Result<Vec<f64>> {
    rest.split_whitespace()
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad number `{t}` in {tag}")))
        })
        .collect()
}

pub fn from_text(text: &str) -> Result<EnnModel> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    if lines.next() != Some(HEADER) {
        return Err(Error::Parse("missing header".into()));
    }
    let (mut d, mut m, mut q, mut n) = (None, None, None, None);
    let (mut a1, mut a2, mut f1, mut f2) = (None, None, None, None);
    for line in lines {
        if line.starts_with('#') {
            continue;
        }
        if let Some((key, value)) = line.split_once('=') {
            let slot = match key.trim() {
                "input_dim" => &mut d,
                "hidden" => &mut m,
                "half_coeffs" => &mut q,
                "dct_size" => &mut n,
                other => return Err(Error::Parse(format!("unknown key `{other}`"))),
            };
            *slot = Some(parse_count(value, key)?);
            continue;
        }
        let (tag, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let values = parse_floats(rest, tag)?;
        let slot = match tag {
            "A1" => &mut a1,
            "A2" => &mut a2,
            "F1" => &mut f1,
            "F2" => &mut f2,
            other => return Err(Error::Parse(format!("unknown line `{other}`"))),
        };
        *slot = Some(values);
    }
    let missing = |what: &str| Error::Parse(format!("missing {what}"));
    let config = EnnConfig::new(
        d.ok_or_else(|| missing("input_dim"))?,
        m.ok_or_else(|| missing("hidden"))?,
        q.ok_or_else(|| missing("half_coeffs"))?,
        n.ok_or_else(|| missing("dct_size"))?,
    )?;
    let (d, m, q) = (config.input_dim, config.hidden, config.half_coeffs);
    let shaped = |v: Vec<f64>, rows: usize, cols: usize| {
        let len = v.len();
        Array2::from_shape_vec((rows, cols), v).map_err(|_| Error::DimensionMismatch {
            expected: rows * cols,
            actual: len,
        })
    };
    let a1 = shaped(a1.ok_or_else(|| missing("A1"))?, d + 1, m)?;
    let f1 = shaped(f1.ok_or_else(|| missing("F1"))?, q, m)?;
    let a2 = Array1::from(a2.ok_or_else(|| missing("A2"))?);
    let f2 = Array1::from(f2.ok_or_else(|| missing("F2"))?);
    EnnModel::from_parts(config, a1, a2, f1, f2)
}

pub fn save(model: &EnnModel, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, to_text(model))?;
    Ok(())
}

pub fn load(path: impl AsRef<Path>) -> Result<EnnModel> {
    from_text(&std::fs::read_to_string(path)?)
}
