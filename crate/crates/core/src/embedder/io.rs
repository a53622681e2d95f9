//! Text parameter dump:
//!
//! ```text
//! chemvise-mlp,1
//! layer_dims,960,128,128,128,512
//! activation,relu
//! seed,42
//! w0,<row-major weights of layer 0>
//! b0,<biases of layer 0>
//! ...
//! ```
//!
//! Floats use shortest round-trip formatting, so a reload is bitwise exact.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use ndarray::{Array1, Array2};

use super::mlp::{Activation, MlpModel};
use crate::{Error, Result};

const MAGIC: &str = "chemvise-mlp,1";

pub(crate) fn mlp_to_text(model: &MlpModel) -> String {
    let mut out = String::new();
    let join = |it: &mut dyn Iterator<Item = String>| it.collect::<Vec<_>>().join(",");
    writeln!(out, "{MAGIC}").unwrap();
    writeln!(
        out,
        "layer_dims,{}",
        join(&mut model.layer_dims.iter().map(|d| d.to_string()))
    )
    .unwrap();
    writeln!(out, "activation,relu").unwrap();
    writeln!(out, "seed,{}", model.init_seed).unwrap();
    for (l, (w, b)) in model.weights.iter().zip(&model.biases).enumerate() {
        writeln!(out, "w{l},{}", join(&mut w.iter().map(|v| v.to_string()))).unwrap();
        writeln!(out, "b{l},{}", join(&mut b.iter().map(|v| v.to_string()))).unwrap();
    }
    out
}

pub(crate) fn mlp_from_text(text: &str) -> Result<MlpModel> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i as u64 + 1, l));
    let mut next = |what: &str| {
        lines.next().ok_or_else(|| Error::Parse {
            line: 0,
            message: format!("model dump ends before {what}"),
        })
    };
    let (line, magic) = next("header")?;
    if magic.trim() != MAGIC {
        return Err(Error::Parse {
            line,
            message: "not a chemvise MLP dump".into(),
        });
    }

    fn field<'a>(line: u64, text: &'a str, key: &str) -> Result<Vec<&'a str>> {
        let mut cells = text.trim().split(',');
        if cells.next() != Some(key) {
            return Err(Error::Parse {
                line,
                message: format!("expected `{key}` row"),
            });
        }
        Ok(cells.collect())
    }
    fn numbers<T: std::str::FromStr>(line: u64, cells: &[&str]) -> Result<Vec<T>> {
        cells
            .iter()
            .map(|c| {
                c.parse().map_err(|_| Error::Parse {
                    line,
                    message: format!("bad number `{c}`"),
                })
            })
            .collect()
    }

    let (line, text) = next("layer_dims")?;
    let layer_dims: Vec<usize> = numbers(line, &field(line, text, "layer_dims")?)?;
    if layer_dims.len() < 2 || layer_dims.contains(&0) {
        return Err(Error::Parse {
            line,
            message: format!("invalid layer dims {layer_dims:?}"),
        });
    }
    let (line, text) = next("activation")?;
    if field(line, text, "activation")? != ["relu"] {
        return Err(Error::Parse {
            line,
            message: "unsupported activation".into(),
        });
    }
    let (line, text) = next("seed")?;
    let seed: Vec<u64> = numbers(line, &field(line, text, "seed")?)?;
    let init_seed = *seed.first().ok_or(Error::Parse {
        line,
        message: "missing seed".into(),
    })?;

    let mut weights = Vec::new();
    let mut biases = Vec::new();
    for (l, pair) in layer_dims.windows(2).enumerate() {
        let (fan_in, fan_out) = (pair[0], pair[1]);
        let (line, text) = next("weights")?;
        let w: Vec<f64> = numbers(line, &field(line, text, &format!("w{l}"))?)?;
        let w = Array2::from_shape_vec((fan_out, fan_in), w).map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        let (line, text) = next("biases")?;
        let b: Vec<f64> = numbers(line, &field(line, text, &format!("b{l}"))?)?;
        if b.len() != fan_out {
            return Err(Error::Parse {
                line,
                message: format!("expected {fan_out} biases, found {}", b.len()),
            });
        }
        weights.push(w);
        biases.push(Array1::from(b));
    }
    Ok(MlpModel {
        layer_dims,
        weights,
        biases,
        activation: Activation::Relu,
        init_seed,
    })
}

pub fn save_mlp(model: &MlpModel, path: &Path) -> Result<()> {
    fs::write(path, mlp_to_text(model)).map_err(|e| Error::io(path, e))
}

pub fn load_mlp(path: &Path) -> Result<MlpModel> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    mlp_from_text(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedder::init_mlp;

    #[test]
    fn reload_is_bitwise() {
        let m = init_mlp(&[7, 5, 3], 21).unwrap();
        let back = mlp_from_text(&mlp_to_text(&m)).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn truncated_dump_fails() {
        let m = init_mlp(&[2, 2], 1).unwrap();
        let text = mlp_to_text(&m);
        let cut: String = text.lines().take(4).collect::<Vec<_>>().join("\n");
        assert!(matches!(mlp_from_text(&cut), Err(Error::Parse { .. })));
    }
}
