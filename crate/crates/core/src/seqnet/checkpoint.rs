use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

use super::model::{ModelConfig, ModelParams};

const MAGIC: &str = "shotarc-checkpoint";
const VERSION: u32 = 1;

/// Trained model plus the train-split feature statistics needed to
/// standardize new inputs the same way.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub model: ModelParams,
    pub feature_mean: [f64; 4],
    pub feature_std: [f64; 4],
}

/// Serialize a checkpoint.
///
/// Line-oriented text: the magic string and version, a config block, the
/// feature statistics, then every parameter tensor in declaration order
/// as a `tensor <name> <len>` line followed by one space-separated value
/// line. Floats are printed in shortest round-trip form, so
/// `load(save(m))` reproduces `m` bit for bit.
pub fn save_checkpoint(ckpt: &Checkpoint, path: &Path) -> Result<()> {
    let mut out = String::new();
    let cfg = &ckpt.model.config;
    writeln!(out, "{MAGIC} v{VERSION}").unwrap();
    writeln!(out, "num_layers {}", cfg.num_layers).unwrap();
    writeln!(out, "units_per_layer {}", cfg.units_per_layer).unwrap();
    writeln!(out, "components {}", cfg.components).unwrap();
    writeln!(out, "seq_len {}", cfg.seq_len).unwrap();
    writeln!(out, "input_dim {}", cfg.input_dim).unwrap();
    writeln!(out, "bidirectional {}", cfg.bidirectional).unwrap();
    writeln!(out, "feature_mean {}", join_floats(&ckpt.feature_mean)).unwrap();
    writeln!(out, "feature_std {}", join_floats(&ckpt.feature_std)).unwrap();
    ckpt.model.for_each_tensor(&mut |name, tensor| {
        writeln!(out, "tensor {name} {}", tensor.len()).unwrap();
        writeln!(out, "{}", join_floats(tensor)).unwrap();
    });
    writeln!(out, "end").unwrap();
    crate::write_atomic(path, out.as_bytes())
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Checkpoint("empty file".into()))?;
    if header != format!("{MAGIC} v{VERSION}") {
        return Err(Error::Checkpoint(format!(
            "bad header {header:?}, expected {MAGIC} v{VERSION}"
        )));
    }

    let mut num_layers = None;
    let mut units = None;
    let mut components = None;
    let mut seq_len = None;
    let mut input_dim = None;
    let mut bidirectional = None;
    let mut feature_mean = None;
    let mut feature_std = None;

    let mut line = lines.next();
    while let Some(l) = line {
        let (key, rest) = l
            .split_once(' ')
            .ok_or_else(|| Error::Checkpoint(format!("malformed line {l:?}")))?;
        match key {
            "num_layers" => num_layers = Some(parse_usize(rest)?),
            "units_per_layer" => units = Some(parse_usize(rest)?),
            "components" => components = Some(parse_usize(rest)?),
            "seq_len" => seq_len = Some(parse_usize(rest)?),
            "input_dim" => input_dim = Some(parse_usize(rest)?),
            "bidirectional" => {
                bidirectional =
                    Some(rest.parse::<bool>().map_err(|_| {
                        Error::Checkpoint(format!("bad bidirectional flag {rest:?}"))
                    })?)
            }
            "feature_mean" => feature_mean = Some(parse_floats_fixed(rest)?),
            "feature_std" => feature_std = Some(parse_floats_fixed(rest)?),
            "tensor" => break,
            other => {
                return Err(Error::Checkpoint(format!("unknown config key {other:?}")));
            }
        }
        line = lines.next();
    }

    let config = ModelConfig {
        num_layers: require(num_layers, "num_layers")?,
        units_per_layer: require(units, "units_per_layer")?,
        components: require(components, "components")?,
        seq_len: require(seq_len, "seq_len")?,
        input_dim: require(input_dim, "input_dim")?,
        bidirectional: require(bidirectional, "bidirectional")?,
    };
    let mut model = ModelParams::zeros(config)?;

    // `line` currently holds the first tensor header.
    let mut fill_err = None;
    model.for_each_tensor_mut(&mut |name, tensor| {
        if fill_err.is_some() {
            return;
        }
        let header = match line {
            Some(h) => h,
            None => {
                fill_err = Some(Error::Checkpoint(format!("missing tensor {name}")));
                return;
            }
        };
        let expect = format!("tensor {name} {}", tensor.len());
        if header != expect {
            fill_err = Some(Error::Checkpoint(format!(
                "tensor header {header:?}, expected {expect:?}"
            )));
            return;
        }
        let values = match lines.next() {
            Some(v) => v,
            None => {
                fill_err = Some(Error::Checkpoint(format!("missing values for {name}")));
                return;
            }
        };
        let mut count = 0;
        for (slot, tok) in tensor.iter_mut().zip(values.split_ascii_whitespace()) {
            match tok.parse::<f64>() {
                Ok(v) => *slot = v,
                Err(_) => {
                    fill_err = Some(Error::Checkpoint(format!("bad float {tok:?} in {name}")));
                    return;
                }
            }
            count += 1;
        }
        if count != tensor.len() {
            fill_err = Some(Error::Checkpoint(format!(
                "tensor {name}: expected {} values, got {count}",
                tensor.len()
            )));
            return;
        }
        line = lines.next();
    });
    if let Some(e) = fill_err {
        return Err(e);
    }
    if line != Some("end") {
        return Err(Error::Checkpoint(format!(
            "expected trailing end marker, got {line:?}"
        )));
    }

    Ok(Checkpoint {
        model,
        feature_mean: require(feature_mean, "feature_mean")?,
        feature_std: require(feature_std, "feature_std")?,
    })
}

fn join_floats(vals: &[f64]) -> String {
    let mut s = String::new();
    for (i, v) in vals.iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        write!(s, "{v}").unwrap();
    }
    s
}

fn parse_usize(s: &str) -> Result<usize> {
    s.parse()
        .map_err(|_| Error::Checkpoint(format!("bad integer {s:?}")))
}

fn parse_floats_fixed(s: &str) -> Result<[f64; 4]> {
    let vals: Vec<f64> = s
        .split_ascii_whitespace()
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| Error::Checkpoint(format!("bad float {t:?}")))
        })
        .collect::<Result<_>>()?;
    <[f64; 4]>::try_from(vals)
        .map_err(|v: Vec<f64>| Error::Checkpoint(format!("expected 4 floats, got {}", v.len())))
}

fn require<T>(opt: Option<T>, name: &str) -> Result<T> {
    opt.ok_or_else(|| Error::Checkpoint(format!("missing config key {name}")))
}
