//! Plain-text weight files.
//!
//! ```text
//! pachs-mlp 1
//! trunk 2
//! layer 4 64 relu
//! w <64 lines of 4 values>
//! b <64 values>
//! layer 64 1 identity
//! ...
//! head                      (actors only)
//! mean 64 2 identity
//! ...
//! log_std 64 2 identity
//! ...
//! scale <2 values>
//! offset <2 values>
//! end
//! ```
//!
//! Every weight row sits on its own `w` line. Floats are written with 17 significant
//! digits, so a save/load cycle reproduces every bit.

use std::fmt::Write as _;
use std::path::Path;

use super::mlp::{Activation, ActorHead, Layer, Mlp, MlpWeights};
use crate::error::{Error, Result};

const MAGIC: &str = "pachs-mlp 1";

pub fn write_weights(weights: &MlpWeights) -> String {
    let mut out = String::new();
    out.push_str(MAGIC);
    out.push('\n');
    let _ = writeln!(out, "trunk {}", weights.trunk.layers.len());
    for layer in &weights.trunk.layers {
        write_layer(&mut out, "layer", layer);
    }
    if let Some(head) = &weights.head {
        out.push_str("head\n");
        write_layer(&mut out, "mean", &head.mean);
        write_layer(&mut out, "log_std", &head.log_std);
        write_row(&mut out, "scale", &head.scale);
        write_row(&mut out, "offset", &head.offset);
    }
    out.push_str("end\n");
    out
}

fn write_layer(out: &mut String, tag: &str, layer: &Layer) {
    let _ = writeln!(
        out,
        "{tag} {} {} {}",
        layer.input_dim,
        layer.output_dim,
        layer.activation.name()
    );
    for row in layer.weights.chunks_exact(layer.input_dim) {
        write_row(out, "w", row);
    }
    write_row(out, "b", &layer.bias);
}

fn write_row(out: &mut String, tag: &str, values: &[f64]) {
    out.push_str(tag);
    for v in values {
        let _ = write!(out, " {v:.16e}");
    }
    out.push('\n');
}

pub fn save_weights(weights: &MlpWeights, path: &Path) -> Result<()> {
    std::fs::write(path, write_weights(weights)).map_err(|e| Error::io(path, e))
}

pub fn load_weights(path: &Path) -> Result<MlpWeights> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_weights(&text)
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn next_tokens(&mut self) -> Result<(usize, Vec<&'a str>)> {
        for (i, raw) in self.inner.by_ref() {
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            self.line = i + 1;
            return Ok((self.line, trimmed.split_whitespace().collect()));
        }
        Err(Error::Parse {
            line: self.line + 1,
            message: "unexpected end of file".into(),
        })
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn layer_err(layer: usize, message: impl Into<String>) -> Error {
    Error::LayerParse {
        layer,
        message: message.into(),
    }
}

fn parse_floats(layer: usize, line: usize, tokens: &[&str]) -> Result<Vec<f64>> {
    tokens
        .iter()
        .map(|t| {
            let v: f64 = t
                .parse()
                .map_err(|_| layer_err(layer, format!("line {line}: bad number {t:?}")))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(layer_err(layer, format!("line {line}: non-finite value {t:?}")))
            }
        })
        .collect()
}

fn parse_usize(line: usize, t: &str) -> Result<usize> {
    t.parse()
        .map_err(|_| parse_err(line, format!("expected an integer, got {t:?}")))
}

fn expect_row(lines: &mut Lines, layer: usize, tag: &str, len: usize) -> Result<Vec<f64>> {
    let (line, tokens) = lines.next_tokens()?;
    if tokens[0] != tag {
        return Err(layer_err(
            layer,
            format!("line {line}: expected {tag:?}, found {:?}", tokens[0]),
        ));
    }
    let values = parse_floats(layer, line, &tokens[1..])?;
    if values.len() != len {
        return Err(layer_err(
            layer,
            format!("line {line}: {tag} row has {} values, expected {len}", values.len()),
        ));
    }
    Ok(values)
}

fn parse_layer(lines: &mut Lines, index: usize, tag: &str) -> Result<Layer> {
    let (line, tokens) = lines.next_tokens()?;
    if tokens.len() != 4 || tokens[0] != tag {
        return Err(layer_err(
            index,
            format!("line {line}: expected `{tag} <in> <out> <activation>`"),
        ));
    }
    let input_dim = parse_usize(line, tokens[1])?;
    let output_dim = parse_usize(line, tokens[2])?;
    if input_dim == 0 || output_dim == 0 {
        return Err(layer_err(index, format!("line {line}: zero-sized layer")));
    }
    let activation = Activation::parse(tokens[3])
        .ok_or_else(|| layer_err(index, format!("line {line}: unknown activation {:?}", tokens[3])))?;
    let mut weights = Vec::with_capacity(input_dim * output_dim);
    for _ in 0..output_dim {
        weights.extend(expect_row(lines, index, "w", input_dim)?);
    }
    let bias = expect_row(lines, index, "b", output_dim)?;
    Ok(Layer {
        input_dim,
        output_dim,
        weights,
        bias,
        activation,
    })
}

fn check_chain(prev: usize, prev_out: usize, index: usize, input: usize) -> Result<()> {
    if prev_out != input {
        return Err(layer_err(
            index,
            format!("layer {prev} output_dim {prev_out} does not match layer {index} input_dim {input}"),
        ));
    }
    Ok(())
}

pub fn parse_weights(text: &str) -> Result<MlpWeights> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        line: 0,
    };
    let (line, tokens) = lines.next_tokens()?;
    if tokens.join(" ") != MAGIC {
        return Err(parse_err(line, format!("expected header {MAGIC:?}")));
    }
    let (line, tokens) = lines.next_tokens()?;
    if tokens.len() != 2 || tokens[0] != "trunk" {
        return Err(parse_err(line, "expected `trunk <layer count>`"));
    }
    let n = parse_usize(line, tokens[1])?;
    if n == 0 {
        return Err(parse_err(line, "network has no layers"));
    }
    let mut layers: Vec<Layer> = Vec::with_capacity(n);
    for i in 0..n {
        let layer = parse_layer(&mut lines, i, "layer")?;
        if let Some(prev) = layers.last() {
            check_chain(i - 1, prev.output_dim, i, layer.input_dim)?;
        }
        layers.push(layer);
    }
    let trunk_out = layers[n - 1].output_dim;
    let (line, tokens) = lines.next_tokens()?;
    let head = match tokens[0] {
        "end" => None,
        "head" => {
            let mean = parse_layer(&mut lines, n, "mean")?;
            check_chain(n - 1, trunk_out, n, mean.input_dim)?;
            let log_std = parse_layer(&mut lines, n + 1, "log_std")?;
            check_chain(n - 1, trunk_out, n + 1, log_std.input_dim)?;
            if log_std.output_dim != mean.output_dim {
                return Err(layer_err(
                    n + 1,
                    format!(
                        "log_std output_dim {} does not match mean output_dim {}",
                        log_std.output_dim, mean.output_dim
                    ),
                ));
            }
            let m = mean.output_dim;
            let scale = expect_row(&mut lines, n, "scale", m)?;
            let offset = expect_row(&mut lines, n, "offset", m)?;
            let (line, tokens) = lines.next_tokens()?;
            if tokens[0] != "end" {
                return Err(parse_err(line, "expected `end`"));
            }
            Some(ActorHead {
                mean,
                log_std,
                scale,
                offset,
            })
        }
        other => return Err(parse_err(line, format!("expected `head` or `end`, found {other:?}"))),
    };
    let weights = MlpWeights {
        trunk: Mlp { layers },
        head,
    };
    weights.validate()?;
    Ok(weights)
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::models::mlp::tests::{actor_weights, random_layer};

    fn critic_weights() -> MlpWeights {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        MlpWeights {
            trunk: Mlp::new(vec![
                random_layer(&mut rng, 4, 64, Activation::Relu),
                random_layer(&mut rng, 64, 1, Activation::Identity),
            ])
            .unwrap(),
            head: None,
        }
    }

    #[test]
    fn critic_round_trip_is_exact() {
        let w = critic_weights();
        let text = write_weights(&w);
        let back = parse_weights(&text).unwrap();
        assert_eq!(back, w);
        assert_eq!(write_weights(&back), text);
    }

    #[test]
    fn actor_round_trip_is_exact() {
        let w = actor_weights(&mut ChaCha8Rng::seed_from_u64(3), -1.0, 0.25);
        assert_eq!(parse_weights(&write_weights(&w)).unwrap(), w);
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("critic.mlp");
        let w = critic_weights();
        save_weights(&w, &path).unwrap();
        assert_eq!(load_weights(&path).unwrap(), w);
    }

    #[test]
    fn mismatched_chain_names_the_layers() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = Mlp {
            layers: vec![
                random_layer(&mut rng, 4, 64, Activation::Relu),
                random_layer(&mut rng, 32, 1, Activation::Identity),
            ],
        };
        let text = write_weights(&MlpWeights { trunk: a, head: None });
        let err = parse_weights(&text).unwrap_err();
        match err {
            Error::LayerParse { layer, message } => {
                assert_eq!(layer, 1);
                assert!(message.contains("layer 0") && message.contains("layer 1"), "{message}");
            }
            e => panic!("unexpected error {e}"),
        }
    }

    #[test]
    fn short_row_is_reported_with_layer() {
        let text = write_weights(&critic_weights());
        let mut lines: Vec<String> = text.lines().map(String::from).collect();
        let idx = lines.iter().position(|l| l.starts_with("b ")).unwrap();
        lines[idx] = "b 1.0".into();
        let err = parse_weights(&lines.join("\n")).unwrap_err();
        assert!(matches!(err, Error::LayerParse { layer: 0, .. }), "{err}");
    }

    #[test]
    fn non_finite_value_is_rejected() {
        let text = write_weights(&critic_weights()).replacen("w ", "w NaN ", 1);
        assert!(parse_weights(&text).is_err());
    }

    #[test]
    fn bad_header_is_a_parse_error() {
        assert!(matches!(
            parse_weights("not a weight file\n"),
            Err(Error::Parse { line: 1, .. })
        ));
    }
}
