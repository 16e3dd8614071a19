//! Plain-text `key=value` files: weights, run configs and manifests.
//!
//! Blank lines and lines starting with `#` are ignored. Keys are unique.
//! Weights are written with the shortest decimal string that parses back to
//! the same bits.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::dataset::VARIABLE_COUNT;
use crate::network::{WeightState, HIDDEN_NODES};
use crate::{Error, Result, Scalar};

/// A parsed `key=value` file, remembering the line each key came from.
#[derive(Clone, Debug, Default)]
pub struct KeyValues {
    source: String,
    entries: BTreeMap<String, (usize, String)>,
}

impl KeyValues {
    pub fn parse(text: &str, source: impl Into<String>) -> Result<Self> {
        let source = source.into();
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let Some((k, v)) = trimmed.split_once('=') else {
                return Err(Error::KeyValue {
                    path: source,
                    line,
                    message: format!("expected key=value, found {trimmed:?}"),
                });
            };
            let key = k.trim().to_string();
            if entries
                .insert(key.clone(), (line, v.trim().to_string()))
                .is_some()
            {
                return Err(Error::KeyValue {
                    path: source,
                    line,
                    message: format!("duplicate key {key:?}"),
                });
            }
        }
        Ok(Self { source, entries })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(_, v)| v.as_str())
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    fn err(&self, line: usize, message: String) -> Error {
        Error::KeyValue {
            path: self.source.clone(),
            line,
            message,
        }
    }

    /// Parses `key` if present.
    pub fn parse_opt<V: std::str::FromStr>(&self, key: &str) -> Result<Option<V>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse()
                .map(Some)
                .map_err(|_| self.err(*line, format!("cannot parse {key}={v:?}"))),
        }
    }

    pub fn require<V: std::str::FromStr>(&self, key: &str) -> Result<V> {
        self.parse_opt(key)?
            .ok_or_else(|| self.err(0, format!("missing key {key:?}")))
    }

    /// Fails on the first key not in `allowed`.
    pub fn ensure_known(&self, allowed: &[&str]) -> Result<()> {
        for (k, (line, _)) in &self.entries {
            if !allowed.contains(&k.as_str()) {
                return Err(self.err(*line, format!("unknown key {k:?}")));
            }
        }
        Ok(())
    }
}

fn input_key(i: usize, j: usize) -> String {
    format!("w_in.{i}.{j}")
}

fn output_key(i: usize) -> String {
    format!("w_out.{i}")
}

pub fn write_weights<T: Scalar>(ws: &WeightState<T>) -> String {
    let mut out = String::from("# ffbp weights: w_in.<hidden>.<input>, w_out.<hidden>\n");
    let _ = writeln!(out, "bias={}", ws.bias);
    let _ = writeln!(out, "increment={}", ws.increment);
    for (i, row) in ws.input.iter().enumerate() {
        for (j, w) in row.iter().enumerate() {
            let _ = writeln!(out, "{}={}", input_key(i, j), w);
        }
    }
    for (i, w) in ws.output.iter().enumerate() {
        let _ = writeln!(out, "{}={}", output_key(i), w);
    }
    out
}

pub fn parse_weights<T: Scalar>(text: &str, source: impl Into<String>) -> Result<WeightState<T>> {
    let kv = KeyValues::parse(text, source)?;
    let mut allowed: Vec<String> = vec!["bias".into(), "increment".into()];
    for i in 0..HIDDEN_NODES {
        allowed.extend((0..VARIABLE_COUNT).map(|j| input_key(i, j)));
        allowed.push(output_key(i));
    }
    kv.ensure_known(&allowed.iter().map(String::as_str).collect::<Vec<_>>())?;

    let mut ws = WeightState::uniform(T::zero(), kv.require("bias")?, kv.require("increment")?);
    for i in 0..HIDDEN_NODES {
        for j in 0..VARIABLE_COUNT {
            ws.input[i][j] = kv.require(&input_key(i, j))?;
        }
        ws.output[i] = kv.require(&output_key(i))?;
    }
    ws.validate()?;
    Ok(ws)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_round_trip_bit_exact() {
        let mut ws = WeightState::with_initial(0.76_f64);
        ws.input[1][4] = 0.1 + 0.2;
        ws.output[5] = 1.0 / 3.0;
        let back: WeightState<f64> = parse_weights(&write_weights(&ws), "w").unwrap();
        assert_eq!(back, ws);
    }

    #[test]
    fn malformed_weights_report_line() {
        let mut text = write_weights(&WeightState::with_initial(0.5_f64));
        text = text.replace("w_out.3=0.5", "w_out.3=abc");
        let err = parse_weights::<f64>(&text, "w.txt").unwrap_err();
        assert!(
            matches!(err, Error::KeyValue { line, .. } if line > 0),
            "{err}"
        );
        assert!(err.to_string().contains("w_out.3"));

        assert!(parse_weights::<f64>("bias=1\nnot a pair\n", "w").is_err());
        assert!(parse_weights::<f64>("bias=1\nincrement=0.01\n", "w").is_err());
        assert!(parse_weights::<f64>("bias=1\nbias=2\n", "w").is_err());
        let extra = format!(
            "{}bogus=1\n",
            write_weights(&WeightState::with_initial(0.5_f64))
        );
        assert!(parse_weights::<f64>(&extra, "w").is_err());
    }

    #[test]
    fn negative_weight_is_rejected() {
        let text = write_weights(&WeightState::with_initial(0.5_f64))
            .replace("w_in.0.0=0.5", "w_in.0.0=-0.5");
        assert!(matches!(
            parse_weights::<f64>(&text, "w"),
            Err(Error::Precondition(_))
        ));
    }
}
