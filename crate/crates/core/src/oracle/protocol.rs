//! Newline-delimited JSON wire protocol between the engine and a model process.
//!
//! ```text
//! engine -> model  {"type":"handshake","T":30,"V":8}
//! model  -> engine {"type":"ready","C":3}
//! engine -> model  {"type":"predict","id":"r1","values":[[...V...], ...T rows...]}
//! model  -> engine {"type":"probs","id":"r1","probs":[...C...]}
//! engine -> model  {"type":"shutdown"}          (model exits 0)
//! ```

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{check_probabilities, PredictionOracle};
use crate::data::rows_to_series;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum Request {
    Handshake {
        #[serde(rename = "T")]
        time_steps: usize,
        #[serde(rename = "V")]
        signals: usize,
    },
    Predict {
        id: String,
        values: Vec<Vec<f64>>,
    },
    Shutdown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum Response {
    Ready {
        #[serde(rename = "C")]
        classes: usize,
    },
    Probs {
        id: String,
        probs: Vec<f64>,
    },
}

/// Parses one protocol line; anything that is not a valid message is an error.
pub fn decode<'a, M: Deserialize<'a>>(line: &'a str) -> Result<M> {
    serde_json::from_str(line.trim_end_matches(['\n', '\r']))
        .map_err(|e| Error::Protocol(format!("invalid message `{}`: {e}", line.trim_end())))
}

pub fn encode<M: Serialize>(msg: &M) -> Result<String> {
    let mut line = serde_json::to_string(msg)?;
    line.push('\n');
    Ok(line)
}

/// Model side of the protocol: answers requests from `input` with `model`
/// until a shutdown message arrives.
pub fn serve<R: BufRead, W: Write>(
    model: &dyn PredictionOracle,
    classes: usize,
    mut input: R,
    mut output: W,
) -> Result<()> {
    let io = |e| Error::io("<model stdio>", e);
    let mut line = String::new();
    let mut shape = None;
    loop {
        line.clear();
        if input.read_line(&mut line).map_err(io)? == 0 {
            return Err(Error::Protocol(
                "engine closed the connection without shutdown".into(),
            ));
        }
        if line.trim().is_empty() {
            continue;
        }
        match decode::<Request>(&line)? {
            Request::Handshake {
                time_steps,
                signals,
            } => {
                shape = Some((time_steps, signals));
                output
                    .write_all(encode(&Response::Ready { classes })?.as_bytes())
                    .map_err(io)?;
            }
            Request::Predict { id, values } => {
                let expected =
                    shape.ok_or_else(|| Error::Protocol("predict before handshake".into()))?;
                let series = rows_to_series(&values)?;
                if series.dim() != expected {
                    return Err(Error::ShapeMismatch {
                        expected,
                        actual: series.dim(),
                    });
                }
                let probs = model.predict(&series)?;
                check_probabilities(&probs, classes)?;
                output
                    .write_all(encode(&Response::Probs { id, probs })?.as_bytes())
                    .map_err(io)?;
            }
            Request::Shutdown => return Ok(()),
        }
        output.flush().map_err(io)?;
    }
}
