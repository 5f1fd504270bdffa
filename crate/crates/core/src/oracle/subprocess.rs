use std::io::{BufRead, BufReader, BufWriter, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::sync::Mutex;

use super::protocol::{decode, encode, Request, Response};
use super::PredictionOracle;
use crate::data::{series_to_rows, Series};
use crate::error::{Error, Result};

/// An oracle backed by an external process speaking the NDJSON protocol.
///
/// Requests are serialized: one in flight at a time. Use one instance per
/// worker for parallel explanation.
pub struct SubprocessOracle {
    command: Vec<String>,
    classes: usize,
    shape: (usize, usize),
    session: Mutex<Session>,
}

struct Session {
    child: Child,
    stdin: Option<BufWriter<ChildStdin>>,
    stdout: BufReader<ChildStdout>,
    next_id: u64,
    line: String,
}

impl Session {
    fn send(&mut self, request: &Request) -> Result<()> {
        let stdin = self
            .stdin
            .as_mut()
            .ok_or_else(|| Error::Protocol("session already shut down".into()))?;
        let io = |e| Error::Oracle(format!("writing to model stdin: {e}"));
        stdin.write_all(encode(request)?.as_bytes()).map_err(io)?;
        stdin.flush().map_err(io)
    }

    fn receive(&mut self) -> Result<Response> {
        self.line.clear();
        let n = self
            .stdout
            .read_line(&mut self.line)
            .map_err(|e| Error::Oracle(format!("reading model stdout: {e}")))?;
        if n == 0 {
            let status = self.child.try_wait().ok().flatten();
            return Err(Error::Protocol(format!(
                "model closed stdout (exit status: {})",
                status.map_or("still running".to_string(), |s| s.to_string())
            )));
        }
        decode(&self.line)
    }
}

impl SubprocessOracle {
    /// Spawns `command` (split with POSIX shell quoting rules) and performs the
    /// handshake for `T x V` inputs.
    pub fn spawn(command: &str, time_steps: usize, signals: usize) -> Result<Self> {
        let argv = shlex::split(command)
            .filter(|a| !a.is_empty())
            .ok_or_else(|| Error::Oracle(format!("cannot parse model command `{command}`")))?;
        let mut child = Command::new(&argv[0])
            .args(&argv[1..])
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| Error::Oracle(format!("spawning `{command}`: {e}")))?;
        let stdin = BufWriter::new(child.stdin.take().expect("stdin is piped"));
        let stdout = BufReader::new(child.stdout.take().expect("stdout is piped"));
        let mut session = Session {
            child,
            stdin: Some(stdin),
            stdout,
            next_id: 0,
            line: String::new(),
        };
        session.send(&Request::Handshake {
            time_steps,
            signals,
        })?;
        let classes = match session.receive()? {
            Response::Ready { classes } if classes > 0 => classes,
            other => {
                return Err(Error::Protocol(format!(
                    "expected a ready message with C > 0, got {other:?}"
                )))
            }
        };
        Ok(Self {
            command: argv,
            classes,
            shape: (time_steps, signals),
            session: Mutex::new(session),
        })
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn command(&self) -> &[String] {
        &self.command
    }

    /// Sends the shutdown message and waits for a zero exit status.
    pub fn shutdown(mut self) -> Result<()> {
        let session = self.session.get_mut().unwrap_or_else(|p| p.into_inner());
        finish(session)
    }
}

fn finish(session: &mut Session) -> Result<()> {
    if session.stdin.is_none() {
        return Ok(());
    }
    session.send(&Request::Shutdown)?;
    drop(session.stdin.take());
    let status = session
        .child
        .wait()
        .map_err(|e| Error::Oracle(format!("waiting for model: {e}")))?;
    if status.success() {
        Ok(())
    } else {
        Err(Error::Protocol(format!("model exited with {status}")))
    }
}

impl Drop for SubprocessOracle {
    fn drop(&mut self) {
        if let Ok(session) = self.session.get_mut() {
            if finish(session).is_err() {
                let _ = session.child.kill();
                let _ = session.child.wait();
            }
        }
    }
}

impl PredictionOracle for SubprocessOracle {
    fn predict(&self, values: &Series) -> Result<Vec<f64>> {
        if values.dim() != self.shape {
            return Err(Error::ShapeMismatch {
                expected: self.shape,
                actual: values.dim(),
            });
        }
        let mut session = self
            .session
            .lock()
            .map_err(|_| Error::Oracle("model session poisoned".into()))?;
        session.next_id += 1;
        let id = format!("r{}", session.next_id);
        session.send(&Request::Predict {
            id: id.clone(),
            values: series_to_rows(values),
        })?;
        match session.receive()? {
            Response::Probs { id: got, probs } if got == id => Ok(probs),
            Response::Probs { id: got, .. } => Err(Error::Protocol(format!(
                "response id `{got}` does not match request `{id}`"
            ))),
            other => Err(Error::Protocol(format!("expected probs, got {other:?}"))),
        }
    }
}
