//! Agents living in a child process.
//!
//! The harness writes one JSON request per line to the child's stdin,
//! `{"system_prompt": ..., "fen": ..., "to_move": "White"}`, and reads one
//! JSON response per line from its stdout, `{"text": ...}`. The child stays
//! alive for the whole game.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::board::{BoardState, Player};

use super::prompt::system_prompt;
use super::HarnessError;

#[derive(Debug, Serialize)]
struct Request<'a> {
    system_prompt: &'a str,
    fen: &'a str,
    to_move: Player,
}

#[derive(Debug, Deserialize)]
struct Response {
    text: String,
}

pub struct ExternalAgent {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<std::io::Result<String>>,
    timeout: Duration,
}

impl ExternalAgent {
    pub fn spawn(command: &[String], timeout: Duration) -> Result<ExternalAgent, HarnessError> {
        let (program, args) = command
            .split_first()
            .ok_or_else(|| HarnessError::Spawn("empty command".into()))?;
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| HarnessError::Spawn(format!("{program}: {e}")))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, lines) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let stop = line.is_err();
                if tx.send(line).is_err() || stop {
                    break;
                }
            }
        });
        Ok(ExternalAgent {
            child,
            stdin,
            lines,
            timeout,
        })
    }

    /// Asks for a move; any failure is returned as a message.
    pub fn ask(&mut self, state: &BoardState) -> Result<String, String> {
        let prompt = system_prompt(state.to_move());
        let request = Request {
            system_prompt: &prompt,
            fen: &state.to_fen(),
            to_move: state.to_move(),
        };
        let line = serde_json::to_string(&request).expect("request serialises");
        writeln!(self.stdin, "{line}")
            .and_then(|_| self.stdin.flush())
            .map_err(|e| format!("cannot write request: {e}"))?;
        let reply = match self.lines.recv_timeout(self.timeout) {
            Ok(Ok(reply)) => reply,
            Ok(Err(e)) => return Err(format!("cannot read response: {e}")),
            Err(RecvTimeoutError::Timeout) => return Err(format!("no response within {:?}", self.timeout)),
            Err(RecvTimeoutError::Disconnected) => return Err("agent closed its output".into()),
        };
        serde_json::from_str::<Response>(&reply)
            .map(|r| r.text)
            .map_err(|e| format!("malformed response: {e}"))
    }
}

impl Drop for ExternalAgent {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}
