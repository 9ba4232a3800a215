//! Client for backends running as child processes.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::Duration;

use super::protocol::{encode_line, BackendInfo, Request, Response, WireToken};
use super::{check_request, Backend, BackendError, ScoreRequest};

/// One child process. Requests are written one at a time and answered in
/// order.
pub struct SubprocessBackend {
    command: String,
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<std::io::Result<String>>,
    line_no: usize,
    timeout: Duration,
    info: Option<BackendInfo>,
}

impl std::fmt::Debug for SubprocessBackend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SubprocessBackend")
            .field("command", &self.command)
            .field("pid", &self.child.id())
            .finish()
    }
}

impl SubprocessBackend {
    /// Launches `command`, split with POSIX shell quoting rules.
    pub fn spawn(command: &str, timeout: Duration) -> Result<Self, BackendError> {
        let argv = shlex::split(command)
            .filter(|argv| !argv.is_empty())
            .ok_or_else(|| BackendError::Spawn {
                command: command.to_string(),
                source: std::io::Error::new(
                    std::io::ErrorKind::InvalidInput,
                    "empty or unparsable command",
                ),
            })?;
        let mut child = Command::new(&argv[0])
            .args(&argv[1..])
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|source| BackendError::Spawn {
                command: command.to_string(),
                source,
            })?;
        let stdin = child.stdin.take().expect("stdin is piped");
        let stdout = child.stdout.take().expect("stdout is piped");
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        Ok(Self {
            command: command.to_string(),
            child,
            stdin,
            lines: rx,
            line_no: 0,
            timeout,
            info: None,
        })
    }

    pub fn info(&self) -> Option<&BackendInfo> {
        self.info.as_ref()
    }

    fn exit_description(&mut self) -> String {
        match self.child.try_wait() {
            Ok(Some(status)) => status.to_string(),
            Ok(None) => "closed its output".to_string(),
            Err(e) => e.to_string(),
        }
    }

    fn send(&mut self, request: &Request) -> Result<(), BackendError> {
        let line = encode_line(request);
        if let Err(e) = self
            .stdin
            .write_all(line.as_bytes())
            .and_then(|_| self.stdin.flush())
        {
            if e.kind() == std::io::ErrorKind::BrokenPipe {
                let desc = self.exit_description();
                return Err(BackendError::BackendCrashed(desc));
            }
            return Err(e.into());
        }
        Ok(())
    }

    fn receive(&mut self) -> Result<Response, BackendError> {
        let line = match self.lines.recv_timeout(self.timeout) {
            Ok(Ok(line)) => line,
            Ok(Err(e)) => return Err(e.into()),
            Err(RecvTimeoutError::Timeout) => {
                return Err(BackendError::Timeout(self.timeout.as_secs_f64()))
            }
            Err(RecvTimeoutError::Disconnected) => {
                // Give the process a moment to be reaped so the status is known.
                let _ = self.child.wait();
                let desc = self.exit_description();
                return Err(BackendError::BackendCrashed(desc));
            }
        };
        self.line_no += 1;
        serde_json::from_str(&line).map_err(|e| BackendError::ProtocolViolation {
            line: self.line_no,
            reason: format!("unparsable response: {e}"),
        })
    }
}

impl Backend for SubprocessBackend {
    fn handshake(&mut self) -> Result<BackendInfo, BackendError> {
        if let Some(info) = &self.info {
            return Ok(info.clone());
        }
        self.send(&Request::Info)?;
        match self.receive()? {
            Response::Info(info) => {
                if info.supports_separator && info.separator_literal.is_empty() {
                    return Err(BackendError::ProtocolViolation {
                        line: self.line_no,
                        reason: "separator_literal must be non-empty".into(),
                    });
                }
                self.info = Some(info.clone());
                Ok(info)
            }
            other => Err(BackendError::ProtocolViolation {
                line: self.line_no,
                reason: format!("expected an info response, got {other:?}"),
            }),
        }
    }

    fn score_raw(&mut self, request: &ScoreRequest) -> Result<Vec<WireToken>, BackendError> {
        check_request(request)?;
        self.send(&Request::Score {
            id: request.id.clone(),
            text: request.text.clone(),
        })?;
        match self.receive()? {
            Response::Scores { id, tokens } if id == request.id => Ok(tokens),
            Response::Scores { id, .. } => Err(BackendError::ProtocolViolation {
                line: self.line_no,
                reason: format!("expected id {:?}, got {id:?}", request.id),
            }),
            Response::Error { message, .. } => Err(BackendError::Reported {
                id: request.id.clone(),
                message,
            }),
            Response::Info(_) => Err(BackendError::ProtocolViolation {
                line: self.line_no,
                reason: "unexpected info response".into(),
            }),
        }
    }
}

impl Drop for SubprocessBackend {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}
