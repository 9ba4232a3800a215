//! Serves a [`LanguageModel`] over the stdio protocol.

use std::io::{BufRead, Write};

use super::protocol::{encode_line, Request, Response};
use super::LanguageModel;

/// Answers requests line by line until `input` reaches end of file.
/// Malformed requests get an error response; the loop keeps running.
pub fn serve<M, R, W>(model: &M, input: R, mut output: W) -> std::io::Result<()>
where
    M: LanguageModel + ?Sized,
    R: BufRead,
    W: Write,
{
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let response = match serde_json::from_str::<Request>(&line) {
            Ok(Request::Info) => Response::Info(model.info()),
            Ok(Request::Score { id, text }) if text.is_empty() => Response::Error {
                id: Some(id),
                message: "empty text".into(),
            },
            Ok(Request::Score { id, text }) => match model.score_text(&text) {
                Ok(tokens) => Response::Scores { id, tokens },
                Err(message) => Response::Error {
                    id: Some(id),
                    message,
                },
            },
            Err(e) => Response::Error {
                id: None,
                message: format!("malformed request: {e}"),
            },
        };
        output.write_all(encode_line(&response).as_bytes())?;
        output.flush()?;
    }
    Ok(())
}
