use std::fs;
use std::io::{self, Write};
use std::path::Path;

use crnstab::rational::Rational;
use crnstab::Error;

pub const EXIT_REJECTED: u8 = 1;
pub const EXIT_PARSE: u8 = 2;
pub const EXIT_ANALYSIS: u8 = 3;
pub const EXIT_POSITIVITY: u8 = 4;
pub const EXIT_CHECK_FAILED: u8 = 5;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_PARSE,
            message: message.into(),
        }
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_ANALYSIS,
            message: message.into(),
        }
    }

    /// Maps a library error; `context` (usually a file name) prefixes the message.
    pub fn from_core(e: Error, context: &str) -> Self {
        let code = match e {
            Error::Parse { .. } | Error::InvalidArgument(_) => EXIT_PARSE,
            Error::PositivityLost { .. } | Error::NonFinite(_) => EXIT_POSITIVITY,
            _ => EXIT_ANALYSIS,
        };
        let message = if context.is_empty() {
            e.to_string()
        } else {
            format!("{context}: {e}")
        };
        Self { code, message }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Compact decimal: at most 10 fractional digits, trailing zeros dropped.
pub fn num(v: f64) -> String {
    let s = format!("{v:.10}");
    let s = if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    };
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

pub fn vector(v: &[f64]) -> String {
    format!("({})", v.iter().map(|x| num(*x)).collect::<Vec<_>>().join(", "))
}

/// `p/q` form, `p` for integers.
pub fn fraction(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Writes `contents` to `path` through a temporary file in the same directory
/// and a rename, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &str) -> io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "output path has no file name"))?;
    let tmp = dir.join(format!(".{}.{}.tmp", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

/// Sends `contents` to `path`, or to stdout when there is none.
pub fn emit(path: Option<&Path>, contents: &str) -> CliResult<()> {
    match path {
        Some(p) => write_atomic(p, contents)
            .map_err(|e| CliError::internal(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(contents.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::internal(format!("cannot write to stdout: {e}")))
        }
    }
}

/// CSV table with a header row; numbers in shortest round-trip form.
pub fn csv(header: &[String], rows: &[Vec<f64>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}
