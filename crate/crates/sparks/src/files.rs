//! Reading inputs and writing artifacts.
//!
//! Every artifact is written to a temporary file in the target directory
//! and renamed into place, so an interrupted run never leaves a truncated
//! model behind.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use tempfile::NamedTempFile;

/// An IO error with the path it concerns.
#[derive(Debug, thiserror::Error)]
#[error("{path}: {source}")]
pub struct FileError {
    pub path: PathBuf,
    #[source]
    pub source: io::Error,
}

fn at(path: &Path) -> impl FnOnce(io::Error) -> FileError + '_ {
    move |source| FileError { path: path.to_path_buf(), source }
}

pub fn read_text(path: &Path) -> Result<String, FileError> {
    fs::read_to_string(path).map_err(at(path))
}

/// Writes `contents` to `path` atomically.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), FileError> {
    write_atomic_with(path, |w| w.write_all(contents))
}

/// Streams into a temporary file next to `path`, then renames it.
pub fn write_atomic_with(path: &Path, fill: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<(), FileError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).map_err(at(dir))?;
    let mut tmp = temp_in(dir).map_err(at(dir))?;
    {
        let mut w = io::BufWriter::new(tmp.as_file_mut());
        fill(&mut w).map_err(at(path))?;
        w.flush().map_err(at(path))?;
    }
    tmp.persist(path).map_err(|e| FileError { path: path.to_path_buf(), source: e.error })?;
    Ok(())
}

// Temporary files are private by default; artifacts should get the usual
// permissions.
#[cfg(unix)]
fn temp_in(dir: &Path) -> io::Result<NamedTempFile> {
    use std::os::unix::fs::PermissionsExt;
    tempfile::Builder::new().permissions(fs::Permissions::from_mode(0o644)).tempfile_in(dir)
}

#[cfg(not(unix))]
fn temp_in(dir: &Path) -> io::Result<NamedTempFile> {
    NamedTempFile::new_in(dir)
}

/// Adapts a `fmt::Write` producer (the core writers) to a byte sink.
pub struct FmtSink<'a> {
    inner: &'a mut dyn Write,
    pub error: Option<io::Error>,
}

impl<'a> FmtSink<'a> {
    pub fn new(inner: &'a mut dyn Write) -> Self {
        FmtSink { inner, error: None }
    }

    /// Runs `f` and turns a formatting failure back into the IO error
    /// that caused it.
    pub fn run(inner: &'a mut dyn Write, f: impl FnOnce(&mut dyn std::fmt::Write) -> std::fmt::Result) -> io::Result<()> {
        let mut sink = FmtSink::new(inner);
        let r = f(&mut sink);
        match (r, sink.error) {
            (_, Some(e)) => Err(e),
            (Err(_), None) => Err(io::Error::other("formatting failed")),
            (Ok(()), None) => Ok(()),
        }
    }
}

impl std::fmt::Write for FmtSink<'_> {
    fn write_str(&mut self, s: &str) -> std::fmt::Result {
        self.inner.write_all(s.as_bytes()).map_err(|e| {
            self.error = Some(e);
            std::fmt::Error
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_replaces_whole_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub/model.lp");
        write_atomic(&p, b"first version, rather long").unwrap();
        write_atomic(&p, b"second").unwrap();
        assert_eq!(read_text(&p).unwrap(), "second");
        // a failing producer leaves the old file alone
        let r = write_atomic_with(&p, |w| {
            w.write_all(b"partial")?;
            Err(io::Error::other("interrupted"))
        });
        assert!(r.is_err());
        assert_eq!(read_text(&p).unwrap(), "second");
        assert_eq!(fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }
}
