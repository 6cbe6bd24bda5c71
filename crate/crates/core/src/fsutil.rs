//! Atomic file and directory output.
//!
//! Everything the toolkit writes goes through here: a file is written to a
//! sibling temporary and renamed into place, and a directory of outputs is
//! assembled in a staging directory next to its destination and moved in
//! only after every file was written.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use tempfile::{NamedTempFile, TempDir};

use crate::error::{Error, Result};

fn parent_dir(path: &Path) -> &Path {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    }
}

/// Writes `bytes` to `path` via a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = parent_dir(path);
    let mut tmp = NamedTempFile::new_in(dir).map_err(|e| Error::io(path, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

/// A directory of outputs that becomes visible at `target` only on `commit`.
///
/// Dropping an uncommitted stage removes everything written to it.
pub struct StagedDir {
    target: PathBuf,
    stage: TempDir,
}

impl StagedDir {
    pub fn new(target: impl Into<PathBuf>) -> Result<Self> {
        let target = target.into();
        let parent = parent_dir(&target);
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        let stage = tempfile::Builder::new()
            .prefix(".plens-stage-")
            .tempdir_in(parent)
            .map_err(|e| Error::io(parent, e))?;
        Ok(Self { target, stage })
    }

    /// Path inside the staging area for a file that will end up at
    /// `target/relative`. Intermediate directories are created.
    pub fn path(&self, relative: impl AsRef<Path>) -> Result<PathBuf> {
        let p = self.stage.path().join(relative);
        if let Some(dir) = p.parent() {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        Ok(p)
    }

    pub fn target(&self) -> &Path {
        &self.target
    }

    /// Moves every staged file into the target directory, creating it and
    /// any subdirectories as needed. Existing files of the same name are
    /// replaced.
    pub fn commit(self) -> Result<()> {
        fs::create_dir_all(&self.target).map_err(|e| Error::io(&self.target, e))?;
        move_tree(self.stage.path(), &self.target)
    }
}

fn move_tree(from: &Path, to: &Path) -> Result<()> {
    let mut entries: Vec<_> = fs::read_dir(from)
        .map_err(|e| Error::io(from, e))?
        .collect::<std::io::Result<_>>()
        .map_err(|e| Error::io(from, e))?;
    entries.sort_by_key(|e| e.file_name());
    for entry in entries {
        let src = entry.path();
        let dst = to.join(entry.file_name());
        let ty = entry.file_type().map_err(|e| Error::io(&src, e))?;
        if ty.is_dir() {
            fs::create_dir_all(&dst).map_err(|e| Error::io(&dst, e))?;
            move_tree(&src, &dst)?;
        } else {
            fs::rename(&src, &dst).map_err(|e| Error::io(&dst, e))?;
        }
    }
    Ok(())
}
