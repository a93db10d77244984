//! All-or-nothing output writing.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

/// Files written so far, plus directories this writer created. Dropping
/// an uncommitted batch removes both.
#[derive(Debug, Default)]
pub struct OutputBatch {
    files: Vec<PathBuf>,
    dirs: Vec<PathBuf>,
    committed: bool,
}

impl OutputBatch {
    pub fn new() -> Self {
        Self::default()
    }

    fn ensure_dir(&mut self, dir: &Path) -> io::Result<()> {
        if dir.as_os_str().is_empty() || dir.is_dir() {
            return Ok(());
        }
        // remember the outermost missing ancestor so cleanup takes it all
        let mut top = dir;
        while let Some(parent) = top.parent() {
            if parent.as_os_str().is_empty() || parent.exists() {
                break;
            }
            top = parent;
        }
        let top = top.to_path_buf();
        fs::create_dir_all(dir)?;
        self.dirs.push(top);
        Ok(())
    }

    pub fn write(&mut self, path: &Path, bytes: &[u8]) -> io::Result<()> {
        if let Some(parent) = path.parent() {
            self.ensure_dir(parent)?;
        }
        fs::write(path, bytes)?;
        self.files.push(path.to_path_buf());
        Ok(())
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.files
    }

    /// Keeps everything written so far.
    pub fn commit(mut self) -> Vec<PathBuf> {
        self.committed = true;
        std::mem::take(&mut self.files)
    }
}

impl Drop for OutputBatch {
    fn drop(&mut self) {
        if self.committed {
            return;
        }
        for f in &self.files {
            if let Err(e) = fs::remove_file(f) {
                log::warn!("cannot remove partial output {}: {e}", f.display());
            }
        }
        for d in self.dirs.iter().rev() {
            let _ = fs::remove_dir_all(d);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uncommitted_batch_leaves_nothing_behind() {
        let tmp = tempfile::tempdir().unwrap();
        let out = tmp.path().join("a/b");
        {
            let mut batch = OutputBatch::new();
            batch.write(&out.join("x.txt"), b"x").unwrap();
            assert!(out.join("x.txt").exists());
        }
        assert!(!tmp.path().join("a").exists());
    }

    #[test]
    fn committed_batch_stays() {
        let tmp = tempfile::tempdir().unwrap();
        let mut batch = OutputBatch::new();
        batch.write(&tmp.path().join("x.txt"), b"x").unwrap();
        assert_eq!(batch.commit().len(), 1);
        assert!(tmp.path().join("x.txt").exists());
    }

    #[test]
    fn existing_directories_survive_cleanup() {
        let tmp = tempfile::tempdir().unwrap();
        fs::write(tmp.path().join("keep.txt"), b"k").unwrap();
        {
            let mut batch = OutputBatch::new();
            batch.write(&tmp.path().join("x.txt"), b"x").unwrap();
        }
        assert!(tmp.path().join("keep.txt").exists());
        assert!(!tmp.path().join("x.txt").exists());
    }
}
