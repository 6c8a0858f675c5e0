use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use crate::error::CliError;

/// Output directory whose files only appear once the stage succeeds.
///
/// Files are written under `<dir>/.partial` and renamed into `<dir>` by
/// [`Staged::commit`]. Dropping an uncommitted stage removes the partial
/// directory, so a failed run leaves no half-written outputs behind.
pub struct Staged {
    stage: &'static str,
    dir: PathBuf,
    tmp: PathBuf,
    committed: bool,
}

impl Staged {
    pub fn new(stage: &'static str, dir: &Path) -> Result<Self, CliError> {
        let tmp = dir.join(".partial");
        if tmp.exists() {
            fs::remove_dir_all(&tmp).map_err(CliError::io(stage, &tmp))?;
        }
        fs::create_dir_all(&tmp).map_err(CliError::io(stage, &tmp))?;
        Ok(Self {
            stage,
            dir: dir.to_path_buf(),
            tmp,
            committed: false,
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.tmp.join(name)
    }

    pub fn create(&self, name: &str) -> Result<BufWriter<File>, CliError> {
        let p = self.path(name);
        let f = File::create(&p).map_err(CliError::io(self.stage, &p))?;
        Ok(BufWriter::with_capacity(1 << 20, f))
    }

    pub fn commit(mut self) -> Result<(), CliError> {
        let entries = fs::read_dir(&self.tmp).map_err(CliError::io(self.stage, &self.tmp))?;
        let mut names: Vec<_> = entries
            .map(|e| e.map(|e| e.file_name()))
            .collect::<Result<_, _>>()
            .map_err(CliError::io(self.stage, &self.tmp))?;
        names.sort();
        for name in names {
            let target = self.dir.join(&name);
            if target.is_dir() {
                fs::remove_dir_all(&target).map_err(CliError::io(self.stage, &target))?;
            }
            fs::rename(self.tmp.join(&name), &target).map_err(CliError::io(self.stage, &target))?;
        }
        fs::remove_dir(&self.tmp).map_err(CliError::io(self.stage, &self.tmp))?;
        self.committed = true;
        Ok(())
    }
}

impl Drop for Staged {
    fn drop(&mut self) {
        if !self.committed {
            let _ = fs::remove_dir_all(&self.tmp);
        }
    }
}
