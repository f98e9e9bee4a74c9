//! File-backed rule storage, one program file per workspace.
//!
//! Each workspace lives at `<data-dir>/<id>.pl` in canonical program format,
//! one rule per line, so the files stay readable and editable by hand. Every
//! mutation rewrites the file through a temporary file and an atomic rename.
//! Mutations of one workspace are serialized by a per-workspace lock.

use std::collections::HashMap;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use tempfile::NamedTempFile;
use thiserror::Error;

use crate::parser::{parse_program, parse_rule, print_program, ParseError};
use crate::term::{Program, Rule};

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("invalid workspace id `{0}` (use 1-64 characters from a-z, 0-9 and -)")]
    InvalidId(String),
    #[error("workspace `{0}` already exists")]
    AlreadyExists(String),
    #[error("workspace `{0}` not found")]
    NotFound(String),
    #[error("rule index {index} out of range ({len} rules)")]
    BadIndex { index: usize, len: usize },
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("workspace file for `{id}` does not parse: {source}")]
    Corrupt { id: String, source: ParseError },
    #[error("storage error: {0}")]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Workspace {
    pub id: String,
    pub rules: Vec<Rule>,
}

pub fn is_valid_id(id: &str) -> bool {
    (1..=64).contains(&id.len())
        && id
            .bytes()
            .all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'-')
}

#[derive(Debug)]
pub struct WorkspaceStore {
    dir: PathBuf,
    seed: Option<Program>,
    locks: Mutex<HashMap<String, Arc<Mutex<()>>>>,
}

impl WorkspaceStore {
    /// Opens the store rooted at `dir`, creating the directory if needed.
    pub fn open(dir: impl Into<PathBuf>) -> io::Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir)?;
        Ok(WorkspaceStore {
            dir,
            seed: None,
            locks: Mutex::new(HashMap::new()),
        })
    }

    /// New workspaces start with these rules instead of empty.
    pub fn with_seed(mut self, seed: Program) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, id: &str) -> PathBuf {
        self.dir.join(format!("{id}.pl"))
    }

    fn lock(&self, id: &str) -> Arc<Mutex<()>> {
        let mut locks = self.locks.lock().unwrap_or_else(|e| e.into_inner());
        locks.entry(id.to_string()).or_default().clone()
    }

    fn check_id(id: &str) -> Result<(), StoreError> {
        if is_valid_id(id) {
            Ok(())
        } else {
            Err(StoreError::InvalidId(id.to_string()))
        }
    }

    fn read(&self, id: &str) -> Result<Program, StoreError> {
        Self::check_id(id)?;
        let src = match std::fs::read_to_string(self.path(id)) {
            Ok(src) => src,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Err(StoreError::NotFound(id.to_string())),
            Err(e) => return Err(e.into()),
        };
        parse_program(&src).map_err(|source| StoreError::Corrupt {
            id: id.to_string(),
            source,
        })
    }

    fn temp_with(&self, program: &Program) -> io::Result<NamedTempFile> {
        let mut tmp = NamedTempFile::new_in(&self.dir)?;
        tmp.write_all(print_program(program).as_bytes())?;
        tmp.as_file().sync_all()?;
        Ok(tmp)
    }

    fn write(&self, id: &str, program: &Program) -> Result<(), StoreError> {
        let tmp = self.temp_with(program)?;
        tmp.persist(self.path(id)).map_err(|e| e.error)?;
        Ok(())
    }

    pub fn exists(&self, id: &str) -> bool {
        is_valid_id(id) && self.path(id).is_file()
    }

    pub fn create_workspace(&self, id: &str) -> Result<Workspace, StoreError> {
        Self::check_id(id)?;
        let lock = self.lock(id);
        let _guard = lock.lock().unwrap_or_else(|e| e.into_inner());
        let program = self.seed.clone().unwrap_or_default();
        let tmp = self.temp_with(&program)?;
        match tmp.persist_noclobber(self.path(id)) {
            Ok(_) => Ok(Workspace {
                id: id.to_string(),
                rules: program.rules().to_vec(),
            }),
            Err(e) if e.error.kind() == io::ErrorKind::AlreadyExists => Err(StoreError::AlreadyExists(id.to_string())),
            Err(e) => Err(e.error.into()),
        }
    }

    pub fn load(&self, id: &str) -> Result<Workspace, StoreError> {
        let lock = self.lock(id);
        let _guard = lock.lock().unwrap_or_else(|e| e.into_inner());
        let program = self.read(id)?;
        Ok(Workspace {
            id: id.to_string(),
            rules: program.rules().to_vec(),
        })
    }

    pub fn program(&self, id: &str) -> Result<Program, StoreError> {
        Ok(Program::new(self.load(id)?.rules))
    }

    /// Parses `rule_src` and appends it. Returns the new rule's index.
    pub fn add_rule(&self, id: &str, rule_src: &str) -> Result<(usize, Rule), StoreError> {
        let lock = self.lock(id);
        let _guard = lock.lock().unwrap_or_else(|e| e.into_inner());
        let mut program = self.read(id)?;
        let rule = parse_rule(rule_src)?;
        program.push(rule.clone());
        self.write(id, &program)?;
        Ok((program.len() - 1, rule))
    }

    /// Canonical text of every rule with its index.
    pub fn list_rules(&self, id: &str) -> Result<Vec<(usize, String)>, StoreError> {
        Ok(self
            .load(id)?
            .rules
            .iter()
            .map(ToString::to_string)
            .enumerate()
            .collect())
    }

    /// Removes the rule at `index`; later rules shift down by one.
    pub fn delete_rule(&self, id: &str, index: usize) -> Result<(), StoreError> {
        let lock = self.lock(id);
        let _guard = lock.lock().unwrap_or_else(|e| e.into_inner());
        let program = self.read(id)?;
        if index >= program.len() {
            return Err(StoreError::BadIndex {
                index,
                len: program.len(),
            });
        }
        let kept: Program = program
            .rules()
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != index)
            .map(|(_, r)| r.clone())
            .collect();
        self.write(id, &kept)
    }
}
