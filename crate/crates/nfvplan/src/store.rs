//! Content-addressed scenario store plus job result files.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use nfvplan_core::model::Scenario;

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("`{0}` is not a store id")]
    BadId(String),
    #[error("store i/o on {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Scenario(#[from] nfvplan_core::Error),
}

pub type Result<T> = std::result::Result<T, StoreError>;

#[derive(Debug, Clone)]
pub struct Store {
    root: PathBuf,
}

fn io_at(path: &Path) -> impl FnOnce(io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes through a temporary file so readers never see half a document.
fn write_atomic(path: &Path, text: &str) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, text).map_err(io_at(&tmp))?;
    fs::rename(&tmp, path).map_err(io_at(path))
}

fn check_id(id: &str) -> Result<()> {
    let ok = !id.is_empty() && id.len() <= 128 && id.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'-');
    if ok {
        Ok(())
    } else {
        Err(StoreError::BadId(id.to_string()))
    }
}

impl Store {
    pub fn open(root: impl Into<PathBuf>) -> Result<Store> {
        let root = root.into();
        for sub in ["scenarios", "results"] {
            let dir = root.join(sub);
            fs::create_dir_all(&dir).map_err(io_at(&dir))?;
        }
        Ok(Store { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn scenario_path(&self, id: &str) -> Result<PathBuf> {
        check_id(id)?;
        Ok(self.root.join("scenarios").join(format!("{id}.json")))
    }

    /// Stores `s` under its content hash and returns the hash.
    pub fn put(&self, s: &Scenario) -> Result<String> {
        let id = s.content_hash();
        let path = self.scenario_path(&id)?;
        if !path.exists() {
            write_atomic(&path, &s.to_json())?;
        }
        Ok(id)
    }

    /// Stored document text, `None` for an unknown id.
    pub fn get_text(&self, id: &str) -> Result<Option<String>> {
        let path = self.scenario_path(id)?;
        match fs::read_to_string(&path) {
            Ok(text) => Ok(Some(text)),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(io_at(&path)(e)),
        }
    }

    pub fn get(&self, id: &str) -> Result<Option<Scenario>> {
        match self.get_text(id)? {
            Some(text) => Ok(Some(Scenario::from_json(&text)?)),
            None => Ok(None),
        }
    }

    /// Writes a job result and returns its location relative to the root.
    pub fn write_result(&self, job: &str, text: &str) -> Result<String> {
        check_id(job)?;
        let location = format!("results/{job}.json");
        write_atomic(&self.root.join(&location), text)?;
        Ok(location)
    }

    pub fn read_result(&self, location: &str) -> Result<String> {
        let name = location
            .strip_prefix("results/")
            .and_then(|n| n.strip_suffix(".json"))
            .ok_or_else(|| StoreError::BadId(location.to_string()))?;
        check_id(name)?;
        let path = self.root.join(location);
        fs::read_to_string(&path).map_err(io_at(&path))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nfvplan_core::fixtures;

    #[test]
    fn put_is_content_addressed() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path()).unwrap();
        let s = fixtures::sec2_video();
        let id = store.put(&s).unwrap();
        assert_eq!(id, s.content_hash());
        assert_eq!(store.put(&s).unwrap(), id);
        assert_eq!(store.get(&id).unwrap(), Some(s));
        let other = store.put(&fixtures::sec2_combined(true)).unwrap();
        assert_ne!(other, id);
    }

    #[test]
    fn unknown_and_malicious_ids() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path()).unwrap();
        assert!(store.get("abc123").unwrap().is_none());
        assert!(matches!(store.get("../etc/passwd"), Err(StoreError::BadId(_))));
        assert!(store.read_result("results/../x.json").is_err());
    }

    #[test]
    fn results_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path()).unwrap();
        let at = store.write_result("job-000001", "{}\n").unwrap();
        assert_eq!(at, "results/job-000001.json");
        assert_eq!(store.read_result(&at).unwrap(), "{}\n");
    }
}
