//! Retrieval of coordinate files by PDB id, with an on-disk cache.
//!
//! Cached files are written once (write-then-rename) next to a `.sha256`
//! sidecar; a file whose digest no longer matches is dropped and fetched
//! again.

use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::time::Duration;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fragdb::write_atomic;

pub const DEFAULT_ENDPOINT: &str = "https://files.rcsb.org/download/{id}.pdb";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TransportError {
    NotFound,
    Failed(String),
}

/// Something that can GET a URL.
pub trait Transport: Send + Sync {
    fn get(&self, url: &str) -> std::result::Result<Vec<u8>, TransportError>;
}

/// HTTP(S) through `ureq`; `file://` URLs are read from disk.
#[derive(Debug, Clone)]
pub struct HttpTransport {
    agent: ureq::Agent,
}

impl Default for HttpTransport {
    fn default() -> Self {
        HttpTransport {
            agent: ureq::AgentBuilder::new()
                .timeout(Duration::from_secs(60))
                .build(),
        }
    }
}

impl Transport for HttpTransport {
    fn get(&self, url: &str) -> std::result::Result<Vec<u8>, TransportError> {
        if let Some(path) = url.strip_prefix("file://") {
            return match fs::read(path) {
                Ok(b) => Ok(b),
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => Err(TransportError::NotFound),
                Err(e) => Err(TransportError::Failed(e.to_string())),
            };
        }
        match self.agent.get(url).call() {
            Ok(resp) => {
                let mut buf = Vec::new();
                resp.into_reader()
                    .read_to_end(&mut buf)
                    .map_err(|e| TransportError::Failed(e.to_string()))?;
                Ok(buf)
            }
            Err(ureq::Error::Status(404, _)) => Err(TransportError::NotFound),
            Err(e) => Err(TransportError::Failed(e.to_string())),
        }
    }
}

pub struct Fetcher {
    /// URL template; `{id}` is replaced by the upper-case id.
    pub endpoint: String,
    pub cache_dir: Option<PathBuf>,
    transport: Box<dyn Transport>,
}

impl Fetcher {
    pub fn new(endpoint: &str, cache_dir: Option<PathBuf>) -> Self {
        Fetcher::with_transport(endpoint, cache_dir, Box::new(HttpTransport::default()))
    }

    pub fn with_transport(
        endpoint: &str,
        cache_dir: Option<PathBuf>,
        transport: Box<dyn Transport>,
    ) -> Self {
        Fetcher {
            endpoint: endpoint.to_string(),
            cache_dir,
            transport,
        }
    }

    fn cache_paths(&self, id: &str) -> Option<(PathBuf, PathBuf)> {
        let dir = self.cache_dir.as_ref()?;
        Some((
            dir.join(format!("{id}.pdb")),
            dir.join(format!("{id}.pdb.sha256")),
        ))
    }

    /// Bytes of the coordinate file for a 4-character PDB id.
    pub fn fetch(&self, id: &str) -> Result<Vec<u8>> {
        let id = normalize_id(id)?;
        let cache = self.cache_paths(&id);
        if let Some((file, sum)) = &cache {
            if let Some(bytes) = read_cached(file, sum) {
                return Ok(bytes);
            }
        }
        let url = self.endpoint.replace("{id}", &id);
        let bytes = self.transport.get(&url).map_err(|e| match e {
            TransportError::NotFound => Error::NotFound(id.clone()),
            TransportError::Failed(msg) => Error::Network {
                id: id.clone(),
                msg,
            },
        })?;
        if let Some((file, sum)) = &cache {
            fs::create_dir_all(file.parent().unwrap_or(Path::new(".")))
                .map_err(|e| Error::io(file, e))?;
            write_atomic(file, &bytes)?;
            write_atomic(sum, hex::encode(Sha256::digest(&bytes)).as_bytes())?;
        }
        Ok(bytes)
    }
}

/// Upper-cased id after checking it is four alphanumeric characters.
pub fn normalize_id(id: &str) -> Result<String> {
    let id = id.trim();
    if id.len() != 4 || !id.chars().all(|c| c.is_ascii_alphanumeric()) {
        return Err(Error::InvalidInput(format!(
            "'{id}' is not a 4-character PDB id"
        )));
    }
    Ok(id.to_ascii_uppercase())
}

/// Cached bytes if both files exist and the digest matches; a mismatching
/// entry is removed.
fn read_cached(file: &Path, sum: &Path) -> Option<Vec<u8>> {
    let bytes = fs::read(file).ok()?;
    let expected = fs::read_to_string(sum).ok();
    if expected.as_deref().map(str::trim) == Some(hex::encode(Sha256::digest(&bytes)).as_str()) {
        return Some(bytes);
    }
    let _ = fs::remove_file(file);
    let _ = fs::remove_file(sum);
    None
}

pub fn fetch_structure(id: &str, endpoint: &str, cache_dir: Option<&Path>) -> Result<Vec<u8>> {
    Fetcher::new(endpoint, cache_dir.map(Path::to_path_buf)).fetch(id)
}
