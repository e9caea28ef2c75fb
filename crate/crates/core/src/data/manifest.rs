//! Dataset manifest: everything needed to reproduce a prepared dataset.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::normalize::Normalizer;
use super::window::RowSplit;
use crate::error::Result;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub brent_path: String,
    pub usdx_path: String,
    pub sent_path: String,
    pub brent_sha256: String,
    pub usdx_sha256: String,
    pub sent_sha256: String,
    pub rows: usize,
    pub split: RowSplit,
    pub normalizer: Normalizer,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

pub fn sha256_str(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn file_hash_tracks_content() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(b"date,value\n2020-01-02,1\n").unwrap();
        let h1 = sha256_file(f.path()).unwrap();
        f.write_all(b"2020-01-03,2\n").unwrap();
        let h2 = sha256_file(f.path()).unwrap();
        assert_ne!(h1, h2);
        assert_eq!(h1.len(), 64);
    }

    #[test]
    fn string_hash_is_stable() {
        assert_eq!(sha256_str("abc"), sha256_str("abc"));
        assert_ne!(sha256_str("abc"), sha256_str("abd"));
    }
}
