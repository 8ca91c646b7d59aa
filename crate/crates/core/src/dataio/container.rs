//! Shared binary container used by the model, feature-matrix and BOLD codecs.
//!
//! ```text
//! offset 0   8 bytes   magic "AEBIN\0\0\x01"
//! offset 8   8 bytes   header length N, u64 little-endian
//! offset 16  N bytes   UTF-8 JSON header (always carries "version")
//! offset 16+N ...      payload: f64 little-endian, row-major blocks
//! ```

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"AEBIN\0\0\x01";

pub fn encode<H: Serialize>(header: &H, payload: &[f64]) -> Result<Vec<u8>> {
    let json = serde_json::to_vec(header)?;
    let mut out = Vec::with_capacity(16 + json.len() + 8 * payload.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(json.len() as u64).to_le_bytes());
    out.extend_from_slice(&json);
    for v in payload {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

/// Splits a container into its header and payload. `expected_len` is
/// computed from the header by the caller; any mismatch is a format error
/// and no values are returned.
pub fn decode<H: DeserializeOwned>(
    bytes: &[u8],
    expected_len: impl FnOnce(&H) -> Result<usize>,
) -> Result<(H, Vec<f64>)> {
    if bytes.len() < 16 || &bytes[..8] != MAGIC {
        return Err(Error::Format("missing or unknown magic bytes".into()));
    }
    let header_len = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes")) as usize;
    let body = &bytes[16..];
    if header_len > body.len() {
        return Err(Error::Format(format!("header length {header_len} exceeds file size")));
    }
    let header: H =
        serde_json::from_slice(&body[..header_len]).map_err(|e| Error::Format(format!("bad header: {e}")))?;
    let payload = &body[header_len..];
    let want = expected_len(&header)?;
    if payload.len() != want * 8 {
        return Err(Error::Format(format!(
            "payload holds {} bytes, header implies {} values ({} bytes)",
            payload.len(),
            want,
            want * 8
        )));
    }
    let values =
        payload.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
    Ok((header, values))
}

/// Writes `bytes` to `path` atomically: a sibling temporary file is written
/// and then renamed into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    if let Some(dir) = dir {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let file_name =
        path.file_name().ok_or_else(|| Error::Input(format!("not a file path: {}", path.display())))?;
    let tmp = path.with_file_name(format!(".{}.tmp", file_name.to_string_lossy()));
    {
        let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
        f.write_all(bytes).map_err(|e| Error::io(&tmp, e))?;
        f.sync_all().map_err(|e| Error::io(&tmp, e))?;
    }
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn write_file<H: Serialize>(path: &Path, header: &H, payload: &[f64]) -> Result<()> {
    write_atomic(path, &encode(header, payload)?)
}

pub fn read_file<H: DeserializeOwned>(
    path: &Path,
    expected_len: impl FnOnce(&H) -> Result<usize>,
) -> Result<(H, Vec<f64>)> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes, expected_len).map_err(|e| match e {
        Error::Format(msg) => Error::Format(format!("{}: {msg}", path.display())),
        other => other,
    })
}
