//! Self-describing JSON documents: every result is wrapped with the tool
//! version, the command line, the seed and digests of the inputs.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const TOOL: &str = "citescale";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Document<T> {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    pub inputs: Vec<InputDigest>,
    pub result: T,
}

/// Run metadata shared by every document a command writes.
#[derive(Debug, Clone)]
pub struct Provenance {
    pub command: String,
    pub seed: u64,
}

impl Provenance {
    pub fn wrap<T>(&self, inputs: Vec<InputDigest>, result: T) -> Document<T> {
        Document {
            tool: TOOL.to_string(),
            version: VERSION.to_string(),
            command: self.command.clone(),
            seed: self.seed,
            inputs,
            result,
        }
    }
}

/// The command line without the worker-count option, which never affects output.
pub fn command_line(args: &[String]) -> String {
    let mut kept = vec![TOOL.to_string()];
    let mut iter = args.iter().skip(1);
    while let Some(a) = iter.next() {
        if a == "--threads" {
            iter.next();
        } else if !a.starts_with("--threads=") {
            kept.push(a.clone());
        }
    }
    kept.join(" ")
}

pub fn digest_bytes(path: &Path, bytes: &[u8]) -> InputDigest {
    InputDigest {
        path: path.display().to_string(),
        sha256: hex::encode(Sha256::digest(bytes)),
    }
}

/// Reads a file and records its digest.
pub fn read_input(path: &Path) -> Result<(Vec<u8>, InputDigest)> {
    let bytes = fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    let digest = digest_bytes(path, &bytes);
    Ok((bytes, digest))
}

pub fn write_json<T: Serialize>(path: &Path, doc: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(doc)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

pub fn read_document<T: DeserializeOwned>(bytes: &[u8], path: &Path) -> Result<Document<T>> {
    serde_json::from_slice(bytes)
        .with_context(|| format!("{} is not a valid result document", path.display()))
}
