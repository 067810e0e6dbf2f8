//! On-disk weight cache.
//!
//! One JSON file per `(k, matrix hash, objective)`:
//! `{"format", "k", "noise_label", "noise_hash", "objective", "rows"}` where
//! `rows` holds one array of `"num/den"` strings per type.

use std::path::{Path, PathBuf};

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use super::objective::ObjectiveSpec;
use super::weights::{weight_matrix, WeightMatrix};
use crate::error::{Error, Result};
use crate::noise::NoiseMatrix;
use crate::types::enumerate_types;

const FORMAT: &str = "peergrade-weights/1";

#[derive(Serialize, Deserialize)]
struct CacheFile {
    format: String,
    k: usize,
    noise_label: String,
    noise_hash: String,
    objective: ObjectiveSpec,
    rows: Vec<Vec<String>>,
}

/// What happened when a weight matrix was requested through the cache.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CacheStatus {
    /// Loaded from disk.
    Hit,
    /// Computed and written.
    Miss,
    /// A file existed but described different inputs; recomputed and replaced.
    Stale,
    /// No cache directory given.
    Disabled,
}

pub fn cache_path(dir: &Path, k: usize, matrix: &NoiseMatrix, spec: &ObjectiveSpec) -> PathBuf {
    let hash = matrix.content_hash();
    dir.join(format!("weights-k{k}-{}-{}.json", &hash[..12], spec.cache_key()))
}

pub fn save_weights(path: &Path, weights: &WeightMatrix) -> Result<()> {
    let n = weights.len();
    let den = weights.denominator().to_string();
    let rows = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| format!("{}/{den}", weights.numerator(i, j)))
                .collect()
        })
        .collect();
    let file = CacheFile {
        format: FORMAT.into(),
        k: weights.k(),
        noise_label: weights.noise_label().to_string(),
        noise_hash: weights.noise_hash().to_string(),
        objective: weights.objective().clone(),
        rows,
    };
    let text = serde_json::to_string(&file).map_err(|e| Error::json("serializing weights", e))?;
    crate::io::write_atomic(path, text.as_bytes())
}

pub fn load_weights(path: &Path) -> Result<WeightMatrix> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file: CacheFile =
        serde_json::from_str(&text).map_err(|e| Error::json(format!("parsing {}", path.display()), e))?;
    let bad = |detail: String| Error::Format {
        path: path.to_path_buf(),
        detail,
    };
    if file.format != FORMAT {
        return Err(bad(format!("unknown format `{}`", file.format)));
    }
    let types = enumerate_types(file.k)?;
    let n = types.len();
    if file.rows.len() != n || file.rows.iter().any(|r| r.len() != n) {
        return Err(bad(format!("expected {n} rows of {n} weights")));
    }
    let mut denom: Option<BigInt> = None;
    let mut numer = Vec::with_capacity(n * n);
    for cell in file.rows.iter().flatten() {
        let (num, den) = cell
            .split_once('/')
            .ok_or_else(|| bad(format!("weight `{cell}` is not num/den")))?;
        let parse = |s: &str| {
            s.parse::<BigInt>()
                .map_err(|_| bad(format!("weight `{cell}` is not num/den")))
        };
        let num = parse(num)?;
        match &denom {
            Some(d) if d.to_string() == den => {}
            Some(_) => return Err(bad("weights do not share one denominator".into())),
            None => denom = Some(parse(den)?),
        }
        numer.push(num);
    }
    let denom = denom.ok_or_else(|| bad("no weights".into()))?;
    WeightMatrix::from_parts(types, file.noise_label, file.noise_hash, file.objective, numer, denom)
}

/// Weight matrix through an optional cache directory. A cached file whose
/// header does not match the requested inputs is recomputed.
pub fn cached_weight_matrix(
    dir: Option<&Path>,
    k: usize,
    matrix: &NoiseMatrix,
    spec: &ObjectiveSpec,
) -> Result<(WeightMatrix, CacheStatus)> {
    let Some(dir) = dir else {
        return Ok((weight_matrix(k, matrix, spec)?, CacheStatus::Disabled));
    };
    let path = cache_path(dir, k, matrix, spec);
    let mut status = CacheStatus::Miss;
    if path.exists() {
        match load_weights(&path) {
            Ok(w) if w.k() == k && w.noise_hash() == matrix.content_hash() && w.objective() == spec => {
                let mut w = w;
                w.noise_label = matrix.label().to_string();
                return Ok((w, CacheStatus::Hit));
            }
            Ok(_) => {
                log::warn!("weight cache {} describes other inputs; recomputing", path.display());
                status = CacheStatus::Stale;
            }
            Err(e) => {
                log::warn!("weight cache {} unreadable ({e}); recomputing", path.display());
                status = CacheStatus::Stale;
            }
        }
    }
    let w = weight_matrix(k, matrix, spec)?;
    save_weights(&path, &w)?;
    Ok((w, status))
}
