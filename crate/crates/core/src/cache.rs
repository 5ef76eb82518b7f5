//! Process-wide memo of root sets and classical solutions.
//!
//! Root sets can also persist on disk: when the environment variable named
//! by [`CACHE_DIR_ENV`] points at a directory, each computed set is stored
//! there as JSON and reused by later runs after its residuals are re-checked.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{Arc, LazyLock};

use parking_lot::RwLock;

use crate::ac::{AcSolution, KernelMethod};
use crate::dispersion::{complex_tolerance, eval_l, RootSet, REAL_ROOT_TOL};
use crate::error::Result;
use crate::params::ModelParams;

pub const CACHE_DIR_ENV: &str = "FKWAVE_CACHE_DIR";

/// Classical solutions kept in memory before the memo is flushed.
const AC_CAPACITY: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Key {
    v: u64,
    mu: u64,
    alpha: u64,
    n: usize,
}

impl Key {
    fn new(v: f64, p: &ModelParams, n: usize) -> Self {
        Self { v: v.to_bits(), mu: p.mu.to_bits(), alpha: p.alpha.to_bits(), n }
    }

    fn file_name(&self) -> String {
        format!("roots_{:016x}_{:016x}_{:016x}_{}.json", self.v, self.mu, self.alpha, self.n)
    }
}

static ROOTS: LazyLock<RwLock<HashMap<Key, Arc<RootSet>>>> = LazyLock::new(Default::default);
static AC: LazyLock<RwLock<HashMap<(Key, KernelMethod), Arc<AcSolution>>>> = LazyLock::new(Default::default);

fn disk_dir() -> Option<PathBuf> {
    std::env::var_os(CACHE_DIR_ENV).filter(|s| !s.is_empty()).map(PathBuf::from)
}

fn load(key: &Key, velocity: f64, params: &ModelParams) -> Option<RootSet> {
    let path = disk_dir()?.join(key.file_name());
    let text = std::fs::read_to_string(&path).ok()?;
    let set: RootSet = serde_json::from_str(&text).ok()?;
    let valid = set.velocity == velocity
        && set.params == *params
        && set.roots.iter().all(|r| {
            let res = eval_l(r.k, velocity, params).norm();
            if r.k.im == 0.0 {
                res <= REAL_ROOT_TOL
            } else {
                res <= complex_tolerance(r.k, velocity, params)
            }
        });
    if !valid {
        log::warn!("ignoring stale root cache entry {}", path.display());
        return None;
    }
    Some(set)
}

fn store(key: &Key, set: &RootSet) {
    let Some(dir) = disk_dir() else { return };
    let write = || -> std::io::Result<()> {
        std::fs::create_dir_all(&dir)?;
        let tmp = dir.join(format!(".{}.{}.tmp", key.file_name(), std::process::id()));
        std::fs::write(&tmp, serde_json::to_vec(set)?)?;
        std::fs::rename(&tmp, dir.join(key.file_name()))
    };
    if let Err(e) = write() {
        log::warn!("could not write root cache in {}: {e}", dir.display());
    }
}

/// Root set for `(V, params, n_pairs)`, computed at most once per process.
pub fn root_set(velocity: f64, params: &ModelParams, n_pairs: usize) -> Result<Arc<RootSet>> {
    let key = Key::new(velocity, params, n_pairs);
    if let Some(set) = ROOTS.read().get(&key) {
        return Ok(set.clone());
    }
    let set = match load(&key, velocity, params) {
        Some(set) => set,
        None => {
            let set = RootSet::compute(velocity, params, n_pairs)?;
            store(&key, &set);
            set
        }
    };
    let set = Arc::new(set);
    Ok(ROOTS.write().entry(key).or_insert(set).clone())
}

/// Classical solution for `(V, params, n_pairs, method)`.
pub fn ac_solution(velocity: f64, params: &ModelParams, n_pairs: usize, method: KernelMethod) -> Result<Arc<AcSolution>> {
    let key = (Key::new(velocity, params, n_pairs), method);
    if let Some(ac) = AC.read().get(&key) {
        return Ok(ac.clone());
    }
    let roots = root_set(velocity, params, n_pairs)?;
    let ac = Arc::new(AcSolution::new(roots, method)?);
    let mut map = AC.write();
    if map.len() >= AC_CAPACITY {
        map.clear();
    }
    Ok(map.entry(key).or_insert(ac).clone())
}

/// Drop every in-memory entry.
pub fn clear() {
    ROOTS.write().clear();
    AC.write().clear();
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn memo_returns_shared_instance() {
        let p = ModelParams::conservative(1.0).unwrap();
        let a = root_set(0.61, &p, 8).unwrap();
        let b = root_set(0.61, &p, 8).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
    }

    #[test]
    fn concurrent_readers_agree() {
        use rayon::prelude::*;
        let p = ModelParams::conservative(1.0).unwrap();
        let sets: Vec<_> = (0..8).into_par_iter().map(|_| root_set(0.73, &p, 10).unwrap()).collect();
        assert!(sets.iter().all(|s| s.roots == sets[0].roots));
    }
}
