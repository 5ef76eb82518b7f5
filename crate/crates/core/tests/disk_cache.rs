//! Separate test binary: the cache directory variable is read per call, and
//! no other test here touches it.

use fkwave::cache::{self, CACHE_DIR_ENV};
use fkwave::ModelParams;

#[test]
fn root_sets_persist_and_reload() {
    let dir = tempfile::tempdir().unwrap();
    std::env::set_var(CACHE_DIR_ENV, dir.path());
    let p = ModelParams::conservative(1.0).unwrap();
    let a = cache::root_set(0.55, &p, 16).unwrap();
    let files: Vec<_> = std::fs::read_dir(dir.path()).unwrap().collect();
    assert_eq!(files.len(), 1);
    cache::clear();
    let b = cache::root_set(0.55, &p, 16).unwrap();
    assert_eq!(a.roots, b.roots);

    // a corrupted entry is ignored and recomputed
    let path = files[0].as_ref().unwrap().path();
    let mut value: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    value["roots"][0]["k"][0] = serde_json::json!(123.0);
    std::fs::write(&path, value.to_string()).unwrap();
    cache::clear();
    let c = cache::root_set(0.55, &p, 16).unwrap();
    assert_eq!(a.roots, c.roots);
    std::env::remove_var(CACHE_DIR_ENV);
}
