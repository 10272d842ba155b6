//! Inspect a bundle written by `nls-lab simulate`: manifest, track table and
//! the first field snapshot, if any.
//!
//! cargo run --release -p nls-lab --example read_bundle -- out/transmission

use std::fs::File;
use std::path::PathBuf;

use anyhow::Context;
use nls_core::grid::read_snapshot;
use nls_lab::bundle::{read_manifest, read_table, TRACK};

fn main() -> anyhow::Result<()> {
    let dir: PathBuf = std::env::args().nth(1).context("usage: read_bundle <bundle dir>")?.into();
    let manifest = read_manifest(&dir)?;
    println!("{} ({}), passed: {}", manifest.name, manifest.kind, manifest.passed);
    println!("resolved: {}", manifest.resolved);
    if manifest.files.iter().any(|f| f == TRACK) {
        let (header, rows) = read_table(&dir.join(TRACK))?;
        println!("{}", header.join("  "));
        for r in rows.iter().step_by((rows.len() / 8).max(1)) {
            println!("{}", r.iter().map(|x| format!("{x:10.4}")).collect::<Vec<_>>().join(" "));
        }
    }
    if let Some(snap) = manifest.files.iter().find(|f| f.ends_with(".nlsf")) {
        let u = read_snapshot(File::open(dir.join(snap))?)?;
        println!("{snap}: n = {}, max |u| = {:.4}, mass = {:.6}", u.grid.n(), u.max_abs(), u.l2_norm().powi(2));
    }
    Ok(())
}
