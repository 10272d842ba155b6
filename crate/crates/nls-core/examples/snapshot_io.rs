//! Write a 2D traveling wave in the binary snapshot format and read it back.

use std::fs::File;
use std::io::{BufReader, BufWriter};

use nls_core::grid::{read_snapshot, write_snapshot, Grid};
use nls_core::soliton::{ground_state_2d, traveling_wave_2d, SolitonParams2D};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid = Grid::new(128, 40.0, 2)?;
    let ground = ground_state_2d(2.0, &grid)?;
    let p = SolitonParams2D { m: 2.0, c: 1.0, v: [0.5, 0.2], rho: [-3.0, 1.0], gamma: 0.0, amp: 1.0 };
    let u = traveling_wave_2d(&p, &ground, &grid, 0.0)?;

    let path = std::env::temp_dir().join("nls_snapshot_example.nlsf");
    write_snapshot(BufWriter::new(File::create(&path)?), &u)?;
    let back = read_snapshot(BufReader::new(File::open(&path)?))?;
    println!("{}: {} bytes", path.display(), std::fs::metadata(&path)?.len());
    println!("dim {} n {} length {}", back.grid.dim(), back.grid.n(), back.grid.length());
    println!("max |difference| {:e}", back.sup_distance(&u)?);
    std::fs::remove_file(&path)?;
    Ok(())
}
