//! Full pipeline at the default scale: 100 combinations x 5 tasks x 10 folds
//! x 15 epochs of synthetic runs, reduced to a matrix and swept over the
//! bundled 17 weight rows.
//!
//! Run with: `cargo run -p mtmc --release --example table3_sweep`

use std::io;

use mtmc::report::{read_phi_csv, write_sweep_csv, TABLE3_PHI_CSV};
use mtmc::{build_matrix, generate, pareto_front, sweep, SynthConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = SynthConfig {
        seed: 2020,
        ..SynthConfig::default()
    };
    let (specs, records) = generate(&config)?;
    let matrix = build_matrix(&records, &specs)?;
    let front = pareto_front(&matrix)?;
    eprintln!(
        "{} records, {} combinations, {} on the Pareto front",
        records.len(),
        matrix.len(),
        front.len()
    );

    let phis: Vec<Vec<f64>> = read_phi_csv(TABLE3_PHI_CSV.as_bytes())?
        .into_iter()
        .map(|(_, phi)| phi)
        .collect();
    let rows = sweep(&matrix, &phis)?;
    write_sweep_csv(&matrix, &rows, io::stdout().lock())?;
    Ok(())
}
