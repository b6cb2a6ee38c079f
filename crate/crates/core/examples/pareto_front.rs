//! Extracts and scales the Pareto front of a small two-criteria matrix.
//!
//! Run with: `cargo run -p mtmc --example pareto_front`

use mtmc::{pareto_front, EvaluationMatrix};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let matrix = EvaluationMatrix::from_rows([
        [0.10, 9.0],
        [0.12, 6.0],
        [0.20, 4.0],
        [0.25, 4.5], // dominated by the row above
        [0.35, 3.0],
        [0.35, 3.0], // duplicate of a front member, kept
        [0.40, 8.0], // dominated
    ])?;

    let front = pareto_front(&matrix)?;
    println!(
        "{} of {} combinations are Pareto optimal",
        front.len(),
        matrix.len()
    );
    for ((i, raw), scaled) in front
        .member_indices
        .iter()
        .zip(&front.raw)
        .zip(&front.scaled)
    {
        let scaled: Vec<String> = scaled.values().iter().map(|v| format!("{v:.3}")).collect();
        println!(
            "  {:<3} raw {:<12} scaled ({})",
            matrix.combinations()[*i].id,
            raw.to_string(),
            scaled.join(", ")
        );
    }
    Ok(())
}
