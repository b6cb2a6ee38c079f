//! Selects a combination for several criteria-significance vectors,
//! including the all-zero fallback.
//!
//! Run with: `cargo run -p mtmc --example select_with_weights`

use std::collections::BTreeMap;

use mtmc::{select, Combination, EvaluationMatrix};

fn combo(id: &str, lr: &str, mode: &str, criteria: [f64; 4]) -> Combination {
    Combination {
        id: id.into(),
        hyperparameters: BTreeMap::from([
            ("base_lr".to_string(), lr.to_string()),
            ("cyclic_mode".to_string(), mode.to_string()),
        ]),
        per_task: BTreeMap::new(),
        aggregated: criteria.into(),
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let names = ["error_mean", "error_var", "epoch_mean", "epoch_var"]
        .map(String::from)
        .to_vec();
    let matrix = EvaluationMatrix::new(
        names,
        Vec::new(),
        vec![
            combo("fast", "0.01", "triangular", [0.18, 0.004, 4.2, 1.1]),
            combo("stable", "0.001", "triangular2", [0.16, 0.001, 9.5, 2.0]),
            combo("accurate", "0.0005", "exp_range", [0.12, 0.003, 12.8, 3.4]),
            combo("worse", "0.005", "triangular", [0.19, 0.005, 9.9, 3.5]),
        ],
    )?;

    let weights: [[f64; 4]; 5] = [
        [0.0, 0.0, 0.0, 0.0],
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [1.0, 0.5, 0.2, 0.2],
    ];
    for phi in weights {
        let r = select(&matrix, &phi)?;
        let scores: Vec<String> = r.projections.iter().map(|p| format!("{p:.3}")).collect();
        println!(
            "phi {:?} -> {:<8} (resolved {:?}, projections [{}])",
            phi,
            r.selected_id,
            r.resolved_weights.components(),
            scores.join(", ")
        );
    }

    match select(&matrix, &[0.5, 1.2, 0.0, 0.0]) {
        Err(e) => println!("rejected: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
