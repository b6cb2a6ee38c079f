//! Turns a per-epoch accuracy log into the evaluation matrix.
//!
//! Run with: `cargo run -p mtmc --example criteria_from_run_log`

use std::collections::BTreeMap;

use mtmc::{build_matrix, parse_run_log, CombinationSpec};

const LOG: &str = "\
combination_id,task_id,fold_id,epoch,accuracy
a,test1,f0,1,0.61
a,test1,f0,2,0.70
a,test1,f0,3,0.68
a,test1,f1,1,0.64
a,test1,f1,2,0.80
a,test1,f1,3,0.80
a,test2,f0,1,0.55
a,test2,f0,2,0.66
a,test2,f0,3,0.71
a,test2,f1,1,0.59
a,test2,f1,2,0.74
a,test2,f1,3,0.73
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let records = parse_run_log(LOG.as_bytes())?;
    let specs = vec![CombinationSpec {
        combination_id: "a".into(),
        hyperparameters: BTreeMap::from([
            ("base_lr".to_string(), "0.001".to_string()),
            ("lr_decay".to_string(), "0.75".to_string()),
        ]),
    }];
    let matrix = build_matrix(&records, &specs)?;

    let c = &matrix.combinations()[0];
    println!("criteria: {}", matrix.criteria_names().join(", "));
    for (task, v) in &c.per_task {
        println!("  {task:<6} {v}");
    }
    println!("  mean   {}", c.aggregated);
    println!("\n{}", matrix.to_json_pretty());

    let broken = LOG.replace("0.71", "1.71");
    if let Err(e) = parse_run_log(broken.as_bytes()) {
        println!("\nbroken log rejected: {e}");
    }
    Ok(())
}
