use std::fmt::Write as _;

use seld_core::gradsuite::{model_check, op_suite};
use seld_core::{Result, SeldError};

use crate::settings;
use crate::Common;

pub const OP_TOLERANCE: f64 = 1e-4;
pub const MODEL_TOLERANCE: f64 = 1e-3;

pub fn run(common: &Common) -> Result<()> {
    let known: Vec<String> = ["frames", "batch", "entries"].map(String::from).to_vec();
    let kv = settings::load(common, &known)?;
    let seed = common.seed.unwrap_or(0);
    let frames: usize = kv.get_or("frames", 100)?;
    let batch: usize = kv.get_or("batch", 1)?;
    let entries: usize = kv.get_or("entries", 6)?;

    let mut csv = String::from("check,entries,max_rel_err,tolerance,pass\n");
    let mut failed = Vec::new();
    let mut row = |name: &str, checked: usize, err: f64, tol: f64| {
        let pass = err < tol;
        println!("{:<22} {:>6} entries  max rel err {err:.3e}  {}", name, checked, if pass { "ok" } else { "FAIL" });
        writeln!(csv, "{name},{checked},{err:.6e},{tol:e},{pass}").unwrap();
        if !pass {
            failed.push(name.to_string());
        }
    };
    for (name, rep) in op_suite(seed)? {
        row(name, rep.checked, rep.max_rel_err, OP_TOLERANCE);
    }
    let rep = model_check(seed, frames, batch, Some(entries))?;
    row("model", rep.checked, rep.max_rel_err, MODEL_TOLERANCE);
    if let Some(dir) = &common.out_dir {
        std::fs::create_dir_all(dir)?;
        settings::write(&dir.join("gradcheck.csv"), &csv)?;
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(SeldError::Invalid(format!("gradient check failed for {}", failed.join(", "))))
    }
}
