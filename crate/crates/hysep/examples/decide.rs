//! Decide satisfiability of a formula from the command line.
//!
//! ```text
//! cargo run -p hysep --example decide -- "(('a & <R>'a) & [R]~'a)" H
//! ```

use hysep::sat::{satisfiable_with, search_model, SatLimits, SatMode};
use hysep::{FormulaStore, LogicId};

fn main() {
    let mut args = std::env::args().skip(1);
    let text = args.next().unwrap_or_else(|| "(p & ~p)".to_string());
    let logic = args
        .next()
        .as_deref()
        .and_then(LogicId::from_name)
        .unwrap_or(LogicId::H_AT_U);

    let mut store = FormulaStore::new();
    let f = match store.parse(&text, logic) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("parse error: {e}");
            std::process::exit(2);
        }
    };
    for mode in [SatMode::Elimination, SatMode::Search] {
        match satisfiable_with(&mut store, f, logic, mode, &SatLimits::default()) {
            Ok(v) => println!("{mode:?}: {}", if v { "sat" } else { "unsat" }),
            Err(e) => println!("{mode:?}: unknown ({e})"),
        }
    }
    if let Ok(Some((model, world))) = search_model(&mut store, f, logic, &SatLimits::default()) {
        println!(
            "model with {} worlds, formula holds at world {world}:",
            model.worlds
        );
        println!("{}", serde_json::to_string_pretty(&model).unwrap());
    }
}
