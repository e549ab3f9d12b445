//! Decide separator existence for two formulas over a shared signature and
//! print the separator when one exists. All nominals must be shared.
//!
//! ```text
//! cargo run -p hysep --example separate -- "<R>p" "~<R>p" R,p H
//! ```

use hysep::syntax::{PrintMode, SymKind};
use hysep::warmup::{separator_shared_nominals, WarmupLimits};
use hysep::{FormulaStore, LogicId, Signature};

fn main() {
    let mut args = std::env::args().skip(1);
    let t1 = args.next().unwrap_or_else(|| "<R>p".to_string());
    let t2 = args.next().unwrap_or_else(|| "~<R>p".to_string());
    let sigma_list = args.next().unwrap_or_else(|| "R,p".to_string());
    let logic = args
        .next()
        .as_deref()
        .and_then(LogicId::from_name)
        .unwrap_or(LogicId::H);

    let mut store = FormulaStore::new();
    let parse = |store: &mut FormulaStore, text: &str| match store.parse(text, logic) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("parse error in `{text}`: {e}");
            std::process::exit(2);
        }
    };
    let f1 = parse(&mut store, &t1);
    let f2 = parse(&mut store, &t2);

    let mut sigma = Signature { includes_u: logic.has_u(), ..Signature::default() };
    for name in sigma_list.split(',').filter(|s| !s.is_empty()) {
        let Some(id) = store.lookup_sym(name) else {
            eprintln!("signature symbol `{name}` does not occur in the inputs");
            std::process::exit(2);
        };
        match store.sym_kind(id) {
            SymKind::Rel => sigma.rels.insert(id),
            SymKind::Prop => sigma.props.insert(id),
            SymKind::Nom => sigma.noms.insert(id),
        };
    }

    match separator_shared_nominals(&mut store, f1, f2, &sigma, logic, &WarmupLimits::default()) {
        Ok(out) => match out.separator {
            Some(sep) => {
                println!("separator exists");
                println!("{}", store.print(sep, PrintMode::Tree));
            }
            None => {
                let sv = out.survivor.expect("no separator implies a surviving pair");
                println!("no separator: jointly consistent over the shared signature");
                println!(
                    "surviving type pair ({}, {}) in case pair ({}, {})",
                    sv.m1, sv.m2, sv.case1, sv.case2
                );
            }
        },
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(2);
        }
    }
}
