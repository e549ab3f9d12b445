//! Light structural simplification for assembled junctions.
//!
//! The separator constructions build big disjunctions of big conjunctions;
//! without unit dropping and duplicate removal their output grows with the
//! number of cases rather than with the interesting content. These helpers
//! apply only identity-level rewrites (constants, duplicates by node
//! identity, singleton collapse), so the result is equivalent by
//! construction and no solver is consulted.

use crate::syntax::{FormulaId, FormulaStore};

/// Conjunction of `items` with `⊤` dropped, duplicates removed, `⊥`
/// absorbing, and a lone conjunct returned as itself. Empty input is `⊤`.
pub fn and_all(store: &mut FormulaStore, items: &[FormulaId]) -> FormulaId {
    let top = store.top();
    let bottom = store.bottom();
    let mut kept: Vec<FormulaId> = Vec::with_capacity(items.len());
    for &f in items {
        if f == bottom {
            return bottom;
        }
        if f == top || kept.contains(&f) {
            continue;
        }
        kept.push(f);
    }
    store.big_and(&kept)
}

/// Disjunction of `items` with `⊥` dropped, duplicates removed, `⊤`
/// absorbing, and a lone disjunct returned as itself. Empty input is `⊥`.
pub fn or_all(store: &mut FormulaStore, items: &[FormulaId]) -> FormulaId {
    let top = store.top();
    let bottom = store.bottom();
    let mut kept: Vec<FormulaId> = Vec::with_capacity(items.len());
    for &f in items {
        if f == top {
            return top;
        }
        if f == bottom || kept.contains(&f) {
            continue;
        }
        kept.push(f);
    }
    if kept.len() == 1 {
        return kept[0];
    }
    store.big_or(&kept)
}
