//! Finite Kripke models, model checking, σ-bisimulations (plain and
//! graded), and brute-force oracles.
//!
//! Everything here is deliberately straightforward: the oracles exist to
//! validate the symbolic engines, so they trade speed for obviousness.
//! Model enumeration is exhaustive up to a world bound, with canonical-form
//! pruning (lexicographically minimal encoding under point-fixing
//! permutations) to keep pair searches tractable.

use crate::error::EngineError;
use crate::syntax::{FormulaId, FormulaStore, LogicId, Node, Signature, SymId};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

/// A finite pointed-model carrier. Worlds are `0..worlds`. The universal
/// modality is never stored: `U` is implicitly the total relation. Missing
/// relation/valuation keys denote the empty relation/valuation; nominals
/// must be explicitly placed before formulas mentioning them are evaluated.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Model {
    pub worlds: usize,
    #[serde(default)]
    pub rel: BTreeMap<String, BTreeSet<(usize, usize)>>,
    #[serde(default)]
    pub val: BTreeMap<String, BTreeSet<usize>>,
    #[serde(default)]
    pub nom: BTreeMap<String, usize>,
}

impl Model {
    pub fn new(worlds: usize) -> Model {
        Model {
            worlds,
            rel: BTreeMap::new(),
            val: BTreeMap::new(),
            nom: BTreeMap::new(),
        }
    }

    pub fn add_edge(&mut self, r: &str, from: usize, to: usize) {
        self.rel.entry(r.to_string()).or_default().insert((from, to));
    }

    pub fn add_val(&mut self, p: &str, w: usize) {
        self.val.entry(p.to_string()).or_default().insert(w);
    }

    pub fn set_nom(&mut self, a: &str, w: usize) {
        self.nom.insert(a.to_string(), w);
    }

    pub fn has_edge(&self, r: &str, from: usize, to: usize) -> bool {
        self.rel.get(r).is_some_and(|s| s.contains(&(from, to)))
    }

    pub fn succs(&self, r: &str, w: usize) -> Vec<usize> {
        match self.rel.get(r) {
            None => Vec::new(),
            Some(s) => s
                .iter()
                .filter(|&&(f, _)| f == w)
                .map(|&(_, t)| t)
                .collect(),
        }
    }

    pub fn holds(&self, p: &str, w: usize) -> bool {
        self.val.get(p).is_some_and(|s| s.contains(&w))
    }

    /// Bounds check: every edge endpoint, valuation member and nominal
    /// placement names an existing world, and the domain is non-empty.
    pub fn validate(&self) -> Result<(), EngineError> {
        if self.worlds == 0 {
            return Err(EngineError::Model("model has an empty domain".into()));
        }
        for (r, pairs) in &self.rel {
            for &(a, b) in pairs {
                if a >= self.worlds || b >= self.worlds {
                    return Err(EngineError::Model(format!(
                        "edge ({a},{b}) of `{r}` out of range"
                    )));
                }
            }
        }
        for (p, ws) in &self.val {
            for &w in ws {
                if w >= self.worlds {
                    return Err(EngineError::Model(format!(
                        "valuation of `{p}` mentions world {w} out of range"
                    )));
                }
            }
        }
        for (a, &w) in &self.nom {
            if w >= self.worlds {
                return Err(EngineError::Model(format!(
                    "nominal `{a}` placed at world {w} out of range"
                )));
            }
        }
        Ok(())
    }
}

// --- model checking ----------------------------------------------------------

/// Memoizing evaluator for repeated truth queries against one model.
pub struct Evaluator<'a> {
    store: &'a FormulaStore,
    model: &'a Model,
    memo: HashMap<(usize, FormulaId), bool>,
}

impl<'a> Evaluator<'a> {
    pub fn new(store: &'a FormulaStore, model: &'a Model) -> Evaluator<'a> {
        Evaluator {
            store,
            model,
            memo: HashMap::new(),
        }
    }

    pub fn check(&mut self, w: usize, f: FormulaId) -> Result<bool, EngineError> {
        if let Some(&b) = self.memo.get(&(w, f)) {
            return Ok(b);
        }
        let b = match self.store.node(f) {
            Node::Top => true,
            Node::Prop(p) => self.model.holds(self.store.sym_name(p), w),
            Node::Nom(a) => {
                let name = self.store.sym_name(a);
                match self.model.nom.get(name) {
                    Some(&v) => v == w,
                    None => {
                        return Err(EngineError::Model(format!(
                            "nominal `{name}` is not assigned in the model"
                        )))
                    }
                }
            }
            Node::Not(x) => !self.check(w, x)?,
            Node::And(x, y) => self.check(w, x)? && self.check(w, y)?,
            Node::Dia(r, x) => {
                let mut found = false;
                for v in self.model.succs(self.store.sym_name(r), w) {
                    if self.check(v, x)? {
                        found = true;
                        break;
                    }
                }
                found
            }
            Node::DiaU(x) => {
                let mut found = false;
                for v in 0..self.model.worlds {
                    if self.check(v, x)? {
                        found = true;
                        break;
                    }
                }
                found
            }
            Node::At(a, x) => {
                let name = self.store.sym_name(a);
                match self.model.nom.get(name) {
                    Some(&v) => self.check(v, x)?,
                    None => {
                        return Err(EngineError::Model(format!(
                            "nominal `{name}` is not assigned in the model"
                        )))
                    }
                }
            }
            Node::AtLeast(n, r, x) => self.count_succs(w, r, x)? >= n as usize,
            Node::AtMost(n, r, x) => self.count_succs(w, r, x)? <= n as usize,
        };
        self.memo.insert((w, f), b);
        Ok(b)
    }

    fn count_succs(&mut self, w: usize, r: SymId, x: FormulaId) -> Result<usize, EngineError> {
        let mut count = 0;
        for v in self.model.succs(self.store.sym_name(r), w) {
            if self.check(v, x)? {
                count += 1;
            }
        }
        Ok(count)
    }
}

/// Truth of `f` at world `w` of `m`, per the usual satisfaction clauses;
/// graded modalities count successors exactly.
pub fn model_check(
    store: &FormulaStore,
    m: &Model,
    w: usize,
    f: FormulaId,
) -> Result<bool, EngineError> {
    Evaluator::new(store, m).check(w, f)
}

// --- bisimulations -----------------------------------------------------------

/// First clause a candidate relation violates, with witnesses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BisimViolation {
    /// σ-proposition truth differs across a linked pair.
    Atom { pair: (usize, usize), prop: String },
    /// σ-nominal placement differs across a linked pair.
    Nominal { pair: (usize, usize), nominal: String },
    /// An R-successor on the left has no linked R-successor on the right.
    Forth { pair: (usize, usize), rel: String, succ: usize },
    /// An R-successor on the right has no linked R-successor on the left.
    Back { pair: (usize, usize), rel: String, succ: usize },
    /// No matching of the left successor set into the right one.
    GradedForth { pair: (usize, usize), rel: String },
    /// No matching of the right successor set into the left one.
    GradedBack { pair: (usize, usize), rel: String },
    /// The designated points of a σ-nominal are not linked.
    AtLink { nominal: String },
    /// A left world is unlinked although the universal modality is shared.
    UForth { world: usize },
    /// A right world is unlinked although the universal modality is shared.
    UBack { world: usize },
    /// A σ-nominal is not assigned in one of the models.
    UnassignedNominal { nominal: String, side: u8 },
}

impl fmt::Display for BisimViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BisimViolation::Atom { pair, prop } => {
                write!(f, "(atom) fails at {pair:?} for proposition `{prop}`")
            }
            BisimViolation::Nominal { pair, nominal } => {
                write!(f, "(nom) fails at {pair:?} for nominal `{nominal}`")
            }
            BisimViolation::Forth { pair, rel, succ } => {
                write!(f, "(forth) fails at {pair:?}: `{rel}`-successor {succ} unmatched")
            }
            BisimViolation::Back { pair, rel, succ } => {
                write!(f, "(back) fails at {pair:?}: `{rel}`-successor {succ} unmatched")
            }
            BisimViolation::GradedForth { pair, rel } => {
                write!(f, "(gforth) fails at {pair:?} for `{rel}`: no saturating matching")
            }
            BisimViolation::GradedBack { pair, rel } => {
                write!(f, "(gback) fails at {pair:?} for `{rel}`: no saturating matching")
            }
            BisimViolation::AtLink { nominal } => {
                write!(f, "(@) fails: designated points of `{nominal}` not linked")
            }
            BisimViolation::UForth { world } => {
                write!(f, "(forth) for U fails: left world {world} unlinked")
            }
            BisimViolation::UBack { world } => {
                write!(f, "(back) for U fails: right world {world} unlinked")
            }
            BisimViolation::UnassignedNominal { nominal, side } => {
                write!(f, "nominal `{nominal}` unassigned in model {side}")
            }
        }
    }
}

/// Kuhn's augmenting-path matching: true iff some matching inside
/// `allowed` saturates all of `left`.
fn saturating_matching(
    left: &[usize],
    right: &[usize],
    allowed: &dyn Fn(usize, usize) -> bool,
) -> bool {
    fn augment(
        li: usize,
        left: &[usize],
        right: &[usize],
        allowed: &dyn Fn(usize, usize) -> bool,
        match_r: &mut [Option<usize>],
        visited: &mut [bool],
    ) -> bool {
        for ri in 0..right.len() {
            if !visited[ri] && allowed(left[li], right[ri]) {
                visited[ri] = true;
                let free = match match_r[ri] {
                    None => true,
                    Some(lj) => augment(lj, left, right, allowed, match_r, visited),
                };
                if free {
                    match_r[ri] = Some(li);
                    return true;
                }
            }
        }
        false
    }

    let mut match_r: Vec<Option<usize>> = vec![None; right.len()];
    for li in 0..left.len() {
        let mut visited = vec![false; right.len()];
        if !augment(li, left, right, allowed, &mut match_r, &mut visited) {
            return false;
        }
    }
    true
}

/// Check whether `z` is a σ-bisimulation between `m1` and `m2` in the sense
/// the logic requires: (atom)/(nom) on every pair, (forth)/(back) — or the
/// graded matching versions — for every σ-relation, the (@) clause when the
/// logic has `@`, and totality/surjectivity when the universal modality is
/// shared. Returns the first violated clause.
pub fn is_bisimulation(
    store: &FormulaStore,
    z: &BTreeSet<(usize, usize)>,
    m1: &Model,
    m2: &Model,
    sigma: &Signature,
    logic: LogicId,
) -> Result<(), BisimViolation> {
    let prop_names: Vec<&str> = sigma.props.iter().map(|&p| store.sym_name(p)).collect();
    let nom_names: Vec<&str> = sigma.noms.iter().map(|&a| store.sym_name(a)).collect();
    let rel_names: Vec<&str> = sigma.rels.iter().map(|&r| store.sym_name(r)).collect();

    let nom_at = |m: &Model, name: &str, side: u8| -> Result<usize, BisimViolation> {
        m.nom
            .get(name)
            .copied()
            .ok_or_else(|| BisimViolation::UnassignedNominal {
                nominal: name.to_string(),
                side,
            })
    };

    for &(w1, w2) in z {
        for &p in &prop_names {
            if m1.holds(p, w1) != m2.holds(p, w2) {
                return Err(BisimViolation::Atom {
                    pair: (w1, w2),
                    prop: p.to_string(),
                });
            }
        }
        for &a in &nom_names {
            let a1 = nom_at(m1, a, 1)?;
            let a2 = nom_at(m2, a, 2)?;
            if (a1 == w1) != (a2 == w2) {
                return Err(BisimViolation::Nominal {
                    pair: (w1, w2),
                    nominal: a.to_string(),
                });
            }
        }
        for &r in &rel_names {
            let s1 = m1.succs(r, w1);
            let s2 = m2.succs(r, w2);
            if logic.graded {
                let fwd = |v1: usize, v2: usize| z.contains(&(v1, v2));
                if !saturating_matching(&s1, &s2, &fwd) {
                    return Err(BisimViolation::GradedForth {
                        pair: (w1, w2),
                        rel: r.to_string(),
                    });
                }
                let bwd = |v2: usize, v1: usize| z.contains(&(v1, v2));
                if !saturating_matching(&s2, &s1, &bwd) {
                    return Err(BisimViolation::GradedBack {
                        pair: (w1, w2),
                        rel: r.to_string(),
                    });
                }
            } else {
                for &v1 in &s1 {
                    if !s2.iter().any(|&v2| z.contains(&(v1, v2))) {
                        return Err(BisimViolation::Forth {
                            pair: (w1, w2),
                            rel: r.to_string(),
                            succ: v1,
                        });
                    }
                }
                for &v2 in &s2 {
                    if !s1.iter().any(|&v1| z.contains(&(v1, v2))) {
                        return Err(BisimViolation::Back {
                            pair: (w1, w2),
                            rel: r.to_string(),
                            succ: v2,
                        });
                    }
                }
            }
        }
    }

    if logic.has_at() {
        for &a in &nom_names {
            let a1 = nom_at(m1, a, 1)?;
            let a2 = nom_at(m2, a, 2)?;
            if !z.contains(&(a1, a2)) {
                return Err(BisimViolation::AtLink {
                    nominal: a.to_string(),
                });
            }
        }
    }

    // The U clauses are per-pair, so they bite only when z is inhabited:
    // every world must then be linked in the appropriate direction.
    if logic.has_u() && sigma.includes_u && !z.is_empty() {
        for v1 in 0..m1.worlds {
            if !z.iter().any(|&(a, _)| a == v1) {
                return Err(BisimViolation::UForth { world: v1 });
            }
        }
        for v2 in 0..m2.worlds {
            if !z.iter().any(|&(_, b)| b == v2) {
                return Err(BisimViolation::UBack { world: v2 });
            }
        }
    }

    Ok(())
}

/// Largest relation satisfying the per-pair clauses, computed by iterated
/// violation removal from the full product; every bisimulation is contained
/// in it. If the surviving relation fails one of the global clauses — (@)
/// or U-totality/surjectivity — then no bisimulation exists at all (those
/// clauses are inherited upward), and the empty relation is returned.
pub fn greatest_bisimulation(
    store: &FormulaStore,
    m1: &Model,
    m2: &Model,
    sigma: &Signature,
    logic: LogicId,
) -> Result<BTreeSet<(usize, usize)>, EngineError> {
    let prop_names: Vec<&str> = sigma.props.iter().map(|&p| store.sym_name(p)).collect();
    let nom_names: Vec<&str> = sigma.noms.iter().map(|&a| store.sym_name(a)).collect();
    let rel_names: Vec<&str> = sigma.rels.iter().map(|&r| store.sym_name(r)).collect();

    let nom_at = |m: &Model, name: &str, side: u8| -> Result<usize, EngineError> {
        m.nom.get(name).copied().ok_or_else(|| {
            EngineError::Model(format!("nominal `{name}` unassigned in model {side}"))
        })
    };

    let mut z: BTreeSet<(usize, usize)> = BTreeSet::new();
    for w1 in 0..m1.worlds {
        'pair: for w2 in 0..m2.worlds {
            for &p in &prop_names {
                if m1.holds(p, w1) != m2.holds(p, w2) {
                    continue 'pair;
                }
            }
            for &a in &nom_names {
                if (nom_at(m1, a, 1)? == w1) != (nom_at(m2, a, 2)? == w2) {
                    continue 'pair;
                }
            }
            z.insert((w1, w2));
        }
    }

    // Refine under (forth)/(back) or the graded matchings.
    loop {
        let mut removed = Vec::new();
        for &(w1, w2) in &z {
            let mut ok = true;
            for &r in &rel_names {
                let s1 = m1.succs(r, w1);
                let s2 = m2.succs(r, w2);
                if logic.graded {
                    let fwd = |v1: usize, v2: usize| z.contains(&(v1, v2));
                    let bwd = |v2: usize, v1: usize| z.contains(&(v1, v2));
                    if !saturating_matching(&s1, &s2, &fwd)
                        || !saturating_matching(&s2, &s1, &bwd)
                    {
                        ok = false;
                        break;
                    }
                } else {
                    let forth =
                        s1.iter().all(|&v1| s2.iter().any(|&v2| z.contains(&(v1, v2))));
                    let back =
                        s2.iter().all(|&v2| s1.iter().any(|&v1| z.contains(&(v1, v2))));
                    if !forth || !back {
                        ok = false;
                        break;
                    }
                }
            }
            if !ok {
                removed.push((w1, w2));
            }
        }
        if removed.is_empty() {
            break;
        }
        for pair in removed {
            z.remove(&pair);
        }
    }

    // Global clauses can only fail harder in sub-relations, so a failure
    // here means no bisimulation exists.
    if logic.has_at() {
        for &a in &nom_names {
            if !z.contains(&(nom_at(m1, a, 1)?, nom_at(m2, a, 2)?)) {
                return Ok(BTreeSet::new());
            }
        }
    }
    if logic.has_u() && sigma.includes_u && !z.is_empty() {
        let total = (0..m1.worlds).all(|v1| z.iter().any(|&(a, _)| a == v1));
        let surj = (0..m2.worlds).all(|v2| z.iter().any(|&(_, b)| b == v2));
        if !total || !surj {
            return Ok(BTreeSet::new());
        }
    }
    Ok(z)
}

// --- bounded model enumeration -------------------------------------------------

/// The symbol names a model enumeration ranges over.
#[derive(Debug, Clone, Default)]
pub struct SymbolSet {
    pub rels: Vec<String>,
    pub props: Vec<String>,
    pub noms: Vec<String>,
}

impl SymbolSet {
    pub fn from_signature(store: &FormulaStore, sig: &Signature) -> SymbolSet {
        SymbolSet {
            rels: sig.rels.iter().map(|&s| store.sym_name(s).to_string()).collect(),
            props: sig.props.iter().map(|&s| store.sym_name(s).to_string()).collect(),
            noms: sig.noms.iter().map(|&s| store.sym_name(s).to_string()).collect(),
        }
    }

    /// Number of models over these symbols with `n` worlds.
    pub fn count_models(&self, n: usize) -> u128 {
        let rel_bits = (self.rels.len() * n * n) as u32;
        let prop_bits = (self.props.len() * n) as u32;
        let mut total = 1u128;
        total = total.saturating_mul(1u128 << rel_bits.min(126));
        total = total.saturating_mul(1u128 << prop_bits.min(126));
        for _ in &self.noms {
            total = total.saturating_mul(n as u128);
        }
        total
    }
}

/// Exhaustive odometer over all models with exactly `n` worlds on a fixed
/// symbol set, in lexicographic encoding order (relations, then valuations,
/// then nominal placements).
pub struct ModelIter {
    syms: SymbolSet,
    n: usize,
    digits: Vec<u8>,
    radices: Vec<u8>,
    done: bool,
}

impl ModelIter {
    pub fn new(syms: SymbolSet, n: usize) -> ModelIter {
        let mut radices = Vec::new();
        radices.resize(syms.rels.len() * n * n + syms.props.len() * n, 2);
        for _ in &syms.noms {
            radices.push(n as u8);
        }
        ModelIter {
            syms,
            n,
            digits: vec![0; radices.len()],
            radices,
            done: n == 0,
        }
    }

    fn decode(&self) -> Model {
        let n = self.n;
        let mut m = Model::new(n);
        let mut i = 0;
        for r in &self.syms.rels {
            for a in 0..n {
                for b in 0..n {
                    if self.digits[i] == 1 {
                        m.add_edge(r, a, b);
                    }
                    i += 1;
                }
            }
        }
        for p in &self.syms.props {
            for w in 0..n {
                if self.digits[i] == 1 {
                    m.add_val(p, w);
                }
                i += 1;
            }
        }
        for a in &self.syms.noms {
            m.set_nom(a, self.digits[i] as usize);
            i += 1;
        }
        m
    }

    fn advance(&mut self) {
        for i in (0..self.digits.len()).rev() {
            self.digits[i] += 1;
            if self.digits[i] < self.radices[i] {
                return;
            }
            self.digits[i] = 0;
        }
        self.done = true;
    }
}

impl Iterator for ModelIter {
    type Item = Model;

    fn next(&mut self) -> Option<Model> {
        if self.done {
            return None;
        }
        let m = self.decode();
        if self.digits.is_empty() {
            self.done = true;
        } else {
            self.advance();
        }
        Some(m)
    }
}

/// Apply a world permutation to a model.
fn permute_model(m: &Model, perm: &[usize]) -> Model {
    let mut out = Model::new(m.worlds);
    for (r, pairs) in &m.rel {
        let set: BTreeSet<(usize, usize)> =
            pairs.iter().map(|&(a, b)| (perm[a], perm[b])).collect();
        out.rel.insert(r.clone(), set);
    }
    for (p, ws) in &m.val {
        out.val.insert(p.clone(), ws.iter().map(|&w| perm[w]).collect());
    }
    for (a, &w) in &m.nom {
        out.nom.insert(a.clone(), perm[w]);
    }
    out
}

fn permutations_fixing_zero(n: usize) -> Vec<Vec<usize>> {
    fn go(rest: &mut Vec<usize>, acc: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest.is_empty() {
            out.push(acc.clone());
            return;
        }
        for i in 0..rest.len() {
            let x = rest.remove(i);
            acc.push(x);
            go(rest, acc, out);
            acc.pop();
            rest.insert(i, x);
        }
    }
    let mut out = Vec::new();
    let mut rest: Vec<usize> = (1..n).collect();
    go(&mut rest, &mut vec![0], &mut out);
    out
}

/// Canonical representative test for pointed models (point fixed at world
/// 0): the model's encoding is minimal among all relabelings of the other
/// worlds. Used to prune isomorphic duplicates from witness searches.
pub fn is_canonical(m: &Model) -> bool {
    let enc = |m: &Model| (m.rel.clone(), m.val.clone(), m.nom.clone());
    let mine = enc(m);
    for perm in permutations_fixing_zero(m.worlds) {
        if enc(&permute_model(m, &perm)) < mine {
            return false;
        }
    }
    true
}

/// First model (in enumeration order: by size, then encoding) with at most
/// `max_worlds` worlds satisfying `f` at world 0, over exactly the symbols
/// of `f`. `None` means no model within the bound — not unsatisfiability.
pub fn find_model(
    store: &FormulaStore,
    f: FormulaId,
    max_worlds: usize,
) -> Result<Option<Model>, EngineError> {
    let sig = store.signature_of(f);
    let syms = SymbolSet::from_signature(store, &sig);
    for n in 1..=max_worlds {
        for m in ModelIter::new(syms.clone(), n) {
            if model_check(store, &m, 0, f)? {
                return Ok(Some(m));
            }
        }
    }
    Ok(None)
}

/// A verified joint-consistency witness: two pointed models and a
/// σ-bisimulation linking the points.
#[derive(Debug, Clone)]
pub struct JointWitness {
    pub m1: Model,
    pub w1: usize,
    pub m2: Model,
    pub w2: usize,
    pub z: BTreeSet<(usize, usize)>,
}

/// Exhaustive bounded search for pointed models of `f1`, `f2` linked by a
/// σ-bisimulation. Each side ranges over its formula's symbols plus σ
/// (canonical-form pruned); candidate relations are the greatest
/// bisimulation only, which is sound because a linking bisimulation exists
/// iff the greatest one links the points. `None` means none up to the
/// bound, which is *not* a proof of joint inconsistency.
pub fn joint_consistency_oracle(
    store: &FormulaStore,
    f1: FormulaId,
    f2: FormulaId,
    sigma: &Signature,
    logic: LogicId,
    max_worlds: usize,
) -> Result<Option<JointWitness>, EngineError> {
    let side_syms = |f: FormulaId| -> SymbolSet {
        let sig = store.signature_of(f).union(sigma);
        SymbolSet::from_signature(store, &sig)
    };
    let satisfying = |f: FormulaId, syms: &SymbolSet| -> Result<Vec<Model>, EngineError> {
        let mut out = Vec::new();
        for n in 1..=max_worlds {
            for m in ModelIter::new(syms.clone(), n) {
                if is_canonical(&m) && model_check(store, &m, 0, f)? {
                    out.push(m);
                }
            }
        }
        Ok(out)
    };
    let models1 = satisfying(f1, &side_syms(f1))?;
    let models2 = satisfying(f2, &side_syms(f2))?;
    for m1 in &models1 {
        for m2 in &models2 {
            let z = greatest_bisimulation(store, m1, m2, sigma, logic)?;
            if z.contains(&(0, 0)) {
                // Re-verify before returning: the witness must stand on
                // its own via the checkers.
                debug_assert!(model_check(store, m1, 0, f1)?);
                debug_assert!(model_check(store, m2, 0, f2)?);
                if is_bisimulation(store, &z, m1, m2, sigma, logic).is_err() {
                    return Err(EngineError::VerificationFailed {
                        place: "joint_consistency_oracle",
                        detail: "greatest bisimulation failed re-verification".into(),
                    });
                }
                return Ok(Some(JointWitness {
                    m1: m1.clone(),
                    w1: 0,
                    m2: m2.clone(),
                    w2: 0,
                    z,
                }));
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::PrintMode;
    use proptest::prelude::*;

    fn parse(s: &mut FormulaStore, text: &str, logic: LogicId) -> FormulaId {
        s.parse(text, logic).unwrap()
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"worlds": 3, "rel": {"R": [[0,1],[1,2]]}, "val": {"p": [0,2]}, "nom": {"a": 1}}"#;
        let m: Model = serde_json::from_str(text).unwrap();
        assert_eq!(m.worlds, 3);
        assert!(m.has_edge("R", 0, 1) && m.has_edge("R", 1, 2));
        assert!(m.holds("p", 0) && !m.holds("p", 1) && m.holds("p", 2));
        assert_eq!(m.nom["a"], 1);
        let back = serde_json::to_string(&m).unwrap();
        let m2: Model = serde_json::from_str(&back).unwrap();
        assert_eq!(m, m2);
    }

    #[test]
    fn model_check_basics() {
        let mut s = FormulaStore::new();
        // Single world with an R self-loop and a there.
        let mut m = Model::new(1);
        m.add_edge("R", 0, 0);
        m.set_nom("a", 0);
        let f = parse(&mut s, "('a & <R>'a)", LogicId::H);
        assert!(model_check(&s, &m, 0, f).unwrap());

        // Two-world chain, p at the far end.
        let mut m = Model::new(2);
        m.add_edge("R", 0, 1);
        m.add_val("p", 1);
        let f = parse(&mut s, "<R> p", LogicId::H);
        assert!(model_check(&s, &m, 0, f).unwrap());
        assert!(!model_check(&s, &m, 1, f).unwrap());
    }

    #[test]
    fn model_check_graded_counts() {
        let mut s = FormulaStore::new();
        let mut m = Model::new(4);
        for v in 1..4 {
            m.add_edge("R", 0, v);
        }
        m.add_val("p", 1);
        m.add_val("p", 2);
        let f2 = parse(&mut s, "atleast 2 R p", LogicId::G);
        let f3 = parse(&mut s, "atleast 3 R p", LogicId::G);
        assert!(model_check(&s, &m, 0, f2).unwrap());
        assert!(!model_check(&s, &m, 0, f3).unwrap());
        let le = parse(&mut s, "atmost 2 R p", LogicId::G);
        assert!(model_check(&s, &m, 0, le).unwrap());
    }

    #[test]
    fn model_check_universal_and_at() {
        let mut s = FormulaStore::new();
        let mut m = Model::new(2);
        m.add_val("p", 1);
        m.set_nom("a", 1);
        let f = parse(&mut s, "<U> p", LogicId::H_AT_U);
        assert!(model_check(&s, &m, 0, f).unwrap());
        let g = parse(&mut s, "[U] p", LogicId::H_AT_U);
        assert!(!model_check(&s, &m, 0, g).unwrap());
        // @a p via the H@ primitive
        let h = parse(&mut s, "@b p", LogicId::H_AT);
        let mut m2 = m.clone();
        m2.set_nom("b", 1);
        assert!(model_check(&s, &m2, 0, h).unwrap());
    }

    #[test]
    fn unassigned_nominal_is_an_error() {
        let mut s = FormulaStore::new();
        let m = Model::new(1);
        let f = parse(&mut s, "'c", LogicId::H);
        assert!(model_check(&s, &m, 0, f).is_err());
    }

    fn sigma(store: &mut FormulaStore, rels: &[&str], props: &[&str], noms: &[&str]) -> Signature {
        use crate::syntax::SymKind;
        let mut sig = Signature::default();
        for r in rels {
            sig.rels.insert(store.sym(r, SymKind::Rel));
        }
        for p in props {
            sig.props.insert(store.sym(p, SymKind::Prop));
        }
        for a in noms {
            sig.noms.insert(store.sym(a, SymKind::Nom));
        }
        sig
    }

    #[test]
    fn identity_is_a_bisimulation() {
        let mut s = FormulaStore::new();
        let sig = sigma(&mut s, &["R"], &["p"], &[]);
        let mut m = Model::new(2);
        m.add_edge("R", 0, 1);
        m.add_val("p", 1);
        let z: BTreeSet<_> = (0..2).map(|w| (w, w)).collect();
        assert_eq!(is_bisimulation(&s, &z, &m, &m, &sig, LogicId::H), Ok(()));
    }

    #[test]
    fn atom_clause_violation() {
        let mut s = FormulaStore::new();
        let sig = sigma(&mut s, &[], &["p"], &[]);
        let mut m1 = Model::new(1);
        m1.add_val("p", 0);
        let m2 = Model::new(1);
        let z: BTreeSet<_> = [(0, 0)].into_iter().collect();
        let err = is_bisimulation(&s, &z, &m1, &m2, &sig, LogicId::H).unwrap_err();
        assert!(matches!(err, BisimViolation::Atom { .. }));
    }

    #[test]
    fn graded_pigeonhole_violation() {
        let mut s = FormulaStore::new();
        let sig = sigma(&mut s, &["R"], &[], &[]);
        // w has two successors, w' only one: no bijection.
        let mut m1 = Model::new(3);
        m1.add_edge("R", 0, 1);
        m1.add_edge("R", 0, 2);
        let mut m2 = Model::new(2);
        m2.add_edge("R", 0, 1);
        let mut z = BTreeSet::new();
        z.insert((0, 0));
        z.insert((1, 1));
        z.insert((2, 1));
        assert_eq!(is_bisimulation(&s, &z, &m1, &m2, &sig, LogicId::H), Ok(()));
        let err = is_bisimulation(&s, &z, &m1, &m2, &sig, LogicId::G).unwrap_err();
        assert!(matches!(err, BisimViolation::GradedForth { .. }));
    }

    #[test]
    fn greatest_bisimulation_examples() {
        let mut s = FormulaStore::new();
        let sig = sigma(&mut s, &[], &["p"], &[]);
        let mut m1 = Model::new(1);
        m1.add_val("p", 0);
        let z = greatest_bisimulation(&s, &m1, &m1, &sig, LogicId::H).unwrap();
        assert_eq!(z, [(0, 0)].into_iter().collect());
        let m2 = Model::new(1);
        let z = greatest_bisimulation(&s, &m1, &m2, &sig, LogicId::H).unwrap();
        assert!(z.is_empty());
    }

    #[test]
    fn greatest_bisimulation_with_itself_contains_the_identity() {
        // Worlds with distinct atom profiles: a mismatching candidate pair
        // must not shadow later candidates for the same left world.
        let mut s = FormulaStore::new();
        let sig = sigma(&mut s, &["R"], &["p"], &[]);
        let mut m = Model::new(2);
        m.add_edge("R", 0, 1);
        m.add_val("p", 1);
        let z = greatest_bisimulation(&s, &m, &m, &sig, LogicId::H).unwrap();
        assert_eq!(z, [(0, 0), (1, 1)].into_iter().collect());
    }

    #[test]
    fn greatest_bisimulation_is_a_bisimulation_and_maximal() {
        let mut s = FormulaStore::new();
        let sig = sigma(&mut s, &["R"], &["p"], &[]);
        // Unfolding: a p-world with a loop vs a 2-cycle alternating p.
        let mut m1 = Model::new(1);
        m1.add_edge("R", 0, 0);
        m1.add_val("p", 0);
        let mut m2 = Model::new(2);
        m2.add_edge("R", 0, 1);
        m2.add_edge("R", 1, 0);
        m2.add_val("p", 0);
        m2.add_val("p", 1);
        let z = greatest_bisimulation(&s, &m1, &m2, &sig, LogicId::H).unwrap();
        assert_eq!(is_bisimulation(&s, &z, &m1, &m2, &sig, LogicId::H), Ok(()));
        assert_eq!(z.len(), 2);
        // Adding any removed pair breaks some clause.
        for w1 in 0..m1.worlds {
            for w2 in 0..m2.worlds {
                if !z.contains(&(w1, w2)) {
                    let mut z2 = z.clone();
                    z2.insert((w1, w2));
                    assert!(is_bisimulation(&s, &z2, &m1, &m2, &sig, LogicId::H).is_err());
                }
            }
        }
    }

    #[test]
    fn u_clauses_enforce_surjectivity() {
        let mut s = FormulaStore::new();
        let mut sig = sigma(&mut s, &[], &["p"], &[]);
        sig.includes_u = true;
        // m1 all-p single world; m2 has a p world and a ¬p world: the ¬p
        // world can never be linked, so no U-bisimulation exists.
        let mut m1 = Model::new(1);
        m1.add_val("p", 0);
        let mut m2 = Model::new(2);
        m2.add_val("p", 0);
        let z = greatest_bisimulation(&s, &m1, &m2, &sig, LogicId::H_AT_U).unwrap();
        assert!(z.is_empty());
        // Without U in σ the singleton link is fine.
        let mut sig2 = sig.clone();
        sig2.includes_u = false;
        let z = greatest_bisimulation(&s, &m1, &m2, &sig2, LogicId::H_AT_U).unwrap();
        assert_eq!(z, [(0, 0)].into_iter().collect());
    }

    #[test]
    fn at_clause_requires_linked_designated_points() {
        let mut s = FormulaStore::new();
        let sig = sigma(&mut s, &[], &["p"], &["a"]);
        // a sits at a p-world on one side and a ¬p-world on the other:
        // (atom)+(nom) exclude the link the (@) clause demands.
        let mut m1 = Model::new(2);
        m1.add_val("p", 0);
        m1.set_nom("a", 0);
        let mut m2 = Model::new(2);
        m2.add_val("p", 0);
        m2.set_nom("a", 1);
        let z = greatest_bisimulation(&s, &m1, &m2, &sig, LogicId::H_AT).unwrap();
        assert!(z.is_empty());
        // Under plain H the empty relation is fine and pairs can survive.
        let z = greatest_bisimulation(&s, &m1, &m2, &sig, LogicId::H).unwrap();
        assert!(!z.contains(&(0, 0)));
    }

    #[test]
    fn model_iter_counts() {
        let syms = SymbolSet {
            rels: vec!["R".into()],
            props: vec!["p".into()],
            noms: vec!["a".into()],
        };
        // n=2: 2^(4) edge sets × 2^2 valuations × 2 nominal positions = 128.
        let total = ModelIter::new(syms.clone(), 2).count();
        assert_eq!(total, 128);
        assert_eq!(syms.count_models(2), 128);
    }

    #[test]
    fn find_model_examples() {
        let mut s = FormulaStore::new();
        let f = parse(&mut s, "('a & <R>'a)", LogicId::H);
        let m = find_model(&s, f, 2).unwrap().expect("satisfiable");
        assert!(model_check(&s, &m, 0, f).unwrap());
        let g = parse(&mut s, "(p & ~p)", LogicId::H);
        assert!(find_model(&s, g, 3).unwrap().is_none());
    }

    #[test]
    fn oracle_atom_blocks_p_vs_not_p() {
        let mut s = FormulaStore::new();
        let f1 = parse(&mut s, "p", LogicId::H);
        let f2 = parse(&mut s, "~p", LogicId::H);
        let sig = sigma(&mut s, &[], &["p"], &[]);
        let w = joint_consistency_oracle(&s, f1, f2, &sig, LogicId::H, 2).unwrap();
        assert!(w.is_none());
    }

    #[test]
    fn oracle_disjoint_sigma_links_anything() {
        let mut s = FormulaStore::new();
        let f1 = parse(&mut s, "p", LogicId::H);
        let f2 = parse(&mut s, "q", LogicId::H);
        let sig = Signature::default();
        let w = joint_consistency_oracle(&s, f1, f2, &sig, LogicId::H, 1)
            .unwrap()
            .expect("witness");
        assert_eq!(w.m1.worlds, 1);
        assert_eq!(w.m2.worlds, 1);
        assert!(w.z.contains(&(0, 0)));
    }

    #[test]
    fn oracle_introduction_pair_has_witness() {
        // The motivating non-interpolation instance: a ∧ ⟨R⟩a vs
        // b ∧ [R]¬b with σ = {R} is jointly consistent (self-loop vs
        // 2-cycle), hence no separator exists.
        let mut s = FormulaStore::new();
        let f1 = parse(&mut s, "('a & <R>'a)", LogicId::H);
        let f2 = parse(&mut s, "('b & [R]~'b)", LogicId::H);
        let sig = sigma(&mut s, &["R"], &[], &[]);
        let w = joint_consistency_oracle(&s, f1, f2, &sig, LogicId::H, 2)
            .unwrap()
            .expect("witness expected");
        assert!(model_check(&s, &w.m1, w.w1, f1).unwrap());
        assert!(model_check(&s, &w.m2, w.w2, f2).unwrap());
        assert_eq!(
            is_bisimulation(&s, &w.z, &w.m1, &w.m2, &sig, LogicId::H),
            Ok(())
        );
        assert!(w.z.contains(&(w.w1, w.w2)));
    }

    #[test]
    fn bisim_invariance_spot_check() {
        // Linked worlds agree on sampled σ-formulas.
        let mut s = FormulaStore::new();
        let sig = sigma(&mut s, &["R"], &["p"], &[]);
        let mut m1 = Model::new(2);
        m1.add_edge("R", 0, 1);
        m1.add_val("p", 1);
        let mut m2 = Model::new(3);
        m2.add_edge("R", 0, 1);
        m2.add_edge("R", 0, 2);
        m2.add_val("p", 1);
        m2.add_val("p", 2);
        let z = greatest_bisimulation(&s, &m1, &m2, &sig, LogicId::H).unwrap();
        let texts = ["p", "<R> p", "[R] p", "<R> (p & <R> p)", "[R] <R> p"];
        let mut formulas: Vec<FormulaId> = Vec::new();
        for t in texts {
            formulas.push(parse(&mut s, t, LogicId::H));
        }
        for &(w1, w2) in &z {
            for &f in &formulas {
                assert_eq!(
                    model_check(&s, &m1, w1, f).unwrap(),
                    model_check(&s, &m2, w2, f).unwrap(),
                    "disagreement at ({w1},{w2}) on {}",
                    s.print(f, PrintMode::Tree)
                );
            }
        }
    }

    /// Brute force over every subset: the paper's "for every finite S there
    /// is a Z-respecting bijection into the other side's successors".
    fn gforth_by_subsets(left: &[usize], right: &[usize], z: &BTreeSet<(usize, usize)>) -> bool {
        fn injective(
            s: &[usize],
            right: &[usize],
            z: &BTreeSet<(usize, usize)>,
            used: &mut Vec<bool>,
        ) -> bool {
            match s.split_first() {
                None => true,
                Some((&v, rest)) => {
                    for (ri, &v2) in right.iter().enumerate() {
                        if !used[ri] && z.contains(&(v, v2)) {
                            used[ri] = true;
                            if injective(rest, right, z, used) {
                                used[ri] = false;
                                return true;
                            }
                            used[ri] = false;
                        }
                    }
                    false
                }
            }
        }
        let k = left.len();
        for mask in 0..(1u32 << k) {
            let s: Vec<usize> = (0..k).filter(|&i| mask >> i & 1 == 1).map(|i| left[i]).collect();
            let mut used = vec![false; right.len()];
            if !injective(&s, right, z, &mut used) {
                return false;
            }
        }
        true
    }

    proptest! {
        #[test]
        fn matching_equals_subset_bruteforce(
            edges in proptest::collection::btree_set((0usize..4, 0usize..4), 0..12),
            nl in 1usize..=4,
            nr in 1usize..=4,
        ) {
            let left: Vec<usize> = (0..nl).collect();
            let right: Vec<usize> = (0..nr).collect();
            let z: BTreeSet<(usize, usize)> = edges;
            let fast = saturating_matching(&left, &right, &|a, b| z.contains(&(a, b)));
            let slow = gforth_by_subsets(&left, &right, &z);
            prop_assert_eq!(fast, slow);
        }
    }
}
