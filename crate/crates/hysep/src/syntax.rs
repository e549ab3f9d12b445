//! Formula representation: hash-consed DAGs, parsing and printing,
//! signatures, closures, and the Craig-interpolant → separator reduction.
//!
//! Formulas live in a [`FormulaStore`]; structurally identical nodes share
//! one [`FormulaId`], so DAG size equals the number of distinct subformulae.
//! Negation is a structural `Not` node, with the single normalisation that
//! `not` collapses double negation (`¬¬φ = φ`). Disjunction, implication,
//! boxes and `false` are parser sugar over `¬`/`∧`/`⟨·⟩`/`⊤`; the printer
//! recognises the patterns and prints them back in sugared form, so
//! `parse ∘ print` is the identity on node ids.

use crate::error::ParseError;
use std::collections::{BTreeSet, HashMap};
use std::fmt;

/// Which of the three base hybrid languages a formula is written in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Base {
    /// Nominals only.
    H,
    /// Nominals and the @-operator.
    HAt,
    /// Nominals, @, and the universal modality; `@a φ` abbreviates `⟨U⟩(a ∧ φ)`.
    HAtU,
}

/// One of the six supported logics: a base language, optionally graded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LogicId {
    pub base: Base,
    pub graded: bool,
}

impl LogicId {
    pub const H: LogicId = LogicId { base: Base::H, graded: false };
    pub const H_AT: LogicId = LogicId { base: Base::HAt, graded: false };
    pub const H_AT_U: LogicId = LogicId { base: Base::HAtU, graded: false };
    pub const G: LogicId = LogicId { base: Base::H, graded: true };
    pub const G_AT: LogicId = LogicId { base: Base::HAt, graded: true };
    pub const G_AT_U: LogicId = LogicId { base: Base::HAtU, graded: true };

    pub const ALL: [LogicId; 6] = [
        LogicId::H,
        LogicId::H_AT,
        LogicId::H_AT_U,
        LogicId::G,
        LogicId::G_AT,
        LogicId::G_AT_U,
    ];

    pub fn name(&self) -> &'static str {
        match (self.base, self.graded) {
            (Base::H, false) => "H",
            (Base::HAt, false) => "H@",
            (Base::HAtU, false) => "H@U",
            (Base::H, true) => "G",
            (Base::HAt, true) => "G@",
            (Base::HAtU, true) => "G@U",
        }
    }

    pub fn from_name(s: &str) -> Option<LogicId> {
        LogicId::ALL.iter().copied().find(|l| l.name() == s)
    }

    pub fn has_at(&self) -> bool {
        self.base != Base::H
    }

    pub fn has_u(&self) -> bool {
        self.base == Base::HAtU
    }
}

impl fmt::Display for LogicId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Interned symbol (relation, propositional variable, or nominal).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymId(pub u32);

/// What namespace a symbol name belongs to. Namespaces are disjoint: one
/// name cannot be both a proposition and a nominal, say.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymKind {
    Rel,
    Prop,
    Nom,
}

impl SymKind {
    fn word(self) -> &'static str {
        match self {
            SymKind::Rel => "relation",
            SymKind::Prop => "proposition",
            SymKind::Nom => "nominal",
        }
    }
}

/// Hash-consed formula node id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FormulaId(pub u32);

/// A single DAG node. `AtLeast`/`AtMost` are the graded modalities
/// `⟨≥n R⟩`/`⟨≤n R⟩`; `DiaU` is `⟨U⟩`; `At` is `@a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Node {
    Top,
    Prop(SymId),
    Nom(SymId),
    Not(FormulaId),
    And(FormulaId, FormulaId),
    Dia(SymId, FormulaId),
    DiaU(FormulaId),
    At(SymId, FormulaId),
    AtLeast(u32, SymId, FormulaId),
    AtMost(u32, SymId, FormulaId),
}

/// A finite signature: the non-logical symbols a separator may use.
/// `U` is never a member of `rels`; whether the universal modality is
/// available (and constrained by bisimulations) is the `includes_u` flag.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Signature {
    pub rels: BTreeSet<SymId>,
    pub props: BTreeSet<SymId>,
    pub noms: BTreeSet<SymId>,
    pub includes_u: bool,
}

impl Signature {
    pub fn intersect(&self, other: &Signature) -> Signature {
        Signature {
            rels: self.rels.intersection(&other.rels).copied().collect(),
            props: self.props.intersection(&other.props).copied().collect(),
            noms: self.noms.intersection(&other.noms).copied().collect(),
            includes_u: self.includes_u && other.includes_u,
        }
    }

    pub fn union(&self, other: &Signature) -> Signature {
        Signature {
            rels: self.rels.union(&other.rels).copied().collect(),
            props: self.props.union(&other.props).copied().collect(),
            noms: self.noms.union(&other.noms).copied().collect(),
            includes_u: self.includes_u || other.includes_u,
        }
    }

    pub fn contains_sym(&self, s: SymId) -> bool {
        self.rels.contains(&s) || self.props.contains(&s) || self.noms.contains(&s)
    }

    pub fn is_subset(&self, other: &Signature) -> bool {
        self.rels.is_subset(&other.rels)
            && self.props.is_subset(&other.props)
            && self.noms.is_subset(&other.noms)
    }
}

/// The subformula closure of a formula pair, the base set over which types
/// are formed. Members never include `Not` nodes: a negated subformula is
/// represented by the sign of its body. The closure always contains `⊤`;
/// for `H@` inputs it contains `@a a` and for `H@U` inputs `⟨U⟩a` for every
/// occurring nominal `a`; `nom0` lists the occurring nominals.
#[derive(Debug, Clone)]
pub struct Closure {
    pub members: Vec<FormulaId>,
    pub index: HashMap<FormulaId, usize>,
    pub nom0: Vec<SymId>,
    pub logic: LogicId,
}

impl Closure {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn position(&self, f: FormulaId) -> Option<usize> {
        self.index.get(&f).copied()
    }
}

const RESERVED: [&str; 7] = ["true", "false", "atleast", "atmost", "let", "in", "U"];

/// Append-only interner for symbols and formula nodes. Construction is
/// single-writer; once built, ids may be shared and read freely.
#[derive(Debug, Default)]
pub struct FormulaStore {
    nodes: Vec<Node>,
    node_index: HashMap<Node, FormulaId>,
    sym_names: Vec<String>,
    sym_kinds: Vec<SymKind>,
    sym_index: HashMap<String, SymId>,
}

impl FormulaStore {
    pub fn new() -> Self {
        FormulaStore::default()
    }

    pub fn node(&self, f: FormulaId) -> Node {
        self.nodes[f.0 as usize]
    }

    pub fn sym_name(&self, s: SymId) -> &str {
        &self.sym_names[s.0 as usize]
    }

    pub fn sym_kind(&self, s: SymId) -> SymKind {
        self.sym_kinds[s.0 as usize]
    }

    pub fn lookup_sym(&self, name: &str) -> Option<SymId> {
        self.sym_index.get(name).copied()
    }

    /// Intern `name` in `kind`'s namespace, failing on a cross-namespace clash.
    pub fn try_sym(&mut self, name: &str, kind: SymKind) -> Result<SymId, ParseError> {
        if let Some(&id) = self.sym_index.get(name) {
            let prior = self.sym_kinds[id.0 as usize];
            if prior != kind {
                return Err(ParseError::NamespaceClash {
                    name: name.to_string(),
                    prior: prior.word(),
                    requested: kind.word(),
                });
            }
            return Ok(id);
        }
        let id = SymId(self.sym_names.len() as u32);
        self.sym_names.push(name.to_string());
        self.sym_kinds.push(kind);
        self.sym_index.insert(name.to_string(), id);
        Ok(id)
    }

    /// Intern `name`, panicking on a namespace clash (internal-use symbols).
    pub fn sym(&mut self, name: &str, kind: SymKind) -> SymId {
        self.try_sym(name, kind).expect("symbol namespace clash")
    }

    fn intern(&mut self, node: Node) -> FormulaId {
        if let Some(&id) = self.node_index.get(&node) {
            return id;
        }
        let id = FormulaId(self.nodes.len() as u32);
        self.nodes.push(node);
        self.node_index.insert(node, id);
        id
    }

    // --- smart constructors ---------------------------------------------

    pub fn top(&mut self) -> FormulaId {
        self.intern(Node::Top)
    }

    pub fn bottom(&mut self) -> FormulaId {
        let t = self.top();
        self.not(t)
    }

    pub fn prop(&mut self, s: SymId) -> FormulaId {
        debug_assert_eq!(self.sym_kind(s), SymKind::Prop);
        self.intern(Node::Prop(s))
    }

    pub fn nom(&mut self, s: SymId) -> FormulaId {
        debug_assert_eq!(self.sym_kind(s), SymKind::Nom);
        self.intern(Node::Nom(s))
    }

    /// Negation; collapses `¬¬φ` to `φ`.
    pub fn not(&mut self, f: FormulaId) -> FormulaId {
        if let Node::Not(g) = self.node(f) {
            return g;
        }
        self.intern(Node::Not(f))
    }

    pub fn and(&mut self, f: FormulaId, g: FormulaId) -> FormulaId {
        self.intern(Node::And(f, g))
    }

    pub fn or(&mut self, f: FormulaId, g: FormulaId) -> FormulaId {
        let nf = self.not(f);
        let ng = self.not(g);
        let a = self.and(nf, ng);
        self.not(a)
    }

    pub fn imp(&mut self, f: FormulaId, g: FormulaId) -> FormulaId {
        let ng = self.not(g);
        let a = self.and(f, ng);
        self.not(a)
    }

    pub fn dia(&mut self, r: SymId, f: FormulaId) -> FormulaId {
        debug_assert_eq!(self.sym_kind(r), SymKind::Rel);
        self.intern(Node::Dia(r, f))
    }

    /// `[R]φ = ¬⟨R⟩¬φ`.
    pub fn boxm(&mut self, r: SymId, f: FormulaId) -> FormulaId {
        let nf = self.not(f);
        let d = self.dia(r, nf);
        self.not(d)
    }

    pub fn dia_u(&mut self, f: FormulaId) -> FormulaId {
        self.intern(Node::DiaU(f))
    }

    /// `[U]φ = ¬⟨U⟩¬φ`.
    pub fn box_u(&mut self, f: FormulaId) -> FormulaId {
        let nf = self.not(f);
        let d = self.dia_u(nf);
        self.not(d)
    }

    /// The @-operator as a stored node. For `H@U` input text the parser
    /// expands `@a φ` to `⟨U⟩(a ∧ φ)` instead; internal machinery may build
    /// `At` nodes regardless of the ambient logic.
    pub fn at(&mut self, a: SymId, f: FormulaId) -> FormulaId {
        debug_assert_eq!(self.sym_kind(a), SymKind::Nom);
        self.intern(Node::At(a, f))
    }

    /// `@a φ` in the shape the given base language uses.
    pub fn at_in(&mut self, base: Base, a: SymId, f: FormulaId) -> FormulaId {
        match base {
            Base::HAtU => {
                let n = self.nom(a);
                let c = self.and(n, f);
                self.dia_u(c)
            }
            _ => self.at(a, f),
        }
    }

    pub fn at_least(&mut self, n: u32, r: SymId, f: FormulaId) -> FormulaId {
        debug_assert_eq!(self.sym_kind(r), SymKind::Rel);
        self.intern(Node::AtLeast(n, r, f))
    }

    pub fn at_most(&mut self, n: u32, r: SymId, f: FormulaId) -> FormulaId {
        debug_assert_eq!(self.sym_kind(r), SymKind::Rel);
        self.intern(Node::AtMost(n, r, f))
    }

    /// `⟨=n R⟩φ = ⟨≤n R⟩φ ∧ ⟨≥n R⟩φ`; with an upper cutoff `lambda`, counts
    /// at `n = lambda` mean "at least λ" and the upper conjunct is dropped.
    pub fn exactly(&mut self, n: u32, lambda: u32, r: SymId, f: FormulaId) -> FormulaId {
        let ge = self.at_least(n, r, f);
        if n < lambda {
            let le = self.at_most(n, r, f);
            self.and(le, ge)
        } else {
            ge
        }
    }

    /// Conjunction of a list; `⊤` when empty. Left-associated, input order.
    pub fn big_and(&mut self, fs: &[FormulaId]) -> FormulaId {
        match fs.split_first() {
            None => self.top(),
            Some((&first, rest)) => {
                let mut acc = first;
                for &f in rest {
                    acc = self.and(acc, f);
                }
                acc
            }
        }
    }

    /// Disjunction of a list; `⊥` when empty. `¬(¬f1 ∧ … ∧ ¬fn)`.
    pub fn big_or(&mut self, fs: &[FormulaId]) -> FormulaId {
        if fs.is_empty() {
            return self.bottom();
        }
        let negs: Vec<FormulaId> = fs.iter().map(|&f| self.not(f)).collect();
        let conj = self.big_and(&negs);
        self.not(conj)
    }

    // --- signature --------------------------------------------------------

    /// The relation symbols, propositional variables and nominals occurring
    /// in `f`. `U` is not a relation symbol and never appears.
    pub fn signature_of(&self, f: FormulaId) -> Signature {
        let mut sig = Signature::default();
        let mut stack = vec![f];
        let mut seen = BTreeSet::new();
        while let Some(g) = stack.pop() {
            if !seen.insert(g) {
                continue;
            }
            match self.node(g) {
                Node::Top => {}
                Node::Prop(p) => {
                    sig.props.insert(p);
                }
                Node::Nom(a) => {
                    sig.noms.insert(a);
                }
                Node::Not(x) | Node::DiaU(x) => stack.push(x),
                Node::And(x, y) => {
                    stack.push(x);
                    stack.push(y);
                }
                Node::Dia(r, x) | Node::AtLeast(_, r, x) | Node::AtMost(_, r, x) => {
                    sig.rels.insert(r);
                    stack.push(x);
                }
                Node::At(a, x) => {
                    sig.noms.insert(a);
                    stack.push(x);
                }
            }
        }
        sig
    }

    /// Largest grade `n` appearing in `⟨≥n⟩`/`⟨≤n⟩` nodes of `f` (0 if none).
    pub fn max_grade(&self, f: FormulaId) -> u32 {
        let mut best = 0;
        let mut stack = vec![f];
        let mut seen = BTreeSet::new();
        while let Some(g) = stack.pop() {
            if !seen.insert(g) {
                continue;
            }
            match self.node(g) {
                Node::AtLeast(n, _, x) | Node::AtMost(n, _, x) => {
                    best = best.max(n);
                    stack.push(x);
                }
                Node::Not(x) | Node::DiaU(x) | Node::At(_, x) | Node::Dia(_, x) => stack.push(x),
                Node::And(x, y) => {
                    stack.push(x);
                    stack.push(y);
                }
                _ => {}
            }
        }
        best
    }

    /// Modal depth (nesting of `⟨R⟩`, `⟨U⟩`, `@`, graded modalities).
    pub fn modal_depth(&self, f: FormulaId) -> usize {
        let mut memo: HashMap<FormulaId, usize> = HashMap::new();
        self.modal_depth_memo(f, &mut memo)
    }

    fn modal_depth_memo(&self, f: FormulaId, memo: &mut HashMap<FormulaId, usize>) -> usize {
        if let Some(&d) = memo.get(&f) {
            return d;
        }
        let d = match self.node(f) {
            Node::Top | Node::Prop(_) | Node::Nom(_) => 0,
            Node::Not(x) => self.modal_depth_memo(x, memo),
            Node::And(x, y) => self
                .modal_depth_memo(x, memo)
                .max(self.modal_depth_memo(y, memo)),
            Node::Dia(_, x)
            | Node::DiaU(x)
            | Node::At(_, x)
            | Node::AtLeast(_, _, x)
            | Node::AtMost(_, _, x) => 1 + self.modal_depth_memo(x, memo),
        };
        memo.insert(f, d);
        d
    }

    /// Number of distinct subformula nodes reachable from `f` (DAG size).
    pub fn dag_size(&self, f: FormulaId) -> usize {
        let mut seen = BTreeSet::new();
        let mut stack = vec![f];
        while let Some(g) = stack.pop() {
            if !seen.insert(g) {
                continue;
            }
            match self.node(g) {
                Node::Top | Node::Prop(_) | Node::Nom(_) => {}
                Node::Not(x)
                | Node::Dia(_, x)
                | Node::DiaU(x)
                | Node::At(_, x)
                | Node::AtLeast(_, _, x)
                | Node::AtMost(_, _, x) => stack.push(x),
                Node::And(x, y) => {
                    stack.push(x);
                    stack.push(y);
                }
            }
        }
        seen.len()
    }

    // --- closure ----------------------------------------------------------

    /// Subformula closure of `f1, f2` for `logic`, ordered canonically
    /// (lexicographically by printed form) so type bitsets are reproducible.
    pub fn closure(&mut self, f1: FormulaId, f2: FormulaId, logic: LogicId) -> Closure {
        let mut set: BTreeSet<FormulaId> = BTreeSet::new();
        let mut noms: BTreeSet<SymId> = BTreeSet::new();
        self.collect_members(f1, &mut set, &mut noms);
        self.collect_members(f2, &mut set, &mut noms);
        let top = self.top();
        set.insert(top);
        // Every occurring nominal is itself a member, so types record at
        // which worlds each nominal sits.
        for &a in noms.clone().iter() {
            let n = self.nom(a);
            set.insert(n);
        }
        match logic.base {
            Base::H => {}
            Base::HAt => {
                // `@a a` is valid; keeping it in the closure pins its sign.
                for &a in noms.clone().iter() {
                    let n = self.nom(a);
                    let f = self.at(a, n);
                    set.insert(f);
                }
            }
            Base::HAtU => {
                // `⟨U⟩a` holds everywhere in every model.
                for &a in noms.clone().iter() {
                    let n = self.nom(a);
                    let f = self.dia_u(n);
                    set.insert(f);
                }
            }
        }
        let mut members: Vec<FormulaId> = set.into_iter().collect();
        let mut printed: HashMap<FormulaId, String> = HashMap::new();
        for &m in &members {
            printed.insert(m, self.print(m, PrintMode::Tree));
        }
        members.sort_by(|a, b| printed[a].cmp(&printed[b]).then(a.cmp(b)));
        let index = members
            .iter()
            .enumerate()
            .map(|(i, &m)| (m, i))
            .collect();
        let mut nom0: Vec<SymId> = noms.into_iter().collect();
        nom0.sort_by(|a, b| self.sym_name(*a).cmp(self.sym_name(*b)));
        Closure {
            members,
            index,
            nom0,
            logic,
        }
    }

    fn collect_members(
        &mut self,
        f: FormulaId,
        set: &mut BTreeSet<FormulaId>,
        noms: &mut BTreeSet<SymId>,
    ) {
        match self.node(f) {
            Node::Not(x) => self.collect_members(x, set, noms),
            node => {
                if !set.insert(f) {
                    return;
                }
                match node {
                    Node::Top | Node::Prop(_) => {}
                    Node::Nom(a) => {
                        noms.insert(a);
                    }
                    Node::And(x, y) => {
                        self.collect_members(x, set, noms);
                        self.collect_members(y, set, noms);
                    }
                    Node::Dia(_, x)
                    | Node::DiaU(x)
                    | Node::AtLeast(_, _, x)
                    | Node::AtMost(_, _, x) => self.collect_members(x, set, noms),
                    Node::At(a, x) => {
                        noms.insert(a);
                        self.collect_members(x, set, noms);
                    }
                    Node::Not(_) => unreachable!(),
                }
            }
        }
    }

    // --- Craig reduction ---------------------------------------------------

    /// Reduce interpolation for `f1 → f2` to separation: rename the non-shared
    /// symbols of each side apart (suffix `_1`/`_2`, bumping on collision) and
    /// return `(f1', ¬f2', σ)` with `σ = sig(f1) ∩ sig(f2)`. A separator for
    /// the output triple is a Craig interpolant for `f1 → f2`.
    pub fn craig_to_separator(
        &mut self,
        f1: FormulaId,
        f2: FormulaId,
    ) -> (FormulaId, FormulaId, Signature) {
        let sig1 = self.signature_of(f1);
        let sig2 = self.signature_of(f2);
        let shared = sig1.intersect(&sig2);
        let mut taken: BTreeSet<String> = sig1
            .rels
            .iter()
            .chain(sig1.props.iter())
            .chain(sig1.noms.iter())
            .chain(sig2.rels.iter())
            .chain(sig2.props.iter())
            .chain(sig2.noms.iter())
            .map(|&s| self.sym_name(s).to_string())
            .collect();
        let map1 = self.renaming(&sig1, &shared, 1, &mut taken);
        let map2 = self.renaming(&sig2, &shared, 2, &mut taken);
        let f1r = self.rename(f1, &map1);
        let f2r = self.rename(f2, &map2);
        let nf2r = self.not(f2r);
        (f1r, nf2r, shared)
    }

    fn renaming(
        &mut self,
        sig: &Signature,
        shared: &Signature,
        side: u8,
        taken: &mut BTreeSet<String>,
    ) -> HashMap<SymId, SymId> {
        let mut map = HashMap::new();
        let all: Vec<SymId> = sig
            .rels
            .iter()
            .chain(sig.props.iter())
            .chain(sig.noms.iter())
            .copied()
            .collect();
        for s in all {
            if shared.contains_sym(s) {
                continue;
            }
            let base = format!("{}_{}", self.sym_name(s), side);
            let mut candidate = base.clone();
            let mut bump = 1usize;
            while taken.contains(&candidate) || RESERVED.contains(&candidate.as_str()) {
                bump += 1;
                candidate = format!("{base}_{bump}");
            }
            taken.insert(candidate.clone());
            let kind = self.sym_kind(s);
            let fresh = self.sym(&candidate, kind);
            map.insert(s, fresh);
        }
        map
    }

    /// Apply a symbol renaming throughout `f`.
    pub fn rename(&mut self, f: FormulaId, map: &HashMap<SymId, SymId>) -> FormulaId {
        let mut memo = HashMap::new();
        self.rename_memo(f, map, &mut memo)
    }

    fn rename_memo(
        &mut self,
        f: FormulaId,
        map: &HashMap<SymId, SymId>,
        memo: &mut HashMap<FormulaId, FormulaId>,
    ) -> FormulaId {
        if let Some(&g) = memo.get(&f) {
            return g;
        }
        let sub = |s: SymId| map.get(&s).copied().unwrap_or(s);
        let out = match self.node(f) {
            Node::Top => self.top(),
            Node::Prop(p) => {
                let q = sub(p);
                self.prop(q)
            }
            Node::Nom(a) => {
                let b = sub(a);
                self.nom(b)
            }
            Node::Not(x) => {
                let x2 = self.rename_memo(x, map, memo);
                self.not(x2)
            }
            Node::And(x, y) => {
                let x2 = self.rename_memo(x, map, memo);
                let y2 = self.rename_memo(y, map, memo);
                self.and(x2, y2)
            }
            Node::Dia(r, x) => {
                let x2 = self.rename_memo(x, map, memo);
                let r2 = sub(r);
                self.dia(r2, x2)
            }
            Node::DiaU(x) => {
                let x2 = self.rename_memo(x, map, memo);
                self.dia_u(x2)
            }
            Node::At(a, x) => {
                let x2 = self.rename_memo(x, map, memo);
                let a2 = sub(a);
                self.at(a2, x2)
            }
            Node::AtLeast(n, r, x) => {
                let x2 = self.rename_memo(x, map, memo);
                let r2 = sub(r);
                self.at_least(n, r2, x2)
            }
            Node::AtMost(n, r, x) => {
                let x2 = self.rename_memo(x, map, memo);
                let r2 = sub(r);
                self.at_most(n, r2, x2)
            }
        };
        memo.insert(f, out);
        out
    }
}

// --- printing ---------------------------------------------------------------

/// `Tree` prints the formula as a term; `Dag` emits `let` bindings for every
/// node referenced more than once, so shared structure stays visible.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrintMode {
    Tree,
    Dag,
}

impl FormulaStore {
    pub fn print(&self, f: FormulaId, mode: PrintMode) -> String {
        match mode {
            PrintMode::Tree => {
                let mut out = String::new();
                self.print_tree(f, &HashMap::new(), &mut out);
                out
            }
            PrintMode::Dag => self.print_dag(f),
        }
    }

    fn print_tree(&self, f: FormulaId, names: &HashMap<FormulaId, String>, out: &mut String) {
        if let Some(n) = names.get(&f) {
            out.push_str(n);
            return;
        }
        match self.node(f) {
            Node::Top => out.push_str("true"),
            Node::Prop(p) => out.push_str(self.sym_name(p)),
            Node::Nom(a) => {
                out.push('\'');
                out.push_str(self.sym_name(a));
            }
            Node::Not(x) => match self.node(x) {
                Node::Top => out.push_str("false"),
                Node::And(l, r) => {
                    // `¬(¬a ∧ ¬b)` prints as a|b, `¬(a ∧ ¬b)` as a->b.
                    let ln = self.node(l);
                    let rn = self.node(r);
                    if let (Node::Not(a), Node::Not(b)) = (ln, rn) {
                        out.push('(');
                        self.print_tree(a, names, out);
                        out.push_str(" | ");
                        self.print_tree(b, names, out);
                        out.push(')');
                    } else if let Node::Not(b) = rn {
                        out.push('(');
                        self.print_tree(l, names, out);
                        out.push_str(" -> ");
                        self.print_tree(b, names, out);
                        out.push(')');
                    } else {
                        out.push('~');
                        self.print_tree(x, names, out);
                    }
                }
                Node::Dia(r, y) => {
                    if let Node::Not(z) = self.node(y) {
                        out.push('[');
                        out.push_str(self.sym_name(r));
                        out.push_str("] ");
                        self.print_tree(z, names, out);
                    } else {
                        out.push('~');
                        self.print_tree(x, names, out);
                    }
                }
                Node::DiaU(y) => {
                    if let Node::Not(z) = self.node(y) {
                        out.push_str("[U] ");
                        self.print_tree(z, names, out);
                    } else {
                        out.push('~');
                        self.print_tree(x, names, out);
                    }
                }
                _ => {
                    out.push('~');
                    self.print_tree(x, names, out);
                }
            },
            Node::And(x, y) => {
                out.push('(');
                self.print_tree(x, names, out);
                out.push_str(" & ");
                self.print_tree(y, names, out);
                out.push(')');
            }
            Node::Dia(r, x) => {
                out.push('<');
                out.push_str(self.sym_name(r));
                out.push_str("> ");
                self.print_tree(x, names, out);
            }
            Node::DiaU(x) => {
                out.push_str("<U> ");
                self.print_tree(x, names, out);
            }
            Node::At(a, x) => {
                out.push('@');
                out.push_str(self.sym_name(a));
                out.push(' ');
                self.print_tree(x, names, out);
            }
            Node::AtLeast(n, r, x) => {
                out.push_str("atleast ");
                out.push_str(&n.to_string());
                out.push(' ');
                out.push_str(self.sym_name(r));
                out.push(' ');
                self.print_tree(x, names, out);
            }
            Node::AtMost(n, r, x) => {
                out.push_str("atmost ");
                out.push_str(&n.to_string());
                out.push(' ');
                out.push_str(self.sym_name(r));
                out.push(' ');
                self.print_tree(x, names, out);
            }
        }
    }

    fn print_dag(&self, f: FormulaId) -> String {
        // Count references (as printed: sugar hides the Not layers it prints).
        let mut refs: HashMap<FormulaId, usize> = HashMap::new();
        let mut order: Vec<FormulaId> = Vec::new();
        self.count_refs(f, &mut refs, &mut order);
        let prefix = self.fresh_let_prefix(f);
        let mut names: HashMap<FormulaId, String> = HashMap::new();
        let mut bindings: Vec<(String, String)> = Vec::new();
        for g in order {
            if g != f && refs[&g] >= 2 {
                let mut body = String::new();
                self.print_tree(g, &names, &mut body);
                let name = format!("{}{}", prefix, bindings.len() + 1);
                bindings.push((name.clone(), body));
                names.insert(g, name);
            }
        }
        let mut out = String::new();
        for (name, body) in &bindings {
            out.push_str("let ");
            out.push_str(name);
            out.push_str(" = ");
            out.push_str(body);
            out.push_str(" in ");
        }
        self.print_tree(f, &names, &mut out);
        out
    }

    /// Reference counting that mirrors the printer: sugared patterns
    /// (`|`, `->`, boxes, `false`) consume their hidden `Not` nodes.
    fn count_refs(&self, f: FormulaId, refs: &mut HashMap<FormulaId, usize>, order: &mut Vec<FormulaId>) {
        let c = refs.entry(f).or_insert(0);
        *c += 1;
        if *c > 1 {
            return;
        }
        match self.node(f) {
            Node::Top | Node::Prop(_) | Node::Nom(_) => {}
            Node::Not(x) => match self.node(x) {
                Node::Top => {}
                Node::And(l, r) => {
                    if let (Node::Not(a), Node::Not(b)) = (self.node(l), self.node(r)) {
                        self.count_refs(a, refs, order);
                        self.count_refs(b, refs, order);
                    } else if let Node::Not(b) = self.node(r) {
                        self.count_refs(l, refs, order);
                        self.count_refs(b, refs, order);
                    } else {
                        self.count_refs(x, refs, order);
                    }
                }
                Node::Dia(_, y) | Node::DiaU(y) => {
                    if let Node::Not(z) = self.node(y) {
                        self.count_refs(z, refs, order);
                    } else {
                        self.count_refs(x, refs, order);
                    }
                }
                _ => self.count_refs(x, refs, order),
            },
            Node::And(x, y) => {
                self.count_refs(x, refs, order);
                self.count_refs(y, refs, order);
            }
            Node::Dia(_, x)
            | Node::DiaU(x)
            | Node::At(_, x)
            | Node::AtLeast(_, _, x)
            | Node::AtMost(_, _, x) => self.count_refs(x, refs, order),
        }
        order.push(f);
    }

    fn fresh_let_prefix(&self, f: FormulaId) -> String {
        let sig = self.signature_of(f);
        let mut prefix = "x".to_string();
        let clashes = |p: &str, store: &FormulaStore| {
            sig.rels
                .iter()
                .chain(sig.props.iter())
                .chain(sig.noms.iter())
                .any(|&s| {
                    let n = store.sym_name(s);
                    n.starts_with(p) && n[p.len()..].chars().all(|c| c.is_ascii_digit()) && n.len() > p.len()
                })
        };
        while clashes(&prefix, self) {
            prefix.push('_');
        }
        prefix
    }
}

// --- parsing -----------------------------------------------------------------

struct Parser<'a> {
    text: &'a [u8],
    pos: usize,
    logic: LogicId,
    env: Vec<(String, FormulaId)>,
}

impl FormulaStore {
    /// Parse `text` as a formula of `logic`. Connectives outside the logic
    /// (e.g. `@` in `H`, `atleast` in ungraded logics) are rejected.
    pub fn parse(&mut self, text: &str, logic: LogicId) -> Result<FormulaId, ParseError> {
        let mut p = Parser {
            text: text.as_bytes(),
            pos: 0,
            logic,
            env: Vec::new(),
        };
        let f = p.parse_formula(self)?;
        p.skip_ws();
        if p.pos != p.text.len() {
            return Err(ParseError::Syntax {
                pos: p.pos,
                msg: "trailing input".to_string(),
            });
        }
        Ok(f)
    }
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.text.len() && self.text[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.text.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek()?;
        self.pos += 1;
        Some(c)
    }

    fn expect(&mut self, c: u8) -> Result<(), ParseError> {
        match self.bump() {
            Some(got) if got == c => Ok(()),
            got => Err(ParseError::Syntax {
                pos: self.pos.saturating_sub(got.map_or(0, |_| 1)),
                msg: format!(
                    "expected `{}`, found {}",
                    c as char,
                    got.map_or("end of input".to_string(), |g| format!("`{}`", g as char))
                ),
            }),
        }
    }

    fn ident(&mut self) -> Result<(String, usize), ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.text.len()
            && (self.text[self.pos].is_ascii_alphanumeric() || self.text[self.pos] == b'_')
        {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(ParseError::Syntax {
                pos: start,
                msg: "expected identifier".to_string(),
            });
        }
        Ok((
            std::str::from_utf8(&self.text[start..self.pos])
                .unwrap()
                .to_string(),
            start,
        ))
    }

    fn nat(&mut self) -> Result<u32, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.text.len() && self.text[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(ParseError::Syntax {
                pos: start,
                msg: "expected number".to_string(),
            });
        }
        std::str::from_utf8(&self.text[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| ParseError::Syntax {
                pos: start,
                msg: "grade out of range".to_string(),
            })
    }

    fn named_sym(
        &mut self,
        store: &mut FormulaStore,
        name: String,
        pos: usize,
        kind: SymKind,
    ) -> Result<SymId, ParseError> {
        if RESERVED.contains(&name.as_str()) {
            return Err(ParseError::ReservedWord { name, pos });
        }
        store.try_sym(&name, kind)
    }

    fn unsupported(&self, connective: &str, pos: usize) -> ParseError {
        ParseError::UnsupportedConnective {
            connective: connective.to_string(),
            logic: self.logic.name().to_string(),
            pos,
        }
    }

    fn parse_formula(&mut self, store: &mut FormulaStore) -> Result<FormulaId, ParseError> {
        let c = self.peek().ok_or(ParseError::Syntax {
            pos: self.pos,
            msg: "unexpected end of input".to_string(),
        })?;
        match c {
            b'~' => {
                self.bump();
                let f = self.parse_formula(store)?;
                Ok(store.not(f))
            }
            b'(' => {
                self.bump();
                let lhs = self.parse_formula(store)?;
                self.skip_ws();
                let op = self.bump().ok_or(ParseError::Syntax {
                    pos: self.pos,
                    msg: "expected binary operator".to_string(),
                })?;
                let f = match op {
                    b'&' => {
                        let rhs = self.parse_formula(store)?;
                        store.and(lhs, rhs)
                    }
                    b'|' => {
                        let rhs = self.parse_formula(store)?;
                        store.or(lhs, rhs)
                    }
                    b'-' => {
                        self.expect(b'>')?;
                        let rhs = self.parse_formula(store)?;
                        store.imp(lhs, rhs)
                    }
                    other => {
                        return Err(ParseError::Syntax {
                            pos: self.pos - 1,
                            msg: format!("expected `&`, `|` or `->`, found `{}`", other as char),
                        })
                    }
                };
                self.expect(b')')?;
                Ok(f)
            }
            b'<' => {
                self.bump();
                let (name, pos) = self.ident()?;
                self.expect(b'>')?;
                if name == "U" {
                    if !self.logic.has_u() {
                        return Err(self.unsupported("<U>", pos));
                    }
                    let f = self.parse_formula(store)?;
                    Ok(store.dia_u(f))
                } else {
                    let r = self.named_sym(store, name, pos, SymKind::Rel)?;
                    let f = self.parse_formula(store)?;
                    Ok(store.dia(r, f))
                }
            }
            b'[' => {
                self.bump();
                let (name, pos) = self.ident()?;
                self.expect(b']')?;
                if name == "U" {
                    if !self.logic.has_u() {
                        return Err(self.unsupported("[U]", pos));
                    }
                    let f = self.parse_formula(store)?;
                    Ok(store.box_u(f))
                } else {
                    let r = self.named_sym(store, name, pos, SymKind::Rel)?;
                    let f = self.parse_formula(store)?;
                    Ok(store.boxm(r, f))
                }
            }
            b'@' => {
                self.bump();
                let (name, pos) = self.ident()?;
                if !self.logic.has_at() {
                    return Err(self.unsupported("@", pos));
                }
                let a = self.named_sym(store, name, pos, SymKind::Nom)?;
                let f = self.parse_formula(store)?;
                Ok(store.at_in(self.logic.base, a, f))
            }
            b'\'' => {
                self.bump();
                let (name, pos) = self.ident()?;
                let a = self.named_sym(store, name, pos, SymKind::Nom)?;
                Ok(store.nom(a))
            }
            _ => {
                let (name, pos) = self.ident()?;
                match name.as_str() {
                    "true" => Ok(store.top()),
                    "false" => Ok(store.bottom()),
                    "atleast" | "atmost" => {
                        if !self.logic.graded {
                            return Err(self.unsupported(&name, pos));
                        }
                        let n = self.nat()?;
                        let (rname, rpos) = self.ident()?;
                        if rname == "U" {
                            return Err(ParseError::ReservedWord {
                                name: rname,
                                pos: rpos,
                            });
                        }
                        let r = self.named_sym(store, rname, rpos, SymKind::Rel)?;
                        let f = self.parse_formula(store)?;
                        Ok(if name == "atleast" {
                            store.at_least(n, r, f)
                        } else {
                            store.at_most(n, r, f)
                        })
                    }
                    "let" => {
                        // Extension used by DAG-mode printing:
                        //   let x = phi in psi
                        let (bind, _) = self.ident()?;
                        self.skip_ws();
                        self.expect(b'=')?;
                        let val = self.parse_formula(store)?;
                        let (kw, kpos) = self.ident()?;
                        if kw != "in" {
                            return Err(ParseError::Syntax {
                                pos: kpos,
                                msg: "expected `in`".to_string(),
                            });
                        }
                        self.env.push((bind, val));
                        let body = self.parse_formula(store)?;
                        self.env.pop();
                        Ok(body)
                    }
                    _ => {
                        if let Some((_, f)) =
                            self.env.iter().rev().find(|(n, _)| n == &name)
                        {
                            return Ok(*f);
                        }
                        let p = self.named_sym(store, name, pos, SymKind::Prop)?;
                        Ok(store.prop(p))
                    }
                }
            }
        }
    }
}
