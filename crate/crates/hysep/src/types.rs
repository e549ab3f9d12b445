//! Hintikka types over a closure: enumeration, signs, coherence and the
//! equivalences used by the elimination procedures.
//!
//! A *type* here is a polarity assignment to the closure members that
//! respects all locally checkable truth conditions: `⊤` is positive,
//! conjunctions agree with their conjuncts, `@a a` and `⟨U⟩a` are positive
//! (they hold in every model), `a ∈ t` forces `@a χ` to agree with `χ`,
//! `χ ∈ t` forces `⟨U⟩χ`, and the grade literals on one relation/body pair
//! must admit a successor count. Genuine satisfiability of a type is *not*
//! resolved here — that is the elimination engines' job — so downstream a
//! "type" always means a Hintikka-consistent candidate.

use crate::error::EngineError;
use crate::syntax::{Closure, FormulaId, FormulaStore, Node, Signature, SymId};
use std::collections::HashMap;

/// A closure member reference with a sign: `neg` means the referenced
/// member occurs under a negation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SignedMember {
    pub idx: usize,
    pub neg: bool,
}

impl SignedMember {
    pub fn eval(&self, bits: u64) -> bool {
        (bits >> self.idx & 1 == 1) ^ self.neg
    }
}

/// Structure of one closure member, with children resolved to signed
/// member references.
#[derive(Debug, Clone, Copy)]
pub enum MemberKind {
    Top,
    Prop(SymId),
    Nom(SymId),
    And(SignedMember, SignedMember),
    Dia(SymId, SignedMember),
    DiaU(SignedMember),
    At(SymId, SignedMember),
    AtLeast(u32, SymId, SignedMember),
    AtMost(u32, SymId, SignedMember),
}

/// Budgets for type enumeration. Free bits beyond the cap or more types
/// than the budget yield an honest error instead of a silent truncation.
#[derive(Debug, Clone, Copy)]
pub struct TypeLimits {
    pub max_free_bits: usize,
    pub max_types: usize,
}

impl Default for TypeLimits {
    fn default() -> Self {
        TypeLimits {
            max_free_bits: 24,
            max_types: 1 << 16,
        }
    }
}

/// All Hintikka types over one closure, in ascending bitset order, plus
/// the member tables the elimination procedures need.
#[derive(Debug, Clone)]
pub struct TypeUniverse {
    pub closure: Closure,
    pub members: Vec<MemberKind>,
    pub types: Vec<u64>,
    /// Member indices carrying `⟨R⟩` nodes, per relation.
    pub dia_by_rel: HashMap<SymId, Vec<usize>>,
    /// Mask of all `⟨U⟩·` member bits (the ≡U-relevant positions).
    pub mask_diau: u64,
    /// Mask of all `@·` member bits (the ≡@-relevant positions).
    pub mask_at: u64,
    /// Member index of each nominal literal.
    pub nom_member: HashMap<SymId, usize>,
    /// Member index of each proposition literal.
    pub prop_member: HashMap<SymId, usize>,
    /// Greatest grade appearing in the closure.
    pub kappa: u32,
}

/// Interval `[lo, hi]` of successor counts; `hi = u64::MAX` means unbounded.
#[derive(Debug, Clone, Copy)]
struct CountInterval {
    lo: u64,
    hi: u64,
}

impl CountInterval {
    fn full() -> Self {
        CountInterval { lo: 0, hi: u64::MAX }
    }

    fn meet(&mut self, lo: u64, hi: u64) {
        self.lo = self.lo.max(lo);
        self.hi = self.hi.min(hi);
    }

    fn nonempty(&self) -> bool {
        self.lo <= self.hi
    }
}

/// Resolve each closure member to its structural kind, children as signed
/// references into the member list. Also reports the greatest grade seen.
/// Unlike full type enumeration this works for closures of any size.
pub fn member_kinds(store: &FormulaStore, closure: &Closure) -> (Vec<MemberKind>, u32) {
    let resolve = |f: FormulaId| -> SignedMember {
        match store.node(f) {
            Node::Not(g) => SignedMember {
                idx: closure.index[&g],
                neg: true,
            },
            _ => SignedMember {
                idx: closure.index[&f],
                neg: false,
            },
        }
    };
    let mut members = Vec::with_capacity(closure.members.len());
    let mut kappa = 0;
    for &m in &closure.members {
        let kind = match store.node(m) {
            Node::Top => MemberKind::Top,
            Node::Prop(p) => MemberKind::Prop(p),
            Node::Nom(a) => MemberKind::Nom(a),
            Node::And(x, y) => MemberKind::And(resolve(x), resolve(y)),
            Node::Dia(r, x) => MemberKind::Dia(r, resolve(x)),
            Node::DiaU(x) => MemberKind::DiaU(resolve(x)),
            Node::At(a, x) => MemberKind::At(a, resolve(x)),
            Node::AtLeast(n, r, x) => {
                kappa = kappa.max(n);
                MemberKind::AtLeast(n, r, resolve(x))
            }
            Node::AtMost(n, r, x) => {
                kappa = kappa.max(n);
                MemberKind::AtMost(n, r, resolve(x))
            }
            Node::Not(_) => unreachable!("closure members are never negations"),
        };
        members.push(kind);
    }
    (members, kappa)
}

impl TypeUniverse {
    /// Enumerate all types over `closure`.
    pub fn build(
        store: &FormulaStore,
        closure: Closure,
        limits: &TypeLimits,
    ) -> Result<TypeUniverse, EngineError> {
        let k = closure.members.len();
        if k > 64 {
            return Err(EngineError::ClosureTooLarge {
                free_bits: k,
                cap: 64,
            });
        }
        let (members, kappa) = member_kinds(store, &closure);

        // Assign members children-before-parents so every local rule can
        // look its children up.
        let order = topo_order(&members);
        let free_bits = order
            .iter()
            .filter(|&&i| {
                matches!(
                    members[i],
                    MemberKind::Prop(_)
                        | MemberKind::Nom(_)
                        | MemberKind::Dia(..)
                        | MemberKind::DiaU(_)
                        | MemberKind::At(..)
                        | MemberKind::AtLeast(..)
                        | MemberKind::AtMost(..)
                )
            })
            .count();
        if free_bits > limits.max_free_bits {
            return Err(EngineError::ClosureTooLarge {
                free_bits,
                cap: limits.max_free_bits,
            });
        }

        let nom_member: HashMap<SymId, usize> = members
            .iter()
            .enumerate()
            .filter_map(|(i, k)| match k {
                MemberKind::Nom(a) => Some((*a, i)),
                _ => None,
            })
            .collect();

        let mut types = Vec::new();
        let mut bits = 0u64;
        enumerate(
            &members,
            &order,
            &nom_member,
            0,
            &mut bits,
            &mut types,
            limits.max_types,
        )?;
        types.sort_unstable();

        let mut dia_by_rel: HashMap<SymId, Vec<usize>> = HashMap::new();
        let mut mask_diau = 0u64;
        let mut mask_at = 0u64;
        let mut prop_member = HashMap::new();
        for (i, kind) in members.iter().enumerate() {
            match kind {
                MemberKind::Dia(r, _) => dia_by_rel.entry(*r).or_default().push(i),
                MemberKind::DiaU(_) => mask_diau |= 1 << i,
                MemberKind::At(..) => mask_at |= 1 << i,
                MemberKind::Prop(p) => {
                    prop_member.insert(*p, i);
                }
                _ => {}
            }
        }

        Ok(TypeUniverse {
            closure,
            members,
            types,
            dia_by_rel,
            mask_diau,
            mask_at,
            nom_member,
            prop_member,
            kappa,
        })
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }

    /// Resolve a formula to its signed member reference, if the formula
    /// (modulo one outer negation) is a closure member.
    pub fn lit(&self, store: &FormulaStore, f: FormulaId) -> Option<SignedMember> {
        if let Some(&idx) = self.closure.index.get(&f) {
            return Some(SignedMember { idx, neg: false });
        }
        if let Node::Not(g) = store.node(f) {
            if let Some(&idx) = self.closure.index.get(&g) {
                return Some(SignedMember { idx, neg: true });
            }
        }
        None
    }

    /// Does the type (given as bits) contain `f` positively?
    pub fn contains(&self, store: &FormulaStore, bits: u64, f: FormulaId) -> Option<bool> {
        self.lit(store, f).map(|sm| sm.eval(bits))
    }

    /// Indices of all types containing `f`.
    pub fn types_containing(&self, store: &FormulaStore, f: FormulaId) -> Vec<usize> {
        match self.lit(store, f) {
            None => Vec::new(),
            Some(sm) => (0..self.types.len())
                .filter(|&i| sm.eval(self.types[i]))
                .collect(),
        }
    }

    /// The conjunction of all signed members of a type: the formula `t`.
    pub fn type_formula(&self, store: &mut FormulaStore, bits: u64) -> FormulaId {
        let mut conjuncts = Vec::with_capacity(self.members.len());
        for (i, &m) in self.closure.members.iter().enumerate() {
            if bits >> i & 1 == 1 {
                conjuncts.push(m);
            } else {
                conjuncts.push(store.not(m));
            }
        }
        store.big_and(&conjuncts)
    }

    /// σ-inconsistency witness: a σ-atom (proposition or nominal) on which
    /// the two types disagree, together with the side containing it
    /// positively (1 or 2).
    pub fn sigma_clash(&self, sigma: &Signature, b1: u64, b2: u64) -> Option<(SymId, u8)> {
        for (&p, &i) in &self.prop_member {
            if sigma.props.contains(&p) {
                let in1 = b1 >> i & 1 == 1;
                let in2 = b2 >> i & 1 == 1;
                if in1 != in2 {
                    return Some((p, if in1 { 1 } else { 2 }));
                }
            }
        }
        for (&a, &i) in &self.nom_member {
            if sigma.noms.contains(&a) {
                let in1 = b1 >> i & 1 == 1;
                let in2 = b2 >> i & 1 == 1;
                if in1 != in2 {
                    return Some((a, if in1 { 1 } else { 2 }));
                }
            }
        }
        None
    }

    /// Plain R-coherence `t ⤳_R t'`: every `⟨R⟩χ` member whose body holds
    /// in `to` must be positive in `from`.
    pub fn r_coherent(&self, from: u64, to: u64, rel: SymId) -> bool {
        match self.dia_by_rel.get(&rel) {
            None => true,
            Some(idxs) => idxs.iter().all(|&i| {
                let MemberKind::Dia(_, body) = self.members[i] else {
                    unreachable!()
                };
                !body.eval(to) || (from >> i & 1 == 1)
            }),
        }
    }

    /// `t ≡_U t'`: agreement on every `⟨U⟩·` member.
    pub fn equiv_u(&self, b1: u64, b2: u64) -> bool {
        b1 & self.mask_diau == b2 & self.mask_diau
    }

    /// `t ≡_@ t'`: agreement on every `@·` member.
    pub fn equiv_at(&self, b1: u64, b2: u64) -> bool {
        b1 & self.mask_at == b2 & self.mask_at
    }

    /// The grade literals of a type concerning relation `rel`, as
    /// `(body, lo, hi)` count requirements grouped by body: positive
    /// `⟨≥n⟩χ` means at least n `χ`-successors, negative means fewer, and
    /// dually for `⟨≤n⟩`; `⟨R⟩χ` counts as grade 1. Bodies are signed
    /// member references.
    pub fn grade_requirements(&self, bits: u64, rel: SymId) -> Vec<(SignedMember, u64, u64)> {
        let mut map: HashMap<(usize, bool), CountInterval> = HashMap::new();
        for (i, kind) in self.members.iter().enumerate() {
            let pos = bits >> i & 1 == 1;
            match *kind {
                MemberKind::Dia(r, body) if r == rel => {
                    let iv = map.entry((body.idx, body.neg)).or_insert_with(CountInterval::full);
                    if pos {
                        iv.meet(1, u64::MAX);
                    } else {
                        iv.meet(0, 0);
                    }
                }
                MemberKind::AtLeast(n, r, body) if r == rel => {
                    let iv = map.entry((body.idx, body.neg)).or_insert_with(CountInterval::full);
                    if pos {
                        iv.meet(n as u64, u64::MAX);
                    } else {
                        iv.meet(0, (n as u64).saturating_sub(1));
                    }
                }
                MemberKind::AtMost(n, r, body) if r == rel => {
                    let iv = map.entry((body.idx, body.neg)).or_insert_with(CountInterval::full);
                    if pos {
                        iv.meet(0, n as u64);
                    } else {
                        iv.meet(n as u64 + 1, u64::MAX);
                    }
                }
                _ => {}
            }
        }
        let mut out: Vec<(SignedMember, u64, u64)> = map
            .into_iter()
            .map(|((idx, neg), iv)| (SignedMember { idx, neg }, iv.lo, iv.hi))
            .collect();
        out.sort_by_key(|(sm, _, _)| (sm.idx, sm.neg));
        out
    }

    /// All relations mentioned by modal members of the closure.
    pub fn relations(&self) -> Vec<SymId> {
        let mut rels: Vec<SymId> = Vec::new();
        for kind in &self.members {
            let r = match kind {
                MemberKind::Dia(r, _) | MemberKind::AtLeast(_, r, _) | MemberKind::AtMost(_, r, _) => *r,
                _ => continue,
            };
            if !rels.contains(&r) {
                rels.push(r);
            }
        }
        rels.sort_unstable();
        rels
    }

    /// Does the type mention any nominal positively?
    pub fn has_nominal(&self, bits: u64) -> bool {
        self.nom_member.values().any(|&i| bits >> i & 1 == 1)
    }

    /// The nominals positive in the type.
    pub fn nominals_in(&self, bits: u64) -> Vec<SymId> {
        let mut out: Vec<SymId> = self
            .nom_member
            .iter()
            .filter(|&(_, &i)| bits >> i & 1 == 1)
            .map(|(&a, _)| a)
            .collect();
        out.sort_unstable();
        out
    }
}

/// Children-before-parents processing order. Closure members form a DAG
/// through signed references; plain index order is *not* suitable because
/// members are sorted by printed form.
pub(crate) fn topo_order(members: &[MemberKind]) -> Vec<usize> {
    fn visit(i: usize, members: &[MemberKind], seen: &mut [bool], out: &mut Vec<usize>) {
        if seen[i] {
            return;
        }
        seen[i] = true;
        match members[i] {
            MemberKind::Top | MemberKind::Prop(_) | MemberKind::Nom(_) => {}
            MemberKind::And(x, y) => {
                visit(x.idx, members, seen, out);
                visit(y.idx, members, seen, out);
            }
            MemberKind::Dia(_, x)
            | MemberKind::DiaU(x)
            | MemberKind::At(_, x)
            | MemberKind::AtLeast(_, _, x)
            | MemberKind::AtMost(_, _, x) => visit(x.idx, members, seen, out),
        }
        out.push(i);
    }
    let mut seen = vec![false; members.len()];
    let mut out = Vec::with_capacity(members.len());
    for i in 0..members.len() {
        visit(i, members, &mut seen, &mut out);
    }
    out
}

/// DFS over the processing order, branching only on genuinely free bits
/// and propagating every forced value.
fn enumerate(
    members: &[MemberKind],
    order: &[usize],
    nom_member: &HashMap<SymId, usize>,
    pos: usize,
    bits: &mut u64,
    out: &mut Vec<u64>,
    max_types: usize,
) -> Result<(), EngineError> {
    if pos == order.len() {
        if grades_feasible(members, *bits) {
            if out.len() >= max_types {
                return Err(EngineError::BudgetExceeded {
                    place: "type enumeration",
                    detail: format!("more than {max_types} types"),
                });
            }
            out.push(*bits);
        }
        return Ok(());
    }
    let i = order[pos];
    let candidates: &[bool] = match members[i] {
        MemberKind::Top => &[true],
        MemberKind::And(x, y) => {
            if x.eval(*bits) && y.eval(*bits) {
                &[true]
            } else {
                &[false]
            }
        }
        MemberKind::Prop(_) | MemberKind::Nom(_) | MemberKind::Dia(..) => &[false, true],
        MemberKind::DiaU(body) => {
            let names_nominal = !body.neg && matches!(members[body.idx], MemberKind::Nom(_));
            if names_nominal || body.eval(*bits) {
                // ⟨U⟩a holds in every model; ⟨U⟩χ is self-witnessed by χ.
                &[true]
            } else {
                &[false, true]
            }
        }
        MemberKind::At(a, body) => {
            let is_self = !body.neg
                && matches!(members[body.idx], MemberKind::Nom(b) if b == a);
            if is_self {
                // @a a holds in every model.
                &[true]
            } else if nom_member.get(&a).is_some_and(|&ni| *bits >> ni & 1 == 1) {
                // At the a-world itself, @a χ and χ agree.
                if body.eval(*bits) {
                    &[true]
                } else {
                    &[false]
                }
            } else {
                &[false, true]
            }
        }
        MemberKind::AtLeast(0, _, _) => &[true],
        MemberKind::AtLeast(..) | MemberKind::AtMost(..) => &[false, true],
    };
    for &b in candidates {
        if b {
            *bits |= 1 << i;
        } else {
            *bits &= !(1 << i);
        }
        enumerate(members, order, nom_member, pos + 1, bits, out, max_types)?;
    }
    *bits &= !(1 << i);
    Ok(())
}

/// Per relation and body, the grade literals must admit some successor
/// count.
fn grades_feasible(members: &[MemberKind], bits: u64) -> bool {
    let mut map: HashMap<(SymId, usize, bool), CountInterval> = HashMap::new();
    for (i, kind) in members.iter().enumerate() {
        let pos = bits >> i & 1 == 1;
        let (rel, body, lo, hi) = match *kind {
            MemberKind::Dia(r, b) => {
                if pos {
                    (r, b, 1, u64::MAX)
                } else {
                    (r, b, 0, 0)
                }
            }
            MemberKind::AtLeast(n, r, b) => {
                if pos {
                    (r, b, n as u64, u64::MAX)
                } else {
                    (r, b, 0, (n as u64).saturating_sub(1))
                }
            }
            MemberKind::AtMost(n, r, b) => {
                if pos {
                    (r, b, 0, n as u64)
                } else {
                    (r, b, n as u64 + 1, u64::MAX)
                }
            }
            _ => continue,
        };
        map.entry((rel, body.idx, body.neg))
            .or_insert_with(CountInterval::full)
            .meet(lo, hi);
    }
    map.values().all(CountInterval::nonempty)
}
