//! Separators for inputs whose nominals are all shared.
//!
//! When every nominal of the two inputs lies in the shared signature σ,
//! separator existence reduces to a finite elimination over *singleton
//! mosaics*: pairs `(m1, m2)` of Hintikka types, one per side. The
//! procedure runs once per *basic nominal case* — an assignment of a type
//! to every nominal on each side, pinning where the named worlds sit — and
//! starts from all pairs minus those with an unsatisfiable side
//! (`τ_{m_i} ∧ case(c_i)`) or a clash on a shared atom. Rounds then drop
//! every pair with a modal obligation no surviving pair witnesses, until a
//! fixpoint; the input type pair is jointly realizable over σ iff it
//! survives in some case.
//!
//! Which obligations bind, and what counts as a witness, depends on the
//! base language:
//!
//! * nominals only: diamonds over shared relations, witnessed through
//!   relational coherence on both sides;
//! * with `@`: additionally every `@a χ` member, and coherence is refined
//!   by agreement on all `@`-prefixed members;
//! * with `U`: *every* diamond binds, including `⟨U⟩` and diamonds over
//!   non-shared relations, and coherence is refined by agreement on all
//!   `⟨U⟩`-prefixed members. Non-shared relations separate through `⟨U⟩`,
//!   which is always expressible.
//!
//! Every eliminated pair records why it died, and the separating formula is
//! read off that trace lazily: refuted sides become constants, atom clashes
//! become literals, and an unwitnessed obligation becomes a modality over
//! the disjunction (side 1) or conjunction (side 2) of the recursively
//! separated witness frontier. The two junction shapes are each other's
//! duals under swapping sides and negating, which is also why one trace
//! serves both sides.
//!
//! [`fo_separator`] extends the construction to inputs with private
//! nominals: it renames them apart, widens σ by them, and prints the
//! standard translation of the resulting separator with the first side's
//! private nominals quantified existentially and the second side's
//! universally.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;

use crate::error::EngineError;
use crate::sat::{entails_with, internal_logic, satisfiable_with, SatLimits, SatMode};
use crate::simplify::{and_all, or_all};
use crate::syntax::{Base, FormulaId, FormulaStore, LogicId, Node, Signature, SymId, SymKind};
use crate::types::{MemberKind, TypeUniverse};

/// Budgets for the shared-nominal procedure.
#[derive(Debug, Clone, Default)]
pub struct WarmupLimits {
    /// Budgets handed to the satisfiability engine for the side checks.
    pub sat: SatLimits,
    /// Cap on case pairs; the elimination runs once per pair.
    pub max_case_pairs: usize,
    /// Cap on the mosaic grid (|types|²) of a single run.
    pub max_mosaics: usize,
    /// Defensive cap on elimination rounds; the grid size bounds the real
    /// number.
    pub max_rounds: u32,
}

impl WarmupLimits {
    fn effective(&self) -> WarmupLimits {
        WarmupLimits {
            sat: self.sat,
            max_case_pairs: if self.max_case_pairs == 0 { 2048 } else { self.max_case_pairs },
            max_mosaics: if self.max_mosaics == 0 { 1 << 16 } else { self.max_mosaics },
            max_rounds: if self.max_rounds == 0 { 4096 } else { self.max_rounds },
        }
    }
}

/// One side of a basic nominal case: the index of the chosen type per
/// closure nominal, aligned with `closure.nom0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaseSide(pub Vec<usize>);

/// Why a mosaic left the surviving set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Drop {
    /// `τ_{m_i} ∧ case(c_i)` is unsatisfiable for the recorded side.
    Unsat(u8),
    /// The two types disagree on a shared atom; the flag records whether
    /// the first side holds it positively.
    Clash { sym: SymId, pos_in_first: bool },
    /// The recorded closure member of the recorded side had no witness
    /// among the survivors of the previous round.
    Obligation { round: u32, side: u8, member: usize },
}

/// Outcome of one elimination run: the full drop table for one case pair.
#[derive(Debug, Clone)]
pub struct SingletonElimination {
    pub c1: CaseSide,
    pub c2: CaseSide,
    /// Row-major `n × n` over type indices; `None` means the pair survived.
    drops: Vec<Option<Drop>>,
    n: usize,
    /// Rounds until the fixpoint; 0 when the base set was already final.
    pub rounds: u32,
}

impl SingletonElimination {
    pub fn drop_reason(&self, m1: usize, m2: usize) -> Option<Drop> {
        self.drops[m1 * self.n + m2]
    }

    pub fn survives(&self, m1: usize, m2: usize) -> bool {
        self.drop_reason(m1, m2).is_none()
    }

    /// All surviving pairs, row-major.
    pub fn survivors(&self) -> Vec<(usize, usize)> {
        (0..self.n * self.n)
            .filter(|&k| self.drops[k].is_none())
            .map(|k| (k / self.n, k % self.n))
            .collect()
    }
}

/// `⋀_a @a τ_{c(a)}` — where each nominal sits, in the base language's own
/// `@` rendering. `⊤` when the closure has no nominals.
pub fn case_formula(store: &mut FormulaStore, uni: &TypeUniverse, side: &CaseSide) -> FormulaId {
    let base = uni.closure.logic.base;
    let noms = uni.closure.nom0.clone();
    let mut conjuncts = Vec::with_capacity(noms.len());
    for (k, &a) in noms.iter().enumerate() {
        let tf = uni.type_formula(store, uni.types[side.0[k]]);
        conjuncts.push(store.at_in(base, a, tf));
    }
    store.big_and(&conjuncts)
}

/// All assignments of types to nominals that are not trivially impossible:
/// the type of `a` must contain `a`, and when it also contains `b` the two
/// nominals must receive the same type (they name the same world, since a
/// type holding a nominal positively fits at most one world). Skipped
/// assignments have an unsatisfiable description, so the surviving runs
/// absorb their share of the work.
pub fn enumerate_case_sides(uni: &TypeUniverse) -> Vec<CaseSide> {
    let noms = &uni.closure.nom0;
    if noms.is_empty() {
        return vec![CaseSide(Vec::new())];
    }
    let bits: Vec<usize> = noms.iter().map(|a| uni.nom_member[a]).collect();
    let hosts: Vec<Vec<usize>> = bits
        .iter()
        .map(|&b| {
            (0..uni.types.len())
                .filter(|&t| uni.types[t] >> b & 1 == 1)
                .collect()
        })
        .collect();

    fn fill(
        uni: &TypeUniverse,
        bits: &[usize],
        hosts: &[Vec<usize>],
        chosen: &mut Vec<usize>,
        out: &mut Vec<CaseSide>,
    ) {
        let k = chosen.len();
        if k == bits.len() {
            out.push(CaseSide(chosen.clone()));
            return;
        }
        'cand: for &t in &hosts[k] {
            let tb = uni.types[t];
            for (j, &u) in chosen.iter().enumerate() {
                let ub = uni.types[u];
                let entangled = tb >> bits[j] & 1 == 1 || ub >> bits[k] & 1 == 1;
                if entangled && t != u {
                    continue 'cand;
                }
            }
            chosen.push(t);
            fill(uni, bits, hosts, chosen, out);
            chosen.pop();
        }
    }

    let mut out = Vec::new();
    fill(uni, &bits, &hosts, &mut Vec::with_capacity(noms.len()), &mut out);
    out
}

/// For each type `t`: is `τ_t ∧ case(side)` satisfiable? One engine call
/// per type; callers reuse the column across every run sharing the side.
pub fn side_satisfiability(
    store: &mut FormulaStore,
    uni: &TypeUniverse,
    side: &CaseSide,
    limits: &WarmupLimits,
) -> Result<Vec<bool>, EngineError> {
    let limits = limits.effective();
    let case = case_formula(store, uni, side);
    let logic = uni.closure.logic;
    let mut out = Vec::with_capacity(uni.types.len());
    for idx in 0..uni.types.len() {
        let tf = uni.type_formula(store, uni.types[idx]);
        let f = store.and(tf, case);
        out.push(satisfiable_with(store, f, logic, SatMode::Auto, &limits.sat)?);
    }
    Ok(out)
}

/// One elimination run for the case pair `(c1, c2)`, computing its own
/// satisfiability columns. Use [`eliminate_singleton_with`] to share
/// columns across runs.
pub fn eliminate_singleton(
    store: &mut FormulaStore,
    uni: &TypeUniverse,
    sigma: &Signature,
    c1: &CaseSide,
    c2: &CaseSide,
    limits: &WarmupLimits,
) -> Result<SingletonElimination, EngineError> {
    check_nominals_shared(store, uni, sigma, "eliminate_singleton")?;
    let sat1 = side_satisfiability(store, uni, c1, limits)?;
    let sat2 = side_satisfiability(store, uni, c2, limits)?;
    eliminate_singleton_with(uni, sigma, c1.clone(), c2.clone(), &sat1, &sat2, limits)
}

/// The elimination proper, over precomputed per-side satisfiability
/// columns. Rounds drop pairs simultaneously: a witness must survive the
/// *previous* round, never merely the scan order.
pub fn eliminate_singleton_with(
    uni: &TypeUniverse,
    sigma: &Signature,
    c1: CaseSide,
    c2: CaseSide,
    sat1: &[bool],
    sat2: &[bool],
    limits: &WarmupLimits,
) -> Result<SingletonElimination, EngineError> {
    let limits = limits.effective();
    let n = uni.types.len();
    if n.saturating_mul(n) > limits.max_mosaics {
        return Err(EngineError::BudgetExceeded {
            place: "eliminate_singleton",
            detail: format!("{n}×{n} mosaics exceed the cap {}", limits.max_mosaics),
        });
    }
    if sat1.len() != n || sat2.len() != n {
        return Err(EngineError::PreconditionViolated {
            place: "eliminate_singleton",
            detail: "satisfiability columns must cover every type of the universe".into(),
        });
    }
    let base = uni.closure.logic.base;

    let mut drops: Vec<Option<Drop>> = Vec::with_capacity(n * n);
    for (i, &ok1) in sat1.iter().enumerate() {
        for (j, &ok2) in sat2.iter().enumerate() {
            let d = if !ok1 {
                Some(Drop::Unsat(1))
            } else if !ok2 {
                Some(Drop::Unsat(2))
            } else {
                uni.sigma_clash(sigma, uni.types[i], uni.types[j])
                    .map(|(sym, side)| Drop::Clash { sym, pos_in_first: side == 1 })
            };
            drops.push(d);
        }
    }

    let needs: Vec<Vec<usize>> = uni
        .types
        .iter()
        .map(|&b| obligations(uni, sigma, base, b))
        .collect();
    let mut alive: Vec<(usize, usize)> = (0..n * n)
        .filter(|&k| drops[k].is_none())
        .map(|k| (k / n, k % n))
        .collect();

    let mut rounds = 0u32;
    loop {
        if rounds >= limits.max_rounds {
            return Err(EngineError::BudgetExceeded {
                place: "eliminate_singleton",
                detail: format!("fixpoint not reached within {} rounds", limits.max_rounds),
            });
        }
        let round = rounds + 1;
        let mut killed: Vec<(usize, usize, u8, usize)> = Vec::new();
        for &(i, j) in &alive {
            let m = (uni.types[i], uni.types[j]);
            let mut blame: Option<(u8, usize)> = None;
            'sides: for (side, t) in [(1u8, i), (2u8, j)] {
                for &member in &needs[t] {
                    let witnessed = alive.iter().any(|&(x, y)| {
                        is_witness(uni, sigma, base, m, side, member, (uni.types[x], uni.types[y]))
                    });
                    if !witnessed {
                        blame = Some((side, member));
                        break 'sides;
                    }
                }
            }
            if let Some((side, member)) = blame {
                killed.push((i, j, side, member));
            }
        }
        if killed.is_empty() {
            break;
        }
        for &(i, j, side, member) in &killed {
            drops[i * n + j] = Some(Drop::Obligation { round, side, member });
        }
        alive.retain(|&(i, j)| drops[i * n + j].is_none());
        rounds = round;
    }

    Ok(SingletonElimination { c1, c2, drops, n, rounds })
}

/// Member indices of `bits` that demand a witness under the given base.
fn obligations(uni: &TypeUniverse, sigma: &Signature, base: Base, bits: u64) -> Vec<usize> {
    let mut out = Vec::new();
    for (idx, kind) in uni.members.iter().enumerate() {
        if bits >> idx & 1 == 0 {
            continue;
        }
        let binds = match *kind {
            MemberKind::Dia(r, _) => match base {
                Base::H | Base::HAt => sigma.rels.contains(&r),
                Base::HAtU => true,
            },
            MemberKind::DiaU(_) => base == Base::HAtU,
            MemberKind::At(_, _) => base == Base::HAt,
            _ => false,
        };
        if binds {
            out.push(idx);
        }
    }
    out
}

/// Can `w` witness the obligation `member` of side `side` of `m`?
fn is_witness(
    uni: &TypeUniverse,
    sigma: &Signature,
    base: Base,
    m: (u64, u64),
    side: u8,
    member: usize,
    w: (u64, u64),
) -> bool {
    let (mi, wi) = if side == 1 { (m.0, w.0) } else { (m.1, w.1) };
    match uni.members[member] {
        MemberKind::Dia(r, body) => {
            if !body.eval(wi) {
                return false;
            }
            match base {
                Base::H => uni.r_coherent(m.0, w.0, r) && uni.r_coherent(m.1, w.1, r),
                Base::HAt => {
                    uni.equiv_at(m.0, w.0)
                        && uni.equiv_at(m.1, w.1)
                        && uni.r_coherent(m.0, w.0, r)
                        && uni.r_coherent(m.1, w.1, r)
                }
                Base::HAtU => {
                    let global = uni.equiv_u(m.0, w.0) && uni.equiv_u(m.1, w.1);
                    if sigma.rels.contains(&r) {
                        global
                            && uni.r_coherent(m.0, w.0, r)
                            && uni.r_coherent(m.1, w.1, r)
                    } else {
                        // private relation: only the obligated side steps,
                        // the other side merely keeps the global profile
                        global && uni.r_coherent(mi, wi, r)
                    }
                }
            }
        }
        MemberKind::DiaU(body) => {
            body.eval(wi) && uni.equiv_u(m.0, w.0) && uni.equiv_u(m.1, w.1)
        }
        MemberKind::At(a, body) => {
            let abit = uni.nom_member[&a];
            wi >> abit & 1 == 1
                && body.eval(wi)
                && uni.equiv_at(m.0, w.0)
                && uni.equiv_at(m.1, w.1)
        }
        _ => false,
    }
}

/// The modality a separating formula is wrapped in.
enum Shape {
    Rel(SymId),
    Univ,
    AtNom(SymId),
}

/// The candidate-witness frontier of an unwitnessed obligation, as the two
/// per-side type sets `(W1, W2)` whose pairs were all eliminated earlier.
fn witness_frontier(
    uni: &TypeUniverse,
    sigma: &Signature,
    base: Base,
    m: (u64, u64),
    side: u8,
    member: usize,
) -> (Shape, Vec<usize>, Vec<usize>) {
    let n = uni.types.len();
    let (act, pas) = if side == 1 { (m.0, m.1) } else { (m.1, m.0) };
    let (shape, active, passive): (Shape, Vec<usize>, Vec<usize>) = match uni.members[member] {
        MemberKind::Dia(r, body) => {
            let via_u = base == Base::HAtU && !sigma.rels.contains(&r);
            let step = |from: u64, to: u64| match base {
                Base::H => uni.r_coherent(from, to, r),
                Base::HAt => uni.equiv_at(from, to) && uni.r_coherent(from, to, r),
                Base::HAtU => uni.equiv_u(from, to) && uni.r_coherent(from, to, r),
            };
            let active = (0..n)
                .filter(|&t| body.eval(uni.types[t]) && step(act, uni.types[t]))
                .collect();
            let passive = if via_u {
                (0..n).filter(|&t| uni.equiv_u(pas, uni.types[t])).collect()
            } else {
                (0..n).filter(|&t| step(pas, uni.types[t])).collect()
            };
            let shape = if via_u { Shape::Univ } else { Shape::Rel(r) };
            (shape, active, passive)
        }
        MemberKind::DiaU(body) => {
            let active = (0..n)
                .filter(|&t| body.eval(uni.types[t]) && uni.equiv_u(act, uni.types[t]))
                .collect();
            let passive = (0..n).filter(|&t| uni.equiv_u(pas, uni.types[t])).collect();
            (Shape::Univ, active, passive)
        }
        MemberKind::At(a, body) => {
            let abit = uni.nom_member[&a];
            let active = (0..n)
                .filter(|&t| {
                    let b = uni.types[t];
                    b >> abit & 1 == 1 && body.eval(b) && uni.equiv_at(act, b)
                })
                .collect();
            let passive = (0..n).filter(|&t| uni.equiv_at(pas, uni.types[t])).collect();
            (Shape::AtNom(a), active, passive)
        }
        _ => unreachable!("only modal members incur obligations"),
    };
    if side == 1 {
        (shape, active, passive)
    } else {
        (shape, passive, active)
    }
}

fn wrap_diamond(store: &mut FormulaStore, shape: &Shape, inner: FormulaId) -> FormulaId {
    let bottom = store.bottom();
    if inner == bottom {
        // ⟨·⟩⊥ and @·⊥ are unsatisfiable themselves
        return bottom;
    }
    match *shape {
        Shape::Rel(r) => store.dia(r, inner),
        Shape::Univ => store.dia_u(inner),
        Shape::AtNom(a) => store.at(a, inner),
    }
}

fn wrap_box(store: &mut FormulaStore, shape: &Shape, inner: FormulaId) -> FormulaId {
    let top = store.top();
    if inner == top {
        // [·]⊤ and @·⊤ are valid themselves
        return top;
    }
    match *shape {
        Shape::Rel(r) => store.boxm(r, inner),
        Shape::Univ => store.box_u(inner),
        Shape::AtNom(a) => {
            let bottom = store.bottom();
            if inner == bottom {
                bottom
            } else {
                store.at(a, inner)
            }
        }
    }
}

/// The separating formula of an eliminated pair, read off the trace.
/// Satisfies `τ_{m1} ∧ case(c1) ⊨ sep` and `τ_{m2} ∧ case(c2) ⊨ ¬sep`, and
/// mentions only σ-symbols. Errors if the pair survived.
pub fn sep_case(
    store: &mut FormulaStore,
    uni: &TypeUniverse,
    sigma: &Signature,
    elim: &SingletonElimination,
    m1: usize,
    m2: usize,
    memo: &mut HashMap<(usize, usize), FormulaId>,
) -> Result<FormulaId, EngineError> {
    if let Some(&f) = memo.get(&(m1, m2)) {
        return Ok(f);
    }
    let Some(reason) = elim.drop_reason(m1, m2) else {
        return Err(EngineError::PreconditionViolated {
            place: "sep_case",
            detail: format!("pair ({m1},{m2}) survives elimination in this case"),
        });
    };
    let out = match reason {
        Drop::Unsat(1) => store.bottom(),
        Drop::Unsat(_) => store.top(),
        Drop::Clash { sym, pos_in_first } => {
            let lit = match store.sym_kind(sym) {
                SymKind::Prop => store.prop(sym),
                SymKind::Nom => store.nom(sym),
                SymKind::Rel => unreachable!("relations are not atoms"),
            };
            if pos_in_first {
                lit
            } else {
                store.not(lit)
            }
        }
        Drop::Obligation { round, side, member } => {
            let base = uni.closure.logic.base;
            let m = (uni.types[m1], uni.types[m2]);
            let (shape, w1, w2) = witness_frontier(uni, sigma, base, m, side, member);
            // every frontier pair would have witnessed the obligation, so
            // all of them died in strictly earlier rounds; anything else is
            // an internal bug, caught here rather than by looping forever
            for &t in &w1 {
                for &t2 in &w2 {
                    match elim.drop_reason(t, t2) {
                        Some(Drop::Obligation { round: r, .. }) if r >= round => {
                            return Err(EngineError::VerificationFailed {
                                place: "sep_case",
                                detail: format!(
                                    "frontier pair ({t},{t2}) died in round {r}, not before round {round}"
                                ),
                            });
                        }
                        None => {
                            return Err(EngineError::VerificationFailed {
                                place: "sep_case",
                                detail: format!("frontier pair ({t},{t2}) never died"),
                            });
                        }
                        _ => {}
                    }
                }
            }
            let inner = if side == 1 {
                let mut disjuncts = Vec::with_capacity(w1.len());
                for &t in &w1 {
                    let mut conjuncts = Vec::with_capacity(w2.len());
                    for &t2 in &w2 {
                        conjuncts.push(sep_case(store, uni, sigma, elim, t, t2, memo)?);
                    }
                    let c = and_all(store, &conjuncts);
                    disjuncts.push(c);
                }
                or_all(store, &disjuncts)
            } else {
                let mut conjuncts = Vec::with_capacity(w2.len());
                for &t2 in &w2 {
                    let mut disjuncts = Vec::with_capacity(w1.len());
                    for &t in &w1 {
                        disjuncts.push(sep_case(store, uni, sigma, elim, t, t2, memo)?);
                    }
                    let d = or_all(store, &disjuncts);
                    conjuncts.push(d);
                }
                and_all(store, &conjuncts)
            };
            if side == 1 {
                wrap_diamond(store, &shape, inner)
            } else {
                wrap_box(store, &shape, inner)
            }
        }
    };
    memo.insert((m1, m2), out);
    Ok(out)
}

/// A surviving input pair: evidence of joint realizability over σ.
#[derive(Debug, Clone, Copy)]
pub struct Survivor {
    pub case1: usize,
    pub case2: usize,
    pub m1: usize,
    pub m2: usize,
}

/// Everything one run of the shared-nominal procedure produced.
#[derive(Debug)]
pub struct SharedNominalSeparation {
    /// The logic actually run (the declared one, widened by the operators
    /// occurring in the inputs).
    pub logic: LogicId,
    pub universe: TypeUniverse,
    pub sides: Vec<CaseSide>,
    /// Row-major over `sides × sides`.
    pub runs: Vec<SingletonElimination>,
    /// Type indices containing the first / second input.
    pub s1: Vec<usize>,
    pub s2: Vec<usize>,
    pub separator: Option<FormulaId>,
    /// Set exactly when `separator` is `None`.
    pub survivor: Option<Survivor>,
}

impl SharedNominalSeparation {
    pub fn run(&self, case1: usize, case2: usize) -> &SingletonElimination {
        &self.runs[case1 * self.sides.len() + case2]
    }
}

/// Decide separator existence for `(f1, f2)` over σ and construct one when
/// it exists: the disjunction over first-input types of the conjunction
/// over second-input types of the per-pair separators, which are in turn
/// assembled across all case pairs. The output mentions only σ-symbols;
/// for the base language without `@`/`U` it is checked to stay free of
/// both.
pub fn separator_shared_nominals(
    store: &mut FormulaStore,
    f1: FormulaId,
    f2: FormulaId,
    sigma: &Signature,
    logic: LogicId,
    limits: &WarmupLimits,
) -> Result<SharedNominalSeparation, EngineError> {
    let limits = limits.effective();
    let conj = store.and(f1, f2);
    let ilogic = internal_logic(store, conj, logic);
    if ilogic.graded {
        return Err(EngineError::PreconditionViolated {
            place: "separator_shared_nominals",
            detail: "counting modalities are outside the shared-nominal construction".into(),
        });
    }
    let closure = store.closure(f1, f2, ilogic);
    let uni = TypeUniverse::build(store, closure, &limits.sat.types)?;
    check_nominals_shared(store, &uni, sigma, "separator_shared_nominals")?;

    let sides = enumerate_case_sides(&uni);
    let pairs = sides.len().saturating_mul(sides.len());
    if pairs > limits.max_case_pairs {
        return Err(EngineError::BudgetExceeded {
            place: "separator_shared_nominals",
            detail: format!("{pairs} case pairs exceed the cap {}", limits.max_case_pairs),
        });
    }

    let mut columns: Vec<Vec<bool>> = Vec::with_capacity(sides.len());
    for side in &sides {
        columns.push(side_satisfiability(store, &uni, side, &limits)?);
    }
    let mut runs = Vec::with_capacity(pairs);
    for (i, c1) in sides.iter().enumerate() {
        for (j, c2) in sides.iter().enumerate() {
            runs.push(eliminate_singleton_with(
                &uni,
                sigma,
                c1.clone(),
                c2.clone(),
                &columns[i],
                &columns[j],
                &limits,
            )?);
        }
    }

    let s1 = uni.types_containing(store, f1);
    let s2 = uni.types_containing(store, f2);

    let mut survivor = None;
    'scan: for ci in 0..sides.len() {
        for cj in 0..sides.len() {
            let run = &runs[ci * sides.len() + cj];
            for &t1 in &s1 {
                for &t2 in &s2 {
                    if run.survives(t1, t2) {
                        survivor = Some(Survivor { case1: ci, case2: cj, m1: t1, m2: t2 });
                        break 'scan;
                    }
                }
            }
        }
    }

    let separator = if survivor.is_some() {
        None
    } else {
        let mut memos: Vec<HashMap<(usize, usize), FormulaId>> = vec![HashMap::new(); runs.len()];
        let mut input_disjuncts = Vec::with_capacity(s1.len());
        for &t1 in &s1 {
            let mut input_conjuncts = Vec::with_capacity(s2.len());
            for &t2 in &s2 {
                let mut case_disjuncts = Vec::with_capacity(sides.len());
                for ci in 0..sides.len() {
                    let mut case_conjuncts = Vec::with_capacity(sides.len());
                    for cj in 0..sides.len() {
                        let k = ci * sides.len() + cj;
                        let f = sep_case(store, &uni, sigma, &runs[k], t1, t2, &mut memos[k])?;
                        case_conjuncts.push(f);
                    }
                    let c = and_all(store, &case_conjuncts);
                    case_disjuncts.push(c);
                }
                let pair_sep = or_all(store, &case_disjuncts);
                input_conjuncts.push(pair_sep);
            }
            let c = and_all(store, &input_conjuncts);
            input_disjuncts.push(c);
        }
        let sep = or_all(store, &input_disjuncts);

        let sig = store.signature_of(sep);
        if !sig.is_subset(sigma) {
            return Err(EngineError::VerificationFailed {
                place: "separator_shared_nominals",
                detail: "separator mentions symbols outside the shared signature".into(),
            });
        }
        if ilogic.base == Base::H && uses_at_or_u(store, sep) {
            return Err(EngineError::VerificationFailed {
                place: "separator_shared_nominals",
                detail: "separator for the plain nominal language uses `@` or `U`".into(),
            });
        }
        Some(sep)
    };

    Ok(SharedNominalSeparation {
        logic: ilogic,
        universe: uni,
        sides,
        runs,
        s1,
        s2,
        separator,
        survivor,
    })
}

fn check_nominals_shared(
    store: &FormulaStore,
    uni: &TypeUniverse,
    sigma: &Signature,
    place: &'static str,
) -> Result<(), EngineError> {
    for &a in &uni.closure.nom0 {
        if !sigma.noms.contains(&a) {
            return Err(EngineError::PreconditionViolated {
                place,
                detail: format!(
                    "nominal `{}` of the inputs does not lie in the shared signature",
                    store.sym_name(a)
                ),
            });
        }
    }
    Ok(())
}

fn uses_at_or_u(store: &FormulaStore, f: FormulaId) -> bool {
    let mut seen: HashSet<FormulaId> = HashSet::new();
    let mut stack = vec![f];
    while let Some(g) = stack.pop() {
        if !seen.insert(g) {
            continue;
        }
        match store.node(g) {
            Node::At(_, _) | Node::DiaU(_) => return true,
            Node::Not(x) | Node::Dia(_, x) | Node::AtLeast(_, _, x) | Node::AtMost(_, _, x) => {
                stack.push(x)
            }
            Node::And(x, y) => {
                stack.push(x);
                stack.push(y);
            }
            Node::Top | Node::Prop(_) | Node::Nom(_) => {}
        }
    }
    false
}

/// First-order separator export. Inputs may use private (non-σ) nominals:
/// a first-order separator over σ exists iff `f1 ∧ f2` is unsatisfiable
/// once private nominals shared by both sides are renamed apart (a
/// σ-separator cannot see them, so the renaming is harmless). On success,
/// the construction runs over σ widened by the private nominals, the
/// resulting formula is verified against both inputs, and its standard
/// translation is printed with the first side's private nominals bound by
/// `exists` and the second side's by `forall`.
pub fn fo_separator(
    store: &mut FormulaStore,
    f1: FormulaId,
    f2: FormulaId,
    sigma: &Signature,
    logic: LogicId,
    limits: &WarmupLimits,
) -> Result<Option<String>, EngineError> {
    let limits = limits.effective();
    let conj = store.and(f1, f2);
    let ilogic = internal_logic(store, conj, logic);
    if ilogic.graded {
        return Err(EngineError::PreconditionViolated {
            place: "fo_separator",
            detail: "counting modalities are outside the first-order export".into(),
        });
    }

    let sig1 = store.signature_of(f1);
    let sig2 = store.signature_of(f2);
    let n1: Vec<SymId> = sig1
        .noms
        .iter()
        .copied()
        .filter(|a| !sigma.noms.contains(a))
        .collect();
    let overlap: Vec<SymId> = sig2
        .noms
        .iter()
        .copied()
        .filter(|a| !sigma.noms.contains(a) && n1.contains(a))
        .collect();
    let f2r = if overlap.is_empty() {
        f2
    } else {
        let mut taken: BTreeSet<String> = sig1
            .rels
            .iter()
            .chain(sig1.props.iter())
            .chain(sig1.noms.iter())
            .chain(sig2.rels.iter())
            .chain(sig2.props.iter())
            .chain(sig2.noms.iter())
            .chain(sigma.rels.iter())
            .chain(sigma.props.iter())
            .chain(sigma.noms.iter())
            .map(|&s| store.sym_name(s).to_string())
            .collect();
        let mut map = HashMap::new();
        for a in overlap {
            let stem = format!("{}_2", store.sym_name(a));
            let mut bump = 1usize;
            let fresh = loop {
                let cand = if bump == 1 { stem.clone() } else { format!("{stem}_{bump}") };
                if !taken.contains(&cand) {
                    if let Ok(s) = store.try_sym(&cand, SymKind::Nom) {
                        taken.insert(cand);
                        break s;
                    }
                }
                bump += 1;
            };
            map.insert(a, fresh);
        }
        store.rename(f2, &map)
    };
    let n2: Vec<SymId> = store
        .signature_of(f2r)
        .noms
        .iter()
        .copied()
        .filter(|a| !sigma.noms.contains(a))
        .collect();

    let conj = store.and(f1, f2r);
    if satisfiable_with(store, conj, ilogic, SatMode::Auto, &limits.sat)? {
        return Ok(None);
    }

    let mut widened = sigma.clone();
    widened.noms.extend(n1.iter().copied());
    widened.noms.extend(n2.iter().copied());
    let outcome = separator_shared_nominals(store, f1, f2r, &widened, ilogic, &limits)?;
    let Some(chi) = outcome.separator else {
        return Err(EngineError::VerificationFailed {
            place: "fo_separator",
            detail: "conjunction unsatisfiable yet a pair survives over the widened signature"
                .into(),
        });
    };
    if !entails_with(store, f1, chi, ilogic, SatMode::Auto, &limits.sat)? {
        return Err(EngineError::VerificationFailed {
            place: "fo_separator",
            detail: "first input does not entail the constructed separator".into(),
        });
    }
    let both = store.and(f2r, chi);
    if satisfiable_with(store, both, ilogic, SatMode::Auto, &limits.sat)? {
        return Err(EngineError::VerificationFailed {
            place: "fo_separator",
            detail: "second input is consistent with the constructed separator".into(),
        });
    }

    Ok(Some(print_fo(store, chi, &n1, &n2)))
}

/// `exists n1. forall n2. T_{x0}(chi)` — the standard translation with
/// private nominals as quantified first-order variables, σ-nominals as free
/// variables, and a fresh-variable chain `x1, x2, …` for diamonds.
fn print_fo(store: &FormulaStore, chi: FormulaId, n1: &[SymId], n2: &[SymId]) -> String {
    let names = |syms: &[SymId]| {
        syms.iter()
            .map(|&s| store.sym_name(s).to_string())
            .collect::<Vec<_>>()
            .join(",")
    };
    let mut body = String::new();
    let mut next = 1usize;
    fo_into(store, chi, "x0", &mut next, &mut body);
    format!("exists {}. forall {}. {}", names(n1), names(n2), body)
}

fn fo_into(store: &FormulaStore, f: FormulaId, term: &str, next: &mut usize, out: &mut String) {
    match store.node(f) {
        Node::Top => out.push_str("true"),
        Node::Prop(p) => {
            let _ = write!(out, "{}({term})", pred_name(store.sym_name(p)));
        }
        Node::Nom(a) => {
            let _ = write!(out, "{term} = {}", store.sym_name(a));
        }
        Node::Not(x) => {
            out.push_str("!(");
            fo_into(store, x, term, next, out);
            out.push(')');
        }
        Node::And(x, y) => {
            out.push('(');
            fo_into(store, x, term, next, out);
            out.push_str(" & ");
            fo_into(store, y, term, next, out);
            out.push(')');
        }
        Node::Dia(r, x) => {
            let v = format!("x{}", *next);
            *next += 1;
            let _ = write!(out, "exists {v}. ({}({term},{v}) & ", pred_name(store.sym_name(r)));
            fo_into(store, x, &v, next, out);
            out.push(')');
        }
        Node::DiaU(x) => {
            let v = format!("x{}", *next);
            *next += 1;
            let _ = write!(out, "exists {v}. (");
            fo_into(store, x, &v, next, out);
            out.push(')');
        }
        Node::At(a, x) => {
            let name = store.sym_name(a).to_string();
            fo_into(store, x, &name, next, out);
        }
        Node::AtLeast(..) | Node::AtMost(..) => {
            unreachable!("graded inputs are rejected before translation")
        }
    }
}

fn pred_name(name: &str) -> String {
    let mut cs = name.chars();
    match cs.next() {
        Some(c) => c.to_uppercase().collect::<String>() + cs.as_str(),
        None => String::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sat::entails;
    use crate::semantics::joint_consistency_oracle;

    fn sig(store: &FormulaStore, syms: &[&str], includes_u: bool) -> Signature {
        let mut s = Signature { includes_u, ..Signature::default() };
        for name in syms {
            let id = store.lookup_sym(name).expect("symbol parsed");
            match store.sym_kind(id) {
                SymKind::Rel => s.rels.insert(id),
                SymKind::Prop => s.props.insert(id),
                SymKind::Nom => s.noms.insert(id),
            };
        }
        s
    }

    fn build(
        f1: &str,
        f2: &str,
        logic: LogicId,
    ) -> (FormulaStore, FormulaId, FormulaId, TypeUniverse) {
        let mut s = FormulaStore::new();
        let a = s.parse(f1, logic).unwrap();
        let b = s.parse(f2, logic).unwrap();
        let cl = s.closure(a, b, logic);
        let uni = TypeUniverse::build(&s, cl, &WarmupLimits::default().effective().sat.types).unwrap();
        (s, a, b, uni)
    }

    fn separate(
        f1: &str,
        f2: &str,
        logic: LogicId,
        sigma_syms: &[&str],
    ) -> (FormulaStore, FormulaId, FormulaId, Signature, SharedNominalSeparation) {
        let mut s = FormulaStore::new();
        let a = s.parse(f1, logic).unwrap();
        let b = s.parse(f2, logic).unwrap();
        let sigma = sig(&s, sigma_syms, logic.has_u());
        let out =
            separator_shared_nominals(&mut s, a, b, &sigma, logic, &WarmupLimits::default())
                .unwrap();
        (s, a, b, sigma, out)
    }

    /// `f1 ⊨ sep` and `f2 ∧ sep ⊨ ⊥`, via the satisfiability engine.
    fn assert_separates(
        store: &mut FormulaStore,
        f1: FormulaId,
        f2: FormulaId,
        sep: FormulaId,
        logic: LogicId,
    ) {
        assert!(entails(store, f1, sep, logic).unwrap(), "first input must entail the separator");
        let both = store.and(f2, sep);
        assert!(
            !crate::sat::satisfiable(store, both, logic).unwrap(),
            "separator must refute the second input"
        );
    }

    #[test]
    fn case_formula_shapes() {
        // no nominals → ⊤
        let (mut s, _, _, uni) = build("p", "q", LogicId::H);
        let top = s.top();
        assert_eq!(case_formula(&mut s, &uni, &CaseSide(Vec::new())), top);

        // one nominal → a single @-assertion over the chosen type
        let (mut s, _, _, uni) = build("'a", "p", LogicId::H);
        let sides = enumerate_case_sides(&uni);
        assert!(!sides.is_empty());
        let side = &sides[0];
        let case = case_formula(&mut s, &uni, side);
        let a = s.lookup_sym("a").unwrap();
        let tf = uni.type_formula(&mut s, uni.types[side.0[0]]);
        let expected = s.at_in(Base::H, a, tf);
        assert_eq!(case, expected);

        // two nominals → conjunction of two @-assertions
        let (mut s, _, _, uni) = build("'a", "'b", LogicId::H);
        let sides = enumerate_case_sides(&uni);
        let case = case_formula(&mut s, &uni, &sides[0]);
        assert!(matches!(s.node(case), Node::And(_, _)));
    }

    #[test]
    fn case_enumeration_prunes_impossible_assignments() {
        let (_, _, _, uni) = build("('a & 'b)", "true", LogicId::H);
        let sides = enumerate_case_sides(&uni);
        // types over free bits {a, b}: only a-alone/b-alone and the shared
        // a-and-b type survive the entanglement rule
        assert_eq!(sides.len(), 2);
        for side in &sides {
            let ta = uni.types[side.0[0]];
            let tb = uni.types[side.0[1]];
            let abit = uni.nom_member[&uni.closure.nom0[0]];
            let bbit = uni.nom_member[&uni.closure.nom0[1]];
            assert_eq!(ta >> abit & 1, 1);
            assert_eq!(tb >> bbit & 1, 1);
            let entangled = ta >> bbit & 1 == 1 || tb >> abit & 1 == 1;
            assert_eq!(entangled, side.0[0] == side.0[1]);
        }
    }

    #[test]
    fn shared_atom_clash_dies_at_base_and_separates_by_literal() {
        let mut s = FormulaStore::new();
        let f1 = s.parse("p", LogicId::H).unwrap();
        let f2 = s.parse("~p", LogicId::H).unwrap();
        let sigma = sig(&s, &["p"], false);
        let cl = s.closure(f1, f2, LogicId::H);
        let uni = TypeUniverse::build(&s, cl, &WarmupLimits::default().effective().sat.types).unwrap();
        let empty = CaseSide(Vec::new());
        let elim =
            eliminate_singleton(&mut s, &uni, &sigma, &empty, &empty, &WarmupLimits::default())
                .unwrap();

        let with_p = uni.types_containing(&s, f1);
        let without_p = uni.types_containing(&s, f2);
        assert_eq!((with_p.len(), without_p.len()), (1, 1));
        let (tp, tn) = (with_p[0], without_p[0]);

        let p = s.lookup_sym("p").unwrap();
        assert_eq!(
            elim.drop_reason(tp, tn),
            Some(Drop::Clash { sym: p, pos_in_first: true })
        );
        assert_eq!(
            elim.drop_reason(tn, tp),
            Some(Drop::Clash { sym: p, pos_in_first: false })
        );
        // agreeing pairs survive: p against itself is jointly realizable
        assert!(elim.survives(tp, tp));
        assert!(elim.survives(tn, tn));

        let mut memo = HashMap::new();
        let sep = sep_case(&mut s, &uni, &sigma, &elim, tp, tn, &mut memo).unwrap();
        let plit = s.prop(p);
        assert_eq!(sep, plit);
        let sep2 = sep_case(&mut s, &uni, &sigma, &elim, tn, tp, &mut memo).unwrap();
        let nplit = s.not(plit);
        assert_eq!(sep2, nplit);
        // asking for a survivor's formula is a contract violation
        assert!(sep_case(&mut s, &uni, &sigma, &elim, tp, tp, &mut memo).is_err());
    }

    #[test]
    fn survival_grid_matches_bounded_oracle() {
        // one case (no nominals); every grid cell cross-checked against the
        // bounded model-pair search
        let mut s = FormulaStore::new();
        let f1 = s.parse("<R>p", LogicId::H).unwrap();
        let f2 = s.parse("~<R>p", LogicId::H).unwrap();
        let sigma = sig(&s, &["R", "p"], false);
        let cl = s.closure(f1, f2, LogicId::H);
        let uni = TypeUniverse::build(&s, cl, &WarmupLimits::default().effective().sat.types).unwrap();
        let empty = CaseSide(Vec::new());
        let elim =
            eliminate_singleton(&mut s, &uni, &sigma, &empty, &empty, &WarmupLimits::default())
                .unwrap();

        for i in 0..uni.types.len() {
            for j in 0..uni.types.len() {
                let ti = uni.type_formula(&mut s, uni.types[i]);
                let tj = uni.type_formula(&mut s, uni.types[j]);
                let witness = joint_consistency_oracle(&s, ti, tj, &sigma, LogicId::H, 2)
                    .unwrap()
                    .is_some();
                assert_eq!(
                    elim.survives(i, j),
                    witness,
                    "grid cell ({i},{j}) disagrees with the oracle"
                );
            }
        }
    }

    #[test]
    fn every_eliminated_pair_separates_and_stays_in_sigma() {
        let mut s = FormulaStore::new();
        let f1 = s.parse("<R>p", LogicId::H).unwrap();
        let f2 = s.parse("~<R>p", LogicId::H).unwrap();
        let sigma = sig(&s, &["R", "p"], false);
        let cl = s.closure(f1, f2, LogicId::H);
        let uni = TypeUniverse::build(&s, cl, &WarmupLimits::default().effective().sat.types).unwrap();
        let empty = CaseSide(Vec::new());
        let elim =
            eliminate_singleton(&mut s, &uni, &sigma, &empty, &empty, &WarmupLimits::default())
                .unwrap();
        let case = case_formula(&mut s, &uni, &empty);

        let mut memo = HashMap::new();
        let mut checked = 0;
        for i in 0..uni.types.len() {
            for j in 0..uni.types.len() {
                if elim.survives(i, j) {
                    continue;
                }
                let sep = sep_case(&mut s, &uni, &sigma, &elim, i, j, &mut memo).unwrap();
                assert!(s.signature_of(sep).is_subset(&sigma));
                let ti = uni.type_formula(&mut s, uni.types[i]);
                let lhs1 = s.and(ti, case);
                assert!(entails(&mut s, lhs1, sep, LogicId::H).unwrap());
                let tj = uni.type_formula(&mut s, uni.types[j]);
                let lhs2 = s.and(tj, case);
                let nsep = s.not(sep);
                assert!(entails(&mut s, lhs2, nsep, LogicId::H).unwrap());
                checked += 1;
            }
        }
        assert!(checked >= 8, "expected a meaningful number of eliminated pairs");
    }

    #[test]
    fn diamond_pair_separates_equivalently_to_the_diamond() {
        let (mut s, f1, f2, _, out) = separate("<R>p", "~<R>p", LogicId::H, &["R", "p"]);
        let sep = out.separator.expect("refutable pair must separate");
        assert_separates(&mut s, f1, f2, sep, LogicId::H);
        let dia = s.parse("<R>p", LogicId::H).unwrap();
        assert!(entails(&mut s, sep, dia, LogicId::H).unwrap());
        assert!(entails(&mut s, dia, sep, LogicId::H).unwrap());
    }

    #[test]
    fn shared_atom_is_the_separator_when_only_it_is_shared() {
        let (mut s, f1, f2, _, out) = separate("(p & q)", "(~p & r)", LogicId::H, &["p"]);
        let sep = out.separator.expect("p-disagreement must separate");
        assert_separates(&mut s, f1, f2, sep, LogicId::H);
        let p = s.parse("p", LogicId::H).unwrap();
        assert!(entails(&mut s, sep, p, LogicId::H).unwrap());
        assert!(entails(&mut s, p, sep, LogicId::H).unwrap());
    }

    #[test]
    fn disjoint_vocabularies_do_not_separate() {
        let (s, _, _, _, out) = separate("p", "q", LogicId::H, &[]);
        assert!(out.separator.is_none());
        let sv = out.survivor.expect("joint consistency must exhibit a survivor");
        let run = out.run(sv.case1, sv.case2);
        assert!(run.survives(sv.m1, sv.m2));
        drop(s);
    }

    #[test]
    fn surviving_pair_is_jointly_realizable_per_oracle() {
        let (s, f1, f2, sigma, out) = separate("p", "p", LogicId::H, &["p"]);
        assert!(out.separator.is_none());
        let sv = out.survivor.unwrap();
        // both chosen types carry the input
        assert!(out.s1.contains(&sv.m1));
        assert!(out.s2.contains(&sv.m2));
        let witness = joint_consistency_oracle(&s, f1, f2, &sigma, LogicId::H, 1).unwrap();
        assert!(witness.is_some(), "oracle must realize the surviving pair");
    }

    #[test]
    fn nominal_successor_clash_separates() {
        let (mut s, f1, f2, sigma, out) =
            separate("('a & <R>'a)", "('b & [R]~'b)", LogicId::H, &["R", "a", "b"]);
        let sep = out.separator.expect("the named loop must separate from the loop-free point");
        assert_separates(&mut s, f1, f2, sep, LogicId::H);
        // cross-check joint inconsistency with the bounded oracle
        let witness = joint_consistency_oracle(&s, f1, f2, &sigma, LogicId::H, 2).unwrap();
        assert!(witness.is_none());
    }

    #[test]
    fn universal_modality_separates_private_structure() {
        let (mut s, f1, f2, _, out) = separate("<U>p", "[U]~p", LogicId::H_AT_U, &["p"]);
        let sep = out.separator.expect("⟨U⟩p against [U]¬p must separate");
        assert_separates(&mut s, f1, f2, sep, LogicId::H_AT_U);
        let up = s.parse("<U>p", LogicId::H_AT_U).unwrap();
        assert!(entails(&mut s, sep, up, LogicId::H_AT_U).unwrap());
        assert!(entails(&mut s, up, sep, LogicId::H_AT_U).unwrap());

        // without p in σ the two are jointly realizable: nothing shared separates
        let (_, _, _, _, out) = separate("<U>p", "[U]~p", LogicId::H_AT_U, &[]);
        assert!(out.separator.is_none());
    }

    #[test]
    fn at_operator_separates_named_disagreement() {
        let (mut s, f1, f2, _, out) = separate("@a p", "@a ~p", LogicId::H_AT, &["p", "a"]);
        let sep = out.separator.expect("@a p against @a ¬p must separate");
        assert_separates(&mut s, f1, f2, sep, LogicId::H_AT);
        let atp = s.parse("@a p", LogicId::H_AT).unwrap();
        assert!(entails(&mut s, sep, atp, LogicId::H_AT).unwrap());
        assert!(entails(&mut s, atp, sep, LogicId::H_AT).unwrap());
    }

    #[test]
    fn empty_witness_frontier_collapses_to_bottom() {
        // ⟨R⟩(p ∧ ¬p) has a Hintikka type but no witness type can hold the
        // body, so the frontier is empty and the separator is ⊥
        let (mut s, f1, f2, _, out) =
            separate("<R>(p & ~p)", "true", LogicId::H, &["R", "p"]);
        let sep = out.separator.expect("an unsatisfiable input separates from anything");
        let bottom = s.bottom();
        assert_eq!(sep, bottom);
        assert_separates(&mut s, f1, f2, sep, LogicId::H);
    }

    #[test]
    fn unshared_nominals_violate_the_precondition() {
        let mut s = FormulaStore::new();
        let f1 = s.parse("'a", LogicId::H).unwrap();
        let f2 = s.parse("p", LogicId::H).unwrap();
        let sigma = sig(&s, &["p"], false);
        let err = separator_shared_nominals(&mut s, f1, f2, &sigma, LogicId::H, &WarmupLimits::default())
            .unwrap_err();
        assert!(matches!(err, EngineError::PreconditionViolated { .. }));
    }

    #[test]
    fn separator_sizes_stay_exponentially_bounded() {
        let corpus: [(&str, &str, LogicId, &[&str]); 4] = [
            ("<R>p", "~<R>p", LogicId::H, &["R", "p"]),
            ("(p & q)", "(~p & r)", LogicId::H, &["p"]),
            ("('a & <R>'a)", "('b & [R]~'b)", LogicId::H, &["R", "a", "b"]),
            ("@a p", "@a ~p", LogicId::H_AT, &["p", "a"]),
        ];
        for (f1, f2, logic, syms) in corpus {
            let (s, a, b, _, out) = separate(f1, f2, logic, syms);
            let sep = out.separator.expect("corpus pairs all separate");
            let n = s.dag_size(a) + s.dag_size(b);
            let bound = 64usize.saturating_mul(1usize << n.min(24));
            let size = s.dag_size(sep);
            println!("separator size for ({f1}, {f2}): {size} (inputs {n}, bound {bound})");
            assert!(size <= bound, "separator size {size} exceeds 64·2^{n}");
        }
    }

    #[test]
    fn fo_export_prints_prefix_and_translation() {
        let mut s = FormulaStore::new();
        let f1 = s.parse("p", LogicId::H).unwrap();
        let f2 = s.parse("~p", LogicId::H).unwrap();
        let sigma = sig(&s, &["p"], false);
        let text = fo_separator(&mut s, f1, f2, &sigma, LogicId::H, &WarmupLimits::default())
            .unwrap()
            .expect("p against ¬p has a first-order separator");
        assert!(text.starts_with("exists . forall . "), "got: {text}");
        assert!(text.contains("P(x0)"), "got: {text}");
    }

    #[test]
    fn fo_export_quantifies_private_nominals() {
        let mut s = FormulaStore::new();
        let f1 = s.parse("('a & p)", LogicId::H).unwrap();
        let f2 = s.parse("('b & ~p)", LogicId::H).unwrap();
        let sigma = sig(&s, &["p"], false);
        let text = fo_separator(&mut s, f1, f2, &sigma, LogicId::H, &WarmupLimits::default())
            .unwrap()
            .expect("the p-disagreement survives the widening");
        assert!(text.starts_with("exists a. forall b. "), "got: {text}");
        assert!(text.contains("P(x0)"), "got: {text}");
    }

    #[test]
    fn fo_export_renames_private_nominals_shared_by_both_sides() {
        let mut s = FormulaStore::new();
        let f1 = s.parse("('a & p)", LogicId::H).unwrap();
        let f2 = s.parse("('a & ~p)", LogicId::H).unwrap();
        let sigma = sig(&s, &["p"], false);
        let text = fo_separator(&mut s, f1, f2, &sigma, LogicId::H, &WarmupLimits::default())
            .unwrap()
            .expect("after renaming the conjunction is still unsatisfiable");
        assert!(text.starts_with("exists a. forall a_2. "), "got: {text}");
    }

    #[test]
    fn fo_export_translates_the_universal_diamond() {
        let mut s = FormulaStore::new();
        let f1 = s.parse("@a p", LogicId::H_AT_U).unwrap();
        let f2 = s.parse("[U]~p", LogicId::H_AT_U).unwrap();
        let sigma = sig(&s, &["p"], true);
        let text = fo_separator(&mut s, f1, f2, &sigma, LogicId::H_AT_U, &WarmupLimits::default())
            .unwrap()
            .expect("a named p-world refutes [U]¬p");
        assert!(text.starts_with("exists a. forall . "), "got: {text}");
        assert!(text.contains("exists x1. "), "got: {text}");
    }

    #[test]
    fn fo_export_returns_none_for_satisfiable_conjunction() {
        let mut s = FormulaStore::new();
        let f1 = s.parse("p", LogicId::H).unwrap();
        let f2 = s.parse("q", LogicId::H).unwrap();
        let sigma = Signature::default();
        let text = fo_separator(&mut s, f1, f2, &sigma, LogicId::H, &WarmupLimits::default()).unwrap();
        assert!(text.is_none());
    }

    mod random_pairs {
        use super::*;
        use proptest::prelude::*;

        fn lit() -> impl Strategy<Value = String> {
            prop_oneof![
                Just("p".to_string()),
                Just("q".to_string()),
                Just("~p".to_string()),
                Just("~q".to_string()),
            ]
        }

        fn conj() -> impl Strategy<Value = String> {
            prop_oneof![
                lit(),
                (lit(), lit()).prop_map(|(a, b)| format!("({a} & {b})")),
            ]
        }

        /// At most one diamond per side keeps the type grid small.
        fn form() -> impl Strategy<Value = String> {
            prop_oneof![
                conj(),
                conj().prop_map(|b| format!("<R>{b}")),
                conj().prop_map(|b| format!("[R]{b}")),
                (lit(), conj()).prop_map(|(l, b)| format!("({l} & <R>{b})")),
                (lit(), conj()).prop_map(|(l, b)| format!("({l} & [R]{b})")),
            ]
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(24))]
            #[test]
            fn decision_is_symmetric_and_outputs_verify(
                t1 in form(),
                t2 in form(),
                mask in 0u8..8,
            ) {
                let mut s = FormulaStore::new();
                let f1 = s.parse(&t1, LogicId::H).unwrap();
                let f2 = s.parse(&t2, LogicId::H).unwrap();
                let mut sigma = Signature::default();
                for (bit, name) in [(0, "p"), (1, "q"), (2, "R")] {
                    if mask >> bit & 1 == 1 {
                        if let Some(id) = s.lookup_sym(name) {
                            match s.sym_kind(id) {
                                SymKind::Rel => sigma.rels.insert(id),
                                SymKind::Prop => sigma.props.insert(id),
                                SymKind::Nom => sigma.noms.insert(id),
                            };
                        }
                    }
                }
                let limits = WarmupLimits::default();
                let fwd = separator_shared_nominals(&mut s, f1, f2, &sigma, LogicId::H, &limits)
                    .unwrap();
                let bwd = separator_shared_nominals(&mut s, f2, f1, &sigma, LogicId::H, &limits)
                    .unwrap();
                // joint realizability over σ is symmetric in the two sides
                prop_assert_eq!(fwd.separator.is_some(), bwd.separator.is_some());

                if let Some(sep) = fwd.separator {
                    prop_assert!(s.signature_of(sep).is_subset(&sigma));
                    prop_assert!(entails(&mut s, f1, sep, LogicId::H).unwrap());
                    let both = s.and(f2, sep);
                    prop_assert!(!crate::sat::satisfiable(&mut s, both, LogicId::H).unwrap());
                }
                // a bounded joint witness refutes any claimed separator
                if joint_consistency_oracle(&s, f1, f2, &sigma, LogicId::H, 2)
                    .unwrap()
                    .is_some()
                {
                    prop_assert!(fwd.separator.is_none());
                }
            }
        }
    }
}
