//! Bounded model search. Within caps on domain size, world count, and value
//! poset size, decide whether a closed subjective formula has a model in a
//! semantic class, and produce the structure when it does.
//!
//! The concrete backends (ranking, possibility, preferential, polynomial
//! densities) are searched by direct enumeration: their bounded measure
//! catalogs are small. Plausibility structures get a staged pipeline
//! instead: enumerate world labelings, branch on the truth of each
//! conditional instance, reduce each branch to order constraints between
//! definable sets, and only run the poset assignment search on branches the
//! constraint filter cannot refute. The pipeline serves two classes. By
//! default it searches measures that are merely monotone (A1), and the
//! filter draws A1 consequences only; with `require_qualitative` set it
//! searches qualitative measures, the filter may also use A2 and A3, and
//! every candidate must pass the qualitativeness check. A refuted branch
//! truly has no measure of the requested kind, and every surviving
//! candidate is checked against the real evaluator before it is reported.
//!
//! Three structural facts keep the enumeration exhaustive yet affordable.
//! Worlds with identical interpretations can be merged without changing any
//! formula's truth value, monotonicity, or qualitativeness, so the pipeline
//! ranges over pairwise-distinct labelings only. Renaming the domain by a
//! permutation, applied uniformly to every world, maps models to models, so
//! when no rigidity constraint distinguishes elements the pipeline visits
//! just the least labeling in each orbit. And refuting a subsystem of
//! constraints refutes every extension, so truth patterns that share their
//! forced constraints are killed together instead of one by one. The
//! backend catalogs carry no merge argument (preferential minimality can
//! depend on world identity), so the direct search ranges over multisets.

use crate::backends::{
    EpsPolyPPD, Kappa, KappaRanking, Measure, PossibilityMeasure, PreferentialOrder,
};
use crate::gen::{all_strict_orders, bounded_posets, StructClass};
use crate::order::PlausibilityPoset;
use crate::plausibility::ExplicitMeasure;
use crate::subjective::{eval_subj, Interpretation, SubjectiveStructure, Valuation};
use crate::syntax::{Formula, Ident, Term, VocabError, Vocabulary};
use crate::{Rat, WorldSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchBounds {
    pub max_dom: usize,
    pub max_worlds: usize,
    /// Cap on the value poset size for the plausibility pipeline.
    pub max_poset: usize,
}

impl Default for SearchBounds {
    fn default() -> SearchBounds {
        SearchBounds {
            max_dom: 3,
            max_worlds: 4,
            max_poset: 6,
        }
    }
}

/// How constants may behave across worlds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Rigidity {
    /// No constraint: each world interprets constants on its own.
    Free,
    /// Every constant denotes the same element in every world.
    AllRigid,
    /// The named constant must denote differently in at least two worlds.
    RequireNonrigid(Ident),
}

#[derive(Clone, Debug)]
pub struct SearchOpts {
    pub bounds: SearchBounds,
    pub rigidity: Rigidity,
    /// Restrict the plausibility pipeline to qualitative measures (A2 and
    /// A3 on top of monotonicity). Off by default, mirroring the model
    /// loader: plain structures only promise A1. The concrete backends
    /// ignore the flag; their classes fix the measure shape outright.
    pub require_qualitative: bool,
}

impl Default for SearchOpts {
    fn default() -> SearchOpts {
        SearchOpts {
            bounds: SearchBounds::default(),
            rigidity: Rigidity::Free,
            require_qualitative: false,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    /// World labelings examined (after the rigidity and symmetry screens).
    pub configs: u64,
    /// Conditional truth guesses that survived the skeleton check.
    pub branches: u64,
    /// Constraint systems handed to the filter.
    pub systems: u64,
    /// Full poset assignments tested.
    pub leaves: u64,
}

#[derive(Clone, Debug)]
pub enum SearchOutcome {
    Found(Box<SearchWitness>),
    /// No model within the bounds; the claim is exhaustive for the class.
    Exhausted(SearchStats),
}

#[derive(Clone, Debug)]
pub struct SearchWitness {
    pub structure: SubjectiveStructure,
    pub world: usize,
    pub stats: SearchStats,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SearchError {
    #[error("the formula must be closed; {0} is free")]
    NotClosed(Ident),
    #[error("statistical conditionals are outside the subjective search")]
    StatConditional,
    #[error("search space too large: {0}")]
    TooLarge(String),
    #[error(transparent)]
    Vocab(#[from] VocabError),
}

const MAX_WORLD_LABELS: u128 = 4096;
const MAX_CONFIGS: u128 = 80_000_000;
const MAX_COND_INSTANCES: usize = 16;
/// Instance-count ceiling for the precomputed-column pipeline; above it the
/// per-labeling evaluation path takes over.
const FAST_GUESS_BITS: usize = 10;
const FAST_WORDS: usize = (1 << FAST_GUESS_BITS) / 64;
/// Filter-call allowances per labeling; exhausting one never loses models,
/// it only forfeits early refutations.
const REFUTE_BUDGET: u32 = 4_096;
const SETTLE_BUDGET: u32 = 262_144;

/// Search for a structure and world satisfying the closed formula `f`.
/// Domains are tried smallest first, then world counts, so the witness is
/// minimal in that order.
pub fn find_model(
    f: &Formula,
    class: StructClass,
    opts: &SearchOpts,
) -> Result<SearchOutcome, SearchError> {
    if let Some(x) = f.free_vars().into_iter().next() {
        return Err(SearchError::NotClosed(x));
    }
    if has_stat(f) {
        return Err(SearchError::StatConditional);
    }
    let vocab = Vocabulary::collect([f])?;
    match class {
        StructClass::Qpl => search_qpl(f, &vocab, opts),
        _ => search_direct(f, &vocab, class, opts),
    }
}

/// Search for a structure and world falsifying the closed formula `f`.
pub fn find_countermodel(
    f: &Formula,
    class: StructClass,
    opts: &SearchOpts,
) -> Result<SearchOutcome, SearchError> {
    find_model(&f.clone().neg(), class, opts)
}

fn has_stat(f: &Formula) -> bool {
    match f {
        Formula::CondStat(..) => true,
        Formula::True | Formula::False | Formula::Atom(..) | Formula::Eq(..) => false,
        Formula::Not(g) | Formula::Forall(_, g) | Formula::Exists(_, g) => has_stat(g),
        Formula::And(a, b)
        | Formula::Or(a, b)
        | Formula::Implies(a, b)
        | Formula::CondSubj(a, b) => has_stat(a) || has_stat(b),
    }
}

// ---------------------------------------------------------------------------
// World labelings
// ---------------------------------------------------------------------------

/// A candidate world: predicate bitsets and function tables over tuple
/// cells in odometer order (first argument least significant).
#[derive(Clone, Debug, PartialEq, Eq)]
struct World {
    preds: Vec<Vec<bool>>,
    funcs: Vec<Vec<usize>>,
}

struct Space {
    pred_names: Vec<(Ident, usize)>,
    func_names: Vec<(Ident, usize)>,
    dom: usize,
}

impl Space {
    fn new(vocab: &Vocabulary, dom: usize) -> Space {
        Space {
            pred_names: vocab.predicates.iter().map(|(n, &a)| (n.clone(), a)).collect(),
            func_names: vocab.functions.iter().map(|(n, &a)| (n.clone(), a)).collect(),
            dom,
        }
    }

    fn label_count(&self) -> u128 {
        let mut total: u128 = 1;
        for &(_, a) in &self.pred_names {
            let cells = self.dom.pow(a as u32).min(127);
            total = total.saturating_mul(1u128 << cells);
        }
        for &(_, a) in &self.func_names {
            let cells = self.dom.pow(a as u32);
            total = total.saturating_mul((self.dom as u128).saturating_pow(cells as u32));
        }
        total
    }

    /// Every interpretation over the domain, in a fixed odometer order.
    fn enumerate(&self) -> Vec<World> {
        let mut out = vec![World {
            preds: self
                .pred_names
                .iter()
                .map(|&(_, a)| vec![false; self.dom.pow(a as u32)])
                .collect(),
            funcs: self
                .func_names
                .iter()
                .map(|&(_, a)| vec![0usize; self.dom.pow(a as u32)])
                .collect(),
        }];
        for (pi, &(_, a)) in self.pred_names.iter().enumerate() {
            let cells = self.dom.pow(a as u32);
            let mut next = Vec::with_capacity(out.len() << cells);
            for w in out {
                for mask in 0u64..(1 << cells) {
                    let mut w2 = w.clone();
                    for c in 0..cells {
                        w2.preds[pi][c] = mask >> c & 1 != 0;
                    }
                    next.push(w2);
                }
            }
            out = next;
        }
        for (fi, &(_, a)) in self.func_names.iter().enumerate() {
            let cells = self.dom.pow(a as u32);
            let mut next = Vec::new();
            for w in out {
                let mut table = vec![0usize; cells];
                loop {
                    let mut w2 = w.clone();
                    w2.funcs[fi].copy_from_slice(&table);
                    next.push(w2);
                    if !bump(&mut table, self.dom) {
                        break;
                    }
                }
            }
            out = next;
        }
        out
    }

    /// Position of a label in `enumerate` order.
    fn index_of(&self, w: &World) -> usize {
        let mut idx = 0usize;
        for (pi, _) in self.pred_names.iter().enumerate() {
            let cells = w.preds[pi].len();
            let mut mask = 0usize;
            for (c, &on) in w.preds[pi].iter().enumerate() {
                if on {
                    mask |= 1 << c;
                }
            }
            idx = (idx << cells) | mask;
        }
        for (fi, _) in self.func_names.iter().enumerate() {
            let mut t = 0usize;
            for &v in w.funcs[fi].iter().rev() {
                t = t * self.dom + v;
            }
            idx = idx * self.dom.pow(w.funcs[fi].len() as u32) + t;
        }
        idx
    }

    fn pred_index(&self, name: &str) -> usize {
        self.pred_names.iter().position(|(n, _)| n == name).unwrap()
    }

    fn func_index(&self, name: &str) -> usize {
        self.func_names.iter().position(|(n, _)| n == name).unwrap()
    }

    /// Denotations of the zeroary functions in a world, in name order.
    fn constants(&self, w: &World) -> Vec<usize> {
        self.func_names
            .iter()
            .enumerate()
            .filter(|(_, (_, a))| *a == 0)
            .map(|(i, _)| w.funcs[i][0])
            .collect()
    }

    fn to_interp(&self, w: &World) -> Interpretation {
        let mut interp = Interpretation::new();
        for (pi, (name, a)) in self.pred_names.iter().enumerate() {
            let mut tuples = Vec::new();
            for (cell, &on) in w.preds[pi].iter().enumerate() {
                if on {
                    tuples.push(self.decode(cell, *a));
                }
            }
            interp = interp.pred(name, tuples);
        }
        for (fi, (name, a)) in self.func_names.iter().enumerate() {
            let table: Vec<(Vec<usize>, usize)> = w.funcs[fi]
                .iter()
                .enumerate()
                .map(|(cell, &v)| (self.decode(cell, *a), v))
                .collect();
            interp = interp.func(name, table);
        }
        interp
    }

    fn decode(&self, mut cell: usize, arity: usize) -> Vec<usize> {
        let mut t = Vec::with_capacity(arity);
        for _ in 0..arity {
            t.push(cell % self.dom);
            cell /= self.dom;
        }
        t
    }

    fn encode(&self, tuple: &[usize]) -> usize {
        let mut cell = 0usize;
        for &e in tuple.iter().rev() {
            cell = cell * self.dom + e;
        }
        cell
    }
}

/// Advance a little-endian odometer; false once it wraps to all zeros.
fn bump(digits: &mut [usize], base: usize) -> bool {
    for d in digits.iter_mut() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}

/// Next strictly increasing index tuple below `pool`, lexicographic.
fn next_combination(combo: &mut [usize], pool: usize) -> bool {
    let n = combo.len();
    let mut i = n;
    while i > 0 {
        i -= 1;
        if combo[i] < pool - n + i {
            combo[i] += 1;
            for j in i + 1..n {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Next non-decreasing index tuple below `pool`, lexicographic.
fn next_multiset(combo: &mut [usize], pool: usize) -> bool {
    let n = combo.len();
    let mut i = n;
    while i > 0 {
        i -= 1;
        if combo[i] + 1 < pool {
            let v = combo[i] + 1;
            for item in combo.iter_mut().skip(i) {
                *item = v;
            }
            return true;
        }
    }
    false
}

fn combination_count(pool: u128, n: u128, with_repeats: bool) -> u128 {
    let top = if with_repeats { pool + n - 1 } else { pool };
    if top < n {
        return 0;
    }
    let mut num: u128 = 1;
    for i in 0..n {
        num = num.saturating_mul(top - i);
    }
    let mut den: u128 = 1;
    for i in 1..=n {
        den *= i;
    }
    num / den
}

/// Rigidity screen for one labeling choice. `dens` holds each pool world's
/// constant denotations.
fn admissible(
    combo: &[usize],
    dens: &[Vec<usize>],
    rigidity: &Rigidity,
    vocab: &Vocabulary,
) -> bool {
    match rigidity {
        Rigidity::Free => true,
        Rigidity::AllRigid => {
            let first = &dens[combo[0]];
            if !combo.iter().all(|&i| dens[i] == *first) {
                return false;
            }
            // Canonical denotations only: first occurrences must appear in
            // increasing order, which quotients away domain permutations.
            let mut next = 0usize;
            for &e in first {
                if e > next {
                    return false;
                }
                if e == next {
                    next += 1;
                }
            }
            true
        }
        Rigidity::RequireNonrigid(c) => {
            let idx = vocab
                .functions
                .iter()
                .filter(|(_, &a)| a == 0)
                .position(|(n, _)| n == c);
            match idx {
                None => false,
                Some(ci) => combo.iter().any(|&i| dens[i][ci] != dens[combo[0]][ci]),
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Domain symmetry
// ---------------------------------------------------------------------------

/// All permutations of `0..dom`, lexicographically, identity first.
fn perms_of(dom: usize) -> Vec<Vec<usize>> {
    fn rec(k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k == cur.len() {
            out.push(cur.clone());
            return;
        }
        for i in k..cur.len() {
            cur.swap(k, i);
            rec(k + 1, cur, out);
            cur.swap(k, i);
        }
    }
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..dom).collect();
    rec(0, &mut cur, &mut out);
    out.sort();
    out
}

/// The label with every domain element renamed through `perm`.
fn apply_perm(sp: &Space, w: &World, perm: &[usize], inv: &[usize]) -> World {
    let mut out = w.clone();
    for (pi, &(_, a)) in sp.pred_names.iter().enumerate() {
        for cell in 0..w.preds[pi].len() {
            let t = sp.decode(cell, a);
            let pre: Vec<usize> = t.iter().map(|&e| inv[e]).collect();
            out.preds[pi][cell] = w.preds[pi][sp.encode(&pre)];
        }
    }
    for (fi, &(_, a)) in sp.func_names.iter().enumerate() {
        for cell in 0..w.funcs[fi].len() {
            let t = sp.decode(cell, a);
            let pre: Vec<usize> = t.iter().map(|&e| inv[e]).collect();
            out.funcs[fi][cell] = perm[w.funcs[fi][sp.encode(&pre)]];
        }
    }
    out
}

/// Index tables of the non-identity domain permutations acting on the label
/// pool. Renaming elements uniformly across all worlds preserves
/// satisfaction (the language names no element directly), so a search with
/// no rigidity constraint may keep only each orbit's least labeling set.
fn label_perm_tables(sp: &Space, pool: &[World]) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    for perm in perms_of(sp.dom).into_iter().skip(1) {
        let mut inv = vec![0usize; sp.dom];
        for (e, &img) in perm.iter().enumerate() {
            inv[img] = e;
        }
        let table: Vec<u32> = pool
            .iter()
            .map(|w| sp.index_of(&apply_perm(sp, w, &perm, &inv)) as u32)
            .collect();
        debug_assert!({
            let mut seen = table.clone();
            seen.sort_unstable();
            seen.iter().enumerate().all(|(i, &v)| v as usize == i)
        });
        out.push(table);
    }
    out
}

/// Keep a combination only if no renamed image sorts strictly below it.
fn orbit_minimal(combo: &[usize], tables: &[Vec<u32>], scratch: &mut Vec<usize>) -> bool {
    for t in tables {
        scratch.clear();
        scratch.extend(combo.iter().map(|&l| t[l] as usize));
        scratch.sort_unstable();
        if scratch.as_slice() < combo {
            return false;
        }
    }
    true
}

// ---------------------------------------------------------------------------
// Compiled formulas
// ---------------------------------------------------------------------------

enum Tm {
    Var(Ident),
    App(usize, Vec<Tm>),
}

enum Ast {
    True,
    False,
    Atom(usize, Vec<Tm>),
    Eq(Tm, Tm),
    Not(Box<Ast>),
    And(Box<Ast>, Box<Ast>),
    Or(Box<Ast>, Box<Ast>),
    Implies(Box<Ast>, Box<Ast>),
    Forall(Ident, Box<Ast>),
    Exists(Ident, Box<Ast>),
    /// A subjective conditional occurrence: table index plus its free
    /// variables in sorted order.
    Cond(usize, Vec<Ident>),
}

struct CondNode {
    free: Vec<Ident>,
    phi: Ast,
    psi: Ast,
}

fn compile_term(t: &Term, sp: &Space) -> Tm {
    match t {
        Term::Var(v) => Tm::Var(v.clone()),
        Term::Func(g, args) => Tm::App(
            sp.func_index(g),
            args.iter().map(|a| compile_term(a, sp)).collect(),
        ),
    }
}

fn compile(f: &Formula, sp: &Space, conds: &mut Vec<CondNode>) -> Result<Ast, SearchError> {
    Ok(match f {
        Formula::True => Ast::True,
        Formula::False => Ast::False,
        Formula::Atom(p, args) => Ast::Atom(
            sp.pred_index(p),
            args.iter().map(|a| compile_term(a, sp)).collect(),
        ),
        Formula::Eq(a, b) => Ast::Eq(compile_term(a, sp), compile_term(b, sp)),
        Formula::Not(g) => Ast::Not(Box::new(compile(g, sp, conds)?)),
        Formula::And(a, b) => Ast::And(
            Box::new(compile(a, sp, conds)?),
            Box::new(compile(b, sp, conds)?),
        ),
        Formula::Or(a, b) => Ast::Or(
            Box::new(compile(a, sp, conds)?),
            Box::new(compile(b, sp, conds)?),
        ),
        Formula::Implies(a, b) => Ast::Implies(
            Box::new(compile(a, sp, conds)?),
            Box::new(compile(b, sp, conds)?),
        ),
        Formula::Forall(x, b) => Ast::Forall(x.clone(), Box::new(compile(b, sp, conds)?)),
        Formula::Exists(x, b) => Ast::Exists(x.clone(), Box::new(compile(b, sp, conds)?)),
        Formula::CondSubj(a, b) => {
            let free: Vec<Ident> = f.free_vars().into_iter().collect();
            let phi = compile(a, sp, conds)?;
            let psi = compile(b, sp, conds)?;
            let id = conds.len();
            conds.push(CondNode {
                free: free.clone(),
                phi,
                psi,
            });
            Ast::Cond(id, free)
        }
        Formula::CondStat(..) => return Err(SearchError::StatConditional),
    })
}

fn ast_has_cond(a: &Ast) -> bool {
    match a {
        Ast::True | Ast::False | Ast::Atom(..) | Ast::Eq(..) => false,
        Ast::Not(g) | Ast::Forall(_, g) | Ast::Exists(_, g) => ast_has_cond(g),
        Ast::And(x, y) | Ast::Or(x, y) | Ast::Implies(x, y) => {
            ast_has_cond(x) || ast_has_cond(y)
        }
        Ast::Cond(..) => true,
    }
}

struct Env(Vec<(Ident, usize)>);

impl Env {
    fn get(&self, x: &str) -> usize {
        self.0
            .iter()
            .rev()
            .find(|(v, _)| v == x)
            .expect("closed formula binds every variable")
            .1
    }
}

/// Per-occurrence instance numbering: occurrence `i` owns a block of
/// `dom^|free|` consecutive guess bits, one per valuation of its free
/// variables.
struct InstanceMap {
    offsets: Vec<usize>,
    total: usize,
    dom: usize,
}

impl InstanceMap {
    fn new(conds: &[CondNode], dom: usize) -> InstanceMap {
        let mut offsets = Vec::with_capacity(conds.len());
        let mut total = 0usize;
        for c in conds {
            offsets.push(total);
            total += dom.pow(c.free.len() as u32);
        }
        InstanceMap { offsets, total, dom }
    }

    fn slot(&self, id: usize, free: &[Ident], env: &Env) -> usize {
        let mut idx = 0usize;
        for x in free.iter().rev() {
            idx = idx * self.dom + env.get(x);
        }
        self.offsets[id] + idx
    }

    /// The valuation encoded by a block-local instance index.
    fn values(&self, free: &[Ident], mut idx: usize) -> Vec<(Ident, usize)> {
        let mut out = Vec::with_capacity(free.len());
        for x in free {
            out.push((x.clone(), idx % self.dom));
            idx /= self.dom;
        }
        out
    }
}

fn eval_tm(t: &Tm, w: &World, env: &Env, dom: usize) -> usize {
    match t {
        Tm::Var(x) => env.get(x),
        Tm::App(fi, args) => {
            let mut cell = 0usize;
            for a in args.iter().rev() {
                cell = cell * dom + eval_tm(a, w, env, dom);
            }
            w.funcs[*fi][cell]
        }
    }
}

/// Skeleton evaluation: conditionals answer from the guess bits, everything
/// else is classical over the labeled worlds.
fn eval_ast(
    ast: &Ast,
    w: usize,
    worlds: &[&World],
    env: &mut Env,
    guess: u32,
    imap: &InstanceMap,
) -> bool {
    let dom = imap.dom;
    match ast {
        Ast::True => true,
        Ast::False => false,
        Ast::Atom(pi, args) => {
            let world = worlds[w];
            let mut cell = 0usize;
            for a in args.iter().rev() {
                cell = cell * dom + eval_tm(a, world, env, dom);
            }
            world.preds[*pi][cell]
        }
        Ast::Eq(a, b) => eval_tm(a, worlds[w], env, dom) == eval_tm(b, worlds[w], env, dom),
        Ast::Not(g) => !eval_ast(g, w, worlds, env, guess, imap),
        Ast::And(a, b) => {
            eval_ast(a, w, worlds, env, guess, imap) && eval_ast(b, w, worlds, env, guess, imap)
        }
        Ast::Or(a, b) => {
            eval_ast(a, w, worlds, env, guess, imap) || eval_ast(b, w, worlds, env, guess, imap)
        }
        Ast::Implies(a, b) => {
            !eval_ast(a, w, worlds, env, guess, imap) || eval_ast(b, w, worlds, env, guess, imap)
        }
        Ast::Forall(x, b) => (0..dom).all(|e| {
            env.0.push((x.clone(), e));
            let r = eval_ast(b, w, worlds, env, guess, imap);
            env.0.pop();
            r
        }),
        Ast::Exists(x, b) => (0..dom).any(|e| {
            env.0.push((x.clone(), e));
            let r = eval_ast(b, w, worlds, env, guess, imap);
            env.0.pop();
            r
        }),
        Ast::Cond(id, free) => guess >> imap.slot(*id, free, env) & 1 != 0,
    }
}

// ---------------------------------------------------------------------------
// Constraint systems
// ---------------------------------------------------------------------------

/// Order constraints on the plausibility of world sets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Lit {
    Bot(WorldSet),
    NBot(WorldSet),
    /// Strict comparison `Pl(x) > Pl(y)`.
    Gt(WorldSet, WorldSet),
    /// Its negation; beyond the bottom rule it is left to the assignment
    /// search.
    Ngt(WorldSet, WorldSet),
}

const MAX_NODES: usize = 64;

/// Try to refute a system outright; `false` means no measure of the
/// requested kind satisfies it. The empty set is bottom, and `Ngt(x, y)`
/// with a bottom `y` pins `x` at bottom, since nothing sits strictly below
/// bottom's value. In qualitative mode a set inside the union N0 of known
/// bottoms counts as bottom (A3) and a bottom part may be stripped from the
/// left side of a strict comparison (A2 with A3, using that the two sides
/// are disjoint); in plain mode only containment in a single known bottom
/// counts (A1). Kills: a non-bottom or strict left side that is itself
/// bottom, and a strict comparison whose endpoints are chained the other
/// way through subset and equal-at-bottom edges.
fn filter(lits: &[Lit], n: usize, qualitative: bool) -> bool {
    let mut bots = [WorldSet::EMPTY; MAX_NODES];
    let mut bcnt = 0usize;
    let mut n0 = WorldSet::EMPTY;
    for l in lits {
        if let Lit::Bot(s) = *l {
            bots[bcnt] = s;
            bcnt += 1;
            n0 = n0.union(s);
        }
    }
    fn covered(s: WorldSet, bots: &[WorldSet], n0: WorldSet, qualitative: bool) -> bool {
        if s.is_empty() {
            return true;
        }
        if qualitative {
            s.diff(n0).is_empty()
        } else {
            bots.iter().any(|&b| s.diff(b).is_empty())
        }
    }
    loop {
        let mut grew = false;
        for l in lits {
            if let Lit::Ngt(x, y) = *l {
                if covered(y, &bots[..bcnt], n0, qualitative)
                    && !covered(x, &bots[..bcnt], n0, qualitative)
                {
                    bots[bcnt] = x;
                    bcnt += 1;
                    n0 = n0.union(x);
                    grew = true;
                }
            }
        }
        if !grew {
            break;
        }
    }
    let mut nodes = [WorldSet::EMPTY; MAX_NODES];
    nodes[1] = WorldSet::full(n);
    let mut cnt = 2usize;
    let mut strict = [(0usize, 0usize); MAX_NODES];
    let mut scnt = 0usize;
    fn intern(nodes: &mut [WorldSet; MAX_NODES], cnt: &mut usize, s: WorldSet) -> Option<usize> {
        match nodes[..*cnt].iter().position(|&t| t == s) {
            Some(i) => Some(i),
            None if *cnt == MAX_NODES => None,
            None => {
                nodes[*cnt] = s;
                *cnt += 1;
                Some(*cnt - 1)
            }
        }
    }
    for l in lits {
        match *l {
            Lit::Bot(_) | Lit::Ngt(..) => {}
            Lit::NBot(s) => {
                if covered(s, &bots[..bcnt], n0, qualitative) {
                    return false;
                }
                let Some(i) = intern(&mut nodes, &mut cnt, s) else {
                    return true;
                };
                strict[scnt] = (i, 0);
                scnt += 1;
            }
            Lit::Gt(x, y) => {
                let x = if qualitative { x.diff(n0) } else { x };
                if covered(x, &bots[..bcnt], n0, qualitative) {
                    return false;
                }
                let (Some(i), Some(j)) = (
                    intern(&mut nodes, &mut cnt, x),
                    intern(&mut nodes, &mut cnt, y),
                ) else {
                    return true;
                };
                strict[scnt] = (i, j);
                scnt += 1;
            }
        }
    }
    let mut cov = [false; MAX_NODES];
    for i in 0..cnt {
        cov[i] = covered(nodes[i], &bots[..bcnt], n0, qualitative);
    }
    // reach[i] bit j set: a sound chain gives Pl(nodes[i]) <= Pl(nodes[j]).
    // Base edges: subset inclusions and the equalities at bottom; each
    // strict Pl(a) > Pl(b) also contributes Pl(b) <= Pl(a).
    let m = cnt;
    let mut reach = [0u64; MAX_NODES];
    for i in 0..m {
        for j in 0..m {
            if nodes[i].diff(nodes[j]).is_empty() || (cov[i] && cov[j]) {
                reach[i] |= 1 << j;
            }
        }
    }
    for &(a, b) in &strict[..scnt] {
        reach[b] |= 1 << a;
    }
    for k in 0..m {
        let rk = reach[k];
        for row in reach.iter_mut().take(m) {
            if *row >> k & 1 != 0 {
                *row |= rk;
            }
        }
    }
    // A strict comparison whose endpoints are also chained the other way
    // would force Pl(a) > Pl(a).
    for &(a, b) in &strict[..scnt] {
        if reach[a] >> b & 1 != 0 {
            return false;
        }
    }
    true
}

// ---------------------------------------------------------------------------
// Poset assignment search
// ---------------------------------------------------------------------------

struct Dfs<'a> {
    order: &'a [usize],
    lit_last: &'a [(usize, Lit)],
    poset: &'a PlausibilityPoset,
    n: usize,
    full: usize,
    qualitative: bool,
}

impl Dfs<'_> {
    /// Check the literals whose last involved set was assigned at `step`.
    fn check_at(&self, assign: &[usize], step: usize) -> bool {
        self.lit_last.iter().all(|&(p, l)| {
            p != step
                || match l {
                    Lit::Bot(s) => assign[s.0 as usize] == self.poset.bot(),
                    Lit::NBot(s) => assign[s.0 as usize] != self.poset.bot(),
                    Lit::Gt(x, y) => self.poset.lt(assign[y.0 as usize], assign[x.0 as usize]),
                    Lit::Ngt(x, y) => !self.poset.lt(assign[y.0 as usize], assign[x.0 as usize]),
                }
        })
    }

    fn rec(
        &self,
        step: usize,
        assign: &mut Vec<usize>,
        stats: &mut SearchStats,
    ) -> Option<ExplicitMeasure> {
        if step == self.order.len() {
            stats.leaves += 1;
            let m = ExplicitMeasure::new_unchecked(self.n, self.poset.clone(), assign.clone());
            if !self.qualitative {
                return Some(m);
            }
            return match m.check_qualitative() {
                Ok(None) => Some(m),
                _ => None,
            };
        }
        let mask = self.order[step];
        'next: for v in 0..self.poset.len() {
            // Monotone over the one-removed subsets, which were all
            // assigned earlier in popcount order, and below the carrier.
            for w in 0..self.n {
                let sub = mask & !(1 << w);
                if sub != mask && !self.poset.leq(assign[sub], v) {
                    continue 'next;
                }
            }
            if !self.poset.leq(v, assign[self.full]) {
                continue;
            }
            assign[mask] = v;
            if self.check_at(assign, step + 1) {
                if let Some(m) = self.rec(step + 1, assign, stats) {
                    return Some(m);
                }
            }
        }
        assign[mask] = usize::MAX;
        None
    }
}

/// Monotone poset assignments satisfying the literals, smallest catalog
/// poset first. In qualitative mode every complete assignment must also
/// pass the A2/A3 check, so a returned measure is qualitative outright.
fn assignment_search(
    n: usize,
    lits: &[Lit],
    catalog: &[PlausibilityPoset],
    qualitative: bool,
    stats: &mut SearchStats,
) -> Option<ExplicitMeasure> {
    let size = 1usize << n;
    let full = size - 1;
    let mut order: Vec<usize> = (1..full).collect();
    order.sort_by_key(|m| (m.count_ones(), *m));
    let pos = |mask: usize| -> usize {
        if mask == 0 || mask == full {
            0
        } else {
            order.iter().position(|&m| m == mask).unwrap() + 1
        }
    };
    let lit_last: Vec<(usize, Lit)> = lits
        .iter()
        .map(|&l| {
            let p = match l {
                Lit::Bot(s) | Lit::NBot(s) => pos(s.0 as usize),
                Lit::Gt(x, y) | Lit::Ngt(x, y) => pos(x.0 as usize).max(pos(y.0 as usize)),
            };
            (p, l)
        })
        .collect();
    for poset in catalog {
        let dfs = Dfs {
            order: &order,
            lit_last: &lit_last,
            poset,
            n,
            full,
            qualitative,
        };
        let mut assign = vec![usize::MAX; size];
        assign[0] = poset.bot();
        assign[full] = poset.top();
        if !dfs.check_at(&assign, 0) {
            continue;
        }
        if let Some(m) = dfs.rec(0, &mut assign, stats) {
            return Some(m);
        }
    }
    None
}

// ---------------------------------------------------------------------------
// Branch menus
// ---------------------------------------------------------------------------

const NO_LIT: Lit = Lit::Bot(WorldSet::EMPTY);

#[derive(Clone, Copy)]
struct Alt {
    lits: [Lit; 2],
    len: u8,
}

impl Alt {
    fn empty() -> Alt {
        Alt { lits: [NO_LIT; 2], len: 0 }
    }

    fn of1(a: Lit) -> Alt {
        Alt { lits: [a, NO_LIT], len: 1 }
    }

    fn of2(a: Lit, b: Lit) -> Alt {
        Alt { lits: [a, b], len: 2 }
    }
}

#[derive(Clone, Copy)]
struct Menu {
    alts: [Alt; 2],
    len: u8,
}

impl Menu {
    fn one(a: Alt) -> Menu {
        Menu { alts: [a, Alt::empty()], len: 1 }
    }

    fn two(a: Alt, b: Alt) -> Menu {
        Menu { alts: [a, b], len: 2 }
    }
}

/// The order facts one conditional instance can rest on, from its extension
/// parts `x` (antecedent with consequent) and `y` (antecedent against it).
/// A true instance holds through a bottom antecedent or the strict
/// comparison; a false one pins both facts negatively.
fn menu_for(truth: bool, x: WorldSet, y: WorldSet) -> Menu {
    let u = x.union(y);
    if truth {
        if u.is_empty() {
            return Menu::one(Alt::empty());
        }
        if x.is_empty() {
            return Menu::one(Alt::of1(Lit::Bot(u)));
        }
        Menu::two(Alt::of1(Lit::Bot(u)), Alt::of1(Lit::Gt(x, y)))
    } else {
        let pin = if y.is_empty() {
            Lit::Bot(x)
        } else {
            Lit::Ngt(x, y)
        };
        Menu::one(Alt::of2(Lit::NBot(u), pin))
    }
}

struct Ctx<'a> {
    n: usize,
    qualitative: bool,
    catalog: &'a [PlausibilityPoset],
}

/// True when the filter refutes every completion of the menus. A refuted
/// prefix refutes all its extensions, since extra literals only strengthen
/// a system; an exhausted budget just reports "not refuted".
fn refutes_every_branch(
    menus: &[Menu],
    d: usize,
    lits: &mut Vec<Lit>,
    ctx: &Ctx,
    budget: &mut u32,
    stats: &mut SearchStats,
) -> bool {
    if !lits.is_empty() {
        if *budget == 0 {
            return false;
        }
        *budget -= 1;
        stats.systems += 1;
        if !filter(lits, ctx.n, ctx.qualitative) {
            return true;
        }
    }
    if d == menus.len() {
        return false;
    }
    let menu = menus[d];
    for a in &menu.alts[..menu.len as usize] {
        let keep = lits.len();
        lits.extend_from_slice(&a.lits[..a.len as usize]);
        let r = refutes_every_branch(menus, d + 1, lits, ctx, budget, stats);
        lits.truncate(keep);
        if !r {
            return false;
        }
    }
    true
}

/// Walk the menus for one truth pattern and hand surviving complete systems
/// to the assignment search; the first verified witness wins.
fn settle<F>(
    menus: &[Menu],
    d: usize,
    lits: &mut Vec<Lit>,
    ctx: &Ctx,
    budget: &mut u32,
    stats: &mut SearchStats,
    verify: &mut F,
) -> Option<(SubjectiveStructure, usize)>
where
    F: FnMut(ExplicitMeasure) -> Option<(SubjectiveStructure, usize)>,
{
    if !lits.is_empty() && *budget > 0 {
        *budget -= 1;
        stats.systems += 1;
        if !filter(lits, ctx.n, ctx.qualitative) {
            return None;
        }
    }
    if d == menus.len() {
        if let Some(m) = assignment_search(ctx.n, lits, ctx.catalog, ctx.qualitative, stats) {
            if let Some(found) = verify(m) {
                return Some(found);
            }
            // The abstraction must agree with the real evaluator; a
            // candidate that does not verify is abandoned.
            debug_assert!(false, "witness disagreed with the evaluator");
        }
        return None;
    }
    let menu = menus[d];
    for a in &menu.alts[..menu.len as usize] {
        let keep = lits.len();
        lits.extend_from_slice(&a.lits[..a.len as usize]);
        if let Some(found) = settle(menus, d + 1, lits, ctx, budget, stats, verify) {
            return Some(found);
        }
        lits.truncate(keep);
    }
    None
}

// ---------------------------------------------------------------------------
// The plausibility pipeline
// ---------------------------------------------------------------------------

/// Per-label tables: instance membership columns and skeleton truth rows,
/// so a labeling's constraint sets and surviving guesses come from a few
/// word operations instead of re-evaluation.
struct Precomp {
    k: usize,
    words: usize,
    colx: Vec<u32>,
    coly: Vec<u32>,
    rows: Vec<u64>,
    masks: Vec<Vec<u64>>,
}

fn precompute(pool: &[World], ast: &Ast, conds: &[CondNode], imap: &InstanceMap) -> Precomp {
    let k = imap.total;
    let gcount = 1usize << k;
    let words = gcount.div_ceil(64);
    let mut colx = vec![0u32; pool.len()];
    let mut coly = vec![0u32; pool.len()];
    let mut rows = vec![0u64; pool.len() * words];
    for (li, w) in pool.iter().enumerate() {
        let ws = [w];
        for (ci, c) in conds.iter().enumerate() {
            let span = imap.dom.pow(c.free.len() as u32);
            for inst in 0..span {
                let gi = imap.offsets[ci] + inst;
                let mut env = Env(imap.values(&c.free, inst));
                if !eval_ast(&c.phi, 0, &ws, &mut env, 0, imap) {
                    continue;
                }
                if eval_ast(&c.psi, 0, &ws, &mut env, 0, imap) {
                    colx[li] |= 1 << gi;
                } else {
                    coly[li] |= 1 << gi;
                }
            }
        }
        let mut env = Env(Vec::new());
        for g in 0..gcount {
            if eval_ast(ast, 0, &ws, &mut env, g as u32, imap) {
                rows[li * words + (g >> 6)] |= 1u64 << (g & 63);
            }
        }
    }
    let mut masks = Vec::with_capacity(k);
    for i in 0..k {
        let mut m = vec![0u64; words];
        for g in 0..gcount {
            if g >> i & 1 == 1 {
                m[g >> 6] |= 1u64 << (g & 63);
            }
        }
        masks.push(m);
    }
    Precomp { k, words, colx, coly, rows, masks }
}

fn search_qpl(
    f: &Formula,
    vocab: &Vocabulary,
    opts: &SearchOpts,
) -> Result<SearchOutcome, SearchError> {
    let mut stats = SearchStats::default();
    let catalog = bounded_posets(opts.bounds.max_poset);
    let mut lits: Vec<Lit> = Vec::new();
    let mut scratch: Vec<usize> = Vec::new();
    for dom in 1..=opts.bounds.max_dom {
        let sp = Space::new(vocab, dom);
        if sp.label_count() > MAX_WORLD_LABELS {
            return Err(SearchError::TooLarge(format!(
                "{} world labelings over a domain of {dom}",
                sp.label_count()
            )));
        }
        let mut conds = Vec::new();
        let ast = compile(f, &sp, &mut conds)?;
        let imap = InstanceMap::new(&conds, dom);
        if imap.total > MAX_COND_INSTANCES {
            return Err(SearchError::TooLarge(format!(
                "{} conditional instances over a domain of {dom}",
                imap.total
            )));
        }
        let pool = sp.enumerate();
        let dens: Vec<Vec<usize>> = pool.iter().map(|w| sp.constants(w)).collect();
        let nested = conds.iter().any(|c| ast_has_cond(&c.phi) || ast_has_cond(&c.psi));
        let pre = if !nested && imap.total <= FAST_GUESS_BITS {
            Some(precompute(&pool, &ast, &conds, &imap))
        } else {
            None
        };
        let ptables = if matches!(opts.rigidity, Rigidity::Free) && dom > 1 {
            label_perm_tables(&sp, &pool)
        } else {
            Vec::new()
        };
        for n in 1..=opts.bounds.max_worlds {
            if pool.len() < n {
                continue;
            }
            if combination_count(pool.len() as u128, n as u128, false) > MAX_CONFIGS {
                return Err(SearchError::TooLarge(format!(
                    "labeling choices for {n} worlds over a domain of {dom}"
                )));
            }
            let mut combo: Vec<usize> = (0..n).collect();
            loop {
                if admissible(&combo, &dens, &opts.rigidity, vocab)
                    && orbit_minimal(&combo, &ptables, &mut scratch)
                {
                    stats.configs += 1;
                    let hit = match &pre {
                        Some(p) => try_config_fast(
                            f,
                            p,
                            &combo,
                            &pool,
                            &catalog,
                            &sp,
                            vocab,
                            opts.require_qualitative,
                            &mut lits,
                            &mut stats,
                        ),
                        None => {
                            let worlds: Vec<&World> = combo.iter().map(|&i| &pool[i]).collect();
                            try_config_slow(
                                f,
                                &ast,
                                &conds,
                                &imap,
                                &worlds,
                                &catalog,
                                &sp,
                                vocab,
                                opts.require_qualitative,
                                &mut stats,
                            )
                        }
                    };
                    if let Some((structure, world)) = hit {
                        return Ok(SearchOutcome::Found(Box::new(SearchWitness {
                            structure,
                            world,
                            stats,
                        })));
                    }
                }
                if !next_combination(&mut combo, pool.len()) {
                    break;
                }
            }
        }
    }
    Ok(SearchOutcome::Exhausted(stats))
}

#[allow(clippy::too_many_arguments)]
fn try_config_fast(
    f: &Formula,
    pre: &Precomp,
    combo: &[usize],
    pool: &[World],
    catalog: &[PlausibilityPoset],
    sp: &Space,
    vocab: &Vocabulary,
    qualitative: bool,
    lits: &mut Vec<Lit>,
    stats: &mut SearchStats,
) -> Option<(SubjectiveStructure, usize)> {
    let n = combo.len();
    let k = pre.k;
    let words = pre.words;
    let mut xs = [WorldSet::EMPTY; MAX_COND_INSTANCES];
    let mut ys = [WorldSet::EMPTY; MAX_COND_INSTANCES];
    for (wi, &li) in combo.iter().enumerate() {
        let (cx, cy) = (pre.colx[li], pre.coly[li]);
        for i in 0..k {
            if cx >> i & 1 != 0 {
                xs[i] = xs[i].union(WorldSet::singleton(wi));
            }
            if cy >> i & 1 != 0 {
                ys[i] = ys[i].union(WorldSet::singleton(wi));
            }
        }
    }
    let mut surv = [0u64; FAST_WORDS];
    for &li in combo {
        let row = &pre.rows[li * words..(li + 1) * words];
        for (s, r) in surv.iter_mut().zip(row) {
            *s |= r;
        }
    }
    if surv[..words].iter().all(|&x| x == 0) {
        return None;
    }
    stats.branches += surv[..words].iter().map(|x| u64::from(x.count_ones())).sum::<u64>();
    let mut mt = [Menu::one(Alt::empty()); MAX_COND_INSTANCES];
    let mut mf = [Menu::one(Alt::empty()); MAX_COND_INSTANCES];
    for i in 0..k {
        mt[i] = menu_for(true, xs[i], ys[i]);
        mf[i] = menu_for(false, xs[i], ys[i]);
    }
    // Truth values shared by every surviving guess give a base menu list;
    // the rest vary per guess.
    let mut base = [Menu::one(Alt::empty()); MAX_COND_INSTANCES + 1];
    let mut bcnt = 0usize;
    let mut vars = [0usize; MAX_COND_INSTANCES];
    let mut vcnt = 0usize;
    for i in 0..k {
        let mask = &pre.masks[i];
        let mut some_true = false;
        let mut some_false = false;
        for w in 0..words {
            some_true |= surv[w] & mask[w] != 0;
            some_false |= surv[w] & !mask[w] != 0;
        }
        match (some_true, some_false) {
            (true, false) => {
                base[bcnt] = mt[i];
                bcnt += 1;
            }
            (false, true) => {
                base[bcnt] = mf[i];
                bcnt += 1;
            }
            _ => {
                vars[vcnt] = i;
                vcnt += 1;
            }
        }
    }
    let ctx = Ctx { n, qualitative, catalog };
    let mut budget = REFUTE_BUDGET;
    let mut dead = [0u64; FAST_WORDS];
    if vcnt == 0 {
        lits.clear();
        if refutes_every_branch(&base[..bcnt], 0, lits, &ctx, &mut budget, stats) {
            return None;
        }
    } else {
        // A refutation using the shared truths plus a single varying bit
        // kills every guess that agrees on that bit.
        for pass in 0..2 {
            for &i in &vars[..vcnt] {
                base[bcnt] = if pass == 0 { mt[i] } else { mf[i] };
                lits.clear();
                if refutes_every_branch(&base[..bcnt + 1], 0, lits, &ctx, &mut budget, stats) {
                    for (d, &m) in dead.iter_mut().zip(&pre.masks[i]) {
                        *d |= if pass == 0 { m } else { !m };
                    }
                }
            }
            if (0..words).all(|w| surv[w] & !dead[w] == 0) {
                return None;
            }
        }
    }
    let mut menus = [Menu::one(Alt::empty()); MAX_COND_INSTANCES];
    for w in 0..words {
        let mut live = surv[w] & !dead[w];
        while live != 0 {
            let g = (w << 6) | live.trailing_zeros() as usize;
            live &= live - 1;
            for i in 0..k {
                menus[i] = if g >> i & 1 != 0 { mt[i] } else { mf[i] };
            }
            lits.clear();
            let mut sbudget = SETTLE_BUDGET;
            let mut verify = |m: ExplicitMeasure| {
                let interps: Vec<Interpretation> =
                    combo.iter().map(|&li| sp.to_interp(&pool[li])).collect();
                let s =
                    SubjectiveStructure::new(sp.dom, Measure::Explicit(m), interps, vocab.clone())
                        .expect("search worlds fit the vocabulary");
                let v = Valuation::new();
                (0..n)
                    .find(|&w0| eval_subj(&s, w0, &v, f).unwrap_or(false))
                    .map(|w0| (s, w0))
            };
            if let Some(found) =
                settle(&menus[..k], 0, lits, &ctx, &mut sbudget, stats, &mut verify)
            {
                return Some(found);
            }
        }
    }
    None
}

/// Fallback for nested conditionals or large instance counts: re-evaluate
/// the skeleton and the instance parts per guess.
#[allow(clippy::too_many_arguments)]
fn try_config_slow(
    f: &Formula,
    ast: &Ast,
    conds: &[CondNode],
    imap: &InstanceMap,
    worlds: &[&World],
    catalog: &[PlausibilityPoset],
    sp: &Space,
    vocab: &Vocabulary,
    qualitative: bool,
    stats: &mut SearchStats,
) -> Option<(SubjectiveStructure, usize)> {
    let n = worlds.len();
    let k = imap.total;
    for guess in 0u32..(1 << k) {
        let mut env = Env(Vec::new());
        if !(0..n).any(|w| eval_ast(ast, w, worlds, &mut env, guess, imap)) {
            continue;
        }
        stats.branches += 1;
        // Extensions of every conditional instance under this guess.
        let mut parts: Vec<(WorldSet, WorldSet)> = Vec::with_capacity(k);
        for c in conds {
            let count = imap.dom.pow(c.free.len() as u32);
            for inst in 0..count {
                let mut env = Env(imap.values(&c.free, inst));
                let mut x = WorldSet::EMPTY;
                let mut y = WorldSet::EMPTY;
                for w in 0..n {
                    if !eval_ast(&c.phi, w, worlds, &mut env, guess, imap) {
                        continue;
                    }
                    if eval_ast(&c.psi, w, worlds, &mut env, guess, imap) {
                        x = x.union(WorldSet::singleton(w));
                    } else {
                        y = y.union(WorldSet::singleton(w));
                    }
                }
                parts.push((x, y));
            }
        }
        let true_slots: Vec<usize> = (0..k).filter(|i| guess >> i & 1 != 0).collect();
        for alt in 0u32..(1 << true_slots.len()) {
            let mut lits: Vec<Lit> = Vec::with_capacity(k + true_slots.len());
            for (i, &(x, y)) in parts.iter().enumerate() {
                if guess >> i & 1 != 0 {
                    let pick = true_slots.iter().position(|&s| s == i).unwrap();
                    if alt >> pick & 1 != 0 {
                        lits.push(Lit::Bot(x.union(y)));
                    } else {
                        lits.push(Lit::Gt(x, y));
                    }
                } else {
                    lits.push(Lit::NBot(x.union(y)));
                    if y.is_empty() {
                        lits.push(Lit::Bot(x));
                    } else {
                        lits.push(Lit::Ngt(x, y));
                    }
                }
            }
            stats.systems += 1;
            if !filter(&lits, n, qualitative) {
                continue;
            }
            if let Some(m) = assignment_search(n, &lits, catalog, qualitative, stats) {
                let interps: Vec<Interpretation> =
                    worlds.iter().map(|w| sp.to_interp(w)).collect();
                let s =
                    SubjectiveStructure::new(sp.dom, Measure::Explicit(m), interps, vocab.clone())
                        .expect("search worlds fit the vocabulary");
                // The abstraction must agree with the real evaluator; a
                // candidate that does not verify is abandoned.
                let v = Valuation::new();
                for w in 0..n {
                    if eval_subj(&s, w, &v, f).unwrap_or(false) {
                        return Some((s, w));
                    }
                }
                debug_assert!(false, "witness disagreed with the evaluator");
            }
        }
    }
    None
}

// ---------------------------------------------------------------------------
// Direct enumeration for the concrete backends
// ---------------------------------------------------------------------------

fn class_measures(class: StructClass, n: usize) -> Vec<Measure> {
    let mut out = Vec::new();
    match class {
        StructClass::Kappa => {
            let palette = [Kappa::Fin(0), Kappa::Fin(1), Kappa::Fin(2), Kappa::Inf];
            let mut idx = vec![0usize; n];
            loop {
                if idx.contains(&0) {
                    let ranks: Vec<Kappa> = idx.iter().map(|&i| palette[i]).collect();
                    out.push(Measure::Kappa(KappaRanking::new(ranks).unwrap()));
                }
                if !bump(&mut idx, palette.len()) {
                    break;
                }
            }
        }
        StructClass::Poss => {
            let palette = [
                Rat::new(1, 4),
                Rat::new(1, 2),
                Rat::new(3, 4),
                Rat::new(1, 1),
            ];
            let mut idx = vec![0usize; n];
            loop {
                if idx.contains(&3) {
                    let ws: Vec<Rat> = idx.iter().map(|&i| palette[i]).collect();
                    out.push(Measure::Possibility(PossibilityMeasure::new(ws).unwrap()));
                }
                if !bump(&mut idx, palette.len()) {
                    break;
                }
            }
        }
        StructClass::Pref | StructClass::PrefWf => {
            for ord in all_strict_orders(n) {
                out.push(Measure::Preferential(PreferentialOrder::new(ord).unwrap()));
            }
        }
        StructClass::Eps => {
            let mut idx = vec![0usize; n];
            loop {
                if idx.contains(&0) {
                    let terms: Vec<(Rat, u32)> =
                        idx.iter().map(|&e| (Rat::new(1, 1), e as u32)).collect();
                    out.push(Measure::Ppd(EpsPolyPPD::new(terms).unwrap()));
                }
                if !bump(&mut idx, 4) {
                    break;
                }
            }
        }
        StructClass::Qpl => unreachable!("the plausibility class uses the pipeline"),
    }
    out
}

fn search_direct(
    f: &Formula,
    vocab: &Vocabulary,
    class: StructClass,
    opts: &SearchOpts,
) -> Result<SearchOutcome, SearchError> {
    let mut stats = SearchStats::default();
    for dom in 1..=opts.bounds.max_dom {
        let sp = Space::new(vocab, dom);
        if sp.label_count() > MAX_WORLD_LABELS {
            return Err(SearchError::TooLarge(format!(
                "{} world labelings over a domain of {dom}",
                sp.label_count()
            )));
        }
        let pool = sp.enumerate();
        let dens: Vec<Vec<usize>> = pool.iter().map(|w| sp.constants(w)).collect();
        for n in 1..=opts.bounds.max_worlds {
            if combination_count(pool.len() as u128, n as u128, true) > MAX_CONFIGS {
                return Err(SearchError::TooLarge(format!(
                    "labeling choices for {n} worlds over a domain of {dom}"
                )));
            }
            let measures = class_measures(class, n);
            let mut combo = vec![0usize; n];
            loop {
                if admissible(&combo, &dens, &opts.rigidity, vocab) {
                    stats.configs += 1;
                    let interps: Vec<Interpretation> =
                        combo.iter().map(|&i| sp.to_interp(&pool[i])).collect();
                    for m in &measures {
                        stats.branches += 1;
                        let s = SubjectiveStructure::new(
                            dom,
                            m.clone(),
                            interps.clone(),
                            vocab.clone(),
                        )
                        .expect("search worlds fit the vocabulary");
                        let v = Valuation::new();
                        for w in 0..n {
                            if eval_subj(&s, w, &v, f).expect("closed formula over its vocabulary")
                            {
                                return Ok(SearchOutcome::Found(Box::new(SearchWitness {
                                    structure: s,
                                    world: w,
                                    stats,
                                })));
                            }
                        }
                    }
                }
                if !next_multiset(&mut combo, pool.len()) {
                    break;
                }
            }
        }
    }
    Ok(SearchOutcome::Exhausted(stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios;
    use crate::syntax::{parse, Lang};

    fn small() -> SearchOpts {
        SearchOpts {
            bounds: SearchBounds {
                max_dom: 2,
                max_worlds: 3,
                max_poset: 5,
            },
            rigidity: Rigidity::Free,
            require_qualitative: true,
        }
    }

    #[test]
    fn plain_satisfiable_formula_gets_a_model() {
        let f = parse("P(c) & ~Q(c)", Lang::Subj).unwrap();
        match find_model(&f, StructClass::Qpl, &small()).unwrap() {
            SearchOutcome::Found(w) => {
                let v = Valuation::new();
                assert!(eval_subj(&w.structure, w.world, &v, &f).unwrap());
            }
            SearchOutcome::Exhausted(_) => panic!("satisfiable formula missed"),
        }
    }

    #[test]
    fn contradictions_exhaust_the_space() {
        let f = parse("P(c) & ~P(c)", Lang::Subj).unwrap();
        match find_model(&f, StructClass::Qpl, &small()).unwrap() {
            SearchOutcome::Exhausted(stats) => assert!(stats.configs > 0),
            SearchOutcome::Found(_) => panic!("contradiction satisfied"),
        }
    }

    #[test]
    fn conditional_witnesses_verify_against_the_evaluator() {
        let f = parse("(P(c) => Q(c)) & ~(true => false) & (true => ~Q(c))", Lang::Subj).unwrap();
        match find_model(&f, StructClass::Qpl, &small()).unwrap() {
            SearchOutcome::Found(w) => {
                let v = Valuation::new();
                assert!(eval_subj(&w.structure, w.world, &v, &f).unwrap());
            }
            SearchOutcome::Exhausted(_) => panic!("satisfiable conditional missed"),
        }
    }

    #[test]
    fn countermodel_search_refutes_non_theorems() {
        let f = parse("(P(c) => Q(c)) -> (true => Q(c))", Lang::Subj).unwrap();
        match find_countermodel(&f, StructClass::Qpl, &small()).unwrap() {
            SearchOutcome::Found(w) => {
                let v = Valuation::new();
                assert!(!eval_subj(&w.structure, w.world, &v, &f).unwrap());
            }
            SearchOutcome::Exhausted(_) => panic!("invalid implication survived"),
        }
    }

    #[test]
    fn valid_formulas_have_no_countermodel() {
        let f = parse("((true => P(c)) & (true => Q(c))) -> (true => P(c) & Q(c))", Lang::Subj).unwrap();
        match find_countermodel(&f, StructClass::Qpl, &small()).unwrap() {
            SearchOutcome::Exhausted(stats) => assert!(stats.configs > 0),
            SearchOutcome::Found(_) => panic!("axiom instance refuted"),
        }
    }

    #[test]
    fn conjoining_beliefs_fails_on_merely_monotone_measures() {
        // The same instance that has no qualitative countermodel loses its
        // validity once only A1 is required of the measure.
        let f = parse("((true => P(c)) & (true => Q(c))) -> (true => P(c) & Q(c))", Lang::Subj).unwrap();
        let opts = SearchOpts {
            require_qualitative: false,
            ..small()
        };
        match find_countermodel(&f, StructClass::Qpl, &opts).unwrap() {
            SearchOutcome::Found(w) => {
                let v = Valuation::new();
                assert!(!eval_subj(&w.structure, w.world, &v, &f).unwrap());
            }
            SearchOutcome::Exhausted(_) => panic!("monotone countermodel missed"),
        }
    }

    #[test]
    fn backend_search_finds_ranked_models() {
        let f = parse("(P(c) => Q(c)) & ~(true => false)", Lang::Subj).unwrap();
        for class in [
            StructClass::Kappa,
            StructClass::Poss,
            StructClass::Pref,
            StructClass::Eps,
        ] {
            match find_model(&f, class, &small()).unwrap() {
                SearchOutcome::Found(w) => {
                    let v = Valuation::new();
                    assert!(eval_subj(&w.structure, w.world, &v, &f).unwrap());
                }
                SearchOutcome::Exhausted(_) => panic!("missed in {class:?}"),
            }
        }
    }

    #[test]
    fn rigidity_modes_split_the_tweety_report() {
        let f = scenarios::tweety_sentence().and(Formula::nec(Formula::False).neg());
        // With a rigid constant the pair is inconsistent on monotonicity
        // grounds alone.
        let opts = SearchOpts {
            rigidity: Rigidity::AllRigid,
            require_qualitative: false,
            ..small()
        };
        match find_model(&f, StructClass::Qpl, &opts).unwrap() {
            SearchOutcome::Exhausted(stats) => assert!(stats.configs > 0),
            SearchOutcome::Found(_) => panic!("rigid reading satisfied"),
        }
        // Letting the constant drift restores a model at two worlds.
        let opts = SearchOpts {
            rigidity: Rigidity::RequireNonrigid("tweety".into()),
            ..opts
        };
        match find_model(&f, StructClass::Qpl, &opts).unwrap() {
            SearchOutcome::Found(w) => {
                let v = Valuation::new();
                assert!(eval_subj(&w.structure, w.world, &v, &f).unwrap());
            }
            SearchOutcome::Exhausted(_) => panic!("nonrigid reading missed"),
        }
    }

    #[test]
    fn qualitative_measures_admit_no_finite_tweety_model() {
        // Within these bounds not even a drifting constant saves the pair
        // once A2/A3 are required: the known two-world escape breaks A3,
        // and the qualitative escapes are infinite.
        let f = scenarios::tweety_sentence().and(Formula::nec(Formula::False).neg());
        match find_model(&f, StructClass::Qpl, &small()).unwrap() {
            SearchOutcome::Exhausted(stats) => assert!(stats.configs > 0),
            SearchOutcome::Found(_) => panic!("qualitative escape within bounds"),
        }
    }

    #[test]
    fn the_bottom_encoding_of_rigidity_needs_qualitativeness() {
        // exists x N(x = tweety) pins the constant exactly when A2/A3
        // hold. A merely monotone measure can put every single mismatch
        // set at bottom while the constant still drifts, so the encoded
        // KB regains a model there.
        let enc = parse(
            "(exists x (N (x = tweety))) & (forall x (Bird(x) => Fly(x))) \
             & (true => Bird(tweety) & ~Fly(tweety)) & ~(N false)",
            Lang::Subj,
        )
        .unwrap();
        match find_model(&enc, StructClass::Qpl, &small()).unwrap() {
            SearchOutcome::Exhausted(stats) => assert!(stats.configs > 0),
            SearchOutcome::Found(_) => panic!("encoded rigidity satisfied qualitatively"),
        }
        let opts = SearchOpts {
            require_qualitative: false,
            ..small()
        };
        match find_model(&enc, StructClass::Qpl, &opts).unwrap() {
            SearchOutcome::Found(w) => {
                let v = Valuation::new();
                assert!(eval_subj(&w.structure, w.world, &v, &enc).unwrap());
            }
            SearchOutcome::Exhausted(_) => panic!("monotone reading missed"),
        }
    }

    #[test]
    fn open_and_statistical_formulas_are_rejected() {
        let f = parse("P(x)", Lang::Subj).unwrap();
        assert!(matches!(
            find_model(&f, StructClass::Qpl, &small()),
            Err(SearchError::NotClosed(_))
        ));
        let f = parse("P(x1) =[x1]=> Q(x1)", Lang::Stat).unwrap();
        assert!(matches!(
            find_model(&f, StructClass::Qpl, &small()),
            Err(SearchError::StatConditional)
        ));
    }
}
