//! Finite pointed posets of plausibility values and the lub-closure that
//! turns a strict preference order on worlds into a plausibility domain.
//!
//! The preference order enters flipped: each world `w` contributes a base
//! value `d_w`, and `d_v < d_w` exactly when `w` is preferred to `v`. The
//! closure adds least upper bounds for every subset of base values; closure
//! elements are canonicalized as antichains of the preference order (the
//! minimal worlds of the subset), which gives a unique normal form and a
//! constant-time lub lookup.

use crate::WorldSet;
use std::cmp::Ordering;

/// Square bit matrix; rows are packed into `u64` words.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BitMat {
    n: usize,
    stride: usize,
    bits: Vec<u64>,
}

impl BitMat {
    pub fn new(n: usize) -> BitMat {
        let stride = n.div_ceil(64);
        BitMat {
            n,
            stride,
            bits: vec![0; stride * n],
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.stride + j / 64] >> (j % 64) & 1 != 0
    }

    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        let word = &mut self.bits[i * self.stride + j / 64];
        if value {
            *word |= 1 << (j % 64);
        } else {
            *word &= !(1 << (j % 64));
        }
    }

    fn or_row_into(&mut self, src: usize, dst: usize) {
        for k in 0..self.stride {
            let v = self.bits[src * self.stride + k];
            self.bits[dst * self.stride + k] |= v;
        }
    }

    /// Reflexive-transitive closure in place.
    pub fn reflexive_transitive_close(&mut self) {
        for i in 0..self.n {
            self.set(i, i, true);
        }
        for k in 0..self.n {
            for i in 0..self.n {
                if self.get(i, k) {
                    self.or_row_into(k, i);
                }
            }
        }
    }
}

/// A violation found while validating a pointed poset.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum PosetViolation {
    #[error("element {0} is not related to itself")]
    Reflexivity(usize),
    #[error("elements {0} and {1} are mutually <= but distinct")]
    Antisymmetry(usize, usize),
    #[error("{0} <= {1} <= {2} but not {0} <= {2}")]
    Transitivity(usize, usize, usize),
    #[error("bottom is not below element {0}")]
    BotNotLeast(usize),
    #[error("top is not above element {0}")]
    TopNotGreatest(usize),
}

/// Finite partial order of plausibility values with distinguished bottom and
/// top. Elements are ids `0..len`. `bot == top` is allowed (the degenerate
/// single-point domain).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PlausibilityPoset {
    leq: BitMat,
    bot: usize,
    top: usize,
}

impl PlausibilityPoset {
    /// Build from a list of `a <= b` pairs; the reflexive-transitive closure
    /// is taken automatically. Call [`PlausibilityPoset::validate`] to check
    /// antisymmetry and the bot/top bounds.
    pub fn from_leq_pairs(n: usize, pairs: &[(usize, usize)], bot: usize, top: usize) -> Self {
        assert!(bot < n && top < n, "bot/top out of range");
        let mut leq = BitMat::new(n);
        for &(a, b) in pairs {
            assert!(a < n && b < n, "pair out of range");
            leq.set(a, b, true);
        }
        for i in 0..n {
            leq.set(bot, i, true);
            leq.set(i, top, true);
        }
        leq.reflexive_transitive_close();
        PlausibilityPoset { leq, bot, top }
    }

    /// Build from an arbitrary relation matrix, unvalidated.
    pub fn from_matrix(leq: BitMat, bot: usize, top: usize) -> Self {
        assert!(bot < leq.size() && top < leq.size());
        PlausibilityPoset { leq, bot, top }
    }

    /// The chain `0 < 1 < ... < n-1`.
    pub fn chain(n: usize) -> Self {
        assert!(n >= 1);
        let mut leq = BitMat::new(n);
        for i in 0..n {
            for j in i..n {
                leq.set(i, j, true);
            }
        }
        PlausibilityPoset {
            leq,
            bot: 0,
            top: n - 1,
        }
    }

    pub fn len(&self) -> usize {
        self.leq.size()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn bot(&self) -> usize {
        self.bot
    }

    pub fn top(&self) -> usize {
        self.top
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.leq.get(a, b)
    }

    pub fn lt(&self, a: usize, b: usize) -> bool {
        a != b && self.leq.get(a, b)
    }

    pub fn cmp(&self, a: usize, b: usize) -> Option<Ordering> {
        match (self.leq(a, b), self.leq(b, a)) {
            (true, true) => Some(Ordering::Equal),
            (true, false) => Some(Ordering::Less),
            (false, true) => Some(Ordering::Greater),
            (false, false) => None,
        }
    }

    /// Check the order laws and the bottom/top bounds.
    pub fn validate(&self) -> Result<(), PosetViolation> {
        let n = self.len();
        for i in 0..n {
            if !self.leq(i, i) {
                return Err(PosetViolation::Reflexivity(i));
            }
            if !self.leq(self.bot, i) {
                return Err(PosetViolation::BotNotLeast(i));
            }
            if !self.leq(i, self.top) {
                return Err(PosetViolation::TopNotGreatest(i));
            }
        }
        for a in 0..n {
            for b in 0..n {
                if a != b && self.leq(a, b) && self.leq(b, a) {
                    return Err(PosetViolation::Antisymmetry(a, b));
                }
            }
        }
        for a in 0..n {
            for b in 0..n {
                if !self.leq(a, b) {
                    continue;
                }
                for c in 0..n {
                    if self.leq(b, c) && !self.leq(a, c) {
                        return Err(PosetViolation::Transitivity(a, b, c));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Validate a pointed poset, reporting the first violation found.
pub fn validate_poset(p: &PlausibilityPoset) -> Result<(), PosetViolation> {
    p.validate()
}

/// The input to [`lub_close`] was not a strict partial order.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum StrictOrderViolation {
    #[error("world {0} precedes itself")]
    Irreflexivity(usize),
    #[error("{0} < {1} < {2} but not {0} < {2}")]
    Transitivity(usize, usize, usize),
}

/// Check that `lt` is irreflexive and transitive.
pub fn validate_strict_order(lt: &BitMat) -> Result<(), StrictOrderViolation> {
    let n = lt.size();
    for i in 0..n {
        if lt.get(i, i) {
            return Err(StrictOrderViolation::Irreflexivity(i));
        }
    }
    for a in 0..n {
        for b in 0..n {
            if !lt.get(a, b) {
                continue;
            }
            for c in 0..n {
                if lt.get(b, c) && !lt.get(a, c) {
                    return Err(StrictOrderViolation::Transitivity(a, b, c));
                }
            }
        }
    }
    Ok(())
}

/// Lub-closure of the base plausibility values induced by a preference
/// order. Element ids index [`LubClosure::antichains`]; the id assigned to a
/// world set is the antichain of its preference-minimal worlds.
#[derive(Clone, Debug)]
pub struct LubClosure {
    worlds: usize,
    pref: BitMat,
    antichains: Vec<WorldSet>,
    values: PlausibilityPoset,
    assign: Vec<usize>,
}

impl LubClosure {
    pub fn worlds(&self) -> usize {
        self.worlds
    }

    pub fn values(&self) -> &PlausibilityPoset {
        &self.values
    }

    pub fn antichains(&self) -> &[WorldSet] {
        &self.antichains
    }

    /// Closure element holding the lub of `{d_w : w in a}`.
    pub fn value_of(&self, a: WorldSet) -> usize {
        self.assign[a.0 as usize]
    }

    /// Base element `d_w`, i.e. the singleton antichain of `w`.
    pub fn base_element(&self, w: usize) -> usize {
        self.value_of(WorldSet::singleton(w))
    }

    /// Preference-minimal worlds of a set; the canonical antichain of its
    /// lub.
    pub fn minimal_worlds(&self, a: WorldSet) -> WorldSet {
        minimal_worlds(&self.pref, a)
    }
}

fn minimal_worlds(pref: &BitMat, a: WorldSet) -> WorldSet {
    let mut out = WorldSet::EMPTY;
    for w in a.iter() {
        if !a.iter().any(|v| v != w && pref.get(v, w)) {
            out.insert(w);
        }
    }
    out
}

/// Closure of the base order `d_v < d_w iff w ≺ v` under least upper
/// bounds. `pref.get(a, b)` reads "world a is preferred to world b".
pub fn lub_close(n_worlds: usize, pref: &BitMat) -> Result<LubClosure, StrictOrderViolation> {
    assert_eq!(pref.size(), n_worlds);
    assert!(n_worlds <= 16, "lub_close caps at 16 worlds");
    validate_strict_order(pref)?;

    let mut antichains = Vec::new();
    let mut id_of = vec![usize::MAX; 1usize << n_worlds];
    for mask in WorldSet::all(n_worlds) {
        let is_antichain = mask
            .iter()
            .all(|w| !mask.iter().any(|v| v != w && pref.get(v, w)));
        if is_antichain {
            id_of[mask.0 as usize] = antichains.len();
            antichains.push(mask);
        }
    }

    let m = antichains.len();
    let mut leq = BitMat::new(m);
    for (i, s) in antichains.iter().enumerate() {
        for (j, t) in antichains.iter().enumerate() {
            // d_s <= d_t in the base order iff t == s or t ≺ s; the lub of S
            // is below the lub of T iff every member of S is dominated.
            let below = s
                .iter()
                .all(|sw| t.iter().any(|tw| tw == sw || pref.get(tw, sw)));
            if below {
                leq.set(i, j, true);
            }
        }
    }

    let bot = id_of[WorldSet::EMPTY.0 as usize];
    let top = id_of[minimal_worlds(pref, WorldSet::full(n_worlds)).0 as usize];
    let values = PlausibilityPoset::from_matrix(leq, bot, top);
    debug_assert_eq!(values.validate(), Ok(()));

    let assign = (0..(1u64 << n_worlds))
        .map(|mask| id_of[minimal_worlds(pref, WorldSet(mask)).0 as usize])
        .collect();

    Ok(LubClosure {
        worlds: n_worlds,
        pref: pref.clone(),
        antichains,
        values,
        assign,
    })
}

/// The biconditional characterizing the embedded preferential order: holds
/// iff every world of `a - b` is beaten by a world of `b` that no world of
/// `a - b` beats in turn.
pub fn prec_embed_leq(pref: &BitMat, a: WorldSet, b: WorldSet) -> bool {
    a.diff(b).iter().all(|w| {
        b.iter().any(|wp| {
            pref.get(wp, w) && !a.diff(b).iter().any(|wpp| pref.get(wpp, wp))
        })
    })
}
