//! Workbench for first-order conditional logic under plausibility semantics.
//!
//! The crate is organized around a small number of layers:
//!
//! * [`syntax`]: terms and formulas for the subjective language (one-place
//!   conditional `=>`) and the statistical language (`=[x1,..]=>`), together
//!   with a parser, printer, and the substitutability discipline.
//! * [`order`] and [`plausibility`]: finite pointed posets of plausibility
//!   values, plausibility measures over finite and finite-or-cofinite world
//!   sets, and the qualitativeness conditions (A2, A3 and their infinitary
//!   strengthenings A2*, A2†, A3*).
//! * [`backends`]: possibility measures, κ-rankings, preferential orders and
//!   polynomial parametrized probability distributions, each with a direct
//!   conditional-satisfaction test and an embedding into plausibility.
//! * [`subjective`] and [`statistical`]: model checking for the two
//!   languages over finite structures.
//! * [`scenarios`]: the symbolically-countable structures (lottery, crooked
//!   lottery, and friends) that separate the semantics.
//! * [`axioms`]: axiom-schema instantiation, derivation checking, random
//!   validity sweeps, and bounded countermodel search.
//!
//! Scalar degrees (possibility values, PPD coefficients) are generic over
//! [`Scalar`]; the crate-level aliases fix them to exact rationals so tests
//! and demos never depend on float rounding.

pub mod axioms;
pub mod backends;
pub mod gen;
pub mod order;
pub mod plausibility;
pub mod scenarios;
pub mod statistical;
pub mod subjective;
pub mod syntax;

/// Exact rational scalar used by the default type aliases.
pub type Rat = num_rational::Rational64;

/// Numeric degrees a graded backend can carry: possibility values in
/// `[0, 1]`, PPD coefficients, and similar. Ordered comparison is partial so
/// float types qualify alongside exact rationals.
pub trait Scalar: num_traits::Num + PartialOrd + Clone + std::fmt::Debug {}

impl<T: num_traits::Num + PartialOrd + Clone + std::fmt::Debug> Scalar for T {}

/// A subset of a small finite world space, packed into a word.
///
/// Worlds are indices `0..n` with `n <= 64`; most code paths cap `n` well
/// below that. `WorldSet` is `Copy` and all set algebra is branch-free.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct WorldSet(pub u64);

impl WorldSet {
    pub const EMPTY: WorldSet = WorldSet(0);

    pub fn full(n: usize) -> WorldSet {
        assert!(n <= 64, "world space too large for WorldSet");
        if n == 64 {
            WorldSet(!0)
        } else {
            WorldSet((1u64 << n) - 1)
        }
    }

    pub fn singleton(i: usize) -> WorldSet {
        assert!(i < 64);
        WorldSet(1u64 << i)
    }

    pub fn contains(self, i: usize) -> bool {
        i < 64 && self.0 & (1u64 << i) != 0
    }

    pub fn insert(&mut self, i: usize) {
        assert!(i < 64);
        self.0 |= 1u64 << i;
    }

    pub fn union(self, other: WorldSet) -> WorldSet {
        WorldSet(self.0 | other.0)
    }

    pub fn inter(self, other: WorldSet) -> WorldSet {
        WorldSet(self.0 & other.0)
    }

    pub fn diff(self, other: WorldSet) -> WorldSet {
        WorldSet(self.0 & !other.0)
    }

    /// Complement relative to a world space of size `n`.
    pub fn complement(self, n: usize) -> WorldSet {
        WorldSet::full(n).diff(self)
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_subset(self, other: WorldSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_disjoint(self, other: WorldSet) -> bool {
        self.0 & other.0 == 0
    }

    /// Iterate over member indices in increasing order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let i = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(i)
            }
        })
    }

    /// All subsets of a world space of size `n`, in mask order.
    pub fn all(n: usize) -> impl Iterator<Item = WorldSet> {
        assert!(n < 64, "subset enumeration needs n < 64");
        (0..(1u64 << n)).map(WorldSet)
    }
}
