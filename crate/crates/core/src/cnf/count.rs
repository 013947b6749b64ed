use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Clause, CnfError, CnfFormula, Literal};

pub const DEFAULT_COUNT_CAP: u32 = 30;
/// Counts up to `2^62` fit comfortably in a `u64`.
const HARD_CAP: u32 = 62;
/// Blocks of 64 assignments below which counting stays on one thread.
const PARALLEL_BLOCKS: u64 = 1 << 12;

/// Number of satisfying assignments `k_S`, always in `[0, 2^n]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ModelCount(u64);

impl ModelCount {
    /// Returns `None` if `k > 2^n`.
    pub fn new(k: u64, n: u32) -> Option<Self> {
        (n >= 64 || k <= 1u64 << n).then_some(ModelCount(k))
    }

    pub fn get(self) -> u64 {
        self.0
    }
}

/// Exhaustive model counter with a configurable variable cap.
#[derive(Debug, Clone, Copy)]
pub struct ModelCounter {
    cap: u32,
}

impl Default for ModelCounter {
    fn default() -> Self {
        ModelCounter {
            cap: DEFAULT_COUNT_CAP,
        }
    }
}

impl ModelCounter {
    pub fn new() -> Self {
        Self::default()
    }

    /// Caps above 62 are lowered to 62.
    pub fn with_cap(cap: u32) -> Self {
        ModelCounter {
            cap: cap.min(HARD_CAP),
        }
    }

    pub fn cap(&self) -> u32 {
        self.cap
    }

    pub fn count(&self, f: &CnfFormula) -> Result<ModelCount, CnfError> {
        let n = f.num_vars();
        if n > self.cap {
            return Err(CnfError::CapacityExceeded { n, cap: self.cap });
        }
        let clauses: Vec<Vec<Literal>> =
            f.clauses().iter().map(|c| c.literals().to_vec()).collect();
        let blocks = if n <= 6 { 1 } else { 1u64 << (n - 6) };
        let valid = if n >= 6 { u64::MAX } else { (1u64 << (1u64 << n)) - 1 };
        let total = if blocks >= PARALLEL_BLOCKS {
            (0..blocks)
                .into_par_iter()
                .map(|b| count_block(&clauses, n, b, valid))
                .sum()
        } else {
            (0..blocks).map(|b| count_block(&clauses, n, b, valid)).sum()
        };
        Ok(ModelCount(total))
    }
}

/// `count_models` with the default cap of 30 variables.
pub fn count_models(f: &CnfFormula) -> Result<ModelCount, CnfError> {
    ModelCounter::default().count(f)
}

/// Lane patterns for the six low variables within a block of 64
/// assignments: lane `j` holds assignment `64 * block + j`.
const LOW_LANES: [u64; 6] = [
    0xAAAA_AAAA_AAAA_AAAA,
    0xCCCC_CCCC_CCCC_CCCC,
    0xF0F0_F0F0_F0F0_F0F0,
    0xFF00_FF00_FF00_FF00,
    0xFFFF_0000_FFFF_0000,
    0xFFFF_FFFF_0000_0000,
];

#[inline]
fn var_word(var: u32, block: u64) -> u64 {
    if var < 6 {
        LOW_LANES[var as usize]
    } else if (block >> (var - 6)) & 1 == 1 {
        u64::MAX
    } else {
        0
    }
}

fn count_block(clauses: &[Vec<Literal>], n: u32, block: u64, valid: u64) -> u64 {
    debug_assert!(n <= HARD_CAP);
    let mut sat = valid;
    for clause in clauses {
        let mut c = 0u64;
        for lit in clause {
            let w = var_word(lit.var, block);
            c |= if lit.negated { !w } else { w };
        }
        sat &= c;
        if sat == 0 {
            return 0;
        }
    }
    u64::from(sat.count_ones())
}

/// Random `k`-CNF over `n` variables: each clause draws `k` distinct
/// variables uniformly and negates each with probability 1/2.
///
/// # Panics
/// If `k == 0`, `k > n` or `m == 0`.
pub fn random_kcnf<R: Rng + ?Sized>(n: u32, m: usize, k: usize, rng: &mut R) -> CnfFormula {
    assert!(k >= 1 && k <= n as usize && m >= 1, "invalid k-CNF shape");
    let clauses = (0..m)
        .map(|_| {
            let lits = sample(rng, n as usize, k).into_iter().map(|v| Literal {
                var: v as u32,
                negated: rng.random_bool(0.5),
            });
            Clause::new(lits.collect::<Vec<_>>()).expect("k >= 1")
        })
        .collect();
    CnfFormula::new(n, clauses).expect("variables drawn below n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::Assignment;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn naive_count(f: &CnfFormula) -> u64 {
        let n = f.num_vars();
        (0..1u64 << n)
            .rev()
            .filter(|&mask| f.evaluate(&Assignment::from_mask(n, mask)).unwrap())
            .count() as u64
    }

    #[test]
    fn small_counts() {
        let contradiction = CnfFormula::from_signed(1, &[&[1], &[-1]]).unwrap();
        assert_eq!(count_models(&contradiction).unwrap().get(), 0);
        let or2 = CnfFormula::from_signed(2, &[&[1, 2]]).unwrap();
        assert_eq!(count_models(&or2).unwrap().get(), 3);
    }

    #[test]
    fn example_formula_has_ten_models() {
        // 16 assignments; 4 violate (~x2 + ~x3), 2 violate (x1 + x2 + x4),
        // and none violate both
        let f = CnfFormula::from_signed(4, &[&[-2, -3], &[1, 2, 4]]).unwrap();
        assert_eq!(naive_count(&f), 10);
        assert_eq!(count_models(&f).unwrap().get(), 10);
    }

    #[test]
    fn tautology_counts_everything() {
        let f = CnfFormula::from_signed(9, &[&[3, -3]]).unwrap();
        assert_eq!(count_models(&f).unwrap().get(), 512);
    }

    #[test]
    fn cap_is_enforced() {
        let f = CnfFormula::from_signed(31, &[&[31]]).unwrap();
        assert_eq!(
            count_models(&f),
            Err(CnfError::CapacityExceeded { n: 31, cap: 30 })
        );
        let g = CnfFormula::from_signed(8, &[&[1]]).unwrap();
        assert!(ModelCounter::with_cap(7).count(&g).is_err());
        assert_eq!(ModelCounter::with_cap(8).count(&g).unwrap().get(), 128);
        assert_eq!(ModelCounter::with_cap(100).cap(), 62);
    }

    #[test]
    fn parallel_path_matches_naive() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let f = random_kcnf(19, 40, 3, &mut rng);
        assert_eq!(count_models(&f).unwrap().get(), naive_count(&f));
    }

    #[test]
    fn model_count_range() {
        assert!(ModelCount::new(16, 4).is_some());
        assert!(ModelCount::new(17, 4).is_none());
    }

    proptest! {
        #[test]
        fn count_matches_naive(seed in any::<u64>(), n in 1u32..=10, m in 1usize..=12, k in 1usize..=3) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let k = k.min(n as usize);
            let f = random_kcnf(n, m, k, &mut rng);
            let c = count_models(&f).unwrap().get();
            prop_assert_eq!(c, naive_count(&f));
            prop_assert!(c <= 1u64 << n);
        }

        #[test]
        fn dimacs_round_trip(seed in any::<u64>(), n in 1u32..=12, m in 1usize..=10) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = random_kcnf(n, m, 1 + (seed % 3) as usize % n as usize, &mut rng);
            let back = crate::cnf::parse_dimacs(f.to_dimacs().as_bytes()).unwrap();
            prop_assert_eq!(back, f);
        }

        #[test]
        fn dropping_a_clause_never_falsifies(seed in any::<u64>(), n in 1u32..=8, m in 2usize..=8, mask in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = random_kcnf(n, m, 2.min(n as usize), &mut rng);
            let a = Assignment::from_mask(n, mask);
            if f.evaluate(&a).unwrap() {
                for j in 0..m {
                    let g = f.without_clause(j).unwrap();
                    prop_assert!(g.evaluate(&a).unwrap());
                }
            }
        }
    }
}
