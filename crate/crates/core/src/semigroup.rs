//! Coin-system representability: decide whether `n = n₁k₁ + ⋯ + n_dk_d` has a
//! solution in non-negative integers.
//!
//! The workhorse is [`ResidueTable`]: for each residue class `r` modulo the
//! smallest denomination it stores the least representable integer congruent
//! to `r`, so membership in the numerical semigroup generated by the
//! denominations is one array load and a comparison. The table is built once
//! per denomination vector with a shortest-path relaxation over residues.

use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SemigroupError {
    #[error("denomination list must not be empty")]
    EmptyDenominations,
    #[error("denominations must be positive")]
    ZeroDenomination,
    #[error("brute-force check limited to n <= {cap}, got {n}")]
    BruteForceBound { n: u64, cap: u64 },
}

/// Sentinel stored in a residue slot whose class contains no representable
/// number. Never participates in arithmetic; only compared against.
pub const UNREACHABLE: u64 = u64::MAX;

/// The coin system `k₁ ≤ ⋯ ≤ k_d`, kept sorted with its gcd.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DenominationVector {
    denoms: Vec<u64>,
    gcd: u64,
}

impl DenominationVector {
    /// Sorts the denominations ascending and validates them (non-empty, all
    /// positive). Duplicates are allowed: boxes can have equal sides.
    pub fn new(denoms: impl Into<Vec<u64>>) -> Result<Self, SemigroupError> {
        let mut denoms = denoms.into();
        if denoms.is_empty() {
            return Err(SemigroupError::EmptyDenominations);
        }
        if denoms.iter().any(|&k| k == 0) {
            return Err(SemigroupError::ZeroDenomination);
        }
        denoms.sort_unstable();
        let gcd = denoms.iter().copied().fold(0, gcd);
        Ok(DenominationVector { denoms, gcd })
    }

    pub fn denoms(&self) -> &[u64] {
        &self.denoms
    }

    pub fn gcd(&self) -> u64 {
        self.gcd
    }

    pub fn smallest(&self) -> u64 {
        self.denoms[0]
    }

    pub fn dim(&self) -> usize {
        self.denoms.len()
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Largest non-representable integer, as far as one exists.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Frobenius {
    /// Every residue class is reachable (gcd 1). `None` means every
    /// non-negative integer is representable (a denomination of 1 exists).
    Largest(Option<u64>),
    /// gcd > 1: infinitely many integers are non-representable. `restricted`
    /// is the largest non-representable multiple of the gcd (`None` when all
    /// multiples are representable).
    NoLargest { gcd: u64, restricted: Option<u64> },
}

impl std::fmt::Display for Frobenius {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Frobenius::Largest(Some(v)) => write!(f, "{v}"),
            Frobenius::Largest(None) => write!(f, "none (every n >= 0 representable)"),
            Frobenius::NoLargest { gcd, restricted } => {
                write!(f, "none (gcd {gcd} > 1; ")?;
                match restricted {
                    Some(v) => write!(f, "largest non-representable multiple of gcd: {v})"),
                    None => write!(f, "every multiple of gcd representable)"),
                }
            }
        }
    }
}

/// Per-residue minimal representable values modulo the smallest denomination.
///
/// Immutable after construction and safe to share across threads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidueTable {
    denoms: DenominationVector,
    min_rep: Vec<u64>,
}

impl ResidueTable {
    /// Shortest-path relaxation over residues mod the smallest denomination:
    /// from residue `r` with value `v`, adding denomination `k_j` reaches
    /// residue `(r + k_j) mod k_min` with value `v + k_j`.
    pub fn build(k: &DenominationVector) -> ResidueTable {
        let modulus = k.smallest();
        let m = modulus as usize;
        let mut min_rep = vec![UNREACHABLE; m];
        min_rep[0] = 0;

        // Dijkstra on at most k_min nodes; the smallest denomination itself
        // never improves anything (same residue, larger value).
        let mut heap: BinaryHeap<(std::cmp::Reverse<u64>, usize)> = BinaryHeap::new();
        heap.push((std::cmp::Reverse(0), 0));
        while let Some((std::cmp::Reverse(value), r)) = heap.pop() {
            if value > min_rep[r] {
                continue;
            }
            for &d in k.denoms() {
                if d == modulus {
                    continue;
                }
                let next = value + d;
                let nr = (next % modulus) as usize;
                if next < min_rep[nr] {
                    min_rep[nr] = next;
                    heap.push((std::cmp::Reverse(next), nr));
                }
            }
        }

        ResidueTable {
            denoms: k.clone(),
            min_rep,
        }
    }

    pub fn denominations(&self) -> &DenominationVector {
        &self.denoms
    }

    pub fn modulus(&self) -> u64 {
        self.denoms.smallest()
    }

    /// Least representable integer congruent to `r`, if the class is
    /// reachable at all.
    pub fn min_rep(&self, r: u64) -> Option<u64> {
        match self.min_rep[r as usize] {
            UNREACHABLE => None,
            v => Some(v),
        }
    }

    /// Raw table slice for hot loops; slots hold [`UNREACHABLE`] for
    /// unreachable classes.
    pub fn min_rep_slice(&self) -> &[u64] {
        &self.min_rep
    }

    /// Largest finite `min_rep` entry. Every `n` with `n >= max_finite_min_rep()`
    /// whose residue class is reachable is representable.
    pub fn max_finite_min_rep(&self) -> u64 {
        self.min_rep
            .iter()
            .copied()
            .filter(|&v| v != UNREACHABLE)
            .max()
            .expect("residue 0 is always reachable")
    }

    /// Membership of `n` in the numerical semigroup generated by the
    /// denominations.
    #[inline]
    pub fn is_representable(&self, n: u64) -> bool {
        let v = self.min_rep[(n % self.modulus()) as usize];
        v != UNREACHABLE && n >= v
    }

    /// Largest non-representable integer; see [`Frobenius`] for the gcd > 1
    /// shape. When some residue class is unreachable, the restricted value is
    /// the largest non-representable multiple of the gcd, read off the same
    /// table: reachable classes are exactly the classes of multiples of the
    /// gcd, and the largest gap in a reachable class `r` is `min_rep[r] - k_min`.
    pub fn frobenius(&self) -> Frobenius {
        let modulus = self.modulus();
        let max_fin = self.max_finite_min_rep();
        let largest = if max_fin >= modulus {
            Some(max_fin - modulus)
        } else {
            None
        };
        if self.min_rep.iter().any(|&v| v == UNREACHABLE) {
            debug_assert!(self.denoms.gcd() > 1);
            Frobenius::NoLargest {
                gcd: self.denoms.gcd(),
                restricted: largest,
            }
        } else {
            Frobenius::Largest(largest)
        }
    }

    /// Non-negative coefficients summing to `n` against the sorted
    /// denominations, or `None` when `n` is not representable.
    ///
    /// Greedy descent: peel off the largest denomination that keeps the
    /// remainder representable. Deterministic for a fixed table.
    pub fn witness(&self, n: u64) -> Option<Vec<u64>> {
        if !self.is_representable(n) {
            return None;
        }
        let denoms = self.denoms.denoms();
        let mut coeffs = vec![0u64; denoms.len()];
        let mut rest = n;
        while rest > 0 {
            let (i, &d) = denoms
                .iter()
                .enumerate()
                .rev()
                .find(|&(_, &d)| d <= rest && self.is_representable(rest - d))
                .expect("a representable n > 0 has a last coin");
            coeffs[i] += 1;
            rest -= d;
        }
        Some(coeffs)
    }
}

/// Default bound for [`brute_force_representable`].
pub const BRUTE_FORCE_CAP: u64 = 50_000_000;

/// Ground-truth representability by dynamic programming over `0..=n`.
///
/// Independent of the residue-table path; intended as a test oracle for
/// moderate `n`.
pub fn brute_force_representable(
    k: &DenominationVector,
    n: u64,
) -> Result<bool, SemigroupError> {
    if n > BRUTE_FORCE_CAP {
        return Err(SemigroupError::BruteForceBound {
            n,
            cap: BRUTE_FORCE_CAP,
        });
    }
    let n = n as usize;
    let mut reach = vec![false; n + 1];
    reach[0] = true;
    for i in 1..=n {
        reach[i] = k
            .denoms()
            .iter()
            .any(|&d| (d as usize) <= i && reach[i - d as usize]);
    }
    Ok(reach[n])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(denoms: &[u64]) -> ResidueTable {
        ResidueTable::build(&DenominationVector::new(denoms).unwrap())
    }

    /// Independent oracle used to freeze expected min_rep values: scan small n.
    fn min_rep_by_scan(denoms: &[u64], bound: u64) -> Vec<u64> {
        let k = DenominationVector::new(denoms).unwrap();
        let m = k.smallest() as usize;
        let mut out = vec![UNREACHABLE; m];
        for n in 0..=bound {
            if brute_force_representable(&k, n).unwrap() {
                let r = (n % m as u64) as usize;
                if out[r] == UNREACHABLE {
                    out[r] = n;
                }
            }
        }
        out
    }

    #[test]
    fn table_2_3() {
        let t = table(&[2, 3]);
        assert_eq!(t.min_rep_slice(), &[0, 3]);
        assert_eq!(min_rep_by_scan(&[2, 3], 36), vec![0, 3]);
    }

    #[test]
    fn table_single_denomination() {
        let t = table(&[5]);
        assert_eq!(
            t.min_rep_slice(),
            &[0, UNREACHABLE, UNREACHABLE, UNREACHABLE, UNREACHABLE]
        );
    }

    #[test]
    fn table_4_6_even_only() {
        let t = table(&[4, 6]);
        assert_eq!(t.min_rep_slice(), &[0, UNREACHABLE, 6, UNREACHABLE]);
        assert_eq!(min_rep_by_scan(&[4, 6], 48), t.min_rep_slice());
    }

    #[test]
    fn representability_examples() {
        let t23 = table(&[2, 3]);
        assert!(!t23.is_representable(1));
        assert!(t23.is_representable(0));
        let t46 = table(&[4, 6]);
        assert!(t46.is_representable(10));
        assert!(!t46.is_representable(5));
    }

    #[test]
    fn frobenius_examples() {
        assert_eq!(table(&[2, 3]).frobenius(), Frobenius::Largest(Some(1)));
        assert_eq!(table(&[5, 7]).frobenius(), Frobenius::Largest(Some(23)));
        assert_eq!(
            table(&[4, 6]).frobenius(),
            Frobenius::NoLargest {
                gcd: 2,
                restricted: Some(2)
            }
        );
        // A denomination of 1 makes everything representable.
        assert_eq!(table(&[1, 9]).frobenius(), Frobenius::Largest(None));
        // Restricted value of (4,6) equals gcd * frobenius(2,3).
        assert_eq!(
            table(&[4, 6]).frobenius(),
            Frobenius::NoLargest {
                gcd: 2,
                restricted: Some(2 * 1)
            }
        );
        // Single denomination: only multiples of 5, none missing.
        assert_eq!(
            table(&[5]).frobenius(),
            Frobenius::NoLargest {
                gcd: 5,
                restricted: None
            }
        );
    }

    #[test]
    fn witness_examples() {
        let t23 = table(&[2, 3]);
        let w = t23.witness(7).unwrap();
        assert_eq!(w, vec![2, 1]);
        assert_eq!(t23.witness(1), None);
        let t9 = table(&[9]);
        assert_eq!(t9.witness(0).unwrap(), vec![0]);
    }

    #[test]
    fn witness_is_sound_for_duplicated_denoms() {
        let t = table(&[2, 2, 3]);
        for n in 0..60u64 {
            if let Some(w) = t.witness(n) {
                let total: u64 = w
                    .iter()
                    .zip(t.denominations().denoms())
                    .map(|(c, d)| c * d)
                    .sum();
                assert_eq!(total, n);
            }
        }
    }

    #[test]
    fn brute_force_examples() {
        let k23 = DenominationVector::new([2, 3]).unwrap();
        assert!(brute_force_representable(&k23, 2).unwrap());
        let k711 = DenominationVector::new([7, 11]).unwrap();
        assert!(!brute_force_representable(&k711, 59).unwrap());
        let k357 = DenominationVector::new([3, 5, 7]).unwrap();
        assert!(!brute_force_representable(&k357, 4).unwrap());
    }

    #[test]
    fn brute_force_cap_enforced() {
        let k = DenominationVector::new([2, 3]).unwrap();
        assert!(matches!(
            brute_force_representable(&k, BRUTE_FORCE_CAP + 1),
            Err(SemigroupError::BruteForceBound { .. })
        ));
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(
            DenominationVector::new(Vec::<u64>::new()).unwrap_err(),
            SemigroupError::EmptyDenominations
        );
        assert_eq!(
            DenominationVector::new([3, 0]).unwrap_err(),
            SemigroupError::ZeroDenomination
        );
    }

    #[test]
    fn table_agrees_with_brute_force_on_small_systems() {
        for denoms in [
            vec![2, 3],
            vec![5, 7],
            vec![4, 6],
            vec![6, 10, 15],
            vec![3, 5, 7],
            vec![2, 2, 2],
            vec![9, 12, 21],
        ] {
            let k = DenominationVector::new(denoms.clone()).unwrap();
            let t = ResidueTable::build(&k);
            for n in 0..400u64 {
                assert_eq!(
                    t.is_representable(n),
                    brute_force_representable(&k, n).unwrap(),
                    "disagreement for k={denoms:?}, n={n}"
                );
            }
        }
    }
}
