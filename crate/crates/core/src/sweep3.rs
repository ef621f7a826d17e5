//! The d=3 numerical sweep: for every triple `1 < k₁ < k₂ < k₃` in range and
//! every `1 ≤ lᵢ ≤ kᵢ−1`, check that `l₁l₂l₃ + (k₁−l₁)(k₂−l₂)(k₃−l₃)` is
//! representable by `(k₁, k₂, k₃)`.
//!
//! One residue table per triple (modulus `k₁`, the smallest side) makes the
//! inner check one array load and a compare. The substitution
//! `l ↦ k − l` fixes the checked value, so only the lexicographically smaller
//! half of each `l`-space is visited; the unique self-mirrored tuple (all
//! `kᵢ` even, `lᵢ = kᵢ/2`) is visited once. Work is partitioned by triple and
//! merged in canonical order, so reports are identical for any worker count.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::semigroup::{DenominationVector, ResidueTable, UNREACHABLE};

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("checkpoint i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("checkpoint is not valid JSON: {0}")]
    Corrupt(#[from] serde_json::Error),
    #[error("checkpoint format version {got}, expected {want}")]
    VersionMismatch { got: u32, want: u32 },
    #[error("checkpoint was written for range {checkpoint:?}, not {requested:?}")]
    RangeMismatch {
        checkpoint: SweepRange,
        requested: SweepRange,
    },
    #[error("checkpoint last triple {0:?} is not in canonical range order")]
    BadTriple([u32; 3]),
}

/// Triple range `1 < k₁ < k₂ < k₃`, `k3_min ≤ k₃ ≤ k3_max`, with optional
/// fixed `k₁`/`k₂` filters. Ranges below the smallest triple are simply empty.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepRange {
    pub k3_max: u32,
    #[serde(default = "default_k3_min")]
    pub k3_min: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k1: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k2: Option<u32>,
}

fn default_k3_min() -> u32 {
    4
}

impl SweepRange {
    pub fn up_to(k3_max: u32) -> SweepRange {
        SweepRange {
            k3_max,
            k3_min: 4,
            k1: None,
            k2: None,
        }
    }

    fn k2_k1_pairs(&self, k3: u32) -> Vec<(u32, u32)> {
        let mut out = Vec::new();
        for k2 in 3..k3 {
            if self.k2.is_some_and(|f| f != k2) {
                continue;
            }
            for k1 in 2..k2 {
                if self.k1.is_some_and(|f| f != k1) {
                    continue;
                }
                out.push((k2, k1));
            }
        }
        out
    }
}

/// A non-representable corner value; finding one falsifies the conjecture.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub k: [u32; 3],
    pub l: [u32; 3],
    pub n: u64,
}

/// Deterministic sweep outcome. Wall time is informational only and excluded
/// from serialized reports so that resumed and multi-worker runs stay
/// byte-identical.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub range: SweepRange,
    pub triples_checked: u64,
    pub tuples_checked: u64,
    pub counterexamples: Vec<Counterexample>,
    #[serde(skip)]
    pub wall_time_secs: Option<f64>,
}

impl SweepReport {
    pub fn verified(&self) -> bool {
        self.counterexamples.is_empty()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }
}

pub const CHECKPOINT_VERSION: u32 = 1;

/// Resumable progress: everything accumulated up to and including
/// `last_triple` in canonical order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub range: SweepRange,
    pub last_triple: [u32; 3],
    pub counters: Counters,
    #[serde(default)]
    pub counterexamples: Vec<Counterexample>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counters {
    pub triples_checked: u64,
    pub tuples_checked: u64,
}

impl Checkpoint {
    pub fn load(path: &Path) -> Result<Checkpoint, SweepError> {
        let text = std::fs::read_to_string(path)?;
        let cp: Checkpoint = serde_json::from_str(&text)?;
        if cp.version != CHECKPOINT_VERSION {
            return Err(SweepError::VersionMismatch {
                got: cp.version,
                want: CHECKPOINT_VERSION,
            });
        }
        let [k1, k2, k3] = cp.last_triple;
        if !(1 < k1 && k1 < k2 && k2 < k3) {
            return Err(SweepError::BadTriple(cp.last_triple));
        }
        Ok(cp)
    }

    fn store(&self, path: &Path) -> Result<(), SweepError> {
        let tmp = path.with_extension("tmp");
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(serde_json::to_string_pretty(self).expect("serializable").as_bytes())?;
        f.sync_all()?;
        std::fs::rename(&tmp, path)?;
        Ok(())
    }
}

/// Execution knobs that never influence report content.
#[derive(Debug, Clone, Default)]
pub struct SweepOptions {
    /// 0 means the rayon default.
    pub workers: usize,
    pub checkpoint: Option<PathBuf>,
    pub resume: bool,
    /// Checkpoint cadence in completed k₃ blocks (0 and 1 both mean every
    /// block).
    pub checkpoint_blocks: u32,
}

/// Canonical enumeration key: ascending (k₃, k₂, k₁).
fn triple_key(k1: u32, k2: u32, k3: u32) -> (u32, u32, u32) {
    (k3, k2, k1)
}

/// The corner-value `l₁l₂l₃ + (k₁−l₁)(k₂−l₂)(k₃−l₃)`.
pub fn two_corner_size(k: [u32; 3], l: [u32; 3]) -> u64 {
    debug_assert!((0..3).all(|i| 1 <= l[i] && l[i] < k[i]));
    let a: u64 = l.iter().map(|&v| v as u64).product();
    let b: u64 = k
        .iter()
        .zip(&l)
        .map(|(&ki, &li)| (ki - li) as u64)
        .product();
    a + b
}

#[derive(Default)]
struct TripleOutcome {
    tuples: u64,
    counterexamples: Vec<Counterexample>,
}

/// All corner values of one triple, over the symmetry-halved l-space.
fn check_triple(k1: u32, k2: u32, k3: u32) -> TripleOutcome {
    let denoms = DenominationVector::new(vec![k1 as u64, k2 as u64, k3 as u64])
        .expect("triple sides are positive");
    let table = ResidueTable::build(&denoms);
    let mr = table.min_rep_slice();
    let max_fin = table.max_finite_min_rep();

    let mut out = TripleOutcome::default();
    for l3 in 1..k3 {
        let mirror3 = k3 - l3;
        if l3 > mirror3 {
            break;
        }
        if l3 < mirror3 {
            for l2 in 1..k2 {
                scan_row(&mut out, mr, max_fin, [k1, k2, k3], l2, l3, k1 - 1);
            }
        } else {
            // Middle plane (k₃ even): halve over (l₁, l₂) as well.
            for l2 in 1..k2 {
                let mirror2 = k2 - l2;
                if l2 > mirror2 {
                    break;
                }
                let l1_max = if l2 < mirror2 { k1 - 1 } else { k1 / 2 };
                scan_row(&mut out, mr, max_fin, [k1, k2, k3], l2, l3, l1_max);
            }
        }
    }
    out
}

/// Checks `l₁ = 1..=l1_max` for fixed `(l₂, l₃)`. The value is linear in
/// `l₁`, so the loop is an increment, a residue update and one table compare.
/// Rows whose minimum already clears the largest table entry are provably
/// all-representable (corner values are divisible by the gcd, whose residue
/// classes are exactly the reachable ones) and are skipped wholesale.
#[inline]
fn scan_row(
    out: &mut TripleOutcome,
    mr: &[u64],
    max_fin: u64,
    k: [u32; 3],
    l2: u32,
    l3: u32,
    l1_max: u32,
) {
    if l1_max == 0 {
        return;
    }
    let [k1, k2, k3] = k;
    let a = l2 as i64 * l3 as i64;
    let b = (k2 - l2) as i64 * (k3 - l3) as i64;
    let step = a - b;
    let first = b * k1 as i64 + step;
    let last = first + step * (l1_max as i64 - 1);
    out.tuples += l1_max as u64;
    if first.min(last) >= max_fin as i64 {
        return;
    }

    let m = k1 as i64;
    let mut n = first;
    let mut r = (n % m) as usize;
    let step_mod = step.rem_euclid(m) as usize;
    let k1u = k1 as usize;
    for l1 in 1..=l1_max {
        if (n as u64) < mr[r] {
            // Might be a counterexample (or an unreachable-class sentinel);
            // re-derive and double-check off the hot path.
            let l = [l1, l2, l3];
            let value = two_corner_size(k, l);
            debug_assert_eq!(value, n as u64);
            if mr[(value % k1 as u64) as usize] == UNREACHABLE
                || value < mr[(value % k1 as u64) as usize]
            {
                out.counterexamples.push(Counterexample { k, l, n: value });
            }
        }
        n += step;
        r += step_mod;
        if r >= k1u {
            r -= k1u;
        }
    }
}

/// Runs the sweep over `range`, optionally checkpointing/resuming.
///
/// The report is deterministic: independent of worker count, and a resumed
/// run serializes byte-identically to an uninterrupted one.
pub fn sweep_with_options(range: &SweepRange, opts: &SweepOptions) -> Result<SweepReport, SweepError> {
    let started = Instant::now();
    let mut report = SweepReport {
        range: range.clone(),
        triples_checked: 0,
        tuples_checked: 0,
        counterexamples: Vec::new(),
        wall_time_secs: None,
    };

    let mut resume_after: Option<(u32, u32, u32)> = None;
    if opts.resume {
        let path = opts
            .checkpoint
            .as_deref()
            .ok_or_else(|| SweepError::Io(std::io::Error::other("--resume needs a checkpoint path")))?;
        let cp = Checkpoint::load(path)?;
        if cp.range != *range {
            return Err(SweepError::RangeMismatch {
                checkpoint: cp.range,
                requested: range.clone(),
            });
        }
        report.triples_checked = cp.counters.triples_checked;
        report.tuples_checked = cp.counters.tuples_checked;
        report.counterexamples = cp.counterexamples;
        let [k1, k2, k3] = cp.last_triple;
        resume_after = Some(triple_key(k1, k2, k3));
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers)
        .build()
        .expect("thread pool");

    let cadence = opts.checkpoint_blocks.max(1);
    let mut blocks_done = 0u32;
    let mut last_triple: Option<[u32; 3]> = None;
    for k3 in range.k3_min.max(4)..=range.k3_max {
        let triples: Vec<(u32, u32)> = range
            .k2_k1_pairs(k3)
            .into_iter()
            .filter(|&(k2, k1)| match resume_after {
                Some(after) => triple_key(k1, k2, k3) > after,
                None => true,
            })
            .collect();
        if triples.is_empty() {
            continue;
        }
        let outcomes: Vec<TripleOutcome> = pool.install(|| {
            triples
                .par_iter()
                .map(|&(k2, k1)| check_triple(k1, k2, k3))
                .collect()
        });
        for ((k2, k1), outcome) in triples.iter().zip(outcomes) {
            report.triples_checked += 1;
            report.tuples_checked += outcome.tuples;
            report.counterexamples.extend(outcome.counterexamples);
            last_triple = Some([*k1, *k2, k3]);
        }
        blocks_done += 1;
        if let (Some(path), Some(last)) = (&opts.checkpoint, last_triple) {
            if blocks_done % cadence == 0 {
                Checkpoint {
                    version: CHECKPOINT_VERSION,
                    range: range.clone(),
                    last_triple: last,
                    counters: Counters {
                        triples_checked: report.triples_checked,
                        tuples_checked: report.tuples_checked,
                    },
                    counterexamples: report.counterexamples.clone(),
                }
                .store(path)?;
            }
        }
    }

    report.wall_time_secs = Some(started.elapsed().as_secs_f64());
    Ok(report)
}

/// Single-shot sweep with `workers` threads (0 = default).
pub fn sweep(range: &SweepRange, workers: usize) -> SweepReport {
    sweep_with_options(
        range,
        &SweepOptions {
            workers,
            ..SweepOptions::default()
        },
    )
    .expect("sweep without checkpointing cannot fail")
}

/// Tuples visited per triple under symmetry halving:
/// `⌈(k₁−1)(k₂−1)(k₃−1)/2⌉`.
pub fn expected_tuples(k1: u32, k2: u32, k3: u32) -> u64 {
    let t = (k1 as u64 - 1) * (k2 as u64 - 1) * (k3 as u64 - 1);
    t.div_ceil(2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semigroup::brute_force_representable;

    #[test]
    fn corner_value_examples() {
        assert_eq!(two_corner_size([2, 3, 5], [1, 1, 1]), 9);
        assert_eq!(two_corner_size([2, 3, 5], [1, 2, 4]), 9);
        assert_eq!(two_corner_size([4, 6, 10], [2, 3, 5]), 60);
    }

    #[test]
    fn corner_value_mirror_symmetry() {
        for (k1, k2, k3) in [(2u32, 3, 4), (3, 5, 8), (4, 6, 10)] {
            for l1 in 1..k1 {
                for l2 in 1..k2 {
                    for l3 in 1..k3 {
                        assert_eq!(
                            two_corner_size([k1, k2, k3], [l1, l2, l3]),
                            two_corner_size([k1, k2, k3], [k1 - l1, k2 - l2, k3 - l3])
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn corner_value_divisible_by_gcd() {
        // The row-skip pruning relies on this.
        for (k1, k2, k3) in [(2u32, 4, 6), (4, 6, 10), (3, 6, 9), (6, 10, 14)] {
            let g = gcd3(k1, k2, k3) as u64;
            for l1 in 1..k1 {
                for l2 in 1..k2 {
                    for l3 in 1..k3 {
                        assert_eq!(two_corner_size([k1, k2, k3], [l1, l2, l3]) % g, 0);
                    }
                }
            }
        }
    }

    fn gcd3(a: u32, b: u32, c: u32) -> u32 {
        fn g(a: u32, b: u32) -> u32 {
            if b == 0 {
                a
            } else {
                g(b, a % b)
            }
        }
        g(g(a, b), c)
    }

    #[test]
    fn tiny_range_clean() {
        // Triples (2,3,4),(2,3,5),(2,4,5),(3,4,5).
        let report = sweep(&SweepRange::up_to(5), 1);
        assert_eq!(report.triples_checked, 4);
        assert!(report.verified());
        let expected: u64 = [
            expected_tuples(2, 3, 4),
            expected_tuples(2, 3, 5),
            expected_tuples(2, 4, 5),
            expected_tuples(3, 4, 5),
        ]
        .iter()
        .sum();
        assert_eq!(report.tuples_checked, expected);
    }

    #[test]
    fn empty_range() {
        let report = sweep(&SweepRange::up_to(3), 1);
        assert_eq!(report.triples_checked, 0);
        assert_eq!(report.tuples_checked, 0);
        assert!(report.verified());
    }

    #[test]
    fn tuple_count_matches_closed_form() {
        let report = sweep(&SweepRange::up_to(12), 1);
        let mut expected = 0u64;
        let mut triples = 0u64;
        for k3 in 4..=12u32 {
            for k2 in 3..k3 {
                for k1 in 2..k2 {
                    triples += 1;
                    expected += expected_tuples(k1, k2, k3);
                }
            }
        }
        assert_eq!(report.triples_checked, triples);
        assert_eq!(report.tuples_checked, expected);
        assert!(report.verified());
    }

    #[test]
    fn exhaustive_agreement_with_brute_force_oracle() {
        // Every tuple of a few triples, including a gcd > 1 triple, checked
        // against the DP oracle directly (no table, no pruning).
        for (k1, k2, k3) in [(2u32, 3, 4), (2, 4, 6), (3, 4, 5), (4, 6, 10)] {
            let denoms =
                DenominationVector::new(vec![k1 as u64, k2 as u64, k3 as u64]).unwrap();
            let table = ResidueTable::build(&denoms);
            for l1 in 1..k1 {
                for l2 in 1..k2 {
                    for l3 in 1..k3 {
                        let n = two_corner_size([k1, k2, k3], [l1, l2, l3]);
                        assert_eq!(
                            table.is_representable(n),
                            brute_force_representable(&denoms, n).unwrap(),
                            "triple ({k1},{k2},{k3}), l=({l1},{l2},{l3})"
                        );
                        assert!(table.is_representable(n), "counterexample?!");
                    }
                }
            }
        }
    }

    #[test]
    fn filters_restrict_triples() {
        let mut range = SweepRange::up_to(8);
        range.k1 = Some(2);
        range.k2 = Some(3);
        let report = sweep(&range, 1);
        // (2,3,k3) for k3 in 4..=8.
        assert_eq!(report.triples_checked, 5);
    }
}
