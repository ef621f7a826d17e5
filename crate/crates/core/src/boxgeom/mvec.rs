//! Enumeration of the per-direction line counts realizable by families of
//! pairwise disjoint lines.
//!
//! Two routes are provided. [`for_each_line_family`] /
//! [`achievable_m_vectors_bruteforce`] walk the family lattice directly with
//! include/exclude backtracking over lines in canonical order — exact but
//! exponential, kept as the reference oracle. [`MVectorEngine::achievable`]
//! computes the same set by slicing the box along its longest axis: lines
//! parallel to that axis pierce every slice at their base cell, and a line
//! inside a slice conflicts with a long line exactly when its base meets the
//! long line's projection. Per-slice contributions therefore depend on the
//! long-line set only through its coordinate projections, which collapses the
//! search space enough to enumerate boxes with hundreds of cells exactly.
//!
//! Conflict rule used throughout: lines in directions `s ≠ t` intersect iff
//! their bases agree on every coordinate outside `{s, t}`; lines in the same
//! direction with distinct bases are always disjoint.

use std::collections::{BTreeSet, HashMap};
use std::hash::{BuildHasherDefault, Hasher};
use std::ops::ControlFlow;
use std::rc::Rc;

use super::{all_lines, BoxDims, BoxError, MVector};
use crate::bits::BitSet;

/// Default cell-count ceiling for enumeration entry points.
pub const DEFAULT_VOLUME_LIMIT: u64 = 4096;

/// Dense grid bits above which the engine refuses (honest resource bound
/// instead of a multi-gigabyte allocation on extreme aspect ratios).
const GRID_BIT_LIMIT: u64 = 1 << 26;

/// Ceiling for `2^(k₁+k₂)` projection enumeration in 3-box slicing.
const D3_PROJ_BITS_LIMIT: u32 = 22;

/// Ceiling for base-cell masks when slicing boxes of dimension ≥ 4.
const D4_BASE_BITS_LIMIT: u32 = 27;

/// Tighter mask ceiling for the generic recursion (dimension ≥ 5).
const REC_BASE_BITS_LIMIT: u32 = 20;

// ---------------------------------------------------------------------------
// Reference oracle: include/exclude backtracking over the family lattice
// ---------------------------------------------------------------------------

/// Visits every family of pairwise disjoint lines exactly once, as indices
/// into [`all_lines`] in canonical order. Exponential in the number of lines;
/// intended for small boxes and cross-validation.
pub fn for_each_line_family(
    dims: &BoxDims,
    visit: &mut dyn FnMut(&[usize]) -> ControlFlow<()>,
) -> ControlFlow<()> {
    let lines = all_lines(dims);
    let cells: Vec<BitSet> = lines
        .iter()
        .map(|l| l.cells(dims).bits().clone())
        .collect();
    let mut occupancy = BitSet::new(dims.cell_count());
    let mut chosen = Vec::new();
    visit(&chosen)?;
    extend_family(&cells, 0, &mut occupancy, &mut chosen, visit)
}

fn extend_family(
    cells: &[BitSet],
    from: usize,
    occupancy: &mut BitSet,
    chosen: &mut Vec<usize>,
    visit: &mut dyn FnMut(&[usize]) -> ControlFlow<()>,
) -> ControlFlow<()> {
    for i in from..cells.len() {
        if !cells[i].is_disjoint_from(occupancy) {
            continue;
        }
        occupancy.union_with(&cells[i]);
        chosen.push(i);
        let flow = match visit(chosen) {
            ControlFlow::Continue(()) => extend_family(cells, i + 1, occupancy, chosen, visit),
            ControlFlow::Break(()) => ControlFlow::Break(()),
        };
        chosen.pop();
        occupancy.subtract(&cells[i]);
        flow?;
    }
    ControlFlow::Continue(())
}

/// Achievable m-vectors by exhaustive family enumeration. Reference oracle.
pub fn achievable_m_vectors_bruteforce(dims: &BoxDims) -> BTreeSet<MVector> {
    let lines = all_lines(dims);
    let mut out = BTreeSet::new();
    let _ = for_each_line_family(dims, &mut |family| {
        let mut counts = vec![0u32; dims.dim()];
        for &i in family {
            counts[lines[i].axis()] += 1;
        }
        out.insert(MVector(counts));
        ControlFlow::Continue(())
    });
    out
}

// ---------------------------------------------------------------------------
// Dense point sets over bounded m-vectors
// ---------------------------------------------------------------------------

/// Set of integer vectors `0 ≤ v ≤ caps` (componentwise), bit per point.
#[derive(Clone, PartialEq, Eq, Hash)]
struct MSet {
    caps: Vec<u32>,
    strides: Vec<u64>,
    words: Vec<u64>,
}

impl MSet {
    fn bit_size(caps: &[u32]) -> u64 {
        caps.iter().map(|&c| c as u64 + 1).product()
    }

    fn empty(caps: &[u32]) -> MSet {
        let mut strides = Vec::with_capacity(caps.len());
        let mut acc = 1u64;
        for &c in caps {
            strides.push(acc);
            acc *= c as u64 + 1;
        }
        MSet {
            caps: caps.to_vec(),
            strides,
            words: vec![0; (acc as usize).div_ceil(64)],
        }
    }

    fn singleton_zero(caps: &[u32]) -> MSet {
        let mut s = MSet::empty(caps);
        s.words[0] |= 1;
        s
    }

    fn offset(&self, point: &[u32]) -> u64 {
        debug_assert!(point.iter().zip(&self.caps).all(|(&v, &c)| v <= c));
        point
            .iter()
            .zip(&self.strides)
            .map(|(&v, &s)| v as u64 * s)
            .sum()
    }

    fn insert(&mut self, point: &[u32]) {
        let o = self.offset(point);
        self.words[(o / 64) as usize] |= 1 << (o % 64);
    }

    /// Marks every point `(a, b, fixed...)` with `a ≤ hi0`, `b ≤ hi1`.
    /// The fixed tail coordinates follow the first two.
    fn fill_rect(&mut self, hi0: u32, hi1: u32, fixed: &[u32]) {
        let tail: u64 = fixed
            .iter()
            .zip(&self.strides[2..])
            .map(|(&v, &s)| v as u64 * s)
            .sum();
        for b in 0..=hi1 {
            let start = tail + b as u64 * self.strides[1];
            self.fill_run(start, hi0 as u64 + 1);
        }
    }

    fn fill_run(&mut self, start: u64, len: u64) {
        let end = start + len; // exclusive
        let (ws, we) = ((start / 64) as usize, ((end - 1) / 64) as usize);
        let lo_mask = !0u64 << (start % 64);
        let hi_mask = !0u64 >> (63 - (end - 1) % 64);
        if ws == we {
            self.words[ws] |= lo_mask & hi_mask;
        } else {
            self.words[ws] |= lo_mask;
            for w in &mut self.words[ws + 1..we] {
                *w = !0;
            }
            self.words[we] |= hi_mask;
        }
    }

    /// `self |= other << offset-of(point)`; caller guarantees the shifted set
    /// stays within caps.
    fn or_shifted(&mut self, other: &MSet, point_offset: u64) {
        let wo = (point_offset / 64) as usize;
        let bo = point_offset % 64;
        let n = self.words.len();
        for (i, &w) in other.words.iter().enumerate() {
            if w == 0 {
                continue;
            }
            if i + wo < n {
                self.words[i + wo] |= w << bo;
            } else {
                debug_assert_eq!(w << bo, 0, "shifted point out of caps");
            }
            if bo > 0 {
                if i + wo + 1 < n {
                    self.words[i + wo + 1] |= w >> (64 - bo);
                } else {
                    debug_assert_eq!(w >> (64 - bo), 0, "shifted point out of caps");
                }
            }
        }
    }

    fn count(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    fn points(&self) -> Vec<Vec<u32>> {
        let mut out = Vec::new();
        for (wi, &w) in self.words.iter().enumerate() {
            let mut w = w;
            while w != 0 {
                let bit = wi as u64 * 64 + w.trailing_zeros() as u64;
                w &= w - 1;
                let mut rest = bit;
                let mut point = Vec::with_capacity(self.caps.len());
                for &c in &self.caps {
                    point.push((rest % (c as u64 + 1)) as u32);
                    rest /= c as u64 + 1;
                }
                out.push(point);
            }
        }
        out
    }

    /// Minkowski sum; both operands and the result share one caps layout.
    fn minkowski(&self, other: &MSet) -> MSet {
        debug_assert_eq!(self.caps, other.caps);
        let (big, small) = if self.count() >= other.count() {
            (self, other)
        } else {
            (other, self)
        };
        let mut out = MSet::empty(&self.caps);
        for p in small.points() {
            out.or_shifted(big, big.offset(&p));
        }
        out
    }

    /// k-fold Minkowski power by binary doubling. `k = 0` gives `{0}`.
    fn minkowski_power(&self, k: u32) -> MSet {
        let mut result = MSet::singleton_zero(&self.caps);
        let mut sq = self.clone();
        let mut k = k;
        loop {
            if k & 1 == 1 {
                result = result.minkowski(&sq);
            }
            k >>= 1;
            if k == 0 {
                break;
            }
            sq = sq.minkowski(&sq);
        }
        result
    }

    /// Re-expresses the set in a larger caps layout.
    fn embedded(&self, caps: &[u32]) -> MSet {
        let mut out = MSet::empty(caps);
        for p in self.points() {
            out.insert(&p);
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Mixed-radix helpers for line-base spaces
// ---------------------------------------------------------------------------

/// Sides of the base space of direction `s`: all sides except `s`, in axis
/// order (first listed fastest-varying).
fn base_sides(dims: &[u32], s: usize) -> Vec<u32> {
    dims.iter()
        .enumerate()
        .filter(|&(i, _)| i != s)
        .map(|(_, &k)| k)
        .collect()
}

fn space_size(sides: &[u32]) -> usize {
    sides.iter().map(|&k| k as usize).product()
}

fn decode(sides: &[u32], mut idx: usize) -> Vec<u32> {
    let mut out = Vec::with_capacity(sides.len());
    for &k in sides {
        out.push((idx % k as usize) as u32);
        idx /= k as usize;
    }
    out
}

fn encode(sides: &[u32], digits: &[u32]) -> usize {
    let mut idx = 0usize;
    for (&k, &v) in sides.iter().zip(digits).rev() {
        idx = idx * k as usize + v as usize;
    }
    idx
}

// ---------------------------------------------------------------------------
// Tiny fast hash for dense integer keys
// ---------------------------------------------------------------------------

#[derive(Default)]
struct MixHasher(u64);

impl Hasher for MixHasher {
    fn finish(&self) -> u64 {
        self.0
    }
    fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 = (self.0 ^ b as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        }
    }
    fn write_u32(&mut self, v: u32) {
        self.0 = (self.0 ^ v as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    }
    fn write_u64(&mut self, v: u64) {
        self.0 = (self.0 ^ v).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    }
}

type FastMap<K, V> = HashMap<K, V, BuildHasherDefault<MixHasher>>;

// ---------------------------------------------------------------------------
// 3-box slice values with per-direction forbidden bases
// ---------------------------------------------------------------------------

/// Achievable m-vectors of a 3-box whose direction-`s` lines must avoid the
/// base set `forbidden[s]`. Sides must be sorted ascending; the box is sliced
/// along axis 3.
///
/// Long lines (direction 3) are chosen by their exact value projections
/// `S₁ = π₁(Q)`, `S₂ = π₂(Q)`: a sub-slice row `x₂` is usable iff
/// `x₂ ∉ S₂` and its base is not forbidden, and symmetrically for columns;
/// the number of long lines compatible with exact projections `(S₁, S₂)`
/// ranges over a contiguous interval determined by a bipartite matching.
fn g3_with_forbidden(kappa: &[u32], forbidden: &[BitSet], out_caps: &[u32]) -> MSet {
    let (k1, k2, k3) = (kappa[0], kappa[1], kappa[2]);
    debug_assert!(k1 <= k2 && k2 <= k3);
    debug_assert!(k1 + k2 <= D3_PROJ_BITS_LIMIT);

    // Forbidden rows/columns per sub-slice, as value bitmasks.
    // Direction-1 bases are (x₂, x₃) pairs with x₂ fastest; direction-2 bases
    // are (x₁, x₃); direction-3 bases are (x₁, x₂).
    let mut row_forb = vec![0u32; k3 as usize];
    for idx in forbidden[0].iter() {
        let (x2, x3) = (idx % k2 as usize, idx / k2 as usize);
        row_forb[x3] |= 1 << x2;
    }
    let mut col_forb = vec![0u32; k3 as usize];
    for idx in forbidden[1].iter() {
        let (x1, x3) = (idx % k1 as usize, idx / k1 as usize);
        col_forb[x3] |= 1 << x1;
    }
    let blocked3 = &forbidden[2]; // over (x₁, x₂), x₁ fastest

    let mut out = MSet::empty(out_caps);
    let mut frontier: Vec<(u32, u32)> = Vec::new();
    let mut next: Vec<(u32, u32)> = Vec::new();

    for s1 in 0u32..1 << k1 {
        's2: for s2 in 0u32..1 << k2 {
            // Allowed long-line bases within S₁ × S₂.
            let mut adj = [0u32; 32];
            let mut cell_count = 0u32;
            let mut col_cover = 0u32;
            for x1 in 0..k1 {
                if s1 >> x1 & 1 == 0 {
                    continue;
                }
                let mut mask = 0u32;
                for x2 in 0..k2 {
                    if s2 >> x2 & 1 == 1 && !blocked3.contains((x1 + k1 * x2) as usize) {
                        mask |= 1 << x2;
                    }
                }
                if mask == 0 {
                    continue 's2; // x₁ has no realizable base
                }
                adj[x1 as usize] = mask;
                cell_count += mask.count_ones();
                col_cover |= mask;
            }
            if col_cover & s2 != s2 {
                continue; // some x₂ has no realizable base
            }
            let matched = max_matching(&adj, k1 as usize, s1);
            let q_min = s1.count_ones() + s2.count_ones() - matched;
            let q_max = cell_count;
            debug_assert!(q_min <= q_max || (s1 == 0 && s2 == 0));

            // Pareto frontier of (Σ rows, Σ cols) over row/col mode splits.
            frontier.clear();
            frontier.push((0, 0));
            for c in 0..k3 as usize {
                let r = k2 - (s2 | row_forb[c]).count_ones();
                let cc = k1 - (s1 | col_forb[c]).count_ones();
                next.clear();
                for &(a, b) in &frontier {
                    next.push((a + r, b));
                    next.push((a, b + cc));
                }
                next.sort_unstable_by(|x, y| y.cmp(x));
                frontier.clear();
                let mut best_b = None;
                for &(a, b) in next.iter() {
                    if best_b.map_or(true, |bb| b > bb) {
                        frontier.push((a, b));
                        best_b = Some(b);
                    }
                }
            }

            for q in q_min..=q_max {
                for &(a, b) in &frontier {
                    out.fill_rect(a, b, &[q]);
                }
            }
        }
    }
    out
}

/// Kuhn's augmenting-path matching on ≤ 32 + 32 vertices; `adj[x]` is the
/// neighbor mask of left vertex `x`, `left` the mask of active left vertices.
fn max_matching(adj: &[u32; 32], n_left: usize, left: u32) -> u32 {
    let mut match_of_right = [usize::MAX; 32];
    let mut size = 0u32;
    for x in 0..n_left {
        if left >> x & 1 == 0 {
            continue;
        }
        let mut visited = 0u32;
        if augment(x, adj, &mut match_of_right, &mut visited) {
            size += 1;
        }
    }
    size
}

fn augment(x: usize, adj: &[u32; 32], match_of_right: &mut [usize; 32], visited: &mut u32) -> bool {
    let mut options = adj[x] & !*visited;
    while options != 0 {
        let y = options.trailing_zeros() as usize;
        options &= options - 1;
        *visited |= 1 << y;
        if match_of_right[y] == usize::MAX
            || augment(match_of_right[y], adj, match_of_right, visited)
        {
            match_of_right[y] = x;
            return true;
        }
    }
    false
}

// ---------------------------------------------------------------------------
// The engine
// ---------------------------------------------------------------------------

/// Per-base-box analysis shared by every tower height over the same base:
/// distinct slice-value sets with the long-line counts that produce them.
struct BaseAnalysis {
    /// (slice-value in slice caps, long-line count bitmask)
    values: Vec<(MSet, u32)>,
}

/// Exact m-vector enumeration with memoized sub-analyses.
///
/// Construction is cheap; reuse one engine across boxes to share work between
/// boxes with a common base (all tower heights over one base reuse the same
/// slice analysis).
pub struct MVectorEngine {
    volume_limit: u64,
    base_cache: HashMap<Vec<u32>, Rc<BaseAnalysis>>,
    rec_memo: HashMap<(Vec<u32>, Vec<Vec<u64>>), Rc<MSet>>,
}

/// Convenience wrapper over a fresh [`MVectorEngine`].
pub fn achievable_m_vectors(
    dims: &BoxDims,
    volume_limit: u64,
) -> Result<BTreeSet<MVector>, BoxError> {
    MVectorEngine::new(volume_limit).achievable(dims)
}

impl MVectorEngine {
    pub fn new(volume_limit: u64) -> MVectorEngine {
        MVectorEngine {
            volume_limit,
            base_cache: HashMap::new(),
            rec_memo: HashMap::new(),
        }
    }

    pub fn with_default_limit() -> MVectorEngine {
        MVectorEngine::new(DEFAULT_VOLUME_LIMIT)
    }

    /// The exact set of m-vectors realizable by pairwise disjoint line
    /// families in the box. Includes the zero vector.
    pub fn achievable(&mut self, dims: &BoxDims) -> Result<BTreeSet<MVector>, BoxError> {
        if dims.volume() > self.volume_limit {
            return Err(BoxError::VolumeLimit {
                volume: dims.volume(),
                limit: self.volume_limit,
            });
        }
        // Work in ascending-side order; undo the permutation on output.
        let mut order: Vec<usize> = (0..dims.dim()).collect();
        order.sort_by_key(|&i| dims.sides()[i]);
        let sorted: Vec<u32> = order.iter().map(|&i| dims.sides()[i]).collect();

        let set = self.ach_sorted(&sorted)?;

        let mut out = BTreeSet::new();
        for p in set.points() {
            let mut m = vec![0u32; dims.dim()];
            for (pos, &axis) in order.iter().enumerate() {
                m[axis] = p[pos];
            }
            out.insert(MVector(m));
        }
        Ok(out)
    }

    fn ach_sorted(&mut self, sorted: &[u32]) -> Result<MSet, BoxError> {
        let caps = full_caps(sorted);
        if MSet::bit_size(&caps) > GRID_BIT_LIMIT {
            return Err(BoxError::EnumerationOutOfReach(format!(
                "m-vector grid for box {sorted:?} exceeds {GRID_BIT_LIMIT} bits"
            )));
        }
        match sorted.len() {
            1 => {
                let mut s = MSet::singleton_zero(&caps);
                s.insert(&[1]);
                Ok(s)
            }
            2 => {
                // Full rows and full columns always intersect.
                let mut s = MSet::empty(&caps);
                s.fill_run(0, sorted[1] as u64 + 1);
                for b in 1..=sorted[0] as u64 {
                    s.fill_run(b * (caps[0] as u64 + 1), 1);
                }
                Ok(s)
            }
            3 => {
                if sorted[0] + sorted[1] > D3_PROJ_BITS_LIMIT {
                    return Err(BoxError::EnumerationOutOfReach(format!(
                        "3-box {sorted:?} needs 2^(k1+k2) > 2^{D3_PROJ_BITS_LIMIT} projections"
                    )));
                }
                let empties = [
                    BitSet::new(space_size(&base_sides(sorted, 0))),
                    BitSet::new(space_size(&base_sides(sorted, 1))),
                    BitSet::new(space_size(&base_sides(sorted, 2))),
                ];
                Ok(g3_with_forbidden(sorted, &empties, &caps))
            }
            4 => self.ach_tower4(sorted),
            _ => {
                let forbidden: Vec<BitSet> = (0..sorted.len())
                    .map(|s| BitSet::new(space_size(&base_sides(sorted, s))))
                    .collect();
                self.ach_rec(sorted, &forbidden)
            }
        }
    }

    /// 4-box enumeration: slice along the largest axis; long-line sets matter
    /// only through (count, value projections), deduplicated under per-axis
    /// value relabelings before the expensive slice analysis.
    fn ach_tower4(&mut self, sorted: &[u32]) -> Result<MSet, BoxError> {
        let base: Vec<u32> = sorted[..3].to_vec();
        let height = sorted[3];
        let analysis = self.base_analysis(&base)?;

        let caps = full_caps(sorted);
        let part_caps = &caps[..3];
        let mut out = MSet::empty(&caps);
        let stride_q = out.strides[3];
        for (value, n_mask) in &analysis.values {
            let folded = value.embedded(part_caps).minkowski_power(height);
            let mut mask = *n_mask;
            while mask != 0 {
                let n = mask.trailing_zeros() as u64;
                mask &= mask - 1;
                out.or_shifted(&folded, n * stride_q);
            }
        }
        Ok(out)
    }

    fn base_analysis(&mut self, base: &[u32]) -> Result<Rc<BaseAnalysis>, BoxError> {
        if let Some(a) = self.base_cache.get(base) {
            return Ok(a.clone());
        }
        let base_vol: u32 = base.iter().product();
        if base_vol > D4_BASE_BITS_LIMIT {
            return Err(BoxError::EnumerationOutOfReach(format!(
                "4-box base {base:?} has {base_vol} cells; long-line enumeration capped at {D4_BASE_BITS_LIMIT}"
            )));
        }
        let (a, b, c) = (base[0], base[1], base[2]);
        let layer = a * b;
        let layer_mask = (1u32 << layer) - 1;

        // Per-layer projections of cell masks: which x₂ rows / x₁ columns are
        // occupied in one (x₁, x₂) layer.
        let rows_tab: Vec<u16> = (0..1u32 << layer)
            .map(|m| {
                let mut rows = 0u16;
                for x2 in 0..b {
                    if m >> (a * x2) & ((1 << a) - 1) != 0 {
                        rows |= 1 << x2;
                    }
                }
                rows
            })
            .collect();
        let cols_tab: Vec<u16> = (0..1u32 << layer)
            .map(|m| {
                let mut cols = 0u16;
                for x2 in 0..b {
                    cols |= (m >> (a * x2) & ((1 << a) - 1)) as u16;
                }
                cols
            })
            .collect();

        // Pass 1: group long-line sets by exact projections, remembering
        // which counts occur. Projections pack into (bc | ac | ab) bits.
        let (bits1, bits2) = ((b * c) as u32, (a * c) as u32);
        let mut by_proj: FastMap<u64, u32> = FastMap::default();
        for q in 0u64..1u64 << base_vol {
            let q = q as u32;
            let (mut p1, mut p2, mut p3) = (0u64, 0u64, 0u64);
            for l in 0..c {
                let lm = q >> (layer * l) & layer_mask;
                p3 |= lm as u64;
                p1 |= (rows_tab[lm as usize] as u64) << (b * l);
                p2 |= (cols_tab[lm as usize] as u64) << (a * l);
            }
            let key = p1 | p2 << bits1 | p3 << (bits1 + bits2);
            *by_proj.entry(key).or_insert(0) |= 1 << q.count_ones();
        }

        // Pass 2: canonicalize projection triples under per-axis value
        // relabelings (they fix m-vectors, so slice values coincide).
        let canon = ProjCanonicalizer::new(base);
        let mut by_canon: FastMap<u64, u32> = FastMap::default();
        for (&key, &n_mask) in &by_proj {
            let p1 = key & ((1 << bits1) - 1);
            let p2 = key >> bits1 & ((1 << bits2) - 1);
            let p3 = key >> (bits1 + bits2);
            *by_canon
                .entry(canon.canonical(p1, p2, p3))
                .or_insert(0) |= n_mask;
        }
        drop(by_proj);

        // Pass 3: slice values per canonical class, deduplicated by value.
        let slice_caps = full_caps(&base);
        let mut by_value: HashMap<Rc<MSet>, u32> = HashMap::new();
        for (&key, &n_mask) in &by_canon {
            let p1 = key & ((1 << bits1) - 1);
            let p2 = key >> bits1 & ((1 << bits2) - 1);
            let p3 = key >> (bits1 + bits2);
            let forbidden = [
                mask_to_bitset(p1, (b * c) as usize),
                mask_to_bitset(p2, (a * c) as usize),
                mask_to_bitset(p3, (a * b) as usize),
            ];
            let value = Rc::new(g3_with_forbidden(&base, &forbidden, &slice_caps));
            *by_value.entry(value).or_insert(0) |= n_mask;
        }

        let analysis = Rc::new(BaseAnalysis {
            values: by_value
                .into_iter()
                .map(|(v, m)| (Rc::try_unwrap(v).unwrap_or_else(|rc| (*rc).clone()), m))
                .collect(),
        });
        self.base_cache.insert(base.to_vec(), analysis.clone());
        Ok(analysis)
    }

    /// Generic slicing recursion for dimension ≥ 5 (and sub-calls with
    /// forbidden bases). Slices along the last (largest) axis; per-slice
    /// forbidden sets combine the restriction of the incoming sets with the
    /// projections of the chosen long-line set.
    fn ach_rec(&mut self, dims: &[u32], forbidden: &[BitSet]) -> Result<MSet, BoxError> {
        let caps = full_caps(dims);
        let d = dims.len();
        if d == 1 {
            let mut s = MSet::singleton_zero(&caps);
            if forbidden[0].is_empty() {
                s.insert(&[1]);
            }
            return Ok(s);
        }
        if d == 2 {
            let mut s = MSet::empty(&caps);
            let free_rows = dims[1] - forbidden[0].count() as u32;
            let free_cols = dims[0] - forbidden[1].count() as u32;
            s.fill_run(0, free_rows as u64 + 1);
            for b in 1..=free_cols as u64 {
                s.fill_run(b * (caps[0] as u64 + 1), 1);
            }
            return Ok(s);
        }
        if d == 3 {
            if dims[0] + dims[1] > D3_PROJ_BITS_LIMIT {
                return Err(BoxError::EnumerationOutOfReach(format!(
                    "3-box {dims:?} projection space too large"
                )));
            }
            return Ok(g3_with_forbidden(dims, forbidden, &caps));
        }

        let memo_key = (
            dims.to_vec(),
            forbidden.iter().map(bitset_words).collect::<Vec<_>>(),
        );
        if let Some(v) = self.rec_memo.get(&memo_key) {
            return Ok((**v).clone());
        }

        let last = d - 1;
        let height = dims[last] as usize;
        let base_dims: Vec<u32> = dims[..last].to_vec();
        let base_vol = space_size(&base_dims);
        let free: Vec<usize> = (0..base_vol)
            .filter(|&i| !forbidden[last].contains(i))
            .collect();
        if free.len() as u32 > REC_BASE_BITS_LIMIT {
            return Err(BoxError::EnumerationOutOfReach(format!(
                "box {dims:?}: {} long-line candidates exceed the recursion cap",
                free.len()
            )));
        }

        let mut out = MSet::empty(&caps);
        let part_caps = &caps[..last];
        let stride_q = out.strides[last];
        for mask in 0u64..1u64 << free.len() {
            let q_cells: Vec<usize> = (0..free.len())
                .filter(|&i| mask >> i & 1 == 1)
                .map(|i| free[i])
                .collect();
            // Slice forbidden sets: restriction of the incoming sets plus the
            // projections of the long-line set.
            let mut folded: Option<MSet> = None;
            for j in 0..height {
                let child_forb = slice_forbidden(dims, forbidden, &q_cells, j as u32);
                let v = self.ach_rec(&base_dims, &child_forb)?;
                let v = v.embedded(part_caps);
                folded = Some(match folded {
                    None => v,
                    Some(acc) => acc.minkowski(&v),
                });
            }
            let folded = folded.expect("boxes have at least 2 slices");
            out.or_shifted(&folded, q_cells.len() as u64 * stride_q);
        }
        let rc = Rc::new(out);
        self.rec_memo.insert(memo_key, rc.clone());
        Ok((*rc).clone())
    }
}

fn full_caps(dims: &[u32]) -> Vec<u32> {
    let vol: u64 = dims.iter().map(|&k| k as u64).product();
    dims.iter().map(|&k| (vol / k as u64) as u32).collect()
}

fn mask_to_bitset(mask: u64, len: usize) -> BitSet {
    let mut b = BitSet::new(len);
    for i in 0..len {
        if mask >> i & 1 == 1 {
            b.insert(i);
        }
    }
    b
}

fn bitset_words(b: &BitSet) -> Vec<u64> {
    b.iter().fold(vec![0u64; b.len().div_ceil(64)], |mut w, i| {
        w[i / 64] |= 1 << (i % 64);
        w
    })
}

/// Forbidden base sets for slice `j` of a box sliced along its last axis:
/// for each direction `s` of the slice, the incoming direction-`s` bases
/// whose last coordinate is `j`, plus the drop-`s` projections of the chosen
/// long-line cells.
fn slice_forbidden(
    dims: &[u32],
    forbidden: &[BitSet],
    q_cells: &[usize],
    j: u32,
) -> Vec<BitSet> {
    let last = dims.len() - 1;
    let base_dims: Vec<u32> = dims[..last].to_vec();
    let mut out = Vec::with_capacity(last);
    for s in 0..last {
        let parent_sides = base_sides(dims, s);
        let child_sides = base_sides(&base_dims, s);
        let mut f = BitSet::new(space_size(&child_sides));
        // Position of the sliced axis within direction-s base tuples.
        let last_pos = last - 1;
        for idx in forbidden[s].iter() {
            let digits = decode(&parent_sides, idx);
            if digits[last_pos] == j {
                f.insert(encode(&child_sides, &digits[..last_pos]));
            }
        }
        // Projections of the long-line set: drop coordinate s.
        let s_pos = s; // within full base tuples (axes 0..last)
        for &cell in q_cells {
            let digits = decode(&base_dims, cell);
            let mut proj: Vec<u32> = Vec::with_capacity(last - 1);
            proj.extend_from_slice(&digits[..s_pos]);
            proj.extend_from_slice(&digits[s_pos + 1..]);
            f.insert(encode(&child_sides, &proj));
        }
        out.push(f);
    }
    out
}

// ---------------------------------------------------------------------------
// Canonicalization of projection triples under per-axis value relabelings
// ---------------------------------------------------------------------------

struct ProjCanonicalizer {
    /// Per group element, lookup tables mapping each projection mask to its
    /// relabeled image.
    tables: Vec<[Vec<u32>; 3]>,
    bits: [u32; 3],
}

impl ProjCanonicalizer {
    fn new(base: &[u32]) -> ProjCanonicalizer {
        let (a, b, c) = (base[0] as usize, base[1] as usize, base[2] as usize);
        let perms_a = permutations(a);
        let perms_b = permutations(b);
        let perms_c = permutations(c);
        let spaces = [
            base_sides(base, 0), // (x₂, x₃)
            base_sides(base, 1), // (x₁, x₃)
            base_sides(base, 2), // (x₁, x₂)
        ];
        let mut tables = Vec::with_capacity(perms_a.len() * perms_b.len() * perms_c.len());
        for pa in &perms_a {
            for pb in &perms_b {
                for pc in &perms_c {
                    let axis_perms: [&[usize]; 3] = [pa, pb, pc];
                    let mut tabs: [Vec<u32>; 3] = [Vec::new(), Vec::new(), Vec::new()];
                    for (si, space) in spaces.iter().enumerate() {
                        // Axes present in this space.
                        let axes: [usize; 2] = match si {
                            0 => [1, 2],
                            1 => [0, 2],
                            _ => [0, 1],
                        };
                        let size = space_size(space);
                        let mut tab = vec![0u32; 1 << size];
                        for mask in 0..1u32 << size {
                            let mut img = 0u32;
                            let mut m = mask;
                            while m != 0 {
                                let idx = m.trailing_zeros() as usize;
                                m &= m - 1;
                                let digs = decode(space, idx);
                                let new = [
                                    axis_perms[axes[0]][digs[0] as usize] as u32,
                                    axis_perms[axes[1]][digs[1] as usize] as u32,
                                ];
                                img |= 1 << encode(space, &new);
                            }
                            tab[mask as usize] = img;
                        }
                        tabs[si] = tab;
                    }
                    tables.push(tabs);
                }
            }
        }
        ProjCanonicalizer {
            tables,
            bits: [(b * c) as u32, (a * c) as u32, (a * b) as u32],
        }
    }

    fn canonical(&self, p1: u64, p2: u64, p3: u64) -> u64 {
        let mut best = u64::MAX;
        for tabs in &self.tables {
            let key = tabs[0][p1 as usize] as u64
                | (tabs[1][p2 as usize] as u64) << self.bits[0]
                | (tabs[2][p3 as usize] as u64) << (self.bits[0] + self.bits[1]);
            best = best.min(key);
        }
        best
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut items: Vec<usize> = (0..n).collect();
    heap_permute(&mut items, n, &mut out);
    out
}

fn heap_permute(items: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k <= 1 {
        out.push(items.clone());
        return;
    }
    for i in 0..k {
        heap_permute(items, k - 1, out);
        if k % 2 == 0 {
            items.swap(i, k - 1);
        } else {
            items.swap(0, k - 1);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dims(sides: &[u32]) -> BoxDims {
        BoxDims::new(sides).unwrap()
    }

    fn engine() -> MVectorEngine {
        MVectorEngine::with_default_limit()
    }

    fn mv(v: &[u32]) -> MVector {
        MVector(v.to_vec())
    }

    #[test]
    fn spec_example_2x3() {
        let set = engine().achievable(&dims(&[2, 3])).unwrap();
        let expected: BTreeSet<MVector> = [
            mv(&[0, 0]),
            mv(&[1, 0]),
            mv(&[2, 0]),
            mv(&[3, 0]),
            mv(&[0, 1]),
            mv(&[0, 2]),
        ]
        .into_iter()
        .collect();
        assert_eq!(set, expected);
    }

    #[test]
    fn spec_example_2x2x2_contains_orthogonal_triple() {
        let set = engine().achievable(&dims(&[2, 2, 2])).unwrap();
        assert!(set.contains(&mv(&[1, 1, 1])));
    }

    #[test]
    fn spec_example_single_axis() {
        let set = engine().achievable(&dims(&[2])).unwrap();
        let expected: BTreeSet<MVector> = [mv(&[0]), mv(&[1])].into_iter().collect();
        assert_eq!(set, expected);
    }

    #[test]
    fn bruteforce_agrees_with_engine_on_small_boxes() {
        let cases: &[&[u32]] = &[
            &[2],
            &[5],
            &[2, 2],
            &[2, 3],
            &[3, 3],
            &[2, 5],
            &[2, 2, 2],
            &[2, 2, 3],
            &[2, 3, 3],
            &[2, 2, 5],
            &[3, 3, 3],
            &[2, 3, 4],
            &[2, 2, 2, 2],
            &[2, 2, 2, 3],
            &[2, 2, 3, 3],
            &[2, 2, 2, 2, 2],
        ];
        let mut eng = engine();
        for sides in cases {
            let b = dims(sides);
            assert_eq!(
                eng.achievable(&b).unwrap(),
                achievable_m_vectors_bruteforce(&b),
                "box {sides:?}"
            );
        }
    }

    #[test]
    fn unsorted_axes_map_back_correctly() {
        let mut eng = engine();
        let a = eng.achievable(&dims(&[3, 2])).unwrap();
        let b = eng.achievable(&dims(&[2, 3])).unwrap();
        let swapped: BTreeSet<MVector> = b
            .iter()
            .map(|m| mv(&[m.0[1], m.0[0]]))
            .collect();
        assert_eq!(a, swapped);
        assert_eq!(a, achievable_m_vectors_bruteforce(&dims(&[3, 2])));
    }

    #[test]
    fn volume_limit_enforced() {
        let b = dims(&[16, 16, 16]);
        assert!(matches!(
            MVectorEngine::new(1000).achievable(&b),
            Err(BoxError::VolumeLimit { .. })
        ));
    }

    #[test]
    fn family_enumeration_counts_2x2() {
        // (2,2): families are subsets of the 2 rows or of the 2 columns:
        // {} + 2 single rows + 1 double row + same for columns = 7.
        let mut count = 0usize;
        for_each_line_family(&dims(&[2, 2]), &mut |_| {
            count += 1;
            ControlFlow::Continue(())
        });
        assert_eq!(count, 7);
    }

    #[test]
    fn count_identity_on_enumerated_families() {
        // |union of family| == Σ m_s k_s, family by family.
        for sides in [&[2u32, 3][..], &[2, 2, 2], &[2, 2, 3]] {
            let b = dims(sides);
            let lines = all_lines(&b);
            for_each_line_family(&b, &mut |family| {
                let mut union = BitSet::new(b.cell_count());
                let mut weighted = 0u64;
                for &i in family {
                    union.union_with(lines[i].cells(&b).bits());
                    weighted += b.sides()[lines[i].axis()] as u64;
                }
                assert_eq!(union.count() as u64, weighted);
                ControlFlow::Continue(())
            });
        }
    }
}
