//! Discrete boxes `[k₁]×⋯×[k_d]`, axis lines, and line-complementability.
//!
//! A *line* fixes every coordinate except one, which ranges over its full
//! side. A subset `D` of the box is *complementable by lines* when the
//! complement partitions into pairwise disjoint lines; the partition witness
//! is found by exact-cover backtracking. Since disjoint lines in direction
//! `s` each cover `k_s` cells, the size of `D` is determined by the
//! per-direction line counts alone: `|D| = Πkᵢ − Σ m_s·k_s`.

mod exact_cover;
mod mvec;

pub use exact_cover::ExactCover;
pub use mvec::{
    achievable_m_vectors, achievable_m_vectors_bruteforce, for_each_line_family, MVectorEngine,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::BitSet;
use crate::semigroup::{DenominationVector, ResidueTable};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BoxError {
    #[error("a box needs at least one side")]
    NoSides,
    #[error("box sides must be at least 2, got {0}")]
    SideTooSmall(u32),
    #[error("box volume overflows u64")]
    VolumeOverflow,
    #[error("coordinate {value} out of range 1..={side} on axis {axis}")]
    CoordinateOutOfRange { axis: usize, value: u32, side: u32 },
    #[error("axis {0} out of range for dimension {1}")]
    AxisOutOfRange(usize, usize),
    #[error("coordinate tuple has {got} entries, box has dimension {want}")]
    WrongArity { got: usize, want: usize },
    #[error("line counts {got} entries, box has dimension {want}")]
    WrongMVectorArity { got: usize, want: usize },
    #[error("line family covers more cells than the box holds")]
    FamilyTooLarge,
    #[error("volume {volume} exceeds the enumeration limit {limit}")]
    VolumeLimit { volume: u64, limit: u64 },
    #[error("box shape out of reach for the m-vector engine: {0}")]
    EnumerationOutOfReach(String),
    #[error("not a partition: {0}")]
    NotAPartition(String),
}

/// Side lengths of a discrete box; every side is at least 2.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct BoxDims {
    sides: Vec<u32>,
    volume: u64,
}

impl BoxDims {
    pub fn new(sides: impl Into<Vec<u32>>) -> Result<Self, BoxError> {
        let sides = sides.into();
        if sides.is_empty() {
            return Err(BoxError::NoSides);
        }
        if let Some(&bad) = sides.iter().find(|&&s| s < 2) {
            return Err(BoxError::SideTooSmall(bad));
        }
        let volume = sides
            .iter()
            .try_fold(1u64, |acc, &s| acc.checked_mul(s as u64))
            .ok_or(BoxError::VolumeOverflow)?;
        Ok(BoxDims { sides, volume })
    }

    pub fn sides(&self) -> &[u32] {
        &self.sides
    }

    pub fn dim(&self) -> usize {
        self.sides.len()
    }

    pub fn volume(&self) -> u64 {
        self.volume
    }

    pub fn cell_count(&self) -> usize {
        self.volume as usize
    }

    /// Mixed-radix index of a 1-based cell, coordinate 1 fastest-varying.
    pub fn cell_index(&self, coords: &[u32]) -> Result<usize, BoxError> {
        if coords.len() != self.dim() {
            return Err(BoxError::WrongArity {
                got: coords.len(),
                want: self.dim(),
            });
        }
        let mut idx = 0usize;
        for (axis, (&x, &side)) in coords.iter().zip(&self.sides).enumerate().rev() {
            if x < 1 || x > side {
                return Err(BoxError::CoordinateOutOfRange {
                    axis: axis + 1,
                    value: x,
                    side,
                });
            }
            idx = idx * side as usize + (x - 1) as usize;
        }
        Ok(idx)
    }

    /// Inverse of [`cell_index`](Self::cell_index).
    pub fn cell_coords(&self, mut idx: usize) -> Vec<u32> {
        debug_assert!(idx < self.cell_count());
        let mut coords = Vec::with_capacity(self.dim());
        for &side in &self.sides {
            coords.push((idx % side as usize) as u32 + 1);
            idx /= side as usize;
        }
        coords
    }

    /// The sides as a coin system.
    pub fn denominations(&self) -> DenominationVector {
        DenominationVector::new(self.sides.iter().map(|&s| s as u64).collect::<Vec<_>>())
            .expect("sides >= 2 are valid denominations")
    }
}

impl TryFrom<Vec<u32>> for BoxDims {
    type Error = BoxError;
    fn try_from(sides: Vec<u32>) -> Result<Self, BoxError> {
        BoxDims::new(sides)
    }
}

impl From<BoxDims> for Vec<u32> {
    fn from(b: BoxDims) -> Vec<u32> {
        b.sides
    }
}

impl std::fmt::Display for BoxDims {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, s) in self.sides.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{s}")?;
        }
        write!(f, ")")
    }
}

/// A subset of a box's cells, bit-indexed in mixed-radix order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellSet {
    dims: BoxDims,
    bits: BitSet,
}

impl CellSet {
    pub fn empty(dims: &BoxDims) -> CellSet {
        CellSet {
            bits: BitSet::new(dims.cell_count()),
            dims: dims.clone(),
        }
    }

    pub fn full(dims: &BoxDims) -> CellSet {
        let mut s = CellSet::empty(dims);
        s.bits.invert();
        s
    }

    /// Builds from 1-based coordinate tuples, rejecting out-of-range cells.
    pub fn from_cells(dims: &BoxDims, cells: &[Vec<u32>]) -> Result<CellSet, BoxError> {
        let mut s = CellSet::empty(dims);
        for c in cells {
            let idx = dims.cell_index(c)?;
            s.bits.insert(idx);
        }
        Ok(s)
    }

    pub fn dims(&self) -> &BoxDims {
        &self.dims
    }

    pub fn insert_index(&mut self, idx: usize) {
        self.bits.insert(idx);
    }

    pub fn contains_index(&self, idx: usize) -> bool {
        self.bits.contains(idx)
    }

    pub fn contains(&self, coords: &[u32]) -> Result<bool, BoxError> {
        Ok(self.bits.contains(self.dims.cell_index(coords)?))
    }

    /// Exact cardinality.
    pub fn len(&self) -> u64 {
        self.bits.count() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn complement(&self) -> CellSet {
        let mut c = self.clone();
        c.bits.invert();
        c
    }

    pub fn is_subset_of(&self, other: &CellSet) -> bool {
        self.bits.is_subset_of(&other.bits)
    }

    pub fn is_disjoint_from(&self, other: &CellSet) -> bool {
        self.bits.is_disjoint_from(&other.bits)
    }

    pub fn union_with(&mut self, other: &CellSet) {
        self.bits.union_with(&other.bits);
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter()
    }

    /// 1-based coordinate tuples, ascending by cell index.
    pub fn cells(&self) -> Vec<Vec<u32>> {
        self.bits.iter().map(|i| self.dims.cell_coords(i)).collect()
    }

    pub fn bits(&self) -> &BitSet {
        &self.bits
    }
}

/// An axis line: one coordinate ranges over its full side, the rest are fixed.
///
/// `base` stores all `d` coordinates with the varying axis normalized to 1.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Line {
    axis: usize,
    base: Vec<u32>,
}

impl Line {
    /// `axis` is 0-based; entries of `base` off the axis are the fixed
    /// coordinates (1-based), the entry on the axis is ignored.
    pub fn new(dims: &BoxDims, axis: usize, base: impl Into<Vec<u32>>) -> Result<Line, BoxError> {
        let mut base = base.into();
        if axis >= dims.dim() {
            return Err(BoxError::AxisOutOfRange(axis, dims.dim()));
        }
        if base.len() != dims.dim() {
            return Err(BoxError::WrongArity {
                got: base.len(),
                want: dims.dim(),
            });
        }
        base[axis] = 1;
        for (i, (&x, &side)) in base.iter().zip(dims.sides()).enumerate() {
            if x < 1 || x > side {
                return Err(BoxError::CoordinateOutOfRange {
                    axis: i + 1,
                    value: x,
                    side,
                });
            }
        }
        Ok(Line { axis, base })
    }

    /// 0-based direction index.
    pub fn axis(&self) -> usize {
        self.axis
    }

    /// Fixed coordinates with the varying axis slot normalized to 1.
    pub fn base(&self) -> &[u32] {
        &self.base
    }

    /// Cell indices along the line, ascending.
    pub fn cell_indices<'a>(&'a self, dims: &'a BoxDims) -> impl Iterator<Item = usize> + 'a {
        let start = dims
            .cell_index(&self.base)
            .expect("line base validated at construction");
        let stride: usize = dims.sides()[..self.axis]
            .iter()
            .map(|&s| s as usize)
            .product();
        (0..dims.sides()[self.axis] as usize).map(move |t| start + t * stride)
    }

    /// Exactly the `k_s` cells of the line.
    pub fn cells(&self, dims: &BoxDims) -> CellSet {
        let mut s = CellSet::empty(dims);
        for idx in self.cell_indices(dims) {
            s.insert_index(idx);
        }
        s
    }
}

/// Every line of the box in canonical order: axis ascending, then base in
/// mixed-radix order over the off-axis coordinates.
pub fn all_lines(dims: &BoxDims) -> Vec<Line> {
    let d = dims.dim();
    let mut lines = Vec::new();
    for axis in 0..d {
        let mut base = vec![1u32; d];
        loop {
            lines.push(Line {
                axis,
                base: base.clone(),
            });
            // Odometer over the off-axis coordinates.
            let mut carry = true;
            for i in (0..d).filter(|&i| i != axis) {
                base[i] += 1;
                if base[i] <= dims.sides()[i] {
                    carry = false;
                    break;
                }
                base[i] = 1;
            }
            if carry {
                break;
            }
        }
    }
    lines
}

/// A family of pairwise disjoint lines, usually a partition witness for a
/// complement.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineDecomposition {
    pub lines: Vec<Line>,
}

impl LineDecomposition {
    pub fn empty() -> Self {
        LineDecomposition { lines: Vec::new() }
    }

    /// Per-direction line counts.
    pub fn m_vector(&self, dims: &BoxDims) -> MVector {
        let mut counts = vec![0u32; dims.dim()];
        for l in &self.lines {
            counts[l.axis()] += 1;
        }
        MVector(counts)
    }

    pub fn union_cells(&self, dims: &BoxDims) -> CellSet {
        let mut u = CellSet::empty(dims);
        for l in &self.lines {
            u.union_with(&l.cells(dims));
        }
        u
    }

    /// Checks the witness contract: lines pairwise disjoint, union exactly
    /// `target`.
    pub fn validate_partition_of(
        &self,
        dims: &BoxDims,
        target: &CellSet,
    ) -> Result<(), BoxError> {
        let mut seen = CellSet::empty(dims);
        for (i, l) in self.lines.iter().enumerate() {
            let cells = l.cells(dims);
            if !cells.is_disjoint_from(&seen) {
                return Err(BoxError::NotAPartition(format!(
                    "line {i} overlaps an earlier line"
                )));
            }
            if !cells.is_subset_of(target) {
                return Err(BoxError::NotAPartition(format!(
                    "line {i} leaves the target set"
                )));
            }
            seen.union_with(&cells);
        }
        if &seen != target {
            return Err(BoxError::NotAPartition(
                "union does not cover the target set".into(),
            ));
        }
        Ok(())
    }
}

/// Per-direction counts of a disjoint line family.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MVector(pub Vec<u32>);

impl MVector {
    pub fn counts(&self) -> &[u32] {
        &self.0
    }
}

impl std::fmt::Display for MVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Cells left uncovered by any disjoint line family with counts `m`:
/// `Πkᵢ − Σ m_s·k_s`. This is `|D|` for every `D` whose complement has a
/// disjoint-line partition with those counts.
pub fn uncovered_cell_count(dims: &BoxDims, m: &MVector) -> Result<u64, BoxError> {
    if m.0.len() != dims.dim() {
        return Err(BoxError::WrongMVectorArity {
            got: m.0.len(),
            want: dims.dim(),
        });
    }
    let covered: u64 = m
        .0
        .iter()
        .zip(dims.sides())
        .map(|(&c, &k)| c as u64 * k as u64)
        .sum();
    dims.volume()
        .checked_sub(covered)
        .ok_or(BoxError::FamilyTooLarge)
}

/// Partition of `target` into pairwise disjoint lines, if one exists.
///
/// Candidate lines are those fully contained in `target`; the exact-cover
/// search repeatedly branches on an uncovered cell with the fewest remaining
/// candidate lines. The empty set decomposes into the empty family.
pub fn decompose_into_lines(dims: &BoxDims, target: &CellSet) -> Option<LineDecomposition> {
    debug_assert_eq!(target.dims(), dims);
    let lines = all_lines(dims);
    let candidates: Vec<(usize, BitSet)> = lines
        .iter()
        .enumerate()
        .filter(|(_, l)| l.cells(dims).bits().is_subset_of(target.bits()))
        .map(|(i, l)| (i, l.cells(dims).bits().clone()))
        .collect();
    let rows: Vec<BitSet> = candidates.iter().map(|(_, b)| b.clone()).collect();
    let cover = ExactCover::new(dims.cell_count(), rows);
    cover.first_cover(target.bits()).map(|sol| LineDecomposition {
        lines: sol.into_iter().map(|r| lines[candidates[r].0].clone()).collect(),
    })
}

/// Whether the complement of `d_set` partitions into disjoint lines.
pub fn is_complementable_by_lines(dims: &BoxDims, d_set: &CellSet) -> bool {
    complement_line_decomposition(dims, d_set).is_some()
}

/// Witness variant of [`is_complementable_by_lines`].
pub fn complement_line_decomposition(
    dims: &BoxDims,
    d_set: &CellSet,
) -> Option<LineDecomposition> {
    decompose_into_lines(dims, &d_set.complement())
}

/// One size that violates representability, a candidate counterexample.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MViolation {
    pub m: MVector,
    pub size: u64,
}

/// Result of checking every achievable m-vector of a box against the coin
/// system of its sides.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConjectureReport {
    pub dims: BoxDims,
    pub m_vectors_checked: u64,
    pub violations: Vec<MViolation>,
}

/// For every achievable m-vector of the box, tests representability of the
/// uncovered-cell count. A non-empty violation list is a counterexample to
/// the conjecture.
pub fn check_conjecture_box(
    dims: &BoxDims,
    table: &ResidueTable,
    engine: &mut MVectorEngine,
) -> Result<ConjectureReport, BoxError> {
    let m_vectors = engine.achievable(dims)?;
    let mut violations = Vec::new();
    let mut checked = 0u64;
    for m in &m_vectors {
        let size = uncovered_cell_count(dims, m)?;
        checked += 1;
        if !table.is_representable(size) {
            violations.push(MViolation { m: m.clone(), size });
        }
    }
    Ok(ConjectureReport {
        dims: dims.clone(),
        m_vectors_checked: checked,
        violations,
    })
}

/// On-disk form of a box plus a cell subset: `{"k":[…],"cells":[[x1,…,xd],…]}`
/// with 1-based coordinates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoxSubsetFile {
    pub k: Vec<u32>,
    pub cells: Vec<Vec<u32>>,
}

impl BoxSubsetFile {
    pub fn parse(json: &str) -> Result<(BoxDims, CellSet), String> {
        let file: BoxSubsetFile = serde_json::from_str(json).map_err(|e| e.to_string())?;
        let dims = BoxDims::new(file.k).map_err(|e| e.to_string())?;
        let cells = CellSet::from_cells(&dims, &file.cells).map_err(|e| e.to_string())?;
        Ok((dims, cells))
    }

    pub fn render(dims: &BoxDims, cells: &CellSet) -> String {
        let file = BoxSubsetFile {
            k: dims.sides().to_vec(),
            cells: cells.cells(),
        };
        serde_json::to_string_pretty(&file).expect("serializable")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dims(sides: &[u32]) -> BoxDims {
        BoxDims::new(sides).unwrap()
    }

    #[test]
    fn cell_indexing_round_trips() {
        let b = dims(&[2, 3, 5]);
        assert_eq!(b.volume(), 30);
        for idx in 0..b.cell_count() {
            let coords = b.cell_coords(idx);
            assert_eq!(b.cell_index(&coords).unwrap(), idx);
        }
        // Coordinate 1 fastest-varying.
        assert_eq!(b.cell_index(&[2, 1, 1]).unwrap(), 1);
        assert_eq!(b.cell_index(&[1, 2, 1]).unwrap(), 2);
    }

    #[test]
    fn rejects_degenerate_boxes() {
        assert_eq!(BoxDims::new(vec![]).unwrap_err(), BoxError::NoSides);
        assert_eq!(BoxDims::new(vec![2, 1]).unwrap_err(), BoxError::SideTooSmall(1));
    }

    #[test]
    fn line_cells_examples() {
        // box (2,3), line dir=2 base x1=1 -> {(1,1),(1,2),(1,3)}
        let b = dims(&[2, 3]);
        let l = Line::new(&b, 1, vec![1, 1]).unwrap();
        assert_eq!(l.cells(&b).cells(), vec![vec![1, 1], vec![1, 2], vec![1, 3]]);

        // box (2,2,2), line dir=1 base (x2,x3)=(2,2) -> {(1,2,2),(2,2,2)}
        let b = dims(&[2, 2, 2]);
        let l = Line::new(&b, 0, vec![1, 2, 2]).unwrap();
        assert_eq!(l.cells(&b).cells(), vec![vec![1, 2, 2], vec![2, 2, 2]]);

        // box (4,), line dir=1 -> whole box
        let b = dims(&[4]);
        let l = Line::new(&b, 0, vec![1]).unwrap();
        assert_eq!(l.cells(&b).len(), 4);
        assert_eq!(l.cells(&b), CellSet::full(&b));
    }

    #[test]
    fn line_rejects_bad_base() {
        let b = dims(&[2, 3]);
        assert!(matches!(
            Line::new(&b, 0, vec![1, 4]),
            Err(BoxError::CoordinateOutOfRange { .. })
        ));
        assert!(matches!(
            Line::new(&b, 2, vec![1, 1]),
            Err(BoxError::AxisOutOfRange(2, 2))
        ));
    }

    #[test]
    fn all_lines_counts() {
        // Directions contribute volume / k_s lines each.
        let b = dims(&[2, 3, 5]);
        let lines = all_lines(&b);
        assert_eq!(lines.len(), 15 + 10 + 6);
        // Pairwise distinct.
        let mut sorted = lines.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), lines.len());
    }

    #[test]
    fn decompose_examples() {
        // box (2,2), C={(1,2),(2,1)}: no axis line fits.
        let b = dims(&[2, 2]);
        let c = CellSet::from_cells(&b, &[vec![1, 2], vec![2, 1]]).unwrap();
        assert_eq!(decompose_into_lines(&b, &c), None);

        // box (2,2), C={(2,1),(2,2)}: the column x1=2.
        let c = CellSet::from_cells(&b, &[vec![2, 1], vec![2, 2]]).unwrap();
        let dec = decompose_into_lines(&b, &c).unwrap();
        assert_eq!(dec.lines.len(), 1);
        assert_eq!(dec.lines[0].axis(), 1);
        assert_eq!(dec.lines[0].base(), &[2, 1]);
        dec.validate_partition_of(&b, &c).unwrap();

        // Empty set -> empty decomposition.
        let b = dims(&[3, 3]);
        let dec = decompose_into_lines(&b, &CellSet::empty(&b)).unwrap();
        assert!(dec.lines.is_empty());
    }

    #[test]
    fn complementability_examples() {
        // box (2,3), D = {2}x[3]: complement is one line.
        let b = dims(&[2, 3]);
        let d = CellSet::from_cells(&b, &[vec![2, 1], vec![2, 2], vec![2, 3]]).unwrap();
        let dec = complement_line_decomposition(&b, &d).unwrap();
        dec.validate_partition_of(&b, &d.complement()).unwrap();

        // box (2,2), D={(1,1),(2,2)}: not complementable.
        let b = dims(&[2, 2]);
        let d = CellSet::from_cells(&b, &[vec![1, 1], vec![2, 2]]).unwrap();
        assert!(!is_complementable_by_lines(&b, &d));

        // D = [k]: empty complement.
        assert!(is_complementable_by_lines(&b, &CellSet::full(&b)));
    }

    #[test]
    fn uncovered_count_examples() {
        let b = dims(&[2, 3]);
        assert_eq!(uncovered_cell_count(&b, &MVector(vec![1, 0])).unwrap(), 4);
        let b = dims(&[2, 3, 5]);
        assert_eq!(uncovered_cell_count(&b, &MVector(vec![0, 0, 0])).unwrap(), 30);
        let b = dims(&[2, 2, 2]);
        assert_eq!(uncovered_cell_count(&b, &MVector(vec![1, 1, 1])).unwrap(), 2);
        assert_eq!(
            uncovered_cell_count(&b, &MVector(vec![4, 1, 0])),
            Err(BoxError::FamilyTooLarge)
        );
    }

    #[test]
    fn decomposability_invariant_under_coordinate_permutation() {
        // Permute a (2,3) subset into a (3,2) subset and compare verdicts.
        let b = dims(&[2, 3]);
        let bp = dims(&[3, 2]);
        for mask in 0..64u32 {
            let mut d = CellSet::empty(&b);
            let mut dp = CellSet::empty(&bp);
            for idx in 0..6 {
                if mask >> idx & 1 == 1 {
                    let c = b.cell_coords(idx);
                    d.insert_index(idx);
                    dp.insert_index(bp.cell_index(&[c[1], c[0]]).unwrap());
                }
            }
            assert_eq!(
                is_complementable_by_lines(&b, &d),
                is_complementable_by_lines(&bp, &dp),
                "mask {mask}"
            );
        }
    }

    #[test]
    fn subset_file_round_trip() {
        let b = dims(&[2, 3]);
        let d = CellSet::from_cells(&b, &[vec![2, 1], vec![1, 3]]).unwrap();
        let json = BoxSubsetFile::render(&b, &d);
        let (b2, d2) = BoxSubsetFile::parse(&json).unwrap();
        assert_eq!(b, b2);
        assert_eq!(d, d2);
    }
}
