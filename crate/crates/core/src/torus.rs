//! Cube tilings of the flat torus `[0,k₁)×⋯×[0,k_d)` with exact rational
//! cube origins.
//!
//! Everything here is exact: coordinates are arbitrary-precision rationals,
//! so disjointness and floor computations carry no tolerances. A tiling is
//! `Πkᵢ` pairwise-disjoint half-open unit cubes; since they are half-open and
//! exhaust the torus measure, pairwise disjointness plus the count forces a
//! genuine tiling. The *integer code* of an origin `t` is the box cell
//! `(⌊t₁⌋+1, …, ⌊t_d⌋+1)`; a *simple component* groups origins whose
//! differences are integral, equivalently origins with equal fractional
//! parts. The restriction of the code map to any valid tiling is a bijection
//! onto the box (Keller's theorem) — [`TorusTiling::keller_check`] asserts it
//! at runtime rather than re-proving it, and a failure indicates a bug.

use std::collections::BTreeMap;
use std::ops::ControlFlow;
use std::str::FromStr;

use num::{BigInt, BigRational, One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::BitSet;
use crate::boxgeom::{
    is_complementable_by_lines, BoxDims, CellSet, ExactCover, LineDecomposition,
};
use crate::semigroup::ResidueTable;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TorusError {
    #[error("point has {got} coordinates, torus dimension is {want}")]
    WrongArity { got: usize, want: usize },
    #[error("coordinate {axis} out of torus range [0, k)")]
    CoordinateOutOfRange { axis: usize },
    #[error("invalid rational: {0}")]
    BadRational(String),
    #[error("invalid decomposition: {0}")]
    InvalidDecomposition(String),
    #[error("refinement must be at least 1")]
    ZeroRefinement,
    #[error("refined torus has {cells} cells, enumeration limit is {limit}")]
    ResourceBound { cells: u64, limit: u64 },
}

/// First defect found when validating a tiling.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum TilingViolation {
    WrongArity { point: usize, got: usize, want: usize },
    CoordinateOutOfRange { point: usize, axis: usize },
    CountMismatch { expected: u64, actual: u64 },
    OverlappingCubes { first: usize, second: usize },
}

impl std::fmt::Display for TilingViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TilingViolation::WrongArity { point, got, want } => {
                write!(f, "point {point} has {got} coordinates, expected {want}")
            }
            TilingViolation::CoordinateOutOfRange { point, axis } => {
                write!(f, "point {point} leaves [0, k) on axis {}", axis + 1)
            }
            TilingViolation::CountMismatch { expected, actual } => {
                write!(f, "tiling has {actual} cubes, the torus needs {expected}")
            }
            TilingViolation::OverlappingCubes { first, second } => {
                write!(f, "cubes {first} and {second} overlap")
            }
        }
    }
}

/// A cube origin: exact rational coordinates inside the fundamental domain.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RationalPoint {
    coords: Vec<BigRational>,
}

impl RationalPoint {
    /// Range-checked constructor: `0 ≤ tᵢ < kᵢ`.
    pub fn new(dims: &BoxDims, coords: Vec<BigRational>) -> Result<RationalPoint, TorusError> {
        if coords.len() != dims.dim() {
            return Err(TorusError::WrongArity {
                got: coords.len(),
                want: dims.dim(),
            });
        }
        for (axis, (c, &k)) in coords.iter().zip(dims.sides()).enumerate() {
            if c.is_negative() || *c >= BigRational::from_integer(k.into()) {
                return Err(TorusError::CoordinateOutOfRange { axis });
            }
        }
        Ok(RationalPoint { coords })
    }

    /// Unchecked constructor for data read from files; validation happens in
    /// [`TorusTiling::validate`].
    pub fn from_coords(coords: Vec<BigRational>) -> RationalPoint {
        RationalPoint { coords }
    }

    pub fn from_integers(ints: &[u32]) -> RationalPoint {
        RationalPoint {
            coords: ints
                .iter()
                .map(|&v| BigRational::from_integer(v.into()))
                .collect(),
        }
    }

    pub fn coords(&self) -> &[BigRational] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    fn fractional_parts(&self) -> Vec<BigRational> {
        self.coords.iter().map(|c| c - c.floor()).collect()
    }

    pub fn is_integral(&self) -> bool {
        self.coords.iter().all(|c| c.is_integer())
    }
}

impl std::fmt::Display for RationalPoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// `x mod k`, reduced into `[0, k)`.
fn reduce_mod(x: &BigRational, k: u32) -> BigRational {
    let k = BigRational::from_integer(BigInt::from(k));
    let q = (x / &k).floor();
    x - q * k
}

/// Exact disjointness of the half-open unit cubes at `s` and `t` on the
/// torus: with `δᵢ = (sᵢ − tᵢ) mod kᵢ`, the cubes overlap in coordinate `i`
/// iff `δᵢ < 1` or `δᵢ > kᵢ − 1`; they are disjoint iff some coordinate
/// separates them.
pub fn cubes_disjoint(dims: &BoxDims, s: &RationalPoint, t: &RationalPoint) -> bool {
    let one = BigRational::one();
    for ((sc, tc), &k) in s.coords.iter().zip(&t.coords).zip(dims.sides()) {
        let delta = reduce_mod(&(sc - tc), k);
        let upper = BigRational::from_integer(BigInt::from(k - 1));
        if delta >= one && delta <= upper {
            return true;
        }
    }
    false
}

/// The integer code `ε(t) = (⌊t₁⌋+1, …, ⌊t_d⌋+1)`, a 1-based box cell.
pub fn integer_code(dims: &BoxDims, t: &RationalPoint) -> Result<Vec<u32>, TorusError> {
    if t.dim() != dims.dim() {
        return Err(TorusError::WrongArity {
            got: t.dim(),
            want: dims.dim(),
        });
    }
    let mut code = Vec::with_capacity(t.dim());
    for (axis, (c, &k)) in t.coords.iter().zip(dims.sides()).enumerate() {
        if c.is_negative() || *c >= BigRational::from_integer(k.into()) {
            return Err(TorusError::CoordinateOutOfRange { axis });
        }
        let floor: BigInt = c.floor().to_integer();
        let floor = u32::try_from(floor).expect("floor of in-range coordinate fits u32");
        code.push(floor + 1);
    }
    Ok(code)
}

/// A packing `[0,1)^d ⊕ S` of origins with equal fractional parts, with its
/// code set `ε(S)`.
#[derive(Debug, Clone)]
pub struct SimpleComponent {
    pub representative: RationalPoint,
    pub member_indices: Vec<usize>,
    pub code_set: CellSet,
}

impl SimpleComponent {
    pub fn size(&self) -> u64 {
        self.member_indices.len() as u64
    }
}

/// A candidate cube tiling: torus side lengths plus cube origins.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TorusTiling {
    dims: BoxDims,
    points: Vec<RationalPoint>,
}

impl TorusTiling {
    pub fn new(dims: BoxDims, points: Vec<RationalPoint>) -> TorusTiling {
        TorusTiling { dims, points }
    }

    /// The canonical tiling by all integer points.
    pub fn integer_grid(dims: &BoxDims) -> TorusTiling {
        let points = (0..dims.cell_count())
            .map(|idx| {
                let cell = dims.cell_coords(idx);
                RationalPoint::from_integers(
                    &cell.iter().map(|&x| x - 1).collect::<Vec<_>>(),
                )
            })
            .collect();
        TorusTiling {
            dims: dims.clone(),
            points,
        }
    }

    pub fn dims(&self) -> &BoxDims {
        &self.dims
    }

    pub fn points(&self) -> &[RationalPoint] {
        &self.points
    }

    /// Coordinate ranges, cube count, pairwise disjointness — in that order,
    /// reporting the first violation. Passing implies a genuine tiling
    /// (half-open cubes, finite family, full measure).
    pub fn validate(&self) -> Result<(), TilingViolation> {
        for (i, p) in self.points.iter().enumerate() {
            if p.dim() != self.dims.dim() {
                return Err(TilingViolation::WrongArity {
                    point: i,
                    got: p.dim(),
                    want: self.dims.dim(),
                });
            }
            for (axis, (c, &k)) in p.coords.iter().zip(self.dims.sides()).enumerate() {
                if c.is_negative() || *c >= BigRational::from_integer(k.into()) {
                    return Err(TilingViolation::CoordinateOutOfRange { point: i, axis });
                }
            }
        }
        if self.points.len() as u64 != self.dims.volume() {
            return Err(TilingViolation::CountMismatch {
                expected: self.dims.volume(),
                actual: self.points.len() as u64,
            });
        }
        for i in 0..self.points.len() {
            for j in i + 1..self.points.len() {
                if !cubes_disjoint(&self.dims, &self.points[i], &self.points[j]) {
                    return Err(TilingViolation::OverlappingCubes { first: i, second: j });
                }
            }
        }
        Ok(())
    }

    /// Whether the integer codes of the origins hit every box cell exactly
    /// once. True for every valid tiling by Keller's theorem; `false` on a
    /// validated tiling signals an internal bug.
    pub fn keller_check(&self) -> bool {
        let mut seen = BitSet::new(self.dims.cell_count());
        for p in &self.points {
            let Ok(code) = integer_code(&self.dims, p) else {
                return false;
            };
            let idx = self
                .dims
                .cell_index(&code)
                .expect("codes of in-range points are cells");
            if seen.contains(idx) {
                return false;
            }
            seen.insert(idx);
        }
        seen.count() as u64 == self.dims.volume()
    }

    /// Partition of the origins into classes of equal fractional parts
    /// (equivalently: differences in `ℤ^d`, taken in torus coordinates),
    /// each carrying its code set. Deterministic order: ascending by
    /// fractional-part vector.
    pub fn simple_components(&self) -> Vec<SimpleComponent> {
        let mut groups: BTreeMap<Vec<BigRational>, Vec<usize>> = BTreeMap::new();
        for (i, p) in self.points.iter().enumerate() {
            groups.entry(p.fractional_parts()).or_default().push(i);
        }
        groups
            .into_values()
            .map(|member_indices| {
                let mut code_set = CellSet::empty(&self.dims);
                for &i in &member_indices {
                    let code = integer_code(&self.dims, &self.points[i])
                        .expect("component extraction runs on validated tilings");
                    let idx = self.dims.cell_index(&code).expect("code is a cell");
                    debug_assert!(
                        !code_set.contains_index(idx),
                        "codes within a component are distinct"
                    );
                    code_set.insert_index(idx);
                }
                SimpleComponent {
                    representative: self.points[member_indices[0]].clone(),
                    member_indices,
                    code_set,
                }
            })
            .collect()
    }
}

/// Builds a tiling realizing `ε(S) = D` for a complementable set `D`.
///
/// Starting from the integer grid (point `x − 1` per cell `x`), the cubes of
/// the `j`-th line of the decomposition are shifted by `α_j = j/(L+1)` along
/// the line's axis. Distinct lines land in distinct simple components; the
/// integral points that remain are exactly the cells of `D`.
pub fn tiling_from_decomposition(
    dims: &BoxDims,
    d_set: &CellSet,
    dec: &LineDecomposition,
) -> Result<TorusTiling, TorusError> {
    dec.validate_partition_of(dims, &d_set.complement())
        .map_err(|e| TorusError::InvalidDecomposition(e.to_string()))?;
    let mut points: Vec<RationalPoint> = TorusTiling::integer_grid(dims).points.clone();
    let line_count = dec.lines.len();
    for (j, line) in dec.lines.iter().enumerate() {
        let alpha = BigRational::new(
            BigInt::from(j + 1),
            BigInt::from(line_count + 1),
        );
        for idx in line.cell_indices(dims) {
            points[idx].coords[line.axis()] += &alpha;
        }
    }
    Ok(TorusTiling {
        dims: dims.clone(),
        points,
    })
}

/// Constructive round trip for one subset `D`.
///
/// If `D` is complementable: build the tiling, validate it, check the Keller
/// bijection, check that the integral origins code exactly to `D`, and check
/// that every simple component's code set is complementable (the theorem's
/// forward direction). If `D` is not complementable the check is vacuously
/// true once the decomposition search confirms there is no partition.
pub fn round_trip_check(dims: &BoxDims, d_set: &CellSet) -> bool {
    let Some(dec) = crate::boxgeom::complement_line_decomposition(dims, d_set) else {
        return true;
    };
    let tiling = match tiling_from_decomposition(dims, d_set, &dec) {
        Ok(t) => t,
        Err(_) => return false,
    };
    if tiling.validate().is_err() || !tiling.keller_check() {
        return false;
    }
    let mut integral_codes = CellSet::empty(dims);
    for p in tiling.points() {
        if p.is_integral() {
            let code = integer_code(dims, p).expect("validated");
            integral_codes.insert_index(dims.cell_index(&code).expect("cell"));
        }
    }
    if &integral_codes != d_set {
        return false;
    }
    check_theorem_forward(&tiling)
}

/// Forward direction of the theorem on one tiling: every simple component's
/// code set is complementable by lines.
pub fn check_theorem_forward(tiling: &TorusTiling) -> bool {
    tiling
        .simple_components()
        .iter()
        .all(|c| is_complementable_by_lines(tiling.dims(), &c.code_set))
}

/// Representability of every component size against a residue table built
/// from the torus sides.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComponentSizeCheck {
    pub component: usize,
    pub size: u64,
    pub representable: bool,
}

pub fn component_sizes_representable(
    tiling: &TorusTiling,
    table: &ResidueTable,
) -> Vec<ComponentSizeCheck> {
    tiling
        .simple_components()
        .iter()
        .enumerate()
        .map(|(i, c)| ComponentSizeCheck {
            component: i,
            size: c.size(),
            representable: table.is_representable(c.size()),
        })
        .collect()
}

/// Streams every cube tiling of the torus whose coordinates lie in `(1/q)ℤ`,
/// by exact cover of the q-refined discrete torus (each cube covers `q^d`
/// fine cells, with wraparound). No symmetry reduction; deterministic order.
pub fn for_each_grid_tiling(
    dims: &BoxDims,
    q: u32,
    cell_limit: u64,
    visit: &mut dyn FnMut(&TorusTiling) -> ControlFlow<()>,
) -> Result<(), TorusError> {
    if q == 0 {
        return Err(TorusError::ZeroRefinement);
    }
    let fine_sides: Vec<u64> = dims.sides().iter().map(|&k| k as u64 * q as u64).collect();
    let fine_cells: u64 = fine_sides.iter().product();
    if fine_cells > cell_limit {
        return Err(TorusError::ResourceBound {
            cells: fine_cells,
            limit: cell_limit,
        });
    }
    let fine_cells = fine_cells as usize;
    let d = dims.dim();

    let fine_index = |coords: &[u64]| -> usize {
        let mut idx = 0usize;
        for (i, &c) in coords.iter().enumerate().rev() {
            idx = idx * fine_sides[i] as usize + c as usize;
        }
        let _ = d;
        idx
    };

    // One candidate cube per fine origin; its cover is the product of q-long
    // wrapped intervals.
    let mut rows = Vec::with_capacity(fine_cells);
    let mut origin = vec![0u64; d];
    loop {
        let mut row = BitSet::new(fine_cells);
        let mut offsets = vec![0u64; d];
        loop {
            let coords: Vec<u64> = origin
                .iter()
                .zip(&offsets)
                .zip(&fine_sides)
                .map(|((&o, &off), &f)| (o + off) % f)
                .collect();
            row.insert(fine_index(&coords));
            if !increment(&mut offsets, &vec![q as u64; d]) {
                break;
            }
        }
        rows.push(row);
        if !increment(&mut origin, &fine_sides) {
            break;
        }
    }

    let cover = ExactCover::new(fine_cells, rows);
    let mut target = BitSet::new(fine_cells);
    target.invert();
    let _ = cover.covers(&target, &mut |solution| {
        let mut sorted = solution.to_vec();
        sorted.sort_unstable();
        let points = sorted
            .into_iter()
            .map(|row_idx| {
                let mut rest = row_idx;
                let coords = (0..d)
                    .map(|i| {
                        let v = rest % fine_sides[i] as usize;
                        rest /= fine_sides[i] as usize;
                        BigRational::new(BigInt::from(v), BigInt::from(q))
                    })
                    .collect();
                RationalPoint::from_coords(coords)
            })
            .collect();
        visit(&TorusTiling::new(dims.clone(), points))
    });
    Ok(())
}

fn increment(digits: &mut [u64], radices: &[u64]) -> bool {
    for (d, &r) in digits.iter_mut().zip(radices) {
        *d += 1;
        if *d < r {
            return true;
        }
        *d = 0;
    }
    false
}

/// Collecting variant of [`for_each_grid_tiling`].
pub fn enumerate_grid_tilings(
    dims: &BoxDims,
    q: u32,
    cell_limit: u64,
) -> Result<Vec<TorusTiling>, TorusError> {
    let mut out = Vec::new();
    for_each_grid_tiling(dims, q, cell_limit, &mut |t| {
        out.push(t.clone());
        ControlFlow::Continue(())
    })?;
    Ok(out)
}

/// On-disk tiling: `{"k":[…],"points":[[["p","q"],…],…]}` with rationals as
/// decimal-string numerator/denominator pairs, exactness preserved.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TilingFile {
    pub k: Vec<u32>,
    pub points: Vec<Vec<[String; 2]>>,
}

impl TilingFile {
    pub fn parse(json: &str) -> Result<(BoxDims, TorusTiling), String> {
        let file: TilingFile = serde_json::from_str(json).map_err(|e| e.to_string())?;
        let dims = BoxDims::new(file.k).map_err(|e| e.to_string())?;
        let mut points = Vec::with_capacity(file.points.len());
        for raw in &file.points {
            let coords = raw
                .iter()
                .map(|[p, q]| {
                    let p = BigInt::from_str(p).map_err(|e| format!("numerator {p:?}: {e}"))?;
                    let q = BigInt::from_str(q).map_err(|e| format!("denominator {q:?}: {e}"))?;
                    if q.is_zero() {
                        return Err("zero denominator".to_string());
                    }
                    Ok(BigRational::new(p, q))
                })
                .collect::<Result<Vec<_>, String>>()?;
            points.push(RationalPoint::from_coords(coords));
        }
        let tiling = TorusTiling::new(dims.clone(), points);
        Ok((dims, tiling))
    }

    pub fn render(tiling: &TorusTiling) -> String {
        let file = TilingFile {
            k: tiling.dims().sides().to_vec(),
            points: tiling
                .points()
                .iter()
                .map(|p| {
                    p.coords()
                        .iter()
                        .map(|c| [c.numer().to_string(), c.denom().to_string()])
                        .collect()
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("serializable")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boxgeom::Line;

    fn dims(sides: &[u32]) -> BoxDims {
        BoxDims::new(sides).unwrap()
    }

    fn rat(p: i64, q: i64) -> BigRational {
        BigRational::new(BigInt::from(p), BigInt::from(q))
    }

    fn point(coords: &[(i64, i64)]) -> RationalPoint {
        RationalPoint::from_coords(coords.iter().map(|&(p, q)| rat(p, q)).collect())
    }

    /// The (2,2) tiling with one half-shifted column.
    fn shifted_column_tiling() -> TorusTiling {
        TorusTiling::new(
            dims(&[2, 2]),
            vec![
                point(&[(0, 1), (0, 1)]),
                point(&[(0, 1), (1, 1)]),
                point(&[(1, 1), (1, 2)]),
                point(&[(1, 1), (3, 2)]),
            ],
        )
    }

    #[test]
    fn disjointness_examples() {
        let b = dims(&[2, 2]);
        assert!(cubes_disjoint(
            &b,
            &point(&[(0, 1), (0, 1)]),
            &point(&[(1, 1), (0, 1)])
        ));
        // Arcs [0,1) and [1/2,3/2) intersect in both coordinates.
        assert!(!cubes_disjoint(
            &b,
            &point(&[(0, 1), (0, 1)]),
            &point(&[(1, 2), (1, 2)])
        ));
        let b1 = dims(&[3]);
        assert!(cubes_disjoint(&b1, &point(&[(0, 1)]), &point(&[(2, 1)])));
    }

    #[test]
    fn validate_examples() {
        let b = dims(&[2, 3]);
        assert_eq!(TorusTiling::integer_grid(&b).validate(), Ok(()));

        let mut points = TorusTiling::integer_grid(&b).points().to_vec();
        points[1] = points[0].clone();
        let bad = TorusTiling::new(b.clone(), points);
        assert!(matches!(
            bad.validate(),
            Err(TilingViolation::OverlappingCubes { .. })
        ));

        assert_eq!(shifted_column_tiling().validate(), Ok(()));

        let short = TorusTiling::new(b, vec![point(&[(0, 1), (0, 1)])]);
        assert!(matches!(
            short.validate(),
            Err(TilingViolation::CountMismatch { .. })
        ));
    }

    #[test]
    fn integer_code_examples() {
        let b = dims(&[2, 2]);
        assert_eq!(
            integer_code(&b, &point(&[(0, 1), (0, 1)])).unwrap(),
            vec![1, 1]
        );
        assert_eq!(
            integer_code(&b, &point(&[(1, 1), (3, 2)])).unwrap(),
            vec![2, 2]
        );
        assert_eq!(
            integer_code(&b, &point(&[(5, 2), (0, 1)])),
            Err(TorusError::CoordinateOutOfRange { axis: 0 })
        );
    }

    #[test]
    fn keller_examples() {
        assert!(TorusTiling::integer_grid(&dims(&[2, 3])).keller_check());
        assert!(shifted_column_tiling().keller_check());
    }

    #[test]
    fn components_examples() {
        let grid = TorusTiling::integer_grid(&dims(&[2, 3]));
        let comps = grid.simple_components();
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].size(), 6);

        let comps = shifted_column_tiling().simple_components();
        assert_eq!(comps.len(), 2);
        assert_eq!(comps.iter().map(|c| c.size()).collect::<Vec<_>>(), vec![2, 2]);
        let total: u64 = comps.iter().map(|c| c.size()).sum();
        assert_eq!(total, 4);
    }

    #[test]
    fn build_from_decomposition_example() {
        // box (2,2), D = {(1,1),(1,2)}, complement = the column x₁ = 2.
        let b = dims(&[2, 2]);
        let d = CellSet::from_cells(&b, &[vec![1, 1], vec![1, 2]]).unwrap();
        let dec = LineDecomposition {
            lines: vec![Line::new(&b, 1, vec![2, 1]).unwrap()],
        };
        let tiling = tiling_from_decomposition(&b, &d, &dec).unwrap();
        assert_eq!(tiling.validate(), Ok(()));
        assert_eq!(tiling, shifted_column_tiling());
        assert!(round_trip_check(&b, &d));
    }

    #[test]
    fn build_rejects_invalid_decomposition() {
        let b = dims(&[2, 2]);
        let d = CellSet::from_cells(&b, &[vec![1, 1], vec![1, 2]]).unwrap();
        // Wrong line: covers cells of D itself.
        let dec = LineDecomposition {
            lines: vec![Line::new(&b, 1, vec![1, 1]).unwrap()],
        };
        assert!(matches!(
            tiling_from_decomposition(&b, &d, &dec),
            Err(TorusError::InvalidDecomposition(_))
        ));
    }

    #[test]
    fn full_box_round_trip_is_integer_grid() {
        let b = dims(&[2, 3]);
        let d = CellSet::full(&b);
        let dec = LineDecomposition::empty();
        let tiling = tiling_from_decomposition(&b, &d, &dec).unwrap();
        assert_eq!(tiling, TorusTiling::integer_grid(&b));
        assert!(round_trip_check(&b, &d));
    }

    #[test]
    fn theorem_forward_on_examples() {
        assert!(check_theorem_forward(&TorusTiling::integer_grid(&dims(&[2, 3]))));
        let shifted = shifted_column_tiling();
        assert!(check_theorem_forward(&shifted));
        // Its components code to {(1,1),(1,2)} and {(2,1),(2,2)}.
        let comps = shifted.simple_components();
        let codes: Vec<Vec<Vec<u32>>> = comps.iter().map(|c| c.code_set.cells()).collect();
        assert!(codes.contains(&vec![vec![1, 1], vec![1, 2]]));
        assert!(codes.contains(&vec![vec![2, 1], vec![2, 2]]));
    }

    #[test]
    fn grid_enumeration_q1_is_the_integer_grid() {
        let tilings = enumerate_grid_tilings(&dims(&[2, 2]), 1, 4096).unwrap();
        assert_eq!(tilings.len(), 1);
        assert_eq!(tilings[0], TorusTiling::integer_grid(&dims(&[2, 2])));
    }

    #[test]
    fn grid_enumeration_q2_includes_shifted_column() {
        let tilings = enumerate_grid_tilings(&dims(&[2, 2]), 2, 4096).unwrap();
        assert!(tilings.contains(&shifted_column_tiling()));
        for t in &tilings {
            assert_eq!(t.validate(), Ok(()), "enumerated tiling must be valid");
        }
    }

    #[test]
    fn enumeration_respects_cell_limit() {
        assert!(matches!(
            enumerate_grid_tilings(&dims(&[2, 2]), 10, 100),
            Err(TorusError::ResourceBound { .. })
        ));
    }

    #[test]
    fn component_sizes_on_grid() {
        let b = dims(&[2, 3]);
        let table = ResidueTable::build(&b.denominations());
        let checks = component_sizes_representable(&TorusTiling::integer_grid(&b), &table);
        assert_eq!(checks.len(), 1);
        assert!(checks[0].representable);
        assert_eq!(checks[0].size, 6);
    }

    #[test]
    fn tiling_file_round_trip() {
        let t = shifted_column_tiling();
        let json = TilingFile::render(&t);
        let (_, parsed) = TilingFile::parse(&json).unwrap();
        assert_eq!(parsed, t);
    }
}
