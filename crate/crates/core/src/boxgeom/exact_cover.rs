//! Exact cover over a bit-indexed ground set.
//!
//! Algorithm X semantics on plain bitsets: repeatedly pick an uncovered cell
//! with the fewest usable candidate rows and branch on its covering rows. At
//! desk scale (a few thousand cells and rows) word-level subset tests beat
//! the pointer gymnastics of dancing links, and the search order is trivially
//! deterministic.

use std::ops::ControlFlow;

use crate::bits::BitSet;

/// A fixed set of candidate rows over a `0..universe` ground set.
pub struct ExactCover {
    universe: usize,
    rows: Vec<BitSet>,
    /// For each ground cell, the rows containing it, ascending.
    cell_rows: Vec<Vec<u32>>,
}

impl ExactCover {
    pub fn new(universe: usize, rows: Vec<BitSet>) -> ExactCover {
        let mut cell_rows = vec![Vec::new(); universe];
        for (r, row) in rows.iter().enumerate() {
            debug_assert_eq!(row.len(), universe);
            debug_assert!(!row.is_empty(), "empty candidate row");
            for cell in row.iter() {
                cell_rows[cell].push(r as u32);
            }
        }
        ExactCover {
            universe,
            rows,
            cell_rows,
        }
    }

    /// First partition of `target` into disjoint rows, in deterministic
    /// search order.
    pub fn first_cover(&self, target: &BitSet) -> Option<Vec<usize>> {
        let mut found = None;
        let _ = self.covers(target, &mut |sol| {
            found = Some(sol.to_vec());
            ControlFlow::Break(())
        });
        found
    }

    /// Invokes `visit` once per partition of `target` into disjoint rows.
    /// Row indices within a solution are not sorted; the visitation order is
    /// deterministic.
    pub fn covers(
        &self,
        target: &BitSet,
        visit: &mut dyn FnMut(&[usize]) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        debug_assert_eq!(target.len(), self.universe);
        let mut remaining = target.clone();
        let mut chosen = Vec::new();
        self.search(&mut remaining, &mut chosen, visit)
    }

    fn search(
        &self,
        remaining: &mut BitSet,
        chosen: &mut Vec<usize>,
        visit: &mut dyn FnMut(&[usize]) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        let Some(pivot) = self.pick_cell(remaining) else {
            return visit(chosen);
        };
        // No usable row through the pivot cell: dead end.
        for &r in &self.cell_rows[pivot] {
            let row = &self.rows[r as usize];
            if !row.is_subset_of(remaining) {
                continue;
            }
            remaining.subtract(row);
            chosen.push(r as usize);
            let flow = self.search(remaining, chosen, visit);
            chosen.pop();
            remaining.union_with(row);
            flow?;
        }
        ControlFlow::Continue(())
    }

    /// Uncovered cell with the fewest usable rows, or `None` when covered.
    fn pick_cell(&self, remaining: &BitSet) -> Option<usize> {
        let mut best = None;
        let mut best_count = usize::MAX;
        for cell in remaining.iter() {
            let count = self.cell_rows[cell]
                .iter()
                .filter(|&&r| self.rows[r as usize].is_subset_of(remaining))
                .count();
            if count < best_count {
                best_count = count;
                best = Some(cell);
                if count == 0 {
                    break;
                }
            }
        }
        best
    }
}
