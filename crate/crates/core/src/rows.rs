//! Deterministic parallel row processing for CSR-shaped outputs.

use std::ops::Range;

use rayon::prelude::*;

use crate::graph::NodeIndex;

const ROW_BLOCK: usize = 256;

/// Splits `0..n` into fixed-size blocks, maps each block in parallel with a
/// per-worker scratch value, and returns the block results in row order.
///
/// Block boundaries depend only on `n`, so outputs are identical for any
/// thread count as long as `f` is deterministic per block.
pub(crate) fn map_row_blocks<T, S, I, F>(n: usize, init: I, f: F) -> Vec<T>
where
    T: Send,
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, Range<usize>) -> T + Sync + Send,
{
    let blocks: Vec<Range<usize>> = (0..n)
        .step_by(ROW_BLOCK)
        .map(|start| start..(start + ROW_BLOCK).min(n))
        .collect();
    blocks.into_par_iter().map_init(init, f).collect()
}

/// A run of CSR rows produced by one block.
#[derive(Debug, Clone)]
pub(crate) struct SparseRows<V> {
    pub row_ptr: Vec<usize>,
    pub cols: Vec<NodeIndex>,
    pub vals: Vec<V>,
}

impl<V> Default for SparseRows<V> {
    fn default() -> Self {
        SparseRows {
            row_ptr: vec![0],
            cols: Vec::new(),
            vals: Vec::new(),
        }
    }
}

impl<V> SparseRows<V> {
    pub fn push_row(&mut self, entries: impl IntoIterator<Item = (NodeIndex, V)>) {
        for (c, v) in entries {
            self.cols.push(c);
            self.vals.push(v);
        }
        self.row_ptr.push(self.cols.len());
    }

    pub fn row_count(&self) -> usize {
        self.row_ptr.len() - 1
    }

    /// Stitches block outputs together. `n` is the expected total row count.
    pub fn concat(n: usize, blocks: Vec<SparseRows<V>>) -> SparseRows<V> {
        let nnz: usize = blocks.iter().map(|b| b.cols.len()).sum();
        let mut out = SparseRows {
            row_ptr: Vec::with_capacity(n + 1),
            cols: Vec::with_capacity(nnz),
            vals: Vec::with_capacity(nnz),
        };
        out.row_ptr.push(0);
        for block in blocks {
            let base = out.cols.len();
            out.row_ptr
                .extend(block.row_ptr[1..].iter().map(|p| p + base));
            out.cols.extend(block.cols);
            out.vals.extend(block.vals);
        }
        debug_assert_eq!(out.row_count(), n);
        out
    }
}
