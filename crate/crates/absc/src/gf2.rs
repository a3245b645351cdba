//! Binary linear algebra substrate: sparse GF(2) matrices, circulant block
//! grids and their expansion, rank by elimination, Tanner-graph adjacency,
//! and alist import/export.

use crate::{Error, Result};
use std::fmt;

/// Sparse binary matrix stored as sorted per-row and per-column support.
///
/// Rows play the role of check nodes and columns of variable nodes when the
/// matrix is read as a Tanner graph.
#[derive(Clone, PartialEq, Eq)]
pub struct BinaryMatrix {
    rows: usize,
    cols: usize,
    row_support: Vec<Vec<u32>>,
    col_support: Vec<Vec<u32>>,
}

impl BinaryMatrix {
    pub fn new(rows: usize, cols: usize) -> Self {
        BinaryMatrix {
            rows,
            cols,
            row_support: vec![Vec::new(); rows],
            col_support: vec![Vec::new(); cols],
        }
    }

    /// Builds a matrix from `(row, col)` positions of ones. Rejects
    /// out-of-range and duplicate positions.
    pub fn from_entries(
        rows: usize,
        cols: usize,
        entries: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let mut m = BinaryMatrix::new(rows, cols);
        for (r, c) in entries {
            if r >= rows || c >= cols {
                return Err(Error::Invalid(format!(
                    "entry ({r},{c}) out of range for {rows}x{cols}"
                )));
            }
            m.row_support[r].push(c as u32);
            m.col_support[c].push(r as u32);
        }
        for sup in &mut m.row_support {
            sup.sort_unstable();
            if sup.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Invalid("duplicate entry".into()));
            }
        }
        for sup in &mut m.col_support {
            sup.sort_unstable();
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Number of ones.
    pub fn weight(&self) -> usize {
        self.row_support.iter().map(Vec::len).sum()
    }

    pub fn row(&self, r: usize) -> &[u32] {
        &self.row_support[r]
    }

    pub fn col(&self, c: usize) -> &[u32] {
        &self.col_support[c]
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.row_support[r].binary_search(&(c as u32)).is_ok()
    }

    pub fn row_weight(&self, r: usize) -> usize {
        self.row_support[r].len()
    }

    pub fn col_weight(&self, c: usize) -> usize {
        self.col_support[c].len()
    }

    /// Syndrome of a hard-decision word: `true` per unsatisfied check.
    pub fn syndrome(&self, word: &[bool]) -> Vec<bool> {
        assert_eq!(word.len(), self.cols);
        self.row_support
            .iter()
            .map(|sup| sup.iter().fold(false, |acc, &c| acc ^ word[c as usize]))
            .collect()
    }

    pub fn syndrome_ok(&self, word: &[bool]) -> bool {
        self.syndrome(word).iter().all(|&s| !s)
    }
}

impl fmt::Debug for BinaryMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BinaryMatrix {}x{}", self.rows, self.cols)?;
        if self.rows <= 40 && self.cols <= 80 {
            for r in 0..self.rows {
                let line: String = (0..self.cols)
                    .map(|c| if self.get(r, c) { '1' } else { '.' })
                    .collect();
                writeln!(f, "{line}")?;
            }
        }
        Ok(())
    }
}

/// One block of a [`CirculantGrid`]: either an all-zero `p x p` block or the
/// circulant with ones at `(z + k mod p, k)`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Cell {
    Zero,
    Shift(u32),
}

impl Cell {
    pub fn is_zero(&self) -> bool {
        matches!(self, Cell::Zero)
    }
}

/// Block matrix of circulant shift exponents. Houses array-based matrices,
/// nested sub-matrices, spatially coupled assemblies, and lifted matrices.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CirculantGrid {
    block_rows: usize,
    block_cols: usize,
    block_size: usize,
    cells: Vec<Cell>,
}

impl CirculantGrid {
    pub fn zero(block_rows: usize, block_cols: usize, block_size: usize) -> Self {
        assert!(block_size > 0, "block size must be positive");
        CirculantGrid {
            block_rows,
            block_cols,
            block_size,
            cells: vec![Cell::Zero; block_rows * block_cols],
        }
    }

    pub fn from_cells(
        block_rows: usize,
        block_cols: usize,
        block_size: usize,
        cells: Vec<Cell>,
    ) -> Result<Self> {
        if cells.len() != block_rows * block_cols {
            return Err(Error::Invalid("cell count mismatch".into()));
        }
        for cell in &cells {
            if let Cell::Shift(z) = cell {
                if *z as usize >= block_size {
                    return Err(Error::Invalid(format!(
                        "shift {z} not reduced modulo {block_size}"
                    )));
                }
            }
        }
        Ok(CirculantGrid {
            block_rows,
            block_cols,
            block_size,
            cells,
        })
    }

    pub fn block_rows(&self) -> usize {
        self.block_rows
    }

    pub fn block_cols(&self) -> usize {
        self.block_cols
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn cell(&self, i: usize, j: usize) -> Cell {
        self.cells[i * self.block_cols + j]
    }

    pub fn set_cell(&mut self, i: usize, j: usize, cell: Cell) {
        if let Cell::Shift(z) = cell {
            assert!((z as usize) < self.block_size);
        }
        self.cells[i * self.block_cols + j] = cell;
    }

    /// Grid restricted to the given block rows, order preserved.
    pub fn select_block_rows(&self, rows: &[usize]) -> Result<CirculantGrid> {
        let mut seen = vec![false; self.block_rows];
        let mut cells = Vec::with_capacity(rows.len() * self.block_cols);
        for &r in rows {
            if r >= self.block_rows {
                return Err(Error::Invalid(format!("block row {r} out of range")));
            }
            if seen[r] {
                return Err(Error::Invalid(format!("duplicate block row {r}")));
            }
            seen[r] = true;
            cells.extend_from_slice(&self.cells[r * self.block_cols..(r + 1) * self.block_cols]);
        }
        CirculantGrid::from_cells(rows.len(), self.block_cols, self.block_size, cells)
    }

    /// Expands every `Shift(z)` into the `p x p` circulant with ones at
    /// `(z + k mod p, k)` and every `Zero` into an all-zero block.
    pub fn expand(&self) -> BinaryMatrix {
        let p = self.block_size;
        let mut entries = Vec::with_capacity(self.weight() * p);
        for i in 0..self.block_rows {
            for j in 0..self.block_cols {
                if let Cell::Shift(z) = self.cell(i, j) {
                    let z = z as usize;
                    for k in 0..p {
                        entries.push((i * p + (z + k) % p, j * p + k));
                    }
                }
            }
        }
        BinaryMatrix::from_entries(self.block_rows * p, self.block_cols * p, entries)
            .expect("expanded entries are valid")
    }

    /// Number of non-zero cells.
    pub fn weight(&self) -> usize {
        self.cells.iter().filter(|c| !c.is_zero()).count()
    }
}

/// Bipartite adjacency of the Tanner graph of a binary matrix: check-node
/// and variable-node neighbor lists, sorted ascending.
pub struct TannerGraph {
    pub cn_neighbors: Vec<Vec<u32>>,
    pub vn_neighbors: Vec<Vec<u32>>,
}

pub fn tanner_adjacency(m: &BinaryMatrix) -> TannerGraph {
    TannerGraph {
        cn_neighbors: m.row_support.clone(),
        vn_neighbors: m.col_support.clone(),
    }
}

/// GF(2) rank via bit-packed Gaussian elimination.
pub fn rank_gf2(m: &BinaryMatrix) -> usize {
    let words = m.cols().div_ceil(64);
    let mut packed: Vec<Vec<u64>> = (0..m.rows())
        .map(|r| {
            let mut row = vec![0u64; words];
            for &c in m.row(r) {
                row[c as usize / 64] |= 1 << (c % 64);
            }
            row
        })
        .collect();
    let mut rank = 0;
    for col in 0..m.cols() {
        let (w, b) = (col / 64, col % 64);
        let Some(pivot) = (rank..packed.len()).find(|&r| packed[r][w] >> b & 1 == 1) else {
            continue;
        };
        packed.swap(rank, pivot);
        let (head, tail) = packed.split_at_mut(rank + 1);
        let pivot_row = &head[rank];
        for row in tail.iter_mut().filter(|row| row[w] >> b & 1 == 1) {
            for (a, b) in row.iter_mut().zip(pivot_row) {
                *a ^= b;
            }
        }
        rank += 1;
        if rank == packed.len() {
            break;
        }
    }
    rank
}

/// Serializes to alist: `n m`, then `max_col_weight max_row_weight`, the
/// per-column and per-row weights, and the 1-based index lists zero-padded
/// to the maximum weight.
pub fn to_alist(m: &BinaryMatrix) -> String {
    let max_col = (0..m.cols()).map(|c| m.col_weight(c)).max().unwrap_or(0);
    let max_row = (0..m.rows()).map(|r| m.row_weight(r)).max().unwrap_or(0);
    let mut out = String::new();
    out.push_str(&format!("{} {}\n", m.cols(), m.rows()));
    out.push_str(&format!("{max_col} {max_row}\n"));
    let join = |it: Vec<String>| it.join(" ");
    out.push_str(&join(
        (0..m.cols()).map(|c| m.col_weight(c).to_string()).collect(),
    ));
    out.push('\n');
    out.push_str(&join(
        (0..m.rows()).map(|r| m.row_weight(r).to_string()).collect(),
    ));
    out.push('\n');
    for c in 0..m.cols() {
        let mut ids: Vec<String> = m.col(c).iter().map(|&r| (r + 1).to_string()).collect();
        ids.resize(max_col, "0".into());
        out.push_str(&join(ids));
        out.push('\n');
    }
    for r in 0..m.rows() {
        let mut ids: Vec<String> = m.row(r).iter().map(|&c| (c + 1).to_string()).collect();
        ids.resize(max_row, "0".into());
        out.push_str(&join(ids));
        out.push('\n');
    }
    out
}

pub fn from_alist(text: &str) -> Result<BinaryMatrix> {
    let bad = |msg: String| Error::Alist(msg);
    let mut nums = text.split_ascii_whitespace().map(|t| {
        t.parse::<usize>()
            .map_err(|_| bad(format!("bad token {t:?}")))
    });
    let mut next = |what: &str| -> Result<usize> {
        nums.next().ok_or_else(|| bad(format!("missing {what}")))?
    };
    let n = next("column count")?;
    let m = next("row count")?;
    let max_col = next("max column weight")?;
    let max_row = next("max row weight")?;
    let col_weights: Vec<usize> = (0..n)
        .map(|_| next("column weight"))
        .collect::<Result<_>>()?;
    let row_weights: Vec<usize> = (0..m).map(|_| next("row weight")).collect::<Result<_>>()?;
    let mut entries = Vec::new();
    for (c, &w) in col_weights.iter().enumerate() {
        for slot in 0..max_col {
            let idx = next("column entry")?;
            if slot < w {
                if idx == 0 || idx > m {
                    return Err(bad("row index out of range".into()));
                }
                entries.push((idx - 1, c));
            } else if idx != 0 {
                return Err(bad("nonzero padding".into()));
            }
        }
    }
    // The per-row lists repeat the same support; parse and verify.
    let mat = BinaryMatrix::from_entries(m, n, entries)?;
    for (r, &w) in row_weights.iter().enumerate() {
        for slot in 0..max_row {
            let idx = next("row entry")?;
            if slot < w {
                if idx == 0 || idx > n || !mat.get(r, idx - 1) {
                    return Err(bad("row list disagrees with column list".into()));
                }
            } else if idx != 0 {
                return Err(bad("nonzero padding".into()));
            }
        }
    }
    if (0..m).any(|r| mat.row_weight(r) != row_weights[r]) {
        return Err(bad("row weight mismatch".into()));
    }
    Ok(mat)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity_grid(p: usize) -> CirculantGrid {
        CirculantGrid::from_cells(1, 1, p, vec![Cell::Shift(0)]).unwrap()
    }

    #[test]
    fn expand_identity() {
        let m = identity_grid(3).expand();
        assert_eq!(m.rows(), 3);
        for k in 0..3 {
            assert!(m.get(k, k));
        }
        assert_eq!(m.weight(), 3);
    }

    #[test]
    fn expand_shift2_p5() {
        let g = CirculantGrid::from_cells(1, 1, 5, vec![Cell::Shift(2)]).unwrap();
        let m = g.expand();
        for k in 0..5 {
            assert!(m.get((2 + k) % 5, k));
        }
        assert_eq!(m.weight(), 5);
    }

    #[test]
    fn expand_two_by_two() {
        // [[Shift(0), Zero], [Shift(1), Shift(0)]] with p = 2.
        let g = CirculantGrid::from_cells(
            2,
            2,
            2,
            vec![Cell::Shift(0), Cell::Zero, Cell::Shift(1), Cell::Shift(0)],
        )
        .unwrap();
        let m = g.expand();
        let expected = [(0, 0), (1, 1), (3, 0), (2, 1), (2, 2), (3, 3)];
        assert_eq!(m.weight(), expected.len());
        for (r, c) in expected {
            assert!(m.get(r, c), "missing ({r},{c})");
        }
    }

    #[test]
    fn rejects_unreduced_shift() {
        assert!(CirculantGrid::from_cells(1, 1, 5, vec![Cell::Shift(5)]).is_err());
    }

    /// Naive dense elimination used as an independent oracle for rank.
    fn rank_naive(m: &BinaryMatrix) -> usize {
        let mut a: Vec<Vec<bool>> = (0..m.rows())
            .map(|r| (0..m.cols()).map(|c| m.get(r, c)).collect())
            .collect();
        let mut rank = 0;
        for col in 0..m.cols() {
            if let Some(p) = (rank..a.len()).find(|&r| a[r][col]) {
                a.swap(rank, p);
                let pivot_row = a[rank].clone();
                for (r, row) in a.iter_mut().enumerate() {
                    if r != rank && row[col] {
                        for (t, p) in row.iter_mut().zip(&pivot_row) {
                            *t ^= p;
                        }
                    }
                }
                rank += 1;
            }
        }
        rank
    }

    #[test]
    fn rank_identity_and_zero() {
        let id = identity_grid(3).expand();
        assert_eq!(rank_gf2(&id), 3);
        let z = BinaryMatrix::new(2, 4);
        assert_eq!(rank_gf2(&z), 0);
    }

    #[test]
    fn rank_matches_naive_oracle() {
        let h = crate::ab::build_ab(3, 5).unwrap().expand();
        assert_eq!(rank_gf2(&h), rank_naive(&h));
        let h = crate::ab::build_ab(4, 7).unwrap().expand();
        assert_eq!(rank_gf2(&h), rank_naive(&h));
    }

    #[test]
    fn tanner_degrees() {
        let h = crate::ab::build_ab(3, 5).unwrap().expand();
        let t = tanner_adjacency(&h);
        assert!(t.vn_neighbors.iter().all(|n| n.len() == 3));
        assert!(t.cn_neighbors.iter().all(|n| n.len() == 5));
        assert_eq!(
            t.cn_neighbors.iter().map(Vec::len).sum::<usize>(),
            h.weight()
        );

        let single = BinaryMatrix::from_entries(2, 2, [(1, 0)]).unwrap();
        let t = tanner_adjacency(&single);
        assert_eq!(t.cn_neighbors[1], vec![0]);
        assert_eq!(t.vn_neighbors[0], vec![1]);
    }

    #[test]
    fn alist_round_trip() {
        let h = crate::ab::build_ab(3, 5).unwrap().expand();
        let text = to_alist(&h);
        let back = from_alist(&text).unwrap();
        assert_eq!(back, h);
        assert_eq!(to_alist(&back), text);
    }

    #[test]
    fn alist_ragged_round_trip() {
        // Uneven weights exercise the zero padding.
        let m = BinaryMatrix::from_entries(3, 4, [(0, 0), (0, 2), (1, 1), (2, 0), (2, 1), (2, 3)])
            .unwrap();
        let text = to_alist(&m);
        let back = from_alist(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(to_alist(&back), text);
    }

    #[test]
    fn alist_rejects_garbage() {
        assert!(from_alist("2 2\n1 1\n1 1\n1 1\n9\n1\n1\n1\n").is_err());
        assert!(from_alist("not numbers").is_err());
    }
}
