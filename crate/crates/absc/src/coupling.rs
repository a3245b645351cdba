//! Edge-spreading of array-based grids into memory components, assembly of
//! the terminated spatially coupled parity-check grid, the block/group/offset
//! index maps, and the JSON persistence format for complete code specs.

use crate::ab::AbMatrixSpec;
use crate::gf2::CirculantGrid;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Spreading matrix `B`: one memory assignment in `{0, ..., m}` per circulant
/// of the base grid, plus a fixed/unfixed flag per entry that carries
/// constraint state across nested optimizations.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SpreadingMatrix {
    rows: usize,
    cols: usize,
    memory: usize,
    entries: Vec<u8>,
    fixed: Vec<bool>,
}

impl SpreadingMatrix {
    /// All-zero, all-unfixed spreading (every circulant initially in `H_0`).
    pub fn zeros(rows: usize, cols: usize, memory: usize) -> Self {
        SpreadingMatrix {
            rows,
            cols,
            memory,
            entries: vec![0; rows * cols],
            fixed: vec![false; rows * cols],
        }
    }

    /// Fully fixed spreading from explicit row-major entries.
    pub fn from_rows(rows_data: &[Vec<u8>], memory: usize) -> Result<Self> {
        let rows = rows_data.len();
        let cols = rows_data.first().map_or(0, Vec::len);
        if rows == 0 || cols == 0 || rows_data.iter().any(|r| r.len() != cols) {
            return Err(Error::Invalid("ragged or empty spreading matrix".into()));
        }
        let entries: Vec<u8> = rows_data.iter().flatten().copied().collect();
        if entries.iter().any(|&g| g as usize > memory) {
            return Err(Error::Invalid(format!("spreading entry exceeds memory {memory}")));
        }
        Ok(SpreadingMatrix {
            rows,
            cols,
            memory,
            entries,
            fixed: vec![true; rows * cols],
        })
    }

    pub fn random(rows: usize, cols: usize, memory: usize, rng: &mut impl rand::Rng) -> Self {
        let entries = (0..rows * cols)
            .map(|_| rng.gen_range(0..=memory) as u8)
            .collect();
        SpreadingMatrix {
            rows,
            cols,
            memory,
            entries,
            fixed: vec![true; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn memory(&self) -> usize {
        self.memory
    }

    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, g: u8) {
        assert!(g as usize <= self.memory, "entry exceeds memory");
        self.entries[i * self.cols + j] = g;
    }

    pub fn is_fixed(&self, i: usize, j: usize) -> bool {
        self.fixed[i * self.cols + j]
    }

    pub fn set_fixed(&mut self, i: usize, j: usize, fixed: bool) {
        self.fixed[i * self.cols + j] = fixed;
    }

    pub fn all_fixed(&self) -> bool {
        self.fixed.iter().all(|&f| f)
    }

    pub fn fix_all(&mut self) {
        self.fixed.iter_mut().for_each(|f| *f = true);
    }

    pub fn row(&self, i: usize) -> &[u8] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<u8>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    /// Copies row `src` of `other` into row `dst`, marking it fixed.
    pub fn adopt_row(&mut self, dst: usize, other: &SpreadingMatrix, src: usize) {
        assert_eq!(self.cols, other.cols);
        for j in 0..self.cols {
            self.set(dst, j, other.get(src, j));
            self.set_fixed(dst, j, true);
        }
    }
}

/// Splits a grid into `m + 1` component grids: component `g` keeps exactly
/// the cells with `b(i, j) = g`. The components partition the support.
pub fn split_components(h: &CirculantGrid, b: &SpreadingMatrix) -> Result<Vec<CirculantGrid>> {
    if h.block_rows() != b.rows() || h.block_cols() != b.cols() {
        return Err(Error::Invalid(format!(
            "spreading {}x{} does not match grid {}x{}",
            b.rows(),
            b.cols(),
            h.block_rows(),
            h.block_cols()
        )));
    }
    let mut comps = vec![
        CirculantGrid::zero(h.block_rows(), h.block_cols(), h.block_size());
        b.memory() + 1
    ];
    for i in 0..h.block_rows() {
        for j in 0..h.block_cols() {
            let cell = h.cell(i, j);
            if !cell.is_zero() {
                comps[b.get(i, j) as usize].set_cell(i, j, cell);
            }
        }
    }
    Ok(comps)
}

/// Assembles the terminated coupled grid: column block `v` stacks the
/// components top to bottom starting at block-row block `v`, giving the
/// block-bidiagonal layout with `L + m` row blocks and `L` column blocks.
///
/// Termination requires `L > m + 1`; [`assemble_window`] drops that check
/// for the short windows used by cycle accounting.
pub fn assemble_sc(components: &[CirculantGrid], coupling_len: usize) -> Result<CirculantGrid> {
    let m = components.len() - 1;
    if coupling_len <= m + 1 {
        return Err(Error::Invalid(format!(
            "coupling length {coupling_len} must exceed m + 1 = {}",
            m + 1
        )));
    }
    Ok(assemble_window(components, coupling_len))
}

/// Eq.-style assembly for any number of column blocks `w >= 1`.
pub fn assemble_window(components: &[CirculantGrid], w: usize) -> CirculantGrid {
    assert!(w >= 1);
    let m = components.len() - 1;
    let rows = components[0].block_rows();
    let cols = components[0].block_cols();
    let p = components[0].block_size();
    let mut grid = CirculantGrid::zero((w + m) * rows, w * cols, p);
    for v in 0..w {
        for (g, comp) in components.iter().enumerate() {
            for i in 0..rows {
                for j in 0..cols {
                    let cell = comp.cell(i, j);
                    if !cell.is_zero() {
                        grid.set_cell((v + g) * rows + i, v * cols + j, cell);
                    }
                }
            }
        }
    }
    grid
}

/// Structured coordinates of one entry of a coupled matrix: row block,
/// row group, row offset; column block, column group, column offset.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct EntryCoords {
    pub y: usize,
    pub q: usize,
    pub s: usize,
    pub v: usize,
    pub j: usize,
    pub k: usize,
}

/// `(y, q, s; v, j, k)` to flat `(r, c)`.
pub fn coords_to_entry(c: EntryCoords, p: usize, gamma: usize) -> Result<(usize, usize)> {
    if c.q >= gamma || c.s >= p || c.j >= p || c.k >= p {
        return Err(Error::Invalid(format!("coordinates {c:?} out of range")));
    }
    Ok(((c.y * gamma + c.q) * p + c.s, (c.v * p + c.j) * p + c.k))
}

/// Flat `(r, c)` back to `(y, q, s; v, j, k)`.
pub fn entry_to_coords(r: usize, c: usize, p: usize, gamma: usize) -> EntryCoords {
    EntryCoords {
        y: r / (gamma * p),
        q: (r / p) % gamma,
        s: r % p,
        v: c / (p * p),
        j: (c / p) % p,
        k: c % p,
    }
}

/// Terminal lift: factor `J` plus one shift per non-zero cell of the first
/// `m + 1` column blocks (or of the single block, for uncoupled grids);
/// later column blocks reuse the shifts periodically. Absent cells hold -1.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct LiftAssignment {
    #[serde(rename = "J")]
    pub j: usize,
    pub shifts: Vec<Vec<Vec<i32>>>,
}

impl LiftAssignment {
    /// All-zero shifts covering the support of `base` over `period` column
    /// blocks.
    pub fn zero(base: &CirculantGrid, j: usize, period: usize) -> Self {
        let shifts = (0..period)
            .map(|_| {
                (0..base.block_rows())
                    .map(|i| {
                        (0..base.block_cols())
                            .map(|jj| if base.cell(i, jj).is_zero() { -1 } else { 0 })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        LiftAssignment { j, shifts }
    }

    pub fn period(&self) -> usize {
        self.shifts.len()
    }

    /// Shift for the copy of base cell `(i, jcol)` in column block `v`.
    pub fn shift(&self, v: usize, i: usize, jcol: usize) -> Option<u32> {
        let s = self.shifts[v % self.shifts.len()][i][jcol];
        (s >= 0).then_some(s as u32)
    }

    pub fn validate(&self, base: &CirculantGrid) -> Result<()> {
        if self.j == 0 {
            return Err(Error::Invalid("lift factor must be at least 1".into()));
        }
        if self.shifts.is_empty() {
            return Err(Error::Invalid("empty lift assignment".into()));
        }
        for block in &self.shifts {
            if block.len() != base.block_rows()
                || block.iter().any(|r| r.len() != base.block_cols())
            {
                return Err(Error::Invalid("lift shift grid shape mismatch".into()));
            }
            for (i, row) in block.iter().enumerate() {
                for (jc, &s) in row.iter().enumerate() {
                    let zero = base.cell(i, jc).is_zero();
                    if zero && s != -1 {
                        return Err(Error::Invalid("lift shift on a zero cell".into()));
                    }
                    if !zero && !(0..self.j as i32).contains(&s) {
                        return Err(Error::Invalid(format!(
                            "missing or out-of-range lift shift at ({i},{jc})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Complete descriptor of one coupled code: base matrix identity, spreading,
/// coupling length, and optional terminal lift. This is the unit of
/// persistence for the whole pipeline.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ScCodeSpec {
    pub base: AbMatrixSpec,
    pub spreading: SpreadingMatrix,
    pub coupling_len: usize,
    pub lift: Option<LiftAssignment>,
}

#[derive(Serialize, Deserialize)]
struct SpecFile {
    gamma: usize,
    p: usize,
    row_groups: Vec<usize>,
    m: usize,
    #[serde(rename = "L")]
    coupling_len: usize,
    #[serde(rename = "B")]
    b: Vec<Vec<u8>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lift: Option<LiftAssignment>,
}

impl ScCodeSpec {
    pub fn new(
        base: AbMatrixSpec,
        spreading: SpreadingMatrix,
        coupling_len: usize,
        lift: Option<LiftAssignment>,
    ) -> Result<Self> {
        if spreading.rows() != base.omega() || spreading.cols() != base.p {
            return Err(Error::Invalid("spreading shape does not match base".into()));
        }
        if coupling_len <= spreading.memory() + 1 {
            return Err(Error::Invalid(format!(
                "L = {coupling_len} must exceed m + 1 = {}",
                spreading.memory() + 1
            )));
        }
        if let Some(l) = &lift {
            l.validate(&base.grid())?;
            if l.period() != spreading.memory() + 1 {
                return Err(Error::Invalid("lift period must equal m + 1".into()));
            }
        }
        Ok(ScCodeSpec {
            base,
            spreading,
            coupling_len,
            lift,
        })
    }

    pub fn memory(&self) -> usize {
        self.spreading.memory()
    }

    /// Constraint length `(m + 1) p^2` in symbols, before any lift.
    pub fn constraint_length(&self) -> usize {
        (self.memory() + 1) * self.base.p * self.base.p
    }

    /// Lifted constraint length `J (m + 1) p^2`, `J = 1` without a lift.
    pub fn lifted_constraint_length(&self) -> usize {
        self.constraint_length() * self.lift.as_ref().map_or(1, |l| l.j)
    }

    pub fn components(&self) -> Vec<CirculantGrid> {
        split_components(&self.base.grid(), &self.spreading).expect("validated shapes")
    }

    /// The terminated coupled grid at this spec's coupling length.
    pub fn sc_grid(&self) -> CirculantGrid {
        assemble_sc(&self.components(), self.coupling_len).expect("validated L")
    }

    pub fn to_json(&self) -> String {
        let file = SpecFile {
            gamma: self.base.gamma,
            p: self.base.p,
            row_groups: self.base.row_groups.clone(),
            m: self.memory(),
            coupling_len: self.coupling_len,
            b: self.spreading.to_rows(),
            lift: self.lift.clone(),
        };
        serde_json::to_string_pretty(&file).expect("spec serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: SpecFile = serde_json::from_str(text)?;
        let base = AbMatrixSpec::new(file.gamma, file.p, file.row_groups)?;
        let spreading = SpreadingMatrix::from_rows(&file.b, file.m)?;
        ScCodeSpec::new(base, spreading, file.coupling_len, file.lift)
    }
}
