//! Terminal circulant lifting: replace every one of a p-level matrix with a
//! J x J circulant (zeros with zero blocks), reusing the shifts of the first
//! m+1 column blocks periodically along the chain, and search the shifts to
//! break residual 6-cycles.

use crate::census::count_6cycles;
use crate::coupling::{LiftAssignment, ScCodeSpec};
use crate::gf2::{BinaryMatrix, Cell, CirculantGrid};
use crate::{Error, Result};
use rand::{seq::SliceRandom, Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Two-level lifted structure: each one of the p-level expansion of a
/// coupled grid becomes a `Shift` cell of block size J.
///
/// `rows_per_block` is the number of row groups per row block (the base
/// matrix's row count), needed to key shifts by base row group.
pub fn lift(
    sc_grid: &CirculantGrid,
    rows_per_block: usize,
    assign: &LiftAssignment,
) -> Result<CirculantGrid> {
    let p = sc_grid.block_size();
    let mut lifted = CirculantGrid::zero(
        sc_grid.block_rows() * p,
        sc_grid.block_cols() * p,
        assign.j,
    );
    for bi in 0..sc_grid.block_rows() {
        for bj in 0..sc_grid.block_cols() {
            let Cell::Shift(z) = sc_grid.cell(bi, bj) else {
                continue;
            };
            let (v, i, j) = (bj / p, bi % rows_per_block, bj % p);
            let t = assign
                .shift(v, i, j)
                .ok_or_else(|| Error::Invalid(format!("no lift shift for cell ({i},{j})@{v}")))?;
            for k in 0..p {
                lifted.set_cell(bi * p + (z as usize + k) % p, bj * p + k, Cell::Shift(t));
            }
        }
    }
    Ok(lifted)
}

/// Lifted expansion of a coupled window of `w` column blocks, built
/// directly as a binary matrix.
pub fn expand_lifted_window(
    components: &[CirculantGrid],
    w: usize,
    assign: &LiftAssignment,
) -> Result<BinaryMatrix> {
    let m = components.len() - 1;
    let rows = components[0].block_rows();
    let p = components[0].block_size();
    let jf = assign.j;
    let mut entries = Vec::new();
    for v in 0..w {
        for (g, comp) in components.iter().enumerate() {
            let y = v + g;
            for i in 0..rows {
                for j in 0..p {
                    let Cell::Shift(z) = comp.cell(i, j) else {
                        continue;
                    };
                    let t = assign.shift(v, i, j).ok_or_else(|| {
                        Error::Invalid(format!("no lift shift for cell ({i},{j})@{v}"))
                    })? as usize;
                    for k in 0..p {
                        let r = (y * rows + i) * p + (z as usize + k) % p;
                        let c = (v * p + j) * p + k;
                        for u in 0..jf {
                            entries.push((r * jf + (t + u) % jf, c * jf + u));
                        }
                    }
                }
            }
        }
    }
    BinaryMatrix::from_entries((w + m) * rows * p * jf, w * p * p * jf, entries)
}

/// Lifted expansion of an uncoupled grid (a single column block).
pub fn expand_lifted_block(grid: &CirculantGrid, assign: &LiftAssignment) -> Result<BinaryMatrix> {
    expand_lifted_window(std::slice::from_ref(grid), 1, assign)
}

/// Residual 6-cycles of a lifted coupled code, counted on a window of
/// 2(m+1) column blocks so that cycles crossing the periodic seam of the
/// shift pattern are included.
pub fn residual_6cycles(spec: &ScCodeSpec, assign: &LiftAssignment) -> Result<u64> {
    let comps = spec.components();
    let w = 2 * (spec.memory() + 1);
    Ok(count_6cycles(&expand_lifted_window(&comps, w, assign)?))
}

/// Residual 6-cycles of a lifted uncoupled block code.
pub fn residual_6cycles_block(grid: &CirculantGrid, assign: &LiftAssignment) -> Result<u64> {
    Ok(count_6cycles(&expand_lifted_block(grid, assign)?))
}

/// Outcome of a lift search.
#[derive(Clone, Debug)]
pub struct LiftOutcome {
    pub assign: LiftAssignment,
    pub residual: u64,
    pub evaluations: u64,
}

struct LiftSearch<'a, F: Fn(&LiftAssignment) -> Result<u64>> {
    eval: &'a F,
    cells: Vec<(usize, usize, usize)>,
    budget: u64,
    used: u64,
}

impl<F: Fn(&LiftAssignment) -> Result<u64>> LiftSearch<'_, F> {
    fn run(
        &mut self,
        start: LiftAssignment,
        rng: &mut ChaCha8Rng,
        j: usize,
    ) -> Result<LiftOutcome> {
        // Every restart draws the free cells at random: identical shifts
        // everywhere would make the lifted graph fall apart into disjoint
        // copies of the base, so the trivial assignment is never used as a
        // starting point (it still serves as a quality floor below).
        let mut best = start.clone();
        for &(v, i, jc) in &self.cells {
            best.shifts[v][i][jc] = rng.gen_range(0..j as i32);
        }
        let mut best_res = (self.eval)(&best)?;
        self.used += 1;
        let mut first = true;
        while best_res > 0 && self.used < self.budget {
            let mut cur = if first {
                best.clone()
            } else {
                // Random restart.
                let mut a = start.clone();
                for &(v, i, jc) in &self.cells {
                    a.shifts[v][i][jc] = rng.gen_range(0..j as i32);
                }
                a
            };
            first = false;
            let mut cur_res = (self.eval)(&cur)?;
            self.used += 1;
            // Greedy sweeps over cells in random order.
            loop {
                let mut improved = false;
                let mut order = self.cells.clone();
                order.shuffle(rng);
                for (v, i, jc) in order {
                    if cur_res == 0 || self.used >= self.budget {
                        break;
                    }
                    let original = cur.shifts[v][i][jc];
                    let mut local_best = (original, cur_res);
                    for t in 0..j as i32 {
                        if t == original {
                            continue;
                        }
                        if self.used >= self.budget {
                            break;
                        }
                        cur.shifts[v][i][jc] = t;
                        let r = (self.eval)(&cur)?;
                        self.used += 1;
                        if r < local_best.1 {
                            local_best = (t, r);
                        }
                    }
                    cur.shifts[v][i][jc] = local_best.0;
                    if local_best.1 < cur_res {
                        cur_res = local_best.1;
                        improved = true;
                    }
                }
                if cur_res < best_res {
                    best = cur.clone();
                    best_res = cur_res;
                }
                if !improved || cur_res == 0 || self.used >= self.budget {
                    break;
                }
            }
        }
        if best_res > 0 {
            // Quality floor: never return worse than the unsearched
            // starting assignment.
            let start_res = (self.eval)(&start)?;
            self.used += 1;
            if start_res < best_res {
                best = start;
                best_res = start_res;
            }
        }
        Ok(LiftOutcome {
            assign: best,
            residual: best_res,
            evaluations: self.used,
        })
    }
}

fn free_cells(base: &CirculantGrid, start: &LiftAssignment, frozen_rows: &[usize]) -> Vec<(usize, usize, usize)> {
    let mut cells = Vec::new();
    for v in 0..start.period() {
        for i in 0..base.block_rows() {
            if frozen_rows.contains(&i) {
                continue;
            }
            for jc in 0..base.block_cols() {
                if !base.cell(i, jc).is_zero() {
                    cells.push((v, i, jc));
                }
            }
        }
    }
    cells
}

/// Searches lift shifts for a coupled spec: greedy per-cell improvement
/// with random restarts, starting from the all-zero assignment, spending at
/// most `budget` residual evaluations.
pub fn search_lift(spec: &ScCodeSpec, j: usize, budget: u64, seed: u64) -> Result<LiftOutcome> {
    search_lift_constrained(spec, j, budget, seed, LiftAssignment::zero(&spec.base.grid(), j, spec.memory() + 1), &[])
}

/// As [`search_lift`] but starting from `start` and leaving the shifts on
/// the listed base rows untouched.
pub fn search_lift_constrained(
    spec: &ScCodeSpec,
    j: usize,
    budget: u64,
    seed: u64,
    start: LiftAssignment,
    frozen_rows: &[usize],
) -> Result<LiftOutcome> {
    if j < 1 {
        return Err(Error::Invalid("lift factor must be at least 1".into()));
    }
    if !spec.spreading.all_fixed() {
        return Err(Error::Invalid("spreading must be fully fixed before lifting".into()));
    }
    let base = spec.base.grid();
    start.validate(&base)?;
    let comps = spec.components();
    let w = 2 * (spec.memory() + 1);
    let eval = |a: &LiftAssignment| Ok(count_6cycles(&expand_lifted_window(&comps, w, a)?));
    let mut search = LiftSearch {
        eval: &eval,
        cells: free_cells(&base, &start, frozen_rows),
        budget,
        used: 0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    search.run(start, &mut rng, j)
}

/// Lift search for an uncoupled block code (single column block pattern).
pub fn search_lift_block(
    grid: &CirculantGrid,
    j: usize,
    budget: u64,
    seed: u64,
) -> Result<LiftOutcome> {
    if j < 1 {
        return Err(Error::Invalid("lift factor must be at least 1".into()));
    }
    let start = LiftAssignment::zero(grid, j, 1);
    let eval = |a: &LiftAssignment| residual_6cycles_block(grid, a);
    let mut search = LiftSearch {
        eval: &eval,
        cells: free_cells(grid, &start, &[]),
        budget,
        used: 0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    search.run(start, &mut rng, j)
}

/// Lifts a family of nested specs sharing base rows: the first spec is
/// searched in full, later specs keep the shifts of row groups they share
/// with earlier ones and search only their own new rows.
pub fn lift_nested_family(
    specs: &[ScCodeSpec],
    j: usize,
    budget: u64,
    seed: u64,
) -> Result<Vec<LiftOutcome>> {
    use std::collections::HashMap;
    let mut decided: HashMap<usize, Vec<Vec<i32>>> = HashMap::new(); // label -> shifts[v][j]
    let mut outcomes = Vec::new();
    for (si, spec) in specs.iter().enumerate() {
        let period = spec.memory() + 1;
        let base = spec.base.grid();
        let mut start = LiftAssignment::zero(&base, j, period);
        let mut frozen = Vec::new();
        for (i, &label) in spec.base.row_groups.iter().enumerate() {
            if let Some(rows) = decided.get(&label) {
                if rows.len() != period {
                    return Err(Error::Invalid(
                        "nested specs must share the lift period".into(),
                    ));
                }
                for v in 0..period {
                    start.shifts[v][i] = rows[v].clone();
                }
                frozen.push(i);
            }
        }
        let out = search_lift_constrained(spec, j, budget, seed.wrapping_add(si as u64), start, &frozen)?;
        for (i, &label) in spec.base.row_groups.iter().enumerate() {
            decided.entry(label).or_insert_with(|| {
                (0..period).map(|v| out.assign.shifts[v][i].clone()).collect()
            });
        }
        outcomes.push(out);
    }
    Ok(outcomes)
}
