//! Guided search over spreading-matrix entries (forward assignment with
//! saved tie candidates and back-tracking), and the two nested optimization
//! pipelines that propagate row constraints across sub-codes.

use crate::ab::{weight3_cover, AbMatrixSpec, Weight3Cover};
use crate::alc::alc_mu_for_triple;
use crate::coupling::{ScCodeSpec, SpreadingMatrix};
use crate::{Error, Result};
use rand::{seq::SliceRandom, Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Cycle objective: total 6-cycles of the coupled window of m+1 column
/// blocks spanned by the rows of `b`, summed over every row-group triple.
pub fn window_cycle_count(p: usize, labels: &[usize], b: &SpreadingMatrix) -> Result<u64> {
    let m = b.memory();
    let mut total = 0u64;
    for i in 0..labels.len() {
        for j in (i + 1)..labels.len() {
            for k in (j + 1)..labels.len() {
                let mu = alc_mu_for_triple(
                    p,
                    m,
                    [labels[i], labels[j], labels[k]],
                    [b.row(i), b.row(j), b.row(k)],
                )?;
                total += mu
                    .iter()
                    .enumerate()
                    .map(|(e, &c)| (m + 1 - e) as u64 * c)
                    .sum::<u64>();
            }
        }
    }
    Ok(total)
}

/// Result of one guided search: the fully fixed spreading, its final cycle
/// count, and the per-iteration count trace (index 0 is the initial state).
#[derive(Clone, Debug)]
pub struct SearchOutcome {
    pub spreading: SpreadingMatrix,
    pub rho: u64,
    pub iterations: usize,
    pub trace: Vec<u64>,
}

struct Assigned {
    entry: (usize, usize),
    saved: Vec<u8>,
}

/// Forward-search with back-tracking over the unfixed entries of `b`.
///
/// Unfixed entries start at zero (their circulants sit in the first memory
/// component). The forward phase assigns each entry the value minimizing
/// the cycle count, breaking ties uniformly at random and saving the losing
/// candidates; an assignment that fails to improve on the previous count
/// triggers a back-tracking step that unfixes the most recent entry and
/// re-picks from its saved candidates, popping exhausted entries back onto
/// the frontier. Once every entry is fixed, back-tracking continues as
/// erase-and-re-evaluate sweeps over the fixed entries in random order; a
/// sweep that changes nothing ends the pass, and a fresh pass starts on the
/// remaining budget from randomly drawn values. Stops at a zero count or
/// after `lmax` iterations in total; the best state seen is returned,
/// fully fixed.
pub fn guided_search(
    p: usize,
    labels: &[usize],
    b: &SpreadingMatrix,
    lmax: usize,
    rng: &mut ChaCha8Rng,
) -> Result<SearchOutcome> {
    if labels.len() != b.rows() {
        return Err(Error::Invalid("one label per spreading row required".into()));
    }
    let m = b.memory() as u8;
    let initial = b.clone();
    let order: Vec<(usize, usize)> = (0..b.rows())
        .flat_map(|i| (0..b.cols()).map(move |j| (i, j)))
        .filter(|&(i, j)| !b.is_fixed(i, j))
        .collect();

    let rho0 = window_cycle_count(p, labels, &initial)?;
    let mut trace = vec![rho0];
    let mut best = (initial.clone(), rho0);
    let mut iterations = 0usize;
    let mut first_pass = true;

    'run: while best.1 > 0 && iterations < lmax && !order.is_empty() {
        let mut b = initial.clone();
        // The first pass starts from the all-zero unfixed state; restart
        // passes draw fresh starting values to leave the zero basin.
        if !first_pass {
            for &(i, j) in &order {
                b.set(i, j, rng.gen_range(0..=m));
            }
        }
        first_pass = false;
        let mut rho = window_cycle_count(p, labels, &b)?;
        let mut stack: Vec<Assigned> = Vec::new();
        let mut frontier = 0usize;

        // Forward phase with saved-candidate back-tracking.
        while frontier < order.len() {
            if best.1 == 0 || iterations >= lmax {
                break 'run;
            }
            let (i, j) = order[frontier];
            let rho_before = rho;
            let (pick, min, cands) = evaluate_entry(p, labels, &mut b, (i, j), m, rng)?;
            b.set(i, j, pick);
            b.set_fixed(i, j, true);
            stack.push(Assigned {
                entry: (i, j),
                saved: cands,
            });
            frontier += 1;
            iterations += 1;
            rho = min;
            trace.push(rho);
            if rho < best.1 {
                best = (b.clone(), rho);
            }
            if rho < rho_before {
                continue;
            }
            // Back-tracking: re-pick the most recent entry from its saved
            // candidates when the assignment failed to improve the count.
            let top = stack.last_mut().expect("an entry was just pushed");
            if !top.saved.is_empty() && iterations < lmax {
                let pick = top.saved.remove(rng.gen_range(0..top.saved.len()));
                let (i, j) = top.entry;
                b.set(i, j, pick);
                iterations += 1;
                rho = window_cycle_count(p, labels, &b)?;
                trace.push(rho);
                if rho < best.1 {
                    best = (b.clone(), rho);
                }
            }
        }

        // Every entry fixed: erase-and-re-evaluate sweeps until a whole
        // sweep leaves the matrix unchanged.
        loop {
            let mut changed = false;
            let mut sweep = order.clone();
            sweep.shuffle(rng);
            for (i, j) in sweep {
                if best.1 == 0 || iterations >= lmax {
                    break 'run;
                }
                let old = b.get(i, j);
                b.set_fixed(i, j, false);
                let (pick, min, _) = evaluate_entry(p, labels, &mut b, (i, j), m, rng)?;
                b.set(i, j, pick);
                b.set_fixed(i, j, true);
                iterations += 1;
                rho = min;
                trace.push(rho);
                if rho < best.1 {
                    best = (b.clone(), rho);
                }
                changed |= pick != old;
            }
            if !changed {
                break;
            }
        }
    }

    let (mut spreading, rho) = best;
    spreading.fix_all();
    Ok(SearchOutcome {
        spreading,
        rho,
        iterations,
        trace,
    })
}

/// Evaluates all candidate values for one entry, returning the random
/// argmin pick, the minimal count, and the saved tie candidates.
fn evaluate_entry(
    p: usize,
    labels: &[usize],
    b: &mut SpreadingMatrix,
    entry: (usize, usize),
    m: u8,
    rng: &mut ChaCha8Rng,
) -> Result<(u8, u64, Vec<u8>)> {
    let (i, j) = entry;
    let counts: Result<Vec<u64>> = (0..=m)
        .map(|v| {
            b.set(i, j, v);
            window_cycle_count(p, labels, b)
        })
        .collect();
    let counts = counts?;
    let min = *counts.iter().min().unwrap();
    let mut cands: Vec<u8> = (0..=m).filter(|&v| counts[v as usize] == min).collect();
    let pick = cands.remove(rng.gen_range(0..cands.len()));
    Ok((pick, min, cands))
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Method {
    One,
    Two,
}

/// A full nested-optimization request: the base matrix, the sub-code
/// row-group sets, the visiting order, and search parameters.
#[derive(Clone, Debug)]
pub struct NestedPlan {
    pub gamma: usize,
    pub p: usize,
    pub memory: usize,
    pub coupling_len: usize,
    pub subcode_rows: Vec<Vec<usize>>,
    /// Permutation of sub-code indices giving the optimization order.
    pub order: Vec<usize>,
    pub method: Method,
    pub lmax: usize,
    pub seed: u64,
    /// Optional explicit weight-3 cover per sub-code; the deterministic
    /// pairing cover is used where absent.
    pub covers: Vec<Option<Weight3Cover>>,
}

impl NestedPlan {
    pub fn validate(&self) -> Result<()> {
        let mut order = self.order.clone();
        order.sort_unstable();
        if order != (0..self.subcode_rows.len()).collect::<Vec<_>>() {
            return Err(Error::Invalid(
                "order must be a permutation of the sub-code indices".into(),
            ));
        }
        if !self.covers.is_empty() && self.covers.len() != self.subcode_rows.len() {
            return Err(Error::Invalid("one cover entry per sub-code".into()));
        }
        for rows in &self.subcode_rows {
            AbMatrixSpec::new(self.gamma, self.p, rows.clone())?;
            if rows.len() < 3 {
                return Err(Error::Invalid(
                    "sub-codes need at least 3 row groups".into(),
                ));
            }
        }
        if self.coupling_len <= self.memory + 1 {
            return Err(Error::Invalid("coupling length too small".into()));
        }
        Ok(())
    }

    fn cover_for(&self, idx: usize) -> Result<Weight3Cover> {
        if let Some(Some(c)) = self.covers.get(idx) {
            c.validate(&self.subcode_rows[idx])?;
            return Ok(c.clone());
        }
        weight3_cover(&self.subcode_rows[idx])
    }
}

/// One guided-search invocation's trace, for the CSV emitters.
#[derive(Clone, Debug)]
pub struct NamedTrace {
    pub name: String,
    pub rho: Vec<u64>,
}

/// Everything a pipeline produces: the global spec, one spec per sub-code,
/// and the per-invocation traces.
#[derive(Clone, Debug)]
pub struct PipelineOutput {
    pub global: ScCodeSpec,
    pub nested: Vec<ScCodeSpec>,
    pub traces: Vec<NamedTrace>,
}

const GLOBAL_ROWS: [usize; 3] = [0, 1, 2];

fn derive_seed(seed: u64, tag: &[usize]) -> u64 {
    let mut h = seed ^ 0x9e37_79b9_7f4a_7c15;
    for &t in tag {
        h ^= t as u64;
        h = h.wrapping_mul(0x100_0000_01b3);
        h ^= h >> 31;
    }
    h
}

/// Shared pipeline state: a spreading row per row group of the full matrix,
/// with fixed flags tracking which rows are decided.
struct Accumulator {
    bhat: SpreadingMatrix,
}

impl Accumulator {
    fn new(gamma: usize, p: usize, m: usize) -> Self {
        Accumulator {
            bhat: SpreadingMatrix::zeros(gamma, p, m),
        }
    }

    fn row_fixed(&self, q: usize) -> bool {
        (0..self.bhat.cols()).all(|j| self.bhat.is_fixed(q, j))
    }

    fn sub_matrix(&self, rows: &[usize]) -> SpreadingMatrix {
        let mut b = SpreadingMatrix::zeros(rows.len(), self.bhat.cols(), self.bhat.memory());
        for (i, &q) in rows.iter().enumerate() {
            for j in 0..b.cols() {
                b.set(i, j, self.bhat.get(q, j));
                b.set_fixed(i, j, self.bhat.is_fixed(q, j));
            }
        }
        b
    }

    fn absorb(&mut self, rows: &[usize], b: &SpreadingMatrix) {
        for (i, &q) in rows.iter().enumerate() {
            if !self.row_fixed(q) {
                self.bhat.adopt_row(q, b, i);
            }
        }
    }

    fn spec(&self, gamma: usize, p: usize, rows: &[usize], l: usize) -> Result<ScCodeSpec> {
        let base = AbMatrixSpec::new(gamma, p, rows.to_vec())?;
        let mut b = self.sub_matrix(rows);
        b.fix_all();
        ScCodeSpec::new(base, b, l, None)
    }
}

/// Runs one guided search on the sub-matrix given by `rows` if any of those
/// rows is still undecided. The search seed derives from the row labels, so
/// sub-codes that share no undecided rows give the same result in any
/// visiting order.
fn optimize_rows(
    plan: &NestedPlan,
    acc: &mut Accumulator,
    rows: &[usize],
    name: &str,
    traces: &mut Vec<NamedTrace>,
) -> Result<()> {
    if rows.iter().all(|&q| acc.row_fixed(q)) {
        return Ok(());
    }
    let b = acc.sub_matrix(rows);
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(plan.seed, rows));
    let out = guided_search(plan.p, rows, &b, plan.lmax, &mut rng)?;
    acc.absorb(rows, &out.spreading);
    traces.push(NamedTrace {
        name: name.to_string(),
        rho: out.trace,
    });
    Ok(())
}

/// Method 1: optimize the global rows first, then visit each sub-code in
/// order and fix its remaining rows triple by triple along its weight-3
/// cover.
pub fn run_method1(plan: &NestedPlan) -> Result<PipelineOutput> {
    plan.validate()?;
    let mut acc = Accumulator::new(plan.gamma, plan.p, plan.memory);
    let mut traces = Vec::new();
    optimize_rows(plan, &mut acc, &GLOBAL_ROWS, "global", &mut traces)?;
    for &idx in &plan.order {
        let cover = plan.cover_for(idx)?;
        for (z, triple) in cover.triples.iter().enumerate() {
            let name = format!("sub{}_z{}", idx + 1, z + 1);
            optimize_rows(plan, &mut acc, triple, &name, &mut traces)?;
        }
    }
    finalize(plan, acc, traces)
}

/// Method 2: optimize the first sub-code's complete spreading jointly (the
/// global rows fall out as a by-product), then fix the remaining rows of
/// each later sub-code under the accumulated constraints.
pub fn run_method2(plan: &NestedPlan) -> Result<PipelineOutput> {
    plan.validate()?;
    if plan.subcode_rows.is_empty() {
        return Err(Error::Invalid("method 2 needs at least one sub-code".into()));
    }
    let mut acc = Accumulator::new(plan.gamma, plan.p, plan.memory);
    let mut traces = Vec::new();
    for &idx in &plan.order {
        let rows = plan.subcode_rows[idx].clone();
        let name = format!("sub{}", idx + 1);
        optimize_rows(plan, &mut acc, &rows, &name, &mut traces)?;
    }
    // Arbitrary row-group selections need not cover the global rows.
    optimize_rows(plan, &mut acc, &GLOBAL_ROWS, "global", &mut traces)?;
    finalize(plan, acc, traces)
}

pub fn run_plan(plan: &NestedPlan) -> Result<PipelineOutput> {
    match plan.method {
        Method::One => run_method1(plan),
        Method::Two => run_method2(plan),
    }
}

fn finalize(
    plan: &NestedPlan,
    acc: Accumulator,
    traces: Vec<NamedTrace>,
) -> Result<PipelineOutput> {
    let global = acc.spec(plan.gamma, plan.p, &GLOBAL_ROWS, plan.coupling_len)?;
    let nested = plan
        .subcode_rows
        .iter()
        .map(|rows| acc.spec(plan.gamma, plan.p, rows, plan.coupling_len))
        .collect::<Result<Vec<_>>>()?;
    Ok(PipelineOutput {
        global,
        nested,
        traces,
    })
}
