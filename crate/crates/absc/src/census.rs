//! Ground-truth 6-cycle enumeration on expanded binary matrices, the
//! per-span decomposition of coupled counts, and asymptotic averages.
//!
//! This is the oracle the closed-form counter is checked against, so it
//! works from the Tanner graph alone and makes no structural assumptions
//! beyond the matrix being binary.

use crate::coupling::{assemble_window, ScCodeSpec};
use crate::gf2::{BinaryMatrix, CirculantGrid};
use num_rational::Rational64;
use std::collections::HashMap;

/// Which quantity an average refers to: distinct 6-cycles, or (cycle, VN)
/// incidences, which is exactly three per cycle.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Convention {
    Cycles,
    VnIncidence,
}

/// Census output. `per_block_span[e - 1]` is the number of 6-cycles spanning
/// precisely `e` contiguous column blocks; the totals at coupling length `L`
/// follow as `sum (L - e + 1) * mu_e`.
#[derive(Clone, PartialEq, Debug)]
pub struct CycleReport {
    pub total_cycles: u64,
    pub vn_incidences: u64,
    pub per_block_span: Vec<u64>,
    pub avg_cycles: Rational64,
    pub avg_vn_incidences: Rational64,
    pub convention: Convention,
}

impl CycleReport {
    pub fn asymptotic_average(&self) -> Rational64 {
        match self.convention {
            Convention::Cycles => self.avg_cycles,
            Convention::VnIncidence => self.avg_vn_incidences,
        }
    }
}

fn shared_cn_lists(m: &BinaryMatrix) -> HashMap<(u32, u32), Vec<u32>> {
    let mut pairs: HashMap<(u32, u32), Vec<u32>> = HashMap::new();
    for r in 0..m.rows() {
        let sup = m.row(r);
        for i in 0..sup.len() {
            for j in (i + 1)..sup.len() {
                pairs.entry((sup[i], sup[j])).or_default().push(r as u32);
            }
        }
    }
    pairs
}

fn sorted_intersection_len(a: &[u32], b: &[u32]) -> u64 {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// Counts distinct 6-cycles: unordered VN triples joined by three distinct
/// CNs into a closed alternating walk, each counted once.
///
/// For a VN triple with shared-CN multiplicities `M1, M2, M3` between its
/// pairs and `t` CNs adjacent to all three VNs, the number of valid CN
/// selections is `M1*M2*M3 - t*(M1 + M2 + M3) + 2t` by inclusion-exclusion
/// over repeated CNs.
pub fn count_6cycles(m: &BinaryMatrix) -> u64 {
    let pairs = shared_cn_lists(m);
    let mut fwd: Vec<Vec<u32>> = vec![Vec::new(); m.cols()];
    for &(a, b) in pairs.keys() {
        fwd[a as usize].push(b);
    }
    for f in &mut fwd {
        f.sort_unstable();
    }
    let mut total = 0u64;
    for a in 0..m.cols() as u32 {
        let fa = &fwd[a as usize];
        for (i, &b) in fa.iter().enumerate() {
            let fb = &fwd[b as usize];
            // c ranges over fa[i+1..] ∩ fb, keeping a < b < c.
            let (mut x, mut y) = (i + 1, 0);
            while x < fa.len() && y < fb.len() {
                match fa[x].cmp(&fb[y]) {
                    std::cmp::Ordering::Less => x += 1,
                    std::cmp::Ordering::Greater => y += 1,
                    std::cmp::Ordering::Equal => {
                        let c = fa[x];
                        let s_ab = &pairs[&(a, b)];
                        let s_bc = &pairs[&(b, c)];
                        let s_ac = &pairs[&(a, c)];
                        let (m1, m2, m3) = (s_ab.len() as u64, s_bc.len() as u64, s_ac.len() as u64);
                        let t = sorted_intersection_len(s_ab, s_bc);
                        total += m1 * m2 * m3 + 2 * t - t * (m1 + m2 + m3);
                        x += 1;
                        y += 1;
                    }
                }
            }
        }
    }
    total
}

/// One explicit 6-cycle: its three VN columns and three CN rows.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct SixCycle {
    pub vns: [u32; 3],
    pub cns: [u32; 3],
}

/// Lists every 6-cycle explicitly. Only intended for small instances.
pub fn enumerate_6cycles(m: &BinaryMatrix) -> Vec<SixCycle> {
    let pairs = shared_cn_lists(m);
    let mut fwd: Vec<Vec<u32>> = vec![Vec::new(); m.cols()];
    for &(a, b) in pairs.keys() {
        fwd[a as usize].push(b);
    }
    for f in &mut fwd {
        f.sort_unstable();
    }
    let mut cycles = Vec::new();
    for a in 0..m.cols() as u32 {
        let fa = fwd[a as usize].clone();
        for (i, &b) in fa.iter().enumerate() {
            for &c in &fa[i + 1..] {
                if !pairs.contains_key(&(b, c)) {
                    continue;
                }
                for &x in &pairs[&(a, b)] {
                    for &y in &pairs[&(b, c)] {
                        for &z in &pairs[&(a, c)] {
                            if x != y && y != z && x != z {
                                cycles.push(SixCycle {
                                    vns: [a, b, c],
                                    cns: [x, y, z],
                                });
                            }
                        }
                    }
                }
            }
        }
    }
    cycles
}

/// Per-span counts from oracle censuses of windows of 1..=m+1 column
/// blocks: `mu_e = N_e - 2 N_{e-1} + N_{e-2}` where `N_w` is the census of
/// the `w`-block window.
pub fn mu_decomposition(components: &[CirculantGrid]) -> Vec<u64> {
    let m = components.len() - 1;
    let n: Vec<i128> = (0..=m + 1)
        .map(|w| {
            if w == 0 {
                0
            } else {
                count_6cycles(&assemble_window(components, w).expand()) as i128
            }
        })
        .collect();
    (1..=m + 1)
        .map(|e| {
            let prev2 = if e >= 2 { n[e - 2] } else { 0 };
            let mu = n[e] - 2 * n[e - 1] + prev2;
            assert!(mu >= 0, "window censuses are not consistent");
            mu as u64
        })
        .collect()
}

/// Total at coupling length `L` from the span decomposition.
pub fn total_from_mu(mu: &[u64], coupling_len: usize) -> u64 {
    mu.iter()
        .enumerate()
        .map(|(i, &mu_e)| (coupling_len - i) as u64 * mu_e)
        .sum()
}

/// `A_m = sum_e mu_e / p^2`, tripled under the VN-incidence convention.
pub fn asymptotic_average(mu: &[u64], p: usize, convention: Convention) -> Rational64 {
    let sum: u64 = mu.iter().sum();
    let scale = match convention {
        Convention::Cycles => 1,
        Convention::VnIncidence => 3,
    };
    Rational64::new(scale * sum as i64, (p * p) as i64)
}

/// Full oracle report for a coupled code spec (ignoring any terminal lift).
pub fn census_report(spec: &ScCodeSpec, convention: Convention) -> CycleReport {
    let mu = mu_decomposition(&spec.components());
    report_from_mu(&mu, spec.base.p, spec.coupling_len, convention)
}

/// Report for an uncoupled grid: everything spans one block.
pub fn census_report_uncoupled(grid: &CirculantGrid, convention: Convention) -> CycleReport {
    let total = count_6cycles(&grid.expand());
    report_from_mu(&[total], grid.block_size(), 1, convention)
}

pub fn report_from_mu(
    mu: &[u64],
    p: usize,
    coupling_len: usize,
    convention: Convention,
) -> CycleReport {
    let total = total_from_mu(mu, coupling_len);
    CycleReport {
        total_cycles: total,
        vn_incidences: 3 * total,
        per_block_span: mu.to_vec(),
        avg_cycles: asymptotic_average(mu, p, Convention::Cycles),
        avg_vn_incidences: asymptotic_average(mu, p, Convention::VnIncidence),
        convention,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ab::{build_ab, extract_nested, AbMatrixSpec};
    use crate::coupling::{split_components, ScCodeSpec, SpreadingMatrix};
    use crate::gf2::CirculantGrid;
    use rand::SeedableRng;

    #[test]
    fn ab_block_counts_match_formula() {
        // p^2 (p - 1) cycles in the column weight-3 array matrix.
        for p in [5usize, 7, 11] {
            let h = build_ab(3, p).unwrap().expand();
            assert_eq!(count_6cycles(&h), (p * p * (p - 1)) as u64);
        }
    }

    #[test]
    fn identity_has_no_cycles() {
        let id = CirculantGrid::from_cells(1, 1, 3, vec![crate::gf2::Cell::Shift(0)])
            .unwrap()
            .expand();
        assert_eq!(count_6cycles(&id), 0);
    }

    #[test]
    fn star_triples_are_not_cycles() {
        // One check adjacent to three variables: no 6-cycle.
        let m = BinaryMatrix::from_entries(1, 3, [(0, 0), (0, 1), (0, 2)]).unwrap();
        assert_eq!(count_6cycles(&m), 0);
        // A genuine 6-cycle.
        let m = BinaryMatrix::from_entries(
            3,
            3,
            [(0, 0), (0, 1), (1, 1), (1, 2), (2, 2), (2, 0)],
        )
        .unwrap();
        assert_eq!(count_6cycles(&m), 1);
        assert_eq!(enumerate_6cycles(&m).len(), 1);
    }

    #[test]
    fn count_with_four_cycles_present() {
        // Two checks over the same variable pair (a 4-cycle) plus a third
        // variable closing through distinct checks: enumeration and the
        // multiplicity formula must agree.
        let m = BinaryMatrix::from_entries(
            4,
            3,
            [
                (0, 0),
                (0, 1),
                (1, 0),
                (1, 1),
                (2, 1),
                (2, 2),
                (3, 2),
                (3, 0),
            ],
        )
        .unwrap();
        assert_eq!(count_6cycles(&m), enumerate_6cycles(&m).len() as u64);
        assert_eq!(count_6cycles(&m), 2);
    }

    #[test]
    fn every_cycle_spans_three_groups() {
        let p = 5;
        let h = build_ab(3, p).unwrap();
        for cyc in enumerate_6cycles(&h.expand()) {
            let col_groups: std::collections::HashSet<u32> =
                cyc.vns.iter().map(|&v| v / p as u32).collect();
            let row_groups: std::collections::HashSet<u32> =
                cyc.cns.iter().map(|&r| r / p as u32).collect();
            assert_eq!(col_groups.len(), 3);
            assert_eq!(row_groups.len(), 3);
        }
    }

    fn example_spec_m1() -> ScCodeSpec {
        let base = AbMatrixSpec::new(3, 5, vec![0, 1, 2]).unwrap();
        let b = crate::coupling::tests::b1_eq4();
        ScCodeSpec::new(base, b, 4, None).unwrap()
    }

    #[test]
    fn mu_linearity_on_worked_example() {
        let spec = example_spec_m1();
        let comps = spec.components();
        let mu = mu_decomposition(&comps);
        assert_eq!(mu.len(), 2);
        for l in [3usize, 4, 5] {
            let direct = count_6cycles(&assemble_window(&comps, l).expand());
            assert_eq!(direct, total_from_mu(&mu, l), "L = {l}");
        }
    }

    #[test]
    fn mu_linearity_on_random_spreadings() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
        for (p, m) in [(5usize, 1usize), (5, 2), (7, 1)] {
            for _ in 0..5 {
                let h = build_ab(3, p).unwrap();
                let b = SpreadingMatrix::random(3, p, m, &mut rng);
                let comps = split_components(&h, &b).unwrap();
                let mu = mu_decomposition(&comps);
                for l in (m + 2)..=(m + 4) {
                    let direct = count_6cycles(&assemble_window(&comps, l).expand());
                    assert_eq!(direct, total_from_mu(&mu, l));
                }
            }
        }
    }

    #[test]
    fn memory_zero_mu_is_block_count() {
        let h = build_ab(3, 5).unwrap();
        let mu = mu_decomposition(&[h.clone()]);
        assert_eq!(mu, vec![100]);
    }

    #[test]
    fn bc_averages_match_reported_values() {
        // Weight-3 and weight-4 averages under VN incidence, weight-5 under
        // plain cycle counting; see the convention note in the module docs.
        for (p, expect) in [(5usize, 12i64), (7, 18), (11, 30)] {
            let r = census_report_uncoupled(
                &build_ab(3, p).unwrap(),
                Convention::VnIncidence,
            );
            assert_eq!(r.asymptotic_average(), Rational64::from(expect));
        }
        for (p, expect) in [(5usize, 48i64), (7, 72), (11, 120)] {
            let full = build_ab(4, p).unwrap();
            let h1 = extract_nested(&full, &[0, 1, 2, 3]).unwrap();
            let r = census_report_uncoupled(&h1, Convention::VnIncidence);
            assert_eq!(r.asymptotic_average(), Rational64::from(expect));
        }
        for (p, expect) in [(7usize, 60i64), (11, 100)] {
            let h = build_ab(5, p).unwrap();
            let r = census_report_uncoupled(&h, Convention::Cycles);
            assert_eq!(r.asymptotic_average(), Rational64::from(expect));
        }
    }

    #[test]
    fn report_consistency() {
        let spec = example_spec_m1();
        let r = census_report(&spec, Convention::VnIncidence);
        assert_eq!(r.vn_incidences, 3 * r.total_cycles);
        assert_eq!(
            r.avg_vn_incidences,
            r.avg_cycles * Rational64::from(3)
        );
        let zero = report_from_mu(&[0, 0], 5, 10, Convention::Cycles);
        assert_eq!(zero.asymptotic_average(), Rational64::from(0));
    }
}
