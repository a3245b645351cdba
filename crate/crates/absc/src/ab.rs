//! Array-based parity-check matrices: the `gamma x p` grid of circulants
//! with shift `q*j mod p`, nested sub-matrix extraction by row groups, and
//! the column weight-3 cover that drives the nested optimization.

use crate::gf2::{Cell, CirculantGrid};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Identity of an array-based matrix or of one of its nested sub-matrices:
/// the full construction parameters plus the selected row groups.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct AbMatrixSpec {
    pub gamma: usize,
    pub p: usize,
    pub row_groups: Vec<usize>,
}

impl AbMatrixSpec {
    pub fn new(gamma: usize, p: usize, row_groups: Vec<usize>) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::Invalid(format!("p = {p} is not prime")));
        }
        if gamma == 0 || gamma > p {
            return Err(Error::Invalid(format!(
                "gamma = {gamma} must satisfy 1 <= gamma <= p = {p}"
            )));
        }
        let mut sorted = row_groups.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != row_groups.len() || sorted != row_groups {
            return Err(Error::Invalid(
                "row groups must be distinct and sorted".into(),
            ));
        }
        if row_groups.iter().any(|&q| q >= gamma) {
            return Err(Error::Invalid("row group index exceeds gamma".into()));
        }
        Ok(AbMatrixSpec { gamma, p, row_groups })
    }

    /// Column weight of the selected sub-matrix.
    pub fn omega(&self) -> usize {
        self.row_groups.len()
    }

    /// The grid of the selected row groups.
    pub fn grid(&self) -> CirculantGrid {
        let full = build_ab(self.gamma, self.p).expect("validated parameters");
        extract_nested(&full, &self.row_groups).expect("validated row groups")
    }
}

pub fn is_prime(n: usize) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Builds the full `gamma x p` array-based grid with cell `(q, j)` holding
/// the circulant shift `q*j mod p`. Row group 0 is all identities.
pub fn build_ab(gamma: usize, p: usize) -> Result<CirculantGrid> {
    if !is_prime(p) {
        return Err(Error::Invalid(format!("p = {p} is not prime")));
    }
    if gamma == 0 || gamma > p {
        return Err(Error::Invalid(format!(
            "gamma = {gamma} must satisfy 1 <= gamma <= p = {p}"
        )));
    }
    let cells = (0..gamma)
        .flat_map(|q| (0..p).map(move |j| Cell::Shift((q * j % p) as u32)))
        .collect();
    CirculantGrid::from_cells(gamma, p, p, cells)
}

/// Restricts a grid to the listed row groups, order preserved.
pub fn extract_nested(full: &CirculantGrid, row_groups: &[usize]) -> Result<CirculantGrid> {
    full.select_block_rows(row_groups)
}

/// A set of row-group triples, each containing row group 0, that together
/// cover every selected row group.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Weight3Cover {
    pub triples: Vec<[usize; 3]>,
}

impl Weight3Cover {
    /// Validates a caller-supplied cover against a row-group set.
    pub fn validate(&self, row_groups: &[usize]) -> Result<()> {
        let mut covered = vec![0usize; row_groups.len()];
        for t in &self.triples {
            if t[0] != 0 {
                return Err(Error::Invalid("cover triple must start at row group 0".into()));
            }
            if t[1] >= t[2] {
                return Err(Error::Invalid("cover triple must be sorted".into()));
            }
            for &q in t {
                match row_groups.iter().position(|&g| g == q) {
                    Some(i) => covered[i] += 1,
                    None => {
                        return Err(Error::Invalid(format!(
                            "cover references row group {q} outside the sub-code"
                        )))
                    }
                }
            }
        }
        if covered.iter().any(|&c| c == 0) {
            return Err(Error::Invalid("cover misses a row group".into()));
        }
        let mut seen = std::collections::HashSet::new();
        if !self.triples.iter().all(|t| seen.insert(*t)) {
            return Err(Error::Invalid("duplicate cover triple".into()));
        }
        Ok(())
    }
}

/// Selects the deterministic weight-3 cover of a row-group set containing
/// row group 0: the non-zero groups are paired in ascending order, and an
/// odd leftover is covered by one extra triple that reuses the smallest
/// non-zero group. The result has `floor((w-1)/2) + (w-1) mod 2` triples.
pub fn weight3_cover(row_groups: &[usize]) -> Result<Weight3Cover> {
    if row_groups.len() < 3 {
        return Err(Error::Invalid("need at least 3 row groups".into()));
    }
    if row_groups[0] != 0 {
        return Err(Error::Invalid("row group 0 required".into()));
    }
    let rest = &row_groups[1..];
    let mut triples = Vec::new();
    for pair in rest.chunks_exact(2) {
        triples.push([0, pair[0], pair[1]]);
    }
    if rest.len() % 2 == 1 {
        let leftover = *rest.last().unwrap();
        triples.push([0, rest[0].min(leftover), rest[0].max(leftover)]);
    }
    Ok(Weight3Cover { triples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2::Cell::*;

    #[test]
    fn ab_5_5_matches_display() {
        let g = build_ab(5, 5).unwrap();
        // Row group 3 is [I, s^3, s, s^4, s^2] and row group 4 is
        // [I, s^4, s^3, s^2, s].
        let row = |q: usize| (0..5).map(|j| g.cell(q, j)).collect::<Vec<_>>();
        assert_eq!(row(3), vec![Shift(0), Shift(3), Shift(1), Shift(4), Shift(2)]);
        assert_eq!(row(4), vec![Shift(0), Shift(4), Shift(3), Shift(2), Shift(1)]);
        assert_eq!(row(0), vec![Shift(0); 5]);
    }

    #[test]
    fn ab_row_of_identities() {
        let g = build_ab(1, 5).unwrap();
        assert_eq!(g.block_rows(), 1);
        assert!((0..5).all(|j| g.cell(0, j) == Shift(0)));
    }

    #[test]
    fn ab_modular_product() {
        let g = build_ab(3, 7).unwrap();
        assert_eq!(g.cell(2, 5), Shift(3)); // 10 mod 7
    }

    #[test]
    fn ab_rejects_bad_parameters() {
        assert!(build_ab(3, 6).is_err());
        assert!(build_ab(6, 5).is_err());
        assert!(build_ab(0, 5).is_err());
    }

    #[test]
    fn nested_extraction_matches_eq2() {
        let full = build_ab(5, 5).unwrap();
        let h1 = extract_nested(&full, &[0, 1, 2, 3]).unwrap();
        let h2 = extract_nested(&full, &[0, 1, 2, 4]).unwrap();
        for j in 0..5 {
            for q in 0..3 {
                assert_eq!(h1.cell(q, j), full.cell(q, j));
                assert_eq!(h2.cell(q, j), full.cell(q, j));
            }
            assert_eq!(h1.cell(3, j), full.cell(3, j));
            assert_eq!(h2.cell(3, j), full.cell(4, j));
        }
        let all = extract_nested(&full, &[0, 1, 2, 3, 4]).unwrap();
        assert_eq!(all, full);
    }

    #[test]
    fn nested_extraction_rejects_bad_rows() {
        let full = build_ab(5, 5).unwrap();
        assert!(extract_nested(&full, &[0, 0]).is_err());
        assert!(extract_nested(&full, &[0, 7]).is_err());
    }

    #[test]
    fn extraction_commutes_with_expansion() {
        let full = build_ab(5, 5).unwrap();
        let sub = extract_nested(&full, &[1, 3]).unwrap().expand();
        let whole = full.expand();
        for (bi, &q) in [1usize, 3].iter().enumerate() {
            for s in 0..5 {
                for c in 0..25 {
                    assert_eq!(sub.get(bi * 5 + s, c), whole.get(q * 5 + s, c));
                }
            }
        }
    }

    #[test]
    fn cover_sizes() {
        for (omega, t) in [(3, 1), (4, 2), (5, 2), (6, 3), (7, 3), (8, 4)] {
            let rows: Vec<usize> = (0..omega).collect();
            let cover = weight3_cover(&rows).unwrap();
            assert_eq!(cover.triples.len(), t, "omega = {omega}");
            cover.validate(&rows).unwrap();
        }
    }

    #[test]
    fn cover_examples() {
        let c = weight3_cover(&[0, 1, 2, 3]).unwrap();
        assert_eq!(c.triples, vec![[0, 1, 2], [0, 1, 3]]);
        let c = weight3_cover(&[0, 1, 2, 3, 4]).unwrap();
        assert_eq!(c.triples, vec![[0, 1, 2], [0, 3, 4]]);
        let c = weight3_cover(&[0, 1, 2]).unwrap();
        assert_eq!(c.triples, vec![[0, 1, 2]]);
    }

    #[test]
    fn cover_requires_three_rows() {
        assert!(weight3_cover(&[0, 1]).is_err());
    }

    #[test]
    fn explicit_cover_validation() {
        let rows = [0, 1, 2, 3];
        let ok = Weight3Cover {
            triples: vec![[0, 1, 2], [0, 2, 3]],
        };
        ok.validate(&rows).unwrap();
        let misses = Weight3Cover {
            triples: vec![[0, 1, 2]],
        };
        assert!(misses.validate(&rows).is_err());
        let foreign = Weight3Cover {
            triples: vec![[0, 1, 2], [0, 2, 9]],
        };
        assert!(foreign.validate(&rows).is_err());
    }

    #[test]
    fn no_four_cycles_in_ab_expansions() {
        // Any two columns share at most one row.
        for (gamma, p) in [(3, 5), (4, 5), (5, 5), (3, 7), (4, 7)] {
            let h = build_ab(gamma, p).unwrap().expand();
            for a in 0..h.cols() {
                for b in (a + 1)..h.cols() {
                    let shared = h
                        .col(a)
                        .iter()
                        .filter(|r| h.col(b).binary_search(r).is_ok())
                        .count();
                    assert!(shared <= 1, "4-cycle in ({gamma},{p}) at cols {a},{b}");
                }
            }
        }
    }
}
