//! Adapted line counting: closed-form 6-cycle enumeration in column
//! weight-3 regions of array-based (coupled) matrices.
//!
//! A 6-cycle whose two identity-row columns are `c1 < c2` lies on the line
//! `c2 - c1 = n*p` of the `(c1, c2)` plane, and the admissible stretch of
//! that line is cut out by the column windows of `c1`, `c2` and by two
//! parallel lines encoding the reach of the third column `c3`. Counting
//! integer points on the clipped segment counts cycles. All geometry is
//! exact rational arithmetic; an off-by-ulp comparison here would silently
//! miscount, so no floats appear anywhere in this module.

use crate::census::{report_from_mu, Convention, CycleReport};
use crate::coupling::ScCodeSpec;
use crate::{Error, Result};
use num_rational::Rational64;

type Q = Rational64;

fn q(n: i64) -> Q {
    Q::from_integer(n)
}

fn mod_p(x: i64, p: i64) -> i64 {
    x.rem_euclid(p)
}

/// Modular inverse for prime p.
fn inv_mod(x: i64, p: i64) -> i64 {
    let mut base = mod_p(x, p);
    assert!(base != 0, "no inverse of 0");
    let mut exp = p - 2;
    let mut acc = 1i64;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        exp >>= 1;
    }
    acc
}

/// One bounding line of the `c3` range: `c2 = slope * c1 + intercept`,
/// non-strict on the alpha side and strict on the beta side.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct BoundLine {
    pub slope: Q,
    pub intercept: Q,
    pub strict: bool,
}

/// The two lines bounding `c2 - (q3/q2) c1` for column-group window
/// `[alpha, beta)` of the third column and wrap count `lambda`. The first
/// (alpha) line is the non-strict bound, the second (beta) the strict one.
pub fn c3_range(
    q2: i64,
    q3: i64,
    lambda: i64,
    alpha: i64,
    beta: i64,
    p: i64,
) -> Result<(BoundLine, BoundLine)> {
    if q2 == 0 || q2 == q3 {
        return Err(Error::Invalid("need q2 != q3 and q2 nonzero".into()));
    }
    let slope = Q::new(q3, q2);
    let base = q(lambda) * q(p) * q(p) / q(q2);
    let coeff = (q(1) - slope) * q(p);
    Ok((
        BoundLine {
            slope,
            intercept: coeff * q(alpha) + base,
            strict: false,
        },
        BoundLine {
            slope,
            intercept: coeff * q(beta) + base,
            strict: true,
        },
    ))
}

/// The clipped line of one block-cycle window: every intersection point,
/// the two segment ends, and the boundary-condition verdict.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LineGeometry {
    pub w1: i64,
    pub w2: i64,
    pub w3: i64,
    pub w4: i64,
    pub alpha: i64,
    pub beta: i64,
    pub lambda: i64,
    pub n: i64,
    pub q2: i64,
    pub q3: i64,
    pub p: i64,
    /// Column-block translation applied to bring the window into the base
    /// frame; purely diagnostic, the count is translation invariant.
    pub frame_offset: i64,
    pub phi1: (Q, Q),
    pub phi2: (Q, Q),
    pub theta1: (Q, Q),
    pub theta2: (Q, Q),
    pub theta3: (Q, Q),
    pub theta4: (Q, Q),
    pub sigma1: (Q, Q),
    pub sigma2: (Q, Q),
    pub nu1: Q,
    pub nu2: Q,
}

impl LineGeometry {
    /// Builds the geometry for the line `c2 - c1 = n*p` against the column
    /// windows `w1 p <= c1 < w2 p`, `w3 p <= c2 < w4 p`, and the `c3` band
    /// `[alpha, beta)` at wrap count `lambda`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        w1: i64,
        w2: i64,
        w3: i64,
        w4: i64,
        alpha: i64,
        beta: i64,
        lambda: i64,
        n: i64,
        q2: i64,
        q3: i64,
        p: i64,
        frame_offset: i64,
    ) -> Self {
        let (lower, upper) =
            c3_range(q2, q3, lambda, alpha, beta, p).expect("valid q2, q3");
        let slope = lower.slope;
        let np = q(n * p);
        // phi: l7 against the two c3-band lines (slope q3/q2 != 1).
        let cross = |line: &BoundLine| {
            let x = (line.intercept - np) / (q(1) - slope);
            (x, x + np)
        };
        let phi1 = cross(&lower);
        let phi2 = cross(&upper);
        // theta: l7 against the four window edges.
        let theta1 = (q(w1 * p), q(w1 * p) + np);
        let theta2 = (q(w2 * p), q(w2 * p) + np);
        let theta3 = (q(w3 * p) - np, q(w3 * p));
        let theta4 = (q(w4 * p) - np, q(w4 * p));
        let max3 = |a: Q, b: Q, c: Q| a.max(b).max(c);
        let min3 = |a: Q, b: Q, c: Q| a.min(b).min(c);
        let sigma1 = (
            max3(phi1.0, theta1.0, theta3.0),
            max3(phi1.1, theta1.1, theta3.1),
        );
        let sigma2 = (
            min3(phi2.0, theta2.0, theta4.0),
            min3(phi2.1, theta2.1, theta4.1),
        );
        let g = slope;
        let base = q(lambda) * q(p) * q(p) / q(q2);
        let nu1 = q(alpha * p) + (q(w2) - q(alpha)) * g * q(p) + base;
        let nu2 = q(beta * p) + (q(w1) - q(beta)) * g * q(p) + base;
        LineGeometry {
            w1,
            w2,
            w3,
            w4,
            alpha,
            beta,
            lambda,
            n,
            q2,
            q3,
            p,
            frame_offset,
            phi1,
            phi2,
            theta1,
            theta2,
            theta3,
            theta4,
            sigma1,
            sigma2,
            nu1,
            nu2,
        }
    }

    /// Boundary conditions deciding whether the line crosses the admissible
    /// region at all.
    pub fn conditions_hold(&self) -> bool {
        let band = if self.q3 < self.q2 {
            self.theta1.1 < self.nu2 && self.theta2.1 > self.nu1
        } else {
            q(self.w3 * self.p) < self.phi2.1 && q(self.w4 * self.p) > self.phi1.1
        };
        let boxed = self.theta1.0 <= self.sigma1.0
            && self.sigma1.0 <= self.theta2.0
            && self.theta1.0 <= self.sigma2.0
            && self.sigma2.0 <= self.theta2.0
            && self.theta1.1 <= self.sigma1.1
            && self.sigma1.1 <= self.theta2.1
            && self.theta1.1 <= self.sigma2.1
            && self.sigma2.1 <= self.theta2.1;
        band && boxed && self.sigma1.0 <= self.sigma2.0
    }

    /// Number of 6-cycles on the clipped segment:
    /// `sqrt(((s2x - s1x)^2 + (s2y - s1y)^2) / 2)` when the boundary
    /// conditions hold, else zero. The segment lies on a slope-1 line, so
    /// the radicand is a perfect square and the result is asserted integral.
    pub fn count(&self) -> u64 {
        if !self.conditions_hold() {
            return 0;
        }
        let dx = self.sigma2.0 - self.sigma1.0;
        let dy = self.sigma2.1 - self.sigma1.1;
        assert_eq!(dx, dy, "segment endpoints left the slope-1 line");
        let len2 = (dx * dx + dy * dy) / q(2);
        let len = dx;
        assert_eq!(len * len, len2);
        assert!(len.is_integer(), "non-integral line length {len}");
        *len.numer() as u64
    }
}

/// A column weight-3 matrix region: one identity row group and two labeled
/// row groups, each with a presence mask over `width * p` column groups.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RegionDescriptor {
    pub p: usize,
    /// Column blocks spanned by the region.
    pub width: usize,
    /// Circulant multipliers of the two non-identity row groups, nonzero
    /// and distinct modulo p.
    pub q2: usize,
    pub q3: usize,
    /// Block rows of (identity, q2, q3); diagnostic only, the masks carry
    /// the placement.
    pub block_rows: [usize; 3],
    pub identity_mask: Vec<bool>,
    pub q2_mask: Vec<bool>,
    pub q3_mask: Vec<bool>,
}

impl RegionDescriptor {
    pub fn validate(&self) -> Result<()> {
        let p = self.p as i64;
        if mod_p(self.q2 as i64, p) == 0
            || mod_p(self.q3 as i64, p) == 0
            || mod_p(self.q2 as i64, p) == mod_p(self.q3 as i64, p)
        {
            return Err(Error::Invalid(
                "region labels must be nonzero and distinct mod p".into(),
            ));
        }
        let len = self.width * self.p;
        if self.identity_mask.len() != len
            || self.q2_mask.len() != len
            || self.q3_mask.len() != len
        {
            return Err(Error::Invalid("region mask length mismatch".into()));
        }
        Ok(())
    }

    /// Region of a full (uncoupled) weight-3 array matrix: all masks true.
    pub fn full_block(p: usize, q2: usize, q3: usize) -> Self {
        RegionDescriptor {
            p,
            width: 1,
            q2,
            q3,
            block_rows: [0, 0, 0],
            identity_mask: vec![true; p],
            q2_mask: vec![true; p],
            q3_mask: vec![true; p],
        }
    }
}

/// Runs the line computation for one block-cycle window: the single-group
/// windows of `(c1, c2)` at global column groups `(g1, g2)` and the `c3`
/// band at `g3`, with the wrap count fixed by the group arithmetic.
fn window_count(p: i64, qa: i64, qb: i64, g1: i64, g2: i64, g3: i64) -> u64 {
    let lam_num = qa * g2 - qb * g1 - (qa - qb) * g3;
    debug_assert_eq!(lam_num.rem_euclid(p), 0);
    let lambda = lam_num / p;
    // Translate into the base frame before running the geometry.
    let t = (g1 / p).min(g2 / p).min(g3 / p);
    let (g1, g2, g3) = (g1 - t * p, g2 - t * p, g3 - t * p);
    let (w1, w2, w3, w4) = (g1, g1 + 1, g2, g2 + 1);
    let (alpha, beta) = (g3, g3 + 1);
    let mut total = 0;
    // Only lines that meet the (c1, c2) window matter; within the stated
    // range 1..w4-w1 that is n in (w3-w2, w4-w1).
    let lo = 1.max(w3 - w2 + 1);
    let hi = w4 - w1 - 1;
    for n in lo..=hi {
        total += LineGeometry::new(w1, w2, w3, w4, alpha, beta, lambda, n, qa, qb, p, t).count();
    }
    total
}

/// Counts 6-cycles in a region, bucketed by the number of contiguous
/// column blocks each cycle spans.
pub fn count_region_by_span(region: &RegionDescriptor) -> Result<Vec<u64>> {
    region.validate()?;
    let p = region.p as i64;
    let wp = (region.width * region.p) as i64;
    let mut by_span = vec![0u64; region.width];
    let id_support: Vec<i64> = (0..wp)
        .filter(|&g| region.identity_mask[g as usize])
        .collect();
    for (i, &g1) in id_support.iter().enumerate() {
        for &g2 in &id_support[i + 1..] {
            for (qa, qb, mask_a, mask_b) in [
                (
                    region.q2 as i64,
                    region.q3 as i64,
                    &region.q2_mask,
                    &region.q3_mask,
                ),
                (
                    region.q3 as i64,
                    region.q2 as i64,
                    &region.q3_mask,
                    &region.q2_mask,
                ),
            ] {
                let rho = mod_p((qa * g2 - qb * g1) * inv_mod(qa - qb, p), p);
                let mut g3 = rho;
                while g3 < wp {
                    if g3 != g1
                        && g3 != g2
                        && mask_a[g2 as usize]
                        && mask_a[g3 as usize]
                        && mask_b[g1 as usize]
                        && mask_b[g3 as usize]
                    {
                        let cnt = window_count(p, qa, qb, g1, g2, g3);
                        if cnt > 0 {
                            let vmin = (g1 / p).min(g2 / p).min(g3 / p);
                            let vmax = (g1 / p).max(g2 / p).max(g3 / p);
                            by_span[(vmax - vmin) as usize] += cnt;
                        }
                    }
                    g3 += p;
                }
            }
        }
    }
    Ok(by_span)
}

/// Total 6-cycles in a region.
pub fn count_region(region: &RegionDescriptor) -> Result<u64> {
    Ok(count_region_by_span(region)?.iter().sum())
}

/// A structural region template of a memory-m coupled matrix: the block
/// rows hosting (identity, q2, q3) and the largest column-block span a
/// cycle of the region can cover.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct RegionTemplate {
    pub span: usize,
    pub block_rows: [usize; 3],
}

/// Column blocks of a width-(m+1) window that block row `y` covers.
fn coverage(y: usize, m: usize) -> (i64, i64) {
    ((y as i64 - m as i64).max(0), (y as i64).min(m as i64))
}

/// Enumerates every region template of a memory-m column weight-3 coupled
/// matrix: the block-row triples of a single column block, plus the triples
/// over block rows 0..=2m that can host a multi-block cycle anchored at the
/// window's first column block. Anchoring identifies translated copies, so
/// each template is one translation class of cycles.
pub fn enumerate_regions(m: usize) -> Vec<RegionTemplate> {
    let mut out = Vec::new();
    for y1 in 0..=m {
        for y2 in 0..=m {
            for y3 in 0..=m {
                out.push(RegionTemplate {
                    span: 1,
                    block_rows: [y1, y2, y3],
                });
            }
        }
    }
    for y1 in 0..=2 * m {
        for y2 in 0..=2 * m {
            for y3 in 0..=2 * m {
                if let Some(span) = spanning_template([y1, y2, y3], m) {
                    out.push(RegionTemplate {
                        span,
                        block_rows: [y1, y2, y3],
                    });
                }
            }
        }
    }
    out
}

/// Largest span of a cycle the triple can host with its leftmost column
/// block at 0, provided that span exceeds one block.
fn spanning_template(y: [usize; 3], m: usize) -> Option<usize> {
    // The cycle's columns sit in blocks b12 (shared by identity and q2),
    // b23 (q2 and q3), b31 (q3 and identity).
    let c: Vec<(i64, i64)> = y.iter().map(|&yy| coverage(yy, m)).collect();
    let pairs = [(0usize, 1usize), (1, 2), (2, 0)];
    let ranges: Vec<(i64, i64)> = pairs
        .iter()
        .map(|&(a, b)| (c[a].0.max(c[b].0), c[a].1.min(c[b].1)))
        .collect();
    if ranges.iter().any(|&(lo, hi)| lo > hi) {
        return None;
    }
    let mut best = 0i64;
    for b1 in ranges[0].0..=ranges[0].1 {
        for b2 in ranges[1].0..=ranges[1].1 {
            for b3 in ranges[2].0..=ranges[2].1 {
                let (lo, hi) = (b1.min(b2).min(b3), b1.max(b2).max(b3));
                if lo == 0 {
                    best = best.max(hi + 1);
                }
            }
        }
    }
    (best >= 2).then_some(best as usize)
}

/// Upper bound on the number of regions of a memory-m matrix.
pub fn region_bound(m: u64) -> u64 {
    let choose2 = |n: u64| n * n.saturating_sub(1) / 2;
    (3 * m + 2) * (choose2(2 * (m + 1)) - 2 * choose2(m + 1))
}

/// Per-span cycle counts for one row-group triple of a spread base matrix,
/// computed on a window of m+1 column blocks. `labels` are the circulant
/// multipliers of the three row groups and `rows` their spreading rows; the
/// triple need not contain the identity group, since subtracting the
/// smallest multiplier from all three is a graph isomorphism that restores
/// an identity row group without touching the spreading.
pub fn alc_mu_for_triple(
    p: usize,
    m: usize,
    labels: [usize; 3],
    rows: [&[u8]; 3],
) -> Result<Vec<u64>> {
    let pi = p as i64;
    let base = labels[0] as i64;
    let a = mod_p(labels[1] as i64 - base, pi);
    let b = mod_p(labels[2] as i64 - base, pi);
    if a == 0 || b == 0 || a == b {
        return Err(Error::Invalid(
            "row-group labels must be distinct modulo p".into(),
        ));
    }
    for r in rows {
        if r.len() != p {
            return Err(Error::Invalid("spreading row length mismatch".into()));
        }
    }
    let w = m + 1;
    let wp = (w * p) as i64;
    let mut by_span = vec![0i64; w];
    for g1 in 0..wp {
        let (v1, j1) = (g1 / pi, (g1 % pi) as usize);
        let y1 = v1 + rows[0][j1] as i64;
        for g2 in (g1 + 1)..wp {
            let (v2, j2) = (g2 / pi, (g2 % pi) as usize);
            if v2 + rows[0][j2] as i64 != y1 {
                continue;
            }
            for (qa, qb, ra, rb) in [(a, b, rows[1], rows[2]), (b, a, rows[2], rows[1])] {
                let rho = mod_p((qa * g2 - qb * g1) * inv_mod(qa - qb, pi), pi);
                let mut g3 = rho;
                while g3 < wp {
                    if g3 != g1 && g3 != g2 {
                        let (v3, j3) = (g3 / pi, (g3 % pi) as usize);
                        if v2 + ra[j2] as i64 == v3 + ra[j3] as i64
                            && v1 + rb[j1] as i64 == v3 + rb[j3] as i64
                        {
                            let cnt = window_count(pi, qa, qb, g1, g2, g3) as i64;
                            let vmin = v1.min(v2).min(v3);
                            let vmax = v1.max(v2).max(v3);
                            by_span[(vmax - vmin) as usize] += cnt;
                        }
                    }
                    g3 += pi;
                }
            }
        }
    }
    // Span-e cycles appear once per placement of an e-block window inside
    // the m+1 counting window.
    Ok(by_span
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let places = (w - i) as i64;
            assert!(c % places == 0, "span counts are not translation uniform");
            (c / places) as u64
        })
        .collect())
}

/// Per-span counts for a whole spec: the sum over every row-group triple
/// of its base matrix.
pub fn alc_mu_for_spec(spec: &ScCodeSpec) -> Result<Vec<u64>> {
    let p = spec.base.p;
    let m = spec.memory();
    let groups = &spec.base.row_groups;
    let mut mu = vec![0u64; m + 1];
    for i in 0..groups.len() {
        for j in (i + 1)..groups.len() {
            for k in (j + 1)..groups.len() {
                let labels = [groups[i], groups[j], groups[k]];
                let rows = [
                    spec.spreading.row(i),
                    spec.spreading.row(j),
                    spec.spreading.row(k),
                ];
                for (e, c) in alc_mu_for_triple(p, m, labels, rows)?.iter().enumerate() {
                    mu[e] += c;
                }
            }
        }
    }
    Ok(mu)
}

/// Closed-form census for a coupled spec: totals at its coupling length
/// plus the span decomposition, matching the brute-force oracle exactly.
pub fn alc_report(spec: &ScCodeSpec, convention: Convention) -> Result<CycleReport> {
    let mu = alc_mu_for_spec(spec)?;
    Ok(report_from_mu(
        &mu,
        spec.base.p,
        spec.coupling_len,
        convention,
    ))
}

/// Total 6-cycles of the spec's coupled matrix at its coupling length.
pub fn alc_total(spec: &ScCodeSpec) -> Result<u64> {
    Ok(alc_report(spec, Convention::Cycles)?.total_cycles)
}

/// Total over an uncoupled weight-3 array grid given by labels only (all
/// circulants present), per the single-region shortcut.
pub fn alc_total_uncoupled(p: usize, labels: [usize; 3]) -> Result<u64> {
    let zeros = vec![0u8; p];
    let mu = alc_mu_for_triple(p, 0, labels, [&zeros, &zeros, &zeros])?;
    Ok(mu[0])
}
