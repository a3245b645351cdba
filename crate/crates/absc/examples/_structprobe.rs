use absc::optimize::{run_method1, Method, NestedPlan};
use absc::sim::*;
use rand::SeedableRng;

fn main() {
    let (p, m, l) = (7usize, 2usize, 20usize);
    let plan = NestedPlan {
        gamma: 3, p, memory: m, coupling_len: l,
        subcode_rows: vec![], order: vec![], method: Method::One,
        lmax: 10_000, seed: 0, covers: vec![],
    };
    let out = run_method1(&plan).unwrap();
    let spec = out.global;
    println!("B = {:?}", spec.spreading.to_rows());
    let h = absc::coupling::assemble_sc(&spec.components(), l).unwrap().expand();
    // CN degree histogram.
    let mut hist = std::collections::BTreeMap::new();
    for r in 0..h.rows() { *hist.entry(h.row_weight(r)).or_insert(0usize) += 1; }
    println!("CN degree histogram: {hist:?}");
    // Flooding failures: error position histogram by column block.
    let rate = SimCode::Flood(h.clone()).actual_rate();
    println!("rate {rate:.4}, n {}", h.cols());
    let sigma2 = noise_variance(2.5, rate);
    let cfg = DecoderConfig::default();
    let mut block_err = vec![0u64; l];
    let mut fails = 0;
    for f in 0..400u64 {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(f);
        let llr = transmit_allzero(h.cols(), sigma2, &mut rng);
        let out = bp_flood(&h, &llr, &cfg).unwrap();
        if out.hard.iter().any(|&b| b) {
            fails += 1;
            for (c, &b) in out.hard.iter().enumerate() {
                if b { block_err[c / (p * p)] += 1; }
            }
        }
    }
    println!("fails {fails}/400; errors by column block: {block_err:?}");
}
