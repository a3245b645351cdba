use absc::optimize::{run_method1, Method, NestedPlan};
use absc::sim::*;

fn main() {
    let (p, m, l) = (7usize, 2usize, 20usize);
    let plan = NestedPlan {
        gamma: 3, p, memory: m, coupling_len: l,
        subcode_rows: vec![], order: vec![], method: Method::One,
        lmax: 10_000, seed: 0, covers: vec![],
    };
    let spec = run_method1(&plan).unwrap().global;
    let h = absc::coupling::assemble_sc(&spec.components(), l).unwrap().expand();
    let rate = SimCode::Flood(h.clone()).actual_rate();
    let code = SimCode::Flood(h);
    for iters in [50usize, 200, 1000] {
        let cfg = DecoderConfig { max_iterations: iters, window_symbols: None, syndrome_stop: true };
        let ch = ChannelConfig { ebn0_db: vec![2.0], rate, seed: 5, max_frames: 300, min_bit_errors: 0, min_frame_errors: 25 };
        let t = std::time::Instant::now();
        let pts = ber_sweep(&code, &ch, &cfg).unwrap();
        println!("flood iters={iters}: frames={} fe={} ber={:.3e} fer={:.3e} ({:?})", pts[0].frames, pts[0].frame_errors, pts[0].ber, pts[0].fer, t.elapsed());
    }
}
