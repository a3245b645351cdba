//! AWGN Monte-Carlo evaluation: BPSK all-zero transmission, flooding
//! sum-product decoding for block codes, sliding-window decoding for
//! coupled codes, and BER/FER accounting with reproducible per-frame
//! random streams.

use crate::coupling::ScCodeSpec;
use crate::gf2::BinaryMatrix;
use crate::lift::expand_lifted_window;
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Saturation for channel values and messages in the log domain.
pub const LLR_CLIP: f64 = 25.0;

#[derive(Clone, Debug)]
pub struct ChannelConfig {
    pub ebn0_db: Vec<f64>,
    /// Code rate used in the noise scaling.
    pub rate: f64,
    pub seed: u64,
    pub max_frames: u64,
    pub min_bit_errors: u64,
    pub min_frame_errors: u64,
}

#[derive(Clone, Debug)]
pub struct DecoderConfig {
    pub max_iterations: usize,
    /// Window length in symbols for the sliding-window decoder.
    pub window_symbols: Option<usize>,
    pub syndrome_stop: bool,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        DecoderConfig {
            max_iterations: 50,
            window_symbols: None,
            syndrome_stop: true,
        }
    }
}

/// Noise variance per dimension for unit-energy BPSK at the given SNR.
pub fn noise_variance(ebn0_db: f64, rate: f64) -> f64 {
    1.0 / (2.0 * rate * 10f64.powf(ebn0_db / 10.0))
}

/// Channel LLRs for an all-zero codeword over BPSK/AWGN: `2 y / sigma^2`
/// with `y = 1 + noise`, saturated at the working clip.
pub fn transmit_allzero(n: usize, sigma2: f64, rng: &mut impl Rng) -> Vec<f64> {
    if sigma2 <= 0.0 {
        return vec![LLR_CLIP; n];
    }
    let sigma = sigma2.sqrt();
    (0..n)
        .map(|_| {
            let y = 1.0 + sigma * sample_standard_normal(rng);
            (2.0 * y / sigma2).clamp(-LLR_CLIP, LLR_CLIP)
        })
        .collect()
}

/// Box-Muller; two uniforms per sample keeps the stream layout simple and
/// replayable.
fn sample_standard_normal(rng: &mut impl Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

#[derive(Clone, Debug)]
pub struct BpOutcome {
    pub hard: Vec<bool>,
    /// Final total beliefs per variable.
    pub posterior: Vec<f64>,
    pub iterations: usize,
    pub syndrome_ok: bool,
}

/// Flat Tanner graph for the message-passing kernel.
struct BpGraph<'a> {
    h: &'a BinaryMatrix,
    cn_ptr: Vec<usize>,
    edge_vn: Vec<u32>,
}

impl<'a> BpGraph<'a> {
    fn new(h: &'a BinaryMatrix) -> Self {
        let mut cn_ptr = Vec::with_capacity(h.rows() + 1);
        let mut edge_vn = Vec::with_capacity(h.weight());
        cn_ptr.push(0);
        for r in 0..h.rows() {
            edge_vn.extend_from_slice(h.row(r));
            cn_ptr.push(edge_vn.len());
        }
        BpGraph { h, cn_ptr, edge_vn }
    }

    /// Sum-product flooding. Frozen variables keep their channel value as
    /// a constant belief and never update. The stopping syndrome may be
    /// restricted to a row range (the window decoder stops on the checks
    /// that involve its target block).
    fn decode(
        &self,
        llr: &[f64],
        frozen: Option<&[bool]>,
        max_iterations: usize,
        syndrome_stop: bool,
        stop_rows: std::ops::Range<usize>,
    ) -> BpOutcome {
        let n = llr.len();
        let mut msg = vec![0.0f64; self.edge_vn.len()];
        let mut total: Vec<f64> = llr.to_vec();
        let mut hard: Vec<bool> = total.iter().map(|&t| t < 0.0).collect();
        let is_frozen = |v: usize| frozen.is_some_and(|f| f[v]);
        let stop_ok = |hard: &[bool]| {
            stop_rows
                .clone()
                .all(|r| self.h.row(r).iter().fold(false, |acc, &c| acc ^ hard[c as usize]) == false)
        };
        let mut iterations = 0;
        let mut ok = stop_ok(&hard);
        let mut tanh_buf: Vec<f64> = Vec::new();
        while iterations < max_iterations && !(syndrome_stop && ok) {
            iterations += 1;
            // Check-node update from extrinsic variable beliefs.
            for c in 0..self.h.rows() {
                let lo = self.cn_ptr[c];
                let hi = self.cn_ptr[c + 1];
                let deg = hi - lo;
                tanh_buf.clear();
                tanh_buf.extend((lo..hi).map(|e| {
                    let v = self.edge_vn[e] as usize;
                    // Frozen variables are known bits: their belief stays
                    // the saturated channel value, not an extrinsic.
                    let m = if is_frozen(v) {
                        total[v]
                    } else {
                        (total[v] - msg[e]).clamp(-LLR_CLIP, LLR_CLIP)
                    };
                    (m / 2.0).tanh()
                }));
                // Prefix/suffix products give each edge the product of the
                // other edges' terms without dividing.
                let mut suffix = vec![1.0f64; deg + 1];
                for i in (0..deg).rev() {
                    suffix[i] = suffix[i + 1] * tanh_buf[i];
                }
                let mut prefix = 1.0f64;
                for i in 0..deg {
                    let prod = (prefix * suffix[i + 1]).clamp(-0.999_999_999_999, 0.999_999_999_999);
                    msg[lo + i] = (2.0 * prod.atanh()).clamp(-LLR_CLIP, LLR_CLIP);
                    prefix *= tanh_buf[i];
                }
            }
            // Variable-node totals.
            for (v, t) in total.iter_mut().enumerate() {
                *t = llr[v];
            }
            for c in 0..self.h.rows() {
                for e in self.cn_ptr[c]..self.cn_ptr[c + 1] {
                    let v = self.edge_vn[e] as usize;
                    if !is_frozen(v) {
                        total[v] += msg[e];
                    }
                }
            }
            for v in 0..n {
                hard[v] = total[v] < 0.0;
            }
            ok = stop_ok(&hard);
        }
        BpOutcome {
            hard,
            posterior: total,
            iterations,
            syndrome_ok: ok,
        }
    }
}

/// Standard flooding sum-product decoder with a syndrome stopping rule.
pub fn bp_flood(h: &BinaryMatrix, llr: &[f64], cfg: &DecoderConfig) -> Result<BpOutcome> {
    if llr.len() != h.cols() {
        return Err(Error::Invalid("LLR length must match the column count".into()));
    }
    Ok(BpGraph::new(h).decode(llr, None, cfg.max_iterations, cfg.syndrome_stop, 0..h.rows()))
}

/// A lifted coupled code prepared for window decoding: the full-frame
/// parity-check matrix plus its block geometry.
#[derive(Clone)]
pub struct WindowCode {
    pub h: BinaryMatrix,
    /// Symbols per column block (p^2 J).
    pub col_block: usize,
    /// Checks per row block.
    pub row_block: usize,
    pub coupling_len: usize,
    pub memory: usize,
}

impl WindowCode {
    /// Builds the frame matrix of a spec, applying its terminal lift (a
    /// unit lift if none is stored).
    pub fn from_spec(spec: &ScCodeSpec) -> Result<Self> {
        let p = spec.base.p;
        let j = spec.lift.as_ref().map_or(1, |l| l.j);
        let assign = spec.lift.clone().unwrap_or_else(|| {
            crate::coupling::LiftAssignment::zero(&spec.base.grid(), 1, spec.memory() + 1)
        });
        let h = expand_lifted_window(&spec.components(), spec.coupling_len, &assign)?;
        Ok(WindowCode {
            h,
            col_block: p * p * j,
            row_block: spec.base.omega() * p * j,
            coupling_len: spec.coupling_len,
            memory: spec.memory(),
        })
    }

    pub fn frame_len(&self) -> usize {
        self.h.cols()
    }
}

/// Sliding-window decoding: the window covers `W` symbols starting at the
/// target block, plus the already committed blocks its checks reach back
/// into; one block of target symbols is committed per position and the
/// window then shifts one block right and down. Fixed iteration count per
/// position unless `syndrome_stop` asks for the early window check.
pub fn bp_sliding_window(
    code: &WindowCode,
    llr: &[f64],
    cfg: &DecoderConfig,
) -> Result<BpOutcome> {
    let (cb, rb) = (code.col_block, code.row_block);
    let l = code.coupling_len;
    let m = code.memory;
    if llr.len() != code.h.cols() {
        return Err(Error::Invalid("LLR length must match the frame".into()));
    }
    let w_symbols = cfg
        .window_symbols
        .ok_or_else(|| Error::Invalid("window decoding needs a window length".into()))?;
    if w_symbols % cb != 0 {
        return Err(Error::Invalid(format!(
            "window of {w_symbols} symbols is not a whole number of {cb}-symbol blocks"
        )));
    }
    let wb = w_symbols / cb;
    if wb < m + 1 {
        return Err(Error::Invalid(
            "window must cover at least m + 1 column blocks".into(),
        ));
    }
    let mut committed = vec![false; code.h.cols()];
    // Committed symbols re-enter later windows through their posterior
    // beliefs; saturating them instead would let one wrong commitment
    // poison the rest of the chain.
    let mut committed_llr = vec![0.0f64; code.h.cols()];
    let mut iterations = 0;
    for t in 0..l {
        let lo_block = t.saturating_sub(m);
        let hi_block = (t + wb).min(l);
        let col_lo = lo_block * cb;
        let col_hi = hi_block * cb;
        let row_lo = t * rb;
        let row_hi = ((t + wb) * rb).min(code.h.rows());
        // Sub-matrix of the window, with committed columns frozen.
        let entries = (row_lo..row_hi).flat_map(|r| {
            code.h
                .row(r)
                .iter()
                .filter(move |&&c| (c as usize) >= col_lo && (c as usize) < col_hi)
                .map(move |&c| (r - row_lo, c as usize - col_lo))
        });
        let sub = BinaryMatrix::from_entries(
            row_hi - row_lo,
            col_hi - col_lo,
            entries.collect::<Vec<_>>(),
        )?;
        let frozen: Vec<bool> = (col_lo..col_hi).map(|c| c < t * cb).collect();
        let sub_llr: Vec<f64> = (col_lo..col_hi)
            .map(|c| {
                if c < t * cb {
                    committed_llr[c]
                } else {
                    llr[c]
                }
            })
            .collect();
        // Early stopping watches the checks that involve the target
        // block: the first m+1 row blocks of the window.
        let stop_rows = 0..((m + 1) * rb).min(sub.rows());
        let out = BpGraph::new(&sub).decode(
            &sub_llr,
            Some(&frozen),
            cfg.max_iterations,
            cfg.syndrome_stop,
            stop_rows,
        );
        iterations += out.iterations;
        // Commit the target block.
        for c in t * cb..(t + 1) * cb {
            committed[c] = out.hard[c - col_lo];
            committed_llr[c] = out.posterior[c - col_lo].clamp(-LLR_CLIP, LLR_CLIP);
        }
    }
    let ok = code.h.syndrome_ok(&committed);
    Ok(BpOutcome {
        hard: committed,
        posterior: committed_llr,
        iterations,
        syndrome_ok: ok,
    })
}

/// One decodable code for the sweep driver.
pub enum SimCode {
    Flood(BinaryMatrix),
    Window(WindowCode),
}

impl SimCode {
    pub fn block_len(&self) -> usize {
        match self {
            SimCode::Flood(h) => h.cols(),
            SimCode::Window(c) => c.frame_len(),
        }
    }

    fn decode(&self, llr: &[f64], cfg: &DecoderConfig) -> Result<BpOutcome> {
        match self {
            SimCode::Flood(h) => bp_flood(h, llr, cfg),
            SimCode::Window(c) => bp_sliding_window(c, llr, cfg),
        }
    }

    /// Design rate from the GF(2) rank of the parity-check matrix.
    pub fn actual_rate(&self) -> f64 {
        let h = match self {
            SimCode::Flood(h) => h,
            SimCode::Window(c) => &c.h,
        };
        let rank = crate::gf2::rank_gf2(h);
        (h.cols() - rank) as f64 / h.cols() as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SnrPoint {
    pub snr_db: f64,
    pub frames: u64,
    pub bit_errors: u64,
    pub frame_errors: u64,
    pub ber: f64,
    pub fer: f64,
    pub ci95: f64,
}

fn frame_seed(seed: u64, snr_idx: usize, frame: u64) -> u64 {
    let mut h = seed ^ 0x517c_c1b7_2722_0a95;
    for x in [snr_idx as u64, frame] {
        h ^= x;
        h = h.wrapping_mul(0x5de4_93af_f749_1049);
        h ^= h >> 29;
    }
    h
}

/// Monte-Carlo BER/FER sweep. Frames are simulated in fixed-size chunks
/// with per-frame seeded streams and stop checks at chunk boundaries, so
/// the result is independent of thread scheduling.
pub fn ber_sweep(
    code: &SimCode,
    channel: &ChannelConfig,
    decoder: &DecoderConfig,
) -> Result<Vec<SnrPoint>> {
    let n = code.block_len();
    let mut points = Vec::new();
    for (si, &snr) in channel.ebn0_db.iter().enumerate() {
        let sigma2 = noise_variance(snr, channel.rate);
        let (mut frames, mut bit_errors, mut frame_errors) = (0u64, 0u64, 0u64);
        const CHUNK: u64 = 32;
        while frames < channel.max_frames
            && (bit_errors < channel.min_bit_errors || frame_errors < channel.min_frame_errors)
        {
            let batch = CHUNK.min(channel.max_frames - frames);
            let results: Vec<Result<(u64, u64)>> = (frames..frames + batch)
                .into_par_iter()
                .map(|f| {
                    let mut rng = ChaCha8Rng::seed_from_u64(frame_seed(channel.seed, si, f));
                    let llr = transmit_allzero(n, sigma2, &mut rng);
                    let out = code.decode(&llr, decoder)?;
                    let errs = out.hard.iter().filter(|&&b| b).count() as u64;
                    Ok((errs, (errs > 0) as u64))
                })
                .collect();
            for r in results {
                let (be, fe) = r?;
                bit_errors += be;
                frame_errors += fe;
            }
            frames += batch;
        }
        let bits = frames * n as u64;
        let ber = bit_errors as f64 / bits as f64;
        points.push(SnrPoint {
            snr_db: snr,
            frames,
            bit_errors,
            frame_errors,
            ber,
            fer: frame_errors as f64 / frames as f64,
            ci95: 1.96 * (ber * (1.0 - ber) / bits as f64).sqrt(),
        });
    }
    Ok(points)
}

/// Results table in the pipeline's CSV layout.
pub fn results_to_csv(points: &[SnrPoint]) -> String {
    let mut out = String::from("snr_db,frames,bit_errors,frame_errors,ber,fer,ci95\n");
    for p in points {
        out.push_str(&format!(
            "{},{},{},{},{:e},{:e},{:e}\n",
            p.snr_db, p.frames, p.bit_errors, p.frame_errors, p.ber, p.fer, p.ci95
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ab::{build_ab, AbMatrixSpec};
    use crate::coupling::{LiftAssignment, SpreadingMatrix};

    #[test]
    fn llr_statistics() {
        let sigma2 = 1.0;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 100_000;
        let llrs = transmit_allzero(n, sigma2, &mut rng);
        let mean = llrs.iter().sum::<f64>() / n as f64;
        // mean 2/sigma^2, std 2/sigma per sample.
        let se = (2.0 / sigma2.sqrt()) / (n as f64).sqrt();
        assert!((mean - 2.0).abs() < 3.0 * se, "mean {mean}");
    }

    #[test]
    fn llr_replay_determinism() {
        let a = transmit_allzero(64, 0.5, &mut ChaCha8Rng::seed_from_u64(7));
        let b = transmit_allzero(64, 0.5, &mut ChaCha8Rng::seed_from_u64(7));
        assert_eq!(a, b);
    }

    #[test]
    fn noiseless_limit_decodes_immediately() {
        let h = build_ab(3, 5).unwrap().expand();
        let llr = transmit_allzero(h.cols(), 0.0, &mut ChaCha8Rng::seed_from_u64(0));
        assert!(llr.iter().all(|&x| x == LLR_CLIP));
        let out = bp_flood(&h, &llr, &DecoderConfig::default()).unwrap();
        assert!(out.syndrome_ok);
        assert_eq!(out.iterations, 0);
        assert!(out.hard.iter().all(|&b| !b));
    }

    #[test]
    fn corrects_single_flipped_bit() {
        let h = build_ab(3, 5).unwrap().expand();
        let mut llr = vec![10.0; h.cols()];
        llr[7] = -10.0;
        let out = bp_flood(&h, &llr, &DecoderConfig::default()).unwrap();
        assert!(out.syndrome_ok);
        assert!(out.hard.iter().all(|&b| !b));
    }

    #[test]
    fn syndrome_claim_is_verified() {
        let h = build_ab(3, 5).unwrap().expand();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let llr = transmit_allzero(h.cols(), 1.2, &mut rng);
            let out = bp_flood(&h, &llr, &DecoderConfig::default()).unwrap();
            assert_eq!(out.syndrome_ok, h.syndrome_ok(&out.hard));
        }
    }

    fn small_window_code() -> WindowCode {
        let base = AbMatrixSpec::new(3, 5, vec![0, 1, 2]).unwrap();
        let b = SpreadingMatrix::from_rows(
            &[vec![1, 0, 0, 0, 1], vec![1, 1, 1, 0, 0], vec![0, 0, 1, 1, 0]],
            1,
        )
        .unwrap();
        let grid = base.grid();
        let spec = ScCodeSpec::new(
            base,
            b,
            6,
            Some(LiftAssignment::zero(&grid, 2, 2)),
        )
        .unwrap();
        WindowCode::from_spec(&spec).unwrap()
    }

    #[test]
    fn window_decoder_noiseless() {
        let code = small_window_code();
        let llr = vec![LLR_CLIP; code.frame_len()];
        let cfg = DecoderConfig {
            window_symbols: Some(4 * code.col_block),
            ..DecoderConfig::default()
        };
        let out = bp_sliding_window(&code, &llr, &cfg).unwrap();
        assert!(out.syndrome_ok);
        assert!(out.hard.iter().all(|&b| !b));
    }

    #[test]
    fn window_decoder_validates_window() {
        let code = small_window_code();
        let llr = vec![LLR_CLIP; code.frame_len()];
        let cfg = DecoderConfig {
            window_symbols: Some(code.col_block + 1),
            ..DecoderConfig::default()
        };
        assert!(bp_sliding_window(&code, &llr, &cfg).is_err());
        let cfg = DecoderConfig {
            window_symbols: Some(code.col_block),
            ..DecoderConfig::default()
        };
        assert!(bp_sliding_window(&code, &llr, &cfg).is_err());
    }

    #[test]
    fn window_decoder_corrects_noise_at_high_snr() {
        let code = small_window_code();
        let sigma2 = noise_variance(6.0, 0.5);
        let cfg = DecoderConfig {
            window_symbols: Some(4 * code.col_block),
            ..DecoderConfig::default()
        };
        let mut decoded_all = 0;
        for seed in 0..5 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let llr = transmit_allzero(code.frame_len(), sigma2, &mut rng);
            let out = bp_sliding_window(&code, &llr, &cfg).unwrap();
            decoded_all += out.hard.iter().all(|&b| !b) as usize;
        }
        assert!(decoded_all >= 4, "window decoder failing at high SNR");
    }

    #[test]
    fn sweep_is_deterministic_and_ordered() {
        let h = build_ab(3, 5).unwrap().expand();
        let channel = ChannelConfig {
            ebn0_db: vec![0.0, 6.0],
            rate: 0.5,
            seed: 9,
            max_frames: 400,
            min_bit_errors: 1,
            min_frame_errors: 1,
        };
        let code = SimCode::Flood(h);
        let a = ber_sweep(&code, &channel, &DecoderConfig::default()).unwrap();
        let b = ber_sweep(&code, &channel, &DecoderConfig::default()).unwrap();
        assert_eq!(a, b);
        assert!(a[0].ber > a[1].ber, "{} vs {}", a[0].ber, a[1].ber);
        let csv = results_to_csv(&a);
        assert!(csv.starts_with("snr_db,frames,bit_errors,frame_errors,ber,fer,ci95\n"));
        assert_eq!(csv.lines().count(), 3);
    }

    #[test]
    fn uncoded_bpsk_matches_q_function() {
        // Hard-decision BER of uncoded BPSK: Q(sqrt(2 Eb/N0)).
        let ebn0_db = 2.0;
        let sigma2 = noise_variance(ebn0_db, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 200_000usize;
        let errs = transmit_allzero(n, sigma2, &mut rng)
            .iter()
            .filter(|&&l| l < 0.0)
            .count() as f64;
        let ber = errs / n as f64;
        // Q(1/sigma) with 1/sigma = sqrt(2 Eb/N0) at rate 1.
        let q_direct = 0.5 * statrs::function::erf::erfc(1.0 / sigma2.sqrt() / 2f64.sqrt());
        let se = (q_direct * (1.0 - q_direct) / n as f64).sqrt();
        assert!((ber - q_direct).abs() < 3.0 * se, "ber {ber} vs {q_direct}");
    }
}
