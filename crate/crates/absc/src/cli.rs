//! Batch front-end: construct -> count -> optimize -> lift -> simulate,
//! with JSON spec files as the unit of persistence.

use crate::ab::{AbMatrixSpec, Weight3Cover};
use crate::census::{census_report, Convention, CycleReport};
use crate::coupling::{ScCodeSpec, SpreadingMatrix};
use crate::lift::{lift_nested_family, residual_6cycles, search_lift_block};
use crate::optimize::{run_plan, Method, NestedPlan};
use crate::sim::{ber_sweep, results_to_csv, ChannelConfig, DecoderConfig, SimCode, WindowCode};
use crate::{alc, Error, Result};
use clap::{Parser, Subcommand};
use sha2::{Digest, Sha256};
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "absc",
    about = "Nested array-based spatially coupled LDPC code pipeline",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a coupled code spec from array-matrix parameters.
    Construct {
        #[arg(long)]
        gamma: usize,
        #[arg(long)]
        p: usize,
        /// Comma-separated row groups of the (sub-)code.
        #[arg(long, value_delimiter = ',')]
        rows: Vec<usize>,
        /// Syndrome former memory; all spreading entries start at zero.
        #[arg(long, default_value_t = 0)]
        m: usize,
        /// Coupling length (defaults to m + 2).
        #[arg(long)]
        l: Option<usize>,
        #[arg(long)]
        out: PathBuf,
        /// Also export the expanded uncoupled matrix in alist format.
        #[arg(long)]
        alist: Option<PathBuf>,
    },
    /// Count 6-cycles of a spec, by census, line counting, or both.
    Count {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value = "both")]
        method: String,
        /// Exit nonzero when the two methods disagree.
        #[arg(long)]
        check: bool,
        /// Also report the residual census of the stored terminal lift.
        #[arg(long)]
        lifted: bool,
    },
    /// Optimize spreading matrices for a nested family.
    Optimize {
        #[arg(long)]
        gamma: usize,
        #[arg(long)]
        p: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        l: usize,
        #[arg(long, default_value_t = 1)]
        method: u8,
        /// Sub-code row-group sets, semicolon separated ("0,1,2,3;0,1,2,4").
        #[arg(long, default_value = "")]
        subcodes: String,
        /// Optimization order over sub-codes, 1-based ("2,1").
        #[arg(long, default_value = "")]
        order: String,
        #[arg(long, default_value_t = 10_000)]
        lmax: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Search terminal lift shifts for one spec or a nested family.
    Lift {
        /// Spec files, first searched freely, later ones constrained to the
        /// shifts of shared row groups. Updated in place.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        spec: Vec<PathBuf>,
        #[arg(long)]
        j: usize,
        #[arg(long, default_value_t = 100_000)]
        budget: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Monte-Carlo BER/FER evaluation over BPSK/AWGN.
    Simulate {
        #[arg(long)]
        spec: PathBuf,
        /// Comma-separated Eb/N0 points in dB.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        snr: Vec<f64>,
        /// Simulate the matched terminally lifted block code instead of the
        /// coupled code (lift factor J (m + 1), shifts searched here).
        #[arg(long)]
        bc: bool,
        #[arg(long, default_value_t = 20_000)]
        bc_budget: u64,
        /// Window length in symbols (default 4 lifted constraint lengths).
        #[arg(long)]
        window: Option<usize>,
        #[arg(long, default_value_t = 50)]
        iters: usize,
        /// Stop window positions early on a clean window syndrome.
        #[arg(long)]
        early_stop: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1_000_000)]
        max_frames: u64,
        #[arg(long, default_value_t = 0)]
        min_bit_errors: u64,
        #[arg(long, default_value_t = 100)]
        min_frame_errors: u64,
        /// Override the rate used for noise scaling (default: from rank).
        #[arg(long)]
        rate: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
}

pub fn main() -> std::process::ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            std::process::ExitCode::FAILURE
        }
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Construct {
            gamma,
            p,
            rows,
            m,
            l,
            out,
            alist,
        } => cmd_construct(gamma, p, rows, m, l, &out, alist.as_deref()),
        Command::Count {
            spec,
            method,
            check,
            lifted,
        } => cmd_count(&spec, &method, check, lifted),
        Command::Optimize {
            gamma,
            p,
            m,
            l,
            method,
            subcodes,
            order,
            lmax,
            seed,
            out_dir,
        } => cmd_optimize(gamma, p, m, l, method, &subcodes, &order, lmax, seed, &out_dir),
        Command::Lift {
            spec,
            j,
            budget,
            seed,
        } => cmd_lift(&spec, j, budget, seed),
        Command::Simulate {
            spec,
            snr,
            bc,
            bc_budget,
            window,
            iters,
            early_stop,
            seed,
            max_frames,
            min_bit_errors,
            min_frame_errors,
            rate,
            out,
        } => cmd_simulate(SimulateArgs {
            spec,
            snr,
            bc,
            bc_budget,
            window,
            iters,
            early_stop,
            seed,
            max_frames,
            min_bit_errors,
            min_frame_errors,
            rate,
            out,
        }),
    }
}

pub fn load_spec(path: &Path) -> Result<ScCodeSpec> {
    ScCodeSpec::from_json(&fs::read_to_string(path)?)
}

pub fn store_spec(path: &Path, spec: &ScCodeSpec) -> Result<()> {
    fs::write(path, spec.to_json())?;
    Ok(())
}

fn cmd_construct(
    gamma: usize,
    p: usize,
    rows: Vec<usize>,
    m: usize,
    l: Option<usize>,
    out: &Path,
    alist: Option<&Path>,
) -> Result<()> {
    let base = AbMatrixSpec::new(gamma, p, rows)?;
    let l = l.unwrap_or(m + 2);
    let mut b = SpreadingMatrix::zeros(base.omega(), p, m);
    b.fix_all();
    let spec = ScCodeSpec::new(base, b, l, None)?;
    store_spec(out, &spec)?;
    println!(
        "wrote {} (gamma={gamma} p={p} omega={} m={m} L={l})",
        out.display(),
        spec.base.omega()
    );
    if let Some(path) = alist {
        fs::write(path, crate::gf2::to_alist(&spec.base.grid().expand()))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn print_report(tag: &str, r: &CycleReport) {
    println!("[{tag}] total_cycles            = {}", r.total_cycles);
    println!("[{tag}] vn_incidences           = {}", r.vn_incidences);
    println!("[{tag}] mu_by_span              = {:?}", r.per_block_span);
    println!("[{tag}] A_m (cycles)            = {}", r.avg_cycles);
    println!("[{tag}] A_m (vn-incidence)      = {}", r.avg_vn_incidences);
}

fn cmd_count(spec_path: &Path, method: &str, check: bool, lifted: bool) -> Result<()> {
    let spec = load_spec(spec_path)?;
    let mut reports = Vec::new();
    if method == "oracle" || method == "both" {
        let r = census_report(&spec, Convention::VnIncidence);
        print_report("oracle", &r);
        reports.push(r);
    }
    if method == "alc" || method == "both" {
        let r = alc::alc_report(&spec, Convention::VnIncidence)?;
        print_report("alc", &r);
        reports.push(r);
    }
    if reports.is_empty() {
        return Err(Error::Invalid(format!("unknown method {method:?}")));
    }
    if lifted {
        let assign = spec
            .lift
            .clone()
            .ok_or_else(|| Error::Invalid("spec carries no lift".into()))?;
        println!("[lift] residual_6cycles = {}", residual_6cycles(&spec, &assign)?);
    }
    if check && reports.len() == 2 && reports[0].per_block_span != reports[1].per_block_span {
        return Err(Error::Invalid(format!(
            "census {:?} and line counting {:?} disagree",
            reports[0].per_block_span, reports[1].per_block_span
        )));
    }
    Ok(())
}

fn parse_subcodes(s: &str) -> Result<Vec<Vec<usize>>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(';')
        .map(|part| {
            part.split(',')
                .map(|t| {
                    t.trim()
                        .parse::<usize>()
                        .map_err(|_| Error::Invalid(format!("bad row group {t:?}")))
                })
                .collect()
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn cmd_optimize(
    gamma: usize,
    p: usize,
    m: usize,
    l: usize,
    method: u8,
    subcodes: &str,
    order: &str,
    lmax: usize,
    seed: u64,
    out_dir: &Path,
) -> Result<()> {
    let subcode_rows = parse_subcodes(subcodes)?;
    let order: Vec<usize> = if order.trim().is_empty() {
        (0..subcode_rows.len()).collect()
    } else {
        order
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Invalid(format!("bad order entry {t:?}")))
                    .and_then(|x| {
                        x.checked_sub(1)
                            .ok_or_else(|| Error::Invalid("order entries are 1-based".into()))
                    })
            })
            .collect::<Result<_>>()?
    };
    let plan = NestedPlan {
        gamma,
        p,
        memory: m,
        coupling_len: l,
        subcode_rows,
        order,
        method: match method {
            1 => Method::One,
            2 => Method::Two,
            other => return Err(Error::Invalid(format!("method must be 1 or 2, got {other}"))),
        },
        lmax,
        seed,
        covers: Vec::new(),
    };
    let out = run_plan(&plan)?;
    fs::create_dir_all(out_dir)?;
    let mut manifest = Vec::new();
    let global_path = out_dir.join("global.json");
    store_spec(&global_path, &out.global)?;
    manifest.push((global_path, &out.global));
    for (i, spec) in out.nested.iter().enumerate() {
        let path = out_dir.join(format!("sub{}.json", i + 1));
        store_spec(&path, spec)?;
        manifest.push((path, spec));
    }
    let mut csv = String::from("search,iteration,rho\n");
    for t in &out.traces {
        for (i, rho) in t.rho.iter().enumerate() {
            csv.push_str(&format!("{},{},{}\n", t.name, i, rho));
        }
    }
    fs::write(out_dir.join("trace.csv"), csv)?;
    write_manifest(out_dir, &manifest)?;
    for (path, spec) in &manifest {
        let a = alc::alc_report(spec, Convention::Cycles)?;
        println!(
            "{}: rows {:?} mu {:?} A_m {}",
            path.display(),
            spec.base.row_groups,
            a.per_block_span,
            a.avg_cycles
        );
    }
    Ok(())
}

/// Family manifest: spec files plus a checksum of the shared global rows,
/// which later stages verify stay bit-identical across the family.
fn write_manifest(out_dir: &Path, entries: &[(PathBuf, &ScCodeSpec)]) -> Result<()> {
    let shared = shared_rows_checksum(entries.iter().map(|(_, s)| *s));
    let files: Vec<serde_json::Value> = entries
        .iter()
        .map(|(path, spec)| {
            serde_json::json!({
                "file": path.file_name().and_then(|s| s.to_str()).unwrap_or_default(),
                "row_groups": spec.base.row_groups,
            })
        })
        .collect();
    let manifest = serde_json::json!({
        "codes": files,
        "shared_rows_checksum": shared,
    });
    fs::write(
        out_dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest).expect("manifest serializes"),
    )?;
    Ok(())
}

fn shared_rows_checksum<'a>(specs: impl Iterator<Item = &'a ScCodeSpec>) -> String {
    let mut hasher = Sha256::new();
    for spec in specs {
        for (i, &q) in spec.base.row_groups.iter().enumerate() {
            if q < 3 {
                hasher.update([q as u8]);
                hasher.update(spec.spreading.row(i));
            }
        }
    }
    format!("{:x}", hasher.finalize())
}

fn cmd_lift(paths: &[PathBuf], j: usize, budget: u64, seed: u64) -> Result<()> {
    let specs: Vec<ScCodeSpec> = paths.iter().map(|p| load_spec(p)).collect::<Result<_>>()?;
    let outcomes = lift_nested_family(&specs, j, budget, seed)?;
    for ((path, mut spec), outcome) in paths.iter().zip(specs).zip(outcomes) {
        println!(
            "{}: residual {} after {} evaluations",
            path.display(),
            outcome.residual,
            outcome.evaluations
        );
        spec.lift = Some(outcome.assign);
        store_spec(path, &spec)?;
    }
    Ok(())
}

struct SimulateArgs {
    spec: PathBuf,
    snr: Vec<f64>,
    bc: bool,
    bc_budget: u64,
    window: Option<usize>,
    iters: usize,
    early_stop: bool,
    seed: u64,
    max_frames: u64,
    min_bit_errors: u64,
    min_frame_errors: u64,
    rate: Option<f64>,
    out: PathBuf,
}

fn cmd_simulate(args: SimulateArgs) -> Result<()> {
    let spec = load_spec(&args.spec)?;
    let (code, decoder) = if args.bc {
        let j = spec.lift.as_ref().map_or(1, |l| l.j) * (spec.memory() + 1);
        let grid = spec.base.grid();
        let out = search_lift_block(&grid, j, args.bc_budget, args.seed)?;
        println!(
            "block-code lift J'={j}: residual {} after {} evaluations",
            out.residual, out.evaluations
        );
        let h = crate::lift::expand_lifted_block(&grid, &out.assign)?;
        (
            SimCode::Flood(h),
            DecoderConfig {
                max_iterations: args.iters,
                window_symbols: None,
                syndrome_stop: true,
            },
        )
    } else {
        let code = WindowCode::from_spec(&spec)?;
        let window = args
            .window
            .unwrap_or(4 * spec.lifted_constraint_length());
        (
            SimCode::Window(code),
            DecoderConfig {
                max_iterations: args.iters,
                window_symbols: Some(window),
                syndrome_stop: args.early_stop,
            },
        )
    };
    let rate = args.rate.unwrap_or_else(|| code.actual_rate());
    println!(
        "simulating n={} at rate {:.4} over {:?} dB",
        code.block_len(),
        rate,
        args.snr
    );
    let channel = ChannelConfig {
        ebn0_db: args.snr,
        rate,
        seed: args.seed,
        max_frames: args.max_frames,
        min_bit_errors: args.min_bit_errors,
        min_frame_errors: args.min_frame_errors,
    };
    let points = ber_sweep(&code, &channel, &decoder)?;
    let csv = results_to_csv(&points);
    print!("{csv}");
    fs::write(&args.out, csv)?;
    Ok(())
}

/// Explicit-cover variant of the optimize pipeline, used by callers that
/// reproduce published cover choices; the flag surface stays minimal.
pub fn optimize_with_covers(
    plan: &mut NestedPlan,
    covers: Vec<Option<Weight3Cover>>,
) -> Result<crate::optimize::PipelineOutput> {
    plan.covers = covers;
    run_plan(plan)
}
