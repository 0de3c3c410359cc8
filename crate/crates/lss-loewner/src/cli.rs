//! Command-line pipeline: sample, reduce, simulate, compare, validate.
//!
//! Every command is deterministic given its inputs and `--seed`; output files
//! are written atomically (temp file + rename) into `--out`.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::formats;
use crate::loewner::{self, LoewnerData};
use crate::lss::{LssModel, SwitchingSignal};
use crate::reduction::{self, RankSpec, ReductionReport};
use crate::sim::{self, InputSignal};
use crate::transfer;
use crate::tuples::{GammaSet, ThetaSet};

#[derive(Debug, Parser)]
#[command(
    name = "lss-mor",
    about = "Loewner-framework model reduction for linear switched systems",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a model file against the structural invariants.
    Validate {
        #[arg(long)]
        model: PathBuf,
    },
    /// Evaluate the transfer-function samples a tuple grid needs.
    Sample(SampleArgs),
    /// Build a reduced-order model (Loewner or balanced truncation).
    Reduce(ReduceArgs),
    /// Integrate a switched system and export the trajectory.
    Simulate(SimulateArgs),
    /// Compare a reference model against one or more reduced models.
    Compare(CompareArgs),
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Tuple-spec JSON; omit to generate a grid instead.
    #[arg(long)]
    pub tuples: Option<PathBuf>,
    #[command(flatten)]
    pub generate: GenerateArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Grid layout: `two-mode:M1,M2,...`, `two-mode:SIZExCOUNT` or `cyclic:DEPTH`.
    #[arg(long = "gen-layout")]
    pub layout: Option<String>,
    /// Point range LO,HI (magnitudes).
    #[arg(long = "gen-range", default_value = "0.01,100")]
    pub range: String,
    /// Point distribution over the range.
    #[arg(long = "gen-dist", default_value = "log", value_parser = ["log", "linear"])]
    pub dist: String,
    /// Place points on the imaginary axis in conjugate-closed pairs
    /// (duplicates each two-mode group).
    #[arg(long = "gen-conjugate", default_value_t = false)]
    pub conjugate: bool,
}

#[derive(Debug, Args)]
pub struct ReduceArgs {
    /// Source model JSON (sampled internally when given).
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Sample CSV produced by `sample`; alternative to --model.
    #[arg(long)]
    pub samples: Option<PathBuf>,
    #[arg(long)]
    pub tuples: PathBuf,
    #[arg(long, default_value = "loewner", value_parser = ["loewner", "bt"])]
    pub method: String,
    /// Relative SVD truncation tolerance, in (0, 1).
    #[arg(long)]
    pub tol: Option<f64>,
    /// Per-mode rank overrides, e.g. `1=2,2=2`.
    #[arg(long)]
    pub rank: Option<String>,
    /// Square exact realization instead of SVD truncation.
    #[arg(long, default_value_t = false)]
    pub exact: bool,
    /// Apply the conjugate-pair transform before realization.
    #[arg(long, default_value_t = false)]
    pub realify: bool,
    /// Target order for --method bt.
    #[arg(long)]
    pub order: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Switching signal: `Q1:DUR1,Q2:DUR2,...` or `random:T,N`.
    #[arg(long)]
    pub signal: String,
    /// Input: `zero`, `step:A` or `sin:A,F`.
    #[arg(long, default_value = "zero")]
    pub input: String,
    /// Integrator step bound.
    #[arg(long, default_value_t = 1e-3)]
    pub step: f64,
    /// Also export per-mode frequency responses on this grid: `log:LO,HI,N` or `lin:LO,HI,N`.
    #[arg(long)]
    pub freq: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Reference model.
    #[arg(long)]
    pub model: PathBuf,
    /// Candidate model(s); repeat for three-way runs.
    #[arg(long = "against", required = true)]
    pub against: Vec<PathBuf>,
    #[arg(long)]
    pub signal: String,
    #[arg(long, default_value = "sin:1,0.5")]
    pub input: String,
    #[arg(long, default_value_t = 1e-3)]
    pub step: f64,
    /// Frequency grid: `log:LO,HI,N` or `lin:LO,HI,N`.
    #[arg(long, default_value = "log:0.01,100,100")]
    pub omega: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))
}

fn load_model(path: &Path) -> Result<LssModel> {
    formats::model_from_json(&read_file(path)?)
}

/// `Q1:DUR1,Q2:DUR2,...` or `random:T,N` (N dwell intervals over [0, T],
/// switch times uniform, modes cycling 1..D).
pub fn parse_signal(spec: &str, num_modes: usize, seed: u64) -> Result<SwitchingSignal> {
    if let Some(rest) = spec.strip_prefix("random:") {
        let parts: Vec<&str> = rest.split(',').collect();
        if parts.len() != 2 {
            return Err(Error::InvalidInput(format!("random signal wants T,N, got {rest:?}")));
        }
        let total: f64 = parts[0]
            .parse()
            .map_err(|_| Error::InvalidInput(format!("bad total time {:?}", parts[0])))?;
        let n: usize = parts[1]
            .parse()
            .map_err(|_| Error::InvalidInput(format!("bad event count {:?}", parts[1])))?;
        if total.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) || n == 0 {
            return Err(Error::InvalidInput("random signal needs T > 0 and N >= 1".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut cuts: Vec<f64> = (0..n - 1).map(|_| rng.random::<f64>() * total).collect();
        cuts.sort_by(f64::total_cmp);
        let mut events = Vec::with_capacity(n);
        let mut prev = 0.0;
        for (i, cut) in cuts.iter().chain(std::iter::once(&total)).enumerate() {
            let dur = (cut - prev).max(1e-9 * total);
            events.push((i % num_modes + 1, dur));
            prev = *cut;
        }
        return SwitchingSignal::new(events);
    }
    let mut events = Vec::new();
    for part in spec.split(',') {
        let (q, dur) = part
            .split_once(':')
            .ok_or_else(|| Error::InvalidInput(format!("bad signal event {part:?}; want MODE:DURATION")))?;
        let q: usize = q
            .trim()
            .parse()
            .map_err(|_| Error::InvalidInput(format!("bad mode {q:?}")))?;
        let dur: f64 = dur
            .trim()
            .parse()
            .map_err(|_| Error::InvalidInput(format!("bad duration {dur:?}")))?;
        events.push((q, dur));
    }
    let signal = SwitchingSignal::new(events)?;
    if signal.max_mode() > num_modes {
        return Err(Error::InvalidSignal {
            reason: format!("signal uses mode {} but the model has {num_modes}", signal.max_mode()),
        });
    }
    Ok(signal)
}

/// `log:LO,HI,N` or `lin:LO,HI,N`.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let (kind, rest) = spec
        .split_once(':')
        .ok_or_else(|| Error::InvalidInput(format!("bad grid {spec:?}; want log:LO,HI,N")))?;
    let parts: Vec<&str> = rest.split(',').collect();
    if parts.len() != 3 {
        return Err(Error::InvalidInput(format!("bad grid {spec:?}; want KIND:LO,HI,N")));
    }
    let lo: f64 = parts[0].parse().map_err(|_| Error::InvalidInput(format!("bad grid lo {:?}", parts[0])))?;
    let hi: f64 = parts[1].parse().map_err(|_| Error::InvalidInput(format!("bad grid hi {:?}", parts[1])))?;
    let n: usize = parts[2].parse().map_err(|_| Error::InvalidInput(format!("bad grid count {:?}", parts[2])))?;
    if n < 2 || hi.partial_cmp(&lo) != Some(std::cmp::Ordering::Greater) {
        return Err(Error::InvalidInput("grid needs HI > LO and N >= 2".into()));
    }
    match kind {
        "lin" => Ok((0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()),
        "log" => {
            if lo <= 0.0 {
                return Err(Error::InvalidInput("log grid needs LO > 0".into()));
            }
            let (llo, lhi) = (lo.ln(), hi.ln());
            Ok((0..n).map(|i| (llo + (lhi - llo) * i as f64 / (n - 1) as f64).exp()).collect())
        }
        other => Err(Error::InvalidInput(format!("unknown grid kind {other:?}"))),
    }
}

/// `1=2,2=3` per-mode rank overrides.
pub fn parse_ranks(spec: &str, num_modes: usize) -> Result<Vec<usize>> {
    let mut ranks = vec![None; num_modes];
    for part in spec.split(',') {
        let (q, r) = part
            .split_once('=')
            .ok_or_else(|| Error::InvalidInput(format!("bad rank entry {part:?}; want MODE=RANK")))?;
        let q: usize = q.trim().parse().map_err(|_| Error::InvalidInput(format!("bad mode {q:?}")))?;
        let r: usize = r.trim().parse().map_err(|_| Error::InvalidInput(format!("bad rank {r:?}")))?;
        if q == 0 || q > num_modes {
            return Err(Error::InvalidInput(format!("rank override for mode {q} out of range")));
        }
        ranks[q - 1] = Some(r);
    }
    ranks
        .into_iter()
        .enumerate()
        .map(|(i, r)| r.ok_or_else(|| Error::InvalidInput(format!("no rank given for mode {}", i + 1))))
        .collect()
}

fn check_tol(tol: f64) -> Result<f64> {
    if tol > 0.0 && tol < 1.0 {
        Ok(tol)
    } else {
        Err(Error::InvalidInput(format!("tolerance must lie in (0, 1), got {tol}")))
    }
}

/// Layout string -> (two-mode groups | cyclic depth).
enum LayoutChoice {
    TwoMode(Vec<usize>),
    Cyclic(usize),
}

fn parse_layout(spec: &str) -> Result<LayoutChoice> {
    if let Some(rest) = spec.strip_prefix("two-mode:") {
        if let Some((size, count)) = rest.split_once('x') {
            let size: usize = size.trim().parse().map_err(|_| Error::InvalidInput(format!("bad group size {size:?}")))?;
            let count: usize = count.trim().parse().map_err(|_| Error::InvalidInput(format!("bad group count {count:?}")))?;
            if size == 0 || count == 0 {
                return Err(Error::InvalidInput("layout sizes must be positive".into()));
            }
            return Ok(LayoutChoice::TwoMode(vec![size; count]));
        }
        let groups: Vec<usize> = rest
            .split(',')
            .map(|s| s.trim().parse().map_err(|_| Error::InvalidInput(format!("bad group size {s:?}"))))
            .collect::<Result<_>>()?;
        if groups.is_empty() || groups.contains(&0) {
            return Err(Error::InvalidInput("layout groups must be positive".into()));
        }
        return Ok(LayoutChoice::TwoMode(groups));
    }
    if let Some(rest) = spec.strip_prefix("cyclic:") {
        let depth: usize = rest.trim().parse().map_err(|_| Error::InvalidInput(format!("bad depth {rest:?}")))?;
        if depth == 0 {
            return Err(Error::InvalidInput("cyclic depth must be positive".into()));
        }
        return Ok(LayoutChoice::Cyclic(depth));
    }
    Err(Error::InvalidInput(format!(
        "unknown layout {spec:?}; want two-mode:M1,M2,..., two-mode:SIZExCOUNT or cyclic:DEPTH"
    )))
}

/// Builds a tuple spec from generator parameters.
pub fn generate_tuple_spec(gen: &GenerateArgs, num_modes: usize) -> Result<formats::TupleSpec> {
    let layout_str = gen
        .layout
        .as_deref()
        .ok_or_else(|| Error::InvalidInput("no interpolation points: give --tuples or --gen-layout".into()))?;
    let (lo, hi) = gen
        .range
        .split_once(',')
        .ok_or_else(|| Error::InvalidInput(format!("bad range {:?}; want LO,HI", gen.range)))?;
    let lo: f64 = lo.trim().parse().map_err(|_| Error::InvalidInput(format!("bad range low {lo:?}")))?;
    let hi: f64 = hi.trim().parse().map_err(|_| Error::InvalidInput(format!("bad range high {hi:?}")))?;
    if hi.partial_cmp(&lo) != Some(std::cmp::Ordering::Greater) || (gen.dist == "log" && lo <= 0.0) {
        return Err(Error::InvalidInput(format!("bad range {lo}..{hi} for {} spacing", gen.dist)));
    }
    let grid = |n: usize| -> Vec<f64> {
        if n == 1 {
            return vec![lo];
        }
        (0..n)
            .map(|i| {
                let f = i as f64 / (n - 1) as f64;
                if gen.dist == "log" { (lo.ln() + (hi.ln() - lo.ln()) * f).exp() } else { lo + (hi - lo) * f }
            })
            .collect()
    };
    let (right_count, left_count, layout) = match parse_layout(layout_str)? {
        LayoutChoice::TwoMode(groups) => {
            if num_modes != 2 {
                return Err(Error::InvalidInput(format!(
                    "two-mode layout needs a two-mode model, got {num_modes}"
                )));
            }
            let total: usize = 2 * groups.iter().sum::<usize>();
            (total, total, groups)
        }
        LayoutChoice::Cyclic(depth) => {
            if gen.conjugate {
                return Err(Error::InvalidInput(
                    "conjugate grids need the two-mode layout (paired groups)".into(),
                ));
            }
            let total = num_modes * depth;
            return Ok(formats::TupleSpec {
                right: split_grid(&grid(2 * total), true).into_iter().map(|x| [x, 0.0]).collect(),
                left: split_grid(&grid(2 * total), false).into_iter().map(|x| [x, 0.0]).collect(),
                layout: formats::TupleLayout::Cyclic { depth },
            });
        }
    };
    if gen.conjugate {
        // base points on the positive imaginary axis, each group duplicated
        // with its elementwise conjugate
        let base = grid(right_count + left_count);
        let right_base = split_grid(&base, true);
        let left_base = split_grid(&base, false);
        let mut right = Vec::with_capacity(2 * right_count);
        let mut left = Vec::with_capacity(2 * left_count);
        let mut doubled = Vec::with_capacity(2 * layout.len());
        let mut r_off = 0;
        let mut l_off = 0;
        for &m in &layout {
            let rb = &right_base[r_off..r_off + 2 * m];
            let lb = &left_base[l_off..l_off + 2 * m];
            right.extend(rb.iter().map(|&w| [0.0, w]));
            right.extend(rb.iter().map(|&w| [0.0, -w]));
            left.extend(lb.iter().map(|&w| [0.0, w]));
            left.extend(lb.iter().map(|&w| [0.0, -w]));
            doubled.push(m);
            doubled.push(m);
            r_off += 2 * m;
            l_off += 2 * m;
        }
        return Ok(formats::TupleSpec {
            right,
            left,
            layout: formats::TupleLayout::TwoMode { groups: doubled, groups_left: None },
        });
    }
    let base = grid(right_count + left_count);
    Ok(formats::TupleSpec {
        right: split_grid(&base, true).into_iter().map(|x| [x, 0.0]).collect(),
        left: split_grid(&base, false).into_iter().map(|x| [x, 0.0]).collect(),
        layout: formats::TupleLayout::TwoMode { groups: layout, groups_left: None },
    })
}

/// Even (right) / odd (left) interleave keeps the two halves disjoint and
/// both spread over the whole range.
fn split_grid(grid: &[f64], even: bool) -> Vec<f64> {
    grid.iter()
        .enumerate()
        .filter(|(i, _)| (i % 2 == 0) == even)
        .map(|(_, &x)| x)
        .collect()
}

fn tuples_for(args_tuples: Option<&Path>, gen: &GenerateArgs, model: &LssModel) -> Result<(formats::TupleSpec, GammaSet, ThetaSet)> {
    let spec = match args_tuples {
        Some(path) => formats::tuple_spec_from_json(&read_file(path)?)?,
        None => generate_tuple_spec(gen, model.num_modes())?,
    };
    let (g, t) = formats::build_tuples(&spec)?;
    Ok((spec, g, t))
}

pub fn cmd_validate(model_path: &Path) -> Result<Vec<String>> {
    let model = formats::model_from_json_unchecked(&read_file(model_path)?)?;
    Ok(model.validate().iter().map(|v| v.to_string()).collect())
}

pub fn cmd_sample(args: &SampleArgs) -> Result<()> {
    let model = load_model(&args.model)?;
    let (spec, gamma, theta) = tuples_for(args.tuples.as_deref(), &args.generate, &model)?;
    let samples = transfer::sample_for_loewner(&model, &gamma, &theta)?;
    formats::write_atomic(&args.out.join("samples.csv"), &formats::samples_to_csv(&samples))?;
    formats::write_atomic(&args.out.join("tuples.json"), &formats::tuple_spec_to_json(&spec))?;
    Ok(())
}

fn svd_report_for(data: &LoewnerData) -> ReductionReport {
    // diagnostics for the exact path: full-rank view of the pencils
    let modes = (1..=data.num_modes)
        .map(|q| {
            let lm = data.loewner[q - 1].map(|v| v.re);
            let sv: Vec<f64> = lm.svd(false, false).singular_values.iter().copied().collect();
            crate::reduction::ModeReduction {
                mode: q,
                rank: sv.len(),
                largest_neglected: 0.0,
                singular_values: sv,
            }
        })
        .collect();
    ReductionReport { tolerance: None, modes }
}

pub fn cmd_reduce(args: &ReduceArgs) -> Result<()> {
    if args.method == "bt" {
        let model_path = args
            .model
            .as_ref()
            .ok_or_else(|| Error::InvalidInput("balanced truncation needs --model".into()))?;
        let model = load_model(model_path)?;
        let order = match (args.order, &args.rank) {
            (Some(r), _) => r,
            // accept the --rank vocabulary too: a bare order or a uniform
            // MODE=RANK list (balanced truncation uses one global basis)
            (None, Some(spec)) => match spec.parse::<usize>() {
                Ok(r) => r,
                Err(_) => {
                    let ranks = parse_ranks(spec, model.num_modes())?;
                    let first = ranks[0];
                    if ranks.iter().any(|&r| r != first) {
                        return Err(Error::InvalidInput(
                            "balanced truncation projects all modes with one basis; ranks must agree".into(),
                        ));
                    }
                    first
                }
            },
            (None, None) => {
                return Err(Error::InvalidInput("balanced truncation needs --order or --rank".into()))
            }
        };
        let (reduced, report) = crate::bt::bt_reduce(&model, order)?;
        formats::write_atomic(&args.out.join("reduced_model.json"), &formats::model_to_json(&reduced))?;
        formats::write_atomic(&args.out.join("bt_report.json"), &formats::bt_report_to_json(&report))?;
        return Ok(());
    }

    let tuple_spec = formats::tuple_spec_from_json(&read_file(&args.tuples)?)?;
    let (gamma, theta) = formats::build_tuples(&tuple_spec)?;
    let mut data = match (&args.model, &args.samples) {
        (Some(path), None) => {
            let model = load_model(path)?;
            loewner::from_state(&model, &gamma, &theta)?
        }
        (None, Some(path)) => {
            let samples = formats::samples_from_csv(&read_file(path)?)?;
            loewner::from_samples(&samples, &gamma, &theta)?
        }
        (Some(_), Some(_)) => {
            return Err(Error::InvalidInput("give either --model or --samples, not both".into()))
        }
        (None, None) => return Err(Error::InvalidInput("reduce needs --model or --samples".into())),
    };
    if args.realify {
        data = reduction::realify(&data)?;
    }
    let (reduced, report) = if args.exact {
        (reduction::exact_realization(&data)?, svd_report_for(&data))
    } else {
        let spec = match (&args.rank, args.tol) {
            (Some(ranks), _) => RankSpec::PerMode(parse_ranks(ranks, data.num_modes)?),
            (None, Some(tol)) => RankSpec::Tolerance(check_tol(tol)?),
            (None, None) => RankSpec::Tolerance(reduction::DEFAULT_SVD_TOL),
        };
        reduction::svd_truncate(&data, spec)?
    };
    formats::write_atomic(&args.out.join("reduced_model.json"), &formats::model_to_json(&reduced))?;
    formats::write_atomic(
        &args.out.join("reduction_report.json"),
        &formats::reduction_report_to_json(&report),
    )?;
    formats::write_atomic(
        &args.out.join("singular_values.csv"),
        &formats::singular_values_to_csv(&report),
    )?;
    formats::write_atomic(&args.out.join("loewner_data.json"), &formats::loewner_data_to_json(&data))?;
    Ok(())
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let model = load_model(&args.model)?;
    let signal = parse_signal(&args.signal, model.num_modes(), args.seed)?;
    let input = InputSignal::parse(&args.input)?;
    let traj = sim::simulate(&model, &signal, &|t| input.eval(t), args.step)?;
    formats::write_atomic(&args.out.join("trajectory.csv"), &formats::trajectory_to_csv(&traj))?;
    if let Some(freq_spec) = &args.freq {
        let omega = parse_grid(freq_spec)?;
        let resp = sim::freq_response(&model, &omega)?;
        for q in 1..=model.num_modes() {
            formats::write_atomic(
                &args.out.join(format!("freq_mode{q}.csv")),
                &formats::freq_response_to_csv(&resp, q),
            )?;
        }
    }
    Ok(())
}

pub fn cmd_compare(args: &CompareArgs) -> Result<()> {
    let reference = load_model(&args.model)?;
    let signal = parse_signal(&args.signal, reference.num_modes(), args.seed)?;
    let input = InputSignal::parse(&args.input)?;
    let omega = parse_grid(&args.omega)?;
    let mut summaries = Vec::new();
    let mut combined_time: Option<(Vec<f64>, Vec<Vec<f64>>)> = None;
    for (idx, path) in args.against.iter().enumerate() {
        let candidate = load_model(path)?;
        let metrics = sim::compare(&reference, &candidate, &signal, &|t| input.eval(t), &omega, args.step)?;
        let tag = idx + 1;
        formats::write_atomic(
            &args.out.join(format!("freq_errors_{tag}.csv")),
            &formats::freq_errors_to_csv(&metrics),
        )?;
        formats::write_atomic(
            &args.out.join(format!("time_errors_{tag}.csv")),
            &formats::time_errors_to_csv(&metrics),
        )?;
        summaries.push(serde_json::json!({
            "against": path.display().to_string(),
            "max_freq_rel_err": metrics.max_freq_err,
            "l2_freq_rel_err": metrics.l2_freq_err,
            "max_time_abs_err": metrics.max_time_err,
            "max_time_rel_err": metrics.max_time_rel_err,
            "l2_time_abs_err": metrics.l2_time_err,
        }));
        match &mut combined_time {
            None => combined_time = Some((metrics.time.clone(), vec![metrics.time_abs_err.clone()])),
            Some((_, cols)) => cols.push(metrics.time_abs_err.clone()),
        }
    }
    if let Some((t, cols)) = combined_time {
        let mut out = String::from("t");
        for i in 1..=cols.len() {
            out.push_str(&format!(",abs_err_{i}"));
        }
        out.push('\n');
        for (i, &ti) in t.iter().enumerate() {
            out.push_str(&format!("{ti:.16e}"));
            for col in &cols {
                out.push_str(&format!(",{:.16e}", col[i]));
            }
            out.push('\n');
        }
        formats::write_atomic(&args.out.join("time_errors.csv"), &out)?;
    }
    let summary = serde_json::to_string_pretty(&summaries).expect("summary serialization cannot fail");
    formats::write_atomic(&args.out.join("summary.json"), &summary)?;
    Ok(())
}

/// Dispatches a parsed command; returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let outcome: Result<i32> = match &cli.command {
        Command::Validate { model } => cmd_validate(model).map(|violations| {
            if violations.is_empty() {
                println!("valid");
                0
            } else {
                for v in &violations {
                    println!("violation: {v}");
                }
                3
            }
        }),
        Command::Sample(args) => cmd_sample(args).map(|()| 0),
        Command::Reduce(args) => cmd_reduce(args).map(|()| 0),
        Command::Simulate(args) => cmd_simulate(args).map(|()| 0),
        Command::Compare(args) => cmd_compare(args).map(|()| 0),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            let payload = serde_json::json!({ "error": e.to_string(), "kind": e.kind() });
            eprintln!("{payload}");
            2
        }
    }
}
