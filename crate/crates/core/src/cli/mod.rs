//! `relaytree` subcommands.

pub mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use relay_tree::analysis::{crummy_scan, min_sensors_exact, EtaSchedule, DEFAULT_CRUMMY_SPLIT};
use relay_tree::bounds::{sandwich_check, TreeSize};
use relay_tree::mc::{simulate, Hypothesis, McConfig};
use relay_tree::{classify, evolve, fuse, ErrorPair, Error, RegionTag, Result};

use output::{OutputRecord, Payload, Value};

#[derive(Debug, Parser)]
#[command(name = "relaytree", version, about = "Error dynamics of balanced binary relay trees")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct OutputOpts {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write to this file instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PairArgs {
    /// Type I error probability of every sensor.
    #[arg(long, allow_negative_numbers = true)]
    pub alpha0: f64,
    /// Type II error probability of every sensor.
    #[arg(long, allow_negative_numbers = true)]
    pub beta0: f64,
}

impl PairArgs {
    fn pair(&self) -> Result<ErrorPair> {
        ErrorPair::new(self.alpha0, self.beta0)
    }

    fn inputs(&self) -> output::Fields {
        vec![("alpha0", self.alpha0.into()), ("beta0", self.beta0.into())]
    }
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct SizeArgs {
    /// Tree height h (N = 2^h leaves).
    #[arg(long)]
    pub height: Option<u32>,
    /// Number of leaves N, a power of two.
    #[arg(long)]
    pub leaves: Option<u64>,
}

impl SizeArgs {
    fn tree(&self) -> Result<TreeSize> {
        match (self.height, self.leaves) {
            (Some(h), _) => Ok(TreeSize::from_height(h)),
            (None, Some(n)) => TreeSize::from_leaves(n),
            (None, None) => unreachable!("clap enforces one of --height / --leaves"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RegionSel {
    #[value(name = "Bm")]
    Bm,
    #[value(name = "B1")]
    B1,
    #[value(name = "B2RU")]
    B2ru,
    #[value(name = "U")]
    U,
    #[value(name = "fB2RU")]
    FB2ru,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RatioKind {
    #[value(name = "step1_sq")]
    Step1Sq,
    #[value(name = "step2_sq")]
    Step2Sq,
    #[value(name = "step1_lin")]
    Step1Lin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum HypothesisArg {
    #[value(name = "H0", alias = "h0")]
    H0,
    #[value(name = "H1", alias = "h1")]
    H1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScheduleArg {
    /// eta_N = c / sqrt(N)
    InvSqrt,
    /// eta_N = c * N^(-1/4)
    InvQuarter,
    /// eta_N = c / N
    InvLinear,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Trajectory of the error pair with region tags.
    Evolve {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, default_value_t = 10)]
        levels: u32,
        #[command(flatten)]
        out: OutputOpts,
    },
    /// Region classification over a grid of [0, 1)^2.
    Regions {
        #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u32).range(2..=4096))]
        resolution: u32,
        #[command(flatten)]
        out: OutputOpts,
    },
    /// Step ratios of L over the grid points of one region.
    Ratios {
        #[arg(long, value_enum)]
        region: RegionSel,
        #[arg(long, value_enum)]
        kind: RatioKind,
        #[arg(long, default_value_t = 200, value_parser = clap::value_parser!(u32).range(2..=4096))]
        resolution: u32,
        #[command(flatten)]
        out: OutputOpts,
    },
    /// Exact log2 P_N^-1 next to the bound that applies.
    Bounds {
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        size: SizeArgs,
        #[command(flatten)]
        out: OutputOpts,
    },
    /// Smallest power-of-two tree with P_N <= epsilon.
    MinSensors {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, allow_negative_numbers = true)]
        epsilon: f64,
        #[command(flatten)]
        out: OutputOpts,
    },
    /// Simulate the tree and compare with the recursion.
    Montecarlo {
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        size: SizeArgs,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = HypothesisArg::H0)]
        hypothesis: HypothesisArg,
        #[command(flatten)]
        out: OutputOpts,
    },
    /// log2 P_N for sensors whose margin eta_N shrinks with N.
    Crummy {
        #[arg(long, allow_negative_numbers = true)]
        c: f64,
        #[arg(long)]
        height_min: u32,
        #[arg(long)]
        height_max: u32,
        #[arg(long, default_value_t = DEFAULT_CRUMMY_SPLIT, allow_negative_numbers = true)]
        split: f64,
        #[arg(long, value_enum, default_value_t = ScheduleArg::InvSqrt)]
        schedule: ScheduleArg,
        #[command(flatten)]
        out: OutputOpts,
    },
}

impl Command {
    pub fn output_opts(&self) -> &OutputOpts {
        match self {
            Command::Evolve { out, .. }
            | Command::Regions { out, .. }
            | Command::Ratios { out, .. }
            | Command::Bounds { out, .. }
            | Command::MinSensors { out, .. }
            | Command::Montecarlo { out, .. }
            | Command::Crummy { out, .. } => out,
        }
    }
}

fn tag_values(tag: &RegionTag) -> Vec<Value> {
    vec![
        tag.side.name().into(),
        tag.b_index.into(),
        tag.in_r.into(),
        tag.in_s.into(),
    ]
}

pub fn run(command: &Command) -> Result<OutputRecord> {
    match command {
        Command::Evolve { pair, levels, .. } => cmd_evolve(pair, *levels),
        Command::Regions { resolution, .. } => Ok(cmd_regions(*resolution)),
        Command::Ratios {
            region,
            kind,
            resolution,
            ..
        } => cmd_ratios(*region, *kind, *resolution),
        Command::Bounds { pair, size, .. } => cmd_bounds(pair, size),
        Command::MinSensors { pair, epsilon, .. } => cmd_min_sensors(pair, *epsilon),
        Command::Montecarlo {
            pair,
            size,
            trials,
            seed,
            hypothesis,
            ..
        } => cmd_montecarlo(pair, size, *trials, *seed, *hypothesis),
        Command::Crummy {
            c,
            height_min,
            height_max,
            split,
            schedule,
            ..
        } => cmd_crummy(*c, *height_min, *height_max, *split, *schedule),
    }
}

fn cmd_evolve(args: &PairArgs, levels: u32) -> Result<OutputRecord> {
    let trajectory = evolve(args.pair()?, levels);
    let rows = trajectory
        .states
        .iter()
        .zip(&trajectory.log2_l)
        .map(|(s, &log2_l)| {
            let (a, b) = s.pair.values();
            let mut row = vec![
                s.level.into(),
                a.into(),
                b.into(),
                s.pair.alpha.log2_p().into(),
                s.pair.beta.log2_p().into(),
                log2_l.into(),
            ];
            row.extend(tag_values(&s.tag));
            row
        })
        .collect();
    let mut inputs = args.inputs();
    inputs.push(("levels", levels.into()));
    Ok(OutputRecord {
        command: "evolve",
        inputs,
        payload: Payload::Rows {
            columns: vec![
                "k", "alpha", "beta", "log2_alpha", "log2_beta", "log2_L", "side", "b_index",
                "in_R", "in_S",
            ],
            rows,
        },
    })
}

/// Grid coordinates `i / (resolution + 1)`, `i < resolution`.
fn grid(resolution: u32) -> impl Iterator<Item = f64> + Clone {
    let step = 1.0 / (resolution as f64 + 1.0);
    (0..resolution).map(move |i| i as f64 * step)
}

fn cmd_regions(resolution: u32) -> OutputRecord {
    let mut rows = Vec::with_capacity((resolution as usize).pow(2));
    for a in grid(resolution) {
        for b in grid(resolution) {
            let tag = classify(&ErrorPair::new(a, b).expect("grid lies in [0, 1)"));
            let mut row = vec![a.into(), b.into()];
            row.extend(tag_values(&tag));
            rows.push(row);
        }
    }
    OutputRecord {
        command: "regions",
        inputs: vec![("resolution", resolution.into())],
        payload: Payload::Rows {
            columns: vec!["alpha", "beta", "side", "b_index", "in_R", "in_S"],
            rows,
        },
    }
}

fn region_name(region: RegionSel) -> &'static str {
    match region {
        RegionSel::Bm => "Bm",
        RegionSel::B1 => "B1",
        RegionSel::B2ru => "B2RU",
        RegionSel::U => "U",
        RegionSel::FB2ru => "fB2RU",
    }
}

fn kind_name(kind: RatioKind) -> &'static str {
    match kind {
        RatioKind::Step1Sq => "step1_sq",
        RatioKind::Step2Sq => "step2_sq",
        RatioKind::Step1Lin => "step1_lin",
    }
}

/// `log2` of the selected ratio at `pair`.
fn log2_ratio(pair: ErrorPair, kind: RatioKind) -> f64 {
    let l0 = pair.total_error_log2();
    let l1 = fuse(pair).total_error_log2();
    match kind {
        RatioKind::Step1Sq => l1 - 2.0 * l0,
        RatioKind::Step2Sq => fuse(fuse(pair)).total_error_log2() - 2.0 * l0,
        RatioKind::Step1Lin => l1 - l0,
    }
}

fn cmd_ratios(region: RegionSel, kind: RatioKind, resolution: u32) -> Result<OutputRecord> {
    use RatioKind::*;
    use RegionSel::*;
    let valid = matches!(
        (region, kind),
        (Bm, Step1Sq) | (B1, Step2Sq) | (B2ru, Step2Sq) | (U, Step1Sq) | (U, Step1Lin) | (FB2ru, Step1Lin)
    );
    if !valid {
        return Err(Error::InvalidArgument(format!(
            "ratio {} is not defined for region {}",
            kind_name(kind),
            region_name(region)
        )));
    }
    let mut rows = Vec::new();
    for a in grid(resolution) {
        for b in grid(resolution) {
            if a > b {
                continue;
            }
            let p = ErrorPair::new(a, b).expect("grid lies in [0, 1)");
            let tag = classify(&p);
            if !tag.side.in_triangle() || p.total_error_log2() == f64::NEG_INFINITY {
                continue;
            }
            let point = match region {
                Bm if tag.b_index.is_some_and(|m| m >= 2) => p,
                B1 if tag.b_index == Some(1) => p,
                B2ru if tag.b_index == Some(2) && tag.in_r => p,
                U => p,
                // ratio at the image of a B2 ∩ R_U point
                FB2ru if tag.b_index == Some(2) && tag.in_r => fuse(p),
                _ => continue,
            };
            let (x, y) = point.values();
            rows.push(vec![x.into(), y.into(), log2_ratio(point, kind).exp2().into()]);
        }
    }
    Ok(OutputRecord {
        command: "ratios",
        inputs: vec![
            ("region", region_name(region).into()),
            ("kind", kind_name(kind).into()),
            ("resolution", resolution.into()),
        ],
        payload: Payload::Rows {
            columns: vec!["alpha", "beta", "ratio"],
            rows,
        },
    })
}

fn cmd_bounds(args: &PairArgs, size: &SizeArgs) -> Result<OutputRecord> {
    let pair = args.pair()?;
    let tree = size.tree()?;
    let check = sandwich_check(pair, tree)?;
    let b = check.bound;
    let mut inputs = args.inputs();
    inputs.push(("height", tree.height().into()));
    Ok(OutputRecord {
        command: "bounds",
        inputs,
        payload: Payload::Result(vec![
            ("leaves", tree.leaves_u64().map_or(Value::Float(tree.leaves()), Value::from)),
            ("height", tree.height().into()),
            ("log2_L0", b.log2_l0.into()),
            ("m", b.m.into()),
            ("theorem", b.theorem.name().into()),
            ("exact_log2_inv_PN", check.exact.into()),
            ("lower", b.lower.into()),
            ("lower_clamped", b.lower_clamped.into()),
            ("upper", b.upper.into()),
            ("ok", check.ok.into()),
            ("PN_convention", "alpha+beta at the root, twice the total error probability".into()),
        ]),
    })
}

fn cmd_min_sensors(args: &PairArgs, epsilon: f64) -> Result<OutputRecord> {
    let pair = args.pair()?;
    let tree = min_sensors_exact(pair, epsilon)?;
    let root = relay_tree::dynamics::fuse_n(pair, tree.height());
    let log2_eps = epsilon.log2();
    let mut inputs = args.inputs();
    inputs.push(("epsilon", epsilon.into()));
    Ok(OutputRecord {
        command: "min-sensors",
        inputs,
        payload: Payload::Result(vec![
            ("n_min", tree.leaves_u64().map_or(Value::Float(tree.leaves()), Value::from)),
            ("height", tree.height().into()),
            ("log2_PN", root.total_error_log2().into()),
            ("log2_epsilon_sq", (log2_eps * log2_eps).into()),
            ("ratio", (tree.leaves() / (log2_eps * log2_eps)).into()),
            ("PN_convention", "alpha+beta at the root, twice the total error probability".into()),
        ]),
    })
}

fn cmd_montecarlo(
    args: &PairArgs,
    size: &SizeArgs,
    trials: u64,
    seed: u64,
    hypothesis: HypothesisArg,
) -> Result<OutputRecord> {
    let hypothesis = match hypothesis {
        HypothesisArg::H0 => Hypothesis::H0,
        HypothesisArg::H1 => Hypothesis::H1,
    };
    let tree = size.tree()?;
    let config = McConfig {
        pair0: args.pair()?,
        height: tree.height(),
        trials,
        seed,
        hypothesis,
    };
    let est = simulate(&config)?;
    let mut inputs = args.inputs();
    inputs.extend([
        ("height", tree.height().into()),
        ("trials", trials.into()),
        ("seed", seed.into()),
        ("hypothesis", hypothesis.to_string().into()),
    ]);
    Ok(OutputRecord {
        command: "montecarlo",
        inputs,
        payload: Payload::Result(vec![
            ("error_rate", est.error_rate.into()),
            ("errors", est.errors.into()),
            ("trials", est.trials.into()),
            ("std_err", est.std_err.into()),
            ("predicted", est.predicted.into()),
            ("z", est.z_score().into()),
        ]),
    })
}

fn cmd_crummy(
    c: f64,
    height_min: u32,
    height_max: u32,
    split: f64,
    schedule: ScheduleArg,
) -> Result<OutputRecord> {
    if height_min > height_max {
        return Err(Error::InvalidArgument(format!(
            "height-min {height_min} exceeds height-max {height_max}"
        )));
    }
    if !height_min.is_multiple_of(2) || !height_max.is_multiple_of(2) {
        return Err(Error::InvalidArgument("heights must be even".into()));
    }
    let schedule = match schedule {
        ScheduleArg::InvSqrt => EtaSchedule::InvSqrt,
        ScheduleArg::InvQuarter => EtaSchedule::InvQuarter,
        ScheduleArg::InvLinear => EtaSchedule::InvLinear,
    };
    let heights: Vec<u32> = (height_min..=height_max).step_by(2).collect();
    let scan = crummy_scan(c, &heights, split, schedule)?;
    let rows = scan
        .rows
        .iter()
        .map(|r| {
            vec![
                r.tree.leaves_u64().map_or(Value::Float(r.tree.leaves()), Value::from),
                r.tree.height().into(),
                r.eta.into(),
                r.log2_pn.into(),
            ]
        })
        .collect();
    Ok(OutputRecord {
        command: "crummy",
        inputs: vec![
            ("c", c.into()),
            ("height_min", height_min.into()),
            ("height_max", height_max.into()),
            ("split", split.into()),
            ("schedule", schedule.name().into()),
        ],
        payload: Payload::Rows {
            columns: vec!["N", "height", "eta", "log2_PN"],
            rows,
        },
    })
}
