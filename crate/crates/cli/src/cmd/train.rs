use std::path::PathBuf;

use serde::Serialize;
use tagphys::dataset::{feature_matrix, stratified_split, StratifyBy};
use tagphys::forest::{fit_group, group_targets, randomized_search, save_forest, SearchReport, SearchSpace};
use tagphys::{Forest, ForestHyperparams, T2PDataset};

use crate::cmd::parse_groups;
use crate::error::{parse_json, read_text, write_json, CliError};
use crate::Ctx;

pub const SPLIT_RATIOS: [f64; 3] = [0.7, 0.15, 0.15];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SearchMode {
    Fixed,
    Random,
}

#[derive(Debug, clap::Args)]
pub struct Args {
    #[arg(long)]
    dataset: PathBuf,
    /// `all` or a comma-separated list of groups.
    #[arg(long, default_value = "all")]
    groups: String,
    #[arg(long, value_enum, default_value = "fixed")]
    search: SearchMode,
    #[arg(long, default_value_t = 50)]
    iters: usize,
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(2..))]
    folds: u64,
    #[arg(long)]
    seed: Option<u64>,
    /// Search space JSON (built-in space otherwise).
    #[arg(long)]
    space: Option<PathBuf>,
    /// structure, family or family-structure.
    #[arg(long, default_value = "structure")]
    stratify: StratifyBy,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Serialize)]
struct GroupReport {
    group: String,
    hyperparams: ForestHyperparams,
    val_mae: Option<f64>,
    test_mae: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    search: Option<SearchReport>,
}

#[derive(Debug, Serialize)]
struct TrainReport {
    seed: u64,
    search: SearchMode,
    split: [usize; 3],
    warnings: Vec<String>,
    groups: Vec<GroupReport>,
}

/// Mean absolute error over every output of every record in `idx`.
fn holdout_mae(ctx: &Ctx, forest: &Forest, ds: &T2PDataset, idx: &[usize]) -> Result<Option<f64>, CliError> {
    if idx.is_empty() {
        return Ok(None);
    }
    let sub = ds.subset(idx);
    let x = feature_matrix(&ctx.vocab, &sub)?;
    let y = group_targets(&sub, forest.group.expect("group forests carry their group"));
    let (mut total, mut n) = (0.0, 0);
    for (row, truth) in x.iter().zip(&y) {
        for (p, t) in forest.predict(row)?.iter().zip(truth) {
            total += (p - t).abs();
            n += 1;
        }
    }
    Ok(Some(total / n as f64))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |v| format!("{v:.4}"))
}

pub fn run(ctx: &Ctx, args: Args) -> Result<(), CliError> {
    let seed = ctx.seed(args.seed);
    let groups = parse_groups(&args.groups)?;
    let ds = ctx.load_dataset(&args.dataset, None)?;
    let space = match &args.space {
        Some(p) => parse_json::<SearchSpace>(p, &read_text(p)?)?,
        None => SearchSpace::builtin(),
    };
    if args.search == SearchMode::Random && args.iters == 0 {
        return Err(CliError::Usage("--iters must be at least 1".into()));
    }
    let split = stratified_split(&ds, SPLIT_RATIOS, args.stratify, seed)?;
    for w in &split.warnings {
        eprintln!("warning: {w}");
    }
    let train = ds.subset(&split.train);
    let mut reports = Vec::new();
    for g in groups {
        let (hp, search) = match args.search {
            SearchMode::Fixed => (ForestHyperparams::for_group(g), None),
            SearchMode::Random => {
                let (hp, rep) = randomized_search(
                    &ctx.vocab,
                    &train,
                    g,
                    &space,
                    args.iters,
                    args.folds as usize,
                    seed,
                    args.stratify,
                )?;
                (hp, Some(rep))
            }
        };
        let forest = fit_group(&ctx.vocab, &train, g, &hp, seed)?;
        let path = args.out.join(format!("{}.json", g.name()));
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| CliError::Io(format!("creating {}: {e}", parent.display())))?;
        }
        save_forest(&forest, &path)?;
        reports.push(GroupReport {
            group: g.name().into(),
            hyperparams: hp,
            val_mae: holdout_mae(ctx, &forest, &ds, &split.val)?,
            test_mae: holdout_mae(ctx, &forest, &ds, &split.test)?,
            search,
        });
    }
    let report = TrainReport {
        seed,
        search: args.search,
        split: [split.train.len(), split.val.len(), split.test.len()],
        warnings: split.warnings,
        groups: reports,
    };
    write_json(&args.out.join("train_report.json"), &report)?;
    ctx.say(format!("{:<20} {:>10} {:>10}", "group", "val_mae", "test_mae"));
    for r in &report.groups {
        ctx.say(format!("{:<20} {:>10} {:>10}", r.group, fmt_opt(r.val_mae), fmt_opt(r.test_mae)));
    }
    Ok(())
}
