use std::path::PathBuf;

use serde::Serialize;
use tagphys::dataset::StratifyBy;
use tagphys::forest::{randomized_search, SearchReport, SearchSpace};
use tagphys::retrieval::{select_mode_cv_by, ModeSelection, DEFAULT_PERCENT_TOLERANCE};

use crate::cmd::parse_groups;
use crate::config::pick;
use crate::error::{parse_json, read_text, write_json, CliError};
use crate::Ctx;

#[derive(Debug, clap::Args)]
pub struct Args {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
    folds: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    dt_tol: Option<f64>,
    #[arg(long, default_value = "structure")]
    stratify: StratifyBy,
    /// Forest searches to run as well: `none`, `all` or a list of groups.
    #[arg(long, default_value = "none")]
    groups: String,
    #[arg(long, default_value_t = 50)]
    iters: usize,
    #[arg(long)]
    space: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Serialize)]
struct CrossvalReport {
    folds: usize,
    seed: u64,
    retrieval: ModeSelection,
    searches: Vec<SearchReport>,
}

pub fn run(ctx: &Ctx, args: Args) -> Result<(), CliError> {
    let seed = ctx.seed(args.seed);
    let folds = args.folds.map(|f| f as usize).or(ctx.config.cv_folds).unwrap_or(5);
    if folds < 2 {
        return Err(CliError::Usage(format!("need at least 2 folds, got {folds}")));
    }
    let tol = pick(args.dt_tol, ctx.config.dt_tolerance, DEFAULT_PERCENT_TOLERANCE);
    let groups = if args.groups.trim() == "none" { Vec::new() } else { parse_groups(&args.groups)? };
    let ds = ctx.load_dataset(&args.dataset, None)?;
    let retrieval = select_mode_cv_by(&ds, folds, seed, tol, args.stratify)?;
    let space = match &args.space {
        Some(p) => parse_json::<SearchSpace>(p, &read_text(p)?)?,
        None => SearchSpace::builtin(),
    };
    let mut searches = Vec::new();
    for g in groups {
        let (_, rep) = randomized_search(&ctx.vocab, &ds, g, &space, args.iters, folds, seed, args.stratify)?;
        searches.push(rep);
    }
    let report = CrossvalReport { folds, seed, retrieval, searches };
    write_json(&args.out, &report)?;
    for s in &report.retrieval.scores {
        ctx.say(format!("{:<8} {:.6}", s.mode.to_string(), s.mean_nmae));
    }
    ctx.say(format!("selected {}", report.retrieval.selected));
    for s in &report.searches {
        let best = &s.entries[s.best_index];
        ctx.say(format!("{:<20} best cv score {:.6}", s.group.name(), best.mean_score));
    }
    Ok(())
}
