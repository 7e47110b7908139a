use std::path::PathBuf;

use tagphys::physmap::{sample_random_physics, ParamBounds};

use crate::config::pick;
use crate::docs::{BaselineDocument, BaselineProvenance};
use crate::error::{parse_json, read_text, write_json, CliError};
use crate::Ctx;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Dataset whose per-field range (plus margin) bounds the samples.
    #[arg(long, conflicts_with = "bounds")]
    bounds_from: Option<PathBuf>,
    /// Bounds JSON (field -> [lower, upper]).
    #[arg(long)]
    bounds: Option<PathBuf>,
    #[arg(long)]
    margin: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 1)]
    count: usize,
    #[arg(long)]
    out: PathBuf,
}

pub fn run(ctx: &Ctx, args: Args) -> Result<(), CliError> {
    if args.count == 0 {
        return Err(CliError::Usage("--count must be at least 1".into()));
    }
    let seed = ctx.seed(args.seed);
    let (bounds, source) = match (&args.bounds_from, &args.bounds) {
        (Some(p), _) => {
            let ds = ctx.load_dataset(p, None)?;
            let margin = pick(args.margin, ctx.config.bounds_margin, 0.10);
            (ParamBounds::from_dataset(&ds, margin)?, format!("dataset:{}", p.display()))
        }
        (None, Some(p)) => {
            let b: ParamBounds = parse_json(p, &read_text(p)?)?;
            (b, format!("file:{}", p.display()))
        }
        (None, None) => (ParamBounds::fallback(), "builtin".to_string()),
    };
    let docs = (0..args.count)
        .map(|i| {
            let s = seed.wrapping_add(i as u64);
            Ok(BaselineDocument {
                id: format!("baseline_{i}"),
                physics: sample_random_physics(&bounds, s)?,
                provenance: BaselineProvenance { kind: "random", seed: s, bounds_source: source.clone() },
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    if docs.len() == 1 {
        write_json(&args.out, &docs[0])?;
    } else {
        write_json(&args.out, &docs)?;
    }
    ctx.say(format!("{} random parameter set(s) from {source} bounds", docs.len()));
    Ok(())
}
