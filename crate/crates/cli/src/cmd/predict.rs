use std::collections::BTreeMap;
use std::path::PathBuf;

use tagphys::forest::load_forest;
use tagphys::physmap::{predict_physics, DtMode, ParamBounds, ParamGroup, PhysicsModels, PredictConfig};

use crate::config::pick;
use crate::docs::{parse_attribute_docs, PhysicsDocument};
use crate::error::{parse_json, read_text, write_json, CliError};
use crate::Ctx;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Directory with one model document per parameter group.
    #[arg(long)]
    models: PathBuf,
    /// Reference dataset for density/thickness retrieval and bounds.
    #[arg(long)]
    dataset: PathBuf,
    /// Attribute document: one object or an array.
    #[arg(long)]
    attrs: PathBuf,
    #[arg(long)]
    dt_mode: Option<DtMode>,
    /// Percentage tolerance for exact composition matches.
    #[arg(long)]
    dt_tol: Option<f64>,
    #[arg(long)]
    friction: Option<f64>,
    #[arg(long)]
    damping: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    cv_folds: Option<usize>,
    /// Bounds JSON (field -> [lower, upper]); dataset range plus margin otherwise.
    #[arg(long)]
    bounds: Option<PathBuf>,
    #[arg(long)]
    margin: Option<f64>,
    /// Drop unknown keys instead of rejecting them.
    #[arg(long)]
    lenient: bool,
    #[arg(long)]
    out: PathBuf,
}

pub fn run(ctx: &Ctx, args: Args) -> Result<(), CliError> {
    let c = &ctx.config;
    let d = PredictConfig::default();
    let config = PredictConfig {
        friction: pick(args.friction, c.friction, d.friction),
        damping: pick(args.damping, c.damping, d.damping),
        dt_mode: pick(args.dt_mode, c.dt_mode, d.dt_mode),
        dt_tolerance: pick(args.dt_tol, c.dt_tolerance, d.dt_tolerance),
        seed: ctx.seed(args.seed),
        cv_folds: pick(args.cv_folds, c.cv_folds, d.cv_folds),
        bounds_margin: pick(args.margin, c.bounds_margin, d.bounds_margin),
    };

    let label = args.attrs.display().to_string();
    let (docs, single) = parse_attribute_docs(&label, &read_text(&args.attrs)?, !args.lenient)?;
    let ds = ctx.load_dataset(&args.dataset, None)?;
    let mut forests = BTreeMap::new();
    for g in ParamGroup::ALL {
        forests.insert(g, load_forest(&args.models.join(format!("{}.json", g.name())), &ctx.vocab)?);
    }
    let models = PhysicsModels { forests };
    let bounds = match &args.bounds {
        Some(p) => parse_json::<ParamBounds>(p, &read_text(p)?)?,
        None => ParamBounds::from_dataset(&ds, config.bounds_margin)?,
    };

    let mut out = Vec::with_capacity(docs.len());
    for (i, doc) in docs.iter().enumerate() {
        let attrs = doc.to_attributes(&ctx.vocab).map_err(|e| CliError::Domain(format!("{label}: item {i}: {e}")))?;
        let pred = predict_physics(&ctx.vocab, &attrs, &models, &ds, &bounds, &config)?;
        out.push(PhysicsDocument {
            id: doc.id.clone().unwrap_or_else(|| format!("garment_{i}")),
            composition: attrs.composition.render(),
            family: attrs.family.as_str().to_string(),
            structure: attrs.structure.as_str().to_string(),
            physics: pred.params,
            provenance: pred.provenance,
        });
    }
    if single {
        write_json(&args.out, &out[0])?;
    } else {
        write_json(&args.out, &out)?;
    }
    for d in &out {
        let clamped = d.provenance.clamp_report.len();
        let level = match d.provenance.match_level {
            Some(l) => serde_json::to_value(l).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default(),
            None => "given".into(),
        };
        ctx.say(format!("{}: density/thickness {level}, {clamped} clamped", d.id));
    }
    Ok(())
}
