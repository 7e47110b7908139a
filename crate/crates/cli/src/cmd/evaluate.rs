use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::Serialize;
use tagphys::clothsim::import_trajectory;
use tagphys::metrics::{
    categorical_scores, continuous_error, geometry_score, material_set_score, percentage_error,
    percentage_error_one, CategoricalScore, GeometryScore, MaterialSetScore, PercentageErrorScore,
    DEFAULT_VOXEL_MM,
};
use tagphys::physmap::{FIELD_COUNT, FIELD_NAMES};
use tagphys::tagparse::{FabricAttributes, StructureType};

use crate::config::pick;
use crate::docs::{parse_attribute_docs, parse_physics_docs};
use crate::error::{read_text, write_json, write_text, CliError};
use crate::Ctx;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Kind {
    Attributes,
    Physics,
    Geometry,
}

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Ground truth: attribute or physics JSON, or a trajectory directory.
    #[arg(long)]
    gt: PathBuf,
    #[arg(long)]
    pred: PathBuf,
    #[arg(long, value_enum)]
    kind: Kind,
    #[arg(long)]
    out: PathBuf,
    /// Per-example CSV flattening.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Voxel edge in mm for IoU.
    #[arg(long)]
    voxel: Option<f64>,
}

#[derive(Debug, Serialize)]
struct AttributeExample {
    id: Option<String>,
    material_accuracy: f64,
    material_f1: f64,
    percentage_mae: f64,
    percentage_nmae: f64,
    family_correct: bool,
    structure_correct: bool,
}

#[derive(Debug, Serialize)]
struct AttributeReport {
    count: usize,
    material: MaterialSetScore,
    percentage: PercentageErrorScore,
    family: CategoricalScore,
    structure: CategoricalScore,
    per_example: Vec<AttributeExample>,
}

#[derive(Debug, Serialize)]
struct FieldError {
    mae: f64,
    nmae: Option<f64>,
}

#[derive(Debug, Serialize)]
struct PhysicsReport {
    count: usize,
    mean_mae: f64,
    mean_nmae: Option<f64>,
    fields: BTreeMap<String, FieldError>,
}

#[derive(Debug, Serialize)]
struct FrameScore {
    frame: usize,
    time: f64,
    #[serde(flatten)]
    score: GeometryScore,
}

#[derive(Debug, Serialize)]
struct GeometryReport {
    frames: usize,
    voxel_mm: f64,
    mean_chamfer: f64,
    mean_iou: f64,
    per_frame: Vec<FrameScore>,
}

fn check_ids(gt: &[Option<String>], pred: &[Option<String>]) -> Result<(), CliError> {
    if gt.len() != pred.len() {
        return Err(CliError::Domain(format!("{} ground-truth items vs {} predictions", gt.len(), pred.len())));
    }
    for (i, (a, b)) in gt.iter().zip(pred).enumerate() {
        if let (Some(a), Some(b)) = (a, b) {
            if a != b {
                return Err(CliError::Domain(format!("item {i}: id `{a}` paired with `{b}`")));
            }
        }
    }
    Ok(())
}

fn attributes(ctx: &Ctx, args: &Args) -> Result<(serde_json::Value, String), CliError> {
    let load = |p: &PathBuf| -> Result<(Vec<Option<String>>, Vec<FabricAttributes>), CliError> {
        let label = p.display().to_string();
        let (docs, _) = parse_attribute_docs(&label, &read_text(p)?, false)?;
        let attrs = docs
            .iter()
            .enumerate()
            .map(|(i, d)| d.to_attributes(&ctx.vocab).map_err(|e| CliError::Domain(format!("{label}: item {i}: {e}"))))
            .collect::<Result<Vec<_>, _>>()?;
        Ok((docs.into_iter().map(|d| d.id).collect(), attrs))
    };
    let (gt_ids, gt) = load(&args.gt)?;
    let (pred_ids, pred) = load(&args.pred)?;
    check_ids(&gt_ids, &pred_ids)?;

    let gc: Vec<_> = gt.iter().map(|a| a.composition.clone()).collect();
    let pc: Vec<_> = pred.iter().map(|a| a.composition.clone()).collect();
    let material = material_set_score(&gc, &pc)?;
    let percentage = percentage_error(&gc, &pc)?;
    let fam = |v: &[FabricAttributes]| v.iter().map(|a| a.family.as_str().to_string()).collect::<Vec<_>>();
    let st = |v: &[FabricAttributes]| v.iter().map(|a| a.structure.as_str().to_string()).collect::<Vec<_>>();
    let family = categorical_scores(&fam(&gt), &fam(&pred), ctx.vocab.families())?;
    let structures: Vec<String> = StructureType::ALL.iter().map(|s| s.as_str().to_string()).collect();
    let structure = categorical_scores(&st(&gt), &st(&pred), &structures)?;

    let per_example: Vec<AttributeExample> = (0..gt.len())
        .map(|i| {
            let pe = percentage_error_one(&gc[i], &pc[i]);
            let counts = material.per_example[i];
            AttributeExample {
                id: gt_ids[i].clone().or_else(|| pred_ids[i].clone()),
                material_accuracy: counts.accuracy(),
                material_f1: counts.f1(),
                percentage_mae: pe.mae,
                percentage_nmae: pe.nmae,
                family_correct: gt[i].family == pred[i].family,
                structure_correct: gt[i].structure == pred[i].structure,
            }
        })
        .collect();
    let mut csv = String::from("index,id,material_accuracy,material_f1,percentage_mae,percentage_nmae,family_correct,structure_correct\n");
    for (i, e) in per_example.iter().enumerate() {
        csv.push_str(&format!(
            "{i},{},{},{},{},{},{},{}\n",
            e.id.as_deref().unwrap_or(""),
            e.material_accuracy,
            e.material_f1,
            e.percentage_mae,
            e.percentage_nmae,
            e.family_correct,
            e.structure_correct
        ));
    }
    ctx.say(format!(
        "material acc {:.4} f1 {:.4} | pct mae {:.4} nmae {:.4} | family acc {:.4} | structure acc {:.4}",
        material.accuracy, material.f1, percentage.mae, percentage.nmae, family.accuracy, structure.accuracy
    ));
    let report = AttributeReport { count: gt.len(), material, percentage, family, structure, per_example };
    Ok((serde_json::to_value(report).expect("report serializes"), csv))
}

fn physics(ctx: &Ctx, args: &Args) -> Result<(serde_json::Value, String), CliError> {
    let gt = parse_physics_docs(&args.gt.display().to_string(), &read_text(&args.gt)?)?;
    let pred = parse_physics_docs(&args.pred.display().to_string(), &read_text(&args.pred)?)?;
    let ids = |v: &[(Option<String>, _)]| v.iter().map(|(id, _)| id.clone()).collect::<Vec<_>>();
    check_ids(&ids(&gt), &ids(&pred))?;
    let ga: Vec<[f64; FIELD_COUNT]> = gt.iter().map(|(_, p)| p.to_array()).collect();
    let pa: Vec<[f64; FIELD_COUNT]> = pred.iter().map(|(_, p)| p.to_array()).collect();
    let mut fields = BTreeMap::new();
    let mut csv = String::from("field,mae,nmae\n");
    let (mut mae_sum, mut nmae_sum, mut nmae_n) = (0.0, 0.0, 0);
    for (k, name) in FIELD_NAMES.iter().enumerate() {
        let g: Vec<f64> = ga.iter().map(|v| v[k]).collect();
        let p: Vec<f64> = pa.iter().map(|v| v[k]).collect();
        let e = continuous_error(&g, &p)?;
        mae_sum += e.mae;
        if let Some(n) = e.nmae {
            nmae_sum += n;
            nmae_n += 1;
        }
        csv.push_str(&format!("{name},{},{}\n", e.mae, e.nmae.map_or_else(String::new, |n| n.to_string())));
        fields.insert(name.to_string(), FieldError { mae: e.mae, nmae: e.nmae });
    }
    let report = PhysicsReport {
        count: gt.len(),
        mean_mae: mae_sum / FIELD_COUNT as f64,
        mean_nmae: (nmae_n > 0).then(|| nmae_sum / nmae_n as f64),
        fields,
    };
    ctx.say(format!(
        "{} examples, mean field MAE {:.4}, mean NMAE {}",
        report.count,
        report.mean_mae,
        report.mean_nmae.map_or_else(|| "-".into(), |n| format!("{n:.4}"))
    ));
    Ok((serde_json::to_value(report).expect("report serializes"), csv))
}

fn geometry(ctx: &Ctx, args: &Args) -> Result<(serde_json::Value, String), CliError> {
    let voxel_mm = pick(args.voxel, ctx.config.voxel_mm, DEFAULT_VOXEL_MM);
    if !(voxel_mm > 0.0 && voxel_mm.is_finite()) {
        return Err(CliError::Usage(format!("--voxel must be positive, got {voxel_mm}")));
    }
    let gt = import_trajectory(&args.gt)?;
    let pred = import_trajectory(&args.pred)?;
    if gt.len() != pred.len() {
        return Err(CliError::Domain(format!("frame count mismatch: {} vs {}", gt.len(), pred.len())));
    }
    let mut per_frame = Vec::with_capacity(gt.len());
    let mut csv = String::from("frame,time,chamfer,iou\n");
    for i in 0..gt.len() {
        let score = geometry_score(&gt.mesh(i), &pred.mesh(i), voxel_mm)?;
        csv.push_str(&format!("{i},{},{},{}\n", gt.times[i], score.chamfer, score.iou));
        per_frame.push(FrameScore { frame: i, time: gt.times[i], score });
    }
    let n = per_frame.len() as f64;
    let report = GeometryReport {
        frames: per_frame.len(),
        voxel_mm,
        mean_chamfer: per_frame.iter().map(|f| f.score.chamfer).sum::<f64>() / n,
        mean_iou: per_frame.iter().map(|f| f.score.iou).sum::<f64>() / n,
        per_frame,
    };
    ctx.say(format!(
        "{} frames, mean chamfer (x1e4) {:.4}, mean IoU {:.4}",
        report.frames, report.mean_chamfer, report.mean_iou
    ));
    Ok((serde_json::to_value(report).expect("report serializes"), csv))
}

pub fn run(ctx: &Ctx, args: Args) -> Result<(), CliError> {
    let (report, csv) = match args.kind {
        Kind::Attributes => attributes(ctx, &args)?,
        Kind::Physics => physics(ctx, &args)?,
        Kind::Geometry => geometry(ctx, &args)?,
    };
    write_json(&args.out, &report)?;
    if let Some(path) = &args.csv {
        write_text(path, &csv)?;
    }
    Ok(())
}
