use std::path::{Path, PathBuf};

use tagphys::clothsim::{export_trajectory, simulate, Scenario, TrajectoryFormat};
use tagphys::PhysicsParams;

use crate::docs::parse_physics_docs;
use crate::error::{parse_json, read_text, CliError};
use crate::Ctx;

#[derive(Debug, clap::Args)]
pub struct Args {
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory (obj) or file (json).
    #[arg(long)]
    out: PathBuf,
    /// Parameter document overriding the scenario's parameters.
    #[arg(long)]
    params: Option<PathBuf>,
    /// obj-sequence or json.
    #[arg(long, default_value = "obj-sequence")]
    format: TrajectoryFormat,
    /// Overrides the scenario duration (s).
    #[arg(long)]
    duration: Option<f64>,
}

fn read_params(path: &Path) -> Result<PhysicsParams, CliError> {
    let mut items = parse_physics_docs(&path.display().to_string(), &read_text(path)?)?;
    if items.len() != 1 {
        return Err(CliError::Domain(format!("{}: expected one parameter set, found {}", path.display(), items.len())));
    }
    Ok(items.remove(0).1)
}

pub fn run(ctx: &Ctx, args: Args) -> Result<(), CliError> {
    let scenario: Scenario = parse_json(&args.scenario, &read_text(&args.scenario)?)?;
    let params = match (&args.params, scenario.params, &scenario.params_file) {
        (Some(p), _, _) => read_params(p)?,
        (None, Some(p), _) => p,
        (None, None, Some(rel)) => {
            let base = args.scenario.parent().unwrap_or(Path::new("."));
            read_params(&base.join(rel))?
        }
        (None, None, None) => {
            return Err(CliError::Usage("scenario has no parameters; pass --params".into()));
        }
    };
    let duration = args.duration.unwrap_or(scenario.duration);
    if !(duration >= 0.0 && duration.is_finite()) {
        return Err(CliError::Usage(format!("duration must be non-negative, got {duration}")));
    }
    let traj = simulate(&scenario.cloth, &params, &scenario.config, duration)?;
    if let (TrajectoryFormat::Json, Some(parent)) = (args.format, args.out.parent()) {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| CliError::Io(format!("creating {}: {e}", parent.display())))?;
        }
    }
    let files = export_trajectory(&traj, &args.out, args.format)?;
    let speed = traj.mean_speeds().last().copied().unwrap_or(0.0);
    ctx.say(format!(
        "{} frames over {duration} s, {} file(s) in {}, final mean speed {speed:.4} mm/s",
        traj.len(),
        files.len(),
        args.out.display()
    ));
    Ok(())
}
