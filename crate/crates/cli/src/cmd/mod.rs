pub mod baseline;
pub mod crossval;
pub mod evaluate;
pub mod ingest;
pub mod predict;
pub mod simulate;
pub mod train;

use tagphys::physmap::ParamGroup;

use crate::error::CliError;

/// `all` or a comma-separated list of group names.
pub fn parse_groups(spec: &str) -> Result<Vec<ParamGroup>, CliError> {
    if spec.trim() == "all" {
        return Ok(ParamGroup::ALL.to_vec());
    }
    let mut out = Vec::new();
    for part in spec.split(',') {
        let g: ParamGroup = part.parse().map_err(CliError::Usage)?;
        if !out.contains(&g) {
            out.push(g);
        }
    }
    Ok(out)
}
