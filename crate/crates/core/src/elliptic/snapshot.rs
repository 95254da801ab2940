use std::io::{self, Write};

use super::grid::StripGrid;
use super::obstacle::ObstacleSolution;
use super::pressure::PressureSolution;
use crate::params::{FlatStationary, TumorParams};

/// Writes one CSV row per node, `i,j,x,y_physical,sigma,p,active`, after a
/// `#`-prefixed metadata block.
pub fn write_field_snapshot<W: Write>(
    out: &mut W,
    grid: &StripGrid,
    params: &TumorParams,
    fs: &FlatStationary,
    obstacle: &ObstacleSolution,
    pressure: &PressureSolution,
) -> io::Result<()> {
    writeln!(out, "# nx={} ny={}", grid.nx, grid.ny)?;
    writeln!(
        out,
        "# params={}",
        serde_json::to_string(params).map_err(io::Error::other)?
    )?;
    writeln!(
        out,
        "# flat_stationary={}",
        serde_json::to_string(fs).map_err(io::Error::other)?
    )?;
    writeln!(out, "i,j,x,y_physical,sigma,p,active")?;
    for j in 0..=grid.ny {
        for i in 0..grid.nx {
            let k = grid.idx(i, j);
            writeln!(
                out,
                "{},{},{:.16e},{:.16e},{:.16e},{:.16e},{}",
                i,
                j,
                grid.x_nodes[i],
                grid.y_physical(i, j),
                obstacle.sigma_field[k],
                pressure.p_field[k],
                u8::from(obstacle.active_mask[k])
            )?;
        }
    }
    Ok(())
}
