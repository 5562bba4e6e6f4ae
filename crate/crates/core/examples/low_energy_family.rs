//! Tabulates the concentrated initial-data family: the energy falls and the
//! cross term grows as the spike narrows.

use radial_chemotaxis::grid::{build_grid, RadialField};
use radial_chemotaxis::initial_data::{energy_divergence_table, eta_star};
use radial_chemotaxis::model::ModelParams;

fn main() -> radial_chemotaxis::Result<()> {
    let grid = build_grid(5, 1.0, 2048)?;
    let params = ModelParams::fully_parabolic(5, 1.0);
    let zero = RadialField::zeros(grid.clone());
    let base = (zero.clone(), zero.clone(), zero);
    let etas = [0.25, 0.125, 0.0625, 0.03125];
    println!("eta must stay below {:.4}", eta_star(1.0));
    println!("{:>8} {:>12} {:>12} {:>10} {:>10}", "eta", "F", "∫uv", "L1(u)", "W22(v)");
    for r in energy_divergence_table(&params, &grid, 1.0, &base, &etas)? {
        println!(
            "{:>8} {:>12.4} {:>12.4} {:>10.4} {:>10.4}",
            r.eta, r.energy, r.cross_uv, r.l1_dist_u, r.w22_dist_v
        );
    }
    Ok(())
}
