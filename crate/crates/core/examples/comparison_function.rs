//! Samples the comparison function and its divergence time.

use radial_chemotaxis::blowup::{blowup_time_bound, phi_bracket_root, phi_table, ComparisonParams};

fn main() -> radial_chemotaxis::Result<()> {
    let params = ComparisonParams {
        ell: 4.0,
        c_user: 0.2,
        theta: 0.9,
        m_tilde: 0.1,
        a: 0.1,
    };
    let t = blowup_time_bound(&params)?;
    let root = phi_bracket_root(&params, 2.0 * t + 2.0)?;
    println!("divergence time T = {t:.6}, bisection root {root:?}");
    let (rows, _) = phi_table(&params, 10)?;
    println!("{:>12} {:>14} {:>10}", "s", "Phi", "residual");
    for r in rows {
        println!("{:>12.4} {:>14.6e} {:>10.2e}", r.s, r.phi, r.residual);
    }
    Ok(())
}
