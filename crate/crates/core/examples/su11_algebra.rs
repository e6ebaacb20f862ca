//! The su(1,1) generators in a truncated Fock basis, and where the
//! truncation breaks their algebra.

use isolindblad::operators::{
    build_ladder_basis, commutator_defect, commutator_defect_full, relative_commutator_defect,
};

fn main() -> isolindblad::Result<()> {
    println!("{:>4} {:>12} {:>12} {:>12}", "dim", "interior", "full", "relative");
    for dim in [4, 8, 16, 32, 64] {
        let b = build_ladder_basis(dim, 1.0, 1.0)?;
        println!(
            "{dim:>4} {:>12.3e} {:>12.3e} {:>12.3e}",
            commutator_defect(&b).max(),
            commutator_defect_full(&b).max(),
            relative_commutator_defect(&b).max()
        );
    }

    let b = build_ladder_basis(6, 1.0, 1.0)?;
    println!("\nK2 on 6 levels (real parts):");
    for i in 0..6 {
        let row: Vec<String> = (0..6).map(|j| format!("{:7.4}", b.k2.matrix()[(i, j)].re)).collect();
        println!("  {}", row.join(" "));
    }
    Ok(())
}
