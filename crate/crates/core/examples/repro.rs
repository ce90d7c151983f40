use modulus_core::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn main() {
    let mut rng = StdRng::seed_from_u64(7);
    for case in 0..50 {
        let edges = 2 + case % 5;
        let rows = 1 + case % 6;
        let mut object_rows = Vec::new();
        for r in 0..rows {
            let mut usage = vec![0.0f64; edges];
            for entry in usage.iter_mut() {
                if rng.random_bool(0.6) {
                    *entry = rng.random_range(0.2..2.0);
                }
            }
            let hot = rng.random_range(0..edges);
            if usage.iter().all(|&v| v == 0.0) {
                usage[hot] = rng.random_range(0.2..2.0);
            }
            object_rows.push(
                ObjectRow::new(EdgeVector::from_values(usage), format!("r{case}_{r}")).unwrap(),
            );
        }
        let weighted = case % 2 == 0;
        let sigma = EdgeVector::from_values(
            (0..edges)
                .map(|_| if weighted { rng.random_range(0.5..2.0) } else { 1.0 })
                .collect(),
        );
        let matrix = usage_matrix(&object_rows);
        let opts = SolveOptions::default();
        let qp = solve_qp(&matrix, &sigma, &opts).unwrap();
        match solve_dual_ascent(&matrix, &sigma, 2.0, &opts) {
            Ok(a) => {
                let mut worst: f64 = 0.0;
                for e in 0..edges { worst = worst.max((qp.density.get(e) - a.density.get(e)).abs()); }
                println!("case {case}: ok, rows={rows} edges={edges} maxdiff={worst:.2e}");
            }
            Err(e) => {
                println!("case {case}: FAIL rows={rows} edges={edges} {e}");
                println!("  matrix = {matrix}");
                println!("  sigma = {:?}", sigma.as_slice());
                println!("  qp energy = {}, lambda = {:?}", qp.energy, qp.duals.values());
            }
        }
    }
}
