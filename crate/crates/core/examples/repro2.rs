use modulus_core::*;
use nalgebra::{DMatrix, DVector};

fn main() {
    let m = DMatrix::from_row_slice(4, 5, &[
        1.9115860684695631, 0.0, 0.0, 1.8160256379949655, 0.6084692841527275,
        1.0888478994322177, 1.6242720663374468, 0.0, 0.0, 0.2244047174159315,
        0.0, 1.682550831278571, 0.0, 1.3947426133731586, 0.0,
        0.0, 0.0, 0.707640540998, 0.0, 0.46529942278636494,
    ]);
    let sigma = EdgeVector::constant(5, 1.0);
    let opts = SolveOptions::default();
    let qp = solve_qp(&m, &sigma, &opts).unwrap();
    println!("qp lambda = {:?}", qp.duals.values());
    // lengths at QP optimum:
    let rho = DVector::from_column_slice(qp.density.values().as_slice());
    let lengths = &m * &rho;
    println!("qp lengths = {:?}", lengths.as_slice());
    // now check: what does the dual value look like at the qp lambda?
    let g = dual_value(&m, &sigma, 2.0, qp.duals.values());
    println!("g(qp lambda) = {}, energy = {}", g, qp.energy);
}
