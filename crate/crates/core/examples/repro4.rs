use modulus_core::*;
use nalgebra::DMatrix;

fn main() {
    let m = DMatrix::from_row_slice(4, 5, &[
        1.9115860684695631, 0.0, 0.0, 1.8160256379949655, 0.6084692841527275,
        1.0888478994322177, 1.6242720663374468, 0.0, 0.0, 0.2244047174159315,
        0.0, 1.682550831278571, 0.0, 1.3947426133731586, 0.0,
        0.0, 0.0, 0.707640540998, 0.0, 0.46529942278636494,
    ]);
    let sigma = EdgeVector::constant(5, 1.0);
    let opts = SolveOptions { max_iterations: Some(500), ..SolveOptions::default() };
    match solve_dual_ascent(&m, &sigma, 2.0, &opts) {
        Ok(s) => println!("ok energy {}", s.energy),
        Err(e) => println!("ERR {e}"),
    }
}
