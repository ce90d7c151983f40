// instrumented copy of the ascent internals for the stalling case
use nalgebra::{Cholesky, DMatrix, DVector};

fn main() {
    let m = DMatrix::from_row_slice(4, 5, &[
        1.9115860684695631, 0.0, 0.0, 1.8160256379949655, 0.6084692841527275,
        1.0888478994322177, 1.6242720663374468, 0.0, 0.0, 0.2244047174159315,
        0.0, 1.682550831278571, 0.0, 1.3947426133731586, 0.0,
        0.0, 0.0, 0.707640540998, 0.0, 0.46529942278636494,
    ]);
    let p = 2.0f64;
    let sig = DVector::from_element(5, 1.0);
    let rho = |lam: &DVector<f64>| -> DVector<f64> {
        let u = m.tr_mul(lam);
        DVector::from_fn(5, |e, _| {
            let b = u[e] / (p * sig[e]);
            if b > 0.0 { b.powf(1.0 / (p - 1.0)) } else { 0.0 }
        })
    };
    let obj = |lam: &DVector<f64>, r: &DVector<f64>| -> f64 {
        let mut v = lam.sum();
        for e in 0..5 { v -= (p - 1.0) * sig[e] * r[e].powf(p); }
        v
    };
    // start from ones like the solver
    let mut lambda = DVector::from_element(4, 1.0f64);
    // run simplified newton loop with prints
    let mut support: Vec<usize> = (0..4).filter(|&i| lambda[i] > 0.0).collect();
    for it in 0..30 {
        let r = rho(&lambda);
        let lengths = &m * &r;
        let grad = DVector::from_fn(4, |i, _| 1.0 - lengths[i]);
        // entering
        let mut worst = 1e-9; let mut entering = None;
        for i in 0..4 {
            if !support.contains(&i) && grad[i] > worst { worst = grad[i]; entering = Some(i); }
        }
        if let Some(i) = entering { support.push(i); println!("it {it}: admit {i}"); continue; }
        let scale = 1.0 + lambda.iter().map(|v| v.abs()).sum::<f64>();
        let gnorm = support.iter().map(|&i| grad[i].abs()).fold(0.0f64, f64::max);
        println!("it {it}: support={support:?} gnorm={gnorm:.3e} lambda={:?}", lambda.as_slice());
        if gnorm <= 1e-13 * scale { println!("converged"); break; }
        let k = support.len();
        let u = m.tr_mul(&lambda);
        let mut hess = DMatrix::<f64>::zeros(k, k);
        for e in 0..5 {
            if u[e] <= 0.0 { continue; }
            let w = r[e].powf(2.0 - p) / (p * (p - 1.0) * sig[e]);
            if !w.is_finite() || w <= 0.0 { continue; }
            for (a2, &i) in support.iter().enumerate() {
                let nie = m[(i, e)];
                if nie == 0.0 { continue; }
                for (b2, &j) in support.iter().enumerate() {
                    hess[(a2, b2)] += w * nie * m[(j, e)];
                }
            }
        }
        let grad_s = DVector::from_fn(k, |a2, _| grad[support[a2]]);
        let Some(chol) = Cholesky::new(hess) else { println!("  hessian singular"); break; };
        let dir = chol.solve(&grad_s);
        let mut beta = 1.0f64; let mut blocked = None;
        for (a2, &i) in support.iter().enumerate() {
            if dir[a2] < 0.0 {
                let lim = lambda[i] / (-dir[a2]);
                if lim < beta { beta = lim; blocked = Some(a2); }
            }
        }
        let g0 = obj(&lambda, &r);
        let mut t = beta; let mut moved = false;
        for _ in 0..40 {
            let mut cand = lambda.clone();
            for (a2, &i) in support.iter().enumerate() {
                cand[i] = (cand[i] + t * dir[a2]).max(0.0);
            }
            let rc = rho(&cand);
            let gc = obj(&cand, &rc);
            if gc >= g0 - 1e-16 * (1.0 + g0.abs()) {
                lambda = cand; moved = true; break;
            }
            t *= 0.5;
        }
        println!("  beta={beta:.3e} took t={t:.3e} moved={moved} blocked={blocked:?}");
        if !moved { println!("  stuck"); break; }
        if t == beta {
            if let Some(a2) = blocked { let row = support[a2]; lambda[row] = 0.0; support.remove(a2); println!("  removed row {row}"); }
        }
    }
}
