use exitlab::action::*;
use exitlab::model::presets;
use nalgebra::DVector;
use std::time::Instant;

fn main() {
    let (model, _) = presets::two_state_modulated();
    for state in 0..2 {
        for theta in [0.2f64, 1.0, 2.5] {
            let (x, _) = model.domain.boundary_point(theta).unwrap();
            let t0 = Instant::now();
            let r = quasipotential(&model, &x, 0.3, state, 64).unwrap();
            println!(
                "state {} theta {:.2}: V = {:.6}, iters {}, grad {:.2e}, conv {}, {:?}",
                state, theta, r.value, r.iterations, r.grad_norm, r.converged, t0.elapsed()
            );
        }
    }
    let t0 = Instant::now();
    let m = boundary_min(&model, 0.3, 1).unwrap();
    println!("boundary_min state 2: M = {:.6} at {:.4}, {:?}", m.value, m.param, t0.elapsed());
}
