use std::time::Instant;
use weilrep::spexample::SpExample;

fn main() {
    let t0 = Instant::now();
    let ex = SpExample::new(3, 3, 1).unwrap();
    println!("construct heisenberg: {:?}", t0.elapsed());

    let gens = ex.generators();
    let t0 = Instant::now();
    let _ = ex.weil_of(&gens[0]).unwrap();
    println!("first weil_of: {:?}", t0.elapsed());
    let t0 = Instant::now();
    let _ = ex.weil_of(&gens[1]).unwrap();
    println!("second weil_of: {:?}", t0.elapsed());

    let t0 = Instant::now();
    let u = ex.subspace_u(1, weilrep::spexample::Parity::Even).unwrap();
    println!("subspace_u(1,+): {:?} dim {}", t0.elapsed(), u.dim());

    let t0 = Instant::now();
    let lv = ex.level_of_subspace(0, weilrep::spexample::Parity::Even).unwrap();
    println!("level_of_subspace(0,+) = {lv}: {:?}", t0.elapsed());
}
