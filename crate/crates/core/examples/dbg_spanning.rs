use shadowlab::entropy::{spanning_number_on_grid, StartSet};
use shadowlab::SmoothMap;

fn main() {
    let map = SmoothMap::doubling();
    for n in [5, 6, 7, 8, 9] {
        let est = spanning_number_on_grid(&map, &[], n, 0.1, 11, 0.1, StartSet::Domain, "d").unwrap();
        println!("doubling n={n}: r={} sep={}", est.r, est.separated_lower);
    }
    let map = SmoothMap::logistic(4.0);
    let crit = [0.5];
    for n in 1..=8 {
        let est = spanning_number_on_grid(&map, &crit, n, 0.1, 10, 0.05, StartSet::Domain, "d").unwrap();
        println!("logistic n={n}: r={} sep={}", est.r, est.separated_lower);
    }
    for n in [4, 6, 8] {
        let c = spanning_number_on_grid(&map, &crit, n, 0.2, 10, 0.1, StartSet::Domain, "d").unwrap();
        let f = spanning_number_on_grid(&map, &crit, n, 0.1, 10, 0.1, StartSet::Domain, "d").unwrap();
        println!("logistic n={n}: sep(0.2)={} r(0.1)={}", c.separated_lower, f.r);
    }
}
