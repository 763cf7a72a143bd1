use rmt_edge::matrix_lab::*;
use std::time::Instant;
fn main() {
    for &(m, n) in &[(500usize, 500usize), (1000, 1000), (2000, 4000)] {
        let x = sample_entries(&EntryDistribution::gaussian(), m, n, 1).unwrap();
        let model = CovarianceModel::null(m, n).unwrap();
        let t = Instant::now();
        let e = eigens(&model, &x, EigenMethod::Full).unwrap();
        let t1 = t.elapsed();
        let t = Instant::now();
        let k = eigens(&model, &x, EigenMethod::TopK(1)).unwrap();
        println!("{m}x{n}: full {:?} topk {:?} l1 {} {}", t1, t.elapsed(), e.eigenvalues[0], k.eigenvalues[0]);
    }
}
