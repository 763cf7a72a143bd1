//! Helpers shared by integration tests.

/// Every atlas gap is free of eigenvalues beyond a 2% margin and every
/// component edge matches the extreme eigenvalue of its cluster within 2%
/// of `λ_r`.
pub fn atlas_matches(intervals: &[(f64, f64)], ev: &[f64], lambda_r: f64) -> (bool, String) {
    let tol = 0.02 * lambda_r;
    let mut ok = true;
    let mut notes = Vec::new();
    for w in intervals.windows(2) {
        let (lo, hi) = (w[0].1 + tol, w[1].0 - tol);
        let inside = ev.iter().filter(|&&l| l > lo && l < hi).count();
        ok &= inside == 0;
        notes.push(format!("{inside} eigenvalues inside gap ({:.4}, {:.4})", w[0].1, w[1].0));
    }
    let mut worst = 0.0f64;
    for (k, &(a, b)) in intervals.iter().enumerate() {
        let lo_cut = if k == 0 { f64::NEG_INFINITY } else { 0.5 * (intervals[k - 1].1 + a) };
        let hi_cut = if k + 1 == intervals.len() { f64::INFINITY } else { 0.5 * (b + intervals[k + 1].0) };
        let cluster: Vec<f64> = ev.iter().copied().filter(|&l| l > lo_cut && l <= hi_cut).collect();
        if cluster.is_empty() {
            ok = false;
            notes.push(format!("component ({a:.4}, {b:.4}) has no eigenvalues"));
            continue;
        }
        let (cmin, cmax) = cluster.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(p, q), &l| (p.min(l), q.max(l)));
        worst = worst.max((cmin - a).abs()).max((cmax - b).abs());
    }
    ok &= worst <= tol;
    notes.push(format!("largest edge mismatch {:.4} = {:.2}% of lambda_r (<= 2%)", worst, 100.0 * worst / lambda_r));
    (ok, notes.join(", "))
}
