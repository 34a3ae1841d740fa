//! Karnik-Mendel centroid of one interval type-2 set, checked against brute
//! force over every upper/lower assignment.

use fuzzy_histspec::membership::{km_boundary, weighted_centroid, Side};

fn main() {
    let start = 40;
    let umf: Vec<f64> = (0..12).map(|i| (-((i as f64 - 5.5) / 3.0).powi(2)).exp()).collect();
    let lmf: Vec<f64> = umf.iter().map(|u| 0.6 * u).collect();
    let m = 2.0;

    let left = km_boundary(&umf, &lmf, start, m, Side::Left).expect("non-empty cluster");
    let right = km_boundary(&umf, &lmf, start, m, Side::Right).expect("non-empty cluster");
    println!("v_L = {:.6} (switch after {}, {} iterations)", left.centroid, left.switch_index, left.iterations);
    println!("v_R = {:.6} (switch after {}, {} iterations)", right.centroid, right.switch_index, right.iterations);
    println!("center = {:.6}", 0.5 * (left.centroid + right.centroid));

    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for mask in 0u32..1 << umf.len() {
        let u: Vec<f64> = (0..umf.len())
            .map(|i| if mask >> i & 1 == 1 { umf[i] } else { lmf[i] })
            .collect();
        if let Some(c) = weighted_centroid(start, &u, m) {
            lo = lo.min(c);
            hi = hi.max(c);
        }
    }
    println!("brute force over {} assignments: [{lo:.6}, {hi:.6}]", 1u32 << umf.len());
}
