#![allow(dead_code)]

//! Independent reference computations, written straight from the definitions.

/// `g_A` for an active bitmask, from the double-sum definition. `None` when
/// the set is empty, carries no power, or has `f` at or below the 1e-9
/// feasibility floor.
pub fn brute_gain(h: &[f64], alpha: &[Vec<f64>], active_mask: u32) -> Option<f64> {
    let m = h.len();
    let is_active = |k: usize| active_mask & (1 << k) != 0;
    let mut sum = 0.0;
    let mut leak = 0.0;
    for k in 0..m {
        if !is_active(k) {
            continue;
        }
        sum += h[k];
        for (l, a) in alpha[k].iter().enumerate() {
            if !is_active(l) {
                leak += h[k] * a;
            }
        }
    }
    if sum <= 0.0 {
        return None;
    }
    let f = 1.0 - leak / sum;
    (f > 1e-9).then(|| sum / f)
}

/// Best `g` over every nonempty active set with at most `cap` harvesters.
pub fn brute_best(h: &[f64], alpha: &[Vec<f64>], cap: usize) -> (f64, u32) {
    let m = h.len();
    let full = (1u32 << m) - 1;
    let mut best = (f64::NEG_INFINITY, full);
    for mask in 1..=full {
        if (m - mask.count_ones() as usize) > cap {
            continue;
        }
        if let Some(g) = brute_gain(h, alpha, mask) {
            if g > best.0 {
                best = (g, mask);
            }
        }
    }
    best
}

pub fn uniform(m: usize, a: f64) -> Vec<Vec<f64>> {
    (0..m)
        .map(|k| (0..m).map(|l| if k == l { 0.0 } else { a }).collect())
        .collect()
}

/// Water level from the sorted active-set closed form: with the `j` largest
/// gains active, `λ = (N·budget + Σ_{i<j} 1/g_(i)) / j`, taking the largest
/// `j` whose weakest member is still above water.
pub fn closed_form_level(g: &[f64], budget: f64) -> f64 {
    let mut inv: Vec<f64> = g.iter().map(|x| 1.0 / x).collect();
    inv.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = inv.len() as f64;
    let mut prefix = 0.0;
    let mut level = f64::NAN;
    for (j, &ig) in inv.iter().enumerate() {
        prefix += ig;
        let candidate = (n * budget + prefix) / (j + 1) as f64;
        if candidate > ig {
            level = candidate;
        } else {
            break;
        }
    }
    level
}

/// Spearman rank correlation (no tie correction; inputs are continuous).
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].partial_cmp(&v[b]).unwrap());
        let mut r = vec![0.0; v.len()];
        for (rank, &i) in idx.iter().enumerate() {
            r[i] = rank as f64;
        }
        r
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let d2: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - b).powi(2)).sum();
    1.0 - 6.0 * d2 / (n * (n * n - 1.0))
}
