/// Ranks with 1 = best and ties sharing the mean of their positions.
/// Non-finite values rank after every finite one.
pub fn rank_methods(values: &[f64], higher_is_better: bool) -> Vec<f64> {
    let key = |v: f64| {
        if !v.is_finite() {
            f64::INFINITY
        } else if higher_is_better {
            -v
        } else {
            v
        }
    };
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| key(values[a]).total_cmp(&key(values[b])));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && key(values[order[j + 1]]) == key(values[order[i]]) {
            j += 1;
        }
        let shared = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = shared;
        }
        i = j + 1;
    }
    ranks
}
