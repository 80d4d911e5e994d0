use rand::Rng;

/// Stratified resampling: one uniform draw in each stratum `[j/M, (j+1)/M)`,
/// mapped through the cumulative weights. Returns ancestor indices in
/// non-decreasing order.
pub fn stratified_resample<R: Rng + ?Sized>(
    weights: &[f64],
    count: usize,
    rng: &mut R,
) -> Vec<usize> {
    assert!(!weights.is_empty() && count >= 1);
    let total: f64 = weights.iter().sum();
    let m = count as f64;
    let mut out = Vec::with_capacity(count);
    let mut cumulative = weights[0] / total;
    let mut i = 0;
    let last = weights.len() - 1;
    for j in 0..count {
        let u = (j as f64 + rng.random::<f64>()) / m;
        while u >= cumulative && i < last {
            i += 1;
            cumulative += weights[i] / total;
        }
        out.push(i);
    }
    out
}

/// Single draw from a categorical distribution over normalised weights.
pub fn categorical_draw<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    // round-off: fall back to the last index with positive mass
    weights
        .iter()
        .rposition(|w| *w > 0.0)
        .unwrap_or(weights.len() - 1)
}
