use std::f64::consts::PI;

use crate::{Error, Result};

/// Evaluation grid size for the HPD density estimate.
pub const HPD_GRID_POINTS: usize = 512;

/// Closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// Gaussian KDE evaluated on a uniform grid.
#[derive(Debug, Clone)]
pub struct KdeGrid {
    pub xs: Vec<f64>,
    pub density: Vec<f64>,
    pub bandwidth: f64,
}

impl KdeGrid {
    /// Linear interpolation of the density; zero outside the grid.
    pub fn density_at(&self, x: f64) -> f64 {
        let n = self.xs.len();
        let (x0, x1) = (self.xs[0], self.xs[n - 1]);
        if !(x0..=x1).contains(&x) {
            return 0.0;
        }
        let step = (x1 - x0) / (n - 1) as f64;
        let pos = (x - x0) / step;
        let k = (pos.floor() as usize).min(n - 2);
        let t = pos - k as f64;
        self.density[k] * (1.0 - t) + self.density[k + 1] * t
    }
}

fn mean_sd(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, var.sqrt())
}

/// Silverman's rule `1.06 * sd * n^(-1/5)`.
pub fn silverman_bandwidth(samples: &[f64]) -> f64 {
    let (_, sd) = mean_sd(samples);
    1.06 * sd * (samples.len() as f64).powf(-0.2)
}

/// Gaussian KDE with Silverman bandwidth on `points` grid nodes spanning
/// `[min - 3h, max + 3h]`. Returns `None` for a zero-spread sample.
pub fn gaussian_kde_grid(samples: &[f64], points: usize) -> Option<KdeGrid> {
    let h = silverman_bandwidth(samples);
    if !(h > 0.0) || !h.is_finite() || points < 2 {
        return None;
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let (lo, hi) = (sorted[0] - 3.0 * h, sorted[sorted.len() - 1] + 3.0 * h);
    let step = (hi - lo) / (points - 1) as f64;
    let norm = 1.0 / (sorted.len() as f64 * h * (2.0 * PI).sqrt());
    let cutoff = 9.0 * h;
    let xs: Vec<f64> = (0..points).map(|k| lo + step * k as f64).collect();
    let density = xs
        .iter()
        .map(|&g| {
            let a = sorted.partition_point(|&s| s < g - cutoff);
            let b = sorted.partition_point(|&s| s <= g + cutoff);
            sorted[a..b]
                .iter()
                .map(|&s| {
                    let u = (g - s) / h;
                    (-0.5 * u * u).exp()
                })
                .sum::<f64>()
                * norm
        })
        .collect();
    Some(KdeGrid {
        xs,
        density,
        bandwidth: h,
    })
}

/// Product-kernel Gaussian KDE on a `points x points` grid.
#[derive(Debug, Clone)]
pub struct KdeGrid2d {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// Row-major: `density[i * xs.len() + j]` is the value at `(xs[j], ys[i])`.
    pub density: Vec<f64>,
    pub bandwidth: [f64; 2],
}

fn axis(samples: &[f64], h: f64, points: usize) -> Vec<f64> {
    let lo = samples.iter().cloned().fold(f64::INFINITY, f64::min) - 3.0 * h;
    let hi = samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 3.0 * h;
    let step = (hi - lo) / (points - 1) as f64;
    (0..points).map(|k| lo + step * k as f64).collect()
}

/// Bivariate version of [`gaussian_kde_grid`] with a Silverman bandwidth
/// per axis (`n^(-1/6)` rate). `None` when either coordinate has no spread.
pub fn gaussian_kde_grid_2d(x: &[f64], y: &[f64], points: usize) -> Option<KdeGrid2d> {
    if x.len() != y.len() || x.len() < 2 || points < 2 {
        return None;
    }
    let n = x.len() as f64;
    let h = [
        mean_sd(x).1 * n.powf(-1.0 / 6.0),
        mean_sd(y).1 * n.powf(-1.0 / 6.0),
    ];
    if !h.iter().all(|v| *v > 0.0 && v.is_finite()) {
        return None;
    }
    let xs = axis(x, h[0], points);
    let ys = axis(y, h[1], points);
    // kernel values per (sample, node) along each axis, reused across the grid
    let kx: Vec<f64> = x
        .iter()
        .flat_map(|&s| {
            xs.iter()
                .map(move |&g| (-0.5 * ((g - s) / h[0]).powi(2)).exp())
        })
        .collect();
    let ky: Vec<f64> = y
        .iter()
        .flat_map(|&s| {
            ys.iter()
                .map(move |&g| (-0.5 * ((g - s) / h[1]).powi(2)).exp())
        })
        .collect();
    let norm = 1.0 / (n * 2.0 * PI * h[0] * h[1]);
    let mut density = vec![0.0; points * points];
    for s in 0..x.len() {
        let (rx, ry) = (
            &kx[s * points..(s + 1) * points],
            &ky[s * points..(s + 1) * points],
        );
        for (i, &b) in ry.iter().enumerate() {
            if b < 1e-300 {
                continue;
            }
            for (d, &a) in density[i * points..(i + 1) * points].iter_mut().zip(rx) {
                *d += a * b;
            }
        }
    }
    density.iter_mut().for_each(|d| *d *= norm);
    Some(KdeGrid2d {
        xs,
        ys,
        density,
        bandwidth: h,
    })
}

/// Highest-density region `{x : f(x) >= f_q}` where `f` is a Gaussian KDE and
/// `f_q` the `(1 - level)` quantile of `f` at the samples. Returned as disjoint
/// intervals in increasing order, endpoints interpolated between grid nodes.
pub fn hpd_region(samples: &[f64], level: f64) -> Result<Vec<Interval>> {
    if samples.len() < 100 {
        return Err(Error::InsufficientSamples {
            needed: 100,
            got: samples.len(),
        });
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "HPD level {level} not in (0, 1)"
        )));
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument(
            "non-finite sample in HPD input".into(),
        ));
    }
    let Some(kde) = gaussian_kde_grid(samples, HPD_GRID_POINTS) else {
        let x = samples[0];
        return Ok(vec![Interval { lo: x, hi: x }]);
    };
    let mut at_samples: Vec<f64> = samples.iter().map(|&x| kde.density_at(x)).collect();
    at_samples.sort_by(f64::total_cmp);
    let q_index = (((1.0 - level) * samples.len() as f64).floor() as usize).min(samples.len() - 1);
    let threshold = at_samples[q_index];

    let xs = &kde.xs;
    let f = &kde.density;
    let crossing = |a: usize, b: usize| {
        // linear interpolation of the threshold crossing between nodes a and b
        let t = (threshold - f[a]) / (f[b] - f[a]);
        xs[a] + t * (xs[b] - xs[a])
    };
    let mut out = Vec::new();
    let mut k = 0;
    while k < xs.len() {
        if f[k] < threshold {
            k += 1;
            continue;
        }
        let start = k;
        while k + 1 < xs.len() && f[k + 1] >= threshold {
            k += 1;
        }
        let lo = if start == 0 {
            xs[0]
        } else {
            crossing(start - 1, start)
        };
        let hi = if k + 1 == xs.len() {
            xs[k]
        } else {
            crossing(k + 1, k)
        };
        out.push(Interval { lo, hi });
        k += 1;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Stream;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn normals(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = Stream::root(seed).rng();
        (0..n).map(|_| rng.sample(StandardNormal)).collect()
    }

    #[test]
    fn standard_normal_90() {
        let s = normals(100_000, 1);
        let r = hpd_region(&s, 0.9).unwrap();
        assert_eq!(r.len(), 1);
        assert!((r[0].lo + 1.645).abs() < 0.1, "{r:?}");
        assert!((r[0].hi - 1.645).abs() < 0.1, "{r:?}");
    }

    #[test]
    fn identical_samples() {
        let r = hpd_region(&[2.5; 200], 0.9).unwrap();
        assert_eq!(r.len(), 1);
        assert!(r[0].contains(2.5));
    }

    #[test]
    fn separated_modes_give_two_intervals() {
        let mut rng = Stream::root(2).rng();
        let s: Vec<f64> = (0..10_000)
            .map(|i| {
                let c = if i % 2 == 0 { -5.0 } else { 5.0 };
                c + 0.1 * rng.sample::<f64, _>(StandardNormal)
            })
            .collect();
        let r = hpd_region(&s, 0.9).unwrap();
        assert_eq!(r.len(), 2, "{r:?}");
        assert!(r[0].contains(-5.0) && r[1].contains(5.0));
    }

    #[test]
    fn too_few_samples() {
        assert!(matches!(
            hpd_region(&[0.0; 99], 0.9),
            Err(Error::InsufficientSamples {
                needed: 100,
                got: 99
            })
        ));
        assert!(hpd_region(&normals(200, 1), 1.0).is_err());
    }

    #[test]
    fn nested_levels() {
        for seed in 0..10 {
            let mut rng = Stream::root(seed + 100).rng();
            let s: Vec<f64> = (0..2000)
                .map(|_| {
                    let z: f64 = rng.sample(StandardNormal);
                    if rng.random::<f64>() < 0.3 {
                        4.0 + 0.5 * z
                    } else {
                        z
                    }
                })
                .collect();
            let inner = hpd_region(&s, 0.5).unwrap();
            let outer = hpd_region(&s, 0.9).unwrap();
            for iv in &inner {
                assert!(
                    outer
                        .iter()
                        .any(|o| o.lo <= iv.lo + 1e-12 && iv.hi <= o.hi + 1e-12),
                    "{iv:?} not inside {outer:?}"
                );
            }
        }
    }

    #[test]
    fn kde_grid_integrates_to_one() {
        let s = normals(5000, 9);
        let g = gaussian_kde_grid(&s, 512).unwrap();
        let step = g.xs[1] - g.xs[0];
        let integral: f64 = g
            .density
            .windows(2)
            .map(|w| 0.5 * (w[0] + w[1]) * step)
            .sum();
        assert!((integral - 1.0).abs() < 0.01, "{integral}");
    }

    #[test]
    fn kde_grid_2d_integrates_to_one() {
        let (a, b) = (normals(2000, 10), normals(2000, 11));
        let y: Vec<f64> = a.iter().zip(&b).map(|(u, v)| 0.6 * u + 0.8 * v).collect();
        let g = gaussian_kde_grid_2d(&a, &y, 80).unwrap();
        let (dx, dy) = (g.xs[1] - g.xs[0], g.ys[1] - g.ys[0]);
        let m = g.xs.len();
        let mut integral = 0.0;
        for i in 0..m - 1 {
            for j in 0..m - 1 {
                let c = [
                    i * m + j,
                    i * m + j + 1,
                    (i + 1) * m + j,
                    (i + 1) * m + j + 1,
                ];
                integral += 0.25 * dx * dy * c.iter().map(|&k| g.density[k]).sum::<f64>();
            }
        }
        assert!((integral - 1.0).abs() < 0.01, "{integral}");
        assert!(gaussian_kde_grid_2d(&[1.0; 10], &a[..10], 10).is_none());
    }
}
