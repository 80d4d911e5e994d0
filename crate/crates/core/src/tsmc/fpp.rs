use super::importance::{is_update, ImportanceUpdate};
use super::trace::TsmcTrace;
use crate::{Error, Result};

/// Default number of uniform grid cells over `[0, 1]`.
pub const DEFAULT_GRID: usize = 100;

/// Evidence-maximising fixed power prior.
#[derive(Debug, Clone)]
pub struct FppResult {
    pub alpha_star: f64,
    /// Weighted chain-1 particles at `alpha_star`.
    pub update: ImportanceUpdate,
    /// `(alpha, log C_T(alpha))` over the evaluated grid, ascending in alpha.
    pub log_ct_grid: Vec<(f64, f64)>,
}

/// Maximises `log C_T(alpha)` over the stored ladder merged with
/// `{0, 1/P, ..., 1}`. Ties go to the smaller alpha.
pub fn grid_search_me(trace: &TsmcTrace, grid: usize) -> Result<FppResult> {
    if grid < 2 {
        return Err(Error::InvalidArgument(format!(
            "grid size must be >= 2, got {grid}"
        )));
    }
    let mut alphas: Vec<f64> = (0..=grid).map(|j| j as f64 / grid as f64).collect();
    alphas.extend(trace.rungs.iter().map(|r| r.alpha));
    alphas.sort_by(f64::total_cmp);
    alphas.dedup();

    let mut log_ct_grid = Vec::with_capacity(alphas.len());
    let mut best: Option<(f64, f64)> = None;
    for &a in &alphas {
        let u = is_update(trace, a)?;
        let v = u.log_ct();
        log_ct_grid.push((a, v));
        if v.is_finite() && best.is_none_or(|(_, b)| v > b) {
            best = Some((a, v));
        }
    }
    let (alpha_star, _) = best
        .ok_or_else(|| Error::DegenerateWeights("no finite evidence on the alpha grid".into()))?;
    Ok(FppResult {
        alpha_star,
        update: is_update(trace, alpha_star)?,
        log_ct_grid,
    })
}
