use log::warn;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Smallest p-value fed into the combination; zeros are raised to it.
pub const DEFAULT_P_FLOOR: f64 = 1e-12;

/// Upper tail of the chi-square distribution with `2 * half_dof` degrees of freedom.
///
/// Uses the closed form `exp(-x/2) * sum_{i < half_dof} (x/2)^i / i!`, summed in
/// log space so that large populations do not underflow.
pub fn chi_square_even_sf<F: Scalar>(x: F, half_dof: usize) -> F {
    assert!(half_dof >= 1);
    if x <= F::zero() {
        return F::one();
    }
    let y = x / F::from_f64_lossy(2.0);
    let ln_y = y.ln();
    let mut log_terms = Vec::with_capacity(half_dof);
    let mut current = -y;
    log_terms.push(current);
    for i in 1..half_dof {
        current = current + ln_y - F::from_usize_lossy(i).ln();
        log_terms.push(current);
    }
    let max = log_terms.iter().copied().fold(F::neg_infinity(), F::max);
    let sum: F = log_terms.iter().map(|&t| (t - max).exp()).sum();
    (max + sum.ln()).exp().min(F::one())
}

/// Fisher's combination of independent p-values.
///
/// The statistic `-2 sum ln p` is referred to chi-square with `2n` degrees of
/// freedom. Zeros are raised to `floor` with a warning. Log terms are summed in
/// sorted order, so the result does not depend on the input order.
pub fn fisher_combine<F: Scalar>(p_values: &[F], floor: F) -> Result<F> {
    if p_values.is_empty() {
        return Err(Error::Empty("no p-values to combine".into()));
    }
    let mut floored = 0usize;
    let mut logs = Vec::with_capacity(p_values.len());
    for &p in p_values {
        if p.is_nan() || p < F::zero() || p > F::one() {
            return Err(Error::InvalidParam(format!("p-value {p} outside [0, 1]")));
        }
        let p = if p < floor {
            floored += 1;
            floor
        } else {
            p
        };
        logs.push(p.ln());
    }
    if floored > 0 {
        warn!("{floored} p-values below {floor} were raised to the floor");
    }
    if logs.len() == 1 {
        // with two degrees of freedom the tail is exp(-stat / 2) = p
        return Ok(p_values[0].max(floor));
    }
    logs.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite logs"));
    let stat = F::from_f64_lossy(-2.0) * logs.into_iter().sum::<F>();
    Ok(chi_square_even_sf(stat, p_values.len()))
}
