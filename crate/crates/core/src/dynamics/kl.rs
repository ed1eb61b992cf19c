use crate::error::{Error, Result};
use crate::game::JointStrategy;

/// `D_KL(y‖x) = Σ_k Σ_i y_ki ln(y_ki / x_ki)`, with `0 ln 0 = 0`.
pub fn kl_divergence(y: &JointStrategy, x: &JointStrategy) -> Result<f64> {
    if y.offsets() != x.offsets() {
        return Err(Error::ShapeMismatch(format!(
            "KL between strategies with action counts {:?} and {:?}",
            y.action_counts(),
            x.action_counts()
        )));
    }
    let mut total = 0.0;
    for (k, (yk, xk)) in y.agents().zip(x.agents()).enumerate() {
        total += agent_kl(yk, xk).map_err(|action| Error::InfiniteDivergence { agent: k, action })?;
    }
    Ok(total)
}

/// Per-agent divergence; `Err(i)` names an action with `y_i > 0 = x_i`.
pub(crate) fn agent_kl(y: &[f64], x: &[f64]) -> std::result::Result<f64, usize> {
    let mut d = 0.0;
    for (i, (&yi, &xi)) in y.iter().zip(x).enumerate() {
        if yi > 0.0 {
            if xi <= 0.0 {
                return Err(i);
            }
            d += yi * (yi / xi).ln();
        }
    }
    Ok(d)
}
