use super::ConsensusError;

/// The f-trimmed mean: drop the `f` largest and `f` smallest values and
/// average the rest.
pub fn ft_average(values: &[f64], f: usize) -> Result<f64, ConsensusError> {
    if values.len() <= 2 * f {
        return Err(ConsensusError::TooFewValues { got: values.len(), f });
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let kept = &sorted[f..sorted.len() - f];
    Ok(kept.iter().sum::<f64>() / kept.len() as f64)
}
