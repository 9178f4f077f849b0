use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum FairnessError {
    #[error("no per-thread counts")]
    Empty,
    #[error("every thread completed zero operations")]
    AllZero,
}

/// Mean per-thread operation count divided by the largest count.
pub fn compute_fairness(counts: &[u64]) -> Result<f64, FairnessError> {
    if counts.is_empty() {
        return Err(FairnessError::Empty);
    }
    let max = *counts.iter().max().unwrap();
    if max == 0 {
        return Err(FairnessError::AllZero);
    }
    let mean = counts.iter().map(|&c| c as f64).sum::<f64>() / counts.len() as f64;
    Ok(mean / max as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_computed() {
        assert_eq!(compute_fairness(&[100, 100, 100, 100]), Ok(1.0));
        assert_eq!(compute_fairness(&[50, 100]), Ok(0.75));
        assert_eq!(compute_fairness(&[25, 100, 100, 175]), Ok(100.0 / 175.0));
        assert_eq!(compute_fairness(&[0, 0]), Err(FairnessError::AllZero));
        assert_eq!(compute_fairness(&[]), Err(FairnessError::Empty));
    }
}
