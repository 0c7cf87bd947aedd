/// Fraction of predictions that differ from the truth.
pub fn zero_one_loss(predictions: &[usize], truth: &[usize]) -> f64 {
    assert_eq!(predictions.len(), truth.len());
    if truth.is_empty() {
        return 0.0;
    }
    let wrong = predictions.iter().zip(truth).filter(|(p, t)| p != t).count();
    wrong as f64 / truth.len() as f64
}

/// Root mean squared error between predicted class distributions and one-hot
/// truth, averaged over every (instance, class) pair.
pub fn rmse(probabilities: &[Vec<f64>], truth: &[usize]) -> f64 {
    assert_eq!(probabilities.len(), truth.len());
    let mut sum = 0.0;
    let mut count = 0usize;
    for (p, &y) in probabilities.iter().zip(truth) {
        for (c, &pc) in p.iter().enumerate() {
            let target = if c == y { 1.0 } else { 0.0 };
            sum += (target - pc).powi(2);
        }
        count += p.len();
    }
    if count == 0 {
        0.0
    } else {
        (sum / count as f64).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_one_examples() {
        assert_eq!(zero_one_loss(&[0, 1, 2], &[0, 1, 2]), 0.0);
        assert_eq!(zero_one_loss(&[1, 0], &[0, 1]), 1.0);
        assert_eq!(zero_one_loss(&[0, 1, 1, 0], &[0, 1, 1, 1]), 0.25);
    }

    #[test]
    fn rmse_examples() {
        assert_eq!(rmse(&[vec![1.0, 0.0], vec![0.0, 1.0]], &[0, 1]), 0.0);
        assert!((rmse(&vec![vec![0.5, 0.5]; 7], &[0, 1, 1, 0, 1, 0, 0]) - 0.5).abs() < 1e-15);
        assert_eq!(rmse(&[vec![0.0, 1.0]], &[0]), 1.0);
    }

    #[test]
    fn permutation_invariant() {
        let p = vec![vec![0.2, 0.8], vec![0.6, 0.4], vec![0.9, 0.1]];
        let y = vec![1, 1, 0];
        let pred = vec![1, 0, 0];
        let perm = [2, 0, 1];
        let pp: Vec<_> = perm.iter().map(|&i| p[i].clone()).collect();
        let yp: Vec<_> = perm.iter().map(|&i| y[i]).collect();
        let predp: Vec<_> = perm.iter().map(|&i| pred[i]).collect();
        assert!((rmse(&p, &y) - rmse(&pp, &yp)).abs() < 1e-15);
        assert_eq!(zero_one_loss(&pred, &y), zero_one_loss(&predp, &yp));
    }
}
