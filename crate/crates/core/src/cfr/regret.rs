use num_traits::Float;

/// Regret matching: probabilities proportional to positive regret, uniform when no action
/// has positive regret.
pub fn regret_matching<T: Float>(regrets: &[T]) -> Vec<T> {
    let mut out = vec![T::zero(); regrets.len()];
    regret_matching_into(regrets, &mut out);
    out
}

/// [`regret_matching`] writing into a caller-provided slice of the same length.
pub fn regret_matching_into<T: Float>(regrets: &[T], out: &mut [T]) {
    debug_assert_eq!(regrets.len(), out.len());
    debug_assert!(!regrets.is_empty());
    let positive = regrets.iter().fold(T::zero(), |acc, &r| acc + r.max(T::zero()));
    if positive > T::zero() {
        for (o, &r) in out.iter_mut().zip(regrets) {
            *o = r.max(T::zero()) / positive;
        }
    } else {
        let uniform = T::one() / T::from(regrets.len()).expect("length fits the scalar");
        out.iter_mut().for_each(|o| *o = uniform);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn matches_hand_examples() {
        let p = regret_matching(&[2.0, -1.0, 3.0]);
        assert_relative_eq!(p[0], 0.4);
        assert_eq!(p[1], 0.0);
        assert_relative_eq!(p[2], 0.6);
        assert_eq!(regret_matching(&[-5.0, -1.0]), vec![0.5, 0.5]);
        assert_eq!(regret_matching(&[0.0, 0.0, 0.0, 7.0]), vec![0.0, 0.0, 0.0, 1.0]);
        assert_eq!(regret_matching(&[0.0f32, 0.0]), vec![0.5f32, 0.5]);
    }

    proptest! {
        #[test]
        fn always_a_distribution(regrets in prop::collection::vec(-1e6f64..1e6, 1..12)) {
            let p = regret_matching(&regrets);
            prop_assert!(p.iter().all(|&x| x >= 0.0));
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }
}
