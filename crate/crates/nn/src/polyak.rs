use crate::error::{NnError, Result};
use crate::net::DenseNet;

/// Polyak averaging: `target <- tau * source + (1 - tau) * target`.
pub fn soft_update(target: &mut DenseNet, source: &DenseNet, tau: f64) -> Result<()> {
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(NnError::InvalidParameter(format!(
            "tau must lie in (0, 1], got {tau}"
        )));
    }
    if !target.same_topology(source) {
        return Err(NnError::TopologyMismatch(format!(
            "target {:?} vs source {:?}",
            target.layer_sizes(),
            source.layer_sizes()
        )));
    }
    let src = source.param_slices();
    for (t, s) in target.param_slices_mut().into_iter().zip(src) {
        for (tv, sv) in t.iter_mut().zip(s) {
            *tv = tau * sv + (1.0 - tau) * *tv;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{Matrix2D, OutputActivation, SeededRng};

    fn scalar(v: f64) -> DenseNet {
        DenseNet::from_parts(
            vec![Matrix2D::from_vec(1, 1, vec![v]).unwrap()],
            vec![vec![v]],
            OutputActivation::Identity,
        )
        .unwrap()
    }

    #[test]
    fn tau_one_copies_source() {
        let mut rng = SeededRng::new(5);
        let source = DenseNet::new(&[3, 4, 2], OutputActivation::Identity, &mut rng).unwrap();
        let mut target = DenseNet::new(&[3, 4, 2], OutputActivation::Identity, &mut rng).unwrap();
        soft_update(&mut target, &source, 1.0).unwrap();
        assert_eq!(target, source);
    }

    #[test]
    fn scalar_small_tau() {
        let mut target = scalar(0.0);
        soft_update(&mut target, &scalar(1.0), 0.01).unwrap();
        assert_eq!(target.weights()[0].data(), &[0.01]);
    }

    #[test]
    fn gap_decays_geometrically() {
        let source = scalar(1.0);
        let mut target = scalar(-3.0);
        let tau = 0.05;
        for k in 1..=200 {
            soft_update(&mut target, &source, tau).unwrap();
            let gap = 1.0 - target.weights()[0].get(0, 0);
            let expected = 4.0 * (1.0 - tau).powi(k);
            assert!((gap - expected).abs() < 1e-12, "k={k}");
        }
    }

    #[test]
    fn rejects_bad_tau_and_topology() {
        let mut target = scalar(0.0);
        assert!(soft_update(&mut target, &scalar(1.0), 0.0).is_err());
        assert!(soft_update(&mut target, &scalar(1.0), 1.5).is_err());
        let other = DenseNet::zeros(&[1, 2, 1], OutputActivation::Identity).unwrap();
        assert!(matches!(
            soft_update(&mut target, &other, 0.5),
            Err(NnError::TopologyMismatch(_))
        ));
    }
}
