use crate::fourier::Periodic;

/// Curvature `-(1 + rho_x^2)^{-3/2} rho_xx` of the graph of periodic samples,
/// with spectral derivatives.
pub fn curvature(rho_samples: &[f64]) -> Vec<f64> {
    let n = rho_samples.len();
    let mut d1 = vec![0.0; n];
    let mut d2 = vec![0.0; n];
    Periodic::new(n).derivatives(rho_samples, &mut d1, &mut d2);
    d1.iter()
        .zip(&d2)
        .map(|(&s, &b)| -b / (1.0 + s * s).powf(1.5))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::periodic_nodes;

    #[test]
    fn constant_graph_is_flat() {
        assert!(curvature(&[0.3; 32]).iter().all(|&k| k.abs() < 1e-13));
    }

    #[test]
    fn small_cosine() {
        let eps = 1e-4;
        let xs = periodic_nodes(64);
        let rho: Vec<f64> = xs.iter().map(|x| eps * (3.0 * x).cos()).collect();
        for (k, x) in curvature(&rho).iter().zip(&xs) {
            assert!((k - 9.0 * eps * (3.0 * x).cos()).abs() < 1e-9);
        }
    }

    #[test]
    fn osculating_circle() {
        // (1 - cos x) / R has second-order contact at x = 0 with a circle of radius R
        // lying above the graph.
        let r = 400.0_f64;
        let rho: Vec<f64> = periodic_nodes(64)
            .iter()
            .map(|x| (1.0 - x.cos()) / r)
            .collect();
        let kappa = curvature(&rho);
        assert!((kappa[0].abs() - 1.0 / r).abs() < 1e-6);
        assert!(kappa[0] < 0.0);
    }
}
