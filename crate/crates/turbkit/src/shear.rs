use rand::Rng;
use rand_distr::StandardNormal;

use crate::forcing::ou_kernel;

/// Long-time average of 2 Z g for the two-dimensional degenerate system
///   dZ = -Z dt + sigma d(beta),   g' = -nu g + Z.
///
/// The stationary value is sigma^2 / (nu + 1): the cross moment solves
/// (d/dt) E[Zg] = -(1 + nu) E[Zg] + E[Z^2] with E[Z^2] = sigma^2 / 2.
/// Z advances by its exact kernel; g by the integrating factor with a
/// trapezoid on the forcing, so the bias is O(dt^2).
pub fn degenerate_shear_run<R: Rng>(
    nu: f64,
    sigma: f64,
    t_final: f64,
    dt: f64,
    rng: &mut R,
) -> f64 {
    assert!(nu > 0.0 && dt > 0.0 && t_final > dt);
    let (z_decay, z_std) = ou_kernel(1.0, sigma * sigma, dt);
    let g_decay = (-nu * dt).exp();

    // start Z in its stationary law; g relaxes during burn-in
    let mut z: f64 = {
        let xi: f64 = rng.sample(StandardNormal);
        xi * (sigma * sigma / 2.0).sqrt()
    };
    let mut g = 0.0;

    let burn_steps = ((10.0 / nu.min(1.0)) / dt).ceil() as u64;
    let steps = (t_final / dt).round() as u64;
    let mut acc = 0.0;
    let mut count = 0u64;
    for s in 0..burn_steps + steps {
        let z_old = z;
        let xi: f64 = rng.sample(StandardNormal);
        z = z_decay * z + z_std * xi;
        g = g_decay * g + dt / 2.0 * (g_decay * z_old + z);
        if s >= burn_steps {
            acc += 2.0 * z * g;
            count += 1;
        }
    }
    acc / count as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn unit_viscosity_reaches_one_half() {
        let mut rng = ChaCha12Rng::seed_from_u64(1001);
        let got = degenerate_shear_run(1.0, 1.0, 2e4, 0.01, &mut rng);
        assert!((got - 0.5).abs() < 0.03 * 0.5, "2 E[Zg] = {got}");
    }

    #[test]
    fn small_viscosity_approaches_one() {
        // correlation time of g is 1/nu, so the window scales with it
        let mut rng = ChaCha12Rng::seed_from_u64(1002);
        let want = 1.0 / 1.1;
        let got = degenerate_shear_run(0.1, 1.0, 2e5, 0.01, &mut rng);
        assert!((got - want).abs() < 0.03 * want, "2 E[Zg] = {got} vs {want}");
    }

    #[test]
    fn quadratic_in_noise_amplitude() {
        // same seed gives the same Brownian path, so the ratio is exact
        let base = degenerate_shear_run(0.5, 1.0, 500.0, 0.005, &mut ChaCha12Rng::seed_from_u64(7));
        let scaled =
            degenerate_shear_run(0.5, 2.0, 500.0, 0.005, &mut ChaCha12Rng::seed_from_u64(7));
        assert!(
            (scaled / base - 4.0).abs() < 1e-10,
            "ratio {}",
            scaled / base
        );
    }
}
