use std::sync::Arc;

use ncadmm_core::SparseMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

use crate::spec::{Noise, QuantileError, QuantileSpec};

/// Design matrix, responses and the planted sparse signal.
#[derive(Debug, Clone)]
pub struct QuantileDataset {
    /// `n × d`, stored fully populated.
    pub phi: Arc<SparseMatrix>,
    pub w: Vec<f64>,
    pub x_true: Vec<f64>,
    /// The noise draw `z = w − Φ x_true`.
    pub z: Vec<f64>,
}

/// Draws `Φ` with i.i.d. `N(0,1)` entries (row-major order), then the noise
/// `z_1, …, z_n`, all from one ChaCha8 stream seeded with `spec.seed`.
/// `x_true` has ones in its first `s_star` coordinates.
pub fn generate_dataset(spec: &QuantileSpec) -> Result<QuantileDataset, QuantileError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let entries: Vec<f64> = (0..spec.n * spec.d).map(|_| rng.sample(StandardNormal)).collect();
    let phi = SparseMatrix::from_dense_row_major(spec.n, spec.d, entries)?;

    let z: Vec<f64> = match spec.noise {
        Noise::Zero => vec![0.0; spec.n],
        Noise::Gaussian => (0..spec.n).map(|_| rng.sample(StandardNormal)).collect(),
        Noise::StudentT { df } => {
            let chi = ChiSquared::new(df).map_err(|e| QuantileError::InvalidSpec {
                field: "noise",
                message: e.to_string(),
            })?;
            (0..spec.n)
                .map(|_| {
                    let normal: f64 = rng.sample(StandardNormal);
                    normal / (chi.sample(&mut rng) / df).sqrt()
                })
                .collect()
        }
    };

    let mut x_true = vec![0.0; spec.d];
    x_true[..spec.s_star].fill(1.0);
    let fit = phi.mul_vec(&x_true)?;
    let w = fit.iter().zip(&z).map(|(f, z)| f + z).collect();
    Ok(QuantileDataset { phi: Arc::new(phi), w, x_true, z })
}
