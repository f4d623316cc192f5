use super::NumericsError;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineFit {
    pub intercept: f64,
    pub slope: f64,
    /// RMS misfit.
    pub residual: f64,
}

impl AffineFit {
    pub fn eval(&self, t: f64) -> f64 {
        self.intercept + self.slope * t
    }
}

/// Least-squares line through `(t, y)` samples.
pub fn fit_affine(samples: &[(f64, f64)]) -> Result<AffineFit, NumericsError> {
    let k = samples.len() as f64;
    if samples.len() < 2 {
        return Err(NumericsError::DegenerateFit);
    }
    let tm = samples.iter().map(|s| s.0).sum::<f64>() / k;
    let ym = samples.iter().map(|s| s.1).sum::<f64>() / k;
    let stt: f64 = samples.iter().map(|s| (s.0 - tm) * (s.0 - tm)).sum();
    if !(stt > 1e-300) {
        return Err(NumericsError::DegenerateFit);
    }
    let sty: f64 = samples.iter().map(|s| (s.0 - tm) * (s.1 - ym)).sum();
    let slope = sty / stt;
    let intercept = ym - slope * tm;
    let rss: f64 = samples
        .iter()
        .map(|s| {
            let e = s.1 - intercept - slope * s.0;
            e * e
        })
        .sum();
    Ok(AffineFit {
        intercept,
        slope,
        residual: (rss / k).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn two_points() {
        let f = fit_affine(&[(1.0, 2.0), (2.0, 4.0)]).unwrap();
        assert!(f.intercept.abs() < 1e-15);
        assert!((f.slope - 2.0).abs() < 1e-15);
        assert!(f.residual < 1e-15);
    }

    #[test]
    fn constant_data() {
        let f = fit_affine(&[(0.0, 3.0), (1.0, 3.0), (5.0, 3.0)]).unwrap();
        assert_eq!(f.slope, 0.0);
    }

    #[test]
    fn degenerate() {
        assert!(fit_affine(&[(1.0, 2.0), (1.0, 3.0)]).is_err());
        assert!(fit_affine(&[(1.0, 2.0)]).is_err());
    }

    #[test]
    fn noisy_line() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let noise = 1e-3;
        let s: Vec<(f64, f64)> = (0..200)
            .map(|i| {
                let t = i as f64 / 100.0;
                (t, 0.5 - 1.5 * t + rng.gen_range(-noise..noise))
            })
            .collect();
        let f = fit_affine(&s).unwrap();
        assert!((f.intercept - 0.5).abs() < noise);
        assert!((f.slope + 1.5).abs() < noise);
        assert!(f.residual < noise);
    }
}
