use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::model::Dataset;

/// One of the ten simulation designs at sample size `n`.
///
/// All designs share `X1 = Z1`, `X2 = (Z1 + Z2)/√2` with independent
/// standard normal `Z1, Z2`; designs 6–10 add `X3..X10` i.i.d. N(0, 1).
/// Treatment is `D = 1{D* > 0}`:
///
/// | id | latent index `D*`                          | `ε`        |
/// |----|--------------------------------------------|------------|
/// | 1  | `1 + X1 + X2 − ε`                          | N(0, 1)    |
/// | 2  | `1 + X1 + X2 + X1·X2 − ε`                  | N(0, 1)    |
/// | 3  | `(1 + X1 + X2)² − ε`                       | N(0, 1)    |
/// | 4  | `1 + X1 + X2 − ε`                          | χ²₁        |
/// | 5  | `1 + X1 + X2 − ε`                          | U(−1, 1)   |
/// | 6  | `1 + ΣX − ε`                               | N(0, 10)   |
/// | 7  | `1 + ΣX − X1·X2 − ε`                       | N(0, 10)   |
/// | 8  | `1 + ΣX − X1·Σ_{k=2..5} Xk − ε`            | N(0, 10)   |
/// | 9  | `1 + ΣX − Σ_{k=1..5} Xk² − ε`              | N(0, 10)   |
/// | 10 | `1 + ΣX − X1·Σ_{k=2..5} Xk − Σ_{k=1..5} Xk² − ε` | N(0, 10) |
///
/// `N(0, 10)` has variance 10. The null model is a probit on the
/// intercept and main effects only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DgpSpec {
    id: u8,
    n: usize,
}

impl DgpSpec {
    pub fn new(id: u8, n: usize) -> Result<Self> {
        if !(1..=10).contains(&id) {
            return Err(Error::InvalidInput(format!("DGP id {id} not in 1..=10")));
        }
        if n < 30 {
            return Err(Error::InvalidInput(format!("DGP sample size {n} below 30")));
        }
        Ok(Self { id, n })
    }

    pub fn id(&self) -> u8 {
        self.id
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of covariates (excluding the intercept).
    pub fn dim(&self) -> usize {
        if self.id <= 5 {
            2
        } else {
            10
        }
    }

    /// Whether the probit null model is correctly specified.
    pub fn is_null(&self) -> bool {
        matches!(self.id, 1 | 6)
    }

    fn latent(&self, x: &[f64], eps: f64) -> f64 {
        let lin = 1.0 + x.iter().sum::<f64>();
        let inter = || x[0] * (x[1] + x[2] + x[3] + x[4]);
        let squares = || x[..5].iter().map(|v| v * v).sum::<f64>();
        match self.id {
            1 | 4 | 5 | 6 => lin - eps,
            2 => lin + x[0] * x[1] - eps,
            3 => lin * lin - eps,
            7 => lin - x[0] * x[1] - eps,
            8 => lin - inter() - eps,
            9 => lin - squares() - eps,
            10 => lin - inter() - squares() - eps,
            _ => unreachable!("validated in DgpSpec::new"),
        }
    }

    fn draw_eps<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.id {
            1..=3 => rng.sample(StandardNormal),
            4 => {
                let z: f64 = rng.sample(StandardNormal);
                z * z
            }
            5 => rng.random_range(-1.0..1.0),
            _ => 10f64.sqrt() * rng.sample::<f64, _>(StandardNormal),
        }
    }
}

/// Raw draw: treatment and covariates `X1..Xp` (no intercept).
#[derive(Debug, Clone, PartialEq)]
pub struct DgpDraw {
    pub spec: DgpSpec,
    pub d: Vec<f64>,
    /// `n × p`.
    pub x: DMatrix<f64>,
}

impl DgpDraw {
    /// `(1, X1, ..., Xp)`, the regressors of the null model.
    pub fn null_design(&self) -> DMatrix<f64> {
        let n = self.x.nrows();
        let p = self.x.ncols();
        DMatrix::from_fn(
            n,
            p + 1,
            |i, j| if j == 0 { 1.0 } else { self.x[(i, j - 1)] },
        )
    }

    pub fn null_names(&self) -> Vec<String> {
        std::iter::once("intercept".to_string())
            .chain((1..=self.x.ncols()).map(|j| format!("x{j}")))
            .collect()
    }

    pub fn into_dataset(self) -> Result<Dataset> {
        let x = self.null_design();
        let names = self.null_names();
        Dataset::new(self.d, x, names)
    }
}

/// Draws one sample without checking that both classes occur.
pub fn generate_draw<R: Rng + ?Sized>(spec: &DgpSpec, rng: &mut R) -> DgpDraw {
    let n = spec.n;
    let p = spec.dim();
    let mut x = DMatrix::zeros(n, p);
    let mut d = Vec::with_capacity(n);
    let mut row = vec![0.0; p];
    for i in 0..n {
        let z1: f64 = rng.sample(StandardNormal);
        let z2: f64 = rng.sample(StandardNormal);
        row[0] = z1;
        row[1] = (z1 + z2) / 2f64.sqrt();
        for v in row.iter_mut().skip(2) {
            *v = rng.sample(StandardNormal);
        }
        let eps = spec.draw_eps(rng);
        d.push(if spec.latent(&row, eps) > 0.0 {
            1.0
        } else {
            0.0
        });
        for (j, &v) in row.iter().enumerate() {
            x[(i, j)] = v;
        }
    }
    DgpDraw { spec: *spec, d, x }
}

/// Draws a [`Dataset`] with the null-model design `(1, X1, ..., Xp)`.
///
/// Fails with `DegenerateDraw` when every unit lands in the same class.
pub fn generate<R: Rng + ?Sized>(spec: &DgpSpec, rng: &mut R) -> Result<Dataset> {
    let draw = generate_draw(spec, rng);
    let ones = draw.d.iter().filter(|&&v| v == 1.0).count();
    if ones == 0 || ones == draw.d.len() {
        return Err(Error::DegenerateDraw { attempts: 1 });
    }
    draw.into_dataset()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::stream_rng;

    #[test]
    fn spec_validation() {
        assert!(DgpSpec::new(0, 100).is_err());
        assert!(DgpSpec::new(11, 100).is_err());
        assert!(DgpSpec::new(3, 29).is_err());
        assert_eq!(DgpSpec::new(6, 30).unwrap().dim(), 10);
    }

    #[test]
    fn latent_indices() {
        let x2 = [0.5, -1.0];
        let x10 = [0.5, -1.0, 2.0, 0.1, 0.2, 1.0, 1.0, 1.0, 1.0, 1.0];
        let s = |id| DgpSpec::new(id, 30).unwrap();
        assert_eq!(s(1).latent(&x2, 0.3), 1.0 + 0.5 - 1.0 - 0.3);
        assert_eq!(s(2).latent(&x2, 0.0), 0.5 - 0.5);
        assert_eq!(s(3).latent(&x2, 0.25), 0.25 - 0.25);
        let lin = 1.0 + x10.iter().sum::<f64>();
        assert_eq!(s(6).latent(&x10, 1.0), lin - 1.0);
        assert_eq!(s(7).latent(&x10, 0.0), lin + 0.5);
        let inter = 0.5 * (-1.0 + 2.0 + 0.1 + 0.2);
        let sq = 0.25 + 1.0 + 4.0 + 0.01 + 0.04;
        assert!((s(8).latent(&x10, 0.0) - (lin - inter)).abs() < 1e-15);
        assert!((s(9).latent(&x10, 0.0) - (lin - sq)).abs() < 1e-15);
        assert!((s(10).latent(&x10, 0.0) - (lin - inter - sq)).abs() < 1e-15);
    }

    #[test]
    fn error_laws() {
        let mut rng = stream_rng(1, 0);
        let m = 200_000;
        let moments = |id: u8, rng: &mut rand_chacha::ChaCha8Rng| {
            let s = DgpSpec::new(id, 30).unwrap();
            let v: Vec<f64> = (0..m).map(|_| s.draw_eps(rng)).collect();
            let mean = v.iter().sum::<f64>() / m as f64;
            let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / m as f64;
            (mean, var, v)
        };
        let (mean, var, _) = moments(1, &mut rng);
        assert!(mean.abs() < 0.01 && (var - 1.0).abs() < 0.02);
        let (mean, var, v) = moments(4, &mut rng);
        assert!((mean - 1.0).abs() < 0.02 && (var - 2.0).abs() < 0.06);
        assert!(v.iter().all(|&e| e >= 0.0));
        let (mean, var, v) = moments(5, &mut rng);
        assert!(mean.abs() < 0.01 && (var - 1.0 / 3.0).abs() < 0.01);
        assert!(v.iter().all(|&e| (-1.0..1.0).contains(&e)));
        let (mean, var, _) = moments(8, &mut rng);
        assert!(mean.abs() < 0.03 && (var - 10.0).abs() < 0.2);
    }

    #[test]
    fn covariate_correlation() {
        let mut rng = stream_rng(5, 0);
        let draw = generate_draw(&DgpSpec::new(6, 100_000).unwrap(), &mut rng);
        let corr = |a: usize, b: usize| {
            let (x, y) = (draw.x.column(a), draw.x.column(b));
            let (mx, my) = (x.mean(), y.mean());
            let cov: f64 = x
                .iter()
                .zip(y.iter())
                .map(|(p, q)| (p - mx) * (q - my))
                .sum();
            let vx: f64 = x.iter().map(|p| (p - mx).powi(2)).sum();
            let vy: f64 = y.iter().map(|q| (q - my).powi(2)).sum();
            cov / (vx * vy).sqrt()
        };
        assert!((corr(0, 1) - std::f64::consts::FRAC_1_SQRT_2).abs() <= 0.01);
        assert!(corr(0, 5).abs() <= 0.02);
        assert!(corr(2, 3).abs() <= 0.02);
    }

    #[test]
    fn null_design_shape() {
        let mut rng = stream_rng(2, 0);
        let ds = generate(&DgpSpec::new(1, 40).unwrap(), &mut rng).unwrap();
        assert_eq!(ds.k(), 3);
        assert!(ds.x().column(0).iter().all(|&v| v == 1.0));
        let ds = generate(&DgpSpec::new(9, 40).unwrap(), &mut rng).unwrap();
        assert_eq!(ds.k(), 11);
        assert_eq!(ds.names()[0], "intercept");
    }

    #[test]
    fn probit_recovers_dgp1_coefficients() {
        let mut rng = stream_rng(17, 0);
        let ds = generate(&DgpSpec::new(1, 100_000).unwrap(), &mut rng).unwrap();
        let fit = crate::fit_mle(&ds, crate::LinkFamily::Probit).unwrap();
        for c in 0..3 {
            assert!((fit.theta[c] - 1.0).abs() <= 0.05, "{}", fit.theta);
        }
    }

    #[test]
    fn same_stream_same_draw() {
        let spec = DgpSpec::new(7, 60).unwrap();
        let a = generate_draw(&spec, &mut stream_rng(9, 1));
        let b = generate_draw(&spec, &mut stream_rng(9, 1));
        assert_eq!(a, b);
    }
}
