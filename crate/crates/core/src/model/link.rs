use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

/// Fitted probabilities are kept inside `[PROB_FLOOR, 1 - PROB_FLOOR]`.
pub const PROB_FLOOR: f64 = 1e-12;

/// Link function `F` in `q(x, θ) = F(x'θ)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkFamily {
    Probit,
    Logit,
}

impl LinkFamily {
    /// Unclamped `F(z)`.
    pub fn cdf(self, z: f64) -> f64 {
        match self {
            LinkFamily::Probit => 0.5 * erfc(-z * FRAC_1_SQRT_2),
            LinkFamily::Logit => {
                if z >= 0.0 {
                    1.0 / (1.0 + (-z).exp())
                } else {
                    let e = z.exp();
                    e / (1.0 + e)
                }
            }
        }
    }

    /// Unclamped `1 - F(z)`, accurate in the upper tail.
    pub fn survival(self, z: f64) -> f64 {
        // Both families are symmetric about zero.
        self.cdf(-z)
    }

    /// `F'(z)`.
    pub fn density(self, z: f64) -> f64 {
        match self {
            LinkFamily::Probit => (-0.5 * z * z).exp() / (2.0 * PI).sqrt(),
            LinkFamily::Logit => {
                let p = self.cdf(z);
                p * (1.0 - p)
            }
        }
    }

    /// `F''(z)`.
    pub fn density_slope(self, z: f64) -> f64 {
        match self {
            LinkFamily::Probit => -z * self.density(z),
            LinkFamily::Logit => {
                let p = self.cdf(z);
                p * (1.0 - p) * (1.0 - 2.0 * p)
            }
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            LinkFamily::Probit => "probit",
            LinkFamily::Logit => "logit",
        }
    }
}

impl fmt::Display for LinkFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LinkFamily {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "probit" => Ok(LinkFamily::Probit),
            "logit" => Ok(LinkFamily::Logit),
            other => Err(format!("unknown link `{other}` (expected probit or logit)")),
        }
    }
}

pub(crate) fn clamp_prob(p: f64) -> f64 {
    p.clamp(PROB_FLOOR, 1.0 - PROB_FLOOR)
}

/// `F(z)` clamped to `[PROB_FLOOR, 1 - PROB_FLOOR]`.
pub fn link_eval(link: LinkFamily, z: f64) -> f64 {
    clamp_prob(link.cdf(z))
}

/// Exact derivative of the (unclamped) link at `z`.
pub fn link_density(link: LinkFamily, z: f64) -> f64 {
    link.density(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn symmetric_points() {
        assert_eq!(link_eval(LinkFamily::Probit, 0.0), 0.5);
        assert_eq!(link_eval(LinkFamily::Logit, 0.0), 0.5);
        assert_eq!(link_density(LinkFamily::Logit, 0.0), 0.25);
    }

    #[test]
    fn probit_reference_values() {
        // Φ(1.959964) and φ(0) = 1/√(2π) from a 30-digit erf evaluation.
        assert_abs_diff_eq!(
            link_eval(LinkFamily::Probit, 1.959964),
            0.975,
            epsilon = 1e-6
        );
        assert_abs_diff_eq!(
            link_density(LinkFamily::Probit, 0.0),
            0.398_942_280_4,
            epsilon = 1e-9
        );
    }

    #[test]
    fn density_matches_finite_difference() {
        let h = 1e-5;
        for link in [LinkFamily::Probit, LinkFamily::Logit] {
            for z in -3..=3 {
                let z = z as f64;
                let fd = (link_eval(link, z + h) - link_eval(link, z - h)) / (2.0 * h);
                assert!((fd - link_density(link, z)).abs() <= 1e-6, "{link} at {z}");
                let fd2 = (link.density(z + h) - link.density(z - h)) / (2.0 * h);
                assert!((fd2 - link.density_slope(z)).abs() <= 1e-6);
            }
        }
    }

    #[test]
    fn clamped_in_tails() {
        for link in [LinkFamily::Probit, LinkFamily::Logit] {
            assert_eq!(link_eval(link, 60.0), 1.0 - PROB_FLOOR);
            assert_eq!(link_eval(link, -60.0), PROB_FLOOR);
        }
    }

    #[test]
    fn parses_names() {
        assert_eq!("Probit".parse::<LinkFamily>().unwrap(), LinkFamily::Probit);
        assert!("cloglog".parse::<LinkFamily>().is_err());
    }
}
