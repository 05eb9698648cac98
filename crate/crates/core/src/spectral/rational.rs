use rustfft::num_complex::Complex64;

use super::grid::{grid_theta, SpectrumGrid};
use crate::error::{Error, Result};

/// Absolute floor on `|den(e^{j theta})|` below which the denominator counts as zero.
pub const DENOMINATOR_TOLERANCE: f64 = 1e-12;

/// Number of points used to screen the denominator at construction.
const SCREEN_POINTS: usize = 1 << 14;

/// `|num(z)|^2 / |den(z)|^2` on `z = e^{j theta}`, coefficients in ascending powers of `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalPsd {
    num: Vec<f64>,
    den: Vec<f64>,
}

fn horner(coeffs: &[f64], z: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

/// Product of polynomials given in ascending coefficient order.
pub fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

impl RationalPsd {
    pub fn new(num: Vec<f64>, den: Vec<f64>) -> Result<Self> {
        if num.iter().all(|&c| c == 0.0) {
            return Err(Error::ZeroNumerator);
        }
        if num.iter().chain(&den).any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("non-finite polynomial coefficient".into()));
        }
        let psd = Self { num, den };
        for k in 0..SCREEN_POINTS {
            let theta = grid_theta(SCREEN_POINTS, k);
            if psd.den_abs(theta) < DENOMINATOR_TOLERANCE {
                return Err(Error::DenominatorZeroOnCircle { theta });
            }
        }
        Ok(psd)
    }

    /// Builds the spectrum from lists of numerator and denominator factors.
    pub fn from_factors(num: &[&[f64]], den: &[&[f64]]) -> Result<Self> {
        let expand = |fs: &[&[f64]]| fs.iter().fold(vec![1.0], |acc, f| poly_mul(&acc, f));
        Self::new(expand(num), expand(den))
    }

    pub fn num(&self) -> &[f64] {
        &self.num
    }

    pub fn den(&self) -> &[f64] {
        &self.den
    }

    fn den_abs(&self, theta: f64) -> f64 {
        horner(&self.den, Complex64::from_polar(1.0, theta)).norm()
    }

    /// Evaluates the density at `theta`.
    pub fn eval(&self, theta: f64) -> f64 {
        let z = Complex64::from_polar(1.0, theta);
        horner(&self.num, z).norm_sqr() / horner(&self.den, z).norm_sqr()
    }

    /// Samples the density on the `n`-point grid.
    pub fn sample(&self, n: usize) -> Result<SpectrumGrid> {
        if n < super::MIN_GRID_LEN {
            return Err(Error::GridTooSmall(n));
        }
        let mut values = Vec::with_capacity(n);
        for k in 0..n {
            let theta = grid_theta(n, k);
            if self.den_abs(theta) < DENOMINATOR_TOLERANCE {
                return Err(Error::DenominatorZeroOnCircle { theta });
            }
            let v = self.eval(theta);
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::NonpositiveRationalSample { theta });
            }
            values.push(v);
        }
        SpectrumGrid::new(values)
    }
}

/// Free-function form of [`RationalPsd::sample`].
pub fn sample_rational(psd: &RationalPsd, n: usize) -> Result<SpectrumGrid> {
    psd.sample(n)
}

/// The three reference spectra used for the triangle-surface experiment.
pub mod builtin {
    use super::RationalPsd;
    use crate::error::{Error, Result};

    pub const NAMES: [&str; 3] = ["paper_f1", "paper_f2", "paper_f3"];

    /// Human-readable definitions, shown in CLI help.
    pub const DEFINITIONS: &str = "paper_f1 = |(z-.99)/(z^2+.6z+.99)|^2; \
         paper_f2 = |1/(z^2-.3z+.99)|^2; \
         paper_f3 = |(z+.9)(z^2+.6z+.99)/((z^2+.9z+.99)(z^2+.9z+.99))|^2 \
         (the repeated denominator factor is used as given)";

    /// `|z - 0.99|^2 / |z^2 + 0.6 z + 0.99|^2`
    pub fn f1() -> RationalPsd {
        RationalPsd::new(vec![-0.99, 1.0], vec![0.99, 0.6, 1.0]).expect("f1 is valid")
    }

    /// `1 / |z^2 - 0.3 z + 0.99|^2`
    pub fn f2() -> RationalPsd {
        RationalPsd::new(vec![1.0], vec![0.99, -0.3, 1.0]).expect("f2 is valid")
    }

    /// `|(z + 0.9)(z^2 + 0.6 z + 0.99)|^2 / |(z^2 + 0.9 z + 0.99)^2|^2`
    pub fn f3() -> RationalPsd {
        RationalPsd::from_factors(
            &[&[0.9, 1.0], &[0.99, 0.6, 1.0]],
            &[&[0.99, 0.9, 1.0], &[0.99, 0.9, 1.0]],
        )
        .expect("f3 is valid")
    }

    pub fn by_name(name: &str) -> Result<RationalPsd> {
        match name {
            "paper_f1" => Ok(f1()),
            "paper_f2" => Ok(f2()),
            "paper_f3" => Ok(f3()),
            other => Err(Error::InvalidArgument(format!(
                "unknown builtin spectrum {other:?} (expected one of {NAMES:?})"
            ))),
        }
    }
}
