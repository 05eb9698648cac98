use crate::error::{Error, Result};

/// Output of the Levinson-Durbin recursion on autocorrelations `R_0..R_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Levinson {
    /// Prediction-error filter `1, a_1, ..., a_n`.
    pub a: Vec<f64>,
    /// Final prediction error variance.
    pub error: f64,
    pub reflections: Vec<f64>,
}

/// Runs the recursion, stopping with [`Error::NotPositiveDefinite`] as soon as a
/// reflection coefficient leaves the open unit interval or the error variance
/// stops being positive.
pub fn levinson_durbin(r: &[f64]) -> Result<Levinson> {
    let Some(&r0) = r.first() else {
        return Err(Error::InvalidArgument("empty moment sequence".into()));
    };
    if !(r0 > 0.0) || r.iter().any(|v| !v.is_finite()) {
        return Err(Error::NotPositiveDefinite {
            order: 0,
            reflection: f64::NAN,
        });
    }
    let n = r.len() - 1;
    let mut a = vec![1.0];
    let mut error = r0;
    let mut reflections = Vec::with_capacity(n);
    for i in 1..=n {
        let acc: f64 = (0..i).map(|j| a[j] * r[i - j]).sum();
        let k = -acc / error;
        if !(k.abs() < 1.0) {
            return Err(Error::NotPositiveDefinite {
                order: i,
                reflection: k,
            });
        }
        let prev = a.clone();
        a.push(0.0);
        for j in 1..=i {
            a[j] = prev.get(j).copied().unwrap_or(0.0) + k * prev[i - j];
        }
        error *= 1.0 - k * k;
        if !(error > 0.0) {
            return Err(Error::NotPositiveDefinite {
                order: i,
                reflection: k,
            });
        }
        reflections.push(k);
    }
    Ok(Levinson {
        a,
        error,
        reflections,
    })
}
