use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Distance below which a parameter counts as an integer.
pub const INTEGER_TOLERANCE: f64 = 1e-9;

/// The pair `(z, w)` of an admissible zw-measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct ZwParams {
    z: Complex64,
    w: Complex64,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    z: [f64; 2],
    w: [f64; 2],
}

impl TryFrom<RawParams> for ZwParams {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        ZwParams::new(
            Complex64::new(raw.z[0], raw.z[1]),
            Complex64::new(raw.w[0], raw.w[1]),
        )
    }
}

impl From<ZwParams> for RawParams {
    fn from(p: ZwParams) -> Self {
        RawParams {
            z: [p.z.re, p.z.im],
            w: [p.w.re, p.w.im],
        }
    }
}

fn near_integer(x: Complex64) -> bool {
    x.im.abs() < INTEGER_TOLERANCE && (x.re - x.re.round()).abs() < INTEGER_TOLERANCE
}

impl ZwParams {
    pub fn new(z: Complex64, w: Complex64) -> Result<Self> {
        for (name, v) in [("z", z), ("w", w)] {
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::arg(format!("{name} = {v} is not finite")));
            }
            if near_integer(v) {
                return Err(Error::arg(format!("{name} = {v} is (numerically) an integer")));
            }
        }
        if (z + w).re <= -0.5 {
            return Err(Error::arg(format!(
                "Re(z + w) = {} must exceed -1/2",
                (z + w).re
            )));
        }
        Ok(Self { z, w })
    }

    /// Shorthand for real parameters.
    pub fn real(z: f64, w: f64) -> Result<Self> {
        Self::new(Complex64::new(z, 0.0), Complex64::new(w, 0.0))
    }

    pub fn z(&self) -> Complex64 {
        self.z
    }

    pub fn w(&self) -> Complex64 {
        self.w
    }

    /// `(w, z)`: the parameters of the image measure under `lam -> -reversed(lam)`.
    pub fn swapped(&self) -> Self {
        Self { z: self.w, w: self.z }
    }

    /// `Re(z + w)`, which controls how fast row weights decay.
    pub fn re_sum(&self) -> f64 {
        (self.z + self.w).re
    }
}
