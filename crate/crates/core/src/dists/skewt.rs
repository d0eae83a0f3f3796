use statrs::function::gamma::ln_gamma;

use super::student::{StudentT, StudentTTable};
use crate::error::{check_open_unit, Error, Result};

/// Hansen's (1994) standardized skewed Student-t (zero mean, unit variance).
///
/// With `nu = 1/zeta` and `lambda = xi`:
///
/// ```text
/// c = Gamma((nu+1)/2) / (sqrt(pi (nu-2)) Gamma(nu/2))
/// a = 4 lambda c (nu-2)/(nu-1)
/// b = sqrt(1 + 3 lambda^2 - a^2)
/// pdf(z) = b c (1 + ((b z + a)/(1 -/+ lambda))^2 / (nu-2))^(-(nu+1)/2)
/// ```
///
/// using `1 - lambda` left of the mode split `z = -a/b` and `1 + lambda` right
/// of it. Each half is an affine image of a standard Student-t with `nu`
/// degrees of freedom, which gives the cdf and quantile in closed form:
///
/// ```text
/// cdf(z)  = (1-lambda) T(s (bz+a)/(1-lambda))                 z < -a/b
///         = 1 - (1+lambda) T_upper(s (bz+a)/(1+lambda))        otherwise
/// s = sqrt(nu/(nu-2))
/// ```
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkewT {
    zeta: f64,
    xi: f64,
    nu: f64,
    a: f64,
    b: f64,
    ln_c: f64,
    /// sqrt(nu / (nu - 2))
    s: f64,
    t: StudentT,
}

impl SkewT {
    pub fn new(zeta: f64, xi: f64) -> Result<Self> {
        if !(zeta > 0.0 && zeta < 0.5) {
            return Err(Error::ParameterDomain {
                name: "zeta".into(),
                value: zeta,
                constraint: "0 < zeta < 1/2",
            });
        }
        if !(xi > -1.0 && xi < 1.0) {
            return Err(Error::ParameterDomain {
                name: "xi".into(),
                value: xi,
                constraint: "-1 < xi < 1",
            });
        }
        let nu = 1.0 / zeta;
        let ln_c = ln_gamma(0.5 * (nu + 1.0))
            - ln_gamma(0.5 * nu)
            - 0.5 * (std::f64::consts::PI * (nu - 2.0)).ln();
        let c = ln_c.exp();
        let a = 4.0 * xi * c * (nu - 2.0) / (nu - 1.0);
        let b = (1.0 + 3.0 * xi * xi - a * a).sqrt();
        Ok(Self {
            zeta,
            xi,
            nu,
            a,
            b,
            ln_c,
            s: (nu / (nu - 2.0)).sqrt(),
            t: StudentT::new(nu)?,
        })
    }

    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn dof(&self) -> f64 {
        self.nu
    }

    pub fn student(&self) -> &StudentT {
        &self.t
    }

    fn half_scale(&self, z: f64) -> f64 {
        if z < -self.a / self.b {
            1.0 - self.xi
        } else {
            1.0 + self.xi
        }
    }

    pub fn ln_pdf(&self, z: f64) -> f64 {
        let w = (self.b * z + self.a) / self.half_scale(z);
        self.b.ln() + self.ln_c - 0.5 * (self.nu + 1.0) * (w * w / (self.nu - 2.0)).ln_1p()
    }

    pub fn pdf(&self, z: f64) -> f64 {
        self.ln_pdf(z).exp()
    }

    pub fn cdf(&self, z: f64) -> f64 {
        if z.is_nan() {
            return f64::NAN;
        }
        if z == f64::INFINITY {
            return 1.0;
        }
        if z == f64::NEG_INFINITY {
            return 0.0;
        }
        let shifted = self.b * z + self.a;
        if z < -self.a / self.b {
            let scale = 1.0 - self.xi;
            scale * self.t.upper_tail(-self.s * shifted / scale)
        } else {
            let scale = 1.0 + self.xi;
            1.0 - scale * self.t.upper_tail(self.s * shifted / scale)
        }
    }

    pub fn quantile(&self, u: f64) -> Result<f64> {
        check_open_unit("u", u)?;
        Ok(self.quantile_with(u, |p| self.t.lower_quantile(p)))
    }

    #[inline]
    fn quantile_with(&self, u: f64, lower: impl Fn(f64) -> f64) -> f64 {
        let split = 0.5 * (1.0 - self.xi);
        if u < split {
            let scale = 1.0 - self.xi;
            let w = lower(u / scale);
            (scale * w / self.s - self.a) / self.b
        } else {
            let scale = 1.0 + self.xi;
            let tail = ((1.0 - u) / scale).min(0.5);
            let w = -lower(tail);
            (scale * w / self.s - self.a) / self.b
        }
    }
}

/// Fast batch quantile transform for one skewed-t parameter value.
///
/// Built once per parameter value and applied to many stored uniforms.
#[derive(Debug, Clone)]
pub struct SkewTTable {
    dist: SkewT,
    table: StudentTTable,
}

impl SkewTTable {
    pub fn new(dist: SkewT) -> Self {
        Self {
            dist,
            table: StudentTTable::new(dist.t),
        }
    }

    /// Reuse the Student-t table of `other` when the tail parameter matches.
    pub fn reusing(dist: SkewT, other: &SkewTTable) -> Self {
        if other.dist.zeta.to_bits() == dist.zeta.to_bits() {
            Self {
                dist,
                table: other.table.clone(),
            }
        } else {
            Self::new(dist)
        }
    }

    pub fn dist(&self) -> &SkewT {
        &self.dist
    }

    /// Quantile at `u` in (0, 1); no domain check.
    #[inline]
    pub fn quantile(&self, u: f64) -> f64 {
        self.dist.quantile_with(u, |p| self.table.lower_quantile(p))
    }
}

pub fn skewt_pdf(x: f64, d: &SkewT) -> f64 {
    d.pdf(x)
}

pub fn skewt_cdf(x: f64, d: &SkewT) -> f64 {
    d.cdf(x)
}

pub fn skewt_quantile(u: f64, d: &SkewT) -> Result<f64> {
    d.quantile(u)
}
