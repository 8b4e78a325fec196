//! On-site nonlinearities `F(|psi|^2)` together with their antiderivatives and
//! the growth constants `|F(x)| <= a (1 + x^b)`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Tolerance of the adaptive quadrature used for user-supplied `F`.
pub const QUADRATURE_TOL: f64 = 1e-10;

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum NonlinearityKind {
    /// `F(x) = x`, the standard DNLS.
    Cubic,
    /// `F(x) = x / (1 + x)`.
    Saturable,
    /// `F(x) = x^sigma`.
    Power { sigma: f64 },
    /// User supplied continuous `F` with `F(0) = 0`.
    Custom { name: String, f: ScalarFn },
}

impl fmt::Debug for NonlinearityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Cubic => write!(f, "Cubic"),
            Self::Saturable => write!(f, "Saturable"),
            Self::Power { sigma } => write!(f, "Power {{ sigma: {sigma} }}"),
            Self::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Nonlinearity {
    kind: NonlinearityKind,
    a: f64,
    b: f64,
}

impl Nonlinearity {
    pub fn cubic() -> Self {
        Self {
            kind: NonlinearityKind::Cubic,
            a: 1.0,
            b: 1.0,
        }
    }

    pub fn saturable() -> Self {
        Self {
            kind: NonlinearityKind::Saturable,
            a: 1.0,
            b: 1.0,
        }
    }

    pub fn power(sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "power exponent must be positive, got {sigma}"
            )));
        }
        Ok(Self {
            kind: NonlinearityKind::Power { sigma },
            a: 1.0,
            b: sigma,
        })
    }

    /// Wraps a user supplied `F`. The growth constants are taken on trust;
    /// only `F(0) = 0` is checked here.
    pub fn custom(name: impl Into<String>, f: ScalarFn, a: f64, b: f64) -> Result<Self> {
        if f(0.0) != 0.0 {
            return Err(Error::InvalidParameter("F(0) must vanish".into()));
        }
        Self {
            kind: NonlinearityKind::Custom { name: name.into(), f },
            a,
            b,
        }
        .with_growth(a, b)
    }

    /// Overrides the growth constants `a`, `b` of `|F(x)| <= a (1 + x^b)`.
    pub fn with_growth(mut self, a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && a > 0.0 && b.is_finite() && b > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "growth constants must be positive, got a={a}, b={b}"
            )));
        }
        self.a = a;
        self.b = b;
        Ok(self)
    }

    pub fn kind(&self) -> &NonlinearityKind {
        &self.kind
    }

    pub fn name(&self) -> &str {
        match &self.kind {
            NonlinearityKind::Cubic => "cubic",
            NonlinearityKind::Saturable => "saturable",
            NonlinearityKind::Power { .. } => "power",
            NonlinearityKind::Custom { name, .. } => name,
        }
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// `a (1 + x^b)`.
    pub fn growth_bound(&self, x: f64) -> f64 {
        self.a * (1.0 + x.powf(self.b))
    }

    pub fn f(&self, x: f64) -> f64 {
        match &self.kind {
            NonlinearityKind::Cubic => x,
            NonlinearityKind::Saturable => x / (1.0 + x),
            NonlinearityKind::Power { sigma } => x.powf(*sigma),
            NonlinearityKind::Custom { f, .. } => f(x),
        }
    }

    /// Antiderivative `G(x) = int_0^x F`.
    pub fn g(&self, x: f64) -> f64 {
        match &self.kind {
            NonlinearityKind::Cubic => 0.5 * x * x,
            // x - ln(1 + x), written to keep precision for small x
            NonlinearityKind::Saturable => x - x.ln_1p(),
            NonlinearityKind::Power { sigma } => x.powf(sigma + 1.0) / (sigma + 1.0),
            NonlinearityKind::Custom { f, .. } => adaptive_simpson(f.as_ref(), 0.0, x, QUADRATURE_TOL),
        }
    }

    /// Homogeneity-based Petviashvili exponent `(2b + 1) / (2b)`.
    pub fn petviashvili_exponent(&self) -> f64 {
        match self.kind {
            NonlinearityKind::Cubic => 1.5,
            _ => (2.0 * self.b + 1.0) / (2.0 * self.b),
        }
    }
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> f64 {
    if lo == hi {
        return 0.0;
    }
    let (fa, fb) = (f(lo), f(hi));
    let mid = 0.5 * (lo + hi);
    let fm = f(mid);
    let whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, lo, hi, fa, fm, fb, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &dyn Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let mid = 0.5 * (lo + hi);
    let (lm, rm) = (0.5 * (lo + mid), 0.5 * (mid + hi));
    let (flm, frm) = (f(lm), f(rm));
    let left = (mid - lo) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (hi - mid) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, lo, mid, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, mid, hi, fm, frm, fb, right, 0.5 * tol, depth - 1)
}
