//! Complex polynomials in one variable.
//!
//! Everything the T-Q machinery needs lives here: the vacuum eigenvalues
//! a(u) and d(u), the Q-polynomial, and the transfer-matrix eigenvalue
//! polynomial are all [`ComplexPoly`] values.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Result, TqError};
use crate::linalg;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Coefficient-form polynomial; `coeffs[n]` multiplies `u^n`.
///
/// Trailing zero coefficients are stripped on construction, so the leading
/// coefficient is nonzero unless the polynomial is identically zero (stored
/// as the single coefficient `0`).
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexPoly {
    coeffs: Vec<Complex64>,
}

impl ComplexPoly {
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        while coeffs.len() > 1 && coeffs.last() == Some(&ZERO) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(ZERO);
        }
        ComplexPoly { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn zero() -> Self {
        Self::new(vec![ZERO])
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new(vec![c])
    }

    pub fn monomial(n: usize) -> Self {
        let mut coeffs = vec![ZERO; n + 1];
        coeffs[n] = ONE;
        Self::new(coeffs)
    }

    /// Monic polynomial with exactly the given roots (with multiplicity).
    pub fn from_roots(roots: &[Complex64]) -> Self {
        let mut coeffs = vec![ONE];
        for &r in roots {
            let mut next = vec![ZERO; coeffs.len() + 1];
            for (n, &c) in coeffs.iter().enumerate() {
                next[n + 1] += c;
                next[n] -= c * r;
            }
            coeffs = next;
        }
        Self::new(coeffs)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient of `u^n`, zero beyond the degree.
    pub fn coeff(&self, n: usize) -> Complex64 {
        self.coeffs.get(n).copied().unwrap_or(ZERO)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == ZERO
    }

    pub fn leading(&self) -> Complex64 {
        *self.coeffs.last().unwrap()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Horner evaluation.
    pub fn eval(&self, u: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, &c| acc * u + c)
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() == 1 {
            return Self::zero();
        }
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(n, &c)| c * n as f64)
                .collect(),
        )
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    /// The polynomial `u -> p(u + s)`.
    pub fn shift(&self, s: Complex64) -> Self {
        // repeated synthetic division (Taylor shift)
        let mut c = self.coeffs.clone();
        let n = c.len();
        for i in 0..n {
            for j in (i..n - 1).rev() {
                let next = c[j + 1];
                c[j] += s * next;
            }
        }
        Self::new(c)
    }

    /// Quotient and remainder of division by a nonzero polynomial.
    pub fn div_rem(&self, divisor: &ComplexPoly) -> Result<(ComplexPoly, ComplexPoly)> {
        if divisor.is_zero() {
            return Err(TqError::Degenerate("division by the zero polynomial".into()));
        }
        let dn = divisor.degree();
        if self.degree() < dn {
            return Ok((Self::zero(), self.clone()));
        }
        let lead = divisor.leading();
        let mut rem = self.coeffs.clone();
        let mut quot = vec![ZERO; self.degree() - dn + 1];
        for k in (0..quot.len()).rev() {
            let q = rem[k + dn] / lead;
            quot[k] = q;
            for (i, &d) in divisor.coeffs.iter().enumerate() {
                rem[k + i] -= q * d;
            }
            rem[k + dn] = ZERO;
        }
        rem.truncate(dn.max(1));
        Ok((Self::new(quot), Self::new(rem)))
    }

    /// All complex roots with multiplicity, as eigenvalues of the companion
    /// matrix of the monic normalisation.
    pub fn roots(&self) -> Result<Vec<Complex64>> {
        if self.is_zero() {
            return Err(TqError::Degenerate("zero polynomial has no finite root set".into()));
        }
        let n = self.degree();
        if n == 0 {
            return Err(TqError::Degenerate("constant polynomial has no roots".into()));
        }
        // exact zeros at the origin come off first; they make the companion
        // matrix nilpotent, which the QR sweep handles badly
        let zeros = self.coeffs.iter().take_while(|&&c| c == ZERO).count();
        if zeros > 0 {
            let mut roots = vec![ZERO; zeros];
            if zeros < n {
                roots.extend(Self::new(self.coeffs[zeros..].to_vec()).roots()?);
            }
            return Ok(roots);
        }
        let lead = self.leading();
        let monic: Vec<Complex64> = self.coeffs.iter().map(|&c| c / lead).collect();
        let mut companion = DMatrix::<Complex64>::zeros(n, n);
        for i in 1..n {
            companion[(i, i - 1)] = ONE;
        }
        for i in 0..n {
            companion[(i, n - 1)] = -monic[i];
        }
        let mut roots = linalg::eigenvalues(&companion)?;

        // a few guarded Newton steps on the original polynomial
        let dp = self.derivative();
        for r in roots.iter_mut() {
            for _ in 0..3 {
                let f = self.eval(*r);
                let df = dp.eval(*r);
                if df == ZERO {
                    break;
                }
                let cand = *r - f / df;
                if self.eval(cand).norm() < f.norm() {
                    *r = cand;
                } else {
                    break;
                }
            }
        }
        Ok(roots)
    }

    /// Unique polynomial of the given degree through `points`.
    ///
    /// Solved as a Vandermonde system in the abscissae rescaled to the unit
    /// disk; coefficients are scaled back afterwards.
    pub fn interpolate(points: &[(Complex64, Complex64)], degree: usize) -> Result<Self> {
        if points.len() != degree + 1 {
            return Err(TqError::PointCount {
                expected: degree + 1,
                got: points.len(),
            });
        }
        let scale = points.iter().map(|p| p.0.norm()).fold(0.0, f64::max).max(1e-300);
        for i in 0..points.len() {
            for j in 0..i {
                if (points[i].0 - points[j].0).norm() <= 1e-14 * scale {
                    return Err(TqError::DuplicateAbscissa(j, i));
                }
            }
        }
        let n = degree + 1;
        let vander = DMatrix::from_fn(n, n, |i, k| (points[i].0 / scale).powu(k as u32));
        let rhs = nalgebra::DVector::from_iterator(n, points.iter().map(|p| p.1));
        let sol = vander
            .lu()
            .solve(&rhs)
            .ok_or_else(|| TqError::Degenerate("singular Vandermonde system".into()))?;
        Ok(Self::new(
            sol.iter()
                .enumerate()
                .map(|(k, &c)| c / scale.powi(k as i32))
                .collect(),
        ))
    }

    /// Whether two polynomials agree at `max(deg)+1` random points inside a
    /// disk of the given radius, relative to the local magnitude.
    pub fn agrees_with<R: Rng + ?Sized>(
        &self,
        other: &ComplexPoly,
        radius: f64,
        tol: f64,
        rng: &mut R,
    ) -> bool {
        let count = self.degree().max(other.degree()) + 1;
        (0..count).all(|_| {
            let u = random_in_disk(rng, radius);
            let (a, b) = (self.eval(u), other.eval(u));
            (a - b).norm() <= tol * (1.0 + a.norm().max(b.norm()))
        })
    }
}

/// `count` equally spaced nodes on a circle about the origin.
pub fn circle_nodes(count: usize, radius: f64) -> Vec<Complex64> {
    (0..count)
        .map(|k| Complex64::from_polar(radius, 2.0 * PI * k as f64 / count as f64))
        .collect()
}

pub fn random_in_disk<R: Rng + ?Sized>(rng: &mut R, radius: f64) -> Complex64 {
    let r = radius * rng.random::<f64>().sqrt();
    let t = 2.0 * PI * rng.random::<f64>();
    Complex64::from_polar(r, t)
}

impl Add for &ComplexPoly {
    type Output = ComplexPoly;
    fn add(self, rhs: &ComplexPoly) -> ComplexPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        ComplexPoly::new((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl Sub for &ComplexPoly {
    type Output = ComplexPoly;
    fn sub(self, rhs: &ComplexPoly) -> ComplexPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        ComplexPoly::new((0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl Mul for &ComplexPoly {
    type Output = ComplexPoly;
    fn mul(self, rhs: &ComplexPoly) -> ComplexPoly {
        let mut out = vec![ZERO; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        ComplexPoly::new(out)
    }
}

impl Neg for &ComplexPoly {
    type Output = ComplexPoly;
    fn neg(self) -> ComplexPoly {
        self.scale(-ONE)
    }
}

impl fmt::Display for ComplexPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (n, c) in self.coeffs.iter().enumerate().rev() {
            if *c == ZERO && self.coeffs.len() > 1 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match n {
                0 => write!(f, "({c})")?,
                1 => write!(f, "({c})u")?,
                _ => write!(f, "({c})u^{n}")?,
            }
        }
        Ok(())
    }
}
