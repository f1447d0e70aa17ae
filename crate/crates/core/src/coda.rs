//! Aitchison geometry on the simplex.
//!
//! A [`Composition`] is a vector of strictly positive parts summing to a
//! closure constant `k` (1 for proportions, 100 for percentages). Only the
//! ratios between parts carry information, so every distance here is
//! invariant to `k`. Nothing in this module knows about age groups; the
//! dimension is whatever the caller supplies.

use serde::{Deserialize, Serialize};

use crate::error::CodaError;

/// Relative tolerance on the constant-sum constraint.
pub const SUM_TOLERANCE: f64 = 1e-9;

/// Per-part tolerance (times `D`) accepted by [`ClrVector::new`].
pub const CENTERING_TOLERANCE: f64 = 1e-6;

/// A strictly positive vector constrained to sum to `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Composition {
    parts: Vec<f64>,
    k: f64,
}

impl Composition {
    /// Wraps parts that already satisfy the simplex constraints.
    pub fn new(parts: Vec<f64>, k: f64) -> Result<Self, CodaError> {
        check_closure_constant(k)?;
        check_positive(&parts)?;
        let sum: f64 = parts.iter().sum();
        if ((sum - k) / k).abs() > SUM_TOLERANCE {
            return Err(CodaError::NotClosed { sum, k });
        }
        Ok(Self { parts, k })
    }

    pub fn parts(&self) -> &[f64] {
        &self.parts
    }

    /// Closure constant.
    pub fn k(&self) -> f64 {
        self.k
    }

    /// Number of parts `D`.
    pub fn dim(&self) -> usize {
        self.parts.len()
    }

    pub fn into_parts(self) -> Vec<f64> {
        self.parts
    }

    /// The same shares re-closed to a different constant.
    pub fn reclose(&self, k: f64) -> Result<Self, CodaError> {
        closure(&self.parts, k)
    }

    /// The neutral element of perturbation: all parts equal.
    pub fn uniform(dim: usize, k: f64) -> Result<Self, CodaError> {
        closure(&vec![1.0; dim], k)
    }
}

/// Centered log-ratio coordinates of a composition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClrVector {
    coords: Vec<f64>,
}

impl ClrVector {
    /// Accepts coordinates whose sum is within `1e-6 * D` of zero.
    pub fn new(coords: Vec<f64>) -> Result<Self, CodaError> {
        if coords.len() < 2 {
            return Err(CodaError::EmptyVector(coords.len()));
        }
        let sum: f64 = coords.iter().sum();
        if !sum.is_finite() || sum.abs() > CENTERING_TOLERANCE * coords.len() as f64 {
            return Err(CodaError::NotCentered(sum));
        }
        Ok(Self { coords })
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// Coordinate-wise mean of several clr vectors (the clr image of the
    /// compositional center).
    pub fn mean<'a, I>(vectors: I) -> Result<Self, CodaError>
    where
        I: IntoIterator<Item = &'a ClrVector>,
    {
        let mut acc: Vec<f64> = Vec::new();
        let mut n = 0usize;
        for v in vectors {
            if acc.is_empty() {
                acc = vec![0.0; v.dim()];
            } else if acc.len() != v.dim() {
                return Err(CodaError::DimensionMismatch {
                    left: acc.len(),
                    right: v.dim(),
                });
            }
            for (a, c) in acc.iter_mut().zip(&v.coords) {
                *a += c;
            }
            n += 1;
        }
        if n == 0 {
            return Err(CodaError::EmptyVector(0));
        }
        for a in &mut acc {
            *a /= n as f64;
        }
        Ok(Self { coords: acc })
    }
}

fn check_closure_constant(k: f64) -> Result<(), CodaError> {
    if k > 0.0 && k.is_finite() {
        Ok(())
    } else {
        Err(CodaError::InvalidClosure(k))
    }
}

fn check_positive(v: &[f64]) -> Result<(), CodaError> {
    if v.len() < 2 {
        return Err(CodaError::EmptyVector(v.len()));
    }
    match v.iter().position(|x| !(*x > 0.0 && x.is_finite())) {
        Some(index) => Err(CodaError::NonPositivePart { index, value: v[index] }),
        None => Ok(()),
    }
}

fn check_same_dim(a: usize, b: usize) -> Result<(), CodaError> {
    if a == b {
        Ok(())
    } else {
        Err(CodaError::DimensionMismatch { left: a, right: b })
    }
}

/// Rescales a positive vector so its parts sum to `k`.
pub fn closure(v: &[f64], k: f64) -> Result<Composition, CodaError> {
    check_positive(v)?;
    check_closure_constant(k)?;
    let sum: f64 = v.iter().sum();
    let parts = v.iter().map(|x| k * x / sum).collect();
    Ok(Composition { parts, k })
}

/// Multiplicative zero replacement.
///
/// Zeros become `delta`; positive entries shrink by the factor
/// `1 - z * delta / sum` so the total is unchanged. `delta` is in the same
/// units as `v` and must be small enough that the factor stays positive.
pub fn zero_replace(v: &[f64], delta: f64) -> Result<Vec<f64>, CodaError> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(CodaError::InvalidDelta(delta));
    }
    if let Some(index) = v.iter().position(|x| !(*x >= 0.0 && x.is_finite())) {
        return Err(CodaError::NegativeComponent { index, value: v[index] });
    }
    let sum: f64 = v.iter().sum();
    if sum <= 0.0 {
        return Err(CodaError::AllZero);
    }
    let zeros = v.iter().filter(|x| **x == 0.0).count();
    if zeros == 0 {
        return Ok(v.to_vec());
    }
    let factor = 1.0 - zeros as f64 * delta / sum;
    if factor <= 0.0 {
        return Err(CodaError::InvalidDelta(delta));
    }
    Ok(v.iter().map(|&x| if x == 0.0 { delta } else { x * factor }).collect())
}

/// `(prod x_d)^(1/D)`, evaluated in log space.
pub fn geometric_mean(x: &Composition) -> f64 {
    mean_log(&x.parts).exp()
}

fn mean_log(parts: &[f64]) -> f64 {
    parts.iter().map(|p| p.ln()).sum::<f64>() / parts.len() as f64
}

/// Centered log-ratio transform: `ln(x_d / g(x))` for every part.
pub fn clr(x: &Composition) -> ClrVector {
    let logs: Vec<f64> = x.parts.iter().map(|p| p.ln()).collect();
    let centre = logs.iter().sum::<f64>() / logs.len() as f64;
    ClrVector {
        coords: logs.into_iter().map(|l| l - centre).collect(),
    }
}

/// Maps clr coordinates back onto the simplex with closure constant `k`.
pub fn clr_inverse(z: &ClrVector, k: f64) -> Result<Composition, CodaError> {
    let sum: f64 = z.coords.iter().sum();
    if sum.abs() > CENTERING_TOLERANCE * z.dim() as f64 {
        return Err(CodaError::NotCentered(sum));
    }
    // Shift by the max before exponentiating; closure removes the shift.
    let max = z.coords.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = z.coords.iter().map(|c| (c - max).exp()).collect();
    closure(&exps, k)
}

/// Aitchison distance: Euclidean distance between clr images.
pub fn aitchison_distance(x: &Composition, y: &Composition) -> Result<f64, CodaError> {
    check_same_dim(x.dim(), y.dim())?;
    let cx = clr(x);
    let cy = clr(y);
    Ok(euclidean(&cx.coords, &cy.coords))
}

/// Aitchison distance through the single log-ratio form
/// `sqrt(sum_d ln(x_d g(y) / (y_d g(x)))^2)`.
///
/// Algebraically identical to [`aitchison_distance`]; kept as an independent
/// route for cross-checking.
pub fn aitchison_distance_log_ratio(x: &Composition, y: &Composition) -> Result<f64, CodaError> {
    check_same_dim(x.dim(), y.dim())?;
    let log_gx = mean_log(&x.parts);
    let log_gy = mean_log(&y.parts);
    let ss: f64 = x
        .parts
        .iter()
        .zip(&y.parts)
        .map(|(xd, yd)| {
            let r = (xd / yd).ln() + log_gy - log_gx;
            r * r
        })
        .sum();
    Ok(ss.sqrt())
}

/// Plain Euclidean distance between shares, both re-closed to 100.
pub fn euclidean_distance(x: &Composition, y: &Composition) -> Result<f64, CodaError> {
    check_same_dim(x.dim(), y.dim())?;
    let px = x.reclose(100.0)?;
    let py = y.reclose(100.0)?;
    Ok(euclidean(&px.parts, &py.parts))
}

/// Simplex group operation: componentwise product, closed to the `k` of `x`.
pub fn perturbation(p: &Composition, x: &Composition) -> Result<Composition, CodaError> {
    check_same_dim(p.dim(), x.dim())?;
    let prod: Vec<f64> = p.parts.iter().zip(&x.parts).map(|(a, b)| a * b).collect();
    closure(&prod, x.k)
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::LN_2;

    fn comp(v: &[f64], k: f64) -> Composition {
        closure(v, k).unwrap()
    }

    #[test]
    fn closure_examples() {
        assert_eq!(comp(&[1.0, 1.0, 1.0, 1.0], 100.0).parts(), &[25.0; 4]);
        assert_eq!(comp(&[2.0, 2.0], 1.0).parts(), &[0.5, 0.5]);
        assert_eq!(comp(&[3.0, 1.0], 100.0).parts(), &[75.0, 25.0]);
    }

    #[test]
    fn closure_rejects_bad_input() {
        assert_eq!(
            closure(&[1.0, 0.0, 2.0], 1.0),
            Err(CodaError::NonPositivePart { index: 1, value: 0.0 })
        );
        assert_eq!(closure(&[1.0], 1.0), Err(CodaError::EmptyVector(1)));
        assert_eq!(closure(&[], 1.0), Err(CodaError::EmptyVector(0)));
        assert!(matches!(
            closure(&[1.0, -1.0], 1.0),
            Err(CodaError::NonPositivePart { index: 1, .. })
        ));
        assert_eq!(closure(&[1.0, 1.0], 0.0), Err(CodaError::InvalidClosure(0.0)));
    }

    #[test]
    fn new_checks_sum() {
        assert!(Composition::new(vec![0.5, 0.5], 1.0).is_ok());
        assert!(Composition::new(vec![0.5, 0.6], 1.0).is_err());
    }

    #[test]
    fn zero_replace_examples() {
        let out = zero_replace(&[1.0, 0.0, 1.0], 0.01).unwrap();
        assert_relative_eq!(out[0], 0.995, max_relative = 1e-12);
        assert_eq!(out[1], 0.01);
        assert_relative_eq!(out[2], 0.995, max_relative = 1e-12);
        assert_eq!(zero_replace(&[5.0, 5.0], 0.01).unwrap(), vec![5.0, 5.0]);
    }

    #[test]
    fn zero_replace_errors() {
        assert_eq!(zero_replace(&[0.0, 0.0], 0.01), Err(CodaError::AllZero));
        assert_eq!(zero_replace(&[1.0, 0.0], 0.0), Err(CodaError::InvalidDelta(0.0)));
        assert!(matches!(
            zero_replace(&[1.0, -0.5], 0.01),
            Err(CodaError::NegativeComponent { index: 1, .. })
        ));
        // delta so large the positive parts would vanish
        assert!(zero_replace(&[1.0, 0.0], 2.0).is_err());
    }

    #[test]
    fn geometric_mean_examples() {
        assert_relative_eq!(geometric_mean(&comp(&[25.0; 4], 100.0)), 25.0, max_relative = 1e-14);
        assert_relative_eq!(geometric_mean(&comp(&[0.8, 0.2], 1.0)), 0.4, max_relative = 1e-14);
        assert_relative_eq!(
            geometric_mean(&comp(&[75.0, 25.0], 100.0)),
            1875f64.sqrt(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn clr_examples() {
        let z = clr(&comp(&[25.0; 4], 100.0));
        assert!(z.coords().iter().all(|c| c.abs() < 1e-12));
        let z = clr(&comp(&[0.8, 0.2], 1.0));
        assert_relative_eq!(z.coords()[0], LN_2, max_relative = 1e-12);
        assert_relative_eq!(z.coords()[1], -LN_2, max_relative = 1e-12);
        let a = clr(&comp(&[3.0, 5.0, 7.0], 1.0));
        let b = clr(&comp(&[30.0, 50.0, 70.0], 1.0));
        for (u, v) in a.coords().iter().zip(b.coords()) {
            assert_relative_eq!(u, v, epsilon = 1e-14);
        }
    }

    #[test]
    fn clr_inverse_examples() {
        let x = clr_inverse(&ClrVector::new(vec![0.0; 3]).unwrap(), 1.0).unwrap();
        for p in x.parts() {
            assert_relative_eq!(*p, 1.0 / 3.0, max_relative = 1e-14);
        }
        let x = clr_inverse(&ClrVector::new(vec![LN_2, -LN_2]).unwrap(), 1.0).unwrap();
        assert_relative_eq!(x.parts()[0], 0.8, max_relative = 1e-12);
        assert_relative_eq!(x.parts()[1], 0.2, max_relative = 1e-12);
    }

    #[test]
    fn clr_inverse_rejects_uncentered() {
        assert!(matches!(ClrVector::new(vec![1.0, 1.0]), Err(CodaError::NotCentered(_))));
    }

    #[test]
    fn distance_examples() {
        let x = comp(&[0.8, 0.2], 1.0);
        let y = comp(&[0.5, 0.5], 1.0);
        assert_eq!(aitchison_distance(&x, &x).unwrap(), 0.0);
        assert_relative_eq!(
            aitchison_distance(&x, &y).unwrap(),
            2f64.sqrt() * LN_2,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            aitchison_distance_log_ratio(&x, &y).unwrap(),
            2f64.sqrt() * LN_2,
            max_relative = 1e-12
        );
        let z = comp(&[1.0, 1.0, 1.0], 1.0);
        assert_eq!(
            aitchison_distance(&x, &z),
            Err(CodaError::DimensionMismatch { left: 2, right: 3 })
        );
    }

    #[test]
    fn euclidean_examples() {
        let a = comp(&[75.0, 25.0], 100.0);
        let b = comp(&[25.0, 75.0], 100.0);
        assert_eq!(euclidean_distance(&a, &a).unwrap(), 0.0);
        assert_relative_eq!(
            euclidean_distance(&a, &b).unwrap(),
            5000f64.sqrt(),
            max_relative = 1e-12
        );
        // shares, not raw parts: k = 1 gives the same answer
        let a1 = a.reclose(1.0).unwrap();
        assert_relative_eq!(
            euclidean_distance(&a1, &b).unwrap(),
            5000f64.sqrt(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn perturbation_examples() {
        let x = comp(&[0.8, 0.2], 1.0);
        let p = comp(&[0.5, 0.5], 1.0);
        let out = perturbation(&p, &x).unwrap();
        assert_relative_eq!(out.parts()[0], 0.8, max_relative = 1e-14);
        assert_relative_eq!(out.parts()[1], 0.2, max_relative = 1e-14);
        let u = Composition::uniform(2, 1.0).unwrap();
        assert_eq!(perturbation(&u, &x).unwrap(), x);
    }

    #[test]
    fn euclidean_is_not_perturbation_invariant() {
        let x = comp(&[0.6, 0.3, 0.1], 1.0);
        let y = comp(&[0.2, 0.3, 0.5], 1.0);
        let p = comp(&[0.7, 0.2, 0.1], 1.0);
        let px = perturbation(&p, &x).unwrap();
        let py = perturbation(&p, &y).unwrap();
        let ait = aitchison_distance(&x, &y).unwrap();
        assert_relative_eq!(aitchison_distance(&px, &py).unwrap(), ait, max_relative = 1e-12);
        let euc = euclidean_distance(&x, &y).unwrap();
        assert!((euclidean_distance(&px, &py).unwrap() - euc).abs() > 1.0);
    }
}
