//! Flat `f32` tensors with shape metadata.
//!
//! Noise tensors (the standard-normal starting point of denoising) and latent
//! tensors (encoder output of a finished image) share one representation so
//! they can be compared element by element.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    data: Vec<f32>,
    shape: Vec<usize>,
}

/// Initial noise derived from a seed.
pub type NoiseVector = Tensor;
/// Latent representation of an image, or oracle output.
pub type LatentVector = Tensor;

/// Number of elements described by `shape`, rejecting empty and zero-sized shapes.
pub fn element_count(shape: &[usize]) -> Result<usize> {
    if shape.is_empty() {
        return Err(Error::invalid("shape has no dimensions"));
    }
    let mut n: usize = 1;
    for &d in shape {
        if d == 0 {
            return Err(Error::invalid(format!("shape {shape:?} has a zero dimension")));
        }
        n = n
            .checked_mul(d)
            .ok_or_else(|| Error::invalid(format!("shape {shape:?} overflows")))?;
    }
    Ok(n)
}

impl Tensor {
    /// Builds a tensor, checking that the data fills the shape and is finite.
    pub fn new(data: Vec<f32>, shape: Vec<usize>) -> Result<Self> {
        let n = element_count(&shape)?;
        if n != data.len() {
            return Err(Error::invalid(format!(
                "shape {shape:?} needs {n} elements, got {}",
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("element {i} is not finite")));
        }
        Ok(Self { data, shape })
    }

    /// A flat tensor of shape `[len]`.
    pub fn from_vec(data: Vec<f32>) -> Result<Self> {
        let len = data.len();
        Self::new(data, vec![len])
    }

    pub(crate) fn from_parts_unchecked(data: Vec<f32>, shape: Vec<usize>) -> Self {
        debug_assert_eq!(element_count(&shape).ok(), Some(data.len()));
        Self { data, shape }
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    /// Bitwise equality, distinguishing `-0.0` from `0.0`.
    pub fn bit_eq(&self, other: &Tensor) -> bool {
        self.shape == other.shape
            && self
                .data
                .iter()
                .zip(&other.data)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }

    /// Sample mean and (population) variance, accumulated in `f64`.
    pub fn moments(&self) -> (f64, f64) {
        let n = self.data.len() as f64;
        let mean = self.data.iter().map(|&v| v as f64).sum::<f64>() / n;
        let var = self
            .data
            .iter()
            .map(|&v| {
                let d = v as f64 - mean;
                d * d
            })
            .sum::<f64>()
            / n;
        (mean, var)
    }
}

/// Parses a `CxHxW`-style shape string.
pub fn parse_shape(s: &str) -> Result<Vec<usize>> {
    let shape = s
        .split(['x', 'X', ','])
        .map(|p| {
            p.trim()
                .parse::<usize>()
                .map_err(|_| Error::invalid(format!("bad shape component `{p}` in `{s}`")))
        })
        .collect::<Result<Vec<_>>>()?;
    element_count(&shape)?;
    Ok(shape)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_shapes() {
        assert!(element_count(&[]).is_err());
        assert!(element_count(&[4, 0, 2]).is_err());
        assert_eq!(element_count(&[16, 64, 64]).unwrap(), 65536);
    }

    #[test]
    fn rejects_mismatched_or_nonfinite() {
        assert!(Tensor::new(vec![0.0; 3], vec![2, 2]).is_err());
        assert!(Tensor::new(vec![0.0, f32::NAN], vec![2]).is_err());
        assert!(Tensor::new(vec![0.0, f32::INFINITY], vec![2]).is_err());
    }

    #[test]
    fn parses_shapes() {
        assert_eq!(parse_shape("16x64x64").unwrap(), vec![16, 64, 64]);
        assert_eq!(parse_shape("7").unwrap(), vec![7]);
        assert!(parse_shape("16x0").is_err());
        assert!(parse_shape("axb").is_err());
    }

    #[test]
    fn bit_eq_sees_negative_zero() {
        let a = Tensor::from_vec(vec![0.0]).unwrap();
        let b = Tensor::from_vec(vec![-0.0]).unwrap();
        assert_eq!(a, b);
        assert!(!a.bit_eq(&b));
    }
}
