use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dtype {
    Real,
    Complex,
}

#[derive(Debug, Clone, PartialEq)]
enum Storage {
    Real(Vec<f64>),
    Complex(Vec<Complex64>),
}

/// Dense row-major array of `f64` or `Complex64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    storage: Storage,
}

fn numel(shape: &[usize]) -> usize {
    shape.iter().product()
}

impl Tensor {
    pub fn real(shape: &[usize], data: Vec<f64>) -> Result<Self> {
        if numel(shape) != data.len() {
            return Err(Error::invalid(format!(
                "shape {shape:?} needs {} values, got {}",
                numel(shape),
                data.len()
            )));
        }
        Ok(Self {
            shape: shape.to_vec(),
            storage: Storage::Real(data),
        })
    }

    pub fn complex(shape: &[usize], data: Vec<Complex64>) -> Result<Self> {
        if numel(shape) != data.len() {
            return Err(Error::invalid(format!(
                "shape {shape:?} needs {} values, got {}",
                numel(shape),
                data.len()
            )));
        }
        Ok(Self {
            shape: shape.to_vec(),
            storage: Storage::Complex(data),
        })
    }

    pub fn zeros(shape: &[usize]) -> Self {
        Self {
            shape: shape.to_vec(),
            storage: Storage::Real(vec![0.0; numel(shape)]),
        }
    }

    pub fn zeros_complex(shape: &[usize]) -> Self {
        Self {
            shape: shape.to_vec(),
            storage: Storage::Complex(vec![Complex64::new(0.0, 0.0); numel(shape)]),
        }
    }

    pub fn full(shape: &[usize], value: f64) -> Self {
        Self {
            shape: shape.to_vec(),
            storage: Storage::Real(vec![value; numel(shape)]),
        }
    }

    /// Rank-0 real tensor.
    pub fn scalar(value: f64) -> Self {
        Self {
            shape: Vec::new(),
            storage: Storage::Real(vec![value]),
        }
    }

    pub fn zeros_like(&self) -> Self {
        match self.dtype() {
            Dtype::Real => Self::zeros(&self.shape),
            Dtype::Complex => Self::zeros_complex(&self.shape),
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn numel(&self) -> usize {
        match &self.storage {
            Storage::Real(v) => v.len(),
            Storage::Complex(v) => v.len(),
        }
    }

    pub fn dtype(&self) -> Dtype {
        match self.storage {
            Storage::Real(_) => Dtype::Real,
            Storage::Complex(_) => Dtype::Complex,
        }
    }

    pub fn is_scalar(&self) -> bool {
        self.numel() == 1
    }

    pub fn as_real(&self) -> Result<&[f64]> {
        match &self.storage {
            Storage::Real(v) => Ok(v),
            Storage::Complex(_) => Err(Error::Dtype {
                op: "as_real",
                expected: "real",
            }),
        }
    }

    pub fn as_real_mut(&mut self) -> Result<&mut [f64]> {
        match &mut self.storage {
            Storage::Real(v) => Ok(v),
            Storage::Complex(_) => Err(Error::Dtype {
                op: "as_real_mut",
                expected: "real",
            }),
        }
    }

    pub fn as_complex(&self) -> Result<&[Complex64]> {
        match &self.storage {
            Storage::Complex(v) => Ok(v),
            Storage::Real(_) => Err(Error::Dtype {
                op: "as_complex",
                expected: "complex",
            }),
        }
    }

    pub fn as_complex_mut(&mut self) -> Result<&mut [Complex64]> {
        match &mut self.storage {
            Storage::Complex(v) => Ok(v),
            Storage::Real(_) => Err(Error::Dtype {
                op: "as_complex_mut",
                expected: "complex",
            }),
        }
    }

    /// Single value of a one-element real tensor.
    pub fn item(&self) -> Result<f64> {
        let v = self.as_real()?;
        if v.len() != 1 {
            return Err(Error::invalid(format!(
                "item() on tensor of shape {:?}",
                self.shape
            )));
        }
        Ok(v[0])
    }

    pub fn to_complex(&self) -> Self {
        match &self.storage {
            Storage::Complex(_) => self.clone(),
            Storage::Real(v) => Self {
                shape: self.shape.clone(),
                storage: Storage::Complex(v.iter().map(|&x| Complex64::new(x, 0.0)).collect()),
            },
        }
    }

    /// Real part of a complex tensor; real tensors are returned unchanged.
    pub fn real_part(&self) -> Self {
        match &self.storage {
            Storage::Real(_) => self.clone(),
            Storage::Complex(v) => Self {
                shape: self.shape.clone(),
                storage: Storage::Real(v.iter().map(|z| z.re).collect()),
            },
        }
    }

    pub fn reshape(mut self, shape: &[usize]) -> Result<Self> {
        if numel(shape) != self.numel() {
            return Err(Error::ShapeMismatch {
                op: "reshape",
                left: self.shape,
                right: shape.to_vec(),
            });
        }
        self.shape = shape.to_vec();
        Ok(self)
    }

    /// Number of underlying real scalars (complex entries count twice).
    pub fn real_len(&self) -> usize {
        match self.dtype() {
            Dtype::Real => self.numel(),
            Dtype::Complex => 2 * self.numel(),
        }
    }

    pub fn all_finite(&self) -> bool {
        match &self.storage {
            Storage::Real(v) => v.iter().all(|x| x.is_finite()),
            Storage::Complex(v) => v.iter().all(|z| z.re.is_finite() && z.im.is_finite()),
        }
    }

    /// Appends the values as real scalars (complex as re, im pairs).
    pub fn extend_flat(&self, out: &mut Vec<f64>) {
        match &self.storage {
            Storage::Real(v) => out.extend_from_slice(v),
            Storage::Complex(v) => {
                for z in v {
                    out.push(z.re);
                    out.push(z.im);
                }
            }
        }
    }

    /// Overwrites the values from a flat real slice of length `real_len()`.
    pub fn assign_flat(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.real_len() {
            return Err(Error::invalid(format!(
                "assign_flat: need {} values, got {}",
                self.real_len(),
                flat.len()
            )));
        }
        match &mut self.storage {
            Storage::Real(v) => v.copy_from_slice(flat),
            Storage::Complex(v) => {
                for (z, pair) in v.iter_mut().zip(flat.chunks_exact(2)) {
                    *z = Complex64::new(pair[0], pair[1]);
                }
            }
        }
        Ok(())
    }

    pub(crate) fn add_assign(&mut self, other: &Tensor) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch {
                op: "accumulate",
                left: self.shape.clone(),
                right: other.shape.clone(),
            });
        }
        match (&mut self.storage, &other.storage) {
            (Storage::Real(a), Storage::Real(b)) => {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
            }
            (Storage::Complex(a), Storage::Complex(b)) => {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
            }
            _ => {
                return Err(Error::Dtype {
                    op: "accumulate",
                    expected: "matching",
                })
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_must_match_buffer() {
        assert!(Tensor::real(&[2, 3], vec![0.0; 5]).is_err());
        assert_eq!(Tensor::real(&[2, 3], vec![0.0; 6]).unwrap().numel(), 6);
    }

    #[test]
    fn real_complex_round_trip_is_exact() {
        let t = Tensor::real(&[3], vec![1.5, -2.25, 1e-300]).unwrap();
        assert_eq!(t.to_complex().real_part(), t);
    }

    #[test]
    fn flat_round_trip_complex() {
        let mut t = Tensor::complex(&[2], vec![Complex64::new(1.0, 2.0), Complex64::new(-3.0, 4.0)])
            .unwrap();
        let mut flat = Vec::new();
        t.extend_flat(&mut flat);
        assert_eq!(flat, vec![1.0, 2.0, -3.0, 4.0]);
        let before = t.clone();
        t.assign_flat(&flat).unwrap();
        assert_eq!(t, before);
    }
}
