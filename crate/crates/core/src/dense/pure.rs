use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::operator::entropy_of_spectrum;
use super::{DenseError, DensityOperator, FactorSpace, Partition, Region, OPERATOR_CAP, VECTOR_CAP};

/// Global pure state; region entropies come from Schmidt coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    space: FactorSpace,
    amplitudes: DVector<Complex64>,
}

impl PureState {
    pub fn new(space: FactorSpace, amplitudes: Vec<Complex64>) -> Result<Self, DenseError> {
        let dim = space.dim();
        if dim > VECTOR_CAP {
            return Err(DenseError::DimensionCap { dim, cap: VECTOR_CAP });
        }
        if amplitudes.len() != dim {
            return Err(DenseError::MalformedInput("amplitude vector has the wrong length".into()));
        }
        let v = DVector::from_vec(amplitudes);
        if (v.norm() - 1.0).abs() > 1e-10 {
            return Err(DenseError::InvalidDensity(format!("state has norm {}", v.norm())));
        }
        Ok(Self { space, amplitudes: v })
    }

    pub fn space(&self) -> &FactorSpace {
        &self.space
    }

    /// Entropy of the reduction to `keep`.
    pub fn region_entropy(&self, keep: &[usize]) -> Result<f64, DenseError> {
        let kept = self.space.restrict(keep)?;
        let n = self.space.factors().len();
        if kept.factors().is_empty() || kept.factors().len() == n {
            return Ok(0.0);
        }
        let dims: Vec<usize> = self.space.factors().iter().map(|f| f.1).collect();
        let kept_pos: Vec<usize> = (0..n).filter(|&p| keep.contains(&self.space.factors()[p].0)).collect();
        let rest_pos: Vec<usize> = (0..n).filter(|p| !kept_pos.contains(p)).collect();
        let dk = kept.dim();
        let dr = self.space.dim() / dk;
        let mut m = DMatrix::<Complex64>::zeros(dk, dr);
        for (i, a) in self.amplitudes.iter().enumerate() {
            let digits = self.space.digits(i);
            let k = kept_pos.iter().fold(0, |acc, &p| acc * dims[p] + digits[p]);
            let r = rest_pos.iter().fold(0, |acc, &p| acc * dims[p] + digits[p]);
            m[(k, r)] = *a;
        }
        let eigs: Vec<f64> = m.singular_values().iter().map(|s| s * s).collect();
        entropy_of_spectrum(&eigs)
    }

    pub fn conditional_mutual_information(&self, part: &Partition) -> Result<f64, DenseError> {
        part.validate(&self.space)?;
        let s = |rs: &[Region]| self.region_entropy(&part.union(rs));
        Ok(s(&[Region::A, Region::B])? + s(&[Region::B, Region::C])? - s(&[Region::B])?
            - s(&[Region::A, Region::B, Region::C])?)
    }

    pub fn to_density(&self) -> Result<DensityOperator, DenseError> {
        let dim = self.space.dim();
        if dim > OPERATOR_CAP {
            return Err(DenseError::DimensionCap { dim, cap: OPERATOR_CAP });
        }
        DensityOperator::from_pure(self.space.clone(), self.amplitudes.as_slice())
    }
}
