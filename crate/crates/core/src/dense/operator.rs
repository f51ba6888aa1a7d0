use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{DenseError, FactorSpace, Partition, Region, OPERATOR_CAP};

/// Eigenvalues below this are treated as zero in entropies.
pub const CLIP_ZERO: f64 = 1e-10;
/// Eigenvalues below this violate positivity.
pub const CLIP_NEGATIVE: f64 = -1e-9;

const STRUCTURE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    space: FactorSpace,
    matrix: DMatrix<Complex64>,
}

impl DensityOperator {
    /// Validating constructor: Hermitian, unit trace and positive within tolerance.
    pub fn new(space: FactorSpace, matrix: DMatrix<Complex64>) -> Result<Self, DenseError> {
        let dim = space.dim();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(DenseError::MalformedInput(format!(
                "matrix is {}x{}, space has dimension {dim}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let herm = (&matrix - matrix.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if herm > STRUCTURE_TOL {
            return Err(DenseError::InvalidDensity(format!("not Hermitian (defect {herm:e})")));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > STRUCTURE_TOL || tr.im.abs() > STRUCTURE_TOL {
            return Err(DenseError::InvalidDensity(format!("trace is {tr}")));
        }
        let rho = Self { space, matrix };
        let min = rho.eigenvalues()?.iter().copied().fold(f64::INFINITY, f64::min);
        if min < CLIP_NEGATIVE {
            return Err(DenseError::InvalidDensity(format!("eigenvalue {min:e} is negative")));
        }
        Ok(rho)
    }

    /// Caller guarantees the invariants.
    pub(crate) fn from_parts(space: FactorSpace, matrix: DMatrix<Complex64>) -> Self {
        Self { space, matrix }
    }

    pub fn from_pure(space: FactorSpace, amplitudes: &[Complex64]) -> Result<Self, DenseError> {
        if amplitudes.len() != space.dim() {
            return Err(DenseError::MalformedInput("amplitude vector has the wrong length".into()));
        }
        let v = DVector::from_column_slice(amplitudes);
        let norm = v.norm();
        if (norm - 1.0).abs() > STRUCTURE_TOL {
            return Err(DenseError::InvalidDensity(format!("state has norm {norm}")));
        }
        let m = &v * v.adjoint();
        Ok(Self { space, matrix: m })
    }

    pub fn from_diagonal(space: FactorSpace, probs: &[f64]) -> Result<Self, DenseError> {
        if probs.len() != space.dim() {
            return Err(DenseError::MalformedInput("diagonal has the wrong length".into()));
        }
        let sum: f64 = probs.iter().sum();
        if probs.iter().any(|p| *p < 0.0) || (sum - 1.0).abs() > STRUCTURE_TOL {
            return Err(DenseError::InvalidDensity("diagonal is not a distribution".into()));
        }
        let d = DVector::from_iterator(probs.len(), probs.iter().map(|p| Complex64::new(*p, 0.0)));
        Ok(Self { space, matrix: DMatrix::from_diagonal(&d) })
    }

    pub fn space(&self) -> &FactorSpace {
        &self.space
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    fn is_diagonal(&self) -> bool {
        let n = self.dim();
        (0..n).all(|j| (0..n).all(|i| i == j || self.matrix[(i, j)] == Complex64::new(0.0, 0.0)))
    }

    /// Real eigenvalues of the Hermitian matrix.
    pub fn eigenvalues(&self) -> Result<Vec<f64>, DenseError> {
        hermitian_eigenvalues(&self.matrix, self.is_diagonal())
    }

    /// Reduced operator on `keep`, factors in ascending id order.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self, DenseError> {
        let kept_space = self.space.restrict(keep)?;
        let n = self.space.factors().len();
        let kept_pos: Vec<usize> = (0..n).filter(|&p| keep.contains(&self.space.factors()[p].0)).collect();
        if kept_pos.len() == n {
            return Ok(self.clone());
        }
        let traced_pos: Vec<usize> = (0..n).filter(|p| !kept_pos.contains(p)).collect();
        let dk = kept_space.dim();
        let dt = self.dim() / dk;
        let dims: Vec<usize> = self.space.factors().iter().map(|f| f.1).collect();
        let mut groups = vec![0usize; dk * dt];
        for i in 0..self.dim() {
            let digits = self.space.digits(i);
            let k = kept_pos.iter().fold(0, |acc, &p| acc * dims[p] + digits[p]);
            let t = traced_pos.iter().fold(0, |acc, &p| acc * dims[p] + digits[p]);
            groups[t * dk + k] = i;
        }
        let mut out = DMatrix::<Complex64>::zeros(dk, dk);
        for t in 0..dt {
            let g = &groups[t * dk..(t + 1) * dk];
            for (c, &j) in g.iter().enumerate() {
                for (r, &i) in g.iter().enumerate() {
                    out[(r, c)] += self.matrix[(i, j)];
                }
            }
        }
        Ok(Self { space: kept_space, matrix: out })
    }

    /// `W ρ W†` for an operator acting on a subset of factors.
    pub fn conjugate(&self, w: &LocalOperator) -> Result<Self, DenseError> {
        let cols = w.embed_columns(&self.space)?;
        let n = self.dim();
        let mut x = DMatrix::<Complex64>::zeros(n, n);
        for (i, col) in cols.iter().enumerate() {
            for &(r, c) in col {
                let row = self.matrix.row(i) * c;
                let mut target = x.row_mut(r);
                target += row;
            }
        }
        let mut y = DMatrix::<Complex64>::zeros(n, n);
        for (j, col) in cols.iter().enumerate() {
            for &(s, c) in col {
                let column = x.column(j) * c.conj();
                let mut target = y.column_mut(s);
                target += column;
            }
        }
        Ok(Self { space: self.space.clone(), matrix: y })
    }

    /// Convex combination of operators on a common space.
    pub fn mixture(weights: &[f64], ops: &[&DensityOperator]) -> Result<Self, DenseError> {
        let first = ops.first().ok_or_else(|| DenseError::MalformedInput("empty mixture".into()))?;
        if weights.len() != ops.len() {
            return Err(DenseError::MalformedInput("weights and operators differ in length".into()));
        }
        let mut m = DMatrix::<Complex64>::zeros(first.dim(), first.dim());
        for (w, op) in weights.iter().zip(ops) {
            if op.space != first.space {
                return Err(DenseError::MalformedInput("mixture of operators on different spaces".into()));
            }
            if *w != 0.0 {
                m += op.matrix.map(|z| z * *w);
            }
        }
        Ok(Self { space: first.space.clone(), matrix: m })
    }

    /// `Tr(ρ σ)`.
    pub fn overlap(&self, other: &Self) -> Result<f64, DenseError> {
        if self.space != other.space {
            return Err(DenseError::MalformedInput("overlap of operators on different spaces".into()));
        }
        // Tr(AB) = sum_ij A_ij B_ji
        let mut s = Complex64::new(0.0, 0.0);
        for j in 0..self.dim() {
            for i in 0..self.dim() {
                s += self.matrix[(i, j)] * other.matrix[(j, i)];
            }
        }
        Ok(s.re)
    }
}

pub(crate) fn hermitian_eigenvalues(m: &DMatrix<Complex64>, diagonal: bool) -> Result<Vec<f64>, DenseError> {
    if diagonal {
        return Ok(m.diagonal().iter().map(|z| z.re).collect());
    }
    nalgebra::SymmetricEigen::try_new(m.clone(), f64::EPSILON, 100_000)
        .map(|e| e.eigenvalues.iter().copied().collect())
        .ok_or(DenseError::SpectrumFailure(m.nrows()))
}

/// `-sum λ ln λ` with clipping.
pub fn von_neumann_entropy(rho: &DensityOperator) -> Result<f64, DenseError> {
    entropy_of_spectrum(&rho.eigenvalues()?)
}

pub(crate) fn entropy_of_spectrum(eigs: &[f64]) -> Result<f64, DenseError> {
    let mut s = 0.0;
    for &l in eigs {
        if l < CLIP_NEGATIVE {
            return Err(DenseError::InvalidDensity(format!("eigenvalue {l:e} is negative")));
        }
        if l >= CLIP_ZERO {
            s -= l * l.ln();
        }
    }
    Ok(s.max(0.0))
}

/// `I(A:C|B) = S(AB) + S(BC) - S(B) - S(ABC)` after tracing out ENV.
pub fn conditional_mutual_information(rho: &DensityOperator, part: &Partition) -> Result<f64, DenseError> {
    part.validate(rho.space())?;
    let abc = rho.partial_trace(&part.union(&[Region::A, Region::B, Region::C]))?;
    let s = |rs: &[Region]| -> Result<f64, DenseError> {
        let ids = part.union(rs);
        if ids.is_empty() {
            return Ok(0.0);
        }
        von_neumann_entropy(&abc.partial_trace(&ids)?)
    };
    Ok(s(&[Region::A, Region::B])? + s(&[Region::B, Region::C])? - s(&[Region::B])?
        - s(&[Region::A, Region::B, Region::C])?)
}

/// `½ sum |eig(ρ - σ)|`.
pub fn trace_distance(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64, DenseError> {
    if rho.space != sigma.space {
        return Err(DenseError::MalformedInput("trace distance across different spaces".into()));
    }
    let diff = &rho.matrix - &sigma.matrix;
    if diff.iter().all(|z| z.norm() == 0.0) {
        return Ok(0.0);
    }
    let diagonal = rho.is_diagonal() && sigma.is_diagonal();
    Ok(0.5 * hermitian_eigenvalues(&diff, diagonal)?.iter().map(|l| l.abs()).sum::<f64>())
}

/// Seeded full-rank `G G† / Tr(G G†)` with complex Gaussian `G`.
pub fn random_density(space: &FactorSpace, seed: u64) -> Result<DensityOperator, DenseError> {
    let dim = space.dim();
    if dim > OPERATOR_CAP {
        return Err(DenseError::DimensionCap { dim, cap: OPERATOR_CAP });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = DMatrix::<Complex64>::from_fn(dim, dim, |_, _| {
        Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng))
    });
    let mut m = &g * g.adjoint();
    let tr = m.trace().re;
    m /= Complex64::new(tr, 0.0);
    // Symmetrize away round-off.
    let m = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
    Ok(DensityOperator::from_parts(space.clone(), m))
}

/// Operator acting on the listed factors (ascending ids), identity elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalOperator {
    pub factors: Vec<usize>,
    pub matrix: DMatrix<Complex64>,
}

impl LocalOperator {
    pub fn new(factors: Vec<usize>, matrix: DMatrix<Complex64>) -> Self {
        Self { factors, matrix }
    }

    /// Permutation of basis states on one factor: `|x> -> |perm[x]>`.
    pub fn permutation(factor: usize, perm: &[usize]) -> Self {
        let d = perm.len();
        let mut m = DMatrix::<Complex64>::zeros(d, d);
        for (x, &y) in perm.iter().enumerate() {
            m[(y, x)] = Complex64::new(1.0, 0.0);
        }
        Self { factors: vec![factor], matrix: m }
    }

    /// Tensor product of commuting single-factor permutations.
    pub fn permutations(parts: &[(usize, Vec<usize>)]) -> Self {
        let mut sorted = parts.to_vec();
        sorted.sort_by_key(|p| p.0);
        let mut m = DMatrix::<Complex64>::from_element(1, 1, Complex64::new(1.0, 0.0));
        for (f, perm) in &sorted {
            m = m.kronecker(&Self::permutation(*f, perm).matrix);
        }
        Self { factors: sorted.into_iter().map(|p| p.0).collect(), matrix: m }
    }

    pub fn unitarity_defect(&self) -> f64 {
        let n = self.matrix.nrows();
        let p = &self.matrix * self.matrix.adjoint() - DMatrix::<Complex64>::identity(n, n);
        p.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Sparse columns of the embedded operator: for each basis index, `(row, value)` pairs.
    fn embed_columns(&self, space: &FactorSpace) -> Result<Vec<Vec<(usize, Complex64)>>, DenseError> {
        let local = space.restrict(&self.factors)?;
        if local.factors().len() != self.factors.len() || local.dim() != self.matrix.nrows() {
            return Err(DenseError::MalformedInput("local operator does not match its factors".into()));
        }
        let pos: Vec<usize> = self.factors.iter().map(|&f| space.position(f)).collect::<Result<_, _>>()?;
        let mut cols = Vec::with_capacity(space.dim());
        for i in 0..space.dim() {
            let mut digits = space.digits(i);
            let l = pos.iter().fold(0, |acc, &p| acc * space.factors()[p].1 + digits[p]);
            let mut col = Vec::new();
            for r in 0..local.dim() {
                let c = self.matrix[(r, l)];
                if c == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let rd = local.digits(r);
                for (&p, &d) in pos.iter().zip(&rd) {
                    digits[p] = d;
                }
                col.push((space.index(&digits), c));
            }
            cols.push(col);
        }
        Ok(cols)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn qubits(n: usize) -> FactorSpace {
        FactorSpace::uniform(n, 2).unwrap()
    }

    fn ghz(n: usize, sign: f64) -> DensityOperator {
        let mut v = vec![c(0.0); 1 << n];
        v[0] = c(std::f64::consts::FRAC_1_SQRT_2);
        v[(1 << n) - 1] = c(sign * std::f64::consts::FRAC_1_SQRT_2);
        DensityOperator::from_pure(qubits(n), &v).unwrap()
    }

    #[test]
    fn bell_reduction_is_maximally_mixed() {
        let r = ghz(2, 1.0).partial_trace(&[0]).unwrap();
        let want = DensityOperator::from_diagonal(qubits(1), &[0.5, 0.5]).unwrap();
        assert!(trace_distance(&r, &want).unwrap() < 1e-15);
    }

    #[test]
    fn ghz_two_qubit_reduction() {
        let r = ghz(3, 1.0).partial_trace(&[0, 1]).unwrap();
        let want = DensityOperator::from_diagonal(qubits(2), &[0.5, 0.0, 0.0, 0.5]).unwrap();
        assert!((r.matrix() - want.matrix()).iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn product_reduction() {
        let a = DensityOperator::from_diagonal(qubits(1), &[0.3, 0.7]).unwrap();
        let b = random_density(&qubits(1), 3).unwrap();
        let m = a.matrix().kronecker(b.matrix());
        let ab = DensityOperator::new(qubits(2), m).unwrap();
        let r = ab.partial_trace(&[0]).unwrap();
        assert!((r.matrix() - a.matrix()).iter().all(|z| z.norm() < 1e-15));
        let r = ab.partial_trace(&[1]).unwrap();
        assert!((r.matrix().clone() - b.matrix().clone().map(|z| z)).iter().all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn entropy_examples() {
        assert!(von_neumann_entropy(&ghz(3, 1.0)).unwrap().abs() < 1e-12);
        let mixed = DensityOperator::from_diagonal(qubits(2), &[0.25; 4]).unwrap();
        assert!((von_neumann_entropy(&mixed).unwrap() - 4f64.ln()).abs() < 1e-14);

        // ½|0><0| + ½|+><+| = [[3/4, 1/4], [1/4, 1/4]], eigenvalues (2 ± √2)/4.
        let m = DMatrix::from_row_slice(2, 2, &[c(0.75), c(0.25), c(0.25), c(0.25)]);
        let rho = DensityOperator::new(qubits(1), m).unwrap();
        let l = (2.0 + 2f64.sqrt()) / 4.0;
        let h = -l * l.ln() - (1.0 - l) * (1.0 - l).ln();
        assert!((von_neumann_entropy(&rho).unwrap() - h).abs() < 1e-14);
        assert!((h - 0.4164955307).abs() < 1e-9);
    }

    #[test]
    fn cmi_examples() {
        let part = Partition::from_lists(&[0], &[1], &[2], &[]);
        assert!((conditional_mutual_information(&ghz(3, 1.0), &part).unwrap() - 2f64.ln()).abs() < 1e-12);
        let a = random_density(&qubits(1), 1).unwrap();
        let b = random_density(&qubits(1), 2).unwrap();
        let cc = random_density(&qubits(1), 3).unwrap();
        let m = a.matrix().kronecker(b.matrix()).kronecker(cc.matrix());
        let prod = DensityOperator::from_parts(qubits(3), m);
        assert!(conditional_mutual_information(&prod, &part).unwrap().abs() < 1e-12);
    }

    #[test]
    fn invalid_operators_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[c(1.5), c(0.0), c(0.0), c(-0.5)]);
        assert!(matches!(DensityOperator::new(qubits(1), m), Err(DenseError::InvalidDensity(_))));
        let m = DMatrix::from_row_slice(2, 2, &[c(0.5), c(0.3), c(0.0), c(0.5)]);
        assert!(DensityOperator::new(qubits(1), m).is_err());
        assert!(matches!(ghz(2, 1.0).partial_trace(&[5]), Err(DenseError::UnknownFactor(5))));
    }

    #[test]
    fn random_is_deterministic_and_valid() {
        let s = qubits(3);
        let a = random_density(&s, 42).unwrap();
        assert_eq!(a, random_density(&s, 42).unwrap());
        assert_ne!(a, random_density(&s, 43).unwrap());
        assert!(DensityOperator::new(s, a.matrix().clone()).is_ok());
    }

    #[test]
    fn conjugation_by_local_permutation() {
        // X on qubit 1 of |000> + |111> gives |010> + |101>.
        let x = LocalOperator::permutation(1, &[1, 0]);
        assert_eq!(x.unitarity_defect(), 0.0);
        let out = ghz(3, 1.0).conjugate(&x).unwrap();
        assert!((out.matrix()[(0b010, 0b101)].re - 0.5).abs() < 1e-15);
        assert_eq!(out.matrix()[(0, 0)], c(0.0));
    }
}
