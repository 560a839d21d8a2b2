//! Dense complex state tensors, reduced density matrices, uniformity checks,
//! and the moment-map square.
//!
//! Coefficients are stored row-major with the last index fastest; every
//! constructor and the flow module share this convention. Subsystems are
//! addressed by 0-based factor index in code (the state file format is
//! 1-based).

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::{Error, Result};

/// Default entrywise tolerance for verifying exactly-constructed states.
pub const DEFAULT_LME_TOL: f64 = 1e-9;

/// Dense state tensor over factor dimensions in user order.
#[derive(Clone, Debug, PartialEq)]
pub struct StateTensor {
    dims: Vec<usize>,
    coeffs: Vec<C64>,
    norm2: f64,
}

impl StateTensor {
    pub fn new(dims: Vec<usize>, coeffs: Vec<C64>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::EmptyDims);
        }
        if dims.iter().any(|&d| d == 0) {
            return Err(Error::ZeroPart);
        }
        let want: usize = dims.iter().product();
        if coeffs.len() != want {
            return Err(Error::ShapeMismatch {
                got: coeffs.len(),
                want,
            });
        }
        let norm2 = coeffs.iter().map(|c| c.norm_sqr()).sum();
        Ok(StateTensor {
            dims,
            coeffs,
            norm2,
        })
    }

    pub fn zero(dims: Vec<usize>) -> Result<Self> {
        let len: usize = dims.iter().product();
        StateTensor::new(dims, vec![C64::new(0.0, 0.0); len])
    }

    pub fn from_fn(dims: Vec<usize>, mut f: impl FnMut(&[usize]) -> C64) -> Result<Self> {
        let len: usize = dims.iter().product();
        let mut coeffs = Vec::with_capacity(len);
        let mut idx = vec![0usize; dims.len()];
        for _ in 0..len {
            coeffs.push(f(&idx));
            advance(&mut idx, &dims);
        }
        StateTensor::new(dims, coeffs)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn n_factors(&self) -> usize {
        self.dims.len()
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    /// Cached squared norm.
    pub fn norm2(&self) -> f64 {
        self.norm2
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.dims.len());
        let mut flat = 0;
        for (i, &d) in self.dims.iter().enumerate() {
            debug_assert!(idx[i] < d);
            flat = flat * d + idx[i];
        }
        flat
    }

    pub fn get(&self, idx: &[usize]) -> C64 {
        self.coeffs[self.flat_index(idx)]
    }

    /// Unit-norm copy; fails on the zero tensor.
    pub fn normalized(&self) -> Result<StateTensor> {
        if self.norm2 <= 0.0 {
            return Err(Error::ZeroState);
        }
        let s = 1.0 / self.norm2.sqrt();
        let coeffs = self.coeffs.iter().map(|c| c * s).collect();
        StateTensor::new(self.dims.clone(), coeffs)
    }

    pub fn scaled(&self, factor: C64) -> StateTensor {
        let coeffs: Vec<C64> = self.coeffs.iter().map(|c| c * factor).collect();
        StateTensor::new(self.dims.clone(), coeffs).expect("same shape")
    }
}

fn advance(idx: &mut [usize], dims: &[usize]) {
    for i in (0..dims.len()).rev() {
        idx[i] += 1;
        if idx[i] < dims[i] {
            return;
        }
        idx[i] = 0;
    }
}

/// Reduced density matrix on a subsystem.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    pub dim: usize,
    pub mat: DMatrix<C64>,
}

impl DensityMatrix {
    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.mat[(i, i)].re).sum()
    }

    /// tr(rho^2); real for Hermitian input.
    pub fn purity(&self) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                acc += (self.mat[(i, j)] * self.mat[(j, i)]).re;
            }
        }
        acc
    }

    pub fn max_hermiticity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                worst = worst.max((self.mat[(i, j)] - self.mat[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Ascending eigenvalues (the matrix is Hermitian up to rounding).
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self
            .mat
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ev
    }

    /// Largest entrywise deviation from `scale * I`.
    pub fn max_deviation_from_scaled_identity(&self, scale: f64) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                let target = if i == j { C64::new(scale, 0.0) } else { C64::new(0.0, 0.0) };
                worst = worst.max((self.mat[(i, j)] - target).norm());
            }
        }
        worst
    }
}

/// Partial trace of `|s><s|` onto the factors in `subsystems` (0-based,
/// arbitrary order accepted): the complement is traced out. Must be a
/// nonempty proper subset. The result has trace equal to `norm2`.
pub fn reduced_density(s: &StateTensor, subsystems: &[usize]) -> Result<DensityMatrix> {
    let n = s.n_factors();
    let mut keep: Vec<usize> = subsystems.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if keep.len() != subsystems.len() {
        return Err(Error::BadSubsystemSet);
    }
    if keep.is_empty() || keep.len() >= n || keep.iter().any(|&k| k >= n) {
        return Err(Error::BadSubsystemSet);
    }

    let kept_dim: usize = keep.iter().map(|&k| s.dims[k]).product();
    let env: Vec<usize> = (0..n).filter(|i| !keep.contains(i)).collect();
    let env_dim: usize = env.iter().map(|&k| s.dims[k]).product();

    // regroup coefficients as slices[env][kept]
    let mut slices = vec![C64::new(0.0, 0.0); env_dim * kept_dim];
    let mut idx = vec![0usize; n];
    for flat in 0..s.coeffs.len() {
        let mut ki = 0;
        for &k in &keep {
            ki = ki * s.dims[k] + idx[k];
        }
        let mut ei = 0;
        for &e in &env {
            ei = ei * s.dims[e] + idx[e];
        }
        slices[ei * kept_dim + ki] = s.coeffs[flat];
        advance(&mut idx, &s.dims);
    }

    let mut mat = DMatrix::from_element(kept_dim, kept_dim, C64::new(0.0, 0.0));
    for e in 0..env_dim {
        let row = &slices[e * kept_dim..(e + 1) * kept_dim];
        for a in 0..kept_dim {
            if row[a].norm_sqr() == 0.0 {
                continue;
            }
            for b in 0..kept_dim {
                mat[(a, b)] += row[a] * row[b].conj();
            }
        }
    }
    Ok(DensityMatrix { dim: kept_dim, mat })
}

/// LME verdict: after normalizing, is every single-factor reduced density
/// matrix within `tol` (entrywise) of `I/d_i`? Returns the verdict and the
/// worst deviation seen.
pub fn is_lme(s: &StateTensor, tol: f64) -> Result<(bool, f64)> {
    if s.norm2 <= 0.0 {
        return Err(Error::ZeroState);
    }
    if s.n_factors() == 1 {
        // single factor: rho is the rank-1 projector onto the state itself
        let d = s.dims[0];
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                let v = s.coeffs[i] * s.coeffs[j].conj() / s.norm2;
                let target = if i == j { 1.0 / d as f64 } else { 0.0 };
                worst = worst.max((v - C64::new(target, 0.0)).norm());
            }
        }
        return Ok((worst <= tol, worst));
    }
    let mut worst: f64 = 0.0;
    for i in 0..s.n_factors() {
        let rho = reduced_density(s, &[i])?;
        let scaled = DensityMatrix {
            dim: rho.dim,
            mat: rho.mat / C64::new(s.norm2, 0.0),
        };
        worst = worst.max(scaled.max_deviation_from_scaled_identity(1.0 / rho.dim as f64));
    }
    Ok((worst <= tol, worst))
}

/// All subsystem sets of size up to `m` maximally mixed within `tol`.
pub fn is_m_uniform(s: &StateTensor, m: usize, tol: f64) -> Result<bool> {
    Ok(m_uniform_deviation(s, m)? <= tol)
}

/// Worst entrywise deviation from maximal mixedness over all subsystem sets
/// of size up to `m`.
pub fn m_uniform_deviation(s: &StateTensor, m: usize) -> Result<f64> {
    if s.norm2 <= 0.0 {
        return Err(Error::ZeroState);
    }
    let n = s.n_factors();
    if m < 1 || m >= n {
        return Err(Error::InvalidParameter(format!(
            "m must satisfy 1 <= m < {n}, got {m}"
        )));
    }
    let mut worst: f64 = 0.0;
    for mask in 1u64..(1 << n) {
        let size = mask.count_ones() as usize;
        if size > m {
            continue;
        }
        let subset: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let rho = reduced_density(s, &subset)?;
        let scaled = DensityMatrix {
            dim: rho.dim,
            mat: rho.mat / C64::new(s.norm2, 0.0),
        };
        worst = worst.max(scaled.max_deviation_from_scaled_identity(1.0 / rho.dim as f64));
    }
    Ok(worst)
}

/// Moment-map square `M = 1/2 sum_i (tr(rho_i^2) - tr^2(rho_i)/d_i)` for the
/// unnormalized state. Nonnegative; zero exactly on LME states and the zero
/// tensor.
pub fn moment_map_square(s: &StateTensor) -> Result<f64> {
    if s.norm2 == 0.0 {
        return Ok(0.0);
    }
    if s.n_factors() == 1 {
        // rank-1 rho: tr(rho^2) = tr^2(rho)
        let d = s.dims[0] as f64;
        return Ok(0.5 * (s.norm2 * s.norm2) * (1.0 - 1.0 / d));
    }
    let mut m = 0.0;
    for i in 0..s.n_factors() {
        let rho = reduced_density(s, &[i])?;
        let tr = rho.trace();
        m += 0.5 * (rho.purity() - tr * tr / rho.dim as f64);
    }
    Ok(m)
}

/// Assignment of the factors of two tensors to output slots; the dimensions
/// of factors sharing a slot multiply, with the first-listed factor slowest.
#[derive(Clone, Debug)]
pub struct Regroup {
    /// Each slot lists `(input, factor)` pairs with `input` 0 or 1.
    pub slots: Vec<Vec<(usize, usize)>>,
}

impl Regroup {
    /// Keep all factors separate, left factors before right factors.
    pub fn concat(n_left: usize, n_right: usize) -> Regroup {
        let mut slots: Vec<Vec<(usize, usize)>> =
            (0..n_left).map(|k| vec![(0, k)]).collect();
        slots.extend((0..n_right).map(|k| vec![(1, k)]));
        Regroup { slots }
    }
}

/// Tensor product with regrouping: coefficients are products, output factor
/// dimensions follow the slot assignment. Every factor of both inputs must be
/// used exactly once.
pub fn tensor_product(s1: &StateTensor, s2: &StateTensor, regroup: &Regroup) -> Result<StateTensor> {
    let ns = [s1.n_factors(), s2.n_factors()];
    let mut seen = [vec![false; ns[0]], vec![false; ns[1]]];
    for slot in &regroup.slots {
        if slot.is_empty() {
            return Err(Error::BadRegroup("empty output slot".into()));
        }
        for &(input, k) in slot {
            if input > 1 {
                return Err(Error::BadRegroup(format!("input {input} out of range")));
            }
            if k >= ns[input] {
                return Err(Error::BadRegroup(format!(
                    "factor {k} out of range for input {input}"
                )));
            }
            if seen[input][k] {
                return Err(Error::BadRegroup(format!(
                    "factor {k} of input {input} used twice"
                )));
            }
            seen[input][k] = true;
        }
    }
    for (input, used) in seen.iter().enumerate() {
        if let Some(k) = used.iter().position(|u| !u) {
            return Err(Error::BadRegroup(format!(
                "factor {k} of input {input} unused"
            )));
        }
    }

    let in_dims = [s1.dims(), s2.dims()];
    let out_dims: Vec<usize> = regroup
        .slots
        .iter()
        .map(|slot| slot.iter().map(|&(i, k)| in_dims[i][k]).product())
        .collect();

    // weight of each input factor index in the flat output index
    let mut weight = [vec![0usize; ns[0]], vec![0usize; ns[1]]];
    let mut slot_stride = vec![0usize; regroup.slots.len()];
    {
        let mut acc = 1usize;
        for si in (0..regroup.slots.len()).rev() {
            slot_stride[si] = acc;
            acc *= out_dims[si];
        }
        for (si, slot) in regroup.slots.iter().enumerate() {
            let mut inner = 1usize;
            for &(i, k) in slot.iter().rev() {
                weight[i][k] = slot_stride[si] * inner;
                inner *= in_dims[i][k];
            }
        }
    }

    let total: usize = out_dims.iter().product();
    let mut coeffs = vec![C64::new(0.0, 0.0); total];
    let mut idx1 = vec![0usize; ns[0]];
    for &c1 in s1.coeffs() {
        let base: usize = idx1.iter().enumerate().map(|(k, &v)| weight[0][k] * v).sum();
        if c1.norm_sqr() != 0.0 {
            let mut idx2 = vec![0usize; ns[1]];
            for &c2 in s2.coeffs() {
                let off: usize =
                    idx2.iter().enumerate().map(|(k, &v)| weight[1][k] * v).sum();
                coeffs[base + off] = c1 * c2;
                advance(&mut idx2, in_dims[1]);
            }
        }
        advance(&mut idx1, in_dims[0]);
    }
    StateTensor::new(out_dims, coeffs)
}

/// Serializable summary of an LME check.
#[derive(Clone, Debug, Serialize)]
pub struct LmeVerdict {
    pub is_lme: bool,
    pub max_deviation: f64,
    pub tol: f64,
}
