//! Gradient flow of the moment-map square: from any nonzero state either down
//! to an LME normal form (semistable case) or to the zero vector (unstable
//! case).
//!
//! The flow direction is `d psi / d lambda = -sum_i rho_hat_i psi` with
//! `rho_hat_i = rho_i - tr(rho_i)/d_i`. A first-order step of size `h` is
//! applied through the factor-wise matrix exponentials `exp(-h rho_hat_i)`:
//! these agree with the forward-Euler update to `O(h)`, and because each
//! `rho_hat_i` is traceless they are exactly unit-determinant, so every step
//! stays on the SLOCC orbit and polynomial orbit invariants are conserved to
//! rounding instead of drifting at `O(h^2)` per step. Steps adapt: halve when
//! the moment-map square or the norm would rise, grow 1.2x after acceptance.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::Rng;
use serde::Serialize;

use crate::tensor::{reduced_density, DensityMatrix, StateTensor};
use crate::{Error, Result};

/// Flow stopping parameters.
#[derive(Clone, Copy, Debug)]
pub struct FlowOptions {
    /// Initial step size.
    pub step: f64,
    /// Accepted-step budget.
    pub max_iters: u64,
    /// Entrywise reduced-density tolerance declaring the endpoint LME.
    pub lme_tol: f64,
    /// Norm below which the trajectory is declared unstable.
    pub norm_floor: f64,
    /// Record the moment-map trace every this many accepted steps.
    pub record_every: u64,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions {
            step: 0.05,
            max_iters: 200_000,
            lme_tol: 1e-7,
            norm_floor: 1e-6,
            record_every: 100,
        }
    }
}

/// How a flow run ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FlowClass {
    /// Endpoint passed the LME check at the flow tolerance.
    Semistable,
    /// Norm fell below the floor.
    Unstable,
    /// Step budget exhausted.
    MaxIterations,
}

/// Orbit verdict for [`classify_orbit`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum OrbitVerdict {
    Semistable,
    Unstable,
    Undecided,
}

/// Everything measured along one flow run.
#[derive(Clone, Debug)]
pub struct FlowReport {
    pub endpoint: StateTensor,
    pub classification: FlowClass,
    pub steps: u64,
    pub final_m: f64,
    pub final_norm: f64,
    /// Relative drift of the three-qubit quartic orbit invariant, recorded
    /// when the dimensions are exactly (2,2,2).
    pub invariant_drift: Option<f64>,
    /// Largest single-step rise in the moment-map square over accepted steps.
    pub max_m_increase: f64,
    /// Largest single-step rise in the norm over accepted steps.
    pub max_norm_increase: f64,
    /// (accepted step, M) samples.
    pub m_trace: Vec<(u64, f64)>,
}

/// Right-hand side of the flow: `-sum_i rho_hat_i psi`. Vanishes exactly on
/// LME states (up to scale).
pub fn flow_tangent(s: &StateTensor) -> Result<StateTensor> {
    if s.norm2() <= 0.0 {
        return Err(Error::ZeroState);
    }
    let hats = hats_from_densities(&factor_densities(s)?);
    let mut acc = StateTensor::zero(s.dims().to_vec())?;
    for (i, hat) in hats.iter().enumerate() {
        let contrib = apply_factor_matrix(s, i, hat);
        let coeffs: Vec<C64> = acc
            .coeffs()
            .iter()
            .zip(contrib.coeffs())
            .map(|(a, b)| a - b)
            .collect();
        acc = StateTensor::new(s.dims().to_vec(), coeffs)?;
    }
    Ok(acc)
}

/// Integrate the flow until the endpoint is LME at `lme_tol`, the norm falls
/// below `norm_floor`, or `max_iters` accepted steps have been taken.
pub fn flow_to_normal_form(s: &StateTensor, opts: &FlowOptions) -> Result<FlowReport> {
    if !(opts.step > 0.0) || !(opts.lme_tol > 0.0) || !(opts.norm_floor > 0.0) {
        return Err(Error::InvalidParameter(
            "step, lme_tol and norm_floor must be positive".into(),
        ));
    }
    let mut psi = s.normalized()?;
    let track_invariant = psi.dims() == [2, 2, 2];
    let det0 = if track_invariant {
        cayley_hyperdeterminant(&psi)?
    } else {
        C64::new(0.0, 0.0)
    };
    let det_scale = det0.norm().max(1e-9);
    let mut det_drift: f64 = 0.0;

    let mut rhos = factor_densities(&psi)?;
    let mut m_cur = moment_from_densities(&rhos);
    let mut h = opts.step;
    let mut steps: u64 = 0;
    let mut max_m_increase: f64 = 0.0;
    let mut max_norm_increase: f64 = 0.0;
    let mut m_trace = vec![(0, m_cur)];
    const SLACK: f64 = 1e-15;

    let classification = loop {
        if lme_deviation(&psi, &rhos) <= opts.lme_tol {
            break FlowClass::Semistable;
        }
        if psi.norm2().sqrt() < opts.norm_floor {
            break FlowClass::Unstable;
        }
        if steps >= opts.max_iters {
            break FlowClass::MaxIterations;
        }

        let hats = hats_from_densities(&rhos);
        let mut accepted = None;
        while h > 1e-280 {
            let psi_try = step_by_exponentials(&psi, &hats, h)?;
            let rhos_try = factor_densities(&psi_try)?;
            let m_try = moment_from_densities(&rhos_try);
            let norm_ok = psi_try.norm2() <= psi.norm2() * (1.0 + SLACK) + SLACK;
            if m_try <= m_cur + SLACK && norm_ok {
                accepted = Some((psi_try, rhos_try, m_try));
                break;
            }
            h *= 0.5;
        }
        let Some((psi_new, rhos_new, m_new)) = accepted else {
            break FlowClass::MaxIterations;
        };
        max_m_increase = max_m_increase.max(m_new - m_cur);
        max_norm_increase =
            max_norm_increase.max(psi_new.norm2().sqrt() - psi.norm2().sqrt());
        psi = psi_new;
        rhos = rhos_new;
        m_cur = m_new;
        h *= 1.2;
        steps += 1;
        if track_invariant {
            let det = cayley_hyperdeterminant(&psi)?;
            det_drift = det_drift.max((det - det0).norm() / det_scale);
        }
        if steps % opts.record_every == 0 {
            m_trace.push((steps, m_cur));
        }
    };

    if m_trace.last().map(|&(k, _)| k) != Some(steps) {
        m_trace.push((steps, m_cur));
    }
    Ok(FlowReport {
        final_norm: psi.norm2().sqrt(),
        final_m: m_cur,
        endpoint: psi,
        classification,
        steps,
        invariant_drift: track_invariant.then_some(det_drift),
        max_m_increase,
        max_norm_increase,
        m_trace,
    })
}

/// Flow wrapper mapping a spent iteration budget to `Undecided`.
pub fn classify_orbit(s: &StateTensor, opts: &FlowOptions) -> Result<OrbitVerdict> {
    Ok(match flow_to_normal_form(s, opts)?.classification {
        FlowClass::Semistable => OrbitVerdict::Semistable,
        FlowClass::Unstable => OrbitVerdict::Unstable,
        FlowClass::MaxIterations => OrbitVerdict::Undecided,
    })
}

fn factor_densities(s: &StateTensor) -> Result<Vec<DensityMatrix>> {
    (0..s.n_factors()).map(|i| single_factor_density(s, i)).collect()
}

fn single_factor_density(s: &StateTensor, i: usize) -> Result<DensityMatrix> {
    if s.n_factors() == 1 {
        let d = s.dims()[0];
        let mat = DMatrix::from_fn(d, d, |a, b| s.coeffs()[a] * s.coeffs()[b].conj());
        return Ok(DensityMatrix { dim: d, mat });
    }
    reduced_density(s, &[i])
}

fn moment_from_densities(rhos: &[DensityMatrix]) -> f64 {
    rhos.iter()
        .map(|rho| {
            let tr = rho.trace();
            0.5 * (rho.purity() - tr * tr / rho.dim as f64)
        })
        .sum()
}

fn lme_deviation(s: &StateTensor, rhos: &[DensityMatrix]) -> f64 {
    let n2 = s.norm2();
    if n2 <= 0.0 {
        return f64::INFINITY;
    }
    rhos.iter()
        .map(|rho| {
            let scaled = DensityMatrix {
                dim: rho.dim,
                mat: &rho.mat * C64::new(1.0 / n2, 0.0),
            };
            scaled.max_deviation_from_scaled_identity(1.0 / rho.dim as f64)
        })
        .fold(0.0, f64::max)
}

fn hats_from_densities(rhos: &[DensityMatrix]) -> Vec<DMatrix<C64>> {
    rhos.iter()
        .map(|rho| {
            let shift = rho.trace() / rho.dim as f64;
            let mut hat = rho.mat.clone();
            for i in 0..rho.dim {
                hat[(i, i)] -= C64::new(shift, 0.0);
            }
            hat
        })
        .collect()
}

/// Apply `exp(-h rho_hat_i)` on every factor. The exponentials of the
/// commuting factor actions compose exactly, and each has unit determinant
/// because the exponent is traceless.
fn step_by_exponentials(
    s: &StateTensor,
    hats: &[DMatrix<C64>],
    h: f64,
) -> Result<StateTensor> {
    let mut cur = s.clone();
    for (i, hat) in hats.iter().enumerate() {
        let e = expm_hermitian(hat, -h);
        cur = apply_factor_matrix(&cur, i, &e);
    }
    Ok(cur)
}

/// `exp(scale * m)` for Hermitian `m`, through the unitary eigendecomposition.
fn expm_hermitian(m: &DMatrix<C64>, scale: f64) -> DMatrix<C64> {
    let d = m.nrows();
    if d == 1 {
        return DMatrix::from_element(1, 1, C64::new((scale * m[(0, 0)].re).exp(), 0.0));
    }
    let eig = m.clone().symmetric_eigen();
    let mut out = DMatrix::from_element(d, d, C64::new(0.0, 0.0));
    for k in 0..d {
        let w = (scale * eig.eigenvalues[k]).exp();
        let col = eig.eigenvectors.column(k);
        for a in 0..d {
            for b in 0..d {
                out[(a, b)] += col[a] * col[b].conj() * C64::new(w, 0.0);
            }
        }
    }
    out
}

/// Act with a matrix on one tensor factor: `out[.., j, ..] = sum_k m[j,k] in[.., k, ..]`.
pub(crate) fn apply_factor_matrix(
    s: &StateTensor,
    factor: usize,
    m: &DMatrix<C64>,
) -> StateTensor {
    let dims = s.dims();
    let d = dims[factor];
    debug_assert_eq!(m.nrows(), d);
    debug_assert_eq!(m.ncols(), d);
    let stride: usize = dims[factor + 1..].iter().product();
    let block = d * stride;
    let outer: usize = dims[..factor].iter().product();

    let src = s.coeffs();
    let mut dst = vec![C64::new(0.0, 0.0); src.len()];
    let mut col = vec![C64::new(0.0, 0.0); d];
    for o in 0..outer {
        let base = o * block;
        for off in 0..stride {
            for k in 0..d {
                col[k] = src[base + k * stride + off];
            }
            for j in 0..d {
                let mut acc = C64::new(0.0, 0.0);
                for k in 0..d {
                    acc += m[(j, k)] * col[k];
                }
                dst[base + j * stride + off] = acc;
            }
        }
    }
    StateTensor::new(dims.to_vec(), dst).expect("same shape")
}

/// Quartic SLOCC invariant of a three-qubit state (the hyperdeterminant of
/// the 2x2x2 coefficient array).
pub fn cayley_hyperdeterminant(s: &StateTensor) -> Result<C64> {
    if s.dims() != [2, 2, 2] {
        return Err(Error::InvalidParameter(format!(
            "hyperdeterminant needs dimensions 2x2x2, got {:?}",
            s.dims()
        )));
    }
    let c = s.coeffs();
    let b = |i: usize, j: usize, k: usize| c[4 * i + 2 * j + k];
    // diagonal pair products
    let d1 = b(0, 0, 0) * b(1, 1, 1);
    let d2 = b(0, 1, 1) * b(1, 0, 0);
    let d3 = b(1, 0, 1) * b(0, 1, 0);
    let d4 = b(1, 1, 0) * b(0, 0, 1);
    let sq = d1 * d1 + d2 * d2 + d3 * d3 + d4 * d4;
    let cross = d1 * d2 + d1 * d3 + d1 * d4 + d2 * d3 + d2 * d4 + d3 * d4;
    let quad =
        b(0, 0, 0) * b(1, 1, 0) * b(1, 0, 1) * b(0, 1, 1) + b(1, 1, 1) * b(0, 0, 1) * b(0, 1, 0) * b(1, 0, 0);
    Ok(sq - cross * C64::new(2.0, 0.0) + quad * C64::new(4.0, 0.0))
}

/// [`random_state`] with a self-contained seed.
pub fn seeded_random_state(dims: Vec<usize>, seed: u64) -> Result<StateTensor> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    random_state(dims, &mut rng)
}

/// Standard complex Gaussian entries, then normalized; deterministic in the
/// caller's rng.
pub fn random_state(dims: Vec<usize>, rng: &mut impl Rng) -> Result<StateTensor> {
    let len: usize = dims.iter().product();
    let mut coeffs = Vec::with_capacity(len);
    for _ in 0..len {
        coeffs.push(C64::new(gaussian(rng), gaussian(rng)));
    }
    StateTensor::new(dims, coeffs)?.normalized()
}

fn gaussian(rng: &mut impl Rng) -> f64 {
    // Box-Muller on open-unit uniforms
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::{bell, ghz};
    use crate::tensor::{is_lme, tensor_product, Regroup};
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn w_state() -> StateTensor {
        let a = 1.0 / 3f64.sqrt();
        let mut coeffs = vec![C64::new(0.0, 0.0); 8];
        coeffs[1] = C64::new(a, 0.0);
        coeffs[2] = C64::new(a, 0.0);
        coeffs[4] = C64::new(a, 0.0);
        StateTensor::new(vec![2, 2, 2], coeffs).unwrap()
    }

    #[test]
    fn tangent_vanishes_on_lme_states() {
        let t = flow_tangent(&ghz(2, 3).unwrap()).unwrap();
        assert!(t.norm2() < 1e-28);
    }

    #[test]
    fn tangent_of_product_state() {
        // |00>: rho_hat = diag(1/2, -1/2) on both factors; tangent = -psi
        let mut coeffs = vec![C64::new(0.0, 0.0); 4];
        coeffs[0] = C64::new(1.0, 0.0);
        let p = StateTensor::new(vec![2, 2], coeffs).unwrap();
        let t = flow_tangent(&p).unwrap();
        assert_abs_diff_eq!(t.coeffs()[0].re, -1.0, epsilon = 1e-14);
        for k in 1..4 {
            assert_abs_diff_eq!(t.coeffs()[k].norm(), 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn tangent_is_cubically_homogeneous() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let s = random_state(vec![2, 3], &mut rng).unwrap();
        let c = C64::new(0.8, -0.4);
        let t1 = flow_tangent(&s.scaled(c)).unwrap();
        let t0 = flow_tangent(&s).unwrap();
        let factor = c * c.norm_sqr();
        for (a, b) in t1.coeffs().iter().zip(t0.coeffs()) {
            assert_abs_diff_eq!((a - b * factor).norm(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn ghz_is_a_fixed_point() {
        let r = flow_to_normal_form(&ghz(2, 3).unwrap(), &FlowOptions::default()).unwrap();
        assert_eq!(r.classification, FlowClass::Semistable);
        assert_eq!(r.steps, 0);
    }

    #[test]
    fn random_three_qubit_states_flow_to_lme() {
        let opts = FlowOptions::default();
        for seed in 0..5u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = random_state(vec![2, 2, 2], &mut rng).unwrap();
            let r = flow_to_normal_form(&s, &opts).unwrap();
            assert_eq!(r.classification, FlowClass::Semistable, "seed {seed}");
            let (ok, dev) = is_lme(&r.endpoint, 1e-7).unwrap();
            assert!(ok, "seed {seed}: dev {dev}");
            assert!(r.max_m_increase <= 1e-12);
            assert!(r.max_norm_increase <= 1e-12);
            assert!(r.invariant_drift.unwrap() <= 1e-6, "seed {seed}");
        }
    }

    #[test]
    fn w_state_is_unstable() {
        let r = flow_to_normal_form(&w_state(), &FlowOptions::default()).unwrap();
        assert_eq!(r.classification, FlowClass::Unstable);
        assert!(r.final_norm < 1e-6);
        assert_eq!(
            classify_orbit(&w_state(), &FlowOptions::default()).unwrap(),
            OrbitVerdict::Unstable
        );
    }

    #[test]
    fn product_state_is_unstable() {
        let mut coeffs = vec![C64::new(0.0, 0.0); 8];
        coeffs[0] = C64::new(1.0, 0.0);
        let s = StateTensor::new(vec![2, 2, 2], coeffs).unwrap();
        assert_eq!(
            classify_orbit(&s, &FlowOptions::default()).unwrap(),
            OrbitVerdict::Unstable
        );
    }

    #[test]
    fn bell_with_trivial_factor_is_semistable() {
        let b = bell(3).unwrap();
        let one = StateTensor::new(vec![1], vec![C64::new(1.0, 0.0)]).unwrap();
        let s = tensor_product(&b, &one, &Regroup::concat(2, 1)).unwrap();
        assert_eq!(s.dims(), &[3, 3, 1]);
        assert_eq!(
            classify_orbit(&s, &FlowOptions::default()).unwrap(),
            OrbitVerdict::Semistable
        );
    }

    #[test]
    fn m_trace_is_non_increasing() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let s = random_state(vec![2, 2, 2], &mut rng).unwrap();
        let opts = FlowOptions {
            record_every: 10,
            ..FlowOptions::default()
        };
        let r = flow_to_normal_form(&s, &opts).unwrap();
        for pair in r.m_trace.windows(2) {
            assert!(pair[1].1 <= pair[0].1 + 1e-12);
        }
    }

    #[test]
    fn hyperdeterminant_values_and_invariance() {
        let g = ghz(2, 3).unwrap();
        let det = cayley_hyperdeterminant(&g).unwrap();
        assert_abs_diff_eq!(det.re, 0.25, epsilon = 1e-14);
        assert_abs_diff_eq!(det.im, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(
            cayley_hyperdeterminant(&w_state()).unwrap().norm(),
            0.0,
            epsilon = 1e-14
        );

        // invariance under determinant-one local transformations
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = random_state(vec![2, 2, 2], &mut rng).unwrap();
        let det0 = cayley_hyperdeterminant(&s).unwrap();
        let mut cur = s;
        for f in 0..3 {
            let g = random_sl2(&mut rng);
            cur = apply_factor_matrix(&cur, f, &g);
        }
        let det1 = cayley_hyperdeterminant(&cur).unwrap();
        assert!((det1 - det0).norm() <= 1e-10 * det0.norm().max(1.0));

        assert!(cayley_hyperdeterminant(&bell(2).unwrap()).is_err());
    }

    fn random_sl2(rng: &mut ChaCha8Rng) -> DMatrix<C64> {
        loop {
            let m = DMatrix::from_fn(2, 2, |_, _| C64::new(gaussian(rng), gaussian(rng)));
            let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
            if det.norm() > 1e-3 {
                return m / det.sqrt();
            }
        }
    }
}
