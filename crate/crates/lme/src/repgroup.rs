//! Finite-group representation machinery: invariant-vector projectors and the
//! explicit family built on the order-`2p^3` extension of the unitriangular
//! group `UT(3,p)` by the sign-flip involution.
//!
//! The projector route to LME states: given unitary irreducible
//! representations `R_1, ..., R_n` whose tensor product contains an invariant
//! vector, every unit vector in the image of
//! `P = (1/|H|) sum_h R_1(h) x ... x R_n(h)` is invariant, and invariance
//! under a group acting irreducibly on each factor forces every single-factor
//! reduced density matrix to be maximally mixed.
//!
//! The nonnegativity of the existence invariant R is necessary for such a
//! tuple of irreducible representations to exist at given dimensions, but not
//! sufficient: `(2,2,2,7)` admits LME states while no group furnishes
//! matching irreducible representations, because a product of two
//! two-dimensional representations cannot share an irreducible constituent
//! with a product of a two- and a seven-dimensional one. This module
//! therefore exposes constructions only for its explicit families and makes
//! no attempt to search for groups at arbitrary dimension vectors.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::tensor::{is_lme, StateTensor};
use crate::{Error, Result};

const UNITARITY_TOL: f64 = 1e-10;
const HOMOMORPHISM_TOL: f64 = 1e-8;

/// Finite group materialized as a multiplication table.
#[derive(Debug)]
pub struct FiniteGroup {
    order: usize,
    mul: Vec<u32>,
    inv: Vec<u32>,
    identity: u32,
    fingerprint: u64,
}

impl FiniteGroup {
    /// Validate a multiplication table: two-sided identity, two-sided
    /// inverses, rows and columns permutations, associativity spot-checked on
    /// pseudorandom triples.
    pub fn from_mul_table(table: Vec<Vec<u32>>) -> Result<Arc<Self>> {
        let order = table.len();
        if order == 0 {
            return Err(Error::InvalidParameter("empty group".into()));
        }
        if table.iter().any(|row| row.len() != order) {
            return Err(Error::InvalidParameter("ragged multiplication table".into()));
        }
        let flat: Vec<u32> = table.iter().flatten().copied().collect();
        if flat.iter().any(|&v| v as usize >= order) {
            return Err(Error::InvalidParameter("element index out of range".into()));
        }

        let identity = (0..order as u32)
            .find(|&e| {
                (0..order as u32).all(|g| {
                    table[e as usize][g as usize] == g && table[g as usize][e as usize] == g
                })
            })
            .ok_or_else(|| Error::InvalidParameter("no identity element".into()))?;

        let mut inv = vec![u32::MAX; order];
        for g in 0..order {
            let h = (0..order as u32)
                .find(|&h| {
                    table[g][h as usize] == identity && table[h as usize][g] == identity
                })
                .ok_or_else(|| {
                    Error::InvalidParameter(format!("element {g} has no inverse"))
                })?;
            inv[g] = h;
        }

        let mut rng = ChaCha8Rng::seed_from_u64(0x6772_6f75_7073);
        let samples = 512.min(order * order * order);
        for _ in 0..samples {
            let a = rng.gen_range(0..order);
            let b = rng.gen_range(0..order);
            let c = rng.gen_range(0..order);
            let ab_c = table[table[a][b] as usize][c];
            let a_bc = table[a][table[b][c] as usize];
            if ab_c != a_bc {
                return Err(Error::InvalidParameter(format!(
                    "associativity fails at ({a},{b},{c})"
                )));
            }
        }

        let mut hasher = DefaultHasher::new();
        flat.hash(&mut hasher);
        let fingerprint = hasher.finish();

        Ok(Arc::new(FiniteGroup {
            order,
            mul: flat,
            inv,
            identity,
            fingerprint,
        }))
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> u32 {
        self.identity
    }

    pub fn mul(&self, g: u32, h: u32) -> u32 {
        self.mul[g as usize * self.order + h as usize]
    }

    pub fn inv(&self, g: u32) -> u32 {
        self.inv[g as usize]
    }

    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    /// Conjugacy classes, each sorted, ordered by smallest member.
    pub fn conjugacy_classes(&self) -> Vec<Vec<u32>> {
        let mut seen = vec![false; self.order];
        let mut classes = Vec::new();
        for g in 0..self.order as u32 {
            if seen[g as usize] {
                continue;
            }
            let mut class: Vec<u32> = (0..self.order as u32)
                .map(|h| self.mul(self.mul(h, g), self.inv(h)))
                .collect();
            class.sort_unstable();
            class.dedup();
            for &c in &class {
                seen[c as usize] = true;
            }
            classes.push(class);
        }
        classes
    }

    /// Multiset of class sizes as (size, how many classes) sorted by size.
    pub fn class_size_inventory(&self) -> Vec<(usize, usize)> {
        let mut counts = std::collections::BTreeMap::new();
        for class in self.conjugacy_classes() {
            *counts.entry(class.len()).or_insert(0) += 1;
        }
        counts.into_iter().collect()
    }
}

/// Unitary (possibly projective) representation: one matrix per element.
#[derive(Clone, Debug)]
pub struct GroupRep {
    group: Arc<FiniteGroup>,
    dim: usize,
    mats: Vec<DMatrix<C64>>,
    /// Scalar factor table `c(g,h)` with `R(g) R(h) = c(g,h) R(gh)`;
    /// `None` for ordinary representations (`c = 1`).
    cocycle: Option<Vec<C64>>,
}

impl GroupRep {
    /// Ordinary representation. Unitarity is checked for every element; the
    /// homomorphism law is spot-checked on sampled pairs.
    pub fn new(group: Arc<FiniteGroup>, mats: Vec<DMatrix<C64>>) -> Result<Self> {
        let rep = Self::validate_common(group, mats)?;
        let order = rep.group.order;
        let check_pair = |g: u32, h: u32| -> Result<()> {
            let prod = &rep.mats[g as usize] * &rep.mats[h as usize];
            let target = &rep.mats[rep.group.mul(g, h) as usize];
            if max_abs_diff(&prod, target) > HOMOMORPHISM_TOL {
                return Err(Error::NotARepresentation(format!(
                    "R({g})R({h}) differs from R({g}h)"
                )));
            }
            Ok(())
        };
        if order * order <= 4096 {
            for g in 0..order as u32 {
                for h in 0..order as u32 {
                    check_pair(g, h)?;
                }
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(0x7265_7073);
            for _ in 0..400 {
                check_pair(rng.gen_range(0..order) as u32, rng.gen_range(0..order) as u32)?;
            }
        }
        Ok(rep)
    }

    /// Projective representation: the full scalar table `c(g,h)` is computed
    /// and stored. Quadratic in the group order, so capped.
    pub fn new_projective(group: Arc<FiniteGroup>, mats: Vec<DMatrix<C64>>) -> Result<Self> {
        if group.order() > 1024 {
            return Err(Error::ResourceCap(format!(
                "cocycle table for order {} is too large",
                group.order()
            )));
        }
        let mut rep = Self::validate_common(group, mats)?;
        let order = rep.group.order;
        let d = rep.dim;
        let mut cocycle = vec![C64::new(0.0, 0.0); order * order];
        for g in 0..order as u32 {
            for h in 0..order as u32 {
                let prod = &rep.mats[g as usize] * &rep.mats[h as usize];
                let target = &rep.mats[rep.group.mul(g, h) as usize];
                // c = tr(prod target^dagger)/d; then prod must equal c target
                let mut c = C64::new(0.0, 0.0);
                for i in 0..d {
                    for j in 0..d {
                        c += prod[(i, j)] * target[(i, j)].conj();
                    }
                }
                c /= C64::new(d as f64, 0.0);
                if (c.norm() - 1.0).abs() > HOMOMORPHISM_TOL {
                    return Err(Error::NotARepresentation(format!(
                        "scalar factor at ({g},{h}) has modulus {}",
                        c.norm()
                    )));
                }
                let scaled = target * c;
                if max_abs_diff(&prod, &scaled) > HOMOMORPHISM_TOL {
                    return Err(Error::NotARepresentation(format!(
                        "R({g})R({h}) is not a scalar multiple of R({g}{h})"
                    )));
                }
                cocycle[g as usize * order + h as usize] = c;
            }
        }
        let trivial = cocycle
            .iter()
            .all(|c| (c - C64::new(1.0, 0.0)).norm() <= HOMOMORPHISM_TOL);
        rep.cocycle = (!trivial).then_some(cocycle);
        Ok(rep)
    }

    fn validate_common(group: Arc<FiniteGroup>, mats: Vec<DMatrix<C64>>) -> Result<Self> {
        if mats.len() != group.order() {
            return Err(Error::InvalidParameter(format!(
                "expected {} matrices, got {}",
                group.order(),
                mats.len()
            )));
        }
        let dim = mats[0].nrows();
        if dim == 0 {
            return Err(Error::InvalidParameter("zero-dimensional representation".into()));
        }
        for (g, m) in mats.iter().enumerate() {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::InvalidParameter(format!(
                    "matrix {g} is not {dim}x{dim}"
                )));
            }
            let gram = m * m.adjoint();
            let eye = DMatrix::<C64>::identity(dim, dim);
            if max_abs_diff(&gram, &eye) > UNITARITY_TOL {
                return Err(Error::InvalidParameter(format!("matrix {g} is not unitary")));
            }
        }
        Ok(GroupRep {
            group,
            dim,
            mats,
            cocycle: None,
        })
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self, g: u32) -> &DMatrix<C64> {
        &self.mats[g as usize]
    }

    pub fn is_projective(&self) -> bool {
        self.cocycle.is_some()
    }

    /// Dual representation: entrywise conjugation (unitary case).
    pub fn dual(&self) -> GroupRep {
        GroupRep {
            group: self.group.clone(),
            dim: self.dim,
            mats: self.mats.iter().map(|m| m.map(|c| c.conj())).collect(),
            cocycle: self
                .cocycle
                .as_ref()
                .map(|t| t.iter().map(|c| c.conj()).collect()),
        }
    }

    /// Character, one value per element.
    pub fn character(&self) -> Vec<C64> {
        self.mats
            .iter()
            .map(|m| (0..self.dim).map(|i| m[(i, i)]).sum())
            .collect()
    }

    /// `(1/|H|) sum_h |chi(h)|^2`; equals 1 exactly for irreducibles.
    pub fn character_norm2(&self) -> f64 {
        let chi = self.character();
        chi.iter().map(|c| c.norm_sqr()).sum::<f64>() / self.group.order() as f64
    }

    pub fn is_irreducible(&self) -> bool {
        (self.character_norm2() - 1.0).abs() < 1e-8
    }
}

fn max_abs_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            worst = worst.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    worst
}

fn check_same_group(reps: &[&GroupRep]) -> Result<Arc<FiniteGroup>> {
    let first = reps
        .first()
        .ok_or_else(|| Error::InvalidParameter("no representations given".into()))?;
    for r in reps {
        if r.group.fingerprint() != first.group.fingerprint() {
            return Err(Error::GroupMismatch);
        }
    }
    Ok(first.group.clone())
}

/// The pointwise product of the reps' scalar tables must be 1 for the tensor
/// product to be an ordinary representation.
fn check_cocycles_cancel(reps: &[&GroupRep], order: usize) -> Result<()> {
    if reps.iter().all(|r| r.cocycle.is_none()) {
        return Ok(());
    }
    for g in 0..order {
        for h in 0..order {
            let mut prod = C64::new(1.0, 0.0);
            for r in reps {
                if let Some(t) = &r.cocycle {
                    prod *= t[g * order + h];
                }
            }
            if (prod - C64::new(1.0, 0.0)).norm() > HOMOMORPHISM_TOL {
                return Err(Error::CocycleObstruction(format!(
                    "product scalar factor at pair ({g},{h}) is {prod}"
                )));
            }
        }
    }
    Ok(())
}

/// Multiplicity of `target` (or the trivial representation, when `None`) in
/// the tensor product of `reps`, by the character inner product.
pub fn tensor_multiplicity(reps: &[&GroupRep], target: Option<&GroupRep>) -> Result<u64> {
    let group = check_same_group(reps)?;
    if let Some(t) = target {
        if t.group.fingerprint() != group.fingerprint() {
            return Err(Error::GroupMismatch);
        }
    }
    let mut all: Vec<&GroupRep> = reps.to_vec();
    let target_dual = target.map(|t| t.dual());
    if let Some(td) = &target_dual {
        all.push(td);
    }
    check_cocycles_cancel(&all, group.order())?;

    let chars: Vec<Vec<C64>> = reps.iter().map(|r| r.character()).collect();
    let target_char = target.map(|t| t.character());
    let mut acc = C64::new(0.0, 0.0);
    for g in 0..group.order() {
        let mut term = C64::new(1.0, 0.0);
        for chi in &chars {
            term *= chi[g];
        }
        if let Some(tc) = &target_char {
            term *= tc[g].conj();
        }
        acc += term;
    }
    acc /= C64::new(group.order() as f64, 0.0);
    let rounded = acc.re.round();
    if (acc.re - rounded).abs() > 1e-6 || acc.im.abs() > 1e-6 || rounded < 0.0 {
        return Err(Error::NotARepresentation(format!(
            "character inner product {acc} is not a nonnegative integer"
        )));
    }
    Ok(rounded as u64)
}

/// Group average of the tensored representation:
/// `P = (1/|H|) sum_h R_1(h) x ... x R_n(h)`, an orthogonal projector onto
/// the invariant subspace.
pub fn invariant_projector(reps: &[&GroupRep]) -> Result<DMatrix<C64>> {
    let group = check_same_group(reps)?;
    check_cocycles_cancel(reps, group.order())?;
    let dim: usize = reps.iter().map(|r| r.dim()).product();
    if dim > 4096 {
        return Err(Error::ResourceCap(format!(
            "tensor dimension {dim} exceeds the projector cap"
        )));
    }
    let cost = group.order() as u128 * (dim as u128) * (dim as u128);
    if cost > 20_000_000_000 {
        return Err(Error::ResourceCap(format!(
            "projector accumulation cost {cost} is too large"
        )));
    }
    let mut p = DMatrix::from_element(dim, dim, C64::new(0.0, 0.0));
    for g in 0..group.order() as u32 {
        let mut kron = reps[0].matrix(g).clone();
        for r in &reps[1..] {
            kron = kron.kronecker(r.matrix(g));
        }
        p += kron;
    }
    p /= C64::new(group.order() as f64, 0.0);
    Ok(p)
}

/// A unit vector in the invariant subspace of the tensored representations,
/// returned as a state on `(dim R_1, ..., dim R_n)`. Each representation must
/// be irreducible; the output is verified maximally mixed on every factor
/// before being returned.
pub fn lme_from_invariant(reps: &[&GroupRep]) -> Result<StateTensor> {
    for r in reps {
        let norm2 = r.character_norm2();
        if (norm2 - 1.0).abs() >= 1e-8 {
            return Err(Error::NotIrreducible(norm2));
        }
    }
    let p = invariant_projector(reps)?;
    let dim = p.nrows();
    let rank: f64 = (0..dim).map(|i| p[(i, i)].re).sum();
    if rank.round() < 0.5 {
        return Err(Error::NoInvariant);
    }
    // some basis vector projects with norm^2 >= rank/dim; take the first
    // that clears a safe floor
    let mut best: Option<(f64, usize)> = None;
    for j in 0..dim {
        let norm2: f64 = (0..dim).map(|i| p[(i, j)].norm_sqr()).sum();
        if norm2 > 1e-6 {
            best = Some((norm2, j));
            break;
        }
        if best.map_or(true, |(b, _)| norm2 > b) {
            best = Some((norm2, j));
        }
    }
    let (norm2, j) = best.ok_or(Error::NoInvariant)?;
    if norm2 <= 1e-9 {
        return Err(Error::NoInvariant);
    }
    let scale = 1.0 / norm2.sqrt();
    let coeffs: Vec<C64> = (0..dim).map(|i| p[(i, j)] * scale).collect();
    let dims: Vec<usize> = reps.iter().map(|r| r.dim()).collect();
    let state = StateTensor::new(dims, coeffs)?;
    let (ok, dev) = is_lme(&state, 1e-9)?;
    if !ok {
        return Err(Error::InvalidParameter(format!(
            "projector image failed the maximal-mixedness check (deviation {dev})"
        )));
    }
    Ok(state)
}

// ---------------------------------------------------------------------------
// the order-2p^3 family

/// Element coordinates: `a, b, c` are the strictly-upper entries of the
/// unitriangular matrix mod `p`; `t` is the involution bit. The involution
/// negates `a` and `c`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct UtElement {
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub t: bool,
}

/// The group of order `2p^3`, for odd prime `p`, together with its element
/// indexing and its irreducible representations.
pub struct UtGroup {
    p: u64,
    group: Arc<FiniteGroup>,
}

/// Sign choice for the p-dimensional representations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

fn is_odd_prime(p: u64) -> bool {
    if p < 3 || p % 2 == 0 {
        return false;
    }
    let mut d = 3;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

impl UtGroup {
    pub fn new(p: u64) -> Result<Self> {
        if !is_odd_prime(p) {
            return Err(Error::InvalidParameter(format!("{p} is not an odd prime")));
        }
        if p > 11 {
            return Err(Error::ResourceCap(format!(
                "order {} multiplication table is too large",
                2 * p * p * p
            )));
        }
        let order = (2 * p * p * p) as usize;
        let index = |a: u64, b: u64, c: u64, t: u64| -> u32 {
            ((((a * p + b) * p + c) * 2) + t) as u32
        };
        let coords = |g: u32| -> (u64, u64, u64, u64) {
            let g = g as u64;
            let t = g % 2;
            let rest = g / 2;
            let c = rest % p;
            let rest = rest / p;
            let b = rest % p;
            let a = rest / p;
            (a, b, c, t)
        };
        let mut table = vec![vec![0u32; order]; order];
        for g in 0..order as u32 {
            let (a1, b1, c1, t1) = coords(g);
            for h in 0..order as u32 {
                let (a2, b2, c2, t2) = coords(h);
                // apply the involution to the right factor when t1 is set
                let (a2, c2) = if t1 == 1 {
                    ((p - a2) % p, (p - c2) % p)
                } else {
                    (a2, c2)
                };
                let a = (a1 + a2) % p;
                let b = (b1 + b2 + a1 * c2) % p;
                let c = (c1 + c2) % p;
                table[g as usize][h as usize] = index(a, b, c, (t1 + t2) % 2);
            }
        }
        let group = FiniteGroup::from_mul_table(table)?;
        Ok(UtGroup { p, group })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn order(&self) -> usize {
        self.group.order()
    }

    pub fn element_index(&self, e: UtElement) -> u32 {
        let p = self.p;
        ((((e.a % p * p + e.b % p) * p + e.c % p) * 2) + e.t as u64) as u32
    }

    pub fn element(&self, g: u32) -> UtElement {
        let p = self.p;
        let g = g as u64;
        let t = g % 2 == 1;
        let rest = g / 2;
        UtElement {
            a: rest / (p * p),
            b: rest / p % p,
            c: rest % p,
            t,
        }
    }

    fn omega(&self, num: u64) -> C64 {
        let angle = 2.0 * std::f64::consts::PI * (num % self.p) as f64 / self.p as f64;
        C64::from_polar(1.0, angle)
    }

    /// One-dimensional representations: trivial, and the sign of the
    /// involution bit.
    pub fn irrep_one(&self, sign_rep: bool) -> GroupRep {
        let mats = (0..self.order() as u32)
            .map(|g| {
                let e = self.element(g);
                let v = if sign_rep && e.t { -1.0 } else { 1.0 };
                DMatrix::from_element(1, 1, C64::new(v, 0.0))
            })
            .collect();
        GroupRep::new(self.group.clone(), mats).expect("closed-form representation")
    }

    /// Two-dimensional representation `2^{x,y}` for `(x,y) != (0,0)`:
    /// diagonal phases `exp(+-2 pi i (x a + y c)/p)` on the unitriangular
    /// part, the swap matrix on the involution.
    pub fn irrep_two(&self, x: u64, y: u64) -> Result<GroupRep> {
        let p = self.p;
        if x % p == 0 && y % p == 0 {
            return Err(Error::InvalidParameter(
                "(x, y) = (0, 0) gives a reducible representation".into(),
            ));
        }
        let zero = C64::new(0.0, 0.0);
        let mats = (0..self.order() as u32)
            .map(|g| {
                let e = self.element(g);
                let w = self.omega(x * e.a + y * e.c);
                let diag = [w, w.conj()];
                if e.t {
                    DMatrix::from_row_slice(2, 2, &[zero, diag[0], diag[1], zero])
                } else {
                    DMatrix::from_row_slice(2, 2, &[diag[0], zero, zero, diag[1]])
                }
            })
            .collect();
        GroupRep::new(self.group.clone(), mats)
    }

    /// p-dimensional representation `p^{sign,y}` for `y` invertible mod p:
    /// the shift-by-`a` matrix with phases `exp(2 pi i y (c(k-a) + b)/p)` on
    /// the unitriangular part, the signed index-negation on the involution.
    pub fn irrep_p(&self, sign: Sign, y: u64) -> Result<GroupRep> {
        let p = self.p as usize;
        if y % self.p == 0 {
            return Err(Error::InvalidParameter(
                "y must be invertible mod p".into(),
            ));
        }
        let zero = C64::new(0.0, 0.0);
        let sgn = match sign {
            Sign::Plus => C64::new(1.0, 0.0),
            Sign::Minus => C64::new(-1.0, 0.0),
        };
        let mats = (0..self.order() as u32)
            .map(|g| {
                let e = self.element(g);
                let mut ut = DMatrix::from_element(p, p, zero);
                for k in 0..p {
                    let j = (k + p - e.a as usize % p) % p;
                    ut[(j, k)] = self.omega(y * (e.c * j as u64 + e.b));
                }
                if e.t {
                    // right-multiply by the signed negation permutation
                    let mut swap = DMatrix::from_element(p, p, zero);
                    for m in 0..p {
                        swap[(m, (p - m) % p)] = sgn;
                    }
                    ut * swap
                } else {
                    ut
                }
            })
            .collect();
        GroupRep::new(self.group.clone(), mats)
    }

    /// Every irreducible representation: 2 one-dimensional,
    /// `(p^2-1)/2` two-dimensional, `2(p-1)` p-dimensional.
    pub fn all_irreps(&self) -> Result<Vec<GroupRep>> {
        Ok(self
            .all_irreps_labeled()?
            .into_iter()
            .map(|(_, r)| r)
            .collect())
    }

    /// As [`Self::all_irreps`], with display labels.
    pub fn all_irreps_labeled(&self) -> Result<Vec<(String, GroupRep)>> {
        let p = self.p;
        let mut out = vec![
            ("1{+}".to_string(), self.irrep_one(false)),
            ("1{-}".to_string(), self.irrep_one(true)),
        ];
        for x in 0..p {
            for y in 0..p {
                if (x, y) == (0, 0) {
                    continue;
                }
                // 2^{x,y} and 2^{-x,-y} coincide; keep the lexicographically
                // smaller label
                if (x, y) <= ((p - x) % p, (p - y) % p) {
                    out.push((format!("2{{{x},{y}}}"), self.irrep_two(x, y)?));
                }
            }
        }
        for y in 1..p {
            out.push((format!("{p}{{+,{y}}}"), self.irrep_p(Sign::Plus, y)?));
            out.push((format!("{p}{{-,{y}}}"), self.irrep_p(Sign::Minus, y)?));
        }
        Ok(out)
    }

    /// The `(2, p, p)` LME state from `{2^{x,y}, p^{+,y'}, dual(p^{+,y'})}`.
    pub fn lme_state_2pp(&self, x: u64, y: u64, yprime: u64) -> Result<StateTensor> {
        let two = self.irrep_two(x, y)?;
        let pd = self.irrep_p(Sign::Plus, yprime)?;
        let dual = pd.dual();
        lme_from_invariant(&[&two, &pd, &dual])
    }
}

// ---------------------------------------------------------------------------
// the symmetric group on three letters, with its two-dimensional irreducible

/// S3 as permutations of three letters; element order: identity, the two
/// 3-cycles, then the three transpositions.
pub fn s3_group() -> Arc<FiniteGroup> {
    let perms: [[usize; 3]; 6] = [
        [0, 1, 2], // e
        [1, 2, 0], // x -> x+1
        [2, 0, 1], // x -> x+2
        [1, 0, 2], // swap 0,1
        [0, 2, 1], // swap 1,2
        [2, 1, 0], // swap 0,2
    ];
    let compose = |g: [usize; 3], h: [usize; 3]| -> [usize; 3] {
        // apply h first, then g
        [g[h[0]], g[h[1]], g[h[2]]]
    };
    let find = |q: [usize; 3]| -> u32 {
        perms.iter().position(|&p| p == q).expect("closed") as u32
    };
    let table: Vec<Vec<u32>> = perms
        .iter()
        .map(|&g| perms.iter().map(|&h| find(compose(g, h))).collect())
        .collect();
    FiniteGroup::from_mul_table(table).expect("S3 is a group")
}

/// The faithful two-dimensional irreducible of S3: diagonal cube-root phases
/// on the rotations, antidiagonal on the transpositions. A fixed regression
/// fixture; three copies of it carry exactly one invariant vector.
pub fn s3_two_dim() -> (Arc<FiniteGroup>, GroupRep) {
    let group = s3_group();
    let w = C64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
    let zero = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let mats = vec![
        DMatrix::from_row_slice(2, 2, &[one, zero, zero, one]),
        DMatrix::from_row_slice(2, 2, &[w.conj(), zero, zero, w]),
        DMatrix::from_row_slice(2, 2, &[w, zero, zero, w.conj()]),
        DMatrix::from_row_slice(2, 2, &[zero, one, one, zero]),
        DMatrix::from_row_slice(2, 2, &[zero, w, w.conj(), zero]),
        DMatrix::from_row_slice(2, 2, &[zero, w.conj(), w, zero]),
    ];
    let rep = GroupRep::new(group.clone(), mats).expect("fixed matrices");
    (group, rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::reduced_density;
    use approx::assert_abs_diff_eq;

    #[test]
    fn s3_table_and_rep() {
        let (group, rep) = s3_two_dim();
        assert_eq!(group.order(), 6);
        // full homomorphism check
        for g in 0..6u32 {
            for h in 0..6u32 {
                let prod = rep.matrix(g) * rep.matrix(h);
                let want = rep.matrix(group.mul(g, h));
                assert!(max_abs_diff(&prod, want) < 1e-12, "({g},{h})");
            }
        }
        assert!(rep.is_irreducible());
        // classes: identity, the rotations, the transpositions
        let inv = group.class_size_inventory();
        assert_eq!(inv, vec![(1, 1), (2, 1), (3, 1)]);
    }

    #[test]
    fn s3_cubed_has_one_invariant_and_it_is_ghz_like() {
        let (_, rep) = s3_two_dim();
        let mult = tensor_multiplicity(&[&rep, &rep, &rep], None).unwrap();
        assert_eq!(mult, 1);
        let p = invariant_projector(&[&rep, &rep, &rep]).unwrap();
        let rank: f64 = (0..8).map(|i| p[(i, i)].re).sum();
        assert_abs_diff_eq!(rank, 1.0, epsilon = 1e-10);

        let state = lme_from_invariant(&[&rep, &rep, &rep]).unwrap();
        assert_eq!(state.dims(), &[2, 2, 2]);
        for i in 0..3 {
            let ev = reduced_density(&state, &[i]).unwrap().eigenvalues();
            for v in ev {
                assert_abs_diff_eq!(v, 0.5, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn dual_pairing_gives_bell() {
        let ut = UtGroup::new(3).unwrap();
        let r = ut.irrep_p(Sign::Plus, 1).unwrap();
        let dual = r.dual();
        let mult = tensor_multiplicity(&[&r, &dual], None).unwrap();
        assert_eq!(mult, 1);
        let state = lme_from_invariant(&[&r, &dual]).unwrap();
        // the invariant of (R, R*) is sum_i e_i x e_i: Bell up to phase
        let amp = 1.0 / 3f64.sqrt();
        let phase = state.get(&[0, 0]) / C64::new(amp, 0.0);
        assert_abs_diff_eq!(phase.norm(), 1.0, epsilon = 1e-10);
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j {
                    phase * C64::new(amp, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                };
                assert_abs_diff_eq!((state.get(&[i, j]) - want).norm(), 0.0, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn ut_group_structure_p3() {
        let ut = UtGroup::new(3).unwrap();
        assert_eq!(ut.order(), 54);
        // 4 classes of size 6, 3 of size 1, 3 of size 9
        assert_eq!(
            ut.group().class_size_inventory(),
            vec![(1, 3), (6, 4), (9, 3)]
        );
        assert!(UtGroup::new(4).is_err());
        assert!(UtGroup::new(9).is_err());
        assert!(UtGroup::new(2).is_err());
    }

    #[test]
    fn ut_group_structure_p5() {
        let ut = UtGroup::new(5).unwrap();
        assert_eq!(ut.order(), 250);
        // (p^2-1)/2 = 12 classes of size 2p = 10, p of size 1, p of size p^2
        assert_eq!(
            ut.group().class_size_inventory(),
            vec![(1, 5), (10, 12), (25, 5)]
        );
    }

    #[test]
    fn ut_characters_match_closed_forms_p3() {
        let ut = UtGroup::new(3).unwrap();
        let p = 3u64;
        let two = ut.irrep_two(1, 0).unwrap();
        let chi2 = two.character();
        let pp = ut.irrep_p(Sign::Plus, 1).unwrap();
        let chip = pp.character();
        let pm = ut.irrep_p(Sign::Minus, 1).unwrap();
        let chim = pm.character();

        for g in 0..ut.order() as u32 {
            let e = ut.element(g);
            if !e.t {
                if e.a == 0 && e.c == 0 {
                    // central: chi_2 = 2, chi_p = p w^{by}
                    assert_abs_diff_eq!(chi2[g as usize].re, 2.0, epsilon = 1e-12);
                    assert_abs_diff_eq!(chi2[g as usize].im, 0.0, epsilon = 1e-12);
                    let want = ut.omega(e.b) * C64::new(p as f64, 0.0);
                    assert_abs_diff_eq!((chip[g as usize] - want).norm(), 0.0, epsilon = 1e-10);
                } else {
                    // chi_2 on (a,c) classes: 2 cos(2 pi (x a + y c)/p), here (x,y) = (1,0)
                    let want = 2.0
                        * (2.0 * std::f64::consts::PI * (e.a % p) as f64 / p as f64).cos();
                    assert_abs_diff_eq!(chi2[g as usize].re, want, epsilon = 1e-10);
                    assert_abs_diff_eq!(chi2[g as usize].im, 0.0, epsilon = 1e-10);
                    // chi_p vanishes off the center of the unitriangular part
                    assert_abs_diff_eq!(chip[g as usize].norm(), 0.0, epsilon = 1e-10);
                }
            } else if e.a == 0 && e.c == 0 {
                // involution classes: chi_2 = 0, chi_p = +- w^{by}
                assert_abs_diff_eq!(chi2[g as usize].norm(), 0.0, epsilon = 1e-10);
                let want = ut.omega(e.b);
                assert_abs_diff_eq!((chip[g as usize] - want).norm(), 0.0, epsilon = 1e-10);
                assert_abs_diff_eq!((chim[g as usize] + want).norm(), 0.0, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn ut_irreps_are_irreducible_and_complete_p3() {
        let ut = UtGroup::new(3).unwrap();
        let irreps = ut.all_irreps().unwrap();
        let p = 3usize;
        assert_eq!(irreps.len(), 2 + (p * p - 1) / 2 + 2 * (p - 1));
        let mut dim2_sum = 0usize;
        for r in &irreps {
            assert!(r.is_irreducible(), "dim {}", r.dim());
            dim2_sum += r.dim() * r.dim();
        }
        assert_eq!(dim2_sum, 2 * p * p * p);
        assert_eq!(irreps.len(), ut.group().conjugacy_classes().len());

        // character column-orthogonality
        let chars: Vec<Vec<C64>> = irreps.iter().map(|r| r.character()).collect();
        for (i, a) in chars.iter().enumerate() {
            for (j, b) in chars.iter().enumerate() {
                let dot: C64 = a.iter().zip(b).map(|(x, y)| x * y.conj()).sum();
                let want = if i == j { ut.order() as f64 } else { 0.0 };
                assert_abs_diff_eq!(dot.re, want, epsilon = 1e-8);
                assert_abs_diff_eq!(dot.im, 0.0, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn tensor_decomposition_of_two_times_p() {
        let ut = UtGroup::new(3).unwrap();
        let two = ut.irrep_two(1, 1).unwrap();
        for sign in [Sign::Plus, Sign::Minus] {
            let r = ut.irrep_p(sign, 1).unwrap();
            let plus = ut.irrep_p(Sign::Plus, 1).unwrap();
            let minus = ut.irrep_p(Sign::Minus, 1).unwrap();
            assert_eq!(tensor_multiplicity(&[&two, &r], Some(&plus)).unwrap(), 1);
            assert_eq!(tensor_multiplicity(&[&two, &r], Some(&minus)).unwrap(), 1);
        }
    }

    #[test]
    fn lme_state_for_2pp() {
        let ut = UtGroup::new(3).unwrap();
        let s = ut.lme_state_2pp(1, 1, 1).unwrap();
        assert_eq!(s.dims(), &[2, 3, 3]);
        let (ok, dev) = is_lme(&s, 1e-9).unwrap();
        assert!(ok, "dev = {dev}");
    }

    #[test]
    fn projective_qubit_pair_gives_bell() {
        // Z2 x Z2 acting projectively through {I, X, Z, XZ}; paired with its
        // dual the scalar factors cancel and the invariant is the Bell state
        let table = vec![
            vec![0u32, 1, 2, 3],
            vec![1, 0, 3, 2],
            vec![2, 3, 0, 1],
            vec![3, 2, 1, 0],
        ];
        let group = FiniteGroup::from_mul_table(table).unwrap();
        let zero = C64::new(0.0, 0.0);
        let one = C64::new(1.0, 0.0);
        let mats = vec![
            DMatrix::from_row_slice(2, 2, &[one, zero, zero, one]),
            DMatrix::from_row_slice(2, 2, &[zero, one, one, zero]), // X
            DMatrix::from_row_slice(2, 2, &[one, zero, zero, -one]), // Z
            DMatrix::from_row_slice(2, 2, &[zero, -one, one, zero]), // XZ
        ];
        assert!(GroupRep::new(group.clone(), mats.clone()).is_err());
        let rep = GroupRep::new_projective(group.clone(), mats).unwrap();
        assert!(rep.is_projective());
        let dual = rep.dual();

        // the pair cancels; a single projective copy does not average
        assert!(matches!(
            invariant_projector(&[&rep]),
            Err(Error::CocycleObstruction(_))
        ));
        let state = lme_from_invariant(&[&rep, &dual]).unwrap();
        let amp = 1.0 / 2f64.sqrt();
        assert_abs_diff_eq!(state.get(&[0, 0]).norm(), amp, epsilon = 1e-10);
        assert_abs_diff_eq!(state.get(&[1, 1]).norm(), amp, epsilon = 1e-10);
        assert_abs_diff_eq!(state.get(&[0, 1]).norm(), 0.0, epsilon = 1e-10);
    }

    #[test]
    fn group_mismatch_is_detected() {
        let (_, s3) = s3_two_dim();
        let ut = UtGroup::new(3).unwrap();
        let two = ut.irrep_two(1, 0).unwrap();
        assert!(matches!(
            tensor_multiplicity(&[&s3, &two], None),
            Err(Error::GroupMismatch)
        ));
    }

    #[test]
    fn reducible_rep_is_rejected_by_lme_constructor() {
        let ut = UtGroup::new(3).unwrap();
        let triv = ut.irrep_one(false);
        let sign = ut.irrep_one(true);
        // direct sum of the two one-dimensional irreps
        let mats: Vec<DMatrix<C64>> = (0..ut.order() as u32)
            .map(|g| {
                let mut m = DMatrix::from_element(2, 2, C64::new(0.0, 0.0));
                m[(0, 0)] = triv.matrix(g)[(0, 0)];
                m[(1, 1)] = sign.matrix(g)[(0, 0)];
                m
            })
            .collect();
        let red = GroupRep::new(ut.group().clone(), mats).unwrap();
        assert!(matches!(
            lme_from_invariant(&[&red, &red]),
            Err(Error::NotIrreducible(_))
        ));
    }
}
