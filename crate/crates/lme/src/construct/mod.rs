//! Explicit LME state constructors.
//!
//! Every constructor returns a [`StateTensor`] whose single-factor reduced
//! density matrices are maximally mixed up to floating rounding; the tests
//! verify each output with [`crate::tensor::is_lme`] at 1e-9.

mod pauli;
mod wigner;

pub use pauli::{
    pauli_stabilizer_state, six_qubit_three_uniform_generators, Pauli, PauliStabilizerSet,
    PauliString,
};
pub use wigner::{wigner3j_state, wigner_3j, HalfInt};

use num_complex::Complex64 as C64;

use crate::tensor::{tensor_product, Regroup, StateTensor};
use crate::{Error, Result};

/// Bell state `(1/sqrt(d)) sum_i |i i>` on `(d, d)`.
pub fn bell(d: usize) -> Result<StateTensor> {
    if d == 0 {
        return Err(Error::ZeroPart);
    }
    let amp = 1.0 / (d as f64).sqrt();
    StateTensor::from_fn(vec![d, d], |idx| {
        if idx[0] == idx[1] {
            C64::new(amp, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// GHZ state `(1/sqrt(d)) sum_i |i>^{x parties}` on `(d, ..., d)`.
pub fn ghz(d: usize, parties: usize) -> Result<StateTensor> {
    if d < 2 {
        return Err(Error::InvalidParameter("ghz needs d >= 2".into()));
    }
    if parties < 2 {
        return Err(Error::InvalidParameter("ghz needs parties >= 2".into()));
    }
    let amp = 1.0 / (d as f64).sqrt();
    StateTensor::from_fn(vec![d; parties], |idx| {
        if idx.iter().all(|&i| i == idx[0]) {
            C64::new(amp, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// A collection of unit vectors in R^3 summing to zero; the data defining a
/// `(2, B, B)` LME state.
#[derive(Clone, Debug)]
pub struct UnitVectorConfig {
    vectors: Vec<[f64; 3]>,
}

pub const UNIT_NORM_TOL: f64 = 1e-12;
pub const VECTOR_SUM_TOL: f64 = 1e-10;

impl UnitVectorConfig {
    pub fn new(vectors: Vec<[f64; 3]>) -> Result<Self> {
        if vectors.len() < 2 {
            return Err(Error::InvalidParameter(
                "need at least two unit vectors".into(),
            ));
        }
        for v in &vectors {
            let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            if (norm - 1.0).abs() > UNIT_NORM_TOL {
                return Err(Error::InvalidParameter(format!(
                    "vector {v:?} has norm {norm}, not 1"
                )));
            }
        }
        let sum = [
            vectors.iter().map(|v| v[0]).sum::<f64>(),
            vectors.iter().map(|v| v[1]).sum::<f64>(),
            vectors.iter().map(|v| v[2]).sum::<f64>(),
        ];
        let s = (sum[0] * sum[0] + sum[1] * sum[1] + sum[2] * sum[2]).sqrt();
        if s > VECTOR_SUM_TOL {
            return Err(Error::InvalidParameter(format!(
                "vectors sum to {sum:?} (norm {s}), not zero"
            )));
        }
        Ok(UnitVectorConfig { vectors })
    }

    pub fn vectors(&self) -> &[[f64; 3]] {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Rotate every vector by the same rotation matrix (rows `r0,r1,r2`).
    pub fn rotated(&self, rot: &[[f64; 3]; 3]) -> Result<Self> {
        let vectors = self
            .vectors
            .iter()
            .map(|v| {
                [
                    rot[0][0] * v[0] + rot[0][1] * v[1] + rot[0][2] * v[2],
                    rot[1][0] * v[0] + rot[1][1] * v[1] + rot[1][2] * v[2],
                    rot[2][0] * v[0] + rot[2][1] * v[1] + rot[2][2] * v[2],
                ]
            })
            .collect();
        UnitVectorConfig::new(vectors)
    }
}

/// `b` unit vectors at angles `2 pi j / b` in the plane spanned by the second
/// and third axes; their sum vanishes by symmetry.
pub fn polygon_vectors(b: usize) -> Result<UnitVectorConfig> {
    if b < 2 {
        return Err(Error::InvalidParameter("polygon needs b >= 2".into()));
    }
    let mut vectors = Vec::with_capacity(b);
    for j in 0..b {
        let phi = 2.0 * std::f64::consts::PI * j as f64 / b as f64;
        // theta = pi/2: vectors lie in the plane orthogonal to the polar axis
        vectors.push([0.0, phi.cos(), phi.sin()]);
    }
    // cancel rounding residue pairwise so the zero-sum check is exact enough
    let sum: [f64; 3] = vectors.iter().fold([0.0; 3], |acc, v| {
        [acc[0] + v[0], acc[1] + v[1], acc[2] + v[2]]
    });
    let n = b as f64;
    for v in &mut vectors {
        v[0] -= sum[0] / n;
        v[1] -= sum[1] / n;
        v[2] -= sum[2] / n;
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        v[0] /= norm;
        v[1] /= norm;
        v[2] /= norm;
    }
    UnitVectorConfig::new(vectors)
}

/// `(2, B, B)` LME state from `B` unit vectors summing to zero: the qubit
/// component attached to `|i i>` is the spin-up state along the i-th vector,
/// with the first vector component playing the polar-axis role:
/// `(cos(theta/2), e^{i phi} sin(theta/2))` for
/// `v = (cos theta, sin theta cos phi, sin theta sin phi)`.
pub fn from_unit_vectors(cfg: &UnitVectorConfig) -> Result<StateTensor> {
    let b = cfg.len();
    let amp = 1.0 / (b as f64).sqrt();
    let mut s = StateTensor::zero(vec![2, b, b])?;
    let mut coeffs = s.coeffs().to_vec();
    for (i, v) in cfg.vectors().iter().enumerate() {
        let theta = v[0].clamp(-1.0, 1.0).acos();
        let phi = v[2].atan2(v[1]);
        let up = C64::new(amp * (theta / 2.0).cos(), 0.0);
        let down = C64::from_polar(amp * (theta / 2.0).sin(), phi);
        // flat layout for dims (2, b, b)
        coeffs[i * b + i] = up;
        coeffs[b * b + i * b + i] = down;
    }
    s = StateTensor::new(vec![2, b, b], coeffs)?;
    Ok(s)
}

/// The `(2, N, N+1)` ladder state
/// `(1/sqrt(N+1)) sum_b sqrt((N+1-b)/N) |0 b b> + sqrt(b/N) |1 b b+1>`.
pub fn state_2_n_np1(n: usize) -> Result<StateTensor> {
    if n < 2 {
        return Err(Error::InvalidParameter("need n >= 2".into()));
    }
    let mut s = StateTensor::zero(vec![2, n, n + 1])?;
    let mut coeffs = s.coeffs().to_vec();
    let norm = 1.0 / ((n + 1) as f64).sqrt();
    let nn = n as f64;
    for b in 1..=n {
        let up = norm * (((n + 1 - b) as f64) / nn).sqrt();
        let down = norm * ((b as f64) / nn).sqrt();
        // |0, b, b> and |1, b, b+1> with 1-based labels
        coeffs[(b - 1) * (n + 1) + (b - 1)] = C64::new(up, 0.0);
        coeffs[n * (n + 1) + (b - 1) * (n + 1) + b] = C64::new(down, 0.0);
    }
    s = StateTensor::new(vec![2, n, n + 1], coeffs)?;
    Ok(s)
}

/// `(2, NK, (N+1)K)` LME state as the ladder state tensored with a Bell pair,
/// regrouping `(2, N, N+1) x (K, K)` into `(2, NK, (N+1)K)`.
pub fn state_2_nk_np1k(n: usize, k: usize) -> Result<StateTensor> {
    if k == 0 {
        return Err(Error::ZeroPart);
    }
    let ladder = state_2_n_np1(n)?;
    if k == 1 {
        return Ok(ladder);
    }
    let pair = bell(k)?;
    let rg = Regroup {
        slots: vec![vec![(0, 0)], vec![(0, 1), (1, 0)], vec![(0, 2), (1, 1)]],
    };
    tensor_product(&ladder, &pair, &rg)
}

/// A `B x C` grid over symbols `1..=A` (0 marks an empty cell) in which every
/// symbol appears exactly `k` times, at most once per row and per column, and
/// rows and columns carry uniform occupancy `kA/B` and `kA/C`.
#[derive(Clone, Debug)]
pub struct SudokuGrid {
    symbols: usize,
    multiplicity: usize,
    rows: usize,
    cols: usize,
    entries: Vec<Vec<usize>>,
}

impl SudokuGrid {
    pub fn new(symbols: usize, entries: Vec<Vec<usize>>) -> Result<Self> {
        if symbols == 0 {
            return Err(Error::BadGrid("need at least one symbol".into()));
        }
        let rows = entries.len();
        if rows == 0 {
            return Err(Error::BadGrid("grid has no rows".into()));
        }
        let cols = entries[0].len();
        if cols == 0 {
            return Err(Error::BadGrid("grid has no columns".into()));
        }
        if entries.iter().any(|r| r.len() != cols) {
            return Err(Error::BadGrid("ragged rows".into()));
        }
        for (r, row) in entries.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                if v > symbols {
                    return Err(Error::BadGrid(format!(
                        "cell ({},{}) holds {v}, outside 0..={symbols}",
                        r + 1,
                        c + 1
                    )));
                }
            }
        }

        let mut counts = vec![0usize; symbols + 1];
        for row in &entries {
            let mut seen = vec![false; symbols + 1];
            for &v in row {
                if v == 0 {
                    continue;
                }
                if seen[v] {
                    return Err(Error::BadGrid(format!("symbol {v} repeats in a row")));
                }
                seen[v] = true;
                counts[v] += 1;
            }
        }
        for c in 0..cols {
            let mut seen = vec![false; symbols + 1];
            for row in &entries {
                let v = row[c];
                if v == 0 {
                    continue;
                }
                if seen[v] {
                    return Err(Error::BadGrid(format!(
                        "symbol {v} repeats in column {}",
                        c + 1
                    )));
                }
                seen[v] = true;
            }
        }
        let k = counts[1];
        if k == 0 {
            return Err(Error::BadGrid("symbol 1 never appears".into()));
        }
        for (v, &cnt) in counts.iter().enumerate().skip(1) {
            if cnt != k {
                return Err(Error::BadGrid(format!(
                    "symbol {v} appears {cnt} times, symbol 1 appears {k}"
                )));
            }
        }
        let ka = k * symbols;
        if ka % rows != 0 {
            return Err(Error::BadGrid(format!(
                "row occupancy kA/B = {ka}/{rows} is not an integer"
            )));
        }
        if ka % cols != 0 {
            return Err(Error::BadGrid(format!(
                "column occupancy kA/C = {ka}/{cols} is not an integer"
            )));
        }
        let per_row = ka / rows;
        let per_col = ka / cols;
        for (r, row) in entries.iter().enumerate() {
            let occ = row.iter().filter(|&&v| v != 0).count();
            if occ != per_row {
                return Err(Error::BadGrid(format!(
                    "row {} holds {occ} symbols, expected {per_row}",
                    r + 1
                )));
            }
        }
        for c in 0..cols {
            let occ = entries.iter().filter(|row| row[c] != 0).count();
            if occ != per_col {
                return Err(Error::BadGrid(format!(
                    "column {} holds {occ} symbols, expected {per_col}",
                    c + 1
                )));
            }
        }
        Ok(SudokuGrid {
            symbols,
            multiplicity: k,
            rows,
            cols,
            entries,
        })
    }

    /// Parse whitespace-separated integers, one grid row per line.
    pub fn parse(symbols: usize, text: &str) -> Result<Self> {
        let entries: Vec<Vec<usize>> = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                l.split_whitespace()
                    .map(|tok| {
                        tok.parse::<usize>()
                            .map_err(|_| Error::Parse(format!("bad grid entry `{tok}`")))
                    })
                    .collect::<Result<Vec<usize>>>()
            })
            .collect::<Result<_>>()?;
        SudokuGrid::new(symbols, entries)
    }

    pub fn symbols(&self) -> usize {
        self.symbols
    }

    pub fn multiplicity(&self) -> usize {
        self.multiplicity
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }
}

/// LME state on `(A, B, C)` from a grid: `psi_{a b c} = 1/sqrt(kA)` where the
/// cell `(b, c)` holds symbol `a`.
pub fn sudoku_state(g: &SudokuGrid) -> Result<StateTensor> {
    let amp = 1.0 / ((g.multiplicity * g.symbols) as f64).sqrt();
    StateTensor::from_fn(vec![g.symbols, g.rows, g.cols], |idx| {
        if g.entries[idx[1]][idx[2]] == idx[0] + 1 {
            C64::new(amp, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{is_lme, reduced_density};
    use approx::assert_abs_diff_eq;

    #[test]
    fn bell_states_are_lme() {
        for d in [1usize, 2, 7] {
            let (ok, dev) = is_lme(&bell(d).unwrap(), 1e-12).unwrap();
            assert!(ok, "d = {d}, dev = {dev}");
        }
        let b = bell(2).unwrap();
        assert_abs_diff_eq!(b.get(&[0, 0]).re, 1.0 / 2f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(b.get(&[1, 1]).re, 1.0 / 2f64.sqrt(), epsilon = 1e-15);
        assert_eq!(b.get(&[0, 1]).norm(), 0.0);
    }

    #[test]
    fn ghz_matches_bell_for_two_parties() {
        let g = ghz(2, 2).unwrap();
        let b = bell(2).unwrap();
        assert_eq!(g.coeffs(), b.coeffs());
        let (ok, _) = is_lme(&ghz(3, 4).unwrap(), 1e-12).unwrap();
        assert!(ok);
        let rho = reduced_density(&ghz(3, 4).unwrap(), &[2]).unwrap();
        assert!(rho.max_deviation_from_scaled_identity(1.0 / 3.0) < 1e-15);
    }

    #[test]
    fn polygon_configs() {
        let two = polygon_vectors(2).unwrap();
        assert_abs_diff_eq!(two.vectors()[0][1], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(two.vectors()[1][1], -1.0, epsilon = 1e-12);

        let three = polygon_vectors(3).unwrap();
        for i in 0..3 {
            for j in i + 1..3 {
                let dot: f64 = (0..3).map(|k| three.vectors()[i][k] * three.vectors()[j][k]).sum();
                assert_abs_diff_eq!(dot, -0.5, epsilon = 1e-12);
            }
        }

        let four = polygon_vectors(4).unwrap();
        assert_eq!(four.len(), 4);
        assert!(polygon_vectors(1).is_err());
    }

    #[test]
    fn unit_vector_states_are_lme() {
        for b in [2usize, 3, 5, 8] {
            let cfg = polygon_vectors(b).unwrap();
            let s = from_unit_vectors(&cfg).unwrap();
            assert_eq!(s.dims(), &[2, b, b]);
            let (ok, dev) = is_lme(&s, 1e-9).unwrap();
            assert!(ok, "b = {b}, dev = {dev}");
        }
    }

    #[test]
    fn antipodal_pair_is_ghz_up_to_basis() {
        // vectors +z, -z along the polar axis give the two-vector config
        let cfg = UnitVectorConfig::new(vec![[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]]).unwrap();
        let s = from_unit_vectors(&cfg).unwrap();
        let (ok, _) = is_lme(&s, 1e-12).unwrap();
        assert!(ok);
        // same single-site spectra as GHZ: (1/2, 1/2) everywhere
        for i in 0..3 {
            let ev = reduced_density(&s, &[i]).unwrap().eigenvalues();
            for v in ev {
                assert_abs_diff_eq!(v, 0.5, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn unit_vector_config_rejects_bad_input() {
        assert!(UnitVectorConfig::new(vec![[1.0, 0.0, 0.0], [0.9, 0.0, 0.0]]).is_err());
        assert!(UnitVectorConfig::new(vec![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]).is_err());
    }

    #[test]
    fn so3_rotation_leaves_spectra_invariant() {
        let cfg = polygon_vectors(5).unwrap();
        let angle = 0.7f64;
        let (c, s) = (angle.cos(), angle.sin());
        // rotation mixing the polar axis into the plane
        let rot = [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]];
        let rotated = cfg.rotated(&rot).unwrap();
        let s1 = from_unit_vectors(&cfg).unwrap();
        let s2 = from_unit_vectors(&rotated).unwrap();
        for subset in [&[0usize][..], &[1], &[2], &[0, 1], &[1, 2], &[0, 2]] {
            let e1 = reduced_density(&s1, subset).unwrap().eigenvalues();
            let e2 = reduced_density(&s2, subset).unwrap().eigenvalues();
            for (a, b) in e1.iter().zip(&e2) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn ladder_states_are_lme() {
        for n in 2..=6 {
            let s = state_2_n_np1(n).unwrap();
            assert_eq!(s.dims(), &[2, n, n + 1]);
            let (ok, dev) = is_lme(&s, 1e-12).unwrap();
            assert!(ok, "n = {n}, dev = {dev}");
        }
    }

    #[test]
    fn ladder_tensor_bell_gives_scaled_dims() {
        let s = state_2_nk_np1k(2, 3).unwrap();
        assert_eq!(s.dims(), &[2, 6, 9]);
        let (ok, dev) = is_lme(&s, 1e-12).unwrap();
        assert!(ok, "dev = {dev}");
    }

    #[test]
    fn sudoku_states() {
        // cyclic 3x3 Latin square
        let grid = SudokuGrid::new(
            3,
            vec![vec![1, 2, 3], vec![3, 1, 2], vec![2, 3, 1]],
        )
        .unwrap();
        assert_eq!(grid.multiplicity(), 3);
        let s = sudoku_state(&grid).unwrap();
        assert_eq!(s.dims(), &[3, 3, 3]);
        let (ok, _) = is_lme(&s, 1e-12).unwrap();
        assert!(ok);

        let grid = SudokuGrid::new(2, vec![vec![1, 2], vec![2, 1]]).unwrap();
        let s = sudoku_state(&grid).unwrap();
        let (ok, _) = is_lme(&s, 1e-12).unwrap();
        assert!(ok);

        // repeated symbol in a row
        let bad = SudokuGrid::new(2, vec![vec![1, 1], vec![2, 2]]);
        assert!(matches!(bad, Err(Error::BadGrid(_))));

        // non-integral occupancy: 2 symbols once each in a 2x3 grid
        let bad = SudokuGrid::new(2, vec![vec![1, 2, 0], vec![0, 0, 0]]);
        assert!(bad.is_err());
    }

    #[test]
    fn sudoku_parse() {
        let g = SudokuGrid::parse(3, "1 2 3\n3 1 2\n2 3 1\n").unwrap();
        assert_eq!(g.shape(), (3, 3));
        assert!(SudokuGrid::parse(3, "1 2\n2 x\n").is_err());
    }

    #[test]
    fn rectangular_sudoku_grid() {
        // 2x4 grid over 4 symbols, each once: rows hold 2, columns hold 1
        let g = SudokuGrid::new(4, vec![vec![1, 2, 0, 0], vec![0, 0, 3, 4]]).unwrap();
        let s = sudoku_state(&g).unwrap();
        assert_eq!(s.dims(), &[4, 2, 4]);
        let (ok, dev) = is_lme(&s, 1e-12).unwrap();
        assert!(ok, "dev = {dev}");
    }
}
