//! Stabilizer states from signed Pauli strings: the joint +1 eigenvector(s)
//! of a commuting, independent generator set, extracted from the projector
//! product `prod_i (1 + S_i)/2`.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::tensor::StateTensor;
use crate::{Error, Result};

/// Single-qubit Pauli operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn matrix(self) -> DMatrix<C64> {
        let (a, b, c, d) = match self {
            Pauli::I => ((1.0, 0.0), (0.0, 0.0), (0.0, 0.0), (1.0, 0.0)),
            Pauli::X => ((0.0, 0.0), (1.0, 0.0), (1.0, 0.0), (0.0, 0.0)),
            Pauli::Y => ((0.0, 0.0), (0.0, -1.0), (0.0, 1.0), (0.0, 0.0)),
            Pauli::Z => ((1.0, 0.0), (0.0, 0.0), (0.0, 0.0), (-1.0, 0.0)),
        };
        DMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(a.0, a.1),
                C64::new(b.0, b.1),
                C64::new(c.0, c.1),
                C64::new(d.0, d.1),
            ],
        )
    }

    /// Symplectic bits (x, z): X = (1,0), Z = (0,1), Y = (1,1).
    fn bits(self) -> (u8, u8) {
        match self {
            Pauli::I => (0, 0),
            Pauli::X => (1, 0),
            Pauli::Y => (1, 1),
            Pauli::Z => (0, 1),
        }
    }
}

/// Signed tensor product of single-qubit Paulis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PauliString {
    pub sign: i8,
    pub ops: Vec<Pauli>,
}

impl PauliString {
    pub fn new(sign: i8, ops: Vec<Pauli>) -> Result<Self> {
        if sign != 1 && sign != -1 {
            return Err(Error::InvalidParameter("sign must be +1 or -1".into()));
        }
        if ops.is_empty() {
            return Err(Error::InvalidParameter("empty Pauli string".into()));
        }
        Ok(PauliString { sign, ops })
    }

    /// Parse strings like `XZZXII`, `+XIXZZI` or `-ZZZZZZ`; whitespace is
    /// ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let (sign, body) = match compact.strip_prefix('-') {
            Some(rest) => (-1, rest),
            None => (1, compact.strip_prefix('+').unwrap_or(&compact)),
        };
        let ops = body
            .chars()
            .map(|ch| match ch.to_ascii_uppercase() {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                other => Err(Error::Parse(format!("bad Pauli letter `{other}`"))),
            })
            .collect::<Result<Vec<Pauli>>>()?;
        PauliString::new(sign, ops)
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    fn commutes_with(&self, other: &PauliString) -> bool {
        let mut anti = 0u32;
        for (a, b) in self.ops.iter().zip(&other.ops) {
            let (ax, az) = a.bits();
            let (bx, bz) = b.bits();
            anti += u32::from(ax & bz != az & bx);
        }
        anti % 2 == 0
    }

    fn dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::from_element(1, 1, C64::new(self.sign as f64, 0.0));
        for op in &self.ops {
            m = m.kronecker(&op.matrix());
        }
        m
    }
}

/// Validated set of commuting independent generators on a fixed qubit count.
#[derive(Clone, Debug)]
pub struct PauliStabilizerSet {
    n_qubits: usize,
    generators: Vec<PauliString>,
}

impl PauliStabilizerSet {
    pub fn new(generators: Vec<PauliString>) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::InvalidParameter("no generators".into()));
        }
        let n_qubits = generators[0].len();
        if generators.iter().any(|g| g.len() != n_qubits) {
            return Err(Error::InvalidParameter(
                "generators act on different qubit counts".into(),
            ));
        }
        if generators.len() > n_qubits {
            return Err(Error::DependentGenerators);
        }
        for i in 0..generators.len() {
            for j in i + 1..generators.len() {
                if !generators[i].commutes_with(&generators[j]) {
                    return Err(Error::NonCommutingGenerators);
                }
            }
        }
        if gf2_symplectic_rank(&generators) != generators.len() {
            return Err(Error::DependentGenerators);
        }
        Ok(PauliStabilizerSet {
            n_qubits,
            generators,
        })
    }

    /// One generator per nonempty line.
    pub fn parse(text: &str) -> Result<Self> {
        let generators = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(PauliString::parse)
            .collect::<Result<Vec<_>>>()?;
        PauliStabilizerSet::new(generators)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn generators(&self) -> &[PauliString] {
        &self.generators
    }
}

/// GF(2) rank of the (x|z) bit matrix, signs ignored.
fn gf2_symplectic_rank(gens: &[PauliString]) -> usize {
    let n = gens[0].len();
    let mut rows: Vec<u128> = gens
        .iter()
        .map(|g| {
            let mut bits = 0u128;
            for (q, op) in g.ops.iter().enumerate() {
                let (x, z) = op.bits();
                bits |= (x as u128) << q;
                bits |= (z as u128) << (n + q);
            }
            bits
        })
        .collect();
    let mut rank = 0;
    for col in 0..2 * n {
        let Some(pivot) = (rank..rows.len()).find(|&r| rows[r] >> col & 1 == 1) else {
            continue;
        };
        rows.swap(rank, pivot);
        for r in 0..rows.len() {
            if r != rank && rows[r] >> col & 1 == 1 {
                rows[r] ^= rows[rank];
            }
        }
        rank += 1;
    }
    rank
}

/// Unit vector in the joint +1 eigenspace of the generators, obtained by
/// applying `(1 + S_i)/2` in sequence to basis vectors until one survives.
/// With k independent commuting generators on q qubits the fixed space has
/// dimension `2^(q-k)`; an empty projection still fails loudly.
pub fn pauli_stabilizer_state(ps: &PauliStabilizerSet) -> Result<StateTensor> {
    let q = ps.n_qubits();
    if q > 20 {
        return Err(Error::ResourceCap(format!("{q} qubits is beyond the dense cap")));
    }
    let dim = 1usize << q;
    let mats: Vec<DMatrix<C64>> = ps.generators.iter().map(|g| g.dense()).collect();

    for start in 0..dim {
        let mut v = DMatrix::from_fn(dim, 1, |r, _| {
            if r == start {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        for m in &mats {
            v = (&v + m * &v) * C64::new(0.5, 0.0);
        }
        let norm2: f64 = v.iter().map(|c| c.norm_sqr()).sum();
        if norm2 > 1e-9 {
            let coeffs: Vec<C64> = v.iter().map(|c| c / C64::new(norm2.sqrt(), 0.0)).collect();
            return StateTensor::new(vec![2; q], coeffs);
        }
    }
    Err(Error::EmptyFixedSpace)
}

/// The six-generator set fixing the 3-uniform six-qubit state used in the
/// verification suite.
pub fn six_qubit_three_uniform_generators() -> PauliStabilizerSet {
    let gens = [
        "XZZXII", "IXZZXI", "XIXZZI", "ZXIXZI", "XXXXXX", "ZZZZZZ",
    ];
    PauliStabilizerSet::new(
        gens.iter()
            .map(|g| PauliString::parse(g).expect("fixed strings"))
            .collect(),
    )
    .expect("commuting independent set")
}
