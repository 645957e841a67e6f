use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::{Error, Result, C64};

pub type CMatrix = DMatrix<C64>;

const UNITARITY_TOL: f64 = 1e-12;

/// Named transformation families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnitaryKind {
    /// Identity: plain state transfer.
    Transfer,
    /// Order-reversing permutation.
    Swap,
    /// Tensor power of the 2x2 Hadamard.
    Hadamard,
    /// `(1/sqrt 2) [[1, i], [i, 1]]`, defined for n = 2 only.
    ComplexBeamsplitter,
}

impl std::str::FromStr for UnitaryKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "transfer" | "t" | "identity" => Ok(Self::Transfer),
            "swap" | "s" => Ok(Self::Swap),
            "hadamard" | "h" => Ok(Self::Hadamard),
            "complex_beamsplitter" | "c" | "beamsplitter" => Ok(Self::ComplexBeamsplitter),
            other => Err(Error::invalid(format!("unknown unitary kind '{other}'"))),
        }
    }
}

impl std::fmt::Display for UnitaryKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Self::Transfer => "transfer",
            Self::Swap => "swap",
            Self::Hadamard => "hadamard",
            Self::ComplexBeamsplitter => "complex_beamsplitter",
        };
        f.write_str(s)
    }
}

/// A square matrix with `max |U^dag U - I| <= 1e-12`.
#[derive(Debug, Clone, PartialEq)]
pub struct Unitary(CMatrix);

impl Unitary {
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::invalid(format!(
                "unitary must be square and non-empty, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid("unitary has non-finite entries"));
        }
        let defect = unitarity_defect(&m);
        if defect > UNITARITY_TOL {
            return Err(Error::invalid(format!("matrix is not unitary (defect {defect:e})")));
        }
        Ok(Self(m))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.0[(row, col)]
    }

    pub fn adjoint(&self) -> CMatrix {
        self.0.adjoint()
    }

    pub fn is_real(&self) -> bool {
        self.0.iter().all(|z| z.im == 0.0)
    }

    pub fn defect(&self) -> f64 {
        unitarity_defect(&self.0)
    }
}

/// `max |U^dag U - I|` over entries.
pub fn unitarity_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let p = m.adjoint() * m;
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((p[(i, j)] - C64::new(target, 0.0)).norm());
        }
    }
    worst
}

pub fn named_unitary(kind: UnitaryKind, n: usize) -> Result<Unitary> {
    if n == 0 {
        return Err(Error::invalid("dimension must be at least 1"));
    }
    let m = match kind {
        UnitaryKind::Transfer => CMatrix::identity(n, n),
        UnitaryKind::Swap => {
            CMatrix::from_fn(n, n, |i, j| if i + j == n - 1 { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })
        }
        UnitaryKind::Hadamard => {
            if !n.is_power_of_two() {
                return Err(Error::UnsupportedDimension { kind: kind.to_string(), n });
            }
            // H^{(x)k}_{ij} = (-1)^{popcount(i & j)} / sqrt(n)
            let norm = 1.0 / (n as f64).sqrt();
            CMatrix::from_fn(n, n, |i, j| {
                let sign = if (i & j).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                C64::new(sign * norm, 0.0)
            })
        }
        UnitaryKind::ComplexBeamsplitter => {
            if n != 2 {
                return Err(Error::UnsupportedDimension { kind: kind.to_string(), n });
            }
            let s = std::f64::consts::FRAC_1_SQRT_2;
            CMatrix::from_row_slice(
                2,
                2,
                &[C64::new(s, 0.0), C64::new(0.0, s), C64::new(0.0, s), C64::new(s, 0.0)],
            )
        }
    };
    Unitary::new(m)
}

/// Haar-distributed unitary from the QR factorization of a complex Ginibre
/// matrix, with the phases of `R`'s diagonal moved into `Q` so that the
/// factorization is unique.
pub fn haar_random_unitary(n: usize, seed: u64) -> Result<Unitary> {
    if n == 0 {
        return Err(Error::invalid("dimension must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let z = CMatrix::from_fn(n, n, |_, _| {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        C64::new(re * scale, im * scale)
    });
    let qr = z.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    Unitary::new(q)
}
