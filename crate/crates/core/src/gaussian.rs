//! Covariance-matrix simulation of matchgate brick-wall circuits with
//! projective Z measurements.
//!
//! Any state reachable from `|0…0⟩` by nearest-neighbor matchgates and
//! computational-basis measurements is a fermionic Gaussian state, fully
//! described by the 2N×2N real antisymmetric covariance matrix
//! `Γ_{αβ} = (i/2)·Tr(ρ [c_α, c_β])` over Jordan-Wigner Majorana operators.
//! Qubit `j` (0-based) owns Majorana modes `2j` and `2j+1`. A unitary gate
//! layer acts as `Γ → R Γ Rᵀ` with `R ∈ SO(2N)` block-diagonal over gates;
//! a Z measurement is a rank-2 rational update of `Γ`.

use nalgebra::{DMatrix, Matrix4};
use rand::Rng;

use crate::error::{Error, Result};

/// Probabilities below this threshold are treated as exactly zero: sampling
/// never selects such an outcome, and forced replay of one raises
/// [`Error::ImpossibleOutcome`].
pub const EPS_PROB: f64 = 1e-12;

/// Number of generator angles per two-qubit matchgate.
pub const ANGLES_PER_GATE: usize = 6;

/// Result of a projective Z measurement.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Plus,
    Minus,
}

impl Outcome {
    /// The eigenvalue μ ∈ {+1, −1} as a float.
    pub fn sign(self) -> f64 {
        match self {
            Outcome::Plus => 1.0,
            Outcome::Minus => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Outcome::Plus => Outcome::Minus,
            Outcome::Minus => Outcome::Plus,
        }
    }

    pub fn from_sign(s: i8) -> Result<Self> {
        match s {
            1 => Ok(Outcome::Plus),
            -1 => Ok(Outcome::Minus),
            other => Err(Error::InvalidArgument(format!(
                "outcome must be ±1, got {other}"
            ))),
        }
    }
}

impl From<Outcome> for i8 {
    fn from(o: Outcome) -> i8 {
        match o {
            Outcome::Plus => 1,
            Outcome::Minus => -1,
        }
    }
}

/// The six angles (radians) parametrizing one two-qubit matchgate generator.
///
/// Index order for slices and per-gate parameter blocks is
/// `[xx, xy, yx, yy, zi, iz]`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct GateAngles {
    pub xx: f64,
    pub xy: f64,
    pub yx: f64,
    pub yy: f64,
    pub zi: f64,
    pub iz: f64,
}

impl GateAngles {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_slice(v: &[f64]) -> Result<Self> {
        if v.len() != ANGLES_PER_GATE {
            return Err(Error::DimensionMismatch(format!(
                "gate needs {ANGLES_PER_GATE} angles, got {}",
                v.len()
            )));
        }
        Ok(Self {
            xx: v[0],
            xy: v[1],
            yx: v[2],
            yy: v[3],
            zi: v[4],
            iz: v[5],
        })
    }

    pub fn to_array(self) -> [f64; ANGLES_PER_GATE] {
        [self.xx, self.xy, self.yx, self.yy, self.zi, self.iz]
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|a| a.is_finite())
    }
}

/// Quadratic Majorana generator `h` of one matchgate: the 4×4 real
/// antisymmetric matrix with
///
/// ```text
///       ⎛   0     −θzi    θyx    θyy ⎞
/// h = ¼ ⎜  θzi      0    −θxx   −θxy ⎟
///       ⎜ −θyx    θxx      0    −θiz ⎟
///       ⎝ −θyy    θxy    θiz      0  ⎠
/// ```
pub fn build_generator(angles: &GateAngles) -> Result<Matrix4<f64>> {
    if !angles.is_finite() {
        return Err(Error::NonFinite("gate angles".into()));
    }
    let q = 0.25;
    Ok(Matrix4::new(
        0.0,
        -q * angles.zi,
        q * angles.yx,
        q * angles.yy,
        q * angles.zi,
        0.0,
        -q * angles.xx,
        -q * angles.xy,
        -q * angles.yx,
        q * angles.xx,
        0.0,
        -q * angles.iz,
        -q * angles.yy,
        q * angles.xy,
        q * angles.iz,
        0.0,
    ))
}

/// Derivative of [`build_generator`] with respect to angle `k`
/// (order `[xx, xy, yx, yy, zi, iz]`). Constant sparse matrices.
pub fn generator_basis(k: usize) -> Matrix4<f64> {
    let mut m = Matrix4::zeros();
    let q = 0.25;
    let (i, j, s) = match k {
        0 => (1, 2, -q), // xx
        1 => (1, 3, -q), // xy
        2 => (0, 2, q),  // yx
        3 => (0, 3, q),  // yy
        4 => (0, 1, -q), // zi
        5 => (2, 3, -q), // iz
        _ => panic!("angle index out of range: {k}"),
    };
    m[(i, j)] = s;
    m[(j, i)] = -s;
    m
}

/// Majorana-mode rotation `R = exp(4h)` of one gate. Orthogonal with
/// determinant +1 since `h` is antisymmetric.
pub fn gate_rotation(h: &Matrix4<f64>) -> Matrix4<f64> {
    (h * 4.0).exp()
}

/// Brick-wall layer parity. Layers are indexed from 1; odd layers couple
/// qubit pairs (0,1), (2,3), …, even layers couple (1,2), (3,4), ….
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LayerParity {
    Odd,
    Even,
}

impl LayerParity {
    /// Parity of 1-based layer index `l`.
    pub fn of_layer(l: usize) -> Self {
        if l % 2 == 1 {
            LayerParity::Odd
        } else {
            LayerParity::Even
        }
    }

    /// Number of gates a layer of this parity holds on `n` qubits.
    pub fn gate_count(self, n_qubits: usize) -> usize {
        match self {
            LayerParity::Odd => n_qubits / 2,
            LayerParity::Even => n_qubits.saturating_sub(1) / 2,
        }
    }

    /// Left qubit (0-based) of gate `k` in a layer of this parity.
    pub fn left_qubit(self, k: usize) -> usize {
        match self {
            LayerParity::Odd => 2 * k,
            LayerParity::Even => 2 * k + 1,
        }
    }
}

/// One brick-wall layer's Majorana rotation: a direct sum of 4×4 orthogonal
/// blocks, identity on uncovered modes.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerRotation {
    parity: LayerParity,
    n_qubits: usize,
    blocks: Vec<Matrix4<f64>>,
}

impl LayerRotation {
    /// Builds the layer rotation from per-gate angles. The angle count must
    /// equal `parity.gate_count(n_qubits)`.
    pub fn assemble(angles: &[GateAngles], parity: LayerParity, n_qubits: usize) -> Result<Self> {
        let expected = parity.gate_count(n_qubits);
        if angles.len() != expected {
            return Err(Error::DimensionMismatch(format!(
                "{parity:?} layer on {n_qubits} qubits needs {expected} gates, got {}",
                angles.len()
            )));
        }
        let blocks = angles
            .iter()
            .map(|a| build_generator(a).map(|h| gate_rotation(&h)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            parity,
            n_qubits,
            blocks,
        })
    }

    pub fn from_blocks(
        blocks: Vec<Matrix4<f64>>,
        parity: LayerParity,
        n_qubits: usize,
    ) -> Result<Self> {
        if blocks.len() != parity.gate_count(n_qubits) {
            return Err(Error::DimensionMismatch("layer block count".into()));
        }
        Ok(Self {
            parity,
            n_qubits,
            blocks,
        })
    }

    pub fn parity(&self) -> LayerParity {
        self.parity
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn blocks(&self) -> &[Matrix4<f64>] {
        &self.blocks
    }

    /// Majorana row/column offset of gate `k`'s 4×4 block.
    pub fn block_offset(&self, k: usize) -> usize {
        2 * self.parity.left_qubit(k)
    }

    /// The full 2N×2N rotation, materialized. Mostly for tests; the apply
    /// routines below never build this.
    pub fn dense(&self) -> DMatrix<f64> {
        let d = 2 * self.n_qubits;
        let mut m = DMatrix::identity(d, d);
        for (k, b) in self.blocks.iter().enumerate() {
            let o = self.block_offset(k);
            m.view_mut((o, o), (4, 4)).copy_from(b);
        }
        m
    }

    /// `m ← R m`, block-wise.
    pub fn left_apply(&self, m: &mut DMatrix<f64>) {
        for (k, b) in self.blocks.iter().enumerate() {
            let o = self.block_offset(k);
            let rows = m.rows(o, 4).into_owned();
            m.rows_mut(o, 4).copy_from(&(b * rows));
        }
    }

    /// `m ← m Rᵀ`, block-wise.
    pub fn right_apply_transpose(&self, m: &mut DMatrix<f64>) {
        for (k, b) in self.blocks.iter().enumerate() {
            let o = self.block_offset(k);
            let cols = m.columns(o, 4).into_owned();
            m.columns_mut(o, 4).copy_from(&(cols * b.transpose()));
        }
    }

    /// `m ← Rᵀ m`, block-wise.
    pub fn left_apply_transpose(&self, m: &mut DMatrix<f64>) {
        for (k, b) in self.blocks.iter().enumerate() {
            let o = self.block_offset(k);
            let rows = m.rows(o, 4).into_owned();
            m.rows_mut(o, 4).copy_from(&(b.transpose() * rows));
        }
    }

    /// `m ← m R`, block-wise.
    pub fn right_apply(&self, m: &mut DMatrix<f64>) {
        for (k, b) in self.blocks.iter().enumerate() {
            let o = self.block_offset(k);
            let cols = m.columns(o, 4).into_owned();
            m.columns_mut(o, 4).copy_from(&(cols * b));
        }
    }
}

/// A projective Z measurement that actually happened: where, what came out,
/// and how likely it was just before it happened.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeasurementEvent {
    /// 1-based circuit layer.
    pub layer: usize,
    /// 0-based qubit index.
    pub site: usize,
    pub outcome: Outcome,
    /// Born probability of `outcome` in the pre-measurement state.
    pub probability: f64,
}

/// Covariance matrix of an N-qubit fermionic Gaussian state.
///
/// Invariants for circuit-reachable states: `Γ = −Γᵀ`, `ΓᵀΓ = I` (purity),
/// and `|Γ_{αβ}| ≤ 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct CovarianceMatrix {
    n_qubits: usize,
    data: DMatrix<f64>,
}

impl CovarianceMatrix {
    /// Covariance of the product state `|0⟩^⊗N`: block-diagonal with 2×2
    /// blocks `[[0, −1], [1, 0]]`.
    pub fn initial(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::InvalidArgument("qubit count must be ≥ 1".into()));
        }
        let d = 2 * n_qubits;
        let mut data = DMatrix::zeros(d, d);
        for j in 0..n_qubits {
            data[(2 * j, 2 * j + 1)] = -1.0;
            data[(2 * j + 1, 2 * j)] = 1.0;
        }
        Ok(Self { n_qubits, data })
    }

    pub fn from_matrix(data: DMatrix<f64>) -> Result<Self> {
        let (r, c) = data.shape();
        if r != c || r == 0 || r % 2 != 0 {
            return Err(Error::DimensionMismatch(format!(
                "covariance must be 2N×2N, got {r}×{c}"
            )));
        }
        Ok(Self {
            n_qubits: r / 2,
            data,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Majorana dimension 2N.
    pub fn dim(&self) -> usize {
        2 * self.n_qubits
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    /// ⟨Z_j⟩ = −Γ_{2j, 2j+1}.
    pub fn z_expectation(&self, site: usize) -> f64 {
        -self.data[(2 * site, 2 * site + 1)]
    }

    /// max |Γ + Γᵀ|.
    pub fn antisymmetry_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.data.nrows() {
            for j in 0..i {
                worst = worst.max((self.data[(i, j)] + self.data[(j, i)]).abs());
            }
        }
        worst
    }

    /// max |ΓᵀΓ − I|; zero for pure states.
    pub fn purity_error(&self) -> f64 {
        let d = self.dim();
        let m = self.data.transpose() * &self.data - DMatrix::<f64>::identity(d, d);
        m.iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.data.iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
    }

    fn check_site(&self, site: usize) -> Result<()> {
        if site >= self.n_qubits {
            return Err(Error::InvalidArgument(format!(
                "site {site} out of range for {} qubits",
                self.n_qubits
            )));
        }
        Ok(())
    }
}

/// `Γ' = R Γ Rᵀ` for one brick-wall layer.
pub fn apply_layer(gamma: &CovarianceMatrix, rot: &LayerRotation) -> Result<CovarianceMatrix> {
    if rot.n_qubits() != gamma.n_qubits() {
        return Err(Error::DimensionMismatch(format!(
            "layer is for {} qubits, state has {}",
            rot.n_qubits(),
            gamma.n_qubits()
        )));
    }
    let mut m = gamma.data.clone();
    rot.left_apply(&mut m);
    rot.right_apply_transpose(&mut m);
    Ok(CovarianceMatrix {
        n_qubits: gamma.n_qubits,
        data: m,
    })
}

/// Born probability `p = ½(1 − μ Γ_{2j, 2j+1})` of outcome μ at `site`,
/// clamped to [0, 1]. The two outcomes sum to exactly 1.
pub fn measurement_probability(gamma: &CovarianceMatrix, site: usize, outcome: Outcome) -> f64 {
    let g = gamma.data[(2 * site, 2 * site + 1)];
    let p_plus = (0.5 * (1.0 - g)).clamp(0.0, 1.0);
    match outcome {
        Outcome::Plus => p_plus,
        Outcome::Minus => 1.0 - p_plus,
    }
}

/// Projects `site` onto Z-eigenvalue `outcome` and renormalizes:
/// `Γ' = Γ + Γ A Γ + A` with the rank-2 kernel `A` of the measurement.
/// Returns the pre-measurement probability of `outcome`.
///
/// The update drifts off antisymmetry by roundoff, so the result is
/// re-antisymmetrized in place.
pub fn apply_measurement(
    gamma: &mut CovarianceMatrix,
    site: usize,
    outcome: Outcome,
) -> Result<f64> {
    gamma.check_site(site)?;
    let p = measurement_probability(gamma, site, outcome);
    if p <= EPS_PROB {
        return Err(Error::ImpossibleOutcome {
            site,
            outcome: outcome.into(),
            probability: p,
        });
    }
    let a = 2 * site; // paper's 2j−1
    let b = 2 * site + 1; // paper's 2j
    let scale = outcome.sign() / (2.0 * p);

    // Γ A Γ for A = scale·(e_b e_aᵀ − e_a e_bᵀ) is a pair of outer products
    // of columns and rows of Γ.
    let col_a = gamma.data.column(a).into_owned();
    let col_b = gamma.data.column(b).into_owned();
    let row_a = gamma.data.row(a).into_owned();
    let row_b = gamma.data.row(b).into_owned();
    gamma.data.ger(scale, &col_b, &row_a.transpose(), 1.0);
    gamma.data.ger(-scale, &col_a, &row_b.transpose(), 1.0);
    gamma.data[(b, a)] += scale;
    gamma.data[(a, b)] -= scale;

    // Re-antisymmetrize: the rank-2 update accumulates roundoff asymmetry.
    let sym = (&gamma.data - gamma.data.transpose()) * 0.5;
    gamma.data = sym;
    Ok(p)
}

/// Draws the outcome at `site` with its Born probability, applies the
/// projection, and returns the event. Outcomes with probability below
/// [`EPS_PROB`] are never selected.
pub fn sample_site_measurement<R: Rng + ?Sized>(
    gamma: &mut CovarianceMatrix,
    layer: usize,
    site: usize,
    rng: &mut R,
) -> Result<MeasurementEvent> {
    gamma.check_site(site)?;
    let p_plus = measurement_probability(gamma, site, Outcome::Plus);
    let outcome = if p_plus <= EPS_PROB {
        Outcome::Minus
    } else if 1.0 - p_plus <= EPS_PROB {
        Outcome::Plus
    } else if rng.random::<f64>() < p_plus {
        Outcome::Plus
    } else {
        Outcome::Minus
    };
    let probability = apply_measurement(gamma, site, outcome)?;
    Ok(MeasurementEvent {
        layer,
        site,
        outcome,
        probability,
    })
}
