//! Matrix-product-operator intertwiners between the open exclusion process
//! and its equilibrium dual.
//!
//! The auxiliary space is a finite window `[n_min, n_max]` of the
//! bi-infinite lattice carrying the bidiagonal representation of
//!
//! ```text
//! [E, F] = F,   [D, F] = −F,   [D, E] = D + E
//! ```
//!
//! Starting from `|V⟩ = |0⟩`, `D` and `E` raise the auxiliary index by at
//! most one and `F` lowers it by one, so `N` site tensors only ever reach
//! `[−N, N]`. The default window `[−N−1, N+1]` adds one guard row on each
//! side, which makes the truncation exact for every contraction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{BoundaryRates, YVariant, DEGENERACY_TOL, MAX_SITES};
use crate::scalar::Scalar;
use crate::tensor::{fit_scalar, frobenius_residual, kron, DenseOperator, Matrix, Vector};

/// Upper bound on `4^N · (aux dim)²` accepted by [`contract`].
pub const MAX_CONTRACTION_WORK: u128 = 1 << 31;

/// Integer index range of the truncated auxiliary space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuxWindow {
    pub n_min: i64,
    pub n_max: i64,
}

impl AuxWindow {
    pub fn new(n_min: i64, n_max: i64) -> Result<Self> {
        if n_min > 0 || n_max < 0 {
            return Err(Error::InvalidWindow(format!("[{n_min}, {n_max}] must contain the seed index 0")));
        }
        Ok(Self { n_min, n_max })
    }

    /// `[−N−1, N+1]`: the reachable set `[−N, N]` plus one guard row per side.
    pub fn for_sites(n: usize) -> Self {
        let n = n as i64;
        Self { n_min: -n - 1, n_max: n + 1 }
    }

    /// `[−1, N+1]`. Enough for words in `D` and `E` only, which never
    /// lower the index.
    pub fn for_mps(n: usize) -> Self {
        Self { n_min: -1, n_max: n as i64 + 1 }
    }

    pub fn widened(&self, by: i64) -> Self {
        Self { n_min: self.n_min - by, n_max: self.n_max + by }
    }

    pub fn len(&self) -> usize {
        (self.n_max - self.n_min + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn index_of(&self, n: i64) -> Option<usize> {
        (self.n_min..=self.n_max).contains(&n).then(|| (n - self.n_min) as usize)
    }

    pub fn labels(&self) -> impl Iterator<Item = i64> {
        self.n_min..=self.n_max
    }

    /// Positions at distance at least `margin` from both edges.
    pub fn interior(&self, margin: usize) -> std::ops::Range<usize> {
        let len = self.len();
        if 2 * margin >= len {
            0..0
        } else {
            margin..len - margin
        }
    }
}

/// Truncated `D`, `E`, `F` over a window, plus the `r_n` sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct RepMatrices<T> {
    pub d: Matrix<T>,
    pub e: Matrix<T>,
    pub f: Matrix<T>,
    pub r: Vec<T>,
    pub window: AuxWindow,
    pub negated: bool,
}

/// Bidiagonal representation on `window`.
///
/// ```text
/// D_{n,n} = −E_{n,n} = n + 1/(β+δ)          F_{n,n+1} = 1/r_n
/// D_{n+1,n} = δ(α+γ) r_n/(β+δ)              E_{n+1,n} = β(α+γ) r_n/(β+δ)
/// r_n = (β+δ)/(αβ−γδ) · (1/(α+γ) + 1/(β+δ) + n)
/// ```
///
/// With `negate`, every rate is replaced by its negative first.
pub fn build_rep<T: Scalar>(rates: &BoundaryRates, window: AuxWindow, negate: bool) -> Result<RepMatrices<T>> {
    rates.validate()?;
    let [mut a, mut b, mut g, mut d] = rates.exact::<T>();
    if negate {
        a = -a;
        b = -b;
        g = -g;
        d = -d;
    }
    let drive = a.clone() * b.clone() - g.clone() * d.clone();
    let drive_scale = (rates.alpha * rates.beta).abs().max((rates.gamma * rates.delta).abs()).max(1.0);
    if drive.near_zero(DEGENERACY_TOL * drive_scale) {
        return Err(Error::EquilibriumRates);
    }
    let left = a + g;
    let right = b.clone() + d.clone();
    let offset = T::one() / left.clone() + T::one() / right.clone();
    let prefactor = right.clone() / drive;

    let k = window.len();
    let mut d_m = Matrix::zeros(k, k);
    let mut e_m = Matrix::zeros(k, k);
    let mut f_m = Matrix::zeros(k, k);
    let mut r_seq = Vec::with_capacity(k);
    for (i, n) in window.labels().enumerate() {
        let n_t = T::of_i64(n);
        let shifted = offset.clone() + n_t.clone();
        let r_n = prefactor.clone() * shifted.clone();
        let diag = n_t + T::one() / right.clone();
        d_m[(i, i)] = diag.clone();
        e_m[(i, i)] = -diag;
        if i + 1 < k {
            if shifted.near_zero(DEGENERACY_TOL * (n.unsigned_abs() as f64).max(1.0)) {
                return Err(Error::ZeroRn { n });
            }
            f_m[(i, i + 1)] = T::one() / r_n.clone();
            let sub = left.clone() * r_n.clone() / right.clone();
            d_m[(i + 1, i)] = d.clone() * sub.clone();
            e_m[(i + 1, i)] = b.clone() * sub;
        }
        r_seq.push(r_n);
    }
    Ok(RepMatrices { d: d_m, e: e_m, f: f_m, r: r_seq, window, negated: negate })
}

/// Rank-4 site tensor stored as a 2×2 grid of auxiliary matrices,
/// `blocks[out][in]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SiteTensor<T> {
    pub blocks: [[Matrix<T>; 2]; 2],
}

impl<T: Scalar> SiteTensor<T> {
    pub fn new(blocks: [[Matrix<T>; 2]; 2]) -> Self {
        Self { blocks }
    }

    pub fn aux_dim(&self) -> usize {
        self.blocks[0][0].rows()
    }

    pub fn block(&self, out: usize, inp: usize) -> &Matrix<T> {
        &self.blocks[out][inp]
    }

    /// `self · m` on the physical legs.
    pub fn phys_right(&self, m: &Matrix<T>) -> Self {
        let entry = |t: usize, u: usize| {
            self.blocks[t][0].scale(&m[(0, u)]).add(&self.blocks[t][1].scale(&m[(1, u)])).expect("equal aux dims")
        };
        Self::new([[entry(0, 0), entry(0, 1)], [entry(1, 0), entry(1, 1)]])
    }

    /// `m · self` on the physical legs.
    pub fn phys_left(&self, m: &Matrix<T>) -> Self {
        let entry = |t: usize, u: usize| {
            self.blocks[0][u].scale(&m[(t, 0)]).add(&self.blocks[1][u].scale(&m[(t, 1)])).expect("equal aux dims")
        };
        Self::new([[entry(0, 0), entry(0, 1)], [entry(1, 0), entry(1, 1)]])
    }

    pub fn scale(&self, c: &T) -> Self {
        let s = |t: usize, u: usize| self.blocks[t][u].scale(c);
        Self::new([[s(0, 0), s(0, 1)], [s(1, 0), s(1, 1)]])
    }

    pub fn to_f64(&self) -> SiteTensor<f64> {
        let s = |t: usize, u: usize| self.blocks[t][u].to_f64();
        SiteTensor::new([[s(0, 0), s(0, 1)], [s(1, 0), s(1, 1)]])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    /// `G`: `H_NE · G = G · H_E`.
    #[serde(rename = "ne_to_e")]
    NeToE,
    /// `G′`: `H_E · G′ = G′ · H_NE`.
    #[serde(rename = "e_to_ne")]
    EToNe,
    /// `G̃`: `H_NE(a) · G̃ = G̃ · H_NE(b)`.
    #[serde(rename = "composed")]
    Composed,
}

impl Direction {
    pub fn name(&self) -> &'static str {
        match self {
            Direction::NeToE => "ne_to_e",
            Direction::EToNe => "e_to_ne",
            Direction::Composed => "composed",
        }
    }
}

/// Uniform MPO `⟨W| 𝐋 ⋯ 𝐋 |V⟩` together with the divergence tensor `𝐙`
/// used by the exchange relations (absent for composed MPOs).
#[derive(Clone, Debug)]
pub struct MpoIntertwiner<T> {
    pub l: SiteTensor<T>,
    pub z: Option<SiteTensor<T>>,
    pub w: Vector<T>,
    pub v: Vector<T>,
    /// Auxiliary window; for a composed MPO this is the window of each
    /// factor (the bond space is their tensor product).
    pub window: AuxWindow,
    pub n_sites: usize,
    pub direction: Direction,
    pub variant: YVariant,
    pub rates: BoundaryRates,
    pub rates_b: Option<BoundaryRates>,
}

impl<T: Scalar> MpoIntertwiner<T> {
    pub fn bond_dim(&self) -> usize {
        self.l.aux_dim()
    }
}

/// Single-site factor of the product operator `Y`.
///
/// `YR = ((−1/(α+γ), β/(β+δ)), (1/(α+γ), δ/(β+δ)))`,
/// `YL = ((−1/(β+δ), γ/(α+γ)), (1/(β+δ), α/(α+γ)))`.
pub fn build_y_factor<T: Scalar>(rates: &BoundaryRates, variant: YVariant) -> Result<Matrix<T>> {
    rates.validate()?;
    let [a, b, g, d] = rates.exact::<T>();
    let left = a.clone() + g.clone();
    let right = b.clone() + d.clone();
    let one = T::one();
    let y = match variant {
        YVariant::YR => Matrix::from_rows(&[
            [-(one.clone() / left.clone()), b / right.clone()],
            [one / left, d / right],
        ]),
        YVariant::YL => Matrix::from_rows(&[
            [-(one.clone() / right.clone()), g / left.clone()],
            [one / right, a / left],
        ]),
    };
    let det = y[(0, 0)].clone() * y[(1, 1)].clone() - y[(0, 1)].clone() * y[(1, 0)].clone();
    if det.near_zero(1e-300) {
        return Err(Error::SingularFactor);
    }
    Ok(y)
}

/// Full `Y = y^{⊗N}`.
pub fn build_y<T: Scalar>(rates: &BoundaryRates, variant: YVariant, n: usize) -> Result<Matrix<T>> {
    let y = build_y_factor::<T>(rates, variant)?;
    let mut full = Matrix::identity(1);
    for _ in 0..n {
        full = kron(&full, &y)?;
    }
    Ok(full)
}

fn seed_vectors<T: Scalar>(window: &AuxWindow) -> (Vector<T>, Vector<T>) {
    let w = Vector::ones(window.len());
    let v = Vector::basis(window.len(), window.index_of(0).expect("window contains 0"));
    (w, v)
}

fn check_sites(n: usize) -> Result<()> {
    if n == 0 || n > MAX_SITES {
        return Err(Error::DimensionOverflow { requested: n, cap: MAX_SITES });
    }
    Ok(())
}

/// `G` on the default window.
pub fn build_g<T: Scalar>(rates: &BoundaryRates, n: usize, variant: YVariant) -> Result<MpoIntertwiner<T>> {
    build_g_in_window(rates, n, variant, AuxWindow::for_sites(n))
}

/// `G`: `𝐋 = L·y⁻¹` with `L = ((−F, E), (F, D))`, `𝐙 = ((0, −𝟙), (0, 𝟙))·y⁻¹`.
pub fn build_g_in_window<T: Scalar>(
    rates: &BoundaryRates,
    n: usize,
    variant: YVariant,
    window: AuxWindow,
) -> Result<MpoIntertwiner<T>> {
    check_sites(n)?;
    let rep = build_rep::<T>(rates, window, false)?;
    let y_inv = build_y_factor::<T>(rates, variant)?.inverse()?;
    let k = window.len();
    let l = SiteTensor::new([[rep.f.neg(), rep.e.clone()], [rep.f.clone(), rep.d.clone()]]);
    let z = SiteTensor::new([[Matrix::zeros(k, k), Matrix::identity(k).neg()], [Matrix::zeros(k, k), Matrix::identity(k)]]);
    let (w, v) = seed_vectors(&window);
    Ok(MpoIntertwiner {
        l: l.phys_right(&y_inv),
        z: Some(z.phys_right(&y_inv)),
        w,
        v,
        window,
        n_sites: n,
        direction: Direction::NeToE,
        variant,
        rates: *rates,
        rates_b: None,
    })
}

pub fn build_g_prime<T: Scalar>(rates: &BoundaryRates, n: usize, variant: YVariant) -> Result<MpoIntertwiner<T>> {
    build_g_prime_in_window(rates, n, variant, AuxWindow::for_sites(n))
}

/// `G′`: `𝐋 = y·L̃` with `L̃ = ((D′, −E′), (F′, F′))` built from the
/// negated rates, `𝐙 = y·(−((𝟙, 𝟙), (0, 0)))`.
pub fn build_g_prime_in_window<T: Scalar>(
    rates: &BoundaryRates,
    n: usize,
    variant: YVariant,
    window: AuxWindow,
) -> Result<MpoIntertwiner<T>> {
    check_sites(n)?;
    let rep = build_rep::<T>(rates, window, true)?;
    let y = build_y_factor::<T>(rates, variant)?;
    let k = window.len();
    let l = SiteTensor::new([[rep.d.clone(), rep.e.neg()], [rep.f.clone(), rep.f.clone()]]);
    let minus_one = Matrix::identity(k).neg();
    let z = SiteTensor::new([[minus_one.clone(), minus_one], [Matrix::zeros(k, k), Matrix::zeros(k, k)]]);
    let (w, v) = seed_vectors(&window);
    Ok(MpoIntertwiner {
        l: l.phys_left(&y),
        z: Some(z.phys_left(&y)),
        w,
        v,
        window,
        n_sites: n,
        direction: Direction::EToNe,
        variant,
        rates: *rates,
        rates_b: None,
    })
}

/// Checks `α+γ = α′+γ′` and `β+δ = β′+δ′`.
pub fn check_sum_constraint(a: &BoundaryRates, b: &BoundaryRates) -> Result<()> {
    let close = |x: f64, y: f64| (x - y).abs() <= DEGENERACY_TOL * x.abs().max(y.abs()).max(1.0);
    if !close(a.left_sum(), b.left_sum()) || !close(a.right_sum(), b.right_sum()) {
        return Err(Error::ConstraintViolated(format!(
            "{a} and {b}: left sums {} vs {}, right sums {} vs {}",
            a.left_sum(),
            b.left_sum(),
            a.right_sum(),
            b.right_sum()
        )));
    }
    Ok(())
}

/// `G̃(a, b) = G(a) · Y(a) · Y⁻¹(b) · G′(b)` as a single MPO whose bond
/// space is the tensor product of the two factor windows.
pub fn compose_tilde_g<T: Scalar>(
    rates_a: &BoundaryRates,
    rates_b: &BoundaryRates,
    n: usize,
    variant: YVariant,
) -> Result<MpoIntertwiner<T>> {
    check_sum_constraint(rates_a, rates_b)?;
    let g = build_g::<T>(rates_a, n, variant)?;
    let gp = build_g_prime::<T>(rates_b, n, variant)?;
    let middle = build_y_factor::<T>(rates_a, variant)?.matmul(&build_y_factor::<T>(rates_b, variant)?.inverse()?)?;
    let left = g.l.phys_right(&middle);
    let block = |t: usize, u: usize| -> Result<Matrix<T>> {
        kron(&left.blocks[t][0], &gp.l.blocks[0][u])?.add(&kron(&left.blocks[t][1], &gp.l.blocks[1][u])?)
    };
    let l = SiteTensor::new([[block(0, 0)?, block(0, 1)?], [block(1, 0)?, block(1, 1)?]]);
    Ok(MpoIntertwiner {
        l,
        z: None,
        w: g.w.kron(&gp.w),
        v: g.v.kron(&gp.v),
        window: g.window,
        n_sites: n,
        direction: Direction::Composed,
        variant,
        rates: *rates_a,
        rates_b: Some(*rates_b),
    })
}

/// Dense operator `Σ ⟨W|𝐋^{τ₁τ′₁}⋯𝐋^{τ_Nτ′_N}|V⟩ |τ⟩⟨τ′|`.
pub fn contract<T: Scalar>(mpo: &MpoIntertwiner<T>) -> Result<Matrix<T>> {
    let sites = vec![&mpo.l; mpo.n_sites];
    contract_sites(&sites, &mpo.w, &mpo.v)
}

/// Nonzero pattern of one auxiliary block.
struct SparseBlock<T> {
    entries: Vec<(usize, usize, T)>,
}

impl<T: Scalar> SparseBlock<T> {
    fn from_matrix(m: &Matrix<T>) -> Self {
        let mut entries = Vec::new();
        for i in 0..m.rows() {
            for (j, x) in m.row(i).iter().enumerate() {
                if !x.is_zero() {
                    entries.push((i, j, x.clone()));
                }
            }
        }
        Self { entries }
    }

    fn apply_row(&self, v: &[T], out: &mut [T]) {
        for (i, j, x) in &self.entries {
            if !v[*i].is_zero() {
                out[*j] = out[*j].clone() + v[*i].clone() * x.clone();
            }
        }
    }
}

/// Contracts a chain of (possibly different) site tensors into a dense
/// `2^N × 2^N` operator. Site 1 is the most significant physical index.
pub fn contract_sites<T: Scalar>(sites: &[&SiteTensor<T>], w: &Vector<T>, v: &Vector<T>) -> Result<Matrix<T>> {
    let n = sites.len();
    check_sites(n)?;
    let k = w.len();
    if v.len() != k || sites.iter().any(|s| s.aux_dim() != k) {
        return Err(Error::Shape { expected: format!("aux dimension {k}"), found: "mismatched site tensors or boundary vectors".into() });
    }
    let work = 4u128.pow(n as u32) * (k as u128) * (k as u128);
    if work > MAX_CONTRACTION_WORK {
        return Err(Error::DimensionOverflow { requested: work.min(usize::MAX as u128) as usize, cap: MAX_CONTRACTION_WORK as usize });
    }

    // acc[(row, col)] is the row vector ⟨W|𝐋…𝐋 for the prefix configurations
    let mut dim = 1usize;
    let mut acc: Vec<Vec<T>> = vec![w.0.clone()];
    for site in sites {
        let sparse: Vec<Vec<SparseBlock<T>>> =
            (0..2).map(|t| (0..2).map(|u| SparseBlock::from_matrix(site.block(t, u))).collect()).collect();
        let next_dim = 2 * dim;
        let mut next = vec![vec![T::zero(); k]; next_dim * next_dim];
        for a in 0..dim {
            for b in 0..dim {
                let prefix = &acc[a * dim + b];
                for (t, row) in sparse.iter().enumerate() {
                    for (u, block) in row.iter().enumerate() {
                        let slot = &mut next[(2 * a + t) * next_dim + (2 * b + u)];
                        block.apply_row(prefix, slot);
                    }
                }
            }
        }
        acc = next;
        dim = next_dim;
    }
    let data = acc.iter().map(|row| Vector(row.clone()).dot(v)).collect();
    Matrix::from_vec(dim, dim, data)
}

/// Raw and scalar-fitted residuals of `G̃(a,b)·G̃(b,c) − G̃(a,c)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ClosureResidual {
    pub raw: f64,
    pub fitted: f64,
    pub scalar: f64,
}

pub fn closure_check(
    rates_a: &BoundaryRates,
    rates_b: &BoundaryRates,
    rates_c: &BoundaryRates,
    n: usize,
    variant: YVariant,
) -> Result<ClosureResidual> {
    check_sum_constraint(rates_a, rates_b)?;
    check_sum_constraint(rates_b, rates_c)?;
    let ab: DenseOperator = contract(&compose_tilde_g(rates_a, rates_b, n, variant)?)?;
    let bc: DenseOperator = contract(&compose_tilde_g(rates_b, rates_c, n, variant)?)?;
    let ac: DenseOperator = contract(&compose_tilde_g(rates_a, rates_c, n, variant)?)?;
    let product = ab.matmul(&bc)?;
    let raw = frobenius_residual(&product, &ac)?;
    let (scalar, fitted) = fit_scalar(&product, &ac)?;
    Ok(ClosureResidual { raw, fitted, scalar })
}
