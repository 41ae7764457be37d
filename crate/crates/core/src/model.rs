//! Stochastic generators of the open symmetric simple exclusion process.
//!
//! Basis convention: local state 0 = empty, 1 = occupied; site 1 is the
//! leftmost (most significant) tensor factor. Generators act on probability
//! column vectors, `d|P⟩/dt = H|P⟩`, so every column of `H` sums to zero.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::{embed_local, Matrix};

/// Largest lattice for which [`assemble_h`] will build a dense generator.
pub const MAX_SITES: usize = 12;

/// Tolerance used by float-mode equilibrium and pole tests.
pub const DEGENERACY_TOL: f64 = 1e-12;

/// The four reservoir rates of one boundary-driven process.
///
/// `alpha`/`gamma` inject/extract at the left end, `delta`/`beta`
/// inject/extract at the right end.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryRates {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl BoundaryRates {
    pub fn new(alpha: f64, beta: f64, gamma: f64, delta: f64) -> Result<Self> {
        let rates = Self { alpha, beta, gamma, delta };
        rates.validate()?;
        Ok(rates)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.alpha, self.beta, self.gamma, self.delta];
        if all.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::InvalidRates(format!("rates must be finite and non-negative, got {self}")));
        }
        if self.left_sum() <= 0.0 || self.right_sum() <= 0.0 {
            return Err(Error::InvalidRates(format!("alpha+gamma and beta+delta must be positive, got {self}")));
        }
        Ok(())
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.alpha, self.beta, self.gamma, self.delta]
    }

    pub fn left_sum(&self) -> f64 {
        self.alpha + self.gamma
    }

    pub fn right_sum(&self) -> f64 {
        self.beta + self.delta
    }

    /// `αβ − γδ`; zero exactly for equilibrium boundaries.
    pub fn drive(&self) -> f64 {
        self.alpha * self.beta - self.gamma * self.delta
    }

    /// `1/(α+γ) + 1/(β+δ)`. `r_n` vanishes at `n = −s` (and at `n = +s`
    /// for the rate-negated representation).
    pub fn pole_offset(&self) -> f64 {
        1.0 / self.left_sum() + 1.0 / self.right_sum()
    }

    pub(crate) fn exact<T: Scalar>(&self) -> [T; 4] {
        [T::of_f64(self.alpha), T::of_f64(self.beta), T::of_f64(self.gamma), T::of_f64(self.delta)]
    }
}

impl std::fmt::Display for BoundaryRates {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{},{})", self.alpha, self.beta, self.gamma, self.delta)
    }
}

impl std::str::FromStr for BoundaryRates {
    type Err = Error;

    /// Parses `a,b,g,d`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::InvalidRates(format!("cannot parse {s:?}: {e}")))?;
        match parts.as_slice() {
            &[a, b, g, d] => Self::new(a, b, g, d),
            _ => Err(Error::InvalidRates(format!("expected four comma-separated rates, got {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

/// Which product operator `Y` dresses the intertwiner, and hence which
/// equilibrium process is the dual.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum YVariant {
    #[serde(rename = "yr")]
    YR,
    #[serde(rename = "yl")]
    YL,
}

impl YVariant {
    pub fn name(&self) -> &'static str {
        match self {
            YVariant::YR => "yr",
            YVariant::YL => "yl",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundaryKind {
    NonEquilibrium,
    DualEquilibriumRight,
    DualEquilibriumLeft,
}

impl BoundaryKind {
    pub fn dual_of(variant: YVariant) -> Self {
        match variant {
            YVariant::YR => BoundaryKind::DualEquilibriumRight,
            YVariant::YL => BoundaryKind::DualEquilibriumLeft,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProcessSpec {
    pub n: usize,
    pub rates: BoundaryRates,
    pub kind: BoundaryKind,
}

impl ProcessSpec {
    pub fn new(n: usize, rates: BoundaryRates, kind: BoundaryKind) -> Self {
        Self { n, rates, kind }
    }

    pub fn non_equilibrium(n: usize, rates: BoundaryRates) -> Self {
        Self::new(n, rates, BoundaryKind::NonEquilibrium)
    }

    pub fn dual(n: usize, rates: BoundaryRates, variant: YVariant) -> Self {
        Self::new(n, rates, BoundaryKind::dual_of(variant))
    }
}

/// Nearest-neighbour hopping block, `SWAP − 𝟙`.
pub fn build_bulk_h<T: Scalar>() -> Matrix<T> {
    Matrix::from_f64_rows(&[
        [0.0, 0.0, 0.0, 0.0],
        [0.0, -1.0, 1.0, 0.0],
        [0.0, 1.0, -1.0, 0.0],
        [0.0, 0.0, 0.0, 0.0],
    ])
}

pub fn build_boundary<T: Scalar>(side: Side, rates: &BoundaryRates) -> Matrix<T> {
    let [a, b, g, d] = rates.exact::<T>();
    match side {
        Side::Left => Matrix::from_rows(&[[-a.clone(), g.clone()], [a, -g]]),
        Side::Right => Matrix::from_rows(&[[-d.clone(), b.clone()], [d, -b]]),
    }
}

/// Boundary matrices of the equilibrium dual process together with
/// `r = (α+γ)/(β+δ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DualBoundaries<T> {
    pub left: Matrix<T>,
    pub right: Matrix<T>,
    pub r: T,
}

/// Dual equilibrium boundaries.
///
/// `YR`: `B_R = A_R`, `B_L = r·A_R`. `YL`: `B_L = A_L`, `B_R = A_L / r`
/// (the left-boundary matrix placed on the last site).
pub fn build_dual_rates<T: Scalar>(rates: &BoundaryRates, variant: YVariant) -> DualBoundaries<T> {
    let [a, b, g, d] = rates.exact::<T>();
    let r = (a + g) / (b + d);
    match variant {
        YVariant::YR => {
            let a_r = build_boundary::<T>(Side::Right, rates);
            DualBoundaries { left: a_r.scale(&r), right: a_r, r }
        }
        YVariant::YL => {
            let a_l = build_boundary::<T>(Side::Left, rates);
            let inv_r = T::one() / r.clone();
            DualBoundaries { right: a_l.scale(&inv_r), left: a_l, r }
        }
    }
}

/// The rate quadruple `(α, β, γ, δ)` implied by the dual boundaries.
pub fn dual_rate_values<T: Scalar>(rates: &BoundaryRates, variant: YVariant) -> [T; 4] {
    let [a, b, g, d] = rates.exact::<T>();
    let r = (a.clone() + g.clone()) / (b.clone() + d.clone());
    match variant {
        // left boundary r·A_R: inject r·δ, extract r·β
        YVariant::YR => [r.clone() * d.clone(), b.clone(), r * b, d],
        // right boundary A_L/r: inject α/r, extract γ/r
        YVariant::YL => [a.clone(), g.clone() / r.clone(), g, a / r],
    }
}

/// Same as [`dual_rate_values`] but as a float [`BoundaryRates`].
pub fn dual_rates(rates: &BoundaryRates, variant: YVariant) -> BoundaryRates {
    let [alpha, beta, gamma, delta] = dual_rate_values::<f64>(rates, variant);
    BoundaryRates { alpha, beta, gamma, delta }
}

/// Generator on `n` sites with the given boundary blocks on sites 1 and `n`.
pub fn assemble_with<T: Scalar>(n: usize, left: &Matrix<T>, right: &Matrix<T>) -> Result<Matrix<T>> {
    if n == 0 || n > MAX_SITES {
        return Err(Error::DimensionOverflow { requested: n, cap: MAX_SITES });
    }
    let mut h = embed_local(left, 1, 1, n, 2)?;
    h = h.add(&embed_local(right, n, 1, n, 2)?)?;
    let bulk = build_bulk_h::<T>();
    for i in 1..n {
        h = h.add(&embed_local(&bulk, i, 2, n, 2)?)?;
    }
    Ok(h)
}

pub fn assemble_h<T: Scalar>(spec: &ProcessSpec) -> Result<Matrix<T>> {
    spec.rates.validate()?;
    let (left, right) = match spec.kind {
        BoundaryKind::NonEquilibrium => {
            (build_boundary(Side::Left, &spec.rates), build_boundary(Side::Right, &spec.rates))
        }
        BoundaryKind::DualEquilibriumRight => {
            let dual = build_dual_rates::<T>(&spec.rates, YVariant::YR);
            (dual.left, dual.right)
        }
        BoundaryKind::DualEquilibriumLeft => {
            let dual = build_dual_rates::<T>(&spec.rates, YVariant::YL);
            (dual.left, dual.right)
        }
    };
    assemble_with(spec.n, &left, &right)
}

/// `αβ − γδ = 0`, with a relative float tolerance.
pub fn is_equilibrium(rates: &BoundaryRates) -> bool {
    let scale = (rates.alpha * rates.beta).abs().max((rates.gamma * rates.delta).abs()).max(1.0);
    rates.drive().abs() <= DEGENERACY_TOL * scale
}

/// Exact equilibrium test on a rate quadruple `(α, β, γ, δ)`.
pub fn is_equilibrium_values<T: Scalar>(values: &[T; 4]) -> bool {
    let [a, b, g, d] = values.clone();
    (a * b - g * d).near_zero(DEGENERACY_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;
    use crate::tensor::DenseOperator;

    fn rates(a: f64, b: f64, g: f64, d: f64) -> BoundaryRates {
        BoundaryRates::new(a, b, g, d).unwrap()
    }

    #[test]
    fn bulk_block() {
        let h = build_bulk_h::<f64>();
        assert_eq!(h[(1, 2)], 1.0);
        assert_eq!(h, h.transpose());
        assert!(h.column_sums().iter().all(|&s| s == 0.0));
    }

    #[test]
    fn boundary_blocks() {
        let left = build_boundary::<f64>(Side::Left, &rates(1.0, 1.0, 0.0, 0.0));
        assert_eq!(left, DenseOperator::from_rows(&[[-1.0, 0.0], [1.0, 0.0]]));
        let right = build_boundary::<f64>(Side::Right, &rates(0.3, 1.0, 0.7, 0.0));
        assert_eq!(right, DenseOperator::from_rows(&[[0.0, 1.0], [0.0, -1.0]]));
        let any = rates(0.4, 1.3, 2.2, 0.9);
        for side in [Side::Left, Side::Right] {
            assert!(build_boundary::<f64>(side, &any).column_sums().iter().all(|s| s.abs() < 1e-15));
        }
    }

    #[test]
    fn dual_rates_yr() {
        let dual = build_dual_rates::<f64>(&rates(1.0, 1.0, 0.0, 0.0), YVariant::YR);
        assert_eq!(dual.r, 1.0);
        let a_r = DenseOperator::from_rows(&[[0.0, 1.0], [0.0, -1.0]]);
        assert_eq!(dual.left, a_r);
        assert_eq!(dual.right, a_r);

        let any = rates(2.0, 0.5, 0.7, 1.3);
        let dual = build_dual_rates::<f64>(&any, YVariant::YR);
        assert_eq!(dual.left, dual.right.scale(&dual.r));
    }

    #[test]
    fn dual_rates_yl() {
        let dual = build_dual_rates::<f64>(&rates(2.0, 1.0, 0.0, 1.0), YVariant::YL);
        assert_eq!(dual.r, 1.0);
        assert_eq!(dual.left, DenseOperator::from_rows(&[[-2.0, 0.0], [2.0, 0.0]]));
        assert_eq!(dual.right, dual.left);
    }

    #[test]
    fn dual_rates_are_equilibrium_exactly() {
        for r in [rates(2.0, 1.0, 0.5, 1.0), rates(0.75, 2.5, 1.25, 0.5), rates(3.0, 0.25, 1.0, 2.0)] {
            for v in [YVariant::YR, YVariant::YL] {
                let vals = dual_rate_values::<Rational>(&r, v);
                assert!(is_equilibrium_values(&vals), "{r} {v:?}");
            }
        }
    }

    #[test]
    fn equilibrium_predicate() {
        assert!(is_equilibrium(&rates(1.0, 1.0, 1.0, 1.0)));
        assert!(!is_equilibrium(&rates(1.0, 1.0, 0.0, 0.0)));
        assert!(is_equilibrium(&dual_rates(&rates(2.0, 0.3, 0.9, 1.1), YVariant::YR)));
        assert!(is_equilibrium(&dual_rates(&rates(2.0, 0.3, 0.9, 1.1), YVariant::YL)));
    }

    #[test]
    fn single_site_generator() {
        let h = assemble_h::<f64>(&ProcessSpec::non_equilibrium(1, rates(1.0, 1.0, 0.0, 0.0))).unwrap();
        assert_eq!(h, DenseOperator::from_rows(&[[-1.0, 1.0], [1.0, -1.0]]));
    }

    #[test]
    fn dual_generator_two_sites() {
        // both dual boundaries only extract: the empty lattice is absorbing
        let h = assemble_h::<f64>(&ProcessSpec::dual(2, rates(1.0, 1.0, 0.0, 0.0), YVariant::YR)).unwrap();
        assert!(h.column_sums().iter().all(|s| s.abs() < 1e-15));
        let empty = crate::tensor::Vector(vec![1.0, 0.0, 0.0, 0.0]);
        assert!(h.matvec(&empty).unwrap().0.iter().all(|x| x.abs() < 1e-15));
    }

    #[test]
    fn generator_sign_structure() {
        let h = assemble_h::<f64>(&ProcessSpec::non_equilibrium(3, rates(0.3, 2.0, 1.1, 0.6))).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                if i == j {
                    assert!(h[(i, j)] <= 0.0);
                } else {
                    assert!(h[(i, j)] >= 0.0);
                }
            }
        }
    }

    #[test]
    fn assembly_is_linear_in_left_boundary() {
        let r = rates(1.7, 0.4, 0.2, 0.9);
        let dual = build_dual_rates::<f64>(&r, YVariant::YR);
        let h = assemble_h::<f64>(&ProcessSpec::dual(3, r, YVariant::YR)).unwrap();
        let zero = DenseOperator::zeros(2, 2);
        let without_left = assemble_with(3, &zero, &dual.right).unwrap();
        let a_r_left = embed_local(&dual.right, 1, 1, 3, 2).unwrap();
        let rebuilt = without_left.add(&a_r_left.scale(&dual.r)).unwrap();
        assert!(crate::tensor::frobenius_residual(&h, &rebuilt).unwrap() < 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(BoundaryRates::new(-1.0, 1.0, 0.0, 0.0).is_err());
        assert!(BoundaryRates::new(0.0, 1.0, 0.0, 0.0).is_err());
        assert!(BoundaryRates::new(1.0, 0.0, 1.0, 0.0).is_err());
        assert!(assemble_h::<f64>(&ProcessSpec::non_equilibrium(13, rates(1.0, 1.0, 0.0, 0.0))).is_err());
        assert!(assemble_h::<f64>(&ProcessSpec::non_equilibrium(0, rates(1.0, 1.0, 0.0, 0.0))).is_err());
    }

    #[test]
    fn parse_rates() {
        let r: BoundaryRates = "2, 1,0.5,1".parse().unwrap();
        assert_eq!(r, rates(2.0, 1.0, 0.5, 1.0));
        assert!("1,2,3".parse::<BoundaryRates>().is_err());
        assert!("1,x,3,4".parse::<BoundaryRates>().is_err());
    }
}
