//! Multi-point density correlators, evaluated directly in the
//! out-of-equilibrium steady state and through the duality with the
//! Bernoulli measure of the equilibrium process.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{dual_rate_values, BoundaryRates, ProcessSpec, YVariant, MAX_SITES};
use crate::mpo::{build_g, build_rep, build_y_factor, SiteTensor};
use crate::scalar::Scalar;
use crate::steady::{dehp_mps, oracle, SteadyState};
use crate::tensor::Matrix;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelatorSpec {
    /// Strictly increasing, 1-based.
    pub sites: Vec<usize>,
    pub rates: BoundaryRates,
    pub n: usize,
}

impl CorrelatorSpec {
    pub fn new(sites: Vec<usize>, rates: BoundaryRates, n: usize) -> Result<Self> {
        let spec = Self { sites, rates, n };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        self.rates.validate()?;
        if self.n == 0 || self.n > MAX_SITES {
            return Err(Error::DimensionOverflow { requested: self.n, cap: MAX_SITES });
        }
        if self.sites.is_empty() {
            return Err(Error::Index("at least one site is required".into()));
        }
        if self.sites.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Index(format!("sites {:?} must be strictly increasing", self.sites)));
        }
        if self.sites[0] < 1 || *self.sites.last().expect("non-empty") > self.n {
            return Err(Error::Index(format!("sites {:?} must lie in 1..={}", self.sites, self.n)));
        }
        Ok(())
    }
}

/// How the density insertion `𝐗 = ((0, 0), (F, D))` is dressed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum XConvention {
    /// Bare `𝐗`.
    #[serde(rename = "x_raw")]
    XRaw,
    /// `𝐗·y⁻¹`, matching the dressing of `𝐋`.
    #[serde(rename = "x_times_yinv")]
    XTimesYinv,
}

impl XConvention {
    pub const ALL: [XConvention; 2] = [XConvention::XRaw, XConvention::XTimesYinv];

    pub fn name(&self) -> &'static str {
        match self {
            XConvention::XRaw => "x_raw",
            XConvention::XTimesYinv => "x_times_yinv",
        }
    }
}

/// `Σ_τ p(τ) Π_{i∈sites} n_i(τ)`; site 1 is the most significant bit.
pub fn expectation<T: Scalar>(state: &SteadyState<T>, sites: &[usize]) -> T {
    let n = state.n_sites();
    let mask = sites.iter().fold(0usize, |m, &i| m | 1 << (n - i));
    state
        .vector
        .0
        .iter()
        .enumerate()
        .filter(|(idx, _)| idx & mask == mask)
        .fold(T::zero(), |acc, (_, p)| acc + p.clone())
}

/// Oracle value: null vector of the out-of-equilibrium generator.
pub fn correlate_direct(spec: &CorrelatorSpec) -> Result<f64> {
    spec.validate()?;
    let state = oracle(&ProcessSpec::non_equilibrium(spec.n, spec.rates))?;
    Ok(expectation(&state, &spec.sites))
}

/// Same expectation in the DEHP matrix product state.
pub fn correlate_dehp<T: Scalar>(spec: &CorrelatorSpec) -> Result<T> {
    spec.validate()?;
    let state = dehp_mps::<T>(&spec.rates, spec.n)?;
    Ok(expectation(&state, &spec.sites))
}

/// Dual path with the default `YR` intertwiner.
pub fn correlate_dual(spec: &CorrelatorSpec, convention: XConvention) -> Result<f64> {
    correlate_dual_with::<f64>(spec, convention, YVariant::YR)
}

/// `⟨W| T ⋯ T_X ⋯ T |V⟩ / ⟨W| T^N |V⟩` where `T = Σ_{τ,τ′} 𝐋^{ττ′} b_{τ′}`
/// contracts a site of `G` against the uniform covector and the dual
/// Bernoulli factor `b`, and `T_X` does the same with `𝐗` in place of `𝐋`.
pub fn correlate_dual_with<T: Scalar>(spec: &CorrelatorSpec, convention: XConvention, variant: YVariant) -> Result<T> {
    spec.validate()?;
    let g = build_g::<T>(&spec.rates, spec.n, variant)?;
    let x = insertion_tensor::<T>(&spec.rates, spec.n, variant, convention)?;
    let [_, b, _, d] = dual_rate_values::<T>(&spec.rates, variant);
    let total = b.clone() + d.clone();
    let local = [b / total.clone(), d / total];

    let plain = transfer(&g.l, &local)?;
    let inserted = transfer(&x, &local)?;
    let mut with_x = g.w.clone();
    let mut without = g.w.clone();
    for site in 1..=spec.n {
        let t = if spec.sites.contains(&site) { &inserted } else { &plain };
        with_x = t.vecmat(&with_x)?;
        without = plain.vecmat(&without)?;
    }
    let denom = without.dot(&g.v);
    if denom.near_zero(0.0) {
        return Err(Error::ZeroImage);
    }
    Ok(with_x.dot(&g.v) / denom)
}

/// The density insertion tensor `𝐗 = ((0, 0), (F, D))`, optionally
/// dressed with `y⁻¹` on the input leg.
pub fn insertion_tensor<T: Scalar>(
    rates: &BoundaryRates,
    n: usize,
    variant: YVariant,
    convention: XConvention,
) -> Result<SiteTensor<T>> {
    let window = crate::mpo::AuxWindow::for_sites(n);
    let rep = build_rep::<T>(rates, window, false)?;
    let k = window.len();
    let bare = SiteTensor::new([[Matrix::zeros(k, k), Matrix::zeros(k, k)], [rep.f, rep.d]]);
    Ok(match convention {
        XConvention::XRaw => bare,
        XConvention::XTimesYinv => bare.phys_right(&build_y_factor::<T>(rates, variant)?.inverse()?),
    })
}

fn transfer<T: Scalar>(site: &SiteTensor<T>, local: &[T; 2]) -> Result<Matrix<T>> {
    let k = site.aux_dim();
    let mut t = Matrix::zeros(k, k);
    for out in 0..2 {
        for (inp, weight) in local.iter().enumerate() {
            t = t.add(&site.block(out, inp).scale(weight))?;
        }
    }
    Ok(t)
}

/// `ρ_i` for `i = 1..N` from the oracle steady state.
pub fn density_profile(rates: &BoundaryRates, n: usize) -> Result<Vec<f64>> {
    rates.validate()?;
    let state = oracle(&ProcessSpec::non_equilibrium(n, *rates))?;
    Ok((1..=n).map(|i| expectation(&state, &[i])).collect())
}

/// `ρ_i` through the dual path.
pub fn density_profile_dual(rates: &BoundaryRates, n: usize, variant: YVariant, convention: XConvention) -> Result<Vec<f64>> {
    (1..=n)
        .map(|i| correlate_dual_with::<f64>(&CorrelatorSpec::new(vec![i], *rates, n)?, convention, variant))
        .collect()
}

/// All single-site specs followed by all adjacent pairs.
pub fn standard_specs(rates: &BoundaryRates, n: usize) -> Result<Vec<CorrelatorSpec>> {
    let singles = (1..=n).map(|i| vec![i]);
    let pairs = (1..n).map(|i| vec![i, i + 1]);
    singles.chain(pairs).map(|sites| CorrelatorSpec::new(sites, *rates, n)).collect()
}
