//! Steady states three ways: the DEHP matrix product state, Bernoulli
//! product measures of the equilibrium duals, and the brute-force null
//! vector of the generator.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{assemble_h, dual_rate_values, BoundaryRates, ProcessSpec, YVariant, MAX_SITES};
use crate::mpo::{build_rep, contract, AuxWindow, Direction, MpoIntertwiner};
use crate::scalar::Scalar;
use crate::tensor::{null_space, DenseOperator, DenseVector, Matrix, Vector};

/// Relative singular-value cutoff for the null-vector oracle.
pub const ORACLE_TOL: f64 = 1e-10;
/// Tolerance on negative probability dust, relative to the normalization.
pub const NEGATIVE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    DehpMps,
    Bernoulli,
    Oracle,
    MappedThroughG,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SteadyState<T = f64> {
    /// Probability vector, entries summing to one.
    pub vector: Vector<T>,
    /// Sum of the entries before normalizing.
    pub normalization: T,
    pub provenance: Provenance,
    /// For mapped states: `c` with `G·p ≈ c · (unnormalized DEHP weights)`.
    pub dehp_scalar: Option<f64>,
}

impl<T: Scalar> SteadyState<T> {
    pub fn n_sites(&self) -> usize {
        self.vector.len().trailing_zeros() as usize
    }

    pub fn to_f64(&self) -> SteadyState<f64> {
        SteadyState {
            vector: self.vector.to_f64(),
            normalization: self.normalization.to_f64(),
            provenance: self.provenance,
            dehp_scalar: self.dehp_scalar,
        }
    }
}

fn normalized<T: Scalar>(weights: Vector<T>, provenance: Provenance) -> Result<SteadyState<T>> {
    let z = weights.sum();
    if z.near_zero(0.0) {
        return Err(Error::ZeroImage);
    }
    let inv = T::one() / z.clone();
    Ok(SteadyState { vector: weights.scale(&inv), normalization: z, provenance, dehp_scalar: None })
}

/// Unnormalized DEHP weights `⟨W|A^{τ₁}⋯A^{τ_N}|V⟩` with `A⁰ = E`, `A¹ = D`,
/// and `Z_N = ⟨W|(D+E)^N|V⟩` computed by a separate contraction.
pub fn dehp_weights<T: Scalar>(rates: &BoundaryRates, n: usize) -> Result<(Vector<T>, T)> {
    if n == 0 || n > MAX_SITES {
        return Err(Error::DimensionOverflow { requested: n, cap: MAX_SITES });
    }
    let window = AuxWindow::for_mps(n);
    let rep = build_rep::<T>(rates, window, false)?;
    let k = window.len();
    let v = Vector::<T>::basis(k, window.index_of(0).expect("window contains 0"));

    // column vectors A^{τ_j}⋯A^{τ_N}|V⟩, built from the right
    let mut suffixes = vec![v.clone()];
    for _ in 0..n {
        let mut next = Vec::with_capacity(2 * suffixes.len());
        for m in [&rep.e, &rep.d] {
            for s in &suffixes {
                next.push(m.matvec(s)?);
            }
        }
        suffixes = next;
    }
    let w = Vector::<T>::ones(k);
    let weights = Vector(suffixes.iter().map(|s| w.dot(s)).collect());

    let c = rep.d.add(&rep.e)?;
    let mut col = v;
    for _ in 0..n {
        col = c.matvec(&col)?;
    }
    Ok((weights, w.dot(&col)))
}

/// Out-of-equilibrium steady state from the matrix product ansatz.
pub fn dehp_mps<T: Scalar>(rates: &BoundaryRates, n: usize) -> Result<SteadyState<T>> {
    let (weights, z) = dehp_weights::<T>(rates, n)?;
    // for αβ < γδ every weight and Z_N are negative together
    let tol = T::of_f64(NEGATIVE_TOL * z.to_f64().abs());
    let sign = if z.is_negative() { -T::one() } else { T::one() };
    for (index, x) in weights.0.iter().enumerate() {
        if x.clone() * sign.clone() < -tol.clone() {
            return Err(Error::NegativeWeight { index, value: x.to_f64(), normalization: z.to_f64() });
        }
    }
    let mut state = normalized(weights, Provenance::DehpMps)?;
    state.normalization = z;
    Ok(state)
}

fn product_state<T: Scalar>(site: [T; 2], n: usize) -> Vector<T> {
    let local = Vector(site.to_vec());
    (0..n).fold(Vector(vec![T::one()]), |acc, _| acc.kron(&local))
}

/// `((β, δ)/(β+δ))^{⊗N}`: the product measure fixed by the right reservoir.
pub fn bernoulli<T: Scalar>(rates: &BoundaryRates, n: usize) -> Result<SteadyState<T>> {
    rates.validate()?;
    let [_, b, _, d] = rates.exact::<T>();
    bernoulli_from(b, d, n)
}

fn bernoulli_from<T: Scalar>(extract: T, inject: T, n: usize) -> Result<SteadyState<T>> {
    if n == 0 || n > MAX_SITES {
        return Err(Error::DimensionOverflow { requested: n, cap: MAX_SITES });
    }
    let total = extract.clone() + inject.clone();
    let site = [extract / total.clone(), inject / total];
    Ok(SteadyState {
        vector: product_state(site, n),
        normalization: T::one(),
        provenance: Provenance::Bernoulli,
        dehp_scalar: None,
    })
}

/// Bernoulli steady state of the equilibrium dual for `variant`.
pub fn dual_bernoulli<T: Scalar>(rates: &BoundaryRates, n: usize, variant: YVariant) -> Result<SteadyState<T>> {
    rates.validate()?;
    let [_, b, _, d] = dual_rate_values::<T>(rates, variant);
    bernoulli_from(b, d, n)
}

/// Normalized null vector of the generator of `spec`.
pub fn oracle(spec: &ProcessSpec) -> Result<SteadyState<f64>> {
    let h = assemble_h::<f64>(spec)?;
    oracle_of(&h)
}

pub fn oracle_of(h: &DenseOperator) -> Result<SteadyState<f64>> {
    let basis = null_space(h, ORACLE_TOL)?;
    if basis.len() != 1 {
        return Err(Error::NonUniqueSteadyState(basis.len()));
    }
    normalized(basis.into_iter().next().expect("one vector"), Provenance::Oracle)
}

/// `contract(mpo)·state`, renormalized. For a `G` built in the
/// out-of-equilibrium to equilibrium direction, also reports the scalar
/// relating the raw image to the DEHP weights at the same rates.
pub fn map_through<T: Scalar>(mpo: &MpoIntertwiner<T>, state: &SteadyState<T>) -> Result<SteadyState<T>> {
    let g = contract(mpo)?;
    let image = g.matvec(&state.vector)?;
    let scale = g.frobenius_norm() * state.vector.norm();
    if image.norm() <= 1e-13 * scale || image.0.iter().all(|x| x.near_zero(0.0)) {
        return Err(Error::ZeroImage);
    }
    let dehp_scalar = match mpo.direction {
        Direction::NeToE => dehp_weights::<f64>(&mpo.rates, mpo.n_sites).ok().map(|(w, _)| fit_vector(&image.to_f64(), &w)),
        _ => None,
    };
    let mut mapped = normalized(image, Provenance::MappedThroughG)?;
    mapped.dehp_scalar = dehp_scalar;
    Ok(mapped)
}

/// Least-squares `c` minimising `‖p − c·q‖`.
pub fn fit_vector(p: &DenseVector, q: &DenseVector) -> f64 {
    let qq = q.dot(q);
    if qq == 0.0 {
        0.0
    } else {
        p.dot(q) / qq
    }
}

/// `‖H·p‖₂` for a state vector `p`.
pub fn generator_residual<T: Scalar>(h: &Matrix<T>, state: &SteadyState<T>) -> Result<f64> {
    Ok(h.matvec(&state.vector)?.norm())
}
