//! Relation-residual checks. Each check evaluates one identity by dense
//! computation and returns a [`CheckReport`]; precondition failures come
//! back as errors so the caller can tell them apart from failed residuals.

use std::collections::BTreeMap;

use nalgebra::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    assemble_h, assemble_with, build_boundary, build_bulk_h, build_dual_rates, dual_rate_values, BoundaryRates,
    ProcessSpec, Side, YVariant,
};
use crate::mpo::{
    build_g, build_g_in_window, build_g_prime, build_g_prime_in_window, build_rep, closure_check, compose_tilde_g,
    contract, AuxWindow, Direction, MpoIntertwiner, SiteTensor,
};
use crate::observables::{correlate_direct, correlate_dual_with, standard_specs, XConvention};
use crate::scalar::Scalar;
use crate::steady::{dehp_mps, dual_bernoulli, map_through, oracle};
use crate::tensor::{fit_scalar, frobenius_residual, DenseOperator, Matrix, Vector};

/// Distance from the window edge below which auxiliary components are
/// excluded from relation residuals.
pub const INTERIOR_MARGIN: usize = 2;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ScalarMode {
    #[default]
    Float,
    Exact,
}

impl ScalarMode {
    fn of<T: Scalar>() -> Self {
        if T::EXACT {
            ScalarMode::Exact
        } else {
            ScalarMode::Float
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ScalarMode::Float => "float",
            ScalarMode::Exact => "exact",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckReport {
    pub check_name: String,
    pub n: usize,
    pub mode: ScalarMode,
    pub variant: Option<YVariant>,
    pub direction: Option<Direction>,
    pub rates: BoundaryRates,
    pub rates_b: Option<BoundaryRates>,
    pub rates_c: Option<BoundaryRates>,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub details: BTreeMap<String, String>,
    pub error: Option<String>,
}

impl CheckReport {
    pub fn new(name: &str, n: usize, rates: BoundaryRates, residual: f64, tolerance: f64) -> Self {
        Self {
            check_name: name.to_string(),
            n,
            mode: ScalarMode::Float,
            variant: None,
            direction: None,
            rates,
            rates_b: None,
            rates_c: None,
            residual,
            tolerance,
            passed: residual <= tolerance,
            details: BTreeMap::new(),
            error: None,
        }
    }

    /// Report for a check that could not be evaluated.
    pub fn errored(name: &str, n: usize, rates: BoundaryRates, tolerance: f64, err: &Error) -> Self {
        let mut r = Self::new(name, n, rates, f64::NAN, tolerance);
        r.passed = false;
        r.error = Some(err.to_string());
        r
    }

    fn mode(mut self, mode: ScalarMode) -> Self {
        self.mode = mode;
        self
    }

    fn variant(mut self, v: YVariant) -> Self {
        self.variant = Some(v);
        self
    }

    fn direction(mut self, d: Direction) -> Self {
        self.direction = Some(d);
        self
    }

    fn detail(mut self, key: &str, value: impl ToString) -> Self {
        self.details.insert(key.to_string(), value.to_string());
        self
    }

    fn detail_f64(self, key: &str, value: f64) -> Self {
        self.detail(key, fmt_f64(value))
    }
}

/// Fixed 17-significant-digit formatting used by every emitter.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn rel<T: Scalar>(diff: &Matrix<T>, reference: &Matrix<T>) -> f64 {
    diff.frobenius_norm() / reference.frobenius_norm().max(1.0)
}

fn interior<T: Scalar>(m: &Matrix<T>, window: &AuxWindow) -> Matrix<T> {
    let range = window.interior(INTERIOR_MARGIN);
    m.submatrix(range.clone(), range)
}

/// Every column sums to zero and every off-diagonal entry is non-negative.
pub fn check_generator<T: Scalar>(spec: &ProcessSpec, tol: f64) -> Result<CheckReport> {
    let h = assemble_h::<T>(spec)?;
    let worst_sum = h.column_sums().iter().map(|s| s.to_f64().abs()).fold(0.0, f64::max);
    let mut min_off = f64::INFINITY;
    for i in 0..h.rows() {
        for j in 0..h.cols() {
            if i != j {
                min_off = min_off.min(h[(i, j)].to_f64());
            }
        }
    }
    let mut report = CheckReport::new("generator", spec.n, spec.rates, worst_sum, tol)
        .mode(ScalarMode::of::<T>())
        .detail("kind", format!("{:?}", spec.kind))
        .detail_f64("min_off_diagonal", min_off);
    report.passed &= min_off >= 0.0;
    Ok(report)
}

/// Bulk commutators on the window interior and both boundary relations of
/// the representation (with negated rates when `negate`).
pub fn check_rep_algebra<T: Scalar>(rates: &BoundaryRates, n: usize, negate: bool, tol: f64) -> Result<CheckReport> {
    let window = AuxWindow::for_sites(n);
    let rep = build_rep::<T>(rates, window, negate)?;
    let (d, e, f) = (&rep.d, &rep.e, &rep.f);
    let comm = |a: &Matrix<T>, b: &Matrix<T>| -> Result<Matrix<T>> { a.matmul(b)?.sub(&b.matmul(a)?) };
    let ef = comm(e, f)?.sub(f)?;
    let df = comm(d, f)?.add(f)?;
    let de = comm(d, e)?.sub(&d.add(e)?)?;
    let bulk = [ef, df, de].iter().map(|m| rel(&interior(m, &window), &interior(d, &window))).fold(0.0, f64::max);

    let mut signed = rates.exact::<T>();
    if negate {
        signed = signed.map(|x| -x);
    }
    let [a, b, g, dl] = signed;
    let k = window.len();
    let w = Vector::<T>::ones(k);
    let left_op = e.scale(&a).sub(&d.scale(&g))?;
    let left = left_op.vecmat(&w)?;
    let range = window.interior(INTERIOR_MARGIN);
    let left_res = range.clone().map(|j| (left.0[j].clone() - T::one()).to_f64().powi(2)).sum::<f64>().sqrt()
        / (range.len() as f64).sqrt().max(1.0);
    let v = Vector::<T>::basis(k, window.index_of(0).expect("window contains 0"));
    let right = d.scale(&b).sub(&e.scale(&dl))?.matvec(&v)?;
    let right_res = right.0.iter().zip(&v.0).map(|(x, y)| (x.clone() - y.clone()).to_f64().powi(2)).sum::<f64>().sqrt();

    let residual = bulk.max(left_res).max(right_res);
    Ok(CheckReport::new("rep_algebra", n, *rates, residual, tol)
        .mode(ScalarMode::of::<T>())
        .detail("negated", negate)
        .detail_f64("bulk", bulk)
        .detail_f64("left_boundary", left_res)
        .detail_f64("right_boundary", right_res))
}

type PhysGrid<T> = Vec<Vec<Matrix<T>>>;

/// Two-site tensor `(a b)^{(t₁t₂),(u₁u₂)} = a^{t₁u₁} b^{t₂u₂}`.
fn two_site<T: Scalar>(a: &SiteTensor<T>, b: &SiteTensor<T>) -> Result<PhysGrid<T>> {
    let mut grid = Vec::with_capacity(4);
    for t in 0..4 {
        let mut row = Vec::with_capacity(4);
        for u in 0..4 {
            row.push(a.block(t >> 1, u >> 1).matmul(b.block(t & 1, u & 1))?);
        }
        grid.push(row);
    }
    Ok(grid)
}

fn grid_left<T: Scalar>(m: &Matrix<T>, p: &PhysGrid<T>) -> Result<PhysGrid<T>> {
    let k = p[0][0].rows();
    let mut out = vec![vec![Matrix::zeros(k, k); 4]; 4];
    for t in 0..4 {
        for u in 0..4 {
            for s in 0..4 {
                if !m[(t, s)].is_zero() {
                    out[t][u] = out[t][u].add(&p[s][u].scale(&m[(t, s)]))?;
                }
            }
        }
    }
    Ok(out)
}

fn grid_right<T: Scalar>(p: &PhysGrid<T>, m: &Matrix<T>) -> Result<PhysGrid<T>> {
    let k = p[0][0].rows();
    let mut out = vec![vec![Matrix::zeros(k, k); 4]; 4];
    for t in 0..4 {
        for u in 0..4 {
            for s in 0..4 {
                if !m[(s, u)].is_zero() {
                    out[t][u] = out[t][u].add(&p[t][s].scale(&m[(s, u)]))?;
                }
            }
        }
    }
    Ok(out)
}

fn build_direction<T: Scalar>(rates: &BoundaryRates, n: usize, direction: Direction, variant: YVariant) -> Result<MpoIntertwiner<T>> {
    match direction {
        Direction::NeToE => build_g(rates, n, variant),
        Direction::EToNe => build_g_prime(rates, n, variant),
        Direction::Composed => Err(Error::InvalidSpec("composed MPOs carry no divergence tensor".into())),
    }
}

/// `h·𝐋𝐋 − 𝐋𝐋·h − (𝐋𝐙 − 𝐙𝐋)` on interior auxiliary components.
pub fn check_bulk_exchange<T: Scalar>(
    rates: &BoundaryRates,
    n: usize,
    direction: Direction,
    variant: YVariant,
    tol: f64,
) -> Result<CheckReport> {
    let mpo = build_direction::<T>(rates, n, direction, variant)?;
    let z = mpo.z.as_ref().expect("G and G' carry Z");
    let h = build_bulk_h::<T>();
    let ll = two_site(&mpo.l, &mpo.l)?;
    let lz = two_site(&mpo.l, z)?;
    let zl = two_site(z, &mpo.l)?;
    let lhs = grid_left(&h, &ll)?;
    let rhs = grid_right(&ll, &h)?;
    let (mut diff2, mut ref2) = (0.0, 0.0);
    for t in 0..4 {
        for u in 0..4 {
            let d = lhs[t][u].sub(&rhs[t][u])?.sub(&lz[t][u].sub(&zl[t][u])?)?;
            diff2 += interior(&d, &mpo.window).frobenius_norm().powi(2);
            ref2 += interior(&ll[t][u], &mpo.window).frobenius_norm().powi(2);
        }
    }
    let residual = diff2.sqrt() / ref2.sqrt().max(1.0);
    Ok(CheckReport::new("bulk_exchange", n, *rates, residual, tol)
        .mode(ScalarMode::of::<T>())
        .variant(variant)
        .direction(direction))
}

/// `⟨W|(A_L𝐋 − 𝐙) − ⟨W|𝐋B_L` on interior columns and
/// `(A_R𝐋 + 𝐙)|V⟩ − 𝐋|V⟩B_R` in full, with `A` the boundaries of the
/// target-side process and `B` those of the source side.
pub fn check_boundary_exchange<T: Scalar>(
    rates: &BoundaryRates,
    n: usize,
    direction: Direction,
    variant: YVariant,
    tol: f64,
) -> Result<CheckReport> {
    let mpo = build_direction::<T>(rates, n, direction, variant)?;
    let z = mpo.z.as_ref().expect("G and G' carry Z");
    let ne = (build_boundary::<T>(Side::Left, rates), build_boundary::<T>(Side::Right, rates));
    let dual = build_dual_rates::<T>(rates, variant);
    let eq = (dual.left, dual.right);
    let ((a_l, a_r), (b_l, b_r)) = match direction {
        Direction::NeToE => (ne, eq),
        _ => (eq, ne),
    };

    let range = mpo.window.interior(INTERIOR_MARGIN);
    let (mut left2, mut right2, mut ref2) = (0.0, 0.0, 0.0);
    let al_l = mpo.l.phys_left(&a_l);
    let l_bl = mpo.l.phys_right(&b_l);
    let ar_l = mpo.l.phys_left(&a_r);
    let l_br = mpo.l.phys_right(&b_r);
    for t in 0..2 {
        for u in 0..2 {
            let left_op = al_l.block(t, u).sub(z.block(t, u))?.sub(l_bl.block(t, u))?;
            let row = left_op.vecmat(&mpo.w)?;
            left2 += range.clone().map(|j| row.0[j].to_f64().powi(2)).sum::<f64>();
            let right_op = ar_l.block(t, u).add(z.block(t, u))?.sub(l_br.block(t, u))?;
            right2 += right_op.matvec(&mpo.v)?.norm().powi(2);
            ref2 += mpo.l.block(t, u).matvec(&mpo.v)?.norm().powi(2);
        }
    }
    let scale = ref2.sqrt().max(1.0);
    let (left_res, right_res) = (left2.sqrt() / scale, right2.sqrt() / scale);
    Ok(CheckReport::new("boundary_exchange", n, *rates, left_res.max(right_res), tol)
        .mode(ScalarMode::of::<T>())
        .variant(variant)
        .direction(direction)
        .detail_f64("left", left_res)
        .detail_f64("right", right_res))
}

fn h_pair<T: Scalar>(rates: &BoundaryRates, n: usize, variant: YVariant) -> Result<(Matrix<T>, Matrix<T>)> {
    let h_ne = assemble_h::<T>(&ProcessSpec::non_equilibrium(n, *rates))?;
    let dual = build_dual_rates::<T>(rates, variant);
    let h_e = assemble_with(n, &dual.left, &dual.right)?;
    Ok((h_ne, h_e))
}

/// `H₁·G − G·H₂` relative to `H₁·G`.
pub fn check_intertwining<T: Scalar>(
    rates: &BoundaryRates,
    n: usize,
    direction: Direction,
    variant: YVariant,
    tol: f64,
) -> Result<CheckReport> {
    let g = contract(&build_direction::<T>(rates, n, direction, variant)?)?;
    let (h_ne, h_e) = h_pair::<T>(rates, n, variant)?;
    let (h1, h2) = match direction {
        Direction::NeToE => (h_ne, h_e),
        _ => (h_e, h_ne),
    };
    let lhs = h1.matmul(&g)?;
    let residual = frobenius_residual(&lhs, &g.matmul(&h2)?)?;
    Ok(CheckReport::new("intertwining", n, *rates, residual, tol)
        .mode(ScalarMode::of::<T>())
        .variant(variant)
        .direction(direction))
}

/// `H_NE(a)·G̃(a,b) − G̃(a,b)·H_NE(b)`.
pub fn check_composed_intertwining(
    a: &BoundaryRates,
    b: &BoundaryRates,
    n: usize,
    variant: YVariant,
    tol: f64,
) -> Result<CheckReport> {
    let gt: DenseOperator = contract(&compose_tilde_g(a, b, n, variant)?)?;
    let h_a = assemble_h::<f64>(&ProcessSpec::non_equilibrium(n, *a))?;
    let h_b = assemble_h::<f64>(&ProcessSpec::non_equilibrium(n, *b))?;
    let residual = frobenius_residual(&h_a.matmul(&gt)?, &gt.matmul(&h_b)?)?;
    let mut report = CheckReport::new("composed_intertwining", n, *a, residual, tol).variant(variant).direction(Direction::Composed);
    report.rates_b = Some(*b);
    Ok(report)
}

/// Change of `contract` under widening the window by `extra` rows per side.
pub fn check_window_stability(
    rates: &BoundaryRates,
    n: usize,
    direction: Direction,
    variant: YVariant,
    extra: i64,
    tol: f64,
) -> Result<CheckReport> {
    let window = AuxWindow::for_sites(n);
    let build = |w: AuxWindow| -> Result<DenseOperator> {
        match direction {
            Direction::NeToE => contract(&build_g_in_window(rates, n, variant, w)?),
            Direction::EToNe => contract(&build_g_prime_in_window(rates, n, variant, w)?),
            Direction::Composed => Err(Error::InvalidSpec("window stability is checked on G and G'".into())),
        }
    };
    let base = build(window)?;
    let residual = frobenius_residual(&base, &build(window.widened(extra))?)?;
    Ok(CheckReport::new("window_stability", n, *rates, residual, tol)
        .variant(variant)
        .direction(direction)
        .detail("extra_rows", extra))
}

/// Angles of `G·(dual Bernoulli)` and of the DEHP MPS to the oracle null
/// vector of `H_NE`; the fitted scalar against the DEHP weights is recorded.
pub fn check_steady_state(rates: &BoundaryRates, n: usize, variant: YVariant, tol: f64) -> Result<CheckReport> {
    let o = oracle(&ProcessSpec::non_equilibrium(n, *rates))?;
    let g = build_g::<f64>(rates, n, variant)?;
    let mapped = map_through(&g, &dual_bernoulli(rates, n, variant)?)?;
    let dehp = dehp_mps::<f64>(rates, n)?;
    let mapped_angle = mapped.vector.angle_to(&o.vector);
    let dehp_angle = dehp.vector.angle_to(&o.vector);
    let h = assemble_h::<f64>(&ProcessSpec::non_equilibrium(n, *rates))?;
    Ok(CheckReport::new("steady_state", n, *rates, mapped_angle.max(dehp_angle), tol)
        .variant(variant)
        .detail_f64("mapped_angle", mapped_angle)
        .detail_f64("dehp_angle", dehp_angle)
        .detail_f64("dehp_scalar", mapped.dehp_scalar.unwrap_or(f64::NAN))
        .detail_f64("oracle_generator_residual", h.matvec(&o.vector)?.norm())
        .detail_f64("dehp_normalization", dehp.normalization))
}

/// The dual rates satisfy `αβ − γδ = 0` and the dual Bernoulli vector is
/// annihilated by `H_E`.
pub fn check_dual_equilibrium<T: Scalar>(rates: &BoundaryRates, n: usize, variant: YVariant, tol: f64) -> Result<CheckReport> {
    let [a, b, g, d] = dual_rate_values::<T>(rates, variant);
    let drive = (a.clone() * b.clone() - g.clone() * d.clone()).to_f64().abs();
    let drive_rel = drive / (a * b).to_f64().abs().max((g * d).to_f64().abs()).max(1.0);
    let (_, h_e) = h_pair::<T>(rates, n, variant)?;
    let p = dual_bernoulli::<T>(rates, n, variant)?;
    let null_res = h_e.matvec(&p.vector)?.norm();
    Ok(CheckReport::new("dual_equilibrium", n, *rates, drive_rel.max(null_res), tol)
        .mode(ScalarMode::of::<T>())
        .variant(variant)
        .detail_f64("drive", drive)
        .detail_f64("null_residual", null_res))
}

/// `G·G′ − c·𝟙` after the least-squares fit of `c`.
pub fn check_inverse(rates: &BoundaryRates, n: usize, variant: YVariant, tol: f64) -> Result<CheckReport> {
    let g: DenseOperator = contract(&build_g(rates, n, variant)?)?;
    let gp: DenseOperator = contract(&build_g_prime(rates, n, variant)?)?;
    let product = g.matmul(&gp)?;
    let (c, residual) = fit_scalar(&product, &DenseOperator::identity(product.rows()))?;
    Ok(CheckReport::new("inverse", n, *rates, residual, tol)
        .variant(variant)
        .detail_f64("scalar", c)
        .detail_f64("condition_g", g.condition_number()))
}

/// Raw closure residual; the scalar-fitted residual goes in the details.
pub fn check_closure(
    a: &BoundaryRates,
    b: &BoundaryRates,
    c: &BoundaryRates,
    n: usize,
    variant: YVariant,
    tol: f64,
) -> Result<CheckReport> {
    let res = closure_check(a, b, c, n, variant)?;
    let mut report = CheckReport::new("closure", n, *a, res.raw, tol)
        .variant(variant)
        .direction(Direction::Composed)
        .detail_f64("raw", res.raw)
        .detail_f64("fitted", res.fitted)
        .detail_f64("scalar", res.scalar);
    report.rates_b = Some(*b);
    report.rates_c = Some(*c);
    Ok(report)
}

fn sort_spectrum(v: &mut [Complex<f64>]) {
    v.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
}

/// Greedy nearest-neighbour matching of two sorted spectra; returns the
/// largest matched distance.
pub fn spectral_distance(a: &[Complex<f64>], b: &[Complex<f64>]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for x in a {
        let (j, d) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, y)| (j, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .expect("equal lengths");
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}

/// Eigenvalue multisets of `H_NE` and `H_E` agree.
pub fn check_spectra(rates: &BoundaryRates, n: usize, variant: YVariant, tol: f64) -> Result<CheckReport> {
    if n > 6 {
        return Err(Error::DimensionOverflow { requested: n, cap: 6 });
    }
    let (h_ne, h_e) = h_pair::<f64>(rates, n, variant)?;
    let mut ev_ne = h_ne.eigenvalues()?;
    let mut ev_e = h_e.eigenvalues()?;
    sort_spectrum(&mut ev_ne);
    sort_spectrum(&mut ev_e);
    let residual = spectral_distance(&ev_ne, &ev_e);
    let g: DenseOperator = contract(&build_g(rates, n, variant)?)?;
    let max_re = ev_ne.iter().chain(&ev_e).map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    let min_abs = |v: &[Complex<f64>]| v.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
    Ok(CheckReport::new("spectra", n, *rates, residual, tol)
        .variant(variant)
        .detail_f64("condition_g", g.condition_number())
        .detail_f64("max_real_part", max_re)
        .detail_f64("smallest_abs_ne", min_abs(&ev_ne))
        .detail_f64("smallest_abs_e", min_abs(&ev_e)))
}

/// Largest relative deviation between dual and direct correlators over
/// all single-site and adjacent-pair specs, per insertion convention.
pub fn correlator_deviations(rates: &BoundaryRates, n: usize, variant: YVariant) -> Result<Vec<(XConvention, f64)>> {
    let specs = standard_specs(rates, n)?;
    let direct: Vec<f64> = specs.iter().map(correlate_direct).collect::<Result<_>>()?;
    XConvention::ALL
        .iter()
        .map(|&conv| {
            let mut worst: f64 = 0.0;
            for (spec, d) in specs.iter().zip(&direct) {
                let dual = correlate_dual_with::<f64>(spec, conv, variant)?;
                worst = worst.max((dual - d).abs() / d.abs().max(1.0));
            }
            Ok((conv, worst))
        })
        .collect()
}

/// Passes when at least one convention matches; the matching conventions
/// are recorded.
pub fn check_correlators(rates: &BoundaryRates, n: usize, variant: YVariant, tol: f64) -> Result<CheckReport> {
    let devs = correlator_deviations(rates, n, variant)?;
    let passing: Vec<&str> = devs.iter().filter(|(_, d)| *d <= tol).map(|(c, _)| c.name()).collect();
    let best = devs.iter().map(|(_, d)| *d).fold(f64::INFINITY, f64::min);
    let mut report = CheckReport::new("correlators", n, *rates, best, tol).variant(variant);
    for (c, d) in &devs {
        report = report.detail_f64(c.name(), *d);
    }
    Ok(report.detail("passing_conventions", if passing.is_empty() { "none".to_string() } else { passing.join("+") }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn rates(a: f64, b: f64, g: f64, d: f64) -> BoundaryRates {
        BoundaryRates::new(a, b, g, d).unwrap()
    }

    const DIRS: [Direction; 2] = [Direction::NeToE, Direction::EToNe];
    const VARIANTS: [YVariant; 2] = [YVariant::YR, YVariant::YL];

    #[test]
    fn generator_checks() {
        let r = rates(0.7, 2.1, 1.3, 0.4);
        for n in 1..=4 {
            assert!(check_generator::<f64>(&ProcessSpec::non_equilibrium(n, r), 1e-13).unwrap().passed);
            assert!(check_generator::<Rational>(&ProcessSpec::dual(n, r, YVariant::YL), 0.0).unwrap().passed);
        }
    }

    #[test]
    fn rep_algebra_holds_exactly() {
        let r = rates(2.0, 1.0, 0.5, 1.0);
        for negate in [false, true] {
            let report = check_rep_algebra::<Rational>(&r, 3, negate, 0.0).unwrap();
            assert_eq!(report.residual, 0.0, "{report:?}");
        }
        let report = check_rep_algebra::<f64>(&rates(0.7, 2.1, 1.3, 0.4), 5, false, 1e-12).unwrap();
        assert!(report.passed, "{report:?}");
    }

    #[test]
    fn hand_telescoped_left_relation() {
        // αE − γD = E at (1,1,0,0); its column sums are 1 on the interior
        let r = rates(1.0, 1.0, 0.0, 0.0);
        let rep = build_rep::<Rational>(&r, AuxWindow::for_mps(4), false).unwrap();
        let sums = rep.e.column_sums();
        for j in rep.window.interior(1) {
            assert_eq!(sums[j], Rational::of_i64(1));
        }
    }

    #[test]
    fn exchange_relations_exact() {
        let r = rates(2.0, 1.0, 0.5, 1.0);
        for dir in DIRS {
            for v in VARIANTS {
                let bulk = check_bulk_exchange::<Rational>(&r, 3, dir, v, 0.0).unwrap();
                assert_eq!(bulk.residual, 0.0, "{bulk:?}");
                let bnd = check_boundary_exchange::<Rational>(&r, 3, dir, v, 0.0).unwrap();
                assert_eq!(bnd.residual, 0.0, "{bnd:?}");
            }
        }
    }

    #[test]
    fn intertwining_both_directions() {
        let r = rates(0.7, 2.1, 1.3, 0.4);
        for dir in DIRS {
            for v in VARIANTS {
                for n in 2..=5 {
                    let report = check_intertwining::<f64>(&r, n, dir, v, 1e-9).unwrap();
                    assert!(report.passed, "{report:?}");
                }
            }
        }
    }

    #[test]
    fn equilibrium_input_is_an_error() {
        let r = rates(1.0, 1.0, 1.0, 1.0);
        assert_eq!(check_intertwining::<f64>(&r, 2, Direction::NeToE, YVariant::YR, 1e-9).unwrap_err(), Error::EquilibriumRates);
        assert_eq!(check_bulk_exchange::<f64>(&r, 2, Direction::NeToE, YVariant::YR, 1e-12).unwrap_err(), Error::EquilibriumRates);
    }

    #[test]
    fn spectra_and_steady_states() {
        let r = rates(2.0, 1.0, 0.5, 1.0);
        for n in 1..=4 {
            let report = check_spectra(&r, n, YVariant::YR, 1e-8).unwrap();
            assert!(report.passed, "{report:?}");
            assert!(report.details["max_real_part"].parse::<f64>().unwrap() <= 1e-10);
            assert!(check_steady_state(&r, n, YVariant::YL, 1e-9).unwrap().passed);
        }
    }

    #[test]
    fn spectral_distance_matching() {
        let a = [Complex::new(0.0, 0.0), Complex::new(-1.0, 0.5), Complex::new(-1.0, -0.5)];
        let b = [Complex::new(-1.0, -0.5), Complex::new(0.0, 1e-12), Complex::new(-1.0, 0.5)];
        assert!(spectral_distance(&a, &b) < 1e-11);
        assert_eq!(spectral_distance(&a, &b[..2]), f64::INFINITY);
    }

    #[test]
    fn correlators_pick_one_convention() {
        let report = check_correlators(&rates(0.7, 2.1, 1.3, 0.4), 4, YVariant::YR, 1e-8).unwrap();
        assert!(report.passed);
        assert_eq!(report.details["passing_conventions"], "x_times_yinv");
    }

    #[test]
    fn errored_reports_fail() {
        let r = rates(1.0, 1.0, 1.0, 1.0);
        let report = CheckReport::errored("inverse", 2, r, 1e-10, &Error::EquilibriumRates);
        assert!(!report.passed && report.residual.is_nan() && report.error.is_some());
    }
}
