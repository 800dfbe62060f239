//! Fitting sampled α(t) to a sum of complex exponentials.
//!
//! A matrix-pencil estimate of the rates seeds a damped Gauss-Newton
//! (Levenberg-Marquardt) refinement of all weights and rates. The complex
//! residual is split into real and imaginary parts so the refinement is an
//! ordinary real least-squares problem.

use alloc::format;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use num_traits::Float;

use crate::bath::{reconstruct_spectral_density, AlphaGrid};
use crate::model::{ExpTerm, ExponentialBath, PhysicalContext, SpectralDensity};
use crate::{Error, Result};

/// Decay rates are projected onto Re Ω ≤ −ε.
pub const DECAY_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    pub max_iterations: usize,
    /// Stop once the unweighted rms residual reaches this value.
    pub target_rms: Option<f64>,
    /// Force (`Some(true)`) or forbid conjugate-paired rates; `None` pairs
    /// them when the sample at t = 0 is real.
    pub conjugate_pairs: Option<bool>,
    /// Starting rates (its weights are ignored); skips the matrix pencil.
    pub initial: Option<ExponentialBath>,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            target_rms: None,
            conjugate_pairs: None,
            initial: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralCheck {
    pub max_rel_err: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub bath: ExponentialBath,
    /// sqrt(mean |α_fit − α|²) over the samples.
    pub rms_residual: f64,
    pub max_residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Weighted cost after each accepted step, starting with the initial guess.
    pub cost_history: Vec<f64>,
    pub spectral_check: Option<SpectralCheck>,
}

/// How the real parameter vector maps onto terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Block {
    /// Ω, p: 4 parameters.
    Free,
    /// Ω shared with Ω*, weights p₁ and p₂: 6 parameters.
    Pair,
    /// Real Ω, complex p: 3 parameters.
    Real,
}

impl Block {
    fn width(self) -> usize {
        match self {
            Block::Free => 4,
            Block::Pair => 6,
            Block::Real => 3,
        }
    }
}

struct Model {
    blocks: Vec<Block>,
}

impl Model {
    fn terms(&self, x: &[f64]) -> Vec<ExpTerm> {
        let mut out = Vec::new();
        let mut i = 0;
        for b in &self.blocks {
            match b {
                Block::Free => out.push(ExpTerm::new(c(x[i + 2], x[i + 3]), c(x[i], x[i + 1]))),
                Block::Pair => {
                    let om = c(x[i], x[i + 1]);
                    out.push(ExpTerm::new(c(x[i + 2], x[i + 3]), om));
                    out.push(ExpTerm::new(c(x[i + 4], x[i + 5]), om.conj()));
                }
                Block::Real => out.push(ExpTerm::new(c(x[i + 1], x[i + 2]), c(x[i], 0.0))),
            }
            i += b.width();
        }
        out
    }

    fn project(&self, x: &mut [f64]) {
        let mut i = 0;
        for b in &self.blocks {
            x[i] = x[i].min(-DECAY_FLOOR);
            i += b.width();
        }
    }

    /// Weighted residuals (re, im interleaved) and, optionally, the Jacobian.
    fn evaluate(
        &self,
        x: &[f64],
        t: &[f64],
        y: &[Complex64],
        sw: &[f64],
        jac: Option<&mut DMatrix<f64>>,
    ) -> DVector<f64> {
        let terms = self.terms(x);
        let mut r = DVector::zeros(2 * t.len());
        for (i, &ti) in t.iter().enumerate() {
            let v: Complex64 = terms.iter().map(|e| e.p * (e.omega * ti).exp()).sum();
            let d = (v - y[i]) * sw[i];
            r[2 * i] = d.re;
            r[2 * i + 1] = d.im;
        }
        if let Some(j) = jac {
            let mut col = 0;
            let put = |j: &mut DMatrix<f64>, col: usize, i: usize, z: Complex64| {
                j[(2 * i, col)] = z.re;
                j[(2 * i + 1, col)] = z.im;
            };
            let mut k = 0;
            for b in &self.blocks {
                for (i, &ti) in t.iter().enumerate() {
                    let w = sw[i];
                    match b {
                        Block::Free | Block::Real => {
                            let e = terms[k];
                            let ex = (e.omega * ti).exp() * w;
                            let d_om = e.p * ex * ti;
                            put(j, col, i, d_om);
                            let off = if *b == Block::Free {
                                put(j, col + 1, i, d_om * Complex64::i());
                                2
                            } else {
                                1
                            };
                            put(j, col + off, i, ex);
                            put(j, col + off + 1, i, ex * Complex64::i());
                        }
                        Block::Pair => {
                            let (e1, e2) = (terms[k], terms[k + 1]);
                            let x1 = (e1.omega * ti).exp() * w;
                            let x2 = (e2.omega * ti).exp() * w;
                            let a = e1.p * x1 * ti;
                            let bb = e2.p * x2 * ti;
                            put(j, col, i, a + bb);
                            put(j, col + 1, i, (a - bb) * Complex64::i());
                            put(j, col + 2, i, x1);
                            put(j, col + 3, i, x1 * Complex64::i());
                            put(j, col + 4, i, x2);
                            put(j, col + 5, i, x2 * Complex64::i());
                        }
                    }
                }
                col += b.width();
                k += if *b == Block::Pair { 2 } else { 1 };
            }
        }
        r
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Uniform samples; non-uniform grids are linearly interpolated onto an
/// equally spaced grid with the same count and end points.
fn uniform_samples(samples: &AlphaGrid) -> (Vec<f64>, Vec<Complex64>) {
    let t = samples.times();
    let y = samples.values();
    let n = t.len();
    let h = (t[n - 1] - t[0]) / (n - 1) as f64;
    let uniform = t
        .iter()
        .enumerate()
        .all(|(i, &ti)| (ti - (t[0] + i as f64 * h)).abs() <= 1e-9 * h.max(1e-300));
    if uniform {
        return (t.to_vec(), y.to_vec());
    }
    let mut tu = Vec::with_capacity(n);
    let mut yu = Vec::with_capacity(n);
    let mut j = 0;
    for i in 0..n {
        let ti = if i == n - 1 {
            t[n - 1]
        } else {
            t[0] + i as f64 * h
        };
        while j + 2 < n && t[j + 1] < ti {
            j += 1;
        }
        let s = ((ti - t[j]) / (t[j + 1] - t[j])).clamp(0.0, 1.0);
        tu.push(ti);
        yu.push(y[j] * (1.0 - s) + y[j + 1] * s);
    }
    (tu, yu)
}

/// Rates z_j = e^{Ω_j h} from the dominant K-dimensional signal subspace.
fn matrix_pencil(y: &[Complex64], k: usize) -> Result<Vec<Complex64>> {
    let n = y.len();
    let l = n / 2;
    let rows = n - l;
    let y1 = DMatrix::from_fn(rows, l, |i, j| y[i + j]);
    let y2 = DMatrix::from_fn(rows, l, |i, j| y[i + j + 1]);
    let svd = y1.svd(true, true);
    let (u, vt) = match (svd.u, svd.v_t) {
        (Some(u), Some(vt)) => (u, vt),
        _ => return Err(Error::Fit("matrix pencil SVD failed".into())),
    };
    let s = &svd.singular_values;
    let k = k.min(s.len());
    let full_rank = s[k - 1] > s[0] * 1e-15;
    if !full_rank {
        return Err(Error::Fit(format!(
            "samples support fewer than {k} independent exponentials (singular values {:?})",
            s.iter().take(k).collect::<Vec<_>>()
        )));
    }
    let uk = u.columns(0, k).adjoint();
    let vk = vt.rows(0, k).adjoint();
    let mut a = uk * y2 * vk;
    for i in 0..k {
        let inv = 1.0 / s[i];
        for j in 0..k {
            a[(i, j)] *= inv;
        }
    }
    let schur = nalgebra::linalg::Schur::try_new(a, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Fit("matrix pencil eigenvalues did not converge".into()))?;
    let (_, tri) = schur.unpack();
    Ok((0..k).map(|i| tri[(i, i)]).collect())
}

/// Weighted linear least squares for the weights at fixed rates.
fn linear_weights(
    t: &[f64],
    y: &[Complex64],
    sw: &[f64],
    rates: &[Complex64],
) -> Result<Vec<Complex64>> {
    let a = DMatrix::from_fn(t.len(), rates.len(), |i, j| (rates[j] * t[i]).exp() * sw[i]);
    let b = DVector::from_fn(t.len(), |i, _| y[i] * sw[i]);
    let sol = a
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| Error::Fit(format!("linear weight solve failed: {e}")))?;
    Ok(sol.iter().copied().collect())
}

/// Groups rates into conjugate pairs (plus one real rate when K is odd).
fn pair_rates(rates: &[Complex64]) -> (Vec<Complex64>, Option<f64>) {
    let mut left: Vec<Complex64> = rates.to_vec();
    // most oscillatory first so near-real leftovers end up unpaired
    left.sort_by(|a, b| b.im.abs().total_cmp(&a.im.abs()));
    let mut pairs = Vec::new();
    while left.len() >= 2 {
        let a = left.remove(0);
        let (j, _) = left
            .iter()
            .enumerate()
            .map(|(j, b)| (j, (b.conj() - a).norm()))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap();
        let b = left.remove(j);
        let m = (a + b.conj()) * 0.5;
        pairs.push(if m.im >= 0.0 { m } else { m.conj() });
    }
    (pairs, left.first().map(|z| z.re))
}

fn weighted_cost(r: &DVector<f64>) -> f64 {
    r.norm_squared()
}

/// Matrix-pencil rates of the samples taken every `stride` points.
fn initial_rates(t: &[f64], y: &[Complex64], k: usize, stride: usize) -> Result<Vec<Complex64>> {
    let ys: Vec<Complex64> = y.iter().step_by(stride).copied().collect();
    let h = (t[1] - t[0]) * stride as f64;
    let z = matrix_pencil(&ys, k)?;
    let mut rates = Vec::with_capacity(k);
    for zj in &z {
        if zj.norm() == 0.0 {
            return Err(Error::Fit(
                "matrix pencil returned a zero eigenvalue".into(),
            ));
        }
        let om = zj.ln() / h;
        rates.push(c(om.re.min(-DECAY_FLOOR), om.im));
    }
    if rates
        .iter()
        .any(|r| !(r.re.is_finite() && r.im.is_finite()))
    {
        return Err(Error::Fit(format!(
            "initializer produced non-finite rates {rates:?}"
        )));
    }
    Ok(rates)
}

/// Parameter layout and starting vector for given rates, weights by linear
/// least squares.
fn starting_point(
    rates: &[Complex64],
    pairing: bool,
    t: &[f64],
    y: &[Complex64],
    sw: &[f64],
) -> Result<(Model, Vec<f64>)> {
    let (model, mut x) = if pairing {
        let (pairs, single) = pair_rates(rates);
        let mut full: Vec<Complex64> = Vec::new();
        let mut blocks = Vec::new();
        for p in &pairs {
            full.push(*p);
            full.push(p.conj());
            blocks.push(Block::Pair);
        }
        if let Some(re) = single {
            full.push(c(re.min(-DECAY_FLOOR), 0.0));
            blocks.push(Block::Real);
        }
        let w = linear_weights(t, y, sw, &full)?;
        let mut x = Vec::new();
        for (i, p) in pairs.iter().enumerate() {
            x.extend_from_slice(&[
                p.re,
                p.im,
                w[2 * i].re,
                w[2 * i].im,
                w[2 * i + 1].re,
                w[2 * i + 1].im,
            ]);
        }
        if let Some(re) = single {
            let p = w[full.len() - 1];
            x.extend_from_slice(&[re.min(-DECAY_FLOOR), p.re, p.im]);
        }
        (Model { blocks }, x)
    } else {
        let w = linear_weights(t, y, sw, rates)?;
        let mut x = Vec::new();
        for (r, p) in rates.iter().zip(&w) {
            x.extend_from_slice(&[r.re, r.im, p.re, p.im]);
        }
        (
            Model {
                blocks: alloc::vec![Block::Free; rates.len()],
            },
            x,
        )
    };
    model.project(&mut x);
    Ok((model, x))
}

struct Refined {
    x: Vec<f64>,
    cost: f64,
    history: Vec<f64>,
    iterations: usize,
    converged: bool,
}

fn rms_and_max(model: &Model, x: &[f64], t: &[f64], y: &[Complex64]) -> (f64, f64) {
    let terms = model.terms(x);
    let mut sq = 0.0;
    let mut mx = 0.0_f64;
    for (ti, yi) in t.iter().zip(y) {
        let v: Complex64 = terms.iter().map(|e| e.p * (e.omega * *ti).exp()).sum();
        let d = (v - yi).norm();
        sq += d * d;
        mx = mx.max(d);
    }
    ((sq / t.len() as f64).sqrt(), mx)
}

/// Levenberg-Marquardt with monotone acceptance and projection onto the
/// decaying half plane.
fn refine(
    model: &Model,
    mut x: Vec<f64>,
    t: &[f64],
    y: &[Complex64],
    sw: &[f64],
    options: &FitOptions,
) -> Result<Refined> {
    let npar = x.len();
    let mut jac = DMatrix::zeros(2 * t.len(), npar);
    let mut r = model.evaluate(&x, t, y, sw, Some(&mut jac));
    let mut cost = weighted_cost(&r);
    if !cost.is_finite() {
        return Err(Error::Fit(
            "initial guess gives a non-finite residual".into(),
        ));
    }
    let mut history = alloc::vec![cost];
    let mut mu = 1e-3;
    let mut iterations = 0;
    let mut converged = false;

    while iterations < options.max_iterations {
        if let Some(target) = options.target_rms {
            if rms_and_max(model, &x, t, y).0 <= target {
                converged = true;
                break;
            }
        }
        iterations += 1;
        let jtj = jac.transpose() * &jac;
        let grad = jac.transpose() * &r;
        if grad.amax() <= 1e-15 * (cost.sqrt() + 1e-300) * jac.amax() {
            converged = true;
            break;
        }
        let diag: Vec<f64> = (0..npar).map(|i| jtj[(i, i)].max(1e-300)).collect();
        let mut accepted = false;
        for _ in 0..60 {
            // [J; sqrt(μD)] δ = [−r; 0], solved by QR
            let mut aug = DMatrix::zeros(jac.nrows() + npar, npar);
            aug.rows_mut(0, jac.nrows()).copy_from(&jac);
            for i in 0..npar {
                aug[(jac.nrows() + i, i)] = (mu * diag[i]).sqrt();
            }
            let mut rhs = DVector::zeros(jac.nrows() + npar);
            rhs.rows_mut(0, jac.nrows()).copy_from(&(-&r));
            let qr = aug.qr();
            let qtb = qr.q().transpose() * rhs;
            let step = match qr.r().solve_upper_triangular(&qtb) {
                Some(s) => s,
                None => {
                    mu *= 4.0;
                    continue;
                }
            };
            let mut trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            model.project(&mut trial);
            let rt = model.evaluate(&trial, t, y, sw, None);
            let ct = weighted_cost(&rt);
            if ct.is_finite() && ct < cost {
                let rel_drop = (cost - ct) / cost;
                let rel_step = step.amax() / x.iter().fold(1e-300_f64, |m, v| m.max(v.abs()));
                x = trial;
                r = model.evaluate(&x, t, y, sw, Some(&mut jac));
                cost = ct;
                history.push(cost);
                mu = (mu / 3.0).max(1e-15);
                accepted = true;
                if rel_drop < 1e-14 || rel_step < 1e-13 {
                    converged = true;
                }
                break;
            }
            mu *= 4.0;
            if mu > 1e16 {
                break;
            }
        }
        if !accepted {
            // no descent direction left at any damping: a stationary point
            converged = true;
            break;
        }
        if converged {
            break;
        }
    }
    Ok(Refined {
        x,
        cost,
        history,
        iterations,
        converged,
    })
}

/// Fits K exponentials to the samples.
///
/// The matrix pencil is run on the full sample set and on every 2nd and 4th
/// sample (when enough remain); each start is refined and the lowest weighted
/// cost wins. An explicit `initial` bath replaces these starts.
pub fn fit_exponential_bath(
    samples: &AlphaGrid,
    k: usize,
    options: &FitOptions,
) -> Result<FitReport> {
    if k == 0 {
        return Err(Error::invalid("K must be >= 1"));
    }
    if samples.len() < 4 * k {
        return Err(Error::invalid(format!(
            "{} samples cannot support K = {k}; at least {} are needed",
            samples.len(),
            4 * k
        )));
    }
    let (t, y) = uniform_samples(samples);
    let amax = y.iter().fold(0.0_f64, |m, v| m.max(v.norm()));
    if amax == 0.0 {
        return Err(Error::Fit("all samples are zero".into()));
    }
    let sw: Vec<f64> = y
        .iter()
        .map(|v| 1.0 / v.norm().max(1e-3 * amax).sqrt())
        .collect();
    let pairing = options
        .conjugate_pairs
        .unwrap_or(t[0] == 0.0 && y[0].im.abs() <= 1e-8 * amax);

    let mut starts: Vec<Vec<Complex64>> = Vec::new();
    let mut first_error = None;
    match &options.initial {
        Some(bath) => {
            if bath.len() != k {
                return Err(Error::invalid("initial bath must have K terms"));
            }
            starts.push(bath.terms().iter().map(|e| e.omega).collect());
        }
        None => {
            for stride in [1, 2, 4] {
                if stride > 1 && t.len() / stride < 8 * k {
                    break;
                }
                match initial_rates(&t, &y, k, stride) {
                    Ok(r) => starts.push(r),
                    Err(e) => {
                        first_error.get_or_insert(e);
                    }
                }
            }
        }
    }

    let mut best: Option<(Model, Refined)> = None;
    for rates in &starts {
        let (model, x) = match starting_point(rates, pairing, &t, &y, &sw) {
            Ok(v) => v,
            Err(e) => {
                first_error.get_or_insert(e);
                continue;
            }
        };
        match refine(&model, x, &t, &y, &sw, options) {
            Ok(run) => {
                if best.as_ref().is_none_or(|(_, b)| run.cost < b.cost) {
                    best = Some((model, run));
                }
            }
            Err(e) => {
                first_error.get_or_insert(e);
            }
        }
    }
    let (model, run) = match best {
        Some(b) => b,
        None => {
            return Err(first_error.unwrap_or_else(|| Error::Fit("no usable starting point".into())))
        }
    };

    let (rms, mx) = rms_and_max(&model, &run.x, &t, &y);
    let mut converged = run.converged;
    if let Some(target) = options.target_rms {
        converged |= rms <= target;
    }
    let mut terms = model.terms(&run.x);
    if terms.iter().any(|e| e.omega.re >= 0.0) {
        return Err(Error::Fit(format!("fit left growing modes {terms:?}")));
    }
    order_terms(&mut terms, &model.blocks);
    Ok(FitReport {
        bath: ExponentialBath::new(terms)?,
        rms_residual: rms,
        max_residual: mx,
        iterations: run.iterations,
        converged,
        cost_history: run.history,
        spectral_check: None,
    })
}

/// Descending |p|, conjugate pairs kept adjacent with Im Ω > 0 first.
fn order_terms(terms: &mut Vec<ExpTerm>, blocks: &[Block]) {
    let mut groups: Vec<Vec<ExpTerm>> = Vec::new();
    let mut i = 0;
    for b in blocks {
        if *b == Block::Pair {
            let mut g = alloc::vec![terms[i], terms[i + 1]];
            g.sort_by(|a, b| b.omega.im.total_cmp(&a.omega.im));
            groups.push(g);
            i += 2;
        } else {
            groups.push(alloc::vec![terms[i]]);
            i += 1;
        }
    }
    let key = |g: &Vec<ExpTerm>| g.iter().fold(0.0_f64, |m, e| m.max(e.p.norm()));
    groups.sort_by(|a, b| key(b).total_cmp(&key(a)));
    *terms = groups.into_iter().flatten().collect();
}

/// Compares the spectral density implied by the fitted bath with `spec` on
/// `omega_grid`, relative to max |J| on the grid, and stores the result.
pub fn fit_quality_vs_spectrum(
    report: &mut FitReport,
    spec: &SpectralDensity,
    context: &PhysicalContext,
    omega_grid: &[f64],
) -> Result<SpectralCheck> {
    context.finite_beta("fit quality check")?;
    if omega_grid.is_empty() {
        return Err(Error::invalid("empty frequency grid"));
    }
    let mut scale = 0.0_f64;
    let mut worst = 0.0_f64;
    for &w in omega_grid {
        let j = spec.eval(w, Some(context))?;
        let jr = reconstruct_spectral_density(&report.bath, context, w)?;
        scale = scale.max(j.abs());
        worst = worst.max((jr - j).abs());
    }
    let max_rel_err = if scale > 0.0 {
        worst / scale
    } else if worst == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    let check = SpectralCheck { max_rel_err };
    report.spectral_check = Some(check);
    Ok(check)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::{alpha_exponential_grid, uniform_times, Provenance};
    use crate::decompose::{decompose_bath, PoleScheme};
    use proptest::prelude::*;

    fn grid<F: Fn(f64) -> Complex64>(t0: f64, t1: f64, n: usize, f: F) -> AlphaGrid {
        let t = uniform_times(t0, t1, n).unwrap();
        let v = t.iter().map(|&x| f(x)).collect();
        AlphaGrid::new(t, v, Provenance::Analytic).unwrap()
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol * b.norm().max(1.0)
    }

    #[test]
    fn single_exponential() {
        let s = grid(0.0, 5.0, 51, |t| c(2.0 * (-t).exp(), 0.0));
        let r = fit_exponential_bath(&s, 1, &FitOptions::default()).unwrap();
        let e = r.bath.terms()[0];
        assert!(close(e.p, c(2.0, 0.0), 1e-6), "{e:?}");
        assert!(close(e.omega, c(-1.0, 0.0), 1e-6), "{e:?}");
        assert!(r.converged);
    }

    #[test]
    fn damped_cosine_gives_a_conjugate_pair() {
        let s = grid(0.0, 5.0, 101, |t| c((-t).exp() * (5.0 * t).cos(), 0.0));
        let r = fit_exponential_bath(&s, 2, &FitOptions::default()).unwrap();
        let t = r.bath.terms();
        assert!(close(t[0].omega, c(-1.0, 5.0), 1e-6), "{t:?}");
        assert!(close(t[1].omega, c(-1.0, -5.0), 1e-6), "{t:?}");
        assert!(
            close(t[0].p, c(0.5, 0.0), 1e-6) && close(t[1].p, c(0.5, 0.0), 1e-6),
            "{t:?}"
        );
    }

    #[test]
    fn too_few_samples() {
        let s = grid(0.0, 1.0, 7, |t| c((-t).exp(), 0.0));
        assert!(fit_exponential_bath(&s, 2, &FitOptions::default()).is_err());
        assert!(fit_exponential_bath(&s, 0, &FitOptions::default()).is_err());
    }

    #[test]
    fn non_uniform_samples_are_resampled() {
        let t: Vec<f64> = (0..60).map(|i| 4.0 * (i as f64 / 59.0).powi(2)).collect();
        let v = t.iter().map(|&x| c((-0.5 * x).exp(), 0.0)).collect();
        let s = AlphaGrid::new(t, v, Provenance::Analytic).unwrap();
        let r = fit_exponential_bath(&s, 1, &FitOptions::default()).unwrap();
        assert!((r.bath.terms()[0].omega.re + 0.5).abs() < 1e-2);
    }

    #[test]
    fn cost_is_monotone() {
        let s = grid(0.0, 3.0, 121, |t| {
            c(
                (-t).exp() * (3.0 * t).cos() + 0.3 * (-0.2 * t).exp(),
                -0.2 * (t * 2.0).sin(),
            )
        });
        let r = fit_exponential_bath(
            &s,
            3,
            &FitOptions {
                conjugate_pairs: Some(false),
                ..Default::default()
            },
        )
        .unwrap();
        for w in r.cost_history.windows(2) {
            assert!(w[1] <= w[0]);
        }
    }

    #[test]
    fn spectral_round_trip_of_exact_family() {
        let spec = SpectralDensity::debye(1.0, 1.0).unwrap();
        let ctx = PhysicalContext::new(1.0).unwrap();
        let bath = decompose_bath(&spec, &ctx, 20, PoleScheme::Pade).unwrap();
        let mut report = FitReport {
            bath,
            rms_residual: 0.0,
            max_residual: 0.0,
            iterations: 0,
            converged: true,
            cost_history: Vec::new(),
            spectral_check: None,
        };
        let w: Vec<f64> = (1..=100).map(|i| 0.1 * i as f64).collect();
        let chk = fit_quality_vs_spectrum(&mut report, &spec, &ctx, &w).unwrap();
        assert!(chk.max_rel_err < 1e-4, "{chk:?}");
        assert_eq!(report.spectral_check, Some(chk));

        let mut zero = FitReport {
            bath: ExponentialBath::new(alloc::vec![ExpTerm::new(c(0.0, 0.0), c(-1.0, 0.0))])
                .unwrap(),
            ..report
        };
        let chk = fit_quality_vs_spectrum(&mut zero, &spec, &ctx, &w).unwrap();
        assert_eq!(chk.max_rel_err, 1.0);
        assert!(fit_quality_vs_spectrum(
            &mut zero,
            &spec,
            &PhysicalContext::zero_temperature(),
            &w
        )
        .is_err());
    }

    #[test]
    fn terms_are_ordered() {
        let bath = ExponentialBath::new(alloc::vec![
            ExpTerm::new(c(0.1, 0.0), c(-0.5, 0.0)),
            ExpTerm::new(c(1.0, 0.2), c(-1.0, -4.0)),
            ExpTerm::new(c(1.0, -0.2), c(-1.0, 4.0)),
        ])
        .unwrap();
        let s = alpha_exponential_grid(&bath, &uniform_times(0.0, 6.0, 120).unwrap()).unwrap();
        let r = fit_exponential_bath(&s, 3, &FitOptions::default()).unwrap();
        let t = r.bath.terms();
        assert!(t[0].omega.im > 0.0 && t[1].omega.im < 0.0);
        assert!(close(t[2].omega, c(-0.5, 0.0), 1e-6), "{t:?}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn refit_is_idempotent(
            p1 in 0.5f64..2.0, q1 in -0.5f64..0.5, g1 in 0.3f64..2.0, w1 in 1.0f64..6.0,
            p2 in 0.2f64..1.0, q2 in -0.5f64..0.5, g2 in 0.1f64..0.8,
        ) {
            // generic complex in-family data, no pairing
            let bath = ExponentialBath::new(alloc::vec![
                ExpTerm::new(c(p1, q1), c(-g1, w1)),
                ExpTerm::new(c(p2, q2), c(-g2, -0.7 * w1)),
            ]).unwrap();
            let s = alpha_exponential_grid(&bath, &uniform_times(0.0, 8.0, 161).unwrap()).unwrap();
            let opts = FitOptions { conjugate_pairs: Some(false), ..Default::default() };
            let first = fit_exponential_bath(&s, 2, &opts).unwrap();
            let s2 = alpha_exponential_grid(&first.bath, s.times()).unwrap();
            let second = fit_exponential_bath(&s2, 2, &opts).unwrap();
            for (a, b) in first.bath.terms().iter().zip(second.bath.terms()) {
                prop_assert!(close(a.p, b.p, 1e-8) && close(a.omega, b.omega, 1e-8), "{:?} vs {:?}", a, b);
            }
            let mut want: Vec<ExpTerm> = bath.terms().to_vec();
            want.sort_by(|a, b| b.p.norm().total_cmp(&a.p.norm()));
            for (a, b) in first.bath.terms().iter().zip(&want) {
                prop_assert!(close(a.omega, b.omega, 1e-6), "{:?} vs {:?}", a, b);
            }
        }
    }
}
