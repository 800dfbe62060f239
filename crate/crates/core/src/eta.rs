//! η coefficients of the discretized influence functional.
//!
//! Every coefficient is a double time integral of α(t′ − t″) over one cell of
//! the time grid: a rectangle for distinct intervals, a triangle on the
//! diagonal. Three independent routes are provided:
//!
//! * analytic, for exponential baths (closed-form cell integrals of e^{Ωu});
//! * generic, by adaptive double quadrature of any α evaluator;
//! * spectral oracles, integrating J(ω) against the cell's Fourier transform,
//!   in a full-line form and in a half-line form with explicit coth.
//!
//! Trotter cells are [kΔt, (k+1)Δt]. Strang cells are centred on the grid
//! points, [(k−½)Δt, (k+½)Δt], with half cells [0, Δt/2] and [t−Δt/2, t] at the
//! two ends, t = NΔt.

use alloc::vec::Vec;
use core::f64::consts::PI;
use core::time::Duration;
use num_complex::Complex64;
use num_traits::Float;

use crate::model::{DiscretePath, ExponentialBath, PhysicalContext, SpectralDensity};
use crate::quadrature::{self, QuadratureConfig, QuadratureResult, Region, Tone};
use crate::{Error, Result};

/// Below this |ΩΔt| the cell functions use their Taylor series.
const SERIES_THRESHOLD: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Splitting {
    Trotter,
    Strang,
}

/// The Strang boundary coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrangEdge {
    /// Last half cell against the first.
    N0,
    /// A half cell against itself (η₀₀ = η_NN).
    SelfEdge,
    /// Interior cell k against the first half cell, 0 < k < N.
    K0(usize),
    /// Last half cell against interior cell k, 0 < k < N.
    Nk(usize),
}

/// Which coefficient to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EtaSelector {
    /// Stationary interior coefficient η(Δk), Δk ≥ 1.
    Interior(usize),
    /// Diagonal coefficient η_kk of a full cell.
    SelfTerm,
    /// Trotter cells k and k′ (k ≥ k′) at their actual positions.
    Pair {
        k: usize,
        kp: usize,
    },
    Strang(StrangEdge),
}

/// A grid cell in the (t′, t″) plane.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Cell {
    /// t′ ∈ [t1, t1 + a], t″ ∈ [t2, t2 + b], t1 ≥ t2 + b.
    Rect { t1: f64, a: f64, t2: f64, b: f64 },
    /// t0 ≤ t″ ≤ t′ ≤ t0 + h.
    Tri { t0: f64, h: f64 },
}

impl Cell {
    fn rect(t1: f64, a: f64, t2: f64, b: f64) -> Self {
        Cell::Rect { t1, a, t2, b }
    }

    /// Distance between the cell centres along t′ − t″.
    fn offset(&self) -> f64 {
        match *self {
            Cell::Rect { t1, a, t2, b } => (t1 + 0.5 * a) - (t2 + 0.5 * b),
            Cell::Tri { .. } => 0.0,
        }
    }
}

fn check_dt(dt: f64) -> Result<()> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::invalid("dt must be finite and > 0"));
    }
    Ok(())
}

fn check_edge(edge: StrangEdge, n_steps: usize) -> Result<()> {
    if n_steps == 0 {
        return Err(Error::invalid("n_steps must be >= 1"));
    }
    match edge {
        StrangEdge::K0(k) | StrangEdge::Nk(k) if k == 0 || k >= n_steps => Err(Error::OutOfRange {
            index: k,
            min: 1,
            max: n_steps.saturating_sub(1),
        }),
        _ => Ok(()),
    }
}

fn cell_for(dt: f64, n_steps: usize, selector: EtaSelector) -> Result<Cell> {
    check_dt(dt)?;
    let h = 0.5 * dt;
    let t = n_steps as f64 * dt;
    Ok(match selector {
        EtaSelector::Interior(dk) => {
            if dk == 0 {
                return Err(Error::invalid("interior coefficients need dk >= 1"));
            }
            Cell::rect(dk as f64 * dt, dt, 0.0, dt)
        }
        EtaSelector::SelfTerm => Cell::Tri { t0: 0.0, h: dt },
        EtaSelector::Pair { k, kp } => {
            if kp > k {
                return Err(Error::invalid("pair coefficients need k >= k'"));
            }
            if k == kp {
                Cell::Tri {
                    t0: k as f64 * dt,
                    h: dt,
                }
            } else {
                Cell::rect(k as f64 * dt, dt, kp as f64 * dt, dt)
            }
        }
        EtaSelector::Strang(edge) => {
            check_edge(edge, n_steps)?;
            match edge {
                StrangEdge::N0 => Cell::rect(t - h, h, 0.0, h),
                StrangEdge::SelfEdge => Cell::Tri { t0: 0.0, h },
                StrangEdge::K0(k) => Cell::rect((k as f64 - 0.5) * dt, dt, 0.0, h),
                StrangEdge::Nk(k) => Cell::rect(t - h, h, (k as f64 - 0.5) * dt, dt),
            }
        }
    })
}

/// 2 sinh(x/2)/x.
fn shc(x: Complex64) -> Complex64 {
    if x.norm() < SERIES_THRESHOLD {
        let x2 = x * x;
        // Σ x^{2k}/(4^k (2k+1)!), k = 0..5
        1.0 + x2
            * (1.0 / 24.0
                + x2 * (1.0 / 1920.0
                    + x2 * (1.0 / 322_560.0
                        + x2 * (1.0 / 92_897_280.0 + x2 * (1.0 / 40_874_803_200.0)))))
    } else {
        2.0 * (0.5 * x).sinh() / x
    }
}

/// e^x − 1 without cancellation for small |x|.
fn expm1c(x: Complex64) -> Complex64 {
    let (s, c) = x.im.sin_cos();
    let half = (0.5 * x.im).sin();
    Complex64::new(x.re.exp_m1() * c - 2.0 * half * half, x.re.exp() * s)
}

/// (e^x − 1 − x)/x².
fn g0(x: Complex64) -> Complex64 {
    if x.norm() < SERIES_THRESHOLD {
        // Σ x^n/(n+2)!, n = 0..5
        0.5 + x
            * (1.0 / 6.0
                + x * (1.0 / 24.0 + x * (1.0 / 120.0 + x * (1.0 / 720.0 + x * (1.0 / 5040.0)))))
    } else {
        (expm1c(x) - x) / (x * x)
    }
}

/// ∬_cell e^{Ω(t′−t″)}.
fn cell_exponential(cell: Cell, omega: Complex64) -> Complex64 {
    match cell {
        Cell::Rect { a, b, .. } => {
            let d = cell.offset();
            if (omega.re * a.max(b)).abs() < 50.0 {
                (omega * d).exp() * shc(omega * a) * shc(omega * b) * (a * b)
            } else {
                // fast decay: sinh would overflow, so expand into terms that each decay
                let e = |s: f64| (omega * s).exp();
                let (ha, hb) = (0.5 * a, 0.5 * b);
                (e(d + ha + hb) - e(d + ha - hb) - e(d - ha + hb) + e(d - ha - hb))
                    / (omega * omega)
            }
        }
        Cell::Tri { h, .. } => g0(omega * h) * (h * h),
    }
}

fn analytic(bath: &ExponentialBath, cell: Cell) -> Complex64 {
    crate::bath::compensated_sum(
        bath.terms()
            .iter()
            .map(|t| t.p * cell_exponential(cell, t.omega)),
    )
}

/// Trotter coefficient from an exponential bath: Δk ≥ 1 gives the interior
/// η(Δk) = 4Σ p/Ω² sinh²(ΩΔt/2) e^{ΩΔkΔt}; Δk = 0 gives the self term
/// 2Σ p/Ω² (sinh(ΩΔt/2)e^{ΩΔt/2} − ΩΔt/2).
pub fn eta_trotter_analytic(bath: &ExponentialBath, dt: f64, dk: usize) -> Result<Complex64> {
    let sel = if dk == 0 {
        EtaSelector::SelfTerm
    } else {
        EtaSelector::Interior(dk)
    };
    Ok(analytic(bath, cell_for(dt, 0, sel)?))
}

/// Strang boundary coefficient from an exponential bath.
pub fn eta_strang_analytic(
    bath: &ExponentialBath,
    dt: f64,
    n_steps: usize,
    which: StrangEdge,
) -> Result<Complex64> {
    Ok(analytic(
        bath,
        cell_for(dt, n_steps, EtaSelector::Strang(which))?,
    ))
}

/// Any coefficient from an exponential bath.
pub fn eta_analytic(
    bath: &ExponentialBath,
    dt: f64,
    n_steps: usize,
    selector: EtaSelector,
) -> Result<Complex64> {
    Ok(analytic(bath, cell_for(dt, n_steps, selector)?))
}

/// The coefficient as a double integral of α(t′ − t″) over its cell, by
/// iterated adaptive quadrature. α is only sampled at non-negative arguments.
pub fn eta_generic_quadrature<A: Fn(f64) -> Complex64>(
    alpha: &A,
    dt: f64,
    n_steps: usize,
    selector: EtaSelector,
    quad: &QuadratureConfig,
) -> Result<Complex64> {
    let cell = cell_for(dt, n_steps, selector)?;
    let g = |x: f64, y: f64| alpha((x - y).max(0.0));
    let region = match cell {
        Cell::Rect { t1, a, t2, b } => Region::Rectangle {
            a1: t1,
            b1: t1 + a,
            a2: t2,
            b2: t2 + b,
        },
        Cell::Tri { t0, h } => Region::Triangle { a: t0, b: t0 + h },
    };
    let r = quadrature::integrate_double(&g, region, quad);
    if !r.converged {
        return Err(Error::QuadratureFailed {
            what: "eta double integral",
            value: r.value.norm(),
            error: r.error_estimate,
        });
    }
    Ok(r.value)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleVariant {
    /// Full-line integral of J(ω)·2/(1 − e^{−βω}) against the cell transform.
    Makri,
    /// Half-line integral with explicit coth(βω/2); interior and self only.
    Vagov,
}

/// c · ω^{−p} · e^{−iωτ}: one term of a cell transform away from ω = 0.
#[derive(Debug, Clone, Copy)]
struct Wave {
    c: Complex64,
    tau: f64,
    p: i32,
}

/// K(ω) = ∬_cell e^{−iω(t′−t″)}, evaluated stably for all ω.
fn cell_transform(cell: Cell, w: f64) -> Complex64 {
    match cell {
        Cell::Rect { a, b, .. } => {
            let sinc = |x: f64| if x == 0.0 { 1.0 } else { x.sin() / x };
            Complex64::new(0.0, -w * cell.offset()).exp()
                * (a * b * sinc(0.5 * w * a) * sinc(0.5 * w * b))
        }
        Cell::Tri { h, .. } => g0(Complex64::new(0.0, -w * h)) * (h * h),
    }
}

/// The same transform as a sum of pure tones, valid for ω ≠ 0.
fn cell_waves(cell: Cell) -> Vec<Wave> {
    let one = Complex64::new(1.0, 0.0);
    match cell {
        Cell::Rect { a, b, .. } => {
            // (4/ω²) sin(ωa/2) sin(ωb/2) e^{−iωd}
            let d = cell.offset();
            let (dm, dp) = (0.5 * (a - b), 0.5 * (a + b));
            // offsets that cancel up to rounding are exactly zero frequencies
            let snap = |tau: f64| {
                if tau.abs() <= 1e-12 * (d.abs() + dp) {
                    0.0
                } else {
                    tau
                }
            };
            let wave = |c: Complex64, tau: f64| Wave {
                c,
                tau: snap(tau),
                p: 2,
            };
            alloc::vec![
                wave(one, d - dm),
                wave(one, d + dm),
                wave(-one, d - dp),
                wave(-one, d + dp)
            ]
        }
        Cell::Tri { h, .. } => {
            // (1 − e^{−iωh})/ω² − ih/ω
            alloc::vec![
                Wave {
                    c: one,
                    tau: 0.0,
                    p: 2
                },
                Wave {
                    c: -one,
                    tau: h,
                    p: 2
                },
                Wave {
                    c: Complex64::new(0.0, -h),
                    tau: 0.0,
                    p: 1
                },
            ]
        }
    }
}

/// Σ over powers p of ∫_a^∞ env(x) x^{−p} Σ tones.
fn wave_tails<E: Fn(f64) -> f64>(
    envelope: &E,
    waves: &[Wave],
    sign: f64,
    conj: bool,
    a: f64,
    cfg: &QuadratureConfig,
    out: &mut QuadratureResult,
) -> Result<()> {
    for p in [1, 2] {
        let tones: Vec<Tone> = waves
            .iter()
            .filter(|w| w.p == p)
            .map(|w| Tone {
                weight: if conj { w.c.conj() } else { w.c } * if p % 2 == 1 { sign } else { 1.0 },
                tau: if conj { -w.tau } else { w.tau },
            })
            .collect();
        if tones.is_empty() {
            continue;
        }
        let env = |x: f64| envelope(x) / x.powi(p);
        let r = quadrature::integrate_tone_tail(&env, &tones, a, cfg)?;
        out.value += r.value;
        out.error_estimate += r.error_estimate;
        out.evaluations += r.evaluations;
        out.converged &= r.converged;
    }
    Ok(())
}

/// The coefficient from the spectral density by an improper frequency
/// integral. Strang boundary coefficients are available in the Makri form only.
pub fn eta_spectral_oracle(
    spec: &SpectralDensity,
    context: &PhysicalContext,
    dt: f64,
    n_steps: usize,
    selector: EtaSelector,
    variant: OracleVariant,
    quad: &QuadratureConfig,
) -> Result<Complex64> {
    spec.validate()?;
    let cell = cell_for(dt, n_steps, selector)?;
    if variant == OracleVariant::Vagov && matches!(selector, EtaSelector::Strang(_)) {
        return Err(Error::Unsupported(
            "half-line oracle for Strang boundary coefficients",
        ));
    }
    let beta = context.beta_hbar();
    let w_max = spec.tail_start();
    let finite_cfg = quad.with_period_hint(None);
    let mut total = QuadratureResult {
        value: Complex64::new(0.0, 0.0),
        error_estimate: 0.0,
        evaluations: 0,
        converged: true,
    };
    let absorb = |total: &mut QuadratureResult, r: QuadratureResult| {
        total.value += r.value;
        total.error_estimate += r.error_estimate;
        total.evaluations += r.evaluations;
        total.converged &= r.converged;
    };
    let waves = cell_waves(cell);

    match variant {
        OracleVariant::Makri => {
            // (1/2π) ∫ J(ω) (1 + coth(βω/2)) K(ω) dω over the full line
            let jw = |w: f64| spec.density(w, beta) * context.bose_weight(w) / (2.0 * PI);
            let f = |w: f64| cell_transform(cell, w) * jw(w);
            absorb(
                &mut total,
                quadrature::integrate_finite(&f, -w_max, 0.0, &finite_cfg),
            );
            absorb(
                &mut total,
                quadrature::integrate_finite(&f, 0.0, w_max, &finite_cfg),
            );
            let tail_cfg =
                quad.with_abs_tol(quad.abs_tol.max(0.1 * quad.rel_tol * total.value.norm()));
            wave_tails(&jw, &waves, 1.0, false, w_max, &tail_cfg, &mut total)?;
            // ω → −x maps e^{−iωτ} to e^{ixτ} and ω^{−p} to (−1)^p x^{−p}
            let jw_neg = |x: f64| jw(-x);
            let mirrored: Vec<Wave> = waves.iter().map(|w| Wave { tau: -w.tau, ..*w }).collect();
            wave_tails(
                &jw_neg, &mirrored, -1.0, false, w_max, &tail_cfg, &mut total,
            )?;
        }
        OracleVariant::Vagov => {
            // (1/π) ∫₀^∞ J(ω) [coth(βω/2) Re K(ω) + i Im K(ω)] dω, written out
            let f = |w: f64| -> Complex64 {
                let j = spec.density(w, beta) / PI;
                if j == 0.0 {
                    return Complex64::new(0.0, 0.0);
                }
                let coth = context.coth_half(w);
                let half = (0.5 * w * dt).sin();
                let one_minus_cos = 2.0 * half * half;
                match cell {
                    Cell::Rect { .. } => {
                        let (s, c) = (w * cell.offset()).sin_cos();
                        Complex64::new(coth * c, -s) * (2.0 * j * one_minus_cos / (w * w))
                    }
                    Cell::Tri { .. } => {
                        let y = w * dt;
                        Complex64::new(
                            one_minus_cos * coth / (w * w),
                            sin_minus_x_over_x2(y) * dt * dt,
                        ) * j
                    }
                }
            };
            absorb(
                &mut total,
                quadrature::integrate_finite(&f, 0.0, w_max, &finite_cfg),
            );
            let tail_cfg =
                quad.with_abs_tol(quad.abs_tol.max(0.1 * quad.rel_tol * total.value.norm()));
            // coth Re K = coth (K + K̄)/2 and i Im K = (K − K̄)/2
            let j_coth = |x: f64| 0.5 * spec.density(x, beta) * context.coth_half(x) / PI;
            let j_half = |x: f64| 0.5 * spec.density(x, beta) / PI;
            wave_tails(&j_coth, &waves, 1.0, false, w_max, &tail_cfg, &mut total)?;
            wave_tails(&j_coth, &waves, 1.0, true, w_max, &tail_cfg, &mut total)?;
            wave_tails(&j_half, &waves, 1.0, false, w_max, &tail_cfg, &mut total)?;
            let negated: Vec<Wave> = waves.iter().map(|w| Wave { c: -w.c, ..*w }).collect();
            wave_tails(&j_half, &negated, 1.0, true, w_max, &tail_cfg, &mut total)?;
        }
    }
    if !total.converged {
        return Err(Error::QuadratureFailed {
            what: "spectral eta oracle",
            value: total.value.norm(),
            error: total.error_estimate,
        });
    }
    Ok(total.value)
}

/// (sin y − y)/y², with its series near zero.
fn sin_minus_x_over_x2(y: f64) -> f64 {
    if y.abs() < 0.1 {
        let y2 = y * y;
        -y * (1.0 / 6.0
            - y2 * (1.0 / 120.0
                - y2 * (1.0 / 5040.0 - y2 * (1.0 / 362_880.0 - y2 * (1.0 / 39_916_800.0)))))
    } else {
        (y.sin() - y) / (y * y)
    }
}

/// The counter term iΔtλ/π added to diagonal coefficients in QUAPI mode.
pub fn quapi_counter_term(lambda: f64, dt: f64) -> Complex64 {
    Complex64::new(0.0, dt * lambda / PI)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrangEdges {
    /// η₀₀ = η_NN.
    pub eta_00: Complex64,
    pub eta_n0: Complex64,
    /// η_k0 for k = 1..N−1.
    pub eta_k0: Vec<Complex64>,
    /// η_Nk for k = 1..N−1.
    pub eta_nk: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EtaTable {
    pub splitting: Splitting,
    pub dt: f64,
    pub n_steps: usize,
    /// η(Δk) for Δk = 1..N, stored at index Δk − 1.
    pub interior: Vec<Complex64>,
    /// η_kk without the counter term.
    pub self_coeff: Complex64,
    pub edges: Option<StrangEdges>,
    /// λ used for the counter term, when QUAPI mode is on.
    pub quapi_lambda: Option<f64>,
    pub quapi_term: Complex64,
}

impl EtaTable {
    pub fn interior(&self, dk: usize) -> Result<Complex64> {
        if dk == 0 || dk > self.interior.len() {
            return Err(Error::OutOfRange {
                index: dk,
                min: 1,
                max: self.interior.len(),
            });
        }
        Ok(self.interior[dk - 1])
    }

    /// Self coefficient including the counter term.
    pub fn self_with_counter_term(&self) -> Complex64 {
        self.self_coeff + self.quapi_term
    }

    /// True when every coefficient (not the metadata) matches.
    pub fn same_coefficients(&self, other: &EtaTable) -> bool {
        self.splitting == other.splitting
            && self.dt == other.dt
            && self.n_steps == other.n_steps
            && self.interior == other.interior
            && self.self_coeff == other.self_coeff
            && self.edges == other.edges
            && self.quapi_term == other.quapi_term
    }

    /// η_{kk′} for path indices 0 ≤ k′ ≤ k ≤ N (without the counter term).
    pub fn coefficient(&self, k: usize, kp: usize) -> Result<Complex64> {
        if kp > k {
            return Err(Error::invalid("coefficient needs k >= k'"));
        }
        let n = self.n_steps;
        if k > n {
            return Err(Error::OutOfRange {
                index: k,
                min: 0,
                max: n,
            });
        }
        match (&self.edges, self.splitting) {
            (Some(e), Splitting::Strang) => Ok(if k == kp {
                if k == 0 || k == n {
                    e.eta_00
                } else {
                    self.self_coeff
                }
            } else if kp == 0 && k == n {
                e.eta_n0
            } else if kp == 0 {
                e.eta_k0[k - 1]
            } else if k == n {
                e.eta_nk[kp - 1]
            } else {
                self.interior[k - kp - 1]
            }),
            _ => Ok(if k == kp {
                self.self_coeff
            } else {
                self.interior[k - kp - 1]
            }),
        }
    }
}

/// All coefficients of one splitting from an exponential bath.
pub fn build_eta_table(
    bath: &ExponentialBath,
    dt: f64,
    n_steps: usize,
    splitting: Splitting,
    quapi_lambda: Option<f64>,
) -> Result<EtaTable> {
    check_dt(dt)?;
    if n_steps == 0 {
        return Err(Error::invalid("n_steps must be >= 1"));
    }
    if let Some(l) = quapi_lambda {
        if !l.is_finite() {
            return Err(Error::NonFinite("quapi lambda"));
        }
    }
    let interior = (1..=n_steps)
        .map(|dk| eta_trotter_analytic(bath, dt, dk))
        .collect::<Result<Vec<_>>>()?;
    let self_coeff = eta_trotter_analytic(bath, dt, 0)?;
    let edges = match splitting {
        Splitting::Trotter => None,
        Splitting::Strang => Some(StrangEdges {
            eta_00: eta_strang_analytic(bath, dt, n_steps, StrangEdge::SelfEdge)?,
            eta_n0: eta_strang_analytic(bath, dt, n_steps, StrangEdge::N0)?,
            eta_k0: (1..n_steps)
                .map(|k| eta_strang_analytic(bath, dt, n_steps, StrangEdge::K0(k)))
                .collect::<Result<Vec<_>>>()?,
            eta_nk: (1..n_steps)
                .map(|k| eta_strang_analytic(bath, dt, n_steps, StrangEdge::Nk(k)))
                .collect::<Result<Vec<_>>>()?,
        }),
    };
    Ok(EtaTable {
        splitting,
        dt,
        n_steps,
        interior,
        self_coeff,
        edges,
        quapi_lambda,
        quapi_term: quapi_lambda.map_or(Complex64::new(0.0, 0.0), |l| quapi_counter_term(l, dt)),
    })
}

/// Φ = −Σ_k Σ_{k′≤k} (s⁺_k − s⁻_k)(η_{kk′} s⁺_{k′} − η*_{kk′} s⁻_{k′}),
/// plus −(iΔtλ/π) Σ_k ((s⁺_k)² − (s⁻_k)²) in QUAPI mode.
///
/// Trotter tables accept paths of up to N + 1 points; Strang tables need
/// exactly N + 1 so that the boundary cells line up with the path ends.
pub fn influence_phase(table: &EtaTable, path: &DiscretePath) -> Result<Complex64> {
    let len = path.len();
    let needed = table.n_steps + 1;
    let ok = match table.splitting {
        Splitting::Trotter => len <= needed,
        Splitting::Strang => len == needed,
    };
    if !ok {
        return Err(Error::LengthMismatch {
            expected: needed,
            got: len,
        });
    }
    let (sp, sm) = (path.s_plus(), path.s_minus());
    let mut phi = Complex64::new(0.0, 0.0);
    for k in 0..len {
        let diff = sp[k] - sm[k];
        if diff == 0.0 {
            continue;
        }
        let mut inner = Complex64::new(0.0, 0.0);
        for kp in 0..=k {
            let eta = table.coefficient(k, kp)?;
            inner += eta * sp[kp] - eta.conj() * sm[kp];
        }
        phi -= inner * diff;
    }
    if table.quapi_term != Complex64::new(0.0, 0.0) {
        let s: f64 = sp.iter().zip(sm).map(|(a, b)| a * a - b * b).sum();
        phi -= table.quapi_term * s;
    }
    Ok(phi)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkReport {
    /// max_Δk |η_analytic − η_makri| / |Re η_analytic(0)| over converged points.
    pub max_rel_err_vs_makri: f64,
    pub max_rel_err_vs_vagov: f64,
    pub time_analytic: Duration,
    pub time_makri: Duration,
    pub time_vagov: Duration,
    /// The faster of the two oracle sweeps.
    pub time_oracle: Duration,
    /// time_oracle / time_analytic.
    pub speedup: f64,
    /// Number of Δk values compared (Δk_max + 1).
    pub points: usize,
    pub makri_failures: usize,
    pub vagov_failures: usize,
    /// Per-Δk values, index Δk; Δk = 0 is the self coefficient.
    pub analytic: Vec<Complex64>,
    pub makri: Vec<Option<Complex64>>,
    pub vagov: Vec<Option<Complex64>>,
}

/// Sweeps η(Δk), Δk = 0..=dk_max, analytically and with both spectral
/// oracles, timing each sweep with `clock` (a monotonic "now").
pub fn benchmark_eta<C: FnMut() -> Duration>(
    bath: &ExponentialBath,
    spec: &SpectralDensity,
    context: &PhysicalContext,
    dt: f64,
    dk_max: usize,
    quad: &QuadratureConfig,
    mut clock: C,
) -> Result<BenchmarkReport> {
    check_dt(dt)?;
    spec.validate()?;
    let n = dk_max + 1;

    let start = clock();
    let analytic = (0..n)
        .map(|dk| eta_trotter_analytic(bath, dt, dk))
        .collect::<Result<Vec<_>>>()?;
    let time_analytic = clock().saturating_sub(start);

    let mut sweep = |variant: OracleVariant| -> Result<(Vec<Option<Complex64>>, Duration)> {
        let start = clock();
        let mut out = Vec::with_capacity(n);
        for dk in 0..n {
            let sel = if dk == 0 {
                EtaSelector::SelfTerm
            } else {
                EtaSelector::Interior(dk)
            };
            match eta_spectral_oracle(spec, context, dt, n, sel, variant, quad) {
                Ok(v) => out.push(Some(v)),
                Err(Error::QuadratureFailed { .. }) | Err(Error::Divergent(_)) => out.push(None),
                Err(e) => return Err(e),
            }
        }
        Ok((out, clock().saturating_sub(start)))
    };
    let (makri, time_makri) = sweep(OracleVariant::Makri)?;
    let (vagov, time_vagov) = sweep(OracleVariant::Vagov)?;

    let scale = analytic[0].re.abs();
    if scale == 0.0 {
        return Err(Error::invalid("Re eta(0) is zero; cannot normalize"));
    }
    let max_err = |oracle: &[Option<Complex64>]| {
        analytic
            .iter()
            .zip(oracle)
            .filter_map(|(a, o)| o.map(|o| (a - o).norm() / scale))
            .fold(0.0, f64::max)
    };
    let time_oracle = time_makri.min(time_vagov);
    let speedup = if time_analytic.is_zero() {
        f64::INFINITY
    } else {
        time_oracle.as_secs_f64() / time_analytic.as_secs_f64()
    };
    Ok(BenchmarkReport {
        max_rel_err_vs_makri: max_err(&makri),
        max_rel_err_vs_vagov: max_err(&vagov),
        time_analytic,
        time_makri,
        time_vagov,
        time_oracle,
        speedup,
        points: n,
        makri_failures: makri.iter().filter(|v| v.is_none()).count(),
        vagov_failures: vagov.iter().filter(|v| v.is_none()).count(),
        analytic,
        makri,
        vagov,
    })
}
