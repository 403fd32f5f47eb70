//! Explicit Runge-Kutta integration of matrix-valued ODEs.
//!
//! Both methods land exactly on every requested sample time: the last step
//! before a sample is shortened, and the adaptive controller resumes from the
//! step size it had proposed before clipping.

use std::fmt;
use std::str::FromStr;

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{BasisIndex, CMatrix, DensityMatrix, C64};

/// Vector-space operations the integrator needs from a state.
pub trait OdeState: Clone {
    fn zeroed(&self) -> Self;

    /// `self = base + Σ c_k x_k`
    fn set_lin_comb(&mut self, base: &Self, terms: &[(f64, &Self)]);

    /// `max_k |err_k| / (1 + max(|y0_k|, |y1_k|))`
    fn error_norm(err: &Self, y0: &Self, y1: &Self) -> f64;

    fn max_norm(&self) -> f64;

    fn all_finite(&self) -> bool;
}

fn lin_comb_slices(out: &mut [C64], base: &[C64], terms: &[(f64, &[C64])]) {
    out.copy_from_slice(base);
    for &(c, x) in terms {
        if c == 0.0 {
            continue;
        }
        for (o, v) in out.iter_mut().zip(x) {
            *o += v * c;
        }
    }
}

fn error_norm_slices<'a>(it: impl Iterator<Item = (&'a C64, (&'a C64, &'a C64))>) -> f64 {
    it.fold(0.0, |acc, (e, (a, b))| acc.max(e.norm() / (1.0 + a.norm().max(b.norm()))))
}

impl OdeState for CMatrix {
    fn zeroed(&self) -> Self {
        CMatrix::zeros(self.nrows(), self.ncols())
    }

    fn set_lin_comb(&mut self, base: &Self, terms: &[(f64, &Self)]) {
        let t: Vec<(f64, &[C64])> = terms.iter().map(|&(c, x)| (c, x.as_slice())).collect();
        lin_comb_slices(self.as_mut_slice(), base.as_slice(), &t);
    }

    fn error_norm(err: &Self, y0: &Self, y1: &Self) -> f64 {
        error_norm_slices(err.iter().zip(y0.iter().zip(y1.iter())))
    }

    fn max_norm(&self) -> f64 {
        self.iter().fold(0.0, |acc, z| acc.max(z.norm()))
    }

    fn all_finite(&self) -> bool {
        self.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

/// Rung-block storage: one 2×2 block per excitation number.
impl OdeState for Vec<Matrix2<C64>> {
    fn zeroed(&self) -> Self {
        vec![Matrix2::zeros(); self.len()]
    }

    fn set_lin_comb(&mut self, base: &Self, terms: &[(f64, &Self)]) {
        for (n, out) in self.iter_mut().enumerate() {
            let mut acc = base[n];
            for &(c, x) in terms {
                if c != 0.0 {
                    acc += x[n] * C64::new(c, 0.0);
                }
            }
            *out = acc;
        }
    }

    fn error_norm(err: &Self, y0: &Self, y1: &Self) -> f64 {
        let mut acc: f64 = 0.0;
        for n in 0..err.len() {
            acc = acc.max(error_norm_slices(err[n].iter().zip(y0[n].iter().zip(y1[n].iter()))));
        }
        acc
    }

    fn max_norm(&self) -> f64 {
        self.iter().flat_map(|b| b.iter()).fold(0.0, |acc, z| acc.max(z.norm()))
    }

    fn all_finite(&self) -> bool {
        self.iter().flat_map(|b| b.iter()).all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "rk4")]
    Rk4Fixed,
    #[serde(rename = "rk45")]
    Rk45Adaptive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegrationSpec {
    pub t_start: f64,
    pub t_end: f64,
    pub sample_times: Vec<f64>,
    pub method: Method,
    /// Step size for [`Method::Rk4Fixed`], local error tolerance for [`Method::Rk45Adaptive`].
    pub dt_or_tol: f64,
}

impl IntegrationSpec {
    /// `n_samples` uniformly spaced samples on `[t_start, t_end]`, endpoints included.
    pub fn uniform(t_start: f64, t_end: f64, n_samples: usize, method: Method, dt_or_tol: f64) -> Self {
        let sample_times = match n_samples {
            0 => Vec::new(),
            1 => vec![t_end],
            n => (0..n).map(|k| t_start + (t_end - t_start) * k as f64 / (n - 1) as f64).collect(),
        };
        Self { t_start, t_end, sample_times, method, dt_or_tol }
    }

    /// Adaptive RK45 at tolerance `1e-10`.
    pub fn adaptive(t_end: f64, n_samples: usize) -> Self {
        Self::uniform(0.0, t_end, n_samples, Method::Rk45Adaptive, 1e-10)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_start < self.t_end) {
            return Err(Error::InvalidSpec(format!("t_start {} must be below t_end {}", self.t_start, self.t_end)));
        }
        if !(self.dt_or_tol > 0.0) {
            return Err(Error::InvalidSpec("dt_or_tol must be positive".into()));
        }
        if self.sample_times.is_empty() {
            return Err(Error::InvalidSpec("no sample times".into()));
        }
        if self.sample_times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidSpec("sample times must be strictly increasing".into()));
        }
        let (first, last) = (self.sample_times[0], *self.sample_times.last().unwrap());
        if first < self.t_start || last > self.t_end {
            return Err(Error::InvalidSpec("sample times outside [t_start, t_end]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverTag {
    Lindblad,
    Nhqm,
    Nheh,
}

impl fmt::Display for SolverTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolverTag::Lindblad => "lindblad",
            SolverTag::Nhqm => "nhqm",
            SolverTag::Nheh => "nheh",
        })
    }
}

impl FromStr for SolverTag {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lindblad" => Ok(SolverTag::Lindblad),
            "nhqm" => Ok(SolverTag::Nhqm),
            "nheh" => Ok(SolverTag::Nheh),
            _ => Err(Error::Config(format!("unknown solver {s:?}"))),
        }
    }
}

/// Which real number to read off a complex matrix element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Part {
    Real,
    Imag,
    Abs,
}

impl Part {
    pub fn of(self, z: C64) -> f64 {
        match self {
            Part::Real => z.re,
            Part::Imag => z.im,
            Part::Abs => z.norm(),
        }
    }
}

impl fmt::Display for Part {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Part::Real => "real",
            Part::Imag => "imag",
            Part::Abs => "abs",
        })
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    pub solver: SolverTag,
}

impl Trajectory {
    pub fn element_series(&self, row: BasisIndex, col: BasisIndex) -> Vec<C64> {
        self.states.iter().map(|s| s.element(row, col)).collect()
    }

    pub fn series(&self, row: BasisIndex, col: BasisIndex, part: Part) -> Vec<f64> {
        self.states.iter().map(|s| part.of(s.element(row, col))).collect()
    }

    /// Largest entrywise deviation over all samples; both trajectories must share the grid.
    pub fn max_abs_diff(&self, other: &Trajectory) -> Result<f64> {
        if self.times != other.times {
            return Err(Error::TimeGridMismatch);
        }
        let mut acc: f64 = 0.0;
        for (a, b) in self.states.iter().zip(&other.states) {
            if a.dim() != b.dim() {
                return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
            }
            acc = acc.max(crate::linalg::max_abs_diff(a.as_matrix(), b.as_matrix()));
        }
        Ok(acc)
    }

    pub fn last(&self) -> &DensityMatrix {
        self.states.last().expect("trajectory has at least one sample")
    }
}

/// One accepted step of the continuous extension.
#[derive(Debug, Clone)]
struct Segment<S> {
    t0: f64,
    h: f64,
    c: [S; 5],
}

/// Continuous solution assembled from accepted steps.
#[derive(Debug, Clone)]
pub struct DenseOutput<S> {
    y0: S,
    t_start: f64,
    segments: Vec<Segment<S>>,
}

impl<S: OdeState> DenseOutput<S> {
    /// Evaluate at `t`; clamps to the integrated interval.
    pub fn eval_into(&self, t: f64, out: &mut S) {
        if self.segments.is_empty() || t <= self.t_start {
            *out = self.y0.clone();
            return;
        }
        let k = self.segments.partition_point(|s| s.t0 + s.h < t).min(self.segments.len() - 1);
        let seg = &self.segments[k];
        let th = ((t - seg.t0) / seg.h).clamp(0.0, 1.0);
        let th1 = 1.0 - th;
        // y = c0 + θ(c1 + θ1(c2 + θ(c3 + θ1 c4)))
        let [c0, c1, c2, c3, c4] = &seg.c;
        out.set_lin_comb(
            c0,
            &[
                (th, c1),
                (th * th1, c2),
                (th * th1 * th, c3),
                (th * th1 * th * th1, c4),
            ],
        );
    }

    pub fn eval(&self, t: f64) -> S {
        let mut out = self.y0.clone();
        self.eval_into(t, &mut out);
        out
    }

    pub fn n_steps(&self) -> usize {
        self.segments.len()
    }
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

fn underflow(h: f64, t: f64) -> bool {
    h < 1e-13 * t.abs().max(1.0)
}

/// Hermite-form coefficients shared by both methods (`c4 = 0` gives the cubic Hermite interpolant).
fn hermite_coeffs<S: OdeState>(y0: &S, y1: &S, f0: &S, f1: &S, h: f64) -> [S; 4] {
    let mut dy = y0.zeroed();
    dy.set_lin_comb(y1, &[(-1.0, y0)]);
    let mut c2 = y0.zeroed();
    let zero = y0.zeroed();
    c2.set_lin_comb(&zero, &[(h, f0), (-1.0, &dy)]);
    let mut c3 = y0.zeroed();
    c3.set_lin_comb(&dy, &[(-h, f1), (-1.0, &c2)]);
    [y0.clone(), dy, c2, c3]
}

/// Integrate `dy/dt = rhs(t, y)` and return the state at each sample time.
///
/// `rhs(t, y, out)` must overwrite `out`.
pub fn integrate_states<S, F>(rhs: F, y0: &S, spec: &IntegrationSpec) -> Result<Vec<S>>
where
    S: OdeState,
    F: FnMut(f64, &S, &mut S),
{
    run(rhs, y0, spec, false).map(|(s, _)| s)
}

/// Like [`integrate_states`] but also returns the continuous extension.
pub fn integrate_dense<S, F>(rhs: F, y0: &S, spec: &IntegrationSpec) -> Result<(Vec<S>, DenseOutput<S>)>
where
    S: OdeState,
    F: FnMut(f64, &S, &mut S),
{
    run(rhs, y0, spec, true).map(|(s, d)| (s, d.expect("dense output requested")))
}

/// Integrate a density-matrix flow into a [`Trajectory`].
pub fn integrate<F>(rhs: F, rho0: &DensityMatrix, spec: &IntegrationSpec, solver: SolverTag) -> Result<Trajectory>
where
    F: FnMut(f64, &CMatrix, &mut CMatrix),
{
    let states = integrate_states(rhs, rho0.as_matrix(), spec)?;
    let states = states.into_iter().map(DensityMatrix::from_matrix).collect::<Result<_>>()?;
    Ok(Trajectory { times: spec.sample_times.clone(), states, solver })
}

fn run<S, F>(mut rhs: F, y0: &S, spec: &IntegrationSpec, dense: bool) -> Result<(Vec<S>, Option<DenseOutput<S>>)>
where
    S: OdeState,
    F: FnMut(f64, &S, &mut S),
{
    spec.validate()?;
    let mut out = Vec::with_capacity(spec.sample_times.len());
    let mut dense_out = dense.then(|| DenseOutput { y0: y0.clone(), t_start: spec.t_start, segments: Vec::new() });

    let mut t = spec.t_start;
    let mut y = y0.clone();
    let mut k1 = y0.zeroed();
    rhs(t, &y, &mut k1);
    if !k1.all_finite() {
        return Err(Error::NonFinite { t });
    }

    match spec.method {
        Method::Rk4Fixed => {
            let dt = spec.dt_or_tol;
            let (mut k2, mut k3, mut k4, mut tmp) = (y.zeroed(), y.zeroed(), y.zeroed(), y.zeroed());
            for &target in &spec.sample_times {
                let span = target - t;
                if span > 0.0 {
                    let n = ((span / dt) - 1e-9).ceil().max(1.0) as usize;
                    let h = span / n as f64;
                    for s in 0..n {
                        let t0 = t;
                        tmp.set_lin_comb(&y, &[(0.5 * h, &k1)]);
                        rhs(t0 + 0.5 * h, &tmp, &mut k2);
                        tmp.set_lin_comb(&y, &[(0.5 * h, &k2)]);
                        rhs(t0 + 0.5 * h, &tmp, &mut k3);
                        tmp.set_lin_comb(&y, &[(h, &k3)]);
                        rhs(t0 + h, &tmp, &mut k4);
                        tmp.set_lin_comb(&y, &[(h / 6.0, &k1), (h / 3.0, &k2), (h / 3.0, &k3), (h / 6.0, &k4)]);
                        t = if s + 1 == n { target } else { t0 + h };
                        let mut f_new = y.zeroed();
                        rhs(t, &tmp, &mut f_new);
                        if !f_new.all_finite() || !tmp.all_finite() {
                            return Err(Error::NonFinite { t });
                        }
                        if let Some(d) = dense_out.as_mut() {
                            let [c0, c1, c2, c3] = hermite_coeffs(&y, &tmp, &k1, &f_new, h);
                            let c4 = y.zeroed();
                            d.segments.push(Segment { t0, h, c: [c0, c1, c2, c3, c4] });
                        }
                        std::mem::swap(&mut y, &mut tmp);
                        k1 = f_new;
                    }
                }
                out.push(y.clone());
            }
        }
        Method::Rk45Adaptive => {
            let tol = spec.dt_or_tol;
            let span_total = spec.t_end - spec.t_start;
            let (d0, d1) = (y.max_norm(), k1.max_norm());
            let mut h = if d0 < 1e-5 || d1 < 1e-5 { 1e-4 } else { 0.01 * d0 / d1 };
            h = h.min(span_total);

            let (mut k2, mut k3, mut k4, mut k5, mut k6, mut k7) =
                (y.zeroed(), y.zeroed(), y.zeroed(), y.zeroed(), y.zeroed(), y.zeroed());
            let (mut tmp, mut y_new, mut err) = (y.zeroed(), y.zeroed(), y.zeroed());
            let zero = y.zeroed();

            for &target in &spec.sample_times {
                while t < target {
                    let remaining = target - t;
                    let clipped = h >= remaining * (1.0 - 1e-12);
                    let hs = if clipped { remaining } else { h };

                    tmp.set_lin_comb(&y, &[(hs * A21, &k1)]);
                    rhs(t + hs * 0.2, &tmp, &mut k2);
                    tmp.set_lin_comb(&y, &[(hs * A31, &k1), (hs * A32, &k2)]);
                    rhs(t + hs * 0.3, &tmp, &mut k3);
                    tmp.set_lin_comb(&y, &[(hs * A41, &k1), (hs * A42, &k2), (hs * A43, &k3)]);
                    rhs(t + hs * 0.8, &tmp, &mut k4);
                    tmp.set_lin_comb(&y, &[(hs * A51, &k1), (hs * A52, &k2), (hs * A53, &k3), (hs * A54, &k4)]);
                    rhs(t + hs * 8.0 / 9.0, &tmp, &mut k5);
                    tmp.set_lin_comb(
                        &y,
                        &[(hs * A61, &k1), (hs * A62, &k2), (hs * A63, &k3), (hs * A64, &k4), (hs * A65, &k5)],
                    );
                    rhs(t + hs, &tmp, &mut k6);
                    y_new.set_lin_comb(&y, &[(hs * B1, &k1), (hs * B3, &k3), (hs * B4, &k4), (hs * B5, &k5), (hs * B6, &k6)]);
                    let t_new = if clipped { target } else { t + hs };
                    rhs(t_new, &y_new, &mut k7);
                    err.set_lin_comb(
                        &zero,
                        &[(hs * E1, &k1), (hs * E3, &k3), (hs * E4, &k4), (hs * E5, &k5), (hs * E6, &k6), (hs * E7, &k7)],
                    );
                    let en = S::error_norm(&err, &y, &y_new) / tol;
                    if !en.is_finite() || !y_new.all_finite() {
                        return Err(Error::NonFinite { t });
                    }

                    let fac = if en == 0.0 { 5.0 } else { (0.9 * en.powf(-0.2)).clamp(0.2, 5.0) };
                    if en <= 1.0 {
                        if let Some(d) = dense_out.as_mut() {
                            let [c0, c1, c2, c3] = hermite_coeffs(&y, &y_new, &k1, &k7, hs);
                            let mut c4 = y.zeroed();
                            c4.set_lin_comb(
                                &zero,
                                &[(hs * D1, &k1), (hs * D3, &k3), (hs * D4, &k4), (hs * D5, &k5), (hs * D6, &k6), (hs * D7, &k7)],
                            );
                            d.segments.push(Segment { t0: t, h: hs, c: [c0, c1, c2, c3, c4] });
                        }
                        t = t_new;
                        std::mem::swap(&mut y, &mut y_new);
                        std::mem::swap(&mut k1, &mut k7);
                        h = if clipped { h.max(hs * fac) } else { hs * fac };
                    } else {
                        h = hs * fac.min(1.0);
                        if underflow(h, t) {
                            return Err(Error::StepUnderflow { t });
                        }
                    }
                }
                out.push(y.clone());
            }
        }
    }
    Ok((out, dense_out))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(v: f64) -> CMatrix {
        CMatrix::from_element(1, 1, C64::new(v, 0.0))
    }

    #[test]
    fn zero_rhs_is_constant() {
        let y0 = CMatrix::from_fn(2, 2, |i, j| C64::new(i as f64, j as f64));
        for method in [Method::Rk4Fixed, Method::Rk45Adaptive] {
            let spec = IntegrationSpec::uniform(0.0, 3.0, 7, method, 1e-3);
            let ys = integrate_states(|_, _, out: &mut CMatrix| out.fill(C64::new(0.0, 0.0)), &y0, &spec).unwrap();
            assert_eq!(ys.len(), 7);
            assert!(ys.iter().all(|y| *y == y0));
        }
    }

    #[test]
    fn exponential_decay() {
        let spec = IntegrationSpec::uniform(0.0, 1.0, 2, Method::Rk45Adaptive, 1e-10);
        let ys = integrate_states(|_, y: &CMatrix, out: &mut CMatrix| out.copy_from(&(-y)), &scalar(1.0), &spec).unwrap();
        assert!((ys[1][(0, 0)].re - (-1.0f64).exp()).abs() < 1e-8);
        assert_eq!(ys[0][(0, 0)].re, 1.0);
    }

    #[test]
    fn rk4_is_fourth_order() {
        let exact = (-2.0f64).exp();
        let mut errs = Vec::new();
        for dt in [0.1, 0.05] {
            let spec = IntegrationSpec::uniform(0.0, 2.0, 2, Method::Rk4Fixed, dt);
            let ys = integrate_states(|_, y: &CMatrix, out: &mut CMatrix| out.copy_from(&(-y)), &scalar(1.0), &spec).unwrap();
            errs.push((ys[1][(0, 0)].re - exact).abs());
        }
        let ratio = errs[0] / errs[1];
        assert!((12.0..20.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn dense_output_tracks_solution() {
        let spec = IntegrationSpec::uniform(0.0, 5.0, 3, Method::Rk45Adaptive, 1e-10);
        let rot = |_: f64, y: &CMatrix, out: &mut CMatrix| out.copy_from(&(y * C64::new(0.0, 1.0)));
        let (_, dense) = integrate_dense(rot, &scalar(1.0), &spec).unwrap();
        for k in 0..50 {
            let t = 0.1 * k as f64 + 0.013;
            let v = dense.eval(t)[(0, 0)];
            assert!((v - C64::from_polar(1.0, t)).norm() < 1e-8, "t = {t}");
        }
    }

    #[test]
    fn non_finite_rhs_is_reported() {
        let spec = IntegrationSpec::adaptive(1.0, 2);
        let r = integrate_states(|_, _, out: &mut CMatrix| out.fill(C64::new(f64::NAN, 0.0)), &scalar(1.0), &spec);
        assert!(matches!(r, Err(Error::NonFinite { .. })));
    }

    #[test]
    fn blow_up_underflows() {
        // y' = y², y(0) = 1 blows up at t = 1
        let spec = IntegrationSpec::adaptive(2.0, 2);
        let r = integrate_states(|_, y: &CMatrix, out: &mut CMatrix| out.copy_from(&y.component_mul(y)), &scalar(1.0), &spec);
        assert!(matches!(r, Err(Error::StepUnderflow { .. }) | Err(Error::NonFinite { .. })), "{r:?}");
    }

    #[test]
    fn spec_validation() {
        let mut s = IntegrationSpec::adaptive(1.0, 3);
        s.validate().unwrap();
        s.sample_times = vec![0.5, 0.2];
        assert!(s.validate().is_err());
        let s = IntegrationSpec::uniform(1.0, 1.0, 2, Method::Rk45Adaptive, 1e-8);
        assert!(s.validate().is_err());
        let s = IntegrationSpec::uniform(0.0, 1.0, 2, Method::Rk4Fixed, 0.0);
        assert!(s.validate().is_err());
    }
}
