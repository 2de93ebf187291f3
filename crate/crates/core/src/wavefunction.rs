//! Coordinate-space wavefunctions rebuilt from (α, α̇, φ).
//!
//! ψ_n(S,t) = (√ħα)^{-1/2} h_n(S/(√ħα)) exp(iα̇S²/(2ħGα)) e^{−i(n+½)φ}
//!
//! where h_n are the normalized Hermite functions. Nothing here time-steps
//! a wavefunction; these routines only check the closed form.

use std::io::Write;

use num_complex::Complex;
use rustfft::{FftNum, FftPlanner};

use crate::dynamics::uncertainties;
use crate::ermakov::{ErmakovState, ErmakovTrajectory};
use crate::error::{Error, Result};
use crate::molecule::NormalMode;
use crate::scalar::Real;
use crate::tabular::fmt_g17;
use crate::units::hbar;

/// Default number of grid points.
pub const DEFAULT_POINTS: usize = 4096;
/// Default grid half-width in units of σ_S.
pub const DEFAULT_HALF_WIDTH: f64 = 10.0;

#[derive(Debug, Clone, PartialEq)]
pub struct WavefunctionGrid<T> {
    pub coordinate: Vec<T>,
    pub values: Vec<Complex<T>>,
    pub time: T,
    pub mode: NormalMode,
    pub n: u32,
}

impl<T: Real> WavefunctionGrid<T> {
    pub fn spacing(&self) -> T {
        grid_spacing(&self.coordinate)
    }

    pub fn norm(&self) -> T {
        inner_product(&self.values, &self.values, self.spacing()).re
    }

    pub fn density(&self) -> Vec<T> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }
}

fn grid_spacing<T: Real>(grid: &[T]) -> T {
    if grid.len() < 2 {
        return T::zero();
    }
    (grid[grid.len() - 1] - grid[0]) / T::lit((grid.len() - 1) as f64)
}

/// h_0 … h_{n_max} at x, by the normalized three-term recurrence.
pub fn hermite_functions<T: Real>(x: T, n_max: u32) -> Vec<T> {
    let mut h = Vec::with_capacity(n_max as usize + 1);
    h.push(T::PI().powf(T::lit(-0.25)) * (-x * x / T::lit(2.0)).exp());
    if n_max >= 1 {
        h.push(T::SQRT_2() * x * h[0]);
    }
    for k in 1..n_max as usize {
        let kf = T::lit(k as f64);
        let next = (T::lit(2.0) / (kf + T::one())).sqrt() * x * h[k]
            - (kf / (kf + T::one())).sqrt() * h[k - 1];
        h.push(next);
    }
    h
}

/// σ_S of level n at state `st`.
pub fn position_sigma<T: Real>(st: &ErmakovState<T>, n: u32) -> T {
    (hbar::<T>() / T::lit(2.0) * st.alpha * st.alpha * T::lit(2.0 * f64::from(n) + 1.0)).sqrt()
}

/// `points` uniform samples on ±`half_width`·σ_S.
pub fn symmetric_grid<T: Real>(sigma: T, half_width: T, points: usize) -> Vec<T> {
    let edge = sigma * half_width;
    let step = T::lit(2.0) * edge / T::lit((points - 1) as f64);
    (0..points)
        .map(|i| -edge + step * T::lit(i as f64))
        .collect()
}

/// Values of ψ_n on `grid`; fails if the grid covers less than 6σ_S.
pub fn eval_psi<T: Real>(
    st: &ErmakovState<T>,
    g: T,
    n: u32,
    grid: &[T],
) -> Result<Vec<Complex<T>>> {
    let sigma = position_sigma(st, n);
    let span = match (grid.first(), grid.last()) {
        (Some(&a), Some(&b)) => b - a,
        _ => T::zero(),
    };
    if !(span >= T::lit(6.0) * sigma) {
        return Err(Error::GridTooNarrow {
            span: span.to_f64_lossy(),
            required: (T::lit(6.0) * sigma).to_f64_lossy(),
        });
    }
    Ok(eval_unchecked(st, g, n, grid))
}

fn eval_unchecked<T: Real>(st: &ErmakovState<T>, g: T, n: u32, grid: &[T]) -> Vec<Complex<T>> {
    let h = hbar::<T>();
    let width = h.sqrt() * st.alpha;
    let amp = width.sqrt().recip();
    let chirp = st.alpha_dot / (T::lit(2.0) * h * g * st.alpha);
    let global = Complex::from_polar(T::one(), -(T::lit(f64::from(n)) + T::lit(0.5)) * st.phi);
    grid.iter()
        .map(|&s| {
            let hn = hermite_functions(s / width, n)[n as usize];
            Complex::from_polar(amp * hn, chirp * s * s) * global
        })
        .collect()
}

/// ψ_n of one trajectory sample on the default grid.
pub fn psi_at<T: Real>(
    traj: &ErmakovTrajectory<T>,
    index: usize,
    n: u32,
    points: usize,
) -> Result<WavefunctionGrid<T>> {
    let st = traj.states[index];
    let grid = symmetric_grid(position_sigma(&st, n), T::lit(DEFAULT_HALF_WIDTH), points);
    let values = eval_psi(&st, traj.kinetic[index].g, n, &grid)?;
    Ok(WavefunctionGrid {
        coordinate: grid,
        values,
        time: traj.times[index],
        mode: traj.mode,
        n,
    })
}

/// ⟨a|b⟩ by the rectangle rule, exact to spectral order for functions that
/// vanish at the grid edges.
pub fn inner_product<T: Real>(a: &[Complex<T>], b: &[Complex<T>], ds: T) -> Complex<T> {
    a.iter()
        .zip(b)
        .fold(Complex::new(T::zero(), T::zero()), |acc, (x, y)| {
            acc + x.conj() * y
        })
        * ds
}

/// (⟨S⟩, Var S) from |ψ|².
pub fn position_moments<T: Real>(psi: &[Complex<T>], grid: &[T]) -> (T, T) {
    let (mut m0, mut m1, mut m2) = (T::zero(), T::zero(), T::zero());
    for (v, &s) in psi.iter().zip(grid) {
        let p = v.norm_sqr();
        m0 = m0 + p;
        m1 = m1 + p * s;
        m2 = m2 + p * s * s;
    }
    let mean = m1 / m0;
    (mean, m2 / m0 - mean * mean)
}

/// Var P with P = −iħ∂_S, from the discrete Fourier transform of ψ.
pub fn spectral_momentum_variance<T: Real + FftNum>(psi: &[Complex<T>], ds: T) -> T {
    let len = psi.len();
    let mut buf = psi.to_vec();
    FftPlanner::new().plan_fft_forward(len).process(&mut buf);
    let dk = T::TAU() / (T::lit(len as f64) * ds);
    let (mut m0, mut m1, mut m2) = (T::zero(), T::zero(), T::zero());
    for (j, v) in buf.iter().enumerate() {
        let signed = if j <= len / 2 {
            j as f64
        } else {
            j as f64 - len as f64
        };
        let k = dk * T::lit(signed);
        let p = v.norm_sqr();
        m0 = m0 + p;
        m1 = m1 + p * k;
        m2 = m2 + p * k * k;
    }
    let h = hbar::<T>();
    let mean = m1 / m0;
    h * h * (m2 / m0 - mean * mean)
}

/// Grid checks of one sample against the closed-form moments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridCheck<T> {
    pub norm_error: T,
    pub mean_position: T,
    pub position_variance_error: T,
    pub momentum_variance_error: T,
}

pub fn check_sample<T: Real + FftNum>(
    st: &ErmakovState<T>,
    g: T,
    n: u32,
    points: usize,
) -> Result<GridCheck<T>> {
    let grid = symmetric_grid(position_sigma(st, n), T::lit(DEFAULT_HALF_WIDTH), points);
    let psi = eval_psi(st, g, n, &grid)?;
    let ds = grid_spacing(&grid);
    let expect = uncertainties(st, g, n);
    let (mean, var) = position_moments(&psi, &grid);
    Ok(GridCheck {
        norm_error: (inner_product(&psi, &psi, ds).re - T::one()).abs(),
        mean_position: mean,
        position_variance_error: (var - expect.sigma2_s).abs() / expect.sigma2_s,
        momentum_variance_error: (spectral_momentum_variance(&psi, ds) - expect.sigma2_p).abs()
            / expect.sigma2_p,
    })
}

/// max_{m≠n≤n_max} |⟨ψ_m|ψ_n⟩| and max_n |⟨ψ_n|ψ_n⟩ − 1| at one sample.
pub fn orthonormality_error<T: Real>(
    st: &ErmakovState<T>,
    g: T,
    n_max: u32,
    points: usize,
) -> Result<(T, T)> {
    let grid = symmetric_grid(
        position_sigma(st, n_max),
        T::lit(DEFAULT_HALF_WIDTH),
        points,
    );
    let ds = grid_spacing(&grid);
    let psis = (0..=n_max)
        .map(|n| eval_psi(st, g, n, &grid))
        .collect::<Result<Vec<_>>>()?;
    let (mut off, mut diag) = (T::zero(), T::zero());
    for (m, a) in psis.iter().enumerate() {
        for (n, b) in psis.iter().enumerate().skip(m) {
            let ip = inner_product(a, b, ds);
            if m == n {
                diag = diag.max((ip.re - T::one()).abs().max(ip.im.abs()));
            } else {
                off = off.max(ip.norm());
            }
        }
    }
    Ok((off, diag))
}

/// max over interior samples of ‖iħ∂_tψ − Hψ‖/‖Hψ‖.
///
/// ∂_t uses the neighbouring trajectory samples and ∂²_S a three-point
/// stencil on a grid of `points` over ±10σ_S, so the result measures the
/// discretization as much as the solution. Samples touching a jump in G
/// are skipped.
pub fn schrodinger_residual<T: Real>(
    traj: &ErmakovTrajectory<T>,
    n: u32,
    points: usize,
    every: usize,
) -> T {
    let h = hbar::<T>();
    let half = T::lit(0.5);
    let breaks = if traj.source.jumps() {
        traj.source.breakpoints()
    } else {
        Vec::new()
    };
    let mut worst = T::zero();
    let len = traj.times.len();
    for i in (1..len.saturating_sub(1)).step_by(every.max(1)) {
        let (tm, t, tp) = (traj.times[i - 1], traj.times[i], traj.times[i + 1]);
        if breaks.iter().any(|&b| b >= tm && b <= tp) {
            continue;
        }
        let st = traj.states[i];
        let g = traj.kinetic[i].g;
        let grid = symmetric_grid(position_sigma(&st, n), T::lit(DEFAULT_HALF_WIDTH), points);
        let ds = grid_spacing(&grid);
        let prev = eval_unchecked(&traj.states[i - 1], traj.kinetic[i - 1].g, n, &grid);
        let here = eval_unchecked(&st, g, n, &grid);
        let next = eval_unchecked(&traj.states[i + 1], traj.kinetic[i + 1].g, n, &grid);
        let (hm, hp) = (t - tm, tp - t);
        let (mut num, mut den) = (T::zero(), T::zero());
        for j in 1..points - 1 {
            let dt =
                ((next[j] - here[j]) * (hm / hp) + (here[j] - prev[j]) * (hp / hm)) / (hm + hp);
            let lap = (here[j + 1] - here[j] * T::lit(2.0) + here[j - 1]) / (ds * ds);
            let s = grid[j];
            let hpsi = lap * (-half * g * h * h) + here[j] * (half * traj.potential * s * s);
            let lhs = Complex::new(T::zero(), h) * dt;
            num = num + (lhs - hpsi).norm_sqr();
            den = den + hpsi.norm_sqr();
        }
        worst = worst.max((num / den).sqrt());
    }
    worst
}

/// Writes `t_fs,mode,n,S,density` rows, one block per grid. `mode` is 0
/// for gerade and 1 for ungerade.
pub fn write_density_csv<W: Write, T: Real>(
    out: W,
    grids: &[WavefunctionGrid<T>],
) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t_fs", "mode", "n", "S", "density"])?;
    for g in grids {
        let t = fmt_g17(g.time.to_f64_lossy());
        let (mode, n) = ((g.mode as u8).to_string(), g.n.to_string());
        for (s, d) in g.coordinate.iter().zip(g.density()) {
            w.write_record([
                &t,
                &mode,
                &n,
                &fmt_g17(s.to_f64_lossy()),
                &fmt_g17(d.to_f64_lossy()),
            ])?;
        }
    }
    w.flush()
}
