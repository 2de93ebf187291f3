//! Adaptive Dormand–Prince 5(4) integrator for small fixed-size systems.

use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl<T> {
    pub rel_tol: T,
    pub abs_tol: T,
    /// Largest allowed |h|.
    pub max_step: T,
    /// Accepted + rejected steps allowed per `advance` call.
    pub max_steps: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: u64,
    pub rejected: u64,
    pub evaluations: u64,
}

impl StepStats {
    pub fn merge(&mut self, other: StepStats) {
        self.accepted += other.accepted;
        self.rejected += other.rejected;
        self.evaluations += other.evaluations;
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OdeError {
    /// |h| fell below the resolvable increment of t.
    StepSizeUnderflow {
        t: f64,
        h: f64,
    },
    TooManySteps {
        t: f64,
    },
    NonFinite {
        t: f64,
    },
}

// Dormand & Prince (1980) coefficients.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
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
// b − b̂ (fifth minus embedded fourth order).
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 5.0;

/// Stateful stepper; remembers the last accepted step size so consecutive
/// `advance` calls continue smoothly.
#[derive(Debug, Clone)]
pub struct DormandPrince<T> {
    h: Option<T>,
    pub stats: StepStats,
}

impl<T: Real> Default for DormandPrince<T> {
    fn default() -> Self {
        Self::new()
    }
}

fn axpy<T: Real, const N: usize>(y: &[T; N], terms: &[(T, &[T; N])]) -> [T; N] {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        for (c, k) in terms {
            *o = *o + *c * k[i];
        }
    }
    out
}

impl<T: Real> DormandPrince<T> {
    pub fn new() -> Self {
        Self {
            h: None,
            stats: StepStats::default(),
        }
    }

    /// Forgets the step-size history.
    pub fn reset(&mut self) {
        self.h = None;
    }

    fn error_norm<const N: usize>(
        y: &[T; N],
        y_new: &[T; N],
        err: &[T; N],
        ctl: &StepControl<T>,
    ) -> T {
        let mut acc = T::zero();
        for i in 0..N {
            let scale = ctl.abs_tol + ctl.rel_tol * y[i].abs().max(y_new[i].abs());
            let e = err[i] / scale;
            acc = acc + e * e;
        }
        (acc / T::lit(N as f64)).sqrt()
    }

    fn initial_step<const N: usize, F>(
        &mut self,
        f: &mut F,
        t: T,
        y: &[T; N],
        f0: &[T; N],
        dir: T,
        ctl: &StepControl<T>,
    ) -> T
    where
        F: FnMut(T, &[T; N]) -> [T; N],
    {
        // Hairer, Nørsett & Wanner, "Solving ODEs I", II.4.
        let sc = |i: usize| ctl.abs_tol + ctl.rel_tol * y[i].abs();
        let norm = |v: &[T; N]| {
            let s = (0..N).fold(T::zero(), |acc, i| acc + (v[i] / sc(i)).powi(2));
            (s / T::lit(N as f64)).sqrt()
        };
        let d0 = norm(y);
        let d1 = norm(f0);
        let tiny = T::lit(1e-5);
        let mut h0 = if d0 < tiny || d1 < tiny {
            T::lit(1e-6)
        } else {
            T::lit(0.01) * d0 / d1
        };
        h0 = h0.min(ctl.max_step);
        let y1 = axpy(y, &[(dir * h0, f0)]);
        let f1 = f(t + dir * h0, &y1);
        self.stats.evaluations += 1;
        let diff: [T; N] = std::array::from_fn(|i| f1[i] - f0[i]);
        let d2 = norm(&diff) / h0;
        let h1 = if d1.max(d2) <= T::lit(1e-15) {
            (h0 * T::lit(1e-3)).max(T::lit(1e-6))
        } else {
            (T::lit(0.01) / d1.max(d2)).powf(T::lit(0.2))
        };
        (T::lit(100.0) * h0).min(h1).min(ctl.max_step)
    }

    /// Integrates from `t` to exactly `t_end` (either direction).
    pub fn advance<const N: usize, F>(
        &mut self,
        mut f: F,
        t: T,
        y: [T; N],
        t_end: T,
        ctl: &StepControl<T>,
    ) -> Result<[T; N], OdeError>
    where
        F: FnMut(T, &[T; N]) -> [T; N],
    {
        if t == t_end {
            return Ok(y);
        }
        let dir = if t_end > t { T::one() } else { -T::one() };
        let mut t = t;
        let mut y = y;
        let mut k1 = f(t, &y);
        self.stats.evaluations += 1;
        let mut h = match self.h {
            Some(h) => h.abs().min(ctl.max_step),
            None => self.initial_step(&mut f, t, &y, &k1, dir, ctl),
        };
        let mut last_rejected = false;
        let mut steps = 0usize;

        loop {
            let remaining = (t_end - t).abs();
            let finishing = h >= remaining;
            let step = if finishing { remaining } else { h };
            let hs = dir * step;
            let ulp = T::epsilon() * T::lit(4.0) * t.abs().max(T::one());
            if finishing && remaining <= ulp {
                return Ok(y);
            }
            if step < ulp {
                return Err(OdeError::StepSizeUnderflow {
                    t: t.to_f64_lossy(),
                    h: step.to_f64_lossy(),
                });
            }
            steps += 1;
            if steps > ctl.max_steps {
                return Err(OdeError::TooManySteps {
                    t: t.to_f64_lossy(),
                });
            }

            let c = T::lit;
            let k2 = f(t + hs * c(C2), &axpy(&y, &[(hs * c(A21), &k1)]));
            let k3 = f(
                t + hs * c(C3),
                &axpy(&y, &[(hs * c(A31), &k1), (hs * c(A32), &k2)]),
            );
            let k4 = f(
                t + hs * c(C4),
                &axpy(
                    &y,
                    &[(hs * c(A41), &k1), (hs * c(A42), &k2), (hs * c(A43), &k3)],
                ),
            );
            let k5 = f(
                t + hs * c(C5),
                &axpy(
                    &y,
                    &[
                        (hs * c(A51), &k1),
                        (hs * c(A52), &k2),
                        (hs * c(A53), &k3),
                        (hs * c(A54), &k4),
                    ],
                ),
            );
            let t_new = if finishing { t_end } else { t + hs };
            let k6 = f(
                t_new,
                &axpy(
                    &y,
                    &[
                        (hs * c(A61), &k1),
                        (hs * c(A62), &k2),
                        (hs * c(A63), &k3),
                        (hs * c(A64), &k4),
                        (hs * c(A65), &k5),
                    ],
                ),
            );
            let y_new = axpy(
                &y,
                &[
                    (hs * c(B1), &k1),
                    (hs * c(B3), &k3),
                    (hs * c(B4), &k4),
                    (hs * c(B5), &k5),
                    (hs * c(B6), &k6),
                ],
            );
            let k7 = f(t_new, &y_new);
            self.stats.evaluations += 6;

            let zero = [T::zero(); N];
            let err = axpy(
                &zero,
                &[
                    (hs * c(E1), &k1),
                    (hs * c(E3), &k3),
                    (hs * c(E4), &k4),
                    (hs * c(E5), &k5),
                    (hs * c(E6), &k6),
                    (hs * c(E7), &k7),
                ],
            );
            let en = Self::error_norm(&y, &y_new, &err, ctl);
            if !en.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
                if step < ulp * T::lit(16.0) {
                    return Err(OdeError::NonFinite {
                        t: t.to_f64_lossy(),
                    });
                }
                self.stats.rejected += 1;
                h = step * c(FAC_MIN);
                last_rejected = true;
                continue;
            }

            let fac = if en == T::zero() {
                c(FAC_MAX)
            } else {
                c(SAFETY) * en.powf(c(-0.2))
            };
            if en <= T::one() {
                self.stats.accepted += 1;
                t = t_new;
                y = y_new;
                k1 = k7;
                let grow = if last_rejected {
                    fac.min(T::one())
                } else {
                    fac.min(c(FAC_MAX))
                };
                let proposal = (step * grow.max(c(FAC_MIN))).min(ctl.max_step);
                last_rejected = false;
                if finishing {
                    // Keep the unclamped step for the next interval.
                    self.h = Some(if step < h { h } else { proposal });
                    return Ok(y);
                }
                h = proposal;
            } else {
                self.stats.rejected += 1;
                last_rejected = true;
                h = step * fac.max(c(FAC_MIN)).min(T::one());
            }
        }
    }
}
