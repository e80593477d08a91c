//! Dormand-Prince 5(4) integrator with PI step control and dense output.
//!
//! The driver takes one accepted step at a time, never stepping past a
//! caller-supplied limit, so callers can land exactly on sample points and
//! locate events on the continuous extension of each step.

use thiserror::Error;

use crate::scalar::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OdeError {
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
    #[error("right-hand side failed at t = {t} and could not be avoided by step reduction")]
    Rhs { t: f64 },
    #[error("step limit {0} reached")]
    StepLimit(usize),
}

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions<T> {
    pub rtol: T,
    pub atol: T,
    pub h_init: Option<T>,
    pub h_max: T,
    pub h_min: T,
    pub max_steps: usize,
}

impl<T: Real> Default for OdeOptions<T> {
    fn default() -> Self {
        Self {
            rtol: T::of(1e-10),
            atol: T::of(1e-12),
            h_init: None,
            h_max: T::of(0.1),
            h_min: T::of(1e-14),
            max_steps: 1_000_000,
        }
    }
}

const C2: f64 = 0.2;
const C3: f64 = 0.3;
const C4: f64 = 0.8;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 0.2;
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
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
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

/// Stage-7 value, error estimate and all stage slopes of one attempted step.
type Stages<T, const N: usize> = ([T; N], [T; N], [[T; N]; 7]);

fn axpy<T: Real, const N: usize>(y: &[T; N], h: T, terms: &[(f64, &[T; N])]) -> [T; N] {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = T::zero();
        for (c, k) in terms {
            acc = acc + T::of(*c) * k[i];
        }
        *o = *o + h * acc;
    }
    out
}

/// One accepted step with its continuous extension.
#[derive(Debug, Clone, Copy)]
pub struct Step<T, const N: usize> {
    pub t0: T,
    pub t1: T,
    pub y0: [T; N],
    pub y1: [T; N],
    cont: [[T; N]; 5],
}

impl<T: Real, const N: usize> Step<T, N> {
    /// Fifth-order-consistent interpolant on `[t0, t1]`.
    pub fn eval(&self, t: T) -> [T; N] {
        if t == self.t1 {
            return self.y1;
        }
        if t == self.t0 {
            return self.y0;
        }
        let theta = (t - self.t0) / (self.t1 - self.t0);
        let theta1 = T::one() - theta;
        let mut out = [T::zero(); N];
        for (i, o) in out.iter_mut().enumerate() {
            let c = &self.cont;
            *o = c[0][i]
                + theta * (c[1][i] + theta1 * (c[2][i] + theta * (c[3][i] + theta1 * c[4][i])));
        }
        out
    }
}

pub struct Dopri5<T, const N: usize, F> {
    f: F,
    opts: OdeOptions<T>,
    t: T,
    y: [T; N],
    k1: [T; N],
    h: T,
    dir: T,
    facold: T,
    steps: usize,
    last_rejected: bool,
}

impl<T, const N: usize, F, E> Dopri5<T, N, F>
where
    T: Real,
    F: FnMut(T, &[T; N]) -> Result<[T; N], E>,
{
    /// Starts at `(t0, y0)` heading towards `t_dir` (only its side of `t0`
    /// matters).
    pub fn new(mut f: F, t0: T, y0: [T; N], t_dir: T, opts: OdeOptions<T>) -> Result<Self, OdeError> {
        let dir = if t_dir >= t0 { T::one() } else { -T::one() };
        let k1 = f(t0, &y0).map_err(|_| OdeError::Rhs { t: t0.as_f64() })?;
        let mut s = Self {
            f,
            opts,
            t: t0,
            y: y0,
            k1,
            h: T::zero(),
            dir,
            facold: T::of(1e-4),
            steps: 0,
            last_rejected: false,
        };
        s.h = match opts.h_init {
            Some(h) => h.abs().min(opts.h_max),
            None => s.initial_step(),
        };
        Ok(s)
    }

    pub fn t(&self) -> T {
        self.t
    }

    pub fn y(&self) -> &[T; N] {
        &self.y
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    fn scale(&self, a: T, b: T) -> T {
        self.opts.atol + self.opts.rtol * a.abs().max(b.abs())
    }

    fn initial_step(&mut self) -> T {
        let n = T::of_usize(N);
        let mut d0 = T::zero();
        let mut d1 = T::zero();
        for i in 0..N {
            let sk = self.scale(self.y[i], self.y[i]);
            d0 = d0 + (self.y[i] / sk).powi(2);
            d1 = d1 + (self.k1[i] / sk).powi(2);
        }
        d0 = (d0 / n).sqrt();
        d1 = (d1 / n).sqrt();
        let tiny = T::of(1e-10);
        let mut h0 = if d0 <= tiny || d1 <= tiny {
            T::of(1e-6)
        } else {
            T::of(0.01) * d0 / d1
        };
        h0 = h0.min(self.opts.h_max);
        let y1 = axpy(&self.y, self.dir * h0, &[(1.0, &self.k1)]);
        let d2 = match (self.f)(self.t + self.dir * h0, &y1) {
            Ok(k2) => {
                let mut acc = T::zero();
                for ((&yi, &a), &b) in self.y.iter().zip(&k2).zip(&self.k1) {
                    acc = acc + ((a - b) / self.scale(yi, yi)).powi(2);
                }
                (acc / n).sqrt() / h0
            }
            Err(_) => return h0 * T::of(0.01),
        };
        let m = d1.max(d2);
        let h1 = if m <= T::of(1e-15) {
            (h0 * T::of(1e-3)).max(T::of(1e-6))
        } else {
            (T::of(0.01) / m).powf(T::of(0.2))
        };
        (T::of(100.0) * h0).min(h1).min(self.opts.h_max)
    }

    /// Attempts the stages for step `h` (signed). `None` if the right-hand
    /// side failed at some stage.
    fn attempt(&mut self, h: T) -> Option<Stages<T, N>> {
        let t = self.t;
        let y = self.y;
        let k1 = self.k1;
        let f = &mut self.f;
        let k2 = f(t + T::of(C2) * h, &axpy(&y, h, &[(A21, &k1)])).ok()?;
        let k3 = f(t + T::of(C3) * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)])).ok()?;
        let k4 = f(
            t + T::of(C4) * h,
            &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
        )
        .ok()?;
        let k5 = f(
            t + T::of(C5) * h,
            &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        )
        .ok()?;
        let k6 = f(
            t + h,
            &axpy(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        )
        .ok()?;
        let y1 = axpy(&y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let k7 = f(t + h, &y1).ok()?;
        let err = axpy(
            &[T::zero(); N],
            h,
            &[(E1, &k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)],
        );
        Some((y1, err, [k1, k2, k3, k4, k5, k6, k7]))
    }

    /// Takes one accepted step without passing `t_limit`.
    pub fn step_to(&mut self, t_limit: T) -> Result<Step<T, N>, OdeError> {
        let beta = T::of(0.04);
        let expo1 = T::of(0.2) - beta * T::of(0.75);
        let safe = T::of(0.9);
        let facc1 = T::of(5.0); // max growth
        let facc2 = T::of(0.1); // max shrink
        loop {
            if self.steps >= self.opts.max_steps {
                return Err(OdeError::StepLimit(self.opts.max_steps));
            }
            let remaining = (t_limit - self.t) * self.dir;
            let mut habs = self.h.min(self.opts.h_max);
            let mut last = false;
            // stretch a little to avoid a sliver step before the limit
            if habs >= remaining * T::of(0.999_999) {
                habs = remaining;
                last = true;
            }
            if habs < self.opts.h_min && !last {
                return Err(OdeError::StepUnderflow { t: self.t.as_f64() });
            }
            let h = self.dir * habs;
            self.steps += 1;
            let Some((y1, errv, k)) = self.attempt(h) else {
                self.h = habs * T::of(0.25);
                self.last_rejected = true;
                if self.h < self.opts.h_min {
                    return Err(OdeError::Rhs { t: self.t.as_f64() });
                }
                continue;
            };
            let mut err = T::zero();
            for i in 0..N {
                let sk = self.scale(self.y[i], y1[i]);
                err = err + (errv[i] / sk).powi(2);
            }
            err = (err / T::of_usize(N)).sqrt();
            if !err.is_finite() {
                self.h = habs * T::of(0.25);
                self.last_rejected = true;
                if self.h < self.opts.h_min {
                    return Err(OdeError::Rhs { t: self.t.as_f64() });
                }
                continue;
            }
            let fac11 = err.powf(expo1);
            if err <= T::one() {
                let mut fac = fac11 / self.facold.powf(beta);
                fac = facc2.max(facc1.min(fac / safe));
                let mut hnew = habs / fac;
                if self.last_rejected {
                    hnew = hnew.min(habs);
                }
                self.facold = err.max(T::of(1e-4));
                self.last_rejected = false;

                let t0 = self.t;
                let t1 = if last { t_limit } else { self.t + h };
                let y0 = self.y;
                let k7 = k[6];
                let mut cont = [[T::zero(); N]; 5];
                for i in 0..N {
                    let dy = y1[i] - y0[i];
                    let bspl = h * k[0][i] - dy;
                    cont[0][i] = y0[i];
                    cont[1][i] = dy;
                    cont[2][i] = bspl;
                    cont[3][i] = dy - h * k7[i] - bspl;
                    cont[4][i] = h
                        * (T::of(D1) * k[0][i]
                            + T::of(D3) * k[2][i]
                            + T::of(D4) * k[3][i]
                            + T::of(D5) * k[4][i]
                            + T::of(D6) * k[5][i]
                            + T::of(D7) * k7[i]);
                }
                self.t = t1;
                self.y = y1;
                self.k1 = k7;
                // keep the controller's proposal when the step was clipped
                if !last || hnew < self.h {
                    self.h = hnew;
                }
                return Ok(Step { t0, t1, y0, y1, cont });
            }
            let hnew = habs / facc1.min(fac11 / safe);
            self.h = hnew;
            self.last_rejected = true;
        }
    }
}
