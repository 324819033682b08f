//! Dormand–Prince 8(5,3) integrator with a continuous (dense) solution.
//!
//! Every accepted step keeps its seventh-order interpolation coefficients,
//! so the returned [`DenseSolution`] can be evaluated anywhere in the
//! integration interval without re-integrating.

use crate::error::{Error, Result};

/// Right-hand side of a first-order system `dy/dt = f(t, y)`.
pub trait OdeSystem {
    fn dim(&self) -> usize;
    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]);
}

/// Mixed absolute/relative error tolerance used by the step-size controller.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Tolerance {
    pub atol: f64,
    pub rtol: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            atol: 1e-12,
            rtol: 1e-10,
        }
    }
}

impl Tolerance {
    pub fn new(atol: f64, rtol: f64) -> Self {
        Self { atol, rtol }
    }

    /// Both tolerances divided by `factor`.
    pub fn tightened(self, factor: f64) -> Self {
        Self {
            atol: self.atol / factor,
            rtol: self.rtol / factor,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.atol > 0.0 && self.rtol > 0.0 && self.atol.is_finite() && self.rtol.is_finite()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct IntegratorOptions {
    pub tol: Tolerance,
    pub max_steps: usize,
    /// Upper bound on |h|; `None` means the interval length.
    pub h_max: Option<f64>,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self {
            tol: Tolerance::default(),
            max_steps: 200_000,
            h_max: None,
        }
    }
}

impl From<Tolerance> for IntegratorOptions {
    fn from(tol: Tolerance) -> Self {
        Self { tol, ..Self::default() }
    }
}

/// Continuous solution built from the accepted steps of [`integrate`].
#[derive(Debug, Clone)]
pub struct DenseSolution {
    dim: usize,
    times: Vec<f64>,
    states: Vec<f64>,
    // 8 coefficient vectors per step
    coeffs: Vec<f64>,
    rhs_evals: usize,
}

impl DenseSolution {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn t0(&self) -> f64 {
        self.times[0]
    }

    pub fn t1(&self) -> f64 {
        *self.times.last().expect("non-empty")
    }

    /// Step boundaries, strictly increasing from `t0` to `t1`.
    pub fn nodes(&self) -> &[f64] {
        &self.times
    }

    pub fn steps(&self) -> usize {
        self.times.len() - 1
    }

    pub fn rhs_evals(&self) -> usize {
        self.rhs_evals
    }

    /// State at the `k`-th step boundary.
    pub fn node_state(&self, k: usize) -> &[f64] {
        &self.states[k * self.dim..(k + 1) * self.dim]
    }

    pub fn final_state(&self) -> &[f64] {
        self.node_state(self.times.len() - 1)
    }

    fn segment(&self, t: f64) -> usize {
        let steps = self.steps();
        if t <= self.times[0] {
            return 0;
        }
        if t >= self.times[steps] {
            return steps - 1;
        }
        // first node strictly greater than t, minus one
        self.times.partition_point(|&s| s <= t).saturating_sub(1).min(steps - 1)
    }

    /// Evaluates the interpolant at `t` into `out`. Times outside the
    /// integration interval are clamped to it.
    pub fn eval_into(&self, t: f64, out: &mut [f64]) {
        let d = self.dim;
        let k = self.segment(t);
        let (ta, tb) = (self.times[k], self.times[k + 1]);
        if t <= ta {
            out.copy_from_slice(self.node_state(k));
            return;
        }
        if t >= tb {
            out.copy_from_slice(self.node_state(k + 1));
            return;
        }
        let s = (t - ta) / (tb - ta);
        let s1 = 1.0 - s;
        let c = &self.coeffs[k * 8 * d..(k + 1) * 8 * d];
        for i in 0..d {
            let r = |j: usize| c[j * d + i];
            let conpar = r(4) + (r(5) + (r(6) + r(7) * s) * s1) * s;
            out[i] = r(0) + (r(1) + (r(2) + (r(3) + conpar * s1) * s) * s1) * s;
        }
    }

    pub fn eval(&self, t: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.eval_into(t, &mut out);
        out
    }
}

/// Integrates `sys` from `(t0, y0)` to `t1 > t0`.
pub fn integrate<S: OdeSystem + ?Sized>(
    sys: &S,
    t0: f64,
    y0: &[f64],
    t1: f64,
    opts: &IntegratorOptions,
) -> Result<DenseSolution> {
    let d = sys.dim();
    assert_eq!(y0.len(), d, "initial state has wrong dimension");
    if !(t1 > t0) || !t0.is_finite() || !t1.is_finite() {
        return Err(Error::InvalidInput(format!(
            "integration interval must satisfy t0 < t1, got [{t0}, {t1}]"
        )));
    }
    if !opts.tol.is_valid() {
        return Err(Error::InvalidInput("integrator tolerances must be positive".into()));
    }
    if y0.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite initial state".into()));
    }

    let Tolerance { atol, rtol } = opts.tol;
    let span = t1 - t0;
    let h_max = opts.h_max.unwrap_or(span).min(span);

    let mut ws = Workspace::new(d);
    let mut sol = DenseSolution {
        dim: d,
        times: vec![t0],
        states: y0.to_vec(),
        coeffs: Vec::new(),
        rhs_evals: 0,
    };

    let mut t = t0;
    let mut y = y0.to_vec();
    sys.rhs(t, &y, &mut ws.k1);
    let mut evals = 1usize;
    let mut h = initial_step(sys, t, &y, &ws.k1.clone(), h_max, atol, rtol, &mut ws);
    evals += 1;

    let mut last_rejected = false;
    let mut steps = 0usize;

    loop {
        if steps >= opts.max_steps {
            return Err(Error::StepSizeUnderflow { t });
        }
        if h.abs() <= 16.0 * f64::EPSILON * t.abs().max(1.0) {
            return Err(Error::StepSizeUnderflow { t });
        }
        let last = t + 1.01 * h >= t1;
        if last {
            h = t1 - t;
        }

        ws.stages(sys, t, &y, h);
        evals += 11;
        steps += 1;

        let err = ws.error_norm(&y, h, atol, rtol);
        let fac11 = if err.is_finite() {
            err.powf(0.125)
        } else {
            f64::INFINITY
        };

        if err.is_finite() && err <= 1.0 {
            let t_new = if last { t1 } else { t + h };
            // k4 <- f(t_new, y_new)
            sys.rhs(t_new, &ws.y_new, &mut ws.k4);
            evals += 1;
            ws.dense_coeffs(sys, t, &y, h);
            evals += 3;
            if ws.y_new.iter().any(|v| !v.is_finite()) {
                return Err(Error::StepSizeUnderflow { t });
            }
            sol.coeffs.extend_from_slice(&ws.cont);
            sol.times.push(t_new);
            sol.states.extend_from_slice(&ws.y_new);

            std::mem::swap(&mut ws.k1, &mut ws.k4);
            y.copy_from_slice(&ws.y_new);
            t = t_new;
            if last {
                break;
            }
            let fac = (fac11 / 0.9).clamp(1.0 / 6.0, 1.0 / 0.333);
            let mut h_new = h / fac;
            if last_rejected {
                h_new = h_new.min(h);
            }
            last_rejected = false;
            h = h_new.min(h_max);
        } else {
            let shrink = if fac11.is_finite() {
                (1.0 / 0.333f64).min(fac11 / 0.9)
            } else {
                10.0
            };
            h /= shrink;
            last_rejected = true;
        }
    }
    sol.rhs_evals = evals;
    Ok(sol)
}

#[allow(clippy::too_many_arguments)]
fn initial_step<S: OdeSystem + ?Sized>(
    sys: &S,
    t: f64,
    y: &[f64],
    f0: &[f64],
    h_max: f64,
    atol: f64,
    rtol: f64,
    ws: &mut Workspace,
) -> f64 {
    let d = y.len();
    let mut dnf = 0.0;
    let mut dny = 0.0;
    for i in 0..d {
        let sk = atol + rtol * y[i].abs();
        dnf += (f0[i] / sk).powi(2);
        dny += (y[i] / sk).powi(2);
    }
    let mut h = if dnf <= 1e-10 || dny <= 1e-10 {
        1e-6
    } else {
        (dny / dnf).sqrt() * 0.01
    };
    h = h.min(h_max);
    for i in 0..d {
        ws.tmp[i] = y[i] + h * f0[i];
    }
    sys.rhs(t + h, &ws.tmp, &mut ws.k2);
    let mut der2 = 0.0;
    for i in 0..d {
        let sk = atol + rtol * y[i].abs();
        der2 += ((ws.k2[i] - f0[i]) / sk).powi(2);
    }
    der2 = der2.sqrt() / h;
    let der12 = der2.abs().max(dnf.sqrt());
    let h1 = if der12 <= 1e-15 {
        (h.abs() * 1e-3).max(1e-6)
    } else {
        (0.01 / der12).powf(1.0 / 8.0)
    };
    (100.0 * h).min(h1).min(h_max)
}

struct Workspace {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    k5: Vec<f64>,
    k6: Vec<f64>,
    k7: Vec<f64>,
    k8: Vec<f64>,
    k9: Vec<f64>,
    k10: Vec<f64>,
    k11: Vec<f64>,
    k12: Vec<f64>,
    k14: Vec<f64>,
    k15: Vec<f64>,
    k16: Vec<f64>,
    tmp: Vec<f64>,
    y_new: Vec<f64>,
    y_stage12: Vec<f64>,
    cont: Vec<f64>,
}

impl Workspace {
    fn new(d: usize) -> Self {
        let z = || vec![0.0; d];
        Self {
            k1: z(),
            k2: z(),
            k3: z(),
            k4: z(),
            k5: z(),
            k6: z(),
            k7: z(),
            k8: z(),
            k9: z(),
            k10: z(),
            k11: z(),
            k12: z(),
            k14: z(),
            k15: z(),
            k16: z(),
            tmp: z(),
            y_new: z(),
            y_stage12: z(),
            cont: vec![0.0; 8 * d],
        }
    }

    fn combine(tmp: &mut [f64], y: &[f64], h: f64, terms: &[(f64, &[f64])]) {
        for i in 0..y.len() {
            let mut acc = 0.0;
            for (a, k) in terms {
                acc += a * k[i];
            }
            tmp[i] = y[i] + h * acc;
        }
    }

    /// The twelve stages of one step plus the eighth-order update in `y_new`.
    /// `k4` ends up holding the eighth-order increment direction and `k5` is free.
    fn stages<S: OdeSystem + ?Sized>(&mut self, sys: &S, t: f64, y: &[f64], h: f64) {
        use tableau::*;
        let mut tmp = std::mem::take(&mut self.tmp);

        Self::combine(&mut tmp, y, h, &[(A21, &self.k1)]);
        sys.rhs(t + C2 * h, &tmp, &mut self.k2);
        Self::combine(&mut tmp, y, h, &[(A31, &self.k1), (A32, &self.k2)]);
        sys.rhs(t + C3 * h, &tmp, &mut self.k3);
        Self::combine(&mut tmp, y, h, &[(A41, &self.k1), (A43, &self.k3)]);
        sys.rhs(t + C4 * h, &tmp, &mut self.k4);
        Self::combine(&mut tmp, y, h, &[(A51, &self.k1), (A53, &self.k3), (A54, &self.k4)]);
        sys.rhs(t + C5 * h, &tmp, &mut self.k5);
        Self::combine(&mut tmp, y, h, &[(A61, &self.k1), (A64, &self.k4), (A65, &self.k5)]);
        sys.rhs(t + C6 * h, &tmp, &mut self.k6);
        Self::combine(
            &mut tmp,
            y,
            h,
            &[(A71, &self.k1), (A74, &self.k4), (A75, &self.k5), (A76, &self.k6)],
        );
        sys.rhs(t + C7 * h, &tmp, &mut self.k7);
        Self::combine(
            &mut tmp,
            y,
            h,
            &[
                (A81, &self.k1),
                (A84, &self.k4),
                (A85, &self.k5),
                (A86, &self.k6),
                (A87, &self.k7),
            ],
        );
        sys.rhs(t + C8 * h, &tmp, &mut self.k8);
        Self::combine(
            &mut tmp,
            y,
            h,
            &[
                (A91, &self.k1),
                (A94, &self.k4),
                (A95, &self.k5),
                (A96, &self.k6),
                (A97, &self.k7),
                (A98, &self.k8),
            ],
        );
        sys.rhs(t + C9 * h, &tmp, &mut self.k9);
        Self::combine(
            &mut tmp,
            y,
            h,
            &[
                (A101, &self.k1),
                (A104, &self.k4),
                (A105, &self.k5),
                (A106, &self.k6),
                (A107, &self.k7),
                (A108, &self.k8),
                (A109, &self.k9),
            ],
        );
        sys.rhs(t + C10 * h, &tmp, &mut self.k10);
        Self::combine(
            &mut tmp,
            y,
            h,
            &[
                (A111, &self.k1),
                (A114, &self.k4),
                (A115, &self.k5),
                (A116, &self.k6),
                (A117, &self.k7),
                (A118, &self.k8),
                (A119, &self.k9),
                (A1110, &self.k10),
            ],
        );
        sys.rhs(t + C11 * h, &tmp, &mut self.k11);
        Self::combine(
            &mut self.y_stage12,
            y,
            h,
            &[
                (A121, &self.k1),
                (A124, &self.k4),
                (A125, &self.k5),
                (A126, &self.k6),
                (A127, &self.k7),
                (A128, &self.k8),
                (A129, &self.k9),
                (A1210, &self.k10),
                (A1211, &self.k11),
            ],
        );
        sys.rhs(t + h, &self.y_stage12, &mut self.k12);

        for i in 0..y.len() {
            let inc = B1 * self.k1[i]
                + B6 * self.k6[i]
                + B7 * self.k7[i]
                + B8 * self.k8[i]
                + B9 * self.k9[i]
                + B10 * self.k10[i]
                + B11 * self.k11[i]
                + B12 * self.k12[i];
            self.y_new[i] = y[i] + h * inc;
            // keep the increment for the error estimate
            self.k5[i] = inc;
        }
        self.tmp = tmp;
    }

    fn error_norm(&self, y: &[f64], h: f64, atol: f64, rtol: f64) -> f64 {
        use tableau::*;
        let d = y.len();
        let mut err = 0.0;
        let mut err2 = 0.0;
        for i in 0..d {
            let sk = atol + rtol * y[i].abs().max(self.y_new[i].abs());
            let e2 = self.k5[i] - BHH1 * self.k1[i] - BHH2 * self.k9[i] - BHH3 * self.k12[i];
            err2 += (e2 / sk).powi(2);
            let e = ER1 * self.k1[i]
                + ER6 * self.k6[i]
                + ER7 * self.k7[i]
                + ER8 * self.k8[i]
                + ER9 * self.k9[i]
                + ER10 * self.k10[i]
                + ER11 * self.k11[i]
                + ER12 * self.k12[i];
            err += (e / sk).powi(2);
        }
        let mut deno = err + 0.01 * err2;
        if deno <= 0.0 {
            deno = 1.0;
        }
        h.abs() * err * (1.0 / (deno * d as f64)).sqrt()
    }

    /// Dense-output coefficients for the step just accepted. Requires `k4`
    /// to hold f(t + h, y_new).
    fn dense_coeffs<S: OdeSystem + ?Sized>(&mut self, sys: &S, t: f64, y: &[f64], h: f64) {
        use tableau::*;
        let d = y.len();
        let mut tmp = std::mem::take(&mut self.tmp);

        Self::combine(
            &mut tmp,
            y,
            h,
            &[
                (A141, &self.k1),
                (A147, &self.k7),
                (A148, &self.k8),
                (A149, &self.k9),
                (A1410, &self.k10),
                (A1411, &self.k11),
                (A1412, &self.k12),
                (A1413, &self.k4),
            ],
        );
        sys.rhs(t + C14 * h, &tmp, &mut self.k14);
        Self::combine(
            &mut tmp,
            y,
            h,
            &[
                (A151, &self.k1),
                (A156, &self.k6),
                (A157, &self.k7),
                (A158, &self.k8),
                (A1511, &self.k11),
                (A1512, &self.k12),
                (A1513, &self.k4),
                (A1514, &self.k14),
            ],
        );
        sys.rhs(t + C15 * h, &tmp, &mut self.k15);
        Self::combine(
            &mut tmp,
            y,
            h,
            &[
                (A161, &self.k1),
                (A166, &self.k6),
                (A167, &self.k7),
                (A168, &self.k8),
                (A169, &self.k9),
                (A1613, &self.k4),
                (A1614, &self.k14),
                (A1615, &self.k15),
            ],
        );
        sys.rhs(t + C16 * h, &tmp, &mut self.k16);
        self.tmp = tmp;

        let c = &mut self.cont;
        for i in 0..d {
            let ydiff = self.y_new[i] - y[i];
            let bspl = h * self.k1[i] - ydiff;
            c[i] = y[i];
            c[d + i] = ydiff;
            c[2 * d + i] = bspl;
            c[3 * d + i] = ydiff - h * self.k4[i] - bspl;
            let (k1, k6, k7, k8, k9, k10, k11, k12) = (
                self.k1[i],
                self.k6[i],
                self.k7[i],
                self.k8[i],
                self.k9[i],
                self.k10[i],
                self.k11[i],
                self.k12[i],
            );
            let (k13, k14, k15, k16) = (self.k4[i], self.k14[i], self.k15[i], self.k16[i]);
            for (row, dd) in D_ROWS.iter().enumerate() {
                let v = dd[0] * k1
                    + dd[1] * k6
                    + dd[2] * k7
                    + dd[3] * k8
                    + dd[4] * k9
                    + dd[5] * k10
                    + dd[6] * k11
                    + dd[7] * k12
                    + dd[8] * k13
                    + dd[9] * k14
                    + dd[10] * k15
                    + dd[11] * k16;
                c[(4 + row) * d + i] = h * v;
            }
        }
    }
}

#[allow(clippy::excessive_precision)]
mod tableau {
    pub const C2: f64 = 0.526001519587677318785587544488e-01;
    pub const C3: f64 = 0.789002279381515978178381316732e-01;
    pub const C4: f64 = 0.118350341907227396726757197510e+00;
    pub const C5: f64 = 0.281649658092772603273242802490e+00;
    pub const C6: f64 = 0.333333333333333333333333333333e+00;
    pub const C7: f64 = 0.25e+00;
    pub const C8: f64 = 0.307692307692307692307692307692e+00;
    pub const C9: f64 = 0.651282051282051282051282051282e+00;
    pub const C10: f64 = 0.6e+00;
    pub const C11: f64 = 0.857142857142857142857142857142e+00;
    pub const C14: f64 = 0.1e+00;
    pub const C15: f64 = 0.2e+00;
    pub const C16: f64 = 0.777777777777777777777777777778e+00;

    pub const B1: f64 = 5.42937341165687622380535766363e-2;
    pub const B6: f64 = 4.45031289275240888144113950566e0;
    pub const B7: f64 = 1.89151789931450038304281599044e0;
    pub const B8: f64 = -5.8012039600105847814672114227e0;
    pub const B9: f64 = 3.1116436695781989440891606237e-1;
    pub const B10: f64 = -1.52160949662516078556178806805e-1;
    pub const B11: f64 = 2.01365400804030348374776537501e-1;
    pub const B12: f64 = 4.47106157277725905176885569043e-2;

    pub const BHH1: f64 = 0.244094488188976377952755905512e+00;
    pub const BHH2: f64 = 0.733846688281611857341361741547e+00;
    pub const BHH3: f64 = 0.220588235294117647058823529412e-01;

    pub const ER1: f64 = 0.1312004499419488073250102996e-01;
    pub const ER6: f64 = -0.1225156446376204440720569753e+01;
    pub const ER7: f64 = -0.4957589496572501915214079952e+00;
    pub const ER8: f64 = 0.1664377182454986536961530415e+01;
    pub const ER9: f64 = -0.3503288487499736816886487290e+00;
    pub const ER10: f64 = 0.3341791187130174790297318841e+00;
    pub const ER11: f64 = 0.8192320648511571246570742613e-01;
    pub const ER12: f64 = -0.2235530786388629525884427845e-01;

    pub const A21: f64 = 5.26001519587677318785587544488e-2;
    pub const A31: f64 = 1.97250569845378994544595329183e-2;
    pub const A32: f64 = 5.91751709536136983633785987549e-2;
    pub const A41: f64 = 2.95875854768068491816892993775e-2;
    pub const A43: f64 = 8.87627564304205475450678981324e-2;
    pub const A51: f64 = 2.41365134159266685502369798665e-1;
    pub const A53: f64 = -8.84549479328286085344864962717e-1;
    pub const A54: f64 = 9.24834003261792003115737966543e-1;
    pub const A61: f64 = 3.7037037037037037037037037037e-2;
    pub const A64: f64 = 1.70828608729473871279604482173e-1;
    pub const A65: f64 = 1.25467687566822425016691814123e-1;
    pub const A71: f64 = 3.7109375e-2;
    pub const A74: f64 = 1.70252211019544039314978060272e-1;
    pub const A75: f64 = 6.02165389804559606850219397283e-2;
    pub const A76: f64 = -1.7578125e-2;
    pub const A81: f64 = 3.70920001185047927108779319836e-2;
    pub const A84: f64 = 1.70383925712239993810214054705e-1;
    pub const A85: f64 = 1.07262030446373284651809199168e-1;
    pub const A86: f64 = -1.53194377486244017527936158236e-2;
    pub const A87: f64 = 8.27378916381402288758473766002e-3;
    pub const A91: f64 = 6.24110958716075717114429577812e-1;
    pub const A94: f64 = -3.36089262944694129406857109825e0;
    pub const A95: f64 = -8.68219346841726006818189891453e-1;
    pub const A96: f64 = 2.75920996994467083049415600797e1;
    pub const A97: f64 = 2.01540675504778934086186788979e1;
    pub const A98: f64 = -4.34898841810699588477366255144e1;
    pub const A101: f64 = 4.77662536438264365890433908527e-1;
    pub const A104: f64 = -2.48811461997166764192642586468e0;
    pub const A105: f64 = -5.90290826836842996371446475743e-1;
    pub const A106: f64 = 2.12300514481811942347288949897e1;
    pub const A107: f64 = 1.52792336328824235832596922938e1;
    pub const A108: f64 = -3.32882109689848629194453265587e1;
    pub const A109: f64 = -2.03312017085086261358222928593e-2;
    pub const A111: f64 = -9.3714243008598732571704021658e-1;
    pub const A114: f64 = 5.18637242884406370830023853209e0;
    pub const A115: f64 = 1.09143734899672957818500254654e0;
    pub const A116: f64 = -8.14978701074692612513997267357e0;
    pub const A117: f64 = -1.85200656599969598641566180701e1;
    pub const A118: f64 = 2.27394870993505042818970056734e1;
    pub const A119: f64 = 2.49360555267965238987089396762e0;
    pub const A1110: f64 = -3.0467644718982195003823669022e0;
    pub const A121: f64 = 2.27331014751653820792359768449e0;
    pub const A124: f64 = -1.05344954667372501984066689879e1;
    pub const A125: f64 = -2.00087205822486249909675718444e0;
    pub const A126: f64 = -1.79589318631187989172765950534e1;
    pub const A127: f64 = 2.79488845294199600508499808837e1;
    pub const A128: f64 = -2.85899827713502369474065508674e0;
    pub const A129: f64 = -8.87285693353062954433549289258e0;
    pub const A1210: f64 = 1.23605671757943030647266201528e1;
    pub const A1211: f64 = 6.43392746015763530355970484046e-1;

    pub const A141: f64 = 5.61675022830479523392909219681e-2;
    pub const A147: f64 = 2.53500210216624811088794765333e-1;
    pub const A148: f64 = -2.46239037470802489917441475441e-1;
    pub const A149: f64 = -1.24191423263816360469010140626e-1;
    pub const A1410: f64 = 1.5329179827876569731206322685e-1;
    pub const A1411: f64 = 8.20105229563468988491666602057e-3;
    pub const A1412: f64 = 7.56789766054569976138603589584e-3;
    pub const A1413: f64 = -8.298e-3;
    pub const A151: f64 = 3.18346481635021405060768473261e-2;
    pub const A156: f64 = 2.83009096723667755288322961402e-2;
    pub const A157: f64 = 5.35419883074385676223797384372e-2;
    pub const A158: f64 = -5.49237485713909884646569340306e-2;
    pub const A1511: f64 = -1.08347328697249322858509316994e-4;
    pub const A1512: f64 = 3.82571090835658412954920192323e-4;
    pub const A1513: f64 = -3.40465008687404560802977114492e-4;
    pub const A1514: f64 = 1.41312443674632500278074618366e-1;
    pub const A161: f64 = -4.28896301583791923408573538692e-1;
    pub const A166: f64 = -4.69762141536116384314449447206e0;
    pub const A167: f64 = 7.68342119606259904184240953878e0;
    pub const A168: f64 = 4.06898981839711007970213554331e0;
    pub const A169: f64 = 3.56727187455281109270669543021e-1;
    pub const A1613: f64 = -1.39902416515901462129418009734e-3;
    pub const A1614: f64 = 2.9475147891527723389556272149e0;
    pub const A1615: f64 = -9.15095847217987001081870187138e0;

    // rows of d coefficients against (k1, k6, k7, k8, k9, k10, k11, k12, k13, k14, k15, k16)
    pub const D_ROWS: [[f64; 12]; 4] = [
        [
            -0.84289382761090128651353491142e+01,
            0.56671495351937776962531783590e+00,
            -0.30689499459498916912797304727e+01,
            0.23846676565120698287728149680e+01,
            0.21170345824450282767155149946e+01,
            -0.87139158377797299206789907490e+00,
            0.22404374302607882758541771650e+01,
            0.63157877876946881815570249290e+00,
            -0.88990336451333310820698117400e-01,
            0.18148505520854727256656404962e+02,
            -0.91946323924783554000451984436e+01,
            -0.44360363875948939664310572000e+01,
        ],
        [
            0.10427508642579134603413151009e+02,
            0.24228349177525818288430175319e+03,
            0.16520045171727028198505394887e+03,
            -0.37454675472269020279518312152e+03,
            -0.22113666853125306036270938578e+02,
            0.77334326684722638389603898808e+01,
            -0.30674084731089398182061213626e+02,
            -0.93321305264302278729567221706e+01,
            0.15697238121770843886131091075e+02,
            -0.31139403219565177677282850411e+02,
            -0.93529243588444783865713862664e+01,
            0.35816841486394083752465898540e+02,
        ],
        [
            0.19985053242002433820987653617e+02,
            -0.38703730874935176555105901742e+03,
            -0.18917813819516756882830838328e+03,
            0.52780815920542364900561016686e+03,
            -0.11573902539959630126141871134e+02,
            0.68812326946963000169666922661e+01,
            -0.10006050966910838403183860980e+01,
            0.77771377980534432092869265740e+00,
            -0.27782057523535084065932004339e+01,
            -0.60196695231264120758267380846e+02,
            0.84320405506677161018159903784e+02,
            0.11992291136182789328035130030e+02,
        ],
        [
            -0.25693933462703749003312586129e+02,
            -0.15418974869023643374053993627e+03,
            -0.23152937917604549567536039109e+03,
            0.35763911791061412378285349910e+03,
            0.93405324183624310003907691704e+02,
            -0.37458323136451633156875139351e+02,
            0.10409964950896230045147246184e+03,
            0.29840293426660503123344363579e+02,
            -0.43533456590011143754432175058e+02,
            0.96324553959188282948394950600e+02,
            -0.39177261675615439165231486172e+02,
            -0.14972683625798562581422125276e+03,
        ],
    ];
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Oscillator;
    impl OdeSystem for Oscillator {
        fn dim(&self) -> usize {
            2
        }
        fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
            dy[0] = y[1];
            dy[1] = -y[0];
        }
    }

    struct Decay;
    impl OdeSystem for Decay {
        fn dim(&self) -> usize {
            1
        }
        fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]) {
            dy[0] = -2.0 * t * y[0];
        }
    }

    struct Blowup;
    impl OdeSystem for Blowup {
        fn dim(&self) -> usize {
            1
        }
        fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
            dy[0] = y[0] * y[0];
        }
    }

    #[test]
    fn oscillator_endpoint_and_dense_output() {
        let sol = integrate(&Oscillator, 0.0, &[1.0, 0.0], 10.0, &IntegratorOptions::default()).unwrap();
        let end = sol.final_state();
        assert!((end[0] - 10f64.cos()).abs() < 1e-9);
        assert!((end[1] + 10f64.sin()).abs() < 1e-9);
        for k in 0..200 {
            let t = 10.0 * k as f64 / 199.0;
            let v = sol.eval(t);
            assert!((v[0] - t.cos()).abs() < 1e-9, "t={t}");
            assert!((v[1] + t.sin()).abs() < 1e-9, "t={t}");
        }
    }

    #[test]
    fn time_dependent_rhs() {
        let sol = integrate(&Decay, 0.0, &[1.0], 2.0, &IntegratorOptions::default()).unwrap();
        for t in [0.3, 0.77, 1.5, 2.0] {
            let err = (sol.eval(t)[0] - (-t * t).exp()).abs();
            assert!(err < 1e-9, "t={t} err={err:e}");
        }
    }

    #[test]
    fn nodes_are_increasing_and_span_interval() {
        let sol = integrate(&Oscillator, 1.0, &[0.0, 1.0], 4.0, &IntegratorOptions::default()).unwrap();
        assert_eq!(sol.t0(), 1.0);
        assert_eq!(sol.t1(), 4.0);
        assert!(sol.nodes().windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn blowup_reports_step_size_underflow() {
        // y' = y^2, y(0) = 1 blows up at t = 1
        let err = integrate(&Blowup, 0.0, &[1.0], 2.0, &IntegratorOptions::default()).unwrap_err();
        assert!(matches!(err, Error::StepSizeUnderflow { .. }), "{err:?}");
    }

    #[test]
    fn rejects_reversed_interval() {
        assert!(integrate(&Oscillator, 1.0, &[0.0, 1.0], 0.5, &IntegratorOptions::default()).is_err());
    }
}
