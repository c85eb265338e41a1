//! Noise-free observation functions `G(P)` and their Jacobians.
//!
//! Coordinates are TX positions relative to RX 1 in the ego frame, with RX 2
//! at `(L, 0)`. `x_{1j}`, `y_{1j}` locate target TX `j`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::{relative_tx_positions, VehicleLayout};
use crate::measurement::sampler::FrameSnapshot;
use crate::method::Method;

/// Points closer than this to a receiver make ranges and bearings singular.
const MIN_RANGE: f64 = 1e-3;

/// Which parameterisation of the method's observations to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Parameterization {
    /// The method's own estimator outputs.
    #[default]
    Standard,
    /// Adds the coordinates the standard form eliminates through its motion
    /// assumption: `(x_12, y_12)` for PDoA, `(x_12(t+Δt), y_12(t+Δt))` for AoA1.
    Extended,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObservationModel {
    pub method: Method,
    pub params: Vec<f64>,
    /// RX separation `L`.
    pub rx_separation: f64,
    /// TX separation `D`.
    pub tx_separation: f64,
    pub form: Parameterization,
}

fn param_len(method: Method, form: Parameterization) -> Result<usize> {
    match (method, form) {
        (_, Parameterization::Standard) => Ok(method.parameter_dim()),
        (Method::PDoA, Parameterization::Extended) => Ok(4),
        (Method::AoA1, Parameterization::Extended) => Ok(8),
        (m, Parameterization::Extended) => Err(Error::Domain(format!("{m} has no extended parameterisation"))),
    }
}

impl ObservationModel {
    pub fn new(method: Method, params: Vec<f64>, layout: &VehicleLayout) -> Result<Self> {
        Self::with_form(method, params, layout, Parameterization::Standard)
    }

    pub fn with_form(method: Method, params: Vec<f64>, layout: &VehicleLayout, form: Parameterization) -> Result<Self> {
        let expected = param_len(method, form)?;
        if params.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                actual: params.len(),
            });
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::DegenerateGeometry("non-finite parameter".into()));
        }
        Ok(Self {
            method,
            params,
            rx_separation: layout.rx_separation_l,
            tx_separation: layout.tx_separation_d,
            form,
        })
    }

    /// True parameters of a frame. AoA1 needs the frame's second pose pair.
    pub fn from_frame(method: Method, frame: &FrameSnapshot, layout: &VehicleLayout, form: Parameterization) -> Result<Self> {
        let [t1, t2] = relative_tx_positions(&frame.now.ego, &frame.now.target, layout);
        let later = || {
            frame
                .later
                .map(|p| relative_tx_positions(&p.ego, &p.target, layout))
                .ok_or_else(|| Error::MethodInapplicable {
                    method: "AoA1".into(),
                    assumption: "needs a second frame one interval later".into(),
                })
        };
        let params = match (method, form) {
            (Method::PDoA, Parameterization::Standard) => vec![t1.x, t1.y],
            (Method::PDoA, Parameterization::Extended) | (Method::RToF | Method::AoA2, _) => {
                vec![t1.x, t1.y, t2.x, t2.y]
            }
            (Method::AoA1, Parameterization::Standard) => {
                let [n1, _] = later()?;
                vec![t1.x, t1.y, n1.x, n1.y, t2.x, t2.y]
            }
            (Method::AoA1, Parameterization::Extended) => {
                let [n1, n2] = later()?;
                vec![t1.x, t1.y, n1.x, n1.y, t2.x, t2.y, n2.x, n2.y]
            }
        };
        Self::with_form(method, params, layout, form)
    }

    pub fn observation_dim(&self) -> usize {
        self.method.observation_dim()
    }

    pub fn parameter_dim(&self) -> usize {
        self.params.len()
    }

    /// TX positions `(x, y)` the observations depend on, as seen from RX 1.
    fn tx_points(&self) -> Vec<(f64, f64)> {
        let p = &self.params;
        match (self.method, self.form) {
            (Method::PDoA, Parameterization::Standard) => vec![(p[0], p[1]), (p[0] + self.tx_separation, p[1])],
            (Method::PDoA, _) | (Method::RToF | Method::AoA2, _) => vec![(p[0], p[1]), (p[2], p[3])],
            (Method::AoA1, Parameterization::Standard) => {
                let (dx, dy) = (p[2] - p[0], p[3] - p[1]);
                vec![(p[0], p[1]), (p[2], p[3]), (p[4], p[5]), (p[4] + dx, p[5] + dy)]
            }
            (Method::AoA1, Parameterization::Extended) => vec![(p[0], p[1]), (p[2], p[3]), (p[4], p[5]), (p[6], p[7])],
        }
    }

    fn check(&self) -> Result<()> {
        let l = self.rx_separation;
        for (x, y) in self.tx_points() {
            if x.hypot(y) < MIN_RANGE || (x - l).hypot(y) < MIN_RANGE {
                return Err(Error::DegenerateGeometry(format!("TX at ({x}, {y}) coincides with an RX")));
            }
        }
        if self.method == Method::AoA1 {
            let d = (self.params[2] - self.params[0]).hypot(self.params[3] - self.params[1]);
            if d < MIN_RANGE {
                return Err(Error::DegenerateGeometry(format!("relative displacement {d} m too small for a heading")));
            }
        }
        Ok(())
    }

    /// Noise-free observation vector `G(P)`.
    pub fn observe(&self) -> Result<Vec<f64>> {
        self.check()?;
        let l = self.rx_separation;
        let r = |x: f64, y: f64| x.hypot(y);
        let pts = self.tx_points();
        Ok(match self.method {
            Method::PDoA => {
                let ((x1, y1), (x2, y2)) = (pts[0], pts[1]);
                vec![r(x1, y1) - r(x2, y2), r(x1 - l, y1) - r(x2 - l, y2)]
            }
            Method::RToF => {
                let ((x1, y1), (x2, y2)) = (pts[0], pts[1]);
                vec![r(x1, y1), r(x2, y2), r(x1 - l, y1), r(x2 - l, y2)]
            }
            Method::AoA2 => {
                let ((x1, y1), (x2, y2)) = (pts[0], pts[1]);
                vec![y1.atan2(x1), y2.atan2(x2), y1.atan2(x1 - l), y2.atan2(x2 - l)]
            }
            Method::AoA1 => {
                let p = &self.params;
                let (dx, dy) = (p[2] - p[0], p[3] - p[1]);
                vec![
                    pts[0].1.atan2(pts[0].0),
                    pts[1].1.atan2(pts[1].0),
                    pts[2].1.atan2(pts[2].0),
                    pts[3].1.atan2(pts[3].0),
                    dx.atan2(dy),
                    dx.hypot(dy),
                ]
            }
        })
    }

    /// Analytic Jacobian `∂G/∂P`, observations by rows.
    pub fn jacobian_analytic(&self) -> Result<DMatrix<f64>> {
        self.check()?;
        let l = self.rx_separation;
        let n = self.parameter_dim();
        let mut j = DMatrix::zeros(self.observation_dim(), n);
        // Range gradient (∂r/∂x, ∂r/∂y) and bearing gradient (∂θ/∂x, ∂θ/∂y).
        let range = |x: f64, y: f64| {
            let r = x.hypot(y);
            (x / r, y / r)
        };
        let bearing = |x: f64, y: f64| {
            let r2 = x * x + y * y;
            (-y / r2, x / r2)
        };
        let p = &self.params;
        match (self.method, self.form) {
            (Method::PDoA, Parameterization::Standard) => {
                let (x, y, d) = (p[0], p[1], self.tx_separation);
                let f2 = |x: f64| 1.0 / x.hypot(y);
                let f1 = |x: f64| x * f2(x);
                j[(0, 0)] = f1(x) - f1(x + d);
                j[(1, 0)] = f1(x - l) - f1(x - l + d);
                j[(0, 1)] = y * (f2(x) - f2(x + d));
                j[(1, 1)] = y * (f2(x - l) - f2(x - l + d));
            }
            (Method::PDoA, Parameterization::Extended) => {
                for (row, shift) in [(0, 0.0), (1, l)] {
                    let (a, b) = range(p[0] - shift, p[1]);
                    let (c, d) = range(p[2] - shift, p[3]);
                    j[(row, 0)] = a;
                    j[(row, 1)] = b;
                    j[(row, 2)] = -c;
                    j[(row, 3)] = -d;
                }
            }
            (Method::RToF | Method::AoA2, _) => {
                let grad = |x: f64, y: f64| if self.method == Method::RToF { range(x, y) } else { bearing(x, y) };
                // Row order d_11, d_12, d_21, d_22; TX j occupies columns 2j, 2j+1.
                for (row, (shift, tx)) in [(0.0, 0), (0.0, 1), (l, 0), (l, 1)].into_iter().enumerate() {
                    let (gx, gy) = grad(p[2 * tx] - shift, p[2 * tx + 1]);
                    j[(row, 2 * tx)] = gx;
                    j[(row, 2 * tx + 1)] = gy;
                }
            }
            (Method::AoA1, form) => {
                let pts = self.tx_points();
                let (dx, dy) = (p[2] - p[0], p[3] - p[1]);
                for (row, col) in [(0, 0), (1, 2), (2, 4)] {
                    let (gx, gy) = bearing(pts[row].0, pts[row].1);
                    j[(row, col)] = gx;
                    j[(row, col + 1)] = gy;
                }
                let (gx, gy) = bearing(pts[3].0, pts[3].1);
                if form == Parameterization::Extended {
                    j[(3, 6)] = gx;
                    j[(3, 7)] = gy;
                } else {
                    // θ_12(t+Δt) = atan2(y_12 + d_y, x_12 + d_x) with d = A_11(t+Δt) − A_11(t).
                    j[(3, 0)] = -gx;
                    j[(3, 1)] = -gy;
                    j[(3, 2)] = gx;
                    j[(3, 3)] = gy;
                    j[(3, 4)] = gx;
                    j[(3, 5)] = gy;
                }
                // α = atan2(d_x, d_y): ∂α/∂d_x = d_y/|d|², ∂α/∂d_y = −d_x/|d|².
                // d_tr = |d|: ∂d_tr/∂d_x = d_x/|d|, ∂d_tr/∂d_y = d_y/|d|.
                let d2 = dx * dx + dy * dy;
                let d = d2.sqrt();
                let rows = [(4, dy / d2, -dx / d2), (5, dx / d, dy / d)];
                for (row, ax, ay) in rows {
                    j[(row, 0)] = -ax;
                    j[(row, 1)] = -ay;
                    j[(row, 2)] = ax;
                    j[(row, 3)] = ay;
                }
            }
        }
        Ok(j)
    }

    /// Central finite-difference Jacobian, used to guard the analytic one.
    pub fn jacobian_numeric(&self, rel_step: f64) -> Result<DMatrix<f64>> {
        let n = self.parameter_dim();
        let mut j = DMatrix::zeros(self.observation_dim(), n);
        for k in 0..n {
            let h = rel_step * self.params[k].abs().max(1.0);
            let mut plus = self.clone();
            let mut minus = self.clone();
            plus.params[k] += h;
            minus.params[k] -= h;
            let (gp, gm) = (plus.observe()?, minus.observe()?);
            for r in 0..gp.len() {
                let mut diff = gp[r] - gm[r];
                if matches!(self.method, Method::AoA2 | Method::AoA1) && r < 5 {
                    diff = crate::geometry::wrap_angle(diff);
                }
                j[(r, k)] = diff / (2.0 * h);
            }
        }
        Ok(j)
    }
}
