//! Planar frames, vehicle lamp layout and per-link line-of-sight geometry.
//!
//! The ego frame has its origin at ego RX 1 (front-left lamp), `+x` along the
//! RX 1 → RX 2 baseline (to the ego's right) and `+y` forward. Headings are
//! measured counterclockwise from `+x`, so a vehicle driving forward in its
//! own ego frame has heading `π/2`.

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Links shorter than this are treated as coincident endpoints.
const MIN_LINK_DISTANCE: f64 = 1e-3;

/// Wraps an angle into `(-π, π]`.
pub fn wrap_angle(angle: f64) -> f64 {
    let mut a = angle.rem_euclid(TAU);
    if a > PI {
        a -= TAU;
    }
    a
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl std::ops::Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl std::ops::Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

/// Planar pose. `heading` is kept in `(-π, π]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose2D {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
}

impl Pose2D {
    pub fn new(x: f64, y: f64, heading: f64) -> Self {
        Self {
            x,
            y,
            heading: wrap_angle(heading),
        }
    }

    pub fn position(&self) -> Point2 {
        Point2::new(self.x, self.y)
    }

    /// Unit vector along the heading.
    pub fn forward(&self) -> Point2 {
        Point2::new(self.heading.cos(), self.heading.sin())
    }

    /// Unit vector 90° clockwise from the heading.
    pub fn right(&self) -> Point2 {
        Point2::new(self.heading.sin(), -self.heading.cos())
    }

    /// Maps a body-frame offset `(lateral right, forward)` into this pose's frame.
    pub fn body_to_frame(&self, offset: Point2) -> Point2 {
        let f = self.forward();
        let r = self.right();
        Point2::new(
            self.x + offset.x * r.x + offset.y * f.x,
            self.y + offset.x * r.y + offset.y * f.y,
        )
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.heading.is_finite()
    }
}

/// Lamp mounting offsets in the body frame `(lateral right, forward)` from the
/// vehicle reference point (its geometric center).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LampOffsets {
    pub front_left: Point2,
    pub front_right: Point2,
    pub rear_left: Point2,
    pub rear_right: Point2,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleLayout {
    /// Separation of the two ego receivers (front lamps), meters.
    pub rx_separation_l: f64,
    /// Separation of the two target transmitters (rear lamps), meters.
    pub tx_separation_d: f64,
    pub length: f64,
    pub lamp_offsets: LampOffsets,
}

impl VehicleLayout {
    /// Layout with lamps on the front and rear bumper lines.
    pub fn new(rx_separation_l: f64, tx_separation_d: f64, length: f64) -> Result<Self> {
        if !(rx_separation_l > 0.0 && tx_separation_d > 0.0 && length > 0.0) {
            return Err(Error::Domain(format!(
                "layout dimensions must be positive (L={rx_separation_l}, D={tx_separation_d}, length={length})"
            )));
        }
        let half = length / 2.0;
        Ok(Self {
            rx_separation_l,
            tx_separation_d,
            length,
            lamp_offsets: LampOffsets {
                front_left: Point2::new(-rx_separation_l / 2.0, half),
                front_right: Point2::new(rx_separation_l / 2.0, half),
                rear_left: Point2::new(-tx_separation_d / 2.0, -half),
                rear_right: Point2::new(tx_separation_d / 2.0, -half),
            },
        })
    }

    /// Layout with every lamp at the reference point.
    pub fn with_zero_offsets(mut self) -> Self {
        let z = Point2::default();
        self.lamp_offsets = LampOffsets {
            front_left: z,
            front_right: z,
            rear_left: z,
            rear_right: z,
        };
        self
    }
}

impl Default for VehicleLayout {
    fn default() -> Self {
        Self::new(1.6, 1.6, 5.0).expect("default layout is valid")
    }
}

/// One transmitter → receiver line-of-sight link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGeometry {
    pub distance_d: f64,
    pub delay_tau: f64,
    /// Bearing of the TX seen from the RX, measured from the frame `+x` axis
    /// (the RX baseline axis in the ego frame), in `(-π, π]`.
    pub aoa_theta: f64,
    /// Angle between the RX boresight and the RX → TX ray, in `(-π, π]`.
    /// Positive is counterclockwise.
    pub incidence: f64,
    /// Angle between the TX boresight and the TX → RX ray, in `[0, π]`.
    pub irradiance_phi: f64,
}

impl LinkGeometry {
    /// The same link used in the opposite direction: the angle off the
    /// receiver boresight becomes the irradiance angle and vice versa.
    pub fn reversed(&self) -> LinkGeometry {
        LinkGeometry {
            distance_d: self.distance_d,
            delay_tau: self.delay_tau,
            aoa_theta: wrap_angle(self.aoa_theta + PI),
            incidence: self.irradiance_phi,
            irradiance_phi: self.incidence.abs(),
        }
    }
}

/// Line-of-sight geometry between a receiver and a transmitter pose.
pub fn link_geometry(rx_pose: &Pose2D, tx_pose: &Pose2D) -> Result<LinkGeometry> {
    let ray = tx_pose.position() - rx_pose.position();
    let distance = ray.norm();
    if !(distance > MIN_LINK_DISTANCE) {
        return Err(Error::CoincidentEndpoints { distance });
    }
    let bearing = ray.y.atan2(ray.x);
    let back = Point2::new(-ray.x, -ray.y);
    let boresight = tx_pose.forward();
    let dot = back.x * boresight.x + back.y * boresight.y;
    let cross = back.x * boresight.y - back.y * boresight.x;
    Ok(LinkGeometry {
        distance_d: distance,
        delay_tau: distance / SPEED_OF_LIGHT,
        aoa_theta: bearing,
        incidence: wrap_angle(bearing - rx_pose.heading),
        irradiance_phi: cross.abs().atan2(dot),
    })
}

/// Transforms a frame point into the ego RX 1 frame.
fn into_ego_frame(ego: &Pose2D, layout: &VehicleLayout, p: Point2) -> Point2 {
    let rx1 = ego.body_to_frame(layout.lamp_offsets.front_left);
    let v = p - rx1;
    let f = ego.forward();
    let r = ego.right();
    Point2::new(v.x * r.x + v.y * r.y, v.x * f.x + v.y * f.y)
}

/// Rear lamp positions of the target, `[TX 1, TX 2]` = `[(x11, y11), (x12, y12)]`,
/// expressed in the ego RX 1 frame.
pub fn relative_tx_positions(
    ego_pose: &Pose2D,
    target_pose: &Pose2D,
    layout: &VehicleLayout,
) -> [Point2; 2] {
    let lamps = &layout.lamp_offsets;
    [lamps.rear_left, lamps.rear_right]
        .map(|off| into_ego_frame(ego_pose, layout, target_pose.body_to_frame(off)))
}

/// Rear lamp poses of the target in the ego RX 1 frame; the lamps face backward.
pub fn relative_tx_poses(
    ego_pose: &Pose2D,
    target_pose: &Pose2D,
    layout: &VehicleLayout,
) -> [Pose2D; 2] {
    // In the ego frame a vehicle aligned with the ego points along +y.
    let heading = PI / 2.0 + (target_pose.heading - ego_pose.heading) + PI;
    relative_tx_positions(ego_pose, target_pose, layout).map(|p| Pose2D::new(p.x, p.y, heading))
}

/// Ego receiver poses `[RX 1, RX 2]` in the ego frame, both looking forward.
pub fn ego_rx_poses(layout: &VehicleLayout) -> [Pose2D; 2] {
    [
        Pose2D::new(0.0, 0.0, PI / 2.0),
        Pose2D::new(layout.rx_separation_l, 0.0, PI / 2.0),
    ]
}

/// All four `links[i][j]` (RX i ← TX j) between the ego receivers and the
/// target transmitters for one pair of vehicle poses.
pub fn pair_links(
    ego_pose: &Pose2D,
    target_pose: &Pose2D,
    layout: &VehicleLayout,
) -> Result<[[LinkGeometry; 2]; 2]> {
    let rx = ego_rx_poses(layout);
    let tx = relative_tx_poses(ego_pose, target_pose, layout);
    Ok([
        [link_geometry(&rx[0], &tx[0])?, link_geometry(&rx[0], &tx[1])?],
        [link_geometry(&rx[1], &tx[0])?, link_geometry(&rx[1], &tx[1])?],
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn straight_ahead_link() {
        let rx = Pose2D::new(0.0, 0.0, PI / 2.0);
        let tx = Pose2D::new(0.0, 3.0, -PI / 2.0);
        let link = link_geometry(&rx, &tx).unwrap();
        assert_eq!(link.distance_d, 3.0);
        assert!(close(link.delay_tau, 1.000_692_285_594_456e-8, 1e-22));
        assert!(close(link.aoa_theta, PI / 2.0, 1e-15));
        assert!(close(link.incidence, 0.0, 1e-15));
        assert!(close(link.irradiance_phi, 0.0, 1e-15));
    }

    #[test]
    fn diagonal_link() {
        let rx = Pose2D::new(0.0, 0.0, PI / 2.0);
        let tx = Pose2D::new(3.0, 3.0, 0.0);
        let link = link_geometry(&rx, &tx).unwrap();
        assert!(close(link.distance_d, 3.0 * 2f64.sqrt(), 1e-14));
        assert!(close(link.aoa_theta, PI / 4.0, 1e-15));
    }

    #[test]
    fn offset_link_matches_high_precision_values() {
        // Evaluated with 40-digit arithmetic.
        let rx = Pose2D::new(0.0, 0.0, PI / 2.0);
        let tx = Pose2D::new(-1.6, 5.0, -PI / 2.0);
        let link = link_geometry(&rx, &tx).unwrap();
        assert!(close(link.distance_d, 5.249_761_899_362_675, 1e-14));
        assert!(close(link.aoa_theta, 1.880_499_271_337_352_8, 1e-15));
        assert!(close(link.delay_tau, 1.751_132_077_966_642_8e-8, 1e-22));
    }

    #[test]
    fn coincident_endpoints_rejected() {
        let p = Pose2D::new(1.0, 1.0, 0.0);
        let q = Pose2D::new(1.0005, 1.0, 0.0);
        assert!(matches!(
            link_geometry(&p, &q),
            Err(Error::CoincidentEndpoints { .. })
        ));
    }

    #[test]
    fn identity_transform_with_zero_offsets() {
        let layout = VehicleLayout::default().with_zero_offsets();
        let pose = Pose2D::new(2.0, -7.0, 0.3);
        for p in relative_tx_positions(&pose, &pose, &layout) {
            assert!(p.norm() < 1e-12);
        }
    }

    #[test]
    fn parallel_target_ahead() {
        let layout = VehicleLayout::default();
        let ego = Pose2D::new(0.0, 0.0, PI / 2.0);
        // Rear bumper 5 m ahead of the front bumper.
        let target = Pose2D::new(0.0, 10.0, PI / 2.0);
        let [tx1, tx2] = relative_tx_positions(&ego, &target, &layout);
        assert!(close(tx1.x, 0.0, 1e-12) && close(tx1.y, 5.0, 1e-12));
        assert!(close(tx2.x, tx1.x + 1.6, 1e-12));
        assert!(close(tx2.y, tx1.y, 1e-12));
    }

    #[test]
    fn rotated_target_matches_rotation_matrix() {
        let layout = VehicleLayout::default();
        let ego = Pose2D::new(0.0, 0.0, PI / 2.0);
        let yaw = 30f64.to_radians();
        let target = Pose2D::new(1.0, 12.0, PI / 2.0 + yaw);
        // Body offset (right, forward) -> world via explicit rotation matrix.
        let rot = |dx: f64, dy: f64, a: f64| (a.cos() * dx - a.sin() * dy, a.sin() * dx + a.cos() * dy);
        // Body axes at heading π/2: right = +x, forward = +y; the target adds `yaw`.
        let rx1 = (-0.8, 2.5);
        for (off, got) in [(-0.8, -2.5), (0.8, -2.5)]
            .into_iter()
            .zip(relative_tx_positions(&ego, &target, &layout))
        {
            let (wx, wy) = rot(off.0, off.1, yaw);
            let expect = (1.0 + wx - rx1.0, 12.0 + wy - rx1.1);
            assert!(close(got.x, expect.0, 1e-12), "{got:?} vs {expect:?}");
            assert!(close(got.y, expect.1, 1e-12));
        }
    }

    #[test]
    fn heading_is_wrapped() {
        assert!(close(Pose2D::new(0.0, 0.0, 3.0 * PI).heading, PI, 1e-12));
        assert!(close(Pose2D::new(0.0, 0.0, -PI).heading, PI, 1e-12));
        assert!(close(wrap_angle(-0.5), -0.5, 0.0));
    }

    fn pose() -> impl Strategy<Value = Pose2D> {
        (-20.0..20.0f64, -20.0..20.0f64, -PI..PI).prop_map(|(x, y, h)| Pose2D::new(x, y, h))
    }

    proptest! {
        #[test]
        fn range_is_symmetric(a in pose(), b in pose()) {
            prop_assume!((a.position() - b.position()).norm() > 1e-2);
            let ab = link_geometry(&a, &b).unwrap();
            let ba = link_geometry(&b, &a).unwrap();
            prop_assert_eq!(ab.distance_d, ba.distance_d);
            prop_assert!((ab.delay_tau * SPEED_OF_LIGHT - ab.distance_d).abs() <= 4.0 * f64::EPSILON * ab.distance_d);
        }

        #[test]
        fn rigid_frame_change(a in pose(), b in pose(), rot in -PI..PI, tx in -10.0..10.0f64, ty in -10.0..10.0f64) {
            prop_assume!((a.position() - b.position()).norm() > 1e-2);
            // Passive change of frame: coordinates rotate by -rot after translation.
            let to_new = |p: &Pose2D| {
                let (s, c) = (-rot).sin_cos();
                let (x, y) = (p.x - tx, p.y - ty);
                Pose2D::new(c * x - s * y, s * x + c * y, p.heading - rot)
            };
            let before = link_geometry(&a, &b).unwrap();
            let after = link_geometry(&to_new(&a), &to_new(&b)).unwrap();
            prop_assert!((before.distance_d - after.distance_d).abs() < 1e-11);
            prop_assert!((before.irradiance_phi - after.irradiance_phi).abs() < 1e-10);
            prop_assert!(wrap_angle(after.aoa_theta - (before.aoa_theta - rot)).abs() < 1e-11);
            prop_assert!(wrap_angle(after.incidence - before.incidence).abs() < 1e-11);
        }
    }
}
