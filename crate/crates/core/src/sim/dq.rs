use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// A direct/quadrature pair of per-unit quantities.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Dq {
    pub d: f64,
    pub q: f64,
}

impl Dq {
    pub const ZERO: Dq = Dq { d: 0.0, q: 0.0 };

    pub const fn new(d: f64, q: f64) -> Self {
        Dq { d, q }
    }

    pub fn magnitude(self) -> f64 {
        self.d.hypot(self.q)
    }

    pub fn is_finite(self) -> bool {
        self.d.is_finite() && self.q.is_finite()
    }

    /// Multiplication by the imaginary unit: `j * (d + jq) = -q + jd`.
    pub fn rotate_quarter(self) -> Self {
        Dq::new(-self.q, self.d)
    }

    /// Express a quantity given in a frame at angle 0 in a frame leading by `angle`.
    pub fn into_frame(self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Dq::new(c * self.d + s * self.q, -s * self.d + c * self.q)
    }

    /// Inverse of [`Dq::into_frame`].
    pub fn from_frame(self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Dq::new(c * self.d - s * self.q, s * self.d + c * self.q)
    }

    pub fn clamp(self, bound: f64) -> Self {
        Dq::new(self.d.clamp(-bound, bound), self.q.clamp(-bound, bound))
    }
}

impl Add for Dq {
    type Output = Dq;
    fn add(self, rhs: Dq) -> Dq {
        Dq::new(self.d + rhs.d, self.q + rhs.q)
    }
}

impl AddAssign for Dq {
    fn add_assign(&mut self, rhs: Dq) {
        self.d += rhs.d;
        self.q += rhs.q;
    }
}

impl Sub for Dq {
    type Output = Dq;
    fn sub(self, rhs: Dq) -> Dq {
        Dq::new(self.d - rhs.d, self.q - rhs.q)
    }
}

impl Mul<f64> for Dq {
    type Output = Dq;
    fn mul(self, k: f64) -> Dq {
        Dq::new(self.d * k, self.q * k)
    }
}

impl Neg for Dq {
    type Output = Dq;
    fn neg(self) -> Dq {
        Dq::new(-self.d, -self.q)
    }
}

/// Wrap an angle into `[-pi, pi)`.
pub fn wrap_angle(angle: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let wrapped = (angle + PI).rem_euclid(TAU) - PI;
    if wrapped >= PI {
        wrapped - TAU
    } else {
        wrapped
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_rotation_round_trips() {
        let x = Dq::new(0.3, -1.2);
        let back = x.into_frame(0.7).from_frame(0.7);
        assert!((back - x).magnitude() < 1e-15);
        assert!((x.into_frame(0.7).magnitude() - x.magnitude()).abs() < 1e-15);
    }

    #[test]
    fn quarter_turn_matches_frame_rotation() {
        let x = Dq::new(1.0, 0.0);
        assert_eq!(x.rotate_quarter(), Dq::new(0.0, 1.0));
        let y = x.from_frame(std::f64::consts::FRAC_PI_2);
        assert!((y - Dq::new(0.0, 1.0)).magnitude() < 1e-15);
    }

    #[test]
    fn wrap_stays_in_half_open_interval() {
        use std::f64::consts::PI;
        for a in [-10.0, -PI, 0.0, PI, 3.0 * PI, 7.5] {
            let w = wrap_angle(a);
            assert!((-PI..PI).contains(&w), "{a} -> {w}");
            assert!(((a - w) / std::f64::consts::TAU).fract().abs() < 1e-9
                || (1.0 - ((a - w) / std::f64::consts::TAU).fract().abs()) < 1e-9);
        }
    }
}
