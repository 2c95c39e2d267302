//! Collapse trajectory of the mirror in null coordinates.
//!
//! The mirror is at rest for `u ≤ 0`, accelerates with `V(u) = (1 − e^{−ku})/k`
//! until `u0`, then moves inertially with slope `A = e^{−k·u0}`:
//!
//! ```text
//! V(u) = u                          u ≤ 0
//!      = (1 − e^{−ku})/k            0 ≤ u ≤ u0
//!      = V(u0) + A (u − u0)         u ≥ u0
//! ```
//!
//! The eternal variant keeps the middle branch for all `u ≥ 0`, so that
//! `V(u) → 1/k` and there is a horizon at `v = 1/k`.

use crate::error::{Error, Result};

/// Largest `k·u0` accepted for a finite trajectory; beyond this `A` loses
/// all significant digits.
pub const MAX_K_U0: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TrajectoryVariant {
    FiniteCollapse,
    EternalCollapse,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollapseTrajectory {
    k: f64,
    u0: f64,
    a: f64,
    v0: f64,
    ubar0: f64,
}

impl CollapseTrajectory {
    /// Finite collapse with frequency `k > 0` and acceleration duration
    /// `u0 ≥ 0` (`u0 = 0` is a mirror at rest).
    pub fn finite(k: f64, u0: f64) -> Result<Self> {
        check_k(k)?;
        if !(u0 >= 0.0) || !u0.is_finite() {
            return Err(Error::domain(format!("u0 must be finite and non-negative, got {u0}")));
        }
        if k * u0 > MAX_K_U0 {
            return Err(Error::domain(format!(
                "k·u0 = {} exceeds {MAX_K_U0}; the final slope underflows (use the eternal variant)",
                k * u0
            )));
        }
        Ok(Self {
            k,
            u0,
            a: (-k * u0).exp(),
            v0: -(-k * u0).exp_m1() / k,
            ubar0: -2.0 * (-0.5 * k * u0).exp_m1() / k,
        })
    }

    pub fn eternal(k: f64) -> Result<Self> {
        check_k(k)?;
        Ok(Self {
            k,
            u0: f64::INFINITY,
            a: 0.0,
            v0: 1.0 / k,
            ubar0: 2.0 / k,
        })
    }

    pub fn variant(&self) -> TrajectoryVariant {
        if self.u0.is_finite() {
            TrajectoryVariant::FiniteCollapse
        } else {
            TrajectoryVariant::EternalCollapse
        }
    }

    pub fn is_finite(&self) -> bool {
        self.u0.is_finite()
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    /// `u0`, `+∞` for the eternal variant.
    pub fn u0(&self) -> f64 {
        self.u0
    }

    /// Final slope `A = e^{−k·u0}` (0 for the eternal variant).
    pub fn final_slope(&self) -> f64 {
        self.a
    }

    /// `V(u0)`; the horizon `1/k` for the eternal variant.
    pub fn v0(&self) -> f64 {
        self.v0
    }

    /// `ū(u0)`; `2/k` for the eternal variant.
    pub fn ubar0(&self) -> f64 {
        self.ubar0
    }

    /// Advanced time `V(u)` of the ray reflected at retarded time `u`.
    pub fn ray_advance(&self, u: f64) -> f64 {
        if u <= 0.0 {
            u
        } else if u <= self.u0 {
            -(-self.k * u).exp_m1() / self.k
        } else {
            self.v0 + self.a * (u - self.u0)
        }
    }

    /// Inverse map `U(v)`.
    pub fn ray_retard(&self, v: f64) -> Result<f64> {
        if v <= 0.0 {
            Ok(v)
        } else if v <= self.v0 && !(self.u0.is_infinite() && v >= self.v0) {
            Ok(-(-self.k * v).ln_1p() / self.k)
        } else if self.is_finite() {
            Ok(self.u0 + (v - self.v0) / self.a)
        } else {
            Err(Error::domain(format!(
                "v = {v} lies beyond the horizon 1/k = {}; no retarded preimage",
                self.v0
            )))
        }
    }

    /// `V′(u)`, continuous everywhere.
    pub fn ray_velocity(&self, u: f64) -> f64 {
        if u <= 0.0 {
            1.0
        } else if u <= self.u0 {
            (-self.k * u).exp()
        } else {
            self.a
        }
    }

    /// `V″(u)`, taking the right-hand limit at the two junctions.
    pub fn ray_acceleration(&self, u: f64) -> f64 {
        if u < 0.0 || u >= self.u0 {
            0.0
        } else {
            -self.k * (-self.k * u).exp()
        }
    }

    /// Points where `V″` jumps, as `(u, left limit, right limit)`.
    pub fn acceleration_jumps(&self) -> Vec<(f64, f64, f64)> {
        if self.u0 == 0.0 {
            return Vec::new();
        }
        let mut jumps = vec![(0.0, 0.0, -self.k)];
        if self.is_finite() {
            jumps.push((self.u0, -self.k * self.a, 0.0));
        }
        jumps
    }

    /// Co-moving retarded coordinate `ū(u)`, with `ū′ = √V′`.
    pub fn comoving_u(&self, u: f64) -> f64 {
        if u <= 0.0 {
            u
        } else if u <= self.u0 {
            -2.0 * (-0.5 * self.k * u).exp_m1() / self.k
        } else {
            self.ubar0 + self.a.sqrt() * (u - self.u0)
        }
    }

    /// `ū′(u) = √V′(u)`.
    pub fn comoving_u_rate(&self, u: f64) -> f64 {
        if u <= 0.0 {
            1.0
        } else if u <= self.u0 {
            (-0.5 * self.k * u).exp()
        } else {
            self.a.sqrt()
        }
    }

    /// Co-moving advanced coordinate `v̄(v)`; `v̄(V(u)) = ū(u)`.
    pub fn comoving_v(&self, v: f64) -> Result<f64> {
        if v <= 0.0 {
            Ok(v)
        } else if v < self.v0 || (self.is_finite() && v == self.v0) {
            Ok(2.0 * v / (1.0 + (1.0 - self.k * v).sqrt()))
        } else if self.is_finite() {
            Ok(self.ubar0 + (v - self.v0) / self.a.sqrt())
        } else {
            Err(Error::domain(format!(
                "v = {v} lies beyond the horizon 1/k = {}",
                self.v0
            )))
        }
    }

    /// `v̄′(v) = 1/√V′(U(v))`.
    pub fn comoving_v_rate(&self, v: f64) -> Result<f64> {
        let u = self.ray_retard(v)?;
        Ok(1.0 / self.comoving_u_rate(u))
    }
}

fn check_k(k: f64) -> Result<()> {
    if k > 0.0 && k.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("k must be positive and finite, got {k}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::LN_2;

    fn traj() -> CollapseTrajectory {
        CollapseTrajectory::finite(1.0, 10.0).unwrap()
    }

    #[test]
    fn advance_examples() {
        let t = traj();
        assert_eq!(t.ray_advance(0.0), 0.0);
        assert!((t.ray_advance(LN_2) - 0.5).abs() < 1e-16);
        let e10 = (-10.0f64).exp();
        let expect = (1.0 - e10) + e10 * 2.0;
        assert!((t.ray_advance(12.0) - expect).abs() < 4.0 * f64::EPSILON);
    }

    #[test]
    fn retard_examples() {
        let t = traj();
        assert_eq!(t.ray_retard(0.0).unwrap(), 0.0);
        assert!((t.ray_retard(0.5).unwrap() - LN_2).abs() < 1e-16);
        for &u in &[-3.0, 0.7, 15.0] {
            assert!((t.ray_retard(t.ray_advance(u)).unwrap() - u).abs() < 1e-12, "u = {u}");
        }
    }

    #[test]
    fn velocity_examples() {
        let t = traj();
        assert_eq!(t.ray_velocity(-5.0), 1.0);
        let a = (-10.0f64).exp();
        assert_eq!(t.ray_velocity(10.0), a);
        assert_eq!(t.ray_velocity(10.0 + 1e-300), a);
        assert_eq!(t.final_slope(), a);
        let h = 1e-6;
        for &u in &[-2.0, 0.3, 1.0, 4.0, 9.5, 11.0, 20.0] {
            let fd = (t.ray_advance(u + h) - t.ray_advance(u - h)) / (2.0 * h);
            assert!((fd - t.ray_velocity(u)).abs() < 1e-8, "u = {u}");
        }
    }

    #[test]
    fn comoving_examples() {
        let t = traj();
        assert_eq!(t.comoving_u(0.0), 0.0);
        assert!((t.comoving_u(2.0 * LN_2) - 1.0).abs() < 1e-15);
        assert_eq!(t.comoving_v(0.0).unwrap(), 0.0);
        assert!((t.comoving_v(0.75).unwrap() - 1.0).abs() < 1e-15);
        let h = 1e-6;
        for &u in &[1.0, 5.0, 11.0] {
            let fd = (t.comoving_u(u + h) - t.comoving_u(u - h)) / (2.0 * h);
            assert!((fd - t.ray_velocity(u).sqrt()).abs() < 1e-8, "u = {u}");
        }
        for &u in &[0.5, 3.0, 10.0] {
            let lhs = t.comoving_v(t.ray_advance(u)).unwrap();
            assert!((lhs - t.comoving_u(u)).abs() < 1e-12, "u = {u}");
        }
    }

    #[test]
    fn junction_continuity() {
        let t = traj();
        for &u in &[0.0, 10.0] {
            let eps = u * f64::EPSILON + 1e-300;
            for f in [
                |t: &CollapseTrajectory, x: f64| t.ray_advance(x),
                |t: &CollapseTrajectory, x: f64| t.ray_velocity(x),
                |t: &CollapseTrajectory, x: f64| t.comoving_u(x),
            ] {
                let l = f(&t, u - eps);
                let r = f(&t, u + eps);
                let scale = l.abs().max(r.abs()).max(f64::MIN_POSITIVE);
                assert!((l - r).abs() <= 4.0 * f64::EPSILON * scale.max(1e-300) + 1e-15, "u = {u}");
            }
        }
    }

    #[test]
    fn acceleration_jumps_one_sided() {
        let t = traj();
        let h = 1e-5;
        // one-sided second differences on each side of the junctions
        let d2 = |x: f64| (t.ray_advance(x + h) - 2.0 * t.ray_advance(x) + t.ray_advance(x - h)) / (h * h);
        assert!(d2(-2.0 * h).abs() < 1e-4);
        assert!((d2(2.0 * h) + 1.0).abs() < 1e-3);
        assert!((d2(10.0 - 2.0 * h) + t.final_slope()).abs() < 1e-3);
        assert!(d2(10.0 + 2.0 * h).abs() < 1e-4);
        let jumps = t.acceleration_jumps();
        assert_eq!(jumps.len(), 2);
        assert_eq!((jumps[0].0, jumps[1].0), (0.0, 10.0));
    }

    #[test]
    fn eternal_variant() {
        let t = CollapseTrajectory::eternal(1.0).unwrap();
        assert_eq!(t.variant(), TrajectoryVariant::EternalCollapse);
        assert!(t.ray_advance(1e6) <= 1.0);
        assert!(t.ray_velocity(800.0) == 0.0 || t.ray_velocity(800.0) < 1e-300);
        assert!(matches!(t.ray_retard(1.0), Err(Error::Domain(_))));
        assert!(matches!(t.ray_retard(2.0), Err(Error::Domain(_))));
        assert!(matches!(t.comoving_v(1.5), Err(Error::Domain(_))));
        assert!((t.ray_retard(0.5).unwrap() - LN_2).abs() < 1e-15);
        assert_eq!(t.acceleration_jumps().len(), 1);
    }

    #[test]
    fn invalid_parameters() {
        assert!(CollapseTrajectory::finite(0.0, 1.0).is_err());
        assert!(CollapseTrajectory::finite(1.0, -1.0).is_err());
        assert!(CollapseTrajectory::finite(1.0, f64::NAN).is_err());
        assert!(CollapseTrajectory::finite(1.0, 701.0).is_err());
        assert!(CollapseTrajectory::eternal(-1.0).is_err());
    }

    #[test]
    fn static_mirror() {
        let t = CollapseTrajectory::finite(1.0, 0.0).unwrap();
        for &u in &[-1.0, 0.0, 3.0] {
            assert_eq!(t.ray_advance(u), u);
            assert_eq!(t.ray_velocity(u), 1.0);
        }
        assert!(t.acceleration_jumps().is_empty());
    }

    // Rounding floor of U(V(u)): one ulp of V divided by the local slope.
    fn inverse_floor(t: &CollapseTrajectory, u: f64) -> f64 {
        4.0 * f64::EPSILON * t.ray_advance(u).abs().max(f64::MIN_POSITIVE) / t.ray_velocity(u)
    }

    proptest! {
        #[test]
        fn inverse_pair(k in 0.05f64..5.0, ku0 in 0.5f64..40.0, x in -1.0f64..1.0) {
            let t = CollapseTrajectory::finite(k, ku0 / k).unwrap();
            let u = x * (t.u0() + 1e3);
            let back = t.ray_retard(t.ray_advance(u)).unwrap();
            let tol = 1e-12 * u.abs().max(1.0) + inverse_floor(&t, u);
            prop_assert!((back - u).abs() <= tol, "u={u} back={back}");
        }

        #[test]
        fn monotone_and_slope_bounds(k in 0.05f64..5.0, ku0 in 0.5f64..40.0, a in -50.0f64..50.0, d in 1e-3f64..5.0) {
            let t = CollapseTrajectory::finite(k, ku0 / k).unwrap();
            let (u1, u2) = (a / k, (a + d) / k);
            let (v1, v2) = (t.ray_advance(u1), t.ray_advance(u2));
            prop_assert!(v2 >= v1 && t.comoving_u(u2) >= t.comoving_u(u1));
            // strictness is only observable when the increment exceeds the rounding of V
            if v2 - v1 > 8.0 * f64::EPSILON * v2.abs() {
                prop_assert!(t.ray_retard(v2).unwrap() > t.ray_retard(v1).unwrap());
                prop_assert!(t.comoving_v(v2).unwrap() > t.comoving_v(v1).unwrap());
                prop_assert!(t.comoving_u(u2) > t.comoving_u(u1));
            }
            let s = t.ray_velocity(u1);
            prop_assert!(s >= t.final_slope() && s <= 1.0);
            prop_assert!((t.comoving_u_rate(u1) - s.sqrt()).abs() <= 1e-15);
        }

        #[test]
        fn comoving_composition(k in 0.05f64..5.0, ku0 in 0.5f64..40.0, x in -1.0f64..1.5) {
            let t = CollapseTrajectory::finite(k, ku0 / k).unwrap();
            let u = x * t.u0();
            let lhs = t.comoving_v(t.ray_advance(u)).unwrap();
            // v̄ amplifies the rounding of V by 1/√V′
            let tol = 1e-12 * t.comoving_u(u).abs().max(1.0 / k) + inverse_floor(&t, u) * t.comoving_u_rate(u);
            prop_assert!((lhs - t.comoving_u(u)).abs() <= tol);
        }
    }

    #[test]
    fn inverse_pair_absolute_on_reference_trajectory() {
        let t = traj();
        let mut worst: f64 = 0.0;
        for i in 0..=4000 {
            let u = -1e3 + (t.u0() + 2e3) * i as f64 / 4000.0;
            let err = (t.ray_retard(t.ray_advance(u)).unwrap() - u).abs();
            worst = worst.max(err / u.abs().max(1.0));
        }
        assert!(worst < 1e-12, "worst relative round-trip error {worst:e}");
    }
}
