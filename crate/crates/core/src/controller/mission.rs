//! Target-collection mission: attraction toward the nearest uncollected
//! target with a piecewise-linear tracking speed.

use serde::{Deserialize, Serialize};

use crate::framework::{point_serde, Point};

/// Tracking speed: `max_speed` up to `near`, linear ramp to 0 at `far`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SpeedProfile {
    pub max_speed: f64,
    pub near: f64,
    pub far: f64,
}

impl Default for SpeedProfile {
    fn default() -> Self {
        Self {
            max_speed: 1.5,
            near: 20.0,
            far: 30.0,
        }
    }
}

impl SpeedProfile {
    /// Derivative of the per-robot mission cost with respect to the distance
    /// to the target.
    pub fn speed(&self, zeta: f64) -> f64 {
        if zeta <= self.near {
            self.max_speed
        } else if zeta >= self.far {
            0.0
        } else {
            self.max_speed * (self.far - zeta) / (self.far - self.near)
        }
    }

    /// Antiderivative of [`Self::speed`] vanishing at 0.
    pub fn potential(&self, zeta: f64) -> f64 {
        let v = self.max_speed;
        let ramp = self.far - self.near;
        if zeta <= self.near {
            v * zeta
        } else {
            let x = (zeta.min(self.far)) - self.near;
            v * self.near + v * (x - x * x / (2.0 * ramp))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Target {
    #[serde(with = "point_serde")]
    pub position: Point,
    pub collected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissionState {
    pub targets: Vec<Target>,
    pub collect_radius: f64,
    pub speed: SpeedProfile,
}

impl MissionState {
    pub fn new(targets: Vec<Point>, collect_radius: f64, speed: SpeedProfile) -> Self {
        Self {
            targets: targets
                .into_iter()
                .map(|position| Target {
                    position,
                    collected: false,
                })
                .collect(),
            collect_radius,
            speed,
        }
    }

    pub fn collected_count(&self) -> usize {
        self.targets.iter().filter(|t| t.collected).count()
    }

    /// Nearest uncollected target and its distance; ties go to the lowest index.
    pub fn nearest(&self, p: &Point) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for (k, t) in self.targets.iter().enumerate().filter(|(_, t)| !t.collected) {
            let d = (p - &t.position).norm();
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((k, d));
            }
        }
        best
    }

    /// Surrogate mission cost `sum_i f(zeta_i)` with `f' = speed`. Only the
    /// gradient drives the controller; this value is for logging and checks.
    pub fn cost(&self, positions: &[Point]) -> f64 {
        positions
            .iter()
            .filter_map(|p| self.nearest(p))
            .map(|(_, zeta)| self.speed.potential(zeta))
            .sum()
    }

    /// `f'(zeta_i) (p_i - tau_i) / zeta_i` per robot; zero yaw gradient.
    pub fn grad(&self, positions: &[Point]) -> Vec<Point> {
        positions
            .iter()
            .map(|p| match self.nearest(p) {
                Some((k, zeta)) if zeta > 0.0 => (p - &self.targets[k].position) * (self.speed.speed(zeta) / zeta),
                _ => Point::zeros(p.len()),
            })
            .collect()
    }

    /// Marks targets within the collection radius, robot by robot, each
    /// robot repeatedly taking its nearest uncollected target. Returns
    /// `(robot, target)` pairs in collection order.
    pub fn collect(&mut self, positions: &[Point]) -> Vec<(usize, usize)> {
        let mut events = Vec::new();
        for (i, p) in positions.iter().enumerate() {
            while let Some((k, zeta)) = self.nearest(p) {
                if zeta > self.collect_radius {
                    break;
                }
                self.targets[k].collected = true;
                events.push((i, k));
            }
        }
        events
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    fn mission(targets: Vec<Point>) -> MissionState {
        MissionState::new(targets, 5.0, SpeedProfile::default())
    }

    #[test]
    fn speed_profile() {
        let s = SpeedProfile::default();
        assert_eq!(s.speed(10.0), 1.5);
        assert!((s.speed(25.0) - 0.75).abs() < 1e-15);
        assert_eq!(s.speed(30.0), 0.0);
        assert_eq!(s.speed(100.0), 0.0);
    }

    #[test]
    fn gradient_magnitudes() {
        let m = mission(vec![dvector![10.0, 0.0, 0.0]]);
        let g = m.grad(&[dvector![0.0, 0.0, 0.0], dvector![-15.0, 0.0, 0.0], dvector![-30.0, 0.0, 0.0]]);
        assert!((&g[0] - dvector![-1.5, 0.0, 0.0]).norm() < 1e-15);
        assert!((g[1].norm() - 0.75).abs() < 1e-15);
        assert_eq!(g[2].norm(), 0.0);
    }

    #[test]
    fn no_targets_no_gradient() {
        let mut m = mission(vec![dvector![1.0, 0.0]]);
        m.targets[0].collected = true;
        assert_eq!(m.grad(&[dvector![0.0, 0.0]])[0].norm(), 0.0);
    }

    #[test]
    fn ties_pick_lowest_index() {
        let m = mission(vec![dvector![1.0, 0.0], dvector![-1.0, 0.0]]);
        assert_eq!(m.nearest(&dvector![0.0, 0.0]), Some((0, 1.0)));
    }

    #[test]
    fn collection_is_monotone() {
        let mut m = mission(vec![dvector![1.0, 0.0], dvector![4.0, 0.0], dvector![50.0, 0.0]]);
        let ev = m.collect(&[dvector![0.0, 0.0]]);
        assert_eq!(ev, vec![(0, 0), (0, 1)]);
        assert_eq!(m.collected_count(), 2);
        assert!(m.collect(&[dvector![100.0, 0.0]]).is_empty());
        assert_eq!(m.collected_count(), 2);
    }

    #[test]
    fn potential_is_continuous() {
        let s = SpeedProfile::default();
        for z in [20.0, 30.0] {
            assert!((s.potential(z - 1e-9) - s.potential(z + 1e-9)).abs() < 1e-8);
        }
    }
}
