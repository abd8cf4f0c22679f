//! One-dimensional idealized driving: pick a speed each cycle, or stop.

/// `d` is the remaining distance to the obstacle, `max_speed` the speed cap
/// and `cycle` the longest time between decisions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Toy1DState {
    pub d: f64,
    pub v: f64,
    pub max_speed: f64,
    pub cycle: f64,
}

/// Accepts `proposed_v` if the robot is far enough to drive a full cycle at
/// the cap and the speed is within `[0, max_speed]`; stopping is always
/// accepted.
pub fn monitor_1d(s: &Toy1DState, proposed_v: f64) -> bool {
    let far = s.d >= s.cycle * s.max_speed;
    (far && 0.0 <= proposed_v && proposed_v <= s.max_speed) || proposed_v == 0.0
}

impl Toy1DState {
    /// Holds speed `v` for `dt` seconds.
    pub fn advance(self, v: f64, dt: f64) -> Self {
        Self { d: self.d - v * dt, v, ..self }
    }

    /// One monitored cycle: the proposal if it passes, otherwise stop.
    pub fn monitored_cycle(self, proposed_v: f64, dt: f64) -> Self {
        let v = if monitor_1d(&self, proposed_v) { proposed_v } else { 0.0 };
        self.advance(v, dt)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state(d: f64) -> Toy1DState {
        Toy1DState { d, v: 0.0, max_speed: 2.0, cycle: 1.0 }
    }

    #[test]
    fn examples() {
        assert!(monitor_1d(&state(10.0), 2.0));
        assert!(!monitor_1d(&state(1.5), 1.0));
        assert!(monitor_1d(&state(1.5), 0.0));
        assert!(monitor_1d(&state(0.0), 0.0));
        assert!(!monitor_1d(&state(10.0), 2.5));
        assert!(!monitor_1d(&state(10.0), -0.5));
    }

    #[test]
    fn monitored_cycle_stops_when_close() {
        let s = state(1.5).monitored_cycle(1.0, 1.0);
        assert_eq!(s.v, 0.0);
        assert_eq!(s.d, 1.5);
        let s = state(4.0).monitored_cycle(2.0, 1.0);
        assert_eq!(s.d, 2.0);
    }
}
