use std::io;

use super::{DynamicsError, OdeSystem};

pub const DEFAULT_DT: f64 = 1e-3;

const RICHARDSON_TOL: f64 = 1e-9;
const MAX_REFINEMENTS: usize = 3;

/// Solution of an [`OdeSystem`] on a uniform grid starting at `t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// Row-major `times.len() x dim` states.
    pub states: Vec<f64>,
    pub dim: usize,
    pub step_size: f64,
    pub method: &'static str,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn state(&self, i: usize) -> &[f64] {
        &self.states[i * self.dim..(i + 1) * self.dim]
    }

    pub fn last_state(&self) -> &[f64] {
        self.state(self.len() - 1)
    }

    /// Grid index of time `t`, if `t` lies on the grid (within 1e-9 of a step).
    pub fn index_of(&self, t: f64) -> Option<usize> {
        if self.len() == 1 {
            return (t.abs() < 1e-9).then_some(0);
        }
        let i = (t / self.step_size).round();
        if i < 0.0 || i as usize >= self.len() {
            return None;
        }
        let i = i as usize;
        ((self.times[i] - t).abs() < 1e-9).then_some(i)
    }

    pub fn state_at(&self, t: f64) -> Option<&[f64]> {
        self.index_of(t).map(|i| self.state(i))
    }

    /// Writes `t, z_1..z_K, z_w` rows, keeping every `every`-th grid point
    /// plus the last one.
    pub fn write_csv<W: io::Write>(&self, out: W, every: usize) -> csv::Result<()> {
        let every = every.max(1);
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["t".to_string()];
        header.extend((1..self.dim).map(|k| format!("z_{k}")));
        header.push("z_w".to_string());
        w.write_record(&header)?;
        for i in 0..self.len() {
            if i % every != 0 && i + 1 != self.len() {
                continue;
            }
            let mut row = vec![format!("{}", self.times[i])];
            row.extend(self.state(i).iter().map(|v| format!("{v:e}")));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// One classical fourth-order Runge–Kutta step, in place.
pub(crate) struct Rk4 {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4 {
    pub(crate) fn new(dim: usize) -> Self {
        Rk4 {
            k1: vec![0.0; dim],
            k2: vec![0.0; dim],
            k3: vec![0.0; dim],
            k4: vec![0.0; dim],
            tmp: vec![0.0; dim],
        }
    }

    pub(crate) fn step(&mut self, sys: &OdeSystem, z: &mut [f64], h: f64) {
        sys.eval_into(z, &mut self.k1);
        for i in 0..z.len() {
            self.tmp[i] = z[i] + 0.5 * h * self.k1[i];
        }
        sys.eval_into(&self.tmp, &mut self.k2);
        for i in 0..z.len() {
            self.tmp[i] = z[i] + 0.5 * h * self.k2[i];
        }
        sys.eval_into(&self.tmp, &mut self.k3);
        for i in 0..z.len() {
            self.tmp[i] = z[i] + h * self.k3[i];
        }
        sys.eval_into(&self.tmp, &mut self.k4);
        for i in 0..z.len() {
            z[i] += h / 6.0 * (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]);
        }
    }
}

fn run(sys: &OdeSystem, steps: usize, h: f64, record: bool) -> (Vec<f64>, Vec<f64>) {
    let mut z = sys.initial_state();
    let mut rk = Rk4::new(z.len());
    let mut times = Vec::new();
    let mut states = Vec::new();
    if record {
        times.reserve(steps + 1);
        states.reserve((steps + 1) * z.len());
        times.push(0.0);
        states.extend_from_slice(&z);
    }
    for i in 1..=steps {
        rk.step(sys, &mut z, h);
        if record {
            times.push(i as f64 * h);
            states.extend_from_slice(&z);
        }
    }
    if !record {
        states = z;
    }
    (times, states)
}

/// Integrates from the all-isolated state to `t_max` with fixed-step RK4.
///
/// The step is shrunk so the grid lands on `t_max`. The end state is checked
/// against a run at half the step; if they differ by more than 1e-9 in any
/// coordinate the step is halved and the check repeated, up to three times.
pub fn integrate(sys: &OdeSystem, t_max: f64, dt: f64) -> Result<Trajectory, DynamicsError> {
    if !(t_max >= 0.0) || !t_max.is_finite() {
        return Err(DynamicsError::InvalidParameter(format!("t_max = {t_max}")));
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(DynamicsError::InvalidParameter(format!("dt = {dt}")));
    }
    if t_max == 0.0 {
        return Ok(Trajectory {
            times: vec![0.0],
            states: sys.initial_state(),
            dim: sys.dim(),
            step_size: dt,
            method: "rk4",
        });
    }
    let mut steps = (t_max / dt - 1e-9).ceil().max(1.0) as usize;
    let mut discrepancy = f64::NAN;
    for _ in 0..=MAX_REFINEMENTS {
        let h = t_max / steps as f64;
        let (times, states) = run(sys, steps, h, true);
        let (_, fine) = run(sys, steps * 2, h / 2.0, false);
        let coarse = &states[states.len() - sys.dim()..];
        discrepancy = coarse
            .iter()
            .zip(&fine)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if discrepancy <= RICHARDSON_TOL {
            return Ok(Trajectory {
                times,
                states,
                dim: sys.dim(),
                step_size: h,
                method: "rk4",
            });
        }
        steps *= 2;
    }
    Err(DynamicsError::Richardson {
        discrepancy,
        dt: t_max / steps as f64 * 2.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{build_ode, closed_form_ode};
    use crate::rules::{bohman_frieze, kp, Builtin};

    #[test]
    fn zero_horizon_is_initial_state() {
        let sys = build_ode(&bohman_frieze()).unwrap();
        let traj = integrate(&sys, 0.0, 1e-3).unwrap();
        assert_eq!(traj.len(), 1);
        assert_eq!(traj.state(0), &[1.0, 0.0]);
    }

    #[test]
    fn bad_parameters_rejected() {
        let sys = build_ode(&bohman_frieze()).unwrap();
        assert!(integrate(&sys, -1.0, 1e-3).is_err());
        assert!(integrate(&sys, 1.0, 0.0).is_err());
        assert!(integrate(&sys, f64::NAN, 1e-3).is_err());
    }

    #[test]
    fn grid_lands_on_t_max() {
        let sys = closed_form_ode(Builtin::BohmanFrieze, None).unwrap();
        let traj = integrate(&sys, 1.0, 3e-4).unwrap();
        assert!((traj.times.last().unwrap() - 1.0).abs() < 1e-12);
        assert!(traj.step_size <= 3e-4);
        assert!(traj.index_of(1.0).is_some());
        assert!(traj.index_of(0.5).is_none() || traj.state_at(0.5).is_some());
    }

    #[test]
    fn coarse_steps_trigger_refinement() {
        let sys = build_ode(&kp().extend(2).unwrap()).unwrap();
        let traj = integrate(&sys, 2.0, 0.02).unwrap();
        assert!(traj.step_size < 0.02, "{}", traj.step_size);
        // Too coarse even after three halvings.
        let err = integrate(&sys, 2.0, 1.0).unwrap_err();
        assert!(matches!(err, DynamicsError::Richardson { .. }));
    }

    #[test]
    fn mass_is_conserved_at_t20() {
        let sys = build_ode(&kp().extend(2).unwrap()).unwrap();
        let traj = integrate(&sys, 20.0, DEFAULT_DT).unwrap();
        let total: f64 = traj.last_state().iter().sum();
        assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn csv_export_has_header_and_stride() {
        let sys = build_ode(&kp().extend(2).unwrap()).unwrap();
        let traj = integrate(&sys, 0.1, 1e-3).unwrap();
        let mut buf = Vec::new();
        traj.write_csv(&mut buf, 10).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,z_1,z_2,z_w");
        assert_eq!(lines.len(), 1 + 11);
    }
}
