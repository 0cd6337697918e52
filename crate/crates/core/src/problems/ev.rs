//! Electric-vehicle charging schedules: N vehicles over T time steps, one
//! qudit per (vehicle, step) holding the charge level L = z - (d-1)/2.

use std::sync::Arc;

use crate::constraints::ConstraintSpec;
use crate::error::{Error, Result};
use crate::register::{Assignment, QuditRegister};

use super::Problem;

/// Electricity-cost minimization with SOC and station power limits.
///
/// Qudit layout is vehicle-major: qudit `n * T + t` holds vehicle n's level
/// in step t (0-based). The qudit dimension must be odd so the level set is
/// symmetric around idle; d = 3 gives L in {-1, 0, 1}.
#[derive(Debug, Clone)]
pub struct EvChargingProblem {
    pub num_vehicles: usize,
    pub num_steps: usize,
    /// Step duration in hours.
    pub step_hours: f64,
    /// (Dis)charging power per vehicle, kW.
    pub powers: Vec<f64>,
    /// Buy price per step, currency/kWh.
    pub buy_prices: Vec<f64>,
    /// Sell price per step, currency/kWh.
    pub sell_prices: Vec<f64>,
    /// Conversion loss per vehicle, >= 0.
    pub losses: Vec<f64>,
    pub energy_init: Vec<f64>,
    pub energy_target: Vec<f64>,
    pub energy_min: Vec<f64>,
    pub energy_max: Vec<f64>,
    /// Largest total discharging power, < 0.
    pub power_min: f64,
    /// Largest total charging power, > 0.
    pub power_max: f64,
    /// Levels per qudit (odd), default 3.
    pub levels: usize,
}

impl EvChargingProblem {
    pub fn validate(&self) -> Result<()> {
        let n = self.num_vehicles;
        if self.num_steps == 0 || n == 0 {
            return Err(Error::Consistency("need at least one vehicle and step".into()));
        }
        for (name, v) in [
            ("powers", &self.powers),
            ("losses", &self.losses),
            ("energy_init", &self.energy_init),
            ("energy_target", &self.energy_target),
            ("energy_min", &self.energy_min),
            ("energy_max", &self.energy_max),
        ] {
            if v.len() != n {
                return Err(Error::Consistency(format!(
                    "{name} has {} entries for {n} vehicles",
                    v.len()
                )));
            }
        }
        for (name, v) in [("buy_prices", &self.buy_prices), ("sell_prices", &self.sell_prices)] {
            if v.len() != self.num_steps {
                return Err(Error::Consistency(format!(
                    "{name} has {} entries for {} steps",
                    v.len(),
                    self.num_steps
                )));
            }
        }
        for i in 0..n {
            if !(self.energy_min[i] <= self.energy_init[i]
                && self.energy_init[i] <= self.energy_max[i])
            {
                return Err(Error::Consistency(format!(
                    "vehicle {i}: initial SOC outside [min, max]"
                )));
            }
            if self.losses[i] < 0.0 {
                return Err(Error::Consistency(format!("vehicle {i}: negative loss")));
            }
        }
        if !(self.power_min < 0.0 && self.power_max > 0.0) {
            return Err(Error::Consistency(
                "power limits must satisfy P_min < 0 < P_max".into(),
            ));
        }
        if self.levels < 3 || self.levels % 2 == 0 {
            return Err(Error::Unsupported(format!(
                "EV levels need an odd qudit dimension >= 3 for a symmetric level set, got {}",
                self.levels
            )));
        }
        Ok(())
    }

    fn qudit(&self, vehicle: usize, step: usize) -> usize {
        vehicle * self.num_steps + step
    }

    /// Charge level of one digit: L = z - (d-1)/2.
    pub fn level_of_digit(&self, digit: usize) -> f64 {
        digit as f64 - 0.5 * (self.levels as f64 - 1.0)
    }

    fn level(&self, assignment: &Assignment, vehicle: usize, step: usize) -> f64 {
        self.level_of_digit(assignment.digits()[self.qudit(vehicle, step)])
    }

    /// State of charge of vehicle `n` after `steps` completed steps
    /// (`steps = 0` is the initial SOC).
    pub fn soc(&self, assignment: &Assignment, vehicle: usize, steps: usize) -> f64 {
        let mut e = self.energy_init[vehicle];
        for t in 0..steps.min(self.num_steps) {
            let l = self.level(assignment, vehicle, t);
            e += self.step_hours * self.powers[vehicle] * (l - self.losses[vehicle] * l * l);
        }
        e
    }

    /// Total station power drawn in one step.
    pub fn total_power(&self, assignment: &Assignment, step: usize) -> f64 {
        (0..self.num_vehicles)
            .map(|n| self.powers[n] * self.level(assignment, n, step))
            .sum()
    }
}

impl Problem for EvChargingProblem {
    fn name(&self) -> &'static str {
        "ev_charging"
    }

    fn register(&self) -> Result<QuditRegister> {
        self.validate()?;
        QuditRegister::new(self.num_vehicles * self.num_steps, self.levels)
    }

    /// Electricity cost: sum over (n, t) of
    /// `dt P0_n [(ec + ed)/2 L + (ec - ed)/2 L^2]`.
    fn cost(&self, assignment: &Assignment) -> f64 {
        let mut total = 0.0;
        for n in 0..self.num_vehicles {
            for t in 0..self.num_steps {
                let l = self.level(assignment, n, t);
                let ec = self.buy_prices[t];
                let ed = self.sell_prices[t];
                total += self.step_hours
                    * self.powers[n]
                    * (0.5 * (ec + ed) * l + 0.5 * (ec - ed) * l * l);
            }
        }
        total
    }

    /// The N(1 + 2T) + 2T inequality constraints: per vehicle the target SOC
    /// at the end, per (vehicle, step) both SOC bounds, per step both total
    /// power bounds. Unit weights.
    fn constraints(&self) -> Vec<ConstraintSpec> {
        let me = Arc::new(self.clone());
        let mut out = Vec::with_capacity(
            self.num_vehicles * (1 + 2 * self.num_steps) + 2 * self.num_steps,
        );
        for n in 0..self.num_vehicles {
            let p = Arc::clone(&me);
            out.push(ConstraintSpec::inequality(
                format!("target_soc[{n}]"),
                1.0,
                move |z: &Assignment| p.energy_target[n] - p.soc(z, n, p.num_steps),
            ));
        }
        for n in 0..self.num_vehicles {
            for t in 1..=self.num_steps {
                let p = Arc::clone(&me);
                out.push(ConstraintSpec::inequality(
                    format!("soc_min[{n},{t}]"),
                    1.0,
                    move |z: &Assignment| p.energy_min[n] - p.soc(z, n, t),
                ));
                let p = Arc::clone(&me);
                out.push(ConstraintSpec::inequality(
                    format!("soc_max[{n},{t}]"),
                    1.0,
                    move |z: &Assignment| p.soc(z, n, t) - p.energy_max[n],
                ));
            }
        }
        for t in 0..self.num_steps {
            let p = Arc::clone(&me);
            out.push(ConstraintSpec::inequality(
                format!("power_min[{t}]"),
                1.0,
                move |z: &Assignment| p.power_min - p.total_power(z, t),
            ));
            let p = Arc::clone(&me);
            out.push(ConstraintSpec::inequality(
                format!("power_max[{t}]"),
                1.0,
                move |z: &Assignment| p.total_power(z, t) - p.power_max,
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(n: usize, t: usize) -> EvChargingProblem {
        EvChargingProblem {
            num_vehicles: n,
            num_steps: t,
            step_hours: 0.5,
            powers: vec![11.0; n],
            buy_prices: vec![0.3; t],
            sell_prices: vec![0.2; t],
            losses: vec![0.0; n],
            energy_init: vec![20.0; n],
            energy_target: vec![20.0; n],
            energy_min: vec![5.0; n],
            energy_max: vec![40.0; n],
            power_min: -11.0,
            power_max: 11.0,
            levels: 3,
        }
    }

    #[test]
    fn cost_examples() {
        let p = small(1, 1);
        let r = p.register().unwrap();
        // all idle: zero cost
        let idle = Assignment::new(&r, vec![1]).unwrap();
        assert_eq!(p.cost(&idle), 0.0);
        // single charge step: dt * P0 * ec
        let charge = Assignment::new(&r, vec![2]).unwrap();
        assert!((p.cost(&charge) - 0.5 * 11.0 * 0.3).abs() < 1e-12);
        // single discharge step: -dt * P0 * ed
        let discharge = Assignment::new(&r, vec![0]).unwrap();
        assert!((p.cost(&discharge) + 0.5 * 11.0 * 0.2).abs() < 1e-12);
    }

    #[test]
    fn soc_recursion() {
        let mut p = small(1, 3);
        let r = p.register().unwrap();
        let idle = Assignment::new(&r, vec![1, 1, 1]).unwrap();
        assert_eq!(p.soc(&idle, 0, 3), 20.0);

        // lossless charging every step: E_init + t dt P0
        let charge = Assignment::new(&r, vec![2, 2, 2]).unwrap();
        for t in 0..=3 {
            assert!((p.soc(&charge, 0, t) - (20.0 + t as f64 * 0.5 * 11.0)).abs() < 1e-12);
        }

        // one charge step with delta = 0.1 adds 0.9 dt P0
        p.losses = vec![0.1];
        let one = Assignment::new(&r, vec![2, 1, 1]).unwrap();
        assert!((p.soc(&one, 0, 3) - (20.0 + 0.9 * 0.5 * 11.0)).abs() < 1e-12);
    }

    #[test]
    fn constraint_count_formula() {
        for (n, t) in [(1usize, 1usize), (2, 3), (3, 4)] {
            let p = small(n, t);
            assert_eq!(p.constraints().len(), n * (1 + 2 * t) + 2 * t);
        }
        assert_eq!(small(2, 3).constraints().len(), 20);
    }

    #[test]
    fn all_idle_is_feasible() {
        let p = small(2, 2);
        let r = p.register().unwrap();
        let idle = Assignment::new(&r, vec![1, 1, 1, 1]).unwrap();
        let total: f64 = p
            .constraints()
            .iter()
            .map(|c| c.weight() * c.penalty(&idle))
            .sum();
        assert_eq!(total, 0.0);
    }

    #[test]
    fn power_cap_violated_by_simultaneous_charging() {
        // P_max = P0 with two vehicles charging in the same step
        let p = small(2, 1);
        let r = p.register().unwrap();
        let both = Assignment::new(&r, vec![2, 2]).unwrap();
        let cap = p
            .constraints()
            .into_iter()
            .find(|c| c.name() == "power_max[0]")
            .unwrap();
        assert!(cap.is_violated(&both));
        assert!((cap.evaluate(&both) - 11.0).abs() < 1e-12); // 2 P0 - P_max
    }

    #[test]
    fn even_levels_rejected() {
        let mut p = small(1, 1);
        p.levels = 4;
        assert!(p.register().is_err());
    }
}
