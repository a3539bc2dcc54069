use serde::{Deserialize, Serialize};

use crate::error::ModelError;

pub const HOURS_PER_YEAR: f64 = 8760.0;

/// One representative period: `steps` contiguous time steps that each stand
/// for `weight` occurrences over the year.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Period {
    pub name: String,
    pub steps: usize,
    pub weight: f64,
}

/// Representative periods laid end to end on a global step index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub step_hours: f64,
    pub periods: Vec<Period>,
}

impl TimeGrid {
    /// Periods of `steps_per_period` steps whose weights cover a full year.
    pub fn uniform(n_periods: usize, steps_per_period: usize, step_hours: f64) -> Self {
        let total_hours = (n_periods * steps_per_period) as f64 * step_hours;
        let weight = HOURS_PER_YEAR / total_hours;
        TimeGrid {
            step_hours,
            periods: (0..n_periods)
                .map(|p| Period {
                    name: format!("p{}", p + 1),
                    steps: steps_per_period,
                    weight,
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.periods.iter().map(|p| p.steps).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Annual scaling weight of global step `t`.
    pub fn weight(&self, t: usize) -> f64 {
        self.periods[self.period_of(t)].weight
    }

    /// Global step ranges, one per period.
    pub fn period_ranges(&self) -> Vec<std::ops::Range<usize>> {
        let mut start = 0;
        self.periods
            .iter()
            .map(|p| {
                let r = start..start + p.steps;
                start += p.steps;
                r
            })
            .collect()
    }

    pub fn period_of(&self, t: usize) -> usize {
        let mut start = 0;
        for (i, p) in self.periods.iter().enumerate() {
            if t < start + p.steps {
                return i;
            }
            start += p.steps;
        }
        panic!("time step {t} outside grid of {} steps", self.len());
    }

    /// The step before `t` within its period, wrapping from the first step
    /// to the last.
    pub fn prev_cyclic(&self, t: usize) -> usize {
        let r = &self.period_ranges()[self.period_of(t)];
        if t == r.start {
            r.end - 1
        } else {
            t - 1
        }
    }

    /// Hours of the year represented by the grid: sum of weight x step length.
    pub fn represented_hours(&self) -> f64 {
        self.periods
            .iter()
            .map(|p| p.weight * p.steps as f64 * self.step_hours)
            .sum()
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.step_hours > 0.0) {
            return Err(ModelError::Domain("step length must be positive".into()));
        }
        if self.periods.is_empty() || self.periods.iter().any(|p| p.steps == 0) {
            return Err(ModelError::Domain("every period needs at least one step".into()));
        }
        if self.periods.iter().any(|p| !(p.weight > 0.0)) {
            return Err(ModelError::Domain("period weights must be positive".into()));
        }
        let hours = self.represented_hours();
        if (hours - HOURS_PER_YEAR).abs() > 1e-6 {
            return Err(ModelError::Domain(format!(
                "period weights represent {hours} hours, expected {HOURS_PER_YEAR}"
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_grid_covers_a_year() {
        for (periods, steps, dt) in [(1, 168, 1.0), (20, 168, 1.0), (1, 28, 6.0), (3, 24, 1.0)] {
            let g = TimeGrid::uniform(periods, steps, dt);
            assert!((g.represented_hours() - 8760.0).abs() < 1e-6);
            g.validate().unwrap();
        }
    }

    #[test]
    fn cyclic_predecessor_wraps_inside_each_period() {
        let g = TimeGrid::uniform(2, 3, 1.0);
        assert_eq!(g.prev_cyclic(0), 2);
        assert_eq!(g.prev_cyclic(1), 0);
        assert_eq!(g.prev_cyclic(3), 5);
        assert_eq!(g.prev_cyclic(5), 4);
        assert_eq!(g.period_of(4), 1);
    }

    #[test]
    fn weights_not_covering_the_year_are_rejected() {
        let mut g = TimeGrid::uniform(1, 24, 1.0);
        g.periods[0].weight = 300.0;
        assert!(g.validate().is_err());
    }
}
