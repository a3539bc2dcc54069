use crate::model::TimeGrid;

/// Hour-of-day refuelling shape: quiet overnight, a morning ramp and an
/// early-evening peak. Not measured data; scaled to mean one below.
const HOURLY: [f64; 24] = [
    0.35, 0.25, 0.20, 0.20, 0.25, 0.45, 0.80, 1.20, 1.40, 1.35, 1.30, 1.35, //
    1.45, 1.45, 1.40, 1.45, 1.55, 1.60, 1.40, 1.15, 0.95, 0.80, 0.60, 0.45,
];

/// Synthetic refuelling profile on `grid`, averaged over each step. Every
/// period is assumed to start at midnight. The mean over each whole day is
/// one when the step length divides 24 hours.
pub fn refuelling_profile(grid: &TimeGrid) -> Result<Vec<f64>, String> {
    let dt = grid.step_hours;
    if dt.fract() != 0.0 || dt < 1.0 {
        return Err(format!("the builtin refuelling profile needs whole-hour steps, got {dt}"));
    }
    let dt = dt as usize;
    let mean = HOURLY.iter().sum::<f64>() / 24.0;
    let mut out = Vec::with_capacity(grid.len());
    for p in &grid.periods {
        for s in 0..p.steps {
            let sum: f64 = (s * dt..(s + 1) * dt).map(|h| HOURLY[h % 24]).sum();
            out.push(sum / dt as f64 / mean);
        }
    }
    Ok(out)
}
