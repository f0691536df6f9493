//! SPO against the linear schedule, and the slew-limit sweep.

use serde::{Deserialize, Serialize};

use crate::convex::{optimize_convex, optimize_convex_from, ConvexConfig, StopReason};
use crate::direct::{optimize_direct, DirectConfig};
use crate::dynamics::{evolve_on_path, EvolveOptions};
use crate::error::{Result, SpoError};
use crate::hamiltonian::PathHamiltonian;
use crate::instance::QuboInstance;
use crate::schedule::{sig9, Schedule};
use crate::spectrum::{gap_values, min_of_gaps, GapRange};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpoMethod {
    Direct,
    #[default]
    Convex,
}

impl std::str::FromStr for SpoMethod {
    type Err = SpoError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(SpoMethod::Direct),
            "convex" => Ok(SpoMethod::Convex),
            _ => Err(SpoError::InvalidArgument(format!("unknown method {s:?}, expected direct or convex"))),
        }
    }
}

/// Optimizer choice plus the settings of both optimizers. The grid and the
/// caps always come from `convex`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpoSettings {
    pub method: SpoMethod,
    pub convex: ConvexConfig,
    pub direct: DirectConfig,
}

impl SpoSettings {
    pub fn for_instance(inst: &QuboInstance, method: SpoMethod) -> Self {
        Self {
            method,
            convex: ConvexConfig::for_instance(inst),
            direct: DirectConfig::default(),
        }
    }

    pub fn linear(&self, n_qubits: usize) -> Result<Schedule> {
        Schedule::linear(n_qubits, self.convex.intervals, self.convex.f_bound, self.convex.slew)
    }
}

/// Runs the chosen optimizer from the linear schedule.
pub fn optimize_spo(inst: &QuboInstance, settings: &SpoSettings) -> Result<Schedule> {
    match settings.method {
        SpoMethod::Convex => Ok(optimize_convex(inst, &settings.convex)?.schedule),
        SpoMethod::Direct => {
            let init = settings.linear(inst.n_qubits())?;
            Ok(optimize_direct(inst, &init, &settings.direct)?.schedule)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    #[serde(rename = "T")]
    pub total_time: f64,
    pub p_linear: f64,
    pub p_spo: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
    /// Whole-path minimum gaps and where they occur.
    pub linear_min_gap: f64,
    pub linear_i_min: usize,
    pub spo_min_gap: f64,
    pub spo_i_min: usize,
    pub spo_schedule: Schedule,
}

impl ComparisonTable {
    /// `T,p_linear,p_spo`, then two summary lines `# min_gap,...`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("T,p_linear,p_spo\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{}\n", sig9(r.total_time), sig9(r.p_linear), sig9(r.p_spo)));
        }
        out
    }

    /// `quantity,linear,spo` with the minimum gap and its location.
    pub fn gap_csv(&self) -> String {
        let s = |i: usize| sig9(self.spo_schedule.s(i));
        format!(
            "quantity,linear,spo\nmin_gap,{},{}\ni_min,{},{}\ns_min,{},{}\n",
            sig9(self.linear_min_gap),
            sig9(self.spo_min_gap),
            self.linear_i_min,
            self.spo_i_min,
            s(self.linear_i_min),
            s(self.spo_i_min)
        )
    }
}

/// Success probabilities of two schedules over a list of total times.
pub fn compare_schedules(
    inst: &QuboInstance,
    linear: &Schedule,
    spo: &Schedule,
    times: &[f64],
) -> Result<ComparisonTable> {
    let path = PathHamiltonian::new(inst);
    let eigen = Default::default();
    let (linear_min_gap, linear_i_min) = min_of_gaps(&gap_values(&path, linear, &eigen)?, GapRange::Full);
    let (spo_min_gap, spo_i_min) = min_of_gaps(&gap_values(&path, spo, &eigen)?, GapRange::Full);
    let opts = EvolveOptions::default();
    let rows = times
        .iter()
        .map(|&t| {
            Ok(ComparisonRow {
                total_time: t,
                p_linear: evolve_on_path(&path, linear, t, &opts)?.p_succ,
                p_spo: evolve_on_path(&path, spo, t, &opts)?.p_succ,
            })
        })
        .collect::<Result<_>>()?;
    Ok(ComparisonTable {
        rows,
        linear_min_gap,
        linear_i_min,
        spo_min_gap,
        spo_i_min,
        spo_schedule: spo.clone(),
    })
}

/// Optimizes once, then evolves both schedules at every time in `times`.
pub fn compare_spo(inst: &QuboInstance, times: &[f64], settings: &SpoSettings) -> Result<ComparisonTable> {
    let spo = optimize_spo(inst, settings)?;
    compare_schedules(inst, &settings.linear(inst.n_qubits())?, &spo, times)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub eps: f64,
    /// Whole-path minimum gap of the optimized schedule.
    pub min_gap: f64,
    pub i_min: usize,
    /// Best reachable value, `min(gap(0), gap(N))`.
    pub endpoint_gap: f64,
    pub stop: StopReason,
    pub outer_iterations: usize,
}

/// `eps,min_gap,i_min,endpoint_gap,stop,outer_iterations`.
pub fn sweep_csv(points: &[SweepPoint]) -> String {
    let mut out = String::from("eps,min_gap,i_min,endpoint_gap,stop,outer_iterations\n");
    for p in points {
        let stop = serde_json::to_value(p.stop).ok();
        let stop = stop.as_ref().and_then(|v| v.as_str()).unwrap_or("");
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            sig9(p.eps),
            sig9(p.min_gap),
            p.i_min,
            sig9(p.endpoint_gap),
            stop,
            p.outer_iterations
        ));
    }
    out
}

/// Convex SPO at each slew limit in ascending `eps_list`. Each run starts from
/// the previous optimum, which stays feasible because the feasible sets grow
/// with the slew limit.
pub fn epsilon_sweep(inst: &QuboInstance, eps_list: &[f64], base: &ConvexConfig) -> Result<Vec<SweepPoint>> {
    if eps_list.is_empty() {
        return Err(SpoError::InvalidArgument("empty slew list".into()));
    }
    if eps_list.windows(2).any(|w| !(w[1] > w[0])) || !(eps_list[0] >= 0.0) {
        return Err(SpoError::InvalidArgument("slew limits must be nonnegative and strictly ascending".into()));
    }
    let mut points = Vec::with_capacity(eps_list.len());
    let mut previous: Option<Schedule> = None;
    for &eps in eps_list {
        let cfg = ConvexConfig {
            slew: eps,
            ..base.clone()
        };
        let result = match &previous {
            None => optimize_convex(inst, &cfg)?,
            Some(start) => optimize_convex_from(inst, start, &cfg)?,
        };
        let whole_path = result.min_gap.min(result.endpoint_gap);
        let i_min = if result.min_gap <= result.endpoint_gap {
            result.i_min
        } else {
            // the binding endpoint
            let path = PathHamiltonian::new(inst);
            min_of_gaps(&gap_values(&path, &result.schedule, &cfg.eigen)?, GapRange::Full).1
        };
        points.push(SweepPoint {
            eps,
            min_gap: whole_path,
            i_min,
            endpoint_gap: result.endpoint_gap,
            stop: result.stop,
            outer_iterations: result.iterations.len(),
        });
        previous = Some(result.schedule);
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn methods_parse() {
        assert_eq!("direct".parse::<SpoMethod>().unwrap(), SpoMethod::Direct);
        assert_eq!("convex".parse::<SpoMethod>().unwrap(), SpoMethod::Convex);
        assert!("simplex".parse::<SpoMethod>().is_err());
    }

    #[test]
    fn identical_schedules_compare_equal() {
        let inst = QuboInstance::random(3, 4).unwrap();
        let lin = Schedule::linear(3, 20, 1.0, 2.5).unwrap();
        let t = compare_schedules(&inst, &lin, &lin, &[1.0, 5.0]).unwrap();
        assert_eq!(t.rows.len(), 2);
        for r in &t.rows {
            assert_eq!(r.p_linear, r.p_spo);
        }
        assert_eq!(t.linear_min_gap, t.spo_min_gap);
        assert_eq!(t.to_csv().lines().count(), 3);
        assert_eq!(t.gap_csv().lines().count(), 4);
    }

    #[test]
    fn zero_slew_pins_the_schedule() {
        let inst = QuboInstance::random(3, 9).unwrap();
        let mut cfg = ConvexConfig::for_instance(&inst);
        cfg.intervals = 20;
        cfg.p = 3;
        let path = PathHamiltonian::new(&inst);
        let lin = Schedule::linear(3, 20, cfg.f_bound, 0.0).unwrap();
        let (linear_gap, _) = min_of_gaps(&gap_values(&path, &lin, &cfg.eigen).unwrap(), GapRange::Full);
        let pts = epsilon_sweep(&inst, &[0.0], &cfg).unwrap();
        assert!((pts[0].min_gap - linear_gap).abs() <= 1e-6);
    }

    #[test]
    fn sweep_is_monotone_on_a_small_instance() {
        let inst = QuboInstance::random(3, 2).unwrap();
        let mut cfg = ConvexConfig::for_instance(&inst);
        cfg.intervals = 20;
        cfg.p = 3;
        let pts = epsilon_sweep(&inst, &[0.25, 1.0, 4.0], &cfg).unwrap();
        assert!(pts.windows(2).all(|w| w[1].min_gap >= w[0].min_gap - 1e-4));
        assert!(pts.iter().all(|p| p.min_gap <= p.endpoint_gap + 1e-12));
        assert_eq!(sweep_csv(&pts).lines().count(), 4);
        assert!(epsilon_sweep(&inst, &[1.0, 0.5], &cfg).is_err());
    }
}
