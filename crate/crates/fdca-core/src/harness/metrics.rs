//! RMSE and MAPE aggregation over Monte-Carlo trials.

use crate::array_model::Target;
use crate::error::{Error, Result};

use super::pipeline::TrialResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorParam {
    Theta,
    Range,
}

fn errors_of(trial: &TrialResult, param: ErrorParam) -> impl Iterator<Item = f64> + '_ {
    trial.assignments.iter().map(move |a| match param {
        ErrorParam::Theta => a.err_theta_deg,
        ErrorParam::Range => a.err_range_m,
    })
}

/// `sqrt( (1 / K P) sum_k sum_p err_k(p)^2 )` over matched targets.
pub fn rmse(trials: &[TrialResult], param: ErrorParam) -> f64 {
    let mut acc = 0.0;
    let mut count = 0usize;
    for trial in trials {
        for e in errors_of(trial, param) {
            acc += e * e;
            count += 1;
        }
    }
    if count == 0 {
        return f64::NAN;
    }
    (acc / count as f64).sqrt()
}

/// `(sum_k sum_p |err_k(p)|) / (P sum_k |truth_k|) * 100`.
pub fn mape(trials: &[TrialResult], truths: &[Target], param: ErrorParam) -> Result<f64> {
    let denom: f64 = truths
        .iter()
        .map(|t| match param {
            ErrorParam::Theta => t.theta_deg.abs(),
            ErrorParam::Range => t.range_m.abs(),
        })
        .sum();
    if denom <= 0.0 {
        return Err(Error::UndefinedMetric(
            "MAPE undefined: truth values sum to zero".into(),
        ));
    }
    let p = trials.len();
    if p == 0 {
        return Err(Error::UndefinedMetric("MAPE needs at least one trial".into()));
    }
    let num: f64 = trials
        .iter()
        .flat_map(|t| errors_of(t, param).map(f64::abs))
        .sum();
    Ok(num / (p as f64 * denom) * 100.0)
}

#[cfg(test)]
mod tests {
    use super::super::matching::Assignment;
    use super::super::pipeline::{SolverDiagnostics, TrialResult};
    use super::*;
    use approx::assert_relative_eq;

    fn trial(errs: &[(f64, f64)]) -> TrialResult {
        TrialResult {
            estimates: errs.iter().map(|&(t, r)| (t, r)).collect(),
            assignments: errs
                .iter()
                .enumerate()
                .map(|(k, &(et, er))| Assignment {
                    estimate_idx: k,
                    truth_idx: k,
                    err_theta_deg: et,
                    err_range_m: er,
                })
                .collect(),
            diagnostics: SolverDiagnostics::default(),
            wall_seconds: 0.0,
        }
    }

    #[test]
    fn exact_estimates_give_zero_metrics() {
        let trials = vec![trial(&[(0.0, 0.0), (0.0, 0.0)])];
        assert_eq!(rmse(&trials, ErrorParam::Theta), 0.0);
        let truths = vec![
            Target { theta_deg: 30.0, range_m: 1000.0, power: 1.0 },
            Target { theta_deg: -10.0, range_m: 2000.0, power: 1.0 },
        ];
        assert_eq!(mape(&trials, &truths, ErrorParam::Range).unwrap(), 0.0);
    }

    #[test]
    fn symmetric_errors_average_to_one_degree() {
        // K = 1, P = 2, errors +1 and -1 degree
        let trials = vec![trial(&[(1.0, 0.0)]), trial(&[(-1.0, 0.0)])];
        assert_relative_eq!(rmse(&trials, ErrorParam::Theta), 1.0);
    }

    #[test]
    fn single_percent_error() {
        // truth 100 m, one trial estimating 101 m
        let trials = vec![trial(&[(0.0, 1.0)])];
        let truths = vec![Target { theta_deg: 10.0, range_m: 100.0, power: 1.0 }];
        assert_relative_eq!(mape(&trials, &truths, ErrorParam::Range).unwrap(), 1.0);
    }

    #[test]
    fn hand_computed_table() {
        // two targets, two trials
        let trials = vec![trial(&[(0.5, 10.0), (-0.5, -30.0)]), trial(&[(1.5, 20.0), (0.5, 0.0)])];
        let want_rmse_theta = ((0.25 + 0.25 + 2.25 + 0.25) / 4.0f64).sqrt();
        assert_relative_eq!(rmse(&trials, ErrorParam::Theta), want_rmse_theta);
        let truths = vec![
            Target { theta_deg: 20.0, range_m: 1000.0, power: 1.0 },
            Target { theta_deg: -30.0, range_m: 3000.0, power: 1.0 },
        ];
        let want_mape_range = (10.0 + 30.0 + 20.0 + 0.0) / (2.0 * 4000.0) * 100.0;
        assert_relative_eq!(mape(&trials, &truths, ErrorParam::Range).unwrap(), want_mape_range);
    }

    #[test]
    fn zero_truths_rejected() {
        let trials = vec![trial(&[(0.0, 0.0)])];
        let truths = vec![Target { theta_deg: 0.0, range_m: 1000.0, power: 1.0 }];
        assert!(mape(&trials, &truths, ErrorParam::Theta).is_err());
    }
}
