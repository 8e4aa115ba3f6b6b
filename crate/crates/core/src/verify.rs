//! Exhaustive oracles: fix a base path on Z that ends at the origin and
//! enumerate every sequence of lamp draws along it.

use std::collections::HashMap;

use rustc_hash::FxHashMap;

use crate::dynamics::WalkerState;
use crate::error::{Error, Result};
use crate::exact::{ret_prob_given_extremes, ret_prob_given_local_times};
use crate::lamp::{LampElement, LampGroup, SwitchMeasure};

/// All nearest-neighbour paths `0 = x_0, ..., x_L = 0` with `2 <= L <= max_len`.
pub fn base_return_paths(max_len: usize) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut path = vec![0i64];
    extend_paths(&mut path, max_len, &mut out);
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    out
}

fn extend_paths(path: &mut Vec<i64>, max_len: usize, out: &mut Vec<Vec<i64>>) {
    let steps = path.len() - 1;
    let x = *path.last().unwrap();
    if steps > 0 && x == 0 {
        out.push(path.clone());
    }
    if steps == max_len || x.unsigned_abs() as usize > max_len - steps {
        return;
    }
    for next in [x - 1, x + 1] {
        path.push(next);
        extend_paths(path, max_len, out);
        path.pop();
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleCase {
    pub path: Vec<i64>,
    pub m_plus: i64,
    pub m_minus: i64,
    pub enumerated: f64,
    pub predicted: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub suite: String,
    pub cases: Vec<OracleCase>,
    pub max_abs_error: f64,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        !self.cases.is_empty() && self.cases.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> usize {
        self.cases.iter().filter(|c| !c.passed).count()
    }
}

fn extremes(path: &[i64]) -> (i64, i64) {
    let max = *path.iter().max().unwrap();
    let min = *path.iter().min().unwrap();
    (max, min)
}

/// Visits at times `0 <= t < L`.
fn switch_visits(path: &[i64]) -> HashMap<i64, u64> {
    let mut visits = HashMap::new();
    for &x in &path[..path.len() - 1] {
        *visits.entry(x).or_insert(0) += 1;
    }
    visits
}

/// Calls `leaf(state, weight)` for every draw sequence along `path`.
fn enumerate_draws(
    path: &[i64],
    group: LampGroup,
    draws: &[(LampElement, f64)],
    leaf: &mut dyn FnMut(&WalkerState<i64>, f64),
) {
    fn go(
        state: &WalkerState<i64>,
        path: &[i64],
        t: usize,
        weight: f64,
        draws: &[(LampElement, f64)],
        leaf: &mut dyn FnMut(&WalkerState<i64>, f64),
    ) {
        if t + 1 == path.len() {
            leaf(state, weight);
            return;
        }
        for &(u, pu) in draws {
            for &(v, pv) in draws {
                let mut next = state.clone();
                next.apply_step(u, path[t + 1], v);
                go(&next, path, t + 1, weight * pu * pv, draws, leaf);
            }
        }
    }
    let start = WalkerState::identity(group, path[0]);
    go(&start, path, 0, 1.0, draws, leaf);
}

/// Uniform lamps on `Z/order`: for each path, counts identity outcomes among all
/// `order^{2L}` draw sequences and checks `count · order^{range} = order^{2L}`
/// exactly. Also checks that the final configuration is uniform over the lamps
/// on `[M⁻, M⁺]` and trivial elsewhere.
pub fn verify_uniform_lamp_law(order: u64, max_len: usize) -> Result<OracleReport> {
    if order < 2 {
        return Err(Error::param("lamp order must be >= 2"));
    }
    if max_len < 2 {
        return Err(Error::param("max_len must be >= 2"));
    }
    let group = LampGroup::cyclic(order)?;
    let draws: Vec<(LampElement, f64)> = (0..order as i64).map(|h| (h, 1.0)).collect();
    let mut cases = Vec::new();
    for path in base_return_paths(max_len) {
        let steps = path.len() as u32 - 1;
        let total = order
            .checked_pow(2 * steps)
            .ok_or_else(|| Error::param("enumeration too large"))?;
        let (m_plus, m_minus) = extremes(&path);
        let sites = (m_plus - m_minus + 1) as u32;
        let mut identity = 0u64;
        let mut outside_ok = true;
        let mut configs: FxHashMap<Vec<LampElement>, u64> = FxHashMap::default();
        enumerate_draws(&path, group, &draws, &mut |state, _| {
            if state.lamps.is_identity() {
                identity += 1;
            }
            if state.lamps.iter().any(|(x, _)| x < m_minus || x > m_plus) {
                outside_ok = false;
            }
            let key: Vec<LampElement> = (m_minus..=m_plus).map(|x| state.lamps.get(x)).collect();
            *configs.entry(key).or_insert(0) += 1;
        });
        let per_config = total / order.pow(sites);
        let uniform = configs.len() as u64 == order.pow(sites)
            && configs.values().all(|&c| c == per_config);
        let formula_exact = identity * order.pow(sites) == total;
        let predicted = ret_prob_given_extremes(m_plus, m_minus, order)?;
        cases.push(OracleCase {
            path,
            m_plus,
            m_minus,
            enumerated: identity as f64 / total as f64,
            predicted,
            passed: formula_exact && uniform && outside_ok,
        });
    }
    let max_abs_error = max_error(&cases);
    Ok(OracleReport {
        suite: format!("uniform lamps on Z/{order}, paths up to length {max_len}"),
        cases,
        max_abs_error,
    })
}

/// General symmetric measure: the enumerated probability that every lamp is the
/// identity must equal `Π_g μ^{*(2 n_g)}(id)` within `tol`, with `n_g` the visits
/// to `g` before the final return.
pub fn verify_general_measure(measure: &SwitchMeasure, max_len: usize, tol: f64) -> Result<OracleReport> {
    if max_len < 2 {
        return Err(Error::param("max_len must be >= 2"));
    }
    let draws = measure.support().to_vec();
    let mut cases = Vec::new();
    for path in base_return_paths(max_len) {
        let (m_plus, m_minus) = extremes(&path);
        let mut prob = 0.0;
        enumerate_draws(&path, measure.group(), &draws, &mut |state, w| {
            if state.lamps.is_identity() {
                prob += w;
            }
        });
        let predicted = ret_prob_given_local_times(&switch_visits(&path), measure);
        cases.push(OracleCase {
            passed: (prob - predicted).abs() <= tol,
            path,
            m_plus,
            m_minus,
            enumerated: prob,
            predicted,
        });
    }
    let max_abs_error = max_error(&cases);
    Ok(OracleReport {
        suite: format!("measure {:?}, paths up to length {max_len}", measure.support()),
        cases,
        max_abs_error,
    })
}

/// The three-point integer measure `{-1: 1/4, 0: 1/2, 1: 1/4}`.
pub fn three_point_integer_measure() -> SwitchMeasure {
    SwitchMeasure::new(LampGroup::Integers, &[(-1, 0.25), (0, 0.5), (1, 0.25)])
        .expect("valid measure")
}

fn max_error(cases: &[OracleCase]) -> f64 {
    cases
        .iter()
        .map(|c| (c.enumerated - c.predicted).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_counts() {
        // paths of length 2n returning to 0 (not necessarily first return): C(2n, n)
        let paths = base_return_paths(6);
        let count = |l: usize| paths.iter().filter(|p| p.len() == l + 1).count();
        assert_eq!(count(2), 2);
        assert_eq!(count(4), 6);
        assert_eq!(count(6), 20);
        assert_eq!(paths.len(), 28);
        assert!(paths.iter().all(|p| p.windows(2).all(|w| (w[0] - w[1]).abs() == 1)));
    }

    #[test]
    fn uniform_z2_up_to_six() {
        let r = verify_uniform_lamp_law(2, 6).unwrap();
        assert!(r.passed(), "{:?}", r.cases.iter().find(|c| !c.passed));
        assert_eq!(r.max_abs_error, 0.0);
        let c = r.cases.iter().find(|c| c.path == vec![0, 1, 0]).unwrap();
        assert_eq!(c.enumerated, 0.25);
    }

    #[test]
    fn uniform_z3_up_to_four() {
        assert!(verify_uniform_lamp_law(3, 4).unwrap().passed());
    }

    #[test]
    fn three_point_up_to_four() {
        let r = verify_general_measure(&three_point_integer_measure(), 4, 1e-12).unwrap();
        assert!(r.passed());
        assert!(r.max_abs_error < 1e-14);
    }

    #[test]
    fn inclusive_counts_disagree() {
        // Counting the final return at the origin as a switch visit is wrong.
        let m = three_point_integer_measure();
        let path = vec![0i64, 1, 0];
        let mut inclusive = switch_visits(&path);
        *inclusive.get_mut(&0).unwrap() += 1;
        let r = verify_general_measure(&m, 2, 1e-12).unwrap();
        let case = r.cases.iter().find(|c| c.path == path).unwrap();
        let wrong = ret_prob_given_local_times(&inclusive, &m);
        assert!((case.enumerated - wrong).abs() > 1e-3);
    }
}
