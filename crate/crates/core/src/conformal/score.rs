use super::{ConformalError, ScoreKind};
use crate::estimator::ProbVector;

/// Node indices sorted by probability descending, then index ascending.
pub fn ranked_order(pi: &ProbVector) -> Vec<usize> {
    let p = pi.as_slice();
    let mut order: Vec<usize> = (0..p.len()).collect();
    order.sort_by(|&a, &b| p[b].total_cmp(&p[a]).then(a.cmp(&b)));
    order
}

fn check_nodes(pi: &ProbVector, u: &[usize]) -> Result<(), ConformalError> {
    if u.is_empty() {
        return Err(ConformalError::EmptySet);
    }
    match u.iter().find(|&&v| v >= pi.len()) {
        Some(&node) => Err(ConformalError::NodeOutOfRange { node, n_nodes: pi.len() }),
        None => Ok(()),
    }
}

/// `{v : pi(v) >= min_{z in u} pi(z)}`, sorted ascending.
pub fn gamma(pi: &ProbVector, u: &[usize]) -> Result<Vec<usize>, ConformalError> {
    check_nodes(pi, u)?;
    let floor = u.iter().map(|&z| pi[z]).fold(f64::INFINITY, f64::min);
    Ok((0..pi.len()).filter(|&v| pi[v] >= floor).collect())
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Score of a prefix of the ranked order: `count` members, compensated
/// `mass`, smallest member probability `last`, out of `total` mass.
fn prefix_score(kind: ScoreKind, mass: f64, count: usize, last: f64, total: f64) -> f64 {
    match kind {
        ScoreKind::Pre => -(mass / count as f64),
        ScoreKind::Rec => mass / total,
        ScoreKind::Min => -last,
    }
}

fn total_mass(pi: &ProbVector, order: &[usize]) -> f64 {
    let mut acc = CompensatedSum::default();
    for &v in order {
        acc.add(pi[v]);
    }
    acc.value()
}

/// Score of `u`, evaluated on `gamma(pi, u)`.
///
/// Members are summed in ranked order, the same sequence the prefix
/// evaluation in [`ScoreProfile`] uses, so both routes agree bit for bit.
pub fn score(kind: ScoreKind, pi: &ProbVector, u: &[usize]) -> Result<f64, ConformalError> {
    let closed = gamma(pi, u)?;
    let order = ranked_order(pi);
    let mut members: Vec<usize> = closed;
    members.sort_by(|&a, &b| pi[b].total_cmp(&pi[a]).then(a.cmp(&b)));
    let mut mass = CompensatedSum::default();
    for &v in &members {
        mass.add(pi[v]);
    }
    let last = pi[*members.last().expect("gamma of a non-empty set is non-empty")];
    Ok(prefix_score(kind, mass.value(), members.len(), last, total_mass(pi, &order)))
}

/// Singleton scores of every node, computed once in `O(N log N)`.
///
/// `groups` partitions the ranked order into runs of equal probability; all
/// nodes of a run share `gamma({v})` and hence one score.
#[derive(Debug, Clone)]
pub struct ScoreProfile {
    order: Vec<usize>,
    /// `(end, score)`: ranked positions `..end` form the gamma-closure of the run ending at `end`.
    groups: Vec<(usize, f64)>,
}

impl ScoreProfile {
    pub fn new(kind: ScoreKind, pi: &ProbVector) -> Self {
        let order = ranked_order(pi);
        let total = total_mass(pi, &order);
        let mut groups = Vec::new();
        let mut mass = CompensatedSum::default();
        for (pos, &v) in order.iter().enumerate() {
            mass.add(pi[v]);
            let run_ends = order.get(pos + 1).is_none_or(|&next| pi[next] != pi[v]);
            if run_ends {
                groups.push((pos + 1, prefix_score(kind, mass.value(), pos + 1, pi[v], total)));
            }
        }
        Self { order, groups }
    }

    pub fn ranked(&self) -> &[usize] {
        &self.order
    }

    /// `(prefix_end, score)` per run of tied probabilities, in ranked order.
    pub fn groups(&self) -> &[(usize, f64)] {
        &self.groups
    }

    /// Number of nodes whose singleton score is `<= q_hat`.
    pub fn set_size(&self, q_hat: f64) -> usize {
        let mut start = 0;
        let mut size = 0;
        for &(end, s) in &self.groups {
            if s <= q_hat {
                size += end - start;
            }
            start = end;
        }
        size
    }

    /// Nodes whose singleton score is `<= q_hat`, sorted ascending.
    pub fn select(&self, q_hat: f64) -> Vec<usize> {
        let mut start = 0;
        let mut nodes = Vec::new();
        for &(end, s) in &self.groups {
            if s <= q_hat {
                nodes.extend_from_slice(&self.order[start..end]);
            }
            start = end;
        }
        nodes.sort_unstable();
        nodes
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pv(p: &[f64]) -> ProbVector {
        ProbVector::new(p.to_vec()).unwrap()
    }

    #[test]
    fn gamma_figure_case() {
        // Nodes already indexed by decreasing probability; U = {v1, v2, v4}.
        let pi = pv(&[0.9, 0.8, 0.6, 0.5, 0.3, 0.1]);
        assert_eq!(gamma(&pi, &[0, 1, 3]).unwrap(), vec![0, 1, 2, 3]);
    }

    #[test]
    fn gamma_extremes_and_ties() {
        let pi = pv(&[0.2, 0.7, 0.4, 0.4]);
        assert_eq!(gamma(&pi, &[1]).unwrap(), vec![1]);
        assert_eq!(gamma(&pi, &[0, 1, 2, 3]).unwrap(), vec![0, 1, 2, 3]);
        assert_eq!(gamma(&pi, &[3]).unwrap(), vec![1, 2, 3]);
        assert!(matches!(gamma(&pi, &[]), Err(ConformalError::EmptySet)));
        assert!(matches!(gamma(&pi, &[4]), Err(ConformalError::NodeOutOfRange { .. })));
    }

    #[test]
    fn worked_scores() {
        // gamma({v2}) = {v1, v2}
        let pi = pv(&[0.5, 0.3, 0.2]);
        assert_eq!(score(ScoreKind::Pre, &pi, &[1]).unwrap(), -(0.5 + 0.3) / 2.0);
        assert!((score(ScoreKind::Pre, &pi, &[1]).unwrap() + 0.4).abs() < 1e-15);
        assert!((score(ScoreKind::Rec, &pi, &[1]).unwrap() - 0.8).abs() < 1e-15);
        assert_eq!(score(ScoreKind::Min, &pi, &[1]).unwrap(), -0.3);
    }

    #[test]
    fn rec_of_full_set_is_one() {
        let pi = pv(&[0.13, 0.77, 0.01, 0.4, 0.4]);
        assert_eq!(score(ScoreKind::Rec, &pi, &[0, 1, 2, 3, 4]).unwrap(), 1.0);
        assert_eq!(score(ScoreKind::Rec, &pi, &[2]).unwrap(), 1.0);
    }

    #[test]
    fn profile_matches_direct_singleton_scores_bitwise() {
        let pi = pv(&[0.1, 0.35, 0.35, 0.9, 1e-6, 0.2, 0.35, 1e-6]);
        for kind in ScoreKind::ALL {
            let profile = ScoreProfile::new(kind, &pi);
            let mut start = 0;
            for &(end, s) in profile.groups() {
                for &v in &profile.ranked()[start..end] {
                    assert_eq!(score(kind, &pi, &[v]).unwrap().to_bits(), s.to_bits(), "{kind} v={v}");
                }
                start = end;
            }
            assert_eq!(profile.groups().len(), 5);
        }
    }

    #[test]
    fn select_and_size_agree() {
        let pi = pv(&[0.1, 0.35, 0.35, 0.9, 0.2]);
        let profile = ScoreProfile::new(ScoreKind::Min, &pi);
        assert_eq!(profile.select(-0.35), vec![1, 2, 3]);
        assert_eq!(profile.set_size(-0.35), 3);
        assert_eq!(profile.select(f64::INFINITY).len(), 5);
        assert!(profile.select(-1.0).is_empty());
    }
}
