use crate::error::{Error, Result};

use super::schedule::ScheduleMatrix;

/// Greedy half-duplex repair of a `K × K` score matrix.
///
/// Candidates are the off-diagonal entries above 0.5, visited by descending
/// score with ties broken by `(row, column)`. A link `(r, k)` is accepted
/// only if `r` has no accepted incoming link and `k` has no accepted
/// outgoing link.
pub fn project_to_schedule<T: crate::Real>(users: usize, scores: &[T]) -> Result<ScheduleMatrix> {
    if scores.len() != users * users {
        return Err(Error::Shape {
            op: "project_to_schedule",
            lhs: vec![users, users],
            rhs: vec![scores.len()],
        });
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::NonFinite { name: "scores".into() });
    }
    let half = T::lit(0.5);
    let mut cand: Vec<(usize, usize)> = (0..users)
        .flat_map(|r| (0..users).map(move |k| (r, k)))
        .filter(|&(r, k)| r != k && scores[r * users + k] > half)
        .collect();
    cand.sort_by(|&(a, b), &(c, d)| {
        scores[c * users + d]
            .partial_cmp(&scores[a * users + b])
            .expect("finite scores")
            .then((a, b).cmp(&(c, d)))
    });
    let mut transmits = vec![false; users];
    let mut receives = vec![false; users];
    let mut links = Vec::new();
    for (r, k) in cand {
        if receives[r] || transmits[k] {
            continue;
        }
        transmits[r] = true;
        receives[k] = true;
        links.push((r, k));
    }
    ScheduleMatrix::from_links(users, &links)
}
