use super::instance::{Node, NodeKind};
use super::params::ParameterCascade;
use super::types::{Status, Timestamp};

/// Statuses and determination times of all nodes at time `now`.
///
/// Children always carry larger ids than their parents, so a single
/// reverse sweep sees every child before its parent. The result depends only
/// on the tree and `now`.
pub(crate) fn compute_statuses(
    nodes: &[Node],
    cascade: &ParameterCascade,
    now: u64,
) -> Vec<(Status, Option<Timestamp>)> {
    let mut out = vec![(Status::Pending, None); nodes.len()];
    for (i, node) in nodes.iter().enumerate().rev() {
        let children = node.children.iter().map(|c| out[c.0 as usize]);
        out[i] = match &node.kind {
            NodeKind::Claim { verdict: Some(v), .. } => {
                let status = if v.validated {
                    Status::Validated
                } else {
                    Status::Invalidated
                };
                (status, Some(node.posted_at))
            }
            NodeKind::Claim { verdict: None, .. } => {
                let closes = node.window_closes(cascade).expect("chain claims have a window");
                combine(
                    children,
                    now,
                    closes,
                    Status::Unanswered,
                    Status::Answered,
                    Status::Invalidated,
                    Status::Validated,
                )
            }
            NodeKind::Question { .. } => {
                let closes = node.window_closes(cascade).expect("questions have a window");
                combine(
                    children,
                    now,
                    closes,
                    Status::Validated,
                    Status::Invalidated,
                    Status::Answered,
                    Status::Unanswered,
                )
            }
        };
    }
    out
}

/// A node is `decisive` as soon as one child reaches `child_decisive`
/// (earliest such time), and `fallback` once its window has closed and every
/// child reached `child_fallback` (latest of those times and the closing).
fn combine(
    children: impl Iterator<Item = (Status, Option<Timestamp>)>,
    now: u64,
    closes: u64,
    child_decisive: Status,
    child_fallback: Status,
    decisive: Status,
    fallback: Status,
) -> (Status, Option<Timestamp>) {
    let mut first_decisive: Option<Timestamp> = None;
    let mut all_fallback = true;
    let mut latest = Timestamp::deadline(closes);
    for (status, at) in children {
        if status == child_decisive {
            let at = at.expect("statused");
            first_decisive = Some(first_decisive.map_or(at, |f| f.min(at)));
        } else if status == child_fallback {
            latest = latest.max(at.expect("statused"));
        } else {
            all_fallback = false;
        }
    }
    if let Some(at) = first_decisive {
        (decisive, Some(at))
    } else if all_fallback && now >= closes {
        (fallback, Some(latest))
    } else {
        (Status::Pending, None)
    }
}
