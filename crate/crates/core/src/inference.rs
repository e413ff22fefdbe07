//! Exact inference on a compiled chain: log-space forward-backward and
//! Viterbi.

use crate::error::{Error, Result};
use crate::model::{CompiledChain, Observation, Segment, TagState};

/// Observed values for one document plus optional hidden-variable clamps.
#[derive(Debug, Clone, Default)]
pub struct Evidence {
    pub observations: Vec<Observation>,
    /// Per-token allowed Tag values; empty means unclamped.
    pub tag_clamps: Vec<Option<Vec<TagState>>>,
    /// Per-token observed segment; empty means hidden.
    pub segment_clamps: Vec<Option<Segment>>,
}

impl Evidence {
    pub fn new(observations: Vec<Observation>) -> Self {
        Evidence {
            observations,
            ..Default::default()
        }
    }

    /// Clamp every token to a single Tag value.
    pub fn with_tags(mut self, tags: &[TagState]) -> Self {
        self.tag_clamps = tags.iter().map(|&t| Some(vec![t])).collect();
        self
    }

    pub fn with_tag_sets(mut self, sets: Vec<Option<Vec<TagState>>>) -> Self {
        self.tag_clamps = sets;
        self
    }

    pub fn with_segments(mut self, segments: &[Segment]) -> Self {
        self.segment_clamps = segments.iter().map(|&s| Some(s)).collect();
        self
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct Posteriors {
    /// `gamma[t][s] = P(s_t = s | evidence)`.
    pub gamma: Vec<Vec<f64>>,
    pub log_likelihood: f64,
    /// `xi[t]` lists `(edge id, P(s_t = from, s_{t+1} = to | evidence))`
    /// for the edges with positive posterior mass.
    pub xi: Option<Vec<Vec<(usize, f64)>>>,
}

/// `log(sum(exp(x)))` in one pass.
pub fn log_sum_exp(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut max = f64::NEG_INFINITY;
    let mut sum = 0.0;
    for x in values {
        if x == f64::NEG_INFINITY {
            continue;
        }
        if x > max {
            sum = sum * (max - x).exp() + 1.0;
            max = x;
        } else {
            sum += (x - max).exp();
        }
    }
    if max == f64::NEG_INFINITY {
        max
    } else {
        max + sum.ln()
    }
}

/// Per-token log emissions, `-inf` where the clamps exclude a state.
fn local_scores(chain: &CompiledChain, ev: &Evidence) -> Result<Vec<Vec<f64>>> {
    let t_len = ev.len();
    if !ev.tag_clamps.is_empty() && ev.tag_clamps.len() != t_len {
        return Err(Error::Validation(format!("{} tag clamps for {t_len} tokens", ev.tag_clamps.len())));
    }
    if !ev.segment_clamps.is_empty() && ev.segment_clamps.len() != t_len {
        return Err(Error::Validation(format!(
            "{} segment clamps for {t_len} tokens",
            ev.segment_clamps.len()
        )));
    }
    let mut out = Vec::with_capacity(t_len);
    for t in 0..t_len {
        let obs = &ev.observations[t];
        chain.check_observation(obs)?;
        let tags = ev.tag_clamps.get(t).and_then(Option::as_ref);
        if tags.is_some_and(|s| s.is_empty()) {
            return Err(Error::Validation(format!("empty tag clamp at token {t}")));
        }
        let seg = ev.segment_clamps.get(t).copied().flatten();
        let row = chain
            .states
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let ok = tags.is_none_or(|set| set.contains(&s.tag)) && seg.is_none_or(|d| d == s.segment);
                if ok {
                    chain.log_emission(i, obs)
                } else {
                    f64::NEG_INFINITY
                }
            })
            .collect();
        out.push(row);
    }
    Ok(out)
}

fn forward(chain: &CompiledChain, local: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let n = chain.len();
    let mut alpha: Vec<Vec<f64>> = Vec::with_capacity(local.len());
    for (t, e) in local.iter().enumerate() {
        let row: Vec<f64> = (0..n)
            .map(|s| {
                if e[s] == f64::NEG_INFINITY {
                    return f64::NEG_INFINITY;
                }
                let prior = match alpha.last() {
                    None => chain.initial[s],
                    Some(prev) => log_sum_exp(chain.incoming[s].iter().map(|&id| {
                        let edge = &chain.edges[id];
                        prev[edge.from] + edge.log_p
                    })),
                };
                prior + e[s]
            })
            .collect();
        if row.iter().all(|&a| a == f64::NEG_INFINITY) {
            return Err(Error::ZeroProbabilityEvidence { step: t });
        }
        alpha.push(row);
    }
    Ok(alpha)
}

fn backward(chain: &CompiledChain, local: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = chain.len();
    let t_len = local.len();
    let mut beta = vec![vec![f64::NEG_INFINITY; n]; t_len];
    if t_len == 0 {
        return beta;
    }
    beta[t_len - 1] = local[t_len - 1]
        .iter()
        .map(|&e| if e == f64::NEG_INFINITY { e } else { 0.0 })
        .collect();
    for t in (0..t_len - 1).rev() {
        let next_e = &local[t + 1];
        let row: Vec<f64> = (0..n)
            .map(|s| {
                if local[t][s] == f64::NEG_INFINITY {
                    return f64::NEG_INFINITY;
                }
                log_sum_exp(chain.outgoing[s].iter().map(|&id| {
                    let edge = &chain.edges[id];
                    edge.log_p + next_e[edge.to] + beta[t + 1][edge.to]
                }))
            })
            .collect();
        beta[t] = row;
    }
    beta
}

/// Posterior marginals and log-likelihood; pairwise posteriors when
/// `with_xi`.
pub fn forward_backward(chain: &CompiledChain, ev: &Evidence, with_xi: bool) -> Result<Posteriors> {
    let local = local_scores(chain, ev)?;
    let t_len = local.len();
    if t_len == 0 {
        return Ok(Posteriors {
            gamma: Vec::new(),
            log_likelihood: 0.0,
            xi: with_xi.then(Vec::new),
        });
    }
    let alpha = forward(chain, &local)?;
    let beta = backward(chain, &local);
    let ll = log_sum_exp(alpha[t_len - 1].iter().copied());
    let ll_back = log_sum_exp((0..chain.len()).map(|s| chain.initial[s] + local[0][s] + beta[0][s]));
    if !ll.is_finite() || (ll - ll_back).abs() > 1e-9 * ll.abs().max(1.0) {
        return Err(Error::Numeric(format!(
            "forward log-likelihood {ll} disagrees with backward {ll_back}"
        )));
    }
    let gamma = (0..t_len)
        .map(|t| {
            let mut row: Vec<f64> = (0..chain.len()).map(|s| (alpha[t][s] + beta[t][s] - ll).exp()).collect();
            // renormalize away the last ulps of rounding
            let z: f64 = row.iter().sum();
            row.iter_mut().for_each(|g| *g /= z);
            row
        })
        .collect();
    let xi = with_xi.then(|| {
        (0..t_len - 1)
            .map(|t| {
                chain
                    .edges
                    .iter()
                    .enumerate()
                    .filter_map(|(id, edge)| {
                        let lp = alpha[t][edge.from] + edge.log_p + local[t + 1][edge.to] + beta[t + 1][edge.to] - ll;
                        (lp > f64::NEG_INFINITY).then(|| (id, lp.exp()))
                    })
                    .collect()
            })
            .collect()
    });
    Ok(Posteriors {
        gamma,
        log_likelihood: ll,
        xi,
    })
}

/// MAP state path and its joint log-probability. Ties go to the lowest
/// state index.
pub fn viterbi(chain: &CompiledChain, ev: &Evidence) -> Result<(Vec<usize>, f64)> {
    let local = local_scores(chain, ev)?;
    let t_len = local.len();
    if t_len == 0 {
        return Ok((Vec::new(), 0.0));
    }
    let n = chain.len();
    let mut delta: Vec<f64> = (0..n).map(|s| chain.initial[s] + local[0][s]).collect();
    if delta.iter().all(|&d| d == f64::NEG_INFINITY) {
        return Err(Error::ZeroProbabilityEvidence { step: 0 });
    }
    let mut back: Vec<Vec<usize>> = Vec::with_capacity(t_len - 1);
    for (t, e) in local.iter().enumerate().skip(1) {
        let mut next = vec![f64::NEG_INFINITY; n];
        let mut ptr = vec![usize::MAX; n];
        for s in 0..n {
            if e[s] == f64::NEG_INFINITY {
                continue;
            }
            let mut best = f64::NEG_INFINITY;
            let mut arg = usize::MAX;
            // incoming edges are sorted by source, so `>` keeps the lowest index
            for &id in &chain.incoming[s] {
                let edge = &chain.edges[id];
                let v = delta[edge.from] + edge.log_p;
                if v > best {
                    best = v;
                    arg = edge.from;
                }
            }
            if arg != usize::MAX {
                next[s] = best + e[s];
                ptr[s] = arg;
            }
        }
        if next.iter().all(|&d| d == f64::NEG_INFINITY) {
            return Err(Error::ZeroProbabilityEvidence { step: t });
        }
        delta = next;
        back.push(ptr);
    }
    let mut last = 0;
    for s in 1..n {
        if delta[s] > delta[last] {
            last = s;
        }
    }
    let score = delta[last];
    let mut path = vec![last; t_len];
    for t in (1..t_len).rev() {
        path[t - 1] = back[t - 1][path[t]];
    }
    Ok((path, score))
}

/// Joint log-probability of a complete state path with the evidence, or
/// `-inf` if the path is impossible.
pub fn path_log_probability(chain: &CompiledChain, ev: &Evidence, path: &[usize]) -> Result<f64> {
    let local = local_scores(chain, ev)?;
    if path.len() != local.len() {
        return Err(Error::Validation("path length differs from evidence".into()));
    }
    let Some(&first) = path.first() else {
        return Ok(0.0);
    };
    let mut lp = chain.initial[first] + local[0][first];
    for t in 1..path.len() {
        let step = chain.outgoing[path[t - 1]]
            .iter()
            .map(|&id| &chain.edges[id])
            .find(|e| e.to == path[t])
            .map_or(f64::NEG_INFINITY, |e| e.log_p);
        lp += step + local[t][path[t]];
    }
    Ok(lp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_sum_exp_basics() {
        assert_eq!(log_sum_exp([]), f64::NEG_INFINITY);
        assert_eq!(log_sum_exp([f64::NEG_INFINITY, 0.0]), 0.0);
        let v = log_sum_exp([1000.0, 1000.0]);
        assert!((v - (1000.0 + 2f64.ln())).abs() < 1e-12);
        let v = log_sum_exp([-3.0, 1.0, -0.5]);
        let direct = ((-3f64).exp() + 1f64.exp() + (-0.5f64).exp()).ln();
        assert!((v - direct).abs() < 1e-12);
    }
}
