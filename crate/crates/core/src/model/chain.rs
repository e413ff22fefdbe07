use super::{BienModel, LastTarget, Segment, TagState};
use crate::error::{Error, Result};

/// A product hidden state. `last` is the memory value *after* the update
/// with `tag`, i.e. `LastTarget_t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProductState {
    pub tag: TagState,
    pub last: LastTarget,
    pub segment: Segment,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub log_p: f64,
}

/// The network flattened to one Markov chain over reachable product states.
///
/// Only positive-probability transitions are stored. Emission tables are
/// kept in log space, one per enabled observable.
#[derive(Debug, Clone)]
pub struct CompiledChain {
    pub states: Vec<ProductState>,
    /// `log P(s_1)`.
    pub initial: Vec<f64>,
    pub edges: Vec<Edge>,
    /// Edge ids into each state, ascending by source state.
    pub incoming: Vec<Vec<usize>>,
    /// Edge ids out of each state, ascending by target state.
    pub outgoing: Vec<Vec<usize>>,
    emissions: Vec<Option<(usize, Vec<f64>)>>,
    n_tags: usize,
    n_last: usize,
    lookup: Vec<Option<usize>>,
}

impl CompiledChain {
    /// Compile `model`, observing only the observables flagged in `enabled`.
    pub fn compile(model: &BienModel, enabled: &[bool]) -> Result<Self> {
        model.validate()?;
        if enabled.len() != model.observables.len() {
            return Err(Error::InvalidSpec(format!(
                "{} enabled flags for {} observables",
                enabled.len(),
                model.observables.len()
            )));
        }
        let n_tags = model.tag_count();
        let n_last = model.last_target_count();
        let mut states = Vec::new();
        let mut lookup = vec![None; n_tags * n_last * 2];
        for t in 0..n_tags {
            let tag = TagState::from_index(t);
            for l in 0..n_last {
                let last = LastTarget::from_index(l);
                if tag.field().is_some() && last != LastTarget(tag.field()) {
                    continue;
                }
                for segment in Segment::ALL {
                    lookup[(t * n_last + l) * 2 + segment.index()] = Some(states.len());
                    states.push(ProductState { tag, last, segment });
                }
            }
        }

        let initial = states
            .iter()
            .map(|s| {
                if s.last != LastTarget::NONE.update(s.tag) {
                    return f64::NEG_INFINITY;
                }
                (model.p_segment_initial(s.segment) * model.p_tag_initial(s.segment, s.tag)).ln()
            })
            .collect();

        let mut edges = Vec::new();
        let mut incoming = vec![Vec::new(); states.len()];
        let mut outgoing = vec![Vec::new(); states.len()];
        for (from, s) in states.iter().enumerate() {
            for ds in Segment::ALL {
                let p_ds = model.p_segment(s.segment, ds);
                if p_ds == 0.0 {
                    continue;
                }
                for t in 0..n_tags {
                    let tag = TagState::from_index(t);
                    let p_tag = model.p_tag(s.tag, s.last, ds, tag);
                    if p_tag == 0.0 {
                        continue;
                    }
                    let last = s.last.update(tag);
                    let to = lookup[(t * n_last + last.index()) * 2 + ds.index()].expect("update keeps states reachable");
                    edges.push(Edge {
                        from,
                        to,
                        log_p: (p_ds * p_tag).ln(),
                    });
                }
            }
        }
        edges.sort_by_key(|e| (e.from, e.to));
        for (id, e) in edges.iter().enumerate() {
            outgoing[e.from].push(id);
        }
        let mut by_to: Vec<usize> = (0..edges.len()).collect();
        by_to.sort_by_key(|&id| (edges[id].to, edges[id].from));
        for id in by_to {
            incoming[edges[id].to].push(id);
        }

        let emissions = model
            .emissions
            .iter()
            .zip(enabled)
            .map(|(cpt, &on)| on.then(|| (cpt.child_card, cpt.values().iter().map(|p| p.ln()).collect())))
            .collect();

        Ok(CompiledChain {
            states,
            initial,
            edges,
            incoming,
            outgoing,
            emissions,
            n_tags,
            n_last,
            lookup,
        })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state_index(&self, tag: TagState, last: LastTarget, segment: Segment) -> Option<usize> {
        let (t, l) = (tag.index(), last.index());
        if t >= self.n_tags || l >= self.n_last {
            return None;
        }
        self.lookup[(t * self.n_last + l) * 2 + segment.index()]
    }

    pub fn observable_count(&self) -> usize {
        self.emissions.len()
    }

    pub fn is_enabled(&self, k: usize) -> bool {
        self.emissions[k].is_some()
    }

    /// Reject observations of the wrong width or with out-of-range values.
    pub fn check_observation(&self, obs: &[Option<u32>]) -> Result<()> {
        if obs.len() != self.emissions.len() {
            return Err(Error::Validation(format!(
                "observation has {} values, model declares {}",
                obs.len(),
                self.emissions.len()
            )));
        }
        for (k, (v, e)) in obs.iter().zip(&self.emissions).enumerate() {
            if let (Some(v), Some((card, _))) = (v, e) {
                if *v as usize >= *card {
                    return Err(Error::Validation(format!("observable {k} value {v} out of range 0..{card}")));
                }
            }
        }
        Ok(())
    }

    /// `log P(obs | state)`; masked observables and `None` values contribute 0.
    pub fn log_emission(&self, state: usize, obs: &[Option<u32>]) -> f64 {
        let s = &self.states[state];
        let row = s.tag.index() * 2 + s.segment.index();
        let mut acc = 0.0;
        for (v, e) in obs.iter().zip(&self.emissions) {
            if let (Some(v), Some((card, table))) = (v, e) {
                acc += table[row * card + *v as usize];
            }
        }
        acc
    }

    /// Dense linear-space transition matrix (rows are source states).
    pub fn transition_matrix(&self) -> Vec<Vec<f64>> {
        let mut m = vec![vec![0.0; self.len()]; self.len()];
        for e in &self.edges {
            m[e.from][e.to] += e.log_p.exp();
        }
        m
    }
}
