//! Subset enumeration shared by the finite and unique checks.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::profile::RowProfile;
use crate::pattern::ConstraintTensor;

/// An inequality quantified over column subsets, with left side monotone
/// under adding columns.
pub(crate) trait SubsetCondition {
    /// Left and right side for the current selection of `size` columns.
    fn sides(&self, p: &RowProfile<'_>, size: usize) -> (i64, i64);

    fn violated(&self, p: &RowProfile<'_>, size: usize) -> bool {
        let (lhs, rhs) = self.sides(p, size);
        lhs < rhs
    }

    /// True when no superset of the selection with at most `max_size`
    /// columns can violate the inequality.
    fn settled(&self, p: &RowProfile<'_>, size: usize, max_size: usize) -> bool;
}

/// `Σ_i (r_{i-1} r_i m_i − r_i²)⁺ ≥ t`.
pub(crate) struct Capacity;

impl SubsetCondition for Capacity {
    fn sides(&self, p: &RowProfile<'_>, size: usize) -> (i64, i64) {
        (p.capacity(), size as i64)
    }

    fn settled(&self, p: &RowProfile<'_>, _size: usize, max_size: usize) -> bool {
        p.capacity() >= max_size as i64
    }
}

/// Per-mode uniqueness inequality, scaled by `r_{i-1}`:
/// `r_{i-1} m_i − r_i ≥ r_{i-1} t − r_i (t − M_i + 1)⁺`.
pub(crate) struct ModeCondition {
    /// 0-based mode.
    pub mode: usize,
    pub target: usize,
}

impl ModeCondition {
    fn rhs(&self, p: &RowProfile<'_>, t: usize) -> i64 {
        let (lo, hi) = (p.rank(self.mode), p.rank(self.mode + 1));
        let excess = (t as i64 - self.target as i64 + 1).max(0);
        lo * t as i64 - hi * excess
    }

    fn lhs(&self, p: &RowProfile<'_>) -> i64 {
        let (lo, hi) = (p.rank(self.mode), p.rank(self.mode + 1));
        lo * p.rows(self.mode) as i64 - hi
    }
}

impl SubsetCondition for ModeCondition {
    fn sides(&self, p: &RowProfile<'_>, size: usize) -> (i64, i64) {
        (self.lhs(p), self.rhs(p, size))
    }

    fn settled(&self, p: &RowProfile<'_>, size: usize, max_size: usize) -> bool {
        let lhs = self.lhs(p);
        (size.max(1)..=max_size).all(|t| lhs >= self.rhs(p, t))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Scan {
    /// Every subset satisfies the inequality.
    Clean,
    /// Smallest violating subset found, lexicographically least among those.
    Violation(Vec<usize>),
    /// The node limit was hit before the scan finished.
    Exhausted,
}

/// Scans every set `forced ∪ U` with `U ⊆ pool` (nonempty overall).
///
/// Depth-first in lexicographic order of `pool` positions. A branch is cut
/// when the condition is settled for all its completions, or when it cannot
/// beat the smallest violation found so far.
pub(crate) struct SubsetScan<'c, 'a, C: SubsetCondition> {
    cond: &'c C,
    profile: RowProfile<'a>,
    pool: Vec<usize>,
    forced: Vec<usize>,
    limit: Option<u64>,
    pub nodes: u64,
    best: Option<Vec<usize>>,
    stack: Vec<usize>,
    aborted: bool,
}

impl<'c, 'a, C: SubsetCondition> SubsetScan<'c, 'a, C> {
    pub(crate) fn new(
        ct: &'a ConstraintTensor,
        cond: &'c C,
        forced: &[usize],
        pool: &[usize],
        limit: Option<u64>,
    ) -> Self {
        SubsetScan {
            cond,
            profile: RowProfile::with_columns(ct, forced),
            pool: pool.to_vec(),
            forced: forced.to_vec(),
            limit,
            nodes: 0,
            best: None,
            stack: Vec::new(),
            aborted: false,
        }
    }

    pub(crate) fn run(mut self) -> (Scan, u64) {
        self.visit(0);
        let nodes = self.nodes;
        let scan = match (self.best, self.aborted) {
            (Some(w), _) => Scan::Violation(w),
            (None, true) => Scan::Exhausted,
            (None, false) => Scan::Clean,
        };
        (scan, nodes)
    }

    fn visit(&mut self, start: usize) {
        if self.aborted {
            return;
        }
        self.nodes += 1;
        if self.limit.is_some_and(|l| self.nodes > l) {
            self.aborted = true;
            return;
        }
        let size = self.profile.len();
        if size > 0 && self.cond.violated(&self.profile, size) {
            let mut w: Vec<usize> = self.forced.iter().chain(&self.stack).copied().collect();
            w.sort_unstable();
            let better = match &self.best {
                None => true,
                Some(b) => (w.len(), &w) < (b.len(), b),
            };
            if better {
                self.best = Some(w);
            }
            return;
        }
        let mut max_size = size + (self.pool.len() - start);
        if let Some(b) = &self.best {
            if size + 1 >= b.len() {
                return;
            }
            max_size = max_size.min(b.len() - 1);
        }
        if max_size == size || self.cond.settled(&self.profile, size, max_size) {
            return;
        }
        for j in start..self.pool.len() {
            let k = self.pool[j];
            self.profile.add(k);
            self.stack.push(k);
            self.visit(j + 1);
            self.stack.pop();
            self.profile.remove(k);
            if self.aborted {
                return;
            }
        }
    }
}

/// Random subsets of `sel`, each violation shrunk greedily by dropping
/// columns while it stays violated. Returns the smallest one found.
pub(crate) fn random_falsify<C: SubsetCondition>(
    ct: &ConstraintTensor,
    cond: &C,
    sel: &[usize],
    trials: u64,
    seed: u64,
) -> Option<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<Vec<usize>> = None;
    for _ in 0..trials {
        let size = rng.random_range(1..=sel.len());
        let mut set: Vec<usize> = sample(&mut rng, sel.len(), size)
            .into_iter()
            .map(|j| sel[j])
            .collect();
        set.sort_unstable();
        let mut p = RowProfile::with_columns(ct, &set);
        if !cond.violated(&p, set.len()) {
            continue;
        }
        let mut j = 0;
        while j < set.len() && set.len() > 1 {
            let k = set[j];
            p.remove(k);
            if cond.violated(&p, set.len() - 1) {
                set.remove(j);
            } else {
                p.add(k);
                j += 1;
            }
        }
        let better = match &best {
            None => true,
            Some(b) => (set.len(), &set) < (b.len(), b),
        };
        if better {
            best = Some(set);
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Growth {
    Found(Vec<usize>),
    /// The whole search tree was explored without success.
    Infeasible,
    /// Node budget hit, or some subset scan was inconclusive.
    Inconclusive,
}

#[derive(Debug, Clone, Default)]
pub(crate) struct Effort {
    pub nodes: u64,
    pub subsets: u64,
}

/// Looks for `target` columns among `candidates` such that every nonempty
/// subset satisfies `cond`.
///
/// Branches include/exclude over candidates ordered by decreasing marginal
/// gain of the condition's left side. Each inclusion is checked on the
/// subsets containing the new column only, since the rest were checked
/// when their columns were added.
pub(crate) struct Grower<'c, 'a, C: SubsetCondition> {
    ct: &'a ConstraintTensor,
    cond: &'c C,
    target: usize,
    max_nodes: u64,
    scan_limit: u64,
    exhaustive_up_to: usize,
    pub effort: Effort,
    incomplete: bool,
    out_of_nodes: bool,
}

impl<'c, 'a, C: SubsetCondition> Grower<'c, 'a, C> {
    pub(crate) fn new(
        ct: &'a ConstraintTensor,
        cond: &'c C,
        target: usize,
        max_nodes: u64,
        scan_limit: u64,
        exhaustive_up_to: usize,
    ) -> Self {
        Grower {
            ct,
            cond,
            target,
            max_nodes,
            scan_limit,
            exhaustive_up_to,
            effort: Effort::default(),
            incomplete: false,
            out_of_nodes: false,
        }
    }

    pub(crate) fn run(&mut self, candidates: &[usize]) -> Growth {
        if self.target == 0 {
            return Growth::Found(Vec::new());
        }
        let mut chosen = Vec::new();
        let mut profile = RowProfile::new(self.ct);
        match self.grow(&mut chosen, &mut profile, candidates.to_vec()) {
            Some(found) => Growth::Found(found),
            None if self.incomplete || self.out_of_nodes => Growth::Inconclusive,
            None => Growth::Infeasible,
        }
    }

    fn grow(
        &mut self,
        chosen: &mut Vec<usize>,
        profile: &mut RowProfile<'a>,
        avail: Vec<usize>,
    ) -> Option<Vec<usize>> {
        if self.out_of_nodes {
            return None;
        }
        self.effort.nodes += 1;
        if self.effort.nodes > self.max_nodes {
            self.out_of_nodes = true;
            return None;
        }
        if chosen.len() == self.target {
            let mut out = chosen.clone();
            out.sort_unstable();
            return Some(out);
        }
        if chosen.len() + avail.len() < self.target {
            return None;
        }
        // Final set lies inside chosen ∪ avail and the left side is monotone.
        for &k in &avail {
            profile.add(k);
        }
        let reachable = !self.cond.violated(profile, self.target);
        for &k in &avail {
            profile.remove(k);
        }
        if !reachable {
            return None;
        }

        let base = self.cond.sides(profile, chosen.len()).0;
        let mut valid = Vec::new();
        for &k in &avail {
            profile.add(k);
            let gain = self.cond.sides(profile, chosen.len() + 1).0 - base;
            profile.remove(k);
            let limit = (chosen.len() >= self.exhaustive_up_to).then_some(self.scan_limit);
            let (scan, nodes) = SubsetScan::new(self.ct, self.cond, &[k], chosen, limit).run();
            self.effort.subsets += nodes;
            match scan {
                Scan::Clean => valid.push((gain, k)),
                Scan::Violation(_) => {}
                Scan::Exhausted => self.incomplete = true,
            }
        }
        valid.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        let order: Vec<usize> = valid.into_iter().map(|(_, k)| k).collect();
        for j in 0..order.len() {
            if chosen.len() + (order.len() - j) < self.target {
                break;
            }
            let k = order[j];
            chosen.push(k);
            profile.add(k);
            let found = self.grow(chosen, profile, order[j + 1..].to_vec());
            profile.remove(k);
            chosen.pop();
            if found.is_some() {
                return found;
            }
            if self.out_of_nodes {
                return None;
            }
        }
        None
    }
}
