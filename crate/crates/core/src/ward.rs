//! Mass-weighted Ward agglomeration under the chi-square metric.
//!
//! Rows carry their masses `r_i`; the cost of joining groups `g` and `h` is
//! `r_g r_h / (r_g + r_h) * d^2(a_g, a_h)` where `a_g` is the mass-weighted
//! mean profile of the group. This is exactly the growth of within-group
//! inertia, so the costs of the `I - 1` merges add up to the total inertia.
//!
//! Costs between surviving groups are maintained with the Lance-Williams
//! recurrence for weighted Ward,
//!
//! ```text
//! D(k, g+h) = [(r_k + r_g) D(k, g) + (r_k + r_h) D(k, h) - r_k D(g, h)] / (r_k + r_g + r_h)
//! ```
//!
//! together with a nearest-neighbour cache per group, so a run costs
//! `O(I^2)` memory and typically `O(I^2)` time.

use crate::correspondence::CorrespondenceView;
use crate::partition::Partition;
use rayon::prelude::*;
use thiserror::Error;

/// Relative gap under which two candidate costs count as tied.
pub const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum WardError {
    #[error("need at least 2 rows to cluster, got {0}")]
    TooFewRows(usize),
    #[error("K = {k} outside 1..={n}")]
    BadK { k: usize, n: usize },
    #[error("scan range [{k_min}, {k_max}] invalid for {n} rows (need 2 <= k_min <= k_max <= n - 1)")]
    BadRange { k_min: usize, k_max: usize, n: usize },
    #[error("malformed dendrogram: {0}")]
    Malformed(String),
    #[error(
        "step {step}: recurrence cost {recurrence} for groups ({a}, {b}) differs from direct cost {direct}"
    )]
    RecurrenceDrift {
        step: usize,
        a: usize,
        b: usize,
        recurrence: f64,
        direct: f64,
    },
}

/// A group of rows with its total mass and mean profile.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterNode {
    pub members: Vec<usize>,
    pub mass: f64,
    pub profile: Vec<f64>,
}

impl ClusterNode {
    pub fn leaf(view: &CorrespondenceView, row: usize) -> Self {
        ClusterNode {
            members: vec![row],
            mass: view.row_masses()[row],
            profile: view.profile(row).to_vec(),
        }
    }

    /// Union of two disjoint groups.
    pub fn merged(&self, other: &ClusterNode) -> ClusterNode {
        let mass = self.mass + other.mass;
        let profile = self
            .profile
            .iter()
            .zip(&other.profile)
            .map(|(a, b)| (self.mass * a + other.mass * b) / mass)
            .collect();
        let mut members: Vec<usize> = self.members.iter().chain(&other.members).copied().collect();
        members.sort_unstable();
        ClusterNode { members, mass, profile }
    }
}

/// Ward cost of merging `g` and `h`.
pub fn merge_cost(g: &ClusterNode, h: &ClusterNode, view: &CorrespondenceView) -> f64 {
    g.mass * h.mass / (g.mass + h.mass) * view.profile_distance_sq(&g.profile, &h.profile)
}

/// One agglomeration step. Leaves are nodes `0..I`; merge `j` creates node
/// `I + j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub cost: f64,
    pub node: usize,
    pub mass: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dendrogram {
    leaves: usize,
    merges: Vec<Merge>,
    /// Mean profile of each merged node, aligned with `merges`. Empty when
    /// the dendrogram was rebuilt from a serialized merge list.
    profiles: Vec<Vec<f64>>,
}

impl Dendrogram {
    /// Rebuilds a dendrogram from a merge list, checking that every node is
    /// consumed exactly once.
    pub fn from_merges(leaves: usize, merges: Vec<Merge>) -> Result<Self, WardError> {
        if leaves < 2 {
            return Err(WardError::TooFewRows(leaves));
        }
        if merges.len() != leaves - 1 {
            return Err(WardError::Malformed(format!(
                "{} merges for {leaves} leaves",
                merges.len()
            )));
        }
        let mut used = vec![false; 2 * leaves - 1];
        let mut size = vec![1usize; 2 * leaves - 1];
        for (j, m) in merges.iter().enumerate() {
            let node = leaves + j;
            if m.node != node {
                return Err(WardError::Malformed(format!("merge {j} creates node {} instead of {node}", m.node)));
            }
            for child in [m.left, m.right] {
                if child >= node || used[child] {
                    return Err(WardError::Malformed(format!("merge {j} reuses or forward-references node {child}")));
                }
                used[child] = true;
            }
            size[node] = size[m.left] + size[m.right];
            if m.size != size[node] {
                return Err(WardError::Malformed(format!("merge {j} reports size {} instead of {}", m.size, size[node])));
            }
            if m.cost.is_nan() || m.cost < 0.0 {
                return Err(WardError::Malformed(format!("merge {j} has cost {}", m.cost)));
            }
        }
        Ok(Dendrogram {
            leaves,
            merges,
            profiles: Vec::new(),
        })
    }

    pub fn leaves(&self) -> usize {
        self.leaves
    }

    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    pub fn costs(&self) -> Vec<f64> {
        self.merges.iter().map(|m| m.cost).collect()
    }

    /// Profiles of merged nodes, if the dendrogram was built here.
    pub fn merged_profiles(&self) -> &[Vec<f64>] {
        &self.profiles
    }

    /// Partition into `k` clusters obtained by undoing the last `k - 1`
    /// merges. Cluster ids follow the smallest member index.
    pub fn cut(&self, k: usize) -> Result<Partition, WardError> {
        cut(self, k)
    }
}

fn condensed_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

fn ties(a: f64, b: f64) -> bool {
    (a - b).abs() <= TIE_TOLERANCE * a.abs().max(b.abs())
}

/// Candidate ordering: lower cost, then lexicographically smaller pair of
/// smallest-member indices.
fn better(cost: f64, key: (usize, usize), than_cost: f64, than_key: (usize, usize)) -> bool {
    if ties(cost, than_cost) {
        key < than_key
    } else {
        cost < than_cost
    }
}

fn pair(i: usize, j: usize) -> (usize, usize) {
    if i < j {
        (i, j)
    } else {
        (j, i)
    }
}

struct Agglomeration<'a> {
    view: &'a CorrespondenceView,
    n: usize,
    costs: Vec<f64>,
    active: Vec<bool>,
    mass: Vec<f64>,
    size: Vec<usize>,
    node: Vec<usize>,
    profile: Vec<Vec<f64>>,
    nn: Vec<usize>,
    nn_cost: Vec<f64>,
}

// Groups live in the slot of their smallest member, so a slot index is also
// the group's tie-breaking key.
impl<'a> Agglomeration<'a> {
    fn new(view: &'a CorrespondenceView) -> Self {
        let n = view.rows();
        let masses = view.row_masses();
        let mut costs = vec![0.0; n * (n - 1) / 2];
        let mut rows: Vec<&mut [f64]> = Vec::with_capacity(n);
        let mut rest = costs.as_mut_slice();
        for i in 0..n {
            let (head, tail) = rest.split_at_mut(n - i - 1);
            rows.push(head);
            rest = tail;
        }
        rows.into_par_iter().enumerate().for_each(|(i, row)| {
            let (ri, ai) = (masses[i], view.profile(i));
            for (k, v) in row.iter_mut().enumerate() {
                let j = i + 1 + k;
                let rj = masses[j];
                *v = ri * rj / (ri + rj) * view.profile_distance_sq(ai, view.profile(j));
            }
        });
        let mut agg = Agglomeration {
            view,
            n,
            costs,
            active: vec![true; n],
            mass: masses.to_vec(),
            size: vec![1; n],
            node: (0..n).collect(),
            profile: (0..n).map(|i| view.profile(i).to_vec()).collect(),
            nn: vec![usize::MAX; n],
            nn_cost: vec![f64::INFINITY; n],
        };
        for i in 0..n {
            agg.refresh_neighbour(i);
        }
        agg
    }

    fn cost(&self, i: usize, j: usize) -> f64 {
        let (a, b) = pair(i, j);
        self.costs[condensed_index(self.n, a, b)]
    }

    fn set_cost(&mut self, i: usize, j: usize, v: f64) {
        let (a, b) = pair(i, j);
        self.costs[condensed_index(self.n, a, b)] = v;
    }

    fn refresh_neighbour(&mut self, i: usize) {
        let mut best = usize::MAX;
        let mut best_cost = f64::INFINITY;
        for j in (0..self.n).filter(|&j| j != i && self.active[j]) {
            let c = self.cost(i, j);
            if best == usize::MAX || better(c, pair(i, j), best_cost, pair(i, best)) {
                best = j;
                best_cost = c;
            }
        }
        self.nn[i] = best;
        self.nn_cost[i] = best_cost;
    }

    fn closest_pair(&self) -> (usize, usize, f64) {
        let mut best: Option<(usize, usize, f64)> = None;
        for i in (0..self.n).filter(|&i| self.active[i]) {
            let (j, c) = (self.nn[i], self.nn_cost[i]);
            let key = pair(i, j);
            match best {
                Some((a, b, bc)) if !better(c, key, bc, (a, b)) => {}
                _ => best = Some((key.0, key.1, c)),
            }
        }
        best.expect("at least two active groups")
    }

    /// Joins slots `a < b` into slot `a`.
    fn merge(&mut self, a: usize, b: usize, step: usize) -> (Merge, Vec<f64>) {
        let cost_ab = self.cost(a, b);
        let (ma, mb) = (self.mass[a], self.mass[b]);
        for k in 0..self.n {
            if !self.active[k] || k == a || k == b {
                continue;
            }
            let mk = self.mass[k];
            let updated = ((mk + ma) * self.cost(k, a) + (mk + mb) * self.cost(k, b) - mk * cost_ab)
                / (mk + ma + mb);
            self.set_cost(k, a, updated.max(0.0));
        }
        let mass = ma + mb;
        let profile: Vec<f64> = self.profile[a]
            .iter()
            .zip(&self.profile[b])
            .map(|(x, y)| (ma * x + mb * y) / mass)
            .collect();
        let record = Merge {
            left: self.node[a],
            right: self.node[b],
            cost: cost_ab,
            node: self.n + step,
            mass,
            size: self.size[a] + self.size[b],
        };
        self.active[b] = false;
        self.mass[a] = mass;
        self.size[a] = record.size;
        self.node[a] = record.node;
        self.profile[a] = profile.clone();
        self.profile[b] = Vec::new();

        self.refresh_neighbour(a);
        for k in 0..self.n {
            if !self.active[k] || k == a {
                continue;
            }
            if self.nn[k] == a || self.nn[k] == b {
                self.refresh_neighbour(k);
            } else {
                let c = self.cost(k, a);
                if better(c, pair(k, a), self.nn_cost[k], pair(k, self.nn[k])) {
                    self.nn[k] = a;
                    self.nn_cost[k] = c;
                }
            }
        }
        (record, profile)
    }

    fn audit(&self, step: usize, tolerance: f64) -> Result<(), WardError> {
        let actives: Vec<usize> = (0..self.n).filter(|&i| self.active[i]).collect();
        let nodes: Vec<ClusterNode> = actives
            .iter()
            .map(|&i| ClusterNode {
                members: Vec::new(),
                mass: self.mass[i],
                profile: self.profile[i].clone(),
            })
            .collect();
        for (x, &a) in actives.iter().enumerate() {
            for (y, &b) in actives.iter().enumerate().skip(x + 1) {
                let direct = merge_cost(&nodes[x], &nodes[y], self.view);
                let recurrence = self.cost(a, b);
                if (direct - recurrence).abs() > tolerance * direct.abs().max(1.0) {
                    return Err(WardError::RecurrenceDrift {
                        step,
                        a,
                        b,
                        recurrence,
                        direct,
                    });
                }
            }
        }
        Ok(())
    }
}

fn agglomerate(view: &CorrespondenceView, audit: Option<f64>) -> Result<Dendrogram, WardError> {
    let n = view.rows();
    if n < 2 {
        return Err(WardError::TooFewRows(n));
    }
    let mut agg = Agglomeration::new(view);
    let mut merges = Vec::with_capacity(n - 1);
    let mut profiles = Vec::with_capacity(n - 1);
    for step in 0..n - 1 {
        if let Some(tol) = audit {
            agg.audit(step, tol)?;
        }
        let (a, b, _) = agg.closest_pair();
        let (merge, profile) = agg.merge(a, b, step);
        merges.push(merge);
        profiles.push(profile);
    }
    Ok(Dendrogram {
        leaves: n,
        merges,
        profiles,
    })
}

/// Greedy agglomeration by minimum Ward cost. Ties (costs within
/// [`TIE_TOLERANCE`] relative) go to the pair with the lexicographically
/// smallest (smallest member, smallest member) indices.
pub fn ward_cluster(view: &CorrespondenceView) -> Result<Dendrogram, WardError> {
    agglomerate(view, None)
}

/// [`ward_cluster`] that, before every merge, recomputes all pairwise costs
/// from stored masses and profiles and fails if the recurrence drifted
/// beyond `tolerance` (relative to `max(cost, 1)`). Cubic in the row count
/// per step; meant for verification on small inputs.
pub fn ward_cluster_audited(view: &CorrespondenceView, tolerance: f64) -> Result<Dendrogram, WardError> {
    agglomerate(view, Some(tolerance))
}

/// Partition into `k` clusters; see [`Dendrogram::cut`].
pub fn cut(d: &Dendrogram, k: usize) -> Result<Partition, WardError> {
    let n = d.leaves;
    if k == 0 || k > n {
        return Err(WardError::BadK { k, n });
    }
    let mut parent: Vec<usize> = (0..2 * n - 1).collect();
    for m in &d.merges[..n - k] {
        parent[m.left] = m.node;
        parent[m.right] = m.node;
    }
    let root = |mut x: usize| {
        while parent[x] != x {
            x = parent[x];
        }
        x
    };
    let roots: Vec<usize> = (0..n).map(root).collect();
    Ok(Partition::from_labels(&roots).expect("non-empty"))
}

/// `(K, Delta(K))` for `K = 2..=I`, where `Delta(K)` is the cost of the merge
/// that takes the hierarchy from `K` clusters down to `K - 1`.
pub fn inertia_gains(d: &Dendrogram) -> Vec<(usize, f64)> {
    let n = d.leaves;
    let mut gains: Vec<(usize, f64)> = d.merges.iter().enumerate().map(|(j, m)| (n - j, m.cost)).collect();
    gains.reverse();
    gains
}

/// Default scan range for [`select_k`]: `[2, min(10, I - 1)]`.
pub fn default_k_range(rows: usize) -> (usize, usize) {
    (2, 10.min(rows.saturating_sub(1)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct KSelection {
    pub k: usize,
    /// `(K, Delta(K) / Delta(K + 1))` over the scan range.
    pub ratios: Vec<(usize, f64)>,
    /// Set when some `Delta(K + 1)` in range is zero; `k` is then the first
    /// such `K`.
    pub degenerate: bool,
}

/// Picks the `K` in `[k_min, k_max]` where the gain drops most sharply,
/// i.e. the maximizer of `Delta(K) / Delta(K + 1)`. Ratios within
/// [`TIE_TOLERANCE`] count as equal and the smaller `K` wins.
pub fn select_k(gains: &[(usize, f64)], k_min: usize, k_max: usize) -> Result<KSelection, WardError> {
    let n = gains.len() + 1;
    if k_min < 2 || k_max < k_min || k_max > n - 1 {
        return Err(WardError::BadRange { k_min, k_max, n });
    }
    let delta = |k: usize| -> f64 {
        let (kk, g) = gains[k - 2];
        debug_assert_eq!(kk, k);
        g
    };
    let ratios: Vec<(usize, f64)> = (k_min..=k_max).map(|k| (k, delta(k) / delta(k + 1))).collect();
    if let Some(k) = (k_min..=k_max).find(|&k| delta(k + 1) == 0.0) {
        return Ok(KSelection {
            k,
            ratios,
            degenerate: true,
        });
    }
    let mut best = ratios[0];
    for &(k, r) in &ratios[1..] {
        if r > best.1 && !ties(r, best.1) {
            best = (k, r);
        }
    }
    Ok(KSelection {
        k: best.0,
        ratios,
        degenerate: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn view(rows: usize, cols: usize, z: &[f64]) -> CorrespondenceView {
        CorrespondenceView::new(rows, cols, z).unwrap()
    }

    #[test]
    fn two_rows_single_merge() {
        let v = view(2, 2, &[3.0, 1.0, 1.0, 3.0]);
        let d = ward_cluster(&v).unwrap();
        assert_eq!(d.merges().len(), 1);
        let expect = merge_cost(&ClusterNode::leaf(&v, 0), &ClusterNode::leaf(&v, 1), &v);
        let m = &d.merges()[0];
        assert_eq!((m.left, m.right, m.node, m.size), (0, 1, 2, 2));
        assert!((m.cost - expect).abs() < 1e-15);
        assert_eq!(inertia_gains(&d), vec![(2, m.cost)]);
        assert!((m.cost - v.total_inertia()).abs() < 1e-12);
    }

    #[test]
    fn equal_mass_singletons() {
        let v = view(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        let g = ClusterNode::leaf(&v, 0);
        let h = ClusterNode::leaf(&v, 1);
        // w = 1/2, d^2 = 4
        assert_eq!(merge_cost(&g, &h, &v), 0.25 * 4.0);
        assert_eq!(merge_cost(&g, &h, &v), merge_cost(&h, &g, &v));
    }

    #[test]
    fn identical_profiles_cost_nothing() {
        let v = view(3, 2, &[1.0, 1.0, 2.0, 2.0, 1.0, 3.0]);
        let g = ClusterNode::leaf(&v, 0);
        let h = ClusterNode::leaf(&v, 1);
        assert_eq!(merge_cost(&g, &h, &v), 0.0);
    }

    #[test]
    fn cut_extremes_and_nesting() {
        let z = [
            5.0, 1.0, 0.5, 4.0, 2.0, 0.5, 1.0, 5.0, 2.0, 0.5, 4.0, 3.0, 2.0, 2.0, 2.0, 0.2, 0.3, 5.0,
        ];
        let v = view(6, 3, &z);
        let d = ward_cluster(&v).unwrap();
        assert_eq!(d.cut(6).unwrap().labels(), &[1, 2, 3, 4, 5, 6]);
        assert_eq!(d.cut(1).unwrap().labels(), &[1; 6]);
        for k in 2..=6 {
            let fine = d.cut(k).unwrap();
            assert_eq!(fine.k(), k);
            assert!(fine.refines(&d.cut(k - 1).unwrap()));
        }
        assert_eq!(d.cut(0), Err(WardError::BadK { k: 0, n: 6 }));
        assert_eq!(d.cut(7), Err(WardError::BadK { k: 7, n: 6 }));
    }

    #[test]
    fn select_k_examples() {
        let gains = vec![(2, 10.0), (3, 2.0), (4, 1.9), (5, 0.5)];
        let s = select_k(&gains, 2, 3).unwrap();
        assert_eq!(s.k, 2);
        assert!((s.ratios[0].1 - 5.0).abs() < 1e-15);
        assert!((s.ratios[1].1 - 2.0 / 1.9).abs() < 1e-15);
        assert!(!s.degenerate);

        let geometric: Vec<(usize, f64)> = (2..12).map(|k| (k, 10.0 * 0.5f64.powi(k as i32))).collect();
        assert_eq!(select_k(&geometric, 2, 10).unwrap().k, 2);
        assert_eq!(select_k(&geometric, 4, 10).unwrap().k, 4);

        let flat = vec![(2, 3.0), (3, 1.0), (4, 0.0), (5, 0.0)];
        let s = select_k(&flat, 2, 4).unwrap();
        assert!(s.degenerate);
        assert_eq!(s.k, 3);

        assert!(matches!(select_k(&gains, 1, 3), Err(WardError::BadRange { .. })));
        assert!(matches!(select_k(&gains, 2, 5), Err(WardError::BadRange { .. })));
    }

    #[test]
    fn serialized_merges_are_validated() {
        let v = view(3, 2, &[1.0, 0.0, 0.9, 0.1, 0.0, 1.0]);
        let d = ward_cluster(&v).unwrap();
        let rebuilt = Dendrogram::from_merges(3, d.merges().to_vec()).unwrap();
        assert_eq!(rebuilt.cut(2).unwrap(), d.cut(2).unwrap());
        let mut bad = d.merges().to_vec();
        bad[1].left = bad[0].left;
        assert!(matches!(Dendrogram::from_merges(3, bad), Err(WardError::Malformed(_))));
        assert!(matches!(
            Dendrogram::from_merges(3, d.merges()[..1].to_vec()),
            Err(WardError::Malformed(_))
        ));
    }

    #[test]
    fn too_few_rows() {
        let v = view(1, 2, &[1.0, 1.0]);
        assert_eq!(ward_cluster(&v), Err(WardError::TooFewRows(1)));
    }

    #[test]
    fn exact_ties_merge_smallest_indices_first() {
        // four identical rows: every cost is zero
        let v = view(4, 2, &[1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0]);
        let d = ward_cluster(&v).unwrap();
        let pairs: Vec<(usize, usize)> = d.merges().iter().map(|m| (m.left, m.right)).collect();
        assert_eq!(pairs, vec![(0, 1), (4, 2), (5, 3)]);
    }
}
