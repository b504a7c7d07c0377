//! The free space over a pointed metric space and its transport norm.
//!
//! A [`FreeVector`] is a finitely supported formal combination of points,
//! with the base point identified with zero. Its norm is the least cost of a
//! transport plan balancing its positive and negative parts (mass may always
//! be borrowed from or returned to the base point). Computing it is a
//! min-cost flow problem, solved here by successive shortest paths with node
//! potentials — exactly, on rational backends.
//!
//! The dual objects are [`LipFunction`]s: scalar functions vanishing at the
//! base, normed by their best Lipschitz constant. Linear-programming duality
//! says the transport norm of `v` equals the largest pairing `<f, v>` over
//! 1-Lipschitz `f`, and [`dual_witness`] extracts an attaining `f` from the
//! shortest-path distances of the optimal flow's residual network.
//!
//! [`quotient_norm`] computes the norm of the image of a vector in the
//! quotient of the free space by the subspace spanned by all differences
//! `delta(gx) - delta(x)`: the least transport cost achievable after adding
//! any combination of those differences. For isometric actions it equals the
//! transport norm of the vector pushed forward to the orbit space, which is
//! how the quotient identification is certified numerically.

use std::collections::BTreeMap;

use crate::group::{check_isometric, ActingGroup, NotIsometric};
use crate::metric::PointedMetricSpace;
use crate::quotient::QuotientSpace;
use crate::scalar::Scalar;
use crate::simplex::{solve_min, StandardLp};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FreeError {
    #[error("point index {0} is out of range")]
    PointOutOfRange(usize),
    #[error("function value at the base point must be zero")]
    NonzeroAtBase,
    #[error("expected {expected} values, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error(transparent)]
    NotIsometric(#[from] NotIsometric),
}

/// A finitely supported formal combination of non-base points.
///
/// The base point never appears in the support: the canonical embedding
/// sends it to zero, and constructors silently drop it. Coefficients that
/// are exactly zero are pruned.
#[derive(Debug, Clone, PartialEq)]
pub struct FreeVector<S> {
    coeffs: BTreeMap<usize, S>,
}

impl<S: Scalar> FreeVector<S> {
    pub fn zero() -> Self {
        FreeVector { coeffs: BTreeMap::new() }
    }

    /// The canonical image of a point: `delta(base)` is the zero vector.
    pub fn delta(space: &PointedMetricSpace<S>, x: usize) -> Self {
        assert!(x < space.n(), "point index out of range");
        let mut coeffs = BTreeMap::new();
        if x != space.base() {
            coeffs.insert(x, S::one());
        }
        FreeVector { coeffs }
    }

    /// Accumulates labelled coefficients; base entries are dropped (the base
    /// is the zero vector) and zero totals pruned.
    pub fn from_pairs(
        space: &PointedMetricSpace<S>,
        pairs: &[(usize, S)],
    ) -> Result<Self, FreeError> {
        let mut coeffs: BTreeMap<usize, S> = BTreeMap::new();
        for (x, c) in pairs {
            if *x >= space.n() {
                return Err(FreeError::PointOutOfRange(*x));
            }
            if *x == space.base() {
                continue;
            }
            let entry = coeffs.entry(*x).or_insert_with(S::zero);
            *entry = entry.clone() + c.clone();
        }
        coeffs.retain(|_, c| !c.is_zero());
        Ok(FreeVector { coeffs })
    }

    /// Coefficient of a point (zero when absent or the base).
    pub fn coeff(&self, x: usize) -> S {
        self.coeffs.get(&x).cloned().unwrap_or_else(S::zero)
    }

    /// Support and coefficients in increasing point order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, &S)> {
        self.coeffs.iter().map(|(&x, c)| (x, c))
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.coeffs.keys().copied()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Total mass: the sum of all coefficients. The implicit coefficient of
    /// the base point is its negative.
    pub fn mass(&self) -> S {
        S::sum_of(self.coeffs.values().cloned())
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut coeffs = self.coeffs.clone();
        for (&x, c) in &other.coeffs {
            let entry = coeffs.entry(x).or_insert_with(S::zero);
            *entry = entry.clone() + c.clone();
        }
        coeffs.retain(|_, c| !c.is_zero());
        FreeVector { coeffs }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&(S::zero() - S::one())))
    }

    pub fn scale(&self, factor: &S) -> Self {
        if factor.is_zero() {
            return Self::zero();
        }
        let coeffs = self
            .coeffs
            .iter()
            .map(|(&x, c)| (x, c.clone() * factor.clone()))
            .collect();
        FreeVector { coeffs }
    }

    /// Dense coordinates in the canonical basis `{delta(x) : x != base}`,
    /// points in increasing index order.
    pub fn to_dense(&self, space: &PointedMetricSpace<S>) -> Vec<S> {
        let mut dense = vec![S::zero(); space.n().saturating_sub(1)];
        for (&x, c) in &self.coeffs {
            dense[basis_index(space, x)] = c.clone();
        }
        dense
    }

    pub fn from_dense(space: &PointedMetricSpace<S>, dense: &[S]) -> Self {
        assert_eq!(dense.len(), space.n() - 1, "dense length mismatch");
        let coeffs = space
            .support_points()
            .zip(dense.iter().cloned())
            .filter(|(_, c)| !c.is_zero())
            .collect();
        FreeVector { coeffs }
    }

    /// Renders as `label:coeff` pairs, the same syntax the CLI accepts.
    pub fn describe(&self, space: &PointedMetricSpace<S>) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        self.coeffs
            .iter()
            .map(|(&x, c)| format!("{}:{}", space.label(x), c))
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// Position of a non-base point in the canonical basis order.
pub fn basis_index<S: Scalar>(space: &PointedMetricSpace<S>, x: usize) -> usize {
    debug_assert!(x != space.base());
    if x > space.base() {
        x - 1
    } else {
        x
    }
}

/// A scalar function on the points, vanishing at the base.
#[derive(Debug, Clone, PartialEq)]
pub struct LipFunction<S> {
    values: Vec<S>,
}

impl<S: Scalar> LipFunction<S> {
    pub fn zero(space: &PointedMetricSpace<S>) -> Self {
        LipFunction { values: vec![S::zero(); space.n()] }
    }

    /// Wraps explicit values, which must vanish at the base (up to the
    /// backend tolerance; the stored base value is then exactly zero).
    pub fn from_values(
        space: &PointedMetricSpace<S>,
        mut values: Vec<S>,
    ) -> Result<Self, FreeError> {
        if values.len() != space.n() {
            return Err(FreeError::WrongLength { expected: space.n(), got: values.len() });
        }
        if !values[space.base()].eq_scalar(&S::zero()) {
            return Err(FreeError::NonzeroAtBase);
        }
        values[space.base()] = S::zero();
        Ok(LipFunction { values })
    }

    /// Wraps values already known to vanish exactly at the base.
    pub(crate) fn raw_from_values(values: Vec<S>) -> Self {
        LipFunction { values }
    }

    /// Shifts arbitrary values so the base maps to zero. Shifting changes
    /// neither Lipschitz constants nor pairings with free vectors.
    pub fn from_values_shifted(space: &PointedMetricSpace<S>, values: Vec<S>) -> Self {
        assert_eq!(values.len(), space.n(), "one value per point");
        let shift = values[space.base()].clone();
        let values = values.into_iter().map(|v| v - shift.clone()).collect();
        LipFunction { values }
    }

    pub fn value(&self, x: usize) -> &S {
        &self.values[x]
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn add(&self, other: &Self) -> Self {
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.clone() + b.clone())
            .collect();
        LipFunction { values }
    }

    pub fn scale(&self, factor: &S) -> Self {
        LipFunction {
            values: self.values.iter().map(|v| v.clone() * factor.clone()).collect(),
        }
    }
}

/// One arc of a transport plan: `amount > 0` moved from `from` to `to`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportArc<S> {
    pub from: usize,
    pub to: usize,
    pub amount: S,
}

/// An optimal transport plan witnessing a norm computation.
///
/// Net divergence at every non-base point equals the vector's coefficient
/// there; the base point absorbs the balance. Arcs are sorted by
/// `(from, to)` and carry strictly positive amounts.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan<S> {
    pub arcs: Vec<TransportArc<S>>,
}

impl<S: Scalar> TransportPlan<S> {
    /// Total cost of the plan under the given metric.
    pub fn cost(&self, space: &PointedMetricSpace<S>) -> S {
        S::sum_of(
            self.arcs
                .iter()
                .map(|arc| arc.amount.clone() * space.d(arc.from, arc.to).clone()),
        )
    }

    /// Outflow minus inflow at a point.
    pub fn divergence(&self, x: usize) -> S {
        let mut total = S::zero();
        for arc in &self.arcs {
            if arc.from == x {
                total = total + arc.amount.clone();
            }
            if arc.to == x {
                total = total - arc.amount.clone();
            }
        }
        total
    }
}

/// Signed balances induced by a vector: its coefficients off the base, and
/// minus its total mass at the base.
fn balances<S: Scalar>(space: &PointedMetricSpace<S>, v: &FreeVector<S>) -> Vec<S> {
    let mut w = vec![S::zero(); space.n()];
    for (x, c) in v.entries() {
        w[x] = c.clone();
    }
    w[space.base()] = S::zero() - v.mass();
    w
}

/// The transport norm of a free vector, with an optimal plan.
///
/// Runs successive shortest paths with node potentials on the bipartite
/// network from excess points to deficit points. The metric's triangle
/// inequality makes direct bipartite transport as cheap as any relayed
/// routing, so this is the full transshipment optimum.
pub fn kr_norm<S: Scalar>(
    space: &PointedMetricSpace<S>,
    v: &FreeVector<S>,
) -> (S, TransportPlan<S>) {
    let w = balances(space, v);
    let nodes: Vec<usize> = (0..space.n()).filter(|&x| !w[x].is_zero()).collect();
    let k = nodes.len();
    let is_source: Vec<bool> =
        nodes.iter().map(|&x| S::zero().lt_scalar(&w[x])).collect();
    // Remaining supply (sources) or demand (sinks), both kept positive.
    let mut rem: Vec<S> = nodes
        .iter()
        .map(|&x| if S::zero().lt_scalar(&w[x]) { w[x].clone() } else { S::zero() - w[x].clone() })
        .collect();
    let mut pot: Vec<S> = vec![S::zero(); k];
    let mut flow: BTreeMap<(usize, usize), S> = BTreeMap::new(); // node-index pairs

    let dist_of = |a: usize, b: usize| space.d(nodes[a], nodes[b]).clone();
    let guard = 64 * (k + 1) * (k + 1);
    let mut rounds = 0usize;
    loop {
        let pending =
            (0..k).any(|i| is_source[i] && !rem[i].is_zero());
        if !pending {
            break;
        }
        rounds += 1;
        assert!(rounds <= guard, "transport solver failed to terminate");

        // Dijkstra over the residual network under reduced costs.
        let mut dist: Vec<Option<S>> = (0..k)
            .map(|i| {
                if is_source[i] && !rem[i].is_zero() {
                    Some(S::zero())
                } else {
                    None
                }
            })
            .collect();
        let mut parent: Vec<Option<usize>> = vec![None; k];
        let mut visited = vec![false; k];
        loop {
            let mut u: Option<usize> = None;
            for i in 0..k {
                if visited[i] || dist[i].is_none() {
                    continue;
                }
                if u.map_or(true, |cur| {
                    dist[i].as_ref().unwrap().lt_scalar(dist[cur].as_ref().unwrap())
                }) {
                    u = Some(i);
                }
            }
            let Some(u) = u else { break };
            visited[u] = true;
            let du = dist[u].clone().unwrap();
            let relax = |v_idx: usize, raw_cost: S, dist: &mut Vec<Option<S>>, parent: &mut Vec<Option<usize>>| {
                let mut rc = raw_cost + pot[u].clone() - pot[v_idx].clone();
                if rc.lt_scalar(&S::zero()) {
                    // Exact arithmetic never lands here; float rounding may.
                    rc = S::zero();
                }
                let cand = du.clone() + rc;
                let better = match &dist[v_idx] {
                    None => true,
                    Some(cur) => cand.lt_scalar(cur),
                };
                if better {
                    dist[v_idx] = Some(cand);
                    parent[v_idx] = Some(u);
                }
            };
            if is_source[u] {
                for t in 0..k {
                    if !is_source[t] && !visited[t] {
                        relax(t, dist_of(u, t), &mut dist, &mut parent);
                    }
                }
            } else {
                for s in 0..k {
                    if is_source[s]
                        && !visited[s]
                        && flow.contains_key(&(s, u))
                    {
                        relax(s, S::zero() - dist_of(s, u), &mut dist, &mut parent);
                    }
                }
            }
        }

        // Cheapest sink still in deficit.
        let target = (0..k)
            .filter(|&i| !is_source[i] && !rem[i].is_zero() && dist[i].is_some())
            .min_by(|&a, &b| {
                dist[a].as_ref().unwrap().cmp_scalar(dist[b].as_ref().unwrap())
            })
            .expect("a deficit node is always reachable");
        let dt = dist[target].clone().unwrap();
        for i in 0..k {
            let delta = match &dist[i] {
                Some(d) if d.lt_scalar(&dt) => d.clone(),
                _ => dt.clone(),
            };
            pot[i] = pot[i].clone() + delta;
        }

        // Trace the augmenting path back to its source.
        let mut path = vec![target];
        while let Some(p) = parent[*path.last().unwrap()] {
            path.push(p);
        }
        path.reverse();
        let start = path[0];
        debug_assert!(is_source[start]);

        let mut bottleneck = rem[start].clone().min_scalar(rem[target].clone());
        for pair in path.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            if !is_source[a] {
                // Residual arc sink->source undoing real flow (b -> a).
                bottleneck = bottleneck.min_scalar(flow[&(b, a)].clone());
            }
        }
        for pair in path.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            if is_source[a] {
                let entry = flow.entry((a, b)).or_insert_with(S::zero);
                *entry = entry.clone() + bottleneck.clone();
            } else {
                let entry = flow.get_mut(&(b, a)).expect("reverse arc has flow");
                *entry = entry.clone() - bottleneck.clone();
                if entry.is_zero() {
                    flow.remove(&(b, a));
                }
            }
        }
        rem[start] = rem[start].clone() - bottleneck.clone();
        rem[target] = rem[target].clone() - bottleneck;
    }

    let mut arcs = Vec::with_capacity(flow.len());
    let mut value = S::zero();
    for ((s, t), amount) in flow {
        if amount.is_zero() {
            continue;
        }
        value = value + amount.clone() * dist_of(s, t);
        arcs.push(TransportArc { from: nodes[s], to: nodes[t], amount });
    }
    (value, TransportPlan { arcs })
}

/// The best Lipschitz constant of a function (zero on spaces with a single
/// point).
pub fn lip_norm<S: Scalar>(space: &PointedMetricSpace<S>, f: &LipFunction<S>) -> S {
    let mut best = S::zero();
    for x in 0..space.n() {
        for y in (x + 1)..space.n() {
            let slope =
                (f.value(x).clone() - f.value(y).clone()).abs() / space.d(x, y).clone();
            best = best.max_scalar(slope);
        }
    }
    best
}

/// The dual pairing `sum_x v(x) f(x)`.
pub fn pairing<S: Scalar>(f: &LipFunction<S>, v: &FreeVector<S>) -> S {
    S::sum_of(v.entries().map(|(x, c)| c.clone() * f.value(x).clone()))
}

/// A 1-Lipschitz function vanishing at the base whose pairing with `v`
/// equals the transport norm of `v`.
///
/// The function is read off the optimal flow: negated shortest-path
/// distances from the base in the residual network (all metric arcs forward,
/// plus a reversed arc of negated cost for every flow arc). Optimality of
/// the plan rules out negative cycles, so the distances are well-defined
/// node potentials; they are computed by relaxation à la Bellman-Ford.
pub fn dual_witness<S: Scalar>(
    space: &PointedMetricSpace<S>,
    v: &FreeVector<S>,
) -> LipFunction<S> {
    let (_, plan) = kr_norm(space, v);
    let n = space.n();
    let mut h: Vec<Option<S>> = vec![None; n];
    h[space.base()] = Some(S::zero());
    for _ in 1..n.max(2) {
        let mut changed = false;
        for x in 0..n {
            let Some(hx) = h[x].clone() else { continue };
            for y in 0..n {
                if y == x {
                    continue;
                }
                let cand = hx.clone() + space.d(x, y).clone();
                if h[y].as_ref().map_or(true, |cur| cand.lt_scalar(cur)) {
                    h[y] = Some(cand);
                    changed = true;
                }
            }
        }
        for arc in &plan.arcs {
            let Some(ht) = h[arc.to].clone() else { continue };
            let cand = ht - space.d(arc.from, arc.to).clone();
            if h[arc.from].as_ref().map_or(true, |cur| cand.lt_scalar(cur)) {
                h[arc.from] = Some(cand);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let values = h
        .into_iter()
        .map(|d| S::zero() - d.expect("metric graph is connected"))
        .collect();
    LipFunction { values }
}

/// Pushes a vector forward along the quotient map: coefficients add up over
/// each orbit, and the base orbit is dropped.
pub fn pushforward<S: Scalar>(
    q: &QuotientSpace<S>,
    v: &FreeVector<S>,
) -> FreeVector<S> {
    let mut coeffs: BTreeMap<usize, S> = BTreeMap::new();
    let base_orbit = q.space().base();
    for (x, c) in v.entries() {
        let o = q.orbit_of(x);
        if o == base_orbit {
            continue;
        }
        let entry = coeffs.entry(o).or_insert_with(S::zero);
        *entry = entry.clone() + c.clone();
    }
    coeffs.retain(|_, c| !c.is_zero());
    FreeVector { coeffs }
}

/// The difference vectors `delta(gx) - delta(x)` for every supplied
/// generator `g` and point `x` (zero differences skipped). Their span is the
/// kernel of the averaging projection; composite group elements contribute
/// nothing new because their differences telescope along generator words.
pub fn generator_differences<S: Scalar>(
    space: &PointedMetricSpace<S>,
    group: &ActingGroup,
) -> Vec<FreeVector<S>> {
    let mut out = Vec::new();
    for &gid in group.generator_ids() {
        let g = group.element(gid);
        for x in 0..space.n() {
            if g.apply(x) == x {
                continue;
            }
            let diff = FreeVector::delta(space, g.apply(x))
                .sub(&FreeVector::delta(space, x));
            if !diff.is_zero() {
                out.push(diff);
            }
        }
    }
    out
}

/// The norm of the image of `v` in the quotient of the free space by the
/// span of all `delta(gx) - delta(x)`.
///
/// Formulated directly as a linear program: minimize transport cost over
/// flows whose divergence realizes `v` shifted by any combination of the
/// generator differences. Requires an isometric action.
pub fn quotient_norm<S: Scalar>(
    space: &PointedMetricSpace<S>,
    group: &ActingGroup,
    v: &FreeVector<S>,
) -> Result<S, FreeError> {
    check_isometric(space, group)?;
    let n = space.n();
    if n == 1 {
        return Ok(S::zero());
    }
    let base = space.base();
    let points: Vec<usize> = space.support_points().collect();
    let row_of = |p: usize| basis_index(space, p);

    let arcs: Vec<(usize, usize)> = (0..n)
        .flat_map(|x| (0..n).filter(move |&y| y != x).map(move |y| (x, y)))
        .collect();
    let diffs = generator_differences(space, group);

    let m = points.len();
    let ncols = arcs.len() + 2 * diffs.len();
    let mut rows = vec![vec![S::zero(); ncols]; m];
    let mut costs = Vec::with_capacity(ncols);
    for (j, &(x, y)) in arcs.iter().enumerate() {
        costs.push(space.d(x, y).clone());
        if x != base {
            rows[row_of(x)][j] = S::one();
        }
        if y != base {
            rows[row_of(y)][j] = S::zero() - S::one();
        }
    }
    for (kth, diff) in diffs.iter().enumerate() {
        let plus = arcs.len() + 2 * kth;
        let minus = plus + 1;
        costs.push(S::zero());
        costs.push(S::zero());
        for (x, c) in diff.entries() {
            // divergence(p) - sum_k lambda_k * diff_k(p) = v(p)
            rows[row_of(x)][plus] = S::zero() - c.clone();
            rows[row_of(x)][minus] = c.clone();
        }
    }
    let rhs: Vec<S> = points.iter().map(|&p| v.coeff(p)).collect();

    // Feasible start: route each point's balance directly to or from the
    // base; those arc columns are +/- unit vectors, hence a valid basis.
    let arc_col = |x: usize, y: usize| {
        arcs.iter().position(|&a| a == (x, y)).expect("complete arc list")
    };
    let basis = points
        .iter()
        .map(|&p| {
            if v.coeff(p).lt_scalar(&S::zero()) {
                arc_col(base, p)
            } else {
                arc_col(p, base)
            }
        })
        .collect();

    let lp = StandardLp { costs, rows, rhs };
    let sol = solve_min(&lp, basis).expect("quotient norm program is bounded and feasible");
    Ok(sol.value)
}
