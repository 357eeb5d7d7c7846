//! Good families of hypersurfaces and numerical transversality checks.

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::atlas::{defining_map, ChartId, ChartPoint, DefiningMap, Hypersurface, StrategyLabel};
use crate::equilibrium::{EquilibriumCertificate, Tolerances};
use crate::error::{Error, Result};
use crate::game::{FiniteGame, SupportProfile};
use crate::linalg::{null_space, pseudo_solve, rank_of_values, singular_values, to_matrix};
use crate::newton::{damped_newton, NewtonOptions};

/// Index sets `(T^i, R^i)` naming coordinate hyperplanes and payoff-difference
/// hypersurfaces, one pair per player.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GoodFamily {
    pub t: Vec<BTreeSet<StrategyLabel>>,
    /// Pairs `(j, k)` with `j < k`.
    pub r: Vec<BTreeSet<(usize, usize)>>,
}

impl GoodFamily {
    pub fn empty(num_players: usize) -> Self {
        Self { t: vec![BTreeSet::new(); num_players], r: vec![BTreeSet::new(); num_players] }
    }

    /// The family attached to a support profile: every coordinate hyperplane
    /// off the support, and the star tree from the smallest supported index.
    pub fn canonical(counts: &[usize], support: &SupportProfile) -> Self {
        let t = counts
            .iter()
            .zip(&support.supports)
            .map(|(&c, s)| (0..c).filter(|j| !s.contains(j)).map(StrategyLabel::Finite).collect())
            .collect();
        let r = support.supports.iter().map(|s| s[1..].iter().map(|&j| (s[0], j)).collect()).collect();
        Self { t, r }
    }

    pub fn num_players(&self) -> usize {
        self.t.len()
    }

    pub fn validate(&self, counts: &[usize]) -> Result<()> {
        if self.t.len() != counts.len() || self.r.len() != counts.len() {
            return Err(Error::InvalidFamily(format!("family names {} players, game has {}", self.t.len(), counts.len())));
        }
        self.hypersurfaces().iter().try_for_each(|h| h.validate(counts))
    }

    /// Members in a fixed order: per player coordinate hyperplanes, then pairs.
    pub fn hypersurfaces(&self) -> Vec<Hypersurface> {
        let mut out = Vec::new();
        for (player, (t, r)) in self.t.iter().zip(&self.r).enumerate() {
            out.extend(t.iter().map(|&label| Hypersurface::Coordinate { player, label }));
            out.extend(r.iter().map(|&(j, k)| Hypersurface::PayoffDiff { player, j, k }));
        }
        out
    }

    pub fn len(&self) -> usize {
        self.t.iter().map(BTreeSet::len).sum::<usize>() + self.r.iter().map(BTreeSet::len).sum::<usize>()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn pair_count(&self) -> usize {
        self.r.iter().map(BTreeSet::len).sum()
    }

    /// The first member lying in the complement of `chart`, if any.
    pub fn excluded_member(&self, chart: &ChartId) -> Option<Hypersurface> {
        self.hypersurfaces().into_iter().find(|h| h.excluded_by(chart))
    }
}

fn find(parent: &mut [usize], x: usize) -> usize {
    let mut root = x;
    while parent[root] != root {
        root = parent[root];
    }
    let mut cur = x;
    while parent[cur] != root {
        let next = parent[cur];
        parent[cur] = root;
        cur = next;
    }
    root
}

fn vertex_count(edges: &BTreeSet<(usize, usize)>) -> usize {
    edges.iter().map(|&(j, k)| j.max(k) + 1).max().unwrap_or(0)
}

/// Whether every `(J^i_0, R^i)` is a forest. Coordinate labels never matter.
pub fn is_good(family: &GoodFamily) -> bool {
    family.r.iter().all(|edges| {
        let mut parent: Vec<usize> = (0..vertex_count(edges)).collect();
        edges.iter().all(|&(j, k)| {
            let (a, b) = (find(&mut parent, j), find(&mut parent, k));
            parent[a] = b;
            a != b
        })
    })
}

/// A cycle in player `player`'s pair graph, as a vertex sequence starting at
/// its smallest vertex and continuing toward the smaller neighbour.
pub fn find_cycle(family: &GoodFamily, player: usize) -> Option<Vec<usize>> {
    let edges = family.r.get(player)?;
    let n = vertex_count(edges);
    let mut adj = vec![Vec::new(); n];
    let mut parent: Vec<usize> = (0..n).collect();
    for &(j, k) in edges {
        if find(&mut parent, j) == find(&mut parent, k) {
            let mut cycle = tree_path(&adj, j, k);
            let start = cycle.iter().enumerate().min_by_key(|&(_, v)| *v).map(|(i, _)| i).unwrap_or(0);
            cycle.rotate_left(start);
            if cycle.len() > 2 && cycle[cycle.len() - 1] < cycle[1] {
                cycle[1..].reverse();
            }
            return Some(cycle);
        }
        let (a, b) = (find(&mut parent, j), find(&mut parent, k));
        parent[a] = b;
        adj[j].push(k);
        adj[k].push(j);
    }
    None
}

/// Vertices on the unique forest path from `from` to `to`.
fn tree_path(adj: &[Vec<usize>], from: usize, to: usize) -> Vec<usize> {
    let mut prev = vec![usize::MAX; adj.len()];
    let mut queue = std::collections::VecDeque::from([from]);
    prev[from] = from;
    while let Some(v) = queue.pop_front() {
        if v == to {
            break;
        }
        for &w in &adj[v] {
            if prev[w] == usize::MAX {
                prev[w] = v;
                queue.push_back(w);
            }
        }
    }
    let mut path = vec![to];
    let mut v = to;
    while v != from {
        v = prev[v];
        path.push(v);
    }
    path.reverse();
    path
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Transversal,
    Degenerate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransversalityReport {
    pub chart: ChartId,
    pub point: ChartPoint,
    pub active: Vec<Hypersurface>,
    /// One gradient row per active member, over the flattened chart coordinates.
    pub jacobian: Vec<Vec<f64>>,
    pub rank: usize,
    /// `None` when nothing is active.
    pub smallest_singular_value: Option<f64>,
    pub verdict: Verdict,
}

impl TransversalityReport {
    pub fn is_transversal(&self) -> bool {
        self.verdict == Verdict::Transversal
    }
}

fn report_for(
    game: &FiniteGame,
    members: Vec<Hypersurface>,
    point: &ChartPoint,
    rank_tol: f64,
) -> Result<TransversalityReport> {
    let dim: usize = game.strategy_counts().iter().map(|c| c - 1).sum();
    let jacobian = members
        .iter()
        .map(|&h| defining_map(game, h, &point.chart)?.gradient(point))
        .collect::<Result<Vec<_>>>()?;
    let sv = singular_values(&to_matrix(&jacobian, dim));
    let rank = rank_of_values(&sv, rank_tol);
    // Fewer columns than rows leaves implicit zero singular values.
    let smallest_singular_value = if members.is_empty() {
        None
    } else if members.len() > dim {
        Some(0.0)
    } else {
        sv.last().copied().or(Some(0.0))
    };
    let verdict = if rank == members.len() { Verdict::Transversal } else { Verdict::Degenerate };
    Ok(TransversalityReport {
        chart: point.chart.clone(),
        point: point.clone(),
        active: members,
        jacobian,
        rank,
        smallest_singular_value,
        verdict,
    })
}

/// Rank test of the members of `family` passing through `point`.
pub fn transversal_at(
    game: &FiniteGame,
    family: &GoodFamily,
    point: &ChartPoint,
    membership_tol: f64,
    rank_tol: f64,
) -> Result<TransversalityReport> {
    family.validate(game.strategy_counts())?;
    if let Some(h) = family.excluded_member(&point.chart) {
        return Err(Error::ChartExcludesHypersurface { chart: point.chart.to_string(), hypersurface: h.to_string() });
    }
    let mut active = Vec::new();
    for h in family.hypersurfaces() {
        let map = defining_map(game, h, &point.chart)?;
        if map.normalized_value(point)?.abs() <= membership_tol {
            active.push(h);
        }
    }
    report_for(game, active, point, rank_tol)
}

/// Jacobian of the whole canonical family of `support` at `point`, every
/// member counted as active.
pub(crate) fn support_family_report(
    game: &FiniteGame,
    support: &SupportProfile,
    point: &ChartPoint,
    tol: &Tolerances,
) -> TransversalityReport {
    let family = GoodFamily::canonical(game.strategy_counts(), support);
    report_for(game, family.hypersurfaces(), point, tol.rank).expect("canonical family lives in the standard chart")
}

/// Regularity of an enumerated equilibrium: the square Jacobian of its
/// canonical family in the standard chart.
pub fn certify_equilibrium(game: &FiniteGame, cert: &EquilibriumCertificate, tol: &Tolerances) -> TransversalityReport {
    support_family_report(game, &cert.support, &ChartPoint::from_profile(&cert.point), tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProbeVerdict {
    NoDegeneracyWitnessed,
    DegeneracyWitnessed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeRoot {
    pub point: ChartPoint,
    pub residual: f64,
    pub rank: usize,
    pub smallest_singular_value: Option<f64>,
    pub regular: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub chart: ChartId,
    /// Dimension of the face `L`; `None` if `L` is empty.
    pub face_dimension: Option<usize>,
    pub equations: usize,
    pub roots: Vec<ProbeRoot>,
    pub verdict: ProbeVerdict,
}

/// Affine parametrization `x = base + basis · t` of the face cut out by the
/// coordinate hyperplanes of `family` in `chart`.
struct Face {
    base: Vec<f64>,
    basis: DMatrix<f64>,
}

fn face_of(game: &FiniteGame, family: &GoodFamily, chart: &ChartId, rank_tol: f64) -> Result<Option<Face>> {
    let dim: usize = game.strategy_counts().iter().map(|c| c - 1).sum();
    let origin = ChartPoint::new(
        chart.clone(),
        game.strategy_counts().iter().map(|c| vec![0.0; c - 1]).collect(),
        game.strategy_counts(),
    )?;
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for (player, t) in family.t.iter().enumerate() {
        for &label in t {
            // Coordinate maps are affine in the chart, so value and gradient at
            // the origin determine them.
            let map: DefiningMap = defining_map(game, Hypersurface::Coordinate { player, label }, chart)?;
            rows.push(map.gradient(&origin)?);
            rhs.push(-map.value(&origin)?);
        }
    }
    if rows.is_empty() {
        return Ok(Some(Face { base: vec![0.0; dim], basis: DMatrix::identity(dim, dim) }));
    }
    let a = to_matrix(&rows, dim);
    let Some(base) = pseudo_solve(&a, &rhs, rank_tol) else { return Ok(None) };
    let check = &a * nalgebra::DVector::from_column_slice(&base);
    if check.iter().zip(&rhs).any(|(x, b)| (x - b).abs() > 1e-9) {
        return Ok(None);
    }
    Ok(Some(Face { base, basis: null_space(&a, rank_tol) }))
}

/// Multistart search for zeros of the payoff-difference maps of `family`
/// restricted to the face `L`, with a rank check at every root found.
pub fn regular_value_probe(
    game: &FiniteGame,
    family: &GoodFamily,
    chart: &ChartId,
    seed: u64,
    tol: &Tolerances,
) -> Result<ProbeReport> {
    family.validate(game.strategy_counts())?;
    chart.validate(game.strategy_counts())?;
    if let Some(h) = family.excluded_member(chart) {
        return Err(Error::ChartExcludesHypersurface { chart: chart.to_string(), hypersurface: h.to_string() });
    }
    if !is_good(family) {
        return Err(Error::InvalidFamily("the pair graphs must be forests".into()));
    }
    let equations = family.pair_count();
    if equations == 0 {
        return Err(Error::InvalidFamily("at least one payoff-difference hypersurface is required".into()));
    }
    let Some(face) = face_of(game, family, chart, tol.rank)? else {
        return Ok(ProbeReport {
            chart: chart.clone(),
            face_dimension: None,
            equations,
            roots: Vec::new(),
            verdict: ProbeVerdict::NoDegeneracyWitnessed,
        });
    };
    let counts = game.strategy_counts();
    let template = ChartPoint::new(chart.clone(), counts.iter().map(|c| vec![0.0; c - 1]).collect(), counts)?;
    let maps: Vec<DefiningMap> = family
        .hypersurfaces()
        .into_iter()
        .filter(|h| matches!(h, Hypersurface::PayoffDiff { .. }))
        .map(|h| defining_map(game, h, chart))
        .collect::<Result<_>>()?;
    let k = face.basis.ncols();
    let point_at = |t: &[f64]| {
        let x = nalgebra::DVector::from_column_slice(&face.base) + &face.basis * nalgebra::DVector::from_column_slice(t);
        template.with_flat(x.as_slice())
    };
    let system = |t: &[f64]| {
        let p = point_at(t);
        let f: Vec<f64> = maps.iter().map(|m| m.value(&p).expect("chart checked")).collect();
        let g: Vec<Vec<f64>> = maps.iter().map(|m| m.gradient(&p).expect("chart checked")).collect();
        let jac = to_matrix(&g, face.base.len()) * &face.basis;
        (f, jac)
    };
    let scale = maps.iter().map(|m| m.scale).fold(1.0, f64::max);
    let opts = NewtonOptions { max_iter: 100, residual_tol: tol.residual * scale, rank_tol: tol.rank };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut roots: Vec<ProbeRoot> = Vec::new();
    let mut seen: Vec<Vec<f64>> = Vec::new();
    for _ in 0..32 {
        let start: Vec<f64> = (0..k).map(|_| StandardNormal.sample(&mut rng)).collect();
        let out = damped_newton(system, start, &opts);
        if !out.converged || seen.iter().any(|s| dist(s, &out.x) <= tol.dedup) {
            continue;
        }
        let (_, jac) = system(&out.x);
        let sv = singular_values(&jac);
        let rank = rank_of_values(&sv, tol.rank);
        let smallest = if k < equations { Some(0.0) } else { sv.get(equations - 1).copied() };
        roots.push(ProbeRoot {
            point: point_at(&out.x),
            residual: out.residual,
            rank,
            smallest_singular_value: smallest,
            regular: rank == equations,
        });
        seen.push(out.x);
    }
    let verdict = if roots.iter().all(|r| r.regular) {
        ProbeVerdict::NoDegeneracyWitnessed
    } else {
        ProbeVerdict::DegeneracyWitnessed
    };
    Ok(ProbeReport { chart: chart.clone(), face_dimension: Some(k), equations, roots, verdict })
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Compare full row rank of `full` with full row rank of its lower block
/// restricted to the null space of the top `b` rows.
pub fn rank_split_equivalence_test(full: &DMatrix<f64>, b: usize, rank_tol: f64) -> bool {
    let rows = full.nrows();
    let stacked = rank_of_values(&singular_values(full), rank_tol) == rows;
    let top = full.rows(0, b).clone_owned();
    let lower = full.rows(b, rows - b).clone_owned();
    let restricted = &lower * null_space(&top, rank_tol);
    let split = rows - b == 0 || rank_of_values(&singular_values(&restricted), rank_tol) == rows - b;
    stacked == split
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::MixedProfile;

    fn pairs(p: &[(usize, usize)]) -> GoodFamily {
        GoodFamily { t: vec![BTreeSet::new()], r: vec![p.iter().copied().collect()] }
    }

    fn pennies() -> FiniteGame {
        FiniteGame::new(vec![2, 2], vec![vec![1.0, -1.0, -1.0, 1.0], vec![-1.0, 1.0, 1.0, -1.0]]).unwrap()
    }

    #[test]
    fn forests_and_cycles() {
        assert!(is_good(&pairs(&[(0, 1), (1, 2)])));
        assert!(!is_good(&pairs(&[(0, 1), (0, 2), (1, 2)])));
        assert!(is_good(&GoodFamily::empty(3)));
        assert_eq!(find_cycle(&pairs(&[(0, 1), (0, 2), (1, 2)]), 0), Some(vec![0, 1, 2]));
        assert_eq!(find_cycle(&pairs(&[(0, 3), (1, 2), (2, 3), (0, 1)]), 0), Some(vec![0, 1, 2, 3]));
        assert_eq!(find_cycle(&pairs(&[(0, 1)]), 0), None);
    }

    #[test]
    fn canonical_family() {
        let s = SupportProfile { supports: vec![vec![1, 2], vec![0]] };
        let f = GoodFamily::canonical(&[3, 2], &s);
        let names: Vec<String> = f.hypersurfaces().iter().map(ToString::to_string).collect();
        assert_eq!(names, vec!["C:1:0", "D:1:1:2", "C:2:1"]);
        assert!(is_good(&f));
    }

    #[test]
    fn pennies_transversality() {
        let g = pennies();
        let fam = GoodFamily { t: vec![BTreeSet::new(); 2], r: vec![[(0, 1)].into(), [(0, 1)].into()] };
        let p = ChartPoint::from_profile(&MixedProfile::new(vec![vec![0.5, 0.5], vec![0.5, 0.5]]));
        let r = transversal_at(&g, &fam, &p, 1e-8, 1e-8).unwrap();
        assert_eq!(r.jacobian, vec![vec![0.0, -4.0], vec![4.0, 0.0]]);
        assert_eq!(r.rank, 2);
        assert_eq!(r.smallest_singular_value, Some(4.0));
        assert!(r.is_transversal());
        let off = ChartPoint::from_profile(&MixedProfile::new(vec![vec![0.9, 0.1], vec![0.2, 0.8]]));
        let r = transversal_at(&g, &fam, &off, 1e-8, 1e-8).unwrap();
        assert!(r.active.is_empty() && r.is_transversal() && r.smallest_singular_value.is_none());
    }

    #[test]
    fn too_many_active_is_degenerate() {
        // Player 1's payoff difference vanishes on γ^2_1 = 0, player 2's on
        // γ^1_1 = 1/2; with the hyperplane γ^2_1 = 0 that is three hypersurfaces
        // through one point of a plane.
        let g = FiniteGame::new(vec![2, 2], vec![vec![0.0, 0.0, 0.0, 1.0], vec![-1.0, 1.0, 1.0, -1.0]]).unwrap();
        let fam = GoodFamily {
            t: vec![BTreeSet::new(), [StrategyLabel::Finite(1)].into()],
            r: vec![[(0, 1)].into(), [(0, 1)].into()],
        };
        let p = ChartPoint::from_profile(&MixedProfile::new(vec![vec![0.5, 0.5], vec![1.0, 0.0]]));
        let r = transversal_at(&g, &fam, &p, 1e-8, 1e-8).unwrap();
        assert_eq!(r.active.len(), 3);
        assert_eq!(r.rank, 2);
        assert_eq!(r.verdict, Verdict::Degenerate);
    }

    #[test]
    fn chart_exclusion_is_an_error() {
        let g = pennies();
        let fam = GoodFamily { t: vec![[StrategyLabel::Infinity].into(), BTreeSet::new()], r: vec![BTreeSet::new(); 2] };
        let p = ChartPoint::from_profile(&MixedProfile::centroid(&[2, 2]));
        assert!(matches!(transversal_at(&g, &fam, &p, 1e-8, 1e-8), Err(Error::ChartExcludesHypersurface { .. })));
    }

    #[test]
    fn probe_on_pennies_and_zero_game() {
        let tol = Tolerances::default();
        let fam = GoodFamily { t: vec![BTreeSet::new(); 2], r: vec![[(0, 1)].into(), BTreeSet::new()] };
        let chart = ChartId::standard(2);
        let r = regular_value_probe(&pennies(), &fam, &chart, 1, &tol).unwrap();
        assert_eq!(r.face_dimension, Some(2));
        assert!(!r.roots.is_empty());
        assert_eq!(r.verdict, ProbeVerdict::NoDegeneracyWitnessed);
        let zero = FiniteGame::new(vec![2, 2], vec![vec![0.0; 4]; 2]).unwrap();
        let r = regular_value_probe(&zero, &fam, &chart, 1, &tol).unwrap();
        assert_eq!(r.verdict, ProbeVerdict::DegeneracyWitnessed);
        assert!(r.roots.iter().all(|x| x.rank == 0));
    }

    #[test]
    fn probe_with_coordinate_face() {
        // γ^1_0 = 0 puts player 1 on strategy 1; player 1's indifference then
        // pins γ^2_1 = 1/2.
        let tol = Tolerances::default();
        let fam = GoodFamily {
            t: vec![[StrategyLabel::Finite(0)].into(), BTreeSet::new()],
            r: vec![[(0, 1)].into(), BTreeSet::new()],
        };
        let r = regular_value_probe(&pennies(), &fam, &ChartId::standard(2), 3, &tol).unwrap();
        assert_eq!(r.face_dimension, Some(1));
        assert_eq!(r.roots.len(), 1);
        assert!((r.roots[0].point.coords[0][0] - 1.0).abs() < 1e-12);
        assert!((r.roots[0].point.coords[1][0] - 0.5).abs() < 1e-12);
        assert_eq!(r.verdict, ProbeVerdict::NoDegeneracyWitnessed);
    }

    #[test]
    fn rank_split_examples() {
        let mut m = DMatrix::identity(3, 3);
        assert!(rank_split_equivalence_test(&m, 3, 1e-8));
        m[(2, 2)] = 0.0;
        m[(2, 0)] = 5.0;
        assert!(rank_split_equivalence_test(&m, 2, 1e-8));
        assert!(rank_split_equivalence_test(&DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 2.0, 0.0, 1.0]), 1, 1e-8));
    }
}
