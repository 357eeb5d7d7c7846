//! Nash equilibria by support enumeration.
//!
//! For a support profile `(S_1, …, S_m)` the equalities
//! `λ^i_{j*} − λ^i_j = 0` (`j* = min S_i`, `j ∈ S_i − {j*}`) form a square
//! system on the face of `G` spanned by the supports. Two-player systems are
//! linear in the opponent's weights and are solved exactly over `Q`; systems
//! with three or more players go through multistart damped Newton. Every
//! candidate is then checked against the off-support inequalities.

use nalgebra::DMatrix;
use num::{BigRational, One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::atlas::ChartPoint;
use crate::game::{support_of, FiniteGame, MixedProfile, SupportProfile, DEFAULT_ZERO_TOL};
use crate::genericity::{certify_equilibrium, TransversalityReport, Verdict};
use crate::linalg::{closest_in_affine, singular_values, solve_exact, LinearSolution};
use crate::multilinear::{
    lambda_decomposition, lambda_decomposition_exact, payoff_form, LambdaDecomposition, MultilinearForm,
};
use crate::newton::{damped_newton, NewtonOptions};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Support threshold for float weights.
    pub zero_tol: f64,
    /// Strict positivity of weights on the support (float games).
    pub positivity: f64,
    /// Accepted off-support margin floor; margins within it are flagged.
    pub margin: f64,
    /// Equality residual allowed by the best-reply check.
    pub equality: f64,
    /// Membership tolerance for "active" hypersurfaces.
    pub membership: f64,
    /// Relative singular-value threshold.
    pub rank: f64,
    /// Newton root residual, relative to `max(1, max |U|)`.
    pub residual: f64,
    /// Distance under which two Newton roots are the same.
    pub dedup: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            zero_tol: DEFAULT_ZERO_TOL,
            positivity: 1e-9,
            margin: 1e-8,
            equality: 1e-8,
            membership: crate::atlas::DEFAULT_MEMBERSHIP_TOL,
            rank: crate::linalg::DEFAULT_RANK_TOL,
            residual: 1e-10,
            dedup: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolveMethod {
    /// Exact elimination for two players, Newton otherwise.
    #[default]
    Auto,
    Exact,
    Newton,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub tol: Tolerances,
    pub method: SolveMethod,
    pub max_iter: usize,
    pub random_starts: usize,
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: Tolerances::default(), method: SolveMethod::Auto, max_iter: 100, random_starts: 32, seed: 0 }
    }
}

/// Best-reply test for one player.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestReplyVerdict {
    pub player: usize,
    pub is_best_reply: bool,
    /// `max |λ^i_j − λ^i_k|` over in-support pairs.
    pub equality_residual: f64,
    /// `min λ^i_j − λ^i_k` over `j ∈ supp`, `k ∉ supp`; `None` for full support.
    pub margin: Option<f64>,
}

fn verdict_from_lambdas(player: usize, lambdas: &[f64], support: &[usize], tol: f64) -> BestReplyVerdict {
    let inside: Vec<f64> = support.iter().map(|&j| lambdas[j]).collect();
    let hi = inside.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = inside.iter().copied().fold(f64::INFINITY, f64::min);
    let equality_residual = if inside.is_empty() { 0.0 } else { hi - lo };
    let outside_max = (0..lambdas.len())
        .filter(|j| !support.contains(j))
        .map(|k| lambdas[k])
        .fold(f64::NEG_INFINITY, f64::max);
    let margin = (outside_max > f64::NEG_INFINITY).then_some(lo - outside_max);
    let is_best_reply =
        !inside.is_empty() && equality_residual <= tol && margin.is_none_or(|m| m >= -tol);
    BestReplyVerdict { player, is_best_reply, equality_residual, margin }
}

/// Best-reply test per player at `profile ∈ G`, with supports read at the
/// default float zero tolerance and `λ^i_0 = 0` included among the candidates.
pub fn best_reply_check(game: &FiniteGame, profile: &MixedProfile<f64>, tol: f64) -> Vec<BestReplyVerdict> {
    best_reply_check_with(game, profile, tol, DEFAULT_ZERO_TOL)
}

pub fn best_reply_check_with(
    game: &FiniteGame,
    profile: &MixedProfile<f64>,
    tol: f64,
    zero_tol: f64,
) -> Vec<BestReplyVerdict> {
    let support = support_of(profile, zero_tol);
    let affine = profile.affine_coords();
    (0..game.num_players())
        .map(|i| {
            let lambdas = lambda_decomposition(game, i).lambda_values(&affine).expect("shape checked");
            verdict_from_lambdas(i, &lambdas, &support.supports[i], tol)
        })
        .collect()
}

/// Exact best-reply margins for a rational profile: `Some(margin)` per player,
/// or `None` at full support; errors if an in-support equality fails.
fn exact_margins(
    decs: &[LambdaDecomposition<BigRational>],
    profile: &MixedProfile<BigRational>,
    support: &SupportProfile,
) -> Option<Vec<Option<BigRational>>> {
    let affine = profile.affine_coords();
    decs.iter()
        .enumerate()
        .map(|(i, d)| {
            let lambdas = d.lambda_values(&affine).ok()?;
            let s = &support.supports[i];
            let first = &lambdas[s[0]];
            if s.iter().any(|&j| &lambdas[j] != first) {
                return None;
            }
            let margin = (0..lambdas.len())
                .filter(|j| !s.contains(j))
                .map(|k| first - &lambdas[k])
                .min();
            Some(margin)
        })
        .collect()
}

/// Every support profile: for each player the nonempty subsets of `J^i_0` in
/// lexicographic order of their sorted index lists, first player slowest.
pub fn enumerate_supports(counts: &[usize]) -> Vec<SupportProfile> {
    let per_player: Vec<Vec<Vec<usize>>> = counts
        .iter()
        .map(|&c| {
            let mut subsets: Vec<Vec<usize>> = (1u64..(1 << c))
                .map(|mask| (0..c).filter(|&j| mask & (1 << j) != 0).collect())
                .collect();
            subsets.sort();
            subsets
        })
        .collect();
    let sizes: Vec<usize> = per_player.iter().map(Vec::len).collect();
    let mut out = Vec::with_capacity(sizes.iter().product());
    crate::tensor::for_each_index(&sizes, |idx| {
        out.push(SupportProfile {
            supports: idx.iter().zip(&per_player).map(|(&k, subs)| subs[k].clone()).collect(),
        });
    });
    out
}

/// The square equality system of one support profile on its face. Unknowns
/// are the weights on `S_i − {j*}`; `γ^i_{j*} = 1 − Σ` the rest.
#[derive(Debug, Clone)]
pub struct SupportSystem {
    pub support: SupportProfile,
    /// `(player, j, λ^i_{j*} − λ^i_j)` for `j ∈ S_i − {j*}`.
    pub equations: Vec<(usize, usize, MultilinearForm<f64>)>,
    /// `(player, j)` per unknown.
    pub unknowns: Vec<(usize, usize)>,
    counts: Vec<usize>,
}

impl SupportSystem {
    pub fn new(game: &FiniteGame, support: &SupportProfile) -> Self {
        let mut equations = Vec::new();
        let mut unknowns = Vec::new();
        for (i, s) in support.supports.iter().enumerate() {
            if s.len() < 2 {
                continue;
            }
            let dec = lambda_decomposition(game, i);
            let hub = s[0];
            for &j in &s[1..] {
                equations.push((i, j, dec.lambdas[hub].sub(&dec.lambdas[j]).expect("same blocks")));
                unknowns.push((i, j));
            }
        }
        Self { support: support.clone(), equations, unknowns, counts: game.strategy_counts().to_vec() }
    }

    pub fn size(&self) -> usize {
        self.unknowns.len()
    }

    /// Full profile from face parameters.
    pub fn profile(&self, params: &[f64]) -> MixedProfile<f64> {
        let mut weights: Vec<Vec<f64>> = self.counts.iter().map(|&c| vec![0.0; c]).collect();
        for (i, s) in self.support.supports.iter().enumerate() {
            weights[i][s[0]] = 1.0;
        }
        for (&(i, j), &w) in self.unknowns.iter().zip(params) {
            weights[i][j] = w;
            let hub = self.support.supports[i][0];
            weights[i][hub] -= w;
        }
        MixedProfile::new(weights)
    }

    pub fn params_of(&self, profile: &MixedProfile<f64>) -> Vec<f64> {
        self.unknowns.iter().map(|&(i, j)| profile.weights[i][j]).collect()
    }

    /// Residuals and Jacobian with respect to the face parameters.
    pub fn evaluate(&self, params: &[f64]) -> (Vec<f64>, DMatrix<f64>) {
        let profile = self.profile(params);
        let affine = profile.affine_coords();
        let n = self.size();
        let mut f = Vec::with_capacity(n);
        let mut jac = DMatrix::zeros(n, n);
        for (row, (_, _, form)) in self.equations.iter().enumerate() {
            f.push(form.eval_at(&affine).expect("shape"));
            for (col, &(k, a)) in self.unknowns.iter().enumerate() {
                let Some(g) = form.grad_player(&affine, k).expect("shape") else { continue };
                // g[b-1] = ∂/∂γ^k_b; moving w_{k,a} also moves the hub weight.
                let hub = self.support.supports[k][0];
                let mut d = g[a - 1];
                if hub >= 1 {
                    d -= g[hub - 1];
                }
                jac[(row, col)] = d;
            }
        }
        (f, jac)
    }

    /// Face centroid, vertices pulled 10% toward it, then seeded random
    /// interior points.
    fn starts(&self, random: usize, seed: u64) -> Vec<Vec<f64>> {
        let sizes: Vec<usize> = self.support.supports.iter().map(Vec::len).collect();
        let centroid = MixedProfile::new(
            self.support
                .supports
                .iter()
                .zip(&self.counts)
                .map(|(s, &c)| (0..c).map(|j| if s.contains(&j) { 1.0 / s.len() as f64 } else { 0.0 }).collect())
                .collect(),
        );
        let mut out = vec![self.params_of(&centroid)];
        crate::tensor::for_each_index(&sizes, |pick| {
            let mut p = centroid.clone();
            for (i, &v) in pick.iter().enumerate() {
                for w in p.weights[i].iter_mut() {
                    *w *= 0.1;
                }
                p.weights[i][self.support.supports[i][v]] += 0.9;
            }
            out.push(self.params_of(&p));
        });
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..random {
            let mut p = centroid.clone();
            for (i, s) in self.support.supports.iter().enumerate() {
                let e: Vec<f64> = s.iter().map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
                let total: f64 = e.iter().sum();
                for (&j, x) in s.iter().zip(&e) {
                    p.weights[i][j] = x / total;
                }
            }
            out.push(self.params_of(&p));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WarningKind {
    /// The support system is rank deficient at a solution.
    SingularSystem,
    /// A positive-dimensional set of equilibria was found.
    Continuum,
    /// An equilibrium has an off-support margin inside `(−tol, tol)`.
    BoundaryDegenerate,
    /// An equilibrium failed the Jacobian certification.
    IrregularEquilibrium,
}

/// Evidence of degeneracy: a point in `A` where the support family's Jacobian
/// drops rank.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub point: MixedProfile<f64>,
    pub rank: usize,
    pub expected_rank: usize,
    pub smallest_singular_value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverWarning {
    pub kind: WarningKind,
    pub support: SupportProfile,
    pub message: String,
    pub witness: Option<Witness>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub profile: MixedProfile<f64>,
    pub exact: Option<MixedProfile<BigRational>>,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuumWitness {
    pub support: SupportProfile,
    /// Equilibria spanning the detected continuum (two roots and their
    /// midpoint, or one interior point of a positive-dimensional solution set).
    pub points: Vec<MixedProfile<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupportOutcome {
    pub support: SupportProfile,
    pub candidates: Vec<Candidate>,
    pub warnings: Vec<SolverWarning>,
    pub continuum: Option<ContinuumWitness>,
}

fn witness_at(game: &FiniteGame, support: &SupportProfile, point: MixedProfile<f64>, tol: &Tolerances) -> Witness {
    let report = crate::genericity::support_family_report(game, support, &ChartPoint::from_profile(&point), tol);
    Witness {
        point,
        rank: report.rank,
        expected_rank: report.active.len(),
        smallest_singular_value: report.smallest_singular_value,
    }
}

/// Solve the support system of `support`, returning the isolated solutions
/// that are strictly positive on the support.
pub fn solve_support(game: &FiniteGame, support: &SupportProfile, opts: &SolverOptions) -> SupportOutcome {
    let method = match opts.method {
        SolveMethod::Auto if game.num_players() <= 2 => SolveMethod::Exact,
        SolveMethod::Auto => SolveMethod::Newton,
        m => m,
    };
    match method {
        SolveMethod::Exact => solve_support_exact(game, support, opts),
        _ => solve_support_newton(game, support, opts),
    }
}

/// Exact elimination; each player's weights are pinned down by the other
/// players' equalities, which must then be linear (one or two players).
fn solve_support_exact(game: &FiniteGame, support: &SupportProfile, opts: &SolverOptions) -> SupportOutcome {
    assert!(game.num_players() <= 2, "exact support solving needs at most two players");
    let m = game.num_players();
    let counts = game.strategy_counts();
    let decs: Vec<LambdaDecomposition<BigRational>> = (0..m).map(|i| lambda_decomposition_exact(game, i)).collect();
    let mut outcome =
        SupportOutcome { support: support.clone(), candidates: Vec::new(), warnings: Vec::new(), continuum: None };

    // Per player `o`: solution of the opponent's equalities plus Σ y = 1.
    let mut solutions = Vec::with_capacity(m);
    for o in 0..m {
        let s_o = &support.supports[o];
        let mut rows: Vec<Vec<BigRational>> = Vec::new();
        let mut rhs: Vec<BigRational> = Vec::new();
        if m == 2 {
            let i = 1 - o;
            let s_i = &support.supports[i];
            let hub = s_i[0];
            for &j in &s_i[1..] {
                let diff = decs[i].lambdas[hub].sub(&decs[i].lambdas[j]).expect("same blocks");
                // Linear in the opponent block: coefficient of y_k is the value at vertex k.
                let row = s_o
                    .iter()
                    .map(|&k| {
                        let vertex: Vec<BigRational> = (1..counts[o])
                            .map(|b| if b == k { BigRational::one() } else { BigRational::zero() })
                            .collect();
                        diff.eval(&[vertex]).expect("one block")
                    })
                    .collect();
                rows.push(row);
                rhs.push(BigRational::zero());
            }
        }
        rows.push(vec![BigRational::one(); s_o.len()]);
        rhs.push(BigRational::one());
        match solve_exact(&rows, &rhs, s_o.len()) {
            LinearSolution::Inconsistent => return outcome,
            sol => solutions.push(sol),
        }
    }

    let embed = |o: usize, y: &[BigRational]| -> Vec<BigRational> {
        let mut w = vec![BigRational::zero(); counts[o]];
        for (&k, v) in support.supports[o].iter().zip(y) {
            w[k] = v.clone();
        }
        w
    };

    let singular = solutions.iter().any(|s| matches!(s, LinearSolution::Underdetermined { .. }));
    if singular {
        // Closest point to the face centroid within the solution set.
        let weights: Vec<Vec<BigRational>> = solutions
            .iter()
            .enumerate()
            .map(|(o, sol)| match sol {
                LinearSolution::Unique(y) => embed(o, y),
                LinearSolution::Underdetermined { particular, nullspace, .. } => {
                    let len = support.supports[o].len();
                    let c = vec![BigRational::new(1.into(), (len as i64).into()); len];
                    embed(o, &closest_in_affine(particular, nullspace, &c))
                }
                LinearSolution::Inconsistent => unreachable!(),
            })
            .collect();
        let point = MixedProfile::new(weights);
        let point_f = point.to_f64();
        outcome.warnings.push(SolverWarning {
            kind: WarningKind::SingularSystem,
            support: support.clone(),
            message: format!("support system {support} is rank deficient: its solution set is positive-dimensional"),
            witness: Some(witness_at(game, support, point_f.clone(), &opts.tol)),
        });
        let positive = support
            .supports
            .iter()
            .enumerate()
            .all(|(o, s)| s.iter().all(|&k| point.weights[o][k].is_positive()));
        let strict = exact_margins(&decs, &point, support)
            .is_some_and(|ms| ms.iter().all(|m| m.as_ref().is_none_or(|x| x.is_positive())));
        if positive && strict {
            outcome.continuum = Some(ContinuumWitness { support: support.clone(), points: vec![point_f] });
        }
        return outcome;
    }

    let weights: Vec<Vec<BigRational>> = solutions
        .iter()
        .enumerate()
        .map(|(o, sol)| match sol {
            LinearSolution::Unique(y) => embed(o, y),
            _ => unreachable!(),
        })
        .collect();
    let exact_point = MixedProfile::new(weights);
    let positive = support.supports.iter().enumerate().all(|(o, s)| {
        s.iter().all(|&k| {
            let w = &exact_point.weights[o][k];
            if game.is_exact() {
                w.is_positive()
            } else {
                w.as_f64() > opts.tol.positivity
            }
        })
    });
    if !positive {
        return outcome;
    }
    let margins = exact_margins(&decs, &exact_point, support).expect("equalities hold by construction");
    let feasible = margins.iter().all(|m| match m {
        None => true,
        Some(x) if game.is_exact() => !x.is_negative(),
        Some(x) => x.as_f64() >= -opts.tol.margin,
    });
    if feasible {
        outcome.candidates.push(Candidate { profile: exact_point.to_f64(), exact: Some(exact_point), residual: 0.0 });
    }
    outcome
}

fn solve_support_newton(game: &FiniteGame, support: &SupportProfile, opts: &SolverOptions) -> SupportOutcome {
    let system = SupportSystem::new(game, support);
    let mut outcome =
        SupportOutcome { support: support.clone(), candidates: Vec::new(), warnings: Vec::new(), continuum: None };
    let scale = game.payoffs().iter().map(|t| t.max_abs()).fold(1.0, f64::max);
    let residual_tol = opts.tol.residual * scale;
    if system.size() == 0 {
        outcome.candidates.push(Candidate { profile: system.profile(&[]), exact: None, residual: 0.0 });
        return outcome;
    }
    let newton = NewtonOptions { max_iter: opts.max_iter, residual_tol, rank_tol: opts.tol.rank };
    let seed = opts.seed ^ support_seed(support);
    let mut roots: Vec<(Vec<f64>, f64)> = Vec::new();
    for start in system.starts(opts.random_starts, seed) {
        let out = damped_newton(|x: &[f64]| system.evaluate(x), start, &newton);
        if !out.converged {
            continue;
        }
        let dup = roots.iter().any(|(r, _)| {
            r.iter().zip(&out.x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt() <= opts.tol.dedup
        });
        if !dup {
            roots.push((out.x, out.residual));
        }
    }
    let in_face = |params: &[f64]| {
        let p = system.profile(params);
        support
            .supports
            .iter()
            .enumerate()
            .all(|(i, s)| s.iter().all(|&j| p.weights[i][j] > opts.tol.positivity))
    };
    let mut singular_reported = false;
    let mut face_roots = Vec::new();
    for (x, residual) in &roots {
        if !in_face(x) {
            continue;
        }
        let (_, jac) = system.evaluate(x);
        let sv = singular_values(&jac);
        let rank = crate::linalg::rank_of_values(&sv, opts.tol.rank);
        if rank < system.size() && !singular_reported {
            singular_reported = true;
            let point = system.profile(x);
            outcome.warnings.push(SolverWarning {
                kind: WarningKind::SingularSystem,
                support: support.clone(),
                message: format!(
                    "support system {support} has a singular Jacobian at a root (rank {rank} of {})",
                    system.size()
                ),
                witness: Some(witness_at(game, support, point, &opts.tol)),
            });
        }
        face_roots.push((x.clone(), *residual));
    }
    // Two roots whose midpoint also solves the system indicate a continuum.
    'pairs: for a in 0..face_roots.len() {
        for b in a + 1..face_roots.len() {
            let mid: Vec<f64> = face_roots[a].0.iter().zip(&face_roots[b].0).map(|(p, q)| 0.5 * (p + q)).collect();
            let (f, _) = system.evaluate(&mid);
            if f.iter().all(|v| v.abs() <= residual_tol) {
                let pts = [&face_roots[a].0, &mid, &face_roots[b].0].map(|x| system.profile(x));
                let all_eq = pts.iter().all(|p| {
                    best_reply_check_with(game, p, opts.tol.equality, opts.tol.zero_tol).iter().all(|v| v.is_best_reply)
                });
                if all_eq {
                    outcome.continuum = Some(ContinuumWitness { support: support.clone(), points: pts.to_vec() });
                    break 'pairs;
                }
            }
        }
    }
    if outcome.continuum.is_some() && !singular_reported {
        outcome.warnings.push(SolverWarning {
            kind: WarningKind::SingularSystem,
            support: support.clone(),
            message: format!("support system {support} has a positive-dimensional solution set"),
            witness: None,
        });
    }
    outcome.candidates = face_roots
        .into_iter()
        .map(|(x, residual)| Candidate { profile: system.profile(&x), exact: None, residual })
        .collect();
    outcome
}

fn support_seed(support: &SupportProfile) -> u64 {
    // FNV-1a over the support indices.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for s in &support.supports {
        for &j in s {
            h = (h ^ (j as u64 + 1)).wrapping_mul(0x100_0000_01b3);
        }
        h = (h ^ 0xff).wrapping_mul(0x100_0000_01b3);
    }
    h
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JacobianVerdict {
    pub regular: bool,
    pub rank: usize,
    pub size: usize,
    pub smallest_singular_value: Option<f64>,
}

impl From<&TransversalityReport> for JacobianVerdict {
    fn from(r: &TransversalityReport) -> Self {
        Self {
            regular: r.verdict == Verdict::Transversal,
            rank: r.rank,
            size: r.active.len(),
            smallest_singular_value: r.smallest_singular_value,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumCertificate {
    pub point: MixedProfile<f64>,
    pub exact_point: Option<MixedProfile<BigRational>>,
    pub support: SupportProfile,
    /// `V^i` at the equilibrium.
    pub payoffs: Vec<f64>,
    pub exact_payoffs: Option<Vec<BigRational>>,
    pub equality_residual: f64,
    /// Smallest off-support margin over all players; `None` at full support.
    pub inequality_margin: Option<f64>,
    pub boundary_degenerate: bool,
    pub jacobian: JacobianVerdict,
    /// Produced in exact (rational) mode.
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NashReport {
    pub equilibria: Vec<EquilibriumCertificate>,
    pub continuum: Option<ContinuumWitness>,
    pub warnings: Vec<SolverWarning>,
}

impl NashReport {
    pub fn is_finite(&self) -> bool {
        self.continuum.is_none()
    }

    pub fn count(&self) -> Option<usize> {
        self.is_finite().then_some(self.equilibria.len())
    }

    pub fn degeneracy_witnessed(&self) -> bool {
        self.continuum.is_some() || !self.warnings.is_empty()
    }

    pub fn all_regular(&self) -> bool {
        self.equilibria.iter().all(|c| c.jacobian.regular)
    }
}

fn certificate(
    game: &FiniteGame,
    support: &SupportProfile,
    cand: Candidate,
    opts: &SolverOptions,
) -> Option<EquilibriumCertificate> {
    let verdicts = best_reply_check_with(game, &cand.profile, opts.tol.equality, opts.tol.zero_tol);
    if !verdicts.iter().all(|v| v.is_best_reply) {
        return None;
    }
    if &support_of(&cand.profile, opts.tol.zero_tol) != support {
        return None;
    }
    let equality_residual = verdicts.iter().map(|v| v.equality_residual).fold(0.0, f64::max);
    let inequality_margin = verdicts.iter().filter_map(|v| v.margin).reduce(f64::min);
    let boundary_degenerate = inequality_margin.is_some_and(|m| m.abs() < opts.tol.margin);
    let payoffs = (0..game.num_players())
        .map(|i| payoff_form(game, i).eval(&cand.profile.weights).expect("shape"))
        .collect();
    let exact_payoffs = match (&cand.exact, game.is_exact()) {
        (Some(p), true) => Some(
            (0..game.num_players())
                .map(|i| crate::multilinear::payoff_form_exact(game, i).eval(&p.weights).expect("shape"))
                .collect(),
        ),
        _ => None,
    };
    let mut cert = EquilibriumCertificate {
        point: cand.profile,
        exact_point: if game.is_exact() { cand.exact } else { None },
        support: support.clone(),
        payoffs,
        exact_payoffs,
        equality_residual,
        inequality_margin,
        boundary_degenerate,
        jacobian: JacobianVerdict { regular: false, rank: 0, size: 0, smallest_singular_value: None },
        exact: game.is_exact(),
    };
    let report = certify_equilibrium(game, &cert, &opts.tol);
    cert.jacobian = JacobianVerdict::from(&report);
    Some(cert)
}

/// All Nash equilibria of the mixed extension, each with its certificate.
pub fn enumerate_nash(game: &FiniteGame) -> NashReport {
    enumerate_nash_with(game, &SolverOptions::default())
}

pub fn enumerate_nash_with(game: &FiniteGame, opts: &SolverOptions) -> NashReport {
    let supports = enumerate_supports(game.strategy_counts());
    let outcomes: Vec<(SupportOutcome, Vec<EquilibriumCertificate>)> = supports
        .par_iter()
        .map(|s| {
            let mut out = solve_support(game, s, opts);
            let certs = std::mem::take(&mut out.candidates)
                .into_iter()
                .filter_map(|c| certificate(game, s, c, opts))
                .collect();
            (out, certs)
        })
        .collect();
    let mut equilibria = Vec::new();
    let mut warnings = Vec::new();
    let mut continuum = None;
    for (out, certs) in outcomes {
        warnings.extend(out.warnings);
        if continuum.is_none() {
            continuum = out.continuum;
        }
        for c in certs {
            if c.boundary_degenerate {
                warnings.push(SolverWarning {
                    kind: WarningKind::BoundaryDegenerate,
                    support: c.support.clone(),
                    message: format!(
                        "equilibrium with support {} has off-support margin {:.3e}",
                        c.support,
                        c.inequality_margin.unwrap_or(0.0)
                    ),
                    witness: None,
                });
            }
            if !c.jacobian.regular {
                warnings.push(SolverWarning {
                    kind: WarningKind::IrregularEquilibrium,
                    support: c.support.clone(),
                    message: format!(
                        "equilibrium with support {} has a degenerate Jacobian (rank {} of {})",
                        c.support, c.jacobian.rank, c.jacobian.size
                    ),
                    witness: Some(Witness {
                        point: c.point.clone(),
                        rank: c.jacobian.rank,
                        expected_rank: c.jacobian.size,
                        smallest_singular_value: c.jacobian.smallest_singular_value,
                    }),
                });
            }
            equilibria.push(c);
        }
    }
    if let Some(cw) = &continuum {
        warnings.push(SolverWarning {
            kind: WarningKind::Continuum,
            support: cw.support.clone(),
            message: "non-generic: continuum detected".into(),
            witness: None,
        });
    }
    equilibria.sort_by(|a, b| {
        a.support.cmp(&b.support).then_with(|| {
            a.point
                .weights
                .iter()
                .flatten()
                .zip(b.point.weights.iter().flatten())
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    });
    NashReport { equilibria, continuum, warnings }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rational;

    fn exact_game(counts: Vec<usize>, u: Vec<Vec<i64>>) -> FiniteGame {
        FiniteGame::new_exact(counts, u.into_iter().map(|t| t.into_iter().map(|x| rational(x, 1)).collect()).collect())
            .unwrap()
    }

    fn pennies() -> FiniteGame {
        exact_game(vec![2, 2], vec![vec![1, -1, -1, 1], vec![-1, 1, 1, -1]])
    }

    fn battle() -> FiniteGame {
        exact_game(vec![2, 2], vec![vec![2, 0, 0, 1], vec![1, 0, 0, 2]])
    }

    #[test]
    fn support_counts() {
        assert_eq!(enumerate_supports(&[2, 2]).len(), 9);
        assert_eq!(enumerate_supports(&[2, 2, 2]).len(), 27);
        assert_eq!(enumerate_supports(&[3, 2]).len(), 21);
        let s = enumerate_supports(&[3]);
        let lists: Vec<_> = s.iter().map(|p| p.supports[0].clone()).collect();
        assert_eq!(lists, vec![vec![0], vec![0, 1], vec![0, 1, 2], vec![0, 2], vec![1], vec![1, 2], vec![2]]);
    }

    #[test]
    fn best_reply_at_pennies_centroid() {
        let g = pennies();
        let v = best_reply_check(&g, &MixedProfile::new(vec![vec![0.5, 0.5], vec![0.5, 0.5]]), 1e-12);
        assert!(v.iter().all(|x| x.is_best_reply && x.margin.is_none() && x.equality_residual == 0.0));
    }

    #[test]
    fn best_reply_at_pennies_corner() {
        // At ((1,0),(1,0)) player 1 earns 1 (best), player 2 earns −1 and would rather switch.
        let g = pennies();
        let v = best_reply_check(&g, &MixedProfile::new(vec![vec![1.0, 0.0], vec![1.0, 0.0]]), 1e-12);
        assert!(v[0].is_best_reply);
        assert_eq!(v[0].margin, Some(2.0));
        assert!(!v[1].is_best_reply);
        assert_eq!(v[1].margin, Some(-2.0));
    }

    #[test]
    fn zero_game_best_replies_everywhere() {
        let g = FiniteGame::new(vec![3, 2], vec![vec![0.0; 6]; 2]).unwrap();
        let v = best_reply_check(&g, &MixedProfile::new(vec![vec![0.2, 0.0, 0.8], vec![0.3, 0.7]]), 1e-12);
        assert!(v.iter().all(|x| x.is_best_reply));
    }

    #[test]
    fn pennies_full_support() {
        let g = pennies();
        let out = solve_support(&g, &SupportProfile::full(&[2, 2]), &SolverOptions::default());
        assert_eq!(out.candidates.len(), 1);
        let half = rational(1, 2);
        assert_eq!(out.candidates[0].exact.as_ref().unwrap().weights, vec![vec![half.clone(), half.clone()], vec![half.clone(), half]]);
        let none = solve_support(&g, &SupportProfile { supports: vec![vec![0], vec![0, 1]] }, &SolverOptions::default());
        assert!(none.candidates.is_empty() && none.warnings.is_empty());
    }

    #[test]
    fn battle_full_support() {
        let out = solve_support(&battle(), &SupportProfile::full(&[2, 2]), &SolverOptions::default());
        let p = out.candidates[0].exact.clone().unwrap();
        assert_eq!(p.weights, vec![vec![rational(2, 3), rational(1, 3)], vec![rational(1, 3), rational(2, 3)]]);
    }

    #[test]
    fn enumerates_known_games() {
        let r = enumerate_nash(&pennies());
        assert_eq!(r.count(), Some(1));
        assert!(r.warnings.is_empty());
        assert!(r.equilibria[0].jacobian.regular);
        assert_eq!(r.equilibria[0].jacobian.smallest_singular_value, Some(4.0));
        let r = enumerate_nash(&battle());
        assert_eq!(r.count(), Some(3));
        assert!(r.all_regular() && r.warnings.is_empty());
        let pure: Vec<_> = r.equilibria.iter().filter(|c| c.support.is_pure()).map(|c| c.support.clone()).collect();
        assert_eq!(pure.len(), 2);
        assert_eq!(r.equilibria.iter().find(|c| !c.support.is_pure()).unwrap().exact_payoffs, Some(vec![rational(2, 3), rational(2, 3)]));
    }

    #[test]
    fn zero_games_report_continuum() {
        let z2 = FiniteGame::new(vec![2, 2], vec![vec![0.0; 4]; 2]).unwrap();
        let r = enumerate_nash(&z2);
        assert!(!r.is_finite());
        assert!(r.degeneracy_witnessed());
        let z3 = FiniteGame::new(vec![2, 2, 2], vec![vec![0.0; 8]; 3]).unwrap();
        let r = enumerate_nash(&z3);
        assert!(!r.is_finite());
        assert!(r.warnings.iter().any(|w| w.kind == WarningKind::Continuum));
    }

    #[test]
    fn newton_matches_exact_on_two_players() {
        for seed in 0..10 {
            let g = crate::game::random_game(&[3, 3], seed, crate::game::PayoffDistribution::Uniform).unwrap();
            let exact = enumerate_nash(&g);
            let newton = enumerate_nash_with(&g, &SolverOptions { method: SolveMethod::Newton, ..Default::default() });
            assert_eq!(exact.equilibria.len(), newton.equilibria.len(), "seed {seed}");
            for (a, b) in exact.equilibria.iter().zip(&newton.equilibria) {
                assert_eq!(a.support, b.support);
                assert!(a.point.distance(&b.point) < 1e-8);
            }
        }
    }

    #[test]
    fn support_system_jacobian_matches_finite_differences() {
        let g = crate::game::random_game(&[3, 2, 3], 8, crate::game::PayoffDistribution::Normal).unwrap();
        let sys = SupportSystem::new(&g, &SupportProfile { supports: vec![vec![1, 2], vec![0, 1], vec![0, 1, 2]] });
        let x = vec![0.3, 0.6, 0.2, 0.5];
        let (_, jac) = sys.evaluate(&x);
        let h = 1e-6;
        for c in 0..x.len() {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[c] += h;
            xm[c] -= h;
            let (fp, _) = sys.evaluate(&xp);
            let (fm, _) = sys.evaluate(&xm);
            for r in 0..x.len() {
                assert!((jac[(r, c)] - (fp[r] - fm[r]) / (2.0 * h)).abs() < 1e-6);
            }
        }
    }
}
