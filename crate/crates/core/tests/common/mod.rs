//! Independent oracles shared by the integration tests. Nothing here calls
//! into the library's decomposition, elimination or graph code.
#![allow(dead_code)]

use mixext::FiniteGame;
use num::{BigRational, One, Signed, Zero};
use rand::Rng;

/// `V(γ) = Σ_J U(J) Π_i γ^i_{j_i}` by brute force over all pure profiles, for
/// arbitrary (not necessarily normalized) weight vectors.
pub fn direct_value(shape: &[usize], data: &[f64], weights: &[Vec<f64>]) -> f64 {
    let mut total = 0.0;
    for (flat, u) in data.iter().enumerate() {
        let mut rest = flat;
        let mut prod = *u;
        for i in (0..shape.len()).rev() {
            prod *= weights[i][rest % shape[i]];
            rest /= shape[i];
        }
        total += prod;
    }
    total
}

pub fn direct_value_exact(shape: &[usize], data: &[BigRational], weights: &[Vec<BigRational>]) -> BigRational {
    let mut total = BigRational::zero();
    for (flat, u) in data.iter().enumerate() {
        let mut rest = flat;
        let mut prod = u.clone();
        for i in (0..shape.len()).rev() {
            prod *= &weights[i][rest % shape[i]];
            rest /= shape[i];
        }
        total += prod;
    }
    total
}

/// Standard weights from affine coordinates `(γ_1, …, γ_n)`.
pub fn weights_from_affine<T: Clone + One + std::ops::Sub<Output = T>>(coords: &[T]) -> Vec<T> {
    let mut w = Vec::with_capacity(coords.len() + 1);
    let first = coords.iter().cloned().fold(T::one(), |a, x| a - x);
    w.push(first);
    w.extend(coords.iter().cloned());
    w
}

/// Standard weights from homogeneous coordinates: `γ_0 = γ̃_0 − Σ γ̃_j`.
pub fn weights_from_tilde<T: Clone + std::ops::Sub<Output = T>>(tilde: &[T]) -> Vec<T> {
    let mut w = tilde.to_vec();
    w[0] = tilde[1..].iter().cloned().fold(tilde[0].clone(), |a, x| a - x);
    w
}

pub fn q(p: i64, d: i64) -> BigRational {
    BigRational::new(p.into(), d.into())
}

pub fn random_rational<R: Rng>(rng: &mut R) -> BigRational {
    q(rng.random_range(-50..=50), rng.random_range(1..=20))
}

pub fn exact_copy(game: &FiniteGame) -> FiniteGame {
    let tensors = game
        .payoffs()
        .iter()
        .map(|t| t.data().iter().map(|&x| BigRational::from_float(x).expect("finite")).collect())
        .collect();
    FiniteGame::new_exact(game.strategy_counts().to_vec(), tensors).expect("same shape")
}

pub enum Solve {
    Unique(Vec<BigRational>),
    None,
    Many,
}

/// Plain Gaussian elimination with full back substitution.
pub fn gauss(mut a: Vec<Vec<BigRational>>, mut b: Vec<BigRational>, n: usize) -> Solve {
    let rows = a.len();
    let mut where_ = vec![usize::MAX; n];
    let mut row = 0;
    for col in 0..n {
        let Some(p) = (row..rows).find(|&r| !a[r][col].is_zero()) else { continue };
        a.swap(row, p);
        b.swap(row, p);
        for r in 0..rows {
            if r != row && !a[r][col].is_zero() {
                let f = &a[r][col] / &a[row][col];
                for c in 0..n {
                    let v = &f * &a[row][c];
                    a[r][c] -= v;
                }
                let v = &f * &b[row];
                b[r] -= v;
            }
        }
        where_[col] = row;
        row += 1;
    }
    if (row..rows).any(|r| !b[r].is_zero()) {
        return Solve::None;
    }
    if where_.contains(&usize::MAX) {
        return Solve::Many;
    }
    Solve::Unique((0..n).map(|c| &b[where_[c]] / &a[where_[c]][c]).collect())
}

fn subsets(n: usize) -> Vec<Vec<usize>> {
    (1u32..(1 << n)).map(|m| (0..n).filter(|&j| m & (1 << j) != 0).collect()).collect()
}

/// Mixed strategy of the column player making every row in `rows` indifferent,
/// supported on `cols`, plus the common value. `a[j][k]` is the row player's
/// payoff.
fn indifference(a: &[Vec<BigRational>], rows: &[usize], cols: &[usize]) -> Solve {
    let n = cols.len() + 1;
    let mut m = Vec::new();
    let mut rhs = Vec::new();
    for &j in rows {
        let mut r: Vec<BigRational> = cols.iter().map(|&k| a[j][k].clone()).collect();
        r.push(-BigRational::one());
        m.push(r);
        rhs.push(BigRational::zero());
    }
    let mut r = vec![BigRational::one(); cols.len()];
    r.push(BigRational::zero());
    m.push(r);
    rhs.push(BigRational::one());
    gauss(m, rhs, n)
}

/// All equilibria of a bimatrix game `(a, b)` by support enumeration, or
/// `None` if some support system is degenerate.
pub fn bimatrix_oracle(
    a: &[Vec<BigRational>],
    b: &[Vec<BigRational>],
) -> Option<Vec<(Vec<BigRational>, Vec<BigRational>)>> {
    let (r, c) = (a.len(), a[0].len());
    let bt: Vec<Vec<BigRational>> = (0..c).map(|k| (0..r).map(|j| b[j][k].clone()).collect()).collect();
    let mut out = Vec::new();
    for s1 in subsets(r) {
        for s2 in subsets(c) {
            // An inconsistent side rules the pair out; otherwise both sides
            // must be pinned down uniquely.
            let (y, x) = match (indifference(a, &s1, &s2), indifference(&bt, &s2, &s1)) {
                (Solve::None, _) | (_, Solve::None) => continue,
                (Solve::Unique(y), Solve::Unique(x)) => (y, x),
                _ => return None,
            };
            let (yv, xv) = (&y[s2.len()], &x[s1.len()]);
            if y[..s2.len()].iter().chain(&x[..s1.len()]).any(|w| !w.is_positive()) {
                continue;
            }
            let mut full_y = vec![BigRational::zero(); c];
            for (&k, w) in s2.iter().zip(&y) {
                full_y[k] = w.clone();
            }
            let mut full_x = vec![BigRational::zero(); r];
            for (&j, w) in s1.iter().zip(&x) {
                full_x[j] = w.clone();
            }
            let row_ok = (0..r).all(|j| {
                let v: BigRational = (0..c).map(|k| &a[j][k] * &full_y[k]).sum();
                &v <= yv
            });
            let col_ok = (0..c).all(|k| {
                let v: BigRational = (0..r).map(|j| &b[j][k] * &full_x[j]).sum();
                &v <= xv
            });
            if row_ok && col_ok {
                out.push((full_x, full_y));
            }
        }
    }
    Some(out)
}

/// Payoff matrices of a two-player game as rationals.
pub fn bimatrix(game: &FiniteGame) -> (Vec<Vec<BigRational>>, Vec<Vec<BigRational>>) {
    let exact = game.rational_payoffs();
    let (r, c) = (game.strategy_counts()[0], game.strategy_counts()[1]);
    let mat = |i: usize| (0..r).map(|j| (0..c).map(|k| exact[i].data()[j * c + k].clone()).collect()).collect();
    (mat(0), mat(1))
}

/// Forest test via `|E| = |V| − #components`, components by depth-first search.
pub fn forest_oracle(vertices: usize, edges: &[(usize, usize)]) -> bool {
    let mut adj = vec![Vec::new(); vertices];
    for &(u, v) in edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    let mut seen = vec![false; vertices];
    let mut components = 0;
    for s in 0..vertices {
        if seen[s] {
            continue;
        }
        components += 1;
        let mut stack = vec![s];
        seen[s] = true;
        while let Some(u) = stack.pop() {
            for &w in &adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
    }
    edges.len() + components == vertices
}

pub fn matching_pennies_text() -> &'static str {
    "players 2\nstrategies 2 2\npayoff 1\n1 -1\n-1 1\npayoff 2\n-1 1\n1 -1\n"
}

pub fn battle_of_sexes_text() -> &'static str {
    "players 2\nstrategies 2 2\npayoff 1\n2 0\n0 1\npayoff 2\n1 0\n0 2\n"
}

/// Player 1's two rows coincide.
pub fn duplicate_row_text() -> &'static str {
    "players 2\nstrategies 2 2\npayoff 1\n3 -1\n3 -1\npayoff 2\n1 0\n0 2\n"
}

pub fn zero_game_text() -> &'static str {
    "players 2\nstrategies 2 2\npayoff 1\n0 0\n0 0\npayoff 2\n0 0\n0 0\n"
}
