//! Finite games in normal form, mixed profiles and supports.

use num::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

/// Default support threshold for float-mode profiles.
pub const DEFAULT_ZERO_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NumericMode {
    Exact,
    Float,
}

/// A finite game `(A, S, U)`: `m` players, `n_i + 1` pure strategies each, and
/// one utility tensor per player indexed by pure strategy combinations.
///
/// Exact games keep their rational utilities alongside an `f64` copy; float
/// games only have the latter.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteGame {
    counts: Vec<usize>,
    payoffs: Vec<Tensor<f64>>,
    exact: Option<Vec<Tensor<BigRational>>>,
    labels: Option<Vec<Vec<String>>>,
}

fn check_shape(counts: &[usize], tensors: usize, lens: impl Iterator<Item = usize>) -> Result<()> {
    if counts.is_empty() {
        return Err(Error::ShapeMismatch("a game needs at least one player".into()));
    }
    if let Some(i) = counts.iter().position(|&c| c < 2) {
        return Err(Error::ShapeMismatch(format!(
            "player {} has {} strategies; every player needs at least 2",
            i + 1,
            counts[i]
        )));
    }
    if tensors != counts.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} players but {} utility tensors",
            counts.len(),
            tensors
        )));
    }
    let cells: usize = counts.iter().product();
    for (i, len) in lens.enumerate() {
        if len != cells {
            return Err(Error::ShapeMismatch(format!(
                "utility tensor of player {} has {} entries, expected {}",
                i + 1,
                len,
                cells
            )));
        }
    }
    Ok(())
}

impl FiniteGame {
    /// Float-mode game from flattened row-major utility tensors.
    pub fn new(counts: Vec<usize>, utilities: Vec<Vec<f64>>) -> Result<Self> {
        check_shape(&counts, utilities.len(), utilities.iter().map(Vec::len))?;
        for (player, u) in utilities.iter().enumerate() {
            if let Some(index) = u.iter().position(|x| !x.is_finite()) {
                return Err(Error::NonFinite { player: player + 1, index });
            }
        }
        let payoffs = utilities
            .into_iter()
            .map(|u| Tensor::new(counts.clone(), u))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { counts, payoffs, exact: None, labels: None })
    }

    /// Exact-mode game from flattened row-major rational utility tensors.
    pub fn new_exact(counts: Vec<usize>, utilities: Vec<Vec<BigRational>>) -> Result<Self> {
        check_shape(&counts, utilities.len(), utilities.iter().map(Vec::len))?;
        let exact = utilities
            .into_iter()
            .map(|u| Tensor::new(counts.clone(), u))
            .collect::<Result<Vec<_>>>()?;
        let payoffs = exact.iter().map(|t| t.map(|x| x.as_f64())).collect();
        Ok(Self { counts, payoffs, exact: Some(exact), labels: None })
    }

    pub fn with_labels(mut self, labels: Vec<Vec<String>>) -> Result<Self> {
        if labels.len() != self.counts.len()
            || labels.iter().zip(&self.counts).any(|(l, &c)| l.len() != c)
        {
            return Err(Error::ShapeMismatch("one label per strategy and player required".into()));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn num_players(&self) -> usize {
        self.counts.len()
    }

    /// `n_i + 1` for each player.
    pub fn strategy_counts(&self) -> &[usize] {
        &self.counts
    }

    /// Chart dimension `n_i` of player `i`.
    pub fn dim(&self, player: usize) -> usize {
        self.counts[player] - 1
    }

    /// `Σ n_i`, the dimension of `A` and of every chart.
    pub fn total_dim(&self) -> usize {
        self.counts.iter().map(|c| c - 1).sum()
    }

    pub fn mode(&self) -> NumericMode {
        if self.exact.is_some() {
            NumericMode::Exact
        } else {
            NumericMode::Float
        }
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    pub fn payoff(&self, player: usize) -> &Tensor<f64> {
        &self.payoffs[player]
    }

    pub fn payoffs(&self) -> &[Tensor<f64>] {
        &self.payoffs
    }

    pub fn exact_payoffs(&self) -> Option<&[Tensor<BigRational>]> {
        self.exact.as_deref()
    }

    /// Exact utilities; float games are converted entry by entry without rounding.
    pub fn rational_payoffs(&self) -> Vec<Tensor<BigRational>> {
        match &self.exact {
            Some(e) => e.clone(),
            None => self
                .payoffs
                .iter()
                .map(|t| t.map(|x| BigRational::from_float(*x).expect("finite by construction")))
                .collect(),
        }
    }

    pub fn labels(&self) -> Option<&[Vec<String>]> {
        self.labels.as_deref()
    }

    /// Same game in float mode.
    pub fn to_float(&self) -> Self {
        Self { counts: self.counts.clone(), payoffs: self.payoffs.clone(), exact: None, labels: self.labels.clone() }
    }

    /// Same game with every utility tensor relabelled by `perm` on `player`'s
    /// axis: new strategy `j` is old strategy `perm[j]`.
    pub fn permute_strategies(&self, player: usize, perm: &[usize]) -> Result<Self> {
        let c = self.counts[player];
        let mut seen = vec![false; c];
        if perm.len() != c || perm.iter().any(|&p| p >= c || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::InvalidIndex(format!("{perm:?} is not a permutation of 0..{c}")));
        }
        let rows: Vec<Vec<f64>> = (0..c)
            .map(|r| (0..c).map(|s| if s == perm[r] { 1.0 } else { 0.0 }).collect())
            .collect();
        let payoffs = self
            .payoffs
            .iter()
            .map(|t| t.transform_axis(player, &rows))
            .collect::<Result<Vec<_>>>()?;
        let exact = match &self.exact {
            None => None,
            Some(ts) => {
                let rows: Vec<Vec<BigRational>> = rows
                    .iter()
                    .map(|r| r.iter().map(|x| BigRational::from_float(*x).unwrap()).collect())
                    .collect();
                Some(ts.iter().map(|t| t.transform_axis(player, &rows)).collect::<Result<Vec<_>>>()?)
            }
        };
        Ok(Self { counts: self.counts.clone(), payoffs, exact, labels: None })
    }
}

/// Probability weights `(γ^i_0, …, γ^i_{n_i})` per player. Elements of `A`
/// only need each row to sum to one; elements of `G` are also nonnegative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedProfile<T = f64> {
    pub weights: Vec<Vec<T>>,
}

impl<T: Scalar> MixedProfile<T> {
    pub fn new(weights: Vec<Vec<T>>) -> Self {
        Self { weights }
    }

    /// The pure profile `(s^1_{j_1}, …, s^m_{j_m})` as unit vectors.
    pub fn pure(counts: &[usize], strategies: &[usize]) -> Self {
        let weights = counts
            .iter()
            .zip(strategies)
            .map(|(&c, &j)| (0..c).map(|k| if k == j { T::one() } else { T::zero() }).collect())
            .collect();
        Self { weights }
    }

    /// Uniform weights on every player's full strategy set.
    pub fn centroid(counts: &[usize]) -> Self {
        let weights = counts
            .iter()
            .map(|&c| {
                let mut n = T::zero();
                for _ in 0..c {
                    n += T::one();
                }
                vec![T::one() / n; c]
            })
            .collect();
        Self { weights }
    }

    pub fn num_players(&self) -> usize {
        self.weights.len()
    }

    pub fn matches_shape(&self, counts: &[usize]) -> bool {
        self.weights.len() == counts.len() && self.weights.iter().zip(counts).all(|(w, &c)| w.len() == c)
    }

    /// Affine chart coordinates `(γ^i_1, …, γ^i_{n_i})` per player.
    pub fn affine_coords(&self) -> Vec<Vec<T>> {
        self.weights.iter().map(|w| w[1..].to_vec()).collect()
    }

    /// Inverse of [`affine_coords`](Self::affine_coords): `γ^i_0 = 1 − Σ_j γ^i_j`.
    pub fn from_affine(coords: &[Vec<T>]) -> Self {
        let weights = coords
            .iter()
            .map(|c| {
                let rest = c.iter().fold(T::zero(), |acc, x| acc + x.clone());
                let mut w = Vec::with_capacity(c.len() + 1);
                w.push(T::one() - rest);
                w.extend(c.iter().cloned());
                w
            })
            .collect();
        Self { weights }
    }

    pub fn to_f64(&self) -> MixedProfile<f64> {
        MixedProfile { weights: self.weights.iter().map(|w| w.iter().map(Scalar::as_f64).collect()).collect() }
    }
}

impl MixedProfile<f64> {
    /// Row sums equal one within `1e-12`.
    pub fn in_affine_space(&self) -> bool {
        self.weights.iter().all(|w| (w.iter().sum::<f64>() - 1.0).abs() <= 1e-12)
    }

    /// In `A` and every weight in `[0, 1]` up to `tol`.
    pub fn in_simplex_product(&self, tol: f64) -> bool {
        self.in_affine_space()
            && self.weights.iter().flatten().all(|&x| x >= -tol && x <= 1.0 + tol)
    }

    pub fn distance(&self, other: &Self) -> f64 {
        self.weights
            .iter()
            .flatten()
            .zip(other.weights.iter().flatten())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

/// `supp(g^i)` for each player, sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SupportProfile {
    pub supports: Vec<Vec<usize>>,
}

impl SupportProfile {
    pub fn new(counts: &[usize], supports: Vec<Vec<usize>>) -> Result<Self> {
        if supports.len() != counts.len() {
            return Err(Error::ShapeMismatch("one support per player required".into()));
        }
        let mut supports = supports;
        for (i, (s, &c)) in supports.iter_mut().zip(counts).enumerate() {
            s.sort_unstable();
            s.dedup();
            if s.is_empty() {
                return Err(Error::InvalidIndex(format!("support of player {} is empty", i + 1)));
            }
            if s.iter().any(|&j| j >= c) {
                return Err(Error::InvalidIndex(format!("support of player {} out of range", i + 1)));
            }
        }
        Ok(Self { supports })
    }

    pub fn full(counts: &[usize]) -> Self {
        Self { supports: counts.iter().map(|&c| (0..c).collect()).collect() }
    }

    pub fn contains(&self, player: usize, j: usize) -> bool {
        self.supports[player].binary_search(&j).is_ok()
    }

    /// `j* = min(supp_i)`, the hub of the star tree.
    pub fn hub(&self, player: usize) -> usize {
        self.supports[player][0]
    }

    pub fn is_pure(&self) -> bool {
        self.supports.iter().all(|s| s.len() == 1)
    }
}

impl std::fmt::Display for SupportProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self
            .supports
            .iter()
            .map(|s| format!("{{{}}}", s.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")))
            .collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Indices with `|γ^i_j| > zero_tol`. A player whose weights all fall below the
/// tolerance gets an empty support.
pub fn support_of<T: Scalar>(profile: &MixedProfile<T>, zero_tol: f64) -> SupportProfile {
    let supports = profile
        .weights
        .iter()
        .map(|w| {
            w.iter()
                .enumerate()
                .filter(|(_, x)| x.as_f64().abs() > zero_tol && !x.is_zero())
                .map(|(j, _)| j)
                .collect()
        })
        .collect();
    SupportProfile { supports }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PayoffDistribution {
    /// i.i.d. uniform on `[-1, 1]`.
    Uniform,
    /// i.i.d. standard normal.
    Normal,
}

impl std::str::FromStr for PayoffDistribution {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Self::Uniform),
            "normal" => Ok(Self::Normal),
            other => Err(Error::Usage(format!("unknown distribution `{other}` (uniform|normal)"))),
        }
    }
}

/// Float game with i.i.d. utilities. Tensors are filled player by player in
/// row-major order from a ChaCha8 stream seeded with `seed`.
pub fn random_game(counts: &[usize], seed: u64, distribution: PayoffDistribution) -> Result<FiniteGame> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cells: usize = counts.iter().product();
    let utilities = (0..counts.len())
        .map(|_| {
            (0..cells)
                .map(|_| match distribution {
                    PayoffDistribution::Uniform => rng.random_range(-1.0..=1.0),
                    PayoffDistribution::Normal => StandardNormal.sample(&mut rng),
                })
                .collect()
        })
        .collect();
    FiniteGame::new(counts.to_vec(), utilities)
}

/// Parse `2x3x2` into strategy counts.
pub fn parse_shape(spec: &str) -> Result<Vec<usize>> {
    let counts = spec
        .split(['x', 'X'])
        .map(|p| p.trim().parse::<usize>().map_err(|_| Error::Usage(format!("bad shape `{spec}`"))))
        .collect::<Result<Vec<_>>>()?;
    if counts.iter().any(|&c| c < 2) {
        return Err(Error::Usage(format!(
            "shape `{spec}`: every player needs at least 2 strategies"
        )));
    }
    Ok(counts)
}
