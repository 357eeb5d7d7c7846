//! Affine charts of the product of projective spaces `∏_i P(W^i)` in the
//! homogeneous coordinates `γ̃`, and chart-local defining maps of the
//! coordinate hyperplanes and payoff-difference hypersurfaces.
//!
//! Hypersurfaces are named by their public labels: `H^{i,j}` is the Zariski
//! closure of the face `γ^i_j = 0`, `H^{i,∞}` is the hyperplane at infinity of
//! player `i`. In `γ̃` coordinates `H^{i,j}` (`j ≥ 1`) is `γ̃^i_j = 0`,
//! `H^{i,∞}` is `γ̃^i_0 = 0` and `H^{i,0}` is `γ̃^i_0 − Σ_j γ̃^i_j = 0`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{FiniteGame, MixedProfile};
use crate::multilinear::{homogeneous_decomposition, tilde_from_standard, Basis, MultilinearForm};
use crate::tensor::Tensor;

/// Membership tolerance applied to defining values normalized by their
/// largest coefficient.
pub const DEFAULT_MEMBERSHIP_TOL: f64 = 1e-8;

/// Chart `A_l`: `γ̃^i_{l_i} = 1` for every player.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ChartId(pub Vec<usize>);

impl ChartId {
    pub fn standard(num_players: usize) -> Self {
        Self(vec![0; num_players])
    }

    pub fn validate(&self, counts: &[usize]) -> Result<()> {
        if self.0.len() != counts.len() || self.0.iter().zip(counts).any(|(&l, &c)| l >= c) {
            return Err(Error::InvalidIndex(format!("chart {self} does not fit shape {counts:?}")));
        }
        Ok(())
    }

    /// Every chart of the atlas, lexicographically.
    pub fn all(counts: &[usize]) -> Vec<Self> {
        let mut out = Vec::new();
        crate::tensor::for_each_index(counts, |idx| out.push(Self(idx.to_vec())));
        out
    }

    /// Hypersurfaces making up the complement of this chart: `H̃^{i,l_i}`, i.e.
    /// `H^{i,∞}` when `l_i = 0` and `H^{i,l_i}` otherwise.
    pub fn complement(&self) -> Vec<Hypersurface> {
        self.0
            .iter()
            .enumerate()
            .map(|(player, &l)| Hypersurface::Coordinate {
                player,
                label: if l == 0 { StrategyLabel::Infinity } else { StrategyLabel::Finite(l) },
            })
            .collect()
    }
}

impl fmt::Display for ChartId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        f.write_str(&parts.join(","))
    }
}

impl FromStr for ChartId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        s.split(',')
            .map(|p| p.trim().parse::<usize>().map_err(|_| Error::Usage(format!("bad chart `{s}`"))))
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }
}

/// Index of a coordinate hyperplane: a strategy `j ∈ J^i_0` or `∞`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum StrategyLabel {
    Finite(usize),
    Infinity,
}

impl fmt::Display for StrategyLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite(j) => write!(f, "{j}"),
            Self::Infinity => f.write_str("inf"),
        }
    }
}

impl FromStr for StrategyLabel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "∞" => Ok(Self::Infinity),
            t => t
                .parse::<usize>()
                .map(Self::Finite)
                .map_err(|_| Error::Usage(format!("bad strategy label `{s}`"))),
        }
    }
}

/// Players are 0-based internally and 1-based in the text form
/// (`C:i:j`, `C:i:inf`, `D:i:j:k`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Hypersurface {
    Coordinate { player: usize, label: StrategyLabel },
    /// Zero set of `Λ^i_j − Λ^i_k`, `j < k`.
    PayoffDiff { player: usize, j: usize, k: usize },
}

impl Hypersurface {
    pub fn player(&self) -> usize {
        match *self {
            Self::Coordinate { player, .. } | Self::PayoffDiff { player, .. } => player,
        }
    }

    pub fn validate(&self, counts: &[usize]) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidIndex(msg));
        let p = self.player();
        if p >= counts.len() {
            return bad(format!("{self}: no player {}", p + 1));
        }
        match *self {
            Self::Coordinate { label: StrategyLabel::Finite(j), .. } if j >= counts[p] => {
                bad(format!("{self}: strategy {j} out of range"))
            }
            Self::PayoffDiff { j, k, .. } if j >= k || k >= counts[p] => {
                bad(format!("{self}: need j < k < {}", counts[p]))
            }
            _ => Ok(()),
        }
    }

    /// Whether the hypersurface lies entirely in the complement of `chart`.
    pub fn excluded_by(&self, chart: &ChartId) -> bool {
        match *self {
            Self::Coordinate { player, label: StrategyLabel::Infinity } => chart.0[player] == 0,
            Self::Coordinate { player, label: StrategyLabel::Finite(j) } => j >= 1 && chart.0[player] == j,
            Self::PayoffDiff { .. } => false,
        }
    }
}

impl fmt::Display for Hypersurface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Coordinate { player, label } => write!(f, "C:{}:{}", player + 1, label),
            Self::PayoffDiff { player, j, k } => write!(f, "D:{}:{}:{}", player + 1, j, k),
        }
    }
}

impl FromStr for Hypersurface {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let err = || Error::Usage(format!("bad hypersurface `{s}` (C:i:j, C:i:inf or D:i:j:k)"));
        let parts: Vec<&str> = s.trim().split(':').collect();
        let player = parts.get(1).and_then(|p| p.parse::<usize>().ok()).filter(|&p| p >= 1).ok_or_else(err)? - 1;
        match (parts[0], parts.len()) {
            ("C", 3) => Ok(Self::Coordinate { player, label: parts[2].parse().map_err(|_| err())? }),
            ("D", 4) => {
                let j = parts[2].parse().map_err(|_| err())?;
                let k = parts[3].parse().map_err(|_| err())?;
                if j >= k {
                    return Err(err());
                }
                Ok(Self::PayoffDiff { player, j, k })
            }
            _ => Err(err()),
        }
    }
}

/// A point of chart `A_l` given by its `n_i` affine coordinates per player
/// (`γ̃^i_j / γ̃^i_{l_i}` for `j ≠ l_i`, in increasing `j`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartPoint {
    pub chart: ChartId,
    pub coords: Vec<Vec<f64>>,
}

impl ChartPoint {
    pub fn new(chart: ChartId, coords: Vec<Vec<f64>>, counts: &[usize]) -> Result<Self> {
        chart.validate(counts)?;
        for (c, &n) in coords.iter().zip(counts) {
            if c.len() != n - 1 {
                return Err(Error::DimensionMismatch { expected: n - 1, got: c.len() });
            }
        }
        if coords.len() != counts.len() {
            return Err(Error::DimensionMismatch { expected: counts.len(), got: coords.len() });
        }
        if coords.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidIndex("chart coordinates must be finite".into()));
        }
        Ok(Self { chart, coords })
    }

    /// The standard chart point of a profile in `A`.
    pub fn from_profile(profile: &MixedProfile<f64>) -> Self {
        Self { chart: ChartId::standard(profile.num_players()), coords: profile.affine_coords() }
    }

    /// Normalize homogeneous `γ̃` vectors into `chart`.
    pub fn from_tilde(tilde: &[Vec<f64>], chart: ChartId) -> Result<Self> {
        if chart.0.len() != tilde.len() {
            return Err(Error::DimensionMismatch { expected: tilde.len(), got: chart.0.len() });
        }
        let coords = tilde
            .iter()
            .zip(&chart.0)
            .enumerate()
            .map(|(player, (v, &l))| {
                let pivot = *v.get(l).ok_or(Error::InvalidIndex(format!("chart index {l}")))?;
                if pivot == 0.0 || !(1.0 / pivot).is_finite() {
                    return Err(Error::DivisionByZero { player: player + 1, index: l });
                }
                let out: Vec<f64> =
                    v.iter().enumerate().filter(|&(j, _)| j != l).map(|(_, x)| x / pivot).collect();
                if out.iter().any(|x| !x.is_finite()) {
                    return Err(Error::DivisionByZero { player: player + 1, index: l });
                }
                Ok(out)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { chart, coords })
    }

    /// Homogeneous lift `α^l`: per player the `γ̃` vector with a 1 at `l_i`.
    pub fn lift(&self) -> Vec<Vec<f64>> {
        self.coords
            .iter()
            .zip(&self.chart.0)
            .map(|(c, &l)| {
                let mut v = Vec::with_capacity(c.len() + 1);
                v.extend_from_slice(&c[..l]);
                v.push(1.0);
                v.extend_from_slice(&c[l..]);
                v
            })
            .collect()
    }

    /// Offsets of each player's coordinates in the flattened chart vector.
    pub fn offsets(&self) -> Vec<usize> {
        offsets(&self.coords.iter().map(Vec::len).collect::<Vec<_>>())
    }

    pub fn flat(&self) -> Vec<f64> {
        self.coords.iter().flatten().copied().collect()
    }

    pub fn with_flat(&self, flat: &[f64]) -> Self {
        let mut coords = self.coords.clone();
        let mut it = flat.iter();
        for c in &mut coords {
            for x in c.iter_mut() {
                *x = *it.next().expect("flat length");
            }
        }
        Self { chart: self.chart.clone(), coords }
    }

    /// Standard mixed weights of the lifted point, rescaled so that each
    /// player's weights sum to one. `None` at infinity.
    pub fn to_profile(&self) -> Option<MixedProfile<f64>> {
        let weights = self
            .lift()
            .iter()
            .map(|t| {
                let s = crate::multilinear::standard_from_tilde(t);
                let total = t[0];
                if total.abs() < 1e-300 {
                    None
                } else {
                    Some(s.iter().map(|x| x / total).collect())
                }
            })
            .collect::<Option<Vec<Vec<f64>>>>()?;
        Some(MixedProfile::new(weights))
    }
}

pub(crate) fn offsets(dims: &[usize]) -> Vec<usize> {
    let mut acc = 0;
    dims.iter()
        .map(|d| {
            let o = acc;
            acc += d;
            o
        })
        .collect()
}

/// Homogeneous `γ̃` vectors of a profile (standard weights need not sum to 1;
/// any nonzero vector per player names a projective point).
pub fn tilde_of_profile(profile: &MixedProfile<f64>) -> Vec<Vec<f64>> {
    profile.weights.iter().map(|w| tilde_from_standard(w)).collect()
}

pub fn lift(point: &ChartPoint) -> Vec<Vec<f64>> {
    point.lift()
}

/// Move `point` into chart `target`, rescaling each player's lift by
/// `1/γ̃^i_{t_i}`.
pub fn transition(point: &ChartPoint, target: &ChartId) -> Result<ChartPoint> {
    if target == &point.chart {
        return Ok(point.clone());
    }
    ChartPoint::from_tilde(&point.lift(), target.clone())
}

/// A chart containing the projective point of `tilde`: the standard chart if
/// possible, otherwise per player the index of the largest `|γ̃^i_j|`.
pub fn chart_for(tilde: &[Vec<f64>]) -> ChartId {
    if tilde.iter().all(|t| t[0] != 0.0) {
        return ChartId::standard(tilde.len());
    }
    ChartId(
        tilde
            .iter()
            .map(|t| {
                t.iter()
                    .enumerate()
                    .fold((0, -1.0), |best, (j, x)| if x.abs() > best.1 { (j, x.abs()) } else { best })
                    .0
            })
            .collect(),
    )
}

/// A defining function of one hypersurface on one chart: a tilde-basis form
/// evaluated at the chart lift `α^l`.
#[derive(Debug, Clone, PartialEq)]
pub struct DefiningMap {
    pub hypersurface: Hypersurface,
    pub chart: ChartId,
    pub form: MultilinearForm<f64>,
    /// Largest absolute coefficient, used to normalize membership tests.
    pub scale: f64,
    dims: Vec<usize>,
}

impl DefiningMap {
    pub fn value(&self, point: &ChartPoint) -> Result<f64> {
        self.check_chart(point)?;
        self.form.eval_at(&point.lift())
    }

    /// Value divided by the largest coefficient (0 for the zero form).
    pub fn normalized_value(&self, point: &ChartPoint) -> Result<f64> {
        let v = self.value(point)?;
        Ok(if self.scale > 0.0 { v / self.scale } else { v })
    }

    /// Gradient with respect to the flattened chart coordinates.
    pub fn gradient(&self, point: &ChartPoint) -> Result<Vec<f64>> {
        self.check_chart(point)?;
        let lifted = point.lift();
        let offs = offsets(&self.dims);
        let mut grad = vec![0.0; self.dims.iter().sum()];
        for (p, &off) in offs.iter().enumerate() {
            if let Some(g) = self.form.grad_player(&lifted, p)? {
                let l = self.chart.0[p];
                for (slot, (_, x)) in grad[off..off + self.dims[p]]
                    .iter_mut()
                    .zip(g.iter().enumerate().filter(|&(j, _)| j != l))
                {
                    *slot = *x;
                }
            }
        }
        Ok(grad)
    }

    pub fn is_zero(&self) -> bool {
        self.scale == 0.0
    }

    fn check_chart(&self, point: &ChartPoint) -> Result<()> {
        if point.chart != self.chart {
            return Err(Error::InvalidIndex(format!(
                "point in chart {} given to a defining map on chart {}",
                point.chart, self.chart
            )));
        }
        Ok(())
    }
}

fn single_block_form(player: usize, coeffs: Vec<f64>) -> MultilinearForm<f64> {
    let n = coeffs.len();
    MultilinearForm::new(None, vec![player], Basis::Tilde, Tensor::new(vec![n], coeffs).expect("vector"))
        .expect("valid form")
}

/// The defining map of `h` on `chart`, or `ChartExcludesHypersurface` when
/// `h` lies in the chart's complement.
pub fn defining_map(game: &FiniteGame, h: Hypersurface, chart: &ChartId) -> Result<DefiningMap> {
    let counts = game.strategy_counts();
    chart.validate(counts)?;
    h.validate(counts)?;
    if h.excluded_by(chart) {
        return Err(Error::ChartExcludesHypersurface { chart: chart.to_string(), hypersurface: h.to_string() });
    }
    let form = match h {
        Hypersurface::Coordinate { player, label } => {
            let c = counts[player];
            let coeffs = match label {
                StrategyLabel::Finite(0) => (0..c).map(|j| if j == 0 { 1.0 } else { -1.0 }).collect(),
                StrategyLabel::Finite(j) => (0..c).map(|k| if k == j { 1.0 } else { 0.0 }).collect(),
                StrategyLabel::Infinity => (0..c).map(|k| if k == 0 { 1.0 } else { 0.0 }).collect(),
            };
            single_block_form(player, coeffs)
        }
        Hypersurface::PayoffDiff { player, j, k } => {
            let dec = homogeneous_decomposition(game, player);
            dec.lambdas[j].sub(&dec.lambdas[k])?
        }
    };
    let scale = form.max_abs_coeff();
    Ok(DefiningMap { hypersurface: h, chart: chart.clone(), form, scale, dims: counts.iter().map(|c| c - 1).collect() })
}

/// `|normalized defining value| ≤ tol` in the point's own chart.
pub fn on_hypersurface(game: &FiniteGame, h: Hypersurface, point: &ChartPoint, tol: f64) -> Result<bool> {
    if h.excluded_by(&point.chart) {
        return Ok(false);
    }
    let map = defining_map(game, h, &point.chart)?;
    Ok(map.normalized_value(point)?.abs() <= tol)
}

/// All hypersurfaces of a game of the given shape, in a fixed order:
/// coordinate hyperplanes (finite labels, then `∞`) then payoff differences,
/// player by player.
pub fn all_hypersurfaces(counts: &[usize]) -> Vec<Hypersurface> {
    let mut out = Vec::new();
    for (player, &c) in counts.iter().enumerate() {
        out.extend((0..c).map(|j| Hypersurface::Coordinate { player, label: StrategyLabel::Finite(j) }));
        out.push(Hypersurface::Coordinate { player, label: StrategyLabel::Infinity });
        for j in 0..c {
            out.extend((j + 1..c).map(|k| Hypersurface::PayoffDiff { player, j, k }));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pennies() -> FiniteGame {
        FiniteGame::new(vec![2, 2], vec![vec![1.0, -1.0, -1.0, 1.0], vec![-1.0, 1.0, 1.0, -1.0]]).unwrap()
    }

    #[test]
    fn standard_chart_lift() {
        let p = ChartPoint::new(ChartId(vec![0, 0]), vec![vec![0.3], vec![0.8]], &[2, 2]).unwrap();
        assert_eq!(p.lift(), vec![vec![1.0, 0.3], vec![1.0, 0.8]]);
        let z = ChartPoint::new(ChartId(vec![2, 1]), vec![vec![0.0, 0.0], vec![0.0]], &[3, 2]).unwrap();
        assert_eq!(z.lift(), vec![vec![0.0, 0.0, 1.0], vec![0.0, 1.0]]);
        let back = ChartPoint::from_tilde(&z.lift(), z.chart.clone()).unwrap();
        assert_eq!(back, z);
    }

    #[test]
    fn transitions() {
        let p = ChartPoint::new(ChartId(vec![0, 0]), vec![vec![2.0], vec![3.0]], &[2, 2]).unwrap();
        assert_eq!(transition(&p, &p.chart).unwrap(), p);
        let q = transition(&p, &ChartId(vec![1, 1])).unwrap();
        assert_eq!(q.lift(), vec![vec![0.5, 1.0], vec![1.0 / 3.0, 1.0]]);
        let on = ChartPoint::new(ChartId(vec![0, 0]), vec![vec![0.0], vec![3.0]], &[2, 2]).unwrap();
        assert_eq!(
            transition(&on, &ChartId(vec![1, 0])).unwrap_err(),
            Error::DivisionByZero { player: 1, index: 1 }
        );
    }

    #[test]
    fn complement_labels() {
        assert_eq!(
            ChartId(vec![0, 2]).complement(),
            vec![
                Hypersurface::Coordinate { player: 0, label: StrategyLabel::Infinity },
                Hypersurface::Coordinate { player: 1, label: StrategyLabel::Finite(2) },
            ]
        );
    }

    #[test]
    fn payoff_difference_in_standard_chart() {
        let g = pennies();
        let h = Hypersurface::PayoffDiff { player: 0, j: 0, k: 1 };
        let map = defining_map(&g, h, &ChartId(vec![0, 0])).unwrap();
        // Λ^1_0 − Λ^1_1 = 2 − 4γ^2_1 on the standard chart
        for x in [0.0, 0.25, 0.9] {
            let p = ChartPoint::new(ChartId(vec![0, 0]), vec![vec![0.7], vec![x]], &[2, 2]).unwrap();
            assert!((map.value(&p).unwrap() - (2.0 - 4.0 * x)).abs() < 1e-15);
            assert_eq!(map.gradient(&p).unwrap(), vec![0.0, -4.0]);
        }
        let half = ChartPoint::new(ChartId(vec![0, 0]), vec![vec![0.1], vec![0.5]], &[2, 2]).unwrap();
        assert!(on_hypersurface(&g, h, &half, 1e-8).unwrap());
        let zero = ChartPoint::new(ChartId(vec![0, 0]), vec![vec![0.1], vec![0.0]], &[2, 2]).unwrap();
        assert!(!on_hypersurface(&g, h, &zero, 1e-8).unwrap());
    }

    #[test]
    fn coordinate_maps() {
        let g = FiniteGame::new(vec![3, 2], vec![vec![0.0; 6]; 2]).unwrap();
        let chart = ChartId(vec![0, 0]);
        let p = ChartPoint::new(chart.clone(), vec![vec![0.2, 0.5], vec![0.4]], &[3, 2]).unwrap();
        let c11 = defining_map(&g, "C:1:1".parse().unwrap(), &chart).unwrap();
        assert_eq!(c11.value(&p).unwrap(), 0.2);
        assert_eq!(c11.gradient(&p).unwrap(), vec![1.0, 0.0, 0.0]);
        let c10 = defining_map(&g, "C:1:0".parse().unwrap(), &chart).unwrap();
        assert!((c10.value(&p).unwrap() - 0.3).abs() < 1e-15);
        assert_eq!(c10.gradient(&p).unwrap(), vec![-1.0, -1.0, 0.0]);
        assert!(matches!(
            defining_map(&g, "C:1:inf".parse().unwrap(), &chart),
            Err(Error::ChartExcludesHypersurface { .. })
        ));
        // H^{1,∞} is visible from a chart with l_1 ≠ 0, where it reads γ̃^1_0.
        let c1inf = defining_map(&g, "C:1:inf".parse().unwrap(), &ChartId(vec![2, 0])).unwrap();
        let q = ChartPoint::new(ChartId(vec![2, 0]), vec![vec![0.7, -0.1], vec![0.4]], &[3, 2]).unwrap();
        assert_eq!(c1inf.value(&q).unwrap(), 0.7);
        assert!(matches!(
            defining_map(&g, "C:1:2".parse().unwrap(), &ChartId(vec![2, 0])),
            Err(Error::ChartExcludesHypersurface { .. })
        ));
    }

    #[test]
    fn labels_parse_and_print() {
        for s in ["C:1:0", "C:2:inf", "D:3:0:2"] {
            assert_eq!(s.parse::<Hypersurface>().unwrap().to_string(), s);
        }
        assert!("D:1:1:0".parse::<Hypersurface>().is_err());
        assert!("C:0:1".parse::<Hypersurface>().is_err());
        assert!("X:1:1".parse::<Hypersurface>().is_err());
        assert_eq!("1,0,2".parse::<ChartId>().unwrap(), ChartId(vec![1, 0, 2]));
    }

    #[test]
    fn atlas_size_and_choice() {
        assert_eq!(ChartId::all(&[2, 3, 2]).len(), 12);
        let tilde = vec![vec![0.0, 0.2, -3.0], vec![1.0, 5.0]];
        assert_eq!(chart_for(&tilde), ChartId(vec![2, 1]));
        assert_eq!(chart_for(&[vec![1.0, 0.0]]), ChartId(vec![0]));
    }

    #[test]
    fn profile_round_trip() {
        let prof = MixedProfile::new(vec![vec![0.25, 0.75], vec![0.5, 0.1, 0.4]]);
        let p = ChartPoint::from_profile(&prof);
        let q = transition(&p, &ChartId(vec![1, 2])).unwrap();
        assert!(q.to_profile().unwrap().distance(&prof) < 1e-15);
    }
}
