//! Multilinear forms over per-player variable blocks, the change to the
//! `γ̃` coordinates, and the two payoff decompositions
//!
//! ```text
//! V^i_A(γ) = κ^i(γ^{-i}) + Σ_{j≥1} γ^i_j λ^i_j(γ^{-i})        (affine chart A)
//! V^i_W(γ̃) = γ̃^i_0 K^i(γ̃^{-i}) + Σ_{j≥1} γ̃^i_j Λ^i_j(γ̃^{-i})  (homogeneous, on W)
//! ```
//!
//! with `λ^i_0 = Λ^i_0 = 0`.

use std::borrow::Cow;

use crate::error::{Error, Result};
use crate::game::FiniteGame;
use crate::scalar::Scalar;
use crate::tensor::{for_each_index, Tensor};

/// How the coefficient tensor of a [`MultilinearForm`] is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    /// Homogeneous in the mixed-strategy weights `(γ^k_0, …, γ^k_{n_k})`.
    Standard,
    /// Homogeneous in `γ̃^k_0 = Σ_j γ^k_j`, `γ̃^k_j = γ^k_j` (`j ≥ 1`).
    Tilde,
    /// Multi affine linear in the chart coordinates `(γ^k_1, …, γ^k_{n_k})`;
    /// slot 0 of every axis is the constant term. Same tensor as the tilde form
    /// restricted to `γ̃^k_0 = 1`.
    Affine,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultilinearForm<T> {
    /// Player whose payoff this form belongs to, if any.
    pub owner: Option<usize>,
    /// Participating players, strictly ascending; axis `a` of `coeffs` belongs
    /// to `blocks[a]`.
    pub blocks: Vec<usize>,
    pub basis: Basis,
    pub coeffs: Tensor<T>,
}

impl<T: Scalar> MultilinearForm<T> {
    pub fn new(owner: Option<usize>, blocks: Vec<usize>, basis: Basis, coeffs: Tensor<T>) -> Result<Self> {
        if blocks.len() != coeffs.rank() {
            return Err(Error::ShapeMismatch(format!(
                "{} blocks for a rank-{} coefficient tensor",
                blocks.len(),
                coeffs.rank()
            )));
        }
        if blocks.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::ShapeMismatch("blocks must be strictly ascending".into()));
        }
        if coeffs.shape().iter().any(|&d| d < 2) {
            return Err(Error::ShapeMismatch("every block needs dimension at least 2".into()));
        }
        Ok(Self { owner, blocks, basis, coeffs })
    }

    /// The form with no blocks and constant value `c`.
    pub fn constant(c: T, basis: Basis) -> Self {
        Self { owner: None, blocks: Vec::new(), basis, coeffs: Tensor::scalar(c) }
    }

    pub fn zero_like(&self) -> Self {
        Self { coeffs: Tensor::zeros(self.coeffs.shape().to_vec()), ..self.clone() }
    }

    /// Homogeneous dimension `n_k + 1` of each block.
    pub fn dims(&self) -> &[usize] {
        self.coeffs.shape()
    }

    /// Length of the input vector expected for axis `a`.
    fn input_len(&self, axis: usize) -> usize {
        match self.basis {
            Basis::Affine => self.dims()[axis] - 1,
            _ => self.dims()[axis],
        }
    }

    fn homogenize<'a>(&self, axis: usize, v: &'a [T]) -> Result<Cow<'a, [T]>> {
        let want = self.input_len(axis);
        if v.len() != want {
            return Err(Error::DimensionMismatch { expected: want, got: v.len() });
        }
        Ok(match self.basis {
            Basis::Affine => Cow::Owned(std::iter::once(T::one()).chain(v.iter().cloned()).collect()),
            _ => Cow::Borrowed(v),
        })
    }

    /// Evaluate at one input vector per participating block (in `blocks` order).
    pub fn eval(&self, point: &[Vec<T>]) -> Result<T> {
        let refs: Vec<&[T]> = point.iter().map(Vec::as_slice).collect();
        self.eval_refs(&refs)
    }

    fn eval_refs(&self, point: &[&[T]]) -> Result<T> {
        if point.len() != self.blocks.len() {
            return Err(Error::DimensionMismatch { expected: self.blocks.len(), got: point.len() });
        }
        let mut t: Option<Tensor<T>> = None;
        for axis in (0..self.blocks.len()).rev() {
            let v = self.homogenize(axis, point[axis])?;
            t = Some(t.as_ref().unwrap_or(&self.coeffs).contract_axis(axis, &v)?);
        }
        Ok(t.as_ref().unwrap_or(&self.coeffs).data()[0].clone())
    }

    /// Evaluate with a full per-player vector list; only the form's blocks are read.
    pub fn eval_at(&self, profile: &[Vec<T>]) -> Result<T> {
        let refs = self
            .blocks
            .iter()
            .map(|&b| profile.get(b).map(Vec::as_slice).ok_or(Error::DimensionMismatch { expected: b + 1, got: profile.len() }))
            .collect::<Result<Vec<_>>>()?;
        self.eval_refs(&refs)
    }

    fn select(&self, profile: &[Vec<T>]) -> Result<Vec<Vec<T>>> {
        self.blocks
            .iter()
            .map(|&b| {
                profile
                    .get(b)
                    .cloned()
                    .ok_or(Error::DimensionMismatch { expected: b + 1, got: profile.len() })
            })
            .collect()
    }

    /// Gradient with respect to the input vector of axis `axis`: the contraction
    /// of the coefficients with every other block. For [`Basis::Affine`] the
    /// constant slot is dropped, so the result has length `n_k`.
    pub fn grad(&self, point: &[Vec<T>], axis: usize) -> Result<Vec<T>> {
        if point.len() != self.blocks.len() {
            return Err(Error::DimensionMismatch { expected: self.blocks.len(), got: point.len() });
        }
        if axis >= self.blocks.len() {
            return Err(Error::InvalidIndex(format!("axis {axis} of a {}-block form", self.blocks.len())));
        }
        let mut t = self.coeffs.clone();
        for a in (0..self.blocks.len()).rev() {
            if a == axis {
                continue;
            }
            let v = self.homogenize(a, &point[a])?;
            t = t.contract_axis(a, &v)?;
        }
        self.homogenize(axis, &point[axis])?;
        let full = t.into_data();
        Ok(match self.basis {
            Basis::Affine => full[1..].to_vec(),
            _ => full,
        })
    }

    /// Gradient with respect to the block of `player`, or `None` when the form
    /// does not depend on that player.
    pub fn grad_player(&self, profile: &[Vec<T>], player: usize) -> Result<Option<Vec<T>>> {
        match self.blocks.iter().position(|&b| b == player) {
            None => Ok(None),
            Some(axis) => self.grad(&self.select(profile)?, axis).map(Some),
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.blocks != other.blocks || self.basis != other.basis {
            return Err(Error::ShapeMismatch("forms over different blocks or bases".into()));
        }
        Ok(Self { coeffs: self.coeffs.zip_with(&other.coeffs, |a, b| a.clone() - b.clone())?, ..self.clone() })
    }

    pub fn scale(&self, c: &T) -> Self {
        Self { coeffs: self.coeffs.map(|x| x.clone() * c.clone()), ..self.clone() }
    }

    /// Restrict to the block-`axis` index `idx`, producing a form in the
    /// remaining blocks.
    pub fn slice_block(&self, axis: usize, idx: usize) -> Self {
        let mut blocks = self.blocks.clone();
        blocks.remove(axis);
        Self { owner: self.owner, blocks, basis: self.basis, coeffs: self.coeffs.slice_axis(axis, idx) }
    }

    /// Same polynomial in `γ̃` coordinates. With `γ^k = M_k γ̃^k`, where row 0
    /// of `M_k` is `(1, −1, …, −1)` and row `j ≥ 1` is `e_j`, each axis picks up
    /// `M_kᵀ`.
    pub fn to_tilde(&self) -> Self {
        assert_eq!(self.basis, Basis::Standard, "to_tilde expects a standard-basis form");
        let mut coeffs = self.coeffs.clone();
        for axis in 0..self.blocks.len() {
            let d = self.dims()[axis];
            let mt: Vec<Vec<T>> = (0..d)
                .map(|r| {
                    (0..d)
                        .map(|c| basis_change(c, r))
                        .collect()
                })
                .collect();
            coeffs = coeffs.transform_axis(axis, &mt).expect("square transform");
        }
        Self { basis: Basis::Tilde, coeffs, ..self.clone() }
    }

    /// Inverse of [`to_tilde`](Self::to_tilde): `γ̃^k = M_k⁻¹ γ^k` with row 0 of
    /// `M_k⁻¹` all ones.
    pub fn from_tilde(&self) -> Self {
        assert_eq!(self.basis, Basis::Tilde, "from_tilde expects a tilde-basis form");
        let mut coeffs = self.coeffs.clone();
        for axis in 0..self.blocks.len() {
            let d = self.dims()[axis];
            let inv_t: Vec<Vec<T>> = (0..d)
                .map(|r| {
                    (0..d)
                        .map(|c| {
                            // (M⁻¹)ᵀ[r][c] = M⁻¹[c][r]
                            if c == 0 || c == r {
                                T::one()
                            } else {
                                T::zero()
                            }
                        })
                        .collect()
                })
                .collect();
            coeffs = coeffs.transform_axis(axis, &inv_t).expect("square transform");
        }
        Self { basis: Basis::Standard, coeffs, ..self.clone() }
    }

    /// Substitute `γ^k_0 = 1 − Σ_{j≥1} γ^k_j` in every block. Along each axis
    /// the constant slot keeps the old index-0 coefficient and slot `j` becomes
    /// `c_j − c_0`.
    pub fn affine_substitution(&self) -> Self {
        assert_eq!(self.basis, Basis::Standard, "affine substitution expects a standard-basis form");
        let shape = self.dims().to_vec();
        let mut data = self.coeffs.data().to_vec();
        let strides = self.coeffs.strides();
        for (axis, &d) in shape.iter().enumerate() {
            let mut reduced = shape.clone();
            reduced[axis] = 1;
            for_each_index(&reduced, |idx| {
                let base: usize = idx.iter().zip(&strides).map(|(i, s)| i * s).sum();
                let c0 = data[base].clone();
                for j in 1..d {
                    let at = base + j * strides[axis];
                    data[at] = data[at].clone() - c0.clone();
                }
            });
        }
        Self {
            basis: Basis::Affine,
            coeffs: Tensor::new(shape, data).expect("shape preserved"),
            ..self.clone()
        }
    }

    /// Read a tilde form as the multi affine linear form it induces on the
    /// standard chart (`γ̃^k_0 = 1`).
    pub fn restrict_to_standard_chart(&self) -> Self {
        assert_eq!(self.basis, Basis::Tilde);
        Self { basis: Basis::Affine, ..self.clone() }
    }
}

/// Entry `M[r][c]` of `γ = M γ̃`.
fn basis_change<T: Scalar>(r: usize, c: usize) -> T {
    if r == c {
        T::one()
    } else if r == 0 {
        -T::one()
    } else {
        T::zero()
    }
}

impl MultilinearForm<f64> {
    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.max_abs()
    }
}

/// `V^i_W` in standard coordinates: the coefficient tensor is `U^i` itself.
pub fn payoff_form(game: &FiniteGame, player: usize) -> MultilinearForm<f64> {
    MultilinearForm {
        owner: Some(player),
        blocks: (0..game.num_players()).collect(),
        basis: Basis::Standard,
        coeffs: game.payoff(player).clone(),
    }
}

/// Exact counterpart of [`payoff_form`] over rationals (float games are
/// converted without rounding).
pub fn payoff_form_exact(game: &FiniteGame, player: usize) -> MultilinearForm<num::BigRational> {
    MultilinearForm {
        owner: Some(player),
        blocks: (0..game.num_players()).collect(),
        basis: Basis::Standard,
        coeffs: game.rational_payoffs().swap_remove(player),
    }
}

pub fn to_tilde_coordinates<T: Scalar>(form: &MultilinearForm<T>) -> MultilinearForm<T> {
    form.to_tilde()
}

/// `κ^i` and `λ^i_0 = 0, λ^i_1, …, λ^i_{n_i}` as multi affine linear forms in
/// the chart coordinates of the other players.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaDecomposition<T> {
    pub player: usize,
    pub kappa: MultilinearForm<T>,
    pub lambdas: Vec<MultilinearForm<T>>,
}

impl<T: Scalar> LambdaDecomposition<T> {
    /// `(λ^i_0, …, λ^i_{n_i})` at affine coordinates of all players (player
    /// `i`'s own entry is ignored).
    pub fn lambda_values(&self, affine: &[Vec<T>]) -> Result<Vec<T>> {
        self.lambdas.iter().map(|l| l.eval_at(affine)).collect()
    }

    /// `κ^i + Σ_j γ^i_j λ^i_j`.
    pub fn reconstruct(&self, affine: &[Vec<T>]) -> Result<T> {
        let own = &affine[self.player];
        let mut v = self.kappa.eval_at(affine)?;
        for (j, l) in self.lambdas.iter().enumerate().skip(1) {
            v += own[j - 1].clone() * l.eval_at(affine)?;
        }
        Ok(v)
    }
}

/// `K^i` and `Λ^i_0 = 0, Λ^i_1, …, Λ^i_{n_i}` as homogeneous forms in `γ̃^{-i}`.
#[derive(Debug, Clone, PartialEq)]
pub struct HomogeneousDecomposition<T> {
    pub player: usize,
    pub k: MultilinearForm<T>,
    pub lambdas: Vec<MultilinearForm<T>>,
}

impl<T: Scalar> HomogeneousDecomposition<T> {
    /// `γ̃^i_0 K^i + Σ_j γ̃^i_j Λ^i_j` at per-player `γ̃` vectors.
    pub fn reconstruct(&self, tilde: &[Vec<T>]) -> Result<T> {
        let own = &tilde[self.player];
        let mut v = own[0].clone() * self.k.eval_at(tilde)?;
        for (j, l) in self.lambdas.iter().enumerate().skip(1) {
            v += own[j].clone() * l.eval_at(tilde)?;
        }
        Ok(v)
    }
}

fn split_player<T: Scalar>(form: &MultilinearForm<T>, player: usize) -> (MultilinearForm<T>, Vec<MultilinearForm<T>>) {
    let axis = form.blocks.iter().position(|&b| b == player).expect("player block present");
    let head = form.slice_block(axis, 0);
    let mut lambdas = Vec::with_capacity(form.dims()[axis]);
    lambdas.push(head.zero_like());
    lambdas.extend((1..form.dims()[axis]).map(|j| form.slice_block(axis, j)));
    (head, lambdas)
}

pub fn lambda_decomposition_of<T: Scalar>(payoff: &MultilinearForm<T>, player: usize) -> LambdaDecomposition<T> {
    let (kappa, lambdas) = split_player(&payoff.affine_substitution(), player);
    LambdaDecomposition { player, kappa, lambdas }
}

pub fn homogeneous_decomposition_of<T: Scalar>(
    payoff: &MultilinearForm<T>,
    player: usize,
) -> HomogeneousDecomposition<T> {
    let (k, lambdas) = split_player(&payoff.to_tilde(), player);
    HomogeneousDecomposition { player, k, lambdas }
}

pub fn lambda_decomposition(game: &FiniteGame, player: usize) -> LambdaDecomposition<f64> {
    lambda_decomposition_of(&payoff_form(game, player), player)
}

pub fn lambda_decomposition_exact(game: &FiniteGame, player: usize) -> LambdaDecomposition<num::BigRational> {
    lambda_decomposition_of(&payoff_form_exact(game, player), player)
}

pub fn homogeneous_decomposition(game: &FiniteGame, player: usize) -> HomogeneousDecomposition<f64> {
    homogeneous_decomposition_of(&payoff_form(game, player), player)
}

pub fn homogeneous_decomposition_exact(
    game: &FiniteGame,
    player: usize,
) -> HomogeneousDecomposition<num::BigRational> {
    homogeneous_decomposition_of(&payoff_form_exact(game, player), player)
}

/// `γ̃(γ)`: `γ̃_0 = Σ_j γ_j`, other entries unchanged.
pub fn tilde_from_standard<T: Scalar>(weights: &[T]) -> Vec<T> {
    let mut out = weights.to_vec();
    out[0] = weights.iter().fold(T::zero(), |a, x| a + x.clone());
    out
}

/// `γ(γ̃)`: `γ_0 = γ̃_0 − Σ_{j≥1} γ̃_j`.
pub fn standard_from_tilde<T: Scalar>(tilde: &[T]) -> Vec<T> {
    let mut out = tilde.to_vec();
    out[0] = tilde[1..].iter().fold(tilde[0].clone(), |a, x| a - x.clone());
    out
}

/// Monomials of a multi affine linear form in canonical order: by degree, then
/// lexicographically by (player, strategy) pairs. Each entry is the list of
/// `(player, j)` factors (empty for the constant) with its coefficient.
pub fn affine_monomials<T: Scalar>(form: &MultilinearForm<T>) -> Vec<(Vec<(usize, usize)>, T)> {
    assert_eq!(form.basis, Basis::Affine);
    let mut out = Vec::with_capacity(form.coeffs.len());
    for_each_index(form.dims(), |idx| {
        let factors: Vec<(usize, usize)> = idx
            .iter()
            .zip(&form.blocks)
            .filter(|(&j, _)| j > 0)
            .map(|(&j, &b)| (b, j))
            .collect();
        out.push((factors, form.coeffs.get(idx).clone()));
    });
    out.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then_with(|| a.0.cmp(&b.0)));
    out
}
