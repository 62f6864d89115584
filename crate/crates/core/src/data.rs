//! Points, datasets, linear models and the feasible set they live in.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Binary class label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    /// `+1` for positives, `-1` for negatives.
    pub fn sign<T: Scalar>(self) -> T {
        match self {
            Label::Positive => T::one(),
            Label::Negative => -T::one(),
        }
    }

    pub fn is_positive(self) -> bool {
        self == Label::Positive
    }

    /// Strictly positive values map to [`Label::Positive`], everything else to
    /// [`Label::Negative`].
    pub fn from_value(v: f64) -> Self {
        if v > 0.0 {
            Label::Positive
        } else {
            Label::Negative
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Label::Positive => Label::Negative,
            Label::Negative => Label::Positive,
        }
    }
}

/// A sparse feature vector with a binary label.
///
/// Feature indices are 1-based, strictly increasing and unique.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledPoint<T> {
    features: Vec<(usize, T)>,
    label: Label,
}

impl<T: Scalar> LabeledPoint<T> {
    /// Builds a point from `(index, value)` pairs given in any order.
    pub fn new(mut features: Vec<(usize, T)>, label: Label) -> Result<Self> {
        features.sort_by_key(|&(i, _)| i);
        for pair in features.windows(2) {
            if pair[0].0 == pair[1].0 {
                return Err(Error::invalid(format!("duplicate feature index {}", pair[0].0)));
            }
        }
        if features.first().is_some_and(|&(i, _)| i == 0) {
            return Err(Error::invalid("feature indices are 1-based"));
        }
        Ok(LabeledPoint { features, label })
    }

    /// Dense convenience constructor; coordinate `j` becomes feature `j + 1`.
    /// Zero entries are dropped.
    pub fn dense(values: &[T], label: Label) -> Self {
        let features = values
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.is_zero())
            .map(|(j, &v)| (j + 1, v))
            .collect();
        LabeledPoint { features, label }
    }

    pub fn features(&self) -> &[(usize, T)] {
        &self.features
    }

    pub fn label(&self) -> Label {
        self.label
    }

    pub fn is_positive(&self) -> bool {
        self.label.is_positive()
    }

    /// Largest feature index present, 0 for an empty vector.
    pub fn max_index(&self) -> usize {
        self.features.last().map_or(0, |&(i, _)| i)
    }

    pub fn norm(&self) -> T {
        self.features.iter().map(|&(_, v)| v * v).sum::<T>().sqrt()
    }

    pub fn with_label(&self, label: Label) -> Self {
        LabeledPoint {
            features: self.features.clone(),
            label,
        }
    }

    fn divide_features(&mut self, c: T) {
        for (_, v) in &mut self.features {
            *v /= c;
        }
    }
}

/// An ordered collection of labeled points.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset<T> {
    points: Vec<LabeledPoint<T>>,
    dimension: usize,
    n_pos: usize,
    n_neg: usize,
}

impl<T: Scalar> Dataset<T> {
    /// Dimension is inferred as the largest feature index present.
    pub fn new(points: Vec<LabeledPoint<T>>) -> Self {
        let dimension = points.iter().map(LabeledPoint::max_index).max().unwrap_or(0);
        Self::assemble(points, dimension)
    }

    pub fn with_dimension(points: Vec<LabeledPoint<T>>, dimension: usize) -> Result<Self> {
        if let Some(p) = points.iter().find(|p| p.max_index() > dimension) {
            return Err(Error::DimensionMismatch {
                index: p.max_index(),
                dimension,
            });
        }
        Ok(Self::assemble(points, dimension))
    }

    fn assemble(points: Vec<LabeledPoint<T>>, dimension: usize) -> Self {
        let n_pos = points.iter().filter(|p| p.is_positive()).count();
        let n_neg = points.len() - n_pos;
        Dataset {
            points,
            dimension,
            n_pos,
            n_neg,
        }
    }

    /// Divides every feature vector by the largest norm in the dataset so
    /// that all points lie in the unit ball. Relative geometry is unchanged.
    pub fn normalized(mut self) -> Self {
        let max = self.max_norm();
        if max > T::zero() {
            for p in &mut self.points {
                p.divide_features(max);
            }
        }
        self
    }

    pub fn max_norm(&self) -> T {
        self.points
            .iter()
            .map(LabeledPoint::norm)
            .fold(T::zero(), T::max)
    }

    pub fn points(&self) -> &[LabeledPoint<T>] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &LabeledPoint<T> {
        &self.points[i]
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn n_pos(&self) -> usize {
        self.n_pos
    }

    pub fn n_neg(&self) -> usize {
        self.n_neg
    }

    pub fn refs(&self) -> Vec<&LabeledPoint<T>> {
        self.points.iter().collect()
    }

    /// References to the points at `indices`, in the given order.
    pub fn select(&self, indices: &[usize]) -> Vec<&LabeledPoint<T>> {
        indices.iter().map(|&i| &self.points[i]).collect()
    }

    /// New dataset over the points at `indices`, keeping this dimension.
    pub fn subset(&self, indices: &[usize]) -> Self {
        let points = indices.iter().map(|&i| self.points[i].clone()).collect();
        Self::assemble(points, self.dimension)
    }

    /// Same points with every label flipped.
    pub fn label_flipped(&self) -> Self {
        let points = self
            .points
            .iter()
            .map(|p| p.with_label(p.label().flipped()))
            .collect();
        Self::assemble(points, self.dimension)
    }
}

/// Dense linear model.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightVector<T>(Vec<T>);

impl<T: Scalar> WeightVector<T> {
    pub fn zeros(dimension: usize) -> Self {
        WeightVector(vec![T::zero(); dimension])
    }

    pub fn from_vec(coords: Vec<T>) -> Self {
        WeightVector(coords)
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<T> {
        self.0
    }

    pub fn dimension(&self) -> usize {
        self.0.len()
    }

    pub fn norm(&self) -> T {
        self.0.iter().map(|&v| v * v).sum::<T>().sqrt()
    }

    pub fn dot(&self, other: &Self) -> T {
        self.0.iter().zip(&other.0).map(|(&a, &b)| a * b).sum()
    }

    pub fn distance(&self, other: &Self) -> T {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(&a, &b)| (a - b) * (a - b))
            .sum::<T>()
            .sqrt()
    }

    /// Sparse-dense inner product `w^T x`.
    pub fn score(&self, x: &LabeledPoint<T>) -> Result<T> {
        if x.max_index() > self.0.len() {
            return Err(Error::DimensionMismatch {
                index: x.max_index(),
                dimension: self.0.len(),
            });
        }
        Ok(self.score_unchecked(x))
    }

    pub(crate) fn score_unchecked(&self, x: &LabeledPoint<T>) -> T {
        x.features
            .iter()
            .fold(T::zero(), |acc, &(i, v)| acc + self.0[i - 1] * v)
    }

    /// `self += alpha * x` for a sparse point.
    pub fn add_point(&mut self, alpha: T, x: &LabeledPoint<T>) {
        for &(i, v) in &x.features {
            self.0[i - 1] += alpha * v;
        }
    }

    /// `self += alpha * other`.
    pub fn add_scaled(&mut self, alpha: T, other: &Self) {
        for (a, &b) in self.0.iter_mut().zip(&other.0) {
            *a += alpha * b;
        }
    }

    pub fn scale(&mut self, c: T) {
        for a in &mut self.0 {
            *a *= c;
        }
    }

    pub fn scaled(&self, c: T) -> Self {
        let mut out = self.clone();
        out.scale(c);
        out
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|v| v.is_zero())
    }
}

/// Free-function form of [`WeightVector::score`].
pub fn score<T: Scalar>(w: &WeightVector<T>, x: &LabeledPoint<T>) -> Result<T> {
    w.score(x)
}

/// Checks that every point fits inside a model of dimension `dimension`.
pub(crate) fn check_dimension<T: Scalar>(points: &[&LabeledPoint<T>], dimension: usize) -> Result<()> {
    match points.iter().find(|p| p.max_index() > dimension) {
        Some(p) => Err(Error::DimensionMismatch {
            index: p.max_index(),
            dimension,
        }),
        None => Ok(()),
    }
}

pub const DEFAULT_RADIUS: f64 = 100.0;

/// Euclidean ball `{w : ||w|| <= radius}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FeasibleSet<T> {
    radius: T,
}

impl<T: Scalar> FeasibleSet<T> {
    pub fn new(radius: T) -> Result<Self> {
        if !(radius > T::zero()) || !radius.is_finite() {
            return Err(Error::invalid(format!("radius must be positive, got {radius}")));
        }
        Ok(FeasibleSet { radius })
    }

    pub fn radius(&self) -> T {
        self.radius
    }

    pub fn project(&self, w: &WeightVector<T>) -> WeightVector<T> {
        let mut out = w.clone();
        self.project_in_place(&mut out);
        out
    }

    pub fn project_in_place(&self, w: &mut WeightVector<T>) {
        let norm = w.norm();
        if norm > self.radius {
            w.scale(self.radius / norm);
        }
    }

    pub fn contains(&self, w: &WeightVector<T>) -> bool {
        w.norm() <= self.radius
    }
}

impl<T: Scalar> Default for FeasibleSet<T> {
    fn default() -> Self {
        FeasibleSet {
            radius: T::of(DEFAULT_RADIUS),
        }
    }
}

pub fn project<T: Scalar>(w: &WeightVector<T>, set: &FeasibleSet<T>) -> WeightVector<T> {
    set.project(w)
}

/// A seeded visiting order over dataset positions (0-based).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StreamOrder {
    permutation: Vec<usize>,
    seed: u64,
}

impl StreamOrder {
    pub fn identity(n: usize) -> Self {
        StreamOrder {
            permutation: (0..n).collect(),
            seed: 0,
        }
    }

    pub fn from_permutation(permutation: Vec<usize>, seed: u64) -> Result<Self> {
        let mut seen = vec![false; permutation.len()];
        for &i in &permutation {
            if i >= seen.len() || std::mem::replace(&mut seen[i], true) {
                return Err(Error::invalid("order is not a permutation"));
            }
        }
        Ok(StreamOrder { permutation, seed })
    }

    /// Uniformly random permutation of `0..n`, deterministic in `seed`.
    pub fn random(n: usize, seed: u64) -> Self {
        let mut permutation: Vec<usize> = (0..n).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        permutation.shuffle(&mut rng);
        StreamOrder { permutation, seed }
    }

    pub fn indices(&self) -> &[usize] {
        &self.permutation
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.permutation.len()
    }

    pub fn is_empty(&self) -> bool {
        self.permutation.is_empty()
    }
}

pub fn shuffle<T: Scalar>(d: &Dataset<T>, seed: u64) -> StreamOrder {
    StreamOrder::random(d.len(), seed)
}
