//! State-space and energy-model abstractions shared by every sampler.
//!
//! A [`DomainSpec`] is a product of finite, sorted alphabets of real levels.
//! States are stored by value (not by level index) so that the differentiable
//! extension of an energy can be evaluated on lattice points and on arbitrary
//! real vectors alike.

use std::ops::{Deref, DerefMut};
use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};

/// Default cap on the number of states an exact enumeration may visit.
pub const ENUMERATION_CAP: u64 = 1 << 24;

#[derive(Debug, Clone, PartialEq)]
pub struct DomainSpec {
    alphabets: Vec<Vec<f64>>,
}

impl DomainSpec {
    pub fn new(alphabets: Vec<Vec<f64>>) -> Result<Self> {
        if alphabets.is_empty() {
            return Err(Error::EmptyDomain);
        }
        for (coord, levels) in alphabets.iter().enumerate() {
            if levels.is_empty() {
                return Err(Error::InvalidAlphabet {
                    coord,
                    reason: "empty".into(),
                });
            }
            if levels.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidAlphabet {
                    coord,
                    reason: "non-finite level".into(),
                });
            }
            if levels.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidAlphabet {
                    coord,
                    reason: "levels must be distinct and sorted ascending".into(),
                });
            }
        }
        Ok(Self { alphabets })
    }

    /// `d` coordinates sharing one alphabet.
    pub fn uniform(d: usize, levels: &[f64]) -> Result<Self> {
        Self::new(vec![levels.to_vec(); d])
    }

    pub fn binary(d: usize) -> Self {
        Self::uniform(d, &[0.0, 1.0]).expect("binary alphabet is valid")
    }

    pub fn spins(d: usize) -> Self {
        Self::uniform(d, &[-1.0, 1.0]).expect("spin alphabet is valid")
    }

    pub fn dim(&self) -> usize {
        self.alphabets.len()
    }

    pub fn alphabet(&self, coord: usize) -> &[f64] {
        &self.alphabets[coord]
    }

    pub fn alphabets(&self) -> &[Vec<f64>] {
        &self.alphabets
    }

    /// Total number of states, or `None` when it does not fit in a `u128`.
    pub fn state_count(&self) -> Option<u128> {
        self.alphabets
            .iter()
            .try_fold(1u128, |acc, a| acc.checked_mul(a.len() as u128))
    }

    /// State count if the domain may be enumerated under `cap`.
    pub fn enumerable_count(&self, cap: u64) -> Result<usize> {
        match self.state_count() {
            Some(n) if n <= cap as u128 => Ok(n as usize),
            Some(n) => Err(Error::EnumerationCap {
                count: n.to_string(),
                cap,
            }),
            None => Err(Error::EnumerationCap {
                count: format!(
                    "more than 2^128 ({} coordinates)",
                    self.alphabets.len()
                ),
                cap,
            }),
        }
    }

    /// Index of `value` within the alphabet of `coord` (binary search).
    pub fn level_index(&self, coord: usize, value: f64) -> Option<usize> {
        self.alphabets[coord]
            .binary_search_by(|probe| probe.total_cmp(&value))
            .ok()
    }

    pub fn contains(&self, values: &[f64]) -> bool {
        values.len() == self.dim()
            && values
                .iter()
                .enumerate()
                .all(|(i, &v)| self.level_index(i, v).is_some())
    }

    pub fn check(&self, values: &[f64]) -> Result<()> {
        if values.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: values.len(),
            });
        }
        for (coord, &value) in values.iter().enumerate() {
            if self.level_index(coord, value).is_none() {
                return Err(Error::NotInAlphabet { coord, value });
            }
        }
        Ok(())
    }

    /// Mixed-radix index of a state; coordinate 0 is the most significant digit,
    /// which matches the order produced by [`enumerate_states`].
    pub fn state_index(&self, values: &[f64]) -> Result<usize> {
        self.check(values)?;
        let mut idx = 0usize;
        for (coord, &value) in values.iter().enumerate() {
            let radix = self.alphabets[coord].len();
            let level = self.level_index(coord, value).unwrap_or(0);
            idx = idx
                .checked_mul(radix)
                .and_then(|v| v.checked_add(level))
                .ok_or(Error::EnumerationCap {
                    count: "overflow".into(),
                    cap: ENUMERATION_CAP,
                })?;
        }
        Ok(idx)
    }

    pub fn state_from_index(&self, mut idx: usize) -> DiscreteState {
        let mut values = vec![0.0; self.dim()];
        for coord in (0..self.dim()).rev() {
            let radix = self.alphabets[coord].len();
            values[coord] = self.alphabets[coord][idx % radix];
            idx /= radix;
        }
        DiscreteState(values)
    }

    /// Uniformly random lattice point.
    pub fn random_state<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> DiscreteState {
        DiscreteState(
            self.alphabets
                .iter()
                .map(|a| a[rng.gen_range(0..a.len())])
                .collect(),
        )
    }
}

/// Lattice point of a [`DomainSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteState(pub Vec<f64>);

impl DiscreteState {
    pub fn new(spec: &DomainSpec, values: Vec<f64>) -> Result<Self> {
        spec.check(&values)?;
        Ok(Self(values))
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn hamming(&self, other: &Self) -> usize {
        self.0
            .iter()
            .zip(&other.0)
            .filter(|(a, b)| a != b)
            .count()
    }
}

impl Deref for DiscreteState {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for DiscreteState {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

/// Continuous auxiliary variable paired with a discrete state.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxState(Vec<f64>);

impl AuxState {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::param(
                "theta_a",
                format!("entry {i} is not finite ({})", values[i]),
            ));
        }
        Ok(Self(values))
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for AuxState {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointState {
    pub theta: DiscreteState,
    pub theta_a: AuxState,
}

impl JointState {
    pub fn new(theta: DiscreteState, theta_a: AuxState) -> Result<Self> {
        if theta.len() != theta_a.len() {
            return Err(Error::DimensionMismatch {
                expected: theta.len(),
                got: theta_a.len(),
            });
        }
        Ok(Self { theta, theta_a })
    }
}

/// Shape constraint on feasible states, used by proposals that must stay
/// inside a structured subset of the lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Structure {
    /// Every lattice point is a valid state; proposals factorize per coordinate.
    Factorized,
    /// Binary `n x n` matrix flattened row-major; only permutation matrices
    /// are feasible.
    Permutation { n: usize },
}

/// Differentiable extension `U: R^d -> R` of a log-unnormalized target.
pub trait EnergyModel: Send + Sync {
    fn domain(&self) -> &DomainSpec;

    fn energy(&self, x: &[f64]) -> f64;

    fn gradient(&self, x: &[f64]) -> Vec<f64>;

    fn structure(&self) -> Structure {
        Structure::Factorized
    }

    fn is_feasible(&self, _x: &[f64]) -> bool {
        true
    }

    fn dim(&self) -> usize {
        self.domain().dim()
    }
}

impl<M: EnergyModel + ?Sized> EnergyModel for &M {
    fn domain(&self) -> &DomainSpec {
        (**self).domain()
    }
    fn energy(&self, x: &[f64]) -> f64 {
        (**self).energy(x)
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        (**self).gradient(x)
    }
    fn structure(&self) -> Structure {
        (**self).structure()
    }
    fn is_feasible(&self, x: &[f64]) -> bool {
        (**self).is_feasible(x)
    }
}

/// Monotone count of energy-function units. One `energy` call and one
/// `gradient` call each cost one unit.
#[derive(Debug, Default)]
pub struct EvalCounter(AtomicU64);

impl EvalCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&self, n: u64) {
        self.0.fetch_add(n, Ordering::Relaxed);
    }

    pub fn get(&self) -> u64 {
        self.0.load(Ordering::Relaxed)
    }
}

/// Wraps a model and counts every energy and gradient evaluation.
pub struct Counted<'a, M: ?Sized> {
    inner: &'a M,
    counter: EvalCounter,
}

impl<'a, M: EnergyModel + ?Sized> Counted<'a, M> {
    pub fn new(inner: &'a M) -> Self {
        Self {
            inner,
            counter: EvalCounter::new(),
        }
    }

    pub fn calls(&self) -> u64 {
        self.counter.get()
    }

    pub fn counter(&self) -> &EvalCounter {
        &self.counter
    }

    pub fn inner(&self) -> &'a M {
        self.inner
    }
}

impl<M: EnergyModel + ?Sized> EnergyModel for Counted<'_, M> {
    fn domain(&self) -> &DomainSpec {
        self.inner.domain()
    }
    fn energy(&self, x: &[f64]) -> f64 {
        self.counter.add(1);
        self.inner.energy(x)
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.counter.add(1);
        self.inner.gradient(x)
    }
    fn structure(&self) -> Structure {
        self.inner.structure()
    }
    fn is_feasible(&self, x: &[f64]) -> bool {
        self.inner.is_feasible(x)
    }
}

/// Iterator over all lattice points in lexicographic order of level indices.
pub struct StateIter<'a> {
    spec: &'a DomainSpec,
    levels: Vec<usize>,
    remaining: usize,
}

impl Iterator for StateIter<'_> {
    type Item = DiscreteState;

    fn next(&mut self) -> Option<DiscreteState> {
        if self.remaining == 0 {
            return None;
        }
        let state = DiscreteState(
            self.levels
                .iter()
                .enumerate()
                .map(|(i, &l)| self.spec.alphabet(i)[l])
                .collect(),
        );
        self.remaining -= 1;
        for coord in (0..self.levels.len()).rev() {
            self.levels[coord] += 1;
            if self.levels[coord] < self.spec.alphabet(coord).len() {
                break;
            }
            self.levels[coord] = 0;
        }
        Some(state)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        (self.remaining, Some(self.remaining))
    }
}

impl ExactSizeIterator for StateIter<'_> {}

pub fn enumerate_states(spec: &DomainSpec) -> Result<StateIter<'_>> {
    enumerate_states_capped(spec, ENUMERATION_CAP)
}

pub fn enumerate_states_capped(spec: &DomainSpec, cap: u64) -> Result<StateIter<'_>> {
    let remaining = spec.enumerable_count(cap)?;
    Ok(StateIter {
        spec,
        levels: vec![0; spec.dim()],
        remaining,
    })
}

pub fn state_distance_l2(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    Ok(a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt())
}

/// Central finite-difference gradient of `f` at `x` with step `h`.
pub fn finite_difference_gradient(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            let orig = probe[i];
            probe[i] = orig + h;
            let up = f(&probe);
            probe[i] = orig - h;
            let down = f(&probe);
            probe[i] = orig;
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Relative error `|g - g_fd| / max(|g_fd|, floor)` in the Euclidean norm.
pub fn gradient_relative_error<M: EnergyModel + ?Sized>(model: &M, x: &[f64], h: f64) -> f64 {
    let analytic = model.gradient(x);
    let numeric = finite_difference_gradient(|p| model.energy(p), x, h);
    let diff = analytic
        .iter()
        .zip(&numeric)
        .map(|(a, n)| (a - n) * (a - n))
        .sum::<f64>()
        .sqrt();
    let scale = numeric.iter().map(|n| n * n).sum::<f64>().sqrt();
    diff / scale.max(1e-8)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn binary_hypercube_order() {
        let spec = DomainSpec::binary(4);
        let states: Vec<_> = enumerate_states(&spec).unwrap().collect();
        assert_eq!(states.len(), 16);
        assert_eq!(&states[0][..], &[0.0, 0.0, 0.0, 0.0]);
        assert_eq!(&states[15][..], &[1.0, 1.0, 1.0, 1.0]);
        for (i, s) in states.iter().enumerate() {
            assert_eq!(spec.state_index(s).unwrap(), i);
            assert_eq!(&spec.state_from_index(i), s);
        }
    }

    #[test]
    fn ternary_lexicographic() {
        let spec = DomainSpec::uniform(2, &[0.0, 1.0, 2.0]).unwrap();
        let states: Vec<Vec<f64>> = enumerate_states(&spec)
            .unwrap()
            .map(|s| s.into_inner())
            .collect();
        assert_eq!(states.len(), 9);
        assert_eq!(states[0], vec![0.0, 0.0]);
        assert_eq!(states[1], vec![0.0, 1.0]);
        assert_eq!(states[2], vec![0.0, 2.0]);
        assert_eq!(states[3], vec![1.0, 0.0]);
    }

    #[test]
    fn spins_512_distinct() {
        let spec = DomainSpec::spins(9);
        let set: HashSet<Vec<u64>> = enumerate_states(&spec)
            .unwrap()
            .map(|s| s.iter().map(|v| v.to_bits()).collect())
            .collect();
        assert_eq!(set.len(), 512);
    }

    #[test]
    fn mixed_alphabets_cover_product() {
        let spec = DomainSpec::new(vec![vec![0.0, 1.0], vec![-1.0, 0.5, 3.0], vec![2.0]]).unwrap();
        let set: HashSet<Vec<u64>> = enumerate_states(&spec)
            .unwrap()
            .map(|s| s.iter().map(|v| v.to_bits()).collect())
            .collect();
        assert_eq!(set.len(), 6);
    }

    #[test]
    fn cap_error_names_count() {
        let spec = DomainSpec::binary(30);
        let err = enumerate_states(&spec).err().unwrap();
        assert_eq!(
            err,
            Error::EnumerationCap {
                count: (1u64 << 30).to_string(),
                cap: ENUMERATION_CAP
            }
        );
        assert!(err.to_string().contains("1073741824"));
        assert!(enumerate_states_capped(&DomainSpec::binary(4), 15).is_err());
    }

    #[test]
    fn invalid_alphabets_rejected() {
        assert_eq!(DomainSpec::new(vec![]), Err(Error::EmptyDomain));
        assert!(DomainSpec::new(vec![vec![]]).is_err());
        assert!(DomainSpec::new(vec![vec![1.0, 0.0]]).is_err());
        assert!(DomainSpec::new(vec![vec![0.0, 0.0]]).is_err());
        assert!(DomainSpec::new(vec![vec![0.0, f64::NAN]]).is_err());
    }

    #[test]
    fn membership_checks() {
        let spec = DomainSpec::spins(3);
        assert!(spec.contains(&[1.0, -1.0, 1.0]));
        assert!(!spec.contains(&[1.0, 0.0, 1.0]));
        assert!(!spec.contains(&[1.0, 1.0]));
        assert!(DiscreteState::new(&spec, vec![0.0, 1.0, 1.0]).is_err());
        assert!(AuxState::new(vec![0.0, f64::INFINITY]).is_err());
        let joint = JointState::new(
            DiscreteState(vec![1.0, 1.0]),
            AuxState::new(vec![0.3]).unwrap(),
        );
        assert!(joint.is_err());
    }

    #[test]
    fn distances() {
        assert_eq!(state_distance_l2(&[0.0; 4], &[0.0; 4]).unwrap(), 0.0);
        let d = state_distance_l2(&[0.0, 0.0, 0.0, 0.0], &[1.0, 1.0, 1.0, 0.0]).unwrap();
        assert!((d - 3f64.sqrt()).abs() < 1e-15);
        let d = state_distance_l2(&[-1.0; 9], &[1.0; 9]).unwrap();
        assert!((d - 6.0).abs() < 1e-15);
        assert!(state_distance_l2(&[0.0], &[0.0, 1.0]).is_err());
    }

    #[test]
    fn counter_counts_every_call() {
        struct Flat(DomainSpec);
        impl EnergyModel for Flat {
            fn domain(&self) -> &DomainSpec {
                &self.0
            }
            fn energy(&self, _x: &[f64]) -> f64 {
                0.0
            }
            fn gradient(&self, x: &[f64]) -> Vec<f64> {
                vec![0.0; x.len()]
            }
        }
        let model = Flat(DomainSpec::binary(2));
        let counted = Counted::new(&model);
        counted.energy(&[0.0, 0.0]);
        counted.gradient(&[0.0, 0.0]);
        counted.energy(&[1.0, 0.0]);
        assert_eq!(counted.calls(), 3);
    }
}
