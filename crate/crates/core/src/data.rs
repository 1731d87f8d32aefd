//! States, controls, transitions and the append-only transition log.

use std::ops::{Deref, DerefMut};

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::scalar::Scalar;

macro_rules! vector_newtype {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
        pub struct $name<T>(pub Vec<T>);

        impl<T> $name<T> {
            pub fn new(components: Vec<T>) -> Self {
                Self(components)
            }

            pub fn dim(&self) -> usize {
                self.0.len()
            }

            pub fn into_inner(self) -> Vec<T> {
                self.0
            }
        }

        impl<T: Scalar> $name<T> {
            pub fn zeros(dim: usize) -> Self {
                Self(vec![T::zero(); dim])
            }

            pub fn is_finite(&self) -> bool {
                crate::scalar::all_finite(&self.0)
            }

            pub fn norm(&self) -> T {
                crate::scalar::dot(&self.0, &self.0).sqrt()
            }
        }

        impl<T> Deref for $name<T> {
            type Target = [T];
            fn deref(&self) -> &[T] {
                &self.0
            }
        }

        impl<T> DerefMut for $name<T> {
            fn deref_mut(&mut self) -> &mut [T] {
                &mut self.0
            }
        }

        impl<T> From<Vec<T>> for $name<T> {
            fn from(v: Vec<T>) -> Self {
                Self(v)
            }
        }

        impl<T: Clone> From<&[T]> for $name<T> {
            fn from(v: &[T]) -> Self {
                Self(v.to_vec())
            }
        }
    };
}

vector_newtype!(
    /// Environment state in environment-specific units.
    StateVector
);
vector_newtype!(
    /// Control input applied to the environment.
    ControlVector
);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition<T> {
    pub state: StateVector<T>,
    pub control: ControlVector<T>,
    pub next_state: StateVector<T>,
}

impl<T: Scalar> Transition<T> {
    pub fn new(state: StateVector<T>, control: ControlVector<T>, next_state: StateVector<T>) -> Self {
        Self {
            state,
            control,
            next_state,
        }
    }

    /// Concatenated model input `[state, control]`.
    pub fn input(&self) -> Vec<T> {
        let mut z = Vec::with_capacity(self.state.dim() + self.control.dim());
        z.extend_from_slice(&self.state);
        z.extend_from_slice(&self.control);
        z
    }
}

/// Append-only log of transitions with fixed state/control dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionDataset<T> {
    transitions: Vec<Transition<T>>,
    state_dim: usize,
    control_dim: usize,
}

impl<T: Scalar> TransitionDataset<T> {
    pub fn new(state_dim: usize, control_dim: usize) -> Self {
        Self {
            transitions: Vec::new(),
            state_dim,
            control_dim,
        }
    }

    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    pub fn control_dim(&self) -> usize {
        self.control_dim
    }

    pub fn input_dim(&self) -> usize {
        self.state_dim + self.control_dim
    }

    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    pub fn push(&mut self, t: Transition<T>) -> Result<()> {
        check_dim(self.state_dim, t.state.dim(), "transition state")?;
        check_dim(self.control_dim, t.control.dim(), "transition control")?;
        check_dim(self.state_dim, t.next_state.dim(), "transition next state")?;
        self.transitions.push(t);
        Ok(())
    }

    pub fn get(&self, i: usize) -> Option<&Transition<T>> {
        self.transitions.get(i)
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Transition<T>> {
        self.transitions.iter()
    }

    pub fn as_slice(&self) -> &[Transition<T>] {
        &self.transitions
    }
}

impl<'a, T> IntoIterator for &'a TransitionDataset<T> {
    type Item = &'a Transition<T>;
    type IntoIter = std::slice::Iter<'a, Transition<T>>;
    fn into_iter(self) -> Self::IntoIter {
        self.transitions.iter()
    }
}

/// Consuming append, for call sites that thread datasets by value.
pub fn dataset_append<T: Scalar>(
    mut ds: TransitionDataset<T>,
    t: Transition<T>,
) -> Result<TransitionDataset<T>> {
    ds.push(t)?;
    Ok(ds)
}

/// What the dynamics model regresses on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum TargetMode {
    /// `next_state - state`, reconstructed as `state + prediction`.
    #[default]
    Delta,
    /// `next_state` directly.
    Absolute,
}

impl TargetMode {
    pub fn target<T: Scalar>(self, t: &Transition<T>) -> Vec<T> {
        match self {
            TargetMode::Delta => t
                .next_state
                .iter()
                .zip(t.state.iter())
                .map(|(n, s)| *n - *s)
                .collect(),
            TargetMode::Absolute => t.next_state.0.clone(),
        }
    }
}

pub const SCALE_FLOOR: f64 = 1e-6;

/// Per-column affine normalisation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Affine<T> {
    pub mean: Vec<T>,
    pub scale: Vec<T>,
}

impl<T: Scalar> Affine<T> {
    pub fn identity(dim: usize) -> Self {
        Self {
            mean: vec![T::zero(); dim],
            scale: vec![T::one(); dim],
        }
    }

    /// Column mean and (population) standard deviation, floored at
    /// [`SCALE_FLOOR`].
    pub fn fit<'a>(rows: impl Iterator<Item = &'a [T]> + Clone, dim: usize) -> Result<Self> {
        let mut n = 0usize;
        let mut mean = vec![T::zero(); dim];
        for r in rows.clone() {
            check_dim(dim, r.len(), "standardizer row")?;
            for (m, v) in mean.iter_mut().zip(r) {
                *m += *v;
            }
            n += 1;
        }
        if n == 0 {
            return Err(Error::Empty("standardizer needs at least one row"));
        }
        let nf = T::of_usize(n);
        mean.iter_mut().for_each(|m| *m /= nf);
        let mut var = vec![T::zero(); dim];
        for r in rows {
            for ((s, v), m) in var.iter_mut().zip(r).zip(&mean) {
                let d = *v - *m;
                *s += d * d;
            }
        }
        let floor = T::of(SCALE_FLOOR);
        let scale = var.into_iter().map(|s| (s / nf).sqrt().max(floor)).collect();
        Ok(Self { mean, scale })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn transform_into(&self, x: &[T], out: &mut [T]) {
        for i in 0..self.mean.len() {
            out[i] = (x[i] - self.mean[i]) / self.scale[i];
        }
    }

    pub fn transform(&self, x: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); x.len()];
        self.transform_into(x, &mut out);
        out
    }

    pub fn inverse(&self, y: &[T]) -> Vec<T> {
        y.iter()
            .zip(self.mean.iter().zip(&self.scale))
            .map(|(v, (m, s))| *v * *s + *m)
            .collect()
    }
}

/// Input and target normalisation fitted on a transition dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer<T> {
    pub input: Affine<T>,
    pub target: Affine<T>,
    pub target_mode: TargetMode,
}

impl<T: Scalar> Standardizer<T> {
    pub fn identity(input_dim: usize, target_dim: usize, target_mode: TargetMode) -> Self {
        Self {
            input: Affine::identity(input_dim),
            target: Affine::identity(target_dim),
            target_mode,
        }
    }
}

/// Fits input (`[state, control]`) and target normalisation on `ds`.
pub fn standardizer_fit<T: Scalar>(
    ds: &TransitionDataset<T>,
    target_mode: TargetMode,
) -> Result<Standardizer<T>> {
    if ds.is_empty() {
        return Err(Error::Empty("cannot fit a standardizer on an empty dataset"));
    }
    let inputs: Vec<Vec<T>> = ds.iter().map(Transition::input).collect();
    let targets: Vec<Vec<T>> = ds.iter().map(|t| target_mode.target(t)).collect();
    Ok(Standardizer {
        input: Affine::fit(inputs.iter().map(Vec::as_slice), ds.input_dim())?,
        target: Affine::fit(targets.iter().map(Vec::as_slice), ds.state_dim())?,
        target_mode,
    })
}
