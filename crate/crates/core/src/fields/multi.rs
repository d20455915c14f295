use std::sync::Arc;

use crate::algebra::{FourVector, C64};
use crate::dkp::{product_dimension, DkpRep, DEFAULT_DIMENSION_CAP};
use crate::error::{Error, Result};

use super::KemmerField;

/// N-particle Kemmer wavefunction on equal-time configuration space.
/// Spin indices are ordered with particle 1 slowest.
pub trait MultiKemmerField: Send + Sync {
    fn reps(&self) -> Vec<&'static DkpRep>;

    fn particles(&self) -> usize {
        self.reps().len()
    }

    fn psi(&self, t: f64, positions: &[[f64; 3]]) -> Result<Vec<C64>>;
}

type Factors = Vec<Arc<dyn KemmerField>>;

/// `sum_k w_k psi_k1(x_1) (x) ... (x) psi_kN(x_N)`.
#[derive(Clone)]
pub struct ProductSuperposition {
    terms: Vec<(C64, Factors)>,
    reps: Vec<&'static DkpRep>,
}

impl std::fmt::Debug for ProductSuperposition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProductSuperposition")
            .field("terms", &self.terms.len())
            .field("particles", &self.reps.len())
            .finish()
    }
}

impl ProductSuperposition {
    pub fn new(terms: Vec<(C64, Factors)>) -> Result<Self> {
        let first = terms.first().ok_or_else(|| Error::Config("a superposition needs at least one term".into()))?;
        let reps: Vec<&'static DkpRep> = first.1.iter().map(|f| f.rep()).collect();
        if reps.is_empty() {
            return Err(Error::Config("a product needs at least one particle".into()));
        }
        for (_, factors) in &terms {
            if factors.len() != reps.len() {
                return Err(Error::DimensionMismatch { expected: reps.len(), found: factors.len() });
            }
            for (f, r) in factors.iter().zip(&reps) {
                if f.rep().kind() != r.kind() {
                    return Err(Error::DimensionMismatch { expected: r.dimension(), found: f.rep().dimension() });
                }
            }
        }
        let dims: Vec<usize> = reps.iter().map(|r| r.dimension()).collect();
        match product_dimension(&dims) {
            Some(d) if d <= DEFAULT_DIMENSION_CAP => {}
            d => {
                return Err(Error::CapacityExceeded { dimension: d.unwrap_or(usize::MAX), cap: DEFAULT_DIMENSION_CAP })
            }
        }
        Ok(ProductSuperposition { terms, reps })
    }

    pub fn product(factors: Factors) -> Result<Self> {
        Self::new(vec![(C64::new(1.0, 0.0), factors)])
    }

    pub fn terms(&self) -> &[(C64, Factors)] {
        &self.terms
    }
}

pub(crate) fn kron_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect()
}

impl MultiKemmerField for ProductSuperposition {
    fn reps(&self) -> Vec<&'static DkpRep> {
        self.reps.clone()
    }

    fn psi(&self, t: f64, positions: &[[f64; 3]]) -> Result<Vec<C64>> {
        if positions.len() != self.reps.len() {
            return Err(Error::DimensionMismatch { expected: self.reps.len(), found: positions.len() });
        }
        let mut out: Option<Vec<C64>> = None;
        for (w, factors) in &self.terms {
            let mut v = vec![*w];
            for (f, x) in factors.iter().zip(positions) {
                v = kron_vec(&v, &f.psi(&FourVector::from_parts(t, *x))?);
            }
            match out.as_mut() {
                None => out = Some(v),
                Some(acc) => acc.iter_mut().zip(&v).for_each(|(a, b)| *a += b),
            }
        }
        Ok(out.unwrap_or_default())
    }
}
