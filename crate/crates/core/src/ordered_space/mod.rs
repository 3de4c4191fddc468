//! Finite-dimensional ordered spaces: a cone, a norm and the order oracles
//! built on them.

pub mod cone;
pub mod norm;
pub mod oracle;

use alloc::format;
use alloc::vec::Vec;

pub use cone::{PolyhedralCone, CONE_TOL};
pub use norm::{Norm, NormSpec};
pub use oracle::{
    decomposition_constant_estimate, is_face, lattice_hom_check, normality_constant_lower_bound, riesz_decompose,
    supremum_oracle, FaceReport, LatticeHomReport, FACE_SAMPLES,
};

use crate::error::{check_dim, Error, Result};

/// Plain description of an ordered space.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderedSpaceSpec {
    pub dim: usize,
    pub cone: PolyhedralCone,
    pub norm: NormSpec,
}

impl OrderedSpaceSpec {
    pub fn standard(norm: NormSpec) -> Self {
        let dim = norm.dim();
        OrderedSpaceSpec { dim, cone: PolyhedralCone::standard(dim), norm }
    }

    pub fn standard_lp(dim: usize, p: f64) -> Self {
        Self::standard(NormSpec::lp(dim, p))
    }

    pub fn build(&self) -> Result<OrderedSpace> {
        OrderedSpace::new(self.clone())
    }
}

/// An ordered space with its norm compiled.
#[derive(Debug, Clone)]
pub struct OrderedSpace {
    spec: OrderedSpaceSpec,
    norm: Norm,
}

impl OrderedSpace {
    pub fn new(spec: OrderedSpaceSpec) -> Result<Self> {
        if spec.dim == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        check_dim(spec.dim, spec.cone.dim())?;
        if spec.norm.dim() != spec.dim {
            return Err(Error::InvalidParameter(format!(
                "norm acts on dimension {} but the space has dimension {}",
                spec.norm.dim(),
                spec.dim
            )));
        }
        let norm = spec.norm.compile()?;
        Ok(OrderedSpace { spec, norm })
    }

    pub fn spec(&self) -> &OrderedSpaceSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.dim
    }

    pub fn cone(&self) -> &PolyhedralCone {
        &self.spec.cone
    }

    pub fn norm_fn(&self) -> &Norm {
        &self.norm
    }

    pub fn is_standard(&self) -> bool {
        self.spec.cone.is_standard()
    }

    pub fn norm(&self, x: &[f64]) -> Result<f64> {
        self.norm.value(x)
    }

    pub fn norm_gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.norm.gradient(x)
    }

    pub(crate) fn require_standard(&self, what: &str) -> Result<()> {
        if self.is_standard() {
            Ok(())
        } else {
            Err(Error::Precondition(format!("{what} requires the standard cone")))
        }
    }
}
