use super::{DiscreteHypersurface, Topology};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::vector::{Mat3, Vec3};

/// The similarity `x ↦ dilation · (rotation · x) + translation`.
#[derive(Debug, Clone, Copy)]
pub struct RigidDilation<T> {
    pub rotation: Mat3<T>,
    pub translation: Vec3<T>,
    pub dilation: T,
}

impl<T: Real> RigidDilation<T> {
    pub fn identity() -> Self {
        Self { rotation: Mat3::identity(), translation: Vec3::zero(), dilation: T::one() }
    }

    pub fn translation(v: Vec3<T>) -> Self {
        Self { translation: v, ..Self::identity() }
    }

    pub fn dilation(c: T) -> Self {
        Self { dilation: c, ..Self::identity() }
    }

    pub fn new(rotation: Mat3<T>, translation: Vec3<T>, dilation: T) -> Self {
        Self { rotation, translation, dilation }
    }

    #[inline]
    pub fn apply(&self, x: Vec3<T>) -> Vec3<T> {
        self.rotation.mul_vec(x) * self.dilation + self.translation
    }

    pub fn validate(&self, ambient_dim: usize) -> Result<()> {
        if !(self.dilation > T::zero()) {
            return Err(Error::InvalidArgument("dilation must be positive".into()));
        }
        let tol = T::degeneracy_tol();
        if self.rotation.orthogonality_defect() > tol * T::lit(10.0) {
            return Err(Error::InvalidArgument("rotation is not orthogonal".into()));
        }
        if ambient_dim == 2 && (!self.rotation.preserves_plane(tol) || self.translation.z != T::zero()) {
            return Err(Error::DimensionMismatch("planar curves need a transform that keeps z = 0".into()));
        }
        Ok(())
    }
}

pub fn transform<T: Real>(surface: &DiscreteHypersurface<T>, map: &RigidDilation<T>) -> Result<DiscreteHypersurface<T>> {
    map.validate(surface.ambient_dim())?;
    let is_identity = map.rotation == Mat3::identity() && map.translation == Vec3::zero() && map.dilation == T::one();
    let verts = surface
        .vertices()
        .iter()
        .map(|&p| {
            if is_identity {
                return p;
            }
            let mut q = map.apply(p);
            if matches!(surface.topology(), Topology::Cycle(_)) {
                q.z = T::zero();
            }
            q
        })
        .collect();
    surface.with_vertices(verts)
}
