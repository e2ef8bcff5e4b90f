//! The finite artefact grid and its normalized metric.
//!
//! A space of dimension `d` and resolution `rho` holds `(rho + 1)^d` points,
//! each an integer vector in `[0, rho]^d` whose real position is `coords / rho`.
//! The empty artefact sits outside the grid and has no position.

use std::fmt;

use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpaceConfig {
    pub d: usize,
    pub rho: u32,
}

impl SpaceConfig {
    pub fn new(d: usize, rho: u32) -> Result<Self> {
        let cfg = SpaceConfig { d, rho };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 1 {
            return Err(invalid("space.d must be >= 1"));
        }
        if self.rho < 1 {
            return Err(invalid("space.rho must be >= 1"));
        }
        Ok(())
    }

    /// Number of non-empty artefacts, saturating at `u128::MAX`.
    pub fn size(&self) -> u128 {
        let base = self.rho as u128 + 1;
        let mut acc: u128 = 1;
        for _ in 0..self.d {
            acc = match acc.checked_mul(base) {
                Some(v) => v,
                None => return u128::MAX,
            };
        }
        acc
    }

    pub fn is_enumerable(&self, cap: u128) -> bool {
        self.size() <= cap
    }

    fn sqrt_d<S: Scalar>(&self) -> S {
        S::from_count(self.d).sqrt()
    }

    fn rho_s<S: Scalar>(&self) -> S {
        S::lit(self.rho as f64)
    }
}

/// An element of the artefact space.
///
/// Serialized as a JSON array of coordinates, or `null` for the empty artefact.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Artefact {
    Empty,
    Point(Vec<u32>),
}

impl Artefact {
    pub fn point(coords: impl Into<Vec<u32>>) -> Self {
        Artefact::Point(coords.into())
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, Artefact::Empty)
    }

    pub fn coords(&self) -> Option<&[u32]> {
        match self {
            Artefact::Empty => None,
            Artefact::Point(c) => Some(c),
        }
    }

    /// Coordinates of a point that lies inside `cfg`.
    pub fn checked_coords(&self, cfg: &SpaceConfig) -> Result<&[u32]> {
        let coords = self.coords().ok_or(Error::EmptyArtefact)?;
        if coords.len() != cfg.d {
            return Err(Error::DimensionMismatch { expected: cfg.d, got: coords.len() });
        }
        if let Some(&value) = coords.iter().find(|&&c| c > cfg.rho) {
            return Err(Error::CoordinateOutOfRange { value, rho: cfg.rho });
        }
        Ok(coords)
    }
}

impl fmt::Display for Artefact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Artefact::Empty => write!(f, "⊤"),
            Artefact::Point(c) => {
                write!(f, "(")?;
                for (i, x) in c.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, ")")
            }
        }
    }
}

impl Serialize for Artefact {
    fn serialize<Ser: Serializer>(&self, s: Ser) -> std::result::Result<Ser::Ok, Ser::Error> {
        match self {
            Artefact::Empty => s.serialize_none(),
            Artefact::Point(c) => c.serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for Artefact {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw: Option<Vec<u32>> = Option::deserialize(d)?;
        match raw {
            None => Ok(Artefact::Empty),
            Some(c) if c.is_empty() => Err(de::Error::custom("artefact must have at least one coordinate")),
            Some(c) => Ok(Artefact::Point(c)),
        }
    }
}

/// Real position of a point, `coords[i] / rho`.
///
/// The division is done in `S`, so the result is the correctly rounded quotient.
pub fn real_coords<S: Scalar>(a: &Artefact, cfg: &SpaceConfig) -> Result<Vec<S>> {
    let coords = a.checked_coords(cfg)?;
    let rho = cfg.rho_s::<S>();
    Ok(coords.iter().map(|&c| S::lit(c as f64) / rho).collect())
}

/// Euclidean distance between two points divided by `sqrt(d)`, so it lies in `[0, 1]`.
pub fn norm_distance<S: Scalar>(a: &Artefact, b: &Artefact, cfg: &SpaceConfig) -> Result<S> {
    let ca = a.checked_coords(cfg)?;
    let cb = b.checked_coords(cfg)?;
    Ok(grid_distance(ca, cb, cfg))
}

/// Normalized distance between two coordinate slices already known to be in range.
pub(crate) fn grid_distance<S: Scalar>(a: &[u32], b: &[u32], cfg: &SpaceConfig) -> S {
    let rho = cfg.rho_s::<S>();
    let sq = a.iter().zip(b).fold(S::zero(), |acc, (&x, &y)| {
        let diff = (S::lit(x as f64) - S::lit(y as f64)) / rho;
        acc + diff * diff
    });
    sq.sqrt() / cfg.sqrt_d::<S>()
}

/// Normalized distance between a grid point and an arbitrary real location.
pub(crate) fn distance_to_center<S: Scalar>(coords: &[u32], center: &[S], cfg: &SpaceConfig) -> S {
    let rho = cfg.rho_s::<S>();
    let sq = coords.iter().zip(center).fold(S::zero(), |acc, (&x, &c)| {
        let diff = S::lit(x as f64) / rho - c;
        acc + diff * diff
    });
    sq.sqrt() / cfg.sqrt_d::<S>()
}

/// Normalized distance between two real locations.
pub(crate) fn real_distance<S: Scalar>(a: &[S], b: &[S], cfg: &SpaceConfig) -> S {
    let sq = a.iter().zip(b).fold(S::zero(), |acc, (&x, &y)| acc + (x - y) * (x - y));
    sq.sqrt() / cfg.sqrt_d::<S>()
}

/// Every point of the grid in lexicographic coordinate order.
pub fn enumerate_space(cfg: &SpaceConfig, cap: u128) -> Result<Vec<Artefact>> {
    cfg.validate()?;
    let size = cfg.size();
    if size > cap {
        return Err(Error::SpaceTooLarge { size, cap });
    }
    let mut out = Vec::with_capacity(size as usize);
    let mut cur = vec![0u32; cfg.d];
    loop {
        out.push(Artefact::Point(cur.clone()));
        // odometer increment, last coordinate fastest
        let mut i = cfg.d;
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            if cur[i] < cfg.rho {
                cur[i] += 1;
                break;
            }
            cur[i] = 0;
        }
    }
}
