//! Truncated tom Dieck ring of the circle group.
//!
//! An element carries one integer coordinate for the subgroup `SO(2)` and one
//! for every finite cyclic subgroup `Z_k`, `k >= 1`. Only finitely many `Z_k`
//! coordinates are nonzero, so elements are stored sparsely:
//!
//! ```text
//! alpha = (alpha_0; alpha_1, alpha_2, ..., alpha_K, 0, 0, ...)
//! ```
//!
//! Addition is coordinate-wise and the product is the twisted one
//!
//! ```text
//! (alpha * beta)_0 = alpha_0 beta_0
//! (alpha * beta)_k = alpha_0 beta_k + beta_0 alpha_k
//! ```
//!
//! Coordinates may also be *undefined*. Index computations at resonant
//! stationary points only determine part of the element, and the unknown
//! coordinates must never be mistaken for zeros. Undefined propagates through
//! every operation that reads it.
//!
//! All arithmetic is checked: an `i64` overflow is an error, never a wrap.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default truncation bound used by the convenience constructors.
pub const DEFAULT_TRUNCATION: u32 = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RingError {
    #[error("integer overflow in ring {op}")]
    Overflow { op: &'static str },
    #[error("truncation bound must be positive")]
    ZeroTruncation,
    #[error("coordinate Z_0 does not exist; cyclic subgroups are indexed from 1")]
    ZeroIndex,
}

/// A closed subgroup of `SO(2)` that indexes a ring coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Subgroup {
    So2,
    Cyclic(u32),
}

impl fmt::Display for Subgroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Subgroup::So2 => write!(f, "SO(2)"),
            Subgroup::Cyclic(k) => write!(f, "Z_{k}"),
        }
    }
}

/// Value of a single coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coord {
    Defined(i64),
    Undefined,
}

impl Coord {
    pub fn defined(self) -> Option<i64> {
        match self {
            Coord::Defined(v) => Some(v),
            Coord::Undefined => None,
        }
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coord::Defined(v) => write!(f, "{v}"),
            Coord::Undefined => write!(f, "undef"),
        }
    }
}

/// Element of the truncated ring, kept in canonical form.
///
/// Canonical form: no explicit zero in `zk`, no key above the truncation
/// bound, and `undefined` disjoint from the keys of `zk`. The truncation bound
/// is metadata and does not take part in equality.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "RingElementRepr", into = "RingElementRepr")]
pub struct RingElement {
    so2: i64,
    zk: BTreeMap<u32, i64>,
    undefined: BTreeSet<u32>,
    truncation: u32,
}

impl PartialEq for RingElement {
    fn eq(&self, other: &Self) -> bool {
        self.so2 == other.so2 && self.zk == other.zk && self.undefined == other.undefined
    }
}

impl Eq for RingElement {}

impl RingElement {
    /// Builds a canonical element. Zero entries and keys beyond `truncation`
    /// are dropped; a key listed as undefined wins over a defined value.
    pub fn new(
        so2: i64,
        zk: impl IntoIterator<Item = (u32, i64)>,
        undefined: impl IntoIterator<Item = u32>,
        truncation: u32,
    ) -> Result<Self, RingError> {
        if truncation == 0 {
            return Err(RingError::ZeroTruncation);
        }
        let undefined: BTreeSet<u32> = undefined.into_iter().collect();
        let mut map = BTreeMap::new();
        for (k, v) in zk {
            if k == 0 {
                return Err(RingError::ZeroIndex);
            }
            if k <= truncation && v != 0 && !undefined.contains(&k) {
                map.insert(k, v);
            }
        }
        if undefined.contains(&0) {
            return Err(RingError::ZeroIndex);
        }
        let undefined = undefined.into_iter().filter(|&k| k <= truncation).collect();
        Ok(Self {
            so2,
            zk: map,
            undefined,
            truncation,
        })
    }

    /// Element with the given defined coordinates; the truncation bound is
    /// the larger of the highest listed index and [`DEFAULT_TRUNCATION`].
    pub fn from_coords(so2: i64, zk: &[(u32, i64)]) -> Self {
        let bound = zk
            .iter()
            .map(|&(k, _)| k)
            .max()
            .unwrap_or(0)
            .max(DEFAULT_TRUNCATION);
        Self::new(so2, zk.iter().copied(), [], bound).expect("indices must be positive")
    }

    /// The additive identity.
    pub fn zero(truncation: u32) -> Self {
        Self {
            so2: 0,
            zk: BTreeMap::new(),
            undefined: BTreeSet::new(),
            truncation: truncation.max(1),
        }
    }

    /// The multiplicative unit `(1, 0, 0, ...)`.
    pub fn unit(truncation: u32) -> Self {
        Self {
            so2: 1,
            ..Self::zero(truncation)
        }
    }

    pub fn so2(&self) -> i64 {
        self.so2
    }

    pub fn truncation(&self) -> u32 {
        self.truncation
    }

    /// Defined nonzero `Z_k` coordinates.
    pub fn zk(&self) -> &BTreeMap<u32, i64> {
        &self.zk
    }

    pub fn undefined(&self) -> &BTreeSet<u32> {
        &self.undefined
    }

    pub fn coord(&self, subgroup: Subgroup) -> Coord {
        match subgroup {
            Subgroup::So2 => Coord::Defined(self.so2),
            Subgroup::Cyclic(k) => self.zk_coord(k),
        }
    }

    /// Coordinate at `Z_k`; zero beyond the truncation bound.
    pub fn zk_coord(&self, k: u32) -> Coord {
        if self.undefined.contains(&k) {
            Coord::Undefined
        } else {
            Coord::Defined(self.zk.get(&k).copied().unwrap_or(0))
        }
    }

    /// Marks coordinates as undefined, discarding whatever value they held.
    pub fn with_undefined(mut self, ks: impl IntoIterator<Item = u32>) -> Self {
        for k in ks {
            if k == 0 || k > self.truncation {
                continue;
            }
            self.zk.remove(&k);
            self.undefined.insert(k);
        }
        self
    }

    /// Drops every coordinate above `bound`.
    pub fn truncate(&self, bound: u32) -> Self {
        let bound = bound.max(1);
        Self {
            so2: self.so2,
            zk: self.zk.range(..=bound).map(|(&k, &v)| (k, v)).collect(),
            undefined: self.undefined.range(..=bound).copied().collect(),
            truncation: bound,
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, RingError> {
        self.combine(other, "addition", |a, b| a.checked_add(b))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self, RingError> {
        self.combine(other, "subtraction", |a, b| a.checked_sub(b))
    }

    fn combine(
        &self,
        other: &Self,
        op: &'static str,
        f: impl Fn(i64, i64) -> Option<i64>,
    ) -> Result<Self, RingError> {
        let truncation = self.truncation.max(other.truncation);
        let undefined: BTreeSet<u32> = self.undefined.union(&other.undefined).copied().collect();
        let so2 = f(self.so2, other.so2).ok_or(RingError::Overflow { op })?;
        let mut zk = BTreeMap::new();
        for &k in self.zk.keys().chain(other.zk.keys()) {
            if undefined.contains(&k) || zk.contains_key(&k) {
                continue;
            }
            let a = self.zk.get(&k).copied().unwrap_or(0);
            let b = other.zk.get(&k).copied().unwrap_or(0);
            let v = f(a, b).ok_or(RingError::Overflow { op })?;
            if v != 0 {
                zk.insert(k, v);
            }
        }
        Ok(Self {
            so2,
            zk,
            undefined,
            truncation,
        })
    }

    /// The twisted product `alpha * beta`.
    pub fn try_star(&self, other: &Self) -> Result<Self, RingError> {
        const OP: RingError = RingError::Overflow { op: "product" };
        let truncation = self.truncation.max(other.truncation);
        let undefined: BTreeSet<u32> = self.undefined.union(&other.undefined).copied().collect();
        let so2 = self.so2.checked_mul(other.so2).ok_or(OP)?;
        let mut zk = BTreeMap::new();
        for &k in self.zk.keys().chain(other.zk.keys()) {
            if undefined.contains(&k) || zk.contains_key(&k) {
                continue;
            }
            let a = self.zk.get(&k).copied().unwrap_or(0);
            let b = other.zk.get(&k).copied().unwrap_or(0);
            let v = self
                .so2
                .checked_mul(b)
                .and_then(|x| other.so2.checked_mul(a).and_then(|y| x.checked_add(y)))
                .ok_or(OP)?;
            if v != 0 {
                zk.insert(k, v);
            }
        }
        Ok(Self {
            so2,
            zk,
            undefined,
            truncation,
        })
    }

    /// Integer multiple `g * alpha`.
    pub fn try_scale(&self, g: i64) -> Result<Self, RingError> {
        const OP: RingError = RingError::Overflow { op: "scalar multiplication" };
        let so2 = self.so2.checked_mul(g).ok_or(OP)?;
        let mut zk = BTreeMap::new();
        for (&k, &v) in &self.zk {
            let w = v.checked_mul(g).ok_or(OP)?;
            if w != 0 {
                zk.insert(k, w);
            }
        }
        Ok(Self {
            so2,
            zk,
            undefined: self.undefined.clone(),
            truncation: self.truncation,
        })
    }

    /// True iff some *defined* coordinate is nonzero.
    pub fn is_nonzero(&self) -> bool {
        self.so2 != 0 || !self.zk.is_empty()
    }

    /// Subgroups whose defined coordinate is nonzero.
    pub fn nonzero_coordinates(&self) -> BTreeSet<Subgroup> {
        let mut out = BTreeSet::new();
        if self.so2 != 0 {
            out.insert(Subgroup::So2);
        }
        out.extend(self.zk.keys().map(|&k| Subgroup::Cyclic(k)));
        out
    }

    pub fn is_canonical(&self) -> bool {
        self.zk.values().all(|&v| v != 0)
            && self.zk.keys().all(|&k| k >= 1 && k <= self.truncation)
            && self.undefined.iter().all(|k| !self.zk.contains_key(k))
    }
}

/// Left fold of the product; the empty product is the unit.
pub fn product_many<'a, I>(elems: I) -> Result<RingElement, RingError>
where
    I: IntoIterator<Item = &'a RingElement>,
{
    let mut iter = elems.into_iter();
    let Some(first) = iter.next() else {
        return Ok(RingElement::unit(1));
    };
    iter.try_fold(first.clone(), |acc, e| acc.try_star(e))
}

/// Sum of a sequence; the empty sum is zero.
pub fn sum_many<'a, I>(elems: I) -> Result<RingElement, RingError>
where
    I: IntoIterator<Item = &'a RingElement>,
{
    elems
        .into_iter()
        .try_fold(RingElement::zero(1), |acc, e| acc.try_add(e))
}

impl std::ops::Add for &RingElement {
    type Output = RingElement;
    fn add(self, rhs: Self) -> RingElement {
        self.try_add(rhs).expect("ring addition overflowed")
    }
}

impl std::ops::Sub for &RingElement {
    type Output = RingElement;
    fn sub(self, rhs: Self) -> RingElement {
        self.try_sub(rhs).expect("ring subtraction overflowed")
    }
}

/// `*` is the twisted ring product.
impl std::ops::Mul for &RingElement {
    type Output = RingElement;
    fn mul(self, rhs: Self) -> RingElement {
        self.try_star(rhs).expect("ring product overflowed")
    }
}

impl std::ops::Mul<&RingElement> for i64 {
    type Output = RingElement;
    fn mul(self, rhs: &RingElement) -> RingElement {
        rhs.try_scale(self).expect("scalar multiplication overflowed")
    }
}

impl fmt::Display for RingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}; ", self.so2)?;
        let keys: BTreeSet<u32> = self.zk.keys().chain(self.undefined.iter()).copied().collect();
        if keys.is_empty() {
            write!(f, "0)")
        } else {
            let parts: Vec<String> = keys
                .iter()
                .map(|&k| format!("Z_{k}:{}", self.zk_coord(k)))
                .collect();
            write!(f, "{})", parts.join(", "))
        }
    }
}

/// Wire form: `{"so2": int, "zk": {"k": int}, "undefined": [int], "K": int}`.
#[derive(Serialize, Deserialize)]
struct RingElementRepr {
    so2: i64,
    #[serde(default)]
    zk: BTreeMap<u32, i64>,
    #[serde(default)]
    undefined: Vec<u32>,
    #[serde(rename = "K")]
    truncation: u32,
}

impl TryFrom<RingElementRepr> for RingElement {
    type Error = RingError;
    fn try_from(r: RingElementRepr) -> Result<Self, RingError> {
        RingElement::new(r.so2, r.zk, r.undefined, r.truncation)
    }
}

impl From<RingElement> for RingElementRepr {
    fn from(e: RingElement) -> Self {
        RingElementRepr {
            so2: e.so2,
            zk: e.zk,
            undefined: e.undefined.into_iter().collect(),
            truncation: e.truncation,
        }
    }
}
