use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::ser::{SerializeMap, SerializeStruct};
use serde::{Serialize, Serializer};

use super::PolyError;
use crate::model::VarKey;
use crate::rational::{self, Rational};

/// `∑ coeffs[k] · z_k ≥ rhs`.
///
/// The coefficient vector is always scaled to a primitive integer vector with
/// the original orientation, so two positive multiples of the same row compare
/// equal. Zero coefficients never appear.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinIneq {
    coeffs: BTreeMap<VarKey, Rational>,
    rhs: Rational,
}

impl LinIneq {
    pub fn new(coeffs: impl IntoIterator<Item = (VarKey, Rational)>, rhs: Rational) -> Self {
        let mut map: BTreeMap<VarKey, Rational> = BTreeMap::new();
        for (k, c) in coeffs {
            *map.entry(k).or_insert_with(Rational::zero) += c;
        }
        map.retain(|_, c| !c.is_zero());
        let mut ineq = LinIneq { coeffs: map, rhs };
        ineq.normalize();
        ineq
    }

    /// `∑ coeffs ≤ rhs`, stored as `−∑ coeffs ≥ −rhs`.
    pub fn le(coeffs: impl IntoIterator<Item = (VarKey, Rational)>, rhs: Rational) -> Self {
        LinIneq::new(coeffs.into_iter().map(|(k, c)| (k, -c)), -rhs)
    }

    /// `lhs ≥ rhs_key`, i.e. `z_lhs − z_rhs ≥ 0`.
    pub fn geq_var(lhs: VarKey, rhs: VarKey) -> Self {
        LinIneq::new([(lhs, rational::one()), (rhs, -rational::one())], rational::zero())
    }

    fn normalize(&mut self) {
        if self.coeffs.is_empty() {
            return;
        }
        let mut lcm = BigInt::one();
        for c in self.coeffs.values() {
            lcm = lcm.lcm(c.denom());
        }
        let mut gcd = BigInt::zero();
        for c in self.coeffs.values() {
            let scaled = c.numer() * (&lcm / c.denom());
            gcd = gcd.gcd(&scaled);
        }
        let factor = Rational::new(lcm, gcd);
        if factor.is_one() {
            return;
        }
        for c in self.coeffs.values_mut() {
            *c *= &factor;
        }
        self.rhs *= &factor;
    }

    pub fn coeffs(&self) -> &BTreeMap<VarKey, Rational> {
        &self.coeffs
    }

    pub fn coeff(&self, key: &VarKey) -> Option<&Rational> {
        self.coeffs.get(key)
    }

    pub fn rhs(&self) -> &Rational {
        &self.rhs
    }

    pub fn support(&self) -> impl Iterator<Item = &VarKey> {
        self.coeffs.keys()
    }

    pub fn is_trivial(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Left-hand side at `point`; `None` if a coordinate is missing.
    pub fn lhs_at(&self, point: &BTreeMap<VarKey, Rational>) -> Option<Rational> {
        let mut sum = Rational::zero();
        for (k, c) in &self.coeffs {
            sum += c * point.get(k)?;
        }
        Some(sum)
    }

    /// `rhs − lhs` at `point`; positive means violated.
    pub fn violation_at(&self, point: &BTreeMap<VarKey, Rational>) -> Option<Rational> {
        Some(&self.rhs - self.lhs_at(point)?)
    }

    /// Minimum of the left-hand side over the unit box.
    pub(crate) fn box_min(&self) -> Rational {
        let mut m = Rational::zero();
        for c in self.coeffs.values() {
            if c.is_negative() {
                m += c;
            }
        }
        m
    }

    /// True when the row holds for every point of the unit box (or of all space when `boxed` is false).
    pub(crate) fn is_tautology(&self, boxed: bool) -> bool {
        if self.coeffs.is_empty() {
            return !self.rhs.is_positive();
        }
        boxed && self.box_min() >= self.rhs
    }

    /// `self + scale · other`, renormalized.
    pub(crate) fn combine(&self, other: &LinIneq, self_scale: &Rational, other_scale: &Rational) -> LinIneq {
        let coeffs = self
            .coeffs
            .iter()
            .map(|(k, c)| (k.clone(), c * self_scale))
            .chain(other.coeffs.iter().map(|(k, c)| (k.clone(), c * other_scale)));
        LinIneq::new(coeffs, &self.rhs * self_scale + &other.rhs * other_scale)
    }
}

impl fmt::Display for LinIneq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            write!(f, "0")?;
        }
        for (i, (k, c)) in self.coeffs.iter().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            match (i, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            if !abs.is_one() {
                write!(f, "{} ", rational::format(&abs))?;
            }
            write!(f, "{k}")?;
        }
        write!(f, " >= {}", rational::format(&self.rhs))
    }
}

impl Serialize for LinIneq {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        struct Coeffs<'a>(&'a BTreeMap<VarKey, Rational>);
        impl Serialize for Coeffs<'_> {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                let mut m = s.serialize_map(Some(self.0.len()))?;
                for (k, c) in self.0 {
                    m.serialize_entry(&k.to_set().to_string(), &rational::format(c))?;
                }
                m.end()
            }
        }
        let mut st = s.serialize_struct("LinIneq", 4)?;
        st.serialize_field("coeffs", &Coeffs(&self.coeffs))?;
        st.serialize_field("sense", ">=")?;
        st.serialize_field("rhs", &rational::format(&self.rhs))?;
        st.serialize_field("text", &self.to_string())?;
        st.end()
    }
}

/// A finite H-representation over a fixed set of variables.
///
/// When `boxed` is set every variable is additionally bounded by `0 ≤ z ≤ 1`;
/// those rows are implicit and only materialized by [`IneqSystem::box_rows`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IneqSystem {
    vars: BTreeSet<VarKey>,
    ineqs: Vec<LinIneq>,
    #[serde(rename = "box")]
    boxed: bool,
}

impl IneqSystem {
    pub fn new(vars: impl IntoIterator<Item = VarKey>, boxed: bool) -> Self {
        IneqSystem { vars: vars.into_iter().collect(), ineqs: Vec::new(), boxed }
    }

    pub fn boxed(vars: impl IntoIterator<Item = VarKey>) -> Self {
        IneqSystem::new(vars, true)
    }

    pub fn from_parts(
        vars: impl IntoIterator<Item = VarKey>,
        ineqs: Vec<LinIneq>,
        boxed: bool,
    ) -> Result<Self, PolyError> {
        let mut sys = IneqSystem::new(vars, boxed);
        for ineq in ineqs {
            sys.push(ineq)?;
        }
        Ok(sys)
    }

    pub fn vars(&self) -> &BTreeSet<VarKey> {
        &self.vars
    }

    pub fn ineqs(&self) -> &[LinIneq] {
        &self.ineqs
    }

    pub fn is_boxed(&self) -> bool {
        self.boxed
    }

    pub fn len(&self) -> usize {
        self.ineqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ineqs.is_empty()
    }

    pub fn add_var(&mut self, key: VarKey) -> bool {
        self.vars.insert(key)
    }

    pub(crate) fn check_support(&self, ineq: &LinIneq) -> Result<(), PolyError> {
        match ineq.support().find(|k| !self.vars.contains(*k)) {
            Some(k) => Err(PolyError::UnsupportedVariable(k.clone())),
            None => Ok(()),
        }
    }

    pub fn push(&mut self, ineq: LinIneq) -> Result<(), PolyError> {
        self.check_support(&ineq)?;
        self.ineqs.push(ineq);
        Ok(())
    }

    /// Appends the row unless an identical one is present; returns whether it was added.
    pub fn push_unique(&mut self, ineq: LinIneq) -> Result<bool, PolyError> {
        self.check_support(&ineq)?;
        if self.ineqs.contains(&ineq) {
            return Ok(false);
        }
        self.ineqs.push(ineq);
        Ok(true)
    }

    pub fn contains(&self, ineq: &LinIneq) -> bool {
        self.ineqs.contains(ineq)
    }

    /// Drops repeated rows, keeping the first occurrence.
    pub fn dedup(&mut self) {
        let mut seen = HashSet::new();
        self.ineqs.retain(|i| seen.insert(i.clone()));
    }

    /// `z ≥ 0` and `−z ≥ −1` for every variable, when the box is on.
    pub fn box_rows(&self) -> Vec<LinIneq> {
        if !self.boxed {
            return Vec::new();
        }
        self.vars.iter().flat_map(box_rows_for).collect()
    }

    /// Rows of `other` appended to `self`; variables are unified by key.
    pub fn extend_from(&mut self, other: &IneqSystem) {
        self.vars.extend(other.vars.iter().cloned());
        self.ineqs.extend(other.ineqs.iter().cloned());
    }

    pub(crate) fn replace_ineqs(&mut self, ineqs: Vec<LinIneq>) {
        self.ineqs = ineqs;
    }

    pub(crate) fn remove_var_unchecked(&mut self, key: &VarKey) {
        self.vars.remove(key);
    }
}

pub(crate) fn box_rows_for(key: &VarKey) -> [LinIneq; 2] {
    [
        LinIneq::new([(key.clone(), rational::one())], rational::zero()),
        LinIneq::new([(key.clone(), -rational::one())], -rational::one()),
    ]
}
