//! Names, type variables, labels, and the fresh-name supply.

use std::fmt;

/// A term- or channel-level name. The `uid` is globally unique within one
/// pipeline run; two names are the same binding occurrence iff their uids
/// coincide.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Name {
    pub base: String,
    pub uid: u64,
}

impl Name {
    pub fn new(base: impl Into<String>, uid: u64) -> Self {
        Name { base: base.into(), uid }
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.base, self.uid)
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.base)
    }
}

/// Polarity of a type variable occurrence: `Dual` stands for X-bar (HGV)
/// or X-perp (CP). Flipping twice is the identity by construction.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum Polarity {
    Positive,
    Dual,
}

impl Polarity {
    pub fn flip(self) -> Polarity {
        match self {
            Polarity::Positive => Polarity::Dual,
            Polarity::Dual => Polarity::Positive,
        }
    }
}

/// A type variable with its polarity.
#[derive(Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct TypeVar {
    pub ident: String,
    pub polarity: Polarity,
}

impl TypeVar {
    pub fn pos(ident: impl Into<String>) -> Self {
        TypeVar { ident: ident.into(), polarity: Polarity::Positive }
    }

    pub fn flip(&self) -> TypeVar {
        TypeVar { ident: self.ident.clone(), polarity: self.polarity.flip() }
    }
}

impl fmt::Display for TypeVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.polarity {
            Polarity::Positive => write!(f, "{}", self.ident),
            Polarity::Dual => write!(f, "~{}", self.ident),
        }
    }
}

/// A branch label in selection/choice types and their CP counterparts.
#[derive(Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct Label(pub String);

impl Label {
    pub fn new(s: impl Into<String>) -> Self {
        Label(s.into())
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The fresh-name supply. Strictly increasing; never reissues a uid.
#[derive(Debug, Default)]
#[derive(Clone)]
pub struct NameSupply {
    counter: u64,
}

impl NameSupply {
    pub fn new() -> Self {
        NameSupply { counter: 0 }
    }

    pub fn fresh(&mut self, base: impl Into<String>) -> Name {
        self.counter += 1;
        Name { base: base.into(), uid: self.counter }
    }

    /// A fresh name sharing the base of an existing one.
    pub fn refresh(&mut self, n: &Name) -> Name {
        self.fresh(n.base.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn supply_never_reissues() {
        let mut s = NameSupply::new();
        let a = s.fresh("x");
        let b = s.fresh("x");
        assert_ne!(a, b);
        assert_eq!(a.base, b.base);
    }

    #[test]
    fn polarity_flip_involution() {
        let v = TypeVar::pos("X");
        assert_eq!(v.flip().flip(), v);
    }
}
