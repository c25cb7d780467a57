use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::syntax::Location;

/// Simple FMC types: base atoms and implications between vector families.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Type {
    Base(Arc<str>),
    Arrow(Arc<Arrow>),
}

/// The type vocabulary used in specifications.
pub type FmcType = Type;

/// `?r > !s`. Inputs are stored in pop order (top of stack first), outputs
/// in stack order (bottom first), exactly as they are written.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Arrow {
    pub inputs: VectorFamily,
    pub outputs: VectorFamily,
}

/// An ordered sequence of types.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TypeVector(pub Vec<Type>);

/// A location-indexed family of vectors. Empty slices are never stored, so
/// structural equality is equality of families.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VectorFamily(BTreeMap<Location, TypeVector>);

impl TypeVector {
    pub fn new(items: Vec<Type>) -> Self {
        TypeVector(items)
    }

    pub fn empty() -> Self {
        TypeVector(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn items(&self) -> &[Type] {
        &self.0
    }

    pub fn reversed(&self) -> TypeVector {
        TypeVector(self.0.iter().rev().cloned().collect())
    }

    pub fn concat(&self, other: &TypeVector) -> TypeVector {
        TypeVector(self.0.iter().chain(other.0.iter()).cloned().collect())
    }
}

impl From<Vec<Type>> for TypeVector {
    fn from(v: Vec<Type>) -> Self {
        TypeVector(v)
    }
}

impl VectorFamily {
    pub fn new() -> Self {
        VectorFamily(BTreeMap::new())
    }

    /// The family that is `v` at `loc` and empty elsewhere.
    pub fn singleton(loc: impl Into<Location>, v: impl Into<TypeVector>) -> Self {
        let mut f = VectorFamily::new();
        f.set(loc.into(), v.into());
        f
    }

    /// A family on the main location only.
    pub fn main(v: impl Into<TypeVector>) -> Self {
        VectorFamily::singleton(Location::main(), v)
    }

    pub fn slice(&self, loc: &Location) -> TypeVector {
        self.0.get(loc).cloned().unwrap_or_default()
    }

    pub fn set(&mut self, loc: Location, v: TypeVector) {
        if v.is_empty() {
            self.0.remove(&loc);
        } else {
            self.0.insert(loc, v);
        }
    }

    /// Locations with a nonempty slice.
    pub fn locations(&self) -> impl Iterator<Item = &Location> {
        self.0.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Location, &TypeVector)> {
        self.0.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Pointwise concatenation.
    pub fn concat(&self, other: &VectorFamily) -> VectorFamily {
        let mut out = self.clone();
        for (l, v) in other.iter() {
            out.set(l.clone(), self.slice(l).concat(v));
        }
        out
    }

    pub fn reversed(&self) -> VectorFamily {
        VectorFamily(
            self.0
                .iter()
                .map(|(l, v)| (l.clone(), v.reversed()))
                .collect(),
        )
    }

    pub fn total_len(&self) -> usize {
        self.0.values().map(TypeVector::len).sum()
    }
}

impl<L: Into<Location>> FromIterator<(L, TypeVector)> for VectorFamily {
    fn from_iter<I: IntoIterator<Item = (L, TypeVector)>>(iter: I) -> Self {
        let mut f = VectorFamily::new();
        for (l, v) in iter {
            let l = l.into();
            let joined = f.slice(&l).concat(&v);
            f.set(l, joined);
        }
        f
    }
}

impl Type {
    pub fn base(name: &str) -> Type {
        Type::Base(Arc::from(name))
    }

    pub fn arrow(inputs: VectorFamily, outputs: VectorFamily) -> Type {
        Type::Arrow(Arc::new(Arrow { inputs, outputs }))
    }

    /// A sequential type on the main location.
    pub fn seq(inputs: Vec<Type>, outputs: Vec<Type>) -> Type {
        Type::arrow(VectorFamily::main(inputs), VectorFamily::main(outputs))
    }

    /// `(>)`, which is also what the base name `o` stands for.
    pub fn unit() -> Type {
        Type::Arrow(Arc::new(Arrow::default()))
    }

    pub fn as_arrow(&self) -> Option<&Arrow> {
        match self {
            Type::Arrow(a) => Some(a),
            Type::Base(_) => None,
        }
    }

    /// The restriction of an arrow to one location. Base types slice to
    /// themselves.
    pub fn slice_at(&self, loc: &Location) -> Type {
        match self {
            Type::Base(_) => self.clone(),
            Type::Arrow(a) => Type::arrow(
                VectorFamily::singleton(loc.clone(), a.inputs.slice(loc)),
                VectorFamily::singleton(loc.clone(), a.outputs.slice(loc)),
            ),
        }
    }

    /// Nesting depth: base types and `(>)` have depth 0.
    pub fn depth(&self) -> usize {
        match self {
            Type::Base(_) => 0,
            Type::Arrow(a) => {
                let inner = a
                    .inputs
                    .iter()
                    .chain(a.outputs.iter())
                    .flat_map(|(_, v)| v.items())
                    .map(|t| t.depth() + 1)
                    .max();
                inner.unwrap_or(0)
            }
        }
    }

    /// Locations mentioned anywhere in the type.
    pub fn locations(&self) -> Vec<Location> {
        let mut out = Vec::new();
        self.collect_locations(&mut out);
        out.sort();
        out.dedup();
        out
    }

    fn collect_locations(&self, out: &mut Vec<Location>) {
        if let Type::Arrow(a) = self {
            for (l, v) in a.inputs.iter().chain(a.outputs.iter()) {
                out.push(l.clone());
                for t in v.items() {
                    t.collect_locations(out);
                }
            }
        }
    }
}

fn write_vector(f: &mut fmt::Formatter<'_>, v: &TypeVector) -> fmt::Result {
    for (i, t) in v.items().iter().enumerate() {
        if i > 0 {
            f.write_str(" ")?;
        }
        match t {
            Type::Base(b) => f.write_str(b)?,
            Type::Arrow(_) => write!(f, "({t})")?,
        }
    }
    Ok(())
}

/// Non-main locations first, in name order, then the bare main slice.
fn write_family(f: &mut fmt::Formatter<'_>, fam: &VectorFamily) -> fmt::Result {
    let mut first = true;
    let mut main = None;
    for (l, v) in fam.iter() {
        if l.is_main() {
            main = Some(v);
            continue;
        }
        if !first {
            f.write_str(" ")?;
        }
        first = false;
        write!(f, "{l}(")?;
        write_vector(f, v)?;
        f.write_str(")")?;
    }
    if let Some(v) = main {
        if !first {
            f.write_str(" ")?;
        }
        write_vector(f, v)?;
    }
    Ok(())
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Base(b) => f.write_str(b),
            Type::Arrow(a) => {
                write_family(f, &a.inputs)?;
                match (a.inputs.is_empty(), a.outputs.is_empty()) {
                    (true, true) => f.write_str(">"),
                    (true, false) => f.write_str("> "),
                    (false, true) => f.write_str(" >"),
                    (false, false) => f.write_str(" > "),
                }?;
                write_family(f, &a.outputs)
            }
        }
    }
}

impl fmt::Debug for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for TypeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_vector(f, self)
    }
}

impl fmt::Debug for TypeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{self}]")
    }
}

impl fmt::Display for VectorFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_family(f, self)
    }
}

impl fmt::Debug for VectorFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{self}}}")
    }
}
