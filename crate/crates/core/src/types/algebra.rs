use std::collections::BTreeSet;

use super::ty::{Type, TypeVector, VectorFamily};
use crate::syntax::{Constant, Location, Name, Term};

/// `f|a`
pub fn slice(f: &VectorFamily, a: &Location) -> TypeVector {
    f.slice(a)
}

/// `a(v)`
pub fn singleton(a: &Location, v: TypeVector) -> VectorFamily {
    VectorFamily::singleton(a.clone(), v)
}

/// Type equality. Families are maps, so singletons on different locations
/// permute freely and nothing else needs quotienting.
pub fn type_eq(s: &Type, t: &Type) -> bool {
    s == t
}

/// Compose one slice: `(r > s) . (s' > t)`, all vectors as written.
fn compose_slice(
    r: &TypeVector,
    s: &TypeVector,
    s2: &TypeVector,
    t: &TypeVector,
) -> Option<(TypeVector, TypeVector)> {
    let s = s.items();
    let s2 = s2.items();
    if s2.len() >= s.len() {
        // (?r > !s) . (?s ?u > !t) = ?r ?u > !t
        let (head, u) = s2.split_at(s.len());
        if head.iter().eq(s.iter().rev()) {
            return Some((r.concat(&TypeVector::new(u.to_vec())), t.clone()));
        }
    } else {
        // (?r > !u !s) . (?s > !t) = ?r > !u !t
        let (u, tail) = s.split_at(s.len() - s2.len());
        if tail.iter().eq(s2.iter().rev()) {
            return Some((r.clone(), TypeVector::new(u.to_vec()).concat(t)));
        }
    }
    None
}

/// Slice-wise type composition `s.t`; `None` where it is undefined.
pub fn type_compose(s: &Type, t: &Type) -> Option<Type> {
    let (a, b) = (s.as_arrow()?, t.as_arrow()?);
    let locs: BTreeSet<&Location> = a
        .inputs
        .locations()
        .chain(a.outputs.locations())
        .chain(b.inputs.locations())
        .chain(b.outputs.locations())
        .collect();
    let mut inputs = VectorFamily::new();
    let mut outputs = VectorFamily::new();
    for l in locs {
        let (i, o) = compose_slice(
            &a.inputs.slice(l),
            &a.outputs.slice(l),
            &b.inputs.slice(l),
            &b.outputs.slice(l),
        )?;
        inputs.set(l.clone(), i);
        outputs.set(l.clone(), o);
    }
    Some(Type::arrow(inputs, outputs))
}

/// Expansion by an untouched family `u` (given in stack order): from
/// `?r > !s` to `?r ?u > !u !s` at every location.
pub fn expand(t: &Type, u: &VectorFamily) -> Type {
    let Some(a) = t.as_arrow() else {
        return t.clone();
    };
    Type::arrow(a.inputs.concat(&u.reversed()), u.concat(&a.outputs))
}

/// The canonical inhabitant: pop every input, push the canonical inhabitant
/// of every output.
///
/// Away from the main location this is a pointwise extension: input slices
/// are popped location by location in name order, then output slices are
/// pushed in the same order. Base types are inhabited by literals (`Z` by
/// `0`, `B` by `false`); other base types have no canonical inhabitant and
/// give `None`.
pub fn bottom(t: &Type) -> Option<Term> {
    match t {
        Type::Base(b) => match &**b {
            "Z" => Some(Term::int(0)),
            "B" => Some(Term::constant(Constant::Bool(false), Term::Nil)),
            _ => None,
        },
        Type::Arrow(a) => {
            let mut pushes = Vec::new();
            for (l, v) in a.outputs.iter() {
                for s in v.items() {
                    pushes.push((l.clone(), bottom(s)?));
                }
            }
            let mut term = Term::Nil;
            for (l, n) in pushes.into_iter().rev() {
                term = Term::push(n, l, term);
            }
            let total = a.inputs.total_len();
            let names = binder_names(total);
            let mut pops = Vec::new();
            let mut k = 0;
            for (l, v) in a.inputs.iter() {
                for _ in v.items() {
                    pops.push((l.clone(), names[k].clone()));
                    k += 1;
                }
            }
            for (l, x) in pops.into_iter().rev() {
                term = Term::pop(l, x, term);
            }
            Some(term)
        }
    }
}

fn binder_names(n: usize) -> Vec<Name> {
    if n == 1 {
        return vec![Name::new("x")];
    }
    // pop order names the deepest input x1, as in <x_n>...<x_1>
    (0..n).map(|i| Name::new(&format!("x{}", n - i))).collect()
}
