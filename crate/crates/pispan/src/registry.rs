//! Registry of interpreted function symbols usable in expressions.
//!
//! Each symbol carries its arity, a ground interpretation on naturals, and a
//! size schema used by the expression typing rules to map argument `Nat`
//! bounds to result bounds.

use crate::index::{Index, Interval};
use std::collections::BTreeMap;

#[derive(Clone)]
pub struct FnSpec {
    pub arity: usize,
    pub eval: fn(&[u64]) -> u64,
    /// Maps the `Nat[I,J]` bounds of the arguments to the bounds of the
    /// result, e.g. `mult : Nat[I,J] x Nat[I',J'] -> Nat[I*I', J*J']`.
    pub size_schema: fn(&[Interval]) -> Interval,
}

#[derive(Clone, Default)]
pub struct Registry {
    map: BTreeMap<String, FnSpec>,
}

impl Registry {
    pub fn empty() -> Registry {
        Registry::default()
    }

    /// The standard registry: `mult`, interpreted as multiplication.
    pub fn standard() -> Registry {
        let mut r = Registry::empty();
        r.register(
            "mult",
            FnSpec {
                arity: 2,
                eval: |args| args[0].saturating_mul(args[1]),
                size_schema: |args| Interval {
                    lo: Index::mul(args[0].lo.clone(), args[1].lo.clone()),
                    hi: Index::mul(args[0].hi.clone(), args[1].hi.clone()),
                },
            },
        );
        r
    }

    pub fn register(&mut self, name: impl Into<String>, spec: FnSpec) {
        self.map.insert(name.into(), spec);
    }

    pub fn get(&self, name: &str) -> Option<&FnSpec> {
        self.map.get(name)
    }
}
