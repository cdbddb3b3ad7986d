//! Name-keyed registries of interchangeable strategies.
//!
//! Each pluggable family (autocorrelation update rule, classifier learner,
//! evaluation scope, sweep axis) exposes a `Registry<dyn Trait, Args>` built
//! from its built-in variants. Configuration selects a variant by name at
//! runtime; `Args` carries whatever the family needs at construction.

use std::fmt;

use crate::error::{Error, Result};

pub type Factory<T, A> = fn(&A) -> Result<Box<T>>;

pub struct Registry<T: ?Sized, A = ()> {
    kind: &'static str,
    entries: Vec<(&'static str, &'static str, Factory<T, A>)>,
}

impl<T: ?Sized, A> Registry<T, A> {
    pub fn new(kind: &'static str) -> Self {
        Self {
            kind,
            entries: Vec::new(),
        }
    }

    /// Registers a variant. Later registrations with the same name replace earlier ones.
    pub fn register(&mut self, name: &'static str, summary: &'static str, factory: Factory<T, A>) {
        self.entries.retain(|(n, _, _)| *n != name);
        self.entries.push((name, summary, factory));
    }

    pub fn with(
        mut self,
        name: &'static str,
        summary: &'static str,
        factory: Factory<T, A>,
    ) -> Self {
        self.register(name, summary, factory);
        self
    }

    pub fn create_with(&self, name: &str, args: &A) -> Result<Box<T>> {
        let factory = self
            .entries
            .iter()
            .find(|(n, _, _)| *n == name)
            .map(|(_, _, f)| f)
            .ok_or_else(|| Error::UnknownStrategy {
                kind: self.kind,
                name: name.to_string(),
                available: self.names().join(", "),
            })?;
        factory(args)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.iter().any(|(n, _, _)| *n == name)
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|(n, _, _)| *n).collect()
    }

    /// `(name, one-line summary)` pairs in registration order.
    pub fn describe(&self) -> Vec<(&'static str, &'static str)> {
        self.entries.iter().map(|(n, s, _)| (*n, *s)).collect()
    }

    pub fn kind(&self) -> &'static str {
        self.kind
    }
}

impl<T: ?Sized> Registry<T, ()> {
    pub fn create(&self, name: &str) -> Result<Box<T>> {
        self.create_with(name, &())
    }
}

impl<T: ?Sized, A> fmt::Debug for Registry<T, A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Registry")
            .field("kind", &self.kind)
            .field("entries", &self.names())
            .finish()
    }
}
