use std::fmt;

use serde::{Deserialize, Serialize};

/// A name with an optional declared type. `ty == None` means untyped.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TypedName {
    pub name: String,
    pub ty: Option<String>,
}

impl TypedName {
    pub fn new(name: impl Into<String>, ty: Option<&str>) -> Self {
        TypedName {
            name: name.into(),
            ty: ty.map(str::to_owned),
        }
    }

    pub fn untyped(name: impl Into<String>) -> Self {
        TypedName {
            name: name.into(),
            ty: None,
        }
    }

    /// Declared type, defaulting to the root type.
    pub fn type_or_object(&self) -> &str {
        self.ty.as_deref().unwrap_or(ROOT_TYPE)
    }
}

pub const ROOT_TYPE: &str = "object";

/// Argument of a schema-level atom. Variable names are stored without `?`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Term {
    Var(String),
    Const(String),
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "?{v}"),
            Term::Const(c) => f.write_str(c),
        }
    }
}

/// Schema-level atom, possibly containing variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<Term>,
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.predicate)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        f.write_str(")")
    }
}

/// Variable-free atom over object names.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroundAtom {
    pub predicate: String,
    pub args: Vec<String>,
}

impl GroundAtom {
    pub fn new<S: AsRef<str>>(predicate: &str, args: &[S]) -> Self {
        GroundAtom {
            predicate: predicate.to_owned(),
            args: args.iter().map(|a| a.as_ref().to_owned()).collect(),
        }
    }

    /// Parenthesis-free rendering, e.g. `at car-1 location-2`.
    pub fn plain(&self) -> String {
        let mut s = self.predicate.clone();
        for a in &self.args {
            s.push(' ');
            s.push_str(a);
        }
        s
    }
}

impl fmt::Display for GroundAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.plain())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Predicate {
    pub name: String,
    pub parameters: Vec<TypedName>,
}

/// Effect literal; `positive == false` is a delete effect.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Literal {
    pub positive: bool,
    pub atom: Atom,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionSchema {
    pub name: String,
    pub parameters: Vec<TypedName>,
    /// Positive conjunction, in source order.
    pub precondition: Vec<Atom>,
    /// Effect literals in source order.
    pub effect: Vec<Literal>,
}

impl ActionSchema {
    pub fn add_effects(&self) -> impl Iterator<Item = &Atom> {
        self.effect.iter().filter(|l| l.positive).map(|l| &l.atom)
    }

    pub fn del_effects(&self) -> impl Iterator<Item = &Atom> {
        self.effect.iter().filter(|l| !l.positive).map(|l| &l.atom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Domain {
    pub name: String,
    pub requirements: Vec<String>,
    /// Declared types with their parent (`None` parent means `object`).
    pub types: Vec<TypedName>,
    pub constants: Vec<TypedName>,
    pub predicates: Vec<Predicate>,
    pub actions: Vec<ActionSchema>,
}

impl Domain {
    pub fn predicate(&self, name: &str) -> Option<&Predicate> {
        self.predicates.iter().find(|p| p.name == name)
    }

    pub fn action(&self, name: &str) -> Option<&ActionSchema> {
        self.actions.iter().find(|a| a.name == name)
    }

    pub fn declares_types(&self) -> bool {
        !self.types.is_empty()
    }

    pub fn has_type(&self, name: &str) -> bool {
        name == ROOT_TYPE || self.types.iter().any(|t| t.name == name)
    }

    fn parent_of(&self, name: &str) -> Option<&str> {
        if name == ROOT_TYPE {
            return None;
        }
        self.types
            .iter()
            .find(|t| t.name == name)
            .map(|t| t.type_or_object())
    }

    /// Whether `sub` equals `sup` or descends from it. Types unknown to an
    /// untyped domain are treated as direct children of `object`.
    pub fn is_subtype(&self, sub: &str, sup: &str) -> bool {
        if sup == ROOT_TYPE || sub == sup {
            return true;
        }
        let mut cur = sub;
        for _ in 0..=self.types.len() {
            match self.parent_of(cur) {
                Some(p) if p == sup => return true,
                Some(p) if p != cur => cur = p,
                _ => return false,
            }
        }
        false
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Problem {
    pub name: String,
    pub domain_name: String,
    pub objects: Vec<TypedName>,
    /// Initial atoms in source order, without duplicates.
    pub init: Vec<GroundAtom>,
    /// Goal conjunction in source order.
    pub goal: Vec<GroundAtom>,
}

fn write_typed_list(f: &mut fmt::Formatter<'_>, items: &[TypedName], var: bool) -> fmt::Result {
    let prefix = if var { "?" } else { "" };
    let mut first = true;
    let mut i = 0;
    while i < items.len() {
        // Group consecutive names sharing a type: `a b - t`.
        let mut j = i;
        while j + 1 < items.len() && items[j + 1].ty == items[i].ty {
            j += 1;
        }
        for it in &items[i..=j] {
            if !first {
                f.write_str(" ")?;
            }
            first = false;
            write!(f, "{prefix}{}", it.name)?;
        }
        if let Some(t) = &items[i].ty {
            write!(f, " - {t}")?;
        }
        i = j + 1;
    }
    Ok(())
}

fn write_conjunction<T: fmt::Display>(f: &mut fmt::Formatter<'_>, items: &[T]) -> fmt::Result {
    match items {
        [] => f.write_str("()"),
        [one] => write!(f, "{one}"),
        many => {
            f.write_str("(and")?;
            for it in many {
                write!(f, " {it}")?;
            }
            f.write_str(")")
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.positive {
            write!(f, "{}", self.atom)
        } else {
            write!(f, "(not {})", self.atom)
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "(define (domain {})", self.name)?;
        if !self.requirements.is_empty() {
            writeln!(f, "  (:requirements {})", self.requirements.join(" "))?;
        }
        if !self.types.is_empty() {
            f.write_str("  (:types ")?;
            write_typed_list(f, &self.types, false)?;
            f.write_str(")\n")?;
        }
        if !self.constants.is_empty() {
            f.write_str("  (:constants ")?;
            write_typed_list(f, &self.constants, false)?;
            f.write_str(")\n")?;
        }
        f.write_str("  (:predicates")?;
        for p in &self.predicates {
            write!(f, "\n    ({}", p.name)?;
            if !p.parameters.is_empty() {
                f.write_str(" ")?;
                write_typed_list(f, &p.parameters, true)?;
            }
            f.write_str(")")?;
        }
        f.write_str(")")?;
        for a in &self.actions {
            write!(f, "\n  (:action {}\n    :parameters (", a.name)?;
            write_typed_list(f, &a.parameters, true)?;
            f.write_str(")\n    :precondition ")?;
            write_conjunction(f, &a.precondition)?;
            f.write_str("\n    :effect ")?;
            write_conjunction(f, &a.effect)?;
            f.write_str(")")?;
        }
        f.write_str(")\n")
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "(define (problem {})", self.name)?;
        writeln!(f, "  (:domain {})", self.domain_name)?;
        f.write_str("  (:objects ")?;
        write_typed_list(f, &self.objects, false)?;
        f.write_str(")\n  (:init")?;
        for a in &self.init {
            write!(f, "\n    {a}")?;
        }
        f.write_str(")\n  (:goal (and")?;
        for a in &self.goal {
            write!(f, " {a}")?;
        }
        f.write_str(")))\n")
    }
}
