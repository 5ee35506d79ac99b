use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pddl::{Atom, Domain, GroundAtom, Problem, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("unbalanced parentheses at byte {at}")]
pub struct UnbalancedParens {
    pub at: usize,
}

/// Maps each `(` byte offset to its matching `)`. Scanning stops once the
/// first top-level group closes; anything after it is ignored.
pub fn find_matching_parens(text: &str) -> Result<BTreeMap<usize, usize>, UnbalancedParens> {
    let mut out = BTreeMap::new();
    let mut stack = Vec::new();
    for (i, c) in text.char_indices() {
        match c {
            '(' => stack.push(i),
            ')' => {
                let open = stack.pop().ok_or(UnbalancedParens { at: i })?;
                out.insert(open, i);
                if stack.is_empty() {
                    return Ok(out);
                }
            }
            _ => {}
        }
    }
    match stack.first() {
        Some(&at) => Err(UnbalancedParens { at }),
        None => Ok(out),
    }
}

/// One atom of the compact form: `[not ]pred arg...`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompactAtom {
    pub negated: bool,
    pub predicate: String,
    pub args: Vec<String>,
}

impl CompactAtom {
    fn ground(a: &GroundAtom) -> Self {
        CompactAtom {
            negated: false,
            predicate: a.predicate.clone(),
            args: a.args.clone(),
        }
    }

    fn schema(a: &Atom, negated: bool) -> Self {
        CompactAtom {
            negated,
            predicate: a.predicate.clone(),
            args: a
                .args
                .iter()
                .map(|t| match t {
                    Term::Var(v) | Term::Const(v) => v.clone(),
                })
                .collect(),
        }
    }

    fn parse(text: &str) -> Option<Self> {
        let mut words = text.split_whitespace();
        let mut first = words.next()?;
        let negated = first == "not";
        if negated {
            first = words.next()?;
        }
        Some(CompactAtom {
            negated,
            predicate: first.to_owned(),
            args: words.map(str::to_owned).collect(),
        })
    }

    pub fn to_ground(&self) -> GroundAtom {
        GroundAtom::new(&self.predicate, &self.args)
    }
}

impl fmt::Display for CompactAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            f.write_str("not ")?;
        }
        f.write_str(&self.predicate)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "marker", rename_all = "lowercase")]
pub enum CompactSegment {
    Goal {
        atoms: Vec<CompactAtom>,
    },
    Init {
        atoms: Vec<CompactAtom>,
    },
    Action {
        name: String,
        pre: Vec<CompactAtom>,
        effect: Vec<CompactAtom>,
    },
}

/// Marker-delimited single-string encoding of a domain and problem.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompactForm {
    pub text: String,
    pub segments: Vec<CompactSegment>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompactError {
    #[error("compact text must start with <GOAL>")]
    MissingGoal,
    #[error("expected exactly one <GOAL> and one <INIT> segment")]
    SegmentCount,
    #[error("<ACTION> segment `{0}` lacks <PRE> or <EFFECT>")]
    MalformedAction(String),
    #[error("empty atom in compact text")]
    EmptyAtom,
}

fn join(atoms: &[CompactAtom]) -> String {
    atoms
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(", ")
}

fn render(segments: &[CompactSegment]) -> String {
    let mut parts: Vec<String> = Vec::new();
    let mut push = |marker: &str, body: String| {
        parts.push(marker.to_owned());
        if !body.is_empty() {
            parts.push(body);
        }
    };
    for s in segments {
        match s {
            CompactSegment::Goal { atoms } => push("<GOAL>", join(atoms)),
            CompactSegment::Init { atoms } => push("<INIT>", join(atoms)),
            CompactSegment::Action { name, pre, effect } => {
                push("<ACTION>", name.clone());
                push("<PRE>", join(pre));
                push("<EFFECT>", join(effect));
            }
        }
    }
    parts.join(" ")
}

/// Encodes a parsed domain and problem. Goal and init keep source order,
/// schemas keep domain order, types are dropped.
pub fn to_compact(domain: &Domain, problem: &Problem) -> CompactForm {
    let mut segments = vec![
        CompactSegment::Goal {
            atoms: problem.goal.iter().map(CompactAtom::ground).collect(),
        },
        CompactSegment::Init {
            atoms: problem.init.iter().map(CompactAtom::ground).collect(),
        },
    ];
    for a in &domain.actions {
        segments.push(CompactSegment::Action {
            name: a.name.clone(),
            pre: a
                .precondition
                .iter()
                .map(|p| CompactAtom::schema(p, false))
                .collect(),
            effect: a
                .effect
                .iter()
                .map(|l| CompactAtom::schema(&l.atom, !l.positive))
                .collect(),
        });
    }
    CompactForm {
        text: render(&segments),
        segments,
    }
}

const MARKERS: [&str; 5] = ["<GOAL>", "<INIT>", "<ACTION>", "<PRE>", "<EFFECT>"];

fn split_markers(text: &str) -> Vec<(&'static str, &str)> {
    let mut out = Vec::new();
    let mut rest = text;
    let mut current: Option<&'static str> = None;
    loop {
        let next = MARKERS
            .iter()
            .filter_map(|m| rest.find(m).map(|i| (i, *m)))
            .min_by_key(|(i, _)| *i);
        let (body, after) = match next {
            Some((i, m)) => (&rest[..i], Some((i, m))),
            None => (rest, None),
        };
        if let Some(m) = current {
            out.push((m, body.trim()));
        }
        match after {
            Some((i, m)) => {
                current = Some(m);
                rest = &rest[i + m.len()..];
            }
            None => return out,
        }
    }
}

fn parse_atoms(body: &str) -> Result<Vec<CompactAtom>, CompactError> {
    if body.is_empty() {
        return Ok(Vec::new());
    }
    body.split(',')
        .map(|s| CompactAtom::parse(s.trim()).ok_or(CompactError::EmptyAtom))
        .collect()
}

/// Decodes compact text back into segments. Whitespace around markers is
/// optional.
pub fn parse_compact(text: &str) -> Result<CompactForm, CompactError> {
    let pieces = split_markers(text);
    if pieces.first().map(|p| p.0) != Some("<GOAL>") {
        return Err(CompactError::MissingGoal);
    }
    let mut segments = Vec::new();
    let mut i = 0;
    while i < pieces.len() {
        let (marker, body) = pieces[i];
        match marker {
            "<GOAL>" => segments.push(CompactSegment::Goal {
                atoms: parse_atoms(body)?,
            }),
            "<INIT>" => segments.push(CompactSegment::Init {
                atoms: parse_atoms(body)?,
            }),
            "<ACTION>" => {
                let name = body.to_owned();
                match (pieces.get(i + 1), pieces.get(i + 2)) {
                    (Some(("<PRE>", pre)), Some(("<EFFECT>", eff))) => {
                        segments.push(CompactSegment::Action {
                            name,
                            pre: parse_atoms(pre)?,
                            effect: parse_atoms(eff)?,
                        });
                        i += 2;
                    }
                    _ => return Err(CompactError::MalformedAction(name)),
                }
            }
            _ => return Err(CompactError::MalformedAction(body.to_owned())),
        }
        i += 1;
    }
    let goals = segments
        .iter()
        .filter(|s| matches!(s, CompactSegment::Goal { .. }))
        .count();
    let inits = segments
        .iter()
        .filter(|s| matches!(s, CompactSegment::Init { .. }))
        .count();
    if goals != 1 || inits != 1 {
        return Err(CompactError::SegmentCount);
    }
    Ok(CompactForm {
        text: text.to_owned(),
        segments,
    })
}

impl CompactForm {
    pub fn goal(&self) -> Vec<GroundAtom> {
        self.segments
            .iter()
            .find_map(|s| match s {
                CompactSegment::Goal { atoms } => {
                    Some(atoms.iter().map(CompactAtom::to_ground).collect())
                }
                _ => None,
            })
            .unwrap_or_default()
    }

    pub fn init(&self) -> Vec<GroundAtom> {
        self.segments
            .iter()
            .find_map(|s| match s {
                CompactSegment::Init { atoms } => {
                    Some(atoms.iter().map(CompactAtom::to_ground).collect())
                }
                _ => None,
            })
            .unwrap_or_default()
    }

    pub fn actions(&self) -> impl Iterator<Item = &CompactSegment> {
        self.segments
            .iter()
            .filter(|s| matches!(s, CompactSegment::Action { .. }))
    }
}

impl fmt::Display for CompactForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}
