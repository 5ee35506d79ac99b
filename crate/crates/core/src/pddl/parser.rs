use std::collections::HashSet;

use super::model::*;
use super::sexpr::{self, Pos, SExpr};
use super::PddlError;

const SUPPORTED_REQUIREMENTS: &[&str] = &[":strips", ":typing"];

fn expect_atom<'a>(e: &'a SExpr, what: &str) -> Result<&'a str, PddlError> {
    e.as_atom()
        .ok_or_else(|| PddlError::syntax(e.pos(), format!("expected {what}")))
}

fn expect_list<'a>(e: &'a SExpr, what: &str) -> Result<&'a [SExpr], PddlError> {
    e.as_list()
        .ok_or_else(|| PddlError::syntax(e.pos(), format!("expected {what}")))
}

/// Splits `(define (<kind> name) sections...)` into name and sections.
fn split_define<'a>(root: &'a SExpr, kind: &str) -> Result<(&'a str, &'a [SExpr]), PddlError> {
    let items = expect_list(root, "(define ...)")?;
    if items.first().and_then(SExpr::as_atom) != Some("define") {
        return Err(PddlError::syntax(root.pos(), "expected (define ...)"));
    }
    let header = items
        .get(1)
        .ok_or_else(|| PddlError::syntax(root.pos(), format!("missing ({kind} <name>)")))?;
    let header_items = expect_list(header, "header")?;
    match header_items {
        [k, name] if k.as_atom() == Some(kind) => Ok((expect_atom(name, "name")?, &items[2..])),
        _ => Err(PddlError::syntax(
            header.pos(),
            format!("expected ({kind} <name>)"),
        )),
    }
}

/// Parses `a b - t c ?d` style lists. Variables keep no `?` prefix.
fn parse_typed_list(items: &[SExpr], vars: bool) -> Result<Vec<TypedName>, PddlError> {
    let mut out = Vec::new();
    let mut pending: Vec<String> = Vec::new();
    let mut i = 0;
    while i < items.len() {
        let e = &items[i];
        let s = expect_atom(e, "name")?;
        if s == "-" {
            let ty_expr = items
                .get(i + 1)
                .ok_or_else(|| PddlError::syntax(e.pos(), "missing type after '-'"))?;
            if ty_expr.head() == Some("either") {
                return Err(PddlError::Unsupported("`either` types".into()));
            }
            let ty = expect_atom(ty_expr, "type name")?;
            if pending.is_empty() {
                return Err(PddlError::syntax(e.pos(), "type annotation without names"));
            }
            out.extend(pending.drain(..).map(|n| TypedName::new(n, Some(ty))));
            i += 2;
            continue;
        }
        let name = if vars {
            s.strip_prefix('?').ok_or_else(|| {
                PddlError::syntax(e.pos(), format!("expected variable, found `{s}`"))
            })?
        } else {
            s
        };
        if name.is_empty() {
            return Err(PddlError::syntax(e.pos(), "empty name"));
        }
        pending.push(name.to_owned());
        i += 1;
    }
    out.extend(pending.into_iter().map(TypedName::untyped));
    Ok(out)
}

fn check_unique(names: &[TypedName], pos: Pos, what: &str) -> Result<(), PddlError> {
    let mut seen = HashSet::new();
    for n in names {
        if !seen.insert(&n.name) {
            return Err(PddlError::syntax(
                pos,
                format!("duplicate {what} `{}`", n.name),
            ));
        }
    }
    Ok(())
}

fn parse_atom(e: &SExpr) -> Result<Atom, PddlError> {
    let items = expect_list(e, "atom")?;
    let (head, rest) = items
        .split_first()
        .ok_or_else(|| PddlError::syntax(e.pos(), "empty atom"))?;
    let predicate = expect_atom(head, "predicate name")?;
    if predicate == "=" {
        return Err(PddlError::Unsupported("equality atoms".into()));
    }
    let args = rest
        .iter()
        .map(|a| {
            let s = expect_atom(a, "term")?;
            Ok(match s.strip_prefix('?') {
                Some(v) => Term::Var(v.to_owned()),
                None => Term::Const(s.to_owned()),
            })
        })
        .collect::<Result<_, PddlError>>()?;
    Ok(Atom {
        predicate: predicate.to_owned(),
        args,
    })
}

fn parse_ground_atom(e: &SExpr) -> Result<GroundAtom, PddlError> {
    let atom = parse_atom(e)?;
    let args = atom
        .args
        .into_iter()
        .map(|t| match t {
            Term::Const(c) => Ok(c),
            Term::Var(v) => Err(PddlError::syntax(
                e.pos(),
                format!("variable ?{v} in ground atom"),
            )),
        })
        .collect::<Result<_, _>>()?;
    Ok(GroundAtom {
        predicate: atom.predicate,
        args,
    })
}

fn unsupported_connective(head: &str) -> Option<&'static str> {
    match head {
        "not" => Some("negative conditions"),
        "or" => Some("disjunctive conditions"),
        "imply" => Some("implications"),
        "exists" | "forall" => Some("quantified formulas"),
        "when" => Some("conditional effects"),
        "increase" | "decrease" | "assign" | "scale-up" | "scale-down" => Some("numeric effects"),
        _ => None,
    }
}

fn parse_condition(e: &SExpr, out: &mut Vec<Atom>) -> Result<(), PddlError> {
    let items = expect_list(e, "condition")?;
    match e.head() {
        None if items.is_empty() => Ok(()),
        Some("and") => items[1..].iter().try_for_each(|c| parse_condition(c, out)),
        Some(h) if unsupported_connective(h).is_some() => Err(PddlError::Unsupported(
            unsupported_connective(h).unwrap().into(),
        )),
        _ => {
            let atom = parse_atom(e)?;
            if !out.contains(&atom) {
                out.push(atom);
            }
            Ok(())
        }
    }
}

fn parse_effect(e: &SExpr, out: &mut Vec<Literal>) -> Result<(), PddlError> {
    let items = expect_list(e, "effect")?;
    match e.head() {
        None if items.is_empty() => Ok(()),
        Some("and") => items[1..].iter().try_for_each(|c| parse_effect(c, out)),
        Some("not") => match &items[1..] {
            [inner] => {
                if let Some(h) = inner.head().and_then(unsupported_connective) {
                    return Err(PddlError::Unsupported(h.into()));
                }
                let lit = Literal {
                    positive: false,
                    atom: parse_atom(inner)?,
                };
                if !out.contains(&lit) {
                    out.push(lit);
                }
                Ok(())
            }
            _ => Err(PddlError::syntax(e.pos(), "(not ...) takes one atom")),
        },
        Some(h) if unsupported_connective(h).is_some() => Err(PddlError::Unsupported(
            unsupported_connective(h).unwrap().into(),
        )),
        _ => {
            let lit = Literal {
                positive: true,
                atom: parse_atom(e)?,
            };
            if !out.contains(&lit) {
                out.push(lit);
            }
            Ok(())
        }
    }
}

/// Drops delete literals whose atom is also added (add wins).
fn normalize_effect(effect: Vec<Literal>) -> Vec<Literal> {
    let adds: Vec<Atom> = effect
        .iter()
        .filter(|l| l.positive)
        .map(|l| l.atom.clone())
        .collect();
    effect
        .into_iter()
        .filter(|l| l.positive || !adds.contains(&l.atom))
        .collect()
}

fn parse_action(items: &[SExpr], pos: Pos) -> Result<ActionSchema, PddlError> {
    let name = expect_atom(
        items
            .get(1)
            .ok_or_else(|| PddlError::syntax(pos, "action without name"))?,
        "action name",
    )?;
    let mut parameters = Vec::new();
    let mut precondition = Vec::new();
    let mut effect = Vec::new();
    let mut i = 2;
    while i < items.len() {
        let key = expect_atom(&items[i], "action keyword")?;
        let value = items
            .get(i + 1)
            .ok_or_else(|| PddlError::syntax(items[i].pos(), format!("missing value for {key}")))?;
        match key {
            ":parameters" => {
                parameters = parse_typed_list(expect_list(value, "parameter list")?, true)?;
                check_unique(&parameters, value.pos(), "parameter")?;
            }
            ":precondition" => parse_condition(value, &mut precondition)?,
            ":effect" => parse_effect(value, &mut effect)?,
            other => {
                return Err(PddlError::syntax(
                    items[i].pos(),
                    format!("unknown action keyword `{other}`"),
                ))
            }
        }
        i += 2;
    }
    Ok(ActionSchema {
        name: name.to_owned(),
        parameters,
        precondition,
        effect: normalize_effect(effect),
    })
}

fn parse_requirements(items: &[SExpr]) -> Result<Vec<String>, PddlError> {
    items
        .iter()
        .map(|r| {
            let r = expect_atom(r, "requirement")?;
            if SUPPORTED_REQUIREMENTS.contains(&r) {
                Ok(r.to_owned())
            } else {
                Err(PddlError::UnknownRequirement(r.to_owned()))
            }
        })
        .collect()
}

/// Parses a STRIPS (+ typing) domain definition.
pub fn parse_domain(text: &str) -> Result<Domain, PddlError> {
    let root = sexpr::parse(text)?;
    let (name, sections) = split_define(&root, "domain")?;
    let mut domain = Domain {
        name: name.to_owned(),
        requirements: Vec::new(),
        types: Vec::new(),
        constants: Vec::new(),
        predicates: Vec::new(),
        actions: Vec::new(),
    };
    for section in sections {
        let items = expect_list(section, "domain section")?;
        let head = section
            .head()
            .ok_or_else(|| PddlError::syntax(section.pos(), "empty section"))?;
        let body = &items[1..];
        match head {
            ":requirements" => domain.requirements = parse_requirements(body)?,
            ":types" => {
                domain.types = parse_typed_list(body, false)?
                    .into_iter()
                    .filter(|t| t.name != ROOT_TYPE)
                    .collect();
                check_unique(&domain.types, section.pos(), "type")?;
            }
            ":constants" => {
                domain.constants = parse_typed_list(body, false)?;
                check_unique(&domain.constants, section.pos(), "constant")?;
            }
            ":predicates" => {
                for p in body {
                    let pitems = expect_list(p, "predicate declaration")?;
                    let (pname, params) = pitems
                        .split_first()
                        .ok_or_else(|| PddlError::syntax(p.pos(), "empty predicate"))?;
                    let parameters = parse_typed_list(params, true)?;
                    check_unique(&parameters, p.pos(), "predicate parameter")?;
                    let pname = expect_atom(pname, "predicate name")?;
                    if domain.predicate(pname).is_some() {
                        return Err(PddlError::syntax(
                            p.pos(),
                            format!("duplicate predicate `{pname}`"),
                        ));
                    }
                    domain.predicates.push(Predicate {
                        name: pname.to_owned(),
                        parameters,
                    });
                }
            }
            ":action" => {
                let action = parse_action(items, section.pos())?;
                if domain.action(&action.name).is_some() {
                    return Err(PddlError::DuplicateAction(action.name));
                }
                domain.actions.push(action);
            }
            ":functions" => return Err(PddlError::Unsupported("numeric fluents".into())),
            ":derived" => return Err(PddlError::Unsupported("derived predicates".into())),
            ":durative-action" => return Err(PddlError::Unsupported("durative actions".into())),
            other => {
                return Err(PddlError::syntax(
                    section.pos(),
                    format!("unknown section `{other}`"),
                ))
            }
        }
    }
    validate_domain(&domain)?;
    Ok(domain)
}

fn validate_domain(domain: &Domain) -> Result<(), PddlError> {
    let check_type = |t: &TypedName| match &t.ty {
        Some(ty) if !domain.has_type(ty) => Err(PddlError::UnknownType(ty.clone())),
        _ => Ok(()),
    };
    domain.types.iter().try_for_each(check_type)?;
    domain.constants.iter().try_for_each(check_type)?;
    for p in &domain.predicates {
        p.parameters.iter().try_for_each(check_type)?;
    }
    for a in &domain.actions {
        a.parameters.iter().try_for_each(check_type)?;
        let atoms = a
            .precondition
            .iter()
            .chain(a.effect.iter().map(|l| &l.atom));
        for atom in atoms {
            let pred = domain.predicate(&atom.predicate).ok_or_else(|| {
                PddlError::UnresolvedPredicate {
                    predicate: atom.predicate.clone(),
                    context: a.name.clone(),
                }
            })?;
            if pred.parameters.len() != atom.args.len() {
                return Err(PddlError::ArityMismatch {
                    predicate: atom.predicate.clone(),
                    expected: pred.parameters.len(),
                    found: atom.args.len(),
                });
            }
            for t in &atom.args {
                match t {
                    Term::Var(v) if !a.parameters.iter().any(|p| &p.name == v) => {
                        return Err(PddlError::UndeclaredVariable {
                            variable: v.clone(),
                            action: a.name.clone(),
                        })
                    }
                    Term::Const(c) if !domain.constants.iter().any(|k| &k.name == c) => {
                        return Err(PddlError::UndeclaredObject(c.clone()))
                    }
                    _ => {}
                }
            }
        }
    }
    Ok(())
}

/// Parses a problem and validates it against `domain`.
pub fn parse_problem(text: &str, domain: &Domain) -> Result<Problem, PddlError> {
    let root = sexpr::parse(text)?;
    let (name, sections) = split_define(&root, "problem")?;
    let mut domain_name = None;
    let mut objects = Vec::new();
    let mut init: Vec<GroundAtom> = Vec::new();
    let mut goal = Vec::new();
    for section in sections {
        let items = expect_list(section, "problem section")?;
        let head = section
            .head()
            .ok_or_else(|| PddlError::syntax(section.pos(), "empty section"))?;
        let body = &items[1..];
        match head {
            ":domain" => match body {
                [d] => domain_name = Some(expect_atom(d, "domain name")?.to_owned()),
                _ => {
                    return Err(PddlError::syntax(
                        section.pos(),
                        "expected (:domain <name>)",
                    ))
                }
            },
            ":requirements" => {
                parse_requirements(body)?;
            }
            ":objects" => {
                objects = parse_typed_list(body, false)?;
                check_unique(&objects, section.pos(), "object")?;
            }
            ":init" => {
                for a in body {
                    if let Some(h) = a.head().and_then(unsupported_connective) {
                        return Err(PddlError::Unsupported(format!("{h} in initial state")));
                    }
                    let atom = parse_ground_atom(a)?;
                    if !init.contains(&atom) {
                        init.push(atom);
                    }
                }
            }
            ":goal" => match body {
                [g] => {
                    let mut atoms = Vec::new();
                    parse_condition(g, &mut atoms)?;
                    goal = atoms
                        .into_iter()
                        .map(|a| {
                            let args = a
                                .args
                                .into_iter()
                                .map(|t| match t {
                                    Term::Const(c) => Ok(c),
                                    Term::Var(v) => Err(PddlError::syntax(
                                        g.pos(),
                                        format!("variable ?{v} in goal"),
                                    )),
                                })
                                .collect::<Result<_, _>>()?;
                            Ok(GroundAtom {
                                predicate: a.predicate,
                                args,
                            })
                        })
                        .collect::<Result<_, PddlError>>()?;
                }
                _ => {
                    return Err(PddlError::syntax(
                        section.pos(),
                        "expected (:goal <formula>)",
                    ))
                }
            },
            other => {
                return Err(PddlError::syntax(
                    section.pos(),
                    format!("unknown section `{other}`"),
                ))
            }
        }
    }
    let domain_name =
        domain_name.ok_or_else(|| PddlError::syntax(root.pos(), "missing (:domain ...)"))?;
    if domain_name != domain.name {
        return Err(PddlError::DomainMismatch {
            expected: domain.name.clone(),
            found: domain_name,
        });
    }
    let problem = Problem {
        name: name.to_owned(),
        domain_name,
        objects,
        init,
        goal,
    };
    validate_problem(&problem, domain)?;
    Ok(problem)
}

/// Checks a problem (parsed or constructed) against its domain.
pub fn validate_problem(problem: &Problem, domain: &Domain) -> Result<(), PddlError> {
    if problem.domain_name != domain.name {
        return Err(PddlError::DomainMismatch {
            expected: domain.name.clone(),
            found: problem.domain_name.clone(),
        });
    }
    if domain.declares_types() {
        for o in &problem.objects {
            if let Some(t) = &o.ty {
                if !domain.has_type(t) {
                    return Err(PddlError::UnknownType(t.clone()));
                }
            }
        }
    }
    if problem.goal.is_empty() {
        return Err(PddlError::EmptyGoal);
    }
    let declared = |n: &str| {
        problem.objects.iter().any(|o| o.name == n) || domain.constants.iter().any(|c| c.name == n)
    };
    for atom in problem.init.iter().chain(&problem.goal) {
        let pred =
            domain
                .predicate(&atom.predicate)
                .ok_or_else(|| PddlError::UnresolvedPredicate {
                    predicate: atom.predicate.clone(),
                    context: problem.name.clone(),
                })?;
        if pred.parameters.len() != atom.args.len() {
            return Err(PddlError::ArityMismatch {
                predicate: atom.predicate.clone(),
                expected: pred.parameters.len(),
                found: atom.args.len(),
            });
        }
        if let Some(bad) = atom.args.iter().find(|a| !declared(a)) {
            return Err(PddlError::UndeclaredObject(bad.clone()));
        }
    }
    Ok(())
}
