//! Writes syntax trees back out as HDDL text.

use std::fmt::{self, Display, Formatter, Write};

use super::ast::*;

fn typed(list: &[TypedName]) -> String {
    list.iter().map(|t| format!("{} - {}", t.name, t.ty)).collect::<Vec<_>>().join(" ")
}

fn terms(args: &[Term]) -> String {
    args.iter().map(|t| format!(" {}", t.name())).collect()
}

fn atom(a: &AtomAst) -> String {
    format!("({}{})", a.predicate, terms(&a.args))
}

fn condition(lits: &[ConditionLiteral]) -> String {
    let parts: Vec<String> = lits
        .iter()
        .map(|l| match l {
            ConditionLiteral::Atom { positive: true, atom: a } => atom(a),
            ConditionLiteral::Atom { positive: false, atom: a } => format!("(not {})", atom(a)),
            ConditionLiteral::Equality { equal, left, right } => {
                let eq = format!("(= {} {})", left.name(), right.name());
                if *equal {
                    eq
                } else {
                    format!("(not {eq})")
                }
            }
        })
        .collect();
    format!("(and {})", parts.join(" "))
}

fn network(out: &mut String, net: &TaskNetworkAst) -> fmt::Result {
    let key = if net.totally_ordered { ":ordered-subtasks" } else { ":subtasks" };
    let subs: Vec<String> = net
        .subtasks
        .iter()
        .map(|s| {
            let t = format!("({}{})", s.task.name, terms(&s.task.args));
            match &s.label {
                Some(l) => format!("({l} {t})"),
                None => t,
            }
        })
        .collect();
    write!(out, "\n    {key} (and {})", subs.join(" "))?;
    if !net.ordering.is_empty() {
        let ord: Vec<String> = net.ordering.iter().map(|(a, b)| format!("(< {a} {b})")).collect();
        write!(out, "\n    :ordering (and {})", ord.join(" "))?;
    }
    Ok(())
}

impl Display for LiftedDomainAst {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        writeln!(s, "(define (domain {})", self.name)?;
        if !self.requirements.is_empty() {
            writeln!(s, "  (:requirements {})", self.requirements.join(" "))?;
        }
        if !self.types.is_empty() {
            let ts: Vec<String> = self.types.iter().map(|(t, p)| format!("{t} - {p}")).collect();
            writeln!(s, "  (:types {})", ts.join(" "))?;
        }
        if !self.constants.is_empty() {
            writeln!(s, "  (:constants {})", typed(&self.constants))?;
        }
        writeln!(s, "  (:predicates")?;
        for p in &self.predicates {
            writeln!(s, "    ({} {})", p.name, typed(&p.parameters))?;
        }
        writeln!(s, "  )")?;
        for t in &self.compound_tasks {
            writeln!(s, "  (:task {} :parameters ({}))", t.name, typed(&t.parameters))?;
        }
        for m in &self.methods {
            write!(s, "  (:method {}\n    :parameters ({})", m.name, typed(&m.parameters))?;
            write!(s, "\n    :task ({}{})", m.task.name, terms(&m.task.args))?;
            write!(s, "\n    :precondition {}", condition(&m.precondition))?;
            network(&mut s, &m.network)?;
            writeln!(s, ")")?;
        }
        for a in &self.actions {
            write!(s, "  (:action {}\n    :parameters ({})", a.name, typed(&a.parameters))?;
            write!(s, "\n    :precondition {}", condition(&a.precondition))?;
            let eff: Vec<String> = a
                .effect
                .iter()
                .map(|e| if e.add { atom(&e.atom) } else { format!("(not {})", atom(&e.atom)) })
                .collect();
            writeln!(s, "\n    :effect (and {}))", eff.join(" "))?;
        }
        writeln!(s, ")")?;
        f.write_str(&s)
    }
}

impl Display for LiftedProblemAst {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        writeln!(s, "(define (problem {})", self.name)?;
        writeln!(s, "  (:domain {})", self.domain_name)?;
        if !self.requirements.is_empty() {
            writeln!(s, "  (:requirements {})", self.requirements.join(" "))?;
        }
        writeln!(s, "  (:objects {})", typed(&self.objects))?;
        write!(s, "  (:htn\n    :parameters ()")?;
        network(&mut s, &self.initial_network)?;
        writeln!(s, ")")?;
        let init: Vec<String> = self
            .init
            .iter()
            .map(|a| {
                let args: String = a.args.iter().map(|x| format!(" {x}")).collect();
                format!("({}{})", a.predicate, args)
            })
            .collect();
        writeln!(s, "  (:init {}))", init.join(" "))?;
        f.write_str(&s)
    }
}
