use std::collections::{BTreeSet, HashMap, HashSet};

use super::ast::*;
use super::lexer::{Token, TokenKind};
use super::ParseError;

/// Requirement flags this planner understands. Anything else is rejected.
pub const SUPPORTED_REQUIREMENTS: &[&str] =
    &[":strips", ":typing", ":negative-preconditions", ":equality", ":hierarchy", ":htn", ":method-preconditions"];

#[derive(Debug)]
enum SExpr<'t> {
    Atom(&'t Token),
    List { open: &'t Token, items: Vec<SExpr<'t>>, close: &'t Token },
}

impl<'t> SExpr<'t> {
    fn first_token(&self) -> &'t Token {
        match self {
            SExpr::Atom(t) => t,
            SExpr::List { open, .. } => open,
        }
    }

    fn describe(&self) -> String {
        match self {
            SExpr::Atom(t) => t.describe(),
            SExpr::List { .. } => "a list".to_string(),
        }
    }
}

fn syntax(at: &Token, expected: impl Into<String>, found: impl Into<String>) -> ParseError {
    ParseError::Syntax { line: at.line, column: at.column, expected: expected.into(), found: found.into() }
}

fn semantic(at: &Token, message: impl Into<String>) -> ParseError {
    ParseError::Semantic { line: at.line, column: at.column, message: message.into() }
}

fn read_sexpr(tokens: &[Token]) -> Result<SExpr<'_>, ParseError> {
    let Some(first) = tokens.first() else {
        return Err(ParseError::Syntax { line: 1, column: 1, expected: "`(`".into(), found: "end of input".into() });
    };
    if first.kind != TokenKind::LParen {
        return Err(syntax(first, "`(`", first.describe()));
    }
    let mut stack: Vec<(&Token, Vec<SExpr>)> = Vec::new();
    let mut done = None;
    for tok in tokens {
        if done.is_some() {
            return Err(syntax(tok, "end of input", tok.describe()));
        }
        match tok.kind {
            TokenKind::LParen => stack.push((tok, Vec::new())),
            TokenKind::RParen => {
                let (open, items) = stack.pop().expect("first token is `(`");
                let list = SExpr::List { open, items, close: tok };
                match stack.last_mut() {
                    Some((_, parent)) => parent.push(list),
                    None => done = Some(list),
                }
            }
            _ => stack.last_mut().expect("first token is `(`").1.push(SExpr::Atom(tok)),
        }
    }
    match done {
        Some(root) => Ok(root),
        None => {
            let (open, _) = stack.last().expect("unclosed list");
            Err(syntax(open, "`)` closing this list", "end of input"))
        }
    }
}

/// Sequential reader over the items of one list.
struct Cursor<'a, 't> {
    items: &'a [SExpr<'t>],
    pos: usize,
    close: &'t Token,
}

impl<'a, 't> Cursor<'a, 't> {
    fn of(expr: &'a SExpr<'t>, what: &str) -> Result<Self, ParseError> {
        match expr {
            SExpr::List { items, close, .. } => Ok(Cursor { items, pos: 0, close }),
            SExpr::Atom(t) => Err(syntax(t, format!("`(` starting {what}"), t.describe())),
        }
    }

    fn peek(&self) -> Option<&'a SExpr<'t>> {
        self.items.get(self.pos)
    }

    fn at_end(&self) -> bool {
        self.pos >= self.items.len()
    }

    fn here(&self) -> &'t Token {
        self.peek().map_or(self.close, SExpr::first_token)
    }

    fn next(&mut self, what: &str) -> Result<&'a SExpr<'t>, ParseError> {
        match self.items.get(self.pos) {
            Some(e) => {
                self.pos += 1;
                Ok(e)
            }
            None => Err(syntax(self.close, what, "`)`")),
        }
    }

    fn token(&mut self, kind: TokenKind, what: &str) -> Result<&'t Token, ParseError> {
        let here = self.here();
        match self.next(what)? {
            SExpr::Atom(t) if t.kind == kind => Ok(t),
            other => Err(syntax(here, what, other.describe())),
        }
    }

    fn ident(&mut self, what: &str) -> Result<&'t Token, ParseError> {
        self.token(TokenKind::Ident, what)
    }

    fn exact(&mut self, kind: TokenKind, text: &str) -> Result<&'t Token, ParseError> {
        let here = self.here();
        let what = format!("`{text}`");
        match self.next(&what)? {
            SExpr::Atom(t) if t.kind == kind && t.text == text => Ok(t),
            other => Err(syntax(here, what, other.describe())),
        }
    }

    fn list(&mut self, what: &str) -> Result<&'a SExpr<'t>, ParseError> {
        let here = self.here();
        match self.next(what)? {
            e @ SExpr::List { .. } => Ok(e),
            other => Err(syntax(here, what, other.describe())),
        }
    }

    fn end(&self) -> Result<(), ParseError> {
        match self.peek() {
            None => Ok(()),
            Some(e) => Err(syntax(e.first_token(), "`)`", e.describe())),
        }
    }
}

fn check_requirements(cur: &mut Cursor, out: &mut Vec<String>) -> Result<(), ParseError> {
    while !cur.at_end() {
        let tok = cur.token(TokenKind::Keyword, "requirement flag")?;
        if !SUPPORTED_REQUIREMENTS.contains(&tok.text.as_str()) {
            return Err(ParseError::UnsupportedRequirement {
                line: tok.line,
                column: tok.column,
                name: tok.text.clone(),
            });
        }
        out.push(tok.text.clone());
    }
    Ok(())
}

/// `a b - t c` style list. Returns each name token with its type token (None = object).
fn typed_list<'t>(
    cur: &mut Cursor<'_, 't>,
    kind: TokenKind,
) -> Result<Vec<(&'t Token, Option<&'t Token>)>, ParseError> {
    let what = if kind == TokenKind::Variable { "variable" } else { "name" };
    let mut out = Vec::new();
    let mut pending: Vec<&Token> = Vec::new();
    while !cur.at_end() {
        let here = cur.here();
        match cur.next(what)? {
            SExpr::Atom(t) if t.kind == TokenKind::Ident && t.text == "-" => {
                if pending.is_empty() {
                    return Err(syntax(t, what, "`-`"));
                }
                let ty = match cur.next("type name")? {
                    SExpr::Atom(ty) if ty.kind == TokenKind::Ident => *ty,
                    SExpr::List { open, .. } => return Err(semantic(open, "`either` types are not supported")),
                    SExpr::Atom(other) => return Err(syntax(other, "type name", other.describe())),
                };
                out.extend(pending.drain(..).map(|n| (n, Some(ty))));
            }
            SExpr::Atom(t) if t.kind == kind => pending.push(t),
            other => return Err(syntax(here, what, other.describe())),
        }
    }
    out.extend(pending.into_iter().map(|n| (n, None)));
    Ok(out)
}

fn type_name(ty: Option<&Token>) -> String {
    ty.map_or_else(|| "object".to_string(), |t| t.text.clone())
}

struct Scope<'d> {
    domain: &'d LiftedDomainAst,
    /// Declared variable names of the operator being parsed.
    variables: HashSet<String>,
    /// Names usable as constants: domain constants, plus problem objects.
    constants: &'d HashSet<String>,
}

impl Scope<'_> {
    fn term(&self, tok: &Token) -> Result<Term, ParseError> {
        match tok.kind {
            TokenKind::Variable => {
                if self.variables.contains(&tok.text) {
                    Ok(Term::Variable(tok.text.clone()))
                } else {
                    Err(semantic(tok, format!("undeclared variable `{}`", tok.text)))
                }
            }
            TokenKind::Ident => {
                if self.constants.contains(&tok.text) {
                    Ok(Term::Constant(tok.text.clone()))
                } else {
                    Err(semantic(tok, format!("undeclared constant `{}`", tok.text)))
                }
            }
            _ => Err(syntax(tok, "variable or constant", tok.describe())),
        }
    }

    fn terms(&self, cur: &mut Cursor) -> Result<(Vec<Term>, Vec<Token>), ParseError> {
        let mut args = Vec::new();
        let mut toks = Vec::new();
        while !cur.at_end() {
            let here = cur.here();
            match cur.next("argument")? {
                SExpr::Atom(t) => {
                    args.push(self.term(t)?);
                    toks.push((*t).clone());
                }
                other => return Err(syntax(here, "variable or constant", other.describe())),
            }
        }
        Ok((args, toks))
    }

    fn atom(&self, head: &Token, cur: &mut Cursor) -> Result<AtomAst, ParseError> {
        let Some(sig) = self.domain.predicate(&head.text) else {
            return Err(semantic(head, format!("undeclared predicate `{}`", head.text)));
        };
        let (args, _) = self.terms(cur)?;
        if args.len() != sig.parameters.len() {
            return Err(semantic(
                head,
                format!("predicate `{}` expects {} argument(s), got {}", head.text, sig.parameters.len(), args.len()),
            ));
        }
        Ok(AtomAst { predicate: head.text.clone(), args })
    }

    fn task_atom(&self, expr: &SExpr) -> Result<TaskAtomAst, ParseError> {
        let mut cur = Cursor::of(expr, "a task")?;
        let head = cur.ident("task name")?;
        let arity = if let Some(t) = self.domain.compound_task(&head.text) {
            t.parameters.len()
        } else if let Some(a) = self.domain.action(&head.text) {
            a.parameters.len()
        } else {
            return Err(semantic(head, format!("undeclared task `{}`", head.text)));
        };
        let (args, _) = self.terms(&mut cur)?;
        if args.len() != arity {
            return Err(semantic(
                head,
                format!("task `{}` expects {} argument(s), got {}", head.text, arity, args.len()),
            ));
        }
        Ok(TaskAtomAst { name: head.text.clone(), args })
    }

    fn condition(&self, expr: &SExpr, out: &mut Vec<ConditionLiteral>) -> Result<(), ParseError> {
        let mut cur = Cursor::of(expr, "a condition")?;
        if cur.at_end() {
            return Ok(());
        }
        let head = cur.ident("`and`, `not`, `=` or a predicate")?;
        match head.text.as_str() {
            "and" => {
                while !cur.at_end() {
                    let e = cur.next("condition")?;
                    self.condition(e, out)?;
                }
            }
            "not" => {
                let inner = cur.list("negated atom")?;
                cur.end()?;
                let mut icur = Cursor::of(inner, "an atom")?;
                let ihead = icur.ident("predicate or `=`")?;
                if ihead.text == "=" {
                    let (left, right) = self.equality(ihead, &mut icur)?;
                    out.push(ConditionLiteral::Equality { equal: false, left, right });
                } else {
                    reject_connective(ihead)?;
                    let atom = self.atom(ihead, &mut icur)?;
                    out.push(ConditionLiteral::Atom { positive: false, atom });
                }
            }
            "=" => {
                let (left, right) = self.equality(head, &mut cur)?;
                out.push(ConditionLiteral::Equality { equal: true, left, right });
            }
            _ => {
                reject_connective(head)?;
                let atom = self.atom(head, &mut cur)?;
                out.push(ConditionLiteral::Atom { positive: true, atom });
            }
        }
        Ok(())
    }

    fn equality(&self, head: &Token, cur: &mut Cursor) -> Result<(Term, Term), ParseError> {
        let (mut args, _) = self.terms(cur)?;
        if args.len() != 2 {
            return Err(semantic(head, format!("`=` expects 2 arguments, got {}", args.len())));
        }
        let right = args.pop().unwrap();
        let left = args.pop().unwrap();
        Ok((left, right))
    }

    fn effect(&self, expr: &SExpr, out: &mut Vec<EffectLiteral>) -> Result<(), ParseError> {
        let mut cur = Cursor::of(expr, "an effect")?;
        if cur.at_end() {
            return Ok(());
        }
        let head = cur.ident("`and`, `not` or a predicate")?;
        match head.text.as_str() {
            "and" => {
                while !cur.at_end() {
                    let e = cur.next("effect")?;
                    self.effect(e, out)?;
                }
            }
            "not" => {
                let inner = cur.list("negated atom")?;
                cur.end()?;
                let mut icur = Cursor::of(inner, "an atom")?;
                let ihead = icur.ident("predicate")?;
                reject_connective(ihead)?;
                let atom = self.atom(ihead, &mut icur)?;
                out.push(EffectLiteral { add: false, atom });
            }
            _ => {
                reject_connective(head)?;
                let atom = self.atom(head, &mut cur)?;
                out.push(EffectLiteral { add: true, atom });
            }
        }
        Ok(())
    }

    fn subtasks(&self, expr: &SExpr, out: &mut Vec<SubtaskAst>) -> Result<(), ParseError> {
        let mut cur = Cursor::of(expr, "subtasks")?;
        if cur.at_end() {
            return Ok(());
        }
        if let Some(SExpr::Atom(t)) = cur.peek() {
            if t.kind == TokenKind::Ident && t.text == "and" {
                cur.next("and")?;
                while !cur.at_end() {
                    let e = cur.next("subtask")?;
                    self.subtask(e, out)?;
                }
                return Ok(());
            }
        }
        self.subtask(expr, out)
    }

    fn subtask(&self, expr: &SExpr, out: &mut Vec<SubtaskAst>) -> Result<(), ParseError> {
        let SExpr::List { items, .. } = expr else {
            let t = expr.first_token();
            return Err(syntax(t, "`(` starting a subtask", t.describe()));
        };
        let labeled = items.len() == 2 && matches!(items[1], SExpr::List { .. });
        if labeled {
            let SExpr::Atom(label) = &items[0] else {
                let t = items[0].first_token();
                return Err(syntax(t, "subtask label", t.describe()));
            };
            if label.kind != TokenKind::Ident {
                return Err(syntax(label, "subtask label", label.describe()));
            }
            if out.iter().any(|s| s.label.as_deref() == Some(label.text.as_str())) {
                return Err(semantic(label, format!("duplicate subtask label `{}`", label.text)));
            }
            let task = self.task_atom(&items[1])?;
            out.push(SubtaskAst { label: Some(label.text.clone()), task });
        } else {
            let task = self.task_atom(expr)?;
            out.push(SubtaskAst { label: None, task });
        }
        Ok(())
    }
}

fn reject_connective(head: &Token) -> Result<(), ParseError> {
    match head.text.as_str() {
        "or" | "forall" | "exists" | "imply" | "when" | "and" | "not" => {
            Err(semantic(head, format!("`{}` is not supported; only conjunctions of literals are", head.text)))
        }
        _ => Ok(()),
    }
}

fn ordering(expr: &SExpr, subtasks: &[SubtaskAst], out: &mut Vec<(String, String)>) -> Result<(), ParseError> {
    let mut cur = Cursor::of(expr, "ordering constraints")?;
    if cur.at_end() {
        return Ok(());
    }
    if let Some(SExpr::Atom(t)) = cur.peek() {
        if t.text == "and" {
            cur.next("and")?;
            while !cur.at_end() {
                let e = cur.next("ordering constraint")?;
                ordering(e, subtasks, out)?;
            }
            return Ok(());
        }
    }
    let op = cur.ident("`<`")?;
    if op.text != "<" {
        return Err(syntax(op, "`<`", op.describe()));
    }
    let a = cur.ident("subtask label")?;
    let b = cur.ident("subtask label")?;
    cur.end()?;
    for l in [a, b] {
        if !subtasks.iter().any(|s| s.label.as_deref() == Some(l.text.as_str())) {
            return Err(semantic(l, format!("undeclared subtask label `{}`", l.text)));
        }
    }
    if a.text == b.text {
        return Err(semantic(b, format!("subtask `{}` cannot precede itself", a.text)));
    }
    out.push((a.text.clone(), b.text.clone()));
    Ok(())
}

fn check_type(domain: &LiftedDomainAst, ty: Option<&Token>) -> Result<String, ParseError> {
    if let Some(t) = ty {
        if t.text != "object" && !domain.types.iter().any(|(n, _)| *n == t.text) {
            return Err(semantic(t, format!("undeclared type `{}`", t.text)));
        }
    }
    Ok(type_name(ty))
}

fn parameters(domain: &LiftedDomainAst, cur: &mut Cursor) -> Result<Vec<TypedName>, ParseError> {
    let mut out: Vec<TypedName> = Vec::new();
    for (name, ty) in typed_list(cur, TokenKind::Variable)? {
        if out.iter().any(|p| p.name == name.text) {
            return Err(semantic(name, format!("duplicate parameter `{}`", name.text)));
        }
        out.push(TypedName { name: name.text.clone(), ty: check_type(domain, ty)? });
    }
    Ok(out)
}

/// Keyword/value pairs following an operator name, e.g. `:parameters (..) :task (..)`.
fn keyword_args<'a, 't>(
    cur: &mut Cursor<'a, 't>,
    allowed: &[&str],
) -> Result<Vec<(&'t Token, &'a SExpr<'t>)>, ParseError> {
    let mut out: Vec<(&Token, &SExpr)> = Vec::new();
    while !cur.at_end() {
        let kw = cur.token(TokenKind::Keyword, "keyword")?;
        if !allowed.contains(&kw.text.as_str()) {
            return Err(syntax(kw, format!("one of {}", allowed.join(" ")), kw.describe()));
        }
        if out.iter().any(|(k, _)| k.text == kw.text) {
            return Err(semantic(kw, format!("duplicate `{}`", kw.text)));
        }
        let value = cur.next("value")?;
        out.push((kw, value));
    }
    Ok(out)
}

fn lookup<'a, 't>(args: &[(&'t Token, &'a SExpr<'t>)], keys: &[&str]) -> Option<(&'t Token, &'a SExpr<'t>)> {
    args.iter().find(|(k, _)| keys.contains(&k.text.as_str())).copied()
}

const ORDERED_KEYS: &[&str] = &[":ordered-subtasks", ":ordered-tasks"];
const UNORDERED_KEYS: &[&str] = &[":subtasks", ":tasks"];

fn task_network(scope: &Scope, args: &[(&Token, &SExpr)]) -> Result<TaskNetworkAst, ParseError> {
    let ordered = lookup(args, ORDERED_KEYS);
    let unordered = lookup(args, UNORDERED_KEYS);
    let order = lookup(args, &[":ordering", ":order"]);
    if let Some((kw, expr)) = lookup(args, &[":constraints"]) {
        let mut c = Cursor::of(expr, "constraints")?;
        if !c.at_end() {
            let head = c.ident("`and`")?;
            if head.text != "and" || !c.at_end() {
                return Err(semantic(kw, "method constraints are not supported"));
            }
        }
    }
    let mut net = TaskNetworkAst::default();
    match (ordered, unordered) {
        (Some(_), Some((kw, _))) => {
            return Err(semantic(kw, "both ordered and unordered subtasks given"));
        }
        (Some((_, expr)), None) => {
            scope.subtasks(expr, &mut net.subtasks)?;
            net.totally_ordered = true;
            if let Some((kw, expr)) = order {
                let mut o = Vec::new();
                ordering(expr, &net.subtasks, &mut o)?;
                if !o.is_empty() {
                    return Err(semantic(kw, "ordered subtasks cannot carry extra ordering constraints"));
                }
            }
        }
        (None, Some((_, expr))) => {
            scope.subtasks(expr, &mut net.subtasks)?;
            if let Some((_, expr)) = order {
                ordering(expr, &net.subtasks, &mut net.ordering)?;
            }
        }
        (None, None) => {
            if let Some((kw, _)) = order {
                return Err(semantic(kw, "ordering given without subtasks"));
            }
            net.totally_ordered = true;
        }
    }
    Ok(net)
}

struct Sections<'a, 't> {
    sections: Vec<(&'t Token, &'a SExpr<'t>)>,
}

fn header<'a, 't>(root: &'a SExpr<'t>, kind: &str) -> Result<(&'t Token, Sections<'a, 't>), ParseError> {
    let mut cur = Cursor::of(root, "a definition")?;
    cur.exact(TokenKind::Ident, "define")?;
    let head = cur.list(&format!("`({kind} <name>)`"))?;
    let mut hcur = Cursor::of(head, kind)?;
    hcur.exact(TokenKind::Ident, kind)?;
    let name = hcur.ident(&format!("{kind} name"))?;
    hcur.end()?;
    let mut sections = Vec::new();
    while !cur.at_end() {
        let sec = cur.list("a section")?;
        let mut scur = Cursor::of(sec, "a section")?;
        let kw = scur.token(TokenKind::Keyword, "section keyword")?;
        sections.push((kw, sec));
    }
    Ok((name, Sections { sections }))
}

impl<'a, 't> Sections<'a, 't> {
    /// Sections with keyword `kw`, each with a cursor positioned after the keyword.
    fn all(&self, kw: &str) -> Vec<(&'t Token, Cursor<'a, 't>)> {
        self.sections
            .iter()
            .filter(|(k, _)| k.text == kw)
            .map(|(k, e)| {
                let mut c = Cursor::of(e, "section").unwrap();
                c.pos = 1;
                (*k, c)
            })
            .collect()
    }

    fn check_known(&self, known: &[&str]) -> Result<(), ParseError> {
        for (kw, _) in &self.sections {
            if !known.contains(&kw.text.as_str()) {
                return Err(semantic(kw, format!("unsupported section `{}`", kw.text)));
            }
        }
        Ok(())
    }

    fn at_most_once(&self, kw: &str) -> Result<Option<(&'t Token, Cursor<'a, 't>)>, ParseError> {
        let mut all = self.all(kw);
        if all.len() > 1 {
            return Err(semantic(all[1].0, format!("duplicate `{kw}` section")));
        }
        Ok(all.pop())
    }
}

/// Parses a domain definition.
pub fn parse_domain(tokens: &[Token]) -> Result<LiftedDomainAst, ParseError> {
    let root = read_sexpr(tokens)?;
    let (name, sections) = header(&root, "domain")?;
    sections.check_known(&[":requirements", ":types", ":constants", ":predicates", ":task", ":method", ":action"])?;
    let mut domain = LiftedDomainAst { name: name.text.clone(), ..Default::default() };

    if let Some((_, mut cur)) = sections.at_most_once(":requirements")? {
        check_requirements(&mut cur, &mut domain.requirements)?;
    }

    if let Some((_, mut cur)) = sections.at_most_once(":types")? {
        let entries = typed_list(&mut cur, TokenKind::Ident)?;
        let mut seen = HashSet::new();
        for (n, _) in &entries {
            if n.text == "object" {
                continue;
            }
            if !seen.insert(n.text.clone()) {
                return Err(semantic(n, format!("duplicate type `{}`", n.text)));
            }
        }
        for (n, parent) in &entries {
            if let Some(p) = parent {
                if p.text != "object" && !seen.contains(&p.text) {
                    return Err(semantic(p, format!("undeclared type `{}`", p.text)));
                }
            }
            if n.text != "object" {
                domain.types.push((n.text.clone(), type_name(*parent)));
            }
        }
        // Reject cycles in the hierarchy.
        for (n, _) in &entries {
            let mut cur = n.text.clone();
            let mut steps = 0;
            while let Some((_, p)) = domain.types.iter().find(|(t, _)| *t == cur) {
                cur = p.clone();
                steps += 1;
                if steps > domain.types.len() {
                    return Err(semantic(n, format!("type `{}` is its own ancestor", n.text)));
                }
            }
        }
    }

    let mut constant_names = HashSet::new();
    if let Some((_, mut cur)) = sections.at_most_once(":constants")? {
        for (n, ty) in typed_list(&mut cur, TokenKind::Ident)? {
            if !constant_names.insert(n.text.clone()) {
                return Err(semantic(n, format!("duplicate constant `{}`", n.text)));
            }
            domain.constants.push(TypedName { name: n.text.clone(), ty: check_type(&domain, ty)? });
        }
    }

    if let Some((_, mut cur)) = sections.at_most_once(":predicates")? {
        while !cur.at_end() {
            let p = cur.list("predicate declaration")?;
            let mut pc = Cursor::of(p, "predicate declaration")?;
            let pname = pc.ident("predicate name")?;
            if domain.predicate(&pname.text).is_some() {
                return Err(semantic(pname, format!("duplicate predicate `{}`", pname.text)));
            }
            let params = parameters(&domain, &mut pc)?;
            domain.predicates.push(Signature { name: pname.text.clone(), parameters: params });
        }
    }

    // Task and action signatures first, so bodies can refer to anything.
    let mut task_names: HashMap<String, ()> = HashMap::new();
    for (_, mut cur) in sections.all(":task") {
        let tname = cur.ident("task name")?;
        if task_names.insert(tname.text.clone(), ()).is_some() {
            return Err(semantic(tname, format!("duplicate task `{}`", tname.text)));
        }
        let args = keyword_args(&mut cur, &[":parameters"])?;
        let params = match lookup(&args, &[":parameters"]) {
            Some((_, e)) => parameters(&domain, &mut Cursor::of(e, "parameters")?)?,
            None => Vec::new(),
        };
        domain.compound_tasks.push(Signature { name: tname.text.clone(), parameters: params });
    }
    let action_sections = sections.all(":action");
    let mut action_args = Vec::new();
    for (_, mut cur) in action_sections {
        let aname = cur.ident("action name")?;
        if task_names.insert(aname.text.clone(), ()).is_some() {
            return Err(semantic(aname, format!("duplicate task or action `{}`", aname.text)));
        }
        let args = keyword_args(&mut cur, &[":parameters", ":precondition", ":effect"])?;
        let params = match lookup(&args, &[":parameters"]) {
            Some((_, e)) => parameters(&domain, &mut Cursor::of(e, "parameters")?)?,
            None => Vec::new(),
        };
        domain.actions.push(LiftedActionAst {
            name: aname.text.clone(),
            parameters: params,
            precondition: Vec::new(),
            effect: Vec::new(),
        });
        action_args.push(args);
    }

    for (i, args) in action_args.iter().enumerate() {
        let scope = Scope {
            domain: &domain,
            variables: domain.actions[i].parameters.iter().map(|p| p.name.clone()).collect(),
            constants: &constant_names,
        };
        let mut pre = Vec::new();
        if let Some((_, e)) = lookup(args, &[":precondition"]) {
            scope.condition(e, &mut pre)?;
        }
        let mut eff = Vec::new();
        if let Some((_, e)) = lookup(args, &[":effect"]) {
            scope.effect(e, &mut eff)?;
        }
        domain.actions[i].precondition = pre;
        domain.actions[i].effect = eff;
    }

    let mut methods = Vec::new();
    for (_, mut cur) in sections.all(":method") {
        let mname = cur.ident("method name")?;
        if methods.iter().any(|m: &LiftedMethodAst| m.name == mname.text) {
            return Err(semantic(mname, format!("duplicate method `{}`", mname.text)));
        }
        let args = keyword_args(
            &mut cur,
            &[
                ":parameters",
                ":task",
                ":precondition",
                ":ordered-subtasks",
                ":ordered-tasks",
                ":subtasks",
                ":tasks",
                ":ordering",
                ":order",
                ":constraints",
            ],
        )?;
        let params = match lookup(&args, &[":parameters"]) {
            Some((_, e)) => parameters(&domain, &mut Cursor::of(e, "parameters")?)?,
            None => Vec::new(),
        };
        let scope = Scope {
            domain: &domain,
            variables: params.iter().map(|p| p.name.clone()).collect(),
            constants: &constant_names,
        };
        let Some((_, task_expr)) = lookup(&args, &[":task"]) else {
            return Err(syntax(cur.close, "`:task`", "`)`"));
        };
        let task = scope.task_atom(task_expr)?;
        if domain.compound_task(&task.name).is_none() {
            return Err(semantic(
                task_expr.first_token(),
                format!("method `{}` decomposes primitive task `{}`", mname.text, task.name),
            ));
        }
        let mut pre = Vec::new();
        if let Some((_, e)) = lookup(&args, &[":precondition"]) {
            scope.condition(e, &mut pre)?;
        }
        let network = task_network(&scope, &args)?;
        methods.push(LiftedMethodAst {
            name: mname.text.clone(),
            parameters: params,
            task,
            precondition: pre,
            network,
        });
    }
    domain.methods = methods;
    Ok(domain)
}

/// Parses a problem definition against an already parsed domain.
pub fn parse_problem(tokens: &[Token], domain: &LiftedDomainAst) -> Result<LiftedProblemAst, ParseError> {
    let root = read_sexpr(tokens)?;
    let (name, sections) = header(&root, "problem")?;
    sections.check_known(&[":domain", ":requirements", ":objects", ":htn", ":init", ":goal"])?;
    let mut problem = LiftedProblemAst { name: name.text.clone(), ..Default::default() };

    let Some((_, mut cur)) = sections.at_most_once(":domain")? else {
        return Err(syntax(name, "`(:domain <name>)` section", "no such section"));
    };
    let dname = cur.ident("domain name")?;
    cur.end()?;
    if dname.text != domain.name {
        return Err(ParseError::DomainMismatch {
            line: dname.line,
            column: dname.column,
            expected: domain.name.clone(),
            found: dname.text.clone(),
        });
    }
    problem.domain_name = dname.text.clone();

    if let Some((_, mut cur)) = sections.at_most_once(":requirements")? {
        check_requirements(&mut cur, &mut problem.requirements)?;
    }

    let mut names: HashSet<String> = domain.constants.iter().map(|c| c.name.clone()).collect();
    if let Some((_, mut cur)) = sections.at_most_once(":objects")? {
        for (n, ty) in typed_list(&mut cur, TokenKind::Ident)? {
            if !names.insert(n.text.clone()) {
                return Err(semantic(n, format!("duplicate object `{}`", n.text)));
            }
            problem.objects.push(TypedName { name: n.text.clone(), ty: check_type(domain, ty)? });
        }
    }

    let scope = Scope { domain, variables: HashSet::new(), constants: &names };

    if let Some((_, mut cur)) = sections.at_most_once(":htn")? {
        let args = keyword_args(
            &mut cur,
            &[
                ":parameters",
                ":ordered-subtasks",
                ":ordered-tasks",
                ":subtasks",
                ":tasks",
                ":ordering",
                ":order",
                ":constraints",
            ],
        )?;
        if let Some((kw, e)) = lookup(&args, &[":parameters"]) {
            let c = Cursor::of(e, "parameters")?;
            if !c.at_end() {
                return Err(semantic(kw, "initial task network parameters are not supported"));
            }
        }
        problem.initial_network = task_network(&scope, &args)?;
    } else {
        problem.initial_network.totally_ordered = true;
    }

    if let Some((_, mut cur)) = sections.at_most_once(":init")? {
        let mut seen = BTreeSet::new();
        while !cur.at_end() {
            let a = cur.list("ground atom")?;
            let mut ac = Cursor::of(a, "ground atom")?;
            let head = ac.ident("predicate")?;
            if head.text == "not" || head.text == "=" {
                return Err(semantic(head, "initial state holds positive atoms only"));
            }
            let atom = scope.atom(head, &mut ac)?;
            let args: Vec<String> = atom.args.iter().map(|t| t.name().to_string()).collect();
            if seen.insert((atom.predicate.clone(), args.clone())) {
                problem.init.push(GroundAtomAst { predicate: atom.predicate, args });
            }
        }
    }

    if let Some((kw, cur)) = sections.at_most_once(":goal")? {
        // Only an empty goal is accepted; HTN problems are defined by their network.
        let mut c = cur;
        let e = c.next("goal")?;
        let mut gc = Cursor::of(e, "goal")?;
        if !gc.at_end() {
            let head = gc.ident("`and`")?;
            if head.text != "and" || !gc.at_end() {
                return Err(semantic(kw, "state goals are not supported"));
            }
        }
        c.end()?;
    }

    Ok(problem)
}
