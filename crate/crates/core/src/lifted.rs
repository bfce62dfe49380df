//! Integer-indexed lifted model.
//!
//! [`encode_integers`] interns every symbol of a parsed domain/problem pair
//! into dense per-category ids (declaration order) and rewrites operators
//! into id form. [`classify_inertia`] scans action effects,
//! [`infer_parameter_domains`] narrows parameter domains with static
//! predicates, and [`simplify`] folds fully ground static literals.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt::Write;
use std::sync::Arc;

use crate::hddl::{self, ConditionLiteral, LiftedDomainAst, LiftedProblemAst};

pub type TypeId = usize;
pub type ObjectId = usize;
pub type PredicateId = usize;
pub type PrimitiveId = usize;
pub type CompoundId = usize;
pub type MethodId = usize;

/// Append-only bijection between names and dense ids.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NameTable {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl NameTable {
    pub fn intern(&mut self, name: &str) -> usize {
        if let Some(&id) = self.index.get(name) {
            return id;
        }
        let id = self.names.len();
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), id);
        id
    }

    pub fn id(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn name(&self, id: usize) -> &str {
        &self.names[id]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &str)> {
        self.names.iter().enumerate().map(|(i, n)| (i, n.as_str()))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SymbolTable {
    /// `object` is always type 0.
    pub types: NameTable,
    /// Domain constants first, then problem objects.
    pub objects: NameTable,
    pub predicates: NameTable,
    /// One primitive task per action, same id.
    pub primitive_tasks: NameTable,
    pub compound_tasks: NameTable,
    pub methods: NameTable,
    /// Reflexive: every type is its own subtype.
    pub subtypes: Vec<BTreeSet<TypeId>>,
    /// Objects of each type, including those of its subtypes.
    pub members: Vec<BTreeSet<ObjectId>>,
    pub object_types: Vec<TypeId>,
}

impl SymbolTable {
    pub fn task_name(&self, task: TaskRef) -> &str {
        match task {
            TaskRef::Primitive(id) => self.primitive_tasks.name(id),
            TaskRef::Compound(id) => self.compound_tasks.name(id),
        }
    }

    pub fn object_list(&self, args: &[ObjectId]) -> String {
        args.iter().map(|&o| format!(" {}", self.objects.name(o))).collect()
    }

    pub fn atom_string(&self, atom: &GroundAtom) -> String {
        format!("({}{})", self.predicates.name(atom.predicate), self.object_list(&atom.args))
    }

    pub fn task_string(&self, task: &GroundTask) -> String {
        format!("({}{})", self.task_name(task.task), self.object_list(&task.args))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    /// Index into the operator's parameter list.
    Param(usize),
    Object(ObjectId),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Atom {
    pub predicate: PredicateId,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn is_ground(&self) -> bool {
        self.args.iter().all(|t| matches!(t, Term::Object(_)))
    }

    /// Substitutes a full binding.
    pub fn ground(&self, binding: &[ObjectId]) -> GroundAtom {
        GroundAtom { predicate: self.predicate, args: self.args.iter().map(|t| resolve(*t, binding)).collect() }
    }
}

pub fn resolve(term: Term, binding: &[ObjectId]) -> ObjectId {
    match term {
        Term::Param(i) => binding[i],
        Term::Object(o) => o,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Literal {
    pub positive: bool,
    pub atom: Atom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Equality {
    pub equal: bool,
    pub left: Term,
    pub right: Term,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TaskRef {
    Primitive(PrimitiveId),
    Compound(CompoundId),
}

impl TaskRef {
    pub fn is_primitive(self) -> bool {
        matches!(self, TaskRef::Primitive(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TaskAtom {
    pub task: TaskRef,
    pub args: Vec<Term>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroundAtom {
    pub predicate: PredicateId,
    pub args: Vec<ObjectId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroundTask {
    pub task: TaskRef,
    pub args: Vec<ObjectId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Action {
    pub name: PrimitiveId,
    pub param_types: Vec<TypeId>,
    /// Permitted objects per parameter, ascending.
    pub domains: Vec<Vec<ObjectId>>,
    pub precondition: Vec<Literal>,
    pub equalities: Vec<Equality>,
    pub add: Vec<Atom>,
    pub del: Vec<Atom>,
    /// Set when a static literal folded to false.
    pub uninstantiable: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Method {
    pub name: MethodId,
    pub param_types: Vec<TypeId>,
    pub domains: Vec<Vec<ObjectId>>,
    pub task: CompoundId,
    pub task_args: Vec<Term>,
    pub precondition: Vec<Literal>,
    pub equalities: Vec<Equality>,
    pub subtasks: Vec<TaskAtom>,
    /// Before-pairs over subtask positions.
    pub ordering: Vec<(usize, usize)>,
    pub totally_ordered: bool,
    pub uninstantiable: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct InitialNetwork {
    pub tasks: Vec<GroundTask>,
    pub ordering: Vec<(usize, usize)>,
    pub totally_ordered: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexedModel {
    pub symbols: Arc<SymbolTable>,
    pub predicate_arity: Vec<usize>,
    pub compound_params: Vec<Vec<TypeId>>,
    pub actions: Vec<Action>,
    pub methods: Vec<Method>,
    pub init: Vec<GroundAtom>,
    pub initial_network: InitialNetwork,
}

struct Encoder<'a> {
    symbols: &'a SymbolTable,
}

impl Encoder<'_> {
    fn term(&self, t: &hddl::Term, params: &[String]) -> Term {
        match t {
            hddl::Term::Variable(v) => Term::Param(params.iter().position(|p| p == v).expect("variables are declared")),
            hddl::Term::Constant(c) => Term::Object(self.symbols.objects.id(c).expect("constants are declared")),
        }
    }

    fn atom(&self, a: &hddl::AtomAst, params: &[String]) -> Atom {
        Atom {
            predicate: self.symbols.predicates.id(&a.predicate).expect("predicates are declared"),
            args: a.args.iter().map(|t| self.term(t, params)).collect(),
        }
    }

    fn task_ref(&self, name: &str) -> TaskRef {
        match self.symbols.primitive_tasks.id(name) {
            Some(id) => TaskRef::Primitive(id),
            None => TaskRef::Compound(self.symbols.compound_tasks.id(name).expect("tasks are declared")),
        }
    }

    fn condition(&self, lits: &[ConditionLiteral], params: &[String]) -> (Vec<Literal>, Vec<Equality>) {
        let mut literals = Vec::new();
        let mut equalities = Vec::new();
        for l in lits {
            match l {
                ConditionLiteral::Atom { positive, atom } => {
                    literals.push(Literal { positive: *positive, atom: self.atom(atom, params) })
                }
                ConditionLiteral::Equality { equal, left, right } => equalities.push(Equality {
                    equal: *equal,
                    left: self.term(left, params),
                    right: self.term(right, params),
                }),
            }
        }
        (literals, equalities)
    }

    fn params(&self, ps: &[hddl::TypedName]) -> (Vec<String>, Vec<TypeId>, Vec<Vec<ObjectId>>) {
        let names = ps.iter().map(|p| p.name.clone()).collect();
        let types: Vec<TypeId> = ps.iter().map(|p| self.symbols.types.id(&p.ty).expect("types are declared")).collect();
        let domains = types.iter().map(|&t| self.symbols.members[t].iter().copied().collect()).collect();
        (names, types, domains)
    }
}

/// Interns every symbol and rewrites the model into id form.
pub fn encode_integers(domain: &LiftedDomainAst, problem: &LiftedProblemAst) -> IndexedModel {
    let mut sym = SymbolTable::default();
    sym.types.intern("object");
    for (t, _) in &domain.types {
        sym.types.intern(t);
    }
    let parent: Vec<Option<TypeId>> = (0..sym.types.len())
        .map(|t| {
            domain
                .types
                .iter()
                .find(|(n, _)| n == sym.types.name(t))
                .map(|(_, p)| sym.types.id(p).expect("parent types are declared"))
        })
        .collect();
    sym.subtypes = vec![BTreeSet::new(); sym.types.len()];
    for t in 0..sym.types.len() {
        let mut cur = Some(t);
        let mut guard = 0;
        while let Some(c) = cur {
            sym.subtypes[c].insert(t);
            cur = parent[c].filter(|&p| p != c);
            guard += 1;
            if guard > sym.types.len() {
                break;
            }
        }
        sym.subtypes[0].insert(t);
    }

    sym.members = vec![BTreeSet::new(); sym.types.len()];
    for tn in domain.constants.iter().chain(&problem.objects) {
        let o = sym.objects.intern(&tn.name);
        let ty = sym.types.id(&tn.ty).expect("object types are declared");
        sym.object_types.push(ty);
        for (sup, subs) in sym.subtypes.iter().enumerate() {
            if subs.contains(&ty) {
                sym.members[sup].insert(o);
            }
        }
    }
    let mut predicate_arity = Vec::new();
    for p in &domain.predicates {
        sym.predicates.intern(&p.name);
        predicate_arity.push(p.parameters.len());
    }
    for a in &domain.actions {
        sym.primitive_tasks.intern(&a.name);
    }
    for t in &domain.compound_tasks {
        sym.compound_tasks.intern(&t.name);
    }
    for m in &domain.methods {
        sym.methods.intern(&m.name);
    }

    let enc = Encoder { symbols: &sym };
    let compound_params = domain
        .compound_tasks
        .iter()
        .map(|t| t.parameters.iter().map(|p| sym.types.id(&p.ty).unwrap()).collect())
        .collect();

    let actions = domain
        .actions
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let (names, param_types, domains) = enc.params(&a.parameters);
            let (precondition, equalities) = enc.condition(&a.precondition, &names);
            let mut add = Vec::new();
            let mut del = Vec::new();
            for e in &a.effect {
                let atom = enc.atom(&e.atom, &names);
                if e.add {
                    add.push(atom)
                } else {
                    del.push(atom)
                }
            }
            Action { name: i, param_types, domains, precondition, equalities, add, del, uninstantiable: false }
        })
        .collect();

    let methods = domain
        .methods
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let (names, param_types, domains) = enc.params(&m.parameters);
            let (precondition, equalities) = enc.condition(&m.precondition, &names);
            let TaskRef::Compound(task) = enc.task_ref(&m.task.name) else {
                unreachable!("methods decompose compound tasks")
            };
            Method {
                name: i,
                param_types,
                domains,
                task,
                task_args: m.task.args.iter().map(|t| enc.term(t, &names)).collect(),
                precondition,
                equalities,
                subtasks: m
                    .network
                    .subtasks
                    .iter()
                    .map(|s| TaskAtom {
                        task: enc.task_ref(&s.task.name),
                        args: s.task.args.iter().map(|t| enc.term(t, &names)).collect(),
                    })
                    .collect(),
                ordering: m.network.ordering_indices(),
                totally_ordered: m.network.totally_ordered,
                uninstantiable: false,
            }
        })
        .collect();

    let init = problem
        .init
        .iter()
        .map(|a| GroundAtom {
            predicate: sym.predicates.id(&a.predicate).unwrap(),
            args: a.args.iter().map(|o| sym.objects.id(o).unwrap()).collect(),
        })
        .collect();

    let net = &problem.initial_network;
    let initial_network = InitialNetwork {
        tasks: net
            .subtasks
            .iter()
            .map(|s| GroundTask {
                task: enc.task_ref(&s.task.name),
                args: s.task.args.iter().map(|t| sym.objects.id(t.name()).unwrap()).collect(),
            })
            .collect(),
        ordering: net.ordering_indices(),
        totally_ordered: net.totally_ordered,
    };

    IndexedModel { symbols: Arc::new(sym), predicate_arity, compound_params, actions, methods, init, initial_network }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InertiaClass {
    /// Added and deleted by some action.
    Fluent,
    /// Never added; may be deleted.
    PositiveInertia,
    /// Never deleted; may be added.
    NegativeInertia,
    /// Never affected by any action (static).
    FullInertia,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Inertia {
    pub classes: Vec<InertiaClass>,
}

impl Inertia {
    pub fn class(&self, predicate: PredicateId) -> InertiaClass {
        self.classes[predicate]
    }

    pub fn is_static(&self, predicate: PredicateId) -> bool {
        self.classes[predicate] == InertiaClass::FullInertia
    }
}

/// Classifies each predicate by which action effects mention it.
pub fn classify_inertia(model: &IndexedModel) -> Inertia {
    let n = model.symbols.predicates.len();
    let mut added = vec![false; n];
    let mut deleted = vec![false; n];
    for a in &model.actions {
        for atom in &a.add {
            added[atom.predicate] = true;
        }
        for atom in &a.del {
            deleted[atom.predicate] = true;
        }
    }
    let classes = (0..n)
        .map(|p| match (added[p], deleted[p]) {
            (false, false) => InertiaClass::FullInertia,
            (false, true) => InertiaClass::PositiveInertia,
            (true, false) => InertiaClass::NegativeInertia,
            (true, true) => InertiaClass::Fluent,
        })
        .collect();
    Inertia { classes }
}

/// Objects that can fill parameter `param` given static atom `atom` must hold.
fn static_support(atom: &Atom, param: usize, init: &[GroundAtom]) -> BTreeSet<ObjectId> {
    let mut out = BTreeSet::new();
    'tuples: for fact in init.iter().filter(|f| f.predicate == atom.predicate) {
        let mut seen: HashMap<usize, ObjectId> = HashMap::new();
        for (t, &o) in atom.args.iter().zip(&fact.args) {
            match *t {
                Term::Object(c) if c != o => continue 'tuples,
                Term::Param(p) if *seen.entry(p).or_insert(o) != o => continue 'tuples,
                _ => {}
            }
        }
        out.insert(seen[&param]);
    }
    out
}

fn restrict(domains: &mut [Vec<ObjectId>], literals: &[Literal], inertia: &Inertia, init: &[GroundAtom]) {
    for lit in literals.iter().filter(|l| l.positive && inertia.is_static(l.atom.predicate)) {
        let params: BTreeSet<usize> =
            lit.atom.args.iter().filter_map(|t| if let Term::Param(p) = t { Some(*p) } else { None }).collect();
        for p in params {
            let support = static_support(&lit.atom, p, init);
            domains[p].retain(|o| support.contains(o));
        }
    }
}

/// Narrows parameter domains by positive static preconditions. Domains never grow.
pub fn infer_parameter_domains(mut model: IndexedModel, inertia: &Inertia) -> IndexedModel {
    for a in &mut model.actions {
        restrict(&mut a.domains, &a.precondition, inertia, &model.init);
    }
    for m in &mut model.methods {
        restrict(&mut m.domains, &m.precondition, inertia, &model.init);
    }
    model
}

enum Fold {
    Keep,
    True,
    False,
}

fn fold_literal(lit: &Literal, inertia: &Inertia, init: &HashSet<GroundAtom>) -> Fold {
    if !inertia.is_static(lit.atom.predicate) || !lit.atom.is_ground() {
        return Fold::Keep;
    }
    let holds = init.contains(&lit.atom.ground(&[]));
    if holds == lit.positive {
        Fold::True
    } else {
        Fold::False
    }
}

fn fold_equality(eq: &Equality) -> Fold {
    match (eq.left, eq.right) {
        (Term::Object(a), Term::Object(b)) => {
            if (a == b) == eq.equal {
                Fold::True
            } else {
                Fold::False
            }
        }
        (Term::Param(a), Term::Param(b)) if a == b => {
            if eq.equal {
                Fold::True
            } else {
                Fold::False
            }
        }
        _ => Fold::Keep,
    }
}

fn simplify_condition(
    literals: &mut Vec<Literal>,
    equalities: &mut Vec<Equality>,
    inertia: &Inertia,
    init: &HashSet<GroundAtom>,
) -> bool {
    let mut satisfiable = true;
    literals.retain(|l| match fold_literal(l, inertia, init) {
        Fold::Keep => true,
        Fold::True => false,
        Fold::False => {
            satisfiable = false;
            false
        }
    });
    equalities.retain(|e| match fold_equality(e) {
        Fold::Keep => true,
        Fold::True => false,
        Fold::False => {
            satisfiable = false;
            false
        }
    });
    satisfiable
}

/// Folds ground static literals and trivial equalities against the initial state.
///
/// Operators left with a false conjunct are marked uninstantiable. Fluent
/// literals are never touched.
pub fn simplify(mut model: IndexedModel, inertia: &Inertia) -> IndexedModel {
    let init: HashSet<GroundAtom> = model.init.iter().cloned().collect();
    for a in &mut model.actions {
        if !simplify_condition(&mut a.precondition, &mut a.equalities, inertia, &init) {
            a.uninstantiable = true;
        }
    }
    for m in &mut model.methods {
        if !simplify_condition(&mut m.precondition, &mut m.equalities, inertia, &init) {
            m.uninstantiable = true;
        }
    }
    model
}

fn term_str(sym: &SymbolTable, t: Term) -> String {
    match t {
        Term::Param(p) => format!("?{p}"),
        Term::Object(o) => sym.objects.name(o).to_string(),
    }
}

fn atom_str(sym: &SymbolTable, a: &Atom) -> String {
    let args: String = a.args.iter().map(|&t| format!(" {}", term_str(sym, t))).collect();
    format!("(p{}{})", a.predicate, args)
}

/// Human-readable dump: name tables followed by operators in id form.
pub fn dump_lifted(model: &IndexedModel) -> String {
    let sym = &model.symbols;
    let mut s = String::new();
    let table = |s: &mut String, title: &str, t: &NameTable| {
        writeln!(s, "{title} ({}):", t.len()).unwrap();
        for (i, n) in t.iter() {
            writeln!(s, "  {i} {n}").unwrap();
        }
    };
    table(&mut s, "types", &sym.types);
    for (t, subs) in sym.subtypes.iter().enumerate() {
        writeln!(s, "  subtypes {t}: {subs:?} members: {:?}", sym.members[t]).unwrap();
    }
    table(&mut s, "objects", &sym.objects);
    table(&mut s, "predicates", &sym.predicates);
    table(&mut s, "primitive tasks", &sym.primitive_tasks);
    table(&mut s, "compound tasks", &sym.compound_tasks);
    table(&mut s, "methods", &sym.methods);
    let lits = |ls: &[Literal], eqs: &[Equality]| -> String {
        let mut parts: Vec<String> =
            ls.iter().map(|l| format!("{}{}", if l.positive { "" } else { "!" }, atom_str(sym, &l.atom))).collect();
        parts.extend(eqs.iter().map(|e| {
            format!("{}{}{}", term_str(sym, e.left), if e.equal { "=" } else { "!=" }, term_str(sym, e.right))
        }));
        parts.join(" ")
    };
    let task = |t: TaskRef| match t {
        TaskRef::Primitive(i) => format!("a{i}"),
        TaskRef::Compound(i) => format!("c{i}"),
    };
    writeln!(s, "actions ({}):", model.actions.len()).unwrap();
    for a in &model.actions {
        writeln!(
            s,
            "  a{} params {:?} domains {:?}{}",
            a.name,
            a.param_types,
            a.domains,
            if a.uninstantiable { " UNINSTANTIABLE" } else { "" }
        )
        .unwrap();
        writeln!(s, "    pre: {}", lits(&a.precondition, &a.equalities)).unwrap();
        let add: Vec<String> = a.add.iter().map(|x| atom_str(sym, x)).collect();
        let del: Vec<String> = a.del.iter().map(|x| atom_str(sym, x)).collect();
        writeln!(s, "    add: {}", add.join(" ")).unwrap();
        writeln!(s, "    del: {}", del.join(" ")).unwrap();
    }
    writeln!(s, "methods ({}):", model.methods.len()).unwrap();
    for m in &model.methods {
        let args: String = m.task_args.iter().map(|&t| format!(" {}", term_str(sym, t))).collect();
        writeln!(
            s,
            "  m{} task (c{}{}) params {:?} domains {:?}{}",
            m.name,
            m.task,
            args,
            m.param_types,
            m.domains,
            if m.uninstantiable { " UNINSTANTIABLE" } else { "" }
        )
        .unwrap();
        writeln!(s, "    pre: {}", lits(&m.precondition, &m.equalities)).unwrap();
        let subs: Vec<String> = m
            .subtasks
            .iter()
            .map(|st| {
                let a: String = st.args.iter().map(|&t| format!(" {}", term_str(sym, t))).collect();
                format!("({}{})", task(st.task), a)
            })
            .collect();
        writeln!(s, "    subtasks{}: {}", if m.totally_ordered { " (ordered)" } else { "" }, subs.join(" ")).unwrap();
        writeln!(s, "    ordering: {:?}", m.ordering).unwrap();
    }
    let init: Vec<String> = model.init.iter().map(|a| sym.atom_string(a)).collect();
    writeln!(s, "init: {}", init.join(" ")).unwrap();
    let net: Vec<String> = model.initial_network.tasks.iter().map(|t| sym.task_string(t)).collect();
    writeln!(s, "network{}: {}", if model.initial_network.totally_ordered { " (ordered)" } else { "" }, net.join(" "))
        .unwrap();
    writeln!(s, "network ordering: {:?}", model.initial_network.ordering).unwrap();
    s
}
