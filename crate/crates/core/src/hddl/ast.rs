//! Lifted syntax trees. All symbols are lower case; variables keep their `?`.

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TypedName {
    pub name: String,
    pub ty: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Variable(String),
    Constant(String),
}

impl Term {
    pub fn name(&self) -> &str {
        match self {
            Term::Variable(n) | Term::Constant(n) => n,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AtomAst {
    pub predicate: String,
    pub args: Vec<Term>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ConditionLiteral {
    Atom {
        positive: bool,
        atom: AtomAst,
    },
    /// `(= a b)` when `equal`, `(not (= a b))` otherwise.
    Equality {
        equal: bool,
        left: Term,
        right: Term,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EffectLiteral {
    pub add: bool,
    pub atom: AtomAst,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TaskAtomAst {
    pub name: String,
    pub args: Vec<Term>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SubtaskAst {
    pub label: Option<String>,
    pub task: TaskAtomAst,
}

/// Subtasks with before-pairs over their labels.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct TaskNetworkAst {
    pub subtasks: Vec<SubtaskAst>,
    pub ordering: Vec<(String, String)>,
    pub totally_ordered: bool,
}

impl TaskNetworkAst {
    /// Before-pairs as subtask positions.
    pub fn ordering_indices(&self) -> Vec<(usize, usize)> {
        let pos = |label: &str| {
            self.subtasks
                .iter()
                .position(|s| s.label.as_deref() == Some(label))
                .expect("ordering labels are validated by the parser")
        };
        self.ordering.iter().map(|(a, b)| (pos(a), pos(b))).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LiftedActionAst {
    pub name: String,
    pub parameters: Vec<TypedName>,
    pub precondition: Vec<ConditionLiteral>,
    pub effect: Vec<EffectLiteral>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LiftedMethodAst {
    pub name: String,
    pub parameters: Vec<TypedName>,
    pub task: TaskAtomAst,
    pub precondition: Vec<ConditionLiteral>,
    pub network: TaskNetworkAst,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Signature {
    pub name: String,
    pub parameters: Vec<TypedName>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct LiftedDomainAst {
    pub name: String,
    pub requirements: Vec<String>,
    /// `(type, parent)` pairs in declaration order, excluding `object` itself.
    pub types: Vec<(String, String)>,
    pub constants: Vec<TypedName>,
    pub predicates: Vec<Signature>,
    pub compound_tasks: Vec<Signature>,
    pub actions: Vec<LiftedActionAst>,
    pub methods: Vec<LiftedMethodAst>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroundAtomAst {
    pub predicate: String,
    pub args: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct LiftedProblemAst {
    pub name: String,
    pub domain_name: String,
    pub requirements: Vec<String>,
    pub objects: Vec<TypedName>,
    pub init: Vec<GroundAtomAst>,
    pub initial_network: TaskNetworkAst,
}

impl LiftedDomainAst {
    pub fn action(&self, name: &str) -> Option<&LiftedActionAst> {
        self.actions.iter().find(|a| a.name == name)
    }

    pub fn compound_task(&self, name: &str) -> Option<&Signature> {
        self.compound_tasks.iter().find(|t| t.name == name)
    }

    pub fn predicate(&self, name: &str) -> Option<&Signature> {
        self.predicates.iter().find(|p| p.name == name)
    }

    /// `ty` together with every ancestor up to `object`.
    pub fn ancestors(&self, ty: &str) -> Vec<String> {
        let mut out = vec![ty.to_string()];
        let mut cur = ty.to_string();
        while let Some((_, parent)) = self.types.iter().find(|(t, _)| *t == cur) {
            if out.contains(parent) {
                break;
            }
            out.push(parent.clone());
            cur = parent.clone();
        }
        if !out.iter().any(|t| t == "object") {
            out.push("object".to_string());
        }
        out
    }
}
