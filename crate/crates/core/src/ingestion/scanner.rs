//! AST-based detection of hub-accessing imports and model-loading calls in
//! Python sources.

use std::collections::{BTreeSet, HashMap};

use rustpython_ast::{
    self as ast, text_size::TextRange, Constant, Expr, ExprContext, Ranged, Visitor,
};
use rustpython_parser::{parse, Mode};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::signatures::{ApiSignature, CallPattern};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{path}: not parseable as Python: {message}")]
pub struct ParseFailure {
    pub path: String,
    pub message: String,
}

/// How a call's identifier argument was resolved.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "route", content = "identifier", rename_all = "snake_case")]
pub enum Resolution {
    Literal(String),
    PropagatedConstant(String),
    Unresolved,
}

impl Resolution {
    pub fn identifier(&self) -> Option<&str> {
        match self {
            Resolution::Literal(s) | Resolution::PropagatedConstant(s) => Some(s),
            Resolution::Unresolved => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanFinding {
    pub file: String,
    pub library: String,
    pub line: usize,
    pub callee: String,
    #[serde(flatten)]
    pub resolution: Resolution,
}

/// Libraries whose import pattern is satisfied by `source`, in catalog order.
pub fn match_signatures(
    source: &str,
    signatures: &[ApiSignature],
) -> Result<Vec<String>, ParseFailure> {
    let module = analyze(source, "<source>")?;
    Ok(matched_libraries(&module, signatures))
}

/// Call sites in `source` matching a call pattern of a library the file imports.
pub fn scan_invocations(
    path: &str,
    source: &str,
    signatures: &[ApiSignature],
) -> Result<Vec<ScanFinding>, ParseFailure> {
    let module = analyze(source, path)?;
    let libraries = matched_libraries(&module, signatures);
    let active: Vec<&ApiSignature> = signatures
        .iter()
        .filter(|s| libraries.contains(&s.library))
        .collect();
    let line_starts: Vec<usize> = std::iter::once(0)
        .chain(source.match_indices('\n').map(|(i, _)| i + 1))
        .collect();

    let mut findings = Vec::new();
    for call in &module.calls {
        let callee = module.qualify(&call.callee);
        let mut best: Option<(&ApiSignature, &CallPattern)> = None;
        for sig in &active {
            for pattern in &sig.calls {
                if pattern.matches(&callee)
                    && best.is_none_or(|(_, b)| pattern.specificity() > b.specificity())
                {
                    best = Some((sig, pattern));
                }
            }
        }
        let Some((sig, pattern)) = best else { continue };
        let arg = pattern
            .keyword
            .as_ref()
            .and_then(|kw| call.keywords.iter().find(|(k, _)| k == kw).map(|(_, v)| v))
            .or_else(|| {
                call.positional
                    .get(pattern.position)
                    .and_then(Option::as_ref)
            });
        let mut resolution = match arg {
            Some(ArgValue::Str(s)) if !s.is_empty() && source.contains(s.as_str()) => {
                Resolution::Literal(s.clone())
            }
            Some(ArgValue::Name(name)) => module.propagate(name, call.scope, call.offset),
            _ => Resolution::Unresolved,
        };
        if let (Some(prefix), Some(id)) = (&pattern.strip_prefix, resolution.identifier()) {
            if let Some(stripped) = id.strip_prefix(prefix.as_str()) {
                let stripped = stripped.to_string();
                resolution = match resolution {
                    Resolution::Literal(_) => Resolution::Literal(stripped),
                    _ => Resolution::PropagatedConstant(stripped),
                };
            }
        }
        let line = line_starts.partition_point(|&s| s <= call.offset);
        findings.push(ScanFinding {
            file: path.to_string(),
            library: sig.library.clone(),
            line,
            callee,
            resolution,
        });
    }
    Ok(findings)
}

fn matched_libraries(module: &ModuleFacts, signatures: &[ApiSignature]) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for sig in signatures {
        let pat = &sig.import;
        let module_ok = |m: &str| {
            m == pat.module
                || m.strip_prefix(pat.module.as_str())
                    .is_some_and(|r| r.starts_with('.'))
        };
        let hit = module.imports.iter().any(|imp| match imp {
            Import::Module(m) => pat.symbol.is_none() && module_ok(m),
            Import::From(m, names) => {
                module_ok(m)
                    && pat
                        .symbol
                        .as_ref()
                        .is_none_or(|s| names.iter().any(|n| n == s || n == "*"))
            }
        });
        if hit && !out.contains(&sig.library) {
            out.push(sig.library.clone());
        }
    }
    out
}

#[derive(Debug, Clone)]
enum Import {
    Module(String),
    From(String, Vec<String>),
}

#[derive(Debug, Clone)]
enum ArgValue {
    Str(String),
    Name(String),
    Other,
}

#[derive(Debug)]
struct CallSite {
    callee: String,
    positional: Vec<Option<ArgValue>>,
    keywords: Vec<(String, ArgValue)>,
    offset: usize,
    scope: usize,
}

#[derive(Debug)]
struct Binding {
    scope: usize,
    offset: usize,
    literal: Option<String>,
}

/// Facts gathered in one pass over a module.
#[derive(Debug, Default)]
struct ModuleFacts {
    imports: Vec<Import>,
    /// Local name → fully qualified dotted path from imports.
    aliases: HashMap<String, String>,
    bindings: HashMap<String, Vec<Binding>>,
    declared_global: BTreeSet<String>,
    calls: Vec<CallSite>,
}

impl ModuleFacts {
    fn qualify(&self, dotted: &str) -> String {
        let (head, tail) = dotted
            .split_once('.')
            .map_or((dotted, None), |(h, t)| (h, Some(t)));
        match (self.aliases.get(head), tail) {
            (Some(q), Some(t)) => format!("{q}.{t}"),
            (Some(q), None) => q.clone(),
            (None, _) => dotted.to_string(),
        }
    }

    /// Single-assignment constant propagation: the name must have exactly
    /// one binding visible from the call's scope, that binding must assign a
    /// string literal, and it must precede the call.
    fn propagate(&self, name: &str, scope: usize, offset: usize) -> Resolution {
        if self.declared_global.contains(name) {
            return Resolution::Unresolved;
        }
        let all = self.bindings.get(name).map(Vec::as_slice).unwrap_or(&[]);
        let mut visible: Vec<&Binding> = all.iter().filter(|b| b.scope == scope).collect();
        if visible.is_empty() && scope != MODULE_SCOPE {
            visible = all.iter().filter(|b| b.scope == MODULE_SCOPE).collect();
        }
        match visible.as_slice() {
            [b] if b.offset < offset => match &b.literal {
                Some(s) if !s.is_empty() => Resolution::PropagatedConstant(s.clone()),
                _ => Resolution::Unresolved,
            },
            _ => Resolution::Unresolved,
        }
    }
}

const MODULE_SCOPE: usize = 0;

fn analyze(source: &str, path: &str) -> Result<ModuleFacts, ParseFailure> {
    let parsed = parse(source, Mode::Module, path).map_err(|e| ParseFailure {
        path: path.to_string(),
        message: e.to_string(),
    })?;
    let body = match parsed {
        ast::Mod::Module(m) => m.body,
        _ => Vec::new(),
    };
    let mut collector = Collector {
        facts: ModuleFacts::default(),
        scopes: vec![MODULE_SCOPE],
        next_scope: 1,
    };
    for stmt in body {
        collector.visit_stmt(stmt);
    }
    Ok(collector.facts)
}

struct Collector {
    facts: ModuleFacts,
    scopes: Vec<usize>,
    next_scope: usize,
}

impl Collector {
    fn scope(&self) -> usize {
        *self.scopes.last().expect("module scope")
    }

    fn bind(&mut self, name: &str, range: TextRange, literal: Option<String>) {
        let binding = Binding {
            scope: self.scope(),
            offset: range.start().to_usize(),
            literal,
        };
        self.facts
            .bindings
            .entry(name.to_string())
            .or_default()
            .push(binding);
    }

    fn enter<F: FnOnce(&mut Self)>(&mut self, f: F) {
        let id = self.next_scope;
        self.next_scope += 1;
        self.scopes.push(id);
        f(self);
        self.scopes.pop();
    }
}

fn dotted_name(expr: &Expr) -> String {
    match expr {
        Expr::Name(n) => n.id.to_string(),
        Expr::Attribute(a) => format!("{}.{}", dotted_name(&a.value), a.attr),
        _ => "_".to_string(),
    }
}

fn string_literal(expr: &Expr) -> Option<String> {
    match expr {
        Expr::Constant(c) => match &c.value {
            Constant::Str(s) => Some(s.clone()),
            _ => None,
        },
        _ => None,
    }
}

fn arg_value(expr: &Expr) -> ArgValue {
    if let Some(s) = string_literal(expr) {
        return ArgValue::Str(s);
    }
    match expr {
        Expr::Name(n) => ArgValue::Name(n.id.to_string()),
        _ => ArgValue::Other,
    }
}

impl Visitor for Collector {
    fn visit_stmt_import(&mut self, node: ast::StmtImport) {
        for alias in &node.names {
            let full = alias.name.to_string();
            let local = match &alias.asname {
                Some(a) => {
                    self.facts.aliases.insert(a.to_string(), full.clone());
                    a.to_string()
                }
                None => {
                    let head = full.split('.').next().unwrap_or(&full).to_string();
                    self.facts.aliases.insert(head.clone(), head.clone());
                    head
                }
            };
            self.bind(&local, alias.range, None);
            self.facts.imports.push(Import::Module(full));
        }
    }

    fn visit_stmt_import_from(&mut self, node: ast::StmtImportFrom) {
        let relative = node.level.map(|l| l.to_u32()).unwrap_or(0) > 0;
        let module = node.module.as_ref().map(|m| m.to_string());
        let names: Vec<String> = node.names.iter().map(|a| a.name.to_string()).collect();
        for alias in &node.names {
            let local = alias.asname.as_ref().unwrap_or(&alias.name).to_string();
            if let (Some(m), false) = (&module, relative) {
                self.facts
                    .aliases
                    .insert(local.clone(), format!("{m}.{}", alias.name));
            }
            self.bind(&local, alias.range, None);
        }
        if let (Some(m), false) = (module, relative) {
            self.facts.imports.push(Import::From(m, names));
        }
    }

    fn visit_stmt_assign(&mut self, node: ast::StmtAssign) {
        if let ([Expr::Name(target)], Some(lit)) =
            (node.targets.as_slice(), string_literal(&node.value))
        {
            self.bind(&target.id, node.range, Some(lit));
            return;
        }
        self.generic_visit_stmt_assign(node);
    }

    fn visit_stmt_ann_assign(&mut self, node: ast::StmtAnnAssign) {
        if let (Expr::Name(target), Some(lit)) = (
            &*node.target,
            node.value.as_deref().and_then(string_literal),
        ) {
            self.bind(&target.id, node.range, Some(lit));
            return;
        }
        self.generic_visit_stmt_ann_assign(node);
    }

    fn visit_stmt_global(&mut self, node: ast::StmtGlobal) {
        for n in node.names {
            self.facts.declared_global.insert(n.to_string());
        }
    }

    fn visit_stmt_nonlocal(&mut self, node: ast::StmtNonlocal) {
        for n in node.names {
            self.facts.declared_global.insert(n.to_string());
        }
    }

    fn visit_stmt_function_def(&mut self, node: ast::StmtFunctionDef) {
        self.bind(&node.name, node.range, None);
        for d in node.decorator_list.clone() {
            self.visit_expr(d);
        }
        self.enter(|c| {
            c.visit_arguments(*node.args);
            for s in node.body {
                c.visit_stmt(s);
            }
        });
    }

    fn visit_stmt_async_function_def(&mut self, node: ast::StmtAsyncFunctionDef) {
        self.bind(&node.name, node.range, None);
        for d in node.decorator_list.clone() {
            self.visit_expr(d);
        }
        self.enter(|c| {
            c.visit_arguments(*node.args);
            for s in node.body {
                c.visit_stmt(s);
            }
        });
    }

    fn visit_stmt_class_def(&mut self, node: ast::StmtClassDef) {
        self.bind(&node.name, node.range, None);
        for b in node.bases.clone() {
            self.visit_expr(b);
        }
        self.enter(|c| {
            for s in node.body {
                c.visit_stmt(s);
            }
        });
    }

    fn visit_expr_lambda(&mut self, node: ast::ExprLambda) {
        self.enter(|c| {
            c.visit_arguments(*node.args);
            c.visit_expr(*node.body);
        });
    }

    fn visit_arg(&mut self, node: ast::Arg) {
        self.bind(&node.arg, node.range, None);
    }

    // The generated traversal stops at the nodes below; walk them explicitly.

    fn visit_arguments(&mut self, node: ast::Arguments) {
        for a in node
            .posonlyargs
            .into_iter()
            .chain(node.args)
            .chain(node.kwonlyargs)
        {
            if let Some(d) = a.default {
                self.visit_expr(*d);
            }
            self.visit_arg(a.def);
        }
        for a in node.vararg.into_iter().chain(node.kwarg) {
            self.visit_arg(*a);
        }
    }

    fn visit_keyword(&mut self, node: ast::Keyword) {
        self.visit_expr(node.value);
    }

    fn visit_withitem(&mut self, node: ast::WithItem) {
        self.visit_expr(node.context_expr);
        if let Some(v) = node.optional_vars {
            self.visit_expr(*v);
        }
    }

    fn visit_comprehension(&mut self, node: ast::Comprehension) {
        self.visit_expr(node.iter);
        self.visit_expr(node.target);
        for e in node.ifs {
            self.visit_expr(e);
        }
    }

    fn visit_match_case(&mut self, node: ast::MatchCase) {
        self.visit_pattern(node.pattern);
        if let Some(g) = node.guard {
            self.visit_expr(*g);
        }
        for s in node.body {
            self.visit_stmt(s);
        }
    }

    fn visit_pattern_match_as(&mut self, node: ast::PatternMatchAs) {
        if let Some(name) = &node.name {
            self.bind(name, node.range, None);
        }
        self.generic_visit_pattern_match_as(node);
    }

    fn visit_pattern_match_star(&mut self, node: ast::PatternMatchStar) {
        if let Some(name) = &node.name {
            self.bind(name, node.range, None);
        }
    }

    fn visit_pattern_match_mapping(&mut self, node: ast::PatternMatchMapping) {
        if let Some(rest) = &node.rest {
            self.bind(rest, node.range, None);
        }
        self.generic_visit_pattern_match_mapping(node);
    }

    fn visit_excepthandler_except_handler(&mut self, node: ast::ExceptHandlerExceptHandler) {
        if let Some(name) = &node.name {
            self.bind(name, node.range, None);
        }
        self.generic_visit_excepthandler_except_handler(node);
    }

    fn visit_expr_name(&mut self, node: ast::ExprName) {
        if !matches!(node.ctx, ExprContext::Load) {
            self.bind(&node.id, node.range, None);
        }
    }

    fn visit_expr_call(&mut self, node: ast::ExprCall) {
        let positional = node
            .args
            .iter()
            .map(|a| (!matches!(a, Expr::Starred(_))).then(|| arg_value(a)))
            .collect();
        let keywords = node
            .keywords
            .iter()
            .filter_map(|k| {
                k.arg
                    .as_ref()
                    .map(|name| (name.to_string(), arg_value(&k.value)))
            })
            .collect();
        self.facts.calls.push(CallSite {
            callee: dotted_name(&node.func),
            positional,
            keywords,
            offset: node.range().start().to_usize(),
            scope: self.scope(),
        });
        self.generic_visit_expr_call(node);
    }
}
