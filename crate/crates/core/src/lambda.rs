//! Untyped linear λ-terms and the finite-hereditary-permutator algebra.
//!
//! Terms here are the coercion witnesses of the whole toolkit. Everything is
//! kept honest by reduction: a permutator is recognized by β-normalizing and
//! matching the shape `\x y1..yn. x (P1 y_π(1)) .. (Pn y_π(n))`, and an
//! inverse pair is accepted only when both compositions βη-reduce to the
//! identity.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::types::{ParseError, ParseErrorKind};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum LambdaTerm {
    Var(String),
    Abs(String, Box<LambdaTerm>),
    App(Box<LambdaTerm>, Box<LambdaTerm>),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LambdaError {
    #[error("β-reduction step budget exceeded (the term is not linear)")]
    BudgetExceeded,
    #[error("term is not a finite hereditary permutator")]
    NotPermutator,
    #[error("term is not linear")]
    NotLinear,
}

impl LambdaTerm {
    pub fn var(n: impl Into<String>) -> LambdaTerm {
        LambdaTerm::Var(n.into())
    }

    pub fn abs(n: impl Into<String>, body: LambdaTerm) -> LambdaTerm {
        LambdaTerm::Abs(n.into(), Box::new(body))
    }

    pub fn app(f: LambdaTerm, a: LambdaTerm) -> LambdaTerm {
        LambdaTerm::App(Box::new(f), Box::new(a))
    }

    /// `\x. x`
    pub fn identity() -> LambdaTerm {
        LambdaTerm::abs("x", LambdaTerm::var("x"))
    }

    pub fn size(&self) -> usize {
        match self {
            LambdaTerm::Var(_) => 1,
            LambdaTerm::Abs(_, b) => 1 + b.size(),
            LambdaTerm::App(f, a) => 1 + f.size() + a.size(),
        }
    }

    /// Peel leading abstractions: `\x y. b` becomes `([x, y], b)`.
    pub fn peel_abs(&self) -> (Vec<&str>, &LambdaTerm) {
        let mut names = Vec::new();
        let mut cur = self;
        while let LambdaTerm::Abs(n, b) = cur {
            names.push(n.as_str());
            cur = b;
        }
        (names, cur)
    }

    /// Application spine: `f a b` becomes `(f, [a, b])`.
    pub fn peel_app(&self) -> (&LambdaTerm, Vec<&LambdaTerm>) {
        let mut args = Vec::new();
        let mut cur = self;
        while let LambdaTerm::App(f, a) = cur {
            args.push(&**a);
            cur = f;
        }
        args.reverse();
        (cur, args)
    }
}

pub fn build_abs(names: &[String], body: LambdaTerm) -> LambdaTerm {
    names
        .iter()
        .rev()
        .fold(body, |acc, n| LambdaTerm::abs(n.clone(), acc))
}

pub fn build_app(head: LambdaTerm, args: Vec<LambdaTerm>) -> LambdaTerm {
    args.into_iter().fold(head, LambdaTerm::app)
}

// ---------------------------------------------------------------------------
// Free variables, α-equivalence, linearity
// ---------------------------------------------------------------------------

pub fn free_vars(t: &LambdaTerm) -> BTreeSet<String> {
    fn go(t: &LambdaTerm, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match t {
            LambdaTerm::Var(n) => {
                if !bound.iter().any(|b| b == n) {
                    out.insert(n.clone());
                }
            }
            LambdaTerm::Abs(n, b) => {
                bound.push(n.clone());
                go(b, bound, out);
                bound.pop();
            }
            LambdaTerm::App(f, a) => {
                go(f, bound, out);
                go(a, bound, out);
            }
        }
    }
    let mut out = BTreeSet::new();
    go(t, &mut Vec::new(), &mut out);
    out
}

/// α-equivalence. Free variables must match by name.
pub fn alpha_eq(a: &LambdaTerm, b: &LambdaTerm) -> bool {
    fn go(a: &LambdaTerm, b: &LambdaTerm, env: &mut Vec<(String, String)>) -> bool {
        match (a, b) {
            (LambdaTerm::Var(x), LambdaTerm::Var(y)) => {
                for (bx, by) in env.iter().rev() {
                    let hx = bx == x;
                    let hy = by == y;
                    if hx || hy {
                        return hx && hy;
                    }
                }
                x == y
            }
            (LambdaTerm::Abs(x, ba), LambdaTerm::Abs(y, bb)) => {
                env.push((x.clone(), y.clone()));
                let r = go(ba, bb, env);
                env.pop();
                r
            }
            (LambdaTerm::App(fa, aa), LambdaTerm::App(fb, ab)) => {
                go(fa, fb, env) && go(aa, ab, env)
            }
            _ => false,
        }
    }
    go(a, b, &mut Vec::new())
}

/// A canonical string for the α-class of a term (de Bruijn style), usable as
/// a hash key.
pub fn alpha_key(t: &LambdaTerm) -> String {
    fn go(t: &LambdaTerm, env: &mut Vec<String>, out: &mut String) {
        match t {
            LambdaTerm::Var(n) => {
                if let Some(i) = env.iter().rev().position(|b| b == n) {
                    out.push_str(&format!("#{i}"));
                } else {
                    out.push_str(&format!("!{n}"));
                }
            }
            LambdaTerm::Abs(n, b) => {
                out.push('L');
                env.push(n.clone());
                go(b, env, out);
                env.pop();
            }
            LambdaTerm::App(f, a) => {
                out.push('(');
                go(f, env, out);
                out.push(' ');
                go(a, env, out);
                out.push(')');
            }
        }
    }
    let mut out = String::new();
    go(t, &mut Vec::new(), &mut out);
    out
}

/// Every free or bound variable occurs exactly once. Binders that never use
/// their variable (`\x. y`) are not linear.
pub fn is_linear(t: &LambdaTerm) -> bool {
    fn go(
        t: &LambdaTerm,
        scope: &mut Vec<(String, usize)>,
        free: &mut HashMap<String, usize>,
    ) -> bool {
        match t {
            LambdaTerm::Var(n) => {
                if let Some(slot) = scope.iter_mut().rev().find(|(b, _)| b == n) {
                    slot.1 += 1;
                    slot.1 == 1
                } else {
                    let c = free.entry(n.clone()).or_insert(0);
                    *c += 1;
                    *c == 1
                }
            }
            LambdaTerm::Abs(n, b) => {
                scope.push((n.clone(), 0));
                let ok = go(b, scope, free);
                let (_, uses) = scope.pop().unwrap();
                ok && uses == 1
            }
            LambdaTerm::App(f, a) => go(f, scope, free) && go(a, scope, free),
        }
    }
    go(t, &mut Vec::new(), &mut HashMap::new())
}

// ---------------------------------------------------------------------------
// Substitution and reduction
// ---------------------------------------------------------------------------

fn fresh_name(base: &str, avoid: &BTreeSet<String>) -> String {
    let stem: String = base.chars().take_while(|c| !c.is_ascii_digit()).collect();
    let stem = if stem.is_empty() { "v".to_string() } else { stem };
    for i in 1.. {
        let cand = format!("{stem}{i}");
        if !avoid.contains(&cand) {
            return cand;
        }
    }
    unreachable!()
}

/// Capture-avoiding substitution of `value` for the free variable `var`.
pub fn subst(t: &LambdaTerm, var: &str, value: &LambdaTerm) -> LambdaTerm {
    match t {
        LambdaTerm::Var(n) => {
            if n == var {
                value.clone()
            } else {
                t.clone()
            }
        }
        LambdaTerm::Abs(n, b) => {
            if n == var {
                t.clone()
            } else if free_vars(value).contains(n) && free_vars(b).contains(var) {
                let mut avoid = free_vars(b);
                avoid.extend(free_vars(value));
                avoid.insert(var.to_string());
                let n2 = fresh_name(n, &avoid);
                let b2 = subst(b, n, &LambdaTerm::var(n2.clone()));
                LambdaTerm::abs(n2, subst(&b2, var, value))
            } else {
                LambdaTerm::abs(n.clone(), subst(b, var, value))
            }
        }
        LambdaTerm::App(f, a) => LambdaTerm::app(subst(f, var, value), subst(a, var, value)),
    }
}

fn beta_step(t: &LambdaTerm) -> Option<LambdaTerm> {
    match t {
        LambdaTerm::Var(_) => None,
        LambdaTerm::App(f, a) => {
            if let LambdaTerm::Abs(x, body) = &**f {
                Some(subst(body, x, a))
            } else if let Some(f2) = beta_step(f) {
                Some(LambdaTerm::app(f2, (**a).clone()))
            } else {
                beta_step(a).map(|a2| LambdaTerm::app((**f).clone(), a2))
            }
        }
        LambdaTerm::Abs(x, b) => beta_step(b).map(|b2| LambdaTerm::abs(x.clone(), b2)),
    }
}

/// Leftmost-outermost β-normalization. The step budget is quadratic in the
/// term size; linear terms shrink at every step, so exceeding it means the
/// precondition was violated.
pub fn beta_normalize(t: &LambdaTerm) -> Result<LambdaTerm, LambdaError> {
    let mut cur = t.clone();
    let mut budget = t.size() * t.size() + 16;
    while let Some(next) = beta_step(&cur) {
        cur = next;
        if budget == 0 {
            return Err(LambdaError::BudgetExceeded);
        }
        budget -= 1;
    }
    Ok(cur)
}

/// Fully η-reduce a β-normal term: `\x. M x` becomes `M` whenever `x` is not
/// free in `M`, applied bottom-up to a fixed point.
pub fn eta_normalize(t: &LambdaTerm) -> LambdaTerm {
    match t {
        LambdaTerm::Var(_) => t.clone(),
        LambdaTerm::App(f, a) => LambdaTerm::app(eta_normalize(f), eta_normalize(a)),
        LambdaTerm::Abs(x, b) => {
            let b = eta_normalize(b);
            if let LambdaTerm::App(f, a) = &b {
                if matches!(&**a, LambdaTerm::Var(v) if v == x) && !free_vars(f).contains(x) {
                    return (**f).clone();
                }
            }
            LambdaTerm::abs(x.clone(), b)
        }
    }
}

/// βη-equality of linear terms, decided by comparing βη-normal forms up to α.
pub fn betaeta_equal(a: &LambdaTerm, b: &LambdaTerm) -> Result<bool, LambdaError> {
    let na = eta_normalize(&beta_normalize(a)?);
    let nb = eta_normalize(&beta_normalize(b)?);
    Ok(alpha_eq(&na, &nb))
}

// ---------------------------------------------------------------------------
// Concrete syntax
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
enum TTok {
    Ident(String),
    Lambda,
    Dot,
    LParen,
    RParen,
    Eof,
}

struct TermLexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> TermLexer<'a> {
    fn next(&mut self) -> Result<(TTok, usize), ParseError> {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        if self.pos >= self.src.len() {
            return Ok((TTok::Eof, start));
        }
        match self.src[self.pos] {
            b'\\' => {
                self.pos += 1;
                Ok((TTok::Lambda, start))
            }
            b'.' => {
                self.pos += 1;
                Ok((TTok::Dot, start))
            }
            b'(' => {
                self.pos += 1;
                Ok((TTok::LParen, start))
            }
            b')' => {
                self.pos += 1;
                Ok((TTok::RParen, start))
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let mut end = self.pos;
                while end < self.src.len()
                    && (self.src[end].is_ascii_alphanumeric() || self.src[end] == b'_')
                {
                    end += 1;
                }
                let name = std::str::from_utf8(&self.src[self.pos..end])
                    .unwrap()
                    .to_string();
                self.pos = end;
                Ok((TTok::Ident(name), start))
            }
            c => Err(ParseError {
                kind: ParseErrorKind::Syntax,
                pos: start,
                msg: format!("unexpected character `{}`", c as char),
            }),
        }
    }

    fn peek(&mut self) -> Result<(TTok, usize), ParseError> {
        let save = self.pos;
        let r = self.next();
        self.pos = save;
        r
    }
}

struct TermParser<'a> {
    lx: TermLexer<'a>,
}

impl<'a> TermParser<'a> {
    fn parse_term(&mut self) -> Result<LambdaTerm, ParseError> {
        let (tok, pos) = self.lx.peek()?;
        if tok == TTok::Lambda {
            self.lx.next()?;
            let mut names = Vec::new();
            loop {
                let (tok, pos) = self.lx.next()?;
                match tok {
                    TTok::Ident(n) => names.push(n),
                    TTok::Dot if !names.is_empty() => break,
                    _ => {
                        return Err(ParseError {
                            kind: ParseErrorKind::Syntax,
                            pos,
                            msg: "expected binder name or `.`".into(),
                        })
                    }
                }
            }
            let body = self.parse_term()?;
            Ok(build_abs(&names, body))
        } else if tok == TTok::Eof {
            Err(ParseError {
                kind: ParseErrorKind::Syntax,
                pos,
                msg: "expected a term".into(),
            })
        } else {
            self.parse_app()
        }
    }

    fn parse_app(&mut self) -> Result<LambdaTerm, ParseError> {
        let mut acc = self.parse_atom()?;
        loop {
            let (tok, _) = self.lx.peek()?;
            match tok {
                TTok::Ident(_) | TTok::LParen | TTok::Lambda => {
                    let arg = self.parse_atom()?;
                    acc = LambdaTerm::app(acc, arg);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn parse_atom(&mut self) -> Result<LambdaTerm, ParseError> {
        let (tok, pos) = self.lx.next()?;
        match tok {
            TTok::Ident(n) => Ok(LambdaTerm::var(n)),
            TTok::LParen => {
                let t = self.parse_term()?;
                let (tok, pos) = self.lx.next()?;
                if tok == TTok::RParen {
                    Ok(t)
                } else {
                    Err(ParseError {
                        kind: ParseErrorKind::Syntax,
                        pos,
                        msg: "expected `)`".into(),
                    })
                }
            }
            TTok::Lambda => {
                // allow `x (\y. t)`-style arguments; rewind is easiest here
                self.lx.pos = pos;
                self.parse_term()
            }
            other => Err(ParseError {
                kind: ParseErrorKind::Syntax,
                pos,
                msg: format!("expected a term, found {:?}", other),
            }),
        }
    }
}

/// Parse `\x y. body` syntax with application by juxtaposition.
pub fn parse_term(text: &str) -> Result<LambdaTerm, ParseError> {
    let mut p = TermParser {
        lx: TermLexer {
            src: text.as_bytes(),
            pos: 0,
        },
    };
    let t = p.parse_term()?;
    let (tok, pos) = p.lx.next()?;
    if tok != TTok::Eof {
        return Err(ParseError {
            kind: ParseErrorKind::Syntax,
            pos,
            msg: "trailing input after term".into(),
        });
    }
    Ok(t)
}

/// Like [`parse_term`], additionally reporting free variables so callers can
/// warn about open terms.
pub fn parse_term_with_warnings(text: &str) -> Result<(LambdaTerm, Vec<String>), ParseError> {
    let t = parse_term(text)?;
    let unbound = free_vars(&t).into_iter().collect();
    Ok((t, unbound))
}

pub fn print_term(t: &LambdaTerm) -> String {
    fn atom(t: &LambdaTerm, out: &mut String) {
        match t {
            LambdaTerm::Var(n) => out.push_str(n),
            _ => {
                out.push('(');
                go(t, out);
                out.push(')');
            }
        }
    }
    fn go(t: &LambdaTerm, out: &mut String) {
        match t {
            LambdaTerm::Var(n) => out.push_str(n),
            LambdaTerm::Abs(..) => {
                let (names, body) = t.peel_abs();
                out.push('\\');
                out.push_str(&names.join(" "));
                out.push_str(". ");
                go(body, out);
            }
            LambdaTerm::App(..) => {
                let (head, args) = t.peel_app();
                atom(head, out);
                for a in args {
                    out.push(' ');
                    atom(a, out);
                }
            }
        }
    }
    let mut s = String::new();
    go(t, &mut s);
    s
}

impl fmt::Display for LambdaTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_term(self))
    }
}

// ---------------------------------------------------------------------------
// Finite hereditary permutators
// ---------------------------------------------------------------------------

/// Structured permutator: argument slot `i` applies `children[i]` to the
/// bound variable selected by `perm[i]` (0-based). Arity 0 is the identity.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PermTree {
    pub perm: Vec<usize>,
    pub children: Vec<PermTree>,
}

impl PermTree {
    pub fn identity() -> PermTree {
        PermTree {
            perm: Vec::new(),
            children: Vec::new(),
        }
    }

    pub fn new(perm: Vec<usize>, children: Vec<PermTree>) -> PermTree {
        assert_eq!(perm.len(), children.len());
        let mut seen = vec![false; perm.len()];
        for &p in &perm {
            assert!(p < perm.len() && !seen[p], "not a permutation");
            seen[p] = true;
        }
        PermTree { perm, children }
    }

    pub fn arity(&self) -> usize {
        self.perm.len()
    }

    pub fn is_identity_tree(&self) -> bool {
        self.arity() == 0
    }

    /// All permutations in the tree are identities — the hereditary-identity
    /// predicate. Every such term βη-reduces to `\x. x`.
    pub fn is_fhi(&self) -> bool {
        self.perm.iter().enumerate().all(|(i, &p)| p == i)
            && self.children.iter().all(|c| c.is_fhi())
    }

    pub fn depth(&self) -> usize {
        1 + self
            .children
            .iter()
            .map(|c| c.depth())
            .max()
            .unwrap_or(0)
    }

    /// The closed linear term `\x y1..yn. x (P1 y_π(1)) .. (Pn y_π(n))`,
    /// with child permutators left unreduced.
    pub fn to_term(&self) -> LambdaTerm {
        let mut counter = 0;
        self.to_term_inner(&mut counter)
    }

    fn to_term_inner(&self, counter: &mut usize) -> LambdaTerm {
        let id = *counter;
        *counter += 1;
        let x = format!("x{id}");
        let n = self.arity();
        if n == 0 {
            return LambdaTerm::abs(x.clone(), LambdaTerm::var(x));
        }
        let ys: Vec<String> = (0..n).map(|i| format!("y{id}_{}", i + 1)).collect();
        let mut body = LambdaTerm::var(x.clone());
        for i in 0..n {
            let child = self.children[i].to_term_inner(counter);
            let arg = LambdaTerm::app(child, LambdaTerm::var(ys[self.perm[i]].clone()));
            body = LambdaTerm::app(body, arg);
        }
        let mut names = vec![x];
        names.extend(ys);
        build_abs(&names, body)
    }
}

/// Match the β-normal form of a linear term against the permutator shape.
/// `None` means "not a permutator" (including non-linear input).
pub fn recognize_fhp(t: &LambdaTerm) -> Option<PermTree> {
    if !is_linear(t) {
        return None;
    }
    let nf = beta_normalize(t).ok()?;
    recognize_normal(&nf)
}

fn recognize_normal(t: &LambdaTerm) -> Option<PermTree> {
    let (binders, body) = t.peel_abs();
    let (&x, ys) = binders.split_first()?;
    let (head, args) = body.peel_app();
    match head {
        LambdaTerm::Var(h) if h == x => {}
        _ => return None,
    }
    let n = ys.len();
    if args.len() != n {
        return None;
    }
    let mut perm = vec![usize::MAX; n];
    let mut children = Vec::with_capacity(n);
    for arg in args {
        let (j, child) = recognize_arg(arg, ys)?;
        children.push(child);
        let slot = children.len() - 1;
        perm[slot] = j;
    }
    let mut seen = vec![false; n];
    for &p in &perm {
        if p == usize::MAX || seen[p] {
            return None;
        }
        seen[p] = true;
    }
    Some(PermTree { perm, children })
}

fn recognize_arg(arg: &LambdaTerm, ys: &[&str]) -> Option<(usize, PermTree)> {
    match arg {
        LambdaTerm::Var(v) => {
            let j = ys.iter().position(|y| y == v)?;
            Some((j, PermTree::identity()))
        }
        LambdaTerm::Abs(..) => {
            let fv = free_vars(arg);
            if fv.len() != 1 {
                return None;
            }
            let v = fv.iter().next().unwrap().clone();
            let j = ys.iter().position(|y| *y == v)?;
            let child = recognize_normal(&LambdaTerm::abs(v, arg.clone()))?;
            Some((j, child))
        }
        LambdaTerm::App(..) => None,
    }
}

/// `\z. p (q z)`, β-normalized. Both inputs must recognize as permutators;
/// the composite always does again.
pub fn fhp_compose(p: &LambdaTerm, q: &LambdaTerm) -> Result<LambdaTerm, LambdaError> {
    recognize_fhp(p).ok_or(LambdaError::NotPermutator)?;
    recognize_fhp(q).ok_or(LambdaError::NotPermutator)?;
    compose_unchecked(p, q)
}

pub(crate) fn compose_unchecked(
    p: &LambdaTerm,
    q: &LambdaTerm,
) -> Result<LambdaTerm, LambdaError> {
    let mut avoid = free_vars(p);
    avoid.extend(free_vars(q));
    let z = fresh_name("z", &avoid);
    let t = LambdaTerm::abs(
        z.clone(),
        LambdaTerm::app(p.clone(), LambdaTerm::app(q.clone(), LambdaTerm::var(z))),
    );
    beta_normalize(&t)
}

/// True iff `p ∘ q` and `q ∘ p` both βη-reduce to the identity.
pub fn verify_inverse_pair(p: &LambdaTerm, q: &LambdaTerm) -> bool {
    if !is_linear(p) || !is_linear(q) {
        return false;
    }
    let id = LambdaTerm::identity();
    let pq = match compose_unchecked(p, q) {
        Ok(t) => t,
        Err(_) => return false,
    };
    let qp = match compose_unchecked(q, p) {
        Ok(t) => t,
        Err(_) => return false,
    };
    matches!(betaeta_equal(&pq, &id), Ok(true)) && matches!(betaeta_equal(&qp, &id), Ok(true))
}

/// The unique inverse permutator: the permutation is inverted and child `k`
/// of the inverse is the inverse of child `π⁻¹(k)`. The construction is
/// re-verified against [`verify_inverse_pair`] and a failure panics — it
/// would mean the inversion formula itself is wrong.
pub fn fhp_invert(p: &PermTree) -> PermTree {
    let q = invert_inner(p);
    let (tp, tq) = (p.to_term(), q.to_term());
    assert!(
        verify_inverse_pair(&tp, &tq),
        "permutator inversion failed self-verification on {tp}"
    );
    q
}

fn invert_inner(p: &PermTree) -> PermTree {
    let n = p.arity();
    let mut inv = vec![0; n];
    for i in 0..n {
        inv[p.perm[i]] = i;
    }
    let children = (0..n).map(|k| invert_inner(&p.children[inv[k]])).collect();
    PermTree {
        perm: inv,
        children,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(s: &str) -> LambdaTerm {
        parse_term(s).unwrap()
    }

    #[test]
    fn parse_and_print() {
        assert_eq!(pt("\\x. x"), LambdaTerm::identity());
        let t = pt("\\x y1 y2. x y2 y1");
        assert_eq!(print_term(&t), "\\x y1 y2. x y2 y1");
        let t2 = pt("\\x. x (\\z. z y)");
        assert_eq!(parse_term(&print_term(&t2)).unwrap(), t2);
        assert!(parse_term("\\x").is_err());
        assert!(parse_term("x )").is_err());
    }

    #[test]
    fn open_terms_warn() {
        let (_, unbound) = parse_term_with_warnings("\\x. x y").unwrap();
        assert_eq!(unbound, vec!["y".to_string()]);
    }

    #[test]
    fn linearity() {
        assert!(is_linear(&pt("\\x. x")));
        assert!(is_linear(&pt("\\x y1 y2. x y2 y1")));
        assert!(!is_linear(&pt("\\x. x x")));
        assert!(!is_linear(&pt("\\x y. x"))); // y unused
        assert!(is_linear(&pt("x y"))); // open but linear
        assert!(!is_linear(&pt("x x")));
    }

    #[test]
    fn beta_examples() {
        assert_eq!(beta_normalize(&pt("(\\x. x) y")).unwrap(), pt("y"));
        let swap_expanded = pt("\\x y1 y2. x ((\\z. z) y2) ((\\z. z) y1)");
        assert_eq!(
            beta_normalize(&swap_expanded).unwrap(),
            pt("\\x y1 y2. x y2 y1")
        );
        assert_eq!(beta_normalize(&pt("\\x. x")).unwrap(), pt("\\x. x"));
    }

    #[test]
    fn capture_avoiding_substitution() {
        // (\x. \y. x) y  →  \y'. y  (the bound y must not capture)
        let t = pt("(\\x. \\y. x y2) y");
        let nf = beta_normalize(&t).unwrap();
        let (names, body) = nf.peel_abs();
        assert_eq!(names.len(), 1);
        let (head, args) = body.peel_app();
        assert_eq!(head, &LambdaTerm::var("y"));
        assert_eq!(args.len(), 1);
    }

    #[test]
    fn eta_examples() {
        assert_eq!(eta_normalize(&pt("\\x y. x y")), pt("\\x. x"));
        assert_eq!(
            eta_normalize(&pt("\\x y1 y2. x y2 y1")),
            pt("\\x y1 y2. x y2 y1")
        );
        // two η-steps then one more after they expose each other
        assert_eq!(
            eta_normalize(&pt("\\x y1 y2. x (\\t. y1 t) y2")),
            pt("\\x. x")
        );
    }

    #[test]
    fn betaeta_examples() {
        assert!(betaeta_equal(&pt("\\x y. x y"), &pt("\\x. x")).unwrap());
        assert!(!betaeta_equal(&pt("\\x y1 y2. x y2 y1"), &pt("\\x. x")).unwrap());
        assert!(betaeta_equal(&pt("\\z. (\\x y. x y) ((\\x. x) z)"), &pt("\\x. x")).unwrap());
    }

    #[test]
    fn recognize_identity_and_swap() {
        assert_eq!(recognize_fhp(&pt("\\x. x")), Some(PermTree::identity()));
        let swap = recognize_fhp(&pt("\\x y1 y2. x ((\\z. z) y2) ((\\z. z) y1)")).unwrap();
        assert_eq!(swap.perm, vec![1, 0]);
        assert!(swap.children.iter().all(|c| c.is_identity_tree()));
        assert_eq!(recognize_fhp(&pt("\\x y. y x")), None);
        assert_eq!(recognize_fhp(&pt("\\x. x x")), None);
    }

    #[test]
    fn to_term_round_trips() {
        let tree = PermTree::new(
            vec![2, 0, 1],
            vec![
                PermTree::identity(),
                PermTree::new(vec![1, 0], vec![PermTree::identity(), PermTree::identity()]),
                PermTree::identity(),
            ],
        );
        let back = recognize_fhp(&tree.to_term()).unwrap();
        assert_eq!(back, tree);
    }

    #[test]
    fn invert_swap_and_cycle() {
        let swap = PermTree::new(
            vec![1, 0],
            vec![PermTree::identity(), PermTree::identity()],
        );
        assert_eq!(fhp_invert(&swap), swap);

        let cycle = PermTree::new(
            vec![1, 2, 0],
            vec![
                PermTree::identity(),
                PermTree::identity(),
                PermTree::identity(),
            ],
        );
        let inv = fhp_invert(&cycle);
        assert_eq!(inv.perm, vec![2, 0, 1]);
        assert!(verify_inverse_pair(&cycle.to_term(), &inv.to_term()));
        assert_eq!(fhp_invert(&inv), cycle);
    }

    #[test]
    fn compose_examples() {
        let id = LambdaTerm::identity();
        let swap = pt("\\x y1 y2. x y2 y1");
        assert_eq!(fhp_compose(&id, &id).unwrap(), id);
        let ss = fhp_compose(&swap, &swap).unwrap();
        // swap ∘ swap is the two-argument η-expansion of the identity
        assert_eq!(ss, pt("\\x y1 y2. x y1 y2"));
        assert!(recognize_fhp(&ss).unwrap().is_fhi());
        assert_eq!(fhp_compose(&swap, &id).unwrap(), swap);
        assert!(fhp_compose(&pt("\\x y. y x"), &id).is_err());
    }

    #[test]
    fn verify_pairs() {
        let id = LambdaTerm::identity();
        let swap = pt("\\x y1 y2. x y2 y1");
        assert!(verify_inverse_pair(&id, &id));
        assert!(verify_inverse_pair(&swap, &swap));
        assert!(!verify_inverse_pair(&swap, &id));
    }

    #[test]
    fn fhi_terms_are_eta_expansions_of_identity() {
        let t = PermTree::new(
            vec![0, 1],
            vec![
                PermTree::new(vec![0], vec![PermTree::identity()]),
                PermTree::identity(),
            ],
        );
        assert!(t.is_fhi());
        assert!(betaeta_equal(&t.to_term(), &LambdaTerm::identity()).unwrap());
    }
}
