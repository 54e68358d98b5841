//! Type syntax, parsing/printing, AC-canonical forms, and semantic
//! equivalence.
//!
//! Two representations coexist on purpose. [`TypeExpr`] is the raw binary
//! syntax on which the typing rules and semantic equivalence operate — there
//! `a & b` and `b & a` are different types. [`CanonicalType`] flattens
//! intersections and unions into sorted, deduplicated n-ary nodes and is used
//! wherever a question is asked modulo associativity, commutativity and
//! idempotence (normal-form comparison, index keys, memo keys).

use std::fmt;

/// Raw abstract syntax of types.
///
/// `Atom("omega")` is never constructed: the word `omega` always parses to
/// [`TypeExpr::Omega`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TypeExpr {
    Atom(String),
    Omega,
    Arrow(Box<TypeExpr>, Box<TypeExpr>),
    And(Box<TypeExpr>, Box<TypeExpr>),
    Or(Box<TypeExpr>, Box<TypeExpr>),
}

impl TypeExpr {
    pub fn atom(name: impl Into<String>) -> TypeExpr {
        let name = name.into();
        debug_assert!(name != "omega", "`omega` is reserved for the top type");
        TypeExpr::Atom(name)
    }

    pub fn arrow(l: TypeExpr, r: TypeExpr) -> TypeExpr {
        TypeExpr::Arrow(Box::new(l), Box::new(r))
    }

    pub fn and(l: TypeExpr, r: TypeExpr) -> TypeExpr {
        TypeExpr::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: TypeExpr, r: TypeExpr) -> TypeExpr {
        TypeExpr::Or(Box::new(l), Box::new(r))
    }

    /// Node count, counting each atom and `omega` as one node.
    pub fn size(&self) -> usize {
        match self {
            TypeExpr::Atom(_) | TypeExpr::Omega => 1,
            TypeExpr::Arrow(l, r) | TypeExpr::And(l, r) | TypeExpr::Or(l, r) => {
                1 + l.size() + r.size()
            }
        }
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self, TypeExpr::Atom(_) | TypeExpr::Omega)
    }

    /// All subterms, including the type itself.
    pub fn subterms(&self) -> Vec<&TypeExpr> {
        let mut out = vec![self];
        match self {
            TypeExpr::Atom(_) | TypeExpr::Omega => {}
            TypeExpr::Arrow(l, r) | TypeExpr::And(l, r) | TypeExpr::Or(l, r) => {
                out.extend(l.subterms());
                out.extend(r.subterms());
            }
        }
        out
    }
}

impl fmt::Display for TypeExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_type(self))
    }
}

// ---------------------------------------------------------------------------
// Concrete syntax
// ---------------------------------------------------------------------------

/// Parse error kinds. Mixed `&`/`|` at one level is rejected rather than
/// disambiguated: the two connectives have no relative precedence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax,
    AmbiguousMix,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub pos: usize,
    pub msg: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "parse error at {}: {}", self.pos, self.msg)
    }
}

impl std::error::Error for ParseError {}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Arrow,
    Amp,
    Pipe,
    LParen,
    RParen,
    Eof,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src: src.as_bytes(),
            pos: 0,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Result<(Tok, usize), ParseError> {
        let save = self.pos;
        let t = self.next()?;
        let at = (self.pos, save);
        self.pos = at.1;
        Ok((t.0, t.1))
    }

    fn next(&mut self) -> Result<(Tok, usize), ParseError> {
        self.skip_ws();
        let start = self.pos;
        if self.pos >= self.src.len() {
            return Ok((Tok::Eof, start));
        }
        let c = self.src[self.pos];
        match c {
            b'(' => {
                self.pos += 1;
                Ok((Tok::LParen, start))
            }
            b')' => {
                self.pos += 1;
                Ok((Tok::RParen, start))
            }
            b'&' => {
                self.pos += 1;
                Ok((Tok::Amp, start))
            }
            b'|' => {
                self.pos += 1;
                Ok((Tok::Pipe, start))
            }
            b'-' => {
                if self.pos + 1 < self.src.len() && self.src[self.pos + 1] == b'>' {
                    self.pos += 2;
                    Ok((Tok::Arrow, start))
                } else {
                    Err(ParseError {
                        kind: ParseErrorKind::Syntax,
                        pos: start,
                        msg: "expected `->`".into(),
                    })
                }
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
                Ok((Tok::Ident(name), start))
            }
            _ => Err(ParseError {
                kind: ParseErrorKind::Syntax,
                pos: start,
                msg: format!("unexpected character `{}`", c as char),
            }),
        }
    }
}

struct TypeParser<'a> {
    lx: Lexer<'a>,
}

impl<'a> TypeParser<'a> {
    /// type := conn ("->" type)?   — arrow is right-associative
    fn parse_type(&mut self) -> Result<TypeExpr, ParseError> {
        let left = self.parse_conn()?;
        let (tok, _) = self.lx.peek()?;
        if tok == Tok::Arrow {
            self.lx.next()?;
            let right = self.parse_type()?;
            Ok(TypeExpr::arrow(left, right))
        } else {
            Ok(left)
        }
    }

    /// conn := operand (("&" operand)+ | ("|" operand)+)?
    ///
    /// `&`-chains fold to the left; mixing `&` and `|` at one level is an
    /// ambiguity error.
    fn parse_conn(&mut self) -> Result<TypeExpr, ParseError> {
        let mut acc = self.parse_operand()?;
        let (first, _) = self.lx.peek()?;
        let sep = match first {
            Tok::Amp => Tok::Amp,
            Tok::Pipe => Tok::Pipe,
            _ => return Ok(acc),
        };
        loop {
            let (tok, pos) = self.lx.peek()?;
            match tok {
                t if t == sep => {
                    self.lx.next()?;
                    let rhs = self.parse_operand()?;
                    acc = if sep == Tok::Amp {
                        TypeExpr::and(acc, rhs)
                    } else {
                        TypeExpr::or(acc, rhs)
                    };
                }
                Tok::Amp | Tok::Pipe => {
                    return Err(ParseError {
                        kind: ParseErrorKind::AmbiguousMix,
                        pos,
                        msg: "mixing `&` and `|` at one level requires parentheses".into(),
                    });
                }
                _ => return Ok(acc),
            }
        }
    }

    fn parse_operand(&mut self) -> Result<TypeExpr, ParseError> {
        let (tok, pos) = self.lx.next()?;
        match tok {
            Tok::Ident(name) => {
                if name == "omega" {
                    Ok(TypeExpr::Omega)
                } else {
                    Ok(TypeExpr::Atom(name))
                }
            }
            Tok::LParen => {
                let inner = self.parse_type()?;
                let (tok, pos) = self.lx.next()?;
                if tok == Tok::RParen {
                    Ok(inner)
                } else {
                    Err(ParseError {
                        kind: ParseErrorKind::Syntax,
                        pos,
                        msg: "expected `)`".into(),
                    })
                }
            }
            other => Err(ParseError {
                kind: ParseErrorKind::Syntax,
                pos,
                msg: format!("expected a type, found {:?}", other),
            }),
        }
    }
}

/// Parse the concrete type syntax: `&` for intersection, `|` for union,
/// `->` for arrow (right-associative), `omega` for the top type. `&`/`|`
/// bind tighter than `->`; mixing `&` and `|` without parentheses is
/// rejected.
pub fn parse_type(text: &str) -> Result<TypeExpr, ParseError> {
    let mut p = TypeParser {
        lx: Lexer::new(text),
    };
    let t = p.parse_type()?;
    let (tok, pos) = p.lx.next()?;
    if tok != Tok::Eof {
        return Err(ParseError {
            kind: ParseErrorKind::Syntax,
            pos,
            msg: format!("trailing input starting with {:?}", tok),
        });
    }
    Ok(t)
}

fn print_prec(t: &TypeExpr, out: &mut String) {
    match t {
        TypeExpr::Atom(n) => out.push_str(n),
        TypeExpr::Omega => out.push_str("omega"),
        TypeExpr::Arrow(l, r) => {
            // left operand of an arrow needs parens only when it is an arrow
            let lparen = matches!(**l, TypeExpr::Arrow(..));
            if lparen {
                out.push('(');
            }
            print_prec(l, out);
            if lparen {
                out.push(')');
            }
            out.push_str(" -> ");
            print_prec(r, out);
        }
        TypeExpr::And(l, r) => {
            print_conn_child(l, out, true, false);
            out.push_str(" & ");
            print_conn_child(r, out, true, true);
        }
        TypeExpr::Or(l, r) => {
            print_conn_child(l, out, false, false);
            out.push_str(" | ");
            print_conn_child(r, out, false, true)
        }
    }
}

fn print_conn_child(t: &TypeExpr, out: &mut String, in_and: bool, right: bool) {
    let parens = match t {
        TypeExpr::Arrow(..) => true,
        TypeExpr::And(..) => !in_and || right, // left-associative chains print bare
        TypeExpr::Or(..) => in_and || right,
        _ => false,
    };
    if parens {
        out.push('(');
    }
    print_prec(t, out);
    if parens {
        out.push(')');
    }
}

/// Print a type so that `parse_type(print_type(t)) == t` exactly.
pub fn print_type(t: &TypeExpr) -> String {
    let mut s = String::new();
    print_prec(t, &mut s);
    s
}

// ---------------------------------------------------------------------------
// AC-canonical forms
// ---------------------------------------------------------------------------

/// A type with intersections and unions flattened into n-ary nodes whose
/// children are sorted (lexicographically on their fully parenthesized
/// print) and deduplicated. Equal canonical types means equal modulo
/// associativity, commutativity and idempotence of `&` and of `|`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum CanonicalType {
    Atom(String),
    Omega,
    Arrow(Box<CanonicalType>, Box<CanonicalType>),
    /// n ≥ 2 children, none of which is an `And`.
    And(Vec<CanonicalType>),
    /// n ≥ 2 children, none of which is an `Or`.
    Or(Vec<CanonicalType>),
}

impl CanonicalType {
    /// Fully parenthesized print, used as the child sort key.
    pub fn sort_key(&self) -> String {
        match self {
            CanonicalType::Atom(n) => n.clone(),
            CanonicalType::Omega => "omega".into(),
            CanonicalType::Arrow(l, r) => format!("({}->{})", l.sort_key(), r.sort_key()),
            CanonicalType::And(cs) => {
                let inner: Vec<String> = cs.iter().map(|c| c.sort_key()).collect();
                format!("({})", inner.join("&"))
            }
            CanonicalType::Or(cs) => {
                let inner: Vec<String> = cs.iter().map(|c| c.sort_key()).collect();
                format!("({})", inner.join("|"))
            }
        }
    }

    /// Read the canonical form back as a raw type. n-ary nodes fold to the
    /// right: `And([a,b,c])` becomes `a & (b & c)`.
    pub fn to_type_expr(&self) -> TypeExpr {
        match self {
            CanonicalType::Atom(n) => TypeExpr::Atom(n.clone()),
            CanonicalType::Omega => TypeExpr::Omega,
            CanonicalType::Arrow(l, r) => TypeExpr::arrow(l.to_type_expr(), r.to_type_expr()),
            CanonicalType::And(cs) => fold_right(cs, TypeExpr::and),
            CanonicalType::Or(cs) => fold_right(cs, TypeExpr::or),
        }
    }

    /// Children of an `And` node, or the type itself when not an `And`.
    pub fn and_parts(&self) -> Vec<CanonicalType> {
        match self {
            CanonicalType::And(cs) => cs.clone(),
            other => vec![other.clone()],
        }
    }

    pub fn or_parts(&self) -> Vec<CanonicalType> {
        match self {
            CanonicalType::Or(cs) => cs.clone(),
            other => vec![other.clone()],
        }
    }

    pub fn size(&self) -> usize {
        match self {
            CanonicalType::Atom(_) | CanonicalType::Omega => 1,
            CanonicalType::Arrow(l, r) => 1 + l.size() + r.size(),
            CanonicalType::And(cs) | CanonicalType::Or(cs) => {
                cs.len() - 1 + cs.iter().map(|c| c.size()).sum::<usize>()
            }
        }
    }
}

impl fmt::Display for CanonicalType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_type(&self.to_type_expr()))
    }
}

fn fold_right(cs: &[CanonicalType], mk: fn(TypeExpr, TypeExpr) -> TypeExpr) -> TypeExpr {
    let mut iter = cs.iter().rev();
    let mut acc = iter.next().expect("n-ary node with no children").to_type_expr();
    for c in iter {
        acc = mk(c.to_type_expr(), acc);
    }
    acc
}

/// Rebuild a sorted, deduplicated n-ary And/Or from arbitrary children.
/// Children that are themselves the same connective are spliced in.
pub fn canonical_nary(is_and: bool, children: Vec<CanonicalType>) -> CanonicalType {
    let mut flat = Vec::new();
    for c in children {
        match (is_and, c) {
            (true, CanonicalType::And(cs)) => flat.extend(cs),
            (false, CanonicalType::Or(cs)) => flat.extend(cs),
            (_, other) => flat.push(other),
        }
    }
    flat.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    flat.dedup();
    if flat.len() == 1 {
        flat.pop().unwrap()
    } else if is_and {
        CanonicalType::And(flat)
    } else {
        CanonicalType::Or(flat)
    }
}

/// Flatten, sort and deduplicate every intersection and union in `t`.
pub fn canonicalize(t: &TypeExpr) -> CanonicalType {
    match t {
        TypeExpr::Atom(n) => CanonicalType::Atom(n.clone()),
        TypeExpr::Omega => CanonicalType::Omega,
        TypeExpr::Arrow(l, r) => {
            CanonicalType::Arrow(Box::new(canonicalize(l)), Box::new(canonicalize(r)))
        }
        TypeExpr::And(l, r) => canonical_nary(true, vec![canonicalize(l), canonicalize(r)]),
        TypeExpr::Or(l, r) => canonical_nary(false, vec![canonicalize(l), canonicalize(r)]),
    }
}

/// AC-equality of raw types.
pub fn ac_equal(a: &TypeExpr, b: &TypeExpr) -> bool {
    canonicalize(a) == canonicalize(b)
}

// ---------------------------------------------------------------------------
// Type contexts
// ---------------------------------------------------------------------------

/// One step of a path into a type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CtxStep {
    ArrowLeft,
    ArrowRight,
    AndLeft,
    AndRight,
    OrLeft,
    OrRight,
}

impl CtxStep {
    pub fn label(&self) -> &'static str {
        match self {
            CtxStep::ArrowLeft => "arrow-left",
            CtxStep::ArrowRight => "arrow-right",
            CtxStep::AndLeft => "and-left",
            CtxStep::AndRight => "and-right",
            CtxStep::OrLeft => "or-left",
            CtxStep::OrRight => "or-right",
        }
    }
}

/// A one-hole context, addressed by the path from the root to the hole.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct TypeContext {
    pub path: Vec<CtxStep>,
}

impl TypeContext {
    pub fn root() -> TypeContext {
        TypeContext { path: Vec::new() }
    }

    pub fn push(&self, step: CtxStep) -> TypeContext {
        let mut path = self.path.clone();
        path.push(step);
        TypeContext { path }
    }

    /// Replace the subterm of `whole` addressed by this context with `sub`.
    /// Panics if the path does not exist in `whole`; contexts are only built
    /// by traversals of the same type.
    pub fn plug(&self, whole: &TypeExpr, sub: TypeExpr) -> TypeExpr {
        fn go(path: &[CtxStep], whole: &TypeExpr, sub: TypeExpr) -> TypeExpr {
            let Some((step, rest)) = path.split_first() else {
                return sub;
            };
            match (step, whole) {
                (CtxStep::ArrowLeft, TypeExpr::Arrow(l, r)) => {
                    TypeExpr::arrow(go(rest, l, sub), (**r).clone())
                }
                (CtxStep::ArrowRight, TypeExpr::Arrow(l, r)) => {
                    TypeExpr::arrow((**l).clone(), go(rest, r, sub))
                }
                (CtxStep::AndLeft, TypeExpr::And(l, r)) => {
                    TypeExpr::and(go(rest, l, sub), (**r).clone())
                }
                (CtxStep::AndRight, TypeExpr::And(l, r)) => {
                    TypeExpr::and((**l).clone(), go(rest, r, sub))
                }
                (CtxStep::OrLeft, TypeExpr::Or(l, r)) => {
                    TypeExpr::or(go(rest, l, sub), (**r).clone())
                }
                (CtxStep::OrRight, TypeExpr::Or(l, r)) => {
                    TypeExpr::or((**l).clone(), go(rest, r, sub))
                }
                _ => panic!("context path does not match type shape"),
            }
        }
        go(&self.path, whole, sub)
    }

    /// The subterm of `whole` addressed by this context.
    pub fn focus<'a>(&self, whole: &'a TypeExpr) -> &'a TypeExpr {
        let mut cur = whole;
        for step in &self.path {
            cur = match (step, cur) {
                (CtxStep::ArrowLeft, TypeExpr::Arrow(l, _)) => l,
                (CtxStep::ArrowRight, TypeExpr::Arrow(_, r)) => r,
                (CtxStep::AndLeft, TypeExpr::And(l, _)) => l,
                (CtxStep::AndRight, TypeExpr::And(_, r)) => r,
                (CtxStep::OrLeft, TypeExpr::Or(l, _)) => l,
                (CtxStep::OrRight, TypeExpr::Or(_, r)) => r,
                _ => panic!("context path does not match type shape"),
            };
        }
        cur
    }

    pub fn render(&self) -> String {
        if self.path.is_empty() {
            "root".to_string()
        } else {
            self.path
                .iter()
                .map(|s| s.label())
                .collect::<Vec<_>>()
                .join("/")
        }
    }
}

// ---------------------------------------------------------------------------
// Semantic equivalence
// ---------------------------------------------------------------------------

/// Normal form of `t` under the semantic equalities oriented left-to-right:
///
/// `omega -> a  ↦  a` (atoms), `omega -> omega  ↦  omega`,
/// `s & omega ↦ s`, `omega & s ↦ s`, `s | omega ↦ omega`, `omega | s ↦ omega`.
///
/// Each rule only inspects a node and the values of its children, so a single
/// bottom-up pass reaches the (unique) fixed point.
pub fn sem_canon(t: &TypeExpr) -> TypeExpr {
    match t {
        TypeExpr::Atom(_) | TypeExpr::Omega => t.clone(),
        TypeExpr::Arrow(l, r) => {
            let l = sem_canon(l);
            let r = sem_canon(r);
            if l == TypeExpr::Omega && r.is_atomic() {
                r
            } else {
                TypeExpr::arrow(l, r)
            }
        }
        TypeExpr::And(l, r) => {
            let l = sem_canon(l);
            let r = sem_canon(r);
            if r == TypeExpr::Omega {
                l
            } else if l == TypeExpr::Omega {
                r
            } else {
                TypeExpr::and(l, r)
            }
        }
        TypeExpr::Or(l, r) => {
            let l = sem_canon(l);
            let r = sem_canon(r);
            if l == TypeExpr::Omega || r == TypeExpr::Omega {
                TypeExpr::Omega
            } else {
                TypeExpr::or(l, r)
            }
        }
    }
}

/// Semantic equivalence: the minimal congruence equating every atom `a` with
/// `omega -> a`, `omega` with `omega -> omega`, and absorbing `omega` in
/// intersections and unions. Decided by comparing semantic canonical forms
/// syntactically — the relation is *not* associative-commutative.
pub fn sem_equiv(s: &TypeExpr, t: &TypeExpr) -> bool {
    sem_canon(s) == sem_canon(t)
}

// ---------------------------------------------------------------------------
// Bounded enumeration (shared by test suites and the acceptance runner)
// ---------------------------------------------------------------------------

/// Enumerate every type over the given atom names (plus `omega`) up to the
/// given node count. Sizes follow [`TypeExpr::size`].
pub fn enumerate_types(atoms: &[&str], max_size: usize) -> Vec<TypeExpr> {
    let mut by_size: Vec<Vec<TypeExpr>> = vec![Vec::new(); max_size + 1];
    if max_size >= 1 {
        by_size[1].push(TypeExpr::Omega);
        for a in atoms {
            by_size[1].push(TypeExpr::atom(*a));
        }
    }
    for size in 2..=max_size {
        let mut level = Vec::new();
        for lsize in 1..size.saturating_sub(1) {
            let rsize = size - 1 - lsize;
            if rsize == 0 {
                continue;
            }
            for i in 0..by_size[lsize].len() {
                for j in 0..by_size[rsize].len() {
                    let l = by_size[lsize][i].clone();
                    let r = by_size[rsize][j].clone();
                    level.push(TypeExpr::arrow(l.clone(), r.clone()));
                    level.push(TypeExpr::and(l.clone(), r.clone()));
                    level.push(TypeExpr::or(l, r));
                }
            }
        }
        by_size[size] = level;
    }
    by_size.into_iter().flatten().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> TypeExpr {
        parse_type(s).unwrap()
    }

    #[test]
    fn arrow_is_right_associative() {
        assert_eq!(
            p("a -> b -> c"),
            TypeExpr::arrow(
                TypeExpr::atom("a"),
                TypeExpr::arrow(TypeExpr::atom("b"), TypeExpr::atom("c"))
            )
        );
    }

    #[test]
    fn connectives_bind_tighter_than_arrow() {
        assert_eq!(
            p("a & b -> c"),
            TypeExpr::arrow(
                TypeExpr::and(TypeExpr::atom("a"), TypeExpr::atom("b")),
                TypeExpr::atom("c")
            )
        );
    }

    #[test]
    fn mixed_connectives_are_rejected() {
        let err = parse_type("a & b | c").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::AmbiguousMix);
        // parenthesized mixes are fine
        assert!(parse_type("(a & b) | c").is_ok());
        assert!(parse_type("a & (b | c)").is_ok());
    }

    #[test]
    fn omega_is_not_an_atom() {
        assert_eq!(p("omega"), TypeExpr::Omega);
        assert_eq!(p("omega1"), TypeExpr::atom("omega1"));
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let err = parse_type("a -> (b & ").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::Syntax);
        assert!(err.pos >= 9);
        assert!(parse_type("a -").is_err());
        assert!(parse_type("").is_err());
        assert!(parse_type("a b").is_err());
    }

    #[test]
    fn print_round_trips() {
        for s in [
            "a -> b -> c",
            "(a -> b) -> c",
            "a & b & c",
            "a & (b & c)",
            "(a -> b) | omega",
            "(a | b) & (c | d)",
            "((p1 -> p2) & p2) | p3",
            "omega -> p -> p",
        ] {
            let t = p(s);
            assert_eq!(parse_type(&print_type(&t)).unwrap(), t, "round trip {s}");
        }
    }

    #[test]
    fn print_examples() {
        assert_eq!(
            print_type(&TypeExpr::arrow(
                TypeExpr::atom("a"),
                TypeExpr::arrow(TypeExpr::atom("b"), TypeExpr::atom("c"))
            )),
            "a -> b -> c"
        );
        assert_eq!(
            print_type(&TypeExpr::and(TypeExpr::atom("a"), TypeExpr::atom("b"))),
            "a & b"
        );
        assert_eq!(
            print_type(&TypeExpr::or(
                TypeExpr::arrow(TypeExpr::atom("a"), TypeExpr::atom("b")),
                TypeExpr::Omega
            )),
            "(a -> b) | omega"
        );
    }

    #[test]
    fn canonicalize_flattens_sorts_dedupes() {
        let t = p("a & (b & a)");
        assert_eq!(
            canonicalize(&t),
            CanonicalType::And(vec![
                CanonicalType::Atom("a".into()),
                CanonicalType::Atom("b".into())
            ])
        );
        assert_eq!(canonicalize(&p("a & b")), canonicalize(&p("b & a")));
        assert_eq!(
            canonicalize(&p("(b & a) -> c")),
            canonicalize(&p("(a & b) -> c"))
        );
        // idempotent: re-canonicalizing the rendered form is stable
        let c = canonicalize(&p("(c | a) | (b | c)"));
        assert_eq!(canonicalize(&c.to_type_expr()), c);
    }

    #[test]
    fn canonicalize_collapses_idempotent_singletons() {
        assert_eq!(canonicalize(&p("a & a")), CanonicalType::Atom("a".into()));
    }

    #[test]
    fn sem_canon_examples() {
        assert_eq!(sem_canon(&p("omega -> a")), p("a"));
        assert_eq!(sem_canon(&p("omega -> omega")), p("omega"));
        assert_eq!(sem_canon(&p("(a & omega) | omega")), p("omega"));
        // omega -> (a -> b) is not equivalent to a -> b
        assert_eq!(sem_canon(&p("omega -> a -> b")), p("omega -> a -> b"));
        assert_eq!(sem_canon(&p("omega -> omega -> a")), p("a"));
    }

    #[test]
    fn sem_equiv_examples() {
        assert!(sem_equiv(&p("a"), &p("omega -> a")));
        assert!(!sem_equiv(&p("a & b"), &p("b & a")));
        assert!(!sem_equiv(&p("a -> b & c"), &p("(a -> b) & (a -> c)")));
    }

    #[test]
    fn sem_canon_is_idempotent_on_small_types() {
        for t in enumerate_types(&["p", "q"], 5) {
            let once = sem_canon(&t);
            assert_eq!(sem_canon(&once), once, "idempotence on {t}");
        }
    }

    #[test]
    fn sem_equiv_is_a_congruence_on_small_types() {
        // if s ≃ s' then C[s] ≃ C[s'] for a sample of contexts
        let types = enumerate_types(&["p"], 4);
        let contexts: Vec<Box<dyn Fn(&TypeExpr) -> TypeExpr>> = vec![
            Box::new(|t: &TypeExpr| TypeExpr::arrow(t.clone(), TypeExpr::atom("q"))),
            Box::new(|t: &TypeExpr| TypeExpr::arrow(TypeExpr::atom("q"), t.clone())),
            Box::new(|t: &TypeExpr| TypeExpr::and(t.clone(), TypeExpr::atom("q"))),
            Box::new(|t: &TypeExpr| TypeExpr::or(TypeExpr::atom("q"), t.clone())),
        ];
        for s in &types {
            let s2 = sem_canon(s);
            for ctx in &contexts {
                assert!(sem_equiv(&ctx(s), &ctx(&s2)));
            }
        }
    }

    #[test]
    fn plug_and_focus_agree() {
        let t = p("(a -> b) & (c | d)");
        let ctx = TypeContext {
            path: vec![CtxStep::AndRight, CtxStep::OrLeft],
        };
        assert_eq!(*ctx.focus(&t), p("c"));
        assert_eq!(ctx.plug(&t, p("x")), p("(a -> b) & (x | d)"));
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_types(&["p", "q"], 1).len(), 3);
        assert_eq!(enumerate_types(&["p", "q"], 3).len(), 3 + 27);
    }
}
