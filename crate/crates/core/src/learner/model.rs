use std::fmt;

use crate::dataset::{Dataset, RowBits};
use crate::error::{Error, Result};
use crate::infomeasure::FeatureSet;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Const(bool),
    Lit { feature: String, negated: bool },
    And(Vec<Expr>),
    Or(Vec<Expr>),
}

impl Expr {
    pub fn lit(feature: impl Into<String>) -> Self {
        Expr::Lit {
            feature: feature.into(),
            negated: false,
        }
    }

    pub fn neg(feature: impl Into<String>) -> Self {
        Expr::Lit {
            feature: feature.into(),
            negated: true,
        }
    }

    fn literal_count(&self) -> usize {
        match self {
            Expr::Const(_) => 0,
            Expr::Lit { .. } => 1,
            Expr::And(c) | Expr::Or(c) => c.iter().map(Expr::literal_count).sum(),
        }
    }

    fn collect_features(&self, out: &mut FeatureSet) {
        match self {
            Expr::Const(_) => {}
            Expr::Lit { feature, .. } => {
                out.insert(feature.clone());
            }
            Expr::And(c) | Expr::Or(c) => c.iter().for_each(|e| e.collect_features(out)),
        }
    }

    fn canonical(self) -> Expr {
        match self {
            Expr::And(children) => Expr::canonical_op(true, children),
            Expr::Or(children) => Expr::canonical_op(false, children),
            leaf => leaf,
        }
    }

    fn canonical_op(is_and: bool, children: Vec<Expr>) -> Expr {
        // `true` is the identity of `and` and absorbs `or`; dually for `false`.
        let identity = is_and;
        let mut flat = Vec::with_capacity(children.len());
        for child in children.into_iter().map(Expr::canonical) {
            match child {
                Expr::Const(c) if c == identity => {}
                Expr::Const(c) => return Expr::Const(c),
                Expr::And(inner) if is_and => flat.extend(inner),
                Expr::Or(inner) if !is_and => flat.extend(inner),
                other => flat.push(other),
            }
        }
        let mut keyed: Vec<(String, Expr)> = flat.into_iter().map(|e| (e.to_string(), e)).collect();
        keyed.sort_by(|a, b| a.0.cmp(&b.0));
        keyed.dedup_by(|a, b| a.0 == b.0);
        let mut flat: Vec<Expr> = keyed.into_iter().map(|(_, e)| e).collect();
        match flat.len() {
            0 => Expr::Const(identity),
            1 => flat.pop().unwrap(),
            _ if is_and => Expr::And(flat),
            _ => Expr::Or(flat),
        }
    }

    fn eval(&self, n: usize, leaf: &dyn Fn(&str) -> Result<RowBits>) -> Result<RowBits> {
        Ok(match self {
            Expr::Const(true) => RowBits::ones(n),
            Expr::Const(false) => RowBits::zeros(n),
            Expr::Lit { feature, negated } => {
                let mut bits = leaf(feature)?;
                if *negated {
                    bits.negate();
                }
                bits
            }
            Expr::And(children) => {
                let mut acc = RowBits::ones(n);
                for c in children {
                    acc.and_assign(&c.eval(n, leaf)?);
                }
                acc
            }
            Expr::Or(children) => {
                let mut acc = RowBits::zeros(n);
                for c in children {
                    acc.or_assign(&c.eval(n, leaf)?);
                }
                acc
            }
        })
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(true) => f.write_str("(and)"),
            Expr::Const(false) => f.write_str("(or)"),
            Expr::Lit {
                feature,
                negated: false,
            } => f.write_str(feature),
            Expr::Lit {
                feature,
                negated: true,
            } => write!(f, "(not {feature})"),
            Expr::And(c) | Expr::Or(c) => {
                f.write_str(if matches!(self, Expr::And(_)) {
                    "(and"
                } else {
                    "(or"
                })?;
                for e in c {
                    write!(f, " {e}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// A boolean formula over feature literals; predicts 1 where it holds,
/// optionally with the output negated.
///
/// Always kept in canonical form: nested operators of the same kind are
/// flattened, constants folded, children sorted and deduplicated, and an
/// output negation over a literal or constant is pushed into it. Two models
/// are equal iff their prefix serializations are equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RuleModel {
    expr: Expr,
    negate_output: bool,
}

impl RuleModel {
    pub fn new(expr: Expr, negate_output: bool) -> Self {
        let expr = expr.canonical();
        match (expr, negate_output) {
            (Expr::Const(c), true) => RuleModel::from_expr(Expr::Const(!c)),
            (Expr::Lit { feature, negated }, true) => RuleModel::from_expr(Expr::Lit {
                feature,
                negated: !negated,
            }),
            (expr, negate_output) => RuleModel {
                expr,
                negate_output,
            },
        }
    }

    fn from_expr(expr: Expr) -> Self {
        RuleModel {
            expr,
            negate_output: false,
        }
    }

    pub fn constant(value: bool) -> Self {
        RuleModel::from_expr(Expr::Const(value))
    }

    pub fn literal(feature: impl Into<String>, negated: bool) -> Self {
        RuleModel::from_expr(Expr::Lit {
            feature: feature.into(),
            negated,
        })
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn negate_output(&self) -> bool {
        self.negate_output
    }

    pub fn literal_count(&self) -> usize {
        self.expr.literal_count()
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.expr, Expr::Const(_))
    }

    /// Features referenced by the formula.
    pub fn features(&self) -> FeatureSet {
        let mut out = FeatureSet::new();
        self.expr.collect_features(&mut out);
        out
    }

    pub fn uses(&self, feature: &str) -> bool {
        self.features().contains(feature)
    }

    /// Canonical prefix serialization, e.g. `(and (not f7) f3)`.
    pub fn digest(&self) -> String {
        self.to_string()
    }

    /// Predictions on every row of `d`.
    pub fn predict(&self, d: &Dataset) -> Result<RowBits> {
        self.predict_with(d, None)
    }

    /// Predictions with `feature` forced to `value` on every row.
    pub fn predict_forced(&self, d: &Dataset, feature: &str, value: bool) -> Result<RowBits> {
        self.predict_with(d, Some((feature, value)))
    }

    fn predict_with(&self, d: &Dataset, forced: Option<(&str, bool)>) -> Result<RowBits> {
        let n = d.n_rows();
        let leaf = |name: &str| -> Result<RowBits> {
            match forced {
                Some((f, true)) if f == name => Ok(RowBits::ones(n)),
                Some((f, false)) if f == name => Ok(RowBits::zeros(n)),
                _ => d
                    .feature_index(name)
                    .map(|i| d.column(i).clone())
                    .ok_or_else(|| Error::UnknownFeature(name.to_string())),
            }
        };
        let mut out = self.expr.eval(n, &leaf)?;
        if self.negate_output {
            out.negate();
        }
        Ok(out)
    }

    pub fn parse(text: &str) -> Result<RuleModel> {
        let bad = || Error::Model(text.to_string());
        let tokens = tokenize(text);
        let mut pos = 0;
        let (expr, negate) = match tokens.as_slice() {
            ["(", "not", rest @ ..] if rest.first() == Some(&"(") => {
                pos = 2;
                let e = parse_expr(&tokens, &mut pos).ok_or_else(bad)?;
                if tokens.get(pos) != Some(&")") {
                    return Err(bad());
                }
                pos += 1;
                (e, true)
            }
            _ => (parse_expr(&tokens, &mut pos).ok_or_else(bad)?, false),
        };
        if pos != tokens.len() {
            return Err(bad());
        }
        Ok(RuleModel::new(expr, negate))
    }
}

impl fmt::Display for RuleModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negate_output {
            write!(f, "(not {})", self.expr)
        } else {
            write!(f, "{}", self.expr)
        }
    }
}

fn tokenize(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in text.char_indices() {
        if ch == '(' || ch == ')' || ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push(&text[s..i]);
            }
            if !ch.is_whitespace() {
                out.push(&text[i..i + 1]);
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push(&text[s..]);
    }
    out
}

/// Operators only occur right after `(`, so a bare `and` is a feature name.
fn parse_expr(tokens: &[&str], pos: &mut usize) -> Option<Expr> {
    let tok = *tokens.get(*pos)?;
    *pos += 1;
    match tok {
        ")" => None,
        "(" => {
            let op = *tokens.get(*pos)?;
            *pos += 1;
            if op == "not" {
                let name = *tokens.get(*pos)?;
                if name == "(" || name == ")" || tokens.get(*pos + 1) != Some(&")") {
                    return None;
                }
                *pos += 2;
                return Some(Expr::neg(name));
            }
            let mut children = Vec::new();
            while *tokens.get(*pos)? != ")" {
                children.push(parse_expr(tokens, pos)?);
            }
            *pos += 1;
            match op {
                "and" => Some(Expr::And(children)),
                "or" => Some(Expr::Or(children)),
                _ => None,
            }
        }
        name => Some(Expr::lit(name)),
    }
}

/// Minus the number of rows where `m` disagrees with the target. Every
/// literal of `m` must be in `s`, and `s` in the vocabulary of `d`.
pub fn score_model(m: &RuleModel, d: &Dataset, s: &FeatureSet) -> Result<f64> {
    d.resolve(s)?;
    if let Some(outside) = m.features().iter().find(|f| !s.contains(f)) {
        return Err(Error::Model(format!(
            "{m}: literal `{outside}` is outside the selected features"
        )));
    }
    let errors = m.predict(d)?.hamming(d.targets());
    Ok(0.0 - errors as f64)
}
