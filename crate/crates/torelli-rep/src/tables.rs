//! Decomposition tables: declared rows per genus, compared through relations
//! against computed decompositions.
//!
//! Relation syntax, e.g. `col2 == col1 + branch[0,1] - {(0..0)}`:
//! operands are `colN`, `undetermined`, `space(M)`, `sp(M)`, `branch[c..]`,
//! `coinv(M)`, `image_pi6(M)`, `min(A,B)`, `dual(A)` and literal sets
//! `{(pattern), 2(pattern), ...}`; comparisons are `==`, `<=` (sub-multiset)
//! and `~=` (equal on the labels the table lists).

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use serde::Deserialize;
use torelli_core::characters::{module_character_as, weyl_dim, Algebra, IrrepLabel};
use torelli_core::decompose::{branch_c_to_a, decompose_character, decompose_space_by_character, hwv_solve, Decomposition};
use torelli_core::equivariant_maps::{pi6, unipotent_coinvariants, Elem};
use torelli_core::rep_spaces::{build, ModuleExpr, ModuleSpace};
use torelli_core::scalar_linalg::Echelon;

use crate::pattern::Pattern;
use crate::report::{Report, Status};

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Block {
    pub genus: Vec<usize>,
    pub rows: Vec<String>,
    #[serde(default)]
    pub undetermined: Vec<String>,
    pub relations: Vec<String>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableSpec {
    pub id: String,
    pub claim: String,
    pub columns: Vec<String>,
    #[serde(rename = "block")]
    pub blocks: Vec<Block>,
}

/// Signed multiset of irreducible labels.
pub type Multi = BTreeMap<IrrepLabel, i64>;

#[derive(Clone, Debug)]
struct Row {
    label: IrrepLabel,
    text: String,
    mults: Vec<i64>,
}

#[derive(Debug, thiserror::Error)]
pub enum TableError {
    #[error("{0}")]
    Load(String),
    #[error("unknown table '{0}'")]
    Unknown(String),
    #[error("relation '{rel}' at column {col}: {msg}")]
    Relation { rel: String, col: usize, msg: String },
    #[error("{0}")]
    Compute(String),
}

fn parse_label(text: &str, g: usize) -> Result<IrrepLabel, String> {
    let t = text.trim();
    let (alg, rest, rank) = match t.strip_prefix("Gamma") {
        Some(r) => (Algebra::C, r, g),
        None => (Algebra::A, t, g - 1),
    };
    let coords = Pattern::parse(rest).map_err(|e| e.to_string())?.at_rank(rank).map_err(|e| e.to_string())?;
    IrrepLabel::new(alg, coords).map_err(|e| e.to_string())
}

fn parse_row(text: &str, g: usize, ncols: usize) -> Result<Row, String> {
    let close = text.find(')').ok_or_else(|| format!("row '{text}': missing label"))?;
    let label = parse_label(&text[..=close], g)?;
    let mults = text[close + 1..]
        .split_whitespace()
        .map(|x| x.parse::<i64>().map_err(|_| format!("row '{text}': bad multiplicity '{x}'")))
        .collect::<Result<Vec<_>, _>>()?;
    if mults.len() != ncols {
        return Err(format!("row '{text}': {} entries for {ncols} columns", mults.len()));
    }
    Ok(Row { label, text: text[..=close].trim().to_string(), mults })
}

impl TableSpec {
    pub fn from_toml(text: &str) -> Result<TableSpec, String> {
        let t: TableSpec = toml::from_str(text).map_err(|e| e.to_string())?;
        for b in &t.blocks {
            for r in &b.rows {
                let g = b.genus.first().copied().unwrap_or(3);
                parse_row(r, g, t.columns.len())?;
            }
            for rel in &b.relations {
                parse_relation(rel).map_err(|e| e.to_string())?;
            }
        }
        Ok(t)
    }

    pub fn genera(&self) -> BTreeSet<usize> {
        self.blocks.iter().flat_map(|b| b.genus.iter().copied()).collect()
    }

    fn block(&self, g: usize) -> Option<&Block> {
        self.blocks.iter().find(|b| b.genus.contains(&g))
    }
}

pub fn load_tables(dir: &Path) -> Result<Vec<TableSpec>, TableError> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| TableError::Load(format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| {
            let text = fs::read_to_string(p).map_err(|e| TableError::Load(format!("{}: {e}", p.display())))?;
            TableSpec::from_toml(&text).map_err(|e| TableError::Load(format!("{}: {e}", p.display())))
        })
        .collect()
}

pub fn find<'a>(tables: &'a [TableSpec], id: &str) -> Result<&'a TableSpec, TableError> {
    tables.iter().find(|t| t.id == id).ok_or_else(|| TableError::Unknown(id.to_string()))
}

// ---- relation language ----

#[derive(Clone, Debug, PartialEq)]
enum Operand {
    Col(usize),
    Undetermined,
    Space(String),
    Sp(String),
    Branch(Vec<i32>),
    Coinv(String),
    ImagePi6(String),
    Min(Box<Operand>, Box<Operand>),
    Dual(Box<Operand>),
    Literal(Vec<(i64, String)>),
    Sum(Vec<(i64, Operand)>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Cmp {
    Eq,
    Sub,
    OnRows,
}

#[derive(Clone, Debug)]
struct Relation {
    lhs: Operand,
    cmp: Cmp,
    rhs: Operand,
}

struct RelParser<'a> {
    s: &'a str,
    pos: usize,
}

impl<'a> RelParser<'a> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T, (usize, String)> {
        Err((self.pos + 1, msg.into()))
    }

    fn ws(&mut self) {
        while self.s[self.pos..].starts_with(char::is_whitespace) {
            self.pos += self.s[self.pos..].chars().next().unwrap().len_utf8();
        }
    }

    fn eat(&mut self, tok: &str) -> bool {
        self.ws();
        if self.s[self.pos..].starts_with(tok) {
            self.pos += tok.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &str) -> Result<(), (usize, String)> {
        if self.eat(tok) {
            Ok(())
        } else {
            self.err(format!("expected '{tok}'"))
        }
    }

    /// Text up to the bracket matching the one just consumed.
    fn balanced(&mut self, open: char, close: char) -> Result<String, (usize, String)> {
        let start = self.pos;
        let mut depth = 1;
        for (k, c) in self.s[start..].char_indices() {
            if c == open {
                depth += 1;
            } else if c == close {
                depth -= 1;
                if depth == 0 {
                    self.pos = start + k + c.len_utf8();
                    return Ok(self.s[start..start + k].trim().to_string());
                }
            }
        }
        self.err(format!("unclosed '{open}'"))
    }

    fn sum(&mut self) -> Result<Operand, (usize, String)> {
        let mut terms = vec![(1, self.atom()?)];
        loop {
            if self.eat("+") {
                terms.push((1, self.atom()?));
            } else if self.eat("-") {
                terms.push((-1, self.atom()?));
            } else {
                break;
            }
        }
        Ok(if terms.len() == 1 { terms.pop().unwrap().1 } else { Operand::Sum(terms) })
    }

    fn atom(&mut self) -> Result<Operand, (usize, String)> {
        self.ws();
        let rest = &self.s[self.pos..];
        let ident: String = rest.chars().take_while(|c| c.is_ascii_alphanumeric() || *c == '_').collect();
        if ident.is_empty() {
            if self.eat("{") {
                let body = self.balanced('{', '}')?;
                let mut items = Vec::new();
                for part in split_top_commas(&body) {
                    let p = part.trim();
                    let k = p.find('(').unwrap_or(p.len());
                    let m = if k == 0 { 1 } else { p[..k].trim().parse::<i64>().map_err(|_| (self.pos, format!("bad multiplicity in '{p}'")))? };
                    Pattern::parse(&p[k..]).map_err(|e| (self.pos, e.to_string()))?;
                    items.push((m, p[k..].to_string()));
                }
                return Ok(Operand::Literal(items));
            }
            if self.eat("(") {
                let inner = self.sum()?;
                self.expect(")")?;
                return Ok(inner);
            }
            return self.err("expected an operand");
        }
        let at = self.pos;
        self.pos += ident.len();
        if let Some(n) = ident.strip_prefix("col") {
            if let Ok(k) = n.parse::<usize>() {
                if k == 0 {
                    return Err((at + 1, "columns are numbered from 1".into()));
                }
                return Ok(Operand::Col(k - 1));
            }
        }
        match ident.as_str() {
            "undetermined" => Ok(Operand::Undetermined),
            "Q" => Ok(Operand::Literal(vec![(1, "(0..0)".into())])),
            "branch" => {
                self.expect("[")?;
                let body = self.balanced('[', ']')?;
                let coords = body
                    .split(',')
                    .map(|x| x.trim().parse::<i32>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| (at + 1, format!("bad branch label '{body}'")))?;
                Ok(Operand::Branch(coords))
            }
            "space" | "sp" | "coinv" | "image_pi6" => {
                self.expect("(")?;
                let body = self.balanced('(', ')')?;
                ModuleExpr::parse(&body).map_err(|e| (at + 1, e.to_string()))?;
                Ok(match ident.as_str() {
                    "space" => Operand::Space(body),
                    "sp" => Operand::Sp(body),
                    "coinv" => Operand::Coinv(body),
                    _ => Operand::ImagePi6(body),
                })
            }
            "min" => {
                self.expect("(")?;
                let a = self.sum()?;
                self.expect(",")?;
                let b = self.sum()?;
                self.expect(")")?;
                Ok(Operand::Min(Box::new(a), Box::new(b)))
            }
            "dual" => {
                self.expect("(")?;
                let a = self.sum()?;
                self.expect(")")?;
                Ok(Operand::Dual(Box::new(a)))
            }
            other => Err((at + 1, format!("unknown operand '{other}'"))),
        }
    }
}

fn split_top_commas(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let (mut depth, mut start) = (0, 0);
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    if !s[start..].trim().is_empty() {
        out.push(&s[start..]);
    }
    out
}

fn parse_relation(text: &str) -> Result<Relation, TableError> {
    let mut p = RelParser { s: text, pos: 0 };
    let wrap = |(col, msg): (usize, String)| TableError::Relation { rel: text.to_string(), col, msg };
    let lhs = p.sum().map_err(wrap)?;
    let cmp = if p.eat("==") {
        Cmp::Eq
    } else if p.eat("<=") {
        Cmp::Sub
    } else if p.eat("~=") {
        Cmp::OnRows
    } else {
        return Err(wrap((p.pos + 1, "expected '==', '<=' or '~='".into())));
    };
    let rhs = p.sum().map_err(wrap)?;
    p.ws();
    if p.pos != text.len() {
        return Err(wrap((p.pos + 1, "trailing input".into())));
    }
    Ok(Relation { lhs, cmp, rhs })
}

// ---- evaluation ----

fn cache_dir() -> Option<PathBuf> {
    std::env::var_os("TORELLI_REP_CACHE").map(PathBuf::from)
}

fn cache_key(kind: &str, expr: &str, g: usize) -> String {
    let clean: String = expr.chars().map(|c| if c.is_ascii_alphanumeric() { c } else { '_' }).collect();
    format!("{kind}_g{g}_{clean}.txt")
}

fn read_cache(key: &str, alg: Algebra) -> Option<Multi> {
    let text = fs::read_to_string(cache_dir()?.join(key)).ok()?;
    let mut out = Multi::new();
    for line in text.lines() {
        let (m, l) = line.split_once(' ')?;
        out.insert(IrrepLabel::parse(l, Some(alg)).ok()?, m.parse().ok()?);
    }
    Some(out)
}

fn write_cache(key: &str, m: &Multi) {
    if let Some(dir) = cache_dir() {
        let body: String = m.iter().map(|(l, k)| format!("{k} {l}\n")).collect();
        let _ = fs::create_dir_all(&dir).and_then(|_| fs::write(dir.join(key), body));
    }
}

fn to_multi(d: &Decomposition) -> Multi {
    d.parts.iter().map(|(l, m)| (l.clone(), *m as i64)).collect()
}

type Memo = Mutex<BTreeMap<String, Arc<Multi>>>;

fn memo() -> &'static Memo {
    static M: OnceLock<Memo> = OnceLock::new();
    M.get_or_init(|| Mutex::new(BTreeMap::new()))
}

fn cached(kind: &str, expr: &str, g: usize, alg: Algebra, f: impl FnOnce() -> Result<Multi, String>) -> Result<Arc<Multi>, String> {
    let key = cache_key(kind, expr, g);
    if let Some(m) = memo().lock().unwrap().get(&key) {
        return Ok(m.clone());
    }
    let m = match read_cache(&key, alg) {
        Some(m) => m,
        None => {
            let m = f()?;
            write_cache(&key, &m);
            m
        }
    };
    let m = Arc::new(m);
    memo().lock().unwrap().insert(key, m.clone());
    Ok(m)
}

fn space(expr: &str, g: usize) -> Result<Arc<ModuleSpace>, String> {
    build(&ModuleExpr::parse(expr).map_err(|e| e.to_string())?, g).map_err(|e| e.to_string())
}

/// SL_g decomposition of a constructed space, with a dimension audit.
pub fn space_decomposition(expr: &str, g: usize) -> Result<Arc<Multi>, String> {
    cached("space", expr, g, Algebra::A, || {
        let s = space(expr, g)?;
        let d = decompose_space_by_character(&s).map_err(|e| e.to_string())?;
        if d.dimension() != s.dim() as u128 {
            return Err(format!("dimension audit failed for {expr}: {} vs {}", d.dimension(), s.dim()));
        }
        Ok(to_multi(&d))
    })
}

/// Sp_2g decomposition of a constructed space over H.
pub fn sp_decomposition(expr: &str, g: usize) -> Result<Arc<Multi>, String> {
    cached("sp", expr, g, Algebra::C, || {
        let s = space(expr, g)?;
        let d = decompose_character(&module_character_as(&s, Algebra::C)).map_err(|e| e.to_string())?;
        if d.dimension() != s.dim() as u128 {
            return Err(format!("dimension audit failed for {expr}: {} vs {}", d.dimension(), s.dim()));
        }
        Ok(to_multi(&d))
    })
}

/// Restriction of Γ_coords to SL_g, audited against the C_g Weyl dimension.
pub fn branch_decomposition(coords: &[i32], g: usize) -> Result<Multi, String> {
    let l = IrrepLabel::gamma(coords, g);
    let d = branch_c_to_a(&l).map_err(|e| e.to_string())?;
    if d.dimension() != weyl_dim(&l) {
        return Err(format!("branching audit failed for {l}: {} vs {}", d.dimension(), weyl_dim(&l)));
    }
    Ok(to_multi(&d))
}

/// Decomposition of π(M) ⊂ ∧⁶H: the rank of π on each highest-weight space.
pub fn image_pi6_decomposition(expr: &str, g: usize) -> Result<Arc<Multi>, String> {
    cached("image_pi6", expr, g, Algebra::A, || {
        let s = space(expr, g)?;
        let labels: Vec<IrrepLabel> = space_decomposition(expr, g)?.keys().cloned().collect();
        let ranks: Vec<(IrrepLabel, usize)> = labels
            .into_par_iter()
            .map(|l| {
                let w = hwv_solve(&s, &l.coords).map_err(|e| e.to_string())?;
                let mut ech = Echelon::new();
                for v in w.vectors {
                    let img = pi6(&Elem::new(s.clone(), v)).map_err(|e| e.to_string())?;
                    ech.insert(img.vec);
                }
                Ok((l, ech.rank()))
            })
            .collect::<Result<_, String>>()?;
        Ok(ranks.into_iter().filter(|(_, r)| *r > 0).map(|(l, r)| (l, r as i64)).collect())
    })
}

pub fn coinvariant_decomposition(expr: &str, g: usize) -> Result<Multi, String> {
    let s = space(expr, g)?;
    let (_, d) = unipotent_coinvariants(&s).map_err(|e| e.to_string())?;
    Ok(to_multi(&d))
}

struct Ctx<'a> {
    g: usize,
    cols: Vec<Multi>,
    undetermined: Multi,
    _rows: &'a [Row],
}

fn add_into(acc: &mut Multi, m: &Multi, k: i64) {
    for (l, c) in m {
        *acc.entry(l.clone()).or_insert(0) += k * c;
    }
    acc.retain(|_, c| *c != 0);
}

fn eval(op: &Operand, cx: &Ctx) -> Result<Multi, String> {
    let g = cx.g;
    Ok(match op {
        Operand::Col(k) => cx.cols.get(*k).cloned().ok_or_else(|| format!("no column {}", k + 1))?,
        Operand::Undetermined => cx.undetermined.clone(),
        Operand::Space(e) => (*space_decomposition(e, g)?).clone(),
        Operand::Sp(e) => (*sp_decomposition(e, g)?).clone(),
        Operand::Branch(c) => branch_decomposition(c, g)?,
        Operand::Coinv(e) => coinvariant_decomposition(e, g)?,
        Operand::ImagePi6(e) => (*image_pi6_decomposition(e, g)?).clone(),
        Operand::Min(a, b) => {
            let (a, b) = (eval(a, cx)?, eval(b, cx)?);
            a.iter().filter_map(|(l, m)| b.get(l).map(|n| (l.clone(), (*m).min(*n)))).filter(|(_, m)| *m > 0).collect()
        }
        Operand::Dual(a) => eval(a, cx)?.into_iter().map(|(l, m)| (l.dual(), m)).collect(),
        Operand::Literal(items) => {
            let mut out = Multi::new();
            for (m, p) in items {
                *out.entry(parse_label(p, g)?).or_insert(0) += m;
            }
            out
        }
        Operand::Sum(terms) => {
            let mut out = Multi::new();
            for (k, t) in terms {
                add_into(&mut out, &eval(t, cx)?, *k);
            }
            out
        }
    })
}

fn multi_dim(m: &Multi) -> i128 {
    m.iter().map(|(l, k)| weyl_dim(l) as i128 * *k as i128).sum()
}

fn fmt_multi(m: &Multi) -> String {
    if m.is_empty() {
        return "0".into();
    }
    m.iter().map(|(l, k)| format!("{k}{l}")).collect::<Vec<_>>().join(" + ")
}

/// Per-label differences between two multisets, restricted to `only` if given.
fn differences(want: &Multi, got: &Multi, only: Option<&BTreeSet<IrrepLabel>>) -> Vec<String> {
    let labels: BTreeSet<&IrrepLabel> = want.keys().chain(got.keys()).collect();
    let mut out = Vec::new();
    for l in labels {
        if only.is_some_and(|o| !o.contains(l)) {
            continue;
        }
        let (w, a) = (want.get(l).copied().unwrap_or(0), got.get(l).copied().unwrap_or(0));
        if w != a {
            let kind = if a == 0 {
                "missing"
            } else if w == 0 {
                "extra"
            } else {
                "multiplicity"
            };
            out.push(format!("{kind} {l}: expected {w}, actual {a}"));
        }
    }
    out
}

/// Outcome of one relation.
#[derive(Clone, Debug)]
pub struct RelationResult {
    pub relation: String,
    pub ok: bool,
    pub detail: Vec<String>,
}

pub struct TableOutcome {
    pub report: Report,
    pub relations: Vec<RelationResult>,
    pub rows: usize,
}

fn check_relation(text: &str, cx: &Ctx, row_labels: &BTreeSet<IrrepLabel>) -> RelationResult {
    let mut res = RelationResult { relation: text.to_string(), ok: false, detail: vec![] };
    let rel = match parse_relation(text) {
        Ok(r) => r,
        Err(e) => {
            res.detail.push(e.to_string());
            return res;
        }
    };
    let sides = eval(&rel.lhs, cx).and_then(|l| eval(&rel.rhs, cx).map(|r| (l, r)));
    let (lhs, rhs) = match sides {
        Ok(s) => s,
        Err(e) => {
            res.detail.push(e);
            return res;
        }
    };
    if let Some((l, m)) = lhs.iter().chain(rhs.iter()).find(|(_, m)| **m < 0) {
        res.detail.push(format!("negative multiplicity {m} for {l}"));
        return res;
    }
    match rel.cmp {
        Cmp::Eq => {
            let (dl, dr) = (multi_dim(&lhs), multi_dim(&rhs));
            if dl != dr {
                res.detail.push(format!("dimension audit: {dl} vs {dr}"));
            }
            res.detail.extend(differences(&lhs, &rhs, None));
        }
        Cmp::OnRows => res.detail.extend(differences(&lhs, &rhs, Some(row_labels))),
        Cmp::Sub => {
            for (l, m) in &lhs {
                let n = rhs.get(l).copied().unwrap_or(0);
                if n < *m {
                    res.detail.push(format!("{l}: {m} not contained in {n}"));
                }
            }
        }
    }
    res.ok = res.detail.is_empty();
    if res.ok {
        res.detail.push(format!("{} = {}", multi_dim(&lhs), fmt_multi(&lhs)));
    }
    res
}

pub fn verify_table(table: &TableSpec, g: usize) -> TableOutcome {
    let mut report = Report::new(&table.id, g);
    let block = match table.block(g) {
        Some(b) => b,
        None => {
            let gs: Vec<String> = table.genera().iter().map(|x| x.to_string()).collect();
            report.status = Status::Skip;
            report.first_diff = Some(format!("table given for g in {{{}}}", gs.join(",")));
            return TableOutcome { report, relations: vec![], rows: 0 };
        }
    };
    let parsed: Result<Vec<Row>, String> = block.rows.iter().map(|r| parse_row(r, g, table.columns.len())).collect();
    let undetermined: Result<Multi, String> = block.undetermined.iter().map(|p| parse_label(p, g).map(|l| (l, 1))).collect();
    let (rows, undetermined) = match (parsed, undetermined) {
        (Ok(r), Ok(u)) => (r, u),
        (Err(e), _) | (_, Err(e)) => return TableOutcome { report: report.fail(e), relations: vec![], rows: 0 },
    };
    let mut cols = vec![Multi::new(); table.columns.len()];
    for r in &rows {
        for (k, m) in r.mults.iter().enumerate() {
            if *m != 0 {
                *cols[k].entry(r.label.clone()).or_insert(0) += m;
            }
        }
    }
    let row_labels: BTreeSet<IrrepLabel> = rows.iter().map(|r| r.label.clone()).collect();
    let cx = Ctx { g, cols, undetermined, _rows: &rows };
    let relations: Vec<RelationResult> = block.relations.iter().map(|r| check_relation(r, &cx, &row_labels)).collect();
    let fails: Vec<&RelationResult> = relations.iter().filter(|r| !r.ok).collect();
    report.expected = format!("{} rows; {}", rows.len(), block.relations.join("; "));
    report.actual = relations.iter().map(|r| format!("{}: {}", if r.ok { "ok" } else { "mismatch" }, r.relation)).collect::<Vec<_>>().join("; ");
    if let Some(f) = fails.first() {
        report.status = Status::Fail;
        report.first_diff = Some(format!("{}: {}", f.relation, f.detail.first().cloned().unwrap_or_default()));
    } else {
        report.status = Status::Pass;
    }
    if !block.undetermined.is_empty() {
        report.note = Some(format!("membership of {} left undetermined", block.undetermined.join(", ")));
    }
    TableOutcome { report, relations, rows: rows.len() }
}

/// Rows of a table at `g` rendered as labels, for display.
pub fn row_labels(table: &TableSpec, g: usize) -> Result<Vec<(String, IrrepLabel, Vec<i64>)>, String> {
    let block = table.block(g).ok_or_else(|| format!("table '{}' has no rows at g={g}", table.id))?;
    block.rows.iter().map(|r| parse_row(r, g, table.columns.len()).map(|row| (row.text, row.label, row.mults))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
id = "sample"
claim = "wedge^2 of V"
columns = ["wedge(2,V)"]

[[block]]
genus = [3, 4]
rows = ["(0,1,0..0) 1"]
relations = ["col1 == space(wedge(2,V))", "col1 <= space(tensor(V,V))"]
"#;

    #[test]
    fn sample_table_passes() {
        let t = TableSpec::from_toml(SAMPLE).unwrap();
        for g in [3, 4] {
            let out = verify_table(&t, g);
            assert_eq!(out.report.status, Status::Pass, "{:?}", out.relations);
        }
        assert_eq!(verify_table(&t, 5).report.status, Status::Skip);
    }

    #[test]
    fn mismatch_is_itemized() {
        let t = TableSpec::from_toml(&SAMPLE.replace("(0,1,0..0) 1", "(0,1,0..0) 2")).unwrap();
        let out = verify_table(&t, 4);
        assert_eq!(out.report.status, Status::Fail);
        let d = out.report.first_diff.unwrap();
        assert!(d.contains("dimension audit"), "{d}");
        assert!(out.relations[0].detail.iter().any(|x| x.contains("multiplicity Phi[0,1,0]")));
    }

    #[test]
    fn relation_errors_have_columns() {
        match parse_relation("col1 == spaec(H)") {
            Err(TableError::Relation { col, .. }) => assert_eq!(col, 9),
            other => panic!("{other:?}"),
        }
        assert!(parse_relation("col1 = col2").is_err());
        assert!(parse_relation("col1 == {(0..0), 2(1,0..0)} + branch[0,1]").is_ok());
    }

    #[test]
    fn literal_and_min() {
        let rows: Vec<Row> = vec![];
        let cx = Ctx { g: 4, cols: vec![], undetermined: Multi::new(), _rows: &rows };
        let r = parse_relation("min(space(wedge(2,H)), {(0..0), (1,0..0)}) == Q").unwrap();
        assert_eq!(eval(&r.lhs, &cx).unwrap(), eval(&r.rhs, &cx).unwrap());
    }
}
