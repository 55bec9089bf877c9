//! Case manifests: a start vector, an operator chain and the claimed result,
//! all written for symbolic genus `g`.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use num_traits::One;
use serde::Deserialize;
use torelli_core::decompose::{is_highest_weight_vector, weight_of_vector};
use torelli_core::equivariant_maps::Elem;
use torelli_core::rep_spaces::{build, ModuleExpr};
use torelli_core::scalar_linalg::{fmt_rational, Rational, SparseVector};

use crate::chain::Chain;
use crate::expr::{self, eval_int, Def, Defs, Env};
use crate::pattern::Pattern;
use crate::report::{Report, Status};

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum DefSpec {
    Plain(String),
    Func { params: Vec<String>, body: String },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSpec {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub space: Option<String>,
    pub start: String,
    #[serde(default)]
    pub chain: Option<String>,
    /// Further `[chain, start]` terms added to the result.
    #[serde(default)]
    pub plus: Vec<[String; 2]>,
    #[serde(default)]
    pub expect: Option<String>,
    /// Asserts a nonzero highest weight vector of this weight.
    #[serde(default)]
    pub weight: Option<String>,
    /// Asserts a nonzero result.
    #[serde(default)]
    pub nonzero: bool,
    /// Integer variables `[name, lo, hi]`, iterated in order.
    #[serde(default)]
    pub forall: Vec<[String; 3]>,
    /// Restricts `forall` to pairwise distinct values.
    #[serde(default)]
    pub distinct: bool,
    #[serde(default)]
    pub g_min: Option<usize>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseManifest {
    pub id: String,
    pub claim: String,
    /// One of `hwv`, `bracket`, `derivation`, `composite`, `lemma`.
    pub kind: String,
    pub g_min: usize,
    #[serde(default)]
    pub g_max: Option<usize>,
    pub space: String,
    /// Set when the claimed value is known to disagree with the computation.
    #[serde(default)]
    pub conflict: Option<String>,
    #[serde(default)]
    pub defs: BTreeMap<String, DefSpec>,
    #[serde(rename = "check")]
    pub checks: Vec<CheckSpec>,
}

#[derive(Debug, thiserror::Error)]
pub enum ManifestError {
    #[error("{path}: {msg}")]
    Load { path: String, msg: String },
    #[error("unknown case '{0}'")]
    Unknown(String),
}

impl CaseManifest {
    pub fn from_toml(text: &str) -> Result<CaseManifest, String> {
        let m: CaseManifest = toml::from_str(text).map_err(|e| e.to_string())?;
        m.compile_defs()?;
        for c in &m.checks {
            expr::parse(&c.start).map_err(|e| format!("start: {e}"))?;
            if let Some(ch) = &c.chain {
                Chain::parse(ch).map_err(|e| format!("chain: {e}"))?;
            }
            for [ch, st] in &c.plus {
                Chain::parse(ch).map_err(|e| format!("plus: {e}"))?;
                expr::parse(st).map_err(|e| format!("plus: {e}"))?;
            }
            if let Some(e) = &c.expect {
                expr::parse(e).map_err(|e| format!("expect: {e}"))?;
            }
            if let Some(w) = &c.weight {
                Pattern::parse(w).map_err(|e| e.to_string())?;
            }
        }
        Ok(m)
    }

    pub fn compile_defs(&self) -> Result<Defs, String> {
        let mut defs = Defs::new();
        for (name, d) in &self.defs {
            let (params, body) = match d {
                DefSpec::Plain(b) => (vec![], b.as_str()),
                DefSpec::Func { params, body } => (params.clone(), body.as_str()),
            };
            let body = expr::parse(body).map_err(|e| format!("definition '{name}': {e}"))?;
            defs.insert(name.clone(), Def { params, body });
        }
        Ok(defs)
    }

    pub fn supports(&self, g: usize) -> bool {
        g >= self.g_min && self.g_max.is_none_or(|m| g <= m)
    }
}

pub fn load_cases(dir: &Path) -> Result<Vec<CaseManifest>, ManifestError> {
    let mut paths: Vec<_> = fs::read_dir(dir)
        .map_err(|e| ManifestError::Load { path: dir.display().to_string(), msg: e.to_string() })?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    paths.sort();
    let mut out = Vec::new();
    for p in paths {
        let text = fs::read_to_string(&p).map_err(|e| ManifestError::Load { path: p.display().to_string(), msg: e.to_string() })?;
        let m = CaseManifest::from_toml(&text).map_err(|msg| ManifestError::Load { path: p.display().to_string(), msg })?;
        out.push(m);
    }
    let mut ids: Vec<&str> = out.iter().map(|m| m.id.as_str()).collect();
    ids.sort();
    if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
        return Err(ManifestError::Load { path: dir.display().to_string(), msg: format!("duplicate case id '{}'", w[0]) });
    }
    Ok(out)
}

/// Result of one check at one binding of its variables.
struct Outcome {
    ok: bool,
    expected: String,
    actual: String,
    first_diff: Option<String>,
}

fn first_diff(space: &torelli_core::rep_spaces::ModuleSpace, want: &SparseVector, got: &SparseVector) -> Option<String> {
    let mut idx: Vec<usize> = want.support().chain(got.support()).collect();
    idx.sort_unstable();
    idx.dedup();
    idx.into_iter()
        .find(|&i| want.get(i) != got.get(i))
        .map(|i| format!("{}: expected {}, actual {}", space.label(i), fmt_rational(&want.get(i)), fmt_rational(&got.get(i))))
}

fn run_once(case: &CaseManifest, check: &CheckSpec, env: &Env) -> Result<Outcome, String> {
    let g = env.g;
    let space_text = check.space.as_deref().unwrap_or(&case.space);
    let space = build(&ModuleExpr::parse(space_text).map_err(|e| e.to_string())?, g).map_err(|e| e.to_string())?;
    let start = expr::evaluate(&check.start, env).map_err(|e| format!("start: {e}"))?;
    let sv = space.embed(&start).map_err(|e| format!("start: {e}"))?;
    let chain = match &check.chain {
        Some(c) => Chain::parse(c).map_err(|e| e.to_string())?,
        None => Chain::identity(),
    };
    let mut out = chain.apply(Elem::new(space.clone(), sv), env).map_err(|e| e.to_string())?;
    for [ch, st] in &check.plus {
        let f = expr::evaluate(st, env).map_err(|e| format!("plus: {e}"))?;
        let v = space.embed(&f).map_err(|e| format!("plus: {e}"))?;
        let term = Chain::parse(ch).map_err(|e| e.to_string())?.apply(Elem::new(space.clone(), v), env).map_err(|e| e.to_string())?;
        if term.space.expr() != out.space.expr() {
            return Err(format!("plus: '{ch}' lands in {}, not {}", term.space.expr(), out.space.expr()));
        }
        out.vec.add_scaled(&term.vec, &Rational::one());
    }
    let actual = out.space.format_vec(&out.vec);
    let mut expected = String::new();
    let mut problems: Vec<String> = Vec::new();
    let mut diff = None;
    if let Some(e) = &check.expect {
        let f = expr::evaluate(e, env).map_err(|e| format!("expect: {e}"))?;
        let want = out.space.embed(&f).map_err(|e| format!("expect: {e}"))?;
        expected = out.space.format_vec(&want);
        if want != out.vec {
            diff = first_diff(&out.space, &want, &out.vec);
            problems.push("value differs".into());
        }
    }
    if check.nonzero && out.vec.is_zero() {
        problems.push("result is zero".into());
    }
    if let Some(w) = &check.weight {
        let want = Pattern::parse(w).map_err(|e| e.to_string())?.at_rank(g - 1).map_err(|e| e.to_string())?;
        if expected.is_empty() {
            expected = format!("highest weight vector of weight {want:?}");
        }
        if out.vec.is_zero() {
            problems.push("result is zero".into());
        } else {
            let hw = is_highest_weight_vector(&out.space, &out.vec).map_err(|e| e.to_string())?;
            if !hw {
                problems.push("not killed by the raising operators".into());
            }
            match weight_of_vector(&out.space, &out.vec) {
                Some(got) if got == want => {}
                Some(got) => problems.push(format!("weight {got:?}, expected {want:?}")),
                None => problems.push("not a weight vector".into()),
            }
        }
    }
    let ok = problems.is_empty();
    if !ok && diff.is_none() {
        diff = Some(problems.join("; "));
    }
    Ok(Outcome { ok, expected, actual, first_diff: diff })
}

fn bindings(check: &CheckSpec, env: &Env) -> Result<Vec<Vec<(String, i64)>>, String> {
    let mut out: Vec<Vec<(String, i64)>> = vec![vec![]];
    for [name, lo, hi] in &check.forall {
        let mut next = Vec::new();
        for b in &out {
            let mut e = env.clone();
            for (n, v) in b {
                e = e.bind(n, *v);
            }
            let lo = eval_int(&expr::parse(lo).map_err(|e| e.to_string())?, &e).map_err(|e| e.to_string())?;
            let hi = eval_int(&expr::parse(hi).map_err(|e| e.to_string())?, &e).map_err(|e| e.to_string())?;
            for k in lo..=hi {
                if check.distinct && b.iter().any(|(_, v)| *v == k) {
                    continue;
                }
                let mut nb = b.clone();
                nb.push((name.clone(), k));
                next.push(nb);
            }
        }
        out = next;
    }
    Ok(out)
}

fn check_label(i: usize, check: &CheckSpec) -> String {
    check.name.clone().unwrap_or_else(|| format!("check {}", i + 1))
}

/// Runs every check of `case` at genus `g`.
pub fn verify_case(case: &CaseManifest, g: usize) -> Report {
    let mut report = Report::new(&case.id, g);
    if !case.supports(g) {
        report.status = Status::Skip;
        report.first_diff = Some(format!("case holds for g >= {}", case.g_min));
        return report;
    }
    let defs = match case.compile_defs() {
        Ok(d) => d,
        Err(e) => return report.fail(e),
    };
    let env = Env::new(g, &defs);
    let mut last = None;
    for (i, check) in case.checks.iter().enumerate() {
        if check.g_min.is_some_and(|m| g < m) {
            continue;
        }
        let label = check_label(i, check);
        let binds = match bindings(check, &env) {
            Ok(b) => b,
            Err(e) => return report.fail(format!("{label}: {e}")),
        };
        if binds.is_empty() {
            return report.fail(format!("{label}: no admissible indices at g={g}"));
        }
        for b in binds {
            let mut e = env.clone();
            for (n, v) in &b {
                e = e.bind(n, *v);
            }
            let at = if b.is_empty() {
                label.clone()
            } else {
                let s: Vec<String> = b.iter().map(|(n, v)| format!("{n}={v}")).collect();
                format!("{label} [{}]", s.join(","))
            };
            match run_once(case, check, &e) {
                Ok(o) if o.ok => last = Some(o),
                Ok(o) => {
                    report.status = Status::Fail;
                    report.expected = o.expected;
                    report.actual = o.actual;
                    report.first_diff = Some(format!("{at}: {}", o.first_diff.unwrap_or_default()));
                    return report;
                }
                Err(msg) => return report.fail(format!("{at}: {msg}")),
            }
        }
    }
    report.status = Status::Pass;
    if let Some(o) = last {
        report.expected = o.expected;
        report.actual = o.actual;
    }
    report
}

pub fn find<'a>(cases: &'a [CaseManifest], id: &str) -> Result<&'a CaseManifest, ManifestError> {
    cases.iter().find(|c| c.id == id).ok_or_else(|| ManifestError::Unknown(id.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
id = "sample"
claim = "-E(2,g) C(a1^b1^b2) = b_g"
kind = "hwv"
g_min = 3
space = "wedge(3,H)"

[defs]
t = "a1^b1^b2"
pair = { params = ["i"], body = "a{i}^b{i}" }

[[check]]
start = "t"
chain = "-E(2,g) o C"
expect = "b{g}"
weight = "(0..0,1)"

[[check]]
name = "sum of pairs"
start = "pair(i)^a{j}"
forall = [["i", "1", "g"], ["j", "1", "g"]]
distinct = true
nonzero = true
"#;

    #[test]
    fn sample_manifest_passes() {
        let m = CaseManifest::from_toml(SAMPLE).unwrap();
        for g in 3..=4 {
            let r = verify_case(&m, g);
            assert_eq!(r.status, Status::Pass, "{r:?}");
        }
        assert_eq!(verify_case(&m, 2).status, Status::Skip);
    }

    #[test]
    fn wrong_value_reports_first_difference() {
        let text = SAMPLE.replace("expect = \"b{g}\"", "expect = \"2*b{g}\"");
        let m = CaseManifest::from_toml(&text).unwrap();
        let r = verify_case(&m, 3);
        assert_eq!(r.status, Status::Fail);
        assert!(r.first_diff.unwrap().contains("expected 2, actual 1"));
    }

    #[test]
    fn malformed_manifests_are_rejected() {
        assert!(CaseManifest::from_toml(&SAMPLE.replace("-E(2,g) o C", "-E(2,g o C")).is_err());
        assert!(CaseManifest::from_toml(&SAMPLE.replace("kind = \"hwv\"", "kind = \"hwv\"\nextra = 1")).is_err());
        assert!(CaseManifest::from_toml(&SAMPLE.replace("(0..0,1)", "0..0,1")).is_err());
    }

    #[test]
    fn plus_terms_are_added() {
        let text = r#"
id = "plus"
claim = "C(a1^b1^b2) + C(b2^a1^b1) = 2 b2"
kind = "hwv"
g_min = 3
space = "wedge(3,H)"

[[check]]
start = "a1^b1^b2"
chain = "C"
plus = [["C", "b2^a1^b1"]]
expect = "2*b2"

[[check]]
start = "a1^b1^b2"
chain = "C"
plus = [["-C", "b2^a1^b1"]]
expect = "0"
"#;
        let m = CaseManifest::from_toml(text).unwrap();
        assert_eq!(verify_case(&m, 3).status, Status::Pass);
        let bad = text.replace("[[\"C\", \"b2^a1^b1\"]]", "[[\"C\", \"b2^a1^\"]]");
        assert!(CaseManifest::from_toml(&bad).is_err());
    }
}
