//! The twelve acceptance criteria, one PASS/FAIL line each.
//!
//! Criteria 7 and 8 contain claims that disagree with the exact computation,
//! and four chains of criterion 7 need g >= 7. Those manifests carry a
//! `conflict` note or a raised `g_min`; the criterion reports FAIL and the test
//! only insists that nothing else failed.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use torelli_core::characters::{module_character_as, weyl_dim, Algebra, IrrepLabel};
use torelli_core::decompose::{branch_c_to_a, decompose_character, decompose_module, generated_submodule, phi, Decomposition};
use torelli_core::freegroup_johnson::{j2_target, j_target, johnson_j, johnson_j2, FreeGroupEndo};
use torelli_core::rep_spaces::{build, ModuleExpr};
use torelli_rep::cases::{self, CaseManifest};
use torelli_rep::expr::{self, Defs, Env};
use torelli_rep::report::Status;
use torelli_rep::tables::{self, TableSpec};

type Outcome = Result<(), String>;
type Criterion = (usize, &'static str, Duration, Box<dyn FnOnce(&mut Vec<String>) -> Outcome>);

fn data() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data")
}

fn all_tables() -> Vec<TableSpec> {
    tables::load_tables(&data().join("tables")).expect("tables load")
}

fn all_cases() -> Vec<CaseManifest> {
    cases::load_cases(&data().join("cases")).expect("cases load")
}

fn table(id: &str, gs: &[usize]) -> Outcome {
    let ts = all_tables();
    let t = tables::find(&ts, id).map_err(|e| e.to_string())?;
    for &g in gs {
        let out = tables::verify_table(t, g);
        if out.report.status != Status::Pass {
            return Err(out.report.line());
        }
    }
    Ok(())
}

fn space(expr: &str, g: usize) -> std::sync::Arc<torelli_core::rep_spaces::ModuleSpace> {
    build(&ModuleExpr::parse(expr).unwrap(), g).unwrap()
}

fn vector(s: &torelli_core::rep_spaces::ModuleSpace, text: &str) -> torelli_core::scalar_linalg::SparseVector {
    let defs = Defs::new();
    let env = Env::new(s.g(), &defs);
    s.embed(&expr::evaluate(text, &env).unwrap()).unwrap()
}

/// Runs every case selected by `pick` at each genus. Failures of cases with a
/// recorded conflict, and skips below a case's raised genus minimum, are
/// collected separately from unexpected outcomes.
fn run_cases(pick: impl Fn(&CaseManifest) -> bool, gs: &[usize], known: &mut Vec<String>) -> Outcome {
    let cs = all_cases();
    let mut unexpected = Vec::new();
    let mut ran = 0;
    for c in cs.iter().filter(|c| pick(c)) {
        for &g in gs {
            let r = cases::verify_case(c, g);
            match r.status {
                Status::Pass => ran += 1,
                Status::Skip if g < c.g_min => known.push(format!("{} needs g >= {}", c.id, c.g_min)),
                Status::Skip => unexpected.push(format!("{} skipped at g={g}", c.id)),
                Status::Fail if c.conflict.is_some() => known.push(r.line()),
                Status::Fail => unexpected.push(r.line()),
            }
        }
    }
    if ran == 0 && known.is_empty() {
        return Err("no cases selected".into());
    }
    if !unexpected.is_empty() {
        return Err(unexpected.join("; "));
    }
    if !known.is_empty() {
        return Err(format!("{} known deviations: {}", known.len(), known.join("; ")));
    }
    Ok(())
}

fn c1() -> Outcome {
    table("wedge3H", &[6])
}

fn c2() -> Outcome {
    table("wedge2_ubar", &[6])?;
    let d = space("wedge(2,U)", 6).dim();
    if d != 19900 {
        return Err(format!("dim wedge^2 U = {d} at g=6"));
    }
    Ok(())
}

fn c3() -> Outcome {
    table("wedge2_J", &[4, 5, 6, 7])?;
    table("J_tensor_sym2", &[3, 4, 5])
}

fn c4() -> Outcome {
    table("wedge2_J_g3", &[3])?;
    let s = space("wedge(2,tensor(wedge(2,V),dualV))", 3);
    if s.dim() != 36 {
        return Err(format!("dimension {}", s.dim()));
    }
    Ok(())
}

fn c5() -> Outcome {
    table("branch_gamma02", &[5, 6])?;
    table("branch_gamma01", &[5, 6])?;
    for g in [5, 6] {
        for (coords, n) in [(&[0, 2][..], 10), (&[0, 1][..], 3)] {
            let l = IrrepLabel::gamma(coords, g);
            let b = branch_c_to_a(&l).map_err(|e| e.to_string())?;
            if b.total() != n || b.dimension() != weyl_dim(&l) {
                return Err(format!("branch of {l} at g={g}: {} summands, dim {} vs {}", b.total(), b.dimension(), weyl_dim(&l)));
            }
        }
    }
    Ok(())
}

fn c6() -> Outcome {
    table("sp_wedge2_quotient", &[6])?;
    let g = 6;
    let s = space("wedge(2,wedge3H_mod_H)", g);
    let got = decompose_character(&module_character_as(&s, Algebra::C)).map_err(|e| e.to_string())?;
    let want = Decomposition::from_parts(
        Algebra::C,
        g,
        [&[0, 1, 0, 1][..], &[0, 2], &[0, 0, 0, 0, 0, 1], &[0, 0, 0, 1], &[0, 1], &[]].into_iter().map(|c| (IrrepLabel::gamma(c, g), 1)),
    );
    if got != want {
        return Err(format!("got {got}"));
    }
    Ok(())
}

fn c7(known: &mut Vec<String>) -> Outcome {
    run_cases(|c| c.kind != "lemma" && c.kind != "composite", &[6, 7], known)
}

fn c8(known: &mut Vec<String>) -> Outcome {
    run_cases(|c| c.kind == "lemma" || c.kind == "composite", &[5, 6, 7], known)
}

fn random_generator<R: Rng>(g: usize, rng: &mut R) -> FreeGroupEndo {
    let mut idx: Vec<usize> = (1..=g).collect();
    for t in 0..3 {
        let s = rng.gen_range(t..g);
        idx.swap(t, s);
    }
    let e = if rng.gen_bool(0.5) {
        FreeGroupEndo::conj(g, idx[0], idx[1]).unwrap()
    } else {
        FreeGroupEndo::magnus_gen(g, idx[0], idx[1], idx[2]).unwrap()
    };
    if rng.gen_bool(0.3) {
        e.inverse().unwrap()
    } else {
        e
    }
}

fn c9() -> Outcome {
    for g in 3..=5 {
        let jt = j_target(g).unwrap();
        let c12 = FreeGroupEndo::parse("C(1,2)", g).unwrap();
        if johnson_j(&c12).unwrap() != vector(&jt, "-(a1^a2)@b2") {
            return Err(format!("J(C12) at g={g}"));
        }
        let m = FreeGroupEndo::parse("M(1,2,3)", g).unwrap();
        if johnson_j(&m).unwrap() != vector(&jt, "-(a1^a2)@b3") {
            return Err(format!("J(M123) at g={g}"));
        }
        let c = FreeGroupEndo::parse("comm(C(1,2),C(2,1))", g).unwrap();
        let want = vector(&j2_target(g).unwrap(), "-(a1^a2)@a1@b1 - (a1^a2)@a2@b2");
        if johnson_j2(&c).map_err(|e| e.to_string())? != want {
            return Err(format!("J2([C12,C21]) at g={g}"));
        }
    }
    let g = 4;
    let mut rng = rand::rngs::StdRng::seed_from_u64(2024);
    for k in 0..100 {
        let n = rng.gen_range(1..5);
        let f = (0..n).fold(FreeGroupEndo::identity(g), |acc, _| acc.compose(&random_generator(g, &mut rng)).unwrap());
        let h = random_generator(g, &mut rng);
        let lhs = johnson_j(&f.compose(&h).unwrap()).unwrap();
        let rhs = &johnson_j(&f).unwrap() + &johnson_j(&h).unwrap();
        if lhs != rhs {
            return Err(format!("additivity fails on product {k}: {f} then {h}"));
        }
    }
    Ok(())
}

fn binom(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Constructed spaces at `g`: the named spaces and their small tensor, wedge
/// and symmetric powers, with dimensions computed before building.
fn constructed(g: usize) -> Vec<(String, usize)> {
    let base = [
        "V",
        "dualV",
        "H",
        "U",
        "Ubar",
        "wedge3H_mod_H",
        "wedge2V_V_mod_wedge3V",
        "wedge2V_dualV_mod_V",
        "W",
        "Wbar",
        "L3H",
        "wedge(2,V)",
        "wedge(2,dualV)",
        "sym(2,dualV)",
        "wedge(3,H)",
        "wedge(2,H)",
        "tensor(wedge(2,V),dualV)",
        "tensor(V,sym(2,dualV))",
    ];
    let dims: Vec<(String, usize)> =
        base.iter().filter_map(|e| build(&ModuleExpr::parse(e).unwrap(), g).ok().map(|s| (e.to_string(), s.dim()))).collect();
    let mut out = dims.clone();
    for (e, n) in &dims {
        out.push((format!("wedge(2,{e})"), binom(*n, 2)));
        out.push((format!("wedge(3,{e})"), binom(*n, 3)));
        out.push((format!("sym(2,{e})"), binom(n + 1, 2)));
        out.push((format!("sym(3,{e})"), binom(n + 2, 3)));
        for (f, m) in &dims {
            out.push((format!("tensor({e},{f})"), n * m));
        }
    }
    out.retain(|(_, d)| *d > 0 && *d <= 3000);
    out
}

fn c10() -> Outcome {
    let mut count = 0;
    for g in 2..=4 {
        for (e, d) in constructed(g) {
            let s = space(&e, g);
            if s.dim() != d {
                return Err(format!("{e} at g={g}: dim {} vs {d}", s.dim()));
            }
            let by_hwv = decompose_module(&s).map_err(|err| format!("{e}: {err}"))?.0;
            let by_char = torelli_core::decompose::decompose_space_by_character(&s).map_err(|err| format!("{e}: {err}"))?;
            if by_hwv != by_char {
                return Err(format!("{e} at g={g}: {by_hwv} vs {by_char}"));
            }
            count += 1;
        }
    }
    if count == 0 {
        return Err("no spaces".into());
    }
    Ok(())
}

fn c11() -> Outcome {
    table("tau2_image", &[6])
}

fn c12() -> Outcome {
    for g in 3..=6 {
        let s = space("sym(2,dualV)", g);
        let m = generated_submodule(&s, &vector(&s, "b1<->b1")).map_err(|e| e.to_string())?;
        if m.dim != s.dim() {
            return Err(format!("b1 b1 generates dimension {} of {} at g={g}", m.dim, s.dim()));
        }
    }
    for g in 3..=5 {
        let s = j2_target(g).unwrap();
        let v = vector(&s, "-(a1^a2)@a1@b1 - (a1^a2)@a2@b2");
        let m = generated_submodule(&s, &v).map_err(|e| e.to_string())?;
        let mut first = vec![0; g - 1];
        first[1] = 1;
        let mut second = vec![0; g - 1];
        second[0] = 1;
        second[1] = 1;
        second[g - 2] = 1;
        if g == 3 {
            second = vec![1, 2];
        }
        for l in [phi(&first), phi(&second)] {
            if m.decomposition.multiplicity(&l) == 0 {
                return Err(format!("{l} missing at g={g}: {}", m.decomposition));
            }
        }
    }
    Ok(())
}

fn main() {
    let criteria: Vec<Criterion> = vec![
        (1, "wedge^3 H at g=6", Duration::from_secs(1), Box::new(|_| c1())),
        (2, "wedge^2 Ubar and wedge^2 U at g=6", Duration::from_secs(120), Box::new(|_| c2())),
        (3, "wedge^2 J tables at g=4..7, J (x) Sym^2 at g=3..5", Duration::from_secs(120), Box::new(|_| c3())),
        (4, "g=3 identity of dimension 36", Duration::from_secs(1), Box::new(|_| c4())),
        (5, "branching of Gamma_{0,2} and Gamma_{0,1}", Duration::from_secs(10), Box::new(|_| c5())),
        (6, "Sp_12 decomposition of wedge^2((wedge^3 H)/H)", Duration::from_secs(60), Box::new(|_| c6())),
        (7, "highest weight vector cases at g=6,7", Duration::from_secs(600), Box::new(c7)),
        (8, "qp types and composites at g=5,6,7", Duration::from_secs(600), Box::new(c8)),
        (9, "Johnson anchors and additivity", Duration::from_secs(5), Box::new(|_| c9())),
        (10, "decompose_module equals decompose_character", Duration::from_secs(120), Box::new(|_| c10())),
        (11, "tau_2 image columns at g=6", Duration::from_secs(10), Box::new(|_| c11())),
        (12, "generated submodules", Duration::from_secs(60), Box::new(|_| c12())),
    ];
    let mut unexpected = Vec::new();
    for (n, what, budget, run) in criteria {
        let mut known = Vec::new();
        let t = Instant::now();
        let mut res = run(&mut known);
        let took = t.elapsed();
        if res.is_ok() && took > budget {
            res = Err(format!("took {took:.2?}, budget {budget:?}"));
        }
        match &res {
            Ok(()) => println!("PASS criterion {n}: {what} ({took:.2?})"),
            Err(e) => println!("FAIL criterion {n}: {what} ({took:.2?}): {e}"),
        }
        let only_known = !known.is_empty() && res.as_ref().err().is_some_and(|e| e.contains("known deviations"));
        if res.is_err() && !only_known {
            unexpected.push(n);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("criteria failed without a recorded deviation: {unexpected:?}");
        std::process::exit(1);
    }
}
