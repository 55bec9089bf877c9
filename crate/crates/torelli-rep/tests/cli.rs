use std::process::Command;

fn run(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_torelli-rep")).args(args).output().expect("binary runs");
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stdout).into_owned())
}

#[test]
fn apply_prints_the_composite() {
    let (code, out) = run(&["apply", "qp o bracket", "--to", "[a1^w]^[a2^w]", "--space", "wedge(2,wedge(3,H))", "--g", "5"]);
    assert_eq!(code, 0);
    assert_eq!(out.trim(), "-24*a1^a2");
}

#[test]
fn verify_exit_codes() {
    let (code, out) = run(&["verify", "--case", "wedge3h-bg-chain", "--g", "6"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.starts_with("PASS"));
    let (code, out) = run(&["verify", "--case", "qp-ubar-h", "--g", "5"]);
    assert_eq!(code, 1);
    assert!(out.contains("known conflict"));
    let (code, _) = run(&["verify", "--case", "no-such-case", "--g", "5"]);
    assert_eq!(code, 2);
    let (code, _) = run(&["verify", "--all", "--g", "1"]);
    assert_eq!(code, 2);
}

#[test]
fn decompose_json() {
    let (code, out) = run(&["decompose", "--space", "sym(2,dualV)", "--g", "3", "--json"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["dim"], 6);
    assert_eq!(v["parts"][0]["label"], "Phi[0,2]");
}

#[test]
fn lie_and_johnson() {
    let (code, out) = run(&["lie", "tensor([1,0],[0,1],(A2))"]);
    assert_eq!(code, 0);
    assert_eq!(out.trim(), "1X[1,1] +\n1X[0,0]");
    let (code, out) = run(&["J", "C(1,2)", "--g", "3"]);
    assert_eq!(code, 0);
    assert_eq!(out.trim(), "-1*(a1^a2)@(b2)");
    let (code, _) = run(&["lie", "tensor([1,0],(A2))"]);
    assert_eq!(code, 2);
}
