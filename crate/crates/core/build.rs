use std::process::Command;

fn main() {
    println!("cargo:rerun-if-env-changed=NLSE_GIT_REV");
    if std::env::var_os("NLSE_GIT_REV").is_some() {
        return;
    }
    let rev = Command::new("git")
        .args(["rev-parse", "--short=12", "HEAD"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .and_then(|o| String::from_utf8(o.stdout).ok());
    if let Some(rev) = rev {
        println!("cargo:rustc-env=NLSE_GIT_REV={}", rev.trim());
    }
    if let Ok(head) = Command::new("git").args(["rev-parse", "--git-path", "HEAD"]).output() {
        if let Ok(path) = String::from_utf8(head.stdout) {
            println!("cargo:rerun-if-changed={}", path.trim());
        }
    }
}
