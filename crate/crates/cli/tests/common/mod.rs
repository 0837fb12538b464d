//! Helpers shared by the integration targets: the golden corpus and the
//! compiled `exo` binary.
#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/corpus")
}

/// Every `.exo` file of the corpus, sorted by name.
pub fn corpus_files() -> Vec<PathBuf> {
    let mut files: Vec<PathBuf> = fs::read_dir(corpus_dir())
        .expect("corpus directory")
        .map(|e| e.expect("corpus entry").path())
        .filter(|p| p.extension().is_some_and(|x| x == "exo"))
        .collect();
    files.sort();
    files
}

/// The `# run:` lines of a corpus file, split into words.
pub fn runs(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .expect("corpus file")
        .lines()
        .filter_map(|l| l.strip_prefix("# run:"))
        .map(|l| l.split_whitespace().map(str::to_string).collect())
        .collect()
}

/// Arguments for one run: the file goes right after the verb, except for
/// verbs that take no document.
pub fn argv(path: &Path, run: &[String]) -> Vec<String> {
    let mut args = vec!["--json".to_string(), run[0].clone()];
    if run[0] != "classify" {
        args.push(path.display().to_string());
    }
    args.extend(run[1..].iter().cloned());
    args
}

pub fn exo(args: &[String]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_exo"))
        .args(args)
        .output()
        .expect("running exo")
}

/// Transcript of every run in a corpus file: the run line, then stdout.
pub fn transcript(path: &Path) -> String {
    let mut out = String::new();
    for run in runs(path) {
        let result = exo(&argv(path, &run));
        assert!(
            result.status.success(),
            "exo {} failed: {}",
            run.join(" "),
            String::from_utf8_lossy(&result.stderr)
        );
        out.push_str(&format!("$ exo {}\n", run.join(" ")));
        out.push_str(&String::from_utf8(result.stdout).expect("utf-8 output"));
    }
    out
}
