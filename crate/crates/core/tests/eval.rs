mod common;

use approx::assert_abs_diff_eq;
use ndarray::array;
use semaxis::decomposition::normalize_rows;
use semaxis::eval::{
    analogy_eval, run_suite, topp_correlation_curve, wordsim_eval, SuiteConfig, TaskKind,
};
use semaxis::io::{load_analogy, load_wordsim, Vocabulary};
use semaxis::transform::{IcaParams, Pipeline, Space, TransformedEmbeddings};
use std::sync::Arc;

fn named(words: &[&str], data: ndarray::Array2<f64>, space: Space) -> TransformedEmbeddings {
    let vocab = Arc::new(Vocabulary::new(words.iter().map(|w| w.to_string()).collect()).unwrap());
    TransformedEmbeddings::new(space, data, vocab, Default::default()).unwrap()
}

#[test]
fn three_pair_toy() {
    let t = named(
        &["cat", "dog", "car", "bus"],
        array![[1.0, 0.1], [0.9, 0.3], [0.1, 1.0], [0.5, 0.9]],
        Space::Ica,
    );
    let n = normalize_rows(&t).unwrap();
    let ds = load_wordsim("CAT dog 9\ncat car 1\ncar bus 8\ncat zebra 5\n".as_bytes(), "toy").unwrap();
    let s = wordsim_eval(&ds, &n, 2).unwrap();
    // cosines order cat/dog > car/bus > cat/car, gold orders them 9 > 8 > 1
    assert_abs_diff_eq!(s.rho, 1.0, epsilon = 1e-15);
    assert_eq!((s.used, s.skipped), (3, 1));
    assert!(wordsim_eval(&ds, &n, 3).is_err());
}

#[test]
fn six_word_analogies_are_all_solved() {
    let t = named(
        &["king", "queen", "man", "woman", "boy", "girl"],
        array![
            [1.0, 0.0, 1.0],
            [1.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
            [0.0, 1.0, 0.0],
            [-1.0, 0.0, 1.0],
            [-1.0, 1.0, 0.0],
        ],
        Space::Ica,
    );
    let n = normalize_rows(&t).unwrap();
    let text = ": royal\nman woman king queen\nking queen man woman\n: young\nman woman boy girl\nman woman boy unicorn\n";
    let ds = load_analogy(text.as_bytes(), "toy").unwrap();
    let scores = analogy_eval(&ds, &t, &n, 3, Default::default()).unwrap();
    assert_eq!(scores.len(), 2);
    assert_eq!(scores[0].accuracy, Some(1.0));
    assert_eq!((scores[1].correct, scores[1].used, scores[1].skipped), (1, 1, 1));
}

#[test]
fn full_p_curve_is_exactly_one() {
    let world = common::sparse_world(1000, 8, 0.2, 0.3, 12);
    let p = Pipeline::fit(&world.embeddings, IcaParams::default()).unwrap();
    let n = normalize_rows(&p.ica_space).unwrap();
    let text: String = (0..50).map(|k| format!("w{} w{} {k}\n", k, 999 - k)).collect();
    let ds = load_wordsim(text.as_bytes(), "pairs").unwrap();
    let curve = topp_correlation_curve(&ds, &n, &[1, 4, 8]).unwrap();
    assert_eq!(curve[2], (8, 1.0));
    assert!(topp_correlation_curve(&ds, &n, &[9]).is_err());
}

fn write_suite(dir: &std::path::Path, body: &str) -> std::path::PathBuf {
    std::fs::write(dir.join("sim.txt"), "w1 w2 3\nw1 w3 1\nw2 w3 2\nw4 nothing 4\n").unwrap();
    std::fs::write(dir.join("an.txt"), ": c\nw1 w2 w3 w4\nw0 w1 w2 w3\n").unwrap();
    let path = dir.join("suite.toml");
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn suite_from_config_file() {
    let world = common::sparse_world(600, 6, 0.3, 0.3, 13);
    let p = Pipeline::fit(&world.embeddings, IcaParams::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = write_suite(
        dir.path(),
        "wordsim = [\"sim.txt\"]\nanalogy = [\"an.txt\"]\np_grid = [1, 6]\nexclude_policy = \"none\"\n",
    );
    let cfg = SuiteConfig::read(&path).unwrap();
    assert_eq!(cfg.spaces, vec![Space::Pca, Space::Ica]);
    assert!(cfg.wordsim[0].is_absolute() || cfg.wordsim[0].starts_with(dir.path()));

    let report = run_suite(&cfg, &[p.pca_space.clone(), p.ica_space.clone()]).unwrap();
    assert_eq!(report.rows.len(), 2 * 2 * 2);
    // out-of-vocabulary counts do not depend on the space
    for row in &report.rows {
        let twin = report
            .rows
            .iter()
            .find(|r| r.task == row.task && r.p == row.p && r.space != row.space)
            .unwrap();
        assert_eq!((row.used, row.skipped), (twin.used, twin.skipped));
    }
    let sim = report.rows.iter().find(|r| r.kind == TaskKind::Similarity).unwrap();
    assert_eq!((sim.used, sim.skipped), (3, 1));
    assert_eq!(
        report.score("sim", 6, Space::Pca).unwrap(),
        report.score("sim", 6, Space::Ica).unwrap()
    );
    assert!(report.average(TaskKind::Analogy, 1, Space::Ica).is_some());
}

#[test]
fn bad_configs_are_rejected() {
    assert!(SuiteConfig::from_toml("p_grid = [1]\ncolour = 3\n").is_err());
    assert!(SuiteConfig::from_toml("wordsim = []\n").is_err());
    let world = common::sparse_world(300, 4, 0.3, 0.3, 14);
    let p = Pipeline::fit(&world.embeddings, IcaParams::default()).unwrap();
    let spaces = [p.pca_space.clone(), p.ica_space.clone()];

    let dir = tempfile::tempdir().unwrap();
    let empty_grid = SuiteConfig::read(write_suite(dir.path(), "wordsim = [\"sim.txt\"]\np_grid = []\n")).unwrap();
    assert!(run_suite(&empty_grid, &spaces).is_err());
    let missing = SuiteConfig::read(write_suite(dir.path(), "wordsim = [\"nope.txt\"]\np_grid = [1]\n")).unwrap();
    assert!(run_suite(&missing, &spaces).is_err());
    let too_big = SuiteConfig::read(write_suite(dir.path(), "wordsim = [\"sim.txt\"]\np_grid = [5]\n")).unwrap();
    assert!(run_suite(&too_big, &spaces).is_err());
}
