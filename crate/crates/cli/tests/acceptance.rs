//! End-to-end acceptance checks, one test per criterion. Each prints a
//! single `criterion N: PASS|FAIL ...` line before asserting.

use std::io::Write;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use smellpred::balancing::{smote, SmoteConfig};
use smellpred::builder::aggregate_warnings_to_files;
use smellpred::classifiers::{
    predict, train_naive_bayes, train_pnn, train_random_forest, FeatureSubset, ForestConfig, ModelParams, PnnConfig,
};
use smellpred::evaluation::{measures, ConfusionMatrix};
use smellpred::ingest::{
    parse_change_log, parse_class_warnings, parse_file_metrics, CategoryCounts, ClassWarningRecord,
};
use smellpred::pipeline::{build_datasets, BuildConfig};
use smellpred::{Label, LabeledDataset, LabeledRecord, Provenance, SourceMix};

/// Written straight to stdout so the line shows without `--nocapture`.
fn verdict(n: u8, what: &str, ok: bool, detail: &str) {
    let line = format!(
        "criterion {n} ({what}): {} {detail}\n",
        if ok { "PASS" } else { "FAIL" }
    );
    std::io::stdout().lock().write_all(line.as_bytes()).unwrap();
    assert!(ok, "criterion {n} failed: {detail}");
}

fn dataset(rows: &[(Vec<f64>, Label)]) -> LabeledDataset {
    let m = rows[0].0.len();
    LabeledDataset::new(
        (0..m).map(|j| format!("f{j}")).collect(),
        rows.iter()
            .enumerate()
            .map(|(i, (x, l))| LabeledRecord {
                file_path: format!("src/r{i}.cs"),
                features: x.clone(),
                label: *l,
            })
            .collect(),
        Provenance {
            source_mix: SourceMix::FileMetricsOnly,
            filtered_generated: true,
        },
    )
    .unwrap()
}

type Cell = (f64, [u64; 4]);

/// Published F-measure and (TP, FP, TN, FN) per cell, without smells then
/// with smells, rows ordered classifier, SMOTE, selection.
const PUBLISHED_MATRIX: [(&str, [Cell; 2]); 18] = [
    (
        "NB NO ANNEALING",
        [(0.1318, [23, 161, 3330, 142]), (0.1149, [15, 81, 3410, 150])],
    ),
    (
        "NB NO ELIMINATION",
        [(0.0, [0, 1, 3490, 165]), (0.0, [0, 0, 3491, 165])],
    ),
    (
        "NB NO NONE",
        [(0.1314, [31, 276, 3215, 134]), (0.1389, [40, 371, 3120, 125])],
    ),
    (
        "NB YES ANNEALING",
        [(0.5474, [1497, 482, 3008, 1994]), (0.586, [1695, 599, 2891, 1796])],
    ),
    (
        "NB YES ELIMINATION",
        [(0.5961, [1736, 598, 2892, 1755]), (0.6106, [1807, 621, 2869, 1684])],
    ),
    (
        "NB YES NONE",
        [(0.5424, [1476, 475, 3015, 2015]), (0.5775, [1657, 591, 2899, 1834])],
    ),
    ("PNN NO ANNEALING", [(0.0, [0, 0, 3491, 165]), (0.0, [0, 0, 3491, 165])]),
    (
        "PNN NO ELIMINATION",
        [(0.0, [0, 0, 3491, 165]), (0.0, [0, 0, 3491, 165])],
    ),
    ("PNN NO NONE", [(0.0, [0, 0, 3491, 165]), (0.0, [0, 0, 3491, 165])]),
    (
        "PNN YES ANNEALING",
        [(0.7313, [2187, 303, 3187, 1304]), (0.7582, [2335, 333, 3157, 1156])],
    ),
    (
        "PNN YES ELIMINATION",
        [(0.0, [0, 0, 3491, 165]), (0.8051, [2568, 320, 3170, 923])],
    ),
    (
        "PNN YES NONE",
        [(0.7253, [2147, 282, 3208, 1344]), (0.7333, [2204, 316, 3174, 1287])],
    ),
    (
        "RF NO ANNEALING",
        [(0.0963, [9, 13, 3478, 156]), (0.1538, [15, 15, 3476, 150])],
    ),
    (
        "RF NO ELIMINATION",
        [(0.1587, [15, 9, 3482, 150]), (0.1405, [13, 7, 3484, 152])],
    ),
    (
        "RF NO NONE",
        [(0.1429, [14, 17, 3474, 151]), (0.1538, [15, 15, 3476, 150])],
    ),
    (
        "RF YES ANNEALING",
        [(0.9551, [3364, 189, 3301, 127]), (0.9696, [3407, 130, 3360, 84])],
    ),
    (
        "RF YES ELIMINATION",
        [(0.9654, [3390, 142, 3348, 101]), (0.9713, [3435, 147, 3343, 56])],
    ),
    (
        "RF YES NONE",
        [(0.9601, [3383, 173, 3317, 108]), (0.9696, [3407, 130, 3360, 84])],
    ),
];

#[test]
fn criterion_1_published_f_measures() {
    let start = Instant::now();
    let mut off = Vec::new();
    let mut worst = 0.0f64;
    for (row, cells) in PUBLISHED_MATRIX {
        for ((printed, [tp, fp, tn, fn_]), smells) in cells.into_iter().zip(["NO", "YES"]) {
            let f = measures(&ConfusionMatrix::new(tp, fp, tn, fn_)).f_measure;
            let dev = (f - printed).abs();
            worst = worst.max(dev);
            if dev > 5e-5 {
                off.push(format!("{row} smells={smells}: printed {printed}, computed {f:.6}"));
            }
        }
    }
    let elapsed = start.elapsed();
    let ok = off.is_empty() && elapsed < Duration::from_secs(1);
    verdict(
        1,
        "published F-measures within 5e-5",
        ok,
        &format!(
            "36 cells, {} outside tolerance, max deviation {worst:.2e}, {elapsed:?} [{}]",
            off.len(),
            off.join("; ")
        ),
    );
}

#[test]
fn criterion_2_kappa_accuracy_identity() {
    // (accuracy, kappa) means of the six submodule-study conditions.
    let published_means = [
        (0.9422, 0.8844),
        (0.676, 0.3518),
        (0.9487, 0.8973),
        (0.97, 0.9399),
        (0.8249, 0.6497),
        (0.9791, 0.9582),
    ];
    let worst_printed = published_means
        .iter()
        .map(|(acc, kappa): &(f64, f64)| (kappa - (2.0 * acc - 1.0)).abs())
        .fold(0.0, f64::max);

    // With equal actual-class counts, chance agreement is exactly 1/2.
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut mismatches = 0;
    for _ in 0..10_000 {
        let pos = rng.gen_range(1..5000u64);
        let tp = rng.gen_range(0..=pos);
        let tn = rng.gen_range(0..=pos);
        let m = measures(&ConfusionMatrix::new(tp, pos - tn, tn, pos - tp));
        if m.kappa != 2.0 * m.accuracy - 1.0 {
            mismatches += 1;
        }
    }
    verdict(
        2,
        "kappa = 2*accuracy - 1",
        worst_printed <= 0.001 + 1e-12 && mismatches == 0,
        &format!("published rows max deviation {worst_printed:.4}; {mismatches} of 10000 balanced matrices differ"),
    );
}

fn run_cli(args: &[&str]) -> String {
    let out = Command::new(env!("CARGO_BIN_EXE_smellpred"))
        .args(args)
        .output()
        .expect("binary runs");
    assert!(
        out.status.success(),
        "smellpred {args:?} exited with {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn input_flags(dir: &Path) -> Vec<String> {
    let inputs = dir.join("inputs");
    vec![
        "--file-metrics".into(),
        inputs.join("file_metrics.csv").display().to_string(),
        "--warnings".into(),
        inputs.join("warnings.xml").display().to_string(),
        "--change-log".into(),
        inputs.join("change_log.jsonl").display().to_string(),
    ]
}

fn synth_and_build(dir: &Path, seed: &str, n_files: usize) {
    let out = dir.display().to_string();
    let n = format!("synth.n_files={n_files}");
    run_cli(&["synth", "--seed", seed, "--out", &out, "--set", &n]);
    let mut args = vec!["build".to_string(), "--seed".into(), seed.into(), "--out".into(), out];
    args.extend(input_flags(dir));
    run_cli(&args.iter().map(String::as_str).collect::<Vec<_>>());
}

struct Row {
    classifier: String,
    smote: bool,
    fs: String,
    smells: bool,
    f_measure: f64,
    recall: f64,
}

fn experiment_rows(csv: &str) -> Vec<Row> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name).unwrap();
    let (c, s, fs, sm, f, r) = (
        col("classifier"),
        col("smote"),
        col("feature_selection"),
        col("smells"),
        col("f_measure"),
        col("recall"),
    );
    lines
        .map(|l| {
            let v: Vec<&str> = l.split(',').collect();
            Row {
                classifier: v[c].into(),
                smote: v[s] == "YES",
                fs: v[fs].into(),
                smells: v[sm] == "YES",
                f_measure: v[f].parse().unwrap(),
                recall: v[r].parse().unwrap(),
            }
        })
        .collect()
}

#[test]
fn criterion_3_synthetic_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().display().to_string();
    let start = Instant::now();
    synth_and_build(dir.path(), "42", 2000);
    run_cli(&["experiment", "--seed", "7", "--out", &out]);
    let elapsed = start.elapsed();

    let rows = experiment_rows(&std::fs::read_to_string(dir.path().join("reports/experiment.csv")).unwrap());
    let rf_elim: Vec<&Row> = rows
        .iter()
        .filter(|r| r.classifier == "RANDOM_FOREST" && r.smote && r.fs == "ELIMINATION")
        .collect();
    let worst_rf_elim = rf_elim.iter().map(|r| r.f_measure).fold(f64::INFINITY, f64::min);
    let nb_plain_max = rows
        .iter()
        .filter(|r| r.classifier == "NAIVE_BAYES" && !r.smote)
        .map(|r| r.recall)
        .fold(f64::NEG_INFINITY, f64::max);
    let rf_smote_min = rows
        .iter()
        .filter(|r| r.classifier == "RANDOM_FOREST" && r.smote)
        .map(|r| r.recall)
        .fold(f64::INFINITY, f64::min);
    let ok = rows.len() == 36
        && rf_elim.len() == 2
        && rf_elim.iter().all(|r| r.f_measure >= 0.90)
        && nb_plain_max < rf_smote_min
        && elapsed < Duration::from_secs(600);
    let smells_f = rf_elim.iter().find(|r| r.smells).map_or(f64::NAN, |r| r.f_measure);
    verdict(
        3,
        "synthetic corpus end to end",
        ok,
        &format!(
            "{} cells; RF+SMOTE+elimination F min {worst_rf_elim:.4} (with smells {smells_f:.4}); \
             NB no-SMOTE recall max {nb_plain_max:.4} < RF SMOTE recall min {rf_smote_min:.4}; {elapsed:?}",
            rows.len()
        ),
    );
}

#[test]
fn criterion_4_smote_properties() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut fixtures, mut synthetic, mut bad_counts, mut non_convex, mut nondeterministic) = (0, 0, 0, 0, 0);
    for _ in 0..50 {
        let m = rng.gen_range(1..6);
        let n_min = rng.gen_range(2..25);
        let n_maj = rng.gen_range(n_min..120);
        let mut rows: Vec<(Vec<f64>, Label)> = (0..n_min + n_maj)
            .map(|i| {
                let label = if i < n_min { Label::DefectProne } else { Label::Clean };
                ((0..m).map(|_| rng.gen_range(-50.0..50.0)).collect(), label)
            })
            .collect();
        // Shuffle so minority records are not contiguous.
        for i in (1..rows.len()).rev() {
            rows.swap(i, rng.gen_range(0..=i));
        }
        let ds = dataset(&rows);
        let cfg = SmoteConfig {
            k_neighbors: rng.gen_range(1..8),
            target_ratio: 1.0,
            seed: rng.gen(),
        };
        let out = smote(&ds, &cfg).unwrap();
        fixtures += 1;
        let n0 = ds.len();
        if out.dataset.count(Label::DefectProne) != out.dataset.count(Label::Clean)
            || out.dataset.records[..n0] != ds.records[..]
        {
            bad_counts += 1;
        }
        for (s, lin) in out.dataset.records[n0..].iter().zip(&out.lineage) {
            synthetic += 1;
            let (a, b) = (&ds.records[lin.base], &ds.records[lin.neighbor]);
            let convex = s.label == Label::DefectProne
                && a.label == Label::DefectProne
                && b.label == Label::DefectProne
                && (0.0..1.0).contains(&lin.weight)
                && s.features
                    .iter()
                    .zip(a.features.iter().zip(&b.features))
                    .all(|(&v, (&x, &y))| {
                        v >= x.min(y)
                            && v <= x.max(y)
                            && (v - (x + lin.weight * (y - x))).abs() <= 1e-9 * (1.0 + x.abs())
                    });
            if !convex {
                non_convex += 1;
            }
        }
        if out.lineage.len() != out.dataset.len() - n0 || smote(&ds, &cfg).unwrap() != out {
            nondeterministic += 1;
        }
    }
    verdict(
        4,
        "SMOTE balance, convexity, determinism",
        bad_counts == 0 && non_convex == 0 && nondeterministic == 0 && synthetic > 0,
        &format!(
            "{fixtures} fixtures, {synthetic} synthetic points: {bad_counts} unbalanced, \
             {non_convex} non-convex, {nondeterministic} non-repeatable"
        ),
    );
}

mod tree_oracle {
    use super::*;

    pub enum Node {
        Leaf(Label),
        Split(usize, f64, Box<Node>, Box<Node>),
    }

    type Row = (Vec<f64>, Label);

    fn positives(rows: &[&Row]) -> usize {
        rows.iter().filter(|r| r.1 == Label::DefectProne).count()
    }

    fn gini(left: &[&Row], right: &[&Row]) -> Ratio<i128> {
        let n = (left.len() + right.len()) as i128;
        let side = |rows: &[&Row]| {
            let size = rows.len() as i128;
            let pos = positives(rows) as i128;
            let neg = size - pos;
            Ratio::new(size, n) * (Ratio::from_integer(1) - Ratio::new(pos * pos + neg * neg, size * size))
        };
        side(left) + side(right)
    }

    pub fn grow(rows: &[&Row]) -> Node {
        let pos = positives(rows);
        let label = if 2 * pos > rows.len() {
            Label::DefectProne
        } else {
            Label::Clean
        };
        if pos == 0 || pos == rows.len() {
            return Node::Leaf(label);
        }
        let mut best: Option<(Ratio<i128>, usize, f64)> = None;
        for f in 0..rows[0].0.len() {
            let mut values: Vec<f64> = rows.iter().map(|r| r.0[f]).collect();
            values.sort_by(f64::total_cmp);
            values.dedup();
            for w in values.windows(2) {
                let t = (w[0] + w[1]) / 2.0;
                let (l, r): (Vec<&Row>, Vec<&Row>) = rows.iter().partition(|row| row.0[f] <= t);
                let g = gini(&l, &r);
                if best.as_ref().is_none_or(|(b, _, _)| g < *b) {
                    best = Some((g, f, t));
                }
            }
        }
        let Some((_, f, t)) = best else {
            return Node::Leaf(label);
        };
        let (l, r): (Vec<&Row>, Vec<&Row>) = rows.iter().partition(|row| row.0[f] <= t);
        Node::Split(f, t, Box::new(grow(&l)), Box::new(grow(&r)))
    }

    pub fn classify(node: &Node, x: &[f64]) -> Label {
        match node {
            Node::Leaf(l) => *l,
            Node::Split(f, t, l, r) => classify(if x[*f] <= *t { l } else { r }, x),
        }
    }
}

#[test]
fn criterion_5_classifier_oracles() {
    use Label::{Clean as A, DefectProne as B};
    let mut failures = Vec::new();

    // Naive Bayes: A = {0, 2}, B = {4, 6}, query 2. Means 1 and 5, both
    // variances 1, equal priors.
    let nb = train_naive_bayes(&dataset(&[
        (vec![0.0], A),
        (vec![2.0], A),
        (vec![4.0], B),
        (vec![6.0], B),
    ]))
    .unwrap();
    let ModelParams::NaiveBayes(params) = &nb.params else {
        unreachable!()
    };
    let half_ln_2pi = 0.5 * (2.0 * std::f64::consts::PI).ln();
    let hand = [0.5f64.ln() - half_ln_2pi - 0.5, 0.5f64.ln() - half_ln_2pi - 4.5];
    let got = params.log_joint(&[2.0]);
    if (got[0].1 - hand[0]).abs() > 1e-12 || (got[1].1 - hand[1]).abs() > 1e-12 {
        failures.push(format!("NB log joints {got:?}, expected {hand:?}"));
    }
    if predict(&nb, &[2.0]).unwrap() != A {
        failures.push("NB query 2 not class A".into());
    }
    // Constant second feature: the variance floor applies, the first
    // feature decides.
    let nb = train_naive_bayes(&dataset(&[
        (vec![0.0, 3.0], A),
        (vec![2.0, 3.0], A),
        (vec![4.0, 3.0], B),
        (vec![6.0, 3.0], B),
    ]))
    .unwrap();
    if predict(&nb, &[5.0, 3.0]).unwrap() != B || predict(&nb, &[1.0, 3.0]).unwrap() != A {
        failures.push("NB constant-feature fixture".into());
    }

    // PNN in raw units: A = {0}, B = {2, 4}, bandwidth 1, query 1.5.
    let raw = PnnConfig {
        bandwidth: 1.0,
        standardize: false,
    };
    let pnn = train_pnn(&dataset(&[(vec![0.0], A), (vec![2.0], B), (vec![4.0], B)]), &raw).unwrap();
    let ModelParams::Pnn(params) = &pnn.params else {
        unreachable!()
    };
    let (score_a, score_b) = params.class_scores(&[1.5]);
    let hand_a = (-1.125f64).exp();
    let hand_b = ((-0.125f64).exp() + (-3.125f64).exp()) / 2.0;
    if (score_a - hand_a).abs() > 1e-12 || (score_b - hand_b).abs() > 1e-12 {
        failures.push(format!(
            "PNN scores ({score_a}, {score_b}), expected ({hand_a}, {hand_b})"
        ));
    }
    if predict(&pnn, &[1.5]).unwrap() != B {
        failures.push("PNN query 1.5 not class B".into());
    }
    let narrow = PnnConfig {
        bandwidth: 1e-3,
        standardize: false,
    };
    let pnn = train_pnn(&dataset(&[(vec![0.0], A), (vec![2.0], B), (vec![4.0], B)]), &narrow).unwrap();
    if [(0.0, A), (2.0, B), (4.0, B)]
        .iter()
        .any(|&(x, l)| predict(&pnn, &[x]).unwrap() != l)
    {
        failures.push("PNN narrow kernel misses a training point".into());
    }
    let pnn = train_pnn(&dataset(&[(vec![0.0], A), (vec![2.0], B)]), &raw).unwrap();
    if predict(&pnn, &[1.0]).unwrap() != A {
        failures.push("PNN equidistant tie not clean".into());
    }

    // Single unbootstrapped tree against the exhaustive-split oracle.
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut fixtures, mut queries, mut disagreements) = (0, 0, 0);
    while fixtures < 300 {
        let m = rng.gen_range(1..=4);
        let n = rng.gen_range(2..=20);
        let rows: Vec<(Vec<f64>, Label)> = (0..n)
            .map(|_| {
                let x = (0..m).map(|_| f64::from(rng.gen_range(0..6))).collect();
                (x, if rng.gen_bool(0.5) { B } else { A })
            })
            .collect();
        if !rows.iter().any(|r| r.1 == A) || !rows.iter().any(|r| r.1 == B) {
            continue;
        }
        fixtures += 1;
        let cfg = ForestConfig {
            n_trees: 1,
            max_depth: None,
            min_split: 2,
            features_per_split: FeatureSubset::All,
            bootstrap: false,
            seed: rng.gen(),
        };
        let model = train_random_forest(&dataset(&rows), &cfg).unwrap();
        let refs: Vec<&(Vec<f64>, Label)> = rows.iter().collect();
        let oracle = tree_oracle::grow(&refs);
        let probes: Vec<Vec<f64>> = (0..30)
            .map(|_| (0..m).map(|_| f64::from(rng.gen_range(-2..14)) / 2.0).collect())
            .collect();
        for x in rows.iter().map(|r| &r.0).chain(&probes) {
            queries += 1;
            if predict(&model, x).unwrap() != tree_oracle::classify(&oracle, x) {
                disagreements += 1;
            }
        }
    }
    if disagreements > 0 {
        failures.push(format!("tree disagrees on {disagreements} of {queries} queries"));
    }
    verdict(
        5,
        "NB, PNN and tree oracles",
        failures.is_empty(),
        &format!(
            "NB and PNN hand fixtures, {fixtures} tree fixtures / {queries} queries [{}]",
            failures.join("; ")
        ),
    );
}

fn rational_kappa(tp: i128, fp: i128, tn: i128, fn_: i128) -> f64 {
    let n = tp + fp + tn + fn_;
    if n == 0 {
        return 0.0;
    }
    let po = Ratio::new(tp + tn, n);
    let pe = Ratio::new((tp + fn_) * (tp + fp) + (fp + tn) * (fn_ + tn), n * n);
    if pe == Ratio::from_integer(1) {
        return 0.0;
    }
    let k = (po - pe) / (Ratio::from_integer(1) - pe);
    *k.numer() as f64 / *k.denom() as f64
}

#[test]
fn criterion_6_kappa_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let c: [u64; 4] = std::array::from_fn(|_| rng.gen_range(0..=50));
        let got = measures(&ConfusionMatrix::new(c[0], c[1], c[2], c[3])).kappa;
        let want = rational_kappa(c[0].into(), c[1].into(), c[2].into(), c[3].into());
        worst = worst.max((got - want).abs());
    }
    verdict(
        6,
        "kappa against exact rational arithmetic",
        worst <= 1e-12,
        &format!("1000 matrices, max deviation {worst:.2e}"),
    );
}

const PER_CLASS_WARNINGS: &str = r#"<Targets>
  <Target Name="File1.cs">
    <Class Name="Class1"><Issue Category="Design" Count="3"/></Class>
    <Class Name="Class2"><Issue Category="Naming" Count="12"/><Issue Category="Usage" Count="8"/></Class>
    <Class Name="Class3"><Issue Category="Performance" Count="6"/></Class>
  </Target>
  <Target Name="File2.cs">
    <Class Name="Class4"><Issue Category="Reliability" Count="15"/></Class>
  </Target>
</Targets>"#;

#[test]
fn criterion_7_aggregation_fidelity() {
    let classes = parse_class_warnings(PER_CLASS_WARNINGS).unwrap();
    let files = aggregate_warnings_to_files(&classes);
    let totals: Vec<(&str, u64)> = files.iter().map(|f| (f.file_path.as_str(), f.counts.total())).collect();
    let mut ok = totals == [("File1.cs", 29), ("File2.cs", 15)];

    // Through the whole build: LOC comes from the file-level source.
    let fm = parse_file_metrics("file_path,loc\nFile1.cs,100\nFile2.cs,30\n").unwrap();
    let changes = parse_change_log(r#"{"commit":"c1","message":"fix crash","files":["File1.cs"]}"#).unwrap();
    let cfg = BuildConfig {
        generated_rule: None,
        ..Default::default()
    };
    let built = build_datasets(&fm, &classes, &changes, &cfg).unwrap();
    let combined = built.variant(SourceMix::Combined);
    let file1 = &combined.records[0];
    let file1_row =
        file1.file_path == "File1.cs" && file1.features[0] == 100.0 && file1.features[1..].iter().sum::<f64>() == 29.0;
    ok &= file1_row;

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut violations = 0;
    for _ in 0..100 {
        let n_files = rng.gen_range(1..8);
        let records: Vec<ClassWarningRecord> = (0..rng.gen_range(0..40))
            .map(|i| ClassWarningRecord {
                file_path: format!("src/m{}/F{}.cs", rng.gen_range(0..2), rng.gen_range(0..n_files)),
                class_name: format!("C{i}"),
                counts: CategoryCounts(std::array::from_fn(|_| rng.gen_range(0..20))),
            })
            .collect();
        let out = aggregate_warnings_to_files(&records);
        let mut before = [0u64; 11];
        let mut after = [0u64; 11];
        for r in &records {
            before.iter_mut().zip(r.counts.0).for_each(|(a, b)| *a += b);
        }
        for f in &out {
            after.iter_mut().zip(f.counts.0).for_each(|(a, b)| *a += b);
        }
        let mut paths: Vec<&str> = records.iter().map(|r| r.file_path.as_str()).collect();
        paths.sort_unstable();
        paths.dedup();
        if before != after || out.len() != paths.len() {
            violations += 1;
        }
    }
    ok &= violations == 0;
    verdict(
        7,
        "warning aggregation",
        ok,
        &format!("per-class fixture -> {totals:?}, combined File1.cs row LOC 100 / 29 issues: {file1_row}; {violations} of 100 random fixtures violate conservation"),
    );
}

fn report_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    ["experiment.csv", "experiment.json", "study.csv", "study.json"]
        .iter()
        .map(|f| (f.to_string(), std::fs::read(dir.join("reports").join(f)).unwrap()))
        .collect()
}

#[test]
fn criterion_8_determinism_across_job_counts() {
    let base = tempfile::tempdir().unwrap();
    synth_and_build(base.path(), "11", 600);
    let datasets = base.path().join("datasets");
    let without = format!(
        "datasets.without_smells={}",
        datasets.join("file_metrics_only.csv").display()
    );
    let with = format!("datasets.with_smells={}", datasets.join("combined.csv").display());
    let settings = [
        "plan.forest.n_trees=20",
        "plan.protocol.annealing.iterations=40",
        "study.forest.n_trees=20",
        "study.n_submodules=5",
    ];
    let mut runs = Vec::new();
    for jobs in ["1", "3", "3"] {
        let out_dir = tempfile::tempdir().unwrap();
        let out = out_dir.path().display().to_string();
        for cmd in ["experiment", "study"] {
            let mut args = vec![
                "--jobs", jobs, cmd, "--seed", "11", "--out", &out, "--set", &without, "--set", &with,
            ];
            for s in &settings {
                args.extend(["--set", s]);
            }
            run_cli(&args);
        }
        runs.push(report_bytes(out_dir.path()));
    }
    let differing: Vec<&str> = runs[0]
        .iter()
        .zip(&runs[1])
        .zip(&runs[2])
        .filter(|((a, b), c)| a.1 != b.1 || b.1 != c.1)
        .map(|((a, _), _)| a.0.as_str())
        .collect();
    verdict(
        8,
        "byte-identical reports under --jobs 1 and 3",
        differing.is_empty(),
        &format!("4 reports x 3 runs; differing: {differing:?}"),
    );
}
