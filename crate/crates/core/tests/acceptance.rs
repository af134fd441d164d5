//! Acceptance checks, one line per criterion. Runs as a plain binary so the
//! verdicts show up in `cargo test` output.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use maskspeech::classifier::{em_train_traced, GmmConfig};
use maskspeech::corpus::{load_manifest, SynthConfig};
use maskspeech::features::{
    cqt_at, instantaneous_frequency, CqtConfig, CqtKernel, FeatureConfig, FeatureExtractor, FeatureKind,
};
use maskspeech::fusion::{uar, ConfusionMatrix};
use maskspeech::pipeline::{cmd_eval, run_all, PipelineConfig, WorkDir};
use maskspeech::signal::{dct2_orthonormal, idct2_orthonormal, power_spectrum, AnalyticSpectrum, Waveform};

type Verdict = Result<String, String>;

fn check(ok: bool, detail: String) -> Verdict {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian(r: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| r.sample(StandardNormal)).collect()
}

fn single_bin_if() -> Verdict {
    let mut r = rng(1);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = r.random_range(4..=2048);
        let k0 = r.random_range(1..n / 2);
        let mut bins = vec![Complex64::default(); n];
        bins[k0] = Complex64::from_polar(r.random_range(0.1..10.0), r.random_range(-PI..PI));
        let est = instantaneous_frequency(&AnalyticSpectrum::new(bins).unwrap()).unwrap();
        if est.n_flagged() > 0 {
            return Err(format!("N = {n}, k0 = {k0}: {} samples flagged", est.n_flagged()));
        }
        let expected = 2.0 * PI * k0 as f64 / n as f64;
        worst = est.theta.iter().fold(worst, |m, t| m.max((t - expected).abs()));
    }
    check(worst <= 1e-9, format!("max deviation {worst:.2e} rad/sample"))
}

/// Direct evaluation of the windowed correlation at every position.
fn cqt_direct(x: &[f64], kernel: &CqtKernel) -> Array2<Complex64> {
    let len = x.len() as isize;
    let mut y = Array2::zeros((kernel.n_bins(), x.len()));
    for k in 0..kernel.n_bins() {
        let atom = kernel.atom(k);
        let half = kernel.lengths[k] as isize / 2;
        for n in 0..len {
            let mut acc = Complex64::default();
            for (u, a) in atom.iter().enumerate() {
                let j = n - half + u as isize;
                if (0..len).contains(&j) {
                    acc += a.conj() * x[j as usize];
                }
            }
            y[[k, n as usize]] = acc;
        }
    }
    y
}

fn cqt_matches_direct_sum() -> Verdict {
    let mut r = rng(2);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let b = [6usize, 8, 12][r.random_range(0..3)];
        let k = r.random_range(2 * b..=48);
        let cfg = CqtConfig {
            bins_per_octave: b,
            fmin_hz: 8000.0 / 2f64.powf(k as f64 / b as f64),
            fmax_hz: 8000.0,
            ..CqtConfig::default()
        };
        let kernel = CqtKernel::new(&cfg, 16000).unwrap();
        assert!(kernel.n_bins() <= 48);
        let x = gaussian(&mut r, 4000);
        let positions: Vec<usize> = (0..x.len()).collect();
        let fast = cqt_at(&Waveform::new(x.clone(), 16000).unwrap(), &kernel, &positions).unwrap();
        let direct = cqt_direct(&x, &kernel);
        for (fast_row, direct_row) in fast.y.rows().into_iter().zip(direct.rows()) {
            let scale = direct_row.iter().fold(0.0f64, |m, z| m.max(z.norm()));
            let err = fast_row
                .iter()
                .zip(direct_row)
                .fold(0.0f64, |m, (a, b)| m.max((a - b).norm()));
            worst = worst.max(err / scale);
        }
    }
    check(worst <= 1e-8, format!("max relative error {worst:.2e}"))
}

fn dsp_identities() -> Verdict {
    let mut r = rng(3);
    let (mut parseval, mut round_trip) = (0.0f64, 0.0f64);
    for _ in 0..200 {
        let n_fft = 1usize << r.random_range(1..=11);
        let len = r.random_range(1..=n_fft);
        let x = gaussian(&mut r, len);
        let p = power_spectrum(&x, n_fft).unwrap();
        let inner: f64 = p[1..n_fft / 2].iter().sum();
        let spectral = (p[0] + 2.0 * inner + p[n_fft / 2]) / n_fft as f64;
        let energy: f64 = x.iter().map(|v| v * v).sum();
        parseval = parseval.max((spectral - energy).abs() / energy);

        let len = r.random_range(1..=512);
        let v = gaussian(&mut r, len);
        let back = idct2_orthonormal(&dct2_orthonormal(&v, v.len()).unwrap(), v.len()).unwrap();
        round_trip = v.iter().zip(&back).fold(round_trip, |m, (a, b)| m.max((a - b).abs()));
    }
    check(
        parseval <= 1e-10 && round_trip <= 1e-10,
        format!("Parseval {parseval:.2e}, DCT round trip {round_trip:.2e}"),
    )
}

fn em_monotone() -> Verdict {
    let mut worst_drop = 0.0f64;
    let mut iterations = 0;
    for run in 0..50u64 {
        let m = [1usize, 2, 4, 8][run as usize % 4];
        let mut r = rng(100 + run);
        let dim = r.random_range(1..=6);
        let centers = r.random_range(1..=6);
        let means: Vec<Vec<f64>> = (0..centers).map(|_| gaussian(&mut r, dim).iter().map(|v| 4.0 * v).collect()).collect();
        let rows = 400;
        let data = Array2::from_shape_fn((rows, dim), |(i, d)| {
            means[i % centers][d] + r.sample::<f64, _>(StandardNormal) * (0.3 + (d as f64) * 0.2)
        });
        let cfg = GmmConfig {
            components: m,
            seed: run,
            ..GmmConfig::default()
        };
        let (_, trace) = em_train_traced(data.view(), &cfg).unwrap();
        iterations += trace.log_likelihood.len();
        for w in trace.log_likelihood.windows(2) {
            worst_drop = worst_drop.max(w[0] - w[1]);
        }
    }
    check(
        worst_drop <= 1e-8,
        format!("largest per-iteration decrease {worst_drop:.2e} over {iterations} iterations"),
    )
}

fn uar_exact() -> Verdict {
    let cases = [
        ([[8, 2], [4, 6]], 70.0, "70.00"),
        ([[10, 0], [0, 7]], 100.0, "100.00"),
        ([[9, 0], [5, 0]], 50.0, "50.00"),
    ];
    for (counts, value, text) in cases {
        let got = uar(&ConfusionMatrix::new(counts)).unwrap();
        if got.uar_percent != value || got.to_string() != text {
            return Err(format!("{counts:?}: got {got}"));
        }
    }
    Ok("70.00, 100.00, 50.00".into())
}

fn table_cells(table: &str) -> Vec<(String, Vec<String>)> {
    table
        .lines()
        .skip(1)
        .map(|l| {
            let (name, rest) = l.split_at(16);
            (name.trim().to_string(), rest.split_whitespace().map(String::from).collect())
        })
        .collect()
}

fn end_to_end() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = PipelineConfig::default();
    cfg.paths.corpus_dir = dir.path().join("corpus");
    cfg.paths.work_dir = dir.path().join("work");
    cfg.corpus = SynthConfig {
        n_speakers: 16,
        utts_per_speaker: 25,
        ..SynthConfig::default()
    };
    cfg.gmm.components = 64;
    let table = run_all(&cfg).map_err(|e| e.to_string())?;
    let cells = table_cells(&table);
    let dev = |name: &str| -> f64 {
        let row = cells.iter().find(|(n, _)| n == name).expect("row present");
        row.1[0].parse().expect("dev UAR")
    };
    let singles: Vec<(&str, f64)> = ["LFCC", "MFCC", "IFCC", "CQCC"].iter().map(|&s| (s, dev(s))).collect();
    let best = singles.iter().map(|s| s.1).fold(f64::MIN, f64::max);
    let fused = dev("Score Fusion");
    let detail = singles
        .iter()
        .map(|(s, u)| format!("{s} {u:.2}"))
        .chain([format!("fusion {fused:.2}")])
        .collect::<Vec<_>>()
        .join(", ");
    check(singles.iter().all(|s| s.1 >= 85.0) && fused >= best - 0.5, detail)
}

fn feature_shapes() -> Verdict {
    let ex = FeatureExtractor::new(&FeatureConfig::default(), 16000).unwrap();
    let w = Waveform::new(gaussian(&mut rng(7), 16000).iter().map(|v| 0.1 * v).collect(), 16000).unwrap();
    let mut shapes = Vec::new();
    for kind in FeatureKind::ALL {
        let f = ex.extract(kind, &w).unwrap();
        if (f.n_frames(), f.dim()) != (99, 90) {
            return Err(format!("{kind}: {} x {}", f.n_frames(), f.dim()));
        }
        shapes.push(kind.to_string());
    }
    Ok(format!("99 x 90 for {}", shapes.join(", ")))
}

fn report_golden() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let ids: Vec<(String, &str, &str)> = (0..10)
        .map(|i| {
            let part = if i < 6 { "dev" } else { "test" };
            let label = if i % 2 == 0 { "no_mask" } else { "mask" };
            (format!("u{i:02}"), part, label)
        })
        .collect();
    let manifest: String = ids
        .iter()
        .map(|(id, part, label)| format!("{id}\twav/{id}.wav\t{part}\t{label}\n"))
        .collect();
    fs::write(root.join("manifest.tsv"), manifest).unwrap();
    // each system flips a different subset of utterances
    let flips: [(&str, &[usize]); 5] = [
        ("lfcc", &[1]),
        ("mfcc", &[0, 7]),
        ("ifcc", &[2, 3, 8]),
        ("cqcc", &[]),
        ("fusion", &[4, 9]),
    ];
    fs::create_dir_all(root.join("work/scores")).unwrap();
    for (system, flipped) in flips {
        for part in ["dev", "test"] {
            let lines: String = ids
                .iter()
                .enumerate()
                .filter(|(_, (_, p, _))| *p == part)
                .map(|(i, (id, _, label))| {
                    let other = if *label == "mask" { "no_mask" } else { "mask" };
                    format!("{id}\t{}\n", if flipped.contains(&i) { other } else { label })
                })
                .collect();
            fs::write(root.join(format!("work/scores/{system}_{part}.pred.tsv")), lines).unwrap();
        }
    }
    let mut cfg = PipelineConfig::default();
    cfg.paths.manifest = Some(root.join("manifest.tsv"));
    let manifest = load_manifest(&cfg.manifest_path()).unwrap();
    let table = cmd_eval(&cfg, &manifest, &WorkDir::new(root.join("work"))).map_err(|e| e.to_string())?;
    let golden = include_str!("golden/uar_table.txt");
    check(table == golden, format!("{} rows", table.lines().count()))
}

fn files_under(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap())
        })
        .collect();
    out.sort();
    out
}

fn deterministic_runs() -> Verdict {
    let run = || {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = PipelineConfig::default();
        cfg.paths.corpus_dir = dir.path().join("corpus");
        cfg.paths.work_dir = dir.path().join("work");
        cfg.corpus = SynthConfig {
            n_speakers: 4,
            utts_per_speaker: 4,
            test_speakers: 2,
            seed: 42,
            ..SynthConfig::default()
        };
        cfg.gmm.components = 8;
        let table = run_all(&cfg).unwrap();
        (table, files_under(&dir.path().join("work/scores")))
    };
    let (table_a, scores_a) = run();
    let (table_b, scores_b) = run();
    check(
        table_a == table_b && scores_a == scores_b,
        format!("{} score files and the UAR table compared", scores_a.len()),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, Duration, fn() -> Verdict); 9] = [
        ("1 single-bin instantaneous frequency", Duration::from_secs(5), single_bin_if),
        ("2 constant-Q transform vs direct sum", Duration::from_secs(60), cqt_matches_direct_sum),
        ("3 Parseval and DCT round trip", Duration::from_secs(5), dsp_identities),
        ("4 EM log-likelihood monotone", Duration::from_secs(60), em_monotone),
        ("5 UAR closed forms", Duration::from_secs(5), uar_exact),
        ("6 synthetic end-to-end dev UAR", Duration::from_secs(600), end_to_end),
        ("7 99 x 90 feature shape", Duration::from_secs(60), feature_shapes),
        ("8 report table matches golden file", Duration::from_secs(5), report_golden),
        ("9 deterministic pipeline", Duration::from_secs(600), deterministic_runs),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, budget, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.starts_with(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let verdict = run();
        let took = start.elapsed();
        let (ok, detail) = match verdict {
            Ok(d) if took <= budget => (true, d),
            Ok(d) => (false, format!("{d}; took longer than {budget:?}")),
            Err(d) => (false, d),
        };
        failed += usize::from(!ok);
        println!("{} criterion {name}: {detail} [{:.1} s]", if ok { "PASS" } else { "FAIL" }, took.as_secs_f64());
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
