use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use ndarray::{concatenate, Axis};

use super::config::{digest, PipelineConfig};
use super::report::{format_table, ReportRow};
use super::workdir::{ensure_parent, WorkDir};
use crate::classifier::{classify, em_train, read_models, write_models, ClassModels, ScoreRecord};
use crate::corpus::{load_manifest, load_wav, synth_corpus, Manifest, Partition};
use crate::features::{read_features, write_features, FeatureExtractor, FeatureKind, FeatureMatrix};
use crate::fusion::{
    apply_fusion, majority_vote, read_predictions, read_scores, train_fusion, uar, write_fusion_model,
    write_predictions, write_scores, ConfusionMatrix, FusionModel, ScoreTable,
};
use crate::viz::{compute_pyknogram, compute_spectrogram, render, Panel};
use crate::{Error, Label, Result, SAMPLE_RATE_HZ};

const FUSION: &str = "fusion";

/// Generates the synthetic corpus into `out_dir`.
pub fn cmd_synth(cfg: &PipelineConfig, out_dir: &Path) -> Result<Manifest> {
    synth_corpus(&cfg.corpus, out_dir)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExtractSummary {
    pub total: usize,
    pub written: usize,
    pub skipped: usize,
}

fn read_index(path: &Path) -> Result<HashMap<String, String>> {
    if !path.exists() {
        return Ok(HashMap::new());
    }
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .filter_map(|l| l.split_once('\t'))
        .map(|(id, key)| (id.to_string(), key.to_string()))
        .collect())
}

/// Extracts `kind` features with deltas for every manifest entry. An entry
/// is skipped when its audio and the feature settings hash to the key
/// recorded at its last extraction. Per-file failures are collected and
/// reported together.
pub fn cmd_extract(cfg: &PipelineConfig, manifest: &Manifest, kind: FeatureKind, work: &WorkDir) -> Result<ExtractSummary> {
    let extractor = FeatureExtractor::new(&cfg.features, SAMPLE_RATE_HZ)?;
    let dir = work.features_dir(kind);
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let index_path = work.feature_index(kind);
    let mut index = read_index(&index_path)?;
    let fingerprint = cfg.feature_fingerprint(kind);

    let mut summary = ExtractSummary {
        total: manifest.len(),
        written: 0,
        skipped: 0,
    };
    let mut failures = Vec::new();
    for e in manifest.entries() {
        let audio = manifest.audio_path(e);
        let out = work.feature_path(kind, &e.utt_id);
        let mut attempt = || -> Result<bool> {
            let bytes = fs::read(&audio).map_err(|err| Error::io(&audio, err))?;
            let key = digest(&[&bytes, fingerprint.as_bytes()]);
            if index.get(&e.utt_id) == Some(&key) && out.exists() {
                return Ok(false);
            }
            let w = load_wav(&audio)?;
            write_features(&out, &extractor.extract(kind, &w)?)?;
            index.insert(e.utt_id.clone(), key);
            Ok(true)
        };
        match attempt() {
            Ok(true) => summary.written += 1,
            Ok(false) => summary.skipped += 1,
            Err(err) => {
                index.remove(&e.utt_id);
                failures.push(format!("{} ({err})", e.utt_id));
            }
        }
    }
    let mut lines: Vec<String> = manifest
        .entries()
        .iter()
        .filter_map(|e| index.get(&e.utt_id).map(|k| format!("{}\t{k}\n", e.utt_id)))
        .collect();
    lines.dedup();
    fs::write(&index_path, lines.concat()).map_err(|e| Error::io(&index_path, e))?;
    if failures.is_empty() {
        Ok(summary)
    } else {
        Err(Error::Batch {
            failed: failures.len(),
            total: summary.total,
            ids: failures.join("; "),
        })
    }
}

fn load_features(work: &WorkDir, kind: FeatureKind, utt_id: &str) -> Result<FeatureMatrix> {
    let path = work.feature_path(kind, utt_id);
    if !path.exists() {
        return Err(Error::MissingArtifact(path));
    }
    let f = read_features(&path)?;
    if f.kind() != kind {
        return Err(Error::Malformed {
            what: "feature file",
            msg: format!("{} holds {} features, expected {kind}", path.display(), f.kind()),
        });
    }
    Ok(f)
}

/// Trains one GMM per class on the train partition.
pub fn cmd_train(cfg: &PipelineConfig, manifest: &Manifest, kind: FeatureKind, work: &WorkDir) -> Result<ClassModels> {
    let mut per_class: [Vec<FeatureMatrix>; 2] = [Vec::new(), Vec::new()];
    for e in manifest.partition(Partition::Train) {
        let label = e.label.expect("train entries are labelled");
        per_class[label.index()].push(load_features(work, kind, &e.utt_id)?);
    }
    let train = |label: Label| {
        let mats = &per_class[label.index()];
        if mats.is_empty() {
            return Err(Error::invalid(format!("train partition has no {label} utterances")));
        }
        let views: Vec<_> = mats.iter().map(|f| f.rows().view()).collect();
        let data = concatenate(Axis(0), &views).map_err(|_| Error::DimensionMismatch {
            expected: mats[0].dim(),
            got: mats.iter().map(FeatureMatrix::dim).find(|&d| d != mats[0].dim()).unwrap_or(0),
        })?;
        em_train(data.view(), &cfg.gmm)
    };
    let models = ClassModels {
        kind,
        no_mask: train(Label::NoMask)?,
        mask: train(Label::Mask)?,
        var_floor: cfg.gmm.var_floor,
        seed: cfg.gmm.seed,
        fingerprint: cfg.feature_fingerprint(kind),
    };
    let path = work.model_path(kind);
    ensure_parent(&path)?;
    write_models(&path, &models)?;
    Ok(models)
}

fn write_records(work: &WorkDir, system: &str, part: Partition, records: &[ScoreRecord]) -> Result<()> {
    let scores = work.scores_path(system, part);
    ensure_parent(&scores)?;
    write_scores(&scores, records)?;
    let preds: Vec<(String, Label)> = records.iter().map(|r| (r.utt_id.clone(), r.predicted)).collect();
    write_predictions(&work.predictions_path(system, part), &preds)
}

/// Scores the dev and test partitions, writing score and prediction files.
/// Returns the number of utterances scored per partition.
pub fn cmd_score(
    cfg: &PipelineConfig,
    manifest: &Manifest,
    kind: FeatureKind,
    work: &WorkDir,
) -> Result<Vec<(Partition, usize)>> {
    let models = read_models(&work.model_path(kind))?;
    if models.fingerprint != cfg.feature_fingerprint(kind) {
        return Err(Error::invalid(format!(
            "{} was trained on features extracted with different settings; rerun extract and train",
            work.model_path(kind).display()
        )));
    }
    let mut counts = Vec::new();
    for part in [Partition::Dev, Partition::Test] {
        let entries: Vec<_> = manifest.partition(part).collect();
        if entries.is_empty() {
            continue;
        }
        let records = entries
            .iter()
            .map(|e| classify(&models, &e.utt_id, &load_features(work, kind, &e.utt_id)?))
            .collect::<Result<Vec<_>>>()?;
        write_records(work, kind.as_str(), part, &records)?;
        counts.push((part, records.len()));
    }
    Ok(counts)
}

fn score_table(cfg: &PipelineConfig, work: &WorkDir, part: Partition) -> Result<ScoreTable> {
    let systems = cfg
        .systems
        .iter()
        .map(|k| Ok((k.display_name().to_string(), read_scores(&work.scores_path(k.as_str(), part))?)))
        .collect::<Result<Vec<_>>>()?;
    ScoreTable::from_systems(systems)
}

/// Trains logistic-regression fusion on the dev scores of every configured
/// system and applies it to dev and, when present, test.
pub fn cmd_fuse(cfg: &PipelineConfig, manifest: &Manifest, work: &WorkDir) -> Result<FusionModel> {
    let dev = score_table(cfg, work, Partition::Dev)?.with_labels(&manifest.labels(Partition::Dev))?;
    let model = train_fusion(&dev, &cfg.fusion)?;
    let path = work.fusion_path();
    ensure_parent(&path)?;
    write_fusion_model(&path, &model)?;
    write_records(work, FUSION, Partition::Dev, &apply_fusion(&model, &dev)?)?;

    if manifest.partition(Partition::Test).next().is_some() {
        let present: Vec<&str> = cfg
            .systems
            .iter()
            .filter(|k| work.scores_path(k.as_str(), Partition::Test).exists())
            .map(|k| k.display_name())
            .collect();
        if present.is_empty() {
            return Ok(model);
        }
        if present.len() != cfg.systems.len() {
            return Err(Error::invalid(format!(
                "test scores exist for [{}] but fusion was trained on [{}]",
                present.join(", "),
                model.systems.join(", ")
            )));
        }
        let test = score_table(cfg, work, Partition::Test)?;
        write_records(work, FUSION, Partition::Test, &apply_fusion(&model, &test)?)?;
    }
    Ok(model)
}

fn aligned_predictions(path: &Path, truth: &BTreeMap<String, Label>) -> Result<Vec<Label>> {
    let preds: BTreeMap<String, Label> = read_predictions(path)?.into_iter().collect();
    if preds.len() != truth.len() || !truth.keys().all(|k| preds.contains_key(k)) {
        return Err(Error::invalid(format!(
            "{} does not cover exactly the labelled utterances of its partition",
            path.display()
        )));
    }
    Ok(truth.keys().map(|k| preds[k]).collect())
}

/// Prints the UAR table for every system, the majority vote and the score
/// fusion, and writes it to `reports/uar.txt`. Dev predictions of every
/// system are required; other cells show `-` when their predictions or
/// labels are unavailable.
pub fn cmd_eval(cfg: &PipelineConfig, manifest: &Manifest, work: &WorkDir) -> Result<String> {
    let mut rows: Vec<ReportRow> = cfg
        .systems
        .iter()
        .map(|k| ReportRow {
            system: k.display_name().to_string(),
            dev: None,
            test: None,
        })
        .collect();
    let mut vote_row = ReportRow {
        system: "Majority Vote".into(),
        dev: None,
        test: None,
    };
    let mut fusion_row = ReportRow {
        system: "Score Fusion".into(),
        dev: None,
        test: None,
    };
    for part in [Partition::Dev, Partition::Test] {
        if manifest.partition(part).next().is_none() || !manifest.is_labeled(part) {
            if part == Partition::Dev {
                return Err(Error::invalid("dev partition is empty"));
            }
            continue;
        }
        let truth_map = manifest.labels(part);
        let truth: Vec<Label> = truth_map.values().copied().collect();
        let score = |preds: &[Label]| -> Result<f64> { Ok(uar(&ConfusionMatrix::from_labels(&truth, preds)?)?.uar_percent) };
        let cell = |row: &mut ReportRow, v: f64| match part {
            Partition::Dev => row.dev = Some(v),
            _ => row.test = Some(v),
        };

        let mut system_preds = Vec::new();
        for (k, row) in cfg.systems.iter().zip(rows.iter_mut()) {
            let path = work.predictions_path(k.as_str(), part);
            if part == Partition::Test && !path.exists() {
                continue;
            }
            let preds = aligned_predictions(&path, &truth_map)?;
            cell(row, score(&preds)?);
            system_preds.push(preds);
        }
        if system_preds.len() == cfg.systems.len() {
            cell(&mut vote_row, score(&majority_vote(&system_preds)?)?);
        }
        let fused = work.predictions_path(FUSION, part);
        if fused.exists() {
            cell(&mut fusion_row, score(&aligned_predictions(&fused, &truth_map)?)?);
        }
    }
    rows.push(vote_row);
    rows.push(fusion_row);
    let table = format_table(&rows);
    let path = work.report_path();
    ensure_parent(&path)?;
    fs::write(&path, &table).map_err(|e| Error::io(&path, e))?;
    Ok(table)
}

/// Spectrogram and pyknogram panels of one WAV file, written as
/// `<stem>_spectrogram.png` and `<stem>_pyknogram.png` with text dumps.
pub fn cmd_render(cfg: &PipelineConfig, input: &Path, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let w = load_wav(input)?;
    let stem = input
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "input".into());
    let style = &cfg.render.style;
    let spec_png = out_dir.join(format!("{stem}_spectrogram.png"));
    let pyk_png = out_dir.join(format!("{stem}_pyknogram.png"));
    let spec_txt = render(
        Panel::Spectrogram(&compute_spectrogram(&w, &cfg.render.spectrogram)?),
        &spec_png,
        style,
    )?;
    let pyk_txt = render(Panel::Pyknogram(&compute_pyknogram(&w, &cfg.render.pyknogram)?), &pyk_png, style)?;
    Ok(vec![spec_png, spec_txt, pyk_png, pyk_txt])
}

/// Synthesises the corpus, then extracts, trains and scores every system,
/// fuses and evaluates. Returns the report table.
pub fn run_all(cfg: &PipelineConfig) -> Result<String> {
    cmd_synth(cfg, &cfg.paths.corpus_dir)?;
    let manifest = load_manifest(&cfg.manifest_path())?;
    let work = WorkDir::new(&cfg.paths.work_dir);
    for &kind in &cfg.systems {
        cmd_extract(cfg, &manifest, kind, &work)?;
        cmd_train(cfg, &manifest, kind, &work)?;
        cmd_score(cfg, &manifest, kind, &work)?;
    }
    cmd_fuse(cfg, &manifest, &work)?;
    cmd_eval(cfg, &manifest, &work)
}
