use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::ScoreTable;
use crate::classifier::ScoreRecord;
use crate::{Error, Label, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FusionConfig {
    /// Ridge strength on the system weights; the bias is not penalised.
    pub l2: f64,
    pub max_iters: usize,
    /// Stop when the Newton decrement falls below this.
    pub tol: f64,
}

impl Default for FusionConfig {
    fn default() -> Self {
        FusionConfig {
            l2: 1e-4,
            max_iters: 100,
            tol: 1e-12,
        }
    }
}

/// Linear fusion `w . s + b` over named systems.
#[derive(Debug, Clone, PartialEq)]
pub struct FusionModel {
    pub systems: Vec<String>,
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl FusionModel {
    pub fn fuse(&self, scores: &[f64]) -> f64 {
        self.weights.iter().zip(scores).map(|(w, s)| w * s).sum::<f64>() + self.bias
    }
}

/// `log(1 + exp(x))` without overflow.
fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

struct Problem<'a> {
    x: &'a DMatrix<f64>,
    y: Vec<f64>,
    l2: f64,
}

impl Problem<'_> {
    fn n_weights(&self) -> usize {
        self.x.ncols() - 1
    }

    /// Negative log-likelihood plus `l2 * |w|^2`.
    fn objective(&self, theta: &DVector<f64>) -> f64 {
        let z = self.x * theta;
        let nll: f64 = z.iter().zip(&self.y).map(|(z, y)| softplus(-y * z)).sum();
        nll + self.l2 * theta.rows(0, self.n_weights()).norm_squared()
    }

    fn gradient_hessian(&self, theta: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>) {
        let z = self.x * theta;
        let p = self.x.ncols();
        let mut g = DVector::zeros(p);
        let mut h = DMatrix::zeros(p, p);
        for (i, (&zi, &yi)) in z.iter().zip(&self.y).enumerate() {
            let t = (yi + 1.0) / 2.0;
            let mu = sigmoid(zi);
            let row = self.x.row(i).transpose();
            g.axpy(mu - t, &row, 1.0);
            h.ger(mu * (1.0 - mu), &row, &row, 1.0);
        }
        for j in 0..self.n_weights() {
            g[j] += 2.0 * self.l2 * theta[j];
            h[(j, j)] += 2.0 * self.l2;
        }
        (g, h)
    }
}

/// Fits ridge-regularised logistic regression of the labels on the system
/// scores by damped Newton iterations. Returns the model and the objective
/// value after every iteration, starting from the all-zero model.
pub fn train_fusion_traced(table: &ScoreTable, cfg: &FusionConfig) -> Result<(FusionModel, Vec<f64>)> {
    if !(cfg.l2 >= 0.0 && cfg.l2.is_finite()) {
        return Err(Error::config("fusion.l2", "must be a finite non-negative number"));
    }
    let labels = table
        .labels()
        .ok_or_else(|| Error::invalid("fusion training needs labelled scores"))?;
    let counts = Label::ALL.map(|l| labels.iter().filter(|&&x| x == l).count());
    if counts.iter().any(|&c| c < 2) {
        return Err(Error::invalid(format!(
            "fusion training needs at least 2 utterances per class, got no_mask={} mask={}",
            counts[0], counts[1]
        )));
    }
    let (n, k) = table.scores().dim();
    if table.scores().iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("fusion scores"));
    }
    let x = DMatrix::from_fn(n, k + 1, |i, j| if j < k { table.scores()[[i, j]] } else { 1.0 });
    let problem = Problem {
        x: &x,
        y: labels.iter().map(|&l| if l == Label::Mask { 1.0 } else { -1.0 }).collect(),
        l2: cfg.l2,
    };

    let mut theta = DVector::zeros(k + 1);
    let mut obj = problem.objective(&theta);
    let mut history = vec![obj];
    for _ in 0..cfg.max_iters {
        let (g, mut h) = problem.gradient_hessian(&theta);
        let step = match h.clone().cholesky() {
            Some(c) => c.solve(&(-&g)),
            None => {
                let jitter = 1e-10 * (1.0 + h.diagonal().amax());
                for j in 0..=k {
                    h[(j, j)] += jitter;
                }
                match h.cholesky() {
                    Some(c) => c.solve(&(-&g)),
                    None => -&g,
                }
            }
        };
        let slope = g.dot(&step);
        if -slope / 2.0 < cfg.tol {
            break;
        }
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let cand = &theta + &step * t;
            let c = problem.objective(&cand);
            if c <= obj + 1e-4 * t * slope {
                accepted = Some((cand, c));
                break;
            }
            t /= 2.0;
        }
        let Some((cand, c)) = accepted else { break };
        theta = cand;
        obj = c;
        history.push(obj);
    }
    if theta.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("fusion parameters"));
    }
    Ok((
        FusionModel {
            systems: table.systems().to_vec(),
            weights: theta.rows(0, k).iter().copied().collect(),
            bias: theta[k],
        },
        history,
    ))
}

pub fn train_fusion(table: &ScoreTable, cfg: &FusionConfig) -> Result<FusionModel> {
    train_fusion_traced(table, cfg).map(|(m, _)| m)
}

/// Fused score per utterance, `mask` iff it is positive.
pub fn apply_fusion(model: &FusionModel, table: &ScoreTable) -> Result<Vec<ScoreRecord>> {
    if model.systems != table.systems() {
        return Err(Error::invalid(format!(
            "fusion model trained on [{}] but scores are for [{}]",
            model.systems.join(", "),
            table.systems().join(", ")
        )));
    }
    Ok(table
        .utt_ids()
        .iter()
        .zip(table.scores().rows())
        .map(|(id, row)| ScoreRecord::new(id.clone(), model.fuse(row.as_slice().expect("standard layout"))))
        .collect())
}

/// `bias<TAB>b` then one `weight<TAB>system<TAB>w` line per system.
pub fn write_fusion_model(path: &Path, m: &FusionModel) -> Result<()> {
    let mut out = format!("bias\t{}\n", m.bias);
    for (s, w) in m.systems.iter().zip(&m.weights) {
        writeln!(out, "weight\t{s}\t{w}").expect("string write");
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn read_fusion_model(path: &Path) -> Result<FusionModel> {
    if !path.exists() {
        return Err(Error::MissingArtifact(path.to_path_buf()));
    }
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let bad = |line: usize, msg: &str| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.to_string(),
    };
    let num = |line: usize, v: &str| -> Result<f64> {
        v.parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| bad(line, "expected a finite number"))
    };
    let mut bias = None;
    let mut systems = Vec::new();
    let mut weights = Vec::new();
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.is_empty()) {
        let fields: Vec<&str> = line.split('\t').collect();
        match fields.as_slice() {
            ["bias", v] if bias.is_none() => bias = Some(num(i + 1, v)?),
            ["weight", s, v] => {
                systems.push(s.to_string());
                weights.push(num(i + 1, v)?);
            }
            _ => return Err(bad(i + 1, "expected `bias<TAB>v` or `weight<TAB>system<TAB>v`")),
        }
    }
    let bias = bias.ok_or_else(|| bad(0, "missing bias line"))?;
    if systems.is_empty() {
        return Err(bad(0, "no weights"));
    }
    Ok(FusionModel {
        systems,
        weights,
        bias,
    })
}
