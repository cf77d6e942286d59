//! Detection metrics: IoU, greedy VOC matching, all-point interpolated AP and the mAP table.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::detection::DetectionBox;

/// Rows of the evaluation table.
pub const IOU_THRESHOLDS: [f64; 5] = [0.5, 0.6, 0.7, 0.8, 0.9];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("class {0} has no ground truth")]
    NoGroundTruth(u32),
    #[error("ground truth is empty")]
    EmptyGroundTruth,
    #[error("{preds} prediction sets for {gts} ground-truth sets")]
    ImageCountMismatch { preds: usize, gts: usize },
    #[error("IoU threshold {0} outside (0, 1]")]
    BadThreshold(f64),
}

pub fn iou(a: &DetectionBox, b: &DetectionBox) -> f64 {
    let (ax0, ay0, ax1, ay1) = a.corners();
    let (bx0, by0, bx1, by1) = b.corners();
    let iw = (ax1.min(bx1) - ax0.max(bx0)).max(0.0);
    let ih = (ay1.min(by1) - ay0.max(by0)).max(0.0);
    let inter = iw * ih;
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        return 0.0;
    }
    (inter / union).clamp(0.0, 1.0)
}

/// Outcome of one prediction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictionFlag {
    pub class_id: u32,
    pub confidence: f64,
    pub true_positive: bool,
}

/// Per-prediction TP/FP flags in processing order plus ground-truth counts per class.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MatchResult {
    pub flags: Vec<PredictionFlag>,
    pub gt_counts: BTreeMap<u32, usize>,
}

impl MatchResult {
    /// Appends another image's matches; earlier images win confidence ties.
    pub fn merge(&mut self, other: MatchResult) {
        self.flags.extend(other.flags);
        for (class, n) in other.gt_counts {
            *self.gt_counts.entry(class).or_default() += n;
        }
    }

    pub fn true_positives(&self, class_id: u32) -> usize {
        self.flags.iter().filter(|f| f.class_id == class_id && f.true_positive).count()
    }
}

/// Stable descending-confidence order.
fn ranking(preds: &[DetectionBox]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..preds.len()).collect();
    order.sort_by(|&a, &b| preds[b].confidence.total_cmp(&preds[a].confidence));
    order
}

/// Greedy matching within one image. Each prediction, in descending confidence, takes its
/// highest-IoU unmatched ground truth of the same class if that IoU reaches `threshold`.
pub fn match_detections(preds: &[DetectionBox], gts: &[DetectionBox], threshold: f64) -> Result<MatchResult, EvalError> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(EvalError::BadThreshold(threshold));
    }
    let mut gt_counts = BTreeMap::new();
    for g in gts {
        *gt_counts.entry(g.class_id).or_default() += 1;
    }
    let mut matched = vec![false; gts.len()];
    let mut flags = Vec::with_capacity(preds.len());
    for i in ranking(preds) {
        let p = &preds[i];
        let best = gts
            .iter()
            .enumerate()
            .filter(|(j, g)| g.class_id == p.class_id && !matched[*j])
            .map(|(j, g)| (j, iou(p, g)))
            .fold(None, |acc: Option<(usize, f64)>, (j, v)| match acc {
                Some((_, bv)) if bv >= v => acc,
                _ => Some((j, v)),
            });
        let true_positive = match best {
            Some((j, v)) if v >= threshold => {
                matched[j] = true;
                true
            }
            _ => false,
        };
        flags.push(PredictionFlag { class_id: p.class_id, confidence: p.confidence, true_positive });
    }
    Ok(MatchResult { flags, gt_counts })
}

/// All-point interpolated average precision for one class.
pub fn average_precision(result: &MatchResult, class_id: u32) -> Result<f64, EvalError> {
    let total = result.gt_counts.get(&class_id).copied().unwrap_or(0);
    if total == 0 {
        return Err(EvalError::NoGroundTruth(class_id));
    }
    let mut flags: Vec<&PredictionFlag> = result.flags.iter().filter(|f| f.class_id == class_id).collect();
    flags.sort_by(|a, b| b.confidence.total_cmp(&a.confidence));

    let mut recall = Vec::with_capacity(flags.len());
    let mut precision = Vec::with_capacity(flags.len());
    let mut tp = 0usize;
    for (k, f) in flags.iter().enumerate() {
        tp += f.true_positive as usize;
        recall.push(tp as f64 / total as f64);
        precision.push(tp as f64 / (k + 1) as f64);
    }
    // precision envelope: max precision at any later rank
    for k in (0..precision.len().saturating_sub(1)).rev() {
        precision[k] = precision[k].max(precision[k + 1]);
    }
    let mut ap = 0.0;
    let mut prev_recall = 0.0;
    for (r, p) in recall.iter().zip(&precision) {
        ap += (r - prev_recall) * p;
        prev_recall = *r;
    }
    Ok(ap)
}

/// Per-class AP and mAP for each IoU threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalTable {
    pub thresholds: Vec<f64>,
    pub classes: Vec<u32>,
    /// `ap[row][col]`: threshold row, class column.
    pub ap: Vec<Vec<f64>>,
    pub map: Vec<f64>,
}

impl EvalTable {
    pub fn map_at(&self, threshold: f64) -> Option<f64> {
        self.thresholds
            .iter()
            .position(|t| (t - threshold).abs() < 1e-12)
            .map(|i| self.map[i])
    }

    pub fn is_monotone(&self) -> bool {
        self.map.windows(2).all(|w| w[1] <= w[0] + 1e-12)
    }

    /// Aligned plain-text table, one `mAP@t` row per threshold.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = write!(s, "{:<10}", "IoU");
        for c in &self.classes {
            let _ = write!(s, "{:>10}", format!("AP[{c}]"));
        }
        let _ = writeln!(s, "{:>10}", "mAP");
        for (i, t) in self.thresholds.iter().enumerate() {
            let _ = write!(s, "{:<10}", format!("mAP@{t:.1}"));
            for v in &self.ap[i] {
                let _ = write!(s, "{v:>10.4}");
            }
            let _ = writeln!(s, "{:>10.4}", self.map[i]);
        }
        s
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("iou");
        for c in &self.classes {
            let _ = write!(s, ",ap_{c}");
        }
        s.push_str(",map\n");
        for (i, t) in self.thresholds.iter().enumerate() {
            let _ = write!(s, "{t:.1}");
            for v in &self.ap[i] {
                let _ = write!(s, ",{v:.6}");
            }
            let _ = writeln!(s, ",{:.6}", self.map[i]);
        }
        s
    }
}

/// Evaluates per-image predictions against per-image ground truth. AP is pooled over all
/// images with a single confidence ranking per class; classes absent from the ground truth
/// are ignored.
pub fn evaluate(preds: &[Vec<DetectionBox>], gts: &[Vec<DetectionBox>]) -> Result<EvalTable, EvalError> {
    evaluate_at(preds, gts, &IOU_THRESHOLDS)
}

pub fn evaluate_at(preds: &[Vec<DetectionBox>], gts: &[Vec<DetectionBox>], thresholds: &[f64]) -> Result<EvalTable, EvalError> {
    if preds.len() != gts.len() {
        return Err(EvalError::ImageCountMismatch { preds: preds.len(), gts: gts.len() });
    }
    let classes: Vec<u32> = gts.iter().flatten().map(|g| g.class_id).collect::<BTreeSet<_>>().into_iter().collect();
    if classes.is_empty() {
        return Err(EvalError::EmptyGroundTruth);
    }
    let mut ap = Vec::with_capacity(thresholds.len());
    let mut map = Vec::with_capacity(thresholds.len());
    for &t in thresholds {
        let mut pooled = MatchResult::default();
        for (p, g) in preds.iter().zip(gts) {
            pooled.merge(match_detections(p, g, t)?);
        }
        let row = classes
            .iter()
            .map(|&c| average_precision(&pooled, c))
            .collect::<Result<Vec<_>, _>>()?;
        map.push(row.iter().sum::<f64>() / row.len() as f64);
        ap.push(row);
    }
    Ok(EvalTable { thresholds: thresholds.to_vec(), classes, ap, map })
}
