//! AUROC metrics and throughput measurement.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::features::PatchFeatureSet;
use crate::scoring::{AnomalyResult, Detector, ScorerConfig, Method};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabeledScore {
    pub score: f64,
    pub anomalous: bool,
}

impl LabeledScore {
    pub fn new(score: f64, anomalous: bool) -> Self {
        Self { score, anomalous }
    }
}

/// Rank-based (Mann-Whitney) AUROC. Tied positive/negative pairs count 1/2.
pub fn auroc(samples: &[LabeledScore]) -> Result<f64> {
    if let Some(s) = samples.iter().find(|s| !s.score.is_finite()) {
        return Err(Error::Data(format!("non-finite score {}", s.score)));
    }
    let pos = samples.iter().filter(|s| s.anomalous).count();
    let neg = samples.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::MetricUndefined(format!(
            "AUROC needs both classes, got {pos} anomalous and {neg} normal"
        )));
    }
    let mut order: Vec<usize> = (0..samples.len()).collect();
    order.sort_unstable_by(|&a, &b| samples[a].score.total_cmp(&samples[b].score));

    // sum of 1-based midranks of the positives
    let mut rank_sum = 0.0f64;
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && samples[order[j]].score == samples[order[i]].score {
            j += 1;
        }
        let midrank = (i + 1 + j) as f64 / 2.0;
        let tied_pos = order[i..j].iter().filter(|&&k| samples[k].anomalous).count();
        rank_sum += midrank * tied_pos as f64;
        i = j;
    }
    let (p, n) = (pos as f64, neg as f64);
    Ok((rank_sum - p * (p + 1.0) / 2.0) / (p * n))
}

/// Ground truth for one test image.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub anomalous: bool,
    /// Row-major defect mask matching the pixel map, when pixel AUROC is wanted.
    pub mask: Option<Vec<bool>>,
}

/// Image AUROC over image scores and, when `pixel` is set, pixel AUROC over
/// every pixel of every map pooled together.
pub fn evaluate_dataset(
    results: &[AnomalyResult],
    truth: &[GroundTruth],
    pixel: bool,
) -> Result<(f64, Option<f64>)> {
    if results.len() != truth.len() {
        return Err(Error::Input(format!(
            "{} results but {} ground-truth entries",
            results.len(),
            truth.len()
        )));
    }
    let image: Vec<LabeledScore> = results
        .iter()
        .zip(truth)
        .map(|(r, t)| LabeledScore::new(r.image_score, t.anomalous))
        .collect();
    let im = auroc(&image)?;
    if !pixel {
        return Ok((im, None));
    }
    let mut pooled = Vec::new();
    for (i, (r, t)) in results.iter().zip(truth).enumerate() {
        let map = r
            .pixel_map
            .as_ref()
            .ok_or_else(|| Error::Input(format!("image {i} has no pixel map")))?;
        let mask = t
            .mask
            .as_ref()
            .ok_or_else(|| Error::Input(format!("image {i} has no ground-truth mask")))?;
        if mask.len() != map.values().len() {
            return Err(Error::Input(format!(
                "image {i}: mask has {} pixels, map has {}",
                mask.len(),
                map.values().len()
            )));
        }
        pooled.extend(
            map.values()
                .iter()
                .zip(mask)
                .map(|(&s, &m)| LabeledScore::new(s, m)),
        );
    }
    Ok((im, Some(auroc(&pooled)?)))
}

/// One row of a throughput sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkRecord {
    pub method: Method,
    pub k: usize,
    pub alpha: f64,
    pub proportion: f64,
    pub im_auroc: Option<f64>,
    pub pi_auroc: Option<f64>,
    pub fps: f64,
    pub bank_size: usize,
}

impl BenchmarkRecord {
    pub const TSV_HEADER: &'static str =
        "method\tk\talpha\tproportion\tim_auroc\tpi_auroc\tfps\tbank_size";

    pub fn to_tsv(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_else(|| "-".into());
        format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{:.3}\t{}",
            self.method,
            self.k,
            self.alpha,
            self.proportion,
            opt(self.im_auroc),
            opt(self.pi_auroc),
            self.fps,
            self.bank_size
        )
    }
}

/// Runs `work` (which processes `images` images) `repetitions` times and
/// returns images per second from the median wall-clock time.
pub fn measure_fps<F: FnMut() -> Result<()>>(
    images: usize,
    repetitions: usize,
    mut work: F,
) -> Result<f64> {
    if repetitions < 3 {
        return Err(Error::Parameter(format!(
            "need at least 3 repetitions, got {repetitions}"
        )));
    }
    if images == 0 {
        return Err(Error::Input("no images to time".into()));
    }
    let mut secs = Vec::with_capacity(repetitions);
    for _ in 0..repetitions {
        let start = Instant::now();
        work()?;
        secs.push(start.elapsed().as_secs_f64());
    }
    secs.sort_by(f64::total_cmp);
    let median = secs[secs.len() / 2].max(1e-9);
    Ok(images as f64 / median)
}

/// Engine-only throughput of the full image scoring path (feature
/// extraction excluded).
pub fn benchmark_fps(
    detector: &Detector<'_>,
    queries: &[PatchFeatureSet],
    repetitions: usize,
    proportion: f64,
) -> Result<BenchmarkRecord> {
    if queries.is_empty() {
        return Err(Error::Input("no query images".into()));
    }
    let fps = measure_fps(queries.len(), repetitions, || {
        for q in queries {
            std::hint::black_box(detector.score_image(q)?);
        }
        Ok(())
    })?;
    let cfg: ScorerConfig = *detector.config();
    Ok(BenchmarkRecord {
        method: cfg.method,
        k: cfg.k,
        alpha: cfg.alpha,
        proportion,
        im_auroc: None,
        pi_auroc: None,
        fps,
        bank_size: detector.bank().len(),
    })
}
