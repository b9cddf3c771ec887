use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use reb_core::bank::{load_bank_any_file, save_bank_file, save_memory_bank_file};
use reb_core::coreset::{self, greedy_kcenter};
use reb_core::defectmaker::{make_sample, sample_rng, DefectConfig, Mask};
use reb_core::eval::benchmark_fps;
use reb_core::features::DEFAULT_POOL_WINDOW;
use reb_core::manifest::{read_manifest_file, resolve, write_manifest_file, SampleManifestRow};
use reb_core::tensor_io::{read_raw_file, write_raw_file};
use reb_core::{
    auroc, build_memory_bank, evaluate_dataset, learn_local_density, AnomalyResult, BenchmarkRecord,
    Detector, GroundTruth, LabeledScore, LocalDensityBank, MemoryBank, Method, PatchFeatureSet,
    ScoreMap, ScorerConfig,
};

use crate::files::{self, load_patches, select_stems};
use crate::settings::{parse_size, usage, Failure, Settings};
use crate::{BankBuildArgs, BankDensityArgs, BenchArgs, CoresetArgs, EvalArgs, ScoreArgs, SynthArgs};

type CmdResult = Result<(), Failure>;

const SYNTH_KEYS: &[&str] = &["input_dir", "saliency_dir", "out_dir", "count", "self_donor"];

pub fn synth(s: &Settings, a: SynthArgs) -> CmdResult {
    let input = s.input(a.input_dir, "input-dir")?;
    let saliency_dir = s.optional_input(a.saliency_dir, "saliency-dir")?;
    let out = s.required(a.out_dir, "out-dir")?;
    let count: usize = s.required(a.count, "count")?;
    let self_donor = a.self_donor || s.or(None, "self-donor", false)?;
    let mut kv = s.key_values().clone();
    kv.retain(|k| !SYNTH_KEYS.contains(&k));
    let mut cfg = DefectConfig::from_key_values(&kv).map_err(|e| usage(format!("--config: {e}")))?;
    if let Some(seed) = s.seed()? {
        cfg.seed = seed;
    }

    let paths = files::list_pngs(&input)?;
    if paths.is_empty() {
        return Err(anyhow!("no PNG images in {}", input.display()).into());
    }
    let mut sources = Vec::with_capacity(paths.len());
    for p in &paths {
        let img = files::load_png(p)?;
        let sal = match &saliency_dir {
            Some(dir) => {
                let mp = dir.join(p.file_name().expect("listed files have names"));
                if mp.exists() {
                    let m = files::load_mask(&mp)?;
                    if (m.height(), m.width()) != (img.height(), img.width()) {
                        return Err(anyhow!(
                            "saliency {} is {}x{}, image is {}x{}",
                            mp.display(),
                            m.height(),
                            m.width(),
                            img.height(),
                            img.width()
                        )
                        .into());
                    }
                    Some(m)
                } else {
                    None
                }
            }
            None => None,
        };
        sources.push((img, sal));
    }

    fs::create_dir_all(out.join("images")).with_context(|| format!("creating {}", out.display()))?;
    fs::create_dir_all(out.join("masks")).with_context(|| format!("creating {}", out.display()))?;
    let n = sources.len();
    let mut rows = Vec::with_capacity(count);
    for i in 0..count {
        let (img, sal) = &sources[i % n];
        let donor = (!self_donor && n > 1).then(|| &sources[(i + 1) % n].0);
        let mut rng = sample_rng(cfg.seed, i as u64);
        let sample = make_sample(img, sal.as_ref(), donor, &cfg, &mut rng)
            .with_context(|| format!("sample {i} from {}", paths[i % n].display()))?;
        let name = format!("synth_{i:05}.png");
        files::save_png(&out.join("images").join(&name), &sample.image)?;
        let mask = if sample.label == 0 {
            None
        } else {
            files::save_mask(&out.join("masks").join(&name), &sample.mask)?;
            Some(format!("masks/{name}"))
        };
        rows.push(SampleManifestRow::new(format!("images/{name}"), sample.label, mask));
    }
    let manifest = out.join("synth.rebm");
    write_manifest_file(&rows, &manifest)?;
    println!("{}", manifest.display());
    Ok(())
}

fn pool_window(s: &Settings, flag: Option<usize>) -> Result<usize, Failure> {
    let w = s.or(flag, "pool-window", DEFAULT_POOL_WINDOW)?;
    if w == 0 || w % 2 == 0 {
        return Err(usage(format!("--pool-window must be odd and positive, got {w}")));
    }
    Ok(w)
}

fn read_rows(path: Option<&Path>) -> Result<Option<Vec<SampleManifestRow>>, Failure> {
    Ok(path.map(read_manifest_file).transpose()?)
}

fn load_sets(dir: &Path, stems: &[String], window: usize) -> Result<Vec<PatchFeatureSet>, Failure> {
    Ok(stems
        .iter()
        .map(|st| load_patches(dir, st, window))
        .collect::<anyhow::Result<Vec<_>>>()?)
}

pub fn bank_build(s: &Settings, a: BankBuildArgs) -> CmdResult {
    let dir = s.input(a.features_dir, "features-dir")?;
    let manifest = s.optional_input(a.manifest, "manifest")?;
    let window = pool_window(s, a.pool_window)?;
    let out: PathBuf = s.required(a.out, "out")?;
    let rows = read_rows(manifest.as_deref())?
        .map(|rows| rows.into_iter().filter(|r| r.label == 0).collect::<Vec<_>>());
    let stems = select_stems(&dir, rows.as_deref())?;
    let sets = load_sets(&dir, &stems, window)?;
    let bank = build_memory_bank(&sets)?;
    save_memory_bank_file(&bank, &out)?;
    println!("{} entries of dim {} from {} images", bank.len(), bank.dim(), sets.len());
    Ok(())
}

fn positive_k(s: &Settings, flag: Option<usize>, default: Option<usize>) -> Result<usize, Failure> {
    let k = match default {
        Some(d) => s.or(flag, "k", d)?,
        None => s.required(flag, "k")?,
    };
    if k == 0 {
        return Err(usage("--k must be at least 1"));
    }
    Ok(k)
}

pub fn bank_density(s: &Settings, a: BankDensityArgs) -> CmdResult {
    let input = s.input(a.bank, "bank")?;
    let k = positive_k(s, a.k, None)?;
    let out: PathBuf = s.required(a.out, "out")?;
    let (bank, _) = load_bank_any_file(&input)?;
    let ld = learn_local_density(&bank, k)?;
    save_bank_file(&ld, &out)?;
    println!("densities for {} entries with K = {k}", ld.len());
    Ok(())
}

pub fn coreset(s: &Settings, a: CoresetArgs) -> CmdResult {
    let input = s.input(a.bank, "bank")?;
    let p: f64 = s.required(a.proportion, "proportion")?;
    if !(p > 0.0 && p <= 1.0) {
        return Err(usage(format!("--proportion must lie in (0, 1], got {p}")));
    }
    let seed_index = s.or(a.seed_index, "seed-index", 0)?;
    let out: PathBuf = s.required(a.out, "out")?;
    let indices_out: Option<PathBuf> = s.get(a.indices_out, "indices-out")?;
    let (bank, _) = load_bank_any_file(&input)?;
    let sel = greedy_kcenter(&bank, p, seed_index)?;
    let sub = coreset::apply(&bank, &sel)?;
    save_memory_bank_file(&sub, &out)?;
    if let Some(path) = indices_out {
        let text: String = sel.indices.iter().map(|i| format!("{i}\n")).collect();
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    println!("kept {} of {} entries", sub.len(), bank.len());
    Ok(())
}

fn scorer_config(
    s: &Settings,
    method: Option<String>,
    k: Option<usize>,
    alpha: Option<f64>,
) -> Result<ScorerConfig, Failure> {
    let d = ScorerConfig::default();
    let method: Method = match s.get(method, "method")? {
        None => d.method,
        Some(m) => m.parse().map_err(|_| {
            usage(format!("--method: unknown method {m:?} (ldknn, knn, kth-nn, lof, ldof)"))
        })?,
    };
    let k = positive_k(s, k, Some(d.k))?;
    let alpha = s.or(alpha, "alpha", d.alpha)?;
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(usage(format!("--alpha must be non-negative, got {alpha}")));
    }
    Ok(ScorerConfig { method, k, alpha })
}

pub fn score(s: &Settings, a: ScoreArgs) -> CmdResult {
    let bank_path = s.input(a.bank, "bank")?;
    let dir = s.input(a.features_dir, "features-dir")?;
    let manifest = s.optional_input(a.manifest, "manifest")?;
    let cfg = scorer_config(s, a.method, a.k, a.alpha)?;
    let window = pool_window(s, a.pool_window)?;
    let out: Option<PathBuf> = s.get(a.out, "out")?;
    let maps_dir: Option<PathBuf> = s.get(a.maps_dir, "maps-dir")?;
    let map_size = parse_size(&s.or(a.map_size, "map-size", "256".to_string())?)?;
    let sigma = s.or(a.sigma, "sigma", 0.0)?;
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(usage(format!("--sigma must be non-negative, got {sigma}")));
    }

    let (bank, densities) = load_bank_any_file(&bank_path)?;
    let ld: LocalDensityBank;
    let detector = if cfg.method == Method::Ldknn {
        let (d, k_used) = densities.ok_or_else(|| {
            anyhow!("{} has no local densities; run `reb bank density` first", bank_path.display())
        })?;
        ld = LocalDensityBank::new(bank, d, k_used)?;
        Detector::new(&ld, cfg)?
    } else {
        Detector::for_memory_bank(&bank, cfg)?
    };

    let rows = read_rows(manifest.as_deref())?;
    let stems = select_stems(&dir, rows.as_deref())?;
    if let Some(md) = &maps_dir {
        fs::create_dir_all(md).with_context(|| format!("creating {}", md.display()))?;
    }
    let mut scores = Vec::with_capacity(stems.len());
    for stem in &stems {
        let patches = load_patches(&dir, stem, window)?;
        let mut result = detector.score_image(&patches)?;
        if let Some(md) = &maps_dir {
            result = result.with_pixel_map(map_size.0, map_size.1, sigma)?;
            let map = result.pixel_map.as_ref().expect("map just attached");
            write_raw_file(&map.to_raw()?, md.join(format!("{stem}.map.rebf")))?;
        }
        scores.push((stem.clone(), result.image_score));
    }
    match out {
        Some(p) => files::write_scores(&p, &scores)?,
        None => {
            println!("{}", files::SCORE_HEADER);
            for (id, v) in &scores {
                println!("{id}\t{v}");
            }
        }
    }
    Ok(())
}

pub fn eval(s: &Settings, a: EvalArgs) -> CmdResult {
    let scores_path = s.input(a.scores, "scores")?;
    let manifest = s.input(a.manifest, "manifest")?;
    let maps_dir = s.optional_input(a.maps_dir, "maps-dir")?;
    let out: Option<PathBuf> = s.get(a.out, "out")?;

    let scores = files::read_scores(&scores_path)?;
    let rows = read_manifest_file(&manifest)?;
    let base = manifest.parent().unwrap_or(Path::new("."));
    let by_id: HashMap<String, &SampleManifestRow> = rows.iter().map(|r| (r.image_id(), r)).collect();

    let mut results = Vec::with_capacity(scores.len());
    let mut truth = Vec::with_capacity(scores.len());
    for (id, score) in &scores {
        let row = by_id
            .get(id)
            .ok_or_else(|| anyhow!("image {id} is not in {}", manifest.display()))?;
        let anomalous = row.label != 0;
        let grid = ScoreMap::new(1, 1, vec![*score])?;
        let mut result = AnomalyResult::from_grid(grid);
        let mut mask = None;
        if let Some(md) = &maps_dir {
            let map = ScoreMap::from_raw(read_raw_file(md.join(format!("{id}.map.rebf")))?)?;
            let m = match &row.mask {
                Some(p) => files::load_mask(&resolve(base, p))?,
                None if !anomalous => Mask::empty(map.height(), map.width()),
                None => return Err(anyhow!("anomalous image {id} has no mask").into()),
            };
            if (m.height(), m.width()) != (map.height(), map.width()) {
                return Err(anyhow!(
                    "image {id}: mask is {}x{}, map is {}x{}",
                    m.height(),
                    m.width(),
                    map.height(),
                    map.width()
                )
                .into());
            }
            mask = Some(m.data().to_vec());
            result.pixel_map = Some(map);
        }
        results.push(result);
        truth.push(GroundTruth { anomalous, mask });
    }
    let (im, pi) = evaluate_dataset(&results, &truth, maps_dir.is_some())?;
    let mut report = format!("images\t{}\nim_auroc\t{im}\n", results.len());
    if let Some(pi) = pi {
        report.push_str(&format!("pi_auroc\t{pi}\n"));
    }
    print!("{report}");
    if let Some(p) = out {
        fs::write(&p, &report).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}

pub fn bench(s: &Settings, a: BenchArgs) -> CmdResult {
    let bank_path = s.input(a.bank, "bank")?;
    let dir = s.input(a.features_dir, "features-dir")?;
    let manifest = s.optional_input(a.manifest, "manifest")?;
    let cfg = scorer_config(s, a.method, a.k, a.alpha)?;
    let proportions = s.list(a.proportions, "proportions")?.unwrap_or_else(|| vec![1.0, 0.1, 0.01]);
    if let Some(p) = proportions.iter().find(|&&p| !(p > 0.0 && p <= 1.0)) {
        return Err(usage(format!("--proportions: {p} is outside (0, 1]")));
    }
    let reps = s.or(a.repetitions, "repetitions", 5)?;
    if reps < 3 {
        return Err(usage(format!("--repetitions must be at least 3, got {reps}")));
    }
    let seed_index = s.or(a.seed_index, "seed-index", 0)?;
    let window = pool_window(s, a.pool_window)?;
    let out: Option<PathBuf> = s.get(a.out, "out")?;

    let (bank, _) = load_bank_any_file(&bank_path)?;
    let rows = read_rows(manifest.as_deref())?;
    let stems = select_stems(&dir, rows.as_deref())?;
    let queries = load_sets(&dir, &stems, window)?;
    let labels: Option<Vec<bool>> = rows
        .map(|r| r.iter().map(|r| r.label != 0).collect::<Vec<_>>())
        .filter(|l| l.contains(&true) && l.contains(&false));

    let mut report = String::from(BenchmarkRecord::TSV_HEADER);
    report.push('\n');
    for &p in &proportions {
        let sel = greedy_kcenter(&bank, p, seed_index)?;
        let sub: MemoryBank = coreset::apply(&bank, &sel)?;
        let ld: LocalDensityBank;
        let detector = if cfg.method == Method::Ldknn {
            ld = learn_local_density(&sub, cfg.k)?;
            Detector::new(&ld, cfg)?
        } else {
            Detector::for_memory_bank(&sub, cfg)?
        };
        let mut rec = benchmark_fps(&detector, &queries, reps, p)?;
        if let Some(labels) = &labels {
            let scored = queries
                .iter()
                .zip(labels)
                .map(|(q, &l)| Ok(LabeledScore::new(detector.score_image(q)?.image_score, l)))
                .collect::<reb_core::Result<Vec<_>>>()?;
            rec.im_auroc = Some(auroc(&scored)?);
        }
        report.push_str(&rec.to_tsv());
        report.push('\n');
    }
    print!("{report}");
    if let Some(p) = out {
        fs::write(&p, &report).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}
