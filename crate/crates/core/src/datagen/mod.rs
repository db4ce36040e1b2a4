//! Seeded generators for the SHOES and ZENDO benchmarks: rejection
//! sampling to exact class quotas, templated text, an 80/20 split and
//! exact-count label noise on the training split.

pub mod shoes;
pub mod zendo;

use std::fmt;
use std::fs;
use std::io;
use std::path::Path;
use std::str::FromStr;

use rand::seq::index::sample as sample_indices;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::logic::{BiasSpec, FactBase, Program};

pub use shoes::{label_shoes, ShoeSample};
pub use zendo::{contacts_of, label_zendo, Piece, ZendoWorld};

/// Consecutive rejections after which a quota is declared unreachable.
pub const MAX_REJECTIONS: usize = 100_000;

#[derive(Debug, Error)]
pub enum DatagenError {
    #[error("could not fill the {} quota: {rejections} consecutive rejections", if *.positive { "positive" } else { "negative" })]
    QuotaUnreachable { positive: bool, rejections: usize },
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Shoes,
    Zendo,
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Task::Shoes => "shoes",
            Task::Zendo => "zendo",
        })
    }
}

impl FromStr for Task {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "shoes" => Ok(Task::Shoes),
            "zendo" => Ok(Task::Zendo),
            other => Err(format!("unknown task `{other}` (expected shoes or zendo)")),
        }
    }
}

impl Task {
    pub fn head_predicate(&self, rule_num: usize) -> String {
        match self {
            Task::Shoes => shoes::HEAD.to_string(),
            Task::Zendo => zendo::head(rule_num),
        }
    }

    pub fn n_templates(&self) -> usize {
        match self {
            Task::Shoes => shoes::N_TEMPLATES,
            Task::Zendo => zendo::N_TEMPLATES,
        }
    }

    /// The rules that label generated samples.
    pub fn ground_truth_program(&self, rule_num: usize) -> Program {
        match self {
            Task::Shoes => shoes::ground_truth_program(rule_num),
            Task::Zendo => zendo::ground_truth_program(rule_num),
        }
    }

    /// A bias over the ground-truth encoding's predicates.
    pub fn ground_truth_bias(&self, rule_num: usize) -> BiasSpec {
        match self {
            Task::Shoes => shoes::ground_truth_bias(),
            Task::Zendo => zendo::ground_truth_bias(rule_num),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub task: Task,
    pub rule_num: usize,
    pub template_num: usize,
    pub sample_size: usize,
    pub positive_ratio: f64,
    pub noise_ratio: f64,
    pub seed: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            task: Task::Shoes,
            rule_num: 2,
            template_num: 2,
            sample_size: 100,
            positive_ratio: 0.5,
            noise_ratio: 0.1,
            seed: 1,
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<(), DatagenError> {
        let bad = |m: String| Err(DatagenError::InvalidConfig(m));
        if !(1..=3).contains(&self.rule_num) {
            return bad(format!("rule_num must be 1, 2 or 3, got {}", self.rule_num));
        }
        if !(1..=self.task.n_templates()).contains(&self.template_num) {
            return bad(format!(
                "template_num must be 1..={}, got {}",
                self.task.n_templates(),
                self.template_num
            ));
        }
        if self.sample_size == 0 {
            return bad("sample_size must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.positive_ratio) {
            return bad(format!(
                "positive_ratio must lie in [0,1], got {}",
                self.positive_ratio
            ));
        }
        if !(0.0..=1.0).contains(&self.noise_ratio) {
            return bad(format!(
                "noise_ratio must lie in [0,1], got {}",
                self.noise_ratio
            ));
        }
        Ok(())
    }

    pub fn n_positive(&self) -> usize {
        (self.positive_ratio * self.sample_size as f64).round() as usize
    }

    pub fn n_test(&self) -> usize {
        self.sample_size / 5
    }

    pub fn n_train(&self) -> usize {
        self.sample_size - self.n_test()
    }

    pub fn n_flips(&self) -> usize {
        (self.noise_ratio * self.n_train() as f64).round() as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Instance {
    Shoe(ShoeSample),
    World(ZendoWorld),
}

impl Instance {
    pub fn id(&self) -> String {
        match self {
            Instance::Shoe(s) => s.id.clone(),
            Instance::World(w) => w.world_const(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sample {
    pub id: String,
    pub instance: Instance,
    pub text: String,
    pub clean_label: bool,
    /// The label shown to learners; differs from `clean_label` iff
    /// `noise_flag`.
    pub label: bool,
    pub template_id: usize,
    pub noise_flag: bool,
    pub split: Split,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub config: GenConfig,
    pub samples: Vec<Sample>,
}

/// Renders an instance with the given template; the conclusion sentence
/// states `label`.
pub fn render_text(instance: &Instance, template_id: usize, label: bool) -> String {
    match instance {
        Instance::Shoe(s) => shoes::render(s, template_id, label),
        Instance::World(w) => zendo::render(w, template_id, label),
    }
}

/// Inverse of [`render_text`]: instance, template and stated label. Shoe
/// texts carry no id, so the returned shoe has an empty id.
pub fn extract_text(task: Task, text: &str) -> Option<(Instance, usize, bool)> {
    match task {
        Task::Shoes => shoes::extract(text).map(|(s, t, l)| (Instance::Shoe(s), t, l)),
        Task::Zendo => zendo::extract(text).map(|(w, t, l)| (Instance::World(w), t, l)),
    }
}

/// Ground-truth facts for one sample, labelled with the label it shows.
pub fn ground_truth_encode(sample: &Sample, task: Task, rule_num: usize) -> FactBase {
    encode_instance(
        &sample.instance,
        &task.head_predicate(rule_num),
        Some(sample.label),
    )
}

pub fn encode_instance(instance: &Instance, head: &str, label: Option<bool>) -> FactBase {
    match instance {
        Instance::Shoe(s) => shoes::encode(s, label),
        Instance::World(w) => zendo::encode(w, head, label),
    }
}

fn label_of(instance: &Instance, rule_num: usize) -> bool {
    match instance {
        Instance::Shoe(s) => label_shoes(s, rule_num),
        Instance::World(w) => label_zendo(w, rule_num),
    }
}

/// Draws until `n_neg` negatives and `n_pos` positives are accepted, in
/// draw order. `draw` receives the 1-based number the next accepted item
/// would get.
fn fill_quotas<T>(
    n_neg: usize,
    n_pos: usize,
    mut draw: impl FnMut(usize) -> T,
    label: impl Fn(&T) -> bool,
) -> Result<Vec<(T, bool)>, DatagenError> {
    let mut want = [n_neg, n_pos];
    let mut accepted = Vec::with_capacity(n_neg + n_pos);
    let mut rejections = 0;
    while want[0] + want[1] > 0 {
        let item = draw(accepted.len() + 1);
        let l = label(&item);
        if want[l as usize] == 0 {
            rejections += 1;
            if rejections >= MAX_REJECTIONS {
                return Err(DatagenError::QuotaUnreachable {
                    positive: want[1] > 0,
                    rejections,
                });
            }
            continue;
        }
        rejections = 0;
        want[l as usize] -= 1;
        accepted.push((item, l));
    }
    Ok(accepted)
}

pub fn generate(config: &GenConfig) -> Result<Dataset, DatagenError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n = config.sample_size;
    let accepted = fill_quotas(
        n - config.n_positive(),
        config.n_positive(),
        |id| match config.task {
            Task::Shoes => Instance::Shoe(ShoeSample::random(&mut rng)),
            Task::Zendo => Instance::World(ZendoWorld::random(&mut rng, id)),
        },
        |inst| label_of(inst, config.rule_num),
    )?;
    let accepted: Vec<(Instance, bool)> = accepted
        .into_iter()
        .enumerate()
        .map(|(i, (instance, label))| {
            let id = i + 1;
            let instance = match instance {
                Instance::Shoe(mut s) => {
                    s.id = format!("shoe_{id:03}");
                    Instance::Shoe(s)
                }
                Instance::World(mut w) => {
                    w.renumber(id);
                    Instance::World(w)
                }
            };
            (instance, label)
        })
        .collect();

    let templates: Vec<usize> = (0..n)
        .map(|_| rng.gen_range(0..config.template_num))
        .collect();
    let mut split = vec![Split::Train; n];
    for i in sample_indices(&mut rng, n, config.n_test()) {
        split[i] = Split::Test;
    }
    let train: Vec<usize> = (0..n).filter(|&i| split[i] == Split::Train).collect();
    let mut flipped = vec![false; n];
    for k in sample_indices(&mut rng, train.len(), config.n_flips()) {
        flipped[train[k]] = true;
    }

    let samples = accepted
        .into_iter()
        .enumerate()
        .map(|(i, (instance, clean))| {
            let label = clean ^ flipped[i];
            Sample {
                id: instance.id(),
                text: render_text(&instance, templates[i], label),
                instance,
                clean_label: clean,
                label,
                template_id: templates[i],
                noise_flag: flipped[i],
                split: split[i],
            }
        })
        .collect();
    Ok(Dataset {
        config: config.clone(),
        samples,
    })
}

#[derive(Serialize)]
struct Record<'a> {
    id: &'a str,
    text: &'a str,
    label: bool,
    clean_label: bool,
    split: Split,
    template_id: usize,
    noise_flag: bool,
    meta: &'a Instance,
}

impl Dataset {
    pub fn train(&self) -> impl Iterator<Item = &Sample> {
        self.samples.iter().filter(|s| s.split == Split::Train)
    }

    pub fn test(&self) -> impl Iterator<Item = &Sample> {
        self.samples.iter().filter(|s| s.split == Split::Test)
    }

    pub fn head_predicate(&self) -> String {
        self.config.task.head_predicate(self.config.rule_num)
    }

    /// Ground-truth facts of the given samples.
    pub fn encode<'a>(&self, samples: impl IntoIterator<Item = &'a Sample>) -> FactBase {
        let mut fb = FactBase::new();
        for s in samples {
            fb.merge(&ground_truth_encode(
                s,
                self.config.task,
                self.config.rule_num,
            ))
            .expect("sample ids are unique");
        }
        fb
    }

    /// One JSON object per line.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for s in &self.samples {
            let rec = Record {
                id: &s.id,
                text: &s.text,
                label: s.label,
                clean_label: s.clean_label,
                split: s.split,
                template_id: s.template_id,
                noise_flag: s.noise_flag,
                meta: &s.instance,
            };
            out.push_str(&serde_json::to_string(&rec).expect("serializable"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(config: GenConfig, text: &str) -> Result<Dataset, DatagenError> {
        #[derive(Deserialize)]
        struct Owned {
            id: String,
            text: String,
            label: bool,
            clean_label: bool,
            split: Split,
            template_id: usize,
            noise_flag: bool,
            meta: Instance,
        }
        let mut samples = Vec::new();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let r: Owned = serde_json::from_str(line)?;
            samples.push(Sample {
                id: r.id,
                instance: r.meta,
                text: r.text,
                clean_label: r.clean_label,
                label: r.label,
                template_id: r.template_id,
                noise_flag: r.noise_flag,
                split: r.split,
            });
        }
        Ok(Dataset { config, samples })
    }

    /// Writes `dataset.jsonl`, `config.json`, and the ground-truth
    /// `bias.pl`, `bk.pl` and `exs.pl` of the training split into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<(), DatagenError> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("dataset.jsonl"), self.to_jsonl())?;
        fs::write(
            dir.join("config.json"),
            serde_json::to_string_pretty(&self.config)?,
        )?;
        let bias = self.config.task.ground_truth_bias(self.config.rule_num);
        fs::write(dir.join("bias.pl"), bias.to_string())?;
        let train = self.encode(self.train());
        fs::write(dir.join("bk.pl"), train.render_background())?;
        fs::write(dir.join("exs.pl"), train.render_examples())?;
        Ok(())
    }

    pub fn read_from(dir: &Path) -> Result<Dataset, DatagenError> {
        let config: GenConfig =
            serde_json::from_str(&fs::read_to_string(dir.join("config.json"))?)?;
        Dataset::from_jsonl(config, &fs::read_to_string(dir.join("dataset.jsonl"))?)
    }
}
