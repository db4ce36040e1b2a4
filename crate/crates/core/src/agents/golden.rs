//! Scripts that play the agents' parts with ground-truth answers, for
//! offline end-to-end runs.

use crate::datagen::{encode_instance, Dataset, Sample};
use crate::llm::{Script, ScriptEntry};

use super::prompts::{slugify, ACTOR_MARKER, CRITIC_MARKER};

fn fenced(body: &str) -> String {
    format!("```prolog\n{}\n```", body.trim_end())
}

/// Translator answers for `samples` in the batches the pipeline will send,
/// each keyed on its first sample tag.
pub fn translator_entries<'s>(
    samples: impl IntoIterator<Item = &'s Sample>,
    head: &str,
    batch_size: usize,
) -> Script {
    let mut sorted: Vec<&Sample> = samples.into_iter().collect();
    sorted.sort_by(|a, b| a.id.cmp(&b.id));
    sorted
        .chunks(batch_size.max(1))
        .map(|batch| {
            let facts: String = batch
                .iter()
                .map(|s| encode_instance(&s.instance, head, None).render_background())
                .collect();
            ScriptEntry::on(format!("[{}]", slugify(&batch[0].id)), fenced(&facts))
        })
        .collect()
}

/// A script under which the Actor proposes the ground-truth bias, the
/// Critic accepts it, and the Translator returns ground-truth facts for
/// every train and test batch.
pub fn ground_truth_script(dataset: &Dataset, batch_size: usize) -> Script {
    let task = dataset.config.task;
    let rule = dataset.config.rule_num;
    let head = dataset.head_predicate();
    let mut script = vec![
        ScriptEntry::on(
            ACTOR_MARKER,
            fenced(&task.ground_truth_bias(rule).to_string()),
        ),
        ScriptEntry::on(CRITIC_MARKER, "VERDICT: satisfactory"),
    ];
    script.extend(translator_entries(dataset.train(), &head, batch_size));
    script.extend(translator_entries(dataset.test(), &head, batch_size));
    script
}
