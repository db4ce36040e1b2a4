//! Splitting translator output among the samples of a batch.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::logic::{Atom, BiasSpec, Direction, FactBase};

/// A sample as the agents see it: identifier, raw text, and the dataset
/// label when there is one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TextSample {
    pub id: String,
    pub text: String,
    pub label: Option<bool>,
}

/// Background atoms of the LLM output, attributed to the batch samples
/// whose constants they mention.
pub(crate) struct Attribution {
    pub per_sample: Vec<FactBase>,
    pub warnings: Vec<String>,
}

/// Constants that decide which sample an atom is about: its `in`
/// arguments, or all arguments if none is `in`.
fn key_positions(dirs: &[Direction]) -> Vec<usize> {
    let ins: Vec<usize> = (0..dirs.len())
        .filter(|&i| dirs[i] == Direction::In)
        .collect();
    if ins.is_empty() {
        (0..dirs.len()).collect()
    } else {
        ins
    }
}

/// Owner of a constant named after a sample: `world_3_p1` belongs to
/// `world_3`. The longest matching slug wins.
fn prefix_owner(c: &str, slugs: &[String]) -> Option<usize> {
    slugs
        .iter()
        .enumerate()
        .filter(|(_, s)| {
            c.len() > s.len() && c.starts_with(s.as_str()) && c.as_bytes()[s.len()] == b'_'
        })
        .max_by_key(|(_, s)| s.len())
        .map(|(i, _)| i)
}

/// Assigns each background atom to the samples owning all its key
/// constants. Sample slugs own themselves; `out` constants inherit the
/// owners of the atoms that introduce them, to a fixpoint. Atoms whose key
/// constants stay unowned are judged by their owned arguments instead.
pub(crate) fn attribute(facts: &FactBase, bias: &BiasSpec, slugs: &[String]) -> Attribution {
    let mut warnings = Vec::new();
    let mut atoms: Vec<(&Atom, Vec<usize>, Vec<usize>)> = Vec::new();
    let mut skipped = BTreeSet::new();
    for a in &facts.background {
        match bias
            .body
            .iter()
            .find(|s| s.name == a.predicate && s.arity() == a.arity())
        {
            Some(sig) => {
                let key = key_positions(&sig.directions);
                let outs = (0..a.arity()).filter(|i| !key.contains(i)).collect();
                atoms.push((a, key, outs));
            }
            None => {
                skipped.insert(format!("{}/{}", a.predicate, a.arity()));
            }
        }
    }
    if !skipped.is_empty() {
        warnings.push(format!(
            "ignored facts of undeclared predicates: {}",
            skipped.into_iter().collect::<Vec<_>>().join(", ")
        ));
    }
    if !facts.pos.is_empty() || !facts.neg.is_empty() {
        warnings.push("ignored example atoms in translator output".to_string());
    }

    let mut owners: HashMap<&str, BTreeSet<usize>> = HashMap::new();
    for (i, s) in slugs.iter().enumerate() {
        owners.entry(s.as_str()).or_default().insert(i);
    }
    for (a, _, _) in &atoms {
        for t in &a.args {
            if let Some(i) = prefix_owner(t.name(), slugs) {
                owners.entry(t.name()).or_default().insert(i);
            }
        }
    }
    let atom_owners = |owners: &HashMap<&str, BTreeSet<usize>>, a: &Atom, key: &[usize]| {
        let mut acc: Option<BTreeSet<usize>> = None;
        for &k in key {
            let o = owners.get(a.args[k].name())?;
            acc = Some(match acc {
                None => o.clone(),
                Some(prev) => prev.intersection(o).copied().collect(),
            });
        }
        acc
    };
    loop {
        let mut changed = false;
        for (a, key, outs) in &atoms {
            let Some(own) = atom_owners(&owners, a, key) else {
                continue;
            };
            for &o in outs {
                let entry = owners.entry(a.args[o].name()).or_default();
                let before = entry.len();
                entry.extend(own.iter().copied());
                changed |= entry.len() != before;
            }
        }
        if !changed {
            break;
        }
    }

    let mut per_sample = vec![FactBase::new(); slugs.len()];
    let mut orphans = Vec::new();
    for (a, key, _) in &atoms {
        let own = atom_owners(&owners, a, key).or_else(|| {
            // A key constant no sample introduced: fall back to the other
            // arguments that do have owners.
            let known: Vec<usize> = (0..a.arity())
                .filter(|&i| owners.contains_key(a.args[i].name()))
                .collect();
            if known.is_empty() {
                None
            } else {
                atom_owners(&owners, a, &known)
            }
        });
        match own {
            Some(own) if !own.is_empty() => {
                for i in own {
                    per_sample[i].background.insert((*a).clone());
                }
            }
            _ => orphans.push(a.to_string()),
        }
    }
    if !orphans.is_empty() {
        warnings.push(format!(
            "rejected {} fact(s) about unknown constants, e.g. {}",
            orphans.len(),
            orphans[0]
        ));
    }
    Attribution {
        per_sample,
        warnings,
    }
}

/// Per-sample fragments keyed by slug, with the dataset label attached as
/// an example of `head`.
pub(crate) fn with_labels(
    attribution: Attribution,
    samples: &[TextSample],
    slugs: &[String],
    head: &str,
) -> BTreeMap<String, FactBase> {
    let mut out = BTreeMap::new();
    for ((mut fb, s), slug) in attribution.per_sample.into_iter().zip(samples).zip(slugs) {
        if let Some(l) = s.label {
            fb.add_example(Atom::ground(head, &[slug]), l)
                .expect("fresh fact base");
        }
        out.insert(slug.clone(), fb);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::zendo;
    use crate::logic::{parse_bias, parse_facts};

    fn slugs(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn unary_facts_follow_their_constant() {
        let bias = crate::datagen::shoes::ground_truth_bias();
        let facts = parse_facts(
            "black(shoe_001). leather(shoe_001). red(shoe_002). red(shoe_999). bogus(shoe_001).",
            None,
        )
        .unwrap();
        let at = attribute(&facts, &bias, &slugs(&["shoe_001", "shoe_002"]));
        assert_eq!(at.per_sample[0].background.len(), 2);
        assert_eq!(at.per_sample[1].background.len(), 1);
        assert_eq!(at.warnings.len(), 2, "{:?}", at.warnings);
    }

    #[test]
    fn relational_facts_reach_through_out_arguments() {
        let bias = zendo::ground_truth_bias(1);
        let facts = parse_facts(
            "piece(world_1,a). piece(world_2,b). red(a). blue(b). coord1(a,3). coord1(b,3).\n\
             size(a,1). size(b,2). small(1). medium(2). green(zz).",
            None,
        )
        .unwrap();
        let at = attribute(&facts, &bias, &slugs(&["world_1", "world_2"]));
        let w1: Vec<String> = at.per_sample[0]
            .background
            .iter()
            .map(|a| a.to_string())
            .collect();
        assert_eq!(
            w1,
            vec![
                "coord1(a,3)",
                "piece(world_1,a)",
                "red(a)",
                "size(a,1)",
                "small(1)"
            ]
        );
        assert!(at.per_sample[1]
            .background
            .iter()
            .any(|a| a.to_string() == "medium(2)"));
        assert!(at.warnings.iter().any(|w| w.contains("green(zz)")));
    }

    #[test]
    fn prefixed_constants_belong_to_their_sample() {
        let bias = parse_bias(
            "head_pred(h,1). type(h,(w,)). body_pred(has,2). type(has,(w,p)). direction(has,(out,out)).\n\
             body_pred(red,1). type(red,(p,)). direction(red,(in,)).",
        )
        .unwrap();
        let facts =
            parse_facts("red(world_10_p1). red(world_1_p1). has(world_1,zz).", None).unwrap();
        let at = attribute(&facts, &bias, &slugs(&["world_1", "world_10"]));
        let render = |fb: &FactBase| {
            fb.background
                .iter()
                .map(|a| a.to_string())
                .collect::<Vec<_>>()
        };
        assert_eq!(
            render(&at.per_sample[0]),
            vec!["has(world_1,zz)", "red(world_1_p1)"]
        );
        assert_eq!(render(&at.per_sample[1]), vec!["red(world_10_p1)"]);
    }
}
