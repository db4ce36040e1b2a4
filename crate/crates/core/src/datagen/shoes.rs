//! The business-shoes benchmark: five categorical attributes, up to three
//! labelling rules, three sentence templates.

use std::sync::OnceLock;

use rand::seq::SliceRandom;
use rand::Rng;
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::logic::{parse_bias, parse_program, Atom, BiasSpec, FactBase, Program};

pub const COLORS: [&str; 5] = ["red", "blue", "black", "white", "gray"];
pub const MATERIALS: [&str; 4] = ["leather", "canvas", "mesh", "synthetic_leather"];
pub const STYLES: [&str; 4] = [
    "sneakers",
    "casual_shoes",
    "formal_shoes",
    "skateboard_shoes",
];
pub const PRICES: [&str; 3] = ["cheap", "moderate", "expensive"];
pub const COMFORTS: [&str; 3] = [
    "very_comfortable",
    "fairly_comfortable",
    "moderately_comfortable",
];

pub const HEAD: &str = "suitable_for_business";

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ShoeSample {
    pub id: String,
    pub color: String,
    pub material: String,
    pub style: String,
    pub price: String,
    pub comfort: String,
}

impl ShoeSample {
    pub fn new(
        id: impl Into<String>,
        color: &str,
        material: &str,
        style: &str,
        price: &str,
        comfort: &str,
    ) -> Self {
        ShoeSample {
            id: id.into(),
            color: color.to_string(),
            material: material.to_string(),
            style: style.to_string(),
            price: price.to_string(),
            comfort: comfort.to_string(),
        }
    }

    pub(crate) fn random<R: Rng>(rng: &mut R) -> Self {
        let mut pick = |vals: &[&str]| vals.choose(rng).expect("non-empty").to_string();
        ShoeSample {
            id: String::new(),
            color: pick(&COLORS),
            material: pick(&MATERIALS),
            style: pick(&STYLES),
            price: pick(&PRICES),
            comfort: pick(&COMFORTS),
        }
    }

    fn attributes(&self) -> [&str; 5] {
        [
            &self.color,
            &self.material,
            &self.style,
            &self.price,
            &self.comfort,
        ]
    }

    /// Every combination of attribute values, with empty ids.
    pub fn all() -> Vec<ShoeSample> {
        let mut out = Vec::with_capacity(720);
        for c in COLORS {
            for m in MATERIALS {
                for s in STYLES {
                    for p in PRICES {
                        for k in COMFORTS {
                            out.push(ShoeSample::new("", c, m, s, p, k));
                        }
                    }
                }
            }
        }
        out
    }
}

/// Whether the shoe satisfies any of the first `rule_num` rules.
pub fn label_shoes(s: &ShoeSample, rule_num: usize) -> bool {
    let formal_business = s.material == "leather"
        && s.color == "black"
        && s.style == "formal_shoes"
        && s.price == "expensive";
    let business_casual = s.material == "synthetic_leather"
        && s.style == "casual_shoes"
        && s.comfort == "very_comfortable";
    let modern_formal = s.material == "leather"
        && s.style == "formal_shoes"
        && (s.color == "white" || s.color == "blue")
        && s.price == "moderate"
        && s.comfort == "very_comfortable";
    [formal_business, business_casual, modern_formal]
        .iter()
        .take(rule_num)
        .any(|r| *r)
}

const RULES: [&[&str]; 3] = [
    &["suitable_for_business(A):- black(A),expensive(A),formal_shoes(A),leather(A)."],
    &["suitable_for_business(A):- casual_shoes(A),synthetic_leather(A),very_comfortable(A)."],
    &[
        "suitable_for_business(A):- formal_shoes(A),leather(A),moderate(A),very_comfortable(A),white(A).",
        "suitable_for_business(A):- blue(A),formal_shoes(A),leather(A),moderate(A),very_comfortable(A).",
    ],
];

/// The generating rules as a program.
pub fn ground_truth_program(rule_num: usize) -> Program {
    let text: Vec<&str> = RULES
        .iter()
        .take(rule_num)
        .flat_map(|r| r.iter().copied())
        .collect();
    parse_program(&text.join("\n")).expect("built-in rules parse")
}

/// Bias with one unary predicate per attribute value.
pub fn ground_truth_bias() -> BiasSpec {
    parse_bias(&ground_truth_bias_text()).expect("built-in bias is valid")
}

pub fn ground_truth_bias_text() -> String {
    let mut s = format!("head_pred({HEAD},1).\ntype({HEAD},(shoes,)).\n");
    for v in COLORS
        .iter()
        .chain(&MATERIALS)
        .chain(&STYLES)
        .chain(&PRICES)
        .chain(&COMFORTS)
    {
        s.push_str(&format!(
            "body_pred({v},1).\ntype({v},(shoes,)).\ndirection({v},(in,)).\n"
        ));
    }
    s.push_str("max_vars(1).\nmax_body(5).\nmax_clauses(4).\n");
    s
}

/// One unary fact per attribute plus the labelled example.
pub fn encode(s: &ShoeSample, label: Option<bool>) -> FactBase {
    let mut fb = FactBase::new();
    for a in s.attributes() {
        fb.add_background(Atom::ground(a, &[&s.id]))
            .expect("ground");
    }
    if let Some(l) = label {
        fb.add_example(Atom::ground(HEAD, &[&s.id]), l)
            .expect("single label");
    }
    fb
}

fn spaced(v: &str) -> String {
    v.replace('_', " ")
}

fn conclusion(label: bool) -> &'static str {
    if label {
        "suitable for business"
    } else {
        "not suitable for business"
    }
}

pub const N_TEMPLATES: usize = 3;

pub fn render(s: &ShoeSample, template_id: usize, label: bool) -> String {
    let (c, m, st, p, k) = (
        spaced(&s.color),
        spaced(&s.material),
        spaced(&s.style),
        spaced(&s.price),
        spaced(&s.comfort),
    );
    let concl = conclusion(label);
    match template_id {
        0 => format!("This is a {c} {st} made of {m}, {p} in price and {k} to wear. This shoe is {concl}."),
        1 => format!(
            "This {st} is made of {m}, comes in {c}, positioned at a {p} price point, and is {k}. It is {concl}."
        ),
        2 => format!("A {c} {m} {st}, priced {p}, and {k} when worn. The shoe is {concl}."),
        _ => panic!("shoe template {template_id} does not exist"),
    }
}

fn templates() -> &'static [Regex; N_TEMPLATES] {
    static RE: OnceLock<[Regex; N_TEMPLATES]> = OnceLock::new();
    RE.get_or_init(|| {
        let alt = |vals: &[&str]| vals.iter().map(|v| spaced(v)).collect::<Vec<_>>().join("|");
        let (c, m, s, p, k) = (alt(&COLORS), alt(&MATERIALS), alt(&STYLES), alt(&PRICES), alt(&COMFORTS));
        let concl = "(?P<concl>not suitable for business|suitable for business)";
        [
            format!(
                r"^This is a (?P<c>{c}) (?P<s>{s}) made of (?P<m>{m}), (?P<p>{p}) in price and (?P<k>{k}) to wear\. This shoe is {concl}\.$"
            ),
            format!(
                r"^This (?P<s>{s}) is made of (?P<m>{m}), comes in (?P<c>{c}), positioned at a (?P<p>{p}) price point, and is (?P<k>{k})\. It is {concl}\.$"
            ),
            format!(
                r"^A (?P<c>{c}) (?P<m>{m}) (?P<s>{s}), priced (?P<p>{p}), and (?P<k>{k}) when worn\. The shoe is {concl}\.$"
            ),
        ]
        .map(|r| Regex::new(&r).expect("template regex"))
    })
}

/// Inverse of [`render`]: the attributes, template and label of a rendered
/// shoe description. The id is left empty.
pub fn extract(text: &str) -> Option<(ShoeSample, usize, bool)> {
    for (t, re) in templates().iter().enumerate() {
        if let Some(cap) = re.captures(text) {
            let g = |n: &str| cap[n].replace(' ', "_");
            let s = ShoeSample {
                id: String::new(),
                color: g("c"),
                material: g("m"),
                style: g("s"),
                price: g("p"),
                comfort: g("k"),
            };
            return Some((s, t, &cap["concl"] == "suitable for business"));
        }
    }
    None
}
