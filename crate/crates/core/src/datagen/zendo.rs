//! The Zendo benchmark: worlds of 2-4 pieces on an 8x8 grid, labelled by
//! one of three fixed rule configurations.

use std::collections::BTreeSet;
use std::sync::OnceLock;

use rand::seq::SliceRandom;
use rand::Rng;
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::logic::{parse_bias, parse_program, Atom, BiasSpec, FactBase, FactIndex, Program};

pub const GRID: i32 = 8;
pub const COLORS: [&str; 3] = ["red", "blue", "green"];
pub const ORIENTATIONS: [&str; 4] = ["lhs", "rhs", "upright", "strange"];
pub const SIZES: [&str; 3] = ["small", "medium", "large"];

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Piece {
    pub pid: String,
    pub x: i32,
    pub y: i32,
    /// 1 = small, 2 = medium, 3 = large.
    pub size_num: u8,
    pub color: String,
    pub orientation: String,
}

impl Piece {
    pub fn size_name(&self) -> &'static str {
        SIZES[(self.size_num - 1) as usize]
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ZendoWorld {
    /// World number; piece ids are `p{id}_{index}`.
    pub id: usize,
    pub pieces: Vec<Piece>,
    /// Unordered pairs of piece indices, smaller index first.
    pub contacts: BTreeSet<(usize, usize)>,
}

/// Pairs of distinct pieces at Chebyshev distance at most 1.
pub fn contacts_of(pieces: &[Piece]) -> BTreeSet<(usize, usize)> {
    let mut out = BTreeSet::new();
    for i in 0..pieces.len() {
        for j in i + 1..pieces.len() {
            let (a, b) = (&pieces[i], &pieces[j]);
            if (a.x - b.x).abs().max((a.y - b.y).abs()) <= 1 {
                out.insert((i, j));
            }
        }
    }
    out
}

impl ZendoWorld {
    pub fn new(id: usize, pieces: Vec<Piece>) -> Self {
        let contacts = contacts_of(&pieces);
        ZendoWorld {
            id,
            pieces,
            contacts,
        }
    }

    pub(crate) fn random<R: Rng>(rng: &mut R, id: usize) -> Self {
        let n = rng.gen_range(2..=4);
        let mut cells: Vec<(i32, i32)> = Vec::with_capacity(n);
        while cells.len() < n {
            let c = (rng.gen_range(0..GRID), rng.gen_range(0..GRID));
            if !cells.contains(&c) {
                cells.push(c);
            }
        }
        let pieces = cells
            .into_iter()
            .enumerate()
            .map(|(i, (x, y))| Piece {
                pid: format!("p{id}_{i}"),
                x,
                y,
                size_num: rng.gen_range(1..=3),
                color: COLORS.choose(rng).expect("non-empty").to_string(),
                orientation: ORIENTATIONS.choose(rng).expect("non-empty").to_string(),
            })
            .collect();
        ZendoWorld::new(id, pieces)
    }

    /// Renumbers the world, rewriting piece ids.
    pub(crate) fn renumber(&mut self, id: usize) {
        self.id = id;
        for (i, p) in self.pieces.iter_mut().enumerate() {
            p.pid = format!("p{id}_{i}");
        }
    }

    pub fn world_const(&self) -> String {
        format!("world_{}", self.id)
    }
}

pub fn head(rule_num: usize) -> String {
    format!("zendo{rule_num}")
}

const RULES: [&[&str]; 3] = [
    &["zendo1(A) :- piece(A,C), size(C,B), blue(C), small(B), contact(C,D), red(D)."],
    &[
        "zendo2(A) :- piece(A,B), piece(A,C), piece(A,D), green(D), red(B), blue(C).",
        "zendo2(A) :- piece(A,B), coord1(B,C), green(D), lhs(B), coord1(D,C).",
    ],
    &[
        "zendo3(A) :- piece(A,D), blue(D), coord1(D,B), piece(A,C), coord1(C,B), red(C).",
        "zendo3(A) :- piece(A,D), contact(D,C), rhs(D), size(C,B), large(B).",
        "zendo3(A) :- piece(A,B), upright(B), contact(B,D), blue(D), size(D,C), large(C).",
    ],
];

/// The printed rule configuration `zendo{rule_num}`.
pub fn ground_truth_program(rule_num: usize) -> Program {
    parse_program(&RULES[rule_num - 1].join("\n")).expect("built-in rules parse")
}

pub fn ground_truth_bias_text(rule_num: usize) -> String {
    let h = head(rule_num);
    let mut s = format!("head_pred({h},1).\ntype({h},(world,)).\n");
    let binary = [
        ("piece", "world", "piece"),
        ("coord1", "piece", "coord"),
        ("coord2", "piece", "coord"),
        ("size", "piece", "size"),
        ("contact", "piece", "piece"),
    ];
    for (p, a, b) in binary {
        s.push_str(&format!(
            "body_pred({p},2).\ntype({p},({a},{b})).\ndirection({p},(in,out)).\n"
        ));
    }
    for p in COLORS.iter().chain(&ORIENTATIONS) {
        s.push_str(&format!(
            "body_pred({p},1).\ntype({p},(piece,)).\ndirection({p},(in,)).\n"
        ));
    }
    for p in SIZES {
        s.push_str(&format!(
            "body_pred({p},1).\ntype({p},(size,)).\ndirection({p},(in,)).\n"
        ));
    }
    s.push_str("max_vars(5).\nmax_body(6).\nmax_clauses(3).\n");
    s
}

pub fn ground_truth_bias(rule_num: usize) -> BiasSpec {
    parse_bias(&ground_truth_bias_text(rule_num)).expect("built-in bias is valid")
}

/// Background facts of one world plus, if given, its labelled example.
pub fn encode(w: &ZendoWorld, head_pred: &str, label: Option<bool>) -> FactBase {
    let mut fb = FactBase::new();
    let world = w.world_const();
    let mut add =
        |p: &str, args: &[&str]| fb.add_background(Atom::ground(p, args)).expect("ground");
    for p in &w.pieces {
        let (x, y, sz) = (p.x.to_string(), p.y.to_string(), p.size_num.to_string());
        add("piece", &[&world, &p.pid]);
        add("coord1", &[&p.pid, &x]);
        add("coord2", &[&p.pid, &y]);
        add("size", &[&p.pid, &sz]);
        add(p.size_name(), &[&sz]);
        add(&p.color, &[&p.pid]);
        add(&p.orientation, &[&p.pid]);
    }
    for &(i, j) in &w.contacts {
        let (a, b) = (&w.pieces[i].pid, &w.pieces[j].pid);
        add("contact", &[a, b]);
        add("contact", &[b, a]);
    }
    if let Some(l) = label {
        fb.add_example(Atom::ground(head_pred, &[&world]), l)
            .expect("single label");
    }
    fb
}

/// Label of a world under `zendo{rule_num}`, by evaluating the printed
/// clauses over that world's facts alone.
pub fn label_zendo(w: &ZendoWorld, rule_num: usize) -> bool {
    let h = head(rule_num);
    let prog = ground_truth_program(rule_num);
    let idx = FactIndex::from_facts(&encode(w, &h, None));
    let target = Atom::ground(h, &[&w.world_const()]);
    crate::logic::program_proves(&prog, &idx, &target)
}

pub const N_TEMPLATES: usize = 3;

fn render_piece(p: &Piece, template_id: usize) -> String {
    let (id, sz, c, o, x, y) = (&p.pid, p.size_name(), &p.color, &p.orientation, p.x, p.y);
    match template_id {
        0 => format!("piece {id} is a {sz} {c} piece at ({x},{y}) oriented {o}"),
        1 => format!("piece {id} is {o}-oriented, {sz} and {c}, located at ({x},{y})"),
        2 => format!("piece {id} is located at ({x},{y}), its color is {c}, its size is {sz} and its orientation is {o}"),
        _ => panic!("zendo template {template_id} does not exist"),
    }
}

pub fn render(w: &ZendoWorld, template_id: usize, label: bool) -> String {
    let pieces: Vec<String> = w
        .pieces
        .iter()
        .map(|p| render_piece(p, template_id))
        .collect();
    let mut text = format!("World {}: {}.", w.id, pieces.join("; "));
    for &(i, j) in &w.contacts {
        text.push_str(&format!(
            " piece {} contacts piece {}.",
            w.pieces[i].pid, w.pieces[j].pid
        ));
    }
    let verdict = if label { "is" } else { "is not" };
    text.push_str(&format!(" World {} {verdict} Zendo", w.id));
    text
}

fn piece_templates() -> &'static [Regex; N_TEMPLATES] {
    static RE: OnceLock<[Regex; N_TEMPLATES]> = OnceLock::new();
    RE.get_or_init(|| {
        let (c, o, s) = (COLORS.join("|"), ORIENTATIONS.join("|"), SIZES.join("|"));
        let id = r"(?P<id>p\d+_\d+)";
        let at = r"\((?P<x>\d+),(?P<y>\d+)\)";
        [
            format!(r"^piece {id} is a (?P<s>{s}) (?P<c>{c}) piece at {at} oriented (?P<o>{o})$"),
            format!(r"^piece {id} is (?P<o>{o})-oriented, (?P<s>{s}) and (?P<c>{c}), located at {at}$"),
            format!(
                r"^piece {id} is located at {at}, its color is (?P<c>{c}), its size is (?P<s>{s}) and its orientation is (?P<o>{o})$"
            ),
        ]
        .map(|r| Regex::new(&r).expect("template regex"))
    })
}

fn world_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"^World (?P<n>\d+): (?P<pieces>.*?)\.(?P<contacts>( piece p\d+_\d+ contacts piece p\d+_\d+\.)*) World (?P<m>\d+) (?P<v>is not|is) Zendo$")
            .expect("world regex")
    })
}

/// Inverse of [`render`]: the world, template and label of a rendered
/// description.
pub fn extract(text: &str) -> Option<(ZendoWorld, usize, bool)> {
    let cap = world_re().captures(text)?;
    let id: usize = cap["n"].parse().ok()?;
    if cap["m"] != cap["n"] {
        return None;
    }
    let mut template = None;
    let mut pieces = Vec::new();
    for part in cap["pieces"].split("; ") {
        let (t, pc) = piece_templates()
            .iter()
            .enumerate()
            .find_map(|(t, re)| re.captures(part).map(|c| (t, c)))?;
        if template.is_some_and(|prev| prev != t) {
            return None;
        }
        template = Some(t);
        pieces.push(Piece {
            pid: pc["id"].to_string(),
            x: pc["x"].parse().ok()?,
            y: pc["y"].parse().ok()?,
            size_num: SIZES.iter().position(|s| *s == &pc["s"])? as u8 + 1,
            color: pc["c"].to_string(),
            orientation: pc["o"].to_string(),
        });
    }
    let contact_re =
        Regex::new(r"piece (p\d+_\d+) contacts piece (p\d+_\d+)").expect("contact regex");
    let mut contacts = BTreeSet::new();
    for c in contact_re.captures_iter(&cap["contacts"]) {
        let i = pieces.iter().position(|p| p.pid == c[1])?;
        let j = pieces.iter().position(|p| p.pid == c[2])?;
        contacts.insert((i.min(j), i.max(j)));
    }
    let world = ZendoWorld {
        id,
        pieces,
        contacts,
    };
    Some((world, template?, &cap["v"] == "is"))
}
