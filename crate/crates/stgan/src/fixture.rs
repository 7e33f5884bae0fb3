//! Built-in data generators so the whole pipeline runs with zero downloads:
//! a seeded probabilistic phrase-grammar corpus and the 8-Gaussian ring used
//! to study mode collapse.
//!
//! The grammar writes short "market episode" documents. Each episode
//! introduces objects in chains whose follow-up sentences are fixed functions
//! of the object, so most short sentences are exactly predictable from their
//! predecessor — which is what makes reconstruction quality measurable on a
//! corpus this small. Sentence lengths run 4..=12 tokens.

use crate::rng::Rng;

const CHARACTERS: &[&str] = &[
    "trader", "baker", "sailor", "farmer", "hunter", "weaver", "scribe", "smith", "piper",
    "tailor", "shepherd", "brewer", "mason", "potter", "fisher", "carter", "cooper", "glazier",
    "joiner", "tanner",
];

const PLACES: &[&str] = &[
    "harbor", "village", "castle", "garden", "market", "forest", "temple", "bridge", "tavern",
    "meadow", "tower", "mill", "orchard", "quarry", "chapel", "stable", "archive", "foundry",
    "granary", "lighthouse",
];

const WEATHER: &[&str] = &[
    "foggy", "rainy", "windy", "sunny", "frosty", "cloudy", "stormy", "misty", "chilly", "humid",
    "snowy", "breezy",
];

const BUYERS: &[&str] = &[
    "merchant", "captain", "duchess", "mayor", "abbot", "widow", "knight", "judge", "bishop",
    "countess", "general", "doctor", "baron", "envoy", "prefect", "warden", "curator", "admiral",
    "consul", "magistrate",
];

const OBJECTS_GOODS: &[&str] = &[
    "lantern", "basket", "ribbon", "kettle", "ladder", "mirror", "candle", "barrel", "blanket",
    "hammer", "needle", "saddle", "teapot", "whistle", "bucket", "carpet",
];

const OBJECTS_ANIMALS: &[&str] = &[
    "pony", "falcon", "rabbit", "turtle", "sparrow", "goat", "kitten", "hound", "raven", "fox",
    "badger", "heron", "otter", "magpie", "weasel", "crane",
];

const OBJECTS_FOODS: &[&str] = &[
    "pie", "loaf", "stew", "pudding", "tart", "cake", "soup", "roast", "jam", "bread", "cheese",
    "cider", "honey", "butter", "pastry", "broth",
];

const ADJECTIVES: &[&str] = &[
    "bright", "heavy", "smooth", "ancient", "golden", "crooked", "silent", "warm", "pale",
    "sturdy", "narrow", "gentle", "clever", "distant", "hollow", "tidy", "plain", "rare",
    "soft", "round", "sweet", "fresh", "crisp", "mild", "rich", "dark", "fine", "light",
    "spicy", "salty", "tender", "ripe", "smoky", "dense", "thin", "wide",
];

#[derive(Clone, Copy, PartialEq, Eq)]
enum ObjectClass {
    Goods,
    Animals,
    Foods,
}

struct Object {
    word: &'static str,
    class: ObjectClass,
    index: usize,
}

fn object(index: usize) -> Object {
    let all = OBJECTS_GOODS.len() + OBJECTS_ANIMALS.len() + OBJECTS_FOODS.len();
    let index = index % all;
    if index < OBJECTS_GOODS.len() {
        Object { word: OBJECTS_GOODS[index], class: ObjectClass::Goods, index }
    } else if index < OBJECTS_GOODS.len() + OBJECTS_ANIMALS.len() {
        Object { word: OBJECTS_ANIMALS[index - OBJECTS_GOODS.len()], class: ObjectClass::Animals, index }
    } else {
        Object {
            word: OBJECTS_FOODS[index - OBJECTS_GOODS.len() - OBJECTS_ANIMALS.len()],
            class: ObjectClass::Foods,
            index,
        }
    }
}

fn total_objects() -> usize {
    OBJECTS_GOODS.len() + OBJECTS_ANIMALS.len() + OBJECTS_FOODS.len()
}

/// Fixed per-object word choices: follow-up sentences must be functions of
/// the object alone so that "next sentence given current" stays learnable.
fn adjective_of(o: &Object) -> &'static str {
    ADJECTIVES[(o.index * 7 + 3) % ADJECTIVES.len()]
}

fn buyer_of(o: &Object) -> &'static str {
    BUYERS[(o.index * 5 + 1) % BUYERS.len()]
}

fn intro_sentence(character: &str, o: &Object) -> String {
    match o.class {
        ObjectClass::Goods => format!("one morning the {character} finds a {} .", o.word),
        ObjectClass::Animals => format!("one evening the {character} meets a {} .", o.word),
        ObjectClass::Foods => format!("one afternoon the {character} makes a {} .", o.word),
    }
}

fn describe_sentence(o: &Object) -> String {
    let adj = adjective_of(o);
    match o.class {
        ObjectClass::Goods => format!("the {} is {adj} .", o.word),
        ObjectClass::Animals => format!("the {} looks {adj} .", o.word),
        ObjectClass::Foods => format!("the {} smells {adj} .", o.word),
    }
}

fn react_sentence(o: &Object) -> String {
    match o.class {
        ObjectClass::Goods => format!("everyone wants the {} now .", o.word),
        ObjectClass::Animals => format!("children follow the {} around .", o.word),
        ObjectClass::Foods => format!("neighbors praise the {} loudly .", o.word),
    }
}

fn buy_sentence(o: &Object, last: bool) -> String {
    let buyer = buyer_of(o);
    let verb = match o.class {
        ObjectClass::Goods => "buys",
        ObjectClass::Animals => "adopts",
        ObjectClass::Foods => "tastes",
    };
    if last {
        format!("finally the {buyer} {verb} the {} .", o.word)
    } else {
        format!("the {buyer} {verb} the {} .", o.word)
    }
}

fn closing_sentence(o: &Object) -> String {
    let buyer = buyer_of(o);
    if o.index.is_multiple_of(2) {
        format!("the {buyer} smiles happily .")
    } else {
        format!("the {buyer} nods .")
    }
}

/// The canonical bundled corpus: 200+ sentences under a fixed seed.
pub fn bundled_corpus() -> String {
    synthetic_corpus(200, 0xB00C)
}

/// Generate at least `n_sentences` sentences of corpus text (whole documents;
/// one sentence per line, documents separated by blank lines). Deterministic
/// in the seed.
pub fn synthetic_corpus(n_sentences: usize, seed: u64) -> String {
    let mut rng = Rng::new(seed);
    let mut out = String::new();
    let mut produced = 0usize;
    while produced < n_sentences {
        let character = CHARACTERS[rng.below(CHARACTERS.len())];
        let place = PLACES[rng.below(PLACES.len())];
        let weather = WEATHER[rng.below(WEATHER.len())];
        let mut doc: Vec<String> = Vec::new();
        doc.push(format!("on a {weather} morning the {character} walks through the {place} ."));
        let objects = 2 + rng.below(2); // 2 or 3 chains per episode
        let mut last_object = object(rng.below(total_objects()));
        for k in 0..objects {
            let o = object(rng.below(total_objects()));
            let last = k + 1 == objects;
            doc.push(intro_sentence(character, &o));
            doc.push(describe_sentence(&o));
            doc.push(react_sentence(&o));
            doc.push(buy_sentence(&o, last));
            last_object = o;
        }
        doc.push(closing_sentence(&last_object));
        produced += doc.len();
        for line in doc {
            out.push_str(&line);
            out.push('\n');
        }
        out.push('\n');
    }
    out
}

/// Ring of eight Gaussians: centers evenly spaced on a circle of `radius`,
/// isotropic component std `std`. Returns (samples, centers).
pub fn eight_gaussians(n: usize, radius: f64, std: f64, seed: u64) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let mut rng = Rng::new(seed);
    let centers: Vec<Vec<f64>> = (0..8)
        .map(|i| {
            let angle = i as f64 / 8.0 * std::f64::consts::TAU;
            vec![radius * angle.cos(), radius * angle.sin()]
        })
        .collect();
    let samples = (0..n)
        .map(|_| {
            let c = &centers[rng.below(8)];
            vec![c[0] + std * rng.normal(), c[1] + std * rng.normal()]
        })
        .collect();
    (samples, centers)
}
