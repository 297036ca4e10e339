//! Seeded English-like text: a small phrase grammar over closed-class
//! English words and Zipf-distributed invented nouns, verbs and adjectives.
//!
//! Besides the grammar the generator imitates the collocational structure
//! of real prose: verbs prefer one object cluster and one preposition,
//! nouns prefer a few adjectives and a determiner, intransitive verbs
//! prefer an adverb, and a few hundred fixed phrases recur. Function words
//! dominate the counts and the content vocabulary has a long rare tail.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const DETERMINERS: &[&str] = &["the", "the", "the", "a", "a", "this", "his", "her", "their", "some", "every", "that"];
const PREPOSITIONS: &[&str] = &["of", "in", "on", "at", "with", "from", "to", "by", "for", "under", "near", "over"];
const PRONOUNS: &[&str] = &["he", "she", "they", "it", "we", "I", "you"];
const CONJUNCTIONS: &[&str] = &["and", "and", "but", "so", "or"];
const AUXILIARIES: &[&str] = &["will", "would", "could", "did", "should", "can", "must"];
const ADVERBS: &[&str] = &["not", "never", "always", "quickly", "slowly", "again", "often", "still"];
const SAYING: &[&str] = &["said", "added", "replied", "asked"];

const ONSETS: &[&str] = &["b", "br", "c", "ch", "d", "dr", "f", "fl", "g", "gr", "h", "j", "k", "l", "m", "n", "p", "pl", "r", "s", "sh", "st", "t", "tr", "v", "w", "z"];
const NUCLEI: &[&str] = &["a", "e", "i", "o", "u", "ai", "ea", "oo", "ou"];
const CODAS: &[&str] = &["", "", "n", "m", "r", "l", "s", "t", "nd", "rk", "st", "ng"];

const NOUN_CLUSTERS: usize = 24;
const PHRASES: usize = 300;

struct Zipf {
    cumulative: Vec<f64>,
}

impl Zipf {
    fn new(n: usize, exponent: f64) -> Self {
        let mut acc = 0.0;
        let cumulative = (1..=n)
            .map(|r| {
                acc += 1.0 / (r as f64).powf(exponent);
                acc
            })
            .collect();
        Zipf { cumulative }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> usize {
        let total = *self.cumulative.last().unwrap();
        let x = rng.gen::<f64>() * total;
        self.cumulative.partition_point(|&c| c < x).min(self.cumulative.len() - 1)
    }
}

struct Lexicon {
    nouns: Vec<String>,
    verbs: Vec<String>,
    intransitive: Vec<String>,
    adjectives: Vec<String>,
    names: Vec<String>,
    noun_zipf: Zipf,
    verb_zipf: Zipf,
    intr_zipf: Zipf,
    adj_zipf: Zipf,
    name_zipf: Zipf,
    cluster_zipf: Zipf,
    /// Per verb: preferred preposition.
    verb_prep: Vec<&'static str>,
    /// Per noun: preferred determiner and three preferred adjectives.
    noun_det: Vec<&'static str>,
    noun_adjs: Vec<[usize; 3]>,
    /// Per intransitive verb: preferred adverb.
    intr_adv: Vec<&'static str>,
    phrases: Vec<Vec<String>>,
    phrase_zipf: Zipf,
}

fn invent(rng: &mut ChaCha8Rng, seen: &mut std::collections::HashSet<String>, syllables: usize, suffix: &str) -> String {
    loop {
        let mut w = String::new();
        for _ in 0..syllables {
            w.push_str(ONSETS[rng.gen_range(0..ONSETS.len())]);
            w.push_str(NUCLEI[rng.gen_range(0..NUCLEI.len())]);
        }
        w.push_str(CODAS[rng.gen_range(0..CODAS.len())]);
        w.push_str(suffix);
        if seen.insert(w.clone()) {
            return w;
        }
    }
}

impl Lexicon {
    fn new(rng: &mut ChaCha8Rng) -> Self {
        let mut seen = std::collections::HashSet::new();
        let mut make = |n: usize, suffix: &str, rng: &mut ChaCha8Rng| -> Vec<String> {
            (0..n)
                // frequent ranks get short words
                .map(|i| {
                    let syllables = if i < 800 { 1 } else { 2 + usize::from(i % 7 == 0) };
                    invent(rng, &mut seen, syllables, suffix)
                })
                .collect()
        };
        let nouns = make(24_000, "", rng);
        let verbs = make(3000, "ed", rng);
        let intransitive = make(1000, "s", rng);
        let adjectives = make(3000, "y", rng);
        let names: Vec<String> = make(300, "", rng)
            .into_iter()
            .map(|w| {
                let mut c = w.chars();
                c.next().map(|f| f.to_uppercase().collect::<String>() + c.as_str()).unwrap()
            })
            .collect();
        let adj_zipf = Zipf::new(adjectives.len(), 1.0);
        let verb_prep = (0..verbs.len()).map(|_| pick(PREPOSITIONS, rng)).collect();
        let noun_det = (0..nouns.len()).map(|_| pick(DETERMINERS, rng)).collect();
        let noun_adjs = (0..nouns.len())
            .map(|_| [adj_zipf.sample(rng), adj_zipf.sample(rng), adj_zipf.sample(rng)])
            .collect();
        let intr_adv = (0..intransitive.len()).map(|_| pick(ADVERBS, rng)).collect();
        let phrases = (0..PHRASES)
            .map(|_| {
                vec![
                    pick(PREPOSITIONS, rng).to_string(),
                    pick(DETERMINERS, rng).to_string(),
                    nouns[rng.gen_range(0..200)].clone(),
                    pick(PREPOSITIONS, rng).to_string(),
                ]
            })
            .collect();
        Lexicon {
            verb_prep,
            noun_det,
            noun_adjs,
            intr_adv,
            phrases,
            phrase_zipf: Zipf::new(PHRASES, 1.0),
            noun_zipf: Zipf::new(nouns.len() / NOUN_CLUSTERS, 1.0),
            verb_zipf: Zipf::new(verbs.len(), 1.0),
            intr_zipf: Zipf::new(intransitive.len(), 1.0),
            adj_zipf,
            name_zipf: Zipf::new(names.len(), 1.0),
            cluster_zipf: Zipf::new(NOUN_CLUSTERS, 0.7),
            nouns,
            verbs,
            intransitive,
            adjectives,
            names,
        }
    }

    fn noun(&self, cluster: usize, rng: &mut ChaCha8Rng) -> usize {
        cluster + NOUN_CLUSTERS * self.noun_zipf.sample(rng)
    }
}

fn pick<'a>(words: &[&'a str], rng: &mut ChaCha8Rng) -> &'a str {
    words[rng.gen_range(0..words.len())]
}

pub struct SyntheticCorpus {
    rng: ChaCha8Rng,
    lex: Lexicon,
}

impl SyntheticCorpus {
    pub fn new(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lex = Lexicon::new(&mut rng);
        SyntheticCorpus { rng, lex }
    }

    fn noun_phrase(&mut self, out: &mut Vec<String>, cluster: usize, depth: usize) {
        let rng = &mut self.rng;
        let lex = &self.lex;
        let n = lex.noun(cluster, rng);
        let det = if rng.gen_bool(0.5) { lex.noun_det[n] } else { pick(DETERMINERS, rng) };
        out.push(det.to_string());
        if rng.gen_bool(0.35) {
            let a = if rng.gen_bool(0.6) {
                lex.noun_adjs[n][rng.gen_range(0..3)]
            } else {
                lex.adj_zipf.sample(rng)
            };
            out.push(lex.adjectives[a].clone());
        }
        out.push(lex.nouns[n].clone());
        if depth == 0 && rng.gen_bool(0.2) {
            out.push(pick(PREPOSITIONS, rng).to_string());
            let c = self.lex.cluster_zipf.sample(rng);
            self.noun_phrase(out, c, depth + 1);
        }
    }

    fn subject(&mut self, out: &mut Vec<String>) {
        let roll = self.rng.gen::<f64>();
        if roll < 0.3 {
            out.push(pick(PRONOUNS, &mut self.rng).to_string());
        } else if roll < 0.45 {
            out.push(self.lex.names[self.lex.name_zipf.sample(&mut self.rng)].clone());
        } else {
            let c = self.lex.cluster_zipf.sample(&mut self.rng);
            self.noun_phrase(out, c, 0);
        }
    }

    fn clause(&mut self, out: &mut Vec<String>) {
        self.subject(out);
        if self.rng.gen_bool(0.25) {
            out.push(pick(AUXILIARIES, &mut self.rng).to_string());
            if self.rng.gen_bool(0.3) {
                out.push(pick(ADVERBS, &mut self.rng).to_string());
            }
        }
        let mut verb = None;
        if self.rng.gen_bool(0.75) {
            let v = self.lex.verb_zipf.sample(&mut self.rng);
            verb = Some(v);
            out.push(self.lex.verbs[v].clone());
            let cluster = if self.rng.gen_bool(0.7) {
                v % NOUN_CLUSTERS
            } else {
                self.lex.cluster_zipf.sample(&mut self.rng)
            };
            self.noun_phrase(out, cluster, 0);
        } else {
            let v = self.lex.intr_zipf.sample(&mut self.rng);
            out.push(self.lex.intransitive[v].clone());
            if self.rng.gen_bool(0.3) {
                let adv = if self.rng.gen_bool(0.7) {
                    self.lex.intr_adv[v]
                } else {
                    pick(ADVERBS, &mut self.rng)
                };
                out.push(adv.to_string());
            }
        }
        if self.rng.gen_bool(0.1) {
            let p = self.lex.phrase_zipf.sample(&mut self.rng);
            out.extend(self.lex.phrases[p].iter().cloned());
            let c = self.lex.cluster_zipf.sample(&mut self.rng);
            self.noun_phrase(out, c, 1);
        } else if self.rng.gen_bool(0.4) {
            let prep = match verb {
                Some(v) if self.rng.gen_bool(0.7) => self.lex.verb_prep[v],
                _ => pick(PREPOSITIONS, &mut self.rng),
            };
            out.push(prep.to_string());
            let c = self.lex.cluster_zipf.sample(&mut self.rng);
            self.noun_phrase(out, c, 1);
        }
    }

    pub fn sentence(&mut self) -> String {
        let mut out: Vec<String> = Vec::new();
        if self.rng.gen_bool(0.1) {
            self.subject(&mut out);
            out.push(pick(SAYING, &mut self.rng).to_string());
            out.push("that".into());
        }
        self.clause(&mut out);
        if self.rng.gen_bool(0.35) {
            out.push(",".into());
            out.push(pick(CONJUNCTIONS, &mut self.rng).to_string());
            self.clause(&mut out);
        }
        let end = match self.rng.gen_range(0..20) {
            0 => "?",
            1 => "!",
            _ => ".",
        };
        out.push(end.into());
        out.join(" ")
    }

    /// Sentences until their total size reaches `bytes`.
    pub fn lines(&mut self, bytes: usize) -> Vec<String> {
        let mut total = 0;
        let mut lines = Vec::new();
        while total < bytes {
            let s = self.sentence();
            total += s.len() + 1;
            lines.push(s);
        }
        lines
    }
}

/// Random sentences over a tiny vocabulary, so that n-grams repeat often.
pub fn small_corpus(rng: &mut ChaCha8Rng, max_tokens: usize) -> Vec<String> {
    let vocab_size = rng.gen_range(2..40);
    let vocab: Vec<String> = (0..vocab_size).map(|i| format!("w{i}")).collect();
    let zipf = Zipf::new(vocab_size, 1.0);
    let budget = rng.gen_range(1..=max_tokens);
    let mut used = 0;
    let mut lines = Vec::new();
    while used < budget {
        let len = rng.gen_range(1..=20).min(budget - used);
        let line: Vec<&str> = (0..len).map(|_| vocab[zipf.sample(rng)].as_str()).collect();
        used += len;
        lines.push(line.join(" "));
    }
    lines
}
