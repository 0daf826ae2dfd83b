//! The sixteen pair features fed to the classifier.

mod grammar;
mod lexical;
mod semantic;
mod transitions;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::annotate::{resolve_coreferences, AnnotateError, AnnotationResources};
use crate::corpus::{SentencePair, Token};

pub use grammar::{arguments, grammatical_overlap, Arguments, GrammarSource};
pub use lexical::{
    content_words, cosine_similarity, entity_counts, lcs_ratio, length_difference_ratio, longest_common_run, ne_ratio,
    rendered_len, word_count, word_overlap_ratios, Bags,
};
pub use semantic::{semantic_similarity, SimilarityLexicon, SIMILARITY_LEXICON_FILE};
pub use transitions::{
    attribution_feature, quoted_spans, transition_features, TransitionResources, PHRASE_WINDOW, TRANSITION_FILES,
};

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("{file}:{line}: {message}")]
    Resource { file: String, line: usize, message: String },
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Annotate(#[from] AnnotateError),
}

/// Feature names in vector order.
pub const FEATURE_NAMES: [&str; 16] = [
    "word_cos",
    "noun_cos",
    "verb_cos",
    "adj_cos",
    "wor_t",
    "wor_s",
    "subj_overlap",
    "obj_overlap",
    "subj_noun_overlap",
    "lcsr",
    "ne_ratio",
    "semantic_sim",
    "trans_elab",
    "trans_followup",
    "ldr",
    "attribution",
];

pub const FEATURE_COUNT: usize = FEATURE_NAMES.len();

/// Indices of the 0/1 components.
pub const BOOLEAN_FEATURES: [usize; 3] = [12, 13, 15];

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub word_cos: f64,
    pub noun_cos: f64,
    pub verb_cos: f64,
    pub adj_cos: f64,
    pub wor_t: f64,
    pub wor_s: f64,
    pub subj_overlap: f64,
    pub obj_overlap: f64,
    pub subj_noun_overlap: f64,
    pub lcsr: f64,
    pub ne_ratio: f64,
    pub semantic_sim: f64,
    pub trans_elab: f64,
    pub trans_followup: f64,
    pub ldr: f64,
    pub attribution: f64,
}

impl FeatureVector {
    pub fn to_array(&self) -> [f64; FEATURE_COUNT] {
        [
            self.word_cos,
            self.noun_cos,
            self.verb_cos,
            self.adj_cos,
            self.wor_t,
            self.wor_s,
            self.subj_overlap,
            self.obj_overlap,
            self.subj_noun_overlap,
            self.lcsr,
            self.ne_ratio,
            self.semantic_sim,
            self.trans_elab,
            self.trans_followup,
            self.ldr,
            self.attribution,
        ]
    }

    pub fn from_array(v: [f64; FEATURE_COUNT]) -> Self {
        FeatureVector {
            word_cos: v[0],
            noun_cos: v[1],
            verb_cos: v[2],
            adj_cos: v[3],
            wor_t: v[4],
            wor_s: v[5],
            subj_overlap: v[6],
            obj_overlap: v[7],
            subj_noun_overlap: v[8],
            lcsr: v[9],
            ne_ratio: v[10],
            semantic_sim: v[11],
            trans_elab: v[12],
            trans_followup: v[13],
            ldr: v[14],
            attribution: v[15],
        }
    }

    /// None unless the slice has exactly one value per feature.
    pub fn from_slice(v: &[f64]) -> Option<Self> {
        <[f64; FEATURE_COUNT]>::try_from(v).ok().map(FeatureVector::from_array)
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        FEATURE_NAMES
            .iter()
            .position(|n| *n == name)
            .map(|i| self.to_array()[i])
    }
}

/// Everything feature extraction reads besides the pair.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureResources {
    pub annotation: AnnotationResources,
    pub transitions: TransitionResources,
    pub lexicon: SimilarityLexicon,
}

impl FeatureResources {
    pub fn bundled() -> Self {
        FeatureResources {
            annotation: AnnotationResources::bundled(),
            transitions: TransitionResources::bundled(),
            lexicon: SimilarityLexicon::bundled(),
        }
    }

    /// Annotation and transition files from `dir` where present; the
    /// similarity lexicon from `lexicon` or `dir`.
    pub fn load(dir: Option<&Path>, lexicon: Option<&Path>) -> Result<Self, FeatureError> {
        let annotation = match dir {
            Some(d) => AnnotationResources::from_dir(d)?,
            None => AnnotationResources::bundled(),
        };
        let transitions = match dir {
            Some(d) => TransitionResources::from_dir(d)?,
            None => TransitionResources::bundled(),
        };
        let in_dir = dir.map(|d| d.join(SIMILARITY_LEXICON_FILE)).filter(|p| p.exists());
        let lexicon = match lexicon.map(Path::to_path_buf).or(in_dir) {
            Some(p) => SimilarityLexicon::from_file(&p)?,
            None => SimilarityLexicon::bundled(),
        };
        Ok(FeatureResources {
            annotation,
            transitions,
            lexicon,
        })
    }
}

impl FeatureResources {
    /// Short digest of every resource's contents.
    pub fn version(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        h.update(self.annotation.version().as_bytes());
        let t = &self.transitions;
        for list in [&t.elaboration_words, &t.followup_words] {
            h.update(list.join("\n").as_bytes());
            h.update([0]);
        }
        for list in [&t.elaboration_phrases, &t.followup_phrases] {
            for p in list {
                h.update(p.join(" ").as_bytes());
                h.update(b"\n");
            }
            h.update([0]);
        }
        for (a, b, s) in self.lexicon.entries() {
            h.update(format!("{a}\t{b}\t{s}\n").as_bytes());
        }
        hex::encode(&h.finalize()[..8])
    }
}

impl Default for FeatureResources {
    fn default() -> Self {
        FeatureResources::bundled()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extraction {
    pub vector: FeatureVector,
    pub grammar: GrammarSource,
}

fn tagged<'a>(tokens: &'a [Token], resources: &'a AnnotationResources, bag: fn(&Token) -> bool) -> Vec<&'a Token> {
    content_words(tokens, resources).filter(|t| bag(t)).collect()
}

fn is_scored_verb(t: &Token) -> bool {
    t.pos.is_verb() && !matches!(t.lemma.to_lowercase().as_str(), "be" | "do" | "have" | "has")
}

/// Word tokens only; punctuation never forms part of a common run.
fn lower_surfaces(tokens: &[Token]) -> Vec<String> {
    tokens
        .iter()
        .filter(|t| t.is_word())
        .map(|t| t.surface.to_lowercase())
        .collect()
}

/// Computes all features of a pair. Pronouns are replaced by their chain
/// mentions before the noun, verb and adjective cosines, the grammatical
/// overlaps and semantic similarity; the remaining features read the pair
/// as given.
pub fn extract_features(pair: &SentencePair, resources: &FeatureResources) -> Result<Extraction, FeatureError> {
    let annotation = &resources.annotation;
    let (source, target) = (&pair.source, &pair.target);
    let resolved = resolve_coreferences(pair)?;
    let (rs, rt) = (&resolved.source, &resolved.target);

    let plain_s = Bags::of(source, annotation);
    let plain_t = Bags::of(target, annotation);
    let bags_s = Bags::of(rs, annotation);
    let bags_t = Bags::of(rt, annotation);

    let (wor_t, wor_s) = word_overlap_ratios(&plain_t.words, &plain_s.words);
    let ((subj, obj, subj_noun), grammar) = grammatical_overlap(rs, rt);
    let (ne_s, ne_t) = entity_counts(source, target);
    let semantic = semantic_similarity(
        &tagged(rs.tokens(), annotation, |t| t.pos.is_noun()),
        &tagged(rs.tokens(), annotation, is_scored_verb),
        &tagged(rt.tokens(), annotation, |t| t.pos.is_noun()),
        &tagged(rt.tokens(), annotation, is_scored_verb),
        &resources.lexicon,
    );
    let (trans_elab, trans_followup) = transition_features(source.tokens(), &resources.transitions);

    let v = FeatureVector {
        word_cos: cosine_similarity(&plain_s.words, &plain_t.words),
        noun_cos: cosine_similarity(&bags_s.nouns, &bags_t.nouns),
        verb_cos: cosine_similarity(&bags_s.verbs, &bags_t.verbs),
        adj_cos: cosine_similarity(&bags_s.adjectives, &bags_t.adjectives),
        wor_t,
        wor_s,
        subj_overlap: subj,
        obj_overlap: obj,
        subj_noun_overlap: subj_noun,
        lcsr: lcs_ratio(&lower_surfaces(source.tokens()), &lower_surfaces(target.tokens())),
        ne_ratio: ne_ratio(ne_s, ne_t),
        semantic_sim: semantic,
        trans_elab,
        trans_followup,
        ldr: length_difference_ratio(word_count(source), word_count(target)),
        attribution: attribution_feature(source.tokens(), target.tokens()),
    };
    let vector = FeatureVector::from_array(v.to_array().map(|x| x.clamp(0.0, 1.0)));
    Ok(Extraction { vector, grammar })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotate::{annotate_pair, annotate_sentence};

    fn pair(t: &str, s: &str) -> SentencePair {
        annotate_pair("p", t, s, &AnnotationResources::bundled()).unwrap()
    }

    fn features(t: &str, s: &str) -> FeatureVector {
        extract_features(&pair(t, s), &FeatureResources::bundled())
            .unwrap()
            .vector
    }

    #[test]
    fn manifest_order_round_trips() {
        let v = FeatureVector::from_array(std::array::from_fn(|i| i as f64 / 16.0));
        assert_eq!(FeatureVector::from_array(v.to_array()), v);
        assert_eq!(v.get("ldr"), Some(14.0 / 16.0));
        assert!(FeatureVector::from_slice(&[0.0; 3]).is_none());
    }

    #[test]
    fn identity_pair() {
        let s = "The court ruled that the plea was invalid.";
        let v = features(s, s);
        assert_eq!((v.word_cos, v.wor_t, v.wor_s, v.lcsr, v.ldr), (1.0, 1.0, 1.0, 1.0, 0.5));
    }

    #[test]
    fn disjoint_pair() {
        let v = features("The court ruled.", "Petitioners appealed quickly.");
        assert_eq!(v.word_cos, 0.0);
        assert_eq!(v.noun_cos, 0.0);
        assert_eq!(v.lcsr, 0.0);
        assert_eq!(v.ldr, 0.5);
    }

    #[test]
    fn be_verbs_are_ignored() {
        let v = features("The plea is valid.", "The plea was valid.");
        assert_eq!(v.verb_cos, 0.0);
    }

    #[test]
    fn transitions() {
        let lists = TransitionResources::bundled();
        let r = AnnotationResources::bundled();
        let tf = |s: &str| transition_features(annotate_sentence(s, &r).tokens(), &lists);
        assert_eq!(tf("Thus, the court held that the plea stood."), (1.0, 0.0));
        assert_eq!(tf("Rather, they should look to the evidence."), (0.0, 1.0));
        assert_eq!(
            tf("The decision whether to plead guilty also involves risk."),
            (0.0, 0.0)
        );
        assert_eq!(tf("First, it forgets the real question."), (1.0, 0.0));
        assert_eq!(tf("The court, in addition, rejected it."), (1.0, 0.0));
        assert_eq!(tf("In contrast, the judge agreed."), (0.0, 1.0));
        assert!(lists.elaboration_words.len() >= 30);
        assert!(lists.elaboration_phrases.len() >= 50);
    }

    #[test]
    fn attribution() {
        let r = AnnotationResources::bundled();
        let a = |s: &str, t: &str| {
            attribution_feature(annotate_sentence(s, &r).tokens(), annotate_sentence(t, &r).tokens())
        };
        assert_eq!(
            a(
                "A 'reasonable probability' of a different result is shown.",
                "The defendant must show a 'reasonable probability' that the result would differ."
            ),
            1.0
        );
        assert_eq!(a("No quotes here.", "None here either."), 0.0);
        assert_eq!(
            a(
                "We look to the \"totality of the evidence\" before the jury.",
                "The jury heard evidence."
            ),
            0.0
        );
        assert_eq!(a("An 'unbalanced quote here.", "unbalanced quote"), 0.0);
    }

    #[test]
    fn grammar_heuristic() {
        let r = AnnotationResources::bundled();
        let s = annotate_sentence("Lee moved to Memphis.", &r);
        let t = annotate_sentence("Lee lived in South Korea.", &r);
        let ((subj, _obj, subj_noun), source) = grammatical_overlap(&s, &t);
        assert_eq!(source, GrammarSource::Heuristic);
        assert_eq!(subj, 1.0);
        assert_eq!(subj_noun, 1.0);
    }

    #[test]
    fn coref_feeds_noun_cosine() {
        let p = pair("Jae Lee moved to Memphis.", "He never returned.");
        let v = extract_features(&p, &FeatureResources::bundled()).unwrap().vector;
        assert!(v.noun_cos > 0.0);
        assert_eq!(v.word_cos, 0.0);
    }
}
