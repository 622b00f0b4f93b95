mod common;

use std::collections::BTreeSet;
use std::time::Duration;

use common::{brute_force_generate, dependencies, fs, lingware, random_target_bag, reparse};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use shakebake::generator::{generate, instantiate_targets, rank_realizations, GenError, Limits};
use shakebake::parser::{extract_bag, parse, tokenize};
use shakebake::transfer::{transfer, TargetSign};

fn sign(text: &str) -> TargetSign {
    TargetSign { sign: fs(text), fragment: 0, passthrough: false, proper: false }
}

fn texts(signs: &[TargetSign]) -> Vec<String> {
    let lw = lingware();
    let cands = instantiate_targets(signs, &lw.target_lex).unwrap();
    let g = generate(&cands, &lw.target_gram, &Limits::default()).unwrap();
    g.realizations.iter().map(|r| r.text()).collect()
}

fn target_bag(line: &str) -> Vec<TargetSign> {
    let lw = lingware();
    let r = parse(&tokenize(line), &lw.source_gram, &lw.source_lex);
    let bag = extract_bag(&r, &lw.source_gram);
    transfer(&bag, &lw.bilingual, 1).remove(0).signs
}

#[test]
fn buenos_dias() {
    let bag = [sign("(lemma bueno) (sem (index t2) (mod t1))"), sign("(lemma día) (sem (index t1))")];
    assert_eq!(texts(&bag), ["buenos días"]);
    assert_eq!(texts(&target_bag("morning.")), ["buenos días"]);
}

#[test]
fn singleton() {
    assert_eq!(texts(&[sign("(lemma hola) (sem (index t1))")]), ["hola"]);
}

#[test]
fn inflection_by_unification() {
    let lw = lingware();
    let s = sign("(lemma estar) (per 3) (num sg) (tense pres) (sem (index t1))");
    let cands = instantiate_targets(&[s], &lw.target_lex).unwrap();
    let forms: Vec<&str> = cands[0].iter().map(|c| c.words[0].as_str()).collect();
    assert_eq!(forms, ["está"]);
}

#[test]
fn passthrough_candidates_are_bracketed() {
    let lw = lingware();
    let mut mj = sign("(lemma mj) (cat unk) (sem (index t1))");
    mj.passthrough = true;
    let mut bill = sign("(lemma bill) (cat unk) (sem (index t2))");
    bill.passthrough = true;
    bill.proper = true;
    let cands = instantiate_targets(&[mj, bill], &lw.target_lex).unwrap();
    assert_eq!(cands[0][0].words, ["[mj]"]);
    assert_eq!(cands[1][0].words, ["[Bill]"]);
}

#[test]
fn missing_lemma_is_a_gap() {
    let lw = lingware();
    let err = instantiate_targets(&[sign("(lemma uno) (sem (index t1))")], &lw.target_lex).unwrap_err();
    assert_eq!(err, GenError::Gap { lemma: "uno".into() });
    assert_eq!(err.tag(), "generation-gap");
}

#[test]
fn ligature_marks_match_the_oracle() {
    let lw = lingware();
    let bag = target_bag("i am seeing ligature marks.");
    assert_eq!(bag.len(), 6);
    let cands = instantiate_targets(&bag, &lw.target_lex).unwrap();
    let got: BTreeSet<Vec<String>> =
        generate(&cands, &lw.target_gram, &Limits::default()).unwrap().realizations.into_iter().map(|r| r.words).collect();
    assert_eq!(got, brute_force_generate(&cands, &lw.target_gram));
    assert!(got.contains(&["veo", "las", "marcas", "de", "la", "ligadura"].map(String::from).to_vec()));
}

#[test]
fn limits_are_distinct_errors() {
    let lw = lingware();
    let bag = target_bag("i am seeing ligature marks.");
    let cands = instantiate_targets(&bag, &lw.target_lex).unwrap();
    let small = Limits { max_bag: 3, ..Limits::default() };
    assert!(matches!(generate(&cands, &lw.target_gram, &small), Err(GenError::BagTooLarge { .. })));
    let few = Limits { max_edges: 5, ..Limits::default() };
    assert_eq!(generate(&cands, &lw.target_gram, &few).unwrap_err().tag(), "edge-cap-exceeded");
    let now = Limits { timeout: Duration::ZERO, ..Limits::default() };
    assert_eq!(generate(&cands, &lw.target_gram, &now).unwrap_err().tag(), "gen-timeout");
    let stray = [sign("(lemma el) (sem (index t1) (mod t9))")];
    let c = instantiate_targets(&stray, &lw.target_lex).unwrap();
    assert_eq!(generate(&c, &lw.target_gram, &Limits::default()).unwrap_err(), GenError::NoRealization);
}

#[test]
fn trace_names_coverage_and_root() {
    let lw = lingware();
    let bag = [sign("(lemma bueno) (sem (index t2) (mod t1))"), sign("(lemma día) (sem (index t1))")];
    let cands = instantiate_targets(&bag, &lw.target_lex).unwrap();
    let g = generate(&cands, &lw.target_gram, &Limits::default()).unwrap();
    assert!(g.trace.contains(&"GEN 11 np \"buenos días\"".to_string()), "{:?}", g.trace);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn generation_equals_permutation_oracle(seed in any::<u64>()) {
        let lw = lingware();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bag = random_target_bag(&mut rng, 6);
        let cands = instantiate_targets(&bag, &lw.target_lex).unwrap();
        let got: BTreeSet<Vec<String>> = match generate(&cands, &lw.target_gram, &Limits::default()) {
            Ok(g) => g.realizations.into_iter().map(|r| r.words).collect(),
            Err(GenError::NoRealization) => BTreeSet::new(),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        prop_assert_eq!(got, brute_force_generate(&cands, &lw.target_gram));
    }

    #[test]
    fn realizations_reparse_to_the_bag(seed in any::<u64>()) {
        let lw = lingware();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bag = random_target_bag(&mut rng, 6);
        let cands = instantiate_targets(&bag, &lw.target_lex).unwrap();
        let Ok(g) = generate(&cands, &lw.target_gram, &Limits::default()) else { return Ok(()) };
        let want = dependencies(&bag.iter().map(|s| s.sign.clone()).collect::<Vec<_>>());
        let words: usize = cands.iter().map(|c| c[0].words.len()).sum();
        for r in &g.realizations {
            prop_assert_eq!(r.words.len(), words);
            prop_assert!(lw.target_gram.is_root(&r.root));
            prop_assert!(reparse(&r.words, lw).contains(&want), "{}", r.text());
        }
        prop_assert!(rank_realizations(&g.realizations).is_some());
    }
}
