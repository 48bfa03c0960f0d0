use std::path::Path;

use proptest::prelude::*;
use tempfile::tempdir;
use vtad::annotations::parse_annotation_text;
use vtad::checkpoint::{format_checkpoint, parse_checkpoint};
use vtad::embeddings::{format_embedding_set, parse_embedding_set};
use vtad::{load_checkpoint, save_checkpoint, Checkpoint, Error, Manifest};
use vtad_core::catalog::build_catalog;
use vtad_core::dataset::split_scenario;
use vtad_core::synthetic::{generate, SyntheticConfig};
use vtad_core::{
    DiffNetParams, Embedding, EmbeddingSet, Gender, Scenario, SplitConfig, TrainConfig,
    UtteranceAllocation,
};

fn here() -> &'static Path {
    Path::new("input.txt")
}

fn core_class(result: vtad::Result<impl std::fmt::Debug>) -> (&'static str, String) {
    let e = result.unwrap_err();
    (e.class(), e.to_string())
}

#[test]
fn minimal_embedding_file() {
    let text = "#vtad-emb v1 dim=4 encoder=ecapa-tdnn\n# a comment\np225\t001\tF\t0.1,0.2,0.3,0.4\np226\t001\tM\t1,2,3,4\n";
    let set = parse_embedding_set(text, here()).unwrap();
    assert_eq!(set.len(), 2);
    assert_eq!(set.dim(), 4);
    assert_eq!(set.encoder_tag(), "ecapa-tdnn");
    assert_eq!(
        set.get("p225", "001").unwrap().vector,
        vec![0.1, 0.2, 0.3, 0.4]
    );
}

#[test]
fn embedding_errors_carry_line_context() {
    let header = "#vtad-emb v1 dim=4 encoder=x\n";
    let cases = [
        ("p1\tu\tM\t1,2,3\n", "DimensionMismatch", ":2:"),
        (
            "p1\tu\tF\t1,2,3,4\np1\tv\tM\t1,2,3,4\n",
            "InconsistentGender",
            ":3:",
        ),
        (
            "p1\tu\tF\t1,2,3,4\np1\tu\tF\t1,2,3,4\n",
            "DuplicateKey",
            ":3:",
        ),
        ("p1\tu\tF\t1,NaN,3,4\n", "NonFiniteValue", ":2:"),
        ("p1\tu\tX\t1,2,3,4\n", "FormatError", ":2:"),
        ("p1\tu\tF\t1,two,3,4\n", "FormatError", ":2:"),
        ("p1\tu\t1,2,3,4\n", "FormatError", ":2:"),
    ];
    for (body, class, line) in cases {
        let text = format!("{header}{body}");
        let (got, message) = core_class(parse_embedding_set(&text, here()));
        assert_eq!(got, class, "{body:?}");
        assert!(message.contains(line), "{message}");
    }
    for bad_header in [
        "",
        "#vtad-emb v2 dim=4 encoder=x",
        "#vtad-emb v1 dim=0 encoder=x",
        "#vtad-emb v1 dim=4",
    ] {
        let (got, _) = core_class(parse_embedding_set(bad_header, here()));
        assert_eq!(got, "FormatError");
    }
}

fn finite_vectors() -> impl Strategy<Value = Vec<Vec<f64>>> {
    let value = prop_oneof![
        any::<f64>().prop_filter("finite", |v| v.is_finite()),
        -1.0f64..1.0,
        Just(0.0),
        Just(-0.0)
    ];
    prop::collection::vec(prop::collection::vec(value, 3), 1..20)
}

proptest! {
    #[test]
    fn embedding_text_round_trips_bitwise(vectors in finite_vectors()) {
        let mut set = EmbeddingSet::new(3, "tag with spaces");
        for (i, v) in vectors.iter().enumerate() {
            let gender = if i % 3 == 0 { Gender::Male } else { Gender::Female };
            set.insert(Embedding::new(format!("s{i}"), "u", gender, v.clone())).unwrap();
        }
        let back = parse_embedding_set(&format_embedding_set(&set), here()).unwrap();
        prop_assert_eq!(back.encoder_tag(), "tag with spaces");
        for (a, b) in set.iter().zip(back.iter()) {
            let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
            prop_assert_eq!(bits(&a.vector), bits(&b.vector));
            prop_assert_eq!(&a.key, &b.key);
        }
    }
}

#[test]
fn embedding_load_ignores_record_order() {
    let a = "#vtad-emb v1 dim=1 encoder=t\ns1\tu1\tM\t1\ns2\tu1\tF\t2\n";
    let b = "#vtad-emb v1 dim=1 encoder=t\ns2\tu1\tF\t2\ns1\tu1\tM\t1\n";
    assert_eq!(
        parse_embedding_set(a, here()).unwrap(),
        parse_embedding_set(b, here()).unwrap()
    );
}

#[test]
fn annotations_parse_and_validate() {
    let catalog = build_catalog();
    let text =
        "# weaker stronger gender descriptors\np1\tp2\tM\tbright, HUSKY\np3\tp4\tF\tShrill\n";
    let records = parse_annotation_text(text, here(), &catalog).unwrap();
    assert_eq!(records.len(), 2);
    assert_eq!(records[0].descriptors, vec![0, 16]);
    assert_eq!(records[1].descriptors, vec![33]);

    let cases = [
        ("p1\tp1\tM\tBright\n", "SelfPair"),
        ("p1\tp2\tM\tShrill\n", "UnknownDescriptor"),
        ("p1\tp2\tF\tHusky\n", "UnknownDescriptor"),
        ("p1\tp2\tM\tBright,Thin,Low,Pure\n", "TooManyDescriptors"),
        ("p1\tp2\tM\n", "FormatError"),
        ("p1\tp2\tQ\tBright\n", "FormatError"),
    ];
    for (line, class) in cases {
        let (got, message) = core_class(parse_annotation_text(line, here(), &catalog));
        assert_eq!(got, class, "{line:?}");
        assert!(message.contains("input.txt:1:"), "{message}");
    }
}

fn trained_looking_params(seed: u64) -> DiffNetParams {
    let mut p = DiffNetParams::init(10, 6, 34, seed);
    for (i, v) in p.b2.iter_mut().enumerate() {
        *v = (i as f64).sqrt() * 1e-3 - 1.0 / 3.0;
    }
    p.bn_running_var[0] = 1.0 / 7.0;
    p.bn_running_mean[1] = -2.5e-300;
    p
}

#[test]
fn checkpoint_round_trip_is_bitwise() {
    let catalog = build_catalog();
    let dir = tempdir().unwrap();
    let path = dir.path().join("model.ckpt");
    let ckpt = Checkpoint {
        params: trained_looking_params(8),
        encoder_tag: "facodec-timbre".into(),
        train_config: Some(TrainConfig::for_encoder("facodec-timbre")),
    };
    save_checkpoint(&ckpt, &path).unwrap();
    let back = load_checkpoint(&path, &catalog).unwrap();
    assert_eq!(back, ckpt);
    for ((_, a), (_, b)) in ckpt.params.tensors().iter().zip(back.params.tensors()) {
        assert!(a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits()));
    }
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("#vtad-ckpt v1\n"));
    assert!(text.contains("\ntrain.learning_rate=2.5e-5\n"));
    assert!(text.contains("\nhidden=6\n"));
    assert!(!dir.path().join("model.ckpt.tmp").exists());
}

#[test]
fn checkpoint_records_default_hidden_size() {
    let catalog = build_catalog();
    let ckpt = Checkpoint {
        params: DiffNetParams::init(8, TrainConfig::default().hidden_size, 34, 1),
        encoder_tag: "ecapa-tdnn".into(),
        train_config: Some(TrainConfig::for_encoder("ecapa-tdnn")),
    };
    let text = format_checkpoint(&ckpt);
    assert!(text.contains("\ntrain.learning_rate=5e-5\n"));
    let back = parse_checkpoint(&text, here(), &catalog).unwrap();
    assert_eq!(back.params.hidden, 128);
    assert_eq!(back.params.w1.len(), 8 * 128);
}

#[test]
fn checkpoint_rejects_foreign_catalog_and_damage() {
    let catalog = build_catalog();
    let ckpt = Checkpoint {
        params: trained_looking_params(2),
        encoder_tag: "t".into(),
        train_config: None,
    };
    let text = format_checkpoint(&ckpt);
    let fingerprint = catalog.fingerprint();
    let edited = text.replace(&fingerprint, "0123456789abcdef");
    let (class, _) = core_class(parse_checkpoint(&edited, here(), &catalog));
    assert_eq!(class, "CatalogMismatch");

    let truncated: String = text
        .lines()
        .take(text.lines().count() - 1)
        .collect::<Vec<_>>()
        .join("\n");
    assert_eq!(
        core_class(parse_checkpoint(&truncated, here(), &catalog)).0,
        "FormatError"
    );
    let renamed = text.replace("@w2 ", "@w3 ");
    assert_eq!(
        core_class(parse_checkpoint(&renamed, here(), &catalog)).0,
        "FormatError"
    );
    assert_eq!(
        core_class(parse_checkpoint("#vtad-ckpt v0\n", here(), &catalog)).0,
        "FormatError"
    );
    assert!(parse_checkpoint(&text, here(), &catalog)
        .unwrap()
        .train_config
        .is_none());
}

#[test]
fn manifest_round_trip_rebuilds_plan() {
    let catalog = build_catalog();
    let data = generate(
        &SyntheticConfig {
            speakers_per_gender: 20,
            utterances_per_speaker: 6,
            ..SyntheticConfig::default()
        },
        &catalog,
    )
    .unwrap();
    for scenario in Scenario::ALL {
        let mut config = SplitConfig::new(scenario, &catalog);
        config.eval_dims = vec![0, 1, 17, 18];
        config.k_train = 2;
        config.k_eval = 2;
        let plan = split_scenario(&data.records, &config, &catalog).unwrap();
        let alloc = UtteranceAllocation::allocate(&plan, &data.embeddings).unwrap();
        let manifest = Manifest::new(&plan, &alloc, &catalog, "synthetic", 64);
        let json = manifest.to_json();
        let parsed: Manifest = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed.to_json(), json);
        let (plan2, alloc2) = parsed.to_plan(&catalog).unwrap();
        assert_eq!(plan2, plan);
        assert_eq!(alloc2, alloc);
    }
}

#[test]
fn manifest_with_leaked_speaker_is_rejected() {
    let catalog = build_catalog();
    let data = generate(
        &SyntheticConfig {
            speakers_per_gender: 20,
            utterances_per_speaker: 6,
            ..SyntheticConfig::default()
        },
        &catalog,
    )
    .unwrap();
    let mut config = SplitConfig::new(Scenario::Unseen, &catalog);
    config.eval_dims = vec![0, 17];
    config.k_train = 2;
    config.k_eval = 2;
    let plan = split_scenario(&data.records, &config, &catalog).unwrap();
    let alloc = UtteranceAllocation::allocate(&plan, &data.embeddings).unwrap();
    let mut manifest = Manifest::new(&plan, &alloc, &catalog, "synthetic", 64);
    manifest.eval.push(manifest.train[0]);
    let err = manifest.to_plan(&catalog).unwrap_err();
    assert_eq!(err.class(), "InfeasibleSplit");
    assert!(matches!(err, Error::Core(_)));
}
