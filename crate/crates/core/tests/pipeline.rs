use somtool_core::*;

fn docs(name: &str) -> String {
    format!("{}/../../docs/{name}", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn documented_model_is_canonical() {
    let text = std::fs::read_to_string(docs("minimal-model.json")).unwrap();
    let model = from_json_str(&text).unwrap();
    assert_eq!((model.side(), model.dim()), (2, 2));
    assert_eq!(to_json_string(&model).unwrap(), text);
}

#[test]
fn csv_to_report() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("d.csv");
    let mut text = String::from("x,y,kind\n");
    for i in 0..60 {
        let (base, kind) = if i % 2 == 0 { (0.0, "low") } else { (100.0, "high") };
        text.push_str(&format!("{},{},{kind}\n", base + f64::from(i % 7), base + f64::from(i % 5)));
    }
    std::fs::write(&csv, text).unwrap();
    let opts = CsvOptions {
        has_header: true,
        label_column: Some(LabelColumn::Name("kind".into())),
        ..CsvOptions::default()
    };
    let ds = load_csv(&csv, &opts).unwrap();
    assert_eq!(ds.column_names().unwrap(), ["x", "y"]);

    let cfg = TrainingConfig::new(4, 3000, 0.3).with_seed(3);
    let (model, trace) = fit_and_train(&ds, &cfg).unwrap();
    assert!(trace.checkpoints.windows(2).all(|w| w[0].t < w[1].t));

    let path = dir.path().join("m.json");
    save_model(&model, &path).unwrap();
    let loaded = load_model(&path).unwrap();
    assert_eq!(loaded, model);

    let a = classify(&loaded, &ds).unwrap();
    let report = build_report(&loaded, &a, &ds).unwrap();
    assert_eq!(report.weighted_purity(), Some(1.0));
    assert_eq!(report.per_neuron.len(), 16);
    assert_eq!(a.activation_counts().iter().sum::<u64>(), 60);

    let json: serde_json::Value = serde_json::from_str(&report.to_json_pretty().unwrap()).unwrap();
    assert_eq!(json["metrics"]["activation_density"].as_f64(), Some(activation_density(&a)));
}
