use std::fs::OpenOptions;
use std::io::{BufRead, Write};
use std::path::Path;

use chartcn::augmentation::{convert_mythes, AugmentConfig, Augmenter, Thesaurus};
use chartcn::baselines::{build_vocabulary, featurize_centroids, train_logreg, CentroidCodebook, Embeddings, LogRegOptions};
use chartcn::config::KeyValues;
use chartcn::datakit::{dedupe, load_csv, read_records, write_records, Dataset, DatasetSpec};
use chartcn::metrics::{argmax, ConfusionMatrix};
use chartcn::model::{Checkpoint, Model, ModelConfig};
use chartcn::trainer::{evaluate, TextExample, TrainSchedule, Trainer};
use chartcn::viz::first_layer_image;
use chartcn::{seeded_rng, Error};

use crate::{AugmentArgs, BaselineArgs, BaselineKind, ConvertArgs, EvalArgs, Failure, PredictArgs, TrainArgs, VizArgs};

type CmdResult = Result<(), Failure>;

fn load_dataset(path: &Path, spec: &DatasetSpec) -> Result<Dataset, Failure> {
    let mut data = load_csv(path, spec)?;
    let report = data.report.clone();
    let mut note = format!("{}: {} rows", path.display(), report.rows);
    if report.dropped_labels > 0 {
        note += &format!(", {} dropped by label", report.dropped_labels);
    }
    if report.outside_length_window > 0 {
        note += &format!(", {} outside the length window", report.outside_length_window);
    }
    if let Some(fields) = &spec.dedupe_fields {
        let (kept, removed) = dedupe(&data, fields);
        data = kept;
        note += &format!(", {removed} duplicates removed");
    }
    eprintln!("{note}, {} samples kept", data.len());
    Ok(data)
}

/// Dataset description for a trained model: `classes` defaults to the
/// checkpoint's class names (or count).
fn spec_for_model(mut kv: KeyValues, config: &ModelConfig) -> Result<DatasetSpec, Failure> {
    let inherit = !kv.contains("classes");
    if inherit {
        kv.set("classes", config.class_count.to_string())?;
    }
    let mut spec = DatasetSpec::from_config(&kv)?;
    if spec.class_count() != config.class_count {
        return Err(Failure::usage(format!(
            "the checkpoint has {} classes but the dataset description has {}",
            config.class_count,
            spec.class_count()
        )));
    }
    if inherit && config.class_names.len() == config.class_count {
        spec.class_names = config.class_names.clone();
    }
    Ok(spec)
}

pub fn train(a: TrainArgs) -> CmdResult {
    let kv = a.config.resolve()?;
    let spec = DatasetSpec::from_config(&kv)?;
    let examples = load_dataset(&a.data, &spec)?.examples();
    let test = match &a.test {
        Some(p) => Some(load_dataset(p, &spec)?.examples()),
        None => None,
    };
    let schedule = TrainSchedule::from_config(&kv)?;
    let (mut model, mut trainer) = match &a.resume {
        Some(path) => {
            let ck = Checkpoint::load(path)?;
            if ck.model.config().class_count != spec.class_count() {
                return Err(Failure::usage(format!(
                    "{} has {} classes but the dataset description has {}",
                    path.display(),
                    ck.model.config().class_count,
                    spec.class_count()
                )));
            }
            let trainer = Trainer::resume(&ck.model, schedule, &ck.state)?;
            (ck.model, trainer)
        }
        None => {
            let model = Model::<f32>::build(ModelConfig::from_config(&kv, spec.class_names.clone())?)?;
            let trainer = Trainer::new(&model, schedule, model.config().seed);
            (model, trainer)
        }
    };
    let augmenter = match &a.thesaurus {
        Some(path) => Some(Augmenter::new(
            Thesaurus::load(path)?,
            AugmentConfig {
                p: kv.parsed_or("p", 0.5)?,
                q: kv.parsed_or("q", 0.5)?,
                seed: model.config().seed,
            },
        )?),
        None => None,
    };
    let mut log = match &a.log {
        Some(path) => Some(
            OpenOptions::new()
                .create(true)
                .append(true)
                .open(path)
                .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?,
        ),
        None => None,
    };
    trainer.train(&mut model, &examples, augmenter.as_ref(), |stats, model, trainer| {
        let mut line = stats.to_string();
        if let Some(test) = &test {
            line += &format!(" test_accuracy={:.4}", evaluate(model, test)?.accuracy);
        }
        println!("{line}");
        if let (Some(file), Some(path)) = (log.as_mut(), a.log.as_ref()) {
            writeln!(file, "{line}").map_err(|e| Error::Internal(format!("{}: {e}", path.display())))?;
        }
        Checkpoint {
            model: model.clone(),
            state: trainer.state(),
        }
        .save(&a.out)
    })?;
    Checkpoint {
        model,
        state: trainer.state(),
    }
    .save(&a.out)?;
    Ok(())
}

pub fn eval(a: EvalArgs) -> CmdResult {
    let model = Model::<f32>::load(&a.checkpoint)?;
    let spec = spec_for_model(a.config.resolve()?, model.config())?;
    let data = load_dataset(&a.data, &spec)?;
    let e = evaluate(&model, &data.examples())?;
    println!("accuracy={:.4}", e.accuracy);
    println!("loss={:.6}", e.mean_loss);
    println!("samples={}", data.len());
    if let Some(path) = &a.confusion {
        write_confusion(path, &e.confusion, &spec.class_names)?;
    }
    Ok(())
}

fn write_confusion(path: &Path, cm: &ConfusionMatrix, names: &[String]) -> CmdResult {
    std::fs::write(path, cm.to_csv(names)).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

pub fn predict(a: PredictArgs) -> CmdResult {
    let model = Model::<f32>::load(&a.checkpoint)?;
    let classify = |text: &str| -> CmdResult {
        let probs = model.predict_text(text)?;
        let best = argmax(&probs);
        let listed: Vec<String> = probs
            .iter()
            .enumerate()
            .map(|(c, p)| format!("{}:{p:.6}", model.config().class_name(c)))
            .collect();
        println!("class={} probabilities={}", model.config().class_name(best), listed.join(","));
        Ok(())
    };
    match &a.text {
        Some(text) => classify(text),
        None => {
            for line in std::io::stdin().lock().lines() {
                let line = line.map_err(|e| Failure::usage(format!("stdin: {e}")))?;
                classify(&line)?;
            }
            Ok(())
        }
    }
}

pub fn augment(a: AugmentArgs) -> CmdResult {
    let augmenter = Augmenter::new(
        Thesaurus::load(&a.thesaurus)?,
        AugmentConfig {
            p: a.p,
            q: a.q,
            seed: a.seed,
        },
    )?;
    let mut records = read_records(&a.data)?;
    let mut rng = seeded_rng(a.seed);
    for rec in &mut records {
        for field in rec.fields.iter_mut().skip(1) {
            *field = augmenter.augment(field, &mut rng);
        }
    }
    write_records(&a.out, &records)?;
    eprintln!("augmented {} rows", records.len());
    Ok(())
}

type Featurizer = Box<dyn Fn(&str) -> Vec<f64>>;

pub fn baseline(a: BaselineArgs) -> CmdResult {
    if a.kind == BaselineKind::Centroids && a.embeddings.is_none() {
        return Err(Failure::usage(
            "baseline --kind centroids needs --embeddings <FILE> (one `word v1 ... vd` line per word)",
        ));
    }
    let kv = a.config.resolve()?;
    if !kv.contains("classes") {
        return Err(Failure::usage("baseline needs --classes or a --config file that sets `classes`"));
    }
    let spec = DatasetSpec::from_config(&kv)?;
    let train = load_dataset(&a.data, &spec)?.examples();
    let test = match &a.test {
        Some(p) => Some(load_dataset(p, &spec)?.examples()),
        None => None,
    };
    let (name, featurize): (&str, Featurizer) = match a.kind {
        BaselineKind::Bow => {
            let vocab = build_vocabulary(train.iter().map(|e| e.text.as_str()), a.vocab_size);
            let binary = a.binary;
            ("bow", Box::new(move |t: &str| vocab.featurize(t, binary)))
        }
        BaselineKind::Centroids => {
            let path = a.embeddings.as_ref().expect("checked above");
            let emb = Embeddings::load(path)?;
            let book = CentroidCodebook::build(emb, a.k, a.baseline_seed, a.kmeans_iters)?;
            ("centroids", Box::new(move |t: &str| featurize_centroids(t, &book)))
        }
    };
    let feats = |data: &[TextExample]| -> (Vec<Vec<f64>>, Vec<usize>) {
        data.iter().map(|e| (featurize(&e.text), e.label)).unzip()
    };
    let (xs, ys) = feats(&train);
    let options = LogRegOptions {
        epochs: a.train_epochs,
        lr: a.learning_rate,
        batch_size: a.minibatch,
        seed: a.baseline_seed,
    };
    let (model, _) = train_logreg(&xs, &ys, spec.class_count(), &options)?;
    let score = |xs: &[Vec<f64>], ys: &[usize]| -> Result<ConfusionMatrix, Failure> {
        let preds = xs.iter().map(|x| model.predict(x)).collect::<chartcn::Result<Vec<_>>>()?;
        Ok(ConfusionMatrix::from_predictions(
            spec.class_count(),
            ys.iter().copied().zip(preds),
        )?)
    };
    let train_cm = score(&xs, &ys)?;
    let eval_cm = match &test {
        Some(test) => {
            let (tx, ty) = feats(test);
            score(&tx, &ty)?
        }
        None => train_cm.clone(),
    };
    println!(
        "baseline={name} features={} train_accuracy={:.4} accuracy={:.4}",
        model.feature_count(),
        train_cm.accuracy(),
        eval_cm.accuracy()
    );
    if let Some(path) = &a.confusion {
        write_confusion(path, &eval_cm, &spec.class_names)?;
    }
    Ok(())
}

pub fn viz_weights(a: VizArgs) -> CmdResult {
    let model = Model::<f32>::load(&a.checkpoint)?;
    let img = first_layer_image(&model, a.count, a.columns, a.seed)?;
    img.save_pgm(&a.out)?;
    eprintln!("wrote {}x{} image to {}", img.width, img.height, a.out.display());
    Ok(())
}

pub fn convert_thesaurus(a: ConvertArgs) -> CmdResult {
    let bytes = std::fs::read(&a.input).map_err(|e| Failure::usage(format!("{}: {e}", a.input.display())))?;
    let source = String::from_utf8_lossy(&bytes);
    let thesaurus = convert_mythes(&source)?;
    std::fs::write(&a.out, thesaurus.to_tsv()).map_err(|e| Failure::usage(format!("{}: {e}", a.out.display())))?;
    eprintln!("converted {} entries", thesaurus.len());
    Ok(())
}
