use std::path::Path;

use anyhow::Context;
use sparsetag_core::corpus::{
    iobes_to_bio, map_universal, read_conll_ner, read_conllu, read_conllx, subset_first_n,
    to_iobes, write_conll_ner, write_conllu, write_conllx, Dataset, NerFormat, PosColumn, TagMap,
    Task,
};
use sparsetag_core::crf::{self, CrfModel, TrainConfig};
use sparsetag_core::embeddings::{coverage as corpus_coverage, EmbeddingFormat, EmbeddingTable};
use sparsetag_core::eval::{entity_f1, token_accuracy, upsert_report, ReportRow, TagScheme};
use sparsetag_core::features;
use sparsetag_core::features::{dataset_features, ClusterTable, FeatureConfig, Scheme};
use sparsetag_core::io::write_atomic;
use sparsetag_core::scalar::format_sig6;
use sparsetag_core::sparse::{
    self, basis_statistics, sparsity_level, Dictionary, SparseCodes, SparseCodingConfig, Variant,
};

use crate::{
    require_file, usage, AnalyzeBasisArgs, CoverageArgs, DataFormat, EmbeddingFormatArg,
    EmbeddingInput, EncodeArgs, EvalArgs, LearnDictArgs, PosColumnArg, Resources, SchemeArg,
    TagArgs, TaskArg, TrainArgs, VariantArg,
};

type R<T = ()> = anyhow::Result<T>;

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Sc1 => Variant::Sc1,
            VariantArg::Sc3 => Variant::Sc3,
            VariantArg::Sc4 => Variant::Sc4,
        }
    }
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Sc => Scheme::Sc,
            SchemeArg::Dense => Scheme::Dense,
            SchemeArg::Brown => Scheme::Brown,
            SchemeArg::FrW => Scheme::FrW,
            SchemeArg::FrWc => Scheme::FrWc,
            SchemeArg::Wi => Scheme::Wi,
            SchemeArg::WiSc => Scheme::WiSc,
        }
    }
}

impl From<TaskArg> for Task {
    fn from(t: TaskArg) -> Self {
        match t {
            TaskArg::Pos => Task::Pos,
            TaskArg::Ner => Task::Ner,
        }
    }
}

impl From<EmbeddingFormatArg> for EmbeddingFormat {
    fn from(f: EmbeddingFormatArg) -> Self {
        match f {
            EmbeddingFormatArg::Text => EmbeddingFormat::Text,
            EmbeddingFormatArg::Word2VecText => EmbeddingFormat::Word2VecText,
        }
    }
}

impl From<PosColumnArg> for PosColumn {
    fn from(c: PosColumnArg) -> Self {
        match c {
            PosColumnArg::Fine => PosColumn::Fine,
            PosColumnArg::Coarse => PosColumn::Coarse,
        }
    }
}

impl DataFormat {
    fn task(self) -> Task {
        match self {
            DataFormat::Conllx | DataFormat::Conllu => Task::Pos,
            DataFormat::Ner2002 | DataFormat::Ner2003 => Task::Ner,
        }
    }
}

fn read_dataset(path: &Path, format: DataFormat, column: PosColumn) -> R<Dataset> {
    require_file(path, "corpus")?;
    let ds = match format {
        DataFormat::Conllx => read_conllx(path, column)?,
        DataFormat::Conllu => read_conllu(path)?,
        DataFormat::Ner2002 => read_conll_ner(path, NerFormat::Conll2002)?,
        DataFormat::Ner2003 => read_conll_ner(path, NerFormat::Conll2003)?,
    };
    Ok(ds)
}

fn write_dataset(path: &Path, format: DataFormat, ds: &Dataset) -> R {
    write_atomic(path, |w| match format {
        DataFormat::Conllx => write_conllx(w, ds),
        DataFormat::Conllu => write_conllu(w, ds),
        DataFormat::Ner2002 | DataFormat::Ner2003 => write_conll_ner(w, ds),
    })?;
    Ok(())
}

fn load_embeddings(path: &Path, format: EmbeddingFormatArg) -> R<EmbeddingTable<f64>> {
    require_file(path, "embedding file")?;
    Ok(EmbeddingTable::load(path, format.into())?)
}

fn load_input(input: &EmbeddingInput) -> R<EmbeddingTable<f64>> {
    load_embeddings(&input.embeddings, input.embedding_format)
}

/// Loaded lexical resources for a feature scheme.
struct Loaded {
    codes: Option<SparseCodes<f64>>,
    embeddings: Option<EmbeddingTable<f64>>,
    clusters: Option<ClusterTable>,
}

impl Loaded {
    fn load(args: &Resources, scheme: Scheme) -> R<Self> {
        let missing = |flag: &str| usage::<Self>(format!("scheme {scheme} requires --{flag}"));
        if scheme.needs_codes() && args.codes.is_none() {
            return missing("codes");
        }
        if scheme.needs_embeddings() && args.embeddings.is_none() {
            return missing("embeddings");
        }
        if scheme.needs_clusters() && args.clusters.is_none() {
            return missing("clusters");
        }
        let codes = match &args.codes {
            Some(p) if scheme.needs_codes() => {
                require_file(p, "codes file")?;
                Some(SparseCodes::read(p, None)?)
            }
            _ => None,
        };
        let embeddings = match &args.embeddings {
            Some(p) if scheme.needs_embeddings() => {
                Some(load_embeddings(p, args.embedding_format)?)
            }
            _ => None,
        };
        let clusters = match &args.clusters {
            Some(p) if scheme.needs_clusters() => {
                require_file(p, "cluster file")?;
                Some(ClusterTable::read(p)?)
            }
            _ => None,
        };
        Ok(Loaded {
            codes,
            embeddings,
            clusters,
        })
    }

    fn view(&self) -> features::Resources<'_, f64> {
        features::Resources {
            codes: self.codes.as_ref(),
            embeddings: self.embeddings.as_ref(),
            clusters: self.clusters.as_ref(),
        }
    }
}

pub fn learn_dict(a: LearnDictArgs) -> R {
    let table = load_input(&a.input)?;
    let config = SparseCodingConfig {
        variant: a.variant.into(),
        m: a.m,
        lambda: a.lambda,
        tau: a.tau,
        epochs: a.epochs,
        batch_size: a.batch_size,
        seed: a.seed,
        ..Default::default()
    };
    let learned = sparse::learn_dictionary(&table, &config)?;
    for e in &learned.history {
        eprintln!(
            "epoch {}\tobjective {:.6e}\tmax column norm {:.6}\tnonzeros {}",
            e.epoch, e.objective, e.max_column_norm, e.nonzeros
        );
    }
    write_atomic(&a.out_dict, |w| learned.dictionary.write(w))?;
    write_atomic(&a.out_codes, |w| learned.codes.write(w))?;
    eprintln!(
        "sparsity {:.4}",
        sparsity_level(&learned.codes, learned.dictionary.m())?
    );
    Ok(())
}

pub fn encode(a: EncodeArgs) -> R {
    require_file(&a.dict, "dictionary")?;
    let dict: Dictionary<f64> = Dictionary::read(&a.dict)?;
    let table = load_input(&a.input)?;
    let codes = sparse::encode(&dict, &table)?;
    write_atomic(&a.out_codes, |w| codes.write(w))?;
    eprintln!("sparsity {:.4}", sparsity_level(&codes, dict.m())?);
    Ok(())
}

pub fn train(a: TrainArgs) -> R {
    let task: Task = a.task.into();
    if a.format.task() != task {
        return usage(format!("format does not hold {} data", task.as_str()));
    }
    if a.iobes && task != Task::Ner {
        return usage("--iobes applies to NER only");
    }
    let scheme: Scheme = a.scheme.into();
    let resources = Loaded::load(&a.resources, scheme)?;
    let mut ds = read_dataset(&a.train, a.format, a.pos_column.into())?;
    if let Some(p) = &a.tagmap {
        require_file(p, "tag map")?;
        ds = map_universal(&ds, &TagMap::read(p)?)?;
    }
    if let Some(n) = a.first_n {
        if n == 0 {
            return usage("--first-n must be at least 1");
        }
        ds = subset_first_n(&ds, n)?;
    }
    if a.iobes {
        let (converted, repairs) = to_iobes(&ds)?;
        if repairs > 0 {
            eprintln!("warning: repaired {repairs} ill-formed BIO spans");
        }
        ds = converted;
    }
    let fconfig = FeatureConfig::new(scheme, a.window as usize)?;
    let xs = dataset_features(&ds, &fconfig, &resources.view())?;
    let ys = ds.labels();
    let config = TrainConfig {
        c1: a.c1,
        c2: a.c2,
        max_iterations: a.max_iterations,
        seed: a.seed,
        ..Default::default()
    };
    let (mut model, report) = crf::train(&xs, &ys, &config)?;
    model.set_meta("task", task.as_str())?;
    model.set_meta("scheme", scheme.as_str())?;
    model.set_meta("window", a.window.to_string())?;
    model.set_meta("iobes", a.iobes.to_string())?;
    model.set_meta("seed", a.seed.to_string())?;
    if let Some(c) = &resources.codes {
        model.set_meta("codes_m", c.m().to_string())?;
    }
    if let Some(e) = &resources.embeddings {
        model.set_meta("embedding_dim", e.dim().to_string())?;
    }
    write_atomic(&a.out, |w| model.write(w))?;
    eprintln!(
        "trained on {} sentences: {} iterations, objective {:.6e}, {} active emission weights ({:?})",
        ds.len(),
        report.iterations,
        report.objective,
        report.active_emissions,
        report.stop
    );
    Ok(())
}

fn meta<'a>(model: &'a CrfModel<f64>, key: &str) -> R<&'a str> {
    model
        .meta_value(key)
        .with_context(|| format!("model has no `{key}` entry"))
}

pub fn tag(a: TagArgs) -> R {
    require_file(&a.model, "model")?;
    let model: CrfModel<f64> = CrfModel::read(&a.model)?;
    let scheme: Scheme = meta(&model, "scheme")?.parse()?;
    let window: usize = meta(&model, "window")?.parse()?;
    let task: Task = meta(&model, "task")?.parse()?;
    let iobes = model.meta_value("iobes") == Some("true");
    if a.format.task() != task {
        return usage(format!(
            "model was trained for {}, input format differs",
            task.as_str()
        ));
    }
    let resources = Loaded::load(&a.resources, scheme)?;
    if let (Some(c), Some(m)) = (&resources.codes, model.meta_value("codes_m")) {
        if c.m().to_string() != m {
            return usage(format!(
                "codes have m = {}, model was trained with m = {m}",
                c.m()
            ));
        }
    }
    if let (Some(e), Some(d)) = (&resources.embeddings, model.meta_value("embedding_dim")) {
        if e.dim().to_string() != d {
            return usage(format!(
                "embeddings have dimension {}, model expects {d}",
                e.dim()
            ));
        }
    }
    let ds = read_dataset(&a.input, a.format, PosColumn::Fine)?;
    let xs = dataset_features(&ds, &FeatureConfig::new(scheme, window)?, &resources.view())?;
    let mut preds: Vec<Vec<String>> = xs.iter().map(|x| model.tag_labels(x)).collect();
    if iobes {
        preds = preds
            .iter()
            .map(|p| iobes_to_bio(p))
            .collect::<Result<_, _>>()?;
    }
    write_dataset(&a.out, a.format, &ds.with_labels(&preds)?)?;
    Ok(())
}

pub fn eval(a: EvalArgs) -> R {
    let column: PosColumn = a.pos_column.into();
    let mut gold = read_dataset(&a.gold, a.format, column)?;
    let pred = read_dataset(&a.pred, a.format, column)?;
    if let Some(p) = &a.tagmap {
        require_file(p, "tag map")?;
        gold = map_universal(&gold, &TagMap::read(p)?)?;
    }
    let task = a.format.task();
    let value = match task {
        Task::Pos => token_accuracy(&gold, &pred.labels())?,
        Task::Ner => {
            let r = entity_f1(&gold, &pred.labels(), TagScheme::Iobes)?;
            for (ty, c) in &r.per_type {
                eprintln!(
                    "{ty}\tprecision {:.4}\trecall {:.4}\tf1 {:.4}\t({} correct, {} predicted, {} gold)",
                    c.precision(),
                    c.recall(),
                    c.f1(),
                    c.correct,
                    c.predicted,
                    c.gold
                );
            }
            r.overall.f1()
        }
    };
    let mut row = ReportRow::new(&a.treebank, task, &a.scheme, value);
    row.lambda = a.lambda;
    if let Some(p) = &a.codes {
        require_file(p, "codes file")?;
        let codes: SparseCodes<f64> = SparseCodes::read(p, None)?;
        row.m = Some(codes.m());
        row.sparsity = Some(sparsity_level(&codes, codes.m())?);
    }
    println!("{row}");
    if let Some(path) = &a.report {
        upsert_report(path, &row)?;
    }
    Ok(())
}

pub fn coverage(a: CoverageArgs) -> R {
    let table = load_input(&a.input)?;
    let ds = read_dataset(&a.data, a.format, PosColumn::Fine)?;
    let c = corpus_coverage(&table, &ds)?;
    println!(
        "token_coverage\t{:.4}\t{}/{}",
        c.token_coverage, c.tokens_covered, c.tokens_total
    );
    println!(
        "type_coverage\t{:.4}\t{}/{}",
        c.type_coverage, c.types_covered, c.types_total
    );
    Ok(())
}

pub fn analyze_basis(a: AnalyzeBasisArgs) -> R {
    require_file(&a.dict, "dictionary")?;
    require_file(&a.codes, "codes file")?;
    let dict: Dictionary<f64> = Dictionary::read(&a.dict)?;
    let codes: SparseCodes<f64> = SparseCodes::read(&a.codes, Some(dict.m()))?;
    let report = basis_statistics(&dict, &codes)?;
    write_atomic(&a.out, |w| {
        writeln!(w, "basis\tnorm\tfrequency")?;
        for (j, (n, f)) in report.norms.iter().zip(&report.frequencies).enumerate() {
            writeln!(w, "{j}\t{}\t{}", format_sig6(*n), format_sig6(*f))?;
        }
        Ok(())
    })?;
    println!("pearson\t{:.6}", report.correlation);
    Ok(())
}
