// Command-line driver: dataset construction, training, evaluation
// protocols, LLM experiments, grid search, and report rendering.
#include <algorithm>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "crossclone/checkpoint.hpp"
#include "crossclone/contrastive.hpp"
#include "crossclone/corpus.hpp"
#include "crossclone/encoder.hpp"
#include "crossclone/errors.hpp"
#include "crossclone/evaluation.hpp"
#include "crossclone/llm.hpp"
#include "crossclone/report.hpp"
#include "crossclone/splits.hpp"
#include "crossclone/stats.hpp"

namespace fs = std::filesystem;
using namespace crossclone;

namespace {

// Everything a single invocation needs; subcommands bind flags onto the
// relevant fields. Persisted to run_config.ini after each run so the run
// can be replayed with --config.
struct RunConfig {
    // paths
    std::string corpus_dir;
    std::string test_corpus_dir;
    std::string snippets_path;
    std::string pairs_path;
    std::string vectors_path;
    std::string out_dir = ".";
    // dataset
    SamplerConfig sampler;
    SynthSpec synth;
    // model
    std::string variant = "cl"; // cl | baseline | both (eval only)
    std::string head = "batchnorm";
    EncoderConfig encoder;
    ContrastiveConfig train_cfg;
    // protocols
    std::string protocol = "random";
    double train_fraction = 0.8;
    double reference_f1 = 0.0;
    std::size_t jobs = 0;
    // grid search
    std::vector<double> margins{0.5, 5.0, 50.0};
    std::vector<std::string> heads{"identity", "batchnorm"};
    // llm
    LlmConfig llm;
    std::string prompt_kind = "contrastive";
    std::string mode = "unseen";
    std::size_t n_eval = 404;
    std::vector<std::string> compare;
    std::size_t folds = 10;
    std::string alternative = "two-sided";
    // report
    std::string input_csv;
    std::string transcript_path;
    // shared
    std::uint64_t seed = 0;
};

ProjectionKind parse_head(const std::string& name) {
    if (name == "identity") return ProjectionKind::identity;
    if (name == "batchnorm") return ProjectionKind::batchnorm;
    throw ValidationError("unknown projection head '" + name + "'");
}

ModelVariant parse_variant(const std::string& name) {
    if (name == "cl") return ModelVariant::contrastive;
    if (name == "baseline") return ModelVariant::baseline;
    throw ValidationError("unknown model variant '" + name + "'");
}

Alternative parse_alternative(const std::string& name) {
    if (name == "less") return Alternative::less;
    if (name == "greater") return Alternative::greater;
    if (name == "two-sided" || name == "two_sided") return Alternative::two_sided;
    throw ValidationError("unknown alternative '" + name + "'");
}

fs::path ensure_out_dir(const RunConfig& rc) {
    const fs::path out(rc.out_dir);
    fs::create_directories(out);
    return out;
}

void persist_run_config(const CLI::App& app, const fs::path& out) {
    std::ofstream f(out / "run_config.ini", std::ios::binary);
    if (!f) throw DataError("cannot write " + (out / "run_config.ini").string());
    f << app.config_to_str(true, true);
}

void print_histogram(const PairCorpus& corpus) {
    const auto hist = functionality_histogram(corpus);
    for (const auto& [functionality, counts] : hist) {
        std::printf("  %-24s %zu clones / %zu non-clones\n", functionality.c_str(),
                    counts.clones, counts.nonclones);
    }
    std::printf("retained %zu functionalities, %zu snippets, %zu pairs\n", hist.size(),
                corpus.snippets.size(), corpus.pairs.size());
}

void print_metrics_line(const char* label, const MetricsTuple& m) {
    std::printf("%-28s accuracy=%.4f precision=%.4f recall=%.4f f1=%.4f\n", label, m.accuracy,
                m.precision, m.recall, m.f1);
}

// Binds the encoder and training flags shared by train/eval/gridsearch.
void add_model_options(CLI::App* sub, RunConfig& rc) {
    sub->add_option("--margin", rc.train_cfg.margin, "Contrastive margin m")
        ->capture_default_str();
    sub->add_option("--tau", rc.train_cfg.tau, "Cosine threshold for the clone decision")
        ->capture_default_str();
    sub->add_option("--lr", rc.train_cfg.learning_rate, "SGD learning rate")
        ->capture_default_str();
    sub->add_option("--batch", rc.train_cfg.batch_size, "Mini-batch size (pairs)")
        ->capture_default_str();
    sub->add_option("--epochs", rc.train_cfg.epochs, "Training epochs")->capture_default_str();
    sub->add_option("--g", rc.head, "Projection head: identity | batchnorm")
        ->check(CLI::IsMember({"identity", "batchnorm"}))
        ->capture_default_str();
    sub->add_option("--dim", rc.encoder.dim, "Embedding dimension")->capture_default_str();
    sub->add_option("--min-freq", rc.encoder.min_frequency,
                    "Minimum token frequency for the vocabulary")
        ->capture_default_str();
    sub->add_option("--oov-buckets", rc.encoder.oov_buckets,
                    "Hash buckets for out-of-vocabulary tokens")
        ->capture_default_str();
    sub->add_option("--init-scale", rc.encoder.init_scale,
                    "Stddev of the Gaussian embedding init")
        ->capture_default_str();
    sub->add_option("--vectors", rc.vectors_path,
                    "Precomputed snippet vectors (JSONL); replaces the trainable encoder")
        ->check(CLI::ExistingFile);
}

ExperimentConfig experiment_config(const RunConfig& rc, const ImportedEncoder* imported) {
    ExperimentConfig cfg;
    cfg.head_kind = parse_head(rc.head);
    cfg.encoder = rc.encoder;
    cfg.encoder.seed = rc.seed;
    cfg.train = rc.train_cfg;
    cfg.train.seed = rc.seed;
    cfg.imported = imported;
    return cfg;
}

// ---------------------------------------------------------------------------
// Subcommand bodies
// ---------------------------------------------------------------------------

void cmd_dataset_build(const CLI::App& app, RunConfig& rc) {
    const fs::path out = ensure_out_dir(rc);
    const PairCorpus raw = load_corpus(rc.snippets_path, rc.pairs_path);
    rc.sampler.seed = rc.seed;
    const PairCorpus balanced = sample_balanced(raw, rc.sampler);
    save_corpus(balanced, out);
    std::printf("balanced corpus written to %s\n", out.string().c_str());
    print_histogram(balanced);
    persist_run_config(app, out);
}

void cmd_dataset_synth(const CLI::App& app, RunConfig& rc) {
    const fs::path out = ensure_out_dir(rc);
    rc.synth.seed = rc.seed;
    const PairCorpus corpus = synthesize_corpus(rc.synth);
    save_corpus(corpus, out);
    std::printf("synthetic corpus written to %s\n", out.string().c_str());
    print_histogram(corpus);
    persist_run_config(app, out);
}

void cmd_train(const CLI::App& app, RunConfig& rc) {
    const fs::path out = ensure_out_dir(rc);
    const PairCorpus corpus = load_corpus(rc.corpus_dir);
    std::vector<std::size_t> all(corpus.pairs.size());
    std::iota(all.begin(), all.end(), std::size_t{0});

    rc.encoder.seed = rc.seed;
    rc.train_cfg.seed = rc.seed;
    rc.train_cfg.validate();

    ImportedEncoder imported;
    Encoder encoder;
    if (!rc.vectors_path.empty()) {
        imported = import_embeddings(rc.vectors_path);
        encoder = Encoder(std::move(imported));
    } else {
        encoder = Encoder(EmbeddingEncoder::build(corpus.snippets, rc.encoder));
    }

    TrainTrace trace;
    const fs::path checkpoint = out / "checkpoint.json";
    if (parse_variant(rc.variant) == ModelVariant::contrastive) {
        ContrastiveModel model;
        model.config = rc.train_cfg;
        model.encoder = std::move(encoder);
        model.head = rc.head == "identity" ? ProjectionHead::identity()
                                           : ProjectionHead::batchnorm(model.encoder.dim());
        trace = train_contrastive(model, corpus, all);
        save_checkpoint(model, checkpoint);
        std::printf("trained contrastive model: margin=%g g=%s tau=%g lr=%g batch=%zu "
                    "epochs=%zu seed=%llu dim=%d\n",
                    model.config.margin, rc.head.c_str(), model.config.tau,
                    model.config.learning_rate, model.config.batch_size, model.config.epochs,
                    static_cast<unsigned long long>(model.config.seed), model.encoder.dim());
    } else {
        BaselineModel model;
        model.config = rc.train_cfg;
        model.encoder = std::move(encoder);
        trace = train_baseline(model, corpus, all);
        save_checkpoint(model, checkpoint);
        std::printf("trained baseline model: lr=%g batch=%zu epochs=%zu seed=%llu dim=%d\n",
                    model.config.learning_rate, model.config.batch_size, model.config.epochs,
                    static_cast<unsigned long long>(model.config.seed), model.encoder.dim());
    }

    nlohmann::json trace_doc{{"epoch_mean_loss", trace.epoch_mean_loss}};
    std::ofstream tf(out / "loss_trace.json", std::ios::binary);
    tf << trace_doc.dump(2) << '\n';
    if (!trace.epoch_mean_loss.empty()) {
        std::printf("loss: first epoch %.6f, last epoch %.6f\n", trace.epoch_mean_loss.front(),
                    trace.epoch_mean_loss.back());
    }
    std::printf("checkpoint written to %s\n", checkpoint.string().c_str());
    persist_run_config(app, out);
}

void cmd_eval(const CLI::App& app, RunConfig& rc, bool reference_requested) {
    const fs::path out = ensure_out_dir(rc);
    const PairCorpus corpus = load_corpus(rc.corpus_dir);

    ImportedEncoder imported;
    const ImportedEncoder* imported_ptr = nullptr;
    if (!rc.vectors_path.empty()) {
        imported = import_embeddings(rc.vectors_path);
        imported_ptr = &imported;
    }

    std::vector<ModelVariant> variants;
    if (rc.variant == "both") {
        variants = {ModelVariant::contrastive, ModelVariant::baseline};
    } else {
        variants = {parse_variant(rc.variant)};
    }

    // Cross-dataset evaluation spans two corpora; the others split one.
    PairCorpus test_corpus;
    std::vector<SplitPlan> plans;
    if (rc.protocol == "random") {
        plans = {split_random(corpus, rc.train_fraction, rc.seed)};
    } else if (rc.protocol == "one-vs-rest") {
        plans = split_one_vs_rest(corpus);
    } else if (rc.protocol == "cross") {
        if (rc.test_corpus_dir.empty()) {
            throw ValidationError("eval: --test-corpus is required for --protocol cross");
        }
        test_corpus = load_corpus(rc.test_corpus_dir);
        plans = {split_cross_dataset(corpus, test_corpus)};
    } else {
        throw ValidationError("eval: unknown protocol '" + rc.protocol + "'");
    }

    std::vector<ReportRow> rows;
    std::vector<NamedTest> tests;
    std::vector<std::vector<double>> f1_by_variant;
    for (const ModelVariant variant : variants) {
        ExperimentConfig cfg = experiment_config(rc, imported_ptr);
        cfg.variant = variant;
        std::vector<ExperimentOutcome> outcomes;
        if (rc.protocol == "cross") {
            outcomes.push_back(run_plan(corpus, test_corpus, plans[0], cfg));
        } else {
            outcomes = run_plans(corpus, plans, cfg, rc.jobs);
        }
        std::vector<double> f1s;
        MetricsTuple mean;
        for (const auto& outcome : outcomes) {
            rows.push_back(outcome.row);
            f1s.push_back(outcome.row.metrics.f1);
            mean.accuracy += outcome.row.metrics.accuracy;
            mean.precision += outcome.row.metrics.precision;
            mean.recall += outcome.row.metrics.recall;
            mean.f1 += outcome.row.metrics.f1;
            print_metrics_line(outcome.row.experiment_id.c_str(), outcome.row.metrics);
        }
        if (rc.protocol == "one-vs-rest") {
            const double k = static_cast<double>(outcomes.size());
            mean.accuracy /= k;
            mean.precision /= k;
            mean.recall /= k;
            mean.f1 /= k;
            rows.push_back(ReportRow{"mean", "one-vs-rest", variant_name(cfg.variant), mean});
            print_metrics_line("mean", mean);
        }
        if (reference_requested) {
            try {
                tests.push_back(NamedTest{
                    "f1_vs_reference:" + variant_name(cfg.variant),
                    wilcoxon_signed_rank(f1s, rc.reference_f1, Alternative::less)});
            } catch (const DataError& e) {
                std::fprintf(stderr, "warning: reference test skipped: %s\n", e.what());
            }
        }
        f1_by_variant.push_back(std::move(f1s));
    }
    if (variants.size() == 2) {
        try {
            tests.push_back(NamedTest{
                "contrastive_vs_baseline",
                wilcoxon_paired(f1_by_variant[0], f1_by_variant[1], Alternative::two_sided)});
        } catch (const DataError& e) {
            std::fprintf(stderr, "warning: paired test skipped: %s\n", e.what());
        }
    }

    write_report_csv(rows, out / "report.csv");
    write_report_md(rows, out / "report.md");
    if (!tests.empty()) {
        write_stats_json(tests, out / "stats.json");
        for (const auto& t : tests) {
            std::printf("%s: statistic=%.4f p=%.6f (%s, %s, n=%zu, r=%.4f)\n", t.name.c_str(),
                        t.result.statistic, t.result.p_value,
                        t.result.method == PValueMethod::exact ? "exact" : "normal approx",
                        t.result.alternative == Alternative::less
                            ? "less"
                            : (t.result.alternative == Alternative::greater ? "greater"
                                                                            : "two-sided"),
                        t.result.n, t.result.rank_biserial);
        }
    }
    std::printf("report written to %s\n", (out / "report.csv").string().c_str());
    persist_run_config(app, out);
}

void cmd_gridsearch(const CLI::App& app, RunConfig& rc) {
    const fs::path out = ensure_out_dir(rc);
    const PairCorpus corpus = load_corpus(rc.corpus_dir);
    const SplitPlan plan = split_random(corpus, rc.train_fraction, rc.seed);

    std::vector<ProjectionKind> kinds;
    for (const auto& name : rc.heads) kinds.push_back(parse_head(name));

    EncoderConfig enc_cfg = rc.encoder;
    enc_cfg.seed = rc.seed;
    ContrastiveConfig train_cfg = rc.train_cfg;
    train_cfg.seed = rc.seed;
    const GridResult grid =
        grid_search(corpus, plan.train, plan.test, rc.margins, kinds, enc_cfg, train_cfg);

    std::ofstream csv(out / "grid.csv", std::ios::binary);
    csv << "margin,head,accuracy,precision,recall,f1,best\n";
    for (std::size_t i = 0; i < grid.cells.size(); ++i) {
        const GridCell& cell = grid.cells[i];
        const char* head = cell.kind == ProjectionKind::identity ? "identity" : "batchnorm";
        char label[64];
        std::snprintf(label, sizeof(label), "m=%g g=%s%s", cell.margin, head,
                      i == grid.best ? " [best]" : "");
        print_metrics_line(label, cell.metrics);
        char line[256];
        std::snprintf(line, sizeof(line), "%.17g,%s,%.17g,%.17g,%.17g,%.17g,%d\n", cell.margin,
                      head, cell.metrics.accuracy, cell.metrics.precision, cell.metrics.recall,
                      cell.metrics.f1, i == grid.best ? 1 : 0);
        csv << line;
    }
    const GridCell& best = grid.cells[grid.best];
    std::printf("best cell: m=%g g=%s (validation F1 %.4f)\n", best.margin,
                best.kind == ProjectionKind::identity ? "identity" : "batchnorm",
                best.metrics.f1);
    std::printf("grid written to %s\n", (out / "grid.csv").string().c_str());
    persist_run_config(app, out);
}

void cmd_llm(const CLI::App& app, RunConfig& rc, bool endpoint_given) {
    const fs::path out = ensure_out_dir(rc);
    if (!rc.compare.empty()) {
        const auto a = read_transcript(rc.compare[0]);
        const auto b = read_transcript(rc.compare[1]);
        const auto [items_a, items_b] = paired_items(a, b);
        const KfoldComparison cmp =
            kfold_f1_compare(items_a, items_b, rc.folds, rc.seed, parse_alternative(rc.alternative));
        std::printf("paired items: %zu, folds: %zu\n", items_a.size(), cmp.f1_a.size());
        for (std::size_t i = 0; i < cmp.f1_a.size(); ++i) {
            std::printf("  fold %2zu: F1 %.4f vs %.4f%s\n", i + 1, cmp.f1_a[i], cmp.f1_b[i],
                        cmp.degenerate_fold[i] ? " (degenerate)" : "");
        }
        std::printf("wilcoxon: statistic=%.4f p=%.6f (%s, n=%zu, r=%.4f)\n", cmp.test.statistic,
                    cmp.test.p_value,
                    cmp.test.method == PValueMethod::exact ? "exact" : "normal approx",
                    cmp.test.n, cmp.test.rank_biserial);
        write_stats_json({NamedTest{"llm_compare", cmp.test}}, out / "stats.json");
        std::printf("stats written to %s\n", (out / "stats.json").string().c_str());
        persist_run_config(app, out);
        return;
    }

    if (!endpoint_given) {
        throw ValidationError("llm: --endpoint is required unless --compare is given");
    }
    const PairCorpus corpus = load_corpus(rc.corpus_dir);
    const PromptKind kind =
        rc.prompt_kind == "contrastive" ? PromptKind::contrastive : PromptKind::baseline;
    const SelectionMode mode{rc.mode == "seen" ? ExampleMode::seen : ExampleMode::unseen,
                             rc.seed};
    const fs::path transcript = out / "transcript.jsonl";
    const LlmExperimentResult result =
        run_llm_experiment(rc.llm, corpus, kind, mode, rc.n_eval, transcript);

    const std::string protocol = "llm-" + rc.prompt_kind + "-" + rc.mode;
    print_metrics_line(protocol.c_str(), result.summary.metrics);
    std::printf("parseable=%zu unparseable=%zu\n", result.summary.parseable,
                result.summary.unparseable);
    const std::vector<ReportRow> rows{
        ReportRow{"llm", protocol, rc.prompt_kind, result.summary.metrics}};
    write_report_csv(rows, out / "report.csv");
    write_report_md(rows, out / "report.md");
    std::printf("transcript written to %s\n", transcript.string().c_str());
    persist_run_config(app, out);
}

void cmd_report(const CLI::App& app, RunConfig& rc) {
    const fs::path out = ensure_out_dir(rc);
    if (!rc.input_csv.empty() && !rc.transcript_path.empty()) {
        throw ValidationError("report: give either --input or --transcript, not both");
    }
    if (!rc.input_csv.empty()) {
        const auto rows = read_report_csv(rc.input_csv);
        write_report_md(rows, out / "report.md");
        std::printf("rendered %zu rows to %s\n", rows.size(),
                    (out / "report.md").string().c_str());
    } else if (!rc.transcript_path.empty()) {
        const auto records = read_transcript(rc.transcript_path);
        const TranscriptMetrics tm = metrics_from_records(records);
        print_metrics_line("transcript", tm.metrics);
        std::printf("parseable=%zu unparseable=%zu records=%zu\n", tm.parseable, tm.unparseable,
                    records.size());
        const std::string kind =
            records.front().spec.kind == PromptKind::contrastive ? "contrastive" : "baseline";
        const std::string mode =
            records.front().spec.mode == ExampleMode::seen ? "seen" : "unseen";
        const std::vector<ReportRow> rows{
            ReportRow{"llm-offline", "llm-" + kind + "-" + mode, kind, tm.metrics}};
        write_report_csv(rows, out / "report.csv");
    } else {
        throw ValidationError("report: one of --input or --transcript is required");
    }
    persist_run_config(app, out);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cross-functionality code-clone detection toolkit"};
    app.set_config("--config", "", "Read options from an INI file (flags override)");
    app.require_subcommand(1);
    RunConfig rc;

    // dataset ---------------------------------------------------------------
    auto* dataset = app.add_subcommand("dataset", "Build or synthesize pair corpora");
    dataset->require_subcommand(1);
    auto* dataset_build =
        dataset->add_subcommand("build", "Balance a raw corpus by functionality-aware sampling");
    dataset_build->add_option("--snippets", rc.snippets_path, "snippets.jsonl of the raw corpus")
        ->required()
        ->check(CLI::ExistingFile);
    dataset_build->add_option("--pairs", rc.pairs_path, "pairs.jsonl of the raw corpus")
        ->required()
        ->check(CLI::ExistingFile);
    dataset_build->add_option("--cap", rc.sampler.per_class_cap,
                              "Pairs kept per class per functionality (M)")
        ->capture_default_str();
    dataset_build->add_option("--seed", rc.seed, "Sampling seed")->capture_default_str();
    dataset_build->add_option("--out", rc.out_dir, "Output directory")->capture_default_str();

    auto* dataset_synth = dataset->add_subcommand("synth", "Generate a synthetic corpus");
    dataset_synth
        ->add_option("--functionalities", rc.synth.n_functionalities,
                     "Number of functionalities")
        ->capture_default_str();
    dataset_synth
        ->add_option("--pairs", rc.synth.pairs_per_functionality,
                     "Clone pairs (and non-clone pairs) per functionality")
        ->capture_default_str();
    dataset_synth->add_option("--overlap", rc.synth.token_overlap,
                              "Fraction of snippet tokens drawn from the functionality core")
        ->capture_default_str();
    dataset_synth->add_option("--tokens", rc.synth.snippet_tokens, "Tokens per snippet")
        ->capture_default_str();
    dataset_synth->add_option("--core-vocab", rc.synth.core_vocab,
                              "Core vocabulary size per functionality")
        ->capture_default_str();
    dataset_synth->add_option("--shared-vocab", rc.synth.shared_vocab,
                              "Shared vocabulary size across functionalities")
        ->capture_default_str();
    dataset_synth->add_option("--seed", rc.seed, "Generator seed")->capture_default_str();
    dataset_synth->add_option("--out", rc.out_dir, "Output directory")->capture_default_str();

    // train -----------------------------------------------------------------
    auto* train = app.add_subcommand("train", "Train a model on a whole corpus");
    train->add_option("--corpus", rc.corpus_dir, "Corpus directory")
        ->required()
        ->check(CLI::ExistingDirectory);
    train->add_option("--variant", rc.variant, "Model variant: cl | baseline")
        ->check(CLI::IsMember({"cl", "baseline"}))
        ->capture_default_str();
    train->add_option("--seed", rc.seed, "Training and init seed")->capture_default_str();
    train->add_option("--out", rc.out_dir, "Output directory")->capture_default_str();
    add_model_options(train, rc);

    // eval ------------------------------------------------------------------
    auto* eval = app.add_subcommand("eval", "Run an evaluation protocol");
    eval->add_option("--corpus", rc.corpus_dir, "Corpus directory")
        ->required()
        ->check(CLI::ExistingDirectory);
    eval->add_option("--protocol", rc.protocol, "random | one-vs-rest | cross")
        ->check(CLI::IsMember({"random", "one-vs-rest", "cross"}))
        ->capture_default_str();
    eval->add_option("--test-corpus", rc.test_corpus_dir,
                     "Test corpus directory (cross protocol)")
        ->check(CLI::ExistingDirectory);
    eval->add_option("--train-fraction", rc.train_fraction,
                     "Training fraction for the random protocol")
        ->capture_default_str();
    eval->add_option("--variant", rc.variant, "cl | baseline | both")
        ->check(CLI::IsMember({"cl", "baseline", "both"}))
        ->capture_default_str();
    auto* reference_opt =
        eval->add_option("--reference-f1", rc.reference_f1,
                         "Reference F1 for a one-sample signed-rank test (alternative: less)");
    eval->add_option("--jobs", rc.jobs, "Max parallel experiments (0 = all cores)")
        ->capture_default_str();
    eval->add_option("--seed", rc.seed, "Split/training seed")->capture_default_str();
    eval->add_option("--out", rc.out_dir, "Output directory")->capture_default_str();
    add_model_options(eval, rc);

    // gridsearch ------------------------------------------------------------
    auto* grid = app.add_subcommand("gridsearch",
                                    "Train all (margin, head) cells and rank by validation F1");
    grid->add_option("--corpus", rc.corpus_dir, "Corpus directory")
        ->required()
        ->check(CLI::ExistingDirectory);
    grid->add_option("--train-fraction", rc.train_fraction, "Training fraction of the split")
        ->capture_default_str();
    grid->add_option("--margins", rc.margins, "Margin grid")
        ->delimiter(',')
        ->capture_default_str();
    grid->add_option("--heads", rc.heads, "Projection head grid")
        ->delimiter(',')
        ->check(CLI::IsMember({"identity", "batchnorm"}))
        ->capture_default_str();
    grid->add_option("--seed", rc.seed, "Split/training seed")->capture_default_str();
    grid->add_option("--out", rc.out_dir, "Output directory")->capture_default_str();
    add_model_options(grid, rc);

    // llm -------------------------------------------------------------------
    auto* llm = app.add_subcommand("llm", "Run an in-context LLM experiment or compare transcripts");
    llm->add_option("--corpus", rc.corpus_dir, "Corpus directory")
        ->check(CLI::ExistingDirectory);
    auto* endpoint_opt =
        llm->add_option("--endpoint", rc.llm.endpoint, "Chat-completions base URL");
    llm->add_option("--model", rc.llm.model, "Model name sent on the wire")
        ->capture_default_str();
    llm->add_option("--prompt", rc.prompt_kind, "Prompt shape: baseline | contrastive")
        ->check(CLI::IsMember({"baseline", "contrastive"}))
        ->capture_default_str();
    llm->add_option("--mode", rc.mode, "Example selection mode: seen | unseen")
        ->check(CLI::IsMember({"seen", "unseen"}))
        ->capture_default_str();
    llm->add_option("--n", rc.n_eval, "Pairs to classify")->capture_default_str();
    llm->add_option("--max-in-flight", rc.llm.max_in_flight, "Concurrent requests")
        ->capture_default_str();
    llm->add_option("--max-attempts", rc.llm.max_attempts, "Attempts per request")
        ->capture_default_str();
    llm->add_option("--backoff-ms", rc.llm.backoff_base_ms, "Retry backoff base (ms)")
        ->capture_default_str();
    llm->add_option("--timeout-ms", rc.llm.timeout_ms, "Request timeout (ms)")
        ->capture_default_str();
    llm->add_option("--api-key-env", rc.llm.api_key_env,
                    "Environment variable holding the API key")
        ->capture_default_str();
    llm->add_option("--compare", rc.compare,
                    "Two transcript files for a paired k-fold F1 comparison")
        ->expected(2);
    llm->add_option("--folds", rc.folds, "Folds for --compare")->capture_default_str();
    llm->add_option("--alternative", rc.alternative,
                    "Alternative hypothesis for --compare: less | greater | two-sided")
        ->check(CLI::IsMember({"less", "greater", "two-sided", "two_sided"}))
        ->capture_default_str();
    llm->add_option("--seed", rc.seed, "Sampling/selection seed (or fold seed with --compare)")
        ->capture_default_str();
    llm->add_option("--out", rc.out_dir, "Output directory")->capture_default_str();

    // report ----------------------------------------------------------------
    auto* report = app.add_subcommand("report", "Render reports or recompute transcript metrics");
    report->add_option("--input", rc.input_csv, "report.csv to render as Markdown")
        ->check(CLI::ExistingFile);
    report->add_option("--transcript", rc.transcript_path,
                       "transcript.jsonl to recompute metrics from")
        ->check(CLI::ExistingFile);
    report->add_option("--out", rc.out_dir, "Output directory")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (dataset_build->parsed()) {
            cmd_dataset_build(app, rc);
        } else if (dataset_synth->parsed()) {
            cmd_dataset_synth(app, rc);
        } else if (train->parsed()) {
            cmd_train(app, rc);
        } else if (eval->parsed()) {
            cmd_eval(app, rc, reference_opt->count() > 0);
        } else if (grid->parsed()) {
            cmd_gridsearch(app, rc);
        } else if (llm->parsed()) {
            cmd_llm(app, rc, endpoint_opt->count() > 0);
        } else if (report->parsed()) {
            cmd_report(app, rc);
        }
        return 0;
    } catch (const ValidationError& e) {
        std::fprintf(stderr, "validation error: %s\n", e.what());
        return 2;
    } catch (const DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 3;
    } catch (const TransportError& e) {
        std::fprintf(stderr, "transport error: %s\n", e.what());
        return 4;
    } catch (const DivergenceError& e) {
        std::fprintf(stderr, "divergence error: %s\n", e.what());
        return 5;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
