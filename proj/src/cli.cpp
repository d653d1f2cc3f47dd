#include "ladderkit/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>

#include <CLI11.hpp>
#include <Eigen/Core>
#include <json.hpp>

#include "ladderkit/encode_backend.hpp"
#include "ladderkit/errors.hpp"
#include "ladderkit/estimators.hpp"
#include "ladderkit/eval.hpp"
#include "ladderkit/features.hpp"
#include "ladderkit/io.hpp"
#include "ladderkit/ml_gp.hpp"
#include "parallel.hpp"

namespace ladderkit {

namespace fs = std::filesystem;
using nlohmann::json;

std::string version_string() { return "0.1.0"; }

namespace {

struct Globals {
    unsigned jobs = 0;
    int qp_min = 15;
    int qp_max = 45;

    QpRange range() const {
        if (qp_min > qp_max) throw ConfigError("--qp-min exceeds --qp-max");
        return {qp_min, qp_max};
    }
};

struct SourceOptions {
    std::string measurements;
    std::string params;
    std::string encoder;
    std::vector<std::string> sequences;
};

void add_source_options(CLI::App* sub, SourceOptions& s) {
    auto* m = sub->add_option("--measurements", s.measurements, "measurement table (CSV or JSON), replayed");
    auto* p = sub->add_option("--params", s.params, "synthetic corpus parameters (JSON)");
    auto* e = sub->add_option("--encoder", s.encoder, "external encode command");
    m->excludes(p)->excludes(e);
    p->excludes(e);
    sub->add_option("--sequences", s.sequences, "restrict to these sequences")->delimiter(',');
}

struct Source {
    std::shared_ptr<EncodeBackend> backend;
    std::shared_ptr<const MeasurementSet> set;
    std::vector<std::string> sequences;
};

std::vector<std::string> restrict_to(std::vector<std::string> all, const std::vector<std::string>& wanted) {
    if (wanted.empty()) return all;
    const std::set<std::string> have(all.begin(), all.end());
    for (const auto& w : wanted)
        if (!have.count(w)) throw ValidationError("unknown sequence " + w);
    std::vector<std::string> out = wanted;
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

MeasurementSet evaluate_params(const std::map<std::string, SyntheticCurveParams>& params, QpRange range) {
    std::vector<EncodeRecord> records;
    for (const auto& [seq, p] : params)
        for (Resolution r : kResolutions)
            for (int qp : range.all()) records.push_back(evaluate_synthetic(p, seq, r, qp));
    return MeasurementSet::from_records(std::move(records), range);
}

Source open_source(const SourceOptions& s, QpRange range, std::ostream& err) {
    Source src;
    if (!s.measurements.empty()) {
        auto set = std::make_shared<MeasurementSet>(load_measurements(s.measurements, range));
        for (const auto& w : set->warnings()) err << "warning: " << w << '\n';
        src.sequences = restrict_to(set->sequences(), s.sequences);
        src.set = set;
        src.backend = std::make_shared<ReplayBackend>(set);
    } else if (!s.params.empty()) {
        auto params = load_synthetic_params(s.params);
        std::vector<std::string> names;
        for (const auto& [k, v] : params) names.push_back(k);
        src.sequences = restrict_to(names, s.sequences);
        src.backend = std::make_shared<SyntheticBackend>(std::move(params));
    } else if (!s.encoder.empty()) {
        if (s.sequences.empty()) throw ConfigError("--encoder needs --sequences");
        src.sequences = restrict_to(s.sequences, {});
        src.backend = std::make_shared<ExternalCommandBackend>(s.encoder);
    } else {
        throw ConfigError("one of --measurements, --params or --encoder is required");
    }
    if (src.sequences.empty()) throw InsufficientDataError("no sequences to process");
    return src;
}

MeasurementSet measurement_set(const SourceOptions& s, QpRange range, std::ostream& err) {
    if (!s.measurements.empty()) {
        MeasurementSet set = load_measurements(s.measurements, range);
        for (const auto& w : set.warnings()) err << "warning: " << w << '\n';
        return set;
    }
    if (!s.params.empty()) return evaluate_params(load_synthetic_params(s.params), range);
    throw ConfigError("one of --measurements or --params is required");
}

std::optional<fs::path> cache_file() {
    const char* dir = std::getenv("LADDERKIT_CACHE");
    if (!dir || !*dir) return std::nullopt;
    return fs::path(dir) / "encodes.csv";
}

void preload_cache(EncodeSession& session, QpRange range) {
    const auto path = cache_file();
    if (!path || !fs::exists(*path)) return;
    session.preload(load_measurements(*path, TableFormat::csv, range).records());
}

void store_cache(const EncodeSession& session) {
    const auto path = cache_file();
    if (!path) return;
    fs::create_directories(path->parent_path());
    session.save_cache(*path);
}

void write_run_files(const fs::path& dir, const std::vector<std::string>& args, const CLI::App& app,
                     const CLI::App& leaf) {
    fs::create_directories(dir);
    json options = json::object();
    auto record = [&](const CLI::App& a) {
        for (const CLI::Option* o : a.get_options()) {
            if (o->count() == 0 || o->get_name() == "--help" || o->get_name() == "-h,--help") continue;
            options[o->get_name()] = o->results();
        }
    };
    record(app);
    std::vector<std::string> path;
    for (const CLI::App* a = &leaf; a && a != &app; a = a->get_parent()) {
        record(*a);
        path.insert(path.begin(), a->get_name());
    }
    json cfg = {{"command", path}, {"argv", args}, {"options", options}, {"version", version_string()}};
    if (const auto c = cache_file()) cfg["cache"] = c->string();
    std::ofstream(dir / "config.json") << cfg.dump(1) << '\n';
    std::ofstream v(dir / "versions.txt");
    v << "ladderkit " << version_string() << '\n';
    v << "compiler " << __VERSION__ << '\n';
    v << "eigen " << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.' << EIGEN_MINOR_VERSION << '\n';
    v << "nlohmann_json " << NLOHMANN_JSON_VERSION_MAJOR << '.' << NLOHMANN_JSON_VERSION_MINOR << '.'
      << NLOHMANN_JSON_VERSION_PATCH << '\n';
    v << "cli11 " << CLI11_VERSION << '\n';
}

fs::path run_dir_of_file(const std::string& file) {
    const fs::path p(file);
    return p.has_parent_path() ? p.parent_path() : fs::path(".");
}

// ---- corpus synth

struct SynthOptions {
    int n = 100;
    std::uint64_t seed = 1;
    double noise = 0.0;
    std::string out;
    std::string params_out;
};

int cmd_corpus_synth(const SynthOptions& o, const Globals& g, std::ostream& out) {
    ParamSampler sampler;
    sampler.noise_sigma = o.noise;
    const QpRange range = g.range();
    const SyntheticCorpus corpus = generate_corpus(o.n, sampler, o.seed, range);
    save_measurements(corpus.measurements, o.out, format_from_path(o.out));
    fs::path params = o.params_out;
    if (params.empty()) params = fs::path(o.out).replace_extension(".params.json");
    save_synthetic_params(corpus.params, params);
    out << "wrote " << corpus.measurements.record_count() << " encodes of " << o.n << " sequences to " << o.out
        << " (parameters: " << params.string() << ")\n";
    return kExitOk;
}

// ---- ladder reference / estimate

struct LadderOptions {
    SourceOptions source;
    std::string method = "cil";
    int n = 5;
    std::string knees;
    std::string crossovers;
    std::string out;
};

int cmd_ladders(Method method, const LadderOptions& o, const Globals& g, std::ostream& out, std::ostream& err) {
    MethodConfig cfg;
    cfg.method = method;
    cfg.cil_n = o.n;
    cfg.qp_range = g.range();
    if (method == Method::cil && o.n < 1) throw ConfigError("--n must be at least 1");

    const Source src = open_source(o.source, cfg.qp_range, err);
    KneeTable knees;
    CrossoverTable crossovers;
    if (method == Method::cil) {
        if (o.knees.empty()) throw ConfigError("cil needs --knees");
        knees = load_knee_table(o.knees);
    }
    if (method == Method::fl) {
        if (o.crossovers.empty()) throw ConfigError("fl needs --crossovers");
        crossovers = load_crossover_table(o.crossovers);
    }
    for (const auto& s : src.sequences) {
        if (method == Method::cil && !knees.count(s)) throw ValidationError("no knees for sequence " + s);
        if (method == Method::fl && !crossovers.count(s)) throw ValidationError("no cross-overs for sequence " + s);
    }

    EncodeSession session(src.backend, cfg.qp_range);
    preload_cache(session, cfg.qp_range);
    std::vector<EstimateResult> results(src.sequences.size());
    detail::parallel_for(src.sequences.size(), g.jobs, [&](std::size_t i) {
        const std::string& s = src.sequences[i];
        switch (method) {
            case Method::rl: results[i] = estimate_rl(session, s, cfg); break;
            case Method::nil: results[i] = estimate_nil(session, s, cfg); break;
            case Method::cil: results[i] = estimate_cil(session, s, knees.at(s), cfg); break;
            case Method::fl: results[i] = estimate_fl(session, s, crossovers.at(s), cfg); break;
        }
    });
    store_cache(session);

    const fs::path dir(o.out);
    std::vector<Ladder> ladders;
    std::map<std::string, std::size_t> tally;
    std::size_t max_tally = 0;
    for (const auto& r : results) {
        save_ladder_json(r.ladder, dir / "ladders" / (r.sequence_id + ".json"));
        save_estimate_report(r, cfg, dir / "reports" / (r.sequence_id + ".json"));
        for (const auto& w : r.warnings) err << "warning: " << r.sequence_id << ": " << w << '\n';
        ladders.push_back(r.ladder);
        tally[r.sequence_id] = r.tally;
        max_tally = std::max(max_tally, r.tally);
    }
    save_ladders_csv(ladders, dir / "ladders.csv");
    save_tally_csv(tally, dir / "tally.csv");

    const std::size_t rl_tally = 4 * static_cast<std::size_t>(cfg.qp_range.size());
    const std::size_t budget = method_budget(method, cfg, cfg.targets().size());
    json summary = {{"method", method_name(method)},
                    {"sequences", results.size()},
                    {"max_tally", max_tally},
                    {"budget", budget},
                    {"rl_tally", rl_tally},
                    {"encode_reduction_percent", (1.0 - static_cast<double>(max_tally) / rl_tally) * 100.0},
                    {"backend", session.backend_kind()},
                    {"backend_calls", session.backend_calls()}};
    std::ofstream(dir / "summary.json") << summary.dump(1) << '\n';
    out << method_name(method) << ": " << results.size() << " ladders, max tally " << max_tally << " (budget "
        << budget << ") -> " << o.out << '\n';
    return kExitOk;
}

// ---- knees / crossovers

struct TruthOptions {
    SourceOptions source;
    std::string out;
};

int cmd_knees(const TruthOptions& o, const Globals& g, std::ostream& out, std::ostream& err) {
    MethodConfig cfg;
    cfg.qp_range = g.range();
    const MeasurementSet set = measurement_set(o.source, cfg.qp_range, err);
    const auto seqs = restrict_to(set.sequences(), o.source.sequences);
    std::vector<PerResolution<double>> knees(seqs.size());
    std::vector<std::vector<std::string>> warnings(seqs.size());
    detail::parallel_for(seqs.size(), g.jobs,
                         [&](std::size_t i) { knees[i] = measured_knees(set, seqs[i], cfg, &warnings[i]); });
    KneeTable table;
    for (std::size_t i = 0; i < seqs.size(); ++i) {
        table[seqs[i]] = knees[i];
        for (const auto& w : warnings[i]) err << "warning: " << seqs[i] << ": " << w << '\n';
    }
    save_knee_table(table, o.out);
    out << "knees of " << table.size() << " sequences -> " << o.out << '\n';
    return kExitOk;
}

int cmd_crossovers(const TruthOptions& o, const Globals& g, std::ostream& out, std::ostream& err) {
    const MeasurementSet set = measurement_set(o.source, g.range(), err);
    const auto seqs = restrict_to(set.sequences(), o.source.sequences);
    std::vector<CrossoverQps> xs(seqs.size());
    detail::parallel_for(seqs.size(), g.jobs, [&](std::size_t i) { xs[i] = measured_crossovers(set, seqs[i]); });
    CrossoverTable table;
    for (std::size_t i = 0; i < seqs.size(); ++i) table[seqs[i]] = xs[i];
    save_crossover_table(table, o.out);
    out << "cross-overs of " << table.size() << " sequences -> " << o.out << '\n';
    return kExitOk;
}

// ---- features extract

struct FeatureOptions {
    std::vector<std::string> inputs;
    int width = 3840;
    int height = 2160;
    int bit_depth = 10;
    int frames = 0;
    std::string out;
};

YuvFormat format_for(const fs::path& input, const FeatureOptions& o, const CLI::App& sub) {
    YuvFormat fmt;
    fs::path sidecar = input;
    sidecar += ".json";
    if (!fs::exists(sidecar)) sidecar = fs::path(input).replace_extension(".json");
    if (fs::exists(sidecar)) {
        std::ifstream in(sidecar);
        try {
            const json j = json::parse(in);
            fmt.width = j.value("width", fmt.width);
            fmt.height = j.value("height", fmt.height);
            fmt.bit_depth = j.value("bit_depth", fmt.bit_depth);
            if (j.contains("frames")) fmt.frames = j.at("frames").get<int>();
        } catch (const json::exception& e) {
            throw ParseError(sidecar.string() + ": " + e.what(), 0);
        }
    }
    if (sub.count("--width")) fmt.width = o.width;
    if (sub.count("--height")) fmt.height = o.height;
    if (sub.count("--bit-depth")) fmt.bit_depth = o.bit_depth;
    if (sub.count("--frames") && o.frames > 0) fmt.frames = o.frames;
    return fmt;
}

int cmd_features(const FeatureOptions& o, const CLI::App& sub, const Globals& g, std::ostream& out) {
    std::vector<FeatureVector> rows(o.inputs.size());
    std::set<std::string> ids;
    for (const auto& in : o.inputs)
        if (!ids.insert(fs::path(in).stem().string()).second)
            throw ConflictError("two inputs share the sequence name " + fs::path(in).stem().string());
    detail::parallel_for(o.inputs.size(), g.jobs, [&](std::size_t i) {
        const fs::path p(o.inputs[i]);
        const auto frames = read_yuv420_luma(p, format_for(p, o, sub));
        rows[i] = extract_features(p.stem().string(), frames);
    });
    std::sort(rows.begin(), rows.end(),
              [](const FeatureVector& a, const FeatureVector& b) { return a.sequence_id < b.sequence_id; });
    save_feature_table(rows, o.out);
    out << "features of " << rows.size() << " sequences -> " << o.out << '\n';
    return kExitOk;
}

// ---- train / predict

struct TrainOptions {
    std::string kind;
    std::string features;
    std::string targets;
    std::string out;
    std::string select = "default";
    int min_features = 1;
    std::uint64_t seed = 1;
    int folds = 10;
};

int cmd_train(const TrainOptions& o, const Globals& g, std::ostream& out, std::ostream& err) {
    const bool knees = o.kind == "knees";
    const auto& names = knees ? knee_targets() : crossover_targets();
    std::map<std::string, std::vector<double>> targets;
    if (knees) {
        for (const auto& [s, k] : load_knee_table(o.targets)) {
            std::vector<double> row;
            for (Resolution r : kResolutionsDescending) row.push_back(k[r]);
            targets[s] = row;
        }
    } else {
        for (const auto& [s, x] : load_crossover_table(o.targets)) targets[s] = {x.values.begin(), x.values.end()};
    }
    std::vector<FeatureVector> rows;
    std::vector<std::vector<double>> ys;
    for (auto& f : load_feature_table(o.features)) {
        const auto t = targets.find(f.sequence_id);
        if (t == targets.end()) {
            err << "warning: no targets for " << f.sequence_id << ", skipped\n";
            continue;
        }
        ys.push_back(t->second);
        rows.push_back(std::move(f));
    }
    if (rows.size() < 2) throw InsufficientDataError("training needs at least 2 sequences with features and targets");

    const Eigen::MatrixXd F = feature_matrix(rows);
    Eigen::MatrixXd Y(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(names.size()));
    for (std::size_t i = 0; i < ys.size(); ++i)
        for (std::size_t j = 0; j < names.size(); ++j)
            Y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = ys[i][j];

    ChainOptions co;
    co.seed = o.seed;
    co.jobs = g.jobs;
    co.rfe_min_features = o.min_features;
    co.rfe.folds = std::min<int>(o.folds, static_cast<int>(rows.size()));
    std::vector<int> all(kFeatureCount);
    for (int i = 0; i < kFeatureCount; ++i) all[static_cast<std::size_t>(i)] = i;
    if (o.select == "all") {
        co.subset = all;
    } else if (o.select == "default") {
        if (knees) co.subset = default_knee_features();
    } else if (o.select != "rfe") {
        throw ConfigError("unknown feature selection " + o.select);
    }
    const ChainModel model = train_chain(o.kind, names, F, Y, co);
    save_chain(model, o.out);

    // Cross-validated accuracy of each link with true upstream targets as inputs.
    json report = {{"kind", o.kind}, {"seed", o.seed}, {"sequences", rows.size()}, {"targets", json::array()}};
    const int folds = std::min<int>(o.folds, static_cast<int>(rows.size()));
    for (std::size_t t = 0; t < model.links.size(); ++t) {
        const ChainLink& link = model.links[t];
        Eigen::MatrixXd X(F.rows(), static_cast<Eigen::Index>(link.features.size() + t));
        X.leftCols(static_cast<Eigen::Index>(link.features.size())) = select_columns(F, link.features);
        if (t > 0) X.rightCols(static_cast<Eigen::Index>(t)) = Y.leftCols(static_cast<Eigen::Index>(t));
        CvOptions cv;
        cv.jobs = g.jobs;
        const CVReport r = kfold_cv(X, Y.col(static_cast<Eigen::Index>(t)), folds, o.seed, cv);
        std::vector<std::string> fnames;
        for (int f : link.features) fnames.push_back(feature_names()[static_cast<std::size_t>(f)]);
        report["targets"].push_back({{"target", link.target},
                                     {"features", fnames},
                                     {"mae", r.pooled.mae},
                                     {"r2", r.pooled.r2},
                                     {"lcc", r.pooled.pearson},
                                     {"srcc", r.pooled.spearman},
                                     {"folds", r.folds}});
        out << link.target << ": CV MAE " << r.pooled.mae << " QP over " << link.features.size() << " features\n";
    }
    std::ofstream(fs::path(o.out).replace_extension(".cv.json")) << report.dump(1) << '\n';
    out << "model -> " << o.out << '\n';
    return kExitOk;
}

struct PredictOptions {
    std::string model;
    std::string features;
    std::string out;
};

int cmd_predict(const PredictOptions& o, std::ostream& out) {
    const ChainModel model = load_chain(o.model);
    const auto rows = load_feature_table(o.features);
    if (model.kind == "knees") {
        KneeTable table;
        for (const auto& f : rows) table[f.sequence_id] = predict_knees_sequential(model, f);
        save_knee_table(table, o.out);
    } else if (model.kind == "crossovers") {
        CrossoverTable table;
        for (const auto& f : rows) table[f.sequence_id] = predict_crossovers_sequential(model, f);
        save_crossover_table(table, o.out);
    } else {
        throw ConfigError("unknown model kind " + model.kind);
    }
    out << model.kind << " of " << rows.size() << " sequences -> " << o.out << '\n';
    return kExitOk;
}

// ---- eval bdrate

struct EvalOptions {
    std::string ref;
    std::string test;
    std::string out;
    int rl_tally = 0;
    int bins = 20;
};

int cmd_eval(const EvalOptions& o, const Globals& g, std::ostream& out) {
    const auto ref = load_ladder_dir(o.ref);
    const auto test = load_ladder_dir(o.test);
    if (test.empty()) throw InsufficientDataError("no ladders in " + o.test);
    std::map<std::string, std::size_t> tally;
    if (const fs::path t = fs::path(o.test) / "tally.csv"; fs::exists(t)) tally = load_tally_csv(t);

    std::vector<std::string> seqs;
    for (const auto& [s, l] : test) {
        if (!ref.count(s)) throw ValidationError("no reference ladder for " + s);
        seqs.push_back(s);
    }
    std::vector<SequenceResult> results(seqs.size());
    detail::parallel_for(seqs.size(), g.jobs, [&](std::size_t i) {
        const Ladder& t = test.at(seqs[i]);
        const Ladder& r = ref.at(seqs[i]);
        const auto tp = rate_points(t), rp = rate_points(r);
        results[i] = {seqs[i], bd_rate(tp, rp).bd_rate_percent, rl_hits(t, r),
                      tally.count(seqs[i]) ? tally.at(seqs[i]) : 0};
    });
    const std::size_t rl_tally =
        o.rl_tally > 0 ? static_cast<std::size_t>(o.rl_tally) : 4 * static_cast<std::size_t>(g.range().size());
    const CorpusReport report = corpus_report(results, rl_tally, static_cast<std::size_t>(o.bins));

    const fs::path dir(o.out);
    fs::create_directories(dir);
    write_report_json(report, dir / "report.json");
    write_histogram_csv(report.bd_histogram, dir / "histogram.csv");
    std::ofstream per(dir / "per_sequence.csv");
    per << "sequence,bd_rate_percent,rl_hits_percent,tally\n";
    for (const auto& r : report.sequences)
        per << r.sequence_id << ',' << format_double(r.bd_rate_percent) << ',' << format_double(r.rl_hits_percent)
            << ',' << r.tally << '\n';
    out << "BD-Rate mean " << report.mean_bd_rate << "% (mad " << report.mad_bd_rate << "), RL-hits "
        << report.mean_rl_hits << "%, encode reduction " << report.encode_reduction_percent << "% -> " << o.out
        << '\n';
    return kExitOk;
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, int depth);

int run_parsed(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, int depth) {
    CLI::App app{"Per-title bitrate ladder estimation toolkit", "ladderkit"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", version_string());

    Globals g;
    app.add_option("--jobs", g.jobs, "worker threads (0: all cores)");
    app.add_option("--qp-min", g.qp_min, "lowest QP of the universe");
    app.add_option("--qp-max", g.qp_max, "highest QP of the universe");

    auto* corpus = app.add_subcommand("corpus", "synthetic corpora")->require_subcommand(1);
    SynthOptions synth;
    auto* synth_cmd = corpus->add_subcommand("synth", "sample a synthetic corpus");
    synth_cmd->add_option("--n", synth.n, "number of sequences")->check(CLI::PositiveNumber);
    synth_cmd->add_option("--seed", synth.seed, "sampler seed");
    synth_cmd->add_option("--noise", synth.noise, "additive VMAF noise sigma")->check(CLI::NonNegativeNumber);
    synth_cmd->add_option("--out", synth.out, "measurement table to write")->required();
    synth_cmd->add_option("--params-out", synth.params_out, "ground-truth parameters (JSON)");

    auto* ladder = app.add_subcommand("ladder", "ladder construction")->require_subcommand(1);
    LadderOptions ref_opts;
    auto* ref_cmd = ladder->add_subcommand("reference", "exhaustive reference ladders");
    add_source_options(ref_cmd, ref_opts.source);
    ref_cmd->add_option("--out", ref_opts.out, "output directory")->required();
    LadderOptions est_opts;
    auto* est_cmd = ladder->add_subcommand("estimate", "estimated ladders");
    add_source_options(est_cmd, est_opts.source);
    est_cmd->add_option("--method", est_opts.method, "estimator")->check(CLI::IsMember({"nil", "cil", "fl"}));
    est_cmd->add_option("--n", est_opts.n, "QPs per resolution for cil");
    est_cmd->add_option("--knees", est_opts.knees, "knee table for cil");
    est_cmd->add_option("--crossovers", est_opts.crossovers, "cross-over table for fl");
    est_cmd->add_option("--out", est_opts.out, "output directory")->required();

    TruthOptions knee_opts;
    auto* knee_cmd = app.add_subcommand("knees", "knee QPs from full measurements");
    add_source_options(knee_cmd, knee_opts.source);
    knee_cmd->add_option("--out", knee_opts.out, "knee table to write")->required();
    TruthOptions cross_opts;
    auto* cross_cmd = app.add_subcommand("crossovers", "cross-over QPs from full measurements");
    add_source_options(cross_cmd, cross_opts.source);
    cross_cmd->add_option("--out", cross_opts.out, "cross-over table to write")->required();

    auto* features = app.add_subcommand("features", "content features")->require_subcommand(1);
    FeatureOptions feat;
    auto* feat_cmd = features->add_subcommand("extract", "features of raw YUV 4:2:0 files");
    feat_cmd->add_option("--input", feat.inputs, "input files")->required()->check(CLI::ExistingFile);
    feat_cmd->add_option("--width", feat.width, "luma width")->check(CLI::PositiveNumber);
    feat_cmd->add_option("--height", feat.height, "luma height")->check(CLI::PositiveNumber);
    feat_cmd->add_option("--bit-depth", feat.bit_depth, "sample bit depth")->check(CLI::Range(8, 16));
    feat_cmd->add_option("--frames", feat.frames, "frames to read (0: all)")->check(CLI::NonNegativeNumber);
    feat_cmd->add_option("--out", feat.out, "feature table to write")->required();

    TrainOptions train;
    auto* train_cmd = app.add_subcommand("train", "train a sequential GP predictor");
    train_cmd->add_option("kind", train.kind, "knees or crossovers")
        ->required()
        ->check(CLI::IsMember({"knees", "crossovers"}));
    train_cmd->add_option("--features", train.features, "feature table")->required();
    train_cmd->add_option("--targets", train.targets, "knee or cross-over table")->required();
    train_cmd->add_option("--out", train.out, "model JSON to write")->required();
    train_cmd->add_option("--select", train.select, "feature subset")->check(CLI::IsMember({"default", "all", "rfe"}));
    train_cmd->add_option("--min-features", train.min_features, "RFE floor")->check(CLI::PositiveNumber);
    train_cmd->add_option("--seed", train.seed, "fold seed");
    train_cmd->add_option("--folds", train.folds, "cross-validation folds")->check(CLI::Range(2, 1000));

    PredictOptions pred;
    auto* pred_cmd = app.add_subcommand("predict", "apply a trained predictor");
    pred_cmd->add_option("--model", pred.model, "model JSON")->required();
    pred_cmd->add_option("--features", pred.features, "feature table")->required();
    pred_cmd->add_option("--out", pred.out, "table to write")->required();

    auto* eval = app.add_subcommand("eval", "evaluation")->require_subcommand(1);
    EvalOptions ev;
    auto* bd_cmd = eval->add_subcommand("bdrate", "BD-Rate and RL-hits against reference ladders");
    bd_cmd->add_option("--ref", ev.ref, "reference ladder directory")->required();
    bd_cmd->add_option("--test", ev.test, "estimated ladder directory")->required();
    bd_cmd->add_option("--out", ev.out, "report directory")->required();
    bd_cmd->add_option("--rl-tally", ev.rl_tally, "encodes of the reference (default: 4 x QPs)");
    bd_cmd->add_option("--bins", ev.bins, "histogram bins")->check(CLI::PositiveNumber);

    std::string rerun_config;
    auto* rerun_cmd = app.add_subcommand("rerun", "repeat a run from its config.json");
    rerun_cmd->add_option("config", rerun_config, "config.json of an earlier run")->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    if (rerun_cmd->parsed()) {
        if (depth > 0) throw ConfigError("a rerun config cannot itself be a rerun");
        std::ifstream in(rerun_config);
        if (!in) throw IoError("cannot open " + rerun_config);
        json cfg;
        try {
            cfg = json::parse(in);
        } catch (const json::exception& e) {
            throw ParseError(rerun_config + ": " + e.what(), 0);
        }
        if (!cfg.contains("argv")) throw ConfigError(rerun_config + " has no argv");
        return dispatch(cfg.at("argv").get<std::vector<std::string>>(), out, err, depth + 1);
    }

    if (synth_cmd->parsed()) {
        write_run_files(run_dir_of_file(synth.out), args, app, *synth_cmd);
        return cmd_corpus_synth(synth, g, out);
    }
    if (ref_cmd->parsed()) {
        write_run_files(ref_opts.out, args, app, *ref_cmd);
        return cmd_ladders(Method::rl, ref_opts, g, out, err);
    }
    if (est_cmd->parsed()) {
        write_run_files(est_opts.out, args, app, *est_cmd);
        return cmd_ladders(parse_method(est_opts.method), est_opts, g, out, err);
    }
    if (knee_cmd->parsed()) {
        write_run_files(run_dir_of_file(knee_opts.out), args, app, *knee_cmd);
        return cmd_knees(knee_opts, g, out, err);
    }
    if (cross_cmd->parsed()) {
        write_run_files(run_dir_of_file(cross_opts.out), args, app, *cross_cmd);
        return cmd_crossovers(cross_opts, g, out, err);
    }
    if (feat_cmd->parsed()) {
        write_run_files(run_dir_of_file(feat.out), args, app, *feat_cmd);
        return cmd_features(feat, *feat_cmd, g, out);
    }
    if (train_cmd->parsed()) {
        write_run_files(run_dir_of_file(train.out), args, app, *train_cmd);
        return cmd_train(train, g, out, err);
    }
    if (pred_cmd->parsed()) {
        write_run_files(run_dir_of_file(pred.out), args, app, *pred_cmd);
        return cmd_predict(pred, out);
    }
    if (bd_cmd->parsed()) {
        write_run_files(ev.out, args, app, *bd_cmd);
        return cmd_eval(ev, g, out);
    }
    err << "no command\n";
    return kExitUsage;
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, int depth) {
    try {
        return run_parsed(args, out, err, depth);
    } catch (const BackendError& e) {
        err << "backend error: " << e.what() << '\n';
        return kExitBackend;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    return dispatch(args, out, err, 0);
}

}  // namespace ladderkit
