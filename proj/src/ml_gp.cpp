#include "ladderkit/ml_gp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>

#include <json.hpp>

#include "ladderkit/errors.hpp"
#include "parallel.hpp"

namespace ladderkit {

namespace {

const double kSqrt5 = std::sqrt(5.0);
constexpr double kLog2Pi = 1.8378770664093453;
constexpr double kMaxJitter = 1e-6;

Eigen::MatrixXd pairwise_distances(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
    Eigen::MatrixXd D(A.rows(), B.rows());
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        for (Eigen::Index j = 0; j < B.rows(); ++j) D(i, j) = (A.row(i) - B.row(j)).norm();
    return D;
}

Eigen::MatrixXd kernel_from_distances(const Eigen::MatrixXd& D, const GpHyper& h) {
    return D.unaryExpr([&](double d) { return matern52_r(d / h.length_scale, h.sigma_f2); });
}

// Cholesky of K + sigma_n2 I with escalating jitter; nullopt when even the
// largest jitter fails.
std::optional<Eigen::LLT<Eigen::MatrixXd>> factor(const Eigen::MatrixXd& D, const GpHyper& h, double& jitter) {
    Eigen::MatrixXd K = kernel_from_distances(D, h);
    K.diagonal().array() += h.sigma_n2;
    jitter = 0.0;
    for (;;) {
        Eigen::MatrixXd Kj = K;
        if (jitter > 0.0) Kj.diagonal().array() += jitter;
        Eigen::LLT<Eigen::MatrixXd> llt(Kj);
        if (llt.info() == Eigen::Success) {
            const auto& L = llt.matrixLLT();
            bool finite = true;
            for (Eigen::Index i = 0; i < L.rows(); ++i)
                if (!(L(i, i) > 0.0) || !std::isfinite(L(i, i))) finite = false;
            if (finite) return llt;
        }
        jitter = jitter == 0.0 ? 1e-10 : jitter * 10.0;
        if (jitter > kMaxJitter * 1.0000001) return std::nullopt;
    }
}

double lml_from(const Eigen::LLT<Eigen::MatrixXd>& llt, const Eigen::VectorXd& yc) {
    const Eigen::VectorXd alpha = llt.solve(yc);
    double logdet = 0.0;
    const auto& L = llt.matrixLLT();
    for (Eigen::Index i = 0; i < L.rows(); ++i) logdet += std::log(L(i, i));
    return -0.5 * yc.dot(alpha) - logdet - 0.5 * static_cast<double>(yc.size()) * kLog2Pi;
}

GpHyper clamp_hyper(GpHyper h, const GpBounds& b) {
    h.sigma_f2 = std::clamp(h.sigma_f2, b.sigma_f2_lo, b.sigma_f2_hi);
    h.length_scale = std::clamp(h.length_scale, b.length_lo, b.length_hi);
    h.sigma_n2 = std::clamp(h.sigma_n2, b.sigma_n2_lo, b.sigma_n2_hi);
    return h;
}

void check_finite(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    if (!X.allFinite() || !y.allFinite()) throw ValidationError("training data contains non-finite values");
}

// Multi-start coordinate descent over log hyperparameters.
GpHyper optimize_hyper(const Eigen::MatrixXd& D, const Eigen::VectorXd& yc, const GpHyper& init,
                       const GpFitOptions& opts) {
    const double n = static_cast<double>(yc.size());
    const double v = std::max(yc.squaredNorm() / n, 1e-6);
    const std::vector<GpHyper> candidates = {
        init, {v, 1.0, 0.1 * v}, {v, 0.3, 0.01 * v}, {v, 3.0, 1e-3 * v}, {0.5 * v, 1.0, 0.5 * v}};

    auto eval = [&](const GpHyper& h) {
        double jitter = 0.0;
        const auto llt = factor(D, h, jitter);
        return llt ? lml_from(*llt, yc) : -std::numeric_limits<double>::infinity();
    };

    GpHyper best = clamp_hyper(init, opts.bounds);
    double best_f = eval(best);
    const int starts = std::clamp(opts.starts, 1, static_cast<int>(candidates.size()));
    for (int k = 0; k < starts; ++k) {
        GpHyper h = clamp_hyper(candidates[static_cast<std::size_t>(k)], opts.bounds);
        double f = eval(h);
        double step = std::log(4.0);
        for (int it = 0; it < opts.iterations && step > 1e-2; ++it) {
            bool improved = false;
            for (int c = 0; c < 3; ++c)
                for (double sign : {1.0, -1.0}) {
                    GpHyper t = h;
                    double* p = c == 0 ? &t.sigma_f2 : c == 1 ? &t.length_scale : &t.sigma_n2;
                    *p *= std::exp(sign * step);
                    t = clamp_hyper(t, opts.bounds);
                    const double ft = eval(t);
                    if (ft > f + opts.tolerance) {
                        h = t;
                        f = ft;
                        improved = true;
                        break;
                    }
                }
            if (!improved) step *= 0.5;
        }
        if (f > best_f) {
            best = h;
            best_f = f;
        }
    }
    if (!std::isfinite(best_f)) throw ConditioningError("no hyperparameters give a positive definite kernel matrix");
    return best;
}

}  // namespace

double matern52_r(double r, double sigma_f2) noexcept {
    const double s = kSqrt5 * r;
    return sigma_f2 * (1.0 + s + s * s / 3.0) * std::exp(-s);
}

double matern52(std::span<const double> x1, std::span<const double> x2, double sigma_f2, double length_scale) {
    if (x1.size() != x2.size()) throw DomainError("kernel inputs differ in dimension");
    if (!(length_scale > 0.0)) throw DomainError("length scale must be positive");
    double d2 = 0.0;
    for (std::size_t i = 0; i < x1.size(); ++i) d2 += (x1[i] - x2[i]) * (x1[i] - x2[i]);
    return matern52_r(std::sqrt(d2) / length_scale, sigma_f2);
}

Standardizer Standardizer::fit(const Eigen::MatrixXd& X) {
    Standardizer s;
    const double n = static_cast<double>(X.rows());
    s.mean = X.colwise().mean();
    s.scale.resize(X.cols());
    for (Eigen::Index c = 0; c < X.cols(); ++c) {
        const double var = (X.col(c).array() - s.mean(c)).square().sum() / n;
        s.scale(c) = var > 1e-24 ? std::sqrt(var) : 1.0;
    }
    return s;
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& X) const {
    return (X.rowwise() - mean).array().rowwise() / scale.array();
}

double gp_log_marginal_likelihood(const Eigen::MatrixXd& Xs, const Eigen::VectorXd& yc, const GpHyper& h,
                                  double* jitter_used) {
    double jitter = 0.0;
    const auto llt = factor(pairwise_distances(Xs, Xs), h, jitter);
    if (!llt) throw ConditioningError("Cholesky failed after jitter escalation to 1e-6");
    if (jitter_used) *jitter_used = jitter;
    return lml_from(*llt, yc);
}

GpModel GpModel::fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const GpHyper& init,
                     const GpFitOptions& opts) {
    if (X.rows() < 1) throw InsufficientDataError("GP fit needs at least 1 row");
    if (X.rows() != y.size()) throw ValidationError("feature rows and targets differ in count");
    check_finite(X, y);
    // Canonical row order, so the fit depends on the set of rows only.
    std::vector<Eigen::Index> order(static_cast<std::size_t>(X.rows()));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        for (Eigen::Index c = 0; c < X.cols(); ++c)
            if (X(a, c) != X(b, c)) return X(a, c) < X(b, c);
        return y(a) < y(b);
    });
    GpModel m;
    m.X_raw_.resize(X.rows(), X.cols());
    m.y_raw_.resize(y.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        m.X_raw_.row(static_cast<Eigen::Index>(i)) = X.row(order[i]);
        m.y_raw_(static_cast<Eigen::Index>(i)) = y(order[i]);
    }
    const Eigen::MatrixXd& Xo = m.X_raw_;
    const Eigen::VectorXd& yo = m.y_raw_;
    m.std_ = Standardizer::fit(Xo);
    m.Xs_ = m.std_.apply(Xo);
    m.y_mean_ = yo.mean();
    const Eigen::VectorXd yc = yo.array() - m.y_mean_;
    const Eigen::MatrixXd D = pairwise_distances(m.Xs_, m.Xs_);
    if (!(init.length_scale > 0.0)) throw DomainError("length scale must be positive");
    // One row has nothing to fit; the model reduces to its mean.
    m.hyper_ = opts.optimize && X.rows() > 1 ? optimize_hyper(D, yc, init, opts) : init;
    const auto llt = factor(D, m.hyper_, m.jitter_);
    if (!llt) throw ConditioningError("Cholesky failed after jitter escalation to 1e-6");
    m.L_ = llt->matrixL();
    m.alpha_ = llt->solve(yc);
    m.lml_ = lml_from(*llt, yc);
    return m;
}

GpModel::Prediction GpModel::predict(std::span<const double> x) const {
    if (x.size() != dims()) throw DomainError("prediction input has the wrong dimension");
    Eigen::RowVectorXd row(static_cast<Eigen::Index>(x.size()));
    for (std::size_t i = 0; i < x.size(); ++i) row(static_cast<Eigen::Index>(i)) = x[i];
    const Eigen::RowVectorXd xs = (row - std_.mean).array() / std_.scale.array();
    Eigen::VectorXd k(Xs_.rows());
    for (Eigen::Index i = 0; i < Xs_.rows(); ++i)
        k(i) = matern52_r((Xs_.row(i) - xs).norm() / hyper_.length_scale, hyper_.sigma_f2);
    Prediction p;
    p.mean = y_mean_ + k.dot(alpha_);
    const Eigen::VectorXd v = L_.triangularView<Eigen::Lower>().solve(k);
    p.variance = std::max(0.0, hyper_.sigma_f2 - v.squaredNorm());
    return p;
}

double pearson(std::span<const double> a, std::span<const double> b) {
    const std::size_t n = a.size();
    if (n != b.size() || n < 2) return 0.0;
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(n);
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / static_cast<double>(n);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa <= 0.0 || sbb <= 0.0) return 0.0;
    return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

namespace {

std::vector<double> ranks(std::span<const double> v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
        i = j + 1;
    }
    return r;
}

}  // namespace

double spearman(std::span<const double> a, std::span<const double> b) {
    const auto ra = ranks(a), rb = ranks(b);
    return pearson(ra, rb);
}

RegressionMetrics regression_metrics(std::span<const double> truth, std::span<const double> predicted) {
    if (truth.size() != predicted.size() || truth.empty())
        throw ValidationError("metrics need equally sized, non-empty samples");
    RegressionMetrics m;
    const double n = static_cast<double>(truth.size());
    const double mean = std::accumulate(truth.begin(), truth.end(), 0.0) / n;
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        m.mae += std::abs(truth[i] - predicted[i]);
        ss_res += (truth[i] - predicted[i]) * (truth[i] - predicted[i]);
        ss_tot += (truth[i] - mean) * (truth[i] - mean);
    }
    m.mae /= n;
    m.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : (ss_res == 0.0 ? 1.0 : 0.0);
    m.pearson = pearson(truth, predicted);
    m.spearman = spearman(truth, predicted);
    return m;
}

std::vector<int> fold_assignment(std::size_t rows, int k, std::uint64_t seed) {
    if (k < 2) throw ConfigError("cross-validation needs k >= 2");
    if (rows < static_cast<std::size_t>(k)) throw InsufficientDataError("fewer rows than folds");
    std::vector<std::size_t> order(rows);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed);
    // Fisher-Yates with our own index draw so the partition does not depend on
    // the standard library's shuffle.
    for (std::size_t i = rows - 1; i > 0; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % (i + 1));
        std::swap(order[i], order[j]);
    }
    std::vector<int> fold(rows);
    for (std::size_t p = 0; p < rows; ++p) fold[order[p]] = static_cast<int>(p % static_cast<std::size_t>(k));
    return fold;
}

CVReport kfold_cv(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, int k, std::uint64_t seed,
                  const CvOptions& opts) {
    CVReport r = kfold_cv(X, y, fold_assignment(static_cast<std::size_t>(X.rows()), k, seed), opts);
    r.seed = seed;
    return r;
}

CVReport kfold_cv(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const std::vector<int>& assignment,
                  const CvOptions& opts) {
    if (static_cast<Eigen::Index>(assignment.size()) != X.rows() || X.rows() != y.size())
        throw ValidationError("fold assignment, features and targets differ in length");
    const int k = assignment.empty() ? 0 : *std::max_element(assignment.begin(), assignment.end()) + 1;
    if (k < 2) throw ConfigError("cross-validation needs k >= 2");
    CVReport r;
    r.folds = k;
    r.assignment = assignment;
    r.predictions.assign(assignment.size(), 0.0);
    r.per_fold.resize(static_cast<std::size_t>(k));

    detail::parallel_for(static_cast<std::size_t>(k), opts.jobs, [&](std::size_t f) {
        std::vector<Eigen::Index> train, test;
        for (std::size_t i = 0; i < assignment.size(); ++i)
            (assignment[i] == static_cast<int>(f) ? test : train).push_back(static_cast<Eigen::Index>(i));
        if (test.empty()) throw InsufficientDataError("empty fold " + std::to_string(f));
        Eigen::MatrixXd Xt(static_cast<Eigen::Index>(train.size()), X.cols());
        Eigen::VectorXd yt(static_cast<Eigen::Index>(train.size()));
        for (std::size_t i = 0; i < train.size(); ++i) {
            Xt.row(static_cast<Eigen::Index>(i)) = X.row(train[i]);
            yt(static_cast<Eigen::Index>(i)) = y(train[i]);
        }
        const GpModel m = GpModel::fit(Xt, yt, opts.hyper, opts.fit);
        std::vector<double> truth, pred;
        for (Eigen::Index i : test) {
            const Eigen::RowVectorXd row = X.row(i);
            const double p = m.predict_mean(std::span<const double>(row.data(), static_cast<std::size_t>(row.size())));
            r.predictions[static_cast<std::size_t>(i)] = p;
            truth.push_back(y(i));
            pred.push_back(p);
        }
        r.per_fold[f] = regression_metrics(truth, pred);
    });
    std::vector<double> truth(y.data(), y.data() + y.size());
    r.pooled = regression_metrics(truth, r.predictions);
    return r;
}

Eigen::MatrixXd select_columns(const Eigen::MatrixXd& X, std::span<const int> cols) {
    Eigen::MatrixXd out(X.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) {
        if (cols[c] < 0 || cols[c] >= X.cols()) throw DomainError("feature index out of range");
        out.col(static_cast<Eigen::Index>(c)) = X.col(cols[c]);
    }
    return out;
}

RfeResult rfe_select(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, int min_features, std::uint64_t cv_seed,
                     const RfeOptions& opts) {
    const int d = static_cast<int>(X.cols());
    if (min_features < 1) throw ConfigError("RFE needs min_features >= 1");
    if (min_features > d) throw ConfigError("min_features exceeds the number of features");
    const std::vector<int> folds = fold_assignment(static_cast<std::size_t>(X.rows()), opts.folds, cv_seed);

    auto score = [&](const std::vector<int>& subset) {
        const Eigen::MatrixXd Xs = select_columns(X, subset);
        CvOptions cv;
        cv.hyper = GpModel::fit(Xs, y, {}, opts.fit).hyper();
        cv.fit.optimize = false;
        return kfold_cv(Xs, y, folds, cv).pooled.mae;
    };

    RfeResult res;
    std::vector<int> current(static_cast<std::size_t>(d));
    std::iota(current.begin(), current.end(), 0);
    res.steps.push_back({current, score(current), -1});
    res.selected = current;
    res.best_mae = res.steps.back().cv_mae;

    while (static_cast<int>(current.size()) > min_features) {
        std::vector<double> maes(current.size());
        detail::parallel_for(current.size(), opts.jobs, [&](std::size_t i) {
            std::vector<int> trial = current;
            trial.erase(trial.begin() + static_cast<std::ptrdiff_t>(i));
            maes[i] = score(trial);
        });
        const auto best = static_cast<std::size_t>(std::min_element(maes.begin(), maes.end()) - maes.begin());
        const int removed = current[best];
        current.erase(current.begin() + static_cast<std::ptrdiff_t>(best));
        res.elimination_order.push_back(removed);
        res.steps.push_back({current, maes[best], removed});
        if (maes[best] < res.best_mae) {
            res.best_mae = maes[best];
            res.selected = current;
        }
    }
    return res;
}

std::vector<double> ChainModel::predict(std::span<const double> features) const {
    std::vector<double> out;
    for (const auto& link : links) {
        std::vector<double> x;
        for (int f : link.features) {
            if (f < 0 || static_cast<std::size_t>(f) >= features.size())
                throw DomainError("feature index out of range for " + link.target);
            x.push_back(features[static_cast<std::size_t>(f)]);
        }
        x.insert(x.end(), out.begin(), out.end());
        out.push_back(link.model.predict_mean(x));
    }
    return out;
}

ChainModel train_chain(const std::string& kind, const std::vector<std::string>& targets, const Eigen::MatrixXd& F,
                       const Eigen::MatrixXd& Y, const ChainOptions& opts) {
    if (Y.cols() != static_cast<Eigen::Index>(targets.size())) throw ValidationError("target columns do not match names");
    if (F.rows() != Y.rows()) throw ValidationError("feature rows and target rows differ in count");
    ChainModel chain;
    chain.kind = kind;
    chain.links.resize(targets.size());
    for (std::size_t t = 0; t < targets.size(); ++t) {
        ChainLink& link = chain.links[t];
        link.target = targets[t];
        const Eigen::VectorXd y = Y.col(static_cast<Eigen::Index>(t));
        if (opts.subset) {
            link.features = *opts.subset;
        } else {
            RfeOptions ro = opts.rfe;
            ro.jobs = opts.jobs;
            const int min_f = std::clamp(opts.rfe_min_features, 1, static_cast<int>(F.cols()));
            link.features = rfe_select(F, y, min_f, opts.seed + t, ro).selected;
        }
        Eigen::MatrixXd X(F.rows(), static_cast<Eigen::Index>(link.features.size() + t));
        X.leftCols(static_cast<Eigen::Index>(link.features.size())) = select_columns(F, link.features);
        if (t > 0) X.rightCols(static_cast<Eigen::Index>(t)) = Y.leftCols(static_cast<Eigen::Index>(t));
        link.model = GpModel::fit(X, y, {}, opts.fit);
    }
    return chain;
}

const std::vector<int>& default_knee_features() {
    static const std::vector<int> idx = {0, 1, 3, 4, 6, 8, 9, 11, 14, 15, 16};
    return idx;
}

const std::vector<std::string>& knee_targets() {
    static const std::vector<std::string> t = {"knee_2160p", "knee_1080p", "knee_720p", "knee_540p"};
    return t;
}

const std::vector<std::string>& crossover_targets() {
    static const std::vector<std::string> t = {"qp_high_2160p", "qp_low_1080p", "qp_high_1080p",
                                               "qp_low_720p",   "qp_high_720p", "qp_low_540p"};
    return t;
}

namespace {

std::vector<double> checked_predict(const ChainModel& m, const FeatureVector& f, const std::string& kind,
                                    const std::vector<std::string>& targets) {
    if (m.kind != kind) throw ConfigError("model predicts " + m.kind + ", not " + kind);
    if (m.links.size() != targets.size()) throw ConfigError("chain has " + std::to_string(m.links.size()) +
                                                            " links, expected " + std::to_string(targets.size()));
    for (std::size_t i = 0; i < targets.size(); ++i)
        if (m.links[i].target != targets[i]) throw ConfigError("missing chain link " + targets[i]);
    return m.predict(f.values);
}

}  // namespace

PerResolution<double> predict_knees_sequential(const ChainModel& m, const FeatureVector& f) {
    const auto p = checked_predict(m, f, "knees", knee_targets());
    PerResolution<double> out;
    for (std::size_t i = 0; i < kResolutionsDescending.size(); ++i) out[kResolutionsDescending[i]] = p[i];
    return out;
}

CrossoverQps predict_crossovers_sequential(const ChainModel& m, const FeatureVector& f) {
    const auto p = checked_predict(m, f, "crossovers", crossover_targets());
    CrossoverQps out;
    std::copy(p.begin(), p.end(), out.values.begin());
    return out;
}

void save_chain(const ChainModel& m, const std::filesystem::path& path) {
    nlohmann::json doc;
    doc["kind"] = m.kind;
    doc["links"] = nlohmann::json::array();
    for (const auto& l : m.links) {
        const GpModel& g = l.model;
        nlohmann::json link;
        link["target"] = l.target;
        link["features"] = l.features;
        link["hyper"] = {{"sigma_f2", g.hyper().sigma_f2},
                         {"length_scale", g.hyper().length_scale},
                         {"sigma_n2", g.hyper().sigma_n2}};
        link["standardizer"] = {
            {"mean", std::vector<double>(g.standardizer().mean.data(),
                                         g.standardizer().mean.data() + g.standardizer().mean.size())},
            {"scale", std::vector<double>(g.standardizer().scale.data(),
                                          g.standardizer().scale.data() + g.standardizer().scale.size())}};
        nlohmann::json X = nlohmann::json::array();
        for (Eigen::Index i = 0; i < g.train_inputs().rows(); ++i) {
            const Eigen::RowVectorXd r = g.train_inputs().row(i);
            X.push_back(std::vector<double>(r.data(), r.data() + r.size()));
        }
        link["X"] = std::move(X);
        link["y"] = std::vector<double>(g.train_targets().data(), g.train_targets().data() + g.train_targets().size());
        doc["links"].push_back(std::move(link));
    }
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << doc.dump(1) << '\n';
}

ChainModel load_chain(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    ChainModel m;
    try {
        const nlohmann::json doc = nlohmann::json::parse(in);
        m.kind = doc.at("kind").get<std::string>();
        for (const auto& l : doc.at("links")) {
            ChainLink link;
            link.target = l.at("target").get<std::string>();
            link.features = l.at("features").get<std::vector<int>>();
            GpHyper h;
            h.sigma_f2 = l.at("hyper").at("sigma_f2").get<double>();
            h.length_scale = l.at("hyper").at("length_scale").get<double>();
            h.sigma_n2 = l.at("hyper").at("sigma_n2").get<double>();
            const auto rows = l.at("X").get<std::vector<std::vector<double>>>();
            const auto y = l.at("y").get<std::vector<double>>();
            if (rows.empty() || rows.size() != y.size()) throw ParseError("model training data is inconsistent", 0);
            Eigen::MatrixXd X(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
            for (std::size_t i = 0; i < rows.size(); ++i) {
                if (rows[i].size() != rows[0].size()) throw ParseError("ragged model training data", 0);
                for (std::size_t j = 0; j < rows[i].size(); ++j)
                    X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
            }
            GpFitOptions fixed;
            fixed.optimize = false;
            link.model = GpModel::fit(X, Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size())),
                                      h, fixed);
            m.links.push_back(std::move(link));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("model file: ") + e.what(), 0);
    }
    return m;
}

Eigen::MatrixXd feature_matrix(const std::vector<FeatureVector>& rows) {
    Eigen::MatrixXd F(static_cast<Eigen::Index>(rows.size()), kFeatureCount);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (int j = 0; j < kFeatureCount; ++j)
            F(static_cast<Eigen::Index>(i), j) = rows[i].values[static_cast<std::size_t>(j)];
    return F;
}

}  // namespace ladderkit
